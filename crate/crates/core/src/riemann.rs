//! Riemann-sphere kernel: chordal geometry, pole-aware jets, and the
//! spherical derivative `f^# = |f'| / (1 + |f|^2)`.
//!
//! Values near or at poles are stored through the reciprocal `1/f`, so every
//! quantity here is finite in at least one of the two charts. The spherical
//! derivative is chart-independent, `(1/f)^# = f^#`, which is what makes the
//! reciprocal representation lossless for our purposes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point on the Riemann sphere, stored in whichever affine chart keeps the
/// coordinate small: `Finite(v)` holds the value itself, `Infinite { recip }`
/// holds `1/v` (zero meaning the point at infinity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinite { recip: Complex64 },
}

impl SpherePoint {
    /// Wrap a finite value, switching to the reciprocal chart when |v| > 1 so
    /// stored magnitudes stay bounded by 1.
    pub fn from_value(v: Complex64) -> Self {
        if !v.re.is_finite() || !v.im.is_finite() {
            SpherePoint::Infinite { recip: Complex64::new(0.0, 0.0) }
        } else if v.norm_sqr() > 1.0 {
            SpherePoint::Infinite { recip: v.inv() }
        } else {
            SpherePoint::Finite(v)
        }
    }

    pub fn infinity() -> Self {
        SpherePoint::Infinite { recip: Complex64::new(0.0, 0.0) }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinite { recip } if recip.norm_sqr() == 0.0)
    }

    /// The value as an ordinary complex number; the point at infinity maps to
    /// `(inf, 0)`.
    pub fn value(&self) -> Complex64 {
        match *self {
            SpherePoint::Finite(v) => v,
            SpherePoint::Infinite { recip } => {
                if recip.norm_sqr() == 0.0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    recip.inv()
                }
            }
        }
    }

    /// 1/value as a sphere point; an exact chart swap, so applying it twice
    /// returns the original point bit for bit.
    pub fn recip(&self) -> SpherePoint {
        match *self {
            SpherePoint::Finite(v) => SpherePoint::Infinite { recip: v },
            SpherePoint::Infinite { recip } => SpherePoint::Finite(recip),
        }
    }
}

/// Chordal distance on the sphere, normalized so antipodal points are at
/// distance 1: `χ(a,b) = |a-b| / sqrt((1+|a|^2)(1+|b|^2))`, `χ(a,∞) =
/// 1/sqrt(1+|a|^2)`.
pub fn chordal_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    // In mixed charts multiply through by the reciprocal to keep every factor
    // bounded: |a - 1/w| / sqrt((1+|a|^2)(1+1/|w|^2)) = |aw - 1| /
    // sqrt((1+|a|^2)(1+|w|^2)).
    let (p, q) = match (a, b) {
        (SpherePoint::Finite(p), SpherePoint::Finite(q)) => (p, q),
        (SpherePoint::Infinite { recip: p }, SpherePoint::Infinite { recip: q }) => (p, q),
        (SpherePoint::Finite(p), SpherePoint::Infinite { recip: w })
        | (SpherePoint::Infinite { recip: w }, SpherePoint::Finite(p)) => {
            let num = (p * w - 1.0).norm();
            let den = ((1.0 + p.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt();
            return num / den;
        }
    };
    (p - q).norm() / ((1.0 + p.norm_sqr()) * (1.0 + q.norm_sqr())).sqrt()
}

/// Maximum pairwise chordal distance of a sample set.
pub fn spherical_diameter(samples: &[SpherePoint]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut d = 0.0f64;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            d = d.max(chordal_distance(samples[i], samples[j]));
        }
    }
    Ok(d)
}

/// Which function the jet fields describe: `f` itself or `1/f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    Direct,
    Reciprocal,
}

/// Value and first two derivatives of a function at a base point, pole-aware:
/// in the `Reciprocal` representation the fields are the jet of `1/f`, which
/// is what makes poles (and near-poles) exactly representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub z: Complex64,
    pub rep: Rep,
    pub f0: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
}

impl Jet {
    pub fn direct(z: Complex64, f0: Complex64, f1: Complex64, f2: Complex64) -> Self {
        Jet { z, rep: Rep::Direct, f0, f1, f2 }
    }

    pub fn reciprocal(z: Complex64, g0: Complex64, g1: Complex64, g2: Complex64) -> Self {
        Jet { z, rep: Rep::Reciprocal, f0: g0, f1: g1, f2: g2 }
    }

    pub fn is_finite(&self) -> bool {
        [self.f0, self.f1, self.f2]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The value of `f` as a sphere point, regardless of representation.
    pub fn value(&self) -> SpherePoint {
        match self.rep {
            Rep::Direct => SpherePoint::from_value(self.f0),
            Rep::Reciprocal => SpherePoint::from_value(self.f0).recip(),
        }
    }

    /// |f| as an f64 (inf at an exact pole).
    pub fn abs_value(&self) -> f64 {
        match self.rep {
            Rep::Direct => self.f0.norm(),
            Rep::Reciprocal => {
                let n = self.f0.norm();
                if n == 0.0 { f64::INFINITY } else { 1.0 / n }
            }
        }
    }

    /// log|f|, computed without overflow in either representation.
    pub fn log_abs_value(&self) -> f64 {
        match self.rep {
            Rep::Direct => self.f0.norm().ln(),
            Rep::Reciprocal => -self.f0.norm().ln(),
        }
    }

    /// Swap representation through the quotient rule. An involution wherever
    /// both representations are finite and nonzero; fails on an exact zero of
    /// the stored value (the other chart would need infinite fields).
    pub fn switched(&self) -> Result<Jet> {
        let f0 = self.f0;
        if f0.norm_sqr() == 0.0 {
            return Err(Error::UndefinedJet(self.z));
        }
        // g = 1/f: g' = -f'/f^2, g'' = (2 f'^2 - f f'') / f^3.
        let inv = f0.inv();
        let g0 = inv;
        let g1 = -self.f1 * inv * inv;
        let g2 = (2.0 * self.f1 * self.f1 - f0 * self.f2) * inv * inv * inv;
        Ok(Jet {
            z: self.z,
            rep: match self.rep {
                Rep::Direct => Rep::Reciprocal,
                Rep::Reciprocal => Rep::Direct,
            },
            f0: g0,
            f1: g1,
            f2: g2,
        })
    }

    /// Re-expressed with the representation-switch convention: store the
    /// reciprocal whenever |f| > 1, bounding all stored magnitudes by 1.
    pub fn normalized(&self) -> Jet {
        if self.f0.norm_sqr() > 1.0 {
            self.switched().unwrap_or(*self)
        } else {
            *self
        }
    }

    /// The jet of `f` in the direct representation; fails at an exact pole.
    pub fn to_direct(&self) -> Result<Jet> {
        match self.rep {
            Rep::Direct => Ok(*self),
            Rep::Reciprocal => self.switched(),
        }
    }

    /// f'/f, same in both representations up to sign: (1/f)'/(1/f) = -f'/f.
    pub fn log_derivative(&self) -> Complex64 {
        let q = self.f1 / self.f0;
        match self.rep {
            Rep::Direct => q,
            Rep::Reciprocal => -q,
        }
    }
}

/// Spherical derivative `|f'| / (1 + |f|^2)` at the jet's base point. The
/// formula applied to the stored fields is representation-independent because
/// `(1/f)^# = f^#`. Errors when the jet has no finite representation.
pub fn spherical_derivative(j: &Jet) -> Result<f64> {
    if !j.f0.re.is_finite() || !j.f0.im.is_finite() || !j.f1.re.is_finite() || !j.f1.im.is_finite()
    {
        return Err(Error::UndefinedJet(j.z));
    }
    Ok(j.f1.norm() / (1.0 + j.f0.norm_sqr()))
}

/// The rescaling parameters (α, β) of the family `h^{-α} f(h + h^{-β} z)`.
/// `h^{-α}` and `h^{-β}` are always taken with the principal logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ScalingParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(beta >= -1.0) {
            return Err(Error::BetaRange(beta));
        }
        Ok(ScalingParams { alpha, beta })
    }

    /// Radius of the natural disc Δ_ε(h) = { |z-h| < ε |h|^{-β} }.
    pub fn disc_radius(&self, eps: f64, h: Complex64) -> f64 {
        eps * h.norm().powf(-self.beta)
    }
}
