//! The library of evaluable meromorphic test functions, plus the closure
//! operations that build new ones: reciprocal, product, derivative, constant
//! shift, and the power transform z^a f(z^b).
//!
//! A [`MeromorphicMap`] packages a pole-aware jet evaluator with optional
//! extras: an exact logarithmic derivative, an exact third derivative (used
//! by [`derivative_map`]), a claimed (α, β) class, and a closed-form
//! enumerator of special points used as oracle data by the locator tests.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::riemann::{Jet, Rep, ScalingParams};
use crate::{Error, Result};

pub mod lattice;
pub mod manifest;
pub mod rational;

pub use lattice::{bank_kaufman, bank_kaufman_with_guard, lattice_points, weierstrass_p, Lattice};
pub use manifest::{parse_manifest, FunctionSpec};
pub use rational::{colliding_pair_sum, constant_map, rational_map, simple_pole_sum_map};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Zero,
    Pole,
}

impl PointKind {
    pub fn flipped(self) -> PointKind {
        match self {
            PointKind::Zero => PointKind::Pole,
            PointKind::Pole => PointKind::Zero,
        }
    }
}

/// A zero or pole known in closed form, stored as oracle data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub position: Complex64,
    pub kind: PointKind,
    pub multiplicity: u32,
}

/// A claimed membership Y_{α,β}; `conditional` marks classes propagated by
/// operations whose hypotheses (separation conditions) are not auto-verified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimedClass {
    pub params: ScalingParams,
    pub conditional: bool,
}

pub type JetFn = Arc<dyn Fn(Complex64) -> Jet + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type PointsFn = Arc<dyn Fn(f64) -> Vec<SpecialPoint> + Send + Sync>;

/// An evaluable meromorphic function descriptor. Jet evaluation is pure and
/// deterministic; descriptors are immutable after construction and cheap to
/// clone (everything is behind `Arc`).
#[derive(Clone)]
pub struct MeromorphicMap {
    pub(crate) name: String,
    pub(crate) jet_fn: JetFn,
    pub(crate) log_derivative: Option<ScalarFn>,
    pub(crate) third_derivative: Option<ScalarFn>,
    pub(crate) claimed: Option<ClaimedClass>,
    pub(crate) known_points: Option<PointsFn>,
}

impl std::fmt::Debug for MeromorphicMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeromorphicMap")
            .field("name", &self.name)
            .field("claimed", &self.claimed)
            .finish()
    }
}

impl MeromorphicMap {
    pub fn new(name: impl Into<String>, jet_fn: JetFn) -> Self {
        MeromorphicMap {
            name: name.into(),
            jet_fn,
            log_derivative: None,
            third_derivative: None,
            claimed: None,
            known_points: None,
        }
    }

    pub fn with_class(mut self, alpha: f64, beta: f64, conditional: bool) -> Self {
        self.claimed = Some(ClaimedClass {
            params: ScalingParams::new(alpha, beta).expect("valid class"),
            conditional,
        });
        self
    }

    pub fn with_third_derivative(mut self, third: ScalarFn) -> Self {
        self.third_derivative = Some(third);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Jet of f at z (value and first two derivatives, pole-aware).
    pub fn jet(&self, z: Complex64) -> Jet {
        (self.jet_fn)(z)
    }

    /// f'/f, exact where the descriptor carries one, otherwise from the jet.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        match &self.log_derivative {
            Some(ld) => ld(z),
            None => self.jet(z).log_derivative(),
        }
    }

    pub fn has_exact_log_derivative(&self) -> bool {
        self.log_derivative.is_some()
    }

    pub fn claimed_class(&self) -> Option<ClaimedClass> {
        self.claimed
    }

    /// Closed-form zeros/poles with |z| <= r, when the catalog knows them.
    pub fn known_points_within(&self, r: f64) -> Option<Vec<SpecialPoint>> {
        self.known_points.as_ref().map(|f| f(r))
    }

    /// Third derivative where the catalog carries an exact one; falls back
    /// to a central difference of the jet's second derivative.
    pub fn third_derivative(&self, z: Complex64) -> Complex64 {
        if let Some(td) = &self.third_derivative {
            return td(z);
        }
        let h = 1e-5 * z.norm().max(1.0);
        let get = |w: Complex64| self.jet(w).to_direct().map(|j| j.f2);
        match (get(z + h), get(z - h)) {
            (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
            _ => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

/// 1/f. Representation flags flip, so this is exact and free; class becomes
/// (-α, β), zeros and poles swap.
pub fn reciprocal_map(f: &MeromorphicMap) -> MeromorphicMap {
    let inner = f.clone();
    let jet_fn: JetFn = Arc::new(move |z| {
        let j = inner.jet(z);
        Jet {
            rep: match j.rep {
                Rep::Direct => Rep::Reciprocal,
                Rep::Reciprocal => Rep::Direct,
            },
            ..j
        }
    });
    let ld = f.log_derivative.clone().map(|ld| -> ScalarFn {
        Arc::new(move |z| -ld(z))
    });
    let known = f.known_points.clone().map(|kp| -> PointsFn {
        Arc::new(move |r| {
            kp(r)
                .into_iter()
                .map(|p| SpecialPoint { kind: p.kind.flipped(), ..p })
                .collect()
        })
    });
    let claimed = f.claimed.map(|c| ClaimedClass {
        params: ScalingParams::new(-c.params.alpha, c.params.beta).unwrap(),
        conditional: c.conditional,
    });
    MeromorphicMap {
        name: format!("recip({})", f.name),
        jet_fn,
        log_derivative: ld,
        third_derivative: None,
        claimed,
        known_points: known,
    }
}

fn product_jet(z: Complex64, a: &Jet, b: &Jet) -> Jet {
    // Align representations: (D,D) multiply directly, (R,R) multiply the
    // reciprocals, mixed cases go through a switch of the better-conditioned
    // factor.
    let (x, y, rep) = match (a.rep, b.rep) {
        (Rep::Direct, Rep::Direct) => (*a, *b, Rep::Direct),
        (Rep::Reciprocal, Rep::Reciprocal) => (*a, *b, Rep::Reciprocal),
        _ => {
            let (d, r) = if a.rep == Rep::Direct { (a, b) } else { (b, a) };
            // prefer switching whichever side stays finite
            if r.f0.norm() > 0.0 && (d.f0.norm() <= 1.0 || r.f0.norm() < d.f0.norm().recip()) {
                match r.switched() {
                    Ok(rs) => (*d, rs, Rep::Direct),
                    Err(_) => (*d, *r, Rep::Direct), // unreachable: norm > 0
                }
            } else if d.f0.norm() > 0.0 {
                match d.switched() {
                    Ok(ds) => (ds, *r, Rep::Reciprocal),
                    Err(_) => (*d, *r, Rep::Direct),
                }
            } else {
                // exact zero times exact pole: no finite representation
                let nan = Complex64::new(f64::NAN, f64::NAN);
                return Jet::direct(z, nan, nan, nan);
            }
        }
    };
    let f0 = x.f0 * y.f0;
    let f1 = x.f1 * y.f0 + x.f0 * y.f1;
    let f2 = x.f2 * y.f0 + 2.0 * x.f1 * y.f1 + x.f0 * y.f2;
    Jet { z, rep, f0, f1, f2 }.normalized()
}

/// f·g by the product rule; class (α+α̃, β) marked conditional because the
/// separation hypotheses on the combined zero/pole sets are not checked.
pub fn product_map(f: &MeromorphicMap, g: &MeromorphicMap) -> MeromorphicMap {
    let (af, ag) = (f.clone(), g.clone());
    let jet_fn: JetFn = Arc::new(move |z| product_jet(z, &af.jet(z), &ag.jet(z)));
    let ld = match (f.log_derivative.clone(), g.log_derivative.clone()) {
        (Some(lf), Some(lg)) => Some(Arc::new(move |z| lf(z) + lg(z)) as ScalarFn),
        _ => None,
    };
    let claimed = match (f.claimed, g.claimed) {
        (Some(cf), Some(cg)) if cf.params.beta == cg.params.beta => Some(ClaimedClass {
            params: ScalingParams::new(cf.params.alpha + cg.params.alpha, cf.params.beta)
                .unwrap(),
            conditional: true,
        }),
        _ => None,
    };
    MeromorphicMap {
        name: format!("({})*({})", f.name, g.name),
        jet_fn,
        log_derivative: ld,
        third_derivative: None,
        claimed,
        known_points: None,
    }
}

/// f', with jets assembled from the order-2 jet of f plus the exact third
/// derivative where the catalog provides one (finite differences otherwise).
/// Class (α+β, β), conditional: the separation conditions that make the
/// derivative inherit membership are measured, not assumed.
pub fn derivative_map(f: &MeromorphicMap) -> Result<MeromorphicMap> {
    let probe = f.jet(Complex64::new(0.731, 0.292));
    if !probe.f2.re.is_finite() || !probe.f2.im.is_finite() {
        return Err(Error::Capability(format!(
            "derivative of '{}' needs order-2 jets",
            f.name
        )));
    }
    let inner = f.clone();
    let jet_fn: JetFn = Arc::new(move |z| {
        let j = inner.jet(z);
        match j.rep {
            Rep::Direct => {
                Jet::direct(z, j.f1, j.f2, inner.third_derivative(z)).normalized()
            }
            Rep::Reciprocal => {
                // f = 1/G with G = (g0, g1, g2): f' = -g1/g0².  Near a pole
                // of f, |f'| is huge, so represent 1/f' = -g0²/g1 by the
                // quotient rule; the third-order piece of G is only needed
                // for the (unused in practice) second derivative slot and is
                // taken by finite differences.
                let g3 = {
                    let h = 1e-5 * z.norm().max(1.0);
                    let a = inner.jet(z + h);
                    let b = inner.jet(z - h);
                    if a.rep == Rep::Reciprocal && b.rep == Rep::Reciprocal {
                        (a.f2 - b.f2) / (2.0 * h)
                    } else {
                        Complex64::new(f64::NAN, f64::NAN)
                    }
                };
                let n0 = -j.f0 * j.f0;
                let n1 = -2.0 * j.f0 * j.f1;
                let n2 = -2.0 * (j.f1 * j.f1 + j.f0 * j.f2);
                let (d0, d1, d2) = (j.f1, j.f2, g3);
                if d0.norm() == 0.0 {
                    if n0.norm() == 0.0 {
                        // exactly on a multiple pole of f: 1/f' has a zero of
                        // order (multiplicity + 1) there, so the whole jet of
                        // -G²/G' vanishes
                        return Jet::reciprocal(
                            z,
                            Complex64::default(),
                            Complex64::default(),
                            Complex64::default(),
                        );
                    }
                    // critical point of 1/f colliding with the pole: fall
                    // back to the direct side if possible
                    return match j.switched() {
                        Ok(dj) => Jet::direct(z, dj.f1, dj.f2, Complex64::new(f64::NAN, f64::NAN))
                            .normalized(),
                        Err(_) => {
                            let nan = Complex64::new(f64::NAN, f64::NAN);
                            Jet::direct(z, nan, nan, nan)
                        }
                    };
                }
                let q0 = n0 / d0;
                let q1 = (n1 - q0 * d1) / d0;
                let q2 = (n2 - q0 * d2 - 2.0 * q1 * d1) / d0;
                Jet::reciprocal(z, q0, q1, q2).normalized()
            }
        }
    });
    let claimed = f.claimed.map(|c| ClaimedClass {
        params: ScalingParams::new(c.params.alpha + c.params.beta, c.params.beta).unwrap(),
        conditional: true,
    });
    Ok(MeromorphicMap {
        name: format!("d/dz({})", f.name),
        jet_fn,
        log_derivative: None,
        third_derivative: None,
        claimed,
        known_points: None,
    })
}

/// f + c. Poles are unchanged; on the reciprocal side 1/(f+c) = G/(1+cG).
pub fn const_shift_map(f: &MeromorphicMap, c: Complex64) -> MeromorphicMap {
    let inner = f.clone();
    let jet_fn: JetFn = Arc::new(move |z| {
        let j = inner.jet(z);
        match j.rep {
            Rep::Direct => Jet::direct(z, j.f0 + c, j.f1, j.f2).normalized(),
            Rep::Reciprocal => {
                let d0 = 1.0 + c * j.f0;
                let d1 = c * j.f1;
                let d2 = c * j.f2;
                let q0 = j.f0 / d0;
                let q1 = (j.f1 - q0 * d1) / d0;
                let q2 = (j.f2 - q0 * d2 - 2.0 * q1 * d1) / d0;
                Jet::reciprocal(z, q0, q1, q2).normalized()
            }
        }
    });
    let third = f.third_derivative.clone();
    MeromorphicMap {
        name: format!("({})+{}", f.name, c),
        jet_fn,
        log_derivative: None,
        third_derivative: third,
        claimed: None,
        known_points: None,
    }
}

/// z^a f(z^b): jets by the chain and product rules, claimed class updated to
/// (a + bα, b + bβ - 1).
pub fn transform_power(f: &MeromorphicMap, a: i32, b: u32) -> MeromorphicMap {
    assert!(b >= 1, "b must be a positive integer");
    let inner = f.clone();
    let jet_fn: JetFn = Arc::new(move |z| {
        let u = z.powi(b as i32);
        let j = inner.jet(u);
        // chain rule for F(z) = φ(z^b), φ the represented side of j
        let zb1 = z.powi(b as i32 - 1);
        let db = b as f64 * zb1;
        let d2b = (b as f64) * (b as f64 - 1.0) * if b >= 2 { z.powi(b as i32 - 2) } else { Complex64::default() };
        let c0 = j.f0;
        let c1 = j.f1 * db;
        let c2 = j.f2 * db * db + j.f1 * d2b;
        // exponent on the represented side: z^a for direct, z^{-a} reciprocal
        let t = match j.rep {
            Rep::Direct => a,
            Rep::Reciprocal => -a,
        };
        let chain = Jet { z, rep: j.rep, f0: c0, f1: c1, f2: c2 };
        let chain = if t >= 0 {
            chain
        } else {
            match chain.switched() {
                Ok(s) => s,
                Err(_) => {
                    let nan = Complex64::new(f64::NAN, f64::NAN);
                    return Jet::direct(z, nan, nan, nan);
                }
            }
        };
        let t = t.unsigned_abs();
        // multiply by the exact jet of z^t
        let (p0, p1, p2) = match t {
            0 => (Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()),
            1 => (z, Complex64::new(1.0, 0.0), Complex64::default()),
            _ => (
                z.powu(t),
                t as f64 * z.powu(t - 1),
                (t * (t - 1)) as f64 * z.powu(t - 2),
            ),
        };
        let f0 = p0 * chain.f0;
        let f1 = p1 * chain.f0 + p0 * chain.f1;
        let f2 = p2 * chain.f0 + 2.0 * p1 * chain.f1 + p0 * chain.f2;
        Jet { z, rep: chain.rep, f0, f1, f2 }.normalized()
    });
    let claimed = f.claimed.map(|c| ClaimedClass {
        params: ScalingParams::new(
            a as f64 + b as f64 * c.params.alpha,
            b as f64 + b as f64 * c.params.beta - 1.0,
        )
        .unwrap(),
        conditional: c.conditional,
    });
    MeromorphicMap {
        name: format!("z^{a}*({})(z^{b})", f.name),
        jet_fn,
        log_derivative: None,
        third_derivative: None,
        claimed,
        known_points: None,
    }
}

/// Stable complex tangent: tan z = -i (w - 1)/(w + 1) with w = e^{2iz} taken
/// in the half-plane where |w| <= 1.
fn tan_stable(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        let w = (Complex64::new(0.0, 2.0) * z).exp();
        Complex64::new(0.0, -1.0) * (w - 1.0) / (w + 1.0)
    } else {
        tan_stable(z.conj()).conj()
    }
}

/// The negative controls: exp and tan, with no claimed class. Both have
/// bounded spherical derivative but fail the non-constancy half of the
/// membership criterion along documented directions (exp toward -∞ on the
/// real axis, tan toward ±i∞).
pub fn elementary_controls() -> Vec<MeromorphicMap> {
    let exp_jet: JetFn = Arc::new(|z: Complex64| {
        if z.re <= 0.0 {
            let v = z.exp();
            Jet::direct(z, v, v, v)
        } else {
            let g = (-z).exp();
            Jet::reciprocal(z, g, -g, g)
        }
    });
    let exp_map = MeromorphicMap {
        name: "exp".into(),
        jet_fn: exp_jet,
        log_derivative: Some(Arc::new(|_| Complex64::new(1.0, 0.0))),
        third_derivative: Some(Arc::new(|z: Complex64| z.exp())),
        claimed: None,
        known_points: Some(Arc::new(|_r| Vec::new())),
    };

    let tan_jet: JetFn = Arc::new(|z: Complex64| {
        let t = tan_stable(z);
        if t.norm() <= 1.0 {
            let d = 1.0 + t * t;
            Jet::direct(z, t, d, 2.0 * t * d)
        } else {
            // cot side: c = 1/t, c' = -(1+c²), c'' = 2c(1+c²)
            let c = t.inv();
            let d = 1.0 + c * c;
            Jet::reciprocal(z, c, -d, 2.0 * c * d)
        }
    });
    let tan_map = MeromorphicMap {
        name: "tan".into(),
        jet_fn: tan_jet,
        log_derivative: None,
        third_derivative: Some(Arc::new(|z: Complex64| {
            let t = tan_stable(z);
            let s = 1.0 + t * t; // sec²
            2.0 * s * (s + 2.0 * t * t)
        })),
        claimed: None,
        known_points: Some(Arc::new(|r: f64| {
            let mut pts = Vec::new();
            let mut k = 0i64;
            loop {
                let x = k as f64 * std::f64::consts::PI;
                if x > r {
                    break;
                }
                for s in [x, -x] {
                    if s.abs() <= r && (k != 0 || s == 0.0) {
                        pts.push(SpecialPoint {
                            position: Complex64::new(s, 0.0),
                            kind: PointKind::Zero,
                            multiplicity: 1,
                        });
                    }
                    if k == 0 {
                        break;
                    }
                }
                let p = (k as f64 + 0.5) * std::f64::consts::PI;
                if p <= r {
                    for s in [p, -p] {
                        pts.push(SpecialPoint {
                            position: Complex64::new(s, 0.0),
                            kind: PointKind::Pole,
                            multiplicity: 1,
                        });
                    }
                }
                k += 1;
            }
            pts.sort_by(|a, b| crate::util::modulus_order(&a.position, &b.position));
            pts
        })),
    };
    vec![exp_map, tan_map]
}
