//! Period lattices and the Weierstrass ℘-function.
//!
//! Invariants g2, g3 come from the Eisenstein q-series on a Gauss-reduced
//! basis. ℘ itself is evaluated from the Laurent recursion about the nearest
//! half-lattice point: the argument is reduced into the Voronoi cell, the
//! pole part is handled through the reciprocal, and offsets that land nearer
//! to a half-period than to a lattice point go through the half-period
//! transform ℘(ω_j/2 + u) = e_j + A_j/(℘(u) - e_j). This keeps the series
//! ratio |u| / |ω_min| at or below ~1/2 for every argument, so a fixed
//! truncation reaches full double precision.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::riemann::{Jet, ScalingParams};
use crate::{Error, Result};

use super::{ClaimedClass, MeromorphicMap, PointKind, SpecialPoint};

/// A period lattice ω1 ℤ + ω2 ℤ with its derived invariants.
#[derive(Debug, Clone)]
pub struct Lattice {
    /// Original generators as supplied.
    pub omega1: Complex64,
    pub omega2: Complex64,
    // Gauss-reduced basis, Im(b2/b1) > 0, |b2/b1| >= 1, |Re(b2/b1)| <= 1/2.
    b1: Complex64,
    b2: Complex64,
    g2: Complex64,
    g3: Complex64,
    /// Laurent coefficients c_k (k = 2..), ℘(u) = u^{-2} + Σ c_k u^{2k-2}.
    laurent: Vec<Complex64>,
    /// e_j = ℘(b_j / 2) with e3 at the mixed half-period.
    e: [Complex64; 3],
    /// A_j = (e_j - e_k)(e_j - e_l) for the half-period transform.
    a: [Complex64; 3],
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Lattice {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Lattice> {
        let tau = omega2 / omega1;
        if !tau.is_finite() || tau.im.abs() < 1e-9 {
            return Err(Error::DegenerateLattice(tau));
        }
        let (b1, b2) = reduce_basis(omega1, omega2);
        let tau = b2 / b1;

        // Eisenstein series in q^2 = e^{2πiτ}; Im τ >= sqrt(3)/2 after
        // reduction, so a dozen terms is already far below 1e-18.
        let q2 = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
        let mut e4 = Complex64::new(1.0, 0.0);
        let mut e6 = Complex64::new(1.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 1..=24u32 {
            qn *= q2;
            let frac = qn / (1.0 - qn);
            let n3 = (n as f64).powi(3);
            e4 += 240.0 * n3 * frac;
            e6 -= 504.0 * n3 * (n as f64) * (n as f64) * frac;
        }
        let b1_4 = b1.powi(4);
        let g2 = (4.0 * PI.powi(4) / 3.0) * e4 / b1_4;
        let g3 = (8.0 * PI.powi(6) / 27.0) * e6 / (b1_4 * b1 * b1);

        let laurent = laurent_coefficients(g2, g3, truncation_order(b1, b2));

        let mut lat = Lattice {
            omega1,
            omega2,
            b1,
            b2,
            g2,
            g3,
            laurent,
            e: [Complex64::default(); 3],
            a: [Complex64::default(); 3],
        };
        lat.fill_critical_values()?;
        Ok(lat)
    }

    /// Square lattice c(ℤ + iℤ); g3 vanishes, so ℘ has a double zero at the
    /// mixed half-period.
    pub fn square(c: f64) -> Lattice {
        Lattice::new(c64(c, 0.0), c64(0.0, c)).expect("square lattice is non-degenerate")
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    pub fn is_lemniscatic(&self) -> bool {
        self.g3.norm() <= 1e-10 * self.g2.norm().powf(1.5).max(1e-30)
    }

    /// Critical values (e1, e2, e3) = ℘ at (b1/2, b2/2, (b1+b2)/2).
    pub fn critical_values(&self) -> [Complex64; 3] {
        self.e
    }

    fn fill_critical_values(&mut self) -> Result<()> {
        // e1 is reachable by the plain series; e2 needs |b2|/2 which may sit
        // outside the series radius, so walk up by the duplication formula,
        // which is rational in ℘ alone.
        let e1 = self.series_value(self.b1 * 0.5);
        let halvings = ((self.b2.norm() / self.b1.norm()).log2().ceil() as i32).max(0);
        let mut w = self.series_value(self.b2 * 0.5 / 2f64.powi(halvings));
        for _ in 0..halvings {
            w = self.duplicate(w);
        }
        let e2 = w;
        let e3 = -e1 - e2;
        // consistency with the invariants: Σ e_i e_j = -g2/4, Π e_i = g3/4
        let sym2 = e1 * e2 + e1 * e3 + e2 * e3;
        let sym3 = e1 * e2 * e3;
        let scale = self.g2.norm().max(1.0);
        if (sym2 + self.g2 / 4.0).norm() > 1e-7 * scale
            || (sym3 - self.g3 / 4.0).norm() > 1e-7 * scale.powf(1.5)
        {
            return Err(Error::DegenerateLattice(self.b2 / self.b1));
        }
        self.e = [e1, e2, e3];
        self.a = [
            (e1 - e2) * (e1 - e3),
            (e2 - e1) * (e2 - e3),
            (e3 - e1) * (e3 - e2),
        ];
        Ok(())
    }

    /// ℘(2z) as a rational function of w = ℘(z).
    fn duplicate(&self, w: Complex64) -> Complex64 {
        let num = 6.0 * w * w - self.g2 * 0.5;
        let den = 4.0 * (4.0 * w * w * w - self.g2 * w - self.g3);
        num * num / den - 2.0 * w
    }

    /// Plain Laurent evaluation of ℘ at u, valid for |u| safely inside the
    /// shortest lattice vector.
    fn series_value(&self, u: Complex64) -> Complex64 {
        let s = u * u;
        u.powi(-2) + s * self.horner(s, 0)
    }

    /// Horner sums over s = u^2: mode 0 -> Σ c_k s^{k-2} (so P = s * sum),
    /// mode 1 -> Σ (2k-2) c_k s^{k-2}, mode 2 -> Σ (2k-2)(2k-3) c_k s^{k-2}.
    fn horner(&self, s: Complex64, mode: u8) -> Complex64 {
        let mut acc = Complex64::default();
        for (idx, &ck) in self.laurent.iter().enumerate().rev() {
            let k = (idx + 2) as f64;
            let w = match mode {
                0 => ck,
                1 => (2.0 * k - 2.0) * ck,
                _ => (2.0 * k - 2.0) * (2.0 * k - 3.0) * ck,
            };
            acc = acc * s + w;
        }
        acc
    }

    /// Reduce z modulo the lattice and pick the nearest half-lattice anchor.
    /// Returns (offset u, anchor type): type 0 = lattice point, 1 = b1/2,
    /// 2 = b2/2, 3 = (b1+b2)/2 (all mod the lattice).
    fn reduce(&self, z: Complex64) -> (Complex64, usize) {
        // coordinates in the reduced basis
        let det = self.b1.re * self.b2.im - self.b1.im * self.b2.re;
        let a = (z.re * self.b2.im - z.im * self.b2.re) / det;
        let b = (self.b1.re * z.im - self.b1.im * z.re) / det;
        let z0 = z - self.b1 * a.round() - self.b2 * b.round();
        let mut best = (f64::INFINITY, Complex64::default(), 0usize);
        for s1 in -1i32..=1 {
            for s2 in -1i32..=1 {
                let anchor = 0.5 * (self.b1 * s1 as f64 + self.b2 * s2 as f64);
                let u = z0 - anchor;
                let d = u.norm_sqr();
                if d < best.0 {
                    let ty = match (s1.rem_euclid(2), s2.rem_euclid(2)) {
                        (0, 0) => 0,
                        (1, 0) => 1,
                        (0, 1) => 2,
                        _ => 3,
                    };
                    best = (d, u, ty);
                }
            }
        }
        (best.1, best.2)
    }

    /// (℘, ℘', and the reciprocal-side pieces) around a lattice point.
    /// Returns a jet based at `z` in whichever representation is finite.
    fn pole_cell_jet(&self, z: Complex64, u: Complex64) -> Jet {
        let s = u * u;
        let q0 = self.horner(s, 0);
        let p = s * q0; // P(u)
        let pp = u * self.horner(s, 1); // P'(u)
        let ppp = self.horner(s, 2); // P''(u)
        let d = 1.0 + s * p;
        let small = u.norm_sqr();
        // |℘| = |u^{-2} + P|; switch to the reciprocal form when that
        // exceeds 1, i.e. essentially whenever |u|^2 < 1/(1 + |P|).
        let direct_ok = small > 1e-200 && {
            let f0 = u.powi(-2) + p;
            f0.norm_sqr() <= 1.0
        };
        if direct_ok {
            let f0 = u.powi(-2) + p;
            let f1 = -2.0 * u.powi(-3) + pp;
            let f2 = 6.0 * f0 * f0 - self.g2 * 0.5;
            Jet::direct(z, f0, f1, f2)
        } else {
            // g = 1/℘ = s / (1 + s P); entirely regular at u = 0.
            let dp = 2.0 * u * p + s * pp;
            let dpp = 2.0 * p + 4.0 * u * pp + s * ppp;
            let g0 = s / d;
            let g1 = (2.0 * u * d - s * dp) / (d * d);
            let g2r = (2.0 * Complex64::new(1.0, 0.0) - 2.0 * g1 * dp - g0 * dpp) / d;
            Jet::reciprocal(z, g0, g1, g2r)
        }
    }

    /// Even Taylor expansion about a half-period, used for tiny offsets where
    /// the transform form would divide vanishing quantities.
    fn half_period_taylor(&self, z: Complex64, j: usize, u: Complex64) -> Jet {
        let e = self.e[j - 1];
        let d2 = 6.0 * e * e - self.g2 * 0.5; // ℘''
        let d4 = 12.0 * e * d2; // ℘'''' (℘' = 0 here)
        let s = u * u;
        let f0 = e + 0.5 * d2 * s + d4 * s * s / 24.0;
        let f1 = d2 * u + d4 * u * s / 6.0;
        let f2 = 6.0 * f0 * f0 - self.g2 * 0.5;
        Jet::direct(z, f0, f1, f2).normalized()
    }

    /// Jet of ℘ at z (value, ℘', ℘''), pole-aware.
    pub fn wp_jet(&self, z: Complex64) -> Jet {
        let (u, ty) = self.reduce(z);
        if ty == 0 {
            return self.pole_cell_jet(z, u);
        }
        if u.norm() < 1e-3 * self.b1.norm() {
            return self.half_period_taylor(z, ty, u);
        }
        // ℘(ω_j/2 + u) = e_j + A_j (1/℘(u)) / (1 - e_j (1/℘(u))), written
        // through 1/℘(u) so the pole of ℘(u) at u = 0 stays harmless.
        let base = self.pole_cell_jet(z, u);
        let (gw, gw1) = match base.rep {
            crate::riemann::Rep::Reciprocal => (base.f0, base.f1),
            crate::riemann::Rep::Direct => {
                let inv = base.f0.inv();
                (inv, -base.f1 * inv * inv)
            }
        };
        let e = self.e[ty - 1];
        let aj = self.a[ty - 1];
        let den = 1.0 - e * gw;
        let f0 = e + aj * gw / den;
        // d/du of A gw/(1 - e gw) = A gw' / (1 - e gw)^2
        let f1 = aj * gw1 / (den * den);
        let f2 = 6.0 * f0 * f0 - self.g2 * 0.5;
        Jet::direct(z, f0, f1, f2).normalized()
    }

    /// Third derivative ℘''' = 12 ℘ ℘' at z; infinite at lattice points.
    pub fn wp_third(&self, z: Complex64) -> Complex64 {
        match self.wp_jet(z).to_direct() {
            Ok(j) => 12.0 * j.f0 * j.f1,
            Err(_) => c64(f64::INFINITY, 0.0),
        }
    }

    /// Lattice points within |w| <= r (around the origin of the plane).
    pub fn points_within(&self, r: f64) -> Vec<Complex64> {
        lattice_points(self.b1, self.b2, Complex64::default(), r)
    }

    /// Half-period representative b3/2 + lattice for the mixed half-period.
    pub fn mixed_half_period(&self) -> Complex64 {
        0.5 * (self.b1 + self.b2)
    }

    pub fn reduced_basis(&self) -> (Complex64, Complex64) {
        (self.b1, self.b2)
    }
}

/// Truncation so that (worst |u| / |b1|)^(2K) is far below double precision.
fn truncation_order(b1: Complex64, b2: Complex64) -> usize {
    let rho = ((b1 + b2).norm().max((b1 - b2).norm()) / 4.0) / b1.norm();
    let ratio = rho.clamp(0.2, 0.95);
    let k = (-42.0 / (2.0 * ratio.ln())).ceil() as usize;
    k.clamp(24, 400)
}

/// c_2 = g2/20, c_3 = g3/28, and the quadratic recursion
/// c_k = 3 Σ_{m=2}^{k-2} c_m c_{k-m} / ((2k+1)(k-3)) for k >= 4.
fn laurent_coefficients(g2: Complex64, g3: Complex64, count: usize) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(count);
    c.push(g2 / 20.0);
    c.push(g3 / 28.0);
    for k in 4..(count + 2) {
        let mut s = Complex64::default();
        for m in 2..=(k - 2) {
            s += c[m - 2] * c[k - m - 2];
        }
        c.push(3.0 * s / ((2 * k + 1) as f64 * (k - 3) as f64));
    }
    c
}

/// Gauss reduction: |Re τ| <= 1/2 and |τ| >= 1, orientation preserved.
fn reduce_basis(mut b1: Complex64, mut b2: Complex64) -> (Complex64, Complex64) {
    if (b2 / b1).im < 0.0 {
        b2 = -b2;
    }
    for _ in 0..64 {
        let tau = b2 / b1;
        let n = tau.re.round();
        if n != 0.0 {
            b2 -= b1 * n;
        }
        let tau = b2 / b1;
        if tau.norm_sqr() < 1.0 - 1e-14 {
            let t = b1;
            b1 = b2;
            b2 = -t;
        } else {
            break;
        }
    }
    (b1, b2)
}

/// All points of center + m b1 + n b2 with |point| <= r.
pub fn lattice_points(
    b1: Complex64,
    b2: Complex64,
    center: Complex64,
    r: f64,
) -> Vec<Complex64> {
    let det = (b1.re * b2.im - b1.im * b2.re).abs();
    // conservative coefficient bound: |m| <= r |b2| / det + margin
    let mmax = (r * b2.norm() / det).ceil() as i64 + 2;
    let nmax = (r * b1.norm() / det).ceil() as i64 + 2;
    let mut out = Vec::new();
    for m in -mmax..=mmax {
        for n in -nmax..=nmax {
            let p = center + b1 * m as f64 + b2 * n as f64;
            if p.norm() <= r {
                out.push(p);
            }
        }
    }
    out.sort_by(crate::util::modulus_order);
    out
}

/// The Weierstrass ℘-function of a lattice as a catalog map: double poles on
/// the lattice, class (0, 0), exact logarithmic derivative, and enumerable
/// special points (zeros only in the lemniscatic case, where they sit at the
/// mixed half-period).
pub fn weierstrass_p(lattice: &Lattice) -> MeromorphicMap {
    let lat = Arc::new(lattice.clone());
    let l1 = lat.clone();
    let l2 = lat.clone();
    let l3 = lat.clone();
    let known: Option<super::PointsFn> = Some(Arc::new(move |r: f64| {
        let mut pts: Vec<SpecialPoint> = l2
            .points_within(r)
            .into_iter()
            .map(|p| SpecialPoint { position: p, kind: PointKind::Pole, multiplicity: 2 })
            .collect();
        if l2.is_lemniscatic() {
            // ℘ = 0 exactly at the half-period whose critical value vanishes
            let e = l2.critical_values();
            let halves = [
                l2.reduced_basis().0 * 0.5,
                l2.reduced_basis().1 * 0.5,
                l2.mixed_half_period(),
            ];
            let j = (0..3).min_by(|&i, &j| e[i].norm().partial_cmp(&e[j].norm()).unwrap()).unwrap();
            if e[j].norm() < 1e-8 {
                let (b1, b2) = l2.reduced_basis();
                for p in lattice_points(b1, b2, halves[j], r) {
                    pts.push(SpecialPoint {
                        position: p,
                        kind: PointKind::Zero,
                        multiplicity: 2,
                    });
                }
            }
        }
        pts.sort_by(|a, b| crate::util::modulus_order(&a.position, &b.position));
        pts
    }));
    MeromorphicMap {
        name: "weierstrass-p".into(),
        jet_fn: Arc::new(move |z| l1.wp_jet(z)),
        log_derivative: Some(Arc::new({
            let l = lat.clone();
            move |z| {
                let j = l.wp_jet(z);
                j.log_derivative()
            }
        })),
        third_derivative: Some(Arc::new(move |z| l3.wp_third(z))),
        claimed: Some(ClaimedClass {
            params: ScalingParams::new(0.0, 0.0).unwrap(),
            conditional: false,
        }),
        known_points: known,
    }
}

/// The Bank-Kaufman style composition f(w) = ℘(arcsin w) on a lemniscatic
/// lattice: single-valued because ℘ is even with period equal to both arcsin
/// determinations' discrepancy. Double poles at 0 and ±i sinh(πk), double
/// zeros at ±cosh(π(k+1/2)); claimed class (0, -1).
pub fn bank_kaufman(lattice: &Lattice) -> Result<MeromorphicMap> {
    bank_kaufman_with_guard(lattice, 1e-3)
}

/// As [`bank_kaufman`] with a configurable guard radius around the arcsin
/// branch points w = ±1, inside which a degree-6 Taylor fallback built from
/// ℘ jets at the real half-period is used.
pub fn bank_kaufman_with_guard(lattice: &Lattice, guard: f64) -> Result<MeromorphicMap> {
    if !lattice.is_lemniscatic() {
        return Err(Error::Capability(format!(
            "bank_kaufman requires a lemniscatic lattice (g3 = 0), got |g3| = {:.3e}",
            lattice.g3().norm()
        )));
    }
    let lat = Arc::new(lattice.clone());
    let period = lat.reduced_basis().0.norm(); // = π for the catalog lattice
    let scale = period / PI;
    let l1 = lat.clone();
    let jet_fn: super::JetFn = Arc::new(move |w: Complex64| bk_jet(&l1, w, guard));
    let l2 = lat.clone();
    let third: super::ScalarFn = Arc::new(move |w: Complex64| {
        // f''' = ℘''' s'^3 + 3 ℘'' s' s'' + ℘' s''' with s = arcsin w
        let (s, r) = arcsin_with_root(w);
        if r.norm() < 1e-6 {
            return c64(f64::NAN, f64::NAN);
        }
        let j = match l2.wp_jet(s).to_direct() {
            Ok(j) => j,
            Err(_) => return c64(f64::INFINITY, 0.0),
        };
        let p3 = 12.0 * j.f0 * j.f1;
        let r2 = r * r;
        let sp = r.inv();
        let spp = w / (r2 * r);
        let sppp = (1.0 + 2.0 * w * w) / (r2 * r2 * r);
        p3 * sp * sp * sp + 3.0 * j.f2 * sp * spp + j.f1 * sppp
    });
    let known: super::PointsFn = Arc::new(move |r: f64| bk_known_points(r, scale));
    let l3 = lat.clone();
    Ok(MeromorphicMap {
        name: "bank-kaufman".into(),
        jet_fn,
        log_derivative: Some(Arc::new(move |w| {
            let (s, root) = arcsin_with_root(w);
            let j = l3.wp_jet(s);
            j.log_derivative() / root
        })),
        third_derivative: Some(third),
        claimed: Some(ClaimedClass {
            params: ScalingParams::new(0.0, -1.0).unwrap(),
            conditional: false,
        }),
        known_points: Some(known),
    })
}

/// Principal arcsin together with the square root sqrt(1-w^2) that belongs to
/// the same branch, so chain rules stay consistent across the cuts.
fn arcsin_with_root(w: Complex64) -> (Complex64, Complex64) {
    let root = (1.0 - w * w).sqrt();
    let i = c64(0.0, 1.0);
    let s = -i * (i * w + root).ln();
    (s, root)
}

fn bk_jet(lat: &Lattice, w: Complex64, guard: f64) -> Jet {
    // f is even; fold near -1 onto the +1 fallback
    if (w - 1.0).norm() < guard || (w + 1.0).norm() < guard {
        let flip = (w + 1.0).norm() < guard;
        let ww = if flip { -w } else { w };
        let j = bk_branch_taylor(lat, ww);
        let (f0, mut f1, f2) = (j.0, j.1, j.2);
        if flip {
            f1 = -f1;
        }
        return Jet::direct(w, f0, f1, f2).normalized();
    }
    let (s, root) = arcsin_with_root(w);
    let j = lat.wp_jet(s);
    let r2 = root * root;
    match j.rep {
        crate::riemann::Rep::Direct => {
            let f0 = j.f0;
            let f1 = j.f1 / root;
            let f2 = j.f2 / r2 + j.f1 * w / (r2 * root);
            Jet::direct(w, f0, f1, f2).normalized()
        }
        crate::riemann::Rep::Reciprocal => {
            // 1/f = (1/℘) ∘ arcsin: same chain rule on the reciprocal side
            let g0 = j.f0;
            let g1 = j.f1 / root;
            let g2 = j.f2 / r2 + j.f1 * w / (r2 * root);
            Jet::reciprocal(w, g0, g1, g2)
        }
    }
}

/// Degree-6 Taylor data of f near w = 1: with v = (arccos w)^2 analytic at
/// w = 1 and ℘ even about the real half-period, f(w) = Σ b_j v^j where
/// b_j = ℘^(2j)(ω1/2)/(2j)!.
fn bk_branch_taylor(lat: &Lattice, w: Complex64) -> (Complex64, Complex64, Complex64) {
    let e1 = lat.critical_values()[0];
    let g2 = lat.g2();
    let d2 = 6.0 * e1 * e1 - g2 * 0.5;
    let d4 = 12.0 * e1 * d2;
    let d6 = 36.0 * d2 * d2 + 144.0 * e1 * e1 * d2;
    let b0 = e1;
    let b1 = d2 / 2.0;
    let b2 = d4 / 24.0;
    let b3 = d6 / 720.0;
    // v(t) = (arccos(1-t))^2 = 2t + t^2/3 + 4t^3/45 + t^4/35 + O(t^5)
    let t = 1.0 - w;
    let v = t * (2.0 + t * (1.0 / 3.0 + t * (4.0 / 45.0 + t / 35.0)));
    let dv_dt = 2.0 + t * (2.0 / 3.0 + t * (4.0 / 15.0 + t * 4.0 / 35.0));
    let d2v_dt2 = 2.0 / 3.0 + t * (8.0 / 15.0 + t * 12.0 / 35.0);
    let phi = b0 + v * (b1 + v * (b2 + v * b3));
    let dphi = b1 + v * (2.0 * b2 + v * 3.0 * b3);
    let d2phi = 2.0 * b2 + v * 6.0 * b3;
    let dv_dw = -dv_dt;
    let f0 = phi;
    let f1 = dphi * dv_dw;
    let f2 = d2phi * dv_dw * dv_dw + dphi * d2v_dt2;
    (f0, f1, f2)
}

/// Closed-form special points of the composition on the period-π lattice,
/// scaled by `scale` when the lattice is c(ℤ+iℤ) with c = scale·π.
fn bk_known_points(r: f64, scale: f64) -> Vec<SpecialPoint> {
    let mut pts = vec![SpecialPoint {
        position: Complex64::default(),
        kind: PointKind::Pole,
        multiplicity: 2,
    }];
    let pi = PI * scale;
    let mut k = 1u32;
    loop {
        let s = (pi * k as f64).sinh();
        if s > r {
            break;
        }
        pts.push(SpecialPoint { position: c64(0.0, s), kind: PointKind::Pole, multiplicity: 2 });
        pts.push(SpecialPoint { position: c64(0.0, -s), kind: PointKind::Pole, multiplicity: 2 });
        k += 1;
    }
    let mut k = 0u32;
    loop {
        let ch = (pi * (k as f64 + 0.5)).cosh();
        if ch > r {
            break;
        }
        pts.push(SpecialPoint { position: c64(ch, 0.0), kind: PointKind::Zero, multiplicity: 2 });
        pts.push(SpecialPoint { position: c64(-ch, 0.0), kind: PointKind::Zero, multiplicity: 2 });
        k += 1;
    }
    pts.sort_by(|a, b| crate::util::modulus_order(&a.position, &b.position));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    const G2_REF: f64 = 1.941017189691612430; // frozen: 60 Σ' ω^{-4}, Richardson-extrapolated lattice sum
    const WP_REF_RE: f64 = 1.227415443566185791; // frozen: direct lattice sum + symmetric tail correction
    const WP_REF_IM: f64 = -1.207354406166137878; // at z = 0.7 + 0.3i

    fn lem() -> Lattice {
        Lattice::square(PI)
    }

    /// Brute-force Eisenstein partial sum over square shells |m|,|n| <= n.
    fn eisenstein4_partial(n: i64) -> Complex64 {
        let mut s = Complex64::default();
        for m in -n..=n {
            for k in -n..=n {
                if m == 0 && k == 0 {
                    continue;
                }
                let w = c64(PI * m as f64, PI * k as f64);
                s += w.powi(-4);
            }
        }
        s
    }

    #[test]
    fn g2_matches_bruteforce_eisenstein_sum() {
        // Richardson on the ~1/N^2 tail of the square partial sums
        let a = eisenstein4_partial(40);
        let b = eisenstein4_partial(80);
        let extrap = b + (b - a) / 3.0;
        let g2_brute = 60.0 * extrap;
        assert_relative_eq!(g2_brute.re, G2_REF, max_relative = 1e-6);
        let lat = lem();
        assert_relative_eq!(lat.g2().re, G2_REF, max_relative = 1e-12);
        assert!(lat.g2().im.abs() < 1e-12);
        assert!(lat.g3().norm() < 1e-12);
        assert!(lat.is_lemniscatic());
    }

    #[test]
    fn g2_invariant_under_basis_change() {
        let a = Lattice::new(c64(PI, 0.0), c64(0.0, PI)).unwrap();
        // same lattice, sheared and swapped generators
        let b = Lattice::new(c64(3.0 * PI, PI), c64(PI, 0.0)).unwrap();
        assert_relative_eq!(a.g2().re, b.g2().re, max_relative = 1e-12);
        assert!((a.g3() - b.g3()).norm() < 1e-12);
    }

    #[test]
    fn wp_value_matches_direct_lattice_sum_reference() {
        let lat = lem();
        let j = lat.wp_jet(c64(0.7, 0.3)).to_direct().unwrap();
        assert_relative_eq!(j.f0.re, WP_REF_RE, max_relative = 1e-12);
        assert_relative_eq!(j.f0.im, WP_REF_IM, max_relative = 1e-12);
    }

    #[test]
    fn wp_satisfies_its_differential_equation() {
        let lat = lem();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..400 {
            let z = c64(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            let j = lat.wp_jet(z);
            let (w, wp) = match j.to_direct() {
                Ok(d) => (d.f0, d.f1),
                Err(_) => continue,
            };
            if w.norm() > 1e6 {
                continue;
            }
            let lhs = wp * wp;
            let rhs = 4.0 * w * w * w - lat.g2() * w - lat.g3();
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            assert!(
                (lhs - rhs).norm() / scale < 1e-8,
                "ODE residual {} at z = {}",
                (lhs - rhs).norm() / scale,
                z
            );
            // second derivative consistency: ℘'' = 6℘² - g2/2 is exact by
            // construction; check evenness instead
            let jm = lat.wp_jet(-z).to_direct().unwrap();
            assert!((jm.f0 - w).norm() / w.norm().max(1.0) < 1e-10);
            assert!((jm.f1 + wp).norm() / wp.norm().max(1.0) < 1e-9);
        }
    }

    #[test]
    fn wp_critical_values_are_plus_minus_sqrt_g2_over_2_and_zero() {
        let lat = lem();
        let e = lat.critical_values();
        let target = (G2_REF).sqrt() / 2.0;
        let mut got: Vec<f64> = e.iter().map(|v| v.re).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(got[0], -target, max_relative = 1e-10);
        assert!(got[1].abs() < 1e-10);
        assert_relative_eq!(got[2], target, max_relative = 1e-10);
        for v in e {
            assert!(v.im.abs() < 1e-10);
        }
        // and ℘ evaluated at the half-periods agrees
        let (b1, b2) = lat.reduced_basis();
        for (half, ej) in [(b1 * 0.5, e[0]), (b2 * 0.5, e[1]), ((b1 + b2) * 0.5, e[2])] {
            let j = lat.wp_jet(half).to_direct().unwrap();
            assert!((j.f0 - ej).norm() < 1e-9);
            assert!(j.f1.norm() < 1e-8, "℘' should vanish at half-period");
        }
    }

    #[test]
    fn wp_pole_jets_are_exact_at_lattice_points() {
        let lat = lem();
        let j = lat.wp_jet(c64(PI, -PI));
        assert!(matches!(j.rep, crate::riemann::Rep::Reciprocal));
        assert_eq!(j.f0, Complex64::default());
        assert_eq!(j.f1, Complex64::default());
        assert_relative_eq!(j.f2.re, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn wp_periodicity_to_rounding() {
        let lat = lem();
        let z = c64(0.37, 0.81);
        let a = lat.wp_jet(z).to_direct().unwrap();
        for shift in [c64(PI, 0.0), c64(0.0, PI), c64(3.0 * PI, -2.0 * PI)] {
            let b = lat.wp_jet(z + shift).to_direct().unwrap();
            assert!((a.f0 - b.f0).norm() < 1e-11 * a.f0.norm().max(1.0));
            assert!((a.f1 - b.f1).norm() < 1e-10 * a.f1.norm().max(1.0));
        }
    }

    #[test]
    fn elongated_lattice_still_accurate() {
        // τ = 2.7i forces the half-period transform to do real work
        let lat = Lattice::new(c64(1.0, 0.0), c64(0.1, 2.7)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z = c64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let j = match lat.wp_jet(z).to_direct() {
                Ok(d) => d,
                Err(_) => continue,
            };
            if j.f0.norm() > 1e5 {
                continue;
            }
            let lhs = j.f1 * j.f1;
            let rhs = 4.0 * j.f0.powu(3) - lat.g2() * j.f0 - lat.g3();
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            assert!((lhs - rhs).norm() / scale < 1e-9, "residual at {z}");
        }
    }

    #[test]
    fn bank_kaufman_matches_wp_through_sine() {
        let lat = lem();
        let f = bank_kaufman(&lat).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..300 {
            let z = c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let w = z.sin();
            let jw = lat.wp_jet(z);
            let jf = f.jet(w);
            let (a, b) = match (jw.to_direct(), jf.to_direct()) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            if a.f0.norm() > 1e4 {
                continue;
            }
            assert!(
                (a.f0 - b.f0).norm() <= 1e-8 * a.f0.norm().max(1.0),
                "f(sin z) != ℘(z) at z = {z}: {} vs {}",
                b.f0,
                a.f0
            );
            // chain rule: d/dz f(sin z) = f'(sin z) cos z = ℘'(z)
            let lhs = b.f1 * z.cos();
            assert!((lhs - a.f1).norm() <= 1e-7 * a.f1.norm().max(1.0));
            checked += 1;
        }
        assert!(checked > 150);
    }

    #[test]
    fn bank_kaufman_first_order_ode() {
        // f'^2 (1 - w^2) = 4 f (f^2 - g2/4)
        let lat = lem();
        let f = bank_kaufman(&lat).unwrap();
        let g2 = lat.g2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let w = c64(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let j = match f.jet(w).to_direct() {
                Ok(j) => j,
                Err(_) => continue,
            };
            if j.f0.norm() > 1e4 {
                continue;
            }
            let lhs = j.f1 * j.f1 * (1.0 - w * w);
            let rhs = 4.0 * j.f0 * (j.f0 * j.f0 - g2 / 4.0);
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            assert!((lhs - rhs).norm() / scale < 1e-7, "residual at w = {w}");
        }
    }

    #[test]
    fn bank_kaufman_pole_at_origin_and_listed_points() {
        let lat = lem();
        let f = bank_kaufman(&lat).unwrap();
        let j = f.jet(Complex64::default());
        assert!(j.value().is_infinite());

        // enumerated points inside |z| <= 100: exactly 3 pole and 4 zero locations
        let pts = f.known_points_within(100.0).unwrap();
        let poles: Vec<_> = pts.iter().filter(|p| p.kind == PointKind::Pole).collect();
        let zeros: Vec<_> = pts.iter().filter(|p| p.kind == PointKind::Zero).collect();
        assert_eq!(poles.len(), 3);
        assert_eq!(zeros.len(), 4);
        let sh = PI.sinh();
        assert!(poles.iter().any(|p| (p.position - c64(0.0, sh)).norm() < 1e-12));
        assert!(poles.iter().any(|p| (p.position - c64(0.0, -sh)).norm() < 1e-12));
        let ch0 = (PI / 2.0).cosh();
        let ch1 = (1.5 * PI).cosh();
        for target in [ch0, -ch0, ch1, -ch1] {
            assert!(zeros.iter().any(|q| (q.position - c64(target, 0.0)).norm() < 1e-10));
        }
        assert!(pts.iter().all(|p| p.multiplicity == 2));
        // the jet is tiny at a listed zero and the guard fallback stays smooth
        let jz = f.jet(c64(ch0, 0.0)).to_direct().unwrap();
        assert!(jz.f0.norm() < 1e-10);
    }

    #[test]
    fn bank_kaufman_branch_guard_is_continuous() {
        let lat = lem();
        let f = bank_kaufman_with_guard(&lat, 1e-2).unwrap();
        // compare fallback vs direct evaluation just outside the guard ring
        for &d in &[1.2e-2, 2e-2] {
            let w_in = c64(1.0 - 0.8e-2, 0.4e-2);
            let w_out = c64(1.0 - d, 0.4e-2);
            let a = f.jet(w_in).to_direct().unwrap();
            let b = f.jet(w_out).to_direct().unwrap();
            // crude smoothness check: close points, close jets
            assert!((a.f0 - b.f0).norm() < 0.3 * a.f1.norm().max(1.0));
        }
        // and the default-guard fallback agrees with the direct formula near
        // the guard edge (degree-6 truncation: ~1e-9 there)
        let dflt = bank_kaufman(&lat).unwrap(); // guard 1e-3
        let g = bank_kaufman_with_guard(&lat, 1e-5).unwrap();
        let w = c64(1.0 - 5e-4, 2e-4);
        let a = dflt.jet(w).to_direct().unwrap(); // fallback path
        let b = g.jet(w).to_direct().unwrap(); // direct path
        assert!((a.f0 - b.f0).norm() < 1e-10 * b.f0.norm().max(1.0));
        assert!((a.f1 - b.f1).norm() < 1e-7 * b.f1.norm().max(1.0));
    }

    #[test]
    fn known_zero_enumeration_for_lemniscatic_wp() {
        let lat = lem();
        let wp = weierstrass_p(&lat);
        let pts = wp.known_points_within(5.0).unwrap();
        // poles: lattice points with |ω| <= 5: 0, ±π, ±iπ, ±π±iπ => 9
        let poles = pts.iter().filter(|p| p.kind == PointKind::Pole).count();
        assert_eq!(poles, 9);
        // zeros: (±π/2, ±π/2) cluster + translates within radius 5
        let zeros: Vec<_> = pts.iter().filter(|p| p.kind == PointKind::Zero).collect();
        assert!(!zeros.is_empty());
        for q in &zeros {
            let j = lat.wp_jet(q.position).to_direct().unwrap();
            assert!(j.f0.norm() < 1e-10, "℘ at listed zero = {}", j.f0);
        }
    }
}
