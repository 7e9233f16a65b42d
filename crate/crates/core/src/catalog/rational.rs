//! Rational oracle functions with exact jets, exact logarithmic derivatives,
//! and exactly known special points. These are the ground truth that the
//! locator and the reconstruction engines are tested against.

use std::sync::Arc;

use num_complex::Complex64;

use crate::riemann::Jet;
use crate::{Error, Result};

use super::{MeromorphicMap, PointKind, PointsFn, ScalarFn, SpecialPoint};

/// Polynomial from its roots with multiplicities: value and first three
/// derivatives by running the product rule across factors.
#[derive(Debug, Clone)]
struct FactoredPoly {
    roots: Vec<(Complex64, u32)>,
    scale: Complex64,
}

impl FactoredPoly {
    /// (p, p', p'', p''') at z.
    fn jet3(&self, z: Complex64) -> [Complex64; 4] {
        let mut acc = [self.scale, Complex64::default(), Complex64::default(), Complex64::default()];
        for &(r, m) in &self.roots {
            let u = z - r;
            for _ in 0..m {
                // multiply (acc0..acc3) by (u, 1, 0, 0)
                let a3 = acc[3] * u + 3.0 * acc[2];
                let a2 = acc[2] * u + 2.0 * acc[1];
                let a1 = acc[1] * u + acc[0];
                let a0 = acc[0] * u;
                acc = [a0, a1, a2, a3];
            }
        }
        acc
    }

    fn degree(&self) -> u32 {
        self.roots.iter().map(|&(_, m)| m).sum()
    }
}

fn quotient_jet3(n: [Complex64; 4], d: [Complex64; 4]) -> [Complex64; 4] {
    // q = n/d from n = q d, order by order
    let q0 = n[0] / d[0];
    let q1 = (n[1] - q0 * d[1]) / d[0];
    let q2 = (n[2] - q0 * d[2] - 2.0 * q1 * d[1]) / d[0];
    let q3 = (n[3] - q0 * d[3] - 3.0 * q1 * d[2] - 3.0 * q2 * d[1]) / d[0];
    [q0, q1, q2, q3]
}

/// Rational map from factored numerator and denominator. Zeros and poles are
/// taken verbatim as the known special points (common factors are the
/// caller's responsibility; the spec of this constructor is "exact oracle",
/// not "simplifier").
pub fn rational_map(
    zeros: &[(Complex64, u32)],
    poles: &[(Complex64, u32)],
    scale: Complex64,
) -> Result<MeromorphicMap> {
    if scale.norm() == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let num = FactoredPoly { roots: zeros.to_vec(), scale };
    let den = FactoredPoly { roots: poles.to_vec(), scale: Complex64::new(1.0, 0.0) };
    let (jn, jd) = (num.clone(), den.clone());
    let jet_fn: super::JetFn = Arc::new(move |z| {
        let n = jn.jet3(z);
        let d = jd.jet3(z);
        if d[0].norm() <= n[0].norm() && n[0].norm() > 0.0 {
            // |f| >= 1 (or a pole): reciprocal representation d/n
            let q = quotient_jet3(d, n);
            Jet::reciprocal(z, q[0], q[1], q[2])
        } else {
            let q = quotient_jet3(n, d);
            Jet::direct(z, q[0], q[1], q[2])
        }
    });
    let (ln, ld) = (num.clone(), den.clone());
    let log_derivative: ScalarFn = Arc::new(move |z| {
        let mut s = Complex64::default();
        for &(r, m) in &ln.roots {
            s += m as f64 / (z - r);
        }
        for &(r, m) in &ld.roots {
            s -= m as f64 / (z - r);
        }
        s
    });
    let (tn, td) = (num.clone(), den.clone());
    let third: ScalarFn = Arc::new(move |z| {
        let q = quotient_jet3(tn.jet3(z), td.jet3(z));
        q[3]
    });
    let zs = zeros.to_vec();
    let ps = poles.to_vec();
    let known: PointsFn = Arc::new(move |r: f64| {
        let mut pts = Vec::new();
        for &(p, m) in &zs {
            if p.norm() <= r {
                pts.push(SpecialPoint { position: p, kind: PointKind::Zero, multiplicity: m });
            }
        }
        for &(p, m) in &ps {
            if p.norm() <= r {
                pts.push(SpecialPoint { position: p, kind: PointKind::Pole, multiplicity: m });
            }
        }
        pts.sort_by(|a, b| crate::util::modulus_order(&a.position, &b.position));
        pts
    });
    let deg = format!("{}z/{}p", num.degree(), den.degree());
    Ok(MeromorphicMap {
        name: format!("rational[{deg}]"),
        jet_fn,
        log_derivative: Some(log_derivative),
        third_derivative: Some(third),
        claimed: None,
        known_points: Some(known),
    })
}

/// The constant function c.
pub fn constant_map(c: Complex64) -> MeromorphicMap {
    let mut m = rational_map(&[], &[], if c.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { c })
        .expect("constant is a valid rational map");
    if c.norm() == 0.0 {
        // represent 0 directly; rational_map refuses a zero scale
        let jet_fn: super::JetFn = Arc::new(move |z| {
            Jet::direct(z, Complex64::default(), Complex64::default(), Complex64::default())
        });
        m = MeromorphicMap::new("const[0]", jet_fn);
    } else {
        m.name = format!("const[{c}]");
    }
    m
}

/// f(z) = Σ ρ_i / (z - p_i): exact jets including near and at the poles, with
/// the listed simple poles as known points.
pub fn simple_pole_sum_map(poles: Vec<(Complex64, Complex64)>) -> MeromorphicMap {
    let data = Arc::new(poles);
    let jd = data.clone();
    let jet_fn: super::JetFn = Arc::new(move |z| {
        // nearest pole decides whether to assemble the reciprocal instead
        let mut nearest = usize::MAX;
        let mut best = f64::INFINITY;
        for (i, &(p, _)) in jd.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best {
                best = d;
                nearest = i;
            }
        }
        if nearest != usize::MAX && best < 1e-16 {
            // on top of pole i: f = ρ/(z-p) + rest; 1/f = (z-p)/(ρ + (z-p) rest)
            let (p, rho) = jd[nearest];
            let u = z - p;
            let mut rest = [Complex64::default(); 4];
            for (i, &(q, r)) in jd.iter().enumerate() {
                if i == nearest {
                    continue;
                }
                let w = (z - q).inv();
                rest[0] += r * w;
                rest[1] -= r * w * w;
                rest[2] += 2.0 * r * w * w * w;
                rest[3] -= 6.0 * r * w * w * w * w;
            }
            let n = [u, Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()];
            let d = [
                rho + u * rest[0],
                rest[0] + u * rest[1],
                2.0 * rest[1] + u * rest[2],
                3.0 * rest[2] + u * rest[3],
            ];
            let q = quotient_jet3(n, d);
            return Jet::reciprocal(z, q[0], q[1], q[2]);
        }
        let mut f = [Complex64::default(); 3];
        for &(p, rho) in jd.iter() {
            let w = (z - p).inv();
            f[0] += rho * w;
            f[1] -= rho * w * w;
            f[2] += 2.0 * rho * w * w * w;
        }
        Jet::direct(z, f[0], f[1], f[2]).normalized()
    });
    let ld = data.clone();
    let third: ScalarFn = Arc::new(move |z| {
        let mut s = Complex64::default();
        for &(p, rho) in ld.iter() {
            let w = (z - p).inv();
            s -= 6.0 * rho * w * w * w * w;
        }
        s
    });
    let kd = data.clone();
    let known: PointsFn = Arc::new(move |r: f64| {
        let mut pts: Vec<SpecialPoint> = kd
            .iter()
            .filter(|(p, _)| p.norm() <= r)
            .map(|&(p, _)| SpecialPoint { position: p, kind: PointKind::Pole, multiplicity: 1 })
            .collect();
        pts.sort_by(|a, b| crate::util::modulus_order(&a.position, &b.position));
        pts
    });
    MeromorphicMap {
        name: format!("pole-sum[{}]", data.len()),
        jet_fn,
        log_derivative: None,
        third_derivative: Some(third),
        claimed: None,
        known_points: Some(known),
    }
}

/// Truncation of Σ_{k=1}^{K} 1/((z - k²)² - k^{-2}): pole pairs at k² ± 1/k
/// whose mutual distance 2/k shrinks as k grows, so the pole-pair separation
/// infimum is driven to zero. Partial fractions make it a simple-pole sum
/// with residues ±k/2.
pub fn colliding_pair_sum(k_max: u32) -> MeromorphicMap {
    let mut poles = Vec::new();
    for k in 1..=k_max {
        let kk = k as f64;
        let center = kk * kk;
        poles.push((Complex64::new(center + 1.0 / kk, 0.0), Complex64::new(kk / 2.0, 0.0)));
        poles.push((Complex64::new(center - 1.0 / kk, 0.0), Complex64::new(-kk / 2.0, 0.0)));
    }
    let mut m = simple_pole_sum_map(poles);
    m.name = format!("colliding-pairs[{k_max}]");
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moebius_example_zero_and_pole() {
        // (z-1)/(z+1): zero at 1, pole at -1, both simple
        let f = rational_map(&[(c(1.0, 0.0), 1)], &[(c(-1.0, 0.0), 1)], c(1.0, 0.0)).unwrap();
        let pts = f.known_points_within(10.0).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(f.jet(c(1.0, 0.0)).f0.norm() < 1e-15);
        assert!(f.jet(c(-1.0, 0.0)).value().is_infinite());
        // (f'/f)(0) = 1/(0-1) - 1/(0+1) = -2
        assert_relative_eq!(f.log_derivative(c(0.0, 0.0)).re, -2.0, max_relative = 1e-15);
        // quotient jets agree with the closed form f' = 2/(z+1)^2
        let z = c(0.3, -0.8);
        let j = f.jet(z).to_direct().unwrap();
        let expect = 2.0 * (z + 1.0).powi(-2);
        assert!((j.f1 - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn double_pole_at_origin() {
        // 1/z^2
        let f = rational_map(&[], &[(c(0.0, 0.0), 2)], c(1.0, 0.0)).unwrap();
        let j = f.jet(c(0.0, 0.0));
        assert!(j.value().is_infinite());
        let pts = f.known_points_within(1.0).unwrap();
        assert_eq!(pts[0].multiplicity, 2);
        let z = c(2.0, 0.0);
        assert_relative_eq!(f.jet(z).abs_value(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn pole_sum_jets_are_exact_at_and_near_poles() {
        let f = simple_pole_sum_map(vec![(c(2.0, 0.0), c(1.0, 0.0)), (c(-1.0, 1.0), c(0.5, 0.5))]);
        // exact at a pole
        let j = f.jet(c(2.0, 0.0));
        assert!(j.value().is_infinite());
        assert!(j.is_finite());
        // near a pole the direct form still matches the closed form
        let z = c(2.0 + 1e-5, 0.0);
        let expect = (z - c(2.0, 0.0)).inv() + c(0.5, 0.5) / (z - c(-1.0, 1.0));
        let got = f.jet(z).to_direct().unwrap().f0;
        assert!((got - expect).norm() < 1e-9 * expect.norm());
    }

    #[test]
    fn colliding_pairs_have_expected_pole_positions() {
        let f = colliding_pair_sum(10);
        let pts = f.known_points_within(120.0).unwrap();
        // k = 1..10 have centers 1..100; within |z| <= 120 all 10 pairs fit
        assert_eq!(pts.len(), 20);
        // the pair at k = 10 sits at 100 ± 0.1
        assert!(pts.iter().any(|p| (p.position - c(100.1, 0.0)).norm() < 1e-12));
        assert!(pts.iter().any(|p| (p.position - c(99.9, 0.0)).norm() < 1e-12));
        // residues via the jet: near 100.1 the function looks like (k/2)/(z-p)
        let z = c(100.1 + 1e-6, 0.0);
        let v = f.jet(z).to_direct().unwrap().f0;
        assert_relative_eq!((v * (z - c(100.1, 0.0))).re, 5.0, max_relative = 1e-4);
    }

    #[test]
    fn constant_map_is_flat() {
        let f = constant_map(c(3.0, 4.0));
        let j = f.jet(c(10.0, -7.0));
        assert_relative_eq!(j.abs_value(), 5.0, max_relative = 1e-15);
        assert_eq!(crate::riemann::spherical_derivative(&j).unwrap(), 0.0);
        let zero = constant_map(c(0.0, 0.0));
        assert_eq!(zero.jet(c(1.0, 1.0)).f0, Complex64::default());
    }
}
