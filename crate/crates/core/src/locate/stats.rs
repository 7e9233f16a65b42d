//! Separation and distribution statistics over located point sets: the
//! β-weighted zero/pole separation, the both-kinds-in-every-disc scan, the
//! derivative membership conditions, and c-point proximity profiles.

use num_complex::Complex64;

use crate::catalog::{const_shift_map, derivative_map, MeromorphicMap, PointKind};
use crate::{Error, Result};

use super::{locate_in_region, LocateConfig, PointSet, Region};

/// β-separation of zeros from poles: inf over zeros q (|q| >= 1) of
/// dist(q, P)·|q|^β, and symmetrically, with the attaining pairs.
#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub zero_side: f64,
    pub zero_side_pair: (Complex64, Complex64),
    pub pole_side: f64,
    pub pole_side_pair: (Complex64, Complex64),
    pub beta: f64,
}

pub fn beta_separation(ps: &PointSet, beta: f64) -> Result<SeparationReport> {
    let zeros: Vec<Complex64> = ps.zeros().map(|p| p.position).filter(|z| z.norm() >= 1.0).collect();
    let poles: Vec<Complex64> = ps.poles().map(|p| p.position).filter(|z| z.norm() >= 1.0).collect();
    if zeros.is_empty() {
        return Err(Error::EmptySet("zero"));
    }
    if poles.is_empty() {
        return Err(Error::EmptySet("pole"));
    }
    let side = |from: &[Complex64], to: &[Complex64]| {
        let mut best = (f64::INFINITY, (Complex64::default(), Complex64::default()));
        for &q in from {
            for &p in to {
                let v = (q - p).norm() * q.norm().powf(beta);
                if v < best.0 {
                    best = (v, (q, p));
                }
            }
        }
        best
    };
    let (z_inf, z_pair) = side(&zeros, &poles);
    let (p_inf, p_pair) = side(&poles, &zeros);
    Ok(SeparationReport {
        zero_side: z_inf,
        zero_side_pair: z_pair,
        pole_side: p_inf,
        pole_side_pair: p_pair,
        beta,
    })
}

/// Result of probing discs Δ_η(z0) = {|z - z0| < η |z0|^{-β}} across a grid
/// of centers: the largest η any probe needed to capture both kinds, and the
/// multiplicity-counted crowding of single-kind discs across an ε grid.
#[derive(Debug, Clone)]
pub struct EqualDistributionReport {
    pub worst_eta: f64,
    pub worst_center: Complex64,
    /// (ε, max multiplicity-weighted same-kind crowd, max distinct locations)
    pub crowd: Vec<(f64, u64, usize)>,
    pub probes_used: usize,
    pub inconclusive: bool,
}

pub fn equal_distribution_scan(
    ps: &PointSet,
    beta: f64,
    eta_cap: f64,
    probe_grid: usize,
) -> EqualDistributionReport {
    let zeros: Vec<Complex64> = ps.zeros().map(|p| p.position).collect();
    let poles: Vec<Complex64> = ps.poles().map(|p| p.position).collect();
    let (center, hw, hh) = ps.region.bounding_rect();
    let mut worst = (0.0f64, Complex64::default());
    let mut probes_used = 0;
    let n = probe_grid.max(2);
    for i in 0..n {
        for j in 0..n {
            let z0 = center
                + Complex64::new(
                    hw * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0),
                    hh * (2.0 * (j as f64 + 0.5) / n as f64 - 1.0),
                );
            let natural = z0.norm().max(1.0).powf(-beta);
            // keep the probe disc inside the located region
            if !ps.region.contains(z0, eta_cap * natural) {
                continue;
            }
            probes_used += 1;
            let nearest = |set: &[Complex64]| {
                set.iter().map(|p| (p - z0).norm()).fold(f64::INFINITY, f64::min)
            };
            // minimal η with both kinds inside Δ_η(z0)
            let eta_needed = nearest(&zeros).max(nearest(&poles)) / natural;
            if eta_needed > worst.0 {
                worst = (eta_needed, z0);
            }
        }
    }
    // crowding: discs centered at the located points themselves catch the
    // densest configurations
    let mut crowd = Vec::new();
    for k in 0..6 {
        let eps = eta_cap * 0.05 * 2f64.powi(k); // ε grid up to ~1.6 η_cap
        let mut max_mult = 0u64;
        let mut max_locs = 0usize;
        for p in &ps.points {
            let natural = p.position.norm().max(1.0).powf(-beta);
            let radius = eps * natural;
            let mut mult = 0u64;
            let mut locs = 0usize;
            for q in &ps.points {
                if q.kind == p.kind && (q.position - p.position).norm() < radius {
                    mult += q.multiplicity as u64;
                    locs += 1;
                }
            }
            max_mult = max_mult.max(mult);
            max_locs = max_locs.max(locs);
        }
        crowd.push((eps, max_mult, max_locs));
    }
    EqualDistributionReport {
        worst_eta: worst.0,
        worst_center: worst.1,
        crowd,
        probes_used,
        inconclusive: probes_used == 0,
    }
}

/// The two separation conditions under which differentiation preserves
/// membership: (i) pole-to-other-pole separation, (ii) critical-point-to-pole
/// separation, both weighted by |·|^{-β}. Empty infima are +∞ sentinels.
#[derive(Debug, Clone)]
pub struct DerivativeConditionReport {
    pub pole_pair_inf: f64,
    pub pole_pair: Option<(Complex64, Complex64)>,
    pub critical_inf: f64,
    pub critical_pair: Option<(Complex64, Complex64)>,
    pub poles: usize,
    pub critical_points: usize,
    pub complete: bool,
}

pub fn derivative_condition_check(
    f: &MeromorphicMap,
    beta: f64,
    region: &Region,
    cfg: &LocateConfig,
) -> Result<DerivativeConditionReport> {
    let ps = locate_in_region(f, region, cfg);
    let poles: Vec<Complex64> =
        ps.poles().map(|p| p.position).filter(|z| z.norm() >= 1.0).collect();
    let fp = derivative_map(f)?;
    let dps = locate_in_region(&fp, region, cfg);
    let criticals: Vec<Complex64> =
        dps.zeros().map(|p| p.position).filter(|z| z.norm() >= 1.0).collect();

    let mut pole_pair_inf = f64::INFINITY;
    let mut pole_pair = None;
    for (i, &p) in poles.iter().enumerate() {
        for &q in poles.iter().skip(i + 1) {
            let v = (p - q).norm() * p.norm().powf(-beta).min(q.norm().powf(-beta));
            if v < pole_pair_inf {
                pole_pair_inf = v;
                pole_pair = Some((p, q));
            }
        }
    }
    let mut critical_inf = f64::INFINITY;
    let mut critical_pair = None;
    for &c in &criticals {
        for &p in &poles {
            let v = (c - p).norm() * c.norm().powf(-beta);
            if v < critical_inf {
                critical_inf = v;
                critical_pair = Some((c, p));
            }
        }
    }
    Ok(DerivativeConditionReport {
        pole_pair_inf,
        pole_pair,
        critical_inf,
        critical_pair,
        poles: poles.len(),
        critical_points: criticals.len(),
        complete: ps.complete && dps.complete,
    })
}

/// Proximity profile of the c-points: for each located c-point ζ (ordered by
/// modulus), the weighted distances |ζ|^β dist(ζ, Q) and |ζ|^β dist(ζ, P).
#[derive(Debug, Clone)]
pub struct CPointReport {
    pub c: Complex64,
    /// (|ζ|, |ζ|^β·dist to zeros, |ζ|^β·dist to poles) sorted by |ζ|
    pub rows: Vec<(f64, f64, f64)>,
    pub zero_distance_inf: f64,
    pub pole_distance_inf: f64,
    pub complete: bool,
}

pub fn c_point_proximity(
    f: &MeromorphicMap,
    c: Complex64,
    zeros_poles: &PointSet,
    beta: f64,
    region: &Region,
    cfg: &LocateConfig,
) -> Result<CPointReport> {
    if c.norm() == 0.0 {
        return Err(Error::Unsupported("c must be nonzero; zeros are already located".into()));
    }
    let shifted = const_shift_map(f, -c);
    let cps = locate_in_region(&shifted, region, cfg);
    let zeros: Vec<Complex64> = zeros_poles.zeros().map(|p| p.position).collect();
    let poles: Vec<Complex64> = zeros_poles.poles().map(|p| p.position).collect();
    let mut rows = Vec::new();
    for zp in cps.zeros() {
        let zeta = zp.position;
        if zeta.norm() < 1.0 {
            continue;
        }
        let w = zeta.norm().powf(beta);
        let dq = zeros.iter().map(|q| (q - zeta).norm()).fold(f64::INFINITY, f64::min) * w;
        let dp = poles.iter().map(|p| (p - zeta).norm()).fold(f64::INFINITY, f64::min) * w;
        rows.push((zeta.norm(), dq, dp));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if rows.is_empty() {
        return Ok(CPointReport {
            c,
            rows,
            zero_distance_inf: f64::INFINITY,
            pole_distance_inf: f64::INFINITY,
            complete: cps.complete,
        });
    }
    let zero_inf = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let pole_inf = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    Ok(CPointReport {
        c,
        rows,
        zero_distance_inf: zero_inf,
        pole_distance_inf: pole_inf,
        complete: cps.complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bank_kaufman, colliding_pair_sum, weierstrass_p, Lattice};
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wp_points() -> PointSet {
        let f = weierstrass_p(&Lattice::square(PI));
        locate_in_region(&f, &Region::square(c64(0.0, 0.0), 8.2), &LocateConfig::default())
    }

    #[test]
    fn wp_separation_matches_lattice_oracle() {
        // oracle: every zero sits at a cell corner, nearest lattice point at
        // distance π/√2
        let ps = wp_points();
        let rep = beta_separation(&ps, 0.0).unwrap();
        let oracle = PI / 2f64.sqrt();
        assert!((rep.zero_side - oracle).abs() < 1e-6, "zero side {}", rep.zero_side);
        assert!((rep.pole_side - oracle).abs() < 1e-6);
    }

    #[test]
    fn synthetic_separation_weighting() {
        // points {q = 4} vs {p = 5}, β = 1: dist·|q|^β = 1·4 = 4
        use crate::locate::LocatedPoint;
        let mk = |pos: Complex64, kind| LocatedPoint {
            position: pos,
            kind,
            multiplicity: 1,
            cell_center: pos,
            cell_half: 0.1,
            residual: 0.0,
        };
        let ps = PointSet {
            function_id: "synthetic".into(),
            region: Region::square(Complex64::default(), 10.0),
            tol: 1e-9,
            points: vec![mk(c64(4.0, 0.0), PointKind::Zero), mk(c64(5.0, 0.0), PointKind::Pole)],
            complete: true,
        };
        let rep = beta_separation(&ps, 1.0).unwrap();
        assert!((rep.zero_side - 4.0).abs() < 1e-12);
        assert!((rep.pole_side - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bank_kaufman_separation_from_enumeration() {
        // oracle values from the closed-form enumeration within |z| <= 100
        let f = bank_kaufman(&Lattice::square(PI)).unwrap();
        let pts = f.known_points_within(100.0).unwrap();
        let zeros: Vec<Complex64> = pts
            .iter()
            .filter(|p| p.kind == PointKind::Zero && p.position.norm() >= 1.0)
            .map(|p| p.position)
            .collect();
        let poles: Vec<Complex64> = pts
            .iter()
            .filter(|p| p.kind == PointKind::Pole && p.position.norm() >= 1.0)
            .map(|p| p.position)
            .collect();
        let mut brute = f64::INFINITY;
        for &q in &zeros {
            for &p in &poles {
                brute = brute.min((q - p).norm() / q.norm());
            }
        }
        // frozen from the enumeration: attained by the outer zero cosh(3π/2)
        assert!((brute - 1.021296099136784).abs() < 1e-12);
        // the example pair (cosh(π/2), i sinh π) evaluates to ≈ 4.71
        let pair = ((PI / 2.0).cosh(), PI.sinh());
        let example = (c64(pair.0, 0.0) - c64(0.0, pair.1)).norm() / pair.0;
        assert!((example - 4.709979463972539).abs() < 1e-12);

        // and the measured point set reproduces the oracle infimum
        let mut cfg = LocateConfig::with_beta(-1.0);
        cfg.tol = 5e-3;
        let ps = locate_in_region(&f, &Region::disc(100.0), &cfg);
        let rep = beta_separation(&ps, -1.0).unwrap();
        assert!((rep.zero_side - brute).abs() < 1e-6, "measured {}", rep.zero_side);
    }

    #[test]
    fn wp_equal_distribution_cell_diameter_disc() {
        let ps = wp_points();
        // euclidean disc of radius one cell diameter (π√2) must contain both
        // kinds around every interior probe
        let rep = equal_distribution_scan(&ps, 0.0, PI * 2f64.sqrt(), 9);
        assert!(!rep.inconclusive);
        assert!(rep.worst_eta <= PI * 2f64.sqrt(), "worst η = {}", rep.worst_eta);
        // crowding at small ε: one double-zero location, one double-pole
        // location per small disc
        let (_, max_mult, max_locs) = rep.crowd[0];
        assert!(max_mult <= 2);
        assert_eq!(max_locs, 1);
    }

    #[test]
    fn single_point_set_is_inconclusive_for_presence() {
        use crate::locate::LocatedPoint;
        let only = LocatedPoint {
            position: c64(0.3, 0.0),
            kind: PointKind::Zero,
            multiplicity: 1,
            cell_center: c64(0.3, 0.0),
            cell_half: 0.1,
            residual: 0.0,
        };
        let ps = PointSet {
            function_id: "one".into(),
            region: Region::square(Complex64::default(), 1.0),
            tol: 1e-9,
            points: vec![only],
            complete: true,
        };
        let rep = equal_distribution_scan(&ps, 0.0, 0.5, 5);
        // no pole anywhere: minimal η exceeds any cap => reported as the
        // distance to the missing kind (infinite)
        assert!(rep.worst_eta.is_infinite() || rep.inconclusive);
        assert_eq!(rep.crowd[0].1, 1);
    }

    #[test]
    fn wp_derivative_conditions_hold() {
        let f = weierstrass_p(&Lattice::square(PI));
        let rep = derivative_condition_check(
            &f,
            0.0,
            &Region::square(c64(0.2, 0.1), 5.0),
            &LocateConfig::default(),
        )
        .unwrap();
        assert!(rep.complete);
        // pole lattice is 0-separated with minimum distance π
        assert!((rep.pole_pair_inf - PI).abs() < 1e-6, "pole pair inf {}", rep.pole_pair_inf);
        // critical points (zeros of ℘') are the half-periods: distance to
        // the pole lattice is π/2 (real/imaginary) or π/√2 (mixed)
        assert!(rep.critical_points > 0);
        assert!((rep.critical_inf - PI / 2.0).abs() < 1e-5, "critical inf {}", rep.critical_inf);
    }

    #[test]
    fn colliding_pairs_drive_infimum_down() {
        // truncation at K: infimum = 2/K (+ small shifts); at K = 10 this is
        // 0.2, and pushing K to 21 takes it below 0.1
        let f10 = colliding_pair_sum(10);
        let mut cfg = LocateConfig::default();
        cfg.tol = 5e-3;
        let r10 = derivative_condition_check(
            &f10,
            0.0,
            &Region::rect(c64(60.0, 0.0), 60.0, 1.5),
            &cfg,
        )
        .unwrap();
        assert!((r10.pole_pair_inf - 0.2).abs() < 1e-6, "K=10 infimum: {}", r10.pole_pair_inf);

        let f21 = colliding_pair_sum(21);
        let r21 = derivative_condition_check(
            &f21,
            0.0,
            &Region::rect(c64(231.0, 0.0), 231.0, 1.5),
            &cfg,
        )
        .unwrap();
        assert!(r21.pole_pair_inf < 0.1, "K=21 infimum: {}", r21.pole_pair_inf);
        assert!((r21.pole_pair_inf - 2.0 / 21.0).abs() < 0.05 * (2.0 / 21.0));
    }

    #[test]
    fn single_pole_gives_infinite_sentinel() {
        let f = crate::catalog::rational_map(&[], &[(c64(2.0, 0.0), 1)], c64(1.0, 0.0)).unwrap();
        let rep = derivative_condition_check(
            &f,
            0.0,
            &Region::square(c64(0.0, 0.0), 4.0),
            &LocateConfig::default(),
        )
        .unwrap();
        assert!(rep.pole_pair_inf.is_infinite());
    }

    #[test]
    fn wp_critical_value_points_are_separated_from_zeros_and_poles() {
        let lat = Lattice::square(PI);
        let f = weierstrass_p(&lat);
        let region = Region::square(c64(0.0, 0.0), 6.5);
        let ps = locate_in_region(&f, &region, &LocateConfig::default());
        let e1 = lat.critical_values()[0];
        let rep = c_point_proximity(&f, e1, &ps, 0.0, &region, &LocateConfig::default()).unwrap();
        assert!(!rep.rows.is_empty());
        // e1-points are the real half-lattice points (k+1/2)π + imπ: their
        // distance to both the zero set and the pole set is π/2
        assert!((rep.zero_distance_inf - PI / 2.0).abs() < 1e-5, "{}", rep.zero_distance_inf);
        assert!((rep.pole_distance_inf - PI / 2.0).abs() < 1e-5, "{}", rep.pole_distance_inf);
    }
}
