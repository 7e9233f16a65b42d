//! Nevanlinna-theory quantities at desk scale: circle proximity integrals,
//! counting functions from located point sets, the characteristic in both
//! the classical (m + N) and spherical-area forms, and disc energies on the
//! natural scale Δ_ε(h).
//!
//! All circle integrals of one function at one radius are produced by a
//! single adaptive sweep, so identities like |log|f|| = log⁺|f| + log⁺|1/f|
//! hold to rounding rather than to quadrature tolerance.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{MeromorphicMap, PointKind};
use crate::locate::PointSet;
use crate::quad::circle_mean;
use crate::riemann::{Rep, ScalingParams};
use crate::util::fmt_f64;
use crate::{Error, Result};

/// Hard floor for log integrands; the double-precision exponent range is
/// ±745, and the clip keeps exact zeros/poles on the circle integrable.
const LOG_CLIP: f64 = 700.0;

fn clip(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LOG_CLIP, LOG_CLIP)
    }
}

/// All circle means of one sweep at radius r.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircleSweep {
    /// radius actually used (nudged off a special point if necessary)
    pub r: f64,
    pub m_f: f64,
    pub m_recip: f64,
    /// (1/2π) ∫ |log|f|| dθ
    pub schmiegung: f64,
    pub m_fprime: f64,
    pub m_recip_fprime: f64,
    /// (1/2π) ∫ log f^# dθ
    pub sphere_log_mean: f64,
    pub nudged: bool,
}

fn sweep_at(f: &MeromorphicMap, r: f64, tol: f64) -> (CircleSweep, bool) {
    let out = circle_mean(
        |theta: f64| {
            let z = Complex64::from_polar(r, theta);
            let j = f.jet(z);
            let (la, lfp) = match j.rep {
                Rep::Direct => {
                    let la = j.f0.norm().ln();
                    (la, j.f1.norm().ln())
                }
                Rep::Reciprocal => {
                    let lg = j.f0.norm().ln();
                    // f' = -g'/g²
                    (-lg, j.f1.norm().ln() - 2.0 * lg)
                }
            };
            let la = clip(la);
            let lfp = clip(lfp);
            // chart-free: f^# = |j.f1| / (1 + |j.f0|²) in both representations
            let lsharp = clip(j.f1.norm().ln() - j.f0.norm_sqr().ln_1p());
            [
                la.max(0.0),
                (-la).max(0.0),
                la.abs(),
                lfp.max(0.0),
                (-lfp).max(0.0),
                lsharp,
            ]
        },
        tol,
        16,
        400_000,
    );
    let v = out.values;
    (
        CircleSweep {
            r,
            m_f: v[0],
            m_recip: v[1],
            schmiegung: v[2],
            m_fprime: v[3],
            m_recip_fprime: v[4],
            sphere_log_mean: v[5],
            nudged: false,
        },
        out.converged,
    )
}

/// Adaptive circle sweep at |z| = r with automatic radius nudging when the
/// circle essentially passes through a zero or pole.
pub fn circle_sweep(f: &MeromorphicMap, r: f64, tol: f64) -> Result<CircleSweep> {
    let mut radius = r;
    for attempt in 0..4 {
        let (mut sweep, converged) = sweep_at(f, radius, tol);
        if converged {
            sweep.nudged = attempt > 0;
            return Ok(sweep);
        }
        radius *= 1.0 + 3e-4 * (attempt + 1) as f64;
    }
    Err(Error::Quadrature(format!(
        "circle sweep for {} at r = {r} did not converge after nudging",
        f.name()
    )))
}

/// Proximity function m(r, f) = (1/2π)∫ log⁺|f| dθ, together with m(r, 1/f)
/// from the same sweep.
pub fn proximity_m(f: &MeromorphicMap, r: f64, tol: f64) -> Result<(f64, f64)> {
    let s = circle_sweep(f, r, tol)?;
    Ok((s.m_f, s.m_recip))
}

/// m(r, f) + m(r, 1/f) computed as the single integral of |log|f||.
pub fn schmiegung_sum(f: &MeromorphicMap, r: f64, tol: f64) -> Result<f64> {
    Ok(circle_sweep(f, r, tol)?.schmiegung)
}

/// m(r, 1/f'), the circle mean of -log f^#, and the residual left after
/// removing the m(r,f), m(r,1/f) corrections from their difference.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeProximity {
    pub m_recip_fprime: f64,
    pub neg_sphere_log_mean: f64,
    pub yos_residual: f64,
}

pub fn m_over_fprime(f: &MeromorphicMap, r: f64, tol: f64) -> Result<DerivativeProximity> {
    let s = circle_sweep(f, r, tol)?;
    Ok(DerivativeProximity {
        m_recip_fprime: s.m_recip_fprime,
        neg_sphere_log_mean: -s.sphere_log_mean,
        yos_residual: s.m_recip_fprime + s.sphere_log_mean - (s.m_f + s.m_recip),
    })
}

/// N(r) from a located point set:
/// Σ_{0<|p|<r} mult·log(r/|p|) + n(0)·log r, evaluated exactly as a sum.
/// Returns (N, multiplicity count n(r) including the origin, reliable flag).
pub fn counting_n(
    ps: &PointSet,
    kind: PointKind,
    r: f64,
    origin_mult: u32,
) -> (f64, u64, bool) {
    let mut n_sum = origin_mult as u64;
    let mut acc = origin_mult as f64 * r.ln();
    for p in ps.points.iter().filter(|p| p.kind == kind) {
        let m = p.position.norm();
        if m <= 1e-12 {
            continue; // origin points enter through origin_mult
        }
        if m < r {
            n_sum += p.multiplicity as u64;
            acc += p.multiplicity as f64 * (r / m).ln();
        }
    }
    (acc, n_sum, ps.complete)
}

/// Multiplicity at the origin recorded in a point set.
pub fn origin_multiplicity(ps: &PointSet, kind: PointKind) -> u32 {
    ps.points
        .iter()
        .filter(|p| p.kind == kind && p.position.norm() <= 1e-12)
        .map(|p| p.multiplicity)
        .sum()
}

/// Configuration of the polar shell grid behind the spherical-area
/// characteristic.
#[derive(Debug, Clone)]
pub struct ShellConfig {
    pub shells_per_decade: usize,
    pub min_angular: usize,
    pub max_angular: usize,
    /// angular spacing target as a fraction of the natural scale |z|^{-β}
    pub angular_fraction: f64,
    pub beta: f64,
    /// innermost shell radius
    pub t0: f64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        ShellConfig {
            shells_per_decade: 64,
            min_angular: 64,
            max_angular: 4096,
            angular_fraction: 0.15,
            beta: 0.0,
            t0: 0.05,
        }
    }
}

/// Spherical-area characteristic T(r) = ∫₀^r A(t)/t dt with
/// A(t) = (1/π)∬_{|z|<t} (f^#)² dA, accumulated over polar shells for every
/// requested radius in one pass. Radii must be ascending.
pub fn ahlfors_shimizu_t(f: &MeromorphicMap, radii: &[f64], cfg: &ShellConfig) -> Result<Vec<f64>> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Quadrature("ahlfors radii must be strictly ascending".into()));
    }
    let r_max = *radii.last().unwrap();
    // geometric boundaries t0·ρ^k merged with the requested radii so every
    // requested r is an exact shell boundary
    let rho = 10f64.powf(1.0 / cfg.shells_per_decade as f64);
    let mut bounds = vec![cfg.t0.min(radii[0] * 0.5)];
    loop {
        let next = bounds.last().unwrap() * rho;
        if next >= r_max {
            break;
        }
        bounds.push(next);
    }
    bounds.extend_from_slice(radii);
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * *b);

    // per-shell area integrals of (f^#)², computed in parallel
    let shells: Vec<(f64, f64, f64)> = bounds
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let t_mid = 0.5 * (a + b);
            let natural = t_mid.max(1.0).powf(-cfg.beta);
            let n = ((2.0 * std::f64::consts::PI * t_mid) / (cfg.angular_fraction * natural))
                .ceil() as usize;
            let n = n.clamp(cfg.min_angular, cfg.max_angular);
            let mut sum = 0.0;
            for k in 0..n {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                let j = f.jet(Complex64::from_polar(t_mid, theta));
                let sharp = j.f1.norm() / (1.0 + j.f0.norm_sqr());
                if sharp.is_finite() {
                    sum += sharp * sharp;
                }
            }
            let ring_area = std::f64::consts::PI * (b * b - a * a);
            (a, b, sum / n as f64 * ring_area / std::f64::consts::PI)
        })
        .collect();

    // accumulate T(r) = Σ A(t)·Δln t, with A taken at the shell midpoint
    let mut out = Vec::with_capacity(radii.len());
    let mut idx = 0usize;
    let mut area = 0.0; // cumulative A at the inner boundary of this shell
    let mut t_acc = 0.0;
    for &(a, b, da) in &shells {
        let mid_area = area + 0.5 * da;
        t_acc += mid_area * (b / a).ln();
        area += da;
        while idx < radii.len() && (radii[idx] - b).abs() < 1e-12 * b {
            out.push(t_acc);
            idx += 1;
        }
    }
    while idx < radii.len() {
        out.push(t_acc);
        idx += 1;
    }
    Ok(out)
}

/// Disc energy and sup statistics over the natural discs Δ_ε(h):
/// |h|^{2|α|}·∬_{Δ_ε(h)} (f^#)² dA and sup_{Δ_ε(h)} f^#(z)·|z|^{|α|-β}.
/// Requested ε values must be ascending; statistics are cumulative over a
/// shared ring grid, so both are monotone in ε by construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiscEnergy {
    pub eps: f64,
    pub energy: f64,
    pub sup_weighted: f64,
}

pub fn disc_energy(
    f: &MeromorphicMap,
    h: Complex64,
    eps_list: &[f64],
    params: ScalingParams,
) -> Vec<DiscEnergy> {
    if eps_list.is_empty() {
        return Vec::new();
    }
    let abs_alpha = params.alpha.abs();
    let weight_out = h.norm().powf(2.0 * abs_alpha);
    let r_outer = params.disc_radius(*eps_list.last().unwrap(), h);
    let rings = 64usize;
    let mut cumulative = Vec::new();
    let mut energy = 0.0;
    let mut sup = 0.0f64;
    for i in 0..rings {
        let r_in = r_outer * i as f64 / rings as f64;
        let r_out = r_outer * (i + 1) as f64 / rings as f64;
        let r_mid = 0.5 * (r_in + r_out);
        let n = 16 * (i + 1);
        let ring_area = std::f64::consts::PI * (r_out * r_out - r_in * r_in);
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let z = h + Complex64::from_polar(r_mid, theta);
            let j = f.jet(z);
            let sharp = j.f1.norm() / (1.0 + j.f0.norm_sqr());
            if !sharp.is_finite() {
                continue;
            }
            energy += sharp * sharp * ring_area / n as f64;
            sup = sup.max(sharp * z.norm().powf(abs_alpha - params.beta));
        }
        cumulative.push((r_out, energy, sup));
    }
    eps_list
        .iter()
        .map(|&eps| {
            let r_eps = params.disc_radius(eps, h);
            let row = cumulative
                .iter()
                .filter(|(r, _, _)| *r <= r_eps * (1.0 + 1e-12))
                .next_back();
            match row {
                Some(&(_, e, s)) => DiscEnergy { eps, energy: weight_out * e, sup_weighted: s },
                None => DiscEnergy { eps, energy: 0.0, sup_weighted: 0.0 },
            }
        })
        .collect()
}

/// One radius of the growth table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    pub n0: u64,
    pub ninf: u64,
    pub m_f: f64,
    pub m_recip: f64,
    #[serde(rename = "N_f")]
    pub n_f: f64,
    #[serde(rename = "N_recip")]
    pub n_recip: f64,
    #[serde(rename = "T_nev")]
    pub t_nev: f64,
    #[serde(rename = "T_as")]
    pub t_as: f64,
    pub schmiegung: f64,
    pub m_recip_fprime: f64,
}

/// Assemble growth rows at the given radii from one point set (complete out
/// to the largest radius) plus per-radius circle sweeps and one shell pass.
pub fn growth_table(
    f: &MeromorphicMap,
    ps: &PointSet,
    radii: &[f64],
    quad_tol: f64,
    shell_cfg: &ShellConfig,
) -> Result<Vec<GrowthRow>> {
    let sweeps: Vec<Result<CircleSweep>> =
        radii.par_iter().map(|&r| circle_sweep(f, r, quad_tol)).collect();
    let t_as = ahlfors_shimizu_t(f, radii, shell_cfg)?;
    let zero_origin = origin_multiplicity(ps, PointKind::Zero);
    let pole_origin = origin_multiplicity(ps, PointKind::Pole);
    let mut rows = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let sweep = match &sweeps[i] {
            Ok(s) => *s,
            Err(e) => return Err(Error::Quadrature(format!("r = {r}: {e}"))),
        };
        let (n_zero, count_zero, _) = counting_n(ps, PointKind::Zero, r, zero_origin);
        let (n_pole, count_pole, _) = counting_n(ps, PointKind::Pole, r, pole_origin);
        rows.push(GrowthRow {
            r,
            n0: count_zero,
            ninf: count_pole,
            m_f: sweep.m_f,
            m_recip: sweep.m_recip,
            n_f: n_pole,
            n_recip: n_zero,
            t_nev: sweep.m_f + n_pole,
            t_as: t_as[i],
            schmiegung: sweep.schmiegung,
            m_recip_fprime: sweep.m_recip_fprime,
        });
    }
    Ok(rows)
}

/// Fixed-order CSV emission of a growth table, with a versioned header.
pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("# growth v1\n");
    out.push_str("r,n0,ninf,m_f,m_recip,N_f,N_recip,T_nev,T_as,schmiegung,m_recip_fprime\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(row.r),
            row.n0,
            row.ninf,
            fmt_f64(row.m_f),
            fmt_f64(row.m_recip),
            fmt_f64(row.n_f),
            fmt_f64(row.n_recip),
            fmt_f64(row.t_nev),
            fmt_f64(row.t_as),
            fmt_f64(row.schmiegung),
            fmt_f64(row.m_recip_fprime),
        ));
    }
    out
}
