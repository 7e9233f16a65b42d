//! Meromorphic continuation of first Painlevé transcendents (w'' = z + 6w²)
//! along rays and short straight segments, with Laurent pass-through at the
//! double poles, the first integral W = z w + 2w³ - w'²/2 (W' = w), and a
//! zero probe for the spherical-derivative law at the zeros.
//!
//! Pole handling: when |w| crosses the blow-up threshold the recent
//! checkpoints are fitted in the variable w^{-1/2} (nearly linear in z near
//! a double pole) to recover the pole position p and the free Laurent
//! coefficient h; integration restarts on the far side from the seed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::MeromorphicMap;
use crate::riemann::Jet;
use crate::util::{fmt_complex, fmt_f64, parse_f64};
use crate::{Error, Result};

mod laurent;
mod rk;

pub use laurent::{laurent_seed, LaurentSeed};
pub use rk::{drive, DriveResult, PState, Segment, ZMode};

/// Initial data (z0, w0, w0') for a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PInitialData {
    pub z0: Complex64,
    pub w0: Complex64,
    pub w0p: Complex64,
}

/// A pole met along a path: position, free Laurent coefficient, and the
/// match residuals on the incoming and outgoing sides.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoleRecord {
    pub p: Complex64,
    pub h: Complex64,
    pub residual_in: f64,
    pub residual_out: f64,
}

/// A dense-output checkpoint: arclength parameter, position, state, and the
/// accumulated ∫ w dz since the last restart.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Checkpoint {
    pub s: f64,
    pub z: Complex64,
    pub w: Complex64,
    pub wp: Complex64,
    pub v: Complex64,
    /// W0 + ∫w reference for this pole-free arc (resets after each pole)
    pub w_ref: Complex64,
}

/// A continued solution along one ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub origin: Complex64,
    pub direction: Complex64,
    pub span: (f64, f64),
    pub checkpoints: Vec<Checkpoint>,
    pub poles: Vec<PoleRecord>,
    pub w0_const: Complex64,
    pub tol: f64,
}

/// First integral from the defining relation w'² = 2zw + 4w³ - 2W.
pub fn first_integral(z: Complex64, w: Complex64, wp: Complex64) -> Complex64 {
    z * w + 2.0 * w * w * w - 0.5 * wp * wp
}

/// Guard radius around a pole: 0.05 on the natural scale |p|^{-1/4}.
pub fn pole_guard(p: Complex64) -> f64 {
    0.05 * p.norm().max(1.0).powf(-0.25)
}

#[derive(Debug, Clone)]
struct FitResult {
    p: Complex64,
    h: Complex64,
    residual: f64,
}

/// Model for w^{-1/2} near a double pole, through u^8:
/// φ(u) = u (1 - a2 u⁴/2 - a3 u⁵/2 - h u⁶/2 + (3a2²/8 - a6/2) u⁸).
fn phi_model(z: Complex64, p: Complex64, h: Complex64) -> Complex64 {
    let u = z - p;
    let a2 = -p / 10.0;
    let a3 = Complex64::new(-1.0 / 6.0, 0.0);
    let a6 = p * p / 300.0;
    let u2 = u * u;
    let u4 = u2 * u2;
    u * (Complex64::new(1.0, 0.0) - 0.5 * a2 * u4 - 0.5 * a3 * u4 * u - 0.5 * h * u4 * u2
        + (0.375 * a2 * a2 - 0.5 * a6) * u4 * u4)
}

/// Fit (p, h) to recent near-pole checkpoints by branch-aligned square roots
/// and Gauss-Newton on the φ model.
fn fit_pole(buffer: &[(Complex64, Complex64)]) -> Option<FitResult> {
    // points ordered along the approach; take those well inside the window
    let pts: Vec<(Complex64, Complex64)> = buffer
        .iter()
        .filter(|(_, w)| w.norm() >= 25.0)
        .cloned()
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let pts = &pts[pts.len().saturating_sub(8)..];
    // branch-aligned φ = w^{-1/2}
    let mut phis = Vec::with_capacity(pts.len());
    let mut prev: Option<Complex64> = None;
    for &(z, w) in pts {
        let mut phi = w.sqrt().inv();
        if let Some(q) = prev {
            if (phi + q).norm() < (phi - q).norm() {
                phi = -phi;
            }
        }
        prev = Some(phi);
        phis.push((z, phi));
    }
    // linear seed: φ ≈ a z + b  =>  p ≈ -b/a
    let n = phis.len() as f64;
    let sz: Complex64 = phis.iter().map(|(z, _)| z).sum();
    let sp: Complex64 = phis.iter().map(|(_, p)| p).sum();
    let szz: Complex64 = phis.iter().map(|(z, _)| z * z).sum();
    let szp: Complex64 = phis.iter().map(|(z, p)| z * p).sum();
    let det = n * szz - sz * sz;
    if det.norm() == 0.0 {
        return None;
    }
    let a = (n * szp - sz * sp) / det;
    let b = (sp - a * sz) / n;
    if a.norm() == 0.0 {
        return None;
    }
    let mut p = -b / a;
    // sign convention of the branch: φ ≈ ±(z - p); fold the sign into the
    // data so the model's leading coefficient is +1
    let sign = if (a - 1.0).norm() < (a + 1.0).norm() { 1.0 } else { -1.0 };
    let phis: Vec<(Complex64, Complex64)> =
        phis.into_iter().map(|(z, f)| (z, f * sign)).collect();
    let mut h = Complex64::default();
    // Gauss-Newton in (p, h) with numerical Jacobian
    for _ in 0..6 {
        let mut jtj = [[Complex64::default(); 2]; 2];
        let mut jtr = [Complex64::default(); 2];
        let dp = 1e-7 * p.norm().max(1.0);
        let dh = 1e-7 * h.norm().max(1.0);
        for &(z, phi) in &phis {
            let r = phi - phi_model(z, p, h);
            let jp = (phi_model(z, p + dp, h) - phi_model(z, p - dp, h)) / (2.0 * dp);
            let jh = (phi_model(z, p, h + dh) - phi_model(z, p, h - dh)) / (2.0 * dh);
            // residual r = phi - model: J columns are -d model
            let (jp, jh) = (-jp, -jh);
            jtj[0][0] += jp.conj() * jp;
            jtj[0][1] += jp.conj() * jh;
            jtj[1][0] += jh.conj() * jp;
            jtj[1][1] += jh.conj() * jh;
            jtr[0] += jp.conj() * r;
            jtr[1] += jh.conj() * r;
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let d0 = (jtr[0] * jtj[1][1] - jtr[1] * jtj[0][1]) / det;
        let d1 = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        p -= d0;
        h -= d1;
        if d0.norm() < 1e-14 * p.norm().max(1.0) && d1.norm() < 1e-12 * h.norm().max(1.0) {
            break;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(z, phi) in &phis {
        num += (phi - phi_model(z, p, h)).norm_sqr();
        den += phi.norm_sqr();
    }
    Some(FitResult { p, h, residual: (num / den.max(1e-300)).sqrt() })
}

/// Outcome of continuing along one straight segment.
pub struct SegmentTrace {
    pub checkpoints: Vec<Checkpoint>,
    pub poles: Vec<PoleRecord>,
    pub end_state: PState,
    pub w_ref_end: Complex64,
}

const BLOW_UP: f64 = 1e3;

/// Continue (w, w') from the start of a segment to its end, passing through
/// any double poles met on the way.
pub fn continue_segment(
    start: Complex64,
    dir: Complex64,
    len: f64,
    state0: (Complex64, Complex64),
    tol: f64,
    record: bool,
) -> Result<SegmentTrace> {
    let dir = dir / dir.norm();
    let seg = Segment { start, dir, len, mode: ZMode::Moving };
    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    let mut poles = Vec::new();
    let mut t = 0.0f64;
    let mut y = PState { w: state0.0, wp: state0.1, v: Complex64::default() };
    let mut w_ref = first_integral(start, y.w, y.wp);
    // rolling buffer of accepted steps for the pole fit
    let mut buffer: Vec<(f64, Complex64, Complex64, Complex64)> = Vec::new();
    let mut guard_active: Vec<(Complex64, f64)> = Vec::new();
    loop {
        let mut local: Vec<Checkpoint> = Vec::new();
        let res = drive(
            &seg,
            y,
            t,
            tol,
            BLOW_UP,
            |tt, yy| {
                let z = seg.z_at(tt);
                local.push(Checkpoint { s: tt, z, w: yy.w, wp: yy.wp, v: yy.v, w_ref });
            },
            None,
        );
        match res {
            DriveResult::Done { y: end, t: t_end } => {
                buffer.extend(local.iter().map(|c| (c.s, c.z, c.w, c.wp)));
                if record {
                    checkpoints.extend(local);
                }
                // drop checkpoints inside any pole guard disc
                if record {
                    checkpoints.retain(|c| {
                        guard_active.iter().all(|(p, g)| (c.z - p).norm() >= *g)
                    });
                }
                return Ok(SegmentTrace {
                    checkpoints,
                    poles,
                    end_state: PState { w: end.w, wp: end.wp, v: end.v },
                    w_ref_end: w_ref,
                });
            }
            DriveResult::Stiff { t: ts } => {
                return Err(Error::Stiffness(seg.z_at(ts)));
            }
            DriveResult::BlowUp { t: tb } => {
                buffer.extend(local.iter().map(|c| (c.s, c.z, c.w, c.wp)));
                if record {
                    checkpoints.extend(local);
                }
                // fit the pole from the approach
                let fit_pts: Vec<(Complex64, Complex64)> = buffer
                    .iter()
                    .rev()
                    .take(40)
                    .map(|&(_, z, w, _)| (z, w))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .collect();
                let fit = fit_pole(&fit_pts).ok_or(Error::Continuation {
                    at: seg.z_at(tb),
                    reason: "not enough near-pole checkpoints for the fit".into(),
                })?;
                if fit.residual > 1e-4 {
                    return Err(Error::Continuation {
                        at: fit.p,
                        reason: format!("pole fit residual {:.3e} above tolerance", fit.residual),
                    });
                }
                let delta = pole_guard(fit.p);
                // restart on the far side, on the segment line
                let s_p = ((fit.p - start) * dir.conj()).re;
                let t_restart = s_p + delta;
                if t_restart >= len {
                    // pole guard reaches past the segment end: stop just
                    // before the guard; callers treat end-of-segment states
                    // inside a guard via the seed
                    let seed = laurent_seed(fit.p, fit.h, 10)?;
                    let z_end = seg.z_at(len);
                    let (w_end, wp_end) = seed.eval(z_end - fit.p);
                    poles.push(PoleRecord {
                        p: fit.p,
                        h: fit.h,
                        residual_in: fit.residual,
                        residual_out: f64::NAN,
                    });
                    if record {
                        checkpoints.retain(|c| (c.z - fit.p).norm() >= delta);
                    }
                    return Ok(SegmentTrace {
                        checkpoints,
                        poles,
                        end_state: PState { w: w_end, wp: wp_end, v: Complex64::default() },
                        w_ref_end: w_ref,
                    });
                }
                if t_restart <= tb {
                    return Err(Error::Continuation {
                        at: fit.p,
                        reason: "restart point not ahead of the blow-up point".into(),
                    });
                }
                let seed = laurent_seed(fit.p, fit.h, 10)?;
                let z_r = seg.z_at(t_restart);
                let (w_r, wp_r) = seed.eval(z_r - fit.p);
                // outgoing residual: seed vs a one-step integration later on
                let probe = 0.5 * delta;
                let (w_probe, wp_probe) = seed.eval(z_r + probe * dir - fit.p);
                let check = continue_plain(z_r, dir, probe, (w_r, wp_r), tol)?;
                let residual_out = ((check.0 - w_probe).norm() / w_probe.norm().max(1.0))
                    .max((check.1 - wp_probe).norm() / wp_probe.norm().max(1.0));
                poles.push(PoleRecord {
                    p: fit.p,
                    h: fit.h,
                    residual_in: fit.residual,
                    residual_out,
                });
                guard_active.push((fit.p, delta));
                if record {
                    checkpoints.retain(|c| (c.z - fit.p).norm() >= delta);
                }
                buffer.clear();
                t = t_restart;
                y = PState { w: w_r, wp: wp_r, v: Complex64::default() };
                w_ref = first_integral(z_r, w_r, wp_r);
            }
        }
    }
}

/// Pole-free plain integration (error if a blow-up happens); used for short
/// verification hops.
fn continue_plain(
    start: Complex64,
    dir: Complex64,
    len: f64,
    state0: (Complex64, Complex64),
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    let seg = Segment { start, dir, len, mode: ZMode::Moving };
    let y = PState { w: state0.0, wp: state0.1, v: Complex64::default() };
    match drive(&seg, y, 0.0, tol, BLOW_UP, |_, _| {}, None) {
        DriveResult::Done { y, .. } => Ok((y.w, y.wp)),
        DriveResult::BlowUp { t } => Err(Error::Continuation {
            at: seg.z_at(t),
            reason: "unexpected pole inside verification hop".into(),
        }),
        DriveResult::Stiff { t } => Err(Error::Stiffness(seg.z_at(t))),
    }
}

/// Integrate a ray from the initial data outward to |z| = r_max.
pub fn integrate_ray(
    init: &PInitialData,
    direction: Complex64,
    r_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Continuation {
            at: init.z0,
            reason: format!("tol {tol} outside [1e-12, 1e-6]"),
        });
    }
    let dir = direction / direction.norm();
    // ray length: from z0 to the sphere |z| = r_max along dir
    let b = (init.z0 * dir.conj()).re;
    let c = init.z0.norm_sqr() - r_max * r_max;
    let disc = b * b - c;
    if disc <= 0.0 {
        return Err(Error::Continuation {
            at: init.z0,
            reason: format!("r_max = {r_max} does not exceed |z0|"),
        });
    }
    let len = -b + disc.sqrt();
    let trace = continue_segment(init.z0, dir, len, (init.w0, init.w0p), tol, true)?;
    Ok(Trajectory {
        origin: init.z0,
        direction: dir,
        span: (0.0, len),
        checkpoints: trace.checkpoints,
        poles: trace.poles,
        w0_const: first_integral(init.z0, init.w0, init.w0p),
        tol,
    })
}

impl Trajectory {
    /// W at every checkpoint from the defining relation.
    pub fn first_integral_values(&self) -> Vec<(f64, Complex64)> {
        self.checkpoints
            .iter()
            .map(|c| (c.s, first_integral(c.z, c.w, c.wp)))
            .collect()
    }

    /// Max |W(z) - W_arc_ref - ∫w dz| per unit arclength over pole-free
    /// arcs: the drift of the first-integral identity W' = w.
    pub fn first_integral_drift(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.checkpoints {
            if c.s <= 0.0 {
                continue;
            }
            let w_here = first_integral(c.z, c.w, c.wp);
            let drift = (w_here - c.w_ref - c.v).norm() / c.s.max(1.0);
            worst = worst.max(drift);
        }
        worst
    }

    /// Evaluate W near the ray at a checkpoint parameter, failing inside
    /// pole guard discs.
    pub fn first_integral_at(&self, s: f64) -> Result<Complex64> {
        let c = self.nearest_checkpoint_by_s(s).ok_or(Error::EmptySet("checkpoint"))?;
        for p in &self.poles {
            if (c.z - p.p).norm() < pole_guard(p.p) {
                return Err(Error::GuardedPoint(c.z));
            }
        }
        Ok(first_integral(c.z, c.w, c.wp))
    }

    pub fn nearest_checkpoint_by_s(&self, s: f64) -> Option<&Checkpoint> {
        if self.checkpoints.is_empty() {
            return None;
        }
        let idx = match self
            .checkpoints
            .binary_search_by(|c| c.s.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.min(self.checkpoints.len() - 1),
        };
        // compare idx and idx-1
        let mut best = idx;
        if idx > 0 && (self.checkpoints[idx - 1].s - s).abs() < (self.checkpoints[idx].s - s).abs()
        {
            best = idx - 1;
        }
        Some(&self.checkpoints[best])
    }

    pub fn nearest_checkpoint(&self, z: Complex64) -> Option<&Checkpoint> {
        let s = ((z - self.origin) * self.direction.conj()).re;
        self.nearest_checkpoint_by_s(s.clamp(self.span.0, self.span.1))
    }

    /// Versioned text dump: one checkpoint or pole per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# trajectory v1\n");
        out.push_str(&format!("# origin {}\n", fmt_complex(self.origin)));
        out.push_str(&format!("# direction {}\n", fmt_complex(self.direction)));
        out.push_str(&format!(
            "# span {} {}\n",
            fmt_f64(self.span.0),
            fmt_f64(self.span.1)
        ));
        out.push_str(&format!("# w0const {}\n", fmt_complex(self.w0_const)));
        out.push_str(&format!("# tol {}\n", fmt_f64(self.tol)));
        for c in &self.checkpoints {
            out.push_str(&format!(
                "C {} {} {} {}\n",
                fmt_f64(c.s),
                fmt_complex(c.z),
                fmt_complex(c.w),
                fmt_complex(c.wp)
            ));
        }
        for p in &self.poles {
            out.push_str(&format!(
                "P {} {} {} {}\n",
                fmt_complex(p.p),
                fmt_complex(p.h),
                fmt_f64(p.residual_in),
                fmt_f64(p.residual_out)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Trajectory> {
        let mut origin = Complex64::default();
        let mut direction = Complex64::new(1.0, 0.0);
        let mut span = (0.0, 0.0);
        let mut w0_const = Complex64::default();
        let mut tol = 1e-9;
        let mut checkpoints = Vec::new();
        let mut poles = Vec::new();
        let mut saw_version = false;
        for line in text.lines() {
            let words: Vec<&str> = line.split_whitespace().collect();
            if words.is_empty() {
                continue;
            }
            match words[0] {
                "#" => match words.get(1).copied() {
                    Some("trajectory") => {
                        if words.get(2) != Some(&"v1") {
                            return Err(Error::Format("unsupported trajectory version".into()));
                        }
                        saw_version = true;
                    }
                    Some("origin") => {
                        origin = Complex64::new(parse_f64(words[2])?, parse_f64(words[3])?)
                    }
                    Some("direction") => {
                        direction = Complex64::new(parse_f64(words[2])?, parse_f64(words[3])?)
                    }
                    Some("span") => span = (parse_f64(words[2])?, parse_f64(words[3])?),
                    Some("w0const") => {
                        w0_const = Complex64::new(parse_f64(words[2])?, parse_f64(words[3])?)
                    }
                    Some("tol") => tol = parse_f64(words[2])?,
                    _ => return Err(Error::Format(format!("unknown trajectory header: {line}"))),
                },
                "C" if words.len() == 8 => {
                    let z = Complex64::new(parse_f64(words[2])?, parse_f64(words[3])?);
                    let w = Complex64::new(parse_f64(words[4])?, parse_f64(words[5])?);
                    let wp = Complex64::new(parse_f64(words[6])?, parse_f64(words[7])?);
                    checkpoints.push(Checkpoint {
                        s: parse_f64(words[1])?,
                        z,
                        w,
                        wp,
                        v: Complex64::default(),
                        w_ref: first_integral(z, w, wp),
                    });
                }
                "P" if words.len() == 7 => {
                    poles.push(PoleRecord {
                        p: Complex64::new(parse_f64(words[1])?, parse_f64(words[2])?),
                        h: Complex64::new(parse_f64(words[3])?, parse_f64(words[4])?),
                        residual_in: parse_f64(words[5])?,
                        residual_out: parse_f64(words[6])?,
                    });
                }
                _ => return Err(Error::Format(format!("bad trajectory record: {line}"))),
            }
        }
        if !saw_version {
            return Err(Error::Format("missing trajectory version header".into()));
        }
        Ok(Trajectory { origin, direction, span, checkpoints, poles, w0_const, tol })
    }
}

/// A zero of w found near the ray, with the spherical-derivative ratio
/// against |q|^{3/4}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub q: Complex64,
    pub w_sharp: f64,
    pub ratio: f64,
}

/// Locate zeros of w near the ray (local minima of |w| along checkpoints,
/// polished by Newton steps realized as short ODE hops) and report
/// w^#(q) / |q|^{3/4} for each.
pub fn zero_sphericality_probe(traj: &Trajectory, tol: f64) -> Result<Vec<ZeroRecord>> {
    let cks = &traj.checkpoints;
    let mut out = Vec::new();
    for i in 1..cks.len().saturating_sub(1) {
        let (a, b, c) = (&cks[i - 1], &cks[i], &cks[i + 1]);
        if !(b.w.norm() < a.w.norm() && b.w.norm() < c.w.norm() && b.w.norm() < 0.8) {
            continue;
        }
        // Newton toward the zero, each step continued along a straight hop
        let mut z = b.z;
        let mut w = b.w;
        let mut wp = b.wp;
        let mut ok = false;
        for _ in 0..30 {
            if w.norm() < 1e-10 {
                ok = true;
                break;
            }
            let mut step = -w / wp;
            let cap = 0.5 * z.norm().max(1.0).powf(-0.25);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            let hop = continue_plain(z, step / step.norm(), step.norm(), (w, wp), tol)?;
            z += step;
            w = hop.0;
            wp = hop.1;
        }
        if !ok {
            continue;
        }
        let sharp = wp.norm() / (1.0 + w.norm_sqr());
        let ratio = sharp / z.norm().powf(0.75);
        out.push(ZeroRecord { q: z, w_sharp: sharp, ratio });
    }
    // dedupe zeros found from adjacent checkpoints
    out.sort_by(|a, b| a.q.norm().partial_cmp(&b.q.norm()).unwrap());
    out.dedup_by(|a, b| (a.q - b.q).norm() < 1e-6 * a.q.norm().max(1.0));
    Ok(out)
}

/// A Painlevé solution as a shareable evaluator: jets anywhere near a traced
/// ray by deterministic continuation from the nearest ray checkpoint, with
/// w'' = z + 6w² supplying the exact second derivative.
pub struct PainleveSolution {
    pub init: PInitialData,
    pub trajectory: Trajectory,
    pub tol: f64,
}

impl PainleveSolution {
    pub fn trace(init: PInitialData, direction: Complex64, r_max: f64, tol: f64) -> Result<Self> {
        let trajectory = integrate_ray(&init, direction, r_max, tol)?;
        Ok(PainleveSolution { init, trajectory, tol })
    }

    /// (w, w') at ζ by continuation from the nearest ray anchor. Points
    /// inside a recorded pole guard are answered from the Laurent seed.
    pub fn state_at(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        for p in &self.trajectory.poles {
            if (zeta - p.p).norm() < pole_guard(p.p) {
                let seed = laurent_seed(p.p, p.h, 10)?;
                return Ok(seed.eval(zeta - p.p));
            }
        }
        let anchor = self
            .trajectory
            .nearest_checkpoint(zeta)
            .ok_or(Error::EmptySet("checkpoint"))?;
        let offset = zeta - anchor.z;
        if offset.norm() < 1e-14 {
            return Ok((anchor.w, anchor.wp));
        }
        let trace = continue_segment(
            anchor.z,
            offset / offset.norm(),
            offset.norm(),
            (anchor.w, anchor.wp),
            self.tol,
            false,
        )?;
        Ok((trace.end_state.w, trace.end_state.wp))
    }

    /// Pole-aware jet at ζ; the second derivative is exact from the ODE.
    pub fn jet(&self, zeta: Complex64) -> Result<Jet> {
        let (w, wp) = self.state_at(zeta)?;
        let wpp = zeta + 6.0 * w * w;
        Ok(Jet::direct(zeta, w, wp, wpp).normalized())
    }

    /// Wrap as a catalog map (claimed class (1/2, 1/4)); evaluation failures
    /// surface as non-finite jets, which the measurement engines skip.
    pub fn as_map(self: &std::sync::Arc<Self>, name: &str) -> MeromorphicMap {
        let me = self.clone();
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let third = self.clone();
        let mut m = MeromorphicMap::new(
            name,
            std::sync::Arc::new(move |z: Complex64| {
                me.jet(z).unwrap_or_else(|_| Jet::direct(z, nan, nan, nan))
            }),
        )
        .with_class(0.5, 0.25, false);
        m = m.with_third_derivative(std::sync::Arc::new(move |z: Complex64| {
            // w''' = 1 + 12 w w'
            match third.state_at(z) {
                Ok((w, wp)) => 1.0 + 12.0 * w * wp,
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        }));
        m
    }

    /// The first integral W as an evaluator along the ray, claimed class
    /// (1/4, 1/4): W = z w + 2w³ - w'²/2, meromorphic with simple poles at
    /// the poles of w.
    pub fn first_integral_map(self: &std::sync::Arc<Self>, name: &str) -> MeromorphicMap {
        let me = self.clone();
        let nan = Complex64::new(f64::NAN, f64::NAN);
        MeromorphicMap::new(
            name,
            std::sync::Arc::new(move |z: Complex64| match me.state_at(z) {
                Ok((w, wp)) => {
                    let val = first_integral(z, w, wp);
                    // W' = w, W'' = w'
                    Jet::direct(z, val, w, wp).normalized()
                }
                Err(_) => Jet::direct(z, nan, nan, nan),
            }),
        )
        .with_class(0.25, 0.25, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn short_ray() -> Trajectory {
        let init = PInitialData { z0: c(0.0, 0.0), w0: c(0.0, 0.0), w0p: c(0.0, 0.0) };
        integrate_ray(&init, c(1.0, 0.0), 30.0, 1e-9).unwrap()
    }

    #[test]
    fn ray_meets_poles_and_checkpoints_stay_bounded() {
        let traj = short_ray();
        assert!(traj.poles.len() >= 3, "expected several poles, got {}", traj.poles.len());
        assert!(traj.checkpoints.len() > 200);
        for ck in &traj.checkpoints {
            assert!(ck.w.norm() <= 1e3, "checkpoint above blow-up threshold");
        }
        for w in traj.checkpoints.windows(2) {
            assert!(w[1].s > w[0].s, "checkpoints must be strictly ordered");
        }
        // no checkpoint inside a guard disc
        for p in &traj.poles {
            let g = pole_guard(p.p);
            for ck in &traj.checkpoints {
                assert!((ck.z - p.p).norm() >= g * 0.999);
            }
            assert!(p.residual_in < 1e-5, "fit residual {}", p.residual_in);
        }
    }

    #[test]
    fn first_integral_drift_is_tiny_on_pole_free_arcs() {
        let traj = short_ray();
        assert!(traj.first_integral_drift() < 1e-6, "drift {}", traj.first_integral_drift());
    }

    #[test]
    fn reintegration_from_a_checkpoint_is_consistent() {
        let traj = short_ray();
        // pick a checkpoint in the middle of a pole-free arc
        let tol = traj.tol;
        let mid = traj
            .checkpoints
            .iter()
            .find(|ck| {
                ck.s > 2.0
                    && traj.poles.iter().all(|p| (ck.z - p.p).norm() > 6.0 * pole_guard(p.p))
            })
            .unwrap();
        // find a later checkpoint on the same arc
        let later = traj
            .checkpoints
            .iter()
            .find(|ck| ck.s > mid.s + 0.05 && ck.s < mid.s + 0.2)
            .unwrap();
        let hop = continue_segment(
            mid.z,
            traj.direction,
            later.s - mid.s,
            (mid.w, mid.wp),
            tol,
            false,
        )
        .unwrap();
        let rel = (hop.end_state.w - later.w).norm() / later.w.norm().max(1.0);
        assert!(rel < 10.0 * tol / 1e-9 * 1e-6, "reintegration mismatch {rel}");
    }

    #[test]
    fn backward_round_trip_through_a_pole() {
        let traj = short_ray();
        let tol = traj.tol;
        let pole = traj.poles[1];
        let g = pole_guard(pole.p);
        // entry checkpoint: last one before the pole, outside 2 guards
        let s_p = ((pole.p - traj.origin) * traj.direction.conj()).re;
        let entry = traj
            .checkpoints
            .iter()
            .filter(|ck| ck.s < s_p && (ck.z - pole.p).norm() > 2.0 * g)
            .next_back()
            .unwrap();
        let exit = traj
            .checkpoints
            .iter()
            .find(|ck| ck.s > s_p && (ck.z - pole.p).norm() > 2.0 * g)
            .unwrap();
        // integrate backward from the exit checkpoint across the pole
        let back = continue_segment(
            exit.z,
            -traj.direction,
            exit.s - entry.s,
            (exit.w, exit.wp),
            tol,
            false,
        )
        .unwrap();
        assert_eq!(back.poles.len(), 1, "backward pass should meet the pole once");
        let rel = (back.end_state.w - entry.w).norm() / entry.w.norm().max(1.0);
        assert!(rel < 1e-5, "round trip mismatch {rel}");
        let relp = (back.end_state.wp - entry.wp).norm() / entry.wp.norm().max(1.0);
        assert!(relp < 1e-5, "round trip w' mismatch {relp}");
        // the backward fit recovers the same pole
        assert!((back.poles[0].p - pole.p).norm() < 1e-6 * pole.p.norm().max(1.0));
    }

    #[test]
    fn zero_probe_finds_real_zeros_with_sane_ratios() {
        let traj = short_ray();
        let zeros = zero_sphericality_probe(&traj, 1e-9).unwrap();
        assert!(!zeros.is_empty(), "the real ray of this solution oscillates through zero");
        for z in &zeros {
            assert!(z.w_sharp > 0.0);
            assert!(z.ratio.is_finite());
            // real initial data on the real axis: zeros stay real
            assert!(z.q.im.abs() < 1e-6, "zero {} drifted off the axis", z.q);
        }
    }

    #[test]
    fn probe_reports_empty_for_pole_free_constant_like_arcs() {
        // a trajectory whose |w| never dips: start huge and watch the short
        // arc before the first pole
        let init = PInitialData { z0: c(0.0, 0.0), w0: c(40.0, 0.0), w0p: c(0.0, 0.0) };
        let traj = integrate_ray(&init, c(1.0, 0.0), 1.2, 1e-9).unwrap();
        let zeros = zero_sphericality_probe(&traj, 1e-9).unwrap();
        assert!(zeros.is_empty());
    }

    #[test]
    fn first_integral_map_has_claimed_class_and_w_prime_equals_w() {
        let init = PInitialData { z0: c(0.0, 0.0), w0: c(0.0, 0.0), w0p: c(0.0, 0.0) };
        let sol =
            std::sync::Arc::new(PainleveSolution::trace(init, c(1.0, 0.0), 6.0, 1e-9).unwrap());
        let wmap = sol.first_integral_map("w-integral");
        let cl = wmap.claimed_class().unwrap().params;
        assert_eq!((cl.alpha, cl.beta), (0.25, 0.25));
        // W' = w by finite differences at a few checkpoints
        for ck in sol.trajectory.checkpoints.iter().step_by(200) {
            if ck.w.norm() > 5.0 || ck.s < 0.1 {
                continue;
            }
            let h = 1e-5;
            let a = wmap.jet(ck.z + h).to_direct().unwrap().f0;
            let b = wmap.jet(ck.z - h).to_direct().unwrap().f0;
            let fd = (a - b) / (2.0 * h);
            assert!(
                (fd - ck.w).norm() <= 1e-5 * ck.w.norm().max(1.0),
                "W' = {fd} vs w = {}",
                ck.w
            );
        }
    }

    #[test]
    fn trajectory_text_round_trip() {
        let traj = short_ray();
        let text = traj.to_text();
        let back = Trajectory::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.checkpoints.len(), traj.checkpoints.len());
        assert_eq!(back.poles.len(), traj.poles.len());
    }

    #[test]
    fn evaluation_off_the_ray_matches_direct_integration() {
        let init = PInitialData { z0: c(0.0, 0.0), w0: c(0.0, 0.0), w0p: c(0.0, 0.0) };
        let sol =
            std::sync::Arc::new(PainleveSolution::trace(init, c(1.0, 0.0), 8.0, 1e-10).unwrap());
        // target off the ray: continue from origin directly vs via anchor
        let target = c(3.1, 0.4);
        let via_anchor = sol.state_at(target).unwrap();
        let direct = continue_segment(
            c(0.0, 0.0),
            target / target.norm(),
            target.norm(),
            (c(0.0, 0.0), c(0.0, 0.0)),
            1e-10,
            false,
        )
        .unwrap();
        let rel = (via_anchor.0 - direct.end_state.w).norm() / direct.end_state.w.norm().max(1.0);
        assert!(rel < 1e-6, "path independence violated: {rel}");
    }
}
