//! Embedded Dormand-Prince 5(4) stepper for the second-order complex ODE
//! w'' = z + 6w², integrated along straight segments z(t) = z_a + t·e and
//! augmented with the running integral V' = w (used by the first-integral
//! drift diagnostics).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PState {
    pub w: Complex64,
    pub wp: Complex64,
    /// accumulated ∫ w dz along the path
    pub v: Complex64,
}

impl PState {
    fn axpy(&self, h: f64, k: &PState) -> PState {
        PState { w: self.w + h * k.w, wp: self.wp + h * k.wp, v: self.v + h * k.v }
    }
}

/// Right-hand side mode: the true equation follows z along the segment; the
/// frozen variant fixes z for integrator harness checks (its first integral
/// is then conserved exactly).
#[derive(Debug, Clone, Copy)]
pub enum ZMode {
    Moving,
    Frozen(Complex64),
}

pub struct Segment {
    pub start: Complex64,
    pub dir: Complex64, // unit
    pub len: f64,
    pub mode: ZMode,
}

impl Segment {
    pub fn z_at(&self, t: f64) -> Complex64 {
        self.start + self.dir * t
    }

    fn rhs(&self, t: f64, y: &PState) -> PState {
        let z = match self.mode {
            ZMode::Moving => self.z_at(t),
            ZMode::Frozen(zc) => zc,
        };
        PState {
            w: y.wp * self.dir,
            wp: (z + 6.0 * y.w * y.w) * self.dir,
            v: y.w * self.dir,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub struct StepOutcome {
    pub y: PState,
    pub err: f64,
    /// largest |w| seen at any stage: blow-up sentinel for the pole logic
    pub max_w: f64,
}

/// One trial step of size h from (t, y).
pub fn dopri_step(seg: &Segment, t: f64, y: &PState, h: f64, tol: f64) -> StepOutcome {
    let mut k = [PState { w: y.w, wp: y.wp, v: y.v }; 7];
    let mut max_w = y.w.norm();
    k[0] = seg.rhs(t, y);
    for i in 1..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            let a = A[i][j];
            if a != 0.0 {
                yi = yi.axpy(h * a, kj);
            }
        }
        max_w = max_w.max(yi.w.norm());
        k[i] = seg.rhs(t + C[i] * h, &yi);
    }
    let mut y5 = *y;
    let mut y4 = *y;
    for i in 0..7 {
        if B5[i] != 0.0 {
            y5 = y5.axpy(h * B5[i], &k[i]);
        }
        if B4[i] != 0.0 {
            y4 = y4.axpy(h * B4[i], &k[i]);
        }
    }
    max_w = max_w.max(y5.w.norm());
    // weighted rms error over (w, w')
    let scale_w = tol + tol * y.w.norm().max(y5.w.norm());
    let scale_p = tol + tol * y.wp.norm().max(y5.wp.norm());
    let ew = (y5.w - y4.w).norm() / scale_w;
    let ep = (y5.wp - y4.wp).norm() / scale_p;
    StepOutcome { y: y5, err: (0.5 * (ew * ew + ep * ep)).sqrt(), max_w }
}

pub enum DriveResult {
    /// reached the end of the segment
    Done { y: PState, t: f64 },
    /// |w| crossed the blow-up threshold near t
    BlowUp { t: f64 },
    /// step size underflow
    Stiff { t: f64 },
}

/// Drive the stepper along a segment, invoking `on_accept(t, y)` after every
/// accepted step. Near a growing |w| the step is capped to a fraction of the
/// local pole distance |w|^{-1/2}, so the acceptance buffer always carries
/// enough points for the pole fit.
pub fn drive(
    seg: &Segment,
    mut y: PState,
    t_from: f64,
    tol: f64,
    blow_up: f64,
    mut on_accept: impl FnMut(f64, &PState),
    h_init: Option<f64>,
) -> DriveResult {
    let mut t = t_from;
    let mut h: f64 = h_init.unwrap_or(1e-3 * (seg.len - t_from).abs().max(1e-6)).min(0.25);
    let t_end = seg.len;
    let mut steps = 0usize;
    while t < t_end {
        if y.w.norm() > blow_up {
            return DriveResult::BlowUp { t };
        }
        h = h.min(t_end - t).max(1e-300);
        // keep resolution near an approaching pole
        let wn = y.w.norm();
        if wn > 25.0 {
            h = h.min(0.25 / wn.sqrt());
        }
        if h < 1e-13 * t_end.max(1.0) {
            return DriveResult::Stiff { t };
        }
        let out = dopri_step(seg, t, &y, h, tol);
        if out.max_w > blow_up {
            // do not accept a step that jumps deep into the pole; once the
            // step cannot shrink usefully, hand over to the pole logic
            if h > 1e-9 * t_end.max(1.0) {
                h *= 0.25;
                continue;
            }
            return DriveResult::BlowUp { t };
        }
        if out.err <= 1.0 {
            t += h;
            y = out.y;
            on_accept(t, &y);
            let grow = (0.9 * out.err.powf(-0.2)).min(4.0);
            h *= grow.max(0.2);
        } else {
            h *= (0.9 * out.err.powf(-0.2)).max(0.1);
        }
        steps += 1;
        if steps > 50_000_000 {
            return DriveResult::Stiff { t };
        }
    }
    DriveResult::Done { y, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frozen_rhs_conserves_its_first_integral() {
        // w'' = z_c + 6w² with z frozen: Ŵ = z_c w + 2w³ - w'²/2 is exact
        let zc = Complex64::new(0.4, 0.1);
        let seg = Segment {
            start: Complex64::new(0.0, 0.0),
            dir: Complex64::new(1.0, 0.0),
            len: 1.5,
            mode: ZMode::Frozen(zc),
        };
        let y0 = PState {
            w: Complex64::new(0.3, -0.1),
            wp: Complex64::new(0.2, 0.05),
            v: Complex64::default(),
        };
        let w_hat = |y: &PState, _z: Complex64| zc * y.w + 2.0 * y.w * y.w * y.w - y.wp * y.wp / 2.0;
        let h0 = w_hat(&y0, zc);
        let mut worst: f64 = 0.0;
        let res = drive(
            &seg,
            y0,
            0.0,
            1e-11,
            1e3,
            |_t, y| {
                let d = (w_hat(y, zc) - h0).norm();
                worst = worst.max(d);
            },
            None,
        );
        assert!(matches!(res, DriveResult::Done { .. }));
        assert!(worst < 1e-8, "first-integral drift {worst}");
    }

    #[test]
    fn small_solution_matches_perturbation_series() {
        // w'' = z + 6w² from tiny data: w = t³/6 + t⁸/336 + O(t¹³) (second
        // term from feeding w₁ = t³/6 back through 6w²)
        let seg = Segment {
            start: Complex64::default(),
            dir: Complex64::new(1.0, 0.0),
            len: 0.2,
            mode: ZMode::Moving,
        };
        let y0 = PState {
            w: Complex64::new(1e-6, 0.0),
            wp: Complex64::default(),
            v: Complex64::default(),
        };
        if let DriveResult::Done { y, .. } = drive(&seg, y0, 0.0, 1e-12, 1e3, |_, _| {}, None) {
            let t: f64 = 0.2;
            let expect = 1e-6 + t.powi(3) / 6.0 + t.powi(8) / 336.0;
            assert_relative_eq!(y.w.re, expect, max_relative = 1e-7);
        } else {
            panic!("expected completion");
        }
    }
}
