//! Local Laurent expansion of a first Painlevé transcendent at a double
//! pole: w = u^{-2} + Σ_{k≥2} a_k u^k with u = z - p. Substituting into
//! w'' = z + 6w² forces a_0 = a_1 = 0, a_2 = -p/10, a_3 = -1/6, leaves a_4
//! free (the second integration constant), and fixes everything above it by
//! a quadratic recurrence.

use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients a_k stored for k = -2..=order (index shift +2); a_{-2} = 1.
#[derive(Debug, Clone)]
pub struct LaurentSeed {
    pub pole: Complex64,
    pub h: Complex64,
    /// coeffs[i] = a_{i-2}
    pub coeffs: Vec<Complex64>,
}

/// Build the expansion through u^order (4 <= order <= 12).
/// Recurrence for j >= 3:
/// a_{j+2} = 6 Σ_{m=2}^{j-2} a_m a_{j-m} / ((j+5)(j-2)).
pub fn laurent_seed(p: Complex64, h: Complex64, order: usize) -> Result<LaurentSeed> {
    if !(4..=12).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    let mut a = vec![Complex64::default(); order + 3]; // indices -2..=order
    a[0] = Complex64::new(1.0, 0.0); // a_{-2}
    a[2 + 2] = -p / 10.0; // a_2
    a[3 + 2] = Complex64::new(-1.0 / 6.0, 0.0); // a_3
    a[4 + 2] = h; // a_4 free
    for j in 3..=(order as i64 - 2) {
        let mut s = Complex64::default();
        for m in 2..=(j - 2) {
            s += a[(m + 2) as usize] * a[(j - m + 2) as usize];
        }
        a[(j + 4) as usize] = 6.0 * s / ((j + 5) as f64 * (j - 2) as f64);
    }
    Ok(LaurentSeed { pole: p, h, coeffs: a })
}

impl LaurentSeed {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 3
    }

    /// (w, w') at z = pole + u.
    pub fn eval(&self, u: Complex64) -> (Complex64, Complex64) {
        // ascending part by Horner, pole part explicitly
        let mut w = Complex64::default();
        let mut wp = Complex64::default();
        for i in (2..self.coeffs.len()).rev() {
            let k = i as f64 - 2.0;
            w = w * u + self.coeffs[i];
            wp = wp * u + self.coeffs[i] * k;
        }
        // at this point w = Σ_{k>=0} a_k u^k evaluated—but we iterated down
        // to index 2 (a_0). Multiply in the remaining powers and pole terms.
        let inv = u.inv();
        let w_full = w + inv * inv;
        let wp_full = wp / u - 2.0 * inv * inv * inv;
        (w_full, wp_full)
    }

    /// Residual coefficients of w'' - z - 6w² as a truncated series; all
    /// should vanish through the truncation order.
    pub fn substitution_residual(&self) -> Vec<Complex64> {
        let a = &self.coeffs; // a[i] = coefficient of u^{i-2}
        let n = a.len();
        // w² as a convolution: (w²)[j] = Σ a_m a_{j-m}, index shift by 4
        let mut sq = vec![Complex64::default(); 2 * n - 1]; // index i ~ power i-4
        for i in 0..n {
            for j in 0..n {
                sq[i + j] += a[i] * a[j];
            }
        }
        // w'' coefficient of u^{k-2}: (k)(k-1) a_k u^{k-2} -> power (i-2)-2
        // residual powers from -4 through order-2 stay fully determined
        let order = self.order() as i64;
        let mut out = Vec::new();
        for power in -4..=(order - 2) {
            // w'' contribution: coefficient of u^power is (p+2)(p+1) a_{power+2}
            let k = power + 2;
            let wpp = if (-2..=order).contains(&k) {
                (k as f64) * (k as f64 - 1.0) * a[(k + 2) as usize]
            } else {
                0.0.into()
            };
            let six_w2 = if (0..(2 * n as i64 - 1)).contains(&(power + 4)) {
                6.0 * sq[(power + 4) as usize]
            } else {
                0.0.into()
            };
            let z_term = match power {
                0 => self.pole,
                1 => Complex64::new(1.0, 0.0),
                _ => Complex64::default(),
            };
            out.push(wpp - six_w2 - z_term);
        }
        out
    }
}
