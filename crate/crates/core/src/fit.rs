//! Growth-model regression: power-law, logarithmic, and log-squared fits of
//! per-radius quantities, used to estimate growth exponents.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthModel {
    /// X ≈ C r^e, fitted by least squares on (log r, log X).
    Power,
    /// X ≈ a log r + b.
    Log,
    /// X ≈ a (log r)^2 + b log r + c.
    LogSquared,
}

/// A fitted growth law. `exponent` is the power-law exponent or the leading
/// log/log² coefficient; `residual_rms` is measured in the original X space
/// so fits of different models are comparable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderFit {
    pub model: GrowthModel,
    pub exponent: f64,
    pub intercept: f64,
    pub quadratic: Option<f64>,
    pub residual_rms: f64,
    pub r_range: (f64, f64),
}

impl OrderFit {
    pub fn predict(&self, r: f64) -> f64 {
        let l = r.ln();
        match self.model {
            GrowthModel::Power => (self.intercept + self.exponent * l).exp(),
            GrowthModel::Log => self.exponent * l + self.intercept,
            GrowthModel::LogSquared => {
                self.exponent * l * l + self.quadratic.unwrap_or(0.0) * l + self.intercept
            }
        }
    }
}

fn linear_ls(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Solve the 3x3 normal equations for y ≈ a x^2 + b x + c.
fn quadratic_ls(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let x2 = xi * xi;
        s1 += xi;
        s2 += x2;
        s3 += x2 * xi;
        s4 += x2 * x2;
        t0 += yi;
        t1 += xi * yi;
        t2 += x2 * yi;
    }
    let m = [[s4, s3, s2], [s3, s2, s1], [s2, s1, n]];
    let rhs = [t2, t1, t0];
    solve3(m, rhs)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> (f64, f64, f64) {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in (row + 1)..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    (x[0], x[1], x[2])
}

/// Fit a growth model to (r, X) data. Requires at least 5 rows. Power-law
/// fits skip non-positive X values (they carry no log-log information).
pub fn order_fit(r: &[f64], x: &[f64], model: GrowthModel) -> Result<OrderFit> {
    if r.len() != x.len() || r.len() < 5 {
        return Err(Error::InsufficientRows { need: 5, got: r.len().min(x.len()) });
    }
    let logs: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let fit = match model {
        GrowthModel::Power => {
            let mut lx = Vec::new();
            let mut lr = Vec::new();
            for (&li, &xi) in logs.iter().zip(x) {
                if xi > 0.0 {
                    lr.push(li);
                    lx.push(xi.ln());
                }
            }
            if lr.len() < 5 {
                return Err(Error::InsufficientRows { need: 5, got: lr.len() });
            }
            let (slope, icpt) = linear_ls(&lr, &lx);
            OrderFit {
                model,
                exponent: slope,
                intercept: icpt,
                quadratic: None,
                residual_rms: 0.0,
                r_range: (r[0], *r.last().unwrap()),
            }
        }
        GrowthModel::Log => {
            let (slope, icpt) = linear_ls(&logs, x);
            OrderFit {
                model,
                exponent: slope,
                intercept: icpt,
                quadratic: None,
                residual_rms: 0.0,
                r_range: (r[0], *r.last().unwrap()),
            }
        }
        GrowthModel::LogSquared => {
            let (a, b, c) = quadratic_ls(&logs, x);
            OrderFit {
                model,
                exponent: a,
                intercept: c,
                quadratic: Some(b),
                residual_rms: 0.0,
                r_range: (r[0], *r.last().unwrap()),
            }
        }
    };
    let mut sum = 0.0;
    for (&ri, &xi) in r.iter().zip(x) {
        let d = fit.predict(ri) - xi;
        sum += d * d;
    }
    let rms = (sum / r.len() as f64).sqrt();
    Ok(OrderFit { residual_rms: rms, ..fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_fit_recovers_synthetic_exponent() {
        let r: Vec<f64> = (0..10).map(|k| 2.0 * 1.5f64.powi(k)).collect();
        let x: Vec<f64> = r.iter().map(|v| 3.0 * v.powf(2.5)).collect();
        let fit = order_fit(&r, &x, GrowthModel::Power).unwrap();
        assert_relative_eq!(fit.exponent, 2.5, max_relative = 1e-12);
        assert!(fit.residual_rms / x.last().unwrap() < 1e-10);
    }

    #[test]
    fn log_fit_recovers_coefficients() {
        let r: Vec<f64> = (1..9).map(|k| (k as f64).exp2()).collect();
        let x: Vec<f64> = r.iter().map(|v| 1.2732 * v.ln() + 0.7).collect();
        let fit = order_fit(&r, &x, GrowthModel::Log).unwrap();
        assert_relative_eq!(fit.exponent, 1.2732, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 0.7, max_relative = 1e-10);
    }

    #[test]
    fn log_squared_fit_beats_power_on_quadratic_log_data() {
        let r: Vec<f64> = (1..=5).map(|k| (2.0f64.powi(k)).exp()).collect();
        let x: Vec<f64> = r.iter().map(|v| 0.6 * v.ln() * v.ln() + 0.3 * v.ln() + 1.0).collect();
        let lsq = order_fit(&r, &x, GrowthModel::LogSquared).unwrap();
        let pow = order_fit(&r, &x, GrowthModel::Power).unwrap();
        assert!(lsq.exponent > 0.0);
        assert!(lsq.residual_rms < pow.residual_rms);
    }

    #[test]
    fn too_few_rows_rejected() {
        let r = [1.0, 2.0, 3.0];
        let x = [1.0, 2.0, 3.0];
        assert!(matches!(
            order_fit(&r, &x, GrowthModel::Log),
            Err(Error::InsufficientRows { .. })
        ));
    }
}
