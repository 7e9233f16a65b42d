//! Adaptive Gauss-Legendre quadrature for vector-valued integrands, plus the
//! circle sweep used by the proximity functions. Panels are bisected until
//! the two-half refinement changes a panel's contribution by less than its
//! share of the tolerance; integrable logarithmic spikes (near-pole arcs)
//! just drive local refinement.

use num_complex::Complex64;

/// Nodes and weights of n-point Gauss-Legendre on [-1, 1], generated by
/// Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

thread_local! {
    static GL15: (Vec<f64>, Vec<f64>) = gauss_legendre(15);
}

fn gl15_panel<const K: usize>(f: &mut impl FnMut(f64) -> [f64; K], a: f64, b: f64) -> [f64; K] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL15.with(|(nodes, weights)| {
        let mut acc = [0.0; K];
        for (&x, &w) in nodes.iter().zip(weights.iter()) {
            let v = f(c + h * x);
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        for a in acc.iter_mut() {
            *a *= h;
        }
        acc
    })
}

/// Outcome of an adaptive integration: component values plus bookkeeping on
/// how hard the refinement had to work.
#[derive(Debug, Clone)]
pub struct QuadResult<const K: usize> {
    pub values: [f64; K],
    pub panels: usize,
    pub converged: bool,
}

/// Adaptively integrate a vector-valued integrand over [a, b]. `tol` is an
/// absolute tolerance on each component.
pub fn adaptive_gl<const K: usize>(
    mut f: impl FnMut(f64) -> [f64; K],
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> QuadResult<K> {
    // worklist of (a, b, coarse estimate, depth)
    let coarse = gl15_panel(&mut f, a, b);
    let mut stack = vec![(a, b, coarse, 0usize)];
    let mut total = [0.0; K];
    let mut panels = 0usize;
    let mut converged = true;
    let span = b - a;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        panels += 1;
        let mid = 0.5 * (lo + hi);
        let left = gl15_panel(&mut f, lo, mid);
        let right = gl15_panel(&mut f, mid, hi);
        let mut err = 0.0f64;
        for k in 0..K {
            err = err.max((left[k] + right[k] - est[k]).abs());
        }
        // share of the global tolerance proportional to panel width
        let local_tol = tol * ((hi - lo) / span).max(1e-3);
        if err <= local_tol || depth >= 48 || panels >= max_panels {
            if err > local_tol {
                converged = false;
            }
            for k in 0..K {
                total[k] += left[k] + right[k];
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    QuadResult { values: total, panels, converged }
}

/// Adaptive integral of a complex-valued integrand over [a, b]; re/im are
/// treated as a 2-vector.
pub fn adaptive_gl_complex(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> (Complex64, bool) {
    let r = adaptive_gl(|t| { let v = f(t); [v.re, v.im] }, a, b, tol, max_panels);
    (Complex64::new(r.values[0], r.values[1]), r.converged)
}

/// Mean over the circle |z| = r of a vector-valued function of θ, i.e.
/// (1/2π) ∫ f(θ) dθ with adaptive panels. Initial panels split the circle so
/// features localized in θ are found before refinement starts.
pub fn circle_mean<const K: usize>(
    mut f: impl FnMut(f64) -> [f64; K],
    tol: f64,
    init_panels: usize,
    max_panels: usize,
) -> QuadResult<K> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let n = init_panels.max(4);
    let mut total = [0.0; K];
    let mut panels = 0;
    let mut converged = true;
    for i in 0..n {
        let a = two_pi * i as f64 / n as f64;
        let b = two_pi * (i + 1) as f64 / n as f64;
        let r = adaptive_gl(&mut f, a, b, tol * two_pi / n as f64, max_panels / n);
        for k in 0..K {
            total[k] += r.values[k];
        }
        panels += r.panels;
        converged &= r.converged;
    }
    for t in total.iter_mut() {
        *t /= two_pi;
    }
    QuadResult { values: total, panels, converged }
}
