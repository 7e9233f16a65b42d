use num_complex::Complex64;
use yosida_core::painleve::*;

#[test]
fn probe_fit() {
    // synthetic exact data from the seed
    let p = Complex64::new(5.83, 0.0);
    let h = Complex64::new(-0.21, 0.13);
    let seed = laurent_seed(p, h, 12).unwrap();
    let mut buf = Vec::new();
    for k in 0..10 {
        let u = -0.19 + 0.017 * k as f64; // approach from the left
        let (w, _) = seed.eval(Complex64::new(u, 0.0));
        buf.push((p + u, w));
    }
    // call through integrate path? fit_pole is private; replicate via continue_segment:
    // instead integrate toward the pole and look at recorded residuals
    let init = PInitialData { z0: Complex64::new(0.0,0.0), w0: Complex64::new(0.0,0.0), w0p: Complex64::new(0.0,0.0) };
    match integrate_ray(&init, Complex64::new(1.0, 0.0), 30.0, 1e-9) {
        Ok(traj) => {
            for pr in &traj.poles { println!("pole {} h {} res_in {:.2e} res_out {:.2e}", pr.p, pr.h, pr.residual_in, pr.residual_out); }
        }
        Err(e) => println!("error: {e}"),
    }
}
