//! Argument-principle contour integrals: winding numbers and the first few
//! zero/pole moments over a region boundary, by composite Gauss-Legendre per
//! edge with adaptive bisection. Refinement is driven by the panel
//! convergence test together with the distance of the winding estimate from
//! an integer; contours that keep straddling a special point are jittered
//! outward and retried.

use num_complex::Complex64;

use crate::catalog::MeromorphicMap;
use crate::quad::adaptive_gl;
use crate::util::fnv1a;
use crate::{Error, Result};

use super::Region;

/// Normalized contour moments of f'/f over a region boundary:
/// `moment[k] = (1/2πi) ∮ (f'/f) ((z-c)/s)^k dz` with c the region center and
/// s its half-diagonal. moment[0] is the winding number Z - P.
#[derive(Debug, Clone)]
pub struct ContourMoments {
    pub winding: i64,
    pub moments: [Complex64; 4],
    /// distance of the raw moment 0 from the rounded integer
    pub integer_distance: f64,
    pub converged: bool,
    /// the (possibly jittered) region the moments were computed over
    pub region: Region,
}

impl ContourMoments {
    /// Centroid estimate (Σ roots - Σ poles)/W mapped back to the plane,
    /// meaningful when the cell holds a single location.
    pub fn centroid(&self, center: Complex64, scale: f64) -> Option<Complex64> {
        if self.winding == 0 {
            return None;
        }
        Some(center + self.moments[1] * scale / self.winding as f64)
    }

    /// How far the moments are from describing a single location of
    /// multiplicity |winding| (0 = perfectly consistent).
    pub fn single_location_defect(&self) -> f64 {
        if self.winding == 0 {
            return f64::INFINITY;
        }
        let w = self.winding as f64;
        let z0 = self.moments[1] / w;
        let d2 = (self.moments[2] - w * z0 * z0).norm();
        let d3 = (self.moments[3] - w * z0 * z0 * z0).norm();
        d2.max(d3)
    }
}

fn edge_integral(
    f: &MeromorphicMap,
    center: Complex64,
    scale: f64,
    start: Complex64,
    end: Complex64,
    quad_tol: f64,
) -> ([Complex64; 4], bool) {
    let dz = end - start;
    let out = adaptive_gl(
        |t: f64| {
            let z = start + dz * t;
            let ld = f.log_derivative(z);
            let w = (z - center) / scale;
            let base = ld * dz;
            let m0 = base;
            let m1 = base * w;
            let m2 = m1 * w;
            let m3 = m2 * w;
            [m0.re, m0.im, m1.re, m1.im, m2.re, m2.im, m3.re, m3.im]
        },
        0.0,
        1.0,
        quad_tol,
        20_000,
    );
    let v = out.values;
    (
        [
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        ],
        out.converged,
    )
}

fn arc_integral(
    f: &MeromorphicMap,
    center: Complex64,
    scale: f64,
    radius: f64,
    t_from: f64,
    t_to: f64,
    quad_tol: f64,
) -> ([Complex64; 4], bool) {
    let out = adaptive_gl(
        |t: f64| {
            let z = Complex64::from_polar(radius, t);
            let dz = Complex64::new(0.0, 1.0) * z; // dz/dθ
            let ld = f.log_derivative(z);
            let w = (z - center) / scale;
            let base = ld * dz;
            let m0 = base;
            let m1 = base * w;
            let m2 = m1 * w;
            let m3 = m2 * w;
            [m0.re, m0.im, m1.re, m1.im, m2.re, m2.im, m3.re, m3.im]
        },
        t_from,
        t_to,
        quad_tol,
        40_000,
    );
    let v = out.values;
    (
        [
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        ],
        out.converged,
    )
}

/// One pass of the boundary integral without jitter.
pub fn contour_moments_raw(
    f: &MeromorphicMap,
    region: &Region,
    quad_tol: f64,
) -> ContourMoments {
    let (center, hw, hh) = region.bounding_rect();
    let scale = (hw * hw + hh * hh).sqrt();
    let mut acc = [Complex64::default(); 4];
    let mut converged = true;
    let mut add = |part: ([Complex64; 4], bool)| {
        for k in 0..4 {
            acc[k] += part.0[k];
        }
        converged &= part.1;
    };
    match *region {
        Region::Rect { center: c, half_width, half_height } => {
            let corners = [
                c + Complex64::new(-half_width, -half_height),
                c + Complex64::new(half_width, -half_height),
                c + Complex64::new(half_width, half_height),
                c + Complex64::new(-half_width, half_height),
            ];
            for i in 0..4 {
                add(edge_integral(f, center, scale, corners[i], corners[(i + 1) % 4], quad_tol));
            }
        }
        Region::AnnulusSector { r1, r2, theta1, theta2 } => {
            let full = (theta2 - theta1 - 2.0 * std::f64::consts::PI).abs() < 1e-12;
            add(arc_integral(f, center, scale, r2, theta1, theta2, quad_tol));
            if !full {
                let a = Complex64::from_polar(r2, theta2);
                let b = Complex64::from_polar(r1.max(0.0), theta2);
                add(edge_integral(f, center, scale, a, b, quad_tol));
            }
            if r1 > 0.0 {
                add(arc_integral(f, center, scale, r1, theta2, theta1, quad_tol));
            }
            if !full {
                let a = Complex64::from_polar(r1.max(0.0), theta1);
                let b = Complex64::from_polar(r2, theta1);
                add(edge_integral(f, center, scale, a, b, quad_tol));
            }
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut moments = [Complex64::default(); 4];
    for k in 0..4 {
        moments[k] = acc[k] / two_pi_i;
    }
    let winding = moments[0].re.round();
    let integer_distance = (moments[0] - winding).norm();
    ContourMoments {
        winding: winding as i64,
        moments,
        integer_distance,
        converged,
        region: region.clone(),
    }
}

/// Deterministic jitter: expand the region and nudge its center by a small
/// hash-derived offset, so reruns are reproducible.
fn jittered(region: &Region, attempt: u32) -> Region {
    if attempt == 0 {
        return region.clone();
    }
    let k = attempt as f64;
    match *region {
        Region::Rect { center, half_width, half_height } => {
            let bits = fnv1a(&[
                center.re.to_bits().to_le_bytes(),
                center.im.to_bits().to_le_bytes(),
                (attempt as u64).to_le_bytes(),
            ]
            .concat());
            let ux = ((bits & 0xffff) as f64 / 65535.0 - 0.5) * 0.02;
            let uy = (((bits >> 16) & 0xffff) as f64 / 65535.0 - 0.5) * 0.02;
            let grow = 1.0 + 0.021 * k;
            Region::Rect {
                center: center + Complex64::new(ux * half_width, uy * half_height),
                half_width: half_width * grow,
                half_height: half_height * grow,
            }
        }
        Region::AnnulusSector { r1, r2, theta1, theta2 } => Region::AnnulusSector {
            r1: (r1 * (1.0 - 0.013 * k)).max(0.0),
            r2: r2 * (1.0 + 0.013 * k),
            theta1,
            theta2,
        },
    }
}

/// Contour moments with jitter-and-retry when the winding refuses to snap to
/// an integer (contour passing через a zero or pole).
pub fn contour_moments(
    f: &MeromorphicMap,
    region: &Region,
    quad_tol: f64,
) -> Result<ContourMoments> {
    let attempts = 5;
    let mut fallback: Option<ContourMoments> = None;
    for attempt in 0..attempts {
        let r = jittered(region, attempt);
        let m = contour_moments_raw(f, &r, quad_tol);
        if m.integer_distance <= 0.02 && m.converged && m.moments[0].re.is_finite() {
            return Ok(m);
        }
        if m.integer_distance <= 0.1 && m.moments[0].re.is_finite() && fallback.is_none() {
            fallback = Some(m);
        }
    }
    fallback.ok_or(Error::ContourThroughSingularity(attempts as usize))
}

/// The winding number (zeros minus poles, with multiplicity) of f over the
/// boundary of a region.
pub fn winding_count(f: &MeromorphicMap, region: &Region, quad_tol: f64) -> Result<i64> {
    Ok(contour_moments(f, region, quad_tol)?.winding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{rational_map, weierstrass_p, Lattice};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_map_unit_circle() {
        let f = rational_map(&[(c(0.0, 0.0), 1)], &[], c(1.0, 0.0)).unwrap();
        let circle = Region::AnnulusSector { r1: 0.0, r2: 1.0, theta1: 0.0, theta2: 2.0 * PI };
        assert_eq!(winding_count(&f, &circle, 0.02).unwrap(), 1);
    }

    #[test]
    fn rational_on_circle_of_radius_two() {
        // (z-1)/(z+1)^2 on |z| = 2: 1 - 2 = -1
        let f = rational_map(&[(c(1.0, 0.0), 1)], &[(c(-1.0, 0.0), 2)], c(1.0, 0.0)).unwrap();
        let circle = Region::AnnulusSector { r1: 0.0, r2: 2.0, theta1: 0.0, theta2: 2.0 * PI };
        assert_eq!(winding_count(&f, &circle, 0.02).unwrap(), -1);
        // and on a rectangle enclosing both points
        let rect = Region::Rect { center: c(0.0, 0.0), half_width: 2.0, half_height: 2.0 };
        assert_eq!(winding_count(&f, &rect, 0.02).unwrap(), -1);
    }

    #[test]
    fn wp_fundamental_cell_balances() {
        // one double pole vs one double zero per period cell: the elliptic
        // degree balances to winding 0 (cell chosen with a clean boundary)
        let f = weierstrass_p(&Lattice::square(PI));
        let cell = Region::Rect { center: c(0.8, 0.4), half_width: PI / 2.0, half_height: PI / 2.0 };
        assert_eq!(winding_count(&f, &cell, 0.02).unwrap(), 0);
        let cell = Region::Rect { center: c(-0.3, 1.1), half_width: PI / 2.0, half_height: PI / 2.0 };
        assert_eq!(winding_count(&f, &cell, 0.02).unwrap(), 0);
    }

    #[test]
    fn moments_locate_a_double_pole() {
        let f = weierstrass_p(&Lattice::square(PI));
        let cell = Region::Rect { center: c(0.3, -0.2), half_width: 1.0, half_height: 1.0 };
        let m = contour_moments(&f, &cell, 0.01).unwrap();
        assert_eq!(m.winding, -2);
        let (center, hw, hh) = m.region.bounding_rect();
        let est = m.centroid(center, (hw * hw + hh * hh).sqrt()).unwrap();
        assert!(est.norm() < 1e-6, "centroid estimate {est} should be ~0");
        assert!(m.single_location_defect() < 1e-6);
    }

    #[test]
    fn winding_additivity_under_splits() {
        let f = weierstrass_p(&Lattice::square(PI));
        let outer = Region::Rect { center: c(0.15, 0.22), half_width: 2.3, half_height: 1.9 };
        let total = winding_count(&f, &outer, 0.02).unwrap();
        // split vertically at an interior line
        let (ctr, hw, hh) = outer.bounding_rect();
        let frac = 0.37;
        let xl = ctr.re - hw;
        let xm = ctr.re - hw + 2.0 * hw * frac;
        let xr = ctr.re + hw;
        let left = Region::Rect {
            center: c(0.5 * (xl + xm), ctr.im),
            half_width: 0.5 * (xm - xl),
            half_height: hh,
        };
        let right = Region::Rect {
            center: c(0.5 * (xm + xr), ctr.im),
            half_width: 0.5 * (xr - xm),
            half_height: hh,
        };
        let sum = winding_count(&f, &left, 0.02).unwrap() + winding_count(&f, &right, 0.02).unwrap();
        assert_eq!(total, sum);
    }
}
