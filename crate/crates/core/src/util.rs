//! Small shared helpers: canonical float formatting for the text formats,
//! deterministic grids, and a checksum for cache files.

use num_complex::Complex64;

/// Shortest round-trip decimal form, with canonical spellings for the
/// non-finite cases so emitted files are byte-stable.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else if x == 0.0 {
        // collapse -0.0
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
}

pub fn parse_f64(s: &str) -> crate::Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse::<f64>()
            .map_err(|e| crate::Error::Format(format!("bad float '{s}': {e}"))),
    }
}

/// Geometric radius grid with `per_decade` points per factor of 10,
/// endpoints included.
pub fn geometric_radii(r_min: f64, r_max: f64, per_decade: usize) -> Vec<f64> {
    assert!(r_min > 0.0 && r_max > r_min && per_decade > 0);
    let decades = (r_max / r_min).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    let n = n.max(1);
    (0..=n)
        .map(|k| r_min * (r_max / r_min).powf(k as f64 / n as f64))
        .collect()
}

/// FNV-1a, used for cache keys and file checksums.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Total order on complex numbers by (|z|, arg z, re, im); used to give
/// serialized point sets a bit-stable ordering.
pub fn modulus_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    let ka = (a.norm(), a.arg(), a.re, a.im);
    let kb = (b.norm(), b.arg(), b.re, b.im);
    ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.0, -0.0, 1.5, -2.25e-17, 3.141592653589793, 1e300] {
            let s = fmt_f64(x);
            assert_eq!(parse_f64(&s).unwrap(), if x == 0.0 { 0.0 } else { x });
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn radii_grid_hits_endpoints() {
        let g = geometric_radii(5.0, 60.0, 12);
        assert!((g[0] - 5.0).abs() < 1e-12);
        assert!((g.last().unwrap() - 60.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
