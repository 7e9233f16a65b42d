//! Catalog manifest: a line-oriented text format listing named functions and
//! their constructor parameters, so experiments can instantiate catalog
//! entries by name.
//!
//! ```text
//! # catalog manifest v1
//! [function]
//! name = wp
//! kind = weierstrass
//! omega1 = 3.141592653589793 0
//! omega2 = 0 3.141592653589793
//! ```

use num_complex::Complex64;

use crate::util::parse_f64;
use crate::{Error, Result};

use super::{Lattice, MeromorphicMap};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: String,
    pub kind: String,
    pub params: Vec<(String, String)>,
}

impl FunctionSpec {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn complex(&self, key: &str) -> Result<Option<Complex64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(Error::Config(format!(
                        "function '{}': '{key}' wants 're im', got '{v}'",
                        self.name
                    )));
                }
                Ok(Some(Complex64::new(parse_f64(parts[0])?, parse_f64(parts[1])?)))
            }
        }
    }

    /// Parse "re im mult; re im mult; ..." lists.
    fn point_list(&self, key: &str) -> Result<Vec<(Complex64, u32)>> {
        let mut out = Vec::new();
        if let Some(v) = self.get(key) {
            for entry in v.split(';') {
                let entry = entry.trim();
                if entry.is_empty() {
                    continue;
                }
                let parts: Vec<&str> = entry.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!(
                        "function '{}': point entry '{entry}' wants 're im mult'",
                        self.name
                    )));
                }
                out.push((
                    Complex64::new(parse_f64(parts[0])?, parse_f64(parts[1])?),
                    parts[2].parse::<u32>().map_err(|e| {
                        Error::Config(format!("bad multiplicity '{}': {e}", parts[2]))
                    })?,
                ));
            }
        }
        Ok(out)
    }

    /// Build the described map.
    pub fn instantiate(&self) -> Result<MeromorphicMap> {
        let pi = std::f64::consts::PI;
        let default_o1 = Complex64::new(pi, 0.0);
        let default_o2 = Complex64::new(0.0, pi);
        let mut map = match self.kind.as_str() {
            "weierstrass" => {
                let o1 = self.complex("omega1")?.unwrap_or(default_o1);
                let o2 = self.complex("omega2")?.unwrap_or(default_o2);
                super::weierstrass_p(&Lattice::new(o1, o2)?)
            }
            "bank_kaufman" => {
                let o1 = self.complex("omega1")?.unwrap_or(default_o1);
                let o2 = self.complex("omega2")?.unwrap_or(default_o2);
                let guard = match self.get("guard") {
                    Some(g) => parse_f64(g)?,
                    None => 1e-3,
                };
                super::bank_kaufman_with_guard(&Lattice::new(o1, o2)?, guard)?
            }
            "exp" => super::elementary_controls().swap_remove(0),
            "tan" => super::elementary_controls().swap_remove(1),
            "rational" => {
                let zeros = self.point_list("zeros")?;
                let poles = self.point_list("poles")?;
                let scale = self.complex("scale")?.unwrap_or(Complex64::new(1.0, 0.0));
                super::rational_map(&zeros, &poles, scale)?
            }
            "colliding_pairs" => {
                let k = self
                    .get("k_max")
                    .unwrap_or("10")
                    .parse::<u32>()
                    .map_err(|e| Error::Config(format!("bad k_max: {e}")))?;
                super::colliding_pair_sum(k)
            }
            other => return Err(Error::UnknownFunction(other.to_string())),
        };
        map.name = self.name.clone();
        Ok(map)
    }
}

/// Parse a manifest. Sections start at `[function]`; keys are `name`, `kind`,
/// and constructor parameters. Unknown structure is an error, not a warning.
pub fn parse_manifest(text: &str) -> Result<Vec<FunctionSpec>> {
    let mut specs: Vec<FunctionSpec> = Vec::new();
    let mut current: Option<FunctionSpec> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[function]" {
            if let Some(spec) = current.take() {
                specs.push(finish(spec, lineno)?);
            }
            current = Some(FunctionSpec { name: String::new(), kind: String::new(), params: Vec::new() });
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(spec) = current.as_mut() else {
            return Err(Error::Config(format!("line {}: key outside a [function] section", lineno + 1)));
        };
        match k {
            "name" => spec.name = v.to_string(),
            "kind" => spec.kind = v.to_string(),
            _ => spec.params.push((k.to_string(), v.to_string())),
        }
    }
    if let Some(spec) = current.take() {
        specs.push(finish(spec, 0)?);
    }
    Ok(specs)
}

fn finish(spec: FunctionSpec, lineno: usize) -> Result<FunctionSpec> {
    if spec.name.is_empty() || spec.kind.is_empty() {
        return Err(Error::Config(format!(
            "function section near line {} needs both 'name' and 'kind'",
            lineno + 1
        )));
    }
    Ok(spec)
}

/// The functions every experiment can rely on without a manifest file.
pub fn builtin_manifest() -> &'static str {
    "# catalog manifest v1\n\
     [function]\n\
     name = weierstrass\n\
     kind = weierstrass\n\
     \n\
     [function]\n\
     name = bank_kaufman\n\
     kind = bank_kaufman\n\
     \n\
     [function]\n\
     name = exp\n\
     kind = exp\n\
     \n\
     [function]\n\
     name = tan\n\
     kind = tan\n\
     \n\
     [function]\n\
     name = moebius\n\
     kind = rational\n\
     zeros = 1 0 1\n\
     poles = -1 0 1\n\
     \n\
     [function]\n\
     name = colliding_pairs\n\
     kind = colliding_pairs\n\
     k_max = 21\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_manifest_instantiates() {
        let specs = parse_manifest(builtin_manifest()).unwrap();
        assert_eq!(specs.len(), 6);
        for spec in &specs {
            let f = spec.instantiate().unwrap();
            assert_eq!(f.name(), spec.name);
            let j = f.jet(Complex64::new(0.37, 0.11));
            assert!(j.is_finite(), "{} produced a non-finite jet", spec.name);
        }
    }

    #[test]
    fn malformed_manifest_is_rejected() {
        assert!(parse_manifest("[function]\nname = x\n").is_err()); // missing kind
        assert!(parse_manifest("name = orphan\n").is_err()); // key outside section
        assert!(parse_manifest("[function]\nname = x\nkind = weierstrass\nbroken line\n").is_err());
    }
}
