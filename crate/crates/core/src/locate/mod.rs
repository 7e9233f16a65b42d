//! Zero/pole localization by recursive subdivision with argument-principle
//! counting, and the separation/distribution statistics built on top of the
//! located point sets.
//!
//! Subdivision strategy: cells larger than the kind scale (the natural scale
//! κ·|z|^{-β} on which zeros and poles are guaranteed to separate) are always
//! split. At or below it, a cell whose winding and first three contour
//! moments all vanish is discarded; a cell whose moments are consistent with
//! a single location is polished directly and certified by a tiny
//! verification contour around the polished point, and anything else keeps
//! splitting. This keeps the tree logarithmic even over very large regions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{MeromorphicMap, PointKind};
use crate::riemann::Rep;
use crate::util::{fmt_complex, fmt_f64, modulus_order, parse_f64};
use crate::{Error, Result};

mod stats;
mod winding;

pub use stats::{
    beta_separation, c_point_proximity, derivative_condition_check, equal_distribution_scan,
    CPointReport, DerivativeConditionReport, EqualDistributionReport, SeparationReport,
};
pub use winding::{contour_moments, winding_count, ContourMoments};

/// Search region: an axis-aligned rectangle or an origin-centered annulus
/// sector. Membership is strict (boundary points excluded), which is also
/// the convention the locator uses when filtering results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Rect { center: Complex64, half_width: f64, half_height: f64 },
    AnnulusSector { r1: f64, r2: f64, theta1: f64, theta2: f64 },
}

impl Region {
    pub fn rect(center: Complex64, half_width: f64, half_height: f64) -> Region {
        Region::Rect { center, half_width, half_height }
    }

    pub fn square(center: Complex64, half: f64) -> Region {
        Region::rect(center, half, half)
    }

    /// Origin-centered disc as a degenerate annulus sector.
    pub fn disc(radius: f64) -> Region {
        Region::AnnulusSector { r1: 0.0, r2: radius, theta1: 0.0, theta2: 2.0 * std::f64::consts::PI }
    }

    pub fn bounding_rect(&self) -> (Complex64, f64, f64) {
        match *self {
            Region::Rect { center, half_width, half_height } => (center, half_width, half_height),
            Region::AnnulusSector { r2, .. } => (Complex64::default(), r2, r2),
        }
    }

    /// Strict interior membership with a safety margin: points within
    /// `margin` of the boundary are treated as outside.
    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        match *self {
            Region::Rect { center, half_width, half_height } => {
                (z.re - center.re).abs() < half_width - margin
                    && (z.im - center.im).abs() < half_height - margin
            }
            Region::AnnulusSector { r1, r2, theta1, theta2 } => {
                let r = z.norm();
                if r <= r1 + margin || r >= r2 - margin {
                    return false;
                }
                let full = (theta2 - theta1) >= 2.0 * std::f64::consts::PI - 1e-12;
                if full {
                    return true;
                }
                let mut t = z.arg();
                while t < theta1 {
                    t += 2.0 * std::f64::consts::PI;
                }
                t > theta1 + margin && t < theta2 - margin
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rect { half_width, half_height, .. } => 4.0 * half_width * half_height,
            Region::AnnulusSector { r1, r2, theta1, theta2 } => {
                0.5 * (theta2 - theta1) * (r2 * r2 - r1 * r1)
            }
        }
    }
}

/// A located zero or pole with its certifying cell and polish residual
/// (|f| at a zero, |1/f| at a pole).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocatedPoint {
    pub position: Complex64,
    pub kind: PointKind,
    pub multiplicity: u32,
    pub cell_center: Complex64,
    pub cell_half: f64,
    pub residual: f64,
}

/// Result of a locate run: the points found, the region/tolerance that
/// produced them, and whether every subdivision cell was fully resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSet {
    pub function_id: String,
    pub region: Region,
    pub tol: f64,
    pub points: Vec<LocatedPoint>,
    pub complete: bool,
}

impl PointSet {
    pub fn zeros(&self) -> impl Iterator<Item = &LocatedPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Zero)
    }

    pub fn poles(&self) -> impl Iterator<Item = &LocatedPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Pole)
    }

    /// Multiplicity-weighted count of points of a kind with |z| < r.
    pub fn count_within(&self, r: f64, kind: PointKind) -> u64 {
        self.points
            .iter()
            .filter(|p| p.kind == kind && p.position.norm() < r)
            .map(|p| p.multiplicity as u64)
            .sum()
    }

    /// Canonical ordering by (|z|, arg z); applied before serialization.
    pub fn sort_canonical(&mut self) {
        self.points.sort_by(|a, b| modulus_order(&a.position, &b.position));
    }

    /// Versioned line-oriented text form, bit-stable given equal contents.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# pointset v1\n");
        out.push_str(&format!("# function {}\n", self.function_id));
        match &self.region {
            Region::Rect { center, half_width, half_height } => {
                out.push_str(&format!(
                    "# region rect {} {} {}\n",
                    fmt_complex(*center),
                    fmt_f64(*half_width),
                    fmt_f64(*half_height)
                ));
            }
            Region::AnnulusSector { r1, r2, theta1, theta2 } => {
                out.push_str(&format!(
                    "# region sector {} {} {} {}\n",
                    fmt_f64(*r1),
                    fmt_f64(*r2),
                    fmt_f64(*theta1),
                    fmt_f64(*theta2)
                ));
            }
        }
        out.push_str(&format!("# tol {}\n", fmt_f64(self.tol)));
        out.push_str(&format!("# complete {}\n", self.complete));
        out.push_str(&format!("# count {}\n", self.points.len()));
        for p in &self.points {
            let tag = match p.kind {
                PointKind::Zero => 'Z',
                PointKind::Pole => 'P',
            };
            out.push_str(&format!(
                "{tag} {} {} {} {} {}\n",
                fmt_complex(p.position),
                p.multiplicity,
                fmt_complex(p.cell_center),
                fmt_f64(p.cell_half),
                fmt_f64(p.residual)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PointSet> {
        let mut function_id = String::new();
        let mut region = None;
        let mut tol = f64::NAN;
        let mut complete = true;
        let mut points = Vec::new();
        let mut saw_version = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let words: Vec<&str> = rest.split_whitespace().collect();
                match words.first().copied() {
                    Some("pointset") => {
                        if words.get(1) != Some(&"v1") {
                            return Err(Error::Format(format!("unsupported pointset version: {rest}")));
                        }
                        saw_version = true;
                    }
                    Some("function") => function_id = words[1..].join(" "),
                    Some("region") => {
                        region = Some(match words.get(1).copied() {
                            Some("rect") if words.len() == 6 => Region::Rect {
                                center: Complex64::new(parse_f64(words[2])?, parse_f64(words[3])?),
                                half_width: parse_f64(words[4])?,
                                half_height: parse_f64(words[5])?,
                            },
                            Some("sector") if words.len() == 6 => Region::AnnulusSector {
                                r1: parse_f64(words[2])?,
                                r2: parse_f64(words[3])?,
                                theta1: parse_f64(words[4])?,
                                theta2: parse_f64(words[5])?,
                            },
                            _ => return Err(Error::Format(format!("bad region line: {rest}"))),
                        });
                    }
                    Some("tol") => tol = parse_f64(words[1])?,
                    Some("complete") => complete = words[1] == "true",
                    Some("count") => {}
                    _ => return Err(Error::Format(format!("unknown header line: {rest}"))),
                }
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if words.len() != 8 {
                return Err(Error::Format(format!("bad point record: {line}")));
            }
            let kind = match words[0] {
                "Z" => PointKind::Zero,
                "P" => PointKind::Pole,
                other => return Err(Error::Format(format!("bad point tag: {other}"))),
            };
            points.push(LocatedPoint {
                position: Complex64::new(parse_f64(words[1])?, parse_f64(words[2])?),
                kind,
                multiplicity: words[3]
                    .parse()
                    .map_err(|e| Error::Format(format!("bad multiplicity: {e}")))?,
                cell_center: Complex64::new(parse_f64(words[4])?, parse_f64(words[5])?),
                cell_half: parse_f64(words[6])?,
                residual: parse_f64(words[7])?,
            });
        }
        if !saw_version {
            return Err(Error::Format("missing pointset version header".into()));
        }
        Ok(PointSet {
            function_id,
            region: region.ok_or_else(|| Error::Format("missing region header".into()))?,
            tol,
            points,
            complete,
        })
    }
}

/// Knobs for the subdivision locator; `beta` sets the natural scale
/// |z|^{-β} the other lengths are measured against.
#[derive(Debug, Clone)]
pub struct LocateConfig {
    /// resolution: stop splitting nonzero-winding cells below tol·|z|^{-β}
    pub tol: f64,
    pub beta: f64,
    /// cells larger than kind_scale·|z|^{-β} are always split (never pruned)
    pub kind_scale: f64,
    pub max_depth: usize,
    pub quad_tol: f64,
}

impl Default for LocateConfig {
    fn default() -> Self {
        LocateConfig { tol: 0.02, beta: 0.0, kind_scale: 2.0, max_depth: 64, quad_tol: 0.02 }
    }
}

impl LocateConfig {
    pub fn with_beta(beta: f64) -> Self {
        LocateConfig { beta, ..Default::default() }
    }

    fn natural(&self, z: Complex64) -> f64 {
        z.norm().max(1.0).powf(-self.beta)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    center: Complex64,
    half: f64,
    depth: usize,
}

impl Cell {
    fn region(&self) -> Region {
        Region::square(self.center, self.half)
    }

    fn children(&self) -> [Cell; 4] {
        let h = self.half * 0.5;
        let d = self.depth + 1;
        [
            Cell { center: self.center + Complex64::new(-h, -h), half: h, depth: d },
            Cell { center: self.center + Complex64::new(h, -h), half: h, depth: d },
            Cell { center: self.center + Complex64::new(-h, h), half: h, depth: d },
            Cell { center: self.center + Complex64::new(h, h), half: h, depth: d },
        ]
    }
}

enum CellOutcome {
    Empty,
    Split([Cell; 4]),
    Found(Vec<LocatedPoint>),
    Unresolved,
}

/// Newton polish of a single location; modified step for multiplicity m.
fn polish(
    f: &MeromorphicMap,
    start: Complex64,
    kind: PointKind,
    mult: u32,
    cap: f64,
) -> (Complex64, f64) {
    let mut z = start;
    let m = mult.max(1) as f64;
    for _ in 0..60 {
        let j = f.jet(z);
        // work on the side that vanishes at the target
        let (v, d) = match (kind, j.rep) {
            (PointKind::Zero, Rep::Direct) | (PointKind::Pole, Rep::Reciprocal) => (j.f0, j.f1),
            _ => match j.switched() {
                Ok(s) => (s.f0, s.f1),
                Err(_) => break, // sitting exactly on the target
            },
        };
        if v.norm() == 0.0 {
            break;
        }
        let mut step = m * v / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        z -= step;
        if (z - start).norm() > 3.0 * cap {
            // diverged out of the certifying neighbourhood
            return (start, f64::INFINITY);
        }
        if step.norm() < 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    let j = f.jet(z);
    let residual = match (kind, j.rep) {
        (PointKind::Zero, Rep::Direct) | (PointKind::Pole, Rep::Reciprocal) => j.f0.norm(),
        (PointKind::Zero, Rep::Reciprocal) => 1.0 / j.f0.norm(),
        (PointKind::Pole, Rep::Direct) => 1.0 / j.f0.norm().max(1e-300),
    };
    (z, residual)
}

fn process_cell(f: &MeromorphicMap, cell: &Cell, cfg: &LocateConfig) -> CellOutcome {
    let natural = cfg.natural(cell.center);
    let kind_limit = cfg.kind_scale * natural;
    // far-out cells in beta < 0 geometries can always be split blindly
    if cell.half > kind_limit {
        if cell.depth >= cfg.max_depth {
            return CellOutcome::Unresolved;
        }
        // cheap screen: a contour pass decides empty vs interesting even
        // above the kind scale; only the prune decision is restricted
        let m = match contour_moments(f, &cell.region(), cfg.quad_tol) {
            Ok(m) => m,
            Err(_) => return CellOutcome::Unresolved,
        };
        let small = m.winding == 0
            && m.moments[1].norm() < 0.05
            && m.moments[2].norm() < 0.05
            && m.moments[3].norm() < 0.05;
        if small && m.converged {
            return CellOutcome::Empty;
        }
        return CellOutcome::Split(cell.children());
    }
    let m = match contour_moments(f, &cell.region(), cfg.quad_tol) {
        Ok(m) => m,
        Err(_) => return CellOutcome::Unresolved,
    };
    if m.winding == 0 {
        let small = m.moments[1].norm() < 0.05
            && m.moments[2].norm() < 0.05
            && m.moments[3].norm() < 0.05;
        if small {
            return CellOutcome::Empty;
        }
        if cell.depth >= cfg.max_depth {
            return CellOutcome::Unresolved;
        }
        return CellOutcome::Split(cell.children());
    }
    // nonzero winding: try the single-location fast path
    let kind = if m.winding > 0 { PointKind::Zero } else { PointKind::Pole };
    let mult = m.winding.unsigned_abs() as u32;
    let resolution = cfg.tol * natural;
    let single = m.single_location_defect() < 3e-3 || cell.half <= resolution;
    if single {
        let (rc, rhw, rhh) = m.region.bounding_rect();
        let scale = (rhw * rhw + rhh * rhh).sqrt();
        let start = m.centroid(rc, scale).unwrap_or(cell.center);
        let (pos, residual) = polish(f, start, kind, mult, 2.0 * cell.half);
        if residual.is_finite() && residual < 1e-5 {
            // certify: a tiny contour around the polished point must carry
            // the full multiplicity
            let vhalf = (3.0 * resolution).min(cell.half);
            let vcell = Region::square(pos, vhalf);
            if let Ok(vm) = contour_moments(f, &vcell, cfg.quad_tol) {
                let expected = if kind == PointKind::Zero { mult as i64 } else { -(mult as i64) };
                if vm.winding == expected {
                    let (vc, vh, _) = vm.region.bounding_rect();
                    return CellOutcome::Found(vec![LocatedPoint {
                        position: pos,
                        kind,
                        multiplicity: mult,
                        cell_center: vc,
                        cell_half: vh,
                        residual,
                    }]);
                }
            }
        }
        if cell.half <= resolution {
            // could not certify at resolution: record as unresolved
            return CellOutcome::Unresolved;
        }
    }
    if cell.depth >= cfg.max_depth {
        return CellOutcome::Unresolved;
    }
    CellOutcome::Split(cell.children())
}

/// Locate all zeros and poles of f inside a region by quadtree subdivision,
/// with kinds decided by which side of the jet vanishes, multiplicities from
/// the certifying winding, and positions polished by Newton iteration.
pub fn locate_in_region(f: &MeromorphicMap, region: &Region, cfg: &LocateConfig) -> PointSet {
    let (center, hw, hh) = region.bounding_rect();
    let root = Cell { center, half: hw.max(hh), depth: 0 };
    let mut level = vec![root];
    let mut found: Vec<LocatedPoint> = Vec::new();
    let mut complete = true;
    while !level.is_empty() {
        let outcomes: Vec<CellOutcome> =
            level.par_iter().map(|cell| process_cell(f, cell, cfg)).collect();
        let mut next = Vec::new();
        for outcome in outcomes {
            match outcome {
                CellOutcome::Empty => {}
                CellOutcome::Split(children) => next.extend_from_slice(&children),
                CellOutcome::Found(pts) => found.extend(pts),
                CellOutcome::Unresolved => complete = false,
            }
        }
        level = next;
    }
    // overlapping jittered cells can find the same point more than once
    let mut dedup: Vec<LocatedPoint> = Vec::new();
    found.sort_by(|a, b| modulus_order(&a.position, &b.position));
    for p in found {
        let tol_here = 0.5 * cfg.tol * cfg.natural(p.position);
        match dedup
            .iter_mut()
            .find(|q| q.kind == p.kind && (q.position - p.position).norm() < tol_here)
        {
            Some(q) => {
                if p.residual < q.residual {
                    *q = p;
                }
            }
            None => dedup.push(p),
        }
    }
    // strict membership in the requested region, with a small margin so
    // boundary-sitting points are excluded deterministically
    let margin = 0.0;
    let mut points: Vec<LocatedPoint> = dedup
        .into_iter()
        .filter(|p| region.contains(p.position, margin))
        .collect();
    points.sort_by(|a, b| modulus_order(&a.position, &b.position));
    let mut ps = PointSet {
        function_id: f.name().to_string(),
        region: region.clone(),
        tol: cfg.tol,
        points,
        complete,
    };
    ps.sort_canonical();
    ps
}
