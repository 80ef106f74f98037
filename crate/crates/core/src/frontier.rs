//! Pareto frontier over (robustness CE, effectiveness CE) observations.
//!
//! Both coordinates are losses, so lower is better on each axis. A point
//! dominates another when it is no worse on both axes and strictly better on
//! at least one.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scaling::Loss;

/// Clamp margin applied to the initial Pareto weight.
pub const OMEGA0_EPSILON: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfPoint {
    pub robustness: Loss,
    pub effectiveness: Loss,
    pub label: String,
}

impl PerfPoint {
    pub fn new(robustness: f64, effectiveness: f64, label: impl Into<String>) -> Result<Self> {
        let (r, e) = (Loss::new(robustness)?, Loss::new(effectiveness)?);
        if r.value() <= 0.0 || e.value() <= 0.0 {
            return Err(Error::domain("performance losses must be positive"));
        }
        Ok(PerfPoint {
            robustness: r,
            effectiveness: e,
            label: label.into(),
        })
    }

    fn rob(&self) -> f64 {
        self.robustness.value()
    }

    fn eff(&self) -> f64 {
        self.effectiveness.value()
    }

    /// Weak dominance on both losses with at least one strict improvement.
    pub fn dominates(&self, other: &PerfPoint) -> bool {
        self.rob() <= other.rob()
            && self.eff() <= other.eff()
            && (self.rob() < other.rob() || self.eff() < other.eff())
    }
}

/// Mutually non-dominated points sorted by ascending effectiveness loss;
/// robustness loss strictly decreases along the list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frontier {
    points: Vec<PerfPoint>,
    indices: Vec<usize>,
}

impl Frontier {
    pub fn points(&self) -> &[PerfPoint] {
        &self.points
    }

    /// Positions of the frontier points in the original input.
    pub fn input_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sort-and-sweep extraction of the non-dominated subset.
///
/// Points identical on both coordinates keep only the earliest in input order.
pub fn extract_non_dominated(points: &[PerfPoint]) -> Result<Frontier> {
    if points.is_empty() {
        return Err(Error::domain("frontier of an empty point set"));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.eff()
            .total_cmp(&pb.eff())
            .then(pa.rob().total_cmp(&pb.rob()))
            .then(a.cmp(&b))
    });
    let mut best_rob = f64::INFINITY;
    let mut indices = Vec::new();
    for i in order {
        let r = points[i].rob();
        if r < best_rob {
            indices.push(i);
            best_rob = r;
        }
    }
    Ok(Frontier {
        points: indices.iter().map(|&i| points[i].clone()).collect(),
        indices,
    })
}

/// The frontier point farthest from the chord joining the two frontier
/// endpoints, after min-max normalizing both losses over the frontier.
/// Ties go to the lower robustness loss.
pub fn knee_point(frontier: &Frontier) -> Result<&PerfPoint> {
    let pts = frontier.points();
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::domain("knee of an empty frontier")),
    };
    if pts.len() == 1 {
        return Ok(first);
    }
    let (rmin, rmax) = (last.rob(), first.rob());
    let (emin, emax) = (first.eff(), last.eff());
    let norm = |p: &PerfPoint| ((p.eff() - emin) / (emax - emin), (p.rob() - rmin) / (rmax - rmin));
    // Normalized endpoints are (0, 1) and (1, 0), so the chord is x + y = 1.
    let dist = |p: &PerfPoint| {
        let (x, y) = norm(p);
        (x + y - 1.0).abs() / std::f64::consts::SQRT_2
    };
    let mut best = first;
    let mut best_d = dist(first);
    for p in &pts[1..] {
        let d = dist(p);
        if d > best_d || (d == best_d && p.rob() < best.rob()) {
            best = p;
            best_d = d;
        }
    }
    Ok(best)
}

/// Initial Pareto weight derived from the knee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Omega0 {
    /// Robustness-to-effectiveness loss ratio at the knee, clamped to
    /// `[0.01, 0.99]`; used as the starting weight.
    pub omega0: f64,
    /// The unclamped ratio; its reciprocal is the target `l_E / l_R` of the
    /// weight update.
    pub ratio: f64,
}

impl Omega0 {
    /// Builds the pair from a directly supplied ratio.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::domain(format!("omega0 ratio must be positive, got {ratio}")));
        }
        Ok(Omega0 {
            omega0: ratio.clamp(OMEGA0_EPSILON, 1.0 - OMEGA0_EPSILON),
            ratio,
        })
    }
}

pub fn estimate_omega0(frontier: &Frontier) -> Result<Omega0> {
    let knee = knee_point(frontier)?;
    Omega0::from_ratio(knee.rob() / knee.eff())
}

/// Per-coordinate map `v -> (max - v) / (max - min)` over the input values.
pub fn inverse_normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 || !(max > min) {
        return Err(Error::DegenerateRange(format!(
            "need at least two distinct values, got range [{min}, {max}]"
        )));
    }
    Ok(values.iter().map(|v| (max - v) / (max - min)).collect())
}

/// One point of a normalized plot series; higher is better on both axes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedPoint {
    /// Normalized robustness score.
    pub x: f64,
    /// Normalized effectiveness score.
    pub y: f64,
    pub label: String,
}

pub fn inverse_normalize(points: &[PerfPoint]) -> Result<Vec<NormalizedPoint>> {
    let rob: Vec<f64> = points.iter().map(PerfPoint::rob).collect();
    let eff: Vec<f64> = points.iter().map(PerfPoint::eff).collect();
    let xs = inverse_normalize_values(&rob)?;
    let ys = inverse_normalize_values(&eff)?;
    Ok(points
        .iter()
        .zip(xs.into_iter().zip(ys))
        .map(|(p, (x, y))| NormalizedPoint {
            x,
            y,
            label: p.label.clone(),
        })
        .collect())
}

/// Writes a normalized series as TSV with a `#`-prefixed column header.
pub fn write_normalized_tsv<W: Write>(mut out: W, series: &[NormalizedPoint]) -> Result<()> {
    writeln!(out, "# label\tx\ty")?;
    for p in series {
        writeln!(out, "{}\t{}\t{}", p.label, p.x, p.y)?;
    }
    Ok(())
}
