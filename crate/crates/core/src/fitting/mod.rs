//! Least-squares recovery of scaling-law coefficients.
//!
//! Single-variable laws are fit in log space: once the irreducible offset is
//! fixed, `ln(loss - offset) = exponent * ln(scale) - exponent * ln(size)` is
//! a straight line, so the offset is profiled (a coarse grid followed by a
//! golden-section refinement) and everything else is closed form. R² is
//! reported in the same log space. Fitting in linear space weights the
//! large-loss points more heavily and gives different coefficients.
//!
//! Joint laws are fit by minimizing squared log-loss residuals with a
//! Nelder-Mead simplex, initialized from single-variable fits of the two
//! marginal slices.

pub mod simplex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{golden_section, lin_space};
use crate::par;
use crate::scaling::{DataSize, JointLaw, Loss, ModelSize, PowerLaw};

use self::simplex::SimplexOptions;

/// Number of offset candidates in the coarse profiling grid.
pub const OFFSET_GRID: usize = 200;
/// Absolute tolerance of the golden-section offset refinement.
pub const OFFSET_TOL: f64 = 1e-6;

/// One observed `(size, loss)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub size: f64,
    pub loss: f64,
}

impl FitPoint {
    pub fn new(size: f64, loss: f64) -> Result<Self> {
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::domain(format!("fit point size must be positive, got {size}")));
        }
        if !(loss.is_finite() && loss > 0.0) {
            return Err(Error::domain(format!("fit point loss must be positive, got {loss}")));
        }
        Ok(FitPoint { size, loss })
    }
}

/// One observed `(model size, data size, loss)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointObservation {
    pub model_size: f64,
    pub data_size: f64,
    pub loss: f64,
}

impl JointObservation {
    pub fn new(model_size: f64, data_size: f64, loss: f64) -> Result<Self> {
        FitPoint::new(model_size, loss)?;
        FitPoint::new(data_size, loss)?;
        Ok(JointObservation {
            model_size,
            data_size,
            loss,
        })
    }

    pub fn from_sizes(model: ModelSize, data: DataSize, loss: Loss) -> Result<Self> {
        Self::new(model.as_f64(), data.as_f64(), loss.value())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport<L> {
    pub law: L,
    pub r_squared: f64,
    /// Log-space residuals, one per input point, in input order.
    pub residuals: Vec<f64>,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    ss_res: f64,
    ss_tot: f64,
}

fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    LineFit {
        slope,
        intercept,
        ss_res,
        ss_tot: syy,
    }
}

/// Log-space regression of `ln(loss - offset)` on `ln(size)`. `None` when the
/// offset is infeasible: some loss at or below it, zero variance, or a
/// non-decreasing trend (which would need a non-positive exponent).
fn profile_at(log_sizes: &[f64], losses: &[f64], offset: f64) -> Option<LineFit> {
    if losses.iter().any(|&l| l <= offset) {
        return None;
    }
    let y: Vec<f64> = losses.iter().map(|l| (l - offset).ln()).collect();
    let fit = fit_line(log_sizes, &y);
    if !(fit.slope < 0.0) || !(fit.ss_tot > 0.0) || !fit.ss_res.is_finite() {
        return None;
    }
    Some(fit)
}

fn unexplained(fit: &Option<LineFit>) -> f64 {
    match fit {
        Some(f) => f.ss_res / f.ss_tot,
        None => f64::INFINITY,
    }
}

/// Fits `(scale / x)^exponent + offset` to `points`, maximizing log-space R².
///
/// `offset_bounds` defaults to `(0, 0.99 * min loss)`.
pub fn fit_power_law(points: &[FitPoint], offset_bounds: Option<(f64, f64)>) -> Result<FitReport<PowerLaw>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    for p in points {
        FitPoint::new(p.size, p.loss)?;
    }
    let mut sizes: Vec<f64> = points.iter().map(|p| p.size).collect();
    sizes.sort_by(f64::total_cmp);
    if sizes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("fit points must have distinct sizes"));
    }

    let min_loss = points.iter().map(|p| p.loss).fold(f64::INFINITY, f64::min);
    let (low, high) = offset_bounds.unwrap_or((0.0, 0.99 * min_loss));
    if !(low >= 0.0 && low <= high && min_loss > low) {
        return Err(Error::domain(format!(
            "offset bounds ({low}, {high}) must satisfy 0 <= low <= high and low < min loss {min_loss}"
        )));
    }

    let log_sizes: Vec<f64> = points.iter().map(|p| p.size.ln()).collect();
    let losses: Vec<f64> = points.iter().map(|p| p.loss).collect();

    let grid = lin_space(low, high, OFFSET_GRID);
    let scores = par::map(&grid, |&d| unexplained(&profile_at(&log_sizes, &losses, d)));
    let best = par::argmin(&scores)
        .filter(|&i| scores[i].is_finite())
        .ok_or_else(|| Error::FitFailure("no feasible offset in the profiling range".into()))?;

    let mut offset = grid[best];
    let mut best_score = scores[best];
    if grid.len() > 1 {
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let (d, s) = golden_section(|d| unexplained(&profile_at(&log_sizes, &losses, d)), lo, hi, OFFSET_TOL);
        if s < best_score {
            offset = d;
            best_score = s;
        }
    }

    let fit = profile_at(&log_sizes, &losses, offset)
        .ok_or_else(|| Error::FitFailure("refined offset became infeasible".into()))?;
    let exponent = -fit.slope;
    let scale = (fit.intercept / exponent).exp();
    let law = PowerLaw::new(scale, exponent, offset)
        .map_err(|e| Error::FitFailure(format!("fitted coefficients invalid: {e}")))?;
    let residuals = points
        .iter()
        .map(|p| (p.loss - offset).ln() - law.reducible(p.size).ln())
        .collect();
    Ok(FitReport {
        law,
        r_squared: 1.0 - best_score,
        residuals,
    })
}

/// Log-space coefficient of determination of `law` over `points`.
///
/// Returns `f64::NEG_INFINITY` when the observed log-losses have zero
/// variance; callers treat that sentinel as a failed fit.
pub fn r_squared(points: &[FitPoint], law: &PowerLaw) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 points".into()));
    }
    if let Some(p) = points.iter().find(|p| p.loss <= law.offset()) {
        return Err(Error::domain(format!(
            "loss {} at size {} is not above the offset {}",
            p.loss,
            p.size,
            law.offset()
        )));
    }
    let y: Vec<f64> = points.iter().map(|p| (p.loss - law.offset()).ln()).collect();
    let yhat: Vec<f64> = points.iter().map(|p| law.reducible(p.size).ln()).collect();
    Ok(log_r_squared(&y, &yhat))
}

fn log_r_squared(y: &[f64], yhat: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    if ss_tot == 0.0 {
        f64::NEG_INFINITY
    } else {
        1.0 - ss_res / ss_tot
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Fits a power law to one marginal slice of a grid, falling back to a rough
/// guess when the slice is too small or too irregular to fit.
fn slice_guess(points: &[FitPoint]) -> (f64, f64, f64) {
    if let Ok(rep) = fit_power_law(points, None) {
        return (rep.law.scale(), rep.law.exponent(), rep.law.offset());
    }
    let geo = points.iter().map(|p| p.size.ln()).sum::<f64>() / points.len().max(1) as f64;
    let min_loss = points.iter().map(|p| p.loss).fold(f64::INFINITY, f64::min);
    (geo.exp(), 0.5, 0.5 * min_loss)
}

fn joint_from_params(x: &[f64]) -> (f64, f64, f64, f64, f64) {
    (x[0].exp(), x[1].exp(), x[2].exp(), x[3].exp(), x[4] * x[4])
}

/// Fits a [`JointLaw`] by minimizing squared log-loss residuals.
pub fn fit_joint_law(records: &[JointObservation]) -> Result<FitReport<JointLaw>> {
    fit_joint_law_with(records, SimplexOptions::default())
}

pub fn fit_joint_law_with(records: &[JointObservation], opts: SimplexOptions) -> Result<FitReport<JointLaw>> {
    if records.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "need at least 6 records, got {}",
            records.len()
        )));
    }
    for r in records {
        JointObservation::new(r.model_size, r.data_size, r.loss)?;
    }
    let models = distinct(records.iter().map(|r| r.model_size));
    let datas = distinct(records.iter().map(|r| r.data_size));
    if models.len() < 2 || datas.len() < 2 {
        return Err(Error::InsufficientData(
            "records must span at least 2 model sizes and 2 data sizes".into(),
        ));
    }
    let max_model = *models.last().unwrap();
    let max_data = *datas.last().unwrap();

    // Model-size curve at the largest data size, data-size curve at the largest model.
    let model_slice: Vec<FitPoint> = records
        .iter()
        .filter(|r| r.data_size == max_data)
        .map(|r| FitPoint { size: r.model_size, loss: r.loss })
        .collect();
    let data_slice: Vec<FitPoint> = records
        .iter()
        .filter(|r| r.model_size == max_model)
        .map(|r| FitPoint { size: r.data_size, loss: r.loss })
        .collect();
    let (m0, mu0, d_model) = slice_guess(&model_slice);
    let (dscale0, eta0, d_data) = slice_guess(&data_slice);
    let offset0 = d_model.min(d_data).max(1e-6);

    let log_loss: Vec<f64> = records.iter().map(|r| r.loss.ln()).collect();
    let objective = |x: &[f64]| -> f64 {
        let (m, d, mu, eta, off) = joint_from_params(x);
        records
            .iter()
            .zip(&log_loss)
            .map(|(r, ll)| {
                let model_term = (m / r.model_size).powf(mu / eta);
                let pred = (model_term + d / r.data_size).powf(eta) + off;
                let e = ll - pred.ln();
                e * e
            })
            .sum()
    };

    let start = [m0.ln(), dscale0.ln(), mu0.ln(), eta0.ln(), offset0.sqrt()];
    let steps = [0.2, 0.2, 0.2, 0.2, 0.2 * offset0.sqrt() + 0.01];
    let result = simplex::minimize(objective, &start, &steps, opts);
    let (m, d, mu, eta, off) = joint_from_params(&result.point);
    let law = JointLaw::new(m, d, mu, eta, off)
        .map_err(|e| Error::FitFailure(format!("fitted joint coefficients invalid: {e}")))?;

    let yhat: Vec<f64> = records
        .iter()
        .map(|r| law.predict(r.model_size, r.data_size).ln())
        .collect();
    let residuals = log_loss.iter().zip(&yhat).map(|(a, b)| a - b).collect();
    let r2 = log_r_squared(&log_loss, &yhat);
    if !r2.is_finite() {
        return Err(Error::FitFailure("observed losses have zero variance".into()));
    }
    Ok(FitReport {
        law,
        r_squared: r2,
        residuals,
    })
}
