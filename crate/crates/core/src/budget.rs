//! Dollar cost of a (model, data) configuration and budget-constrained
//! allocation under two joint scaling laws.
//!
//! Both laws decrease in data size, so for any model size the best use of the
//! remaining budget is to buy as much data as it affords. The allocator
//! therefore searches a single dimension; [`grid_oracle`] searches both and is
//! used to check that shortcut.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{golden_section, log_space};
use crate::par;
use crate::scaling::JointLaw;

/// Model-size grid used by [`allocate`] before refinement.
pub const ALLOCATION_GRID: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCostModel")]
pub struct CostModel {
    z_data: f64,
    z_train: f64,
    z_infer: f64,
    data_unit: f64,
    model_unit: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCostModel {
    z_data: f64,
    z_train: f64,
    z_infer: f64,
    data_unit: f64,
    model_unit: f64,
}

impl TryFrom<RawCostModel> for CostModel {
    type Error = Error;
    fn try_from(r: RawCostModel) -> Result<Self> {
        CostModel::new(r.z_data, r.z_train, r.z_infer, r.data_unit, r.model_unit)
    }
}

impl CostModel {
    pub const DEFAULT_Z_DATA: f64 = 0.6;
    pub const DEFAULT_Z_TRAIN: f64 = 3.22e-8;
    pub const DEFAULT_Z_INFER: f64 = 0.43;

    pub fn new(z_data: f64, z_train: f64, z_infer: f64, data_unit: f64, model_unit: f64) -> Result<Self> {
        for (name, v) in [("z_data", z_data), ("z_train", z_train), ("z_infer", z_infer)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        for (name, v) in [("data_unit", data_unit), ("model_unit", model_unit)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(CostModel {
            z_data,
            z_train,
            z_infer,
            data_unit,
            model_unit,
        })
    }

    /// Default cost factors with one unit per pair and one per parameter.
    pub fn standard() -> Self {
        CostModel {
            z_data: Self::DEFAULT_Z_DATA,
            z_train: Self::DEFAULT_Z_TRAIN,
            z_infer: Self::DEFAULT_Z_INFER,
            data_unit: 1.0,
            model_unit: 1.0,
        }
    }

    /// Default cost factors with model size counted in millions of parameters.
    pub fn standard_per_million() -> Self {
        CostModel {
            model_unit: 1e-6,
            ..Self::standard()
        }
    }

    pub fn z_data(&self) -> f64 {
        self.z_data
    }

    pub fn z_train(&self) -> f64 {
        self.z_train
    }

    pub fn z_infer(&self) -> f64 {
        self.z_infer
    }

    pub fn data_unit(&self) -> f64 {
        self.data_unit
    }

    pub fn model_unit(&self) -> f64 {
        self.model_unit
    }

    /// Dollars per query-passage pair.
    pub fn data_rate(&self) -> f64 {
        self.z_data * self.data_unit
    }

    /// Dollars per parameter, training plus inference.
    pub fn model_rate(&self) -> f64 {
        (self.z_train + self.z_infer) * self.model_unit
    }

    /// Largest data size affordable once `model` is paid for.
    pub fn max_data(&self, budget: f64, model: f64) -> f64 {
        (budget - self.model_rate() * model) / self.data_rate()
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::standard()
    }
}

/// Total dollars for a model of `model` parameters trained on `data` pairs.
/// Sizes are continuous; zero is allowed.
pub fn total_cost(cm: &CostModel, model: f64, data: f64) -> f64 {
    cm.data_rate() * data + cm.model_rate() * model
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Allocation {
    pub model_size: f64,
    pub data_size: f64,
    pub cost: f64,
    pub predicted_robustness: f64,
    pub predicted_effectiveness: f64,
    pub objective: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub model_size: f64,
    pub data_size: f64,
    pub predicted_robustness: f64,
    pub predicted_effectiveness: f64,
}

fn check_inputs(budget: f64, cm: &CostModel) -> Result<f64> {
    if cm.data_rate() <= 0.0 || cm.model_rate() <= 0.0 {
        return Err(Error::domain("allocation needs positive data and model cost rates"));
    }
    if !(budget.is_finite() && budget > total_cost(cm, 1.0, 1.0)) {
        return Err(Error::Infeasible(format!(
            "budget {budget} does not cover the minimum configuration costing {}",
            total_cost(cm, 1.0, 1.0)
        )));
    }
    // Largest model leaving room for one data pair.
    Ok((budget - cm.data_rate()) / cm.model_rate())
}

/// Data size that exhausts the budget, nudged down so rounding never
/// overspends.
fn exhaust_data(budget: f64, cm: &CostModel, model: f64) -> f64 {
    let mut d = cm.max_data(budget, model).max(1.0);
    while d > 1.0 && total_cost(cm, model, d) > budget {
        d = (d * (1.0 - 4.0 * f64::EPSILON)).max(1.0);
    }
    d
}

fn weighted(weight: f64, rob: f64, eff: f64) -> f64 {
    weight * rob + (1.0 - weight) * eff
}

fn check_weight(weight: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::domain(format!("weight must lie in [0, 1], got {weight}")));
    }
    Ok(())
}

fn allocation_at(budget: f64, robustness: &JointLaw, effectiveness: &JointLaw, cm: &CostModel, weight: f64, model: f64) -> Allocation {
    let data = exhaust_data(budget, cm, model);
    let r = robustness.predict(model, data);
    let e = effectiveness.predict(model, data);
    Allocation {
        model_size: model,
        data_size: data,
        cost: total_cost(cm, model, data),
        predicted_robustness: r,
        predicted_effectiveness: e,
        objective: weighted(weight, r, e),
    }
}

/// Minimizes `weight * robustness + (1 - weight) * effectiveness` over all
/// configurations costing at most `budget`.
pub fn allocate(
    budget: f64,
    robustness: &JointLaw,
    effectiveness: &JointLaw,
    cm: &CostModel,
    weight: f64,
) -> Result<Allocation> {
    check_weight(weight)?;
    let fmax = check_inputs(budget, cm)?;
    let grid = log_space(1.0, fmax, ALLOCATION_GRID);
    let objective = |m: f64| allocation_at(budget, robustness, effectiveness, cm, weight, m).objective;
    let values = par::map(&grid, |&m| objective(m));
    let best = par::argmin(&values).ok_or_else(|| Error::domain("objective is NaN on the whole grid"))?;

    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();
    let (x, fx) = golden_section(|t| objective(t.exp()), lo, hi, 1e-10);
    let model = if fx < values[best] { x.exp().clamp(1.0, fmax) } else { grid[best] };
    Ok(allocation_at(budget, robustness, effectiveness, cm, weight, model))
}

/// Both predicted losses along a log grid of model sizes, each paired with
/// the largest data size the remaining budget buys.
pub fn budget_sweep(
    budget: f64,
    robustness: &JointLaw,
    effectiveness: &JointLaw,
    cm: &CostModel,
    grid: usize,
) -> Result<Vec<SweepPoint>> {
    let fmax = check_inputs(budget, cm)?;
    let sizes = log_space(1.0, fmax, grid);
    Ok(par::map(&sizes, |&m| {
        let d = exhaust_data(budget, cm, m);
        SweepPoint {
            model_size: m,
            data_size: d,
            predicted_robustness: robustness.predict(m, d),
            predicted_effectiveness: effectiveness.predict(m, d),
        }
    })
    .into_iter()
    .filter(|p| total_cost(cm, p.model_size, p.data_size) <= budget)
    .collect())
}

/// Brute-force minimum over an `n x n` log grid in both model and data size,
/// keeping only affordable cells. Makes no use of the data-exhaustion shortcut.
pub fn grid_oracle(
    budget: f64,
    robustness: &JointLaw,
    effectiveness: &JointLaw,
    cm: &CostModel,
    weight: f64,
    n: usize,
) -> Result<Allocation> {
    check_weight(weight)?;
    let fmax = check_inputs(budget, cm)?;
    let dmax = cm.max_data(budget, 1.0);
    let models = log_space(1.0, fmax, n);
    let datas = log_space(1.0, dmax, n);
    let rows = par::map(&models, |&m| {
        let mut best: Option<Allocation> = None;
        for &d in &datas {
            let cost = total_cost(cm, m, d);
            if cost > budget {
                break;
            }
            let r = robustness.predict(m, d);
            let e = effectiveness.predict(m, d);
            let obj = weighted(weight, r, e);
            if best.is_none_or(|b| obj < b.objective) {
                best = Some(Allocation {
                    model_size: m,
                    data_size: d,
                    cost,
                    predicted_robustness: r,
                    predicted_effectiveness: e,
                    objective: obj,
                });
            }
        }
        best
    });
    let objectives: Vec<f64> = rows.iter().map(|r| r.map_or(f64::NAN, |a| a.objective)).collect();
    let i = par::argmin(&objectives).ok_or_else(|| Error::Infeasible("no affordable grid cell".into()))?;
    Ok(rows[i].expect("argmin skips empty rows"))
}
