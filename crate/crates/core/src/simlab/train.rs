//! Gradient-descent training under the five strategies, plus evaluation.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{estimate_omega0, extract_non_dominated, Omega0, PerfPoint};
use crate::metrics::{evaluate, RankingQuery};
use crate::par;
use crate::scaling::Loss;

use super::attack::{attack_offsets, DEFAULT_ATTACK_STEPS, DEFAULT_EPSILON};
use super::encoder::{loss_and_grad_raw, Batch, EncoderParams};
use super::task::{Task, TestSplit};

const STREAM_TRAIN: u64 = 2;
/// Denoising corrupts positives with this multiple of the task's query noise.
const DENOISE_FACTOR: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Standard,
    HardNegative,
    Denoising,
    Adversarial,
    Pareto,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Standard,
        Strategy::HardNegative,
        Strategy::Denoising,
        Strategy::Adversarial,
        Strategy::Pareto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Standard => "standard",
            Strategy::HardNegative => "hard_negative",
            Strategy::Denoising => "denoising",
            Strategy::Adversarial => "adversarial",
            Strategy::Pareto => "pareto",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub steps: usize,
    pub batch: usize,
    pub negatives: usize,
    /// Starting Pareto weight on the robustness loss.
    pub omega0: f64,
    /// Weight whose reciprocal is the target `l_E / l_R`; defaults to `omega0`.
    pub omega_target: Option<f64>,
    pub weight_lr: f64,
    pub encoder_lr: f64,
    /// Share of robustness-oriented samples, or the fixed robustness weight
    /// for adversarial training.
    pub strategy_mix: f64,
    pub attack_epsilon: f64,
    pub attack_steps: usize,
    /// Negatives per query that the adversary perturbs.
    pub attacked_negatives: usize,
    /// Smoothing factor for the losses fed to the weight update; `None` uses
    /// the instantaneous batch losses.
    pub loss_ema: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            strategy: Strategy::Standard,
            steps: 2000,
            batch: 32,
            negatives: crate::metrics::DEFAULT_NEGATIVES,
            omega0: 0.5,
            omega_target: None,
            weight_lr: 0.1,
            encoder_lr: 0.01,
            strategy_mix: 0.5,
            attack_epsilon: DEFAULT_EPSILON,
            attack_steps: DEFAULT_ATTACK_STEPS,
            attacked_negatives: 9,
            loss_ema: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.negatives == 0 || self.attack_steps == 0 {
            return Err(Error::domain("batch, negatives and attack_steps must be positive"));
        }
        if self.attacked_negatives > self.negatives {
            return Err(Error::domain("attacked_negatives cannot exceed negatives"));
        }
        if !(self.omega0 > 0.0 && self.omega0 < 1.0) {
            return Err(Error::domain(format!("omega0 must lie in (0, 1), got {}", self.omega0)));
        }
        if let Some(t) = self.omega_target {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::domain("omega_target must be positive"));
            }
        }
        for (name, v) in [
            ("weight_lr", self.weight_lr),
            ("encoder_lr", self.encoder_lr),
            ("attack_epsilon", self.attack_epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.strategy_mix) {
            return Err(Error::domain("strategy_mix must lie in [0, 1]"));
        }
        if let Some(b) = self.loss_ema {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::domain("loss_ema must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepLosses {
    pub effectiveness: f64,
    /// Loss on the attacked batch, for strategies that compute one.
    pub robustness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub strategy: Strategy,
    pub train_pairs: usize,
    pub model_size: usize,
    pub seed: u64,
    pub effectiveness_ce: Loss,
    pub ood_ce: Loss,
    pub adversarial_ce: Loss,
    /// Mean of the OOD and adversarial CE.
    pub robustness_ce: Loss,
    /// Pareto weight before the first step and after each step; empty for
    /// other strategies.
    pub omega_trajectory: Vec<f64>,
    pub loss_trajectory: Vec<StepLosses>,
}

/// `clamp(omega - lr * (l_E / l_R - 1 / omega0_target), 0, 1)`.
pub fn pareto_weight_update(omega: f64, l_e: Loss, l_r: Loss, omega0_target: f64, lr: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::domain(format!("omega must lie in [0, 1], got {omega}")));
    }
    if l_r.value() == 0.0 {
        return Err(Error::domain("robustness loss is zero"));
    }
    if !(omega0_target > 0.0) {
        return Err(Error::domain("omega0 target must be positive"));
    }
    let raw = omega - lr * (l_e.value() / l_r.value() - 1.0 / omega0_target);
    Ok(raw.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub effectiveness_ce: Loss,
    pub ood_ce: Loss,
    pub adversarial_ce: Loss,
}

impl Evaluation {
    pub fn robustness_ce(&self) -> Result<Loss> {
        Loss::new(0.5 * (self.ood_ce.value() + self.adversarial_ce.value()))
    }
}

#[derive(Clone, Copy)]
enum Doc {
    Positive(usize),
    Negative { id: usize, attacked: bool },
}

fn split_ce(params: &EncoderParams, split: &TestSplit, attack: Option<(f64, usize, usize)>) -> Result<Loss> {
    let zq = params.encode(&split.queries);
    let zp = params.encode(&split.positives);
    let zc = params.encode(&split.corpus);
    let (gains, count) = match attack {
        Some((eps, steps, count)) => {
            let offsets = attack_offsets(params, split.queries.view(), eps, steps)?;
            let zo = params.encode(&offsets);
            ((&zq * &zo).sum_axis(Axis(1)).to_vec(), count)
        }
        None => (vec![0.0; split.queries.nrows()], 0),
    };
    let queries: Vec<RankingQuery<usize, Doc>> = (0..split.queries.nrows())
        .map(|i| RankingQuery {
            query: i,
            positive: Doc::Positive(i),
            negatives: split
                .negatives
                .row(i)
                .iter()
                .enumerate()
                .map(|(j, &id)| Doc::Negative { id, attacked: j < count })
                .collect(),
        })
        .collect();
    let scorer = |&i: &usize, d: &Doc| -> Result<f64> {
        let q = zq.row(i);
        Ok(match *d {
            Doc::Positive(p) => q.dot(&zp.row(p)),
            Doc::Negative { id, attacked } => q.dot(&zc.row(id)) + if attacked { gains[i] } else { 0.0 },
        })
    };
    evaluate(scorer, &queries)
}

/// Effectiveness on the in-distribution test split, OOD CE on the rotated
/// split, and adversarial CE on the test split with attacked negatives.
pub fn evaluate_encoder(params: &EncoderParams, task: &Task, cfg: &TrainConfig) -> Result<Evaluation> {
    let attack = (cfg.attack_epsilon, cfg.attack_steps, cfg.attacked_negatives.min(task.config.test_negatives));
    Ok(Evaluation {
        effectiveness_ce: split_ce(params, &task.test, None)?,
        ood_ce: split_ce(params, &task.ood, None)?,
        adversarial_ce: split_ce(params, &task.test, Some(attack))?,
    })
}

/// For each training document, corpus ids ordered by decreasing cosine
/// similarity, truncated to `k`.
fn hardest_negatives(task: &Task, k: usize) -> Vec<Vec<usize>> {
    let normalize = |x: &Array2<f64>| {
        let mut y = x.clone();
        for mut r in y.outer_iter_mut() {
            let n = r.dot(&r).sqrt();
            if n > 0.0 {
                r /= n;
            }
        }
        y
    };
    let docs = normalize(&task.train_docs);
    let corpus = normalize(&task.corpus);
    let chunk = 256;
    let starts: Vec<usize> = (0..docs.nrows()).step_by(chunk).collect();
    par::map(&starts, |&s| {
        let e = (s + chunk).min(docs.nrows());
        let sims = docs.slice(ndarray::s![s..e, ..]).dot(&corpus.t());
        sims.outer_iter()
            .map(|row| {
                let mut ids: Vec<usize> = (0..row.len()).collect();
                ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                ids.truncate(k);
                ids
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

fn gather(src: &Array2<f64>, ids: &[usize]) -> Array2<f64> {
    src.select(Axis(0), ids)
}

pub fn train(task: &Task, cfg: &TrainConfig) -> Result<RunResult> {
    cfg.validate()?;
    let tc = &task.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(STREAM_TRAIN);
    let mut params = EncoderParams::random(tc.encode_dim, tc.ambient_dim, &mut rng);

    let n_train = task.train_len();
    let corpus_n = task.corpus.nrows();
    let robust_share = |total: usize| ((cfg.strategy_mix * total as f64).round() as usize).min(total);
    let hard = if cfg.strategy == Strategy::HardNegative {
        let h = robust_share(cfg.negatives);
        hardest_negatives(task, h.div_ceil(cfg.batch).clamp(1, corpus_n))
    } else {
        Vec::new()
    };
    let target = cfg.omega_target.unwrap_or(cfg.omega0);

    let mut omega = cfg.omega0;
    let mut omega_trajectory = if cfg.strategy == Strategy::Pareto { vec![omega] } else { Vec::new() };
    let mut loss_trajectory = Vec::with_capacity(cfg.steps);
    let mut ema: Option<(f64, f64)> = None;

    for step in 0..cfg.steps {
        let idx: Vec<usize> = (0..cfg.batch).map(|_| rng.gen_range(0..n_train)).collect();
        let mut neg_ids: Vec<usize> = Vec::with_capacity(cfg.negatives);
        if cfg.strategy == Strategy::HardNegative {
            let h = robust_share(cfg.negatives);
            for s in 0..h {
                let pool = &hard[idx[s % cfg.batch]];
                neg_ids.push(pool[(s / cfg.batch).min(pool.len() - 1)]);
            }
        }
        while neg_ids.len() < cfg.negatives {
            neg_ids.push(rng.gen_range(0..corpus_n));
        }
        let queries = gather(&task.train_queries, &idx);
        let mut positives = gather(&task.train_docs, &idx);
        if cfg.strategy == Strategy::Denoising {
            let scale = DENOISE_FACTOR * tc.positive_noise;
            for mut row in positives.outer_iter_mut().take(robust_share(cfg.batch)) {
                row.mapv_inplace(|x| x + scale * rng.sample::<f64, _>(StandardNormal));
            }
        }
        let clean = Batch::new(queries, positives, gather(&task.corpus, &neg_ids))?;
        let (l_e, g_e) = loss_and_grad_raw(&params, &clean);
        if !l_e.is_finite() {
            return Err(Error::Diverged { step });
        }

        let (grad, l_r) = match cfg.strategy {
            Strategy::Adversarial | Strategy::Pareto => {
                let offsets = attack_offsets(&params, clean.queries.view(), cfg.attack_epsilon, cfg.attack_steps)?;
                let attacked = clean.with_attack(offsets, cfg.attacked_negatives)?;
                let (l_r, g_r) = loss_and_grad_raw(&params, &attacked);
                if !l_r.is_finite() {
                    return Err(Error::Diverged { step });
                }
                let w = if cfg.strategy == Strategy::Pareto { omega } else { cfg.strategy_mix };
                let mut g = g_e * (1.0 - w);
                g.scaled_add(w, &g_r);
                (g, Some(l_r))
            }
            _ => (g_e, None),
        };
        params.descend(&grad, cfg.encoder_lr);
        if params.weights().iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { step });
        }

        if let (Strategy::Pareto, Some(l_r)) = (cfg.strategy, l_r) {
            let (fe, fr) = match cfg.loss_ema {
                Some(beta) => {
                    let (pe, pr) = ema.unwrap_or((l_e, l_r));
                    let s = (beta * pe + (1.0 - beta) * l_e, beta * pr + (1.0 - beta) * l_r);
                    ema = Some(s);
                    s
                }
                None => (l_e, l_r),
            };
            omega = pareto_weight_update(omega, Loss::new(fe)?, Loss::new(fr)?, target, cfg.weight_lr)?;
            omega_trajectory.push(omega);
        }
        loss_trajectory.push(StepLosses {
            effectiveness: l_e,
            robustness: l_r,
        });
    }

    let ev = evaluate_encoder(&params, task, cfg)?;
    Ok(RunResult {
        strategy: cfg.strategy,
        train_pairs: n_train,
        model_size: tc.model_size(),
        seed: cfg.seed,
        effectiveness_ce: ev.effectiveness_ce,
        ood_ce: ev.ood_ce,
        adversarial_ce: ev.adversarial_ce,
        robustness_ce: ev.robustness_ce()?,
        omega_trajectory,
        loss_trajectory,
    })
}

/// Default robustness weights of the pilot grid.
pub const PILOT_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Initial Pareto weight from the knee of a pilot grid of fixed-weight
/// adversarial runs.
pub fn pilot_omega0(task: &Task, base: &TrainConfig, weights: &[f64]) -> Result<Omega0> {
    let runs = par::map(weights, |&w| {
        let cfg = TrainConfig {
            strategy: Strategy::Adversarial,
            strategy_mix: w,
            ..base.clone()
        };
        train(task, &cfg)
    });
    let points = runs
        .into_iter()
        .zip(weights)
        .map(|(r, w)| {
            let r = r?;
            PerfPoint::new(r.robustness_ce.value(), r.effectiveness_ce.value(), format!("w={w}"))
        })
        .collect::<Result<Vec<_>>>()?;
    estimate_omega0(&extract_non_dominated(&points)?)
}
