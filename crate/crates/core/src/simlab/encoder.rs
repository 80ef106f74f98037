//! Shared linear encoder and the contrastive ranking loss with its gradient.
//!
//! Queries and documents go through the same map `x -> W x`, and relevance is
//! the dot product of the two codes, `Rel(q, d) = q^T W^T W d`.

use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::compensated_mean;
use crate::scaling::Loss;

const INIT_SCALE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    weights: Array2<f64>,
}

impl EncoderParams {
    /// `weights` is `encode_dim x ambient_dim`.
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("encoder weights must be finite"));
        }
        Ok(EncoderParams { weights })
    }

    pub fn zeros(encode_dim: usize, ambient_dim: usize) -> Self {
        EncoderParams {
            weights: Array2::zeros((encode_dim, ambient_dim)),
        }
    }

    pub fn random<R: Rng>(encode_dim: usize, ambient_dim: usize, rng: &mut R) -> Self {
        EncoderParams {
            weights: Array2::from_shape_simple_fn((encode_dim, ambient_dim), || {
                INIT_SCALE * rng.sample::<f64, _>(StandardNormal)
            }),
        }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn encode_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Encodes each row of `x`.
    pub fn encode(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weights.t())
    }

    pub fn relevance(&self, query: ArrayView1<f64>, document: ArrayView1<f64>) -> f64 {
        self.weights.dot(&query).dot(&self.weights.dot(&document))
    }

    /// `W^T W`, the gradient of `Rel(q, .)` is `W^T W q`.
    pub fn gram(&self) -> Array2<f64> {
        self.weights.t().dot(&self.weights)
    }

    pub(crate) fn descend(&mut self, grad: &Array2<f64>, lr: f64) {
        self.weights.scaled_add(-lr, grad);
    }
}

/// Perturbation added to the first `count` shared negatives of each query.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativeAttack {
    /// One row per query.
    pub offsets: Array2<f64>,
    pub count: usize,
}

/// A training batch: one positive per query and a pool of negatives shared
/// by every query in the batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub queries: Array2<f64>,
    pub positives: Array2<f64>,
    pub negatives: Array2<f64>,
    pub attack: Option<NegativeAttack>,
}

impl Batch {
    pub fn new(queries: Array2<f64>, positives: Array2<f64>, negatives: Array2<f64>) -> Result<Self> {
        let b = queries.nrows();
        if b == 0 || negatives.nrows() == 0 {
            return Err(Error::domain("batch needs at least one query and one negative"));
        }
        let a = queries.ncols();
        if positives.dim() != (b, a) || negatives.ncols() != a {
            return Err(Error::domain("batch shapes disagree"));
        }
        Ok(Batch {
            queries,
            positives,
            negatives,
            attack: None,
        })
    }

    pub fn with_attack(mut self, offsets: Array2<f64>, count: usize) -> Result<Self> {
        if offsets.dim() != self.queries.dim() || count > self.negatives.nrows() {
            return Err(Error::domain("attack offsets must match the queries and count the negatives"));
        }
        self.attack = Some(NegativeAttack { offsets, count });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.queries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.nrows() == 0
    }
}

/// Batch-mean contrastive loss and its exact gradient in `W`, through both
/// the query and the document paths. The raw loss may be non-finite.
pub(crate) fn loss_and_grad_raw(params: &EncoderParams, batch: &Batch) -> (f64, Array2<f64>) {
    let w = &params.weights;
    let b = batch.len();
    let n = batch.negatives.nrows();
    let zq = params.encode(&batch.queries);
    let zp = params.encode(&batch.positives);
    let zn = params.encode(&batch.negatives);

    let pos: Array1<f64> = (&zq * &zp).sum_axis(Axis(1));
    let mut neg = zq.dot(&zn.t());
    if let Some(att) = &batch.attack {
        let gain = (&zq * &params.encode(&att.offsets)).sum_axis(Axis(1));
        for (mut row, g) in neg.outer_iter_mut().zip(gain.iter()) {
            row.slice_mut(ndarray::s![..att.count]).mapv_inplace(|s| s + g);
        }
    }

    // Softmax coefficients: c_i0 = (p_i0 - 1) / B, c_ij = p_ij / B.
    let mut ces = Vec::with_capacity(b);
    let mut c0 = Array1::<f64>::zeros(b);
    let mut cn = Array2::<f64>::zeros((b, n));
    for i in 0..b {
        let row = neg.row(i);
        let m = row.iter().copied().fold(pos[i], f64::max);
        let e0 = (pos[i] - m).exp();
        let tail: f64 = row.iter().map(|s| (s - m).exp()).sum();
        let z = e0 + tail;
        // A dominant positive leaves a loss far below 1; ln_1p keeps its digits.
        ces.push(if m == pos[i] { tail.ln_1p() } else { z.ln() + m - pos[i] });
        c0[i] = -tail / z / b as f64;
        Zip::from(cn.row_mut(i))
            .and(row)
            .for_each(|c, &s| *c = (s - m).exp() / z / b as f64);
    }

    // U_i = sum_j c_ij x_ij, the coefficient-weighted documents of query i.
    let mut u = cn.dot(&batch.negatives);
    Zip::from(u.rows_mut())
        .and(batch.positives.rows())
        .and(&c0)
        .for_each(|mut ui, pi, &c| ui.scaled_add(c, &pi));
    if let Some(att) = &batch.attack {
        for i in 0..b {
            let mass: f64 = cn.row(i).slice(ndarray::s![..att.count]).sum();
            u.row_mut(i).scaled_add(mass, &att.offsets.row(i));
        }
    }
    let qu = batch.queries.t().dot(&u);
    let sym = &qu + &qu.t();
    (compensated_mean(&ces), w.dot(&sym))
}

pub fn contrastive_loss_and_grad(params: &EncoderParams, batch: &Batch) -> Result<(Loss, Array2<f64>)> {
    let (loss, grad) = loss_and_grad_raw(params, batch);
    Ok((Loss::new(loss)?, grad))
}
