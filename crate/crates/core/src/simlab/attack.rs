//! Embedding-space ranking attack: push a document toward a query inside an
//! infinity-norm ball.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

use super::encoder::EncoderParams;

pub const DEFAULT_EPSILON: f64 = 0.2;
pub const DEFAULT_ATTACK_STEPS: usize = 5;

fn check(epsilon: f64, steps: usize) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!("attack epsilon must be positive, got {epsilon}")));
    }
    if steps == 0 {
        return Err(Error::domain("attack needs at least one step"));
    }
    Ok(())
}

/// Sign-gradient ascent on `Rel(query, .)` with step `epsilon / steps`,
/// projected onto the `epsilon` ball around `document`. A step is kept only
/// if it does not lower relevance.
pub fn adversarial_perturb(
    params: &EncoderParams,
    query: ArrayView1<f64>,
    document: ArrayView1<f64>,
    epsilon: f64,
    steps: usize,
) -> Result<Array1<f64>> {
    check(epsilon, steps)?;
    let grad = params.gram().dot(&query);
    let mut cur = document.to_owned();
    let mut rel = params.relevance(query, cur.view());
    for _ in 0..steps {
        let cand = step(&grad, cur.view(), document, epsilon, steps);
        let r = params.relevance(query, cand.view());
        if r >= rel {
            cur = cand;
            rel = r;
        }
    }
    Ok(cur)
}

fn step(grad: &Array1<f64>, cur: ArrayView1<f64>, origin: ArrayView1<f64>, epsilon: f64, steps: usize) -> Array1<f64> {
    let size = epsilon / steps as f64;
    let mut out = cur.to_owned();
    for ((x, &g), &o) in out.iter_mut().zip(grad.iter()).zip(origin.iter()) {
        let s = if g > 0.0 {
            1.0
        } else if g < 0.0 {
            -1.0
        } else {
            0.0
        };
        *x = (*x + size * s).clamp(o - epsilon, o + epsilon);
    }
    out
}

/// Attack offsets for each query row. Relevance is linear in the document,
/// so the attack moves every document by the same query-specific offset;
/// this is that offset, computed once per query.
pub fn attack_offsets(params: &EncoderParams, queries: ArrayView2<f64>, epsilon: f64, steps: usize) -> Result<Array2<f64>> {
    check(epsilon, steps)?;
    let grads = queries.dot(&params.gram());
    let zero = Array1::<f64>::zeros(queries.ncols());
    let mut out = Array2::zeros(queries.raw_dim());
    for (g, mut row) in grads.outer_iter().zip(out.outer_iter_mut()) {
        let g = g.to_owned();
        let mut cur = zero.clone();
        for _ in 0..steps {
            let cand = step(&g, cur.view(), zero.view(), epsilon, steps);
            // Linear relevance: the step helps iff it moves along the gradient.
            if g.dot(&(&cand - &cur)) >= 0.0 {
                cur = cand;
            }
        }
        row.assign(&cur);
    }
    Ok(out)
}
