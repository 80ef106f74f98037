//! Synthetic retrieval task: Gaussian documents, noisy queries, and a
//! rotated out-of-distribution copy of the test split.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::log_space;

// Independent RNG streams so that changing the number of training pairs
// leaves the corpus and test data untouched.
const STREAM_SHARED: u64 = 0;
const STREAM_TRAIN: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub ambient_dim: usize,
    pub encode_dim: usize,
    pub train_pairs: usize,
    /// Scale of the query noise around its positive document; the
    /// annotation-quality knob.
    pub positive_noise: f64,
    /// Per-coordinate noise multipliers are log-spaced from `noise_low` to
    /// `noise_high`, so some directions are more reliable than others.
    pub noise_low: f64,
    pub noise_high: f64,
    pub ood_rotation_angle: f64,
    pub corpus_size: usize,
    pub test_queries: usize,
    pub test_negatives: usize,
    pub seed: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            ambient_dim: 64,
            encode_dim: 16,
            train_pairs: 4000,
            positive_noise: 1.0,
            noise_low: 0.3,
            noise_high: 3.0,
            ood_rotation_angle: 0.5,
            corpus_size: 4096,
            test_queries: 2048,
            test_negatives: crate::metrics::DEFAULT_NEGATIVES,
            seed: 0,
        }
    }
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim < 2 {
            return Err(Error::domain("ambient_dim must be at least 2"));
        }
        if self.encode_dim == 0 || self.encode_dim > self.ambient_dim {
            return Err(Error::domain("encode_dim must lie in 1..=ambient_dim"));
        }
        if self.train_pairs == 0 || self.corpus_size == 0 || self.test_queries == 0 || self.test_negatives == 0 {
            return Err(Error::domain("train_pairs, corpus_size, test_queries and test_negatives must be positive"));
        }
        if !(self.positive_noise.is_finite() && self.positive_noise >= 0.0) {
            return Err(Error::domain("positive_noise must be finite and non-negative"));
        }
        if !(self.noise_low > 0.0 && self.noise_high >= self.noise_low && self.noise_high.is_finite()) {
            return Err(Error::domain("noise profile needs 0 < noise_low <= noise_high"));
        }
        if !self.ood_rotation_angle.is_finite() {
            return Err(Error::domain("ood_rotation_angle must be finite"));
        }
        Ok(())
    }

    /// Encoder parameter count, the model-size axis of simlab runs.
    pub fn model_size(&self) -> usize {
        self.encode_dim * self.ambient_dim
    }

    pub fn noise_profile(&self) -> Vec<f64> {
        log_space(self.noise_low, self.noise_high, self.ambient_dim)
    }
}

/// Test queries with their positives and negative ids into `corpus`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestSplit {
    pub queries: Array2<f64>,
    pub positives: Array2<f64>,
    pub corpus: Array2<f64>,
    /// `test_queries x test_negatives` row ids into `corpus`.
    pub negatives: Array2<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub config: TaskConfig,
    pub train_queries: Array2<f64>,
    pub train_docs: Array2<f64>,
    pub corpus: Array2<f64>,
    pub test: TestSplit,
    pub ood: TestSplit,
    pub rotation: Array2<f64>,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Draws `rows` (query, document) pairs, one pair at a time so that a longer
/// draw extends a shorter one.
fn pairs(rng: &mut ChaCha8Rng, rows: usize, noise: f64, profile: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let a = profile.len();
    let mut docs = Array2::zeros((rows, a));
    let mut queries = Array2::zeros((rows, a));
    for i in 0..rows {
        for j in 0..a {
            docs[[i, j]] = rng.sample::<f64, _>(StandardNormal);
        }
        for j in 0..a {
            let z: f64 = rng.sample(StandardNormal);
            queries[[i, j]] = if noise == 0.0 { docs[[i, j]] } else { docs[[i, j]] + noise * profile[j] * z };
        }
    }
    (queries, docs)
}

/// Rotation by `angle` in the plane spanned by a random unit vector from the
/// low-noise half of the coordinates and one from the high-noise half.
fn plane_rotation(rng: &mut ChaCha8Rng, a: usize, angle: f64) -> Array2<f64> {
    let h = a / 2;
    let mut u = Array1::<f64>::zeros(a);
    let mut v = Array1::<f64>::zeros(a);
    for j in 0..a {
        let z: f64 = rng.sample(StandardNormal);
        if j < h {
            u[j] = z;
        } else {
            v[j] = z;
        }
    }
    u /= u.dot(&u).sqrt();
    v /= v.dot(&v).sqrt();
    let mut r = Array2::<f64>::eye(a);
    if angle == 0.0 {
        return r;
    }
    let (c, s) = (angle.cos(), angle.sin());
    for i in 0..a {
        for j in 0..a {
            r[[i, j]] += (c - 1.0) * (u[i] * u[j] + v[i] * v[j]) + s * (v[i] * u[j] - u[i] * v[j]);
        }
    }
    r
}

pub fn generate_task(config: &TaskConfig) -> Result<Task> {
    config.validate()?;
    let a = config.ambient_dim;
    let profile = config.noise_profile();

    let mut train_rng = stream(config.seed, STREAM_TRAIN);
    let (train_queries, train_docs) = pairs(&mut train_rng, config.train_pairs, config.positive_noise, &profile);

    let mut rng = stream(config.seed, STREAM_SHARED);
    let corpus = gaussian_rows(&mut rng, config.corpus_size, a);
    let (queries, positives) = pairs(&mut rng, config.test_queries, config.positive_noise, &profile);
    let negatives = Array2::from_shape_simple_fn((config.test_queries, config.test_negatives), || {
        rng.gen_range(0..config.corpus_size)
    });
    let rotation = plane_rotation(&mut rng, a, config.ood_rotation_angle);

    let rotate = |x: &Array2<f64>| {
        if config.ood_rotation_angle == 0.0 {
            x.clone()
        } else {
            x.dot(&rotation.t())
        }
    };
    let ood = TestSplit {
        queries: rotate(&queries),
        positives: rotate(&positives),
        corpus: rotate(&corpus),
        negatives: negatives.clone(),
    };
    let test = TestSplit {
        queries,
        positives,
        corpus: corpus.clone(),
        negatives,
    };
    Ok(Task {
        config: config.clone(),
        train_queries,
        train_docs,
        corpus,
        test,
        ood,
        rotation,
    })
}

impl Task {
    pub fn train_len(&self) -> usize {
        self.train_docs.len_of(Axis(0))
    }
}
