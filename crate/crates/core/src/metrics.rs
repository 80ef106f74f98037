//! Contrastive entropy and its benchmark average.
//!
//! Contrastive entropy is the negative log softmax probability of the positive
//! passage among the positive and its sampled negatives. It is the only
//! evaluation metric: effectiveness is CE on in-distribution test data, and
//! robustness is CE on shifted or attacked test data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::compensated_mean;
use crate::par;
use crate::scaling::Loss;

/// Default number of sampled negatives per query.
pub const DEFAULT_NEGATIVES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankingInstance {
    pub positive_score: f64,
    pub negative_scores: Vec<f64>,
}

impl RankingInstance {
    pub fn new(positive_score: f64, negative_scores: Vec<f64>) -> Result<Self> {
        if negative_scores.is_empty() {
            return Err(Error::domain("ranking instance needs at least one negative"));
        }
        Ok(RankingInstance {
            positive_score,
            negative_scores,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalSet {
    pub label: String,
    pub instances: Vec<RankingInstance>,
}

impl EvalSet {
    pub fn new(label: impl Into<String>, instances: Vec<RankingInstance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::domain("evaluation set must not be empty"));
        }
        Ok(EvalSet {
            label: label.into(),
            instances,
        })
    }

    /// Mean contrastive entropy over the set's instances.
    pub fn mean_ce(&self) -> Result<Loss> {
        let ces = par::map(&self.instances, contrastive_entropy);
        let ces: Vec<f64> = ces.into_iter().map(|r| r.map(Loss::value)).collect::<Result<_>>()?;
        Loss::new(compensated_mean(&ces))
    }
}

/// `-ln(exp(s+) / (exp(s+) + sum_j exp(s-_j)))` on raw scores.
///
/// Computed as a shifted log-sum-exp so scores of magnitude up to 1e4 neither
/// overflow nor lose the positive's contribution.
pub fn contrastive_entropy_scores(positive: f64, negatives: &[f64]) -> Result<f64> {
    if !positive.is_finite() || negatives.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("scores must be finite"));
    }
    if negatives.is_empty() {
        return Err(Error::domain("at least one negative score is required"));
    }
    Ok(ce_unchecked(positive, negatives))
}

#[inline]
pub(crate) fn ce_unchecked(positive: f64, negatives: &[f64]) -> f64 {
    let max_neg = negatives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_neg <= positive {
        // ln(1 + sum exp(s- - s+)), every exponent <= 0.
        let tail: f64 = negatives.iter().map(|s| (s - positive).exp()).sum();
        tail.ln_1p()
    } else {
        let sum: f64 = (positive - max_neg).exp() + negatives.iter().map(|s| (s - max_neg).exp()).sum::<f64>();
        (max_neg - positive) + sum.ln()
    }
}

pub fn contrastive_entropy(instance: &RankingInstance) -> Result<Loss> {
    let ce = contrastive_entropy_scores(instance.positive_score, &instance.negative_scores)?;
    Loss::new(ce)
}

/// Unweighted mean over sets of each set's mean CE; every dataset counts once
/// regardless of how many instances it holds.
pub fn average_contrastive_entropy(sets: &[EvalSet]) -> Result<Loss> {
    if sets.is_empty() {
        return Err(Error::domain("average contrastive entropy needs at least one set"));
    }
    let per_set: Vec<f64> = sets
        .iter()
        .map(|s| s.mean_ce().map(Loss::value))
        .collect::<Result<_>>()?;
    Loss::new(compensated_mean(&per_set))
}

/// A query with its positive document and sampled negatives, by reference.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingQuery<Q, D> {
    pub query: Q,
    pub positive: D,
    pub negatives: Vec<D>,
}

/// Scores every query of a test collection into an [`EvalSet`].
pub fn score_set<Q, D, F>(scorer: F, queries: &[RankingQuery<Q, D>], label: &str) -> Result<EvalSet>
where
    Q: Sync,
    D: Sync,
    F: Fn(&Q, &D) -> Result<f64> + Sync + Send,
{
    let instances = par::map(queries, |rq| -> Result<RankingInstance> {
        let positive_score = scorer(&rq.query, &rq.positive)?;
        let negative_scores = rq
            .negatives
            .iter()
            .map(|d| scorer(&rq.query, d))
            .collect::<Result<Vec<f64>>>()?;
        RankingInstance::new(positive_score, negative_scores)
    });
    let instances = instances.into_iter().collect::<Result<Vec<_>>>()?;
    EvalSet::new(label, instances)
}

/// Mean contrastive entropy of `scorer` over a test collection.
pub fn evaluate<Q, D, F>(scorer: F, queries: &[RankingQuery<Q, D>]) -> Result<Loss>
where
    Q: Sync,
    D: Sync,
    F: Fn(&Q, &D) -> Result<f64> + Sync + Send,
{
    score_set(scorer, queries, "eval")?.mean_ce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ce(pos: f64, neg: &[f64]) -> f64 {
        contrastive_entropy_scores(pos, neg).unwrap()
    }

    #[test]
    fn uniform_scores_give_log_one_plus_n() {
        assert!((ce(0.3, &[0.3; 256]) - 257f64.ln()).abs() < 1e-12);
        assert!((ce(0.3, &[0.3; 256]) - 5.549_076_084_895_22).abs() < 1e-10);
    }

    #[test]
    fn single_negative_reference() {
        // 40-digit reference for ln(1 + e^-1).
        assert!((ce(1.0, &[0.0]) - 0.313_261_687_518_222_8).abs() < 1e-15);
    }

    #[test]
    fn saturated_positive() {
        let v = ce(1e3, &[0.0; 256]);
        assert!((0.0..1e-300).contains(&v));
        // Negatives far above the positive stay finite.
        let v = ce(-1e4, &[1e4, 0.0]);
        assert!((v - 2e4).abs() < 1e-9);
    }

    #[test]
    fn rejects_nan_and_empty() {
        assert!(contrastive_entropy_scores(f64::NAN, &[0.0]).is_err());
        assert!(contrastive_entropy_scores(0.0, &[f64::NAN]).is_err());
        assert!(contrastive_entropy_scores(0.0, &[]).is_err());
        assert!(RankingInstance::new(0.0, vec![]).is_err());
        assert!(EvalSet::new("x", vec![]).is_err());
        assert!(average_contrastive_entropy(&[]).is_err());
    }

    fn set_with_ce(label: &str, target: f64, n: usize) -> EvalSet {
        // One negative: ln(1 + e^(s- - s+)) = target  =>  s- = ln(e^target - 1).
        let neg = (target.exp() - 1.0).ln();
        let inst = RankingInstance::new(0.0, vec![neg]).unwrap();
        EvalSet::new(label, vec![inst; n]).unwrap()
    }

    #[test]
    fn ace_is_set_level_mean() {
        let one = EvalSet::new("u", vec![RankingInstance::new(0.0, vec![0.0; 256]).unwrap()]).unwrap();
        assert!((average_contrastive_entropy(&[one]).unwrap().value() - 257f64.ln()).abs() < 1e-12);

        let two = [set_with_ce("a", 1.0, 3), set_with_ce("b", 3.0, 1)];
        assert!((average_contrastive_entropy(&two).unwrap().value() - 2.0).abs() < 1e-12);

        let sets = [set_with_ce("a", 0.5, 1), set_with_ce("b", 1.0, 10), set_with_ce("c", 1.5, 100)];
        let ace = average_contrastive_entropy(&sets).unwrap().value();
        assert!((ace - 1.0).abs() < 1e-12);
        // The instance-weighted mean is different.
        let weighted = (0.5 + 10.0 + 150.0) / 111.0;
        assert!((ace - weighted).abs() > 0.3);
    }

    #[test]
    fn evaluate_constant_and_oracle_scorers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let docs: Vec<[f64; 4]> = (0..300).map(|_| rng.gen::<[f64; 4]>().map(|v| v - 0.5)).collect();
        let queries: Vec<RankingQuery<[f64; 4], usize>> = (0..40)
            .map(|i| RankingQuery {
                query: docs[i],
                positive: i,
                negatives: (0..32).map(|j| 40 + (i * 7 + j * 13) % 260).collect(),
            })
            .collect();
        let constant = evaluate(|_q, _d| Ok(1.5), &queries).unwrap();
        assert!((constant.value() - 33f64.ln()).abs() < 1e-12);

        let truth = |q: &[f64; 4], d: &usize| -> Result<f64> {
            Ok(10.0 * q.iter().zip(&docs[*d]).map(|(a, b)| a * b).sum::<f64>())
        };
        let good = evaluate(truth, &queries).unwrap();
        assert!(good.value() < constant.value());

        let mut reversed = queries.clone();
        reversed.reverse();
        assert_eq!(evaluate(truth, &reversed).unwrap(), good);

        let failing = evaluate(|_q, _d| Err(Error::domain("boom")), &queries);
        assert!(failing.is_err());
    }

    proptest! {
        #[test]
        fn shift_invariance(pos in -50.0f64..50.0, negs in prop::collection::vec(-50.0f64..50.0, 1..64), c in -100.0f64..100.0) {
            let shifted: Vec<f64> = negs.iter().map(|s| s + c).collect();
            prop_assert!((ce(pos, &negs) - ce(pos + c, &shifted)).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_scores(pos in -5.0f64..5.0, negs in prop::collection::vec(-5.0f64..5.0, 1..64), bump in 1e-3f64..5.0, idx in 0usize..64) {
            let base = ce(pos, &negs);
            prop_assert!(base > 0.0);
            prop_assert!(ce(pos + bump, &negs) < base);
            let mut up = negs.clone();
            let j = idx % up.len();
            up[j] += bump;
            prop_assert!(ce(pos, &up) > base);
        }

        #[test]
        fn dominated_negative_is_negligible(pos in -10.0f64..10.0, negs in prop::collection::vec(-10.0f64..10.0, 1..64)) {
            let max = negs.iter().copied().fold(pos, f64::max);
            let mut more = negs.clone();
            more.push(max - 200.0);
            prop_assert!((ce(pos, &more) - ce(pos, &negs)).abs() < 1e-12);
        }

        #[test]
        fn stable_at_large_magnitude(pos in -1e4f64..1e4, negs in prop::collection::vec(-1e4f64..1e4, 1..32)) {
            let v = ce(pos, &negs);
            prop_assert!(v.is_finite() && v >= 0.0);
        }
    }
}
