//! Ranking and thresholded classification metrics for multi-label
//! evaluation: P@k, nDCG@k, mAP, and micro-F1.
//!
//! All rankings break score ties by ascending index, so every metric is a
//! deterministic function of its inputs. The rank-based metrics depend on
//! scores only through their ordering.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Per-sample scores and binary relevance over a fixed class set.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPrediction {
    scores: Vec<f64>,
    truth: Vec<u8>,
}

impl RankedPrediction {
    pub fn new(scores: Vec<f64>, truth: Vec<u8>) -> Result<RankedPrediction> {
        if scores.is_empty() || scores.len() != truth.len() {
            return Err(Error::ShapeMismatch {
                expected: (1, scores.len()),
                got: (1, truth.len()),
            });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteInput { what: "scores" });
        }
        if truth.iter().any(|&y| y > 1) {
            return Err(Error::InvalidSpec("truth must be exactly 0 or 1".into()));
        }
        Ok(RankedPrediction { scores, truth })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn truth(&self) -> &[u8] {
        &self.truth
    }

    fn n_relevant(&self) -> usize {
        self.truth.iter().map(|&y| y as usize).sum()
    }
}

/// Named metric values for one evaluation run, every value in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    values: BTreeMap<String, f64>,
    n_samples: usize,
}

impl MetricReport {
    pub fn new(n_samples: usize) -> MetricReport {
        MetricReport {
            values: BTreeMap::new(),
            n_samples,
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value), "metric outside [0, 1]");
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// JSON object with keys in sorted order and values printed to six
    /// decimal places.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{k}\":{v:.6}"));
        }
        out.push('}');
        out
    }
}

fn class_count(preds: &[RankedPrediction]) -> Result<usize> {
    let first = preds
        .first()
        .ok_or_else(|| Error::InvalidSpec("empty prediction set".into()))?;
    let c = first.scores.len();
    for p in preds {
        if p.scores.len() != c {
            return Err(Error::ShapeMismatch {
                expected: (1, c),
                got: (1, p.scores.len()),
            });
        }
    }
    Ok(c)
}

/// Indices sorted by descending score, ties broken by ascending index.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    idx
}

/// Mean over samples of the fraction of relevant classes among the top-k
/// scored classes.
pub fn precision_at_k(preds: &[RankedPrediction], k: usize) -> Result<f64> {
    let c = class_count(preds)?;
    if k < 1 || k > c {
        return Err(Error::InvalidSpec(format!("k={k} outside 1..={c}")));
    }
    let mut acc = 0.0;
    for pred in preds {
        let ranked = ranking(&pred.scores);
        let hits: usize = ranked[..k].iter().map(|&i| pred.truth[i] as usize).sum();
        acc += hits as f64 / k as f64;
    }
    Ok(acc / preds.len() as f64)
}

fn log2_discount(rank0: usize) -> f64 {
    ((rank0 + 2) as f64).log2()
}

/// Mean normalized discounted cumulative gain at k with binary gains and
/// `1/log2(rank + 1)` discounts. The ideal DCG truncates at
/// `min(k, relevant count)`; samples without relevant labels are excluded
/// from the mean, and an all-empty set is an error.
pub fn ndcg_at_k(preds: &[RankedPrediction], k: usize) -> Result<f64> {
    let c = class_count(preds)?;
    if k < 1 || k > c {
        return Err(Error::InvalidSpec(format!("k={k} outside 1..={c}")));
    }
    let mut acc = 0.0;
    let mut counted = 0usize;
    for pred in preds {
        let relevant = pred.n_relevant();
        if relevant == 0 {
            continue;
        }
        let ranked = ranking(&pred.scores);
        let mut dcg = 0.0;
        for (rank0, &class) in ranked[..k].iter().enumerate() {
            if pred.truth[class] == 1 {
                dcg += 1.0 / log2_discount(rank0);
            }
        }
        let mut idcg = 0.0;
        for rank0 in 0..k.min(relevant) {
            idcg += 1.0 / log2_discount(rank0);
        }
        acc += dcg / idcg;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::UndefinedMetric(
            "no sample has a relevant label".into(),
        ));
    }
    Ok(acc / counted as f64)
}

/// Mean average precision, computed per class across the sample axis.
///
/// For each class, samples are ranked by their score for that class and
/// AP averages the precision at each positive hit; mAP averages AP over
/// classes with at least one positive.
pub fn mean_average_precision(preds: &[RankedPrediction]) -> Result<f64> {
    let c = class_count(preds)?;
    let mut ap_sum = 0.0;
    let mut classes_counted = 0usize;
    let mut column = vec![0.0; preds.len()];
    for class in 0..c {
        for (i, pred) in preds.iter().enumerate() {
            column[i] = pred.scores[class];
        }
        let positives: usize = preds.iter().map(|p| p.truth[class] as usize).sum();
        if positives == 0 {
            continue;
        }
        let order = ranking(&column);
        let mut hits = 0usize;
        let mut ap_acc = 0.0;
        for (rank0, &sample) in order.iter().enumerate() {
            if preds[sample].truth[class] == 1 {
                hits += 1;
                ap_acc += hits as f64 / (rank0 + 1) as f64;
            }
        }
        ap_sum += ap_acc / positives as f64;
        classes_counted += 1;
    }
    if classes_counted == 0 {
        return Err(Error::UndefinedMetric("no class has a positive".into()));
    }
    Ok(ap_sum / classes_counted as f64)
}

/// Micro-averaged F1 over all (sample, class) pairs, predicting positive
/// where the score strictly exceeds `threshold`. With no true positives,
/// false positives, or false negatives anywhere, the score is defined
/// as 1 (everything correctly empty).
pub fn micro_f1(preds: &[RankedPrediction], threshold: f64) -> Result<f64> {
    class_count(preds)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for pred in preds {
        for (s, &y) in pred.scores.iter().zip(&pred.truth) {
            let predicted = *s > threshold;
            match (predicted, y == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * tp as f64 / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn pred(scores: Vec<f64>, truth: Vec<u8>) -> RankedPrediction {
        RankedPrediction::new(scores, truth).unwrap()
    }

    #[test]
    fn precision_at_k_basic() {
        let preds = vec![pred(vec![0.9, 0.8, 0.1], vec![1, 0, 1])];
        assert_eq!(precision_at_k(&preds, 2).unwrap(), 0.5);
    }

    #[test]
    fn precision_is_one_when_everything_is_relevant() {
        let preds = vec![pred(vec![0.2, 0.9, 0.5], vec![1, 1, 1])];
        assert_eq!(precision_at_k(&preds, 3).unwrap(), 1.0);
    }

    #[test]
    fn precision_rejects_bad_k() {
        let preds = vec![pred(vec![0.2, 0.9], vec![1, 0])];
        assert!(precision_at_k(&preds, 0).is_err());
        assert!(precision_at_k(&preds, 3).is_err());
    }

    #[test]
    fn ndcg_single_relevant_ranked_first() {
        let preds = vec![pred(vec![0.9, 0.1], vec![1, 0])];
        assert_eq!(ndcg_at_k(&preds, 1).unwrap(), 1.0);
    }

    #[test]
    fn ndcg_single_relevant_ranked_second() {
        let preds = vec![pred(vec![0.9, 0.8], vec![0, 1])];
        let v = ndcg_at_k(&preds, 2).unwrap();
        assert!((v - 1.0 / 3.0_f64.log2()).abs() <= 1e-12);
        assert!((v - 0.63093).abs() < 1e-5);
    }

    #[test]
    fn ndcg_perfect_ranking_is_one() {
        let preds = vec![
            pred(vec![0.9, 0.8, 0.1, 0.05], vec![1, 1, 0, 0]),
            pred(vec![0.1, 0.9, 0.2, 0.3], vec![0, 1, 0, 1]),
        ];
        let v = ndcg_at_k(&preds, 4).unwrap();
        assert!((v - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ndcg_all_empty_truth_is_undefined() {
        let preds = vec![pred(vec![0.9, 0.8], vec![0, 0])];
        assert!(matches!(
            ndcg_at_k(&preds, 1),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn map_perfect_separation_is_one() {
        let preds = vec![
            pred(vec![0.9, 0.2], vec![1, 0]),
            pred(vec![0.8, 0.9], vec![1, 1]),
            pred(vec![0.1, 0.3], vec![0, 0]),
        ];
        assert!((mean_average_precision(&preds).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn map_single_class_hand_computed() {
        let preds = vec![
            pred(vec![0.9], vec![1]),
            pred(vec![0.8], vec![0]),
            pred(vec![0.7], vec![1]),
        ];
        let v = mean_average_precision(&preds).unwrap();
        assert!((v - (1.0 + 2.0 / 3.0) / 2.0).abs() <= 1e-12);
        assert!((v - 0.8333).abs() < 1e-4);
    }

    #[test]
    fn map_without_positives_is_undefined() {
        let preds = vec![pred(vec![0.9, 0.1], vec![0, 0])];
        assert!(matches!(
            mean_average_precision(&preds),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn micro_f1_exact_match() {
        let preds = vec![pred(vec![0.9, 0.1, 0.8], vec![1, 0, 1])];
        assert_eq!(micro_f1(&preds, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn micro_f1_no_predictions() {
        let preds = vec![pred(vec![0.1, 0.2], vec![1, 0])];
        assert_eq!(micro_f1(&preds, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn micro_f1_empty_everything_is_one() {
        let preds = vec![pred(vec![0.1, 0.2], vec![0, 0])];
        assert_eq!(micro_f1(&preds, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn micro_f1_mixed_hand_count() {
        // Per pair: tp where both, fp where predicted only, fn where truth only.
        let preds = vec![
            pred(vec![0.9, 0.1, 0.9], vec![1, 1, 0]), // tp, fn, fp
            pred(vec![0.1, 0.9, 0.1], vec![0, 1, 0]), // -, tp, -
            pred(vec![0.9, 0.1, 0.1], vec![1, 0, 1]), // tp, -, fn
        ];
        // tp = 3, fp = 1, fn = 2 so f1 = 6 / (6 + 1 + 2)
        let v = micro_f1(&preds, 0.5).unwrap();
        assert!((v - 6.0 / 9.0).abs() <= 1e-12);
    }

    #[test]
    fn micro_f1_threshold_validation() {
        let preds = vec![pred(vec![0.1], vec![0])];
        assert!(micro_f1(&preds, 0.0).is_err());
        assert!(micro_f1(&preds, 1.0).is_err());
    }

    #[test]
    fn p_at_1_is_argmax_hit_rate() {
        let mut rng = rng::seeded(99);
        let preds: Vec<RankedPrediction> = (0..50)
            .map(|_| {
                let scores: Vec<f64> = (0..6).map(|_| rng::standard_normal(&mut rng)).collect();
                let truth: Vec<u8> = (0..6).map(|_| rng::bernoulli(&mut rng, 0.4) as u8).collect();
                pred(scores, truth)
            })
            .collect();
        let p1 = precision_at_k(&preds, 1).unwrap();
        let mut hits = 0usize;
        for p in &preds {
            let mut best = 0;
            for i in 1..p.scores().len() {
                if p.scores()[i] > p.scores()[best] {
                    best = i;
                }
            }
            hits += p.truth()[best] as usize;
        }
        assert_eq!(p1, hits as f64 / preds.len() as f64);
    }

    #[test]
    fn rank_metrics_invariant_under_monotone_transforms() {
        let mut rng = rng::seeded(123);
        let make = |rng: &mut rng::ChaCha8Rng| -> Vec<RankedPrediction> {
            (0..20)
                .map(|i| {
                    let scores: Vec<f64> =
                        (0..5).map(|_| rng::standard_normal(rng)).collect();
                    let mut truth: Vec<u8> =
                        (0..5).map(|_| rng::bernoulli(rng, 0.3) as u8).collect();
                    truth[i % 5] = 1;
                    pred(scores, truth)
                })
                .collect()
        };
        let preds = make(&mut rng);
        let transformed: Vec<RankedPrediction> = preds
            .iter()
            .map(|p| {
                let scores = p.scores().iter().map(|&s| (2.0 * s).atan() * 0.25 + 7.0 * s).collect();
                pred(scores, p.truth().to_vec())
            })
            .collect();
        for k in [1, 3, 5] {
            assert_eq!(
                precision_at_k(&preds, k).unwrap(),
                precision_at_k(&transformed, k).unwrap()
            );
            assert_eq!(
                ndcg_at_k(&preds, k).unwrap(),
                ndcg_at_k(&transformed, k).unwrap()
            );
        }
        assert_eq!(
            mean_average_precision(&preds).unwrap(),
            mean_average_precision(&transformed).unwrap()
        );
    }

    #[test]
    fn swapping_a_relevant_item_down_never_raises_ndcg() {
        // Ranking [1, 0, 0, 1, 0]; pushing the first relevant item down a
        // slot can only lower (or preserve) the metric.
        let before = vec![pred(vec![0.9, 0.8, 0.7, 0.6, 0.5], vec![1, 0, 0, 1, 0])];
        let after = vec![pred(vec![0.9, 0.8, 0.7, 0.6, 0.5], vec![0, 1, 0, 1, 0])];
        for k in 1..=5 {
            let b = ndcg_at_k(&before, k).unwrap();
            let a = ndcg_at_k(&after, k).unwrap();
            assert!(a <= b + 1e-15, "k={k}: {a} > {b}");
        }
    }

    #[test]
    fn metric_report_json_is_sorted_and_six_decimal() {
        let mut report = MetricReport::new(3);
        report.insert("p@1", 0.5);
        report.insert("map", 1.0 / 3.0);
        assert_eq!(report.to_json(), r#"{"map":0.333333,"p@1":0.500000}"#);
        assert_eq!(report.n_samples(), 3);
    }
}
