//! Synthetic multi-label datasets with a controllable positive rate.
//!
//! Labels come from a noisy linear model: features and a ground-truth
//! weight matrix are drawn from standard normals, per-class scores are
//! `features * weights + noise`, and each class is labelled positive on
//! its top `round(positive_rate * n_samples)` scores. Thresholding at the
//! empirical quantile pins the class imbalance to the requested level,
//! which is the variable these datasets exist to study.
//!
//! Generation is fully deterministic given the seed. The ChaCha8 draw
//! order is: features (row-major), then weights (row-major), then noise
//! (row-major); see [`crate::rng`] for how each deviate maps to raw RNG
//! output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LabelMatrix;
use crate::mat::Mat;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    /// Target mean fraction of positive labels per class, in (0, 0.5].
    pub positive_rate: f64,
    /// Standard deviation of the additive score noise.
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise() -> f64 {
    1.0
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 || self.n_features < 1 || self.n_classes < 1 {
            return Err(Error::InvalidSpec("all counts must be at least 1".into()));
        }
        if !(self.positive_rate > 0.0 && self.positive_rate <= 0.5) {
            return Err(Error::InvalidSpec(format!(
                "positive_rate must lie in (0, 0.5], got {}",
                self.positive_rate
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidSpec("noise_std must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// A generated dataset. The generating weights are kept for diagnostics,
/// e.g. comparing a trained model against the weights that produced the
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Mat,
    pub labels: LabelMatrix,
    pub weights: Mat,
}

pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let (n, f, c) = (spec.n_samples, spec.n_features, spec.n_classes);
    let mut rng = rng::seeded(spec.seed);

    let features = Mat::from_vec(
        n,
        f,
        (0..n * f).map(|_| rng::standard_normal(&mut rng)).collect(),
    );
    let weights = Mat::from_vec(
        f,
        c,
        (0..f * c).map(|_| rng::standard_normal(&mut rng)).collect(),
    );
    let mut scores = features.matmul(&weights);
    for x in scores.data_mut() {
        *x += spec.noise_std * rng::standard_normal(&mut rng);
    }

    // Exactly round(rate * n) positives per class (at least one), taken
    // from the top of each class's score column.
    let k = ((spec.positive_rate * n as f64).round() as usize).clamp(1, n);
    let mut labels = vec![0u8; n * c];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for class in 0..c {
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| {
            scores
                .at(b, class)
                .partial_cmp(&scores.at(a, class))
                .expect("scores are finite")
                .then(a.cmp(&b))
        });
        for &sample in &order[..k] {
            labels[sample * c + class] = 1;
        }
    }

    Ok(Dataset {
        features,
        labels: LabelMatrix::new(n, c, labels)?,
        weights,
    })
}

impl Dataset {
    /// CSV layout: header `f0,...,f{F-1},y0,...,y{C-1}`, one sample per
    /// line, features at 9 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let (n, f) = self.features.shape();
        let c = self.labels.cols();
        let mut out = String::new();
        for i in 0..f {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("f{i}"));
        }
        for j in 0..c {
            out.push(',');
            out.push_str(&format!("y{j}"));
        }
        out.push('\n');
        for r in 0..n {
            for (i, x) in self.features.row(r).iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&crate::fmt::sig9(*x));
            }
            for y in self.labels.row(r) {
                out.push(',');
                out.push_str(if *y == 1 { "1" } else { "0" });
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, rate: f64, seed: u64) -> DatasetSpec {
        DatasetSpec {
            n_samples: n,
            n_features: 10,
            n_classes: 20,
            positive_rate: rate,
            noise_std: 0.5,
            seed,
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(spec(0, 0.1, 0).validate().is_err());
        assert!(spec(10, 0.0, 0).validate().is_err());
        assert!(spec(10, 0.6, 0).validate().is_err());
        let mut s = spec(10, 0.1, 0);
        s.noise_std = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&spec(200, 0.1, 42)).unwrap();
        let b = generate(&spec(200, 0.1, 42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&spec(200, 0.1, 1)).unwrap();
        let b = generate(&spec(200, 0.1, 2)).unwrap();
        assert_ne!(a.labels, b.labels);
    }

    #[test]
    fn balanced_rate_is_hit() {
        let ds = generate(&spec(10_000, 0.5, 7)).unwrap();
        let rate = ds.labels.positive_rate();
        assert!((0.45..=0.55).contains(&rate), "rate {rate}");
    }

    #[test]
    fn rare_positive_rate_is_hit() {
        let s = DatasetSpec {
            n_samples: 5000,
            n_features: 10,
            n_classes: 20,
            positive_rate: 0.05,
            noise_std: 0.5,
            seed: 3,
        };
        let ds = generate(&s).unwrap();
        let mean_positives_per_sample = ds.labels.positive_rate() * 20.0;
        let target = 0.05 * 20.0;
        assert!(
            mean_positives_per_sample >= 0.8 * target
                && mean_positives_per_sample <= 1.2 * target,
            "mean positives per sample {mean_positives_per_sample}"
        );
    }

    #[test]
    fn generating_weights_separate_better_than_zeros() {
        use crate::metrics::{mean_average_precision, RankedPrediction};
        let ds = generate(&spec(500, 0.2, 11)).unwrap();
        let true_scores = ds.features.matmul(&ds.weights);
        let as_preds = |scores: &Mat| -> Vec<RankedPrediction> {
            (0..scores.rows())
                .map(|r| {
                    RankedPrediction::new(scores.row(r).to_vec(), ds.labels.row(r).to_vec())
                        .unwrap()
                })
                .collect()
        };
        let zero_scores = Mat::zeros(500, 20);
        let informed = mean_average_precision(&as_preds(&true_scores)).unwrap();
        let uninformed = mean_average_precision(&as_preds(&zero_scores)).unwrap();
        assert!(
            informed > uninformed,
            "informed {informed} <= uninformed {uninformed}"
        );
    }

    #[test]
    fn csv_shape_and_header() {
        let ds = generate(&DatasetSpec {
            n_samples: 3,
            n_features: 2,
            n_classes: 2,
            positive_rate: 0.5,
            noise_std: 0.0,
            seed: 0,
        })
        .unwrap();
        let csv = ds.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "f0,f1,y0,y1");
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
