//! Asymmetric polynomial losses for multi-label classification.
//!
//! Multi-label training decomposes into independent binary subproblems,
//! where plain binary cross-entropy gives rare positive labels a small
//! share of the total gradient. This crate implements a loss family that
//! generalizes BCE along its power-series form: the leading series
//! coefficients become tunable, positives and negatives get separate
//! focusing exponents, and easy negatives below a probability threshold
//! are discarded outright. BCE is the exact special case
//! `alpha1 = 1, alpha2 = 1/2, beta1 = 1, gamma+ = gamma- = 0, p_th = 0`.
//!
//! What's here:
//!
//! - [`loss`]: closed-form values and analytic logit gradients, plus
//!   truncated-series evaluators that serve as consistency oracles.
//! - [`analysis`]: gradient curves, the gradient-peak location `p*`, the
//!   coefficient-interaction series, and CSV curve tables.
//! - [`metrics`]: P@k, nDCG@k, mAP, micro-F1.
//! - [`synth`]: seeded synthetic datasets with a pinned positive rate.
//! - [`train`]: a deterministic momentum-SGD harness and a
//!   finite-difference gradient audit.
//! - [`cli`]: the config-driven command layer behind the `apl` binary.
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example bce_reduction
//! cargo run --example taylor_convergence
//! cargo run --example loss_curves
//! cargo run --example gradient_peak
//! cargo run --example coefficient_interaction
//! cargo run --example ranking_metrics
//! cargo run --example synthetic_dataset
//! cargo run --example gradient_check
//! cargo run --example train_imbalanced
//! ```
//!
//! Quick start:
//!
//! ```
//! use apl::{apl_forward_backward, AplParams, LabelMatrix, LogitMatrix};
//!
//! let params = AplParams::new(1.0, 0.5, 1.0, 0.0, 2.0, 0.05)?;
//! let logits = LogitMatrix::from_rows(&[vec![1.2, -0.7], vec![0.3, 2.1]])?;
//! let labels = LabelMatrix::from_rows(&[vec![1, 0], vec![0, 1]])?;
//! let out = apl_forward_backward(&logits, &labels, &params)?;
//! assert!(out.value > 0.0);
//! assert_eq!(out.grad.shape(), (2, 2));
//! # Ok::<(), apl::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod train;

mod fmt;
mod mat;

pub use error::{Error, Result};
pub use loss::{
    apl_forward_backward, apl_series_forward, bce, shift_probability, sigmoid, taylor_bce,
    AplParams, LabelMatrix, LogitMatrix, LossOutput, ProbMatrix, PROB_EPSILON,
};
pub use mat::Mat;
