//! The loss family contains plain binary cross-entropy as an exact special
//! case: coefficients at their series values, no focusing, no threshold.

use apl::rng;
use apl::{apl_forward_backward, bce, sigmoid, AplParams, LabelMatrix, LogitMatrix, Mat};

fn main() -> apl::Result<()> {
    let params = AplParams::bce();
    println!("reduction point: {}", params.label());

    let mut rng = rng::seeded(1);
    let mut worst_value = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..200 {
        let logits = LogitMatrix::new(Mat::from_vec(
            4,
            5,
            (0..20).map(|_| 3.0 * rng::standard_normal(&mut rng)).collect(),
        ))?;
        let labels = LabelMatrix::new(
            4,
            5,
            (0..20).map(|_| rng::bernoulli(&mut rng, 0.5) as u8).collect(),
        )?;
        let family = apl_forward_backward(&logits, &labels, &params)?;
        let reference = bce(&sigmoid(&logits), &labels)?;
        worst_value = worst_value.max((family.value - reference.value).abs());
        for (a, b) in family.grad.data().iter().zip(reference.grad.data()) {
            worst_grad = worst_grad.max((a - b).abs());
        }
    }
    println!("200 random batches, 4x5 logits");
    println!("largest |value difference|:    {worst_value:.3e}");
    println!("largest |gradient difference|: {worst_grad:.3e}");
    Ok(())
}
