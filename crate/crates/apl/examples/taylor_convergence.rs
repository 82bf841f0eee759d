//! How fast the truncated series closes in on the exact cross-entropy,
//! together with the a-priori remainder bound (1-p)^(M+1) / ((M+1) p).

use apl::{bce, taylor_bce, LabelMatrix, Mat, ProbMatrix};

fn main() -> apl::Result<()> {
    let labels = LabelMatrix::from_rows(&[vec![1]])?;
    println!("{:>6}  {:>12}  {:>12}", "order", "max |error|", "bound at p=0.05");
    for order in [1usize, 2, 5, 10, 20, 50, 100, 200] {
        let mut max_err = 0.0f64;
        for i in 0..=90 {
            let p = 0.05 + 0.9 * i as f64 / 90.0;
            let probs = ProbMatrix::from_probs(Mat::from_vec(1, 1, vec![p]))?;
            let truncated = taylor_bce(&probs, &labels, order)?;
            let exact = bce(&probs, &labels)?.value;
            max_err = max_err.max((truncated - exact).abs());
        }
        let bound = 0.95f64.powi(order as i32 + 1) / ((order as f64 + 1.0) * 0.05);
        println!("{order:>6}  {max_err:>12.3e}  {bound:>12.3e}");
    }
    Ok(())
}
