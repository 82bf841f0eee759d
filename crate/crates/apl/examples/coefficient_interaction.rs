//! The cost of raising every positive-class exponent by one versus only
//! adjusting the quadratic coefficient.
//!
//! The gap between the two choices is a series with coefficients
//! 1/(i(i+1)) on (1-p)^(i+1), which sums to p ln p + 1 - p. It is
//! nonnegative everywhere and vanishes as p -> 1, so the coefficient
//! adjustment is never the worse move and matters less for confident
//! predictions.

use apl::analysis::{interaction_difference, interaction_term_coefficient};

fn main() {
    println!("leading coefficients of the difference series:");
    for i in 1..=5 {
        println!(
            "  (1-p)^{}: 1/{} = {:.6}",
            i + 1,
            i * (i + 1),
            interaction_term_coefficient(i)
        );
    }

    println!("\n{:>5}  {:>12}  {:>12}  {:>9}", "p", "series(M=200)", "p ln p+1-p", "|gap|");
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let truncated = interaction_difference(p, 200);
        let closed = p * p.ln() + 1.0 - p;
        println!(
            "{p:>5.1}  {truncated:>12.8}  {closed:>12.8}  {:>9.1e}",
            (truncated - closed).abs()
        );
    }
}
