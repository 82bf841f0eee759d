//! Where the negative-class gradient peaks, and how the leading
//! coefficient moves that peak.
//!
//! Predictions to the right of the peak get a shrinking gradient, which is
//! the regime of suspected mislabels. Raising the coefficient `beta1`
//! pulls the peak left, reclassifying more hard negatives as suspect,
//! while changing the focusing exponent alone barely moves it.

use apl::analysis::find_pstar;
use apl::error::Error;
use apl::AplParams;

fn main() -> apl::Result<()> {
    println!("{:>24}  {:>10}  {:>10}", "params", "p*", "residual");
    for (label, gm, b1) in [
        ("gamma-=1.8, beta1=1.0", 1.8, 1.0),
        ("gamma-=1.8, beta1=1.5", 1.8, 1.5),
        ("gamma-=1.0, beta1=1.0", 1.0, 1.0),
        ("gamma-=4.0, beta1=1.0", 4.0, 1.0),
    ] {
        let params = AplParams::new(1.0, 0.5, b1, 0.0, gm, 0.01)?;
        let cp = find_pstar(&params)?;
        println!("{label:>24}  {:>10.6}  {:>10.2e}", cp.p_star, cp.residual);
    }

    match find_pstar(&AplParams::bce()) {
        Err(Error::NoCriticalPoint) => {
            println!("{:>24}  {:>10}", "plain cross-entropy", "none");
            println!("\nthe unfocused gradient grows monotonically; there is no peak");
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
