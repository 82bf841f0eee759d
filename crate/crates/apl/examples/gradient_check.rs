//! Finite-difference audit of the analytic gradients across parameter
//! settings, from the plain cross-entropy point to heavily focused and
//! thresholded ones.

use apl::train::{finite_difference_audit, AUDIT_TOLERANCE};
use apl::AplParams;

fn main() -> apl::Result<()> {
    let cases = [
        ("cross-entropy point", AplParams::bce()),
        ("focused negatives", AplParams::asl(0.0, 4.0, 0.05)?),
        ("focused both sides", AplParams::asl(1.0, 4.0, 0.05)?),
        (
            "adjusted coefficients",
            AplParams::new(2.0, 1.0, 1.4, 1.0, 4.0, 0.05)?,
        ),
        (
            "zeroed first order",
            AplParams::new(0.0, 3.0, 1.0, 0.0, 4.0, 0.05)?,
        ),
    ];
    println!("tolerance: {AUDIT_TOLERANCE:.0e}\n");
    println!("{:>24}  {:>12}  {:>8}  {:>8}", "params", "max rel err", "checked", "pass");
    for (name, params) in cases {
        let report = finite_difference_audit(&params, 50, 7)?;
        println!(
            "{name:>24}  {:>12.3e}  {:>8}  {:>8}",
            report.max_rel_err,
            report.entries_checked,
            report.pass()
        );
    }
    Ok(())
}
