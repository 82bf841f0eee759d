//! Negative-class loss curves: cross-entropy against a focused, thresholded
//! variant. Writes `lneg_curves.csv` next to the working directory and
//! prints a coarse preview. Probabilities below the threshold contribute
//! nothing.

use apl::analysis::{curve_tables_to_csv, emit_curve, FigureId, GridSpec};
use apl::AplParams;

fn main() -> apl::Result<()> {
    let bce = AplParams::bce();
    let focused = AplParams::new(1.0, 0.5, 1.0, 0.0, 2.0, 0.2)?;
    let raised = AplParams::new(1.0, 0.5, 1.5, 0.0, 2.0, 0.2)?;

    let tables = emit_curve(
        FigureId::LnegCurves,
        &[bce, focused, raised],
        &GridSpec::default(),
    )?;
    std::fs::write("lneg_curves.csv", curve_tables_to_csv(&tables)).expect("write csv");
    println!("wrote lneg_curves.csv ({} series, {} points each)", tables.len(), tables[0].grid.len());

    println!("\n{:>5}  {:>10}  {:>10}  {:>10}", "p", "bce", "focused", "b1=1.5");
    for i in (0..tables[0].grid.len()).step_by(64) {
        println!(
            "{:>5.3}  {:>10.5}  {:>10.5}  {:>10.5}",
            tables[0].grid[i], tables[0].values[i], tables[1].values[i], tables[2].values[i]
        );
    }
    Ok(())
}
