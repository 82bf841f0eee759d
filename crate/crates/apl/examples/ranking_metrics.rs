//! The metric set on a small hand-made evaluation: precision and nDCG at
//! cutoffs, mean average precision, and micro-F1.

use apl::metrics::{
    mean_average_precision, micro_f1, ndcg_at_k, precision_at_k, MetricReport, RankedPrediction,
};

fn main() -> apl::Result<()> {
    // Four samples over five classes. Scores are probabilities here, so
    // micro-F1 at 0.5 is meaningful.
    let preds = vec![
        RankedPrediction::new(vec![0.9, 0.7, 0.2, 0.1, 0.0], vec![1, 1, 0, 0, 0])?,
        RankedPrediction::new(vec![0.1, 0.8, 0.6, 0.2, 0.3], vec![0, 1, 0, 0, 1])?,
        RankedPrediction::new(vec![0.4, 0.3, 0.9, 0.6, 0.2], vec![0, 0, 1, 1, 0])?,
        RankedPrediction::new(vec![0.2, 0.1, 0.3, 0.4, 0.8], vec![0, 0, 0, 0, 1])?,
    ];

    let mut report = MetricReport::new(preds.len());
    for k in [1usize, 3, 5] {
        report.insert(format!("p@{k}"), precision_at_k(&preds, k)?);
        report.insert(format!("ndcg@{k}"), ndcg_at_k(&preds, k)?);
    }
    report.insert("map", mean_average_precision(&preds)?);
    report.insert("micro_f1", micro_f1(&preds, 0.5)?);

    println!("{}", report.to_json());
    Ok(())
}
