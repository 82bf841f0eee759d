//! Config-driven command layer behind the `apl` binary.
//!
//! Commands either print a JSON document to stdout or write an artifact
//! file. Every artifact starts with a header line carrying a hash of the
//! fully resolved configuration, so reruns are verifiably comparing like
//! with like; identical configs and seeds produce byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{curve_tables_to_csv, emit_curve, find_pstar, FigureId, GridSpec};
use crate::error::Error;
use crate::fmt::sig9;
use crate::loss::{bce, taylor_bce, AplParams, LabelMatrix, ProbMatrix};
use crate::mat::Mat;
use crate::metrics::MetricReport;
use crate::synth::{generate, DatasetSpec};
use crate::train::{finite_difference_audit, train, ModelKind, ModelSpec, OptSpec, AUDIT_TOLERANCE};

/// Command failures, split by exit code: malformed configuration exits 2,
/// runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!(
            "{what}: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// One experiment: a loss point, data, model, optimizer, metric ks, seeds,
/// and an output path. The seed list drives both dataset generation and
/// model initialization, one run per seed; `dataset.seed` and `model.seed`
/// are overridden per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub loss: AplParams,
    pub dataset: DatasetSpec,
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    #[serde(default = "default_opt")]
    pub opt: OptSpec,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_model() -> ModelSpec {
    ModelSpec {
        kind: ModelKind::Linear,
        hidden_size: 32,
        init_scale: 0.01,
        seed: 0,
    }
}

fn default_opt() -> OptSpec {
    OptSpec {
        learning_rate: 0.5,
        momentum: 0.9,
        epochs: 20,
        batch_size: 128,
    }
}

fn default_ks() -> Vec<usize> {
    vec![1, 3, 5]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Value lists for the loss fields a sweep varies; the Cartesian product
/// over the present axes forms the grid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub alpha1: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha2: Option<Vec<f64>>,
    #[serde(default)]
    pub beta1: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma_plus: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma_minus: Option<Vec<f64>>,
    #[serde(default)]
    pub p_th: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = parse_json(&text, &path.display().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must list at least one seed".into()));
        }
        self.dataset
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.opt
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.ks.is_empty() {
            return Err(CliError::Config("ks must list at least one cutoff".into()));
        }
        Ok(())
    }

    fn resolved_out(&self, flag: Option<&Path>) -> Result<PathBuf, CliError> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .ok_or_else(|| CliError::Config("no output path: set \"out\" or pass --out".into()))
    }
}

/// FNV-1a over the canonical JSON of a resolved configuration.
pub fn config_hash(value: &impl Serialize) -> String {
    let json = serde_json::to_string(value).expect("config serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in json.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x1_0000_0000_01b3);
    }
    format!("{hash:016x}")
}

fn parse_params_list(params_json: &str) -> Result<Vec<AplParams>, CliError> {
    let value: serde_json::Value = parse_json(params_json, "--params")?;
    let list = if value.is_array() {
        serde_json::from_value::<Vec<AplParams>>(value)
    } else {
        serde_json::from_value::<AplParams>(value).map(|p| vec![p])
    }
    .map_err(|e| CliError::Config(format!("--params: {e}")))?;
    if list.is_empty() {
        return Err(CliError::Config("--params: empty list".into()));
    }
    Ok(list)
}

#[derive(Serialize)]
struct CurvesResolved<'a> {
    figure: u8,
    params: &'a [AplParams],
    grid: (f64, f64, usize),
}

/// `curves`: tabulates one diagnostic figure as CSV.
///
/// Figure 1 is the positive-class coefficient table, figure 2 the
/// negative-class loss curves, figure 3 the negative-class gradient
/// curves.
pub fn cmd_curves(
    figure: u8,
    params_json: &str,
    points: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let params_list = parse_params_list(params_json)?;
    let fig = match figure {
        1 => FigureId::PolyCoeffs,
        2 => FigureId::LnegCurves,
        3 => FigureId::LnegGradients,
        other => {
            return Err(CliError::Config(format!(
                "--figure must be 1, 2, or 3, got {other}"
            )))
        }
    };
    let grid = GridSpec {
        points: points.unwrap_or(match fig {
            FigureId::PolyCoeffs => 8,
            _ => 512,
        }),
        ..GridSpec::default()
    };
    let tables = emit_curve(fig, &params_list, &grid)?;
    let hash = config_hash(&CurvesResolved {
        figure,
        params: &params_list,
        grid: (grid.lo, grid.hi, grid.points),
    });
    let body = format!("# config_hash={hash}\n{}", curve_tables_to_csv(&tables));
    fs::write(out, body)?;
    Ok(())
}

/// `pstar`: prints the negative-class gradient peak as JSON. A clean
/// no-peak determination (monotone gradient) is a successful outcome and
/// prints `{"no_critical_point":true}`.
pub fn cmd_pstar(params_json: &str) -> Result<String, CliError> {
    let params = parse_params_list(params_json)?;
    if params.len() != 1 {
        return Err(CliError::Config("pstar takes a single parameter set".into()));
    }
    match find_pstar(&params[0]) {
        Ok(cp) => Ok(format!(
            "{{\"p_star\":{},\"residual\":{},\"bracket\":[{},{}]}}",
            serde_json::to_string(&cp.p_star).expect("finite"),
            serde_json::to_string(&cp.residual).expect("finite"),
            serde_json::to_string(&cp.bracket.0).expect("finite"),
            serde_json::to_string(&cp.bracket.1).expect("finite"),
        )),
        Err(Error::NoCriticalPoint) => Ok("{\"no_critical_point\":true}".to_string()),
        Err(e) => Err(e.into()),
    }
}

/// `taylor-check`: largest absolute gap between the truncated-series
/// cross-entropy and the exact one, over both label values on a
/// probability grid spanning [0.05, 0.95].
pub fn cmd_taylor_check(order: usize) -> Result<String, CliError> {
    if order < 1 {
        return Err(CliError::Config("--order must be at least 1".into()));
    }
    const POINTS: usize = 91;
    let mut max_err = 0.0f64;
    for i in 0..POINTS {
        let p = 0.05 + 0.9 * i as f64 / (POINTS - 1) as f64;
        let probs = ProbMatrix::from_probs(Mat::from_vec(1, 1, vec![p]))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        for y in [1u8, 0] {
            let labels =
                LabelMatrix::new(1, 1, vec![y]).map_err(|e| CliError::Runtime(e.to_string()))?;
            let truncated = taylor_bce(&probs, &labels, order)?;
            let exact = bce(&probs, &labels)?.value;
            max_err = max_err.max((truncated - exact).abs());
        }
    }
    Ok(format!(
        "{{\"order\":{order},\"grid\":[0.05,0.95],\"grid_points\":{POINTS},\"max_abs_error\":{}}}",
        serde_json::to_string(&max_err).expect("finite")
    ))
}

fn run_one(
    cfg: &ExperimentConfig,
    loss: &AplParams,
    seed: u64,
) -> Result<crate::train::TrainHistory, CliError> {
    let dataset_spec = DatasetSpec {
        seed,
        ..cfg.dataset
    };
    let model_spec = ModelSpec {
        seed,
        ..cfg.model
    };
    let data = generate(&dataset_spec)?;
    Ok(train(&model_spec, &data, loss, &cfg.opt, &cfg.ks)?)
}

/// `train`: runs the configured experiment once per seed and writes a
/// JSON-lines history. The first line is a header record with the resolved
/// config hash; each following line is one epoch of one seed.
pub fn cmd_train(config_path: &Path, out_flag: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let out = cfg.resolved_out(out_flag)?;
    let hash = config_hash(&(&cfg, &out));
    let mut body = format!("{{\"config_hash\":\"{hash}\"}}\n");
    for &seed in &cfg.seeds {
        let history = run_one(&cfg, &cfg.loss, seed)?;
        for rec in &history.epochs {
            body.push_str(&format!("{{\"seed\":{seed},"));
            // Reuse the epoch record layout minus its opening brace.
            body.push_str(&rec.to_json_line()[1..]);
            body.push('\n');
        }
    }
    fs::write(&out, body)?;
    Ok(())
}

fn axis(values: &Option<Vec<f64>>, base: f64) -> Vec<f64> {
    values.as_ref().cloned().unwrap_or_else(|| vec![base])
}

fn mean_metrics(reports: &[&MetricReport]) -> Vec<(String, f64)> {
    let first = reports[0];
    first
        .iter()
        .map(|(name, _)| {
            let sum: f64 = reports.iter().map(|r| r.get(name).expect("shared keys")).sum();
            (name.to_string(), sum / reports.len() as f64)
        })
        .collect()
}

/// `sweep`: trains on the Cartesian grid of loss-parameter lists, one run
/// per seed per grid point, and writes a CSV ranked by mean validation mAP
/// (descending), ties broken by the grid point's hash.
pub fn cmd_sweep(config_path: &Path, out_flag: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let out = cfg.resolved_out(out_flag)?;
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let base = &cfg.loss;

    let mut grid_points: Vec<AplParams> = Vec::new();
    for &a1 in &axis(&sweep.alpha1, base.alpha1()) {
        for &a2 in &axis(&sweep.alpha2, base.alpha2()) {
            for &b1 in &axis(&sweep.beta1, base.beta1()) {
                for &gp in &axis(&sweep.gamma_plus, base.gamma_plus()) {
                    for &gm in &axis(&sweep.gamma_minus, base.gamma_minus()) {
                        for &pth in &axis(&sweep.p_th, base.p_th()) {
                            grid_points.push(
                                AplParams::new(a1, a2, b1, gp, gm, pth)
                                    .and_then(|p| p.with_trunc_order(base.trunc_order()))
                                    .map_err(|e| CliError::Config(e.to_string()))?,
                            );
                        }
                    }
                }
            }
        }
    }

    struct Row {
        params: AplParams,
        hash: String,
        metrics: Vec<(String, f64)>,
        map: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(grid_points.len());
    for params in grid_points {
        let mut finals = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            finals.push(run_one(&cfg, &params, seed)?);
        }
        let reports: Vec<&MetricReport> =
            finals.iter().map(|h| h.final_val_metrics()).collect();
        let metrics = mean_metrics(&reports);
        let map = metrics
            .iter()
            .find(|(name, _)| name == "map")
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Runtime("sweep metrics missing map".into()))?;
        rows.push(Row {
            hash: config_hash(&params),
            params,
            metrics,
            map,
        });
    }
    rows.sort_by(|a, b| {
        b.map
            .partial_cmp(&a.map)
            .expect("metrics are finite")
            .then_with(|| a.hash.cmp(&b.hash))
    });

    let hash = config_hash(&(&cfg, &out));
    let mut body = format!("# config_hash={hash}\n");
    body.push_str("alpha1,alpha2,beta1,gamma_plus,gamma_minus,p_th,point_hash");
    if let Some(first) = rows.first() {
        for (name, _) in &first.metrics {
            body.push(',');
            body.push_str(name);
        }
    }
    body.push('\n');
    for row in &rows {
        let p = &row.params;
        body.push_str(&format!(
            "{},{},{},{},{},{},{}",
            sig9(p.alpha1()),
            sig9(p.alpha2()),
            sig9(p.beta1()),
            sig9(p.gamma_plus()),
            sig9(p.gamma_minus()),
            sig9(p.p_th()),
            row.hash
        ));
        for (_, v) in &row.metrics {
            body.push(',');
            body.push_str(&sig9(*v));
        }
        body.push('\n');
    }
    fs::write(&out, body)?;
    Ok(())
}

/// `audit` output plus whether it met [`AUDIT_TOLERANCE`].
pub struct AuditOutcome {
    pub json: String,
    pub pass: bool,
}

/// `audit`: finite-difference check of the analytic gradient. Defaults to
/// the cross-entropy parameter point when `--params` is omitted.
pub fn cmd_audit(
    trials: usize,
    seed: u64,
    params_json: Option<&str>,
) -> Result<AuditOutcome, CliError> {
    let params = match params_json {
        Some(text) => {
            let list = parse_params_list(text)?;
            if list.len() != 1 {
                return Err(CliError::Config("audit takes a single parameter set".into()));
            }
            list[0]
        }
        None => AplParams::default(),
    };
    let report = finite_difference_audit(&params, trials, seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let json = format!(
        "{{\"trials\":{},\"seed\":{seed},\"entries_checked\":{},\"entries_excluded\":{},\"max_rel_err\":{},\"tolerance\":{},\"pass\":{}}}",
        report.trials,
        report.entries_checked,
        report.entries_excluded,
        serde_json::to_string(&report.max_rel_err).expect("finite"),
        serde_json::to_string(&AUDIT_TOLERANCE).expect("finite"),
        report.pass()
    );
    Ok(AuditOutcome {
        json,
        pass: report.pass(),
    })
}
