//! Subcommands of the `treeprune` binary.
//!
//! Every command writes its artifacts into `--out` and returns the metrics it
//! also stores as `metrics.json`, so tests can drive the same code paths.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use treeprune::approx::{fit_path, lambda_grid, metadata, select_k, CbcdOptions, PathConfig, PathResult};
use treeprune::dataio::{self, write_csv, Dataset};
use treeprune::exact::{relative_gap, write_trace_csv};
use treeprune::{
    fit_gbt, load_ensemble, load_rule_model, r2, relax_and_round, render_rules, save_ensemble,
    save_path_csv, save_rule_model, solve_exact, AttributeScheme, Error, ExactConfig, GbtParams,
    RelaxConfig, Result, RuleSpace, TreeEnsemble,
};

#[derive(Debug, Parser)]
#[command(name = "treeprune", version, about = "Prune tree ensembles into short weighted rule lists")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a boosted ensemble and write the train/valid/test partitions.
    Train(TrainArgs),
    /// Extract one rule model.
    Prune(PruneArgs),
    /// Regularization path over a λ grid.
    Path(PathArgs),
    /// Smallest path model within each validation-R² margin.
    Compress(CompressArgs),
    /// Score a rule model or ensemble on a dataset.
    Eval(EvalArgs),
    /// Print a rule model as sentences.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, default_value = "0.7,0.15,0.15")]
    pub split: Fractions,
    #[arg(long)]
    pub out: PathBuf,
}

/// Options shared by every command that fits on an ensemble's training rows.
#[derive(Debug, Clone, Args)]
pub struct FitData {
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Training CSV the ensemble was fit on.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long, value_enum, default_value_t = SchemeArg::Rule)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Leave tree roots out of the candidate rules.
    #[arg(long)]
    pub exclude_root: bool,
    /// Recorded in metrics; solvers are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Rule,
    Depth,
    Feature,
}

impl From<SchemeArg> for AttributeScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Rule => AttributeScheme::RuleWeight,
            SchemeArg::Depth => AttributeScheme::DepthWeight,
            SchemeArg::Feature => AttributeScheme::FeatureWeight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Cbcd,
    Relax,
}

#[derive(Debug, Clone, Args)]
pub struct PruneArgs {
    #[command(flatten)]
    pub fit: FitData,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Attribute budget. Required for exact; for cbcd it picks a path point.
    #[arg(long = "K")]
    pub k: Option<u64>,
    /// Penalty for cbcd and relax.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Grid used when cbcd is given a budget.
    #[arg(long, default_value = "1e0:1e3:50")]
    pub lambda_grid: LambdaGrid,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub fit: FitData,
    #[arg(long, default_value = "1e0:1e3:50")]
    pub lambda_grid: LambdaGrid,
    #[arg(long)]
    pub no_recycle: bool,
    /// Recompute every recycled cut and record the largest discrepancy.
    #[arg(long)]
    pub verify_recycling: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub fit: FitData,
    #[arg(long, default_value = "1e0:1e3:50")]
    pub lambda_grid: LambdaGrid,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.025,0.05")]
    pub margins: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Rule-model JSON, or ensemble JSON with `--ensemble`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub ensemble: bool,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `lo:hi:n`, expanded to `n` log-spaced values from `hi` down to `lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        lambda_grid(self.lo, self.hi, self.n)
    }
}

impl FromStr for LambdaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        Ok(Self {
            lo: num(lo)?,
            hi: num(hi)?,
            n: n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fractions(pub f64, pub f64, pub f64);

impl FromStr for Fractions {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b, c] => Ok(Self(a, b, c)),
            _ => Err(format!("expected three fractions, got `{s}`")),
        }
    }
}

/// Dispatches a parsed command line and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let pretty = |v: Value| serde_json::to_string_pretty(&v).map(|s| s + "\n");
    Ok(match &cli.command {
        Command::Train(a) => pretty(cmd_train(a)?)?,
        Command::Prune(a) => pretty(cmd_prune(a)?)?,
        Command::Path(a) => pretty(cmd_path(a)?)?,
        Command::Compress(a) => cmd_compress(a)?.to_text(),
        Command::Eval(a) => pretty(cmd_eval(a)?)?,
        Command::Render(a) => cmd_render(a)?,
    })
}

/// Machine-readable form of a failure, printed on stderr by the binary.
pub fn error_json(err: &Error) -> Value {
    let kind = match err {
        Error::Io { .. } => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
        Error::SchemaVersion { .. } => "schema_version",
        Error::Empty(_) => "empty",
        Error::MissingTarget(_) => "missing_target",
        Error::NonNumeric { .. } => "non_numeric",
        Error::DuplicateFeature(_) => "duplicate_feature",
        Error::Dimension { .. } => "dimension",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::ZeroVariance => "zero_variance",
        Error::Singular(_) => "singular",
        Error::Infeasible => "infeasible",
        Error::Unbounded => "unbounded",
        Error::OracleGuard(_) => "oracle_guard",
    };
    json!({ "error": { "kind": kind, "message": err.to_string() } })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn load_data(path: &Path, target: &str) -> Result<Dataset> {
    let load = dataio::load_csv(path, target)?;
    if load.skipped_rows > 0 {
        log::warn!("{}: skipped {} rows with missing values", path.display(), load.skipped_rows);
    }
    Ok(load.dataset)
}

fn score(pred: Result<Vec<f64>>, ds: &Dataset) -> Result<f64> {
    r2(ds.response(), &pred?)
}

pub fn cmd_train(a: &TrainArgs) -> Result<Value> {
    let load = dataio::load_csv(&a.data, &a.target)?;
    let Fractions(f_train, f_valid, f_test) = a.split;
    let (train, valid, test) = dataio::split(&load.dataset, (f_train, f_valid, f_test), a.seed)?;
    let params = GbtParams {
        num_trees: a.trees,
        max_depth: a.depth,
        learning_rate: a.lr,
        min_leaf: a.min_leaf,
        seed: a.seed,
    };
    let start = Instant::now();
    let e = fit_gbt(&train, &params)?;
    let seconds = start.elapsed().as_secs_f64();

    create_dir(&a.out)?;
    save_ensemble(&e, a.out.join("ensemble.json"))?;
    for (name, ds) in [("train", &train), ("valid", &valid), ("test", &test)] {
        write_csv(ds, &a.target, a.out.join(format!("{name}.csv")))?;
    }
    let metrics = json!({
        "command": "train",
        "seed": a.seed,
        "trees": a.trees,
        "depth": a.depth,
        "learning_rate": a.lr,
        "min_leaf": a.min_leaf,
        "skipped_rows": load.skipped_rows,
        "rows": { "train": train.n_rows(), "valid": valid.n_rows(), "test": test.n_rows() },
        "num_nodes": e.num_nodes(),
        "r2": {
            "train": score(e.predict(&train), &train)?,
            "valid": score(e.predict(&valid), &valid)?,
            "test": score(e.predict(&test), &test)?,
        },
        "seconds": seconds,
    });
    write_json(&a.out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

/// Ensemble with rows assigned, its rule space and the optional holdouts.
pub struct Prepared {
    pub ensemble: TreeEnsemble,
    pub rs: RuleSpace,
    pub train: Dataset,
    pub valid: Option<Dataset>,
    pub test: Option<Dataset>,
}

pub fn prepare(fit: &FitData) -> Result<Prepared> {
    if !(fit.gamma > 0.0 && fit.gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", fit.gamma)));
    }
    let mut ensemble = load_ensemble(&fit.ensemble)?;
    let train = load_data(&fit.data, &fit.target)?;
    ensemble.assign_rows(&train)?;
    let rs = RuleSpace::build(&ensemble, !fit.exclude_root)?;
    let holdout = |p: &Option<PathBuf>| p.as_ref().map(|p| load_data(p, &fit.target)).transpose();
    Ok(Prepared {
        valid: holdout(&fit.valid)?,
        test: holdout(&fit.test)?,
        ensemble,
        rs,
        train,
    })
}

fn r2_block(model: &treeprune::RuleModel, p: &Prepared) -> Result<Value> {
    let mut out = serde_json::Map::new();
    out.insert("train".into(), json!(score(model.predict(&p.train), &p.train)?));
    for (name, ds) in [("valid", &p.valid), ("test", &p.test)] {
        if let Some(ds) = ds {
            out.insert(name.into(), json!(score(model.predict(ds), ds)?));
        }
    }
    Ok(Value::Object(out))
}

fn path_options(fit: &FitData) -> CbcdOptions {
    CbcdOptions {
        gamma: fit.gamma,
        scheme: fit.scheme.into(),
        ..Default::default()
    }
}

pub fn cmd_prune(a: &PruneArgs) -> Result<Value> {
    let fit = &a.fit;
    match (a.mode, a.k, a.lambda) {
        (Mode::Exact, None, _) => {
            return Err(Error::InvalidArgument("--mode exact requires --K".into()))
        }
        (Mode::Relax, _, None) => {
            return Err(Error::InvalidArgument("--mode relax requires --lambda".into()))
        }
        (Mode::Cbcd, None, None) => {
            return Err(Error::InvalidArgument("--mode cbcd requires --K or --lambda".into()))
        }
        _ => {}
    }
    if !(a.time_limit > 0.0) {
        return Err(Error::InvalidArgument("--time-limit must be positive".into()));
    }
    let p = prepare(fit)?;
    let scheme: AttributeScheme = fit.scheme.into();
    let y = p.train.response();
    create_dir(&fit.out)?;
    let start = Instant::now();

    let (model, solver) = match a.mode {
        Mode::Exact => {
            let k = a.k.expect("checked above");
            let cfg = ExactConfig {
                budget: k,
                scheme,
                gamma: fit.gamma,
                tol: a.tol,
                time_limit: Duration::from_secs_f64(a.time_limit),
                ..Default::default()
            };
            let res = solve_exact(&p.rs, y, &cfg)?;
            write_trace_csv(&res, create(&fit.out.join("trace.csv"))?)?;
            let meta = metadata(scheme, Some(k as f64), None, fit.gamma, "exact", res.gap);
            let model = p.rs.to_rule_model(&res.selection, meta);
            let solver = json!({
                "objective": res.selection.objective,
                "upper": res.upper,
                "lower": res.lower,
                "tau": res.gap,
                "iterations": res.iterations,
                "cuts": res.cuts,
                "status": res.status,
                "attribute_sum": res.selection.attribute_sum,
            });
            (model, solver)
        }
        Mode::Cbcd => {
            let opts = path_options(fit);
            let lambdas = match a.lambda {
                Some(l) => vec![l],
                None => a.lambda_grid.values()?,
            };
            let path = fit_path(&p.rs, y, &PathConfig { lambdas, cbcd: opts }, None)?;
            let (sel, lambda) = match a.k {
                Some(k) => {
                    let sel = select_k(&path, k);
                    let lambda = path
                        .points
                        .iter()
                        .find(|pt| pt.selection.support == sel.support)
                        .map(|pt| pt.lambda);
                    (sel, lambda)
                }
                None => (path.points[0].selection.clone(), a.lambda),
            };
            let meta = metadata(scheme, a.k.map(|k| k as f64), lambda, fit.gamma, "cbcd", 0.0);
            let model = p.rs.to_rule_model(&sel, meta);
            let solver = json!({
                "objective": sel.objective,
                "lambda": lambda,
                "attribute_sum": sel.attribute_sum,
                "counters": path.counters,
            });
            (model, solver)
        }
        Mode::Relax => {
            let lambda = a.lambda.expect("checked above");
            let cfg = RelaxConfig {
                tol: a.tol,
                ..Default::default()
            };
            let res = relax_and_round(&p.rs, y, lambda, fit.gamma, scheme, &cfg)?;
            let tau = relative_gap(res.rounded_objective, res.lower_bound);
            let meta = metadata(scheme, None, Some(lambda), fit.gamma, "relax", tau);
            let model = p.rs.to_rule_model(&res.rounded, meta);
            let solver = json!({
                "objective": res.rounded.objective,
                "penalized_objective": res.rounded_objective,
                "relaxation_objective": res.objective,
                "relaxation_lower_bound": res.lower_bound,
                "tau": tau,
                "iterations": res.iterations,
                "attribute_sum": res.rounded.attribute_sum,
            });
            (model, solver)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    save_rule_model(&model, fit.out.join("model.json"))?;

    let mut metrics = json!({
        "command": "prune",
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "seed": fit.seed,
        "scheme": scheme.name(),
        "gamma": fit.gamma,
        "K": a.k,
        "num_rules": model.rules.len(),
        "r2": r2_block(&model, &p)?,
        "seconds": seconds,
    });
    merge(&mut metrics, solver);
    write_json(&fit.out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

pub fn cmd_path(a: &PathArgs) -> Result<Value> {
    let fit = &a.fit;
    let p = prepare(fit)?;
    let mut cbcd = path_options(fit);
    cbcd.recycle = !a.no_recycle;
    cbcd.verify_recycling = a.verify_recycling;
    let cfg = PathConfig {
        lambdas: a.lambda_grid.values()?,
        cbcd,
    };
    create_dir(&fit.out)?;
    let start = Instant::now();
    let path = fit_path(&p.rs, p.train.response(), &cfg, p.valid.as_ref())?;
    let seconds = start.elapsed().as_secs_f64();
    save_path_csv(&path, fit.out.join("path.csv"))?;
    write_json(&fit.out.join("counters.json"), &path.counters)?;
    let metrics = json!({
        "command": "path",
        "seed": fit.seed,
        "scheme": path.scheme.name(),
        "gamma": path.gamma,
        "points": path.points.len(),
        "null_objective": path.null_objective,
        "converged": path.points.iter().all(|pt| pt.converged),
        "counters": path.counters,
        "seconds": seconds,
    });
    write_json(&fit.out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressionRow {
    pub margin: f64,
    /// `None` when no path point reaches the margin.
    pub lambda: Option<f64>,
    pub num_rules: Option<usize>,
    pub compression: Option<f64>,
    pub valid_r2: Option<f64>,
    pub test_r2: Option<f64>,
    /// Relative test-R² decrease against the full ensemble, in percent.
    pub test_r2_decrease_pct: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressionReport {
    pub seed: u64,
    pub full_nodes: usize,
    pub full_valid_r2: f64,
    pub full_test_r2: f64,
    pub rows: Vec<CompressionRow>,
    pub counters: treeprune::Counters,
}

impl CompressionReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# compression = full-ensemble node count / selected rule count\n");
        s.push_str(&format!(
            "# full model: {} nodes, valid R2 {:.4}, test R2 {:.4}\n",
            self.full_nodes, self.full_valid_r2, self.full_test_r2
        ));
        s.push_str("margin\tlambda\trules\tcompression\tvalid_r2\ttest_r2\ttest_r2_decrease_pct\n");
        for r in &self.rows {
            match (r.lambda, r.num_rules, r.compression, r.valid_r2, r.test_r2, r.test_r2_decrease_pct) {
                (Some(l), Some(n), Some(c), Some(v), Some(t), Some(d)) => s.push_str(&format!(
                    "{}\t{l:.6}\t{n}\t{c:.1}\t{v:.4}\t{t:.4}\t{d:.2}\n",
                    r.margin
                )),
                _ => s.push_str(&format!("{}\tnone\n", r.margin)),
            }
        }
        s
    }
}

/// Picks, per margin, the path point with the fewest rules whose validation
/// R² is at least `(1 − φ)` times the full ensemble's.
pub fn compression_rows(
    path: &PathResult,
    full_nodes: usize,
    full_valid: f64,
    full_test: f64,
    test_r2: impl Fn(usize) -> Result<f64>,
    margins: &[f64],
) -> Result<Vec<CompressionRow>> {
    let mut rows = Vec::with_capacity(margins.len());
    for &phi in margins {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidArgument(format!("margin must be positive, got {phi}")));
        }
        let threshold = full_valid - phi * full_valid.abs();
        let chosen = path
            .points
            .iter()
            .enumerate()
            .filter(|(_, pt)| pt.num_rules > 0 && pt.valid_r2.is_some_and(|v| v >= threshold))
            .min_by(|(_, a), (_, b)| {
                a.num_rules
                    .cmp(&b.num_rules)
                    .then(b.valid_r2.unwrap().total_cmp(&a.valid_r2.unwrap()))
            });
        rows.push(match chosen {
            None => CompressionRow {
                margin: phi,
                lambda: None,
                num_rules: None,
                compression: None,
                valid_r2: None,
                test_r2: None,
                test_r2_decrease_pct: None,
            },
            Some((k, pt)) => {
                let t = test_r2(k)?;
                CompressionRow {
                    margin: phi,
                    lambda: Some(pt.lambda),
                    num_rules: Some(pt.num_rules),
                    compression: Some(full_nodes as f64 / pt.num_rules as f64),
                    valid_r2: pt.valid_r2,
                    test_r2: Some(t),
                    test_r2_decrease_pct: Some(100.0 * (full_test - t) / full_test.abs()),
                }
            }
        });
    }
    Ok(rows)
}

pub fn cmd_compress(a: &CompressArgs) -> Result<CompressionReport> {
    let fit = &a.fit;
    let p = prepare(fit)?;
    let (Some(valid), Some(test)) = (p.valid.as_ref(), p.test.as_ref()) else {
        return Err(Error::InvalidArgument("compress needs --valid and --test".into()));
    };
    let cfg = PathConfig {
        lambdas: a.lambda_grid.values()?,
        cbcd: path_options(fit),
    };
    let path = fit_path(&p.rs, p.train.response(), &cfg, Some(valid))?;
    let full_valid = score(p.ensemble.predict(valid), valid)?;
    let full_test = score(p.ensemble.predict(test), test)?;
    let full_nodes = p.ensemble.num_nodes();
    let scheme: AttributeScheme = fit.scheme.into();
    let test_r2 = |k: usize| {
        let pt = &path.points[k];
        let meta = metadata(scheme, None, Some(pt.lambda), fit.gamma, "cbcd", 0.0);
        score(p.rs.to_rule_model(&pt.selection, meta).predict(test), test)
    };
    let rows = compression_rows(&path, full_nodes, full_valid, full_test, test_r2, &a.margins)?;
    let report = CompressionReport {
        seed: fit.seed,
        full_nodes,
        full_valid_r2: full_valid,
        full_test_r2: full_test,
        rows,
        counters: path.counters.clone(),
    };

    create_dir(&fit.out)?;
    save_path_csv(&path, fit.out.join("path.csv"))?;
    let mut w = csv::Writer::from_writer(create(&fit.out.join("compression.csv"))?);
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(&fit.out.join("compression.csv")))?;
    let txt = fit.out.join("compression.txt");
    fs::write(&txt, report.to_text()).map_err(io_err(&txt))?;
    write_json(&fit.out.join("metrics.json"), &report)?;
    Ok(report)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Value> {
    let ds = load_data(&a.data, &a.target)?;
    let (pred, size) = if a.ensemble {
        let e = load_ensemble(&a.model)?;
        let n = e.num_nodes();
        (e.predict(&ds)?, json!({ "trees": e.trees.len(), "nodes": n }))
    } else {
        let m = load_rule_model(&a.model)?;
        (m.predict(&ds)?, json!({ "rules": m.rules.len() }))
    };
    let metrics = json!({
        "command": "eval",
        "rows": ds.n_rows(),
        "r2": r2(ds.response(), &pred)?,
        "mse": treeprune::ensemble::mse(ds.response(), &pred),
        "size": size,
    });
    if let Some(out) = &a.out {
        write_json(out, &metrics)?;
    }
    Ok(metrics)
}

pub fn cmd_render(a: &RenderArgs) -> Result<String> {
    let model = load_rule_model(&a.model)?;
    let text = render_rules(&model);
    if let Some(out) = &a.out {
        fs::write(out, &text).map_err(io_err(out))?;
    }
    Ok(text)
}
