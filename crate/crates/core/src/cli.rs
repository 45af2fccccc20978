//! The `explain` command-line front end.
//!
//! Every subcommand loads a CSV dataset and (except `live`) a JSON model
//! spec, runs one explainer and writes a single artifact atomically. The
//! artifact echoes the effective parameters, defaults included. Exit codes:
//! 0 on success, 1 for usage and input errors, 2 when the computation fails.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::data::{load_dataset, read_schema, ColumnKind, Dataset};
use crate::error::Error;
use crate::global::{
    ale_curve, center_curves, default_ice_sample, ice_curves, ipd_importance, mplot_curve,
    pdp_curve, ExplanationCurve, Grid, IceSample,
};
use crate::importance::{
    pfi_grouped, singleton_groups, Basis, FeatureGroup, PfiConfig, PfiMode, DEFAULT_REPEATS,
};
use crate::interaction::{h_matrix, HSample};
use crate::local::{
    lime_explain, live_neighborhood, shapley_exact, shapley_linear, shapley_mc_all, LimeConfig,
};
use crate::loss::LossKind;
use crate::models::{load_model, Model};
use crate::output::{curve_csv, format_sig17, write_atomic};
use crate::predictor::Predictor;
use crate::rng::RngStream;

const DEFAULT_BINS: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "explain",
    version,
    about = "Post-hoc explanations for tabular models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partial dependence curve of one feature.
    Pdp(CurveArgs),
    /// Individual conditional expectation curves of one feature.
    Ice(IceArgs),
    /// Accumulated local effects of one numeric feature.
    Ale(BinArgs),
    /// Conditional-mean (M-plot) curve of one numeric feature.
    Mplot(BinArgs),
    /// Shapley attribution of one row.
    Shap(ShapArgs),
    /// LIME surrogate around one row.
    Lime(LimeArgs),
    /// LIVE neighbourhood of one row.
    Live(LiveArgs),
    /// Permutation feature importance.
    Pfi(PfiArgs),
    /// Friedman H-statistics.
    Hstat(HstatArgs),
    /// PDP-flatness importance of one or every feature.
    Ipd(IpdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// CSV dataset with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON model spec.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// JSON map from column name to "numeric" or "categorical".
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Response column, removed from the features.
    #[arg(long)]
    pub target: Option<String>,
    /// Artifact path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpec {
    Observed,
    Quantile(usize),
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    if s == "observed" {
        return Ok(GridSpec::Observed);
    }
    let k = s
        .strip_prefix("quantile:")
        .ok_or_else(|| format!("expected `observed` or `quantile:K`, got `{s}`"))?;
    match k.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(GridSpec::Quantile(k)),
        _ => Err(format!("quantile count must be an integer >= 1, got `{k}`")),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number > 0, got `{s}`")),
    }
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number >= 0, got `{s}`")),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("expected an integer >= 1, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub feature: String,
    /// `observed` or `quantile:K`; defaults to observed values up to 50 of
    /// them, else 50 quantiles.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Args)]
pub struct IceArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Number of instances drawn (seeded); all rows up to 1000 by default.
    #[arg(long, value_parser = at_least_one)]
    pub sample: Option<usize>,
    /// Anchor every curve at the first grid point (c-ICE).
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, Args)]
pub struct BinArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub feature: String,
    #[arg(long, value_parser = at_least_one, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct RowArg {
    /// Zero-based index of the explained row.
    #[arg(long, default_value_t = 0)]
    pub row: usize,
}

#[derive(Debug, Args)]
pub struct ShapArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub row: RowArg,
    /// Exact computation over all coalitions (the default).
    #[arg(long, conflicts_with_all = ["mc", "linear"])]
    pub exact: bool,
    /// Monte-Carlo estimate with this many iterations per feature.
    #[arg(long, value_parser = at_least_one, conflicts_with = "linear")]
    pub mc: Option<usize>,
    /// Closed form for identity-link GLMs.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct LimeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub row: RowArg,
    #[arg(long, value_parser = at_least_one, default_value_t = 1000)]
    pub nsim: usize,
    /// Kernel width; defaults to 0.75·sqrt(p).
    #[arg(long, value_parser = positive_f64)]
    pub sigma: Option<f64>,
    #[arg(long, value_parser = non_negative_f64, default_value_t = 1.0)]
    pub lambda: f64,
    /// Surrogate terms kept; defaults to min(p, 5).
    #[arg(long, value_parser = at_least_one)]
    pub topk: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LiveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub row: RowArg,
    #[arg(long, value_parser = at_least_one, default_value_t = 1000)]
    pub nsim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Mse,
    Mae,
    Poisson,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Mse => LossKind::Mse,
            LossArg::Mae => LossKind::Mae,
            LossArg::Poisson => LossKind::PoissonDeviance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ratio,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Train,
    Heldout,
}

#[derive(Debug, Args)]
pub struct PfiArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "mse")]
    pub loss: LossArg,
    #[arg(long, value_parser = at_least_one, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    /// JSON object mapping a group name to a list of column names.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ratio")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "train")]
    pub basis: BasisArg,
}

#[derive(Debug, Args)]
pub struct HstatArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated feature names; all features by default.
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Evaluate on a seeded subsample of this many rows.
    #[arg(long, value_parser = at_least_one)]
    pub sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IpdArgs {
    #[command(flatten)]
    pub common: Common,
    /// A single feature; every feature by default.
    #[arg(long)]
    pub feature: Option<String>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn input(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// The produced artifact plus its one-line summary.
struct Artifact {
    json: Value,
    csv: String,
    summary: String,
}

struct Inputs {
    data: Dataset,
    y: Option<Vec<f64>>,
    model: Option<Model>,
}

fn load_inputs(c: &Common, need_model: bool) -> Result<Inputs, Failure> {
    let schema = c
        .schema
        .as_ref()
        .map(read_schema)
        .transpose()
        .map_err(input)?;
    let full = load_dataset(&c.data, schema.as_ref()).map_err(input)?;
    let (data, y) = match &c.target {
        Some(t) => {
            let (d, y) = full.split_target(t).map_err(input)?;
            (d, Some(y))
        }
        None => (full, None),
    };
    let model = match (&c.model, need_model) {
        (Some(path), _) => Some(load_model(path).map_err(input)?),
        (None, true) => return Err(usage("--model is required for this command")),
        (None, false) => None,
    };
    if let Some(m) = &model {
        if m.arity() != data.n_cols() {
            return Err(usage(format!(
                "model expects {} features but the data has {} ({}); use --target to drop the response column",
                m.arity(),
                data.n_cols(),
                data.names().join(", ")
            )));
        }
    }
    Ok(Inputs { data, y, model })
}

fn feature_index(data: &Dataset, name: &str) -> Result<usize, Failure> {
    data.column_index(name).map_err(input)
}

fn seed_for(c: &Common, what: &str) -> Result<u64, Failure> {
    c.seed
        .ok_or_else(|| usage(format!("--seed is required for {what}")))
}

fn build_grid(data: &Dataset, j: usize, spec: Option<GridSpec>) -> Result<Grid, Failure> {
    let g = match spec {
        None => Grid::default_for(data, j),
        Some(GridSpec::Observed) => Grid::observed(data, j),
        Some(GridSpec::Quantile(k)) => Grid::quantiles(data, j, k),
    };
    g.map_err(Failure::Compute)
}

fn grid_name(spec: Option<GridSpec>) -> String {
    match spec {
        None => "default".into(),
        Some(GridSpec::Observed) => "observed".into(),
        Some(GridSpec::Quantile(k)) => format!("quantile:{k}"),
    }
}

fn instance(data: &Dataset, row: usize) -> Result<Vec<f64>, Failure> {
    if row >= data.n_rows() {
        return Err(usage(format!(
            "--row {row} out of range for {} rows",
            data.n_rows()
        )));
    }
    Ok(data.row(row).to_vec())
}

fn curve_artifact(curve: &ExplanationCurve, params: Value) -> Result<Artifact, Failure> {
    let mut json = curve.to_json();
    json["parameters"] = params;
    let n = curve
        .matrix()
        .map_or(String::new(), |m| format!(" x {} instances", m.len()));
    Ok(Artifact {
        summary: format!(
            "{}: {} grid points{} for `{}`",
            json["kind"].as_str().unwrap_or("curve"),
            curve.grid.len(),
            n,
            curve.feature_name
        ),
        csv: curve_csv(curve)?,
        json,
    })
}

fn table_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Compute(Error::Csv(e.to_string()));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Compute(Error::Csv(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt_num(v: Option<f64>) -> String {
    v.map(format_sig17).unwrap_or_default()
}

fn run_pdp(a: &CurveArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let j = feature_index(&inp.data, &a.feature)?;
    let grid = build_grid(&inp.data, j, a.grid)?;
    let curve = pdp_curve(
        inp.model.as_ref().expect("model loaded"),
        &inp.data,
        j,
        &grid,
    )?;
    curve_artifact(&curve, json!({ "grid": grid_name(a.grid) }))
}

fn run_ice(a: &IceArgs) -> Result<Artifact, Failure> {
    let c = &a.curve;
    let inp = load_inputs(&c.common, true)?;
    let j = feature_index(&inp.data, &c.feature)?;
    let grid = build_grid(&inp.data, j, c.grid)?;
    let n = inp.data.n_rows();
    let sample = match a.sample {
        Some(size) if size < n => {
            let seed = seed_for(&c.common, "ICE instance sampling")?;
            let mut rng = RngStream::new(seed, 0).rng();
            let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            IceSample::Indices(idx)
        }
        Some(_) => IceSample::All,
        None if n > crate::global::ICE_MAX_INSTANCES => {
            default_ice_sample(n, seed_for(&c.common, "ICE on more than 1000 rows")?)
        }
        None => IceSample::All,
    };
    let model = inp.model.as_ref().expect("model loaded");
    let mut curve = ice_curves(model, &inp.data, j, &grid, &sample)?;
    if a.center {
        curve = center_curves(&curve, 0)?;
    }
    curve_artifact(
        &curve,
        json!({ "grid": grid_name(c.grid), "sample": a.sample, "center": a.center, "seed": c.common.seed }),
    )
}

fn run_binned(a: &BinArgs, ale: bool) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let j = feature_index(&inp.data, &a.feature)?;
    let model = inp.model.as_ref().expect("model loaded");
    let curve = if ale {
        ale_curve(model, &inp.data, j, a.bins)?
    } else {
        mplot_curve(model, &inp.data, j, a.bins)?
    };
    curve_artifact(&curve, json!({ "bins": a.bins }))
}

fn run_shap(a: &ShapArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let x = instance(&inp.data, a.row.row)?;
    let model = inp.model.as_ref().expect("model loaded");
    let attr = if let Some(m) = a.mc {
        let seed = seed_for(&a.common, "Monte-Carlo Shapley")?;
        shapley_mc_all(model, &inp.data, &x, m, seed)?
    } else if a.linear {
        let glm = model
            .as_glm()
            .ok_or_else(|| usage("--linear needs a glm model"))?;
        shapley_linear(glm, &inp.data, &x)?
    } else {
        shapley_exact(model, &inp.data, &x)?
    };
    let mut json = attr.to_json();
    json["row"] = a.row.row.into();
    let rows = attr
        .names
        .iter()
        .enumerate()
        .map(|(j, n)| {
            vec![
                n.clone(),
                format_sig17(attr.phis[j]),
                opt_num(attr.std_errors.as_ref().map(|s| s[j])),
            ]
        })
        .collect();
    Ok(Artifact {
        summary: format!(
            "shap: row {} prediction {} = base {} + {} contributions",
            a.row.row,
            attr.prediction,
            attr.base,
            attr.phis.len()
        ),
        csv: table_csv(&["feature", "phi", "std_error"], rows)?,
        json,
    })
}

fn run_lime(a: &LimeArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let x = instance(&inp.data, a.row.row)?;
    let seed = seed_for(&a.common, "LIME")?;
    let mut cfg = LimeConfig::new(seed).n_sim(a.nsim).lambda(a.lambda);
    cfg.sigma = a.sigma;
    cfg.k = a.topk;
    let fit = lime_explain(
        inp.model.as_ref().expect("model loaded"),
        &inp.data,
        &x,
        &cfg,
    )?;
    let mut json = fit.to_json();
    json["row"] = a.row.row.into();
    let mut rows = vec![vec!["(intercept)".to_string(), format_sig17(fit.intercept)]];
    rows.extend(
        fit.coefficients
            .iter()
            .map(|(n, v)| vec![n.clone(), format_sig17(*v)]),
    );
    Ok(Artifact {
        summary: format!(
            "lime: row {} surrogate with {} terms (sigma {}, lambda {})",
            a.row.row,
            fit.coefficients.len(),
            fit.kernel_sigma,
            fit.ridge_lambda
        ),
        csv: table_csv(&["term", "coefficient"], rows)?,
        json,
    })
}

fn run_live(a: &LiveArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, false)?;
    let x = instance(&inp.data, a.row.row)?;
    let seed = seed_for(&a.common, "LIVE")?;
    let s = live_neighborhood(&inp.data, &x, a.nsim, seed)?;
    let mut json = s.to_json();
    json["row"] = a.row.row.into();
    json["parameters"] = json!({ "nsim": a.nsim, "seed": seed });
    if let Some(m) = &inp.model {
        json["predictions"] = json!(m.predict_dataset(&s.data)?);
    }
    Ok(Artifact {
        summary: format!("live: {} neighbours of row {}", a.nsim, a.row.row),
        csv: s.data.to_csv_string()?,
        json,
    })
}

#[derive(serde::Deserialize)]
struct GroupFile(serde_json::Map<String, Value>);

fn load_groups(path: &PathBuf, data: &Dataset) -> Result<Vec<FeatureGroup>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(Error::io(path, e)))?;
    let GroupFile(map) = serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "groups file must be a JSON object of name -> [columns]: {e}"
        ))
    })?;
    map.into_iter()
        .map(|(name, cols)| {
            let cols: Vec<String> = serde_json::from_value(cols)
                .map_err(|e| usage(format!("group `{name}` must list column names: {e}")))?;
            let idx = cols
                .iter()
                .map(|c| feature_index(data, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FeatureGroup::new(name, idx))
        })
        .collect()
}

fn run_pfi(a: &PfiArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let y = inp
        .y
        .as_ref()
        .ok_or_else(|| usage("--target is required for pfi"))?;
    let seed = seed_for(&a.common, "permutation importance")?;
    let groups = match &a.groups {
        Some(p) => load_groups(p, &inp.data)?,
        None => singleton_groups(&inp.data),
    };
    let cfg = PfiConfig::new(a.loss.into(), seed)
        .repeats(a.repeats)
        .mode(match a.mode {
            ModeArg::Ratio => PfiMode::Ratio,
            ModeArg::Difference => PfiMode::Difference,
        })
        .basis(match a.basis {
            BasisArg::Train => Basis::Train,
            BasisArg::Heldout => Basis::Heldout,
        });
    let report = pfi_grouped(
        inp.model.as_ref().expect("model loaded"),
        &inp.data,
        y,
        &groups,
        &cfg,
    )?;
    let rows = report
        .entries
        .iter()
        .map(|e| vec![e.name.clone(), format_sig17(e.fi)])
        .collect();
    let top = &report.entries[0];
    Ok(Artifact {
        summary: format!(
            "pfi: {} entries, top `{}` = {} ({} loss, {} repeats)",
            report.entries.len(),
            top.name,
            top.fi,
            report.loss,
            report.repeats
        ),
        csv: table_csv(&["name", "fi"], rows)?,
        json: report.to_json(),
    })
}

fn run_hstat(a: &HstatArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let n = inp.data.n_rows();
    let features = if a.features.is_empty() {
        (0..inp.data.n_cols()).collect()
    } else {
        a.features
            .iter()
            .map(|f| feature_index(&inp.data, f))
            .collect::<Result<Vec<_>, _>>()?
    };
    let sample = match a.sample {
        Some(size) if size > n => {
            return Err(usage(format!("--sample {size} exceeds the {n} rows")))
        }
        Some(size) if size < n => HSample::Subsample {
            size,
            seed: seed_for(&a.common, "H-statistic subsampling")?,
        },
        Some(_) => HSample::Full,
        None => HSample::default_for(n, a.common.seed).map_err(|e| usage(e.to_string()))?,
    };
    let m = h_matrix(
        inp.model.as_ref().expect("model loaded"),
        &inp.data,
        &features,
        &sample,
    )?;
    let mut json = m.to_json();
    json["parameters"] = json!({ "sample": a.sample, "seed": a.common.seed });
    let name = |j: usize| inp.data.name(j).to_string();
    let mut rows: Vec<Vec<String>> = m
        .pairs
        .iter()
        .map(|p| vec![name(p.i), name(p.j), opt_num(p.h2)])
        .collect();
    rows.extend(
        m.features
            .iter()
            .zip(&m.one_vs_rest)
            .map(|(&j, h)| vec![name(j), "(rest)".into(), opt_num(*h)]),
    );
    let undefined = m.pairs.iter().filter(|p| p.h2.is_none()).count()
        + m.one_vs_rest.iter().filter(|h| h.is_none()).count();
    Ok(Artifact {
        summary: format!(
            "hstat: {} pairs and {} one-vs-rest statistics over {} features ({undefined} undefined)",
            m.pairs.len(),
            m.one_vs_rest.len(),
            m.features.len()
        ),
        csv: table_csv(&["feature", "other", "h2"], rows)?,
        json,
    })
}

fn run_ipd(a: &IpdArgs) -> Result<Artifact, Failure> {
    let inp = load_inputs(&a.common, true)?;
    let model = inp.model.as_ref().expect("model loaded");
    let features = match &a.feature {
        Some(f) => vec![feature_index(&inp.data, f)?],
        None => (0..inp.data.n_cols()).collect(),
    };
    let mut entries = Vec::new();
    for j in features {
        let grid = build_grid(&inp.data, j, a.grid)?;
        let curve = pdp_curve(model, &inp.data, j, &grid)?;
        let kind = inp.data.kind(j);
        let ipd = ipd_importance(&curve, kind)?;
        let statistic = match kind {
            ColumnKind::Numeric => "variance",
            ColumnKind::Categorical { .. } => "range/4",
        };
        entries.push((inp.data.name(j).to_string(), ipd, statistic));
    }
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    let json = json!({
        "entries": entries
            .iter()
            .map(|(n, v, s)| json!({ "name": n, "ipd": v, "statistic": s }))
            .collect::<Vec<_>>(),
        "parameters": { "grid": grid_name(a.grid) },
    });
    let rows = entries
        .iter()
        .map(|(n, v, s)| vec![n.clone(), format_sig17(*v), s.to_string()])
        .collect();
    Ok(Artifact {
        summary: format!(
            "ipd: {} features, top `{}` = {}",
            entries.len(),
            entries[0].0,
            entries[0].1
        ),
        csv: table_csv(&["name", "ipd", "statistic"], rows)?,
        json,
    })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Pdp(a) => &a.common,
        Command::Ice(a) => &a.curve.common,
        Command::Ale(a) | Command::Mplot(a) => &a.common,
        Command::Shap(a) => &a.common,
        Command::Lime(a) => &a.common,
        Command::Live(a) => &a.common,
        Command::Pfi(a) => &a.common,
        Command::Hstat(a) => &a.common,
        Command::Ipd(a) => &a.common,
    }
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let artifact = match &cli.command {
        Command::Pdp(a) => run_pdp(a),
        Command::Ice(a) => run_ice(a),
        Command::Ale(a) => run_binned(a, true),
        Command::Mplot(a) => run_binned(a, false),
        Command::Shap(a) => run_shap(a),
        Command::Lime(a) => run_lime(a),
        Command::Live(a) => run_live(a),
        Command::Pfi(a) => run_pfi(a),
        Command::Hstat(a) => run_hstat(a),
        Command::Ipd(a) => run_ipd(a),
    }?;
    let c = common(&cli.command);
    let bytes = match c.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&artifact.json)
                .map_err(|e| Failure::Compute(e.into()))?;
            s.push('\n');
            s
        }
        Format::Csv => artifact.csv,
    };
    write_atomic(&c.out, bytes.as_bytes()).map_err(input)?;
    Ok(format!("{} -> {}", artifact.summary, c.out.display()))
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var("EXPLAIN_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!(
                "EXPLAIN_THREADS must be an integer >= 1, got `{v}`"
            )),
        },
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    match thread_count() {
        Ok(Some(n)) => pool = pool.num_threads(n),
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    }
    let outcome = match pool.build() {
        Ok(pool) => pool.install(|| execute(&cli)),
        Err(e) => Err(usage(format!("cannot start worker pool: {e}"))),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
