//! Configuration-driven experiments: the full pipeline for one config, the
//! alpha sweep on the `figure1a` template, and batch suites.
//!
//! Every random draw comes from one of the three seeds in [`Seeds`], so a
//! config fully determines its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::generator::{
    build_generator, generate_signals, signal_correlation, synthesize_coefficients, GeneratorSpec,
    SignalMatrix, SignalMode, SignalSpec,
};
use crate::graph::{
    build_graph, normalized_laplacian, second_smallest_singular_value, GraphFamily, GraphTemplate,
    WeightedGraph,
};
use crate::io::{self, FactorizationFile, GraphFile};
use crate::lowrank::{
    approx_samp, approx_svd, select_rank, LowRankFactorization, RankSelection, Scheme,
};
use crate::numerics::{svd, DenseMatrix};
use crate::reconstruct::{
    error_report, reconstruct, subsample, ReconstructionReport, SubsamplingOperator,
};
use crate::selection::{select_and_approximate, GreedyOptions, SelectionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    Svd,
    Samp,
    #[default]
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> &'static [Scheme] {
        match self {
            SchemeChoice::Svd => &[Scheme::Svd],
            SchemeChoice::Samp => &[Scheme::Samp],
            SchemeChoice::Both => &[Scheme::Svd, Scheme::Samp],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeChoice::Svd => "svd",
            SchemeChoice::Samp => "samp",
            SchemeChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Number of Normal(0, 1) coefficients to draw when `coefficients` is absent.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

fn default_order() -> usize {
    5
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            order: default_order(),
            coefficients: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    #[serde(default = "default_time_samples")]
    pub time_samples: usize,
    #[serde(default)]
    pub mode: SignalMode,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
}

fn default_time_samples() -> usize {
    256
}

fn default_harmonics() -> usize {
    3
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            time_samples: default_time_samples(),
            mode: SignalMode::default(),
            harmonics: default_harmonics(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default = "default_graph_seed")]
    pub graph: u64,
    #[serde(default = "default_coefficient_seed")]
    pub coefficients: u64,
    #[serde(default = "default_signal_seed")]
    pub signal: u64,
}

fn default_graph_seed() -> u64 {
    1
}

fn default_coefficient_seed() -> u64 {
    2
}

fn default_signal_seed() -> u64 {
    3
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            graph: default_graph_seed(),
            coefficients: default_coefficient_seed(),
            signal: default_signal_seed(),
        }
    }
}

/// One experiment: graph, generator, signals, tolerance and schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub graph: GraphFamily,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    pub epsilon: f64,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub rowsum_active_only: bool,
}

impl ExperimentConfig {
    pub fn new(graph: GraphFamily, epsilon: f64) -> Self {
        Self {
            label: None,
            graph,
            generator: GeneratorConfig::default(),
            signal: SignalConfig::default(),
            epsilon,
            scheme: SchemeChoice::Both,
            seeds: Seeds::default(),
            output_dir: None,
            rowsum_active_only: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Summary label: the explicit label, else the graph kind (with alpha for
    /// `figure1a`).
    pub fn family(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match &self.graph {
            GraphFamily::Figure1a { alpha, .. } => format!("figure1a(alpha={alpha})"),
            other => other.kind().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        self.graph.validate()?;
        self.generator_spec()?;
        self.signal_spec(0).validate()?;
        Ok(())
    }

    pub fn graph_template(&self) -> GraphTemplate {
        GraphTemplate::new(self.graph.clone(), self.seeds.graph)
    }

    pub fn generator_spec(&self) -> Result<GeneratorSpec> {
        match &self.generator.coefficients {
            Some(coefficients) => GeneratorSpec::new(coefficients.clone()),
            None => GeneratorSpec::random(self.generator.order, self.seeds.coefficients),
        }
    }

    fn signal_spec(&self, _n: usize) -> SignalSpec {
        SignalSpec {
            time_samples: self.signal.time_samples,
            mode: self.signal.mode,
            harmonics: self.signal.harmonics,
            seed: self.seeds.signal,
        }
    }

    /// Copy with the drawn generator coefficients written out explicitly.
    pub fn resolved(&self) -> Result<Self> {
        let mut cfg = self.clone();
        let spec = self.generator_spec()?;
        cfg.generator = GeneratorConfig {
            order: spec.order(),
            coefficients: Some(spec.coefficients),
        };
        Ok(cfg)
    }
}

/// Graph, Laplacian, generator and its spectrum: everything before signals.
#[derive(Debug, Clone)]
pub struct Model {
    pub graph: WeightedGraph,
    pub laplacian: DenseMatrix,
    pub generator: GeneratorSpec,
    pub b: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub rank: RankSelection,
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<Model> {
    cfg.validate().stage("config")?;
    let graph = build_graph(&cfg.graph_template()).stage("build_graph")?;
    let laplacian = normalized_laplacian(&graph).stage("normalized_laplacian")?;
    let generator = cfg.generator_spec().stage("build_generator")?;
    let b = build_generator(&laplacian, &generator).stage("build_generator")?;
    let singular_values = svd(&b).stage("svd")?.singular_values;
    let rank = select_rank(&singular_values, cfg.epsilon).stage("select_rank")?;
    Ok(Model {
        graph,
        laplacian,
        generator,
        b,
        singular_values,
        rank,
    })
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub selection: SelectionResult,
    pub factorization: LowRankFactorization,
    pub report: ReconstructionReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub model: Model,
    pub coefficients: SignalMatrix,
    pub signals: SignalMatrix,
    pub runs: Vec<SchemeRun>,
}

impl ExperimentOutcome {
    pub fn run(&self, scheme: Scheme) -> Option<&SchemeRun> {
        self.runs.iter().find(|r| r.report.scheme == scheme)
    }
}

fn greedy_options(cfg: &ExperimentConfig) -> GreedyOptions {
    GreedyOptions {
        rowsum_active_only: cfg.rowsum_active_only,
    }
}

/// Greedy selection for each configured scheme, without signals.
pub fn select_nodes(cfg: &ExperimentConfig) -> Result<(Model, Vec<SelectionResult>)> {
    let model = build_model(cfg)?;
    let selections = cfg
        .scheme
        .schemes()
        .iter()
        .map(|&scheme| {
            select_and_approximate(&model.b, model.rank.rank, scheme, greedy_options(cfg))
                .map(|(s, _)| s)
                .stage("greedy_select")
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((model, selections))
}

/// Reconstruct `y` from the rows at `fac.selected_set` and account the error.
pub fn reconstruct_with(
    b: &DenseMatrix,
    fac: &LowRankFactorization,
    c: &SignalMatrix,
    y: &SignalMatrix,
) -> Result<ReconstructionReport> {
    let selected = fac
        .selected_set
        .clone()
        .ok_or_else(|| Error::InvalidConfig("factorization has no selected set".into()))?;
    let op = SubsamplingOperator::new(b.rows(), selected)?;
    let y_s = subsample(y, &op).stage("subsample")?;
    let y_hat = reconstruct(&y_s, fac, &op).stage("reconstruct")?;
    error_report(y, &y_hat, b, fac, c, &op).stage("error_report")
}

/// Full pipeline for one config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let model = build_model(cfg)?;
    let n = model.graph.n();
    let coefficients =
        synthesize_coefficients(n, &cfg.signal_spec(n)).stage("synthesize_coefficients")?;
    let signals = generate_signals(&model.b, &coefficients).stage("generate_signals")?;

    let mut runs = Vec::new();
    for &scheme in cfg.scheme.schemes() {
        let (selection, factorization) =
            select_and_approximate(&model.b, model.rank.rank, scheme, greedy_options(cfg))
                .stage("greedy_select")?;
        let report = reconstruct_with(&model.b, &factorization, &coefficients, &signals)?;
        runs.push(SchemeRun {
            selection,
            factorization,
            report,
        });
    }
    Ok(ExperimentOutcome {
        config: cfg.resolved()?,
        model,
        coefficients,
        signals,
        runs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionFile {
    pub family: String,
    pub epsilon: f64,
    pub rank: RankSelection,
    pub singular_values: Vec<f64>,
    pub selections: Vec<SelectionResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub family: String,
    pub epsilon: f64,
    pub rank: RankSelection,
    pub generator_coefficients: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub reports: Vec<ReconstructionReport>,
}

/// Write `config.json`, `graph.json`, `latent.csv`, `signals.csv`,
/// `selection.json`, `report.json`, and per-scheme `factorization_*.json`
/// and `reconstructed_*.csv` into `dir`.
pub fn write_artifacts(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let cfg = &outcome.config;
    let model = &outcome.model;
    io::write_json(&dir.join("config.json"), cfg)?;
    io::write_json(
        &dir.join("graph.json"),
        &GraphFile::new(&model.graph, &cfg.graph, cfg.seeds.graph),
    )?;
    fs::write(
        dir.join("latent.csv"),
        io::signals_to_csv(&outcome.coefficients),
    )?;
    fs::write(
        dir.join("signals.csv"),
        io::signals_to_csv(&outcome.signals),
    )?;
    io::write_json(
        &dir.join("selection.json"),
        &SelectionFile {
            family: cfg.family(),
            epsilon: cfg.epsilon,
            rank: model.rank.clone(),
            singular_values: model.singular_values.clone(),
            selections: outcome.runs.iter().map(|r| r.selection.clone()).collect(),
        },
    )?;
    io::write_json(
        &dir.join("report.json"),
        &ReportFile {
            family: cfg.family(),
            epsilon: cfg.epsilon,
            rank: model.rank.clone(),
            generator_coefficients: model.generator.coefficients.clone(),
            singular_values: model.singular_values.clone(),
            reports: outcome.runs.iter().map(|r| r.report.clone()).collect(),
        },
    )?;
    for run in &outcome.runs {
        let scheme = run.report.scheme;
        io::write_json(
            &dir.join(format!("factorization_{scheme}.json")),
            &FactorizationFile::new(&run.factorization, &model.singular_values),
        )?;
        if let Some(y_hat) = &run.report.y_hat {
            fs::write(
                dir.join(format!("reconstructed_{scheme}.csv")),
                io::signals_to_csv(y_hat),
            )?;
        }
    }
    Ok(())
}

/// Re-run reconstruction from a directory written by [`write_artifacts`].
pub fn reconstruct_from_artifacts(dir: &Path) -> Result<Vec<ReconstructionReport>> {
    let cfg = ExperimentConfig::load(&dir.join("config.json")).stage("config")?;
    let graph_file: GraphFile = io::read_json(&dir.join("graph.json")).stage("graph")?;
    let graph = graph_file.to_graph().stage("graph")?;
    let laplacian = normalized_laplacian(&graph).stage("normalized_laplacian")?;
    let b = build_generator(&laplacian, &cfg.generator_spec()?).stage("build_generator")?;
    let read_signals = |name: &str| -> Result<SignalMatrix> {
        io::signals_from_csv(fs::File::open(dir.join(name))?)
    };
    let c = read_signals("latent.csv").stage("latent")?;
    let y = read_signals("signals.csv").stage("signals")?;
    let selection: SelectionFile = io::read_json(&dir.join("selection.json")).stage("selection")?;
    if selection.rank.rank == 0 {
        return Err(Error::InvalidConfig("selection has rank 0".into()));
    }

    let mut reports = Vec::new();
    for sel in &selection.selections {
        let scheme = sel
            .scheme
            .ok_or_else(|| Error::InvalidConfig("selection without scheme".into()))?;
        let fac = match scheme {
            Scheme::Svd => {
                let mut fac = approx_svd(&b, sel.selected.len()).stage("approximation")?;
                fac.selected_set = Some(sel.selected.clone());
                fac
            }
            Scheme::Samp => approx_samp(&b, &sel.selected).stage("approximation")?,
        };
        let report = reconstruct_with(&b, &fac, &c, &y)?;
        if let Some(y_hat) = &report.y_hat {
            fs::write(
                dir.join(format!("reconstructed_{scheme}.csv")),
                io::signals_to_csv(y_hat),
            )?;
        }
        reports.push(report);
    }
    Ok(reports)
}

/// One row of the alpha sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    /// Second smallest singular value of `B`.
    pub sigma2: f64,
    /// Correlation of nodes 2 and 4 (1-based), i.e. indices 1 and 3.
    pub corr_24: f64,
    /// Correlation of nodes 1 and 5 (1-based), i.e. indices 0 and 4.
    pub corr_15: f64,
    pub error_db: f64,
}

/// Sweep the `figure1a` edge weight. With `scheme = both` the error column
/// reports the samp reconstruction.
pub fn sweep_alpha(base: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<SweepRow>> {
    if base.graph.with_alpha(1.0).is_none() {
        return Err(Error::InvalidConfig(format!(
            "alpha sweep needs a figure1a template, got {}",
            base.graph.kind()
        )));
    }
    let scheme = match base.scheme {
        SchemeChoice::Svd => Scheme::Svd,
        SchemeChoice::Samp | SchemeChoice::Both => Scheme::Samp,
    };
    alphas
        .iter()
        .map(|&alpha| {
            let mut cfg = base.clone();
            cfg.graph = base.graph.with_alpha(alpha).expect("checked above");
            cfg.scheme = match scheme {
                Scheme::Svd => SchemeChoice::Svd,
                Scheme::Samp => SchemeChoice::Samp,
            };
            let outcome = run_experiment(&cfg)?;
            let sigma2 = second_smallest_singular_value(&outcome.model.b)?;
            Ok(SweepRow {
                alpha,
                sigma2,
                corr_24: signal_correlation(&outcome.signals, 1, 3)?,
                corr_15: signal_correlation(&outcome.signals, 0, 4)?,
                error_db: outcome.runs[0].report.error_db,
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,sigma2,corr_24,corr_15,error_db\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            io::fmt_float(r.alpha),
            io::fmt_float(r.sigma2),
            io::fmt_float(r.corr_24),
            io::fmt_float(r.corr_15),
            io::fmt_float(r.error_db)
        ));
    }
    out
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub epsilon: f64,
    pub scheme: String,
    pub rank: Option<usize>,
    pub error_db: Option<f64>,
    pub cond_ast: Option<f64>,
    /// Set when the config failed; the other optional fields are then empty.
    pub failure: Option<String>,
}

impl SummaryRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

pub const SUMMARY_HEADER: &str = "family,epsilon,scheme,P,error_db,cond_ast";

pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER.split(','))?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(io::fmt_float).unwrap_or_default();
        w.write_record([
            r.family.clone(),
            io::fmt_float(r.epsilon),
            r.scheme.clone(),
            r.rank.map(|p| p.to_string()).unwrap_or_default(),
            if r.failed() {
                "failed".to_string()
            } else {
                opt(r.error_db)
            },
            opt(r.cond_ast),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parse a suite file (a JSON array of configs). Entries that fail to parse
/// come back as errors in place so the rest of the suite can still run.
pub fn parse_suite(text: &str) -> Result<Vec<Result<ExperimentConfig>>> {
    let entries: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(entries
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| Error::InvalidConfig(e.to_string())))
        .collect())
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Run every config. Failures are recorded as summary rows; the run goes on.
/// When `out_dir` is set, each config's artifacts go to its own subdirectory.
pub fn run_suite(entries: &[Result<ExperimentConfig>], out_dir: Option<&Path>) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (idx, entry) in entries.iter().enumerate() {
        let cfg = match entry {
            Ok(cfg) => cfg,
            Err(e) => {
                rows.push(SummaryRow {
                    family: format!("entry{idx}"),
                    epsilon: f64::NAN,
                    scheme: String::new(),
                    rank: None,
                    error_db: None,
                    cond_ast: None,
                    failure: Some(e.to_string()),
                });
                continue;
            }
        };
        let result = run_experiment(cfg).and_then(|outcome| {
            if let Some(out) = out_dir {
                let dir = out.join(format!(
                    "{idx:02}_{}_eps{}",
                    slug(&cfg.family()),
                    cfg.epsilon
                ));
                write_artifacts(&outcome, &dir)?;
            }
            Ok(outcome)
        });
        match result {
            Ok(outcome) => {
                for run in &outcome.runs {
                    rows.push(SummaryRow {
                        family: cfg.family(),
                        epsilon: cfg.epsilon,
                        scheme: run.report.scheme.to_string(),
                        rank: Some(run.report.rank),
                        error_db: Some(run.report.error_db),
                        cond_ast: Some(run.report.condition_ast),
                        failure: None,
                    });
                }
            }
            Err(e) => rows.push(SummaryRow {
                family: cfg.family(),
                epsilon: cfg.epsilon,
                scheme: cfg.scheme.as_str().to_string(),
                rank: None,
                error_db: None,
                cond_ast: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure1a(alpha: f64, epsilon: f64) -> ExperimentConfig {
        ExperimentConfig::new(
            GraphFamily::Figure1a {
                alpha,
                base_weight: 1.0,
            },
            epsilon,
        )
    }

    #[test]
    fn config_defaults_from_minimal_json() {
        let cfg = ExperimentConfig::from_json(
            r#"{"graph": {"kind": "complete", "n": 5}, "epsilon": 0.03}"#,
        )
        .unwrap();
        assert_eq!(cfg.scheme, SchemeChoice::Both);
        assert_eq!(cfg.generator.order, 5);
        assert_eq!(cfg.signal.time_samples, 256);
        assert_eq!(cfg.seeds, Seeds::default());
        assert_eq!(cfg.family(), "complete");
    }

    #[test]
    fn config_rejects_unknown_fields_and_bad_epsilon() {
        let err = ExperimentConfig::from_json(
            r#"{"graph": {"kind": "complete", "n": 5}, "epsilon": 0.03, "epsilonn": 1}"#,
        )
        .unwrap_err();
        assert!(err.is_config());
        let cfg = figure1a(1.0, 1.5);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.is_config(), "{err}");
        assert!(err.to_string().contains("config"));
    }

    #[test]
    fn figure1a_alpha_one_removes_one_node_exactly() {
        let outcome = run_experiment(&figure1a(1.0, 0.01)).unwrap();
        assert_eq!(outcome.model.rank.rank, 4);
        for run in &outcome.runs {
            assert!(run.report.error_db <= -180.0, "{:?}", run.report.error_db);
        }
    }

    #[test]
    fn stage_names_are_attached() {
        let cfg = ExperimentConfig::new(
            GraphFamily::ErdosRenyi {
                n: 5,
                p: 0.0,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            0.03,
        );
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err.root(), Error::IsolatedNode(_)));
        assert!(err.to_string().contains("normalized_laplacian"));
        assert!(err.is_numerical());
    }

    #[test]
    fn sweep_needs_alpha() {
        let cfg = ExperimentConfig::new(
            GraphFamily::Complete {
                n: 5,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            0.03,
        );
        assert!(sweep_alpha(&cfg, &[1.0]).unwrap_err().is_config());
        let rows = sweep_alpha(&figure1a(1.0, 0.03), &[2.0]).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn sweep_sigma2_matches_direct_computation() {
        let base = figure1a(1.0, 0.03);
        let rows = sweep_alpha(&base, &[1.0]).unwrap();
        let model = build_model(&base).unwrap();
        let direct = second_smallest_singular_value(&model.b).unwrap();
        assert_eq!(rows[0].sigma2, direct);
    }

    #[test]
    fn summary_csv_flags_failures() {
        let rows = vec![
            SummaryRow {
                family: "complete".into(),
                epsilon: 0.03,
                scheme: "svd".into(),
                rank: Some(3),
                error_db: Some(-20.5),
                cond_ast: Some(2.0),
                failure: None,
            },
            SummaryRow {
                family: "bad, config".into(),
                epsilon: 1.5,
                scheme: "both".into(),
                rank: None,
                error_db: None,
                cond_ast: None,
                failure: Some("boom".into()),
            },
        ];
        let csv = summary_to_csv(&rows).unwrap();
        assert_eq!(
            csv,
            "family,epsilon,scheme,P,error_db,cond_ast\ncomplete,0.03,svd,3,-20.5,2.0\n\"bad, config\",1.5,both,,failed,\n"
        );
    }

    #[test]
    fn empty_suite() {
        let entries = parse_suite("[]").unwrap();
        let rows = run_suite(&entries, None);
        assert!(rows.is_empty());
        assert_eq!(
            summary_to_csv(&rows).unwrap(),
            format!("{SUMMARY_HEADER}\n")
        );
    }

    #[test]
    fn suite_isolates_invalid_entries() {
        let text = r#"[
            {"graph": {"kind": "complete", "n": 5}, "epsilon": 0.03},
            {"graph": {"kind": "complete", "n": 5}, "epsilon": 1.5},
            {"graph": {"kind": "hexagon"}, "epsilon": 0.03},
            {"graph": {"kind": "bipartite", "left": 2, "right": 3}, "epsilon": 0.03, "scheme": "samp"}
        ]"#;
        let entries = parse_suite(text).unwrap();
        let rows = run_suite(&entries, None);
        let failed: Vec<_> = rows.iter().filter(|r| r.failed()).collect();
        assert_eq!(failed.len(), 2);
        let ok: Vec<_> = rows.iter().filter(|r| !r.failed()).collect();
        assert_eq!(ok.len(), 3);
        assert_eq!(ok[2].scheme, "samp");
    }
}
