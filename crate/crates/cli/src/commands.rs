//! Subcommand implementations. Each command writes its artifacts plus a
//! [`RunManifest`] into the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tsxplain::explainer::explain_detailed;
use tsxplain::model::builtin_models;
use tsxplain::synthetic::seasonal_series;
use tsxplain::{
    run_perturbation_analysis, Algorithm, Dataset, EvalConfig, ExplainConfig, ModelLocator, ReplacementKind,
    SegmenterConfig, SlopeVariant,
};

use crate::csv_io::{read_csv_file, write_csv_file, Table};
use crate::docs::{
    digest_file, sha256_hex, to_json, AlgoResult, AttributionDoc, EvalDoc, EvalDocConfig, FileDigest, RunManifest,
    SegmentMapDoc, MANIFEST_FILE, SCHEMA_VERSION,
};
use crate::error::CliError;
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "tsxplain", version, about = "Segment-based local explanations for time-series forecasters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Segment a CSV sample and write the segment maps.
    Segment(SegmentArgs),
    /// Explain one forecast with a local surrogate.
    Explain(ExplainArgs),
    /// Perturbation analysis over every window of a series.
    Evaluate(EvaluateArgs),
    /// Synthetic end-to-end run.
    Demo(DemoArgs),
    /// Rerun a recorded command and compare its outputs.
    Replay(ReplayArgs),
    /// List the builtin models.
    Models,
}

/// Segmentation parameters shared by the commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SegmentParams {
    /// Matrix-profile / uniform window size (default: max(2, T/8)).
    #[arg(long)]
    pub window_size: Option<usize>,
    /// Border count (slopes), bin count (bins) or target segment count (sax).
    #[arg(long)]
    pub partitions: Option<usize>,
    #[arg(long, default_value_t = SlopeVariant::Gradient)]
    pub slope_variant: SlopeVariant,
}

impl SegmentParams {
    fn config(&self, algorithm: Algorithm) -> SegmenterConfig {
        SegmenterConfig {
            algorithm,
            window_size: self.window_size,
            partitions: self.partitions,
            slope_variant: self.slope_variant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SegmentArgs {
    pub input: PathBuf,
    /// Algorithm name or `all`.
    #[arg(long, default_value = "uniform")]
    pub algo: String,
    #[command(flatten)]
    pub params: SegmentParams,
    /// Also render an SVG per algorithm.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

/// Surrogate parameters shared by explain and evaluate.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SurrogateParams {
    #[arg(long, default_value_t = ReplacementKind::Zero)]
    pub replacement: ReplacementKind,
    #[arg(long, default_value_t = 1000)]
    pub masks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub keep_prob: f64,
    /// Kernel width (default: 0.75 * sqrt(segments)).
    #[arg(long)]
    pub kernel_width: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub ridge: f64,
    /// Perturbed windows per model request.
    #[arg(long, default_value_t = 250)]
    pub batch_size: usize,
    /// Seconds to wait for one external model response.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
}

impl SurrogateParams {
    fn explain_config(&self, replacement: ReplacementKind) -> ExplainConfig {
        ExplainConfig {
            num_masks: self.masks,
            keep_probability: self.keep_prob,
            kernel_width: self.kernel_width,
            ridge_strength: self.ridge,
            rng_seed: self.seed,
            replacement,
            batch_size: self.batch_size,
        }
    }

    fn timeout(&self) -> Result<Duration, CliError> {
        Duration::try_from_secs_f64(self.timeout).map_err(|_| CliError::input(format!("invalid timeout {}", self.timeout)))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExplainArgs {
    pub input: PathBuf,
    /// `builtin:NAME[:k=v,..]`, `process:CMD` or `http:URL`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value = "uniform")]
    pub algo: String,
    #[command(flatten)]
    pub params: SegmentParams,
    #[command(flatten)]
    pub surrogate: SurrogateParams,
    /// First row of the window to explain.
    #[arg(long, default_value_t = 0)]
    pub window_start: usize,
    /// Window length (default: all rows from the start).
    #[arg(long)]
    pub window_length: Option<usize>,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    pub input: PathBuf,
    /// Model locator; repeat for several table columns.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    #[arg(long)]
    pub window_length: usize,
    #[arg(long, default_value_t = 0)]
    pub target_feature: usize,
    /// Comma-separated algorithm names or `all`.
    #[arg(long, default_value = "all")]
    pub algos: String,
    /// Comma-separated replacement strategies.
    #[arg(long, default_value = "zero")]
    pub replacements: String,
    #[arg(long, default_value_t = 90.0)]
    pub percentile: f64,
    #[command(flatten)]
    pub params: SegmentParams,
    #[command(flatten)]
    pub surrogate: SurrogateParams,
    #[arg(long, default_value_t = 5)]
    pub random_repeats: usize,
    /// Reuse the informed cell set for the baseline (every score becomes 1).
    #[arg(long)]
    pub mirror_baseline: bool,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    #[serde(skip)]
    pub workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub windows: usize,
    #[arg(long, default_value_t = 300)]
    pub masks: usize,
    #[arg(long)]
    #[serde(skip)]
    pub workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Collects output files so their digests can go into the manifest.
struct OutDir {
    root: PathBuf,
    written: Vec<FileDigest>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::internal(format!("{}: {e}", root.display())))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        self.written.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    fn finish(mut self, manifest: ManifestParts) -> Result<(), CliError> {
        self.written.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: "tsxplain".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: manifest.command.into(),
            invocation: manifest.invocation,
            parameters: manifest.parameters,
            seeds: manifest.seeds,
            inputs: manifest.inputs,
            outputs: std::mem::take(&mut self.written),
        };
        self.write(MANIFEST_FILE, &to_json(&manifest))
    }
}

struct ManifestParts {
    command: &'static str,
    invocation: serde_json::Value,
    parameters: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<FileDigest>,
}

fn invocation(command: &Command) -> serde_json::Value {
    serde_json::to_value(command).expect("arguments serialize")
}

fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, CliError> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let a: Algorithm = part.parse().map_err(CliError::Input)?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(CliError::input("no segmentation algorithm given"));
    }
    Ok(out)
}

fn parse_replacements(list: &str) -> Result<Vec<ReplacementKind>, CliError> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ReplacementKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let r: ReplacementKind = part.parse().map_err(CliError::Input)?;
        if !out.contains(&r) {
            out.push(r);
        }
    }
    if out.is_empty() {
        return Err(CliError::input("no replacement strategy given"));
    }
    Ok(out)
}

/// Fills in defaults so the manifest records the values actually used.
fn resolved(config: SegmenterConfig, timesteps: usize) -> SegmenterConfig {
    SegmenterConfig {
        window_size: Some(config.resolved_window_size(timesteps)),
        partitions: Some(config.resolved_partitions()),
        ..config
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::input("--workers must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(CliError::internal)?;
    Ok(pool.install(f))
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<(), CliError> {
    let table = read_csv_file(&args.input)?;
    let algorithms = parse_algorithms(&args.algo)?;
    let timesteps = table.sample.timesteps();
    let mut out = OutDir::create(&args.out)?;
    let mut maps = Vec::new();
    let mut configs = BTreeMap::new();
    for &algorithm in &algorithms {
        let config = resolved(args.params.config(algorithm), timesteps);
        let map = config.segment(&table.sample)?;
        out.write(
            &format!("segments-{algorithm}.json"),
            &to_json(&SegmentMapDoc::new(algorithm.name(), &map)),
        )?;
        if args.svg {
            out.write(&format!("segments-{algorithm}.svg"), &svg::segments_svg(&table, &map, algorithm))?;
        }
        configs.insert(algorithm.name().to_string(), config);
        maps.push((algorithm, map));
    }
    if maps.len() > 1 {
        out.write("comparison.svg", &svg::comparison_svg(&table, &maps))?;
    }
    out.finish(ManifestParts {
        command: "segment",
        invocation: invocation(&Command::Segment(args.clone())),
        parameters: json!({ "segmenters": configs, "shape": [timesteps, table.sample.features()] }),
        seeds: BTreeMap::new(),
        inputs: vec![digest_file(&args.input, args.input.display().to_string())?],
    })
}

pub fn cmd_explain(args: &ExplainArgs) -> Result<(), CliError> {
    let full = read_csv_file(&args.input)?;
    let rows = full.sample.timesteps();
    let start = args.window_start;
    let len = args.window_length.unwrap_or(rows.saturating_sub(start));
    if start >= rows || len > rows - start {
        return Err(CliError::input(format!(
            "window [{start}, {}) does not fit {rows} rows",
            start + len
        )));
    }
    let table = full.slice(start, len)?;
    let algorithm: Algorithm = args.algo.parse().map_err(CliError::Input)?;
    let segmenter = resolved(args.params.config(algorithm), len);
    let locator: ModelLocator = args.model.parse()?;
    let model = locator.open(table.sample.shape(), args.surrogate.timeout()?)?;
    let config = args.surrogate.explain_config(args.surrogate.replacement);
    let explanation = explain_detailed(&table.sample, &segmenter, model.as_ref(), &config)?;

    let mut out = OutDir::create(&args.out)?;
    out.write("attribution.json", &to_json(&AttributionDoc::new(&explanation.attribution)))?;
    if args.svg {
        let title = format!(
            "{} attribution, {} segments, model {}",
            algorithm.title(),
            explanation.attribution.segments().num_segments(),
            args.model
        );
        out.write("attribution.svg", &svg::attribution_svg(&table, &explanation.attribution, &title))?;
    }
    out.finish(ManifestParts {
        command: "explain",
        invocation: invocation(&Command::Explain(args.clone())),
        parameters: json!({
            "model": args.model,
            "segmenter": segmenter,
            "explain": config,
            "kernel_width": explanation.kernel_width,
            "window": [start, start + len],
        }),
        seeds: BTreeMap::from([("masks".to_string(), config.rng_seed)]),
        inputs: vec![digest_file(&args.input, args.input.display().to_string())?],
    })
}

fn format_score(score: Option<f64>) -> String {
    score.map_or_else(|| "n/a".to_string(), |s| format!("{s:.2}"))
}

/// Segmenter rows by model columns, one block per replacement strategy.
fn render_table(models: &[String], replacements: &[ReplacementKind], algorithms: &[Algorithm], docs: &[Vec<EvalDoc>]) -> String {
    let mut s = String::from("Perturbation analysis: score = |pert_c| / |rand_c| (above 1 beats random cells; n/a = undefined)\n");
    let label_width = algorithms.iter().map(|a| a.title().len()).max().unwrap_or(0).max(12) + 2;
    for (r, replacement) in replacements.iter().enumerate() {
        let _ = write!(s, "\nreplacement: {replacement}\n{:<label_width$}", "segmentation");
        for m in 0..models.len() {
            let _ = write!(s, "{:>10}", format!("m{}", m + 1));
        }
        s.push('\n');
        for algorithm in algorithms {
            let _ = write!(s, "{:<label_width$}", algorithm.title());
            for doc in &docs[r] {
                let _ = write!(s, "{:>10}", format_score(doc.per_algo[algorithm.name()].score));
            }
            s.push('\n');
        }
    }
    s.push('\n');
    for (m, locator) in models.iter().enumerate() {
        let _ = writeln!(s, "m{} = {locator}", m + 1);
    }
    s
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let table = read_csv_file(&args.input)?;
    let dataset = Dataset::new(table.sample.clone(), args.window_length, args.target_feature)?;
    let algorithms = parse_algorithms(&args.algos)?;
    let replacements = parse_replacements(&args.replacements)?;
    let timeout = args.surrogate.timeout()?;
    let shape = (args.window_length, table.sample.features());
    let locators = args
        .models
        .iter()
        .map(|m| m.parse::<ModelLocator>())
        .collect::<Result<Vec<_>, _>>()?;

    // docs[replacement][model]
    let mut docs: Vec<Vec<EvalDoc>> = vec![Vec::new(); replacements.len()];
    for (m, locator) in locators.iter().enumerate() {
        // one adapter per model for the whole run, so a process model is spawned once
        let model = locator.open(shape, timeout)?;
        for (r, &replacement) in replacements.iter().enumerate() {
            let mut per_algo = BTreeMap::new();
            let mut mse_orig = None;
            for &algorithm in &algorithms {
                let segmenter = resolved(args.params.config(algorithm), args.window_length);
                let config = EvalConfig {
                    percentile: args.percentile,
                    replacement,
                    rng_seed: args.surrogate.seed,
                    segmenter,
                    explain: args.surrogate.explain_config(replacement),
                    random_repeats: args.random_repeats,
                    mirror_baseline: args.mirror_baseline,
                };
                let report = with_pool(args.workers, || run_perturbation_analysis(&dataset, model.as_ref(), &config))??;
                match mse_orig {
                    None => mse_orig = Some(report.mse_orig),
                    Some(v) if v.to_bits() != report.mse_orig.to_bits() => {
                        return Err(CliError::Model(format!(
                            "model `{}` is not deterministic: unperturbed error changed between runs",
                            args.models[m]
                        )));
                    }
                    Some(_) => {}
                }
                per_algo.insert(algorithm.name().to_string(), AlgoResult::new(segmenter, &report));
            }
            docs[r].push(EvalDoc {
                schema_version: SCHEMA_VERSION,
                config: EvalDocConfig {
                    model: args.models[m].clone(),
                    replacement,
                    percentile: args.percentile,
                    window_length: args.window_length,
                    target_feature: args.target_feature,
                    num_windows: dataset.num_windows(),
                    rng_seed: args.surrogate.seed,
                    random_repeats: args.random_repeats,
                    mirror_baseline: args.mirror_baseline,
                    explain: args.surrogate.explain_config(replacement),
                },
                mse_orig: mse_orig.expect("at least one algorithm"),
                per_algo,
            });
        }
    }

    let mut out = OutDir::create(&args.out)?;
    for (r, replacement) in replacements.iter().enumerate() {
        for (m, doc) in docs[r].iter().enumerate() {
            out.write(&format!("eval-m{}-{replacement}.json", m + 1), &to_json(doc))?;
        }
    }
    out.write("table.txt", &render_table(&args.models, &replacements, &algorithms, &docs))?;
    out.finish(ManifestParts {
        command: "evaluate",
        invocation: invocation(&Command::Evaluate(args.clone())),
        parameters: json!({
            "models": args.models,
            "algorithms": algorithms,
            "replacements": replacements,
            "percentile": args.percentile,
            "window_length": args.window_length,
            "target_feature": args.target_feature,
            "random_repeats": args.random_repeats,
            "mirror_baseline": args.mirror_baseline,
            "explain": args.surrogate.explain_config(replacements[0]),
        }),
        seeds: BTreeMap::from([
            ("masks".to_string(), args.surrogate.seed),
            ("random_cells".to_string(), args.surrogate.seed),
        ]),
        inputs: vec![digest_file(&args.input, args.input.display().to_string())?],
    })
}

/// Window length of the demo series.
pub const DEMO_WINDOW: usize = 24;
/// The demo's masked_motif model looks at timesteps [10, 15) of feature 0.
pub const DEMO_MOTIF: &str = "builtin:masked_motif:t0=10,t1=15";

pub fn cmd_demo(args: &DemoArgs) -> Result<(), CliError> {
    if args.windows == 0 {
        return Err(CliError::input("--windows must be positive"));
    }
    let mut out = OutDir::create(&args.out)?;
    let rows = DEMO_WINDOW + args.windows;
    let sample = seasonal_series(rows, 2, args.seed);
    let table = Table {
        timestamps: Some((0..rows).map(|t| format!("t{t:04}")).collect()),
        names: vec!["signal".into(), "drift".into()],
        sample,
    };
    let csv_path = args.out.join("dataset.csv");
    write_csv_file(&table, &csv_path)?;
    out.written.push(digest_file(&csv_path, "dataset.csv".into())?);

    let seed = args.seed;
    let linear = format!("builtin:linear:seed={seed}");
    let window_only = SegmentParams {
        window_size: None,
        partitions: None,
        slope_variant: SlopeVariant::Gradient,
    };
    let window_table = table.slice(0, DEMO_WINDOW)?;
    let window_csv = args.out.join("window.csv");
    write_csv_file(&window_table, &window_csv)?;
    out.written.push(digest_file(&window_csv, "window.csv".into())?);

    cmd_segment(&SegmentArgs {
        input: window_csv.clone(),
        algo: "all".into(),
        params: window_only.clone(),
        svg: true,
        out: args.out.join("segment"),
    })?;
    let surrogate = SurrogateParams {
        replacement: ReplacementKind::Zero,
        masks: args.masks,
        seed,
        keep_prob: 0.5,
        kernel_width: None,
        ridge: 1.0,
        batch_size: 250,
        timeout: 60.0,
    };
    cmd_explain(&ExplainArgs {
        input: csv_path.clone(),
        model: DEMO_MOTIF.into(),
        algo: "slopes".into(),
        params: window_only.clone(),
        surrogate: surrogate.clone(),
        window_start: 0,
        window_length: Some(DEMO_WINDOW),
        svg: true,
        out: args.out.join("explain"),
    })?;
    cmd_evaluate(&EvaluateArgs {
        input: csv_path,
        models: vec![DEMO_MOTIF.into(), linear],
        window_length: DEMO_WINDOW,
        target_feature: 0,
        algos: "all".into(),
        replacements: "zero,mean".into(),
        percentile: 90.0,
        params: window_only,
        surrogate,
        random_repeats: 5,
        mirror_baseline: false,
        workers: args.workers,
        out: args.out.join("evaluate"),
    })?;
    // sub-manifests record the output directory's path, so only their
    // artifacts (not the manifests themselves) go into the demo manifest
    for sub in ["segment", "explain", "evaluate"] {
        let path = args.out.join(sub).join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(CliError::internal)?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(CliError::internal)?;
        for file in manifest.outputs.into_iter().filter(|f| f.path != MANIFEST_FILE) {
            out.written.push(FileDigest {
                path: format!("{sub}/{}", file.path),
                sha256: file.sha256,
            });
        }
    }
    out.finish(ManifestParts {
        command: "demo",
        invocation: invocation(&Command::Demo(args.clone())),
        parameters: json!({ "rows": rows, "window_length": DEMO_WINDOW, "features": 2 }),
        seeds: BTreeMap::from([("data".to_string(), seed), ("masks".to_string(), seed)]),
        inputs: Vec::new(),
    })
}

/// Outcome of a replay: files whose digests differ from the recorded run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub checked: usize,
    pub mismatched: Vec<String>,
}

fn with_out(command: Command, out: PathBuf) -> Result<Command, CliError> {
    Ok(match command {
        Command::Segment(a) => Command::Segment(SegmentArgs { out, ..a }),
        Command::Explain(a) => Command::Explain(ExplainArgs { out, ..a }),
        Command::Evaluate(a) => Command::Evaluate(EvaluateArgs { out, ..a }),
        Command::Demo(a) => Command::Demo(DemoArgs { out, ..a }),
        Command::Replay(_) | Command::Models => return Err(CliError::input("manifest records no replayable command")),
    })
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<ReplayOutcome, CliError> {
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::input(format!("{}: {e}", args.manifest.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("not a run manifest: {e}")))?;
    for input in &manifest.inputs {
        let now = digest_file(Path::new(&input.path), input.path.clone())?;
        if now.sha256 != input.sha256 {
            return Err(CliError::input(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let command: Command = serde_json::from_value(manifest.invocation.clone())
        .map_err(|e| CliError::input(format!("manifest invocation unreadable: {e}")))?;
    execute(&with_out(command, args.out.clone())?)?;

    let mut mismatched = Vec::new();
    for recorded in &manifest.outputs {
        let now = digest_file(&args.out.join(&recorded.path), recorded.path.clone());
        if now.ok().map(|d| d.sha256).as_ref() != Some(&recorded.sha256) {
            mismatched.push(recorded.path.clone());
        }
    }
    let replayed = std::fs::read_to_string(args.out.join(MANIFEST_FILE)).map_err(CliError::internal)?;
    if replayed != text {
        mismatched.push(MANIFEST_FILE.to_string());
    }
    Ok(ReplayOutcome {
        checked: manifest.outputs.len() + 1,
        mismatched,
    })
}

fn cmd_models() -> String {
    let mut s = String::new();
    for info in builtin_models() {
        let _ = writeln!(s, "builtin:{}:{}\n    {}", info.name, info.params, info.summary);
    }
    s
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Segment(a) => cmd_segment(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Replay(a) => {
            let outcome = cmd_replay(a)?;
            if outcome.mismatched.is_empty() {
                println!("replay reproduced all {} recorded files", outcome.checked);
                Ok(())
            } else {
                Err(CliError::internal(format!(
                    "replay differs from the recorded run in: {}",
                    outcome.mismatched.join(", ")
                )))
            }
        }
        Command::Models => {
            print!("{}", cmd_models());
            Ok(())
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli.command),
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            Ok(())
        }
        Err(e) => Err(CliError::Input(e.to_string())),
    }
}
