use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use labelhot::consensus::{build_training_set, sample_scenario, AnnotationIndex, FeatureStore, SamplingParams, Scenario, TrainingSetSpec};
use labelhot::encoding::{DetectionMode, EncodingScheme, SchemeKind};
use labelhot::eval::{build_test_sets, evaluate_detector, labeler_quality, write_labeler_quality_csv, TestParams};
use labelhot::experiment::{run_experiment, run_sweep_volume, sha256_hex, EvalReport, ExperimentConfig, GridSpec, TOOL_VERSION};
use labelhot::gbdt::{load_model, save_model, train, ModelMeta, TrainConfig};
use labelhot::signal::DatasetManifest;
use labelhot::synth::{generate_dataset, DatasetPlan};
use labelhot::{Error, Result};

#[derive(Parser)]
#[command(name = "labelhot", version, about = "Labeler-aware EEG micro-event detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/test dataset.
    Synth(SynthArgs),
    /// Run scenario experiments over a hyperparameter grid.
    Experiment(ExperimentArgs),
    /// Train one model on a sampled or given training set.
    Train(TrainArgs),
    /// Evaluate a model on a test manifest.
    Eval(EvalArgs),
    /// Per-labeler precision and recall against the other labelers.
    LabelerReport(LabelerReportArgs),
    /// Repeat an experiment for growing numbers of examples per recording.
    SweepVolume(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset plan (JSON); defaults to 24 train and 6 test recordings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "LABELHOT_OUT", default_value = "labelhot-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (JSON). Flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    test_manifest: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<Scenario>,
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<SchemeKind>,
    #[arg(long, value_delimiter = ',')]
    mode: Vec<DetectionMode>,
    /// `paper`, `reduced`, or a grid JSON file.
    #[arg(long)]
    grid: Option<String>,
    /// Seed of the test negative-set draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, env = "LABELHOT_OUT", default_value = "labelhot-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Ascending examples-per-recording counts (positives = negatives = count).
    #[arg(long, value_delimiter = ',', default_values_t = [25usize, 50, 100])]
    counts: Vec<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Training-set spec (JSON) to use instead of sampling one.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "A")]
    scenario: Scenario,
    #[arg(long, default_value = "none")]
    scheme: SchemeKind,
    /// Recording-sampling seed; the event-sampling seed is `--event-seed`.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 101)]
    event_seed: u64,
    /// Recordings sampled per labeler group.
    #[arg(long, default_value_t = SamplingParams::default().n_rec)]
    n_rec: usize,
    /// Positive centers per recording (and labeler).
    #[arg(long, default_value_t = SamplingParams::default().n_pos)]
    n_pos: usize,
    #[arg(long, default_value_t = SamplingParams::default().n_neg)]
    n_neg: usize,
    /// Boosting parameters (JSON); defaults to depth 5, rate 0.01,
    /// 500 trees, column fraction 0.2, row fraction 0.5.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Model file to write; the spec is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Test manifest.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "agnostic")]
    mode: Vec<DetectionMode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV report; a JSON report with per-recording scores is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelerReportArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn init_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    serde_json::from_str(&text).map_err(|e| Error::Json { context: path.display().to_string(), source: e })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let plan: DatasetPlan = match &a.config {
        Some(p) => read_json(p)?,
        None => DatasetPlan::default(),
    };
    let ds = generate_dataset(&plan, a.seed, &a.out)?;
    println!("{}", ds.train_path.display());
    println!("{}", ds.test_path.display());
    Ok(())
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(p) => {
            let mut c = ExperimentConfig::load(p)?;
            // relative manifest paths are relative to the config file
            let base = p.parent().unwrap_or(Path::new(""));
            c.train_manifest = base.join(&c.train_manifest);
            c.test_manifest = base.join(&c.test_manifest);
            c
        }
        None => {
            let train = a
                .manifest
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--manifest or --config is required".into()))?;
            let test = a.test_manifest.clone().unwrap_or_else(|| train.with_file_name("test.json"));
            ExperimentConfig::new(train, test, PathBuf::new())
        }
    };
    if let Some(m) = &a.manifest {
        c.train_manifest = m.clone();
    }
    if let Some(m) = &a.test_manifest {
        c.test_manifest = m.clone();
    }
    if !a.scenario.is_empty() {
        c.scenarios = a.scenario.clone();
    }
    if !a.scheme.is_empty() {
        c.schemes = a.scheme.clone();
    }
    if !a.mode.is_empty() {
        c.modes = a.mode.clone();
    }
    match a.grid.as_deref() {
        None => {}
        Some("paper") => c.grid = GridSpec::paper(),
        Some("reduced") => c.grid = GridSpec::reduced(),
        Some(path) => c.grid = read_json(Path::new(path))?,
    }
    if let Some(s) = a.seed {
        c.test.seed = s;
    }
    c.out_dir = a.out.clone();
    Ok(c)
}

fn print_best(report: &EvalReport) {
    println!("scenario\tscheme\tmode\tmedian_ap\tq1\tq3\tn");
    for b in &report.best {
        println!(
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            b.scenario,
            b.scheme.as_str(),
            b.mode.as_str(),
            b.median,
            b.q1,
            b.q3,
            b.n
        );
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<bool> {
    init_pool(a.jobs);
    let config = experiment_config(&a)?;
    let report = run_experiment(&config)?;
    print_best(&report);
    let failed = report.failed();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed; see {}", report.cells.len(), a.out.join("report.csv").display());
    }
    Ok(failed == 0)
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    init_pool(a.experiment.jobs);
    let config = experiment_config(&a.experiment)?;
    let (rows, reports) = run_sweep_volume(&config, &a.counts)?;
    println!("count\tscenario\tscheme\tmode\tmedian_ap");
    for r in &rows {
        println!("{}\t{}\t{}\t{}\t{:.4}", r.count, r.scenario, r.scheme.as_str(), r.mode.as_str(), r.median);
    }
    Ok(reports.iter().all(|r| r.failed() == 0))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    init_pool(a.jobs);
    let manifest = DatasetManifest::load(&a.manifest)?;
    let spec: TrainingSetSpec = match &a.spec {
        Some(p) => read_json(p)?,
        None => {
            let index = AnnotationIndex::new(&manifest, &manifest.load_annotations()?);
            let params = SamplingParams {
                n_rec: a.n_rec,
                n_pos: a.n_pos,
                n_neg: a.n_neg,
                ..SamplingParams::default()
            };
            sample_scenario(&manifest, &index, a.scenario, &params, a.seed, a.event_seed)?
        }
    };
    let cfg: TrainConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => {
            let g = GridSpec::reduced().points()[0];
            TrainConfig {
                n_trees: g.n_trees,
                max_depth: g.max_depth,
                learning_rate: g.learning_rate,
                colsample_per_tree: g.colsample_per_tree,
                rowsample_per_tree: g.rowsample_per_tree,
                seed: labelhot::synth::mix_seed(a.seed, &[a.event_seed]),
                ..TrainConfig::default()
            }
        }
    };
    let scheme = EncodingScheme::new(a.scheme, spec.params.k);
    let store = FeatureStore::new(manifest);
    let (x, y) = build_training_set(&spec, &scheme, &store)?;
    let model = train(&x, &y, &cfg, ModelMeta::new(store.layout().clone(), scheme))?;
    save_model(&model, &a.out)?;
    let spec_path = a.out.with_extension("spec.json");
    write_text(&spec_path, &serde_json::to_string_pretty(&spec).map_err(|e| Error::Json { context: "spec".into(), source: e })?)?;
    println!("{}", a.out.display());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    init_pool(a.jobs);
    let model = load_model(&a.model)?;
    let model_hash = sha256_hex(model.to_json()?.as_bytes());
    let manifest = DatasetManifest::load(&a.manifest)?;
    let index = AnnotationIndex::new(&manifest, &manifest.load_annotations()?);
    let params = TestParams { seed: a.seed, ..TestParams::default() };
    let bundle = build_test_sets(&manifest, &index, &params)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    let store = FeatureStore::new(manifest);
    let mut csv = String::from("model_hash,scheme,mode,n_recordings,final_ap,test_seed,tool_version\n");
    let mut evals = Vec::new();
    for &mode in &a.mode {
        let e = evaluate_detector(&model, &bundle, mode, &store)?;
        csv.push_str(&format!(
            "{model_hash},{},{},{},{},{},{TOOL_VERSION}\n",
            model.scheme.kind.as_str(),
            mode.as_str(),
            e.per_recording.len(),
            e.final_ap,
            a.seed
        ));
        println!("{}\t{:.4}", mode.as_str(), e.final_ap);
        evals.push(e);
    }
    write_text(&a.out, &csv)?;
    let json = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "model_hash": model_hash,
        "test_seed": a.seed,
        "warnings": bundle.warnings,
        "evals": evals,
    });
    write_text(&a.out.with_extension("json"), &serde_json::to_string_pretty(&json).expect("json value"))?;
    Ok(())
}

fn cmd_labeler_report(a: LabelerReportArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let index = AnnotationIndex::new(&manifest, &manifest.load_annotations()?);
    let rows = labeler_quality(&manifest, &index)?;
    let mut buf = Vec::new();
    write_labeler_quality_csv(&rows, &mut buf).map_err(|e| Error::Io { path: a.out.clone(), source: e })?;
    write_text(&a.out, &String::from_utf8(buf).expect("ascii csv"))?;
    for r in &rows {
        println!("{}\t{}\tprecision {:.3}\trecall {:.3}", r.recording_id, r.labeler, r.precision, r.recall);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a).map(|_| true),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Train(a) => cmd_train(a).map(|_| true),
        Command::Eval(a) => cmd_eval(a).map(|_| true),
        Command::LabelerReport(a) => cmd_labeler_report(a).map(|_| true),
        Command::SweepVolume(a) => cmd_sweep(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
