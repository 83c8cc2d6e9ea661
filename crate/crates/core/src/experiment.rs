//! Scenario experiments: sample, build, train and evaluate every
//! (scenario, scheme, realisation, grid point) cell, then pick the best grid
//! point per scenario and scheme by median final AP.
//!
//! Every finished cell is written to `cells/<name>.json`; a rerun with the
//! same configuration reuses those markers instead of recomputing.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::consensus::{
    build_training_set, sample_scenario, AnnotationIndex, FeatureStore, SamplingParams, Scenario,
    TrainingSetSpec,
};
use crate::encoding::{DetectionMode, EncodingScheme, SchemeKind};
use crate::error::{Error, Result};
use crate::eval::{build_test_sets, evaluate_detector, DetectorEval, TestParams, TestSetBundle, AP_DEFINITION};
use crate::gbdt::{save_model, train, ModelMeta, TrainConfig};
use crate::signal::DatasetManifest;
use crate::stats::median;
use crate::synth::mix_seed;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hyperparameter grid; the experiment trains every combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub colsample_per_tree: Vec<f64>,
    pub rowsample_per_tree: Vec<f64>,
    pub n_trees: Vec<usize>,
}

impl GridSpec {
    /// The full grid: 2 depths x 2 rates x 3 column fractions x 2 sizes.
    pub fn paper() -> Self {
        GridSpec {
            max_depth: vec![5, 10],
            learning_rate: vec![0.005, 0.01],
            colsample_per_tree: vec![0.1, 0.2, 0.5],
            rowsample_per_tree: vec![0.5],
            n_trees: vec![1000, 2000],
        }
    }

    /// A single point, cheap enough for routine runs.
    pub fn reduced() -> Self {
        GridSpec {
            max_depth: vec![5],
            learning_rate: vec![0.01],
            colsample_per_tree: vec![0.2],
            rowsample_per_tree: vec![0.5],
            n_trees: vec![500],
        }
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &max_depth in &self.max_depth {
            for &learning_rate in &self.learning_rate {
                for &colsample_per_tree in &self.colsample_per_tree {
                    for &rowsample_per_tree in &self.rowsample_per_tree {
                        for &n_trees in &self.n_trees {
                            out.push(GridPoint {
                                max_depth,
                                learning_rate,
                                colsample_per_tree,
                                rowsample_per_tree,
                                n_trees,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::paper()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub colsample_per_tree: f64,
    pub rowsample_per_tree: f64,
    pub n_trees: usize,
}

fn default_scenarios() -> Vec<Scenario> {
    Scenario::ALL.to_vec()
}

fn default_schemes() -> Vec<SchemeKind> {
    vec![SchemeKind::None, SchemeKind::V1, SchemeKind::V2]
}

fn default_modes() -> Vec<DetectionMode> {
    vec![DetectionMode::Agnostic, DetectionMode::Voting]
}

fn default_recording_seeds() -> Vec<u64> {
    (1..=5).collect()
}

fn default_event_seeds() -> Vec<u64> {
    (101..=105).collect()
}

fn default_lambda() -> f64 {
    1.0
}

fn default_base_score() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train_manifest: PathBuf,
    pub test_manifest: PathBuf,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeKind>,
    #[serde(default = "default_modes")]
    pub modes: Vec<DetectionMode>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_base_score")]
    pub base_score: f64,
    #[serde(default)]
    pub sampling: SamplingParams,
    #[serde(default = "default_recording_seeds")]
    pub recording_seeds: Vec<u64>,
    #[serde(default = "default_event_seeds")]
    pub event_seeds: Vec<u64>,
    #[serde(default)]
    pub test: TestParams,
    #[serde(default)]
    pub save_models: bool,
    #[serde(default)]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(train_manifest: impl Into<PathBuf>, test_manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            train_manifest: train_manifest.into(),
            test_manifest: test_manifest.into(),
            scenarios: default_scenarios(),
            schemes: default_schemes(),
            modes: default_modes(),
            grid: GridSpec::paper(),
            lambda: default_lambda(),
            gamma: 0.0,
            base_score: default_base_score(),
            sampling: SamplingParams::default(),
            recording_seeds: default_recording_seeds(),
            event_seeds: default_event_seeds(),
            test: TestParams::default(),
            save_models: false,
            out_dir: out_dir.into(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        let g = &self.grid;
        if g.max_depth.is_empty()
            || g.learning_rate.is_empty()
            || g.colsample_per_tree.is_empty()
            || g.rowsample_per_tree.is_empty()
            || g.n_trees.is_empty()
        {
            return bad("every grid axis needs at least one value");
        }
        if self.scenarios.is_empty() || self.schemes.is_empty() || self.modes.is_empty() {
            return bad("scenarios, schemes and modes must be nonempty");
        }
        for (name, seeds) in [("recording", &self.recording_seeds), ("event", &self.event_seeds)] {
            let mut s = seeds.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.len() != seeds.len() {
                return Err(Error::InvalidConfig(format!("{name} seeds must be nonempty and distinct")));
            }
        }
        if self.test.n_sets == 0 || self.test.ratio == 0 {
            return bad("test sets need a positive ratio and count");
        }
        for p in self.grid.points() {
            self.train_config(&p, 0).validate()?;
        }
        Ok(())
    }

    fn train_config(&self, p: &GridPoint, seed: u64) -> TrainConfig {
        TrainConfig {
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            learning_rate: p.learning_rate,
            colsample_per_tree: p.colsample_per_tree,
            rowsample_per_tree: p.rowsample_per_tree,
            lambda: self.lambda,
            gamma: self.gamma,
            base_score: self.base_score,
            seed,
        }
    }

    /// Hash of everything that determines results (the output directory is
    /// excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }

    /// (scenario, scheme) pairs actually run; A ignores the scheme, since its
    /// labeler rows are all zero.
    pub fn arms(&self) -> Vec<(Scenario, SchemeKind)> {
        let mut out = Vec::new();
        for &s in &self.scenarios {
            if s == Scenario::A {
                if !out.contains(&(s, SchemeKind::None)) {
                    out.push((s, SchemeKind::None));
                }
                continue;
            }
            for &k in &self.schemes {
                if !out.contains(&(s, k)) {
                    out.push((s, k));
                }
            }
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn hash_files(paths: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Hash of a manifest file and its annotation file.
pub fn manifest_hash(path: &Path) -> Result<String> {
    let m = DatasetManifest::load(path)?;
    hash_files(&[path.to_path_buf(), m.annotations_path()])
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub scenario: Scenario,
    pub scheme: SchemeKind,
    pub recording_seed: u64,
    pub event_seed: u64,
    pub grid_index: usize,
}

impl CellKey {
    pub fn name(&self) -> String {
        format!(
            "{}_{}_r{}_e{}_g{}",
            self.scenario, self.scheme.as_str(), self.recording_seed, self.event_seed, self.grid_index
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    pub tool_version: String,
    pub config_hash: String,
    pub train: TrainConfig,
    pub n_examples: usize,
    pub model_hash: Option<String>,
    pub evals: Vec<DetectorEval>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub train_manifest_hash: String,
    pub test_manifest_hash: String,
    pub recording_seeds: Vec<u64>,
    pub event_seeds: Vec<u64>,
    pub test_seed: u64,
    pub ap_definition: String,
    pub negative_grid: String,
    pub labeler_model: String,
}

/// Distribution of final AP over realisations for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: Scenario,
    pub scheme: SchemeKind,
    pub mode: DetectionMode,
    pub grid_index: usize,
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub provenance: Provenance,
    pub grid: Vec<GridPoint>,
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<AggregateRow>,
    /// Best grid point per (scenario, scheme, mode), by median AP.
    pub best: Vec<AggregateRow>,
}

impl EvalReport {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_ok()).count()
    }

    pub fn best_for(&self, scenario: Scenario, scheme: SchemeKind, mode: DetectionMode) -> Option<&AggregateRow> {
        self.best
            .iter()
            .find(|r| r.scenario == scenario && r.scheme == scheme && r.mode == mode)
    }
}

/// Linear-interpolated quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn aggregate(cells: &[CellResult]) -> (Vec<AggregateRow>, Vec<AggregateRow>) {
    let mut groups: BTreeMap<(Scenario, SchemeKind, DetectionMode, usize), Vec<f64>> = BTreeMap::new();
    for c in cells.iter().filter(|c| c.is_ok()) {
        for e in &c.evals {
            groups
                .entry((c.key.scenario, c.key.scheme, e.mode, c.key.grid_index))
                .or_default()
                .push(e.final_ap);
        }
    }
    let aggregates: Vec<AggregateRow> = groups
        .into_iter()
        .map(|((scenario, scheme, mode, grid_index), values)| {
            let mut s = values.clone();
            s.sort_by(f64::total_cmp);
            AggregateRow {
                scenario,
                scheme,
                mode,
                grid_index,
                n: s.len(),
                median: median(&s).unwrap(),
                q1: quantile(&s, 0.25),
                q3: quantile(&s, 0.75),
                min: s[0],
                max: s[s.len() - 1],
                values,
            }
        })
        .collect();
    let mut best: BTreeMap<(Scenario, SchemeKind, DetectionMode), AggregateRow> = BTreeMap::new();
    for a in &aggregates {
        let k = (a.scenario, a.scheme, a.mode);
        match best.get(&k) {
            Some(b) if b.median >= a.median => {}
            _ => {
                best.insert(k, a.clone());
            }
        }
    }
    (aggregates, best.into_values().collect())
}

struct Context {
    config: ExperimentConfig,
    config_hash: String,
    train_store: FeatureStore,
    test_store: FeatureStore,
    bundle: TestSetBundle,
    grid: Vec<GridPoint>,
}

fn cell_dir(out: &Path) -> PathBuf {
    out.join("cells")
}

fn run_cell(ctx: &Context, key: &CellKey, spec: &std::result::Result<TrainingSetSpec, String>) -> CellResult {
    let point = ctx.grid[key.grid_index];
    let train_cfg = ctx.config.train_config(&point, mix_seed(key.recording_seed, &[key.event_seed]));
    let mut result = CellResult {
        key: key.clone(),
        tool_version: TOOL_VERSION.to_string(),
        config_hash: ctx.config_hash.clone(),
        train: train_cfg.clone(),
        n_examples: 0,
        model_hash: None,
        evals: Vec::new(),
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let spec = spec.as_ref().map_err(|e| Error::Other(e.clone()))?;
        let scheme = EncodingScheme::new(key.scheme, ctx.config.sampling.k);
        let (x, y) = build_training_set(spec, &scheme, &ctx.train_store)?;
        result.n_examples = x.len();
        let model = train(&x, &y, &train_cfg, ModelMeta::new(ctx.train_store.layout().clone(), scheme))?;
        let json = model.to_json()?;
        result.model_hash = Some(sha256_hex(json.as_bytes()));
        if ctx.config.save_models {
            let dir = ctx.config.out_dir.join("models");
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            save_model(&model, dir.join(format!("{}.json", key.name())))?;
        }
        for &mode in &ctx.config.modes {
            if mode == DetectionMode::Voting && key.scheme == SchemeKind::None {
                continue;
            }
            result.evals.push(evaluate_detector(&model, &ctx.bundle, mode, &ctx.test_store)?);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(e.to_string());
        result.evals.clear();
    }
    result
}

fn load_marker(path: &Path, config_hash: &str) -> Option<CellResult> {
    let text = fs::read_to_string(path).ok()?;
    let r: CellResult = serde_json::from_str(&text).ok()?;
    (r.config_hash == config_hash && r.is_ok()).then_some(r)
}

/// Runs (or resumes) an experiment and writes `report.json`, `report.csv`
/// and `best.csv` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let out = &config.out_dir;
    fs::create_dir_all(cell_dir(out)).map_err(|e| Error::io(cell_dir(out), e))?;
    let config_hash = config.hash();

    let train_manifest = DatasetManifest::load(&config.train_manifest)?;
    let test_manifest = DatasetManifest::load(&config.test_manifest)?;
    let provenance = Provenance {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config_hash.clone(),
        train_manifest_hash: manifest_hash(&config.train_manifest)?,
        test_manifest_hash: manifest_hash(&config.test_manifest)?,
        recording_seeds: config.recording_seeds.clone(),
        event_seeds: config.event_seeds.clone(),
        test_seed: config.test.seed,
        ap_definition: AP_DEFINITION.to_string(),
        negative_grid: "every 0.1 s anchored at the event start".into(),
        labeler_model: "simulated labelers are a stand-in noise model, not fitted to clinical data".into(),
    };
    let train_index = AnnotationIndex::new(&train_manifest, &train_manifest.load_annotations()?);
    let test_index = AnnotationIndex::new(&test_manifest, &test_manifest.load_annotations()?);
    let bundle = build_test_sets(&test_manifest, &test_index, &config.test)?;

    let grid = config.grid.points();
    let arms = config.arms();
    let mut keys = Vec::new();
    for &(scenario, scheme) in &arms {
        for &rs in &config.recording_seeds {
            for &es in &config.event_seeds {
                for gi in 0..grid.len() {
                    keys.push(CellKey {
                        scenario,
                        scheme,
                        recording_seed: rs,
                        event_seed: es,
                        grid_index: gi,
                    });
                }
            }
        }
    }
    let done: BTreeMap<CellKey, CellResult> = keys
        .iter()
        .filter_map(|k| {
            load_marker(&cell_dir(out).join(format!("{}.json", k.name())), &config_hash).map(|r| (k.clone(), r))
        })
        .collect();
    let todo: Vec<&CellKey> = keys.iter().filter(|k| !done.contains_key(k)).collect();

    // one training-set spec per (scenario, realisation), shared by schemes and grid points
    let mut spec_keys: Vec<(Scenario, u64, u64)> = todo.iter().map(|k| (k.scenario, k.recording_seed, k.event_seed)).collect();
    spec_keys.sort();
    spec_keys.dedup();
    let specs: BTreeMap<(Scenario, u64, u64), std::result::Result<TrainingSetSpec, String>> = spec_keys
        .par_iter()
        .map(|&(s, rs, es)| {
            let spec = sample_scenario(&train_manifest, &train_index, s, &config.sampling, rs, es).map_err(|e| e.to_string());
            ((s, rs, es), spec)
        })
        .collect();

    let ctx = Context {
        config: config.clone(),
        config_hash: config_hash.clone(),
        train_store: FeatureStore::new(train_manifest.clone()),
        test_store: FeatureStore::new(test_manifest),
        bundle,
        grid: grid.clone(),
    };
    let train_keys: Vec<_> = specs
        .values()
        .filter_map(|s| s.as_ref().ok())
        .flat_map(|s| s.examples.iter().map(|e| e.key()))
        .collect();
    ctx.train_store.prefetch(&train_keys)?;
    ctx.test_store.prefetch(ctx.bundle.keys())?;

    let fresh: Vec<CellResult> = todo
        .par_iter()
        .map(|k| {
            let r = run_cell(&ctx, k, &specs[&(k.scenario, k.recording_seed, k.event_seed)]);
            if r.is_ok() {
                let path = cell_dir(out).join(format!("{}.json", k.name()));
                if let Ok(text) = serde_json::to_string(&r) {
                    let _ = fs::write(path, text);
                }
            }
            r
        })
        .collect();

    let mut all: BTreeMap<CellKey, CellResult> = done;
    all.extend(fresh.into_iter().map(|r| (r.key.clone(), r)));
    let cells: Vec<CellResult> = keys.iter().map(|k| all.remove(k).expect("every cell ran")).collect();
    let (aggregates, best) = aggregate(&cells);
    let report = EvalReport {
        provenance,
        grid,
        cells,
        aggregates,
        best,
    };
    write_report(&report, out)?;
    Ok(report)
}

/// Writes `report.json`, `report.csv` and `best.csv`.
pub fn write_report(report: &EvalReport, out: &Path) -> Result<()> {
    let json_path = out.join("report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::json("report", e))?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    let csv_path = out.join("report.csv");
    let mut buf = Vec::new();
    write_report_csv(report, &mut buf).map_err(|e| Error::io(&csv_path, e))?;
    fs::write(&csv_path, buf).map_err(|e| Error::io(&csv_path, e))?;
    let best_path = out.join("best.csv");
    let mut buf = Vec::new();
    write_best_csv(report, &mut buf).map_err(|e| Error::io(&best_path, e))?;
    fs::write(&best_path, buf).map_err(|e| Error::io(&best_path, e))
}

/// One row per (cell, mode), then one aggregate row per grid point.
pub fn write_report_csv<W: Write>(report: &EvalReport, mut w: W) -> std::io::Result<()> {
    let p = &report.provenance;
    writeln!(
        w,
        "row,scenario,scheme,mode,grid_index,max_depth,learning_rate,colsample,rowsample,n_trees,recording_seed,event_seed,final_ap,n,median,q1,q3,status,model_hash,tool_version,config_hash"
    )?;
    for c in &report.cells {
        let g = report.grid[c.key.grid_index];
        let prefix = |mode: &str| {
            format!(
                "cell,{},{},{mode},{},{},{},{},{},{},{},{}",
                c.key.scenario,
                c.key.scheme.as_str(),
                c.key.grid_index,
                g.max_depth,
                g.learning_rate,
                g.colsample_per_tree,
                g.rowsample_per_tree,
                g.n_trees,
                c.key.recording_seed,
                c.key.event_seed
            )
        };
        let hash = c.model_hash.as_deref().unwrap_or("");
        let tail = format!("{hash},{},{}", p.tool_version, p.config_hash);
        if let Some(err) = &c.error {
            let msg = err.replace([',', '\n'], ";");
            writeln!(w, "{},,,,,,error: {msg},{tail}", prefix("-"))?;
            continue;
        }
        for e in &c.evals {
            writeln!(w, "{},{},,,,,ok,{tail}", prefix(e.mode.as_str()), e.final_ap)?;
        }
    }
    for a in &report.aggregates {
        let g = report.grid[a.grid_index];
        writeln!(
            w,
            "aggregate,{},{},{},{},{},{},{},{},{},,,,{},{},{},{},ok,,{},{}",
            a.scenario,
            a.scheme.as_str(),
            a.mode.as_str(),
            a.grid_index,
            g.max_depth,
            g.learning_rate,
            g.colsample_per_tree,
            g.rowsample_per_tree,
            g.n_trees,
            a.n,
            a.median,
            a.q1,
            a.q3,
            p.tool_version,
            p.config_hash
        )?;
    }
    Ok(())
}

/// Best grid point per (scenario, scheme, mode) with its AP distribution.
pub fn write_best_csv<W: Write>(report: &EvalReport, mut w: W) -> std::io::Result<()> {
    let p = &report.provenance;
    writeln!(w, "scenario,scheme,mode,grid_index,n,median,q1,q3,min,max,tool_version,config_hash")?;
    for a in &report.best {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            a.scenario,
            a.scheme.as_str(),
            a.mode.as_str(),
            a.grid_index,
            a.n,
            a.median,
            a.q1,
            a.q3,
            a.min,
            a.max,
            p.tool_version,
            p.config_hash
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub count: usize,
    pub scenario: Scenario,
    pub scheme: SchemeKind,
    pub mode: DetectionMode,
    pub grid_index: usize,
    pub median: f64,
}

/// Repeats the experiment with `n_pos = n_neg = count` for each count, in
/// `out_dir/n<count>`, and collects the best median AP per count.
pub fn run_sweep_volume(config: &ExperimentConfig, counts: &[usize]) -> Result<(Vec<SweepRow>, Vec<EvalReport>)> {
    if counts.is_empty() || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("sample counts must be nonempty and strictly ascending".into()));
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in counts {
        let mut c = config.clone();
        c.sampling.n_pos = n;
        c.sampling.n_neg = n;
        c.out_dir = config.out_dir.join(format!("n{n}"));
        let report = run_experiment(&c)?;
        rows.extend(report.best.iter().map(|b| SweepRow {
            count: n,
            scenario: b.scenario,
            scheme: b.scheme,
            mode: b.mode,
            grid_index: b.grid_index,
            median: b.median,
        }));
        reports.push(report);
    }
    let path = config.out_dir.join("sweep.csv");
    let mut text = String::from("count,scenario,scheme,mode,grid_index,median_ap,tool_version,config_hash\n");
    let hash = config.hash();
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.count,
            r.scenario,
            r.scheme.as_str(),
            r.mode.as_str(),
            r.grid_index,
            r.median,
            TOOL_VERSION,
            hash
        ));
    }
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok((rows, reports))
}
