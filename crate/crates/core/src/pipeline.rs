//! End-to-end orchestration: space building, training-data generation,
//! per-verb training, and evaluation, driven by one declarative config file.
//!
//! Stages are cached by content hash of their inputs and parameters, every
//! emitted file records the config hash and master seed, and per-verb seeds
//! derive from the master seed so results are independent of execution
//! order. Two runs of the same config produce byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compose::CompositionMethod;
use crate::derive_seed;
use crate::embedding::{build_cooccurrence, load_corpus, EmbeddingSpace, SvdScaling};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate, load_dataset, write_result_detail, DatasetFormat, EvalOptions, EvalResult,
};
use crate::learning::{
    train_dist, train_reg, train_reg_plus, Regime, RegressionConfig, VerbMatrix,
    VALIDATION_FRACTION,
};
use crate::training::{
    read_training_set, read_triples, select_positives, split_validation, write_training_set,
    LabeledTriple, SvoTriple, VerbTrainingSet, DEFAULT_FREQ_BAND,
};

fn default_dims() -> Vec<usize> {
    vec![20, 300]
}

fn default_window() -> usize {
    3
}

fn default_min_count() -> u64 {
    5
}

fn default_svd_scaling() -> String {
    "us".to_string()
}

fn default_regimes() -> Vec<String> {
    vec!["dist".into(), "reg".into(), "reg+".into()]
}

fn default_compositions() -> Vec<String> {
    vec![
        "add".into(),
        "mult".into(),
        "co".into(),
        "cs".into(),
        "f+".into(),
        "re".into(),
        "vo".into(),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataParams {
    #[serde(default = "DataParams::default_min_noun_freq")]
    pub min_noun_freq: u64,
    #[serde(default = "DataParams::default_top_n")]
    pub top_n: usize,
    #[serde(default = "DataParams::default_neg_n")]
    pub neg_n: usize,
    #[serde(default = "DataParams::default_freq_band")]
    pub freq_band: f64,
}

impl DataParams {
    fn default_min_noun_freq() -> u64 {
        100
    }
    fn default_top_n() -> usize {
        1000
    }
    fn default_neg_n() -> usize {
        1000
    }
    fn default_freq_band() -> f64 {
        DEFAULT_FREQ_BAND
    }
}

impl Default for DataParams {
    fn default() -> Self {
        DataParams {
            min_noun_freq: Self::default_min_noun_freq(),
            top_n: Self::default_top_n(),
            neg_n: Self::default_neg_n(),
            freq_band: Self::default_freq_band(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionParams {
    #[serde(default = "RegressionParams::default_lambda")]
    pub lambda: f64,
    #[serde(default = "RegressionParams::default_rho")]
    pub rho: f64,
    #[serde(default = "RegressionParams::default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "RegressionParams::default_batch")]
    pub batch: usize,
    #[serde(default = "RegressionParams::default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "RegressionParams::default_patience")]
    pub patience: usize,
    #[serde(default = "RegressionParams::default_loss")]
    pub loss: String,
}

impl RegressionParams {
    fn default_lambda() -> f64 {
        1e-3
    }
    fn default_rho() -> f64 {
        0.95
    }
    fn default_epsilon() -> f64 {
        1e-6
    }
    fn default_batch() -> usize {
        32
    }
    fn default_max_epochs() -> usize {
        500
    }
    fn default_patience() -> usize {
        10
    }
    fn default_loss() -> String {
        "xent".into()
    }

    pub fn to_config(&self, seed: u64) -> Result<RegressionConfig> {
        Ok(RegressionConfig {
            lambda: self.lambda,
            rho: self.rho,
            epsilon: self.epsilon,
            batch: self.batch,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
            loss: self.loss.parse()?,
        })
    }
}

impl Default for RegressionParams {
    fn default() -> Self {
        RegressionParams {
            lambda: Self::default_lambda(),
            rho: Self::default_rho(),
            epsilon: Self::default_epsilon(),
            batch: Self::default_batch(),
            max_epochs: Self::default_max_epochs(),
            patience: Self::default_patience(),
            loss: Self::default_loss(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    pub format: String,
}

/// The full experiment description, loaded from one TOML file. Relative
/// paths are resolved against the config file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub triples: PathBuf,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_svd_scaling")]
    pub svd_scaling: String,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<String>,
    #[serde(default = "default_compositions")]
    pub compositions: Vec<String>,
    pub datasets: Vec<DatasetSpec>,
    #[serde(default)]
    pub data: DataParams,
    #[serde(default)]
    pub regression: RegressionParams,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub write_details: bool,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.corpus = resolve(base, &config.corpus);
        config.triples = resolve(base, &config.triples);
        config.out_dir = resolve(base, &config.out_dir);
        for ds in &mut config.datasets {
            ds.path = resolve(base, &ds.path);
        }
        Ok(config)
    }

    /// A short content hash of the configuration, recorded in every output.
    pub fn config_hash(&self) -> String {
        let serialized = toml::to_string(self).unwrap_or_default();
        hex16(&sha256(serialized.as_bytes()))
    }

    pub fn parsed_regimes(&self) -> Result<Vec<Regime>> {
        self.regimes.iter().map(|r| r.parse()).collect()
    }

    pub fn parsed_compositions(&self) -> Result<Vec<CompositionMethod>> {
        self.compositions.iter().map(|c| c.parse()).collect()
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Checks paths, ranges, and enum keys; returns all violations found.
pub fn validate_config(config: &PipelineConfig) -> Vec<String> {
    let mut violations = Vec::new();
    if !config.corpus.exists() {
        violations.push(format!("corpus not found: {}", config.corpus.display()));
    }
    if !config.triples.exists() {
        violations.push(format!("triples not found: {}", config.triples.display()));
    }
    if config.dims.is_empty() {
        violations.push("dims must not be empty".into());
    }
    for &k in &config.dims {
        if k == 0 {
            violations.push("dims must be positive".into());
        }
    }
    if config.window == 0 {
        violations.push("window must be >= 1".into());
    }
    if SvdScaling::from_str(&config.svd_scaling).is_err() {
        violations.push(format!(
            "unknown svd_scaling '{}' (valid: us, u)",
            config.svd_scaling
        ));
    }
    if config.regimes.is_empty() {
        violations.push("regimes must not be empty".into());
    }
    for r in &config.regimes {
        if Regime::from_str(r).is_err() {
            violations.push(format!("unknown regime '{r}' (valid: dist, reg, reg+)"));
        }
    }
    if config.compositions.is_empty() {
        violations.push("compositions must not be empty".into());
    }
    for c in &config.compositions {
        if CompositionMethod::from_str(c).is_err() {
            violations.push(format!(
                "unknown composition key '{c}' (valid: add, mult, co, cs, f+, re, vo)"
            ));
        }
    }
    if config.datasets.is_empty() {
        violations.push("datasets must not be empty".into());
    }
    for ds in &config.datasets {
        if !ds.path.exists() {
            violations.push(format!("dataset '{}' not found: {}", ds.name, ds.path.display()));
        }
        if DatasetFormat::from_str(&ds.format).is_err() {
            violations.push(format!(
                "dataset '{}': unknown format '{}' (valid: gs2011, ks2013, canonical)",
                ds.name, ds.format
            ));
        }
    }
    if config.data.top_n == 0 || config.data.neg_n == 0 {
        violations.push("data.top_n and data.neg_n must be >= 1".into());
    }
    if !(config.data.freq_band > 0.0) {
        violations.push("data.freq_band must be > 0".into());
    }
    if let Ok(c) = config.regression.to_config(0) {
        if let Err(e) = c.validate() {
            violations.push(format!("regression: {e}"));
        }
    } else {
        violations.push(format!("regression: unknown loss '{}'", config.regression.loss));
    }
    violations
}

fn sha256(bytes: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().into()
}

fn hex16(digest: &[u8; 32]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn file_hash(path: &Path) -> Result<[u8; 32]> {
    Ok(sha256(&fs::read(path)?))
}

/// Whether a stage executed or its cached outputs were reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Debug, Clone)]
pub struct StageLog {
    pub name: String,
    pub status: StageStatus,
}

/// Grid of correlations plus the per-combination results, as produced by
/// [`run_pipeline`].
#[derive(Debug)]
pub struct RunReport {
    pub grid_tsv: String,
    pub grid_txt: String,
    pub stages: Vec<StageLog>,
    pub results: Vec<EvalResult>,
}

struct StageCache<'a> {
    cache_dir: PathBuf,
    stages: &'a mut Vec<StageLog>,
}

impl StageCache<'_> {
    /// Runs `build` unless the stage's input hash matches the recorded one
    /// and all `outputs` exist.
    fn run(
        &mut self,
        name: &str,
        input_hash: &str,
        outputs: &[PathBuf],
        build: impl FnOnce() -> Result<()>,
    ) -> Result<StageStatus> {
        let manifest = self.cache_dir.join(format!("{}.hash", sanitize(name)));
        let fresh = manifest
            .exists()
            .then(|| fs::read_to_string(&manifest).ok())
            .flatten()
            .map(|recorded| recorded.trim() == input_hash)
            .unwrap_or(false)
            && outputs.iter().all(|p| p.exists());
        let status = if fresh {
            StageStatus::Cached
        } else {
            build().map_err(|e| e.in_stage(name))?;
            fs::write(&manifest, input_hash)?;
            StageStatus::Ran
        };
        log::info!(
            "stage {name}: {}",
            match status {
                StageStatus::Ran => "ran",
                StageStatus::Cached => "cached",
            }
        );
        self.stages.push(StageLog {
            name: name.to_string(),
            status,
        });
        Ok(status)
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn append_provenance(path: &Path, config_hash: &str, seed: u64) -> Result<()> {
    let mut f = fs::OpenOptions::new().append(true).open(path)?;
    writeln!(f, "# config {config_hash} seed {seed}")?;
    Ok(())
}

/// Executes build-space, make-data, train, and evaluate in dependency order,
/// reusing cached stage outputs whose inputs are unchanged, and renders the
/// regime x composition correlation grid.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    let violations = validate_config(config);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations.join("; ")));
    }
    let regimes = config.parsed_regimes()?;
    let compositions = config.parsed_compositions()?;
    let scaling: SvdScaling = config.svd_scaling.parse()?;
    let config_hash = config.config_hash();
    let master_seed = config.seed;

    let out = &config.out_dir;
    let cache_dir = out.join("cache");
    fs::create_dir_all(&cache_dir)?;
    let mut stages = Vec::new();
    let mut cache = StageCache {
        cache_dir,
        stages: &mut stages,
    };

    let corpus_hash = file_hash(&config.corpus)?;
    let triples_hash = file_hash(&config.triples)?;

    // --- build-space, per dimension ---------------------------------------
    let mut space_paths: BTreeMap<usize, PathBuf> = BTreeMap::new();
    for &k in &config.dims {
        let dir = out.join("space");
        fs::create_dir_all(&dir)?;
        let path = dir.join(format!("space_k{k}.txt"));
        let input = format!(
            "{}|window={}|min_count={}|k={k}|scaling={}",
            hex16(&corpus_hash),
            config.window,
            config.min_count,
            scaling
        );
        let corpus_path = config.corpus.clone();
        let window = config.window;
        let min_count = config.min_count;
        let p = path.clone();
        let ch = config_hash.clone();
        cache.run(&format!("space-k{k}"), &input, &[path.clone()], move || {
            let sentences = load_corpus(&corpus_path)?;
            let space = build_cooccurrence(&sentences, window, min_count)?
                .ttest_weight()?
                .normalize_rows()
                .svd_reduce(k, scaling)?;
            space.write_to(&p)?;
            append_provenance(&p, &ch, master_seed)?;
            Ok(())
        })?;
        space_paths.insert(k, path);
    }

    // --- make-data, per dimension ------------------------------------------
    let mut data_dirs: BTreeMap<usize, PathBuf> = BTreeMap::new();
    for &k in &config.dims {
        let dir = out.join("data").join(format!("k{k}"));
        let space_path = space_paths[&k].clone();
        let space_hash = file_hash(&space_path)?;
        let input = format!(
            "{}|{}|min_noun_freq={}|top_n={}|neg_n={}|freq_band={}|seed={}",
            hex16(&triples_hash),
            hex16(&space_hash),
            config.data.min_noun_freq,
            config.data.top_n,
            config.data.neg_n,
            config.data.freq_band,
            master_seed
        );
        let triples_path = config.triples.clone();
        let params = config.data.clone();
        let d = dir.clone();
        let ch = config_hash.clone();
        cache.run(&format!("data-k{k}"), &input, &[dir.clone()], move || {
            fs::create_dir_all(&d)?;
            let space = EmbeddingSpace::read_from(&space_path)?;
            let triples = read_triples(&triples_path)?;
            let per_verb = select_positives(
                &triples,
                space.vocabulary(),
                params.min_noun_freq,
                params.top_n,
            )?;
            for (verb, positives) in &per_verb {
                let seed = derive_seed(master_seed, &format!("make-data:{verb}"));
                let set =
                    VerbTrainingSet::build(verb, positives, &space, params.neg_n, params.freq_band, seed)?;
                let path = d.join(format!("{}.tsv", sanitize(verb)));
                let meta = format!(
                    "min_noun_freq={} top_n={} neg_n={} freq_band={} config={ch}",
                    params.min_noun_freq, params.top_n, params.neg_n, params.freq_band
                );
                write_training_set(&path, &set, &meta)?;
            }
            Ok(())
        })?;
        data_dirs.insert(k, dir);
    }

    // --- train, per dimension and regime ------------------------------------
    let mut matrix_dirs: BTreeMap<(usize, Regime), PathBuf> = BTreeMap::new();
    for &k in &config.dims {
        let data_dir = data_dirs[&k].clone();
        let data_hash = dir_hash(&data_dir)?;
        for &regime in &regimes {
            let dir = out.join("train").join(format!("k{k}")).join(regime.to_string());
            let space_path = space_paths[&k].clone();
            let space_hash = file_hash(&space_path)?;
            let input = format!(
                "{}|{}|regime={regime}|lambda={}|rho={}|epsilon={}|batch={}|max_epochs={}|patience={}|loss={}|seed={}",
                hex16(&data_hash),
                hex16(&space_hash),
                config.regression.lambda,
                config.regression.rho,
                config.regression.epsilon,
                config.regression.batch,
                config.regression.max_epochs,
                config.regression.patience,
                config.regression.loss,
                master_seed
            );
            let d = dir.clone();
            let dd = data_dir.clone();
            let reg_params = config.regression.clone();
            let ch = config_hash.clone();
            cache.run(
                &format!("train-k{k}-{regime}"),
                &input,
                &[dir.clone()],
                move || {
                    fs::create_dir_all(&d)?;
                    let space = EmbeddingSpace::read_from(&space_path)?;
                    let sets = load_training_dir(&dd)?;
                    // verbs are independent; train in parallel, merge in order
                    let trained: Vec<(String, Result<VerbMatrix>)> = sets
                        .par_iter()
                        .map(|(verb, labeled)| {
                            let vm = train_one_verb(
                                verb,
                                labeled,
                                &space,
                                regime,
                                &reg_params,
                                master_seed,
                                k,
                            );
                            (verb.clone(), vm)
                        })
                        .collect();
                    for (verb, vm) in trained {
                        let vm = vm?;
                        let path = d.join(format!("{}.mat", sanitize(&verb)));
                        vm.write_to(&path)?;
                        append_provenance(&path, &ch, master_seed)?;
                    }
                    Ok(())
                },
            )?;
            matrix_dirs.insert((k, regime), dir);
        }
    }

    // --- evaluate, per dataset x dimension x regime x composition -----------
    let details_dir = out.join("details");
    if config.write_details {
        fs::create_dir_all(&details_dir)?;
    }
    let results_dir = out.join("results");
    fs::create_dir_all(&results_dir)?;

    let mut results: Vec<EvalResult> = Vec::new();
    let mut grid: BTreeMap<(String, String), BTreeMap<String, f64>> = BTreeMap::new();

    for ds in &config.datasets {
        let format: DatasetFormat = ds.format.parse()?;
        let pairs =
            load_dataset(&ds.path, format).map_err(|e| e.in_stage(&format!("load-{}", ds.name)))?;
        for &k in &config.dims {
            let space = EmbeddingSpace::read_from(&space_paths[&k])?;
            for &regime in &regimes {
                let matrices = load_matrix_dir(&matrix_dirs[&(k, regime)])?;
                for &comp in &compositions {
                    let name = format!("eval-{}-k{k}-{regime}-{comp}", ds.name);
                    let result = evaluate(
                        &pairs,
                        &space,
                        &matrices,
                        comp,
                        &regime.to_string(),
                        EvalOptions::default(),
                    )
                    .map_err(|e| e.in_stage(&name))?;
                    if config.write_details {
                        let detail_path = details_dir.join(format!("{}.tsv", sanitize(&name)));
                        write_result_detail(&detail_path, &result)?;
                        append_provenance(&detail_path, &config_hash, master_seed)?;
                    }
                    grid.entry((regime.to_string(), comp.to_string()))
                        .or_default()
                        .insert(format!("{}@K={k}", ds.name), result.rho);
                    results.push(result);
                }
            }
        }
    }

    // --- render the grid ------------------------------------------------------
    let columns: Vec<String> = config
        .datasets
        .iter()
        .flat_map(|ds| config.dims.iter().map(move |k| format!("{}@K={k}", ds.name)))
        .collect();
    let row_keys: Vec<(String, String)> = regimes
        .iter()
        .flat_map(|r| compositions.iter().map(move |c| (r.to_string(), c.to_string())))
        .collect();

    let mut grid_tsv = String::new();
    grid_tsv.push_str("regime\tcomp");
    for c in &columns {
        grid_tsv.push('\t');
        grid_tsv.push_str(c);
    }
    grid_tsv.push('\n');
    for key in &row_keys {
        grid_tsv.push_str(&format!("{}\t{}", key.0, key.1));
        for c in &columns {
            grid_tsv.push_str(&format!("\t{:.4}", grid[key][c]));
        }
        grid_tsv.push('\n');
    }

    let mut widths = vec![
        row_keys.iter().map(|k| k.0.len()).max().unwrap_or(6).max(6),
        row_keys.iter().map(|k| k.1.len()).max().unwrap_or(4).max(4),
    ];
    for c in &columns {
        widths.push(c.len().max(7));
    }
    let mut grid_txt = String::new();
    grid_txt.push_str(&format!("{:<w0$}  {:<w1$}", "regime", "comp", w0 = widths[0], w1 = widths[1]));
    for (i, c) in columns.iter().enumerate() {
        grid_txt.push_str(&format!("  {:>w$}", c, w = widths[i + 2]));
    }
    grid_txt.push('\n');
    for key in &row_keys {
        grid_txt.push_str(&format!("{:<w0$}  {:<w1$}", key.0, key.1, w0 = widths[0], w1 = widths[1]));
        for (i, c) in columns.iter().enumerate() {
            grid_txt.push_str(&format!("  {:>w$.4}", grid[key][c], w = widths[i + 2]));
        }
        grid_txt.push('\n');
    }

    let mut results_tsv = String::new();
    results_tsv.push_str("dataset\tk\tregime\tcomp\trho\tn_pairs\tn_skipped\n");
    {
        let mut i = 0;
        for ds in &config.datasets {
            for &k in &config.dims {
                for _ in &regimes {
                    for _ in &compositions {
                        let r = &results[i];
                        results_tsv.push_str(&format!(
                            "{}\t{k}\t{}\t{}\t{:.6}\t{}\t{}\n",
                            ds.name,
                            r.config.regime,
                            r.config.composition,
                            r.rho,
                            r.n_pairs(),
                            r.skipped.len()
                        ));
                        i += 1;
                    }
                }
            }
        }
    }

    let trailer = format!("# config {config_hash} seed {master_seed}\n");
    fs::write(results_dir.join("grid.tsv"), format!("{grid_tsv}{trailer}"))?;
    fs::write(results_dir.join("grid.txt"), format!("{grid_txt}{trailer}"))?;
    fs::write(results_dir.join("results.tsv"), format!("{results_tsv}{trailer}"))?;

    Ok(RunReport {
        grid_tsv,
        grid_txt,
        stages,
        results,
    })
}

/// Trains one verb under one regime from its labeled training set.
pub fn train_one_verb(
    verb: &str,
    labeled: &[LabeledTriple],
    space: &EmbeddingSpace,
    regime: Regime,
    params: &RegressionParams,
    master_seed: u64,
    k: usize,
) -> Result<VerbMatrix> {
    let positives: Vec<LabeledTriple> = labeled.iter().filter(|t| t.label).cloned().collect();
    match regime {
        Regime::Dist => {
            let triples: Vec<SvoTriple> = positives.iter().map(|t| t.triple.clone()).collect();
            train_dist(verb, &triples, space)
        }
        Regime::Reg => {
            let seed = derive_seed(master_seed, &format!("train-reg-k{k}:{verb}"));
            let config = params.to_config(seed)?;
            let split_seed = derive_seed(master_seed, &format!("split-reg-k{k}:{verb}"));
            let (train, validation) =
                split_validation(labeled.to_vec(), VALIDATION_FRACTION, split_seed)?;
            train_reg(verb, &train, &validation, space, &config)
        }
        Regime::RegPlus => {
            let seed = derive_seed(master_seed, &format!("train-reg+-k{k}:{verb}"));
            let config = params.to_config(seed)?;
            train_reg_plus(verb, &positives, space, &config)
        }
    }
}

/// Loads every `<verb>.tsv` training set in a make-data output directory.
pub fn load_training_dir(dir: &Path) -> Result<BTreeMap<String, Vec<LabeledTriple>>> {
    let mut sets = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "tsv"))
        .collect();
    entries.sort();
    for path in entries {
        let labeled = read_training_set(&path)?;
        let Some(first) = labeled.first() else {
            continue;
        };
        sets.insert(first.triple.verb.clone(), labeled);
    }
    if sets.is_empty() {
        return Err(Error::Invalid(format!(
            "no training sets found in {}",
            dir.display()
        )));
    }
    Ok(sets)
}

/// Loads every `<verb>.mat` matrix in a train output directory.
pub fn load_matrix_dir(dir: &Path) -> Result<BTreeMap<String, VerbMatrix>> {
    let mut matrices = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "mat"))
        .collect();
    entries.sort();
    for path in entries {
        let vm = VerbMatrix::read_from(&path)?;
        matrices.insert(vm.verb.clone(), vm);
    }
    if matrices.is_empty() {
        return Err(Error::Invalid(format!(
            "no verb matrices found in {}",
            dir.display()
        )));
    }
    Ok(matrices)
}

/// Content hash over every file in a directory, order-independent of the
/// filesystem's listing order.
fn dir_hash(dir: &Path) -> Result<[u8; 32]> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut hasher = Sha256::new();
    for path in entries {
        hasher.update(path.file_name().unwrap_or_default().as_encoded_bytes());
        hasher.update([0]);
        hasher.update(fs::read(&path)?);
        hasher.update([1]);
    }
    Ok(hasher.finalize().into())
}
