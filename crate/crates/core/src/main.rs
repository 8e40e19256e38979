use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use verbmat::compose::CompositionMethod;
use verbmat::embedding::{build_cooccurrence, load_corpus, EmbeddingSpace, SvdScaling};
use verbmat::error::Error;
use verbmat::eval::{
    evaluate, load_dataset, msqe_analysis, read_result_detail, write_msqe_report,
    write_result_detail, write_result_summary, DatasetFormat, EvalOptions,
};
use verbmat::learning::Regime;
use verbmat::pipeline::{
    load_matrix_dir, load_training_dir, run_pipeline, train_one_verb, validate_config,
    PipelineConfig, RegressionParams,
};
use verbmat::training::{read_triples, select_positives, write_training_set, VerbTrainingSet};
use verbmat::{derive_seed, Result};

/// Learns transitive-verb matrices from SVO triples, composes them with noun
/// vectors, and evaluates the compositions on similarity benchmarks.
#[derive(Parser)]
#[command(name = "verbmat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reduced word-vector space from a tokenized corpus
    BuildSpace(BuildSpaceArgs),
    /// Select positives and generate negatives, one training set per verb
    MakeData(MakeDataArgs),
    /// Train verb matrices under one regime
    Train(TrainArgs),
    /// Score a benchmark dataset under one composition method
    Evaluate(EvaluateArgs),
    /// Compare two evaluation detail files pair by pair
    Analyze(AnalyzeArgs),
    /// Run the full pipeline from a config file
    Run(RunArgs),
    /// Validate a config file without running anything
    Validate(RunArgs),
}

#[derive(Args)]
struct BuildSpaceArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value = "us")]
    svd_scaling: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MakeDataArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 100)]
    min_noun_freq: u64,
    #[arg(long, default_value_t = 1000)]
    top_n: usize,
    #[arg(long, default_value_t = 1000)]
    neg_n: usize,
    #[arg(long, default_value_t = 0.5)]
    freq_band: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    regime: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    #[arg(long, default_value_t = 0.95)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 500)]
    max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    patience: usize,
    #[arg(long, default_value = "xent")]
    loss: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    format: String,
    #[arg(long)]
    space: PathBuf,
    /// Directory of trained verb matrices (not needed for add/mult)
    #[arg(long)]
    verbs: Option<PathBuf>,
    #[arg(long)]
    comp: String,
    /// Write the summary table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-pair detail file here
    #[arg(long)]
    detail: Option<PathBuf>,
    /// Correlate per (pair, annotator) point instead of per pair
    #[arg(long)]
    per_annotator: bool,
    /// L2-normalise noun and verb vectors before composing
    #[arg(long)]
    normalize_inputs: bool,
    /// Normalise the relational similarity to a matrix cosine
    #[arg(long)]
    matrix_cosine: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
}

fn args_hash(parts: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn append_provenance(path: &std::path::Path, hash: &str, seed: u64) -> Result<()> {
    use std::io::Write as _;
    let mut f = std::fs::OpenOptions::new().append(true).open(path)?;
    writeln!(f, "# config {hash} seed {seed}")?;
    Ok(())
}

fn cmd_build_space(args: &BuildSpaceArgs) -> Result<()> {
    let scaling: SvdScaling = args.svd_scaling.parse()?;
    let sentences = load_corpus(&args.corpus)?;
    let space = build_cooccurrence(&sentences, args.window, args.min_count)?
        .ttest_weight()?
        .normalize_rows()
        .svd_reduce(args.dim, scaling)?;
    space.write_to(&args.out)?;
    let hash = args_hash(&[
        "build-space".to_string(),
        format!("window={}", args.window),
        format!("min_count={}", args.min_count),
        format!("dim={}", args.dim),
        format!("scaling={scaling}"),
    ]);
    append_provenance(&args.out, &hash, 0)?;
    println!(
        "wrote {} ({} words, K={})",
        args.out.display(),
        space.vocabulary().len(),
        space.dim()
    );
    Ok(())
}

fn cmd_make_data(args: &MakeDataArgs) -> Result<()> {
    let space = EmbeddingSpace::read_from(&args.space)?;
    let triples = read_triples(&args.triples)?;
    let per_verb = select_positives(&triples, space.vocabulary(), args.min_noun_freq, args.top_n)?;
    std::fs::create_dir_all(&args.out)?;
    let hash = args_hash(&[
        "make-data".into(),
        format!("min_noun_freq={}", args.min_noun_freq),
        format!("top_n={}", args.top_n),
        format!("neg_n={}", args.neg_n),
        format!("freq_band={}", args.freq_band),
        format!("seed={}", args.seed),
    ]);
    for (verb, positives) in &per_verb {
        let seed = derive_seed(args.seed, &format!("make-data:{verb}"));
        let set = VerbTrainingSet::build(verb, positives, &space, args.neg_n, args.freq_band, seed)?;
        let path = args.out.join(format!("{verb}.tsv"));
        let meta = format!(
            "min_noun_freq={} top_n={} neg_n={} freq_band={} config={hash}",
            args.min_noun_freq, args.top_n, args.neg_n, args.freq_band
        );
        write_training_set(&path, &set, &meta)?;
        println!(
            "{verb}: {} positives, {} negatives -> {}",
            set.positives.len(),
            set.negatives.len(),
            path.display()
        );
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let regime: Regime = args.regime.parse()?;
    let space = EmbeddingSpace::read_from(&args.space)?;
    let sets = load_training_dir(&args.data)?;
    let params = RegressionParams {
        lambda: args.lambda,
        rho: args.rho,
        epsilon: args.epsilon,
        batch: args.batch,
        max_epochs: args.max_epochs,
        patience: args.patience,
        loss: args.loss.clone(),
    };
    std::fs::create_dir_all(&args.out)?;
    let hash = args_hash(&[
        "train".into(),
        format!("regime={regime}"),
        format!("lambda={}", args.lambda),
        format!("batch={}", args.batch),
        format!("seed={}", args.seed),
    ]);
    for (verb, labeled) in &sets {
        let vm = train_one_verb(verb, labeled, &space, regime, &params, args.seed, space.dim())?;
        let path = args.out.join(format!("{verb}.mat"));
        vm.write_to(&path)?;
        append_provenance(&path, &hash, args.seed)?;
        match (vm.meta.validation_loss, vm.meta.epochs_run) {
            (Some(l), e) if e > 0 => {
                println!("{verb}: best validation loss {l:.6} (epoch {}/{e})", vm.meta.best_epoch)
            }
            _ => println!("{verb}: done"),
        }
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let format: DatasetFormat = args.format.parse()?;
    let comp: CompositionMethod = args.comp.parse()?;
    let space = EmbeddingSpace::read_from(&args.space)?;
    let pairs = load_dataset(&args.dataset, format)?;
    let (matrices, regime_label) = match &args.verbs {
        Some(dir) => {
            let m = load_matrix_dir(dir)?;
            let label = m
                .values()
                .next()
                .map(|vm| vm.regime.to_string())
                .unwrap_or_else(|| "unknown".into());
            (m, label)
        }
        None => {
            if !comp.uses_verb_vector() {
                return Err(Error::Invalid(format!(
                    "composition '{comp}' needs --verbs <dir> with trained matrices"
                )));
            }
            (BTreeMap::new(), "baseline".to_string())
        }
    };
    let options = EvalOptions {
        per_annotator: args.per_annotator,
        normalize_inputs: args.normalize_inputs,
        matrix_cosine: args.matrix_cosine,
    };
    let result = evaluate(&pairs, &space, &matrices, comp, &regime_label, options)?;
    println!("regime\tcomp\tk\trho\tn_pairs\tn_skipped");
    println!(
        "{}\t{}\t{}\t{:.6}\t{}\t{}",
        result.config.regime,
        result.config.composition,
        result.config.k,
        result.rho,
        result.n_pairs(),
        result.skipped.len()
    );
    if !result.skipped.is_empty() {
        eprintln!("skipped {} pair(s): {}", result.skipped.len(), result.skipped.join(", "));
    }
    if let Some(out) = &args.out {
        write_result_summary(out, &result)?;
    }
    if let Some(detail) = &args.detail {
        write_result_detail(detail, &result)?;
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let a = read_result_detail(&args.a)?;
    let b = read_result_detail(&args.b)?;
    let entries = msqe_analysis(&a, &b)?;
    let label_a = format!("{}/{}/K={}", a.config.regime, a.config.composition, a.config.k);
    let label_b = format!("{}/{}/K={}", b.config.regime, b.config.composition, b.config.k);
    write_msqe_report(&args.out, &entries, &label_a, &label_b)?;
    println!("compared {} pairs ({label_a} vs {label_b})", entries.len());
    for e in entries.iter().take(5) {
        println!("{}\t{:+.4}", e.pair_id, e.diff);
    }
    println!("full report: {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    let result: Result<()> = match &cli.command {
        Command::BuildSpace(args) => cmd_build_space(args),
        Command::MakeData(args) => cmd_make_data(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Validate(args) => {
            return match PipelineConfig::load(&args.config) {
                Ok(config) => {
                    let violations = validate_config(&config);
                    if violations.is_empty() {
                        println!("ok");
                        ExitCode::SUCCESS
                    } else {
                        for v in &violations {
                            eprintln!("violation: {v}");
                        }
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Run(args) => match PipelineConfig::load(&args.config) {
            Ok(config) => {
                let violations = validate_config(&config);
                if !violations.is_empty() {
                    for v in &violations {
                        eprintln!("violation: {v}");
                    }
                    return ExitCode::from(1);
                }
                run_pipeline(&config).map(|report| {
                    print!("{}", report.grid_txt);
                    eprintln!(
                        "results written to {}",
                        config.out_dir.join("results").display()
                    );
                })
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
