//! Verb-matrix training under three regimes: outer-product averaging over
//! attested subject-object pairs (`dist`), plausibility logistic regression
//! on positives and generated negatives (`reg`), and the same trainer on
//! positives only (`reg+`).
//!
//! The regression learns a K x K matrix V through the bilinear classifier
//! `h = sigmoid(s^T V o)`, minimised by ADADELTA with early stopping against
//! a held-out validation split.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::derive_seed;
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::training::{split_validation, LabeledTriple, SvoTriple};

/// Probabilities are kept inside [PROB_FLOOR, 1 - PROB_FLOOR] so log-loss
/// stays finite.
const PROB_FLOOR: f64 = 1e-12;

/// Fraction of the training triples held out for early stopping.
pub const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regime {
    Dist,
    Reg,
    RegPlus,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Dist, Regime::Reg, Regime::RegPlus];
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dist" => Ok(Regime::Dist),
            "reg" => Ok(Regime::Reg),
            "reg+" => Ok(Regime::RegPlus),
            other => Err(Error::Invalid(format!(
                "unknown regime '{other}' (expected dist, reg, or reg+)"
            ))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Dist => write!(f, "dist"),
            Regime::Reg => write!(f, "reg"),
            Regime::RegPlus => write!(f, "reg+"),
        }
    }
}

/// Which data term the regression minimises. Cross-entropy is the default;
/// the squared-error variant exists for comparison experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    CrossEntropy,
    MeanSquaredError,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xent" => Ok(LossKind::CrossEntropy),
            "mse" => Ok(LossKind::MeanSquaredError),
            other => Err(Error::Invalid(format!(
                "unknown loss '{other}' (expected xent or mse)"
            ))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::CrossEntropy => write!(f, "xent"),
            LossKind::MeanSquaredError => write!(f, "mse"),
        }
    }
}

/// Hyperparameters for the `reg`/`reg+` trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionConfig {
    pub lambda: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            lambda: 1e-3,
            rho: 0.95,
            epsilon: 1e-6,
            max_epochs: 500,
            patience: 10,
            batch: 32,
            seed: 0,
            loss: LossKind::CrossEntropy,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 {
            return Err(Error::Invalid("lambda must be >= 0".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Invalid("rho must be in (0, 1)".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Invalid("epsilon must be > 0".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 || self.batch == 0 {
            return Err(Error::Invalid(
                "max_epochs, patience, and batch must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// ADADELTA accumulators: running averages of squared gradients and squared
/// updates, zero-initialised.
#[derive(Debug, Clone)]
pub struct AdadeltaState {
    pub acc_grad_sq: DMatrix<f64>,
    pub acc_update_sq: DMatrix<f64>,
    pub step_count: u64,
}

impl AdadeltaState {
    pub fn new(rows: usize, cols: usize) -> Self {
        AdadeltaState {
            acc_grad_sq: DMatrix::zeros(rows, cols),
            acc_update_sq: DMatrix::zeros(rows, cols),
            step_count: 0,
        }
    }
}

/// One ADADELTA update. Returns the additive step `delta`; the caller applies
/// `V <- V + delta`.
///
/// Entrywise: `Eg <- rho*Eg + (1-rho)*g^2`, then
/// `delta = -sqrt(Eu + eps)/sqrt(Eg + eps) * g`, then
/// `Eu <- rho*Eu + (1-rho)*delta^2`.
pub fn adadelta_step(
    state: &mut AdadeltaState,
    gradient: &DMatrix<f64>,
    rho: f64,
    epsilon: f64,
) -> DMatrix<f64> {
    assert!(rho > 0.0 && rho < 1.0, "rho must be in (0, 1)");
    assert!(epsilon > 0.0, "epsilon must be > 0");
    let (r, c) = (gradient.nrows(), gradient.ncols());
    let mut delta = DMatrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            let g = gradient[(i, j)];
            let eg = rho * state.acc_grad_sq[(i, j)] + (1.0 - rho) * g * g;
            state.acc_grad_sq[(i, j)] = eg;
            let d = -((state.acc_update_sq[(i, j)] + epsilon).sqrt() / (eg + epsilon).sqrt()) * g;
            delta[(i, j)] = d;
            state.acc_update_sq[(i, j)] =
                rho * state.acc_update_sq[(i, j)] + (1.0 - rho) * d * d;
        }
    }
    state.step_count += 1;
    delta
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(s^T V o)`, clamped into the open interval (0, 1).
pub fn plausibility(v: &DMatrix<f64>, s: &DVector<f64>, o: &DVector<f64>) -> f64 {
    sigmoid(s.dot(&(v * o))).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// A prepared training example: subject and object vectors plus the target
/// label.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub s: DVector<f64>,
    pub o: DVector<f64>,
    pub t: f64,
}

/// Resolves labeled triples into vector examples, skipping (and counting)
/// triples with out-of-vocabulary nouns.
pub fn prepare_examples(
    triples: &[LabeledTriple],
    space: &EmbeddingSpace,
) -> (Vec<TrainingExample>, usize) {
    let mut out = Vec::with_capacity(triples.len());
    let mut skipped = 0;
    for t in triples {
        match (
            space.vector_of(&t.triple.subject),
            space.vector_of(&t.triple.object),
        ) {
            (Ok(s), Ok(o)) => out.push(TrainingExample {
                s: s.clone(),
                o: o.clone(),
                t: t.target(),
            }),
            _ => {
                skipped += 1;
                log::warn!(
                    "skipping triple with out-of-vocabulary noun: {} {} {}",
                    t.triple.subject,
                    t.triple.verb,
                    t.triple.object
                );
            }
        }
    }
    (out, skipped)
}

/// Mean regularised loss and its gradient over a batch.
///
/// Cross-entropy: `-(1/m) sum[t log h + (1-t) log(1-h)] + (lambda/2)||V||^2`
/// with gradient `(1/m) sum (h - t) s o^T + lambda V`. Predictions are
/// clamped before the logs so the loss stays finite.
pub fn loss_and_gradient(
    v: &DMatrix<f64>,
    batch: &[TrainingExample],
    lambda: f64,
    kind: LossKind,
) -> (f64, DMatrix<f64>) {
    assert!(!batch.is_empty(), "batch must be non-empty");
    let m = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = DMatrix::zeros(v.nrows(), v.ncols());
    for ex in batch {
        let h = sigmoid(ex.s.dot(&(v * &ex.o)));
        let hc = h.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        match kind {
            LossKind::CrossEntropy => {
                loss -= ex.t * hc.ln() + (1.0 - ex.t) * (1.0 - hc).ln();
                grad.ger((h - ex.t) / m, &ex.s, &ex.o, 1.0);
            }
            LossKind::MeanSquaredError => {
                let e = h - ex.t;
                loss += e * e;
                grad.ger(2.0 * e * h * (1.0 - h) / m, &ex.s, &ex.o, 1.0);
            }
        }
    }
    loss /= m;
    loss += lambda / 2.0 * v.norm_squared();
    grad += lambda * v;
    (loss, grad)
}

/// Mean unregularised data loss, used for validation.
pub fn data_loss(v: &DMatrix<f64>, examples: &[TrainingExample], kind: LossKind) -> f64 {
    let m = examples.len() as f64;
    let mut loss = 0.0;
    for ex in examples {
        let h = plausibility(v, &ex.s, &ex.o);
        match kind {
            LossKind::CrossEntropy => loss -= ex.t * h.ln() + (1.0 - ex.t) * (1.0 - h).ln(),
            LossKind::MeanSquaredError => loss += (h - ex.t) * (h - ex.t),
        }
    }
    loss / m
}

/// Provenance of a trained matrix: epochs, losses, and hyperparameters.
#[derive(Debug, Clone, Default)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub train_loss: Option<f64>,
    pub validation_loss: Option<f64>,
    /// Per-epoch validation losses (not persisted).
    pub val_history: Vec<f64>,
    pub skipped: usize,
    pub seed: u64,
    pub hyper: Option<RegressionConfig>,
}

/// A learned K x K verb representation.
#[derive(Debug, Clone)]
pub struct VerbMatrix {
    pub verb: String,
    pub matrix: DMatrix<f64>,
    pub regime: Regime,
    pub meta: TrainingMeta,
}

impl VerbMatrix {
    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `dist`: the average outer product of subject and object vectors over the
/// attested triples. Out-of-vocabulary triples are skipped.
pub fn train_dist(verb: &str, positives: &[SvoTriple], space: &EmbeddingSpace) -> Result<VerbMatrix> {
    let k = space.dim();
    let mut v = DMatrix::zeros(k, k);
    let mut used = 0usize;
    let mut skipped = 0usize;
    for t in positives {
        match (space.vector_of(&t.subject), space.vector_of(&t.object)) {
            (Ok(s), Ok(o)) => {
                v.ger(1.0, s, o, 1.0);
                used += 1;
            }
            _ => {
                skipped += 1;
                log::warn!(
                    "skipping triple with out-of-vocabulary noun: {} {} {}",
                    t.subject,
                    t.verb,
                    t.object
                );
            }
        }
    }
    if used == 0 {
        return Err(Error::NoTrainingData(verb.to_string()));
    }
    v /= used as f64;
    Ok(VerbMatrix {
        verb: verb.to_string(),
        matrix: v,
        regime: Regime::Dist,
        meta: TrainingMeta {
            skipped,
            ..TrainingMeta::default()
        },
    })
}

/// `reg`: plausibility logistic regression over positives and negatives,
/// with the provided validation split driving early stopping.
pub fn train_reg(
    verb: &str,
    train: &[LabeledTriple],
    validation: &[LabeledTriple],
    space: &EmbeddingSpace,
    config: &RegressionConfig,
) -> Result<VerbMatrix> {
    let has_pos = train.iter().any(|t| t.label);
    let has_neg = train.iter().any(|t| !t.label);
    if !has_pos || !has_neg {
        return Err(Error::Invalid(format!(
            "regime reg needs both labels in the training set for '{verb}'"
        )));
    }
    train_logistic(verb, train, validation, space, config, Regime::Reg)
}

/// `reg+`: the same trainer on positives only; the early-stopping split is
/// drawn from the positives themselves.
pub fn train_reg_plus(
    verb: &str,
    positives: &[LabeledTriple],
    space: &EmbeddingSpace,
    config: &RegressionConfig,
) -> Result<VerbMatrix> {
    if positives.iter().any(|t| !t.label) {
        return Err(Error::Invalid(format!(
            "regime reg+ takes positives only for '{verb}'"
        )));
    }
    let split_seed = derive_seed(config.seed, "reg+/validation-split");
    let (train, validation) =
        split_validation(positives.to_vec(), VALIDATION_FRACTION, split_seed)?;
    train_logistic(verb, &train, &validation, space, config, Regime::RegPlus)
}

fn train_logistic(
    verb: &str,
    train: &[LabeledTriple],
    validation: &[LabeledTriple],
    space: &EmbeddingSpace,
    config: &RegressionConfig,
    regime: Regime,
) -> Result<VerbMatrix> {
    config.validate()?;
    if validation.is_empty() {
        return Err(Error::Invalid(format!(
            "empty validation set for '{verb}'"
        )));
    }
    let (train_ex, skipped_train) = prepare_examples(train, space);
    let (val_ex, skipped_val) = prepare_examples(validation, space);
    if train_ex.is_empty() {
        return Err(Error::NoTrainingData(verb.to_string()));
    }
    if val_ex.is_empty() {
        return Err(Error::Invalid(format!(
            "no in-vocabulary validation examples for '{verb}'"
        )));
    }

    let k = space.dim();
    let mut v = DMatrix::zeros(k, k);
    let mut state = AdadeltaState::new(k, k);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut indices: Vec<usize> = (0..train_ex.len()).collect();

    let mut best_v = v.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_train_loss = f64::NAN;
    let mut stale = 0usize;
    let mut epochs_run = 0usize;
    let mut val_history = Vec::new();

    for epoch in 1..=config.max_epochs {
        epochs_run = epoch;
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (bi, chunk) in indices.chunks(config.batch).enumerate() {
            let batch: Vec<TrainingExample> =
                chunk.iter().map(|&i| train_ex[i].clone()).collect();
            let (loss, grad) = loss_and_gradient(&v, &batch, config.lambda, config.loss);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    verb: verb.to_string(),
                    epoch,
                    batch: bi + 1,
                });
            }
            let delta = adadelta_step(&mut state, &grad, config.rho, config.epsilon);
            v += delta;
            epoch_loss += loss;
            batches += 1;
        }
        let epoch_loss = epoch_loss / batches as f64;
        let val_loss = data_loss(&v, &val_ex, config.loss);
        if !val_loss.is_finite() {
            // batch 0 marks the validation pass
            return Err(Error::NonFiniteLoss {
                verb: verb.to_string(),
                epoch,
                batch: 0,
            });
        }
        val_history.push(val_loss);
        if val_loss < best_val {
            best_val = val_loss;
            best_v = v.clone();
            best_epoch = epoch;
            best_train_loss = epoch_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    Ok(VerbMatrix {
        verb: verb.to_string(),
        matrix: best_v,
        regime,
        meta: TrainingMeta {
            epochs_run,
            best_epoch,
            train_loss: Some(best_train_loss),
            validation_loss: Some(best_val),
            val_history,
            skipped: skipped_train + skipped_val,
            seed: config.seed,
            hyper: Some(config.clone()),
        },
    })
}

impl VerbMatrix {
    /// Writes `VERB <word> K <dim> REGIME <regime>`, K rows of K floats, and
    /// a `META key value` trailer with hyperparameters and seeds.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "VERB {} K {} REGIME {}", self.verb, self.k(), self.regime)?;
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| format!("{}", self.matrix[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        let mut meta: BTreeMap<&str, String> = BTreeMap::new();
        meta.insert("epochs_run", self.meta.epochs_run.to_string());
        meta.insert("best_epoch", self.meta.best_epoch.to_string());
        meta.insert("skipped", self.meta.skipped.to_string());
        meta.insert("seed", self.meta.seed.to_string());
        if let Some(l) = self.meta.train_loss {
            meta.insert("train_loss", format!("{l}"));
        }
        if let Some(l) = self.meta.validation_loss {
            meta.insert("validation_loss", format!("{l}"));
        }
        if let Some(h) = &self.meta.hyper {
            meta.insert("lambda", format!("{}", h.lambda));
            meta.insert("rho", format!("{}", h.rho));
            meta.insert("epsilon", format!("{}", h.epsilon));
            meta.insert("max_epochs", h.max_epochs.to_string());
            meta.insert("patience", h.patience.to_string());
            meta.insert("batch", h.batch.to_string());
            meta.insert("loss", h.loss.to_string());
        }
        for (k, val) in meta {
            writeln!(out, "META {k} {val}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let file = BufReader::new(File::open(path)?);
        let mut lines = file.lines().enumerate();

        let (verb, k, regime) = loop {
            let Some((ln, line)) = lines.next() else {
                return Err(Error::parse(path, 1, "missing header"));
            };
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 6 || parts[0] != "VERB" || parts[2] != "K" || parts[4] != "REGIME" {
                return Err(Error::parse(
                    path,
                    ln + 1,
                    "expected header 'VERB <word> K <dim> REGIME <regime>'",
                ));
            }
            let k: usize = parts[3]
                .parse()
                .map_err(|_| Error::parse(path, ln + 1, "bad dimension"))?;
            let regime = Regime::from_str(parts[5])
                .map_err(|e| Error::parse(path, ln + 1, e.to_string()))?;
            break (parts[1].to_string(), k, regime);
        };

        let mut matrix = DMatrix::zeros(k, k);
        let mut row = 0usize;
        let mut meta = TrainingMeta::default();
        let mut hyper: BTreeMap<String, String> = BTreeMap::new();
        for (ln, line) in lines {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("META ") {
                let mut parts = rest.splitn(2, ' ');
                let (Some(key), Some(value)) = (parts.next(), parts.next()) else {
                    return Err(Error::parse(path, ln + 1, "bad META line"));
                };
                match key {
                    "epochs_run" => meta.epochs_run = value.parse().unwrap_or(0),
                    "best_epoch" => meta.best_epoch = value.parse().unwrap_or(0),
                    "skipped" => meta.skipped = value.parse().unwrap_or(0),
                    "seed" => meta.seed = value.parse().unwrap_or(0),
                    "train_loss" => meta.train_loss = value.parse().ok(),
                    "validation_loss" => meta.validation_loss = value.parse().ok(),
                    other => {
                        hyper.insert(other.to_string(), value.to_string());
                    }
                }
                continue;
            }
            if row >= k {
                return Err(Error::parse(path, ln + 1, "too many matrix rows"));
            }
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| Error::parse(path, ln + 1, format!("bad float '{p}'")))
                })
                .collect::<Result<_>>()?;
            if values.len() != k {
                return Err(Error::parse(
                    path,
                    ln + 1,
                    format!("expected {k} values, found {}", values.len()),
                ));
            }
            for (j, x) in values.into_iter().enumerate() {
                matrix[(row, j)] = x;
            }
            row += 1;
        }
        if row != k {
            return Err(Error::parse(path, 1, format!("expected {k} rows, found {row}")));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(path, 1, "matrix contains non-finite values"));
        }

        meta.hyper = (|| {
            Some(RegressionConfig {
                lambda: hyper.get("lambda")?.parse().ok()?,
                rho: hyper.get("rho")?.parse().ok()?,
                epsilon: hyper.get("epsilon")?.parse().ok()?,
                max_epochs: hyper.get("max_epochs")?.parse().ok()?,
                patience: hyper.get("patience")?.parse().ok()?,
                batch: hyper.get("batch")?.parse().ok()?,
                seed: meta.seed,
                loss: hyper.get("loss")?.parse().ok()?,
            })
        })();

        Ok(VerbMatrix {
            verb,
            matrix,
            regime,
            meta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::Vocabulary;
    use approx::assert_relative_eq;
    use rand::RngExt;

    fn space(words: &[(&str, &[f64])]) -> EmbeddingSpace {
        let dim = words[0].1.len();
        let vocab =
            Vocabulary::new(words.iter().map(|(w, _)| (w.to_string(), 100)).collect()).unwrap();
        let vectors = words
            .iter()
            .map(|(_, v)| DVector::from_vec(v.to_vec()))
            .collect();
        EmbeddingSpace::from_parts(vocab, vectors, dim).unwrap()
    }

    fn svo(s: &str, o: &str) -> SvoTriple {
        SvoTriple::new(s, "v", o, 1).unwrap()
    }

    #[test]
    fn dist_single_outer_product() {
        let sp = space(&[("s", &[1.0, 0.0]), ("o", &[0.0, 1.0])]);
        let vm = train_dist("v", &[svo("s", "o")], &sp).unwrap();
        assert_eq!(vm.matrix, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn dist_averages_outer_products() {
        let sp = space(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let vm = train_dist("v", &[svo("a", "a"), svo("b", "b")], &sp).unwrap();
        assert_eq!(
            vm.matrix,
            DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5])
        );
    }

    #[test]
    fn dist_is_invariant_to_uniform_duplication() {
        let sp = space(&[("a", &[0.3, 0.7]), ("b", &[0.9, -0.2])]);
        let once = vec![svo("a", "b"), svo("b", "a")];
        let twice: Vec<SvoTriple> = once.iter().chain(once.iter()).cloned().collect();
        let v1 = train_dist("v", &once, &sp).unwrap();
        let v2 = train_dist("v", &twice, &sp).unwrap();
        assert!((&v1.matrix - &v2.matrix).abs().max() < 1e-15);
    }

    #[test]
    fn dist_is_bilinear_in_object_scale() {
        let sp1 = space(&[("a", &[0.4, 0.6]), ("b", &[0.8, -0.1])]);
        let sp2 = space(&[("a", &[0.4, 0.6]), ("b", &[2.4, -0.3])]); // b scaled by 3
        let t = vec![svo("a", "b")];
        let v1 = train_dist("v", &t, &sp1).unwrap();
        let v2 = train_dist("v", &t, &sp2).unwrap();
        assert!((&v2.matrix - &v1.matrix * 3.0).abs().max() < 1e-12);
    }

    #[test]
    fn dist_without_usable_triples_fails() {
        let sp = space(&[("a", &[1.0, 0.0])]);
        let err = train_dist("v", &[svo("x", "y")], &sp).unwrap_err();
        assert_eq!(err.to_string(), "no training data for verb 'v'");
    }

    #[test]
    fn plausibility_at_zero_matrix_is_half() {
        let v = DMatrix::zeros(3, 3);
        let s = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let o = DVector::from_vec(vec![0.3, 0.1, -4.0]);
        assert_eq!(plausibility(&v, &s, &o), 0.5);
    }

    #[test]
    fn plausibility_matches_sigmoid_of_two() {
        let v = DMatrix::from_row_slice(1, 1, &[2.0]);
        let s = DVector::from_vec(vec![1.0]);
        let o = DVector::from_vec(vec![1.0]);
        assert_relative_eq!(plausibility(&v, &s, &o), 0.880797, epsilon = 1e-6);
    }

    #[test]
    fn plausibility_is_antisymmetric_in_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let v = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-2.0..2.0));
            let s = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let o = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let p = plausibility(&v, &s, &o);
            let q = plausibility(&(-&v), &s, &o);
            assert!(p > 0.0 && p < 1.0);
            assert_relative_eq!(p + q, 1.0, epsilon = 1e-9);
        }
    }

    fn example(s: &[f64], o: &[f64], t: f64) -> TrainingExample {
        TrainingExample {
            s: DVector::from_vec(s.to_vec()),
            o: DVector::from_vec(o.to_vec()),
            t,
        }
    }

    #[test]
    fn loss_at_zero_matrix_is_log_two() {
        let v = DMatrix::zeros(2, 2);
        let batch = vec![example(&[1.0, 2.0], &[0.5, -1.0], 1.0)];
        let (loss, grad) = loss_and_gradient(&v, &batch, 0.0, LossKind::CrossEntropy);
        assert_relative_eq!(loss, std::f64::consts::LN_2, epsilon = 1e-12);
        let expected = DMatrix::from_fn(2, 2, |i, j| -0.5 * batch[0].s[i] * batch[0].o[j]);
        assert!((grad - expected).abs().max() < 1e-15);
    }

    #[test]
    fn balanced_batch_gradient_cancels() {
        let v = DMatrix::zeros(2, 2);
        let batch = vec![
            example(&[1.0, 2.0], &[0.5, -1.0], 1.0),
            example(&[1.0, 2.0], &[0.5, -1.0], 0.0),
        ];
        let (_, grad) = loss_and_gradient(&v, &batch, 0.0, LossKind::CrossEntropy);
        assert!(grad.abs().max() < 1e-15);
    }

    #[test]
    fn first_gradient_identity_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let k = 3;
        let v = DMatrix::zeros(k, k);
        let batch: Vec<TrainingExample> = (0..5)
            .map(|i| {
                TrainingExample {
                    s: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
                    o: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
                    t: f64::from(i % 2),
                }
            })
            .collect();
        let (_, grad) = loss_and_gradient(&v, &batch, 0.0, LossKind::CrossEntropy);
        let m = batch.len() as f64;
        let mut expected = DMatrix::zeros(k, k);
        for ex in &batch {
            expected.ger((0.5 - ex.t) / m, &ex.s, &ex.o, 1.0);
        }
        assert!((grad - expected).abs().max() < 1e-15);
    }

    fn numeric_gradient(
        v: &DMatrix<f64>,
        batch: &[TrainingExample],
        lambda: f64,
        kind: LossKind,
        h: f64,
    ) -> DMatrix<f64> {
        DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
            let mut plus = v.clone();
            plus[(i, j)] += h;
            let mut minus = v.clone();
            minus[(i, j)] -= h;
            let (lp, _) = loss_and_gradient(&plus, batch, lambda, kind);
            let (lm, _) = loss_and_gradient(&minus, batch, lambda, kind);
            (lp - lm) / (2.0 * h)
        })
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for kind in [LossKind::CrossEntropy, LossKind::MeanSquaredError] {
            let k = 2;
            let v = DMatrix::from_fn(k, k, |_, _| rng.random_range(-0.5..0.5));
            let batch: Vec<TrainingExample> = (0..4)
                .map(|i| TrainingExample {
                    s: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
                    o: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
                    t: f64::from(i % 2),
                })
                .collect();
            let (_, grad) = loss_and_gradient(&v, &batch, 0.05, kind);
            let num = numeric_gradient(&v, &batch, 0.05, kind, 1e-5);
            for i in 0..k {
                for j in 0..k {
                    let rel = (grad[(i, j)] - num[(i, j)]).abs()
                        / grad[(i, j)].abs().max(num[(i, j)].abs()).max(1e-8);
                    assert!(rel < 1e-6, "{kind:?} entry ({i},{j}) relative error {rel}");
                }
            }
        }
    }

    #[test]
    fn adadelta_zero_gradient_is_a_no_op() {
        let mut state = AdadeltaState::new(2, 2);
        let delta = adadelta_step(&mut state, &DMatrix::zeros(2, 2), 0.95, 1e-6);
        assert_eq!(delta, DMatrix::zeros(2, 2));
        assert_eq!(state.acc_grad_sq, DMatrix::zeros(2, 2));
        assert_eq!(state.acc_update_sq, DMatrix::zeros(2, 2));
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn adadelta_first_step_value() {
        let mut state = AdadeltaState::new(1, 1);
        let g = DMatrix::from_row_slice(1, 1, &[1.0]);
        let delta = adadelta_step(&mut state, &g, 0.95, 1e-6);
        // first-step recurrence: -sqrt(eps)/sqrt(0.05 + eps)
        let expected = -(1e-6f64).sqrt() / (0.05f64 + 1e-6).sqrt();
        assert_relative_eq!(delta[(0, 0)], expected, epsilon = 1e-15);
    }

    #[test]
    fn adadelta_first_step_is_scale_free() {
        let step = |c: f64| {
            let mut state = AdadeltaState::new(1, 1);
            let g = DMatrix::from_row_slice(1, 1, &[c]);
            adadelta_step(&mut state, &g, 0.95, 1e-6)[(0, 0)]
        };
        let d1 = step(1.0);
        let d100 = step(100.0);
        assert!(d1 < 0.0 && d100 < 0.0);
        assert!((d1.abs() - d100.abs()).abs() / d1.abs() < 1e-3);
        let dneg = step(-100.0);
        assert!(dneg > 0.0);
    }

    /// Two separated clusters per role; a bilinear classifier can fit the
    /// labels exactly, so held-out accuracy should be near-perfect.
    fn synthetic_cluster_task(
        k: usize,
        n_pos: usize,
        n_neg: usize,
        seed: u64,
    ) -> (EmbeddingSpace, Vec<LabeledTriple>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words: Vec<(String, u64)> = Vec::new();
        let mut vectors = Vec::new();
        let mut gaussian = |mean_axis: usize, rng: &mut ChaCha8Rng| {
            DVector::from_fn(k, |i, _| {
                let mu = if i == mean_axis { 2.0 } else { 0.0 };
                mu + 0.3 * (rng.random::<f64>() * 2.0 - 1.0)
            })
        };
        let mut data = Vec::new();
        let mut add_word = |prefix: &str,
                            idx: usize,
                            axis: usize,
                            words: &mut Vec<(String, u64)>,
                            vectors: &mut Vec<DVector<f64>>,
                            rng: &mut ChaCha8Rng| {
            let w = format!("{prefix}{idx}");
            words.push((w.clone(), 100));
            vectors.push(gaussian(axis, rng));
            w
        };
        for i in 0..n_pos {
            let s = add_word("ps", i, 0, &mut words, &mut vectors, &mut rng);
            let o = add_word("po", i, 2, &mut words, &mut vectors, &mut rng);
            data.push(LabeledTriple::positive(SvoTriple::new(s, "v", o, 1).unwrap()));
        }
        for i in 0..n_neg {
            // negatives: wrong subject cluster, wrong object cluster, or both
            let (s_axis, o_axis) = match i % 3 {
                0 => (1, 2),
                1 => (0, 3),
                _ => (1, 3),
            };
            let s = add_word("ns", i, s_axis, &mut words, &mut vectors, &mut rng);
            let o = add_word("no", i, o_axis, &mut words, &mut vectors, &mut rng);
            data.push(LabeledTriple::negative(SvoTriple::new(s, "v", o, 1).unwrap()));
        }
        let vocab = Vocabulary::new(words).unwrap();
        let space = EmbeddingSpace::from_parts(vocab, vectors, k).unwrap();
        (space, data)
    }

    fn accuracy(vm: &VerbMatrix, data: &[LabeledTriple], space: &EmbeddingSpace) -> f64 {
        let correct = data
            .iter()
            .filter(|t| {
                let s = space.vector_of(&t.triple.subject).unwrap();
                let o = space.vector_of(&t.triple.object).unwrap();
                (plausibility(&vm.matrix, s, o) >= 0.5) == t.label
            })
            .count();
        correct as f64 / data.len() as f64
    }

    #[test]
    fn reg_learns_a_separable_task() {
        let (space, data) = synthetic_cluster_task(6, 80, 80, 17);
        let (rest, held_out) = split_validation(data, 0.2, 3).unwrap();
        let (train, validation) = split_validation(rest, 0.1, 4).unwrap();
        let config = RegressionConfig {
            seed: 9,
            ..RegressionConfig::default()
        };
        let vm = train_reg("v", &train, &validation, &space, &config).unwrap();
        let acc = accuracy(&vm, &held_out, &space);
        assert!(acc >= 0.95, "held-out accuracy {acc}");
    }

    #[test]
    fn reg_label_flip_flips_the_decision_boundary() {
        let (space, data) = synthetic_cluster_task(6, 60, 60, 23);
        let flipped: Vec<LabeledTriple> = data
            .iter()
            .map(|t| LabeledTriple {
                triple: t.triple.clone(),
                label: !t.label,
            })
            .collect();
        let config = RegressionConfig {
            seed: 5,
            ..RegressionConfig::default()
        };
        let (train, val) = split_validation(data.clone(), 0.1, 6).unwrap();
        let vm = train_reg("v", &train, &val, &space, &config).unwrap();
        let (ftrain, fval) = split_validation(flipped, 0.1, 6).unwrap();
        let fvm = train_reg("v", &ftrain, &fval, &space, &config).unwrap();

        let mut flipped_sign = 0usize;
        for t in &data {
            let s = space.vector_of(&t.triple.subject).unwrap();
            let o = space.vector_of(&t.triple.object).unwrap();
            let a = s.dot(&(&vm.matrix * o));
            let b = s.dot(&(&fvm.matrix * o));
            if a.signum() != b.signum() {
                flipped_sign += 1;
            }
        }
        let frac = flipped_sign as f64 / data.len() as f64;
        assert!(frac >= 0.95, "sign flipped on only {frac} of pairs");
    }

    #[test]
    fn early_stopping_returns_the_best_snapshot() {
        // Validation carries the opposite label for the same vectors, so the
        // validation loss rises monotonically after epoch 1.
        let sp = space(&[("s", &[1.0, 0.0]), ("o", &[0.0, 1.0])]);
        let train: Vec<LabeledTriple> = (0..8)
            .map(|_| LabeledTriple::positive(svo("s", "o")))
            .chain((0..4).map(|_| {
                LabeledTriple::negative(SvoTriple::new("o", "v", "s", 1).unwrap())
            }))
            .collect();
        let validation = vec![LabeledTriple::negative(svo("s", "o"))];
        let config = RegressionConfig {
            patience: 1,
            max_epochs: 50,
            seed: 1,
            ..RegressionConfig::default()
        };
        let vm = train_reg("v", &train, &validation, &sp, &config).unwrap();
        assert_eq!(vm.meta.best_epoch, 1);
        assert_eq!(vm.meta.epochs_run, 2);
        let best = vm.meta.validation_loss.unwrap();
        for v in &vm.meta.val_history {
            assert!(best <= *v + 1e-15);
        }
    }

    #[test]
    fn reg_requires_both_labels() {
        let sp = space(&[("s", &[1.0, 0.0]), ("o", &[0.0, 1.0])]);
        let train: Vec<LabeledTriple> =
            (0..10).map(|_| LabeledTriple::positive(svo("s", "o"))).collect();
        let validation = vec![LabeledTriple::positive(svo("s", "o"))];
        let err = train_reg("v", &train, &validation, &sp, &RegressionConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn reg_plus_drives_mean_plausibility_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let k = 4;
        let words: Vec<(String, u64)> = (0..40).map(|i| (format!("w{i}"), 100)).collect();
        let vectors: Vec<DVector<f64>> = (0..40)
            .map(|_| DVector::from_fn(k, |_, _| rng.random_range(0.2..1.0)))
            .collect();
        let sp = EmbeddingSpace::from_parts(Vocabulary::new(words).unwrap(), vectors, k).unwrap();
        let positives: Vec<LabeledTriple> = (0..20)
            .map(|i| {
                LabeledTriple::positive(
                    SvoTriple::new(format!("w{i}"), "v", format!("w{}", i + 20), 1).unwrap(),
                )
            })
            .collect();
        let config = RegressionConfig {
            lambda: 0.0,
            max_epochs: 1500,
            patience: 1500,
            seed: 2,
            ..RegressionConfig::default()
        };
        let vm = train_reg_plus("v", &positives, &sp, &config).unwrap();
        let mean_h: f64 = positives
            .iter()
            .map(|t| {
                plausibility(
                    &vm.matrix,
                    sp.vector_of(&t.triple.subject).unwrap(),
                    sp.vector_of(&t.triple.object).unwrap(),
                )
            })
            .sum::<f64>()
            / positives.len() as f64;
        assert!(mean_h > 0.9, "mean plausibility {mean_h}");
    }

    #[test]
    fn reg_plus_large_lambda_keeps_the_matrix_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let k = 4;
        let words: Vec<(String, u64)> = (0..40).map(|i| (format!("w{i}"), 100)).collect();
        let vectors: Vec<DVector<f64>> = (0..40)
            .map(|_| DVector::from_fn(k, |_, _| rng.random_range(0.2..1.0)))
            .collect();
        let sp = EmbeddingSpace::from_parts(Vocabulary::new(words).unwrap(), vectors, k).unwrap();
        let positives: Vec<LabeledTriple> = (0..20)
            .map(|i| {
                LabeledTriple::positive(
                    SvoTriple::new(format!("w{i}"), "v", format!("w{}", i + 20), 1).unwrap(),
                )
            })
            .collect();
        let config = RegressionConfig {
            lambda: 10.0,
            max_epochs: 300,
            patience: 300,
            seed: 2,
            ..RegressionConfig::default()
        };
        let vm = train_reg_plus("v", &positives, &sp, &config).unwrap();
        assert!(vm.matrix.norm() < 1.0, "norm {}", vm.matrix.norm());
        // the regulariser pins V near zero, so the objective stays near log 2
        let train = vm.meta.train_loss.unwrap();
        assert!((train - std::f64::consts::LN_2).abs() < 0.1, "loss {train}");
    }

    #[test]
    fn training_is_deterministic() {
        let (space, data) = synthetic_cluster_task(4, 30, 30, 41);
        let (train, val) = split_validation(data, 0.1, 7).unwrap();
        let config = RegressionConfig {
            seed: 3,
            max_epochs: 50,
            ..RegressionConfig::default()
        };
        let a = train_reg("v", &train, &val, &space, &config).unwrap();
        let b = train_reg("v", &train, &val, &space, &config).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn overflowing_inputs_abort_with_diagnostics() {
        // vectors large enough that the first outer-product gradient
        // overflows, poisoning V with NaN on the first update
        let sp = space(&[("s", &[1e160, 0.0]), ("o", &[0.0, 1e160])]);
        let train: Vec<LabeledTriple> = (0..8)
            .map(|_| LabeledTriple::positive(svo("s", "o")))
            .chain((0..4).map(|_| {
                LabeledTriple::negative(SvoTriple::new("o", "v", "s", 1).unwrap())
            }))
            .collect();
        let validation = vec![LabeledTriple::negative(svo("s", "o"))];
        let config = RegressionConfig {
            max_epochs: 10,
            seed: 3,
            ..RegressionConfig::default()
        };
        let err = train_reg("v", &train, &validation, &sp, &config).unwrap_err();
        match err {
            Error::NonFiniteLoss { epoch, .. } => assert!(epoch >= 1),
            other => panic!("expected NonFiniteLoss, got {other}"),
        }
    }

    #[test]
    fn verb_matrix_roundtrips_through_file() {
        let (space, data) = synthetic_cluster_task(3, 15, 15, 47);
        let (train, val) = split_validation(data, 0.1, 7).unwrap();
        let config = RegressionConfig {
            seed: 13,
            max_epochs: 20,
            ..RegressionConfig::default()
        };
        let vm = train_reg("gobble", &train, &val, &space, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gobble.mat");
        vm.write_to(&path).unwrap();
        let back = VerbMatrix::read_from(&path).unwrap();
        assert_eq!(back.verb, "gobble");
        assert_eq!(back.regime, Regime::Reg);
        assert_eq!(back.matrix, vm.matrix);
        assert_eq!(back.meta.seed, 13);
        assert_eq!(back.meta.hyper.as_ref().unwrap().batch, config.batch);
    }
}
