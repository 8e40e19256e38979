//! Benchmark evaluation: loads paired-sentence datasets, scores pairs under
//! a composition method, correlates against gold judgements with Spearman's
//! rho, and locates divergent pairs via per-pair squared error between
//! min-max-normalised system and gold scores.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;

use crate::compose::{compose, similarity_with, CompositionMethod};
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::learning::VerbMatrix;

/// Ratings are validated against the datasets' native 1-7 scale.
pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Gs2011,
    Ks2013,
    Canonical,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gs2011" => Ok(DatasetFormat::Gs2011),
            "ks2013" => Ok(DatasetFormat::Ks2013),
            "canonical" => Ok(DatasetFormat::Canonical),
            other => Err(Error::Invalid(format!(
                "unknown dataset format '{other}' (expected gs2011, ks2013, or canonical)"
            ))),
        }
    }
}

impl std::fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetFormat::Gs2011 => write!(f, "gs2011"),
            DatasetFormat::Ks2013 => write!(f, "ks2013"),
            DatasetFormat::Canonical => write!(f, "canonical"),
        }
    }
}

/// A bare subject-verb-object sentence (no corpus count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Svo {
    pub subject: String,
    pub verb: String,
    pub object: String,
}

impl Svo {
    pub fn new(subject: &str, verb: &str, object: &str) -> Self {
        Svo {
            subject: subject.to_string(),
            verb: verb.to_string(),
            object: object.to_string(),
        }
    }
}

/// A benchmark item: two sentences and the per-annotator similarity ratings.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub left: Svo,
    pub right: Svo,
    pub ratings: Vec<f64>,
}

fn check_rating(path: &Path, ln: usize, raw: &str) -> Result<f64> {
    let r: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, ln, format!("bad rating '{raw}'")))?;
    if !(RATING_MIN..=RATING_MAX).contains(&r) {
        return Err(Error::parse(
            path,
            ln,
            format!("rating {r} outside the {RATING_MIN}-{RATING_MAX} scale"),
        ));
    }
    Ok(r)
}

/// Loads a dataset, grouping annotator rows into one [`EvalPair`] per pair.
///
/// - `canonical`: TSV `pair_id subj1 verb1 obj1 subj2 verb2 obj2 annotator rating`
/// - `gs2011`: whitespace `annotator verb subject object landmark rating [...]`,
///   pairing `subject verb object` with `subject landmark object`
/// - `ks2013`: whitespace `annotator subj1 verb1 obj1 subj2 verb2 obj2 rating`
///
/// A leading header row is tolerated for the two published layouts.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<EvalPair>> {
    let file = BufReader::new(File::open(path)?);
    let mut pairs: Vec<EvalPair> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut first_data_row = true;

    for (ln0, line) in file.lines().enumerate() {
        let ln = ln0 + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }

        let (id, left, right, rating) = match format {
            DatasetFormat::Canonical => {
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 9 {
                    return Err(Error::parse(
                        path,
                        ln,
                        format!("expected 9 tab-separated fields, found {}", f.len()),
                    ));
                }
                let rating = check_rating(path, ln, f[8])?;
                (
                    f[0].to_string(),
                    Svo::new(f[1], f[2], f[3]),
                    Svo::new(f[4], f[5], f[6]),
                    rating,
                )
            }
            DatasetFormat::Gs2011 => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 6 {
                    return Err(Error::parse(
                        path,
                        ln,
                        format!("expected at least 6 fields, found {}", f.len()),
                    ));
                }
                if first_data_row && f[5].parse::<f64>().is_err() {
                    first_data_row = false;
                    continue; // header row
                }
                let rating = check_rating(path, ln, f[5])?;
                let (verb, subject, object, landmark) = (f[1], f[2], f[3], f[4]);
                (
                    format!("{verb}:{landmark}:{subject}:{object}"),
                    Svo::new(subject, verb, object),
                    Svo::new(subject, landmark, object),
                    rating,
                )
            }
            DatasetFormat::Ks2013 => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 8 {
                    return Err(Error::parse(
                        path,
                        ln,
                        format!("expected at least 8 fields, found {}", f.len()),
                    ));
                }
                if first_data_row && f[7].parse::<f64>().is_err() {
                    first_data_row = false;
                    continue;
                }
                let rating = check_rating(path, ln, f[7])?;
                (
                    format!("{}:{}:{}:{}:{}:{}", f[1], f[2], f[3], f[4], f[5], f[6]),
                    Svo::new(f[1], f[2], f[3]),
                    Svo::new(f[4], f[5], f[6]),
                    rating,
                )
            }
        };
        first_data_row = false;

        match by_id.get(&id) {
            Some(&i) => {
                let pair = &mut pairs[i];
                if pair.left != left || pair.right != right {
                    return Err(Error::parse(
                        path,
                        ln,
                        format!("pair id '{id}' redefined with different triples"),
                    ));
                }
                pair.ratings.push(rating);
            }
            None => {
                by_id.insert(id.clone(), pairs.len());
                pairs.push(EvalPair {
                    id,
                    left,
                    right,
                    ratings: vec![rating],
                });
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 1, "dataset contains no pairs"));
    }
    Ok(pairs)
}

/// Scoring options; the defaults are the standard protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// Correlate per (pair, annotator) point instead of per pair.
    pub per_annotator: bool,
    /// L2-normalise noun and verb vectors before composing.
    pub normalize_inputs: bool,
    /// Normalise the relational similarity to a matrix cosine.
    pub matrix_cosine: bool,
}

fn unit_or_self(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

/// Scores every pair under `method`; pairs with out-of-vocabulary words or
/// missing verb matrices are skipped and reported.
pub fn score_pairs(
    pairs: &[EvalPair],
    space: &EmbeddingSpace,
    matrices: &BTreeMap<String, VerbMatrix>,
    method: CompositionMethod,
    options: EvalOptions,
) -> Result<(BTreeMap<String, f64>, Vec<String>)> {
    let mut scores = BTreeMap::new();
    let mut skipped = Vec::new();

    'pair: for pair in pairs {
        let mut vectors = Vec::with_capacity(4);
        for w in [
            &pair.left.subject,
            &pair.left.object,
            &pair.right.subject,
            &pair.right.object,
        ] {
            match space.vector_of(w) {
                Ok(v) => vectors.push(v.clone()),
                Err(_) => {
                    log::warn!("pair '{}': out-of-vocabulary word '{w}'; skipped", pair.id);
                    skipped.push(pair.id.clone());
                    continue 'pair;
                }
            }
        }

        let compose_side = |verb: &str, s: &DVector<f64>, o: &DVector<f64>| -> Result<_> {
            let (mut s, mut o) = (s.clone(), o.clone());
            if options.normalize_inputs {
                s = unit_or_self(&s);
                o = unit_or_self(&o);
            }
            if method.uses_verb_vector() {
                let mut v = space.vector_of(verb)?.clone();
                if options.normalize_inputs {
                    v = unit_or_self(&v);
                }
                compose(method, None, Some(&v), &s, &o)
            } else {
                let vm = matrices
                    .get(verb)
                    .ok_or_else(|| Error::Invalid(format!("no verb matrix for '{verb}'")))?;
                compose(method, Some(&vm.matrix), None, &s, &o)
            }
        };

        let left = compose_side(&pair.left.verb, &vectors[0], &vectors[1]);
        let right = compose_side(&pair.right.verb, &vectors[2], &vectors[3]);
        match (left, right) {
            (Ok(l), Ok(r)) => {
                scores.insert(pair.id.clone(), similarity_with(&l, &r, options.matrix_cosine)?);
            }
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("pair '{}': {e}; skipped", pair.id);
                skipped.push(pair.id.clone());
            }
        }
    }

    if scores.is_empty() {
        return Err(Error::NoScorablePairs);
    }
    Ok((scores, skipped))
}

/// Average ranks (1-based), ties sharing the mean of their positions.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    (sxy, sxx, syy)
}

/// Spearman's rank correlation with average-rank tie handling, computed as
/// the Pearson correlation of the two rank vectors.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Invalid(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 paired observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite value in correlation input".into()));
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let (sxy, sxx, syy) = pearson(&rx, &ry);
    if sxx == 0.0 {
        return Err(Error::DegenerateRanking("left list has no rank variance".into()));
    }
    if syy == 0.0 {
        return Err(Error::DegenerateRanking("right list has no rank variance".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Min-max normalisation onto [0, 1]; errors if all values coincide.
pub fn min_max_normalize(values: &[f64], side: &str) -> Result<Vec<f64>> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::DegenerateNormalization(side.to_string()));
    }
    Ok(values.iter().map(|v| (v - min) / (max - min)).collect())
}

/// The evaluated configuration a result belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultConfig {
    pub regime: String,
    pub composition: CompositionMethod,
    pub k: usize,
}

/// Per-pair detail: raw and normalised scores plus the squared error between
/// the normalised system score and normalised gold mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub system: f64,
    pub gold_mean: f64,
    pub norm_system: f64,
    pub norm_gold: f64,
    pub msqe: f64,
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub config: ResultConfig,
    pub per_pair: BTreeMap<String, PairScore>,
    pub rho: f64,
    pub skipped: Vec<String>,
}

impl EvalResult {
    pub fn n_pairs(&self) -> usize {
        self.per_pair.len()
    }
}

/// Scores a dataset and correlates against gold judgements.
///
/// Gold ratings are averaged per pair before correlating (one point per
/// pair); `options.per_annotator` computes the per-(pair, annotator)
/// alternative instead. Skipped pairs never influence rho.
pub fn evaluate(
    pairs: &[EvalPair],
    space: &EmbeddingSpace,
    matrices: &BTreeMap<String, VerbMatrix>,
    method: CompositionMethod,
    regime_label: &str,
    options: EvalOptions,
) -> Result<EvalResult> {
    let (scores, skipped) = score_pairs(pairs, space, matrices, method, options)?;
    let by_id: HashMap<&str, &EvalPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();

    let ids: Vec<&String> = scores.keys().collect();
    let system: Vec<f64> = ids.iter().map(|id| scores[*id]).collect();
    let golds: Vec<f64> = ids
        .iter()
        .map(|id| {
            let p = by_id[id.as_str()];
            p.ratings.iter().sum::<f64>() / p.ratings.len() as f64
        })
        .collect();

    let rho = if options.per_annotator {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            for r in &by_id[id.as_str()].ratings {
                xs.push(system[i]);
                ys.push(*r);
            }
        }
        spearman(&xs, &ys)?
    } else {
        spearman(&system, &golds)?
    };

    let norm_system = min_max_normalize(&system, "system")?;
    let norm_gold = min_max_normalize(&golds, "gold")?;

    let mut per_pair = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let e = norm_system[i] - norm_gold[i];
        per_pair.insert(
            (*id).clone(),
            PairScore {
                system: system[i],
                gold_mean: golds[i],
                norm_system: norm_system[i],
                norm_gold: norm_gold[i],
                msqe: e * e,
            },
        );
    }

    Ok(EvalResult {
        config: ResultConfig {
            regime: regime_label.to_string(),
            composition: method,
            k: space.dim(),
        },
        per_pair,
        rho,
        skipped,
    })
}

/// One row of the method-comparison report: positive `diff` means method B
/// fit this pair better, negative means method A did.
#[derive(Debug, Clone, PartialEq)]
pub struct MsqeEntry {
    pub pair_id: String,
    pub error_a: f64,
    pub error_b: f64,
    pub diff: f64,
}

/// Subtracts per-pair squared errors of two results over the same pair set,
/// sorted ascending so the pairs where A most outperforms B come first.
pub fn msqe_analysis(a: &EvalResult, b: &EvalResult) -> Result<Vec<MsqeEntry>> {
    let ids_a: Vec<&String> = a.per_pair.keys().collect();
    let ids_b: Vec<&String> = b.per_pair.keys().collect();
    if ids_a != ids_b {
        return Err(Error::Invalid(
            "results cover different pair sets; cannot compare".into(),
        ));
    }
    let mut entries: Vec<MsqeEntry> = ids_a
        .into_iter()
        .map(|id| {
            let ea = a.per_pair[id].msqe;
            let eb = b.per_pair[id].msqe;
            MsqeEntry {
                pair_id: id.clone(),
                error_a: ea,
                error_b: eb,
                diff: ea - eb,
            }
        })
        .collect();
    entries.sort_by(|x, y| {
        x.diff
            .partial_cmp(&y.diff)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.pair_id.cmp(&y.pair_id))
    });
    Ok(entries)
}

/// Writes the one-line summary table: `regime comp K rho n_pairs n_skipped`.
pub fn write_result_summary(path: &Path, result: &EvalResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "regime\tcomp\tk\trho\tn_pairs\tn_skipped")?;
    writeln!(
        out,
        "{}\t{}\t{}\t{:.6}\t{}\t{}",
        result.config.regime,
        result.config.composition,
        result.config.k,
        result.rho,
        result.n_pairs(),
        result.skipped.len()
    )?;
    out.flush()?;
    Ok(())
}

/// Writes the per-pair detail file consumed by the analysis command.
pub fn write_result_detail(path: &Path, result: &EvalResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "# regime={} comp={} k={} rho={} n_pairs={} n_skipped={}",
        result.config.regime,
        result.config.composition,
        result.config.k,
        result.rho,
        result.n_pairs(),
        result.skipped.len()
    )?;
    writeln!(out, "pair_id\tsystem\tgold_mean\tnorm_system\tnorm_gold\tmsqe")?;
    for (id, s) in &result.per_pair {
        writeln!(
            out,
            "{id}\t{}\t{}\t{}\t{}\t{}",
            s.system, s.gold_mean, s.norm_system, s.norm_gold, s.msqe
        )?;
    }
    for id in &result.skipped {
        writeln!(out, "# skipped {id}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a detail file back for comparison between runs.
pub fn read_result_detail(path: &Path) -> Result<EvalResult> {
    let file = BufReader::new(File::open(path)?);
    let mut config: Option<ResultConfig> = None;
    let mut rho = f64::NAN;
    let mut per_pair = BTreeMap::new();
    let mut skipped = Vec::new();

    for (ln0, line) in file.lines().enumerate() {
        let ln = ln0 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# skipped ") {
            skipped.push(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            let mut fields: HashMap<&str, &str> = HashMap::new();
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    fields.insert(k, v);
                }
            }
            if let (Some(r), Some(c), Some(k)) =
                (fields.get("regime"), fields.get("comp"), fields.get("k"))
            {
                config = Some(ResultConfig {
                    regime: r.to_string(),
                    composition: CompositionMethod::from_str(c)
                        .map_err(|e| Error::parse(path, ln, e.to_string()))?,
                    k: k.parse().map_err(|_| Error::parse(path, ln, "bad k"))?,
                });
            }
            if let Some(r) = fields.get("rho") {
                rho = r.parse().map_err(|_| Error::parse(path, ln, "bad rho"))?;
            }
            continue;
        }
        if line.starts_with("pair_id\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::parse(
                path,
                ln,
                format!("expected 6 tab-separated fields, found {}", f.len()),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(path, ln, format!("bad float '{s}'")))
        };
        per_pair.insert(
            f[0].to_string(),
            PairScore {
                system: num(f[1])?,
                gold_mean: num(f[2])?,
                norm_system: num(f[3])?,
                norm_gold: num(f[4])?,
                msqe: num(f[5])?,
            },
        );
    }
    let config = config.ok_or_else(|| Error::parse(path, 1, "missing result header"))?;
    if per_pair.is_empty() {
        return Err(Error::parse(path, 1, "no pair rows"));
    }
    Ok(EvalResult {
        config,
        per_pair,
        rho,
        skipped,
    })
}

/// Writes the sorted method-comparison report.
pub fn write_msqe_report(path: &Path, entries: &[MsqeEntry], label_a: &str, label_b: &str) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# a={label_a} b={label_b}")?;
    writeln!(out, "pair_id\terror_a\terror_b\tdiff")?;
    for e in entries {
        writeln!(out, "{}\t{}\t{}\t{}", e.pair_id, e.error_a, e.error_b, e.diff)?;
    }
    out.flush()?;
    Ok(())
}
