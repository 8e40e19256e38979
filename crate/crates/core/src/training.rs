//! Training-data construction: frequency-filtered positive triples and
//! centroid-guided dissimilar-noun negatives, with seeded sampling and a
//! stratified validation split.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{EmbeddingSpace, Vocabulary};
use crate::error::{Error, Result};

/// Default multiplicative tolerance for frequency matching: candidates in
/// `[f/1.5, 1.5f]`.
pub const DEFAULT_FREQ_BAND: f64 = 0.5;

/// An attested subject-verb-object triple with its corpus count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SvoTriple {
    pub subject: String,
    pub verb: String,
    pub object: String,
    pub count: u64,
}

impl SvoTriple {
    pub fn new(
        subject: impl Into<String>,
        verb: impl Into<String>,
        object: impl Into<String>,
        count: u64,
    ) -> Result<Self> {
        let t = SvoTriple {
            subject: subject.into(),
            verb: verb.into(),
            object: object.into(),
            count,
        };
        if t.subject.is_empty() || t.verb.is_empty() || t.object.is_empty() {
            return Err(Error::Invalid("triple with empty word".into()));
        }
        if t.count == 0 {
            return Err(Error::Invalid(format!(
                "triple {} {} {} has count 0",
                t.subject, t.verb, t.object
            )));
        }
        Ok(t)
    }
}

/// A triple with its plausibility label: 1 = attested, 0 = generated negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTriple {
    pub triple: SvoTriple,
    pub label: bool,
}

impl LabeledTriple {
    pub fn positive(triple: SvoTriple) -> Self {
        LabeledTriple { triple, label: true }
    }

    pub fn negative(triple: SvoTriple) -> Self {
        LabeledTriple { triple, label: false }
    }

    /// The regression target t in {0, 1}.
    pub fn target(&self) -> f64 {
        if self.label {
            1.0
        } else {
            0.0
        }
    }
}

/// Labeled training material for one verb, with the seed that produced it.
#[derive(Debug, Clone)]
pub struct VerbTrainingSet {
    pub verb: String,
    pub positives: Vec<LabeledTriple>,
    pub negatives: Vec<LabeledTriple>,
    pub seed: u64,
}

impl VerbTrainingSet {
    /// Generates the 3-per-positive negative pool from `space`, then samples
    /// `neg_n` of them with `seed`.
    pub fn build(
        verb: &str,
        positives: &[SvoTriple],
        space: &EmbeddingSpace,
        neg_n: usize,
        freq_band: f64,
        seed: u64,
    ) -> Result<Self> {
        let pool = generate_negatives(positives, space, freq_band)?;
        let negatives = sample_negatives(&pool, neg_n, seed);
        Ok(VerbTrainingSet {
            verb: verb.to_string(),
            positives: positives
                .iter()
                .cloned()
                .map(LabeledTriple::positive)
                .collect(),
            negatives,
            seed,
        })
    }

    /// Positives followed by negatives, the order used for files and splits.
    pub fn all(&self) -> Vec<LabeledTriple> {
        let mut out = self.positives.clone();
        out.extend(self.negatives.iter().cloned());
        out
    }
}

/// Reads a TSV of attested triples: `subject<TAB>verb<TAB>object<TAB>count`.
/// Duplicate triples have their counts summed.
pub fn read_triples(path: &Path) -> Result<Vec<SvoTriple>> {
    let file = BufReader::new(File::open(path)?);
    let mut merged: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    let mut order: Vec<(String, String, String)> = Vec::new();
    for (ln, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 4 {
            return Err(Error::parse(
                path,
                ln + 1,
                format!("expected 4 tab-separated fields, found {}", parts.len()),
            ));
        }
        let count: u64 = parts[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, ln + 1, format!("bad count '{}'", parts[3])))?;
        if count == 0 {
            return Err(Error::parse(path, ln + 1, "count must be >= 1"));
        }
        let key = (
            parts[0].to_string(),
            parts[1].to_string(),
            parts[2].to_string(),
        );
        if key.0.is_empty() || key.1.is_empty() || key.2.is_empty() {
            return Err(Error::parse(path, ln + 1, "empty word"));
        }
        if !merged.contains_key(&key) {
            order.push(key.clone());
        }
        *merged.entry(key).or_insert(0) += count;
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let count = merged[&key];
            SvoTriple {
                subject: key.0,
                verb: key.1,
                object: key.2,
                count,
            }
        })
        .collect())
}

/// Per-verb plausible triples: both nouns must occur at least `min_noun_freq`
/// times in the corpus, ranked by triple count descending (ties broken by
/// `(subject, object)` lexicographically), truncated to `top_n`.
///
/// Verbs left with no surviving triples are dropped with a warning.
pub fn select_positives(
    triples: &[SvoTriple],
    vocab: &Vocabulary,
    min_noun_freq: u64,
    top_n: usize,
) -> Result<BTreeMap<String, Vec<SvoTriple>>> {
    if triples.is_empty() {
        return Err(Error::Invalid("no triples given".into()));
    }
    let noun_ok = |w: &str| vocab.frequency(w).unwrap_or(0) >= min_noun_freq;
    let mut verbs: BTreeMap<String, Vec<SvoTriple>> = BTreeMap::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for t in triples {
        seen.insert(&t.verb);
        if noun_ok(&t.subject) && noun_ok(&t.object) {
            verbs.entry(t.verb.clone()).or_default().push(t.clone());
        }
    }
    for v in &seen {
        if !verbs.contains_key(**&v) {
            log::warn!("verb '{v}' has no triples passing the noun-frequency filter; excluded");
        }
    }
    for list in verbs.values_mut() {
        list.sort_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then_with(|| a.subject.cmp(&b.subject))
                .then_with(|| a.object.cmp(&b.object))
        });
        list.truncate(top_n);
    }
    Ok(verbs)
}

fn cosine_to(v: &DVector<f64>, target: &DVector<f64>) -> f64 {
    let denom = v.norm() * target.norm();
    if denom == 0.0 {
        0.0
    } else {
        v.dot(target) / denom
    }
}

/// All in-band substitution candidates for `noun`, most dissimilar first.
///
/// The target is the mean of the noun's vector and the role centroid; the
/// frequency band `[f/(1+tol), f*(1+tol)]` is doubled up to three times if
/// empty. Ties are broken lexicographically.
fn ranked_dissimilar(
    noun: &str,
    role_centroid: &DVector<f64>,
    space: &EmbeddingSpace,
    freq_band: f64,
) -> Result<Vec<String>> {
    let noun_vec = space.vector_of(noun)?;
    let target = (noun_vec + role_centroid) / 2.0;
    let freq = space
        .vocabulary()
        .frequency(noun)
        .ok_or_else(|| Error::OutOfVocabulary(noun.to_string()))? as f64;

    let mut tol = freq_band;
    for _ in 0..4 {
        let lo = freq / (1.0 + tol);
        let hi = freq * (1.0 + tol);
        let mut candidates: Vec<(f64, &str)> = space
            .vocabulary()
            .words()
            .filter(|w| *w != noun)
            .filter(|w| {
                let f = space.vocabulary().frequency(w).unwrap_or(0) as f64;
                f >= lo && f <= hi
            })
            .map(|w| (cosine_to(space.vector_of(w).expect("vocab word"), &target), w))
            .collect();
        if !candidates.is_empty() {
            candidates.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.1.cmp(b.1))
            });
            return Ok(candidates.into_iter().map(|(_, w)| w.to_string()).collect());
        }
        tol *= 2.0;
    }
    Err(Error::NoFrequencyMatchedCandidate(noun.to_string()))
}

/// The frequency-matched word least cosine-similar to the average of the
/// noun's vector and the role centroid.
pub fn dissimilar_noun(
    noun: &str,
    role_centroid: &DVector<f64>,
    space: &EmbeddingSpace,
    freq_band: f64,
) -> Result<String> {
    Ok(ranked_dissimilar(noun, role_centroid, space, freq_band)?
        .into_iter()
        .next()
        .expect("ranked list is non-empty"))
}

/// Generates the label-0 pool: for each positive `(s, v, o)`, the three
/// substitutions `(s', v, o)`, `(s, v, o')`, and `(s', v, o')` with `s'`/`o'`
/// the most dissimilar frequency-matched words. A substitution that collides
/// with an attested positive of the same verb falls back to the next-ranked
/// candidate. Deterministic: no randomness enters until sampling.
pub fn generate_negatives(
    positives: &[SvoTriple],
    space: &EmbeddingSpace,
    freq_band: f64,
) -> Result<Vec<LabeledTriple>> {
    if positives.is_empty() {
        return Err(Error::Invalid("no positives given".into()));
    }
    let usable: Vec<&SvoTriple> = positives
        .iter()
        .filter(|t| {
            let ok = space.contains(&t.subject) && space.contains(&t.object);
            if !ok {
                log::warn!(
                    "positive '{} {} {}' has out-of-vocabulary nouns; skipped",
                    t.subject,
                    t.verb,
                    t.object
                );
            }
            ok
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::Invalid(
            "no positives with in-vocabulary nouns".into(),
        ));
    }

    let k = space.dim();
    let mut subj_centroid = DVector::zeros(k);
    let mut obj_centroid = DVector::zeros(k);
    for t in &usable {
        subj_centroid += space.vector_of(&t.subject)?;
        obj_centroid += space.vector_of(&t.object)?;
    }
    subj_centroid /= usable.len() as f64;
    obj_centroid /= usable.len() as f64;

    let attested: HashSet<(&str, &str)> = usable
        .iter()
        .map(|t| (t.subject.as_str(), t.object.as_str()))
        .collect();

    // Ranked candidate lists are a function of (role, noun); memoize them.
    let mut cache: HashMap<(u8, String), Vec<String>> = HashMap::new();
    let mut ranked = |role: u8, noun: &str| -> Result<Vec<String>> {
        if let Some(c) = cache.get(&(role, noun.to_string())) {
            return Ok(c.clone());
        }
        let centroid = if role == 0 { &subj_centroid } else { &obj_centroid };
        let list = ranked_dissimilar(noun, centroid, space, freq_band)?;
        cache.insert((role, noun.to_string()), list.clone());
        Ok(list)
    };

    let mut pool = Vec::with_capacity(3 * usable.len());
    for t in &usable {
        let verb = &t.verb;
        let subs = match ranked(0, &t.subject) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("no subject substitute for '{}': {e}; negatives skipped", t.subject);
                continue;
            }
        };
        let objs = match ranked(1, &t.object) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("no object substitute for '{}': {e}; negatives skipped", t.object);
                continue;
            }
        };

        let sub = subs
            .iter()
            .find(|s| !attested.contains(&(s.as_str(), t.object.as_str())));
        let obj = objs
            .iter()
            .find(|o| !attested.contains(&(t.subject.as_str(), o.as_str())));
        let both = subs.iter().find_map(|s| {
            objs.iter()
                .find(|o| !attested.contains(&(s.as_str(), o.as_str())))
                .map(|o| (s, o))
        });

        if let Some(s) = sub {
            pool.push(LabeledTriple::negative(SvoTriple {
                subject: s.clone(),
                verb: verb.clone(),
                object: t.object.clone(),
                count: 1,
            }));
        } else {
            log::warn!("all subject substitutes for '{}' collide; negative skipped", t.subject);
        }
        if let Some(o) = obj {
            pool.push(LabeledTriple::negative(SvoTriple {
                subject: t.subject.clone(),
                verb: verb.clone(),
                object: o.clone(),
                count: 1,
            }));
        } else {
            log::warn!("all object substitutes for '{}' collide; negative skipped", t.object);
        }
        if let Some((s, o)) = both {
            pool.push(LabeledTriple::negative(SvoTriple {
                subject: s.clone(),
                verb: verb.clone(),
                object: o.clone(),
                count: 1,
            }));
        } else {
            log::warn!(
                "all double substitutes for '{} {}' collide; negative skipped",
                t.subject,
                t.object
            );
        }
    }
    Ok(pool)
}

/// Uniform sample without replacement of `min(n, pool)` items, deterministic
/// for a fixed seed.
pub fn sample_negatives(pool: &[LabeledTriple], n: usize, seed: u64) -> Vec<LabeledTriple> {
    let take = n.min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    index::sample(&mut rng, pool.len(), take)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect()
}

/// Seeded, stratified split: the validation side gets `round(fraction * n)`
/// items with the positive:negative ratio of the full set preserved within
/// one item.
pub fn split_validation(
    data: Vec<LabeledTriple>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledTriple>, Vec<LabeledTriple>)> {
    let n = data.len();
    if n < 10 {
        return Err(Error::TooFewTrainingExamples(n));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "validation fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n_val = ((fraction * n as f64).round() as usize).max(1);

    let mut pos: Vec<LabeledTriple> = Vec::new();
    let mut neg: Vec<LabeledTriple> = Vec::new();
    for t in data {
        if t.label {
            pos.push(t);
        } else {
            neg.push(t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut val_pos = ((n_val as f64) * (pos.len() as f64) / (n as f64)).round() as usize;
    val_pos = val_pos.min(pos.len());
    let mut val_neg = n_val - val_pos;
    if val_neg > neg.len() {
        let spill = val_neg - neg.len();
        val_neg = neg.len();
        val_pos = (val_pos + spill).min(pos.len());
    }

    let mut validation = Vec::with_capacity(n_val);
    let mut train = Vec::with_capacity(n - n_val);
    validation.extend(pos.drain(..val_pos));
    train.extend(pos);
    validation.extend(neg.drain(..val_neg));
    train.extend(neg);
    Ok((train, validation))
}

/// Writes one verb's labeled triples as `subject<TAB>verb<TAB>object<TAB>label`
/// rows, preceded by a metadata comment recording the seed and parameters.
pub fn write_training_set(path: &Path, set: &VerbTrainingSet, meta: &str) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# verb={} seed={} {}", set.verb, set.seed, meta)?;
    for t in set.positives.iter().chain(set.negatives.iter()) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.triple.subject,
            t.triple.verb,
            t.triple.object,
            if t.label { 1 } else { 0 }
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a training-set file back into labeled triples (counts are not
/// stored in this format and default to 1).
pub fn read_training_set(path: &Path) -> Result<Vec<LabeledTriple>> {
    let file = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (ln, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 4 {
            return Err(Error::parse(
                path,
                ln + 1,
                format!("expected 4 tab-separated fields, found {}", parts.len()),
            ));
        }
        let label = match parts[3].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(path, ln + 1, format!("bad label '{other}'")));
            }
        };
        let triple = SvoTriple::new(parts[0], parts[1], parts[2], 1)
            .map_err(|e| Error::parse(path, ln + 1, e.to_string()))?;
        out.push(LabeledTriple { triple, label });
    }
    Ok(out)
}
