//! Reduced word-vector space: symmetric-window co-occurrence counting,
//! t-test association weighting, row normalization, and truncated SVD.
//!
//! The pipeline is `build_cooccurrence` -> `ttest_weight` -> `normalize_rows`
//! -> `svd_reduce`, producing an [`EmbeddingSpace`] that maps every retained
//! word to a K-dimensional vector. All steps are deterministic: the same
//! token stream and parameters yield a bit-identical space.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordered word list with corpus occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    freqs: Vec<u64>,
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, frequency)` pairs, keeping the given
    /// order. Duplicate words or zero frequencies are rejected.
    pub fn new(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut freqs = Vec::with_capacity(entries.len());
        for (word, freq) in entries {
            if freq == 0 {
                return Err(Error::Invalid(format!("word '{word}' has frequency 0")));
            }
            if index.insert(word.clone(), words.len()).is_some() {
                return Err(Error::Invalid(format!("duplicate word '{word}'")));
            }
            words.push(word);
            freqs.push(freq);
        }
        Ok(Vocabulary { words, index, freqs })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|i| self.freqs[i])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }
}

/// Sparse symmetric-window co-occurrence counts over a filtered vocabulary.
///
/// Rows are target words, columns context words, both indexed by the same
/// [`Vocabulary`].
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    vocab: Vocabulary,
    rows: Vec<BTreeMap<usize, f64>>,
    total: f64,
}

/// Counts within-window pairs over whitespace-tokenized sentences.
///
/// Each ordered pair `(target, context)` at distance <= `window` inside a
/// sentence increments one cell; windows do not cross sentence boundaries.
/// Words occurring fewer than `min_count` times in the corpus are dropped
/// from both axes. Vocabulary order is first occurrence in the stream.
pub fn build_cooccurrence(
    sentences: &[Vec<String>],
    window: usize,
    min_count: u64,
) -> Result<CooccurrenceMatrix> {
    if window == 0 {
        return Err(Error::Invalid("window must be >= 1".into()));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for sentence in sentences {
        for token in sentence {
            let entry = freq.entry(token.as_str()).or_insert(0);
            if *entry == 0 {
                order.push(token.as_str());
            }
            *entry += 1;
        }
    }
    if order.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let entries: Vec<(String, u64)> = order
        .iter()
        .filter(|w| freq[**w] >= min_count)
        .map(|w| (w.to_string(), freq[*w]))
        .collect();
    if entries.is_empty() {
        return Err(Error::Invalid(format!(
            "no words occur at least {min_count} times"
        )));
    }
    let vocab = Vocabulary::new(entries)?;

    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vocab.len()];
    let mut total = 0.0;
    for sentence in sentences {
        let ids: Vec<Option<usize>> = sentence.iter().map(|t| vocab.index_of(t)).collect();
        for i in 0..ids.len() {
            let Some(a) = ids[i] else { continue };
            let hi = (i + window).min(ids.len().saturating_sub(1));
            for j in (i + 1)..=hi {
                let Some(b) = ids[j] else { continue };
                *rows[a].entry(b).or_insert(0.0) += 1.0;
                *rows[b].entry(a).or_insert(0.0) += 1.0;
                total += 2.0;
            }
        }
    }

    Ok(CooccurrenceMatrix { vocab, rows, total })
}

impl CooccurrenceMatrix {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn count(&self, target: &str, context: &str) -> f64 {
        match (self.vocab.index_of(target), self.vocab.index_of(context)) {
            (Some(a), Some(b)) => self.rows[a].get(&b).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// t-test association weighting with negative weights clamped to zero:
    /// `t(w,c) = (p(w,c) - p(w)p(c)) / sqrt(p(w)p(c))`.
    pub fn ttest_weight(&self) -> Result<WeightedMatrix> {
        if self.total <= 0.0 {
            return Err(Error::NoCooccurrenceMass);
        }
        let n = self.vocab.len();
        let mut row_sums = vec![0.0; n];
        let mut col_sums = vec![0.0; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &c) in row {
                row_sums[i] += c;
                col_sums[j] += c;
            }
        }
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            let pw = row_sums[i] / self.total;
            for (&j, &c) in row {
                let pc = col_sums[j] / self.total;
                let pwc = c / self.total;
                let expected = pw * pc;
                // c > 0 implies pw > 0 and pc > 0.
                let t = (pwc - expected) / expected.sqrt();
                if t > 0.0 {
                    rows[i].insert(j, t);
                }
            }
        }
        Ok(WeightedMatrix {
            vocab: self.vocab.clone(),
            rows,
            ncols: n,
        })
    }
}

/// Sparse non-negative association weights, same axes as the counts.
#[derive(Debug, Clone)]
pub struct WeightedMatrix {
    vocab: Vocabulary,
    rows: Vec<BTreeMap<usize, f64>>,
    ncols: usize,
}

impl WeightedMatrix {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn weight(&self, target: &str, context: &str) -> f64 {
        match (self.vocab.index_of(target), self.vocab.index_of(context)) {
            (Some(a), Some(b)) => self.rows[a].get(&b).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Scales every nonzero row to unit Euclidean length; zero rows stay zero.
    pub fn normalize_rows(&self) -> WeightedMatrix {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let norm = row.values().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter().map(|(&j, &v)| (j, v / norm)).collect()
                } else {
                    BTreeMap::new()
                }
            })
            .collect();
        WeightedMatrix {
            vocab: self.vocab.clone(),
            rows,
            ncols: self.ncols,
        }
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.rows[i].values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Truncated rank-K SVD of the weighted matrix; word vectors are rows of
    /// `U_K * Sigma_K` (or bare `U_K`, per `scaling`).
    pub fn svd_reduce(&self, k: usize, scaling: SvdScaling) -> Result<EmbeddingSpace> {
        let dense = self.to_dense();
        let svd = truncated_svd(&dense, k)?;
        let mut vectors = Vec::with_capacity(self.vocab.len());
        for i in 0..self.vocab.len() {
            let mut v = DVector::zeros(k);
            for j in 0..k {
                let scale = match scaling {
                    SvdScaling::UTimesSigma => svd.singular_values[j],
                    SvdScaling::UOnly => 1.0,
                };
                v[j] = svd.u[(i, j)] * scale;
            }
            vectors.push(v);
        }
        EmbeddingSpace::from_parts(self.vocab.clone(), vectors, k)
    }
}

/// Whether word vectors carry the singular-value scaling (`us`, the default)
/// or are bare left singular vectors (`u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdScaling {
    #[default]
    UTimesSigma,
    UOnly,
}

impl FromStr for SvdScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "us" => Ok(SvdScaling::UTimesSigma),
            "u" => Ok(SvdScaling::UOnly),
            other => Err(Error::Invalid(format!(
                "unknown svd scaling '{other}' (expected 'us' or 'u')"
            ))),
        }
    }
}

impl std::fmt::Display for SvdScaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SvdScaling::UTimesSigma => write!(f, "us"),
            SvdScaling::UOnly => write!(f, "u"),
        }
    }
}

/// Rank-K factors with singular values in non-increasing order and
/// canonicalized signs.
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

/// Computes the leading K singular triplets of `m`.
///
/// Singular values are sorted non-increasing. Values below the numerical
/// rank tolerance are zeroed (with a warning), along with their singular
/// vectors, so rank-deficient inputs yield exactly-zero trailing dimensions.
/// Each left singular vector is flipped so its largest-magnitude entry is
/// positive, making the factorization reproducible.
pub fn truncated_svd(m: &DMatrix<f64>, k: usize) -> Result<TruncatedSvd> {
    let max_k = m.nrows().min(m.ncols());
    if k == 0 || k > max_k {
        return Err(Error::DimensionTooLarge { k, max: max_k });
    }
    let svd = m.clone().svd(true, true);
    let u_full = svd.u.expect("u requested");
    let v_t_full = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));

    let sigma_max = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let tol = sigma_max * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;

    let mut u = DMatrix::zeros(m.nrows(), k);
    let mut v_t = DMatrix::zeros(k, m.ncols());
    let mut singular_values = DVector::zeros(k);
    let mut padded = 0usize;
    for (dst, &src) in order.iter().take(k).enumerate() {
        if sv[src] <= tol {
            padded += 1;
            continue; // leave this dimension zero
        }
        singular_values[dst] = sv[src];
        for r in 0..m.nrows() {
            u[(r, dst)] = u_full[(r, src)];
        }
        for c in 0..m.ncols() {
            v_t[(dst, c)] = v_t_full[(src, c)];
        }
        // Sign canonicalization: largest-magnitude entry of u positive.
        let mut pivot = 0;
        for r in 1..m.nrows() {
            if u[(r, dst)].abs() > u[(pivot, dst)].abs() {
                pivot = r;
            }
        }
        if u[(pivot, dst)] < 0.0 {
            for r in 0..m.nrows() {
                u[(r, dst)] = -u[(r, dst)];
            }
            for c in 0..m.ncols() {
                v_t[(dst, c)] = -v_t[(dst, c)];
            }
        }
    }
    if padded > 0 {
        log::warn!("requested K={k} exceeds numerical rank; padded {padded} dimension(s) with zeros");
    }
    Ok(TruncatedSvd {
        u,
        singular_values,
        v_t,
    })
}

/// Vocabulary plus a K-dimensional vector per word. Immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    dim: usize,
    vocab: Vocabulary,
    vectors: Vec<DVector<f64>>,
}

impl EmbeddingSpace {
    pub fn from_parts(vocab: Vocabulary, vectors: Vec<DVector<f64>>, dim: usize) -> Result<Self> {
        if vectors.len() != vocab.len() {
            return Err(Error::Invalid(format!(
                "{} vectors for {} words",
                vectors.len(),
                vocab.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Invalid(format!(
                    "vector for '{}' has {} entries, expected {dim}",
                    vocab.word(i),
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "vector for '{}' contains non-finite values",
                    vocab.word(i)
                )));
            }
        }
        Ok(EmbeddingSpace { dim, vocab, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// The stored vector for `word`.
    pub fn vector_of(&self, word: &str) -> Result<&DVector<f64>> {
        self.vocab
            .index_of(word)
            .map(|i| &self.vectors[i])
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains(word)
    }

    /// Writes `K <dim> <vocab_size>` then one `<word> <v1> ... <vK>` line per
    /// word at full float precision, plus a `<path>.vocab` sidecar with
    /// corpus frequencies. Lines starting with `#` are ignored on read.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "K {} {}", self.dim, self.vocab.len())?;
        for (i, v) in self.vectors.iter().enumerate() {
            write!(out, "{}", self.vocab.word(i))?;
            for x in v.iter() {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;

        let sidecar = sidecar_path(path);
        let mut out = BufWriter::new(File::create(sidecar)?);
        for (i, w) in self.vocab.words().enumerate() {
            writeln!(out, "{w}\t{}", self.vocab.freqs[i])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let file = BufReader::new(File::open(path)?);
        let mut lines = file.lines().enumerate();
        let (dim, size) = loop {
            let Some((ln, line)) = lines.next() else {
                return Err(Error::parse(path, 1, "missing header"));
            };
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "K" {
                return Err(Error::parse(path, ln + 1, "expected header 'K <dim> <vocab_size>'"));
            }
            let dim: usize = parts[1]
                .parse()
                .map_err(|_| Error::parse(path, ln + 1, "bad dimension"))?;
            let size: usize = parts[2]
                .parse()
                .map_err(|_| Error::parse(path, ln + 1, "bad vocabulary size"))?;
            break (dim, size);
        };

        let mut words = Vec::with_capacity(size);
        let mut vectors = Vec::with_capacity(size);
        for (ln, line) in lines {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts
                .next()
                .ok_or_else(|| Error::parse(path, ln + 1, "empty row"))?
                .to_string();
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| Error::parse(path, ln + 1, format!("bad float '{p}'")))
                })
                .collect::<Result<_>>()?;
            if values.len() != dim {
                return Err(Error::parse(
                    path,
                    ln + 1,
                    format!("expected {dim} values, found {}", values.len()),
                ));
            }
            words.push(word);
            vectors.push(DVector::from_vec(values));
        }
        if words.len() != size {
            return Err(Error::parse(
                path,
                1,
                format!("header declares {size} words, found {}", words.len()),
            ));
        }

        // Frequencies come from the sidecar when present; otherwise default
        // to 1 (sufficient for evaluation, not for training-data generation).
        let sidecar = sidecar_path(path);
        let mut freqs: HashMap<String, u64> = HashMap::new();
        if sidecar.exists() {
            let file = BufReader::new(File::open(&sidecar)?);
            for (ln, line) in file.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut parts = line.split('\t');
                let (Some(w), Some(f)) = (parts.next(), parts.next()) else {
                    return Err(Error::parse(&sidecar, ln + 1, "expected '<word>\\t<freq>'"));
                };
                let f: u64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(&sidecar, ln + 1, "bad frequency"))?;
                freqs.insert(w.to_string(), f);
            }
        } else {
            log::warn!(
                "no vocabulary sidecar at {}; frequencies default to 1",
                sidecar.display()
            );
        }

        let entries = words
            .into_iter()
            .map(|w| {
                let f = freqs.get(&w).copied().unwrap_or(1);
                (w, f)
            })
            .collect();
        EmbeddingSpace::from_parts(Vocabulary::new(entries)?, vectors, dim)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".vocab");
    std::path::PathBuf::from(s)
}

/// Reads a corpus file: one sentence per line, whitespace-tokenized.
pub fn load_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = BufReader::new(File::open(path)?);
    let mut sentences = Vec::new();
    for line in file.lines() {
        let line = line?;
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if !tokens.is_empty() {
            sentences.push(tokens);
        }
    }
    Ok(sentences)
}
