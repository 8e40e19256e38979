//! Sentence composition: five matrix-based operators plus the additive and
//! multiplicative vector baselines, and the two similarity measures (cosine
//! for vector representations, Frobenius inner product for matrix ones).

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CompositionMethod {
    Additive,
    Multiplicative,
    CopyObject,
    CopySubject,
    FrobeniusAdditive,
    Relational,
    VerbObject,
}

impl CompositionMethod {
    pub const ALL: [CompositionMethod; 7] = [
        CompositionMethod::Additive,
        CompositionMethod::Multiplicative,
        CompositionMethod::CopyObject,
        CompositionMethod::CopySubject,
        CompositionMethod::FrobeniusAdditive,
        CompositionMethod::Relational,
        CompositionMethod::VerbObject,
    ];

    /// True for the baselines that use a distributional verb vector instead
    /// of a learned verb matrix.
    pub fn uses_verb_vector(self) -> bool {
        matches!(self, CompositionMethod::Additive | CompositionMethod::Multiplicative)
    }
}

impl FromStr for CompositionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add" => Ok(CompositionMethod::Additive),
            "mult" => Ok(CompositionMethod::Multiplicative),
            "co" => Ok(CompositionMethod::CopyObject),
            "cs" => Ok(CompositionMethod::CopySubject),
            "f+" => Ok(CompositionMethod::FrobeniusAdditive),
            "re" => Ok(CompositionMethod::Relational),
            "vo" => Ok(CompositionMethod::VerbObject),
            other => Err(Error::Invalid(format!(
                "unknown composition method '{other}' (expected add, mult, co, cs, f+, re, or vo)"
            ))),
        }
    }
}

impl std::fmt::Display for CompositionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let key = match self {
            CompositionMethod::Additive => "add",
            CompositionMethod::Multiplicative => "mult",
            CompositionMethod::CopyObject => "co",
            CompositionMethod::CopySubject => "cs",
            CompositionMethod::FrobeniusAdditive => "f+",
            CompositionMethod::Relational => "re",
            CompositionMethod::VerbObject => "vo",
        };
        write!(f, "{key}")
    }
}

/// A composed sentence: a K-vector for every method except the relational
/// one, which produces a K x K matrix. Carries its method tag so similarity
/// can reject cross-method comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRepr {
    pub method: CompositionMethod,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl SentenceRepr {
    pub fn vector(method: CompositionMethod, v: DVector<f64>) -> Self {
        SentenceRepr {
            method,
            payload: Payload::Vector(v),
        }
    }

    pub fn matrix(method: CompositionMethod, m: DMatrix<f64>) -> Self {
        SentenceRepr {
            method,
            payload: Payload::Matrix(m),
        }
    }
}

/// `(s^T V) elementwise o`: the object is copied through the verb's row
/// response to the subject.
pub fn copy_object(v: &DMatrix<f64>, s: &DVector<f64>, o: &DVector<f64>) -> DVector<f64> {
    let sv = v.tr_mul(s); // (s^T V)^T
    sv.component_mul(o)
}

/// `s elementwise (V o)`.
pub fn copy_subject(v: &DMatrix<f64>, s: &DVector<f64>, o: &DVector<f64>) -> DVector<f64> {
    s.component_mul(&(v * o))
}

/// Sum of the copy-object and copy-subject vectors.
pub fn frobenius_additive(v: &DMatrix<f64>, s: &DVector<f64>, o: &DVector<f64>) -> DVector<f64> {
    copy_object(v, s, o) + copy_subject(v, s, o)
}

/// The outer product `s (x) o`, elementwise with V: sentence as matrix.
pub fn relational(v: &DMatrix<f64>, s: &DVector<f64>, o: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| s[i] * o[j] * v[(i, j)])
}

/// `V o`: the verb phrase alone approximates the sentence.
pub fn verb_object(v: &DMatrix<f64>, o: &DVector<f64>) -> DVector<f64> {
    v * o
}

/// `s + v + o`, argument-order invariant.
pub fn additive(s: &DVector<f64>, v: &DVector<f64>, o: &DVector<f64>) -> DVector<f64> {
    s + v + o
}

/// `s elementwise v elementwise o`, argument-order invariant.
pub fn multiplicative(s: &DVector<f64>, v: &DVector<f64>, o: &DVector<f64>) -> DVector<f64> {
    s.component_mul(v).component_mul(o)
}

/// Dispatches on the method key. Matrix methods take the verb matrix, the
/// add/mult baselines take the verb's distributional vector.
pub fn compose(
    method: CompositionMethod,
    verb_matrix: Option<&DMatrix<f64>>,
    verb_vector: Option<&DVector<f64>>,
    s: &DVector<f64>,
    o: &DVector<f64>,
) -> Result<SentenceRepr> {
    let need_matrix = || {
        verb_matrix.ok_or_else(|| Error::Invalid(format!("method '{method}' needs a verb matrix")))
    };
    let repr = match method {
        CompositionMethod::Additive => {
            let v = verb_vector
                .ok_or_else(|| Error::Invalid("method 'add' needs a verb vector".into()))?;
            SentenceRepr::vector(method, additive(s, v, o))
        }
        CompositionMethod::Multiplicative => {
            let v = verb_vector
                .ok_or_else(|| Error::Invalid("method 'mult' needs a verb vector".into()))?;
            SentenceRepr::vector(method, multiplicative(s, v, o))
        }
        CompositionMethod::CopyObject => SentenceRepr::vector(method, copy_object(need_matrix()?, s, o)),
        CompositionMethod::CopySubject => {
            SentenceRepr::vector(method, copy_subject(need_matrix()?, s, o))
        }
        CompositionMethod::FrobeniusAdditive => {
            SentenceRepr::vector(method, frobenius_additive(need_matrix()?, s, o))
        }
        CompositionMethod::Relational => {
            SentenceRepr::matrix(method, relational(need_matrix()?, s, o))
        }
        CompositionMethod::VerbObject => SentenceRepr::vector(method, verb_object(need_matrix()?, o)),
    };
    Ok(repr)
}

/// Cosine similarity; a zero vector on either side yields 0 with a warning
/// rather than an error, so degenerate compositions still score.
pub fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        log::warn!("cosine of a zero vector defined as 0");
        return 0.0;
    }
    a.dot(b) / denom
}

/// Frobenius inner product `sum_ij A_ij B_ij`, deliberately unnormalised.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Similarity of two composed sentences: cosine for vector representations,
/// Frobenius inner product for matrix ones. Comparing different methods or
/// kinds is an error.
pub fn similarity(a: &SentenceRepr, b: &SentenceRepr) -> Result<f64> {
    similarity_with(a, b, false)
}

/// As [`similarity`], optionally normalising the matrix inner product to a
/// matrix cosine (an analysis option, never the default).
pub fn similarity_with(a: &SentenceRepr, b: &SentenceRepr, matrix_cosine: bool) -> Result<f64> {
    if a.method != b.method {
        return Err(Error::ReprMismatch(format!(
            "method '{}' vs '{}'",
            a.method, b.method
        )));
    }
    match (&a.payload, &b.payload) {
        (Payload::Vector(x), Payload::Vector(y)) => Ok(cosine(x, y)),
        (Payload::Matrix(x), Payload::Matrix(y)) => {
            if matrix_cosine {
                let denom = x.norm() * y.norm();
                if denom == 0.0 {
                    log::warn!("matrix cosine of a zero matrix defined as 0");
                    return Ok(0.0);
                }
                Ok(frobenius_inner(x, y) / denom)
            } else {
                Ok(frobenius_inner(x, y))
            }
        }
        _ => Err(Error::ReprMismatch("vector vs matrix payload".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    fn sample_v(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
        DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0))
    }

    fn sample_m(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn copy_object_with_identity_is_elementwise_product() {
        let v = DMatrix::identity(2, 2);
        let got = copy_object(&v, &vec2(2.0, 3.0), &vec2(5.0, 7.0));
        assert_eq!(got, vec2(10.0, 21.0));
    }

    #[test]
    fn copy_object_by_hand() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let got = copy_object(&v, &vec2(1.0, 1.0), &vec2(1.0, 0.0));
        assert_eq!(got, vec2(4.0, 0.0));
    }

    #[test]
    fn copy_object_annihilated_by_zero_object() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(copy_object(&v, &vec2(1.0, 1.0), &vec2(0.0, 0.0)), vec2(0.0, 0.0));
    }

    #[test]
    fn copy_subject_by_hand() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let got = copy_subject(&v, &vec2(1.0, 0.0), &vec2(1.0, 1.0));
        assert_eq!(got, vec2(3.0, 0.0));
    }

    #[test]
    fn copy_transpose_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v = sample_m(&mut rng, 4);
            let s = sample_v(&mut rng, 4);
            let o = sample_v(&mut rng, 4);
            let a = copy_object(&v, &s, &o);
            let b = copy_subject(&v.transpose(), &o, &s);
            assert!((a - b).abs().max() < 1e-12);
        }
    }

    #[test]
    fn frobenius_additive_by_hand() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = vec2(1.0, 1.0);
        let o = vec2(1.0, 1.0);
        assert_eq!(copy_object(&v, &s, &o), vec2(4.0, 6.0));
        assert_eq!(copy_subject(&v, &s, &o), vec2(3.0, 7.0));
        assert_eq!(frobenius_additive(&v, &s, &o), vec2(7.0, 13.0));
    }

    #[test]
    fn frobenius_additive_is_the_sum_of_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = sample_m(&mut rng, 5);
            let s = sample_v(&mut rng, 5);
            let o = sample_v(&mut rng, 5);
            let f = frobenius_additive(&v, &s, &o);
            let sum = copy_object(&v, &s, &o) + copy_subject(&v, &s, &o);
            assert_eq!(f, sum);
        }
    }

    #[test]
    fn relational_with_ones_is_the_outer_product() {
        let v = DMatrix::from_element(2, 2, 1.0);
        let got = relational(&v, &vec2(1.0, 2.0), &vec2(3.0, 4.0));
        assert_eq!(got, DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn relational_by_hand() {
        let v = DMatrix::identity(2, 2);
        let got = relational(&v, &vec2(1.0, 2.0), &vec2(3.0, 4.0));
        assert_eq!(got, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 8.0]));
    }

    #[test]
    fn relational_vanishes_on_zero_arguments() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            relational(&v, &vec2(0.0, 0.0), &vec2(3.0, 4.0)),
            DMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn verb_object_by_hand() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(verb_object(&v, &vec2(1.0, 1.0)), vec2(3.0, 7.0));
        assert_eq!(verb_object(&DMatrix::identity(2, 2), &vec2(5.0, 6.0)), vec2(5.0, 6.0));
    }

    #[test]
    fn verb_object_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let v = sample_m(&mut rng, 3);
            let o1 = sample_v(&mut rng, 3);
            let o2 = sample_v(&mut rng, 3);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = verb_object(&v, &(a * &o1 + b * &o2));
            let rhs = a * verb_object(&v, &o1) + b * verb_object(&v, &o2);
            assert!((lhs - rhs).abs().max() < 1e-12);
        }
    }

    #[test]
    fn baselines_are_order_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = sample_v(&mut rng, 4);
            let v = sample_v(&mut rng, 4);
            let o = sample_v(&mut rng, 4);
            let perms: [(&DVector<f64>, &DVector<f64>, &DVector<f64>); 6] = [
                (&s, &v, &o),
                (&s, &o, &v),
                (&v, &s, &o),
                (&v, &o, &s),
                (&o, &s, &v),
                (&o, &v, &s),
            ];
            let add0 = additive(&s, &v, &o);
            let mult0 = multiplicative(&s, &v, &o);
            for (a, b, c) in perms {
                assert!((additive(a, b, c) - &add0).abs().max() < 1e-12);
                assert!((multiplicative(a, b, c) - &mult0).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn additive_with_zero_others_is_the_subject() {
        let s = vec2(1.5, -2.0);
        let z = vec2(0.0, 0.0);
        assert_eq!(additive(&s, &z, &z), s);
    }

    #[test]
    fn multiplicative_with_ones_verb_is_elementwise() {
        let s = vec2(2.0, 3.0);
        let o = vec2(5.0, 7.0);
        let ones = vec2(1.0, 1.0);
        assert_eq!(multiplicative(&s, &ones, &o), vec2(10.0, 21.0));
    }

    #[test]
    fn matrix_methods_are_order_sensitive() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = vec2(1.0, 0.0);
        let o = vec2(0.0, 1.0);
        assert_ne!(copy_object(&v, &s, &o), copy_object(&v, &o, &s));
        assert_ne!(copy_subject(&v, &s, &o), copy_subject(&v, &o, &s));
        assert_ne!(frobenius_additive(&v, &s, &o), frobenius_additive(&v, &o, &s));
        assert_ne!(relational(&v, &s, &o), relational(&v, &o, &s));
        assert_ne!(verb_object(&v, &o), verb_object(&v, &s));
    }

    #[test]
    fn similarity_of_identical_vectors_is_one() {
        let a = SentenceRepr::vector(CompositionMethod::Additive, vec2(1.0, 2.0));
        assert_relative_eq!(similarity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn similarity_of_orthogonal_vectors_is_zero() {
        let a = SentenceRepr::vector(CompositionMethod::CopyObject, vec2(1.0, 0.0));
        let b = SentenceRepr::vector(CompositionMethod::CopyObject, vec2(0.0, 1.0));
        assert_eq!(similarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn relational_similarity_is_the_frobenius_inner_product() {
        let a = SentenceRepr::matrix(CompositionMethod::Relational, DMatrix::identity(2, 2));
        let b = SentenceRepr::matrix(
            CompositionMethod::Relational,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]),
        );
        assert_eq!(similarity(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn zero_vector_similarity_is_zero() {
        let a = SentenceRepr::vector(CompositionMethod::Multiplicative, vec2(0.0, 0.0));
        let b = SentenceRepr::vector(CompositionMethod::Multiplicative, vec2(1.0, 1.0));
        assert_eq!(similarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cross_method_similarity_is_rejected() {
        let a = SentenceRepr::vector(CompositionMethod::CopyObject, vec2(1.0, 0.0));
        let b = SentenceRepr::vector(CompositionMethod::CopySubject, vec2(1.0, 0.0));
        assert!(similarity(&a, &b).is_err());
    }

    #[test]
    fn cosine_is_scale_invariant_frobenius_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let x = sample_v(&mut rng, 4);
            let y = sample_v(&mut rng, 4);
            let c = rng.random_range(0.1..10.0);
            assert_relative_eq!(cosine(&(c * &x), &y), cosine(&x, &y), epsilon = 1e-12);
            let a = sample_m(&mut rng, 3);
            let b = sample_m(&mut rng, 3);
            assert_relative_eq!(
                frobenius_inner(&(c * &a), &b),
                c * frobenius_inner(&a, &b),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn normalized_matrix_similarity_is_available() {
        let a = SentenceRepr::matrix(CompositionMethod::Relational, DMatrix::identity(2, 2));
        let b = SentenceRepr::matrix(CompositionMethod::Relational, 3.0 * DMatrix::identity(2, 2));
        assert_relative_eq!(similarity_with(&a, &b, true).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn method_keys_roundtrip() {
        for m in CompositionMethod::ALL {
            assert_eq!(m.to_string().parse::<CompositionMethod>().unwrap(), m);
        }
        assert!("xyz".parse::<CompositionMethod>().is_err());
    }
}
