//! D-sequences: strictly increasing divisibility chains starting at 1.
//!
//! A D-sequence `b` encodes the linear topology on ℤ whose neighborhood
//! basis at 0 is the chain of subgroups `b_n ℤ`. This module holds the
//! built-in families, prefix validation, growth and tail-sum bounds, the
//! ratio-increasing subsequence extraction, and the window certificate
//! that two D-sequences induce the same linear topology.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::Rational;

/// Built-in D-sequence families with known closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// b_n = a^n
    Geometric(u64),
    /// b_n = (n+1)!
    Factorial,
    /// b_n = a^(n^2)
    SquaredExp(u64),
    /// b_n = a^(n(n+1)/2)
    TriangularPow(u64),
}

enum Source {
    Builtin(Family),
    Explicit(Vec<BigInt>),
}

/// A D-sequence: `b_0 = 1` and each term properly divides the next.
///
/// Built-in families extend on demand; explicit prefixes error past their
/// end. The materialized prefix grows monotonically behind a mutex, so a
/// `DSeq` can be shared across threads.
pub struct DSeq {
    source: Source,
    spec: String,
    cache: Mutex<Vec<BigInt>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DseqError {
    #[error("empty prefix")]
    Empty,
    #[error("first term is {found}, must be 1")]
    FirstTermNotOne { found: BigInt },
    #[error("term at index {index} is {found}, must be positive")]
    NonPositive { index: usize, found: BigInt },
    #[error("divisibility fails at index {index}->{}: {prev} does not divide {next}", index + 1)]
    DivisibilityFails {
        index: usize,
        prev: BigInt,
        next: BigInt,
    },
    #[error("term repeats at index {index}->{}: {term} must properly divide its successor", index + 1)]
    NotProper { index: usize, term: BigInt },
    #[error("prefix exhausted: term {wanted} requested but only {len} terms available")]
    PrefixExhausted { wanted: usize, len: usize },
    #[error("family base {base} must be at least 2")]
    BadBase { base: u64 },
    #[error("invalid sequence spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("extraction needs more terms: {0}")]
    ExtractionExhausted(String),
}

impl DSeq {
    pub fn geometric(a: u64) -> Result<Self, DseqError> {
        if a < 2 {
            return Err(DseqError::BadBase { base: a });
        }
        Ok(Self::builtin(Family::Geometric(a), format!("pow:{a}")))
    }

    pub fn factorial() -> Self {
        Self::builtin(Family::Factorial, "factorial".to_owned())
    }

    pub fn squared_exp(a: u64) -> Result<Self, DseqError> {
        if a < 2 {
            return Err(DseqError::BadBase { base: a });
        }
        Ok(Self::builtin(Family::SquaredExp(a), format!("powsq:{a}")))
    }

    pub fn triangular_pow(a: u64) -> Result<Self, DseqError> {
        if a < 2 {
            return Err(DseqError::BadBase { base: a });
        }
        Ok(Self::builtin(
            Family::TriangularPow(a),
            format!("triangular-pow:{a}"),
        ))
    }

    fn builtin(family: Family, spec: String) -> Self {
        DSeq {
            source: Source::Builtin(family),
            spec,
            cache: Mutex::new(vec![BigInt::one()]),
        }
    }

    /// Validates an explicit prefix: first term 1, each term properly
    /// dividing the next. Reports the first violating index.
    pub fn from_prefix(prefix: Vec<BigInt>) -> Result<Self, DseqError> {
        validate_prefix(&prefix)?;
        let spec = format!(
            "explicit:{}",
            prefix
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(DSeq {
            source: Source::Explicit(prefix),
            spec,
            cache: Mutex::new(Vec::new()),
        })
    }

    /// The canonical spec string (`pow:2`, `factorial`, `explicit:1,2,6`, ...)
    /// that reconstructs this sequence.
    pub fn spec(&self) -> &str {
        &self.spec
    }

    /// Analytic D∞ verdict for built-in families; `None` for explicit
    /// prefixes, whose limit behavior cannot be decided from finitely
    /// many terms.
    pub fn dinfty_flag(&self) -> Option<bool> {
        match &self.source {
            Source::Builtin(Family::Geometric(_)) => Some(false),
            Source::Builtin(_) => Some(true),
            Source::Explicit(_) => None,
        }
    }

    /// Number of terms available, `None` when unbounded.
    pub fn available_len(&self) -> Option<usize> {
        match &self.source {
            Source::Builtin(_) => None,
            Source::Explicit(p) => Some(p.len()),
        }
    }

    /// Materializes `b_n`.
    pub fn term(&self, n: usize) -> Result<BigInt, DseqError> {
        match &self.source {
            Source::Explicit(p) => p.get(n).cloned().ok_or(DseqError::PrefixExhausted {
                wanted: n,
                len: p.len(),
            }),
            Source::Builtin(family) => {
                let mut cache = self.cache.lock().unwrap();
                while cache.len() <= n {
                    let k = cache.len(); // index of the term being produced
                    let prev = cache.last().unwrap();
                    let next = match family {
                        Family::Geometric(a) => prev * a,
                        Family::Factorial => prev * BigInt::from(k as u64 + 1),
                        Family::SquaredExp(a) => {
                            prev * BigInt::from(*a).pow(2 * k as u32 - 1)
                        }
                        Family::TriangularPow(a) => prev * BigInt::from(*a).pow(k as u32),
                    };
                    cache.push(next);
                }
                Ok(cache[n].clone())
            }
        }
    }

    /// The integer ratio `b_{n+1} / b_n` (always an integer >= 2).
    pub fn ratio(&self, n: usize) -> Result<BigInt, DseqError> {
        Ok(self.term(n + 1)? / self.term(n)?)
    }

    /// Checks `b_{n+k} >= 2^k b_n` for all `0 <= n <= n+k <= upto`.
    /// Holds for every validated D-sequence since each ratio is >= 2.
    pub fn growth_check(&self, upto: usize) -> Result<bool, DseqError> {
        let terms: Vec<BigInt> = (0..=upto).map(|n| self.term(n)).collect::<Result<_, _>>()?;
        for n in 0..=upto {
            for k in 0..=(upto - n) {
                if terms[n + k] < (&terms[n] << k) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Exact partial tail sum with a certified bound for the infinite tail:
    /// `partial = sum_{n=j}^{j+depth-1} 1/b_n`, `bound = 2/b_j`, and
    /// `certified` holds iff `partial + 2/b_{j+depth} <= bound`, which
    /// rigorously extends the bound to the infinite sum.
    pub fn tail_sum_bound(&self, j: usize, depth: usize) -> Result<TailSumBound, DseqError> {
        let mut partial = Rational::zero();
        for n in j..j + depth {
            partial = partial + Rational::new(BigInt::one(), self.term(n)?);
        }
        let bound = Rational::new(BigInt::from(2), self.term(j)?);
        let rest = Rational::new(BigInt::from(2), self.term(j + depth)?);
        let certified = &partial + &rest <= bound;
        Ok(TailSumBound {
            partial,
            bound,
            certified,
        })
    }

    /// Extracts the ratio-increasing subsequence `c`: `c_0 = 1`,
    /// `c_1 = b_1`, and `c_{n+1}` is the *minimal* `b_j` with
    /// `b_j / c_n > c_n / c_{n-1}`. Consecutive ratios of the result are
    /// strictly increasing.
    pub fn extract_dinfty(&self, target_len: usize) -> Result<DSeq, DseqError> {
        if target_len == 0 {
            return Err(DseqError::Empty);
        }
        let mut c: Vec<BigInt> = vec![BigInt::one()];
        let mut j = 0usize; // index into b of the last chosen term
        if target_len >= 2 {
            c.push(self.term(1).map_err(exhausted)?);
            j = 1;
        }
        while c.len() < target_len {
            let n = c.len() - 1;
            // c_{n+1} must satisfy c_{n+1} * c_{n-1} > c_n^2.
            let threshold = &c[n] * &c[n] / &c[n - 1];
            loop {
                j += 1;
                let cand = self.term(j).map_err(exhausted)?;
                if cand > threshold {
                    c.push(cand);
                    break;
                }
            }
        }
        DSeq::from_prefix(c)
    }

    /// Prefix-only D∞ diagnostics: for each `j`, the minimum ratio over
    /// the tail of the examined window. Never claims a limit.
    pub fn diagnostics(&self, prefix_len: usize) -> Result<DinftyDiagnostics, DseqError> {
        assert!(prefix_len >= 2, "need at least two terms for a ratio");
        let ratios: Vec<BigInt> = (0..prefix_len - 1)
            .map(|n| self.ratio(n))
            .collect::<Result<_, _>>()?;
        let mut min_ratio_tail = vec![BigInt::zero(); ratios.len()];
        let mut running = ratios.last().unwrap().clone();
        for (i, r) in ratios.iter().enumerate().rev() {
            if r < &running {
                running = r.clone();
            }
            min_ratio_tail[i] = running.clone();
        }
        let verdict = if min_ratio_tail.last() > min_ratio_tail.first() {
            DinftyVerdict::ConsistentWithDinfty
        } else {
            DinftyVerdict::RatioBoundedOnPrefix
        };
        Ok(DinftyDiagnostics {
            prefix_len,
            min_ratio_tail,
            verdict,
        })
    }
}

fn exhausted(e: DseqError) -> DseqError {
    DseqError::ExtractionExhausted(e.to_string())
}

fn validate_prefix(prefix: &[BigInt]) -> Result<(), DseqError> {
    let first = prefix.first().ok_or(DseqError::Empty)?;
    if !first.is_one() {
        return Err(DseqError::FirstTermNotOne {
            found: first.clone(),
        });
    }
    for (i, t) in prefix.iter().enumerate() {
        if !t.is_positive() {
            return Err(DseqError::NonPositive {
                index: i,
                found: t.clone(),
            });
        }
    }
    for i in 0..prefix.len() - 1 {
        if !(&prefix[i + 1] % &prefix[i]).is_zero() {
            return Err(DseqError::DivisibilityFails {
                index: i,
                prev: prefix[i].clone(),
                next: prefix[i + 1].clone(),
            });
        }
        if prefix[i] == prefix[i + 1] {
            return Err(DseqError::NotProper {
                index: i,
                term: prefix[i].clone(),
            });
        }
    }
    Ok(())
}

impl Clone for DSeq {
    fn clone(&self) -> Self {
        DSeq {
            source: match &self.source {
                Source::Builtin(f) => Source::Builtin(*f),
                Source::Explicit(p) => Source::Explicit(p.clone()),
            },
            spec: self.spec.clone(),
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl fmt::Debug for DSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DSeq({})", self.spec)
    }
}

impl FromStr for DSeq {
    type Err = DseqError;

    /// Parses the sequence mini-language: `pow:a`, `factorial`, `powsq:a`,
    /// `triangular-pow:a`, `file:<path>` (one integer per line), and
    /// `explicit:t0,t1,...`.
    fn from_str(s: &str) -> Result<Self, DseqError> {
        let bad = |reason: &str| DseqError::BadSpec {
            spec: s.to_owned(),
            reason: reason.to_owned(),
        };
        if s == "factorial" {
            return Ok(DSeq::factorial());
        }
        if let Some(a) = s.strip_prefix("pow:") {
            return DSeq::geometric(a.parse().map_err(|_| bad("base must be an integer"))?);
        }
        if let Some(a) = s.strip_prefix("powsq:") {
            return DSeq::squared_exp(a.parse().map_err(|_| bad("base must be an integer"))?);
        }
        if let Some(a) = s.strip_prefix("triangular-pow:") {
            return DSeq::triangular_pow(a.parse().map_err(|_| bad("base must be an integer"))?);
        }
        if let Some(path) = s.strip_prefix("file:") {
            let text = fs::read_to_string(Path::new(path))
                .map_err(|e| bad(&format!("cannot read file: {e}")))?;
            let mut terms = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let t = BigInt::from_str(line)
                    .map_err(|_| bad(&format!("line {}: not an integer", lineno + 1)))?;
                terms.push(t);
            }
            return DSeq::from_prefix(terms);
        }
        if let Some(list) = s.strip_prefix("explicit:") {
            let mut terms = Vec::new();
            for part in list.split(',') {
                let t = BigInt::from_str(part.trim()).map_err(|_| bad("bad explicit term"))?;
                terms.push(t);
            }
            return DSeq::from_prefix(terms);
        }
        Err(bad(
            "expected pow:a, factorial, powsq:a, triangular-pow:a, file:<path>, or explicit:...",
        ))
    }
}

#[derive(Debug, Clone)]
pub struct TailSumBound {
    pub partial: Rational,
    pub bound: Rational,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DinftyVerdict {
    ConsistentWithDinfty,
    RatioBoundedOnPrefix,
}

/// Prefix facts about consecutive ratios; never a limit claim.
#[derive(Debug, Clone)]
pub struct DinftyDiagnostics {
    pub prefix_len: usize,
    /// `min_ratio_tail[j]` = min of `b_{i+1}/b_i` over `j <= i < prefix_len-1`.
    pub min_ratio_tail: Vec<BigInt>,
    pub verdict: DinftyVerdict,
}

/// Window certificate that two D-sequences generate the same linear
/// topology: `c` is verified to be a value-subset of `b`'s prefix, and each
/// `b_n` in the window divides some `c_m`, witnessing mutual refinement of
/// the subgroup bases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SameTopologyCertificate {
    pub window: usize,
    /// For each `n <= window`: the partner index `m` with `b_n | c_m`.
    pub refinement: Vec<DividesPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DividesPair {
    pub b_index: usize,
    pub b_value: String,
    pub c_index: usize,
    pub c_value: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SameTopologyError {
    #[error("c_{index} = {value} does not occur in b's examined prefix")]
    SubsetFails { index: usize, value: BigInt },
    #[error("undecided at depth: no c_m in the window is divisible by b_{n}")]
    UndecidedAtDepth { n: usize },
    #[error(transparent)]
    Dseq(#[from] DseqError),
}

/// Certifies `lambda_b = lambda_c` on the examined window `0..=window`.
///
/// Precondition checked here: every `c_m` (m <= window) occurs among the
/// values of `b` (scanned until `b` exceeds `c_window`).
pub fn same_linear_topology(
    b: &DSeq,
    c: &DSeq,
    window: usize,
) -> Result<SameTopologyCertificate, SameTopologyError> {
    let c_terms: Vec<BigInt> = (0..=window).map(|m| c.term(m)).collect::<Result<_, _>>()?;
    // Subset check: b is strictly increasing, so scan until past c_window.
    let mut b_terms: Vec<BigInt> = Vec::new();
    let mut n = 0usize;
    loop {
        match b.term(n) {
            Ok(t) => {
                let done = t > c_terms[window];
                b_terms.push(t);
                if done {
                    break;
                }
            }
            Err(DseqError::PrefixExhausted { .. }) => break,
            Err(e) => return Err(e.into()),
        }
        n += 1;
    }
    for (m, cv) in c_terms.iter().enumerate() {
        if !b_terms.contains(cv) {
            return Err(SameTopologyError::SubsetFails {
                index: m,
                value: cv.clone(),
            });
        }
    }
    let mut refinement = Vec::new();
    for (n, bv) in b_terms.iter().take(window + 1).enumerate() {
        let partner = c_terms
            .iter()
            .enumerate()
            .find(|(_, cv)| (*cv % bv).is_zero());
        match partner {
            Some((m, cv)) => refinement.push(DividesPair {
                b_index: n,
                b_value: bv.to_string(),
                c_index: m,
                c_value: cv.to_string(),
            }),
            None => return Err(SameTopologyError::UndecidedAtDepth { n }),
        }
    }
    Ok(SameTopologyCertificate { window, refinement })
}
