//! Balanced b-adic digit expansions.
//!
//! A digit stream over a D-sequence `b` is an integer sequence
//! `(d_n)_{n>=1}` with `|d_n| <= b_n / (2 b_{n-1})`, representing
//! `x = sum d_n / b_n`. Rationals in (-1/2, 1/2] are expanded by a
//! nearest-integer remainder recurrence; synthetic streams (all ones,
//! all zeros, seeded random) provide inputs that no finite rational
//! realizes. The `e_j`/`eps_j` split of `b_j x` into a two-digit head
//! and a rigorously enclosed tail drives the witness construction.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dseq::{DSeq, DseqError};
use crate::exact::{reduce_mod_z, Interval, Rational};

/// Exact tail digits summed before falling back to the enclosure radius,
/// counted beyond index j+2. Overridable per call; the witness search
/// doubles it on demand.
pub const DEFAULT_TAIL_DEPTH: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum ExpandError {
    #[error("x = {0} is outside the expansion domain (-1/2, 1/2]")]
    OutOfDomain(Rational),
    #[error("digit d_{0} violates the balanced bound")]
    DigitBound(usize),
    #[error(transparent)]
    Base(#[from] DseqError),
    #[error("invalid stream spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
}

enum Kind {
    /// Digits of a rational via the remainder recurrence; `remainders[n]`
    /// is r_n with r_0 = x (so it is one longer than `digits`).
    FromRational { x: Rational },
    Ones,
    Zeros,
    SeededRandom,
    /// User-supplied finite digit list, zero tail.
    Explicit,
}

struct State {
    /// digits[i] = d_{i+1}
    digits: Vec<BigInt>,
    /// FromRational only: current remainder r_n after the last digit.
    remainder: Option<Rational>,
    /// FromRational only: first index after which every digit is zero.
    terminated_after: Option<usize>,
    rng: Option<ChaCha8Rng>,
}

/// A (possibly lazy) balanced digit sequence over a D-sequence base.
///
/// Materialized digits grow monotonically behind a mutex; all reads of
/// already-produced digits are pure.
pub struct DigitStream {
    base: DSeq,
    kind: Kind,
    spec: String,
    state: Mutex<State>,
}

impl DigitStream {
    /// Expands `x in (-1/2, 1/2]` by the remainder recurrence
    /// `r_0 = x; d_n = round(b_n r_{n-1})` (ties toward zero);
    /// `r_n = r_{n-1} - d_n / b_n`. Guarantees `|r_n| <= 1/(2 b_n)` and
    /// the balanced digit bound at every index.
    pub fn expand_rational(x: Rational, base: DSeq) -> Result<Self, ExpandError> {
        let half = Rational::of(1, 2);
        if x <= -&half || x > half {
            return Err(ExpandError::OutOfDomain(x));
        }
        let spec = format!("rational:{x}");
        Ok(DigitStream {
            base,
            state: Mutex::new(State {
                digits: Vec::new(),
                remainder: Some(x.clone()),
                terminated_after: if x.is_zero() { Some(0) } else { None },
                rng: None,
            }),
            kind: Kind::FromRational { x },
            spec,
        })
    }

    /// Canonicalizes an arbitrary rational mod ℤ first, then expands.
    pub fn expand_reduced(q: &Rational, base: DSeq) -> Result<Self, ExpandError> {
        DigitStream::expand_rational(reduce_mod_z(q).rep().clone(), base)
    }

    pub fn ones(base: DSeq) -> Self {
        DigitStream::synthetic(base, Kind::Ones, "ones")
    }

    pub fn zeros(base: DSeq) -> Self {
        DigitStream::synthetic(base, Kind::Zeros, "zeros")
    }

    /// Digits drawn uniformly from {-1, 0, 1} — the range admissible over
    /// every D-sequence — with `d_n` forced to 1 whenever `n` is a power of
    /// two and the draw was 0, so infinitely many digits are nonzero.
    pub fn seeded_random(base: DSeq, seed: u64) -> Self {
        let mut s = DigitStream::synthetic(base, Kind::SeededRandom, "");
        s.spec = format!("seeded-random:{seed}");
        s.state.lock().unwrap().rng = Some(ChaCha8Rng::seed_from_u64(seed));
        s
    }

    fn synthetic(base: DSeq, kind: Kind, spec: &str) -> Self {
        DigitStream {
            base,
            kind,
            spec: spec.to_owned(),
            state: Mutex::new(State {
                digits: Vec::new(),
                remainder: None,
                terminated_after: None,
                rng: None,
            }),
        }
    }

    /// User-supplied digits (zero tail). Admission is the caller's job via
    /// `first_bound_violation`.
    pub fn from_digits(base: DSeq, digits: Vec<BigInt>) -> Self {
        let spec = format!(
            "explicit:{}",
            digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let n = digits.len();
        DigitStream {
            base,
            kind: Kind::Explicit,
            spec,
            state: Mutex::new(State {
                digits,
                remainder: None,
                terminated_after: Some(n),
                rng: None,
            }),
        }
    }

    /// Parses the CLI stream mini-language: `rational:p/q`, `ones`,
    /// `zeros`, `seeded-random:<seed>`, `explicit:d1,d2,...`.
    pub fn parse_spec(spec: &str, base: DSeq) -> Result<Self, ExpandError> {
        let bad = |reason: &str| ExpandError::BadSpec {
            spec: spec.to_owned(),
            reason: reason.to_owned(),
        };
        match spec {
            "ones" => return Ok(DigitStream::ones(base)),
            "zeros" => return Ok(DigitStream::zeros(base)),
            _ => {}
        }
        if let Some(x) = spec.strip_prefix("rational:") {
            let x: Rational = x.parse().map_err(|_| bad("bad rational"))?;
            return DigitStream::expand_reduced(&x, base);
        }
        if let Some(seed) = spec.strip_prefix("seeded-random:") {
            let seed: u64 = seed.parse().map_err(|_| bad("seed must be a u64"))?;
            return Ok(DigitStream::seeded_random(base, seed));
        }
        if let Some(list) = spec.strip_prefix("explicit:") {
            let digits = list
                .split(',')
                .map(|p| BigInt::from_str(p.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("bad explicit digit"))?;
            return Ok(DigitStream::from_digits(base, digits));
        }
        Err(bad(
            "expected rational:p/q, ones, zeros, seeded-random:<seed>, or explicit:...",
        ))
    }

    pub fn base(&self) -> &DSeq {
        &self.base
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    /// The expanded rational, when this stream came from one.
    pub fn source_rational(&self) -> Option<&Rational> {
        match &self.kind {
            Kind::FromRational { x } => Some(x),
            _ => None,
        }
    }

    /// `Some(N)` when every digit past index N is known to be zero.
    pub fn terminated_after(&self) -> Option<usize> {
        match &self.kind {
            Kind::Zeros => Some(0),
            _ => self.state.lock().unwrap().terminated_after,
        }
    }

    /// Materializes `d_n` (n >= 1).
    pub fn digit(&self, n: usize) -> Result<BigInt, ExpandError> {
        assert!(n >= 1, "digits are indexed from 1");
        let mut state = self.state.lock().unwrap();
        while state.digits.len() < n {
            let k = state.digits.len() + 1; // index of the digit being produced
            let d = match &self.kind {
                Kind::Zeros | Kind::Explicit => BigInt::zero(),
                Kind::Ones => BigInt::from(1),
                Kind::SeededRandom => {
                    let rng = state.rng.as_mut().unwrap();
                    let mut d = BigInt::from(rng.gen_range(-1i64..=1));
                    if d.is_zero() && k.is_power_of_two() {
                        d = BigInt::from(1);
                    }
                    d
                }
                Kind::FromRational { .. } => {
                    let r_prev = state.remainder.clone().unwrap();
                    let b_k = Rational::from_int(self.base.term(k)?);
                    let d = (&b_k * &r_prev).round_half_toward_zero();
                    let r = r_prev - Rational::from_int(d.clone()) / b_k;
                    if r.is_zero() && state.terminated_after.is_none() {
                        state.terminated_after = Some(k);
                    }
                    state.remainder = Some(r);
                    d
                }
            };
            state.digits.push(d);
        }
        Ok(state.digits[n - 1].clone())
    }

    /// Partial sum `sum_{n<=upto} d_n / b_n`.
    pub fn partial_sum(&self, upto: usize) -> Result<Rational, ExpandError> {
        let mut acc = Rational::zero();
        for n in 1..=upto {
            acc = acc + Rational::new(self.digit(n)?, self.base.term(n)?);
        }
        Ok(acc)
    }

    /// First index `n <= upto` where `|d_n| > b_n / (2 b_{n-1})`, if any.
    /// `None` means the stream is admissible on the checked window.
    pub fn first_bound_violation(&self, upto: usize) -> Result<Option<usize>, ExpandError> {
        for n in 1..=upto {
            let d = Rational::from_int(self.digit(n)?);
            let bound = Rational::new(self.base.term(n)?, self.base.term(n - 1)? * 2);
            if d.abs() > bound {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Splits `b_j x` mod ℤ into the exact two-digit head
    /// `e_j = b_j (d_{j+1}/b_{j+1} + d_{j+2}/b_{j+2})` and an enclosure of
    /// the tail `eps_j = b_j sum_{n>=j+3} d_n/b_n`.
    ///
    /// The enclosure sums digits exactly for `j+3 <= n <= j+2+extra_depth`
    /// and adds the symmetric tail radius `b_j / b_{j+2+extra_depth}`,
    /// which dominates the discarded tail by the balanced digit bound and
    /// the geometric tail-sum estimate. Known-terminated streams get a
    /// zero-radius tail once past their last nonzero digit.
    pub fn decompose(
        &self,
        j: usize,
        extra_depth: usize,
    ) -> Result<EjEpsDecomposition, ExpandError> {
        let b_j = self.base.term(j)?;
        let head = |off: usize| -> Result<Rational, ExpandError> {
            Ok(Rational::new(
                &b_j * self.digit(j + off)?,
                self.base.term(j + off)?,
            ))
        };
        let e_j = head(1)? + head(2)?;

        let end = j + 2 + extra_depth;
        let mut partial = Rational::zero();
        for n in j + 3..=end {
            partial = partial + Rational::new(&b_j * self.digit(n)?, self.base.term(n)?);
        }
        let tail = match self.terminated_after() {
            Some(last) if last <= end => Interval::zero(),
            _ => Interval::symmetric(Rational::new(b_j, self.base.term(end)?)),
        };
        let eps_enclosure = Interval::point(partial).add(&tail);
        Ok(EjEpsDecomposition {
            j,
            e_j,
            eps_enclosure,
            depth_used: extra_depth,
        })
    }

    /// Checks the three head/tail estimates at index `j`:
    /// (1) `|e_j| <= 3/4`; (2) `|e_j| >= b_j/(2 b_{j+1})` when
    /// `d_{j+1} != 0`; (3) `|eps_j| <= b_j / b_{j+2}` via the enclosure
    /// upper bound.
    pub fn head_tail_estimates(&self, j: usize) -> Result<HeadTailReport, ExpandError> {
        let dec = self.decompose(j, DEFAULT_TAIL_DEPTH)?;
        let abs_e = dec.e_j.abs();
        let head_bound = Rational::of(3, 4);
        let lower = Rational::new(self.base.term(j)?, self.base.term(j + 1)? * 2);
        let d_next_nonzero = !self.digit(j + 1)?.is_zero();
        let eps_bound = Rational::new(self.base.term(j)?, self.base.term(j + 2)?);
        let eps_abs = dec.eps_enclosure.abs_bound();
        Ok(HeadTailReport {
            j,
            e_j: dec.e_j.clone(),
            head_ok: abs_e <= head_bound,
            lower_bound: if d_next_nonzero {
                Some(LowerBoundClause {
                    bound: lower.clone(),
                    ok: abs_e >= lower,
                })
            } else {
                None
            },
            eps_abs_bound: eps_abs.clone(),
            tail_ok: eps_abs <= eps_bound,
            tail_bound: eps_bound,
        })
    }
}

impl fmt::Debug for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitStream({} over {})", self.spec, self.base.spec())
    }
}

/// Exact head `e_j` with a rigorous enclosure of the infinite tail `eps_j`.
#[derive(Debug, Clone)]
pub struct EjEpsDecomposition {
    pub j: usize,
    pub e_j: Rational,
    pub eps_enclosure: Interval,
    pub depth_used: usize,
}

impl EjEpsDecomposition {
    /// Enclosure of `e_j + eps_j`.
    pub fn value_enclosure(&self) -> Interval {
        Interval::point(self.e_j.clone()).add(&self.eps_enclosure)
    }
}

#[derive(Debug, Clone)]
pub struct LowerBoundClause {
    pub bound: Rational,
    pub ok: bool,
}

/// Per-index report on the three head/tail estimates.
#[derive(Debug, Clone)]
pub struct HeadTailReport {
    pub j: usize,
    pub e_j: Rational,
    /// `|e_j| <= 3/4`.
    pub head_ok: bool,
    /// `|e_j| >= b_j/(2 b_{j+1})`; `None` when `d_{j+1} = 0` (vacuous).
    pub lower_bound: Option<LowerBoundClause>,
    pub eps_abs_bound: Rational,
    pub tail_bound: Rational,
    /// enclosure upper bound `<= b_j / b_{j+2}`.
    pub tail_ok: bool,
}

impl HeadTailReport {
    pub fn all_ok(&self) -> bool {
        self.head_ok && self.tail_ok && self.lower_bound.as_ref().map_or(true, |c| c.ok)
    }
}
