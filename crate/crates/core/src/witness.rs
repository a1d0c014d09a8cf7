//! Constructive witness that a digit-stream character with infinitely
//! many nonzero digits is discontinuous for the uniform-convergence
//! topology: an integer `k` inside the neighborhood `V_{b,m}` whose image
//! under the character provably leaves the quarter arc.
//!
//! The construction scans indices j where the head `e_j` is small
//! (|e_j| < 1/(96m)), the digit `d_{j+1}` is nonzero, and the base ratios
//! at j and j+1 are past 1/6. At each selected index the coefficient
//! `k_j = floor(1/(16m|e_j|)) * sign(e_j)` pushes the contribution
//! `k_j (e_j + eps_j)` into the band (1/(32m), 1/(12m)); summing exactly
//! 8m of these lands the total in (1/4, 3/4) mod 1, while the coefficient
//! bound `|k_j b_j / b_{j+1}| <= 1/(8m)` keeps `k = sum k_j b_j` inside
//! `V_{b,m}`. Every field of the emitted certificate re-verifies through
//! code paths independent of the construction.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dseq::{DSeq, DseqError};
use crate::exact::{Interval, Rational};
use crate::expand::{DigitStream, ExpandError, DEFAULT_TAIL_DEPTH};
use crate::topo::{in_v, TopoError, VMembership};

/// Hard cap on extra tail digits summed exactly while tightening a
/// contribution enclosure.
pub const TAIL_DEPTH_CAP: usize = 64;

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum WitnessError {
    #[error("coefficient bound violated at j = {j}: |k_j| = {kj} > (1/(8m)) b_{}/b_{j}", j + 1)]
    CoefficientBound { j: usize, kj: BigInt },
    #[error(
        "digits exhausted: every digit past index {last_nonzero_before} is zero, \
         only {collected} of {needed} indices qualify — the character is of finite type \
         and admits no witness"
    )]
    DigitsExhausted {
        last_nonzero_before: usize,
        collected: usize,
        needed: usize,
    },
    #[error(
        "budget {budget} exhausted with {collected} of {needed} qualifying indices; \
         the character may be continuous, or the budget too small"
    )]
    BudgetExhausted {
        budget: usize,
        collected: usize,
        needed: usize,
    },
    #[error("contribution enclosure at j = {j} still undecided at the tail-depth cap")]
    EnclosureUndecided { j: usize },
    #[error("digit stream inadmissible: balanced bound violated at index {0}")]
    Inadmissible(usize),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Dseq(#[from] DseqError),
    #[error(transparent)]
    Topo(#[from] TopoError),
}

/// Sums `k_j b_j` after checking each coefficient against the sufficient
/// membership bound `|k_j| <= (1/(8m)) b_{j+1}/b_j`; the result is
/// asserted to pass the independent `in_v` decision procedure.
pub fn build_member(
    b: &DSeq,
    m: u64,
    coeffs: &BTreeMap<usize, BigInt>,
) -> Result<BigInt, WitnessError> {
    let mut k = BigInt::zero();
    for (&j, k_j) in coeffs {
        let bound = Rational::new(b.term(j + 1)?, b.term(j)? * BigInt::from(8 * m));
        if Rational::from_int(k_j.abs()) > bound {
            return Err(WitnessError::CoefficientBound {
                j,
                kj: k_j.clone(),
            });
        }
        k += k_j * b.term(j)?;
    }
    let verdict = in_v(b, m, &k)?;
    assert!(
        verdict.is_member(),
        "sufficient coefficient bound disagrees with the membership oracle: {verdict:?}"
    );
    Ok(k)
}

/// Per-index record of the certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub j: usize,
    pub d_next: String,
    pub e_j: Rational,
    pub eps_enclosure: Interval,
    /// Extra tail digits summed exactly for the enclosure.
    pub depth_used: usize,
    pub k_j: String,
    /// Enclosure of `k_j (e_j + eps_j)`.
    pub contribution: Interval,
}

/// Full audit trail of a witness construction. Serializes to JSON with
/// every rational exact (`"p/q"`) and round-trips byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub schema_version: u32,
    /// Sequence spec reconstructing the base.
    pub base: String,
    pub modulus: u64,
    /// Stream spec reconstructing the character digits.
    pub stream: String,
    pub entries: Vec<WitnessEntry>,
    /// The witness integer, `sum k_j b_j`.
    pub k: String,
    /// Enclosure of `sum k_j (e_j + eps_j)`; certifies the image of `k`
    /// stays in (1/4, 3/4) mod 1, outside the quarter arc.
    pub total: Interval,
    /// Non-normative notes (e.g. base not analytically ratio-divergent).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// A failed verification clause. `Display` gives the stable clause name
/// used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    SchemaVersion,
    IndexCount,
    IndicesStrictlyIncreasing,
    DigitBound { n: usize },
    DigitValue { j: usize },
    HeadValue { j: usize },
    HeadSmall { j: usize },
    RatioPastSix { j: usize },
    TailEnclosure { j: usize },
    CoefficientFormula { j: usize },
    PerJContribution { j: usize },
    CoefficientBound { j: usize },
    WitnessSum,
    Membership,
    TotalEnclosure,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::SchemaVersion => write!(f, "schema version"),
            Clause::IndexCount => write!(f, "index count (|J| = 8m)"),
            Clause::IndicesStrictlyIncreasing => write!(f, "indices strictly increasing"),
            Clause::DigitBound { n } => write!(f, "digit bound at n = {n}"),
            Clause::DigitValue { j } => write!(f, "digit value at j = {j}"),
            Clause::HeadValue { j } => write!(f, "head value e_j at j = {j}"),
            Clause::HeadSmall { j } => write!(f, "head smallness |e_j| < 1/(96m) at j = {j}"),
            Clause::RatioPastSix { j } => write!(f, "ratio conditions at j = {j}"),
            Clause::TailEnclosure { j } => write!(f, "tail enclosure at j = {j}"),
            Clause::CoefficientFormula { j } => write!(f, "coefficient formula at j = {j}"),
            Clause::PerJContribution { j } => write!(f, "per-j contribution at j = {j}"),
            Clause::CoefficientBound { j } => write!(f, "coefficient bound at j = {j}"),
            Clause::WitnessSum => write!(f, "k = sum of k_j b_j"),
            Clause::Membership => write!(f, "k in V(b,m)"),
            Clause::TotalEnclosure => write!(f, "total enclosure in (1/4, 3/4)"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub failures: Vec<Clause>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn coefficient_for(e_j: &Rational, m: u64) -> BigInt {
    let magnitude = (Rational::of(1, 16 * m as i64) / e_j.abs()).floor_int();
    if e_j.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Contribution band `(1/(32m), 1/(12m))`.
fn band(m: u64) -> (Rational, Rational) {
    (Rational::of(1, 32 * m as i64), Rational::of(1, 12 * m as i64))
}

/// Enclosure of `k_j (e_j + eps_j)` at a given tail depth, widened or
/// tightened by redoing the decomposition.
fn contribution_enclosure(
    stream: &DigitStream,
    j: usize,
    k_j: &BigInt,
    depth: usize,
) -> Result<(Interval, Interval), WitnessError> {
    let dec = stream.decompose(j, depth)?;
    let contribution = dec
        .value_enclosure()
        .scale(&Rational::from_int(k_j.clone()));
    Ok((dec.eps_enclosure, contribution))
}

/// Runs the witness construction.
///
/// Scans `j = 0..=budget`, collecting the first `8m` indices with
/// `d_{j+1} != 0`, `|e_j| < 1/(96m)`, and ratios `b_j/b_{j+1} < 1/6` and
/// `b_{j+1}/b_{j+2} < 1/6` (the second feeds the tail coefficient
/// estimate). Tail enclosures double their exact depth until the
/// contribution strictly clears the band or the depth cap aborts.
pub fn construct_witness(
    stream: &DigitStream,
    m: u64,
    budget: usize,
) -> Result<WitnessCertificate, WitnessError> {
    construct_witness_with_cap(stream, m, budget, TAIL_DEPTH_CAP)
}

/// Like [`construct_witness`] with an explicit tail-depth cap.
pub fn construct_witness_with_cap(
    stream: &DigitStream,
    m: u64,
    budget: usize,
    depth_cap: usize,
) -> Result<WitnessCertificate, WitnessError> {
    assert!(m >= 1, "modulus must be positive");
    let b = stream.base();
    let needed = 8 * m as usize;
    let sixth = Rational::of(1, 6);
    let small = Rational::of(1, 96 * m as i64);
    let (band_lo, band_hi) = band(m);

    let mut warnings = Vec::new();
    if b.dinfty_flag() != Some(true) {
        let mut shown = b.spec().to_owned();
        if shown.len() > 48 {
            shown.truncate(48);
            shown.push('…');
        }
        warnings.push(format!(
            "base {shown} is not analytically known to have divergent ratios; \
             the certificate stands on its machine-checked fields only"
        ));
    }

    let mut entries: Vec<WitnessEntry> = Vec::new();
    let mut coeffs: BTreeMap<usize, BigInt> = BTreeMap::new();
    let mut j = 0usize;
    while entries.len() < needed && j <= budget {
        // Admission and early exit for provably finite digit support.
        if let Some(last) = stream.terminated_after() {
            if j + 1 > last {
                return Err(WitnessError::DigitsExhausted {
                    last_nonzero_before: last,
                    collected: entries.len(),
                    needed,
                });
            }
        }
        let d_next = stream.digit(j + 1)?;
        if let Some(n) = stream.first_bound_violation(j + 2)? {
            return Err(WitnessError::Inadmissible(n));
        }
        if d_next.is_zero() {
            j += 1;
            continue;
        }
        let ratio_ok = |i: usize| -> Result<bool, WitnessError> {
            Ok(Rational::new(b.term(i)?, b.term(i + 1)?) < sixth)
        };
        if !(ratio_ok(j)? && ratio_ok(j + 1)?) {
            j += 1;
            continue;
        }
        let dec = stream.decompose(j, DEFAULT_TAIL_DEPTH)?;
        if dec.e_j.abs() >= small {
            j += 1;
            continue;
        }
        // d_{j+1} != 0 forces e_j != 0 via the head lower bound.
        assert!(!dec.e_j.is_zero(), "nonzero digit with zero head at j = {j}");
        let k_j = coefficient_for(&dec.e_j, m);

        // Tighten the tail until the contribution strictly clears the band.
        let mut depth = DEFAULT_TAIL_DEPTH.min(depth_cap);
        let (mut eps, mut contribution) = contribution_enclosure(stream, j, &k_j, depth)?;
        while !contribution.strictly_inside(&band_lo, &band_hi) {
            if depth >= depth_cap {
                return Err(WitnessError::EnclosureUndecided { j });
            }
            depth = (depth * 2).min(depth_cap);
            let (e, c) = contribution_enclosure(stream, j, &k_j, depth)?;
            eps = e;
            contribution = c;
        }

        coeffs.insert(j, k_j.clone());
        entries.push(WitnessEntry {
            j,
            d_next: d_next.to_string(),
            e_j: dec.e_j,
            eps_enclosure: eps,
            depth_used: depth,
            k_j: k_j.to_string(),
            contribution,
        });
        j += 1;
    }

    if entries.len() < needed {
        return Err(WitnessError::BudgetExhausted {
            budget,
            collected: entries.len(),
            needed,
        });
    }

    let k = build_member(b, m, &coeffs)?;
    let total: Interval = entries.iter().map(|e| e.contribution.clone()).sum();
    assert!(
        total.strictly_inside(&Rational::of(1, 4), &Rational::of(3, 4)),
        "band sums must land in (1/4, 3/4): {total:?}"
    );

    Ok(WitnessCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        base: b.spec().to_owned(),
        modulus: m,
        stream: stream.spec().to_owned(),
        entries,
        k: k.to_string(),
        total,
        warnings,
    })
}

/// Re-derives every certificate field from `(base, m, stream, J)` using
/// only the exact/enclosure primitives and the finite membership decision
/// procedure — independent of the construction's code path. Returns every
/// failed clause.
pub fn verify_certificate(cert: &WitnessCertificate) -> VerificationReport {
    let mut failures = Vec::new();
    let mut fail = |c: Clause| failures.push(c);

    if cert.schema_version != CERTIFICATE_SCHEMA_VERSION {
        fail(Clause::SchemaVersion);
    }

    let (base, stream) = match rebuild_inputs(cert) {
        Ok(pair) => pair,
        Err(_) => {
            fail(Clause::SchemaVersion);
            return VerificationReport { failures };
        }
    };
    let m = cert.modulus;
    let needed = 8 * m as usize;
    if cert.entries.len() != needed {
        fail(Clause::IndexCount);
    }
    if !cert
        .entries
        .windows(2)
        .all(|w| w[0].j < w[1].j)
    {
        fail(Clause::IndicesStrictlyIncreasing);
    }

    let max_index = cert
        .entries
        .iter()
        .map(|e| e.j + 2 + e.depth_used)
        .max()
        .unwrap_or(0);
    match stream.first_bound_violation(max_index) {
        Ok(None) => {}
        Ok(Some(n)) => fail(Clause::DigitBound { n }),
        Err(_) => fail(Clause::DigitBound { n: 0 }),
    }

    let sixth = Rational::of(1, 6);
    let small = Rational::of(1, 96 * m as i64);
    let (band_lo, band_hi) = band(m);
    let eighth_m = Rational::of(1, 8 * m as i64);

    let mut sum = BigInt::zero();
    let mut ok_entries = true;
    for entry in &cert.entries {
        let j = entry.j;
        let k_j: BigInt = match entry.k_j.parse() {
            Ok(v) => v,
            Err(_) => {
                fail(Clause::CoefficientFormula { j });
                ok_entries = false;
                continue;
            }
        };
        let d_next: Option<BigInt> = entry.d_next.parse().ok();

        let digit = stream.digit(j + 1);
        match (&digit, &d_next) {
            (Ok(actual), Some(stored)) if actual == stored && !actual.is_zero() => {}
            _ => fail(Clause::DigitValue { j }),
        }

        let dec = match stream.decompose(j, entry.depth_used) {
            Ok(d) => d,
            Err(_) => {
                fail(Clause::TailEnclosure { j });
                ok_entries = false;
                continue;
            }
        };
        if dec.e_j != entry.e_j {
            fail(Clause::HeadValue { j });
        }
        if entry.e_j.abs() >= small || entry.e_j.is_zero() {
            fail(Clause::HeadSmall { j });
        }
        if dec.eps_enclosure != entry.eps_enclosure {
            fail(Clause::TailEnclosure { j });
        }

        let ratios_ok = (|| -> Result<bool, DseqError> {
            Ok(Rational::new(base.term(j)?, base.term(j + 1)?) < sixth
                && Rational::new(base.term(j + 1)?, base.term(j + 2)?) < sixth)
        })();
        if !matches!(ratios_ok, Ok(true)) {
            fail(Clause::RatioPastSix { j });
        }

        if !entry.e_j.is_zero() && k_j != coefficient_for(&entry.e_j, m) {
            fail(Clause::CoefficientFormula { j });
        }

        let contribution = Interval::point(entry.e_j.clone())
            .add(&entry.eps_enclosure)
            .scale(&Rational::from_int(k_j.clone()));
        if contribution != entry.contribution
            || !contribution.strictly_inside(&band_lo, &band_hi)
        {
            fail(Clause::PerJContribution { j });
        }

        let coeff_ok = (|| -> Result<bool, DseqError> {
            let lhs = Rational::new(k_j.abs() * base.term(j)?, base.term(j + 1)?);
            Ok(lhs <= eighth_m)
        })();
        if !matches!(coeff_ok, Ok(true)) {
            fail(Clause::CoefficientBound { j });
        }

        match base.term(j) {
            Ok(b_j) => sum += &k_j * b_j,
            Err(_) => fail(Clause::WitnessSum),
        }
    }

    match cert.k.parse::<BigInt>() {
        Ok(k) if ok_entries && k == sum => {
            match in_v(&base, m, &k) {
                Ok(VMembership::Member) => {}
                _ => fail(Clause::Membership),
            }
        }
        Ok(k) => {
            fail(Clause::WitnessSum);
            // Still run the membership decision on the stored k.
            match in_v(&base, m, &k) {
                Ok(VMembership::Member) => {}
                _ => fail(Clause::Membership),
            }
        }
        Err(_) => fail(Clause::WitnessSum),
    }

    let total: Interval = cert.entries.iter().map(|e| e.contribution.clone()).sum();
    if total != cert.total
        || !total.strictly_inside(&Rational::of(1, 4), &Rational::of(3, 4))
    {
        fail(Clause::TotalEnclosure);
    }

    VerificationReport { failures }
}

fn rebuild_inputs(cert: &WitnessCertificate) -> Result<(DSeq, DigitStream), WitnessError> {
    let base: DSeq = cert.base.parse()?;
    let stream = DigitStream::parse_spec(&cert.stream, base.clone())?;
    Ok((base, stream))
}
