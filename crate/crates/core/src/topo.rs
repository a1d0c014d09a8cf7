//! Membership, convergence, duality, and quasi-convexity oracles for the
//! linear topology (subgroup basis `b_n ℤ`) and the uniform-convergence
//! topology (basis `V_{b,m}`) attached to a D-sequence.
//!
//! Every verdict here is a bounded-quantifier certificate over an
//! examined window — convergence of finite prefixes is never promoted to
//! a limit claim.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dseq::{DSeq, DseqError};
use crate::exact::{reduce_mod_z, CircleElem, Rational};

#[derive(Debug, thiserror::Error)]
pub enum TopoError {
    #[error(transparent)]
    Dseq(#[from] DseqError),
    #[error("k = {k} is a member of V(b,{m}); nothing to separate")]
    AlreadyMember { k: BigInt, m: u64 },
    #[error("ratio bound violated: b_{}/b_{n} = {ratio} > {allowed}", n + 1)]
    RatioBoundViolated {
        n: usize,
        ratio: BigInt,
        allowed: u64,
    },
    #[error("character {value} is not of finite type over this sequence within depth {depth}")]
    NotFiniteCharacter { value: Rational, depth: usize },
}

/// A character ℤ → 𝕋, either of finite type (value k/b_n with n minimal)
/// or given by a balanced digit stream.
#[derive(Debug)]
pub enum Character {
    FiniteRational {
        /// Canonical value in (-1/2, 1/2].
        value: Rational,
        /// Minimal index with `denominator | b_n`.
        n: usize,
        /// Numerator over `b_n`: the character is `k * xi_n`.
        k: BigInt,
    },
    Stream(crate::expand::DigitStream),
}

impl Character {
    /// Builds a finite-type character from a rational, verifying that its
    /// denominator divides some `b_n` within `depth`.
    pub fn finite(b: &DSeq, q: &Rational, depth: usize) -> Result<Self, TopoError> {
        let value = reduce_mod_z(q).rep().clone();
        match dual_membership(b, &value, depth)? {
            DualMembership::Member { n, k } => Ok(Character::FiniteRational { value, n, k }),
            _ => Err(TopoError::NotFiniteCharacter {
                value,
                depth,
            }),
        }
    }

    /// Evaluates a finite-type character at the integer `t`.
    pub fn eval(&self, t: &BigInt) -> Option<CircleElem> {
        match self {
            Character::FiniteRational { value, .. } => {
                Some(reduce_mod_z(value).scale(t))
            }
            Character::Stream(_) => None,
        }
    }
}

/// Decision for `k ∈ V_{b,m} = {k : ||k/b_n|| <= 1/(4m) for all n >= 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VMembership {
    Member,
    /// First index violating the arc bound, with the violating norm.
    NotMember { n: usize, norm: Rational },
}

impl VMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, VMembership::Member)
    }
}

/// Decides `k ∈ V_{b,m}` by the finite cutoff: only indices with
/// `b_n <= 4m|k|` can violate `||k/b_n|| <= 1/(4m)`, since for larger
/// `b_n` already `|k|/b_n < 1/(4m)`. The cutoff is exact, which makes
/// this a decision procedure rather than a heuristic scan.
pub fn in_v(b: &DSeq, m: u64, k: &BigInt) -> Result<VMembership, TopoError> {
    assert!(m >= 1, "modulus must be positive");
    if k.is_zero() {
        return Ok(VMembership::Member);
    }
    let cutoff = BigInt::from(4 * m) * k.abs();
    let arc = Rational::of(1, 4 * m as i64);
    let mut n = 1usize;
    loop {
        let b_n = b.term(n)?;
        if b_n > cutoff {
            return Ok(VMembership::Member);
        }
        let norm = reduce_mod_z(&Rational::new(k.clone(), b_n)).norm();
        if norm > arc {
            return Ok(VMembership::NotMember { n, norm });
        }
        n += 1;
    }
}

/// Verdict for membership of a circle element in the dual of the linear
/// topology, i.e. whether its denominator divides some `b_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualMembership {
    Member { n: usize, k: BigInt },
    /// Decided analytically from the family's prime support.
    NotMember,
    UndecidedAtDepth { depth: usize },
}

/// Tests whether `q + ℤ` lies in the subgroup generated by the characters
/// `xi_n = 1/b_n + ℤ`.
///
/// For built-in families the verdict is analytic: a denominator divides
/// some `b_n` iff each of its primes divides the family base (geometric,
/// squared-exponent, triangular power) or unconditionally (factorial).
/// Explicit prefixes are searched up to `depth`.
pub fn dual_membership(
    b: &DSeq,
    q: &Rational,
    depth: usize,
) -> Result<DualMembership, TopoError> {
    let value = reduce_mod_z(q);
    let den = value.rep().denom().clone();

    // Strip every prime factor of `base` out of `den`; what remains is
    // coprime to every power of the base.
    let strip = |mut d: BigInt, base: u64| {
        let base = BigInt::from(base);
        loop {
            let g = d.gcd(&base);
            if g.is_one() {
                return d;
            }
            while (&d % &g).is_zero() {
                d = d / &g;
            }
        }
    };

    let analytic_member: Option<bool> = match b.spec() {
        s if s.starts_with("pow:") || s.starts_with("powsq:") || s.starts_with("triangular-pow:")
        => {
            let base: u64 = s.split(':').nth(1).unwrap().parse().unwrap();
            Some(strip(den.clone(), base).is_one())
        }
        "factorial" => Some(true),
        _ => None,
    };

    if analytic_member == Some(false) {
        return Ok(DualMembership::NotMember);
    }

    // Search for the minimal n with denominator | b_n. For analytic
    // members this terminates; for explicit prefixes it is depth-bounded.
    let search_to = if analytic_member == Some(true) {
        usize::MAX
    } else {
        depth
    };
    let mut n = 0usize;
    while n <= search_to {
        match b.term(n) {
            Ok(b_n) => {
                if (&b_n % &den).is_zero() {
                    let k = (value.rep() * &Rational::from_int(b_n)).numer().clone();
                    return Ok(DualMembership::Member { n, k });
                }
            }
            Err(DseqError::PrefixExhausted { .. }) => break,
            Err(e) => return Err(e.into()),
        }
        n += 1;
    }
    Ok(DualMembership::UndecidedAtDepth { depth })
}

/// Bounded-quantifier convergence certificate over an examined window.
///
/// JSON schema (stable field order):
/// `{"topology": ..., "moduli": [{"modulus", "threshold", "checked_to"}],
///   "counterexamples": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub topology: String,
    pub moduli: Vec<ModulusVerdict>,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusVerdict {
    pub modulus: u64,
    /// Minimal window index from which every later entry passes.
    pub threshold: usize,
    /// Last window index examined.
    pub checked_to: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub modulus: u64,
    /// Last violating window index.
    pub index: usize,
    pub value: String,
    /// For uniform-convergence failures: the index n with
    /// `||l_j / b_n|| > 1/(4m)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_n: Option<usize>,
}

impl ConvergenceCertificate {
    pub fn verified(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Linear-topology convergence on a window: for each requested index `n`,
/// the minimal threshold `j_n` with `b_n | l_j` for every later window
/// index, or the last counterexample.
pub fn check_lambda_convergence(
    b: &DSeq,
    l: &[BigInt],
    moduli: &[usize],
) -> Result<ConvergenceCertificate, TopoError> {
    let mut cert = ConvergenceCertificate {
        topology: "lambda".to_owned(),
        moduli: Vec::new(),
        counterexamples: Vec::new(),
    };
    for &n in moduli {
        let b_n = b.term(n)?;
        let last_violation = l
            .iter()
            .enumerate()
            .rev()
            .find(|(_, l_j)| !(*l_j % &b_n).is_zero());
        match last_violation {
            None => cert.moduli.push(ModulusVerdict {
                modulus: n as u64,
                threshold: 0,
                checked_to: l.len().saturating_sub(1),
            }),
            Some((j, _)) if j + 1 < l.len() => cert.moduli.push(ModulusVerdict {
                modulus: n as u64,
                threshold: j + 1,
                checked_to: l.len() - 1,
            }),
            Some((j, v)) => cert.counterexamples.push(Counterexample {
                modulus: n as u64,
                index: j,
                value: v.to_string(),
                violating_n: None,
            }),
        }
    }
    Ok(cert)
}

/// Uniform-convergence certificate on a window: for each modulus `m`, the
/// minimal threshold past which every `l_j` lies in `V_{b,m}`, or the
/// last counterexample together with its violating index.
pub fn check_tau_convergence(
    b: &DSeq,
    l: &[BigInt],
    moduli: &[u64],
) -> Result<ConvergenceCertificate, TopoError> {
    let mut cert = ConvergenceCertificate {
        topology: "tau".to_owned(),
        moduli: Vec::new(),
        counterexamples: Vec::new(),
    };
    for &m in moduli {
        let mut last_violation: Option<(usize, &BigInt, usize)> = None;
        for (j, l_j) in l.iter().enumerate().rev() {
            if let VMembership::NotMember { n, .. } = in_v(b, m, l_j)? {
                last_violation = Some((j, l_j, n));
                break;
            }
        }
        match last_violation {
            None => cert.moduli.push(ModulusVerdict {
                modulus: m,
                threshold: 0,
                checked_to: l.len().saturating_sub(1),
            }),
            Some((j, _, _)) if j + 1 < l.len() => cert.moduli.push(ModulusVerdict {
                modulus: m,
                threshold: j + 1,
                checked_to: l.len() - 1,
            }),
            Some((j, v, n)) => cert.counterexamples.push(Counterexample {
                modulus: m,
                index: j,
                value: v.to_string(),
                violating_n: Some(n),
            }),
        }
    }
    Ok(cert)
}

/// One term of the strictness witness sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrictnessEntry {
    pub j: usize,
    pub value: String,
    /// The analytic guarantee needs ratio `c_{j+1}/c_j > 2`; entries at
    /// ratio exactly 2 are reported inconclusive (they may still violate
    /// the arc bound, which the certificates check exactly).
    pub conclusive: bool,
}

/// Sequence-level evidence separating the two topologies: terms
/// `l_j = c_j * round(c_{j+1} / (2 c_j))` (ties toward zero) are divisible
/// by every `c_n` with `n <= j` (null for the linear topology) yet stay a
/// fixed arc away from 0 in the uniform topology whenever the ratio
/// exceeds 2.
pub fn strictness_witness(c: &DSeq, length: usize) -> Result<Vec<StrictnessEntry>, TopoError> {
    let mut entries = Vec::with_capacity(length);
    for j in 0..length {
        let c_j = c.term(j)?;
        let c_next = c.term(j + 1)?;
        let half_ratio = Rational::new(c_next.clone(), &c_j * 2);
        let l_j = &c_j * half_ratio.round_half_toward_zero();
        let conclusive = c_next > &c_j * 2;
        entries.push(StrictnessEntry {
            j,
            value: l_j.to_string(),
            conclusive,
        });
    }
    Ok(entries)
}

pub fn strictness_values(entries: &[StrictnessEntry]) -> Vec<BigInt> {
    entries
        .iter()
        .map(|e| e.value.parse().expect("entry values are decimal integers"))
        .collect()
}

/// Discreteness evidence at window scale for bounded-ratio sequences:
/// verifies `V_{b,M} ∩ [-window, window] = {0}`.
///
/// Precondition (checked): `b_{n+1}/b_n <= M` on every index the scan can
/// reach (`b_n <= 4*M*window`).
pub fn discreteness_certificate(b: &DSeq, m_bound: u64, window: u64) -> Result<bool, TopoError> {
    let reach = BigInt::from(4 * m_bound) * BigInt::from(window);
    let mut n = 0usize;
    while b.term(n)? <= reach {
        let ratio = b.ratio(n)?;
        if ratio > BigInt::from(m_bound) {
            return Err(TopoError::RatioBoundViolated {
                n,
                ratio,
                allowed: m_bound,
            });
        }
        n += 1;
    }
    for k in 1..=window {
        let k = BigInt::from(k);
        if in_v(b, m_bound, &k)?.is_member() {
            return Ok(false);
        }
        // V is symmetric, so -k is excluded with k; checked explicitly in
        // the property suite.
    }
    Ok(true)
}

/// The finite character window `{k/b_N + ℤ : 0 <= k < b_N}` members of the
/// polar of `b_n ℤ`.
#[derive(Debug, Clone)]
pub struct PolarWindow {
    pub n: usize,
    pub window_index: usize,
    pub window_order: BigInt,
    /// Numerators k (over b_N) of the polar members.
    pub members: Vec<BigInt>,
}

/// Brute-forces the polar of `b_n ℤ` inside the window of characters of
/// order dividing `b_N`: a window character belongs iff it maps every
/// multiple of `b_n` into the arc [-1/4, 1/4] + ℤ. The orbit of
/// `chi(b_n)` is finite, so the check walks it exhaustively.
pub fn polar_bruteforce(b: &DSeq, n: usize, window_index: usize) -> Result<PolarWindow, TopoError> {
    assert!(n <= window_index);
    let b_n = b.term(n)?;
    let b_window = b.term(window_index)?;
    let mut members = Vec::new();
    let mut k = BigInt::zero();
    while k < b_window {
        let gen = reduce_mod_z(&Rational::new(&k * &b_n, b_window.clone()));
        if orbit_inside_quarter_arc(&gen) {
            members.push(k.clone());
        }
        k += 1;
    }
    Ok(PolarWindow {
        n,
        window_index,
        window_order: b_window,
        members,
    })
}

/// Walks the cyclic orbit of `gen` in 𝕋 and reports whether every element
/// stays inside the closed arc of radius 1/4.
fn orbit_inside_quarter_arc(gen: &CircleElem) -> bool {
    if gen.is_zero() {
        return true;
    }
    let order = gen.rep().denom().clone();
    let quarter = Rational::of(1, 4);
    let mut acc = CircleElem::zero();
    let mut t = BigInt::one();
    while t <= order {
        acc = &acc + gen;
        if acc.norm() > quarter {
            return false;
        }
        t += 1;
    }
    true
}

/// A separating character for a point outside `V_{b,m}`: `chi = c * xi_n`
/// maps all of `V_{b,m}` into the quarter arc yet moves `k` out of it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Separation {
    pub c: u64,
    pub n: usize,
    /// `||c k / b_n||`, strictly greater than 1/4.
    pub moved_norm: Rational,
}

/// Realizes quasi-convexity of `V_{b,m}` at desk scale: given
/// `k ∉ V_{b,m}`, scans `c = 1..=m` at the violation index `n` for
/// `||c k / b_n|| > 1/4`. The multiplier exists because the arc
/// `[-1/(4m), 1/(4m)]` is quasi-convex; `|c| <= m` also guarantees
/// `c * xi_n` maps `V_{b,m}` into the quarter arc.
pub fn separate(b: &DSeq, m: u64, k: &BigInt) -> Result<Separation, TopoError> {
    let n = match in_v(b, m, k)? {
        VMembership::Member => {
            return Err(TopoError::AlreadyMember { k: k.clone(), m });
        }
        VMembership::NotMember { n, .. } => n,
    };
    let quarter = Rational::of(1, 4);
    let base = reduce_mod_z(&Rational::new(k.clone(), b.term(n)?));
    for c in 1..=m {
        let moved = base.scale(&BigInt::from(c));
        let norm = moved.norm();
        if norm > quarter {
            return Ok(Separation {
                c,
                n,
                moved_norm: norm,
            });
        }
    }
    unreachable!("a multiplier c <= m must exist when ||k/b_n|| > 1/(4m)");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dseq::DSeq;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn pow2() -> DSeq {
        DSeq::geometric(2).unwrap()
    }

    #[test]
    fn v_membership_examples() {
        assert!(in_v(&pow2(), 1, &big(0)).unwrap().is_member());
        assert_eq!(
            in_v(&pow2(), 1, &big(1)).unwrap(),
            VMembership::NotMember {
                n: 1,
                norm: Rational::of(1, 2)
            }
        );
        let b = DSeq::squared_exp(2).unwrap();
        assert!(in_v(&b, 1, &big(48)).unwrap().is_member());
    }

    #[test]
    fn v_truncation_agrees_with_deeper_scan() {
        // Deep scan to 10x the cutoff must agree with the decision.
        let b = pow2();
        for k in [-17i64, -4, 3, 5, 48, 100] {
            let k = big(k);
            let quick = in_v(&b, 2, &k).unwrap().is_member();
            let cutoff = big(10 * 8) * k.abs();
            let mut deep = true;
            let mut n = 1;
            loop {
                let b_n = b.term(n).unwrap();
                if b_n > cutoff {
                    break;
                }
                if reduce_mod_z(&Rational::new(k.clone(), b_n)).norm() > Rational::of(1, 8) {
                    deep = false;
                    break;
                }
                n += 1;
            }
            assert_eq!(quick, deep, "k = {k}");
        }
    }

    #[test]
    fn dual_membership_examples() {
        let m = dual_membership(&pow2(), &Rational::of(3, 8), 16).unwrap();
        assert_eq!(
            m,
            DualMembership::Member {
                n: 3,
                k: big(3)
            }
        );
        assert_eq!(
            dual_membership(&pow2(), &Rational::of(1, 3), 64).unwrap(),
            DualMembership::NotMember
        );
        for q in [Rational::of(5, 7), Rational::of(1, 12), Rational::of(3, 10)] {
            assert!(matches!(
                dual_membership(&DSeq::factorial(), &q, 0).unwrap(),
                DualMembership::Member { .. }
            ));
        }
    }

    #[test]
    fn lambda_convergence_examples() {
        let b = pow2();
        let prefix: Vec<BigInt> = (0..8).map(|j| b.term(j).unwrap()).collect();
        let cert = check_lambda_convergence(&b, &prefix, &[3]).unwrap();
        assert_eq!(cert.moduli[0].threshold, 3);

        let ones = vec![big(1); 6];
        let cert = check_lambda_convergence(&b, &ones, &[1]).unwrap();
        assert!(!cert.verified());

        let scaled: Vec<BigInt> = (0..8).map(|j| big(j as i64) * b.term(j).unwrap()).collect();
        let cert = check_lambda_convergence(&b, &scaled, &[2]).unwrap();
        assert_eq!(cert.moduli[0].threshold, 2);
    }

    #[test]
    fn tau_convergence_dichotomy() {
        // Over factorial the sequence (b_j) passes modulus 1 with a small
        // threshold; over pow:2 it fails at every index.
        let f = DSeq::factorial();
        let prefix: Vec<BigInt> = (0..10).map(|j| f.term(j).unwrap()).collect();
        let cert = check_tau_convergence(&f, &prefix, &[1]).unwrap();
        assert!(cert.verified());
        assert!(cert.moduli[0].threshold <= 2);

        let b = pow2();
        let prefix: Vec<BigInt> = (0..10).map(|j| b.term(j).unwrap()).collect();
        let cert = check_tau_convergence(&b, &prefix, &[1]).unwrap();
        assert_eq!(cert.counterexamples[0].index, 9);

        let zeros = vec![big(0); 5];
        let cert = check_tau_convergence(&b, &zeros, &[1, 2]).unwrap();
        assert!(cert.verified());
        assert!(cert.moduli.iter().all(|v| v.threshold == 0));
    }

    #[test]
    fn strictness_witness_examples() {
        let f = DSeq::factorial();
        let entries = strictness_witness(&f, 5).unwrap();
        assert_eq!(entries[3].value, "48"); // 24 * round(120/48) = 24 * 2
        assert!(!entries[0].conclusive); // ratio exactly 2
        assert!(entries[3].conclusive);

        let s = DSeq::squared_exp(2).unwrap();
        let entries = strictness_witness(&s, 3).unwrap();
        assert_eq!(entries[2].value, "256");
    }

    #[test]
    fn discreteness_examples() {
        assert!(discreteness_certificate(&pow2(), 2, 1000).unwrap());
        assert!(discreteness_certificate(&DSeq::geometric(3).unwrap(), 3, 500).unwrap());
        assert!(matches!(
            discreteness_certificate(&DSeq::factorial(), 2, 100),
            Err(TopoError::RatioBoundViolated { .. })
        ));
    }

    #[test]
    fn polar_window_examples() {
        let p = polar_bruteforce(&pow2(), 2, 4).unwrap();
        assert_eq!(p.members, vec![big(0), big(4), big(8), big(12)]);

        let p = polar_bruteforce(&DSeq::factorial(), 1, 2).unwrap();
        assert_eq!(p.members, vec![big(0), big(3)]);

        // n = 0: the polar of ℤ itself is the zero character.
        let p = polar_bruteforce(&pow2(), 0, 3).unwrap();
        assert_eq!(p.members, vec![big(0)]);
    }

    #[test]
    fn separation_examples() {
        let s = separate(&pow2(), 1, &big(1)).unwrap();
        assert_eq!((s.c, s.n), (1, 1));
        assert_eq!(s.moved_norm, Rational::of(1, 2));

        // First in_V violation for k = 3, m = 2 is n = 1 (||3/2|| = 1/2),
        // where c = 1 already moves k out of the quarter arc.
        let s = separate(&pow2(), 2, &big(3)).unwrap();
        assert_eq!((s.c, s.n), (1, 1));
        assert_eq!(s.moved_norm, Rational::of(1, 2));

        assert!(matches!(
            separate(&pow2(), 1, &big(0)),
            Err(TopoError::AlreadyMember { .. })
        ));
    }

    #[test]
    fn finite_character_construction() {
        let chi = Character::finite(&pow2(), &Rational::of(3, 8), 16).unwrap();
        match chi {
            Character::FiniteRational { n, ref k, .. } => {
                assert_eq!((n, k.clone()), (3, big(3)));
            }
            _ => panic!("expected finite character"),
        }
        assert!(Character::finite(&pow2(), &Rational::of(1, 3), 32).is_err());
    }
}
