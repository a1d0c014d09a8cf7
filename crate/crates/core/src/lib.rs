//! Exact arithmetic for balanced b-adic digit expansions over divisor
//! chains, with machine-checked certificates for linear-topology
//! statements on the integers: membership in the neighborhoods `V_{b,m}`,
//! convergence and separation certificates, polar windows, and the
//! constructive discontinuity witness.
//!
//! All arithmetic is exact (`num-rational` / `num-bigint`); enclosures of
//! infinite tails are closed rational intervals. No floating point enters
//! any decision.

pub mod dseq;
pub mod exact;
pub mod expand;
pub mod topo;
pub mod witness;

pub use dseq::{
    same_linear_topology, DSeq, DinftyDiagnostics, DseqError, SameTopologyCertificate,
    TailSumBound,
};
pub use exact::{circle_norm, in_tm, reduce_mod_z, CircleElem, Interval, Rational};
pub use expand::{DigitStream, EjEpsDecomposition, ExpandError, HeadTailReport};
pub use topo::{
    check_lambda_convergence, check_tau_convergence, discreteness_certificate, dual_membership,
    in_v, polar_bruteforce, separate, strictness_witness, Character, ConvergenceCertificate,
    PolarWindow, Separation, StrictnessEntry, TopoError, VMembership,
};
pub use witness::{
    build_member, construct_witness, construct_witness_with_cap, verify_certificate, Clause,
    VerificationReport, WitnessCertificate, WitnessEntry, WitnessError,
};
