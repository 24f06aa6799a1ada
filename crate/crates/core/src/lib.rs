//! Exact tools for additive combinatorics on finite abelian groups.

mod bitset;
pub mod error;
mod flow;
pub mod group;
pub mod isoperimetry;
pub mod kneser;
pub mod menger;
pub mod set_algebra;
pub mod subgroup;
pub mod subset;
pub mod trace;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use group::{Group, GroupElement, GroupSpec, DEFAULT_MAX_ORDER};
pub use isoperimetry::{
    atoms, boundary, check_duality, check_isoperimetric_inequality, check_olsong,
    check_quotient_kappa, dual, fragments_containing_zero, generates, kappa1, reduce_to_generated,
    CayleyGraph, FragmentReport, Kappa1Engine, Reduction, EXHAUSTIVE_MAX_ORDER,
};
pub use kneser::{
    exhaustive_scan, sampled_scan, scan, verify_kneser, with_workers, KneserCertificate, ScanConfig,
    ScanMode, ScanReport, Verdict,
};
pub use menger::{
    check_part_duality, find_k_part_through_arc, is_k_nonseparable, menger_fan, min_cut,
    strong_matching, Digraph, Fan, KPart, MengerEngine,
};
pub use set_algebra::{
    check_pigeonhole, difference_set, h_decompose, negate, period, rep_count, sumset, translate,
    CosetPart, HDecomposition,
};
pub use subgroup::{is_subgroup, quotient, subgroup_generated, QuotientMap, Subgroup, SubgroupEmbedding};
pub use subset::GroupSubset;
pub use trace::{
    check_j_selection, check_trace_preconditions, proof_trace, proof_trace_unchecked, structured_sample,
    trace_sweep, Branch, LedgerLine, MainTrace,
    ProofTrace, SweepReport, Tracer,
};
