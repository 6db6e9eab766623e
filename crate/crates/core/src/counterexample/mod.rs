//! A bounded `B`-linear map `Φ: E → B` on `E = B ⊕ (B^ℕ)^∞ = B^A`,
//! `B = C[0,1]`, whose kernel contains a set `S = {ζ_{k,ℓ}}` with
//! `S^⊥ = 0`, and the checks that certify it:
//!
//! * [`verify_kernel`]: `Φ(ζ_{k,ℓ}) = 0` exactly;
//! * [`solve_constraints`]: anything orthogonal to `S` is determined by its
//!   zeroth entry `b_0`;
//! * [`refute_membership`]: for `b_0 ≠ 0` that family is not in `E`;
//! * [`complement_probe`]: the same story on a finite truncation.

mod construction;
mod refutation;
mod prehilbert;
mod probe;
mod sequence;

pub use construction::{make_phi, make_psi, psi, verify_kernel, verify_kernel_element, zeta};
pub use refutation::{
    certify_window, find_witness_window, refute_membership, row_prefix, solve_constraints,
    witness_window_at, GapCheck, NonMembershipWitness, WitnessWindow, DECIMAL_DIGITS,
};
pub use prehilbert::{distance_sq_to_span, nullspace, prehilbert_demo, PrehilbertReport};
pub use probe::{complement_probe, truncated_candidate, ProbeReport};
pub use sequence::{dense_sequence, dyadic_position, DenseSeq};
