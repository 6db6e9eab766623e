//! Rigorous computation in standard Hilbert C*-modules over `C[0,1]`.
//!
//! The crate is layered bottom-up:
//!
//! * [`pwl`]: exact piecewise-linear functions with rational breakpoints;
//! * [`interval`]: outward-rounded dyadic intervals;
//! * [`expr`]: the scalar type [`FuncLin`], formal combinations of PWL,
//!   square-root and product atoms with exact cancellation;
//! * [`enclosure`]: validated sup-norm enclosures by branch-and-bound;
//! * [`module`]: the standard module `B^S`, inner products, bounded maps via
//!   coefficient families, and Cauchy gaps;
//! * [`counterexample`]: a bounded map `Φ` on `E = B ⊕ (B^ℕ)^∞` whose
//!   kernel contains a set `S` with `S^⊥ = 0`, together with the machinery
//!   that certifies each step.

pub mod counterexample;
pub mod enclosure;
pub mod error;
pub mod expr;
pub mod interval;
pub mod module;
pub mod pwl;
pub mod rational;

pub use enclosure::{sup_norm_enclosure, Accuracy};
pub use error::{Error, Result};
pub use expr::{Atom, FuncLin};
pub use interval::Interval;
pub use module::{CoeffFamily, GeneratorElement, Index, IndexA, ModuleElement, Nat};
pub use pwl::PwlFunc;
pub use rational::Rational;
