//! A workbench for disjunctive and normal logic programs under the
//! general stable model semantics over explicitly represented first-order
//! structures.
//!
//! The crate provides:
//!
//! - [`syntax`]: rule/program ASTs, the `.lp` parser and printer, and the
//!   program classifiers;
//! - [`formula`]: second-order formula trees and the `SM` operator;
//! - [`structure`]: finite structures with interpretation tables,
//!   assignment/expansion enumeration, and Tarskian evaluation;
//! - [`ground`]: the first-order GL-reduction;
//! - [`semantics`]: two independent stable-model engines (minimal model
//!   of the reduct, and the progression fixed point) plus stable-expansion
//!   enumeration and search;
//! - [`transform`]: source-to-source program translations (shift,
//!   disjunctive-to-normal over infinite domains, constraint-theory round
//!   trips, saturation compilation, parity, finite/infinite combination);
//! - [`encode`]: the pairing-based clause encoding over the naturals and
//!   the bounded progression-simulation checks.

pub mod error;
pub mod formula;
pub mod ground;
pub mod semantics;
pub mod structure;
pub mod syntax;
pub mod transform;
pub mod encode;

pub use error::{Error, Result};
