//! A tower of quantum map categories over concrete complex matrices.
//!
//! The layers, from most to least reversible:
//!
//! * unitaries and their relatives ([`tower`]),
//! * contractions presented as unitaries with hidden direct-sum ancillas ([`biaffine`]),
//! * quantum channels presented as contractions with hidden tensor ancillas
//!   ([`dilation`], [`channels`]),
//! * channels between block algebras, via causal idempotent splitting ([`split`]).
//!
//! Each layer has an equality test that quotients out the hidden data, and
//! explicit constructions moving morphisms up and down the tower (Halmos
//! dilation, Stinespring dilation, Kraus extraction, mixing unitaries,
//! mediating isometries). The [`dsl`] module gives a small typed combinator
//! language whose programs can be evaluated and compared at any layer, and
//! [`suite`] bundles randomized checks of the structural laws behind the
//! `qtower suite` subcommand.

pub mod tol;

pub mod linalg;
pub mod rig;
pub mod tower;
pub mod biaffine;
pub mod channels;
pub mod dilation;
pub mod split;
pub mod dsl;
pub mod suite;

pub use linalg::ComplexMatrix;
pub use rig::ObjExpr;
