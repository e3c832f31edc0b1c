//! Exact-real names and nonexpansive-map machinery on convex domains.
//!
//! The crate is organised around *names*: total, deterministic queries that
//! deliver dyadic approximations at a requested precision. On top of the name
//! layer sit represented convex domains (boxes, half-spaces, the Hilbert
//! cube), an algebra of Lipschitz maps with declared constants, synthesis of
//! maps with prescribed fixed-point sets together with the inverse
//! half-space enumerator, and the classical fixed point iterations with
//! quantitative instrumentation.
//!
//! Everything in here is `no_std` + `alloc`: values are immutable after
//! construction and queries are pure, so concurrent evaluation is safe.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dyadic;
pub mod error;
pub mod iterate;
pub mod nonexp;
pub mod precision;
pub mod real;
pub mod spaces;
pub mod synth;

pub use dyadic::{DyVec, Dyadic};
pub use error::CoreError;
pub use real::{LowerName, Prec, RatedSequence, RealName, SemiDecision, Side, Stage, UpperName};
