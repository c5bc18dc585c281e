//! Randomised number field sieve at desk scale.
//!
//! The crate follows the classical pipeline: derive parameters, pick a
//! randomised base-m polynomial, collect doubly smooth pairs with a
//! budget-doubling search, find GF(2) dependencies augmented by quadratic
//! characters, and take square roots on both sides of the congruence.
//! A Dixon random-squares factorizer and exact smooth-number counters
//! serve as baselines and test oracles.

pub mod apstats;
pub mod arith;
pub mod characters;
pub mod dixon;
pub mod ecm;
pub mod error;
pub mod gfpoly;
pub mod io;
pub mod linalg;
pub mod params;
pub mod pipeline;
pub mod polyselect;
pub mod relations;
pub mod smooth;
pub mod sqrt;
pub mod zfactor;
pub mod zpoly;

pub use error::{Error, Result};
