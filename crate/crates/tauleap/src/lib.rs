//! Tau-leaping simulation of well-mixed reaction networks driven by plain Monte
//! Carlo, classical randomized quasi-Monte Carlo, or the array variant that
//! re-sorts the chain population between steps.
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature, on by
//! default, enables wall-clock timing in the estimators and faster float math.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;


pub mod arrayrqmc;
pub mod chain;
pub mod math;
pub mod model;
pub mod points;
pub mod rng;
pub mod sampling;
pub mod sort;

pub use chain::{EstimatorOutput, Functional, NegativePolicy, SimConfig};
pub use model::{Mode, ReactionNetwork};
pub use rng::RngStream;
