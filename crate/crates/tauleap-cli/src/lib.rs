//! Experiment harness around the `tauleap` library: model and point-set
//! resolution, efficiency metrics, grid execution with CSV/JSON reporting,
//! and direction-number generation for the digital net construction.

pub mod directions;
pub mod experiment;
pub mod io;
pub mod metrics;
