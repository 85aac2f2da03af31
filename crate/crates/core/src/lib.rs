//! Simulation toolkit for hybrid quantum-classical programs: a typed control-flow
//! IR, a shot-based executor with an 18-bit fixed-point classical model, the
//! random-walk phase estimation and active-reset programs, and Bayesian refitting
//! of phase-estimation runs.

pub mod algorithms;
pub mod bayes;
pub mod fixedpoint;
pub mod hir;
pub mod histogram;
pub mod sim;
