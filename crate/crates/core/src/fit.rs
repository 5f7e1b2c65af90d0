//! Bounded nonlinear least squares and the model fitting recipes.

mod lm;
pub mod recipes;

pub use lm::{least_squares, FitProblem, FitReport, LmOptions, Termination};
