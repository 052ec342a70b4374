//! Numerical estimates of the Carathéodory and Kobayashi-Eisenman volume
//! elements and the Bergman kernel on convex and C-convex domains in `C^n`,
//! driven by the iterated boundary distances `tau_1, .., tau_n` and their
//! product `p_D`.

pub mod bergman;
pub mod constants;
pub mod domain;
pub mod harness;
pub mod linalg;
pub mod minimal_basis;
pub mod normalization;
mod polytope;
pub mod quadrature;
pub mod volume;

pub use bergman::{BergmanMethod, BergmanValue, ReinhardtProfile};
pub use domain::{ConvexityClass, DomainConfig, DomainSpec, HalfspaceConstraint};
pub use harness::{run_scenario, RunOptions, Scenario, ScenarioReport};
pub use linalg::{CMatrix, CVector, C64};
pub use minimal_basis::{minimal_basis, BasisConfig, MinimalBasis};
pub use normalization::{normalize, Normalization};
pub use volume::Interval;
