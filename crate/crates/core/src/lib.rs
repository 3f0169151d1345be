//! Numerical laboratory for the hyperbolic Keller-Segel consumption system
//!
//! ```text
//! ρ_t = -χ ∇·(ρ ∇log c),    c_t = -μ c ρ
//! ```
//!
//! evolved in scaled variables (`t → sqrt(χμ) t`, `q = sqrt(χ/μ) ∇log c`) as the
//! conservation law `ρ_t + ∇·(ρq) = 0`, `q_t + ∇ρ = 0`.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, the `f32` variants carry an `F32` suffix.

pub mod blowup;
pub mod calculus;
pub mod error;
pub mod field;
pub mod grid;
pub mod interp;
pub mod norms;
pub mod propagation;
pub mod real;
pub mod riemann;
pub mod scenarios;
pub mod solver;
pub mod state;
pub mod transform;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid = grid::Grid<f64>;
pub type ScalarField = field::ScalarField<f64>;
pub type VectorField = field::VectorField<f64>;
pub type SimState = state::SimState<f64>;
pub type PhysParams = state::PhysParams<f64>;
pub type NormReport = norms::NormReport<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type StepRecord = solver::StepRecord<f64>;
pub type PhasePoint = riemann::PhasePoint<f64>;
pub type InvariantPoint = riemann::InvariantPoint<f64>;
pub type CharOdeConfig = riemann::CharOdeConfig<f64>;
pub type ImageBounds = riemann::ImageBounds<f64>;
pub type CharTrace = blowup::CharTrace<f64>;
pub type BlowupReport = blowup::BlowupReport<f64>;
pub type ConeSpec = propagation::ConeSpec<f64>;
pub type ConeReport = propagation::ConeReport<f64>;

pub type GridF32 = grid::Grid<f32>;
pub type ScalarFieldF32 = field::ScalarField<f32>;
pub type VectorFieldF32 = field::VectorField<f32>;
pub type SimStateF32 = state::SimState<f32>;
pub type PhysParamsF32 = state::PhysParams<f32>;
pub type SolverConfigF32 = solver::SolverConfig<f32>;
pub type PhasePointF32 = riemann::PhasePoint<f32>;
