//! Initial data for the blow-up constructions, experiment configuration and runners.

mod output;
mod runner;

use serde::{Deserialize, Serialize};

pub use output::{write_fields_csv, write_norms_csv, write_outputs, write_trace_csv};
pub use runner::{
    config_hash, run_blowup_study, run_cone_experiment, run_scenario, BlowupStudy, ConeExperiment, ConstantCheck,
    ExperimentReport, Localization, RangeDrift, RescaleSteering, ScalingCheck, SliceReport, run_scaling_check, run_simulation,
};

use crate::calculus::sobolev_norm;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Boundary, Grid};
use crate::real::Real;
use crate::solver::{Reconstruction, SolverConfig};
use crate::state::{PhysParams, SimState};
use crate::transform::{cole_hopf_scaled, parabolic_rescale, RescaleParam, ScalingMap};

/// Radial profile `amplitude` on `|x| ≤ inner`, `0` on `|x| ≥ outer`, C^∞ in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BumpSpec<T> {
    pub inner_radius: T,
    pub outer_radius: T,
    pub amplitude: T,
}

impl<T: Real> Default for BumpSpec<T> {
    fn default() -> Self {
        BumpSpec { inner_radius: T::one(), outer_radius: T::lit(2.0), amplitude: T::one() }
    }
}

impl<T: Real> BumpSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > T::zero() && self.inner_radius < self.outer_radius) {
            return Err(Error::InvalidParameter("bump radii must satisfy 0 < inner < outer".into()));
        }
        if !(self.amplitude > T::zero() && self.amplitude <= T::one()) {
            return Err(Error::InvalidParameter("bump amplitude must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// `e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)})`, clamped to `[0, 1]` outside `(0, 1)`.
pub fn smoothstep<T: Real>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    if s >= T::one() {
        return T::one();
    }
    let a = (-T::one() / s).exp();
    let b = (-T::one() / (T::one() - s)).exp();
    a / (a + b)
}

pub fn bump<T: Real>(x: T, spec: &BumpSpec<T>) -> T {
    let r = x.abs();
    if r <= spec.inner_radius {
        return spec.amplitude;
    }
    if r >= spec.outer_radius {
        return T::zero();
    }
    let s = (r - spec.inner_radius) / (spec.outer_radius - spec.inner_radius);
    spec.amplitude * (T::one() - smoothstep(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `(ρ̄, c̄)` everywhere.
    Constant,
    /// `ρ̄ + ψ(x₁)`, `c̄ + ψ(x₁)` (constant in the other coordinates).
    Remark11,
    /// Single-bump data rescaled by `a`: `(a²ρ(ax), c(ax))`.
    Thm13Case1,
    /// Tensor data `ψ(x₁)∏ψ(δx_k)` on top of `(ρ̄, c̄)`.
    Thm13Case2,
    /// Tensor data scaled by `δ^N`.
    Corollary14,
    /// Tensor data with the configured bump.
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Constant,
        ScenarioKind::Remark11,
        ScenarioKind::Thm13Case1,
        ScenarioKind::Thm13Case2,
        ScenarioKind::Corollary14,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Constant => "constant",
            ScenarioKind::Remark11 => "remark11",
            ScenarioKind::Thm13Case1 => "thm13_case1",
            ScenarioKind::Thm13Case2 => "thm13_case2",
            ScenarioKind::Corollary14 => "corollary14",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))
    }
}

fn default_image_samples() -> usize {
    24
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ScenarioConfig<T> {
    pub scenario: ScenarioKind,
    pub rho_bar: T,
    pub c_bar: T,
    /// Parabolic rescaling factor (`thm13_case1`).
    pub a: T,
    /// Transverse stretch of the tensor data.
    pub delta: T,
    /// Power of `δ` in the amplitude (`corollary14`).
    #[serde(rename = "N", alias = "n")]
    pub n_power: u32,
    pub params: PhysParams<T>,
    pub grid: Grid<T>,
    #[serde(default)]
    pub solver: SolverConfig<T>,
    /// Interval `(-r, r)`-style target `(r_lo, r_hi)` for the blow-up radius (`thm13_case1`).
    #[serde(default)]
    pub target_interval: Option<(T, T)>,
    /// Scaled end time; `None` runs until an abort.
    #[serde(default)]
    pub t_end: Option<T>,
    #[serde(default)]
    pub bump: BumpSpec<T>,
    /// Scaled times at which cellwise fields are written.
    #[serde(default)]
    pub output_times: Vec<T>,
    /// Lattice resolution for the range constants `δ₀`, `m_Φ`, `M_Φ`.
    #[serde(default = "default_image_samples")]
    pub image_samples: usize,
    /// Growth the classifier demands of `sup|∇ρ|` and `sup|∇²c|`; defaults to the
    /// growth implied by the abort threshold.
    #[serde(default)]
    pub required_growth: Option<T>,
    /// Track `P`, `Q` field ranges each step (1D).
    #[serde(default = "default_true")]
    pub track_ranges: bool,
}

impl<T: Real> ScenarioConfig<T> {
    /// Canonical configuration of each scenario.
    pub fn preset(kind: ScenarioKind) -> Self {
        let one = T::one();
        let line = |n: usize, l: f64| Grid::new(1, n, T::lit(l), Boundary::Periodic).expect("valid preset grid");
        let blowup_solver = SolverConfig {
            reconstruction: Reconstruction::Minmod,
            resolution_abort: Some(T::lit(RESOLUTION_ABORT)),
            ..SolverConfig::default()
        };
        let base = ScenarioConfig {
            scenario: kind,
            rho_bar: one,
            c_bar: one,
            a: one,
            delta: one,
            n_power: 1,
            params: PhysParams::unit(),
            grid: line(2048, 16.0),
            solver: blowup_solver,
            target_interval: None,
            t_end: None,
            bump: BumpSpec::default(),
            output_times: Vec::new(),
            image_samples: default_image_samples(),
            required_growth: None,
            track_ranges: true,
        };
        match kind {
            ScenarioKind::Constant => ScenarioConfig {
                grid: line(256, 16.0),
                solver: SolverConfig::default(),
                t_end: Some(one),
                track_ranges: false,
                ..base
            },
            ScenarioKind::Remark11 | ScenarioKind::Custom => base,
            ScenarioKind::Thm13Case1 => ScenarioConfig { rho_bar: T::lit(0.05), a: T::lit(2.0), ..base },
            ScenarioKind::Thm13Case2 => ScenarioConfig {
                delta: T::lit(0.5),
                grid: Grid::new(2, 256, T::lit(6.0), Boundary::Periodic).expect("valid preset grid"),
                track_ranges: false,
                ..base
            },
            ScenarioKind::Corollary14 => ScenarioConfig {
                rho_bar: T::lit(COROLLARY_RHO_BAR),
                delta: T::lit(0.2),
                n_power: 4,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_bar > T::zero() && self.c_bar > T::zero()) {
            return Err(Error::InvalidParameter("rho_bar and c_bar must be positive".into()));
        }
        if !(self.a > T::zero()) {
            return Err(Error::InvalidParameter("a must be positive".into()));
        }
        if !(self.delta > T::zero() && self.delta <= T::one()) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1]".into()));
        }
        if self.n_power < 1 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        if let Some((lo, hi)) = self.target_interval {
            if !(lo >= T::zero() && hi > lo) {
                return Err(Error::InvalidParameter("target_interval must satisfy 0 <= lo < hi".into()));
            }
        }
        if self.image_samples < 2 {
            return Err(Error::InvalidParameter("image_samples must be >= 2".into()));
        }
        self.params.validate()?;
        self.solver.validate()?;
        self.bump.validate()
    }

    /// Amplitude of the perturbation.
    pub fn amplitude(&self) -> T {
        match self.scenario {
            ScenarioKind::Constant => T::zero(),
            ScenarioKind::Corollary14 => self.delta.powi(self.n_power as i32) * self.bump.amplitude,
            _ => self.bump.amplitude,
        }
    }
}

/// Front ratio at which the blow-up presets abort (see `solver::front_ratio`).
pub const RESOLUTION_ABORT: f64 = 0.65;
/// Background density of the small-data preset.
pub const COROLLARY_RHO_BAR: f64 = 1e-4;

/// Perturbation profile `ψ(x₁) ∏_{k≥2} ψ(δ x_k)` with unit amplitude.
fn tensor_profile<T: Real>(x: &[T], delta: T, spec: &BumpSpec<T>) -> T {
    let unit = BumpSpec { amplitude: T::one(), ..*spec };
    x.iter()
        .enumerate()
        .map(|(k, &xk)| if k == 0 { bump(xk, &unit) } else { bump(delta * xk, &unit) })
        .fold(T::one(), |p, v| p * v)
}

/// `(ρ₀, c₀)` of a scenario before the Cole–Hopf step and any rescaling.
pub fn initial_fields<T: Real>(config: &ScenarioConfig<T>) -> Result<(ScalarField<T>, ScalarField<T>)> {
    config.validate()?;
    let g = config.grid;
    let amp = config.amplitude();
    let (rb, cb) = (config.rho_bar, config.c_bar);
    let profile: Box<dyn Fn(&[T]) -> T + Sync> = match config.scenario {
        ScenarioKind::Constant => Box::new(|_| T::zero()),
        ScenarioKind::Remark11 | ScenarioKind::Thm13Case1 => {
            let spec = config.bump;
            Box::new(move |x: &[T]| bump(x[0], &spec))
        }
        ScenarioKind::Thm13Case2 | ScenarioKind::Corollary14 | ScenarioKind::Custom => {
            let (spec, delta) = (config.bump, config.delta);
            if g.dim() >= 2 {
                let need = spec.outer_radius / delta + T::lit(4.0) * g.h();
                if g.half_width() < need {
                    return Err(Error::DomainConflict(format!(
                        "half width {} cannot hold the transverse support {need}",
                        g.half_width()
                    )));
                }
            }
            Box::new(move |x: &[T]| amp * tensor_profile(x, delta, &spec))
        }
    };
    if g.half_width() < config.bump.outer_radius + T::lit(4.0) * g.h() {
        return Err(Error::DomainConflict("domain does not contain the bump support".into()));
    }
    let rho = ScalarField::from_fn(g, |x| rb + profile(x))?;
    let c = ScalarField::from_fn(g, |x| cb + profile(x))?;
    Ok((rho, c))
}

/// `(ρ, q, log c)` at `t = 0` from `(ρ₀, c₀)`.
pub fn state_from_fields<T: Real>(rho: ScalarField<T>, c: &ScalarField<T>, params: &PhysParams<T>) -> Result<SimState<T>> {
    if !(c.min() > T::zero()) {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let log_c = c.map(|v| v.ln());
    let q = cole_hopf_scaled(&log_c, &ScalingMap::new(params.chi, params.mu)?);
    SimState::new(rho, q, log_c, T::zero())
}

pub fn build_data<T: Real>(config: &ScenarioConfig<T>) -> Result<SimState<T>> {
    let (rho, c) = initial_fields(config)?;
    let state = state_from_fields(rho, &c, &config.params)?;
    match config.scenario {
        ScenarioKind::Thm13Case1 => parabolic_rescale(&state, RescaleParam::new(config.a)?),
        _ => Ok(state),
    }
}

/// Discrete `Hᵐ` sizes of the perturbation: `‖ρ₀ - ρ̄‖` and `‖∇log c₀‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationNorms<T> {
    pub m: usize,
    pub rho: T,
    pub grad_log_c: T,
}

pub fn perturbation_norms<T: Real>(state: &SimState<T>, rho_bar: T, m: usize) -> PerturbationNorms<T> {
    let dev = state.rho.map(|v| v - rho_bar);
    let grad = crate::calculus::gradient(&state.log_c);
    PerturbationNorms { m, rho: sobolev_norm(&dev, m), grad_log_c: crate::calculus::sobolev_norm_vec(&grad, m) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let s = BumpSpec::<f64>::default();
        assert_eq!(bump(0.0, &s), 1.0);
        assert_eq!(bump(1.0, &s), 1.0);
        assert_eq!(bump(3.0, &s), 0.0);
        assert_eq!(bump(2.0, &s), 0.0);
        let v = bump(1.5, &s);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(v, bump(-1.5, &s));
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn config_roundtrip_and_unknown_keys() {
        let c = ScenarioConfig::<f64>::preset(ScenarioKind::Remark11);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"N\":1"));
        let back: ScenarioConfig<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ScenarioConfig<f64>>(v).is_err());
    }

    #[test]
    fn case2_transverse_support_checked() {
        let mut c = ScenarioConfig::<f64>::preset(ScenarioKind::Thm13Case2);
        c.grid = Grid::new(2, 32, 3.0, Boundary::Periodic).unwrap();
        assert!(matches!(build_data(&c), Err(Error::DomainConflict(_))));
    }
}
