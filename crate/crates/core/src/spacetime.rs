//! Scale-factor models for a flat FLRW background with `Lambda > 0`.
//!
//! Two modes: analytic exponential backgrounds (`desitter`, `upper`) and a
//! Friedmann integrator. The integrator either evolves `(R, rho)` through the
//! first Friedmann equation and the continuity equation for a barotropic
//! fluid, or evolves `R` alone with `rho` and `P` read from kinetic matter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of step halvings tried by [`friedmann_step`].
pub const MAX_STEP_RETRIES: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmannState {
    pub t: f64,
    /// Scale factor `R(t)`.
    pub scale: f64,
    pub rho: f64,
    pub pressure: f64,
}

impl FriedmannState {
    /// `R(0) = 1` with the given matter content.
    pub fn initial(rho: f64, pressure: f64) -> Self {
        FriedmannState { t: 0.0, scale: 1.0, rho, pressure }
    }

    pub fn vacuum() -> Self {
        Self::initial(0.0, 0.0)
    }
}

/// Energy density and pressure of matter as seen at scale factor `R`.
///
/// Implemented by the kinetic distribution, whose moments depend on `R`
/// through `p^0 = sqrt(1 + R^-2 |p_*|^2)` even when `f` itself is frozen.
pub trait MatterSource {
    fn energy_density(&self, scale: f64) -> f64;
    fn pressure(&self, scale: f64) -> f64;
}

fn hubble_from(rho: f64, lambda: f64) -> Result<f64> {
    if rho < 0.0 || rho.is_nan() {
        return Err(Error::EnergyCondition { rho });
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("cosmological constant must be positive, got {lambda}")));
    }
    Ok(((8.0 * PI * rho + lambda) / 3.0).sqrt())
}

/// Expansion rate `Rdot / R`, the positive root of the first Friedmann equation.
pub fn hubble_rate(state: &FriedmannState, lambda: f64) -> Result<f64> {
    hubble_from(state.rho, lambda)
}

/// `rhodot = -3 (Rdot/R)(rho + P)`.
pub fn continuity_rhs(state: &FriedmannState, lambda: f64) -> Result<f64> {
    Ok(-3.0 * hubble_rate(state, lambda)? * (state.rho + state.pressure))
}

/// Lower and upper exponential bounds on `R(t)` for matter obeying the
/// dominant energy condition: `exp(sqrt(Lambda/3) t) <= R <= exp(sqrt((8 pi rho0 + Lambda)/3) t)`.
pub fn sandwich_bounds(lambda: f64, rho0: f64, t: f64) -> (f64, f64) {
    let lo = ((lambda / 3.0).sqrt() * t).exp();
    let hi = (((8.0 * PI * rho0 + lambda) / 3.0).sqrt() * t).exp();
    (lo, hi)
}

/// Whether `R` lies inside the sandwich bounds with `1e-12` relative slack.
pub fn within_sandwich(lambda: f64, rho0: f64, t: f64, scale: f64) -> bool {
    let (lo, hi) = sandwich_bounds(lambda, rho0, t);
    scale >= lo * (1.0 - 1e-12) && scale <= hi * (1.0 + 1e-12)
}

fn rk4_uncoupled(state: &FriedmannState, lambda: f64, dt: f64) -> Result<FriedmannState> {
    // barotropic closure over the step: with P / rho fixed the continuity
    // equation integrates to rho = rho0 (R / R0)^(-3 (1 + w)) along the stages
    let w = if state.rho > 0.0 { state.pressure / state.rho } else { 0.0 };
    let rho_at = |log_growth: f64| state.rho * (-3.0 * (1.0 + w) * log_growth).exp();
    let rhs = |log_growth: f64| hubble_from(rho_at(log_growth), lambda);
    let k1 = rhs(0.0)?;
    let k2 = rhs(0.5 * dt * k1)?;
    let k3 = rhs(0.5 * dt * k2)?;
    let k4 = rhs(dt * k3)?;
    let log_growth = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    let rho = rho_at(log_growth);
    Ok(FriedmannState { t: state.t + dt, scale: state.scale * log_growth.exp(), rho, pressure: w * rho })
}

fn rk4_coupled(state: &FriedmannState, lambda: f64, dt: f64, matter: &dyn MatterSource) -> Result<FriedmannState> {
    let r0 = state.scale;
    let rhs = |log_growth: f64| -> Result<f64> { hubble_from(matter.energy_density(r0 * log_growth.exp()), lambda) };
    let k1 = rhs(0.0)?;
    let k2 = rhs(0.5 * dt * k1)?;
    let k3 = rhs(0.5 * dt * k2)?;
    let k4 = rhs(dt * k3)?;
    let scale = r0 * (dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).exp();
    Ok(FriedmannState {
        t: state.t + dt,
        scale,
        rho: matter.energy_density(scale),
        pressure: matter.pressure(scale),
    })
}

fn advance(state: &FriedmannState, lambda: f64, dt: f64, matter: Option<&dyn MatterSource>) -> Result<FriedmannState> {
    let next = match matter {
        Some(m) => rk4_coupled(state, lambda, dt, m)?,
        None => rk4_uncoupled(state, lambda, dt)?,
    };
    if next.rho < 0.0 || !next.scale.is_finite() || next.scale <= 0.0 {
        return Err(Error::EnergyCondition { rho: next.rho });
    }
    Ok(next)
}

/// One classical fourth-order Runge-Kutta step of the Friedmann system.
///
/// The scale factor is integrated as `ln R` (`d ln R/dt = H`), which makes the
/// vacuum solution exact and keeps every stage above the de Sitter rate.
/// Without `matter`, `(R, rho)` evolve by `Rdot = R H` and the continuity
/// equation with `P/rho` frozen at its initial ratio. With `matter`, only `R`
/// is integrated and `rho`, `P` are recomputed from the source at every stage.
/// A step that drives `rho` negative is retried as `2^k` substeps, `k <= 10`.
pub fn friedmann_step(
    state: &FriedmannState,
    lambda: f64,
    dt: f64,
    matter: Option<&dyn MatterSource>,
) -> Result<FriedmannState> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    hubble_rate(state, lambda)?;
    for retry in 0..=MAX_STEP_RETRIES {
        let pieces = 1u32 << retry;
        let sub = dt / f64::from(pieces);
        let mut current = *state;
        let mut ok = true;
        for _ in 0..pieces {
            match advance(&current, lambda, sub, matter) {
                Ok(next) => current = next,
                Err(Error::EnergyCondition { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            current.t = state.t + dt;
            return Ok(current);
        }
    }
    Err(Error::StepFailure {
        t: state.t,
        reason: format!("energy density turned negative after {MAX_STEP_RETRIES} step halvings"),
    })
}

/// Background expansion law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ScaleFactorModel {
    /// `R = exp(sqrt(Lambda/3) t)`.
    DeSitter { lambda: f64 },
    /// `R = exp(sqrt((8 pi rho0 + Lambda)/3) t)`, the upper sandwich bound.
    Upper { lambda: f64, rho0: f64 },
    /// `R` integrated from the Friedmann equation with matter from the distribution.
    Coupled { lambda: f64 },
}

impl ScaleFactorModel {
    /// Builds a model from its configuration name.
    pub fn from_preset(name: &str, lambda: f64, rho0: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        match name {
            "desitter" => Ok(ScaleFactorModel::DeSitter { lambda }),
            "upper" => Ok(ScaleFactorModel::Upper { lambda, rho0 }),
            "coupled" => Ok(ScaleFactorModel::Coupled { lambda }),
            other => Err(Error::Config(format!("unknown scale_factor preset {other:?}"))),
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            ScaleFactorModel::DeSitter { lambda }
            | ScaleFactorModel::Upper { lambda, .. }
            | ScaleFactorModel::Coupled { lambda } => lambda,
        }
    }

    /// Constant expansion rate of the analytic presets; `None` when coupled.
    pub fn analytic_rate(&self) -> Option<f64> {
        match *self {
            ScaleFactorModel::DeSitter { lambda } => Some((lambda / 3.0).sqrt()),
            ScaleFactorModel::Upper { lambda, rho0 } => Some(((8.0 * PI * rho0 + lambda) / 3.0).sqrt()),
            ScaleFactorModel::Coupled { .. } => None,
        }
    }

    /// Analytic `R(t)`; `None` when coupled.
    pub fn scale_at(&self, t: f64) -> Option<f64> {
        self.analytic_rate().map(|h| (h * t).exp())
    }

    /// Advances the background from `state` by `dt`.
    pub fn advance(&self, state: &FriedmannState, dt: f64, matter: &dyn MatterSource) -> Result<FriedmannState> {
        match self {
            ScaleFactorModel::Coupled { lambda } => friedmann_step(state, *lambda, dt, Some(matter)),
            _ => {
                let t = state.t + dt;
                let scale = self.scale_at(t).expect("analytic preset");
                Ok(FriedmannState { t, scale, rho: matter.energy_density(scale), pressure: matter.pressure(scale) })
            }
        }
    }

    /// `Rdot / R` at the given state.
    pub fn hubble(&self, state: &FriedmannState) -> Result<f64> {
        match self.analytic_rate() {
            Some(h) => Ok(h),
            None => hubble_rate(state, self.lambda()),
        }
    }
}
