//! Time stepping of `d_t f = Q(f, f)` on the covariant-momentum lattice.
//!
//! Each step solves the loss-implicit, gain-explicit iteration
//! `f^{m+1} = (f_old + dt Q+(f^m)) / (1 + dt L(f^m))` to a fixed point, so
//! every accepted step keeps `f >= 0` exactly. Collision terms are evaluated
//! at `R = sqrt(R_n R_{n+1})` after the background has been advanced.

use std::io::{Read, Write};
use std::path::Path;

use crate::collision::{CollisionOperator, DistributionGrid};
use crate::config::SimConfig;
use crate::diagnostics::{self, DiagnosticsRecord, NormSpec};
use crate::error::{Error, Result};
use crate::spacetime::{within_sandwich, FriedmannState, ScaleFactorModel};

/// Largest number of step halvings tried before a step fails.
pub const MAX_HALVINGS: u32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub f: DistributionGrid,
    pub background: FriedmannState,
    pub step_count: u64,
}

impl SimState {
    /// State at `t = 0`, `R = 1` with matter moments of `f`.
    pub fn initial(f: DistributionGrid) -> Self {
        let background =
            FriedmannState::initial(diagnostics::energy_density(&f, 1.0), diagnostics::pressure(&f, 1.0));
        SimState { t: 0.0, f, background, step_count: 0 }
    }

    pub fn scale(&self) -> f64 {
        self.background.scale
    }
}

/// Initial distribution presets:
/// `gaussian` `eps exp(-|p_*|^2)` and `shell` `eps exp(-((|p_*| - r0) / w)^2)`.
pub fn initial_data(
    kind: &str,
    epsilon: f64,
    params: &std::collections::BTreeMap<String, f64>,
    extent: f64,
    n: usize,
) -> Result<DistributionGrid> {
    if !(epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let param = |name: &str, default: f64| params.get(name).copied().unwrap_or(default);
    match kind {
        "gaussian" => DistributionGrid::from_fn(extent, n, |p| epsilon * (-p.norm_sq()).exp()),
        "shell" => {
            let (r0, w) = (param("r0", 2.0), param("w", 0.5));
            if !(w > 0.0) || !(r0 >= 0.0) {
                return Err(Error::Config(format!("shell needs r0 >= 0 and w > 0, got r0 = {r0}, w = {w}")));
            }
            DistributionGrid::from_fn(extent, n, |p| epsilon * (-((p.norm() - r0) / w).powi(2)).exp())
        }
        other => Err(Error::Config(format!("unknown initial data kind {other:?}"))),
    }
}

/// Outcome of one accepted step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Max-norm change in the last Picard sweep of the last substep.
    pub residual: f64,
    /// Total sweeps over all substeps.
    pub sweeps: u32,
    /// Number of halvings needed (`0` means one substep of the full `dt`).
    pub halvings: u32,
    /// Leakage fraction of the last collision evaluation.
    pub leakage: f64,
}

/// Picard stepper for a fixed operator and background model.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub operator: CollisionOperator,
    pub model: ScaleFactorModel,
    pub picard_iters: u32,
    pub max_sweeps: u32,
    /// Residual tolerance relative to `max f`.
    pub tolerance: f64,
}

impl Stepper {
    pub fn new(operator: CollisionOperator, model: ScaleFactorModel) -> Self {
        Stepper { operator, model, picard_iters: 2, max_sweeps: 8, tolerance: 1e-10 }
    }

    /// Advances by `dt`, halving the substep up to [`MAX_HALVINGS`] times when
    /// the Picard sweeps do not reach the tolerance.
    pub fn picard_step(&self, state: &SimState, dt: f64) -> Result<(SimState, StepReport)> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        if self.picard_iters < 1 {
            return Err(Error::Domain("picard_iters must be at least 1".into()));
        }
        let mut last_reason = String::new();
        for halvings in 0..=MAX_HALVINGS {
            let pieces = 1u64 << halvings;
            let h = dt / pieces as f64;
            let mut current = state.clone();
            let mut report = StepReport { halvings, ..Default::default() };
            let mut ok = true;
            for piece in 0..pieces {
                let target = if piece + 1 == pieces { state.t + dt } else { state.t + (piece + 1) as f64 * h };
                match self.substep(&current, target - current.t) {
                    Ok((next, sub)) => {
                        report.residual = sub.residual;
                        report.sweeps += sub.sweeps;
                        report.leakage = sub.leakage;
                        current = next;
                    }
                    Err(Error::StepFailure { reason, .. }) => {
                        last_reason = reason;
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if ok {
                current.step_count = state.step_count + 1;
                return Ok((current, report));
            }
        }
        Err(Error::StepFailure { t: state.t, reason: format!("{last_reason} after {MAX_HALVINGS} halvings") })
    }

    fn substep(&self, state: &SimState, h: f64) -> Result<(SimState, StepReport)> {
        let background = self.model.advance(&state.background, h, &state.f)?;
        let scale = (state.scale() * background.scale).sqrt();
        let f_old = state.f.values();
        let mut f_prev = state.f.clone();
        let mut report = StepReport::default();
        for sweep in 1..=self.max_sweeps {
            let terms = self.operator.evaluate(&f_prev, scale);
            let mut next = f_prev.clone();
            let mut residual = 0.0f64;
            for (i, v) in next.values_mut().iter_mut().enumerate() {
                let updated = (f_old[i] + h * terms.gain[i]) / (1.0 + h * terms.loss_rate[i]);
                residual = residual.max((updated - *v).abs());
                *v = updated;
            }
            report = StepReport { residual, sweeps: sweep, halvings: 0, leakage: terms.leakage };
            f_prev = next;
            if sweep >= self.picard_iters && residual <= self.tolerance * f_prev.max_value() {
                let t = state.t + h;
                let background = FriedmannState {
                    t,
                    rho: diagnostics::energy_density(&f_prev, background.scale),
                    pressure: diagnostics::pressure(&f_prev, background.scale),
                    ..background
                };
                return Ok((SimState { t, f: f_prev, background, step_count: state.step_count }, report));
            }
        }
        Err(Error::StepFailure {
            t: state.t,
            reason: format!("Picard residual {:e} above tolerance after {} sweeps", report.residual, self.max_sweeps),
        })
    }
}

/// A configured simulation ready to run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub stepper: Stepper,
    pub initial: SimState,
    pub dt: f64,
    pub horizon: f64,
    pub record_every: u64,
    pub norms: Vec<NormSpec>,
    pub decay_k: u32,
}

/// Records, final state and bookkeeping of a completed run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SimState,
    pub steps: u64,
    pub halvings: u32,
    pub max_sweeps: u32,
    /// Steps at which `R` left the de Sitter sandwich.
    pub sandwich_violations: u64,
}

/// A failed run: the error and everything produced up to the last accepted step.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub last_state: SimState,
    pub records: Vec<DiagnosticsRecord>,
}

impl Simulation {
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let f = initial_data(
            &config.initial.kind,
            config.initial.epsilon,
            &config.initial.params,
            config.grid.extent,
            config.grid.n,
        )?;
        if f.max_value() > 0.0 && !f.cutoff_adequate() {
            return Err(Error::Config(format!(
                "initial data is {:e} of its maximum on the boundary layer; enlarge grid.extent",
                f.boundary_max() / f.max_value()
            )));
        }
        let initial = SimState::initial(f);
        let model = ScaleFactorModel::from_preset(&config.scale_factor, config.lambda, initial.background.rho)?;
        let stepper = Stepper {
            operator: CollisionOperator::new(config.quadrature()?),
            model,
            picard_iters: config.picard_iters,
            max_sweeps: config.max_sweeps,
            tolerance: config.tolerance,
        };
        Ok(Simulation {
            stepper,
            initial,
            dt: config.dt,
            horizon: config.horizon,
            record_every: ((config.output.interval / config.dt).round() as u64).max(1),
            norms: config.norms.clone(),
            decay_k: config.decay_exponent(),
        })
    }

    fn observe(&self, state: &SimState, leakage: f64, continuity_residual: f64) -> DiagnosticsRecord {
        let mut record = DiagnosticsRecord::observe(&state.f, state.t, state.scale(), &self.norms, self.decay_k);
        record.leakage = leakage;
        record.continuity_residual = continuity_residual;
        record
    }

    /// Integrates to the horizon, recording every `record_every` steps and at the end.
    ///
    /// The continuity residual of a record is
    /// `(rho_n - rho_{n-1}) / dt + 3 <H (rho + P)>` over its last step, with the
    /// bracket the trapezoidal average; it vanishes for exactly energy-conserving collisions.
    pub fn run(&self) -> std::result::Result<RunSummary, Box<RunFailure>> {
        let steps = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as u64;
        let lambda = self.stepper.model.lambda();
        let rho0 = self.initial.background.rho;
        let mut state = self.initial.clone();
        let mut records = vec![self.observe(&state, 0.0, 0.0)];
        let mut summary_halvings = 0;
        let mut max_sweeps = 0;
        let mut sandwich_violations = 0;
        let fail = |error: Error, state: &SimState, records: &[DiagnosticsRecord]| {
            Box::new(RunFailure { error, last_state: state.clone(), records: records.to_vec() })
        };
        let flux = |s: &SimState| -> Result<f64> {
            Ok(3.0 * self.stepper.model.hubble(&s.background)? * (s.background.rho + s.background.pressure))
        };
        for k in 1..=steps {
            let target = if k == steps { self.horizon } else { k as f64 * self.dt };
            let (next, report) = match self.stepper.picard_step(&state, target - state.t) {
                Ok(r) => r,
                Err(e) => return Err(fail(e, &state, &records)),
            };
            summary_halvings = summary_halvings.max(report.halvings);
            max_sweeps = max_sweeps.max(report.sweeps);
            if !within_sandwich(lambda, rho0, next.t, next.scale()) {
                sandwich_violations += 1;
            }
            if k % self.record_every == 0 || k == steps {
                let residual = match (flux(&state), flux(&next)) {
                    (Ok(a), Ok(b)) => {
                        (next.background.rho - state.background.rho) / (next.t - state.t) + 0.5 * (a + b)
                    }
                    (Err(e), _) | (_, Err(e)) => return Err(fail(e, &state, &records)),
                };
                records.push(self.observe(&next, report.leakage, residual));
            }
            state = next;
        }
        Ok(RunSummary {
            records,
            steps,
            halvings: summary_halvings,
            max_sweeps,
            sandwich_violations,
            final_state: state,
        })
    }
}

/// Writes a checkpoint: little-endian `f64` header `extent, n, t, R`, then the
/// `n^3` values of `f` in row-major order (last index fastest), also `f64` LE.
pub fn write_checkpoint(out: &mut impl Write, state: &SimState) -> std::io::Result<()> {
    let f = &state.f;
    for v in [f.extent(), f.points_per_axis() as f64, state.t, state.scale()] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in f.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// A decoded checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub scale: f64,
    pub f: DistributionGrid,
}

pub fn read_checkpoint(input: &mut impl Read) -> Result<Checkpoint> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut dyn Read| -> Result<f64> {
        input.read_exact(&mut word)?;
        Ok(f64::from_le_bytes(word))
    };
    let extent = next(input)?;
    let n_raw = next(input)?;
    let (t, scale) = (next(input)?, next(input)?);
    if !(n_raw >= 2.0) || n_raw.fract() != 0.0 || n_raw > 1e4 {
        return Err(Error::Config(format!("checkpoint has invalid grid size {n_raw}")));
    }
    let n = n_raw as usize;
    let values = (0..n * n * n).map(|_| next(input)).collect::<Result<Vec<f64>>>()?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Config(format!("checkpoint has {} trailing bytes", rest.len())));
    }
    Ok(Checkpoint { t, scale, f: DistributionGrid::with_values(extent, n, values)? })
}

pub fn save_checkpoint(path: &Path, state: &SimState) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut out, state)?;
    out.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::SphereQuadrature;
    use std::collections::BTreeMap;

    fn stepper() -> Stepper {
        Stepper::new(
            CollisionOperator::new(SphereQuadrature::product(4, 8).unwrap()),
            ScaleFactorModel::DeSitter { lambda: 3.0 },
        )
    }

    fn gaussian(n: usize) -> DistributionGrid {
        initial_data("gaussian", 1e-3, &BTreeMap::new(), 6.0, n).unwrap()
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let state = SimState::initial(DistributionGrid::zeros(6.0, 8).unwrap());
        let (next, report) = stepper().picard_step(&state, 0.1).unwrap();
        assert!(next.f.values().iter().all(|&v| v == 0.0));
        assert_eq!(report.residual, 0.0);
        assert_eq!(next.step_count, 1);
        assert!((next.scale() - 0.1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn isotropic_data_stays_isotropic() {
        let state = SimState::initial(gaussian(9));
        let (next, _) = stepper().picard_step(&state, 0.1).unwrap();
        let f = &next.f;
        let max = f.max_value();
        for idx in 0..f.len() {
            let [i, j, k] = f.triple(idx);
            let n = 8;
            for other in [f.index(j, i, k), f.index(k, j, i), f.index(n - i, j, k), f.index(i, n - j, n - k)] {
                assert!((f.values()[idx] - f.values()[other]).abs() <= 1e-6 * max);
            }
        }
    }

    #[test]
    fn small_dt_matches_explicit_operator() {
        let f = gaussian(8);
        let s = stepper();
        // explicit Q at R = 1; the stepper evaluates at sqrt(R_n R_{n+1}) = e^{dt/2}
        let q = s.operator.evaluate(&f, 1.0).net(&f);
        let qmax = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut errors = Vec::new();
        for dt in [1e-2, 5e-3] {
            let (next, _) = s.picard_step(&SimState::initial(f.clone()), dt).unwrap();
            let err = next
                .f
                .values()
                .iter()
                .zip(f.values())
                .zip(&q)
                .map(|((a, b), qi)| ((a - b) / dt - qi).abs())
                .fold(0.0, f64::max);
            errors.push(err / qmax);
        }
        assert!(errors[0] < 0.05, "{errors:?}");
        // first order: halving dt roughly halves the discrepancy
        assert!((errors[1] / errors[0] - 0.5).abs() < 0.1, "{errors:?}");
    }

    #[test]
    fn update_stays_below_gain_bound() {
        let f = gaussian(8);
        let s = stepper();
        let dt = 0.2;
        let (next, _) = s.picard_step(&SimState::initial(f.clone()), dt).unwrap();
        assert!(next.f.min_value() >= 0.0);
        // f_new <= f_old + dt * gain at the converged iterate
        let gain = s.operator.evaluate(&next.f, (1.0f64 * next.scale()).sqrt()).gain;
        for i in 0..f.len() {
            assert!(next.f.values()[i] <= f.values()[i] + dt * gain[i] * (1.0 + 1e-6) + 1e-300);
        }
    }

    #[test]
    fn sweeps_contract() {
        let s = Stepper { max_sweeps: 6, picard_iters: 6, ..stepper() };
        let state = SimState::initial(gaussian(8));
        let mut residuals = Vec::new();
        for sweeps in 1..=4 {
            let probe = Stepper { max_sweeps: sweeps, picard_iters: sweeps, tolerance: 1e300, ..s.clone() };
            residuals.push(probe.picard_step(&state, 0.1).unwrap().1.residual);
        }
        assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    }

    #[test]
    fn impossible_tolerance_fails_after_halvings() {
        let s = Stepper { tolerance: 0.0, max_sweeps: 2, ..stepper() };
        let state = SimState::initial(gaussian(8));
        assert!(matches!(s.picard_step(&state, 0.1), Err(Error::StepFailure { .. })));
    }

    #[test]
    fn initial_data_presets() {
        let params = BTreeMap::new();
        assert_eq!(initial_data("gaussian", 0.0, &params, 4.0, 8).unwrap().max_value(), 0.0);
        assert!(matches!(initial_data("plateau", 1.0, &params, 4.0, 8), Err(Error::Config(_))));
        let shell = initial_data("shell", 1.0, &params, 8.0, 32).unwrap();
        assert!(shell.boundary_max() < 1e-12 * shell.max_value());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut state = SimState::initial(gaussian(8));
        state.t = 0.25;
        state.background.scale = 1.5;
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &state).unwrap();
        assert_eq!(buf.len(), 8 * (4 + 512));
        assert_eq!(&buf[8..16], &8.0f64.to_le_bytes());
        let back = read_checkpoint(&mut buf.as_slice()).unwrap();
        assert_eq!(back, Checkpoint { t: 0.25, scale: 1.5, f: state.f.clone() });
        assert!(read_checkpoint(&mut &buf[..100]).is_err());
    }
}
