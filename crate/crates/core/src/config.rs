//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::collision::SphereQuadrature;
use crate::diagnostics::NormSpec;
use crate::error::{Error, Result};

/// Largest admissible `P_max`: keeps `e^{p^0}` in the norm weights finite for `R >= 1`.
pub const MAX_EXTENT: f64 = 700.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extent: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub polar_order: usize,
    pub azimuth_order: usize,
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { polar_order: 8, azimuth_order: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `gaussian` or `shell`.
    pub kind: String,
    pub epsilon: f64,
    /// Shape parameters; `shell` reads `r0` (default 2) and `w` (default 0.5).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV destination; the final checkpoint goes next to it with extension `ckpt`.
    pub path: PathBuf,
    /// Time between records.
    pub interval: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub lambda: f64,
    /// `desitter`, `upper` or `coupled`.
    pub scale_factor: String,
    pub grid: GridConfig,
    #[serde(default)]
    pub sphere: SphereConfig,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_picard_iters")]
    pub picard_iters: u32,
    pub initial: InitialConfig,
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    /// Picard residual tolerance relative to `max f`.
    #[serde(default = "default_tolerance", skip_serializing_if = "is_default_tolerance")]
    pub tolerance: f64,
    /// Sweeps allowed before a step is halved.
    #[serde(default = "default_max_sweeps", skip_serializing_if = "is_default_max_sweeps")]
    pub max_sweeps: u32,
    /// Weight exponent of the decay envelope; defaults to the first norm's `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_k: Option<u32>,
}

fn default_picard_iters() -> u32 {
    2
}

fn default_tolerance() -> f64 {
    1e-10
}

fn is_default_tolerance(v: &f64) -> bool {
    *v == default_tolerance()
}

fn default_max_sweeps() -> u32 {
    8
}

fn is_default_max_sweeps(v: &u32) -> bool {
    *v == default_max_sweeps()
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SimConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !["desitter", "upper", "coupled"].contains(&self.scale_factor.as_str()) {
            return fail(format!("unknown scale_factor {:?}", self.scale_factor));
        }
        if self.grid.n < 8 {
            return fail(format!("grid.n must be at least 8, got {}", self.grid.n));
        }
        if !(self.grid.extent > 0.0) || self.grid.extent > MAX_EXTENT {
            return fail(format!("grid.extent must lie in (0, {MAX_EXTENT}], got {}", self.grid.extent));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return fail(format!("T must be positive, got {}", self.horizon));
        }
        if self.picard_iters < 1 || self.max_sweeps < self.picard_iters {
            return fail(format!(
                "need 1 <= picard_iters <= max_sweeps, got {} and {}",
                self.picard_iters, self.max_sweeps
            ));
        }
        if !(self.tolerance > 0.0) {
            return fail(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.initial.epsilon >= 0.0) || !self.initial.epsilon.is_finite() {
            return fail(format!("initial.epsilon must be nonnegative, got {}", self.initial.epsilon));
        }
        if !(self.output.interval > 0.0) {
            return fail(format!("output.interval must be positive, got {}", self.output.interval));
        }
        self.quadrature()?;
        Ok(())
    }

    pub fn quadrature(&self) -> Result<SphereQuadrature> {
        SphereQuadrature::product(self.sphere.polar_order, self.sphere.azimuth_order)
    }

    pub fn decay_exponent(&self) -> u32 {
        self.decay_k.or_else(|| self.norms.first().map(|s| s.k)).unwrap_or(0)
    }

    /// Checkpoint written next to the CSV.
    pub fn checkpoint_path(&self) -> PathBuf {
        self.output.path.with_extension("ckpt")
    }

    /// Small-data demonstration: `epsilon = 1e-3` Gaussian, `Lambda = 3`,
    /// `T = 10`, `k = N = 2` norms, sized to finish in about two minutes on one core.
    pub fn demo() -> Self {
        SimConfig {
            lambda: 3.0,
            scale_factor: "desitter".into(),
            grid: GridConfig { extent: 6.0, n: 12 },
            sphere: SphereConfig { polar_order: 4, azimuth_order: 8 },
            dt: 0.1,
            horizon: 10.0,
            picard_iters: 2,
            initial: InitialConfig { kind: "gaussian".into(), epsilon: 1e-3, params: BTreeMap::new() },
            norms: vec![NormSpec { k: 2, order: 2 }],
            output: OutputConfig { path: "run.csv".into(), interval: 0.1 },
            seed: 0,
            tolerance: default_tolerance(),
            max_sweeps: default_max_sweeps(),
            decay_k: None,
        }
    }
}
