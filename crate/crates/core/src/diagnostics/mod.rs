//! Observables of a distribution on the momentum lattice and the property
//! audits of the kinematic and integral estimates.
//!
//! All sums run in lattice order on one thread, so every observable is a
//! deterministic function of the grid values.

mod audits;
mod norms;

pub use audits::{
    audit_jacobian_determinants, audit_jacobian_growth, audit_kinematics, audit_lemma42, audit_lemma43,
    DeterminantAudit, GrowthAudit, GrowthScan, KinematicsAudit, Lemma43Audit,
};
pub use norms::{derivative, weighted_norm, NormSpec};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::collision::DistributionGrid;
use crate::spacetime::MatterSource;

#[inline]
fn energy_at(p_sq: f64, scale: f64) -> f64 {
    (1.0 + p_sq / (scale * scale)).sqrt()
}

/// `rho = R^-3 ∫ f p^0 dp_*`.
pub fn energy_density(f: &DistributionGrid, scale: f64) -> f64 {
    let sum: f64 = (0..f.len()).map(|i| f.values()[i] * energy_at(f.momentum(i).norm_sq(), scale)).sum();
    sum * f.cell_volume() / scale.powi(3)
}

/// `P = R^-5 ∫ f |p_*|^2 / (3 p^0) dp_*`.
pub fn pressure(f: &DistributionGrid, scale: f64) -> f64 {
    let sum: f64 = (0..f.len())
        .map(|i| {
            let p_sq = f.momentum(i).norm_sq();
            f.values()[i] * p_sq / (3.0 * energy_at(p_sq, scale))
        })
        .sum();
    sum * f.cell_volume() / scale.powi(5)
}

/// Comoving particle number `∫ f dp_*`.
pub fn number_integral(f: &DistributionGrid) -> f64 {
    f.values().iter().sum::<f64>() * f.cell_volume()
}

/// `max_p f(p_*) <p_*>^k exp(p^0 / 2)`; bounded in time when `f` decays as
/// `<p_*>^-k exp(-p^0/2)`.
pub fn decay_envelope(f: &DistributionGrid, scale: f64, k: u32) -> f64 {
    (0..f.len())
        .map(|i| {
            let p_sq = f.momentum(i).norm_sq();
            f.values()[i] * (1.0 + p_sq).powf(0.5 * k as f64) * (0.5 * energy_at(p_sq, scale)).exp()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyConditions {
    /// `rho >= 0`.
    pub wec: bool,
    /// `|P| <= rho`.
    pub dec: bool,
}

pub fn energy_conditions(rho: f64, pressure: f64) -> EnergyConditions {
    EnergyConditions { wec: rho >= 0.0, dec: pressure.abs() <= rho }
}

impl MatterSource for DistributionGrid {
    fn energy_density(&self, scale: f64) -> f64 {
        energy_density(self, scale)
    }

    fn pressure(&self, scale: f64) -> f64 {
        pressure(self, scale)
    }
}

/// One row of the diagnostics time series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "R")]
    pub scale: f64,
    pub rho: f64,
    #[serde(rename = "P")]
    pub pressure: f64,
    pub number_integral: f64,
    /// One entry per configured [`NormSpec`], in order.
    pub norms: Vec<f64>,
    pub decay_envelope: f64,
    pub leakage: f64,
    pub continuity_residual: f64,
}

impl DiagnosticsRecord {
    /// Observables of `f` at `(t, R)`; leakage and continuity residual are filled in by the caller.
    pub fn observe(f: &DistributionGrid, t: f64, scale: f64, norms: &[NormSpec], decay_k: u32) -> Self {
        DiagnosticsRecord {
            t,
            scale,
            rho: energy_density(f, scale),
            pressure: pressure(f, scale),
            number_integral: number_integral(f),
            norms: norms.iter().map(|spec| weighted_norm(f, *spec, scale)).collect(),
            decay_envelope: decay_envelope(f, scale, decay_k),
            leakage: 0.0,
            continuity_residual: 0.0,
        }
    }

    pub fn energy_conditions(&self) -> EnergyConditions {
        energy_conditions(self.rho, self.pressure)
    }
}

/// CSV header matching [`write_csv_row`].
pub fn csv_header(norms: &[NormSpec]) -> String {
    let mut cols = vec!["t".to_string(), "R".into(), "rho".into(), "P".into(), "number_integral".into()];
    cols.extend(norms.iter().map(|s| format!("norm_k{}_N{}", s.k, s.order)));
    cols.extend(["decay_envelope".into(), "leakage".into(), "continuity_residual".into()]);
    cols.join(",")
}

/// Writes one record with 17 significant digits per value.
pub fn write_csv_row(out: &mut impl Write, record: &DiagnosticsRecord) -> std::io::Result<()> {
    let mut values = vec![record.t, record.scale, record.rho, record.pressure, record.number_integral];
    values.extend(&record.norms);
    values.extend([record.decay_envelope, record.leakage, record.continuity_residual]);
    let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", line.join(","))
}

/// Header plus all rows.
pub fn write_csv(out: &mut impl Write, norms: &[NormSpec], records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header(norms))?;
    records.iter().try_for_each(|r| write_csv_row(out, r))
}
