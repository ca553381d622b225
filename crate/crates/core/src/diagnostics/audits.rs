use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::Serialize;

use crate::collision::gauss_legendre;
use crate::error::{Error, Result};
use crate::kinematics::{
    collision_map_determinant, mass_shell_energy, post_collision_covariant, postcollision_jacobian,
    CollisionGeometry, CovariantMomentum, FourVector, Vec3,
};

/// Largest orthonormal momentum magnitude drawn by [`audit_kinematics`].
pub const KINEMATICS_MAX_MOMENTUM: f64 = 10.0;

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    UnitSphere.sample(rng)
}

/// Vector with log-uniform magnitude in `[lo, hi]` and uniform direction.
fn log_uniform_vector(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    let r = (rng.gen_range(lo.ln()..hi.ln())).exp();
    unit(rng).map(|c| r * c)
}

/// Worst residuals of the kinematic identities over random collisions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KinematicsAudit {
    pub samples: usize,
    /// `max |s - 4 - h^2| / s`.
    pub identity: f64,
    /// Largest absolute component of `p + q - p' - q'`.
    pub conservation: f64,
    /// Largest `|p'.p' + 1|`, `|q'.q' + 1|`.
    pub mass_shell: f64,
    /// Largest `|Omega.Omega - 1|`.
    pub omega_norm: f64,
    /// Largest `|n.Omega|`.
    pub omega_orthogonality: f64,
    /// Samples violating `|p-q|/sqrt(p0 q0) <= h <= |p-q|`, `s <= 4 p0 q0` or `|p| <= p0`.
    pub bound_violations: usize,
}

impl KinematicsAudit {
    pub fn passed(&self) -> bool {
        self.identity <= 1e-10
            && self.conservation <= 1e-11
            && self.mass_shell <= 1e-11
            && self.omega_norm <= 1e-12
            && self.omega_orthogonality <= 1e-12
            && self.bound_violations == 0
    }
}

/// Resolves `samples` collisions of on-shell pairs with log-uniform momenta
/// up to [`KINEMATICS_MAX_MOMENTUM`] and uniform `omega`.
pub fn audit_kinematics(samples: usize, seed: u64) -> Result<KinematicsAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = KinematicsAudit { samples, ..Default::default() };
    for _ in 0..samples {
        let p = FourVector::on_shell(log_uniform_vector(&mut rng, 1e-3, KINEMATICS_MAX_MOMENTUM));
        let q = FourVector::on_shell(log_uniform_vector(&mut rng, 1e-3, KINEMATICS_MAX_MOMENTUM));
        let g = CollisionGeometry::resolve(p, q, unit(&mut rng))?;
        let d = g.defects();
        audit.identity = audit.identity.max(d.s_minus_4_minus_h2.abs() / g.s);
        audit.conservation = audit.conservation.max(d.momentum_conservation);
        audit.mass_shell = audit.mass_shell.max(d.mass_shell_p.abs()).max(d.mass_shell_q.abs());
        audit.omega_norm = audit.omega_norm.max(d.omega_norm.abs());
        audit.omega_orthogonality = audit.omega_orthogonality.max(d.omega_orthogonality.abs());

        let slack = 1.0 + 1e-12;
        let diff = (p - q).spatial();
        let dist = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
        let (p0, q0) = (p.time(), q.time());
        let ok = dist / (p0 * q0).sqrt() <= g.h * slack
            && g.h <= dist * slack + 1e-300
            && g.s <= 4.0 * p0 * q0 * slack
            && p.spatial().iter().map(|c| c * c).sum::<f64>().sqrt() <= p0;
        if !ok {
            audit.bound_violations += 1;
        }
    }
    Ok(audit)
}

/// Largest `(1+|p_*|^2) / ((1+|p_*'|^2)(1+|q_*'|^2))` over random collisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma43Audit {
    pub samples: usize,
    pub max_ratio: f64,
    pub worst_p: Vec3,
    pub worst_q: Vec3,
    pub worst_omega: Vec3,
    pub worst_scale: f64,
}

impl Lemma43Audit {
    pub const BOUND: f64 = 17.0;

    pub fn passed(&self) -> bool {
        self.max_ratio <= Self::BOUND
    }
}

/// Samples covariant momenta with log-uniform magnitudes in `[1e-3, 1e3]`,
/// uniform `omega`, and `R = e^u` with `u` uniform in `[-3, 3]`.
pub fn audit_lemma43(samples: usize, seed: u64) -> Result<Lemma43Audit> {
    if samples < 10_000 {
        return Err(Error::Domain(format!("need at least 10000 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = Lemma43Audit {
        samples,
        max_ratio: 0.0,
        worst_p: [0.0; 3],
        worst_q: [0.0; 3],
        worst_omega: [0.0; 3],
        worst_scale: 1.0,
    };
    for _ in 0..samples {
        let p = CovariantMomentum(log_uniform_vector(&mut rng, 1e-3, 1e3));
        let q = CovariantMomentum(log_uniform_vector(&mut rng, 1e-3, 1e3));
        let omega = unit(&mut rng);
        let scale = rng.gen_range(-3.0..3.0f64).exp();
        let (pp, qp) = post_collision_covariant(&p, &q, &omega, scale)?;
        let ratio = (1.0 + p.norm_sq()) / ((1.0 + pp.norm_sq()) * (1.0 + qp.norm_sq()));
        if ratio > audit.max_ratio {
            audit = Lemma43Audit { samples, max_ratio: ratio, worst_p: p.0, worst_q: q.0, worst_omega: omega, worst_scale: scale };
        }
    }
    Ok(audit)
}

/// `R^-3 ∫ (p^0)^m e^{-p^0} dp_*` with `p^0 = sqrt(1 + R^-2 |p_*|^2)`, by
/// composite Gauss-Legendre quadrature in `|p_*|` over `[0, 80 R]`.
pub fn audit_lemma42(scale: f64, m: i32) -> Result<f64> {
    if !(-2..=10).contains(&m) {
        return Err(Error::Domain(format!("exponent m must lie in [-2, 10], got {m}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!("scale factor must be positive, got {scale}")));
    }
    const PANELS: usize = 160;
    let (nodes, weights) = gauss_legendre(16);
    let width = 80.0 * scale / PANELS as f64;
    let mut sum = 0.0;
    for panel in 0..PANELS {
        let mid = (panel as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(&weights) {
            let r = mid + 0.5 * width * x;
            let p0 = mass_shell_energy(&CovariantMomentum([r, 0.0, 0.0]), scale)?;
            sum += 0.5 * width * w * r * r * p0.powi(m) * (-p0).exp();
        }
    }
    Ok(4.0 * PI * sum / scale.powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeterminantAudit {
    pub samples: usize,
    /// Largest `| |det J| / (p'0 q'0 / (p0 q0)) - 1 |`.
    pub max_relative_error: f64,
    /// Number of configurations with `det J >= 0`.
    pub orientation_preserving: usize,
}

impl DeterminantAudit {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= 1e-5
    }
}

/// Compares the finite-difference 6x6 collision-map determinant with
/// `p'0 q'0 / (p0 q0)` for covariant momenta with log-uniform magnitudes in
/// `[1e-2, 10]` and `R = e^u`, `u` uniform in `[-1, 1]`.
pub fn audit_jacobian_determinants(samples: usize, seed: u64) -> Result<DeterminantAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = DeterminantAudit { samples, max_relative_error: 0.0, orientation_preserving: 0 };
    for _ in 0..samples {
        let p = CovariantMomentum(log_uniform_vector(&mut rng, 1e-2, 10.0));
        let q = CovariantMomentum(log_uniform_vector(&mut rng, 1e-2, 10.0));
        let omega = unit(&mut rng);
        let scale = rng.gen_range(-1.0..1.0f64).exp();
        let det = collision_map_determinant(&p, &q, &omega, scale)?;
        let (pp, qp) = post_collision_covariant(&p, &q, &omega, scale)?;
        let expected = mass_shell_energy(&pp, scale)? * mass_shell_energy(&qp, scale)?
            / (mass_shell_energy(&p, scale)? * mass_shell_energy(&q, scale)?);
        audit.max_relative_error = audit.max_relative_error.max((det.abs() / expected - 1.0).abs());
        if det >= 0.0 {
            audit.orientation_preserving += 1;
        }
    }
    Ok(audit)
}

/// Spectral norm of `d p_*' / d p_*` along one ray `p_* = r d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthScan {
    pub q: Vec3,
    pub omega: Vec3,
    pub direction: Vec3,
    pub magnitudes: Vec<f64>,
    pub norms: Vec<f64>,
    /// `max norm / norm at |p_*| = 1`.
    pub ratio: f64,
    pub unreliable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthAudit {
    pub scans: Vec<GrowthScan>,
    pub max_ratio: f64,
}

impl GrowthAudit {
    pub const BOUND: f64 = 2.0;

    pub fn passed(&self) -> bool {
        self.max_ratio <= Self::BOUND && self.scans.iter().all(|s| s.unreliable == 0)
    }
}

/// Scans `|p_*|` over `points` log-spaced values in `[1, 1e3]` at `R = 1`,
/// for fixed `(q_*, omega)` pairs and several ray directions.
pub fn audit_jacobian_growth(points: usize) -> Result<GrowthAudit> {
    if points < 2 {
        return Err(Error::Domain("a growth scan needs at least 2 points".into()));
    }
    let s = 1.0 / 3f64.sqrt();
    let qs: [Vec3; 2] = [[0.5, -0.3, 0.2], [0.0, 0.0, 2.0]];
    let omegas: [Vec3; 3] = [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.48, 0.6, 0.64]];
    let directions: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [-s, s, -s]];
    let magnitudes: Vec<f64> = (0..points).map(|i| 10f64.powf(3.0 * i as f64 / (points - 1) as f64)).collect();
    let mut scans = Vec::new();
    for q in qs {
        for omega in omegas {
            for direction in directions {
                let mut norms = Vec::with_capacity(points);
                let mut unreliable = 0;
                for &r in &magnitudes {
                    let p = CovariantMomentum(direction.map(|c| c * r));
                    let jac = postcollision_jacobian(&p, &CovariantMomentum(q), &omega, 1.0, None)?;
                    if !jac.reliable {
                        unreliable += 1;
                    }
                    norms.push(jac.spectral_norm());
                }
                let ratio = norms.iter().copied().fold(0.0, f64::max) / norms[0];
                scans.push(GrowthScan { q, omega, direction, magnitudes: magnitudes.clone(), norms, ratio, unreliable });
            }
        }
    }
    let max_ratio = scans.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(GrowthAudit { scans, max_ratio })
}
