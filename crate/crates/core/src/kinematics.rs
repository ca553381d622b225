//! Two-body collision kinematics for unit-mass particles.
//!
//! Everything is computed in the orthonormal frame `p̂ = p_* / R` and mapped
//! back to covariant components at the end. The only exception is
//! [`post_collision_covariant_direct`], which evaluates the covariant
//! post-collision formula term by term and serves as an independent route
//! for consistency checks.
//!
//! Metric signature is `(-,+,+,+)`; on-shell momenta satisfy `p_a p^a = -1`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|p_a p^a + 1| / max(1, (p^0)^2)` for input validation.
pub const ON_SHELL_TOLERANCE: f64 = 1e-9;

/// Tolerance on `| |omega| - 1 |` for collision parameters.
pub const UNIT_TOLERANCE: f64 = 1e-9;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm_sq3(a: &Vec3) -> f64 {
    dot3(a, a)
}

#[inline]
pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Covariant spatial momentum `p_* = (p_1, p_2, p_3)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariantMomentum(pub Vec3);

impl CovariantMomentum {
    pub const ZERO: Self = CovariantMomentum([0.0; 3]);

    pub fn new(p1: f64, p2: f64, p3: f64) -> Self {
        CovariantMomentum([p1, p2, p3])
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq3(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// The weight `<p_*> = sqrt(1 + |p_*|^2)`. Not the energy: see [`mass_shell_energy`].
    pub fn weight(&self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// On-shell four-momentum in the orthonormal frame, `p̂ = p_* / R`.
    pub fn to_orthonormal(&self, scale: f64) -> FourVector {
        let inv = 1.0 / scale;
        FourVector::on_shell([self.0[0] * inv, self.0[1] * inv, self.0[2] * inv])
    }

    /// Inverse of [`to_orthonormal`](Self::to_orthonormal): `p_* = R p̂`.
    pub fn from_orthonormal(v: &FourVector, scale: f64) -> Self {
        let s = v.spatial();
        CovariantMomentum([scale * s[0], scale * s[1], scale * s[2]])
    }
}

/// Contravariant four-vector `(x^0, x^1, x^2, x^3)` in an orthonormal frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        FourVector([x0, x1, x2, x3])
    }

    pub fn from_parts(x0: f64, spatial: Vec3) -> Self {
        FourVector([x0, spatial[0], spatial[1], spatial[2]])
    }

    /// Future-pointing unit-mass momentum with the given spatial part.
    pub fn on_shell(spatial: Vec3) -> Self {
        Self::from_parts((1.0 + norm_sq3(&spatial)).sqrt(), spatial)
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> Vec3 {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Minkowski product `x_a y^a` with signature `(-,+,+,+)`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        -self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2] + self.0[3] * other.0[3]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `x_a x^a + 1`, evaluated as `(e - x^0)(e + x^0)` with `e = sqrt(1 + |x|^2)`
    /// so that the defect of large momenta is not swamped by cancellation.
    pub fn shell_defect(&self) -> f64 {
        let e = (1.0 + norm_sq3(&self.spatial())).sqrt();
        (e - self.0[0]) * (e + self.0[0])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn max_abs_diff(&self, other: &FourVector) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, rhs: f64) -> FourVector {
        FourVector(self.0.map(|c| c * rhs))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

fn check_on_shell(v: &FourVector) -> Result<()> {
    if !v.is_finite() || v.time() <= 0.0 {
        return Err(Error::Domain(format!("not a future-pointing momentum: {:?}", v.0)));
    }
    let defect = v.shell_defect();
    if defect.abs() > ON_SHELL_TOLERANCE * v.time().powi(2).max(1.0) {
        return Err(Error::OffShell { defect });
    }
    Ok(())
}

fn check_unit(omega: &Vec3) -> Result<()> {
    let len = norm_sq3(omega).sqrt();
    if !len.is_finite() || (len - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Domain(format!("omega is not a unit vector: |omega| = {len}")));
    }
    Ok(())
}

/// Energy `p^0 = sqrt(1 + R^-2 |p_*|^2)` of a covariant momentum at scale factor `R`.
pub fn mass_shell_energy(p: &CovariantMomentum, scale: f64) -> Result<f64> {
    if !p.is_finite() || !scale.is_finite() {
        return Err(Error::Domain("non-finite momentum or scale factor".into()));
    }
    if scale <= 0.0 {
        return Err(Error::Domain(format!("scale factor must be positive, got {scale}")));
    }
    Ok((1.0 + p.norm_sq() / (scale * scale)).sqrt())
}

/// Relative momentum and total energy `(h, s)` of an on-shell pair.
///
/// Both are evaluated through cancellation-free rearrangements of
/// `h^2 = (p-q)_a (p-q)^a` and `s = -(p+q)_a (p+q)^a` (Lagrange identity for
/// `p^0 q^0 - p.q`, and `|u|^2 n0^2 - (u.n)^2 = |u|^2 s + |u x n|^2`), so the
/// identity `s = 4 + h^2` survives to full relative precision even for
/// nearly collinear ultra-relativistic pairs.
pub fn invariants_h_s(p: &FourVector, q: &FourVector) -> Result<(f64, f64)> {
    check_on_shell(p)?;
    check_on_shell(q)?;
    Ok(invariants_unchecked(p, q))
}

#[inline]
pub(crate) fn invariants_unchecked(p: &FourVector, q: &FourVector) -> (f64, f64) {
    let (ps, qs) = (p.spatial(), q.spatial());
    let s = total_energy(p.time(), &ps, q.time(), &qs);
    let u = [ps[0] - qs[0], ps[1] - qs[1], ps[2] - qs[2]];
    let n = [ps[0] + qs[0], ps[1] + qs[1], ps[2] + qs[2]];
    let n0 = p.time() + q.time();
    let h2 = (norm_sq3(&u) * s + norm_sq3(&cross3(&u, &n))) / (n0 * n0);
    (h2.sqrt(), s)
}

#[inline]
pub(crate) fn total_energy(p0: f64, p: &Vec3, q0: f64, q: &Vec3) -> f64 {
    let pq = dot3(p, q);
    if pq > 0.0 {
        let num = 1.0 + norm_sq3(p) + norm_sq3(q) + norm_sq3(&cross3(p, q));
        2.0 + 2.0 * num / (p0 * q0 + pq)
    } else {
        2.0 + 2.0 * (p0 * q0 - pq)
    }
}

/// Moller velocity `v_M = h sqrt(s) / (4 p^0 q^0)`.
pub fn moller_velocity(p: &FourVector, q: &FourVector) -> Result<f64> {
    let (h, s) = invariants_h_s(p, q)?;
    Ok(h * s.sqrt() / (4.0 * p.time() * q.time()))
}

/// Unit spacelike `Omega^a` orthogonal to the total momentum `n`, obtained by
/// boosting `(0, omega)` out of the centre-of-momentum frame.
pub fn boost_omega(n: &FourVector, s: f64, omega: &Vec3) -> Result<FourVector> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("total energy must be positive, got s = {s}")));
    }
    check_unit(omega)?;
    let sqrt_s = s.sqrt();
    let ns = n.spatial();
    let n_omega = dot3(&ns, omega);
    let factor = n_omega / (sqrt_s * (n.time() + sqrt_s));
    Ok(FourVector::from_parts(
        n_omega / sqrt_s,
        [omega[0] + factor * ns[0], omega[1] + factor * ns[1], omega[2] + factor * ns[2]],
    ))
}

/// `q_b Omega^b`, written as the centre-of-momentum projection
/// `(1/2) [u.omega - (n.omega)(n.u) / (n^0 (n^0 + sqrt s))]` with `u = q - p`.
/// Algebraically identical to the Minkowski product on shell; vanishes exactly for `p = q`.
#[inline]
fn exchange_coefficient(n0: f64, n: &Vec3, u: &Vec3, sqrt_s: f64, omega: &Vec3) -> f64 {
    0.5 * (dot3(u, omega) - dot3(n, omega) * dot3(n, u) / (n0 * (n0 + sqrt_s)))
}

/// Post-collision momenta `p' = p + 2 (q.Omega) Omega`, `q' = q - 2 (q.Omega) Omega`
/// in the orthonormal frame.
pub fn post_collision(p: &FourVector, q: &FourVector, omega: &Vec3) -> Result<(FourVector, FourVector)> {
    check_on_shell(p)?;
    check_on_shell(q)?;
    check_unit(omega)?;
    Ok(post_collision_unchecked(p, q, omega))
}

#[inline]
pub(crate) fn post_collision_unchecked(p: &FourVector, q: &FourVector, omega: &Vec3) -> (FourVector, FourVector) {
    let (ps, qs) = (p.spatial(), q.spatial());
    let s = total_energy(p.time(), &ps, q.time(), &qs);
    let sqrt_s = s.sqrt();
    let n0 = p.time() + q.time();
    let n = [ps[0] + qs[0], ps[1] + qs[1], ps[2] + qs[2]];
    let u = [qs[0] - ps[0], qs[1] - ps[1], qs[2] - ps[2]];
    let c2 = 2.0 * exchange_coefficient(n0, &n, &u, sqrt_s, omega);
    let n_omega = dot3(&n, omega);
    let factor = n_omega / (sqrt_s * (n0 + sqrt_s));
    let big_omega = FourVector::from_parts(
        n_omega / sqrt_s,
        [omega[0] + factor * n[0], omega[1] + factor * n[1], omega[2] + factor * n[2]],
    );
    (*p + big_omega * c2, *q - big_omega * c2)
}

/// Post-collision covariant momenta, computed in the orthonormal frame.
pub fn post_collision_covariant(
    p: &CovariantMomentum,
    q: &CovariantMomentum,
    omega: &Vec3,
    scale: f64,
) -> Result<(CovariantMomentum, CovariantMomentum)> {
    mass_shell_energy(p, scale)?;
    mass_shell_energy(q, scale)?;
    check_unit(omega)?;
    let (pp, qp) = post_collision_unchecked(&p.to_orthonormal(scale), &q.to_orthonormal(scale), omega);
    Ok((CovariantMomentum::from_orthonormal(&pp, scale), CovariantMomentum::from_orthonormal(&qp, scale)))
}

/// Post-collision covariant momenta from the covariant-component formula,
/// without passing through the orthonormal frame. Returns `(p'^0, p'_*, q'^0, q'_*)`
/// with `q'_a = p_a + q_a - p'_a`.
pub fn post_collision_covariant_direct(
    p: &CovariantMomentum,
    q: &CovariantMomentum,
    omega: &Vec3,
    scale: f64,
) -> Result<(f64, CovariantMomentum, f64, CovariantMomentum)> {
    let p0 = mass_shell_energy(p, scale)?;
    let q0 = mass_shell_energy(q, scale)?;
    check_unit(omega)?;
    let r2 = scale * scale;
    let n0 = p0 + q0;
    let n = [p.0[0] + q.0[0], p.0[1] + q.0[1], p.0[2] + q.0[2]];
    // s = -n_a n^a with n^b = R^-2 n_b for spatial indices
    let s = n0 * n0 - norm_sq3(&n) / r2;
    let sqrt_s = s.sqrt();
    let n_omega = dot3(&n, omega);
    let n_q_raised = dot3(&n, &q.0) / r2;
    let coeff = -q0 * n_omega / sqrt_s + dot3(&q.0, omega) + n_omega * n_q_raised / (sqrt_s * (n0 + sqrt_s));
    let p0_new = p0 + 2.0 * coeff * n_omega / (r2 * sqrt_s);
    let tail = n_omega / (r2 * sqrt_s * (n0 + sqrt_s));
    let p_new: Vec3 = std::array::from_fn(|k| p.0[k] + 2.0 * coeff * (omega[k] + tail * n[k]));
    let q_new: Vec3 = std::array::from_fn(|k| n[k] - p_new[k]);
    Ok((p0_new, CovariantMomentum(p_new), n0 - p0_new, CovariantMomentum(q_new)))
}

/// Scattering angle `theta` in `[0, pi]` from `((p-q)_a Omega^a)^2 = h^2 sin^2(theta/2)`.
pub fn scattering_angle(p: &FourVector, q: &FourVector, big_omega: &FourVector) -> Result<f64> {
    let (h, _) = invariants_h_s(p, q)?;
    if !(h > 1e-14 * p.time().max(q.time())) {
        return Err(Error::UndefinedAngle);
    }
    let projection = (*p - *q).dot(big_omega).abs();
    Ok(2.0 * (projection / h).min(1.0).asin())
}

/// A fully resolved binary collision in the orthonormal frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionGeometry {
    pub p_hat: FourVector,
    pub q_hat: FourVector,
    pub omega: Vec3,
    pub h: f64,
    pub s: f64,
    pub n: FourVector,
    #[serde(rename = "Omega")]
    pub big_omega: FourVector,
    pub p_prime: FourVector,
    pub q_prime: FourVector,
}

impl CollisionGeometry {
    pub fn resolve(p_hat: FourVector, q_hat: FourVector, omega: Vec3) -> Result<Self> {
        let (h, s) = invariants_h_s(&p_hat, &q_hat)?;
        let n = p_hat + q_hat;
        let big_omega = boost_omega(&n, s, &omega)?;
        let (p_prime, q_prime) = post_collision(&p_hat, &q_hat, &omega)?;
        Ok(CollisionGeometry { p_hat, q_hat, omega, h, s, n, big_omega, p_prime, q_prime })
    }

    pub fn scattering_angle(&self) -> Result<f64> {
        scattering_angle(&self.p_hat, &self.q_hat, &self.big_omega)
    }

    pub fn defects(&self) -> GeometryDefects {
        let total_in = self.p_hat + self.q_hat;
        let total_out = self.p_prime + self.q_prime;
        GeometryDefects {
            s_minus_4_minus_h2: self.s - 4.0 - self.h * self.h,
            omega_norm: self.big_omega.norm_sq() - 1.0,
            omega_orthogonality: self.n.dot(&self.big_omega),
            momentum_conservation: total_in.max_abs_diff(&total_out),
            mass_shell_p: self.p_prime.shell_defect(),
            mass_shell_q: self.q_prime.shell_defect(),
        }
    }
}

/// Residuals of the identities a [`CollisionGeometry`] must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryDefects {
    pub s_minus_4_minus_h2: f64,
    pub omega_norm: f64,
    pub omega_orthogonality: f64,
    pub momentum_conservation: f64,
    pub mass_shell_p: f64,
    pub mass_shell_q: f64,
}

impl GeometryDefects {
    pub fn max_abs(&self) -> f64 {
        [
            self.s_minus_4_minus_h2,
            self.omega_norm,
            self.omega_orthogonality,
            self.momentum_conservation,
            self.mass_shell_p,
            self.mass_shell_q,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

/// Gradient of `1/p^0` with respect to `p_*`: `-R^-2 p_a (p^0)^-3`.
pub fn deriv_inv_p0(p: &CovariantMomentum, scale: f64) -> Result<Vec3> {
    let p0 = mass_shell_energy(p, scale)?;
    let c = -1.0 / (scale * scale * p0 * p0 * p0);
    Ok(p.0.map(|pa| c * pa))
}

/// Default central-difference step for derivative audits at `|x|`.
pub fn default_fd_step(magnitude: f64) -> f64 {
    1e-5 * magnitude.max(1.0)
}

/// Relative Richardson defect above which a finite-difference Jacobian is flagged.
pub const RICHARDSON_TOLERANCE: f64 = 1e-5;

/// Finite-difference estimate of `d p_*' / d p_*` at fixed `(q_*, omega, R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianEstimate {
    pub matrix: Matrix3<f64>,
    pub step: f64,
    /// `max |J(h) - J(h/2)| / max(1, max |J|)`.
    pub richardson_defect: f64,
    pub reliable: bool,
}

impl JacobianEstimate {
    pub fn spectral_norm(&self) -> f64 {
        self.matrix.singular_values().max()
    }
}

fn central_jacobian3(
    p: &CovariantMomentum,
    q: &CovariantMomentum,
    omega: &Vec3,
    scale: f64,
    step: f64,
) -> Result<Matrix3<f64>> {
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let mut plus = *p;
        let mut minus = *p;
        plus.0[j] += step;
        minus.0[j] -= step;
        let (fp, _) = post_collision_covariant(&plus, q, omega, scale)?;
        let (fm, _) = post_collision_covariant(&minus, q, omega, scale)?;
        for i in 0..3 {
            jac[(i, j)] = (fp.0[i] - fm.0[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Central-difference Jacobian of the post-collision map in `p_*`.
///
/// `step` defaults to [`default_fd_step`]. The estimate is repeated at half
/// the step; the discrepancy is reported as the Richardson defect and
/// estimates above [`RICHARDSON_TOLERANCE`] are flagged unreliable.
pub fn postcollision_jacobian(
    p: &CovariantMomentum,
    q: &CovariantMomentum,
    omega: &Vec3,
    scale: f64,
    step: Option<f64>,
) -> Result<JacobianEstimate> {
    let step = step.unwrap_or_else(|| default_fd_step(p.norm()));
    if !(step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {step}")));
    }
    let coarse = central_jacobian3(p, q, omega, scale, step)?;
    let fine = central_jacobian3(p, q, omega, scale, 0.5 * step)?;
    let scale_ref = coarse.amax().max(1.0);
    let richardson_defect = (coarse - fine).amax() / scale_ref;
    Ok(JacobianEstimate {
        matrix: coarse,
        step,
        richardson_defect,
        reliable: richardson_defect <= RICHARDSON_TOLERANCE,
    })
}

/// Determinant of the central-difference 6x6 Jacobian of
/// `(p_*, q_*) -> (p_*', q_*')` at fixed `omega`.
///
/// The map reverses orientation, so the determinant is negative; the measure
/// identity `(p0 q0)^-1 dp dq = (p'0 q'0)^-1 dp' dq'` concerns its absolute value.
pub fn collision_map_determinant(
    p: &CovariantMomentum,
    q: &CovariantMomentum,
    omega: &Vec3,
    scale: f64,
) -> Result<f64> {
    let x: [f64; 6] = [p.0[0], p.0[1], p.0[2], q.0[0], q.0[1], q.0[2]];
    let map = |x: &[f64; 6]| -> Result<[f64; 6]> {
        let (pp, qp) = post_collision_covariant(
            &CovariantMomentum([x[0], x[1], x[2]]),
            &CovariantMomentum([x[3], x[4], x[5]]),
            omega,
            scale,
        )?;
        Ok([pp.0[0], pp.0[1], pp.0[2], qp.0[0], qp.0[1], qp.0[2]])
    };
    let mut jac = Matrix6::zeros();
    for j in 0..6 {
        let step = default_fd_step(x[j].abs());
        let mut plus = x;
        let mut minus = x;
        plus[j] += step;
        minus[j] -= step;
        let (fp, fm) = (map(&plus)?, map(&minus)?);
        for i in 0..6 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(jac.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn boosted_x() -> FourVector {
        FourVector::new(SQRT_2, 1.0, 0.0, 0.0)
    }

    fn rest() -> FourVector {
        FourVector::new(1.0, 0.0, 0.0, 0.0)
    }

    #[test]
    fn mass_shell_energy_examples() {
        assert_eq!(mass_shell_energy(&CovariantMomentum::ZERO, 1.0).unwrap(), 1.0);
        assert_relative_eq!(mass_shell_energy(&CovariantMomentum::new(1.0, 0.0, 0.0), 1.0).unwrap(), SQRT_2);
        assert_relative_eq!(mass_shell_energy(&CovariantMomentum::new(3.0, 0.0, 0.0), 3.0).unwrap(), SQRT_2);
        assert!(mass_shell_energy(&CovariantMomentum::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
        assert!(mass_shell_energy(&CovariantMomentum::ZERO, 0.0).is_err());
    }

    #[test]
    fn invariants_examples() {
        let (h, s) = invariants_h_s(&boosted_x(), &boosted_x()).unwrap();
        assert_eq!((h, s), (0.0, 4.0));

        let (h, s) = invariants_h_s(&boosted_x(), &rest()).unwrap();
        assert_relative_eq!(h * h, 2.0 * SQRT_2 - 2.0, max_relative = 1e-14);
        assert_relative_eq!(s, 2.0 + 2.0 * SQRT_2, max_relative = 1e-14);

        let (h, s) = invariants_h_s(&boosted_x(), &FourVector::new(SQRT_2, -1.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(h, 2.0, max_relative = 1e-14);
        assert_relative_eq!(s, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn invariants_reject_off_shell() {
        let bad = FourVector::new(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(invariants_h_s(&bad, &rest()), Err(Error::OffShell { .. })));
    }

    #[test]
    fn ultra_relativistic_collinear_pair_keeps_identity() {
        let p = FourVector::on_shell([2.0e4, 1.0, 0.0]);
        let q = FourVector::on_shell([2.0e4 + 1e-3, 1.0, 0.0]);
        let (h, s) = invariants_h_s(&p, &q).unwrap();
        assert!((s - 4.0 - h * h).abs() <= 1e-12 * s);
    }

    #[test]
    fn moller_velocity_examples() {
        assert_eq!(moller_velocity(&boosted_x(), &boosted_x()).unwrap(), 0.0);
        let (h, s) = invariants_h_s(&boosted_x(), &rest()).unwrap();
        assert_relative_eq!(
            moller_velocity(&boosted_x(), &rest()).unwrap(),
            h * s.sqrt() / (4.0 * SQRT_2),
            max_relative = 1e-14
        );
        let q = FourVector::on_shell([0.3, -0.7, 2.0]);
        assert_eq!(moller_velocity(&boosted_x(), &q).unwrap(), moller_velocity(&q, &boosted_x()).unwrap());
    }

    #[test]
    fn boost_omega_examples() {
        let omega = [0.6, 0.0, 0.8];
        let big = boost_omega(&FourVector::new(2.0, 0.0, 0.0, 0.0), 4.0, &omega).unwrap();
        assert_eq!(big, FourVector::new(0.0, 0.6, 0.0, 0.8));

        let n = boosted_x() + rest();
        let s = 2.0 + 2.0 * SQRT_2;
        let big = boost_omega(&n, s, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(big, FourVector::new(0.0, 0.0, 0.0, 1.0));

        let big = boost_omega(&n, s, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(big.time(), 1.0 / (2.0 + 2.0 * SQRT_2).sqrt(), max_relative = 1e-14);
        assert!(n.dot(&big).abs() < 1e-12);
        assert!((big.norm_sq() - 1.0).abs() < 1e-12);

        assert!(boost_omega(&n, 0.0, &[1.0, 0.0, 0.0]).is_err());
        assert!(boost_omega(&n, s, &[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn post_collision_examples() {
        let omega = [0.0, 0.6, 0.8];
        let (pp, qp) = post_collision(&boosted_x(), &boosted_x(), &omega).unwrap();
        assert_eq!((pp, qp), (boosted_x(), boosted_x()));

        let (pp, qp) = post_collision(&boosted_x(), &rest(), &[0.0, 0.0, 1.0]).unwrap();
        assert!(pp.max_abs_diff(&boosted_x()) < 1e-15);
        assert!(qp.max_abs_diff(&rest()) < 1e-15);

        let (pp, qp) = post_collision(&boosted_x(), &rest(), &[1.0, 0.0, 0.0]).unwrap();
        assert!(pp.max_abs_diff(&rest()) < 1e-12, "{pp:?}");
        assert!(qp.max_abs_diff(&boosted_x()) < 1e-12, "{qp:?}");
        assert!((pp + qp).max_abs_diff(&(boosted_x() + rest())) < 1e-12);
        assert!(pp.shell_defect().abs() < 1e-12 && qp.shell_defect().abs() < 1e-12);
    }

    #[test]
    fn covariant_routes_agree() {
        let p = CovariantMomentum::new(0.4, -1.3, 2.2);
        let q = CovariantMomentum::new(-0.9, 0.1, 0.5);
        let omega = [0.48, 0.6, 0.64];
        for scale in [1.0, 0.37, 4.2] {
            let (pp, qp) = post_collision_covariant(&p, &q, &omega, scale).unwrap();
            let (p0d, ppd, q0d, qpd) = post_collision_covariant_direct(&p, &q, &omega, scale).unwrap();
            for k in 0..3 {
                assert!((pp.0[k] - ppd.0[k]).abs() < 1e-12);
                assert!((qp.0[k] - qpd.0[k]).abs() < 1e-12);
            }
            assert!((p0d - mass_shell_energy(&pp, scale).unwrap()).abs() < 1e-12);
            assert!((q0d - mass_shell_energy(&qp, scale).unwrap()).abs() < 1e-12);
        }
        // R = 1 coincides with the orthonormal frame
        let (pp, _) = post_collision_covariant(&p, &q, &omega, 1.0).unwrap();
        let (pp_hat, _) = post_collision(&p.to_orthonormal(1.0), &q.to_orthonormal(1.0), &omega).unwrap();
        assert_eq!(pp.0, pp_hat.spatial());
        // identical momenta are left alone
        let (pp, qp) = post_collision_covariant(&p, &p, &omega, 2.0).unwrap();
        assert_eq!((pp, qp), (p, p));
    }

    #[test]
    fn scattering_angle_examples() {
        let g = CollisionGeometry::resolve(boosted_x(), rest(), [1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g.scattering_angle().unwrap(), PI, max_relative = 1e-6);

        let g = CollisionGeometry::resolve(boosted_x(), rest(), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.scattering_angle().unwrap(), 0.0);

        let g = CollisionGeometry::resolve(boosted_x(), boosted_x(), [0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(g.scattering_angle(), Err(Error::UndefinedAngle)));
    }

    #[test]
    fn geometry_defects_small() {
        let g = CollisionGeometry::resolve(
            FourVector::on_shell([1.5, -0.2, 3.0]),
            FourVector::on_shell([-0.7, 0.9, 0.1]),
            [0.36, 0.48, 0.8],
        )
        .unwrap();
        assert!(g.defects().max_abs() < 1e-12, "{:?}", g.defects());
    }

    #[test]
    fn deriv_inv_p0_examples() {
        assert_eq!(deriv_inv_p0(&CovariantMomentum::ZERO, 1.0).unwrap(), [0.0; 3]);
        let g = deriv_inv_p0(&CovariantMomentum::new(1.0, 0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(g[0], -(2.0f64).powf(-1.5), max_relative = 1e-14);
        assert_eq!((g[1], g[2]), (0.0, 0.0));

        // finite-difference oracle on 1/sqrt(1 + |p|^2/R^2)
        let p = CovariantMomentum::new(0.7, -2.0, 1.1);
        let scale = 1.7;
        let inv = |x: &CovariantMomentum| 1.0 / (1.0 + x.norm_sq() / (scale * scale)).sqrt();
        let g = deriv_inv_p0(&p, scale).unwrap();
        for a in 0..3 {
            let h = 1e-5;
            let (mut plus, mut minus) = (p, p);
            plus.0[a] += h;
            minus.0[a] -= h;
            let fd = (inv(&plus) - inv(&minus)) / (2.0 * h);
            assert_relative_eq!(g[a], fd, max_relative = 1e-6);
        }

        // gradient at (R p, R) is R^-1 times gradient at (p, 1)
        let base = deriv_inv_p0(&p, 1.0).unwrap();
        let scaled = deriv_inv_p0(&CovariantMomentum(p.0.map(|c| c * scale)), scale).unwrap();
        for a in 0..3 {
            assert_relative_eq!(scaled[a], base[a] / scale, max_relative = 1e-13);
        }
    }

    #[test]
    fn jacobian_at_rest_pair_is_finite_and_consistent() {
        let est = postcollision_jacobian(&CovariantMomentum::ZERO, &CovariantMomentum::ZERO, &[0.0, 0.0, 1.0], 1.0, None)
            .unwrap();
        assert!(est.matrix.iter().all(|x| x.is_finite()));
        assert!(est.reliable, "defect {}", est.richardson_defect);

        let est = postcollision_jacobian(
            &CovariantMomentum::new(1.0, 0.0, 0.0),
            &CovariantMomentum::ZERO,
            &[1.0, 0.0, 0.0],
            1.0,
            None,
        )
        .unwrap();
        assert!(est.matrix.iter().all(|x| x.is_finite()));
        assert!(est.reliable);
    }

    #[test]
    fn oversized_step_is_flagged() {
        let est = postcollision_jacobian(
            &CovariantMomentum::new(0.3, 0.2, -0.1),
            &CovariantMomentum::new(-0.5, 0.4, 0.0),
            &[0.6, 0.0, 0.8],
            1.0,
            Some(0.5),
        )
        .unwrap();
        assert!(!est.reliable);
    }

    #[test]
    fn determinant_matches_energy_ratio() {
        let p = CovariantMomentum::new(0.4, -1.3, 2.2);
        let q = CovariantMomentum::new(-0.9, 0.1, 0.5);
        let omega = [0.48, 0.6, 0.64];
        let scale = 1.3;
        let det = collision_map_determinant(&p, &q, &omega, scale).unwrap();
        let (pp, qp) = post_collision_covariant(&p, &q, &omega, scale).unwrap();
        let e = |x: &CovariantMomentum| mass_shell_energy(x, scale).unwrap();
        let expected = e(&pp) * e(&qp) / (e(&p) * e(&q));
        assert!(det < 0.0);
        assert_relative_eq!(det.abs(), expected, max_relative = 1e-5);
    }
}
