use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{kernel_weight, CollisionOperator, DistributionGrid};
use crate::error::{Error, Result};
use crate::kinematics::{mass_shell_energy, post_collision, CovariantMomentum, FourVector};

pub const MIN_MC_SAMPLES: usize = 1000;

/// Monte Carlo estimates of `Q+` and `Q-` at one momentum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct McEstimate {
    pub gain: f64,
    pub loss: f64,
    pub stderr_gain: f64,
    pub stderr_loss: f64,
}

/// Samples `q_*` uniformly over the cube and `ω` uniformly over the sphere and
/// averages the collision integrands of the interpolated distribution.
///
/// Independent of the lattice quadrature: it goes through the checked
/// [`post_collision`] route and never touches the sphere rule.
pub fn mc_estimate(
    f: &DistributionGrid,
    p: &CovariantMomentum,
    scale: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_MC_SAMPLES} samples, got {n_samples}")));
    }
    let p0 = mass_shell_energy(p, scale)?;
    let p_hat = p.to_orthonormal(scale);
    let fp = f.interpolate(p).unwrap_or(0.0);
    let extent = f.extent();
    let volume = (2.0 * extent).powi(3) * 4.0 * PI / scale.powi(3);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum_g, mut sum_g2, mut sum_l, mut sum_l2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n_samples {
        let q = CovariantMomentum(std::array::from_fn(|_| rng.gen_range(-extent..extent)));
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let rho = (1.0 - z * z).sqrt();
        let omega = [rho * phi.cos(), rho * phi.sin(), z];

        let q_hat = q.to_orthonormal(scale);
        let q0 = q_hat.time();
        let s = -(p_hat + q_hat).norm_sq();
        let kernel = kernel_weight(p0, q0, s);

        let (pp, qp) = post_collision(&p_hat, &q_hat, &omega)?;
        let lift = |v: &FourVector| CovariantMomentum::from_orthonormal(v, scale);
        let g = match (f.interpolate(&lift(&pp)), f.interpolate(&lift(&qp))) {
            (Some(a), Some(b)) => volume * kernel * a * b,
            _ => 0.0,
        };
        let l = volume * kernel * fp * f.interpolate(&q).unwrap_or(0.0);
        sum_g += g;
        sum_g2 += g * g;
        sum_l += l;
        sum_l2 += l * l;
    }
    let n = n_samples as f64;
    let stderr = |sum: f64, sum2: f64| {
        let mean = sum / n;
        ((sum2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
    };
    Ok(McEstimate {
        gain: sum_g / n,
        loss: sum_l / n,
        stderr_gain: stderr(sum_g, sum_g2),
        stderr_loss: stderr(sum_l, sum_l2),
    })
}

/// Deterministic and Monte Carlo collision terms at one lattice point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleRow {
    pub index: usize,
    pub p: CovariantMomentum,
    pub gain: f64,
    pub loss: f64,
    pub mc: McEstimate,
}

fn z_score(value: f64, estimate: f64, stderr: f64) -> f64 {
    let diff = value - estimate;
    if diff == 0.0 {
        0.0
    } else {
        diff / stderr
    }
}

impl OracleRow {
    pub fn z_gain(&self) -> f64 {
        z_score(self.gain, self.mc.gain, self.mc.stderr_gain)
    }

    pub fn z_loss(&self) -> f64 {
        z_score(self.loss, self.mc.loss, self.mc.stderr_loss)
    }

    /// Both deterministic terms within `k` standard errors of the estimates.
    pub fn within(&self, k: f64) -> bool {
        self.z_gain().abs() <= k && self.z_loss().abs() <= k
    }
}

/// Compares the lattice quadrature with [`mc_estimate`] at `points` distinct lattice
/// points drawn uniformly from those with `|p_*| <= P_max / 2`.
///
/// One seeded stream picks the points and the per-point Monte Carlo seeds.
pub fn compare_with_quadrature(
    f: &DistributionGrid,
    operator: &CollisionOperator,
    scale: f64,
    points: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<OracleRow>> {
    let inner: Vec<usize> =
        (0..f.len()).filter(|&i| f.momentum(i).norm() <= 0.5 * f.extent()).collect();
    if inner.is_empty() {
        return Err(Error::Domain("no lattice points inside half the cube".into()));
    }
    if points > inner.len() {
        return Err(Error::Domain(format!("asked for {points} points, only {} lie inside half the cube", inner.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, inner.len(), points).into_vec();
    chosen
        .into_iter()
        .map(|k| {
            let index = inner[k];
            let p = f.momentum(index);
            let mc = mc_estimate(f, &p, scale, samples, rng.gen())?;
            let gain = operator.gain(f, index, scale);
            let loss = f.values()[index] * operator.loss_rate(f, index, scale);
            Ok(OracleRow { index, p, gain, loss, mc })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> DistributionGrid {
        DistributionGrid::from_fn(5.0, 10, |p| 1e-3 * (-p.norm_sq()).exp()).unwrap()
    }

    #[test]
    fn vacuum_gives_zero() {
        let f = DistributionGrid::zeros(3.0, 6).unwrap();
        let est = mc_estimate(&f, &CovariantMomentum::ZERO, 1.0, 2000, 1).unwrap();
        assert_eq!(est, McEstimate::default());
    }

    #[test]
    fn reproducible_given_seed() {
        let f = gaussian();
        let p = CovariantMomentum::new(0.5, 0.0, -0.5);
        let a = mc_estimate(&f, &p, 1.0, 2000, 42).unwrap();
        let b = mc_estimate(&f, &p, 1.0, 2000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, mc_estimate(&f, &p, 1.0, 2000, 43).unwrap());
    }

    #[test]
    fn stderr_scales_with_sample_count() {
        let f = gaussian();
        let p = CovariantMomentum::new(0.5, 0.5, 0.0);
        let small = mc_estimate(&f, &p, 1.0, 40_000, 5).unwrap();
        let large = mc_estimate(&f, &p, 1.0, 80_000, 6).unwrap();
        for (a, b) in [(small.stderr_gain, large.stderr_gain), (small.stderr_loss, large.stderr_loss)] {
            let ratio = b / a;
            assert!((ratio - 0.5f64.sqrt()).abs() <= 0.2 * 0.5f64.sqrt(), "ratio {ratio}");
        }
    }

    #[test]
    fn quadrature_agrees_with_oracle() {
        let f = gaussian();
        let op = CollisionOperator::new(super::super::SphereQuadrature::product(4, 8).unwrap());
        let rows = compare_with_quadrature(&f, &op, 1.0, 10, 20_000, 9).unwrap();
        assert!(rows.iter().filter(|r| r.within(3.0)).count() >= 9);
        let distinct: std::collections::BTreeSet<usize> = rows.iter().map(|r| r.index).collect();
        assert_eq!(distinct.len(), rows.len());
        assert!(compare_with_quadrature(&f, &op, 1.0, 10_000, 1000, 9).is_err());
        let zero = DistributionGrid::zeros(5.0, 10).unwrap();
        for r in compare_with_quadrature(&zero, &op, 1.0, 3, 1000, 9).unwrap() {
            assert_eq!((r.gain, r.loss, r.z_gain(), r.z_loss()), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(mc_estimate(&gaussian(), &CovariantMomentum::ZERO, 1.0, 10, 0).is_err());
    }
}
