//! Gain and loss parts of the Israel-particle collision operator.
//!
//! With `sigma = 4 / (h s)` the integrand weight `v_M sigma` reduces to
//! `1 / (p^0 q^0 sqrt(s))`, so
//!
//! ```text
//! Q+(f,f)(p) = R^-3 ∫∫ f(p') f(q') / (p0 q0 sqrt s) dω dq
//! Q-(f,f)(p) = f(p) L(p),   L(p) = R^-3 ∫∫ f(q) / (p0 q0 sqrt s) dω dq
//! ```
//!
//! The `q_*` integral is a midpoint sum over the distribution lattice, the
//! `ω` integral a [`SphereQuadrature`], and off-lattice values `f(p')`,
//! `f(q')` come from trilinear interpolation.

mod grid;
mod monte_carlo;
mod quadrature;

pub use grid::{DistributionGrid, Interpolator};
pub use monte_carlo::{compare_with_quadrature, mc_estimate, McEstimate, OracleRow, MIN_MC_SAMPLES};
pub use quadrature::{gauss_legendre, SphereQuadrature};

use rayon::prelude::*;

use crate::kinematics::{dot3, norm_sq3, total_energy, Vec3};
use grid::LatticeOp;

/// `v_M sigma = 1 / (p^0 q^0 sqrt(s))`; the factors of `h` cancel.
#[inline]
pub fn kernel_weight(p0: f64, q0: f64, s: f64) -> f64 {
    1.0 / (p0 * q0 * s.sqrt())
}

/// Gain value at one lattice point together with the number of
/// post-collision momenta that left the cube.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GainSample {
    pub gain: f64,
    pub escaped: u64,
    pub evaluated: u64,
}

/// Collision terms at every lattice point.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionTerms {
    pub gain: Vec<f64>,
    /// `L(p)`; the loss term is `f(p) L(p)`.
    pub loss_rate: Vec<f64>,
    /// Fraction of post-collision momenta that fell outside the cube.
    pub leakage: f64,
}

impl CollisionTerms {
    /// `Q(f,f) = gain - f L` at every lattice point.
    pub fn net(&self, f: &DistributionGrid) -> Vec<f64> {
        self.gain.iter().zip(&self.loss_rate).zip(f.values()).map(|((g, l), v)| g - v * l).collect()
    }

    /// Relative imbalance of the number and energy moments of `Q`:
    /// `|sum (gain - f L)| / sum f L`, and the same weighted by `p^0` at scale `R`.
    pub fn moment_balance(&self, f: &DistributionGrid, scale: f64) -> MomentBalance {
        let (mut number_gain, mut number_loss, mut energy_gain, mut energy_loss) = (0.0, 0.0, 0.0, 0.0);
        for idx in 0..f.len() {
            let p0 = (1.0 + f.momentum(idx).norm_sq() / (scale * scale)).sqrt();
            let loss = f.values()[idx] * self.loss_rate[idx];
            number_gain += self.gain[idx];
            number_loss += loss;
            energy_gain += p0 * self.gain[idx];
            energy_loss += p0 * loss;
        }
        let rel = |g: f64, l: f64| if l > 0.0 { (g - l).abs() / l } else { 0.0 };
        MomentBalance { number: rel(number_gain, number_loss), energy: rel(energy_gain, energy_loss) }
    }
}

/// Relative imbalance of the collision moments; both vanish in the continuum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentBalance {
    pub number: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct CollisionOperator {
    quad: SphereQuadrature,
}

/// Orthonormal-frame quantities of one lattice point at a given `R`.
#[derive(Clone, Copy)]
struct Site {
    p: Vec3,
    p0: f64,
}

fn sites(f: &DistributionGrid, scale: f64) -> Vec<Site> {
    let inv = 1.0 / scale;
    (0..f.len())
        .map(|idx| {
            let m = f.momentum(idx).0;
            let p = [m[0] * inv, m[1] * inv, m[2] * inv];
            Site { p, p0: (1.0 + norm_sq3(&p)).sqrt() }
        })
        .collect()
}

impl CollisionOperator {
    pub fn new(quad: SphereQuadrature) -> Self {
        CollisionOperator { quad }
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quad
    }

    /// `Q+(f,f)` at lattice point `idx`.
    pub fn gain(&self, f: &DistributionGrid, idx: usize, scale: f64) -> f64 {
        self.gain_sample(f, idx, scale).gain
    }

    pub fn gain_sample(&self, f: &DistributionGrid, idx: usize, scale: f64) -> GainSample {
        let sites = sites(f, scale);
        self.gain_at(f, &sites, idx, scale)
    }

    /// `L(p)` at lattice point `idx`.
    pub fn loss_rate(&self, f: &DistributionGrid, idx: usize, scale: f64) -> f64 {
        let sites = sites(f, scale);
        self.loss_at(f, &sites, idx, scale)
    }

    fn loss_at(&self, f: &DistributionGrid, sites: &[Site], idx: usize, scale: f64) -> f64 {
        let p = sites[idx];
        let mut sum = 0.0;
        for (q, &fq) in sites.iter().zip(f.values()) {
            if fq == 0.0 {
                continue;
            }
            let s = total_energy(p.p0, &p.p, q.p0, &q.p);
            sum += fq * kernel_weight(p.p0, q.p0, s);
        }
        sum * self.quad.total_weight() * f.cell_volume() / scale.powi(3)
    }

    fn gain_at(&self, f: &DistributionGrid, sites: &[Site], idx: usize, scale: f64) -> GainSample {
        let interp = f.interpolator();
        let p = sites[idx];
        let nodes = self.quad.nodes();
        let weights = self.quad.weights();
        let mut sum = 0.0;
        let mut escaped = 0u64;
        for q in sites {
            let s = total_energy(p.p0, &p.p, q.p0, &q.p);
            let sqrt_s = s.sqrt();
            let n0 = p.p0 + q.p0;
            let n = [p.p[0] + q.p[0], p.p[1] + q.p[1], p.p[2] + q.p[2]];
            let u = [q.p[0] - p.p[0], q.p[1] - p.p[1], q.p[2] - p.p[2]];
            // p' = p + 2 (q.Omega) Omega with 2 (q.Omega) = u.w - (n.w) a and
            // Omega_spatial = w + (n.w) b n
            let a = dot3(&n, &u) / (n0 * (n0 + sqrt_s));
            let b = 1.0 / (sqrt_s * (n0 + sqrt_s));
            let mut inner = 0.0;
            for (w, &weight) in nodes.iter().zip(weights) {
                let n_w = dot3(&n, w);
                let c2 = dot3(&u, w) - n_w * a;
                let nb = n_w * b;
                let omega = [w[0] + nb * n[0], w[1] + nb * n[1], w[2] + nb * n[2]];
                let pp = [p.p[0] + c2 * omega[0], p.p[1] + c2 * omega[1], p.p[2] + c2 * omega[2]];
                let Some(fp) = interp.sample_scaled(&pp, scale) else {
                    escaped += 1;
                    continue;
                };
                let qp = [n[0] - pp[0], n[1] - pp[1], n[2] - pp[2]];
                let Some(fq) = interp.sample_scaled(&qp, scale) else {
                    escaped += 1;
                    continue;
                };
                inner += weight * fp * fq;
            }
            sum += inner * kernel_weight(p.p0, q.p0, s);
        }
        GainSample {
            gain: sum * f.cell_volume() / scale.powi(3),
            escaped,
            evaluated: 2 * (sites.len() * nodes.len()) as u64,
        }
    }

    /// Lattice symmetries shared by `f` and the sphere rule.
    fn symmetry_group(&self, f: &DistributionGrid) -> Vec<LatticeOp> {
        LatticeOp::all()
            .filter(|op| self.quad.admits(op.flips, op.swap_xy) && f.invariant_under(*op))
            .collect()
    }

    /// Gain and loss rate at every lattice point.
    ///
    /// When `f` is invariant under reflections or the `x <-> y` exchange that
    /// also map the sphere nodes onto themselves, the terms are evaluated on
    /// one point per orbit and copied; the operator is equivariant under those
    /// maps. Each point's sum runs in lattice order, so results do not depend
    /// on the number of worker threads.
    pub fn evaluate(&self, f: &DistributionGrid, scale: f64) -> CollisionTerms {
        let sites = sites(f, scale);
        let group = self.symmetry_group(f);
        let mut representative = vec![usize::MAX; f.len()];
        let mut reps = Vec::new();
        for idx in 0..f.len() {
            if representative[idx] != usize::MAX {
                continue;
            }
            for op in &group {
                representative[f.apply_op(*op, idx)] = idx;
            }
            reps.push(idx);
        }
        let orbit_size: Vec<u64> = {
            let mut counts = vec![0u64; f.len()];
            for &r in &representative {
                counts[r] += 1;
            }
            counts
        };

        let results: Vec<(GainSample, f64)> = reps
            .par_iter()
            .map(|&idx| (self.gain_at(f, &sites, idx, scale), self.loss_at(f, &sites, idx, scale)))
            .collect();

        let mut slot = vec![0usize; f.len()];
        for (k, &idx) in reps.iter().enumerate() {
            slot[idx] = k;
        }
        let mut gain = vec![0.0; f.len()];
        let mut loss_rate = vec![0.0; f.len()];
        for idx in 0..f.len() {
            let (g, l) = &results[slot[representative[idx]]];
            gain[idx] = g.gain;
            loss_rate[idx] = *l;
        }
        let (escaped, evaluated) = reps.iter().zip(&results).fold((0u64, 0u64), |(e, n), (&idx, (g, _))| {
            (e + g.escaped * orbit_size[idx], n + g.evaluated * orbit_size[idx])
        });
        let leakage = if evaluated > 0 { escaped as f64 / evaluated as f64 } else { 0.0 };
        CollisionTerms { gain, loss_rate, leakage }
    }
}
