use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kinematics::Vec3;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
///
/// Nodes are ascending and mirrored exactly: `x[i] == -x[n-1-i]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos(theta)` times the
/// uniform (trapezoidal) rule in azimuth.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereQuadrature {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    polar_order: usize,
    azimuth_order: usize,
}

impl SphereQuadrature {
    /// Builds the rule and checks it integrates `1`, `x^2`, `z^2`, `x^4`,
    /// `z^4` and `x^2 y^2` exactly up to its polynomial degree.
    pub fn product(polar_order: usize, azimuth_order: usize) -> Result<Self> {
        if polar_order == 0 || azimuth_order == 0 {
            return Err(Error::Config("sphere quadrature orders must be positive".into()));
        }
        let (cos_theta, gl_weights) = gauss_legendre(polar_order);
        let dphi = 2.0 * PI / azimuth_order as f64;
        let mut nodes = Vec::with_capacity(polar_order * azimuth_order);
        let mut weights = Vec::with_capacity(polar_order * azimuth_order);
        for (&z, &w) in cos_theta.iter().zip(&gl_weights) {
            let rho = (1.0 - z * z).sqrt();
            for j in 0..azimuth_order {
                let phi = (j as f64 + 0.5) * dphi;
                nodes.push([rho * phi.cos(), rho * phi.sin(), z]);
                weights.push(w * dphi);
            }
        }
        let quad = SphereQuadrature { nodes, weights, polar_order, azimuth_order };
        quad.validate()?;
        Ok(quad)
    }

    /// Largest total degree integrated exactly.
    pub fn degree(&self) -> usize {
        (2 * self.polar_order - 1).min(self.azimuth_order - 1)
    }

    fn validate(&self) -> Result<()> {
        let total = self.total_weight();
        if (total - 4.0 * PI).abs() > 1e-12 * 4.0 * PI {
            return Err(Error::Config(format!("sphere weights sum to {total}, expected 4 pi")));
        }
        let degree = self.degree();
        if degree < 2 {
            return Err(Error::Config(format!(
                "sphere quadrature {}x{} is exact only to degree {degree}; need at least 2",
                self.polar_order, self.azimuth_order
            )));
        }
        let mut checks: Vec<(&str, fn(&Vec3) -> f64, f64)> =
            vec![("x^2", |w| w[0] * w[0], 4.0 * PI / 3.0), ("z^2", |w| w[2] * w[2], 4.0 * PI / 3.0)];
        if degree >= 4 {
            checks.push(("x^4", |w| w[0].powi(4), 4.0 * PI / 5.0));
            checks.push(("z^4", |w| w[2].powi(4), 4.0 * PI / 5.0));
            checks.push(("x^2 y^2", |w| w[0] * w[0] * w[1] * w[1], 4.0 * PI / 15.0));
        }
        for (name, f, exact) in checks {
            let got = self.integrate(f);
            if (got - exact).abs() > 1e-12 * exact {
                return Err(Error::Config(format!("sphere quadrature misses {name}: {got} vs {exact}")));
            }
        }
        Ok(())
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(w, &c)| c * f(w)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn polar_order(&self) -> usize {
        self.polar_order
    }

    pub fn azimuth_order(&self) -> usize {
        self.azimuth_order
    }

    /// Whether the node set is mapped onto itself by the reflection
    /// `x_a -> -x_a` (bit `1 << a` of `flips`) and, if `swap_xy`, by `x <-> y`.
    pub(crate) fn admits(&self, flips: u8, swap_xy: bool) -> bool {
        let m = self.azimuth_order;
        let x_ok = flips & 1 == 0 || m.is_multiple_of(2);
        let swap_ok = !swap_xy || m.is_multiple_of(4);
        x_ok && swap_ok
    }
}
