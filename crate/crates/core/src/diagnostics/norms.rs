use serde::{Deserialize, Serialize};

use crate::collision::DistributionGrid;

/// Weighted energy norm `||g||_{k,N}^2 = sum_{|beta| <= N} ∫ <p_*>^{2k} e^{p^0} |d_beta g|^2 dp_*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpec {
    /// Polynomial weight exponent.
    pub k: u32,
    /// Largest total derivative order.
    #[serde(rename = "N")]
    pub order: u32,
}

/// Finite-difference first derivative along `axis`: centred in the interior,
/// second-order one-sided on the outer layers.
fn diff_axis(f: &DistributionGrid, values: &[f64], axis: usize) -> Vec<f64> {
    let n = f.points_per_axis();
    let inv = 1.0 / f.spacing();
    let stride = [n * n, n, 1][axis];
    (0..values.len())
        .map(|idx| {
            let c = f.triple(idx)[axis];
            let at = |offset: isize| values[(idx as isize + offset * stride as isize) as usize];
            if n < 3 {
                return if c == 0 { (at(1) - at(0)) * inv } else { (at(0) - at(-1)) * inv };
            }
            if c == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) * 0.5 * inv
            } else if c == n - 1 {
                (3.0 * at(0) - 4.0 * at(-1) + at(-2)) * 0.5 * inv
            } else {
                (at(1) - at(-1)) * 0.5 * inv
            }
        })
        .collect()
}

/// `d^beta f` on the lattice for the multi-index `beta`.
pub fn derivative(f: &DistributionGrid, beta: [u32; 3]) -> Vec<f64> {
    let mut values = f.values().to_vec();
    for (axis, &count) in beta.iter().enumerate() {
        for _ in 0..count {
            values = diff_axis(f, &values, axis);
        }
    }
    values
}

/// Multi-indices with `|beta| <= order`, lowest order first.
fn multi_indices(order: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=order {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

/// Lattice value of `||f||_{k,N}` at scale factor `R`, with the time-dependent
/// weight `e^{p^0}`, `p^0 = sqrt(1 + R^-2 |p_*|^2)`.
pub fn weighted_norm(f: &DistributionGrid, spec: NormSpec, scale: f64) -> f64 {
    let weights: Vec<f64> = (0..f.len())
        .map(|i| {
            let p_sq = f.momentum(i).norm_sq();
            (1.0 + p_sq).powi(spec.k as i32) * (1.0 + p_sq / (scale * scale)).sqrt().exp()
        })
        .collect();
    let mut total = 0.0;
    for beta in multi_indices(spec.order) {
        let d = if beta == [0, 0, 0] { f.values().to_vec() } else { derivative(f, beta) };
        total += d.iter().zip(&weights).map(|(v, w)| w * v * v).sum::<f64>();
    }
    (total * f.cell_volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-3;

    fn gaussian(n: usize) -> DistributionGrid {
        DistributionGrid::from_fn(6.0, n, |p| EPS * (-p.norm_sq()).exp()).unwrap()
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(0), vec![[0, 0, 0]]);
        assert_eq!(multi_indices(1).len(), 4);
        assert_eq!(multi_indices(2).len(), 10);
        assert_eq!(multi_indices(3).len(), 20);
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let f = DistributionGrid::from_fn(2.0, 7, |p| p.0[0] * p.0[0] + 3.0 * p.0[1] * p.0[2]).unwrap();
        let dx = derivative(&f, [1, 0, 0]);
        let dyz = derivative(&f, [0, 1, 1]);
        for idx in 0..f.len() {
            let p = f.momentum(idx);
            assert!((dx[idx] - 2.0 * p.0[0]).abs() < 1e-12);
            assert!((dyz[idx] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_has_zero_norm() {
        let f = DistributionGrid::zeros(4.0, 8).unwrap();
        assert_eq!(weighted_norm(&f, NormSpec { k: 2, order: 2 }, 1.0), 0.0);
    }

    #[test]
    fn gaussian_norm_matches_radial_quadrature() {
        // 4 pi ∫ r^2 e^{sqrt(1+r^2) - 2 r^2} dr and the same with (1 + 4 r^2), from adaptive quadrature
        let (plain, with_gradient): (f64, f64) = (7.44566023043569, 34.242446323388954);
        let f = gaussian(48);
        let n0 = weighted_norm(&f, NormSpec { k: 0, order: 0 }, 1.0);
        assert!((n0 / (EPS * plain.sqrt()) - 1.0).abs() < 0.01, "{n0}");
        // centred differences lose about Δ^2 of the gradient near the peak
        let n1 = weighted_norm(&f, NormSpec { k: 0, order: 1 }, 1.0);
        assert!((n1 / (EPS * with_gradient.sqrt()) - 1.0).abs() < 0.03, "{n1}");
    }

    #[test]
    fn weight_and_order_are_monotone() {
        let f = gaussian(16);
        let base = weighted_norm(&f, NormSpec { k: 0, order: 0 }, 1.0);
        assert!(weighted_norm(&f, NormSpec { k: 2, order: 0 }, 1.0) >= base);
        assert!(weighted_norm(&f, NormSpec { k: 0, order: 2 }, 1.0) >= base);
        // p^0 falls as R grows
        assert!(weighted_norm(&f, NormSpec { k: 0, order: 0 }, 3.0) < base);
    }
}
