use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{CovariantMomentum, Vec3};

/// Distribution function sampled at the cell centres of a uniform lattice
/// over the covariant-momentum cube `[-P_max, P_max]^3`.
///
/// Cell `(i, j, k)` is centred at `((i - (n-1)/2) d, (j - (n-1)/2) d, (k - (n-1)/2) d)`
/// with `d = 2 P_max / n`, so the lattice is exactly symmetric about the origin
/// and contains it iff `n` is odd. Values are stored row-major, `k` fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionGrid {
    extent: f64,
    n: usize,
    spacing: f64,
    values: Vec<f64>,
}

impl DistributionGrid {
    pub fn zeros(extent: f64, n: usize) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::Config(format!("grid extent must be positive and finite, got {extent}")));
        }
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points per axis, got {n}")));
        }
        Ok(DistributionGrid { extent, n, spacing: 2.0 * extent / n as f64, values: vec![0.0; n * n * n] })
    }

    pub fn from_fn(extent: f64, n: usize, f: impl Fn(&CovariantMomentum) -> f64) -> Result<Self> {
        let mut grid = Self::zeros(extent, n)?;
        for idx in 0..grid.len() {
            grid.values[idx] = f(&grid.momentum(idx));
        }
        Ok(grid)
    }

    pub fn with_values(extent: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        let mut grid = Self::zeros(extent, n)?;
        if values.len() != grid.len() {
            return Err(Error::Config(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        grid.values = values;
        Ok(grid)
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n - 1) as f64) * self.spacing
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn triple(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n;
        let ij = idx / self.n;
        [ij / self.n, ij % self.n, k]
    }

    #[inline]
    pub fn momentum(&self, idx: usize) -> CovariantMomentum {
        let [i, j, k] = self.triple(idx);
        CovariantMomentum([self.coordinate(i), self.coordinate(j), self.coordinate(k)])
    }

    /// Lattice index of the cell whose centre is `p`, if `p` is (to rounding) a centre.
    pub fn locate(&self, p: &CovariantMomentum) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let xi = p.0[a] / self.spacing + 0.5 * (self.n - 1) as f64;
            let r = xi.round();
            if (xi - r).abs() > 1e-9 || r < 0.0 || r >= self.n as f64 {
                return None;
            }
            ijk[a] = r as usize;
        }
        Some(self.index(ijk[0], ijk[1], ijk[2]))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest value on the outermost layer of cells.
    pub fn boundary_max(&self) -> f64 {
        let last = self.n - 1;
        (0..self.len())
            .filter(|&idx| self.triple(idx).iter().any(|&c| c == 0 || c == last))
            .map(|idx| self.values[idx])
            .fold(0.0, f64::max)
    }

    /// Whether the outer layer is below `1e-12 max f`.
    pub fn cutoff_adequate(&self) -> bool {
        self.boundary_max() <= 1e-12 * self.max_value()
    }

    pub fn interpolator(&self) -> Interpolator<'_> {
        Interpolator {
            values: &self.values,
            n: self.n,
            inv_spacing: 1.0 / self.spacing,
            offset: 0.5 * (self.n - 1) as f64,
            lower: -0.5,
            upper: self.n as f64 - 0.5,
        }
    }

    /// Trilinear interpolant of the lattice values, with zero ghost cells
    /// beyond the outer layer. `None` outside the cube.
    pub fn interpolate(&self, p: &CovariantMomentum) -> Option<f64> {
        self.interpolator().sample(&p.0)
    }

    pub(crate) fn apply_op(&self, op: LatticeOp, idx: usize) -> usize {
        let [i, j, k] = self.triple(idx);
        let last = self.n - 1;
        let flip = |c: usize, bit: u8| if op.flips & bit != 0 { last - c } else { c };
        let (i, j, k) = (flip(i, 1), flip(j, 2), flip(k, 4));
        if op.swap_xy {
            self.index(j, i, k)
        } else {
            self.index(i, j, k)
        }
    }

    /// Whether the values are bitwise invariant under `op`.
    pub(crate) fn invariant_under(&self, op: LatticeOp) -> bool {
        (0..self.len()).all(|idx| self.values[self.apply_op(op, idx)].to_bits() == self.values[idx].to_bits())
    }
}

/// Reflection `x_a -> -x_a` for each set bit of `flips`, followed by an
/// optional exchange of the first two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct LatticeOp {
    pub flips: u8,
    pub swap_xy: bool,
}

impl LatticeOp {
    pub fn all() -> impl Iterator<Item = LatticeOp> {
        (0..8u8).flat_map(|flips| [false, true].into_iter().map(move |swap_xy| LatticeOp { flips, swap_xy }))
    }
}

/// Borrowed view for repeated trilinear sampling.
#[derive(Clone, Copy)]
pub struct Interpolator<'a> {
    values: &'a [f64],
    n: usize,
    inv_spacing: f64,
    offset: f64,
    lower: f64,
    upper: f64,
}

impl Interpolator<'_> {
    /// Samples at covariant momentum `p`; `None` outside the cube.
    #[inline]
    pub fn sample(&self, p: &Vec3) -> Option<f64> {
        self.sample_scaled(p, 1.0)
    }

    /// Samples at `scale * x`, i.e. at the covariant image of an orthonormal momentum.
    #[inline]
    pub fn sample_scaled(&self, x: &Vec3, scale: f64) -> Option<f64> {
        let factor = scale * self.inv_spacing;
        let xi = [x[0] * factor + self.offset, x[1] * factor + self.offset, x[2] * factor + self.offset];
        if xi.iter().any(|&c| !(c >= self.lower && c <= self.upper)) {
            return None;
        }
        let n = self.n as isize;
        let base = xi.map(|c| c.floor());
        let t = [xi[0] - base[0], xi[1] - base[1], xi[2] - base[2]];
        let b = base.map(|c| c as isize);
        let mut acc = 0.0;
        for di in 0..2isize {
            let i = b[0] + di;
            if i < 0 || i >= n {
                continue;
            }
            let wi = if di == 0 { 1.0 - t[0] } else { t[0] };
            for dj in 0..2isize {
                let j = b[1] + dj;
                if j < 0 || j >= n {
                    continue;
                }
                let wj = wi * if dj == 0 { 1.0 - t[1] } else { t[1] };
                let row = ((i * n + j) * n) as usize;
                for dk in 0..2isize {
                    let k = b[2] + dk;
                    if k < 0 || k >= n {
                        continue;
                    }
                    let wk = wj * if dk == 0 { 1.0 - t[2] } else { t[2] };
                    acc += wk * self.values[row + k as usize];
                }
            }
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_symmetric() {
        let g = DistributionGrid::zeros(5.0, 8).unwrap();
        for i in 0..8 {
            assert_eq!(g.coordinate(i), -g.coordinate(7 - i));
        }
        assert_eq!(g.coordinate(0), -5.0 + 0.5 * g.spacing());
        let odd = DistributionGrid::zeros(5.0, 9).unwrap();
        assert_eq!(odd.coordinate(4), 0.0);
        assert_eq!(odd.locate(&CovariantMomentum::ZERO), Some(odd.index(4, 4, 4)));
    }

    #[test]
    fn triple_round_trips() {
        let g = DistributionGrid::zeros(1.0, 5).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.triple(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_linear_functions() {
        let g = DistributionGrid::from_fn(3.0, 6, |p| 2.0 + p.0[0] - 0.5 * p.0[1] + 0.25 * p.0[2]).unwrap();
        for idx in [0, 17, 100, 215] {
            let p = g.momentum(idx);
            assert!((g.interpolate(&p).unwrap() - g.values()[idx]).abs() < 1e-14);
        }
        let p = CovariantMomentum::new(0.3, -1.1, 0.7);
        let exact = 2.0 + 0.3 + 0.55 + 0.175;
        assert!((g.interpolate(&p).unwrap() - exact).abs() < 1e-13);
        assert_eq!(g.interpolate(&CovariantMomentum::new(3.01, 0.0, 0.0)), None);
    }

    #[test]
    fn ghost_layer_ramps_to_zero() {
        let g = DistributionGrid::from_fn(1.0, 4, |_| 1.0).unwrap();
        let edge = g.coordinate(3);
        let at_face = g.interpolate(&CovariantMomentum::new(1.0, 0.0, 0.0)).unwrap();
        assert!((at_face - 0.5).abs() < 1e-12);
        assert_eq!(g.interpolate(&CovariantMomentum::new(edge, 0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn invariance_detection() {
        let g = DistributionGrid::from_fn(4.0, 6, |p| (-p.norm_sq()).exp()).unwrap();
        assert!(LatticeOp::all().all(|op| g.invariant_under(op)));
        let skew = DistributionGrid::from_fn(4.0, 6, |p| (-p.norm_sq() - 0.1 * p.0[0]).exp()).unwrap();
        assert!(!skew.invariant_under(LatticeOp { flips: 1, swap_xy: false }));
        assert!(skew.invariant_under(LatticeOp { flips: 2, swap_xy: false }));
    }

    #[test]
    fn boundary_detection() {
        let g = DistributionGrid::from_fn(6.0, 12, |p| (-p.norm_sq()).exp()).unwrap();
        assert!(g.cutoff_adequate());
        let wide = DistributionGrid::from_fn(2.0, 12, |p| (-p.norm_sq()).exp()).unwrap();
        assert!(!wide.cutoff_adequate());
    }
}
