//! Cartesian grids masked to a disc, and regions of the disc.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Strictly inside the disc; an unknown of the discrete problem.
    Interior,
    /// Outside the open disc but adjacent to an interior node; carries
    /// Dirichlet data.
    Ghost,
    /// Everything else; never read by the stencils.
    Exterior,
}

/// A ghost node together with its radial projection onto `|z| = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode<T: Real> {
    pub index: usize,
    pub projection: Cx<T>,
    /// Distance from the node to the circle.
    pub offset: T,
}

/// `n x n` nodes over `[-R, R]^2`; node `(i, j)` sits at
/// `x = -R + j dx`, `y = -R + i dx` and has flat index `i n + j`.
#[derive(Debug, Clone)]
pub struct DiscGrid<T: Real> {
    n: usize,
    radius: T,
    dx: T,
    kind: Vec<NodeKind>,
    interior: Vec<usize>,
    /// Position of each node in `interior`, or `usize::MAX`.
    slot: Vec<usize>,
    boundary: Vec<BoundaryNode<T>>,
}

impl<T: Real> DiscGrid<T> {
    pub fn new(n: usize, radius: T) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("grid resolution {n} is too small")));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput("grid radius must be positive".into()));
        }
        let dx = T::lit(2.0) * radius / T::lit((n - 1) as f64);
        let at = |i: usize, j: usize| Cx::new(-radius + T::lit(j as f64) * dx, -radius + T::lit(i as f64) * dx);
        let mut kind = vec![NodeKind::Exterior; n * n];
        // Nodes on the edge of the square have |z| >= R; skip them so that
        // rounding cannot make one interior.
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                if cabs(at(i, j)) < radius {
                    kind[i * n + j] = NodeKind::Interior;
                }
            }
        }
        let mut boundary = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                if kind[k] == NodeKind::Interior {
                    continue;
                }
                let touches = (j + 1 < n && kind[k + 1] == NodeKind::Interior)
                    || (j > 0 && kind[k - 1] == NodeKind::Interior)
                    || (i + 1 < n && kind[k + n] == NodeKind::Interior)
                    || (i > 0 && kind[k - n] == NodeKind::Interior);
                if touches {
                    kind[k] = NodeKind::Ghost;
                    let z = at(i, j);
                    let m = cabs(z);
                    boundary.push(BoundaryNode { index: k, projection: z * (radius / m), offset: m - radius });
                }
            }
        }
        let interior: Vec<usize> = (0..n * n).filter(|&k| kind[k] == NodeKind::Interior).collect();
        let mut slot = vec![usize::MAX; n * n];
        for (s, &k) in interior.iter().enumerate() {
            slot[k] = s;
        }
        Ok(Self { n, radius, dx, kind, interior, slot, boundary })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, k: usize) -> Cx<T> {
        let (i, j) = (k / self.n, k % self.n);
        Cx::new(
            -self.radius + T::lit(j as f64) * self.dx,
            -self.radius + T::lit(i as f64) * self.dx,
        )
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.kind[k]
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.kind[k] == NodeKind::Interior
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Compact numbering of interior nodes.
    pub fn slot(&self, k: usize) -> Option<usize> {
        let s = self.slot[k];
        (s != usize::MAX).then_some(s)
    }

    pub fn boundary(&self) -> &[BoundaryNode<T>] {
        &self.boundary
    }

    /// East, west, north, south neighbours. Only meaningful for nodes away
    /// from the edge of the square (all interior nodes qualify).
    pub fn neighbours(&self, k: usize) -> [usize; 4] {
        [k + 1, k - 1, k + self.n, k - self.n]
    }

    /// Nodes with the full 3x3 neighbourhood interior or ghost, so that
    /// second differences of interior data are defined.
    pub fn has_full_stencil(&self, k: usize) -> bool {
        let (i, j) = (k / self.n, k % self.n);
        if i == 0 || j == 0 || i + 1 >= self.n || j + 1 >= self.n {
            return false;
        }
        for di in [-1i64, 0, 1] {
            for dj in [-1i64, 0, 1] {
                let m = ((i as i64 + di) as usize) * self.n + (j as i64 + dj) as usize;
                if self.kind[m] == NodeKind::Exterior {
                    return false;
                }
            }
        }
        true
    }
}

/// Subsets of the disc over which errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    Annulus { inner: f64, outer: f64 },
    Disc { radius: f64 },
}

impl Default for Region {
    fn default() -> Self {
        Region::Annulus { inner: 0.25, outer: 0.5 }
    }
}

impl Region {
    pub fn annulus(inner: f64, outer: f64) -> Self {
        Region::Annulus { inner, outer }
    }

    pub fn contains<T: Real>(&self, z: Cx<T>) -> bool {
        let m = cabs(z).to_f64();
        match *self {
            Region::Annulus { inner, outer } => m >= inner && m <= outer,
            Region::Disc { radius } => m <= radius,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            Region::Annulus { outer, .. } => outer,
            Region::Disc { radius } => radius,
        }
    }

    pub fn inner_radius(&self) -> f64 {
        match *self {
            Region::Annulus { inner, .. } => inner,
            Region::Disc { .. } => 0.0,
        }
    }

    /// Same region shifted to be centred at `c`.
    pub fn contains_about<T: Real>(&self, z: Cx<T>, c: Cx<T>) -> bool {
        self.contains(z - c)
    }

    /// Checks that the region, widened by two grid spacings for the
    /// difference stencils, stays inside the open disc.
    pub fn check_inside<T: Real>(&self, grid: &DiscGrid<T>) -> Result<()> {
        let ok = match *self {
            Region::Annulus { inner, outer } => inner >= 0.0 && inner <= outer,
            Region::Disc { radius } => radius > 0.0,
        };
        let margin = 3.0 * grid.dx().to_f64();
        if !ok || self.outer_radius() + margin >= grid.radius().to_f64() {
            return Err(Error::RegionOutsideGrid);
        }
        Ok(())
    }

    /// Interior nodes in the region whose stencils are complete.
    pub fn nodes<T: Real>(&self, grid: &DiscGrid<T>) -> Vec<usize> {
        grid.interior()
            .iter()
            .copied()
            .filter(|&k| self.contains(grid.point(k)) && grid.has_full_stencil(k))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_and_ghosts() {
        let g = DiscGrid::<f64>::new(32, 1.0).unwrap();
        assert!((g.dx() - 2.0 / 31.0).abs() < 1e-15);
        for &k in g.interior() {
            for m in g.neighbours(k) {
                assert_ne!(g.kind(m), NodeKind::Exterior);
            }
            assert!(g.point(k).norm() < 1.0);
        }
        for b in g.boundary() {
            assert!(b.offset >= 0.0 && b.offset < g.dx() * 1.5);
            assert!((b.projection.norm() - 1.0).abs() < 1e-14);
        }
        // Even resolution: no node at the origin.
        assert!(g.interior().iter().all(|&k| g.point(k).norm() > 1e-3));
    }

    #[test]
    fn region_checks() {
        let g = DiscGrid::<f64>::new(64, 1.0).unwrap();
        assert!(Region::default().check_inside(&g).is_ok());
        assert!(matches!(Region::annulus(0.5, 0.99).check_inside(&g), Err(Error::RegionOutsideGrid)));
        let nodes = Region::default().nodes(&g);
        assert!(!nodes.is_empty());
        assert!(nodes.iter().all(|&k| {
            let r = g.point(k).norm();
            (0.25..=0.5).contains(&r)
        }));
    }
}
