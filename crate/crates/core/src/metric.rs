//! Hermitian metrics sampled on a disc grid, in the fixed holomorphic frame.
//!
//! A node value `H` is the Gram matrix `H_ij = h(e_j, e_i)`, so that
//! `h(u, v) = v^* H u`.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DiscGrid, NodeKind};
use crate::linalg;
use crate::scalar::{CMat, Cx, Real};

#[derive(Debug, Clone)]
pub struct MetricField<T: Real> {
    grid: Arc<DiscGrid<T>>,
    rank: usize,
    /// Node matrices, row-major within a node, nodes in grid order.
    data: Vec<Cx<T>>,
}

impl<T: Real> MetricField<T> {
    pub fn identity(grid: Arc<DiscGrid<T>>, rank: usize) -> Self {
        let id = linalg::identity::<T>(rank);
        let mut data = Vec::with_capacity(grid.len() * rank * rank);
        for _ in 0..grid.len() {
            data.extend(id.transpose().iter().copied());
        }
        Self { grid, rank, data }
    }

    /// Evaluates `f` at interior and ghost nodes; exterior nodes hold the identity.
    pub fn from_fn(grid: Arc<DiscGrid<T>>, rank: usize, f: impl Fn(Cx<T>) -> CMat<T> + Sync) -> Self {
        Self::try_from_fn(grid, rank, |z| Ok(f(z))).expect("infallible")
    }

    pub fn try_from_fn(
        grid: Arc<DiscGrid<T>>,
        rank: usize,
        f: impl Fn(Cx<T>) -> Result<CMat<T>> + Sync,
    ) -> Result<Self> {
        let id = linalg::identity::<T>(rank);
        let nodes: Vec<CMat<T>> = (0..grid.len())
            .into_par_iter()
            .map(|k| match grid.kind(k) {
                NodeKind::Exterior => Ok(id.clone()),
                _ => f(grid.point(k)),
            })
            .collect::<Result<_>>()?;
        let mut out = Self::identity(grid, rank);
        for (k, m) in nodes.iter().enumerate() {
            out.set(k, m);
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<DiscGrid<T>> {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, k: usize) -> CMat<T> {
        let r2 = self.rank * self.rank;
        CMat::<T>::from_row_slice(self.rank, self.rank, &self.data[k * r2..(k + 1) * r2])
    }

    pub fn set(&mut self, k: usize, m: &CMat<T>) {
        let r = self.rank;
        let base = k * r * r;
        for i in 0..r {
            for j in 0..r {
                self.data[base + i * r + j] = m[(i, j)];
            }
        }
    }

    /// Same grid, data from `f(node index, current value)`.
    pub fn map(&self, f: impl Fn(usize, CMat<T>) -> CMat<T> + Sync) -> Self {
        let nodes: Vec<CMat<T>> = (0..self.grid.len()).into_par_iter().map(|k| f(k, self.get(k))).collect();
        let mut out = self.clone();
        for (k, m) in nodes.iter().enumerate() {
            out.set(k, m);
        }
        out
    }

    /// Keeps the ghost data and replaces the interior by the identity.
    pub fn with_identity_interior(&self) -> Self {
        let id = linalg::identity::<T>(self.rank);
        let mut out = self.clone();
        for &k in self.grid.interior() {
            out.set(k, &id);
        }
        out
    }

    /// Keeps the ghost data of `self` and takes the interior from `other`.
    pub fn with_interior_from(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for &k in self.grid.interior() {
            out.set(k, &other.get(k));
        }
        Ok(out)
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank || self.grid.n() != other.grid.n() || self.grid.radius() != other.grid.radius() {
            return Err(Error::InvalidInput("metric fields live on different grids or ranks".into()));
        }
        Ok(())
    }

    /// Largest anti-Hermitian part and smallest eigenvalue over interior and
    /// ghost nodes.
    pub fn validate(&self, herm_tol: T) -> Result<()> {
        for k in 0..self.grid.len() {
            if self.grid.kind(k) == NodeKind::Exterior {
                continue;
            }
            let m = self.get(k);
            let skew = linalg::max_abs(&(&m - m.adjoint()));
            if skew > herm_tol * (T::one() + linalg::max_abs(&m)) {
                return Err(Error::InvalidInput(format!("metric is not Hermitian at node {k}")));
            }
            if !(linalg::herm_min_eig(&m) > T::zero()) {
                return Err(Error::NotPositive { node: k });
            }
        }
        Ok(())
    }

    /// Writes the checkpoint layout: little-endian `n: u64`, `r: u64`,
    /// `R: f64`, then every node matrix row-major as interleaved re/im `f64`.
    pub fn write_checkpoint(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&(self.rank as u64).to_le_bytes())?;
        w.write_all(&self.grid.radius().to_f64().to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_f64().to_le_bytes());
            buf.extend_from_slice(&z.im.to_f64().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_checkpoint(mut r: impl Read) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let rank = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let radius = f64::from_le_bytes(b8);
        if rank == 0 || n > 1 << 16 {
            return Err(Error::InvalidInput("corrupt checkpoint header".into()));
        }
        let grid = Arc::new(DiscGrid::new(n, T::lit(radius))?);
        let count = n * n * rank * rank;
        let mut raw = vec![0u8; count * 16];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Cx::new(T::lit(re), T::lit(im))
            })
            .collect();
        Ok(Self { grid, rank, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_checkpoint(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_checkpoint(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let grid = Arc::new(DiscGrid::<f64>::new(8, 1.0).unwrap());
        let m = MetricField::from_fn(grid, 2, |z| {
            CMat::<f64>::from_row_slice(2, 2, &[Cx::new(2.0, 0.0), z, z.conj(), Cx::new(3.0, 0.0)])
        });
        let mut bytes = Vec::new();
        m.write_checkpoint(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 24 + 64 * 4 * 16);
        assert_eq!(&bytes[..8], &8u64.to_le_bytes());
        let back = MetricField::<f64>::read_checkpoint(bytes.as_slice()).unwrap();
        for k in 0..64 {
            assert_eq!(back.get(k), m.get(k));
        }
    }

    #[test]
    fn validate_flags_negative_nodes() {
        let grid = Arc::new(DiscGrid::<f64>::new(8, 1.0).unwrap());
        let m = MetricField::from_fn(grid, 1, |_| CMat::<f64>::from_element(1, 1, Cx::new(-1.0, 0.0)));
        assert!(matches!(m.validate(1e-12), Err(Error::NotPositive { .. })));
    }
}
