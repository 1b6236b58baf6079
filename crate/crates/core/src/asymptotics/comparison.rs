use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DiscGrid, NodeKind, Region};
use crate::higgs::{eigen_frame, HiggsBundleDisc};
use crate::linalg;
use crate::metric::MetricField;
use crate::scalar::{cabs, CMat, Real};

#[derive(Debug, Clone)]
pub struct MetricComparison<T: Real> {
    /// `s = H_ref^{-1} H` at every node (identity at exterior nodes).
    pub s: Vec<CMat<T>>,
    pub norms: ErrorNorms,
}

/// Norms of `s - id` over a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub sup: f64,
    pub l2: f64,
    pub l2_1: f64,
    pub l2_2: f64,
}

/// Compares `h` with `h_ref` on `region`.
///
/// Norms are taken of `sigma = L^{-1} H L^{-*} - I`, `H_ref = L L^*`, which
/// is `s - id` written in an `h_ref`-unitary frame; pointwise the sup norm is
/// the operator norm, the integral norms use Frobenius norms and centered
/// differences.
pub fn metric_comparison<T: Real>(
    h_ref: &MetricField<T>,
    h: &MetricField<T>,
    region: &Region,
) -> Result<MetricComparison<T>> {
    h_ref.check_compatible(h)?;
    let grid = h_ref.grid().clone();
    region.check_inside(&grid)?;
    let r = h.rank();
    let pairs: Vec<(CMat<T>, CMat<T>)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.kind(k) == NodeKind::Exterior {
                return Ok((CMat::<T>::identity(r, r), CMat::<T>::zeros(r, r)));
            }
            let a = h_ref.get(k);
            let b = h.get(k);
            let l = linalg::cholesky(&a).ok_or(Error::NotPositive { node: k })?;
            let li = linalg::lower_inverse(&l);
            let sigma = &li * &b * li.adjoint() - CMat::<T>::identity(r, r);
            let s = linalg::inverse(&a).ok_or(Error::NotPositive { node: k })? * b;
            Ok((s, sigma))
        })
        .collect::<Result<_>>()?;
    let (s, sigma): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let nodes = region.nodes(&grid);
    if nodes.is_empty() {
        return Err(Error::RegionOutsideGrid);
    }
    let norms = sigma_norms(&grid, &sigma, &nodes);
    Ok(MetricComparison { s, norms })
}

fn sigma_norms<T: Real>(grid: &DiscGrid<T>, sigma: &[CMat<T>], nodes: &[usize]) -> ErrorNorms {
    let n = grid.n();
    let dx = grid.dx().to_f64();
    let dx2 = dx * dx;
    let per: Vec<(f64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|&k| {
            let f2 = |m: &CMat<T>| {
                let v = linalg::fro(m).to_f64();
                v * v
            };
            let c = &sigma[k];
            let (e, w, no, so) = (&sigma[k + 1], &sigma[k - 1], &sigma[k + n], &sigma[k - n]);
            let dxm = (e - w) * crate::scalar::creal(T::lit(0.5 / dx));
            let dym = (no - so) * crate::scalar::creal(T::lit(0.5 / dx));
            let two = crate::scalar::creal(T::lit(2.0));
            let inv2 = crate::scalar::creal(T::lit(1.0 / dx2));
            let dxx = (e - c * two + w) * inv2;
            let dyy = (no - c * two + so) * inv2;
            let dxy = (&sigma[k + n + 1] - &sigma[k + n - 1] - &sigma[k - n + 1] + &sigma[k - n - 1])
                * crate::scalar::creal(T::lit(0.25 / dx2));
            let first = f2(&dxm) + f2(&dym);
            let second = f2(&dxx) + 2.0 * f2(&dxy) + f2(&dyy);
            (linalg::spectral_norm(c).to_f64(), f2(c), first, second)
        })
        .collect();
    let mut sup: f64 = 0.0;
    let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
    for (s, z, f, g) in per {
        sup = sup.max(s);
        a0 += z;
        a1 += f;
        a2 += g;
    }
    ErrorNorms {
        sup,
        l2: (a0 * dx2).sqrt(),
        l2_1: ((a0 + a1) * dx2).sqrt(),
        l2_2: ((a0 + a1 + a2) * dx2).sqrt(),
    }
}

/// Largest `|h(e_i, e_j)| / (|e_i|_h |e_j|_h)`, `i != j`, over the eigenframe
/// of `f` at interior nodes of `region`.
pub fn off_diagonal_decay<T: Real>(h: &MetricField<T>, hb: &HiggsBundleDisc<T>, region: &Region) -> Result<T> {
    let grid = h.grid().clone();
    let tol = hb.default_tolerance();
    let nodes: Vec<usize> = grid.interior().iter().copied().filter(|&k| region.contains(grid.point(k))).collect();
    let vals: Vec<T> = nodes
        .par_iter()
        .map(|&k| {
            let s = eigen_frame(hb, grid.point(k), tol)?;
            let e = s.eigenvectors;
            let g = e.adjoint() * h.get(k) * &e;
            let r = g.nrows();
            let mut m = T::zero();
            for i in 0..r {
                for j in 0..r {
                    if i != j {
                        let v = cabs(g[(i, j)]) / (g[(i, i)].re * g[(j, j)].re).sqrt();
                        if v > m {
                            m = v;
                        }
                    }
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(T::zero(), |a, b| if b > a { b } else { a }))
}
