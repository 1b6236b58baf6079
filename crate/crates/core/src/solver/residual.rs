//! Discrete Hitchin operator.
//!
//! A metric is split as `H = e^phi H1` with `phi = (1/r) log det H` and
//! `det H1 = 1`. The equation `d_zbar(H^{-1} d_z H) - t^2 [f, H^{-1} f^* H] = 0`
//! separates into `(1/4) Lap phi = 0` and a traceless part for `H1`, which is
//! discretized through the Hermitian matrix
//!
//! ```text
//! K1 = (1/4) Lap H1 - (D_zbar H1) H1^{-1} (D_z H1) - t^2 (H1 f H1^{-1} f^* H1 - f^* H1 f)
//! ```
//!
//! equal to `H1` times the continuum operator. With `H1 = L L^*` the node
//! residual is the traceless part of `L^{-1} K1 L^{-*}`.

use rayon::prelude::*;

use crate::grid::{DiscGrid, NodeKind};
use crate::higgs::HiggsBundleDisc;
use crate::linalg;
use crate::metric::MetricField;
use crate::scalar::{creal, CMat, Cx, Real};

/// Everything the Newton assembly needs at an interior node.
#[derive(Debug, Clone)]
pub(crate) struct NodeState<T: Real> {
    pub h: CMat<T>,
    pub l: CMat<T>,
    pub linv: CMat<T>,
    /// `H1^{-1}`.
    pub a: CMat<T>,
    /// `D_z H1`, `D_zbar H1`.
    pub dz: CMat<T>,
    pub dzb: CMat<T>,
    /// `L^{-1} K1 L^{-*}`, before removing the trace.
    pub rho0: CMat<T>,
}

/// Values of `f` at every non-exterior node (zero matrices elsewhere).
pub(crate) fn sample_field<T: Real>(grid: &DiscGrid<T>, hb: &HiggsBundleDisc<T>) -> Vec<CMat<T>> {
    let r = hb.rank();
    (0..grid.len())
        .into_par_iter()
        .map(|k| match grid.kind(k) {
            NodeKind::Exterior => CMat::<T>::zeros(r, r),
            _ => hb.eval(grid.point(k)),
        })
        .collect()
}

/// `(1/r) log det H` from the Cholesky factor.
pub(crate) fn log_det_over_r<T: Real>(h: &CMat<T>) -> Option<T> {
    let l = linalg::cholesky(h)?;
    let r = h.nrows();
    let mut acc = T::zero();
    for i in 0..r {
        acc += l[(i, i)].re.ln();
    }
    Some(acc * T::lit(2.0) / T::lit(r as f64))
}

/// Splits every non-exterior node into `(phi, H1)`.
pub(crate) fn split<T: Real>(m: &MetricField<T>) -> Option<(Vec<T>, Vec<CMat<T>>)> {
    let grid = m.grid();
    let r = m.rank();
    let parts: Vec<Option<(T, CMat<T>)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.kind(k) == NodeKind::Exterior {
                return Some((T::zero(), linalg::identity::<T>(r)));
            }
            let h = m.get(k);
            let phi = log_det_over_r(&h)?;
            Some((phi, linalg::hermitian_part(&(h * creal((-phi).exp())))))
        })
        .collect();
    let mut phi = Vec::with_capacity(parts.len());
    let mut h1 = Vec::with_capacity(parts.len());
    for p in parts {
        let (a, b) = p?;
        phi.push(a);
        h1.push(b);
    }
    Some((phi, h1))
}

/// `(1/4)` of the 5-point Laplacian of a scalar node field at `k`.
pub(crate) fn quarter_lap_scalar<T: Real>(grid: &DiscGrid<T>, u: &[T], k: usize) -> T {
    let [e, w, n, s] = grid.neighbours(k);
    let dx = grid.dx();
    (u[e] + u[w] + u[n] + u[s] - T::lit(4.0) * u[k]) / (T::lit(4.0) * dx * dx)
}

/// Node state at an interior node, or `None` if `H1` is not positive there.
pub(crate) fn node_state<T: Real>(
    grid: &DiscGrid<T>,
    h1: &[CMat<T>],
    f: &[CMat<T>],
    t: T,
    k: usize,
) -> Option<NodeState<T>> {
    let [e, w, n, s] = grid.neighbours(k);
    let dx = grid.dx();
    let hp = &h1[k];
    let l = linalg::cholesky(hp)?;
    let linv = linalg::lower_inverse(&l);
    let a = linv.adjoint() * &linv;
    let half_inv_dx = creal(T::one() / (T::lit(2.0) * dx));
    let ddx = (&h1[e] - &h1[w]) * half_inv_dx;
    let ddy = (&h1[n] - &h1[s]) * half_inv_dx;
    let i = Cx::new(T::zero(), T::one());
    let half = creal(T::lit(0.5));
    let dz = (&ddx - &ddy * i) * half;
    let dzb = (&ddx + &ddy * i) * half;
    let lap = (&h1[e] + &h1[w] + &h1[n] + &h1[s] - hp * creal(T::lit(4.0))) * creal(T::one() / (T::lit(4.0) * dx * dx));
    let fp = &f[k];
    let fs = fp.adjoint();
    let t2 = creal(t * t);
    let comm = hp * fp * &a * &fs * hp - &fs * hp * fp;
    let k1 = lap - &dzb * &a * &dz - comm * t2;
    let rho0 = linalg::hermitian_part(&(&linv * k1 * linv.adjoint()));
    Some(NodeState { h: hp.clone(), l, linv, a, dz, dzb, rho0 })
}

/// Traceless part.
pub(crate) fn traceless<T: Real>(m: &CMat<T>) -> CMat<T> {
    let r = m.nrows();
    let tr = linalg::trace(m) / creal(T::lit(r as f64));
    m - CMat::<T>::identity(r, r) * tr
}

/// Residual of a metric field.
#[derive(Debug, Clone)]
pub struct HitchinResidual<T: Real> {
    /// Interior nodes in grid order (see [`DiscGrid::interior`]).
    pub nodes: Vec<usize>,
    /// The endomorphism `R(h) - t^2 [f, f^dagger_h]` at each interior node.
    pub values: Vec<CMat<T>>,
    /// Its operator norm measured in `h`.
    pub norms: Vec<T>,
    pub sup_norm: T,
    /// `sum norms dx^2`.
    pub l1_norm: T,
}

/// Discrete residual of `h` for the Higgs field `t f dz`.
///
/// Panics only if `h` is not positive definite at some non-exterior node.
pub fn hitchin_residual<T: Real>(h: &MetricField<T>, hb: &HiggsBundleDisc<T>, t: T) -> HitchinResidual<T> {
    let grid = h.grid().clone();
    let r = h.rank();
    let f = sample_field(&grid, hb);
    let (phi, h1) = split(h).expect("metric must be positive definite");
    let per: Vec<(CMat<T>, T)> = grid
        .interior()
        .par_iter()
        .map(|&k| {
            let lp = quarter_lap_scalar(&grid, &phi, k);
            let id = CMat::<T>::identity(r, r);
            let herm = if r == 1 {
                id.clone() * creal(lp)
            } else {
                let st = node_state(&grid, &h1, &f, t, k).expect("metric must be positive definite");
                traceless(&st.rho0) + &id * creal(lp)
            };
            let norm = linalg::herm_norm(&herm);
            let value = if r == 1 {
                herm
            } else {
                let l = linalg::cholesky(&h1[k]).expect("positive");
                linalg::lower_inverse(&l).adjoint() * herm * l.adjoint()
            };
            (value, norm)
        })
        .collect();
    let dx2 = grid.dx() * grid.dx();
    let mut sup = T::zero();
    let mut l1 = T::zero();
    let mut values = Vec::with_capacity(per.len());
    let mut norms = Vec::with_capacity(per.len());
    for (v, n) in per {
        if n > sup {
            sup = n;
        }
        l1 += n * dx2;
        values.push(v);
        norms.push(n);
    }
    HitchinResidual { nodes: grid.interior().to_vec(), values, norms, sup_norm: sup, l1_norm: l1 }
}
