//! Pointwise identities and bounds satisfied by solutions.

use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{DiscGrid, NodeKind, Region};
use crate::higgs::HiggsBundleDisc;
use crate::linalg;
use crate::metric::MetricField;
use crate::scalar::{cabs, creal, CMat, Cx, Real};

fn centered<T: Real>(grid: &DiscGrid<T>, m: &[CMat<T>], k: usize) -> (CMat<T>, CMat<T>) {
    let [e, w, n, s] = grid.neighbours(k);
    let c = creal(T::one() / (T::lit(4.0) * grid.dx()));
    let i = Cx::new(T::zero(), T::one());
    let dx = &m[e] - &m[w];
    let dy = &m[n] - &m[s];
    ((&dx - &dy * i) * c, (&dx + &dy * i) * c)
}

/// Largest discrepancy in the trace identity for `S = H0^{-1} H1`:
///
/// ```text
/// d_z d_zbar tr S = tr(d_zbar S . S^{-1} . D'S) + t^2 tr([f, S] S^{-1} [f, S]^*)
/// ```
///
/// with `D'S = d_z S + [H0^{-1} d_z H0, S]` and `^*` the `h0`-adjoint.
pub fn trace_identity_check<T: Real>(h0: &MetricField<T>, h1: &MetricField<T>, hb: &HiggsBundleDisc<T>, t: T) -> T {
    let grid = h0.grid().clone();
    let r = h0.rank();
    let zero = CMat::<T>::zeros(r, r);
    let (hs, ss): (Vec<CMat<T>>, Vec<CMat<T>>) = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.kind(k) == NodeKind::Exterior {
                return (zero.clone(), zero.clone());
            }
            let a = h0.get(k);
            let s = linalg::inverse(&a).expect("positive definite") * h1.get(k);
            (a, s)
        })
        .unzip();
    let dx2 = grid.dx() * grid.dx();
    grid.interior()
        .par_iter()
        .map(|&k| {
            let [e, w, n, s] = grid.neighbours(k);
            let tr = |m: &CMat<T>| linalg::trace(m);
            let lhs = (tr(&ss[e]) + tr(&ss[w]) + tr(&ss[n]) + tr(&ss[s]) - tr(&ss[k]) * creal(T::lit(4.0)))
                * creal(T::one() / (T::lit(4.0) * dx2));
            let sk = &ss[k];
            let sinv = linalg::inverse(sk).expect("positive definite");
            let h0inv = linalg::inverse(&hs[k]).expect("positive definite");
            let (dz_h0, _) = centered(&grid, &hs, k);
            let a = &h0inv * dz_h0;
            let (dz_s, dzb_s) = centered(&grid, &ss, k);
            let dps = dz_s + &a * sk - sk * &a;
            let f = hb.eval(grid.point(k));
            let g = &h0inv * f.adjoint() * &hs[k];
            let fs = &f * sk - sk * &f;
            let fs_adj = sk * &g - &g * sk;
            let rhs = tr(&(dzb_s * &sinv * dps)) + tr(&(fs * &sinv * fs_adj)) * creal(t * t);
            cabs(lhs - rhs)
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub interior_max: f64,
    pub boundary_max: f64,
    /// `max(0, interior_max - boundary_max)`.
    pub excess: f64,
}

/// Compares the interior and boundary maxima of `tr(H0^{-1} H1)`.
pub fn max_principle_check<T: Real>(h0: &MetricField<T>, h1: &MetricField<T>) -> MaxPrincipleReport {
    let grid = h0.grid();
    let trs = |k: usize| {
        let s = linalg::inverse(&h0.get(k)).expect("positive definite") * h1.get(k);
        linalg::trace(&s).re.to_f64()
    };
    let interior_max = grid.interior().par_iter().map(|&k| trs(k)).reduce(|| f64::NEG_INFINITY, f64::max);
    let boundary_max = grid.boundary().par_iter().map(|b| trs(b.index)).reduce(|| f64::NEG_INFINITY, f64::max);
    MaxPrincipleReport { interior_max, boundary_max, excess: (interior_max - boundary_max).max(0.0) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpsonReport {
    /// `sup_K |t f|_h`, Frobenius norm in an `h`-unitary frame.
    pub sup_norm: f64,
    /// `t r max_K max_i |beta_i|`.
    pub spectral_bound: f64,
    /// `sup_norm <= 4 spectral_bound`.
    pub pass: bool,
}

pub fn simpson_sup_check<T: Real>(h: &MetricField<T>, hb: &HiggsBundleDisc<T>, t: T, region: &Region) -> SimpsonReport {
    let grid = h.grid();
    let r = h.rank() as f64;
    let nodes: Vec<usize> = grid.interior().iter().copied().filter(|&k| region.contains(grid.point(k))).collect();
    let (sup, beta) = nodes
        .par_iter()
        .map(|&k| {
            let f = hb.eval(grid.point(k));
            let l = linalg::cholesky(&h.get(k)).expect("positive definite");
            let norm = linalg::fro(&(l.adjoint() * &f * linalg::lower_inverse(&l).adjoint())).to_f64();
            let beta = linalg::eigenvalues(&f).into_iter().map(|b| cabs(b).to_f64()).fold(0.0, f64::max);
            (norm, beta)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let t = t.to_f64();
    let sup_norm = t * sup;
    let spectral_bound = t * r * beta;
    SimpsonReport { sup_norm, spectral_bound, pass: sup_norm <= 4.0 * spectral_bound * (1.0 + 1e-12) }
}
