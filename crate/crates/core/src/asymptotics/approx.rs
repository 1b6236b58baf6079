use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscGrid, NodeKind};
use crate::higgs::HiggsBundleDisc;
use crate::linalg;
use crate::metric::MetricField;
use crate::scalar::{cabs, creal, CMat, Cx, Real};
use crate::solver::{hitchin_residual, solve_with_retry, SolveConfig, SolveStats};

/// Quintic smoothstep cutoff: 1 below `inner`, 0 above `outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { inner: 0.5, outer: 2.0 / 3.0 }
    }
}

pub fn build_cutoff(inner: f64, outer: f64) -> Result<CutoffProfile> {
    if !(inner > 0.0 && inner < outer && outer.is_finite()) {
        return Err(Error::InvalidInput(format!("cutoff radii must satisfy 0 < {inner} < {outer}")));
    }
    Ok(CutoffProfile { inner, outer })
}

impl CutoffProfile {
    fn u(&self, x: f64) -> f64 {
        ((x - self.inner) / (self.outer - self.inner)).clamp(0.0, 1.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = self.u(x);
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let u = self.u(x);
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        -30.0 * u * u * (1.0 - u) * (1.0 - u) / (self.outer - self.inner)
    }
}

/// Solves the Dirichlet problem on the largest disc of radius at most
/// `radius` whose grid is a sub-grid of `h_limit`'s, with boundary values
/// from `h_limit`, and embeds the result back (values outside the smaller
/// disc are those of `h_limit`).
pub fn solve_inner<T: Real>(
    hb: &HiggsBundleDisc<T>,
    t: T,
    h_limit: &MetricField<T>,
    radius: T,
    cfg: &SolveConfig,
) -> Result<(MetricField<T>, SolveStats)> {
    let grid = h_limit.grid();
    let (n, dx) = (grid.n(), grid.dx());
    let m = ((grid.radius() - radius) / dx).to_f64().ceil().max(0.0) as usize;
    if 2 * m + 4 > n {
        return Err(Error::InvalidInput("inner disc is too small for the grid".into()));
    }
    let sub_n = n - 2 * m;
    let sub = Arc::new(DiscGrid::new(sub_n, grid.radius() - T::lit(m as f64) * dx)?);
    let map = |k: usize| (k / sub_n + m) * n + (k % sub_n + m);
    let data = MetricField::from_fn(sub.clone(), h_limit.rank(), |_| linalg::identity::<T>(h_limit.rank()));
    let mut data = data;
    for k in 0..sub.len() {
        if sub.kind(k) != NodeKind::Exterior {
            data.set(k, &h_limit.get(map(k)));
        }
    }
    let (sol, stats) = solve_with_retry(hb, t, &data, cfg)?;
    let mut out = h_limit.clone();
    for &k in sub.interior() {
        out.set(map(k), &sol.get(k));
    }
    Ok((out, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxReport {
    /// `sum |R| dx^2` over the transition nodes, `R` the residual of the
    /// patched metric measured in that metric.
    pub l1_norm: f64,
    /// Same for `R - (chi R_inner + (1 - chi) R_limit)`, i.e. with the
    /// discretization residual of the two inputs removed.
    pub l1_excess: f64,
    /// Largest deviation from the input residuals off the transition nodes.
    pub support_defect: f64,
    pub supported: bool,
    /// `max |det H~ - det H_limit|`.
    pub det_defect: f64,
    pub transition_nodes: usize,
}

/// Tolerance of the support check.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Patched metric for a cyclic Higgs field, using the eigenframe
/// `v_p = (1, beta_p, ..., beta_p^{r-1})`.
pub fn build_approximate_solution<T: Real>(
    h_limit: &MetricField<T>,
    h_inner: &MetricField<T>,
    chi: &CutoffProfile,
    hb: &HiggsBundleDisc<T>,
    t: T,
) -> Result<(MetricField<T>, ApproxReport)> {
    let q = hb.as_cyclic().ok_or_else(|| {
        Error::PreconditionViolated("approximate solutions need a cyclic Higgs field or a supplied frame".into())
    })?;
    let r = hb.rank();
    let frame = move |z: Cx<T>| -> Option<CMat<T>> {
        let qz = q.eval(z);
        if cabs(qz) == T::zero() {
            return None;
        }
        let polar = |m: T, a: T| Cx::new(m * a.cos(), m * a.sin());
        let root = polar(cabs(qz).powf(T::one() / T::lit(r as f64)), qz.im.atan2(qz.re) / T::lit(r as f64));
        Some(CMat::<T>::from_fn(r, r, |i, p| {
            let w = polar(T::one(), T::lit(std::f64::consts::TAU * p as f64 / r as f64));
            (root * w).powu(i as u32)
        }))
    };
    build_approximate_solution_with_frame(h_limit, h_inner, chi, hb, t, frame)
}

/// As [`build_approximate_solution`] with an explicit frame of eigenlines
/// (columns), required wherever `0 < chi < 1`.
pub fn build_approximate_solution_with_frame<T: Real>(
    h_limit: &MetricField<T>,
    h_inner: &MetricField<T>,
    chi: &CutoffProfile,
    hb: &HiggsBundleDisc<T>,
    t: T,
    frame: impl Fn(Cx<T>) -> Option<CMat<T>> + Sync,
) -> Result<(MetricField<T>, ApproxReport)> {
    h_limit.check_compatible(h_inner)?;
    let grid = h_limit.grid().clone();
    let r = hb.rank();
    let rr = T::lit(r as f64);
    let weight: Vec<f64> = (0..grid.len())
        .map(|k| chi.value(cabs(grid.point(k)).to_f64().powf(1.0 / r as f64)))
        .collect();
    let nodes: Vec<Option<CMat<T>>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.kind(k) == NodeKind::Exterior {
                return Ok(None);
            }
            let c = weight[k];
            let hl = h_limit.get(k);
            let mixed = if c >= 1.0 {
                h_inner.get(k)
            } else if c <= 0.0 {
                hl.clone()
            } else {
                let z = grid.point(k);
                let v = frame(z).ok_or_else(|| Error::DegeneratePoint {
                    z: format!("{}{:+}i", z.re.to_f64(), z.im.to_f64()),
                    gap: 0.0,
                    tol: 0.0,
                })?;
                let gi = v.adjoint() * h_inner.get(k) * &v;
                let gl = v.adjoint() * &hl * &v;
                let cc = T::lit(c);
                let mut g = CMat::<T>::zeros(r, r);
                for p in 0..r {
                    for s in 0..r {
                        g[(p, s)] = if p == s {
                            creal((cc * gi[(p, p)].re.ln() + (T::one() - cc) * gl[(p, p)].re.ln()).exp())
                        } else {
                            gi[(p, s)] * creal(cc) + gl[(p, s)] * creal(T::one() - cc)
                        };
                    }
                }
                let vinv = linalg::inverse(&v).ok_or(Error::NotPositive { node: k })?;
                linalg::hermitian_part(&(vinv.adjoint() * g * vinv))
            };
            if linalg::cholesky(&mixed).is_none() {
                return Err(Error::NotPositive { node: k });
            }
            // det H~ = det H_limit.
            let ratio = linalg::determinant(&hl).re / linalg::determinant(&mixed).re;
            Ok(Some(&mixed * creal(ratio.powf(T::one() / rr))))
        })
        .collect::<Result<_>>()?;
    let mut out = h_limit.clone();
    let mut det_defect: f64 = 0.0;
    for (k, m) in nodes.into_iter().enumerate() {
        if let Some(m) = m {
            det_defect = det_defect.max(cabs(linalg::determinant(&m) - linalg::determinant(&h_limit.get(k))).to_f64());
            out.set(k, &m);
        }
    }

    let res = hitchin_residual(&out, hb, t);
    let res_in = hitchin_residual(h_inner, hb, t);
    let res_lim = hitchin_residual(h_limit, hb, t);
    let dx2 = (grid.dx() * grid.dx()).to_f64();
    let mut l1 = 0.0;
    let mut l1_excess = 0.0;
    let mut support_defect: f64 = 0.0;
    let mut transition = 0;
    for (i, &k) in res.nodes.iter().enumerate() {
        let stencil = std::iter::once(k).chain(grid.neighbours(k));
        let ws: Vec<f64> = stencil.map(|m| weight[m]).collect();
        let all_in = ws.iter().all(|&w| w >= 1.0);
        let all_out = ws.iter().all(|&w| w <= 0.0);
        let l = linalg::cholesky(&out.get(k)).expect("checked positive");
        let measure = |m: &CMat<T>| linalg::spectral_norm(&(l.adjoint() * m * linalg::lower_inverse(&l).adjoint())).to_f64();
        if all_in || all_out {
            let bg = if all_in { &res_in.values[i] } else { &res_lim.values[i] };
            support_defect = support_defect.max(measure(&(&res.values[i] - bg)));
        } else {
            transition += 1;
            let c = creal(T::lit(weight[k]));
            let bg = &res_in.values[i] * c + &res_lim.values[i] * (creal(T::one()) - c);
            l1 += res.norms[i].to_f64() * dx2;
            l1_excess += measure(&(&res.values[i] - bg)) * dx2;
        }
    }
    let report = ApproxReport {
        l1_norm: l1,
        l1_excess,
        support_defect,
        supported: support_defect <= SUPPORT_TOL,
        det_defect,
        transition_nodes: transition,
    };
    Ok((out, report))
}
