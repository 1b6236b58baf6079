//! Dirichlet problem for the rescaled Hitchin equation on a disc grid.
//!
//! The trace part `phi = (1/r) log det H` is the discrete harmonic extension
//! of its boundary values and is computed once by a sparse solve. The
//! determinant-one part `H1` is found by Newton's method in the chart
//! `H1 = L exp(X) L^*`, `X` traceless Hermitian, or by an explicit flow in
//! the same chart.

mod diagnostics;
mod radial;
mod residual;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscGrid;
use crate::higgs::HiggsBundleDisc;
use crate::linalg;
use crate::metric::MetricField;
use crate::scalar::{creal, CMat, Cx, Real};

pub use diagnostics::{
    max_principle_check, simpson_sup_check, trace_identity_check, MaxPrincipleReport, SimpsonReport,
};
pub use radial::{radial_cyclic_solve, RadialProfile};
pub use residual::{hitchin_residual, HitchinResidual};

use residual::{node_state, quarter_lap_scalar, sample_field, split, traceless, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Explicit relaxation; cheap per step, needs `O(n^2)` steps.
    Flow,
    #[default]
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Target for the sup norm of the discrete residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length, in `(0, 1]`.
    pub damping: f64,
    pub scheme: Scheme,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 60, damping: 1.0, scheme: Scheme::Newton }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("solver tol must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidInput("solver damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_residual: f64,
    /// `max |log det H - r phi|` over interior nodes, `phi` the harmonic extension.
    pub det_drift: f64,
    pub scheme: Scheme,
    pub damping: f64,
    /// Sup norm of the residual before each iteration.
    pub history: Vec<f64>,
}

/// Discrete harmonic extension of the ghost values of `u` into the interior.
pub fn harmonic_extension<T: Real>(grid: &DiscGrid<T>, u: &[T]) -> Result<Vec<T>> {
    let interior = grid.interior();
    let m = interior.len();
    let mut trip = Vec::with_capacity(5 * m);
    let mut rhs = Mat::<T>::zeros(m, 1);
    for (s, &k) in interior.iter().enumerate() {
        trip.push(Triplet::new(s, s, T::lit(-4.0)));
        for q in grid.neighbours(k) {
            match grid.slot(q) {
                Some(sq) => trip.push(Triplet::new(s, sq, T::one())),
                None => rhs[(s, 0)] -= u[q],
            }
        }
    }
    let a = SparseColMat::<usize, T>::try_new_from_triplets(m, m, &trip)
        .map_err(|e| Error::InvalidInput(format!("sparse assembly failed: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::InvalidInput(format!("Laplace factorization failed: {e:?}")))?;
    lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
    let mut out = u.to_vec();
    for (s, &k) in interior.iter().enumerate() {
        out[k] = rhs[(s, 0)];
    }
    Ok(out)
}

struct Problem<'a, T: Real> {
    grid: &'a DiscGrid<T>,
    f: Vec<CMat<T>>,
    t: T,
    r: usize,
    basis: Vec<CMat<T>>,
    /// `(1/4) Lap phi` at interior nodes, by slot.
    lap_phi: Vec<T>,
}

impl<T: Real> Problem<'_, T> {
    fn states(&self, h1: &[CMat<T>]) -> Option<Vec<NodeState<T>>> {
        self.grid
            .interior()
            .par_iter()
            .map(|&k| node_state(self.grid, h1, &self.f, self.t, k))
            .collect()
    }

    /// Sup norm of the full residual and Euclidean norm of the traceless part.
    fn norms(&self, states: &[NodeState<T>]) -> (T, T) {
        let id = CMat::<T>::identity(self.r, self.r);
        let per: Vec<(T, T)> = states
            .par_iter()
            .zip(self.lap_phi.par_iter())
            .map(|(st, &lp)| {
                let tf = traceless(&st.rho0);
                let full = &tf + &id * creal(lp);
                (linalg::herm_norm(&full), linalg::fro(&tf))
            })
            .collect();
        let mut sup = T::zero();
        let mut l2 = T::zero();
        for (s, f) in per {
            if s > sup {
                sup = s;
            }
            l2 += f * f;
        }
        (sup, l2.sqrt())
    }

    fn rhs(&self, states: &[NodeState<T>]) -> Vec<T> {
        let m = self.basis.len();
        let mut out = vec![T::zero(); states.len() * m];
        for (s, st) in states.iter().enumerate() {
            for (c, e) in self.basis.iter().enumerate() {
                out[s * m + c] = -linalg::re_tr_prod(e, &st.rho0);
            }
        }
        out
    }

    /// `delta K1` at node `p` for the perturbation `delta` of `H1` at node
    /// `q`, where `q` is `p` itself (`dir = None`) or its neighbour in
    /// direction `dir` (east, west, north, south).
    fn delta_k(&self, st: &NodeState<T>, fp: &CMat<T>, delta: &CMat<T>, dir: Option<usize>) -> CMat<T> {
        let dx = self.grid.dx();
        let inv4 = T::one() / (T::lit(4.0) * dx);
        let lap_off = creal(T::one() / (T::lit(4.0) * dx * dx));
        match dir {
            Some(d) => {
                // Coefficients of this neighbour in D_z and D_zbar.
                let (a, b) = match d {
                    0 => (creal(inv4), creal(inv4)),
                    1 => (creal(-inv4), creal(-inv4)),
                    2 => (Cx::new(T::zero(), -inv4), Cx::new(T::zero(), inv4)),
                    _ => (Cx::new(T::zero(), inv4), Cx::new(T::zero(), -inv4)),
                };
                let t1 = delta * &st.a * &st.dz * b;
                let t2 = &st.dzb * &st.a * delta * a;
                delta * lap_off - t1 - t2
            }
            None => {
                let h = &st.h;
                let a = &st.a;
                let fs = fp.adjoint();
                let lap = creal(-T::one() / (dx * dx));
                let curv = &st.dzb * a * delta * a * &st.dz;
                let afs_h = a * &fs * h;
                let hfa = h * fp * a;
                let comm = delta * fp * &afs_h - &hfa * delta * &afs_h + &hfa * &fs * delta - &fs * delta * fp;
                delta * lap + curv - comm * creal(self.t * self.t)
            }
        }
    }

    fn jacobian(&self, states: &[NodeState<T>]) -> Result<SparseColMat<usize, T>> {
        let grid = self.grid;
        let m = self.basis.len();
        let interior = grid.interior();
        let blocks: Vec<Vec<Triplet<usize, usize, T>>> = interior
            .par_iter()
            .enumerate()
            .map(|(s, &k)| {
                let st = &states[s];
                let mut out = Vec::with_capacity(5 * m * m);
                let nb = grid.neighbours(k);
                let targets = std::iter::once((k, None)).chain(nb.iter().enumerate().map(|(d, &q)| (q, Some(d))));
                for (q, dir) in targets {
                    let Some(sq) = grid.slot(q) else { continue };
                    let lq = &states[sq].l;
                    for (kk, ek) in self.basis.iter().enumerate() {
                        let delta = lq * ek * lq.adjoint();
                        let dk = self.delta_k(st, &self.f[k], &delta, dir);
                        let mut drho = &st.linv * dk * st.linv.adjoint();
                        if dir.is_none() {
                            drho -= (ek * &st.rho0 + &st.rho0 * ek) * creal(T::lit(0.5));
                        }
                        for (c, ec) in self.basis.iter().enumerate() {
                            // Zeros are kept so the pattern is fixed across iterations.
                            let v = linalg::re_tr_prod(ec, &drho);
                            out.push(Triplet::new(s * m + c, sq * m + kk, v));
                        }
                    }
                }
                out
            })
            .collect();
        let trip: Vec<_> = blocks.into_iter().flatten().collect();
        let dim = interior.len() * m;
        SparseColMat::try_new_from_triplets(dim, dim, &trip)
            .map_err(|e| Error::InvalidInput(format!("sparse assembly failed: {e:?}")))
    }

    /// `H1 <- L exp(eta X) L^*` at every interior node.
    fn update(&self, h1: &[CMat<T>], states: &[NodeState<T>], step: &[T], eta: T) -> Vec<CMat<T>> {
        let m = self.basis.len();
        let mut out = h1.to_vec();
        let new: Vec<CMat<T>> = states
            .par_iter()
            .enumerate()
            .map(|(s, st)| {
                let mut x = CMat::<T>::zeros(self.r, self.r);
                for (c, e) in self.basis.iter().enumerate() {
                    x += e * creal(step[s * m + c] * eta);
                }
                linalg::hermitian_part(&(&st.l * linalg::herm_exp(&x) * st.l.adjoint()))
            })
            .collect();
        for (s, &k) in self.grid.interior().iter().enumerate() {
            out[k] = new[s].clone();
        }
        out
    }
}

fn not_converged<T: Real>(
    iterations: usize,
    residual: T,
    cfg: &SolveConfig,
    history: Vec<f64>,
) -> Error {
    Error::NotConverged(SolveStats {
        iterations,
        final_residual: residual.to_f64(),
        det_drift: f64::NAN,
        scheme: cfg.scheme,
        damping: cfg.damping,
        history,
    })
}

/// Solves the Dirichlet problem for the Higgs field `t f dz`.
///
/// The ghost values of `data` are the boundary condition; its interior
/// values are the initial guess.
pub fn solve_dirichlet<T: Real>(
    hb: &HiggsBundleDisc<T>,
    t: T,
    data: &MetricField<T>,
    cfg: &SolveConfig,
) -> Result<(MetricField<T>, SolveStats)> {
    cfg.validate()?;
    if t < T::zero() {
        return Err(Error::InvalidInput("t must be nonnegative".into()));
    }
    if hb.rank() != data.rank() {
        return Err(Error::InvalidInput("rank mismatch between Higgs field and metric".into()));
    }
    let grid = data.grid().clone();
    let r = data.rank();
    for b in grid.boundary() {
        if linalg::cholesky(&data.get(b.index)).is_none() {
            return Err(Error::NotPositive { node: b.index });
        }
    }
    let (phi_raw, mut h1) = split(data).ok_or_else(|| {
        Error::InvalidInput("initial interior guess is not positive definite".into())
    })?;
    let phi = harmonic_extension(&grid, &phi_raw)?;
    let lap_phi: Vec<T> = grid.interior().iter().map(|&k| quarter_lap_scalar(&grid, &phi, k)).collect();
    let problem = Problem {
        grid: &grid,
        f: sample_field(&grid, hb),
        t,
        r,
        basis: linalg::traceless_hermitian_basis(r),
        lap_phi,
    };
    let tol = T::lit(cfg.tol);
    let mut history = Vec::new();
    let mut iterations = 0;

    if r > 1 {
        let mut states = problem
            .states(&h1)
            .ok_or_else(|| Error::InvalidInput("initial guess is not positive definite".into()))?;
        let mut symbolic: Option<SymbolicLu<usize>> = None;
        loop {
            let (sup, l2) = problem.norms(&states);
            history.push(sup.to_f64());
            if sup <= tol {
                break;
            }
            if iterations >= cfg.max_iter {
                return Err(not_converged(iterations, sup, cfg, history));
            }
            iterations += 1;
            let (next_h1, next_states) = match cfg.scheme {
                Scheme::Newton => {
                    let jac = problem.jacobian(&states)?;
                    if symbolic.is_none() {
                        symbolic = Some(
                            SymbolicLu::try_new(jac.symbolic())
                                .map_err(|_| not_converged(iterations, sup, cfg, history.clone()))?,
                        );
                    }
                    let lu = Lu::try_new_with_symbolic(symbolic.clone().expect("set above"), jac.as_ref())
                        .map_err(|_| not_converged(iterations, sup, cfg, history.clone()))?;
                    let rhs = problem.rhs(&states);
                    let mut x = Mat::<T>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                    lu.solve_in_place_with_conj(Conj::No, x.as_mut());
                    let step: Vec<T> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
                    let mut eta = T::lit(cfg.damping);
                    let mut accepted = None;
                    for _ in 0..12 {
                        let trial = problem.update(&h1, &states, &step, eta);
                        if let Some(ts) = problem.states(&trial) {
                            let (_, tl2) = problem.norms(&ts);
                            if tl2 < (T::one() - T::lit(1e-4) * eta) * l2 || tl2 <= tol {
                                accepted = Some((trial, ts));
                                break;
                            }
                        }
                        eta *= T::lit(0.5);
                    }
                    accepted.ok_or_else(|| not_converged(iterations, sup, cfg, history.clone()))?
                }
                Scheme::Flow => {
                    let dx = grid.dx();
                    let fmax = problem.f.iter().map(|m| linalg::fro(m)).fold(T::zero(), |a, b| if b > a { b } else { a });
                    let dt = T::lit(cfg.damping * 0.4) * dx * dx
                        / (T::one() + T::lit(2.0) * dx * dx * t * t * fmax * fmax);
                    let m = problem.basis.len();
                    let mut step = problem.rhs(&states);
                    for v in step.iter_mut() {
                        *v = -*v;
                    }
                    debug_assert_eq!(step.len(), states.len() * m);
                    let trial = problem.update(&h1, &states, &step, dt);
                    let ts = problem
                        .states(&trial)
                        .ok_or_else(|| not_converged(iterations, sup, cfg, history.clone()))?;
                    (trial, ts)
                }
            };
            h1 = next_h1;
            states = next_states;
        }
    } else {
        let (sup, _) = problem.norms(&problem.states(&h1).expect("rank one is always positive"));
        history.push(sup.to_f64());
    }

    let final_residual = *history.last().unwrap_or(&0.0);
    let mut out = data.clone();
    let mut drift = T::zero();
    for &k in grid.interior() {
        let hk = if r == 1 {
            CMat::<T>::from_element(1, 1, creal(phi[k].exp()))
        } else {
            &h1[k] * creal(phi[k].exp())
        };
        let ld = residual::log_det_over_r(&hk).ok_or(Error::NotPositive { node: k })?;
        let d = ((ld - phi[k]) * T::lit(r as f64)).abs();
        if d > drift {
            drift = d;
        }
        out.set(k, &hk);
    }
    let stats = SolveStats {
        iterations,
        final_residual,
        det_drift: drift.to_f64(),
        scheme: cfg.scheme,
        damping: cfg.damping,
        history,
    };
    Ok((out, stats))
}

/// Retries [`solve_dirichlet`] with halved damping, up to three times.
pub fn solve_with_retry<T: Real>(
    hb: &HiggsBundleDisc<T>,
    t: T,
    data: &MetricField<T>,
    cfg: &SolveConfig,
) -> Result<(MetricField<T>, SolveStats)> {
    let mut c = *cfg;
    let mut last = None;
    for _ in 0..4 {
        match solve_dirichlet(hb, t, data, &c) {
            Ok(v) => return Ok(v),
            Err(Error::NotConverged(s)) => {
                last = Some(Error::NotConverged(s));
                c.damping *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
