//! Symmetric pairings, the decoupled metric they determine, and the Gram
//! matrix bounds for metrics compatible with a pairing.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtered::PoleCheck;
use crate::grid::{DiscGrid, NodeKind};
use crate::higgs::{eigen_frame, HiggsBundleDisc};
use crate::linalg;
use crate::metric::MetricField;
use crate::poly::ComplexPoly;
use crate::scalar::{cabs, creal, CMat, Cx, Real};

/// Holomorphic symmetric bilinear form `C(u, v) = u^T C(z) v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPairingField<T: Real> {
    rank: usize,
    gram: Vec<ComplexPoly<T>>,
    pub label: String,
}

impl<T: Real> SymmetricPairingField<T> {
    pub fn new(rank: usize, gram: Vec<ComplexPoly<T>>, label: impl Into<String>) -> Result<Self> {
        if rank == 0 || gram.len() != rank * rank {
            return Err(Error::InvalidInput("pairing matrix has the wrong size".into()));
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i * rank + j] != gram[j * rank + i] {
                    return Err(Error::InvalidInput(format!("pairing is not symmetric at ({i}, {j})")));
                }
            }
        }
        let c = Self { rank, gram, label: label.into() };
        // det C is a polynomial of bounded degree; sampling more points than
        // that degree decides whether it vanishes identically.
        let dmax = c.gram.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        let samples = dmax * rank + 1;
        let nonzero = (0..samples).any(|k| {
            let ang = 0.7 + k as f64 * 2.1;
            let z = Cx::new(T::lit(0.5 * ang.cos()), T::lit(0.5 * ang.sin()));
            cabs(c.eval(z).determinant()) > T::lit(1e-12)
        });
        if !nonzero {
            return Err(Error::InvalidInput("pairing is degenerate everywhere".into()));
        }
        Ok(c)
    }

    /// Ones on the antidiagonal: self-adjoint for every companion field.
    pub fn antidiagonal(rank: usize) -> Result<Self> {
        let mut gram = vec![ComplexPoly::zero(); rank * rank];
        for i in 0..rank {
            gram[i * rank + (rank - 1 - i)] = ComplexPoly::one();
        }
        Self::new(rank, gram, "antidiagonal")
    }

    pub fn identity(rank: usize) -> Result<Self> {
        let mut gram = vec![ComplexPoly::zero(); rank * rank];
        for i in 0..rank {
            gram[i * rank + i] = ComplexPoly::one();
        }
        Self::new(rank, gram, "identity")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> &ComplexPoly<T> {
        &self.gram[i * self.rank + j]
    }

    pub fn eval(&self, z: Cx<T>) -> CMat<T> {
        CMat::<T>::from_fn(self.rank, self.rank, |i, j| self.entry(i, j).eval(z))
    }
}

/// Whether `f^T C = C f` holds as an identity of polynomial matrices.
pub fn check_higgs_selfadjoint<T: Real>(c: &SymmetricPairingField<T>, h: &HiggsBundleDisc<T>) -> bool {
    let r = c.rank;
    if h.rank() != r {
        return false;
    }
    let scale = h
        .entries()
        .iter()
        .map(|p| p.max_coeff())
        .fold(T::one(), |a, b| if b > a { b } else { a });
    let tol = T::lit(1e-12) * scale;
    for i in 0..r {
        for j in 0..r {
            let mut lhs = ComplexPoly::zero();
            let mut rhs = ComplexPoly::zero();
            for k in 0..r {
                lhs = &lhs + &(h.entry(k, i) * c.entry(k, j));
                rhs = &rhs + &(c.entry(i, k) * h.entry(k, j));
            }
            if (&lhs - &rhs).max_coeff() > tol {
                return false;
            }
        }
    }
    true
}

/// `coeff z^power`, the zero monomial having `coeff = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub coeff: i64,
    pub power: i64,
}

/// Gram matrix of the trace pairing `tr(zeta^{-k} a b)` on the pushforward
/// of `O` along `zeta -> zeta^r = z`, in the frame `1, zeta, ..., zeta^{r-1}`.
pub fn trace_pushforward_pairing(k: i64, r: u32) -> Result<Vec<Vec<Monomial>>> {
    if r == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    let ri = r as i64;
    Ok((0..ri)
        .map(|i| {
            (0..ri)
                .map(|j| {
                    let e = i + j - k;
                    if e.rem_euclid(ri) == 0 {
                        Monomial { coeff: ri, power: e / ri }
                    } else {
                        Monomial { coeff: 0, power: 0 }
                    }
                })
                .collect()
        })
        .collect())
}

/// Laurent polynomial with integer coefficients, `power -> coeff`.
pub type Laurent = BTreeMap<i64, i64>;

/// Exact determinant of a monomial matrix by permutation expansion.
pub fn monomial_determinant(m: &[Vec<Monomial>]) -> Laurent {
    let n = m.len();
    let mut out = Laurent::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, m, &mut out);
    out.retain(|_, c| *c != 0);
    out
}

fn permute(perm: &mut Vec<usize>, start: usize, m: &[Vec<Monomial>], out: &mut Laurent) {
    let n = perm.len();
    if start == n {
        let mut coeff = 1i64;
        let mut power = 0i64;
        for (i, &j) in perm.iter().enumerate() {
            let e = m[i][j];
            if e.coeff == 0 {
                return;
            }
            coeff *= e.coeff;
            power += e.power;
        }
        // Sign from the inversion count.
        let mut inv = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                if perm[a] > perm[b] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 1 {
            coeff = -coeff;
        }
        *out.entry(power).or_insert(0) += coeff;
        return;
    }
    for i in start..n {
        perm.swap(start, i);
        permute(perm, start + 1, m, out);
        perm.swap(start, i);
    }
}

/// Reads off the pole check from the Gram matrix itself.
pub fn classify_gram(m: &[Vec<Monomial>]) -> PoleCheck {
    if m.iter().flatten().any(|e| e.coeff != 0 && e.power < 0) {
        return PoleCheck::NotHolomorphic;
    }
    let det = monomial_determinant(m);
    match det.get(&0) {
        Some(c) if *c != 0 => PoleCheck::Nondegenerate,
        _ => PoleCheck::Degenerate,
    }
}

/// Pairing on the pushforward along a covering `z = phi(zeta)` induced by
/// `C_0(a, b) = G^{-1} a b`, `G = d phi / d zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianPairing<T: Real> {
    /// `G`.
    pub weight: ComplexPoly<T>,
    /// Local degree of `phi` at the origin.
    pub sheets: u32,
    /// Vanishing order of `G` at the origin.
    pub k: u32,
    pub check: PoleCheck,
}

impl<T: Real> JacobianPairing<T> {
    /// `|G(zeta)|^{-1}`, the weight of the induced metric `h_0`.
    pub fn metric_weight(&self, zeta: Cx<T>) -> T {
        T::one() / cabs(self.weight.eval(zeta))
    }
}

pub fn cover_pairing_from_jacobian<T: Real>(phi: &ComplexPoly<T>) -> Result<JacobianPairing<T>> {
    let g = phi.derivative();
    if g.is_zero() {
        return Err(Error::InvalidInput("covering map must be non-constant".into()));
    }
    let shifted = phi - &ComplexPoly::constant(phi.coeff(0));
    let sheets = shifted.valuation().expect("non-constant") as u32;
    let k = g.valuation().expect("non-zero") as u32;
    let check = crate::filtered::pairing_pole_check(k as i64, sheets)?;
    Ok(JacobianPairing { weight: g, sheets, k, check })
}

/// The decoupled metric `h^C` with the data it was built from.
#[derive(Debug, Clone)]
pub struct DecoupledMetric<T: Real> {
    pub metric: MetricField<T>,
    /// Per node (interior and ghost), the eigenframe columns used.
    pub frames: Vec<Option<CMat<T>>>,
    /// Per node, `|C(e_i, e_i)|` for the frame columns.
    pub weights: Vec<Option<Vec<T>>>,
}

/// `h^C` at a point: diagonal in the eigenframe with `h(e_i, e_i) = |C(e_i, e_i)|`.
pub fn decoupled_gram_at<T: Real>(
    h: &HiggsBundleDisc<T>,
    c: &SymmetricPairingField<T>,
    z: Cx<T>,
    tol: T,
) -> Result<(CMat<T>, CMat<T>, Vec<T>)> {
    let s = eigen_frame(h, z, tol)?;
    let cz = c.eval(z);
    let e = s.eigenvectors;
    let r = h.rank();
    let mut w = Vec::with_capacity(r);
    for i in 0..r {
        let col = e.column(i);
        let val = (col.transpose() * &cz * col)[(0, 0)];
        let a = cabs(val);
        if a < T::lit(1e-12) {
            return Err(Error::PairingDegenerate { value: a.to_f64() });
        }
        w.push(a);
    }
    let einv = linalg::inverse(&e).ok_or_else(|| Error::DegeneratePoint {
        z: format!("{}{:+}i", z.re.to_f64(), z.im.to_f64()),
        gap: s.min_gap.to_f64(),
        tol: tol.to_f64(),
    })?;
    let d = CMat::<T>::from_diagonal(&nalgebra::DVector::from_iterator(r, w.iter().map(|&x| creal(x))));
    let gram = linalg::hermitian_part(&(einv.adjoint() * d * &einv));
    Ok((gram, e, w))
}

pub fn decoupled_metric_from_pairing<T: Real>(
    h: &HiggsBundleDisc<T>,
    c: &SymmetricPairingField<T>,
    grid: Arc<DiscGrid<T>>,
) -> Result<DecoupledMetric<T>> {
    if !check_higgs_selfadjoint(c, h) {
        return Err(Error::PreconditionViolated("Higgs field is not self-adjoint for the pairing".into()));
    }
    let tol = h.default_tolerance();
    let r = h.rank();
    let per_node: Vec<Option<(CMat<T>, CMat<T>, Vec<T>)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| match grid.kind(k) {
            NodeKind::Exterior => Ok(None),
            _ => decoupled_gram_at(h, c, grid.point(k), tol).map(Some),
        })
        .collect::<Result<_>>()?;
    let mut metric = MetricField::identity(grid, r);
    let mut frames = Vec::with_capacity(per_node.len());
    let mut weights = Vec::with_capacity(per_node.len());
    for (k, v) in per_node.into_iter().enumerate() {
        match v {
            Some((g, e, w)) => {
                metric.set(k, &g);
                frames.push(Some(e));
                weights.push(Some(w));
            }
            None => {
                frames.push(None);
                weights.push(None);
            }
        }
    }
    Ok(DecoupledMetric { metric, frames, weights })
}

/// Largest `|[f, f^dagger_h]|` over interior and ghost nodes, measured in `h`.
pub fn decoupling_defect<T: Real>(m: &MetricField<T>, h: &HiggsBundleDisc<T>) -> T {
    let grid = m.grid().clone();
    (0..grid.len())
        .into_par_iter()
        .filter(|&k| grid.kind(k) != NodeKind::Exterior)
        .map(|k| {
            let hm = m.get(k);
            let f = h.eval(grid.point(k));
            let hinv = linalg::inverse(&hm).expect("positive definite");
            let fdag = &hinv * f.adjoint() * &hm;
            let comm = &f * &fdag - &fdag * &f;
            let l = linalg::cholesky(&hm).expect("positive definite");
            linalg::spectral_norm(&(l.adjoint() * comm * linalg::lower_inverse(&l).adjoint()))
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Pointwise failure of `h` to make `u -> C(u, .)` an isometry onto the dual.
///
/// With `N = C^{-1} conj(H) conj(C)^{-1} H`, compatibility is `N = I`; the
/// defect is `|N - I|` in the operator norm of `h`.
pub fn compatibility_defect_at<T: Real>(hm: &CMat<T>, cm: &CMat<T>) -> Result<T> {
    let cinv = linalg::inverse(cm).ok_or_else(|| Error::PairingDegenerate { value: 0.0 })?;
    let n_mat = &cinv * hm.map(|z| z.conj()) * cinv.map(|z| z.conj()) * hm;
    let r = hm.nrows();
    let l = linalg::cholesky(hm).ok_or(Error::NotPositive { node: 0 })?;
    let dev = n_mat - CMat::<T>::identity(r, r);
    Ok(linalg::spectral_norm(&(l.adjoint() * dev * linalg::lower_inverse(&l).adjoint())))
}

/// Maximum of [`compatibility_defect_at`] over interior nodes.
pub fn compatibility_defect<T: Real>(m: &MetricField<T>, c: &SymmetricPairingField<T>) -> Result<T> {
    if m.rank() != c.rank() {
        return Err(Error::InvalidInput("rank mismatch".into()));
    }
    let grid = m.grid().clone();
    let vals: Vec<T> = grid
        .interior()
        .par_iter()
        .map(|&k| compatibility_defect_at(&m.get(k), &c.eval(grid.point(k))))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(T::zero(), |a, b| if b > a { b } else { a }))
}

/// A metric compatible with the identity pairing, `H = exp(i B)`.
#[derive(Debug, Clone)]
pub struct GramMatrix<T: Real> {
    pub h: CMat<T>,
    /// `max_{i != j} |H_ij| / sqrt(H_ii H_jj)`.
    pub epsilon: T,
}

impl<T: Real> GramMatrix<T> {
    /// `exp(i B)` for a real antisymmetric `B` given row-major.
    pub fn from_antisymmetric(r: usize, b: &[T]) -> Result<Self> {
        if b.len() != r * r {
            return Err(Error::InvalidInput("B has the wrong size".into()));
        }
        for i in 0..r {
            for j in 0..r {
                if (b[i * r + j] + b[j * r + i]).abs() > T::lit(1e-14) {
                    return Err(Error::InvalidInput("B is not antisymmetric".into()));
                }
            }
        }
        let ib = CMat::<T>::from_fn(r, r, |i, j| Cx::new(T::zero(), b[i * r + j]));
        let h = linalg::herm_exp(&ib);
        let epsilon = offdiag_ratio(&h);
        Ok(Self { h, epsilon })
    }
}

fn offdiag_ratio<T: Real>(h: &CMat<T>) -> T {
    let r = h.nrows();
    let mut eps = T::zero();
    for i in 0..r {
        for j in 0..r {
            if i != j {
                let x = cabs(h[(i, j)]) / (h[(i, i)].re * h[(j, j)].re).sqrt();
                if x > eps {
                    eps = x;
                }
            }
        }
    }
    eps
}

/// Draws `B` with entries uniform in `[-scale, scale]` from a ChaCha8 stream.
pub fn sample_compatible_metric<T: Real>(r: usize, scale: T, seed: u64) -> Result<GramMatrix<T>> {
    if r == 0 || scale < T::zero() {
        return Err(Error::InvalidInput("need r >= 1 and scale >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = vec![T::zero(); r * r];
    for i in 0..r {
        for j in (i + 1)..r {
            let v = T::lit(rng.random_range(-1.0..=1.0)) * scale;
            b[i * r + j] = v;
            b[j * r + i] = -v;
        }
    }
    GramMatrix::from_antisymmetric(r, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramReport {
    /// `sum_j H_jj`.
    pub a: f64,
    pub max_diag_dev: f64,
    pub max_offdiag: f64,
    pub pass: bool,
}

/// Checks the bounds `A <= 2r`, `|H_ii - 1| <= 4 r^2 eps` and
/// `|H_ij| <= eps (1 + 4 r^2 eps)`.
pub fn gram_bounds<T: Real>(g: &GramMatrix<T>, eps: T) -> Result<GramReport> {
    let h = &g.h;
    let r = h.nrows();
    let rt = T::lit(r as f64);
    if eps > T::one() / (T::lit(2.0) * rt) {
        return Err(Error::PreconditionViolated(format!("eps = {} exceeds 1/(2r)", eps.to_f64())));
    }
    let slack = T::lit(1e-12);
    for i in 0..r {
        for j in 0..r {
            if i != j && cabs(h[(i, j)]) > eps * (h[(i, i)].re * h[(j, j)].re).sqrt() + slack {
                return Err(Error::PreconditionViolated(format!("|H_{i}{j}| exceeds eps sqrt(H_ii H_jj)")));
            }
        }
    }
    let a = (0..r).fold(T::zero(), |acc, j| acc + h[(j, j)].re);
    let mut diag_dev = T::zero();
    let mut off = T::zero();
    for i in 0..r {
        let d = (h[(i, i)].re - T::one()).abs();
        if d > diag_dev {
            diag_dev = d;
        }
        for j in 0..r {
            if i != j && cabs(h[(i, j)]) > off {
                off = cabs(h[(i, j)]);
            }
        }
    }
    let four_r2 = T::lit(4.0) * rt * rt;
    let pass = a <= T::lit(2.0) * rt + slack
        && diag_dev <= four_r2 * eps + slack
        && off <= eps * (T::one() + four_r2 * eps) + slack;
    Ok(GramReport { a: a.to_f64(), max_diag_dev: diag_dev.to_f64(), max_offdiag: off.to_f64(), pass })
}
