//! Higgs fields on the disc and their spectral data.
//!
//! A Higgs field is `theta = f dz` with `f` an `r x r` matrix of polynomials in
//! `z`. Everything here is a pure function of immutable values.

use std::cmp::Ordering;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::ComplexPoly;
use crate::scalar::{cabs, creal, CMat, Cx, Real};

/// The pair `(E, theta)` on the disc `|z| < domain_radius`, with `E` trivial.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsBundleDisc<T: Real> {
    rank: usize,
    /// Row-major `rank x rank` entries of `f`.
    field: Vec<ComplexPoly<T>>,
    domain_radius: T,
}

/// Eigen-data of `f` at a point off the branch locus.
#[derive(Debug, Clone)]
pub struct SpectralSample<T: Real> {
    pub point: Cx<T>,
    /// Sorted lexicographically on `(Re, Im)`.
    pub eigenvalues: Vec<Cx<T>>,
    /// Unit-norm eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMat<T>,
    pub min_gap: T,
}

#[derive(Debug, Clone)]
pub struct BranchLocus<T: Real> {
    pub points: Vec<Cx<T>>,
    pub tolerance: T,
}

/// The cyclic cover `zeta -> zeta^order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverMap {
    pub order: u32,
}

impl CoverMap {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("cover order must be at least 1".into()));
        }
        Ok(Self { order })
    }
}

impl<T: Real> HiggsBundleDisc<T> {
    pub fn new(rank: usize, field: Vec<ComplexPoly<T>>) -> Result<Self> {
        Self::with_radius(rank, field, T::one())
    }

    pub fn with_radius(rank: usize, field: Vec<ComplexPoly<T>>, domain_radius: T) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        if field.len() != rank * rank {
            return Err(Error::InvalidInput(format!(
                "expected {} matrix entries for rank {rank}, got {}",
                rank * rank,
                field.len()
            )));
        }
        if !(domain_radius > T::zero()) {
            return Err(Error::InvalidInput("domain radius must be positive".into()));
        }
        Ok(Self { rank, field, domain_radius })
    }

    /// Constant Higgs field.
    pub fn constant(m: &CMat<T>) -> Result<Self> {
        let r = m.nrows();
        let mut field = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                field.push(ComplexPoly::constant(m[(i, j)]));
            }
        }
        Self::new(r, field)
    }

    pub fn diagonal(entries: Vec<ComplexPoly<T>>) -> Result<Self> {
        let r = entries.len();
        let mut field = vec![ComplexPoly::zero(); r * r];
        for (i, p) in entries.into_iter().enumerate() {
            field[i * r + i] = p;
        }
        Self::new(r, field)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn domain_radius(&self) -> T {
        self.domain_radius
    }

    pub fn entry(&self, i: usize, j: usize) -> &ComplexPoly<T> {
        &self.field[i * self.rank + j]
    }

    pub fn entries(&self) -> &[ComplexPoly<T>] {
        &self.field
    }

    /// `f(z)`.
    pub fn eval(&self, z: Cx<T>) -> CMat<T> {
        CMat::<T>::from_fn(self.rank, self.rank, |i, j| self.entry(i, j).eval(z))
    }

    pub fn is_zero(&self) -> bool {
        self.field.iter().all(|p| p.is_zero())
    }

    pub fn max_entry_degree(&self) -> usize {
        self.field.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Upper bound for the Frobenius norm of `f` on the domain.
    pub fn sup_norm_bound(&self) -> T {
        self.field
            .iter()
            .map(|p| {
                let b = p.sup_bound(self.domain_radius);
                b * b
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Default near-branch threshold `1e-6 (1 + max |f|)`.
    pub fn default_tolerance(&self) -> T {
        T::lit(1e-6) * (T::one() + self.sup_norm_bound())
    }

    /// If `f` is a companion field (ones on the superdiagonal, `q` in the
    /// lower-left corner, zero elsewhere) returns `q`.
    pub fn as_cyclic(&self) -> Option<ComplexPoly<T>> {
        let r = self.rank;
        if r < 2 {
            return None;
        }
        let one = ComplexPoly::one();
        for i in 0..r {
            for j in 0..r {
                let p = self.entry(i, j);
                let ok = if j == i + 1 {
                    *p == one
                } else if i == r - 1 && j == 0 {
                    true
                } else {
                    p.is_zero()
                };
                if !ok {
                    return None;
                }
            }
        }
        Some(self.entry(r - 1, 0).clone())
    }
}

/// Companion Higgs field with characteristic polynomial `y^r - q`.
pub fn cyclic_higgs<T: Real>(r: usize, q: ComplexPoly<T>) -> Result<HiggsBundleDisc<T>> {
    if r < 2 {
        return Err(Error::InvalidInput("cyclic Higgs fields need rank >= 2".into()));
    }
    let mut field = vec![ComplexPoly::zero(); r * r];
    for i in 0..r - 1 {
        field[i * r + i + 1] = ComplexPoly::one();
    }
    field[(r - 1) * r] = q;
    HiggsBundleDisc::new(r, field)
}

fn poly_mat_mul<T: Real>(a: &[ComplexPoly<T>], b: &[ComplexPoly<T>], r: usize) -> Vec<ComplexPoly<T>> {
    let mut out = vec![ComplexPoly::zero(); r * r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = ComplexPoly::zero();
            for k in 0..r {
                acc = &acc + &(&a[i * r + k] * &b[k * r + j]);
            }
            out[i * r + j] = acc;
        }
    }
    out
}

/// Coefficients `a_0, ..., a_{r-1}` with `det(y - f(z)) = y^r + sum_j a_j(z) y^j`.
///
/// Faddeev-LeVerrier recursion on polynomial matrices.
pub fn char_poly<T: Real>(h: &HiggsBundleDisc<T>) -> Vec<ComplexPoly<T>> {
    let r = h.rank;
    let f = &h.field;
    // c[j] = coefficient of y^j; c[r] = 1.
    let mut c = vec![ComplexPoly::zero(); r + 1];
    c[r] = ComplexPoly::one();
    let mut m = vec![ComplexPoly::zero(); r * r];
    for k in 1..=r {
        let mut next = poly_mat_mul(f, &m, r);
        for i in 0..r {
            next[i * r + i] = &next[i * r + i] + &c[r - k + 1];
        }
        m = next;
        let fm = poly_mat_mul(f, &m, r);
        let mut tr = ComplexPoly::zero();
        for i in 0..r {
            tr = &tr + &fm[i * r + i];
        }
        c[r - k] = tr.scale(creal(-T::one() / T::lit(k as f64)));
    }
    c.truncate(r);
    c
}

/// Discriminant of `y^r + sum a_j y^j` at a single point, as
/// `(-1)^{r(r-1)/2} Res(P, P')` from the Sylvester determinant.
fn discriminant_at<T: Real>(a: &[Cx<T>]) -> Cx<T> {
    let r = a.len();
    if r <= 1 {
        return creal(T::one());
    }
    // P = y^r + ..., coefficients high to low.
    let mut p = vec![creal(T::one())];
    p.extend(a.iter().rev().copied());
    let dp: Vec<Cx<T>> = (0..r).map(|i| p[i] * creal(T::lit((r - i) as f64))).collect();
    let n = 2 * r - 1;
    let mut s = CMat::<T>::zeros(n, n);
    for row in 0..(r - 1) {
        for (k, &c) in p.iter().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..r {
        for (k, &c) in dp.iter().enumerate() {
            s[(r - 1 + row, row + k)] = c;
        }
    }
    let res = s.determinant();
    if (r * (r - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// Discriminant of the characteristic polynomial as a polynomial in `z`,
/// recovered by sampling on the unit circle and a discrete Fourier transform.
pub fn discriminant<T: Real>(h: &HiggsBundleDisc<T>) -> ComplexPoly<T> {
    let a = char_poly(h);
    let r = h.rank;
    if r <= 1 {
        return ComplexPoly::one();
    }
    let bound = h.max_entry_degree() * r * (r - 1);
    let n = bound + 1;
    let two_pi = std::f64::consts::TAU;
    let samples: Vec<Cx<T>> = (0..n)
        .map(|k| {
            let ang = two_pi * k as f64 / n as f64;
            let z = Cx::new(T::lit(ang.cos()), T::lit(ang.sin()));
            let av: Vec<Cx<T>> = a.iter().map(|p| p.eval(z)).collect();
            discriminant_at(&av)
        })
        .collect();
    let inv_n = T::lit(1.0 / n as f64);
    let coeffs: Vec<Cx<T>> = (0..n)
        .map(|j| {
            let mut acc = Cx::new(T::zero(), T::zero());
            for (k, &s) in samples.iter().enumerate() {
                let ang = -two_pi * ((j * k) % n) as f64 / n as f64;
                acc += s * Cx::new(T::lit(ang.cos()), T::lit(ang.sin()));
            }
            acc * creal(inv_n)
        })
        .collect();
    let p = ComplexPoly::new(coeffs);
    let tol = T::lit(1e-11).max(T::eps() * T::lit(1e3));
    if p.max_coeff() <= tol {
        return ComplexPoly::zero();
    }
    p.chop(tol)
}

fn lex_cmp<T: Real>(a: &Cx<T>, b: &Cx<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Zeros of the discriminant inside the domain, merged when closer than `tol`.
pub fn branch_locus<T: Real>(h: &HiggsBundleDisc<T>, tol: T) -> Result<BranchLocus<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let disc = discriminant(h);
    if disc.is_zero() {
        return Err(Error::DegenerateEverywhere);
    }
    // Split off z^v exactly; a multiple root at the origin would otherwise
    // scatter by eps^(1/v) in the companion eigenvalues.
    let v = disc.valuation().unwrap_or(0);
    let rest = ComplexPoly::new(disc.coeffs()[v..].to_vec());
    let mut roots: Vec<Cx<T>> = rest
        .roots()
        .into_iter()
        .filter(|z| cabs(*z) < h.domain_radius)
        .collect();
    if v > 0 {
        roots.push(Cx::new(T::zero(), T::zero()));
    }
    roots.sort_by(lex_cmp);
    let mut clusters: Vec<(Cx<T>, usize)> = Vec::new();
    for z in roots {
        if let Some(c) = clusters.iter_mut().find(|(c, k)| cabs(*c / creal(T::lit(*k as f64)) - z) < tol) {
            c.0 += z;
            c.1 += 1;
        } else {
            clusters.push((z, 1));
        }
    }
    let mut points: Vec<Cx<T>> = clusters
        .into_iter()
        .map(|(s, k)| s / creal(T::lit(k as f64)))
        .collect();
    points.sort_by(lex_cmp);
    Ok(BranchLocus { points, tolerance: tol })
}

fn normalize_phase<T: Real>(v: &mut DVector<Cx<T>>) {
    let mut best = 0;
    for i in 1..v.len() {
        if cabs(v[i]) > cabs(v[best]) * (T::one() + T::lit(1e-9)) {
            best = i;
        }
    }
    let p = v[best];
    let m = cabs(p);
    if m > T::zero() {
        let phase = p.conj() / creal(m);
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Eigen-decomposition of `f(z)`. Fails with `DegeneratePoint` when two
/// eigenvalues are closer than `r tol (1 + |f(z)|_F)`.
pub fn eigen_frame<T: Real>(h: &HiggsBundleDisc<T>, z: Cx<T>, tol: T) -> Result<SpectralSample<T>> {
    let f = h.eval(z);
    let r = h.rank;
    let mut ev = linalg::eigenvalues(&f);
    ev.sort_by(lex_cmp);
    let mut min_gap = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    for i in 0..r {
        for j in (i + 1)..r {
            let g = cabs(ev[i] - ev[j]);
            if g < min_gap {
                min_gap = g;
            }
        }
    }
    if r == 1 {
        min_gap = T::lit(f64::INFINITY);
    }
    let threshold = tol * T::lit(r as f64) * (T::one() + linalg::fro(&f));
    if min_gap < threshold {
        return Err(Error::DegeneratePoint {
            z: format!("{}{:+}i", z.re.to_f64(), z.im.to_f64()),
            gap: min_gap.to_f64(),
            tol: threshold.to_f64(),
        });
    }
    let mut vecs = CMat::<T>::zeros(r, r);
    for (i, &b) in ev.iter().enumerate() {
        let shifted = &f - CMat::<T>::identity(r, r) * b;
        let mut v = linalg::null_vector(&shifted);
        normalize_phase(&mut v);
        vecs.set_column(i, &v);
    }
    Ok(SpectralSample { point: z, eigenvalues: ev, eigenvectors: vecs, min_gap })
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Local normalization of a totally ramified spectral cover at `z = 0`.
///
/// Given `a = [a_0, ..., a_{r-1}]` such that the characteristic polynomial at
/// the origin is `(y - alpha)^r`, returns `alpha` and the coordinate
/// `w(z) = sum_{k=1}^{trunc} w_k z^k` solving `w (w')^r = -a~_0(z)`, where
/// `a~_0` is the constant coefficient after removing the trace part
/// (`r >= 2`) or the constant shift `alpha` (`r = 1`). In the coordinate `w`
/// the shifted constant coefficient becomes `-w`.
pub fn local_normal_form<T: Real>(a: &[ComplexPoly<T>], trunc: usize) -> Result<(Cx<T>, ComplexPoly<T>)> {
    let r = a.len();
    if r == 0 || trunc == 0 {
        return Err(Error::InvalidInput("need r >= 1 and trunc >= 1".into()));
    }
    let scale = a.iter().map(|p| p.max_coeff()).fold(T::one(), |x, y| if y > x { y } else { x });
    let tol = T::lit(1e-10) * scale;
    let alpha = -a[r - 1].coeff(0) / creal(T::lit(r as f64));
    for (j, p) in a.iter().enumerate() {
        let expect = creal(T::lit(binomial(r, j))) * pow_c(-alpha, r - j);
        if cabs(p.coeff(0) - expect) > tol {
            return Err(Error::NotTotallyRamified);
        }
    }
    // Shift y -> y + s(z).
    let s = if r == 1 {
        ComplexPoly::constant(alpha)
    } else {
        a[r - 1].scale(creal(-T::one() / T::lit(r as f64)))
    };
    let mut shifted_a0 = ComplexPoly::one();
    for _ in 0..r {
        shifted_a0 = &shifted_a0 * &s;
    }
    let mut spow = ComplexPoly::one();
    for p in a.iter() {
        shifted_a0 = &shifted_a0 + &(p * &spow);
        spow = &spow * &s;
    }
    let g = -&shifted_a0;
    let order = g.coeffs().iter().position(|c| cabs(*c) > tol).unwrap_or(usize::MAX);
    if order != 1 {
        return Err(Error::NotSimpleZero { order: if order == usize::MAX { 0 } else { order } });
    }
    // g = z g1, and w = z v with v (v + z v')^r = g1.
    let g1 = ComplexPoly::new(g.coeffs()[1..].to_vec()).truncate(trunc);
    let v = solve_normalizing_series(&g1, r, trunc);
    Ok((alpha, v.shift_up(1)))
}

fn pow_c<T: Real>(z: Cx<T>, k: usize) -> Cx<T> {
    (0..k).fold(creal(T::one()), |acc, _| acc * z)
}

fn series_mul<T: Real>(a: &ComplexPoly<T>, b: &ComplexPoly<T>, n: usize) -> ComplexPoly<T> {
    (a * b).truncate(n)
}

/// `v + z v'` truncated to `n` terms.
fn euler_shift<T: Real>(v: &ComplexPoly<T>) -> ComplexPoly<T> {
    ComplexPoly::new(
        v.coeffs()
            .iter()
            .enumerate()
            .map(|(m, &c)| c * creal(T::lit((m + 1) as f64)))
            .collect(),
    )
}

/// Newton iteration in the ring of truncated power series for
/// `F(v) = v (v + z v')^r - g1 = 0`, starting at `v = g1(0)^{1/(r+1)}`.
fn solve_normalizing_series<T: Real>(g1: &ComplexPoly<T>, r: usize, n: usize) -> ComplexPoly<T> {
    let g0 = g1.coeff(0);
    let kappa = {
        let m = cabs(g0).powf(T::lit(1.0 / (r + 1) as f64));
        let arg = g0.im.atan2(g0.re) / T::lit((r + 1) as f64);
        Cx::new(m * arg.cos(), m * arg.sin())
    };
    let mut v = ComplexPoly::constant(kappa);
    for _ in 0..64 {
        let e = euler_shift(&v);
        let mut e_pow = ComplexPoly::one();
        for _ in 0..(r - 1) {
            e_pow = series_mul(&e_pow, &e, n);
        }
        let a_full = series_mul(&e_pow, &e, n); // (v + z v')^r
        let b = series_mul(&v, &e_pow, n); // v (v + z v')^{r-1}
        let resid = &series_mul(&v, &a_full, n) - g1;
        if resid.max_coeff() <= T::eps() * T::lit(16.0) * (T::one() + g1.max_coeff()) {
            break;
        }
        // Lower-triangular solve of A d + r B (d + z d') = -resid.
        let rr = T::lit(r as f64);
        let mut d = vec![Cx::new(T::zero(), T::zero()); n];
        for k in 0..n {
            let mut rhs = -resid.coeff(k);
            for (m, dm) in d.iter().enumerate().take(k) {
                let coef = a_full.coeff(k - m) + b.coeff(k - m) * creal(rr * T::lit((m + 1) as f64));
                rhs -= coef * *dm;
            }
            let diag = a_full.coeff(0) + b.coeff(0) * creal(rr * T::lit((k + 1) as f64));
            d[k] = rhs / diag;
        }
        v = (&v + &ComplexPoly::new(d)).truncate(n);
    }
    v
}

/// Pullback along `zeta -> zeta^l`: `g(zeta) = l zeta^{l-1} f(zeta^l)`.
pub fn pullback_higgs<T: Real>(h: &HiggsBundleDisc<T>, c: CoverMap) -> HiggsBundleDisc<T> {
    let l = c.order as usize;
    if l == 1 {
        return h.clone();
    }
    let factor = ComplexPoly::monomial(creal(T::lit(l as f64)), l - 1);
    let field = h.field.iter().map(|p| &factor * &p.compose_power(l)).collect();
    HiggsBundleDisc {
        rank: h.rank,
        field,
        domain_radius: h.domain_radius.powf(T::one() / T::lit(l as f64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    type P = ComplexPoly<f64>;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn mat(entries: &[&str], r: usize) -> HiggsBundleDisc<f64> {
        HiggsBundleDisc::new(r, entries.iter().map(|s| parse_poly(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn char_poly_examples() {
        let a = char_poly(&mat(&["0", "1", "z", "0"], 2));
        assert!(a[1].is_zero());
        assert_eq!(a[0], P::from_real(&[0.0, -1.0]));

        let a = char_poly(&mat(&["1", "0", "0", "2"], 2));
        assert_eq!(a[1], P::from_real(&[-3.0]));
        assert_eq!(a[0], P::from_real(&[2.0]));

        let a = char_poly(&mat(&["0", "1", "z^2+1", "0"], 2));
        assert_eq!(a[0], P::from_real(&[-1.0, 0.0, -1.0]));
        assert!(a[1].is_zero());
    }

    #[test]
    fn char_poly_matches_determinant_at_random_points() {
        let h = mat(&["z", "1", "0.5i", "z^2 - 1", "2", "0", "z", "1", "-z"], 3);
        let a = char_poly(&h);
        for z in [c(0.3, 0.2), c(-0.7, 0.1), c(0.05, -0.9)] {
            for y in [c(0.4, -1.0), c(2.0, 0.5), c(-0.3, 0.3)] {
                let direct = (CMat::<f64>::identity(3, 3) * y - h.eval(z)).determinant();
                let mut via = y * y * y;
                for (j, p) in a.iter().enumerate() {
                    via += p.eval(z) * pow_c(y, j);
                }
                assert!((direct - via).norm() < 1e-12 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn discriminant_of_cyclic_rank_two() {
        let d = discriminant(&mat(&["0", "1", "z", "0"], 2));
        assert_eq!(d.degree(), Some(1));
        assert!((d.coeff(1) - c(4.0, 0.0)).norm() < 1e-12);
        assert!(d.coeff(0).norm() < 1e-12);
    }

    #[test]
    fn branch_locus_examples() {
        let b = branch_locus(&mat(&["0", "1", "z", "0"], 2), 1e-8).unwrap();
        assert_eq!(b.points.len(), 1);
        assert!(b.points[0].norm() < 1e-10);

        let b = branch_locus(&mat(&["1", "0", "0", "2"], 2), 1e-8).unwrap();
        assert!(b.points.is_empty());

        let b = branch_locus(&mat(&["0", "1", "z^2-0.25", "0"], 2), 1e-8).unwrap();
        assert_eq!(b.points.len(), 2);
        assert!((b.points[0] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((b.points[1] - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn branch_locus_rejects_scalar_field() {
        let h = mat(&["z", "0", "0", "z"], 2);
        assert!(matches!(branch_locus(&h, 1e-8), Err(Error::DegenerateEverywhere)));
    }

    #[test]
    fn eigen_frame_examples() {
        let h = mat(&["0", "1", "4", "0"], 2);
        let s = eigen_frame(&h, c(0.3, 0.1), 1e-8).unwrap();
        assert!((s.eigenvalues[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - c(2.0, 0.0)).norm() < 1e-12);
        // v ∝ (1, -2) for -2 and (1, 2) for 2.
        let v0 = s.eigenvectors.column(0);
        assert!((v0[1] / v0[0] - c(-2.0, 0.0)).norm() < 1e-12);
        let v1 = s.eigenvectors.column(1);
        assert!((v1[1] / v1[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((s.min_gap - 4.0).abs() < 1e-12);

        let h = mat(&["0", "1", "z", "0"], 2);
        let s = eigen_frame(&h, c(1.0, 0.0), 1e-8).unwrap();
        assert!((s.eigenvalues[0] - c(-1.0, 0.0)).norm() < 1e-12);
        let v0 = s.eigenvectors.column(0);
        assert!((v0[1] / v0[0] - c(-1.0, 0.0)).norm() < 1e-12);

        let e = eigen_frame(&h, c(1e-12, 0.0), 1e-6).unwrap_err();
        assert!(matches!(e, Error::DegeneratePoint { .. }));
    }

    #[test]
    fn eigen_frame_is_deterministic_and_accurate() {
        let h = mat(&["z", "1", "0.5i", "z^2 - 1", "2", "0", "z", "1", "-z"], 3);
        let z = c(0.31, -0.27);
        let a = eigen_frame(&h, z, 1e-8).unwrap();
        let b = eigen_frame(&h, z, 1e-8).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        let f = h.eval(z);
        let fnorm = f.norm();
        for i in 0..3 {
            let v = a.eigenvectors.column(i).into_owned();
            assert!((v.norm() - 1.0).abs() < 1e-12);
            let res = &f * &v - &v * a.eigenvalues[i];
            assert!(res.norm() <= 1e-10 * fnorm);
        }
    }

    #[test]
    fn normal_form_examples() {
        let (alpha, w) = local_normal_form(&[P::from_real(&[0.0, -1.0])], 6).unwrap();
        assert!(alpha.norm() < 1e-15);
        assert!((w.coeff(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(w.coeffs().iter().skip(2).all(|x| x.norm() < 1e-14));

        let (_, w) = local_normal_form(&[P::from_real(&[0.0, -4.0])], 6).unwrap();
        assert!((w.coeff(1) - c(2.0, 0.0)).norm() < 1e-14);
        assert!(w.coeffs().iter().skip(2).all(|x| x.norm() < 1e-13));
    }

    #[test]
    fn normal_form_rejects_double_zero() {
        let a = [P::from_real(&[0.0, 0.0, -1.0]), P::zero()];
        assert!(matches!(local_normal_form(&a, 4), Err(Error::NotSimpleZero { order: 2 })));
        // Not of the form (y - alpha)^2 at the origin.
        let a = [P::from_real(&[1.0, -1.0]), P::zero()];
        assert!(matches!(local_normal_form(&a, 4), Err(Error::NotTotallyRamified)));
    }

    #[test]
    fn pullback_examples() {
        let h = mat(&["0", "1", "z", "0"], 2);
        let g = pullback_higgs(&h, CoverMap::new(2).unwrap());
        assert_eq!(*g.entry(0, 1), P::from_real(&[0.0, 2.0]));
        assert_eq!(*g.entry(1, 0), P::from_real(&[0.0, 0.0, 0.0, 2.0]));
        assert!(g.entry(0, 0).is_zero() && g.entry(1, 1).is_zero());
        // eigenvalues of g at zeta are +-2 zeta^2.
        let zeta = c(0.4, 0.3);
        let s = eigen_frame(&g, zeta, 1e-10).unwrap();
        let expect = zeta * zeta * 2.0;
        assert!(s.eigenvalues.iter().any(|&b| (b - expect).norm() < 1e-12));
        assert!(s.eigenvalues.iter().any(|&b| (b + expect).norm() < 1e-12));

        assert_eq!(pullback_higgs(&h, CoverMap::new(1).unwrap()), h);

        let d = HiggsBundleDisc::diagonal(vec![P::from_real(&[1.0, 1.0]), P::from_real(&[0.0, 0.0, 2.0])]).unwrap();
        let g = pullback_higgs(&d, CoverMap::new(3).unwrap());
        assert_eq!(*g.entry(0, 0), P::from_real(&[0.0, 0.0, 3.0, 0.0, 0.0, 3.0]));
        assert!(g.entry(0, 1).is_zero());
    }

    #[test]
    fn cyclic_examples() {
        let h = cyclic_higgs(2, P::z()).unwrap();
        assert_eq!(h, mat(&["0", "1", "z", "0"], 2));
        assert_eq!(h.as_cyclic(), Some(P::z()));

        let a = char_poly(&cyclic_higgs(3, P::one()).unwrap());
        assert_eq!(a[0], P::from_real(&[-1.0]));
        assert!(a[1].is_zero() && a[2].is_zero());

        let b = branch_locus(&cyclic_higgs(2, parse_poly("z^2-0.25").unwrap()).unwrap(), 1e-8).unwrap();
        assert_eq!(b.points.len(), 2);
        assert!(matches!(cyclic_higgs(1, P::z()), Err(Error::InvalidInput(_))));
    }
}
