//! Small dense complex linear algebra for the per-node `r x r` blocks.

use nalgebra::{DVector, Schur, SymmetricEigen, SVD};

use crate::scalar::{cabs, creal, CMat, Cx, Real};

pub fn identity<T: Real>(r: usize) -> CMat<T> {
    CMat::<T>::identity(r, r)
}

pub fn adjoint<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.adjoint()
}

pub fn trace<T: Real>(m: &CMat<T>) -> Cx<T> {
    (0..m.nrows()).fold(Cx::new(T::zero(), T::zero()), |acc, i| acc + m[(i, i)])
}

/// Frobenius norm.
pub fn fro<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

/// `(m + m^*) / 2`.
pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * creal(T::lit(0.5))
}

/// Eigenvalues of an arbitrary complex square matrix, via the complex Schur form.
pub fn eigenvalues<T: Real>(m: &CMat<T>) -> Vec<Cx<T>> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let max_iter = 200 * n;
    if let Some(s) = Schur::try_new(m.clone(), T::eps(), max_iter) {
        return diagonal(&s.unpack().1);
    }
    // Shifted QR can stall on permutation-like matrices such as cyclic
    // companions; a fixed unitary similarity breaks the symmetry.
    let mut q = identity::<T>(n);
    for k in 1..=8 {
        q = &q * rotation::<T>(n, k);
        let a = q.adjoint() * m * &q;
        if let Some(s) = Schur::try_new(a, T::eps(), max_iter) {
            return diagonal(&s.unpack().1);
        }
    }
    panic!("complex Schur decomposition did not converge");
}

fn diagonal<T: Real>(t: &CMat<T>) -> Vec<Cx<T>> {
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Givens rotation by an irrational angle in the plane `(k - 1, k) mod n`.
fn rotation<T: Real>(n: usize, k: usize) -> CMat<T> {
    let (i, j) = ((k - 1) % n, k % n);
    let th = T::lit(0.618_033_988_749_895 * k as f64);
    let (c, s) = (th.cos(), th.sin());
    let mut g = identity::<T>(n);
    g[(i, i)] = creal(c);
    g[(j, j)] = creal(c);
    g[(i, j)] = Cx::new(T::zero(), s);
    g[(j, i)] = Cx::new(T::zero(), s);
    g
}

/// Unit vector spanning (approximately) the kernel of `m`: the right singular
/// vector of the smallest singular value.
pub fn null_vector<T: Real>(m: &CMat<T>) -> DVector<Cx<T>> {
    let n = m.ncols();
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut best = 0;
    for i in 1..svd.singular_values.len() {
        if svd.singular_values[i] < svd.singular_values[best] {
            best = i;
        }
    }
    let mut v = DVector::from_fn(n, |j, _| v_t[(best, j)].conj());
    let norm = v.iter().fold(T::zero(), |a, z| a + z.re * z.re + z.im * z.im).sqrt();
    v /= creal(norm);
    v
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    sv.iter().fold(T::zero(), |a, &s| if s > a { s } else { a })
}

/// Eigen-decomposition of a Hermitian matrix (input is symmetrized first).
pub fn herm_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let e = SymmetricEigen::new(hermitian_part(m));
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Spectral norm of a Hermitian matrix: max |eigenvalue|.
pub fn herm_norm<T: Real>(m: &CMat<T>) -> T {
    let (ev, _) = herm_eigen(m);
    ev.into_iter().fold(T::zero(), |a, x| {
        let x = x.abs();
        if x > a {
            x
        } else {
            a
        }
    })
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn<T: Real>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let (ev, u) = herm_eigen(m);
    let d = CMat::<T>::from_diagonal(&DVector::from_iterator(
        ev.len(),
        ev.iter().map(|&x| creal(f(x))),
    ));
    &u * d * u.adjoint()
}

pub fn herm_exp<T: Real>(m: &CMat<T>) -> CMat<T> {
    herm_fn(m, |x| x.exp())
}

/// Logarithm of a Hermitian positive-definite matrix.
pub fn herm_log<T: Real>(m: &CMat<T>) -> CMat<T> {
    herm_fn(m, |x| x.ln())
}

pub fn herm_sqrt<T: Real>(m: &CMat<T>) -> CMat<T> {
    herm_fn(m, |x| x.sqrt())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn herm_min_eig<T: Real>(m: &CMat<T>) -> T {
    let (ev, _) = herm_eigen(m);
    ev.into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap_or_else(T::zero)
}

/// Lower Cholesky factor `L` with `m = L L^*`, or `None` if `m` is not
/// (numerically) positive definite.
pub fn cholesky<T: Real>(m: &CMat<T>) -> Option<CMat<T>> {
    nalgebra::Cholesky::new(hermitian_part(m)).map(|c| c.unpack())
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse<T: Real>(l: &CMat<T>) -> CMat<T> {
    let n = l.nrows();
    let mut inv = identity::<T>(n);
    let ok = l.solve_lower_triangular_mut(&mut inv);
    debug_assert!(ok);
    inv
}

pub fn inverse<T: Real>(m: &CMat<T>) -> Option<CMat<T>> {
    m.clone().try_inverse()
}

pub fn determinant<T: Real>(m: &CMat<T>) -> Cx<T> {
    m.determinant()
}

/// Maximum modulus over the entries.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |a, &z| {
        let x = cabs(z);
        if x > a {
            x
        } else {
            a
        }
    })
}

/// Orthonormal basis of the traceless Hermitian `r x r` matrices with respect
/// to `<A, B> = Re tr(A B)`. Off-diagonal symmetric and antisymmetric
/// elements first, then the generalized Gell-Mann diagonal ones.
pub fn traceless_hermitian_basis<T: Real>(r: usize) -> Vec<CMat<T>> {
    let mut basis = Vec::with_capacity(r * r - 1);
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..r {
        for j in (i + 1)..r {
            let mut a = CMat::<T>::zeros(r, r);
            a[(i, j)] = creal(s);
            a[(j, i)] = creal(s);
            basis.push(a);
            let mut b = CMat::<T>::zeros(r, r);
            b[(i, j)] = Cx::new(T::zero(), -s);
            b[(j, i)] = Cx::new(T::zero(), s);
            basis.push(b);
        }
    }
    for k in 1..r {
        let norm = T::lit(1.0 / ((k * (k + 1)) as f64).sqrt());
        let mut d = CMat::<T>::zeros(r, r);
        for i in 0..k {
            d[(i, i)] = creal(norm);
        }
        d[(k, k)] = creal(-norm * T::lit(k as f64));
        basis.push(d);
    }
    basis
}

/// `Re tr(a b)`.
pub fn re_tr_prod<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            let p = a[(i, k)] * b[(k, i)];
            acc += p.re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_cyclic_companions() {
        for r in 2..=6 {
            for x in [1.0, 0.5, -0.3, 1e-3] {
                let mut m = CMat::<f64>::zeros(r, r);
                for i in 0..r - 1 {
                    m[(i, i + 1)] = creal(1.0);
                }
                m[(r - 1, 0)] = creal(x);
                let ev = eigenvalues(&m);
                assert_eq!(ev.len(), r);
                for b in ev {
                    assert!((b.powu(r as u32) - creal(x)).norm() < 1e-10, "r={r} x={x} b={b}");
                }
            }
        }
    }

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        for r in 1..=4 {
            let b = traceless_hermitian_basis::<f64>(r);
            assert_eq!(b.len(), r * r - 1);
            for (i, x) in b.iter().enumerate() {
                assert!(trace(x).norm() < 1e-15);
                assert!((x - x.adjoint()).norm() < 1e-15);
                for (j, y) in b.iter().enumerate() {
                    let ip = re_tr_prod(x, y);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-14, "r={r} i={i} j={j} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let m = CMat::<f64>::from_row_slice(
            2,
            2,
            &[Cx::new(2.0, 0.0), Cx::new(0.3, 0.4), Cx::new(0.3, -0.4), Cx::new(1.0, 0.0)],
        );
        let back = herm_exp(&herm_log(&m));
        assert!((back - m).norm() < 1e-13);
    }

    #[test]
    fn eigenvalues_of_companion() {
        // y^2 - 4
        let m = CMat::<f64>::from_row_slice(
            2,
            2,
            &[Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(4.0, 0.0), Cx::new(0.0, 0.0)],
        );
        let mut ev: Vec<f64> = eigenvalues(&m).iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }
}
