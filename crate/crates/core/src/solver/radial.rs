//! Radial reduction of the rank-2 cyclic problem.
//!
//! For `f = [[0, 1], [q, 0]]` with `|q| = |c| rho^k` the metric
//! `H = diag(e^u, e^{-u})` solves the equation iff
//!
//! ```text
//! u'' + u'/rho = 4 t^2 (e^{2u} - |c|^2 rho^{2k} e^{-2u}),
//! ```
//!
//! solved here on a uniform mesh of `[0, R]` with `u'(0) = 0` and `u(R)` given.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::DiscGrid;
use crate::metric::MetricField;
use crate::poly::ComplexPoly;
use crate::scalar::{cabs, creal, CMat, Real};

#[derive(Debug, Clone)]
pub struct RadialProfile<T: Real> {
    pub radius: T,
    pub step: T,
    /// `u` at `rho_i = i * step`, `i = 0..=n`.
    pub u: Vec<T>,
    /// Largest `|h^2 F_i|` of the discrete equation at exit.
    pub scaled_residual: T,
    pub iterations: usize,
}

impl<T: Real> RadialProfile<T> {
    /// Piecewise-cubic (Catmull-Rom) interpolation of `u`.
    pub fn eval(&self, rho: T) -> T {
        let n = self.u.len() - 1;
        let x = (rho / self.step).to_f64().clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let s = T::lit(x - i as f64);
        let at = |j: i64| -> T {
            // Even reflection at the origin, quadratic extrapolation at the end.
            let j = j.unsigned_abs() as usize;
            if j > n {
                T::lit(3.0) * (self.u[n] - self.u[n - 1]) + self.u[n - 2]
            } else {
                self.u[j]
            }
        };
        let i = i as i64;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let half = T::lit(0.5);
        let s2 = s * s;
        let s3 = s2 * s;
        half * (T::lit(2.0) * p1
            + (p2 - p0) * s
            + (T::lit(2.0) * p0 - T::lit(5.0) * p1 + T::lit(4.0) * p2 - p3) * s2
            + (T::lit(3.0) * (p1 - p2) + p3 - p0) * s3)
    }

    /// `diag(e^u, e^{-u})` at the interior and ghost nodes of `grid`.
    pub fn reconstruct(&self, grid: Arc<DiscGrid<T>>) -> Result<MetricField<T>> {
        let rmax = grid.boundary().iter().map(|b| cabs(grid.point(b.index))).fold(T::zero(), |a, b| if b > a { b } else { a });
        if rmax > self.radius * (T::one() + T::lit(1e-12)) {
            return Err(Error::InvalidInput("grid extends beyond the radial mesh".into()));
        }
        Ok(MetricField::from_fn(grid, 2, |z| {
            let u = self.eval(cabs(z));
            let mut m = CMat::<T>::zeros(2, 2);
            m[(0, 0)] = creal(u.exp());
            m[(1, 1)] = creal((-u).exp());
            m
        }))
    }
}

/// Solves the radial problem for `q = c z^k` on `[0, radius]`.
pub fn radial_cyclic_solve<T: Real>(
    q: &ComplexPoly<T>,
    t: T,
    boundary_value: T,
    radius: T,
    n_radial: usize,
) -> Result<RadialProfile<T>> {
    if q.is_zero() {
        return Err(Error::InvalidInput("q must be nonzero".into()));
    }
    let k = q.valuation().expect("nonzero");
    if q.degree() != Some(k) {
        return Err(Error::NotRadial);
    }
    if n_radial < 8 || !(radius > T::zero()) || !boundary_value.is_finite() || t < T::zero() {
        return Err(Error::InvalidInput("bad radial mesh or data".into()));
    }
    let c2 = cabs(q.coeff(k)).powi(2);
    let n = n_radial;
    let h = radius / T::lit(n as f64);
    let h2 = h * h;
    let four_t2 = T::lit(4.0) * t * t;
    let q2: Vec<T> = (0..n).map(|i| c2 * (T::lit(i as f64) * h).powi(2 * k as i32)).collect();
    let mut u = vec![boundary_value; n + 1];

    let residual = |u: &[T]| -> Vec<T> {
        (0..n)
            .map(|i| {
                let nl = four_t2 * ((T::lit(2.0) * u[i]).exp() - q2[i] * (T::lit(-2.0) * u[i]).exp());
                let lap = if i == 0 {
                    T::lit(4.0) * (u[1] - u[0]) / h2
                } else {
                    let rho = T::lit(i as f64) * h;
                    (u[i + 1] - T::lit(2.0) * u[i] + u[i - 1]) / h2 + (u[i + 1] - u[i - 1]) / (T::lit(2.0) * h * rho)
                };
                lap - nl
            })
            .collect()
    };
    let scaled = |f: &[T]| f.iter().fold(T::zero(), |a, &b| if (b * h2).abs() > a { (b * h2).abs() } else { a });

    let tol = T::lit(1e-10);
    let mut f = residual(&u);
    let mut iterations = 0;
    while scaled(&f) > tol {
        if iterations >= 200 {
            return Err(Error::InvalidInput(format!(
                "radial Newton iteration stalled at scaled residual {:e}",
                scaled(&f).to_f64()
            )));
        }
        iterations += 1;
        // Tridiagonal Jacobian: sub[i] du[i-1] + diag[i] du[i] + sup[i] du[i+1] = -F[i].
        let mut sub = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        let mut sup = vec![T::zero(); n];
        for i in 0..n {
            let dnl = T::lit(2.0) * four_t2 * ((T::lit(2.0) * u[i]).exp() + q2[i] * (T::lit(-2.0) * u[i]).exp());
            if i == 0 {
                diag[0] = T::lit(-4.0) / h2 - dnl;
                sup[0] = T::lit(4.0) / h2;
            } else {
                let rho = T::lit(i as f64) * h;
                let a = T::one() / (T::lit(2.0) * h * rho);
                sub[i] = T::one() / h2 - a;
                diag[i] = T::lit(-2.0) / h2 - dnl;
                sup[i] = T::one() / h2 + a;
            }
        }
        // Thomas algorithm; u[n] is fixed so sup[n-1] drops out.
        let mut cp = vec![T::zero(); n];
        let mut dp = vec![T::zero(); n];
        cp[0] = sup[0] / diag[0];
        dp[0] = -f[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - sub[i] * cp[i - 1];
            cp[i] = if i + 1 < n { sup[i] / m } else { T::zero() };
            dp[i] = (-f[i] - sub[i] * dp[i - 1]) / m;
        }
        let mut du = vec![T::zero(); n];
        du[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            du[i] = dp[i] - cp[i] * du[i + 1];
        }
        let big = du.iter().fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a });
        let scale = if big > T::one() { T::one() / big } else { T::one() };
        for i in 0..n {
            u[i] += scale * du[i];
        }
        f = residual(&u);
    }
    Ok(RadialProfile { radius, step: h, u, scaled_residual: scaled(&f), iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs::cyclic_higgs;
    use crate::poly::parse_poly;
    use crate::solver::hitchin_residual;

    #[test]
    fn zero_coupling_gives_the_constant() {
        let p = radial_cyclic_solve(&ComplexPoly::<f64>::z(), 0.0, 0.0, 1.0, 400).unwrap();
        assert!(p.u.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(radial_cyclic_solve(&ComplexPoly::<f64>::zero(), 1.0, 0.0, 1.0, 100), Err(Error::InvalidInput(_))));
        let q = parse_poly("z + z^2").unwrap();
        assert!(matches!(radial_cyclic_solve(&q, 1.0, 0.0, 1.0, 100), Err(Error::NotRadial)));
    }

    #[test]
    fn approaches_the_limiting_profile() {
        let mut prev = f64::INFINITY;
        for t in [8.0, 16.0, 32.0] {
            let p = radial_cyclic_solve(&ComplexPoly::<f64>::z(), t, 0.0, 1.0, 20_000).unwrap();
            assert!(p.scaled_residual <= 1e-10);
            let mut err: f64 = 0.0;
            for i in 0..=300 {
                let rho = 0.25 + 0.75 * i as f64 / 300.0;
                err = err.max((p.eval(rho) - 0.5 * rho.ln()).abs());
            }
            assert!(err < prev, "t={t} err={err}");
            prev = err;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn interpolation_is_exact_on_quadratics() {
        let p = RadialProfile::<f64> {
            radius: 1.0,
            step: 0.1,
            u: (0..=10).map(|i| 0.01 * (i * i) as f64).collect(),
            scaled_residual: 0.0,
            iterations: 0,
        };
        for rho in [0.0, 0.03, 0.47, 0.91] {
            assert!((p.eval(rho) - rho * rho).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_is_a_near_solution() {
        let g = Arc::new(DiscGrid::<f64>::new(48, 1.0).unwrap());
        let f = cyclic_higgs(2, ComplexPoly::z()).unwrap();
        let rmax = 1.0 + 2.0 * g.dx();
        let p = radial_cyclic_solve(&ComplexPoly::z(), 3.0, 0.5 * rmax.ln(), rmax, 20_000).unwrap();
        let m = p.reconstruct(g.clone()).unwrap();
        let res = hitchin_residual(&m, &f, 3.0);
        let coarse = hitchin_residual(&p.reconstruct(Arc::new(DiscGrid::new(24, 1.0).unwrap())).unwrap(), &f, 3.0);
        assert!(res.sup_norm < 0.5 * coarse.sup_norm, "{} vs {}", res.sup_norm, coarse.sup_norm);
    }
}
