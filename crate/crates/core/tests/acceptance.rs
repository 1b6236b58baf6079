//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hax_core::asymptotics::{
    build_approximate_solution, convergence_experiment, family_sweep, rate_fit, solve_inner, weights_from_metric,
    ConvergenceReport, CutoffProfile, ExperimentInputs, ExperimentSpec, NORMS,
};
use hax_core::filtered::{
    descent_filtration, pairing_pole_check, parity_check, pullback_filtration, pushforward_degree, q, reduce_weight,
    star_extension, FilteredLocal, PoleCheck, RamifiedCoverSpec, StarExtensionInput, Q,
};
use hax_core::pairing::{
    decoupled_metric_from_pairing, decoupling_defect, gram_bounds, sample_compatible_metric, trace_pushforward_pairing,
};
use hax_core::solver::{max_principle_check, radial_cyclic_solve};
use hax_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let el = start.elapsed();
    o.detail = format!("{} [{:.2}s]", o.detail, el.as_secs_f64());
    if let Some(l) = limit {
        if el > l {
            o.pass = false;
            o.detail = format!("{} exceeds {:.0}s", o.detail, l.as_secs_f64());
        }
    }
    o
}

/// Operator norm of `L^{-1} (a - b) L^{-*}`, `b = L L^*`.
fn rel_diff(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
    let l = linalg::cholesky(b).expect("positive");
    let li = linalg::lower_inverse(&l);
    linalg::spectral_norm(&(&li * (a - b) * li.adjoint()))
}

fn sup_rel(a: &Metric, b: &Metric) -> f64 {
    a.grid().interior().iter().map(|&k| rel_diff(&a.get(k), &b.get(k))).fold(0.0, f64::max)
}

fn benchmark() -> (Higgs, Pairing) {
    (cyclic_higgs(2, Poly::z()).unwrap(), Pairing::antidiagonal(2).unwrap())
}

fn gram_suite() -> Outcome {
    let mut ok = 0;
    let mut worst = String::new();
    for i in 0..1000u64 {
        let r = 2 + (i % 5) as usize;
        let cap = 1.0 / (2.0 * r as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a17 + i);
        let scale = cap / (r as f64 - 1.0).max(1.0) * rng.random_range(0.05..1.0);
        let g = sample_compatible_metric::<f64>(r, scale, i).unwrap();
        let eps = g.epsilon;
        if eps > cap {
            worst = format!("sample {i}: realized eps {eps} above 1/(2r)");
            continue;
        }
        // Bounds recomputed directly, then through the library check.
        let h = &g.h;
        let a: f64 = (0..r).map(|j| h[(j, j)].re).sum();
        let four_r2 = 4.0 * (r * r) as f64;
        let mut direct = a <= 2.0 * r as f64;
        for i2 in 0..r {
            direct &= (h[(i2, i2)].re - 1.0).abs() <= four_r2 * eps;
            for j in 0..r {
                if i2 != j {
                    direct &= h[(i2, j)].norm() <= eps * (1.0 + four_r2 * eps);
                }
            }
        }
        let lib = gram_bounds(&g, eps).map(|rep| rep.pass).unwrap_or(false);
        if direct && lib {
            ok += 1;
        } else if worst.is_empty() {
            worst = format!("sample {i} (r={r}) fails");
        }
    }
    outcome(ok == 1000, format!("{ok}/1000 samples within bounds {worst}"))
}

fn decoupled_limit() -> Outcome {
    let (f, c) = benchmark();
    let g = Arc::new(Grid::new(64, 1.0).unwrap());
    let hc = decoupled_metric_from_pairing(&f, &c, g.clone()).unwrap().metric;
    let mut err: f64 = 0.0;
    for &k in g.interior() {
        let a = g.point(k).norm().sqrt();
        let h = hc.get(k);
        let want = [a, 1.0 / a];
        for i in 0..2 {
            for j in 0..2 {
                let w = if i == j { want[i] } else { 0.0 };
                err = err.max((h[(i, j)] - Cx::new(w, 0.0)).norm() / (1.0 + w));
            }
        }
    }
    let comm = decoupling_defect(&hc, &f);
    outcome(err <= 1e-10 && comm <= 1e-10, format!("max deviation {err:.2e}, commutator {comm:.2e}"))
}

fn solver_vs_radial() -> Outcome {
    let (f, c) = benchmark();
    let g = Arc::new(Grid::new(256, 1.0).unwrap());
    let hc = decoupled_metric_from_pairing(&f, &c, g.clone()).unwrap().metric;
    let (h, _) = solve_dirichlet(&f, 4.0, &hc, &SolveConfig::default()).unwrap();
    // The radial problem is posed out to the outermost ghost node.
    let rmax = g.boundary().iter().map(|b| g.point(b.index).norm()).fold(0.0, f64::max);
    let p = radial_cyclic_solve(&Poly::z(), 4.0, 0.5 * rmax.ln(), rmax, 40_000).unwrap();
    let m = p.reconstruct(g.clone()).unwrap();
    let d = sup_rel(&h, &m);
    outcome(d <= 1e-3, format!("sup relative difference {d:.3e}"))
}

fn fits_ok(rep: &ConvergenceReport) -> Outcome {
    let mut pass = rep.failed.is_empty() && rep.records.len() == 7;
    let mut parts = Vec::new();
    for norm in NORMS {
        match rep.fits.get(norm) {
            Some(fit) => {
                pass &= fit.epsilon > 0.0 && fit.r_squared >= 0.98 && !fit.clamped;
                parts.push(format!("{norm}: eps {:.3} R2 {:.4}", fit.epsilon, fit.r_squared));
            }
            None => {
                pass = false;
                parts.push(format!("{norm}: no fit"));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn offdiag_ok(rep: &ConvergenceReport) -> Outcome {
    let pts: Vec<(f64, f64)> = rep.records.iter().map(|r| (r.t, r.offdiag)).collect();
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    match rate_fit(&pts) {
        Ok(fit) => outcome(
            decreasing && fit.r_squared >= 0.95 && fit.epsilon > 0.0,
            format!("decreasing {decreasing}, R2 {:.4}, last ratio {:.2e}", fit.r_squared, pts[pts.len() - 1].1),
        ),
        Err(e) => outcome(false, format!("fit failed: {e}")),
    }
}

fn compat_ok(rep: &ConvergenceReport, tol: f64) -> Outcome {
    let worst = rep.records.iter().map(|r| r.compat_defect).fold(0.0, f64::max);
    let all = rep.records.iter().all(|r| r.compat_defect <= 10.0 * tol);
    outcome(all && rep.failed.is_empty(), format!("max defect {worst:.2e} vs {:.0e}", 10.0 * tol))
}

/// Boundary data `A^* H A` with a smooth non-unitary `A`.
fn perturbed(h: &Metric) -> Metric {
    let g = h.grid().clone();
    let mut out = h.clone();
    for b in g.boundary() {
        let z = g.point(b.index);
        let mut a = CMat::<f64>::identity(2, 2);
        a[(0, 1)] += Cx::new(0.3 * (1.0 + z.re), 0.2 * z.im);
        a[(1, 1)] *= Cx::new(1.0 + 0.1 * z.im, 0.0);
        out.set(b.index, &(a.adjoint() * h.get(b.index) * &a));
    }
    out
}

fn uniqueness_and_max_principle() -> Outcome {
    let (f, c) = benchmark();
    let cfg = SolveConfig::default();
    let g = Arc::new(Grid::new(128, 1.0).unwrap());
    let hc = decoupled_metric_from_pairing(&f, &c, g.clone()).unwrap().metric;
    let (a, _) = solve_dirichlet(&f, 8.0, &hc, &cfg).unwrap();
    let (b, _) = solve_dirichlet(&f, 8.0, &hc.with_identity_interior(), &cfg).unwrap();
    let unique = sup_rel(&a, &b);

    let mut excess = Vec::new();
    for n in [64usize, 128, 256] {
        let g = Arc::new(Grid::new(n, 1.0).unwrap());
        let hc = decoupled_metric_from_pairing(&f, &c, g.clone()).unwrap().metric;
        let (h0, _) = solve_dirichlet(&f, 4.0, &hc, &cfg).unwrap();
        let (h1, _) = solve_dirichlet(&f, 4.0, &perturbed(&hc), &cfg).unwrap();
        excess.push((n, max_principle_check(&h0, &h1).excess));
    }
    // O(n^-2): constant fitted at the coarsest grid, with 25% slack.
    let c64 = excess[0].1 * 64.0 * 64.0;
    let bounded = excess.iter().all(|&(n, e)| e <= 1.25 * c64 / (n * n) as f64 || e <= 1e-12);
    let list: Vec<String> = excess.iter().map(|(n, e)| format!("n={n}: {e:.2e}")).collect();
    outcome(
        unique <= 5.0 * cfg.tol && bounded,
        format!("seed difference {unique:.2e} (limit {:.0e}); max-principle excess {}", 5.0 * cfg.tol, list.join(", ")),
    )
}

fn random_filtration(rng: &mut ChaCha8Rng) -> FilteredLocal {
    let count = rng.random_range(1..=4);
    let jumps: Vec<(Q, u32)> = (0..count)
        .map(|_| {
            let d = rng.random_range(1..=12i64);
            (q(-rng.random_range(0..=5 * d), d), rng.random_range(1..=3u32))
        })
        .collect();
    FilteredLocal::new(&jumps, Q::from_integer(rng.random_range(-3..=3))).unwrap()
}

/// Weights of the Galois-invariant sections on the `r`-fold cover spanned
/// by `zeta^p v`, `v` of weight `b / r` upstairs.
fn invariant_section_weights(r: i64, b: Q) -> Vec<Q> {
    let rq = Q::from_integer(r);
    let mut w: Vec<Q> = (0..r).map(|p| reduce_weight((b / rq - Q::from_integer(p)) / rq)).collect();
    w.sort();
    w
}

/// Degree of the pushforward through the lattice degree and the weights
/// each puncture of index `m` splits a weight `a` into, `(a - j)/m`.
fn pushforward_oracle(f: &FilteredLocal, m: u32, interior: &[u32]) -> Q {
    let rank = f.rank() as i64;
    let lattice = f.base_degree()
        - interior.iter().chain(std::iter::once(&m)).map(|&e| Q::new(rank * (e as i64 - 1), 2)).sum::<Q>();
    let mut parabolic = Q::from_integer(0);
    for (a, mult) in f.weights() {
        for j in 0..m as i64 {
            parabolic += (a - Q::from_integer(j)) / Q::from_integer(m as i64) * Q::from_integer(mult as i64);
        }
    }
    lattice - parabolic
}

/// Determinant of the trace Gram matrix `tr(zeta^{i+j-k})` as a map
/// `power -> coeff`, by cofactor expansion.
fn gram_det(k: i64, r: i64) -> BTreeMap<i64, i64> {
    fn det(m: &[Vec<Option<(i64, i64)>>], rows: &[usize], cols: &[usize]) -> BTreeMap<i64, i64> {
        if rows.is_empty() {
            return BTreeMap::from([(0, 1)]);
        }
        let i = rows[0];
        let mut out = BTreeMap::new();
        for (pos, &j) in cols.iter().enumerate() {
            let Some((c, p)) = m[i][j] else { continue };
            let rest_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != j).collect();
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            for (pp, cc) in det(m, &rows[1..], &rest_cols) {
                *out.entry(p + pp).or_insert(0) += sign * c * cc;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }
    let ru = r as usize;
    let m: Vec<Vec<Option<(i64, i64)>>> = (0..r)
        .map(|i| (0..r).map(|j| ((i + j - k).rem_euclid(r) == 0).then(|| (r, (i + j - k).div_euclid(r)))).collect())
        .collect();
    let idx: Vec<usize> = (0..ru).collect();
    det(&m, &idx, &idx)
}

fn filtered_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_615);
    let mut round_trip = 0;
    for _ in 0..200 {
        let f = random_filtration(&mut rng);
        let l = rng.random_range(1..=5u32);
        let back = pullback_filtration(&f, l).and_then(|up| descent_filtration(&up, l));
        if back.ok().as_ref() == Some(&f) {
            round_trip += 1;
        }
    }

    let mut parity = 0;
    let mut parity_total = 0;
    for r in 1..=6u32 {
        let ri = r as i64;
        for dn in -6..=6i64 {
            for dd in 1..=4i64 {
                let d = q(dn, dd);
                for m in -2 * ri..=2 * ri {
                    let allowed = if ri % 2 == 1 { m % ri == 0 } else { m.rem_euclid(ri) == ri / 2 };
                    parity_total += 1;
                    let res = star_extension(StarExtensionInput { r, d, m });
                    let good = match (allowed, res) {
                        (true, Ok(s)) => {
                            let ws: Vec<Q> = s.bundle.weights().iter().map(|w| w.0).collect();
                            let b = Q::from_integer(-m) + Q::from_integer(ri) * d;
                            parity_check(r, d, &ws)
                                && s.bundle.weights().iter().all(|w| w.1 == 1)
                                && ws == invariant_section_weights(ri, b)
                        }
                        (false, Err(Error::ParityViolation { .. })) => true,
                        _ => false,
                    };
                    parity += good as usize;
                }
            }
        }
    }

    let mut push = 0;
    let mut push_total = 0;
    for r in 1..=4u32 {
        for m in 1..=4u32 {
            for interior in [vec![], vec![2], vec![m], vec![2, 3], vec![4, 4, 2]] {
                let f = FilteredLocal::new(
                    &(0..r).map(|i| (q(-(i as i64), (r + 1) as i64), 1)).collect::<Vec<_>>(),
                    Q::from_integer(m as i64 - 1),
                )
                .unwrap();
                let spec = RamifiedCoverSpec {
                    cover_order: m,
                    interior_ramification: interior.clone(),
                    puncture_ramification: vec![m],
                };
                push_total += 1;
                if pushforward_degree(&f, &spec, f.degree()).ok() == Some(pushforward_oracle(&f, m, &interior)) {
                    push += 1;
                }
            }
        }
    }

    let mut poles = 0;
    let mut poles_total = 0;
    for r in 1..=6u32 {
        for k in -3..=(r as i64 + 2) {
            poles_total += 1;
            let gram = trace_pushforward_pairing(k, r).unwrap();
            let polar = gram.iter().flatten().any(|e| e.coeff != 0 && e.power < 0);
            let det = gram_det(k, r as i64);
            let expect = if polar {
                PoleCheck::NotHolomorphic
            } else if det.get(&0).is_some_and(|c| *c != 0) {
                PoleCheck::Nondegenerate
            } else {
                PoleCheck::Degenerate
            };
            if pairing_pole_check(k, r).ok() == Some(expect) {
                poles += 1;
            }
        }
    }
    outcome(
        round_trip == 200 && parity == parity_total && push == push_total && poles == poles_total,
        format!(
            "round trip {round_trip}/200, parity {parity}/{parity_total}, pushforward {push}/{push_total}, pole check {poles}/{poles_total}"
        ),
    )
}

fn weight_estimates() -> Outcome {
    let g = Arc::new(Grid::new(256, 1.0).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, m) in [(2usize, 1i64), (3, 0)] {
        let f = cyclic_higgs(r, Poly::z()).unwrap();
        let c = Pairing::antidiagonal(r).unwrap();
        let hc = decoupled_metric_from_pairing(&f, &c, g.clone()).unwrap().metric;
        let exact = star_extension(StarExtensionInput { r: r as u32, d: Q::from_integer(0), m }).unwrap();
        let mut want: Vec<f64> = exact.bundle.weights().iter().map(|w| *w.0.numer() as f64 / *w.0.denom() as f64).collect();
        let mut got: Vec<f64> = (0..r)
            .map(|i| {
                let s: Vec<Poly> = (0..r).map(|j| if i == j { Poly::one() } else { Poly::zero() }).collect();
                weights_from_metric(&hc, &s).map(|w| w.weight).unwrap_or(f64::NAN)
            })
            .collect();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        let dev = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pass &= dev <= 0.05;
        parts.push(format!("r={r}: {got:.3?} vs {want:.3?}"));
    }
    outcome(pass, parts.join("; "))
}

fn approximate_solution(spec: &ExperimentSpec) -> Outcome {
    let (f, c) = benchmark();
    let g = spec.grid().unwrap();
    let hc = decoupled_metric_from_pairing(&f, &c, g).unwrap().metric;
    let chi = CutoffProfile::default();
    let mut supported = true;
    let mut excess = Vec::new();
    for &t in spec.schedule.values() {
        let (inner, _) = solve_inner(&f, t, &hc, 0.5, &spec.solver).unwrap();
        let (_, rep) = build_approximate_solution(&hc, &inner, &chi, &f, t).unwrap();
        supported &= rep.supported;
        excess.push(rep.l1_excess);
    }
    let decreasing = excess.windows(2).all(|w| w[1] < w[0]);
    let list: Vec<String> = excess.iter().map(|e| format!("{e:.2e}")).collect();
    outcome(supported && decreasing, format!("supported {supported}, L1 residual [{}]", list.join(", ")))
}

fn family() -> Outcome {
    let c = Pairing::antidiagonal(2).unwrap();
    let spec = ExperimentSpec { region: Region::annulus(0.3, 0.5), ..Default::default() };
    let members: Vec<(f64, Higgs)> = [0.0, 0.02, 0.04]
        .iter()
        .map(|&x| (x, cyclic_higgs(2, Poly::from_real(&[-x, 1.0])).unwrap()))
        .collect();
    match family_sweep(&members, &c, &spec, "acceptance") {
        Ok(rep) => outcome(
            rep.uniform,
            format!("epsilons {:.3?}, min {:.3}", rep.epsilons, rep.min_epsilon),
        ),
        Err(e) => outcome(false, format!("sweep failed: {e}")),
    }
}

fn main() -> ExitCode {
    let spec = ExperimentSpec::default();
    let tol = spec.solver.tol;
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |id: usize, name: &'static str, o: Outcome| {
        println!("{} {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    run(1, "gram lemma suite", timed(Some(Duration::from_secs(5)), gram_suite));
    run(2, "decoupled limit", timed(Some(Duration::from_secs(2)), decoupled_limit));
    run(3, "solver vs radial oracle", timed(Some(Duration::from_secs(180)), solver_vs_radial));

    let (f, c) = benchmark();
    let start = Instant::now();
    let sweep = convergence_experiment(ExperimentInputs { higgs: &f, pairing: Some(&c), reference: None }, &spec, "acceptance");
    let sweep_time = start.elapsed();
    match &sweep {
        Ok(rep) => {
            let mut o = fits_ok(rep);
            o.detail = format!("{} [{:.2}s]", o.detail, sweep_time.as_secs_f64());
            if sweep_time > Duration::from_secs(900) {
                o.pass = false;
            }
            run(4, "exponential convergence", o);
            run(5, "off-diagonal decay", offdiag_ok(rep));
            run(6, "compatibility preservation", compat_ok(rep, tol));
        }
        Err(e) => {
            for (id, name) in [(4, "exponential convergence"), (5, "off-diagonal decay"), (6, "compatibility preservation")] {
                run(id, name, outcome(false, format!("benchmark sweep failed: {e}")));
            }
        }
    }

    run(7, "uniqueness and maximum principle", timed(None, uniqueness_and_max_principle));
    run(8, "filtered algebra", timed(Some(Duration::from_secs(10)), filtered_algebra));
    run(9, "weight estimation", timed(None, weight_estimates));
    run(10, "approximate solution residual", timed(None, || approximate_solution(&spec)));
    run(11, "family uniformity", timed(Some(Duration::from_secs(2700)), family));

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
