use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::DiscGrid;
use crate::higgs::{eigen_frame, HiggsBundleDisc};
use crate::linalg;
use crate::scalar::{cabs, creal, CMat, Cx, Real};

/// The circle `|z - center| = radius`, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl LoopSpec {
    pub fn at<T: Real>(&self, theta: f64) -> Cx<T> {
        Cx::new(
            T::lit(self.center[0] + self.radius * theta.cos()),
            T::lit(self.center[1] + self.radius * theta.sin()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheetSpread {
    /// `max |s_ii - s_jj|` over the loop for `j = perm(i) != i`.
    pub spread: f64,
    /// Monodromy: the label starting at eigenvalue `i` returns at `perm[i]`.
    pub perm: Vec<usize>,
    pub samples: usize,
}

/// Bilinear interpolation of a node field (e.g. the `s` field of a comparison).
pub fn sample_field<T: Real>(grid: &DiscGrid<T>, field: &[CMat<T>], z: Cx<T>) -> CMat<T> {
    let n = grid.n();
    let dx = grid.dx();
    let x = ((z.re + grid.radius()) / dx).to_f64().clamp(0.0, (n - 1) as f64 - 1e-9);
    let y = ((z.im + grid.radius()) / dx).to_f64().clamp(0.0, (n - 1) as f64 - 1e-9);
    let (j, i) = (x.floor() as usize, y.floor() as usize);
    let (a, b) = (T::lit(x - j as f64), T::lit(y - i as f64));
    let k = i * n + j;
    let one = T::one();
    &field[k] * creal((one - a) * (one - b))
        + &field[k + 1] * creal(a * (one - b))
        + &field[k + n] * creal((one - a) * b)
        + &field[k + n + 1] * creal(a * b)
}

/// Continues the eigenframe labelling of `f` around `lp` and reports the
/// spread of the diagonal entries of `s` between sheets exchanged by the
/// monodromy. Steps are refined until no eigenvalue moves by more than half
/// the local minimal gap.
pub fn sheet_diagonal_spread<T: Real>(
    s: impl Fn(Cx<T>) -> CMat<T>,
    hb: &HiggsBundleDisc<T>,
    lp: &LoopSpec,
) -> Result<SheetSpread> {
    let tol = hb.default_tolerance();
    let r = hb.rank();
    let two_pi = std::f64::consts::TAU;
    let start = eigen_frame(hb, lp.at(0.0), tol)?;
    // labels[l] = index into the current lexicographic ordering.
    let mut labels: Vec<usize> = (0..r).collect();
    let mut current = start.clone();
    let mut diags: Vec<Vec<T>> = Vec::new();
    let diag_at = |sample: &crate::higgs::SpectralSample<T>, labels: &[usize]| -> Vec<T> {
        let e = &sample.eigenvectors;
        let einv = linalg::inverse(e).expect("eigenframe is a basis away from the branch locus");
        let m = &einv * s(sample.point) * e;
        labels.iter().map(|&i| m[(i, i)].re).collect()
    };
    diags.push(diag_at(&current, &labels));
    let mut theta = 0.0;
    let mut step = two_pi / 64.0;
    while theta < two_pi - 1e-12 {
        let h = step.min(two_pi - theta);
        let next = eigen_frame(hb, lp.at(theta + h), tol)?;
        let limit = T::lit(0.5) * if current.min_gap < next.min_gap { current.min_gap } else { next.min_gap };
        let mut map = vec![usize::MAX; r];
        let mut ok = true;
        for i in 0..r {
            let (j, d) = (0..r)
                .map(|j| (j, cabs(next.eigenvalues[j] - current.eigenvalues[i])))
                .fold((0, T::lit(f64::INFINITY)), |a, b| if b.1 < a.1 { b } else { a });
            if d > limit || map.contains(&j) {
                ok = false;
                break;
            }
            map[i] = j;
        }
        if !ok {
            step = h * 0.5;
            if step < 1e-9 {
                return Err(crate::error::Error::DegeneratePoint {
                    z: format!("{:?}", lp.at::<f64>(theta)),
                    gap: current.min_gap.to_f64(),
                    tol: tol.to_f64(),
                });
            }
            continue;
        }
        for l in labels.iter_mut() {
            *l = map[*l];
        }
        theta += h;
        current = next;
        diags.push(diag_at(&current, &labels));
        step = (h * 1.5).min(two_pi / 64.0);
    }
    // The final point is the start again: label l now sits at index labels[l].
    let perm = labels.clone();
    let mut spread: f64 = 0.0;
    for d in &diags {
        for l in 0..r {
            if perm[l] != l {
                spread = spread.max((d[l] - d[perm[l]]).abs().to_f64());
            }
        }
    }
    Ok(SheetSpread { spread, perm, samples: diags.len() })
}
