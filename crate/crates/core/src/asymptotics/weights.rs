use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::poly::ComplexPoly;
use crate::scalar::{CMat, Cx, Real};

/// Growth weight of a holomorphic section near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightEstimate {
    /// Slope of `log |s|_h` against `log |z|`.
    pub slope: f64,
    /// `-slope` reduced into `(-1, 0]`.
    pub weight: f64,
    /// The reduction shifted by a nonzero integer.
    pub shifted: bool,
    pub samples: usize,
}

/// Radii over which the slope is fitted.
pub const WEIGHT_RADII: (f64, f64) = (0.05, 0.2);

/// Estimates the weight of `section` for the metric `h` by a least-squares
/// fit over the interior nodes with `|z|` in [`WEIGHT_RADII`].
pub fn weights_from_metric<T: Real>(h: &MetricField<T>, section: &[ComplexPoly<T>]) -> Result<WeightEstimate> {
    if section.len() != h.rank() {
        return Err(Error::InvalidInput("section has the wrong rank".into()));
    }
    let grid = h.grid();
    let samples: Vec<(f64, CMat<T>, Cx<T>)> = grid
        .interior()
        .iter()
        .filter_map(|&k| {
            let z = grid.point(k);
            let m = crate::scalar::cabs(z).to_f64();
            (m >= WEIGHT_RADII.0 && m <= WEIGHT_RADII.1).then(|| (m, h.get(k), z))
        })
        .collect();
    weights_from_samples(samples.into_iter(), section)
}

/// Same as [`weights_from_metric`] for a metric given in closed form,
/// sampled at `count` radii along the positive real axis and its rotations.
pub fn weights_from_fn<T: Real>(
    h: impl Fn(Cx<T>) -> CMat<T>,
    section: &[ComplexPoly<T>],
    count: usize,
) -> Result<WeightEstimate> {
    let (a, b) = WEIGHT_RADII;
    let samples = (0..count).map(|i| {
        let m = if count > 1 { a * (b / a).powf(i as f64 / (count - 1) as f64) } else { a };
        let th = 2.399963 * i as f64;
        let z = Cx::new(T::lit(m * th.cos()), T::lit(m * th.sin()));
        (m, h(z), z)
    });
    weights_from_samples(samples, section)
}

fn weights_from_samples<T: Real>(
    samples: impl Iterator<Item = (f64, CMat<T>, Cx<T>)>,
    section: &[ComplexPoly<T>],
) -> Result<WeightEstimate> {
    let mut pts = Vec::new();
    for (m, hm, z) in samples {
        let v = nalgebra::DVector::from_iterator(section.len(), section.iter().map(|p| p.eval(z)));
        let n2 = (v.adjoint() * hm * &v)[(0, 0)].re.to_f64();
        if n2 > 0.0 {
            pts.push((m.ln(), 0.5 * n2.ln()));
        }
    }
    let mut radii: Vec<f64> = pts.iter().map(|p| p.0).collect();
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if radii.len() < 3 {
        return Err(Error::InsufficientRadii { needed: 3, got: radii.len() });
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let raw = -slope;
    // Reduce into (-1, 0]; snap rounding noise at the endpoints.
    let shift = (raw - 1e-9).ceil();
    let weight = raw - shift;
    Ok(WeightEstimate { slope, weight, shifted: shift != 0.0, samples: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiscGrid;
    use crate::scalar::creal;
    use std::sync::Arc;

    fn unit(r: usize, i: usize) -> Vec<ComplexPoly<f64>> {
        (0..r).map(|j| if j == i { ComplexPoly::one() } else { ComplexPoly::zero() }).collect()
    }

    #[test]
    fn analytic_rank_two() {
        let h = |z: Cx<f64>| {
            let a = z.norm().sqrt();
            CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![creal(a), creal(1.0 / a)]))
        };
        let w1 = weights_from_fn(h, &unit(2, 0), 40).unwrap();
        assert!((w1.slope - 0.25).abs() < 1e-12 && (w1.weight + 0.25).abs() < 1e-12 && !w1.shifted);
        let w2 = weights_from_fn(h, &unit(2, 1), 40).unwrap();
        assert!((w2.weight + 0.75).abs() < 1e-12 && w2.shifted);
    }

    #[test]
    fn identity_metric_has_weight_zero() {
        let g = Arc::new(DiscGrid::<f64>::new(64, 1.0).unwrap());
        let m = MetricField::identity(g, 2);
        let w = weights_from_metric(&m, &unit(2, 1)).unwrap();
        assert!(w.weight.abs() < 1e-12 && !w.shifted);
    }

    #[test]
    fn coarse_grids_lack_radii() {
        let g = Arc::new(DiscGrid::<f64>::new(6, 1.0).unwrap());
        let m = MetricField::identity(g, 1);
        assert!(matches!(weights_from_metric(&m, &unit(1, 0)), Err(Error::InsufficientRadii { .. })));
    }
}
