use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::comparison::{metric_comparison, off_diagonal_decay};
use super::rates::{rate_fit_clamped, RateFit, TSchedule};
use crate::error::{Error, Result};
use crate::grid::{DiscGrid, Region};
use crate::higgs::{branch_locus, HiggsBundleDisc};
use crate::metric::MetricField;
use crate::pairing::{compatibility_defect, decoupled_metric_from_pairing, SymmetricPairingField};
use crate::scalar::{cabs, CMat, Cx};
use crate::solver::{solve_with_retry, SolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Boundary values from the decoupled metric of the pairing.
    #[default]
    Symmetric,
    /// Boundary values perturbed off compatibility.
    Generic,
    /// A family of Higgs fields on a shared grid.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    pub radius: f64,
    pub schedule: TSchedule,
    pub region: Region,
    pub solver: SolveConfig,
    pub mode: Mode,
    /// Leave the first schedule point out of the rate fits.
    pub drop_first: bool,
    /// Size of the boundary perturbation in generic mode.
    pub perturbation: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n: 128,
            radius: 1.0,
            schedule: TSchedule::default(),
            region: Region::default(),
            solver: SolveConfig::default(),
            mode: Mode::Symmetric,
            drop_first: true,
            perturbation: 0.2,
        }
    }
}

impl ExperimentSpec {
    pub fn grid(&self) -> Result<Arc<DiscGrid<f64>>> {
        Ok(Arc::new(DiscGrid::new(self.n, self.radius)?))
    }
}

/// One schedule point. Failed solves carry `NaN` errors and a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub t: f64,
    pub sup_err: f64,
    pub l2_err: f64,
    pub l2_1_err: f64,
    pub l2_2_err: f64,
    pub offdiag: f64,
    pub compat_defect: f64,
    pub iterations: usize,
    pub final_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Sup distance between consecutive solutions over the region. Only a
/// heuristic for convergence in generic mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyCheck {
    pub diffs: Vec<f64>,
    pub decreasing: bool,
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    pub radius: f64,
    pub region: Region,
    pub mode: Mode,
    pub drop_first: bool,
    /// `decoupled` or `supplied`.
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schedule: Vec<f64>,
    pub records: Vec<ConvergenceRecord>,
    /// Keyed by `sup`, `l2`, `l2_1`, `l2_2`.
    pub fits: BTreeMap<String, RateFit>,
    pub config_hash: String,
    pub version: String,
    pub metadata: ReportMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<CauchyCheck>,
    pub failed: Vec<f64>,
}

pub const CSV_HEADER: &str = "t,sup_err,l2_err,l2_1_err,l2_2_err,offdiag,compat_defect";

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad report JSON: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.t, r.sup_err, r.l2_err, r.l2_1_err, r.l2_2_err, r.offdiag, r.compat_defect
            );
        }
        s
    }

    /// Smallest fitted rate over the four norms.
    pub fn min_epsilon(&self) -> f64 {
        self.fits.values().map(|f| f.epsilon).fold(f64::INFINITY, f64::min)
    }

    /// Error series of one norm (`sup`, `l2`, `l2_1`, `l2_2`, `offdiag`).
    pub fn series(&self, norm: &str) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| {
                let v = match norm {
                    "sup" => r.sup_err,
                    "l2" => r.l2_err,
                    "l2_1" => r.l2_1_err,
                    "l2_2" => r.l2_2_err,
                    "offdiag" => r.offdiag,
                    _ => f64::NAN,
                };
                (r.t, v)
            })
            .collect()
    }
}

pub const NORMS: [&str; 4] = ["sup", "l2", "l2_1", "l2_2"];

/// What the experiment measures against.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentInputs<'a> {
    pub higgs: &'a HiggsBundleDisc<f64>,
    /// Needed for the decoupled reference and the compatibility defect.
    pub pairing: Option<&'a SymmetricPairingField<f64>>,
    /// Replaces the decoupled metric as reference and boundary source.
    pub reference: Option<&'a MetricField<f64>>,
}

fn check_region_avoids_branch_locus(hb: &HiggsBundleDisc<f64>, region: &Region, grid: &DiscGrid<f64>) -> Result<()> {
    let locus = match branch_locus(hb, hb.default_tolerance()) {
        Ok(l) => l,
        Err(Error::DegenerateEverywhere) => return Ok(()),
        Err(e) => return Err(e),
    };
    let margin = grid.dx();
    for p in locus.points {
        let m = cabs(p);
        let near = m >= region.inner_radius() - margin && m <= region.outer_radius() + margin;
        if near {
            return Err(Error::PreconditionViolated(format!(
                "branch point {}{:+}i lies in or next to the region",
                p.re, p.im
            )));
        }
    }
    Ok(())
}

/// `A^* H A` with `A = I + delta E_{0, r-1}` at ghost nodes: not compatible
/// with any pairing for which `H` is.
fn perturb_boundary(h: &MetricField<f64>, delta: f64) -> MetricField<f64> {
    let grid = h.grid().clone();
    let r = h.rank();
    let mut out = h.clone();
    for b in grid.boundary() {
        let z = grid.point(b.index);
        let mut a = CMat::<f64>::identity(r, r);
        a[(0, r - 1)] += Cx::new(delta * (1.0 + 0.5 * z.re), 0.5 * delta * z.im);
        let m = h.get(b.index);
        out.set(b.index, &(a.adjoint() * m * &a));
    }
    out
}

/// Solves along the schedule and measures the distance to the reference.
pub fn convergence_experiment(
    inputs: ExperimentInputs<'_>,
    spec: &ExperimentSpec,
    config_hash: &str,
) -> Result<ConvergenceReport> {
    spec.schedule.validate()?;
    spec.solver.validate()?;
    let hb = inputs.higgs;
    let grid = match inputs.reference {
        Some(r) => {
            if r.grid().n() != spec.n || r.grid().radius() != spec.radius {
                return Err(Error::InvalidInput("reference metric lives on a different grid".into()));
            }
            r.grid().clone()
        }
        None => spec.grid()?,
    };
    spec.region.check_inside(&grid)?;
    check_region_avoids_branch_locus(hb, &spec.region, &grid)?;
    let (reference, label) = match (inputs.reference, inputs.pairing) {
        (Some(r), _) => (r.clone(), "supplied"),
        (None, Some(c)) => (decoupled_metric_from_pairing(hb, c, grid.clone())?.metric, "decoupled"),
        (None, None) => {
            return Err(Error::InvalidInput("experiment needs a pairing or a reference metric".into()));
        }
    };
    let data = match spec.mode {
        Mode::Generic => perturb_boundary(&reference, spec.perturbation),
        _ => reference.clone(),
    };

    let solved: Vec<(ConvergenceRecord, Option<MetricField<f64>>)> = spec
        .schedule
        .values()
        .par_iter()
        .map(|&t| {
            let failed = |msg: String| ConvergenceRecord {
                t,
                sup_err: f64::NAN,
                l2_err: f64::NAN,
                l2_1_err: f64::NAN,
                l2_2_err: f64::NAN,
                offdiag: f64::NAN,
                compat_defect: f64::NAN,
                iterations: 0,
                final_residual: f64::NAN,
                error: Some(msg),
            };
            let (h, stats) = match solve_with_retry(hb, t, &data, &spec.solver) {
                Ok(v) => v,
                Err(e) => return (failed(e.to_string()), None),
            };
            let cmp = match metric_comparison(&reference, &h, &spec.region) {
                Ok(c) => c.norms,
                Err(e) => return (failed(e.to_string()), None),
            };
            let offdiag = off_diagonal_decay(&h, hb, &spec.region).unwrap_or(f64::NAN);
            let compat = inputs.pairing.and_then(|c| compatibility_defect(&h, c).ok()).unwrap_or(f64::NAN);
            let rec = ConvergenceRecord {
                t,
                sup_err: cmp.sup,
                l2_err: cmp.l2,
                l2_1_err: cmp.l2_1,
                l2_2_err: cmp.l2_2,
                offdiag,
                compat_defect: compat,
                iterations: stats.iterations,
                final_residual: stats.final_residual,
                error: None,
            };
            (rec, Some(h))
        })
        .collect();

    let cauchy = (spec.mode == Mode::Generic).then(|| {
        let mut diffs = Vec::new();
        for w in solved.windows(2) {
            if let (Some(a), Some(b)) = (&w[0].1, &w[1].1) {
                diffs.push(metric_comparison(a, b, &spec.region).map(|c| c.norms.sup).unwrap_or(f64::NAN));
            }
        }
        let decreasing = diffs.len() >= 2 && diffs.windows(2).all(|w| w[1] < w[0]);
        CauchyCheck { diffs, decreasing, heuristic: true }
    });
    let records: Vec<ConvergenceRecord> = solved.into_iter().map(|(r, _)| r).collect();
    let failed: Vec<f64> = records.iter().filter(|r| r.error.is_some()).map(|r| r.t).collect();

    let mut report = ConvergenceReport {
        schedule: spec.schedule.values().to_vec(),
        records,
        fits: BTreeMap::new(),
        config_hash: config_hash.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        metadata: ReportMetadata {
            n: spec.n,
            radius: spec.radius,
            region: spec.region,
            mode: spec.mode,
            drop_first: spec.drop_first,
            reference: label.to_string(),
        },
        cauchy,
        failed,
    };
    for norm in NORMS {
        let mut pts = report.series(norm);
        if spec.drop_first && !pts.is_empty() && report.records[0].error.is_none() {
            pts.remove(0);
        }
        if let Ok(fit) = rate_fit_clamped(&pts) {
            report.fits.insert(norm.to_string(), fit);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub params: Vec<f64>,
    pub reports: Vec<ConvergenceReport>,
    /// Per member, the smallest fitted rate over the four norms.
    pub epsilons: Vec<f64>,
    pub min_epsilon: f64,
    /// `min_epsilon > 0`.
    pub uniform: bool,
}

/// Runs [`convergence_experiment`] for every member on a shared grid.
pub fn family_sweep(
    members: &[(f64, HiggsBundleDisc<f64>)],
    pairing: &SymmetricPairingField<f64>,
    spec: &ExperimentSpec,
    config_hash: &str,
) -> Result<FamilyReport> {
    if members.is_empty() {
        return Err(Error::InvalidInput("family has no members".into()));
    }
    let grid = spec.grid()?;
    for (_, hb) in members {
        check_region_avoids_branch_locus(hb, &spec.region, &grid)?;
    }
    let mut member_spec = spec.clone();
    if member_spec.mode == Mode::Family {
        member_spec.mode = Mode::Symmetric;
    }
    let reports: Vec<ConvergenceReport> = members
        .iter()
        .map(|(_, hb)| {
            convergence_experiment(ExperimentInputs { higgs: hb, pairing: Some(pairing), reference: None }, &member_spec, config_hash)
        })
        .collect::<Result<_>>()?;
    let epsilons: Vec<f64> = reports.iter().map(|r| r.min_epsilon()).collect();
    let min_epsilon = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FamilyReport {
        params: members.iter().map(|m| m.0).collect(),
        reports,
        epsilons,
        min_epsilon,
        uniform: min_epsilon > 0.0 && min_epsilon.is_finite(),
    })
}

/// Identity metric on the grid of `spec`, with identity boundary values.
pub fn identity_reference(spec: &ExperimentSpec, rank: usize) -> Result<MetricField<f64>> {
    Ok(MetricField::identity(spec.grid()?, rank))
}
