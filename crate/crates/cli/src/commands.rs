use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hax_core::asymptotics::{
    convergence_experiment, family_sweep, identity_reference, ConvergenceReport, ExperimentInputs, FamilyReport, Mode,
    CSV_HEADER, NORMS,
};
use hax_core::filtered::{
    canonical_pairing_filtration, format_fraction, pairing_pole_check, parse_fraction, star_extension,
    StarExtensionInput,
};
use hax_core::higgs::{branch_locus, char_poly, discriminant, eigen_frame};
use hax_core::pairing::{compatibility_defect, decoupled_metric_from_pairing};
use hax_core::{parse_poly, solve_with_retry, MetricField};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigErrors, ExperimentConfig};
use crate::svg::{self, Series};
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Branch locus and eigen-data of the Higgs field.
    Spectral,
    /// Exact filtered-bundle queries.
    Filtered,
    /// One Dirichlet solve at `solve.t`; writes a checkpoint.
    Solve,
    /// Convergence experiment or family sweep; writes JSON and CSV.
    Sweep,
    /// SVG plot of a sweep's JSON report.
    Report,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Core(#[from] hax_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: malformed report: {message}")]
    Report { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Family sweep output: the member reports plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOutput {
    pub config_hash: String,
    pub version: String,
    pub family: FamilyReport,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    Path::new(&cfg.outputs.dir).join(name)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// Runs `cmd`, printing a summary to `out`.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let hash = cfg.config_hash();
    let mut text = String::new();
    let _ = writeln!(text, "hax {VERSION} config {hash}");
    match cmd {
        Command::Spectral => spectral(cfg, &mut text)?,
        Command::Filtered => filtered(cfg, &mut text)?,
        Command::Solve => solve(cfg, &hash, &mut text)?,
        Command::Sweep => sweep(cfg, &hash, &mut text)?,
        Command::Report => report(cfg, &mut text)?,
    }
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })
}

fn cx(z: hax_core::Cx<f64>) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn spectral(cfg: &ExperimentConfig, text: &mut String) -> Result<(), CliError> {
    let h = cfg.higgs()?;
    let coeffs = char_poly(&h);
    let _ = writeln!(text, "rank {}", h.rank());
    for (j, a) in coeffs.iter().enumerate() {
        let _ = writeln!(text, "a_{j}(z) = {a}");
    }
    let _ = writeln!(text, "discriminant = {}", discriminant(&h));
    match branch_locus(&h, h.default_tolerance()) {
        Ok(locus) => {
            let pts: Vec<String> = locus.points.iter().map(|&p| cx(p)).collect();
            let _ = writeln!(text, "branch locus ({} points): [{}]", pts.len(), pts.join(", "));
        }
        Err(e) => {
            let _ = writeln!(text, "branch locus: {e}");
        }
    }
    for p in &cfg.spectral.points {
        let z = parse_poly::<f64>(p.get_ref()).map_err(|e| hax_core::Error::InvalidInput(e.to_string()))?.coeff(0);
        match eigen_frame(&h, z, h.default_tolerance()) {
            Ok(s) => {
                let ev: Vec<String> = s.eigenvalues.iter().map(|&b| cx(b)).collect();
                let _ = writeln!(text, "z = {}: eigenvalues [{}], min gap {:.6e}", cx(z), ev.join(", "), s.min_gap);
                for i in 0..h.rank() {
                    let col: Vec<String> = s.eigenvectors.column(i).iter().map(|&c| cx(c)).collect();
                    let _ = writeln!(text, "  v_{i} = ({})", col.join(", "));
                }
            }
            Err(e) => {
                let _ = writeln!(text, "z = {}: {e}", cx(z));
            }
        }
    }
    Ok(())
}

fn filtered(cfg: &ExperimentConfig, text: &mut String) -> Result<(), CliError> {
    let f = &cfg.filtered;
    let r = f.r.unwrap_or(cfg.higgs.rank as u32);
    let _ = writeln!(text, "pairing_pole_check(k={}, r={r}) = {}", f.k, pairing_pole_check(f.k, r)?);
    let canon = canonical_pairing_filtration(f.k);
    let _ = writeln!(text, "canonical pairing filtration (k={}) = {canon}", f.k);
    let d = parse_fraction(&f.d)?;
    let ri = r as i64;
    let m = f.m.unwrap_or(if ri % 2 == 0 { ri / 2 } else { 0 });
    match star_extension(StarExtensionInput { r, d, m }) {
        Ok(s) => {
            let ws: Vec<String> = s.bundle.weights().iter().map(|w| format_fraction(w.0)).collect();
            let _ = writeln!(
                text,
                "star_extension(r={r}, d={}, m={m}): line weight {}, jumps {{{}}}, degree {}",
                format_fraction(d),
                format_fraction(s.line_weight),
                ws.join(", "),
                format_fraction(s.bundle.degree())
            );
        }
        Err(e) => {
            let _ = writeln!(text, "star_extension(r={r}, d={}, m={m}): {e}", format_fraction(d));
        }
    }
    Ok(())
}

fn boundary_data(cfg: &ExperimentConfig, h: &hax_core::Higgs) -> Result<MetricField<f64>, CliError> {
    let spec = cfg.spec();
    Ok(match cfg.pairing()? {
        Some(c) => decoupled_metric_from_pairing(h, &c, spec.grid()?)?.metric,
        None => identity_reference(&spec, h.rank())?,
    })
}

fn solve(cfg: &ExperimentConfig, hash: &str, text: &mut String) -> Result<(), CliError> {
    let h = cfg.higgs()?;
    let data = boundary_data(cfg, &h)?;
    let t = cfg.solve.t;
    let (metric, stats) = solve_with_retry(&h, t, &data, &cfg.solver)?;
    let path = out_path(cfg, &cfg.outputs.checkpoint);
    let mut buf = Vec::new();
    metric.write_checkpoint(&mut buf)?;
    write_file(&path, &buf)?;
    let _ = writeln!(
        text,
        "solve t={t}: {} iterations, residual {:.3e}, det drift {:.3e}",
        stats.iterations, stats.final_residual, stats.det_drift
    );
    if let Some(c) = cfg.pairing()? {
        let _ = writeln!(text, "compatibility defect {:.3e}", compatibility_defect(&metric, &c)?);
    }
    let _ = writeln!(text, "checkpoint {} (config {hash})", path.display());
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, hash: &str, text: &mut String) -> Result<(), CliError> {
    let spec = cfg.spec();
    let json_path = out_path(cfg, &cfg.outputs.json);
    let csv_path = out_path(cfg, &cfg.outputs.csv);
    if cfg.mode() == Mode::Family {
        let pairing = cfg
            .pairing()?
            .ok_or_else(|| hax_core::Error::InvalidInput("family sweeps need a pairing".into()))?;
        let members = cfg.family_members()?;
        let fam = family_sweep(&members, &pairing, &spec, hash)?;
        let mut csv = format!("x,{CSV_HEADER}\n");
        for (x, rep) in fam.params.iter().zip(&fam.reports) {
            for line in rep.to_csv().lines().skip(1) {
                let _ = writeln!(csv, "{x},{line}");
            }
        }
        let out = FamilyOutput { config_hash: hash.to_string(), version: VERSION.to_string(), family: fam };
        let json = serde_json::to_string_pretty(&out).expect("report serializes") + "\n";
        write_file(&json_path, json.as_bytes())?;
        write_file(&csv_path, csv.as_bytes())?;
        for (x, e) in out.family.params.iter().zip(&out.family.epsilons) {
            let _ = writeln!(text, "x = {x}: min fitted rate {e:.4}");
        }
        let _ = writeln!(text, "min over family {:.4} (uniform: {})", out.family.min_epsilon, out.family.uniform);
    } else {
        let h = cfg.higgs()?;
        let pairing = cfg.pairing()?;
        let reference = match pairing {
            Some(_) => None,
            None => Some(identity_reference(&spec, h.rank())?),
        };
        let rep = convergence_experiment(
            ExperimentInputs { higgs: &h, pairing: pairing.as_ref(), reference: reference.as_ref() },
            &spec,
            hash,
        )?;
        write_file(&json_path, rep.to_json().as_bytes())?;
        write_file(&csv_path, rep.to_csv().as_bytes())?;
        for (norm, fit) in &rep.fits {
            let _ = writeln!(text, "{norm}: C {:.4e} rate {:.4} R^2 {:.4}", fit.c, fit.epsilon, fit.r_squared);
        }
        if !rep.failed.is_empty() {
            let _ = writeln!(text, "failed solves at t = {:?}", rep.failed);
        }
    }
    let _ = writeln!(text, "wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn series_of(rep: &ConvergenceReport, suffix: &str) -> Vec<Series> {
    NORMS.iter().map(|n| Series { label: format!("{n}{suffix}"), points: rep.series(n) }).collect()
}

fn report(cfg: &ExperimentConfig, text: &mut String) -> Result<(), CliError> {
    let json_path = out_path(cfg, &cfg.outputs.json);
    let raw = fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    let bad = |m: String| CliError::Report { path: json_path.display().to_string(), message: m };
    let (series, hash, version) = match ConvergenceReport::from_json(&raw) {
        Ok(rep) => (series_of(&rep, ""), rep.config_hash.clone(), rep.version.clone()),
        Err(single) => {
            let fam: FamilyOutput =
                serde_json::from_str(&raw).map_err(|e| bad(format!("{single}; not a family report either: {e}")))?;
            let series = fam
                .family
                .params
                .iter()
                .zip(&fam.family.reports)
                .flat_map(|(x, rep)| series_of(rep, &format!(" x={x}")))
                .collect();
            (series, fam.config_hash, fam.version)
        }
    };
    let note = format!("hax {version} config {hash}");
    let svg = svg::render("error of s(h_inf, h_t) - id against t", &note, &series);
    let path = out_path(cfg, &cfg.outputs.svg);
    write_file(&path, svg.as_bytes())?;
    let _ = writeln!(text, "wrote {} ({} series)", path.display(), series.len());
    Ok(())
}
