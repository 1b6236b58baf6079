//! Experiment configuration: TOML with sections, defaults filled in,
//! validated with line/column positions.

use std::fmt;
use std::ops::Range;

use hax_core::asymptotics::{ExperimentSpec, Mode, TSchedule};
use hax_core::higgs::branch_locus;
use hax_core::poly::{parse_poly_with_param, PolyParseError};
use hax_core::{cyclic_higgs, parse_poly, Higgs, Pairing, Poly, Region, SolveConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub higgs: HiggsSection,
    pub pairing: PairingSection,
    pub grid: GridSection,
    pub schedule: ScheduleSection,
    #[serde(default = "default_region")]
    pub region: Spanned<Region>,
    pub solver: SolveConfig,
    pub experiment: ExperimentSection,
    pub family: FamilySection,
    pub solve: SolveSection,
    pub spectral: SpectralSection,
    pub filtered: FilteredSection,
    pub outputs: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            higgs: HiggsSection::default(),
            pairing: PairingSection::default(),
            grid: GridSection::default(),
            schedule: ScheduleSection::default(),
            region: default_region(),
            solver: SolveConfig::default(),
            experiment: ExperimentSection::default(),
            family: FamilySection::default(),
            solve: SolveSection::default(),
            spectral: SpectralSection::default(),
            filtered: FilteredSection::default(),
            outputs: OutputSection::default(),
        }
    }
}

fn default_region() -> Spanned<Region> {
    Spanned::new(0..0, Region::default())
}

/// Either `cyclic_q` (companion matrix with characteristic polynomial
/// `y^r - q`) or `matrix` (row-major entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HiggsSection {
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic_q: Option<Spanned<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Spanned<String>>>,
}

impl Default for HiggsSection {
    fn default() -> Self {
        Self { rank: 2, cyclic_q: None, matrix: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    #[default]
    Antidiagonal,
    Identity,
    Gram,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PairingSection {
    pub kind: PairingKind,
    /// Row-major entries, used with `kind = "gram"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Spanned<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub radius: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 128, radius: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub t: TSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_mode")]
    pub mode: Spanned<Mode>,
    pub drop_first: bool,
    pub perturbation: f64,
    /// Worker threads, 0 for one per core. `HAX_WORKERS` overrides it.
    pub workers: usize,
}

fn default_mode() -> Spanned<Mode> {
    Spanned::new(0..0, Mode::Symmetric)
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let spec = ExperimentSpec::default();
        Self { mode: default_mode(), drop_first: spec.drop_first, perturbation: spec.perturbation, workers: 0 }
    }
}

/// Cyclic family `q_x` for `x` in `params`; `q` may mention `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    #[serde(default = "default_family_q")]
    pub q: Spanned<String>,
    pub params: Vec<f64>,
}

fn default_family_q() -> Spanned<String> {
    Spanned::new(0..0, "z - x".to_string())
}

impl Default for FamilySection {
    fn default() -> Self {
        Self { q: default_family_q(), params: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub t: f64,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self { t: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    /// Sample points as constant literals, e.g. `"0.3 + 0.1i"`.
    pub points: Vec<Spanned<String>>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self { points: vec![Spanned::new(0..0, "0.375".to_string())] }
    }
}

/// Queries of the exact filtered-bundle algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilteredSection {
    /// Twist of the trace pairing.
    pub k: i64,
    /// Rank; defaults to the Higgs rank.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    /// Determinant jump, `"n"` or `"n/d"`.
    pub d: String,
    /// Frame valuation; defaults to the smallest admissible one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
}

impl Default for FilteredSection {
    fn default() -> Self {
        Self { k: 1, r: None, d: "0".into(), m: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub json: String,
    pub csv: String,
    pub svg: String,
    pub checkpoint: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            json: "report.json".into(),
            csv: "report.csv".into(),
            svg: "report.svg".into(),
            checkpoint: "metric.ckpt".into(),
        }
    }
}

/// A problem in the configuration text. Line and column are 1-based;
/// both are 0 when no position is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: {}", self.line, self.col, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ParseError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Errors<'a> {
    text: &'a str,
    list: Vec<ParseError>,
}

impl Errors<'_> {
    fn at(&mut self, span: Option<Range<usize>>, message: impl Into<String>) {
        let (line, col) = match span {
            Some(s) if s.end > 0 || s.start > 0 => position(self.text, s.start),
            _ => (0, 0),
        };
        self.list.push(ParseError { line, col, message: message.into() });
    }

    /// Points at the offending token inside a quoted polynomial literal.
    fn poly(&mut self, lit: &Spanned<String>, what: &str, e: &PolyParseError) {
        let span = lit.span();
        let start = if span.end > span.start {
            let raw = &self.text[span.clone()];
            let quote = raw.chars().take_while(|&c| c == '"' || c == '\'').count().min(3);
            span.start + quote + e.offset
        } else {
            0
        };
        self.at(Some(start..start), format!("bad polynomial in {what} '{}': {}", lit.get_ref(), e.message));
    }
}

fn parse_entries(errs: &mut Errors<'_>, lits: &[Spanned<String>], what: &str) -> Option<Vec<Poly>> {
    let mut out = Vec::with_capacity(lits.len());
    let mut ok = true;
    for lit in lits {
        match parse_poly::<f64>(lit.get_ref()) {
            Ok(p) => out.push(p),
            Err(e) => {
                errs.poly(lit, what, &e);
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

impl ExperimentConfig {
    pub fn mode(&self) -> Mode {
        *self.experiment.mode.get_ref()
    }

    pub fn region(&self) -> Region {
        *self.region.get_ref()
    }

    pub fn spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            n: self.grid.n,
            radius: self.grid.radius,
            schedule: self.schedule.t.clone(),
            region: self.region(),
            solver: self.solver,
            mode: self.mode(),
            drop_first: self.experiment.drop_first,
            perturbation: self.experiment.perturbation,
        }
    }

    /// The Higgs field. Only valid on a validated config.
    pub fn higgs(&self) -> hax_core::Result<Higgs> {
        let r = self.higgs.rank;
        match (&self.higgs.cyclic_q, &self.higgs.matrix) {
            (Some(q), _) => cyclic_higgs(r, parse_poly(q.get_ref()).map_err(poly_err)?),
            (None, Some(m)) => {
                let entries = m.iter().map(|s| parse_poly(s.get_ref()).map_err(poly_err)).collect::<Result<_, _>>()?;
                Higgs::new(r, entries)
            }
            (None, None) => Err(hax_core::Error::InvalidInput("no Higgs field given".into())),
        }
    }

    pub fn pairing(&self) -> hax_core::Result<Option<Pairing>> {
        let r = self.higgs.rank;
        match self.pairing.kind {
            PairingKind::Antidiagonal => Pairing::antidiagonal(r).map(Some),
            PairingKind::Identity => Pairing::identity(r).map(Some),
            PairingKind::None => Ok(None),
            PairingKind::Gram => {
                let lits = self.pairing.gram.as_deref().unwrap_or_default();
                let entries = lits.iter().map(|s| parse_poly(s.get_ref()).map_err(poly_err)).collect::<Result<_, _>>()?;
                Pairing::new(r, entries, "gram").map(Some)
            }
        }
    }

    /// `(x, f_x)` for every family parameter.
    pub fn family_members(&self) -> hax_core::Result<Vec<(f64, Higgs)>> {
        self.family
            .params
            .iter()
            .map(|&x| {
                let q = parse_poly_with_param(self.family.q.get_ref(), x).map_err(poly_err)?;
                Ok((x, cyclic_higgs(self.higgs.rank, q)?))
            })
            .collect()
    }

    /// Canonical TOML with every default spelled out.
    pub fn normalized(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the normalized form without the output and worker
    /// settings, which do not affect results.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.outputs = OutputSection::default();
        c.experiment.workers = 0;
        let digest = Sha256::digest(c.normalized().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Applies `key=value` overrides (dotted keys; values in TOML syntax,
    /// bare words taken as strings) and revalidates.
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self, ConfigErrors> {
        if sets.is_empty() {
            return Ok(self.clone());
        }
        let single = |m: String| ConfigErrors(vec![ParseError { line: 0, col: 0, message: m }]);
        let mut table: toml::Table = toml::from_str(&self.normalized()).expect("normalized form parses");
        for set in sets {
            let (key, raw) = set.split_once('=').ok_or_else(|| single(format!("--set {set}: expected key=value")))?;
            let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
            let path: Vec<&str> = key.trim().split('.').collect();
            let mut cur = &mut table;
            for part in &path[..path.len() - 1] {
                let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
                cur = entry.as_table_mut().ok_or_else(|| single(format!("--set {set}: {part} is not a section")))?;
            }
            cur.insert(path[path.len() - 1].to_string(), value);
        }
        let text = toml::to_string(&table).expect("table serializes");
        parse_config(&text).map_err(|ConfigErrors(list)| {
            ConfigErrors(
                list.into_iter()
                    .map(|e| ParseError { line: 0, col: 0, message: format!("after --set overrides: {}", e.message) })
                    .collect(),
            )
        })
    }
}

fn poly_err(e: PolyParseError) -> hax_core::Error {
    hax_core::Error::InvalidInput(e.to_string())
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, col) = e.span().map_or((0, 0), |s| position(text, s.start));
        ConfigErrors(vec![ParseError { line, col, message: e.message().trim().to_string() }])
    })?;
    let mut errs = Errors { text, list: Vec::new() };
    validate(&cfg, &mut errs);
    if errs.list.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errs.list))
    }
}

fn validate(cfg: &ExperimentConfig, errs: &mut Errors<'_>) {
    let r = cfg.higgs.rank;
    if r == 0 {
        errs.at(None, "higgs.rank must be at least 1");
        return;
    }
    let mode = cfg.mode();
    let mut fields: Vec<Higgs> = Vec::new();
    match (&cfg.higgs.cyclic_q, &cfg.higgs.matrix) {
        (Some(q), Some(_)) => errs.at(Some(q.span()), "give either higgs.cyclic_q or higgs.matrix, not both"),
        (Some(q), None) => match parse_poly::<f64>(q.get_ref()) {
            Ok(p) => match cyclic_higgs(r, p) {
                Ok(h) => fields.push(h),
                Err(e) => errs.at(Some(q.span()), e.to_string()),
            },
            Err(e) => errs.poly(q, "higgs.cyclic_q", &e),
        },
        (None, Some(m)) => {
            if m.len() != r * r {
                errs.at(m.first().map(|s| s.span()), format!("higgs.matrix needs {} entries, got {}", r * r, m.len()));
            } else if let Some(entries) = parse_entries(errs, m, "higgs.matrix") {
                match Higgs::new(r, entries) {
                    Ok(h) => fields.push(h),
                    Err(e) => errs.at(m.first().map(|s| s.span()), e.to_string()),
                }
            }
        }
        (None, None) if mode != Mode::Family => errs.at(None, "missing higgs.cyclic_q or higgs.matrix"),
        (None, None) => {}
    }

    match cfg.pairing.kind {
        PairingKind::Gram => match &cfg.pairing.gram {
            Some(g) if g.len() == r * r => {
                if let Some(entries) = parse_entries(errs, g, "pairing.gram") {
                    if let Err(e) = Pairing::new(r, entries, "gram") {
                        errs.at(g.first().map(|s| s.span()), e.to_string());
                    }
                }
            }
            Some(g) => errs.at(g.first().map(|s| s.span()), format!("pairing.gram needs {} entries", r * r)),
            None => errs.at(None, "pairing.kind = \"gram\" needs pairing.gram"),
        },
        _ if cfg.pairing.gram.is_some() => errs.at(None, "pairing.gram is only used with kind = \"gram\""),
        _ => {}
    }

    if cfg.grid.n < 8 {
        errs.at(None, format!("grid.n = {} is too small (need at least 8)", cfg.grid.n));
    }
    if !(cfg.grid.radius > 0.0 && cfg.grid.radius.is_finite()) {
        errs.at(None, "grid.radius must be positive");
    }
    if let Err(e) = cfg.schedule.t.validate() {
        errs.at(None, format!("schedule.t: {e}"));
    }
    if let Err(e) = cfg.solver.validate() {
        errs.at(None, e.to_string());
    }
    if !(cfg.solve.t >= 0.0 && cfg.solve.t.is_finite()) {
        errs.at(None, "solve.t must be nonnegative");
    }
    if mode == Mode::Generic && !(cfg.experiment.perturbation > 0.0) {
        errs.at(Some(cfg.experiment.mode.span()), "generic mode needs experiment.perturbation > 0");
    }
    for p in &cfg.spectral.points {
        if let Err(e) = parse_poly::<f64>(p.get_ref()).and_then(|q| {
            if q.degree().unwrap_or(0) == 0 {
                Ok(())
            } else {
                Err(PolyParseError { offset: 0, message: "sample point must be a constant".into() })
            }
        }) {
            errs.poly(p, "spectral.points", &e);
        }
    }
    if let Err(e) = hax_core::filtered::parse_fraction(&cfg.filtered.d) {
        errs.at(None, format!("filtered.d: {e}"));
    }

    if mode == Mode::Family {
        if cfg.family.params.is_empty() {
            errs.at(Some(cfg.experiment.mode.span()), "family mode needs a non-empty family.params list");
        }
        for &x in &cfg.family.params {
            match parse_poly_with_param::<f64>(cfg.family.q.get_ref(), x) {
                Ok(q) => match cyclic_higgs(r, q) {
                    Ok(h) => fields.push(h),
                    Err(e) => errs.at(Some(cfg.family.q.span()), e.to_string()),
                },
                Err(e) => {
                    errs.poly(&cfg.family.q, "family.q", &e);
                    break;
                }
            }
        }
    }

    // Region: inside the disc, away from the branch locus.
    let region = cfg.region();
    let span = Some(cfg.region.span());
    let bad = match region {
        Region::Annulus { inner, outer } => !(inner >= 0.0 && inner < outer),
        Region::Disc { radius } => !(radius > 0.0),
    };
    if bad {
        errs.at(span.clone(), "region radii are not ordered");
        return;
    }
    if cfg.grid.n >= 8 && cfg.grid.radius > 0.0 {
        let dx = 2.0 * cfg.grid.radius / (cfg.grid.n - 1) as f64;
        if region.outer_radius() > cfg.grid.radius - dx {
            errs.at(span.clone(), "region reaches the boundary of the disc");
        }
        for h in &fields {
            if let Ok(locus) = branch_locus(h, h.default_tolerance()) {
                if let Some(p) = locus.points.iter().find(|p| {
                    let m = p.norm();
                    m >= region.inner_radius() - dx && m <= region.outer_radius() + dx
                }) {
                    errs.at(span, format!("region touches the branch point {:.4}{:+.4}i", p.re, p.im));
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        assert_eq!(position("ab\ncd", 0), (1, 1));
        assert_eq!(position("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn hash_ignores_outputs() {
        let a = parse_config("[higgs]\ncyclic_q = \"z\"\n").unwrap();
        let mut b = a.clone();
        b.outputs.dir = "elsewhere".into();
        assert_eq!(a.config_hash(), b.config_hash());
        b.grid.n = 64;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
