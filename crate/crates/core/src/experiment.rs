//! Declarative experiment matrix: distributions × H/h × coarse space × enrichment.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coarse::{
    CoarseBasis, CoarseKind, CoarseOptions, Thresholds, DEFAULT_C_EDGE, DEFAULT_C_VERTEX_FACE,
    DEFAULT_C_WIREBASKET_FACE,
};
use crate::coeff::InclusionSpec;
use crate::error::{Error, Result};
use crate::harmonic::Structure;
use crate::pcg::{pcg_solve, SolveReport};
use crate::precond::SchwarzPreconditioner;
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub description: String,
    pub mesh: MeshConfig,
    pub distributions: Vec<Distribution>,
    #[serde(default)]
    pub coarse_space: CoarseChoice,
    #[serde(default)]
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub enrichment: EnrichmentChoice,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub rhs: RhsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_subdomains")]
    pub subdomains_per_axis: usize,
    /// Cells per subdomain side, one run per entry.
    #[serde(rename = "H_over_h")]
    pub h_ratios: Vec<usize>,
}

fn default_subdomains() -> usize {
    2
}

/// One coefficient distribution: a background value and boxes painted over it
/// in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distribution {
    pub name: String,
    #[serde(default = "default_background")]
    pub background: f64,
    #[serde(default)]
    pub inclusions: Vec<InclusionSpec>,
}

fn default_background() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseChoice {
    Wirebasket,
    Vertex,
    #[default]
    Both,
}

impl CoarseChoice {
    pub fn kinds(self) -> Vec<CoarseKind> {
        match self {
            CoarseChoice::Wirebasket => vec![CoarseKind::Wirebasket],
            CoarseChoice::Vertex => vec![CoarseKind::Vertex],
            CoarseChoice::Both => vec![CoarseKind::Wirebasket, CoarseKind::Vertex],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnrichmentChoice {
    On,
    Off,
    #[default]
    Both,
}

impl EnrichmentChoice {
    /// Enrichment flags in table order (off first).
    pub fn flags(self) -> Vec<bool> {
        match self {
            EnrichmentChoice::On => vec![true],
            EnrichmentChoice::Off => vec![false],
            EnrichmentChoice::Both => vec![false, true],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Values are constants `c` with `λ* = c h/H`.
    #[default]
    #[serde(rename = "c-over-Hh")]
    COverHh,
    /// Values are the thresholds `λ*` themselves, for every H/h.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default)]
    pub mode: ThresholdMode,
    #[serde(default = "default_wb_face")]
    pub wirebasket_face: f64,
    #[serde(default = "default_vx_face")]
    pub vertex_face: f64,
    #[serde(default = "default_edge")]
    pub edge: f64,
}

fn default_wb_face() -> f64 {
    DEFAULT_C_WIREBASKET_FACE
}
fn default_vx_face() -> f64 {
    DEFAULT_C_VERTEX_FACE
}
fn default_edge() -> f64 {
    DEFAULT_C_EDGE
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            mode: ThresholdMode::COverHh,
            wirebasket_face: DEFAULT_C_WIREBASKET_FACE,
            vertex_face: DEFAULT_C_VERTEX_FACE,
            edge: DEFAULT_C_EDGE,
        }
    }
}

impl ThresholdConfig {
    pub fn thresholds(&self, kind: CoarseKind, h_ratio: usize) -> Thresholds {
        let scale = match self.mode {
            ThresholdMode::COverHh => 1.0 / h_ratio as f64,
            ThresholdMode::Explicit => 1.0,
        };
        let face = match kind {
            CoarseKind::Wirebasket => self.wirebasket_face,
            CoarseKind::Vertex => self.vertex_face,
        };
        Thresholds {
            face: face * scale,
            edge: self.edge * scale,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_rel_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    1000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsConfig {
    #[serde(default = "default_f")]
    pub f: f64,
}

fn default_f() -> f64 {
    100.0
}

impl Default for RhsConfig {
    fn default() -> Self {
        Self { f: default_f() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Matrix Market dumps of `A` and the coarse basis of every run.
    #[serde(default)]
    pub emit_matrices: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Text, OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
            emit_matrices: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg = Self::load_unvalidated(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, so that overrides can be applied first.
    pub fn load_unvalidated(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|source| Error::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.mesh.subdomains_per_axis;
        if m < 2 {
            return Err(Error::Config(format!(
                "mesh.subdomains_per_axis must be at least 2 so that an interface exists, got {m}"
            )));
        }
        if self.mesh.h_ratios.is_empty() {
            return Err(Error::Config("mesh.H_over_h lists no values".into()));
        }
        let needs_interior_faces = self.coarse_space.kinds().contains(&CoarseKind::Vertex);
        for &r in &self.mesh.h_ratios {
            if r < 2 {
                return Err(Error::Config(format!("mesh.H_over_h = {r}; need at least 2")));
            }
            if needs_interior_faces && r < 3 {
                return Err(Error::Config(format!(
                    "mesh.H_over_h = {r} leaves no interior face triangles for the vertex coarse \
                     space; use H_over_h >= 3 or coarse_space = \"wirebasket\""
                )));
            }
        }
        if self.distributions.is_empty() {
            return Err(Error::Config("no distributions given".into()));
        }
        let mut names = HashSet::new();
        for d in &self.distributions {
            if d.name.trim().is_empty() {
                return Err(Error::Config("distribution with an empty name".into()));
            }
            if !names.insert(d.name.as_str()) {
                return Err(Error::Config(format!("duplicate distribution name {:?}", d.name)));
            }
            if !(d.background > 0.0 && d.background.is_finite()) {
                return Err(Error::Config(format!(
                    "distribution {:?}: background must be positive, got {}",
                    d.name, d.background
                )));
            }
            for (i, inc) in d.inclusions.iter().enumerate() {
                inc.validate().map_err(|e| {
                    Error::Config(format!("distribution {:?}, inclusion {i}: {e}", d.name))
                })?;
            }
        }
        let t = &self.threshold;
        for (key, v) in [
            ("wirebasket_face", t.wirebasket_face),
            ("vertex_face", t.vertex_face),
            ("edge", t.edge),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "threshold.{key} must be a finite non-negative number, got {v}"
                )));
            }
        }
        let s = &self.solver;
        if !(s.rel_tol > 0.0 && s.rel_tol < 1.0) {
            return Err(Error::Config(format!("solver.rel_tol must lie in (0, 1), got {}", s.rel_tol)));
        }
        if s.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be positive".into()));
        }
        if !self.rhs.f.is_finite() {
            return Err(Error::Config(format!("rhs.f must be finite, got {}", self.rhs.f)));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats lists no formats".into()));
        }
        Ok(())
    }
}

/// Eigenvalues of one structure as reported in the listings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub structure: Structure,
    pub threshold: f64,
    pub selected: Vec<f64>,
    pub first_excluded: Option<f64>,
    pub kernel_dim: usize,
}

/// Wall-clock seconds per phase. The problem phase is shared by all runs on
/// the same mesh and distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub problem: f64,
    pub coarse_basis: f64,
    pub preconditioner: f64,
    pub solve: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub distribution: String,
    pub coarse: CoarseKind,
    pub enrichment: bool,
    pub subdomains_per_axis: usize,
    pub h_ratio: usize,
    pub num_dofs: usize,
    pub thresholds: Thresholds,
    pub coarse_dim: usize,
    pub enrichment_columns: usize,
    pub selections: Vec<SelectionSummary>,
    pub report: SolveReport,
    pub times: PhaseTimes,
    pub config: ExperimentConfig,
}

impl RunRecord {
    /// File-name stem unique within one experiment.
    pub fn stem(&self) -> String {
        format!(
            "{}_{}_{}_Hh{}",
            slug(&self.distribution),
            self.coarse.name(),
            if self.enrichment { "enriched" } else { "plain" },
            self.h_ratio
        )
    }
}

/// Lowercase ASCII with runs of other characters collapsed to `-`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn summarize(basis: &CoarseBasis) -> Vec<SelectionSummary> {
    basis
        .selections
        .iter()
        .map(|s| SelectionSummary {
            structure: s.structure,
            threshold: s.selection.threshold,
            selected: s.selection.selected_values().to_vec(),
            first_excluded: s.selection.first_excluded,
            kernel_dim: s.selection.kernel_dim,
        })
        .collect()
}

/// Runs every cell of the matrix in a fixed order: H/h, distribution, coarse
/// space, enrichment off before on.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    run_with(config, None)
}

/// Like [`run`]; with `matrices_dir` set, also writes `A`, `f` and every
/// coarse basis in Matrix Market format.
pub fn run_with(config: &ExperimentConfig, matrices_dir: Option<&Path>) -> Result<Vec<RunRecord>> {
    config.validate()?;
    if let Some(dir) = matrices_dir {
        std::fs::create_dir_all(dir)?;
    }
    let m = config.mesh.subdomains_per_axis;
    let mut records = Vec::new();
    for &h_ratio in &config.mesh.h_ratios {
        for dist in &config.distributions {
            let t = Instant::now();
            let problem = Problem::build(m, h_ratio, dist.background, &dist.inclusions, config.rhs.f)?;
            let problem_time = t.elapsed().as_secs_f64();
            log::info!(
                "{} H/h={h_ratio}: {} dofs, setup {problem_time:.2}s",
                dist.name,
                problem.num_dofs()
            );
            if let Some(dir) = matrices_dir {
                let stem = format!("{}_Hh{h_ratio}", slug(&dist.name));
                crate::mtx::write_symmetric(&dir.join(format!("{stem}_A.mtx")), &problem.system.a)?;
                crate::mtx::write_vector(&dir.join(format!("{stem}_f.mtx")), &problem.system.rhs)?;
            }
            for kind in config.coarse_space.kinds() {
                for enrichment in config.enrichment.flags() {
                    let thresholds = config.threshold.thresholds(kind, h_ratio);
                    let options = CoarseOptions {
                        kind,
                        enrichment,
                        thresholds,
                    };
                    let t = Instant::now();
                    let basis = CoarseBasis::build(&problem, options)?;
                    let coarse_time = t.elapsed().as_secs_f64();
                    let selections = summarize(&basis);
                    let coarse_dim = basis.dim();
                    let enrichment_columns = basis.num_enrichment_columns();

                    let t = Instant::now();
                    let precond = SchwarzPreconditioner::setup(&problem, Some(basis))?;
                    let precond_time = t.elapsed().as_secs_f64();

                    let t = Instant::now();
                    let (_, report) = pcg_solve(
                        &problem.system.a,
                        &precond,
                        &problem.system.rhs,
                        config.solver.rel_tol,
                        config.solver.max_iter,
                    )?;
                    let solve_time = t.elapsed().as_secs_f64();

                    let record = RunRecord {
                        distribution: dist.name.clone(),
                        coarse: kind,
                        enrichment,
                        subdomains_per_axis: m,
                        h_ratio,
                        num_dofs: problem.num_dofs(),
                        thresholds,
                        coarse_dim,
                        enrichment_columns,
                        selections,
                        report,
                        times: PhaseTimes {
                            problem: problem_time,
                            coarse_basis: coarse_time,
                            preconditioner: precond_time,
                            solve: solve_time,
                        },
                        config: config.clone(),
                    };
                    if let Some(dir) = matrices_dir {
                        let stem = record.stem();
                        let b = &precond.coarse().expect("coarse solver was set up").basis;
                        b.export(
                            &dir.join(format!("{stem}_coarse.mtx")),
                            &dir.join(format!("{stem}_coarse_columns.csv")),
                        )?;
                    }
                    log::info!(
                        "{} {} enrichment={enrichment} H/h={h_ratio}: kappa {:?}, {} iterations, coarse dim {coarse_dim}",
                        dist.name,
                        kind.name(),
                        record.report.cond_estimate,
                        record.report.iterations
                    );
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [mesh]
        H_over_h = [4]

        [[distributions]]
        name = "Constant"
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.mesh.subdomains_per_axis, 2);
        assert_eq!(c.coarse_space, CoarseChoice::Both);
        assert_eq!(c.enrichment.flags(), vec![false, true]);
        assert_eq!(c.solver.rel_tol, 1e-6);
        assert_eq!(c.rhs.f, 100.0);
        assert_eq!(c.distributions[0].background, 1.0);
        let t = c.threshold.thresholds(CoarseKind::Wirebasket, 8);
        assert!((t.face - 0.075).abs() < 1e-15);
        assert!((t.edge - 0.1512).abs() < 1e-15);
        assert!((c.threshold.thresholds(CoarseKind::Vertex, 8).face - 0.0375).abs() < 1e-15);
    }

    #[test]
    fn explicit_thresholds_ignore_h_ratio() {
        let t = ThresholdConfig {
            mode: ThresholdMode::Explicit,
            wirebasket_face: 0.1,
            vertex_face: 0.2,
            edge: 0.3,
        };
        assert_eq!(t.thresholds(CoarseKind::Vertex, 16), Thresholds { face: 0.2, edge: 0.3 });
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            MINIMAL.replace("[4]", "[2]"),
            MINIMAL.replace("[4]", "[]"),
            MINIMAL.replace("name = \"Constant\"", "name = \"\""),
            format!("{MINIMAL}\n[solver]\nrel_tol = 0.0\n"),
            format!("{MINIMAL}\n[threshold]\nedge = -1.0\n"),
            format!("{MINIMAL}\n[[distributions]]\nname = \"Constant\"\n"),
            format!("{MINIMAL}\nunknown_key = 3\n"),
            MINIMAL.replace("[mesh]", "[mesh]\nsubdomains_per_axis = 1"),
        ];
        for text in bad {
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{text}");
        }
        // H/h = 2 is fine without the vertex space
        let ok = format!("coarse_space = \"wirebasket\"\n{}", MINIMAL.replace("[4]", "[2]"));
        ExperimentConfig::from_toml_str(&ok).unwrap();
    }

    #[test]
    fn toml_roundtrip() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Face 1-4 & Edge"), "face-1-4-edge");
        assert_eq!(slug("  x  "), "x");
    }
}
