//! Run configuration: TOML file sections merged under command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Txt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Convergence,
    Hardy,
    Solve,
    Infsup,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Hardy => "hardy",
            Command::Solve => "solve",
            Command::Infsup => "infsup",
        }
    }
}

/// File layout; every key optional so that flags can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub command: Option<Command>,
    pub case: Option<u8>,
    pub nu: Option<Vec<f64>>,
    pub iota: Option<Vec<f64>>,
    pub free_corners: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub levels: Option<Vec<usize>>,
    pub perturb: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub matrix_degree: Option<usize>,
    /// Load and error-norm degree.
    pub degree: Option<usize>,
    pub edge_degree: Option<usize>,
    pub singular_levels: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: Option<f64>,
    pub eigen_tol: Option<f64>,
    pub eigen_max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub dump_matrix: Option<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::parse(&text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source: Box::new(source) })
    }

    /// Parse errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: FileConfig) -> Self {
        macro_rules! take {
            ($($s:ident . $f:ident),*) => { $( if over.$s.$f.is_some() { self.$s.$f = over.$s.$f; } )* };
        }
        take!(run.command, run.case, run.nu, run.iota, run.free_corners);
        take!(mesh.levels, mesh.perturb, mesh.seed);
        take!(quadrature.matrix_degree, quadrature.degree, quadrature.edge_degree, quadrature.singular_levels);
        take!(solver.tol, solver.eigen_tol, solver.eigen_max_iter);
        take!(output.dir, output.formats, output.dump_matrix);
        self
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub case: u8,
    pub nu: Vec<f64>,
    pub iota: Vec<f64>,
    pub free_corners: bool,
    pub levels: Vec<usize>,
    pub perturb: f64,
    pub seed: u64,
    pub matrix_degree: usize,
    pub degree: usize,
    pub edge_degree: usize,
    pub singular_levels: usize,
    pub solver_tol: f64,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub dump_matrix: bool,
}

impl RunConfig {
    /// Fills unset values with the command's defaults and validates.
    pub fn resolve(command: Command, f: FileConfig) -> Result<Self, ConfigError> {
        let case = f.run.case.unwrap_or(1);
        let default_iota = match (command, case) {
            (Command::Convergence | Command::Solve, 4) => vec![1e-4, 1e-6],
            _ => vec![1.0, 1e-6],
        };
        let default_levels = match command {
            Command::Convergence => vec![8, 16, 32, 64],
            Command::Hardy => vec![4, 8, 16, 32],
            Command::Solve => vec![8],
            Command::Infsup => vec![4, 8, 16],
        };
        let q = sgfem::assembly::QuadratureOptions::default();
        let cfg = Self {
            command,
            case,
            nu: f.run.nu.unwrap_or_else(|| vec![0.3, 0.4999]),
            iota: f.run.iota.unwrap_or(default_iota),
            free_corners: f.run.free_corners.unwrap_or(false),
            levels: f.mesh.levels.unwrap_or(default_levels),
            perturb: f.mesh.perturb.unwrap_or(0.0),
            seed: f.mesh.seed.unwrap_or(0),
            matrix_degree: f.quadrature.matrix_degree.unwrap_or(q.matrix_degree),
            degree: f.quadrature.degree.unwrap_or(q.load_degree),
            edge_degree: f.quadrature.edge_degree.unwrap_or(q.edge_degree),
            singular_levels: f.quadrature.singular_levels.unwrap_or(q.singular_levels),
            solver_tol: f.solver.tol.unwrap_or(1e-10),
            eigen_tol: f.solver.eigen_tol.unwrap_or(1e-6),
            eigen_max_iter: f.solver.eigen_max_iter.unwrap_or(20_000),
            out: f.output.dir,
            formats: f.output.formats.unwrap_or_else(|| vec![Format::Csv, Format::Txt]),
            dump_matrix: f.output.dump_matrix.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=4).contains(&self.case) {
            return bad(format!("case must be 1, 2, 3 or 4, got {}", self.case));
        }
        if self.nu.is_empty() || self.iota.is_empty() || self.levels.is_empty() {
            return bad("nu, iota and levels need at least one value".into());
        }
        if let Some(nu) = self.nu.iter().find(|&&nu| !(nu > 0.0 && nu < 0.5)) {
            return bad(format!("ν = {nu} outside (0, 0.5)"));
        }
        if let Some(i) = self.iota.iter().find(|&&i| !(i > 0.0 && i <= 1.0)) {
            return bad(format!("ι = {i} outside (0, 1]"));
        }
        if self.levels.contains(&0) {
            return bad("mesh levels must be positive".into());
        }
        if !(0.0..0.3).contains(&self.perturb) {
            return bad(format!("perturbation {} outside [0, 0.3)", self.perturb));
        }
        if !(self.solver_tol > 0.0) || !(self.eigen_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            run: RunSection {
                command: Some(self.command),
                case: Some(self.case),
                nu: Some(self.nu.clone()),
                iota: Some(self.iota.clone()),
                free_corners: Some(self.free_corners),
            },
            mesh: MeshSection { levels: Some(self.levels.clone()), perturb: Some(self.perturb), seed: Some(self.seed) },
            quadrature: QuadratureSection {
                matrix_degree: Some(self.matrix_degree),
                degree: Some(self.degree),
                edge_degree: Some(self.edge_degree),
                singular_levels: Some(self.singular_levels),
            },
            solver: SolverSection { tol: Some(self.solver_tol), eigen_tol: Some(self.eigen_tol), eigen_max_iter: Some(self.eigen_max_iter) },
            output: OutputSection { dir: self.out.clone(), formats: Some(self.formats.clone()), dump_matrix: Some(self.dump_matrix) },
        }
    }

    /// Canonical text form; parsing it back yields an identical config.
    pub fn canonical_text(&self) -> String {
        toml::to_string(&self.to_file_config()).expect("config serializes")
    }

    pub fn quadrature(&self) -> sgfem::assembly::QuadratureOptions {
        sgfem::assembly::QuadratureOptions {
            matrix_degree: self.matrix_degree,
            load_degree: self.degree,
            edge_degree: self.edge_degree,
            norm_degree: self.degree,
            singular_levels: self.singular_levels,
        }
    }

    pub fn solve_options(&self) -> sgfem::study::SolveOptions {
        sgfem::study::SolveOptions {
            quadrature: self.quadrature(),
            solver: sgfem::linalg::SolverOptions { tol: self.solver_tol, ..Default::default() },
            pin_corners: !self.free_corners,
            keep_system: self.dump_matrix,
        }
    }

    pub fn eigen_options(&self) -> sgfem::linalg::EigenOptions {
        sgfem::linalg::EigenOptions { tol: self.eigen_tol, max_iter: self.eigen_max_iter }
    }
}
