//! `sgfem`: convergence studies, Hardy probes, single solves and inf-sup
//! estimates for the mixed strain gradient element.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, FileConfig, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sgfem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Refinement ladder with error norms and observed rates.
    Convergence(Common),
    /// Radial, corner-seminorm and polar-mesh Hardy probes.
    Hardy(Common),
    /// Single solves, with VTK output when --out is given.
    Solve(Common),
    /// Discrete inf-sup constant estimates.
    Infsup(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Manufactured case 1 to 4.
    #[arg(long)]
    case: Option<u8>,
    /// Poisson ratio; repeatable.
    #[arg(long)]
    nu: Vec<f64>,
    /// Gradient length scale; repeatable.
    #[arg(long)]
    iota: Vec<f64>,
    /// Mesh resolutions, comma separated.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<usize>,
    /// Interior vertex jitter as a fraction of h.
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats; repeatable.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    #[arg(long)]
    solver_tol: Option<f64>,
    /// Degree of the load and error-norm rules.
    #[arg(long)]
    quad_degree: Option<usize>,
    /// TOML file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leave the corner pressures free (diagnostic, not the method).
    #[arg(long)]
    free_corners: bool,
    /// Write the reduced system matrices in MatrixMarket form (solve only).
    #[arg(long)]
    dump_matrix: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    fn overrides(&self) -> FileConfig {
        let mut f = FileConfig::default();
        let some_vec = |v: &Vec<f64>| (!v.is_empty()).then(|| v.clone());
        f.run.case = self.case;
        f.run.nu = some_vec(&self.nu);
        f.run.iota = some_vec(&self.iota);
        f.run.free_corners = self.free_corners.then_some(true);
        f.mesh.levels = (!self.levels.is_empty()).then(|| self.levels.clone());
        f.mesh.perturb = self.perturb;
        f.mesh.seed = self.seed;
        f.quadrature.degree = self.quad_degree;
        f.solver.tol = self.solver_tol;
        f.output.dir = self.out.clone();
        f.output.formats = (!self.format.is_empty()).then(|| self.format.clone());
        f.output.dump_matrix = self.dump_matrix.then_some(true);
        f
    }
}

fn resolve(command: Command, common: &Common) -> Result<RunConfig, config::ConfigError> {
    let base = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(c) = base.run.command {
        if c != command {
            eprintln!("note: config file names command {}, running {}", c.name(), command.name());
        }
    }
    RunConfig::resolve(command, base.overlay(common.overrides()))
}

fn emit(cfg: &RunConfig, tables: &[output::Table]) -> std::io::Result<()> {
    for t in tables {
        print!("{}", t.render_text());
        println!();
    }
    let Some(dir) = &cfg.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.canonical_text())?;
    for t in tables {
        for f in &cfg.formats {
            match f {
                Format::Csv => output::write_file(&dir.join(format!("{}.csv", t.name)), |w| t.write_csv(w))?,
                Format::Txt => std::fs::write(dir.join(format!("{}.txt", t.name)), t.render_text())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::Convergence(c) => (Command::Convergence, c),
        Sub::Hardy(c) => (Command::Hardy, c),
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Infsup(c) => (Command::Infsup, c),
    };
    let cfg = match resolve(command, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if common.print_config {
        print!("{}", cfg.canonical_text());
        return ExitCode::SUCCESS;
    }
    if let Some(dir) = &cfg.out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    let start = std::time::Instant::now();
    let tables = match commands::run(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_solver_failure() { 3 } else { 1 });
        }
    };
    if let Err(e) = emit(&cfg, &tables) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    eprintln!("{} finished in {:.1?}", command.name(), start.elapsed());
    ExitCode::SUCCESS
}
