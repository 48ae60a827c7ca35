//! The four subcommands. Each returns its result tables; writing them out is
//! left to the caller.

use std::path::PathBuf;

use sgfem::assembly::estimate_infsup;
use sgfem::hardy::{self, RadialProfile};
use sgfem::mesh::Mesh;
use sgfem::solutions::ManufacturedCase;
use sgfem::space::DofLayout;
use sgfem::study::{convergence_ladder, rates, solve_case, MeshFamily, StudyError};

use crate::config::{Command, RunConfig};
use crate::output::{write_file, write_vtk, Style, Table};

/// Radial profile resolutions `2^k`.
pub const RADIAL_EXPONENTS: std::ops::RangeInclusive<u32> = 3..=10;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Solution(#[from] sgfem::solutions::SolutionError),
    #[error(transparent)]
    Mesh(#[from] sgfem::mesh::MeshError),
    #[error(transparent)]
    Assembly(#[from] sgfem::assembly::AssemblyError),
    #[error(transparent)]
    Hardy(#[from] hardy::HardyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Solver contract failures get their own exit code.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, RunError::Study(StudyError::Solve { .. }))
    }
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Table>, RunError> {
    match cfg.command {
        Command::Convergence => convergence(cfg),
        Command::Hardy => hardy_probes(cfg),
        Command::Solve => solve(cfg),
        Command::Infsup => infsup(cfg),
    }
}

fn family(cfg: &RunConfig) -> MeshFamily {
    MeshFamily { perturb: cfg.perturb, seed: cfg.seed }
}

fn convergence(cfg: &RunConfig) -> Result<Vec<Table>, RunError> {
    let mut t = Table::new(
        &format!("convergence_case{}", cfg.case),
        &[
            ("nu", Style::Plain),
            ("iota", Style::Plain),
            ("n", Style::Int),
            ("h", Style::Sci),
            ("rel_error", Style::Sci),
            ("rate", Style::Fixed2),
            ("grad_error", Style::Sci),
            ("hess_error", Style::Sci),
            ("p_error", Style::Sci),
            ("p_rate", Style::Fixed2),
            ("residual", Style::Sci),
            ("dofs", Style::Int),
        ],
    );
    let opts = cfg.solve_options();
    // Pairs run one after another; each ladder is parallel over levels.
    for &nu in &cfg.nu {
        for &iota in &cfg.iota {
            let case = ManufacturedCase::from_number(cfg.case, nu, iota)?;
            let ladder = convergence_ladder(&case, &cfg.levels, family(cfg), &opts)?;
            let e: Vec<f64> = ladder.iter().map(|l| l.relative_energy()).collect();
            let pe: Vec<f64> = ladder.iter().map(|l| l.norms.pressure_iota()).collect();
            let (r, pr) = (rates(&e), rates(&pe));
            for (k, l) in ladder.iter().enumerate() {
                let rate = k.checked_sub(1).map(|j| r[j]);
                let prate = k.checked_sub(1).map(|j| pr[j]);
                t.push(vec![
                    nu.into(),
                    iota.into(),
                    l.n.into(),
                    l.h.into(),
                    e[k].into(),
                    rate.into(),
                    l.norms.grad.into(),
                    l.norms.hess.into(),
                    pe[k].into(),
                    prate.into(),
                    l.residual.into(),
                    l.reduced_dim.into(),
                ]);
            }
        }
    }
    Ok(vec![t])
}

fn hardy_probes(cfg: &RunConfig) -> Result<Vec<Table>, RunError> {
    let ns: Vec<usize> = RADIAL_EXPONENTS.map(|k| 1usize << k).collect();
    let rows = hardy::radial_study(&ns, 2)?;
    let mut radial = Table::new(
        "hardy_radial",
        &[("n", Style::Int), ("h", Style::Sci), ("weighted", Style::Sci), ("gradient", Style::Sci), ("ratio", Style::Sci), ("ratio_over_log", Style::Sci)],
    );
    for r in &rows {
        radial.push(vec![r.n.into(), r.h.into(), r.norms.weighted.into(), r.norms.gradient.into(), r.norms.ratio().into(), r.normalized_ratio.into()]);
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let pick = |f: fn(&hardy::RadialRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let mut fit = Table::new("hardy_fit", &[("quantity", Style::Text), ("value", Style::Plain)]);
    fit.push(vec!["p_weighted".into(), hardy::fit_log_power(&hs, &pick(|r| r.norms.weighted)).into()]);
    fit.push(vec!["p_gradient".into(), hardy::fit_log_power(&hs, &pick(|r| r.norms.gradient)).into()]);
    fit.push(vec!["ratio_loglog_slope".into(), hardy::fit_log_exponent(&hs, &pick(|r| r.norms.ratio())).into()]);

    let eig = cfg.eigen_options();
    let mut seminorm = Table::new(
        "hardy_seminorm",
        &[("n", Style::Int), ("ratio", Style::Sci), ("ratio_over_log", Style::Sci), ("iterations", Style::Int), ("converged", Style::Text)],
    );
    let mut polar = Table::new(
        "hardy_polar",
        &[("rings", Style::Int), ("sectors", Style::Int), ("lhs", Style::Sci), ("gradient", Style::Sci), ("jump", Style::Sci), ("ratio", Style::Sci)],
    );
    for &n in &cfg.levels {
        let mesh = Mesh::structured_square(n, cfg.perturb, cfg.seed)?;
        let s = hardy::corner_seminorm_ratio(&mesh, &DofLayout::new(&mesh), &eig)?;
        seminorm.push(vec![n.into(), s.ratio.into(), (s.ratio / (n as f64).ln()).into(), s.iterations.into(), s.converged.into()]);

        let disk = Mesh::polar_disk(n, 4 * n)?;
        let profile = RadialProfile::new(n, 2)?;
        let c = hardy::nodal_coefficients(&disk, |x| profile.value(x[0].hypot(x[1])));
        let f = hardy::fe_hardy_ratio(&disk, &c)?;
        polar.push(vec![n.into(), (4 * n).into(), f.lhs.into(), f.gradient.into(), f.jump.into(), (f.lhs / (f.gradient + f.jump)).into()]);
    }
    Ok(vec![radial, fit, seminorm, polar])
}

fn solve(cfg: &RunConfig) -> Result<Vec<Table>, RunError> {
    let mut t = Table::new(
        &format!("solve_case{}", cfg.case),
        &[
            ("nu", Style::Plain),
            ("iota", Style::Plain),
            ("n", Style::Int),
            ("rel_error", Style::Sci),
            ("grad_error", Style::Sci),
            ("hess_error", Style::Sci),
            ("p_error", Style::Sci),
            ("residual", Style::Sci),
            ("symmetry_defect", Style::Sci),
            ("dofs", Style::Int),
        ],
    );
    let opts = cfg.solve_options();
    for &n in &cfg.levels {
        let mesh = Mesh::structured_square(n, cfg.perturb, cfg.seed)?;
        for &nu in &cfg.nu {
            for &iota in &cfg.iota {
                let case = ManufacturedCase::from_number(cfg.case, nu, iota)?;
                let s = solve_case(&mesh, &case, &opts)?;
                t.push(vec![
                    nu.into(),
                    iota.into(),
                    n.into(),
                    s.norms.relative_energy().into(),
                    s.norms.grad.into(),
                    s.norms.hess.into(),
                    s.norms.pressure_iota().into(),
                    s.residual.into(),
                    s.symmetry_defect.into(),
                    s.reduced_dim.into(),
                ]);
                if let Some(dir) = &cfg.out {
                    let stem = format!("solve_case{}_n{n}_nu{nu}_iota{iota}", cfg.case);
                    let path = dir.join(format!("{stem}.vtk"));
                    write_file(&path, |w| write_vtk(w, &mesh, &s.layout, &s.velocity, &s.pressure, Some(&case))).map_err(|source| RunError::Io { path, source })?;
                    if let Some(r) = &s.reduced {
                        let path = dir.join(format!("{stem}.mtx"));
                        write_file(&path, |w| r.matrix.write_matrix_market(w)).map_err(|source| RunError::Io { path, source })?;
                    }
                }
            }
        }
    }
    Ok(vec![t])
}

fn infsup(cfg: &RunConfig) -> Result<Vec<Table>, RunError> {
    let mut t = Table::new(
        "infsup",
        &[("iota", Style::Plain), ("n", Style::Int), ("beta", Style::Sci), ("iterations", Style::Int), ("converged", Style::Text)],
    );
    let quad = cfg.quadrature();
    let eig = cfg.eigen_options();
    for &iota in &cfg.iota {
        for &n in &cfg.levels {
            let mesh = Mesh::structured_square(n, cfg.perturb, cfg.seed)?;
            let mut layout = DofLayout::new(&mesh);
            if cfg.free_corners {
                layout = layout.with_free_corners();
            }
            let est = estimate_infsup(&mesh, &layout, iota, &quad, &eig)?;
            t.push(vec![iota.into(), n.into(), est.beta.into(), est.iterations.into(), est.converged.into()]);
        }
    }
    Ok(vec![t])
}
