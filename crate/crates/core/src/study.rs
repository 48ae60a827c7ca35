//! End-to-end solves of the manufactured cases and mesh-refinement ladders.

use crate::assembly::{assemble, assemble_load, error_norms, AssemblyError, ErrorNorms, QuadratureOptions};
use crate::linalg::{solve_indefinite, SolveError, SolverOptions};
use crate::mesh::{Mesh, MeshError};
use crate::solutions::ManufacturedCase;
use crate::space::{apply_constraints, DofLayout, ReducedSystem, SpaceError};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("solve failed on n = {n}: {source}")]
    Solve { n: usize, source: SolveError },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub quadrature: QuadratureOptions,
    pub solver: SolverOptions,
    /// Pin the pressure to zero at the domain corners (the method as
    /// defined). Turning it off is only a diagnostic.
    pub pin_corners: bool,
    /// Keep the reduced system in the returned solution.
    pub keep_system: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { quadrature: QuadratureOptions::default(), solver: SolverOptions::default(), pin_corners: true, keep_system: false }
    }
}

#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub layout: DofLayout,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub norms: ErrorNorms,
    /// Relative residual of the reduced saddle system.
    pub residual: f64,
    /// Relative symmetry defect of the assembled full matrix.
    pub symmetry_defect: f64,
    /// Unknowns after constraint elimination.
    pub reduced_dim: usize,
    pub reduced: Option<ReducedSystem>,
}

/// Assembles, constrains and solves `case` on `mesh`, then measures the
/// errors. Boundary data are interpolated only for inhomogeneous cases; the
/// zero-mean multiplier is used only when the exact pressure has zero mean.
pub fn solve_case(mesh: &Mesh, case: &ManufacturedCase, opts: &SolveOptions) -> Result<CaseSolution, StudyError> {
    let mut layout = DofLayout::new(mesh);
    if !opts.pin_corners {
        layout = layout.with_free_corners();
    }
    let mut system = assemble(mesh, &layout, case.iota(), case.lambda(), case.mu(), &opts.quadrature)?;
    system.load = assemble_load(mesh, &layout, case, &opts.quadrature)?;
    let symmetry_defect = system.full_matrix().symmetry_defect();
    let boundary = (!case.is_homogeneous()).then_some(|x| case.value(x));
    let reduced = apply_constraints(&layout, mesh, &system, boundary, case.has_zero_mean_pressure());
    let n = (mesh.num_triangles() as f64 / 2.0).sqrt().round() as usize;
    let solved = solve_indefinite(&reduced.matrix, &reduced.rhs, &opts.solver).map_err(|source| StudyError::Solve { n, source })?;
    let (velocity, pressure) = reduced.expand(&solved.x)?;
    let norms = error_norms(mesh, &layout, &velocity, &pressure, case, &opts.quadrature)?;
    Ok(CaseSolution {
        layout,
        velocity,
        pressure,
        norms,
        residual: solved.relative_residual,
        symmetry_defect,
        reduced_dim: reduced.dim(),
        reduced: opts.keep_system.then_some(reduced),
    })
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub n: usize,
    pub h: f64,
    pub norms: ErrorNorms,
    pub residual: f64,
    pub symmetry_defect: f64,
    pub reduced_dim: usize,
}

impl LadderEntry {
    pub fn relative_energy(&self) -> f64 {
        self.norms.relative_energy()
    }
}

/// Mesh family of a ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshFamily {
    pub perturb: f64,
    pub seed: u64,
}

impl Default for MeshFamily {
    fn default() -> Self {
        Self { perturb: 0.0, seed: 0 }
    }
}

/// Solves `case` on the structured squares with `n` in `levels`. Solves run
/// concurrently; the result keeps the order of `levels`.
pub fn convergence_ladder(case: &ManufacturedCase, levels: &[usize], family: MeshFamily, opts: &SolveOptions) -> Result<Vec<LadderEntry>, StudyError> {
    use rayon::prelude::*;
    levels
        .par_iter()
        .map(|&n| {
            let mesh = Mesh::structured_square(n, family.perturb, family.seed)?;
            let s = solve_case(&mesh, case, opts)?;
            Ok(LadderEntry {
                n,
                h: mesh.h(),
                norms: s.norms,
                residual: s.residual,
                symmetry_defect: s.symmetry_defect,
                reduced_dim: s.reduced_dim,
            })
        })
        .collect()
}

/// `log₂(e_{k−1}/e_k)` for successive entries; one shorter than `errors`.
pub fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_of_geometric_sequence() {
        let r = rates(&[1.0, 0.25, 0.0625]);
        assert_eq!(r, vec![2.0, 2.0]);
        assert!(rates(&[1.0]).is_empty());
    }
}
