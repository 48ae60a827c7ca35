//! Global numbering for the velocity space `V_h = [X_h⁰]²` and the pressure
//! space `P_h`, plus constraint elimination.
//!
//! Scalar velocity DoFs: vertex `v ↦ v`, midpoint of edge `e ↦ V + e`,
//! normal moment of `e ↦ V + E + e` (with respect to the global edge normal
//! of [`Mesh::edge_normal`]), cell mean of `t ↦ V + 2E + t`. Vector DoFs are
//! interleaved: `2·s + component`. Pressure DoFs are the mesh vertices.

use crate::assembly::SaddleSystem;
use crate::element::{dof_functionals, Geometry, NDOF};
use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Point};
use crate::quadrature::RuleSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("shared DoF {dof} received inconsistent values {first:e} and {second:e}")]
    Inconsistent { dof: usize, first: f64, second: f64 },
    #[error(transparent)]
    Element(#[from] crate::element::ElementError),
    #[error("solution vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    nv: usize,
    ne: usize,
    nt: usize,
    local_to_global: Vec<[usize; NDOF]>,
    signs: Vec<[f64; NDOF]>,
    fixed_velocity: Vec<usize>,
    fixed_pressure: Vec<usize>,
}

impl DofLayout {
    pub fn new(mesh: &Mesh) -> Self {
        let (nv, ne, nt) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_triangles());
        let mut local_to_global = Vec::with_capacity(nt);
        let mut signs = Vec::with_capacity(nt);
        for t in 0..nt {
            let tri = mesh.triangle(t);
            let edges = mesh.triangle_edges(t);
            let es = mesh.triangle_edge_signs(t);
            let mut map = [0usize; NDOF];
            let mut sg = [1.0; NDOF];
            for i in 0..3 {
                map[i] = tri[i];
                map[3 + i] = nv + edges[i];
                map[6 + i] = nv + ne + edges[i];
                sg[6 + i] = es[i];
            }
            map[9] = nv + 2 * ne + t;
            local_to_global.push(map);
            signs.push(sg);
        }
        let mut fixed_scalar: Vec<usize> = (0..nv).filter(|&v| mesh.is_boundary_vertex(v)).collect();
        fixed_scalar.extend((0..ne).filter(|&e| mesh.is_boundary_edge(e)).map(|e| nv + e));
        let mut fixed_velocity: Vec<usize> = fixed_scalar.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
        fixed_velocity.sort_unstable();
        let mut fixed_pressure = mesh.corners().to_vec();
        fixed_pressure.sort_unstable();
        Self { nv, ne, nt, local_to_global, signs, fixed_velocity, fixed_pressure }
    }

    /// `N_s = V + 2E + T`
    pub fn scalar_count(&self) -> usize {
        self.nv + 2 * self.ne + self.nt
    }

    pub fn velocity_count(&self) -> usize {
        2 * self.scalar_count()
    }

    pub fn pressure_count(&self) -> usize {
        self.nv
    }

    pub fn vector_index(scalar: usize, component: usize) -> usize {
        2 * scalar + component
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    pub fn midpoint_dof(&self, e: usize) -> usize {
        self.nv + e
    }

    pub fn moment_dof(&self, e: usize) -> usize {
        self.nv + self.ne + e
    }

    pub fn mean_dof(&self, t: usize) -> usize {
        self.nv + 2 * self.ne + t
    }

    /// Same layout with the corner pressure values left free. A diagnostic
    /// for solutions whose pressure does not vanish at the corners.
    pub fn with_free_corners(mut self) -> Self {
        self.fixed_pressure.clear();
        self
    }

    /// Scalar global indices and signs of the ten local DoFs of triangle `t`.
    pub fn element_dofs(&self, t: usize) -> (&[usize; NDOF], &[f64; NDOF]) {
        (&self.local_to_global[t], &self.signs[t])
    }

    /// Fixed vector velocity indices: boundary vertex and midpoint values.
    pub fn fixed_velocity(&self) -> &[usize] {
        &self.fixed_velocity
    }

    /// Fixed pressure indices: the domain corners.
    pub fn fixed_pressure(&self) -> &[usize] {
        &self.fixed_pressure
    }

    /// Local coefficients of component `c` on triangle `t` from a global
    /// velocity vector.
    pub fn local_coefficients(&self, t: usize, velocity: &[f64], c: usize) -> [f64; NDOF] {
        let (map, sg) = self.element_dofs(t);
        std::array::from_fn(|i| sg[i] * velocity[Self::vector_index(map[i], c)])
    }
}

/// A vector field with its Jacobian, `grad[c][k] = ∂ₖ u_c`.
pub type VectorSample = ([f64; 2], [[f64; 2]; 2]);

/// Global interpolant `Π_h` of a vector field; shared DoFs computed from
/// both sides must agree within `1e-9` (relative to their size).
pub fn interpolate_global<F>(layout: &DofLayout, mesh: &Mesh, field: F, rules: &RuleSet) -> Result<Vec<f64>, SpaceError>
where
    F: Fn(Point) -> VectorSample,
{
    let n = layout.velocity_count();
    let mut out = vec![0.0; n];
    let mut set = vec![false; n];
    for t in 0..mesh.num_triangles() {
        let geom = Geometry::new(mesh.triangle_points(t))?;
        let (map, sg) = layout.element_dofs(t);
        for c in 0..2 {
            let local = dof_functionals(&geom, |p| {
                let (v, g) = field(p);
                (v[c], g[c])
            }, rules);
            for i in 0..NDOF {
                let k = DofLayout::vector_index(map[i], c);
                let value = sg[i] * local[i];
                if set[k] {
                    if (out[k] - value).abs() > 1e-9 * (1.0 + value.abs()) {
                        return Err(SpaceError::Inconsistent { dof: k, first: out[k], second: value });
                    }
                } else {
                    out[k] = value;
                    set[k] = true;
                }
            }
        }
    }
    Ok(out)
}

/// P1 nodal interpolant of a scalar field.
pub fn interpolate_pressure<F: Fn(Point) -> f64>(mesh: &Mesh, field: F) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| field(p)).collect()
}

/// Constraint-eliminated saddle system. Unknowns are the free velocity
/// DoFs, the free pressure DoFs and, optionally, one multiplier enforcing
/// `∫ q = 0`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free_velocity: Vec<usize>,
    pub free_pressure: Vec<usize>,
    pub mean_row: bool,
    /// Full-length velocity lifting holding the prescribed boundary values.
    pub velocity_lifting: Vec<f64>,
    n_velocity: usize,
    n_pressure: usize,
}

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full velocity and pressure vectors from a reduced solution.
    pub fn expand(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpaceError> {
        if x.len() != self.dim() {
            return Err(SpaceError::Length { got: x.len(), expected: self.dim() });
        }
        let mut u = self.velocity_lifting.clone();
        for (k, &i) in self.free_velocity.iter().enumerate() {
            u[i] = x[k];
        }
        let mut p = vec![0.0; self.n_pressure];
        let off = self.free_velocity.len();
        for (k, &i) in self.free_pressure.iter().enumerate() {
            p[i] = x[off + k];
        }
        debug_assert_eq!(u.len(), self.n_velocity);
        Ok((u, p))
    }

    /// Reduced vector from full velocity and pressure vectors (multiplier 0).
    pub fn restrict(&self, u: &[f64], p: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.free_velocity.iter().map(|&i| u[i]).collect();
        x.extend(self.free_pressure.iter().map(|&i| p[i]));
        if self.mean_row {
            x.push(0.0);
        }
        x
    }
}

/// Eliminates fixed velocity DoFs (set to `boundary` values at boundary
/// vertices and midpoints, or zero) and corner pressures (zero), and
/// optionally appends the zero-mean multiplier row.
pub fn apply_constraints<B>(layout: &DofLayout, mesh: &Mesh, system: &SaddleSystem, boundary: Option<B>, mean_row: bool) -> ReducedSystem
where
    B: Fn(Point) -> [f64; 2],
{
    let nu = layout.velocity_count();
    let np = layout.pressure_count();
    let mut lifting = vec![0.0; nu];
    if let Some(g) = boundary {
        for &k in layout.fixed_velocity() {
            let s = k / 2;
            let p = if s < mesh.num_vertices() { mesh.vertex(s) } else { mesh.edge_midpoint(s - mesh.num_vertices()) };
            lifting[k] = g(p)[k % 2];
        }
    }
    let mut fixed_u = vec![false; nu];
    layout.fixed_velocity().iter().for_each(|&k| fixed_u[k] = true);
    let mut fixed_p = vec![false; np];
    layout.fixed_pressure().iter().for_each(|&k| fixed_p[k] = true);
    let free_velocity: Vec<usize> = (0..nu).filter(|&i| !fixed_u[i]).collect();
    let free_pressure: Vec<usize> = (0..np).filter(|&i| !fixed_p[i]).collect();

    let full = system.full_matrix();
    let mut full_lift = lifting.clone();
    full_lift.resize(nu + np, 0.0);
    let correction = full.mul_vec(&full_lift);
    let mut rows: Vec<usize> = free_velocity.clone();
    rows.extend(free_pressure.iter().map(|&i| nu + i));
    let mut rhs: Vec<f64> = rows.iter().map(|&r| system.load[r] - correction[r]).collect();
    let sub = full.select(&rows, &rows);

    let matrix = if mean_row {
        let w = &system.pressure_mean_weights;
        let nf = rows.len();
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(sub.nnz() + 2 * free_pressure.len());
        entries.extend(sub.iter());
        for (k, &i) in free_pressure.iter().enumerate() {
            let col = free_velocity.len() + k;
            entries.push((nf, col, w[i]));
            entries.push((col, nf, w[i]));
        }
        rhs.push(0.0);
        CsrMatrix::from_triplets(nf + 1, nf + 1, entries)
    } else {
        sub
    };
    ReducedSystem { matrix, rhs, free_velocity, free_pressure, mean_row, velocity_lifting: lifting, n_velocity: nu, n_pressure: np }
}
