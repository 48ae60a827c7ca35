//! Bilinear forms, loads, broken error norms and the inf-sup probe.
//!
//! * `a(v, w) = 2μ[(ε(v), ε(w)) + ι²(∇ₕε(v), ∇ₕε(w))]`
//! * `b(v, q) = (div v, q) + ι²(∇ₕ div v, ∇q)`
//! * `c(p, q) = (p, q) + ι²(∇p, ∇q)`
//!
//! The saddle matrix is `[A Bᵀ; B −λ⁻¹C]` over the full (unconstrained)
//! velocity and pressure numbering of [`DofLayout`].

use rayon::prelude::*;

use crate::element::{ElementError, Geometry, LocalBasis, MonomialTable, NDOF};
use crate::linalg::{self, symmetric_block, CsrMatrix, DenseCholesky, EigenOptions, SparseCholesky};
use crate::mesh::Mesh;
use crate::quadrature::{QuadratureError, RuleSet, TriangleRule};
use crate::solutions::{ManufacturedCase, SolutionError};
use crate::space::DofLayout;

/// Elements per parallel work unit; fixed so that the merge order, and
/// hence every assembled value, does not depend on the thread count.
const CHUNK: usize = 128;

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error("length scale ι = {0} outside (0, 1]")]
    InvalidIota(f64),
    #[error("quadrature degree {got} below the {needed} needed for exact stiffness integration")]
    DegreeShortfall { got: usize, needed: usize },
    #[error(transparent)]
    Solve(#[from] linalg::SolveError),
    #[error(transparent)]
    Eigen(#[from] linalg::EigenError),
}

/// Quadrature choices for assembly and error evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub matrix_degree: usize,
    pub load_degree: usize,
    pub edge_degree: usize,
    pub norm_degree: usize,
    /// Geometric levels toward a singular point of the exact solution.
    pub singular_levels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { matrix_degree: 12, load_degree: 14, edge_degree: 10, norm_degree: 14, singular_levels: 24 }
    }
}

/// Gradients of the velocity basis reach degree 4, so `∇φ·∇ψ` needs 8.
const MIN_MATRIX_DEGREE: usize = 8;

#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: CsrMatrix,
    /// Length `velocity_count + pressure_count`; the pressure part is zero.
    pub load: Vec<f64>,
    pub iota: f64,
    pub lambda: f64,
    pub mu: f64,
    /// `∫ qᵢ` for each P1 hat function.
    pub pressure_mean_weights: Vec<f64>,
}

impl SaddleSystem {
    pub fn velocity_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn pressure_count(&self) -> usize {
        self.c.nrows()
    }

    /// `[A Bᵀ; B −λ⁻¹C]`
    pub fn full_matrix(&self) -> CsrMatrix {
        symmetric_block(&self.a, &self.b, &self.c.scaled(-1.0 / self.lambda))
    }
}

/// Values, gradients and Hessians of the scalar basis at one point, with
/// the quadrature weight already scaled to the physical element.
struct PointData {
    w: f64,
    grad: [[f64; 2]; NDOF],
    /// full symmetric 2×2
    hess: [[[f64; 2]; 2]; NDOF],
    lambda: [f64; 3],
}

fn point_data(basis: &LocalBasis, table: &MonomialTable, rule: &TriangleRule) -> Vec<PointData> {
    let area = basis.geometry().area;
    rule.iter()
        .enumerate()
        .map(|(q, (l, w))| {
            let e = basis.eval_table(table, q);
            PointData {
                w: 2.0 * area * w,
                grad: e.grad,
                hess: e.hess.map(|h| [[h[0], h[1]], [h[1], h[2]]]),
                lambda: *l,
            }
        })
        .collect()
}

type ElementBlocks = ([[f64; 2 * NDOF]; 2 * NDOF], [[f64; 2 * NDOF]; 3], [[f64; 3]; 3]);

fn element_blocks(pts: &[PointData], grad_lambda: &[[f64; 2]; 3], iota: f64, mu: f64) -> ElementBlocks {
    let i2 = iota * iota;
    let mut ka = [[0.0; 2 * NDOF]; 2 * NDOF];
    let mut kb = [[0.0; 2 * NDOF]; 3];
    let mut kc = [[0.0; 3]; 3];
    for p in pts {
        for j in 0..NDOF {
            let (gj, hj) = (p.grad[j], p.hess[j]);
            for k in j..NDOF {
                let (gk, hk) = (p.grad[k], p.hess[k]);
                let gg = gj[0] * gk[0] + gj[1] * gk[1];
                let hh = hj[0][0] * hk[0][0] + 2.0 * hj[0][1] * hk[0][1] + hj[1][1] * hk[1][1];
                for c in 0..2 {
                    for d in 0..2 {
                        // (H_j H_k)[d][c]
                        let hjhk = hj[d][0] * hk[0][c] + hj[d][1] * hk[1][c];
                        let mut v = gj[d] * gk[c] + i2 * hjhk;
                        if c == d {
                            v += gg + i2 * hh;
                        }
                        ka[2 * j + c][2 * k + d] += p.w * mu * v;
                    }
                }
            }
        }
        for i in 0..3 {
            let gl = grad_lambda[i];
            for j in 0..NDOF {
                for c in 0..2 {
                    let h = p.hess[j][c];
                    kb[i][2 * j + c] += p.w * (p.lambda[i] * p.grad[j][c] + i2 * (h[0] * gl[0] + h[1] * gl[1]));
                }
            }
            for k in 0..3 {
                let gk = grad_lambda[k];
                kc[i][k] += p.w * (p.lambda[i] * p.lambda[k] + i2 * (gl[0] * gk[0] + gl[1] * gk[1]));
            }
        }
    }
    // mirror the upper scalar blocks
    for j in 0..NDOF {
        for k in 0..j {
            for c in 0..2 {
                for d in 0..2 {
                    ka[2 * j + c][2 * k + d] = ka[2 * k + d][2 * j + c];
                }
            }
        }
    }
    (ka, kb, kc)
}

/// Assembles `A`, `B`, `C` (no load). `ι ∈ (0, 1]`.
pub fn assemble(mesh: &Mesh, layout: &DofLayout, iota: f64, lambda: f64, mu: f64, quad: &QuadratureOptions) -> Result<SaddleSystem, AssemblyError> {
    if !(iota > 0.0 && iota <= 1.0) {
        return Err(AssemblyError::InvalidIota(iota));
    }
    assemble_unchecked(mesh, layout, iota, lambda, mu, quad)
}

fn assemble_unchecked(mesh: &Mesh, layout: &DofLayout, iota: f64, lambda: f64, mu: f64, quad: &QuadratureOptions) -> Result<SaddleSystem, AssemblyError> {
    if quad.matrix_degree < MIN_MATRIX_DEGREE {
        return Err(AssemblyError::DegreeShortfall { got: quad.matrix_degree, needed: MIN_MATRIX_DEGREE });
    }
    let rule = TriangleRule::new(quad.matrix_degree)?;
    let table = MonomialTable::new(rule.points());
    let nt = mesh.num_triangles();
    let chunks: Vec<Result<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>), ElementError>> = (0..nt)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ts| {
            let mut ta = Vec::with_capacity(ts.len() * 4 * NDOF * NDOF);
            let mut tb = Vec::with_capacity(ts.len() * 6 * NDOF);
            let mut tc = Vec::with_capacity(ts.len() * 9);
            for &t in ts {
                let geom = Geometry::new(mesh.triangle_points(t))?;
                let basis = LocalBasis::new(&geom)?;
                let pts = point_data(&basis, &table, &rule);
                let (ka, kb, kc) = element_blocks(&pts, &geom.grad_lambda, iota, mu);
                let (map, sg) = layout.element_dofs(t);
                let tri = mesh.triangle(t);
                let gidx = |l: usize| (DofLayout::vector_index(map[l / 2], l % 2), sg[l / 2]);
                for r in 0..2 * NDOF {
                    let (gr, sr) = gidx(r);
                    for c in 0..2 * NDOF {
                        let (gc, sc) = gidx(c);
                        ta.push((gr, gc, sr * sc * ka[r][c]));
                    }
                }
                for i in 0..3 {
                    for c in 0..2 * NDOF {
                        let (gc, sc) = gidx(c);
                        tb.push((tri[i], gc, sc * kb[i][c]));
                    }
                    for k in 0..3 {
                        tc.push((tri[i], tri[k], kc[i][k]));
                    }
                }
            }
            Ok((ta, tb, tc))
        })
        .collect();
    let (mut ea, mut eb, mut ec) = (Vec::new(), Vec::new(), Vec::new());
    for ch in chunks {
        let (a, b, c) = ch?;
        ea.extend(a);
        eb.extend(b);
        ec.extend(c);
    }
    let (nu, np) = (layout.velocity_count(), layout.pressure_count());
    let mut weights = vec![0.0; np];
    for t in 0..nt {
        let third = mesh.area(t) / 3.0;
        for v in mesh.triangle(t) {
            weights[v] += third;
        }
    }
    Ok(SaddleSystem {
        a: CsrMatrix::from_triplets(nu, nu, ea),
        b: CsrMatrix::from_triplets(np, nu, eb),
        c: CsrMatrix::from_triplets(np, np, ec),
        load: vec![0.0; nu + np],
        iota,
        lambda,
        mu,
        pressure_mean_weights: weights,
    })
}

/// Rules used for loads and norms of `case`, refined toward its singular
/// point if it has one.
pub fn case_rules(case: &ManufacturedCase, triangle_degree: usize, quad: &QuadratureOptions) -> Result<RuleSet, AssemblyError> {
    let rs = RuleSet::new(triangle_degree, quad.edge_degree)?;
    Ok(match case.singular_point() {
        Some(p) => rs.with_singular_point(p, quad.singular_levels),
        None => rs,
    })
}

/// `Fᵢ = ∫ f·vᵢ + ι² ∫_{∂Ω} g·∂ₙvᵢ`, the boundary term only for cases
/// with inhomogeneous natural data. Returns a vector of length
/// `velocity_count + pressure_count`.
pub fn assemble_load(mesh: &Mesh, layout: &DofLayout, case: &ManufacturedCase, quad: &QuadratureOptions) -> Result<Vec<f64>, AssemblyError> {
    let rules = case_rules(case, quad.load_degree, quad)?;
    let base_table = MonomialTable::new(rules.triangle().points());
    let i2 = case.iota() * case.iota();
    let nt = mesh.num_triangles();
    let parts: Vec<Result<Vec<(usize, f64)>, AssemblyError>> = (0..nt)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ts| {
            let mut out = Vec::with_capacity(ts.len() * 2 * NDOF);
            for &t in ts {
                let geom = Geometry::new(mesh.triangle_points(t))?;
                let basis = LocalBasis::new(&geom)?;
                let rule = rules.triangle_for(&geom.vertices);
                let own_table;
                let table = if std::ptr::eq(rule, rules.triangle()) {
                    &base_table
                } else {
                    own_table = MonomialTable::new(rule.points());
                    &own_table
                };
                let mut local = [[0.0; 2]; NDOF];
                for (q, (l, w)) in rule.iter().enumerate() {
                    let f = case.load(geom.to_cartesian(*l))?;
                    let e = basis.eval_table(table, q);
                    let ww = 2.0 * geom.area * w;
                    for j in 0..NDOF {
                        local[j][0] += ww * f[0] * e.value[j];
                        local[j][1] += ww * f[1] * e.value[j];
                    }
                }
                if !case.is_homogeneous() && i2 > 0.0 {
                    for (i, &e) in mesh.triangle_edges(t).iter().enumerate() {
                        if !mesh.is_boundary_edge(e) {
                            continue;
                        }
                        let v = &geom.vertices;
                        let (p0, p1) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                        let n = geom.normal[i];
                        let len = geom.edge_length[i];
                        for (s, w) in rules.edge_for(p0, p1).iter() {
                            let x = [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
                            let g = case.boundary_traction(x, n)?;
                            let ev = basis.eval(geom.edge_point(i, s));
                            for j in 0..NDOF {
                                let dn = ev.grad[j][0] * n[0] + ev.grad[j][1] * n[1];
                                local[j][0] += i2 * w * len * g[0] * dn;
                                local[j][1] += i2 * w * len * g[1] * dn;
                            }
                        }
                    }
                }
                let (map, sg) = layout.element_dofs(t);
                for j in 0..NDOF {
                    for c in 0..2 {
                        out.push((DofLayout::vector_index(map[j], c), sg[j] * local[j][c]));
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut load = vec![0.0; layout.velocity_count() + layout.pressure_count()];
    for part in parts {
        for (k, v) in part? {
            load[k] += v;
        }
    }
    Ok(load)
}

/// Broken norms of the discretization error and of the exact solution.
/// All values are plain L² norms; `ι` enters only in the combined norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub iota: f64,
    /// `‖∇(u − u_h)‖`
    pub grad: f64,
    /// `‖∇ₕ²(u − u_h)‖`
    pub hess: f64,
    /// `‖p − p_h‖`
    pub pressure: f64,
    /// `‖∇(p − p_h)‖`
    pub pressure_grad: f64,
    pub exact_grad: f64,
    pub exact_hess: f64,
    pub exact_pressure: f64,
    pub exact_pressure_grad: f64,
}

impl ErrorNorms {
    /// `‖∇(u − u_h)‖_{ι,h} = ‖∇(u − u_h)‖ + ι‖∇ₕ²(u − u_h)‖`
    pub fn energy(&self) -> f64 {
        self.grad + self.iota * self.hess
    }

    /// `‖∇u‖_ι`
    pub fn exact_energy(&self) -> f64 {
        self.exact_grad + self.iota * self.exact_hess
    }

    pub fn relative_energy(&self) -> f64 {
        self.energy() / self.exact_energy()
    }

    /// `‖p − p_h‖_ι`
    pub fn pressure_iota(&self) -> f64 {
        self.pressure + self.iota * self.pressure_grad
    }

    /// Relative to `‖p‖_ι`; `NaN` when the exact pressure vanishes.
    pub fn relative_pressure(&self) -> f64 {
        let d = self.exact_pressure + self.iota * self.exact_pressure_grad;
        if d > 0.0 {
            self.pressure_iota() / d
        } else {
            f64::NAN
        }
    }
}

/// Errors of `(u_h, p_h)` against the exact fields of `case` (for the layer
/// case, against `u₀`), with degree `quad.norm_degree` quadrature.
pub fn error_norms(mesh: &Mesh, layout: &DofLayout, velocity: &[f64], pressure: &[f64], case: &ManufacturedCase, quad: &QuadratureOptions) -> Result<ErrorNorms, AssemblyError> {
    let rules = case_rules(case, quad.norm_degree, quad)?;
    let base_table = MonomialTable::new(rules.triangle().points());
    let nt = mesh.num_triangles();
    let parts: Vec<Result<[f64; 8], AssemblyError>> = (0..nt)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ts| {
            let mut acc = [0.0; 8];
            for &t in ts {
                let geom = Geometry::new(mesh.triangle_points(t))?;
                let basis = LocalBasis::new(&geom)?;
                let rule = rules.triangle_for(&geom.vertices);
                let own_table;
                let table = if std::ptr::eq(rule, rules.triangle()) {
                    &base_table
                } else {
                    own_table = MonomialTable::new(rule.points());
                    &own_table
                };
                let coef = [layout.local_coefficients(t, velocity, 0), layout.local_coefficients(t, velocity, 1)];
                let tri = mesh.triangle(t);
                let pv = [pressure[tri[0]], pressure[tri[1]], pressure[tri[2]]];
                let gp = [0, 1].map(|k| (0..3).map(|i| pv[i] * geom.grad_lambda[i][k]).sum::<f64>());
                for (q, (l, w)) in rule.iter().enumerate() {
                    let x = geom.to_cartesian(*l);
                    let ex = case.derivatives(x);
                    let e = basis.eval_table(table, q);
                    let ww = 2.0 * geom.area * w;
                    for c in 0..2 {
                        let mut g = [0.0; 2];
                        let mut h = [0.0; 3];
                        for j in 0..NDOF {
                            g[0] += coef[c][j] * e.grad[j][0];
                            g[1] += coef[c][j] * e.grad[j][1];
                            for m in 0..3 {
                                h[m] += coef[c][j] * e.hess[j][m];
                            }
                        }
                        let dg = [ex.grad[c][0] - g[0], ex.grad[c][1] - g[1]];
                        let dh = [ex.hess[c][0] - h[0], ex.hess[c][1] - h[1], ex.hess[c][2] - h[2]];
                        acc[0] += ww * (dg[0] * dg[0] + dg[1] * dg[1]);
                        acc[1] += ww * (dh[0] * dh[0] + 2.0 * dh[1] * dh[1] + dh[2] * dh[2]);
                        acc[4] += ww * (ex.grad[c][0].powi(2) + ex.grad[c][1].powi(2));
                        acc[5] += ww * (ex.hess[c][0].powi(2) + 2.0 * ex.hess[c][1].powi(2) + ex.hess[c][2].powi(2));
                    }
                    let lam = case.lambda();
                    let p = lam * (ex.grad[0][0] + ex.grad[1][1]);
                    let dp = [lam * (ex.hess[0][0] + ex.hess[1][1]), lam * (ex.hess[0][1] + ex.hess[1][2])];
                    let ph: f64 = (0..3).map(|i| pv[i] * l[i]).sum();
                    acc[2] += ww * (p - ph).powi(2);
                    acc[3] += ww * ((dp[0] - gp[0]).powi(2) + (dp[1] - gp[1]).powi(2));
                    acc[6] += ww * p * p;
                    acc[7] += ww * (dp[0] * dp[0] + dp[1] * dp[1]);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut s = [0.0; 8];
    for part in parts {
        for (a, b) in s.iter_mut().zip(part?) {
            *a += b;
        }
    }
    let r = s.map(f64::sqrt);
    Ok(ErrorNorms {
        iota: case.iota(),
        grad: r[0],
        hess: r[1],
        pressure: r[2],
        pressure_grad: r[3],
        exact_grad: r[4],
        exact_hess: r[5],
        exact_pressure: r[6],
        exact_pressure_grad: r[7],
    })
}

/// Velocity Gram matrix of `(∇v, ∇w) + ι²(∇ₕ²v, ∇ₕ²w)` (full numbering).
pub fn velocity_gram(mesh: &Mesh, layout: &DofLayout, iota: f64, quad: &QuadratureOptions) -> Result<CsrMatrix, AssemblyError> {
    let rule = TriangleRule::new(quad.matrix_degree)?;
    let table = MonomialTable::new(rule.points());
    let i2 = iota * iota;
    let parts: Vec<Result<Vec<(usize, usize, f64)>, ElementError>> = (0..mesh.num_triangles())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ts| {
            let mut out = Vec::with_capacity(ts.len() * 2 * NDOF * NDOF);
            for &t in ts {
                let geom = Geometry::new(mesh.triangle_points(t))?;
                let basis = LocalBasis::new(&geom)?;
                let pts = point_data(&basis, &table, &rule);
                let mut k = [[0.0; NDOF]; NDOF];
                for p in &pts {
                    for i in 0..NDOF {
                        for j in 0..NDOF {
                            let (gi, gj, hi, hj) = (p.grad[i], p.grad[j], p.hess[i], p.hess[j]);
                            let hh = hi[0][0] * hj[0][0] + 2.0 * hi[0][1] * hj[0][1] + hi[1][1] * hj[1][1];
                            k[i][j] += p.w * (gi[0] * gj[0] + gi[1] * gj[1] + i2 * hh);
                        }
                    }
                }
                let (map, sg) = layout.element_dofs(t);
                for i in 0..NDOF {
                    for j in 0..NDOF {
                        for c in 0..2 {
                            out.push((DofLayout::vector_index(map[i], c), DofLayout::vector_index(map[j], c), sg[i] * sg[j] * k[i][j]));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut entries = Vec::new();
    for p in parts {
        entries.extend(p?);
    }
    let n = layout.velocity_count();
    Ok(CsrMatrix::from_triplets(n, n, entries))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupEstimate {
    pub beta: f64,
    pub iterations: usize,
    /// `false` if the iteration cap was hit; `beta` is then the last estimate.
    pub converged: bool,
}

/// Discrete inf-sup constant
/// `min_q max_v b(v, q) / (‖∇v‖_{ι,h} ‖q‖_ι)` over free velocity DoFs and
/// corner-pinned, zero-mean pressures, using the Hilbert forms
/// `‖∇v‖² + ι²‖∇ₕ²v‖²` and `‖q‖² + ι²‖∇q‖²`. Computed as `√θ_min` of
/// `B X⁻¹ Bᵀ q = θ M q` by inverse iteration on a dense Schur complement,
/// so intended for small meshes.
pub fn estimate_infsup(mesh: &Mesh, layout: &DofLayout, iota: f64, quad: &QuadratureOptions, eig: &EigenOptions) -> Result<InfSupEstimate, AssemblyError> {
    if !(iota > 0.0 && iota <= 1.0) {
        return Err(AssemblyError::InvalidIota(iota));
    }
    let sys = assemble_unchecked(mesh, layout, iota, 1.0, 1.0, quad)?;
    let x = velocity_gram(mesh, layout, iota, quad)?;
    let mut fixed_u = vec![false; layout.velocity_count()];
    layout.fixed_velocity().iter().for_each(|&k| fixed_u[k] = true);
    let free_u: Vec<usize> = (0..layout.velocity_count()).filter(|&i| !fixed_u[i]).collect();
    let mut fixed_p = vec![false; layout.pressure_count()];
    layout.fixed_pressure().iter().for_each(|&k| fixed_p[k] = true);
    let free_p: Vec<usize> = (0..layout.pressure_count()).filter(|&i| !fixed_p[i]).collect();

    let xf = x.select(&free_u, &free_u);
    let bf = sys.b.select(&free_p, &free_u);
    let mf = sys.c.select(&free_p, &free_p).to_dense();
    let chol = SparseCholesky::factor(&xf)?;
    let np = free_p.len();
    // S = B X⁻¹ Bᵀ, one X-solve per pressure DoF
    let bt = bf.transpose();
    let cols: Vec<Vec<f64>> = (0..np)
        .into_par_iter()
        .map(|k| {
            let mut e = vec![0.0; np];
            e[k] = 1.0;
            let rhs = bt.mul_vec(&e);
            bf.mul_vec(&chol.solve(&rhs))
        })
        .collect();
    let mut s = vec![vec![0.0; np]; np];
    for (k, col) in cols.iter().enumerate() {
        for i in 0..np {
            s[i][k] = col[i];
        }
    }
    for i in 0..np {
        for k in 0..i {
            let avg = 0.5 * (s[i][k] + s[k][i]);
            s[i][k] = avg;
            s[k][i] = avg;
        }
    }
    // zero mean: restrict both forms to the complement of the weight vector
    let w: Vec<f64> = free_p.iter().map(|&i| sys.pressure_mean_weights[i]).collect();
    let s_red = linalg::restrict_to_complement(&s, &w);
    let m_red = linalg::restrict_to_complement(&mf, &w);
    let sc = DenseCholesky::factor(&s_red).map_err(|_| linalg::SolveError::Singular { near_null: Vec::new() })?;
    let mv = |v: &[f64]| -> Vec<f64> { m_red.iter().map(|r| linalg::dot(r, v)).collect() };
    match linalg::inverse_power_smallest(np - 1, |b| sc.solve(b), mv, eig) {
        Ok(e) => Ok(InfSupEstimate { beta: e.value.sqrt(), iterations: e.iterations, converged: true }),
        Err(linalg::EigenError::NotConverged { iterations, estimate, .. }) => {
            Ok(InfSupEstimate { beta: estimate.max(0.0).sqrt(), iterations, converged: false })
        }
        Err(e) => Err(e.into()),
    }
}
