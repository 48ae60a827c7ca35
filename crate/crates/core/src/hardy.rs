//! Probes of the broken Hardy inequality in the critical case `p = d`.
//!
//! * the radial profile `f₀` with slope `1/i` on `((i−1)h, ih)`, whose norms
//!   are integrated in closed form;
//! * the three terms of the finite element Hardy inequality for piecewise
//!   linear fields on polar disk meshes;
//! * the largest ratio `[q]_{H¹₊}/‖∇q‖` over the pressure space on the unit
//!   square, where `[q]²_{H¹₊} = Σ_a ∫ q²/|x − a|²` sums over the corners.
//!
//! Radial norms use the one-dimensional integrals `∫₀¹ ρ^{d−1}|·|^d dρ`;
//! the sphere measure is dropped since it cancels in every ratio.

use rayon::prelude::*;

use crate::element::{Geometry, P1Basis};
use crate::linalg::{self, restrict_to_complement, CsrMatrix, DenseCholesky, EigenError, EigenOptions};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{gauss_legendre_unit, QuadratureError, TriangleRule};
use crate::space::DofLayout;

#[derive(Debug, thiserror::Error)]
pub enum HardyError {
    #[error("radial profile needs n ≥ 1 and d ∈ {{1, 2}}, got n = {n}, d = {d}")]
    InvalidProfile { n: usize, d: u32 },
    #[error("field is {value:e} at the origin on triangle {triangle}; it must vanish there")]
    NonzeroOrigin { triangle: usize, value: f64 },
    #[error("expected {expected} element coefficient triples, got {got}")]
    Length { got: usize, expected: usize },
    #[error("mesh has no vertex at the origin")]
    NoOrigin,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Element(#[from] crate::element::ElementError),
    #[error(transparent)]
    Solve(#[from] linalg::SolveError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Piecewise linear `f₀` on `[0, 1]` with `f₀(0) = 0` and `f₀' = 1/i` on
/// `((i−1)h, ih)`, `h = 1/n`, seen as a radial function on the unit ball
/// of dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    n: usize,
    d: u32,
}

impl RadialProfile {
    pub fn new(n: usize, d: u32) -> Result<Self, HardyError> {
        if n == 0 || !(1..=2).contains(&d) {
            return Err(HardyError::InvalidProfile { n, d });
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `f₀(ih) = h Σ_{j≤i} 1/j`
    pub fn node_value(&self, i: usize) -> f64 {
        self.h() * (1..=i.min(self.n)).map(|j| 1.0 / j as f64).sum::<f64>()
    }

    pub fn value(&self, rho: f64) -> f64 {
        let rho = rho.clamp(0.0, 1.0);
        let h = self.h();
        let i = ((rho / h).ceil() as usize).clamp(1, self.n);
        self.node_value(i - 1) + (rho - (i - 1) as f64 * h) / i as f64
    }

    /// `f₀ = a + ρ/i` on interval `i`; returns `a`.
    fn offset(&self, i: usize, harmonic_before: f64) -> f64 {
        let h = self.h();
        h * harmonic_before - (i - 1) as f64 * h / i as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNorms {
    /// `‖f/ρ‖_{L^d}`
    pub weighted: f64,
    /// `‖∇f‖_{L^d}`
    pub gradient: f64,
}

impl RadialNorms {
    pub fn ratio(&self) -> f64 {
        self.weighted / self.gradient
    }
}

/// Exact norms, interval by interval.
pub fn radial_norms(profile: &RadialProfile) -> RadialNorms {
    let (n, h) = (profile.n, profile.h());
    let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
    let mut harmonic = 0.0;
    for i in 1..=n {
        let fi = i as f64;
        let a = profile.offset(i, harmonic);
        // ln(r1/r0), with a = 0 on the first interval
        let log_ratio = if i == 1 { 0.0 } else { (1.0 / (fi - 1.0)).ln_1p() };
        let (r0, r1) = ((fi - 1.0) * h, fi * h);
        match profile.d {
            1 => {
                lhs += a * log_ratio + h / fi;
                rhs += h / fi;
            }
            _ => {
                let sq = (r1 * r1 - r0 * r0) / (2.0 * fi * fi);
                lhs += a * a * log_ratio + 2.0 * a * h / fi + sq;
                rhs += sq;
            }
        }
        harmonic += 1.0 / fi;
    }
    let p = 1.0 / profile.d as f64;
    RadialNorms { weighted: lhs.powf(p), gradient: rhs.powf(p) }
}

/// Same norms by `points`-point Gauss–Legendre quadrature on each interval;
/// a cross-check of [`radial_norms`].
pub fn radial_norms_quadrature(profile: &RadialProfile, points: usize) -> RadialNorms {
    let rule = gauss_legendre_unit(points.max(2));
    let h = profile.h();
    let d = profile.d as i32;
    let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
    let mut harmonic = 0.0;
    for i in 1..=profile.n {
        let fi = i as f64;
        let a = profile.offset(i, harmonic);
        let r0 = (fi - 1.0) * h;
        for &(x, w) in &rule {
            let rho = r0 + x * h;
            let f = a + rho / fi;
            let ww = h * w;
            // f/ρ is bounded on the first interval (a = 0)
            let q = if i == 1 { 1.0 / fi } else { f / rho };
            lhs += ww * rho.powi(d - 1) * q.abs().powi(d);
            rhs += ww * rho.powi(d - 1) * (1.0 / fi).powi(d);
        }
        harmonic += 1.0 / fi;
    }
    let p = 1.0 / profile.d as f64;
    RadialNorms { weighted: lhs.powf(p), gradient: rhs.powf(p) }
}

/// Least-squares slope of `ln(values/h)` against `ln ln(1/h)`: the exponent
/// `p` in `value ≈ C h logᵖ(1/h)`.
pub fn fit_log_power(hs: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| (1.0 / h).ln().ln()).collect();
    let ys: Vec<f64> = hs.iter().zip(values).map(|(h, v)| (v / h).ln()).collect();
    slope(&xs, &ys)
}

/// Least-squares slope of `ln(values)` against `ln ln(1/h)`.
pub fn fit_log_exponent(hs: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| (1.0 / h).ln().ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    slope(&xs, &ys)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// One row of the radial study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialRow {
    pub n: usize,
    pub h: f64,
    pub norms: RadialNorms,
    /// `ratio / ln(1/h)`; `NaN` for `n = 1`.
    pub normalized_ratio: f64,
}

pub fn radial_study(ns: &[usize], d: u32) -> Result<Vec<RadialRow>, HardyError> {
    ns.iter()
        .map(|&n| {
            let p = RadialProfile::new(n, d)?;
            let norms = radial_norms(&p);
            let log = (n as f64).ln();
            let normalized_ratio = if n > 1 { norms.ratio() / log } else { f64::NAN };
            Ok(RadialRow { n, h: p.h(), norms, normalized_ratio })
        })
        .collect()
}

/// The three terms of the planar finite element Hardy inequality for a
/// piecewise linear, possibly discontinuous field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeHardyTerms {
    /// `‖f/ρ‖_{L²}`
    pub lhs: f64,
    /// `‖∇ₕf‖_{L²}`
    pub gradient: f64,
    /// `(Σ_F ‖⟦f⟧‖²_{L^∞(F)})^{1/2}` over interior edges
    pub jump: f64,
}

/// Quadrature levels toward the origin for `∫ f²/ρ²`.
const ORIGIN_LEVELS: usize = 24;

/// `coefficients[t]` holds the values of `f|_T` at the vertices of triangle
/// `t` (in the mesh's vertex order). `ρ` is the distance to the origin, which
/// must be a mesh vertex where every adjacent element value vanishes.
pub fn fe_hardy_ratio(mesh: &Mesh, coefficients: &[[f64; 3]]) -> Result<FeHardyTerms, HardyError> {
    if coefficients.len() != mesh.num_triangles() {
        return Err(HardyError::Length { got: coefficients.len(), expected: mesh.num_triangles() });
    }
    let origin = (0..mesh.num_vertices()).find(|&v| mesh.vertex(v) == [0.0, 0.0]).ok_or(HardyError::NoOrigin)?;
    let base = TriangleRule::new(14)?;
    let fan_base = TriangleRule::new(10)?;
    let fan_rules: Vec<TriangleRule> = (0..3).map(|c| fan_base.corner_refined(c, ORIGIN_LEVELS)).collect();
    let scale = coefficients.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let parts: Vec<Result<(f64, f64), HardyError>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let c = coefficients[t];
            let geom = Geometry::new(mesh.triangle_points(t))?;
            let corner = tri.iter().position(|&v| v == origin);
            if let Some(k) = corner {
                if c[k].abs() > 1e-14 * scale.max(f64::MIN_POSITIVE) {
                    return Err(HardyError::NonzeroOrigin { triangle: t, value: c[k] });
                }
            }
            let rule = corner.map_or(&base, |k| &fan_rules[k]);
            let mut lhs = 0.0;
            for (l, w) in rule.iter() {
                let x = geom.to_cartesian(*l);
                let f = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
                lhs += 2.0 * geom.area * w * f * f / (x[0] * x[0] + x[1] * x[1]);
            }
            let g = [0, 1].map(|k| (0..3).map(|i| c[i] * geom.grad_lambda[i][k]).sum::<f64>());
            Ok((lhs, geom.area * (g[0] * g[0] + g[1] * g[1])))
        })
        .collect();
    let (mut lhs, mut grad) = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        lhs += a;
        grad += b;
    }
    // ⟦f⟧ is linear along an edge, so its sup sits at an endpoint
    let mut jump = 0.0;
    for e in 0..mesh.num_edges() {
        let [Some(t1), Some(t2)] = mesh.edge_triangles(e) else { continue };
        let trace = |t: usize, v: usize| {
            let k = mesh.triangle(t).iter().position(|&w| w == v).expect("edge vertex in triangle");
            coefficients[t][k]
        };
        let sup = mesh.edges()[e].iter().map(|&v| (trace(t1, v) - trace(t2, v)).abs()).fold(0.0, f64::max);
        jump += sup * sup;
    }
    Ok(FeHardyTerms { lhs: lhs.sqrt(), gradient: grad.sqrt(), jump: jump.sqrt() })
}

/// Element coefficients of the nodal interpolant of `field`.
pub fn nodal_coefficients<F: Fn(Point) -> f64>(mesh: &Mesh, field: F) -> Vec<[f64; 3]> {
    let values: Vec<f64> = mesh.vertices().iter().map(|&p| field(p)).collect();
    mesh.triangles().iter().map(|tri| tri.map(|v| values[v])).collect()
}

/// Quadrature levels toward a corner for the weighted mass matrix.
pub const CORNER_LEVELS: usize = 8;

/// `W_ij = Σ_a ∫ φᵢφⱼ/|x − a|²` over the corners `a` of the mesh, on the
/// P1 hat functions. Rows and columns of corner vertices are left empty
/// (the integrand is not integrable there).
pub fn corner_weighted_mass(mesh: &Mesh, levels: usize) -> Result<CsrMatrix, HardyError> {
    let base = TriangleRule::new(14)?;
    let refined: Vec<TriangleRule> = (0..3).map(|c| base.corner_refined(c, levels)).collect();
    let corners: Vec<Point> = mesh.corners().iter().map(|&v| mesh.vertex(v)).collect();
    let parts: Vec<Result<Vec<(usize, usize, f64)>, HardyError>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let geom = Geometry::new(mesh.triangle_points(t))?;
            let mut k = [[0.0; 3]; 3];
            for &a in &corners {
                let at = geom.vertices.iter().position(|&p| p == a);
                let rule = at.map_or(&base, |c| &refined[c]);
                for (l, w) in rule.iter() {
                    let x = geom.to_cartesian(*l);
                    let r2 = (x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2);
                    let ww = 2.0 * geom.area * w / r2;
                    for i in 0..3 {
                        for j in 0..3 {
                            k[i][j] += ww * l[i] * l[j];
                        }
                    }
                }
            }
            let mut out = Vec::with_capacity(9);
            for i in 0..3 {
                for j in 0..3 {
                    if !mesh.is_corner(tri[i]) && !mesh.is_corner(tri[j]) {
                        out.push((tri[i], tri[j], k[i][j]));
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
    let n = mesh.num_vertices();
    Ok(CsrMatrix::from_triplets(n, n, entries))
}

/// P1 stiffness `∫ ∇φᵢ·∇φⱼ`.
pub fn p1_stiffness(mesh: &Mesh) -> Result<CsrMatrix, HardyError> {
    let mut entries = Vec::with_capacity(9 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle(t);
        let geom = Geometry::new(mesh.triangle_points(t))?;
        let p1 = P1Basis::new(&geom);
        for i in 0..3 {
            for j in 0..3 {
                let v = geom.area * (p1.grad[i][0] * p1.grad[j][0] + p1.grad[i][1] * p1.grad[j][1]);
                entries.push((tri[i], tri[j], v));
            }
        }
    }
    let n = mesh.num_vertices();
    Ok(CsrMatrix::from_triplets(n, n, entries))
}

/// `∫ φᵢ` for each hat function.
pub fn p1_mean_weights(mesh: &Mesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_vertices()];
    for t in 0..mesh.num_triangles() {
        let third = mesh.area(t) / 3.0;
        for v in mesh.triangle(t) {
            w[v] += third;
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormRatio {
    /// `max_q [q]_{H¹₊}/‖∇q‖`
    pub ratio: f64,
    pub iterations: usize,
    /// `false` if the iteration cap was hit; `ratio` is then the last estimate.
    pub converged: bool,
}

/// Largest `[q]_{H¹₊}/‖∇q‖` over the pressure space of `layout` (free
/// pressure DoFs, zero mean), as `√θ_max` of `W q = θ S q`.
pub fn corner_seminorm_ratio(mesh: &Mesh, layout: &DofLayout, eig: &EigenOptions) -> Result<SeminormRatio, HardyError> {
    let w = corner_weighted_mass(mesh, CORNER_LEVELS)?;
    let s = p1_stiffness(mesh)?;
    let mut fixed = vec![false; layout.pressure_count()];
    layout.fixed_pressure().iter().for_each(|&k| fixed[k] = true);
    let free: Vec<usize> = (0..layout.pressure_count()).filter(|&i| !fixed[i]).collect();
    let mean = p1_mean_weights(mesh);
    let weights: Vec<f64> = free.iter().map(|&i| mean[i]).collect();
    let wd = restrict_to_complement(&w.select(&free, &free).to_dense(), &weights);
    let sd = restrict_to_complement(&s.select(&free, &free).to_dense(), &weights);
    let chol = DenseCholesky::factor(&sd)?;
    let apply = |m: &Vec<Vec<f64>>, x: &[f64]| -> Vec<f64> { m.iter().map(|r| linalg::dot(r, x)).collect() };
    match linalg::power_largest(wd.len(), |x| apply(&wd, x), |x| apply(&sd, x), |b| chol.solve(b), eig) {
        Ok(e) => Ok(SeminormRatio { ratio: e.value.sqrt(), iterations: e.iterations, converged: true }),
        Err(EigenError::NotConverged { iterations, estimate, .. }) => {
            Ok(SeminormRatio { ratio: estimate.max(0.0).sqrt(), iterations, converged: false })
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_nodes() {
        let p = RadialProfile::new(4, 1).unwrap();
        assert!((p.node_value(4) - 0.25 * (1.0 + 0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-15);
        assert!((p.value(0.375) - (0.25 + 0.125 / 2.0)).abs() < 1e-15);
        assert!(RadialProfile::new(0, 2).is_err());
        assert!(RadialProfile::new(3, 3).is_err());
    }

    #[test]
    fn slope_of_exact_power() {
        let hs: Vec<f64> = (3..8).map(|k| 0.5f64.powi(k)).collect();
        let v: Vec<f64> = hs.iter().map(|h| 2.0 * h * (1.0 / h).ln().powf(1.5)).collect();
        assert!((fit_log_power(&hs, &v) - 1.5).abs() < 1e-12);
    }
}
