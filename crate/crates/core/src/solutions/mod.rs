//! Manufactured solutions on the unit square with exact derivatives.
//!
//! All derivatives come from [`Jet`] evaluation of the closed forms.
//! Pressure is always `p = λ div u`; the load is
//! `f = ι²Δ(ℒu) − ℒu` with `ℒu = μΔu + (λ+μ)∇div u`, except for the layer
//! case whose load solves the unperturbed problem, `f = −ℒu₀`.

mod jet;

use std::f64::consts::PI;
use std::fmt;

pub use jet::{polar_angle, Jet, Real, MAX_ORDER};

use crate::mesh::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolutionError {
    #[error("unknown case id {0} (expected 1, 2, 3 or 4)")]
    InvalidCase(u8),
    #[error("Poisson ratio {0} outside (0, 0.5)")]
    InvalidPoisson(f64),
    #[error("length scale {0} must be non-negative")]
    InvalidIota(f64),
    #[error("case {case} is singular at ({x}, {y})")]
    SingularPoint { case: u8, x: f64, y: f64 },
}

/// `(λ, μ)` from Young's modulus `e` and Poisson ratio `nu`.
pub fn lame(e: f64, nu: f64) -> (f64, f64) {
    (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Divergence-free trigonometric field.
    Smooth = 1,
    /// Nearly incompressible field with nonzero pressure.
    NearlyIncompressible = 2,
    /// Corner singularity `ρ^{3/2}` at the origin with inhomogeneous data.
    Singular = 3,
    /// Unperturbed elasticity solution; the perturbed one has a layer.
    Layer = 4,
}

impl CaseId {
    pub fn from_number(id: u8) -> Result<Self, SolutionError> {
        match id {
            1 => Ok(Self::Smooth),
            2 => Ok(Self::NearlyIncompressible),
            3 => Ok(Self::Singular),
            4 => Ok(Self::Layer),
            other => Err(SolutionError::InvalidCase(other)),
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Exact displacement with its first and second derivatives.
/// `grad[c][k] = ∂ₖ u_c`, `hess[c] = [∂xx, ∂xy, ∂yy] u_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub hess: [[f64; 3]; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    id: CaseId,
    nu: f64,
    iota: f64,
    lambda: f64,
    mu: f64,
}

const ALPHA: f64 = 1.5;
const OMEGA: f64 = 3.0 * PI / 4.0;

impl ManufacturedCase {
    /// Case with `E = 1`.
    pub fn new(id: CaseId, nu: f64, iota: f64) -> Result<Self, SolutionError> {
        if !(nu > 0.0 && nu < 0.5) {
            return Err(SolutionError::InvalidPoisson(nu));
        }
        if !(iota >= 0.0) {
            return Err(SolutionError::InvalidIota(iota));
        }
        let (lambda, mu) = lame(1.0, nu);
        Ok(Self { id, nu, iota, lambda, mu })
    }

    pub fn from_number(id: u8, nu: f64, iota: f64) -> Result<Self, SolutionError> {
        Self::new(CaseId::from_number(id)?, nu, iota)
    }

    /// Same case with a different length scale (`0` allowed).
    pub fn with_iota(&self, iota: f64) -> Result<Self, SolutionError> {
        Self::new(self.id, self.nu, iota)
    }

    pub fn id(&self) -> CaseId {
        self.id
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Whether `u = 0` and `∂ₙσn = 0` hold on the boundary.
    pub fn is_homogeneous(&self) -> bool {
        self.id != CaseId::Singular
    }

    /// Whether the exact pressure has zero mean.
    pub fn has_zero_mean_pressure(&self) -> bool {
        self.id != CaseId::Singular
    }

    /// Point where the exact solution is not smooth.
    pub fn singular_point(&self) -> Option<Point> {
        (self.id == CaseId::Singular).then_some([0.0, 0.0])
    }

    fn check_point(&self, x: Point) -> Result<(), SolutionError> {
        if self.id == CaseId::Singular && x[0].hypot(x[1]) < 1e-12 {
            return Err(SolutionError::SingularPoint { case: 3, x: x[0], y: x[1] });
        }
        Ok(())
    }

    /// Closed-form displacement, generic over the scalar type.
    pub fn displacement<R: Real>(&self, x: R, y: R) -> [R; 2] {
        let s = |t: R, k: f64| (t * (k * PI)).sin();
        match self.id {
            CaseId::Smooth => {
                let (sx, sy) = (s(x, 1.0), s(y, 1.0));
                [-(sx.powi(4) * sy.powi(2) * s(y, 2.0)), sx.powi(2) * s(x, 2.0) * sy.powi(4)]
            }
            CaseId::NearlyIncompressible => {
                let (sx, sy) = (s(x, 1.0), s(y, 1.0));
                let k = (2.0 * self.mu + self.lambda) / self.lambda;
                [-(sx.powi(2) * sy.powi(2) * s(y, 2.0)) * 2.0, s(x, 2.0) * sy.powi(4) * k]
            }
            CaseId::Layer => [-(s(x, 1.0).powi(2) * s(y, 2.0)), s(x, 2.0) * s(y, 1.0).powi(2)],
            CaseId::Singular => {
                let (lam, mu) = (self.lambda, self.mu);
                let c1 = -((ALPHA + 1.0) * OMEGA).cos() / ((ALPHA - 1.0) * OMEGA).cos();
                let c2 = 2.0 * (lam + 2.0 * mu) / (lam + mu);
                let r_a = (x * x + y * y).powf(0.5 * ALPHA) * (0.5 / mu);
                let t = polar_angle(x, y);
                let (ap, am) = (ALPHA + 1.0, ALPHA - 1.0);
                let u_r = r_a * ((t * ap).cos() * (-ap) + (t * am).cos() * ((c2 - ap) * c1));
                let u_t = r_a * ((t * ap).sin() * ap + (t * am).sin() * ((c2 + am) * c1));
                let (ct, st) = (t.cos(), t.sin());
                [u_r * ct - u_t * st, u_r * st + u_t * ct]
            }
        }
    }

    pub fn value(&self, x: Point) -> [f64; 2] {
        if self.id == CaseId::Singular && x == [0.0, 0.0] {
            // u = O(ρ^α) at the singular corner
            return [0.0; 2];
        }
        self.displacement(x[0], x[1])
    }

    pub fn derivatives(&self, x: Point) -> Derivatives {
        let (jx, jy) = Jet::<2>::variables(x[0], x[1]);
        let u = self.displacement(jx, jy);
        let mut d = Derivatives { value: [0.0; 2], grad: [[0.0; 2]; 2], hess: [[0.0; 3]; 2] };
        for c in 0..2 {
            d.value[c] = u[c].value();
            d.grad[c] = [u[c].derivative(1, 0), u[c].derivative(0, 1)];
            d.hess[c] = [u[c].derivative(2, 0), u[c].derivative(1, 1), u[c].derivative(0, 2)];
        }
        d
    }

    /// `div u`
    pub fn divergence(&self, x: Point) -> f64 {
        let d = self.derivatives(x);
        d.grad[0][0] + d.grad[1][1]
    }

    /// Exact pressure `p = λ div u`.
    pub fn pressure(&self, x: Point) -> f64 {
        self.lambda * self.divergence(x)
    }

    /// `∇p = λ ∇div u`.
    pub fn pressure_gradient(&self, x: Point) -> [f64; 2] {
        let d = self.derivatives(x);
        [self.lambda * (d.hess[0][0] + d.hess[1][1]), self.lambda * (d.hess[0][1] + d.hess[1][2])]
    }

    /// `(ℒu, Δℒu)` from order-4 jets.
    fn operator_terms(&self, x: Point) -> ([f64; 2], [f64; 2]) {
        let (jx, jy) = Jet::<4>::variables(x[0], x[1]);
        let u = self.displacement(jx, jy);
        let d = |c: usize, i: usize, j: usize| u[c].derivative(i, j);
        let (lam, mu) = (self.lambda, self.mu);
        let lap = |c: usize| d(c, 2, 0) + d(c, 0, 2);
        let bilap = |c: usize| d(c, 4, 0) + 2.0 * d(c, 2, 2) + d(c, 0, 4);
        let grad_div = [d(0, 2, 0) + d(1, 1, 1), d(0, 1, 1) + d(1, 0, 2)];
        let grad_lap_div = [
            d(0, 4, 0) + d(0, 2, 2) + d(1, 3, 1) + d(1, 1, 3),
            d(0, 3, 1) + d(0, 1, 3) + d(1, 2, 2) + d(1, 0, 4),
        ];
        let l = [mu * lap(0) + (lam + mu) * grad_div[0], mu * lap(1) + (lam + mu) * grad_div[1]];
        let ll = [mu * bilap(0) + (lam + mu) * grad_lap_div[0], mu * bilap(1) + (lam + mu) * grad_lap_div[1]];
        (l, ll)
    }

    /// `ℒu = μΔu + (λ+μ)∇div u`.
    pub fn elasticity_operator(&self, x: Point) -> Result<[f64; 2], SolutionError> {
        self.check_point(x)?;
        Ok(self.operator_terms(x).0)
    }

    /// Volume load.
    pub fn load(&self, x: Point) -> Result<[f64; 2], SolutionError> {
        self.check_point(x)?;
        let (l, ll) = self.operator_terms(x);
        if self.id == CaseId::Layer {
            return Ok([-l[0], -l[1]]);
        }
        let i2 = self.iota * self.iota;
        Ok([i2 * ll[0] - l[0], i2 * ll[1] - l[1]])
    }

    /// Stress `σ = 2με(u) + λ div u I` as `[σxx, σxy, σyy]`.
    pub fn stress(&self, x: Point) -> [f64; 3] {
        let d = self.derivatives(x);
        let div = d.grad[0][0] + d.grad[1][1];
        [
            2.0 * self.mu * d.grad[0][0] + self.lambda * div,
            self.mu * (d.grad[0][1] + d.grad[1][0]),
            2.0 * self.mu * d.grad[1][1] + self.lambda * div,
        ]
    }

    /// Double traction `g = ∂ₙ(σ) n` for unit normal `n`.
    pub fn boundary_traction(&self, x: Point, n: [f64; 2]) -> Result<[f64; 2], SolutionError> {
        self.check_point(x)?;
        let (jx, jy) = Jet::<2>::variables(x[0], x[1]);
        let u = self.displacement(jx, jy);
        let (lam, mu) = (self.lambda, self.mu);
        // ∂ₖ σᵢⱼ from second derivatives: ∂ₖ∂ⱼ uᵢ
        let h = |c: usize, k: usize, j: usize| {
            let (a, b) = match (k, j) {
                (0, 0) => (2, 0),
                (1, 1) => (0, 2),
                _ => (1, 1),
            };
            u[c].derivative(a, b)
        };
        let mut g = [0.0; 2];
        for (i, gi) in g.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    let dk_div = h(0, k, 0) + h(1, k, 1);
                    let ds = mu * (h(i, k, j) + h(j, k, i)) + if i == j { lam * dk_div } else { 0.0 };
                    *gi += n[k] * ds * n[j];
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interior_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)]).collect()
    }

    #[test]
    fn lame_parameters() {
        let (l, m) = lame(1.0, 0.3);
        assert!((l - 0.5769).abs() < 1e-4 && (m - 0.3846).abs() < 1e-4);
        let (l, m) = lame(1.0, 0.4999);
        assert!((l - 1666.4).abs() < 0.1 && (m - 0.3334).abs() < 1e-4);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(ManufacturedCase::from_number(5, 0.3, 1.0), Err(SolutionError::InvalidCase(5)));
        assert!(ManufacturedCase::from_number(1, 0.5, 1.0).is_err());
        let c = ManufacturedCase::from_number(3, 0.3, 1.0).unwrap();
        assert!(matches!(c.load([0.0, 0.0]), Err(SolutionError::SingularPoint { .. })));
    }

    #[test]
    fn divergence_free_cases() {
        for id in [1, 4] {
            let c = ManufacturedCase::from_number(id, 0.3, 1e-6).unwrap();
            for p in interior_points(100, 1) {
                assert!(c.divergence(p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_case_divergence_closed_form() {
        for nu in [0.3, 0.4999] {
            let c = ManufacturedCase::from_number(3, nu, 1.0).unwrap();
            let (l, m) = (c.lambda(), c.mu());
            for p in interior_points(100, 2) {
                let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
                let exact = -3.0 * (1.0 + 2f64.sqrt()) / (l + m) * r.sqrt() * (t / 2.0).cos();
                assert!((c.divergence(p) - exact).abs() < 1e-10 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn nearly_incompressible_pressure_closed_form() {
        let c = ManufacturedCase::from_number(2, 0.4999, 1.0).unwrap();
        let mu = c.mu();
        let s = |t: f64| (PI * t).sin();
        for p in interior_points(100, 3) {
            let exact = 4.0 * PI * mu * (2.0 * PI * p[0]).sin() * s(p[1]).powi(2) * (2.0 * PI * p[1]).sin();
            assert!((c.pressure(p) - exact).abs() < 1e-9 * (1.0 + exact.abs()));
        }
        // u₂ prefactor (2μ+λ)/λ → 1 as λ → ∞
        let k = |nu: f64| {
            let (l, m) = lame(1.0, nu);
            (2.0 * m + l) / l
        };
        assert!(k(0.49999) - 1.0 < 1e-3 && k(0.4999) > k(0.49999));
    }

    #[test]
    fn singular_case_has_no_load() {
        let c = ManufacturedCase::from_number(3, 0.3, 1.0).unwrap();
        for p in interior_points(100, 4) {
            let f = c.load(p).unwrap();
            let d = c.derivatives(p);
            let scale = c.mu() * d.hess.iter().flatten().map(|v| v.abs()).sum::<f64>().max(1.0);
            assert!(f[0].abs() + f[1].abs() < 1e-8 * scale, "{f:?}");
        }
    }

    /// With ι = 0 the load reduces to −ℒu = −μΔu for div-free fields.
    #[test]
    fn zero_iota_load_is_minus_vector_laplacian() {
        let c = ManufacturedCase::from_number(1, 0.3, 1e-6).unwrap().with_iota(0.0).unwrap();
        for p in interior_points(50, 5) {
            let d = c.derivatives(p);
            let f = c.load(p).unwrap();
            for k in 0..2 {
                let lap = d.hess[k][0] + d.hess[k][2];
                assert!((f[k] + c.mu() * lap).abs() < 1e-9 * (1.0 + lap.abs()));
            }
        }
    }

    #[test]
    fn homogeneous_tractions_vanish() {
        for id in [1, 2] {
            let c = ManufacturedCase::from_number(id, 0.3, 1.0).unwrap();
            for k in 1..20 {
                let t = k as f64 / 20.0;
                for (p, n) in [([t, 0.0], [0.0, -1.0]), ([1.0, t], [1.0, 0.0]), ([t, 1.0], [0.0, 1.0]), ([0.0, t], [-1.0, 0.0])] {
                    let g = c.boundary_traction(p, n).unwrap();
                    assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10, "case {id} at {p:?}: {g:?}");
                    let u = c.value(p);
                    assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14);
                }
            }
        }
    }
}
