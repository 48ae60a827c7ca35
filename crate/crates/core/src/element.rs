//! The 10-DoF nonconforming velocity triangle and the P1 pressure element.
//!
//! Local space: `P2 + b_K · span{P1, λ₁λ₂ + λ₂λ₃ + λ₃λ₁}` with
//! `b_K = λ₁λ₂λ₃`. Local DoF order:
//!
//! | index | functional |
//! |-------|------------|
//! | 0..3  | vertex values `v(aᵢ)` |
//! | 3..6  | midpoint values `v(bᵢ)`, `bᵢ` the midpoint of edge `eᵢ` opposite `aᵢ` |
//! | 6..9  | edge averages of the outward normal derivative on `eᵢ` |
//! | 9     | cell average |
//!
//! Shape functions are stored as barycentric polynomials of degree ≤ 5, so
//! values, gradients and Hessians are evaluated exactly.

use std::sync::OnceLock;

use crate::mesh::Point;
use crate::quadrature::RuleSet;

pub const NDOF: usize = 10;
const MAX_POLY_DEGREE: usize = 5;
/// Number of barycentric monomials `λ^α` with `|α| ≤ 5`.
pub const NMONO: usize = 56;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElementError {
    #[error("degenerate triangle (signed area {0:e})")]
    Degenerate(f64),
    #[error("DoF matrix deviates from the identity by {0:e}")]
    Biorthogonality(f64),
}

fn monomials() -> &'static [[u8; 3]] {
    static M: OnceLock<Vec<[u8; 3]>> = OnceLock::new();
    M.get_or_init(|| {
        let mut out = Vec::with_capacity(NMONO);
        for d in 0..=MAX_POLY_DEGREE as u8 {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    out.push([a, b, d - a - b]);
                }
            }
        }
        out
    })
}

fn mono_index(e: [u8; 3]) -> usize {
    let d = (e[0] + e[1] + e[2]) as usize;
    debug_assert!(d <= MAX_POLY_DEGREE);
    // monomials of degree < d, then position within degree d
    let before = d * (d + 1) * (d + 2) / 6;
    let a = e[0] as usize;
    let b = e[1] as usize;
    let within = (0..d - a).map(|k| k + 1).sum::<usize>() + (d - a - b);
    before + within
}

/// Polynomial in barycentric coordinates, `Σ c_α λ^α` over `|α| ≤ 5`.
/// The representation is not unique (`λ₁+λ₂+λ₃ = 1`), evaluation is.
#[derive(Clone, PartialEq)]
pub struct BaryPoly {
    c: [f64; NMONO],
}

impl std::fmt::Debug for BaryPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = monomials()
            .iter()
            .zip(&self.c)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| format!("{c}*l^{m:?}"))
            .collect();
        write!(f, "BaryPoly({})", terms.join(" + "))
    }
}

impl BaryPoly {
    pub fn zero() -> Self {
        Self { c: [0.0; NMONO] }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Self::zero();
        p.c[0] = v;
        p
    }

    pub fn lambda(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        let mut p = Self::zero();
        p.c[mono_index(e)] = 1.0;
        p
    }

    pub fn coefficients(&self) -> &[f64; NMONO] {
        &self.c
    }

    pub fn add(&self, o: &Self) -> Self {
        self.axpy(1.0, o)
    }

    /// `self + s·o`
    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&o.c) {
            *a += s * b;
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = self.clone();
        r.c.iter_mut().for_each(|a| *a *= s);
        r
    }

    /// Product; panics if the degree would exceed 5.
    pub fn mul(&self, o: &Self) -> Self {
        let m = monomials();
        let mut r = Self::zero();
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let e = [m[i][0] + m[j][0], m[i][1] + m[j][1], m[i][2] + m[j][2]];
                assert!((e[0] + e[1] + e[2]) as usize <= MAX_POLY_DEGREE, "barycentric degree overflow");
                r.c[mono_index(e)] += a * b;
            }
        }
        r
    }

    pub fn eval(&self, l: [f64; 3]) -> f64 {
        monomials().iter().zip(&self.c).filter(|(_, c)| **c != 0.0).map(|(m, c)| c * mono_value(*m, l)).sum()
    }
}

fn mono_value(m: [u8; 3], l: [f64; 3]) -> f64 {
    l[0].powi(m[0] as i32) * l[1].powi(m[1] as i32) * l[2].powi(m[2] as i32)
}

/// Value, first and second barycentric partials of one monomial.
#[derive(Debug, Clone, Copy, Default)]
struct MonoJet {
    v: f64,
    d: [f64; 3],
    /// symmetric, stored full
    dd: [[f64; 3]; 3],
}

fn mono_jet(m: [u8; 3], l: [f64; 3]) -> MonoJet {
    let pw = |k: usize, e: i32| if e < 0 { 0.0 } else { l[k].powi(e) };
    let e = [m[0] as i32, m[1] as i32, m[2] as i32];
    let term = |shift: [i32; 3]| -> f64 { pw(0, e[0] - shift[0]) * pw(1, e[1] - shift[1]) * pw(2, e[2] - shift[2]) };
    let mut j = MonoJet { v: term([0, 0, 0]), ..Default::default() };
    for k in 0..3 {
        let mut s = [0; 3];
        s[k] = 1;
        j.d[k] = e[k] as f64 * term(s);
        for l2 in 0..3 {
            let mut s2 = s;
            s2[l2] += 1;
            let f = if k == l2 { (e[k] * (e[k] - 1)) as f64 } else { (e[k] * e[l2]) as f64 };
            j.dd[k][l2] = f * term(s2);
        }
    }
    j
}

/// Barycentric monomial jets tabulated at a fixed set of barycentric points
/// (the same on every element, so it is computed once per rule).
pub struct MonomialTable {
    jets: Vec<[MonoJet; NMONO]>,
}

impl MonomialTable {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let m = monomials();
        let jets = points
            .iter()
            .map(|&l| {
                let mut row = [MonoJet::default(); NMONO];
                for (r, &mm) in row.iter_mut().zip(m) {
                    *r = mono_jet(mm, l);
                }
                row
            })
            .collect();
        Self { jets }
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }
}

/// Per-triangle geometric data.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// ∇λᵢ
    pub grad_lambda: [[f64; 2]; 3],
    /// |∇λᵢ|
    pub grad_norm: [f64; 3],
    /// length of edge eᵢ (opposite vertex i)
    pub edge_length: [f64; 3],
    pub midpoint: [Point; 3],
    /// outward unit normal of eᵢ
    pub normal: [[f64; 2]; 3],
}

impl Geometry {
    pub fn new(vertices: [Point; 3]) -> Result<Self, ElementError> {
        let [a, b, c] = vertices;
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        let scale = [a, b, c].iter().map(|p| p[0].abs().max(p[1].abs())).fold(1e-300, f64::max);
        if !(area > 1e-14 * scale * scale) {
            return Err(ElementError::Degenerate(area));
        }
        let mut grad_lambda = [[0.0; 2]; 3];
        let mut grad_norm = [0.0; 3];
        let mut edge_length = [0.0; 3];
        let mut midpoint = [[0.0; 2]; 3];
        let mut normal = [[0.0; 2]; 3];
        for i in 0..3 {
            let p = vertices[(i + 1) % 3];
            let q = vertices[(i + 2) % 3];
            grad_lambda[i] = [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)];
            grad_norm[i] = grad_lambda[i][0].hypot(grad_lambda[i][1]);
            edge_length[i] = (q[0] - p[0]).hypot(q[1] - p[1]);
            midpoint[i] = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            normal[i] = [-grad_lambda[i][0] / grad_norm[i], -grad_lambda[i][1] / grad_norm[i]];
        }
        Ok(Self { vertices, area, grad_lambda, grad_norm, edge_length, midpoint, normal })
    }

    pub fn to_cartesian(&self, l: [f64; 3]) -> Point {
        let v = &self.vertices;
        [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]]
    }

    pub fn to_barycentric(&self, x: Point) -> [f64; 3] {
        let c = self.to_cartesian([1.0 / 3.0; 3]);
        let d = [x[0] - c[0], x[1] - c[1]];
        let mut l = [0.0; 3];
        for (i, li) in l.iter_mut().enumerate() {
            *li = 1.0 / 3.0 + self.grad_lambda[i][0] * d[0] + self.grad_lambda[i][1] * d[1];
        }
        l
    }

    /// Point on edge `eᵢ` at parameter `t`, running from vertex `i+1` to `i+2`.
    pub fn edge_point(&self, i: usize, t: f64) -> [f64; 3] {
        let mut l = [0.0; 3];
        l[(i + 1) % 3] = 1.0 - t;
        l[(i + 2) % 3] = t;
        l
    }

    /// Diameter h_K.
    pub fn diameter(&self) -> f64 {
        self.edge_length.iter().copied().fold(0.0, f64::max)
    }
}

/// Value, gradient and Hessian `[∂xx, ∂xy, ∂yy]` of the ten shape functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub value: [f64; NDOF],
    pub grad: [[f64; 2]; NDOF],
    pub hess: [[f64; 3]; NDOF],
}

/// The ten shape functions on one physical triangle.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    geom: Geometry,
    shape: Vec<BaryPoly>,
    active: Vec<usize>,
}

fn small_rules() -> &'static RuleSet {
    static R: OnceLock<RuleSet> = OnceLock::new();
    R.get_or_init(|| RuleSet::new(6, 6).expect("degree 6 rules"))
}

impl LocalBasis {
    /// Builds the shape functions from their closed forms and verifies that
    /// the DoF matrix is the identity within `1e-10`.
    pub fn new(geom: &Geometry) -> Result<Self, ElementError> {
        let basis = Self::new_unchecked(geom);
        let dev = basis.biorthogonality_defect();
        if !(dev <= 1e-10) {
            return Err(ElementError::Biorthogonality(dev));
        }
        Ok(basis)
    }

    /// Shape functions without the biorthogonality check.
    pub fn new_unchecked(geom: &Geometry) -> Self {
        let l = [BaryPoly::lambda(0), BaryPoly::lambda(1), BaryPoly::lambda(2)];
        let one = BaryPoly::constant(1.0);
        let b = l[0].mul(&l[1]).mul(&l[2]);
        let s2 = l[0].mul(&l[1]).add(&l[1].mul(&l[2])).add(&l[2].mul(&l[0]));
        let phi0 = b.mul(&s2.scale(5.0).axpy(-1.0, &one)).scale(140.0);
        let g = geom.grad_norm;
        let dot = |i: usize, j: usize| geom.grad_lambda[i][0] * geom.grad_lambda[j][0] + geom.grad_lambda[i][1] * geom.grad_lambda[j][1];

        let psi: Vec<BaryPoly> = (0..3)
            .map(|i| b.mul(&l[i].scale(2.0).axpy(-1.0, &one)).scale(6.0 / g[i]).axpy(1.0 / (30.0 * g[i]), &phi0))
            .collect();
        let mut shape = Vec::with_capacity(NDOF);
        for i in 0..3 {
            let mut p = l[i].mul(&l[i].scale(2.0).axpy(-1.0, &one)).axpy(-g[i], &psi[i]);
            for j in (0..3).filter(|&j| j != i) {
                p = p.axpy(dot(i, j) / g[j], &psi[j]);
            }
            shape.push(p);
        }
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let p = l[j].mul(&l[k]).scale(4.0).add(&b.mul(&one.axpy(-4.0, &l[i])).scale(12.0)).axpy(-4.0 / 15.0, &phi0);
            shape.push(p);
        }
        shape.extend(psi);
        shape.push(phi0);

        let active = (0..NMONO).filter(|&m| shape.iter().any(|p| p.c[m] != 0.0)).collect();
        Self { geom: geom.clone(), shape, active }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn shape_polynomials(&self) -> &[BaryPoly] {
        &self.shape
    }

    /// Evaluation at an arbitrary barycentric point.
    pub fn eval(&self, l: [f64; 3]) -> BasisEval {
        let m = monomials();
        let jets: Vec<(usize, MonoJet)> = self.active.iter().map(|&k| (k, mono_jet(m[k], l))).collect();
        self.combine(jets.iter().map(|(k, j)| (*k, j)))
    }

    /// Evaluation at point `q` of a tabulated rule.
    pub fn eval_table(&self, table: &MonomialTable, q: usize) -> BasisEval {
        let row = &table.jets[q];
        self.combine(self.active.iter().map(|&k| (k, &row[k])))
    }

    fn combine<'j>(&self, jets: impl Iterator<Item = (usize, &'j MonoJet)>) -> BasisEval {
        let mut value = [0.0; NDOF];
        let mut d = [[0.0; 3]; NDOF];
        let mut dd = [[[0.0; 3]; 3]; NDOF];
        for (k, jet) in jets {
            for (f, p) in self.shape.iter().enumerate() {
                let c = p.c[k];
                if c == 0.0 {
                    continue;
                }
                value[f] += c * jet.v;
                for a in 0..3 {
                    d[f][a] += c * jet.d[a];
                    for b in 0..3 {
                        dd[f][a][b] += c * jet.dd[a][b];
                    }
                }
            }
        }
        let gl = &self.geom.grad_lambda;
        let mut grad = [[0.0; 2]; NDOF];
        let mut hess = [[0.0; 3]; NDOF];
        for f in 0..NDOF {
            for a in 0..3 {
                grad[f][0] += d[f][a] * gl[a][0];
                grad[f][1] += d[f][a] * gl[a][1];
                for b in 0..3 {
                    let w = dd[f][a][b];
                    hess[f][0] += w * gl[a][0] * gl[b][0];
                    hess[f][1] += w * gl[a][0] * gl[b][1];
                    hess[f][2] += w * gl[a][1] * gl[b][1];
                }
            }
        }
        BasisEval { value, grad, hess }
    }

    /// Value of `Σ cⱼ φⱼ` at a barycentric point.
    pub fn combination_value(&self, coeffs: &[f64; NDOF], l: [f64; 3]) -> f64 {
        let e = self.eval(l);
        coeffs.iter().zip(&e.value).map(|(c, v)| c * v).sum()
    }

    /// `D[i][j]`: functional `i` applied to shape function `j`.
    pub fn dof_matrix(&self) -> [[f64; NDOF]; NDOF] {
        let rules = small_rules();
        let g = &self.geom;
        let mut d = [[0.0; NDOF]; NDOF];
        for i in 0..3 {
            let mut l = [0.0; 3];
            l[i] = 1.0;
            d[i] = self.eval(l).value;
            let mut m = [0.5; 3];
            m[i] = 0.0;
            d[3 + i] = self.eval(m).value;
            let n = g.normal[i];
            for (t, w) in rules.edge().iter() {
                let e = self.eval(g.edge_point(i, t));
                for (dj, gj) in d[6 + i].iter_mut().zip(&e.grad) {
                    *dj += w * (gj[0] * n[0] + gj[1] * n[1]);
                }
            }
        }
        for (l, w) in rules.triangle().iter() {
            let e = self.eval(*l);
            for (dj, vj) in d[9].iter_mut().zip(&e.value) {
                *dj += 2.0 * w * vj;
            }
        }
        d
    }

    /// Max-norm distance of the DoF matrix from the identity.
    pub fn biorthogonality_defect(&self) -> f64 {
        let d = self.dof_matrix();
        let mut dev: f64 = 0.0;
        for (i, row) in d.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                dev = dev.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        dev
    }
}

/// Applies the ten DoF functionals to a field given as `x ↦ (value, gradient)`.
pub fn dof_functionals<F>(geom: &Geometry, field: F, rules: &RuleSet) -> [f64; NDOF]
where
    F: Fn(Point) -> (f64, [f64; 2]),
{
    let v = &geom.vertices;
    let mut out = [0.0; NDOF];
    for i in 0..3 {
        out[i] = field(v[i]).0;
        out[3 + i] = field(geom.midpoint[i]).0;
        let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        let n = geom.normal[i];
        out[6 + i] = rules
            .edge_for(p, q)
            .iter()
            .map(|(t, w)| {
                let g = field([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]).1;
                w * (g[0] * n[0] + g[1] * n[1])
            })
            .sum();
    }
    // reference-triangle weights sum to 1/2
    out[9] = 2.0 * rules.triangle_for(v).iter().map(|(l, w)| w * field(geom.to_cartesian(*l)).0).sum::<f64>();
    out
}

/// Default rules for interpolation of smooth fields.
pub fn default_dof_rules() -> RuleSet {
    RuleSet::new(12, 10).expect("supported degrees")
}

/// Local interpolant `π_K f`: its coefficients are the DoF functionals of `f`.
pub fn interpolate_local<F>(geom: &Geometry, field: F, rules: &RuleSet) -> [f64; NDOF]
where
    F: Fn(Point) -> (f64, [f64; 2]),
{
    dof_functionals(geom, field, rules)
}

/// Linear nodal basis: values are the barycentric coordinates, gradients
/// are constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Basis {
    pub grad: [[f64; 2]; 3],
}

impl P1Basis {
    pub fn new(geom: &Geometry) -> Self {
        Self { grad: geom.grad_lambda }
    }

    pub fn values(&self, l: [f64; 3]) -> [f64; 3] {
        l
    }
}
