//! Quadrature on the reference triangle and the unit interval.
//!
//! Triangle rules are conical (collapsed) products of Gauss–Legendre rules,
//! so every weight is positive and every node is interior. Points are
//! stored as barycentric coordinates of the reference triangle with
//! vertices `(0,0)`, `(1,0)`, `(0,1)`, weights sum to its area `1/2`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

pub const MAX_DEGREE: usize = 14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("unsupported quadrature degree {0} (supported: 1..={MAX_DEGREE})")]
    UnsupportedDegree(usize),
}

/// `npts`-point Gauss–Legendre nodes and weights on `[0, 1]`, sorted.
pub(crate) fn gauss_legendre_unit(npts: usize) -> Vec<(f64, f64)> {
    let npts = NonZeroUsize::new(npts).expect("at least one node");
    let rule = GaussLegendre::new(npts);
    let mut out: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl TriangleRule {
    /// Rule exact for bivariate polynomials of total degree `degree`.
    pub fn new(degree: usize) -> Result<Self, QuadratureError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(QuadratureError::UnsupportedDegree(degree));
        }
        // x = s, y = t(1 - s): the Jacobian (1 - s) adds one degree in s.
        let gs = gauss_legendre_unit((degree + 2).div_ceil(2));
        let gt = gauss_legendre_unit((degree + 1).div_ceil(2));
        let mut points = Vec::with_capacity(gs.len() * gt.len());
        let mut weights = Vec::with_capacity(gs.len() * gt.len());
        for &(s, ws) in &gs {
            for &(t, wt) in &gt {
                let x = s;
                let y = t * (1.0 - s);
                points.push([1.0 - x - y, x, y]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        Ok(Self { degree, points, weights })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Barycentric coordinates `(λ₁, λ₂, λ₃)` of each node.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Integral over the reference triangle of `f(x, y)`.
    pub fn integrate_reference<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(b, w)| w * f(b[1], b[2])).sum()
    }

    /// Composite rule refined geometrically toward vertex `corner`
    /// (0, 1 or 2, the barycentric index). Each level halves the
    /// corner-adjacent subtriangle; the three-piece remainder of each level
    /// and the final corner subtriangle receive a copy of `self`.
    pub fn corner_refined(&self, corner: usize, levels: usize) -> TriangleRule {
        assert!(corner < 3, "corner index must be 0, 1 or 2");
        if levels == 0 {
            return self.clone();
        }
        let mut unit = [[0.0; 3]; 3];
        for (i, u) in unit.iter_mut().enumerate() {
            u[i] = 1.0;
        }
        let c = unit[corner];
        let mut b1 = unit[(corner + 1) % 3];
        let mut b2 = unit[(corner + 2) % 3];
        let mid = |p: [f64; 3], q: [f64; 3]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
        let mut pieces = Vec::with_capacity(2 * levels + 1);
        for _ in 0..levels {
            let m1 = mid(c, b1);
            let m2 = mid(c, b2);
            pieces.push([m1, b1, b2]);
            pieces.push([m1, b2, m2]);
            b1 = m1;
            b2 = m2;
        }
        pieces.push([c, b1, b2]);

        let mut points = Vec::with_capacity(pieces.len() * self.len());
        let mut weights = Vec::with_capacity(pieces.len() * self.len());
        for [p, q, r] in pieces {
            // area ratio from the (λ₂, λ₃) coordinates, which are Cartesian
            // on the reference triangle
            let ratio = ((q[1] - p[1]) * (r[2] - p[2]) - (r[1] - p[1]) * (q[2] - p[2])).abs();
            for (mu, w) in self.iter() {
                let mut pt = [0.0; 3];
                for k in 0..3 {
                    pt[k] = mu[0] * p[k] + mu[1] * q[k] + mu[2] * r[k];
                }
                points.push(pt);
                weights.push(w * ratio);
            }
        }
        TriangleRule { degree: self.degree, points, weights }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    degree: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl EdgeRule {
    /// Gauss–Legendre rule on `[0, 1]` exact to `degree`.
    pub fn new(degree: usize) -> Result<Self, QuadratureError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(QuadratureError::UnsupportedDegree(degree));
        }
        let (points, weights) = gauss_legendre_unit((degree + 1).div_ceil(2)).into_iter().unzip();
        Ok(Self { degree, points, weights })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Parameters `t ∈ (0, 1)`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(t, w)| w * f(t)).sum()
    }

    /// Composite rule graded geometrically toward `t = 0`.
    pub fn graded_toward_start(&self, levels: usize) -> EdgeRule {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut hi = 1.0;
        for level in 0..=levels {
            let lo = if level == levels { 0.0 } else { 0.5 * hi };
            for (t, w) in self.iter() {
                points.push(lo + t * (hi - lo));
                weights.push(w * (hi - lo));
            }
            hi = lo;
        }
        EdgeRule { degree: self.degree, points, weights }
    }

    /// Mirror image `t ↦ 1 − t`.
    pub fn reversed(&self) -> EdgeRule {
        EdgeRule { degree: self.degree, points: self.points.iter().map(|t| 1.0 - t).collect(), weights: self.weights.clone() }
    }
}

/// Base triangle and edge rules plus composite variants refined toward an
/// optional singular point. Triangles and edges touching that point (as a
/// vertex) get the refined rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    triangle: TriangleRule,
    edge: EdgeRule,
    singular: Option<[f64; 2]>,
    refined: Vec<TriangleRule>,
    graded: EdgeRule,
    graded_reversed: EdgeRule,
}

fn same_point(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= 1e-14 && (a[1] - b[1]).abs() <= 1e-14
}

impl RuleSet {
    pub fn new(triangle_degree: usize, edge_degree: usize) -> Result<Self, QuadratureError> {
        let triangle = TriangleRule::new(triangle_degree)?;
        let edge = EdgeRule::new(edge_degree)?;
        Ok(Self { refined: Vec::new(), graded: edge.clone(), graded_reversed: edge.clone(), triangle, edge, singular: None })
    }

    /// Refine toward `point` with `levels` geometric levels.
    pub fn with_singular_point(mut self, point: [f64; 2], levels: usize) -> Self {
        self.singular = Some(point);
        self.refined = (0..3).map(|c| self.triangle.corner_refined(c, levels)).collect();
        self.graded = self.edge.graded_toward_start(levels);
        self.graded_reversed = self.graded.reversed();
        self
    }

    pub fn singular_point(&self) -> Option<[f64; 2]> {
        self.singular
    }

    pub fn triangle(&self) -> &TriangleRule {
        &self.triangle
    }

    pub fn edge(&self) -> &EdgeRule {
        &self.edge
    }

    /// Local vertex of the triangle that coincides with the singular point.
    pub fn singular_corner(&self, vertices: &[[f64; 2]; 3]) -> Option<usize> {
        let s = self.singular?;
        vertices.iter().position(|&v| same_point(v, s))
    }

    pub fn triangle_for(&self, vertices: &[[f64; 2]; 3]) -> &TriangleRule {
        match self.singular_corner(vertices) {
            Some(c) => &self.refined[c],
            None => &self.triangle,
        }
    }

    /// Rule for the segment parametrized from `p0` (t = 0) to `p1` (t = 1).
    pub fn edge_for(&self, p0: [f64; 2], p1: [f64; 2]) -> &EdgeRule {
        match self.singular {
            Some(s) if same_point(p0, s) => &self.graded,
            Some(s) if same_point(p1, s) => &self.graded_reversed,
            _ => &self.edge,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn monomial_exactness_grid() {
        for d in 1..=MAX_DEGREE {
            let rule = TriangleRule::new(d).unwrap();
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let q = rule.integrate_reference(|x, y| x.powi(a as i32) * y.powi(b as i32));
                    let e = monomial_exact(a, b);
                    assert!(((q - e) / e).abs() <= 1e-13, "degree {d}, x^{a} y^{b}: {q} vs {e}");
                }
            }
            let edge = EdgeRule::new(d).unwrap();
            for k in 0..=d as i32 {
                let q = edge.integrate(|t| t.powi(k));
                let e = 1.0 / (k as f64 + 1.0);
                assert!(((q - e) / e).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn simple_integrals() {
        let r1 = TriangleRule::new(1).unwrap();
        assert!((r1.integrate_reference(|_, _| 1.0) - 0.5).abs() < 1e-15);
        for d in 3..=MAX_DEGREE {
            let r = TriangleRule::new(d).unwrap();
            let q: f64 = r.iter().map(|(b, w)| w * b[0] * b[1] * b[2]).sum();
            assert!((q - 1.0 / 120.0).abs() < 1e-15);
        }
        let e = EdgeRule::new(1).unwrap();
        assert!((e.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((EdgeRule::new(2).unwrap().integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-15);
        assert!((EdgeRule::new(5).unwrap().integrate(|t| t.powi(5)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degrees() {
        assert_eq!(TriangleRule::new(0), Err(QuadratureError::UnsupportedDegree(0)));
        assert_eq!(TriangleRule::new(15), Err(QuadratureError::UnsupportedDegree(15)));
        assert_eq!(EdgeRule::new(15), Err(QuadratureError::UnsupportedDegree(15)));
    }

    #[test]
    fn corner_refined_partitions_the_triangle() {
        let base = TriangleRule::new(6).unwrap();
        assert_eq!(base.corner_refined(1, 0), base);
        for corner in 0..3 {
            let r = base.corner_refined(corner, 5);
            assert_eq!(r.len(), 11 * base.len());
            assert!((r.weights().iter().sum::<f64>() - 0.5).abs() < 1e-13);
            // still exact for polynomials
            let q = r.integrate_reference(|x, y| x.powi(3) * y * y);
            assert!((q - monomial_exact(3, 2)).abs() < 1e-15);
        }
    }

    #[test]
    fn rule_set_selects_refined_rules() {
        let rs = RuleSet::new(6, 6).unwrap().with_singular_point([0.0, 0.0], 4);
        let far = [[0.5, 0.5], [1.0, 0.5], [0.5, 1.0]];
        assert_eq!(rs.triangle_for(&far), rs.triangle());
        let near = [[0.5, 0.0], [0.5, 0.5], [0.0, 0.0]];
        assert_eq!(rs.singular_corner(&near), Some(2));
        assert_eq!(rs.triangle_for(&near).len(), 9 * rs.triangle().len());
        assert_eq!(rs.edge_for([0.5, 0.5], [1.0, 0.5]), rs.edge());
        // the finest piece is [0, 2⁻⁴] at the singular end
        let g = rs.edge_for([0.0, 0.0], [1.0, 0.0]);
        assert!(g.points().iter().any(|&t| t < 1.0 / 16.0));
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let r = rs.edge_for([1.0, 0.0], [0.0, 0.0]);
        assert!(r.points().iter().any(|&t| t > 1.0 - 1.0 / 16.0));
        assert!(RuleSet::new(0, 3).is_err());
    }

    #[test]
    fn graded_edge_rule() {
        let base = EdgeRule::new(10).unwrap();
        let g = base.graded_toward_start(40);
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        // ∫₀¹ t^{-1/2} dt = 2, singular at the graded end
        let q = g.integrate(|t| t.powf(-0.5));
        assert!((q - 2.0).abs() < 1e-6, "{q}");
        let r = g.reversed();
        assert!((r.integrate(|t| (1.0 - t).powf(-0.5)) - 2.0).abs() < 1e-6);
    }
}
