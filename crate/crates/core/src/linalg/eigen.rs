//! Inverse and forward power iterations for symmetric-definite pencils
//! `A x = θ M x`. Operators are passed as closures so callers can back
//! them with sparse factorizations, dense factorizations or plain
//! mat-vecs.

use super::sparse::{dot, norm2};

#[derive(Debug, thiserror::Error)]
pub enum EigenError {
    #[error("eigen-iteration did not converge after {iterations} iterations (last estimate {estimate:.6e})")]
    NotConverged { iterations: usize, estimate: f64, vector: Vec<f64> },
    #[error("operator is not definite: x·Mx = {0:.3e}")]
    Indefinite(f64),
    #[error("empty problem")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative change of the Rayleigh quotient between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// M-normalized eigenvector estimate.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

fn start_vector(n: usize) -> Vec<f64> {
    // Weyl sequence: deterministic and generic enough not to be orthogonal
    // to the wanted eigenvector.
    (0..n).map(|i| 0.5 + ((i as f64 + 1.0) * 0.754_877_666_246_692_7).fract()).collect()
}

fn m_normalize(x: &mut [f64], mx: &[f64]) -> Result<(), EigenError> {
    let nrm2 = dot(x, mx);
    if nrm2.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(EigenError::Indefinite(nrm2));
    }
    let s = 1.0 / nrm2.sqrt();
    x.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

/// Smallest eigenvalue of `A x = θ M x` by inverse iteration.
///
/// `solve_a(b)` must return `A⁻¹ b`; `apply_m(x)` returns `M x`. The
/// Rayleigh quotient uses `A y = M x`, so `A` itself is never applied.
/// Convergence needs the relative change of θ below `tol` together with
/// a relative residual `‖Mx/θ − My‖/‖My‖` below `√tol`.
pub fn inverse_power_smallest<S, M>(n: usize, mut solve_a: S, apply_m: M, opts: &EigenOptions) -> Result<Eigenpair, EigenError>
where
    S: FnMut(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    if n == 0 {
        return Err(EigenError::Empty);
    }
    let mut x = start_vector(n);
    let mut mx = apply_m(&x);
    m_normalize(&mut x, &mx)?;
    mx = apply_m(&x);
    let mut theta_prev = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let y = solve_a(&mx);
        let my = apply_m(&y);
        let ymy = dot(&y, &my);
        if ymy <= 0.0 {
            return Err(EigenError::Indefinite(ymy));
        }
        let theta = dot(&y, &mx) / ymy;
        let res: f64 = mx.iter().zip(&my).map(|(a, b)| (a / theta - b).powi(2)).sum::<f64>().sqrt() / dot(&my, &my).sqrt();
        x = y;
        let s = 1.0 / ymy.sqrt();
        x.iter_mut().for_each(|v| *v *= s);
        mx = my.into_iter().map(|v| v * s).collect();
        if ((theta - theta_prev) / theta).abs() < opts.tol && res < opts.tol.sqrt() {
            return Ok(Eigenpair { value: theta, vector: x, iterations: it });
        }
        theta_prev = theta;
    }
    Err(EigenError::NotConverged { iterations: opts.max_iter, estimate: theta_prev, vector: x })
}

/// Largest eigenvalue of `A x = θ M x` by forward iteration with `M`-solves.
pub fn power_largest<A, M, S>(n: usize, apply_a: A, apply_m: M, mut solve_m: S, opts: &EigenOptions) -> Result<Eigenpair, EigenError>
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
    S: FnMut(&[f64]) -> Vec<f64>,
{
    if n == 0 {
        return Err(EigenError::Empty);
    }
    let mut x = start_vector(n);
    let mx = apply_m(&x);
    m_normalize(&mut x, &mx)?;
    let mut theta_prev = f64::NAN;
    for it in 1..=opts.max_iter {
        let ax = apply_a(&x);
        let theta = dot(&x, &ax);
        let y = solve_m(&ax);
        let my = apply_m(&y);
        // residual of the current pair: ‖y − θx‖_M relative to ‖y‖_M
        let ymy = dot(&y, &my);
        let cross = dot(&x, &ax);
        let res2 = (ymy - 2.0 * theta * cross + theta * theta).max(0.0);
        let res = res2.sqrt() / ymy.sqrt().max(f64::MIN_POSITIVE);
        if ymy <= 0.0 {
            return Err(EigenError::Indefinite(ymy));
        }
        x = y.iter().map(|v| v / ymy.sqrt()).collect();
        if theta_prev.is_finite() && ((theta - theta_prev) / theta).abs() < opts.tol && res < opts.tol.sqrt() {
            return Ok(Eigenpair { value: theta, vector: x, iterations: it });
        }
        theta_prev = theta;
    }
    Err(EigenError::NotConverged { iterations: opts.max_iter, estimate: theta_prev, vector: x })
}

/// `(H A H)[1.., 1..]` with `H` the Householder reflector mapping `w` to a
/// multiple of `e₀`: the form restricted to `w⊥` in an orthonormal basis.
pub fn restrict_to_complement(a: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let n = w.len();
    let nrm = norm2(w);
    let mut v = w.to_vec();
    v[0] += if w[0] >= 0.0 { nrm } else { -nrm };
    let vv = dot(&v, &v);
    let apply_left = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut out = m.clone();
        for j in 0..n {
            let proj: f64 = (0..n).map(|i| v[i] * m[i][j]).sum::<f64>() * 2.0 / vv;
            for i in 0..n {
                out[i][j] -= proj * v[i];
            }
        }
        out
    };
    let ha = apply_left(&a.to_vec());
    let hat: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| ha[i][j]).collect()).collect();
    let hah_t = apply_left(&hat);
    // H A H is symmetric; average away rounding asymmetry
    (1..n).map(|i| (1..n).map(|j| 0.5 * (hah_t[i][j] + hah_t[j][i])).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: Vec<f64>) -> impl Fn(&[f64]) -> Vec<f64> {
        move |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect()
    }

    fn ident(x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    #[test]
    fn diagonal_smallest() {
        let solve = |b: &[f64]| vec![b[0] / 1.0, b[1] / 2.0, b[2] / 3.0];
        let e = inverse_power_smallest(3, solve, ident, &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_pencil() {
        let m = diag(vec![2.0, 5.0, 7.0, 1.5]);
        let solve = |b: &[f64]| vec![b[0] / 2.0, b[1] / 5.0, b[2] / 7.0, b[3] / 1.5];
        let e = inverse_power_smallest(4, solve, &m, &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = power_largest(4, &m, &m, solve, &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_largest() {
        let a = diag(vec![1.0, 2.0, 3.0]);
        let e = power_largest(3, a, ident, |b: &[f64]| b.to_vec(), &EigenOptions::default()).unwrap();
        assert!((e.value - 3.0).abs() < 1e-5);
        let a = diag(vec![4.0, 2.0, 6.0]);
        let m = diag(vec![2.0, 1.0, 1.0]);
        let e = power_largest(3, a, m, |b: &[f64]| vec![b[0] / 2.0, b[1], b[2]], &EigenOptions::default()).unwrap();
        assert!((e.value - 6.0).abs() < 1e-5);
    }

    /// Linear P1 stiffness vs consistent mass on (0,1) with Dirichlet ends:
    /// the smallest eigenvalue approximates π².
    #[test]
    fn laplacian_1d_smallest_is_pi_squared() {
        let n = 32usize;
        let h = 1.0 / n as f64;
        let m_int = n - 1;
        let stiff = |x: &[f64]| -> Vec<f64> {
            (0..m_int)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { 0.0 };
                    let r = if i + 1 < m_int { x[i + 1] } else { 0.0 };
                    (2.0 * x[i] - l - r) / h
                })
                .collect()
        };
        let mass = |x: &[f64]| -> Vec<f64> {
            (0..m_int)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { 0.0 };
                    let r = if i + 1 < m_int { x[i + 1] } else { 0.0 };
                    h * (4.0 * x[i] + l + r) / 6.0
                })
                .collect()
        };
        // Thomas algorithm for the tridiagonal stiffness
        let solve = |b: &[f64]| -> Vec<f64> {
            let a = -1.0 / h;
            let d = 2.0 / h;
            let mut c = vec![0.0; m_int];
            let mut g = vec![0.0; m_int];
            c[0] = a / d;
            g[0] = b[0] / d;
            for i in 1..m_int {
                let den = d - a * c[i - 1];
                c[i] = a / den;
                g[i] = (b[i] - a * g[i - 1]) / den;
            }
            let mut x = vec![0.0; m_int];
            x[m_int - 1] = g[m_int - 1];
            for i in (0..m_int - 1).rev() {
                x[i] = g[i] - c[i] * x[i + 1];
            }
            x
        };
        let e = inverse_power_smallest(m_int, solve, mass, &EigenOptions::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((e.value - pi2).abs() / pi2 < 0.01, "{}", e.value);
        let ax = stiff(&e.vector);
        let mx = mass(&e.vector);
        let res: f64 = ax.iter().zip(&mx).map(|(a, m)| (a - e.value * m).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-2 * e.value);
    }

    /// Dense oracle: Cholesky-reduce the pencil and take the symmetric
    /// eigenvalues.
    fn dense_pencil_extremes(a: &[Vec<f64>], m: &[Vec<f64>]) -> (f64, f64) {
        use faer::{Mat, Side};
        let n = a.len();
        let mm = Mat::from_fn(n, n, |i, j| m[i][j]);
        let l = mm.llt(Side::Lower).unwrap().L().to_owned();
        let am = Mat::from_fn(n, n, |i, j| a[i][j]);
        // L⁻¹ column by column via forward substitution
        let mut linv = Mat::<f64>::zeros(n, n);
        for c in 0..n {
            for i in 0..n {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = (0..i).map(|k| l[(i, k)] * linv[(k, c)]).sum();
                linv[(i, c)] = (rhs - s) / l[(i, i)];
            }
        }
        let c = &linv * &am * linv.transpose();
        let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
        let ev = c.self_adjoint_eigenvalues(Side::Lower).unwrap();
        let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// 1D pencil: P1 stiffness against a mass matrix weighted by 1/x² on
    /// a graded grid, compared with the dense oracle.
    #[test]
    fn weighted_pencil_matches_dense_oracle() {
        use crate::linalg::DenseCholesky;
        let n = 120usize;
        let nodes: Vec<f64> = (0..=n + 1).map(|i| 0.05 + (i as f64 / (n + 1) as f64).powi(2)).collect();
        let mut s = vec![vec![0.0; n]; n];
        let mut w = vec![vec![0.0; n]; n];
        for e in 0..=n {
            let (x0, x1) = (nodes[e], nodes[e + 1]);
            let h = x1 - x0;
            // two-point Gauss for the weighted mass
            let g = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
            let dofs = [e.checked_sub(1), if e < n { Some(e) } else { None }];
            for (a, ia) in dofs.iter().enumerate() {
                for (b, ib) in dofs.iter().enumerate() {
                    let (Some(i), Some(j)) = (ia, ib) else { continue };
                    let sign = if a == b { 1.0 } else { -1.0 };
                    s[*i][*j] += sign / h;
                    for t in g {
                        let x = x0 + t * h;
                        let pa = if a == 0 { 1.0 - t } else { t };
                        let pb = if b == 0 { 1.0 - t } else { t };
                        w[*i][*j] += 0.5 * h * pa * pb / (x * x);
                    }
                }
            }
        }
        let chol = DenseCholesky::factor(&s).unwrap();
        let mv = |m: &Vec<Vec<f64>>, x: &[f64]| -> Vec<f64> { m.iter().map(|r| dot(r, x)).collect() };
        let e = power_largest(n, |x| mv(&w, x), |x| mv(&s, x), |b| chol.solve(b), &EigenOptions { tol: 1e-12, max_iter: 200_000 }).unwrap();
        let (_, hi) = dense_pencil_extremes(&w, &s);
        assert!((e.value - hi).abs() / hi < 1e-6, "{} vs {}", e.value, hi);
        let wc = DenseCholesky::factor(&w).unwrap();
        let e = inverse_power_smallest(n, |b| wc.solve(b), |x| mv(&s, x), &EigenOptions { tol: 1e-12, max_iter: 200_000 }).unwrap();
        let (lo, _) = dense_pencil_extremes(&w, &s);
        assert!((e.value - lo).abs() / lo < 1e-6, "{} vs {}", e.value, lo);
    }

    #[test]
    fn cap_is_reported() {
        let solve = |b: &[f64]| vec![b[0], b[1] / 1.5];
        let opts = EigenOptions { tol: 1e-14, max_iter: 3 };
        assert!(matches!(inverse_power_smallest(2, solve, ident, &opts), Err(EigenError::NotConverged { .. })));
    }

    #[test]
    fn householder_restriction_removes_weight_direction() {
        let a = vec![vec![2.0, 0.5, 0.0], vec![0.5, 3.0, 0.1], vec![0.0, 0.1, 1.0]];
        let w = [1.0, 2.0, 2.0];
        let r = restrict_to_complement(&a, &w);
        assert_eq!(r.len(), 2);
        // trace of the restriction = trace(A) − wᵀAw/wᵀw
        let waw: f64 = (0..3).map(|i| (0..3).map(|j| w[i] * a[i][j] * w[j]).sum::<f64>()).sum();
        let tr = 6.0 - waw / 9.0;
        assert!((r[0][0] + r[1][1] - tr).abs() < 1e-13);
    }

}
