use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::sparse::{norm2, CsrMatrix};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { got: usize, expected: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("matrix is numerically singular")]
    Singular { near_null: Vec<f64> },
    #[error("relative residual {achieved:.3e} exceeds the contract {required:.1e}")]
    ResidualContract { achieved: f64, required: f64, x: Vec<f64> },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Required relative residual `‖Mx − b‖ / ‖b‖`.
    pub tol: f64,
    pub max_refinements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_refinements: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    /// Solution rounded to `f64`.
    pub x: Vec<f64>,
    /// Low-order part: the refined solution is `x + x_tail` in double-double.
    pub x_tail: Vec<f64>,
    /// `‖Mx − b‖/‖b‖` of the refined solution, evaluated without rounding loss.
    pub relative_residual: f64,
    /// Same for the rounded `x` alone. For fourth-order systems this is bounded
    /// below by about `ε‖|M||x|‖/‖b‖`, which can exceed the contract.
    pub rounded_residual: f64,
    pub refinements: usize,
}

fn to_faer(m: &CsrMatrix) -> Result<SparseColMat<usize, f64>, SolveError> {
    let trips: Vec<Triplet<usize, usize, f64>> = m.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(m.nrows(), m.ncols(), &trips)
        .map_err(|e| SolveError::Factorization(format!("{e:?}")))
}

fn col_from(v: &[f64]) -> Col<f64> {
    Col::from_fn(v.len(), |i| v[i])
}

fn vec_from(c: &Col<f64>) -> Vec<f64> {
    (0..c.nrows()).map(|i| c[i]).collect()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `b − M(hi + lo)` with error-free products and compensated row sums,
/// rounded to `f64` at the end.
fn residual_dd(m: &CsrMatrix, hi: &[f64], lo: &[f64], b: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| {
            let (mut s, mut c) = (b[i], 0.0);
            for (j, v) in m.row(i) {
                let (p, e) = two_prod(-v, hi[j]);
                let (s2, e2) = two_sum(s, p);
                s = s2;
                c += e + e2 - v * lo[j];
            }
            s + c
        })
        .collect()
}

fn relative(r: &[f64], b: &[f64]) -> f64 {
    let bn = norm2(b);
    if bn == 0.0 {
        norm2(r)
    } else {
        norm2(r) / bn
    }
}

/// A reusable sparse LU factorization (row pivoting, fill-reducing column
/// ordering). Solves refine in double-double against the original matrix.
pub struct SparseLu<'a> {
    matrix: &'a CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl<'a> SparseLu<'a> {
    pub fn factor(matrix: &'a CsrMatrix) -> Result<Self, SolveError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SolveError::NotSquare(matrix.nrows(), matrix.ncols()));
        }
        let fm = to_faer(matrix)?;
        let lu = fm.sp_lu().map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
        Ok(Self { matrix, lu })
    }

    /// One application of the factors, no refinement.
    pub fn apply_inverse(&self, b: &[f64]) -> Vec<f64> {
        vec_from(&self.lu.solve(&col_from(b)))
    }

    pub fn solve(&self, b: &[f64], opts: &SolverOptions) -> Result<Solved, SolveError> {
        let n = self.matrix.nrows();
        if b.len() != n {
            return Err(SolveError::RhsLength { got: b.len(), expected: n });
        }
        if norm2(b) == 0.0 {
            return Ok(Solved { x: vec![0.0; n], x_tail: vec![0.0; n], relative_residual: 0.0, rounded_residual: 0.0, refinements: 0 });
        }
        let mut hi = self.apply_inverse(b);
        if hi.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::Singular { near_null: near_null_vector(self.matrix) });
        }
        let mut lo = vec![0.0; n];
        let mut r = residual_dd(self.matrix, &hi, &lo, b);
        let mut rel = relative(&r, b);
        let mut refinements = 0;
        while rel > opts.tol && refinements < opts.max_refinements {
            let dx = self.apply_inverse(&r);
            if dx.iter().any(|v| !v.is_finite()) {
                break;
            }
            let (mut h2, mut l2) = (hi.clone(), lo.clone());
            for i in 0..n {
                let (s, e) = two_sum(h2[i], dx[i]);
                let (s, t) = two_sum(s, l2[i] + e);
                h2[i] = s;
                l2[i] = t;
            }
            let r2 = residual_dd(self.matrix, &h2, &l2, b);
            let rel2 = relative(&r2, b);
            refinements += 1;
            if rel2 >= rel {
                break;
            }
            (hi, lo, r, rel) = (h2, l2, r2, rel2);
        }
        if rel > opts.tol {
            if rel > 1e-2 {
                return Err(SolveError::Singular { near_null: near_null_vector(self.matrix) });
            }
            return Err(SolveError::ResidualContract { achieved: rel, required: opts.tol, x: hi });
        }
        let rounded_residual = relative(&residual_dd(self.matrix, &hi, &vec![0.0; n], b), b);
        Ok(Solved { x: hi, x_tail: lo, relative_residual: rel, rounded_residual, refinements })
    }
}

/// Solves a square (typically symmetric indefinite) sparse system and
/// enforces the relative-residual contract.
pub fn solve_indefinite(m: &CsrMatrix, rhs: &[f64], opts: &SolverOptions) -> Result<Solved, SolveError> {
    SparseLu::factor(m)?.solve(rhs, opts)
}

/// A few steps of inverse iteration on a slightly shifted copy of `m`.
fn near_null_vector(m: &CsrMatrix) -> Vec<f64> {
    let n = m.nrows();
    let shift = 1e-10 * m.norm_inf().max(f64::MIN_POSITIVE);
    let mut entries: Vec<(usize, usize, f64)> = m.iter().collect();
    entries.extend((0..n).map(|i| (i, i, shift)));
    let shifted = CsrMatrix::from_triplets(n, n, entries);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract()).collect();
    let Ok(fm) = to_faer(&shifted) else { return x };
    let Ok(lu) = fm.sp_lu() else { return x };
    for _ in 0..3 {
        let y = vec_from(&lu.solve(&col_from(&x)));
        let nrm = norm2(&y);
        if !nrm.is_finite() || nrm == 0.0 {
            break;
        }
        x = y.iter().map(|v| v / nrm).collect();
    }
    x
}

/// Dense Cholesky factor for the small SPD systems of the eigenvalue probes.
pub struct DenseCholesky {
    llt: faer::linalg::solvers::Llt<f64>,
    n: usize,
}

impl DenseCholesky {
    pub fn factor(a: &[Vec<f64>]) -> Result<Self, SolveError> {
        let n = a.len();
        let m = Mat::from_fn(n, n, |i, j| a[i][j]);
        let llt = m.llt(Side::Lower).map_err(|_| SolveError::NotPositiveDefinite)?;
        Ok(Self { llt, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        vec_from(&self.llt.solve(&col_from(b)))
    }
}

/// Sparse Cholesky for SPD matrices (used for Gram matrices in the probes).
pub struct SparseCholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn factor(m: &CsrMatrix) -> Result<Self, SolveError> {
        let fm = to_faer(m)?;
        let llt = fm.sp_cholesky(Side::Lower).map_err(|_| SolveError::NotPositiveDefinite)?;
        Ok(Self { llt })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        vec_from(&self.llt.solve(&col_from(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let s = solve_indefinite(&CsrMatrix::identity(3), &b, &SolverOptions::default()).unwrap();
        assert_eq!(s.x, b);
    }

    #[test]
    fn two_by_two_indefinite() {
        let m = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, -1.0]]);
        let s = solve_indefinite(&m, &[1.0, 0.0], &SolverOptions::default()).unwrap();
        assert!((s.x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        match solve_indefinite(&m, &[1.0, 0.0], &SolverOptions::default()) {
            Err(SolveError::Singular { near_null }) => {
                let r = m.mul_vec(&near_null);
                assert!(norm2(&r) < 1e-6 * norm2(&near_null));
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    /// SPD block bordered by a random coupling block with negative
    /// definite (2,2) block: symmetric quasi-definite.
    #[test]
    fn quasi_definite_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = rng.gen_range(4..30);
            let m = rng.gen_range(1..n);
            let mut a = vec![vec![0.0; n + m]; n + m];
            let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
                }
            }
            for i in 0..m {
                for j in 0..n {
                    if rng.gen_bool(0.4) {
                        let v = rng.gen_range(-1.0..1.0);
                        a[n + i][j] = v;
                        a[j][n + i] = v;
                    }
                }
                a[n + i][n + i] = -rng.gen_range(1e-6..1.0);
            }
            let mat = CsrMatrix::from_dense(&a);
            let b: Vec<f64> = (0..n + m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = solve_indefinite(&mat, &b, &SolverOptions::default()).unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            assert!(s.relative_residual <= 1e-10);
        }
    }

    #[test]
    fn dense_cholesky_solves() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let c = DenseCholesky::factor(&a).unwrap();
        let x = c.solve(&[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(DenseCholesky::factor(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }
}
