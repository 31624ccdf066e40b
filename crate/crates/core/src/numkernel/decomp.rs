use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Side;
use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{shape_err, Error, Result};

/// Singular value decomposition `A = U diag(s) V^†` with `s` descending.
///
/// `u` is `m x k`, `v` is `n x k` with `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdFactors {
    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.singular_values.iter().take_while(|&&s| s > tol).count()
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Pseudoinverse keeping singular values strictly above `cutoff`.
    pub fn pinv(&self, cutoff: f64) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = ComplexMatrix::zeros(n, m);
        for (k, &s) in self.singular_values.iter().enumerate() {
            if s <= cutoff || s == 0.0 {
                break;
            }
            let inv = 1.0 / s;
            for i in 0..n {
                let vik = self.v[(i, k)] * inv;
                for j in 0..m {
                    out[(i, j)] += vik * self.u[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Cutoff used when no tolerance is given: `max(m, n) * eps * s_max`.
    pub fn default_cutoff(&self) -> f64 {
        let dim = self.u.rows().max(self.v.rows()) as f64;
        dim * f64::EPSILON * self.max_singular_value()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdFactors> {
    if !a.is_finite() {
        return Err(Error::NumericalFailure("svd of a non-finite matrix".into()));
    }
    let raw = a
        .to_faer()
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("svd did not converge: {e:?}")))?;
    let (u, v) = (raw.U(), raw.V());
    let s = raw.S().column_vector();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));

    let u_sorted = ComplexMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_sorted = ComplexMatrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]);
    Ok(SvdFactors {
        u: u_sorted,
        singular_values: order.iter().map(|&k| s[k].re).collect(),
        v: v_sorted,
    })
}

/// Moore–Penrose pseudoinverse.
///
/// `rank_tol` is relative to the largest singular value; `0.0` selects
/// the default cutoff `max(m, n) * eps * s_max`.
pub fn pinv(a: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let f = svd(a)?;
    let cutoff = cutoff(&f, rank_tol)?;
    Ok(f.pinv(cutoff))
}

fn cutoff(f: &SvdFactors, rank_tol: f64) -> Result<f64> {
    if rank_tol < 0.0 || !rank_tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "rank tolerance {rank_tol} must be finite and >= 0"
        )));
    }
    Ok(if rank_tol == 0.0 {
        f.default_cutoff()
    } else {
        rank_tol * f.max_singular_value()
    })
}

/// Orthonormal basis of the column space, as columns of the result.
/// Returns `None` for the zero matrix.
pub fn range_basis(a: &ComplexMatrix, rank_tol: f64) -> Result<Option<ComplexMatrix>> {
    let f = svd(a)?;
    let r = f.rank(cutoff(&f, rank_tol)?);
    if r == 0 {
        return Ok(None);
    }
    Ok(Some(f.u.submatrix(0, 0, a.rows(), r)))
}

/// Orthonormal basis of the right null space, as columns of the result.
/// Returns `None` when the null space is trivial.
pub fn nullspace(a: &ComplexMatrix, rank_tol: f64) -> Result<Option<ComplexMatrix>> {
    let (m, n) = a.shape();
    // A wide matrix is padded with zero rows so the SVD yields a full V.
    let padded;
    let src = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..n {
                p[(i, j)] = a[(i, j)];
            }
        }
        padded = p;
        &padded
    } else {
        a
    };
    let f = svd(src)?;
    let r = f.rank(cutoff(&f, rank_tol)?);
    if r == n {
        return Ok(None);
    }
    Ok(Some(f.v.submatrix(0, r, n, n - r)))
}

/// Inverse via LU with full pivoting.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(shape_err("inverse", format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let lu = a.to_faer().full_piv_lu();
    let out = ComplexMatrix::from_faer(lu.inverse().as_ref());
    if !out.is_finite() {
        return Err(Error::NumericalFailure("matrix is singular".into()));
    }
    Ok(out)
}

/// Solves `A X = B`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(shape_err(
            "solve",
            format!("{}x{} system with {}x{} right-hand side", a.rows(), a.cols(), b.rows(), b.cols()),
        ));
    }
    let x = a.to_faer().full_piv_lu().solve(b.to_faer());
    let out = ComplexMatrix::from_faer(x.as_ref());
    if !out.is_finite() {
        return Err(Error::NumericalFailure("matrix is singular".into()));
    }
    Ok(out)
}

/// Two-norm condition number `s_max / s_min`; infinite for singular input.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(shape_err("condition_number", "matrix is not square"));
    }
    let f = svd(a)?;
    let smin = f.singular_values.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(f.max_singular_value() / smin)
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(shape_err("eigenvalues", "matrix is not square"));
    }
    if !a.is_finite() {
        return Err(Error::NumericalFailure("eigenvalues of a non-finite matrix".into()));
    }
    a.to_faer()
        .eigenvalues()
        .map_err(|e| Error::NumericalFailure(format!("eigenvalue iteration did not converge: {e:?}")))
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues
/// and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(shape_err("hermitian_eigen", "matrix is not square"));
    }
    let scale = a.max_abs().max(1.0);
    if !a.is_hermitian(1e-10 * scale) {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    // Symmetrized so the solver sees an exactly Hermitian input.
    let sym = (a + &a.adjoint()).scale_real(0.5);
    let eig = sym
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("Hermitian eigensolver did not converge: {e:?}")))?;
    let ev = eig.S().column_vector();
    let mut order: Vec<usize> = (0..ev.nrows()).collect();
    order.sort_by(|&i, &j| ev[i].re.total_cmp(&ev[j].re));
    let vals = order.iter().map(|&k| ev[k].re).collect();
    let n = a.rows();
    let u = eig.U();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((vals, vecs))
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|(v, _)| v)
}
