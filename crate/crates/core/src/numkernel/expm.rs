use super::matrix::ComplexMatrix;
use crate::error::{shape_err, Error, Result};

const MAX_TAYLOR_TERMS: usize = 40;

/// Matrix exponential by scaling and squaring around a Taylor core.
///
/// The scaled matrix has one-norm at most 1/2, where the truncated series
/// reaches machine precision within about 20 terms.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(shape_err("expm", format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::NumericalFailure("expm of a non-finite matrix".into()));
    }
    let n = a.rows();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=MAX_TAYLOR_TERMS {
        term = term.matmul(&scaled).scale_real(1.0 / k as f64);
        sum += &term;
        if term.norm_one() <= f64::EPSILON * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    if !sum.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "expm overflowed (input one-norm {norm:.3e})"
        )));
    }
    Ok(sum)
}
