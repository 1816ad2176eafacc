//! Ordinary least squares for small polynomial models.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PolyFit {
    /// Coefficients, constant term first.
    pub coeffs: Vec<f64>,
    /// Standard errors of the coefficients.
    pub stderr: Vec<f64>,
}

/// Fits `y ≈ Σ c_j x^j`, `j = 0..=degree`.
pub(crate) fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    let rows = x.len();
    let cols = degree + 1;
    if rows != y.len() || rows <= cols {
        return Err(Error::InvalidParameter(format!(
            "{rows} points cannot fit a degree-{degree} polynomial with residual freedom"
        )));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-300)
        .map_err(|e| Error::NumericalDegradation(format!("least squares failed: {e}")))?;
    let resid = &b - &a * &c;
    let sigma2 = resid.norm_squared() / (rows - cols) as f64;
    let cov = (a.transpose() * &a)
        .try_inverse()
        .ok_or_else(|| Error::NumericalDegradation("singular normal equations".into()))?;
    let stderr = (0..cols)
        .map(|j| (sigma2 * cov[(j, j)]).max(0.0).sqrt())
        .collect();
    Ok(PolyFit {
        coeffs: c.iter().copied().collect(),
        stderr,
    })
}
