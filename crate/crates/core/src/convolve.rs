//! Densities of normalized sums `S_n = n^{-1/2}·(X_1 + … + X_n)`.
//!
//! The n-fold convolution is never formed on the grid: the characteristic
//! function `φ(t/√n)^n` is evaluated analytically on the conjugate frequency
//! axis and inverted once.

use num_complex::Complex64;

use crate::density::{pdf_of, DensityGrid, GridSpec, SourceDistribution};
use crate::error::{Error, Result};
use crate::spectral;

/// Characteristic function of `S_n`.
pub fn sum_characteristic_function(dist: &SourceDistribution, n: u32, t: f64) -> Complex64 {
    if n == 1 {
        return dist.characteristic_function(t);
    }
    dist.characteristic_function(t / (n as f64).sqrt()).powu(n)
}

/// Derivative of the characteristic function of `S_n`.
pub fn sum_characteristic_function_derivative(
    dist: &SourceDistribution,
    n: u32,
    t: f64,
) -> Complex64 {
    if n == 1 {
        return dist.characteristic_function_derivative(t);
    }
    let root = (n as f64).sqrt();
    let u = t / root;
    root * dist.characteristic_function(u).powu(n - 1) * dist.characteristic_function_derivative(u)
}

/// Density of `S_n` on `spec`. `n = 1` renders the law directly.
pub fn normalized_sum_density(
    dist: &SourceDistribution,
    n: u32,
    spec: &GridSpec,
) -> Result<DensityGrid> {
    dist.ensure_proper()?;
    if !dist.has_density() {
        return Err(Error::NoDensity(dist.name()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "summand count must be positive".into(),
        ));
    }
    if n == 1 {
        return pdf_of(dist, spec);
    }
    let cf = |t: f64| sum_characteristic_function(dist, n, t);
    let nyq = cf(spectral::nyquist(spec)).norm();
    if nyq > spectral::NYQUIST_LIMIT {
        return Err(Error::GridTooCoarse { magnitude: nyq });
    }
    let values = spectral::invert(spec, cf);
    check_edges(spec, &values)?;
    DensityGrid::from_values(*spec, values)
}

/// Density of the independent sum of two gridded densities.
pub fn convolve_densities(f: &DensityGrid, g: &DensityGrid) -> Result<DensityGrid> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch);
    }
    let spec = f.spec();
    let ff = spectral::forward(spec, f.values());
    let gg = spectral::forward(spec, g.values());
    let product = ff.into_iter().zip(gg).map(|(a, b)| a * b).collect();
    let values = spectral::invert_bins(spec, product);
    check_edges(spec, &values)?;
    DensityGrid::from_values(*spec, values)
}

/// Clips negative samples (spectral ringing) and rescales to unit mass.
/// The clipped mass is kept on the result; see [`DensityGrid::degradation`].
pub fn renormalize(spec: &GridSpec, values: Vec<f64>) -> Result<DensityGrid> {
    DensityGrid::from_values(*spec, values)
}

pub(crate) fn check_edges(spec: &GridSpec, values: &[f64]) -> Result<()> {
    let edge = spectral::edge_mass(spec, values);
    if edge > spectral::EDGE_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            half_width: spec.half_width(),
            detail: format!("mass {edge:.3e} near the window edge indicates wraparound"),
        });
    }
    Ok(())
}
