//! Differential entropy and non-Gaussianness of gridded densities, in nats.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::density::DensityGrid;
use crate::error::{Error, Result};

/// Samples below this value count as zero in entropy integrands.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Divergence of a law from the Gaussian with the same mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonGaussianness {
    /// `D(f ‖ N(μ, σ²))` in nats.
    pub value: f64,
    /// Differential entropy of `f`.
    pub entropy: f64,
    /// Variance of the matched Gaussian (measured on the grid).
    pub matched_variance: f64,
}

impl NonGaussianness {
    /// Entropy of the matched Gaussian, `½ ln(2πeσ²)`.
    pub fn gaussian_entropy(&self) -> f64 {
        gaussian_entropy(self.matched_variance)
    }
}

pub fn gaussian_entropy(variance: f64) -> f64 {
    0.5 * (2.0 * PI * E * variance).ln()
}

/// Trapezoid integral of `-f ln f`.
pub fn differential_entropy(f: &DensityGrid) -> f64 {
    let spec = f.spec();
    let integrand: Vec<f64> = f
        .values()
        .iter()
        .map(|&v| if v < DENSITY_FLOOR { 0.0 } else { -v * v.ln() })
        .collect();
    spec.trapezoid(&integrand)
}

/// `D(f ‖ g)` against the Gaussian `g` matching the grid's measured mean and
/// variance.
///
/// The divergence is accumulated as `∫ [f ln(f/g) - f + g]`, whose integrand
/// is pointwise nonnegative and of second order in `f - g`. On the grid this
/// equals `½ ln(2πeσ²) - h(f)` identically, but it does not lose the small
/// difference to cancellation between two O(1) entropies.
pub fn non_gaussianness(f: &DensityGrid) -> Result<NonGaussianness> {
    let var = f.variance();
    let resolvable = 1e-12 * f.spec().dx().powi(2);
    if !(var > resolvable) || !var.is_finite() {
        return Err(Error::DegenerateDensity(var));
    }
    let spec = f.spec();
    let mu = f.mean();
    let norm = 1.0 / (2.0 * PI * var).sqrt();
    let integrand: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let z = spec.x(k) - mu;
            let g = norm * (-0.5 * z * z / var).exp();
            if v < DENSITY_FLOOR {
                g
            } else if g < DENSITY_FLOOR {
                v * (v.ln() - g.ln()) - v + g
            } else {
                g * relative_entropy_kernel((v - g) / g)
            }
        })
        .collect();
    Ok(NonGaussianness {
        value: spec.trapezoid(&integrand),
        entropy: differential_entropy(f),
        matched_variance: var,
    })
}

/// `(1 + d) ln(1 + d) - d`, accurate for small `|d|`.
fn relative_entropy_kernel(d: f64) -> f64 {
    if d <= -1.0 {
        -d
    } else if d.abs() < 1e-3 {
        // d²/2 - d³/6 + d⁴/12 - d⁵/20
        let d2 = d * d;
        d2 * (0.5 - d / 6.0 + d2 / 12.0 - d2 * d / 20.0)
    } else {
        (1.0 + d) * d.ln_1p() - d
    }
}
