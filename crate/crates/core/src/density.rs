//! Source laws, their analytic moments and characteristic functions, and the
//! uniform real grid every density in the crate is sampled on.
//!
//! A [`SourceDistribution`] is an affine image `location + scale·Z` of a
//! canonical shape `Z` with mean zero and unit variance, so standardizing a
//! law only resets the affine part and never changes its family.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 1 << 14;
/// Smallest admissible grid.
pub const MIN_POINTS: usize = 1 << 8;
/// Probability mass a rendered law may lose outside the grid window.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;
/// Clipped (negative) mass above which a grid carries a degradation warning.
pub const CLIP_WARNING: f64 = 1e-6;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const LAPLACE_B: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Tail mass targeted when sizing a default grid: half the rendering limit.
const DEFAULT_TAIL: f64 = 0.5 * TAIL_MASS_LIMIT;

/// One component of a Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Canonical (zero-mean, unit-variance) shape of a source law.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gaussian,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// Laplace with scale `1/√2`.
    Laplace,
    /// `E - 1` with `E ~ Exp(1)`.
    ExponentialCentered,
    /// `±1` with probability one half each.
    Rademacher,
    /// Mixture whose components are already standardized as a whole.
    GaussianMixture(Vec<MixtureComponent>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Uniform => "uniform",
            Family::Laplace => "laplace",
            Family::ExponentialCentered => "exponential-centered",
            Family::Rademacher => "rademacher",
            Family::GaussianMixture(_) => "gaussian-mixture",
        }
    }

    fn pdf(&self, z: f64) -> f64 {
        match self {
            Family::Gaussian => std_normal_pdf(z),
            Family::Uniform => {
                let height = 0.5 / SQRT_3;
                match z.abs().partial_cmp(&SQRT_3) {
                    Some(std::cmp::Ordering::Less) => height,
                    Some(std::cmp::Ordering::Equal) => 0.5 * height,
                    _ => 0.0,
                }
            }
            Family::Laplace => (-z.abs() / LAPLACE_B).exp() / (2.0 * LAPLACE_B),
            Family::ExponentialCentered => {
                if z > -1.0 {
                    (-(z + 1.0)).exp()
                } else if z == -1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Family::Rademacher => 0.0,
            Family::GaussianMixture(components) => components
                .iter()
                .map(|c| {
                    let sd = c.variance.sqrt();
                    c.weight * std_normal_pdf((z - c.mean) / sd) / sd
                })
                .sum(),
        }
    }

    /// Logarithm of the density, finite wherever the density is positive.
    fn ln_pdf(&self, z: f64) -> f64 {
        match self {
            Family::Gaussian => -0.5 * z * z - 0.5 * (2.0 * PI).ln(),
            Family::Laplace => -z.abs() / LAPLACE_B - (2.0 * LAPLACE_B).ln(),
            Family::ExponentialCentered if z > -1.0 => -(z + 1.0),
            Family::GaussianMixture(components) => {
                let terms: Vec<f64> = components
                    .iter()
                    .map(|c| {
                        let u = (z - c.mean) / c.variance.sqrt();
                        c.weight.ln() - 0.5 * u * u - 0.5 * (2.0 * PI * c.variance).ln()
                    })
                    .collect();
                let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
            }
            _ => self.pdf(z).ln(),
        }
    }

    /// `P(Z < lo) + P(Z > hi)` for `lo < hi`.
    fn tail_mass(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Family::Gaussian => std_normal_cdf(lo) + std_normal_cdf(-hi),
            Family::Uniform => {
                let below = ((lo + SQRT_3) / (2.0 * SQRT_3)).clamp(0.0, 1.0);
                let above = ((SQRT_3 - hi) / (2.0 * SQRT_3)).clamp(0.0, 1.0);
                below + above
            }
            Family::Laplace => {
                let side = |v: f64| {
                    if v <= 0.0 {
                        0.5 * (v / LAPLACE_B).exp()
                    } else {
                        1.0 - 0.5 * (-v / LAPLACE_B).exp()
                    }
                };
                side(lo) + (1.0 - side(hi))
            }
            Family::ExponentialCentered => {
                let cdf = |v: f64| {
                    if v <= -1.0 {
                        0.0
                    } else {
                        -(-(v + 1.0)).exp_m1()
                    }
                };
                cdf(lo) + (1.0 - cdf(hi))
            }
            Family::Rademacher => {
                let mut m = 0.0;
                if lo > -1.0 {
                    m += 0.5;
                }
                if hi < 1.0 {
                    m += 0.5;
                }
                m
            }
            Family::GaussianMixture(components) => components
                .iter()
                .map(|c| {
                    let sd = c.variance.sqrt();
                    c.weight
                        * (std_normal_cdf((lo - c.mean) / sd) + std_normal_cdf((c.mean - hi) / sd))
                })
                .sum(),
        }
    }

    fn cf(&self, u: f64) -> Complex64 {
        match self {
            Family::Gaussian => Complex64::new((-0.5 * u * u).exp(), 0.0),
            Family::Uniform => Complex64::new(sinc(SQRT_3 * u), 0.0),
            Family::Laplace => Complex64::new(1.0 / (1.0 + 0.5 * u * u), 0.0),
            Family::ExponentialCentered => Complex64::from_polar(1.0, -u) / Complex64::new(1.0, -u),
            Family::Rademacher => Complex64::new(u.cos(), 0.0),
            Family::GaussianMixture(components) => components
                .iter()
                .map(|c| {
                    Complex64::from_polar(c.weight * (-0.5 * c.variance * u * u).exp(), c.mean * u)
                })
                .sum(),
        }
    }

    fn cf_derivative(&self, u: f64) -> Complex64 {
        match self {
            Family::Gaussian => Complex64::new(-u * (-0.5 * u * u).exp(), 0.0),
            Family::Uniform => Complex64::new(SQRT_3 * sinc_derivative(SQRT_3 * u), 0.0),
            Family::Laplace => {
                let d = 1.0 + 0.5 * u * u;
                Complex64::new(-u / (d * d), 0.0)
            }
            Family::ExponentialCentered => {
                let d = Complex64::new(1.0, -u);
                -u * Complex64::from_polar(1.0, -u) / (d * d)
            }
            Family::Rademacher => Complex64::new(-u.sin(), 0.0),
            Family::GaussianMixture(components) => components
                .iter()
                .map(|c| {
                    let e = Complex64::from_polar(
                        c.weight * (-0.5 * c.variance * u * u).exp(),
                        c.mean * u,
                    );
                    e * Complex64::new(-c.variance * u, c.mean)
                })
                .sum(),
        }
    }

    /// Third and fourth (excess) cumulants of the canonical shape.
    fn cumulants(&self) -> (f64, f64) {
        match self {
            Family::Gaussian => (0.0, 0.0),
            Family::Uniform => (0.0, -1.2),
            Family::Laplace => (0.0, 3.0),
            Family::ExponentialCentered => (2.0, 6.0),
            Family::Rademacher => (0.0, -2.0),
            Family::GaussianMixture(components) => {
                let (m3, m4) = components.iter().fold((0.0, 0.0), |(m3, m4), c| {
                    let (mu, v) = (c.mean, c.variance);
                    (
                        m3 + c.weight * (mu.powi(3) + 3.0 * mu * v),
                        m4 + c.weight * (mu.powi(4) + 6.0 * mu * mu * v + 3.0 * v * v),
                    )
                });
                (m3, m4 - 3.0)
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Family::Uniform => (-SQRT_3, SQRT_3),
            Family::ExponentialCentered => (-1.0, f64::INFINITY),
            Family::Rademacher => (-1.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Points where the canonical density jumps.
    fn jumps(&self) -> Vec<f64> {
        match self {
            Family::Uniform => vec![-SQRT_3, SQRT_3],
            Family::ExponentialCentered => vec![-1.0],
            _ => Vec::new(),
        }
    }

    /// Points where the canonical density is not smooth (jumps and kinks).
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Family::Laplace => vec![0.0],
            _ => self.jumps(),
        }
    }

    /// Radius outside of which at most `tail` probability lies.
    fn tail_radius(&self, tail: f64) -> f64 {
        match self {
            Family::Gaussian => 8.0,
            Family::Uniform => SQRT_3,
            Family::Laplace => LAPLACE_B * (1.0 / tail).ln(),
            Family::ExponentialCentered => ((1.0 / tail).ln() - 1.0).max(1.0),
            Family::Rademacher => 1.0,
            Family::GaussianMixture(components) => components
                .iter()
                .map(|c| c.mean.abs() + 8.0 * c.variance.sqrt())
                .fold(0.0, f64::max),
        }
    }

    fn is_symmetric(&self) -> bool {
        match self {
            Family::ExponentialCentered => false,
            Family::GaussianMixture(components) => components.iter().all(|c| {
                components.iter().any(|d| {
                    (d.mean + c.mean).abs() < 1e-12
                        && (d.weight - c.weight).abs() < 1e-12
                        && (d.variance - c.variance).abs() < 1e-12
                })
            }),
            _ => true,
        }
    }
}

/// A source law `location + scale·Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    family: Family,
    location: f64,
    scale: f64,
}

/// Variance and higher cumulants of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub variance: f64,
    pub kappa3: f64,
    /// Fourth cumulant; equals the excess kurtosis for unit variance.
    pub kappa4: f64,
}

impl SourceDistribution {
    /// The canonical zero-mean, unit-variance member of `family`.
    pub fn standard(family: Family) -> Self {
        SourceDistribution {
            family,
            location: 0.0,
            scale: 1.0,
        }
    }

    /// Every built-in standardized law, including the default mixture.
    pub fn builtins() -> Vec<SourceDistribution> {
        vec![
            Self::standard(Family::Gaussian),
            Self::standard(Family::Uniform),
            Self::standard(Family::Laplace),
            Self::standard(Family::ExponentialCentered),
            Self::standard(Family::Rademacher),
            Self::default_mixture(),
        ]
    }

    /// Two-component skewed mixture, `0.25·N(-1.5, 0.25) + 0.75·N(0.5, 0.25)`,
    /// which already has zero mean and unit variance.
    pub fn default_mixture() -> Self {
        Self::gaussian_mixture(&[
            MixtureComponent {
                weight: 0.25,
                mean: -1.5,
                variance: 0.25,
            },
            MixtureComponent {
                weight: 0.75,
                mean: 0.5,
                variance: 0.25,
            },
        ])
        .expect("valid preset")
    }

    pub fn gaussian(mean: f64, variance: f64) -> Self {
        SourceDistribution {
            family: Family::Gaussian,
            location: mean,
            scale: variance.sqrt(),
        }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        SourceDistribution {
            family: Family::Uniform,
            location: 0.5 * (low + high),
            scale: (high - low) / (2.0 * SQRT_3),
        }
    }

    /// Laplace law with density `exp(-|x - location|/b) / 2b`.
    pub fn laplace(location: f64, b: f64) -> Self {
        SourceDistribution {
            family: Family::Laplace,
            location,
            scale: SQRT_2 * b,
        }
    }

    /// Exponential law with the given rate, not shifted.
    pub fn exponential(rate: f64) -> Self {
        SourceDistribution {
            family: Family::ExponentialCentered,
            location: 1.0 / rate,
            scale: 1.0 / rate,
        }
    }

    /// `±amplitude` with equal probability.
    pub fn rademacher(amplitude: f64) -> Self {
        SourceDistribution {
            family: Family::Rademacher,
            location: 0.0,
            scale: amplitude.abs(),
        }
    }

    pub fn gaussian_mixture(components: &[MixtureComponent]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        for c in components {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "mixture weight {} must be positive",
                    c.weight
                )));
            }
            if !(c.variance > 0.0 && c.variance.is_finite()) || !c.mean.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "mixture component N({}, {}) is not a proper Gaussian",
                    c.mean, c.variance
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        let mean = components.iter().map(|c| c.weight * c.mean).sum::<f64>() / total;
        let variance = components
            .iter()
            .map(|c| c.weight * (c.variance + (c.mean - mean).powi(2)))
            .sum::<f64>()
            / total;
        let sd = variance.sqrt();
        let canonical = components
            .iter()
            .map(|c| MixtureComponent {
                weight: c.weight / total,
                mean: (c.mean - mean) / sd,
                variance: c.variance / variance,
            })
            .collect();
        Ok(SourceDistribution {
            family: Family::GaussianMixture(canonical),
            location: mean,
            scale: sd,
        })
    }

    /// The law of `factor·X`.
    pub fn scaled(&self, factor: f64) -> Self {
        SourceDistribution {
            family: self.family.clone(),
            location: factor * self.location,
            scale: factor.abs() * self.scale,
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    pub fn mean(&self) -> f64 {
        self.location
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale
    }

    pub fn std_dev(&self) -> f64 {
        self.scale
    }

    pub fn has_density(&self) -> bool {
        !matches!(self.family, Family::Rademacher)
    }

    pub fn is_standardized(&self) -> bool {
        self.location == 0.0 && self.scale == 1.0
    }

    pub fn is_symmetric(&self) -> bool {
        self.location == 0.0 && self.family.is_symmetric()
    }

    pub(crate) fn ensure_proper(&self) -> Result<()> {
        let var = self.variance();
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::InvalidVariance(var));
        }
        if !self.location.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "location {} is not finite",
                self.location
            )));
        }
        Ok(())
    }

    /// Density at `x`; at a jump the mean of the one-sided limits.
    pub fn pdf(&self, x: f64) -> f64 {
        self.family.pdf((x - self.location) / self.scale) / self.scale
    }

    /// Natural logarithm of [`pdf`](Self::pdf), without underflow in the tails.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.family.ln_pdf((x - self.location) / self.scale) - self.scale.ln()
    }

    /// Characteristic function `E[exp(itX)]`.
    pub fn characteristic_function(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t * self.location) * self.family.cf(self.scale * t)
    }

    /// Derivative of the characteristic function, `E[iX exp(itX)]`.
    pub fn characteristic_function_derivative(&self, t: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, t * self.location);
        phase
            * (Complex64::new(0.0, self.location) * self.family.cf(self.scale * t)
                + self.scale * self.family.cf_derivative(self.scale * t))
    }

    pub fn moments(&self) -> MomentSummary {
        let (k3, k4) = self.family.cumulants();
        MomentSummary {
            variance: self.variance(),
            kappa3: k3 * self.scale.powi(3),
            kappa4: k4 * self.scale.powi(4),
        }
    }

    /// Closed support interval (possibly unbounded).
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.family.support();
        (
            self.location + self.scale * lo,
            self.location + self.scale * hi,
        )
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.family
            .jumps()
            .into_iter()
            .map(|z| self.location + self.scale * z)
            .collect()
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.family
            .breakpoints()
            .into_iter()
            .map(|z| self.location + self.scale * z)
            .collect()
    }

    /// Probability mass outside `[lo, hi]`.
    pub fn tail_mass_outside(&self, lo: f64, hi: f64) -> f64 {
        self.family.tail_mass(
            (lo - self.location) / self.scale,
            (hi - self.location) / self.scale,
        )
    }

    /// Radius around the origin containing all but `tail` of the mass.
    pub fn tail_radius(&self, tail: f64) -> f64 {
        self.location.abs() + self.scale * self.family.tail_radius(tail)
    }

    /// Atoms of a discrete law as `(point, probability)`.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self.family {
            Family::Rademacher => Some(vec![
                (self.location - self.scale, 0.5),
                (self.location + self.scale, 0.5),
            ]),
            _ => None,
        }
    }
}

/// Returns the zero-mean, unit-variance member of the same family.
pub fn standardize(dist: &SourceDistribution) -> Result<SourceDistribution> {
    dist.ensure_proper()?;
    Ok(SourceDistribution::standard(dist.family.clone()))
}

pub fn characteristic_function(dist: &SourceDistribution, t: f64) -> Complex64 {
    dist.characteristic_function(t)
}

pub fn moments(dist: &SourceDistribution) -> MomentSummary {
    dist.moments()
}

/// A uniform grid of `points` nodes spanning `[-half_width, half_width]`.
///
/// With an even node count the nodes sit at half-integer multiples of the
/// spacing, so the cell midpoints are the integer multiples `m·dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid half-width {half_width} must be positive"
            )));
        }
        if points < MIN_POINTS || !points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid points {points} must be a power of two no smaller than {MIN_POINTS}"
            )));
        }
        Ok(GridSpec { half_width, points })
    }

    /// Default grid for a law: half-width `max(10, 8σ + |μ|, tail radius)` at
    /// [`DEFAULT_POINTS`] nodes, nudged outward so the density's jumps fall on
    /// cell midpoints, where the trapezoid rule stays second-order accurate.
    pub fn for_law(dist: &SourceDistribution) -> Self {
        Self::for_law_with_points(dist, DEFAULT_POINTS)
    }

    pub fn for_law_with_points(dist: &SourceDistribution, points: usize) -> Self {
        let target = 10f64
            .max(8.0 * dist.std_dev() + dist.mean().abs())
            .max(dist.tail_radius(DEFAULT_TAIL));
        let spec = GridSpec {
            half_width: target,
            points,
        };
        spec.aligned_to(&dist.jumps())
    }

    /// Widens the grid (never shrinks it) so that the first nonzero point of
    /// `jumps` lands on a cell midpoint.
    pub fn aligned_to(self, jumps: &[f64]) -> Self {
        let Some(&anchor) = jumps.iter().find(|j| j.abs() > 0.0) else {
            return self;
        };
        let cells = (anchor.abs() / self.dx()).floor();
        if cells < 1.0 {
            return self;
        }
        let dx = anchor.abs() / cells;
        GridSpec {
            half_width: 0.5 * dx * (self.points - 1) as f64,
            points: self.points,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.points).map(move |k| -self.half_width + k as f64 * dx)
    }

    /// Trapezoid weight of node `k`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.points {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    /// Same window with twice the nodes.
    pub fn refined(&self) -> Self {
        GridSpec {
            half_width: self.half_width,
            points: 2 * self.points,
        }
    }

    /// Same node count with the window scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        GridSpec {
            half_width: self.half_width * factor,
            points: self.points,
        }
    }

    pub(crate) fn trapezoid(&self, values: &[f64]) -> f64 {
        let dx = self.dx();
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        dx * (interior + 0.5 * (values[0] + values[n - 1]))
    }
}

/// A probability density sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    values: Vec<f64>,
    mean: f64,
    variance: f64,
    clipped_mass: f64,
}

impl DensityGrid {
    /// Clips negative samples to zero and rescales to unit trapezoid mass.
    pub fn from_values(spec: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.points {
            return Err(Error::GridMismatch);
        }
        let dx = spec.dx();
        let mut clipped = 0.0;
        for (k, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NumericalDegradation(format!(
                    "non-finite density sample at node {k}"
                )));
            }
            if *v < 0.0 {
                clipped -= *v * spec.weight(k);
                *v = 0.0;
            }
        }
        let mass = spec.trapezoid(&values);
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        if mass != 1.0 {
            values.iter_mut().for_each(|v| *v /= mass);
        }
        let first: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * spec.x(k))
            .collect();
        let mean = spec.trapezoid(&first);
        let second: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * (spec.x(k) - mean).powi(2))
            .collect();
        let variance = spec.trapezoid(&second);
        debug_assert!(dx > 0.0);
        Ok(DensityGrid {
            spec,
            values,
            mean,
            variance,
            clipped_mass: clipped / mass,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn mass(&self) -> f64 {
        self.spec.trapezoid(&self.values)
    }

    /// Negative mass removed by the last renormalization.
    pub fn clipped_mass(&self) -> f64 {
        self.clipped_mass
    }

    /// Present when the clipped mass exceeds [`CLIP_WARNING`].
    pub fn degradation(&self) -> Option<Error> {
        (self.clipped_mass > CLIP_WARNING).then(|| {
            Error::NumericalDegradation(format!(
                "clipped {:.3e} of negative spectral mass",
                self.clipped_mass
            ))
        })
    }

    /// Trapezoid estimate of `E[g(X)]`.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * g(self.spec.x(k)))
            .collect();
        self.spec.trapezoid(&vals)
    }

    /// Central moments 2..=4 as `(variance, third cumulant, fourth cumulant)`.
    pub fn cumulants(&self) -> (f64, f64, f64) {
        let mu = self.mean;
        let m2 = self.variance;
        let m3 = self.expectation(|x| (x - mu).powi(3));
        let m4 = self.expectation(|x| (x - mu).powi(4));
        (m2, m3, m4 - 3.0 * m2 * m2)
    }

    /// Largest `|f(x) - f(-x)|` over mirrored nodes.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|k| (self.values[k] - self.values[n - 1 - k]).abs())
            .fold(0.0, f64::max)
    }
}

/// Samples the density of `dist` on `spec`.
pub fn pdf_of(dist: &SourceDistribution, spec: &GridSpec) -> Result<DensityGrid> {
    dist.ensure_proper()?;
    if !dist.has_density() {
        return Err(Error::NoDensity(dist.name()));
    }
    let l = spec.half_width();
    let tail = dist.tail_mass_outside(-l, l);
    if tail > TAIL_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            half_width: l,
            detail: format!(
                "{tail:.3e} of the mass of the {} law lies outside the window",
                dist.name()
            ),
        });
    }
    let values = spec.nodes().map(|x| dist.pdf(x)).collect();
    DensityGrid::from_values(*spec, values)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

fn sinc_derivative(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        -z / 3.0 + z * z2 / 30.0
    } else {
        (z * z.cos() - z.sin()) / (z * z)
    }
}
