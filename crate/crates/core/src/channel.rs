//! The scalar Gaussian channel `Y = W + √q·X` with `W ~ N(0, 1)`.
//!
//! Divergences and MMSEs are computed in the standardized coordinate
//! `V = (W + √q·X*)/s`, `X* = (X - μ)/σ`, `s² = 1 + qσ²`. Its characteristic
//! function `exp(-t²/2s²)·φ*(√(qσ²)·t/s)` is inverted on one fixed grid for
//! every SNR, so curves in `q` are free of regridding noise.

use std::cell::Cell;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::convolve::{
    check_edges, normalized_sum_density, sum_characteristic_function,
    sum_characteristic_function_derivative,
};
use crate::density::{
    standardize, DensityGrid, GridSpec, SourceDistribution, DEFAULT_POINTS, TAIL_MASS_LIMIT,
};
use crate::entropy::{non_gaussianness, NonGaussianness};
use crate::error::{Error, Result};
use crate::spectral;

/// Residual bound for the derivative identity.
pub const IMMSE_TOLERANCE: f64 = 1e-4;
/// Residual bound for the integral identity.
pub const CMMSE_TOLERANCE: f64 = 5e-4;
/// Output density below which the posterior mean is not formed.
const POSTERIOR_FLOOR: f64 = 1e-13;
const GL_ORDER: usize = 16;

/// A nonnegative, finite signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SnrValue(f64);

impl SnrValue {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "SNR {q} must be finite and nonnegative"
            )));
        }
        Ok(SnrValue(q))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// What is sent through the channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelInput {
    Law(SourceDistribution),
    /// `n^{-1/2}·(X_1 + … + X_n)` for i.i.d. copies of the law.
    NormalizedSum {
        law: SourceDistribution,
        n: u32,
    },
    Grid(DensityGrid),
}

impl From<SourceDistribution> for ChannelInput {
    fn from(law: SourceDistribution) -> Self {
        ChannelInput::Law(law)
    }
}

impl From<DensityGrid> for ChannelInput {
    fn from(grid: DensityGrid) -> Self {
        ChannelInput::Grid(grid)
    }
}

impl ChannelInput {
    pub fn mean(&self) -> f64 {
        match self {
            ChannelInput::Law(law) => law.mean(),
            ChannelInput::NormalizedSum { law, n } => (*n as f64).sqrt() * law.mean(),
            ChannelInput::Grid(g) => g.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ChannelInput::Law(law) | ChannelInput::NormalizedSum { law, .. } => law.variance(),
            ChannelInput::Grid(g) => g.variance(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ChannelInput::Law(law) => law.ensure_proper(),
            ChannelInput::NormalizedSum { law, n } => {
                law.ensure_proper()?;
                if *n == 0 {
                    return Err(Error::InvalidParameter(
                        "summand count must be positive".into(),
                    ));
                }
                Ok(())
            }
            ChannelInput::Grid(g) => {
                if (g.mass() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "input density has mass {}",
                        g.mass()
                    )));
                }
                if !(g.variance() > 0.0) {
                    return Err(Error::DegenerateDensity(g.variance()));
                }
                Ok(())
            }
        }
    }

    /// Half-width that holds the standardized input `X*`.
    fn standardized_reach(&self) -> f64 {
        let reach = match self {
            ChannelInput::Law(law) | ChannelInput::NormalizedSum { law, .. } => standardize(law)
                .map(|z| z.tail_radius(0.5 * TAIL_MASS_LIMIT))
                .unwrap_or(10.0),
            ChannelInput::Grid(g) => (g.spec().half_width() + g.mean().abs()) / g.variance().sqrt(),
        };
        reach.max(10.0)
    }

    /// `E[exp(iuX*)]` and `E[X* exp(iuX*)]` at `u = scale·t_m` for every bin of `spec`.
    fn spectrum(&self, spec: &GridSpec, scale: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = spec.points();
        let dt = spectral::frequency_step(spec);
        let analytic = |cf: &dyn Fn(f64) -> Complex64, dcf: &dyn Fn(f64) -> Complex64| {
            (0..n)
                .map(|j| {
                    let m = if j < n / 2 {
                        j as f64
                    } else {
                        j as f64 - n as f64
                    };
                    let u = scale * m * dt;
                    (cf(u), Complex64::new(0.0, -1.0) * dcf(u))
                })
                .unzip()
        };
        match self {
            ChannelInput::Law(law) => {
                let z = standardize(law).expect("validated");
                analytic(&|u| z.characteristic_function(u), &|u| {
                    z.characteristic_function_derivative(u)
                })
            }
            ChannelInput::NormalizedSum { law, n: count } => {
                let z = standardize(law).expect("validated");
                analytic(&|u| sum_characteristic_function(&z, *count, u), &|u| {
                    sum_characteristic_function_derivative(&z, *count, u)
                })
            }
            ChannelInput::Grid(g) => {
                let gs = g.spec();
                let (mu, sd) = (g.mean(), g.variance().sqrt());
                let x0 = (-gs.half_width() - mu) / sd;
                let h = gs.dx() / sd;
                let c: Vec<f64> = g
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * gs.weight(k))
                    .collect();
                let cx: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (x0 + k as f64 * h))
                    .collect();
                (
                    spectral::sampled_transform(x0, h, &c, scale * dt, n),
                    spectral::sampled_transform(x0, h, &cx, scale * dt, n),
                )
            }
        }
    }
}

/// One SNR point of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPoint {
    pub q: SnrValue,
    /// Density of `W + √q·X` in natural coordinates.
    pub output_density: DensityGrid,
    pub divergence: NonGaussianness,
}

/// MMSE and divergence over an SNR grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmseCurve {
    pub q: Vec<SnrValue>,
    pub mmse_x: Vec<f64>,
    pub mmse_gaussian: Vec<f64>,
    pub divergence: Vec<f64>,
}

/// Outcome of an identity check: both sides, their distance and the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub q: f64,
    /// Finite-difference step, or zero for the integral form.
    pub step: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(q: f64, step: f64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        IdentityCheck {
            q,
            step,
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual < tolerance,
        }
    }
}

/// `q = 0` followed by 40 geometric points from `1e-3` to `1e2`.
pub fn default_snr_grid() -> Vec<f64> {
    let count = 40;
    let (lo, hi) = (1e-3f64.ln(), 1e2f64.ln());
    std::iter::once(0.0)
        .chain((0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()))
        .collect()
}

/// Standardized-coordinate grid used for every SNR of `input`.
pub fn standardized_grid(input: &ChannelInput) -> GridSpec {
    GridSpec::new(input.standardized_reach(), DEFAULT_POINTS).expect("positive width")
}

/// Natural-coordinate grid wide enough for the output at SNR `q`.
pub fn output_grid(input: &ChannelInput, q: f64) -> GridSpec {
    let s = (1.0 + q * input.variance()).sqrt();
    let base = standardized_grid(input);
    GridSpec::new(
        s * base.half_width() + q.sqrt() * input.mean().abs(),
        base.points(),
    )
    .expect("positive width")
}

/// `σ²/(1 + qσ²)`, the MMSE of a Gaussian input of variance `σ²`.
pub fn mmse_gaussian(q: f64, variance: f64) -> f64 {
    variance / (1.0 + q * variance)
}

/// Density of `W + √q·X` on `spec`.
pub fn channel_output_density(
    input: &ChannelInput,
    q: f64,
    spec: &GridSpec,
) -> Result<DensityGrid> {
    let q = SnrValue::new(q)?.get();
    input.validate()?;
    let (mu, sd) = (input.mean(), input.variance().sqrt());
    let scale = q.sqrt() * sd;
    let (cf, _) = input.spectrum(spec, scale);
    let n = spec.points();
    let dt = spectral::frequency_step(spec);
    let bins: Vec<Complex64> = cf
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let t = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            } * dt;
            c * Complex64::from_polar((-0.5 * t * t).exp(), t * q.sqrt() * mu)
        })
        .collect();
    let nyq = bins[n / 2].norm();
    if nyq > spectral::NYQUIST_LIMIT {
        return Err(Error::GridTooCoarse { magnitude: nyq });
    }
    finish(spec, spectral::invert_bins(spec, bins))
}

/// Output density, divergence and the posterior-mean numerator in the
/// standardized coordinate.
struct Standardized {
    density: DensityGrid,
    raw: Vec<f64>,
    numerator: Vec<f64>,
}

fn standardized_output(input: &ChannelInput, q: f64, spec: &GridSpec) -> Result<Standardized> {
    let q = SnrValue::new(q)?.get();
    input.validate()?;
    let qs = q * input.variance();
    let s = (1.0 + qs).sqrt();
    let (cf, xcf) = input.spectrum(spec, qs.sqrt() / s);
    let n = spec.points();
    let dt = spectral::frequency_step(spec);
    let gauss: Vec<f64> = (0..n)
        .map(|j| {
            let t = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            } * dt
                / s;
            (-0.5 * t * t).exp()
        })
        .collect();
    let nyq = gauss[n / 2] * cf[n / 2].norm();
    if nyq > spectral::NYQUIST_LIMIT {
        return Err(Error::GridTooCoarse { magnitude: nyq });
    }
    let f_bins = cf.iter().zip(&gauss).map(|(c, g)| c * g).collect();
    let m_bins = xcf.iter().zip(&gauss).map(|(c, g)| c * g).collect();
    let raw = spectral::invert_bins(spec, f_bins);
    let numerator = spectral::invert_bins(spec, m_bins);
    let density = finish(spec, raw.clone())?;
    Ok(Standardized {
        density,
        raw,
        numerator,
    })
}

fn finish(spec: &GridSpec, values: Vec<f64>) -> Result<DensityGrid> {
    check_edges(spec, &values)?;
    let grid = DensityGrid::from_values(*spec, values)?;
    match grid.degradation() {
        Some(e) => Err(e),
        None => Ok(grid),
    }
}

impl Standardized {
    /// `E[(E[X*|V])²] = ∫ M²/f`.
    fn explained(&self, spec: &GridSpec) -> f64 {
        self.raw
            .iter()
            .zip(&self.numerator)
            .enumerate()
            .filter(|(_, (f, _))| **f > POSTERIOR_FLOOR)
            .map(|(k, (f, m))| spec.weight(k) * m * m / f)
            .sum()
    }
}

/// Non-Gaussianness of `W + √q·X` on the default standardized grid.
pub fn channel_divergence(input: &ChannelInput, q: f64) -> Result<NonGaussianness> {
    channel_divergence_on(input, q, &standardized_grid(input))
}

/// As [`channel_divergence`] on a caller-chosen standardized grid.
pub fn channel_divergence_on(
    input: &ChannelInput,
    q: f64,
    spec: &GridSpec,
) -> Result<NonGaussianness> {
    non_gaussianness(&standardized_output(input, q, spec)?.density)
}

/// Output density on its default natural grid together with its divergence.
pub fn channel_point(input: &ChannelInput, q: f64) -> Result<ChannelPoint> {
    let output_density = channel_output_density(input, q, &output_grid(input, q))?;
    let divergence = non_gaussianness(&output_density)?;
    Ok(ChannelPoint {
        q: SnrValue::new(q)?,
        output_density,
        divergence,
    })
}

/// `E[(X - E[X|Y])²]` at SNR `q`.
pub fn mmse(input: &ChannelInput, q: f64) -> Result<f64> {
    mmse_on(input, q, &standardized_grid(input))
}

/// As [`mmse`] on a caller-chosen standardized grid.
pub fn mmse_on(input: &ChannelInput, q: f64, spec: &GridSpec) -> Result<f64> {
    let var = input.variance();
    if SnrValue::new(q)?.get() == 0.0 {
        input.validate()?;
        return Ok(var);
    }
    let out = standardized_output(input, q, spec)?;
    Ok(var * (1.0 - out.explained(spec)).max(0.0))
}

/// MMSE, Gaussian MMSE and divergence over `q_grid`, which must ascend.
pub fn mmse_curve(input: &ChannelInput, q_grid: &[f64]) -> Result<MmseCurve> {
    mmse_curve_on(input, q_grid, &standardized_grid(input))
}

/// As [`mmse_curve`] on a caller-chosen standardized grid.
pub fn mmse_curve_on(input: &ChannelInput, q_grid: &[f64], spec: &GridSpec) -> Result<MmseCurve> {
    input.validate()?;
    let q: Vec<SnrValue> = q_grid
        .iter()
        .map(|&q| SnrValue::new(q))
        .collect::<Result<_>>()?;
    if q.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "SNR grid must be strictly ascending".into(),
        ));
    }
    let var = input.variance();
    let rows: Vec<(f64, f64)> = q
        .par_iter()
        .map(|q| {
            let out = standardized_output(input, q.get(), spec)?;
            let d = non_gaussianness(&out.density)?.value;
            let m = if q.get() == 0.0 {
                var
            } else {
                var * (1.0 - out.explained(spec)).max(0.0)
            };
            Ok((m, d))
        })
        .collect::<Result<_>>()?;
    let (mmse_x, divergence) = rows.into_iter().unzip();
    let mmse_gaussian = q.iter().map(|q| mmse_gaussian(q.get(), var)).collect();
    Ok(MmseCurve {
        q,
        mmse_x,
        mmse_gaussian,
        divergence,
    })
}

/// The divergence `D(q)` over `q_grid`, carried in an [`MmseCurve`].
pub fn divergence_curve(input: &ChannelInput, q_grid: &[f64]) -> Result<MmseCurve> {
    mmse_curve(input, q_grid)
}

/// Central-difference step used when none is given: `max(1e-3, q/100)`.
pub fn default_step(q: f64) -> f64 {
    (q / 100.0).max(1e-3)
}

/// Compares `½(mmse_G - mmse_X)(q)` with the centered difference of `D` at `q`.
pub fn immse_identity_check(input: &ChannelInput, q: f64, h: Option<f64>) -> Result<IdentityCheck> {
    immse_identity_check_on(input, q, h, &standardized_grid(input))
}

/// As [`immse_identity_check`] on a caller-chosen standardized grid.
pub fn immse_identity_check_on(
    input: &ChannelInput,
    q: f64,
    h: Option<f64>,
    spec: &GridSpec,
) -> Result<IdentityCheck> {
    let h = h.unwrap_or_else(|| default_step(q));
    if !(h > 0.0 && q > h) {
        return Err(Error::InvalidParameter(format!(
            "need q > h > 0, got q = {q}, h = {h}"
        )));
    }
    let gap = mmse_gaussian(q, input.variance()) - mmse_on(input, q, spec)?;
    let up = channel_divergence_on(input, q + h, spec)?.value;
    let down = channel_divergence_on(input, q - h, spec)?.value;
    Ok(IdentityCheck::new(
        q,
        h,
        0.5 * gap,
        (up - down) / (2.0 * h),
        IMMSE_TOLERANCE,
    ))
}

/// Compares `∫₀^Q (mmse_G - mmse_X)` with `2·D(Q)`.
pub fn cmmse_identity_check(input: &ChannelInput, q: f64) -> Result<IdentityCheck> {
    cmmse_identity_check_on(input, q, &standardized_grid(input))
}

/// As [`cmmse_identity_check`] on a caller-chosen standardized grid.
pub fn cmmse_identity_check_on(
    input: &ChannelInput,
    q: f64,
    spec: &GridSpec,
) -> Result<IdentityCheck> {
    if !(SnrValue::new(q)?.get() > 0.0) {
        return Err(Error::InvalidParameter(format!("need Q > 0, got {q}")));
    }
    let integral = integrated_gap(input, q, spec)?;
    let d = channel_divergence_on(input, q, spec)?.value;
    Ok(IdentityCheck::new(
        q,
        0.0,
        integral,
        2.0 * d,
        CMMSE_TOLERANCE,
    ))
}

/// `∫₀^Q (mmse_G - mmse_X)(s) ds` by double-exponential quadrature.
fn integrated_gap(input: &ChannelInput, q: f64, spec: &GridSpec) -> Result<f64> {
    let var = input.variance();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let out = quadrature::double_exponential::integrate(
        |s| match mmse_on(input, s, spec) {
            Ok(m) => mmse_gaussian(s, var) - m,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        0.0,
        q,
        1e-10,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(out.integral),
    }
}

/// Causal MMSE of a constant signal observed up to SNR `q`: `(1/q)·∫₀^q mmse`.
pub fn cmmse(input: &ChannelInput, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("need q > 0, got {q}")));
    }
    let spec = standardized_grid(input);
    let gap = integrated_gap(input, q, &spec)?;
    let var = input.variance();
    // (1/q)∫₀^q σ²/(1 + sσ²) ds = ln(1 + qσ²)/q
    Ok((q * var).ln_1p() / q - gap / q)
}

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// `E[X | W + √q·X = y]`.
pub fn conditional_mean(y: f64, input: &ChannelInput, q: f64) -> Result<f64> {
    let q = SnrValue::new(q)?.get();
    if q == 0.0 {
        return Err(Error::InvalidParameter(
            "conditional mean needs q > 0".into(),
        ));
    }
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "observation {y} is not finite"
        )));
    }
    input.validate()?;
    let rq = q.sqrt();
    let terms: Vec<(f64, f64)> = match input {
        ChannelInput::Law(law) => match law.atoms() {
            Some(atoms) => atoms.into_iter().map(|(x, p)| (x, p.ln())).collect(),
            None => law_nodes(law, y, rq),
        },
        ChannelInput::NormalizedSum { law, n } => {
            let z = standardize(law)?;
            let grid = normalized_sum_density(&z, *n, &GridSpec::for_law(&z))?;
            let shift = (*n as f64).sqrt() * law.mean();
            grid_nodes(&grid, shift, law.std_dev())
        }
        ChannelInput::Grid(g) => grid_nodes(g, 0.0, 1.0),
    };
    posterior_mean(&terms, y, rq)
}

/// Gauss–Legendre nodes `(x, ln(w·f(x)))` covering the prior and the
/// likelihood window, split at the law's breakpoints.
fn law_nodes(law: &SourceDistribution, y: f64, rq: f64) -> Vec<(f64, f64)> {
    let radius = law.tail_radius(1e-18);
    let centre = y / rq;
    let reach = 12.0 / rq;
    let (lo, hi) = law.support();
    let a = (-radius).min(centre - reach).max(lo);
    let b = radius.max(centre + reach).min(hi);
    let mut cuts = vec![a];
    cuts.extend(law.breakpoints().into_iter().filter(|&p| p > a && p < b));
    cuts.push(b);
    let width = (0.5 / rq).min(0.25);
    let rule = gauss_legendre();
    let mut nodes = Vec::new();
    for seg in cuts.windows(2) {
        let panels = ((seg[1] - seg[0]) / width).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / panels as f64;
        for p in 0..panels {
            let mid = seg[0] + (p as f64 + 0.5) * h;
            for &(t, w) in rule {
                let x = mid + 0.5 * h * t;
                nodes.push((x, (0.5 * h * w).ln() + law.ln_pdf(x)));
            }
        }
    }
    nodes
}

/// Trapezoid nodes of a grid density mapped through `x ↦ shift + scale·x`.
fn grid_nodes(grid: &DensityGrid, shift: f64, scale: f64) -> Vec<(f64, f64)> {
    let spec = grid.spec();
    grid.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (shift + scale * spec.x(k), (spec.weight(k) * v).ln()))
        .collect()
}

fn posterior_mean(terms: &[(f64, f64)], y: f64, rq: f64) -> Result<f64> {
    let exps: Vec<f64> = terms
        .iter()
        .map(|&(x, lw)| lw - 0.5 * (y - rq * x).powi(2))
        .collect();
    let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut den, mut num) = (0.0, 0.0);
    for (&(x, _), e) in terms.iter().zip(&exps) {
        let w = (e - top).exp();
        den += w;
        num += w * x;
    }
    let ln_den = top + den.ln() - 0.5 * (2.0 * PI).ln();
    if !(ln_den >= f64::MIN_POSITIVE.ln()) {
        return Err(Error::TailUnderflow(y));
    }
    Ok(num / den)
}
