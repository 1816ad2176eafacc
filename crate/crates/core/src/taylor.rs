//! Estimates of `D⁽²⁾(0)`, the curvature at zero SNR of `q ↦ D(W + √q·X)`.
//!
//! Two routes are taken on the ladder `q0, q0/2, …, q0/2^(levels-1)`:
//! Richardson extrapolation of `2D(q)/q²`, and a polynomial fit of the MMSE
//! gap `(mmse_G - mmse_X)(q)/q` whose intercept is `2·D⁽²⁾(0)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    channel_divergence_on, mmse_gaussian, mmse_on, standardized_grid, ChannelInput, SnrValue,
};
use crate::density::GridSpec;
use crate::error::{Error, Result};
use crate::fit::polyfit;

/// Divergences and gaps below this many nats are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaylorMethod {
    RatioExtrapolation,
    MmseGapSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorEstimate {
    pub value: f64,
    pub uncertainty: f64,
    /// `(q, estimate at q)` with `q` strictly decreasing.
    pub ladder: Vec<(f64, f64)>,
    pub method: TaylorMethod,
    /// Set when too few ladder points rise above [`NOISE_FLOOR`].
    pub noise_floor: bool,
}

impl TaylorEstimate {
    /// True unless the estimate resolves a strictly positive curvature. A
    /// nonnegative function vanishing to first order cannot curve downward, so
    /// negative values count as unresolved zeros.
    pub fn is_degenerate(&self) -> bool {
        self.noise_floor || self.value <= self.uncertainty
    }

    /// `|a - b| ≤ a.uncertainty + b.uncertainty`.
    pub fn agrees_with(&self, other: &TaylorEstimate) -> bool {
        (self.value - other.value).abs() <= self.uncertainty + other.uncertainty
    }
}

fn ladder_points(q0: f64, levels: usize) -> Result<Vec<f64>> {
    SnrValue::new(q0)?;
    if !(q0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ladder start {q0} must be positive"
        )));
    }
    if levels < 3 {
        return Err(Error::InvalidParameter(format!(
            "ladder needs at least 3 levels, got {levels}"
        )));
    }
    Ok((0..levels).map(|k| q0 / 2f64.powi(k as i32)).collect())
}

/// Keeps the leading ladder points whose raw quantity clears the noise floor.
fn above_floor(qs: &[f64], raw: &[f64]) -> usize {
    raw.iter()
        .take_while(|v| **v >= NOISE_FLOOR)
        .count()
        .min(qs.len())
}

fn floored(method: TaylorMethod, ladder: Vec<(f64, f64)>, q_min: f64) -> TaylorEstimate {
    TaylorEstimate {
        value: 0.0,
        // ratio resolution at the smallest rung
        uncertainty: 2.0 * NOISE_FLOOR / (q_min * q_min),
        ladder,
        method,
        noise_floor: true,
    }
}

/// Richardson extrapolation of `r(q) = 2D(q)/q²` to `q = 0`.
pub fn second_derivative_at_zero(
    input: &ChannelInput,
    q0: f64,
    levels: usize,
) -> Result<TaylorEstimate> {
    second_derivative_at_zero_on(input, q0, levels, &standardized_grid(input))
}

/// As [`second_derivative_at_zero`] on a caller-chosen standardized grid.
pub fn second_derivative_at_zero_on(
    input: &ChannelInput,
    q0: f64,
    levels: usize,
    spec: &GridSpec,
) -> Result<TaylorEstimate> {
    let qs = ladder_points(q0, levels)?;
    let d: Vec<f64> = qs
        .par_iter()
        .map(|&q| channel_divergence_on(input, q, spec).map(|ng| ng.value))
        .collect::<Result<_>>()?;
    let ladder: Vec<(f64, f64)> = qs
        .iter()
        .zip(&d)
        .map(|(&q, &v)| (q, 2.0 * v / (q * q)))
        .collect();
    let keep = above_floor(&qs, &d);
    if keep < 3 {
        return Ok(floored(
            TaylorMethod::RatioExtrapolation,
            ladder,
            qs[levels - 1],
        ));
    }
    let mut table = vec![ladder.iter().take(keep).map(|p| p.1).collect::<Vec<f64>>()];
    for j in 1..keep {
        let prev = &table[j - 1];
        let factor = 2f64.powi(j as i32) - 1.0;
        let next = (1..prev.len())
            .map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor)
            .collect();
        table.push(next);
    }
    let last = table[keep - 1][0];
    let before = *table[keep - 2].last().expect("nonempty column");
    Ok(TaylorEstimate {
        value: last,
        uncertainty: (last - before).abs(),
        ladder,
        method: TaylorMethod::RatioExtrapolation,
        noise_floor: false,
    })
}

/// Intercept of a polynomial fit of `gap(q)/q`, halved.
pub fn mmse_gap_slope(input: &ChannelInput, q0: f64, levels: usize) -> Result<TaylorEstimate> {
    mmse_gap_slope_on(input, q0, levels, &standardized_grid(input))
}

/// As [`mmse_gap_slope`] on a caller-chosen standardized grid.
pub fn mmse_gap_slope_on(
    input: &ChannelInput,
    q0: f64,
    levels: usize,
    spec: &GridSpec,
) -> Result<TaylorEstimate> {
    let qs = ladder_points(q0, levels)?;
    let var = input.variance();
    let gaps: Vec<f64> = qs
        .par_iter()
        .map(|&q| mmse_on(input, q, spec).map(|m| mmse_gaussian(q, var) - m))
        .collect::<Result<_>>()?;
    let ladder: Vec<(f64, f64)> = qs
        .iter()
        .zip(&gaps)
        .map(|(&q, &g)| (q, 0.5 * g / q))
        .collect();
    let keep = above_floor(&qs, &gaps);
    if keep < 3 {
        return Ok(floored(TaylorMethod::MmseGapSlope, ladder, qs[levels - 1]));
    }
    let x: Vec<f64> = qs[..keep].to_vec();
    let y: Vec<f64> = gaps[..keep].iter().zip(&x).map(|(g, q)| g / q).collect();
    let high = (keep - 2).min(3);
    let fit = polyfit(&x, &y, high)?;
    let lower = polyfit(&x, &y, high - 1)?;
    let value = 0.5 * fit.coeffs[0];
    let uncertainty = 0.5 * (fit.stderr[0] + (fit.coeffs[0] - lower.coeffs[0]).abs());
    Ok(TaylorEstimate {
        value,
        uncertainty,
        ladder,
        method: TaylorMethod::MmseGapSlope,
        noise_floor: false,
    })
}
