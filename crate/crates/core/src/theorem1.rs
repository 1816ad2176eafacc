//! The chain from the divergence of normalized sums to the `O(Q²/n)` bound:
//! monotonicity in `n`, the channel factorization and data processing
//! steps, the gap `Δₙ`, and a log-log fit of the decay rate.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    channel_divergence, channel_divergence_on, standardized_grid, ChannelInput, SnrValue,
};
use crate::convolve::normalized_sum_density;
use crate::density::{standardize, GridSpec, SourceDistribution, DEFAULT_POINTS};
use crate::entropy::non_gaussianness;
use crate::error::{Error, Result};
use crate::fit::polyfit;
use crate::taylor::{
    mmse_gap_slope, mmse_gap_slope_on, second_derivative_at_zero, second_derivative_at_zero_on,
    TaylorEstimate, NOISE_FLOOR,
};

/// Largest summand count accepted.
pub const MAX_N: u32 = 4096;
/// Slack allowed on every inequality of the chain.
pub const SLACK: f64 = 1e-7;
/// Grid-resolution residual bound for the scaling identity.
pub const SCALING_TOLERANCE: f64 = 1e-5;
/// Fewest points a decay-rate fit accepts.
pub const MIN_RATE_POINTS: usize = 5;
/// SNR values swept by default.
pub const DEFAULT_Q_SWEEP: [f64; 4] = [1.0, 4.0, 16.0, 64.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Degenerate => "DEGENERATE",
        }
    }
}

/// `1..=8`, then `round(2^(k/2))` up to `n_max`, always ending at `n_max`.
pub fn n_schedule(n_max: u32) -> Vec<u32> {
    let mut ns: Vec<u32> = (1..=n_max.min(8)).collect();
    let mut k = 7;
    loop {
        let n = 2f64.powf(k as f64 / 2.0).round() as u32;
        if n >= n_max {
            break;
        }
        if n > 8 {
            ns.push(n);
        }
        k += 1;
    }
    if n_max > 8 {
        ns.push(n_max);
    }
    ns
}

fn check_n_max(n_max: u32) -> Result<()> {
    if n_max == 0 || n_max > MAX_N {
        return Err(Error::InvalidParameter(format!(
            "n_max {n_max} must lie in 1..={MAX_N}"
        )));
    }
    Ok(())
}

fn check_snr(q: f64) -> Result<f64> {
    let q = SnrValue::new(q)?.get();
    if q == 0.0 {
        return Err(Error::InvalidParameter("Q must be positive".into()));
    }
    Ok(q)
}

/// `D(Sₙ)` for every `n` of [`n_schedule`].
pub fn sum_divergence_sequence(law: &SourceDistribution, n_max: u32) -> Result<BTreeMap<u32, f64>> {
    check_n_max(n_max)?;
    sum_divergences(law, &n_schedule(n_max), DEFAULT_POINTS)
}

/// Largest factor by which the sum pipeline refines a grid whose spectral
/// ringing exceeds the clipping threshold.
pub const MAX_REFINEMENT: usize = 4;

/// `D(Sₙ)` for the given `n`, on the law's default window with `points` nodes.
/// A density whose clipped ringing mass exceeds the warning threshold is
/// recomputed with twice the nodes, up to [`MAX_REFINEMENT`] times as many.
pub fn sum_divergences(
    law: &SourceDistribution,
    ns: &[u32],
    points: usize,
) -> Result<BTreeMap<u32, f64>> {
    let z = standardize(law)?;
    GridSpec::new(1.0, points)?;
    refining_sums(&z, ns, |factor| {
        GridSpec::for_law_with_points(&z, points * factor)
    })
}

/// As [`sum_divergences`] starting from a caller-chosen grid in standardized units.
pub fn sum_divergences_on(
    law: &SourceDistribution,
    ns: &[u32],
    spec: &GridSpec,
) -> Result<BTreeMap<u32, f64>> {
    let z = standardize(law)?;
    let jumps = z.jumps();
    refining_sums(&z, ns, |factor| {
        let mut s = *spec;
        for _ in 0..factor.trailing_zeros() {
            s = s.refined();
        }
        if factor > 1 {
            s.aligned_to(&jumps)
        } else {
            s
        }
    })
}

fn refining_sums(
    z: &SourceDistribution,
    ns: &[u32],
    grid: impl Fn(usize) -> GridSpec + Sync,
) -> Result<BTreeMap<u32, f64>> {
    if !z.has_density() {
        return Err(Error::NoDensity(z.name()));
    }
    ns.par_iter()
        .map(|&n| {
            if n == 0 || n > MAX_N {
                return Err(Error::InvalidParameter(format!(
                    "n = {n} outside 1..={MAX_N}"
                )));
            }
            let mut factor = 1;
            loop {
                let f = normalized_sum_density(z, n, &grid(factor))?;
                match f.degradation() {
                    None => return Ok((n, non_gaussianness(&f)?.value)),
                    Some(e) if factor >= MAX_REFINEMENT => return Err(e),
                    Some(_) => factor *= 2,
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityCheck {
    pub verdict: Verdict,
    /// Largest `D_n - D_prev` over consecutive entries.
    pub worst_increase: f64,
    /// `n` at which the worst increase occurs.
    pub worst_n: Option<u32>,
}

/// PASS iff every entry is at most its predecessor plus [`SLACK`].
pub fn monotonicity_check(sequence: &BTreeMap<u32, f64>) -> MonotonicityCheck {
    let pairs: Vec<(u32, f64)> = sequence.iter().map(|(&n, &d)| (n, d)).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_n = None;
    for w in pairs.windows(2) {
        let rise = w[1].1 - w[0].1;
        if rise > worst {
            worst = rise;
            worst_n = Some(w[1].0);
        }
    }
    let verdict = Verdict::from_bool(!(worst > SLACK));
    MonotonicityCheck {
        verdict,
        worst_increase: worst.max(f64::MIN),
        worst_n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub n: u32,
    pub q: f64,
    /// `n·D(W + √(Q/n)·X)` on the default grid.
    pub coarse: f64,
    /// The same on a grid with twice the nodes.
    pub fine: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `n·D(W + √(Q/n)·X)` at two grid resolutions.
pub fn scaling_identity_check(law: &SourceDistribution, q: f64, n: u32) -> Result<ScalingCheck> {
    let q = check_snr(q)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let input = ChannelInput::Law(law.clone());
    let spec = standardized_grid(&input);
    let snr = q / n as f64;
    let coarse = n as f64 * channel_divergence_on(&input, snr, &spec)?.value;
    let fine = n as f64 * channel_divergence_on(&input, snr, &spec.refined())?.value;
    let residual = (coarse - fine).abs();
    Ok(ScalingCheck {
        n,
        q,
        coarse,
        fine,
        residual,
        tolerance: SCALING_TOLERANCE,
        passed: residual < SCALING_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpiCheck {
    pub n: u32,
    pub q: f64,
    /// `n·D(W + √(Q/n)·X₁)`.
    pub lhs: f64,
    /// `D(W + √(Q/n)·Sₙ)`.
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

/// The data-processing step `n·D(W + √(Q/n)·X₁) ≥ D(W + √(Q/n)·Sₙ)`.
pub fn dpi_check(law: &SourceDistribution, q: f64, n: u32) -> Result<DpiCheck> {
    dpi_check_with(law, q, n, None)
}

/// As [`dpi_check`] with both divergences on a caller-chosen standardized grid.
pub fn dpi_check_on(law: &SourceDistribution, q: f64, n: u32, spec: &GridSpec) -> Result<DpiCheck> {
    dpi_check_with(law, q, n, Some(spec))
}

fn dpi_check_with(
    law: &SourceDistribution,
    q: f64,
    n: u32,
    spec: Option<&GridSpec>,
) -> Result<DpiCheck> {
    let q = check_snr(q)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let snr = q / n as f64;
    let single = ChannelInput::Law(law.clone());
    let sum = ChannelInput::NormalizedSum {
        law: law.clone(),
        n,
    };
    let (lhs, rhs) = match spec {
        Some(spec) => (
            channel_divergence_on(&single, snr, spec)?.value,
            channel_divergence_on(&sum, snr, spec)?.value,
        ),
        None => (
            channel_divergence(&single, snr)?.value,
            channel_divergence(&sum, snr)?.value,
        ),
    };
    let lhs = n as f64 * lhs;
    let margin = lhs - rhs;
    Ok(DpiCheck {
        n,
        q,
        lhs,
        rhs,
        margin,
        verdict: Verdict::from_bool(margin >= -SLACK),
    })
}

/// `Δₙ = D(Sₙ) - D(W + √(Q/n)·Sₙ)`.
pub fn delta_gap(law: &SourceDistribution, q: f64, n: u32) -> Result<f64> {
    let q = check_snr(q)?;
    let d_sum = sum_divergences(law, &[n], DEFAULT_POINTS)?[&n];
    let d_channel = channel_divergence(
        &ChannelInput::NormalizedSum {
            law: law.clone(),
            n,
        },
        q / n as f64,
    )?
    .value;
    Ok(d_sum - d_channel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: u32,
    pub d_sum: f64,
    /// `½·D⁽²⁾(0)·Q²/n`.
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub rows: Vec<BoundRow>,
    /// Smallest `n` from which every row passes.
    pub empirical_n: Option<u32>,
    pub degenerate: bool,
}

/// Compares `D(Sₙ)` with `½·D⁽²⁾(0)·Q²/n` using `d2.value`. If `d2` or the
/// optional independent `cross_check` fails to resolve a positive curvature,
/// every row is DEGENERATE.
pub fn bound_check(
    sequence: &BTreeMap<u32, f64>,
    d2: &TaylorEstimate,
    cross_check: Option<&TaylorEstimate>,
    q: f64,
) -> BoundCheck {
    let degenerate = d2.is_degenerate() || cross_check.is_some_and(|c| c.is_degenerate());
    let rows: Vec<BoundRow> = sequence
        .iter()
        .map(|(&n, &d_sum)| {
            let bound = 0.5 * d2.value * q * q / n as f64;
            let verdict = if degenerate {
                Verdict::Degenerate
            } else {
                Verdict::from_bool(d_sum <= bound)
            };
            BoundRow {
                n,
                d_sum,
                bound,
                verdict,
            }
        })
        .collect();
    let empirical_n = if degenerate {
        None
    } else {
        let tail_start = rows
            .iter()
            .rposition(|r| r.verdict != Verdict::Pass)
            .map_or(0, |i| i + 1);
        rows.get(tail_start).map(|r| r.n)
    };
    BoundCheck {
        rows,
        empirical_n,
        degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Least-squares slope of `ln D` against `ln n`.
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: Vec<u32>,
}

/// Log-log slope over the last `tail_fraction` of the entries.
pub fn rate_fit(sequence: &BTreeMap<u32, f64>, tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction {tail_fraction} must lie in (0, 1]"
        )));
    }
    let take = ((sequence.len() as f64) * tail_fraction).ceil() as usize;
    let tail: Vec<(u32, f64)> = sequence
        .iter()
        .rev()
        .take(take)
        .map(|(&n, &d)| (n, d))
        .collect();
    fit_points(tail.into_iter().rev().collect())
}

/// Log-log slope over the entries with `lo ≤ n ≤ hi`.
pub fn rate_fit_range(sequence: &BTreeMap<u32, f64>, lo: u32, hi: u32) -> Result<RateFit> {
    fit_points(sequence.range(lo..=hi).map(|(&n, &d)| (n, d)).collect())
}

fn fit_points(points: Vec<(u32, f64)>) -> Result<RateFit> {
    let usable: Vec<(u32, f64)> = points.into_iter().filter(|p| p.1 > NOISE_FLOOR).collect();
    if usable.len() < MIN_RATE_POINTS {
        return Err(Error::RateUndefined(format!(
            "{} points above the noise floor, {MIN_RATE_POINTS} needed",
            usable.len()
        )));
    }
    let x: Vec<f64> = usable.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let fit = polyfit(&x, &y, 1)?;
    Ok(RateFit {
        slope: fit.coeffs[1],
        stderr: fit.stderr[1],
        intercept: fit.coeffs[0],
        points: usable.iter().map(|p| p.0).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityRow {
    pub n: u32,
    /// Capacity excess over the Gaussian-noise channel, in nats.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub law: String,
    pub rows: Vec<CapacityRow>,
    pub rate: Option<RateFit>,
    pub rate_error: Option<String>,
}

/// Capacity excess `D(Sₙ)` of the channel whose noise aggregates `n`
/// interferers, with its decay slope.
pub fn capacity_gap_report(
    law: &SourceDistribution,
    n_max: u32,
    tail_fraction: f64,
) -> Result<CapacityReport> {
    capacity_report_from(law, &sum_divergence_sequence(law, n_max)?, tail_fraction)
}

/// As [`capacity_gap_report`] for an already computed sum sequence.
pub fn capacity_report_from(
    law: &SourceDistribution,
    seq: &BTreeMap<u32, f64>,
    tail_fraction: f64,
) -> Result<CapacityReport> {
    let (rate, rate_error) = split_rate(rate_fit(seq, tail_fraction))?;
    Ok(CapacityReport {
        law: law.name().to_string(),
        rows: seq
            .iter()
            .map(|(&n, &excess)| CapacityRow { n, excess })
            .collect(),
        rate,
        rate_error,
    })
}

fn split_rate(r: Result<RateFit>) -> Result<(Option<RateFit>, Option<String>)> {
    match r {
        Ok(fit) => Ok((Some(fit), None)),
        Err(e @ Error::RateUndefined(_)) => Ok((None, Some(e.to_string()))),
        Err(e) => Err(e),
    }
}

/// Settings shared by every report of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Settings {
    pub n_max: u32,
    pub tail_fraction: f64,
    pub taylor_q0: f64,
    pub taylor_levels: usize,
    /// Standardized grid replacing every default window when set.
    pub grid: Option<GridSpec>,
}

impl Default for Theorem1Settings {
    fn default() -> Self {
        Theorem1Settings {
            n_max: 512,
            tail_fraction: 0.5,
            taylor_q0: 0.5,
            taylor_levels: 6,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Verdicts {
    pub monotonicity: Verdict,
    pub dpi: Verdict,
    pub delta_bracket: Verdict,
    /// `Δ` at `n_max` below `Δ` at `n = 1`.
    pub delta_decreases: Verdict,
    pub chain: Verdict,
    pub taylor_agreement: Verdict,
    pub bound: Vec<Verdict>,
    pub empirical_n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub law: String,
    pub q: SnrValue,
    pub n: Vec<u32>,
    pub d_sum: Vec<f64>,
    /// `D(W + √(Q/n)·Sₙ)`.
    pub d_channel: Vec<f64>,
    /// `n·D(W + √(Q/n)·X₁)`.
    pub scaled_lhs: Vec<f64>,
    pub delta: Vec<f64>,
    /// `Δₙ·n/Q²`.
    pub delta_scaled: Vec<f64>,
    pub bound: Vec<f64>,
    pub d2_estimate: TaylorEstimate,
    pub d2_cross_check: TaylorEstimate,
    pub rate: Option<RateFit>,
    pub rate_error: Option<String>,
    pub verdicts: Theorem1Verdicts,
}

/// One report per `Q`, sharing the sum sequence and the curvature estimates.
pub fn theorem1_sweep(
    law: &SourceDistribution,
    qs: &[f64],
    settings: &Theorem1Settings,
) -> Result<Vec<Theorem1Report>> {
    check_n_max(settings.n_max)?;
    for &q in qs {
        check_snr(q)?;
    }
    let input = ChannelInput::Law(law.clone());
    let (seq, d2, d2_gap) = match &settings.grid {
        Some(spec) => (
            sum_divergences_on(law, &n_schedule(settings.n_max), spec)?,
            second_derivative_at_zero_on(&input, settings.taylor_q0, settings.taylor_levels, spec)?,
            mmse_gap_slope_on(&input, settings.taylor_q0, settings.taylor_levels, spec)?,
        ),
        None => (
            sum_divergence_sequence(law, settings.n_max)?,
            second_derivative_at_zero(&input, settings.taylor_q0, settings.taylor_levels)?,
            mmse_gap_slope(&input, settings.taylor_q0, settings.taylor_levels)?,
        ),
    };
    let (rate, rate_error) = split_rate(rate_fit(&seq, settings.tail_fraction))?;
    qs.iter()
        .map(|&q| {
            assemble(
                law,
                q,
                &seq,
                &d2,
                &d2_gap,
                rate.clone(),
                rate_error.clone(),
                settings.grid.as_ref(),
            )
        })
        .collect()
}

/// The report at a single `Q`.
pub fn theorem1_report(
    law: &SourceDistribution,
    q: f64,
    settings: &Theorem1Settings,
) -> Result<Theorem1Report> {
    Ok(theorem1_sweep(law, &[q], settings)?.remove(0))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    law: &SourceDistribution,
    q: f64,
    seq: &BTreeMap<u32, f64>,
    d2: &TaylorEstimate,
    d2_gap: &TaylorEstimate,
    rate: Option<RateFit>,
    rate_error: Option<String>,
    grid: Option<&GridSpec>,
) -> Result<Theorem1Report> {
    let n: Vec<u32> = seq.keys().copied().collect();
    let d_sum: Vec<f64> = seq.values().copied().collect();
    let dpi: Vec<DpiCheck> = n
        .par_iter()
        .map(|&k| dpi_check_with(law, q, k, grid))
        .collect::<Result<_>>()?;
    let d_channel: Vec<f64> = dpi.iter().map(|c| c.rhs).collect();
    let scaled_lhs: Vec<f64> = dpi.iter().map(|c| c.lhs).collect();
    let delta: Vec<f64> = d_sum.iter().zip(&d_channel).map(|(s, c)| s - c).collect();
    let delta_scaled = delta
        .iter()
        .zip(&n)
        .map(|(d, &k)| d * k as f64 / (q * q))
        .collect();
    let bounds = bound_check(seq, d2, Some(d2_gap), q);

    let bracket = delta
        .iter()
        .zip(&d_sum)
        .all(|(d, s)| *d >= -SLACK && *d <= s + SLACK);
    let chain = scaled_lhs
        .iter()
        .zip(&d_channel)
        .zip(d_sum.iter().zip(&delta))
        .all(|((l, c), (s, d))| *l >= c - SLACK && *c >= s - d - 2.0 * SLACK);
    let first = delta[0];
    let last = *delta.last().expect("nonempty schedule");
    let delta_decreases = if first <= NOISE_FLOOR {
        Verdict::Degenerate
    } else {
        Verdict::from_bool(last < first)
    };
    let taylor_agreement = if d2.noise_floor && d2_gap.noise_floor {
        Verdict::Degenerate
    } else {
        Verdict::from_bool(d2.agrees_with(d2_gap))
    };
    let verdicts = Theorem1Verdicts {
        monotonicity: monotonicity_check(seq).verdict,
        dpi: Verdict::from_bool(dpi.iter().all(|c| c.verdict == Verdict::Pass)),
        delta_bracket: Verdict::from_bool(bracket),
        delta_decreases,
        chain: Verdict::from_bool(chain),
        taylor_agreement,
        bound: bounds.rows.iter().map(|r| r.verdict).collect(),
        empirical_n: bounds.empirical_n,
    };
    Ok(Theorem1Report {
        law: law.name().to_string(),
        q: SnrValue::new(q)?,
        n,
        d_sum,
        d_channel,
        scaled_lhs,
        delta,
        delta_scaled,
        bound: bounds.rows.iter().map(|r| r.bound).collect(),
        d2_estimate: d2.clone(),
        d2_cross_check: d2_gap.clone(),
        rate,
        rate_error,
        verdicts,
    })
}
