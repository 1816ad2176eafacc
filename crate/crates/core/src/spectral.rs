//! Discrete Fourier inversion between a [`GridSpec`] and its conjugate
//! frequency axis `t_m = m·2π/(N·dx)`, `m ∈ [-N/2, N/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::density::GridSpec;

/// Mass in the edge bands above which it is treated as wrapped around the window.
pub(crate) const EDGE_MASS_LIMIT: f64 = 1e-11;
/// Characteristic-function magnitude at Nyquist above which the grid is too coarse.
pub(crate) const NYQUIST_LIMIT: f64 = 1e-3;

pub(crate) fn frequency_step(spec: &GridSpec) -> f64 {
    2.0 * PI / (spec.points() as f64 * spec.dx())
}

/// Signed frequency index of FFT bin `j`.
fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// `exp(-i·t_m·x_0)` for `x_0 = -L`, using `t_m·x_0 = -π·m·(N-1)/N` exactly.
fn origin_phase(m: i64, n: usize) -> Complex64 {
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Complex64::from_polar(sign, -PI * m as f64 / n as f64)
}

/// Values `Re (1/2π) ∫ cf(t) exp(-itx) dt` at every node of `spec`, by the
/// trapezoid rule on the conjugate frequency axis. Bins where `cf` returns
/// exactly zero are skipped by the caller's choice of closure.
pub(crate) fn invert(spec: &GridSpec, cf: impl Fn(f64) -> Complex64) -> Vec<f64> {
    let n = spec.points();
    let dt = frequency_step(spec);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let m = signed_index(j, n);
            let v = cf(m as f64 * dt);
            if v == Complex64::new(0.0, 0.0) {
                v
            } else {
                v * origin_phase(m, n)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dt / (2.0 * PI);
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Trapezoid Fourier transform `Σ_k w_k f_k exp(i t_m x_k)` on the conjugate
/// frequency axis, returned in FFT bin order.
pub(crate) fn forward(spec: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let n = spec.points();
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| Complex64::new(v * spec.weight(k), 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter_mut().enumerate().for_each(|(j, c)| {
        let m = signed_index(j, n);
        *c *= origin_phase(m, n).conj();
    });
    buf
}

/// Inverts spectrum samples already laid out in FFT bin order.
pub(crate) fn invert_bins(spec: &GridSpec, bins: Vec<Complex64>) -> Vec<f64> {
    let n = spec.points();
    let mut bins = bins;
    bins.iter_mut()
        .enumerate()
        .for_each(|(j, c)| *c *= origin_phase(signed_index(j, n), n));
    FftPlanner::new().plan_fft_forward(n).process(&mut bins);
    let scale = frequency_step(spec) / (2.0 * PI);
    bins.into_iter().map(|c| c.re * scale).collect()
}

/// Signed mass in the outermost 1/64 of the nodes on each side. Spectral
/// ringing oscillates and cancels here; mass wrapped around the periodic
/// window does not.
pub(crate) fn edge_mass(spec: &GridSpec, values: &[f64]) -> f64 {
    let band = (values.len() / 64).max(1);
    let lower: f64 = values[..band].iter().sum();
    let upper: f64 = values[values.len() - band..].iter().sum();
    spec.dx() * lower.abs().max(upper.abs())
}

/// `Σ_k c_k exp(i·β·m·(x0 + k·h))` for every signed bin `m` of an `n`-point
/// axis, in FFT bin order, by the chirp-z factorization `mk = (m² + k² - (m-k)²)/2`.
pub(crate) fn sampled_transform(
    x0: f64,
    h: f64,
    coeffs: &[f64],
    beta: f64,
    n: usize,
) -> Vec<Complex64> {
    let k_len = coeffs.len();
    let alpha = beta * h;
    let half = (n / 2) as f64;
    let size = (k_len + n - 1).next_power_of_two();
    let chirp = |j: usize| {
        let jj = (j as u64 * j as u64) as f64;
        Complex64::from_polar(1.0, 0.5 * alpha * jj)
    };
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for (k, &c) in coeffs.iter().enumerate() {
        a[k] = c * Complex64::from_polar(1.0, -alpha * half * k as f64) * chirp(k);
    }
    let mut g = vec![Complex64::new(0.0, 0.0); size];
    for (d, slot) in g.iter_mut().enumerate().take(n) {
        *slot = chirp(d).conj();
    }
    for d in 1..k_len {
        g[size - d] = chirp(d).conj();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    fwd.process(&mut a);
    fwd.process(&mut g);
    let mut conv: Vec<Complex64> = a.iter().zip(&g).map(|(x, y)| x * y).collect();
    planner.plan_fft_inverse(size).process(&mut conv);
    let norm = 1.0 / size as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in conv.iter().enumerate().take(n) {
        let m = j as f64 - half;
        let v = c * norm * chirp(j) * Complex64::from_polar(1.0, beta * m * x0);
        let bin = if m < 0.0 {
            (m as i64 + n as i64) as usize
        } else {
            m as usize
        };
        out[bin] = v;
    }
    out
}

pub(crate) fn nyquist(spec: &GridSpec) -> f64 {
    PI / spec.dx()
}
