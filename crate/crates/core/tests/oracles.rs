//! Pipeline values against oracles that share no code with the library:
//! sampling, Gauss-Hermite quadrature, and closed-form densities integrated
//! by adaptive quadrature.

use std::f64::consts::{E, PI};
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use nongauss::channel::{channel_divergence, mmse, ChannelInput};
use nongauss::density::{Family, SourceDistribution, DEFAULT_POINTS};
use nongauss::theorem1::sum_divergences;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

fn law(f: Family) -> SourceDistribution {
    SourceDistribution::standard(f)
}

fn gaussian_entropy(var: f64) -> f64 {
    0.5 * (2.0 * PI * E * var).ln()
}

/// `-∫ f ln f` over `[a, b]` split at `cuts`.
fn entropy_by_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, cuts: &[f64]) -> f64 {
    let g = |x: f64| {
        let v = f(x);
        if v > 0.0 {
            -v * v.ln()
        } else {
            0.0
        }
    };
    let mut edges = vec![a];
    edges.extend(cuts.iter().copied().filter(|c| *c > a && *c < b));
    edges.push(b);
    edges
        .windows(2)
        .map(|w| quadrature::double_exponential::integrate(g, w[0], w[1], 1e-13).integral)
        .sum()
}

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[test]
fn uniform_channel_matches_histogram_estimate() {
    let q: f64 = 1.0;
    let samples = 10_000_000usize;
    let bins = 2048usize;
    let (lo, hi) = (-8.0, 8.0);
    let width = (hi - lo) / bins as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let u = Uniform::new(-3f64.sqrt(), 3f64.sqrt()).unwrap();
    let mut counts = vec![0u64; bins];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let w: f64 = StandardNormal.sample(&mut rng);
        let y = w + q.sqrt() * u.sample(&mut rng);
        sum += y;
        sum2 += y * y;
        let k = ((y - lo) / width).floor();
        if k >= 0.0 && (k as usize) < bins {
            counts[k as usize] += 1;
        }
    }
    let n = samples as f64;
    let var = sum2 / n - (sum / n).powi(2);
    let h: f64 = counts
        .iter()
        .filter(|c| **c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * (p / width).ln()
        })
        .sum();
    let estimate = gaussian_entropy(var) - h;
    let pipeline = channel_divergence(&law(Family::Uniform).into(), q)
        .unwrap()
        .value;
    assert!(
        (estimate - pipeline).abs() < 2e-3,
        "histogram {estimate} vs pipeline {pipeline}"
    );
}

#[test]
fn rademacher_mmse_matches_gauss_hermite() {
    let gh = GaussHermite::new(NonZeroUsize::new(120).unwrap());
    let input: ChannelInput = law(Family::Rademacher).into();
    for q in [0.25f64, 1.0, 4.0] {
        // X = +1 by symmetry; E[X | Y] = tanh(√q·Y) with Y = √q + Z.
        let e = gh.integrate(|x| {
            (q.sqrt() * (q.sqrt() + std::f64::consts::SQRT_2 * x))
                .tanh()
                .powi(2)
        }) / PI.sqrt();
        let oracle = 1.0 - e;
        let got = mmse(&input, q).unwrap();
        assert!((got - oracle).abs() < 1e-5, "q = {q}: {got} vs {oracle}");
    }
}

fn irwin_hall_pdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 || x >= n as f64 {
        return 0.0;
    }
    let mut s = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 1..n {
        fact *= k as f64;
    }
    for k in 0..=x.floor() as u32 {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom * (x - k as f64).powi(n as i32 - 1);
    }
    s / fact
}

#[test]
fn uniform_sums_match_irwin_hall() {
    let ns = [2, 3, 4, 6];
    let d = sum_divergences(&law(Family::Uniform), &ns, DEFAULT_POINTS).unwrap();
    for n in ns {
        let cuts: Vec<f64> = (1..n).map(f64::from).collect();
        let h = entropy_by_quadrature(|x| irwin_hall_pdf(n, x), 0.0, n as f64, &cuts);
        let oracle = gaussian_entropy(n as f64 / 12.0) - h;
        assert!(
            (d[&n] - oracle).abs() < 2e-5,
            "n = {n}: {} vs {oracle}",
            d[&n]
        );
    }
}

#[test]
fn exponential_sums_match_gamma() {
    let ns = [1, 2, 4, 8, 16];
    let d = sum_divergences(&law(Family::ExponentialCentered), &ns, DEFAULT_POINTS).unwrap();
    for n in ns {
        let k = n as f64;
        let ln_norm = libm::lgamma(k);
        let pdf = |x: f64| {
            if x > 0.0 {
                ((k - 1.0) * x.ln() - x - ln_norm).exp()
            } else {
                0.0
            }
        };
        let h = entropy_by_quadrature(pdf, 0.0, k + 60.0 * k.sqrt() + 60.0, &[k]);
        let oracle = gaussian_entropy(k) - h;
        assert!(
            (d[&n] - oracle).abs() < 1e-5,
            "n = {n}: {} vs {oracle}",
            d[&n]
        );
    }
}

/// Density of `W + a·U` with `U` uniform on `[-√3, √3]`.
fn smeared_uniform(a: f64, y: f64) -> f64 {
    let r = a * 3f64.sqrt();
    (phi(y + r) - phi(y - r)) / (2.0 * r)
}

#[test]
fn uniform_channel_matches_exact_density() {
    for q in [0.1f64, 1.0, 4.0, 100.0, 1e4] {
        let a = q.sqrt();
        let r = a * 3f64.sqrt();
        let h = entropy_by_quadrature(
            |y| smeared_uniform(a, y),
            -r - 40.0,
            r + 40.0,
            &[-r, 0.0, r],
        );
        let oracle = gaussian_entropy(1.0 + q) - h;
        let got = channel_divergence(&law(Family::Uniform).into(), q)
            .unwrap()
            .value;
        assert!((got - oracle).abs() < 1e-6, "q = {q}: {got} vs {oracle}");
    }
}

#[test]
fn uniform_high_snr_value() {
    let q: f64 = 1e4;
    let a = q.sqrt();
    let r = a * 3f64.sqrt();
    let h = entropy_by_quadrature(
        |y| smeared_uniform(a, y),
        -r - 40.0,
        r + 40.0,
        &[-r, 0.0, r],
    );
    let oracle = gaussian_entropy(1.0 + q) - h;
    assert!((oracle - 0.171321).abs() < 1e-6, "{oracle}");
    let limit = gaussian_entropy(1.0) - (2.0 * 3f64.sqrt()).ln();
    assert!((limit - oracle) / limit > 0.02);
}
