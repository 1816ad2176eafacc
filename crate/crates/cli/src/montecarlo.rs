use std::f64::consts::{E, PI};

use nongauss::density::{Family, SourceDistribution};
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramCheck {
    pub q: f64,
    pub samples: u64,
    pub bins: usize,
    /// Plug-in histogram estimate of the channel output divergence.
    pub estimate: f64,
    pub pipeline: f64,
    pub difference: f64,
}

/// One draw of the canonical zero-mean, unit-variance member of the family.
fn canonical<R: Rng + ?Sized>(family: &Family, rng: &mut R) -> f64 {
    match family {
        Family::Gaussian => rng.sample(StandardNormal),
        Family::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
        Family::Laplace => {
            let e: f64 = rng.sample(Exp1);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * e * std::f64::consts::FRAC_1_SQRT_2
        }
        Family::ExponentialCentered => {
            let e: f64 = rng.sample(Exp1);
            e - 1.0
        }
        Family::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        Family::GaussianMixture(components) => {
            let mut u: f64 = rng.random();
            let last = components.len() - 1;
            let c = components
                .iter()
                .position(|c| {
                    u -= c.weight;
                    u < 0.0
                })
                .unwrap_or(last);
            let z: f64 = StandardNormal.sample(rng);
            components[c].mean + components[c].variance.sqrt() * z
        }
    }
}

/// Histogram estimate of `D(W + √q·X)` from `samples` draws.
pub fn histogram_divergence<R: Rng + ?Sized>(
    law: &SourceDistribution,
    q: f64,
    samples: u64,
    bins: usize,
    rng: &mut R,
) -> f64 {
    let sd = (1.0 + q * law.variance()).sqrt();
    let centre = q.sqrt() * law.mean();
    let (lo, hi) = (centre - 10.0 * sd, centre + 10.0 * sd);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let x = law.mean() + law.std_dev() * canonical(law.family(), rng);
        let w: f64 = rng.sample(StandardNormal);
        let y = w + q.sqrt() * x;
        s1 += y;
        s2 += y * y;
        let k = ((y - lo) / width).floor();
        if k >= 0.0 && k < bins as f64 {
            counts[k as usize] += 1;
        }
    }
    let n = samples as f64;
    let var = s2 / n - (s1 / n).powi(2);
    let h: f64 = counts
        .iter()
        .filter(|c| **c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * (p / width).ln()
        })
        .sum();
    0.5 * (2.0 * PI * E * var).ln() - h
}
