use std::f64::consts::SQRT_2;

use nongauss::channel::{
    channel_divergence, conditional_mean, default_snr_grid, mmse, mmse_curve, ChannelInput,
};
use nongauss::convolve::{convolve_densities, normalized_sum_density};
use nongauss::density::{
    pdf_of, standardize, Family, GridSpec, MixtureComponent, SourceDistribution,
};
use nongauss::entropy::non_gaussianness;
use nongauss::taylor::{second_derivative_at_zero, NOISE_FLOOR};
use nongauss::theorem1::{delta_gap, dpi_check, sum_divergences, SLACK};
use num_complex::Complex64;
use proptest::prelude::*;

fn continuous() -> Vec<SourceDistribution> {
    SourceDistribution::builtins()
        .into_iter()
        .filter(|l| l.has_density())
        .collect()
}

fn mixture() -> impl Strategy<Value = SourceDistribution> {
    (
        0.1f64..0.9,
        -2.0f64..2.0,
        -2.0f64..2.0,
        0.2f64..2.0,
        0.2f64..2.0,
    )
        .prop_map(|(w, m1, m2, v1, v2)| {
            SourceDistribution::gaussian_mixture(&[
                MixtureComponent {
                    weight: w,
                    mean: m1,
                    variance: v1,
                },
                MixtureComponent {
                    weight: 1.0 - w,
                    mean: m2,
                    variance: v2,
                },
            ])
            .unwrap()
        })
}

fn symmetric_mixture() -> impl Strategy<Value = SourceDistribution> {
    (0.0f64..2.0, 0.2f64..2.0).prop_map(|(m, v)| {
        SourceDistribution::gaussian_mixture(&[
            MixtureComponent {
                weight: 0.5,
                mean: -m,
                variance: v,
            },
            MixtureComponent {
                weight: 0.5,
                mean: m,
                variance: v,
            },
        ])
        .unwrap()
    })
}

fn builtin() -> impl Strategy<Value = SourceDistribution> {
    prop::sample::select(continuous())
}

fn any_law() -> impl Strategy<Value = SourceDistribution> {
    prop_oneof![builtin(), mixture().prop_map(|m| standardize(&m).unwrap())]
}

fn skewed_or_flat() -> impl Strategy<Value = SourceDistribution> {
    prop::sample::select(vec![
        SourceDistribution::standard(Family::Uniform),
        SourceDistribution::standard(Family::Laplace),
        SourceDistribution::standard(Family::ExponentialCentered),
    ])
}

#[test]
fn rendered_mass_and_cumulants() {
    for law in continuous() {
        let f = pdf_of(&law, &GridSpec::for_law(&law)).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-9, "{}", law.name());
        let (k2, k3, k4) = f.cumulants();
        let m = law.moments();
        assert!(
            (k2 - m.variance).abs() < 1e-5,
            "{}: variance {k2}",
            law.name()
        );
        assert!((k3 - m.kappa3).abs() < 1e-5, "{}: kappa3 {k3}", law.name());
        assert!((k4 - m.kappa4).abs() < 1e-5, "{}: kappa4 {k4}", law.name());
    }
}

#[test]
fn small_snr_ratio_shrinks() {
    for law in SourceDistribution::builtins() {
        let input: ChannelInput = law.clone().into();
        let r: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&q| {
                let d = channel_divergence(&input, q).unwrap().value;
                if d < NOISE_FLOOR {
                    0.0
                } else {
                    d / q
                }
            })
            .collect();
        assert!(r[1] <= r[0] && r[2] <= r[1], "{}: {r:?}", law.name());
        assert!(r[2] < 1e-4, "{}: {r:?}", law.name());
    }
}

#[test]
fn mmse_below_gaussian_on_default_grid() {
    for law in SourceDistribution::builtins() {
        let c = mmse_curve(&law.clone().into(), &default_snr_grid()).unwrap();
        for i in 0..c.q.len() {
            assert!(
                c.mmse_x[i] <= c.mmse_gaussian[i] + 1e-7,
                "{} at q = {:?}",
                law.name(),
                c.q[i]
            );
            assert!(c.mmse_x[i] >= 0.0 && c.mmse_x[i] <= 1.0);
        }
        assert!(
            c.mmse_x.windows(2).all(|w| w[1] <= w[0] + 1e-6),
            "{}",
            law.name()
        );
        assert!(
            c.divergence.windows(2).all(|w| w[1] >= w[0] - 1e-8),
            "{}",
            law.name()
        );
        if law.has_density() {
            let limit = non_gaussianness(&pdf_of(&law, &GridSpec::for_law(&law)).unwrap())
                .unwrap()
                .value;
            assert!(
                c.divergence.iter().all(|d| *d <= limit + 1e-6),
                "{}",
                law.name()
            );
        }
    }
}

fn spectral_spatial_gap(z: &SourceDistribution, spec: &GridSpec) -> f64 {
    let spectral = normalized_sum_density(z, 2, spec).unwrap();
    let half = pdf_of(&z.scaled(1.0 / SQRT_2), spec).unwrap();
    let spatial = convolve_densities(&half, &half).unwrap();
    spectral
        .values()
        .iter()
        .zip(spatial.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn spectral_pair_matches_spatial_convolution_for_builtins() {
    let g = SourceDistribution::standard(Family::Gaussian);
    assert!(spectral_spatial_gap(&g, &GridSpec::for_law(&g)) < 1e-7);
    let m = SourceDistribution::default_mixture();
    assert!(spectral_spatial_gap(&m, &GridSpec::for_law(&m)) < 1e-7);
    // the kink at zero needs the finer spacing
    let l = SourceDistribution::standard(Family::Laplace);
    let gap = spectral_spatial_gap(&l, &GridSpec::for_law_with_points(&l, 1 << 16));
    assert!(gap < 1e-7, "{gap}");
}

#[test]
fn taylor_ratios_stay_bounded() {
    for law in SourceDistribution::builtins() {
        let e = second_derivative_at_zero(&law.clone().into(), 0.5, 8).unwrap();
        let top = e.ladder[0].1.abs();
        assert!(
            e.ladder
                .iter()
                .all(|(_, r)| r.is_finite() && r.abs() <= top + 1e-6),
            "{}: {:?}",
            law.name(),
            e.ladder
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixture_renders_with_unit_mass(law in mixture()) {
        let f = pdf_of(&law, &GridSpec::for_law(&law)).unwrap();
        prop_assert!((f.mass() - 1.0).abs() < 1e-9);
        let z = standardize(&law).unwrap();
        let (k2, k3, k4) = pdf_of(&z, &GridSpec::for_law(&z)).unwrap().cumulants();
        let m = z.moments();
        prop_assert!((k2 - m.variance).abs() < 1e-5);
        prop_assert!((k3 - m.kappa3).abs() < 1e-5);
        prop_assert!((k4 - m.kappa4).abs() < 1e-5);
    }

    #[test]
    fn characteristic_function_is_fourier_transform(law in any_law(), t in -20.0f64..20.0) {
        // a jump leaves an O(dx²·t) trapezoid error, about 1e-5 at the default spacing
        let spec = if law.jumps().is_empty() {
            GridSpec::for_law(&law)
        } else {
            GridSpec::for_law_with_points(&law, 1 << 16)
        };
        let f = pdf_of(&law, &spec).unwrap();
        let ft: Complex64 = f
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| spec.weight(k) * v * Complex64::from_polar(1.0, t * spec.x(k)))
            .sum();
        let cf = law.characteristic_function(t);
        prop_assert!((ft - cf).norm() < 1e-6, "{}: |{ft} - {cf}|", law.name());
    }

    #[test]
    fn sums_keep_unit_variance(law in any_law(), n in 1u32..=64) {
        let f = normalized_sum_density(&law, n, &GridSpec::for_law(&law)).unwrap();
        prop_assert!((f.variance() - 1.0).abs() < 1e-6, "{} n = {n}: {}", law.name(), f.variance());
        prop_assert!((f.mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sums_keep_symmetry(
        law in prop_oneof![
            prop::sample::select(vec![
                SourceDistribution::standard(Family::Gaussian),
                SourceDistribution::standard(Family::Uniform),
                SourceDistribution::standard(Family::Laplace),
            ]),
            symmetric_mixture(),
        ],
        n in 1u32..=64,
    ) {
        let f = normalized_sum_density(&law, n, &GridSpec::for_law(&law)).unwrap();
        prop_assert!(f.asymmetry() < 1e-9, "{} n = {n}: {}", law.name(), f.asymmetry());
    }

    #[test]
    fn spectral_pair_matches_spatial_convolution(law in mixture()) {
        let z = standardize(&law).unwrap();
        let sup = spectral_spatial_gap(&z, &GridSpec::for_law(&z));
        prop_assert!(sup < 1e-7, "sup-norm {sup}");
    }

    #[test]
    fn divergence_ignores_scale(law in any_law(), pick in 0usize..3, n in 2u32..64) {
        let a = [0.5, 2.0, (n as f64).sqrt()][pick];
        let spec = GridSpec::for_law(&law);
        let d = non_gaussianness(&pdf_of(&law, &spec).unwrap()).unwrap().value;
        let scaled = non_gaussianness(&pdf_of(&law.scaled(a), &spec.scaled(a)).unwrap()).unwrap().value;
        prop_assert!(d >= -1e-8 && scaled >= -1e-8);
        prop_assert!((d - scaled).abs() < 1e-6, "{}: {d} vs {scaled} at a = {a}", law.name());
    }

    #[test]
    fn noise_never_adds_non_gaussianness(law in any_law(), q1 in 0.0f64..50.0, dq in 0.0f64..50.0) {
        let input: ChannelInput = law.clone().into();
        let d_law = non_gaussianness(&pdf_of(&law, &GridSpec::for_law(&law)).unwrap()).unwrap().value;
        let d1 = channel_divergence(&input, q1).unwrap().value;
        let d2 = channel_divergence(&input, q1 + dq).unwrap().value;
        prop_assert!(d1 >= -1e-8);
        prop_assert!(d1 <= d2 + 1e-8, "{}: D({q1}) = {d1} > D({}) = {d2}", law.name(), q1 + dq);
        prop_assert!(d2 <= d_law + 1e-6);
    }

    #[test]
    fn mmse_never_exceeds_gaussian(
        law in prop_oneof![any_law(), Just(SourceDistribution::standard(Family::Rademacher))],
        q in 0.0f64..100.0,
    ) {
        let m = mmse(&law.clone().into(), q).unwrap();
        prop_assert!(m <= 1.0 / (1.0 + q) + 1e-7, "{} at q = {q}: {m}", law.name());
        prop_assert!(m >= 0.0);
    }

    #[test]
    fn posterior_mean_is_odd(
        law in prop_oneof![
            prop::sample::select(vec![
                SourceDistribution::standard(Family::Uniform),
                SourceDistribution::standard(Family::Laplace),
                SourceDistribution::standard(Family::Rademacher),
                SourceDistribution::standard(Family::Gaussian),
            ]),
            symmetric_mixture().prop_map(|m| standardize(&m).unwrap()),
        ],
        y in -10.0f64..10.0,
        q in 0.01f64..100.0,
    ) {
        let input: ChannelInput = law.clone().into();
        let a = conditional_mean(y, &input, q).unwrap();
        let b = conditional_mean(-y, &input, q).unwrap();
        prop_assert!((a + b).abs() < 1e-8, "{}: {a} + {b}", law.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chain_and_bracket_hold(law in skewed_or_flat(), q in 0.5f64..64.0, n in 1u32..=32) {
        let d_sum = sum_divergences(&law, &[n], nongauss::density::DEFAULT_POINTS).unwrap()[&n];
        let dpi = dpi_check(&law, q, n).unwrap();
        let delta = delta_gap(&law, q, n).unwrap();
        prop_assert!(dpi.lhs >= dpi.rhs - SLACK);
        prop_assert!(dpi.rhs >= d_sum - delta - 2.0 * SLACK);
        prop_assert!(delta >= -SLACK && delta <= d_sum + SLACK, "{} Q = {q} n = {n}: {delta}", law.name());
    }

    #[test]
    fn delta_falls_with_snr(law in skewed_or_flat(), q in 0.5f64..32.0, factor in 1.0f64..8.0, n in 1u32..=16) {
        let lo = delta_gap(&law, q, n).unwrap();
        let hi = delta_gap(&law, q * factor, n).unwrap();
        prop_assert!(hi <= lo + SLACK, "{} n = {n}: Δ({q}) = {lo}, Δ({}) = {hi}", law.name(), q * factor);
    }
}
