use std::collections::BTreeMap;

use nongauss::channel::{
    channel_divergence_on, cmmse_identity_check_on, immse_identity_check_on, mmse_curve_on,
    standardized_grid, ChannelInput, IdentityCheck,
};
use nongauss::density::{standardize, GridSpec, SourceDistribution, DEFAULT_POINTS};
use nongauss::taylor::NOISE_FLOOR;
use nongauss::theorem1::{
    capacity_report_from, monotonicity_check, n_schedule, sum_divergences, sum_divergences_on,
    theorem1_sweep, CapacityReport, MonotonicityCheck, Theorem1Report,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliResult;
use crate::montecarlo::{histogram_divergence, HistogramCheck};
use crate::output::{fmt_label, fmt_num, json_artifact, Artifact, Table};

fn sum_sequence(cfg: &RunConfig, law: &SourceDistribution) -> CliResult<BTreeMap<u32, f64>> {
    let ns = n_schedule(cfg.n_max);
    let base = GridSpec::for_law(&standardize(law)?);
    Ok(match cfg.grid_override(base)? {
        Some(spec) => sum_divergences_on(law, &ns, &spec)?,
        None => sum_divergences(law, &ns, DEFAULT_POINTS)?,
    })
}

#[derive(Serialize)]
struct SumResult<'a> {
    law: &'a str,
    n_max: u32,
    monotonicity: MonotonicityCheck,
}

pub fn cmd_sum(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let law = cfg.law()?;
    let seq = sum_sequence(cfg, &law)?;
    let mut out = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(&["n", "D_nats", "noise_flag"]);
        for (&n, &d) in &seq {
            t.row(vec![
                n.to_string(),
                fmt_num(d),
                (d < NOISE_FLOOR).to_string(),
            ]);
        }
        out.push(t.into_artifact("sum_divergence.csv"));
    }
    if cfg.wants(Format::Json) {
        let result = SumResult {
            law: law.name(),
            n_max: cfg.n_max,
            monotonicity: monotonicity_check(&seq),
        };
        out.push(json_artifact("sum_monotonicity.json", "sum", cfg, result)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ChannelResult<'a> {
    law: &'a str,
    grid: GridSpec,
    immse: Vec<IdentityCheck>,
    cmmse: Vec<IdentityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<Vec<HistogramCheck>>,
}

pub fn cmd_channel(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let law = cfg.law()?;
    let input = ChannelInput::Law(law.clone());
    let default = standardized_grid(&input);
    let spec = cfg.grid_override(default)?.unwrap_or(default);
    let curve = mmse_curve_on(&input, &cfg.snr.grid(), &spec)?;
    let mut out = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(&["q", "mmse_x", "mmse_gaussian", "D"]);
        for i in 0..curve.q.len() {
            t.row(vec![
                fmt_num(curve.q[i].get()),
                fmt_num(curve.mmse_x[i]),
                fmt_num(curve.mmse_gaussian[i]),
                fmt_num(curve.divergence[i]),
            ]);
        }
        out.push(t.into_artifact("channel_curve.csv"));
    }
    if cfg.wants(Format::Json) {
        let immse = cfg
            .q_list
            .iter()
            .map(|&q| immse_identity_check_on(&input, q, None, &spec))
            .collect::<Result<_, _>>()?;
        let cmmse = cfg
            .q_list
            .iter()
            .map(|&q| cmmse_identity_check_on(&input, q, &spec))
            .collect::<Result<_, _>>()?;
        let monte_carlo = if cfg.monte_carlo.samples > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut checks = Vec::new();
            for &q in &cfg.q_list {
                let (samples, bins) = (cfg.monte_carlo.samples, cfg.monte_carlo.bins);
                let estimate = histogram_divergence(&law, q, samples, bins, &mut rng);
                let pipeline = channel_divergence_on(&input, q, &spec)?.value;
                checks.push(HistogramCheck {
                    q,
                    samples,
                    bins,
                    estimate,
                    pipeline,
                    difference: estimate - pipeline,
                });
            }
            Some(checks)
        } else {
            None
        };
        let result = ChannelResult {
            law: law.name(),
            grid: spec,
            immse,
            cmmse,
            monte_carlo,
        };
        out.push(json_artifact(
            "channel_identities.json",
            "channel",
            cfg,
            result,
        )?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Theorem1Result<'a> {
    reports: &'a [Theorem1Report],
}

pub fn cmd_theorem1(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let law = cfg.law()?;
    let settings = cfg.theorem1_settings(standardized_grid(&ChannelInput::Law(law.clone())))?;
    let reports = theorem1_sweep(&law, &cfg.q_list, &settings)?;
    let mut out = Vec::new();
    if cfg.wants(Format::Csv) {
        for r in &reports {
            let mut t = Table::new(&[
                "n",
                "D_sum",
                "D_channel",
                "scaled_lhs",
                "delta",
                "delta_scaled",
                "bound",
                "verdict",
            ]);
            for i in 0..r.n.len() {
                t.row(vec![
                    r.n[i].to_string(),
                    fmt_num(r.d_sum[i]),
                    fmt_num(r.d_channel[i]),
                    fmt_num(r.scaled_lhs[i]),
                    fmt_num(r.delta[i]),
                    fmt_num(r.delta_scaled[i]),
                    fmt_num(r.bound[i]),
                    r.verdicts.bound[i].as_str().to_string(),
                ]);
            }
            out.push(t.into_artifact(format!("theorem1_Q{}.csv", fmt_label(r.q.get()))));
        }
    }
    if cfg.wants(Format::Json) {
        out.push(json_artifact(
            "theorem1_report.json",
            "theorem1",
            cfg,
            Theorem1Result { reports: &reports },
        )?);
    }
    Ok(out)
}

pub fn cmd_capacity(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let law = cfg.law()?;
    let seq = sum_sequence(cfg, &law)?;
    let report: CapacityReport = capacity_report_from(&law, &seq, cfg.tail_fraction)?;
    let mut out = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(&["n", "excess_nats"]);
        for row in &report.rows {
            t.row(vec![row.n.to_string(), fmt_num(row.excess)]);
        }
        out.push(t.into_artifact("capacity.csv"));
    }
    if cfg.wants(Format::Json) {
        out.push(json_artifact("capacity.json", "capacity", cfg, &report)?);
    }
    Ok(out)
}
