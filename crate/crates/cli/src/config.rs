use std::path::{Path, PathBuf};

use nongauss::density::{
    standardize, Family, GridSpec, MixtureComponent, SourceDistribution, DEFAULT_POINTS,
};
use nongauss::theorem1::{Theorem1Settings, DEFAULT_Q_SWEEP, MAX_N};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Gaussian,
    Uniform,
    Laplace,
    #[serde(alias = "exponential")]
    #[value(alias = "exponential")]
    ExponentialCentered,
    Rademacher,
    #[serde(alias = "mixture")]
    #[value(alias = "mixture")]
    GaussianMixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub family: FamilyName,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<MixtureComponent>>,
}

fn yes() -> bool {
    true
}

impl DistributionConfig {
    pub fn standard(family: FamilyName) -> Self {
        DistributionConfig {
            family,
            standardize: true,
            mean: None,
            variance: None,
            low: None,
            high: None,
            location: None,
            b: None,
            rate: None,
            amplitude: None,
            components: None,
        }
    }

    fn given(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut note = |k, present: bool| {
            if present {
                keys.push(k)
            }
        };
        note("mean", self.mean.is_some());
        note("variance", self.variance.is_some());
        note("low", self.low.is_some());
        note("high", self.high.is_some());
        note("location", self.location.is_some());
        note("b", self.b.is_some());
        note("rate", self.rate.is_some());
        note("amplitude", self.amplitude.is_some());
        note("components", self.components.is_some());
        keys
    }

    fn accepted(&self) -> &'static [&'static str] {
        match self.family {
            FamilyName::Gaussian => &["mean", "variance"],
            FamilyName::Uniform => &["low", "high"],
            FamilyName::Laplace => &["location", "b"],
            FamilyName::ExponentialCentered => &["rate"],
            FamilyName::Rademacher => &["amplitude"],
            FamilyName::GaussianMixture => &["components"],
        }
    }

    pub fn build(&self) -> CliResult<SourceDistribution> {
        let accepted = self.accepted();
        if let Some(k) = self.given().into_iter().find(|k| !accepted.contains(k)) {
            return Err(CliError::Config(format!(
                "parameter `{k}` does not apply to this family"
            )));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Config(format!(
                    "{name} must be finite and positive, got {v}"
                )))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Config(format!("{name} must be finite, got {v}")))
            }
        };
        let law = match self.family {
            FamilyName::Gaussian if self.mean.is_none() && self.variance.is_none() => {
                SourceDistribution::standard(Family::Gaussian)
            }
            FamilyName::Gaussian => SourceDistribution::gaussian(
                finite("mean", self.mean.unwrap_or(0.0))?,
                positive("variance", self.variance.unwrap_or(1.0))?,
            ),
            FamilyName::Uniform => match (self.low, self.high) {
                (None, None) => SourceDistribution::standard(Family::Uniform),
                (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => {
                    SourceDistribution::uniform(lo, hi)
                }
                _ => return Err(CliError::Config("uniform needs finite low < high".into())),
            },
            FamilyName::Laplace if self.location.is_none() && self.b.is_none() => {
                SourceDistribution::standard(Family::Laplace)
            }
            FamilyName::Laplace => SourceDistribution::laplace(
                finite("location", self.location.unwrap_or(0.0))?,
                positive("b", self.b.unwrap_or(std::f64::consts::FRAC_1_SQRT_2))?,
            ),
            FamilyName::ExponentialCentered => match self.rate {
                None => SourceDistribution::standard(Family::ExponentialCentered),
                Some(r) => SourceDistribution::exponential(positive("rate", r)?),
            },
            FamilyName::Rademacher => match self.amplitude {
                None => SourceDistribution::standard(Family::Rademacher),
                Some(a) => SourceDistribution::rademacher(positive("amplitude", a)?),
            },
            FamilyName::GaussianMixture => match &self.components {
                None => SourceDistribution::default_mixture(),
                Some(c) => SourceDistribution::gaussian_mixture(c)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            },
        };
        if self.standardize {
            standardize(&law).map_err(|e| CliError::Config(e.to_string()))
        } else {
            Ok(law)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width `L` in standardized units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Node count `N`, a power of two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrConfig {
    /// Explicit SNR values; replaces the geometric grid when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub include_zero: bool,
}

impl Default for SnrConfig {
    fn default() -> Self {
        SnrConfig {
            values: None,
            min: 1e-3,
            max: 1e2,
            points: 40,
            include_zero: true,
        }
    }
}

impl SnrConfig {
    pub fn grid(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let last = (self.points - 1) as f64;
        let geometric = (0..self.points).map(|i| (lo + (hi - lo) * i as f64 / last).exp());
        if self.include_zero {
            std::iter::once(0.0).chain(geometric).collect()
        } else {
            geometric.collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaylorConfig {
    pub q0: f64,
    pub levels: usize,
}

impl Default for TaylorConfig {
    fn default() -> Self {
        let s = Theorem1Settings::default();
        TaylorConfig {
            q0: s.taylor_q0,
            levels: s.taylor_levels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    /// Samples per SNR for the histogram cross-check; zero disables it.
    pub samples: u64,
    pub bins: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            samples: 0,
            bins: 2048,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatChoice {
    Csv,
    Json,
    Both,
}

impl FormatChoice {
    fn formats(self) -> Vec<Format> {
        match self {
            FormatChoice::Csv => vec![Format::Csv],
            FormatChoice::Json => vec![Format::Json],
            FormatChoice::Both => vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("nongauss-out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub distribution: DistributionConfig,
    pub grid: GridConfig,
    pub snr: SnrConfig,
    #[serde(rename = "Q")]
    pub q_list: Vec<f64>,
    pub n_max: u32,
    pub tail_fraction: f64,
    pub taylor: TaylorConfig,
    pub monte_carlo: MonteCarloConfig,
    pub output: OutputConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = Theorem1Settings::default();
        RunConfig {
            distribution: DistributionConfig::standard(FamilyName::Uniform),
            grid: GridConfig::default(),
            snr: SnrConfig::default(),
            q_list: DEFAULT_Q_SWEEP.to_vec(),
            n_max: s.n_max,
            tail_fraction: s.tail_fraction,
            taylor: TaylorConfig::default(),
            monte_carlo: MonteCarloConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Source family; resets the family parameters.
    #[arg(long, value_enum)]
    pub dist: Option<FamilyName>,
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Total SNR values, comma separated.
    #[arg(long = "Q", value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_l: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match &overrides.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(f) = o.dist {
            if f != self.distribution.family {
                let standardize = self.distribution.standardize;
                self.distribution = DistributionConfig {
                    standardize,
                    ..DistributionConfig::standard(f)
                };
            }
        }
        if let Some(n) = o.n_max {
            self.n_max = n;
        }
        if let Some(q) = &o.q {
            self.q_list = q.clone();
        }
        if let Some(n) = o.grid_n {
            self.grid.points = Some(n);
        }
        if let Some(l) = o.grid_l {
            self.grid.half_width = Some(l);
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(f) = o.format {
            self.output.formats = f.formats();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.distribution.build()?;
        self.grid_override(GridSpec::new(10.0, DEFAULT_POINTS).expect("valid default"))?;
        match &self.snr.values {
            Some(v) => {
                if v.is_empty() || v.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                    return bad("snr.values must be finite and nonnegative".into());
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("snr.values must be strictly ascending".into());
                }
            }
            None => {
                let s = &self.snr;
                if !(s.min > 0.0 && s.max > s.min && s.max.is_finite()) || s.points < 2 {
                    return bad("snr grid needs 0 < min < max and at least 2 points".into());
                }
            }
        }
        if self.q_list.is_empty() || self.q_list.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            return bad("Q values must be finite and positive".into());
        }
        if self.n_max == 0 || self.n_max > MAX_N {
            return bad(format!("n_max must lie in 1..={MAX_N}, got {}", self.n_max));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad(format!(
                "tail_fraction must lie in (0, 1], got {}",
                self.tail_fraction
            ));
        }
        if !(self.taylor.q0 > 0.0 && self.taylor.q0.is_finite())
            || !(3..=30).contains(&self.taylor.levels)
        {
            return bad("taylor needs q0 > 0 and 3 to 30 levels".into());
        }
        if self.monte_carlo.samples > 0 && self.monte_carlo.bins < 2 {
            return bad("monte_carlo.bins must be at least 2".into());
        }
        if self.output.formats.is_empty() {
            return bad("output.formats must not be empty".into());
        }
        Ok(())
    }

    pub fn law(&self) -> CliResult<SourceDistribution> {
        self.distribution.build()
    }

    /// The configured grid, filling unset fields from `base`; `None` when
    /// neither field is set.
    pub fn grid_override(&self, base: GridSpec) -> CliResult<Option<GridSpec>> {
        if self.grid.half_width.is_none() && self.grid.points.is_none() {
            return Ok(None);
        }
        let l = self.grid.half_width.unwrap_or(base.half_width());
        let n = self.grid.points.unwrap_or(base.points());
        GridSpec::new(l, n)
            .map(Some)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    pub fn theorem1_settings(&self, base: GridSpec) -> CliResult<Theorem1Settings> {
        Ok(Theorem1Settings {
            n_max: self.n_max,
            tail_fraction: self.tail_fraction,
            taylor_q0: self.taylor.q0,
            taylor_levels: self.taylor.levels,
            grid: self.grid_override(base)?,
        })
    }
}
