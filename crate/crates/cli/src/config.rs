use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use regretlab::{CaseKind, EtaVariant, LearnerKind, PermutationSource, ReportFormat, RunMode};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "REGRETLAB_SEED";

/// `exhaustive` or `sampled:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PermSpec {
    Exhaustive,
    Sampled(usize),
}

/// `analytic` or `sampled:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModeSpec {
    Analytic,
    Sampled(usize),
}

fn parse_sampled(s: &str) -> Option<anyhow::Result<usize>> {
    let n = s.strip_prefix("sampled:")?;
    Some(match n.parse::<usize>() {
        Ok(0) => Err(anyhow::anyhow!("sampled count must be at least 1")),
        Ok(n) => Ok(n),
        Err(_) => Err(anyhow::anyhow!("invalid sampled count `{n}`")),
    })
}

impl FromStr for PermSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "exhaustive" {
            return Ok(PermSpec::Exhaustive);
        }
        match parse_sampled(s) {
            Some(n) => Ok(PermSpec::Sampled(n?)),
            None => bail!("expected `exhaustive` or `sampled:N`, got `{s}`"),
        }
    }
}

impl FromStr for ModeSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "analytic" {
            return Ok(ModeSpec::Analytic);
        }
        match parse_sampled(s) {
            Some(n) => Ok(ModeSpec::Sampled(n?)),
            None => bail!("expected `analytic` or `sampled:N`, got `{s}`"),
        }
    }
}

impl fmt::Display for PermSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermSpec::Exhaustive => f.write_str("exhaustive"),
            PermSpec::Sampled(n) => write!(f, "sampled:{n}"),
        }
    }
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeSpec::Analytic => f.write_str("analytic"),
            ModeSpec::Sampled(n) => write!(f, "sampled:{n}"),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl TryFrom<String> for $t {
            type Error = String;
            fn try_from(s: String) -> Result<Self, String> {
                s.parse().map_err(|e: anyhow::Error| e.to_string())
            }
        }
        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    };
}

string_serde!(PermSpec);
string_serde!(ModeSpec);

/// A fully resolved experiment. The JSON form mirrors the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: CaseKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
    pub learners: Vec<LearnerKind>,
    pub perm: PermSpec,
    pub seed: u64,
    pub eta_variant: EtaVariant,
    pub mode: ModeSpec,
    pub format: ReportFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub check_bounds: bool,
}

/// Config file contents: every field optional, flags fill in or override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub case: Option<CaseKind>,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    pub d: Option<usize>,
    pub learners: Option<Vec<LearnerKind>>,
    pub perm: Option<PermSpec>,
    pub seed: Option<u64>,
    pub eta_variant: Option<EtaVariant>,
    pub mode: Option<ModeSpec>,
    pub format: Option<ReportFormat>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub check_bounds: Option<bool>,
}

impl PartialConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// `self` takes precedence over `base`.
    pub fn or(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            case: self.case.or(base.case),
            horizon: self.horizon.or(base.horizon),
            d: self.d.or(base.d),
            learners: self.learners.or(base.learners),
            perm: self.perm.or(base.perm),
            seed: self.seed.or(base.seed),
            eta_variant: self.eta_variant.or(base.eta_variant),
            mode: self.mode.or(base.mode),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            check_bounds: self.check_bounds.or(base.check_bounds),
        }
    }

    /// Fills defaults and validates. `env_seed` is the raw `REGRETLAB_SEED` value.
    pub fn resolve(self, env_seed: Option<String>) -> anyhow::Result<ExperimentConfig> {
        let horizon = self.horizon.unwrap_or(8);
        let d = self.d.unwrap_or((horizon / 2).max(1));
        let seed = match (self.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(raw)) => raw
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}=`{raw}` is not a 64-bit unsigned integer"))?,
            (None, None) => 0,
        };
        let config = ExperimentConfig {
            case: self.case.unwrap_or(CaseKind::Realizable),
            horizon,
            d,
            learners: self
                .learners
                .unwrap_or_else(|| vec![LearnerKind::Wm, LearnerKind::WmHalving]),
            perm: self.perm.unwrap_or(if horizon <= 9 {
                PermSpec::Exhaustive
            } else {
                PermSpec::Sampled(100)
            }),
            seed,
            eta_variant: self.eta_variant.unwrap_or_default(),
            mode: self.mode.unwrap_or(ModeSpec::Analytic),
            format: self.format.unwrap_or(ReportFormat::Csv),
            out: self.out,
            jobs: self.jobs,
            check_bounds: self.check_bounds.unwrap_or(true),
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<ExperimentConfig> for PartialConfig {
    fn from(c: ExperimentConfig) -> Self {
        PartialConfig {
            case: Some(c.case),
            horizon: Some(c.horizon),
            d: Some(c.d),
            learners: Some(c.learners),
            perm: Some(c.perm),
            seed: Some(c.seed),
            eta_variant: Some(c.eta_variant),
            mode: Some(c.mode),
            format: Some(c.format),
            out: c.out,
            jobs: c.jobs,
            check_bounds: Some(c.check_bounds),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.horizon == 0 {
            bail!("T must be at least 1");
        }
        if self.d == 0 {
            bail!("d must be at least 1");
        }
        if self.d > self.horizon {
            bail!("d = {} exceeds T = {}", self.d, self.horizon);
        }
        if self.learners.is_empty() {
            bail!("no learners selected");
        }
        if self.perm == PermSpec::Exhaustive
            && self.horizon > regretlab::sequences::DEFAULT_FACTORIAL_CAP
        {
            bail!(
                "exhaustive permutations need T <= {}; use --perm sampled:N",
                regretlab::sequences::DEFAULT_FACTORIAL_CAP
            );
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        if self.case == CaseKind::Unrealizable {
            if let Some(k) = self.learners.iter().find(|k| k.requires_realizable()) {
                bail!("{} only handles realizable sequences", k.display_name());
            }
        }
        Ok(())
    }

    pub fn permutation_source(&self) -> PermutationSource {
        match self.perm {
            PermSpec::Exhaustive => PermutationSource::Exhaustive,
            PermSpec::Sampled(count) => PermutationSource::Sampled {
                count,
                seed: self.seed,
            },
        }
    }

    pub fn run_mode(&self) -> RunMode {
        match self.mode {
            ModeSpec::Analytic => RunMode::Analytic,
            ModeSpec::Sampled(trials) => RunMode::Sampled {
                seed: self.seed,
                trials,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
