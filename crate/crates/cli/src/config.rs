//! TOML run configuration. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jumpqle::montecarlo::StudyKind;
use jumpqle::{
    HRule, LevyOuParams, OptimizerSettings, ParamBounds, ThresholdConfig, ThresholdGrid,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Explicit step size; takes precedence over `h_exponent`.
    pub h: Option<f64>,
    /// h = n^(-h_exponent); defaults to 2/3.
    #[serde(default = "default_h_exponent")]
    pub h_exponent: Option<f64>,
    pub burn_in_time: Option<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub params: ParamsSection,
    pub bounds: Option<BoundsSection>,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    pub optimizer: Option<OptimizerSettings>,
    #[serde(default)]
    pub test: TestSection,
    pub study: Option<StudySection>,
}

fn default_model() -> String {
    "levy_ou".into()
}

fn default_n() -> usize {
    1_000_000
}

fn default_h_exponent() -> Option<f64> {
    Some(2.0 / 3.0)
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 2.5,
            lambda: 6.0,
            mu: 0.0,
            sigma2: 20.25,
        }
    }
}

impl ParamsSection {
    pub fn levy_ou(&self) -> LevyOuParams {
        LevyOuParams::new(self.alpha, self.beta, self.lambda, self.mu, self.sigma2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    #[serde(default = "unit")]
    pub d: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho1_bar: f64,
    pub rho2_bar: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            d: 1.0,
            rho1: 0.26,
            rho2: 0.26,
            rho3: 0.26,
            rho1_bar: 0.26,
            rho2_bar: 0.26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSection {
    pub eps: Option<f64>,
    /// Components fixed under the null, by name.
    #[serde(default)]
    pub fix: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub kind: StudyKind,
    pub replications: usize,
    #[serde(default)]
    pub parallel: usize,
    pub grid: ThresholdGrid,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn step(&self) -> Result<f64> {
        let h = match (self.h, self.h_exponent) {
            (Some(h), _) => h,
            (None, Some(c)) => HRule::Power(c).step(self.n),
            (None, None) => bail!("config must set either h or h_exponent"),
        };
        if !h.is_finite() {
            bail!("step size h must be finite");
        }
        if !(h > 0.0 && h < 1.0) {
            bail!("step size h must lie in (0, 1), got {h}");
        }
        Ok(h)
    }

    pub fn h_rule(&self) -> Result<HRule> {
        match (self.h, self.h_exponent) {
            (Some(h), _) => Ok(HRule::Explicit(h)),
            (None, Some(c)) => Ok(HRule::Power(c)),
            (None, None) => bail!("config must set either h or h_exponent"),
        }
    }

    pub fn bounds(&self) -> Result<ParamBounds> {
        match &self.bounds {
            None => Ok(LevyOuParams::default_bounds()),
            Some(b) => Ok(ParamBounds::new(LevyOuParams::layout(), b.lower.clone(), b.upper.clone())?),
        }
    }

    pub fn thresholds(&self) -> Result<ThresholdConfig> {
        let t = &self.thresholds;
        Ok(ThresholdConfig::from_rhos(t.d, t.rho1, t.rho2, t.rho3, t.rho1_bar, t.rho2_bar)?)
    }

    /// (component index, value) pairs of the null hypothesis.
    pub fn constraints(&self) -> Result<Vec<(usize, f64)>> {
        self.test
            .fix
            .iter()
            .map(|(name, &value)| match LevyOuParams::NAMES.iter().position(|n| n == name) {
                Some(i) => Ok((i, value)),
                None => bail!("unknown parameter '{name}' in [test].fix (expected one of {:?})", LevyOuParams::NAMES),
            })
            .collect()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            seed: 0,
            n: default_n(),
            h: None,
            h_exponent: default_h_exponent(),
            burn_in_time: None,
            out_dir: default_out_dir(),
            params: ParamsSection::default(),
            bounds: None,
            thresholds: ThresholdSection::default(),
            optimizer: None,
            test: TestSection::default(),
            study: None,
        }
    }
}
