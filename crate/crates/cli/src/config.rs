//! Sweep configuration: a JSON document whose fields can be overridden from
//! the command line.

use crate::error::CliError;
use halfint::qexp::EtaQuotientSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterPolicy {
    /// Every primitive character modulo `Q`.
    All,
    /// `sample_size` primitive characters per modulus, drawn with `seed`.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `truncation_error / |L(1/2)|` for one point.
    pub lvalue_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { lvalue_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub form: String,
    pub q_min: u64,
    pub q_max: u64,
    pub primes_only: bool,
    pub characters: CharacterPolicy,
    pub sample_size: usize,
    pub seed: u64,
    /// Number of coefficients; `None` picks a budget from `Q_max`.
    pub budget: Option<u64>,
    pub tolerances: Tolerances,
    pub theta: f64,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            form: "eta(8z)^3".into(),
            q_min: 101,
            q_max: 499,
            primes_only: true,
            characters: CharacterPolicy::All,
            sample_size: 16,
            seed: 0,
            budget: None,
            tolerances: Tolerances::default(),
            theta: 7.0 / 64.0,
            threads: 0,
        }
    }
}

/// Command-line values that replace fields of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub form: Option<String>,
    pub q_min: Option<u64>,
    pub q_max: Option<u64>,
    pub primes_only: Option<bool>,
    pub characters: Option<CharacterPolicy>,
    pub sample_size: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub lvalue_rel: Option<f64>,
    pub theta: Option<f64>,
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            form,
            q_min,
            q_max,
            primes_only,
            characters,
            sample_size,
            seed,
            theta,
            threads
        );
        if o.budget.is_some() {
            self.budget = o.budget;
        }
        if let Some(t) = o.lvalue_rel {
            self.tolerances.lvalue_rel = t;
        }
    }

    pub fn spec(&self) -> Result<EtaQuotientSpec, CliError> {
        crate::util::parse_spec(&self.form)
    }

    /// `3/8 + θ/4`.
    pub fn subconvex_exponent(&self) -> f64 {
        0.375 + self.theta / 4.0
    }

    /// Smallest budget accepted: `2√N Q_max`, rounded up.
    pub fn minimum_budget(&self, level: u64) -> u64 {
        (2.0 * (level as f64).sqrt() * self.q_max as f64).ceil() as u64
    }

    /// The configured budget, or `10√N Q_max`, enough for the reflected sums
    /// at `s = 1/2` to reach double precision.
    pub fn effective_budget(&self, level: u64) -> u64 {
        self.budget.unwrap_or_else(|| {
            (10.0 * (level as f64).sqrt() * self.q_max.max(1) as f64).ceil() as u64
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let spec = self.spec()?;
        if !(0.0..=0.5).contains(&self.theta) {
            return Err(CliError::Usage(format!(
                "theta {} outside [0, 1/2]",
                self.theta
            )));
        }
        if self.characters == CharacterPolicy::Sample && self.sample_size == 0 {
            return Err(CliError::Usage("sample_size must be positive".into()));
        }
        if !(self.tolerances.lvalue_rel > 0.0) {
            return Err(CliError::Usage("lvalue_rel must be positive".into()));
        }
        if self.q_min <= self.q_max {
            let need = self.minimum_budget(spec.level());
            if let Some(b) = self.budget {
                if b < need {
                    return Err(CliError::Usage(format!(
                        "budget {b} is below 2·√N·Q_max = {need}"
                    )));
                }
            }
        }
        Ok(())
    }
}
