//! Experiment configuration, read from JSON. Every field has a default, so
//! `{}` is a valid configuration.

use std::path::PathBuf;

use dwz_core::channel::{ProfileLabel, PropagationProfile, DEFAULT_NOISE_POWER_DBM};
use dwz_core::numerics::ToleranceConfig;
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Cdf,
    VsBsCount,
    CompareQuantization,
    SumrateVsUsers,
    Region,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cdf => "cdf",
            Experiment::VsBsCount => "vs_bs_count",
            Experiment::CompareQuantization => "compare_quantization",
            Experiment::SumrateVsUsers => "sumrate_vs_users",
            Experiment::Region => "region",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub bs_antennas: usize,
    pub user_antennas: usize,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    /// Cooperative BSs used by `cdf`, `sumrate_vs_users` and `region`,
    /// taken nearest-first from the first-tier ring.
    pub num_coop: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 700.0,
            bs_antennas: 3,
            user_antennas: 2,
            tx_power_dbm: 23.0,
            noise_power_dbm: DEFAULT_NOISE_POWER_DBM,
            num_coop: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Either `"los"` / `"nlos"` or a full profile object.
    #[serde(deserialize_with = "profile_from_name_or_struct")]
    pub profile: PropagationProfile,
    /// Backhaul budgets in bits per channel use.
    pub backhaul_list: Vec<f64>,
    pub num_trials: usize,
    /// Users per trial; `sumrate_vs_users` sweeps `1..=num_users`.
    pub num_users: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub tolerances: ToleranceConfig,
    pub scenario: ScenarioConfig,
    /// Cooperative set sizes swept by `vs_bs_count`.
    pub coop_counts: Vec<usize>,
    /// Quantile levels in percent.
    pub quantiles: Vec<f64>,
    /// Outage probability used by `compare_quantization`.
    pub outage: f64,
    /// Weights swept by `region`.
    pub alphas: Vec<f64>,
    /// Inner starts per multiplier in the multi-BS solver.
    pub solver_starts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut quantiles = vec![1.0];
        quantiles.extend((1..=19).map(|k| 5.0 * k as f64));
        quantiles.push(99.0);
        Self {
            experiment: Experiment::Cdf,
            profile: PropagationProfile::nlos(),
            backhaul_list: vec![0.0, 5.0, 15.0],
            num_trials: 200,
            num_users: 1,
            seed: 0,
            output_path: None,
            tolerances: ToleranceConfig::default(),
            scenario: ScenarioConfig::default(),
            coop_counts: (1..=6).collect(),
            quantiles,
            outage: 0.05,
            alphas: dwz_core::multiuser::default_alphas(),
            solver_starts: 1,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileSpec {
    Named(ProfileLabel),
    Full(PropagationProfile),
}

fn profile_from_name_or_struct<'de, D: Deserializer<'de>>(
    d: D,
) -> Result<PropagationProfile, D::Error> {
    match ProfileSpec::deserialize(d)? {
        ProfileSpec::Named(ProfileLabel::Los) => Ok(PropagationProfile::los()),
        ProfileSpec::Named(ProfileLabel::Nlos) => Ok(PropagationProfile::nlos()),
        ProfileSpec::Named(ProfileLabel::Custom) => Err(serde::de::Error::custom(
            "a custom profile needs pathloss_exponent and shadowing_sigma_db",
        )),
        ProfileSpec::Full(p) => Ok(p),
    }
}

/// Size of the first-tier ring.
pub const MAX_COOP: usize = 6;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config JSON: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.num_trials == 0 {
            return bad("num_trials must be at least 1".into());
        }
        if self.backhaul_list.is_empty() {
            return bad("backhaul_list must not be empty".into());
        }
        if let Some(r) = self
            .backhaul_list
            .iter()
            .find(|r| !(r.is_finite() && **r >= 0.0))
        {
            return bad(format!(
                "backhaul values must be finite and non-negative, got {r}"
            ));
        }
        if self.num_users == 0 {
            return bad("num_users must be at least 1".into());
        }
        if self.experiment == Experiment::Region && self.num_users != 2 {
            return bad(format!(
                "the region experiment needs exactly 2 users, got {}",
                self.num_users
            ));
        }
        if self.scenario.num_coop > MAX_COOP {
            return bad(format!("num_coop must be at most {MAX_COOP}"));
        }
        if self.coop_counts.is_empty() || self.coop_counts.iter().any(|&n| n > MAX_COOP) {
            return bad(format!(
                "coop_counts must be non-empty with entries at most {MAX_COOP}"
            ));
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 100.0)) {
            return bad(
                "quantiles must be non-empty percentages strictly between 0 and 100".into(),
            );
        }
        if !(self.outage > 0.0 && self.outage < 1.0) {
            return bad(format!("outage must lie in (0, 1), got {}", self.outage));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("alphas must be non-empty weights in [0, 1]".into());
        }
        if self.solver_starts == 0 {
            return bad("solver_starts must be at least 1".into());
        }
        let s = &self.scenario;
        if s.bs_antennas == 0 || s.user_antennas == 0 {
            return bad("antenna counts must be positive".into());
        }
        if !(s.cell_radius_m > 0.0) || !s.tx_power_dbm.is_finite() || !s.noise_power_dbm.is_finite()
        {
            return bad("cell radius must be positive and power levels finite".into());
        }
        self.profile
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.tolerances
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}
