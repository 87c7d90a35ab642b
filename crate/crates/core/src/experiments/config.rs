use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::SearchBudget;
use crate::sphere::{PartitionSpec, SphereGrid};

/// Built-in scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    CommutativeBands,
    DisplaceableCaps,
    #[serde(rename = "scaling-in-N")]
    ScalingInN,
    JanssensFuzz,
    RegistrationClassical,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::CommutativeBands,
        ScenarioKind::DisplaceableCaps,
        ScenarioKind::ScalingInN,
        ScenarioKind::JanssensFuzz,
        ScenarioKind::RegistrationClassical,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::CommutativeBands => "commutative-bands",
            ScenarioKind::DisplaceableCaps => "displaceable-caps",
            ScenarioKind::ScalingInN => "scaling-in-N",
            ScenarioKind::JanssensFuzz => "janssens-fuzz",
            ScenarioKind::RegistrationClassical => "registration-classical",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerances used by the verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest `ν_q` accepted as commutative.
    pub commutator: f64,
    /// Slack on `residual ≥ 0` and the row inequalities.
    pub inequality: f64,
    /// `ν_q` must exceed this for displaceable caps.
    pub nu_q_floor: f64,
    /// Largest allowed `max / min` of `m·ν_q`.
    pub scaling_window: f64,
    /// Default `α` as a fraction of `max (f₁ − f₁²)`.
    pub noise_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            commutator: 1e-9,
            inequality: 1e-9,
            nu_q_floor: 1e-4,
            scaling_window: 2.0,
            noise_fraction: 0.9,
        }
    }
}

pub const DEFAULT_M_LIST: [usize; 5] = [8, 16, 32, 64, 128];
pub const DEFAULT_N_LIST: [usize; 4] = [4, 6, 8, 12];

/// One scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<usize>,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
    #[serde(default)]
    pub budget: SearchBudget,
    /// Output path prefix; `.csv` and `.json` are appended.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// `[n_t, n_phi]` of the grid used for `ν_c` and sup norms.
    #[serde(default)]
    pub grid: Option<[usize; 2]>,
    /// commutative-bands: required noise level at the largest `m`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// displaceable-caps: smallest `m` entering the verdicts.
    #[serde(default)]
    pub m_min: Option<usize>,
    /// scaling-in-N: cap counts.
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    /// janssens-fuzz: number of random POVMs.
    #[serde(default)]
    pub cases: Option<usize>,
    /// janssens-fuzz: inclusive dimension range.
    #[serde(default)]
    pub dim_range: Option<[usize; 2]>,
    /// janssens-fuzz: inclusive outcome-count range.
    #[serde(default)]
    pub outcome_range: Option<[usize; 2]>,
    /// registration-classical: `[n_t, n_phi]` of the discretizing grid.
    #[serde(default)]
    pub registration_grid: Option<[usize; 2]>,
    /// Fill the `wall_time_ms` column; off by default so outputs are reproducible.
    #[serde(default)]
    pub timing: bool,
}

fn default_m_list() -> Vec<usize> {
    DEFAULT_M_LIST.to_vec()
}

impl ScenarioConfig {
    /// Defaults for `kind` with the given seed.
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            scenario: kind,
            seed,
            m_list: default_m_list(),
            partition: None,
            budget: SearchBudget {
                seed,
                ..SearchBudget::default()
            },
            output: None,
            tolerances: Tolerances::default(),
            grid: None,
            alpha: None,
            m_min: None,
            n_list: None,
            cases: None,
            dim_range: None,
            outcome_range: None,
            registration_grid: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_list.is_empty() {
            return Err(Error::Config("m_list must be nonempty".into()));
        }
        if self.m_list[0] == 0 || self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "m_list must be positive and strictly ascending, got {:?}",
                self.m_list
            )));
        }
        if let Some(g) = self.grid {
            if g[0] == 0 || g[1] == 0 {
                return Err(Error::Config("grid sizes must be positive".into()));
            }
        }
        if let Some([lo, hi]) = self.dim_range {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("bad dim_range [{lo}, {hi}]")));
            }
        }
        if let Some([lo, hi]) = self.outcome_range {
            if lo < 2 || lo > hi {
                return Err(Error::Config(format!("bad outcome_range [{lo}, {hi}]")));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() {
                return Err(Error::Config("n_list must be nonempty".into()));
            }
        }
        if let Some(g) = self.registration_grid {
            if g[0] == 0 || g[1] == 0 {
                return Err(Error::Config(
                    "registration_grid sizes must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn sphere_grid(&self) -> SphereGrid {
        match self.grid {
            Some([nt, np]) => SphereGrid::new(nt, np),
            None => SphereGrid::standard(),
        }
    }

    /// File prefix for outputs.
    pub fn output_prefix(&self) -> String {
        self.output
            .clone()
            .unwrap_or_else(|| self.scenario.as_str().to_string())
    }

    /// Search budget for row `index`, with a seed derived from the config seed.
    pub fn row_budget(&self, index: usize) -> SearchBudget {
        SearchBudget {
            seed: self
                .seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(index as u64),
            ..self.budget.clone()
        }
    }
}

/// Parses one config object or an array of them.
pub fn parse_configs(json: &str) -> Result<Vec<ScenarioConfig>> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    let configs: Vec<ScenarioConfig> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    if configs.is_empty() {
        return Err(Error::Config("no scenarios given".into()));
    }
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

pub fn load_configs(path: &Path) -> Result<Vec<ScenarioConfig>> {
    parse_configs(&std::fs::read_to_string(path)?)
}

/// All five scenarios with default parameters.
pub fn default_suite(seed: u64) -> Vec<ScenarioConfig> {
    ScenarioKind::ALL
        .iter()
        .map(|&k| ScenarioConfig::new(k, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_configs(r#"{"scenario": "commutative-bands", "seed": 3}"#).unwrap();
        assert_eq!(c[0].m_list, vec![8, 16, 32, 64, 128]);
        assert_eq!(c[0].tolerances, Tolerances::default());
        assert_eq!(c[0].output_prefix(), "commutative-bands");
    }

    #[test]
    fn seed_is_required() {
        assert!(parse_configs(r#"{"scenario": "janssens-fuzz"}"#).is_err());
    }

    #[test]
    fn rejects_unsorted_and_empty_m_list() {
        let bad = [
            r#"{"scenario": "displaceable-caps", "seed": 1, "m_list": []}"#,
            r#"{"scenario": "displaceable-caps", "seed": 1, "m_list": [16, 8]}"#,
            r#"{"scenario": "displaceable-caps", "seed": 1, "m_list": [0, 8]}"#,
            r#"{"scenario": "nope", "seed": 1}"#,
            r#"{"scenario": "janssens-fuzz", "seed": 1, "typo": 2}"#,
        ];
        for b in bad {
            assert!(parse_configs(b).is_err(), "{b}");
        }
    }

    #[test]
    fn arrays_and_partitions() {
        let c = parse_configs(
            r#"[{"scenario": "scaling-in-N", "seed": 1, "n_list": [4, 6]},
                {"scenario": "commutative-bands", "seed": 2,
                 "partition": {"type": "bands", "N": 4, "overlap": 0.3}}]"#,
        )
        .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].partition, Some(PartitionSpec::bands(4, 0.3)));
    }

    #[test]
    fn scenario_names_roundtrip() {
        for k in ScenarioKind::ALL {
            let s = serde_json::to_string(&k).unwrap();
            assert_eq!(s, format!("\"{}\"", k.as_str()));
        }
    }

    #[test]
    fn row_budgets_differ_by_row() {
        let c = ScenarioConfig::new(ScenarioKind::DisplaceableCaps, 5);
        assert_ne!(c.row_budget(0).seed, c.row_budget(1).seed);
        assert_eq!(c.row_budget(2), c.row_budget(2));
    }
}
