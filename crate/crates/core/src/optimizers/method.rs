//! Name-addressable optimizer configurations.

use serde::{Deserialize, Serialize};

use super::{
    cbo_run, cmaes_run, langevin_run, sbs_hybrid_run, sbs_pf_hybrid_run, sbs_pf_run, sbs_run, woa_run, CboConfig,
    CmaesConfig, FilterConfig, HybridConfig, LangevinConfig, RunResult, SbsConfig, WoaConfig,
};
use crate::objective::Objective;
use crate::{Error, Result};

fn default_woa_agents() -> usize {
    WoaConfig::default().n_agents
}

/// One optimizer and its settings, tagged by its method name in JSON, for
/// example `{"method": "sbs-pf", "filter": {"q_value_percentile": 80}}`.
/// Omitted settings take their defaults.
///
/// WOA and CBO iterate for as long as the run budget allows, so their
/// iteration counts are derived from the budget and not configured here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodConfig {
    Sbs {
        #[serde(default)]
        sbs: SbsConfig,
    },
    SbsPf {
        #[serde(default)]
        sbs: SbsConfig,
        #[serde(default)]
        filter: FilterConfig,
    },
    SbsHybrid {
        #[serde(default = "SbsConfig::hybrid_default")]
        sbs: SbsConfig,
        #[serde(default)]
        hybrid: HybridConfig,
    },
    SbsPfHybrid {
        #[serde(default = "SbsConfig::hybrid_default")]
        sbs: SbsConfig,
        #[serde(default)]
        filter: FilterConfig,
        #[serde(default)]
        hybrid: HybridConfig,
    },
    CmaEs {
        #[serde(default)]
        cmaes: CmaesConfig,
    },
    Woa {
        #[serde(default = "default_woa_agents")]
        n_agents: usize,
    },
    Cbo {
        #[serde(default)]
        cbo: CboConfig,
    },
    Langevin {
        #[serde(default)]
        langevin: LangevinConfig,
    },
}

impl MethodConfig {
    pub const NAMES: [&'static str; 8] = [
        "sbs",
        "sbs-pf",
        "sbs-hybrid",
        "sbs-pf-hybrid",
        "cma-es",
        "woa",
        "cbo",
        "langevin",
    ];

    /// Default configuration for a method name.
    pub fn from_name(name: &str) -> Result<Self> {
        let cfg = match name {
            "sbs" => MethodConfig::Sbs {
                sbs: SbsConfig::default(),
            },
            "sbs-pf" => MethodConfig::SbsPf {
                sbs: SbsConfig::default(),
                filter: FilterConfig::default(),
            },
            "sbs-hybrid" => MethodConfig::SbsHybrid {
                sbs: SbsConfig::hybrid_default(),
                hybrid: HybridConfig::default(),
            },
            "sbs-pf-hybrid" => MethodConfig::SbsPfHybrid {
                sbs: SbsConfig::hybrid_default(),
                filter: FilterConfig::default(),
                hybrid: HybridConfig::default(),
            },
            "cma-es" => MethodConfig::CmaEs {
                cmaes: CmaesConfig::default(),
            },
            "woa" => MethodConfig::Woa {
                n_agents: default_woa_agents(),
            },
            "cbo" => MethodConfig::Cbo {
                cbo: CboConfig::default(),
            },
            "langevin" => MethodConfig::Langevin {
                langevin: LangevinConfig::default(),
            },
            other => return Err(Error::invalid("method", format!("unknown method `{other}`"))),
        };
        Ok(cfg)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Sbs { .. } => "sbs",
            MethodConfig::SbsPf { .. } => "sbs-pf",
            MethodConfig::SbsHybrid { .. } => "sbs-hybrid",
            MethodConfig::SbsPfHybrid { .. } => "sbs-pf-hybrid",
            MethodConfig::CmaEs { .. } => "cma-es",
            MethodConfig::Woa { .. } => "woa",
            MethodConfig::Cbo { .. } => "cbo",
            MethodConfig::Langevin { .. } => "langevin",
        }
    }

    /// Settings of the SBS stage, for the methods that have one.
    pub fn sbs_config_mut(&mut self) -> Option<&mut SbsConfig> {
        match self {
            MethodConfig::Sbs { sbs }
            | MethodConfig::SbsPf { sbs, .. }
            | MethodConfig::SbsHybrid { sbs, .. }
            | MethodConfig::SbsPfHybrid { sbs, .. } => Some(sbs),
            _ => None,
        }
    }

    pub fn run(&self, obj: &Objective, budget: u64, seed: u64) -> Result<RunResult> {
        match self {
            MethodConfig::Sbs { sbs } => sbs_run(obj, sbs, budget, seed, None),
            MethodConfig::SbsPf { sbs, filter } => sbs_pf_run(obj, sbs, filter, budget, seed, None),
            MethodConfig::SbsHybrid { sbs, hybrid } => sbs_hybrid_run(obj, sbs, hybrid, budget, seed),
            MethodConfig::SbsPfHybrid { sbs, filter, hybrid } => {
                sbs_pf_hybrid_run(obj, sbs, filter, hybrid, budget, seed)
            }
            MethodConfig::CmaEs { cmaes } => Ok(cmaes_run(obj, cmaes, budget, seed)?.result),
            MethodConfig::Woa { n_agents } => {
                let required = 2 * *n_agents as u64;
                if budget < required {
                    return Err(Error::BudgetTooSmall { budget, required });
                }
                let cfg = WoaConfig {
                    n_agents: *n_agents,
                    iterations: WoaConfig::iterations_for_budget(*n_agents, budget),
                };
                Ok(woa_run(obj, &cfg, seed)?.result)
            }
            MethodConfig::Cbo { cbo } => {
                let required = 2 * cbo.n_particles as u64;
                if budget < required {
                    return Err(Error::BudgetTooSmall { budget, required });
                }
                let cfg = CboConfig {
                    iterations: WoaConfig::iterations_for_budget(cbo.n_particles, budget),
                    ..*cbo
                };
                cbo_run(obj, &cfg, seed)
            }
            MethodConfig::Langevin { langevin } => langevin_run(obj, langevin, budget, seed),
        }
    }
}
