//! Experiment configuration: one TOML document describes the system
//! (topology + dependency map), the ensemble size, the seed, and exactly one
//! independent-variable plan (a p grid or a bisection target). Commands read
//! the parts they need and ignore the rest, so a single file can drive a
//! whole figure's worth of invocations.

use mutperc::analysis::{MapSpec, TopologySpec};
use mutperc::entropy::ApEnParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// lattice | er | ws | sf
    pub topology: String,
    /// Lattice side L (N = L^2). Lattice only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    /// Node count for the random topologies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_degree: Option<f64>,
    /// Rewiring probability of the small-world generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Degree exponent of the scale-free generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,

    /// identity | rewired | block | linear | linear-axis
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,

    pub realizations: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,

    /// Exactly one of p_grid / bisection must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisection: Option<BisectionSpec>,

    /// Map-parameter grid for the apen and noi commands; defaults to
    /// q = 0, 0.1, ..., 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_grid: Option<GridSpec>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apen: Option<ApEnConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// start, start+step, ..., up to stop (inclusive within rounding).
    pub fn expand(&self) -> Result<Vec<f64>, String> {
        if !(self.step > 0.0) {
            return Err(format!("grid step must be > 0, got {}", self.step));
        }
        if self.stop < self.start {
            return Err(format!(
                "grid stop {} lies below start {}",
                self.stop, self.start
            ));
        }
        let count = ((self.stop - self.start) / self.step + 1.5).floor() as usize;
        let grid: Vec<f64> = (0..count)
            .map(|k| self.start + k as f64 * self.step)
            .filter(|&v| v <= self.stop + self.step * 1e-9)
            .collect();
        if grid.is_empty() {
            return Err("grid expands to no points".into());
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectionSpec {
    /// "pc" locates the transition in p for the configured map;
    /// "qc" bisects the rewiring probability for the transition order.
    pub target: String,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApEnConfig {
    pub m: usize,
    pub tolerance_factor: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Round-trip counterpart of [`ExperimentConfig::from_toml`]; exercised
    /// by the config tests, not by any subcommand.
    #[allow(dead_code)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<(), String> {
        match (&self.p_grid, &self.bisection) {
            (Some(_), Some(_)) => {
                return Err("config carries both p_grid and bisection; pick one".into())
            }
            (None, None) => {
                return Err("config needs exactly one of p_grid or bisection".into())
            }
            _ => {}
        }
        if self.realizations == 0 {
            return Err("realizations must be >= 1".into());
        }
        Ok(())
    }

    pub fn topology_spec(&self) -> Result<TopologySpec, String> {
        match self.topology.as_str() {
            "lattice" => {
                let side = self.side.ok_or("lattice topology needs side")?;
                Ok(TopologySpec::Lattice { side })
            }
            "er" => Ok(TopologySpec::ErdosRenyi {
                n: self.n.ok_or("er topology needs n")?,
                mean_degree: self.mean_degree.unwrap_or(4.0),
            }),
            "ws" => {
                let k = self.mean_degree.unwrap_or(4.0);
                if k.fract() != 0.0 || k <= 0.0 {
                    return Err(format!(
                        "ws mean_degree must be a positive integer, got {k}"
                    ));
                }
                Ok(TopologySpec::WattsStrogatz {
                    n: self.n.ok_or("ws topology needs n")?,
                    mean_degree: k as usize,
                    beta: self.beta.unwrap_or(0.1),
                })
            }
            "sf" => Ok(TopologySpec::ScaleFree {
                n: self.n.ok_or("sf topology needs n")?,
                exponent: self.exponent.unwrap_or(3.0),
                mean_degree: self.mean_degree.unwrap_or(4.0),
            }),
            other => Err(format!("unknown topology '{other}'")),
        }
    }

    pub fn map_spec(&self) -> Result<MapSpec, String> {
        match self.map.as_str() {
            "identity" => Ok(MapSpec::Identity),
            "rewired" => Ok(MapSpec::Rewired {
                q: self.q.ok_or("rewired map needs q")?,
            }),
            "block" => Ok(MapSpec::BlockLocal {
                r: self.r.ok_or("block map needs r")?,
            }),
            "linear" => Ok(MapSpec::Linear {
                r: self.r.ok_or("linear map needs r")?,
            }),
            "linear-axis" => Ok(MapSpec::LinearAxis {
                r: self.r.ok_or("linear-axis map needs r")?,
            }),
            other => Err(format!("unknown map kind '{other}'")),
        }
    }

    pub fn apen_params(&self) -> ApEnParams {
        match &self.apen {
            Some(a) => ApEnParams {
                m: a.m,
                tolerance_factor: a.tolerance_factor,
            },
            None => ApEnParams::default(),
        }
    }
}
