//! Run and sweep configuration documents.
//!
//! Keys mirror [`RunConfig`]; every section is optional and falls back to
//! its defaults. Command-line flags are applied on top of the file with
//! [`Overrides`], so flags always win.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::frontend::BenchmarkName;
use crate::ir::VirtualHardwareConfig;
use crate::mapper::{MapperConfig, DEFAULT_OCCUPANCY_CAP, DEFAULT_REFRESH_INTERVAL};
use crate::online::{HardwareConfig, PathSearch, RenormConfig};

pub const DEFAULT_RUN_TRIALS: u32 = 5;
pub const DEFAULT_SWEEP_TRIALS: u32 = 20;
pub const DEFAULT_CZ_FANOUT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Virtual hardware and mapper knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VirtualSection {
    pub width: u32,
    pub height: u32,
    pub occupancy_cap: f64,
    /// Layers between memory refreshes; 0 disables refreshing.
    pub refresh_interval_layers: u32,
    pub routing_budget: Option<u32>,
    /// Largest number of CZs per pattern node (default 2). Wider fanout
    /// leaves too few free neighbours for routing on small layers.
    pub cz_fanout: Option<usize>,
}

impl Default for VirtualSection {
    fn default() -> Self {
        Self {
            width: 2,
            height: 2,
            occupancy_cap: DEFAULT_OCCUPANCY_CAP,
            refresh_interval_layers: DEFAULT_REFRESH_INTERVAL,
            routing_budget: None,
            cz_fanout: None,
        }
    }
}

impl VirtualSection {
    pub fn mapper_config(&self, lifetime_cycles: u64) -> MapperConfig {
        let mut vh = VirtualHardwareConfig::new(self.width, self.height);
        vh.photon_lifetime_cycles = lifetime_cycles;
        MapperConfig {
            vh,
            occupancy_cap: self.occupancy_cap,
            refresh_interval_layers: (self.refresh_interval_layers > 0).then_some(self.refresh_interval_layers),
            routing_budget: self.routing_budget,
        }
    }

    pub fn fanout(&self) -> usize {
        self.cz_fanout.unwrap_or(DEFAULT_CZ_FANOUT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub benchmark: Option<BenchmarkSpec>,
    /// Circuit text file, used when no benchmark is given.
    pub circuit: Option<PathBuf>,
    #[serde(rename = "virtual")]
    pub virt: VirtualSection,
    pub hardware: HardwareConfig,
    pub renorm: RenormConfig,
    pub trials: u32,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every core. Results never depend on it.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: None,
            circuit: None,
            virt: VirtualSection::default(),
            hardware: HardwareConfig::default(),
            renorm: RenormConfig::default(),
            trials: DEFAULT_RUN_TRIALS,
            out_dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn benchmark(name: BenchmarkName, n: usize) -> Self {
        Self { benchmark: Some(BenchmarkSpec { name, n, seed: 0 }), ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |e: String| Err(HarnessError::Config(e));
        if self.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        if self.benchmark.is_some() && self.circuit.is_some() {
            return cfg("give either a benchmark or a circuit file, not both".into());
        }
        if self.threads == Some(0) {
            return cfg("threads must be at least 1".into());
        }
        self.virt
            .mapper_config(self.hardware.photon_lifetime_cycles)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.hardware.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.renorm
            .validate(self.hardware.rsl_width, self.hardware.rsl_height)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Command-line values that take precedence over a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub cap: Option<u64>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, run: &mut RunConfig) {
        if let Some(s) = self.seed {
            run.hardware.seed = s;
        }
        if let Some(t) = self.trials {
            run.trials = t;
        }
        if let Some(d) = &self.out_dir {
            run.out_dir = d.clone();
        }
        if let Some(c) = self.cap {
            run.hardware.rsl_cap = c;
        }
        if let Some(t) = self.threads {
            run.threads = Some(t);
        }
    }
}

/// What a sweep measures at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMetric {
    /// Renormalize single layers: success rate and coarse lattice size.
    #[default]
    Renorm,
    /// Full compile-and-execute runs: #RSL and #fusion.
    Run,
    /// Mapper only: logical layer count of the compiled IR.
    Compile,
}

/// Parameters accepted by sweeps.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "p_fusion",
    "p_loss",
    "node_size",
    "mi_ratio",
    "module_count",
    "rsl_size",
    "resource_state_size",
    "retry_batches",
    "bundle_size",
    "refresh_interval_layers",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub metric: SweepMetric,
    #[serde(default)]
    pub base: RunConfig,
}

impl SweepSpec {
    pub fn new(parameter: &str, values: Vec<f64>, metric: SweepMetric, mut base: RunConfig) -> Self {
        if base.trials == DEFAULT_RUN_TRIALS {
            base.trials = DEFAULT_SWEEP_TRIALS;
        }
        Self { parameter: parameter.to_string(), values, metric, base }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        #[derive(Deserialize)]
        struct Doc {
            sweep: SweepHeader,
            #[serde(flatten)]
            base: RunConfig,
        }
        #[derive(Deserialize)]
        struct SweepHeader {
            parameter: String,
            values: Vec<f64>,
            #[serde(default)]
            metric: SweepMetric,
        }
        let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut doc: Doc = table.clone().try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        if !table.contains_key("trials") {
            doc.base.trials = DEFAULT_SWEEP_TRIALS;
        }
        Ok(Self { parameter: doc.sweep.parameter, values: doc.sweep.values, metric: doc.sweep.metric, base: doc.base })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !SWEEP_PARAMETERS.contains(&self.parameter.as_str()) {
            return Err(HarnessError::Config(format!(
                "unknown sweep parameter `{}` (expected one of {})",
                self.parameter,
                SWEEP_PARAMETERS.join(", ")
            )));
        }
        if self.values.is_empty() {
            return Err(HarnessError::Config("sweep needs at least one value".into()));
        }
        for &v in &self.values {
            self.point(v)?.validate()?;
        }
        Ok(())
    }

    /// The base config with the swept parameter set to `v`.
    pub fn point(&self, v: f64) -> Result<RunConfig, HarnessError> {
        let mut r = self.base.clone();
        let int = |v: f64| -> Result<u32, HarnessError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(HarnessError::Config(format!("{} takes whole numbers, got {v}", self.parameter)))
            }
        };
        match self.parameter.as_str() {
            "p_fusion" => r.hardware.p_fusion = v,
            "p_loss" => r.hardware.p_loss = v,
            "node_size" => r.renorm.node_size = int(v)?,
            "mi_ratio" => r.renorm.mi_ratio = v,
            "module_count" => r.renorm.module_count = int(v)?,
            "rsl_size" => {
                r.hardware.rsl_width = int(v)?;
                r.hardware.rsl_height = int(v)?;
            }
            "resource_state_size" => r.hardware.resource_state_size = int(v)?,
            "retry_batches" => r.hardware.retry_batches = int(v)?,
            "bundle_size" => r.hardware.bundle_size = int(v)? as usize,
            "refresh_interval_layers" => r.virt.refresh_interval_layers = int(v)?,
            other => return Err(HarnessError::Config(format!("unknown sweep parameter `{other}`"))),
        }
        Ok(r)
    }
}

/// Greedy path search reports the largest lattice a layer supports; used
/// as the unlimited-time reference for modular renormalization.
pub fn unlimited_time(rc: &RenormConfig) -> RenormConfig {
    RenormConfig { module_count: 1, search: PathSearch::Greedy, ..*rc }
}
