//! JSON run configuration: one flat object per command.
//!
//! `command`, `seed` and `out` are accepted in every config; all other keys
//! belong to the command's parameter block and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CliError;
use crate::costmodel::{NttStrategy, OperandWidth, WorkloadDescriptor};
use crate::modarith::Modulus;
use crate::ntt::NttMode;
use crate::systolic::{Dataflow, SystolicConfig};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Ntt,
    Baseconv,
    Simulate,
    Cost,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ntt => "ntt",
            Self::Baseconv => "baseconv",
            Self::Simulate => "simulate",
            Self::Cost => "cost",
            Self::Selftest => "selftest",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Self::Ntt,
            Self::Baseconv,
            Self::Simulate,
            Self::Cost,
            Self::Selftest,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NttParams {
    #[serde(rename = "logN")]
    pub log_n: u32,
    /// First 4-step dimension; balanced split when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    pub mode: NttMode,
    /// Explicit prime; otherwise the smallest `modulus_bits`-bit NTT prime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    pub modulus_bits: u32,
    pub strategy: NttStrategy,
    pub width: OperandWidth,
    pub trials: usize,
}

impl Default for NttParams {
    fn default() -> Self {
        Self {
            log_n: 12,
            n1: None,
            mode: NttMode::Negacyclic,
            modulus: None,
            modulus_bits: 30,
            strategy: NttStrategy::TensorfheTile,
            width: OperandWidth::Int32,
            trials: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutorKind {
    Plain,
    Systolic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseconvParams {
    pub n: usize,
    pub alpha: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub modulus_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<u64>>,
    pub executor: ExecutorKind,
}

impl Default for BaseconvParams {
    fn default() -> Self {
        Self {
            n: 256,
            alpha: 8,
            l: 16,
            modulus_bits: 30,
            source: None,
            target: None,
            executor: ExecutorKind::Systolic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub rows: usize,
    pub cols: usize,
    pub pipeline_depth: usize,
    pub k_dim: usize,
    pub dataflow: Dataflow,
    pub modulus: u64,
    pub trials: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        let cfg = SystolicConfig::default();
        Self {
            rows: cfg.rows,
            cols: cfg.cols,
            pipeline_depth: cfg.pipeline_depth,
            k_dim: cfg.k_dim,
            dataflow: cfg.dataflow,
            // 15 * 2^27 + 1
            modulus: 2_013_265_921,
            trials: 8,
        }
    }
}

impl SimulateParams {
    pub fn systolic_config(&self) -> SystolicConfig {
        SystolicConfig {
            rows: self.rows,
            cols: self.cols,
            pipeline_depth: self.pipeline_depth,
            k_dim: self.k_dim,
            dataflow: self.dataflow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostParams {
    /// Workload descriptor file; a single 2^16-point NTT when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workload: Option<String>,
    pub fhec_latency: u64,
    pub gemm_latency: u64,
    pub scalar_throughput: u64,
    pub ldst_throughput: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        let lat = crate::costmodel::LatencyModel::default();
        Self {
            workload: None,
            fhec_latency: lat.fhec_latency,
            gemm_latency: lat.gemm_latency,
            scalar_throughput: lat.scalar_throughput,
            ldst_throughput: lat.ldst_throughput,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestParams {
    pub trials: usize,
}

impl Default for SelftestParams {
    fn default() -> Self {
        Self { trials: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandConfig {
    Ntt(NttParams),
    Baseconv(BaseconvParams),
    Simulate(SimulateParams),
    Cost {
        params: CostParams,
        workload: Option<WorkloadDescriptor>,
    },
    Selftest(SelftestParams),
}

impl CommandConfig {
    pub fn command(&self) -> Command {
        match self {
            Self::Ntt(_) => Command::Ntt,
            Self::Baseconv(_) => Command::Baseconv,
            Self::Simulate(_) => Command::Simulate,
            Self::Cost { .. } => Command::Cost,
            Self::Selftest(_) => Command::Selftest,
        }
    }

    /// Parameter block with defaults applied, as echoed in reports.
    pub fn echo(&self) -> Value {
        let v = match self {
            Self::Ntt(p) => serde_json::to_value(p),
            Self::Baseconv(p) => serde_json::to_value(p),
            Self::Simulate(p) => serde_json::to_value(p),
            Self::Cost { params, .. } => serde_json::to_value(params),
            Self::Selftest(p) => serde_json::to_value(p),
        };
        v.expect("parameter blocks serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn take_params<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    let value = Value::Object(map);
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            validation(e.into_inner().to_string())
        } else {
            validation(format!("key '{path}': {}", e.into_inner()))
        }
    })
}

/// Parses a value given on the command line: JSON when it parses, otherwise
/// a bare string.
pub fn parse_override(arg: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| validation(format!("override '{arg}' is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

impl RunConfig {
    /// Builds a config from an optional JSON document plus command-line
    /// pieces. `base_dir` resolves relative file references in the config.
    pub fn build(
        command: Option<Command>,
        json: Option<&str>,
        base_dir: &Path,
        overrides: &[(String, Value)],
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let mut map = match json {
            Some(text) => match serde_json::from_str::<Value>(text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(validation("config must be a JSON object")),
                Err(e) => {
                    return Err(validation(format!(
                        "config parse error at line {} column {}: {e}",
                        e.line(),
                        e.column()
                    )))
                }
            },
            None => Map::new(),
        };
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }

        let file_command = match map.remove("command") {
            None => None,
            Some(Value::String(s)) => Some(
                Command::parse(&s)
                    .ok_or_else(|| validation(format!("key 'command': unknown command '{s}'")))?,
            ),
            Some(other) => {
                return Err(validation(format!(
                    "key 'command': expected a string, got {other}"
                )))
            }
        };
        let command = match (command, file_command) {
            (Some(a), Some(b)) if a != b => {
                return Err(validation(format!(
                    "key 'command': config says '{}' but '{}' was requested",
                    b.name(),
                    a.name()
                )))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(validation("no command given")),
        };

        let file_seed = match map.remove("seed") {
            None => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| validation("key 'seed': expected an unsigned integer"))?,
            ),
        };
        let file_out = match map.remove("out") {
            None => None,
            Some(Value::String(s)) => Some(base_dir.join(s)),
            Some(_) => return Err(validation("key 'out': expected a path string")),
        };

        let command = match command {
            Command::Ntt => CommandConfig::Ntt(validate_ntt(take_params(map)?)?),
            Command::Baseconv => CommandConfig::Baseconv(validate_baseconv(take_params(map)?)?),
            Command::Simulate => CommandConfig::Simulate(validate_simulate(take_params(map)?)?),
            Command::Cost => {
                let params: CostParams = take_params(map)?;
                let workload = match &params.workload {
                    Some(p) => Some(load_workload(&base_dir.join(p))?),
                    None => None,
                };
                CommandConfig::Cost { params, workload }
            }
            Command::Selftest => CommandConfig::Selftest(take_params(map)?),
        };
        Ok(Self {
            command,
            seed: seed.or(file_seed).unwrap_or(DEFAULT_SEED),
            out: out.or(file_out),
        })
    }

    /// Reads and parses a config file; relative paths inside it resolve
    /// against the file's directory.
    pub fn from_file(path: &Path, command: Option<Command>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::build(command, Some(&text), base, &[], None, None)
    }

    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        Self::build(None, Some(text), base_dir, &[], None, None)
    }
}

pub fn load_workload(path: &Path) -> Result<WorkloadDescriptor, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read workload {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let w: WorkloadDescriptor = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        validation(format!(
            "workload {}: key '{}': {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })?;
    w.validate()
        .map_err(|e| validation(format!("workload {}: {e}", path.display())))?;
    Ok(w)
}

fn validate_ntt(p: NttParams) -> Result<NttParams, CliError> {
    if !(1..=16).contains(&p.log_n) {
        return Err(validation(format!(
            "key 'logN': {} outside 1..=16",
            p.log_n
        )));
    }
    if let Some(q) = p.modulus {
        Modulus::new(q).map_err(|e| validation(format!("key 'modulus': {e}")))?;
    }
    if let Some(n1) = p.n1 {
        let n = 1usize << p.log_n;
        if n1 == 0 || !n1.is_power_of_two() || n1 > n {
            return Err(validation(format!(
                "key 'n1': {n1} does not divide N = {n}"
            )));
        }
    }
    Ok(p)
}

fn validate_baseconv(p: BaseconvParams) -> Result<BaseconvParams, CliError> {
    for (key, list) in [("source", &p.source), ("target", &p.target)] {
        if let Some(list) = list {
            for &q in list {
                Modulus::new(q).map_err(|e| validation(format!("key '{key}': {e}")))?;
            }
        }
    }
    if p.n == 0 {
        return Err(validation("key 'n': must be positive"));
    }
    if p.source.is_none() && p.alpha == 0 {
        return Err(validation("key 'alpha': must be positive"));
    }
    if p.target.is_none() && p.l == 0 {
        return Err(validation("key 'L': must be positive"));
    }
    Ok(p)
}

fn validate_simulate(p: SimulateParams) -> Result<SimulateParams, CliError> {
    p.systolic_config()
        .validate()
        .map_err(|e| validation(e.to_string()))?;
    Modulus::new(p.modulus).map_err(|e| validation(format!("key 'modulus': {e}")))?;
    Ok(p)
}
