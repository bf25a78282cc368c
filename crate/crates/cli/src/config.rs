//! Experiment configuration: TOML files with one table per experiment.
//!
//! A file may hold tables for several experiments; the subcommand picks the
//! one it runs and command-line flags then override individual fields.
//!
//! ```toml
//! out = "results"
//! workers = 1
//!
//! [domino_fig2]
//! n = 200
//! p_list = [0.003, 0.01, 0.03, 0.1]
//! l_list = [8, 10, 20, 40]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use metrofi::channels::NoiseModel;
use metrofi::domino::{Figure2Config, SingleSettings};
use metrofi::oracle::OracleConfig;
use metrofi::protocols::Theorem1Thresholds;
use metrofi::squeezing::SqueezeThresholds;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUT_DIR: &str = "results";

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub bound: BoundConfig,
    pub parity: ParityConfig,
    pub theorem1: Theorem1Config,
    pub timerev: TimerevConfig,
    pub domino_single: DominoSingleConfig,
    pub domino_fig2: Figure2Config,
    pub squeeze: SqueezeConfig,
    pub oracle_suite: OracleConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub n: usize,
    pub p_list: Vec<f64>,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            n: 1,
            p_list: vec![0.01, 0.1],
        }
    }
}

/// GHZ block length: a fixed value or the best divisor of `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BlockSize {
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for BlockSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BlockSize::Auto);
        }
        s.parse()
            .map(BlockSize::Fixed)
            .map_err(|_| format!("block size must be `auto` or a positive integer, got `{s}`"))
    }
}

impl fmt::Display for BlockSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockSize::Auto => f.write_str("auto"),
            BlockSize::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl Serialize for BlockSize {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BlockSize::Auto => s.serialize_str("auto"),
            BlockSize::Fixed(m) => s.serialize_u64(*m as u64),
        }
    }
}

impl<'de> Deserialize<'de> for BlockSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(m) => Ok(BlockSize::Fixed(m)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParityConfig {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub m: BlockSize,
}

impl Default for ParityConfig {
    fn default() -> Self {
        Self {
            n: 200,
            p_list: vec![0.001, 0.003, 0.01, 0.03, 0.1],
            m: BlockSize::Auto,
        }
    }
}

/// Probe state of the grouped-SLD check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProbeState {
    /// GHZ blocks aligned with the groups.
    #[default]
    Parity,
    /// The product state `|+>^n`.
    Plus,
    /// The output of the confined domino circuit.
    Domino,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Config {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub state: ProbeState,
    /// Depth of the domino circuit when `state = "domino"`.
    pub depth: usize,
    pub thresholds: Theorem1Thresholds,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            n: 8,
            m: 4,
            p: 0.01,
            state: ProbeState::Parity,
            depth: 1,
            thresholds: Theorem1Thresholds::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    #[default]
    Domino,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimerevConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub noise: NoiseModel,
    pub circuit: CircuitKind,
    pub seed: u64,
    pub hop_angle: f64,
    pub theta_pr: f64,
    /// Offset `theta - theta_pr`; `1 / (2 L)` when absent.
    pub theta_tilde: Option<f64>,
}

impl Default for TimerevConfig {
    fn default() -> Self {
        Self {
            n: 10,
            l: 5,
            t: 1,
            noise: NoiseModel::Dephasing { p: 0.02 },
            circuit: CircuitKind::Domino,
            seed: 0,
            hop_angle: std::f64::consts::FRAC_PI_2,
            theta_pr: 0.0,
            theta_tilde: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominoSingleConfig {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub noise: NoiseModel,
    pub theta_pr: f64,
    pub theta_tilde: f64,
    pub settings: SingleSettings,
}

impl Default for DominoSingleConfig {
    fn default() -> Self {
        Self {
            n: 400,
            t: 10.0,
            noise: NoiseModel::Noiseless,
            theta_pr: 0.0,
            theta_tilde: 0.0,
            settings: SingleSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeConfig {
    pub n: usize,
    pub noise: NoiseModel,
    /// Also tabulate the twisting-time scan.
    pub scan_t: bool,
    /// Scan times; when empty, `t_points` evenly spaced times up to `t_max_factor` times the optimal time.
    pub t_list: Vec<f64>,
    pub t_points: usize,
    pub t_max_factor: f64,
    pub thresholds: SqueezeThresholds,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self {
            n: 128,
            noise: NoiseModel::Dephasing { p: 0.01 },
            scan_t: false,
            t_list: Vec::new(),
            t_points: 40,
            t_max_factor: 2.0,
            thresholds: SqueezeThresholds::default(),
        }
    }
}

/// Resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    Bound(BoundConfig),
    Parity(ParityConfig),
    Theorem1(Theorem1Config),
    Timerev(TimerevConfig),
    DominoSingle(DominoSingleConfig),
    DominoFig2(Figure2Config),
    Squeeze(SqueezeConfig),
    OracleSuite(OracleConfig),
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Bound(_) => "bound",
            Experiment::Parity(_) => "parity",
            Experiment::Theorem1(_) => "theorem1",
            Experiment::Timerev(_) => "timerev",
            Experiment::DominoSingle(_) => "domino-single",
            Experiment::DominoFig2(_) => "domino-fig2",
            Experiment::Squeeze(_) => "squeeze",
            Experiment::OracleSuite(_) => "oracle-suite",
        }
    }

    /// Rejects configurations that cannot be run.
    pub fn validate(&self) -> CliResult<()> {
        match self {
            Experiment::Bound(c) => {
                positive("n", c.n)?;
                non_empty("p_list", &c.p_list)?;
                c.p_list.iter().try_for_each(|&p| open_probability("p", p))
            }
            Experiment::Parity(c) => {
                positive("n", c.n)?;
                non_empty("p_list", &c.p_list)?;
                c.p_list
                    .iter()
                    .try_for_each(|&p| open_probability("p", p))?;
                match c.m {
                    BlockSize::Fixed(m) if m == 0 || m > c.n => Err(CliError::config(format!(
                        "block size {m} outside 1..={}",
                        c.n
                    ))),
                    _ => Ok(()),
                }
            }
            Experiment::Theorem1(c) => {
                positive("n", c.n)?;
                positive("m", c.m)?;
                half_open_probability("p", c.p)?;
                if c.n % c.m != 0 {
                    return Err(CliError::config(format!(
                        "group size {} must divide n = {}",
                        c.m, c.n
                    )));
                }
                Ok(())
            }
            Experiment::Timerev(c) => {
                positive("n", c.n)?;
                positive("L", c.l)?;
                noise("noise", &c.noise)?;
                finite("hop_angle", c.hop_angle)?;
                finite("theta_pr", c.theta_pr)?;
                c.theta_tilde.map_or(Ok(()), |t| finite("theta_tilde", t))
            }
            Experiment::DominoSingle(c) => {
                positive("n", c.n)?;
                if !(c.t > 0.0 && c.t.is_finite()) {
                    return Err(CliError::config(format!("T must be positive, got {}", c.t)));
                }
                noise("noise", &c.noise)?;
                finite("theta_pr", c.theta_pr)?;
                finite("theta_tilde", c.theta_tilde)
            }
            Experiment::DominoFig2(c) => c.validate().map_err(|e| CliError::config(e.to_string())),
            Experiment::Squeeze(c) => {
                positive("n", c.n)?;
                noise("noise", &c.noise)?;
                if c.scan_t && c.t_list.is_empty() {
                    positive("t_points", c.t_points)?;
                    if !(c.t_max_factor > 0.0 && c.t_max_factor.is_finite()) {
                        return Err(CliError::config(format!(
                            "t_max_factor must be positive, got {}",
                            c.t_max_factor
                        )));
                    }
                }
                c.t_list.iter().try_for_each(|&t| finite("t_list", t))
            }
            Experiment::OracleSuite(c) => positive("per_kind", c.per_kind),
        }
    }
}

fn positive(name: &str, v: usize) -> CliResult<()> {
    if v == 0 {
        return Err(CliError::config(format!("{name} must be positive")));
    }
    Ok(())
}

fn non_empty<T>(name: &str, v: &[T]) -> CliResult<()> {
    if v.is_empty() {
        return Err(CliError::config(format!("{name} must be non-empty")));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if !v.is_finite() {
        return Err(CliError::config(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

fn open_probability(name: &str, p: f64) -> CliResult<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(CliError::config(format!(
            "{name} must lie in (0, 0.5), got {p}"
        )));
    }
    Ok(())
}

fn half_open_probability(name: &str, p: f64) -> CliResult<()> {
    if !(0.0..0.5).contains(&p) {
        return Err(CliError::config(format!(
            "{name} must lie in [0, 0.5), got {p}"
        )));
    }
    Ok(())
}

fn noise(name: &str, model: &NoiseModel) -> CliResult<()> {
    match *model {
        NoiseModel::Noiseless => Ok(()),
        NoiseModel::Dephasing { p } | NoiseModel::Depolarizing { p } => {
            half_open_probability(name, p)
        }
        NoiseModel::Pauli { .. } => model
            .channel(0.0)
            .map(|_| ())
            .map_err(|e| CliError::config(format!("{name}: {e}"))),
    }
}
