//! Command-line surface and the merge of flags over configuration files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use metrofi::channels::NoiseModel;
use metrofi::domino::CoefficientRule;
use metrofi::exec::ExecMode;

use crate::config::{BlockSize, CircuitKind, ConfigFile, Experiment, ProbeState, DEFAULT_OUT_DIR};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "metrofi",
    version,
    about = "Noise-robust quantum metrology experiments"
)]
pub struct Cli {
    /// TOML file with per-experiment tables; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory receiving CSV, JSON and gnuplot files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true, env = "METROFI_WORKERS", value_name = "N")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dephasing QFI bound per qubit.
    Bound(BoundArgs),
    /// GHZ-block parity strategy against the bound.
    Parity(ParityArgs),
    /// Grouped-SLD sufficient conditions on a small register.
    Theorem1(Theorem1Args),
    /// Time-reversal protocol on a local circuit.
    Timerev(TimerevArgs),
    /// Single domain wall read out with the domino observable.
    DominoSingle(DominoSingleArgs),
    /// Sweep of group length and time for the partitioned domino protocol.
    DominoFig2(Fig2Args),
    /// One-axis-twisted squeezing diagnostics.
    Squeeze(SqueezeArgs),
    /// Fast paths against dense reference computations.
    OracleSuite(OracleArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ParityArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Single dephasing strength; shorthand for a one-element `--p-list`.
    #[arg(long, conflicts_with = "p_list")]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    /// Block length, or `auto` for the best divisor of `n`.
    #[arg(long)]
    pub m: Option<BlockSize>,
}

#[derive(Debug, Args)]
pub struct Theorem1Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub state: Option<ProbeState>,
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TimerevArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Group length.
    #[arg(long = "L", visible_alias = "group-len")]
    pub l: Option<usize>,
    /// Circuit depth.
    #[arg(long = "T", visible_alias = "depth")]
    pub t: Option<usize>,
    /// Dephasing strength.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub circuit: Option<CircuitKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_pr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_tilde: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DominoSingleArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Evolution time.
    #[arg(long = "T", visible_alias = "time")]
    pub t: Option<f64>,
    /// Dephasing strength.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_pr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_tilde: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    /// Group lengths.
    #[arg(long = "L-list", visible_alias = "l-list", value_delimiter = ',')]
    pub l_list: Option<Vec<usize>>,
    /// Times as fractions of `L / v`.
    #[arg(long, value_delimiter = ',')]
    pub t_fractions: Option<Vec<f64>>,
    /// Wall velocity; measured on a long chain when omitted.
    #[arg(long)]
    pub velocity: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    pub rule: Option<CoefficientRule>,
}

#[derive(Debug, Args)]
pub struct SqueezeArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Dephasing strength.
    #[arg(long)]
    pub p: Option<f64>,
    /// Also write the twisting-time scan.
    #[arg(long)]
    pub scan_t: bool,
    #[arg(long)]
    pub t_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub per_kind: Option<usize>,
}

fn parse_rule(s: &str) -> Result<CoefficientRule, String> {
    match s {
        "rayleigh" => Ok(CoefficientRule::Rayleigh),
        "magnitude" => Ok(CoefficientRule::Magnitude),
        _ => Err(format!(
            "unknown rule `{s}`; expected `rayleigh` or `magnitude`"
        )),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn dephasing(slot: &mut NoiseModel, p: Option<f64>) {
    if let Some(p) = p {
        *slot = NoiseModel::Dephasing { p };
    }
}

/// Fully resolved run: what to compute, where to write, how to schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub workers: usize,
}

impl RunPlan {
    pub fn mode(&self) -> ExecMode {
        if self.workers == 1 {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }
}

impl Cli {
    /// Merges flags over the configuration file and validates the result.
    pub fn plan(self) -> CliResult<RunPlan> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let out = self
            .out
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let workers = self.workers.or(file.workers).unwrap_or(0);
        let experiment = resolve(self.command, file);
        experiment.validate()?;
        Ok(RunPlan {
            experiment,
            out,
            workers,
        })
    }
}

fn resolve(command: Command, file: ConfigFile) -> Experiment {
    match command {
        Command::Bound(a) => {
            let mut c = file.bound;
            set(&mut c.n, a.n);
            set(&mut c.p_list, a.p_list);
            Experiment::Bound(c)
        }
        Command::Parity(a) => {
            let mut c = file.parity;
            set(&mut c.n, a.n);
            set(&mut c.p_list, a.p_list.or(a.p.map(|p| vec![p])));
            set(&mut c.m, a.m);
            Experiment::Parity(c)
        }
        Command::Theorem1(a) => {
            let mut c = file.theorem1;
            set(&mut c.n, a.n);
            set(&mut c.m, a.m);
            set(&mut c.p, a.p);
            set(&mut c.state, a.state);
            set(&mut c.depth, a.depth);
            Experiment::Theorem1(c)
        }
        Command::Timerev(a) => {
            let mut c = file.timerev;
            set(&mut c.n, a.n);
            set(&mut c.l, a.l);
            set(&mut c.t, a.t);
            dephasing(&mut c.noise, a.p);
            set(&mut c.circuit, a.circuit);
            set(&mut c.seed, a.seed);
            set(&mut c.theta_pr, a.theta_pr);
            if a.theta_tilde.is_some() {
                c.theta_tilde = a.theta_tilde;
            }
            Experiment::Timerev(c)
        }
        Command::DominoSingle(a) => {
            let mut c = file.domino_single;
            set(&mut c.n, a.n);
            set(&mut c.t, a.t);
            dephasing(&mut c.noise, a.p);
            set(&mut c.theta_pr, a.theta_pr);
            set(&mut c.theta_tilde, a.theta_tilde);
            Experiment::DominoSingle(c)
        }
        Command::DominoFig2(a) => {
            let mut c = file.domino_fig2;
            set(&mut c.n, a.n);
            set(&mut c.p_list, a.p_list);
            set(&mut c.l_list, a.l_list);
            set(&mut c.t_fractions, a.t_fractions);
            if a.velocity.is_some() {
                c.velocity = a.velocity;
            }
            set(&mut c.rule, a.rule);
            Experiment::DominoFig2(c)
        }
        Command::Squeeze(a) => {
            let mut c = file.squeeze;
            set(&mut c.n, a.n);
            dephasing(&mut c.noise, a.p);
            c.scan_t |= a.scan_t;
            set(&mut c.t_points, a.t_points);
            Experiment::Squeeze(c)
        }
        Command::OracleSuite(a) => {
            let mut c = file.oracle_suite;
            set(&mut c.seed, a.seed);
            set(&mut c.per_kind, a.per_kind);
            Experiment::OracleSuite(c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParityConfig;

    fn plan(args: &[&str]) -> CliResult<RunPlan> {
        Cli::try_parse_from(std::iter::once("metrofi").chain(args.iter().copied()))
            .unwrap()
            .plan()
    }

    #[test]
    fn flags_override_defaults() {
        let p = plan(&[
            "parity",
            "--n",
            "100",
            "--p",
            "0.02",
            "--m",
            "auto",
            "--workers",
            "1",
        ])
        .unwrap();
        assert_eq!(
            p.experiment,
            Experiment::Parity(ParityConfig {
                n: 100,
                p_list: vec![0.02],
                m: BlockSize::Auto
            })
        );
        assert_eq!(p.mode(), ExecMode::Sequential);
        assert_eq!(p.out, PathBuf::from(DEFAULT_OUT_DIR));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "out = \"from-file\"\nworkers = 3\n[domino_fig2]\nn = 120\nl_list = [8, 10]\n",
        )
        .unwrap();
        let p = plan(&[
            "domino-fig2",
            "--config",
            path.to_str().unwrap(),
            "--L-list",
            "20,40",
        ])
        .unwrap();
        let Experiment::DominoFig2(c) = &p.experiment else {
            panic!("wrong experiment")
        };
        assert_eq!(c.n, 120);
        assert_eq!(c.l_list, vec![20, 40]);
        assert_eq!(p.out, PathBuf::from("from-file"));
        assert_eq!(p.workers, 3);
    }

    #[test]
    fn timerev_flags_use_physics_names() {
        let p = plan(&[
            "timerev",
            "--n",
            "10",
            "--L",
            "5",
            "--T",
            "1",
            "--p",
            "0.02",
            "--circuit",
            "random",
            "--seed",
            "7",
        ])
        .unwrap();
        let Experiment::Timerev(c) = &p.experiment else {
            panic!("wrong experiment")
        };
        assert_eq!(
            (c.n, c.l, c.t, c.seed, c.circuit),
            (10, 5, 1, 7, CircuitKind::Random)
        );
        assert_eq!(c.noise, NoiseModel::Dephasing { p: 0.02 });
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(
            plan(&["bound", "--p-list", "0.6"]),
            Err(crate::error::CliError::Config(_))
        ));
        assert!(matches!(
            plan(&["domino-fig2", "--L-list", "7"]),
            Err(crate::error::CliError::Config(_))
        ));
    }
}
