//! Dispatch from a resolved [`Experiment`] to the library, producing tables and a JSON result.

use metrofi::channels::{dephasing_qfi_bound, per_qubit_bound, BoundSpec, NoiseModel};
use metrofi::domino::{domino_single, figure2_sweep, Figure2Config};
use metrofi::exec::{map_cells, ExecMode};
use metrofi::oracle::{run_oracle_suite, OracleConfig};
use metrofi::parity::{optimal_block, optimal_block_dividing, parity_report};
use metrofi::protocols::{default_offset, theorem1_check, timerev_fi, LocalCircuit};
use metrofi::smallsys::{GroupPartition, PureState};
use metrofi::squeezing::{
    align_squeezing, noisy_squeeze_fi, oat_scan, oat_state, optimal_oat_time, squeeze_report,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    BlockSize, BoundConfig, CircuitKind, DominoSingleConfig, Experiment, ParityConfig, ProbeState,
    SqueezeConfig, Theorem1Config, TimerevConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, plot_script, PlotKind, Table};

/// A file produced by a run, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// Base name of the JSON record.
    pub stem: &'static str,
    pub artifacts: Vec<Artifact>,
    pub result: Value,
    pub warnings: Vec<String>,
    /// False when the experiment ran but its verdict is negative.
    pub success: bool,
}

impl Outcome {
    fn new(stem: &'static str, result: Value) -> Self {
        Self {
            stem,
            artifacts: Vec::new(),
            result,
            warnings: Vec::new(),
            success: true,
        }
    }

    fn table(mut self, name: impl Into<String>, table: &Table) -> CliResult<Self> {
        self.artifacts.push(Artifact {
            name: name.into(),
            bytes: table.to_csv()?,
        });
        Ok(self)
    }

    fn script(mut self, name: impl Into<String>, text: String) -> Self {
        self.artifacts.push(Artifact {
            name: name.into(),
            bytes: text.into_bytes(),
        });
        self
    }
}

pub fn run(exp: &Experiment, mode: ExecMode) -> CliResult<Outcome> {
    exp.validate()?;
    match exp {
        Experiment::Bound(c) => bound(c),
        Experiment::Parity(c) => parity(c),
        Experiment::Theorem1(c) => theorem1(c),
        Experiment::Timerev(c) => timerev(c),
        Experiment::DominoSingle(c) => single(c),
        Experiment::DominoFig2(c) => fig2(&Figure2Config { mode, ..c.clone() }),
        Experiment::Squeeze(c) => squeeze(c, mode),
        Experiment::OracleSuite(c) => oracle(&OracleConfig { mode, ..*c }),
    }
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Output(format!("json encoding failed: {e}")))
}

/// Per-qubit dephasing bound, or `None` when no proven bound applies.
fn noise_bound(noise: &NoiseModel) -> Option<f64> {
    noise.dephasing_p().and_then(|p| per_qubit_bound(p).ok())
}

const BOUND_UNAVAILABLE: &str =
    "bound unavailable: the QFI bound is proven only for dephasing with 0 < p < 0.5";

fn bound(c: &BoundConfig) -> CliResult<Outcome> {
    let mut table = Table::new(vec!["p", "n", "bound", "bound_per_qubit"]);
    let mut rows = Vec::new();
    for &p in &c.p_list {
        let total = dephasing_qfi_bound(&BoundSpec { n_qubits: c.n, p })?;
        let per = per_qubit_bound(p)?;
        table.push(vec![num(p), c.n.to_string(), num(total), num(per)]);
        rows.push(json!({ "p": p, "n": c.n, "bound": total, "bound_per_qubit": per }));
    }
    Outcome::new("bound", json!({ "rows": rows })).table("bound.csv", &table)
}

fn parity(c: &ParityConfig) -> CliResult<Outcome> {
    let mut table = Table::new(vec![
        "n",
        "p",
        "m",
        "qfi",
        "per_qubit",
        "bound_per_qubit",
        "ratio",
    ]);
    let mut rows = Vec::new();
    for &p in &c.p_list {
        let m = match c.m {
            BlockSize::Auto => optimal_block_dividing(c.n, p)?,
            BlockSize::Fixed(m) => m,
        };
        let r = parity_report(c.n, p, m)?;
        table.push(vec![
            r.n.to_string(),
            num(r.p),
            r.m.to_string(),
            num(r.qfi),
            num(r.per_qubit),
            num(r.bound_per_qubit),
            num(r.ratio),
        ]);
        let mut row = to_value(&r)?;
        row["m_unconstrained"] = json!(optimal_block(p)?);
        rows.push(row);
    }
    let script = plot_script(PlotKind::Parity, "parity.csv", &table, &[])?;
    Ok(
        Outcome::new("parity", json!({ "block_size": c.m, "rows": rows }))
            .table("parity.csv", &table)?
            .script("parity.gp", script),
    )
}

fn theorem1(c: &Theorem1Config) -> CliResult<Outcome> {
    let psi = match c.state {
        ProbeState::Parity => metrofi::parity::parity_state(c.n, c.m)?,
        ProbeState::Plus => PureState::plus(c.n)?,
        ProbeState::Domino => {
            LocalCircuit::domino(c.n, c.m, c.depth, std::f64::consts::FRAC_PI_2)?.prepare()?
        }
    };
    let partition = GroupPartition::contiguous(c.n, c.m, 1)?;
    let rep = theorem1_check(&psi.to_density(), &partition, c.p, &c.thresholds)?;
    let mut table = Table::new(vec!["group", "group_qfi", "correlation_sum"]);
    for (g, (q, s)) in rep.group_qfi.iter().zip(&rep.correlation_sums).enumerate() {
        table.push(vec![g.to_string(), num(*q), num(*s)]);
    }
    let mut result = to_value(&rep)?;
    result["all_pass"] = json!(rep.all_pass());
    Outcome::new("theorem1", result).table("theorem1.csv", &table)
}

fn timerev(c: &TimerevConfig) -> CliResult<Outcome> {
    let circuit = match c.circuit {
        CircuitKind::Domino => LocalCircuit::domino(c.n, c.l, c.t, c.hop_angle)?,
        CircuitKind::Random => LocalCircuit::random_brickwork(c.n, c.t, c.seed)?,
    };
    let partition = GroupPartition::contiguous(c.n, c.l, 1)?;
    let theta = c.theta_pr + c.theta_tilde.unwrap_or_else(|| default_offset(c.l));
    let rep = timerev_fi(
        &circuit,
        &partition,
        c.theta_pr,
        &c.noise.channel(0.0)?,
        theta,
    )?;
    let bound = noise_bound(&c.noise).map(|b| b * c.n as f64);
    let fi_over_qfi = rep.fi.ratio_to_qfi();
    let fi_over_bound = bound.map(|b| rep.fi.fi / b);
    let mut table = Table::new(vec![
        "n",
        "L",
        "T",
        "circuit",
        "theta",
        "fi",
        "qfi",
        "bound",
        "fi_over_qfi",
        "fi_over_bound",
        "overlap_warning",
    ]);
    table.push(vec![
        c.n.to_string(),
        c.l.to_string(),
        c.t.to_string(),
        format!("{:?}", c.circuit).to_lowercase(),
        num(theta),
        num(rep.fi.fi),
        opt(rep.fi.qfi),
        opt(bound),
        opt(fi_over_qfi),
        opt(fi_over_bound),
        rep.overlap_warning.to_string(),
    ]);
    let mut result = json!({ "report": rep, "bound": bound, "fi_over_qfi": fi_over_qfi, "fi_over_bound": fi_over_bound });
    if bound.is_none() {
        result["bound_note"] = json!(BOUND_UNAVAILABLE);
    }
    Outcome::new("timerev", result).table("timerev.csv", &table)
}

fn single(c: &DominoSingleConfig) -> CliResult<Outcome> {
    let rep = domino_single(
        c.n,
        c.t,
        &c.noise.channel(0.0)?,
        c.theta_pr,
        c.theta_tilde,
        c.settings,
    )?;
    let bound = noise_bound(&c.noise);
    let mut table = Table::new(vec![
        "n",
        "T",
        "velocity",
        "window_first",
        "window_last",
        "window_mass",
        "strings",
        "fi",
        "fi_over_t2",
        "noise_threshold",
        "weak_noise",
        "bound_per_qubit",
    ]);
    table.push(vec![
        rep.n.to_string(),
        num(rep.time),
        num(rep.window.velocity),
        rep.window.first.to_string(),
        rep.window.last.to_string(),
        num(rep.window.mass),
        rep.strings.to_string(),
        num(rep.fi.fi),
        num(rep.fi_over_t2),
        num(rep.noise_threshold),
        rep.weak_noise.to_string(),
        opt(bound),
    ]);
    let mut result = json!({ "report": rep, "bound_per_qubit": bound });
    if bound.is_none() {
        result["bound_note"] = json!(BOUND_UNAVAILABLE);
    }
    Outcome::new("domino_single", result).table("domino_single.csv", &table)
}

/// Header of `fig2.csv`.
pub const FIG2_HEADER: [&str; 8] = [
    "p",
    "L",
    "T",
    "fi_per_qubit",
    "bound_per_qubit",
    "ratio",
    "best",
    "status",
];

fn fig2(c: &Figure2Config) -> CliResult<Outcome> {
    let sweep = figure2_sweep(c)?;
    let mut table = Table::new(FIG2_HEADER.to_vec());
    for r in &sweep.rows {
        table.push(vec![
            num(r.p),
            r.l.to_string(),
            num(r.t),
            opt(r.fi_per_qubit),
            num(r.bound_per_qubit),
            opt(r.ratio),
            r.best.to_string(),
            r.status.as_str().to_string(),
        ]);
    }
    let failed = sweep.failed_cells();
    let script = plot_script(PlotKind::Figure2, "fig2.csv", &table, &c.l_list)?;
    let best: Vec<Value> = c
        .p_list
        .iter()
        .map(|&p| match sweep.best(p) {
            Some(r) => json!({ "p": p, "L": r.l, "T": r.t, "ratio": r.ratio }),
            None => json!({ "p": p, "L": null, "T": null, "ratio": null }),
        })
        .collect();
    let mut out = Outcome::new(
        "fig2",
        json!({ "velocity": sweep.velocity, "best": best, "rows": sweep.rows }),
    )
    .table("fig2.csv", &table)?
    .script("fig2.gp", script);
    if failed > 0 {
        out.warnings.push(format!(
            "{failed} of {} sweep cells produced no value",
            sweep.rows.len()
        ));
    }
    Ok(out)
}

fn squeeze(c: &SqueezeConfig, mode: ExecMode) -> CliResult<Outcome> {
    let noise = c.noise.channel(0.0)?;
    let t_opt = optimal_oat_time(c.n)?;
    let st = oat_state(c.n, t_opt)?;
    let rep = squeeze_report(&st, &c.thresholds)?;
    let noisy_fi = noisy_squeeze_fi(&align_squeezing(&st)?, &noise, 0.0)?;
    let heisenberg_target = c.n as f64 / rep.xi2;
    let mut summary = Table::new(vec![
        "n",
        "t",
        "xi2",
        "mean_x",
        "var_y_min",
        "fi_bound",
        "noisy_fi",
        "n_over_xi2",
        "polarization_ok",
        "direction_ok",
    ]);
    summary.push(vec![
        c.n.to_string(),
        num(t_opt),
        num(rep.xi2),
        num(rep.mean_x),
        num(rep.var_y_min),
        num(rep.fi_bound),
        num(noisy_fi),
        num(heisenberg_target),
        rep.polarization_ok.to_string(),
        rep.direction_ok.to_string(),
    ]);
    let mut result =
        json!({ "t": t_opt, "report": rep, "noisy_fi": noisy_fi, "n_over_xi2": heisenberg_target });
    let mut out = Outcome::new("squeeze", Value::Null).table("squeeze.csv", &summary)?;
    if c.scan_t {
        let times: Vec<f64> = if c.t_list.is_empty() {
            let t_max = c.t_max_factor * t_opt;
            (1..=c.t_points)
                .map(|k| t_max * k as f64 / c.t_points as f64)
                .collect()
        } else {
            c.t_list.clone()
        };
        let cells = map_cells(mode, &times, |&t| {
            oat_scan(c.n, &[t], &noise, &c.thresholds, ExecMode::Sequential)
                .map(|mut v| v.remove(0))
        });
        let mut scan = Table::new(vec![
            "t",
            "xi2",
            "mean_x",
            "var_y_min",
            "max_dir_var",
            "polarization_ok",
            "direction_ok",
            "noisy_fi",
            "status",
        ]);
        let mut rows = Vec::with_capacity(cells.len());
        let mut failed = 0;
        for (t, cell) in times.iter().zip(cells) {
            match cell {
                Ok(r) => {
                    scan.push(vec![
                        num(r.t),
                        num(r.xi2),
                        num(r.mean_x),
                        num(r.var_y_min),
                        num(r.max_dir_var),
                        r.polarization_ok.to_string(),
                        r.direction_ok.to_string(),
                        num(r.noisy_fi),
                        "ok".into(),
                    ]);
                    rows.push(to_value(&r)?);
                }
                Err(e) => {
                    failed += 1;
                    let mut row = vec![String::new(); 9];
                    row[0] = num(*t);
                    row[8] = "failed".into();
                    scan.push(row);
                    rows.push(json!({ "t": t, "error": e.to_string() }));
                }
            }
        }
        result["scan"] = Value::Array(rows);
        if failed > 0 {
            out.warnings
                .push(format!("{failed} of {} scan points failed", times.len()));
        }
        out = out.table("squeeze_scan.csv", &scan)?;
    }
    out.result = result;
    Ok(out)
}

fn oracle(c: &OracleConfig) -> CliResult<Outcome> {
    let rep = run_oracle_suite(c)?;
    let mut table = Table::new(vec![
        "kind", "index", "n", "fast", "dense", "rel_err", "passed", "error",
    ]);
    for case in &rep.cases {
        table.push(vec![
            case.kind.as_str().to_string(),
            case.index.to_string(),
            case.n.to_string(),
            num(case.fast),
            num(case.dense),
            num(case.rel_err),
            case.passed.to_string(),
            case.error.clone().unwrap_or_default(),
        ]);
    }
    let passed = rep.all_passed();
    let failures = rep.failures().count();
    let mut out = Outcome::new(
        "oracle",
        json!({ "all_passed": passed, "cases": rep.cases.len(), "max_rel_err": rep.max_rel_err(), "tolerance": rep.tolerance, "report": rep }),
    )
    .table("oracle.csv", &table)?;
    out.success = passed;
    if failures > 0 {
        out.warnings.push(format!(
            "{failures} of {} oracle cases failed",
            rep.cases.len()
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_rows() {
        let out = run(
            &Experiment::Bound(BoundConfig::default()),
            ExecMode::Sequential,
        )
        .unwrap();
        let csv = String::from_utf8(out.artifacts[0].bytes.clone()).unwrap();
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert!((rows[0][3] - 10000.0 / 99.0).abs() < 1e-9);
        assert!((rows[1][3] - 100.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn parity_auto_uses_a_divisor() {
        let cfg = ParityConfig {
            n: 200,
            p_list: vec![0.01],
            m: BlockSize::Auto,
        };
        let out = run(&Experiment::Parity(cfg), ExecMode::Sequential).unwrap();
        let m = out.result["rows"][0]["m"].as_u64().unwrap();
        assert_eq!(200 % m, 0);
        assert_eq!(out.result["rows"][0]["m_unconstrained"], 25);
        assert!(out.artifacts.iter().any(|a| a.name == "parity.gp"));
    }

    #[test]
    fn non_dephasing_noise_has_no_bound() {
        let cfg = TimerevConfig {
            n: 6,
            l: 3,
            noise: NoiseModel::Depolarizing { p: 0.05 },
            ..Default::default()
        };
        let out = run(&Experiment::Timerev(cfg), ExecMode::Sequential).unwrap();
        assert!(out.result["bound"].is_null());
        assert!(out.result["bound_note"]
            .as_str()
            .unwrap()
            .starts_with("bound unavailable"));
    }

    #[test]
    fn oracle_verdict_is_reported() {
        let out = run(
            &Experiment::OracleSuite(OracleConfig {
                per_kind: 1,
                ..Default::default()
            }),
            ExecMode::Sequential,
        )
        .unwrap();
        assert!(out.success);
        assert_eq!(out.result["cases"], 6);
    }
}
