//! Parameter sweeps over group size, generation time and dephasing strength.

use serde::{Deserialize, Serialize};

use super::one_dw::{one_dw_evolve, velocity_estimate};
use super::partition::{CoefficientRule, DominoLayout, PartitionSettings, PartitionedDomino};
use crate::channels::{per_qubit_bound, PauliChannel};
use crate::error::{invalid, Error, Result};
use crate::exec::{map_cells, ExecMode};

/// Wall velocity measured on a long chain, used to turn time fractions into times.
pub fn reference_velocity() -> Result<f64> {
    velocity_estimate(&one_dw_evolve(400, 20.0)?)
}

/// Grid of a group-length and time sweep. Each `(L, f)` cell runs at `T = f L / v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure2Config {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub l_list: Vec<usize>,
    pub t_fractions: Vec<f64>,
    /// Wall velocity; measured with [`reference_velocity`] when absent.
    pub velocity: Option<f64>,
    pub rule: CoefficientRule,
    pub settings: PartitionSettings,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl Default for Figure2Config {
    fn default() -> Self {
        Self {
            n: 200,
            p_list: vec![0.003, 0.01, 0.03, 0.1],
            l_list: vec![4, 8, 10, 20, 40, 50, 100],
            t_fractions: vec![0.25, 1.0 / 3.0, 0.5],
            velocity: None,
            rule: CoefficientRule::Rayleigh,
            settings: PartitionSettings::default(),
            mode: ExecMode::Parallel,
        }
    }
}

impl Figure2Config {
    pub fn validate(&self) -> Result<()> {
        if self.p_list.is_empty() || self.l_list.is_empty() || self.t_fractions.is_empty() {
            return Err(invalid("sweep grids must be non-empty"));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p > 0.0 && **p < 0.5)) {
            return Err(invalid(format!("dephasing strength {p} outside (0, 0.5)")));
        }
        if let Some(f) = self
            .t_fractions
            .iter()
            .find(|f| !f.is_finite() || **f < 0.0)
        {
            return Err(invalid(format!(
                "time fraction {f} must be finite and non-negative"
            )));
        }
        for &l in &self.l_list {
            DominoLayout::new(self.n, l)?;
        }
        Ok(())
    }
}

/// Why a sweep cell produced no value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Leakage,
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Leakage => "leakage",
            CellStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    pub p: f64,
    pub l: usize,
    pub t: f64,
    pub fi_per_qubit: Option<f64>,
    pub bound_per_qubit: f64,
    pub ratio: Option<f64>,
    /// Highest ratio among the rows sharing this `p`.
    pub best: bool,
    pub status: CellStatus,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure2Table {
    pub n: usize,
    pub velocity: f64,
    /// Rows ordered by `p`, then `L`, then `T`, following the configured grids.
    pub rows: Vec<Figure2Row>,
}

impl Figure2Table {
    pub fn best(&self, p: f64) -> Option<&Figure2Row> {
        self.rows.iter().find(|r| r.best && r.p == p)
    }

    pub fn failed_cells(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status != CellStatus::Ok)
            .count()
    }
}

type CellResult = std::result::Result<Vec<(f64, f64)>, (CellStatus, String)>;

/// Runs every `(L, T)` cell, evaluating all `p` on each prepared cell.
pub fn figure2_sweep(cfg: &Figure2Config) -> Result<Figure2Table> {
    cfg.validate()?;
    let velocity = match cfg.velocity {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(invalid(format!("velocity must be positive, got {v}"))),
        None => reference_velocity()?,
    };
    let cells: Vec<(usize, f64)> = cfg
        .l_list
        .iter()
        .flat_map(|&l| {
            cfg.t_fractions
                .iter()
                .map(move |&f| (l, f * l as f64 / velocity))
        })
        .collect();
    let channels = cfg
        .p_list
        .iter()
        .map(|&p| PauliChannel::dephasing(p, 0.0))
        .collect::<Result<Vec<_>>>()?;

    let results: Vec<CellResult> = map_cells(cfg.mode, &cells, |&(l, t)| {
        let classify = |e: Error| match e {
            Error::Leakage { .. } => (CellStatus::Leakage, e.to_string()),
            _ => (CellStatus::Failed, e.to_string()),
        };
        let layout = DominoLayout::new(cfg.n, l).map_err(classify)?;
        let model = PartitionedDomino::prepare(layout, t, cfg.settings).map_err(classify)?;
        channels
            .iter()
            .map(|ch| {
                let r = model.evaluate(ch, cfg.rule).map_err(classify)?;
                Ok((r.fi_per_qubit, r.ratio.unwrap_or(f64::NAN)))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(cells.len() * cfg.p_list.len());
    for (pi, &p) in cfg.p_list.iter().enumerate() {
        let bound = per_qubit_bound(p)?;
        for (&(l, t), res) in cells.iter().zip(&results) {
            let row = match res {
                Ok(v) => Figure2Row {
                    p,
                    l,
                    t,
                    fi_per_qubit: Some(v[pi].0),
                    bound_per_qubit: bound,
                    ratio: Some(v[pi].1),
                    best: false,
                    status: CellStatus::Ok,
                    message: None,
                },
                Err((status, msg)) => Figure2Row {
                    p,
                    l,
                    t,
                    fi_per_qubit: None,
                    bound_per_qubit: bound,
                    ratio: None,
                    best: false,
                    status: status.clone(),
                    message: Some(msg.clone()),
                },
            };
            rows.push(row);
        }
        let block = &mut rows[pi * cells.len()..];
        let best = block
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.ratio.map(|x| (k, x)))
            .fold(None, |acc: Option<(usize, f64)>, (k, x)| match acc {
                Some((_, y)) if y >= x => acc,
                _ => Some((k, x)),
            });
        if let Some((k, _)) = best {
            block[k].best = true;
        }
    }
    Ok(Figure2Table {
        n: cfg.n,
        velocity,
        rows,
    })
}
