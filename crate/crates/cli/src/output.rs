//! Result persistence: CSV tables, JSON records and gnuplot scripts.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never observes a partially written result.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Version of the CSV layouts; bumped whenever a header changes.
pub const FORMAT_VERSION: u32 = 1;

/// A rectangular table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Output(format!("csv encoding failed: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Output(format!("csv encoding failed: {e}")))
    }
}

/// Shortest round-trip decimal form; non-finite values become an empty field.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Experiment output echoed into the JSON record.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord<'a, C: Serialize, R: Serialize> {
    pub experiment: &'a str,
    pub format_version: u32,
    pub software_version: &'a str,
    pub timestamp: String,
    pub config: &'a C,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub result: &'a R,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Output(format!("{} has no file name", path.display())))?;
    let tmp: PathBuf = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Kind of record a plot script can be drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Figure2,
    Parity,
}

/// Gnuplot script for a sweep written to `csv_name`.
///
/// The x axis is `p` on a log scale, the y axis is the FI per qubit. The
/// domino script draws one series per group length `L`; the parity script
/// draws the optimal-block series. Both overlay the per-qubit bound dashed.
pub fn plot_script(
    kind: PlotKind,
    csv_name: &str,
    table: &Table,
    series: &[usize],
) -> CliResult<String> {
    if table.rows.is_empty() {
        return Err(CliError::Output("cannot plot an empty record".into()));
    }
    let col = |name: &str| -> CliResult<usize> {
        table
            .header
            .iter()
            .position(|h| *h == name)
            .map(|i| i + 1)
            .ok_or_else(|| CliError::Output(format!("record has no `{name}` column")))
    };
    let y = match kind {
        PlotKind::Figure2 => "fi_per_qubit",
        PlotKind::Parity => "per_qubit",
    };
    let (p, fi, bound) = (col("p")?, col(y)?, col("bound_per_qubit")?);
    let stem = csv_name.trim_end_matches(".csv");
    let mut s = String::new();
    s.push_str("set datafile separator comma\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'p'\n");
    s.push_str("set ylabel 'FI per qubit'\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{stem}.png'\n"));
    match kind {
        PlotKind::Figure2 => {
            let l = col("L")?;
            if series.is_empty() {
                return Err(CliError::Output("domino plot needs at least one L".into()));
            }
            let list: Vec<String> = series.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("L_values = \"{}\"\n", list.join(" ")));
            s.push_str(&format!(
                "plot for [L in L_values] '{csv_name}' using {p}:(${l} == L ? ${fi} : NaN) with points pt 7 title sprintf('L = %s', L), \\\n"
            ));
        }
        PlotKind::Parity => {
            s.push_str(&format!("plot '{csv_name}' using {p}:{fi} with linespoints pt 7 title 'parity, m = auto', \\\n"));
        }
    }
    s.push_str(&format!(
        "     '{csv_name}' using {p}:{bound} with lines dashtype 2 lc rgb 'black' title 'bound'\n"
    ));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_table() -> Table {
        let mut t = Table::new(vec![
            "p",
            "L",
            "T",
            "fi_per_qubit",
            "bound_per_qubit",
            "ratio",
            "best",
            "status",
        ]);
        t.push(vec![
            "0.01".into(),
            "8".into(),
            "1".into(),
            "3".into(),
            "101".into(),
            "0.03".into(),
            "true".into(),
            "ok".into(),
        ]);
        t
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let bytes = fig2_table().to_csv().unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "p,L,T,fi_per_qubit,bound_per_qubit,ratio,best,status\n0.01,8,1,3,101,0.03,true,ok\n"
        );
    }

    #[test]
    fn numbers_round_trip() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::NAN), "");
        assert_eq!(num(100.0 / 9.0).parse::<f64>().unwrap(), 100.0 / 9.0);
    }

    #[test]
    fn figure2_script_references_columns() {
        let s = plot_script(PlotKind::Figure2, "fig2.csv", &fig2_table(), &[8, 10]).unwrap();
        assert!(s.contains("using 1:($2 == L ? $4 : NaN)"));
        assert!(s.contains("using 1:5 with lines dashtype 2"));
        assert!(s.contains("L_values = \"8 10\""));
    }

    #[test]
    fn parity_script_uses_per_qubit_column() {
        let mut t = Table::new(vec![
            "n",
            "p",
            "m",
            "qfi",
            "per_qubit",
            "bound_per_qubit",
            "ratio",
        ]);
        t.push(vec![
            "200".into(),
            "0.01".into(),
            "25".into(),
            "7000".into(),
            "35".into(),
            "101".into(),
            "0.35".into(),
        ]);
        let s = plot_script(PlotKind::Parity, "parity.csv", &t, &[]).unwrap();
        assert!(s.contains("using 2:5 with linespoints"));
        assert!(s.contains("using 2:6 with lines dashtype 2"));
        assert!(s.contains("m = auto"));
    }

    #[test]
    fn empty_record_is_rejected() {
        let t = Table::new(vec!["p", "per_qubit", "bound_per_qubit"]);
        assert!(plot_script(PlotKind::Parity, "parity.csv", &t, &[]).is_err());
    }

    #[test]
    fn wrong_record_is_rejected() {
        let mut t = Table::new(vec!["t", "xi2"]);
        t.push(vec!["1".into(), "0.5".into()]);
        assert!(plot_script(PlotKind::Parity, "squeeze.csv", &t, &[]).is_err());
    }
}
