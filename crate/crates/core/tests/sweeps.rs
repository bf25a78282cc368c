use metrofi::channels::PauliChannel;
use metrofi::domino::{figure2_sweep, CellStatus, Figure2Config};
use metrofi::exec::ExecMode;
use metrofi::oracle::{run_oracle_suite, OracleConfig};
use metrofi::squeezing::{oat_scan, SqueezeThresholds};

fn small_grid(mode: ExecMode) -> Figure2Config {
    Figure2Config {
        n: 40,
        p_list: vec![0.01, 0.1],
        l_list: vec![4, 8, 10, 20],
        t_fractions: vec![0.25, 0.5],
        velocity: Some(1.7),
        mode,
        ..Default::default()
    }
}

#[test]
fn figure2_sweep_is_order_independent() {
    let a = figure2_sweep(&small_grid(ExecMode::Sequential)).unwrap();
    let b = figure2_sweep(&small_grid(ExecMode::Parallel)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 2 * 4 * 2);
    for p in [0.01, 0.1] {
        let best: Vec<_> = a.rows.iter().filter(|r| r.p == p && r.best).collect();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].status, CellStatus::Ok);
        assert!(a
            .rows
            .iter()
            .filter(|r| r.p == p)
            .filter_map(|r| r.ratio)
            .all(|x| x <= best[0].ratio.unwrap()));
    }
}

#[test]
fn squeezing_scan_is_order_independent() {
    let times: Vec<f64> = (1..=12).map(|k| 0.01 * k as f64).collect();
    let noise = PauliChannel::dephasing(0.02, 0.0).unwrap();
    let th = SqueezeThresholds::default();
    let a = oat_scan(64, &times, &noise, &th, ExecMode::Sequential).unwrap();
    let b = oat_scan(64, &times, &noise, &th, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn full_oracle_suite_passes() {
    let rep = run_oracle_suite(&OracleConfig::default()).unwrap();
    assert!(rep.cases.len() >= 50);
    let failures: Vec<_> = rep.failures().collect();
    assert!(failures.is_empty(), "{failures:?}");
}
