use std::process::Command;

use psilab::amplification::Critical;
use psilab::harness::{
    boundary_expectations, boundary_for, csv, emit_figure_grids, empirical_threshold, is_nonincreasing, is_stable,
    parse_config, run_boundary_suite, run_simulation, ExperimentConfig, BOUNDARY_TOL, FIGURES, FIGURE_POINTS,
};
use psilab::integrators::random_lowrank;
use psilab::Error;

fn config(scheme: &str, n_x: usize, rank: usize, cfl: f64, steps: usize, seed: u64, init: &str) -> ExperimentConfig {
    let coef = if scheme.starts_with("par-") { "square" } else { "linear" };
    parse_config(&format!(
        "scheme = {scheme}\nN_x = {n_x}\nN_v = 4\nrank = {rank}\ncoefficient = {coef}\ncfl = {cfl}\nsteps = {steps}\nseed = {seed}\ninitial_data = {init}\n"
    ))
    .unwrap()
}

fn history_csv(cfg: &ExperimentConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    csv::write_history(&mut buf, &run_simulation(cfg).unwrap()).unwrap();
    buf
}

#[test]
fn boundary_suite_matches_known_limits() {
    let rows = run_boundary_suite().unwrap();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!(r.passed, "{}: {:?} vs {:?}", r.name, r.result.critical, r.expected);
    }
}

#[test]
fn random_rank_three_dtp_lie_decays_at_one_third() {
    for seed in 0..3 {
        let records = run_simulation(&config("hyp-dtp-lie-fe", 64, 3, 1.0 / 3.0, 1000, seed, "random_rank_r")).unwrap();
        assert_eq!(records.len(), 1001);
        assert!(records[1000].frobenius <= records[0].frobenius * (1.0 + 1e-10));
        assert!(is_nonincreasing(&records), "seed {seed}");
        assert!(records.iter().all(|r| r.ortho_residual <= 1e-10));
    }
}

#[test]
fn random_rank_three_ptd_lie_decays_at_one_third() {
    let records = run_simulation(&config("hyp-ptd-lie-fe", 64, 3, 1.0 / 3.0, 1000, 0, "random_rank_r")).unwrap();
    assert!(is_nonincreasing(&records));
}

#[test]
fn worst_mode_grows_past_the_lie_limit() {
    let records = run_simulation(&config("hyp-dtp-lie-fe", 64, 1, 0.5, 1000, 0, "worst_mode")).unwrap();
    assert!(records[1000].frobenius >= 10.0 * records[0].frobenius);
    assert!(!is_stable(&records));
}

#[test]
fn unconditional_schemes_survive_huge_steps() {
    for (scheme, rank, cfl, init) in [
        ("par-full-theta1", 1, 1e2, "worst_mode"),
        ("par-full-theta1", 1, 1e6, "worst_mode"),
        ("par-strang-cn", 2, 1e3, "random_rank_r"),
        ("par-hybrid", 2, 1e4, "random_rank_r"),
    ] {
        let records = run_simulation(&config(scheme, 32, rank, cfl, 100, 1, init)).unwrap();
        assert!(is_nonincreasing(&records), "{scheme} at {cfl}");
    }
    // only the constant mode survives the first step; afterwards the norm is
    // flat up to the conditioning of the implicit solve
    let records = run_simulation(&config("par-full-theta1", 32, 3, 1e6, 100, 1, "random_rank_r")).unwrap();
    assert!(is_stable(&records));
    assert!(records[1].frobenius < records[0].frobenius);
}

#[test]
fn full_upwind_worst_mode_is_stable_at_unit_cfl() {
    let records = run_simulation(&config("hyp-full-fe", 64, 1, 1.0, 100, 0, "worst_mode")).unwrap();
    assert!(is_nonincreasing(&records));
}

#[test]
fn zero_steps_give_the_initial_record() {
    let records = run_simulation(&config("hyp-ptd-strang-rk2", 16, 2, 0.5, 0, 4, "random_rank_r")).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].step, 0);
    let initial = random_lowrank(16, 4, 2, 4).unwrap();
    assert_eq!(records[0].frobenius, initial.reconstruct().frobenius_norm());
}

#[test]
fn identical_configs_write_identical_histories() {
    for scheme in ["hyp-dtp-lie-fe", "par-ptd-lie-theta0.5", "hyp-full-fe"] {
        let cfg = config(scheme, 32, 3, 0.25, 200, 42, "random_rank_r");
        assert_eq!(history_csv(&cfg), history_csv(&cfg), "{scheme}");
    }
    let a = history_csv(&config("hyp-dtp-lie-fe", 32, 3, 0.25, 50, 1, "random_rank_r"));
    let b = history_csv(&config("hyp-dtp-lie-fe", 32, 3, 0.25, 50, 2, "random_rank_r"));
    assert_ne!(a, b);
}

#[test]
fn verdicts_do_not_depend_on_the_seed() {
    for (scheme, _) in boundary_expectations() {
        let Critical::Finite(mu) = boundary_for(&scheme, BOUNDARY_TOL).unwrap().critical else {
            continue;
        };
        let name = scheme.to_string();
        for cfl in [mu - 0.02, mu + 0.02] {
            let verdicts: Vec<bool> = (0..5)
                .map(|seed| is_stable(&run_simulation(&config(&name, 64, 3, cfl, 1000, seed, "random_rank_r")).unwrap()))
                .collect();
            assert!(verdicts.iter().all(|&v| v == verdicts[0]), "{name} at {cfl}: {verdicts:?}");
            if cfl < mu {
                assert!(verdicts[0], "{name} unstable inside its limit");
            }
        }
    }
}

#[test]
fn simulated_thresholds_agree_with_the_boundary_table() {
    let cases = [
        ("hyp-full-fe", 0.9, 1.1),
        ("hyp-dtp-lie-fe", 0.3, 0.4),
        ("hyp-ptd-lie-fe", 0.3, 0.4),
        ("hyp-dtp-strang-rk2", 0.8, 0.95),
        ("par-full-theta0", 0.45, 0.55),
        ("par-dtp-lie-theta1", 0.1, 0.2),
        ("par-dtp-lie-theta0", 0.35, 0.45),
    ];
    for (name, lo, hi) in cases {
        let scheme = name.parse().unwrap();
        let Critical::Finite(mu) = boundary_for(&scheme, BOUNDARY_TOL).unwrap().critical else {
            panic!("{name} has a finite limit");
        };
        let base = config(name, 64, 1, lo, 1000, 0, "worst_mode");
        let empirical = empirical_threshold(&base, is_nonincreasing, lo, hi, 2e-3).unwrap();
        assert!((empirical - mu).abs() <= 0.01, "{name}: simulated {empirical}, analytic {mu}");
    }
}

#[test]
fn threshold_search_needs_a_bracket() {
    let base = config("hyp-dtp-lie-fe", 16, 1, 0.1, 50, 0, "worst_mode");
    assert!(matches!(empirical_threshold(&base, is_nonincreasing, 0.5, 0.6, 1e-3), Err(Error::Input(_))));
}

#[test]
fn overflow_aborts_with_the_step_index() {
    let err = run_simulation(&config("par-dtp-lie-theta0", 64, 3, 0.6, 1000, 0, "random_rank_r")).unwrap_err();
    match err {
        Error::Step { step, source } => {
            assert!(step > 1 && step < 1000);
            assert!(matches!(*source, Error::NonFinite { .. }));
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn figure_grids_have_the_stated_layout() {
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_figure_grids(dir.path()).unwrap();
    assert_eq!(paths.len(), 4);
    for ((file, _, mu_max), path) in FIGURES.iter().zip(&paths) {
        assert!(path.ends_with(file));
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("Y,mu,h"));
        let rows: Vec<[f64; 3]> = lines
            .map(|l| {
                let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
                [f[0], f[1], f[2]]
            })
            .collect();
        assert_eq!(rows.len(), FIGURE_POINTS * FIGURE_POINTS);
        let top = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
        assert_eq!(top, *mu_max);
        let strip = match *file {
            "fig1_dtp_lie.csv" | "fig3_ptd_lie.csv" => Some(1.0 / 3.0),
            "fig4_ptd_strang.csv" => Some(2.0),
            _ => None,
        };
        if let Some(limit) = strip {
            for r in rows.iter().filter(|r| r[1] <= limit) {
                assert!(r[2] <= 1.0 + 1e-12, "{file}: h({}, {}) = {}", r[0], r[1], r[2]);
            }
        }
    }
}

#[test]
fn cli_reports_errors_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "scheme = hyp-dtp-lie-fe\nN_x = 16\nN_v = 4\nrank = 99\ncfl = 0.3\nsteps = 10\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_psilab"))
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("h.csv").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn cli_analyze_writes_a_contour_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_psilab"))
        .args(["analyze", "--scheme", "par-dtp-lie-theta1", "--points", "11", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1 + 11 * 11);
}
