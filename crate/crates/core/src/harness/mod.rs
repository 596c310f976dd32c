//! Experiment configuration, simulation runs, verification suites and CSV
//! output.

mod config;
pub mod csv;
mod run;
mod suites;

pub use config::{parse_config, serialize_config, ExperimentConfig, InitialData};
pub use run::{
    closed_form, empirical_threshold, is_nonincreasing, is_stable, mode_cfl, run_simulation, setup, time_step,
    worst_mode, RunRecord, STABLE_GROWTH,
};
pub use suites::{
    boundary_expectations, boundary_for, emit_figure_grids, oracle_cases, oracle_schemes, run_boundary_suite,
    run_oracle, run_oracle_suite, run_parabolic_equivalence, BoundaryRow, EquivalenceReport, Expected, OracleCase,
    OracleReport, BOUNDARY_MU_CAP, BOUNDARY_TOL, EQUIVALENCE_TOL, FIGURES, FIGURE_POINTS, ORACLE_SCHEMES, ORACLE_TOL,
};
