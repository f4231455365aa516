//! Manufactured solutions, error norms, convergence and robustness studies,
//! output formats and the property suite.

mod cases;
mod norms;
mod output;
mod props;
mod study;

pub use cases::{CaseName, Domain, ManufacturedCase};
pub use norms::{
    coefficient_norm, compute_errors, energy_norm, error_energy, error_l2_pressure,
    error_l2_velocity, interior_l2_norm, local_h1h_matrix, pressure_l2_norm,
    reconstruction_divergence_l2, weak_divergence_residual, ErrorNorms,
};
pub use output::{csv_row, write_csv, write_reports_csv, write_vtk, CSV_HEADER};
pub use props::{run_property_suite, PropsConfig, PropsReport};
pub use study::{
    convergence_study, discretize, observed_rate, robustness_diagnostics, run_case, run_level,
    Check, ErrorReport, MeshFamily, RateTable, RobustnessReport, Run, RunOptions,
};
