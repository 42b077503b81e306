//! Statistical checks of the samplers against closed forms and each other.

pub mod experiments;
pub mod oracle;
pub mod report;
pub mod stats;

pub use experiments::{atom_exponent, find, registry, run_experiment, Experiment};
pub use oracle::brute_force_generations;
pub use report::{config_hash, Check, TestReport, P_FLOOR};
pub use stats::{chi_square_gof, chi_square_two_sample, ks_one_sample, ks_two_sample, mean_se, z_test, TestResult};
