//! Samplers for the random trees at a truncation height, all returned as
//! contours (plus the tagged prolific lines where the construction knows
//! them).

mod contour;
mod eta;
mod functionals;
mod upsilon;
mod yule;

pub use contour::{post_minimum_stage, simulate_nu_r, simulate_reflected, simulate_sin_tree, StagedContour};
pub use eta::{simulate_eta_x, EtaForest, EtaOptions};
pub use functionals::{contour_functionals, ContourFunctionals};
pub use upsilon::{simulate_upsilon_tree, splice_descending, UpsilonTree};
pub use yule::{simulate_yule_contour, YuleContour};

use crate::levy::LaplaceExponent;
use crate::path::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeConfig {
    pub sim: SimConfig,
    /// Margin for post-minimum stops; `None` uses `r + ln(1e6) / b`.
    pub margin: Option<f64>,
    /// Maximum number of prolific lines per sample.
    pub node_budget: usize,
    /// Skip excursions above the truncation height exactly (continuous
    /// exponents only).
    pub guarded: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            sim: SimConfig::default(),
            margin: None,
            node_budget: 1_000_000,
            guarded: true,
        }
    }
}

impl TreeConfig {
    pub fn margin_for(&self, exponent: &LaplaceExponent, r: f64) -> f64 {
        self.margin.unwrap_or_else(|| r + 1e6f64.ln() / exponent.b().max(1e-12))
    }
}
