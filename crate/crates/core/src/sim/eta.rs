use rand::Rng;

use super::contour::descent_stage;
use super::upsilon::{poisson_heights, simulate_upsilon_tree, splice_descending};
use super::TreeConfig;
use crate::error::Result;
use crate::levy::LaplaceExponent;
use crate::path::{CadlagPath, Terminal};
use crate::tree::ChronologicalTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EtaOptions {
    /// Hang the compact subtrees on the ancestral segment. Without them the
    /// base of the forest is the bare segment `[0, x]`.
    pub compact: bool,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions { compact: true }
    }
}

/// A forest started from an ancestral segment of length `x`, truncated at
/// `a_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaForest {
    pub contour: CadlagPath,
    /// Prolific subtrees with the height of their root on the segment,
    /// highest first.
    pub prolific: Vec<(f64, ChronologicalTree)>,
}

/// Samples the forest as the subcritical contour from `x` with independent
/// prolific trees grafted at the points of a rate `b` Poisson process on
/// `[0, min(x, a_max))`.
pub fn simulate_eta_x<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x: f64,
    a_max: f64,
    opts: EtaOptions,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<EtaForest> {
    let top = x.min(a_max);
    let base = if opts.compact {
        descent_stage(&exponent.sharp(), x, a_max, cfg, rng)?
    } else {
        CadlagPath::from_points(&[(0.0, top), (top, 0.0)])
    };
    let mut grafts = Vec::new();
    let mut prolific = Vec::new();
    for s in poisson_heights(exponent.b(), top, rng) {
        let u = simulate_upsilon_tree(exponent, a_max - s, cfg, rng)?;
        grafts.push((s, u.contour));
        prolific.push((s, u.spines));
    }
    let contour = splice_descending(&base, grafts).with_terminal(Terminal::HitZero);
    Ok(EtaForest { contour, prolific })
}
