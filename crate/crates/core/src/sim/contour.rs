use rand::Rng;

use super::TreeConfig;
use crate::error::Result;
use crate::levy::LaplaceExponent;
use crate::path::{concatenate, post_minimum, simulate_levy, time_change_below, CadlagPath, Guard, StopRule, Terminal};

/// A contour glued from independent path segments.
#[derive(Clone, Debug, PartialEq)]
pub struct StagedContour {
    pub contour: CadlagPath,
    /// Number of segments, the first one included.
    pub stages: usize,
}

fn sim_config(cfg: &TreeConfig, guard: Guard) -> crate::path::SimConfig {
    if cfg.guarded {
        cfg.sim.with_guard(guard)
    } else {
        cfg.sim
    }
}

/// The path of `exponent` from 0 after its overall minimum, truncated at
/// `r`.
pub fn post_minimum_stage<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<CadlagPath> {
    let stop = StopRule::Margin(cfg.margin_for(exponent, r));
    let p = simulate_levy(exponent, 0.0, stop, &sim_config(cfg, Guard::AboveMin(r)), rng)?;
    Ok(time_change_below(&post_minimum(&p)?, r).with_terminal(Terminal::Killed))
}

/// A path from `x` killed at 0, truncated at `a`. Used with the
/// subcritical exponent, which returns to 0 almost surely.
pub(crate) fn descent_stage<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x: f64,
    a: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<CadlagPath> {
    let p = simulate_levy(
        exponent,
        x,
        StopRule::HitLevel(0.0),
        &sim_config(cfg, Guard::Level(a)),
        rng,
    )?;
    Ok(time_change_below(&p, a))
}

/// Segments of the path from `x`, each truncated at `r`, restarted at `r`
/// whenever one escapes, until one of them reaches 0. This is the contour
/// of the forest above `[0, x]` truncated at `r`.
pub fn simulate_reflected<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x: f64,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<Vec<CadlagPath>> {
    let stop = StopRule::HitOrEscape {
        level: 0.0,
        escape: cfg.margin_for(exponent, r),
    };
    let sim = sim_config(cfg, Guard::Level(r));
    let mut parts = Vec::new();
    let mut start = x.min(r);
    loop {
        let p = simulate_levy(exponent, start, stop, &sim, rng)?;
        let done = p.terminal() == Terminal::HitZero;
        parts.push(time_change_below(&p, r).with_terminal(if done { Terminal::HitZero } else { Terminal::Killed }));
        if done {
            return Ok(parts);
        }
        if parts.len() > cfg.node_budget {
            return Err(crate::Error::NodeBudgetExceeded {
                budget: cfg.node_budget,
                seed: 0,
            });
        }
        start = r;
    }
}

/// Contour of the tree with an infinite line truncated at `r`: the
/// post-minimum segment followed by copies of the path started at `r`,
/// each truncated at `r`, until one of them reaches 0.
pub fn simulate_nu_r<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<StagedContour> {
    let mut parts = vec![post_minimum_stage(exponent, r, cfg, rng)?];
    parts.extend(simulate_reflected(exponent, r, r, cfg, rng)?);
    let stages = parts.len();
    Ok(StagedContour {
        contour: concatenate(&parts)?,
        stages,
    })
}

/// Contour of the tree reduced to a single infinite line and the compact
/// trees hanging from it: the post-minimum segment followed by the
/// subcritical path from `r` down to 0, both truncated at `r`.
pub fn simulate_sin_tree<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<StagedContour> {
    let left = post_minimum_stage(exponent, r, cfg, rng)?;
    let right = descent_stage(&exponent.sharp(), r, r, cfg, rng)?;
    Ok(StagedContour {
        contour: concatenate(&[left, right.with_terminal(Terminal::HitZero)])?,
        stages: 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyQuartet;
    use crate::rng::{replicate, stream};

    #[test]
    fn yule_nu_r_is_a_yule_contour() {
        let e = LaplaceExponent::new(LevyQuartet::yule(1.0)).unwrap();
        let c = simulate_nu_r(&e, 1.0, &TreeConfig::default(), &mut stream(1, 0)).unwrap();
        assert_eq!(c.contour.end_value(), Some(0.0));
        assert!(c.contour.sup() <= 1.0 + 1e-12);
        // Post-minimum segment of a killed slope -1 path is empty.
        assert_eq!(c.contour.start_value(), Some(1.0));
        let mean_n: f64 = replicate(2, 20_000, |_, rng| {
            simulate_nu_r(&e, 1.0, &TreeConfig::default(), rng).unwrap().stages as f64 - 1.0
        })
        .iter()
        .sum::<f64>()
            / 20_000.0;
        assert!((mean_n - std::f64::consts::E).abs() < 0.05, "{mean_n}");
    }

    #[test]
    fn brownian_contours_end_at_zero_below_r() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = TreeConfig::default();
        for s in 0..20 {
            let c = simulate_nu_r(&e, 1.0, &cfg, &mut stream(3, s)).unwrap();
            assert_eq!(c.contour.terminal(), Terminal::HitZero);
            assert!(c.contour.sup() <= 1.0 + 1e-12);
            assert!(c.contour.inf() >= -1e-12);
            let s = simulate_sin_tree(&e, 1.0, &cfg, &mut stream(4, s)).unwrap();
            assert_eq!(s.contour.end_value(), Some(0.0));
        }
    }
}
