use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::cb::Dynamics;
use super::{BranchConfig, BranchTerminal, BranchingPath};
use crate::error::{Error, Result};
use crate::levy::{semigroup_u, LaplaceExponent, OdeOptions, SplitSampler};

/// Number of prolific lines and compact mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeState {
    pub n: u64,
    pub z: f64,
}

/// Simulates `(Z1, Z2)` up to `horizon`.
///
/// `Z1` is a Markov jump process: each line splits in two at rate
/// `beta b`, and meets jumps `y` of `(1 - e^{-b y}) / b pi(dy)` carrying
/// `k ~ Poisson(b (y - x))` new lines while `y` is added to `Z2`. Lines
/// are killed at rate `kappa / b`. Between these events `Z2` is a
/// continuous-state branching process of the conditioned exponent with
/// immigration drift `2 beta Z1`.
pub fn simulate_twotype<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    start: TwoTypeState,
    horizon: f64,
    cfg: &BranchConfig,
    rng: &mut R,
) -> Result<BranchingPath> {
    let b = exponent.b();
    if b <= 0.0 {
        return Err(Error::SubcriticalInput);
    }
    let q = exponent.quartet();
    let sharp = exponent.sharp();
    let splits = SplitSampler::new(exponent);
    let binary = q.beta * b;
    let kill = q.kappa / b;
    let per_line = binary + splits.total() + kill;

    let mut path = BranchingPath::start(start.z, Some(start.n));
    let mut dynamics = Dynamics::new(&sharp, rng);
    let (mut t, mut n, mut z) = (0.0, start.n, start.z);
    while t < horizon {
        let rate = n as f64 * per_line;
        let next = if rate > 0.0 {
            t + Exp::new(rate).unwrap().sample(rng)
        } else {
            f64::INFINITY
        };
        let t_end = next.min(horizon);
        let budget = cfg.event_budget;
        let c = 2.0 * q.beta * n as f64;
        let mut rec = |s: f64, v: f64| path.push(s, v, Some(n), budget);
        match dynamics.advance(z, t, t_end, c, cfg, &mut rec, rng)? {
            Some(v) => z = v,
            None => {
                path.terminal = BranchTerminal::Killed;
                path.push(t_end, f64::INFINITY, Some(n), budget)?;
                return Ok(path);
            }
        }
        t = t_end;
        if t >= horizon {
            break;
        }
        let u = rng.random::<f64>() * per_line;
        if u < binary {
            n += 1;
        } else if u < binary + splits.total() {
            let (y, _, k) = splits.sample(rng);
            n += k as u64;
            z += y;
        } else {
            path.terminal = BranchTerminal::Killed;
            return Ok(path);
        }
        path.push(t, z, Some(n), budget)?;
        if n == 0 && z == 0.0 {
            path.terminal = BranchTerminal::AbsorbedAtZero;
            return Ok(path);
        }
    }
    Ok(path)
}

/// `d/dt E_{(n,z)}[s^{Z1} e^{-l Z2}]` at `t = 0`:
/// `e^{-l z} (s^n z psi#(l) + n s^{n-1} (psi(l + b(1-s)) - psi(l + b)) / b)`.
pub fn twotype_generator(exponent: &LaplaceExponent, state: TwoTypeState, s: f64, lambda: f64) -> f64 {
    let b = exponent.b();
    let TwoTypeState { n, z } = state;
    let mass = s.powi(n as i32) * z * exponent.psi_sharp(lambda);
    let lines = if n == 0 {
        0.0
    } else {
        n as f64 * s.powi(n as i32 - 1) * (exponent.psi(lambda + b * (1.0 - s)) - exponent.psi(lambda + b)) / b
    };
    (-lambda * z).exp() * (mass + lines)
}

/// `E_{(n,z)}[s^{Z1_t} e^{-l Z2_t}] = e^{-z (u_t(l+b) - b)} ((u_t(l+b) -
/// u_t(l + b(1-s))) / b)^n`.
pub fn twotype_semigroup(
    exponent: &LaplaceExponent,
    state: TwoTypeState,
    s: f64,
    lambda: f64,
    t: f64,
    opts: OdeOptions,
) -> Result<f64> {
    let b = exponent.b();
    let psi = |x: f64| exponent.psi(x);
    let u_top = semigroup_u(&psi, lambda + b, t, opts)?;
    let u_low = semigroup_u(&psi, lambda + b * (1.0 - s), t, opts)?;
    Ok((-state.z * (u_top - b)).exp() * ((u_top - u_low) / b).powi(state.n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyQuartet;
    use crate::rng::{replicate, stream};

    fn quadratic() -> LaplaceExponent {
        LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap()
    }

    fn with_atom() -> LaplaceExponent {
        let e1 = (-1.0f64).exp();
        LaplaceExponent::new(LevyQuartet::new(0.0, -1.0 - e1, 1.0).with_atom(1.0, 1.0)).unwrap()
    }

    #[test]
    fn spot_value() {
        let g = twotype_generator(&quadratic(), TwoTypeState { n: 1, z: 0.0 }, 0.5, 0.0);
        assert!((g + 0.25).abs() < 1e-12);
    }

    #[test]
    fn identities() {
        for e in [quadratic(), with_atom()] {
            for st in [TwoTypeState { n: 2, z: 0.3 }, TwoTypeState { n: 0, z: 1.0 }] {
                assert!(twotype_generator(&e, st, 1.0, 0.0).abs() < 1e-9);
                let l = 0.7;
                let g = twotype_generator(&e, st, 1.0, l);
                let phi = e.phi(l).unwrap();
                let expected = (-l * st.z).exp() * (st.z * e.psi_sharp(l) - st.n as f64 * phi);
                assert!((g - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generator_matches_semigroup() {
        let opts = OdeOptions::default();
        for e in [quadratic(), with_atom()] {
            for (st, s, l) in [
                (TwoTypeState { n: 1, z: 0.0 }, 0.5f64, 0.0f64),
                (TwoTypeState { n: 2, z: 0.5 }, 0.8, 0.4),
            ] {
                let f0 = s.powi(st.n as i32) * (-l * st.z).exp();
                let t = 1e-5;
                let fd = (twotype_semigroup(&e, st, s, l, t, opts).unwrap() - f0) / t;
                let g = twotype_generator(&e, st, s, l);
                assert!((fd - g).abs() < 1e-3, "{fd} vs {g}");
            }
        }
    }

    #[test]
    fn yule_first_jump() {
        let e = quadratic();
        let cfg = BranchConfig::default();
        let survived = replicate(1, 20_000, |_, rng| {
            simulate_twotype(&e, TwoTypeState { n: 1, z: 0.0 }, 0.5, &cfg, rng)
                .unwrap()
                .final_n()
                == Some(1)
        });
        let p = survived.iter().filter(|&&x| x).count() as f64 / 20_000.0;
        let exact = (-0.5f64).exp();
        assert!(
            (p - exact).abs() < 4.0 * (exact * (1.0 - exact) / 20_000.0).sqrt(),
            "{p}"
        );
    }

    #[test]
    fn no_lines_is_cb_of_sharp() {
        let e = quadratic();
        let cfg = BranchConfig::default();
        let p = simulate_twotype(&e, TwoTypeState { n: 0, z: 1.0 }, 1.0, &cfg, &mut stream(2, 0)).unwrap();
        assert!(p.n.iter().all(|&n| n == 0));
        let q = super::super::simulate_cb(&e.sharp(), 1.0, 1.0, &cfg, &mut stream(2, 0)).unwrap();
        assert_eq!(p.final_z(), q.final_z());
    }

    #[test]
    fn semigroup_matches_simulation() {
        let e = with_atom();
        let cfg = BranchConfig::default();
        let st = TwoTypeState { n: 1, z: 0.5 };
        let (s, l, t) = (0.7f64, 0.5, 0.5);
        let w = replicate(3, 20_000, |_, rng| {
            let p = simulate_twotype(&e, st, t, &cfg, rng).unwrap();
            s.powi(p.final_n().unwrap() as i32) * (-l * p.final_z()).exp()
        });
        let n = w.len() as f64;
        let m = w.iter().sum::<f64>() / n;
        let se = (w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let exact = twotype_semigroup(&e, st, s, l, t, OdeOptions::default()).unwrap();
        assert!((m - exact).abs() < 3.5 * se + 2e-3, "{m} ± {se} vs {exact}");
    }
}
