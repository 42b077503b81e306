use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::cir::cir_step;
use super::{BranchConfig, BranchTerminal, BranchingPath};
use crate::error::{Error, Result};
use crate::levy::{LaplaceExponent, SplitSampler};
use crate::path::JumpSampler;

/// Immigration mechanism: a drift plus jumps drawn from
/// `(1 - e^{-b y}) / b pi(dy)`.
#[derive(Clone, Debug)]
pub struct Immigration {
    pub drift: f64,
    pub jumps: Option<SplitSampler>,
}

impl Immigration {
    pub fn none() -> Self {
        Immigration {
            drift: 0.0,
            jumps: None,
        }
    }

    /// The immigration of the conditioned process: drift `2 beta` and the
    /// tilted jump measure.
    pub fn of(exponent: &LaplaceExponent) -> Self {
        let s = SplitSampler::new(exponent);
        Immigration {
            drift: 2.0 * exponent.quartet().beta,
            jumps: (s.total() > 0.0).then_some(s),
        }
    }

    fn jump_rate(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |s| s.total())
    }
}

/// Branching dynamics of a continuous-state process: Lamperti time change
/// of the Lévy process of `exponent`, plus immigration.
pub(crate) struct Dynamics {
    growth: f64,
    sigma2: f64,
    kill: f64,
    jumps: JumpSampler,
    /// Clock of the Lévy process (integrated mass) at the next jump or kill.
    next_event: f64,
    clock: f64,
}

impl Dynamics {
    pub(crate) fn new<R: Rng + ?Sized>(exponent: &LaplaceExponent, rng: &mut R) -> Self {
        let q = exponent.quartet();
        let jumps = JumpSampler::new(q);
        let mut d = Dynamics {
            growth: q.path_drift(),
            sigma2: 2.0 * q.beta,
            kill: q.kappa,
            jumps,
            next_event: 0.0,
            clock: 0.0,
        };
        d.next_event = d.draw(rng);
        d
    }

    fn event_rate(&self) -> f64 {
        self.jumps.rate() + self.kill
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.event_rate();
        if r > 0.0 {
            Exp::new(r).unwrap().sample(rng)
        } else {
            f64::INFINITY
        }
    }

    /// Runs from `z` over `[t0, t1]` with immigration drift `c` (no
    /// immigration jumps), recording each step.
    ///
    /// Returns the final mass, or `None` if it exploded.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn advance<R: Rng + ?Sized>(
        &mut self,
        mut z: f64,
        t0: f64,
        t1: f64,
        c: f64,
        cfg: &BranchConfig,
        rec: &mut dyn FnMut(f64, f64) -> Result<()>,
        rng: &mut R,
    ) -> Result<Option<f64>> {
        let mut t = t0;
        let step = cfg.dt;
        while t < t1 {
            if z == 0.0 && c == 0.0 {
                return Ok(Some(0.0));
            }
            let h = step.min(t1 - t);
            let (z_new, area) = if self.sigma2 > 0.0 {
                let z_new = cir_step(z, self.growth, self.sigma2, c, h, rng);
                (z_new, 0.5 * (z + z_new) * h)
            } else {
                let (z_new, area) = ode_flow(z, self.growth, c, h);
                (z_new, area)
            };
            if self.clock + area >= self.next_event {
                // Exact event time for the deterministic flow, end of step
                // otherwise.
                let (te, ze) = if self.sigma2 > 0.0 {
                    (t + h, z_new)
                } else {
                    let target = self.next_event - self.clock;
                    let s = solve_area(z, self.growth, c, h, target);
                    (t + s, ode_flow(z, self.growth, c, s).0)
                };
                self.clock = self.next_event;
                if rng.random::<f64>() * self.event_rate() < self.kill {
                    return Ok(None);
                }
                z = ze + self.jumps.sample(rng);
                t = te;
                self.next_event = self.clock + self.draw(rng);
            } else {
                self.clock += area;
                z = z_new;
                t += h;
            }
            rec(t, z)?;
        }
        Ok(Some(z))
    }
}

/// Flow of `z' = a z + c` over `h` and its integral.
fn ode_flow(z: f64, a: f64, c: f64, h: f64) -> (f64, f64) {
    let ah = a * h;
    let g = if ah.abs() < 1e-12 { h } else { ah.exp_m1() / a };
    let z_new = z * ah.exp() + c * g;
    // int_0^h (z e^{as} + c (e^{as} - 1) / a) ds
    let area = if a.abs() * h < 1e-12 {
        z * h + 0.5 * c * h * h
    } else {
        z * g + c * (g - h) / a
    };
    (z_new, area)
}

fn solve_area(z: f64, a: f64, c: f64, h: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ode_flow(z, a, c, mid).1 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `Z_t = x + X_{int_0^t Z_s ds}` up to time `horizon`.
pub fn simulate_cb<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x0: f64,
    horizon: f64,
    cfg: &BranchConfig,
    rng: &mut R,
) -> Result<BranchingPath> {
    simulate_cbi_with(exponent, &Immigration::none(), x0, horizon, cfg, rng)
}

/// The branching process of the conditioned exponent with the immigration
/// of `exponent`.
pub fn simulate_cbi<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x0: f64,
    horizon: f64,
    cfg: &BranchConfig,
    rng: &mut R,
) -> Result<BranchingPath> {
    if exponent.b() <= 0.0 {
        return Err(Error::SubcriticalInput);
    }
    simulate_cbi_with(&exponent.sharp(), &Immigration::of(exponent), x0, horizon, cfg, rng)
}

/// Branching mechanism `branching` with immigration `imm`.
pub fn simulate_cbi_with<R: Rng + ?Sized>(
    branching: &LaplaceExponent,
    imm: &Immigration,
    x0: f64,
    horizon: f64,
    cfg: &BranchConfig,
    rng: &mut R,
) -> Result<BranchingPath> {
    if x0 < 0.0 {
        return Err(Error::Config(format!("initial mass {x0} is negative")));
    }
    let mut path = BranchingPath::start(x0, None);
    let mut dynamics = Dynamics::new(branching, rng);
    let imm_rate = imm.jump_rate();
    let imm_clock = |rng: &mut R| {
        if imm_rate > 0.0 {
            Exp::new(imm_rate).unwrap().sample(rng)
        } else {
            f64::INFINITY
        }
    };
    let mut t = 0.0;
    let mut z = x0;
    let mut next_imm = imm_clock(rng);
    while t < horizon {
        let t_end = next_imm.min(horizon);
        let budget = cfg.event_budget;
        let mut rec = |s: f64, v: f64| path.push(s, v, None, budget);
        match dynamics.advance(z, t, t_end, imm.drift, cfg, &mut rec, rng)? {
            None => {
                path.terminal = BranchTerminal::Killed;
                path.push(t_end, f64::INFINITY, None, budget)?;
                return Ok(path);
            }
            Some(v) => z = v,
        }
        t = t_end;
        if z == 0.0 && imm.drift == 0.0 && imm_rate == 0.0 {
            path.terminal = BranchTerminal::AbsorbedAtZero;
            return Ok(path);
        }
        if t >= next_imm && t < horizon {
            z += imm.jumps.as_ref().unwrap().sample(rng).0;
            path.push(t, z, None, budget)?;
            next_imm = t + imm_clock(rng);
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{semigroup_u, LevyQuartet, OdeOptions};
    use crate::rng::{replicate, stream};

    fn mean_se(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn zero_exponent_is_constant() {
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, 0.0, 0.0)).unwrap();
        let p = simulate_cb(&e, 1.3, 2.0, &BranchConfig::default(), &mut stream(0, 0)).unwrap();
        assert_eq!(p.final_z(), 1.3);
    }

    #[test]
    fn quadratic_mean_and_laplace() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = BranchConfig::default();
        let z = replicate(1, 20_000, |_, rng| {
            simulate_cb(&e, 1.0, 1.0, &cfg, rng).unwrap().final_z()
        });
        let (m, se) = mean_se(&z);
        assert!((m - 1f64.exp()).abs() < 3.0 * se, "{m} ± {se}");
        for l in [0.5, 1.0, 2.0] {
            let u = semigroup_u(&|x| e.psi(x), l, 1.0, OdeOptions::default()).unwrap();
            let w: Vec<f64> = z.iter().map(|v| (-l * v).exp()).collect();
            let (m, se) = mean_se(&w);
            assert!((m - (-u).exp()).abs() < 3.0 * se + 1e-4, "l={l}: {m} vs {}", (-u).exp());
        }
    }

    #[test]
    fn absorbed_stays_at_zero() {
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, 1.0, 1.0)).unwrap();
        let p = simulate_cb(&e, 0.05, 5.0, &BranchConfig::default(), &mut stream(3, 1)).unwrap();
        if p.terminal == BranchTerminal::AbsorbedAtZero {
            assert_eq!(p.z_at(4.9), 0.0);
        }
        let any = replicate(3, 200, |_, rng| {
            simulate_cb(&e, 0.05, 5.0, &BranchConfig::default(), rng)
                .unwrap()
                .terminal
        });
        assert!(any.contains(&BranchTerminal::AbsorbedAtZero));
    }

    #[test]
    fn jump_cb_mean() {
        // psi = l/2 + e^{-2l} - 1: drift -1/2 and jumps of size 2 at rate 1,
        // so E Z_t = x e^{3t/2}.
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, 0.5, 0.0).with_atom(1.0, 2.0)).unwrap();
        let cfg = BranchConfig::default();
        let z = replicate(2, 20_000, |_, rng| {
            simulate_cb(&e, 1.0, 1.0, &cfg, rng).unwrap().final_z()
        });
        let (m, se) = mean_se(&z);
        let expected = (-e.quartet().psi_prime_zero()).exp();
        assert!((m - expected).abs() < 3.0 * se + 0.01, "{m} ± {se} vs {expected}");
    }

    #[test]
    fn cbi_quadratic_mean() {
        // psi# = l^2 + l, phi = 2 l: E Z_t = x e^{-t} + 2 (1 - e^{-t}).
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = BranchConfig::default();
        let z = replicate(4, 20_000, |_, rng| {
            simulate_cbi(&e, 0.5, 1.0, &cfg, rng).unwrap().final_z()
        });
        let (m, se) = mean_se(&z);
        let t1 = (-1f64).exp();
        let expected = 0.5 * t1 + 2.0 * (1.0 - t1);
        assert!((m - expected).abs() < 3.0 * se, "{m} ± {se} vs {expected}");
    }

    #[test]
    fn cbi_without_immigration_is_cb_of_sharp() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = BranchConfig::default();
        let a = simulate_cbi_with(&e.sharp(), &Immigration::none(), 1.0, 1.0, &cfg, &mut stream(5, 0)).unwrap();
        let b = simulate_cb(&e.sharp(), 1.0, 1.0, &cfg, &mut stream(5, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn immigration_jump_count() {
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, -1.0, 1.0).with_atom(1.0, 0.5)).unwrap();
        let imm = Immigration::of(&e);
        let rate = e.immigration_jump_rate();
        assert!((imm.jump_rate() - rate).abs() < 1e-12);
        let cfg = BranchConfig::default();
        let counts = replicate(6, 5_000, |_, rng| {
            let p = simulate_cbi(&e, 1.0, 2.0, &cfg, rng).unwrap();
            p.times.windows(2).filter(|w| w[0] == w[1]).count() as f64
        });
        let (m, se) = mean_se(&counts);
        assert!((m - 2.0 * rate).abs() < 3.0 * se, "{m} ± {se} vs {}", 2.0 * rate);
    }
}
