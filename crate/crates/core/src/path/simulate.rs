use rand::Rng;
use rand_distr::{Distribution, Exp, InverseGaussian, StandardNormal};

use super::{CadlagPath, KnotBuf, Terminal};
use crate::error::{Error, Result};
use crate::levy::{LaplaceExponent, LevyQuartet};

/// When to stop a simulated path. Killing always stops it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Fixed time horizon.
    Horizon(f64),
    /// First time the path is `<= level`.
    HitLevel(f64),
    /// First time `X_t - min_{[0,t]} X >= margin`.
    Margin(f64),
    /// First time `<= level`, or first time `>= escape`.
    HitOrEscape { level: f64, escape: f64 },
    /// Run until killed.
    Killed,
}

/// A level above which the path is only needed up to its next return.
///
/// While a continuous path (no jumps, `beta > 0`) sits above the guard at a
/// mesh point, its excursion is not simulated: the return is drawn from the
/// exact first-passage law of drifted Brownian motion, and the excursion is
/// stored as a straight chord. Paths that never return stop at once with
/// [`Terminal::InfiniteProxy`]. Use only when everything above the guard is
/// cut away afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Guard {
    Level(f64),
    /// `running_min + offset`.
    AboveMin(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Brownian mesh `h`.
    pub mesh: f64,
    /// Maximum number of knots per path.
    pub event_budget: usize,
    /// Detect crossings of the lower level between mesh points with the
    /// Brownian-bridge crossing probability.
    pub bridge: bool,
    pub guard: Option<Guard>,
}

impl SimConfig {
    pub fn with_guard(mut self, guard: Guard) -> Self {
        self.guard = Some(guard);
        self
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mesh: 1e-3,
            event_budget: 20_000_000,
            bridge: true,
            guard: None,
        }
    }
}

/// Draws jump sizes from the normalized jump measure.
#[derive(Clone, Debug)]
pub struct JumpSampler {
    total: f64,
    cumulative: Vec<(f64, f64)>,
    exp_rate: Option<f64>,
}

impl JumpSampler {
    pub fn new(q: &LevyQuartet) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(q.atoms.len());
        for a in &q.atoms {
            acc += a.mass;
            cumulative.push((acc, a.size));
        }
        let exp_rate = q.exp_component.filter(|e| e.mass > 0.0).map(|e| e.rate);
        JumpSampler {
            total: q.jump_mass(),
            cumulative,
            exp_rate,
        }
    }

    pub fn rate(&self) -> f64 {
        self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.total;
        for &(c, size) in &self.cumulative {
            if u < c {
                return size;
            }
        }
        match self.exp_rate {
            Some(rate) => Exp::new(rate).unwrap().sample(rng),
            None => self.cumulative.last().map_or(0.0, |c| c.1),
        }
    }
}

/// First passage time to distance `d` below for Brownian motion with
/// variance `2 beta` and drift `mu >= 0` towards the level.
fn first_passage<R: Rng + ?Sized>(d: f64, mu: f64, beta: f64, rng: &mut R) -> f64 {
    if mu > 0.0 {
        InverseGaussian::new(d / mu, d * d / (2.0 * beta)).unwrap().sample(rng)
    } else {
        let z: f64 = StandardNormal.sample(rng);
        d * d / (2.0 * beta * z * z)
    }
}

fn exp_clock<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate > 0.0 {
        Exp::new(rate).unwrap().sample(rng)
    } else {
        f64::INFINITY
    }
}

/// Simulates the Lévy process of `exponent` started at `x0`.
///
/// Jumps form an exact Poisson stream, drift is exact, and the Brownian part
/// (variance `2 beta` per unit time) is sampled on a mesh of width
/// `cfg.mesh` and interpolated linearly. Killing is an exponential clock.
pub fn simulate_levy<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    x0: f64,
    stop: StopRule,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<CadlagPath> {
    let q = exponent.quartet();
    let drift = q.path_drift();
    let sigma = (2.0 * q.beta).sqrt();
    let jumps = JumpSampler::new(q);
    let gaussian = q.beta > 0.0;
    let h = cfg.mesh;
    let mesh = gaussian.then_some(h);

    let horizon = match stop {
        StopRule::Horizon(t) => t,
        _ => f64::INFINITY,
    };
    let lower = match stop {
        StopRule::HitLevel(l) | StopRule::HitOrEscape { level: l, .. } => Some(l),
        _ => None,
    };

    let mut buf = KnotBuf::default();
    let mut t = 0.0;
    let mut v = x0;
    let mut run_min = x0;
    buf.push(t, v);

    let upper = |run_min: f64| match stop {
        StopRule::Margin(k) => run_min + k,
        StopRule::HitOrEscape { escape, .. } => escape,
        _ => f64::INFINITY,
    };
    let finish = |buf: KnotBuf, term: Terminal| Ok(CadlagPath::from_parts(buf.knots, term, mesh));

    if lower.is_some_and(|l| v <= l) {
        return finish(buf, Terminal::HitZero);
    }
    if v >= upper(run_min) {
        return finish(buf, Terminal::InfiniteProxy);
    }

    let kill_at = exp_clock(q.kappa, rng);
    let mut next_jump = exp_clock(jumps.rate(), rng);
    let mut cell_end = if gaussian { 0.0 } else { f64::INFINITY };
    let mut slope = drift;
    let bridge_min = gaussian && cfg.bridge && matches!(stop, StopRule::Margin(_));
    let guard = cfg
        .guard
        .filter(|_| gaussian && jumps.rate() == 0.0 && !matches!(stop, StopRule::Horizon(_)));

    loop {
        if buf.knots.len() > cfg.event_budget {
            return Err(Error::HorizonOverflow {
                budget: cfg.event_budget,
            });
        }
        if let Some(g) = guard.filter(|_| t >= cell_end) {
            let level = match g {
                Guard::Level(l) => l,
                Guard::AboveMin(o) => run_min + o,
            };
            if v > level {
                let d = v - level;
                let returns = drift <= 0.0 || rng.random::<f64>() < (-drift * d / q.beta).exp();
                let hit = if returns {
                    first_passage(d, drift.abs(), q.beta, rng)
                } else {
                    f64::INFINITY
                };
                if kill_at.is_finite() && t + hit >= kill_at {
                    buf.push(kill_at, v);
                    return finish(buf, Terminal::Killed);
                }
                if !returns {
                    buf.push(t + 1.0, v + drift.max(1.0));
                    return finish(buf, Terminal::InfiniteProxy);
                }
                t += hit;
                v = level;
                buf.push(t, v);
                if buf.knots.len() > cfg.event_budget {
                    return Err(Error::HorizonOverflow {
                        budget: cfg.event_budget,
                    });
                }
                continue;
            }
        }
        if gaussian && t >= cell_end {
            let z: f64 = StandardNormal.sample(rng);
            slope = drift + sigma * z / h.sqrt();
            cell_end = t + h;
        }
        let t_end = cell_end.min(next_jump).min(kill_at).min(horizon);
        let v_end = v + slope * (t_end - t);

        // Hits inside the piece.
        if let Some(l) = lower {
            if v_end <= l {
                let th = if slope < 0.0 { t + (l - v) / slope } else { t };
                buf.push(th.min(t_end), l);
                return finish(buf, Terminal::HitZero);
            }
            if gaussian && cfg.bridge && t_end > t {
                let p = (-(v - l) * (v_end - l) / (q.beta * (t_end - t))).exp();
                if rng.random::<f64>() < p {
                    buf.push(0.5 * (t + t_end), l);
                    return finish(buf, Terminal::HitZero);
                }
            }
        }
        let up = upper(run_min);
        if v_end >= up && slope > 0.0 {
            let th = t + (up - v) / slope;
            buf.push(th.min(t_end), up);
            return finish(buf, Terminal::InfiniteProxy);
        }

        // The overall minimum is read off the path after a margin stop, so
        // the minimum of the Brownian bridge is placed as a knot wherever it
        // may undercut the running minimum.
        if bridge_min && t_end > t && v.min(v_end) < run_min + 8.0 * sigma * (t_end - t).sqrt() {
            let u: f64 = rng.random();
            let spread = (v - v_end).powi(2) - 2.0 * sigma * sigma * (t_end - t) * (1.0 - u).ln();
            let m = 0.5 * (v + v_end - spread.sqrt());
            if m < run_min && m < v.min(v_end) {
                let tau = t + (t_end - t) * (v - m) / ((v - m) + (v_end - m));
                buf.push(tau, m);
                run_min = m;
            }
        }
        t = t_end;
        v = v_end;
        buf.push(t, v);
        run_min = run_min.min(v);

        if t >= horizon {
            return finish(buf, Terminal::Horizon);
        }
        if t >= kill_at {
            return finish(buf, Terminal::Killed);
        }
        if t >= next_jump {
            v += jumps.sample(rng);
            buf.push(t, v);
            next_jump = t + exp_clock(jumps.rate(), rng);
            if v >= upper(run_min) {
                return finish(buf, Terminal::InfiniteProxy);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn deterministic_drift_hits_zero() {
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, 1.0, 0.0)).unwrap();
        let p = simulate_levy(
            &e,
            1.0,
            StopRule::HitLevel(0.0),
            &SimConfig::default(),
            &mut stream(1, 0),
        )
        .unwrap();
        assert_eq!(p.terminal(), Terminal::HitZero);
        assert!((p.lifetime() - 1.0).abs() < 1e-15);
        assert_eq!(p.knots().len(), 2);
    }

    #[test]
    fn yule_path_is_slope_minus_one_until_killed() {
        let e = LaplaceExponent::new(LevyQuartet::yule(0.7)).unwrap();
        for s in 0..50 {
            let p = simulate_levy(
                &e,
                1.0,
                StopRule::HitLevel(0.0),
                &SimConfig::default(),
                &mut stream(2, s),
            )
            .unwrap();
            let z = p.lifetime();
            assert!(z <= 1.0 + 1e-15);
            assert!((p.end_value().unwrap() - (1.0 - z)).abs() < 1e-12);
            match p.terminal() {
                Terminal::HitZero => assert!((z - 1.0).abs() < 1e-12),
                Terminal::Killed => assert!(z < 1.0),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn reproducible() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical().with_atom(1.0, 0.3)).unwrap();
        let cfg = SimConfig::default();
        let a = simulate_levy(&e, 0.0, StopRule::Horizon(2.0), &cfg, &mut stream(9, 4)).unwrap();
        let b = simulate_levy(&e, 0.0, StopRule::Horizon(2.0), &cfg, &mut stream(9, 4)).unwrap();
        assert_eq!(a, b);
        assert!((a.lifetime() - 2.0).abs() < 1e-12);
        assert_eq!(a.mesh(), Some(1e-3));
    }

    #[test]
    fn margin_rule_stops_above_running_min() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let p = simulate_levy(&e, 0.0, StopRule::Margin(3.0), &SimConfig::default(), &mut stream(3, 0)).unwrap();
        assert_eq!(p.terminal(), Terminal::InfiniteProxy);
        assert!((p.end_value().unwrap() - p.inf() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn jump_count_is_poisson() {
        let e = LaplaceExponent::new(LevyQuartet::new(0.0, 1.0, 0.0).with_atom(2.0, 0.5)).unwrap();
        let cfg = SimConfig::default();
        let counts = crate::rng::replicate(11, 10_000, |_, rng| {
            simulate_levy(&e, 0.0, StopRule::Horizon(10.0), &cfg, rng)
                .unwrap()
                .jumps()
                .len() as f64
        });
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((19.0..=21.0).contains(&mean), "{mean}");
    }

    #[test]
    fn terminal_mean_matches_drift() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical().with_exp_component(0.5, 2.0)).unwrap();
        let cfg = SimConfig::default();
        let t = 2.0;
        let xs = crate::rng::replicate(12, 10_000, |_, rng| {
            simulate_levy(&e, 0.0, StopRule::Horizon(t), &cfg, rng)
                .unwrap()
                .end_value()
                .unwrap()
        });
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = -e.psi_prime_zero_numeric() * t;
        assert!((mean - target).abs() < 3.0 * (var / n).sqrt(), "{mean} vs {target}");
    }

    #[test]
    fn hitting_probability_from_above() {
        // For psi = l^2 - l, P_x(hit 0) = e^{-x}.
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = SimConfig::default();
        let stop = StopRule::HitOrEscape {
            level: 0.0,
            escape: 12.0,
        };
        let hits = crate::rng::replicate(13, 20_000, |_, rng| {
            let p = simulate_levy(&e, 1.0, stop, &cfg, rng).unwrap();
            f64::from(u8::from(p.terminal() == Terminal::HitZero))
        });
        let n = hits.len() as f64;
        let p = hits.iter().sum::<f64>() / n;
        let q = (-1.0f64).exp();
        assert!((p - q).abs() < 3.5 * (q * (1.0 - q) / n).sqrt(), "{p} vs {q}");
    }

    #[test]
    fn guarded_hitting_probability() {
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = SimConfig::default().with_guard(Guard::Level(1.0));
        let stop = StopRule::HitOrEscape {
            level: 0.0,
            escape: f64::INFINITY,
        };
        let hits = crate::rng::replicate(14, 20_000, |_, rng| {
            let p = simulate_levy(&e, 1.0, stop, &cfg, rng).unwrap();
            f64::from(u8::from(p.terminal() == Terminal::HitZero))
        });
        let n = hits.len() as f64;
        let p = hits.iter().sum::<f64>() / n;
        let q = (-1.0f64).exp();
        assert!((p - q).abs() < 3.5 * (q * (1.0 - q) / n).sqrt(), "{p} vs {q}");
    }

    #[test]
    fn overall_minimum_is_exponential() {
        // For psi = l^2 - l the overall minimum from 0 is -Exp(1).
        let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
        let cfg = SimConfig::default().with_guard(Guard::AboveMin(0.5));
        let mins = crate::rng::replicate(15, 20_000, |_, rng| {
            let p = simulate_levy(&e, 0.0, StopRule::Margin(f64::INFINITY), &cfg, rng).unwrap();
            assert_eq!(p.terminal(), Terminal::InfiniteProxy);
            -p.inf()
        });
        let n = mins.len() as f64;
        let mean = mins.iter().sum::<f64>() / n;
        // Discretization biases the minimum up by O(sqrt(h)).
        assert!((mean - 1.0).abs() < 3.0 / n.sqrt() + 0.03, "{mean}");
    }
}
