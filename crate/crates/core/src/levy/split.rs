use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use super::LaplaceExponent;

/// Jumps `y` drawn from `(1 - e^{-b y}) / b pi(dy)`, each split at a height
/// `x` with density proportional to `e^{-b x}` on `[0, y]` into
/// `k ~ Poisson(b (y - x))` new prolific lines.
#[derive(Clone, Debug)]
pub struct SplitSampler {
    b: f64,
    atom_rates: Vec<(f64, f64)>,
    exp_rate: Option<(f64, f64)>,
    total: f64,
}

impl SplitSampler {
    pub fn new(exponent: &LaplaceExponent) -> Self {
        let q = exponent.quartet();
        let b = exponent.b();
        let atom_rates: Vec<(f64, f64)> = q
            .atoms
            .iter()
            .map(|a| (a.mass * (-(-b * a.size).exp_m1()) / b, a.size))
            .collect();
        let exp_rate = q.exp_component.map(|e| (e.mass / (e.rate + b), e.rate));
        let total = atom_rates.iter().map(|a| a.0).sum::<f64>() + exp_rate.map_or(0.0, |e| e.0);
        SplitSampler {
            b,
            atom_rates,
            exp_rate,
            total,
        }
    }

    /// Total mass of `(1 - e^{-b y}) / b pi(dy)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Rate of splits with at least one prolific line.
    pub fn prolific_rate(&self) -> f64 {
        let b = self.b;
        let mut r = 0.0;
        for &(w, y) in &self.atom_rates {
            // Subtract the k = 0 mass y e^{-by} from (1 - e^{-by}) / b.
            let full = -(-b * y).exp_m1() / b;
            r += w / full * (full - y * (-b * y).exp());
        }
        if let Some((w, rho)) = self.exp_rate {
            // int (1 - e^{-bz})/b rho e^{-rho z} dz = 1/(rho+b); the k = 0
            // part is rho/(rho+b)^2.
            let c = w * (rho + b);
            r += c * (1.0 / (rho + b) - rho / (rho + b).powi(2));
        }
        r
    }

    /// Returns `(y, x, k)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, usize) {
        let mut u = rng.random::<f64>() * self.total;
        let mut y = None;
        for &(w, size) in &self.atom_rates {
            if u < w {
                y = Some(size);
                break;
            }
            u -= w;
        }
        let b = self.b;
        let y = y.unwrap_or_else(|| {
            let rho = self.exp_rate.expect("weights sum to total").1;
            let exp = Exp::new(rho).unwrap();
            loop {
                let y = exp.sample(rng);
                if rng.random::<f64>() < -(-b * y).exp_m1() {
                    break y;
                }
            }
        });
        // x has density b e^{-bx} / (1 - e^{-by}) on [0, y].
        let v: f64 = rng.random();
        let x = -(1.0 - v * (-(-b * y).exp_m1())).ln() / b;
        let x = x.min(y);
        let mean = b * (y - x);
        let k = if mean > 0.0 {
            Poisson::new(mean).unwrap().sample(rng) as usize
        } else {
            0
        };
        (y, x, k)
    }
}
