use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

/// Exact transition over `h` of `dZ = (c + a Z) dt + sqrt(sigma2 Z) dW`:
/// a scaled noncentral chi-square with `4c / sigma2` degrees of freedom.
/// Zero degrees of freedom give an atom at 0.
pub fn cir_step<R: Rng + ?Sized>(z: f64, a: f64, sigma2: f64, c: f64, h: f64, rng: &mut R) -> f64 {
    let ah = a * h;
    // (e^{ah} - 1) / a, stable at a = 0.
    let g = if ah.abs() < 1e-12 { h } else { ah.exp_m1() / a };
    if sigma2 <= 0.0 {
        return z * ah.exp() + c * g;
    }
    let scale = sigma2 * g / 4.0;
    let nc = z * ah.exp() / scale;
    let n = if nc > 0.0 {
        Poisson::new(nc / 2.0).unwrap().sample(rng)
    } else {
        0.0
    };
    let shape = 2.0 * c / sigma2 + n;
    if shape <= 0.0 {
        return 0.0;
    }
    scale * Gamma::new(shape, 2.0).unwrap().sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn moments() {
        // E = z e^{ah} + c g, Var = sigma2 z e^{ah} g + sigma2 c g^2 / 2.
        let (z, a, s2, c, h) = (1.0, 0.7, 2.0, 0.5, 0.4);
        let mut rng = stream(1, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| cir_step(z, a, s2, c, h, &mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        let g = (a * h).exp_m1() / a;
        let em = z * (a * h).exp() + c * g;
        let ev = s2 * z * (a * h).exp() * g + s2 * c * g * g / 2.0;
        assert!((m - em).abs() < 4.0 * (ev / n as f64).sqrt(), "{m} vs {em}");
        assert!((v - ev).abs() / ev < 0.03, "{v} vs {ev}");
    }

    #[test]
    fn absorption_mass() {
        // Without immigration, P(Z_h = 0) = exp(-2 z e^{ah} / (sigma2 g)).
        let (z, a, s2, h) = (0.5, -0.3, 2.0, 1.0);
        let mut rng = stream(2, 0);
        let n = 100_000;
        let zeros = (0..n).filter(|_| cir_step(z, a, s2, 0.0, h, &mut rng) == 0.0).count();
        let g = (a * h).exp_m1() / a;
        let p = (-2.0 * z * (a * h).exp() / (s2 * g)).exp();
        let f = zeros as f64 / n as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
    }
}
