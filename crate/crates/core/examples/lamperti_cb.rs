//! Continuous-state branching process against its Laplace transform.
//!
//! cargo run --release --example lamperti_cb -- [samples]

use splitree::branching::{simulate_cb, BranchConfig};
use splitree::levy::{semigroup_u, LaplaceExponent, LevyQuartet, OdeOptions};
use splitree::rng::replicate;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(20_000, |s| s.parse().unwrap());
    let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
    let (x, t) = (1.0, 1.0);
    let z = replicate(3, n, |_, rng| {
        simulate_cb(&e, x, t, &BranchConfig::default(), rng).unwrap().final_z()
    });

    let mean = z.iter().sum::<f64>() / n as f64;
    println!(
        "E Z_t: {mean:.4} (exact {:.4})",
        x * (-e.quartet().psi_prime_zero() * t).exp()
    );
    for lambda in [0.5, 1.0, 2.0] {
        let u = semigroup_u(&|l| e.psi(l), lambda, t, OdeOptions::default()).unwrap();
        let laplace = z.iter().map(|v| (-lambda * v).exp()).sum::<f64>() / n as f64;
        println!("E exp(-{lambda} Z_t): {laplace:.4} (exact {:.4})", (-x * u).exp());
    }
}
