//! The pair (prolific lines, mass) as a two-type branching process, checked
//! against its exact semigroup.
//!
//! cargo run --release --example two_type -- [samples]

use splitree::branching::{simulate_twotype, twotype_generator, twotype_semigroup, BranchConfig, TwoTypeState};
use splitree::levy::{LaplaceExponent, LevyQuartet, OdeOptions};
use splitree::rng::replicate;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(20_000, |s| s.parse().unwrap());
    let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
    let start = TwoTypeState { n: 1, z: 0.0 };
    let t = 0.8;
    let ends = replicate(4, n, |_, rng| {
        let p = simulate_twotype(&e, start, t, &BranchConfig::default(), rng).unwrap();
        (p.final_n().unwrap(), p.final_z())
    });
    let lines = ends.iter().map(|p| p.0 as f64).sum::<f64>() / n as f64;
    println!(
        "mean prolific lines at {t}: {lines:.4} (e^(bt) = {:.4})",
        (e.b() * t).exp()
    );
    for (s, lambda) in [(0.5f64, 0.0f64), (0.8, 0.4)] {
        let sim = ends
            .iter()
            .map(|&(k, z)| s.powi(k as i32) * (-lambda * z).exp())
            .sum::<f64>()
            / n as f64;
        let exact = twotype_semigroup(&e, start, s, lambda, t, OdeOptions::default()).unwrap();
        let g = twotype_generator(&e, start, s, lambda);
        println!("E s^N e^(-lZ) at (s, l) = ({s}, {lambda}): {sim:.4} (exact {exact:.4}), generator {g:.4}");
    }
}
