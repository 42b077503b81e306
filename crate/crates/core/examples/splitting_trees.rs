//! The truncated tree with an infinite line sampled two ways: directly from
//! the Lévy path, and as a compact tree with prolific trees grafted on it.
//!
//! cargo run --release --example splitting_trees -- [samples]

use splitree::levy::{LaplaceExponent, LevyQuartet};
use splitree::rng::replicate;
use splitree::sim::{contour_functionals, simulate_nu_r, simulate_upsilon_tree, TreeConfig};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(2000, |s| s.parse().unwrap());
    let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
    let r = 1.0;
    let cfg = TreeConfig::default();
    println!("psi(l) = l^2 - l, b = {:.4}, r = {r}", e.b());

    let direct = replicate(1, n, |_, rng| {
        contour_functionals(&simulate_nu_r(&e, r, &cfg, rng).unwrap().contour, r, 0.1)
    });
    let grafted = replicate(2, n, |_, rng| {
        let u = simulate_upsilon_tree(&e, r, &cfg, rng).unwrap();
        (contour_functionals(&u.contour, r, 0.1), u.spines.len())
    });
    let mean = |v: &mut dyn Iterator<Item = f64>| {
        let (s, c) = v.fold((0.0, 0), |(s, c), x| (s + x, c + 1));
        s / c as f64
    };
    println!(
        "mean lifetime   direct {:.4}  grafted {:.4}",
        mean(&mut direct.iter().map(|f| f.lifetime)),
        mean(&mut grafted.iter().map(|g| g.0.lifetime))
    );
    println!(
        "mean crossings  direct {:.4}  grafted {:.4}",
        mean(&mut direct.iter().map(|f| f.crossings as f64)),
        mean(&mut grafted.iter().map(|g| g.0.crossings as f64))
    );
    println!(
        "mean prolific lines {:.4}, e^(br) = {:.4}",
        mean(&mut grafted.iter().map(|g| g.1 as f64)),
        (e.b() * r).exp()
    );
}
