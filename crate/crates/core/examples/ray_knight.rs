//! Occupation densities of the forest above a segment of length `x`, read
//! at one level and compared with the branching process at that time.
//!
//! cargo run --release --example ray_knight -- [samples]

use splitree::branching::{simulate_cb, BranchConfig};
use splitree::genealogy::{height_process, level_profile, LevelGrid};
use splitree::levy::{LaplaceExponent, LevyQuartet};
use splitree::rng::replicate;
use splitree::sim::{simulate_eta_x, EtaOptions, TreeConfig};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(4000, |s| s.parse().unwrap());
    let e = LaplaceExponent::new(LevyQuartet::quadratic_supercritical()).unwrap();
    let (x, a, truncation) = (1.0, 0.5, 2.0);
    let grid = LevelGrid::centred(a, 0.05);
    let cfg = TreeConfig::default();

    let forest = replicate(1, n, |_, rng| {
        let f = simulate_eta_x(&e, x, truncation, EtaOptions::default(), &cfg, rng).unwrap();
        let h = height_process(&f.contour, e.quartet().beta).unwrap();
        level_profile(&h, None, &grid, truncation - x).unwrap().z2[0]
    });
    let cb = replicate(2, n, |_, rng| {
        simulate_cb(&e, x, a, &BranchConfig::default(), rng).unwrap().final_z()
    });

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let above = |v: &[f64], c: f64| v.iter().filter(|&&z| z > c).count() as f64 / v.len() as f64;
    println!("level {a}: forest mean {:.4}, CB mean {:.4}", mean(&forest), mean(&cb));
    for c in [0.5, 1.0, 2.0, 3.0] {
        println!("P(Z > {c}): forest {:.4}  CB {:.4}", above(&forest, c), above(&cb, c));
    }
}
