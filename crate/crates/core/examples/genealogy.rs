//! Samples the genealogy of the prolific lines directly and prints the
//! branch points with their multiplicities.

use splitree::genealogy::{infinite_split_rates, sample_genealogy_poisson};
use splitree::levy::LaplaceExponent;
use splitree::verify::atom_exponent;

fn main() {
    let e = LaplaceExponent::new(atom_exponent()).unwrap();
    let rates = infinite_split_rates(&e, 6);
    println!("b = {:.4}", e.b());
    for (k, r) in rates.iter().enumerate() {
        println!("rate of {} new lines: {r:.5}", k + 1);
    }
    let g = sample_genealogy_poisson(&e, 1.5, 10_000, &mut splitree::rng::stream(11, 0)).unwrap();
    println!("{} prolific lines, {} compact splits", g.lines.len(), g.compact_splits);
    for ev in &g.events {
        println!("  line {} splits at {:.4} into {} new", ev.parent, ev.height, ev.k);
    }
    println!("{}", serde_json::to_string_pretty(&g.to_json()).unwrap());
}
