//! Truncated Yule contours and the law of the population at height `r`.
//!
//! cargo run --release --example yule_contour -- [b] [r] [samples]

use splitree::rng::replicate;
use splitree::sim::simulate_yule_contour;

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let b = args.first().copied().unwrap_or(0.7);
    let r = args.get(1).copied().unwrap_or(1.0);
    let n = args.get(2).copied().unwrap_or(20_000.0) as usize;

    let one = simulate_yule_contour(b, r, &mut splitree::rng::stream(1, 0));
    println!(
        "one contour: {} knots, lifetime {:.3}, N_r = {}",
        one.contour.knots().len(),
        one.contour.lifetime(),
        one.n_r
    );

    let counts = replicate(7, n, |_, rng| simulate_yule_contour(b, r, rng).n_r);
    let q = (-b * r).exp();
    println!("k   observed  geometric");
    for k in 1..=8 {
        let seen = counts.iter().filter(|&&c| c == k).count() as f64 / n as f64;
        println!("{k:<3} {seen:.4}    {:.4}", q * (1.0 - q).powi(k as i32 - 1));
    }
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    println!("mean {mean:.4}, e^(br) = {:.4}", (b * r).exp());
}
