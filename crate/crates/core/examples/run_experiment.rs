//! Runs a named experiment with a reduced sample size and prints its report.
//!
//! cargo run --release --example run_experiment -- [name]

use serde_json::json;
use splitree::verify::run_experiment;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "grafting-equivalence".into());
    let config = match name.as_str() {
        "grafting-equivalence" | "pruning-compatibility" => json!({"samples": 2000}),
        _ => serde_json::Value::Null,
    };
    let report = run_experiment(&name, &config, Some(1), None).unwrap();
    println!("{}", report.summary());
    println!("config hash {}", report.config_hash);
}
