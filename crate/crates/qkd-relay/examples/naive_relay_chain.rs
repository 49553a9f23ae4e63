//! The exponential decay of naive sifting, and what bridging restores.
//!
//! Under naive sifting only all-same-basis slots yield end-to-end key, a
//! fraction that halves with every node added. Bridged chains hold at 1/2
//! regardless of chain length.
//!
//! ```bash
//! cargo run --example naive_relay_chain
//! ```

use qkd_relay::analytics::naive_end_to_end_fraction;
use qkd_relay::config::RunConfig;
use qkd_relay::nodes::RelayMode;
use qkd_relay::run::run;

fn main() {
    let slots = 50_000u64;
    println!("lossless chains, {slots} slots each:");
    println!(
        "  {:>2} {:>14} {:>10} {:>10}",
        "n", "naive (model)", "naive", "bridged"
    );
    for n in 2..=6usize {
        let config = RunConfig {
            n_nodes: n,
            slots,
            seed: 1_000 + n as u64,
            transmittance: vec![1.0; n - 1],
            mode: RelayMode::Naive,
            threshold: 0.0,
            eve_link: None,
            trace: false,
            out_dir: None,
        };
        let summary = run(&config).summary;
        println!(
            "  {n:>2} {:>14} {:>10.4} {:>10.4}",
            naive_end_to_end_fraction(n).unwrap().to_string(),
            summary.naive_fraction.unwrap(),
            summary.bridged_fraction.unwrap(),
        );
    }
    println!("\nnaive sifting decays as 1/2^(n-1); bridging stays at 1/2.");
}
