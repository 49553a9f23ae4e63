//! The two-party baseline: Alice and Bob, no relays.
//!
//! Half of all timeslots survive sifting (the two ends agree on a basis
//! with probability 1/2) and the sifted strings agree exactly.
//!
//! ```bash
//! cargo run --example two_party_baseline
//! ```

use qkd_relay::config::RunConfig;
use qkd_relay::nodes::RelayMode;
use qkd_relay::run::run;

fn main() {
    let config = RunConfig {
        n_nodes: 2,
        slots: 50_000,
        seed: 1,
        transmittance: vec![1.0],
        mode: RelayMode::Naive,
        threshold: 0.0,
        eve_link: None,
        trace: false,
        out_dir: None,
    };
    let output = run(&config);
    let summary = &output.summary;

    println!("two-party run over {} slots", summary.slots);
    println!(
        "  sifted fraction: {:.4} (expected 0.5)",
        summary.naive_fraction.unwrap()
    );
    println!(
        "  key agreement:   {} bits, {} mismatches",
        output.naive_key.len(),
        output
            .naive_key
            .alice_bits()
            .iter()
            .zip(output.naive_key.bob_bits())
            .filter(|(a, b)| a != b)
            .count()
    );
    println!("  QBER:            {:.4}", summary.qber.unwrap());
}
