//! How much of a padded signal is genuine: transmittance^hops.
//!
//! Padding keeps every hop at full rate, but only photons that survived
//! every hop carry Alice's bits. Exact provenance tracking through the
//! relay records counts them, and the count matches the product of the
//! per-hop transmittances — the quantity that ultimately bounds how far a
//! padded chain is worth extending.
//!
//! ```bash
//! cargo run --example origin_scaling
//! ```

use qkd_relay::analytics::origin_fraction;
use qkd_relay::config::RunConfig;
use qkd_relay::nodes::RelayMode;
use qkd_relay::run::run;

fn main() {
    let slots = 50_000u64;
    println!("padding relays, {slots} slots per point:");
    println!(
        "  {:>4} {:>5} {:>10} {:>10} {:>10}",
        "xi", "hops", "observed", "model", "error"
    );
    for xi in [0.9, 0.7, 0.5] {
        for hops in 1..=4usize {
            let config = RunConfig {
                n_nodes: hops + 1,
                slots,
                seed: 4_000 + hops as u64,
                transmittance: vec![xi; hops],
                mode: RelayMode::Padding,
                threshold: 0.0,
                eve_link: None,
                trace: false,
                out_dir: None,
            };
            let summary = run(&config).summary;
            let observed = summary.origin_fraction.unwrap();
            let model = origin_fraction(xi, hops as u32);
            println!(
                "  {xi:>4.1} {hops:>5} {observed:>10.4} {model:>10.4} {:>10.4}",
                (observed - model).abs()
            );
        }
    }
    println!("\nthe genuine fraction decays geometrically with hop count,");
    println!("while the detection rate at the last hop stays at xi.");
}
