//! Simulation of BB84 key distribution over chains of trusted
//! intercept/resend relays.
//!
//! A chain of `n` nodes — Alice, Bob, and `n - 2` relays that measure each
//! incoming photon in a random basis and retransmit the measured state —
//! can establish an end-to-end key, but two obstacles appear as the chain
//! grows. First, per-hop photon loss starves downstream receivers below
//! their signal floor. Second, naive sifting keeps only the timeslots where
//! *every* node chose the same basis, a fraction that shrinks as
//! `1/2^(n-1)`.
//!
//! This crate simulates the chain and the two protocol adaptations that
//! remove both obstacles:
//!
//! * **Padding / delayed retransmission** ([`nodes`]): relays either fill
//!   empty timeslots with fresh random photons (recording which slots were
//!   padded) or buffer measured bits and retransmit them in bursts, so every
//!   hop runs at full rate and the receiver threshold is met regardless of
//!   distance.
//! * **Timeslot bridging** ([`sift`]): any slot where two adjacent nodes
//!   matched bases yields a *link token*; tokens from different slots are
//!   zipped into chains, and each relay publicly announces the XOR of its
//!   two token bits. The announcements telescope, Bob recovers Alice's bit,
//!   and the usable fraction returns to the two-party value of 1/2 —
//!   independent of the relay count. No bit value ever crosses the
//!   classical channel.
//!
//! [`analytics`] carries the exact counting formulas and the exhaustive
//! pattern-enumeration oracle that checks them; [`acceptance`] pins every
//! headline claim to an executable tolerance.
//!
//! # Quick start
//!
//! ```
//! use qkd_relay::config::RunConfig;
//! use qkd_relay::nodes::RelayMode;
//!
//! let config = RunConfig {
//!     n_nodes: 4,
//!     slots: 10_000,
//!     seed: 7,
//!     transmittance: vec![1.0; 3],
//!     mode: RelayMode::Naive,
//!     threshold: 0.0,
//!     eve_link: None,
//!     trace: false,
//!     out_dir: None,
//! };
//! let output = qkd_relay::run::run(&config);
//! assert_eq!(output.bridged_key.alice_bits(), output.bridged_key.bob_bits());
//! let fraction = output.summary.bridged_fraction.unwrap();
//! assert!((fraction - 0.5).abs() < 0.02);
//! ```
//!
//! The `examples/` directory walks through each capability; `cargo run
//! --example bridged_key` is a good starting point.

#![forbid(unsafe_code)]

pub mod acceptance;
pub mod analytics;
pub mod bb84;
pub mod channel;
pub mod config;
pub mod nodes;
pub mod report;
pub mod run;
pub mod sift;

pub use analytics::RunSummary;
pub use bb84::{Basis, Bit, PhotonState, RngStream};
pub use config::RunConfig;
pub use nodes::{RelayMode, SlotRecord, Topology};
pub use run::{run, RunOutput};
pub use sift::{KeyChain, LinkToken, SiftedKey};
