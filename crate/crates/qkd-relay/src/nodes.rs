//! Per-timeslot node behavior: Alice (source), relays (intercept/resend in
//! one of three modes), and Bob (detector).
//!
//! Each node produces one private [`SlotRecord`] per timeslot. A record has
//! two independent halves: what the node *detected* on its incoming link and
//! what it *emitted* on its outgoing link. For a pass-through relay the two
//! coincide (it retransmits the measured state in the measured basis); in
//! delay mode they decouple, because the emission in a slot replays a
//! measurement buffered in an earlier slot.

use std::collections::VecDeque;

use crate::bb84::{encode, measure, random_photon, Basis, Bit, PhotonState, RngStream};

/// A chain of `n_nodes` nodes: Alice, Bob, and `n_nodes - 2` relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    n_nodes: usize,
}

impl Topology {
    /// Panics if `n_nodes < 2`.
    pub fn new(n_nodes: usize) -> Topology {
        assert!(n_nodes >= 2, "a chain needs at least Alice and Bob");
        Topology { n_nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of hops (= links) in the chain.
    pub fn hops(&self) -> usize {
        self.n_nodes - 1
    }

    /// Node index of Bob, the final detector.
    pub fn bob(&self) -> usize {
        self.n_nodes - 1
    }

    /// Indices of the interior relay nodes.
    pub fn relays(&self) -> std::ops::Range<usize> {
        1..self.n_nodes - 1
    }
}

/// How a relay handles timeslots in which nothing arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayMode {
    /// Forward only what is received; empty slots stay empty.
    Naive,
    /// Fill empty slots with fresh random photons and record which slots
    /// were padded.
    Padding,
    /// Buffer measured bits and retransmit them in a contiguous burst once
    /// `batch_size` have accumulated, one per slot, oldest first.
    Delay { batch_size: usize },
}

/// Where an emitted photon's content came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Freshly sourced by Alice.
    Source,
    /// Re-transmission of a measured incoming photon.
    Received,
    /// Locally generated pad for an empty slot.
    Padded,
}

/// What a node measured on its incoming link in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub basis: Basis,
    pub bit: Bit,
}

/// What a node put on its outgoing link in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emission {
    pub basis: Basis,
    pub bit: Bit,
    pub origin: Origin,
    /// For delay-mode replays: the slot in which the re-emitted bit was
    /// originally measured. `None` means the emission belongs to this slot.
    pub resend_of: Option<u64>,
}

/// One node's private record for one timeslot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRecord {
    pub timeslot: u64,
    pub node: usize,
    /// `None` when no photon arrived (or the node is the source).
    pub detection: Option<Measurement>,
    /// `None` when nothing was sent (or the node is the final detector).
    pub emission: Option<Emission>,
}

impl SlotRecord {
    pub fn detected(&self) -> bool {
        self.detection.is_some()
    }

    pub fn emitted(&self) -> bool {
        self.emission.is_some()
    }
}

/// Minimum per-link detection rate for the link to count as viable.
///
/// Stands in for the receiver's signal-to-noise floor: below the threshold
/// there are not enough data points for the downstream hop to proceed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverModel {
    pub min_rate_threshold: f64,
}

impl ReceiverModel {
    /// Panics if the threshold is outside [0, 1].
    pub fn new(min_rate_threshold: f64) -> ReceiverModel {
        assert!(
            (0.0..=1.0).contains(&min_rate_threshold),
            "threshold must be in [0, 1], got {min_rate_threshold}"
        );
        ReceiverModel { min_rate_threshold }
    }
}

/// True iff `detection_rate` meets the receiver's threshold (inclusive).
pub fn link_viable(detection_rate: f64, model: &ReceiverModel) -> bool {
    debug_assert!((0.0..=1.0).contains(&detection_rate));
    detection_rate >= model.min_rate_threshold
}

/// Alice sources one photon: random basis, random bit.
pub fn alice_emit(timeslot: u64, rng: &mut RngStream) -> (PhotonState, SlotRecord) {
    let photon = random_photon(rng);
    let record = SlotRecord {
        timeslot,
        node: 0,
        detection: None,
        emission: Some(Emission {
            basis: photon.basis,
            bit: photon.bit,
            origin: Origin::Source,
            resend_of: None,
        }),
    };
    (photon, record)
}

/// Bob measures the incoming photon in a fresh random basis, or records an
/// empty slot.
pub fn bob_measure(
    node: usize,
    incoming: Option<PhotonState>,
    timeslot: u64,
    rng: &mut RngStream,
) -> SlotRecord {
    let detection = incoming.map(|photon| {
        let basis = rng.basis();
        let bit = measure(photon, basis, rng);
        Measurement { basis, bit }
    });
    SlotRecord {
        timeslot,
        node,
        detection,
        emission: None,
    }
}

#[derive(Debug, Clone, Copy)]
struct BufferedBit {
    origin_slot: u64,
    basis: Basis,
    bit: Bit,
}

/// An intercept/resend relay.
///
/// Every arriving photon is measured in a fresh random basis and the
/// measured state is retransmitted. The mode decides what happens in slots
/// where nothing arrives, and in delay mode, *when* retransmission happens.
#[derive(Debug, Clone)]
pub struct Relay {
    node: usize,
    mode: RelayMode,
    buffer: VecDeque<BufferedBit>,
    bursting: bool,
}

impl Relay {
    /// Panics on `Delay { batch_size: 0 }`.
    pub fn new(node: usize, mode: RelayMode) -> Relay {
        if let RelayMode::Delay { batch_size } = mode {
            assert!(batch_size >= 1, "delay batch size must be at least 1");
        }
        Relay {
            node,
            mode,
            buffer: VecDeque::new(),
            bursting: false,
        }
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn mode(&self) -> RelayMode {
        self.mode
    }

    /// Measured bits buffered but not yet retransmitted (delay mode).
    pub fn pending(&self) -> usize {
        self.buffer.len()
    }

    /// Process one timeslot: measure the incoming photon if any, then decide
    /// what (if anything) to emit downstream.
    pub fn process(
        &mut self,
        incoming: Option<PhotonState>,
        timeslot: u64,
        rng: &mut RngStream,
    ) -> (Option<PhotonState>, SlotRecord) {
        let detection = incoming.map(|photon| {
            let basis = rng.basis();
            let bit = measure(photon, basis, rng);
            Measurement { basis, bit }
        });

        let emission = match self.mode {
            RelayMode::Naive => detection.map(|m| Emission {
                basis: m.basis,
                bit: m.bit,
                origin: Origin::Received,
                resend_of: None,
            }),
            RelayMode::Padding => Some(match detection {
                Some(m) => Emission {
                    basis: m.basis,
                    bit: m.bit,
                    origin: Origin::Received,
                    resend_of: None,
                },
                None => {
                    let pad = random_photon(rng);
                    Emission {
                        basis: pad.basis,
                        bit: pad.bit,
                        origin: Origin::Padded,
                        resend_of: None,
                    }
                }
            }),
            RelayMode::Delay { batch_size } => {
                if let Some(m) = detection {
                    self.buffer.push_back(BufferedBit {
                        origin_slot: timeslot,
                        basis: m.basis,
                        bit: m.bit,
                    });
                }
                if !self.bursting && self.buffer.len() >= batch_size {
                    self.bursting = true;
                }
                if self.bursting {
                    let buffered = self.buffer.pop_front().expect("bursting implies non-empty");
                    if self.buffer.is_empty() {
                        self.bursting = false;
                    }
                    Some(Emission {
                        basis: buffered.basis,
                        bit: buffered.bit,
                        origin: Origin::Received,
                        resend_of: Some(buffered.origin_slot),
                    })
                } else {
                    None
                }
            }
        };

        let outgoing = emission.map(|e| encode(e.bit, e.basis));
        let record = SlotRecord {
            timeslot,
            node: self.node,
            detection,
            emission,
        };
        (outgoing, record)
    }
}
