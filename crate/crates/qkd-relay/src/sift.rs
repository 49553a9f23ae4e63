//! Classical post-processing: basis announcements, per-link token
//! construction, chain scheduling across timeslots, relay XOR announcements,
//! and end-to-end key assembly.
//!
//! The naive sifting rule keeps only timeslots in which *every* node used
//! the same basis, which shrinks exponentially with chain length. Bridging
//! recovers the two-party rate: a slot where adjacent nodes happened to
//! match bases yields a *link token* on that link, tokens from different
//! timeslots are zipped into one chain per link-minimum, and each relay
//! publicly announces the XOR of its two adjacent token bits. Bob XORs the
//! announcements into his own token bit and lands on Alice's. No bit value
//! ever appears on the classical channel: announcements carry bases,
//! timeslots, and pad/replay structure only, and the relay announcements are
//! XORs of two bits the eavesdropper never sees.
//!
//! Everything in this module is a deterministic pure function of the run's
//! records and announcements; ordering is fixed by (link, timeslot).

use thiserror::Error;

use crate::bb84::{Basis, Bit};
use crate::nodes::{SlotRecord, Topology};

/// Errors from the sifting and bridging stage.
#[derive(Debug, Error)]
pub enum SiftError {
    #[error(
        "records cover slots 0..{records_slots} but announcements cover 0..{announcement_slots}"
    )]
    SlotRangeMismatch {
        records_slots: u64,
        announcement_slots: u64,
    },
    #[error("announcement at node {node}, slot {timeslot} has no matching record content")]
    MissingRecord { node: usize, timeslot: u64 },
    #[error("node index {node} outside the {n_nodes}-node topology")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("chain {chain} is malformed at link {link}: {reason}")]
    ChainIntegrity {
        chain: usize,
        link: usize,
        reason: String,
    },
    #[error("cannot estimate an error rate on an empty key")]
    EmptyKey,
    #[error("sample fraction must be in (0, 1], got {0}")]
    InvalidSampleFraction(f64),
}

/// Publicly announced per-slot structure: bases, pad flags, and replay
/// provenance. Carries no bit values by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Announcement {
    pub node: usize,
    pub timeslot: u64,
    /// Basis the node measured its incoming photon in, if one arrived.
    pub received: Option<Basis>,
    /// Basis of the photon the node put on its outgoing link, if any.
    pub emitted: Option<Basis>,
    /// The emission was a locally generated pad.
    pub padded: bool,
    /// The emission replays a measurement from this earlier slot.
    pub resend_of: Option<u64>,
}

/// Strip bit values out of private records, leaving the public transcript.
pub fn announcements_from_records(records: &[SlotRecord]) -> Vec<Announcement> {
    records
        .iter()
        .map(|r| Announcement {
            node: r.node,
            timeslot: r.timeslot,
            received: r.detection.map(|m| m.basis),
            emitted: r.emission.map(|e| e.basis),
            padded: r
                .emission
                .map(|e| e.origin == crate::nodes::Origin::Padded)
                .unwrap_or(false),
            resend_of: r.emission.and_then(|e| e.resend_of),
        })
        .collect()
}

/// A (link, timeslot) pair where adjacent nodes share a basis-matched,
/// detected bit: the currency of bridging.
///
/// Each endpoint holds its own copy of the bit privately; the two copies
/// agree unless an eavesdropper disturbed the hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkToken {
    pub link: usize,
    pub timeslot: u64,
    /// The bit as known to node `link` (what it emitted).
    pub upstream_bit: Bit,
    /// The bit as known to node `link + 1` (what it measured).
    pub downstream_bit: Bit,
}

/// One token per link plus, once announced, one XOR per interior relay;
/// yields one end-to-end key bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyChain {
    /// Exactly one token per link, indexed by link.
    pub tokens: Vec<LinkToken>,
}

/// How a key bit was established, for audit and reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeySource {
    /// Bridged chain: the (link, timeslot) of each token consumed.
    Chain(Vec<(usize, u64)>),
    /// Naive sifting: a single all-matching timeslot.
    Slot(u64),
}

/// Matching ordered bit strings held by Alice and Bob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiftedKey {
    alice: Vec<Bit>,
    bob: Vec<Bit>,
    sources: Vec<KeySource>,
    consumed: Vec<bool>,
}

impl SiftedKey {
    pub fn new(alice: Vec<Bit>, bob: Vec<Bit>, sources: Vec<KeySource>) -> SiftedKey {
        assert_eq!(alice.len(), bob.len(), "key strings must have equal length");
        assert_eq!(alice.len(), sources.len());
        let consumed = vec![false; alice.len()];
        SiftedKey {
            alice,
            bob,
            sources,
            consumed,
        }
    }

    pub fn empty() -> SiftedKey {
        SiftedKey::new(Vec::new(), Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    pub fn alice_bits(&self) -> &[Bit] {
        &self.alice
    }

    pub fn bob_bits(&self) -> &[Bit] {
        &self.bob
    }

    pub fn sources(&self) -> &[KeySource] {
        &self.sources
    }

    /// Positions sacrificed to error estimation.
    pub fn consumed(&self) -> &[bool] {
        &self.consumed
    }

    /// Disagreement rate over the full key, `None` when empty.
    pub fn disagreement(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let errors = self
            .alice
            .iter()
            .zip(&self.bob)
            .filter(|(a, b)| a != b)
            .count();
        Some(errors as f64 / self.len() as f64)
    }
}

fn max_slot(slots: impl Iterator<Item = u64>) -> Option<u64> {
    slots.max()
}

/// Dense (slot, node) index over announcements and record content.
struct SlotIndex<'a> {
    n_nodes: usize,
    slots: u64,
    announcements: Vec<Option<&'a Announcement>>,
    records: Vec<Option<&'a SlotRecord>>,
}

impl<'a> SlotIndex<'a> {
    fn build(
        records: &'a [SlotRecord],
        announcements: &'a [Announcement],
        topology: &Topology,
    ) -> Result<SlotIndex<'a>, SiftError> {
        let n = topology.n_nodes();
        let rec_max = max_slot(records.iter().map(|r| r.timeslot));
        let ann_max = max_slot(announcements.iter().map(|a| a.timeslot));
        let records_slots = rec_max.map_or(0, |m| m + 1);
        let announcement_slots = ann_max.map_or(0, |m| m + 1);
        if records_slots != announcement_slots {
            return Err(SiftError::SlotRangeMismatch {
                records_slots,
                announcement_slots,
            });
        }
        let slots = records_slots;
        let mut index = SlotIndex {
            n_nodes: n,
            slots,
            announcements: vec![None; (slots as usize) * n],
            records: vec![None; (slots as usize) * n],
        };
        for r in records {
            if r.node >= n {
                return Err(SiftError::NodeOutOfRange {
                    node: r.node,
                    n_nodes: n,
                });
            }
            let at = index.offset(r.node, r.timeslot);
            index.records[at] = Some(r);
        }
        for a in announcements {
            if a.node >= n {
                return Err(SiftError::NodeOutOfRange {
                    node: a.node,
                    n_nodes: n,
                });
            }
            let at = index.offset(a.node, a.timeslot);
            index.announcements[at] = Some(a);
        }
        Ok(index)
    }

    fn offset(&self, node: usize, timeslot: u64) -> usize {
        timeslot as usize * self.n_nodes + node
    }

    fn announcement(&self, node: usize, timeslot: u64) -> Option<&'a Announcement> {
        self.announcements[self.offset(node, timeslot)]
    }

    fn record(&self, node: usize, timeslot: u64) -> Option<&'a SlotRecord> {
        self.records[self.offset(node, timeslot)]
    }
}

/// Build per-link token lists, ordered by timeslot.
///
/// A token exists on link `i` at slot `t` iff node `i` announced an emission
/// at `t`, node `i + 1` announced a detection at `t`, and the two bases
/// match. Token existence is decided entirely by public announcements; the
/// private bits are then looked up in the records. A padded emission at node
/// `i` never has a detection behind it, so it breaks the upstream link
/// automatically while staying valid key material downstream.
pub fn build_tokens(
    records: &[SlotRecord],
    announcements: &[Announcement],
    topology: &Topology,
) -> Result<Vec<Vec<LinkToken>>, SiftError> {
    let index = SlotIndex::build(records, announcements, topology)?;
    let mut per_link: Vec<Vec<LinkToken>> = vec![Vec::new(); topology.hops()];

    for t in 0..index.slots {
        for (link, link_tokens) in per_link.iter_mut().enumerate() {
            let upstream = index.announcement(link, t);
            let downstream = index.announcement(link + 1, t);
            let (Some(up), Some(down)) = (upstream, downstream) else {
                continue;
            };
            let (Some(emit_basis), Some(recv_basis)) = (up.emitted, down.received) else {
                continue;
            };
            if emit_basis != recv_basis {
                continue;
            }
            let upstream_bit = index
                .record(link, t)
                .and_then(|r| r.emission)
                .map(|e| e.bit)
                .ok_or(SiftError::MissingRecord {
                    node: link,
                    timeslot: t,
                })?;
            let downstream_bit = index
                .record(link + 1, t)
                .and_then(|r| r.detection)
                .map(|m| m.bit)
                .ok_or(SiftError::MissingRecord {
                    node: link + 1,
                    timeslot: t,
                })?;
            link_tokens.push(LinkToken {
                link,
                timeslot: t,
                upstream_bit,
                downstream_bit,
            });
        }
    }
    Ok(per_link)
}

/// Zip per-link token queues, oldest first, into complete chains.
///
/// Produces exactly `min` over links of the token counts: each chain
/// consumes one token per link, so no scheduler can do better, and the FIFO
/// zip trivially achieves the bound. Chains are deterministic given the
/// token lists.
pub fn schedule_chains(tokens_per_link: &[Vec<LinkToken>]) -> Vec<KeyChain> {
    let chains = tokens_per_link.iter().map(Vec::len).min().unwrap_or(0);
    (0..chains)
        .map(|j| KeyChain {
            tokens: tokens_per_link.iter().map(|list| list[j]).collect(),
        })
        .collect()
}

/// Relay XOR announcements for one chain.
///
/// Relay `i + 1` privately holds the bit of the token on link `i` (it
/// measured it) and the bit of the token on link `i + 1` (it emitted it),
/// and publishes their XOR. The announcement stream is uniformly random to
/// anyone who does not hold one of the two bits.
pub fn chain_deltas(chain_index: usize, chain: &KeyChain) -> Result<Vec<Bit>, SiftError> {
    for (link, token) in chain.tokens.iter().enumerate() {
        if token.link != link {
            return Err(SiftError::ChainIntegrity {
                chain: chain_index,
                link,
                reason: format!("token is for link {}", token.link),
            });
        }
    }
    if chain.tokens.is_empty() {
        return Err(SiftError::ChainIntegrity {
            chain: chain_index,
            link: 0,
            reason: "chain has no tokens".to_string(),
        });
    }
    Ok(chain
        .tokens
        .windows(2)
        .map(|pair| pair[0].downstream_bit ^ pair[1].upstream_bit)
        .collect())
}

/// Assemble the end-to-end key from scheduled chains and their relay
/// announcements.
///
/// Alice's bit for a chain is her link-0 token bit; Bob's is his last-link
/// token bit XORed with every relay announcement in the chain. With honest
/// hops the XORs telescope and the two strings agree.
pub fn assemble_keys(chains: &[KeyChain], deltas: &[Vec<Bit>]) -> SiftedKey {
    assert_eq!(chains.len(), deltas.len(), "one delta vector per chain");
    let mut alice = Vec::with_capacity(chains.len());
    let mut bob = Vec::with_capacity(chains.len());
    let mut sources = Vec::with_capacity(chains.len());
    for (chain, chain_deltas) in chains.iter().zip(deltas) {
        let first = chain.tokens.first().expect("chains are never empty");
        let last = chain.tokens.last().expect("chains are never empty");
        alice.push(first.upstream_bit);
        let folded = chain_deltas
            .iter()
            .fold(last.downstream_bit, |acc, &d| acc ^ d);
        bob.push(folded);
        sources.push(KeySource::Chain(
            chain.tokens.iter().map(|t| (t.link, t.timeslot)).collect(),
        ));
    }
    SiftedKey::new(alice, bob, sources)
}

/// Baseline sifting: keep only timeslots in which every node announced the
/// same basis, every receiver detected, and every relay passed its
/// measurement straight through in the same slot.
pub fn sift_naive(
    records: &[SlotRecord],
    announcements: &[Announcement],
    topology: &Topology,
) -> Result<SiftedKey, SiftError> {
    let index = SlotIndex::build(records, announcements, topology)?;
    let n = topology.n_nodes();
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let mut sources = Vec::new();

    'slots: for t in 0..index.slots {
        let Some(source) = index.announcement(0, t) else {
            continue;
        };
        let Some(basis) = source.emitted else {
            continue;
        };
        for node in 1..n {
            let Some(ann) = index.announcement(node, t) else {
                continue 'slots;
            };
            if ann.received != Some(basis) {
                continue 'slots;
            }
            let interior = node < n - 1;
            if interior {
                // A same-slot pass-through: not padded, not a replay of some
                // other slot, same basis downstream.
                if ann.emitted != Some(basis) || ann.padded {
                    continue 'slots;
                }
                if ann.resend_of.is_some_and(|s| s != t) {
                    continue 'slots;
                }
            }
        }
        let alice_bit = index
            .record(0, t)
            .and_then(|r| r.emission)
            .map(|e| e.bit)
            .ok_or(SiftError::MissingRecord {
                node: 0,
                timeslot: t,
            })?;
        let bob_bit = index
            .record(n - 1, t)
            .and_then(|r| r.detection)
            .map(|m| m.bit)
            .ok_or(SiftError::MissingRecord {
                node: n - 1,
                timeslot: t,
            })?;
        alice.push(alice_bit);
        bob.push(bob_bit);
        sources.push(KeySource::Slot(t));
    }
    Ok(SiftedKey::new(alice, bob, sources))
}

/// Disagreement rate over a random sample of the key; sampled positions are
/// marked consumed and should be discarded from the key proper.
pub fn estimate_qber(
    key: &mut SiftedKey,
    sample_fraction: f64,
    rng: &mut crate::bb84::RngStream,
) -> Result<f64, SiftError> {
    if key.is_empty() {
        return Err(SiftError::EmptyKey);
    }
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(SiftError::InvalidSampleFraction(sample_fraction));
    }
    let len = key.len();
    let sample_size = ((len as f64 * sample_fraction).round() as usize).clamp(1, len);
    let positions = rand::seq::index::sample(rng, len, sample_size);
    let mut errors = 0usize;
    for i in positions {
        key.consumed[i] = true;
        if key.alice[i] != key.bob[i] {
            errors += 1;
        }
    }
    Ok(errors as f64 / sample_size as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bb84::RngStream;
    use crate::nodes::{Emission, Measurement, Origin};

    fn bit(v: u8) -> Bit {
        Bit(v != 0)
    }

    /// Hand-build the records for one timeslot of an n-node chain where
    /// every photon is delivered: `bases[i]`/`bits[i]` is what node i
    /// measured (i > 0) and, for i < n-1, also what it emitted.
    fn passthrough_slot(t: u64, bases: &[Basis], bits: &[u8]) -> Vec<SlotRecord> {
        let n = bases.len();
        (0..n)
            .map(|node| SlotRecord {
                timeslot: t,
                node,
                detection: (node > 0).then(|| Measurement {
                    basis: bases[node],
                    bit: bit(bits[node]),
                }),
                emission: (node < n - 1).then(|| Emission {
                    basis: bases[node],
                    bit: bit(bits[node]),
                    origin: if node == 0 {
                        Origin::Source
                    } else {
                        Origin::Received
                    },
                    resend_of: None,
                }),
            })
            .collect()
    }

    #[test]
    fn tokens_follow_the_coding_scheme_tables() {
        use Basis::{X, Y};
        let topology = Topology::new(4);

        // Bases X-X-Y-Y: adjacent matches on links 0 and 2 only.
        let records = passthrough_slot(0, &[X, X, Y, Y], &[1, 1, 0, 0]);
        let anns = announcements_from_records(&records);
        let tokens = build_tokens(&records, &anns, &topology).unwrap();
        assert_eq!(tokens[0].len(), 1);
        assert_eq!(tokens[1].len(), 0);
        assert_eq!(tokens[2].len(), 1);

        // Bases X-Y-Y-X: a token on link 1 only.
        let records = passthrough_slot(0, &[X, Y, Y, X], &[1, 0, 0, 1]);
        let anns = announcements_from_records(&records);
        let tokens = build_tokens(&records, &anns, &topology).unwrap();
        assert_eq!(tokens[0].len(), 0);
        assert_eq!(tokens[1].len(), 1);
        assert_eq!(tokens[2].len(), 0);
    }

    #[test]
    fn bridging_two_slots_recovers_alices_bit() {
        // Slot 0 uses bases X-X-Y-Y with bits 1,1,0,0; slot 1 uses
        // X-Y-Y-X with the relays both measuring 0. The link-1 gap in slot 0
        // is bridged by slot 1's matching relay bases. The relay XORs are
        // (1, 0) and Bob recovers 0 ^ 0 ^ 1 = 1, Alice's bit.
        use Basis::{X, Y};
        let topology = Topology::new(4);
        let mut records = passthrough_slot(0, &[X, X, Y, Y], &[1, 1, 0, 0]);
        records.extend(passthrough_slot(1, &[X, Y, Y, X], &[1, 0, 0, 1]));
        let anns = announcements_from_records(&records);
        let tokens = build_tokens(&records, &anns, &topology).unwrap();
        assert_eq!(
            tokens.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 1, 1]
        );
        let chains = schedule_chains(&tokens);
        assert_eq!(chains.len(), 1);
        let chain = &chains[0];
        assert_eq!(chain.tokens[0].timeslot, 0);
        assert_eq!(chain.tokens[1].timeslot, 1);
        assert_eq!(chain.tokens[2].timeslot, 0);

        let deltas = chain_deltas(0, chain).unwrap();
        assert_eq!(deltas, vec![bit(1), bit(0)]);

        let key = assemble_keys(&chains, &[deltas]);
        assert_eq!(key.alice_bits(), &[bit(1)]);
        assert_eq!(key.bob_bits(), &[bit(1)]);
    }

    #[test]
    fn delta_algebra_on_a_three_link_chain() {
        // Token bits (1, 0, 1) on links 0..2 give deltas (1, 1); Bob folds
        // 1 ^ 1 ^ 1 = 1 and meets Alice.
        let chain = KeyChain {
            tokens: vec![
                LinkToken {
                    link: 0,
                    timeslot: 3,
                    upstream_bit: bit(1),
                    downstream_bit: bit(1),
                },
                LinkToken {
                    link: 1,
                    timeslot: 5,
                    upstream_bit: bit(0),
                    downstream_bit: bit(0),
                },
                LinkToken {
                    link: 2,
                    timeslot: 4,
                    upstream_bit: bit(1),
                    downstream_bit: bit(1),
                },
            ],
        };
        let deltas = chain_deltas(0, &chain).unwrap();
        assert_eq!(deltas, vec![bit(1), bit(1)]);
        let key = assemble_keys(std::slice::from_ref(&chain), &[deltas]);
        assert_eq!(key.alice_bits(), key.bob_bits());
        assert_eq!(key.alice_bits(), &[bit(1)]);

        let zeros = KeyChain {
            tokens: (0..3)
                .map(|link| LinkToken {
                    link,
                    timeslot: link as u64,
                    upstream_bit: bit(0),
                    downstream_bit: bit(0),
                })
                .collect(),
        };
        let deltas = chain_deltas(0, &zeros).unwrap();
        assert_eq!(deltas, vec![bit(0), bit(0)]);
        let key = assemble_keys(std::slice::from_ref(&zeros), &[deltas]);
        assert_eq!(key.alice_bits(), &[bit(0)]);
        assert_eq!(key.bob_bits(), &[bit(0)]);
    }

    #[test]
    fn malformed_chain_is_an_integrity_error() {
        let chain = KeyChain {
            tokens: vec![
                LinkToken {
                    link: 1,
                    timeslot: 0,
                    upstream_bit: bit(0),
                    downstream_bit: bit(0),
                },
                LinkToken {
                    link: 1,
                    timeslot: 1,
                    upstream_bit: bit(0),
                    downstream_bit: bit(0),
                },
            ],
        };
        let err = chain_deltas(7, &chain).unwrap_err();
        assert!(matches!(
            err,
            SiftError::ChainIntegrity {
                chain: 7,
                link: 0,
                ..
            }
        ));
    }

    #[test]
    fn chain_count_is_min_over_links() {
        let t = |link: usize, slot: u64| LinkToken {
            link,
            timeslot: slot,
            upstream_bit: bit(0),
            downstream_bit: bit(0),
        };
        let tokens = vec![
            vec![t(0, 0), t(0, 1), t(0, 2)],
            vec![t(1, 0), t(1, 1), t(1, 2), t(1, 3), t(1, 4)],
            vec![t(2, 5), t(2, 6)],
        ];
        let chains = schedule_chains(&tokens);
        assert_eq!(chains.len(), 2);
        // FIFO: chain j takes token j of every link.
        assert_eq!(chains[1].tokens[2].timeslot, 6);
        // Every token consumed at most once.
        let mut seen = std::collections::HashSet::new();
        for chain in &chains {
            for token in &chain.tokens {
                assert!(seen.insert((token.link, token.timeslot)));
            }
        }
    }

    #[test]
    fn mismatched_slot_ranges_are_rejected() {
        use Basis::X;
        let topology = Topology::new(2);
        let records = passthrough_slot(0, &[X, X], &[1, 1]);
        let mut anns = announcements_from_records(&records);
        anns.push(Announcement {
            node: 0,
            timeslot: 9,
            received: None,
            emitted: Some(X),
            padded: false,
            resend_of: None,
        });
        let err = build_tokens(&records, &anns, &topology).unwrap_err();
        assert!(matches!(err, SiftError::SlotRangeMismatch { .. }));
    }

    #[test]
    fn naive_sifting_requires_unanimous_bases() {
        use Basis::{X, Y};
        let topology = Topology::new(3);
        let mut records = passthrough_slot(0, &[X, X, X], &[1, 1, 1]);
        records.extend(passthrough_slot(1, &[X, X, Y], &[0, 0, 1]));
        records.extend(passthrough_slot(2, &[Y, Y, Y], &[0, 0, 0]));
        let anns = announcements_from_records(&records);
        let key = sift_naive(&records, &anns, &topology).unwrap();
        assert_eq!(key.len(), 2);
        assert_eq!(key.alice_bits(), &[bit(1), bit(0)]);
        assert_eq!(key.bob_bits(), &[bit(1), bit(0)]);
        assert_eq!(key.sources(), &[KeySource::Slot(0), KeySource::Slot(2)]);
    }

    #[test]
    fn qber_estimate_on_identical_and_complementary_keys() {
        let mut rng = RngStream::new(1, "qber");
        let ones = vec![bit(1); 64];
        let zeros = vec![bit(0); 64];
        let sources = vec![KeySource::Slot(0); 64];

        let mut same = SiftedKey::new(ones.clone(), ones.clone(), sources.clone());
        assert_eq!(estimate_qber(&mut same, 1.0, &mut rng).unwrap(), 0.0);
        assert!(same.consumed().iter().all(|&c| c));

        let mut opposite = SiftedKey::new(ones, zeros, sources);
        assert_eq!(estimate_qber(&mut opposite, 1.0, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn qber_estimate_rejects_bad_inputs() {
        let mut rng = RngStream::new(2, "qber");
        let mut empty = SiftedKey::empty();
        assert!(matches!(
            estimate_qber(&mut empty, 0.5, &mut rng),
            Err(SiftError::EmptyKey)
        ));
        let mut key = SiftedKey::new(vec![bit(0)], vec![bit(0)], vec![KeySource::Slot(0)]);
        assert!(matches!(
            estimate_qber(&mut key, 0.0, &mut rng),
            Err(SiftError::InvalidSampleFraction(_))
        ));
        assert!(matches!(
            estimate_qber(&mut key, 1.5, &mut rng),
            Err(SiftError::InvalidSampleFraction(_))
        ));
    }

    #[test]
    fn qber_sample_fraction_consumes_the_right_count() {
        let mut rng = RngStream::new(3, "qber");
        let n = 200;
        let bits = vec![bit(0); n];
        let sources = vec![KeySource::Slot(0); n];
        let mut key = SiftedKey::new(bits.clone(), bits, sources);
        estimate_qber(&mut key, 0.25, &mut rng).unwrap();
        assert_eq!(key.consumed().iter().filter(|&&c| c).count(), 50);
    }

    #[test]
    fn empty_token_lists_yield_empty_keys() {
        let chains = schedule_chains(&[Vec::new(), Vec::new()]);
        assert!(chains.is_empty());
        let key = assemble_keys(&chains, &[]);
        assert!(key.is_empty());
        assert_eq!(key.disagreement(), None);
    }

    #[test]
    fn padded_emission_breaks_upstream_link_only() {
        use Basis::X;
        let topology = Topology::new(3);
        // Slot where the photon is lost on hop 0: the relay pads, Bob
        // happens to match the pad's basis.
        let records = vec![
            SlotRecord {
                timeslot: 0,
                node: 0,
                detection: None,
                emission: Some(Emission {
                    basis: X,
                    bit: bit(1),
                    origin: Origin::Source,
                    resend_of: None,
                }),
            },
            SlotRecord {
                timeslot: 0,
                node: 1,
                detection: None,
                emission: Some(Emission {
                    basis: X,
                    bit: bit(0),
                    origin: Origin::Padded,
                    resend_of: None,
                }),
            },
            SlotRecord {
                timeslot: 0,
                node: 2,
                detection: Some(Measurement {
                    basis: X,
                    bit: bit(0),
                }),
                emission: None,
            },
        ];
        let anns = announcements_from_records(&records);
        assert!(anns.iter().any(|a| a.padded));
        let tokens = build_tokens(&records, &anns, &topology).unwrap();
        assert_eq!(
            tokens[0].len(),
            0,
            "no token across the padded node's upstream link"
        );
        assert_eq!(tokens[1].len(), 1, "pad is valid key material downstream");
    }
}
