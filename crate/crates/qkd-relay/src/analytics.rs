//! Closed-form counting formulas, exhaustive enumeration oracles, and the
//! empirical statistics that confront them.
//!
//! Closed forms are exact rationals; floating point appears only in
//! empirical estimates. The enumeration oracle iterates every equiprobable
//! basis pattern of an n-node chain and classifies it independently of the
//! formulas, so the two routes check each other.

use num_rational::Ratio;
use thiserror::Error;

use crate::bb84::Basis;
use crate::nodes::{link_viable, Origin, ReceiverModel, SlotRecord, Topology};
use crate::sift::{KeyChain, LinkToken, SiftedKey};

/// Largest chain the pattern enumerator accepts (4096 patterns).
pub const MAX_ENUMERATION_NODES: usize = 12;

/// Largest chain the closed forms accept without overflowing `u64`.
pub const MAX_CLOSED_FORM_NODES: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("node count {n} outside supported range {min}..={max}")]
    NodeCountOutOfRange { n: usize, min: usize, max: usize },
}

fn check_nodes(n: usize, max: usize) -> Result<(), AnalyticsError> {
    if n < 2 || n > max {
        return Err(AnalyticsError::NodeCountOutOfRange { n, min: 2, max });
    }
    Ok(())
}

/// Fraction of timeslots that yield a key between at least one node pair in
/// an n-node chain: `1 - 1/2^(n-1)`, exactly.
pub fn useful_fraction(n: usize) -> Result<Ratio<u64>, AnalyticsError> {
    check_nodes(n, MAX_CLOSED_FORM_NODES)?;
    let denom = 1u64 << (n - 1);
    Ok(Ratio::new(denom - 1, denom))
}

/// Fraction of timeslots usable for an end-to-end key under naive sifting:
/// `1/2^(n-1)`, exactly.
pub fn naive_end_to_end_fraction(n: usize) -> Result<Ratio<u64>, AnalyticsError> {
    check_nodes(n, MAX_CLOSED_FORM_NODES)?;
    let denom = 1u64 << (n - 1);
    Ok(Ratio::new(1, denom))
}

/// Expected fraction of timeslots in which the final detector receives a
/// photon whose provenance chain reaches the source: transmittance^hops.
pub fn origin_fraction(transmittance: f64, hops: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&transmittance));
    debug_assert!(hops >= 1);
    transmittance.powi(hops as i32)
}

/// Classification of one basis pattern over the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternOutcome {
    /// Basis per node, Alice first.
    pub bases: Vec<Basis>,
    /// Maximal runs of equal bases spanning at least two nodes, as
    /// inclusive (start, end) node index pairs: each run is a set of nodes
    /// that can establish a key among themselves.
    pub key_runs: Vec<(usize, usize)>,
    /// The endpoints share a key opportunity (all bases equal).
    pub end_to_end: bool,
}

impl PatternOutcome {
    /// At least one pair of nodes can establish a key.
    pub fn useful(&self) -> bool {
        !self.key_runs.is_empty()
    }
}

/// Exhaustive classification of all `2^n` basis patterns.
#[derive(Debug, Clone)]
pub struct PatternTable {
    pub outcomes: Vec<PatternOutcome>,
}

impl PatternTable {
    pub fn total(&self) -> u64 {
        self.outcomes.len() as u64
    }

    /// Exact fraction of patterns with at least one key opportunity.
    pub fn useful_fraction(&self) -> Ratio<u64> {
        let useful = self.outcomes.iter().filter(|o| o.useful()).count() as u64;
        Ratio::new(useful, self.total())
    }

    /// Exact fraction of patterns where the endpoints share a key.
    pub fn end_to_end_fraction(&self) -> Ratio<u64> {
        let usable = self.outcomes.iter().filter(|o| o.end_to_end).count() as u64;
        Ratio::new(usable, self.total())
    }

    /// Patterns offering no key opportunity at all.
    pub fn no_key_patterns(&self) -> Vec<&PatternOutcome> {
        self.outcomes.iter().filter(|o| !o.useful()).collect()
    }
}

fn classify(bases: Vec<Basis>) -> PatternOutcome {
    let n = bases.len();
    let mut key_runs = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || bases[i] != bases[start] {
            if i - start >= 2 {
                key_runs.push((start, i - 1));
            }
            start = i;
        }
    }
    let end_to_end = key_runs.first().is_some_and(|&(s, e)| s == 0 && e == n - 1);
    PatternOutcome {
        bases,
        key_runs,
        end_to_end,
    }
}

/// Iterate all `2^n` equiprobable basis patterns of an n-node chain and
/// classify each one. `n` is capped at [`MAX_ENUMERATION_NODES`].
pub fn enumerate_patterns(n: usize) -> Result<PatternTable, AnalyticsError> {
    check_nodes(n, MAX_ENUMERATION_NODES)?;
    let outcomes = (0u32..1 << n)
        .map(|code| {
            let bases: Vec<Basis> = (0..n)
                .map(|node| {
                    if code >> (n - 1 - node) & 1 == 0 {
                        Basis::X
                    } else {
                        Basis::Y
                    }
                })
                .collect();
            classify(bases)
        })
        .collect();
    Ok(PatternTable { outcomes })
}

/// Aggregate statistics for one completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub n_nodes: usize,
    pub slots: u64,
    /// Fraction of slots in which the downstream node of each link detected
    /// a photon; absent for an empty run.
    pub link_detection_rate: Vec<Option<f64>>,
    /// Token count per link.
    pub link_tokens: Vec<u64>,
    /// Per-link viability verdict against the receiver threshold.
    pub link_viable: Vec<Option<bool>>,
    /// Naive-sifted key bits per slot.
    pub naive_fraction: Option<f64>,
    /// Bridged chains per slot.
    pub bridged_fraction: Option<f64>,
    /// Observed fraction of slots with a source-originated detection at the
    /// final node.
    pub origin_fraction: Option<f64>,
    /// Model prediction for the same quantity: product of per-hop
    /// transmittances.
    pub origin_fraction_expected: f64,
    /// Full-key disagreement between the assembled end-to-end strings.
    pub qber: Option<f64>,
}

/// Everything `summarize` needs from a finished run.
pub struct RunArtifacts<'a> {
    pub topology: Topology,
    pub slots: u64,
    /// Per-hop transmittance, length = hops.
    pub transmittance: &'a [f64],
    pub receiver: ReceiverModel,
    pub records: &'a [SlotRecord],
    pub tokens: &'a [Vec<LinkToken>],
    pub chains: &'a [KeyChain],
    pub naive_key: &'a SiftedKey,
    pub bridged_key: &'a SiftedKey,
}

/// Walk a detection at `node` in slot `t` back through emissions and
/// delay-mode replays; true iff the photon content originated at node 0.
fn reaches_source(records: &RecordGrid, node: usize, t: u64) -> bool {
    let mut node = node;
    let mut slot = t;
    loop {
        // The photon detected at (node, slot) was emitted by node-1 in the
        // same slot.
        let upstream = node - 1;
        let Some(emission) = records.get(upstream, slot).and_then(|r| r.emission) else {
            return false;
        };
        match emission.origin {
            Origin::Source => return true,
            Origin::Padded => return false,
            Origin::Received => {
                // Content came from what node-1 measured, possibly in an
                // earlier slot.
                slot = emission.resend_of.unwrap_or(slot);
                node = upstream;
                if node == 0 {
                    return false;
                }
            }
        }
    }
}

struct RecordGrid<'a> {
    n_nodes: usize,
    slots: u64,
    grid: Vec<Option<&'a SlotRecord>>,
}

impl<'a> RecordGrid<'a> {
    fn build(records: &'a [SlotRecord], n_nodes: usize, slots: u64) -> RecordGrid<'a> {
        let mut grid = vec![None; slots as usize * n_nodes];
        for r in records {
            if r.node < n_nodes && r.timeslot < slots {
                grid[r.timeslot as usize * n_nodes + r.node] = Some(r);
            }
        }
        RecordGrid {
            n_nodes,
            slots,
            grid,
        }
    }

    fn get(&self, node: usize, timeslot: u64) -> Option<&'a SlotRecord> {
        if timeslot >= self.slots {
            return None;
        }
        self.grid[timeslot as usize * self.n_nodes + node]
    }
}

/// Populate a [`RunSummary`] from run artifacts. Deterministic.
pub fn summarize(artifacts: &RunArtifacts<'_>) -> RunSummary {
    let n = artifacts.topology.n_nodes();
    let hops = artifacts.topology.hops();
    let slots = artifacts.slots;
    let grid = RecordGrid::build(artifacts.records, n, slots);

    let mut detections = vec![0u64; hops];
    let mut source_detections_at_bob = 0u64;
    for t in 0..slots {
        for (link, count) in detections.iter_mut().enumerate() {
            let receiver = link + 1;
            if grid.get(receiver, t).is_some_and(SlotRecord::detected) {
                *count += 1;
                if receiver == n - 1 && reaches_source(&grid, receiver, t) {
                    source_detections_at_bob += 1;
                }
            }
        }
    }

    let rate = |count: u64| (slots > 0).then(|| count as f64 / slots as f64);
    let link_detection_rate: Vec<Option<f64>> = detections.iter().map(|&d| rate(d)).collect();
    let link_viable = link_detection_rate
        .iter()
        .map(|r| r.map(|rate| link_viable(rate, &artifacts.receiver)))
        .collect();

    let expected: f64 = artifacts.transmittance.iter().product();

    RunSummary {
        n_nodes: n,
        slots,
        link_detection_rate,
        link_tokens: artifacts.tokens.iter().map(|l| l.len() as u64).collect(),
        link_viable,
        naive_fraction: rate(artifacts.naive_key.len() as u64),
        bridged_fraction: rate(artifacts.chains.len() as u64),
        origin_fraction: rate(source_detections_at_bob),
        origin_fraction_expected: expected,
        qber: artifacts.bridged_key.disagreement(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Basis::{X, Y};

    fn ratio(num: u64, den: u64) -> Ratio<u64> {
        Ratio::new(num, den)
    }

    #[test]
    fn closed_forms_match_the_known_values() {
        assert_eq!(useful_fraction(2).unwrap(), ratio(1, 2));
        assert_eq!(useful_fraction(3).unwrap(), ratio(3, 4));
        assert_eq!(useful_fraction(5).unwrap(), ratio(15, 16));
        assert_eq!(naive_end_to_end_fraction(2).unwrap(), ratio(1, 2));
        assert_eq!(naive_end_to_end_fraction(3).unwrap(), ratio(1, 4));
        assert_eq!(naive_end_to_end_fraction(6).unwrap(), ratio(1, 32));
    }

    #[test]
    fn closed_forms_reject_degenerate_chains() {
        assert!(useful_fraction(1).is_err());
        assert!(naive_end_to_end_fraction(0).is_err());
        assert!(useful_fraction(65).is_err());
    }

    #[test]
    fn enumeration_agrees_with_closed_forms_exactly() {
        for n in 2..=MAX_ENUMERATION_NODES {
            let table = enumerate_patterns(n).unwrap();
            assert_eq!(table.total(), 1 << n);
            assert_eq!(
                table.useful_fraction(),
                useful_fraction(n).unwrap(),
                "n = {n}"
            );
            assert_eq!(
                table.end_to_end_fraction(),
                naive_end_to_end_fraction(n).unwrap(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn only_alternating_patterns_yield_no_key() {
        for n in 2..=8 {
            let table = enumerate_patterns(n).unwrap();
            let no_key = table.no_key_patterns();
            assert_eq!(no_key.len(), 2, "n = {n}");
            for outcome in no_key {
                for pair in outcome.bases.windows(2) {
                    assert_ne!(pair[0], pair[1], "no-key pattern must alternate");
                }
            }
        }
    }

    #[test]
    fn three_node_table_reproduces_all_eight_rows() {
        let table = enumerate_patterns(3).unwrap();
        type PatternRow = (Vec<Basis>, Vec<(usize, usize)>);
        let expected: Vec<PatternRow> = vec![
            (vec![X, X, X], vec![(0, 2)]),
            (vec![X, X, Y], vec![(0, 1)]),
            (vec![X, Y, X], vec![]),
            (vec![X, Y, Y], vec![(1, 2)]),
            (vec![Y, X, X], vec![(1, 2)]),
            (vec![Y, X, Y], vec![]),
            (vec![Y, Y, X], vec![(0, 1)]),
            (vec![Y, Y, Y], vec![(0, 2)]),
        ];
        assert_eq!(table.outcomes.len(), expected.len());
        for (outcome, (bases, runs)) in table.outcomes.iter().zip(&expected) {
            assert_eq!(&outcome.bases, bases);
            assert_eq!(&outcome.key_runs, runs, "pattern {bases:?}");
            assert_eq!(outcome.end_to_end, runs == &[(0, 2)]);
        }
    }

    #[test]
    fn four_node_bridgeable_patterns() {
        // Every pattern except the two alternating ones leaves at least one
        // adjacent pair matched somewhere.
        let table = enumerate_patterns(4).unwrap();
        let no_key: Vec<Vec<Basis>> = table
            .no_key_patterns()
            .iter()
            .map(|o| o.bases.clone())
            .collect();
        assert_eq!(no_key, vec![vec![X, Y, X, Y], vec![Y, X, Y, X]]);
    }

    #[test]
    fn origin_fraction_closed_form() {
        assert_eq!(origin_fraction(1.0, 5), 1.0);
        assert_eq!(origin_fraction(0.7, 1), 0.7);
        assert!((origin_fraction(0.5, 2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn enumeration_bounds() {
        assert!(enumerate_patterns(1).is_err());
        assert!(enumerate_patterns(13).is_err());
        assert!(enumerate_patterns(12).is_ok());
    }

    #[test]
    fn empty_run_reports_absent_fractions() {
        let empty_key = SiftedKey::empty();
        let summary = summarize(&RunArtifacts {
            topology: Topology::new(3),
            slots: 0,
            transmittance: &[0.5, 0.5],
            receiver: ReceiverModel::new(0.3),
            records: &[],
            tokens: &[Vec::new(), Vec::new()],
            chains: &[],
            naive_key: &empty_key,
            bridged_key: &empty_key,
        });
        assert_eq!(summary.slots, 0);
        assert_eq!(summary.link_tokens, vec![0, 0]);
        assert_eq!(summary.link_detection_rate, vec![None, None]);
        assert_eq!(summary.link_viable, vec![None, None]);
        assert_eq!(summary.naive_fraction, None);
        assert_eq!(summary.bridged_fraction, None);
        assert_eq!(summary.origin_fraction, None);
        assert_eq!(summary.qber, None);
    }
}
