//! Run orchestration: drive the slot-by-slot simulation, hand the records
//! to post-processing and analytics, and write the output documents.
//!
//! A run is a pure function of its [`RunConfig`]: every random draw comes
//! from a stream derived from the config's seed and a fixed label, so
//! identical configs produce byte-identical outputs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::analytics::{summarize, RunArtifacts, RunSummary};
use crate::bb84::{Bit, RngStream};
use crate::channel::{transmit, ChannelParams, Eavesdropper};
use crate::config::{expand_sweep, mode_tag, RunConfig, SweepAxes, SweepChild};
use crate::nodes::{alice_emit, bob_measure, ReceiverModel, Relay, SlotRecord, Topology};
use crate::report;
use crate::sift::{
    announcements_from_records, assemble_keys, build_tokens, chain_deltas, schedule_chains,
    Announcement, KeyChain, LinkToken, SiftedKey,
};

/// Everything a run produces, from raw records to the summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub records: Vec<SlotRecord>,
    pub announcements: Vec<Announcement>,
    pub tokens: Vec<Vec<LinkToken>>,
    pub chains: Vec<KeyChain>,
    pub deltas: Vec<Vec<Bit>>,
    pub naive_key: SiftedKey,
    pub bridged_key: SiftedKey,
    pub summary: RunSummary,
}

/// Simulate the quantum phase only: one record per node per timeslot.
pub fn simulate_records(config: &RunConfig) -> Vec<SlotRecord> {
    let topology = Topology::new(config.n_nodes);
    let seed = config.seed;

    let mut alice_rng = RngStream::new(seed, "alice");
    let mut bob_rng = RngStream::new(seed, "bob");
    let mut relay_rngs: Vec<RngStream> = topology
        .relays()
        .map(|node| RngStream::new(seed, &format!("relay:{node}")))
        .collect();
    let mut channel_rngs: Vec<RngStream> = (0..topology.hops())
        .map(|link| RngStream::new(seed, &format!("channel:{link}")))
        .collect();
    let mut eve = config.eve_link.map(|link| Eavesdropper::new(link, seed));
    let mut relays: Vec<Relay> = topology
        .relays()
        .map(|node| Relay::new(node, config.mode))
        .collect();
    let links: Vec<ChannelParams> = config
        .transmittance
        .iter()
        .map(|&xi| ChannelParams::new(xi))
        .collect();

    fn tap_for(eve: &mut Option<Eavesdropper>, link: usize) -> Option<&mut Eavesdropper> {
        eve.as_mut().filter(|e| e.link() == link)
    }

    let mut records = Vec::with_capacity(config.slots as usize * config.n_nodes);
    for t in 0..config.slots {
        let (photon, record) = alice_emit(t, &mut alice_rng);
        records.push(record);

        let mut flying = transmit(
            photon,
            &links[0],
            tap_for(&mut eve, 0),
            &mut channel_rngs[0],
        );

        for (idx, relay) in relays.iter_mut().enumerate() {
            let link = idx + 1;
            let (outgoing, record) = relay.process(flying, t, &mut relay_rngs[idx]);
            records.push(record);
            flying = outgoing.and_then(|p| {
                transmit(
                    p,
                    &links[link],
                    tap_for(&mut eve, link),
                    &mut channel_rngs[link],
                )
            });
        }

        records.push(bob_measure(topology.bob(), flying, t, &mut bob_rng));
    }
    records
}

/// Execute a full run: simulation, announcements, token building, chain
/// scheduling, relay announcements, key assembly, and summarization.
pub fn run(config: &RunConfig) -> RunOutput {
    let topology = Topology::new(config.n_nodes);
    let records = simulate_records(config);
    let announcements = announcements_from_records(&records);

    let tokens = build_tokens(&records, &announcements, &topology)
        .expect("simulator-produced records and announcements always align");
    let chains = schedule_chains(&tokens);
    let deltas: Vec<Vec<Bit>> = chains
        .iter()
        .enumerate()
        .map(|(i, chain)| chain_deltas(i, chain).expect("scheduled chains are well-formed"))
        .collect();
    let bridged_key = assemble_keys(&chains, &deltas);
    let naive_key = crate::sift::sift_naive(&records, &announcements, &topology)
        .expect("simulator-produced records and announcements always align");

    let summary = summarize(&RunArtifacts {
        topology,
        slots: config.slots,
        transmittance: &config.transmittance,
        receiver: ReceiverModel::new(config.threshold),
        records: &records,
        tokens: &tokens,
        chains: &chains,
        naive_key: &naive_key,
        bridged_key: &bridged_key,
    });

    RunOutput {
        config: config.clone(),
        records,
        announcements,
        tokens,
        chains,
        deltas,
        naive_key,
        bridged_key,
        summary,
    }
}

/// Render the summary document for a run.
pub fn summary_document(output: &RunOutput) -> String {
    report::render_summary(&output.config.run_id(), &output.config, &output.summary)
}

/// Paths written by [`persist`].
#[derive(Debug, Clone)]
pub struct WrittenPaths {
    pub summary: PathBuf,
    pub records: PathBuf,
    pub announcements: PathBuf,
    pub trace: Option<PathBuf>,
}

/// Write the run documents into `dir` (created if missing), using `prefix`
/// to keep sweep children apart.
pub fn persist(output: &RunOutput, dir: &Path, prefix: &str) -> io::Result<WrittenPaths> {
    fs::create_dir_all(dir)?;
    let run_id = output.config.run_id();
    let name = |suffix: &str| dir.join(format!("{prefix}{suffix}"));

    let summary = name("summary.txt");
    fs::write(&summary, summary_document(output))?;
    let records = name("records.txt");
    fs::write(
        &records,
        report::render_records(&run_id, &output.records, false),
    )?;
    let announcements = name("announcements.txt");
    fs::write(
        &announcements,
        report::render_announcements(&run_id, &output.announcements),
    )?;
    let trace = if output.config.trace {
        let path = name("trace.csv");
        fs::write(&path, report::render_trace(&output.records))?;
        Some(path)
    } else {
        None
    };
    Ok(WrittenPaths {
        summary,
        records,
        announcements,
        trace,
    })
}

/// One executed sweep child with its file prefix.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub child: SweepChild,
    pub prefix: String,
    pub output: RunOutput,
}

/// Expand and execute a sweep. Children are independent of each other.
pub fn run_sweep(base: &RunConfig, axes: &SweepAxes) -> Vec<SweepResult> {
    expand_sweep(base, axes)
        .into_iter()
        .map(|child| {
            let prefix = format!(
                "n{}-xi{}-{}-",
                child.config.n_nodes,
                format_xi(child.config.transmittance[0]),
                mode_tag(child.config.mode),
            );
            let output = run(&child.config);
            SweepResult {
                child,
                prefix,
                output,
            }
        })
        .collect()
}

fn format_xi(xi: f64) -> String {
    format!("{xi:.3}").replace('.', "p")
}

/// Render the sweep index: one line per child keyed by its axis values.
pub fn sweep_index(results: &[SweepResult]) -> String {
    let mut out = String::from("# qkd-relay sweep index v1\n");
    for r in results {
        out.push_str(&format!(
            "child={} n_nodes={} transmittance={:.6} mode={} seed={} prefix={}\n",
            r.child.index,
            r.child.config.n_nodes,
            r.child.config.transmittance[0],
            mode_tag(r.child.config.mode),
            r.child.config.seed,
            r.prefix,
        ));
    }
    out
}
