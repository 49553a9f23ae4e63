//! Run configuration: the TOML file schema, flag overrides, validation, and
//! deterministic sweep expansion.
//!
//! A config file mirrors [`RunConfig`] with these keys (`n_nodes`, `slots`,
//! and `seed` are required; the rest default as noted):
//!
//! ```toml
//! n_nodes = 3
//! slots = 100000
//! seed = 7
//! transmittance = 1.0      # scalar, or per-hop list like [0.9, 0.8]
//! mode = "naive"           # "naive" | "padding" | "delay"
//! batch_size = 4           # delay mode only, >= 1
//! threshold = 0.0          # receiver viability threshold in [0, 1]
//! eve_link = 0             # optional: tap this link
//! trace = false            # emit the per-slot CSV trace
//! out_dir = "out"          # optional output directory
//!
//! [sweep]                  # optional experiment axes
//! n_nodes = [3, 4, 5]
//! transmittance = [1.0, 0.5]
//! mode = ["naive", "padding"]
//! ```
//!
//! Unknown keys are rejected. Command-line flags override file values.
//!
//! Sweep children derive their seeds from the master seed and the child's
//! own axis *values* (not positions): the sub-seed is the first eight
//! little-endian bytes of `SHA-256("qkd-relay.sweep" || seed || n_nodes ||
//! transmittance_bits || mode_tag || batch_size)`. Removing one axis value
//! therefore never changes any other child's output.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::nodes::RelayMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing required field `{0}` (set it in the file or pass the flag)")]
    Missing(&'static str),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// A fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_nodes: usize,
    pub slots: u64,
    pub seed: u64,
    /// Per-hop transmittance; length equals `n_nodes - 1`.
    pub transmittance: Vec<f64>,
    pub mode: RelayMode,
    /// Receiver viability threshold in [0, 1].
    pub threshold: f64,
    /// Link tapped by the intercept/resend eavesdropper, if any.
    pub eve_link: Option<usize>,
    pub trace: bool,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn hops(&self) -> usize {
        self.n_nodes - 1
    }

    /// Stable run identifier used in output documents and file names.
    pub fn run_id(&self) -> String {
        format!("n{}-s{}-seed{}", self.n_nodes, self.slots, self.seed)
    }
}

/// Sweep axes; each axis defaults to the base config's single value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    pub n_nodes: Option<Vec<usize>>,
    pub transmittance: Option<Vec<f64>>,
    pub mode: Option<Vec<RelayMode>>,
}

/// One expanded sweep child.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepChild {
    pub index: usize,
    pub config: RunConfig,
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_nodes: Option<usize>,
    pub slots: Option<u64>,
    pub seed: Option<u64>,
    pub transmittance: Option<Vec<f64>>,
    pub mode: Option<ModeName>,
    pub batch_size: Option<usize>,
    pub threshold: Option<f64>,
    pub eve_link: Option<usize>,
    pub trace: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

/// Relay mode as named in config files and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeName {
    Naive,
    Padding,
    Delay,
}

impl ModeName {
    fn parse(s: &str) -> Result<ModeName, ConfigError> {
        match s {
            "naive" => Ok(ModeName::Naive),
            "padding" => Ok(ModeName::Padding),
            "delay" => Ok(ModeName::Delay),
            other => Err(ConfigError::Invalid {
                field: "mode",
                reason: format!("unknown mode {other:?}; expected naive, padding, or delay"),
            }),
        }
    }

    fn with_batch(self, batch_size: usize) -> RelayMode {
        match self {
            ModeName::Naive => RelayMode::Naive,
            ModeName::Padding => RelayMode::Padding,
            ModeName::Delay => RelayMode::Delay { batch_size },
        }
    }
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeName::Naive => write!(f, "naive"),
            ModeName::Padding => write!(f, "padding"),
            ModeName::Delay => write!(f, "delay"),
        }
    }
}

/// Short stable tag for file names and seed derivation.
pub fn mode_tag(mode: RelayMode) -> String {
    match mode {
        RelayMode::Naive => "naive".to_string(),
        RelayMode::Padding => "padding".to_string(),
        RelayMode::Delay { batch_size } => format!("delay{batch_size}"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTransmittance {
    Scalar(f64),
    PerHop(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_nodes: Option<usize>,
    slots: Option<u64>,
    seed: Option<u64>,
    transmittance: Option<RawTransmittance>,
    mode: Option<String>,
    batch_size: Option<usize>,
    threshold: Option<f64>,
    eve_link: Option<usize>,
    trace: Option<bool>,
    out_dir: Option<PathBuf>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_nodes: Option<Vec<usize>>,
    transmittance: Option<Vec<f64>>,
    mode: Option<Vec<String>>,
}

/// A parsed configuration: the base run plus optional sweep axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub run: RunConfig,
    pub sweep: Option<SweepAxes>,
}

/// Load and validate a configuration from an optional file plus overrides.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<ParsedConfig, ConfigError> {
    let raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            toml::from_str::<RawConfig>(&text)?
        }
        None => RawConfig::default(),
    };

    let n_nodes = overrides
        .n_nodes
        .or(raw.n_nodes)
        .ok_or(ConfigError::Missing("n_nodes"))?;
    if n_nodes < 2 {
        return Err(ConfigError::Invalid {
            field: "n_nodes",
            reason: format!("need at least Alice and Bob, got {n_nodes}"),
        });
    }
    let slots = overrides
        .slots
        .or(raw.slots)
        .ok_or(ConfigError::Missing("slots"))?;
    if slots == 0 {
        return Err(ConfigError::Invalid {
            field: "slots",
            reason: "must be at least 1".to_string(),
        });
    }
    let seed = overrides
        .seed
        .or(raw.seed)
        .ok_or(ConfigError::Missing("seed"))?;

    let hops = n_nodes - 1;
    let transmittance = match (&overrides.transmittance, raw.transmittance) {
        (Some(list), _) => normalize_transmittance(list.clone(), hops)?,
        (None, Some(RawTransmittance::Scalar(x))) => normalize_transmittance(vec![x], hops)?,
        (None, Some(RawTransmittance::PerHop(list))) => normalize_transmittance(list, hops)?,
        (None, None) => vec![1.0; hops],
    };

    let mode_name = match (&overrides.mode, raw.mode.as_deref()) {
        (Some(m), _) => *m,
        (None, Some(s)) => ModeName::parse(s)?,
        (None, None) => ModeName::Naive,
    };
    let batch_size = overrides.batch_size.or(raw.batch_size).unwrap_or(1);
    if batch_size == 0 {
        return Err(ConfigError::Invalid {
            field: "batch_size",
            reason: "must be at least 1".to_string(),
        });
    }
    let mode = mode_name.with_batch(batch_size);

    let threshold = overrides.threshold.or(raw.threshold).unwrap_or(0.0);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ConfigError::Invalid {
            field: "threshold",
            reason: format!("must be in [0, 1], got {threshold}"),
        });
    }

    let eve_link = overrides.eve_link.or(raw.eve_link);
    if let Some(link) = eve_link {
        if link >= hops {
            return Err(ConfigError::Invalid {
                field: "eve_link",
                reason: format!("link {link} does not exist; the chain has links 0..{hops}"),
            });
        }
    }

    let run = RunConfig {
        n_nodes,
        slots,
        seed,
        transmittance,
        mode,
        threshold,
        eve_link,
        trace: overrides.trace.or(raw.trace).unwrap_or(false),
        out_dir: overrides.out_dir.clone().or(raw.out_dir),
    };

    let sweep = match raw.sweep {
        None => None,
        Some(raw_sweep) => Some(validate_sweep(raw_sweep, &run)?),
    };

    Ok(ParsedConfig { run, sweep })
}

fn normalize_transmittance(list: Vec<f64>, hops: usize) -> Result<Vec<f64>, ConfigError> {
    let per_hop = if list.len() == 1 {
        vec![list[0]; hops]
    } else if list.len() == hops {
        list
    } else {
        return Err(ConfigError::Invalid {
            field: "transmittance",
            reason: format!(
                "per-hop list has {} entries but the chain has {hops} hops",
                list.len()
            ),
        });
    };
    for &x in &per_hop {
        if !(0.0..=1.0).contains(&x) {
            return Err(ConfigError::Invalid {
                field: "transmittance",
                reason: format!("every value must be in [0, 1], got {x}"),
            });
        }
    }
    Ok(per_hop)
}

fn validate_sweep(raw: RawSweep, base: &RunConfig) -> Result<SweepAxes, ConfigError> {
    if raw.n_nodes.is_some() && base.transmittance.windows(2).any(|w| w[0] != w[1]) {
        return Err(ConfigError::Invalid {
            field: "sweep.n_nodes",
            reason: "cannot sweep the node count with a per-hop transmittance list".to_string(),
        });
    }
    if let Some(ns) = &raw.n_nodes {
        if ns.is_empty() || ns.iter().any(|&n| n < 2) {
            return Err(ConfigError::Invalid {
                field: "sweep.n_nodes",
                reason: "need a non-empty list of values >= 2".to_string(),
            });
        }
    }
    if let Some(xs) = &raw.transmittance {
        if xs.is_empty() || xs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(ConfigError::Invalid {
                field: "sweep.transmittance",
                reason: "need a non-empty list of values in [0, 1]".to_string(),
            });
        }
    }
    let mode = match raw.mode {
        None => None,
        Some(names) => {
            if names.is_empty() {
                return Err(ConfigError::Invalid {
                    field: "sweep.mode",
                    reason: "need a non-empty list".to_string(),
                });
            }
            let batch = match base.mode {
                crate::nodes::RelayMode::Delay { batch_size } => batch_size,
                _ => 1,
            };
            let mut modes = Vec::with_capacity(names.len());
            for name in &names {
                modes.push(ModeName::parse(name)?.with_batch(batch));
            }
            Some(modes)
        }
    };
    Ok(SweepAxes {
        n_nodes: raw.n_nodes,
        transmittance: raw.transmittance,
        mode,
    })
}

/// Derive a sweep child's seed from the master seed and the child's own
/// axis values, so children are independent of each other.
pub fn derive_child_seed(
    master: u64,
    n_nodes: usize,
    transmittance: &[f64],
    mode: RelayMode,
) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"qkd-relay.sweep");
    hasher.update(master.to_le_bytes());
    hasher.update((n_nodes as u64).to_le_bytes());
    for &x in transmittance {
        hasher.update(x.to_bits().to_le_bytes());
    }
    match mode {
        RelayMode::Naive => hasher.update([0u8]),
        RelayMode::Padding => hasher.update([1u8]),
        RelayMode::Delay { batch_size } => {
            hasher.update([2u8]);
            hasher.update((batch_size as u64).to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Expand sweep axes into the cartesian product of child configs.
pub fn expand_sweep(base: &RunConfig, axes: &SweepAxes) -> Vec<SweepChild> {
    let n_values = axes.n_nodes.clone().unwrap_or_else(|| vec![base.n_nodes]);
    let xi_values = axes
        .transmittance
        .clone()
        .unwrap_or_else(|| vec![base.transmittance[0]]);
    let mode_values = axes.mode.clone().unwrap_or_else(|| vec![base.mode]);

    let mut children = Vec::new();
    for &n in &n_values {
        for &xi in &xi_values {
            for &mode in &mode_values {
                let transmittance = vec![xi; n - 1];
                let seed = derive_child_seed(base.seed, n, &transmittance, mode);
                children.push(SweepChild {
                    index: children.len(),
                    config: RunConfig {
                        n_nodes: n,
                        slots: base.slots,
                        seed,
                        transmittance,
                        mode,
                        threshold: base.threshold,
                        eve_link: base.eve_link,
                        trace: base.trace,
                        out_dir: base.out_dir.clone(),
                    },
                });
            }
        }
    }
    children
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        file
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let file = write_config("n_nodes = 3\nslots = 1000\nseed = 7\n");
        let parsed = parse_config(Some(file.path()), &Overrides::default()).unwrap();
        let run = parsed.run;
        assert_eq!(run.n_nodes, 3);
        assert_eq!(run.slots, 1000);
        assert_eq!(run.seed, 7);
        assert_eq!(run.transmittance, vec![1.0, 1.0]);
        assert_eq!(run.mode, RelayMode::Naive);
        assert_eq!(run.threshold, 0.0);
        assert_eq!(run.eve_link, None);
        assert!(!run.trace);
        assert!(parsed.sweep.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let file = write_config("n_nodes = 3\nslots = 10\nseed = 1\nbogus = true\n");
        let err = parse_config(Some(file.path()), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn wrong_length_per_hop_list_names_the_field() {
        let file = write_config("n_nodes = 4\nslots = 10\nseed = 1\ntransmittance = [0.9, 0.8]\n");
        let err = parse_config(Some(file.path()), &Overrides::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("transmittance"), "{msg}");
        assert!(msg.contains("3 hops"), "{msg}");
    }

    #[test]
    fn flags_override_file_values() {
        let file = write_config("n_nodes = 3\nslots = 1000\nseed = 7\nmode = \"naive\"\n");
        let overrides = Overrides {
            slots: Some(50),
            mode: Some(ModeName::Delay),
            batch_size: Some(4),
            ..Overrides::default()
        };
        let run = parse_config(Some(file.path()), &overrides).unwrap().run;
        assert_eq!(run.slots, 50);
        assert_eq!(run.mode, RelayMode::Delay { batch_size: 4 });
    }

    #[test]
    fn flags_alone_suffice() {
        let overrides = Overrides {
            n_nodes: Some(2),
            slots: Some(10),
            seed: Some(1),
            ..Overrides::default()
        };
        let run = parse_config(None, &overrides).unwrap().run;
        assert_eq!(run.n_nodes, 2);
        assert_eq!(run.transmittance, vec![1.0]);
    }

    #[test]
    fn missing_required_fields_are_reported() {
        let err = parse_config(None, &Overrides::default()).unwrap_err();
        assert!(matches!(err, ConfigError::Missing("n_nodes")));
    }

    #[test]
    fn eve_link_must_exist() {
        let file = write_config("n_nodes = 3\nslots = 10\nseed = 1\neve_link = 2\n");
        let err = parse_config(Some(file.path()), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("eve_link"), "{err}");
    }

    #[test]
    fn sweep_expansion_is_a_cartesian_product() {
        let file = write_config(
            "n_nodes = 3\nslots = 100\nseed = 9\n[sweep]\nn_nodes = [3, 4, 5]\nmode = [\"naive\", \"padding\"]\n",
        );
        let parsed = parse_config(Some(file.path()), &Overrides::default()).unwrap();
        let children = expand_sweep(&parsed.run, &parsed.sweep.unwrap());
        assert_eq!(children.len(), 6);
        // Child identity depends on values, not grid position: dropping
        // n = 4 leaves the n = 3 and n = 5 children untouched.
        let trimmed = SweepAxes {
            n_nodes: Some(vec![3, 5]),
            transmittance: None,
            mode: Some(vec![RelayMode::Naive, RelayMode::Padding]),
        };
        let fewer = expand_sweep(&parsed.run, &trimmed);
        assert_eq!(fewer.len(), 4);
        for child in &fewer {
            assert!(
                children.iter().any(|c| c.config == child.config),
                "child {child:?} changed after removing an axis value"
            );
        }
    }

    #[test]
    fn child_seeds_differ_across_the_grid() {
        let base = RunConfig {
            n_nodes: 3,
            slots: 10,
            seed: 42,
            transmittance: vec![1.0, 1.0],
            mode: RelayMode::Naive,
            threshold: 0.0,
            eve_link: None,
            trace: false,
            out_dir: None,
        };
        let axes = SweepAxes {
            n_nodes: Some(vec![3, 4]),
            transmittance: Some(vec![1.0, 0.5]),
            mode: None,
        };
        let children = expand_sweep(&base, &axes);
        let mut seeds: Vec<u64> = children.iter().map(|c| c.config.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), children.len(), "sub-seeds must not collide");
    }

    #[test]
    fn sweep_with_per_hop_list_is_rejected() {
        let file = write_config(
            "n_nodes = 3\nslots = 10\nseed = 1\ntransmittance = [0.9, 0.8]\n[sweep]\nn_nodes = [3, 4]\n",
        );
        let err = parse_config(Some(file.path()), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("sweep.n_nodes"), "{err}");
    }
}
