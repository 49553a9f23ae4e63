//! BB84 primitives: bases, bit values, photon states, and the
//! encode/measure rules everything else builds on.
//!
//! Photons are modeled symbolically as a (basis, bit) pair rather than as
//! amplitudes. The protocol only ever distinguishes matched from mismatched
//! bases: measuring in the preparation basis returns the encoded bit
//! deterministically, measuring in the complementary basis returns a fair
//! coin flip. That rule is exact for the four BB84 eigenstates, so nothing
//! is lost by skipping the linear algebra.

use std::fmt;
use std::ops::BitXor;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// One of the two conjugate BB84 encoding/measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
}

impl Basis {
    /// The other basis.
    pub fn complement(self) -> Basis {
        match self {
            Basis::X => Basis::Y,
            Basis::Y => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => write!(f, "X"),
            Basis::Y => write!(f, "Y"),
        }
    }
}

/// A classical key bit. Closed under XOR; `b ^ b == Bit::ZERO`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit(pub bool);

impl Bit {
    pub const ZERO: Bit = Bit(false);
    pub const ONE: Bit = Bit(true);

    /// Numeric value, 0 or 1.
    pub fn value(self) -> u8 {
        u8::from(self.0)
    }
}

impl BitXor for Bit {
    type Output = Bit;

    fn bitxor(self, rhs: Bit) -> Bit {
        Bit(self.0 ^ rhs.0)
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Bit {
        Bit(b)
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// One of the four BB84 eigenstates: a bit value encoded in a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhotonState {
    pub basis: Basis,
    pub bit: Bit,
}

/// Prepare a photon carrying `bit` in `basis`.
pub fn encode(bit: Bit, basis: Basis) -> PhotonState {
    PhotonState { basis, bit }
}

/// Measure a photon in `basis`.
///
/// A matched basis returns the encoded bit; a mismatched basis returns an
/// unbiased random bit drawn from `rng`. No draw is consumed on a match,
/// so the caller's stream advances only when quantum randomness actually
/// enters the outcome.
pub fn measure(state: PhotonState, basis: Basis, rng: &mut RngStream) -> Bit {
    if state.basis == basis {
        state.bit
    } else {
        rng.bit()
    }
}

/// Draw a photon with an unbiased, independent random basis and bit value.
pub fn random_photon(rng: &mut RngStream) -> PhotonState {
    let basis = rng.basis();
    let bit = rng.bit();
    encode(bit, basis)
}

/// Deterministic, labeled randomness source.
///
/// Every node and purpose in a simulation owns its own stream, derived from
/// the master seed plus a textual label ("alice", "relay:2", "channel:0",
/// ...). Streams are mutually independent, so the draw order in one part of
/// the system never perturbs another: adding a relay leaves every other
/// node's randomness untouched.
///
/// The underlying generator is ChaCha8 keyed with
/// `SHA-256("qkd-relay.stream" || seed_le_bytes || label_utf8)`, which makes
/// a run a pure function of (config, seed).
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> RngStream {
        let mut hasher = Sha256::new();
        hasher.update(b"qkd-relay.stream");
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        RngStream {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// An unbiased random bit.
    pub fn bit(&mut self) -> Bit {
        Bit(self.rng.random::<bool>())
    }

    /// An unbiased random basis.
    pub fn basis(&mut self) -> Basis {
        if self.rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Y
        }
    }

    /// Bernoulli draw: true with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
