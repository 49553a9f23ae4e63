//! Lossy per-hop transmission with an optional intercept/resend
//! eavesdropper on a chosen link.
//!
//! Loss is i.i.d. Bernoulli per slot per hop: a photon survives a hop with
//! probability equal to the link's transmittance. The eavesdropper model is
//! the textbook intercept/resend attack: measure in a fresh random basis,
//! resend the measured state. Unlike the chain's relays, the eavesdropper is
//! an adversary and announces nothing.

use crate::bb84::{encode, measure, PhotonState, RngStream};

/// Per-hop channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Probability in [0, 1] that a photon survives this hop.
    pub transmittance: f64,
}

impl ChannelParams {
    /// Panics if `transmittance` is outside [0, 1].
    pub fn new(transmittance: f64) -> ChannelParams {
        assert!(
            (0.0..=1.0).contains(&transmittance),
            "transmittance must be in [0, 1], got {transmittance}"
        );
        ChannelParams { transmittance }
    }

    /// A lossless hop.
    pub fn lossless() -> ChannelParams {
        ChannelParams { transmittance: 1.0 }
    }
}

/// Intercept/resend eavesdropper pinned to a single link.
///
/// Owns its own randomness stream so that attaching or removing the
/// eavesdropper never perturbs the honest nodes' draws.
#[derive(Debug, Clone)]
pub struct Eavesdropper {
    link: usize,
    rng: RngStream,
}

impl Eavesdropper {
    pub fn new(link: usize, seed: u64) -> Eavesdropper {
        Eavesdropper {
            link,
            rng: RngStream::new(seed, "eve"),
        }
    }

    /// Index of the link this eavesdropper taps.
    pub fn link(&self) -> usize {
        self.link
    }

    /// Measure the photon in a fresh random basis and resend the measured
    /// state.
    pub fn intercept(&mut self, photon: PhotonState) -> PhotonState {
        let basis = self.rng.basis();
        let bit = measure(photon, basis, &mut self.rng);
        encode(bit, basis)
    }
}

/// Send a photon across one hop.
///
/// With probability `1 - transmittance` the photon is lost and `None` is
/// returned. A surviving photon is handed to the eavesdropper first, when
/// one is attached to this link, and the resent state is delivered.
pub fn transmit(
    photon: PhotonState,
    params: &ChannelParams,
    eve: Option<&mut Eavesdropper>,
    rng: &mut RngStream,
) -> Option<PhotonState> {
    if !rng.chance(params.transmittance) {
        return None;
    }
    match eve {
        Some(e) => Some(e.intercept(photon)),
        None => Some(photon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bb84::{Basis, Bit};

    #[test]
    fn lossless_channel_without_eve_is_the_identity() {
        let mut rng = RngStream::new(1, "chan");
        let params = ChannelParams::lossless();
        for basis in [Basis::X, Basis::Y] {
            for bit in [Bit::ZERO, Bit::ONE] {
                let p = encode(bit, basis);
                for _ in 0..64 {
                    assert_eq!(transmit(p, &params, None, &mut rng), Some(p));
                }
            }
        }
    }

    #[test]
    fn opaque_channel_delivers_nothing() {
        let mut rng = RngStream::new(2, "chan");
        let params = ChannelParams::new(0.0);
        let p = encode(Bit::ONE, Basis::X);
        for _ in 0..256 {
            assert_eq!(transmit(p, &params, None, &mut rng), None);
        }
    }

    #[test]
    fn survival_rate_tracks_transmittance() {
        // Empirical rate within 3 sigma of the binomial mean at a fixed seed.
        let n = 20_000u32;
        for (seed, xi) in [(11u64, 0.5), (12, 0.8), (13, 0.3)] {
            let mut rng = RngStream::new(seed, "chan");
            let params = ChannelParams::new(xi);
            let p = encode(Bit::ZERO, Basis::Y);
            let delivered = (0..n)
                .filter(|_| transmit(p, &params, None, &mut rng).is_some())
                .count();
            let rate = delivered as f64 / f64::from(n);
            let sigma = (xi * (1.0 - xi) / f64::from(n)).sqrt();
            assert!(
                (rate - xi).abs() <= 3.0 * sigma,
                "rate {rate} vs transmittance {xi} (3 sigma = {})",
                3.0 * sigma
            );
        }
    }

    /// Exhaustive oracle for the intercept/resend attack: enumerate the
    /// eavesdropper's basis choice, her measurement outcome, and the
    /// downstream matched-basis measurement, weighting each random branch
    /// equally. Returns the probability (in quarters) that the downstream
    /// bit disagrees with the encoded bit.
    fn intercept_resend_error_quarters() -> u32 {
        let mut error_weight = 0u32; // in units of 1/16 per initial state
        let mut total_weight = 0u32;
        for basis in [Basis::X, Basis::Y] {
            for bit in [Bit::ZERO, Bit::ONE] {
                let state = encode(bit, basis);
                for eve_basis in [Basis::X, Basis::Y] {
                    // Eve's measurement outcomes and their weights out of 2.
                    let eve_outcomes: Vec<(Bit, u32)> = if eve_basis == state.basis {
                        vec![(state.bit, 2)]
                    } else {
                        vec![(Bit::ZERO, 1), (Bit::ONE, 1)]
                    };
                    for (eve_bit, w_eve) in eve_outcomes {
                        let resent = encode(eve_bit, eve_basis);
                        // Receiver measures in the sender's basis.
                        let recv_outcomes: Vec<(Bit, u32)> = if resent.basis == basis {
                            vec![(resent.bit, 2)]
                        } else {
                            vec![(Bit::ZERO, 1), (Bit::ONE, 1)]
                        };
                        for (recv_bit, w_recv) in recv_outcomes {
                            let w = w_eve * w_recv;
                            total_weight += w;
                            if recv_bit != bit {
                                error_weight += w;
                            }
                        }
                    }
                }
            }
        }
        // Normalize to quarters: error probability = error_weight / total_weight.
        assert_eq!(total_weight % 4, 0);
        error_weight * 4 / total_weight
    }

    #[test]
    fn intercept_resend_oracle_gives_one_quarter_error() {
        assert_eq!(intercept_resend_error_quarters(), 1);
    }

    #[test]
    fn eve_induces_quarter_error_on_matched_basis_slots() {
        // Matched-basis disagreement across a tapped lossless link must be
        // 0.25 +/- 0.02 over 10^4 matched slots, per the enumeration oracle.
        let mut chan_rng = RngStream::new(31, "chan");
        let mut sender_rng = RngStream::new(31, "sender");
        let mut recv_rng = RngStream::new(31, "recv");
        let mut eve = Eavesdropper::new(0, 31);
        let params = ChannelParams::lossless();

        let mut matched = 0u32;
        let mut errors = 0u32;
        while matched < 10_000 {
            let sent = crate::bb84::random_photon(&mut sender_rng);
            let recv_basis = recv_rng.basis();
            let delivered = transmit(sent, &params, Some(&mut eve), &mut chan_rng)
                .expect("lossless channel always delivers");
            let got = measure(delivered, recv_basis, &mut recv_rng);
            if recv_basis == sent.basis {
                matched += 1;
                if got != sent.bit {
                    errors += 1;
                }
            }
        }
        let rate = f64::from(errors) / f64::from(matched);
        assert!(
            (rate - 0.25).abs() <= 0.02,
            "matched-basis error rate {rate}"
        );
    }

    #[test]
    fn delivered_photon_untouched_without_eve() {
        let mut rng = RngStream::new(77, "chan");
        let mut src = RngStream::new(77, "src");
        let params = ChannelParams::new(0.6);
        for _ in 0..2_000 {
            let sent = crate::bb84::random_photon(&mut src);
            if let Some(got) = transmit(sent, &params, None, &mut rng) {
                assert_eq!(got, sent);
            }
        }
    }
}
