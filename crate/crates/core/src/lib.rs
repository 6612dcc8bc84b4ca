//! Simulation library for coded faster-than-Nyquist (FTN) signaling links.
//!
//! The crate covers the full chain: root-raised-cosine pulses compressed to
//! tau T0 symbol spacing, AWGN, reduced-complexity sequence detection (both
//! successive-cancellation and reduced-state BCJR), binary LDPC with min-sum
//! decoding, nonbinary LDPC over GF(2^m) with extended-min-sum decoding, a
//! Monte-Carlo BER harness with reproducible seeding, and gate-level
//! operation accounting for comparing receiver architectures.

pub mod band;
pub mod channel;
pub mod detectors;
pub mod galois;
pub mod ldpc;
pub mod montecarlo;
pub mod nbldpc;
pub mod opcount;
pub mod waveform;

// Every Rust block in the guide (and the README) runs as a doctest, so the
// prose and the API cannot drift apart.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/getting-started.md")]
    pub mod getting_started {}
    #[doc = include_str!("../../../book/src/pulses-and-isi.md")]
    pub mod pulses_and_isi {}
    #[doc = include_str!("../../../book/src/channel-models.md")]
    pub mod channel_models {}
    #[doc = include_str!("../../../book/src/detection.md")]
    pub mod detection {}
    #[doc = include_str!("../../../book/src/binary-ldpc.md")]
    pub mod binary_ldpc {}
    #[doc = include_str!("../../../book/src/nonbinary-ldpc.md")]
    pub mod nonbinary_ldpc {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub mod monte_carlo {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    pub mod complexity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
