//! AWGN injection and Eb/N0 bookkeeping.
//!
//! Convention: Eb = Es / (code_rate * bits_per_symbol) with BPSK carrying one
//! bit per symbol, so N0 = Es / (rate * 10^(EbN0_dB / 10)). White noise added
//! on the oversampled waveform needs variance N0/2 * sps per sample for the
//! matched-filter output to see N0/2 per symbol sample (the filter has unit
//! energy under the discrete inner product).

use rand::Rng;

use crate::band::BandCholesky;
use crate::waveform::{IsiProfile, WaveformError};

/// Noise parameters for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ebn0_db: f64,
    pub code_rate: f64,
    pub es: f64,
    /// BPSK: one bit per channel symbol.
    pub bits_per_symbol: u32,
    pub sps: usize,
    /// One-sided noise spectral density.
    pub n0: f64,
}

impl NoiseSpec {
    /// Variance of the noise in each matched-filter symbol sample.
    pub fn n0_half(&self) -> f64 {
        0.5 * self.n0
    }

    /// Per-sample variance of white noise on the oversampled waveform.
    pub fn waveform_sigma2(&self) -> f64 {
        0.5 * self.n0 * self.sps as f64
    }
}

/// Translate an Eb/N0 operating point into noise variances.
pub fn sigma_from_ebn0(ebn0_db: f64, code_rate: f64, es: f64, sps: usize) -> NoiseSpec {
    assert!(code_rate > 0.0 && code_rate <= 1.0, "code rate {} outside (0, 1]", code_rate);
    assert!(es > 0.0);
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let n0 = es / (code_rate * ebn0);
    NoiseSpec { ebn0_db, code_rate, es, bits_per_symbol: 1, sps, n0 }
}

/// One standard normal draw via Box-Muller.
///
/// Kept in-crate so the byte-level reproducibility contract depends only on
/// the seeded generator, not on a distribution crate's sampling algorithm.
#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    use std::f64::consts::PI;
    // 1 - u in (0, 1] keeps the log finite.
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Add white Gaussian noise at the spec's waveform-sample variance, in place.
pub fn add_awgn<R: Rng + ?Sized>(waveform: &mut [f64], spec: &NoiseSpec, rng: &mut R) {
    let sigma = spec.waveform_sigma2().sqrt();
    for x in waveform.iter_mut() {
        *x += sigma * standard_normal(rng);
    }
}

/// Discrete-shortcut channel: y = sqrt(Es) G a + chol(G) n sqrt(N0/2).
///
/// Produces matched-filter symbol samples directly, with exactly the colored
/// covariance (N0/2) G of the waveform path, skipping pulse shaping. Useful
/// for fast sweeps; equivalence with the waveform model is a simulator test.
#[derive(Debug, Clone)]
pub struct DiscreteChannel {
    isi: IsiProfile,
    chol: BandCholesky,
}

impl DiscreteChannel {
    pub fn new(isi: &IsiProfile, n: usize) -> Result<Self, WaveformError> {
        Ok(DiscreteChannel { isi: isi.clone(), chol: isi.gram_cholesky(n)? })
    }

    pub fn n(&self) -> usize {
        self.chol.n()
    }

    /// One frame: symbols in, noisy matched-filter samples out.
    pub fn transmit<R: Rng + ?Sized>(&self, symbols: &[f64], es: f64, spec: &NoiseSpec, rng: &mut R) -> Vec<f64> {
        assert_eq!(symbols.len(), self.chol.n());
        let mut y = self.isi.gram_multiply(symbols);
        let amp = es.sqrt();
        for v in &mut y {
            *v *= amp;
        }
        let white: Vec<f64> = (0..symbols.len()).map(|_| standard_normal(rng)).collect();
        let colored = self.chol.color(&white);
        let sigma = spec.n0_half().sqrt();
        for (v, c) in y.iter_mut().zip(colored) {
            *v += sigma * c;
        }
        y
    }
}
