//! Root-raised-cosine pulses, faster-than-Nyquist modulation, and the sampled
//! intersymbol-interference profile.
//!
//! Symbols are spaced tau * T0 with tau in (0, 1]. At tau = 1 the rRC pulse is
//! orthogonal to its shifts and the matched-filter samples are ISI-free; for
//! tau < 1 the autocorrelation g(k tau T0) no longer vanishes at nonzero lags
//! and the whole detection problem downstream exists to undo that.
//!
//! Discrete conventions: `sps` samples per T0, sample period dt = 1/sps, pulse
//! truncated to +/- `span` symbol periods and normalized to unit energy in the
//! discrete inner product (sum of squares times dt). All symbol spacings are
//! restricted to an integer number of waveform samples, i.e. tau * sps must be
//! integral.

use std::fmt;

use crate::band::{cholesky_from_profile, BandCholesky, CholeskyError};

/// Default ISI truncation threshold, relative to g[0] = 1.
pub const DEFAULT_ISI_THRESHOLD: f64 = 1e-3;

/// Diagonal jitter used whenever the Gram matrix gets factored.
pub const GRAM_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum WaveformError {
    /// rolloff outside [0, 1], sps < 2, or span < 1.
    BadPulseSpec(String),
    /// tau outside (0, 1].
    BadTau(f64),
    /// tau * sps is not an integer, so symbols would fall between samples.
    FractionalStep { tau: f64, sps: usize },
    /// Waveform passed to the matched filter has the wrong length.
    LengthMismatch { expected: usize, got: usize },
    /// Gram matrix could not be factored even with jitter.
    Gram(CholeskyError),
}

impl fmt::Display for WaveformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveformError::BadPulseSpec(s) => write!(f, "bad pulse spec: {}", s),
            WaveformError::BadTau(t) => write!(f, "tau = {} outside (0, 1]", t),
            WaveformError::FractionalStep { tau, sps } => {
                write!(f, "tau * sps = {} is not an integer (tau = {}, sps = {})", tau * *sps as f64, tau, sps)
            }
            WaveformError::LengthMismatch { expected, got } => {
                write!(f, "waveform length {} does not match expected frame extent {}", got, expected)
            }
            WaveformError::Gram(e) => write!(f, "ISI Gram matrix: {}", e),
        }
    }
}

impl std::error::Error for WaveformError {}

/// Pulse shape parameters: rRC rolloff, samples per T0, one-sided span in T0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub rolloff: f64,
    pub sps: usize,
    pub span: usize,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec { rolloff: 0.3, sps: 10, span: 8 }
    }
}

impl PulseSpec {
    fn validate(&self) -> Result<(), WaveformError> {
        if !(0.0..=1.0).contains(&self.rolloff) || !self.rolloff.is_finite() {
            return Err(WaveformError::BadPulseSpec(format!("rolloff {} outside [0, 1]", self.rolloff)));
        }
        if self.sps < 2 {
            return Err(WaveformError::BadPulseSpec(format!("sps {} < 2", self.sps)));
        }
        if self.span < 1 {
            return Err(WaveformError::BadPulseSpec("span < 1".into()));
        }
        Ok(())
    }
}

/// Sampled unit-energy rRC pulse, symmetric around its center tap.
#[derive(Debug, Clone)]
pub struct PulseTaps {
    spec: PulseSpec,
    taps: Vec<f64>,
}

/// Evaluate the continuous-time rRC impulse response at t (in units of T0),
/// before energy normalization. Handles the t = 0 and |4 beta t| = 1 limits.
fn rrc_point(t: f64, beta: f64) -> f64 {
    use std::f64::consts::PI;
    if beta == 0.0 {
        if t == 0.0 {
            return 1.0;
        }
        return (PI * t).sin() / (PI * t);
    }
    if t == 0.0 {
        return 1.0 + beta * (4.0 / PI - 1.0);
    }
    let x = 4.0 * beta * t;
    if (x.abs() - 1.0).abs() < 1e-10 {
        let arg = PI / (4.0 * beta);
        return (beta / 2f64.sqrt())
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    ((PI * t * (1.0 - beta)).sin() + x * (PI * t * (1.0 + beta)).cos()) / (PI * t * (1.0 - x * x))
}

/// Sample the rRC pulse on the +/- span grid and normalize to unit energy.
pub fn rrc_taps(spec: PulseSpec) -> Result<PulseTaps, WaveformError> {
    spec.validate()?;
    let half = spec.span * spec.sps;
    let dt = 1.0 / spec.sps as f64;
    let mut taps: Vec<f64> = (0..=2 * half)
        .map(|i| rrc_point((i as f64 - half as f64) * dt, spec.rolloff))
        .collect();
    let energy: f64 = taps.iter().map(|x| x * x).sum::<f64>() * dt;
    let scale = 1.0 / energy.sqrt();
    for x in &mut taps {
        *x *= scale;
    }
    Ok(PulseTaps { spec, taps })
}

impl PulseTaps {
    pub fn spec(&self) -> PulseSpec {
        self.spec
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.spec.sps as f64
    }

    /// Symbol spacing in samples for a given tau; errors when fractional.
    pub fn symbol_step(&self, tau: f64) -> Result<usize, WaveformError> {
        if !(tau > 0.0 && tau <= 1.0) || !tau.is_finite() {
            return Err(WaveformError::BadTau(tau));
        }
        let raw = tau * self.spec.sps as f64;
        let rounded = raw.round();
        if (raw - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(WaveformError::FractionalStep { tau, sps: self.spec.sps });
        }
        Ok(rounded as usize)
    }

    /// Discrete autocorrelation at a lag of `shift` samples.
    fn autocorr(&self, shift: usize) -> f64 {
        if shift >= self.taps.len() {
            return 0.0;
        }
        let dt = self.dt();
        self.taps[shift..]
            .iter()
            .zip(self.taps.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * dt
    }
}

/// Sampled ISI profile g[k] = g(k tau T0) for k = 0..L.
///
/// L is the one-sided ISI extent: the smallest k such that every |g[k']| for
/// k' >= k falls below the threshold. g[0] = 1 by unit pulse energy; tau = 1
/// gives L = 1 (no ISI above threshold).
///
/// The profile keeps two views of the same autocorrelation. `g` is the
/// truncated tap list a detector works with. `corr` is the complete sampled
/// autocorrelation out to the end of the pulse support; the Gram matrix, the
/// noise coloring, and the whitening factor are all built from it, because it
/// is the exact second moment of the matched-filter outputs and therefore
/// positive semidefinite by construction. Truncating it first can produce an
/// indefinite matrix (at tau = 0.7 the minimum eigenvalue of the truncated
/// Gram matrix is about -4e-3, and its Cholesky factorization fails).
#[derive(Debug, Clone)]
pub struct IsiProfile {
    pub tau: f64,
    /// g[0..L], g[0] = 1.
    pub g: Vec<f64>,
    /// Complete sampled autocorrelation, corr[k] = g(k tau T0) over the whole
    /// pulse support. corr[..g.len()] starts with the same values as g.
    pub corr: Vec<f64>,
}

impl IsiProfile {
    /// Build directly from raw taps (test scaffolding and synthetic channels).
    /// The given taps serve as both the detector view and the full model.
    pub fn from_taps(tau: f64, g: Vec<f64>) -> Self {
        assert!(!g.is_empty(), "profile needs at least g[0]");
        let corr = g.clone();
        IsiProfile { tau, g, corr }
    }

    /// One-sided extent L (number of profile entries).
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// corr[|i - j|] extended with zeros: the Gram matrix entry for symbols
    /// i, j. Uses the full autocorrelation, not the truncated detector taps.
    pub fn gram(&self, i: usize, j: usize) -> f64 {
        let lag = i.abs_diff(j);
        if lag < self.corr.len() {
            self.corr[lag]
        } else {
            0.0
        }
    }

    /// y = G a for an N = a.len() Gram matrix (noise-free matched-filter model).
    pub fn gram_multiply(&self, a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let w = self.corr.len() - 1;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(n - 1);
                (lo..=hi).map(|j| self.gram(i, j) * a[j]).sum()
            })
            .collect()
    }

    /// Banded Cholesky of the N x N Gram matrix (with the standard jitter).
    pub fn gram_cholesky(&self, n: usize) -> Result<BandCholesky, WaveformError> {
        cholesky_from_profile(&self.corr, n, GRAM_JITTER).map_err(WaveformError::Gram)
    }
}

/// Measure the ISI profile of a pulse at symbol spacing tau * T0.
///
/// `threshold` is relative to g[0] = 1; profile entries are kept up to the
/// last lag whose tail still contains a value at or above it.
///
/// Detector taps are measured out to (span - 1) T0. A pulse truncated at
/// +/- span T0 carries a truncation artifact of a few 1e-3 in its
/// autocorrelation at lags near +/- span (the pulse end slides across the
/// center), swamping the true autocorrelation there. Reporting those boundary
/// lags as ISI taps would, at tau = 1, manufacture interference the underlying
/// pulse does not have. They stay in `corr`, which must describe the simulated
/// waveform exactly for the noise model to remain consistent.
pub fn isi_profile(taps: &PulseTaps, tau: f64, threshold: f64) -> Result<IsiProfile, WaveformError> {
    let step = taps.symbol_step(tau)?;
    let spec = taps.spec();
    let corr: Vec<f64> =
        (0..=(taps.len() - 1) / step).map(|k| taps.autocorr(k * step)).collect();
    let lag_cap = (spec.span - 1) * spec.sps;
    let kmax = (corr.len() - 1).min(lag_cap / step);
    // L = smallest k with max_{k' >= k} |g[k']| < threshold; k = 0 never drops
    // since g[0] = 1.
    let mut l = kmax + 1;
    while l > 1 && corr[l - 1].abs() < threshold {
        l -= 1;
    }
    Ok(IsiProfile { tau, g: corr[..l].to_vec(), corr })
}

/// BPSK frame: bit 0 -> +1, bit 1 -> -1, with per-symbol energy Es.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    pub symbols: Vec<f64>,
    pub es: f64,
}

/// Map bits to unit-amplitude BPSK symbols (bit 0 -> +1).
pub fn modulate_bpsk(bits: &[u8], es: f64) -> SymbolFrame {
    SymbolFrame {
        symbols: bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect(),
        es,
    }
}

/// Expected waveform length for an N-symbol frame at this tau.
pub fn frame_extent(taps: &PulseTaps, tau: f64, n: usize) -> Result<usize, WaveformError> {
    let step = taps.symbol_step(tau)?;
    Ok((n - 1) * step + taps.len())
}

/// Superpose pulse-shaped symbols at tau T0 spacing, scaled by sqrt(Es).
///
/// Sample i of the output is sqrt(Es) * sum_n a[n] * p[i - n*step]; symbols
/// outside the frame are zero, matching the edge conventions of the detectors.
pub fn ftn_transmit(frame: &SymbolFrame, taps: &PulseTaps, tau: f64) -> Result<Vec<f64>, WaveformError> {
    let step = taps.symbol_step(tau)?;
    let n = frame.symbols.len();
    let len = (n - 1) * step + taps.len();
    let amp = frame.es.sqrt();
    let mut w = vec![0.0; len];
    for (k, &a) in frame.symbols.iter().enumerate() {
        let base = k * step;
        let s = amp * a;
        for (j, &p) in taps.taps.iter().enumerate() {
            w[base + j] += s * p;
        }
    }
    Ok(w)
}

/// Matched-filter the waveform and sample at the tau T0 symbol instants.
///
/// Noise-free output equals sqrt(Es) * G a exactly in the discrete model,
/// G being the Gram matrix of the full profile autocorrelation.
pub fn matched_filter_sample(
    waveform: &[f64],
    taps: &PulseTaps,
    tau: f64,
    n: usize,
) -> Result<Vec<f64>, WaveformError> {
    let step = taps.symbol_step(tau)?;
    let expected = (n - 1) * step + taps.len();
    if waveform.len() != expected {
        return Err(WaveformError::LengthMismatch { expected, got: waveform.len() });
    }
    let dt = taps.dt();
    Ok((0..n)
        .map(|k| {
            let base = k * step;
            taps.taps
                .iter()
                .enumerate()
                .map(|(j, &p)| waveform[base + j] * p)
                .sum::<f64>()
                * dt
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Analytic raised-cosine autocorrelation oracle for the ideal
    /// (untruncated) pulse: g(t) = sinc(t) cos(pi b t) / (1 - (2 b t)^2).
    fn raised_cosine(t: f64, beta: f64) -> f64 {
        use std::f64::consts::PI;
        if t == 0.0 {
            return 1.0;
        }
        let sinc = (PI * t).sin() / (PI * t);
        if beta == 0.0 {
            return sinc;
        }
        let x = 2.0 * beta * t;
        assert!((x.abs() - 1.0).abs() > 1e-6, "oracle evaluated at its own singularity");
        sinc * (PI * beta * t).cos() / (1.0 - x * x)
    }

    fn default_taps() -> PulseTaps {
        rrc_taps(PulseSpec::default()).unwrap()
    }

    #[test]
    fn unit_energy_and_symmetry() {
        let p = default_taps();
        let dt = p.dt();
        let e: f64 = p.taps().iter().map(|x| x * x).sum::<f64>() * dt;
        assert!((e - 1.0).abs() < 1e-12);
        let n = p.len();
        assert_eq!(n, 2 * 8 * 10 + 1);
        for i in 0..n {
            assert!((p.taps()[i] - p.taps()[n - 1 - i]).abs() < 1e-12);
        }
        // Center tap is the maximum.
        let center = p.taps()[n / 2];
        assert!(p.taps().iter().all(|&x| x <= center));
    }

    #[test]
    fn singular_points_are_finite_and_continuous() {
        // rolloff 0.25 puts the |4 b t| = 1 singularity exactly on the sample
        // grid at t = +/- 1 (sample offset 10 at sps = 10).
        let p = rrc_taps(PulseSpec { rolloff: 0.25, sps: 10, span: 8 }).unwrap();
        let half = 80;
        let at = p.taps()[half + 10];
        assert!(at.is_finite());
        // The pulse is continuous and monotone through t = 1 at this rolloff:
        // the limit value must land between its neighbors.
        let left = p.taps()[half + 9];
        let right = p.taps()[half + 11];
        assert!(
            (right..=left).contains(&at) || (left..=right).contains(&at),
            "left={} at={} right={}",
            left,
            at,
            right
        );

        // rolloff 0 degenerates to sinc; t = 0 and integer t behave.
        let s = rrc_taps(PulseSpec { rolloff: 0.0, sps: 10, span: 8 }).unwrap();
        assert!(s.taps().iter().all(|x| x.is_finite()));
        for k in 1..=8usize {
            // sinc vanishes at integer lags (pre-normalization zero stays zero).
            assert!(s.taps()[half + 10 * k].abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_at_tau_one() {
        let p = default_taps();
        // Full profile (threshold 0 keeps everything measurable). Lags run to
        // span - 1 = 7 T0; the orthogonality defect of the truncated pulse
        // stays below 1e-3 on all of them (it would not at lag = span, where
        // truncation leaves a ~3e-3 boundary artifact).
        let prof = isi_profile(&p, 1.0, 0.0).unwrap();
        assert_eq!(prof.len(), 8);
        assert!((prof.g[0] - 1.0).abs() < 1e-12);
        for k in 1..prof.g.len() {
            assert!(prof.g[k].abs() < 1e-3, "g[{}] = {}", k, prof.g[k]);
        }
        // With the default threshold the profile collapses to [1].
        let trimmed = isi_profile(&p, 1.0, DEFAULT_ISI_THRESHOLD).unwrap();
        assert_eq!(trimmed.len(), 1);
    }

    #[test]
    fn profile_matches_analytic_autocorrelation() {
        let p = default_taps();
        for tau in [0.7, 0.8, 0.9] {
            let prof = isi_profile(&p, tau, 0.0).unwrap();
            for k in 0..prof.len().min(15) {
                let ideal = raised_cosine(k as f64 * tau, 0.3);
                assert!(
                    (prof.g[k] - ideal).abs() < 2e-3,
                    "tau={} k={} got {} want {}",
                    tau,
                    k,
                    prof.g[k],
                    ideal
                );
            }
        }
    }

    #[test]
    fn truncated_profile_extent() {
        let p = default_taps();
        for tau in [0.7, 0.8, 0.9] {
            let prof = isi_profile(&p, tau, DEFAULT_ISI_THRESHOLD).unwrap();
            let full = isi_profile(&p, tau, 0.0).unwrap();
            let l = prof.len();
            assert!(l >= 2, "tau < 1 must leave ISI");
            // Defining property: everything at or past L is below threshold,
            // and g[L-1] is not.
            assert!(prof.g[l - 1].abs() >= DEFAULT_ISI_THRESHOLD);
            for k in l..full.len() {
                assert!(full.g[k].abs() < DEFAULT_ISI_THRESHOLD);
            }
        }
    }

    #[test]
    fn fractional_step_rejected() {
        let p = default_taps();
        assert!(matches!(
            isi_profile(&p, 0.75, DEFAULT_ISI_THRESHOLD),
            Err(WaveformError::FractionalStep { .. })
        ));
        assert!(matches!(isi_profile(&p, 0.0, 1e-3), Err(WaveformError::BadTau(_))));
        assert!(matches!(isi_profile(&p, 1.2, 1e-3), Err(WaveformError::BadTau(_))));
    }

    #[test]
    fn bad_pulse_specs_rejected() {
        assert!(rrc_taps(PulseSpec { rolloff: -0.1, sps: 10, span: 8 }).is_err());
        assert!(rrc_taps(PulseSpec { rolloff: 1.1, sps: 10, span: 8 }).is_err());
        assert!(rrc_taps(PulseSpec { rolloff: 0.3, sps: 1, span: 8 }).is_err());
        assert!(rrc_taps(PulseSpec { rolloff: 0.3, sps: 10, span: 0 }).is_err());
    }

    #[test]
    fn modulation_convention() {
        let f = modulate_bpsk(&[0, 1, 1, 0], 2.0);
        assert_eq!(f.symbols, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(f.es, 2.0);
    }

    #[test]
    fn single_symbol_transmit_is_scaled_pulse() {
        let p = default_taps();
        let f = SymbolFrame { symbols: vec![1.0], es: 4.0 };
        let w = ftn_transmit(&f, &p, 0.8).unwrap();
        assert_eq!(w.len(), p.len());
        for (a, b) in w.iter().zip(p.taps()) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn waveform_energy_matches_quadratic_form() {
        // Oracle: integral of s(t)^2 equals Es * a^T G a with the full
        // (untruncated) discrete autocorrelation. Exact in the discrete model.
        let p = default_taps();
        let tau = 0.8;
        let symbols: Vec<f64> = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0].to_vec();
        let es = 1.7;
        let f = SymbolFrame { symbols: symbols.clone(), es };
        let w = ftn_transmit(&f, &p, tau).unwrap();
        let energy: f64 = w.iter().map(|x| x * x).sum::<f64>() * p.dt();

        let full = isi_profile(&p, tau, 0.0).unwrap();
        let mut quad = 0.0;
        for i in 0..symbols.len() {
            for j in 0..symbols.len() {
                quad += symbols[i] * symbols[j] * full.gram(i, j);
            }
        }
        assert!((energy - es * quad).abs() < 1e-10, "{} vs {}", energy, es * quad);
    }

    #[test]
    fn matched_filter_recovers_gram_model() {
        let p = default_taps();
        let tau = 0.8;
        let bits = [0u8, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0];
        let es = 1.0;
        let f = modulate_bpsk(&bits, es);
        let w = ftn_transmit(&f, &p, tau).unwrap();
        let y = matched_filter_sample(&w, &p, tau, bits.len()).unwrap();

        let prof = isi_profile(&p, tau, DEFAULT_ISI_THRESHOLD).unwrap();
        let model = prof.gram_multiply(&f.symbols);
        for k in 0..bits.len() {
            assert!(
                (y[k] - es.sqrt() * model[k]).abs() < 1e-3,
                "k={} y={} model={}",
                k,
                y[k],
                model[k]
            );
        }
    }

    #[test]
    fn matched_filter_length_check() {
        let p = default_taps();
        let w = vec![0.0; 100];
        assert!(matches!(
            matched_filter_sample(&w, &p, 0.8, 4),
            Err(WaveformError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gram_matrices_factor_for_all_default_taus() {
        let p = default_taps();
        for tau in [0.7, 0.8, 0.9, 1.0] {
            let prof = isi_profile(&p, tau, DEFAULT_ISI_THRESHOLD).unwrap();
            for n in [1usize, 2, 16, 64] {
                assert!(prof.gram_cholesky(n).is_ok(), "tau={} n={}", tau, n);
            }
        }
    }
}
