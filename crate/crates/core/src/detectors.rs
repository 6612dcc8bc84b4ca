//! FTN symbol detection.
//!
//! Three detectors with very different complexity/performance trade-offs:
//!
//! * [`ssse_detect`]: one left-to-right pass, cancelling ISI from already
//!   decided symbols and quantizing the residual.
//! * [`gbk_detect`]: same pass, but after each new decision the previous K
//!   symbols are re-estimated with both past and (now available) future
//!   interference removed.
//! * [`mbcjr_detect`]: reduced-state BCJR on a whitened observation model,
//!   keeping the M best forward states per step.
//!
//! The matched-filter samples have covariance (N0/2) G, so the trellis
//! detector first solves U z = y with G = U U^T (reversed banded Cholesky
//! factor). That leaves z = sqrt(Es) U^T a + w with white w and a causal,
//! banded response: exactly the finite-memory model a trellis wants, and the
//! transform is information-lossless, so full-state BCJR on z is MAP for the
//! original y.

use crate::waveform::{IsiProfile, WaveformError, DEFAULT_ISI_THRESHOLD};

/// Saturation for demodulator bit LLRs, protecting decoders from
/// overconfident inputs.
pub const DEFAULT_LLR_CAP: f64 = 30.0;

/// Posterior LLR clamp for the trellis detector. Pruning can leave one
/// hypothesis with no surviving path; its LLR is certainty, reported finite.
const MBCJR_LLR_CLAMP: f64 = 300.0;

/// Upper bound on trellis memory (2^memory states).
const MEMORY_GUARD: usize = 20;

#[derive(Debug)]
pub enum DetectError {
    /// Survivor budget must be at least 1.
    BadSurvivorCount { m: usize },
    /// Trellis memory beyond the state-space guard.
    MemoryTooLarge { memory: usize },
    /// Whitening factorization failed.
    Whiten(WaveformError),
}

impl std::fmt::Display for DetectError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DetectError::BadSurvivorCount { m } => {
                write!(f, "survivor count must be >= 1, got {}", m)
            }
            DetectError::MemoryTooLarge { memory } => {
                write!(f, "trellis memory {} exceeds the guard of {}", memory, MEMORY_GUARD)
            }
            DetectError::Whiten(e) => write!(f, "whitening failed: {}", e),
        }
    }
}

impl std::error::Error for DetectError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            DetectError::Whiten(e) => Some(e),
            _ => None,
        }
    }
}

/// Hard decisions plus per-bit LLRs (positive favors bit 0, the +1 symbol).
#[derive(Debug, Clone)]
pub struct DetectedFrame {
    pub hard: Vec<f64>,
    pub bit_llrs: Vec<f64>,
}

impl DetectedFrame {
    /// Derive hard decisions from LLR signs (zero counts as +1).
    pub fn from_llrs(bit_llrs: Vec<f64>) -> Self {
        let hard = bit_llrs.iter().map(|&l| if l < 0.0 { -1.0 } else { 1.0 }).collect();
        DetectedFrame { hard, bit_llrs }
    }
}

/// Nearest BPSK symbol; exact zero resolves to +1 for determinism.
fn quantize_bpsk(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Successive symbol-by-symbol sequence estimation.
///
/// a_k = quantize{ y_k - sqrt(Es) sum_{j=1..L-1} g[j] a_{k-j} }, indices
/// before the frame treated as zero amplitude.
pub fn ssse_detect(y: &[f64], isi: &IsiProfile, es: f64) -> Vec<f64> {
    let g = &isi.g;
    let root_es = es.sqrt();
    let mut hard: Vec<f64> = Vec::with_capacity(y.len());
    for k in 0..y.len() {
        let mut x = y[k];
        for j in 1..g.len().min(k + 1) {
            x -= root_es * g[j] * hard[k - j];
        }
        hard.push(quantize_bpsk(x));
    }
    hard
}

/// Go-back depth for [`gbk_detect`]. Depths beyond the ISI extent add
/// re-estimation rounds whose future terms are all zero taps, so they cannot
/// improve anything.
#[derive(Debug, Clone, Copy)]
pub struct GbkConfig {
    pub k: usize,
}

/// Symbol-by-symbol estimation with go-back-K re-estimation.
///
/// After deciding symbol k, symbols k-K..k-1 are re-estimated oldest-first,
/// each with past interference and the future interference of everything up
/// to symbol k removed. Working oldest-first lets later re-estimates in the
/// same round see the earlier corrected ones.
pub fn gbk_detect(y: &[f64], isi: &IsiProfile, es: f64, cfg: GbkConfig) -> Vec<f64> {
    let g = &isi.g;
    let l = g.len();
    let root_es = es.sqrt();
    let mut est: Vec<f64> = Vec::with_capacity(y.len());
    for k in 0..y.len() {
        let mut x = y[k];
        for j in 1..l.min(k + 1) {
            x -= root_es * g[j] * est[k - j];
        }
        est.push(quantize_bpsk(x));
        let lo = k.saturating_sub(cfg.k);
        for i in lo..k {
            let mut x = y[i];
            for j in 1..l.min(i + 1) {
                x -= root_es * g[j] * est[i - j];
            }
            for j in 1..l.min(k - i + 1) {
                x -= root_es * g[j] * est[i + j];
            }
            est[i] = quantize_bpsk(x);
        }
    }
    est
}

/// Residual-based bit LLRs for hard detector output.
///
/// r_k = y_k minus the ISI of the hard decisions on both sides; the LLR is
/// the memoryless AWGN LLR of the residual, 2 sqrt(Es) r_k / ((N0/2) g[0]),
/// clamped to +/- cap. The residual is a better statistic than the decision
/// it came from: the detector never saw the future taps, the residual has
/// both sides cancelled. When they disagree the LLR is usually the one
/// pointing at the transmitted symbol, so disagreements are kept as-is and
/// left for the decoder to arbitrate.
pub fn demod_soft(
    hard: &[f64],
    y: &[f64],
    isi: &IsiProfile,
    es: f64,
    n0: f64,
    cap: f64,
) -> Vec<f64> {
    assert_eq!(hard.len(), y.len(), "hard decisions and samples must align");
    let g = &isi.g;
    let root_es = es.sqrt();
    let scale = 2.0 * root_es / (0.5 * n0 * g[0]);
    (0..y.len())
        .map(|k| {
            let mut r = y[k];
            for j in 1..g.len() {
                if k >= j {
                    r -= root_es * g[j] * hard[k - j];
                }
                if k + j < y.len() {
                    r -= root_es * g[j] * hard[k + j];
                }
            }
            (scale * r).clamp(-cap, cap)
        })
        .collect()
}

/// Trellis geometry and survivor budget for [`mbcjr_detect`].
#[derive(Debug, Clone, Copy)]
pub struct TrellisSpec {
    /// One-sided taps carried as state; 2^memory trellis states.
    pub memory: usize,
    /// Forward survivors kept per step (clamped to the state count).
    pub m: usize,
}

impl TrellisSpec {
    /// Memory from the pulse: the steady-state whitened response truncated at
    /// the profile threshold, and never wider than the detector tap extent
    /// L-1. The whitened factor of the full autocorrelation carries small
    /// terms past L (the same boundary lags the tap list excludes); spending
    /// trellis states on them models noise, not ISI. At tau = 1 this
    /// correctly degenerates to memory 0.
    pub fn for_profile(isi: &IsiProfile, m: usize) -> Result<TrellisSpec, DetectError> {
        let band = isi.corr.len() - 1;
        // Rows of the reversed factor converge moving away from the frame
        // end; read taps for an early symbol of a frame several bands long.
        let n_ref = 4 * (band + 1) + 16;
        let chol = isi.gram_cholesky(n_ref).map_err(DetectError::Whiten)?;
        let mut memory = 0;
        for d in 1..=band {
            if chol.reversed_upper(band, d).abs() >= DEFAULT_ISI_THRESHOLD {
                memory = d;
            }
        }
        memory = memory.min(isi.g.len() - 1);
        if memory > MEMORY_GUARD {
            return Err(DetectError::MemoryTooLarge { memory });
        }
        Ok(TrellisSpec { memory, m })
    }
}

/// Exact log(exp(a) + exp(b)).
fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn clamp_llr(l: f64) -> f64 {
    l.clamp(-MBCJR_LLR_CLAMP, MBCJR_LLR_CLAMP)
}

/// Reduced-state BCJR posterior bit LLRs.
///
/// Whitens y, then runs forward/backward over a 2^memory-state trellis. The
/// forward pass keeps the M best states per step (exact log-sum-exp merging
/// before pruning, ties broken toward the lower state); the backward pass and
/// the posterior sums are restricted to those survivors. No termination is
/// assumed: the final-step backward metrics are all zero. With M = 2^memory
/// nothing is pruned and the output is the exact BCJR posterior.
pub fn mbcjr_detect(
    y: &[f64],
    isi: &IsiProfile,
    es: f64,
    n0: f64,
    spec: &TrellisSpec,
) -> Result<Vec<f64>, DetectError> {
    if spec.m < 1 {
        return Err(DetectError::BadSurvivorCount { m: spec.m });
    }
    if spec.memory > MEMORY_GUARD {
        return Err(DetectError::MemoryTooLarge { memory: spec.memory });
    }
    let n = y.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = isi.gram_cholesky(n).map_err(DetectError::Whiten)?;
    let z = chol.solve_reversed_upper(y);
    let mem = spec.memory;
    let mask = if mem == 0 { 0u32 } else { (1u32 << mem) - 1 };
    let m_keep = if mem >= usize::BITS as usize - 1 {
        spec.m
    } else {
        spec.m.min(1usize << mem)
    };
    let root_es = es.sqrt();
    let inv_n0 = 1.0 / n0; // gamma = -(z - mu)^2 / (2 sigma^2), sigma^2 = N0/2

    // State s holds the previous symbols, newest in bit 0; bit 0 means +1.
    // Taps for lags reaching before the frame are zero (zero-padded frame).
    let mean = |k: usize, s: u32, a0: f64| -> f64 {
        let mut mu = chol.reversed_upper(k, 0) * a0;
        for d in 1..=mem {
            let f = chol.reversed_upper(k, d);
            if f != 0.0 {
                mu += f * (if (s >> (d - 1)) & 1 == 0 { 1.0 } else { -1.0 });
            }
        }
        root_es * mu
    };
    let gamma = |k: usize, s: u32, b: u32| -> f64 {
        let a0 = if b == 0 { 1.0 } else { -1.0 };
        let diff = z[k] - mean(k, s, a0);
        -diff * diff * inv_n0
    };

    // Forward: per-step survivor lists (state, alpha), sorted by state.
    let mut surv: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    let mut prev: Vec<(u32, f64)> = vec![(0, 0.0)];
    for k in 0..n {
        let mut next: Vec<(u32, f64)> = Vec::with_capacity(prev.len() * 2);
        for &(s, alpha) in &prev {
            for b in 0..2u32 {
                next.push((((s << 1) | b) & mask, alpha + gamma(k, s, b)));
            }
        }
        next.sort_unstable_by(|x, w| x.0.cmp(&w.0));
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(next.len());
        for (s, v) in next {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 = ln_add_exp(last.1, v),
                _ => merged.push((s, v)),
            }
        }
        if merged.len() > m_keep {
            merged.sort_unstable_by(|x, w| w.1.total_cmp(&x.1).then(x.0.cmp(&w.0)));
            merged.truncate(m_keep);
            merged.sort_unstable_by(|x, w| x.0.cmp(&w.0));
        }
        prev = merged.clone();
        surv.push(merged);
    }

    // Backward over the surviving states only; posterior sums on the fly.
    let mut llrs = vec![0.0; n];
    let mut beta_next: Vec<f64> = vec![0.0; surv[n - 1].len()];
    let start: [(u32, f64); 1] = [(0, 0.0)];
    for k in (0..n).rev() {
        let nxt = &surv[k];
        let prior: &[(u32, f64)] = if k == 0 { &start } else { &surv[k - 1] };
        let mut beta_here = vec![f64::NEG_INFINITY; prior.len()];
        let mut pos = f64::NEG_INFINITY;
        let mut neg = f64::NEG_INFINITY;
        for (pi, &(s, alpha)) in prior.iter().enumerate() {
            for b in 0..2u32 {
                let sn = ((s << 1) | b) & mask;
                let Ok(ni) = nxt.binary_search_by(|p| p.0.cmp(&sn)) else {
                    continue;
                };
                let path = gamma(k, s, b) + beta_next[ni];
                beta_here[pi] = ln_add_exp(beta_here[pi], path);
                let full = alpha + path;
                if b == 0 {
                    pos = ln_add_exp(pos, full);
                } else {
                    neg = ln_add_exp(neg, full);
                }
            }
        }
        llrs[k] = clamp_llr(pos - neg);
        beta_next = beta_here;
    }
    Ok(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sigma_from_ebn0, DiscreteChannel};
    use crate::waveform::{isi_profile, rrc_taps, PulseSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_profile(tau: f64) -> IsiProfile {
        let taps = rrc_taps(PulseSpec::default()).unwrap();
        isi_profile(&taps, tau, DEFAULT_ISI_THRESHOLD).unwrap()
    }

    fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
    }

    #[test]
    fn ssse_hand_example() {
        // y_1 = -0.2 - 0.45 * (+1) = -0.65 -> -1
        let isi = IsiProfile::from_taps(0.8, vec![1.0, 0.45]);
        assert_eq!(ssse_detect(&[1.0, -0.2], &isi, 1.0), vec![1.0, -1.0]);
    }

    #[test]
    fn ssse_at_tau_one_is_sign_detector() {
        let isi = IsiProfile::from_taps(1.0, vec![1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y: Vec<f64> = (0..256).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let hard = ssse_detect(&y, &isi, 1.7);
        for (h, v) in hard.iter().zip(&y) {
            assert_eq!(*h, if *v >= 0.0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn ssse_noise_free_recovery_tau_09() {
        let isi = default_profile(0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_symbols(&mut rng, 64);
        let es: f64 = 1.3;
        let y: Vec<f64> = isi.gram_multiply(&a).iter().map(|v| es.sqrt() * v).collect();
        assert_eq!(ssse_detect(&y, &isi, es), a);
    }

    #[test]
    fn gbk_zero_matches_ssse_bitwise() {
        let isi = default_profile(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10_000 {
            let y: Vec<f64> = (0..24).map(|_| rng.gen_range(-2.5..2.5)).collect();
            assert_eq!(
                gbk_detect(&y, &isi, 1.0, GbkConfig { k: 0 }),
                ssse_detect(&y, &isi, 1.0)
            );
        }
    }

    #[test]
    fn gbk_corrects_past_symbol() {
        // True a = [+1, -1, +1] through g = [1, 0.45]: noise pushes y_0 to
        // -0.1, so SSSSE decides -1. Once a_1 = -1 is known, the go-back pass
        // re-evaluates y_0 + 0.45 = +0.35 and repairs symbol 0.
        let isi = IsiProfile::from_taps(0.8, vec![1.0, 0.45]);
        let y = [-0.1, -0.55, 0.55];
        assert_eq!(ssse_detect(&y, &isi, 1.0), vec![-1.0, -1.0, 1.0]);
        assert_eq!(
            gbk_detect(&y, &isi, 1.0, GbkConfig { k: 1 }),
            vec![1.0, -1.0, 1.0]
        );
    }

    #[test]
    fn gbk_noise_free_recovery_both_taus() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for tau in [0.8, 0.9] {
            let isi = default_profile(tau);
            let a = random_symbols(&mut rng, 504);
            let y: Vec<f64> = isi.gram_multiply(&a);
            let out = gbk_detect(&y, &isi, 1.0, GbkConfig { k: 1 });
            assert_eq!(out, a, "tau={}", tau);
        }
    }

    #[test]
    fn demod_tau_one_is_memoryless_awgn() {
        let isi = IsiProfile::from_taps(1.0, vec![1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let y: Vec<f64> = (0..128).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let es = 1.4;
        let n0 = 0.8;
        let hard = ssse_detect(&y, &isi, es);
        let llrs = demod_soft(&hard, &y, &isi, es, n0, f64::INFINITY);
        for (l, v) in llrs.iter().zip(&y) {
            let expect = 4.0 * es.sqrt() * v / n0;
            assert!((l - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn demod_saturates_with_correct_signs_noise_free() {
        let isi = default_profile(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = random_symbols(&mut rng, 96);
        let y = isi.gram_multiply(&a);
        let llrs = demod_soft(&a, &y, &isi, 1.0, 1e-4, DEFAULT_LLR_CAP);
        for (l, s) in llrs.iter().zip(&a) {
            assert_eq!(*l, DEFAULT_LLR_CAP * s);
        }
    }

    #[test]
    fn demod_matches_direct_residual_formula() {
        let isi = default_profile(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let es = 1.3;
        let n0 = 0.6;
        let cap = 12.0;
        let y: Vec<f64> = (0..48).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let hard = random_symbols(&mut rng, 48);
        let llrs = demod_soft(&hard, &y, &isi, es, n0, cap);
        for k in 0..y.len() {
            let mut r = y[k];
            for (j, sym) in hard.iter().enumerate() {
                if j != k && k.abs_diff(j) < isi.g.len() {
                    r -= es.sqrt() * isi.g[k.abs_diff(j)] * sym;
                }
            }
            let expect = (2.0 * es.sqrt() * r / (0.5 * n0 * isi.g[0])).clamp(-cap, cap);
            assert!((llrs[k] - expect).abs() < 1e-12, "k={}", k);
        }
    }

    #[test]
    fn demod_llr_signs_mostly_agree_with_hard_decisions() {
        // Self-cancellation on real frames: most residuals confirm the
        // decision that produced them; the rare conflicts are where the
        // two-sided residual outvotes the one-sided detector, and those
        // must survive to the decoder unerased.
        let isi = default_profile(0.8);
        let chan = DiscreteChannel::new(&isi, 96).unwrap();
        let noise = sigma_from_ebn0(6.0, 0.5, 1.0, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let mut agree = 0usize;
        let mut conflict = 0usize;
        for _ in 0..1000 {
            let a = random_symbols(&mut rng, 96);
            let y = chan.transmit(&a, 1.0, &noise, &mut rng);
            let hard = gbk_detect(&y, &isi, 1.0, GbkConfig { k: 1 });
            let llrs = demod_soft(&hard, &y, &isi, 1.0, noise.n0, DEFAULT_LLR_CAP);
            for (l, h) in llrs.iter().zip(&hard) {
                if l * h > 0.0 {
                    agree += 1;
                } else {
                    conflict += 1;
                }
            }
        }
        let total = agree + conflict;
        assert!(conflict > 0, "expected some sign conflicts at this SNR");
        assert!(agree * 10 >= total * 9, "{} agree of {}", agree, total);
    }

    // ---- M-BCJR ----

    /// Dense solve of A x = b by Gaussian elimination with partial pivoting;
    /// test-local so the MAP oracle shares no code with the banded path.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut s = b[row];
            for k in row + 1..n {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        x
    }

    /// Exhaustive MAP bit LLRs under y ~ N(sqrt(Es) G' a, (N0/2) G') with
    /// G' = G + jitter I, the exact model the whitened detector solves.
    fn brute_force_map_llrs(y: &[f64], isi: &IsiProfile, es: f64, n0: f64) -> Vec<f64> {
        let n = y.len();
        assert!(n <= 16, "oracle is exponential");
        let jitter = 1e-9;
        let gp = |i: usize, j: usize| isi.gram(i, j) + if i == j { jitter } else { 0.0 };
        let root_es = es.sqrt();
        let mut pos = vec![f64::NEG_INFINITY; n];
        let mut neg = vec![f64::NEG_INFINITY; n];
        for pattern in 0..(1u32 << n) {
            let a: Vec<f64> =
                (0..n).map(|k| if (pattern >> k) & 1 == 0 { 1.0 } else { -1.0 }).collect();
            let resid: Vec<f64> = (0..n)
                .map(|i| y[i] - root_es * (0..n).map(|j| gp(i, j) * a[j]).sum::<f64>())
                .collect();
            let cov: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| 0.5 * n0 * gp(i, j)).collect()).collect();
            let solved = dense_solve(cov, resid.clone());
            let quad: f64 = resid.iter().zip(&solved).map(|(r, s)| r * s).sum();
            let loglik = -0.5 * quad;
            for k in 0..n {
                if (pattern >> k) & 1 == 0 {
                    pos[k] = ln_add_exp(pos[k], loglik);
                } else {
                    neg[k] = ln_add_exp(neg[k], loglik);
                }
            }
        }
        (0..n).map(|k| pos[k] - neg[k]).collect()
    }

    #[test]
    fn mbcjr_full_state_matches_exhaustive_map() {
        let isi = IsiProfile::from_taps(0.8, vec![1.0, 0.3, 0.05]);
        let spec = TrellisSpec::for_profile(&isi, 4).unwrap();
        assert_eq!(spec.memory, 2);
        let es = 1.2;
        let n0 = 0.6;
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for trial in 0..20 {
            let n = 6 + (trial % 5);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = mbcjr_detect(&y, &isi, es, n0, &spec).unwrap();
            let want = brute_force_map_llrs(&y, &isi, es, n0);
            for k in 0..n {
                assert!(
                    (got[k] - want[k]).abs() < 1e-9,
                    "trial {} k {}: {} vs {}",
                    trial,
                    k,
                    got[k],
                    want[k]
                );
            }
        }
    }

    #[test]
    fn mbcjr_tau_one_memoryless_llrs() {
        // Synthetic exact-Nyquist profile: single state, LLR = 4 sqrt(Es) y / N0.
        let isi = IsiProfile::from_taps(1.0, vec![1.0]);
        let spec = TrellisSpec::for_profile(&isi, 32).unwrap();
        assert_eq!(spec.memory, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let y: Vec<f64> = (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let es = 0.9;
        let n0 = 0.7;
        let llrs = mbcjr_detect(&y, &isi, es, n0, &spec).unwrap();
        for (l, v) in llrs.iter().zip(&y) {
            let expect = 4.0 * es.sqrt() * v / n0;
            assert!((l - expect).abs() < 1e-6 * expect.abs().max(1.0), "{} vs {}", l, expect);
        }

        // Real pulse at tau = 1: the tap list is ISI-free, so the trellis
        // degenerates to a single state and stays near-memoryless. The span-8
        // autocorrelation couples neighbors at the few-1e-3 level though, and
        // whitening folds several neighbor samples into each z_k, so single
        // LLRs can drift a few percent off the ideal memoryless value.
        let isi = default_profile(1.0);
        let spec = TrellisSpec::for_profile(&isi, 32).unwrap();
        assert_eq!(spec.memory, 0);
        let llrs = mbcjr_detect(&y, &isi, es, n0, &spec).unwrap();
        for (l, v) in llrs.iter().zip(&y) {
            let expect = 4.0 * es.sqrt() * v / n0;
            assert!((l - expect).abs() < 6e-2 * expect.abs().max(1.0), "{} vs {}", l, expect);
        }
    }

    #[test]
    fn trellis_memory_for_default_pulse() {
        // Frozen against an independent dense-linear-algebra computation of
        // the steady-state whitened response.
        for (tau, want) in [(0.7, 9), (0.8, 8), (0.9, 7), (1.0, 0)] {
            let spec = TrellisSpec::for_profile(&default_profile(tau), 32).unwrap();
            assert_eq!(spec.memory, want, "tau={}", tau);
        }
    }

    #[test]
    fn mbcjr_rejects_bad_parameters() {
        let isi = IsiProfile::from_taps(0.8, vec![1.0, 0.3]);
        let y = [0.1, -0.2];
        assert!(matches!(
            mbcjr_detect(&y, &isi, 1.0, 0.5, &TrellisSpec { memory: 1, m: 0 }),
            Err(DetectError::BadSurvivorCount { .. })
        ));
        assert!(matches!(
            mbcjr_detect(&y, &isi, 1.0, 0.5, &TrellisSpec { memory: 21, m: 4 }),
            Err(DetectError::MemoryTooLarge { .. })
        ));
    }

    #[test]
    fn mbcjr_frame_errors_monotone_in_survivors() {
        use crate::channel::{sigma_from_ebn0, DiscreteChannel};
        let isi = default_profile(0.8);
        let es = 1.0;
        // Uncoded Eb/N0 of 2 dB: low enough that M = 1 visibly errs.
        let noise = sigma_from_ebn0(2.0, 1.0, es, 10);
        let n0 = noise.n0;
        let chan = DiscreteChannel::new(&isi, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut frames = Vec::new();
        for _ in 0..1000 {
            let a = random_symbols(&mut rng, 32);
            let y = chan.transmit(&a, es, &noise, &mut rng);
            frames.push((a, y));
        }
        let mut errs = Vec::new();
        for m in [1usize, 2, 4, 8] {
            let spec = TrellisSpec { m, ..TrellisSpec::for_profile(&isi, m).unwrap() };
            let mut fe = 0;
            for (a, y) in &frames {
                let llrs = mbcjr_detect(y, &isi, es, n0, &spec).unwrap();
                if llrs.iter().zip(a).any(|(l, s)| (*l < 0.0) != (*s < 0.0)) {
                    fe += 1;
                }
            }
            errs.push(fe);
        }
        // Metric ties may flip the odd frame; allow 1% slack.
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 10, "frame errors {:?} not monotone", errs);
        }
        assert!(errs[0] > errs[3], "expected pruning at M=1 to cost errors: {:?}", errs);
    }
}
