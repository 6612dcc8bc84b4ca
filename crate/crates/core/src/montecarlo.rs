//! End-to-end BER/FER measurement.
//!
//! Each frame runs the full chain: encode, BPSK-map, faster-than-Nyquist
//! channel, detect, demodulate, decode, count information-bit errors. Frames
//! are seeded by (point seed, frame index), never by worker identity, and
//! the results are folded in frame order with the stop condition applied
//! exactly at the frame that reaches the target error count. Statistics are
//! therefore byte-identical across repeat runs and across thread counts.

use crate::channel::{add_awgn, sigma_from_ebn0, DiscreteChannel, NoiseSpec};
use crate::detectors::{
    demod_soft, gbk_detect, mbcjr_detect, ssse_detect, DetectError, GbkConfig, TrellisSpec,
    DEFAULT_LLR_CAP,
};
use crate::ldpc::{min_sum_decode, BinEncoder, BinPcm};
use crate::nbldpc::{
    bitllr_to_symbolllr, ems_decode, symbol_to_bits, EmsConfig, NbEncoder, NbPcm,
};
use crate::opcount::{ldpc_ops, nbldpc_ops, OpCounts};
use crate::waveform::{
    ftn_transmit, isi_profile, matched_filter_sample, modulate_bpsk, rrc_taps, IsiProfile,
    PulseSpec, PulseTaps, WaveformError, DEFAULT_ISI_THRESHOLD,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Code under test.
#[derive(Debug, Clone)]
pub enum CodeSpec {
    /// Raw detector output, frame of this many bits.
    Uncoded { bits: usize },
    Ldpc(BinPcm),
    NbLdpc { pcm: NbPcm, ems: EmsConfig },
}

/// Detector under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorSpec {
    Ssse,
    /// Go-back-K re-estimation.
    Gbk { k: usize },
    /// Reduced-state BCJR with M survivors.
    Mbcjr { m: usize },
}

/// Whether frames run through the sampled waveform or the equivalent
/// discrete Gram-matrix shortcut (the default; identical statistics, far
/// cheaper).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Discrete,
    Waveform,
}

/// One experiment: a scheme, a channel, an SNR sweep and a stop rule.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub tau: f64,
    pub pulse: PulseSpec,
    pub isi_threshold: f64,
    pub code: CodeSpec,
    pub detector: DetectorSpec,
    pub channel_model: ChannelModel,
    pub ebn0_db: Vec<f64>,
    pub max_frames: u64,
    pub target_frame_errors: u64,
    /// Decoder iteration cap (both codecs).
    pub max_iter: usize,
    pub seed: u64,
}

impl SimConfig {
    /// A desk-scale default: fill in code, detector and SNR list.
    pub fn new(tau: f64, code: CodeSpec, detector: DetectorSpec) -> Self {
        SimConfig {
            tau,
            pulse: PulseSpec::default(),
            isi_threshold: DEFAULT_ISI_THRESHOLD,
            code,
            detector,
            channel_model: ChannelModel::Discrete,
            ebn0_db: Vec::new(),
            max_frames: 100_000,
            target_frame_errors: 30,
            max_iter: 10,
            seed: 1,
        }
    }

    /// Channel symbols per frame (BPSK: one per bit).
    pub fn frame_symbols(&self) -> usize {
        match &self.code {
            CodeSpec::Uncoded { bits } => *bits,
            CodeSpec::Ldpc(pcm) => pcm.n,
            CodeSpec::NbLdpc { pcm, .. } => pcm.n * pcm.field.m() as usize,
        }
    }

    /// Information bits per frame.
    pub fn info_bits(&self) -> usize {
        match &self.code {
            CodeSpec::Uncoded { bits } => *bits,
            CodeSpec::Ldpc(pcm) => BinEncoder::new(pcm).msg_len(),
            CodeSpec::NbLdpc { pcm, .. } => {
                NbEncoder::new(pcm).msg_len() * pcm.field.m() as usize
            }
        }
    }

    pub fn code_rate(&self) -> f64 {
        self.info_bits() as f64 / self.frame_symbols() as f64
    }
}

#[derive(Debug)]
pub enum SimError {
    BadConfig(String),
    Waveform(WaveformError),
    Detect(DetectError),
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimError::BadConfig(msg) => write!(f, "invalid config: {}", msg),
            SimError::Waveform(e) => write!(f, "waveform setup: {}", e),
            SimError::Detect(e) => write!(f, "detector setup: {}", e),
        }
    }
}

impl std::error::Error for SimError {}

impl From<WaveformError> for SimError {
    fn from(e: WaveformError) -> Self {
        SimError::Waveform(e)
    }
}

impl From<DetectError> for SimError {
    fn from(e: DetectError) -> Self {
        SimError::Detect(e)
    }
}

/// One sweep point's accumulated statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iters: f64,
    pub avg_ops: OpCounts,
    pub seconds: f64,
}

/// Everything immutable a frame needs, built once per point.
struct PointSetup {
    isi: IsiProfile,
    taps: PulseTaps,
    chan: DiscreteChannel,
    noise: NoiseSpec,
    trellis: Option<TrellisSpec>,
    bin_enc: Option<BinEncoder>,
    nb_enc: Option<NbEncoder>,
    /// Per-check-node decoder tally for one iteration.
    per_iter: OpCounts,
    num_checks: usize,
    n_sym: usize,
    info_bits: usize,
}

const ES: f64 = 1.0;

fn validate(cfg: &SimConfig) -> Result<(), SimError> {
    let bad = |msg: String| Err(SimError::BadConfig(msg));
    if cfg.target_frame_errors < 1 {
        return bad("target_frame_errors must be at least 1".into());
    }
    if cfg.max_frames < cfg.target_frame_errors {
        return bad(format!(
            "max_frames {} below target_frame_errors {}",
            cfg.max_frames, cfg.target_frame_errors
        ));
    }
    if cfg.max_iter == 0 && !matches!(cfg.code, CodeSpec::Uncoded { .. }) {
        return bad("max_iter must be at least 1 for coded runs".into());
    }
    if cfg.frame_symbols() == 0 {
        return bad("empty frame".into());
    }
    if let CodeSpec::NbLdpc { pcm, ems } = &cfg.code {
        if ems.n_m < 2 || ems.n_m > pcm.field.q() {
            return bad(format!("n_m {} outside 2..={}", ems.n_m, pcm.field.q()));
        }
        if ems.bubbles < 1 {
            return bad("bubbles must be at least 1".into());
        }
    }
    Ok(())
}

/// Per-check-node operation tally and check count for a code's decoder.
///
/// Degrees are the rounded average column and row weights, so irregular
/// codes get a representative count rather than a per-node sum. Uncoded
/// transmissions cost nothing here.
pub fn decoder_profile(code: &CodeSpec) -> (OpCounts, usize) {
    match code {
        CodeSpec::Uncoded { .. } => (OpCounts::zero(), 0),
        CodeSpec::Ldpc(pcm) => {
            let edges = pcm.num_edges() as f64;
            let d_c = (edges / pcm.m as f64).round() as usize;
            let d_v = (edges / pcm.n as f64).round() as usize;
            (ldpc_ops(d_c.max(2), d_v.max(1)), pcm.m)
        }
        CodeSpec::NbLdpc { pcm, ems } => {
            let edges: usize = pcm.rows.iter().map(Vec::len).sum();
            let d_c = ((edges as f64) / pcm.m as f64).round() as usize;
            let d_v = ((edges as f64) / pcm.n as f64).round() as usize;
            (nbldpc_ops(d_c.max(2), d_v.max(2), ems.n_m, pcm.field.q()), pcm.m)
        }
    }
}

fn setup_point(cfg: &SimConfig, ebn0_db: f64) -> Result<PointSetup, SimError> {
    validate(cfg)?;
    let taps = rrc_taps(cfg.pulse)?;
    let isi = isi_profile(&taps, cfg.tau, cfg.isi_threshold)?;
    let n_sym = cfg.frame_symbols();
    let chan = DiscreteChannel::new(&isi, n_sym)?;
    let info_bits = cfg.info_bits();
    let rate = info_bits as f64 / n_sym as f64;
    let noise = sigma_from_ebn0(ebn0_db, rate, ES, cfg.pulse.sps);
    let trellis = match cfg.detector {
        DetectorSpec::Mbcjr { m } => Some(TrellisSpec::for_profile(&isi, m)?),
        _ => None,
    };
    let (per_iter, num_checks) = decoder_profile(&cfg.code);
    let (bin_enc, nb_enc) = match &cfg.code {
        CodeSpec::Uncoded { .. } => (None, None),
        CodeSpec::Ldpc(pcm) => (Some(BinEncoder::new(pcm)), None),
        CodeSpec::NbLdpc { pcm, .. } => (None, Some(NbEncoder::new(pcm))),
    };
    Ok(PointSetup {
        isi,
        taps,
        chan,
        noise,
        trellis,
        bin_enc,
        nb_enc,
        per_iter,
        num_checks,
        n_sym,
        info_bits,
    })
}

/// (point seed, frame index) -> independent generator. Worker identity and
/// scheduling order never enter.
fn frame_rng(point_seed: u64, frame: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&point_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&frame.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

struct FrameStats {
    bit_errors: u64,
    frame_error: bool,
    iters: u64,
    ops: OpCounts,
}

fn run_frame(cfg: &SimConfig, sp: &PointSetup, point_seed: u64, frame: u64) -> FrameStats {
    let mut rng = frame_rng(point_seed, frame);

    // Source and encoder.
    let (tx_bits, nb_codeword): (Vec<u8>, Option<Vec<u8>>) = match &cfg.code {
        CodeSpec::Uncoded { bits } => {
            ((0..*bits).map(|_| rng.gen_range(0..2u8)).collect(), None)
        }
        CodeSpec::Ldpc(_) => {
            let enc = sp.bin_enc.as_ref().unwrap();
            let msg: Vec<u8> = (0..enc.msg_len()).map(|_| rng.gen_range(0..2u8)).collect();
            (enc.encode(&msg), None)
        }
        CodeSpec::NbLdpc { pcm, .. } => {
            let enc = sp.nb_enc.as_ref().unwrap();
            let q = pcm.field.q();
            let m = pcm.field.m();
            let msg: Vec<u8> = (0..enc.msg_len()).map(|_| rng.gen_range(0..q) as u8).collect();
            let cw = enc.encode(&msg);
            let bits: Vec<u8> = cw.iter().flat_map(|&s| symbol_to_bits(s, m)).collect();
            (bits, Some(cw))
        }
    };

    // Modulate and push through the channel to matched-filter samples.
    let symbols: Vec<f64> =
        tx_bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
    let y = match cfg.channel_model {
        ChannelModel::Discrete => sp.chan.transmit(&symbols, ES, &sp.noise, &mut rng),
        ChannelModel::Waveform => {
            let frame_syms = modulate_bpsk(&tx_bits, ES);
            let mut w = ftn_transmit(&frame_syms, &sp.taps, cfg.tau).expect("validated");
            add_awgn(&mut w, &sp.noise, &mut rng);
            matched_filter_sample(&w, &sp.taps, cfg.tau, sp.n_sym).expect("validated")
        }
    };

    // Detect: bit LLRs (positive = bit 0) plus hard decisions.
    let bit_llrs: Vec<f64> = match cfg.detector {
        DetectorSpec::Ssse => {
            let hard = ssse_detect(&y, &sp.isi, ES);
            demod_soft(&hard, &y, &sp.isi, ES, sp.noise.n0, DEFAULT_LLR_CAP)
        }
        DetectorSpec::Gbk { k } => {
            let hard = gbk_detect(&y, &sp.isi, ES, GbkConfig { k });
            demod_soft(&hard, &y, &sp.isi, ES, sp.noise.n0, DEFAULT_LLR_CAP)
        }
        DetectorSpec::Mbcjr { .. } => {
            mbcjr_detect(&y, &sp.isi, ES, sp.noise.n0, sp.trellis.as_ref().unwrap())
                .expect("validated")
        }
    };

    // Decode and count information-bit errors.
    match &cfg.code {
        CodeSpec::Uncoded { .. } => {
            let bit_errors = bit_llrs
                .iter()
                .zip(&tx_bits)
                .filter(|(&l, &b)| u8::from(l < 0.0) != b)
                .count() as u64;
            FrameStats { bit_errors, frame_error: bit_errors > 0, iters: 0, ops: OpCounts::zero() }
        }
        CodeSpec::Ldpc(pcm) => {
            let res = min_sum_decode(pcm, &bit_llrs, cfg.max_iter);
            let enc = sp.bin_enc.as_ref().unwrap();
            let bit_errors = enc
                .free_cols()
                .iter()
                .filter(|&&c| res.hard_bits[c] != tx_bits[c])
                .count() as u64;
            FrameStats {
                bit_errors,
                frame_error: bit_errors > 0,
                iters: res.iterations_used as u64,
                ops: sp.per_iter.scaled((sp.num_checks * res.iterations_used) as f64),
            }
        }
        CodeSpec::NbLdpc { pcm, ems } => {
            let m = pcm.field.m();
            let llrs: Vec<Vec<f64>> = bit_llrs
                .chunks(m as usize)
                .map(|chunk| bitllr_to_symbolllr(chunk, &pcm.field))
                .collect();
            let cfg_ems = EmsConfig { max_iter: cfg.max_iter, ..*ems };
            let res = ems_decode(pcm, &llrs, &cfg_ems);
            let cw = nb_codeword.as_ref().unwrap();
            // Message symbols occupy the tail of the codeword.
            let first_msg = pcm.n - sp.nb_enc.as_ref().unwrap().msg_len();
            let bit_errors: u64 = res.symbols[first_msg..]
                .iter()
                .zip(&cw[first_msg..])
                .map(|(&a, &b)| (a ^ b).count_ones() as u64)
                .sum();
            FrameStats {
                bit_errors,
                frame_error: bit_errors > 0,
                iters: res.iterations_used as u64,
                ops: sp.per_iter.scaled((sp.num_checks * res.iterations_used) as f64),
            }
        }
    }
}

/// Simulate one operating point with an explicit seed.
///
/// Frames run in parallel chunks but fold strictly in frame order, stopping
/// at the exact frame that reaches the target error count, so the record
/// does not depend on the worker count.
pub fn run_point_seeded(
    cfg: &SimConfig,
    ebn0_db: f64,
    point_seed: u64,
) -> Result<BerRecord, SimError> {
    let sp = setup_point(cfg, ebn0_db)?;
    let start = Instant::now();
    const CHUNK: u64 = 64;
    let mut frames = 0u64;
    let mut bit_errors = 0u64;
    let mut frame_errors = 0u64;
    let mut iters = 0u64;
    let mut ops = OpCounts::zero();
    'outer: for chunk_start in (0..cfg.max_frames).step_by(CHUNK as usize) {
        let chunk_end = (chunk_start + CHUNK).min(cfg.max_frames);
        let stats: Vec<FrameStats> = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|f| run_frame(cfg, &sp, point_seed, f))
            .collect();
        for st in stats {
            frames += 1;
            bit_errors += st.bit_errors;
            frame_errors += u64::from(st.frame_error);
            iters += st.iters;
            ops = ops.plus(&st.ops);
            if frame_errors >= cfg.target_frame_errors {
                break 'outer;
            }
        }
    }
    let denom = (frames * sp.info_bits as u64) as f64;
    Ok(BerRecord {
        ebn0_db,
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / denom,
        fer: frame_errors as f64 / frames as f64,
        avg_iters: iters as f64 / frames as f64,
        avg_ops: ops.scaled(1.0 / frames as f64),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Simulate one operating point. The per-point seed is the config seed XOR
/// the point's position in the configured SNR list (0 when absent), the
/// same derivation [`sweep`] uses.
pub fn run_point(cfg: &SimConfig, ebn0_db: f64) -> Result<BerRecord, SimError> {
    let idx = cfg.ebn0_db.iter().position(|&e| e == ebn0_db).unwrap_or(0);
    run_point_seeded(cfg, ebn0_db, cfg.seed ^ idx as u64)
}

/// Cap the global worker pool at `n` threads. Must run before any parallel
/// work; afterwards the pool is already built and this reports an error.
/// Results never depend on the worker count, only throughput does.
pub fn set_worker_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// One record per configured SNR, in order.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>, SimError> {
    if cfg.ebn0_db.is_empty() {
        return Err(SimError::BadConfig("empty Eb/N0 list".into()));
    }
    cfg.ebn0_db
        .iter()
        .enumerate()
        .map(|(i, &e)| run_point_seeded(cfg, e, cfg.seed ^ i as u64))
        .collect()
}

/// Fixed CSV header; one row per record.
pub const CSV_HEADER: &str = "ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iters,\
                              avg_ops_add,avg_ops_sub,avg_ops_cmp,avg_ops_xor,seconds";

/// Render records as CSV, metadata first as `# key = value` comments.
pub fn records_to_csv(records: &[BerRecord], metadata: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in metadata {
        s.push_str(&format!("# {} = {}\n", k, v));
    }
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{:.6e},{:.6e},{:.4},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            r.ebn0_db,
            r.frames,
            r.bit_errors,
            r.frame_errors,
            r.ber,
            r.fer,
            r.avg_iters,
            r.avg_ops.additions,
            r.avg_ops.subtractions,
            r.avg_ops.comparisons,
            r.avg_ops.xors,
            r.seconds,
        ));
    }
    s
}

/// Parse CSV produced by [`records_to_csv`], ignoring comment lines.
pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>, String> {
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or("empty CSV")?;
    if header.trim() != CSV_HEADER {
        return Err(format!("unexpected header {:?}", header));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 12 {
                return Err(format!("expected 12 fields, got {}: {:?}", f.len(), line));
            }
            let num =
                |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{}: {:?}", e, s));
            let int =
                |s: &str| s.trim().parse::<u64>().map_err(|e| format!("{}: {:?}", e, s));
            Ok(BerRecord {
                ebn0_db: num(f[0])?,
                frames: int(f[1])?,
                bit_errors: int(f[2])?,
                frame_errors: int(f[3])?,
                ber: num(f[4])?,
                fer: num(f[5])?,
                avg_iters: num(f[6])?,
                avg_ops: OpCounts {
                    additions: num(f[7])?,
                    subtractions: num(f[8])?,
                    comparisons: num(f[9])?,
                    xors: num(f[10])?,
                },
                seconds: num(f[11])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::default_field;
    use crate::ldpc::generate_bin_pcm;
    use crate::nbldpc::generate_nb_pcm;

    fn uncoded_cfg(tau: f64, bits: usize) -> SimConfig {
        SimConfig::new(tau, CodeSpec::Uncoded { bits }, DetectorSpec::Ssse)
    }

    #[test]
    fn uncoded_nyquist_matches_qfunction() {
        // BPSK over AWGN: BER = Q(sqrt(2 Eb/N0)) = erfc(sqrt(Eb/N0))/2.
        let mut cfg = uncoded_cfg(1.0, 128);
        cfg.max_frames = 3000;
        cfg.target_frame_errors = cfg.max_frames;
        let rec = run_point_seeded(&cfg, 4.0, 7).unwrap();
        let ebn0 = 10f64.powf(0.4);
        let expected = 0.5 * libm::erfc(ebn0.sqrt());
        let n = (rec.frames as usize * 128) as f64;
        let se = (expected * (1.0 - expected) / n).sqrt();
        let diff = (rec.ber - expected).abs();
        assert!(diff < 3.0 * se, "ber {} vs {} ({} se)", rec.ber, expected, diff / se);
    }

    #[test]
    fn noise_off_means_no_errors() {
        let f = default_field(2).unwrap();
        let cfgs = [
            uncoded_cfg(0.9, 64),
            SimConfig::new(
                0.9,
                CodeSpec::Ldpc(generate_bin_pcm(64, 32, 3, 1)),
                DetectorSpec::Mbcjr { m: 8 },
            ),
            SimConfig::new(
                0.8,
                CodeSpec::NbLdpc {
                    pcm: generate_nb_pcm(16, 8, &f, 1),
                    ems: EmsConfig { n_m: 4, ..Default::default() },
                },
                DetectorSpec::Gbk { k: 1 },
            ),
        ];
        for mut cfg in cfgs {
            cfg.max_frames = 100;
            cfg.target_frame_errors = 1;
            let rec = run_point_seeded(&cfg, 60.0, 3).unwrap();
            assert_eq!(rec.bit_errors, 0, "{:?} {:?}", cfg.code, cfg.detector);
            assert_eq!(rec.frames, 100);
        }
    }

    #[test]
    fn sweeps_are_deterministic_and_ordered() {
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.ebn0_db = vec![2.0, 3.0, 4.0];
        cfg.max_frames = 300;
        cfg.target_frame_errors = 50;
        let a = sweep(&cfg).unwrap();
        let b = sweep(&cfg).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().map(|r| r.ebn0_db).collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
        for (x, y) in a.iter().zip(&b) {
            let (mut x, mut y) = (x.clone(), y.clone());
            x.seconds = 0.0;
            y.seconds = 0.0;
            assert_eq!(x, y);
        }
        // More noise at lower SNR.
        assert!(a[0].ber >= a[2].ber);
    }

    #[test]
    fn worker_count_does_not_change_statistics() {
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.max_frames = 500;
        cfg.target_frame_errors = 40;
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool2 = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = pool1.install(|| run_point_seeded(&cfg, 3.0, 11)).unwrap();
        let b = pool2.install(|| run_point_seeded(&cfg, 3.0, 11)).unwrap();
        let (mut a, mut b) = (a, b);
        a.seconds = 0.0;
        b.seconds = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn stops_exactly_at_target_frame_errors() {
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.max_frames = 10_000;
        cfg.target_frame_errors = 5;
        let rec = run_point_seeded(&cfg, 0.0, 13).unwrap();
        assert_eq!(rec.frame_errors, 5);
        // The prefix property: a larger target only appends frames.
        cfg.target_frame_errors = 6;
        let rec6 = run_point_seeded(&cfg, 0.0, 13).unwrap();
        assert!(rec6.frames > rec.frames);
        assert_eq!(rec6.frame_errors, 6);
        // Re-running the smaller target reproduces the same cut exactly.
        cfg.target_frame_errors = 5;
        let again = run_point_seeded(&cfg, 0.0, 13).unwrap();
        assert_eq!(again.frames, rec.frames);
        assert_eq!(again.bit_errors, rec.bit_errors);
    }

    #[test]
    fn discrete_and_waveform_models_agree() {
        let mut base = uncoded_cfg(0.8, 64);
        base.max_frames = 1500;
        base.target_frame_errors = base.max_frames;
        let mut wf = base.clone();
        wf.channel_model = ChannelModel::Waveform;
        let a = run_point_seeded(&base, 4.0, 17).unwrap();
        let b = run_point_seeded(&wf, 4.0, 17).unwrap();
        let n = (a.frames * 64) as f64;
        let p = 0.5 * (a.ber + b.ber);
        let se = (2.0 * p * (1.0 - p) / n).sqrt();
        assert!(
            (a.ber - b.ber).abs() < 3.0 * se.max(1e-6),
            "discrete {} vs waveform {}",
            a.ber,
            b.ber
        );
    }

    #[test]
    fn coded_runs_record_iterations_and_ops() {
        let pcm = generate_bin_pcm(64, 32, 3, 2);
        let mut cfg = SimConfig::new(0.9, CodeSpec::Ldpc(pcm), DetectorSpec::Ssse);
        cfg.max_frames = 50;
        cfg.target_frame_errors = cfg.max_frames;
        let rec = run_point_seeded(&cfg, 3.0, 19).unwrap();
        assert!(rec.avg_iters > 0.0);
        assert!(rec.avg_ops.additions > 0.0);
        // Ops are per-frame averages coupled to iteration counts.
        let expected = rec.avg_iters * 32.0 * 6.0;
        assert!(
            (rec.avg_ops.additions - expected).abs() < 1e-6,
            "{} vs {}",
            rec.avg_ops.additions,
            expected
        );
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.ebn0_db = vec![2.0, 4.0];
        cfg.max_frames = 200;
        cfg.target_frame_errors = 20;
        let recs = sweep(&cfg).unwrap();
        let meta = vec![("tau".to_string(), "0.8".to_string())];
        let csv = records_to_csv(&recs, &meta);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(records_to_csv(&parsed, &meta), csv);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.target_frame_errors = 0;
        assert!(matches!(run_point_seeded(&cfg, 2.0, 0), Err(SimError::BadConfig(_))));
        let mut cfg = uncoded_cfg(0.8, 32);
        cfg.ebn0_db = vec![2.0];
        cfg.max_frames = 5;
        cfg.target_frame_errors = 10;
        assert!(matches!(sweep(&cfg), Err(SimError::BadConfig(_))));
        let empty = uncoded_cfg(0.8, 32);
        assert!(matches!(sweep(&empty), Err(SimError::BadConfig(_))));
    }
}
