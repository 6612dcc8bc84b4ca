//! Experiment files: a TOML document with one `[[sweep]]` table per
//! simulation, resolved here into `ftnsim` configs.
//!
//! Paths inside the file (the `pcm` field) are resolved relative to the
//! file's own directory first, then the working directory, so presets keep
//! working no matter where the binary is launched from.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use ftnsim::galois::default_field;
use ftnsim::ldpc::parse_alist;
use ftnsim::montecarlo::{ChannelModel, CodeSpec, DetectorSpec, SimConfig};
use ftnsim::nbldpc::{parse_nb_alist, EmsConfig};
use ftnsim::waveform::PulseSpec;

/// A problem with the experiment file itself, as opposed to an I/O or
/// simulation failure. These exit with status 2 and always name the field
/// (and sweep) that caused them.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err<T>(msg: String) -> Result<T, ConfigError> {
    Err(ConfigError(msg))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "sweep")]
    pub sweeps: Vec<SweepToml>,
}

fn default_max_frames() -> u64 {
    100_000
}
fn default_target() -> u64 {
    30
}
fn default_max_iter() -> usize {
    10
}
fn default_n_m() -> usize {
    20
}
fn default_offset() -> f64 {
    0.3
}
fn default_bubbles() -> usize {
    4
}
fn default_rolloff() -> f64 {
    0.3
}
fn default_sps() -> usize {
    10
}
fn default_span() -> usize {
    8
}
fn default_channel() -> String {
    "discrete".into()
}

/// One `[[sweep]]` table, exactly as written. Everything beyond the code
/// and detector choice has a default matching the library's conventions.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SweepToml {
    pub name: String,
    pub tau: f64,
    /// "uncoded", "ldpc", or "nbldpc".
    pub code: String,
    /// Parity-check matrix in alist form; required for coded sweeps.
    #[serde(default)]
    pub pcm: Option<String>,
    /// Uncoded frame length in bits; required when `code = "uncoded"`.
    #[serde(default)]
    pub bits: Option<usize>,
    /// "ssse", "gbk", or "mbcjr".
    pub detector: String,
    /// Go-back depth for "gbk".
    #[serde(default)]
    pub k: Option<usize>,
    /// Survivor budget for "mbcjr".
    #[serde(default)]
    pub m: Option<usize>,
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_target")]
    pub target_frame_errors: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_n_m")]
    pub n_m: usize,
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_bubbles")]
    pub bubbles: usize,
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    #[serde(default = "default_sps")]
    pub sps: usize,
    #[serde(default = "default_span")]
    pub span: usize,
    /// "discrete" (symbol-rate model) or "waveform" (oversampled front end).
    #[serde(default = "default_channel")]
    pub channel: String,
}

/// A sweep resolved against the filesystem and global flags: ready to run.
pub struct ResolvedSweep {
    pub name: String,
    pub sim: SimConfig,
    /// Path the PCM was loaded from, for the CSV metadata header.
    pub pcm_path: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let file: FileConfig = toml::from_str(&text)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if file.sweeps.is_empty() {
        return cfg_err(format!("{}: no [[sweep]] tables", path.display()));
    }
    Ok(file)
}

fn resolve_path(raw: &str, config_dir: &Path) -> PathBuf {
    let p = Path::new(raw);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    let beside = config_dir.join(p);
    if beside.exists() {
        beside
    } else {
        p.to_path_buf()
    }
}

/// Global knobs from the command line that override per-file settings.
#[derive(Default, Clone, Copy)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Restore publication-scale stopping rules: 100 frame errors or
    /// 500k frames per point.
    pub paper_scale: bool,
}

pub fn resolve_sweep(
    sw: &SweepToml,
    config_dir: &Path,
    file_seed: Option<u64>,
    ov: Overrides,
) -> Result<ResolvedSweep, ConfigError> {
    let field_err = |field: &str, msg: &str| {
        ConfigError(format!("sweep '{}': field `{field}`: {msg}", sw.name))
    };

    if !(sw.tau > 0.0 && sw.tau <= 1.0) {
        return Err(field_err("tau", "must be in (0, 1]"));
    }

    let mut pcm_path = None;
    let code = match sw.code.as_str() {
        "uncoded" => {
            let bits = sw
                .bits
                .ok_or_else(|| field_err("bits", "required when code = \"uncoded\""))?;
            if bits == 0 {
                return Err(field_err("bits", "must be positive"));
            }
            CodeSpec::Uncoded { bits }
        }
        "ldpc" | "nbldpc" => {
            let raw = sw
                .pcm
                .as_deref()
                .ok_or_else(|| field_err("pcm", "required for coded sweeps"))?;
            let path = resolve_path(raw, config_dir);
            let text = fs::read_to_string(&path).map_err(|e| {
                field_err("pcm", &format!("cannot read {}: {e}", path.display()))
            })?;
            pcm_path = Some(path.clone());
            if sw.code == "ldpc" {
                let pcm = parse_alist(&text).map_err(|e| {
                    field_err("pcm", &format!("{}: {e}", path.display()))
                })?;
                CodeSpec::Ldpc(pcm)
            } else {
                let q = nb_alist_q(&text).ok_or_else(|| {
                    field_err("pcm", "not a GF(q) alist (header needs N M q)")
                })?;
                let m = q_to_m(q).ok_or_else(|| {
                    field_err("pcm", &format!("field size {q} is not 2^m with m in 1..=8"))
                })?;
                let field = default_field(m)
                    .map_err(|e| field_err("pcm", &format!("{e:?}")))?;
                let pcm = parse_nb_alist(&text, &field).map_err(|e| {
                    field_err("pcm", &format!("{}: {e}", path.display()))
                })?;
                let ems = EmsConfig {
                    n_m: sw.n_m,
                    offset: sw.offset,
                    bubbles: sw.bubbles,
                    max_iter: sw.max_iter,
                };
                CodeSpec::NbLdpc { pcm, ems }
            }
        }
        other => {
            return Err(field_err(
                "code",
                &format!("unknown kind \"{other}\" (expected uncoded, ldpc, or nbldpc)"),
            ))
        }
    };

    let detector = match sw.detector.as_str() {
        "ssse" => DetectorSpec::Ssse,
        "gbk" => {
            let k = sw
                .k
                .ok_or_else(|| field_err("k", "required when detector = \"gbk\""))?;
            DetectorSpec::Gbk { k }
        }
        "mbcjr" => {
            let m = sw
                .m
                .ok_or_else(|| field_err("m", "required when detector = \"mbcjr\""))?;
            if m == 0 {
                return Err(field_err("m", "must be positive"));
            }
            DetectorSpec::Mbcjr { m }
        }
        other => {
            return Err(field_err(
                "detector",
                &format!("unknown kind \"{other}\" (expected ssse, gbk, or mbcjr)"),
            ))
        }
    };

    let channel_model = match sw.channel.as_str() {
        "discrete" => ChannelModel::Discrete,
        "waveform" => ChannelModel::Waveform,
        other => {
            return Err(field_err(
                "channel",
                &format!("unknown model \"{other}\" (expected discrete or waveform)"),
            ))
        }
    };

    let mut sim = SimConfig::new(sw.tau, code, detector);
    sim.pulse = PulseSpec { rolloff: sw.rolloff, sps: sw.sps, span: sw.span };
    sim.channel_model = channel_model;
    sim.ebn0_db = sw.ebn0_db.clone();
    sim.max_frames = sw.max_frames;
    sim.target_frame_errors = sw.target_frame_errors;
    sim.max_iter = sw.max_iter;
    sim.seed = ov.seed.or(sw.seed).or(file_seed).unwrap_or(1);
    if ov.paper_scale {
        sim.target_frame_errors = 100;
        sim.max_frames = 500_000;
    }

    if sim.ebn0_db.is_empty() {
        return Err(field_err("ebn0_db", "must list at least one point"));
    }

    Ok(ResolvedSweep { name: sw.name.clone(), sim, pcm_path })
}

/// Third integer of the first line, if there are exactly three (the GF(q)
/// alist dialect). Binary alists have two and get `None`.
fn nb_alist_q(text: &str) -> Option<usize> {
    let first = text.lines().find(|l| !l.trim().is_empty())?;
    let nums: Vec<usize> = first
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .ok()?;
    if nums.len() == 3 {
        Some(nums[2])
    } else {
        None
    }
}

fn q_to_m(q: usize) -> Option<u32> {
    (1..=8).find(|&m| 1usize << m == q)
}
