//! Command line front end for the `ftnsim` library.
//!
//! Experiments are described in a TOML file (see `config`); each `[[sweep]]`
//! table becomes one BER-vs-SNR curve and one CSV file. Exit status 2 marks
//! a problem with the experiment file or arguments, 1 any runtime failure.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ftnsim::detectors::TrellisSpec;
use ftnsim::galois::default_field;
use ftnsim::ldpc::{generate_bin_pcm, write_alist};
use ftnsim::montecarlo::{
    self, decoder_profile, records_to_csv, BerRecord, CodeSpec, DetectorSpec, SimConfig,
};
use ftnsim::nbldpc::{generate_nb_pcm, write_nb_alist};
use ftnsim::opcount::{
    gbk_detector_ops, mbcjr_detector_ops, total_ops, GateWeights,
};
use ftnsim::waveform::{isi_profile, rrc_taps};

use config::{load_file, ConfigError, Overrides, ResolvedSweep};

#[derive(Parser)]
#[command(name = "ftnsim", version, about = "Coded faster-than-Nyquist link simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every sweep in an experiment file; one CSV per sweep.
    Run(RunArgs),
    /// Run a single sweep from an experiment file.
    Sweep(SweepArgs),
    /// Validate an experiment file and print the resolved plan.
    DryRun(DryRunArgs),
    /// Generate a parity-check matrix and write it as an alist file.
    GenPcm(GenPcmArgs),
    /// Tally gate-level cost per SNR point for every sweep in a file.
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed of every sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Publication-scale stopping rules: 100 frame errors or 500k frames
    /// per point, instead of the file's budgets.
    #[arg(long)]
    paper_scale: bool,
    /// Directory for result files (default: the file's out_dir, else ".").
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which sweep to run; may be omitted when the file has exactly one.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct DryRunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed of every sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Show publication-scale budgets instead of the file's.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct GenPcmArgs {
    /// Code family: "bin" or "nb".
    #[arg(long)]
    kind: String,
    /// Codeword length in bits.
    #[arg(long)]
    bits: usize,
    /// Code rate; bits * rate must be a whole number of info bits.
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    /// Column weight (binary codes only).
    #[arg(long, default_value_t = 3)]
    dv: usize,
    /// Field size (nonbinary codes only); a power of two up to 256.
    #[arg(long, default_value_t = 64)]
    q: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path for the alist file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ComplexityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bit width of the datapath a gate count assumes.
    #[arg(long, default_value_t = 10)]
    gate_bits: u32,
    /// Technology scale factor applied to every gate count.
    #[arg(long, default_value_t = 1.0)]
    gate_scale: f64,
}

enum CliError {
    /// Bad experiment file or arguments; exits with status 2.
    Config(String),
    /// Everything else; exits with status 1.
    Other(anyhow::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(a) => cmd_run(&a.common, None),
        Cmd::Sweep(a) => cmd_run(&a.common, Some(a.name)),
        Cmd::DryRun(a) => cmd_dry_run(&a),
        Cmd::GenPcm(a) => cmd_gen_pcm(&a),
        Cmd::Complexity(a) => cmd_complexity(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Resolve the experiment file plus command line into runnable sweeps and
/// the output directory.
fn prepare(common: &CommonArgs) -> Result<(Vec<ResolvedSweep>, PathBuf), CliError> {
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        // Ignore "already built": tests drive several commands in-process.
        let _ = montecarlo::set_worker_threads(n);
    }
    let file = load_file(&common.config)?;
    let dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let ov = Overrides { seed: common.seed, paper_scale: common.paper_scale };
    let sweeps = file
        .sweeps
        .iter()
        .map(|sw| config::resolve_sweep(sw, &dir, file.seed, ov))
        .collect::<Result<Vec<_>, _>>()?;
    let out_dir = common
        .out_dir
        .clone()
        .or_else(|| file.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((sweeps, out_dir))
}

fn cmd_run(common: &CommonArgs, only: Option<Option<String>>) -> Result<(), CliError> {
    let (mut sweeps, out_dir) = prepare(common)?;

    // `sweep` narrows the list to one entry; `run` takes them all.
    if let Some(name) = only {
        match name {
            Some(n) => {
                sweeps.retain(|s| s.name == n);
                if sweeps.is_empty() {
                    return Err(CliError::Config(format!("no sweep named '{n}'")));
                }
            }
            None if sweeps.len() == 1 => {}
            None => {
                return Err(CliError::Config(
                    "file has several sweeps; pick one with --name".into(),
                ))
            }
        }
    }

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(CliError::Other)?;

    for rs in &sweeps {
        println!(
            "sweep {}: {} + {}, tau {}, {} points",
            rs.name,
            describe_code(&rs.sim.code),
            describe_detector(&rs.sim.detector),
            rs.sim.tau,
            rs.sim.ebn0_db.len()
        );
        let mut records = Vec::new();
        for &snr in &rs.sim.ebn0_db {
            let rec = montecarlo::run_point(&rs.sim, snr)
                .map_err(|e| CliError::Other(anyhow::anyhow!("sweep {}: {e:?}", rs.name)))?;
            println!(
                "  {:5.2} dB  ber {:.3e}  fer {:.3e}  ({} frames, {:.1} avg iters, {:.1}s)",
                rec.ebn0_db, rec.ber, rec.fer, rec.frames, rec.avg_iters, rec.seconds
            );
            records.push(rec);
        }
        let path = out_dir.join(format!("{}.csv", rs.name));
        let csv = records_to_csv(&records, &sweep_metadata(rs));
        fs::write(&path, csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::Other)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}

fn cmd_dry_run(args: &DryRunArgs) -> Result<(), CliError> {
    let file = load_file(&args.config)?;
    let dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let ov = Overrides { seed: args.seed, paper_scale: args.paper_scale };
    println!("experiment {}: {} sweeps", args.config.display(), file.sweeps.len());
    for sw in &file.sweeps {
        let rs = config::resolve_sweep(sw, &dir, file.seed, ov)?;
        let sim = &rs.sim;
        println!(
            "  {}: {} + {}, tau {}, {} channel",
            rs.name,
            describe_code(&sim.code),
            describe_detector(&sim.detector),
            sim.tau,
            match sim.channel_model {
                montecarlo::ChannelModel::Discrete => "discrete",
                montecarlo::ChannelModel::Waveform => "waveform",
            }
        );
        println!(
            "    {} info bits/frame, rate {:.3}; points {:?} dB; stop at {} frame errors or {} frames; max {} iters; seed {}",
            sim.info_bits(),
            sim.code_rate(),
            sim.ebn0_db,
            sim.target_frame_errors,
            sim.max_frames,
            sim.max_iter,
            sim.seed
        );
    }
    println!("ok");
    Ok(())
}

fn cmd_gen_pcm(args: &GenPcmArgs) -> Result<(), CliError> {
    let cfg_err = |msg: String| CliError::Config(msg);
    if !(args.rate > 0.0 && args.rate < 1.0) {
        return Err(cfg_err("--rate must be in (0, 1)".into()));
    }
    let text = match args.kind.as_str() {
        "bin" => {
            let n = args.bits;
            let k = exact_product(n, args.rate)
                .ok_or_else(|| cfg_err(format!("--bits {n} times --rate {} is not an integer", args.rate)))?;
            let m = n - k;
            if args.dv == 0 || args.dv >= m {
                return Err(cfg_err(format!("--dv {} out of range for {m} checks", args.dv)));
            }
            let pcm = generate_bin_pcm(n, m, args.dv, args.seed);
            println!("binary {m}x{n} parity-check matrix, column weight {}", args.dv);
            write_alist(&pcm)
        }
        "nb" => {
            let mb = (1..=8u32)
                .find(|&m| 1usize << m == args.q)
                .ok_or_else(|| cfg_err(format!("--q {} is not 2^m with m in 1..=8", args.q)))?;
            if args.bits % mb as usize != 0 {
                return Err(cfg_err(format!(
                    "--bits {} is not a multiple of log2(q) = {mb}",
                    args.bits
                )));
            }
            let n = args.bits / mb as usize;
            let k = exact_product(n, args.rate).ok_or_else(|| {
                cfg_err(format!("{n} symbols times --rate {} is not an integer", args.rate))
            })?;
            let m = n - k;
            if m < 3 {
                return Err(cfg_err(format!("need at least 3 check symbols, got {m}")));
            }
            let field = default_field(mb).map_err(|e| cfg_err(format!("{e:?}")))?;
            let pcm = generate_nb_pcm(n, m, &field, args.seed);
            println!("GF({}) {m}x{n} parity-check matrix ({} bits per codeword)", args.q, args.bits);
            write_nb_alist(&pcm)
        }
        other => {
            return Err(cfg_err(format!("--kind {other:?} (expected bin or nb)")));
        }
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))
                .map_err(CliError::Other)?;
        }
    }
    fs::write(&args.out, text)
        .with_context(|| format!("writing {}", args.out.display()))
        .map_err(CliError::Other)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// n * rate when that is an integer (to float precision), else None.
fn exact_product(n: usize, rate: f64) -> Option<usize> {
    let k = n as f64 * rate;
    let r = k.round();
    if (k - r).abs() < 1e-9 && r >= 1.0 {
        Some(r as usize)
    } else {
        None
    }
}

fn cmd_complexity(args: &ComplexityArgs) -> Result<(), CliError> {
    let (sweeps, out_dir) = prepare(&args.common)?;
    let weights = GateWeights { bits: args.gate_bits, scale: args.gate_scale };

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(CliError::Other)?;

    let mut csv = String::new();
    csv.push_str(&format!("# gate_bits = {}\n", weights.bits));
    csv.push_str(&format!("# gate_scale = {}\n", weights.scale));
    csv.push_str(
        "# total_gate_ops = detector + per-check decoder tally x checks x measured avg iterations, per frame\n",
    );
    csv.push_str("snr_db,scheme,total_gate_ops\n");

    for rs in &sweeps {
        let sim = &rs.sim;
        let det_ops = detector_gate_ops(sim, &weights)?;
        let (per_iter, num_checks) = decoder_profile(&sim.code);
        println!(
            "scheme {}: detector {:.0} gate ops/frame, {} checks",
            rs.name, det_ops, num_checks
        );
        for &snr in &sim.ebn0_db {
            let rec: BerRecord = montecarlo::run_point(sim, snr)
                .map_err(|e| CliError::Other(anyhow::anyhow!("sweep {}: {e:?}", rs.name)))?;
            let total = total_ops(&per_iter, num_checks, rec.avg_iters, &weights, det_ops);
            println!(
                "  {:5.2} dB  {:.0} gate ops/frame ({:.2} avg iters)",
                snr, total, rec.avg_iters
            );
            csv.push_str(&format!("{},{},{:.3}\n", snr, rs.name, total));
        }
    }

    let path = out_dir.join("complexity.csv");
    fs::write(&path, csv)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Other)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Per-frame detector cost under the configured pulse and tau.
fn detector_gate_ops(sim: &SimConfig, w: &GateWeights) -> Result<f64, CliError> {
    let taps = rrc_taps(sim.pulse)
        .map_err(|e| CliError::Other(anyhow::anyhow!("pulse: {e:?}")))?;
    let isi = isi_profile(&taps, sim.tau, sim.isi_threshold)
        .map_err(|e| CliError::Other(anyhow::anyhow!("isi profile: {e:?}")))?;
    let n = sim.frame_symbols();
    Ok(match sim.detector {
        DetectorSpec::Ssse => gbk_detector_ops(n, isi.g.len(), 0, w),
        DetectorSpec::Gbk { k } => gbk_detector_ops(n, isi.g.len(), k, w),
        DetectorSpec::Mbcjr { m } => {
            let tr = TrellisSpec::for_profile(&isi, m)
                .map_err(|e| CliError::Other(anyhow::anyhow!("trellis: {e:?}")))?;
            mbcjr_detector_ops(n, tr.m, w)
        }
    })
}

fn describe_code(code: &CodeSpec) -> String {
    match code {
        CodeSpec::Uncoded { bits } => format!("uncoded {bits} bits"),
        CodeSpec::Ldpc(pcm) => format!("ldpc {}x{}", pcm.m, pcm.n),
        CodeSpec::NbLdpc { pcm, .. } => {
            format!("nbldpc {}x{} GF({})", pcm.m, pcm.n, pcm.field.q())
        }
    }
}

fn describe_detector(det: &DetectorSpec) -> String {
    match det {
        DetectorSpec::Ssse => "ssse".into(),
        DetectorSpec::Gbk { k } => format!("gbk(K={k})"),
        DetectorSpec::Mbcjr { m } => format!("mbcjr(M={m})"),
    }
}

/// CSV header comments. Everything here derives from the configuration, not
/// the run, so identical configs produce identical files.
fn sweep_metadata(rs: &ResolvedSweep) -> Vec<(String, String)> {
    let sim = &rs.sim;
    let kv = |k: &str, v: String| (k.to_string(), v);
    let mut md = vec![
        kv("name", rs.name.clone()),
        kv("tau", format!("{}", sim.tau)),
        kv("code", describe_code(&sim.code)),
        kv("detector", describe_detector(&sim.detector)),
        kv(
            "channel",
            match sim.channel_model {
                montecarlo::ChannelModel::Discrete => "discrete".into(),
                montecarlo::ChannelModel::Waveform => "waveform".into(),
            },
        ),
        kv("rolloff", format!("{}", sim.pulse.rolloff)),
        kv("sps", format!("{}", sim.pulse.sps)),
        kv("span", format!("{}", sim.pulse.span)),
        kv("info_bits", format!("{}", sim.info_bits())),
        kv("code_rate", format!("{:.6}", sim.code_rate())),
        kv("max_frames", format!("{}", sim.max_frames)),
        kv("target_frame_errors", format!("{}", sim.target_frame_errors)),
        kv("max_iter", format!("{}", sim.max_iter)),
        kv("seed", format!("{}", sim.seed)),
    ];
    if let Some(p) = &rs.pcm_path {
        md.push(kv("pcm", p.display().to_string()));
    }
    if let CodeSpec::NbLdpc { ems, .. } = &sim.code {
        md.push(kv("n_m", format!("{}", ems.n_m)));
        md.push(kv("offset", format!("{}", ems.offset)));
        md.push(kv("bubbles", format!("{}", ems.bubbles)));
    }
    md.push(kv(
        "avg_ops_note",
        "decoder work per frame: per-check-node tally x checks x iterations used".into(),
    ));
    md
}
