use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::builder::TypedValueParser;
use clap::Args;
use sqkd_core::attack::{depolarizing_attack, AttackPair};
use sqkd_core::bb84cad::{cad_row, cad_threshold, CadConfig};
use sqkd_core::keyrate::{linspace, noise_threshold, sweep, ChannelKind};
use sqkd_core::loss::{distance_sweep, max_distance, MaxDistance};
use sqkd_core::sim::{run_protocol, ProtocolConfig};
use sqkd_core::verify::fuzz;
use sqkd_core::Mode;

use crate::table::{emit, log10_rate, num, Format, Table};
use crate::{BasisArg, ChannelArg, CliError, ModeArg};

/// Grid points in a default sweep.
pub const DEFAULT_POINTS: usize = 200;
/// Default sweeps run this far past the threshold.
pub const SWEEP_MARGIN: f64 = 0.02;

fn error_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=0.5).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 0.5]"))
    }
}

fn open_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Number of grid points in a sweep.
    #[arg(long, default_value_t = DEFAULT_POINTS, value_parser = clap::value_parser!(u32).range(1..).map(|n| n as usize))]
    points: usize,
    /// Upper end of the Q grid; threshold + 0.02 when absent.
    #[arg(long, value_parser = error_rate)]
    q_max: Option<f64>,
}

impl GridArgs {
    fn grid(&self, threshold: impl FnOnce() -> Result<f64, CliError>) -> Result<Vec<f64>, CliError> {
        let hi = match self.q_max {
            Some(hi) => hi,
            None => (threshold()? + SWEEP_MARGIN).min(0.5),
        };
        Ok(linspace(0.0, hi, self.points))
    }
}

#[derive(Args, Debug)]
pub struct KeyrateArgs {
    #[arg(long, value_enum, default_value = "3")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "dependent")]
    channel: ChannelArg,
    /// Single noise level; sweeps Q when absent.
    #[arg(long, value_parser = error_rate)]
    q: Option<f64>,
    /// Reflection-path X error, custom channel only.
    #[arg(long, value_parser = error_rate)]
    qx: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

pub fn keyrate(a: &KeyrateArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let (mode, kind) = (Mode::from(a.mode), ChannelKind::from(a.channel));
    match (kind, a.qx) {
        (ChannelKind::Custom, None) => return Err(CliError::Usage("--channel custom needs --qx".into())),
        (ChannelKind::Independent | ChannelKind::Dependent, Some(_)) => {
            return Err(CliError::Usage("--qx applies to --channel custom only".into()))
        }
        _ => {}
    }
    let qs = match a.q {
        Some(q) => vec![q],
        None if kind == ChannelKind::Custom => a.grid.grid(|| Ok(0.5 - SWEEP_MARGIN))?,
        None => a.grid.grid(|| Ok(noise_threshold(mode, kind)?))?,
    };
    let mut t = Table::new(&[
        "mode",
        "channel",
        "Q",
        "Q_X",
        "s_ae_lower",
        "h_ab",
        "rate",
        "effective_rate",
        "disagree_overlap_worst",
        "log10_rate",
    ]);
    for r in sweep(mode, kind, &qs, a.qx)? {
        t.push(vec![
            r.mode.number().to_string(),
            r.kind.to_string(),
            num(r.q),
            num(r.q_x),
            num(r.s_ae_lower),
            num(r.h_ab),
            num(r.rate),
            num(r.effective_rate),
            num(r.disagree_overlap_worst),
            log10_rate(r.rate),
        ]);
    }
    Ok(emit(out, |w| t.write(w, format))?)
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    #[arg(long, value_enum, default_value = "3")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "dependent")]
    channel: ChannelArg,
}

pub fn threshold(a: &ThresholdArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    if a.channel == ChannelArg::Custom {
        return Err(CliError::Usage("thresholds need --channel independent or dependent".into()));
    }
    let (mode, kind) = (Mode::from(a.mode), ChannelKind::from(a.channel));
    let q = noise_threshold(mode, kind)?;
    let mut t = Table::new(&["mode", "channel", "threshold"]);
    t.push(vec![mode.number().to_string(), kind.to_string(), num(q)]);
    Ok(emit(out, |w| t.write(w, format))?)
}

#[derive(Args, Debug)]
pub struct CadArgs {
    /// Block size.
    #[arg(long = "c", default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    block: u32,
    /// Number of BB84 states.
    #[arg(long, value_enum, default_value = "6")]
    basis: BasisArg,
    /// Count the qubits of a two-way channel in the effective rate.
    #[arg(long)]
    two_channels: bool,
    /// Single noise level; sweeps Q when absent.
    #[arg(long, value_parser = error_rate, conflicts_with = "threshold")]
    q: Option<f64>,
    /// Print only the threshold.
    #[arg(long)]
    threshold: bool,
    #[command(flatten)]
    grid: GridArgs,
}

pub fn cad(a: &CadArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let basis = a.basis.into();
    if a.threshold {
        let q = cad_threshold(a.block, basis)?;
        let mut t = Table::new(&["protocol_tag", "C", "threshold"]);
        t.push(vec![format!("{}[{}]", basis.tag(), a.block), a.block.to_string(), num(q)]);
        return Ok(emit(out, |w| t.write(w, format))?);
    }
    let qs = match a.q {
        Some(q) => vec![q],
        None => a.grid.grid(|| Ok(cad_threshold(a.block, basis)?))?,
    };
    let mut t = Table::new(&["protocol_tag", "C", "Q", "rate", "effective_rate", "entropy", "log10_rate"]);
    for q in qs {
        let r = cad_row(&CadConfig::new(a.block, basis, q)?, a.two_channels);
        t.push(vec![
            r.protocol_tag,
            r.block.to_string(),
            num(r.q),
            num(r.rate),
            num(r.effective_rate),
            num(r.entropy),
            log10_rate(r.rate),
        ]);
    }
    Ok(emit(out, |w| t.write(w, format))?)
}

#[derive(Args, Debug)]
pub struct LossArgs {
    #[arg(long, value_enum, default_value = "3")]
    mode: ModeArg,
    #[arg(long, value_parser = error_rate)]
    q: f64,
    /// Reflection-path X error; defaults to Q.
    #[arg(long, value_parser = error_rate)]
    qx: Option<f64>,
    /// Fiber attenuation, dB/km.
    #[arg(long, default_value_t = sqkd_core::loss::DEFAULT_ALPHA, value_parser = non_negative)]
    alpha: f64,
    /// Single distance in km; sweeps distance when absent.
    #[arg(long, value_parser = non_negative, conflicts_with = "max_distance")]
    d: Option<f64>,
    /// Print only the largest distance with a positive rate.
    #[arg(long)]
    max_distance: bool,
    /// Upper end of the distance grid in km; 1.25 × the maximal distance
    /// when absent.
    #[arg(long, value_parser = non_negative)]
    d_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_POINTS, value_parser = clap::value_parser!(u32).range(1..).map(|n| n as usize))]
    points: usize,
}

/// Sweep length when the rate never turns negative or is never positive.
const FALLBACK_SWEEP_KM: f64 = 100.0;

pub fn loss(a: &LossArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let mode = Mode::from(a.mode);
    let q_x = a.qx.unwrap_or(a.q);
    if a.max_distance {
        let d = max_distance(a.q, q_x, a.alpha, mode)?;
        let mut t = Table::new(&["mode", "Q", "Q_X", "alpha", "max_distance_km"]);
        let km = d.km().map_or_else(|| d.to_string(), num);
        t.push(vec![mode.number().to_string(), num(a.q), num(q_x), num(a.alpha), km]);
        return Ok(emit(out, |w| t.write(w, format))?);
    }
    let ds = match (a.d, a.d_max) {
        (Some(d), _) => vec![d],
        (None, Some(hi)) => linspace(0.0, hi, a.points),
        (None, None) => {
            let hi = match max_distance(a.q, q_x, a.alpha, mode)? {
                MaxDistance::Km(d) if d > 0.0 => 1.25 * d,
                _ => FALLBACK_SWEEP_KM,
            };
            linspace(0.0, hi, a.points)
        }
    };
    let mut t = Table::new(&["mode", "Q", "Q_X", "alpha", "d", "p_l", "rate", "log10_rate"]);
    for r in distance_sweep(mode, a.q, q_x, a.alpha, &ds)? {
        t.push(vec![
            r.mode.number().to_string(),
            num(r.q),
            num(r.q_x),
            num(r.alpha),
            num(r.d),
            num(r.p_l),
            num(r.rate),
            log10_rate(r.rate),
        ]);
    }
    Ok(emit(out, |w| t.write(w, format))?)
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("channel").required(true).args(["attack", "depolarizing"])))]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "3")]
    mode: ModeArg,
    /// Probability of the Z basis and of Measure and Resend.
    #[arg(long, default_value_t = 0.9, value_parser = open_probability)]
    p: f64,
    /// Probability that an iteration is not a test.
    #[arg(long = "q-test", default_value_t = 0.9, value_parser = open_probability)]
    q_test: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent random streams, merged in order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    shards: u32,
    /// Attack unitaries as JSON.
    #[arg(long)]
    attack: Option<PathBuf>,
    /// Use the depolarizing attack with this per-leg error instead.
    #[arg(long, value_parser = error_rate)]
    depolarizing: Option<f64>,
    /// Also write both raw keys here.
    #[arg(long)]
    keys: Option<PathBuf>,
    /// Also write the empirical statistics here.
    #[arg(long)]
    stats: Option<PathBuf>,
}

pub fn simulate(a: &SimulateArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let attack = match (&a.attack, a.depolarizing) {
        (Some(path), _) => AttackPair::read_json(BufReader::new(File::open(path)?))?,
        (None, Some(q)) => depolarizing_attack(q)?,
        (None, None) => unreachable!("clap enforces the channel group"),
    };
    let cfg =
        ProtocolConfig { p: a.p, q: a.q_test, shards: a.shards, ..ProtocolConfig::new(a.mode.into(), a.iters, a.seed) };
    let outcome = run_protocol(&cfg, &attack)?;
    emit(out, |w| outcome.write_counts(w, format.delimiter()).map_err(core_io))?;
    if let Some(path) = &a.keys {
        emit(Some(path), |w| outcome.write_keys(w).map_err(core_io))?;
    }
    if let Some(path) = &a.stats {
        emit(Some(path), |w| outcome.empirical.write_csv(w).map_err(core_io))?;
    }
    eprintln!("raw key {} bits, {} disagreements", outcome.raw_key_a.len(), outcome.disagreements());
    Ok(())
}

fn core_io(e: sqkd_core::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Number of random attacks.
    #[arg(long = "fuzz", default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..).map(|n| n as usize))]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(2..=sqkd_core::attack::MAX_ANCILLA_DIM as i64).map(|n| n as usize))]
    ancilla_dim: usize,
}

pub fn verify(a: &VerifyArgs, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let report = fuzz(a.count, a.ancilla_dim, a.seed)?;
    let mut t = Table::new(&["check", "worst", "failures"]);
    for c in &report.checks {
        t.push(vec![c.name.to_string(), num(c.worst), c.failures.to_string()]);
    }
    emit(out, |w| t.write(w, format))?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.failures > 0).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("identities violated: {}", failed.join(", "))))
    }
}
