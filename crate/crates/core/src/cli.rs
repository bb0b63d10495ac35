//! Command-line front end. Every command writes a data section preceded by
//! `# key: value` manifest lines (CSV) or a `manifest` object (JSON).
//!
//! Exit codes: 0 pass, 1 failed audit row, 2 usage or region error,
//! 3 infeasible (enumeration ceiling, codebook cap).

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::exponents::{
    capacity, correct_decoding_exponent, error_exponent, parametric_curve, rho_of_rate, shannon_sphere_packing,
    ExponentPoint,
};
use crate::gauss_family::ChannelSpec;
use crate::quantization_bridge::{
    bridge_audit, check_region, pdf_exponent_sandwich, InequalityReport, InequalityRow, QuantizedPair,
    INEQUALITY_CSV_HEADER,
};
use crate::simulator::{self, CodebookRule, DecodeMode, SimConfig};
use crate::type_system::{counting_report, LatticeConfig, DEFAULT_CEILING};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const DUAL_FORMULA_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "awgn-rel", version, about = "AWGN reliability exponents, type audits and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the capacity ½ log(1 + SNR).
    Capacity(ChannelArgs),
    /// Error or correct-decoding exponent over a rate grid.
    ExponentCurve(CurveArgs),
    /// Rate and exponent traced by the tilt parameter ρ.
    Parametric(ParametricArgs),
    /// Exact type counts against their polynomial bounds.
    TypesAudit(TypesArgs),
    /// Density-exponent sandwich and density-to-type inequality audits.
    QuantAudit(QuantArgs),
    /// Monte Carlo ML decoding of random codebooks.
    Simulate(SimArgs),
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct ChannelArgs {
    #[arg(long)]
    pub snr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Logarithm base: a number > 1, or `e` for nats.
    #[arg(long, default_value = "2", value_parser = parse_base)]
    pub base: f64,
}

impl ChannelArgs {
    fn channel(&self) -> Result<ChannelSpec> {
        if !(self.snr > 0.0) {
            return Err(Error::domain(format!("--snr must be positive, got {}", self.snr)));
        }
        ChannelSpec::new(self.snr * self.sigma2, self.sigma2, self.base)
    }
}

fn parse_base(s: &str) -> std::result::Result<f64, String> {
    if s == "e" {
        return Ok(std::f64::consts::E);
    }
    match s.parse::<f64>() {
        Ok(b) if b > 1.0 && b.is_finite() => Ok(b),
        _ => Err(format!("base must be `e` or a number > 1, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Error,
    Correct,
    Both,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub rate_min: f64,
    #[arg(long)]
    pub rate_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = CurveKind::Both)]
    pub kind: CurveKind,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct ParametricArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct TypesArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cx: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cy: f64,
    /// Ceiling on enumeration states before falling back to bounds only.
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    pub ceiling: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct QuantArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, default_value = "2", value_parser = parse_base)]
    pub base: f64,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    Gaussian,
    Sphere,
    Antipodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exhaustive,
    Ensemble,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct SimArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub rate_frac_of_capacity: f64,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RuleArg::Gaussian)]
    pub rule: RuleArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    /// In ensemble mode above capacity, importance-sample correct decoding
    /// with the tilt ρ*(R).
    #[arg(long)]
    pub tilt: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Provenance written ahead of every data section.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: u64,
}

impl RunManifest {
    fn new<P: Serialize>(command: &str, params: &P, seed: Option<u64>) -> Result<Self> {
        // SOURCE_DATE_EPOCH pins the timestamp for reproducible artifacts.
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
        Ok(RunManifest {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        })
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# params: {}", self.params);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        let _ = writeln!(s, "# version: {}", self.version);
        let _ = writeln!(s, "# timestamp: {}", self.timestamp);
        s
    }
}

/// Lines of a CSV document that are not manifest comments.
pub fn data_section(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn console(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Maps library errors onto exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::EnumerationCeiling { .. }
        | Error::CapExceeded { .. }
        | Error::EmptyFeasibleSet(_)
        | Error::SlackPrecondition { .. }
        | Error::UnboundedBracket { .. } => EXIT_INFEASIBLE,
        Error::Numerical { .. } | Error::Quadrature { .. } => EXIT_AUDIT,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Capacity(a) => {
            let ch = a.channel()?;
            writeln!(stdout, "{}", console(capacity(&ch)))?;
            Ok(EXIT_PASS)
        }
        Command::ExponentCurve(a) => cmd_exponent_curve(a, stdout),
        Command::Parametric(a) => cmd_parametric(a, stdout),
        Command::TypesAudit(a) => cmd_types_audit(a, stdout, stderr),
        Command::QuantAudit(a) => cmd_quant_audit(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    }
}

fn cmd_exponent_curve(a: &CurveArgs, stdout: &mut dyn Write) -> Result<i32> {
    let ch = a.channel.channel()?;
    if !(a.rate_min > 0.0 && a.rate_max >= a.rate_min) || a.points == 0 {
        return Err(Error::domain("need 0 < rate-min <= rate-max and points > 0"));
    }
    let manifest = RunManifest::new("exponent-curve", a, None)?;
    let mut rows: Vec<(ExponentPoint, Option<f64>)> = Vec::new();
    for r in linspace(a.rate_min, a.rate_max, a.points) {
        if a.kind != CurveKind::Correct {
            rows.push((error_exponent(&ch, r)?, Some(shannon_sphere_packing(&ch, r)?)));
        }
        if a.kind != CurveKind::Error {
            rows.push((correct_decoding_exponent(&ch, r)?, None));
        }
    }
    let mut text = manifest.csv_header();
    text.push_str("rate,rho_star,exponent,shannon_form,kind\n");
    let mut pass = true;
    for (p, sf) in &rows {
        if let Some(sf) = sf {
            pass &= (p.exponent - sf).abs() < DUAL_FORMULA_TOL;
        }
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            fmt(p.rate),
            fmt(p.rho_star),
            fmt(p.exponent),
            sf.map(fmt).unwrap_or_default(),
            p.kind.as_str()
        );
    }
    emit(&a.out, &text, stdout)?;
    Ok(if pass { EXIT_PASS } else { EXIT_AUDIT })
}

fn cmd_parametric(a: &ParametricArgs, stdout: &mut dyn Write) -> Result<i32> {
    let ch = a.channel.channel()?;
    if a.points == 0 || a.rho_max < a.rho_min {
        return Err(Error::domain("need rho-min <= rho-max and points > 0"));
    }
    let manifest = RunManifest::new("parametric", a, None)?;
    let curve = parametric_curve(&ch, &linspace(a.rho_min, a.rho_max, a.points))?;
    let mut text = manifest.csv_header();
    text.push_str("rho,rate,exponent,kind\n");
    for p in &curve {
        let _ = writeln!(text, "{},{},{},{}", fmt(p.rho_star), fmt(p.rate), fmt(p.exponent), p.kind.as_str());
    }
    emit(&a.out, &text, stdout)?;
    Ok(EXIT_PASS)
}

fn cmd_types_audit(a: &TypesArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let config = LatticeConfig::new(a.n, a.alpha, a.beta)?;
    let manifest = RunManifest::new("types-audit", a, None)?;
    let (report, enumerated) = match counting_report(&config, a.cx, a.cy, true, a.ceiling) {
        Ok(r) => (r, true),
        Err(Error::EnumerationCeiling { .. }) => {
            writeln!(stderr, "enumeration infeasible; bounds-only report")?;
            (counting_report(&config, a.cx, a.cy, false, a.ceiling)?, false)
        }
        Err(e) => return Err(e),
    };
    let mut text = manifest.csv_header();
    text.push_str("name,exact,bound,pass\n");
    for (name, exact, bound, pass) in report.rows() {
        let _ = writeln!(text, "{},{},{},{}", name, exact.map_or("NA".to_string(), fmt), fmt(bound), pass);
    }
    emit(&a.out, &text, stdout)?;
    Ok(if !report.all_pass() {
        EXIT_AUDIT
    } else if !enumerated {
        EXIT_INFEASIBLE
    } else {
        EXIT_PASS
    })
}

/// Density-exponent sandwich rows for one seeded random pair of length `n`.
fn sandwich_rows(config: &LatticeConfig, ch: &ChannelSpec, seed: u64, instance: usize) -> Result<Vec<InequalityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 << 32 | instance as u64);
    let xs = Normal::new(0.0, ch.s2.sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    let zs = Normal::new(0.0, ch.sigma2.sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    let n = config.n as usize;
    let x: Vec<f64> = (0..n).map(|_| xs.sample(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|&v| v + zs.sample(&mut rng)).collect();
    let pair = QuantizedPair::new(x, y, *config)?;
    let c_xy = pair.quantized_mean_sq_diff();
    let (_, v) = pdf_exponent_sandwich(&pair, ch, c_xy)?;
    Ok(vec![
        InequalityRow {
            instance,
            check: "sandwich_lower".into(),
            lhs: v.raw_exponent,
            rhs: v.quantized_exponent,
            slack: v.quantized_exponent - v.lower,
            pass: v.raw_exponent >= v.lower - 1e-12,
        },
        InequalityRow {
            instance,
            check: "sandwich_upper".into(),
            lhs: v.raw_exponent,
            rhs: v.quantized_exponent,
            slack: v.upper - v.quantized_exponent,
            pass: v.raw_exponent <= v.upper + 1e-12,
        },
    ])
}

fn cmd_quant_audit(a: &QuantArgs, stdout: &mut dyn Write) -> Result<i32> {
    check_region(a.alpha, a.beta)?;
    if !(a.snr > 0.0) {
        return Err(Error::domain(format!("--snr must be positive, got {}", a.snr)));
    }
    let ch = ChannelSpec::from_snr(a.snr, a.base)?;
    let config = LatticeConfig::new(a.n, a.alpha, a.beta)?;
    let manifest = RunManifest::new("quant-audit", a, Some(a.seed))?;
    let mut rows = Vec::new();
    for k in 0..a.instances {
        rows.extend(sandwich_rows(&config, &ch, a.seed, k)?);
    }
    let (bridge, budgets) = bridge_audit(&config, &ch, a.seed, a.instances)?;
    let report = InequalityReport::merge([InequalityReport { rows }, bridge]);
    let mut text = manifest.csv_header();
    if let Some(b) = budgets.first() {
        let _ = writeln!(
            text,
            "# slack_preconditions_met: {} (n_min {})",
            budgets.iter().all(|b| b.preconditions_met),
            fmt(b.n_min)
        );
    }
    let csv = report.to_csv();
    debug_assert!(csv.starts_with(INEQUALITY_CSV_HEADER));
    text.push_str(&csv);
    emit(&a.out, &text, stdout)?;
    Ok(if report.all_pass() { EXIT_PASS } else { EXIT_AUDIT })
}

#[derive(Serialize)]
struct Analytic {
    capacity: f64,
    rate: f64,
    sphere_packing_exponent: f64,
    correct_decoding_exponent: f64,
}

#[derive(Serialize)]
struct SimOutput {
    manifest: RunManifest,
    config: SimConfig,
    result: simulator::SimResult,
    analytic: Analytic,
}

fn cmd_simulate(a: &SimArgs, stdout: &mut dyn Write) -> Result<i32> {
    let ch = a.channel.channel()?;
    if !(a.rate_frac_of_capacity > 0.0) {
        return Err(Error::domain("--rate-frac-of-capacity must be positive"));
    }
    let c = capacity(&ch);
    let rate = a.rate_frac_of_capacity * c;
    let tilt_rho = if a.tilt && rate > c { Some(rho_of_rate(&ch, rate)?) } else { None };
    let cfg = SimConfig {
        n: a.n,
        rate,
        channel: ch,
        rule: match a.rule {
            RuleArg::Gaussian => CodebookRule::GaussianIidProjected,
            RuleArg::Sphere => CodebookRule::UniformSphere,
            RuleArg::Antipodal => CodebookRule::Antipodal,
        },
        mode: match a.mode {
            ModeArg::Exhaustive => DecodeMode::Exhaustive,
            ModeArg::Ensemble => DecodeMode::SphericalEnsemble,
        },
        trials: a.trials,
        seed: a.seed,
        tilt_rho,
    };
    let result = simulator::run(&cfg)?;
    let out = SimOutput {
        manifest: RunManifest::new("simulate", a, Some(a.seed))?,
        config: cfg,
        result,
        analytic: Analytic {
            capacity: c,
            rate,
            sphere_packing_exponent: shannon_sphere_packing(&ch, rate)?,
            correct_decoding_exponent: correct_decoding_exponent(&ch, rate)?.exponent,
        },
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    emit(&a.out, &text, stdout)?;
    Ok(EXIT_PASS)
}
