//! Command-line front end: spectrum generation, zeta evaluation, identity
//! suites, torsion tables, volume fits, and heat-trace checks.
//!
//! Contracts kept by every subcommand:
//!
//! * stdout carries data records only (JSON lines or CSV); all logging
//!   goes to stderr;
//! * identical argv and input files produce byte-identical stdout for any
//!   thread count;
//! * every float is printed with 17 significant digits;
//! * exit codes: 0 success, 1 invalid input, 2 an identity residual
//!   exceeded its allowance, 3 an abscissa or quadrature-convergence
//!   violation.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use torzeta::numerics::fmt_f64;
use torzeta::spectrum::{
    generate_synthetic, DensityProfile, LengthSpectrum, Sig17Formatter, SpectrumFormat,
};
use torzeta::torsion::{fit_volume, torsion_series, Parity, ParityChoice};
use torzeta::trace::{gaussian_transform_residual, heat_trace, resolvent_identity_residual};
use torzeta::zeta::ZetaEvaluator;
use torzeta::Error;

#[derive(Parser)]
#[command(
    name = "torzeta",
    version,
    about = "Twisted zeta values, trace identities, and torsion asymptotics \
             from geodesic length spectra"
)]
struct Cli {
    /// Worker threads; the TORZETA_THREADS environment variable is the
    /// fallback when the flag is absent. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for stdout records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One JSON object per line.
    Json,
    /// A header line followed by comma-separated rows.
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic spectrum and write it as a JSON manifest.
    Gen {
        /// Seed for the deterministic generator.
        #[arg(long)]
        seed: u64,
        /// Smallest primitive length.
        #[arg(long)]
        systole: f64,
        /// Completeness radius of the generated spectrum.
        #[arg(long)]
        cutoff: f64,
        /// Density profile: poisson-linear:RATE or capped-exp:C,MAX_COUNT.
        #[arg(long)]
        density: String,
        /// Output manifest path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Print a one-record summary of a spectrum file.
    Info {
        /// Spectrum file (.json manifest or .csv rows).
        file: PathBuf,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Evaluate one logarithmic zeta value.
    Zeta {
        /// Spectrum file (.json manifest or .csv rows).
        #[arg(long)]
        spectrum: PathBuf,
        /// Which zeta function to evaluate.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Character weight, for ruelle, selberg, and selberg-sym.
        #[arg(long, allow_negative_numbers = true)]
        k: Option<i64>,
        /// Highest weight M,N for ruelle-rep.
        #[arg(long)]
        weight: Option<String>,
        /// Evaluation point, real or complex (3.5, 4+2i, 4-0.5i).
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Volume for --negated when the manifest does not carry one.
        #[arg(long)]
        vol: Option<f64>,
        /// Report |zeta(-s)| through the functional-equation modulus
        /// instead of log zeta(s). Needs a volume; ruelle and selberg only.
        #[arg(long)]
        negated: bool,
        /// Certified growth exponent overriding the standard 2; shifts
        /// every abscissa accordingly after re-checking the counting data.
        #[arg(long)]
        abscissa: Option<f64>,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Run a closed-form identity suite and report per-case residuals.
    Identities {
        /// Spectrum file (.json manifest or .csv rows).
        #[arg(long)]
        spectrum: PathBuf,
        /// Which suite to run.
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Rounding allowance added to each case's truncation allowance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sample count for the kostant suite.
        #[arg(long, default_value_t = 1000)]
        samples: u32,
        /// Seed for the kostant suite's sample draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Write a torsion-ratio table as CSV.
    Torsion {
        /// Spectrum file (.json manifest or .csv rows).
        #[arg(long)]
        spectrum: PathBuf,
        /// Manifold volume driving the polynomial part.
        #[arg(long)]
        vol: f64,
        /// Twist family.
        #[arg(long, value_enum)]
        parity: ParityArg,
        /// Largest family parameter m; rows reach index M = 2m or 2m + 1.
        #[arg(long)]
        max_m: u32,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Recover the volume from torsion-ratio growth.
    Fit {
        /// Spectrum file (.json manifest or .csv rows).
        #[arg(long)]
        spectrum: PathBuf,
        /// Injected volume, compared against the recovered one.
        #[arg(long)]
        vol: f64,
        /// Smallest twist index M used by the fit.
        #[arg(long)]
        m_min: u32,
        /// Largest twist index M used by the fit.
        #[arg(long)]
        m_max: u32,
        /// Which twist families enter the fit.
        #[arg(long, value_enum)]
        parity: ParityChoiceArg,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Evaluate the heat trace on a grid of times.
    TraceCheck {
        /// Spectrum file (.json manifest or .csv rows).
        #[arg(long)]
        spectrum: PathBuf,
        /// Character weight of the twist.
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        /// Comma-separated heat times, e.g. 0.5,1,2.
        #[arg(long)]
        grid: String,
        /// Volume for the identity term when the manifest lacks one.
        #[arg(long)]
        vol: Option<f64>,
        /// Completeness radius for CSV input (default: largest length).
        #[arg(long)]
        cutoff: Option<f64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Ruelle,
    Selberg,
    SelbergSym,
    RuelleRep,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    RuelleSelberg,
    Decomposition,
    Kostant,
    Trace,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Parity {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityChoiceArg {
    Even,
    Odd,
    Both,
}

impl From<ParityChoiceArg> for ParityChoice {
    fn from(p: ParityChoiceArg) -> ParityChoice {
        match p {
            ParityChoiceArg::Even => ParityChoice::Even,
            ParityChoiceArg::Odd => ParityChoice::Odd,
            ParityChoiceArg::Both => ParityChoice::Both,
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: thread count must be at least 1");
            return 1;
        }
        // Failure here means a pool already exists, which only tests do.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(cli.command, cli.format) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Divergence { .. } | Error::Quadrature(_) => 3,
                _ => 1,
            }
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("TORZETA_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("invalid TORZETA_THREADS value `{raw}`")),
        Err(_) => Ok(None),
    }
}

fn dispatch(command: Command, format: Format) -> Result<i32, Error> {
    match command {
        Command::Gen {
            seed,
            systole,
            cutoff,
            density,
            out,
        } => {
            let profile = parse_density(&density)?;
            let spec = generate_synthetic(seed, systole, cutoff, &profile)?;
            let mut file = create_file(&out)?;
            spec.write_json(&mut file)?;
            eprintln!(
                "generated {} primitives to {} (cutoff {}, growth constant {})",
                spec.entries().len(),
                out.display(),
                spec.cutoff(),
                spec.growth_constant()
            );
            Ok(0)
        }
        Command::Info { file, cutoff } => {
            let spec = load_spectrum(&file, cutoff)?;
            emit_info(format, &spec);
            Ok(0)
        }
        Command::Zeta {
            spectrum,
            kind,
            k,
            weight,
            s,
            vol,
            negated,
            abscissa,
            cutoff,
        } => {
            let spec = load_spectrum(&spectrum, cutoff)?;
            let ev = make_evaluator(&spec, abscissa)?;
            let s = parse_complex(&s).map_err(Error::Invariant)?;
            run_zeta(&ev, format, kind, k, weight.as_deref(), s, vol, negated)
        }
        Command::Identities {
            spectrum,
            suite,
            tol,
            samples,
            seed,
            cutoff,
        } => {
            let spec = load_spectrum(&spectrum, cutoff)?;
            let ev = ZetaEvaluator::new(&spec);
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(Error::Invariant(format!(
                    "tolerance must be nonnegative, got {tol}"
                )));
            }
            let mut sink = CaseSink::new(format);
            match suite {
                SuiteArg::RuelleSelberg => suite_ruelle_selberg(&ev, tol, &mut sink)?,
                SuiteArg::Decomposition => suite_decomposition(&ev, tol, &mut sink)?,
                SuiteArg::Kostant => suite_kostant(samples, seed, tol, &mut sink),
                SuiteArg::Trace => suite_trace(&spec, tol, &mut sink)?,
                SuiteArg::All => {
                    suite_ruelle_selberg(&ev, tol, &mut sink)?;
                    suite_decomposition(&ev, tol, &mut sink)?;
                    suite_kostant(samples, seed, tol, &mut sink);
                    suite_trace(&spec, tol, &mut sink)?;
                }
            }
            Ok(if sink.all_pass { 0 } else { 2 })
        }
        Command::Torsion {
            spectrum,
            vol,
            parity,
            max_m,
            out,
            cutoff,
        } => {
            let spec = load_spectrum(&spectrum, cutoff)?;
            let ev = ZetaEvaluator::new(&spec);
            let parity = Parity::from(parity);
            let series = torsion_series(&ev, vol, parity, max_m)?;
            let mut text = String::from("M,parity,remainder,cumulative_minus_base,tail_bound\n");
            for row in &series.rows {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.index,
                    parity.label(),
                    fmt_f64(row.remainder),
                    fmt_f64(row.cumulative),
                    fmt_f64(row.cumulative_tail),
                ));
            }
            let mut file = create_file(&out)?;
            file.write_all(text.as_bytes())?;
            eprintln!("wrote {} rows to {}", series.rows.len(), out.display());
            Ok(0)
        }
        Command::Fit {
            spectrum,
            vol,
            m_min,
            m_max,
            parity,
            cutoff,
        } => {
            let spec = load_spectrum(&spectrum, cutoff)?;
            let ev = ZetaEvaluator::new(&spec);
            let fit = fit_volume(&ev, vol, m_min, m_max, ParityChoice::from(parity))?;
            emit_fit(format, &fit);
            Ok(0)
        }
        Command::TraceCheck {
            spectrum,
            k,
            grid,
            vol,
            cutoff,
        } => {
            let spec = load_spectrum(&spectrum, cutoff)?;
            let times = parse_grid(&grid)?;
            let mut header_done = false;
            for t in times {
                let h = heat_trace(&spec, k, t, vol)?;
                emit_heat(format, &h, &mut header_done);
            }
            Ok(0)
        }
    }
}

fn create_file(path: &Path) -> Result<File, Error> {
    File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn load_spectrum(path: &Path, cutoff: Option<f64>) -> Result<LengthSpectrum, Error> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let format = match ext.as_deref() {
        Some("json") => {
            if cutoff.is_some() {
                return Err(Error::Invariant(
                    "a JSON manifest declares its own cutoff; drop --cutoff".into(),
                ));
            }
            SpectrumFormat::Json
        }
        Some("csv") => SpectrumFormat::Csv {
            cutoff,
            growth_constant: 10.0,
            volume: None,
        },
        _ => {
            return Err(Error::Invariant(format!(
                "unsupported spectrum extension in {} (expected .csv or .json)",
                path.display()
            )));
        }
    };
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    LengthSpectrum::load(file, format)
}

fn make_evaluator<'a>(
    spec: &'a LengthSpectrum,
    abscissa: Option<f64>,
) -> Result<ZetaEvaluator<'a>, Error> {
    match abscissa {
        Some(a) => ZetaEvaluator::with_certified_exponent(spec, a),
        None => Ok(ZetaEvaluator::new(spec)),
    }
}

fn parse_density(raw: &str) -> Result<DensityProfile, Error> {
    let bad = |msg: String| Error::Invariant(msg);
    if let Some(rate) = raw.strip_prefix("poisson-linear:") {
        let rate: f64 = rate
            .parse()
            .map_err(|e| bad(format!("invalid poisson-linear rate `{rate}`: {e}")))?;
        return Ok(DensityProfile::PoissonLinear { rate });
    }
    if let Some(rest) = raw.strip_prefix("capped-exp:") {
        let (c, max) = rest.split_once(',').ok_or_else(|| {
            bad(format!(
                "capped-exp takes C,MAX_COUNT, got `{rest}`"
            ))
        })?;
        let c: f64 = c
            .parse()
            .map_err(|e| bad(format!("invalid capped-exp exponent `{c}`: {e}")))?;
        let max_count: u64 = max
            .parse()
            .map_err(|e| bad(format!("invalid capped-exp max count `{max}`: {e}")))?;
        return Ok(DensityProfile::CappedExponential { c, max_count });
    }
    Err(bad(format!(
        "unknown density `{raw}` (expected poisson-linear:RATE or capped-exp:C,MAX_COUNT)"
    )))
}

/// Parses `a`, `a+bi`, `a-bi`, or `bi`, with scientific notation allowed in
/// both parts.
fn parse_complex(raw: &str) -> Result<Complex64, String> {
    let t = raw.trim();
    let fail = || format!("invalid complex number `{raw}` (expected forms: 3.5, 4+2i, -1e-2i)");
    if let Some(body) = t.strip_suffix('i') {
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && !matches!(bytes[i - 1], b'e' | b'E')
            {
                split = Some(i);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let re: f64 = if re_part.is_empty() {
            0.0
        } else {
            re_part.parse().map_err(|_| fail())?
        };
        let im: f64 = match im_part {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse().map_err(|_| fail())?,
        };
        Ok(Complex64::new(re, im))
    } else {
        t.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| fail())
    }
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, Error> {
    let times: Result<Vec<f64>, _> = raw.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let times = times.map_err(|e| Error::Invariant(format!("invalid grid `{raw}`: {e}")))?;
    if times.is_empty() {
        return Err(Error::Invariant("grid must contain at least one time".into()));
    }
    Ok(times)
}

/// Writes one stdout line, stopping quietly if the reader closed the pipe.
fn out_line(line: std::fmt::Arguments<'_>) {
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

macro_rules! emit {
    ($($arg:tt)*) => { out_line(format_args!($($arg)*)) };
}

/// Serializes one record as a JSON line with 17-significant-digit floats.
fn json_line<T: Serialize>(record: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
    record.serialize(&mut ser).expect("record serialization");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

#[derive(Serialize)]
struct InfoRecord {
    entries: usize,
    total_multiplicity: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    systole: Option<f64>,
    cutoff: f64,
    growth_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<f64>,
}

fn emit_info(format: Format, spec: &LengthSpectrum) {
    let rec = InfoRecord {
        entries: spec.entries().len(),
        total_multiplicity: spec.total_multiplicity(),
        systole: spec.systole(),
        cutoff: spec.cutoff(),
        growth_constant: spec.growth_constant(),
        volume: spec.volume(),
    };
    match format {
        Format::Json => emit!("{}", json_line(&rec)),
        Format::Csv => {
            emit!("entries,total_multiplicity,systole,cutoff,growth_constant,volume");
            emit!(
                "{},{},{},{},{},{}",
                rec.entries,
                rec.total_multiplicity,
                rec.systole.map(fmt_f64).unwrap_or_default(),
                fmt_f64(rec.cutoff),
                fmt_f64(rec.growth_constant),
                rec.volume.map(fmt_f64).unwrap_or_default(),
            );
        }
    }
}

#[derive(Serialize)]
struct ZetaRecord {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    s: [f64; 2],
    value: [f64; 2],
    tail_bound: f64,
    abscissa: f64,
}

#[derive(Serialize)]
struct NegatedRecord {
    kind: &'static str,
    k: i64,
    s: [f64; 2],
    negated_modulus: f64,
    tail_bound: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_zeta(
    ev: &ZetaEvaluator<'_>,
    format: Format,
    kind: KindArg,
    k: Option<i64>,
    weight: Option<&str>,
    s: Complex64,
    vol: Option<f64>,
    negated: bool,
) -> Result<i32, Error> {
    let kind_label = match kind {
        KindArg::Ruelle => "ruelle",
        KindArg::Selberg => "selberg",
        KindArg::SelbergSym => "selberg-sym",
        KindArg::RuelleRep => "ruelle-rep",
    };
    let need_k = || {
        k.ok_or_else(|| Error::Invariant(format!("--kind {kind_label} requires --k")))
    };
    if vol.is_some() && !negated {
        return Err(Error::Invariant("--vol is only used with --negated".into()));
    }
    if k.is_some() && matches!(kind, KindArg::RuelleRep) {
        return Err(Error::Invariant("--k does not apply to ruelle-rep".into()));
    }
    if weight.is_some() && !matches!(kind, KindArg::RuelleRep) {
        return Err(Error::Invariant(format!(
            "--weight does not apply to {kind_label}"
        )));
    }
    if negated {
        let k = need_k()?;
        let bounded = match kind {
            KindArg::Ruelle => ev.ruelle_modulus_negated(k, s, vol)?,
            KindArg::Selberg => ev.selberg_modulus_negated(k, s, vol)?,
            _ => {
                return Err(Error::Invariant(
                    "--negated applies to ruelle and selberg only".into(),
                ));
            }
        };
        let rec = NegatedRecord {
            kind: kind_label,
            k,
            s: [s.re, s.im],
            negated_modulus: bounded.value,
            tail_bound: bounded.tail_bound,
        };
        match format {
            Format::Json => emit!("{}", json_line(&rec)),
            Format::Csv => {
                emit!("kind,k,s_re,s_im,negated_modulus,tail_bound");
                emit!(
                    "{},{},{},{},{},{}",
                    rec.kind,
                    rec.k,
                    fmt_f64(rec.s[0]),
                    fmt_f64(rec.s[1]),
                    fmt_f64(rec.negated_modulus),
                    fmt_f64(rec.tail_bound),
                );
            }
        }
        return Ok(0);
    }
    let (value, k_field, mn_field) = match kind {
        KindArg::Ruelle => {
            let k = need_k()?;
            (ev.log_ruelle(k, s)?, Some(k), None)
        }
        KindArg::Selberg => {
            let k = need_k()?;
            (ev.log_selberg(k, s)?, Some(k), None)
        }
        KindArg::SelbergSym => {
            let k = need_k()?;
            (ev.log_selberg_sym(k, s)?, Some(k), None)
        }
        KindArg::RuelleRep => {
            let raw = weight.ok_or_else(|| {
                Error::Invariant("--kind ruelle-rep requires --weight M,N".into())
            })?;
            let (m, n) = raw
                .split_once(',')
                .and_then(|(a, b)| {
                    Some((a.trim().parse::<u32>().ok()?, b.trim().parse::<u32>().ok()?))
                })
                .ok_or_else(|| {
                    Error::Invariant(format!("invalid --weight `{raw}` (expected M,N)"))
                })?;
            (ev.log_ruelle_rep_direct(m, n, s)?, None, Some((m, n)))
        }
    };
    let rec = ZetaRecord {
        kind: kind_label,
        k: k_field,
        m: mn_field.map(|mn| mn.0),
        n: mn_field.map(|mn| mn.1),
        s: [s.re, s.im],
        value: [value.value.re, value.value.im],
        tail_bound: value.tail_bound,
        abscissa: value.abscissa,
    };
    match format {
        Format::Json => emit!("{}", json_line(&rec)),
        Format::Csv => {
            emit!("kind,k,m,n,s_re,s_im,value_re,value_im,tail_bound,abscissa");
            emit!(
                "{},{},{},{},{},{},{},{},{},{}",
                rec.kind,
                rec.k.map(|v| v.to_string()).unwrap_or_default(),
                rec.m.map(|v| v.to_string()).unwrap_or_default(),
                rec.n.map(|v| v.to_string()).unwrap_or_default(),
                fmt_f64(rec.s[0]),
                fmt_f64(rec.s[1]),
                fmt_f64(rec.value[0]),
                fmt_f64(rec.value[1]),
                fmt_f64(rec.tail_bound),
                fmt_f64(rec.abscissa),
            );
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CaseRecord {
    suite: &'static str,
    case: String,
    residual: f64,
    allowed: f64,
    pass: bool,
}

/// Streams identity-suite case records and tracks the overall verdict.
struct CaseSink {
    format: Format,
    header_done: bool,
    all_pass: bool,
}

impl CaseSink {
    fn new(format: Format) -> Self {
        Self {
            format,
            header_done: false,
            all_pass: true,
        }
    }

    fn push(&mut self, suite: &'static str, case: String, residual: f64, allowed: f64) {
        let pass = residual <= allowed;
        self.all_pass &= pass;
        let rec = CaseRecord {
            suite,
            case,
            residual,
            allowed,
            pass,
        };
        match self.format {
            Format::Json => emit!("{}", json_line(&rec)),
            Format::Csv => {
                if !self.header_done {
                    emit!("suite,case,residual,allowed,pass");
                    self.header_done = true;
                }
                emit!(
                    "{},{},{},{},{}",
                    rec.suite,
                    rec.case,
                    fmt_f64(rec.residual),
                    fmt_f64(rec.allowed),
                    rec.pass
                );
            }
        }
    }
}

fn complex_label(s: Complex64) -> String {
    if s.im == 0.0 {
        format!("{}", s.re)
    } else if s.im < 0.0 {
        format!("{}{}i", s.re, s.im)
    } else {
        format!("{}+{}i", s.re, s.im)
    }
}

fn suite_ruelle_selberg(
    ev: &ZetaEvaluator<'_>,
    tol: f64,
    sink: &mut CaseSink,
) -> Result<(), Error> {
    let points = [
        Complex64::new(3.5, 0.0),
        Complex64::new(4.0, 0.0),
        Complex64::new(4.0, 2.0),
    ];
    for k in -4..=4i64 {
        for &s in &points {
            let r = ev.ruelle_selberg_residual(k, s)?;
            sink.push(
                "ruelle-selberg",
                format!("k={k} s={}", complex_label(s)),
                r.residual,
                r.tail_allowance + tol,
            );
        }
    }
    Ok(())
}

fn suite_decomposition(
    ev: &ZetaEvaluator<'_>,
    tol: f64,
    sink: &mut CaseSink,
) -> Result<(), Error> {
    let a = ev.growth_exponent();
    for m in 1..=4u32 {
        let s = Complex64::new(a + f64::from(m) / 2.0 + 1.5, 0.0);
        let direct = ev.log_ruelle_rep_direct(m, 0, s)?;
        let chars = ev.log_ruelle_rep_chars(m, s)?;
        sink.push(
            "decomposition",
            format!("route=chars m={m} s={}", complex_label(s)),
            (direct.value - chars.value).norm(),
            direct.tail_bound + chars.tail_bound + tol,
        );
    }
    for &(m, n) in &[(0u32, 0u32), (1, 0), (0, 2), (2, 1), (3, 3)] {
        let s = Complex64::new(a + f64::from(m + n) / 2.0 + 2.5, 0.0);
        let direct = ev.log_ruelle_rep_direct(m, n, s)?;
        let selberg = ev.log_ruelle_rep_selberg(m, n, s)?;
        sink.push(
            "decomposition",
            format!("route=selberg m={m} n={n} s={}", complex_label(s)),
            (direct.value - selberg.value).norm(),
            direct.tail_bound + selberg.tail_bound + tol,
        );
    }
    Ok(())
}

fn suite_kostant(samples: u32, seed: u64, tol: f64, sink: &mut CaseSink) {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let m = rng.random_range(0..=8u32);
        let n = rng.random_range(0..=8u32);
        let l = rng.random_range(0.05..4.0f64);
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let scale = 1.0
            + (torzeta::algebra::adjoint_det(l, th) * torzeta::algebra::char_tau(m, n, l, th))
                .norm();
        let residual = torzeta::algebra::kostant_residual(m, n, l, th) / scale;
        sink.push("kostant", format!("sample={i} m={m} n={n}"), residual, tol);
    }
}

fn suite_trace(spec: &LengthSpectrum, tol: f64, sink: &mut CaseSink) -> Result<(), Error> {
    for &s in &[0.5f64, 1.0, 2.0, 3.0, 10.0] {
        for &l in &[0.5f64, 1.0, 2.0, 5.0] {
            let residual = gaussian_transform_residual(s, l)?;
            sink.push(
                "trace",
                format!("check=gaussian s={s} l={l}"),
                residual,
                tol,
            );
        }
    }
    for &k in &[0i64, 2] {
        let residual = resolvent_identity_residual(spec, k, 3.0, 4.0)?;
        sink.push("trace", format!("check=resolvent k={k} s=3 s0=4"), residual, tol);
    }
    // Identity term against direct quadrature of the Plancherel density.
    let vol = spec.volume().unwrap_or(1.0);
    for &(k, t) in &[(0i64, 1.0f64), (2, 0.5)] {
        let closed = torzeta::trace::identity_term(k, t, vol);
        let window = (60.0f64 / t).sqrt() + 1.0;
        let quad = torzeta::numerics::integrate(
            |z| {
                2.0 * vol
                    * (-t * z * z).exp()
                    * torzeta::algebra::plancherel(k, Complex64::new(0.0, z)).re
            },
            -window,
            window,
            &[0.0],
            1e-12,
            f64::MIN_POSITIVE,
            400,
        );
        if !quad.converged {
            return Err(Error::Quadrature(format!(
                "identity-term quadrature did not converge at k = {k}, t = {t}"
            )));
        }
        sink.push(
            "trace",
            format!("check=identity-term k={k} t={t}"),
            (quad.value - closed).abs(),
            tol * (1.0 + closed.abs()),
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct FitRecord {
    slope: f64,
    intercept: f64,
    recovered_volume: f64,
    injected_volume: f64,
    rel_error: f64,
    #[serde(rename = "M_range")]
    m_range: [u32; 2],
    max_abs_residual: f64,
}

fn emit_fit(format: Format, fit: &torzeta::torsion::VolumeFit) {
    let rec = FitRecord {
        slope: fit.slope,
        intercept: fit.intercept,
        recovered_volume: fit.recovered_volume,
        injected_volume: fit.injected_volume,
        rel_error: fit.rel_error,
        m_range: [fit.index_range.0, fit.index_range.1],
        max_abs_residual: fit.max_abs_residual,
    };
    match format {
        Format::Json => emit!("{}", json_line(&rec)),
        Format::Csv => {
            emit!(
                "slope,intercept,recovered_volume,injected_volume,rel_error,m_min,m_max,max_abs_residual"
            );
            emit!(
                "{},{},{},{},{},{},{},{}",
                fmt_f64(rec.slope),
                fmt_f64(rec.intercept),
                fmt_f64(rec.recovered_volume),
                fmt_f64(rec.injected_volume),
                fmt_f64(rec.rel_error),
                rec.m_range[0],
                rec.m_range[1],
                fmt_f64(rec.max_abs_residual),
            );
        }
    }
}

#[derive(Serialize)]
struct HeatRecord {
    t: f64,
    identity_term: f64,
    hyperbolic_term: f64,
    total: f64,
    tail_bound: f64,
}

fn emit_heat(format: Format, h: &torzeta::trace::HeatEvaluation, header_done: &mut bool) {
    let rec = HeatRecord {
        t: h.t,
        identity_term: h.identity_term,
        hyperbolic_term: h.hyperbolic_term,
        total: h.total,
        tail_bound: h.tail_bound,
    };
    match format {
        Format::Json => emit!("{}", json_line(&rec)),
        Format::Csv => {
            if !*header_done {
                emit!("t,identity_term,hyperbolic_term,total,tail_bound");
                *header_done = true;
            }
            emit!(
                "{},{},{},{},{}",
                fmt_f64(rec.t),
                fmt_f64(rec.identity_term),
                fmt_f64(rec.hyperbolic_term),
                fmt_f64(rec.total),
                fmt_f64(rec.tail_bound),
            );
        }
    }
}
