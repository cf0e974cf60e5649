//! `betacode`: classification, β-expansion, kernel and sampling reports for
//! an integer polynomial.

mod report;
mod xtext;

use std::path::PathBuf;
use std::process::ExitCode;

use betacode::beta::{build_automaton, greedy_expand, BetaError};
use betacode::coding::{beta_context_for, compare_entropy, CodingError, CodingSystem, SampleConfig, SNAP_TOLERANCE};
use betacode::numfield::FieldError;
use betacode::places::{classify_places_with, is_hyperbolic, is_irreducible, PisotSide, PlaceError, Tag};
use betacode::polyring::{normalize_with_record, IntLaurentPoly, PolyError};
use betacode::shift::{BiSequence, ShiftError};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use report::*;

#[derive(Parser, Debug)]
#[command(name = "betacode", version, about = "Algebraic dynamics and β-shift coding of an integer polynomial")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalOpts {
    /// Bits of precision for root isolation [default: 128]
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// p-adic digits kept at every non-archimedean place [default: 64]
    #[arg(long, global = true)]
    padic_digits: Option<u32>,
    /// Depth of greedy expansions, in digits below the radix point [default: 64]
    #[arg(long, global = true)]
    depth: Option<i64>,
    /// Largest period searched for kernel points [default: 6]
    #[arg(long, global = true)]
    max_period: Option<usize>,
    /// Sampling seed [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sampling [default: 1]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Emit text (the default)
    #[arg(long, global = true)]
    text: bool,
    /// TOML file whose keys are flag names; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SampleOpts {
    /// Number of sampled sequences [default: 500]
    #[arg(long)]
    samples: Option<usize>,
    /// Window as LO,HI [default: -12,12]
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Binning radius [default: 1e-6]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of tail-rewrite witness pairs to inject [default: 0]
    #[arg(long)]
    inject_witness: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full classification report
    Analyze {
        poly: String,
        #[command(flatten)]
        sample: SampleOpts,
    },
    /// Greedy β-expansion of an element of ℚ(β)
    Expand { x: String, poly: String },
    /// Periodic sequences that code to the identity
    Kernel { poly: String },
    /// Collision sampling
    Sample {
        poly: String,
        #[command(flatten)]
        sample: SampleOpts,
    },
}

#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    precision: Option<u32>,
    padic_digits: Option<u32>,
    depth: Option<i64>,
    max_period: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: Option<String>,
    samples: Option<usize>,
    window: Option<String>,
    epsilon: Option<f64>,
    inject_witness: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Refusal(String),
    Precision(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Refusal(_) => 2,
            CliError::Precision(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Refusal(m) | CliError::Precision(m) => m,
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::PrecisionExhausted => CliError::Precision(e.to_string()),
            PolyError::NotHyperbolic | PolyError::NoFiniteReduction => CliError::Refusal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PlaceError> for CliError {
    fn from(e: PlaceError) -> Self {
        match e {
            PlaceError::PrecisionExhausted => CliError::Precision(e.to_string()),
            _ => CliError::Refusal(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::PrecisionExhausted => CliError::Precision(e.to_string()),
            _ => CliError::Refusal(e.to_string()),
        }
    }
}

impl From<BetaError> for CliError {
    fn from(e: BetaError) -> Self {
        match e {
            BetaError::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Refusal(e.to_string()),
        }
    }
}

impl From<ShiftError> for CliError {
    fn from(e: ShiftError) -> Self {
        CliError::Refusal(e.to_string())
    }
}

impl From<CodingError> for CliError {
    fn from(e: CodingError) -> Self {
        match e {
            CodingError::Place(p) => p.into(),
            CodingError::Field(f) => f.into(),
            CodingError::Beta(b) => b.into(),
            CodingError::Poly(p) => p.into(),
            CodingError::Shift(s) => s.into(),
            CodingError::Reduction(_) => CliError::Precision(e.to_string()),
            _ => CliError::Refusal(e.to_string()),
        }
    }
}

/// Flags merged over the config file over the defaults.
struct Resolved {
    settings: Settings,
    json: bool,
    samples: usize,
    window: (i64, i64),
    epsilon: f64,
    inject: usize,
}

fn parse_window(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Usage(format!("bad window {s:?}: expected LO,HI with LO <= HI"));
    let (a, b) = s.split_once([',', ':']).ok_or_else(bad)?;
    let lo: i64 = a.trim().parse().map_err(|_| bad())?;
    let hi: i64 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn resolve(g: &GlobalOpts, s: Option<&SampleOpts>) -> Result<Resolved, CliError> {
    let file = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            toml::from_str::<FileConfig>(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let none = SampleOpts::default();
    let s = s.unwrap_or(&none);
    let precision = g.precision.or(file.precision).unwrap_or(128);
    if !(32..=480).contains(&precision) {
        return Err(CliError::Usage(format!("precision {precision} outside 32..=480")));
    }
    let padic_digits = g.padic_digits.or(file.padic_digits).unwrap_or(64);
    if !(8..=1024).contains(&padic_digits) {
        return Err(CliError::Usage(format!("padic-digits {padic_digits} outside 8..=1024")));
    }
    let depth = g.depth.or(file.depth).unwrap_or(64);
    if !(0..=4096).contains(&depth) {
        return Err(CliError::Usage(format!("depth {depth} outside 0..=4096")));
    }
    let json = if g.json {
        true
    } else if g.text {
        false
    } else {
        match file.format.as_deref() {
            None | Some("text") => false,
            Some("json") => true,
            Some(other) => return Err(CliError::Usage(format!("unknown format {other:?}"))),
        }
    };
    let window = match s.window.as_deref().or(file.window.as_deref()) {
        Some(w) => parse_window(w)?,
        None => (-12, 12),
    };
    let epsilon = s.epsilon.or(file.epsilon).unwrap_or(1e-6);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::Usage(format!("epsilon {epsilon} outside (0, 1)")));
    }
    Ok(Resolved {
        settings: Settings {
            precision_bits: precision,
            padic_digits,
            depth,
            max_period: g.max_period.or(file.max_period).unwrap_or(6),
            seed: g.seed.or(file.seed).unwrap_or(0),
            threads: g.threads.or(file.threads).unwrap_or(1).max(1),
        },
        json,
        samples: s.samples.or(file.samples).unwrap_or(500),
        window,
        epsilon,
        inject: s.inject_witness.or(file.inject_witness).unwrap_or(0),
    })
}

fn header(command: &'static str, r: &Resolved) -> Header {
    Header {
        schema: SCHEMA_VERSION,
        tool: "betacode",
        version: env!("CARGO_PKG_VERSION"),
        command,
        settings: r.settings.clone(),
    }
}

fn parse_poly(text: &str) -> Result<betacode::polyring::Normalization, CliError> {
    Ok(normalize_with_record(&IntLaurentPoly::parse(text)?)?)
}

fn sample_config(r: &Resolved) -> SampleConfig {
    SampleConfig {
        samples: r.samples,
        window: r.window,
        epsilon: r.epsilon,
        seed: r.settings.seed,
        threads: r.settings.threads,
        witnesses: r.inject,
        kernel_pairs: false,
    }
}

fn coding_system(text: &str, r: &Resolved) -> Result<CodingSystem, CliError> {
    let f = parse_poly(text)?.poly;
    if !is_hyperbolic(&f).hyperbolic {
        return Err(CliError::Refusal(format!("{f} is not hyperbolic")));
    }
    Ok(CodingSystem::new(&f, r.settings.precision_bits, r.settings.padic_digits)?)
}

fn kernel_out(sys: &CodingSystem, max_period: usize) -> Result<KernelOut, CliError> {
    let k = sys.kernel_periodic(max_period)?;
    Ok(KernelOut { max_period, exact: true, sequences: k.iter().map(|p| p.text()).collect() })
}

fn analyze(text: &str, r: &Resolved, sampling: bool) -> Result<AnalysisReport, CliError> {
    let norm = parse_poly(text)?;
    let f = norm.poly.clone();
    let bits = r.settings.precision_bits;
    let hyp = is_hyperbolic(&f);
    if !hyp.hyperbolic {
        return Err(CliError::Refusal(format!("{f} is not hyperbolic: {} roots on the unit circle", hyp.circle_roots)));
    }
    if !is_irreducible(&f)? {
        return Err(CliError::Refusal(format!("{f} is not irreducible")));
    }
    let pc = classify_places_with(&f, bits, r.settings.padic_digits)?;
    let tag = |t: Tag| if t == Tag::Stable { "stable" } else { "unstable" };
    let mut places = Vec::new();
    for ap in &pc.archimedean {
        let v = ap.value();
        places.push(PlaceRow {
            kind: "archimedean",
            tag: tag(ap.tag),
            value: Some(if ap.is_real() { format!("{:.15e}", v.re) } else { format!("{:.15e}{:+.15e}i", v.re, v.im) }),
            modulus: Some(ap.modulus),
            tolerance: Some(ap.root.radius),
            prime: None,
            slope: None,
            roots: ap.root_count,
            unevaluable: 0,
        });
    }
    for np in &pc.nonarchimedean {
        places.push(PlaceRow {
            kind: "p-adic",
            tag: tag(np.tag),
            value: None,
            modulus: None,
            tolerance: None,
            prime: Some(np.prime),
            slope: Some(np.slope.to_string()),
            roots: np.root_count,
            unevaluable: np.unevaluable,
        });
    }
    let side = match pc.pisot.side {
        PisotSide::Direct => "direct",
        PisotSide::Reciprocal => "reciprocal",
        PisotSide::None => "none",
    };
    let pisot = PisotOut {
        pisot: pc.pisot.is_pisot(),
        side,
        unit: pc.pisot.is_unit,
        beta: pc.pisot.beta_f64,
        minimal_polynomial: pc.pisot.monic.as_ref().map(|m| m.to_string()),
    };
    let entropy = EntropyOut { values: compare_entropy(&f, bits)?, tolerance: 1e-9 };
    let (mut coding_polynomial, mut parry, mut kernel, mut homoclinic_point, mut sampled) = (None, None, None, None, None);
    if pc.pisot.is_pisot() {
        let sys = CodingSystem::new(&f, bits, r.settings.padic_digits)?;
        let pd = sys.parry();
        parry = Some(ParryOut {
            d1: d1_text(&pd.d1, &pd.d1_period),
            d1_finite: pd.d1_is_finite(),
            dstar: pd.dstar_text(),
            automaton_states: sys.automaton().states,
            finite_type: build_automaton(pd).is_finite_type(),
        });
        coding_polynomial = Some(sys.poly().to_string());
        kernel = Some(kernel_out(&sys, r.settings.max_period)?);
        homoclinic_point = Some(sys.code_sequence(&BiSequence::window(0, vec![1]))?.to_serial(15));
        if sampling {
            sampled = Some(SamplingOut {
                arch_tolerance: SNAP_TOLERANCE,
                report: sys.almost_one_one_sample(&sample_config(r))?,
            });
        }
    }
    Ok(AnalysisReport {
        header: header("analyze", r),
        input: text.to_string(),
        normalization: NormalizationOut {
            polynomial: f.to_string(),
            coefficients: f.coeffs().iter().map(|c| c.to_string()).collect(),
            shift: norm.shift,
            sign: norm.sign,
            content: norm.content.to_string(),
        },
        hyperbolic: true,
        hyperbolic_certificate: hyp.certificate,
        irreducible: true,
        pisot,
        places,
        coding_polynomial,
        parry,
        entropy,
        kernel,
        homoclinic_point,
        sampling: sampled,
        lattice: "order Z[beta] with basis 1, beta, ..., beta^(d-1)",
    })
}

fn word(w: &[u32]) -> String {
    w.iter().map(|&d| if d <= 9 { d.to_string() } else { format!("({d})") }).collect()
}

fn d1_text(pre: &[u32], per: &[u32]) -> String {
    if per.is_empty() {
        word(pre)
    } else {
        format!("{}({})^∞", word(pre), word(per))
    }
}

fn expand(x: &str, poly: &str, r: &Resolved) -> Result<ExpandReport, CliError> {
    let f = parse_poly(poly)?.poly;
    let ctx = beta_context_for(&f, r.settings.precision_bits)?;
    let value = xtext::parse(x, &ctx).map_err(|e| CliError::Usage(e.to_string()))?;
    let e = greedy_expand(&value, &ctx, r.settings.depth)?;
    Ok(ExpandReport {
        header: header("expand", r),
        input: x.to_string(),
        polynomial: ctx.poly().to_string(),
        beta: ctx.beta_f64(),
        digits: e.digits.to_string(),
        terminated: e.terminated,
        remainder: e.remainder.coeffs().iter().map(|c| c.to_string()).collect(),
        remainder_bound: format!("0 <= remainder < beta^-{}", r.settings.depth),
    })
}

fn emit<T: Serialize>(r: &Resolved, value: &T, text: impl FnOnce() -> String) {
    if r.json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serialises"));
    } else {
        print!("{}", text());
    }
}

fn sampling_text(s: &SamplingOut) -> String {
    let r = &s.report;
    let mut out = format!(
        "sampling: {} samples ({} distinct) on [{}, {}], epsilon {:e}, seed {}\n  collisions: {} ({} kernel-explained, {} unexplained)\n  witnesses: {} injected, {} detected\n  measure: {}\n",
        r.samples, r.distinct, r.window.0, r.window.1, r.epsilon, r.seed, r.collision_count, r.kernel_explained,
        r.unexplained, r.witnesses_injected, r.witnesses_detected, r.measure
    );
    for c in &r.collisions {
        out.push_str(&format!("  {} ~ {}{}\n", c.a, c.b, if c.kernel_explained { " (kernel)" } else { " (unexplained)" }));
    }
    out
}

fn analysis_text(a: &AnalysisReport) -> String {
    let mut out = format!("polynomial: {}\n", a.normalization.polynomial);
    out.push_str(&format!("hyperbolic: yes (certificate {:.3e})\nirreducible: yes\n", a.hyperbolic_certificate));
    out.push_str(&format!(
        "pisot: {} (side {}, unit {}){}\n",
        if a.pisot.pisot { "yes" } else { "no" },
        a.pisot.side,
        a.pisot.unit,
        a.pisot.beta.map(|b| format!(", beta = {b}")).unwrap_or_default()
    ));
    out.push_str("places:\n");
    for p in &a.places {
        match p.prime {
            None => out.push_str(&format!(
                "  archimedean {:<8} {} (|x| = {:.6}, {} root{})\n",
                p.tag,
                p.value.as_deref().unwrap_or(""),
                p.modulus.unwrap_or(0.0),
                p.roots,
                if p.roots == 1 { "" } else { "s" }
            )),
            Some(q) => out.push_str(&format!(
                "  {q}-adic {:<8} slope {} ({} root{}, {} unevaluable)\n",
                p.tag,
                p.slope.as_deref().unwrap_or(""),
                p.roots,
                if p.roots == 1 { "" } else { "s" },
                p.unevaluable
            )),
        }
    }
    if let Some(p) = &a.parry {
        out.push_str(&format!(
            "parry: d(1) = {}, d*(1) = {}, {} states, finite type: {}\n",
            p.d1, p.dstar, p.automaton_states, p.finite_type
        ));
    }
    let e = &a.entropy.values;
    out.push_str(&format!("entropy: mahler = {:.12}", e.mahler));
    if let Some(l) = e.log_beta {
        out.push_str(&format!(", log beta = {l:.12}"));
    }
    if let Some(l) = e.automaton {
        out.push_str(&format!(", automaton = {l:.12}"));
    }
    out.push('\n');
    if e.mismatch {
        out.push_str("entropy mismatch: the beta-shift entropy differs from the entropy of the system\n");
    }
    if let Some(k) = &a.kernel {
        out.push_str(&format!("kernel (period <= {}): {}\n", k.max_period, k.sequences.join(" ")));
    }
    if let Some(s) = &a.sampling {
        out.push_str(&sampling_text(s));
    }
    out
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze { poly, sample } => {
            let r = resolve(&cli.global, Some(sample))?;
            let sampling = sample.samples.is_some() || sample.inject_witness.is_some();
            let a = analyze(poly, &r, sampling)?;
            emit(&r, &a, || analysis_text(&a));
        }
        Command::Expand { x, poly } => {
            let r = resolve(&cli.global, None)?;
            let e = expand(x, poly, &r)?;
            emit(&r, &e, || {
                format!(
                    "{} = {}{} in base {} (remainder {})\n",
                    e.input,
                    if e.digits.is_empty() { "0" } else { &e.digits },
                    if e.terminated { "" } else { " ..." },
                    e.beta,
                    e.remainder.join(", ")
                )
            });
        }
        Command::Kernel { poly } => {
            let r = resolve(&cli.global, None)?;
            let sys = coding_system(poly, &r)?;
            let k = KernelReport {
                header: header("kernel", &r),
                input: poly.clone(),
                coding_polynomial: sys.poly().to_string(),
                kernel: kernel_out(&sys, r.settings.max_period)?,
            };
            emit(&r, &k, || format!("kernel (period <= {}): {}\n", k.kernel.max_period, k.kernel.sequences.join(" ")));
        }
        Command::Sample { poly, sample } => {
            let r = resolve(&cli.global, Some(sample))?;
            let sys = coding_system(poly, &r)?;
            let s = SampleReport {
                header: header("sample", &r),
                input: poly.clone(),
                coding_polynomial: sys.poly().to_string(),
                sampling: SamplingOut { arch_tolerance: SNAP_TOLERANCE, report: sys.almost_one_one_sample(&sample_config(&r))? },
            };
            emit(&r, &s, || sampling_text(&s.sampling));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
