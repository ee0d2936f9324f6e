//! Command-line front end: reproducible experiments with machine-readable
//! output.
//!
//! Every subcommand prints a single JSON header line
//! `{"lambda":"p/q","d":...,"epsilon":...,"kernel":"...","seed":N}`
//! followed by rows in the chosen `--format` (JSON objects or CSV with a
//! column header). Randomized suites draw from a seeded generator, so
//! identical flags produce byte-identical output. Exit codes: 0 when every
//! exact assertion passed, 1 with a serialized witness when one failed,
//! 2 for usage errors (malformed or out-of-range parameters).

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exactfield::{rat_to_f64, Rat};
use crate::gasket::{
    ball_measure_bounds, parse_periodic_code, sample_epoint, Code, EPoint, GasketParams,
};
use crate::kernel::{check_k2, kernel_eval_exact, verify_sector_conditions, K2Outcome, KernelSpec, KernelVariant};
use crate::operator::{build_matrix, operator_norm, truncated_apply_exact, CellFunction};
use crate::pv::{find_annulus, oscillation_exact, pv_trace, switch_indices, PvCertificate};
use crate::Error;

#[derive(Parser, Debug)]
#[command(
    name = "czgasket",
    version,
    about = "Exact singular-integral experiments on lambda-Sierpinski gaskets",
    long_about = "Exact singular-integral experiments on lambda-Sierpinski gaskets.\n\
        Every subcommand prints a JSON header (lambda, d, epsilon, kernel, seed)\n\
        and then rows as JSON objects or CSV; CSV floats carry 17 significant\n\
        digits. Identical flags and seed give byte-identical output."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Contraction ratio as a fraction "p/q" with 0 < p/q < 1/3.
    #[arg(long, default_value = "1/4")]
    pub lambda: String,

    /// Seed for the randomized suites (unused by deterministic subcommands).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Row format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,

    /// Write all output to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Plateau,
    Homogeneous,
}

impl From<KernelArg> for KernelVariant {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Plateau => KernelVariant::Plateau,
            KernelArg::Homogeneous => KernelVariant::Homogeneous,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate one level of the cell tree with exact geometry.
    ///
    /// CSV columns: code, level, measure, v1x, v1y, v2x, v2y, v3x, v3y.
    GenCells {
        #[command(flatten)]
        common: Common,
        /// Level to enumerate (3^level rows).
        #[arg(long, default_value_t = 3)]
        level: u32,
    },

    /// Report the direction-cone half-width and verify the sector conditions.
    ///
    /// CSV columns: epsilon, limit, margin, max_depth, pairs_checked,
    /// triples_checked.
    Epsilon {
        #[command(flatten)]
        common: Common,
        /// Exhaustive sector verification depth.
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },

    /// Run the exact kernel estimate suites: size bound (k1), rigidity (k2),
    /// antisymmetry.
    ///
    /// CSV columns: suite, checked, failures, max_kr_d.
    KernelCheck {
        #[command(flatten)]
        common: Common,
        /// Random pairs for the size-bound suite.
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
        /// Random gated triples for the rigidity suite.
        #[arg(long, default_value_t = 1_000)]
        triples: u64,
        /// Random pairs for the exact antisymmetry suite.
        #[arg(long, default_value_t = 100)]
        antisymmetry: u64,
    },

    /// Verify T^n(1) = 0 as an exact rational at every level-`depth` cell
    /// vertex, for every truncation level n up to `depth`.
    ///
    /// CSV columns: level, points, nonzero.
    T1Verify {
        #[command(flatten)]
        common: Common,
        /// Cell level supplying the evaluation points and the deepest n.
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },

    /// Estimate discretized operator norms level by level.
    ///
    /// CSV columns: level, norm.
    NormProbe {
        #[command(flatten)]
        common: Common,
        /// Deepest discretization level.
        #[arg(long, default_value_t = 6)]
        max_level: u32,
        /// Kernel variant to discretize.
        #[arg(long, value_enum, default_value_t = KernelArg::Plateau)]
        kernel: KernelArg,
    },

    /// Trace the diverging truncations of T(1) at an eventually periodic
    /// point along its certified isolating annuli.
    ///
    /// CSV columns: switch_index, kind, epsilon, value; the trace is followed
    /// by one JSON line bundling the annulus certificates.
    PvDemo {
        #[command(flatten)]
        common: Common,
        /// Eventually periodic code, e.g. "(3)(12)^inf".
        #[arg(long)]
        code: String,
        /// Certify every switch index among the first `depth` symbols.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },

    /// Bracket the measures of random balls against r^d (regularity check).
    ///
    /// CSV columns: center, radius, r_pow_d, lower, upper, within_factor.
    BallMeasure {
        #[command(flatten)]
        common: Common,
        /// Number of random balls.
        #[arg(long, default_value_t = 50)]
        count: u64,
        /// Subdivision cap for the exact bracketing.
        #[arg(long = "depth", default_value_t = 14)]
        depth_cap: u32,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::GenCells { common, .. }
            | Command::Epsilon { common, .. }
            | Command::KernelCheck { common, .. }
            | Command::T1Verify { common, .. }
            | Command::NormProbe { common, .. }
            | Command::PvDemo { common, .. }
            | Command::BallMeasure { common, .. } => common,
        }
    }

    fn kernel_variant(&self) -> KernelVariant {
        match self {
            Command::NormProbe { kernel, .. } => (*kernel).into(),
            _ => KernelVariant::Plateau,
        }
    }
}

/// Full run configuration distilled from the parsed flags.
pub struct RunConfig {
    pub params: GasketParams,
    pub variant: KernelVariant,
    pub format: FormatArg,
    pub seed: u64,
}

/// Parses "p/q" into validated gasket parameters.
pub fn parse_lambda(s: &str) -> Result<GasketParams, Error> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::InvalidLambda(format!("{s} (expected a fraction p/q)")))?;
    let p: i64 = p.trim().parse().map_err(|_| Error::InvalidLambda(s.to_string()))?;
    let q: i64 = q.trim().parse().map_err(|_| Error::InvalidLambda(s.to_string()))?;
    GasketParams::from_fraction(p, q)
}

/// Entry point used by the binary: resolves `--out`, runs, returns the exit
/// code. Usage problems (including clap parse errors) exit 2.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command.common().out {
        Some(path) => {
            let file = match std::fs::File::create(path) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: cannot open {}: {e}", path.display());
                    return 2;
                }
            };
            let mut w = io::BufWriter::new(file);
            let code = execute(&cli.command, &mut w);
            if w.flush().is_err() {
                return 1;
            }
            code
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            execute(&cli.command, &mut w)
        }
    }
}

/// Runs one parsed subcommand against a writer and maps errors to the exit
/// code contract. All output (header, rows, witnesses) goes to `w`.
pub fn execute(cmd: &Command, w: &mut dyn Write) -> i32 {
    match run(cmd, w) {
        Ok(code) => code,
        Err(e) => {
            if usage_error(&e) {
                eprintln!("error: {e}");
                2
            } else {
                let _ = writeln!(w, "{}", serde_json::json!({ "error": e.to_string() }));
                1
            }
        }
    }
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidLambda(_)
            | Error::BadSymbol(_)
            | Error::EmptyPeriod
            | Error::BadCodeFormat(_)
            | Error::InvalidRadius(_)
            | Error::CliUsage { .. }
    )
}

#[derive(Serialize)]
struct Header<'a> {
    lambda: &'a str,
    d: f64,
    epsilon: f64,
    kernel: String,
    seed: u64,
}

fn run(cmd: &Command, w: &mut dyn Write) -> Result<i32, Error> {
    let common = cmd.common();
    let params = parse_lambda(&common.lambda)?;
    let spec = KernelSpec::new(params, cmd.kernel_variant())?;
    let cfg = RunConfig {
        params: spec.params().clone(),
        variant: spec.variant(),
        format: common.format,
        seed: common.seed,
    };
    let header = Header {
        lambda: &common.lambda,
        d: cfg.params.dim(),
        epsilon: spec.epsilon(),
        kernel: cfg.variant.to_string(),
        seed: cfg.seed,
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    match cmd {
        Command::GenCells { level, .. } => gen_cells(&cfg, *level, &spec, w),
        Command::Epsilon { depth, .. } => epsilon_report(&cfg, *depth, &spec, w),
        Command::KernelCheck { pairs, triples, antisymmetry, .. } => {
            kernel_check(&cfg, *pairs, *triples, *antisymmetry, &spec, w)
        }
        Command::T1Verify { depth, .. } => t1_verify(&cfg, *depth, &spec, w),
        Command::NormProbe { max_level, .. } => norm_probe(&cfg, *max_level, &spec, w),
        Command::PvDemo { code, depth, .. } => pv_demo(&cfg, code, *depth, &spec, w),
        Command::BallMeasure { count, depth_cap, .. } => {
            ball_measure(&cfg, *count, *depth_cap, &spec, w)
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn csv_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit_row<T: Serialize>(cfg: &RunConfig, w: &mut dyn Write, row: &T, csv: String) -> Result<(), Error> {
    match cfg.format {
        FormatArg::Json => writeln!(w, "{}", serde_json::to_string(row)?)?,
        FormatArg::Csv => writeln!(w, "{csv}")?,
    }
    Ok(())
}

fn csv_header(cfg: &RunConfig, w: &mut dyn Write, columns: &str) -> Result<(), Error> {
    if cfg.format == FormatArg::Csv {
        writeln!(w, "{columns}")?;
    }
    Ok(())
}

// ---- gen-cells ----

#[derive(Serialize)]
struct CellRow<'a> {
    code: String,
    level: u32,
    #[serde(serialize_with = "crate::exactfield::serialize_rat")]
    measure: Rat,
    vertices: &'a [crate::gasket::Point; 3],
}

fn gen_cells(cfg: &RunConfig, level: u32, _spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    csv_header(cfg, w, "code,level,measure,v1x,v1y,v2x,v2y,v3x,v3y")?;
    crate::kernel::for_each_cell(&cfg.params, level, &mut |cell| {
        let row = CellRow {
            code: cell.code().to_string(),
            level: cell.level(),
            measure: cell.measure(),
            vertices: cell.vertices(),
        };
        let mut csv = format!("{},{},{}", row.code, row.level, row.measure);
        for v in row.vertices {
            let [x, y] = v.to_f64();
            let _ = write!(csv, ",{},{}", csv_f(x), csv_f(y));
        }
        emit_row(cfg, w, &row, csv)
    })?;
    Ok(0)
}

// ---- epsilon ----

#[derive(Serialize)]
struct EpsilonRow {
    epsilon: f64,
    limit: f64,
    margin: f64,
    max_depth: u32,
    pairs_checked: usize,
    triples_checked: usize,
}

fn epsilon_report(cfg: &RunConfig, depth: u32, spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    let report = verify_sector_conditions(&cfg.params, depth)?;
    let limit = std::f64::consts::PI / 6.0;
    let row = EpsilonRow {
        epsilon: spec.epsilon(),
        limit,
        margin: limit - spec.epsilon(),
        max_depth: report.max_depth,
        pairs_checked: report.pairs_checked,
        triples_checked: report.triples_checked,
    };
    csv_header(cfg, w, "epsilon,limit,margin,max_depth,pairs_checked,triples_checked")?;
    let csv = format!(
        "{},{},{},{},{},{}",
        csv_f(row.epsilon),
        csv_f(row.limit),
        csv_f(row.margin),
        row.max_depth,
        row.pairs_checked,
        row.triples_checked
    );
    emit_row(cfg, w, &row, csv)?;
    Ok(0)
}

// ---- kernel-check ----

#[derive(Serialize)]
struct SuiteRow {
    suite: &'static str,
    checked: u64,
    failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_kr_d: Option<f64>,
}

fn suite_csv(row: &SuiteRow) -> String {
    format!(
        "{},{},{},{}",
        row.suite,
        row.checked,
        row.failures,
        row.max_kr_d.map(csv_f).unwrap_or_default()
    )
}

/// Random eventually periodic point whose code starts with `base`.
fn epoint_with_prefix(params: &GasketParams, rng: &mut ChaCha8Rng, base: &[u8]) -> EPoint {
    let mut prefix = base.to_vec();
    for _ in 0..rng.gen_range(0..=2) {
        prefix.push(rng.gen_range(1..=3));
    }
    let period: Vec<u8> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=3u8)).collect();
    EPoint::new(
        params,
        Code::from_symbols(&prefix).expect("alphabet respected"),
        Code::from_symbols(&period).expect("alphabet respected"),
    )
    .expect("nonempty period")
}

fn kernel_check(
    cfg: &RunConfig,
    pairs: u64,
    triples: u64,
    antisymmetry: u64,
    spec: &KernelSpec,
    w: &mut dyn Write,
) -> Result<i32, Error> {
    if cfg.variant != KernelVariant::Plateau {
        return Err(Error::CliUsage {
            flag: "--kernel",
            message: "the exact estimate suites are defined for the plateau kernel".into(),
        });
    }
    csv_header(cfg, w, "suite,checked,failures,max_kr_d")?;
    let mut witness: Option<serde_json::Value> = None;
    let d = cfg.params.dim();

    // (k1): |K(x,y)| |x-y|^d <= 3, checked in floats on exact kernel values
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut max_kr_d: f64 = 0.0;
    let mut k1_failures = 0;
    for _ in 0..pairs {
        let x = sample_epoint(&cfg.params, &mut rng, 6, 3);
        let y = loop {
            let y = sample_epoint(&cfg.params, &mut rng, 6, 3);
            if y.point() != x.point() {
                break y;
            }
        };
        let k = kernel_eval_exact(x.point(), y.point(), spec)?;
        let r_sq = x.point().dist_sq(y.point()).to_f64();
        let product = rat_to_f64(&k).abs() * r_sq.powf(d / 2.0);
        max_kr_d = max_kr_d.max(product);
        if product > 3.0 + 1e-9 {
            k1_failures += 1;
            witness.get_or_insert_with(|| {
                serde_json::json!({
                    "suite": "k1", "x": x.to_string(), "y": y.to_string(),
                    "kernel": k.to_string(), "product": product,
                })
            });
        }
    }
    let row = SuiteRow { suite: "k1", checked: pairs, failures: k1_failures, max_kr_d: Some(max_kr_d) };
    emit_row(cfg, w, &row, suite_csv(&row))?;

    // (k2): gated triples built inside one parent cell so the exact gate
    // |x-z| < (1-2 lambda)|x-y| holds by construction, then re-checked exactly
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut k2_failures = 0;
    for _ in 0..triples {
        let mut alpha: Vec<u8> = Vec::new();
        for _ in 0..rng.gen_range(0..=4) {
            alpha.push(rng.gen_range(1..=3));
        }
        let i = rng.gen_range(1..=3u8);
        let j = loop {
            let j = rng.gen_range(1..=3u8);
            if j != i {
                break j;
            }
        };
        let mut inner = alpha.clone();
        inner.push(i);
        inner.push(rng.gen_range(1..=3));
        let x = epoint_with_prefix(&cfg.params, &mut rng, &inner);
        let z = epoint_with_prefix(&cfg.params, &mut rng, &inner);
        let mut other = alpha.clone();
        other.push(j);
        let y = epoint_with_prefix(&cfg.params, &mut rng, &other);
        match check_k2(x.point(), z.point(), y.point(), spec)? {
            K2Outcome::Holds => {}
            K2Outcome::NotApplicable => {
                k2_failures += 1;
                witness.get_or_insert_with(|| {
                    serde_json::json!({
                        "suite": "k2", "x": x.to_string(), "z": z.to_string(),
                        "y": y.to_string(), "note": "constructed triple missed the gate",
                    })
                });
            }
        }
    }
    let row = SuiteRow { suite: "k2", checked: triples, failures: k2_failures, max_kr_d: None };
    emit_row(cfg, w, &row, suite_csv(&row))?;

    // antisymmetry: K(x,y) = -K(y,x) exactly
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut anti_failures = 0;
    for _ in 0..antisymmetry {
        let x = sample_epoint(&cfg.params, &mut rng, 6, 3);
        let y = loop {
            let y = sample_epoint(&cfg.params, &mut rng, 6, 3);
            if y.point() != x.point() {
                break y;
            }
        };
        let kxy = kernel_eval_exact(x.point(), y.point(), spec)?;
        let kyx = kernel_eval_exact(y.point(), x.point(), spec)?;
        if kxy != -&kyx {
            anti_failures += 1;
            witness.get_or_insert_with(|| {
                serde_json::json!({
                    "suite": "antisymmetry", "x": x.to_string(), "y": y.to_string(),
                    "kxy": kxy.to_string(), "kyx": kyx.to_string(),
                })
            });
        }
    }
    let row = SuiteRow { suite: "antisymmetry", checked: antisymmetry, failures: anti_failures, max_kr_d: None };
    emit_row(cfg, w, &row, suite_csv(&row))?;

    if let Some(witness) = witness {
        writeln!(w, "{}", serde_json::json!({ "error": "kernel estimate violated", "witness": witness }))?;
        return Ok(1);
    }
    Ok(0)
}

// ---- t1-verify ----

#[derive(Serialize)]
struct T1Row {
    level: u32,
    points: u64,
    nonzero: u64,
}

fn t1_verify(cfg: &RunConfig, depth: u32, spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    let one = CellFunction::one(0);
    let npoints = 3usize.pow(depth);
    let mut points = Vec::with_capacity(npoints);
    for idx in 0..npoints {
        let code = Code::from_index(depth, idx);
        points.push(EPoint::cell_vertex(&cfg.params, &code, 1)?);
    }
    csv_header(cfg, w, "level,points,nonzero")?;
    let mut witness: Option<serde_json::Value> = None;
    let mut total_nonzero = 0u64;
    for level in 1..=depth {
        let mut nonzero = 0u64;
        for x in &points {
            let value = truncated_apply_exact(&one, x, level, spec)?;
            if !num_traits::Zero::is_zero(&value) {
                nonzero += 1;
                witness.get_or_insert_with(|| {
                    serde_json::json!({
                        "point": x.to_string(), "level": level, "value": value.to_string(),
                    })
                });
            }
        }
        total_nonzero += nonzero;
        let row = T1Row { level, points: npoints as u64, nonzero };
        emit_row(cfg, w, &row, format!("{},{},{}", row.level, row.points, row.nonzero))?;
    }
    if let Some(witness) = witness {
        writeln!(w, "{}", serde_json::json!({ "error": "T^n(1) not exactly zero", "witness": witness }))?;
        return Ok(1);
    }
    let report = format!("0 exact, {npoints} points × {depth} levels");
    match cfg.format {
        FormatArg::Json => {
            writeln!(w, "{}", serde_json::json!({ "report": report, "nonzero": total_nonzero }))?
        }
        FormatArg::Csv => writeln!(w, "# {report}")?,
    }
    Ok(0)
}

// ---- norm-probe ----

#[derive(Serialize)]
struct NormRow {
    level: u32,
    norm: f64,
}

fn norm_probe(cfg: &RunConfig, max_level: u32, spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    csv_header(cfg, w, "level,norm")?;
    for level in 1..=max_level {
        let m = build_matrix(level, spec)?;
        let norm = operator_norm(&m, cfg.seed)?;
        let row = NormRow { level, norm };
        emit_row(cfg, w, &row, format!("{},{}", row.level, csv_f(row.norm)))?;
    }
    Ok(0)
}

// ---- pv-demo ----

#[derive(Serialize)]
struct CertificateBundle {
    code: String,
    depth: usize,
    certificates: Vec<PvCertificate>,
    /// Exact oscillation `3^-m` across each certified annulus, as "p/q".
    oscillations: Vec<String>,
}

fn pv_demo(cfg: &RunConfig, code: &str, depth: usize, spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    let (prefix, period) = parse_periodic_code(code)?;
    let z = EPoint::new(&cfg.params, prefix, period)?;
    csv_header(cfg, w, "switch_index,kind,epsilon,value")?;
    for row in pv_trace(&z, depth, spec)? {
        let kind = match row.kind {
            crate::pv::TraceKind::Outer => "outer",
            crate::pv::TraceKind::Inner => "inner",
            crate::pv::TraceKind::Aligned => "aligned",
        };
        let csv = format!("{},{},{},{}", row.switch_index, kind, csv_f(row.epsilon), csv_f(row.value));
        emit_row(cfg, w, &row, csv)?;
    }
    let mut bundle = CertificateBundle {
        code: z.to_string(),
        depth,
        certificates: Vec::new(),
        oscillations: Vec::new(),
    };
    for i in switch_indices(&z.code_prefix(depth + 1)).indices {
        let cert = find_annulus(&z, i, spec)?;
        bundle.oscillations.push(oscillation_exact(&cert, spec)?.to_string());
        bundle.certificates.push(cert);
    }
    writeln!(w, "{}", serde_json::to_string(&bundle)?)?;
    Ok(0)
}

// ---- ball-measure ----

#[derive(Serialize)]
struct BallRow {
    center: String,
    radius: f64,
    r_pow_d: f64,
    lower: f64,
    upper: f64,
    #[serde(serialize_with = "crate::exactfield::serialize_rat")]
    lower_exact: Rat,
    #[serde(serialize_with = "crate::exactfield::serialize_rat")]
    upper_exact: Rat,
    within_factor: f64,
}

fn ball_measure(cfg: &RunConfig, count: u64, depth_cap: u32, _spec: &KernelSpec, w: &mut dyn Write) -> Result<i32, Error> {
    csv_header(cfg, w, "center,radius,r_pow_d,lower,upper,within_factor")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut witness: Option<serde_json::Value> = None;
    for _ in 0..count {
        let z = sample_epoint(&cfg.params, &mut rng, 6, 3);
        let radius = Rat::from_float(rng.gen_range(0.05..=1.0f64)).expect("finite float");
        let bounds = ball_measure_bounds(&cfg.params, z.point(), &radius, depth_cap)?;
        let r = radius.to_f64().expect("small rational");
        let r_pow_d = r.powf(cfg.params.dim());
        let lower = rat_to_f64(&bounds.lower);
        let upper = rat_to_f64(&bounds.upper);
        let within_factor = (upper / r_pow_d).max(r_pow_d / lower);
        let row = BallRow {
            center: z.to_string(),
            radius: r,
            r_pow_d,
            lower,
            upper,
            lower_exact: bounds.lower.clone(),
            upper_exact: bounds.upper.clone(),
            within_factor,
        };
        let csv = format!(
            "{},{},{},{},{},{}",
            row.center,
            csv_f(row.radius),
            csv_f(row.r_pow_d),
            csv_f(row.lower),
            csv_f(row.upper),
            csv_f(row.within_factor)
        );
        emit_row(cfg, w, &row, csv)?;
        if !(within_factor <= 3.01) {
            witness.get_or_insert_with(|| serde_json::to_value(&row).expect("serializable row"));
        }
    }
    if let Some(witness) = witness {
        writeln!(w, "{}", serde_json::json!({ "error": "regularity bracket violated", "witness": witness }))?;
        return Ok(1);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn capture(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(args).expect("parsable");
        let mut buf = Vec::new();
        let code = execute(&cli.command, &mut buf);
        (code, String::from_utf8(buf).expect("utf8 output"))
    }

    #[test]
    fn header_then_rows() {
        let (code, out) = capture(&["czgasket", "gen-cells", "--level", "1"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(header["lambda"], "1/4");
        assert_eq!(header["kernel"], "plateau");
        assert_eq!(header["seed"], 0);
        assert!((header["d"].as_f64().unwrap() - 3f64.ln() / 4f64.ln()).abs() < 1e-12);
        let rows: Vec<serde_json::Value> =
            lines.map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0]["code"], "1");
        assert_eq!(rows[0]["measure"], "1/3");
    }

    #[test]
    fn invalid_lambda_is_usage_error() {
        for bad in ["1/3", "0/4", "2/4", "x", "1/0", "0.3"] {
            let cli = Cli::try_parse_from(["czgasket", "epsilon", "--lambda", bad]).unwrap();
            let mut buf = Vec::new();
            assert_eq!(execute(&cli.command, &mut buf), 2, "lambda {bad}");
            // usage errors leave the output stream untouched
            assert!(buf.is_empty());
        }
        // a leading hyphen never reaches the handler: clap rejects it as a flag
        assert!(Cli::try_parse_from(["czgasket", "epsilon", "--lambda", "-1/4"]).is_err());
    }

    #[test]
    fn t1_verify_reports_exact_zero() {
        let (code, out) = capture(&["czgasket", "t1-verify", "--lambda", "1/5", "--depth", "3"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"report\":\"0 exact, 27 points × 3 levels\""));
    }

    #[test]
    fn csv_rows_have_17_digit_floats() {
        let (code, out) =
            capture(&["czgasket", "norm-probe", "--max-level", "2", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[1], "level,norm");
        assert!(lines[2].starts_with("1,5.7735026918962"));
        assert!(lines[2].contains('e'));
    }

    #[test]
    fn deterministic_bytes() {
        let args = ["czgasket", "ball-measure", "--count", "3", "--seed", "7", "--depth", "10"];
        let (c1, o1) = capture(&args);
        let (c2, o2) = capture(&args);
        assert_eq!(c1, 0);
        assert_eq!(c1, c2);
        assert_eq!(o1, o2);
        assert!(!o1.is_empty());
    }

    #[test]
    fn pv_demo_emits_trace_and_bundle() {
        let (code, out) = capture(&[
            "czgasket", "pv-demo", "--code", "(3)(12)^inf", "--depth", "4", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[1], "switch_index,kind,epsilon,value");
        assert!(lines[2].starts_with("1,outer,"));
        let bundle: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
        assert_eq!(bundle["code"], "(3)(12)^inf");
        assert_eq!(bundle["oscillations"][0], "1/9");
        assert!(bundle["certificates"].as_array().unwrap().len() >= 3);
    }

    #[test]
    fn kernel_check_small_counts_pass() {
        let (code, out) = capture(&[
            "czgasket", "kernel-check", "--lambda", "3/10", "--pairs", "200", "--triples", "50",
            "--antisymmetry", "20",
        ]);
        assert_eq!(code, 0);
        let rows: Vec<serde_json::Value> =
            out.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row["failures"], 0);
        }
        assert!(rows[0]["max_kr_d"].as_f64().unwrap() <= 3.0 + 1e-9);
    }

    #[test]
    fn bad_code_is_usage_error() {
        let cli =
            Cli::try_parse_from(["czgasket", "pv-demo", "--code", "12-3", "--depth", "2"]).unwrap();
        let mut buf = Vec::new();
        assert_eq!(execute(&cli.command, &mut buf), 2);
    }
}
