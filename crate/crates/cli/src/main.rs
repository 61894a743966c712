//! Command-line front end: set construction, sieving, estimation and
//! reporting as reproducible runs.
//!
//! Exit codes: 0 success, 2 usage/config errors, 3 verification failures.
//! Every JSON report embeds the resolved configuration; identical
//! configuration and seed produce byte-identical files for any `--workers`.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use llike_core::bounds::{hall_tenenbaum_bound, BoundReport};
use llike_core::coprime_set::{
    builtin_family, decompose, read_generator_file, CoprimeSet, FamilySpec, Variant,
    MAX_SIEVE_BOUND,
};
use llike_core::estimators::{
    convergence_grid, correlate, mean, truncation_diagnostic, CorrelationSpec, EstimatorOptions,
};
use llike_core::report::{
    semigroup_csv, sieve_table_csv, svg_line_chart, write_csv, write_sieve_dump, Series,
};
use llike_core::semigroup;
use llike_core::sieve::{sieve_range, sieve_range_with_c_part, SieveTable, MAX_TABLE_LEN};
use llike_core::verify::run_verification;

use config::{parse_f64_list, parse_u64_list, FileConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "llike",
    version,
    about = "Sign functions over pairwise coprime generator sets: sieving, means, correlations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a set into composite and prime parts
    Decompose(DecomposeArgs),
    /// Enumerate the composite semigroup and its summatory masses
    Semigroup(SemigroupArgs),
    /// Exact mean of the sign function up to x
    Mean(MeanArgs),
    /// Exact correlation average over shifted positions
    Correlate(CorrelateArgs),
    /// Prefix means or correlations over an ascending grid
    Grid(GridArgs),
    /// Prime reciprocal sums and the multiplicative mean-value envelope
    Bounds(BoundsArgs),
    /// Seeded self-checks against the brute-force oracle
    Verify(VerifyArgs),
    /// Sieve a range and write the table (binary dump or CSV)
    SieveDump(SieveDumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum FamilyName {
    AllPrimes,
    AugmentedPrimes,
    SparsePrimes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantName {
    Omega,
    BigOmega,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatName {
    Json,
    Csv,
    Binary,
}

impl FormatName {
    fn as_str(self) -> &'static str {
        match self {
            FormatName::Json => "json",
            FormatName::Csv => "csv",
            FormatName::Binary => "binary",
        }
    }
}

#[derive(Args, Clone)]
struct SetArgs {
    /// Built-in family
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Comma-separated composites injected into augmented-primes
    #[arg(long)]
    inject: Option<String>,
    /// Generator file: one decimal per line, '#' comments
    #[arg(long, value_name = "PATH", conflicts_with = "family")]
    set: Option<PathBuf>,
    /// Sign variant
    #[arg(long, value_enum)]
    variant: Option<VariantName>,
    /// Materialization bound for family sets
    #[arg(long)]
    xmax: Option<u64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Worker threads for segment parallelism; never affects results
    #[arg(long)]
    workers: Option<usize>,
    /// Segment length in integers
    #[arg(long, env = "LLIKE_SEGMENT_LEN")]
    segment_len: Option<usize>,
    /// JSON config file; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for randomized suites; embedded in reports when given
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Report file path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<FormatName>,
    /// SVG chart path (grid, bounds, mean, correlate)
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SemigroupArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Enumeration bound
    #[arg(long)]
    x: Option<u64>,
    /// Also report the reciprocal tail mass above this threshold
    #[arg(long)]
    tail_threshold: Option<u64>,
    /// Also report the lcm moment of this arity (1..=4)
    #[arg(long)]
    moment_arity: Option<u32>,
}

#[derive(Args)]
struct MeanArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    x: Option<u64>,
    /// Also expand the mean over the composite semigroup, truncated here
    #[arg(long)]
    tail_threshold: Option<u64>,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    x: Option<u64>,
    /// Arity; must match the coefficient and shift lists when given
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated coefficients
    #[arg(long)]
    a: Option<String>,
    /// Comma-separated shifts
    #[arg(long)]
    h: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Ascending comma-separated grid of x values
    #[arg(long)]
    grid: Option<String>,
    /// Correlation coefficients (mean when omitted)
    #[arg(long)]
    a: Option<String>,
    /// Correlation shifts (mean when omitted)
    #[arg(long)]
    h: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    x: Option<u64>,
    /// Envelope constant
    #[arg(long, conflicts_with = "k_grid")]
    k_const: Option<f64>,
    /// Sweep these x values instead of a single --x
    #[arg(long, conflicts_with = "x")]
    x_grid: Option<String>,
    /// Sweep these envelope constants at a fixed --x
    #[arg(long, conflicts_with = "x_grid")]
    k_grid: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Check all n up to this bound
    #[arg(long)]
    nmax: Option<u64>,
    /// Number of seeded random sets
    #[arg(long)]
    sets: Option<u64>,
}

#[derive(Args)]
struct SieveDumpArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    /// Also compute the composite-part plane (CSV output only)
    #[arg(long)]
    with_c_part: bool,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Semigroup(args) => cmd_semigroup(args),
        Command::Mean(args) => cmd_mean(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Verify(args) => cmd_verify(args),
        Command::SieveDump(args) => cmd_sieve_dump(args),
    }
}

/// Shared resolution state: file config merged under flags.
struct Resolved {
    file: FileConfig,
    variant: Variant,
    segment_len: usize,
    format: FormatName,
    opts: EstimatorOptions,
}

fn resolve_common(
    command: &str,
    set_args: Option<&SetArgs>,
    run: &RunArgs,
    output: &OutputArgs,
    default_format: FormatName,
) -> anyhow::Result<(Resolved, RunConfig)> {
    let file = match &run.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let variant_name = set_args.and_then(|s| s.variant).map(|v| match v {
        VariantName::Omega => "omega".to_string(),
        VariantName::BigOmega => "big-omega".to_string(),
    });
    let variant_str = variant_name
        .or_else(|| file.variant.clone())
        .unwrap_or_else(|| "big-omega".to_string());
    let variant = match variant_str.as_str() {
        "omega" => Variant::Omega,
        "big-omega" => Variant::BigOmega,
        other => bail!("unknown variant {other:?} (use omega or big-omega)"),
    };
    let segment_len = run
        .segment_len
        .or(file.segment_len)
        .unwrap_or(llike_core::sieve::DEFAULT_SEGMENT_LEN);
    if segment_len < 64 {
        bail!("segment length must be at least 64");
    }
    let format = match output.format {
        Some(f) => f,
        None => match file.format.as_deref() {
            Some("csv") => FormatName::Csv,
            Some("binary") => FormatName::Binary,
            Some("json") => FormatName::Json,
            None => default_format,
            Some(other) => bail!("unknown format {other:?}"),
        },
    };
    let workers = run.workers.or(file.workers).unwrap_or(1);
    if workers == 0 {
        bail!("workers must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .ok();

    let mut config = RunConfig::new(
        command,
        variant_str,
        segment_len,
        format.as_str().to_string(),
    );
    config.seed = run.seed.or(file.seed);
    Ok((
        Resolved {
            file,
            variant,
            segment_len,
            format,
            opts: EstimatorOptions::with_segment_len(segment_len),
        },
        config,
    ))
}

/// Builds the generator set. `needed_bound` is what the command's own
/// parameters require; an explicit `--xmax` (or config value) wins.
fn resolve_set(
    resolved: &Resolved,
    set_args: &SetArgs,
    config: &mut RunConfig,
    needed_bound: Option<u64>,
) -> anyhow::Result<CoprimeSet> {
    let xmax = set_args.xmax.or(resolved.file.xmax);
    let set_path = set_args
        .set
        .clone()
        .or_else(|| resolved.file.set.as_ref().map(PathBuf::from));
    if let Some(path) = set_path {
        let generators = read_generator_file(&path)?;
        let bound = xmax.or(needed_bound).unwrap_or(MAX_SIEVE_BOUND);
        config.set_file = Some(path.display().to_string());
        config.xmax = Some(bound);
        let family = format!("file:{}", path.display());
        return Ok(CoprimeSet::validate(
            generators,
            resolved.variant,
            family,
            bound,
        )?);
    }
    let family_name = set_args.family.or_else(|| {
        resolved.file.family.as_deref().and_then(|f| match f {
            "all-primes" => Some(FamilyName::AllPrimes),
            "augmented-primes" => Some(FamilyName::AugmentedPrimes),
            "sparse-primes" => Some(FamilyName::SparsePrimes),
            _ => None,
        })
    });
    let Some(family_name) = family_name else {
        bail!("no set given: pass --family or --set (or put one in the config file)");
    };
    let inject = match &set_args.inject {
        Some(list) => Some(parse_u64_list(list)?),
        None => resolved.file.inject.clone(),
    };
    let spec = match family_name {
        FamilyName::AllPrimes => FamilySpec::AllPrimes,
        FamilyName::SparsePrimes => FamilySpec::SparsePrimes,
        FamilyName::AugmentedPrimes => FamilySpec::AugmentedPrimes {
            inject: inject
                .clone()
                .ok_or_else(|| anyhow!("augmented-primes needs --inject"))?,
        },
    };
    if family_name != FamilyName::AugmentedPrimes && inject.is_some() {
        bail!("--inject only applies to --family augmented-primes");
    }
    let bound = xmax
        .or(needed_bound)
        .ok_or_else(|| anyhow!("this command needs --xmax for a family set"))?;
    config.family = Some(spec.tag());
    if let FamilySpec::AugmentedPrimes { inject } = &spec {
        config.inject = inject.clone();
    }
    config.xmax = Some(bound);
    Ok(builtin_family(&spec, resolved.variant, bound)?)
}

fn correlation_spec_from(
    a: &Option<String>,
    h: &Option<String>,
    k: Option<usize>,
    file: &FileConfig,
) -> anyhow::Result<CorrelationSpec> {
    let coeffs = match a {
        Some(list) => parse_u64_list(list)?,
        None => file.a.clone().ok_or_else(|| anyhow!("missing --a"))?,
    };
    let shifts = match h {
        Some(list) => parse_u64_list(list)?,
        None => file.h.clone().ok_or_else(|| anyhow!("missing --h"))?,
    };
    if let Some(k) = k {
        if k != coeffs.len() || k != shifts.len() {
            bail!(
                "--k {k} does not match the {} coefficients / {} shifts",
                coeffs.len(),
                shifts.len()
            );
        }
    }
    Ok(CorrelationSpec::new(coeffs, shifts)?)
}

fn write_output(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, body: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(body)?;
    text.push('\n');
    match out {
        Some(path) => write_output(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_csv(out: &Option<PathBuf>, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows.into_iter())?;
    match out {
        Some(path) => write_output(path, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(())
}

fn preview(values: &[u64], limit: usize) -> String {
    let mut parts: Vec<String> = values.iter().take(limit).map(|v| v.to_string()).collect();
    if values.len() > limit {
        parts.push(format!("... ({} total)", values.len()));
    }
    parts.join(" ")
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DecomposeReport {
    config: RunConfig,
    set: llike_core::SetDescriptor,
    composites: Vec<u64>,
    spf: Vec<(u64, u64)>,
    prime_count: u64,
    primes_preview: Vec<u64>,
    recip_sum_composites: llike_core::rational::ReciprocalSum,
    recip_sum_primes: llike_core::rational::ReciprocalSum,
}

fn cmd_decompose(args: DecomposeArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "decompose",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let set = resolve_set(&resolved, &args.set, &mut config, None)?;
    let d = decompose(&set)?;

    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    if !quiet {
        println!(
            "composites ({}): {}",
            d.composites().len(),
            preview(d.composites(), 20)
        );
        println!("primes ({}): {}", d.primes().len(), preview(d.primes(), 20));
        for &(c, p) in d.spf_pairs() {
            println!("spf: {c} -> {p}");
        }
        println!(
            "recip sums: composites = {}, primes = {}",
            d.recip_sum_composites(),
            d.recip_sum_primes()
        );
    }

    match resolved.format {
        FormatName::Json => {
            let report = DecomposeReport {
                config,
                set: set.descriptor(),
                composites: d.composites().to_vec(),
                spf: d.spf_pairs().to_vec(),
                prime_count: d.primes().len() as u64,
                primes_preview: d.primes().iter().take(100).copied().collect(),
                recip_sum_composites: d.recip_sum_composites().clone(),
                recip_sum_primes: d.recip_sum_primes().clone(),
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => {
            let mut rows = Vec::new();
            for &(c, p) in d.spf_pairs() {
                rows.push(vec!["composite".into(), c.to_string(), p.to_string()]);
            }
            for &p in d.primes() {
                rows.push(vec!["prime".into(), p.to_string(), String::new()]);
            }
            emit_csv(&args.output.out, &["part", "generator", "spf"], rows)?;
        }
        FormatName::Binary => bail!("decompose has no binary format"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// semigroup
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SemigroupReport {
    config: RunConfig,
    set: llike_core::SetDescriptor,
    x: u64,
    count: u64,
    sqrt_cap: u64,
    mass: semigroup::MassReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<semigroup::TailReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    moment: Option<semigroup::MomentReport>,
    elements: Vec<u64>,
}

fn cmd_semigroup(args: SemigroupArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "semigroup",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let x = args
        .x
        .or(resolved.file.x)
        .ok_or_else(|| anyhow!("semigroup needs --x"))?;
    config.x = Some(x);
    let set = resolve_set(&resolved, &args.set, &mut config, Some(x))?;
    let d = decompose(&set)?;
    let enumeration = semigroup::enumerate(d.composites(), x)?;
    let mass = semigroup::reciprocal_mass(&enumeration);
    let tail_threshold = args.tail_threshold.or(resolved.file.tail_threshold);
    config.tail_threshold = tail_threshold;
    let tail = tail_threshold
        .map(|t| semigroup::tail_mass(&enumeration, t))
        .transpose()?;
    let moment_arity = args.moment_arity.or(resolved.file.moment_arity);
    config.moment_arity = moment_arity;
    let moment = moment_arity
        .map(|l| semigroup::lcm_moment(d.composites(), l, x))
        .transpose()?;

    // keep stdout clean when the CSV body itself goes there
    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    if !quiet {
        println!(
            "semigroup elements <= {x}: {} (cap {})",
            enumeration.count(),
            x.isqrt()
        );
        println!(
            "reciprocal mass I(x) = {} ~ {:.9} (product bound {} ~ {:.9})",
            semigroup::rational_string(&mass.value),
            mass.value_f64,
            semigroup::rational_string(&mass.product_bound),
            mass.product_bound_f64
        );
        if let Some(t) = &tail {
            println!(
                "tail mass above {}: {} ~ {:.9} (I(x)/sqrt(T) = {:.9})",
                t.threshold,
                semigroup::rational_string(&t.value),
                t.value_f64,
                t.comparison
            );
        }
        if let Some(m) = &moment {
            println!(
                "lcm moment (arity {}): {} ~ {:.9} over {} tuples (product bound ~ {:.9})",
                m.arity,
                semigroup::rational_string(&m.value),
                m.value_f64,
                m.tuple_count,
                m.product_bound_f64
            );
        }
    }

    match resolved.format {
        FormatName::Json => {
            let report = SemigroupReport {
                config,
                set: set.descriptor(),
                x,
                count: enumeration.count(),
                sqrt_cap: x.isqrt(),
                mass,
                tail,
                moment,
                elements: enumeration.elements().to_vec(),
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => {
            let mut buf = Vec::new();
            semigroup_csv(&mut buf, &enumeration)?;
            match &args.output.out {
                Some(path) => write_output(path, &buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
        FormatName::Binary => bail!("semigroup has no binary format"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// mean / correlate / grid
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MeanReport {
    config: RunConfig,
    set: llike_core::SetDescriptor,
    estimate: llike_core::estimators::Estimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<llike_core::estimators::TruncationReport>,
}

fn cmd_mean(args: MeanArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "mean",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let x = args
        .x
        .or(resolved.file.x)
        .ok_or_else(|| anyhow!("mean needs --x"))?;
    config.x = Some(x);
    let set = resolve_set(&resolved, &args.set, &mut config, Some(x))?;
    let estimate = mean(&set, x, &resolved.opts)?;
    let tail_threshold = args.tail_threshold.or(resolved.file.tail_threshold);
    config.tail_threshold = tail_threshold;
    let truncation = match tail_threshold {
        Some(t) => {
            let d = decompose(&set)?;
            Some(truncation_diagnostic(&set, &d, x, t, &resolved.opts)?)
        }
        None => None,
    };

    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    if !quiet {
        println!(
            "mean x={} count={} value={:?}",
            estimate.x, estimate.count, estimate.value
        );
        if let Some(tr) = &truncation {
            println!(
                "expansion over {} composite parts: total={} direct={} exact_match={}",
                tr.terms.len(),
                tr.total_count,
                tr.direct_count,
                tr.exact_match
            );
            println!(
                "tail above {}: count={} value={:?} mass={} bound_holds={}",
                tr.threshold, tr.tail_count, tr.tail_value, tr.tail_mass, tr.tail_bound_holds
            );
        }
    }

    if let Some(path) = &args.output.svg {
        let points = [((x as f64).log10(), estimate.value.abs())];
        let svg = svg_line_chart(
            "mean decay",
            "log10 x",
            "|mean|",
            &[Series {
                name: "mean",
                points: &points,
            }],
        );
        write_output(path, svg.as_bytes())?;
    }
    match resolved.format {
        FormatName::Json => {
            let report = MeanReport {
                config,
                set: set.descriptor(),
                estimate,
                truncation,
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => {
            if let Some(tr) = &truncation {
                let rows = tr
                    .terms
                    .iter()
                    .map(|t| {
                        vec![
                            t.c_part.to_string(),
                            t.lambda_c.to_string(),
                            t.inner_count.to_string(),
                            t.inner_len.to_string(),
                            t.contribution.to_string(),
                        ]
                    })
                    .collect();
                emit_csv(
                    &args.output.out,
                    &[
                        "c_part",
                        "lambda_c",
                        "inner_count",
                        "inner_len",
                        "contribution",
                    ],
                    rows,
                )?;
            } else {
                emit_csv(
                    &args.output.out,
                    &["x", "count", "value"],
                    vec![vec![
                        estimate.x.to_string(),
                        estimate.count.to_string(),
                        estimate.value.to_string(),
                    ]],
                )?;
            }
        }
        FormatName::Binary => bail!("mean has no binary format"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct CorrelateReport {
    config: RunConfig,
    set: llike_core::SetDescriptor,
    spec: CorrelationSpec,
    estimate: llike_core::estimators::Estimate,
}

fn cmd_correlate(args: CorrelateArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "correlate",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let x = args
        .x
        .or(resolved.file.x)
        .ok_or_else(|| anyhow!("correlate needs --x"))?;
    let spec = correlation_spec_from(&args.a, &args.h, args.k, &resolved.file)?;
    config.x = Some(x);
    config.coeffs = spec.coeffs().to_vec();
    config.shifts = spec.shifts().to_vec();
    let needed = spec.required_bound(x)?;
    let set = resolve_set(&resolved, &args.set, &mut config, Some(needed))?;
    let estimate = correlate(&set, &spec, x, &resolved.opts)?;

    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    if !quiet {
        println!(
            "correlation k={} a={:?} h={:?} x={} count={} value={:?}",
            spec.k(),
            spec.coeffs(),
            spec.shifts(),
            estimate.x,
            estimate.count,
            estimate.value
        );
    }

    if let Some(path) = &args.output.svg {
        let points = [((x as f64).log10(), estimate.value.abs())];
        let svg = svg_line_chart(
            "correlation decay",
            "log10 x",
            "|S_k|",
            &[Series {
                name: "correlation",
                points: &points,
            }],
        );
        write_output(path, svg.as_bytes())?;
    }
    match resolved.format {
        FormatName::Json => {
            let report = CorrelateReport {
                config,
                set: set.descriptor(),
                spec,
                estimate,
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => emit_csv(
            &args.output.out,
            &["x", "count", "value"],
            vec![vec![
                estimate.x.to_string(),
                estimate.count.to_string(),
                estimate.value.to_string(),
            ]],
        )?,
        FormatName::Binary => bail!("correlate has no binary format"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct GridReport {
    config: RunConfig,
    grid: Vec<u64>,
    counts: Vec<i64>,
    values: Vec<f64>,
    report: llike_core::estimators::ConvergenceReport,
}

fn cmd_grid(args: GridArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "grid",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let grid = match &args.grid {
        Some(list) => parse_u64_list(list)?,
        None => resolved
            .file
            .grid
            .clone()
            .ok_or_else(|| anyhow!("grid needs --grid"))?,
    };
    let spec = if args.a.is_some() || args.h.is_some() || resolved.file.a.is_some() {
        correlation_spec_from(&args.a, &args.h, None, &resolved.file)?
    } else {
        CorrelationSpec::mean()
    };
    config.grid = grid.clone();
    config.coeffs = spec.coeffs().to_vec();
    config.shifts = spec.shifts().to_vec();
    let x_last = *grid.last().ok_or_else(|| anyhow!("empty grid"))?;
    let needed = spec.required_bound(x_last)?;
    let set = resolve_set(&resolved, &args.set, &mut config, Some(needed))?;
    let report = convergence_grid(&set, &spec, &grid, &resolved.opts)?;

    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    if !quiet {
        for e in &report.entries {
            println!("x={} count={} value={:?}", e.x, e.count, e.value);
        }
    }

    if let Some(path) = &args.output.svg {
        let points: Vec<(f64, f64)> = report
            .entries
            .iter()
            .map(|e| ((e.x as f64).log10(), e.value.abs()))
            .collect();
        let svg = svg_line_chart(
            "decay over the grid",
            "log10 x",
            "|value|",
            &[Series {
                name: "|value|",
                points: &points,
            }],
        );
        write_output(path, svg.as_bytes())?;
    }
    match resolved.format {
        FormatName::Json => {
            let wrapped = GridReport {
                config,
                grid: report.entries.iter().map(|e| e.x).collect(),
                counts: report.entries.iter().map(|e| e.count).collect(),
                values: report.entries.iter().map(|e| e.value).collect(),
                report,
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &wrapped)?;
            }
        }
        FormatName::Csv => {
            let rows = report
                .entries
                .iter()
                .map(|e| vec![e.x.to_string(), e.count.to_string(), e.value.to_string()])
                .collect();
            emit_csv(&args.output.out, &["x", "count", "value"], rows)?;
        }
        FormatName::Binary => bail!("grid has no binary format"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BoundsReport {
    config: RunConfig,
    set: llike_core::SetDescriptor,
    reports: Vec<BoundReport>,
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "bounds",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Json,
    )?;
    let k_const = args.k_const.or(resolved.file.k_const).unwrap_or(1.0);
    // one (x, K) pair per report: sweep x at fixed K, or K at fixed x
    let mut pairs: Vec<(u64, f64)> = Vec::new();
    if let Some(list) = &args.k_grid {
        let x = args
            .x
            .or(resolved.file.x)
            .ok_or_else(|| anyhow!("--k-grid needs a fixed --x"))?;
        let ks = parse_f64_list(list)?;
        if ks.windows(2).any(|w| w[0] >= w[1]) || ks.iter().any(|&k| k <= 0.0) {
            bail!("--k-grid must be strictly ascending and positive");
        }
        config.x = Some(x);
        config.k_grid = ks.clone();
        pairs.extend(ks.into_iter().map(|k| (x, k)));
    } else {
        let xs = match &args.x_grid {
            Some(list) => parse_u64_list(list)?,
            None => {
                let x = args
                    .x
                    .or(resolved.file.x)
                    .ok_or_else(|| anyhow!("bounds needs --x or --x-grid"))?;
                vec![x]
            }
        };
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            bail!("--x-grid must be strictly ascending");
        }
        config.k_const = Some(k_const);
        if xs.len() == 1 {
            config.x = Some(xs[0]);
        } else {
            config.grid = xs.clone();
        }
        pairs.extend(xs.into_iter().map(|x| (x, k_const)));
    }
    let x_last = pairs.iter().map(|&(x, _)| x).max().unwrap();
    let set = resolve_set(&resolved, &args.set, &mut config, Some(x_last))?;
    let d = decompose(&set)?;
    let quiet = resolved.format == FormatName::Csv && args.output.out.is_none();
    let mut reports = Vec::with_capacity(pairs.len());
    for &(x, k) in &pairs {
        let r = hall_tenenbaum_bound(&set, &d, x, k, &resolved.opts)?;
        if !quiet {
            println!(
                "x={} K={} recip_sum={} envelope={} measured={} ratio={}",
                r.x, r.k, r.recip_sum, r.ht_bound, r.empirical, r.ratio
            );
        }
        reports.push(r);
    }

    if let Some(path) = &args.output.svg {
        let measured: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| ((r.x as f64).log10(), r.empirical))
            .collect();
        let envelope: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| ((r.x as f64).log10(), r.ht_bound))
            .collect();
        let svg = svg_line_chart(
            "measured prime-part sum vs envelope",
            "log10 x",
            "value",
            &[
                Series {
                    name: "measured",
                    points: &measured,
                },
                Series {
                    name: "envelope",
                    points: &envelope,
                },
            ],
        );
        write_output(path, svg.as_bytes())?;
    }
    match resolved.format {
        FormatName::Json => {
            let report = BoundsReport {
                config,
                set: set.descriptor(),
                reports,
            };
            if args.output.out.is_some() {
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => {
            let rows = reports
                .iter()
                .map(|r| {
                    vec![
                        r.x.to_string(),
                        r.k.to_string(),
                        r.recip_sum.to_string(),
                        r.ht_bound.to_string(),
                        r.empirical.to_string(),
                        r.ratio.to_string(),
                    ]
                })
                .collect();
            emit_csv(
                &args.output.out,
                &["x", "k", "recip_sum", "envelope", "measured", "ratio"],
                rows,
            )?;
        }
        FormatName::Binary => bail!("bounds has no binary format"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyReport {
    config: RunConfig,
    summary: llike_core::verify::VerificationSummary,
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) =
        resolve_common("verify", None, &args.run, &args.output, FormatName::Json)?;
    let seed = args.run.seed.or(resolved.file.seed).unwrap_or(42);
    let nmax = args.nmax.or(resolved.file.nmax).unwrap_or(10_000);
    let sets = args.sets.or(resolved.file.sets).unwrap_or(20);
    config.seed = Some(seed);
    config.nmax = Some(nmax);
    config.sets = Some(sets);

    let summary = run_verification(seed, nmax, sets, &resolved.opts)?;
    for check in &summary.checks {
        if check.failures == 0 {
            println!("PASS {} ({} checks)", check.name, check.checked);
        } else {
            println!(
                "FAIL {} ({} of {} failed; first: {})",
                check.name,
                check.failures,
                check.checked,
                check.first_failure.as_deref().unwrap_or("-")
            );
        }
    }
    let all_passed = summary.all_passed();
    if all_passed {
        println!("all identities hold");
    }

    match resolved.format {
        FormatName::Json => {
            if args.output.out.is_some() {
                let report = VerifyReport { config, summary };
                emit_json(&args.output.out, &report)?;
            }
        }
        FormatName::Csv => {
            let rows = summary
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        c.checked.to_string(),
                        c.failures.to_string(),
                    ]
                })
                .collect();
            emit_csv(&args.output.out, &["check", "checked", "failures"], rows)?;
        }
        FormatName::Binary => bail!("verify has no binary format"),
    }
    Ok(if all_passed { 0 } else { 3 })
}

// ---------------------------------------------------------------------------
// sieve-dump
// ---------------------------------------------------------------------------

fn cmd_sieve_dump(args: SieveDumpArgs) -> anyhow::Result<i32> {
    let (resolved, mut config) = resolve_common(
        "sieve-dump",
        Some(&args.set),
        &args.run,
        &args.output,
        FormatName::Binary,
    )?;
    let lo = args.lo.or(resolved.file.lo).unwrap_or(1);
    let hi = args
        .hi
        .or(resolved.file.hi)
        .ok_or_else(|| anyhow!("sieve-dump needs --hi"))?;
    if lo < 1 || lo > hi {
        bail!("bad range [{lo}, {hi}]");
    }
    if hi - lo + 1 > MAX_TABLE_LEN {
        bail!("range [{lo}, {hi}] exceeds the in-memory table cap of {MAX_TABLE_LEN} entries");
    }
    config.lo = Some(lo);
    config.hi = Some(hi);
    let set = resolve_set(&resolved, &args.set, &mut config, Some(hi))?;
    let decomposition = if args.with_c_part {
        Some(decompose(&set)?)
    } else {
        None
    };

    // segment-parallel, merged in order
    let seg = resolved.segment_len as u64;
    let ranges: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut start = lo;
        while start <= hi {
            let end = (start + seg - 1).min(hi);
            v.push((start, end));
            start = end + 1;
        }
        v
    };
    use rayon::prelude::*;
    let tables: Vec<SieveTable> = ranges
        .par_iter()
        .map(|&(s, e)| match &decomposition {
            Some(d) => sieve_range_with_c_part(&set, d, s, e),
            None => sieve_range(&set, s, e),
        })
        .collect::<Result<_, _>>()?;
    let table = SieveTable::concat(tables)?;

    match resolved.format {
        FormatName::Binary => {
            let path = args
                .output
                .out
                .as_ref()
                .ok_or_else(|| anyhow!("binary dump needs --out"))?;
            let mut buf = Vec::new();
            write_sieve_dump(&mut buf, &table)?;
            write_output(path, &buf)?;
            println!(
                "wrote [{lo}, {hi}] ({} entries, {} bytes) to {}",
                table.len(),
                buf.len(),
                path.display()
            );
        }
        FormatName::Csv => {
            let mut buf = Vec::new();
            sieve_table_csv(&mut buf, &table)?;
            match &args.output.out {
                Some(path) => {
                    write_output(path, &buf)?;
                    println!(
                        "wrote [{lo}, {hi}] ({} entries) to {}",
                        table.len(),
                        path.display()
                    );
                }
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
        FormatName::Json => bail!("sieve-dump writes binary (default) or csv"),
    }
    Ok(0)
}
