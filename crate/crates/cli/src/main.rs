//! `diamond`: generate, partition, verify and measure Diamond ensembles.
//!
//! Exit codes: 0 success, 1 runtime error, 2 invalid model or arguments,
//! 3 failed verification.

mod io;
mod plot;

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use diamond_core::ensemble::{generate, simple_model, validate, DiamondModel};
use diamond_core::metrics::{
    analyze, equatorial_discrepancy, l2_discrepancy_quadrature, l2_discrepancy_stolarsky,
    polar_cap_profile, sup_discrepancy_estimate, sup_discrepancy_exact, MetricsOptions,
    QuadratureGrid, EXACT_LIMIT,
};
use diamond_core::partition::{
    build_partition, check_side_bounds, region_area, verify_matching, Partition,
};
use diamond_core::{MetricsError, ModelSpec, PartitionError, PointSet, Rational, ThetaPolicy};
use serde_json::{json, Value};

/// Upper envelope constant of the sup discrepancy.
const UPPER: f64 = 4.0 + 2.0 * SQRT_2;

#[derive(Parser)]
#[command(
    name = "diamond",
    version,
    about = "Diamond ensemble point sets on the sphere"
)]
struct Cli {
    /// Worker threads for the metric kernels (default: all cores).
    #[arg(long, global = true, env = "DIAMOND_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the points CSV and its JSON model sidecar.
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "points.csv")]
        out: PathBuf,
    },
    /// Write the equal-area partition (CSV, or JSON if the path ends in .json).
    Partition {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "partition.csv")]
        out: PathBuf,
    },
    /// Check equal area, interleaving, the point-region bijection and side lengths.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Compute the full metrics report as JSON.
    Metrics {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        opts: MetricArgs,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute one discrepancy as JSON.
    Discrepancy {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        opts: MetricArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the partition or a discrepancy scaling plot as SVG.
    Plot {
        #[arg(long, value_enum, default_value = "partition")]
        kind: PlotKind,
        #[command(flatten)]
        source: OptionalSourceArgs,
        /// Inclusive range `a:b` of simple-model sizes for the scaling plot.
        #[arg(long = "M-range")]
        m_range: Option<String>,
        #[command(flatten)]
        opts: MetricArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Simple model with r_j = 4j and N = 4M² + 2.
    #[arg(long = "simple-M")]
    simple_m: Option<u32>,
    /// Model file (JSON with fields M, n, t, alpha, beta, theta_policy).
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Parallel phases: `zeros`, `seed:<u64>` or `list:<a>,<b>,...`.
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct SourceGroup {
    #[arg(long = "simple-M")]
    simple_m: Option<u32>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Points CSV from `gen`; its JSON sidecar, if present, supplies the model.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SourceArgs {
    #[command(flatten)]
    source: SourceGroup,
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Clone)]
#[group(required = false, multiple = false)]
struct OptionalSourceGroup {
    #[arg(long = "simple-M")]
    simple_m: Option<u32>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OptionalSourceArgs {
    #[command(flatten)]
    source: OptionalSourceGroup,
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Clone)]
struct MetricArgs {
    /// Riesz exponents (repeatable).
    #[arg(long = "riesz", default_values_t = [1.0, 2.0])]
    riesz: Vec<f64>,
    /// Largest N for the exact sup discrepancy.
    #[arg(long, default_value_t = EXACT_LIMIT)]
    exact_limit: usize,
    /// Random cap centers for the sup estimate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Spiral directions for the covering estimate (default max(10N, 10^4)).
    #[arg(long)]
    covering_directions: Option<usize>,
    /// Center nodes of the L2 quadrature (enables it in `metrics`).
    #[arg(long)]
    quadrature_centers: Option<usize>,
    #[arg(long, default_value_t = 512)]
    quadrature_heights: usize,
}

impl MetricArgs {
    fn quadrature(&self) -> Option<QuadratureGrid> {
        self.quadrature_centers.map(|centers| QuadratureGrid {
            centers,
            heights: self.quadrature_heights,
        })
    }

    fn options(&self) -> MetricsOptions {
        MetricsOptions {
            riesz_exponents: self.riesz.clone(),
            exact_limit: self.exact_limit,
            estimate_samples: self.samples,
            seed: self.seed,
            covering_directions: self.covering_directions,
            quadrature: self.quadrature(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Polar,
    Equatorial,
    Exact,
    Estimate,
    L2Stolarsky,
    L2Quadrature,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum PlotKind {
    Partition,
    Scaling,
}

/// Error carrying its exit code.
#[derive(Debug)]
enum Failure {
    Runtime(anyhow::Error),
    Validation(anyhow::Error),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome<T> = Result<T, Failure>;

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

fn parse_theta(text: &str) -> Outcome<ThetaPolicy> {
    if text == "zeros" {
        return Ok(ThetaPolicy::Zeros);
    }
    if let Some(seed) = text.strip_prefix("seed:") {
        let seed = seed.trim();
        if seed.is_empty() {
            return Err(invalid(anyhow!("--theta seed: needs a seed, e.g. seed:42")));
        }
        return seed
            .parse()
            .map(ThetaPolicy::Seeded)
            .map_err(|_| invalid(anyhow!("bad theta seed {seed:?}")));
    }
    if let Some(list) = text.strip_prefix("list:") {
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| invalid(anyhow!("bad theta list {list:?}")))?;
        return Ok(ThetaPolicy::Fixed(values));
    }
    Err(invalid(anyhow!(
        "--theta must be zeros, seed:<n> or list:<a>,<b>,..., got {text:?}"
    )))
}

fn read_spec(path: &Path) -> Outcome<ModelSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))
}

fn load_model(
    simple_m: Option<u32>,
    model: Option<&Path>,
    theta: Option<&str>,
) -> Outcome<DiamondModel> {
    let mut spec = match (simple_m, model) {
        (Some(m), _) => simple_model(m),
        (None, Some(path)) => read_spec(path)?,
        (None, None) => {
            return Err(invalid(anyhow!(
                "no model given; use --simple-M or --model"
            )))
        }
    };
    if let Some(theta) = theta {
        spec.theta_policy = parse_theta(theta)?;
    }
    validate(&spec).map_err(|e| invalid(anyhow!("invalid model ({}): {e}", e.code())))
}

impl ModelArgs {
    fn load(&self) -> Outcome<DiamondModel> {
        load_model(
            self.source.simple_m,
            self.source.model.as_deref(),
            self.theta.as_deref(),
        )
    }
}

/// Points plus the model they came from, when known.
struct Loaded {
    points: PointSet,
    model: Option<DiamondModel>,
}

fn load_points(path: &Path, theta: Option<&str>) -> Outcome<Loaded> {
    if theta.is_some() {
        return Err(invalid(anyhow!("--theta cannot be combined with --points")));
    }
    let sidecar = io::sidecar_path(path);
    let model = if sidecar.exists() {
        let meta = io::read_sidecar(&sidecar)?;
        Some(validate(&meta.spec).map_err(|e| invalid(anyhow!("sidecar model invalid: {e}")))?)
    } else {
        None
    };
    let points = io::read_points_csv(path, model.as_ref().map(DiamondModel::num_parallels))?;
    if let Some(m) = &model {
        if points.len() as u64 != m.num_points() {
            return Err(invalid(anyhow!(
                "{} has {} points, sidecar says {}",
                path.display(),
                points.len(),
                m.num_points()
            )));
        }
    }
    Ok(Loaded { points, model })
}

impl SourceArgs {
    fn load(&self) -> Outcome<Loaded> {
        let s = &self.source;
        if let Some(path) = &s.points {
            return load_points(path, self.theta.as_deref());
        }
        let model = load_model(s.simple_m, s.model.as_deref(), self.theta.as_deref())?;
        Ok(Loaded {
            points: generate(&model),
            model: Some(model),
        })
    }
}

impl OptionalSourceArgs {
    fn load(&self) -> Outcome<Option<Loaded>> {
        let s = &self.source;
        if let Some(path) = &s.points {
            return load_points(path, self.theta.as_deref()).map(Some);
        }
        if s.simple_m.is_none() && s.model.is_none() {
            return Ok(None);
        }
        let model = load_model(s.simple_m, s.model.as_deref(), self.theta.as_deref())?;
        Ok(Some(Loaded {
            points: generate(&model),
            model: Some(model),
        }))
    }
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).context("serializing report")?;
    match out {
        Some(path) => io::write(path, &(text + "\n"))?,
        None => {
            // A closed pipe (`| head`) is not an error for the report.
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(anyhow::Error::new(e).context("writing report").into())
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn cmd_gen(model: &ModelArgs, out: &Path) -> Outcome<()> {
    let model = model.load()?;
    let points = generate(&model);
    let partition = build_partition(&model);
    let sidecar = io::sidecar_path(out);
    io::write(out, &io::points_csv(&model, &points))?;
    let meta = serde_json::to_string_pretty(&io::Sidecar::new(&model, &partition))
        .context("serializing sidecar")?;
    io::write(&sidecar, &(meta + "\n"))?;
    println!(
        "wrote {} points to {} (model in {})",
        points.len(),
        out.display(),
        sidecar.display()
    );
    Ok(())
}

fn cmd_partition(model: &ModelArgs, out: &Path) -> Outcome<()> {
    let model = model.load()?;
    let partition = build_partition(&model);
    let text = if out.extension().is_some_and(|e| e == "json") {
        let doc = json!({
            "M": model.m(),
            "N": model.num_points(),
            "h": partition.heights().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "area": 4.0 * PI / model.num_points() as f64,
            "regions": partition.regions(),
        });
        serde_json::to_string_pretty(&doc).context("serializing partition")? + "\n"
    } else {
        io::partition_csv(&partition)
    };
    io::write(out, &text)?;
    println!(
        "wrote {} regions, each of area 4π/{}, to {}",
        partition.len(),
        model.num_points(),
        out.display()
    );
    Ok(())
}

fn check_equal_area(partition: &Partition) -> (bool, String) {
    let n = partition.model().num_points();
    let target = 4.0 * PI / n as f64;
    let unit = Rational::new(1, n as i128);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for r in partition.regions() {
        worst = worst.max((region_area(r) - target).abs() / target);
        exact &= r.area_fraction_exact() == unit;
    }
    (
        exact && worst < 1e-12,
        format!(
            "{} regions, exact fraction 1/{n}: {exact}, max relative float error {worst:.2e}",
            partition.len()
        ),
    )
}

fn cmd_verify(model: &ModelArgs) -> Outcome<()> {
    let model = model.load()?;
    let partition = build_partition(&model);
    let points = generate(&model);
    let mut checks: Vec<(&str, Option<bool>, String)> = Vec::new();

    let (ok, detail) = check_equal_area(&partition);
    checks.push(("equal-area", Some(ok), detail));
    match verify_matching(&partition, &points) {
        Ok(_) => {
            checks.push((
                "interleaving",
                Some(true),
                format!(
                    "h_(j+1) < z_j < h_j for all {} parallels, h_M > 0",
                    model.num_parallels()
                ),
            ));
            checks.push((
                "bijection",
                Some(true),
                format!(
                    "{} points in {} regions, one each",
                    points.len(),
                    partition.len()
                ),
            ));
        }
        Err(e @ PartitionError::Interleaving { .. }) => {
            checks.push(("interleaving", Some(false), e.to_string()));
            checks.push(("bijection", None, "skipped".into()));
        }
        Err(e) => {
            checks.push(("interleaving", Some(true), "exact".into()));
            checks.push(("bijection", Some(false), e.to_string()));
        }
    }
    let sides = check_side_bounds(&partition);
    let interval = if sides.strict { "open" } else { "closed" };
    checks.push((
        "side-lengths",
        Some(sides.holds),
        format!(
            "sqrt(N) * horizontal side in [{:.6}, {:.6}], {interval} bound [{:.6}, {:.6}]",
            sides.observed_min, sides.observed_max, sides.lower, sides.upper
        ),
    ));

    println!("model M={} N={}", model.m(), model.num_points());
    for (name, ok, detail) in &checks {
        let verdict = match ok {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        println!("{verdict} {name}: {detail}");
    }
    match checks.iter().find(|c| c.1 == Some(false)) {
        Some((name, _, detail)) => Err(Failure::Verification(format!("{name} failed: {detail}"))),
        None => Ok(()),
    }
}

fn cmd_metrics(source: &SourceArgs, opts: &MetricArgs, out: Option<&Path>) -> Outcome<()> {
    let loaded = source.load()?;
    let report = analyze(&loaded.points, loaded.model.as_ref(), &opts.options())?;
    emit(&report, out)
}

/// Theorem envelope `[sqrt(N-2)/N, (4 + 2 sqrt 2)/sqrt N]` for simple models.
fn envelope(model: Option<&DiamondModel>, value: Option<f64>) -> Value {
    match model.filter(|m| m.spec().is_simple()) {
        Some(m) => {
            let n = m.num_points() as f64;
            let (lo, hi) = ((n - 2.0).sqrt() / n, UPPER / n.sqrt());
            json!({
                "lower": lo,
                "upper": hi,
                "within": value.map(|v| v >= lo - 1e-12 && v <= hi + 1e-12),
                "sqrt_n_times_value": value.map(|v| v * n.sqrt()),
            })
        }
        None => Value::Null,
    }
}

fn require_model(loaded: &Loaded, mode: &str) -> Outcome<DiamondModel> {
    loaded.model.clone().ok_or_else(|| {
        invalid(anyhow!(
            "--mode {mode} needs a model (--simple-M, --model, or a points file with its sidecar)"
        ))
    })
}

fn cmd_discrepancy(
    source: &SourceArgs,
    mode: Mode,
    opts: &MetricArgs,
    out: Option<&Path>,
) -> Outcome<()> {
    let loaded = source.load()?;
    let pts = &loaded.points;
    let (name, result, value): (&str, Value, Option<f64>) = match mode {
        Mode::Polar => {
            let prof = polar_cap_profile(&require_model(&loaded, "polar")?);
            (
                "polar",
                serde_json::to_value(&prof).context("serializing")?,
                Some(prof.max),
            )
        }
        Mode::Equatorial => {
            let eq = equatorial_discrepancy(&require_model(&loaded, "equatorial")?);
            (
                "equatorial",
                serde_json::to_value(&eq).context("serializing")?,
                Some(eq.value),
            )
        }
        Mode::Exact => {
            let d = sup_discrepancy_exact(pts, opts.exact_limit).map_err(|e| match e {
                MetricsError::SizeLimit { .. } => Failure::Runtime(anyhow!(
                    "{e}; rerun with --mode estimate or raise --exact-limit"
                )),
                other => other.into(),
            })?;
            (
                "exact",
                serde_json::to_value(d).context("serializing")?,
                Some(d.value),
            )
        }
        Mode::Estimate => {
            let d = sup_discrepancy_estimate(pts, opts.samples, opts.seed)?;
            (
                "estimate",
                serde_json::to_value(d).context("serializing")?,
                Some(d.value),
            )
        }
        Mode::L2Stolarsky => {
            let d = l2_discrepancy_stolarsky(pts)?;
            ("l2-stolarsky", json!({ "value": d }), None)
        }
        Mode::L2Quadrature => {
            let grid = opts.quadrature().unwrap_or_default();
            let d = l2_discrepancy_quadrature(pts, grid)?;
            ("l2-quadrature", json!({ "value": d, "grid": grid }), None)
        }
    };
    let report = json!({
        "mode": name,
        "N": pts.len(),
        "M": loaded.model.as_ref().map(DiamondModel::m),
        "result": result,
        "envelope": envelope(loaded.model.as_ref(), value),
    });
    emit(&report, out)
}

fn parse_range(text: &str) -> Outcome<(u32, u32)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| invalid(anyhow!("--M-range must look like a:b")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| invalid(anyhow!("bad --M-range bound {s:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || a > b {
        return Err(invalid(anyhow!(
            "--M-range {a}:{b} is empty; need 1 <= a <= b"
        )));
    }
    Ok((a, b))
}

fn cmd_plot(
    kind: PlotKind,
    source: &OptionalSourceArgs,
    m_range: Option<&str>,
    opts: &MetricArgs,
    out: Option<&Path>,
) -> Outcome<()> {
    let (svg, default_name) = match kind {
        PlotKind::Partition => {
            let loaded = source
                .load()?
                .ok_or_else(|| invalid(anyhow!("plot --kind partition needs a model or points")))?;
            let model = require_model(&loaded, "partition plot")?;
            let partition = build_partition(&model);
            let title = format!(
                "Diamond ensemble partition, M = {}, N = {}",
                model.m(),
                model.num_points()
            );
            (
                plot::partition_svg(&partition, &loaded.points, &title),
                "partition.svg",
            )
        }
        PlotKind::Scaling => {
            let (a, b) = parse_range(m_range.unwrap_or("1:20"))?;
            let mut series = Vec::new();
            for m in a..=b {
                let model = validate(&simple_model(m)).map_err(invalid)?;
                let pts = generate(&model);
                let n = pts.len();
                let (d, exact) = if n <= opts.exact_limit {
                    (sup_discrepancy_exact(&pts, opts.exact_limit)?.value, true)
                } else {
                    (
                        sup_discrepancy_estimate(&pts, opts.samples, opts.seed)?.value,
                        false,
                    )
                };
                series.push(plot::ScalingPoint {
                    m,
                    sqrt_n_d: (n as f64).sqrt() * d,
                    exact,
                });
            }
            (
                plot::scaling_svg(&series, &[(1.0, "1"), (UPPER, "4 + 2 sqrt 2")]),
                "scaling.svg",
            )
        }
    };
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(default_name));
    io::write(&path, &svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(invalid(anyhow!("--workers must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Gen { model, out } => cmd_gen(model, out),
        Command::Partition { model, out } => cmd_partition(model, out),
        Command::Verify { model } => cmd_verify(model),
        Command::Metrics { source, opts, out } => cmd_metrics(source, opts, out.as_deref()),
        Command::Discrepancy {
            source,
            mode,
            opts,
            out,
        } => cmd_discrepancy(source, *mode, opts, out.as_deref()),
        Command::Plot {
            kind,
            source,
            m_range,
            opts,
            out,
        } => cmd_plot(*kind, source, m_range.as_deref(), opts, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Runtime(e) | Failure::Validation(e) => eprintln!("error: {e:#}"),
                Failure::Verification(msg) => eprintln!("verification failed: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
