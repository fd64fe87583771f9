//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::direct::{self, DEFAULT_DIRECT_EPSILON};
use crate::error::{Error, Result};
use crate::fig1::{self, FixedDesignPlan};
use crate::gp::{CorrelationKernel, Estimator, KernelFamily, Region};
use crate::homogeneity::{self, DirectHomogeneityReport, HomogeneityReport};
use crate::numeral::ExtendedNumeral;
use crate::objectives::{self, Objective, FIG1_POINTS, FIG1_VALUES};
use crate::optimizer::{self, Algorithm, OptimizerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "homopt",
    version,
    about = "Scale-invariant global optimization and homogeneity checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an optimization and write its trace.
    Run(RunArgs),
    /// Run on f and on a*f + b and compare the selected points step by step.
    Homogeneity(HomogeneityArgs),
    /// Reproduce the five-point planning example.
    ExampleFig1(Fig1Args),
    /// Build a translation under which DIRECT changes its selection.
    DirectDemo(DirectDemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmArg {
    P,
    Ei,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    Exponential,
    SquaredExponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Mle,
    Sample,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Mle => Estimator::Mle,
            EstimatorArg::Sample => Estimator::Sample,
        }
    }
}

/// Settings shared by `run` and `homogeneity`. Every field may also come
/// from the `--config` JSON file; flags win.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// p, ei or direct.
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Built-in name, `fig1`, or a CSV file with columns x,y.
    #[arg(long)]
    pub objective: Option<String>,
    /// Lower bounds, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lower: Option<Vec<f64>>,
    /// Upper bounds, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub upper: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Kernel decay constant c.
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Aspiration offset (Gaussian-model algorithms) or DIRECT epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Polish the grid winner with a local search.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub refine: Option<bool>,
    /// Scale factor, e.g. `3.9765` or `2*G`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Offset, e.g. `-7.3` or `G^2`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Output path prefix; `.csv` and `.json` are appended.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            algorithm: self.algorithm.or(base.algorithm),
            objective: self.objective.or(base.objective),
            lower: self.lower.or(base.lower),
            upper: self.upper.or(base.upper),
            kernel: self.kernel.or(base.kernel),
            decay: self.decay.or(base.decay),
            estimator: self.estimator.or(base.estimator),
            epsilon: self.epsilon.or(base.epsilon),
            budget: self.budget.or(base.budget),
            resolution: self.resolution.or(base.resolution),
            refine: self.refine.or(base.refine),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            out: self.out.or(base.out),
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON file with any of the flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: RunConfig,
}

#[derive(Args, Debug)]
pub struct HomogeneityArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: RunConfig,
}

#[derive(Args, Debug)]
pub struct Fig1Args {
    #[arg(long, value_enum, default_value = "mle")]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = crate::acquisition::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Output path prefix.
    #[arg(long, default_value = "fig1")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DirectDemoArgs {
    #[arg(long, default_value = "quadratic")]
    pub objective: String,
    #[arg(long, default_value_t = DEFAULT_DIRECT_EPSILON)]
    pub epsilon: f64,
    /// Iterations to search for a witness interval.
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Output path prefix.
    #[arg(long, default_value = "direct-demo")]
    pub out: PathBuf,
}

enum Source {
    Builtin(Objective),
    Table { points: Vec<f64>, values: Vec<f64> },
}

#[derive(Deserialize)]
struct TableRow {
    x: f64,
    y: f64,
}

struct Resolved {
    algorithm: AlgorithmArg,
    optimizer: OptimizerConfig,
    source: Source,
    region: Region,
    epsilon: Option<f64>,
    budget: usize,
    a: ExtendedNumeral,
    b: ExtendedNumeral,
    out: PathBuf,
}

fn load_table(path: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for row in reader.deserialize() {
        let row: TableRow = row?;
        points.push(row.x);
        values.push(row.y);
    }
    if points.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "value table {path} has no rows"
        )));
    }
    Ok((points, values))
}

fn resolve(config: Option<&Path>, flags: RunConfig, default_out: &str) -> Result<Resolved> {
    let base = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = flags.over(base);
    let algorithm = c.algorithm.unwrap_or(AlgorithmArg::P);
    let default_objective = if algorithm == AlgorithmArg::Direct {
        "quadratic"
    } else {
        "sin3x"
    };
    let name = c
        .objective
        .clone()
        .unwrap_or_else(|| default_objective.into());
    let source = if name == "fig1" {
        Source::Table {
            points: FIG1_POINTS.to_vec(),
            values: FIG1_VALUES.to_vec(),
        }
    } else if let Ok(o) = objectives::builtin(&name) {
        Source::Builtin(o)
    } else if Path::new(&name).is_file() {
        let (points, values) = load_table(&name)?;
        Source::Table { points, values }
    } else {
        // Repeat the lookup for its "unknown objective" error.
        Source::Builtin(objectives::builtin(&name)?)
    };
    let (default_lo, default_hi) = match &source {
        Source::Builtin(o) => {
            let r = o.region();
            (r.lower().to_vec(), r.upper().to_vec())
        }
        Source::Table { points, .. } => {
            let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (vec![lo], vec![hi])
        }
    };
    let region = Region::new(c.lower.unwrap_or(default_lo), c.upper.unwrap_or(default_hi))?;
    let family = match c.kernel.unwrap_or(KernelArg::Exponential) {
        KernelArg::Exponential => KernelFamily::Exponential,
        KernelArg::SquaredExponential => KernelFamily::SquaredExponential,
    };
    let kernel = CorrelationKernel::new(
        family,
        c.decay.unwrap_or(CorrelationKernel::default().decay),
    )?;
    if let Some(e) = c.epsilon {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {e}"
            )));
        }
    }
    if c.resolution == Some(0) || c.resolution == Some(1) {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    let optimizer = OptimizerConfig {
        algorithm: match algorithm {
            AlgorithmArg::Ei => Algorithm::OneStepBayes,
            _ => Algorithm::PAlgorithm,
        },
        kernel,
        estimator: c.estimator.map(Into::into).unwrap_or_default(),
        epsilon: c.epsilon.unwrap_or(crate::acquisition::DEFAULT_EPSILON),
        resolution: c.resolution,
        refine: c.refine.unwrap_or(false),
    };
    let a: ExtendedNumeral = c.a.as_deref().unwrap_or("1").parse()?;
    let b: ExtendedNumeral = c.b.as_deref().unwrap_or("0").parse()?;
    Ok(Resolved {
        algorithm,
        optimizer,
        source,
        region,
        epsilon: c.epsilon,
        budget: c.budget.unwrap_or(20),
        a,
        b,
        out: c.out.unwrap_or_else(|| default_out.into()),
    })
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn one_dim(objective: Objective) -> Result<impl Fn(f64) -> f64> {
    if objective.region().dim() != 1 {
        return Err(Error::InvalidConfig(format!(
            "DIRECT is one-dimensional; '{}' is not",
            objective.name
        )));
    }
    Ok(move |x: f64| objective.eval(&[x]))
}

fn finite_scale(r: &Resolved) -> Result<(f64, f64)> {
    match (r.a.as_finite(), r.b.as_finite()) {
        (Some(a), Some(b)) if a > 0.0 => Ok((a, b)),
        (Some(a), Some(_)) => Err(Error::UnsupportedScale(format!(
            "a must be positive, got {a}"
        ))),
        _ => Err(Error::UnsupportedScale(
            "this mode needs finite a and b".into(),
        )),
    }
}

fn print_plan(plan: &FixedDesignPlan) {
    println!(
        "next point: x = {} (grid index {}), mu = {}, sigma2 = {}, y_on = {}",
        plan.next_point[0],
        plan.argmax_f,
        plan.params_f.mu,
        plan.params_f.sigma2,
        plan.aspiration_f.y_on
    );
}

pub fn cmd_run(args: RunArgs) -> Result<i32> {
    let r = resolve(args.config.as_deref(), args.settings, "homopt-run")?;
    let csv_path = with_ext(&r.out, "csv");
    let json_path = with_ext(&r.out, "json");
    match (&r.source, r.algorithm) {
        (Source::Builtin(o), AlgorithmArg::Direct) => {
            let f = one_dim(*o)?;
            let eps = r.epsilon.unwrap_or(DEFAULT_DIRECT_EPSILON);
            let run =
                direct::run_direct(f, r.region.lower()[0], r.region.upper()[0], eps, r.budget)?;
            direct::write_direct_trace_csv(&run.trace, create(&csv_path)?)?;
            write_json(&json_path, &run.trace)?;
            let best = run
                .partition
                .intervals()
                .iter()
                .min_by(|p, q| p.fc.total_cmp(&q.fc))
                .expect("partition is non-empty");
            println!("best: x = {}, y = {}", best.c, best.fc);
        }
        (Source::Builtin(o), _) => {
            let design = optimizer::default_initial_design(&r.region);
            let trace = optimizer::run(&r.optimizer, &r.region, |x| o.eval(x), &design, r.budget)?;
            trace.write_csv(create(&csv_path)?)?;
            let mut w = create(&json_path)?;
            w.write_all(trace.to_json()?.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()?;
            let best = trace.best().expect("trace has the initial design");
            let x: Vec<String> = best.x.iter().map(|v| v.to_string()).collect();
            println!("best: x = [{}], y = {}", x.join(", "), best.y);
        }
        (Source::Table { .. }, AlgorithmArg::Direct) => {
            return Err(Error::InvalidConfig(
                "a value table can only be planned with the p or ei algorithm".into(),
            ))
        }
        (Source::Table { points, values }, _) => {
            let plan = fig1::plan_fixed_design(&r.optimizer, &r.region, points, values, 1.0, 0.0)?;
            plan.write_csv(create(&csv_path)?)?;
            write_json(&json_path, &plan)?;
            print_plan(&plan);
        }
    }
    Ok(EXIT_OK)
}

fn report_finite(rep: &HomogeneityReport) {
    println!("iter,index_f,index_h,match,near_tie");
    for s in &rep.steps {
        println!(
            "{},{},{},{},{}",
            s.iter, s.index_f, s.index_h, s.matched, s.near_tie
        );
    }
    match rep.first_mismatch() {
        None => println!(
            "all {} steps match ({} near-ties) for a = {}, b = {}",
            rep.steps.len(),
            rep.near_ties(),
            rep.a,
            rep.b
        ),
        Some(s) => println!(
            "mismatch at step {}: index {} on f, {} on a*f + b",
            s.iter, s.index_f, s.index_h
        ),
    }
}

fn report_direct(rep: &DirectHomogeneityReport) {
    println!("iter,subdivided_f,subdivided_h,match");
    for s in &rep.steps {
        let j = |v: &[usize]| {
            v.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        println!(
            "{},{},{},{}",
            s.iter,
            j(&s.subdivided_f),
            j(&s.subdivided_h),
            s.matched
        );
    }
    match rep.first_mismatch() {
        None => println!(
            "all {} iterations match for a = {}, b = {}",
            rep.steps.len(),
            rep.a,
            rep.b
        ),
        Some(s) => println!(
            "mismatch at iteration {}: DIRECT subdivides {:?} on f and {:?} on a*f + b",
            s.iter, s.subdivided_f, s.subdivided_h
        ),
    }
}

fn write_direct_report(out: &Path, rep: &DirectHomogeneityReport) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&with_ext(out, "csv"))?);
    w.write_record(["iter", "subdivided_f", "subdivided_h", "match"])?;
    for s in &rep.steps {
        let j = |v: &[usize]| {
            v.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        w.write_record([
            s.iter.to_string(),
            j(&s.subdivided_f),
            j(&s.subdivided_h),
            s.matched.to_string(),
        ])?;
    }
    w.flush()?;
    write_json(&with_ext(out, "json"), rep)
}

pub fn cmd_homogeneity(args: HomogeneityArgs) -> Result<i32> {
    let explicit_scale = args.settings.a.is_some() || args.settings.b.is_some();
    let config_scale = match args.config.as_deref() {
        Some(p) => {
            let c = RunConfig::load(p)?;
            c.a.is_some() || c.b.is_some()
        }
        None => false,
    };
    let r = resolve(args.config.as_deref(), args.settings, "homopt-homogeneity")?;
    match (&r.source, r.algorithm) {
        (Source::Builtin(o), AlgorithmArg::Direct) => {
            let eps = r.epsilon.unwrap_or(DEFAULT_DIRECT_EPSILON);
            let (lo, hi) = (r.region.lower()[0], r.region.upper()[0]);
            let f = one_dim(*o)?;
            let (a, b, budget) = if explicit_scale || config_scale {
                let (a, b) = finite_scale(&r)?;
                (a, b, r.budget)
            } else {
                let inst = direct::construct_shift_instance(&f, lo, hi, eps, r.budget.max(1))?
                    .ok_or_else(|| {
                        Error::Precondition(format!(
                            "no translation-sensitive interval found within {} iterations",
                            r.budget
                        ))
                    })?;
                println!(
                    "constructed instance: iteration {}, interval {}, delta_f = {}, shift = {}",
                    inst.iteration, inst.interval, inst.shift.delta_f, inst.delta
                );
                (1.0, inst.delta, r.budget.max(inst.iteration))
            };
            let rep = homogeneity::compare_direct(&f, lo, hi, eps, a, b, budget)?;
            report_direct(&rep);
            write_direct_report(&r.out, &rep)?;
            Ok(if rep.passed() { EXIT_OK } else { EXIT_MISMATCH })
        }
        (Source::Builtin(o), _) => {
            let design = optimizer::default_initial_design(&r.region);
            let rep = match finite_scale(&r) {
                Ok((a, b)) => homogeneity::compare_finite(
                    &r.optimizer,
                    &r.region,
                    |x| o.eval(x),
                    a,
                    b,
                    &design,
                    r.budget,
                )?,
                Err(_) if r.a.as_finite().is_none() || r.b.as_finite().is_none() => {
                    homogeneity::compare_extended(
                        &r.optimizer,
                        &r.region,
                        |x| o.eval(x),
                        &r.a,
                        &r.b,
                        &design,
                        r.budget,
                    )?
                }
                Err(e) => return Err(e),
            };
            report_finite(&rep);
            rep.write_csv(create(&with_ext(&r.out, "csv"))?)?;
            write_json(&with_ext(&r.out, "json"), &rep)?;
            Ok(if rep.passed() { EXIT_OK } else { EXIT_MISMATCH })
        }
        (Source::Table { .. }, AlgorithmArg::Direct) => Err(Error::InvalidConfig(
            "a value table can only be planned with the p or ei algorithm".into(),
        )),
        (Source::Table { points, values }, _) => {
            let (a, b) = finite_scale(&r)?;
            let plan = fig1::plan_fixed_design(&r.optimizer, &r.region, points, values, a, b)?;
            plan.write_csv(create(&with_ext(&r.out, "csv"))?)?;
            write_json(&with_ext(&r.out, "json"), &plan)?;
            println!(
                "next point index {} on f, {} on a*f + b; max curve deviation {:e}",
                plan.argmax_f, plan.argmax_phi, plan.max_curve_deviation
            );
            Ok(if plan.argmax_f == plan.argmax_phi {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            })
        }
    }
}

pub fn cmd_example_fig1(args: Fig1Args) -> Result<i32> {
    let report = fig1::example_fig1(args.estimator.into(), args.epsilon)?;
    report
        .plan
        .write_csv(create(&with_ext(&args.out, "csv"))?)?;
    write_json(&with_ext(&args.out, "json"), &report)?;
    let plan = &report.plan;
    println!(
        "printed phi vs a*f + b: max deviation {:e}",
        report.printed_max_deviation
    );
    println!(
        "y_on = {}, z_on = {} (relative error of a*y_on + b: {:e})",
        plan.aspiration_f.y_on, plan.aspiration_phi.y_on, plan.aspiration_rel_error
    );
    println!(
        "max criterion curve deviation: {:e}",
        plan.max_curve_deviation
    );
    println!(
        "argmax: index {} (x = {}) for f, index {} for phi",
        plan.argmax_f, plan.next_point[0], plan.argmax_phi
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DemoReport<'a> {
    instance: &'a direct::ShiftInstance,
    comparison: &'a DirectHomogeneityReport,
}

pub fn cmd_direct_demo(args: DirectDemoArgs) -> Result<i32> {
    let objective = objectives::builtin(&args.objective)?;
    let region = objective.region();
    let f = one_dim(objective)?;
    let (lo, hi) = (region.lower()[0], region.upper()[0]);
    let inst = direct::construct_shift_instance(&f, lo, hi, args.epsilon, args.max_iter)?
        .ok_or_else(|| {
            Error::Precondition(format!(
                "no translation-sensitive interval within {} iterations (the objective must be positive)",
                args.max_iter
            ))
        })?;
    let rep =
        homogeneity::compare_direct(&f, lo, hi, args.epsilon, 1.0, inst.delta, inst.iteration)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&with_ext(&args.out, "csv"))?);
    for iv in &inst.before.intervals {
        w.serialize(iv)?;
    }
    w.flush()?;
    write_json(
        &with_ext(&args.out, "json"),
        &DemoReport {
            instance: &inst,
            comparison: &rep,
        },
    )?;
    println!(
        "iteration {}: interval {} is potentially optimal for f; delta_f = {}, threshold delta_f/eps = {}",
        inst.iteration,
        inst.interval,
        inst.shift.delta_f,
        inst.shift.threshold()
    );
    println!("translating by {} changes the subdivided set:", inst.delta);
    report_direct(&rep);
    Ok(EXIT_OK)
}

/// Parses `args` and runs the chosen command, returning the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Homogeneity(a) => cmd_homogeneity(a),
        Command::ExampleFig1(a) => cmd_example_fig1(a),
        Command::DirectDemo(a) => cmd_direct_demo(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}
