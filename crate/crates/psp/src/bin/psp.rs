use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use psp_ctc::config::{load_estimators, save_estimators, RunConfig};
use psp_ctc::control::{helix_trajectory, ControllerKind, DefuzzPath, Snr, TrainOptions};
use psp_ctc::robot::reference::{reference_terms, ReferenceReport, REFERENCE_STATES, REFERENCE_TOLERANCE};
use psp_ctc::robot::{Derivatives, DynamicTerms, Robot, ToolPose};
use psp_ctc::sim::{NoiseTarget, SimSummary, CSV_COLUMNS, SCHEMA_VERSION};
use psp_ctc::sweep::{benchmark, grid, sse_table, Bench};
use psp_ctc::train::train_from_run;
use t2fuzzy::reduction::{approx_generalized_centroid, cos_tr_bruteforce, km_exact_interval, GeneralizedCentroidInput};
use t2fuzzy::{FuzzyNumber, MembershipFunction};

/// 3-PSP manipulator: fuzzy computed-torque training, simulation and tools.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Record a noise-free computed-torque run and learn the 18 estimators.
    Train(RunArgs),
    /// Run the controller x SNR x seed grid and write per-run summaries.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the per-step trace CSV of every run.
        #[arg(long)]
        emit_traces: bool,
        /// Record controller wall time (makes the outputs machine-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Type-reduce a weighted average of fuzzy numbers read from JSON.
    Reduce {
        /// Input file, `-` for stdin.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
    },
    /// Print M, C and G at an actuator state or a tool pose.
    Dynamics {
        /// Actuator positions `a1,a2,a3`.
        #[arg(long, value_delimiter = ',', num_args = 1..=3, allow_negative_numbers = true)]
        q: Option<Vec<f64>>,
        /// Actuator rates.
        #[arg(long, value_delimiter = ',', num_args = 1..=3, allow_negative_numbers = true)]
        qdot: Option<Vec<f64>>,
        /// Tool pose `z,tilt_x,tilt_y` instead of actuator positions.
        #[arg(long, value_delimiter = ',', num_args = 1..=3, allow_negative_numbers = true, conflicts_with = "q")]
        pose: Option<Vec<f64>>,
        /// Compare the model against the reference values.
        #[arg(long)]
        reference: bool,
        #[arg(long, value_enum, default_value_t = Deriv::Analytic)]
        derivatives: Deriv,
        #[arg(long)]
        robot: Option<String>,
    },
    /// Time the control loop of every controller.
    Benchmark(RunArgs),
    /// Check output schemas and core invariants.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Approx,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Deriv {
    Analytic,
    Fd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    controllers: Option<Vec<ControllerKind>>,
    /// SNR list in dB, `inf` for no noise.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<Snr>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Labels per feature.
    #[arg(long)]
    labels: Option<usize>,
    /// Uncertain-mean width at 10 dB, in label sigmas.
    #[arg(long)]
    rho: Option<f64>,
    /// Trajectory duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    defuzz: Option<DefuzzArg>,
    /// Controller inputs that receive the measurement noise.
    #[arg(long, value_enum)]
    noise_target: Option<NoiseTargetArg>,
    /// Output directory (default `$PSP_OUT` or `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Estimator directory (default `<out>/estimators`).
    #[arg(long)]
    estimators: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "lower")]
enum DefuzzArg {
    Early,
    Deferred,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseTargetArg {
    Model,
    Everything,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.controllers {
            cfg.controllers = v.clone();
        }
        if let Some(v) = &self.snr {
            cfg.snr_db = v.clone();
        }
        if let Some(v) = &self.seeds {
            cfg.seeds = v.clone();
        }
        if let Some(v) = self.labels {
            cfg.labels = v;
        }
        if let Some(v) = self.rho {
            cfg.rho_10db = v;
        }
        if let Some(v) = self.duration {
            cfg.trajectory.duration = v;
        }
        if let Some(v) = self.dt {
            cfg.trajectory.dt = v;
        }
        if let Some(p) = self.defuzz {
            cfg.defuzz = match p {
                DefuzzArg::Early => DefuzzPath::Early,
                DefuzzArg::Deferred => DefuzzPath::Deferred,
            };
        }
        if let Some(t) = self.noise_target {
            cfg.noise_target = match t {
                NoiseTargetArg::Model => NoiseTarget::Model,
                NoiseTargetArg::Everything => NoiseTarget::Everything,
            };
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.estimators {
            cfg.estimators_dir = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// `Ok(false)` when the command completed but found errors.
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Train(args) => cmd_train(&args.config()?),
        Cmd::Simulate { run, emit_traces, timing } => cmd_simulate(&run.config()?, emit_traces, timing),
        Cmd::Reduce { input, method } => cmd_reduce(&input, method),
        Cmd::Dynamics {
            q,
            qdot,
            pose,
            reference,
            derivatives,
            robot,
        } => cmd_dynamics(q, qdot, pose, reference, derivatives, robot),
        Cmd::Benchmark(args) => cmd_benchmark(&args.config()?),
        Cmd::Selftest => cmd_selftest(),
    }
}

fn cmd_train(cfg: &RunConfig) -> Result<bool> {
    let (model, plant) = cfg.models()?;
    let traj = helix_trajectory(&plant, &cfg.trajectory)?;
    let opts = TrainOptions {
        labels: cfg.labels,
        ..Default::default()
    };
    let out = train_from_run(&model, &plant, &traj, cfg.gains.ctc, cfg.train_stride, &opts)?;
    let dir = cfg.estimators_dir();
    let files = save_estimators(&dir, &out.estimators, &out.report)?;
    println!("{} samples, {} files in {}", out.report.samples, files.len(), dir.display());
    println!("{:<6} {:>6} {:>6} {:>12} {:>12}", "elem", "rules", "cells", "median_rel", "max_abs");
    for b in &out.report.bases {
        println!("{:<6} {:>6} {:>6} {:>12.3e} {:>12.3e}", b.element, b.rules, b.cells, b.median_rel_error, b.max_abs_error);
    }
    for w in &out.report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(true)
}

fn estimators_for(cfg: &RunConfig, kinds: &[ControllerKind]) -> Result<Option<psp_ctc::control::EstimatorSet>> {
    if !kinds.iter().any(|k| k.is_fuzzy()) {
        return Ok(None);
    }
    let dir = cfg.estimators_dir();
    let set = load_estimators(&dir).with_context(|| format!("no usable estimators in {} (run `psp train` first)", dir.display()))?;
    Ok(Some(set))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_simulate(cfg: &RunConfig, emit_traces: bool, timing: bool) -> Result<bool> {
    let (model, plant) = cfg.models()?;
    let estimators = estimators_for(cfg, &cfg.controllers)?;
    let traj = helix_trajectory(&plant, &cfg.trajectory)?;
    let bench = Bench {
        cfg,
        model: &model,
        plant: &plant,
        estimators: estimators.as_ref(),
        traj: &traj,
    };
    let cells = grid(cfg);
    let dir = cfg.output_dir.join("sim");
    fs::create_dir_all(&dir)?;
    let mut ok = true;
    let mut summaries = Vec::new();
    for (cell, res) in cells.iter().zip(bench.run_all(&cells, timing)) {
        let key = cell.key();
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                eprintln!("{key}: {e}");
                ok = false;
                continue;
            }
        };
        let summary = res.summary();
        if let Some(k) = summary.unstable_at {
            eprintln!("{key}: unstable at step {k}: {}", summary.failure.as_deref().unwrap_or(""));
        }
        fs::write(dir.join(format!("{key}.json")), serde_json::to_string_pretty(&summary)? + "\n")?;
        if emit_traces {
            res.write_csv(fs::File::create(dir.join(format!("{key}.csv")))?)?;
        }
        summaries.push(summary);
    }

    let mut w = csv::Writer::from_path(cfg.output_dir.join("summary.csv"))?;
    w.write_record(["controller", "snr_db", "seed", "sse", "unstable", "mean_loop_us", "p99_loop_us"])?;
    for s in &summaries {
        w.write_record([
            s.controller.to_string(),
            s.snr_db.to_string(),
            s.seed.to_string(),
            s.sse.to_string(),
            s.unstable.to_string(),
            fmt_opt(s.mean_loop_us),
            fmt_opt(s.p99_loop_us),
        ])?;
    }
    w.flush()?;

    let table = sse_table(&summaries);
    let mut w = csv::Writer::from_path(cfg.output_dir.join("sse_table.csv"))?;
    w.write_record(["snr_db", "pd", "ctc", "t1", "t2", "ratio_t1_t2"])?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>8}", "snr", "pd", "ctc", "t1", "t2", "t1/t2");
    for row in &table {
        let col = |k| row.median_sse.get(&k).copied();
        let cols = ControllerKind::ALL.map(col);
        w.write_record(
            std::iter::once(row.snr_db.to_string())
                .chain(cols.iter().map(|c| fmt_opt(*c)))
                .chain(std::iter::once(fmt_opt(row.ratio_t1_t2))),
        )?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>6} {:>12} {:>12} {:>12} {:>12} {:>8}",
            row.snr_db.to_string(),
            cell(cols[0]),
            cell(cols[1]),
            cell(cols[2]),
            cell(cols[3]),
            row.ratio_t1_t2.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into())
        );
    }
    w.flush()?;
    Ok(ok)
}

fn describe(f: &FuzzyNumber) -> String {
    match f {
        FuzzyNumber::Parametric(MembershipFunction::Interval { lo, hi }) if (hi - lo).abs() < 1e-15 => format!("crisp {lo:.4}"),
        FuzzyNumber::Parametric(MembershipFunction::Interval { lo, hi }) => format!("interval [{lo:.4}, {hi:.4}]"),
        FuzzyNumber::Parametric(MembershipFunction::Singleton { point }) => format!("crisp {point:.4}"),
        FuzzyNumber::Parametric(MembershipFunction::Gaussian { mean, sigma }) => format!("gaussian mean {mean:.4} sigma {sigma:.4}"),
        other => {
            let (lo, hi) = other.support().unwrap_or((f64::NAN, f64::NAN));
            let c = t2fuzzy::t1::centroid_defuzz(other).unwrap_or(f64::NAN);
            format!("fuzzy number on [{lo:.4}, {hi:.4}], centroid {c:.4}")
        }
    }
}

fn is_interval_like(f: &FuzzyNumber) -> bool {
    matches!(
        f,
        FuzzyNumber::Parametric(MembershipFunction::Interval { .. } | MembershipFunction::Singleton { .. })
    )
}

/// Cap on enumerated embedded combinations for non-interval inputs.
const ENUMERATION_CAP: u128 = 10_000_000;

fn exact(input: &GeneralizedCentroidInput) -> Result<FuzzyNumber> {
    if input.z.iter().chain(&input.w).all(is_interval_like) {
        let (z, w) = input.center_spread()?;
        let c: Vec<f64> = z.iter().map(|i| i.center).collect();
        let s: Vec<f64> = z.iter().map(|i| i.spread).collect();
        let h: Vec<f64> = w.iter().map(|i| i.center).collect();
        let d: Vec<f64> = w.iter().map(|i| i.spread).collect();
        let km = km_exact_interval(&c, &s, &h, &d)?;
        println!("km iterations: lower {}, upper {}", km.iterations_lower, km.iterations_upper);
        Ok(km.interval().into())
    } else {
        Ok(cos_tr_bruteforce(input, ENUMERATION_CAP)?)
    }
}

fn cmd_reduce(path: &Path, method: Method) -> Result<bool> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let input: GeneralizedCentroidInput = serde_json::from_str(&text).context("malformed generalized-centroid input")?;
    input.validate()?;
    let ex = matches!(method, Method::Exact | Method::Both).then(|| exact(&input)).transpose()?;
    let ap = matches!(method, Method::Approx | Method::Both)
        .then(|| approx_generalized_centroid(&input))
        .transpose()?;
    if let Some(e) = &ex {
        println!("exact:  {}", describe(e));
    }
    if let Some((a, q)) = &ap {
        println!("approx: {}", describe(a));
        println!("quality: ratio {:.4}{}", q.ratio, if q.warning { " (outside the validity regime)" } else { "" });
    }
    if let (Some(e), Some((a, _))) = (&ex, &ap) {
        let (el, eh) = e.support().unwrap_or((f64::NAN, f64::NAN));
        let (al, ah) = a.support().unwrap_or((f64::NAN, f64::NAN));
        println!("support difference: lower {:+.4e}, upper {:+.4e}", al - el, ah - eh);
    }
    Ok(true)
}

fn print_terms(t: &DynamicTerms) {
    let m = |name: &str, x: &nalgebra::Matrix3<f64>| {
        println!("{name} =");
        for i in 0..3 {
            println!("  [{:>10.4} {:>10.4} {:>10.4}]", x[(i, 0)], x[(i, 1)], x[(i, 2)]);
        }
    };
    m("M", &t.m);
    m("C", &t.c);
    println!("G = [{:.4} {:.4} {:.4}]", t.g[0], t.g[1], t.g[2]);
}

fn cmd_dynamics(q: Option<Vec<f64>>, qdot: Option<Vec<f64>>, pose: Option<Vec<f64>>, reference: bool, deriv: Deriv, robot: Option<String>) -> Result<bool> {
    let cfg = RunConfig {
        robot: robot.unwrap_or_else(|| "default".into()),
        ..Default::default()
    };
    cfg.validate()?;
    let derivatives = match deriv {
        Deriv::Analytic => Derivatives::Analytic,
        Deriv::Fd => Derivatives::FiniteDifference,
    };
    let rob = Robot::new(cfg.robot_params()?, derivatives)?;
    for (name, v) in [("--q", &q), ("--qdot", &qdot), ("--pose", &pose)] {
        if let Some(v) = v {
            if v.len() != 3 {
                bail!("{name} takes three values, got {}", v.len());
            }
        }
    }
    let v3 = |v: &[f64]| Vector3::new(v[0], v[1], v[2]);
    let qad = qdot.as_deref().map(v3).unwrap_or_else(Vector3::zeros);
    let coords = match (&q, &pose) {
        (Some(q), _) => rob.solve_passive(&v3(q), &rob.home())?.q,
        (None, Some(p)) => rob.inverse_kinematics(&ToolPose::new(p[0], p[1], p[2]), &rob.home())?,
        (None, None) => rob.home(),
    };
    let qa = coords.fixed_rows::<3>(0);
    println!("qa = [{:.6} {:.6} {:.6}], qdot = [{:.6} {:.6} {:.6}]", qa[0], qa[1], qa[2], qad[0], qad[1], qad[2]);
    let terms = rob.dynamics(&coords, &qad)?;
    print_terms(&terms);
    let weight = rob.params().total_mass() * rob.params().g;
    println!("sum G = {:.6}, total weight = {:.6}", terms.g.sum(), weight);

    if !reference {
        return Ok(true);
    }
    println!();
    let mut guess = rob.home();
    let mut first: Option<DynamicTerms> = None;
    for (k, (qa, qad)) in REFERENCE_STATES.iter().enumerate() {
        let (t, q) = rob.dynamics_at(&Vector3::from(*qa), &Vector3::from(*qad), &guess)?;
        guess = q;
        println!("reference state {}: qa = {qa:?}, qdot = {qad:?}", k + 1);
        let spread = first.get_or_insert(t.clone()).max_abs_diff(&t);
        println!("  max deviation from state 1: {spread:.3e}");
    }
    let ours = first.expect("three reference states");
    println!("model at the reference states:");
    print_terms(&ours);
    println!("reference:");
    print_terms(&reference_terms());
    let rep = ReferenceReport::new(&ours);
    let pass = rep.within(REFERENCE_TOLERANCE);
    for ((name, err), ok) in [("M", rep.m), ("C", rep.c), ("G", rep.g)].iter().zip(pass) {
        println!(
            "{name}: max relative deviation {:.1}% ({} at {:.0}%)",
            err * 100.0,
            if ok { "within" } else { "outside" },
            REFERENCE_TOLERANCE * 100.0
        );
    }
    // a miss against the reference values is informational only
    Ok(true)
}

fn cmd_benchmark(cfg: &RunConfig) -> Result<bool> {
    let (model, plant) = cfg.models()?;
    let estimators = estimators_for(cfg, &[ControllerKind::T1])?;
    let traj = helix_trajectory(&plant, &cfg.trajectory)?;
    let bench = Bench {
        cfg,
        model: &model,
        plant: &plant,
        estimators: estimators.as_ref(),
        traj: &traj,
    };
    let rep = benchmark(&bench)?;
    println!("{:<14} {:>12} {:>12} {:>8}", "controller", "mean_us", "p99_us", "loops");
    for r in &rep.rows {
        println!("{:<14} {:>12.3} {:>12.3} {:>8}", r.controller, r.mean_loop_us, r.p99_loop_us, r.samples);
    }
    println!("ordering pd < t1 < t2 < ctc: {}", if rep.ordering_holds { "holds" } else { "violated" });
    println!("ctc / t2: {:.1}x (closed-form derivatives: {:.1}x)", rep.ctc_over_t2, rep.ctc_analytic_over_t2);
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("benchmark.json"), serde_json::to_string_pretty(&rep)? + "\n")?;
    Ok(true)
}

fn check(name: &str, ok: bool, all: &mut bool) {
    println!("{} {name}", if ok { "ok  " } else { "FAIL" });
    *all &= ok;
}

fn cmd_selftest() -> Result<bool> {
    let mut all = true;
    let rob = Robot::default();
    check("home satisfies the constraints", rob.constraints(&rob.home())?.amax() <= 1e-12, &mut all);
    let g = rob.dynamics(&rob.home(), &Vector3::zeros())?.g.sum();
    let w = rob.params().total_mass() * rob.params().g;
    check("gravity terms sum to the total weight", ((g - w) / w).abs() <= 1e-6, &mut all);

    let km = km_exact_interval(&[1.0, 2.0, 3.0], &[0.0; 3], &[1.0; 3], &[0.2; 3])?;
    check(
        "interval reduction of the three-point demo",
        (km.lower - 13.0 / 7.0).abs() < 1e-12 && (km.upper - 15.0 / 7.0).abs() < 1e-12,
        &mut all,
    );

    let cfg = RunConfig {
        controllers: vec![ControllerKind::Pd, ControllerKind::Ctc],
        trajectory: psp_ctc::control::HelixParams {
            duration: 0.1,
            ..Default::default()
        },
        ..Default::default()
    };
    let (model, plant) = cfg.models()?;
    let traj = helix_trajectory(&plant, &cfg.trajectory)?;
    let bench = Bench {
        cfg: &cfg,
        model: &model,
        plant: &plant,
        estimators: None,
        traj: &traj,
    };
    for cell in grid(&cfg) {
        let res = bench.run(&cell, false)?;
        let mut buf = Vec::new();
        res.write_csv(&mut buf)?;
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let header_ok = rd.headers()?.iter().eq(CSV_COLUMNS.iter().copied());
        let mut rows = 0;
        let mut rows_ok = true;
        for rec in rd.records() {
            let rec = rec?;
            rows += 1;
            rows_ok &= rec.len() == CSV_COLUMNS.len();
            rows_ok &= rec.iter().take(CSV_COLUMNS.len() - 1).all(|f| f.parse::<f64>().is_ok());
            rows_ok &= rec.get(CSV_COLUMNS.len() - 1).is_some_and(|f| f.is_empty() || f.parse::<f64>().is_ok());
        }
        check(&format!("{} trace schema", cell.key()), header_ok && rows_ok && rows == traj.len(), &mut all);
        let s = res.summary();
        let back: SimSummary = serde_json::from_str(&serde_json::to_string(&s)?)?;
        check(
            &format!("{} summary schema v{SCHEMA_VERSION}", cell.key()),
            back == s && s.schema_version == SCHEMA_VERSION,
            &mut all,
        );
    }
    if !all {
        bail!("self-test failed");
    }
    Ok(all)
}
