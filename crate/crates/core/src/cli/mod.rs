//! Command-line front end. Every command writes CSV, headed by `# key=value`
//! comment lines that echo the complete effective configuration.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{RealList, Resolver, SizeList};

use crate::diagnostics::{
    lmhs_bw_experiment, mse_protocol, sweep_partition, AcceptanceCurvePoint,
    BwExperimentConfig, MseConfig, SweepCaps,
};
use crate::envelope::{Partition, Scheme};
use crate::error::{Error, Result};
use crate::interval::{fmt_f64, IntervalBox};
use crate::sampler::{derive_seed, TrioSampler};
use crate::targets::{build_target, true_mean_oracle, Target, TargetSpec};

#[derive(Debug, Parser)]
#[command(
    name = "mrs",
    version,
    about = "Rejection sampling with interval-verified envelopes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples and write every proposal with its three verdicts.
    Sample(SampleArgs),
    /// Acceptance probability against partition size for one scheme.
    Sweep(SweepArgs),
    /// Acceptance curves of all three refinement schemes.
    Compare(SweepArgs),
    /// Mean squared error of the rejection, importance and chain estimates.
    Mse(MseArgs),
    /// Local Metropolis chains under the B/W stopping rule.
    Lmhs(LmhsArgs),
    /// Write the boxes of a refined partition.
    PartitionDump(DumpArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in target: g1, g2, g5, g5p, g5pp, g5hat, levy, needle, rosenbrock, witch.
    #[arg(long, conflicts_with = "formula")]
    target: Option<String>,
    /// Target shape as a formula in x1..xD; needs --domain.
    #[arg(long)]
    formula: Option<String>,
    /// Domain box: `[lo,hi]^D` or a list `[a,b],[c,d]`.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<IntervalBox>,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Levy temperature.
    #[arg(long)]
    temperature: Option<f64>,
    /// Needle width.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Dimension of the Rosenbrock or witch's hat target.
    #[arg(long)]
    dim: Option<usize>,
    /// Witch's hat radius exponent r, radius 10^-r.
    #[arg(long, allow_hyphen_values = true)]
    radius_exp: Option<i32>,
    /// Witch's hat cone weight.
    #[arg(long)]
    mix: Option<f64>,
    /// Record sampling times in the output (makes it nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    /// Partition size to refine to.
    #[arg(long, conflicts_with = "refine_budget")]
    size: Option<usize>,
    /// Number of refinement steps from the single-box partition.
    #[arg(long)]
    refine_budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sizes: SizeArgs,
    /// Number of rejection-accepted samples.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    /// Write only the rejection-accepted proposals.
    #[arg(long)]
    accepted_only: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ascending partition sizes.
    #[arg(long)]
    sizes: Option<SizeList>,
    #[arg(long)]
    max_accepts: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MseArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    sizes: Option<SizeList>,
    /// Rejection-accepted samples per replicate.
    #[arg(long)]
    n_mrs: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Proposal cap per replicate.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Known mean; computed by quadrature when absent.
    #[arg(long, allow_hyphen_values = true)]
    true_mean: Option<RealList>,
    /// Quadrature panels per axis for the mean.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LmhsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    chains: Option<usize>,
    /// Side of the uniform proposal cube.
    #[arg(long)]
    cube_side: Option<f64>,
    #[arg(long)]
    check_every: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Post burn-in length as a multiple of the burn-in.
    #[arg(long)]
    post_factor: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Independent repetitions of the experiment.
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sizes: SizeArgs,
}

/// Settings shared by every command.
struct RunConfig {
    target: TargetSpec,
    scheme: Scheme,
    seed: u64,
    out: Option<PathBuf>,
    workers: usize,
    timing: bool,
}

fn resolve_target(r: &mut Resolver, c: &CommonArgs) -> Result<TargetSpec> {
    let formula = r.get_opt::<String>("formula", c.formula.clone())?;
    let name = r.get_opt::<String>("target", c.target.clone())?;
    let domain = r.get_opt::<IntervalBox>("domain", c.domain.clone())?;
    let temperature = r.get_opt("temperature", c.temperature)?;
    let sigma2 = r.get_opt("sigma2", c.sigma2)?;
    let dim = r.get_opt("dim", c.dim)?;
    let radius_exp = r.get_opt("radius_exp", c.radius_exp)?;
    let mix = r.get_opt("mix", c.mix)?;
    let unused = |what: &str, target: &str| {
        Error::Config(format!("--{what} does not apply to target `{target}`"))
    };
    let mut spec = match (formula, name) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either a target or a formula, not both".into()))
        }
        (Some(f), None) => {
            let d = domain.clone().ok_or_else(|| Error::Config("--formula needs --domain".into()))?;
            for (flag, set) in [
                ("temperature", temperature.is_some()),
                ("sigma2", sigma2.is_some()),
                ("dim", dim.is_some()),
                ("radius-exp", radius_exp.is_some()),
                ("mix", mix.is_some()),
            ] {
                if set {
                    return Err(unused(flag, "formula"));
                }
            }
            TargetSpec::formula(&f, d)
        }
        (None, Some(n)) => {
            let mut spec = TargetSpec::named(&n)?;
            if let Some(t) = temperature {
                match &mut spec {
                    TargetSpec::Levy(s) => s.temperature = t,
                    _ => return Err(unused("temperature", &n)),
                }
            }
            if let Some(s2) = sigma2 {
                match &mut spec {
                    TargetSpec::Needle(s) => s.sigma2 = s2,
                    _ => return Err(unused("sigma2", &n)),
                }
            }
            if let Some(d) = dim {
                spec = match spec {
                    TargetSpec::Rosenbrock(_) => TargetSpec::rosenbrock(d),
                    TargetSpec::WitchsHat(s) => TargetSpec::witchs_hat(d, s.radius_exp, s.mix),
                    _ => return Err(unused("dim", &n)),
                };
            }
            if radius_exp.is_some() || mix.is_some() {
                match &mut spec {
                    TargetSpec::WitchsHat(s) => {
                        s.radius_exp = radius_exp.unwrap_or(s.radius_exp);
                        s.mix = mix.unwrap_or(s.mix);
                    }
                    _ => return Err(unused("radius-exp/--mix", &n)),
                }
            }
            if let Some(d) = domain {
                *spec.domain_mut() = d;
            }
            spec
        }
        (None, None) => return Err(Error::Config("one of --target or --formula is required".into())),
    };
    spec.validate()?;
    if let TargetSpec::WitchsHat(s) = &mut spec {
        r.note("witch_center", RealList(s.center.clone()));
    }
    r.note("effective_domain", spec.domain());
    if let Some(text) = spec.formula_text() {
        r.note("effective_formula", text);
    }
    Ok(spec)
}

fn resolve_common(r: &mut Resolver, c: &CommonArgs) -> Result<RunConfig> {
    let target = resolve_target(r, c)?;
    let scheme = r.get("scheme", c.scheme, Scheme::Integral)?;
    let seed = r.get("seed", c.seed, 42)?;
    let out = r.get_opt::<String>("out", c.out.as_ref().map(|p| p.display().to_string()))?;
    let workers = r.get("workers", c.workers, 1)?;
    let timing = r.get("timing", c.timing.then_some(true), false)?;
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    Ok(RunConfig {
        target,
        scheme,
        seed,
        out: out.map(PathBuf::from),
        workers,
        timing,
    })
}

/// Steps to refine from one box: from `--size` or `--refine-budget`.
fn resolve_steps(r: &mut Resolver, s: &SizeArgs, default_size: usize) -> Result<usize> {
    let budget = r.get_opt("refine_budget", s.refine_budget)?;
    let size = r.get_opt("size", s.size)?;
    match (size, budget) {
        (Some(_), Some(_)) => Err(Error::Config("give either size or refine_budget".into())),
        (Some(0), None) => Err(Error::Config("size must be at least 1".into())),
        (Some(n), None) => Ok(n - 1),
        (None, Some(b)) => Ok(b),
        (None, None) => Ok(default_size - 1),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_header(out: &mut dyn Write, command: &str, echo: &[(String, String)]) -> Result<()> {
    writeln!(out, "# command={command}")?;
    writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in echo {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn build_partition(cfg: &RunConfig, steps: usize) -> Result<Partition<Target>> {
    let target = build_target(&cfg.target)?;
    let mut p = Partition::new(target, cfg.target.domain().clone(), cfg.scheme)?;
    p.refine(steps)?;
    Ok(p)
}

fn bool01(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let cfg = resolve_common(&mut r, &a.common)?;
    let steps = resolve_steps(&mut r, &a.sizes, 1000)?;
    let n = r.get("n", a.n, 1000)?;
    let max_trials = r.get("max_trials", a.max_trials, 100_000_000)?;
    let accepted_only = r.get("accepted_only", a.accepted_only.then_some(true), false)?;
    let echo = r.finish()?;

    let started = Instant::now();
    let partition = build_partition(&cfg, steps)?;
    let bounds = partition.acceptance_bounds()?;
    let mut sampler = TrioSampler::new(&partition, cfg.seed)?;
    let mut out = open_output(&cfg.out)?;
    write_header(&mut out, "sample", &echo)?;
    writeln!(out, "# partition_size={}", partition.len())?;
    writeln!(out, "# guaranteed_lower_bound={}", fmt_f64(bounds.lo()))?;
    let dim = partition.domain().dim();
    let mut cols = vec!["proposal".to_string()];
    cols.extend((1..=dim).map(|k| format!("x{k}")));
    cols.extend(
        [
            "box_index",
            "proposed_height",
            "target_value",
            "envelope_value",
            "importance_weight",
            "mrs_accepted",
            "imhs_accepted",
        ]
        .map(String::from),
    );
    writeln!(out, "{}", cols.join(","))?;
    while sampler.accepted() < n {
        if sampler.proposals() >= max_trials {
            return Err(Error::TrialCapExceeded(max_trials));
        }
        let idx = sampler.proposals();
        let rec = sampler.draw()?;
        if accepted_only && !rec.mrs_accepted {
            continue;
        }
        let mut row = vec![idx.to_string()];
        row.extend(rec.point.iter().map(|x| fmt_f64(*x)));
        row.push(rec.box_index.to_string());
        for v in [rec.proposed_height, rec.target_value, rec.envelope_value, rec.importance_weight] {
            row.push(fmt_f64(v));
        }
        row.push(bool01(rec.mrs_accepted).into());
        row.push(bool01(rec.imhs_accepted).into());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    eprintln!(
        "partition {} boxes, guaranteed acceptance >= {:.6}, empirical {:.6} ({} / {}), {:.3} s",
        partition.len(),
        bounds.lo(),
        sampler.accepted() as f64 / sampler.proposals() as f64,
        sampler.accepted(),
        sampler.proposals(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

const CURVE_COLUMNS: &str =
    "partition_size,guaranteed_lower_bound,empirical_acceptance,n_trials,n_accepted,cpu_seconds";

fn curve_row(p: &AcceptanceCurvePoint) -> String {
    format!(
        "{},{},{},{},{},{}",
        p.partition_size,
        fmt_f64(p.guaranteed_lower_bound),
        fmt_f64(p.empirical_acceptance),
        p.n_trials,
        p.n_accepted,
        p.cpu_seconds.map(fmt_f64).unwrap_or_default()
    )
}

fn cmd_sweep(a: &SweepArgs, compare: bool) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let cfg = resolve_common(&mut r, &a.common)?;
    let sizes = r.get("sizes", a.sizes.clone(), SizeList(vec![1, 10, 100, 1000]))?;
    let caps = SweepCaps {
        max_accepts: r.get("max_accepts", a.max_accepts, 10_000)?,
        max_trials: r.get("max_trials", a.max_trials, 100_000)?,
    };
    let echo = r.finish()?;
    let schemes = if compare {
        Scheme::ALL.to_vec()
    } else {
        vec![cfg.scheme]
    };
    let mut out = open_output(&cfg.out)?;
    write_header(&mut out, if compare { "compare" } else { "sweep" }, &echo)?;
    writeln!(out, "scheme,{CURVE_COLUMNS}")?;
    for scheme in schemes {
        let target = build_target(&cfg.target)?;
        let mut p = Partition::new(target, cfg.target.domain().clone(), scheme)?;
        // Every scheme sees the same sampling seeds.
        for point in sweep_partition(&mut p, &sizes.0, caps, cfg.seed, cfg.timing)? {
            writeln!(out, "{scheme},{}", curve_row(&point))?;
            eprintln!(
                "{scheme} size {}: bound {:.6}, empirical {:.6}",
                point.partition_size, point.guaranteed_lower_bound, point.empirical_acceptance
            );
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_mse(a: &MseArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let cfg = resolve_common(&mut r, &a.common)?;
    let sizes = r.get("sizes", a.sizes.clone(), SizeList(vec![100, 1000]))?;
    let mse_cfg = MseConfig {
        n_mrs: r.get("n_mrs", a.n_mrs, 100)?,
        n_reps: r.get("reps", a.reps, 500)?,
        max_trials: r.get("max_trials", a.max_trials, 100_000_000)?,
        workers: cfg.workers,
    };
    let grid = r.get("grid", a.grid, 200)?;
    let given_mean = r.get_opt("true_mean", a.true_mean.clone())?;
    let true_mean = match given_mean {
        Some(m) => m.0,
        None => true_mean_oracle(&cfg.target, grid)?,
    };
    r.note("effective_true_mean", RealList(true_mean.clone()));
    let echo = r.finish()?;
    if sizes.0.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("sizes must be ascending".into()));
    }

    let mut out = open_output(&cfg.out)?;
    write_header(&mut out, "mse", &echo)?;
    writeln!(out, "partition_size,guaranteed_lower_bound,acceptance,mse_mrs,mse_is,mse_imhs")?;
    let mut partition = build_partition(&cfg, 0)?;
    for (k, &size) in sizes.0.iter().enumerate() {
        partition.refine_to(size)?;
        let report = mse_protocol(&partition, &true_mean, &mse_cfg, derive_seed(cfg.seed, k as u64))?;
        let bound = partition.acceptance_bounds()?.lo();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            partition.len(),
            fmt_f64(bound),
            fmt_f64(report.acceptance),
            fmt_f64(report.mse_mrs),
            fmt_f64(report.mse_is),
            fmt_f64(report.mse_imhs)
        )?;
        eprintln!(
            "size {}: acceptance {:.4}, mse mrs {:.3e} is {:.3e} imhs {:.3e}",
            partition.len(),
            report.acceptance,
            report.mse_mrs,
            report.mse_is,
            report.mse_imhs
        );
    }
    out.flush()?;
    Ok(())
}

fn cmd_lmhs(a: &LmhsArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let cfg = resolve_common(&mut r, &a.common)?;
    let d = BwExperimentConfig::default();
    let exp = BwExperimentConfig {
        n_chains: r.get("chains", a.chains, d.n_chains)?,
        cube_side: r.get("cube_side", a.cube_side, d.cube_side)?,
        check_every: r.get("check_every", a.check_every, d.check_every)?,
        threshold: r.get("threshold", a.threshold, d.threshold)?,
        post_factor: r.get("post_factor", a.post_factor, d.post_factor)?,
        max_steps: r.get("max_steps", a.max_steps, d.max_steps)?,
    };
    let replicates = r.get("replicates", a.replicates, 1)?;
    let echo = r.finish()?;
    let target = build_target(&cfg.target)?;
    let domain = cfg.target.domain();

    let mut out = open_output(&cfg.out)?;
    write_header(&mut out, "lmhs", &echo)?;
    let mut cols = vec!["replicate".to_string(), "step".to_string()];
    cols.extend((1..=exp.n_chains).map(|c| format!("mean_x1_chain{c}")));
    cols.extend(["b_x1", "w_x1", "ratio_x1", "max_ratio", "burned_in"].map(String::from));
    writeln!(out, "{}", cols.join(","))?;
    for rep in 0..replicates {
        let result = lmhs_bw_experiment(&target, domain, &exp, derive_seed(cfg.seed, rep as u64))?;
        for t in &result.trace {
            let mut row = vec![rep.to_string(), t.step.to_string()];
            row.extend(t.running_means.iter().map(|m| fmt_f64(*m)));
            row.push(fmt_f64(t.report.b[0]));
            row.push(fmt_f64(t.report.w[0]));
            row.push(fmt_f64(t.report.ratio[0]));
            row.push(fmt_f64(t.report.max_ratio()));
            row.push(bool01(result.burn_in.is_some_and(|b| t.step >= b)).into());
            writeln!(out, "{}", row.join(","))?;
        }
        match result.burn_in {
            Some(b) => eprintln!(
                "replicate {rep}: B/W <= {} at step {b}; final x1 means {:?}",
                exp.threshold,
                result.final_means.iter().map(|m| m[0]).collect::<Vec<_>>()
            ),
            None => eprintln!("replicate {rep}: stopping rule never fired"),
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_partition_dump(a: &DumpArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let cfg = resolve_common(&mut r, &a.common)?;
    let steps = resolve_steps(&mut r, &a.sizes, 1000)?;
    let echo = r.finish()?;
    let partition = build_partition(&cfg, steps)?;
    let mut out = open_output(&cfg.out)?;
    write_header(&mut out, "partition-dump", &echo)?;
    writeln!(out, "# partition_size={}", partition.len())?;
    writeln!(out, "# guaranteed_lower_bound={}", fmt_f64(partition.acceptance_bounds()?.lo()))?;
    partition.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Sweep(a) => cmd_sweep(a, false),
        Command::Compare(a) => cmd_sweep(a, true),
        Command::Mse(a) => cmd_mse(a),
        Command::Lmhs(a) => cmd_lmhs(a),
        Command::PartitionDump(a) => cmd_partition_dump(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
