//! Command-line front end.
//!
//! Subcommands: `simulate` (one episode → trace CSV), `estimate` (Monte
//! Carlo δ-optimality probability → report JSON), `k-bound` (print the
//! stage bound), `demo-example1` / `demo-example2` (the built-in
//! impossibility reproductions), `selftest`.
//!
//! Flags override config-file fields. Randomized commands never run
//! without a seed: give one explicitly or a fresh one is generated and
//! printed so the run stays reproducible. Exit codes: 0 success, 2 usage
//! (clap), 3 config/argument, 4 contract, 5 integrity, 6 I/O.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use naturelab::agent::AgentConfig;
use naturelab::bounds::theoretical_k;
use naturelab::config::ExperimentConfig;
use naturelab::demos;
use naturelab::engine::{estimate_delta_optimality, run_episode, EstimateSpec};
use naturelab::error::{Error, Result};
use naturelab::export;
use naturelab::rational::{parse_rational, to_f64, Rat};
use naturelab::rng::SeedPlan;

#[derive(Parser)]
#[command(
    name = "naturelab",
    version,
    about = "Simulation lab for repeated games against Nature",
    after_help = "Output paths are resolved against $NATURELAB_OUT_DIR when set.\n\
                  Exit codes: 0 ok, 2 usage, 3 config/argument, 4 contract, 5 integrity, 6 i/o."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOverrides {
    /// Experiment config file (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Master seed; overrides the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon override.
    #[arg(long)]
    horizon: Option<u64>,
    /// Replication-count override (estimate only).
    #[arg(long)]
    replications: Option<u64>,
    /// Trace CSV path override.
    #[arg(long, value_name = "PATH")]
    out_trace: Option<PathBuf>,
    /// Report JSON path override.
    #[arg(long, value_name = "PATH")]
    out_report: Option<PathBuf>,
    /// Worker threads for the replication loop (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trace as CSV.
    Simulate(RunOverrides),
    /// Estimate the probability that the success fraction stays >= 1-delta
    /// from stage K through the horizon.
    Estimate(RunOverrides),
    /// Print the theoretical stage bound K(delta, n).
    KBound {
        /// Optimality parameter in (0, 1); exact decimals or p/q accepted.
        #[arg(long)]
        delta: String,
        /// Problem size n = max(actions, states).
        #[arg(long)]
        n: u32,
    },
    /// Pure agent vs the mirror adversary: the benchmark fraction cannot
    /// exceed 1/2 in both problems of the built-in pair.
    DemoExample1 {
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Pure agent kind: greedy_deterministic, safety_learner, or fixed.
        #[arg(long, default_value = "greedy_deterministic")]
        agent: String,
        /// Delta for the greedy_deterministic agent.
        #[arg(long, default_value = "0.2")]
        delta: String,
        #[arg(long, value_name = "PATH")]
        out_report: Option<PathBuf>,
    },
    /// Payoff-only agent vs uniform Nature on the masked problem pair:
    /// min of the two success fractions is capped near 3/4.
    DemoExample2 {
        #[arg(long, default_value = "100")]
        a: String,
        #[arg(long, default_value = "20")]
        b: String,
        #[arg(long, default_value = "4")]
        c: String,
        /// Exploration parameter for the blind-explorer agent.
        #[arg(long, default_value = "0.05")]
        delta: String,
        #[arg(long, default_value_t = 30_000)]
        horizon: u64,
        #[arg(long, default_value_t = 50)]
        replications: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Payoff-only agent kind: cr_explorer_blind, safety_learner,
        /// uniform_random, fixed:0, fixed:1.
        #[arg(long, default_value = "cr_explorer_blind")]
        agent: String,
        #[arg(long, value_name = "PATH")]
        out_report: Option<PathBuf>,
    },
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// Resolve a seed: explicit flag > config value > freshly generated (and
/// printed, so the run can be reproduced).
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> u64 {
    if let Some(s) = flag.or(config) {
        println!("master_seed: {s}");
        s
    } else {
        let s = fresh_seed();
        println!("master_seed: {s} (generated; pass --seed {s} to reproduce)");
        s
    }
}

fn fresh_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    nanos ^ (std::process::id() as u64).rotate_left(32)
}

/// Output paths resolve against $NATURELAB_OUT_DIR when relative.
fn out_path(p: &Path) -> PathBuf {
    match std::env::var_os("NATURELAB_OUT_DIR") {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn configure_threads(jobs: Option<usize>) {
    if let Some(jobs) = jobs {
        // ignore failure: the global pool may already be initialized
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
}

fn load_config(ov: &RunOverrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&ov.config)?;
    if let Some(h) = ov.horizon {
        if h < cfg.k {
            return Err(Error::Argument(format!(
                "--horizon {h} is below the resolved K = {}",
                cfg.k
            )));
        }
        cfg.horizon = h;
    }
    if let Some(r) = ov.replications {
        if r == 0 {
            return Err(Error::Argument("--replications must be >= 1".into()));
        }
        cfg.replications = r;
    }
    if let Some(p) = &ov.out_trace {
        cfg.trace_csv = Some(p.clone());
    }
    if let Some(p) = &ov.out_report {
        cfg.report_json = Some(p.clone());
    }
    if let Some(s) = ov.seed {
        cfg.master_seed = Some(s);
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(ov) => {
            configure_threads(ov.jobs);
            let mut cfg = load_config(&ov)?;
            cfg.master_seed = Some(resolve_seed(None, cfg.master_seed));
            let seed = cfg.master_seed.expect("just set");
            let problem = Arc::new(cfg.problem.clone());
            let trace = run_episode(
                &problem,
                &cfg.agent,
                &cfg.nature,
                cfg.monitoring,
                cfg.horizon,
                SeedPlan::new(seed),
                0,
            )?;
            let n = trace.final_success_count();
            println!(
                "episode: {} stages on {:?}, N_T = {n}, fraction {:.4}",
                cfg.horizon,
                problem.label(),
                n as f64 / cfg.horizon as f64
            );
            match &cfg.trace_csv {
                Some(path) => {
                    let path = out_path(path);
                    export::write_trace_csv(&trace, &problem, &path)?;
                    println!("trace: {}", path.display());
                }
                None => println!("trace: not written (no output.trace_csv / --out-trace)"),
            }
            Ok(())
        }
        Command::Estimate(ov) => {
            configure_threads(ov.jobs);
            let mut cfg = load_config(&ov)?;
            cfg.master_seed = Some(resolve_seed(None, cfg.master_seed));
            let seed = cfg.master_seed.expect("just set");
            let problem = Arc::new(cfg.problem.clone());
            let report = estimate_delta_optimality(&EstimateSpec {
                problem: Arc::clone(&problem),
                agent: cfg.agent.clone(),
                nature: cfg.nature.clone(),
                monitoring: cfg.monitoring,
                delta: cfg.delta.clone(),
                k: cfg.k,
                horizon: cfg.horizon,
                replications: cfg.replications,
                master_seed: seed,
                confidence_level: cfg.confidence_level,
                config_echo: cfg.to_value(),
            })?;
            print_report_summary(&report, &cfg.delta);
            if let Some(path) = &cfg.report_json {
                let path = out_path(path);
                export::write_json(&report.to_value(), &path)?;
                println!("report: {}", path.display());
            }
            if let Some(path) = &cfg.trace_csv {
                // replication 0's trace, for auditing
                let trace = run_episode(
                    &problem,
                    &cfg.agent,
                    &cfg.nature,
                    cfg.monitoring,
                    cfg.horizon,
                    SeedPlan::new(seed),
                    0,
                )?;
                let path = out_path(path);
                export::write_trace_csv(&trace, &problem, &path)?;
                println!("trace (replication 0): {}", path.display());
            }
            Ok(())
        }
        Command::KBound { delta, n } => {
            let delta = parse_rational(&delta)?;
            println!("{}", theoretical_k(&delta, n)?);
            Ok(())
        }
        Command::DemoExample1 {
            horizon,
            seed,
            agent,
            delta,
            out_report,
        } => {
            let seed = resolve_seed(seed, None);
            let delta = parse_rational(&delta)?;
            let agent = parse_pure_agent(&agent, &delta)?;
            let report = demos::mirror_demo(&agent, horizon, seed)?;
            println!("pure agent vs mirror adversary, horizon {horizon}");
            println!(
                "  N1_T + N2_T = T at every stage: {}",
                if report.identity_holds { "yes" } else { "NO" }
            );
            println!(
                "  final fractions: problem1 {:.4}, problem2 {:.4}, min {:.4} (<= 0.5 by the identity)",
                report.final_fraction_1, report.final_fraction_2, report.min_final_fraction
            );
            for (t, f1, f2) in &report.fraction_table {
                println!("    T={t:>7}  f1={f1:.4}  f2={f2:.4}");
            }
            if let Some(path) = out_report {
                let path = out_path(&path);
                export::write_json(&report.to_value(), &path)?;
                println!("report: {}", path.display());
            }
            Ok(())
        }
        Command::DemoExample2 {
            a,
            b,
            c,
            delta,
            horizon,
            replications,
            seed,
            agent,
            out_report,
        } => {
            let seed = resolve_seed(seed, None);
            let delta = parse_rational(&delta)?;
            let agent = parse_payoff_only_agent(&agent, &delta)?;
            let report = demos::masked_demo(&demos::MaskedDemoSpec {
                a: parse_rational(&a)?,
                b: parse_rational(&b)?,
                c: parse_rational(&c)?,
                agent,
                horizon,
                replications,
                master_seed: seed,
            })?;
            println!(
                "payoff-only agent vs uniform Nature on the masked pair, horizon {horizon}, {replications} replications"
            );
            println!(
                "  indistinguishability premise (coupled action sequences identical): {}",
                if report.premise_holds { "yes" } else { "NO" }
            );
            println!(
                "  success fractions: problem1 {:.4}, problem2 {:.4}, min {:.4} (analytic ceiling {:.2})",
                report.fraction_1, report.fraction_2, report.min_fraction, report.ceiling
            );
            if let Some(path) = out_report {
                let path = out_path(&path);
                export::write_json(&report.to_value(), &path)?;
                println!("report: {}", path.display());
            }
            Ok(())
        }
        Command::Selftest { seed } => {
            let seed = resolve_seed(seed, Some(20_260_810));
            naturelab::selftest::run(seed)
        }
    }
}

fn print_report_summary(report: &naturelab::ExperimentReport, delta: &Rat) {
    let target = 1.0 - to_f64(delta);
    println!(
        "estimate: {}/{} replications satisfied the event",
        report.success_count, report.replications
    );
    println!("  {}", report.event);
    println!(
        "  probability estimate {:.4}, {:.0}% CI [{:.4}, {:.4}]",
        report.probability_estimate,
        report.confidence_level * 100.0,
        report.confidence_interval.0,
        report.confidence_interval.1
    );
    if report.probability_estimate >= target {
        println!("  PASS (>= 1 - delta = {target:.4})");
    } else {
        println!("  FAIL (< {target:.4})");
    }
}

fn parse_pure_agent(kind: &str, delta: &Rat) -> Result<AgentConfig> {
    match kind {
        "greedy_deterministic" => Ok(AgentConfig::GreedyDeterministic { delta: delta.clone() }),
        "safety_learner" => Ok(AgentConfig::SafetyLearner),
        _ => {
            if let Some(idx) = kind.strip_prefix("fixed:") {
                let action: usize = idx
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad fixed action index {idx:?}")))?;
                return Ok(AgentConfig::Fixed { action });
            }
            Err(Error::Argument(format!(
                "agent {kind:?} is not a pure agent kind (try greedy_deterministic, \
                 safety_learner, or fixed:<index>)"
            )))
        }
    }
}

fn parse_payoff_only_agent(kind: &str, delta: &Rat) -> Result<AgentConfig> {
    match kind {
        "cr_explorer_blind" => Ok(AgentConfig::CrExplorerBlind { delta: delta.clone() }),
        "safety_learner" => Ok(AgentConfig::SafetyLearner),
        "uniform_random" => Ok(AgentConfig::UniformRandom),
        _ => {
            if let Some(idx) = kind.strip_prefix("fixed:") {
                let action: usize = idx
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad fixed action index {idx:?}")))?;
                return Ok(AgentConfig::Fixed { action });
            }
            Err(Error::Argument(format!(
                "agent {kind:?} cannot run under imperfect monitoring (try cr_explorer_blind, \
                 safety_learner, uniform_random, or fixed:<index>)"
            )))
        }
    }
}
