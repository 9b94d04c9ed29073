use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmab_rollout::bounds::bounds_table;
use rmab_rollout::mdp::{policy_iteration, value_iteration, DeterministicPolicy, MdpModel};
use rmab_rollout::rollout::{rollout_policy_action, RolloutConfig};
use rmab_rollout::scenario::{
    format_sig, load_scenario, run_experiment, BuiltModel, IndexMethodName, PolicyName, RunOptions,
    ScenarioConfig,
};
use rmab_rollout::stream::derive_seed;
use rmab_rollout::whittle::{
    build_index_table, check_full_indexability, default_grid, IndexMethod, McIndexParams, TwoTimescaleParams,
};
use rmab_rollout::{Error, ErrorKind, Result};

#[derive(Parser, Debug)]
#[command(name = "rmab-rollout", version, about = "Rollout, Whittle index and exact DP tools for MDPs and restless bandits")]
struct Cli {
    /// Scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent (except `rmab`, which defaults to the scenario's csv path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a tabular MDP (or the joint bandit) exactly.
    Solve(SolveArgs),
    /// Rollout decision at one state, or closed-loop rollout evaluation.
    Rollout(RolloutArgs),
    /// Compute index tables for one arm.
    Index(IndexArgs),
    /// Compare bandit policies and write CSV plus manifest.
    Rmab(RmabArgs),
    /// Print the closed-form error bounds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveMethod {
    Vi,
    Pi,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "vi")]
    method: SolveMethod,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
}

#[derive(Args, Debug)]
struct RolloutArgs {
    /// Flat start state.
    #[arg(long, default_value_t = 0)]
    state: usize,
    #[arg(long, default_value_t = 1000)]
    trajectories: usize,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    /// Evaluate the closed-loop rollout policy over this many episodes instead.
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
    TwoTimescale,
}

#[derive(Args, Debug)]
struct IndexArgs {
    /// Scenario file holding the arm (defaults to --config).
    #[arg(long)]
    arm: Option<PathBuf>,
    /// Which arm of the scenario.
    #[arg(long, default_value_t = 0)]
    arm_index: usize,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// `all` or a comma-separated list of flat states.
    #[arg(long, default_value = "all")]
    states: String,
    /// `all` or a comma-separated list of stored levels (0 is the Whittle index).
    #[arg(long, default_value = "all")]
    alpha_levels: String,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args, Debug)]
struct RmabArgs {
    /// Policies to compare (comma-separated); defaults to the scenario list.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    rollout_horizon: Option<usize>,
    #[arg(long)]
    epsilon0: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    candidate_cap: Option<usize>,
    /// Also write wall-clock times next to the CSV.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    tau: u32,
    #[arg(long)]
    rmax: f64,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::NonConvergence => 3,
        ErrorKind::Guard => 4,
        ErrorKind::Contract | ErrorKind::Io => 1,
    }
}

fn scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let path = path.ok_or_else(|| Error::ConfigInvalid {
        field: "--config".into(),
        message: "a scenario file is required".into(),
    })?;
    let mut cfg = load_scenario(path)?;
    if let Some(s) = seed {
        cfg.experiment.seed = s;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: "stdout".into(),
            source: e,
        }),
    }
}

fn parse_list(text: &str, all: usize) -> Result<Vec<usize>> {
    if text == "all" {
        return Ok((0..all).collect());
    }
    text.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| Error::ConfigInvalid {
                field: "list".into(),
                message: format!("`{t}` is not a nonnegative integer"),
            })
        })
        .collect()
}

fn mdp_of(cfg: &ScenarioConfig) -> Result<MdpModel> {
    match cfg.validate()? {
        BuiltModel::Mdp(m) => Ok(m),
        BuiltModel::Rmab(r) => Ok(rmab_rollout::rmab::joint_as_mdp(&r)?.mdp),
    }
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<()> {
    let cfg = scenario(cli.config.as_deref(), cli.seed)?;
    let m = mdp_of(&cfg)?;
    let (values, policy, iterations) = match a.method {
        SolveMethod::Vi => {
            let r = value_iteration(&m, a.tol, a.max_iters)?;
            (r.values, r.policy, r.iterations)
        }
        SolveMethod::Pi => {
            let r = policy_iteration(&m, a.tol)?;
            (r.values, r.policy, r.rounds)
        }
    };
    if cli.verbose {
        eprintln!("solved {} states in {iterations} iterations", m.num_states());
    }
    let mut text = String::from("state,value,action\n");
    for s in 0..m.num_states() {
        text.push_str(&format!("{s},{},{}\n", format_sig(values[s], 9), policy[s]));
    }
    emit(cli.out.as_deref(), &text)
}

fn rollout(cli: &Cli, a: &RolloutArgs) -> Result<()> {
    let mut cfg = scenario(cli.config.as_deref(), cli.seed)?;
    if let Some(episodes) = a.episodes {
        cfg.experiment.policies = vec![PolicyName::Rollout];
        cfg.experiment.episodes = episodes;
        cfg.experiment.rollout.trajectories = a.trajectories;
        cfg.experiment.rollout.horizon = a.horizon;
        return rmab_run(cli, cfg, false);
    }
    let m = match cfg.validate()? {
        BuiltModel::Mdp(m) => m,
        BuiltModel::Rmab(_) => {
            return Err(Error::ConfigInvalid {
                field: "model".into(),
                message: "single-state rollout needs an `mdp` model; use --episodes for bandits".into(),
            })
        }
    };
    let base = DeterministicPolicy::new(
        (0..m.num_states())
            .map(|s| {
                (0..m.num_actions())
                    .fold((0, f64::NEG_INFINITY), |best, act| {
                        let r = m.reward(s, act);
                        if r > best.1 {
                            (act, r)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect(),
    );
    let rc = RolloutConfig::new(a.trajectories, a.horizon, cfg.experiment.seed)?;
    let decision = with_threads(cli.threads, || rollout_policy_action(&m, &base, a.state, &rc))?;
    let mut text = String::from("action,q_value,std_dev,chosen\n");
    for (act, q) in decision.estimates.iter().enumerate() {
        text.push_str(&format!(
            "{act},{},{},{}\n",
            format_sig(q.value, 9),
            format_sig(q.sample_std_dev, 9),
            u8::from(act == decision.action)
        ));
    }
    emit(cli.out.as_deref(), &text)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                reason: e.to_string(),
            })?
            .install(f),
        None => f(),
    }
}

fn index(cli: &Cli, a: &IndexArgs) -> Result<()> {
    let path = a.arm.as_deref().or(cli.config.as_deref());
    let cfg = scenario(path, cli.seed)?;
    let rmab = cfg.validate()?.into_rmab()?;
    if a.arm_index >= rmab.num_arms() {
        return Err(Error::ConfigInvalid {
            field: "--arm-index".into(),
            message: format!("scenario has {} arms", rmab.num_arms()),
        });
    }
    let arm = rmab.arm(a.arm_index).model();
    let ix = &cfg.experiment.index;
    let method = match a.method {
        Some(MethodArg::Exact) => IndexMethodName::Exact,
        Some(MethodArg::Mc) => IndexMethodName::Mc,
        Some(MethodArg::TwoTimescale) => IndexMethodName::TwoTimescale,
        None => ix.method,
    };
    let states = parse_list(&a.states, arm.num_states())?;
    let levels = parse_list(&a.alpha_levels, arm.num_actions() - 1)?;
    let report;
    let method = match method {
        IndexMethodName::Exact => {
            let grid = default_grid(arm, a.grid_points.unwrap_or(ix.grid_points))?;
            report = check_full_indexability(arm, &grid, None)?;
            if cli.verbose {
                eprintln!("indexability certified on {} grid points: {}", grid.len(), report.indexable);
            }
            IndexMethod::Exact {
                report: &report,
                tol_w: ix.tol_w,
            }
        }
        IndexMethodName::Mc => IndexMethod::MonteCarlo {
            cfg: RolloutConfig::new(
                ix.trajectories,
                ix.horizon,
                derive_seed(cfg.experiment.seed, &[0x1D, a.arm_index as u64]),
            )?,
            params: McIndexParams {
                step_scale: ix.step_scale,
                exponent: ix.exponent,
                tol: ix.tol,
                max_outer: ix.max_outer,
                ..McIndexParams::default()
            },
        },
        IndexMethodName::TwoTimescale => IndexMethod::TwoTimescale(TwoTimescaleParams {
            step_scale: ix.step_scale,
            exponent: ix.exponent,
            tol: ix.tol,
            ..TwoTimescaleParams::default()
        }),
    };
    let (_, records) = with_threads(cli.threads, || build_index_table(arm, Some(&states), Some(&levels), &method))?;
    let mut text = String::from("arm,state,level,index,method,iterations,converged\n");
    for r in &records {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            a.arm_index,
            r.state,
            r.level,
            format_sig(r.index, 9),
            method.name(),
            r.iterations,
            r.converged
        ));
    }
    emit(cli.out.as_deref(), &text)
}

fn rmab(cli: &Cli, a: &RmabArgs) -> Result<()> {
    let mut cfg = scenario(cli.config.as_deref(), cli.seed)?;
    let e = &mut cfg.experiment;
    if !a.policy.is_empty() {
        e.policies = a.policy.iter().map(|p| p.parse()).collect::<Result<_>>()?;
    }
    if let Some(v) = a.episodes {
        e.episodes = v;
    }
    if let Some(v) = a.horizon {
        e.horizon = v;
    }
    if let Some(v) = a.trajectories {
        e.rollout.trajectories = v;
    }
    if let Some(v) = a.rollout_horizon {
        e.rollout.horizon = v;
    }
    if let Some(v) = a.epsilon0 {
        e.rollout.epsilon0 = v;
    }
    if let Some(v) = a.decay {
        e.rollout.decay = v;
    }
    if let Some(v) = a.candidate_cap {
        e.rollout.candidate_cap = v;
    }
    rmab_run(cli, cfg, a.timing)
}

fn rmab_run(cli: &Cli, cfg: ScenarioConfig, timing: bool) -> Result<()> {
    let opts = RunOptions {
        threads: cli.threads,
        csv: cli.out.clone(),
        manifest: None,
        timing,
    };
    let report = run_experiment(&cfg, &opts)?;
    if cli.verbose {
        for row in &report.rows {
            eprintln!("{}: {} ms", row.policy.as_str(), row.wall_ms);
        }
        eprintln!("wrote {} and {}", report.csv_path.display(), report.manifest_path.display());
    }
    match report.rows.into_iter().find_map(|r| r.outcome.err().map(|e| (r.policy, e))) {
        Some((policy, e)) => {
            eprintln!("policy {} failed", policy.as_str());
            Err(e)
        }
        None => Ok(()),
    }
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let t = bounds_table(a.epsilon, a.delta, a.beta, a.tau, a.rmin, a.rmax)?;
    let rows = [
        ("api_worst_case", format_sig(t.api_worst_case, 9)),
        ("improved_greedy", format_sig(t.improved_greedy, 9)),
        ("rolling_horizon", format_sig(t.rolling_horizon, 9)),
        ("approx_plus_horizon", format_sig(t.approx_plus_horizon, 9)),
        ("min_horizon", t.min_horizon.to_string()),
        ("sample_bound", t.sample_bound.to_string()),
        ("sample_bound_tail", format_sig(t.sample_bound_tail, 9)),
        ("printed_sample_bound", format_sig(t.printed_sample_bound, 9)),
    ];
    let mut text = String::from("bound,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    emit(cli.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(&cli, a),
        Command::Rollout(a) => rollout(&cli, a),
        Command::Index(a) => index(&cli, a),
        Command::Rmab(a) => rmab(&cli, a),
        Command::Bounds(a) => bounds(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
