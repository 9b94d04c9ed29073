use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use super::config::{IndexMethodName, PolicyName, ScenarioConfig};
use crate::error::{Error, Result};
use crate::nonindex::{GreedyBasePolicy, RolloutController};
use crate::rmab::{evaluate_policy, JointPolicy, LookaheadPolicy, MyopicPolicy, OptimalJointPolicy, RmabModel};
use crate::rollout::RolloutConfig;
use crate::stream::derive_seed;
use crate::whittle::{
    build_index_table, check_full_indexability, default_grid, IndexMethod, IndexTable, McIndexParams,
    TwoTimescaleParams, WhittleIndexPolicy,
};

/// First line of every result CSV.
pub const CSV_SCHEMA: &str = "rmab-rollout csv v1";
pub const CSV_COLUMNS: &str = "scenario,policy,episodes,horizon,seed,mean,std_err,failed";

/// Formats `v` with `digits` significant digits: positional notation for
/// decimal exponents in `-5..digits`, scientific otherwise.
pub fn format_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

#[derive(Debug)]
pub struct PolicyRow {
    pub policy: PolicyName,
    pub outcome: Result<crate::rmab::PolicyEvaluation>,
    pub wall_ms: u128,
}

/// Builds a policy for `m` as configured in `cfg`.
pub fn build_policy(cfg: &ScenarioConfig, m: &RmabModel, name: PolicyName) -> Result<Box<dyn JointPolicy>> {
    let e = &cfg.experiment;
    let base = || -> Result<GreedyBasePolicy> {
        if e.rollout.epsilon0 > 0.0 {
            GreedyBasePolicy::epsilon_greedy(m, e.rollout.epsilon0, e.rollout.decay)
        } else {
            Ok(GreedyBasePolicy::deterministic())
        }
    };
    Ok(match name {
        PolicyName::Myopic => Box::new(MyopicPolicy),
        PolicyName::Lookahead => Box::new(LookaheadPolicy),
        PolicyName::Optimal => Box::new(OptimalJointPolicy::solve(m, e.solver.tol, e.solver.max_iters)?),
        PolicyName::GreedyBase => Box::new(base()?),
        PolicyName::Rollout => Box::new(RolloutController::new(
            RolloutConfig::new(e.rollout.trajectories, e.rollout.horizon, 0)?,
            base()?,
            e.rollout.candidate_cap,
        )?),
        PolicyName::Whittle => Box::new(WhittleIndexPolicy::new(index_tables(cfg, m)?)),
    })
}

/// One index table per arm, by the configured method.
pub fn index_tables(cfg: &ScenarioConfig, m: &RmabModel) -> Result<Vec<IndexTable>> {
    let ix = &cfg.experiment.index;
    m.arms()
        .iter()
        .enumerate()
        .map(|(i, arm)| {
            let model = arm.model();
            let table = match ix.method {
                IndexMethodName::Exact => {
                    let grid = default_grid(model, ix.grid_points)?;
                    let report = check_full_indexability(model, &grid, None)?;
                    build_index_table(
                        model,
                        None,
                        None,
                        &IndexMethod::Exact {
                            report: &report,
                            tol_w: ix.tol_w,
                        },
                    )?
                    .0
                }
                IndexMethodName::Mc => {
                    let seed = derive_seed(cfg.experiment.seed, &[0x1D, i as u64]);
                    let method = IndexMethod::MonteCarlo {
                        cfg: RolloutConfig::new(ix.trajectories, ix.horizon, seed)?,
                        params: McIndexParams {
                            step_scale: ix.step_scale,
                            exponent: ix.exponent,
                            tol: ix.tol,
                            max_outer: ix.max_outer,
                            ..McIndexParams::default()
                        },
                    };
                    build_index_table(model, None, None, &method)?.0
                }
                IndexMethodName::TwoTimescale => {
                    let method = IndexMethod::TwoTimescale(TwoTimescaleParams {
                        step_scale: ix.step_scale,
                        exponent: ix.exponent,
                        tol: ix.tol,
                        ..TwoTimescaleParams::default()
                    });
                    build_index_table(model, None, None, &method)?.0
                }
            };
            Ok(table)
        })
        .collect()
}

/// Evaluates every configured policy; failures are kept per row.
pub fn evaluate_experiment(cfg: &ScenarioConfig) -> Result<Vec<PolicyRow>> {
    let m = cfg.validate()?.into_rmab()?;
    let x0 = cfg.initial_state(&m);
    let e = &cfg.experiment;
    Ok(e.policies
        .iter()
        .map(|&name| {
            let start = Instant::now();
            let outcome = build_policy(cfg, &m, name)
                .and_then(|p| evaluate_policy(&m, &p, &x0, e.episodes, e.horizon, e.seed));
            PolicyRow {
                policy: name,
                outcome,
                wall_ms: start.elapsed().as_millis(),
            }
        })
        .collect())
}

fn precision(cfg: &ScenarioConfig) -> usize {
    cfg.output.as_ref().map_or(9, |o| o.precision)
}

pub fn render_csv(cfg: &ScenarioConfig, rows: &[PolicyRow]) -> String {
    let digits = precision(cfg);
    let e = &cfg.experiment;
    let mut out = format!("# {CSV_SCHEMA}\n{CSV_COLUMNS}\n");
    for row in rows {
        let (mean, se, failed) = match &row.outcome {
            Ok(ev) => (format_sig(ev.mean, digits), format_sig(ev.std_err, digits), 0),
            Err(_) => (String::new(), String::new(), 1),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cfg.name,
            row.policy.as_str(),
            e.episodes,
            e.horizon,
            e.seed,
            mean,
            se,
            failed
        ));
    }
    out
}

pub fn render_timing(cfg: &ScenarioConfig, rows: &[PolicyRow]) -> String {
    let mut out = String::from("scenario,policy,wall_ms\n");
    for row in rows {
        out.push_str(&format!("{},{},{}\n", cfg.name, row.policy.as_str(), row.wall_ms));
    }
    out
}

/// Run manifest: artifact, version, CSV schema and the effective
/// configuration without output paths.
pub fn render_manifest(cfg: &ScenarioConfig) -> Result<String> {
    let mut effective = cfg.clone();
    effective.output = None;
    let value = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "csv_schema": CSV_SCHEMA,
        "config": serde_json::to_value(&effective).map_err(|e| Error::ConfigParse(e.to_string()))?,
    });
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::ConfigParse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; the global pool when `None`.
    pub threads: Option<usize>,
    /// Overrides `output.csv`.
    pub csv: Option<PathBuf>,
    /// Overrides `output.manifest`; defaults to the CSV path with a `.manifest.json` suffix.
    pub manifest: Option<PathBuf>,
    /// Also write `<csv stem>.timing.csv` with wall-clock times.
    pub timing: bool,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub rows: Vec<PolicyRow>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub timing_path: Option<PathBuf>,
}

impl ExperimentReport {
    /// First policy failure, if any.
    pub fn first_failure(&self) -> Option<(&PolicyName, &Error)> {
        self.rows.iter().find_map(|r| r.outcome.as_ref().err().map(|e| (&r.policy, e)))
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Evaluates all policies and writes the CSV and manifest (and optional
/// timing sidecar). Policy failures are recorded in the `failed` column
/// and returned in the report; files are written either way.
pub fn run_experiment(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    let csv_path = opts
        .csv
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.csv.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name)));
    let manifest_path = opts
        .manifest
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.manifest.clone()).map(PathBuf::from))
        .unwrap_or_else(|| sibling(&csv_path, ".manifest.json"));

    let rows = match opts.threads {
        Some(n) => {
            if n == 0 {
                return Err(Error::param("threads", "must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(|| evaluate_experiment(cfg))?
        }
        None => evaluate_experiment(cfg)?,
    };

    write(&csv_path, &render_csv(cfg, &rows))?;
    write(&manifest_path, &render_manifest(cfg)?)?;
    let timing_path = if opts.timing {
        let p = sibling(&csv_path, ".timing.csv");
        write(&p, &render_timing(cfg, &rows))?;
        Some(p)
    } else {
        None
    };
    Ok(ExperimentReport {
        rows,
        csv_path,
        manifest_path,
        timing_path,
    })
}
