//! `pdm`: evaluate and optimize RUL-driven maintenance policies from the
//! command line.
//!
//! Workflows: `simulate` a synthetic fleet, `evaluate` a policy against the
//! perfect-prognostics baseline, `optimize` heuristic thresholds on a
//! training split, and `sweep` the metric across cost ratios. Progress goes
//! to stderr; data goes to the output files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use pdm_core::evaluation::{
    bootstrap_metric_ci, evaluate_ordering_policy, evaluate_replacement_policy,
};
use pdm_core::io::{self, Report, SweepRow};
use pdm_core::optimize::{
    optimize_ordering_thresholds, optimize_policy1_threshold, ThresholdGrid,
};
use pdm_core::policies::{
    rbar_estimate, OrderingPolicyParams, PerfectMode, Policy1Params, PopulationTtf, RbarOption,
    ReplacementPolicy,
};
use pdm_core::simulator::sample_fleet;
use pdm_core::{CostModel, PdmError, PredictionTrace, TimeGrid, UnitTruth};

#[derive(Parser)]
#[command(
    name = "pdm",
    version,
    about = "Evaluate and optimize predictive-maintenance policies driven by RUL predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic fleet of failure times and prediction traces.
    Simulate(SimulateArgs),
    /// Evaluate one policy on a fleet and write a metric report.
    Evaluate(EvaluateArgs),
    /// Tune heuristic thresholds by minimizing the metric on a training split.
    Optimize(OptimizeArgs),
    /// Evaluate policies across a list of cost ratios and write a CSV table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulator configuration (JSON).
    #[arg(long)]
    config: String,
    /// Output path for the prediction traces (newline-delimited JSON).
    #[arg(long)]
    out_traces: String,
    /// Output path for the failure-time table (CSV).
    #[arg(long)]
    out_truths: String,
}

#[derive(Args)]
struct FleetArgs {
    /// Prediction trace file (newline-delimited JSON).
    #[arg(long)]
    traces: String,
    /// Failure-time table (CSV with header unit_id,failure_time).
    #[arg(long)]
    truths: String,
    /// Decision interval.
    #[arg(long)]
    delta_t: f64,
    /// Number of decision steps; inferred from the truths when omitted.
    #[arg(long)]
    max_steps: Option<u32>,
}

#[derive(Args)]
struct CostArgs {
    /// Preventive replacement cost.
    #[arg(long)]
    c_p: f64,
    /// Corrective replacement cost.
    #[arg(long)]
    c_c: Option<f64>,
    /// Unavailability cost per unit time (ordering setting).
    #[arg(long, default_value_t = 0.0)]
    c_unav: f64,
    /// Inventory holding cost per unit time (ordering setting).
    #[arg(long, default_value_t = 0.0)]
    c_inv: f64,
    /// Order-to-delivery lead time (ordering setting).
    #[arg(long, default_value_t = 0.0)]
    lead_time: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Setting {
    Replacement,
    Ordering,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyChoice {
    /// Heuristic threshold on the next-step failure probability.
    Policy1,
    /// Renewal objective on the full RUL distribution.
    Policy2,
    /// Opportunity-loss objective on the full RUL distribution.
    Policy3,
    /// Two-threshold heuristic ordering-replacement policy.
    Ordering,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RbarChoice {
    /// Optimal age-replacement rate of the population (upper bound).
    Upper,
    /// Perfect-monitoring rate c_p / mu (lower bound).
    Lower,
    /// Average of the two bounds.
    Average,
}

impl RbarChoice {
    fn to_option(self) -> RbarOption {
        match self {
            RbarChoice::Upper => RbarOption::UpperBoundRenewal,
            RbarChoice::Lower => RbarOption::LowerBoundPerfect,
            RbarChoice::Average => RbarOption::AverageOfBounds,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Decision setting to evaluate.
    #[arg(long, value_enum)]
    setting: Setting,
    /// Policy to evaluate.
    #[arg(long, value_enum)]
    policy: PolicyChoice,
    /// Threshold for policy1; defaults to c_p/c_c.
    #[arg(long)]
    p_thres: Option<f64>,
    /// Population cost-rate bound for policy3 (default: upper).
    #[arg(long, value_enum)]
    rbar_option: Option<RbarChoice>,
    /// Ordering threshold; defaults to c_p/c_c.
    #[arg(long)]
    p_order: Option<f64>,
    /// Replacement threshold in the ordering setting; defaults to c_p/c_c.
    #[arg(long)]
    p_rep: Option<f64>,
    /// Let the perfect baseline run a unit to failure when that is cheaper.
    #[arg(long)]
    perfect_footnote: bool,
    /// Also compute a percentile-bootstrap 95% CI with this many resamples.
    #[arg(long)]
    bootstrap_ci: Option<usize>,
    /// Seed for the bootstrap resampler.
    #[arg(long, default_value_t = 0)]
    bootstrap_seed: u64,
    /// Output report (JSON).
    #[arg(long)]
    out: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizeFamily {
    Policy1,
    Ordering,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Which heuristic family to tune.
    #[arg(long, value_enum)]
    family: OptimizeFamily,
    /// Fraction of units (by id hash) used for training; 1.0 trains and
    /// evaluates on the full fleet.
    #[arg(long, default_value_t = 1.0)]
    split: f64,
    /// Threshold grid for policy1: "lo:hi:step" or a comma list.
    #[arg(long)]
    thresholds: Option<String>,
    /// Ordering-threshold grid (ordering family): "lo:hi:step" or comma list.
    #[arg(long)]
    order_thresholds: Option<String>,
    /// Replacement-threshold grid (ordering family): "lo:hi:step" or comma list.
    #[arg(long)]
    rep_thresholds: Option<String>,
    /// Output report (JSON).
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Decision setting to sweep.
    #[arg(long, value_enum, default_value = "replacement")]
    setting: Setting,
    /// Comma list of policies: policy1, policy1-opt, policy2, policy3
    /// (replacement) or ordering, ordering-opt (ordering).
    #[arg(long)]
    policies: String,
    /// Sweep over c_p/c_c ratios directly.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Sweep over corrective-replacement costs, holding c_p fixed.
    #[arg(long, value_delimiter = ',')]
    cc_values: Option<Vec<f64>>,
    /// Population cost-rate bound for policy3 (default: upper).
    #[arg(long, value_enum)]
    rbar_option: Option<RbarChoice>,
    /// Threshold grid for the -opt variants.
    #[arg(long)]
    thresholds: Option<String>,
    /// Training fraction for the -opt variants.
    #[arg(long, default_value_t = 1.0)]
    split: f64,
    /// Output table (CSV).
    #[arg(long)]
    out: String,
}

fn config_err(msg: impl Into<String>) -> PdmError {
    PdmError::Config(msg.into())
}

fn exit_code(err: &PdmError) -> i32 {
    match err {
        PdmError::Config(_) => 3,
        PdmError::Numerical(_) => 4,
        _ => 2,
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            if ok {
                0
            } else {
                // Flag misuse is a configuration error.
                3
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), PdmError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), PdmError> {
    let config = io::read_simulator_config(&args.config)?;
    let (truths, traces) = sample_fleet(&config)?;
    io::write_traces(&traces, &args.out_traces)?;
    io::write_truths(&truths, &args.out_truths)?;
    let n = truths.len() as f64;
    let mean = truths.iter().map(|t| t.failure_time).sum::<f64>() / n;
    let std = if truths.len() > 1 {
        (truths.iter().map(|t| (t.failure_time - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    eprintln!(
        "simulated {} units: mean failure time {mean:.3}, std {std:.3}",
        truths.len()
    );
    Ok(())
}

/// Loads the fleet and builds the decision grid, inferring the horizon from
/// the truths when not given.
fn load_fleet(args: &FleetArgs) -> Result<(Vec<PredictionTrace>, Vec<UnitTruth>, TimeGrid), PdmError> {
    let traces = io::read_traces(&args.traces)?;
    let truths = io::read_truths(&args.truths)?;
    let max_steps = match args.max_steps {
        Some(n) => n,
        None => {
            let max_tf = truths.iter().map(|t| t.failure_time).fold(0.0f64, f64::max);
            ((max_tf / args.delta_t).ceil() as u32).max(1)
        }
    };
    let grid = TimeGrid::new(args.delta_t, max_steps)?;
    Ok((traces, truths, grid))
}

fn build_costs(args: &CostArgs, c_c: Option<f64>) -> Result<CostModel, PdmError> {
    let c_c = c_c
        .or(args.c_c)
        .ok_or_else(|| config_err("--c-c is required here"))?;
    CostModel::new(args.c_p, c_c, args.c_unav, args.c_inv, args.lead_time)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), PdmError> {
    let (traces, truths, grid) = load_fleet(&args.fleet)?;
    let costs = build_costs(&args.costs, None)?;
    let cpc = costs.cost_ratio();

    let report = match args.setting {
        Setting::Replacement => {
            if args.p_order.is_some() || args.p_rep.is_some() {
                return Err(config_err(
                    "--p-order/--p-rep only apply to --setting ordering",
                ));
            }
            let (policy, label) = match args.policy {
                PolicyChoice::Policy1 => {
                    if args.rbar_option.is_some() {
                        return Err(config_err("--rbar-option only applies to policy3"));
                    }
                    let p = args.p_thres.unwrap_or(cpc);
                    (
                        ReplacementPolicy::Heuristic(Policy1Params::new(p)?),
                        format!("policy1(p_thres={p})"),
                    )
                }
                PolicyChoice::Policy2 => {
                    if args.p_thres.is_some() || args.rbar_option.is_some() {
                        return Err(config_err("policy2 takes neither --p-thres nor --rbar-option"));
                    }
                    (ReplacementPolicy::Renewal, "policy2".to_string())
                }
                PolicyChoice::Policy3 => {
                    if args.p_thres.is_some() {
                        return Err(config_err("--p-thres only applies to policy1"));
                    }
                    let option = args.rbar_option.unwrap_or(RbarChoice::Upper).to_option();
                    let pop = PopulationTtf::fit(&truths)?;
                    let r_bar = rbar_estimate(&pop, &costs, option);
                    (
                        ReplacementPolicy::Opportunity { r_bar },
                        format!("policy3(r_bar={r_bar})"),
                    )
                }
                PolicyChoice::Ordering => {
                    return Err(config_err(
                        "the ordering policy requires --setting ordering",
                    ));
                }
            };
            let mode = if args.perfect_footnote {
                PerfectMode::AllowRunToFailure
            } else {
                PerfectMode::PreventiveOnly
            };
            let evaluation =
                evaluate_replacement_policy(&traces, &truths, &grid, &costs, &policy, mode)?;
            Report {
                setting: "replacement".into(),
                policy: label,
                costs,
                evaluation,
                bootstrap_ci95_m: None,
            }
        }
        Setting::Ordering => {
            if args.policy != PolicyChoice::Ordering {
                return Err(config_err("--setting ordering requires --policy ordering"));
            }
            if args.p_thres.is_some() || args.rbar_option.is_some() || args.perfect_footnote {
                return Err(config_err(
                    "--p-thres/--rbar-option/--perfect-footnote do not apply to the ordering setting",
                ));
            }
            let p_order = args.p_order.unwrap_or(cpc);
            let p_rep = args.p_rep.unwrap_or(cpc);
            let params = OrderingPolicyParams::new(p_order, p_rep)?;
            let evaluation = evaluate_ordering_policy(&traces, &truths, &grid, &costs, &params)?;
            if !evaluation.excluded_units.is_empty() {
                eprintln!(
                    "warning: excluded {} unit(s) with infeasible perfect ordering",
                    evaluation.excluded_units.len()
                );
            }
            Report {
                setting: "ordering".into(),
                policy: format!("ordering(p_order={p_order},p_rep={p_rep})"),
                costs,
                evaluation,
                bootstrap_ci95_m: None,
            }
        }
    };

    let report = match args.bootstrap_ci {
        Some(resamples) => {
            let ci = bootstrap_metric_ci(
                &report.evaluation.outcomes,
                &report.evaluation.perfect_outcomes,
                resamples,
                args.bootstrap_seed,
            )?;
            Report { bootstrap_ci95_m: Some(ci), ..report }
        }
        None => report,
    };

    io::write_report(&report, &args.out)?;
    eprintln!(
        "{} | {} | M = {:.6} (95% CI [{:.6}, {:.6}]), R = {:.6}, R_perfect = {:.6}, n = {}",
        report.setting,
        report.policy,
        report.evaluation.m_hat,
        report.evaluation.ci95_m.0,
        report.evaluation.ci95_m.1,
        report.evaluation.r_hat,
        report.evaluation.r_perfect,
        report.evaluation.n_units
    );
    Ok(())
}

/// Parses "lo:hi:step" or a comma list into a threshold grid.
fn parse_thresholds(spec: &str) -> Result<ThresholdGrid, PdmError> {
    let parse =
        |s: &str| -> Result<f64, PdmError> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| config_err(format!("bad threshold {s:?}: {e}")))
        };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(config_err(format!(
                "threshold range must be lo:hi:step, got {spec:?}"
            )));
        }
        let (lo, hi, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0 && hi >= lo) {
            return Err(config_err(format!("bad threshold range {spec:?}")));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let v = lo + step * f64::from(k);
            if v > hi + 1e-12 * step {
                break;
            }
            values.push(v);
            k += 1;
        }
        ThresholdGrid::new(values)
    } else {
        let values = spec.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
        ThresholdGrid::new(values)
    }
}

/// Deterministic unit split: ranks ids by SHA-256 and takes the first
/// `round(split * n)` as the training set.
fn split_units(truths: &[UnitTruth], split: f64) -> Result<(Vec<String>, Vec<String>), PdmError> {
    if !(split > 0.0 && split <= 1.0) {
        return Err(config_err(format!("--split must lie in (0, 1], got {split}")));
    }
    if (split - 1.0).abs() < 1e-12 {
        let all: Vec<String> = truths.iter().map(|t| t.unit_id.clone()).collect();
        return Ok((all.clone(), all));
    }
    let mut ranked: Vec<(Vec<u8>, String)> = truths
        .iter()
        .map(|t| {
            let digest = Sha256::digest(t.unit_id.as_bytes());
            (digest.to_vec(), t.unit_id.clone())
        })
        .collect();
    ranked.sort();
    let n_train = ((truths.len() as f64) * split).round() as usize;
    let n_train = n_train.clamp(1, truths.len().saturating_sub(1));
    let train = ranked[..n_train].iter().map(|(_, id)| id.clone()).collect();
    let eval = ranked[n_train..].iter().map(|(_, id)| id.clone()).collect();
    Ok((train, eval))
}

fn subset<'a>(
    traces: &'a [PredictionTrace],
    truths: &'a [UnitTruth],
    ids: &[String],
) -> (Vec<PredictionTrace>, Vec<UnitTruth>) {
    let wanted: std::collections::HashSet<&str> = ids.iter().map(String::as_str).collect();
    (
        traces.iter().filter(|t| wanted.contains(t.unit_id())).cloned().collect(),
        truths.iter().filter(|t| wanted.contains(t.unit_id.as_str())).cloned().collect(),
    )
}

#[derive(Serialize)]
struct OptimizeReport {
    family: String,
    split: f64,
    n_train_units: usize,
    n_eval_units: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_thres_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_order_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_rep_star: Option<f64>,
    m_hat_train: f64,
    evaluation: Report,
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), PdmError> {
    let (traces, truths, grid) = load_fleet(&args.fleet)?;
    let costs = build_costs(&args.costs, None)?;
    let (train_ids, eval_ids) = split_units(&truths, args.split)?;
    let (train_traces, train_truths) = subset(&traces, &truths, &train_ids);
    let (eval_traces, eval_truths) = subset(&traces, &truths, &eval_ids);

    let report = match args.family {
        OptimizeFamily::Policy1 => {
            if args.order_thresholds.is_some() || args.rep_thresholds.is_some() {
                return Err(config_err(
                    "--order-thresholds/--rep-thresholds only apply to --family ordering",
                ));
            }
            let thresholds = match &args.thresholds {
                Some(spec) => parse_thresholds(spec)?,
                None => ThresholdGrid::percent(),
            };
            let (p_star, m_train) =
                optimize_policy1_threshold(&train_traces, &train_truths, &grid, &costs, &thresholds)?;
            let policy = ReplacementPolicy::Heuristic(Policy1Params::new(p_star)?);
            let evaluation = evaluate_replacement_policy(
                &eval_traces,
                &eval_truths,
                &grid,
                &costs,
                &policy,
                PerfectMode::PreventiveOnly,
            )?;
            eprintln!(
                "policy1: p* = {p_star} (train M = {m_train:.6}), eval M = {:.6} on {} unit(s)",
                evaluation.m_hat, evaluation.n_units
            );
            OptimizeReport {
                family: "policy1".into(),
                split: args.split,
                n_train_units: train_truths.len(),
                n_eval_units: eval_truths.len(),
                p_thres_star: Some(p_star),
                p_order_star: None,
                p_rep_star: None,
                m_hat_train: m_train,
                evaluation: Report {
                    setting: "replacement".into(),
                    policy: format!("policy1(p_thres={p_star})"),
                    costs,
                    evaluation,
                    bootstrap_ci95_m: None,
                },
            }
        }
        OptimizeFamily::Ordering => {
            if args.thresholds.is_some() {
                return Err(config_err(
                    "--thresholds applies to --family policy1; use --order-thresholds/--rep-thresholds",
                ));
            }
            let default_grid = || parse_thresholds("0.05:0.95:0.05");
            let order_grid = match &args.order_thresholds {
                Some(spec) => parse_thresholds(spec)?,
                None => default_grid()?,
            };
            let rep_grid = match &args.rep_thresholds {
                Some(spec) => parse_thresholds(spec)?,
                None => default_grid()?,
            };
            let (p_order, p_rep, m_train) = optimize_ordering_thresholds(
                &train_traces,
                &train_truths,
                &grid,
                &costs,
                &order_grid,
                &rep_grid,
            )?;
            let params = OrderingPolicyParams::new(p_order, p_rep)?;
            let evaluation =
                evaluate_ordering_policy(&eval_traces, &eval_truths, &grid, &costs, &params)?;
            eprintln!(
                "ordering: p_order* = {p_order}, p_rep* = {p_rep} (train M = {m_train:.6}), eval M = {:.6} on {} unit(s)",
                evaluation.m_hat, evaluation.n_units
            );
            OptimizeReport {
                family: "ordering".into(),
                split: args.split,
                n_train_units: train_truths.len(),
                n_eval_units: eval_truths.len(),
                p_thres_star: None,
                p_order_star: Some(p_order),
                p_rep_star: Some(p_rep),
                m_hat_train: m_train,
                evaluation: Report {
                    setting: "ordering".into(),
                    policy: format!("ordering(p_order={p_order},p_rep={p_rep})"),
                    costs,
                    evaluation,
                    bootstrap_ci95_m: None,
                },
            }
        }
    };

    io::write_json(&report, &args.out)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), PdmError> {
    let (traces, truths, grid) = load_fleet(&args.fleet)?;
    let policies: Vec<String> = args
        .policies
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if policies.is_empty() {
        return Err(config_err("--policies must name at least one policy"));
    }
    for p in &policies {
        let valid = match args.setting {
            Setting::Replacement => {
                matches!(p.as_str(), "policy1" | "policy1-opt" | "policy2" | "policy3")
            }
            Setting::Ordering => matches!(p.as_str(), "ordering" | "ordering-opt"),
        };
        if !valid {
            return Err(config_err(format!(
                "policy {p:?} is not valid for this setting"
            )));
        }
    }

    let cost_list: Vec<f64> = match (&args.ratios, &args.cc_values) {
        (Some(ratios), None) => {
            if ratios.is_empty() {
                return Err(config_err("--ratios must not be empty"));
            }
            ratios.iter().map(|&r| args.costs.c_p / r).collect()
        }
        (None, Some(ccs)) => {
            if ccs.is_empty() {
                return Err(config_err("--cc-values must not be empty"));
            }
            ccs.clone()
        }
        _ => {
            return Err(config_err(
                "exactly one of --ratios and --cc-values is required",
            ))
        }
    };
    if args.costs.c_c.is_some() {
        return Err(config_err("--c-c conflicts with --ratios/--cc-values in a sweep"));
    }

    // Deduplicate while preserving order.
    let mut seen = std::collections::HashSet::new();
    let mut cc_values = Vec::with_capacity(cost_list.len());
    for cc in cost_list {
        if seen.insert(cc.to_bits()) {
            cc_values.push(cc);
        } else {
            eprintln!("warning: duplicate cost point c_c = {cc} ignored");
        }
    }

    let thresholds = match &args.thresholds {
        Some(spec) => parse_thresholds(spec)?,
        None => ThresholdGrid::percent(),
    };
    let (train_ids, _) = split_units(&truths, args.split)?;
    let (train_traces, train_truths) = subset(&traces, &truths, &train_ids);

    let mut rows: Vec<SweepRow> = Vec::new();
    for &c_c in &cc_values {
        let costs = build_costs(&args.costs, Some(c_c))?;
        let ratio = costs.cost_ratio();
        for policy in &policies {
            let evaluation = match policy.as_str() {
                "policy1" => evaluate_replacement_policy(
                    &traces,
                    &truths,
                    &grid,
                    &costs,
                    &ReplacementPolicy::Heuristic(Policy1Params::new(ratio)?),
                    PerfectMode::PreventiveOnly,
                )?,
                "policy1-opt" => {
                    let (p_star, _) = optimize_policy1_threshold(
                        &train_traces,
                        &train_truths,
                        &grid,
                        &costs,
                        &thresholds,
                    )?;
                    evaluate_replacement_policy(
                        &traces,
                        &truths,
                        &grid,
                        &costs,
                        &ReplacementPolicy::Heuristic(Policy1Params::new(p_star)?),
                        PerfectMode::PreventiveOnly,
                    )?
                }
                "policy2" => evaluate_replacement_policy(
                    &traces,
                    &truths,
                    &grid,
                    &costs,
                    &ReplacementPolicy::Renewal,
                    PerfectMode::PreventiveOnly,
                )?,
                "policy3" => {
                    let option = args.rbar_option.unwrap_or(RbarChoice::Upper).to_option();
                    let pop = PopulationTtf::fit(&truths)?;
                    let r_bar = rbar_estimate(&pop, &costs, option);
                    evaluate_replacement_policy(
                        &traces,
                        &truths,
                        &grid,
                        &costs,
                        &ReplacementPolicy::Opportunity { r_bar },
                        PerfectMode::PreventiveOnly,
                    )?
                }
                "ordering" => {
                    let params = OrderingPolicyParams::new(ratio, ratio)?;
                    evaluate_ordering_policy(&traces, &truths, &grid, &costs, &params)?
                }
                "ordering-opt" => {
                    let (p_order, p_rep, _) = optimize_ordering_thresholds(
                        &train_traces,
                        &train_truths,
                        &grid,
                        &costs,
                        &thresholds,
                        &thresholds,
                    )?;
                    let params = OrderingPolicyParams::new(p_order, p_rep)?;
                    evaluate_ordering_policy(&traces, &truths, &grid, &costs, &params)?
                }
                other => return Err(config_err(format!("unknown policy {other:?}"))),
            };
            rows.push(SweepRow {
                cost_ratio: ratio,
                policy: policy.clone(),
                m_hat: evaluation.m_hat,
                ci_lo: evaluation.ci95_m.0,
                ci_hi: evaluation.ci95_m.1,
            });
        }
    }

    io::write_sweep_csv(&rows, &args.out)?;
    eprintln!(
        "wrote {} sweep row(s) across {} cost point(s) to {}",
        rows.len(),
        cc_values.len(),
        args.out
    );
    Ok(())
}
