//! Monte-Carlo experiment runners. Each trial draws its own scenario from a
//! seed derived from the master seed and the trial index, so results do not
//! depend on how trials are scheduled across threads.

use std::time::Instant;

use dwz_core::channel::{
    derive_seed, edge_user_positions, generate_channels, ChannelSet, NetworkGeometry, UserConfig,
};
use dwz_core::multiuser::{region_sweep, sum_rate, RateRegion, WsrConfig};
use dwz_core::rates::{
    outer_region_1, quantization_baseline, upper_bound_1, upper_bound_2, RATE_SLACK,
};
use dwz_core::solver::{solve_multi_bs, solve_two_bs, SolverOptions};
use dwz_core::DwzError;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, MAX_COOP};
use crate::output::{fmt_sig, ExperimentOutput, FailedTrial, Sidecar, Table, TrialRecord, VERSION};
use crate::CliError;

/// One trial's network: the full first tier plus the cooperative BS order
/// (nearest to the first user first), so cooperative sets are nested.
pub struct TrialScenario {
    pub seed: u64,
    pub channels: ChannelSet,
    pub coop_order: Vec<usize>,
}

impl TrialScenario {
    pub fn draw(
        cfg: &ExperimentConfig,
        trial_index: usize,
        num_users: usize,
    ) -> Result<Self, DwzError> {
        let seed = derive_seed(cfg.seed, trial_index as u64);
        let s = &cfg.scenario;
        let mut geometry = NetworkGeometry::hexagonal(s.cell_radius_m, s.bs_antennas);
        geometry.noise_power_dbm = s.noise_power_dbm;
        let positions = edge_user_positions(&geometry, num_users, derive_seed(seed, 0));
        let coop_order = geometry.coop_by_distance(positions[0]);
        let geometry = geometry.with_users(positions);
        let users = vec![UserConfig::isotropic(s.user_antennas, s.tx_power_dbm); num_users];
        let channels = generate_channels(&geometry, &cfg.profile, &users, derive_seed(seed, 1))?;
        Ok(Self {
            seed,
            channels,
            coop_order,
        })
    }

    /// Keeps BS 0 and the `n` nearest cooperative BSs.
    pub fn with_coop(&self, n: usize) -> Result<ChannelSet, DwzError> {
        self.channels.select_bs(&self.coop_order[..n.min(MAX_COOP)])
    }
}

/// Worker pool size: `DWZ_THREADS` when set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var("DWZ_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available)
}

struct TrialResult<T> {
    record: TrialRecord,
    payload: T,
}

/// Runs `trial` for every index on the worker pool; results come back in
/// index order with failures split out.
fn run_trials<T, F>(
    cfg: &ExperimentConfig,
    trial: F,
) -> Result<(Vec<TrialResult<T>>, Vec<FailedTrial>), CliError>
where
    T: Send,
    F: Fn(usize) -> Result<(TrialRecord, T), DwzError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        (0..cfg.num_trials)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let out = trial(i).map(|(mut record, payload)| {
                    record.wall_time_s = start.elapsed().as_secs_f64();
                    (record, payload)
                });
                (i, out)
            })
            .collect()
    });
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (i, res) in results {
        match res {
            Ok((record, payload)) => {
                log::debug!("trial {i} finished in {:.3} s", record.wall_time_s);
                ok.push(TrialResult { record, payload });
            }
            Err(e) => {
                log::warn!("trial {i} failed: {e}");
                failed.push(FailedTrial {
                    trial_index: i,
                    error: e.to_string(),
                });
            }
        }
    }
    if !failed.is_empty() {
        log::warn!(
            "{} of {} trials failed and were excluded",
            failed.len(),
            cfg.num_trials
        );
    }
    Ok((ok, failed))
}

/// Empirical quantile by nearest rank; `level` in percent.
pub fn quantile(sorted: &[f64], level: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (level / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn solver_options(cfg: &ExperimentConfig, seed: u64) -> SolverOptions {
    SolverOptions {
        tolerances: cfg.tolerances,
        starts: cfg.solver_starts,
        seed,
    }
}

fn record(trial_index: usize, seed: u64, rates: Vec<f64>, converged: Vec<bool>) -> TrialRecord {
    TrialRecord {
        trial_index,
        seed,
        rates,
        converged,
        wall_time_s: 0.0,
    }
}

fn sidecar(
    cfg: &ExperimentConfig,
    experiment: Experiment,
    columns: Vec<String>,
    records: Vec<TrialRecord>,
    failed: Vec<FailedTrial>,
    checks: serde_json::Value,
) -> Sidecar {
    let mut config = cfg.clone();
    config.experiment = experiment;
    Sidecar {
        version: VERSION,
        experiment: experiment.name(),
        config,
        columns,
        trials_completed: records.len(),
        failed_trials: failed,
        records,
        checks,
    }
}

fn backhaul_columns(cfg: &ExperimentConfig, prefix: &str) -> Vec<String> {
    cfg.backhaul_list
        .iter()
        .map(|r| format!("{prefix}R={}", fmt_sig(*r)))
        .collect()
}

/// Whether every quantile of `high` is at least the matching quantile of `low`.
fn dominates(high: &[f64], low: &[f64], levels: &[f64]) -> bool {
    levels
        .iter()
        .all(|&q| quantile(high, q) >= quantile(low, q) - RATE_SLACK)
}

/// Rate CDF of a single user with `num_coop` cooperative BSs, one curve per
/// backhaul budget. CSV: `backhaul,quantile,rate`.
pub fn run_cdf(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let (trials, failed) = run_trials(cfg, |i| {
        let scenario = TrialScenario::draw(cfg, i, 1)?;
        let source = scenario.with_coop(cfg.scenario.num_coop)?.stacked();
        let mut rates = Vec::new();
        let mut converged = Vec::new();
        for &r in &cfg.backhaul_list {
            let sol = solve_multi_bs(&source, r, &solver_options(cfg, scenario.seed))?;
            rates.push(sol.rate);
            converged.push(sol.converged);
        }
        Ok((record(i, scenario.seed, rates, converged), ()))
    })?;

    let per_budget: Vec<Vec<f64>> = (0..cfg.backhaul_list.len())
        .map(|k| sorted(trials.iter().map(|t| t.record.rates[k]).collect()))
        .collect();
    let mut table = Table::new(&["backhaul", "quantile", "rate"]);
    for (k, &r) in cfg.backhaul_list.iter().enumerate() {
        for &q in &cfg.quantiles {
            table.push(vec![
                fmt_sig(r),
                fmt_sig(q),
                fmt_sig(quantile(&per_budget[k], q)),
            ]);
        }
    }
    let dominance: Vec<bool> = per_budget
        .windows(2)
        .zip(cfg.backhaul_list.windows(2))
        .map(|(w, r)| {
            if r[1] >= r[0] {
                dominates(&w[1], &w[0], &cfg.quantiles)
            } else {
                dominates(&w[0], &w[1], &cfg.quantiles)
            }
        })
        .collect();
    let checks = json!({
        "mean_rate": per_budget.iter().map(|v| mean(v)).collect::<Vec<_>>(),
        "consecutive_budgets_dominate": dominance,
    });
    let records = trials.into_iter().map(|t| t.record).collect();
    Ok(ExperimentOutput {
        table,
        sidecar: sidecar(
            cfg,
            Experiment::Cdf,
            backhaul_columns(cfg, ""),
            records,
            failed,
            checks,
        ),
    })
}

/// Rate quantiles against the number of cooperative BSs. CSV:
/// `num_coop,backhaul,quantile,rate`.
pub fn run_vs_bs(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let counts = &cfg.coop_counts;
    let budgets = &cfg.backhaul_list;
    let (trials, failed) = run_trials(cfg, |i| {
        let scenario = TrialScenario::draw(cfg, i, 1)?;
        let mut rates = Vec::new();
        let mut converged = Vec::new();
        for &n in counts {
            let source = scenario.with_coop(n)?.stacked();
            for &r in budgets {
                let sol = solve_multi_bs(&source, r, &solver_options(cfg, scenario.seed))?;
                rates.push(sol.rate);
                converged.push(sol.converged);
            }
        }
        Ok((record(i, scenario.seed, rates, converged), ()))
    })?;

    let column = |c: usize, k: usize| -> Vec<f64> {
        sorted(
            trials
                .iter()
                .map(|t| t.record.rates[c * budgets.len() + k])
                .collect(),
        )
    };
    let mut table = Table::new(&["num_coop", "backhaul", "quantile", "rate"]);
    let mut medians = vec![vec![0.0; budgets.len()]; counts.len()];
    for (c, &n) in counts.iter().enumerate() {
        for (k, &r) in budgets.iter().enumerate() {
            let values = column(c, k);
            medians[c][k] = quantile(&values, 50.0);
            for &q in &cfg.quantiles {
                table.push(vec![
                    n.to_string(),
                    fmt_sig(r),
                    fmt_sig(q),
                    fmt_sig(quantile(&values, q)),
                ]);
            }
        }
    }
    let mut columns = Vec::new();
    for &n in counts {
        columns.extend(backhaul_columns(cfg, &format!("N={n},")));
    }
    let checks = json!({ "median_rate": medians });
    let records = trials.into_iter().map(|t| t.record).collect();
    Ok(ExperimentOutput {
        table,
        sidecar: sidecar(cfg, Experiment::VsBsCount, columns, records, failed, checks),
    })
}

/// Outage rates of the optimal two-BS compression and of per-BS uniform
/// quantization, both normalized by the outage rate with unlimited backhaul.
/// CSV: `backhaul,dwz_outage_rate,quant_outage_rate,ratio`.
pub fn run_compare_quantization(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let budgets = &cfg.backhaul_list;
    let (trials, failed) = run_trials(cfg, |i| {
        let scenario = TrialScenario::draw(cfg, i, 1)?;
        let source = scenario.with_coop(1)?.stacked();
        // layout: unlimited backhaul, then (dwz, quant) per budget
        let mut rates = vec![upper_bound_1(&source)?];
        for &r in budgets {
            rates.push(solve_two_bs(&source, r)?.rate);
            rates.push(quantization_baseline(&source, r)?);
        }
        let n = rates.len();
        Ok((record(i, scenario.seed, rates, vec![true; n]), ()))
    })?;

    let level = 100.0 * cfg.outage;
    let outage_of = |c: usize| {
        quantile(
            &sorted(trials.iter().map(|t| t.record.rates[c]).collect()),
            level,
        )
    };
    let unlimited = outage_of(0);
    let mut table = Table::new(&["backhaul", "dwz_outage_rate", "quant_outage_rate", "ratio"]);
    let mut ordered = true;
    for (k, &r) in budgets.iter().enumerate() {
        let dwz = outage_of(1 + 2 * k);
        let quant = outage_of(2 + 2 * k);
        ordered &= dwz >= quant - RATE_SLACK;
        table.push(vec![
            fmt_sig(r),
            fmt_sig(dwz / unlimited),
            fmt_sig(quant / unlimited),
            fmt_sig(dwz / quant),
        ]);
    }
    let per_trial_ordered = trials.iter().all(|t| {
        (0..budgets.len())
            .all(|k| t.record.rates[1 + 2 * k] >= t.record.rates[2 + 2 * k] - RATE_SLACK)
    });
    let mut columns = vec!["unlimited".to_string()];
    for &r in budgets {
        columns.push(format!("dwz,R={}", fmt_sig(r)));
        columns.push(format!("quant,R={}", fmt_sig(r)));
    }
    let checks = json!({
        "unlimited_outage_rate": unlimited,
        "dwz_at_least_quantization": ordered,
        "dwz_at_least_quantization_every_trial": per_trial_ordered,
    });
    let records = trials.into_iter().map(|t| t.record).collect();
    Ok(ExperimentOutput {
        table,
        sidecar: sidecar(
            cfg,
            Experiment::CompareQuantization,
            columns,
            records,
            failed,
            checks,
        ),
    })
}

/// Expected sum-rate for `1..=num_users` users with the outer bounds. CSV:
/// `num_users,backhaul,expected_sumrate,ub_outer1,ub_outer2`.
pub fn run_sumrate_vs_users(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let budgets = &cfg.backhaul_list;
    let max_users = cfg.num_users;
    let (trials, failed) = run_trials(cfg, |i| {
        let scenario = TrialScenario::draw(cfg, i, max_users)?;
        let all = scenario.with_coop(cfg.scenario.num_coop)?;
        // layout per user count: (sum, outer1, outer2) per budget
        let mut rates = Vec::new();
        let mut converged = Vec::new();
        for u in 1..=max_users {
            let channels = all.first_users(u)?;
            let stacked = channels.stacked();
            let outer1 = upper_bound_1(&stacked)?;
            for &r in budgets {
                let sol = sum_rate(&channels, r, &solver_options(cfg, scenario.seed))?;
                rates.extend([sol.rate, outer1, upper_bound_2(&stacked, r)?]);
                converged.push(sol.converged);
            }
        }
        Ok((record(i, scenario.seed, rates, converged), ()))
    })?;

    let at = |t: &TrialResult<()>, u: usize, k: usize, j: usize| {
        t.record.rates[((u - 1) * budgets.len() + k) * 3 + j]
    };
    let mut table = Table::new(&[
        "num_users",
        "backhaul",
        "expected_sumrate",
        "ub_outer1",
        "ub_outer2",
    ]);
    let mut within_bounds = true;
    for u in 1..=max_users {
        for (k, &r) in budgets.iter().enumerate() {
            let avg = |j: usize| mean(&trials.iter().map(|t| at(t, u, k, j)).collect::<Vec<_>>());
            within_bounds &= trials
                .iter()
                .all(|t| at(t, u, k, 0) <= at(t, u, k, 1).min(at(t, u, k, 2)) + RATE_SLACK);
            table.push(vec![
                u.to_string(),
                fmt_sig(r),
                fmt_sig(avg(0)),
                fmt_sig(avg(1)),
                fmt_sig(avg(2)),
            ]);
        }
    }
    let mut columns = Vec::new();
    for u in 1..=max_users {
        for &r in budgets {
            let tag = format!("U={u},R={}", fmt_sig(r));
            columns.extend([
                format!("sum,{tag}"),
                format!("outer1,{tag}"),
                format!("outer2,{tag}"),
            ]);
        }
    }
    let checks = json!({ "sum_rate_within_outer_bounds": within_bounds });
    let records = trials.into_iter().map(|t| t.record).collect();
    Ok(ExperimentOutput {
        table,
        sidecar: sidecar(
            cfg,
            Experiment::SumrateVsUsers,
            columns,
            records,
            failed,
            checks,
        ),
    })
}

/// Whether every point of `inner` satisfies the half-planes of `outer`.
pub fn nested(inner: &RateRegion, outer: &RateRegion, slack: f64) -> bool {
    inner
        .points
        .iter()
        .all(|p| outer.contains(p.r1, p.r2, slack))
}

/// Two-user rate regions per backhaul budget. CSV:
/// `trial,backhaul,alpha,wsr,r1,r2`.
pub fn run_region(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let budgets = &cfg.backhaul_list;
    let wsr_cfg = WsrConfig {
        tolerances: cfg.tolerances,
        ..WsrConfig::default()
    };
    let (trials, failed) = run_trials(cfg, |i| {
        let scenario = TrialScenario::draw(cfg, i, 2)?;
        let channels = scenario.with_coop(cfg.scenario.num_coop)?;
        let outer = outer_region_1(&channels)?;
        let mut regions = Vec::new();
        for &r in budgets {
            let region = region_sweep(&channels, r, &cfg.alphas, &wsr_cfg)?;
            if let Some((alpha, err)) = region.failures.first() {
                return Err(DwzError::NumericalFailure(format!("weight {alpha}: {err}")));
            }
            regions.push(region);
        }
        let mut rates = Vec::new();
        for region in &regions {
            for p in &region.points {
                rates.extend([p.r1, p.r2]);
            }
        }
        let n = rates.len() / 2;
        Ok((
            record(i, scenario.seed, rates, vec![true; n]),
            (regions, outer),
        ))
    })?;

    let mut table = Table::new(&["trial", "backhaul", "alpha", "wsr", "r1", "r2"]);
    let mut nesting = true;
    let mut inside_outer = true;
    for t in &trials {
        let (regions, outer) = &t.payload;
        for (region, &r) in regions.iter().zip(budgets) {
            for (p, &(alpha, wsr)) in region.points.iter().zip(&region.hyperplanes) {
                inside_outer &= p.r1 <= outer.r1_max + RATE_SLACK
                    && p.r2 <= outer.r2_max + RATE_SLACK
                    && p.r1 + p.r2 <= outer.sum_max + RATE_SLACK;
                table.push(vec![
                    t.record.trial_index.to_string(),
                    fmt_sig(r),
                    fmt_sig(alpha),
                    fmt_sig(wsr),
                    fmt_sig(p.r1),
                    fmt_sig(p.r2),
                ]);
            }
        }
        for (a, ra) in regions.iter().zip(budgets) {
            for (b, rb) in regions.iter().zip(budgets) {
                if ra <= rb {
                    nesting &= nested(a, b, 1e-6);
                }
            }
        }
    }
    let mut columns = Vec::new();
    for &r in budgets {
        for &alpha in &cfg.alphas {
            columns.push(format!("r1,R={},alpha={}", fmt_sig(r), fmt_sig(alpha)));
            columns.push(format!("r2,R={},alpha={}", fmt_sig(r), fmt_sig(alpha)));
        }
    }
    let checks = json!({
        "regions_nested_in_backhaul": nesting,
        "points_inside_outer_region": inside_outer,
    });
    let records = trials.into_iter().map(|t| t.record).collect();
    Ok(ExperimentOutput {
        table,
        sidecar: sidecar(cfg, Experiment::Region, columns, records, failed, checks),
    })
}

/// Dispatches on `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    match cfg.experiment {
        Experiment::Cdf => run_cdf(cfg),
        Experiment::VsBsCount => run_vs_bs(cfg),
        Experiment::CompareQuantization => run_compare_quantization(cfg),
        Experiment::SumrateVsUsers => run_sumrate_vs_users(cfg),
        Experiment::Region => run_region(cfg),
    }
}
