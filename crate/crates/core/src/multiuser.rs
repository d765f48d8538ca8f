//! Two-user uplink: sum-rate through channel stacking, weighted sum-rate
//! maximization by dual bisection around a projected-gradient inner solver,
//! and the rate region traced by sweeping the weight.
//!
//! With weight `alpha` on user 1 and `1 - alpha` on user 2, the user with the
//! lower weight is decoded first (treating the other as interference) and the
//! other is decoded last, interference free. Writing `w_f` / `w_l` for the
//! weights of the first / last decoded user, the objective is
//!
//! ```text
//! L = w_f * R_sum(A) + (w_l - w_f) * R_last(A) - lambda * (B(A) - R)
//! ```
//!
//! where `R_last` only involves the last user's own channels.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::covariance::{cond_cov_given_complement, NoiseInverseSet};
use crate::error::{DwzError, Result};
use crate::numerics::{hpd_inverse, project_psd, CMatrix, HermitianMatrix, ToleranceConfig};
use crate::rates::{achievable_rate, backhaul_usage, check_budget};
use crate::solver::{bracket_done, gauss_seidel, solve_multi_bs, MultiBsSolution, SolverOptions};

/// Which user is decoded first at BS 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodingOrder {
    /// User 2 decoded first, user 1 last (higher priority to user 1).
    User2First,
    /// User 1 decoded first, user 2 last.
    User1First,
}

impl DecodingOrder {
    /// `alpha > 1/2` favours user 1, which is then decoded last.
    pub fn for_weight(alpha: f64) -> Self {
        if alpha > 0.5 {
            DecodingOrder::User2First
        } else {
            DecodingOrder::User1First
        }
    }

    pub fn first(self) -> usize {
        match self {
            DecodingOrder::User2First => 1,
            DecodingOrder::User1First => 0,
        }
    }

    pub fn last(self) -> usize {
        1 - self.first()
    }
}

/// Sum-rate of all users (any number) via the stacked single-source problem.
pub fn sum_rate(
    channels: &ChannelSet,
    backhaul: f64,
    opts: &SolverOptions,
) -> Result<MultiBsSolution> {
    solve_multi_bs(&channels.stacked(), backhaul, opts)
}

fn check_two_users(channels: &ChannelSet) -> Result<()> {
    if channels.num_users() != 2 {
        return Err(DwzError::InvalidScenario(format!(
            "weighted sum-rate needs exactly two users, got {}",
            channels.num_users()
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(DwzError::InvalidScenario(format!(
            "weight must lie in [0, 1], got {alpha}"
        )))
    }
}

/// `(R_1, R_2)` achieved by design `a` with the given SIC order.
pub fn rate_pair(
    channels: &ChannelSet,
    a: &NoiseInverseSet,
    order: DecodingOrder,
) -> Result<(f64, f64)> {
    check_two_users(channels)?;
    let total = achievable_rate(&channels.stacked(), a)?;
    let last = achievable_rate(&channels.user_source(order.last())?, a)?;
    let first = (total - last).max(0.0);
    Ok(match order {
        DecodingOrder::User2First => (last, first),
        DecodingOrder::User1First => (first, last),
    })
}

fn weights(alpha: f64, order: DecodingOrder) -> (f64, f64) {
    match order {
        DecodingOrder::User2First => (1.0 - alpha, alpha),
        DecodingOrder::User1First => (alpha, 1.0 - alpha),
    }
}

/// Weighted sum-rate Lagrangian `alpha R_1 + (1 - alpha) R_2 - lambda (B - R)`.
pub fn wsr_lagrangian(
    channels: &ChannelSet,
    a: &NoiseInverseSet,
    alpha: f64,
    lambda: f64,
    backhaul: f64,
    order: DecodingOrder,
) -> Result<f64> {
    let (r1, r2) = rate_pair(channels, a, order)?;
    let b = backhaul_usage(&channels.stacked(), a)?;
    Ok(alpha * r1 + (1.0 - alpha) * r2 - lambda * (b - backhaul))
}

/// `M (I + A M)^{-1}` for Hermitian positive definite `M`, i.e. `(M^{-1} + A)^{-1}`.
fn resolvent(m: &HermitianMatrix, a: &HermitianMatrix) -> Result<CMatrix> {
    let inv = hpd_inverse(m.as_matrix())?;
    hpd_inverse(&(inv + a.as_matrix()))
}

/// Gradient of the weighted sum-rate Lagrangian with respect to block `n`.
///
/// Uses the convention `2 conj(∂L/∂A_n)` with rates in bits, so for a
/// Hermitian perturbation `E` the directional derivative is `<grad, E>_F / 2`.
pub fn wsr_gradient(
    channels: &ChannelSet,
    a: &NoiseInverseSet,
    alpha: f64,
    lambda: f64,
    n: usize,
    order: DecodingOrder,
) -> Result<HermitianMatrix> {
    check_two_users(channels)?;
    let stacked = channels.stacked();
    let noise = stacked.noise_power;
    let an = a.block(n);
    let dim = an.dim();
    let (w_first, w_last) = weights(alpha, order);

    let r_full = cond_cov_given_complement(&stacked, a, n)?;
    let r_last = cond_cov_given_complement(&channels.user_source(order.last())?, a, n)?;
    let g_full = resolvent(&r_full, an)?;
    let g_last = resolvent(&r_last, an)?;
    let g_noise = hpd_inverse(&(CMatrix::identity(dim, dim).scale(1.0 / noise) + an.as_matrix()))?;

    // d R_sum = g_full - g_noise, d R_last = g_last - g_noise, d B = g_full
    let d_sum = &g_full - &g_noise;
    let d_last = &g_last - &g_noise;
    let total = d_sum.scale(w_first) + d_last.scale(w_last - w_first) - g_full.scale(lambda);
    Ok(HermitianMatrix::symmetrized(total.scale(2.0 / LN_2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    Fixed {
        step: f64,
    },
    /// Backtracking along the projection arc. With `spectral` the first trial
    /// step of each iteration is the safeguarded Barzilai-Borwein step instead
    /// of `initial`.
    Armijo {
        initial: f64,
        shrink: f64,
        sufficient_increase: f64,
        spectral: bool,
    },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Armijo {
            initial: 1.0,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            spectral: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WsrConfig {
    pub alpha: f64,
    pub backhaul: f64,
    pub step: StepRule,
    /// Relaxation `γ` in `A + γ (Ā − A)`.
    pub relax: f64,
    pub tolerances: ToleranceConfig,
    pub lambda_max_init: f64,
    /// Forces a decoding order; `None` picks it from `alpha`.
    pub order: Option<DecodingOrder>,
    /// Also runs the inner solver from the best Gauss-Seidel design of
    /// related single-source problems, keeping the better result.
    pub warm_starts: bool,
}

impl Default for WsrConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            backhaul: 0.0,
            step: StepRule::default(),
            relax: 1.0,
            tolerances: ToleranceConfig::default(),
            lambda_max_init: 1.0,
            order: None,
            warm_starts: true,
        }
    }
}

impl WsrConfig {
    pub fn decoding_order(&self) -> DecodingOrder {
        self.order
            .unwrap_or_else(|| DecodingOrder::for_weight(self.alpha))
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_budget(self.backhaul)?;
        self.tolerances.validate()?;
        if !(self.relax > 0.0 && self.relax <= 1.0) {
            return Err(DwzError::InvalidScenario(format!(
                "relaxation must be in (0, 1], got {}",
                self.relax
            )));
        }
        if !(self.lambda_max_init > 0.0) {
            return Err(DwzError::InvalidScenario(
                "initial multiplier bound must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpOutcome {
    pub a: NoiseInverseSet,
    pub converged: bool,
    pub iterations: usize,
    /// Lagrangian at the start and after every accepted step.
    pub lagrangian_trace: Vec<f64>,
}

const MIN_STEP: f64 = 1e-30;
/// Accepted steps over which the average Lagrangian gain is measured; the
/// iteration has stalled once that average drops below
/// `convergence_tol · max(1, |L|)`.
const STALL_WINDOW: usize = 20;
const MAX_STEP: f64 = 1e30;

/// Projected-gradient maximization of the weighted sum-rate Lagrangian at a
/// fixed multiplier, from the all-zero design.
pub fn gp_maximize(channels: &ChannelSet, lambda: f64, cfg: &WsrConfig) -> Result<GpOutcome> {
    let init = NoiseInverseSet::zeros(&channels.stacked());
    gp_maximize_from(channels, init, lambda, cfg)
}

/// [`gp_maximize`] from an arbitrary PSD starting design.
///
/// Iterates in unit-noise coordinates (`σ² A`), where the stopping threshold
/// on the largest block change is dimensionless.
pub fn gp_maximize_from(
    channels: &ChannelSet,
    init: NoiseInverseSet,
    lambda: f64,
    cfg: &WsrConfig,
) -> Result<GpOutcome> {
    check_two_users(channels)?;
    cfg.validate()?;
    if !(lambda >= 0.0) {
        return Err(DwzError::InvalidScenario(format!(
            "multiplier must be non-negative, got {lambda}"
        )));
    }
    let noise = channels.noise_power;
    let unit = channels.normalized();
    init.validate(&channels.stacked(), cfg.tolerances.psd_floor)?;
    let (alpha, backhaul, order) = (cfg.alpha, cfg.backhaul, cfg.decoding_order());
    let tol = &cfg.tolerances;
    let n_coop = unit.num_coop();

    let objective = |a: &NoiseInverseSet| wsr_lagrangian(&unit, a, alpha, lambda, backhaul, order);
    let gradient = |a: &NoiseInverseSet| -> Result<Vec<HermitianMatrix>> {
        (1..=n_coop)
            .map(|n| wsr_gradient(&unit, a, alpha, lambda, n, order))
            .collect()
    };

    let mut a = init.scaled(noise);
    let mut value = objective(&a)?;
    let mut trace = vec![value];
    let mut grad = gradient(&a)?;
    let mut prev: Option<(NoiseInverseSet, Vec<HermitianMatrix>)> = None;
    let initial = match cfg.step {
        StepRule::Fixed { step } => step,
        StepRule::Armijo { initial, .. } => initial,
    };
    let mut last_step = initial;
    let spectral = matches!(cfg.step, StepRule::Armijo { spectral: true, .. });

    let done =
        |a: &NoiseInverseSet, converged: bool, iterations: usize, trace: Vec<f64>| GpOutcome {
            a: a.scaled(1.0 / noise),
            converged,
            iterations,
            lagrangian_trace: trace,
        };

    for iter in 1..=tol.max_iters {
        let step = match (&prev, spectral) {
            // without negative curvature along the last step, try a longer one
            (Some((pa, pg)), true) => {
                spectral_step(&a, &grad, pa, pg).unwrap_or((2.0 * last_step).min(MAX_STEP))
            }
            _ => initial,
        };
        // no step improves the objective: stationary to working precision
        let Some((cand, cand_value, change, step)) =
            line_search(&objective, &a, value, &grad, step, cfg)?
        else {
            return Ok(done(&a, true, iter, trace));
        };
        last_step = step;
        let gain = cand_value - value;
        let next_grad = gradient(&cand)?;
        prev = Some((
            std::mem::replace(&mut a, cand),
            std::mem::replace(&mut grad, next_grad),
        ));
        value = cand_value;
        trace.push(value);
        let stalled = trace.len() > STALL_WINDOW
            && value - trace[trace.len() - 1 - STALL_WINDOW]
                < STALL_WINDOW as f64 * tol.convergence_tol * value.abs().max(1.0);
        if (change < tol.convergence_tol && gain.abs() < 1e-12) || stalled {
            return Ok(done(&a, true, iter, trace));
        }
    }
    log::warn!(
        "gradient projection hit {} iterations at lambda = {lambda}, alpha = {alpha}, backhaul = {backhaul}",
        tol.max_iters
    );
    Ok(done(&a, false, tol.max_iters, trace))
}

/// One projected gradient step, backtracking under an Armijo rule.
/// Returns the candidate, its objective, the largest block change and the
/// accepted step, or `None` when no step makes progress.
fn line_search<F>(
    objective: &F,
    a: &NoiseInverseSet,
    value: f64,
    grad: &[HermitianMatrix],
    mut step: f64,
    cfg: &WsrConfig,
) -> Result<Option<(NoiseInverseSet, f64, f64, f64)>>
where
    F: Fn(&NoiseInverseSet) -> Result<f64>,
{
    loop {
        let mut cand = a.clone();
        let mut ascent = 0.0;
        let mut change = 0.0f64;
        for (n, g) in grad.iter().enumerate() {
            let cur = a.block(n + 1);
            let target = project_psd(&cur.add(&g.scaled(step)))?;
            let delta = target.sub(cur).scaled(cfg.relax);
            ascent += 0.5 * g.inner(&delta);
            change = change.max(delta.frobenius_norm());
            cand.set_block(n + 1, cur.add(&delta));
        }
        if change == 0.0 {
            return Ok(None);
        }
        let cand_value = objective(&cand)?;
        match cfg.step {
            StepRule::Fixed { .. } => return Ok(Some((cand, cand_value, change, step))),
            StepRule::Armijo {
                shrink,
                sufficient_increase,
                ..
            } => {
                if ascent > 0.0 && cand_value >= value + sufficient_increase * ascent {
                    return Ok(Some((
                        cand,
                        cand_value,
                        change,
                        step.clamp(MIN_STEP, MAX_STEP),
                    )));
                }
                step *= shrink;
                if step < MIN_STEP {
                    return Ok(None);
                }
            }
        }
    }
}

/// Barzilai-Borwein step `<ΔA, ΔA> / -<ΔA, ΔG>` for ascent, when it is positive.
fn spectral_step(
    a: &NoiseInverseSet,
    grad: &[HermitianMatrix],
    prev_a: &NoiseInverseSet,
    prev_grad: &[HermitianMatrix],
) -> Option<f64> {
    let mut ss = 0.0;
    let mut sy = 0.0;
    for (n, (g, pg)) in grad.iter().zip(prev_grad).enumerate() {
        let s = a.a[n].sub(&prev_a.a[n]);
        let y = g.sub(pg);
        ss += s.inner(&s);
        sy += s.inner(&y);
    }
    let step = ss / -sy;
    (sy < 0.0 && step.is_finite()).then(|| step.clamp(MIN_STEP, MAX_STEP))
}

/// Second design of a time-shared operating point, used for a fraction
/// `share` of the channel uses.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeShare {
    pub share: f64,
    pub a: NoiseInverseSet,
}

/// A boundary point of the rate region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
    /// Weight the design was solved for.
    pub alpha: f64,
    pub order: DecodingOrder,
    pub a_star: NoiseInverseSet,
    /// Present when the point time-shares `a_star` with a second design.
    pub time_sharing: Option<TimeShare>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WsrSolution {
    /// Maximum weighted sum-rate `alpha R_1 + (1 - alpha) R_2`.
    pub wsr: f64,
    pub point: RatePoint,
    pub lambda: f64,
    pub backhaul_used: f64,
    pub converged: bool,
    pub bisection_steps: usize,
}

/// Inner maximization at a fixed multiplier: projected gradient from zero
/// and, with `warm_starts`, from the best of a few Gauss-Seidel designs.
///
/// The weighted objective is not concave, and for multipliers near the point
/// where the zero design stops being a local maximum the zero start can get
/// stuck there while a large design is much better.
pub fn inner_maximize(channels: &ChannelSet, lambda: f64, cfg: &WsrConfig) -> Result<GpOutcome> {
    let from_zero = gp_maximize(channels, lambda, cfg)?;
    if !cfg.warm_starts {
        return Ok(from_zero);
    }
    let order = cfg.decoding_order();
    let (w_first, w_last) = weights(cfg.alpha, order);
    let stacked = channels.stacked();
    let last_source = channels.user_source(order.last())?;
    let mut proxies = vec![(&stacked, 2.0 * lambda)];
    if w_first > 0.0 {
        proxies.push((&stacked, lambda / w_first));
    }
    if w_last > 0.0 {
        proxies.push((&last_source, lambda / w_last));
    }
    let value =
        |a: &NoiseInverseSet| wsr_lagrangian(channels, a, cfg.alpha, lambda, cfg.backhaul, order);
    let mut best_start: Option<(f64, NoiseInverseSet)> = None;
    for (source, mult) in proxies {
        if mult >= 1.0 {
            continue;
        }
        let start = gauss_seidel(source, mult, cfg.backhaul, &cfg.tolerances)?.a;
        if start.is_all_zero() {
            continue;
        }
        let v = value(&start)?;
        if best_start.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best_start = Some((v, start));
        }
    }
    let Some((_, start)) = best_start else {
        return Ok(from_zero);
    };
    let warm = gp_maximize_from(channels, start, lambda, cfg)?;
    let last = |o: &GpOutcome| *o.lagrangian_trace.last().expect("trace is never empty");
    Ok(if last(&warm) > last(&from_zero) {
        warm
    } else {
        from_zero
    })
}

/// Largest multiplier bound tried before giving up on a bracket.
const LAMBDA_MAX_CAP: f64 = 1024.0;

/// Weighted sum-rate maximization under the backhaul constraint.
///
/// Bisects the multiplier on the sign of `h = R − B(A(λ))`. The result is the
/// design at the feasible end of the final bracket, time-shared with the
/// design at the other end when the backhaul usage jumps across `R` inside
/// the bracket and mixing the two spends the budget exactly.
pub fn solve_wsr(channels: &ChannelSet, cfg: &WsrConfig) -> Result<WsrSolution> {
    check_two_users(channels)?;
    cfg.validate()?;
    let stacked = channels.stacked();
    let order = cfg.decoding_order();
    let backhaul = cfg.backhaul;
    let tol = cfg.tolerances;
    let mut converged = true;
    let mut steps = 0;

    let mut feasible = NoiseInverseSet::zeros(&stacked);
    let mut infeasible: Option<NoiseInverseSet> = None;
    let (mut lo, mut hi) = (0.0f64, cfg.lambda_max_init);
    if backhaul > 0.0 && stacked.num_coop() > 0 {
        loop {
            let run = inner_maximize(channels, hi, cfg)?;
            converged &= run.converged;
            if backhaul - backhaul_usage(&stacked, &run.a)? >= 0.0 {
                feasible = run.a;
                break;
            }
            infeasible = Some(run.a);
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_MAX_CAP {
                return Err(DwzError::BracketError { lo, hi });
            }
        }
        let mut feasible_h = backhaul - backhaul_usage(&stacked, &feasible)?;
        while !bracket_done(lo, hi, feasible_h, tol.bisection_tol) && steps < 2000 {
            steps += 1;
            let lambda = 0.5 * (lo + hi);
            let run = inner_maximize(channels, lambda, cfg)?;
            converged &= run.converged;
            let h = backhaul - backhaul_usage(&stacked, &run.a)?;
            if h <= 0.0 {
                lo = lambda;
                infeasible = Some(run.a);
            } else {
                hi = lambda;
                feasible = run.a;
                feasible_h = h;
                if h <= 1e-10 {
                    break;
                }
            }
        }
    }

    let wsr_of = |(r1, r2): (f64, f64)| cfg.alpha * r1 + (1.0 - cfg.alpha) * r2;
    let (mut r1, mut r2) = rate_pair(channels, &feasible, order)?;
    let mut used = backhaul_usage(&stacked, &feasible)?;
    let mut time_sharing = None;
    if let Some(other) = infeasible {
        let b_other = backhaul_usage(&stacked, &other)?;
        if used < backhaul - 1e-9 && b_other > backhaul {
            let share = (backhaul - used) / (b_other - used);
            let (o1, o2) = rate_pair(channels, &other, order)?;
            let mixed = (
                share * o1 + (1.0 - share) * r1,
                share * o2 + (1.0 - share) * r2,
            );
            if wsr_of(mixed) > wsr_of((r1, r2)) {
                (r1, r2) = mixed;
                used = backhaul;
                time_sharing = Some(TimeShare { share, a: other });
            }
        }
    }
    Ok(WsrSolution {
        wsr: wsr_of((r1, r2)),
        backhaul_used: used,
        lambda: hi,
        converged,
        bisection_steps: steps,
        point: RatePoint {
            r1,
            r2,
            alpha: cfg.alpha,
            order,
            a_star: feasible,
            time_sharing,
        },
    })
}

/// Default weight grid: 21 evenly spaced values including both corners.
pub fn default_alphas() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateRegion {
    pub points: Vec<RatePoint>,
    /// Supporting half-planes `alpha R_1 + (1 - alpha) R_2 <= wsr`.
    pub hyperplanes: Vec<(f64, f64)>,
    /// Weights whose solve failed, with the error message.
    pub failures: Vec<(f64, String)>,
}

impl RateRegion {
    /// Whether `(r1, r2)` satisfies every supporting half-plane within `slack`.
    pub fn contains(&self, r1: f64, r2: f64, slack: f64) -> bool {
        r1 >= -slack
            && r2 >= -slack
            && self
                .hyperplanes
                .iter()
                .all(|&(alpha, wsr)| alpha * r1 + (1.0 - alpha) * r2 <= wsr + slack)
    }

    /// Largest violation of any half-plane by any of the swept points.
    pub fn max_hyperplane_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for p in &self.points {
            for &(alpha, wsr) in &self.hyperplanes {
                worst = worst.max(alpha * p.r1 + (1.0 - alpha) * p.r2 - wsr);
            }
        }
        worst
    }

    /// Boundary polygon from the R_2 axis to the R_1 axis: the swept points
    /// ordered by R_1, closed by the two single-user corner segments.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.r1, p.r2)).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
        let top = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        let right = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        let mut out = vec![(0.0, top)];
        out.extend(pts);
        out.push((right, 0.0));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,wsr,r1,r2\n");
        for (p, &(alpha, wsr)) in self.points.iter().zip(&self.hyperplanes) {
            out.push_str(&format!("{alpha},{wsr},{},{}\n", p.r1, p.r2));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("regions always serialize")
    }
}

/// One weighted sum-rate solve per weight. At `alpha = 1/2` both decoding
/// orders are solved and the larger weighted sum-rate is kept. A weight whose
/// own solve is beaten by the point of another weight takes that point.
pub fn region_sweep(
    channels: &ChannelSet,
    backhaul: f64,
    alphas: &[f64],
    cfg: &WsrConfig,
) -> Result<RateRegion> {
    check_two_users(channels)?;
    check_budget(backhaul)?;
    let mut region = RateRegion {
        points: Vec::new(),
        hyperplanes: Vec::new(),
        failures: Vec::new(),
    };
    for &alpha in alphas {
        let base = WsrConfig {
            alpha,
            backhaul,
            order: None,
            ..cfg.clone()
        };
        let result = if alpha == 0.5 {
            let orders = [DecodingOrder::User1First, DecodingOrder::User2First];
            let mut best: Option<WsrSolution> = None;
            let mut err = None;
            for order in orders {
                match solve_wsr(
                    channels,
                    &WsrConfig {
                        order: Some(order),
                        ..base.clone()
                    },
                ) {
                    Ok(sol) => {
                        if best.as_ref().is_none_or(|b| sol.wsr > b.wsr) {
                            best = Some(sol);
                        }
                    }
                    Err(e) => err = Some(e),
                }
            }
            best.ok_or_else(|| err.expect("at least one order was tried"))
        } else {
            solve_wsr(channels, &base)
        };
        match result {
            Ok(sol) => {
                region.hyperplanes.push((alpha, sol.wsr));
                region.points.push(sol.point);
            }
            Err(e) => {
                log::warn!("weighted sum-rate at alpha = {alpha} failed: {e}");
                region.failures.push((alpha, e.to_string()));
            }
        }
    }
    // every swept point is achievable and time-sharing makes the region
    // convex, so each weight keeps the best point found at any weight
    let solved = region.points.clone();
    for (k, (alpha, wsr)) in region.hyperplanes.iter_mut().enumerate() {
        let value = |p: &RatePoint| *alpha * p.r1 + (1.0 - *alpha) * p.r2;
        if let Some(best) = solved.iter().max_by(|x, y| value(x).total_cmp(&value(y))) {
            if value(best) > *wsr {
                *wsr = value(best);
                region.points[k] = best.clone();
            }
        }
    }
    Ok(region)
}
