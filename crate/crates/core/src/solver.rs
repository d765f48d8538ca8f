//! Single-source compression design.
//!
//! * [`solve_two_bs`]: closed form for one cooperative BS, reverse
//!   water-filling on the eigenvalues of `R_{Y_1|Y_0}` with the multiplier
//!   tuned so the backhaul is exactly consumed.
//! * [`gauss_seidel`] / [`solve_multi_bs`]: dual decomposition for several
//!   cooperative BSs. For a fixed multiplier each block has a closed-form
//!   maximizer ([`block_update`]); an outer bisection drives the multiplier
//!   until the backhaul constraint is met.
//! * [`swz_allocation`]: per-BS rates of the successive Wyner-Ziv
//!   implementation of a given design.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SourceModel;
use crate::covariance::{
    cond_cov_bs_given_bs0, cond_cov_given_complement, cond_cov_given_subset, NoiseInverseSet,
};
use crate::error::{DwzError, Result};
use crate::numerics::{
    hermitian_eig, logdet_i_plus_psd, CMatrix, EigenDecomposition, HermitianMatrix, ToleranceConfig,
};
use crate::rates::{achievable_rate, backhaul_usage, check_budget};

/// Smallest multiplier tried by the closed-form bisection.
const LAMBDA_FLOOR: f64 = 1e-300;

/// Reverse water-filling levels for conditional eigenvalues `s` at multiplier `lambda`:
/// `η_j = [ (1/λ)(1/σ² − 1/s_j) − 1/σ² ]^+`.
///
/// Eigenvalues at or below the noise floor get `η_j = 0`. A non-positive
/// multiplier makes every useful stream noiseless (`η_j = ∞`).
pub fn water_levels(s: &[f64], noise_power: f64, lambda: f64) -> Vec<f64> {
    s.iter()
        .map(|&sj| {
            if sj <= noise_power {
                0.0
            } else if lambda <= 0.0 {
                f64::INFINITY
            } else {
                ((1.0 / lambda) * (1.0 / noise_power - 1.0 / sj) - 1.0 / noise_power).max(0.0)
            }
        })
        .collect()
}

fn stream_bits(s: &[f64], eta: &[f64]) -> Vec<f64> {
    s.iter()
        .zip(eta)
        .map(|(&sj, &ej)| (1.0 + ej * sj.max(0.0)).log2())
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaterfillingSolution {
    /// Eigen-decomposition of the conditional covariance being compressed.
    pub eig: EigenDecomposition,
    pub eta: Vec<f64>,
    pub lambda: f64,
    pub a_star: HermitianMatrix,
    pub stream_rates: Vec<f64>,
}

impl WaterfillingSolution {
    fn at(eig: EigenDecomposition, noise_power: f64, lambda: f64) -> Self {
        let eta = water_levels(&eig.eigenvalues, noise_power, lambda);
        let a_star = HermitianMatrix::from_eigen(&eig.basis, &eta);
        let stream_rates = stream_bits(&eig.eigenvalues, &eta);
        Self {
            eig,
            eta,
            lambda,
            a_star,
            stream_rates,
        }
    }

    /// Compression noise `Φ = U diag(1/η) U†` restricted to the active streams;
    /// `None` where a stream is not forwarded (infinite noise).
    pub fn compression_noise_variances(&self) -> Vec<Option<f64>> {
        self.eta
            .iter()
            .map(|&e| (e > 0.0).then(|| 1.0 / e))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoBsSolution {
    pub solution: WaterfillingSolution,
    pub rate: f64,
}

impl TwoBsSolution {
    pub fn noise_inverse(&self) -> NoiseInverseSet {
        NoiseInverseSet::new(vec![self.solution.a_star.clone()])
    }
}

/// Optimal compression at a single cooperative BS for backhaul `backhaul` bits.
pub fn solve_two_bs(source: &SourceModel, backhaul: f64) -> Result<TwoBsSolution> {
    check_budget(backhaul)?;
    if source.num_coop() != 1 {
        return Err(DwzError::InvalidScenario(format!(
            "closed form needs exactly one cooperative BS, got {}",
            source.num_coop()
        )));
    }
    let noise = source.noise_power;
    let eig = hermitian_eig(&cond_cov_bs_given_bs0(source, 1)?)?;
    let s = eig.eigenvalues.clone();
    let useful = s.iter().any(|&sj| sj > noise);
    let lambda = if backhaul == 0.0 || !useful {
        1.0
    } else {
        let excess = |lam: f64| -> f64 {
            stream_bits(&s, &water_levels(&s, noise, lam))
                .iter()
                .sum::<f64>()
                - backhaul
        };
        // bracket in log-space: excess(1) = -R < 0, excess decreases in lambda
        let mut lo = 0.5;
        while excess(lo) < 0.0 {
            lo *= 1e-3;
            if lo < LAMBDA_FLOOR {
                return Err(DwzError::BracketError { lo, hi: 1.0 });
            }
        }
        let (mut lo, mut hi) = (lo.ln(), 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = excess(mid.exp());
            if v.abs() <= 1e-12 {
                lo = mid;
                hi = mid;
                break;
            }
            if v > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let solution = WaterfillingSolution::at(eig, noise, lambda);
    let a = NoiseInverseSet::new(vec![solution.a_star.clone()]);
    let rate = achievable_rate(source, &a)?;
    Ok(TwoBsSolution { solution, rate })
}

/// Per-stream rates `r_j = log2(1 + η_j s_j)` of the conditional KLT coefficients.
pub fn cklt_stream_rates(solution: &WaterfillingSolution) -> Vec<f64> {
    stream_bits(&solution.eig.eigenvalues, &solution.eta)
}

/// Lagrangian `C(A) − λ (B(A) − R)` in bits.
pub fn lagrangian(
    source: &SourceModel,
    a: &NoiseInverseSet,
    lambda: f64,
    backhaul: f64,
) -> Result<f64> {
    Ok(achievable_rate(source, a)? - lambda * (backhaul_usage(source, a)? - backhaul))
}

/// Exact maximizer of the Lagrangian over block `n` with the other blocks fixed.
pub fn block_update(
    source: &SourceModel,
    a: &NoiseInverseSet,
    n: usize,
    lambda: f64,
) -> Result<HermitianMatrix> {
    let dim = source.bs_antennas(n);
    if lambda >= 1.0 {
        return Ok(HermitianMatrix::zeros(dim));
    }
    let eig = hermitian_eig(&cond_cov_given_complement(source, a, n)?)?;
    let eta = water_levels(&eig.eigenvalues, source.noise_power, lambda);
    if eta.iter().all(|&e| e == 0.0) {
        return Ok(HermitianMatrix::zeros(dim));
    }
    Ok(HermitianMatrix::from_eigen(&eig.basis, &eta))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussSeidelOutcome {
    pub a: NoiseInverseSet,
    pub converged: bool,
    pub sweeps: usize,
    /// Lagrangian after initialization and after every block update.
    pub lagrangian_trace: Vec<f64>,
}

/// Lagrangian changes below this are treated as converged.
const LAGRANGIAN_TOL: f64 = 1e-9;

/// Cyclic block-coordinate ascent on the Lagrangian from the all-zero start.
pub fn gauss_seidel(
    source: &SourceModel,
    lambda: f64,
    backhaul: f64,
    tol: &ToleranceConfig,
) -> Result<GaussSeidelOutcome> {
    gauss_seidel_from(
        source,
        NoiseInverseSet::zeros(source),
        lambda,
        backhaul,
        tol,
    )
}

/// Same as [`gauss_seidel`] from an arbitrary starting design.
///
/// Block changes are measured on `σ² A`, which is dimensionless.
pub fn gauss_seidel_from(
    source: &SourceModel,
    init: NoiseInverseSet,
    lambda: f64,
    backhaul: f64,
    tol: &ToleranceConfig,
) -> Result<GaussSeidelOutcome> {
    if !(lambda >= 0.0) {
        return Err(DwzError::InvalidScenario(format!(
            "multiplier must be non-negative, got {lambda}"
        )));
    }
    init.validate(source, tol.psd_floor)?;
    let scale = source.noise_power;
    let mut a = init;
    let mut last = lagrangian(source, &a, lambda, backhaul)?;
    let mut trace = vec![last];
    for sweep in 1..=tol.max_iters {
        let start = last;
        let mut max_change = 0.0f64;
        for n in 1..=source.num_coop() {
            let next = block_update(source, &a, n, lambda)?;
            max_change = max_change.max(next.frobenius_distance(a.block(n)) * scale);
            a.set_block(n, next);
            last = lagrangian(source, &a, lambda, backhaul)?;
            trace.push(last);
        }
        if max_change < tol.convergence_tol && (last - start).abs() < LAGRANGIAN_TOL {
            return Ok(GaussSeidelOutcome {
                a,
                converged: true,
                sweeps: sweep,
                lagrangian_trace: trace,
            });
        }
    }
    log::warn!(
        "Gauss-Seidel hit {} sweeps at lambda = {lambda}",
        tol.max_iters
    );
    Ok(GaussSeidelOutcome {
        a,
        converged: false,
        sweeps: tol.max_iters,
        lagrangian_trace: trace,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerances: ToleranceConfig,
    /// Number of inner starts per multiplier. The first start is always the
    /// all-zero design; extra starts are random PSD designs.
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerances: ToleranceConfig::default(),
            starts: 1,
            seed: 0,
        }
    }
}

/// Trace of the multiplier search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualState {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda: f64,
    /// Subgradient `R − B(A)` at the returned design.
    pub h: f64,
    pub a: NoiseInverseSet,
    pub iterations: usize,
    /// Lagrangian trace of every inner run, in evaluation order.
    pub lagrangian_traces: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiBsSolution {
    pub a: NoiseInverseSet,
    pub rate: f64,
    pub backhaul_used: f64,
    pub converged: bool,
    pub state: DualState,
}

impl MultiBsSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solutions always serialize")
    }
}

fn random_start(source: &SourceModel, rng: &mut ChaCha8Rng) -> NoiseInverseSet {
    let scale = 1.0 / source.noise_power;
    NoiseInverseSet::new(
        (1..=source.num_coop())
            .map(|n| {
                let k = source.bs_antennas(n);
                let g = CMatrix::from_fn(k, k, |_, _| {
                    num_complex::Complex64::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )
                });
                HermitianMatrix::new(&g * g.adjoint())
                    .expect("square")
                    .scaled(scale)
            })
            .collect(),
    )
}

/// Maximizes the Lagrangian at `lambda`, keeping the best of `opts.starts` runs.
fn dual_function_argmax(
    source: &SourceModel,
    lambda: f64,
    backhaul: f64,
    opts: &SolverOptions,
    rng: &mut ChaCha8Rng,
    traces: &mut Vec<Vec<f64>>,
) -> Result<GaussSeidelOutcome> {
    let mut best = gauss_seidel(source, lambda, backhaul, &opts.tolerances)?;
    traces.push(best.lagrangian_trace.clone());
    for _ in 1..opts.starts {
        let run = gauss_seidel_from(
            source,
            random_start(source, rng),
            lambda,
            backhaul,
            &opts.tolerances,
        )?;
        traces.push(run.lagrangian_trace.clone());
        if run.lagrangian_trace.last() > best.lagrangian_trace.last() {
            best = run;
        }
    }
    Ok(best)
}

/// Slack on the feasible side below which a narrow bracket is accepted.
pub(crate) const ACTIVE_SLACK: f64 = 1e-7;

/// Bisection stops once the bracket is narrower than `tol · hi` and the
/// feasible side is nearly tight, or when the bracket reaches machine
/// precision (the backhaul usage can jump across the budget).
pub(crate) fn bracket_done(lo: f64, hi: f64, feasible_h: f64, tol: f64) -> bool {
    let width = hi - lo;
    (width <= tol * hi && feasible_h <= ACTIVE_SLACK) || width <= 4.0 * f64::EPSILON * hi
}

/// Dual bisection over the multiplier with Gauss-Seidel inner solves.
///
/// The multiplier bracket starts at `[0, 1]`: at `λ = 1` the all-zero design
/// is optimal and the subgradient equals `R`. The bracket is halved on the
/// sign of `h = R − B(A(λ))` until its width drops below
/// `bisection_tol · λ_max` with the constraint nearly tight. The design returned is the one at `λ_max`, which
/// always satisfies the backhaul constraint.
pub fn solve_multi_bs(
    source: &SourceModel,
    backhaul: f64,
    opts: &SolverOptions,
) -> Result<MultiBsSolution> {
    check_budget(backhaul)?;
    opts.tolerances.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut traces = Vec::new();
    let mut feasible_a = NoiseInverseSet::zeros(source);
    let mut feasible_h = backhaul;
    let mut converged = true;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;

    if source.num_coop() > 0 && backhaul > 0.0 {
        while !bracket_done(lo, hi, feasible_h, opts.tolerances.bisection_tol) && iterations < 2000
        {
            iterations += 1;
            let lambda = 0.5 * (lo + hi);
            let run = dual_function_argmax(source, lambda, backhaul, opts, &mut rng, &mut traces)?;
            converged &= run.converged;
            let h = backhaul - backhaul_usage(source, &run.a)?;
            if h <= 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
                feasible_a = run.a;
                feasible_h = h;
                if h <= 1e-10 {
                    break;
                }
            }
        }
    }

    let rate = achievable_rate(source, &feasible_a)?;
    let backhaul_used = backhaul - feasible_h;
    Ok(MultiBsSolution {
        rate,
        backhaul_used,
        converged,
        state: DualState {
            lambda_min: lo,
            lambda_max: hi,
            lambda: hi,
            h: feasible_h,
            a: feasible_a.clone(),
            iterations,
            lagrangian_traces: traces,
        },
        a: feasible_a,
    })
}

/// Successive Wyner-Ziv rates: BS `order[k]` is decoded with side information
/// from BS 0 and the BSs earlier in `order`. Entry `n − 1` of the result is the
/// rate of BS `n`. `order` is a permutation of `1..=N`.
pub fn swz_allocation(
    source: &SourceModel,
    a: &NoiseInverseSet,
    order: &[usize],
) -> Result<Vec<f64>> {
    let n_coop = source.num_coop();
    let mut seen = vec![false; n_coop + 1];
    let valid = order.len() == n_coop
        && order.iter().all(|&n| {
            let ok = n >= 1 && n <= n_coop && !seen[n];
            if ok {
                seen[n] = true;
            }
            ok
        });
    if !valid || a.len() != n_coop {
        return Err(DwzError::InvalidPermutation(order.to_vec()));
    }
    let mut rho = vec![0.0; n_coop];
    for (k, &n) in order.iter().enumerate() {
        if a.block(n).is_zero() {
            continue;
        }
        let r = cond_cov_given_subset(source, a, n, &order[..k])?;
        rho[n - 1] = logdet_i_plus_psd(a.block(n), &r)?;
    }
    Ok(rho)
}
