//! Reference computations built directly from joint Gaussian covariances,
//! plus random instance generators shared by the integration suites.
#![allow(dead_code)]

use dwz_core::channel::{ChannelSet, SourceModel, UserConfig};
use dwz_core::covariance::NoiseInverseSet;
use dwz_core::numerics::{CMatrix, HermitianMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// `G G† / k + floor I`.
pub fn random_pd(rng: &mut ChaCha8Rng, k: usize, floor: f64) -> CMatrix {
    let g = gaussian_matrix(rng, k, k);
    &g * g.adjoint() / Complex64::new(k as f64, 0.0)
        + CMatrix::identity(k, k) * Complex64::new(floor, 0.0)
}

/// Random PSD matrix of the given rank.
pub fn random_psd(rng: &mut ChaCha8Rng, k: usize, rank: usize) -> CMatrix {
    let g = gaussian_matrix(rng, k, rank);
    &g * g.adjoint()
}

pub fn random_source(
    rng: &mut ChaCha8Rng,
    tx: usize,
    antennas: &[usize],
    noise: f64,
) -> SourceModel {
    let h = antennas
        .iter()
        .map(|&r| gaussian_matrix(rng, r, tx))
        .collect();
    let q = HermitianMatrix::new(random_pd(rng, tx, 0.2)).unwrap();
    SourceModel::new(h, q, noise).unwrap()
}

pub fn random_two_user(
    rng: &mut ChaCha8Rng,
    tx: [usize; 2],
    antennas: &[usize],
    noise: f64,
) -> ChannelSet {
    let h = tx
        .iter()
        .map(|&t| {
            antennas
                .iter()
                .map(|&r| gaussian_matrix(rng, r, t))
                .collect()
        })
        .collect();
    let users = tx
        .iter()
        .map(|&t| UserConfig {
            num_antennas: t,
            tx_power_dbm: 0.0,
            tx_covariance: HermitianMatrix::new(random_pd(rng, t, 0.2)).unwrap(),
        })
        .collect();
    ChannelSet::new(h, noise, users).unwrap()
}

/// Positive definite noise-inverse blocks scaled by `scale / noise`.
pub fn random_design(rng: &mut ChaCha8Rng, source: &SourceModel, scale: f64) -> NoiseInverseSet {
    NoiseInverseSet::new(
        (1..=source.num_coop())
            .map(|n| {
                let k = source.bs_antennas(n);
                HermitianMatrix::new(
                    random_pd(rng, k, 0.05) * Complex64::new(scale / source.noise_power, 0.0),
                )
                .unwrap()
            })
            .collect(),
    )
}

fn inverse(m: &CMatrix) -> CMatrix {
    m.clone()
        .try_inverse()
        .expect("oracle matrix must be invertible")
}

/// `log2 det` of a Hermitian positive definite matrix via Cholesky.
pub fn log2_det_pd(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = herm
        .cholesky()
        .expect("oracle matrix must be positive definite");
    let l = chol.l();
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum()
}

/// Gaussian observation `V = L X + W` with `W` independent of everything else.
#[derive(Clone, Debug)]
pub struct Observation {
    pub map: CMatrix,
    pub noise: CMatrix,
}

impl Observation {
    pub fn antenna(source: &SourceModel, i: usize) -> Self {
        let r = source.h[i].nrows();
        Self {
            map: source.h[i].clone(),
            noise: CMatrix::identity(r, r) * Complex64::new(source.noise_power, 0.0),
        }
    }

    /// `Ŷ_p = Y_p + Z_p` with `Cov(Z_p) = A_p^{-1}`; needs `A_p` invertible.
    pub fn compressed(source: &SourceModel, a: &CMatrix, p: usize) -> Self {
        let mut obs = Self::antenna(source, p);
        obs.noise += inverse(a);
        obs
    }

    /// Noiseless view of the coordinates `offset..offset + len` of `X`.
    pub fn coordinates(dim: usize, offset: usize, len: usize) -> Self {
        let mut map = CMatrix::zeros(len, dim);
        for k in 0..len {
            map[(k, offset + k)] = Complex64::new(1.0, 0.0);
        }
        Self {
            map,
            noise: CMatrix::zeros(len, len),
        }
    }
}

/// Covariance of the stacked observations.
pub fn joint_covariance(q: &CMatrix, obs: &[Observation]) -> CMatrix {
    let dims: Vec<usize> = obs.iter().map(|o| o.map.nrows()).collect();
    let total: usize = dims.iter().sum();
    let mut out = CMatrix::zeros(total, total);
    let mut r0 = 0;
    for (i, oi) in obs.iter().enumerate() {
        let mut c0 = 0;
        for (j, oj) in obs.iter().enumerate() {
            let mut block = &oi.map * q * oj.map.adjoint();
            if i == j {
                block += &oi.noise;
            }
            out.view_mut((r0, c0), (dims[i], dims[j])).copy_from(&block);
            c0 += dims[j];
        }
        r0 += dims[i];
    }
    out
}

/// `Cov(target | given)` as the Schur complement of the joint covariance.
pub fn conditional_covariance(q: &CMatrix, target: &Observation, given: &[Observation]) -> CMatrix {
    let mut all = vec![target.clone()];
    all.extend_from_slice(given);
    let joint = joint_covariance(q, &all);
    let t = target.map.nrows();
    let g = joint.nrows() - t;
    let stt = joint.view((0, 0), (t, t)).into_owned();
    if g == 0 {
        return stt;
    }
    let stg = joint.view((0, t), (t, g)).into_owned();
    let sgg = joint.view((t, t), (g, g)).into_owned();
    stt - &stg * inverse(&sgg) * stg.adjoint()
}

/// `Cov(Y_n | Y_0, Ŷ_p for p in subset)`; blocks of `a` in the subset must be
/// invertible or exactly zero (a zero block carries no information).
pub fn cond_cov(source: &SourceModel, a: &NoiseInverseSet, n: usize, subset: &[usize]) -> CMatrix {
    let q = source.q.as_matrix();
    let given = given_observations(source, a, subset);
    conditional_covariance(q, &Observation::antenna(source, n), &given)
}

fn given_observations(
    source: &SourceModel,
    a: &NoiseInverseSet,
    subset: &[usize],
) -> Vec<Observation> {
    let mut given = vec![Observation::antenna(source, 0)];
    for &p in subset {
        if !a.block(p).is_zero() {
            given.push(Observation::compressed(source, a.block(p).as_matrix(), p));
        }
    }
    given
}

/// Same as [`cond_cov`] with the transmitted signal of `known_user` revealed.
pub fn cond_cov_given_user(
    channels: &ChannelSet,
    a: &NoiseInverseSet,
    n: usize,
    subset: &[usize],
    known_user: usize,
) -> CMatrix {
    let source = channels.stacked();
    let q = source.q.as_matrix();
    let dims: Vec<usize> = channels.users.iter().map(|u| u.num_antennas).collect();
    let offset: usize = dims[..known_user].iter().sum();
    let mut given = given_observations(&source, a, subset);
    given.push(Observation::coordinates(
        source.tx_dim(),
        offset,
        dims[known_user],
    ));
    conditional_covariance(q, &Observation::antenna(&source, n), &given)
}

/// `Cov(Y_1..Y_N | Y_0)`, stacked.
pub fn cond_cov_all(source: &SourceModel) -> CMatrix {
    let q = source.q.as_matrix();
    let mut map = CMatrix::zeros(0, source.tx_dim());
    for n in 1..=source.num_coop() {
        let h = &source.h[n];
        let rows = map.nrows();
        map = map.insert_rows(rows, h.nrows(), Complex64::new(0.0, 0.0));
        map.view_mut((rows, 0), (h.nrows(), h.ncols())).copy_from(h);
    }
    let rows = map.nrows();
    let target = Observation {
        map,
        noise: CMatrix::identity(rows, rows) * Complex64::new(source.noise_power, 0.0),
    };
    conditional_covariance(q, &target, &[Observation::antenna(source, 0)])
}

/// Compressed streams `ŷ_j = u_j† Y_p + z_j`, `Var(z_j) = 1 / ν_j`.
#[derive(Clone, Debug)]
pub struct ScalarStreams {
    pub bs: usize,
    pub directions: Vec<CMatrix>,
    pub precisions: Vec<f64>,
}

impl ScalarStreams {
    fn observations(&self, source: &SourceModel) -> Vec<Observation> {
        self.directions
            .iter()
            .zip(&self.precisions)
            .filter(|(_, &nu)| nu > 0.0)
            .map(|(u, &nu)| {
                let map = u.adjoint() * &source.h[self.bs];
                let var = (u.adjoint() * u)[(0, 0)].re * source.noise_power + 1.0 / nu;
                Observation {
                    map,
                    noise: CMatrix::from_element(1, 1, Complex64::new(var, 0.0)),
                }
            })
            .collect()
    }
}

/// `I(X; Y_0, streams)` in bits, as `log det Cov(obs) − log det Cov(obs | X)`.
pub fn rate_mutual_information(source: &SourceModel, streams: &[ScalarStreams]) -> f64 {
    let mut obs = vec![Observation::antenna(source, 0)];
    for s in streams {
        obs.extend(s.observations(source));
    }
    let q = source.q.as_matrix();
    let joint = joint_covariance(q, &obs);
    let zero_q = CMatrix::zeros(q.nrows(), q.ncols());
    let noise_only = joint_covariance(&zero_q, &obs);
    log2_det_pd(&joint) - log2_det_pd(&noise_only)
}

/// Backhaul of one BS's streams: `I(Y_p; streams | Y_0)`.
pub fn backhaul_mutual_information(source: &SourceModel, streams: &ScalarStreams) -> f64 {
    let active: Vec<(&CMatrix, f64)> = streams
        .directions
        .iter()
        .zip(&streams.precisions)
        .filter(|(_, &nu)| nu > 0.0)
        .map(|(u, &nu)| (u, nu))
        .collect();
    if active.is_empty() {
        return 0.0;
    }
    let rows = active.len();
    let mut basis = CMatrix::zeros(source.bs_antennas(streams.bs), rows);
    let mut compression = CMatrix::zeros(rows, rows);
    for (k, (u, nu)) in active.iter().enumerate() {
        basis.set_column(k, &u.column(0));
        compression[(k, k)] = Complex64::new(1.0 / nu, 0.0);
    }
    // the streams share the BS receiver noise
    let shared = basis.adjoint() * &basis * Complex64::new(source.noise_power, 0.0);
    let target = Observation {
        map: basis.adjoint() * &source.h[streams.bs],
        noise: shared + &compression,
    };
    let cond = conditional_covariance(
        source.q.as_matrix(),
        &target,
        &[Observation::antenna(source, 0)],
    );
    log2_det_pd(&cond) - log2_det_pd(&compression)
}

fn unitary_2x2(theta: f64, psi: f64) -> [CMatrix; 2] {
    let (c, s) = (theta.cos(), theta.sin());
    let e = Complex64::from_polar(1.0, psi);
    let u1 = CMatrix::from_column_slice(2, 1, &[Complex64::new(c, 0.0), e * s]);
    let u2 = CMatrix::from_column_slice(2, 1, &[-e.conj() * s, Complex64::new(c, 0.0)]);
    [u1, u2]
}

/// Smallest `x` in `[0, hi]` with `f(x) >= target`, for nondecreasing `f`.
fn bisect_up(f: impl Fn(f64) -> f64, target: f64, mut hi: f64) -> f64 {
    while f(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Best rate over compression designs of a single cooperative BS (one or two
/// antennas) that spend exactly `backhaul` bits, by grid search over the
/// compression basis and the precision of the first stream, refined with a
/// shrinking pattern search. Returns `(rate, design)`.
pub fn grid_search_two_bs(source: &SourceModel, backhaul: f64) -> (f64, ScalarStreams) {
    assert_eq!(source.num_coop(), 1);
    let antennas = source.bs_antennas(1);
    let one = Complex64::new(1.0, 0.0);
    if antennas == 1 {
        let u = CMatrix::from_element(1, 1, one);
        let eval = |nu: f64| ScalarStreams {
            bs: 1,
            directions: vec![u.clone()],
            precisions: vec![nu],
        };
        let nu = if backhaul == 0.0 {
            0.0
        } else {
            bisect_up(
                |x| backhaul_mutual_information(source, &eval(x)),
                backhaul,
                1.0,
            )
        };
        let design = eval(nu);
        return (
            rate_mutual_information(source, std::slice::from_ref(&design)),
            design,
        );
    }
    assert_eq!(antennas, 2, "grid oracle handles at most two antennas");

    // (theta, psi, t) -> design, with t in [0, 1] the fraction of the largest
    // feasible first-stream precision and the second stream sized to close the budget
    let design = |theta: f64, psi: f64, t: f64| -> ScalarStreams {
        let [u1, u2] = unitary_2x2(theta, psi);
        let single = |nu1: f64| ScalarStreams {
            bs: 1,
            directions: vec![u1.clone(), u2.clone()],
            precisions: vec![nu1, 0.0],
        };
        let nu1_max = bisect_up(
            |x| backhaul_mutual_information(source, &single(x)),
            backhaul,
            1.0,
        );
        let nu1 = t.clamp(0.0, 1.0) * nu1_max;
        let with = |nu2: f64| ScalarStreams {
            bs: 1,
            directions: vec![u1.clone(), u2.clone()],
            precisions: vec![nu1, nu2],
        };
        let nu2 = bisect_up(
            |x| backhaul_mutual_information(source, &with(x)),
            backhaul,
            1.0,
        );
        with(nu2)
    };
    if backhaul == 0.0 {
        let d = ScalarStreams {
            bs: 1,
            directions: unitary_2x2(0.0, 0.0).to_vec(),
            precisions: vec![0.0, 0.0],
        };
        return (rate_mutual_information(source, std::slice::from_ref(&d)), d);
    }
    let value = |p: [f64; 3]| rate_mutual_information(source, &[design(p[0], p[1], p[2])]);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = ([0.0, 0.0, 1.0], f64::NEG_INFINITY);
    for i in 0..=8 {
        for j in 0..8 {
            for k in 0..=8 {
                let p = [
                    half_pi * i as f64 / 8.0,
                    two_pi * j as f64 / 8.0,
                    k as f64 / 8.0,
                ];
                let v = value(p);
                if v > best.1 {
                    best = (p, v);
                }
            }
        }
    }
    let mut step = [half_pi / 8.0, two_pi / 8.0, 1.0 / 8.0];
    while step[2] > 1e-7 {
        let mut improved = false;
        for d in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = best.0;
                p[d] += sign * step[d];
                p[2] = p[2].clamp(0.0, 1.0);
                let v = value(p);
                if v > best.1 {
                    best = (p, v);
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    let d = design(best.0[0], best.0[1], best.0[2]);
    (best.1, d)
}

/// Central finite-difference directional derivative of `f` at `a` along the
/// Hermitian direction `e` placed in block `n`.
pub fn directional_derivative(
    f: impl Fn(&NoiseInverseSet) -> f64,
    a: &NoiseInverseSet,
    n: usize,
    e: &CMatrix,
    h: f64,
) -> f64 {
    let shifted = |s: f64| {
        let mut b = a.clone();
        let m = b.block(n).as_matrix() + e * Complex64::new(s, 0.0);
        b.set_block(n, HermitianMatrix::new(m).unwrap());
        f(&b)
    };
    (shifted(h) - shifted(-h)) / (2.0 * h)
}

/// Numerical gradient in the `2 conj(∂f/∂A)` convention: the off-diagonal
/// entry `(i, j)` collects the responses to Hermitian perturbations of
/// `Re a_ij` and `Im a_ij`, the diagonal entry twice the response to `a_ii`.
pub fn finite_difference_gradient(
    f: impl Fn(&NoiseInverseSet) -> f64,
    a: &NoiseInverseSet,
    n: usize,
    h: f64,
) -> CMatrix {
    let k = a.block(n).dim();
    let mut grad = CMatrix::zeros(k, k);
    for i in 0..k {
        let mut e = CMatrix::zeros(k, k);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        grad[(i, i)] = Complex64::new(2.0 * directional_derivative(&f, a, n, &e, h), 0.0);
        for j in (i + 1)..k {
            let mut er = CMatrix::zeros(k, k);
            er[(i, j)] = Complex64::new(1.0, 0.0);
            er[(j, i)] = Complex64::new(1.0, 0.0);
            let re = directional_derivative(&f, a, n, &er, h);
            let mut ei = CMatrix::zeros(k, k);
            ei[(i, j)] = Complex64::new(0.0, 1.0);
            ei[(j, i)] = Complex64::new(0.0, -1.0);
            let im = directional_derivative(&f, a, n, &ei, h);
            grad[(i, j)] = Complex64::new(re, im);
            grad[(j, i)] = Complex64::new(re, -im);
        }
    }
    grad
}

pub fn relative_error(x: &CMatrix, reference: &CMatrix) -> f64 {
    (x - reference).norm() / reference.norm().max(f64::MIN_POSITIVE)
}
