//! Conditional covariances of the received signals given the decoder's side
//! information.
//!
//! Everything is written in noise-inverse form, `(A σ² + I)^{-1} A`, so a
//! silenced base station (`A = 0`, infinite compression noise) needs no
//! special casing.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, SourceModel};
use crate::error::{DwzError, Result};
use crate::numerics::{hermitian_eig, CMatrix, HermitianMatrix};

/// Optimization variables `A_n = Φ_n^{-1}`, one per cooperative BS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseInverseSet {
    pub a: Vec<HermitianMatrix>,
}

impl NoiseInverseSet {
    pub fn new(a: Vec<HermitianMatrix>) -> Self {
        Self { a }
    }

    /// All base stations silenced.
    pub fn zeros(source: &SourceModel) -> Self {
        Self {
            a: (1..=source.num_coop())
                .map(|n| HermitianMatrix::zeros(source.bs_antennas(n)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Block for cooperative BS `n` (1-based, matching BS numbering).
    pub fn block(&self, n: usize) -> &HermitianMatrix {
        &self.a[n - 1]
    }

    pub fn set_block(&mut self, n: usize, value: HermitianMatrix) {
        self.a[n - 1] = value;
    }

    pub fn is_all_zero(&self) -> bool {
        self.a.iter().all(HermitianMatrix::is_zero)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a: self.a.iter().map(|m| m.scaled(factor)).collect(),
        }
    }

    /// Largest per-block Frobenius distance.
    pub fn max_block_change(&self, other: &NoiseInverseSet) -> f64 {
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| x.frobenius_distance(y))
            .fold(0.0, f64::max)
    }

    /// Checks block count and sizes against a source and that every block is PSD.
    pub fn validate(&self, source: &SourceModel, psd_floor: f64) -> Result<()> {
        if self.a.len() != source.num_coop() {
            return Err(DwzError::DimensionMismatch(format!(
                "{} noise-inverse blocks for {} cooperative BSs",
                self.a.len(),
                source.num_coop()
            )));
        }
        for (k, m) in self.a.iter().enumerate() {
            if m.dim() != source.bs_antennas(k + 1) {
                return Err(DwzError::DimensionMismatch(format!(
                    "block {} has size {}",
                    k + 1,
                    m.dim()
                )));
            }
            let scale = m.frobenius_norm().max(1.0);
            if m.min_eigenvalue()? < -psd_floor * scale {
                return Err(DwzError::InvalidScenario(format!(
                    "block {} is not PSD",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// `(A σ² + I)^{-1} A`, the effective precision a compressed observation adds.
///
/// Evaluated on the eigenvalues, `a / (a σ² + 1)`, which stays accurate when
/// the eigenvalues of `A` span many orders of magnitude.
pub fn compressed_precision(a: &HermitianMatrix, noise_power: f64) -> Result<CMatrix> {
    if a.is_zero() {
        return Ok(CMatrix::zeros(a.dim(), a.dim()));
    }
    let eig = hermitian_eig(a)?;
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&x| {
            let x = x.max(0.0);
            x / (x * noise_power + 1.0)
        })
        .collect();
    Ok(HermitianMatrix::from_eigen(&eig.basis, &values).into_matrix())
}

/// Information about the source collected by BS 0 and the compressed BSs in
/// `subset`: `H_0† H_0 / σ² + Σ_p H_p† (A_p σ² + I)^{-1} A_p H_p`.
pub fn source_information(
    source: &SourceModel,
    a: &NoiseInverseSet,
    subset: impl IntoIterator<Item = usize>,
) -> Result<CMatrix> {
    let h0 = &source.h[0];
    let mut j = h0.adjoint() * h0;
    j.scale_mut(1.0 / source.noise_power);
    for p in subset {
        let hp = &source.h[p];
        let prec = compressed_precision(a.block(p), source.noise_power)?;
        j += hp.adjoint() * prec * hp;
    }
    Ok(j)
}

/// Posterior covariance of the source given information `j`: `(I + Q J)^{-1} Q`.
pub fn posterior_source_covariance(source: &SourceModel, j: &CMatrix) -> Result<CMatrix> {
    let k = source.tx_dim();
    let q = source.q.as_matrix();
    let lhs = CMatrix::identity(k, k) + q * j;
    let post = lhs
        .lu()
        .solve(q)
        .ok_or_else(|| DwzError::NumericalFailure("singular I + QJ".into()))?;
    let adj = post.adjoint();
    Ok((post + adj).scale(0.5))
}

/// `H post H† + σ² I` for a (possibly stacked) observation matrix `h`.
fn observation_covariance(h: &CMatrix, post: &CMatrix, noise_power: f64) -> HermitianMatrix {
    let rows = h.nrows();
    let m = h * post * h.adjoint() + CMatrix::identity(rows, rows).scale(noise_power);
    HermitianMatrix::symmetrized(m)
}

fn check_bs(source: &SourceModel, n: usize) -> Result<()> {
    if n == 0 || n > source.num_coop() {
        return Err(DwzError::InvalidScenario(format!(
            "cooperative BS index {n} outside 1..={}",
            source.num_coop()
        )));
    }
    Ok(())
}

/// `R_{Y_n | Y_0}`.
pub fn cond_cov_bs_given_bs0(source: &SourceModel, n: usize) -> Result<HermitianMatrix> {
    check_bs(source, n)?;
    let j = source_information(source, &NoiseInverseSet::new(Vec::new()), [])?;
    let post = posterior_source_covariance(source, &j)?;
    Ok(observation_covariance(
        &source.h[n],
        &post,
        source.noise_power,
    ))
}

/// `R_{Y_{1:N} | Y_0}` for the stacked observations of all cooperative BSs.
pub fn cond_cov_all_given_bs0(source: &SourceModel) -> Result<HermitianMatrix> {
    let j = source_information(source, &NoiseInverseSet::new(Vec::new()), [])?;
    let post = posterior_source_covariance(source, &j)?;
    let rows: usize = (1..=source.num_coop()).map(|n| source.bs_antennas(n)).sum();
    let mut stacked = CMatrix::zeros(rows, source.tx_dim());
    let mut off = 0;
    for n in 1..=source.num_coop() {
        let h = &source.h[n];
        stacked
            .view_mut((off, 0), (h.nrows(), h.ncols()))
            .copy_from(h);
        off += h.nrows();
    }
    Ok(observation_covariance(&stacked, &post, source.noise_power))
}

/// `R_{Y_n | Y_0, Ŷ_G}` for a subset `G` of cooperative BSs not containing `n`.
pub fn cond_cov_given_subset(
    source: &SourceModel,
    a: &NoiseInverseSet,
    n: usize,
    subset: &[usize],
) -> Result<HermitianMatrix> {
    check_bs(source, n)?;
    if subset.contains(&n) {
        return Err(DwzError::InvalidSubset { n });
    }
    for &p in subset {
        check_bs(source, p)?;
    }
    let j = source_information(source, a, subset.iter().copied())?;
    let post = posterior_source_covariance(source, &j)?;
    Ok(observation_covariance(
        &source.h[n],
        &post,
        source.noise_power,
    ))
}

/// `R_{Y_n | Y_0, Ŷ_n^c}`: conditioning on every other compressed BS.
pub fn cond_cov_given_complement(
    source: &SourceModel,
    a: &NoiseInverseSet,
    n: usize,
) -> Result<HermitianMatrix> {
    check_bs(source, n)?;
    let j = source_information(source, a, (1..=source.num_coop()).filter(|&p| p != n))?;
    let post = posterior_source_covariance(source, &j)?;
    Ok(observation_covariance(
        &source.h[n],
        &post,
        source.noise_power,
    ))
}

/// `R_{Y_n | X_i, Y_0, Ŷ_n^c}` in a two-user network: once user `i` is known
/// only the other user's signal remains.
pub fn cond_cov_given_user(
    channels: &ChannelSet,
    a: &NoiseInverseSet,
    n: usize,
    known_user: usize,
) -> Result<HermitianMatrix> {
    if channels.num_users() != 2 {
        return Err(DwzError::InvalidScenario(format!(
            "conditioning on a user needs exactly two users, got {}",
            channels.num_users()
        )));
    }
    if known_user > 1 {
        return Err(DwzError::InvalidScenario(format!("no user {known_user}")));
    }
    let other = channels.user_source(1 - known_user)?;
    cond_cov_given_complement(&other, a, n)
}

/// Which signals a conditional covariance is conditioned on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conditioning {
    GivenBs0,
    GivenBs0AndComplement(usize),
    GivenBs0AndSubset { n: usize, subset: Vec<usize> },
    GivenBs0ComplementAndUser { n: usize, known_user: usize },
}

/// A covariance query against a channel set, optionally stacking all users
/// into one equivalent source.
#[derive(Clone, Debug)]
pub struct CovarianceRequest<'a> {
    pub channels: &'a ChannelSet,
    pub single_user_stacking: bool,
    pub conditioning: Conditioning,
}

impl CovarianceRequest<'_> {
    pub fn evaluate(&self, a: &NoiseInverseSet) -> Result<HermitianMatrix> {
        let source = if self.single_user_stacking || self.channels.num_users() == 1 {
            self.channels.stacked()
        } else {
            return match &self.conditioning {
                Conditioning::GivenBs0ComplementAndUser { n, known_user } => {
                    cond_cov_given_user(self.channels, a, *n, *known_user)
                }
                _ => Err(DwzError::InvalidScenario(
                    "multi-user requests other than user conditioning must be stacked".into(),
                )),
            };
        };
        match &self.conditioning {
            Conditioning::GivenBs0 => cond_cov_all_given_bs0(&source),
            Conditioning::GivenBs0AndComplement(n) => cond_cov_given_complement(&source, a, *n),
            Conditioning::GivenBs0AndSubset { n, subset } => {
                cond_cov_given_subset(&source, a, *n, subset)
            }
            Conditioning::GivenBs0ComplementAndUser { n, known_user } => {
                cond_cov_given_user(self.channels, a, *n, *known_user)
            }
        }
    }
}
