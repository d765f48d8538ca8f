//! Cellular scenario generation: hexagonal geometry, path loss, log-normal
//! shadowing and i.i.d. Rayleigh fading.
//!
//! Received signals are never sampled. Everything downstream works with the
//! second-order statistics carried by [`ChannelSet`] and [`SourceModel`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DwzError, Result};
use crate::numerics::{block_diag, matrix_serde, CMatrix, HermitianMatrix};

/// Path-loss reference distance in meters (unit gain at this distance).
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Thermal noise over 1 MHz (-114 dBm) plus a 9 dB noise figure.
pub const DEFAULT_NOISE_POWER_DBM: f64 = -105.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileLabel {
    Los,
    Nlos,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationProfile {
    pub label: ProfileLabel,
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
}

impl PropagationProfile {
    pub fn los() -> Self {
        Self {
            label: ProfileLabel::Los,
            pathloss_exponent: 2.6,
            shadowing_sigma_db: 4.0,
        }
    }

    pub fn nlos() -> Self {
        Self {
            label: ProfileLabel::Nlos,
            pathloss_exponent: 4.05,
            shadowing_sigma_db: 10.0,
        }
    }

    pub fn custom(pathloss_exponent: f64, shadowing_sigma_db: f64) -> Self {
        Self {
            label: ProfileLabel::Custom,
            pathloss_exponent,
            shadowing_sigma_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return Err(DwzError::InvalidScenario(format!(
                "path-loss exponent must be positive, got {}",
                self.pathloss_exponent
            )));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return Err(DwzError::InvalidScenario(format!(
                "shadowing deviation must be non-negative, got {}",
                self.shadowing_sigma_db
            )));
        }
        Ok(())
    }

    /// Distance-dependent gain without shadowing, `(d / d_ref)^(-alpha)`.
    pub fn pathloss_gain(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(REFERENCE_DISTANCE_M);
        (d / REFERENCE_DISTANCE_M).powf(-self.pathloss_exponent)
    }
}

/// Base-station layout and receiver parameters. Index 0 is the decoding BS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub cell_radius: f64,
    pub bs_positions: Vec<[f64; 2]>,
    pub bs_antennas: Vec<usize>,
    pub user_positions: Vec<[f64; 2]>,
    pub noise_power_dbm: f64,
}

impl NetworkGeometry {
    /// Central cell plus its first tier of six hexagonal neighbours, each at
    /// `2 * radius * cos(30°)` from the center.
    pub fn hexagonal(cell_radius: f64, antennas_per_bs: usize) -> Self {
        let spacing = 2.0 * cell_radius * (PI / 6.0).cos();
        let mut bs_positions = vec![[0.0, 0.0]];
        for k in 0..6 {
            let theta = PI / 6.0 + k as f64 * PI / 3.0;
            bs_positions.push([spacing * theta.cos(), spacing * theta.sin()]);
        }
        Self {
            cell_radius,
            bs_antennas: vec![antennas_per_bs; bs_positions.len()],
            bs_positions,
            user_positions: Vec::new(),
            noise_power_dbm: DEFAULT_NOISE_POWER_DBM,
        }
    }

    pub fn with_users(mut self, users: Vec<[f64; 2]>) -> Self {
        self.user_positions = users;
        self
    }

    /// Keeps BS 0 and the listed cooperative BSs, in the given order.
    pub fn select_bs(&self, coop: &[usize]) -> Result<Self> {
        let mut keep = vec![0];
        for &i in coop {
            if i == 0 || i >= self.bs_positions.len() || keep.contains(&i) {
                return Err(DwzError::InvalidScenario(format!(
                    "invalid cooperative BS selection {coop:?}"
                )));
            }
            keep.push(i);
        }
        Ok(Self {
            cell_radius: self.cell_radius,
            bs_positions: keep.iter().map(|&i| self.bs_positions[i]).collect(),
            bs_antennas: keep.iter().map(|&i| self.bs_antennas[i]).collect(),
            user_positions: self.user_positions.clone(),
            noise_power_dbm: self.noise_power_dbm,
        })
    }

    /// Cooperative BS indices sorted by distance to `point`, nearest first.
    pub fn coop_by_distance(&self, point: [f64; 2]) -> Vec<usize> {
        let mut idx: Vec<usize> = (1..self.bs_positions.len()).collect();
        idx.sort_by(|&a, &b| {
            distance(self.bs_positions[a], point).total_cmp(&distance(self.bs_positions[b], point))
        });
        idx
    }

    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bs_positions.is_empty() {
            return Err(DwzError::InvalidScenario(
                "at least one base station is required".into(),
            ));
        }
        if self.bs_positions.len() != self.bs_antennas.len() {
            return Err(DwzError::InvalidScenario(
                "one antenna count per base station is required".into(),
            ));
        }
        if self.bs_antennas.contains(&0) {
            return Err(DwzError::InvalidScenario(
                "antenna counts must be positive".into(),
            ));
        }
        let finite = |p: &[f64; 2]| p[0].is_finite() && p[1].is_finite();
        if !self
            .bs_positions
            .iter()
            .chain(&self.user_positions)
            .all(finite)
        {
            return Err(DwzError::InvalidScenario("positions must be finite".into()));
        }
        if !(self.cell_radius > 0.0) || !self.noise_power_dbm.is_finite() {
            return Err(DwzError::InvalidScenario(
                "invalid cell radius or noise power".into(),
            ));
        }
        Ok(())
    }
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    pub num_antennas: usize,
    pub tx_power_dbm: f64,
    pub tx_covariance: HermitianMatrix,
}

impl UserConfig {
    /// Isotropic transmission, `Q = (P / N_t) I`.
    pub fn isotropic(num_antennas: usize, tx_power_dbm: f64) -> Self {
        let per_antenna = dbm_to_watts(tx_power_dbm) / num_antennas as f64;
        Self {
            num_antennas,
            tx_power_dbm,
            tx_covariance: HermitianMatrix::identity(num_antennas).scaled(per_antenna),
        }
    }

    /// Same antennas, transmitter switched off.
    pub fn silent(num_antennas: usize) -> Self {
        Self {
            num_antennas,
            tx_power_dbm: f64::NEG_INFINITY,
            tx_covariance: HermitianMatrix::zeros(num_antennas),
        }
    }
}

/// Channel matrices `h[u][i]` (user `u` to BS `i`, shape `N_i x N_t`), noise
/// power and the users' transmit covariances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    #[serde(with = "nested_matrices")]
    pub h: Vec<Vec<CMatrix>>,
    pub noise_power: f64,
    pub users: Vec<UserConfig>,
}

mod nested_matrices {
    use super::{matrix_serde, CMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "matrix_serde::vec")] Vec<CMatrix>);

    pub fn serialize<S: Serializer>(h: &[Vec<CMatrix>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row> = h.iter().cloned().map(Row).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<CMatrix>>, D::Error> {
        let rows: Vec<Row> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.0).collect())
    }
}

impl ChannelSet {
    pub fn new(h: Vec<Vec<CMatrix>>, noise_power: f64, users: Vec<UserConfig>) -> Result<Self> {
        let set = Self {
            h,
            noise_power,
            users,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(DwzError::InvalidScenario(
                "noise power must be positive".into(),
            ));
        }
        if self.users.is_empty() || self.h.len() != self.users.len() {
            return Err(DwzError::InvalidScenario(
                "one channel row per user is required".into(),
            ));
        }
        let num_bs = self.h[0].len();
        if num_bs == 0 {
            return Err(DwzError::InvalidScenario(
                "at least one base station is required".into(),
            ));
        }
        for (u, row) in self.h.iter().enumerate() {
            if row.len() != num_bs {
                return Err(DwzError::DimensionMismatch(format!(
                    "user {u} has {} channels",
                    row.len()
                )));
            }
            let nt = self.users[u].num_antennas;
            if self.users[u].tx_covariance.dim() != nt {
                return Err(DwzError::DimensionMismatch(format!(
                    "user {u} covariance size"
                )));
            }
            for (i, hm) in row.iter().enumerate() {
                if hm.ncols() != nt || hm.nrows() != self.h[0][i].nrows() {
                    return Err(DwzError::DimensionMismatch(format!(
                        "channel (user {u}, BS {i}) is {}x{}",
                        hm.nrows(),
                        hm.ncols()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Number of base stations including BS 0.
    pub fn num_bs(&self) -> usize {
        self.h[0].len()
    }

    /// Number of cooperative base stations `N`.
    pub fn num_coop(&self) -> usize {
        self.num_bs() - 1
    }

    pub fn bs_antennas(&self, i: usize) -> usize {
        self.h[0][i].nrows()
    }

    pub fn channel(&self, user: usize, bs: usize) -> &CMatrix {
        &self.h[user][bs]
    }

    /// All users merged into one equivalent source: `H_{s,n} = [H_{1,n}, H_{2,n}, ...]`
    /// and `Q = blockdiag(Q_1, Q_2, ...)`.
    pub fn stacked(&self) -> SourceModel {
        let nt: usize = self.users.iter().map(|u| u.num_antennas).sum();
        let h = (0..self.num_bs())
            .map(|i| {
                let mut m = CMatrix::zeros(self.bs_antennas(i), nt);
                let mut off = 0;
                for (u, row) in self.h.iter().enumerate() {
                    let k = self.users[u].num_antennas;
                    m.view_mut((0, off), (row[i].nrows(), k)).copy_from(&row[i]);
                    off += k;
                }
                m
            })
            .collect();
        let blocks: Vec<&CMatrix> = self
            .users
            .iter()
            .map(|u| u.tx_covariance.as_matrix())
            .collect();
        SourceModel {
            h,
            q: HermitianMatrix::symmetrized(block_diag(&blocks)),
            noise_power: self.noise_power,
        }
    }

    /// The source seen when only user `u` transmits.
    pub fn user_source(&self, u: usize) -> Result<SourceModel> {
        if u >= self.num_users() {
            return Err(DwzError::InvalidScenario(format!("no user {u}")));
        }
        Ok(SourceModel {
            h: self.h[u].clone(),
            q: self.users[u].tx_covariance.clone(),
            noise_power: self.noise_power,
        })
    }

    /// Keeps the first `count` users.
    pub fn first_users(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.num_users() {
            return Err(DwzError::InvalidScenario(format!(
                "cannot keep {count} users"
            )));
        }
        Ok(Self {
            h: self.h[..count].to_vec(),
            noise_power: self.noise_power,
            users: self.users[..count].to_vec(),
        })
    }

    /// Keeps BS 0 and the listed cooperative BSs, in the given order.
    pub fn select_bs(&self, coop: &[usize]) -> Result<Self> {
        let mut keep = vec![0];
        for &i in coop {
            if i == 0 || i >= self.num_bs() || keep.contains(&i) {
                return Err(DwzError::InvalidScenario(format!(
                    "invalid cooperative BS selection {coop:?}"
                )));
            }
            keep.push(i);
        }
        Ok(Self {
            h: self
                .h
                .iter()
                .map(|row| keep.iter().map(|&i| row[i].clone()).collect())
                .collect(),
            noise_power: self.noise_power,
            users: self.users.clone(),
        })
    }

    pub fn with_user_config(mut self, u: usize, cfg: UserConfig) -> Result<Self> {
        if u >= self.num_users() || cfg.num_antennas != self.users[u].num_antennas {
            return Err(DwzError::InvalidScenario(format!(
                "cannot replace user {u}"
            )));
        }
        self.users[u] = cfg;
        Ok(self)
    }

    /// Equivalent set with unit noise power (see [`SourceModel::normalized`]).
    pub fn normalized(&self) -> Self {
        let scale = Complex64::new(self.noise_power.sqrt().recip(), 0.0);
        Self {
            h: self
                .h
                .iter()
                .map(|row| row.iter().map(|m| m * scale).collect())
                .collect(),
            noise_power: 1.0,
            users: self.users.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel sets always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(s)
            .map_err(|e| DwzError::InvalidScenario(format!("bad channel JSON: {e}")))?;
        set.validate()?;
        Ok(set)
    }
}

/// One (possibly stacked) Gaussian source observed at BS 0..=N.
///
/// `h[0]` is the channel to the decoding BS, `h[n]` for `n >= 1` the channels
/// to the cooperative BSs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    #[serde(with = "matrix_serde::vec")]
    pub h: Vec<CMatrix>,
    pub q: HermitianMatrix,
    pub noise_power: f64,
}

impl SourceModel {
    pub fn new(h: Vec<CMatrix>, q: HermitianMatrix, noise_power: f64) -> Result<Self> {
        if h.is_empty() || !(noise_power > 0.0) {
            return Err(DwzError::InvalidScenario(
                "empty source or non-positive noise".into(),
            ));
        }
        if h.iter().any(|m| m.ncols() != q.dim()) {
            return Err(DwzError::DimensionMismatch(
                "channel width differs from Q".into(),
            ));
        }
        Ok(Self { h, q, noise_power })
    }

    pub fn num_coop(&self) -> usize {
        self.h.len() - 1
    }

    pub fn tx_dim(&self) -> usize {
        self.q.dim()
    }

    pub fn bs_antennas(&self, n: usize) -> usize {
        self.h[n].nrows()
    }

    /// Equivalent model with unit noise power: channels scaled by `1/sigma`.
    /// Noise-inverse matrices map as `A_unit = sigma^2 A`.
    pub fn normalized(&self) -> Self {
        let scale = Complex64::new(self.noise_power.sqrt().recip(), 0.0);
        Self {
            h: self.h.iter().map(|m| m * scale).collect(),
            q: self.q.clone(),
            noise_power: 1.0,
        }
    }
}

/// Independent per-trial seed from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Large-scale gains `g[u][i]` including one shadowing draw per (user, BS) pair.
pub fn draw_link_gains<R: Rng>(
    geometry: &NetworkGeometry,
    profile: &PropagationProfile,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let shadow = Normal::new(0.0, profile.shadowing_sigma_db)
        .map_err(|e| DwzError::InvalidScenario(e.to_string()))?;
    Ok(geometry
        .user_positions
        .iter()
        .map(|&p| {
            geometry
                .bs_positions
                .iter()
                .map(|&b| {
                    let x_db: f64 = shadow.sample(rng);
                    profile.pathloss_gain(distance(p, b)) * 10f64.powf(x_db / 10.0)
                })
                .collect()
        })
        .collect())
}

pub fn generate_channels(
    geometry: &NetworkGeometry,
    profile: &PropagationProfile,
    users: &[UserConfig],
    seed: u64,
) -> Result<ChannelSet> {
    geometry.validate()?;
    profile.validate()?;
    if users.len() != geometry.user_positions.len() {
        return Err(DwzError::InvalidScenario(format!(
            "{} user configs for {} user positions",
            users.len(),
            geometry.user_positions.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = draw_link_gains(geometry, profile, &mut rng)?;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = Vec::with_capacity(users.len());
    for (u, cfg) in users.iter().enumerate() {
        let row = geometry
            .bs_antennas
            .iter()
            .enumerate()
            .map(|(i, &nr)| {
                let g = gains[u][i].sqrt();
                CMatrix::from_fn(nr, cfg.num_antennas, |_, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * (g * amp)
                })
            })
            .collect();
        h.push(row);
    }
    ChannelSet::new(h, geometry.noise_power_watts(), users.to_vec())
}

/// Points drawn uniformly on the cell edge around BS 0.
pub fn edge_user_positions(geometry: &NetworkGeometry, count: usize, seed: u64) -> Vec<[f64; 2]> {
    let center = geometry.bs_positions.first().copied().unwrap_or([0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let theta = rng.random_range(0.0..2.0 * PI);
            [
                center[0] + geometry.cell_radius * theta.cos(),
                center[1] + geometry.cell_radius * theta.sin(),
            ]
        })
        .collect()
}
