//! Achievable rate, backhaul usage, upper bounds and the quantization baseline
//! for a fixed compression design. All values are in bits per channel use.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, SourceModel};
use crate::covariance::{cond_cov_all_given_bs0, source_information, NoiseInverseSet};
use crate::error::{DwzError, Result};
use crate::numerics::{
    bisect_decreasing, block_diag, hermitian_eig, logdet_i_plus_psd, CMatrix, HermitianMatrix,
};

/// Slack allowed when comparing rates against bounds and budgets.
pub const RATE_SLACK: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub achievable: f64,
    pub backhaul_used: f64,
    pub ub1: f64,
    pub ub2: f64,
    pub feasible: bool,
}

/// `log2 det(I + Q (H_0† H_0 / σ² + Σ_n H_n† (A_n σ² + I)^{-1} A_n H_n))`.
pub fn achievable_rate(source: &SourceModel, a: &NoiseInverseSet) -> Result<f64> {
    check_blocks(source, a)?;
    let j = source_information(source, a, 1..=source.num_coop())?;
    logdet_i_plus_psd(&source.q, &HermitianMatrix::symmetrized(j))
}

/// `log2 det(I + blockdiag(A_1..A_N) R_{Y_{1:N}|Y_0})`, the backhaul rate the
/// distributed Wyner-Ziv code consumes.
pub fn backhaul_usage(source: &SourceModel, a: &NoiseInverseSet) -> Result<f64> {
    check_blocks(source, a)?;
    if a.is_empty() || a.is_all_zero() {
        return Ok(0.0);
    }
    let r = cond_cov_all_given_bs0(source)?;
    let blocks: Vec<&CMatrix> = a.a.iter().map(HermitianMatrix::as_matrix).collect();
    logdet_i_plus_psd(&HermitianMatrix::symmetrized(block_diag(&blocks)), &r)
}

/// Rate with every cooperative signal available uncompressed at BS 0.
pub fn upper_bound_1(source: &SourceModel) -> Result<f64> {
    let k = source.tx_dim();
    let mut j = CMatrix::zeros(k, k);
    for h in &source.h {
        j += h.adjoint() * h;
    }
    j.scale_mut(1.0 / source.noise_power);
    logdet_i_plus_psd(&source.q, &HermitianMatrix::symmetrized(j))
}

/// Rate of BS 0 decoding alone.
pub fn bs0_alone_rate(source: &SourceModel) -> Result<f64> {
    let j = source_information(source, &NoiseInverseSet::new(Vec::new()), [])?;
    logdet_i_plus_psd(&source.q, &HermitianMatrix::symmetrized(j))
}

/// BS 0 capacity plus the whole backhaul budget.
pub fn upper_bound_2(source: &SourceModel, backhaul: f64) -> Result<f64> {
    check_budget(backhaul)?;
    Ok(bs0_alone_rate(source)? + backhaul)
}

pub fn rate_report(source: &SourceModel, a: &NoiseInverseSet, backhaul: f64) -> Result<RateReport> {
    let achievable = achievable_rate(source, a)?;
    let backhaul_used = backhaul_usage(source, a)?;
    Ok(RateReport {
        achievable,
        backhaul_used,
        ub1: upper_bound_1(source)?,
        ub2: upper_bound_2(source, backhaul)?,
        feasible: backhaul_used <= backhaul + RATE_SLACK,
    })
}

/// Bounds of the region obtained when BS 0 sees every antenna uncompressed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRegion {
    pub r1_max: f64,
    pub r2_max: f64,
    pub sum_max: f64,
}

pub fn outer_region_1(channels: &ChannelSet) -> Result<OuterRegion> {
    if channels.num_users() != 2 {
        return Err(DwzError::InvalidScenario(format!(
            "outer region needs two users, got {}",
            channels.num_users()
        )));
    }
    Ok(OuterRegion {
        r1_max: upper_bound_1(&channels.user_source(0)?)?,
        r2_max: upper_bound_1(&channels.user_source(1)?)?,
        sum_max: upper_bound_1(&channels.stacked())?,
    })
}

/// Sum-rate bound: BS 0 sum capacity plus the backhaul.
pub fn outer_region_2(channels: &ChannelSet, backhaul: f64) -> Result<f64> {
    upper_bound_2(&channels.stacked(), backhaul)
}

/// Noise-inverse design of per-BS uniform quantization: each BS spends `R/N`
/// bits on white compression noise sized from its unconditional covariance,
/// ignoring the side information at BS 0.
pub fn quantization_design(source: &SourceModel, backhaul: f64) -> Result<NoiseInverseSet> {
    check_budget(backhaul)?;
    let n_coop = source.num_coop();
    let mut a = NoiseInverseSet::zeros(source);
    if n_coop == 0 || backhaul == 0.0 {
        return Ok(a);
    }
    let share = backhaul / n_coop as f64;
    for n in 1..=n_coop {
        let h = &source.h[n];
        let rows = h.nrows();
        let r = HermitianMatrix::symmetrized(
            h * source.q.as_matrix() * h.adjoint()
                + CMatrix::identity(rows, rows).scale(source.noise_power),
        );
        let eig = hermitian_eig(&r)?;
        let e_max = eig.eigenvalues[0];
        let bits = |eta: f64| -> f64 {
            eig.eigenvalues
                .iter()
                .map(|&e| (1.0 + eta * e.max(0.0)).log2())
                .sum()
        };
        let lo = (2f64.powf(share / rows as f64) - 1.0) / e_max;
        let hi = (2f64.powf(share) - 1.0) / e_max;
        let eta = if hi <= lo {
            lo
        } else {
            bisect_decreasing(|x| share - bits(x), lo, hi, (hi - lo) * 1e-15)?
        };
        a.set_block(n, HermitianMatrix::identity(rows).scaled(eta));
    }
    Ok(a)
}

pub fn quantization_baseline(source: &SourceModel, backhaul: f64) -> Result<f64> {
    achievable_rate(source, &quantization_design(source, backhaul)?)
}

fn check_blocks(source: &SourceModel, a: &NoiseInverseSet) -> Result<()> {
    if a.len() != source.num_coop() {
        return Err(DwzError::DimensionMismatch(format!(
            "{} noise-inverse blocks for {} cooperative BSs",
            a.len(),
            source.num_coop()
        )));
    }
    Ok(())
}

pub(crate) fn check_budget(backhaul: f64) -> Result<()> {
    if backhaul >= 0.0 && backhaul.is_finite() {
        Ok(())
    } else {
        Err(DwzError::InvalidBudget(backhaul))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scalar(h: &[f64], q: f64, noise: f64) -> SourceModel {
        SourceModel::new(
            h.iter()
                .map(|&x| CMatrix::from_element(1, 1, Complex64::new(x, 0.0)))
                .collect(),
            HermitianMatrix::from_real_diagonal(&[q]),
            noise,
        )
        .unwrap()
    }

    fn a1(x: f64) -> NoiseInverseSet {
        NoiseInverseSet::new(vec![HermitianMatrix::from_real_diagonal(&[x])])
    }

    #[test]
    fn scalar_instance_rates() {
        let s = scalar(&[1.0, 1.0], 1.0, 1.0);
        let a = a1(1.0 / 1.5);
        assert!((achievable_rate(&s, &a).unwrap() - 2.4f64.log2()).abs() < 1e-14);
        assert!((backhaul_usage(&s, &a).unwrap() - 1.0).abs() < 1e-14);
        assert!((upper_bound_1(&s).unwrap() - 3f64.log2()).abs() < 1e-14);
        assert!((upper_bound_2(&s, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_rate_matches_grid_closed_form() {
        // C(a) = log2(2 + a / (1 + a)); checked on a grid
        let s = scalar(&[1.0, 1.0], 1.0, 1.0);
        for i in 0..50 {
            let x = i as f64 * 0.1;
            let c = achievable_rate(&s, &a1(x)).unwrap();
            assert!((c - (2.0 + x / (1.0 + x)).log2()).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_design() {
        let s = scalar(&[1.0, 1.0, 0.5], 1.0, 1.0);
        let a = NoiseInverseSet::zeros(&s);
        assert!((achievable_rate(&s, &a).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(backhaul_usage(&s, &a).unwrap(), 0.0);
    }

    #[test]
    fn no_cooperation_bound_equals_rate() {
        let s = scalar(&[1.7], 2.0, 0.3);
        let empty = NoiseInverseSet::new(Vec::new());
        assert!((upper_bound_1(&s).unwrap() - achievable_rate(&s, &empty).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn large_noise_inverse_reaches_ub1() {
        let s = scalar(&[1.0, 0.6, 1.2], 1.0, 1.0);
        let a = NoiseInverseSet::new(vec![HermitianMatrix::from_real_diagonal(&[1e9]); 2]);
        let gap = upper_bound_1(&s).unwrap() - achievable_rate(&s, &a).unwrap();
        assert!((0.0..1e-6).contains(&gap));
    }

    #[test]
    fn negative_budget_rejected() {
        let s = scalar(&[1.0, 1.0], 1.0, 1.0);
        assert_eq!(upper_bound_2(&s, -1.0), Err(DwzError::InvalidBudget(-1.0)));
        assert!(quantization_baseline(&s, f64::NAN).is_err());
    }

    #[test]
    fn quantization_budget_split() {
        let s = scalar(&[1.0, 1.0, 2.0], 1.0, 1.0);
        let a = quantization_design(&s, 3.0).unwrap();
        // each BS spends 1.5 bits against its unconditional variance
        for n in 1..=2 {
            let var = s.h[n][(0, 0)].norm_sqr() + 1.0;
            let eta = a.block(n).as_matrix()[(0, 0)].re;
            assert!(((1.0 + eta * var).log2() - 1.5).abs() < 1e-9);
        }
        assert!((quantization_baseline(&s, 0.0).unwrap() - 1.0).abs() < 1e-14);
        let near_inf = quantization_baseline(&s, 200.0).unwrap();
        assert!((upper_bound_1(&s).unwrap() - near_inf).abs() < 1e-9);
    }
}
