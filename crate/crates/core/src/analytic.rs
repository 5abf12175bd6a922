//! Closed-form outage probabilities for opportunistic DF and AF relaying.
//!
//! Both engines treat the estimated coefficients `ĥ` as exactly log-normal.
//! DF uses the best-worst selection rule, whose per-branch CDF is
//! `Q(Ω_sr) + Q(Ω_rd) − Q(Ω_sr)·Q(Ω_rd)`; AF fits the destination SNR of
//! each branch with a Wilkinson log-normal.

use crate::channel::HopParams;
use crate::error::Result;
use crate::lognormal::{wilkinson_sum, LogNormalDb};
use crate::snr::{Branch, EffectiveSnrTerms, NetworkConfig};

/// Log-normal laws of one branch's SNRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDistributions {
    /// `γ̂_sr = (P_s/N0)·|ĥ_sr|²`.
    pub gamma_sr: LogNormalDb,
    /// `γ̂_rd = (P_r/N0)·|ĥ_rd|²`.
    pub gamma_rd: LogNormalDb,
    /// Fitted law of the AF destination SNR.
    pub af_effective: LogNormalDb,
}

impl BranchDistributions {
    pub fn new(branch: &Branch, cfg: &NetworkConfig) -> Result<Self> {
        Ok(Self {
            gamma_sr: hop_snr_distribution(&branch.sr, cfg.p_s, cfg.n0)?,
            gamma_rd: hop_snr_distribution(&branch.rd, cfg.p_r, cfg.n0)?,
            af_effective: af_branch_distribution(branch, cfg)?,
        })
    }
}

/// Law of `(P/N0)·|ĥ|²`: `{2μ + 10·log10(P/N0), 2σ}`.
pub fn hop_snr_distribution(hop: &HopParams, power: f64, n0: f64) -> Result<LogNormalDb> {
    hop.magnitude().square().scale(power / n0)
}

/// CDF of a log-normal SNR at the threshold, with the `γ_th = 0` boundary
/// mapped to zero.
fn cdf_at_threshold(law: &LogNormalDb, gamma_th: f64) -> Result<f64> {
    if gamma_th == 0.0 {
        return Ok(0.0);
    }
    law.cdf(gamma_th)
}

/// Outage probability of opportunistic DF with best-worst selection.
pub fn df_outage(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    let mut p = 1.0;
    for branch in &cfg.branches {
        let q_sr = cdf_at_threshold(
            &hop_snr_distribution(&branch.sr, cfg.p_s, cfg.n0)?,
            cfg.gamma_th,
        )?;
        let q_rd = cdf_at_threshold(
            &hop_snr_distribution(&branch.rd, cfg.p_r, cfg.n0)?,
            cfg.gamma_th,
        )?;
        // Written as a sum so small tail probabilities keep full precision.
        p *= q_sr + q_rd - q_sr * q_rd;
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Wilkinson fit of the AF destination SNR of one branch.
///
/// The destination SNR is rewritten as
/// `ρ_sr²ρ_rd²/(λ_sr·λ_rd) · 1/(α + β)` with `α = 1/(λ_sr·γ̂_sr)` and
/// `β = 1/(λ_rd·γ̂_rd)`; `α + β` is fitted by a log-normal, inverted and
/// rescaled.
pub fn af_branch_distribution(branch: &Branch, cfg: &NetworkConfig) -> Result<LogNormalDb> {
    let terms = EffectiveSnrTerms::for_branch(branch, cfg);
    let alpha = hop_snr_distribution(&branch.sr, cfg.p_s, cfg.n0)?
        .scale(terms.lambda_sr)?
        .reciprocal();
    let beta = hop_snr_distribution(&branch.rd, cfg.p_r, cfg.n0)?
        .scale(terms.lambda_rd)?
        .reciprocal();
    let chi = wilkinson_sum(&[alpha, beta], None)?;
    let rho2 = (terms.rho_sr * terms.rho_rd).powi(2);
    chi.result
        .reciprocal()
        .scale(rho2 / (terms.lambda_sr * terms.lambda_rd))
}

/// Outage probability of opportunistic AF with best harmonic-mean selection.
pub fn af_outage(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    let mut p = 1.0;
    for branch in &cfg.branches {
        p *= cdf_at_threshold(&af_branch_distribution(branch, cfg)?, cfg.gamma_th)?;
    }
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hop(mu: f64, sigma: f64) -> HopParams {
        HopParams::perfect(mu, sigma).unwrap()
    }

    #[test]
    fn hop_snr_distribution_examples() {
        let d = hop_snr_distribution(&hop(0.0, 3.0), 1.0, 1.0).unwrap();
        assert_eq!(d, LogNormalDb::new(0.0, 6.0).unwrap());
        let d = hop_snr_distribution(&hop(2.0, 4.0), 100.0, 1.0).unwrap();
        assert!((d.mu_db() - 24.0).abs() < 1e-12);
        assert_eq!(d.sigma_db(), 8.0);
    }

    #[test]
    fn df_single_branch_at_median() {
        // Median of γ̂ is 10^(2μ/10)·P/N0; put γ_th there.
        let g_th = 10f64.powf(0.2);
        let cfg = NetworkConfig::symmetric(1, hop(1.0, 4.0), 0.0, g_th).unwrap();
        assert!((df_outage(&cfg).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn df_identical_branches_is_power() {
        let one = NetworkConfig::symmetric(1, hop(0.0, 5.0), 8.0, 3.0).unwrap();
        let three = NetworkConfig::symmetric(3, hop(0.0, 5.0), 8.0, 3.0).unwrap();
        let p1 = df_outage(&one).unwrap();
        assert!((df_outage(&three).unwrap() - p1.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn af_single_branch_at_fitted_median() {
        let mut cfg =
            NetworkConfig::symmetric(1, HopParams::new(0.0, 4.0, 0.95).unwrap(), 15.0, 3.0)
                .unwrap();
        let law = af_branch_distribution(&cfg.branches[0], &cfg).unwrap();
        cfg.gamma_th = 10f64.powf(law.mu_db() / 10.0);
        assert!((af_outage(&cfg).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn af_identical_branches_is_power() {
        let one = NetworkConfig::symmetric(1, hop(0.0, 4.0), 12.0, 3.0).unwrap();
        let two = NetworkConfig::symmetric(2, hop(0.0, 4.0), 12.0, 3.0).unwrap();
        let p1 = af_outage(&one).unwrap();
        assert!((af_outage(&two).unwrap() - p1 * p1).abs() < 1e-15);
    }

    #[test]
    fn af_symmetric_under_hop_swap() {
        let a = hop(1.0, 3.0);
        let b = hop(-2.0, 5.0);
        let cfg = NetworkConfig::new(vec![Branch::new(a, b)], 10.0, 3.0).unwrap();
        let swapped = NetworkConfig::new(vec![Branch::new(b, a)], 10.0, 3.0).unwrap();
        let x = af_branch_distribution(&cfg.branches[0], &cfg).unwrap();
        let y = af_branch_distribution(&swapped.branches[0], &swapped).unwrap();
        assert!((x.mu_db() - y.mu_db()).abs() < 1e-12);
        assert!((x.sigma_db() - y.sigma_db()).abs() < 1e-12);
    }

    #[test]
    fn af_deterministic_hops_collapse_to_point() {
        // σ = 0: γ̂ = 10 on both hops, half harmonic mean is 5.
        let cfg = NetworkConfig::symmetric(1, hop(0.0, 0.0), 10.0, 3.0).unwrap();
        let law = af_branch_distribution(&cfg.branches[0], &cfg).unwrap();
        assert!((law.mu_db() - 10.0 * 5f64.log10()).abs() < 1e-9);
        assert!(law.sigma_db() < 1e-6);
    }

    #[test]
    fn zero_threshold_never_outage() {
        let mut cfg = NetworkConfig::symmetric(2, hop(0.0, 4.0), 0.0, 3.0).unwrap();
        cfg.gamma_th = 0.0;
        assert_eq!(df_outage(&cfg).unwrap(), 0.0);
        assert_eq!(af_outage(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn branch_distributions_bundle() {
        let cfg = NetworkConfig::symmetric(1, hop(2.0, 4.0), 20.0, 3.0).unwrap();
        let d = BranchDistributions::new(&cfg.branches[0], &cfg).unwrap();
        assert!((d.gamma_sr.mu_db() - 24.0).abs() < 1e-12);
        assert_eq!(d.gamma_sr, d.gamma_rd);
        assert!(d.af_effective.mu_db() < d.gamma_sr.mu_db());
    }
}
