//! Per-trial effective SNRs for decode-and-forward and amplify-and-forward
//! branches, and best-branch selection.

use serde::{Deserialize, Serialize};

use crate::channel::{HopDraw, HopParams};
use crate::error::{Error, Result};

/// One relay branch: source→relay and relay→destination hops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub sr: HopParams,
    pub rd: HopParams,
}

impl Branch {
    pub fn new(sr: HopParams, rd: HopParams) -> Self {
        Self { sr, rd }
    }

    /// Branch whose hops share the same parameters.
    pub fn symmetric(hop: HopParams) -> Self {
        Self { sr: hop, rd: hop }
    }
}

/// How the DF mismatched-combining factor `τ` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfTauMode {
    /// `τ = ρ²·|ĥ|² / (1 + P·σ_e²/N0)`, literally as printed, making the
    /// effective SNR scale with `|ĥ|⁴`.
    AsWritten,
    /// `τ = ρ² / (1 + P·σ_e²/N0)`.
    #[default]
    Normalized,
}

/// Which DF per-branch metric is compared against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfOutageOn {
    /// `min(γ̂_sr, γ̂_rd)`, the quantity the closed form describes.
    #[default]
    SelectionSnr,
    /// `min(τ_sr·γ̂_sr, τ_rd·γ̂_rd)`.
    EffectiveSnr,
}

/// AF destination SNR formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfSnrMode {
    /// Full destination SNR including the `ε_sr·ε_rd + 1` noise term:
    /// `ρ_sr²ρ_rd²·γ̂_sr·γ̂_rd / (λ_sr·γ̂_sr + λ_rd·γ̂_rd + ε_sr·ε_rd + 1)`.
    Exact,
    /// `ρ_sr²ρ_rd²·γ̂_sr·γ̂_rd / (λ_sr·γ̂_sr + λ_rd·γ̂_rd)`.
    #[default]
    Simplified,
    /// The full expression with the typeset placement of `σ_e²` and a linear
    /// `ρ_sr·ρ_rd` numerator. Kept for comparison only: it does not reduce to
    /// `Simplified` when the noise term is dropped.
    ExactAsPrinted,
}

/// Complete scenario for one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub branches: Vec<Branch>,
    /// Source power (linear).
    pub p_s: f64,
    /// Relay power (linear).
    pub p_r: f64,
    /// Noise variance (linear).
    pub n0: f64,
    /// Outage threshold (linear SNR).
    pub gamma_th: f64,
    pub df_tau_mode: DfTauMode,
    pub df_outage_on: DfOutageOn,
    pub af_snr_mode: AfSnrMode,
}

impl NetworkConfig {
    /// Equal source and relay power at `snr_db = 10·log10(P/N0)` with unit
    /// noise and default modes.
    pub fn new(branches: Vec<Branch>, snr_db: f64, gamma_th: f64) -> Result<Self> {
        let p = 10f64.powf(snr_db / 10.0);
        let cfg = Self {
            branches,
            p_s: p,
            p_r: p,
            n0: 1.0,
            gamma_th,
            df_tau_mode: DfTauMode::default(),
            df_outage_on: DfOutageOn::default(),
            af_snr_mode: AfSnrMode::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `relays` identical branches built from one hop description.
    pub fn symmetric(relays: usize, hop: HopParams, snr_db: f64, gamma_th: f64) -> Result<Self> {
        Self::new(vec![Branch::symmetric(hop); relays], snr_db, gamma_th)
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::invalid("relays", 0.0, "need at least one branch"));
        }
        for (name, v) in [("p_s", self.p_s), ("p_r", self.p_r), ("n0", self.n0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "must be positive and finite"));
            }
        }
        // gamma_th = 0 is admitted as the boundary where outage is impossible.
        if self.gamma_th.is_nan() || self.gamma_th < 0.0 || self.gamma_th.is_infinite() {
            return Err(Error::invalid(
                "gamma_th",
                self.gamma_th,
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }

    /// `P_s/N0`.
    pub fn avg_snr_sr(&self) -> f64 {
        self.p_s / self.n0
    }

    /// `P_r/N0`.
    pub fn avg_snr_rd(&self) -> f64 {
        self.p_r / self.n0
    }

    pub fn relays(&self) -> usize {
        self.branches.len()
    }
}

/// Normalized error powers, `λ` factors and estimated hop SNRs of one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSnrTerms {
    pub eps_sr: f64,
    pub eps_rd: f64,
    pub lambda_sr: f64,
    pub lambda_rd: f64,
    pub gamma_sr_hat: f64,
    pub gamma_rd_hat: f64,
    pub rho_sr: f64,
    pub rho_rd: f64,
}

impl EffectiveSnrTerms {
    /// Draw-independent part: `ε` and `λ` depend only on the configuration.
    pub fn for_branch(branch: &Branch, cfg: &NetworkConfig) -> Self {
        let eps_sr = cfg.avg_snr_sr() * branch.sr.error_variance();
        let eps_rd = cfg.avg_snr_rd() * branch.rd.error_variance();
        let (rho_sr, rho_rd) = (branch.sr.rho(), branch.rd.rho());
        Self {
            eps_sr,
            eps_rd,
            lambda_sr: 1.0 + rho_sr * rho_sr * eps_rd,
            lambda_rd: 1.0 + rho_rd * rho_rd * eps_sr,
            gamma_sr_hat: 0.0,
            gamma_rd_hat: 0.0,
            rho_sr,
            rho_rd,
        }
    }

    /// Fills in `γ̂ = P·|ĥ|²/N0` for both hops.
    pub fn with_draws(mut self, sr: &HopDraw, rd: &HopDraw, cfg: &NetworkConfig) -> Self {
        self.gamma_sr_hat = cfg.avg_snr_sr() * sr.est_power();
        self.gamma_rd_hat = cfg.avg_snr_rd() * rd.est_power();
        self
    }

    pub fn new(sr: &HopDraw, rd: &HopDraw, branch: &Branch, cfg: &NetworkConfig) -> Self {
        Self::for_branch(branch, cfg).with_draws(sr, rd, cfg)
    }
}

/// DF branch metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfBranchSnr {
    /// `min(γ̂_sr, γ̂_rd)`.
    pub selection: f64,
    /// `min(τ_sr·γ̂_sr, τ_rd·γ̂_rd)`.
    pub effective: f64,
}

impl DfBranchSnr {
    pub fn metric(&self, on: DfOutageOn) -> f64 {
        match on {
            DfOutageOn::SelectionSnr => self.selection,
            DfOutageOn::EffectiveSnr => self.effective,
        }
    }
}

pub fn df_branch_snrs(
    sr: &HopDraw,
    rd: &HopDraw,
    cfg: &NetworkConfig,
    branch: usize,
) -> DfBranchSnr {
    let terms = EffectiveSnrTerms::new(sr, rd, &cfg.branches[branch], cfg);
    df_from_terms(&terms, sr.est_power(), rd.est_power(), cfg.df_tau_mode)
}

pub(crate) fn df_from_terms(
    t: &EffectiveSnrTerms,
    sr_power: f64,
    rd_power: f64,
    mode: DfTauMode,
) -> DfBranchSnr {
    let (gain_sr, gain_rd) = match mode {
        DfTauMode::AsWritten => (sr_power, rd_power),
        DfTauMode::Normalized => (1.0, 1.0),
    };
    let tau_sr = t.rho_sr * t.rho_sr * gain_sr / (1.0 + t.eps_sr);
    let tau_rd = t.rho_rd * t.rho_rd * gain_rd / (1.0 + t.eps_rd);
    DfBranchSnr {
        selection: t.gamma_sr_hat.min(t.gamma_rd_hat),
        effective: (tau_sr * t.gamma_sr_hat).min(tau_rd * t.gamma_rd_hat),
    }
}

/// AF destination SNR of one branch under `cfg.af_snr_mode`.
pub fn af_effective_snr(sr: &HopDraw, rd: &HopDraw, cfg: &NetworkConfig, branch: usize) -> f64 {
    let b = &cfg.branches[branch];
    let terms = EffectiveSnrTerms::new(sr, rd, b, cfg);
    af_from_terms(&terms, cfg.af_snr_mode, b, cfg)
}

pub(crate) fn af_from_terms(
    t: &EffectiveSnrTerms,
    mode: AfSnrMode,
    branch: &Branch,
    cfg: &NetworkConfig,
) -> f64 {
    let (g_sr, g_rd) = (t.gamma_sr_hat, t.gamma_rd_hat);
    if g_sr == 0.0 || g_rd == 0.0 {
        return 0.0;
    }
    let rho2 = t.rho_sr * t.rho_sr * t.rho_rd * t.rho_rd;
    let core = t.lambda_sr * g_sr + t.lambda_rd * g_rd;
    let snr = match mode {
        AfSnrMode::Simplified => rho2 * g_sr * g_rd / core,
        AfSnrMode::Exact => rho2 * g_sr * g_rd / (core + t.eps_sr * t.eps_rd + 1.0),
        AfSnrMode::ExactAsPrinted => {
            let (a_sr, a_rd) = (cfg.avg_snr_sr(), cfg.avg_snr_rd());
            let (var_sr, var_rd) = (branch.sr.error_variance(), branch.rd.error_variance());
            let num = a_sr * a_rd * t.rho_sr * t.rho_rd * (g_sr / a_sr) * (g_rd / a_rd);
            let den = g_sr * (1.0 + t.rho_sr * t.rho_sr * a_rd) * var_rd
                + g_rd * (1.0 + t.rho_rd * t.rho_rd * a_sr) * var_sr
                + a_sr * var_sr * a_rd * var_rd
                + 1.0;
            num / den
        }
    };
    if snr.is_nan() {
        0.0
    } else {
        snr
    }
}

/// Index and value of the largest entry; ties go to the lowest index.
pub fn select_best(values: &[f64]) -> Result<(usize, f64)> {
    let (&first, rest) = values
        .split_first()
        .ok_or_else(|| Error::Domain("cannot select from an empty list".into()))?;
    let mut best = (0, first);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.1 {
            best = (i + 1, v);
        }
    }
    Ok(best)
}
