//! Fading coefficients under the Gaussian estimation-error model
//! `h = ρ·ĥ + e`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lognormal::LogNormalDb;

/// Fading and estimation quality of a single hop.
///
/// The coefficient magnitude is `10^(X/10)` with `X ~ N(mu_x_db, sigma_x_db²)`;
/// `rho` is the correlation between true and estimated coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopParams {
    mu_x_db: f64,
    sigma_x_db: f64,
    rho: f64,
}

impl HopParams {
    pub fn new(mu_x_db: f64, sigma_x_db: f64, rho: f64) -> Result<Self> {
        LogNormalDb::new(mu_x_db, sigma_x_db)?;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::invalid("rho", rho, "must lie in (0, 1]"));
        }
        Ok(Self {
            mu_x_db,
            sigma_x_db,
            rho,
        })
    }

    /// Hop with perfect channel knowledge.
    pub fn perfect(mu_x_db: f64, sigma_x_db: f64) -> Result<Self> {
        Self::new(mu_x_db, sigma_x_db, 1.0)
    }

    pub fn mu_x_db(&self) -> f64 {
        self.mu_x_db
    }

    pub fn sigma_x_db(&self) -> f64 {
        self.sigma_x_db
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(self.mu_x_db, self.sigma_x_db, rho)
    }

    /// Distribution of the coefficient magnitude `|h|`.
    pub fn magnitude(&self) -> LogNormalDb {
        LogNormalDb::new(self.mu_x_db, self.sigma_x_db).expect("validated in HopParams::new")
    }

    /// Estimation error variance `σ_e² = (1 − ρ)·σ_h²`, where `σ_h²` is the
    /// linear-domain variance of `|h|`.
    pub fn error_variance(&self) -> f64 {
        let (_, var) = self.magnitude().moments();
        (1.0 - self.rho) * var
    }
}

/// Which coefficient of the pair `(h, ĥ)` is drawn log-normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `ĥ` is log-normal and `h = ρ·ĥ + e`; matches the analytic model exactly.
    EstLognormal,
    /// `h` is log-normal and `ĥ = (h − e)/ρ`, so `ĥ` is only approximately
    /// log-normal.
    #[default]
    TrueLognormal,
}

/// One realization of a hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopDraw {
    pub h_true: Complex64,
    pub h_est: Complex64,
    pub e: Complex64,
}

impl HopDraw {
    /// `|ĥ|²`, the only quantity the SNR formulas consume.
    pub fn est_power(&self) -> f64 {
        self.h_est.norm_sqr()
    }
}

/// Draws one hop realization.
///
/// Every call consumes exactly four variates in the same order in both
/// modes (dB normal, phase, error real part, error imaginary part), so the
/// two modes see identical magnitudes from identical streams when `ρ = 1`.
/// `h_true` is always recomputed as `ρ·ĥ + e` so the reconstruction identity
/// holds bit-exactly.
pub fn sample_hop<R: Rng + ?Sized>(hop: &HopParams, sampling: Sampling, rng: &mut R) -> HopDraw {
    let z: f64 = rng.sample(StandardNormal);
    let phase = TAU * rng.random::<f64>();
    let er: f64 = rng.sample(StandardNormal);
    let ei: f64 = rng.sample(StandardNormal);

    let x_db = hop.mu_x_db + hop.sigma_x_db * z;
    let lognormal = Complex64::from_polar(10f64.powf(x_db / 10.0), phase);
    let e_scale = (0.5 * hop.error_variance()).sqrt();
    let e = Complex64::new(e_scale * er, e_scale * ei);

    let h_est = match sampling {
        Sampling::EstLognormal => lognormal,
        Sampling::TrueLognormal => (lognormal - e) / hop.rho,
    };
    HopDraw {
        h_true: h_est * hop.rho + e,
        h_est,
        e,
    }
}
