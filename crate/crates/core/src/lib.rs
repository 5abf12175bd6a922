//! Outage probability of opportunistic relaying over log-normal fading with
//! imperfect channel estimation.
//!
//! - [`lognormal`]: dB-domain log-normal algebra and the Wilkinson sum fit.
//! - [`channel`]: true/estimated coefficient sampling under `h = ρĥ + e`.
//! - [`snr`]: per-trial DF and AF effective SNRs and relay selection.
//! - [`analytic`]: closed-form outage for DF (best-worst) and AF
//!   (best harmonic mean).
//! - [`montecarlo`]: reproducible parallel outage estimation and sweeps.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod lognormal;
pub mod montecarlo;
pub mod snr;

pub use analytic::{
    af_branch_distribution, af_outage, df_outage, hop_snr_distribution, BranchDistributions,
};
pub use channel::{sample_hop, HopDraw, HopParams, Sampling};
pub use error::{Error, Result};
pub use lognormal::{gaussian_tail_q, wilkinson_sum, LogNormalDb, WilkinsonFit};
pub use montecarlo::{
    estimate_outage, sweep, McResult, OutageCurve, Protocol, SweepAxis, SweepSpec,
};
pub use snr::{
    af_effective_snr, df_branch_snrs, select_best, AfSnrMode, Branch, DfOutageOn, DfTauMode,
    EffectiveSnrTerms, NetworkConfig,
};
