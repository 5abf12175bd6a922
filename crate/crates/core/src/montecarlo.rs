//! Monte Carlo outage estimation with reproducible per-trial substreams.
//!
//! Trial `t` of a run seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `t`. Trials are
//! therefore independent of scheduling, and the outage count (an integer sum)
//! is identical for any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{af_outage, df_outage};
use crate::channel::{sample_hop, Sampling};
use crate::error::{Error, Result};
use crate::snr::{af_from_terms, df_from_terms, EffectiveSnrTerms, NetworkConfig};

/// Generator and substream derivation, recorded in output metadata.
pub const GENERATOR_ID: &str =
    "rand_chacha-0.9 ChaCha8Rng; key=seed_from_u64(seed); stream=trial index; point seed=splitmix64(seed, point index)";

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Below this many outage events an estimate is flagged low-confidence.
pub const LOW_CONFIDENCE_EVENTS: u64 = 20;

const CHUNK: u64 = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Df,
    Af,
}

/// Empirical outage estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub p_hat: f64,
    pub trials: u64,
    pub outage_count: u64,
    /// 95% Wilson score bounds.
    pub ci_low: f64,
    pub ci_high: f64,
    pub low_confidence: bool,
}

impl McResult {
    pub fn from_counts(outage_count: u64, trials: u64) -> Self {
        let p_hat = outage_count as f64 / trials as f64;
        let (ci_low, ci_high) = wilson_interval(outage_count, trials, Z_95);
        Self {
            p_hat,
            trials,
            outage_count,
            ci_low,
            ci_high,
            low_confidence: outage_count < LOW_CONFIDENCE_EVENTS,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if k == n {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (lo, hi)
}

/// Random stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Seed of sweep point `index`: a SplitMix64 step over `(seed, index)`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Configuration-dependent terms hoisted out of the trial loop.
struct Prepared<'a> {
    cfg: &'a NetworkConfig,
    terms: Vec<EffectiveSnrTerms>,
    protocol: Protocol,
    sampling: Sampling,
}

impl<'a> Prepared<'a> {
    fn new(cfg: &'a NetworkConfig, protocol: Protocol, sampling: Sampling) -> Self {
        let terms = cfg
            .branches
            .iter()
            .map(|b| EffectiveSnrTerms::for_branch(b, cfg))
            .collect();
        Self {
            cfg,
            terms,
            protocol,
            sampling,
        }
    }

    /// Selected branch metric of one trial. Branches are visited in order;
    /// within a branch the source→relay hop is drawn before relay→destination.
    fn trial(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (branch, base) in self.cfg.branches.iter().zip(&self.terms) {
            let sr = sample_hop(&branch.sr, self.sampling, rng);
            let rd = sample_hop(&branch.rd, self.sampling, rng);
            let t = base.with_draws(&sr, &rd, self.cfg);
            let metric = match self.protocol {
                Protocol::Df => {
                    df_from_terms(&t, sr.est_power(), rd.est_power(), self.cfg.df_tau_mode)
                        .metric(self.cfg.df_outage_on)
                }
                Protocol::Af => af_from_terms(&t, self.cfg.af_snr_mode, branch, self.cfg),
            };
            // Strict comparison keeps the lowest index on ties.
            if metric > best {
                best = metric;
            }
        }
        best
    }
}

/// Selected-branch metric of trial `trial`, exactly as counted by
/// [`estimate_outage`].
pub fn trial_metric(
    cfg: &NetworkConfig,
    protocol: Protocol,
    sampling: Sampling,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    cfg.validate()?;
    let prepared = Prepared::new(cfg, protocol, sampling);
    Ok(prepared.trial(&mut trial_rng(seed, trial)))
}

/// Estimates `P(selected metric ≤ γ_th)` over `trials` independent trials.
///
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn estimate_outage(
    cfg: &NetworkConfig,
    protocol: Protocol,
    sampling: Sampling,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::invalid("trials", 0.0, "need at least one trial"));
    }
    cfg.validate()?;
    let prepared = Prepared::new(cfg, protocol, sampling);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks = trials.div_ceil(CHUNK);
    let outages: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(trials);
            let mut count = 0u64;
            for t in c * CHUNK..end {
                let mut rng = base.clone();
                rng.set_stream(t);
                if prepared.trial(&mut rng) <= cfg.gamma_th {
                    count += 1;
                }
            }
            count
        })
        .sum();
    Ok(McResult::from_counts(outages, trials))
}

/// Closed-form outage for `protocol`.
pub fn analytic_outage(cfg: &NetworkConfig, protocol: Protocol) -> Result<f64> {
    match protocol {
        Protocol::Df => df_outage(cfg),
        Protocol::Af => af_outage(cfg),
    }
}

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `10·log10(P_s/N0)`; the relay power keeps its ratio to the source.
    PowerDb,
    /// Estimation correlation, applied to every hop.
    Rho,
    GammaTh,
    /// Number of relays. Branches are taken from the template in order,
    /// cycling when more are requested than the template holds.
    #[serde(rename = "relays", alias = "l")]
    Relays,
}

impl SweepAxis {
    /// Configuration at axis value `v`.
    pub fn apply(self, template: &NetworkConfig, v: f64) -> Result<NetworkConfig> {
        let mut cfg = template.clone();
        match self {
            SweepAxis::PowerDb => {
                if !v.is_finite() {
                    return Err(Error::invalid("power_db", v, "must be finite"));
                }
                let ratio = template.p_r / template.p_s;
                cfg.p_s = template.n0 * 10f64.powf(v / 10.0);
                cfg.p_r = cfg.p_s * ratio;
            }
            SweepAxis::Rho => {
                for b in &mut cfg.branches {
                    b.sr = b.sr.with_rho(v)?;
                    b.rd = b.rd.with_rho(v)?;
                }
            }
            SweepAxis::GammaTh => cfg.gamma_th = v,
            SweepAxis::Relays => {
                if !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
                    return Err(Error::invalid("relays", v, "must be a positive integer"));
                }
                cfg.branches = template
                    .branches
                    .iter()
                    .cycle()
                    .take(v as usize)
                    .copied()
                    .collect();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What a sweep evaluates at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub protocol: Protocol,
    pub sampling: Sampling,
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub run_analytic: bool,
    pub run_mc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub axis_value: f64,
    pub analytic: Option<f64>,
    pub mc: Option<McResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub axis_value: f64,
    pub message: String,
}

/// Sweep output; points are sorted by axis value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    pub points: Vec<CurvePoint>,
    pub errors: Vec<PointError>,
}

/// Evaluates every point of `spec`. Points are sorted first and point `i` of
/// the sorted list uses seed `point_seed(seed, i)`, so results do not depend
/// on the order the points were given in. A failing point is recorded in
/// `errors` and the sweep continues.
pub fn sweep(template: &NetworkConfig, spec: &SweepSpec) -> Result<OutageCurve> {
    if spec.points.is_empty() {
        return Err(Error::Domain("sweep needs at least one point".into()));
    }
    if spec.run_mc && spec.trials == 0 {
        return Err(Error::invalid("trials", 0.0, "need at least one trial"));
    }
    let mut points = spec.points.clone();
    points.sort_by(f64::total_cmp);

    let mut curve = OutageCurve {
        points: Vec::with_capacity(points.len()),
        errors: Vec::new(),
    };
    for (i, &v) in points.iter().enumerate() {
        match evaluate_point(template, spec, v, point_seed(spec.seed, i as u64)) {
            Ok(p) => curve.points.push(p),
            Err(e) => curve.errors.push(PointError {
                axis_value: v,
                message: e.to_string(),
            }),
        }
    }
    Ok(curve)
}

fn evaluate_point(
    template: &NetworkConfig,
    spec: &SweepSpec,
    v: f64,
    seed: u64,
) -> Result<CurvePoint> {
    let cfg = spec.axis.apply(template, v)?;
    let analytic = if spec.run_analytic {
        Some(analytic_outage(&cfg, spec.protocol)?)
    } else {
        None
    };
    let mc = if spec.run_mc {
        Some(estimate_outage(
            &cfg,
            spec.protocol,
            spec.sampling,
            spec.trials,
            seed,
        )?)
    } else {
        None
    };
    Ok(CurvePoint {
        axis_value: v,
        analytic,
        mc,
    })
}
