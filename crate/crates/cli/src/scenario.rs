//! Scenario files: TOML documents describing one experiment.
//!
//! Every section and key is optional except `protocol`; unknown keys are
//! rejected. Command-line overrides (`--set a.b=value`) are merged into the
//! parsed document before it is checked against the schema, so they always
//! win over file values.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use outage_core::{
    AfSnrMode, Branch, DfOutageOn, DfTauMode, HopParams, NetworkConfig, Protocol, Sampling,
    SweepAxis,
};

use crate::error::CliError;

/// Largest number of points a P/N0 range may expand to.
const MAX_RANGE_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub protocol: Protocol,
    /// Outage threshold `γ_th` (linear).
    #[serde(default = "default_gamma_th")]
    pub gamma_th: f64,
    #[serde(default)]
    pub network: Network,
    #[serde(default)]
    pub powers: Powers,
    #[serde(default)]
    pub modes: Modes,
    #[serde(default)]
    pub mc: Mc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    /// Number of relays `L`; defaults to 3, or to the length of `branches`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relays: Option<usize>,
    /// Estimation correlation for every hop without its own `rho`.
    #[serde(default = "one")]
    pub rho: f64,
    /// Source→relay hop shared by all relays when `branches` is empty.
    #[serde(default)]
    pub sr: HopSpec,
    /// Relay→destination hop shared by all relays when `branches` is empty.
    #[serde(default)]
    pub rd: HopSpec,
    /// Per-relay hops for non-identical branches.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<BranchSpec>,
}

impl Default for Network {
    fn default() -> Self {
        Self {
            relays: None,
            rho: 1.0,
            sr: HopSpec::default(),
            rd: HopSpec::default(),
            branches: Vec::new(),
        }
    }
}

/// Log-normal hop: `|h|` in dB is `N(mu_db, sigma_db²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopSpec {
    #[serde(default)]
    pub mu_db: f64,
    #[serde(default = "default_sigma_db")]
    pub sigma_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl Default for HopSpec {
    fn default() -> Self {
        Self {
            mu_db: 0.0,
            sigma_db: default_sigma_db(),
            rho: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    #[serde(default)]
    pub sr: HopSpec,
    #[serde(default)]
    pub rd: HopSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Powers {
    /// `P_r = P_s` when true; otherwise `P_r = P_s·10^(relay_offset_db/10)`.
    #[serde(default = "yes")]
    pub equal_power: bool,
    #[serde(default)]
    pub relay_offset_db: f64,
    #[serde(default = "one")]
    pub n0: f64,
    /// `10·log10(P_s/N0)` points for `analytic`, `simulate` and `compare`.
    #[serde(default)]
    pub snr_db: DbRange,
}

impl Default for Powers {
    fn default() -> Self {
        Self {
            equal_power: true,
            relay_offset_db: 0.0,
            n0: 1.0,
            snr_db: DbRange::default(),
        }
    }
}

/// Inclusive range `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbRange {
    #[serde(default)]
    pub start: f64,
    #[serde(default = "default_stop_db")]
    pub stop: f64,
    #[serde(default = "one")]
    pub step: f64,
}

impl Default for DbRange {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: default_stop_db(),
            step: 1.0,
        }
    }
}

impl DbRange {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::invalid(
                "powers.snr_db",
                "start and stop must be finite",
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::invalid("powers.snr_db.step", "must be positive"));
        }
        if self.stop < self.start {
            return Err(CliError::invalid(
                "powers.snr_db.stop",
                "must not be below start",
            ));
        }
        // Tolerate ranges whose span is a multiple of the step up to rounding.
        let n = ((self.stop - self.start) / self.step + 1e-9).floor();
        if n >= MAX_RANGE_POINTS as f64 {
            return Err(CliError::invalid(
                "powers.snr_db.step",
                "range has too many points",
            ));
        }
        Ok((0..=n as usize)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modes {
    #[serde(default)]
    pub df_tau: DfTauMode,
    #[serde(default)]
    pub df_outage_on: DfOutageOn,
    #[serde(default)]
    pub af_snr: AfSnrMode,
    #[serde(default)]
    pub sampling: Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mc {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "one_u64")]
    pub seed: u64,
}

impl Default for Mc {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            seed: 1,
        }
    }
}

/// Which engines the `sweep` command runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engines {
    Analytic,
    Mc,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    /// `10·log10(P_s/N0)` held fixed while another axis varies.
    #[serde(default = "default_at_db")]
    pub at_db: f64,
    #[serde(default)]
    pub engines: Engines,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

fn default_gamma_th() -> f64 {
    3.0
}

fn default_sigma_db() -> f64 {
    4.0
}

fn default_stop_db() -> f64 {
    30.0
}

fn default_at_db() -> f64 {
    25.0
}

fn default_trials() -> u64 {
    1_000_000
}

fn one() -> f64 {
    1.0
}

fn one_u64() -> u64 {
    1
}

fn yes() -> bool {
    true
}

/// One `--set key=value` override.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: toml::Value,
}

impl Override {
    /// Parses `key=value`. The value is read as a TOML value (`0.9`, `true`,
    /// `[1, 2]`, `"af"`); anything that is not valid TOML is taken as a bare
    /// string, so `protocol=af` works without quoting.
    pub fn parse(arg: &str) -> Result<Self, CliError> {
        let bad = |message: &str| CliError::Override {
            arg: arg.to_string(),
            message: message.to_string(),
        };
        let (key, raw) = arg
            .split_once('=')
            .ok_or_else(|| bad("expected key=value"))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(|part| part.trim().is_empty()) {
            return Err(bad("empty key segment"));
        }
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        Ok(Self {
            key: key.to_string(),
            value,
        })
    }

    pub fn string(key: &str, value: &str) -> Self {
        Self {
            key: key.to_string(),
            value: toml::Value::String(value.to_string()),
        }
    }

    fn apply(&self, table: &mut toml::Table) -> Result<(), CliError> {
        let parts: Vec<&str> = self.key.split('.').map(str::trim).collect();
        let (last, parents) = parts.split_last().expect("validated non-empty");
        let mut cur = table;
        for part in parents {
            let entry = cur
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry.as_table_mut().ok_or_else(|| CliError::Override {
                arg: self.key.clone(),
                message: format!("`{part}` is not a table"),
            })?;
        }
        cur.insert(last.to_string(), self.value.clone());
        Ok(())
    }
}

/// Line and column (both 1-based) of byte `offset` in `text`.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(source_name: &str, text: &str, e: &toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
    CliError::Parse {
        source_name: source_name.to_string(),
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

impl Scenario {
    /// Parses scenario `text`, merges `overrides` and fills derived defaults.
    /// `source_name` labels diagnostics.
    pub fn parse(text: &str, source_name: &str, overrides: &[Override]) -> Result<Self, CliError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| parse_error(source_name, text, &e))?;
        let mut scenario: Scenario = if overrides.is_empty() {
            toml::from_str(text).map_err(|e| parse_error(source_name, text, &e))?
        } else {
            for o in overrides {
                o.apply(&mut table)?;
            }
            toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Schema {
                    source_name: source_name.to_string(),
                    message: e.message().trim().to_string(),
                })?
        };
        if scenario.network.relays.is_none() {
            let n = scenario.network.branches.len();
            scenario.network.relays = Some(if n == 0 { 3 } else { n });
        }
        Ok(scenario)
    }

    /// The effective scenario as TOML, suitable for feeding back in.
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// SHA-256 of the effective scenario with the output section cleared,
    /// so the digest identifies the numbers rather than where they went.
    pub fn digest(&self) -> Result<String, CliError> {
        let mut canonical = self.clone();
        canonical.output = Output::default();
        let hash = Sha256::digest(canonical.to_toml()?.as_bytes());
        Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
    }

    fn hop(&self, spec: &HopSpec, path: &str) -> Result<HopParams, CliError> {
        let rho = spec.rho.unwrap_or(self.network.rho);
        HopParams::new(spec.mu_db, spec.sigma_db, rho).map_err(|e| {
            let field = match e.parameter() {
                Some("rho") if spec.rho.is_none() => "network.rho".to_string(),
                Some(p) => format!("{path}.{p}"),
                None => path.to_string(),
            };
            CliError::invalid(field, e.to_string())
        })
    }

    fn branches(&self) -> Result<Vec<Branch>, CliError> {
        let relays = self.network.relays.unwrap_or(3);
        if relays == 0 {
            return Err(CliError::invalid(
                "network.relays",
                "need at least one relay",
            ));
        }
        if self.network.branches.is_empty() {
            let sr = self.hop(&self.network.sr, "network.sr")?;
            let rd = self.hop(&self.network.rd, "network.rd")?;
            return Ok(vec![Branch::new(sr, rd); relays]);
        }
        if relays != self.network.branches.len() {
            return Err(CliError::invalid(
                "network.relays",
                format!(
                    "{relays} does not match {} listed branches",
                    self.network.branches.len()
                ),
            ));
        }
        self.network
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Ok(Branch::new(
                    self.hop(&b.sr, &format!("network.branches[{i}].sr"))?,
                    self.hop(&b.rd, &format!("network.branches[{i}].rd"))?,
                ))
            })
            .collect()
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        self.network_config(0.0).map(|_| ())
    }

    /// Engine configuration at `snr_db = 10·log10(P_s/N0)`.
    pub fn network_config(&self, snr_db: f64) -> Result<NetworkConfig, CliError> {
        if !(self.gamma_th >= 0.0 && self.gamma_th.is_finite()) {
            return Err(CliError::invalid(
                "gamma_th",
                "must be finite and non-negative",
            ));
        }
        let p = &self.powers;
        if !(p.n0 > 0.0 && p.n0.is_finite()) {
            return Err(CliError::invalid(
                "powers.n0",
                "noise power must be positive",
            ));
        }
        if !p.relay_offset_db.is_finite() {
            return Err(CliError::invalid(
                "powers.relay_offset_db",
                "must be finite",
            ));
        }
        if p.equal_power && p.relay_offset_db != 0.0 {
            return Err(CliError::invalid(
                "powers.relay_offset_db",
                "must be 0 when powers.equal_power is true",
            ));
        }
        if !snr_db.is_finite() {
            return Err(CliError::invalid("powers.snr_db", "must be finite"));
        }
        if self.mc.trials == 0 {
            return Err(CliError::invalid("mc.trials", "need at least one trial"));
        }
        let p_s = p.n0 * 10f64.powf(snr_db / 10.0);
        let cfg = NetworkConfig {
            branches: self.branches()?,
            p_s,
            p_r: p_s * 10f64.powf(p.relay_offset_db / 10.0),
            n0: p.n0,
            gamma_th: self.gamma_th,
            df_tau_mode: self.modes.df_tau,
            df_outage_on: self.modes.df_outage_on,
            af_snr_mode: self.modes.af_snr,
        };
        cfg.validate().map_err(|e| {
            let field = match e.parameter() {
                Some("p_s") | Some("p_r") => "powers",
                Some("n0") => "powers.n0",
                Some("gamma_th") => "gamma_th",
                _ => "network",
            };
            CliError::invalid(field, e.to_string())
        })?;
        Ok(cfg)
    }
}
