//! Running a scenario and rendering the resulting curve.

use std::fmt::Write as _;

use serde_json::{json, Value};

use outage_core::montecarlo::GENERATOR_ID;
use outage_core::{sweep, OutageCurve, SweepAxis, SweepSpec};

use crate::error::CliError;
use crate::scenario::{Engines, Scenario};

/// Fixed leading columns of every output table.
pub const BASE_COLUMNS: [&str; 7] = [
    "axis",
    "pout_analytic",
    "pout_mc",
    "ci_low",
    "ci_high",
    "trials",
    "outage_count",
];
/// Gap columns appended when both engines ran.
pub const GAP_COLUMNS: [&str; 2] = ["delta", "delta_log10"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Closed form over the P/N0 range.
    Analytic,
    /// Monte Carlo over the P/N0 range.
    Simulate,
    /// Both engines over the P/N0 range, with gap columns.
    Compare,
    /// Both engines (by default) over the `[sweep]` axis.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: Command,
    pub axis: SweepAxis,
    pub scenario: Scenario,
    pub scenario_toml: String,
    pub config_digest: String,
}

impl Metadata {
    pub fn axis_name(&self) -> String {
        wire_name(&self.axis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Metadata,
    pub curve: OutageCurve,
    pub gap_columns: bool,
}

/// Runs `command` on a scenario. Failing sweep points are kept in
/// `curve.errors`; the caller decides how to report them.
pub fn run(command: Command, scenario: &Scenario) -> Result<Report, CliError> {
    scenario.validate()?;
    let (axis, points, at_db, engines) = match command {
        Command::Sweep => {
            let s = scenario.sweep.as_ref().ok_or_else(|| {
                CliError::invalid("sweep", "the sweep command needs a [sweep] section")
            })?;
            if s.points.is_empty() {
                return Err(CliError::invalid("sweep.points", "need at least one point"));
            }
            (s.axis, s.points.clone(), s.at_db, s.engines)
        }
        _ => {
            let engines = match command {
                Command::Analytic => Engines::Analytic,
                Command::Simulate => Engines::Mc,
                _ => Engines::Both,
            };
            let points = scenario.powers.snr_db.points()?;
            (SweepAxis::PowerDb, points.clone(), points[0], engines)
        }
    };
    let template = scenario.network_config(at_db)?;
    let spec = SweepSpec {
        protocol: scenario.protocol,
        sampling: scenario.modes.sampling,
        axis,
        points,
        trials: scenario.mc.trials,
        seed: scenario.mc.seed,
        run_analytic: engines != Engines::Mc,
        run_mc: engines != Engines::Analytic,
    };
    let curve = sweep(&template, &spec)?;
    Ok(Report {
        metadata: Metadata {
            command,
            axis,
            scenario: scenario.clone(),
            scenario_toml: scenario.to_toml()?,
            config_digest: scenario.digest()?,
        },
        curve,
        gap_columns: engines == Engines::Both,
    })
}

/// Plain decimal, or shortest scientific notation for nonzero magnitudes
/// below 1e-4. Both forms round-trip exactly and ignore locale.
pub fn format_number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// `(analytic − mc, log10(analytic) − log10(mc))`, each present only when
/// defined.
fn gaps(analytic: Option<f64>, mc: Option<f64>) -> (Option<f64>, Option<f64>) {
    match (analytic, mc) {
        (Some(a), Some(m)) => {
            let log = (a > 0.0 && m > 0.0).then(|| a.log10() - m.log10());
            (Some(a - m), log)
        }
        _ => (None, None),
    }
}

impl Report {
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = BASE_COLUMNS.to_vec();
        if self.gap_columns {
            cols.extend(GAP_COLUMNS);
        }
        cols
    }

    /// Row cells in column order; `None` marks an engine that did not run.
    fn rows(&self) -> impl Iterator<Item = Vec<Option<Cell>>> + '_ {
        self.curve.points.iter().map(move |p| {
            let mc = p.mc.as_ref();
            let mut row = vec![
                Some(Cell::Float(p.axis_value)),
                p.analytic.map(Cell::Float),
                mc.map(|m| Cell::Float(m.p_hat)),
                mc.map(|m| Cell::Float(m.ci_low)),
                mc.map(|m| Cell::Float(m.ci_high)),
                mc.map(|m| Cell::Int(m.trials)),
                mc.map(|m| Cell::Int(m.outage_count)),
            ];
            if self.gap_columns {
                let (d, dl) = gaps(p.analytic, mc.map(|m| m.p_hat));
                row.push(d.map(Cell::Float));
                row.push(dl.map(Cell::Float));
            }
            row
        })
    }

    /// Header line followed by one row per point, sorted by axis value.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(String::new, Cell::to_text))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn metadata_json(&self) -> Value {
        let m = &self.metadata;
        let s = &m.scenario;
        json!({
            "command": m.command.name(),
            "protocol": s.protocol,
            "axis": m.axis,
            "modes": s.modes,
            "seed": s.mc.seed,
            "trials": s.mc.trials,
            "generator": GENERATOR_ID,
            "config_digest": m.config_digest,
            "scenario": m.scenario_toml,
        })
    }

    /// JSON mirror of the CSV with the metadata block attached.
    pub fn to_json(&self) -> Result<String, CliError> {
        let rows: Vec<Value> = self
            .rows()
            .map(|row| {
                Value::Array(
                    row.into_iter()
                        .map(|c| match c {
                            Some(Cell::Float(v)) => json!(v),
                            Some(Cell::Int(v)) => json!(v),
                            None => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        let errors: Vec<Value> = self
            .curve
            .errors
            .iter()
            .map(|e| json!({"axis": e.axis_value, "message": e.message}))
            .collect();
        let doc = json!({
            "metadata": self.metadata_json(),
            "columns": self.columns(),
            "rows": rows,
            "errors": errors,
        });
        serde_json::to_string_pretty(&doc)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// Metadata sidecar: provenance as comments, then the effective scenario.
    /// The file is itself a valid scenario that reproduces the run.
    pub fn metadata_file(&self) -> String {
        let m = &self.metadata;
        let s = &m.scenario;
        let mut out = String::new();
        let _ = writeln!(out, "# relay-outage run metadata");
        let _ = writeln!(out, "# command: {}", m.command.name());
        let _ = writeln!(out, "# protocol: {}", wire_name(&s.protocol));
        let _ = writeln!(out, "# axis: {}", wire_name(&m.axis));
        let _ = writeln!(
            out,
            "# modes: df_tau={} df_outage_on={} af_snr={} sampling={}",
            wire_name(&s.modes.df_tau),
            wire_name(&s.modes.df_outage_on),
            wire_name(&s.modes.af_snr),
            wire_name(&s.modes.sampling)
        );
        let _ = writeln!(out, "# seed: {}", s.mc.seed);
        let _ = writeln!(out, "# generator: {GENERATOR_ID}");
        let _ = writeln!(out, "# config_digest: sha256:{}", m.config_digest);
        let _ = writeln!(
            out,
            "# reproduce: relay-outage {} --scenario <this file>",
            m.command.name()
        );
        out.push('\n');
        out.push_str(&m.scenario_toml);
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Float(f64),
    Int(u64),
}

impl Cell {
    fn to_text(self) -> String {
        match self {
            Cell::Float(v) => format_number(v),
            Cell::Int(v) => v.to_string(),
        }
    }
}

/// Serialized (snake_case) name of a unit enum value.
fn wire_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::from("?"),
    }
}
