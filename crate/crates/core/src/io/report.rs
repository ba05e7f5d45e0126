//! Plain-text reports: one `key=value` per line, lists written as
//! `key=[a, b, c]`. Values never contain newlines; list items never contain `, `.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::monitor::{rate_alert, DeltaReport, SeriesReport};
use crate::pipeline::MapDiagnostics;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), Value::Scalar(v.to_string())));
        self
    }

    pub fn list<T: ToString>(&mut self, key: &str, items: impl IntoIterator<Item = T>) -> &mut Self {
        self.entries
            .push((key.to_string(), Value::List(items.into_iter().map(|i| i.to_string()).collect())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_scalar(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Scalar(s)) => Some(s),
            _ => None,
        }
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = match v {
                Value::Scalar(s) => writeln!(out, "{k}={s}"),
                Value::List(items) => writeln!(out, "{k}=[{}]", items.join(", ")),
            };
        }
        out
    }

    pub fn parse(file: &str, text: &str) -> Result<Report> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(file, i + 1, format!("expected key=value, got `{line}`")));
            };
            if k.is_empty() {
                return Err(Error::parse(file, i + 1, "empty key"));
            }
            let value = match v.strip_prefix('[') {
                Some(inner) => {
                    let inner = inner
                        .strip_suffix(']')
                        .ok_or_else(|| Error::parse(file, i + 1, "unterminated list"))?;
                    Value::List(if inner.is_empty() {
                        Vec::new()
                    } else {
                        inner.split(", ").map(str::to_string).collect()
                    })
                }
                None => Value::Scalar(v.to_string()),
            };
            entries.push((k.to_string(), value));
        }
        Ok(Report { entries })
    }
}

pub fn diagnostics_report(d: &MapDiagnostics) -> Report {
    let mut r = Report::new();
    r.scalar("scans_in", d.scans_in)
        .scalar("scans_without_gravity", d.scans_without_gravity)
        .list("degenerate_scans", &d.degenerate_scans)
        .list("odometry_fallbacks", &d.odometry_fallbacks)
        .scalar("keyframes", d.keyframes)
        .scalar("uncolored_keyframes", d.uncolored_keyframes)
        .scalar("loop_candidates", d.loop_candidates)
        .scalar("loop_rejected", d.loop_rejected)
        .list("loop_edges", d.loop_edges.iter().map(|(a, b)| format!("{a}-{b}")))
        .scalar("point_pairs", d.point_pairs)
        .scalar("pgo_initial_cost", d.initial_cost)
        .scalar("pgo_final_cost", d.final_cost)
        .scalar("pgo_iterations", d.pgo_iterations)
        .scalar("pgo_converged", d.pgo_converged)
        .scalar("map_points", d.map_points)
        .scalar("temperature_set_points", d.temperature_set_points);
    r
}

pub fn delta_report(d: &DeltaReport) -> Report {
    let a = &d.alignment;
    let mut r = Report::new();
    r.list("alignment", a.to_row_major_12())
        .scalar("yaw_rad", a.yaw())
        .scalar("rms_nn_distance", d.rms_nn_distance)
        .scalar("matched_pairs", d.matched_pairs)
        .scalar("mean_dT", d.mean_dt)
        .scalar("empty_warning", d.empty_warning);
    r
}

/// Summary of a maturity series. `points` items are `x y z:maturity`;
/// `violations` items are `x y z:start_h:end_h:rate`.
pub fn maturity_report(s: &SeriesReport, datum: f64, max_rate: f64) -> Report {
    let m: Vec<f64> = s.records.iter().map(|r| r.maturity).collect();
    let (min, max) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = if m.is_empty() { 0.0 } else { m.iter().sum::<f64>() / m.len() as f64 };
    let at = |p: &crate::geometry::Vec3| format!("{} {} {}", p.x, p.y, p.z);
    let mut violations = Vec::new();
    for r in &s.records {
        for v in rate_alert(r, max_rate) {
            violations.push(format!("{}:{}:{}:{}", at(&r.position), v.start_h, v.end_h, v.rate));
        }
    }
    let mut rep = Report::new();
    rep.scalar("sessions", s.alignments.len())
        .scalar("datum_C", datum)
        .scalar("max_rate_C_per_h", max_rate)
        .scalar("candidate_points", s.candidates)
        .scalar("tracked_points", s.records.len())
        .scalar("maturity_min", if m.is_empty() { 0.0 } else { min })
        .scalar("maturity_mean", mean)
        .scalar("maturity_max", if m.is_empty() { 0.0 } else { max })
        .list("icp_rms", &s.icp_rms)
        .list("yaw_rad", s.alignments.iter().map(|a| a.yaw()))
        .list("violations", violations)
        .list("points", s.records.iter().map(|r| format!("{}:{}", at(&r.position), r.maturity)));
    rep
}
