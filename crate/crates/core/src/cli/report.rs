use std::io;

use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// One `(point, direction, check, label)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub check: String,
    pub label: String,
    pub point_index: usize,
    /// `None` for checks that only depend on the point.
    pub direction_index: Option<usize>,
    pub residual: Option<f64>,
    /// `None` for informational cells, which always pass.
    pub threshold: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

impl Cell {
    pub fn measured(
        check: &str,
        label: &str,
        point_index: usize,
        direction_index: Option<usize>,
        residual: f64,
        threshold: Option<f64>,
    ) -> Cell {
        let pass = match threshold {
            Some(t) => residual <= t,
            None => residual.is_finite(),
        };
        Cell {
            check: check.into(),
            label: label.into(),
            point_index,
            direction_index,
            residual: Some(residual),
            threshold,
            pass,
            error: None,
        }
    }

    pub fn failed(check: &str, point_index: usize, direction_index: Option<usize>, err: &Error) -> Cell {
        Cell {
            check: check.into(),
            label: "error".into(),
            point_index,
            direction_index,
            residual: None,
            threshold: None,
            pass: false,
            error: Some(err.to_string()),
        }
    }

    fn sort_key(&self) -> (&str, usize, Option<usize>, &str) {
        (&self.check, self.point_index, self.direction_index, &self.label)
    }

    fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "label": self.label,
            "point_index": self.point_index,
            "direction_index": self.direction_index,
            "residual": self.residual,
            "threshold": self.threshold,
            "pass": self.pass,
            "error": self.error,
        })
    }
}

/// Puts cells in canonical order.
pub fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub model: String,
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    pub cells: Vec<Cell>,
    pub config_hash: String,
    pub seeds: Map<String, Value>,
    pub timestamp: u64,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| !c.pass).count()
    }

    pub fn errors(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    fn base_json(&self) -> Map<String, Value> {
        let mut root = Map::new();
        root.insert(
            "aggregate".into(),
            json!({
                "pass": self.pass(),
                "cells": self.cells.len(),
                "failed": self.failed(),
                "errors": self.errors(),
            }),
        );
        root.insert(
            "environment".into(),
            json!({
                "config_hash": self.config_hash,
                "seeds": Value::Object(self.seeds.clone()),
                "version": env!("CARGO_PKG_VERSION"),
            }),
        );
        root.insert("model".into(), json!({ "name": self.model, "dim": self.dim }));
        root.insert("points".into(), json!(self.points));
        root.insert("directions".into(), json!(self.directions));
        root.insert("timestamp".into(), json!(self.timestamp));
        root
    }

    pub fn to_json(&self) -> Value {
        let mut root = self.base_json();
        root.insert("kind".into(), json!("check"));
        root.insert("cells".into(), Value::Array(self.cells.iter().map(Cell::to_json).collect()));
        Value::Object(root)
    }

    /// Max and median of each `check.label` residual over the sample.
    pub fn summary(&self) -> Map<String, Value> {
        let mut groups: std::collections::BTreeMap<String, Vec<&Cell>> = Default::default();
        for c in &self.cells {
            groups.entry(format!("{}.{}", c.check, c.label)).or_default().push(c);
        }
        let mut out = Map::new();
        for (key, cells) in groups {
            let mut values: Vec<f64> = cells.iter().filter_map(|c| c.residual).collect();
            values.sort_by(f64::total_cmp);
            let median = if values.is_empty() {
                None
            } else if values.len() % 2 == 1 {
                Some(values[values.len() / 2])
            } else {
                Some(0.5 * (values[values.len() / 2 - 1] + values[values.len() / 2]))
            };
            out.insert(
                key,
                json!({
                    "count": cells.len(),
                    "errors": cells.iter().filter(|c| c.error.is_some()).count(),
                    "failed": cells.iter().filter(|c| !c.pass).count(),
                    "max": values.last().copied(),
                    "min": values.first().copied(),
                    "median": median,
                    "threshold": cells.iter().find_map(|c| c.threshold),
                }),
            );
        }
        out
    }

    pub fn to_sweep_json(&self) -> Value {
        let mut root = self.base_json();
        root.insert("kind".into(), json!("sweep"));
        root.insert("summary".into(), Value::Object(self.summary()));
        let failures: Vec<Value> = self.cells.iter().filter(|c| !c.pass).map(Cell::to_json).collect();
        root.insert("failures".into(), Value::Array(failures));
        Value::Object(root)
    }
}

/// Writes floats with 17 significant digits so they round-trip exactly.
struct RoundTrip;

impl Formatter for RoundTrip {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with sorted keys and round-trip floats.
pub fn render(value: &Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip);
    serde::Serialize::serialize(value, &mut ser).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
