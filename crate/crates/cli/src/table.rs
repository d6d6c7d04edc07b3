//! Result tables and their CSV and JSON encodings.
//!
//! Numbers are written with 17 significant digits, infinite ages as the token
//! `inf` and missing values as empty fields, so a CSV file parses back to the
//! exact table that produced it.

use std::io::{Read, Write};

use fsa_aoi_core::AoiValue;

use crate::CliError;

pub const INF_TOKEN: &str = "inf";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Inf,
    Missing,
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Self {
        if x.is_nan() {
            Cell::Missing
        } else if x == f64::INFINITY {
            Cell::Inf
        } else {
            Cell::Num(x)
        }
    }

    pub fn flag(b: bool) -> Self {
        Cell::Num(if b { 1.0 } else { 0.0 })
    }

    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Inf => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn as_aoi(&self) -> Option<AoiValue> {
        match self {
            Cell::Num(x) => Some(AoiValue::Finite(*x)),
            Cell::Inf => Some(AoiValue::Infinite(fsa_aoi_core::Divergence::Overflow)),
            _ => None,
        }
    }

    fn encode(&self) -> String {
        match self {
            Cell::Num(x) if x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 => format!("{}", *x as i64),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Inf => INF_TOKEN.to_string(),
            Cell::Missing => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn decode(s: &str) -> Self {
        if s.is_empty() {
            Cell::Missing
        } else if s == INF_TOKEN {
            Cell::Inf
        } else {
            match s.parse::<f64>() {
                Ok(x) => Cell::Num(x),
                Err(_) => Cell::Text(s.to_string()),
            }
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::json!(x),
            Cell::Inf => serde_json::json!(INF_TOKEN),
            Cell::Missing => serde_json::Value::Null,
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

impl From<AoiValue> for Cell {
    fn from(v: AoiValue) -> Self {
        match v {
            AoiValue::Finite(x) => Cell::num(x),
            AoiValue::Infinite(_) => Cell::Inf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }

    fn parse_header(h: &str) -> Self {
        match h.rsplit_once(" [") {
            Some((name, unit)) if unit.ends_with(']') => Column {
                name: name.to_string(),
                unit: unit[..unit.len() - 1].to_string(),
            },
            _ => Column {
                name: h.to_string(),
                unit: String::new(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

/// One row as (column name, unit, value) triples.
pub type Record = Vec<(&'static str, &'static str, Cell)>;

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::num(x)
    }
}

impl Table {
    /// Appends a row, adding any columns not seen before.
    pub fn push(&mut self, rec: Record) {
        let mut cells = vec![Cell::Missing; self.columns.len()];
        for (name, unit, cell) in rec {
            let idx = match self.column(name) {
                Some(i) => i,
                None => {
                    self.columns.push(Column {
                        name: name.to_string(),
                        unit: unit.to_string(),
                    });
                    for r in &mut self.rows {
                        r.push(Cell::Missing);
                    }
                    cells.push(Cell::Missing);
                    self.columns.len() - 1
                }
            };
            cells[idx] = cell;
        }
        self.rows.push(cells);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).and_then(|i| self.rows.get(row).and_then(|r| r.get(i)))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(Column::header))?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::encode))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CliError> {
        let mut rd = csv::Reader::from_reader(r);
        let columns = rd.headers()?.iter().map(Column::parse_header).collect();
        let mut rows = vec![];
        for rec in rd.records() {
            rows.push(rec?.iter().map(Cell::decode).collect());
        }
        Ok(Table { columns, rows })
    }

    /// An array of objects keyed by column name; units go in a separate map.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        let units: serde_json::Map<String, serde_json::Value> =
            self.columns.iter().map(|c| (c.name.clone(), serde_json::json!(c.unit))).collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.name.clone(), v.json())).collect())
            })
            .collect();
        let doc = serde_json::json!({ "units": units, "rows": rows });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }
}
