//! Row types and their CSV/JSON serialization.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which parses
//! back to the identical `f64`. Missing optional values are an empty CSV
//! cell and JSON `null`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown format `{other}`"))),
        }
    }
}

pub enum Field<'a> {
    Str(&'a str),
    Int(u64),
    Float(f64),
    OptFloat(Option<f64>),
    Bool(bool),
}

/// A flat record with a fixed column order.
pub trait Record {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<Field<'_>>;
}

/// One sampled state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub ensemble: String,
    pub n: usize,
    pub k: usize,
    pub sample: usize,
    pub seed: u64,
    pub m_tilde_lower: f64,
    pub m_tilde_upper: f64,
    pub m_tilde: f64,
    pub m_norm: f64,
    pub n_m_norm: f64,
    pub e_g: Option<f64>,
    pub opt_converged: bool,
    pub eg_converged: bool,
}

impl Record for SampleRow {
    const HEADER: &'static [&'static str] = &[
        "ensemble",
        "n",
        "k",
        "sample",
        "seed",
        "m_tilde_lower",
        "m_tilde_upper",
        "m_tilde",
        "m_norm",
        "n_m_norm",
        "e_g",
        "opt_converged",
        "eg_converged",
    ];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![
            Field::Str(&self.ensemble),
            Field::Int(self.n as u64),
            Field::Int(self.k as u64),
            Field::Int(self.sample as u64),
            Field::Int(self.seed),
            Field::Float(self.m_tilde_lower),
            Field::Float(self.m_tilde_upper),
            Field::Float(self.m_tilde),
            Field::Float(self.m_norm),
            Field::Float(self.n_m_norm),
            Field::OptFloat(self.e_g),
            Field::Bool(self.opt_converged),
            Field::Bool(self.eg_converged),
        ]
    }
}

/// Aggregate over all samples of one `(ensemble, n, k)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub ensemble: String,
    pub n: usize,
    pub k: usize,
    pub count: usize,
    pub mean_m_norm: f64,
    pub std_m_norm: f64,
    pub mean_e_g: Option<f64>,
    pub std_e_g: Option<f64>,
    pub mean_bracket_width: f64,
    pub mean_lambda1: f64,
}

impl Record for StatRecord {
    const HEADER: &'static [&'static str] = &[
        "ensemble",
        "n",
        "k",
        "count",
        "mean_m_norm",
        "std_m_norm",
        "mean_e_g",
        "std_e_g",
        "mean_bracket_width",
        "mean_lambda1",
    ];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![
            Field::Str(&self.ensemble),
            Field::Int(self.n as u64),
            Field::Int(self.k as u64),
            Field::Int(self.count as u64),
            Field::Float(self.mean_m_norm),
            Field::Float(self.std_m_norm),
            Field::OptFloat(self.mean_e_g),
            Field::OptFloat(self.std_e_g),
            Field::Float(self.mean_bracket_width),
            Field::Float(self.mean_lambda1),
        ]
    }
}

/// One point of the `Ξ(θ, ε)` plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiRow {
    pub n: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub m_norm: f64,
    pub m_norm_analytic: f64,
    pub e_g: Option<f64>,
    /// Only on the `ε = π/2` line.
    pub e_g_analytic: Option<f64>,
}

impl Record for XiRow {
    const HEADER: &'static [&'static str] =
        &["n", "theta", "epsilon", "m_norm", "m_norm_analytic", "e_g", "e_g_analytic"];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![
            Field::Int(self.n as u64),
            Field::Float(self.theta),
            Field::Float(self.epsilon),
            Field::Float(self.m_norm),
            Field::Float(self.m_norm_analytic),
            Field::OptFloat(self.e_g),
            Field::OptFloat(self.e_g_analytic),
        ]
    }
}

/// One point of a maximal-macroscopicity curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub mode: String,
    pub n: usize,
    pub eta: f64,
    pub e_g: f64,
    pub m_tilde: f64,
    pub m_norm: f64,
}

impl Record for BoundRow {
    const HEADER: &'static [&'static str] = &["mode", "n", "eta", "e_g", "m_tilde", "m_norm"];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![
            Field::Str(&self.mode),
            Field::Int(self.n as u64),
            Field::Float(self.eta),
            Field::Float(self.e_g),
            Field::Float(self.m_tilde),
            Field::Float(self.m_norm),
        ]
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_cell(f: &Field<'_>) -> String {
    match f {
        Field::Str(s) => s.to_string(),
        Field::Int(i) => i.to_string(),
        Field::Float(x) => format_float(*x),
        Field::OptFloat(Some(x)) => format_float(*x),
        Field::OptFloat(None) => String::new(),
        Field::Bool(b) => b.to_string(),
    }
}

fn json_value(f: &Field<'_>) -> Result<String> {
    let float = |x: f64| {
        if x.is_finite() {
            Ok(format_float(x))
        } else {
            Err(Error::invalid(format!("cannot write non-finite value {x} as JSON")))
        }
    };
    Ok(match f {
        Field::Str(s) => serde_json::to_string(s).map_err(|e| Error::Parse(e.to_string()))?,
        Field::Int(i) => i.to_string(),
        Field::Float(x) => float(*x)?,
        Field::OptFloat(Some(x)) => float(*x)?,
        Field::OptFloat(None) => "null".to_string(),
        Field::Bool(b) => b.to_string(),
    })
}

pub fn write_csv<W: Write, R: Record>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(R::HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields().iter().map(csv_cell)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<W: Write, R: Record>(mut out: W, rows: &[R]) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(e.to_string());
    write!(out, "[").map_err(io)?;
    for (i, r) in rows.iter().enumerate() {
        let sep = if i == 0 { "\n" } else { ",\n" };
        let body = R::HEADER
            .iter()
            .zip(r.fields())
            .map(|(name, f)| Ok(format!("\"{name}\":{}", json_value(&f)?)))
            .collect::<Result<Vec<_>>>()?
            .join(",");
        write!(out, "{sep}{{{body}}}").map_err(io)?;
    }
    writeln!(out, "{}]", if rows.is_empty() { "" } else { "\n" }).map_err(io)?;
    out.flush().map_err(io)
}

pub fn to_string<R: Record>(rows: &[R], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, rows)?,
        Format::Json => write_json(&mut buf, rows)?,
    }
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes `rows` to `path` in the given format.
pub fn emit<R: Record>(rows: &[R], format: Format, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(&mut w, rows)?,
        Format::Json => write_json(&mut w, rows)?,
    }
    w.into_inner().map_err(|e| io(e.into_error()))?.sync_all().map_err(io)
}

pub fn parse_csv<R: DeserializeOwned>(text: &str) -> Result<Vec<R>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.deserialize().map(|r| r.map_err(|e| Error::Parse(e.to_string()))).collect()
}

pub fn parse_json<R: DeserializeOwned>(text: &str) -> Result<Vec<R>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads rows back from a file written by [`emit`].
pub fn read<R: DeserializeOwned>(path: &Path, format: Format) -> Result<Vec<R>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize, x: f64) -> SampleRow {
        SampleRow {
            ensemble: "haar".into(),
            n: 4,
            k: 0,
            sample: i,
            seed: u64::MAX - i as u64,
            m_tilde_lower: x,
            m_tilde_upper: x * 3.0,
            m_tilde: x * 2.0,
            m_norm: 0.1 + x,
            n_m_norm: 1.0 / 3.0,
            e_g: if i % 2 == 0 { Some(x.sqrt()) } else { None },
            opt_converged: true,
            eg_converged: i % 2 == 0,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let s = to_string::<SampleRow>(&[], Format::Csv).unwrap();
        assert_eq!(s, format!("{}\n", SampleRow::HEADER.join(",")));
        assert_eq!(to_string::<SampleRow>(&[], Format::Json).unwrap().trim(), "[]");
    }

    #[test]
    fn three_rows_four_lines() {
        let rows: Vec<_> = (0..3).map(|i| row(i, 0.1 * i as f64)).collect();
        let s = to_string(&rows, Format::Csv).unwrap();
        assert_eq!(s.lines().count(), 4);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rows: Vec<_> = [1e-300, 0.1, std::f64::consts::PI, 123456.789, 5e-324]
            .iter()
            .enumerate()
            .map(|(i, &x)| row(i, x))
            .collect();
        let back: Vec<SampleRow> = parse_csv(&to_string(&rows, Format::Csv).unwrap()).unwrap();
        assert_eq!(back, rows);
        let back: Vec<SampleRow> = parse_json(&to_string(&rows, Format::Json).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(64.0), "6.4000000000000000e1");
        assert_eq!(format_float(0.1).len(), "1.0000000000000001e-1".len());
    }
}
