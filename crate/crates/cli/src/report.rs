//! Report envelope and serialization.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`.

use std::io;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Identifier of the sampling generator documented in the README.
pub const RNG_ID: &str = "splitmix64-counter";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<O> {
    pub command: String,
    pub inputs: Inputs,
    pub outputs: O,
    pub versions: Versions,
    pub seed: Option<u64>,
}

impl<O> Report<O> {
    pub fn new(command: &str, inputs: Inputs, outputs: O, seed: Option<u64>) -> Self {
        Report { command: command.to_string(), inputs, outputs, versions: Versions::current(), seed }
    }
}

/// Resolved run parameters; commands fill only the fields they use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
    /// Radians in `[0, 2π)`, after any degree conversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub epi_core: String,
    pub epi_cli: String,
    pub rng: String,
    pub schema: u32,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            epi_core: epi_core::VERSION.to_string(),
            epi_cli: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ID.to_string(),
            schema: SCHEMA_VERSION,
        }
    }
}

/// Float text used in JSON and CSV output.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with a trailing newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    buf
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

pub fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use epi_core::rng::CounterRng;

    #[test]
    fn seventeen_digits_round_trip() {
        let mut rng = CounterRng::new(99);
        let mut checked = 0;
        while checked < 100_000 {
            let v = f64::from_bits(rng.next_u64());
            if !v.is_finite() {
                continue;
            }
            let text = format_f64(v);
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{text}");
            let json: f64 = serde_json::from_slice(&to_json(&v)).unwrap();
            assert_eq!(json.to_bits(), v.to_bits(), "{text}");
            checked += 1;
        }
        for v in [0.0, -0.0, f64::MIN_POSITIVE, 5e-324, f64::MAX] {
            let json: f64 = serde_json::from_slice(&to_json(&v)).unwrap();
            assert_eq!(json.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_json(&f64::NAN), b"null\n");
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_has_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n1,\"x,y\"\n");
    }
}
