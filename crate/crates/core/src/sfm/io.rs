//! CSV input/output for datasets.
//!
//! First row holds headers matching schema names exactly; missing cells are
//! written as the empty string and read from "" or "NA" (case-insensitive).

use std::io::{Read, Write};

use super::dataset::{Column, Dataset};
use super::schema::{Kind, SfmSchema};
use crate::error::{Error, Result};

fn is_missing_token(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("na")
}

fn parse_cell(kind: &Kind, raw: &str, var: &str, row: usize) -> Result<f64> {
    match kind {
        Kind::Binary => match raw {
            "0" => Ok(0.0),
            "1" => Ok(1.0),
            _ => Err(Error::Parse(format!(
                "variable '{var}' row {row}: binary cell '{raw}' not 0/1"
            ))),
        },
        Kind::Categorical { levels, .. } => levels
            .iter()
            .position(|l| l == raw)
            .map(|i| i as f64)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "variable '{var}' row {row}: level '{raw}' not declared"
                ))
            }),
        Kind::Continuous => raw.parse::<f64>().map_err(|_| {
            Error::Parse(format!(
                "variable '{var}' row {row}: cannot parse '{raw}' as a number"
            ))
        }),
    }
}

/// Read a dataset from CSV using the given schema.
pub fn read_csv<R: Read>(schema: &SfmSchema, reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    // map each schema variable to its CSV column
    let mut col_of = Vec::with_capacity(schema.variables.len());
    for var in &schema.variables {
        let idx = headers
            .iter()
            .position(|h| h == var.name)
            .ok_or_else(|| Error::Parse(format!("csv is missing column '{}'", var.name)))?;
        col_of.push(idx);
    }
    let mut columns: Vec<Column> =
        schema.variables.iter().map(|_| Column { values: vec![], missing: vec![] }).collect();
    let mut n = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(format!("csv row {n}: {e}")))?;
        for (vi, var) in schema.variables.iter().enumerate() {
            let raw = record.get(col_of[vi]).unwrap_or("").trim();
            if is_missing_token(raw) {
                columns[vi].values.push(0.0);
                columns[vi].missing.push(true);
            } else {
                columns[vi].values.push(parse_cell(&var.kind, raw, &var.name, n)?);
                columns[vi].missing.push(false);
            }
        }
        n += 1;
    }
    Ok(Dataset::new(schema.clone(), n, columns))
}

fn format_cell(kind: &Kind, value: f64) -> String {
    match kind {
        Kind::Binary => format!("{}", value as u8),
        Kind::Categorical { levels, .. } => levels[value as usize].clone(),
        Kind::Continuous => format!("{value:.17e}"),
    }
}

/// Write a dataset as CSV. Continuous cells use a fixed 17-significant-digit
/// scientific format so repeated runs are byte-identical.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let names: Vec<&str> = data.schema.variables.iter().map(|v| v.name.as_str()).collect();
    wtr.write_record(&names).map_err(|e| Error::Parse(format!("csv write: {e}")))?;
    for row in 0..data.n {
        let mut record = Vec::with_capacity(names.len());
        for (var, col) in data.schema.variables.iter().zip(&data.columns) {
            if col.missing[row] {
                record.push(String::new());
            } else {
                record.push(format_cell(&var.kind, col.values[row]));
            }
        }
        wtr.write_record(&record).map_err(|e| Error::Parse(format!("csv write: {e}")))?;
    }
    wtr.flush().map_err(|e| Error::Parse(format!("csv flush: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfm::schema::{Role, VariableSpec};

    fn schema() -> SfmSchema {
        SfmSchema::new(
            vec![
                VariableSpec::new("x", Role::Protected, Kind::Binary).unwrap(),
                VariableSpec::new(
                    "g",
                    Role::Confounder,
                    Kind::Categorical {
                        levels: vec!["lo".into(), "hi".into()],
                        reference: "lo".into(),
                    },
                )
                .unwrap(),
                VariableSpec::new("y", Role::Outcome, Kind::Continuous).unwrap(),
            ],
            "0",
            "1",
        )
        .unwrap()
    }

    #[test]
    fn reads_missing_tokens() {
        let csv_text = "x,g,y\n1,hi,0.5\n0,,1.5\n1,lo,NA\n0,lo,na\n";
        let d = read_csv(&schema(), csv_text.as_bytes()).unwrap();
        assert_eq!(d.n, 4);
        assert!(d.columns[1].missing[1]);
        assert!(d.columns[2].missing[2]);
        assert!(d.columns[2].missing[3]);
        assert_eq!(d.columns[1].values[0], 1.0);
    }

    #[test]
    fn round_trips_byte_identically() {
        let csv_text = "x,g,y\n1,hi,0.5\n0,,1.5\n";
        let d = read_csv(&schema(), csv_text.as_bytes()).unwrap();
        let mut out1 = Vec::new();
        write_csv(&d, &mut out1).unwrap();
        let d2 = read_csv(&schema(), out1.as_slice()).unwrap();
        let mut out2 = Vec::new();
        write_csv(&d2, &mut out2).unwrap();
        assert_eq!(out1, out2);
    }

    #[test]
    fn undeclared_level_is_a_parse_error() {
        let csv_text = "x,g,y\n1,mid,0.5\n";
        assert!(read_csv(&schema(), csv_text.as_bytes()).is_err());
    }

    #[test]
    fn header_mismatch_is_reported() {
        let csv_text = "x,group,y\n1,hi,0.5\n";
        assert!(read_csv(&schema(), csv_text.as_bytes()).is_err());
    }
}
