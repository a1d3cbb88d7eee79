use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use l2gauss_core::Samples;
use serde::Serialize;

use crate::error::CliError;

/// Reads `u,y` pairs. A first row that does not parse as two numbers is
/// taken as a header.
pub fn read_samples(path: &Path) -> Result<Samples, CliError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_samples(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_samples(text: &str) -> Result<Samples, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::Input(format!(
                "line {}: expected 2 columns, found {}",
                row + 1,
                record.len()
            )));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(u), Ok(y)) => points.push((u, y)),
            _ if row == 0 => continue,
            _ => return Err(CliError::Input(format!("line {}: not a number", row + 1))),
        }
    }
    Samples::new(points).map_err(|e| CliError::Input(e.to_string()))
}

pub fn write_path_csv(path: &Path, t: &[f64], y: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(e.to_string()))?;
    w.write_record(["t", "y"]).map_err(|e| CliError::Output(e.to_string()))?;
    for (a, b) in t.iter().zip(y) {
        w.write_record([a.to_string(), b.to_string()])
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?);
            f.write_all(text.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}
