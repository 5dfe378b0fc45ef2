//! Readers for the one-value-per-line and two-column CSV inputs.

use std::fs;
use std::path::Path;

use lppsd_core::{PairedSample, Sample};

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        source: e,
    })
}

fn parse_field(path: &Path, line: usize, field: &str) -> Result<f64, CliError> {
    let v: f64 = field.trim().parse().map_err(|_| CliError::NonNumeric {
        path: path.display().to_string(),
        line,
        text: field.trim().to_string(),
    })?;
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::BadValue {
            path: path.display().to_string(),
            line,
            value: v,
        });
    }
    Ok(v)
}

/// Non-blank lines with their 1-based line numbers.
fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// One non-negative number per line; blank lines are ignored.
pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let text = read(path)?;
    let mut values = Vec::new();
    for (line, l) in rows(&text) {
        values.push(parse_field(path, line, l)?);
    }
    if values.is_empty() {
        return Err(CliError::Empty(path.display().to_string()));
    }
    Ok(Sample::new(values)?)
}

/// Two comma-separated columns `x,y` per line.
pub fn read_pairs(path: &Path) -> Result<PairedSample, CliError> {
    let text = read(path)?;
    let mut pairs = Vec::new();
    for (line, l) in rows(&text) {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(CliError::Columns {
                path: path.display().to_string(),
                line,
                found: fields.len(),
            });
        }
        pairs.push((
            parse_field(path, line, fields[0])?,
            parse_field(path, line, fields[1])?,
        ));
    }
    if pairs.is_empty() {
        return Err(CliError::Empty(path.display().to_string()));
    }
    Ok(PairedSample::from_pairs(&pairs)?)
}
