//! CSV with header `x1,…,xd,y1,…,yM`, one sample per line, no quoting.
//!
//! Values are written in Rust's shortest round-trip decimal form, so a
//! save/load cycle reproduces every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

pub fn write_csv(dataset: &Dataset, mut out: impl Write) -> Result<()> {
    let d = dataset.input_dim();
    let m = dataset.output_dim();
    let header: Vec<String> = (1..=d)
        .map(|i| format!("x{i}"))
        .chain((1..=m).map(|j| format!("y{j}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for (x, y) in dataset.inputs().iter().zip(dataset.targets()) {
        line.clear();
        for (k, v) in x.iter().chain(y).enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(dataset, BufWriter::new(File::create(path)?))
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let cols: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
    let d = cols.iter().take_while(|c| c.starts_with('x')).count();
    let m = cols.len() - d;
    if d == 0 || m == 0 {
        return Err(Error::Format(
            "missing header: expected columns x1..xd followed by y1..yM".into(),
        ));
    }
    for (i, c) in cols[..d].iter().enumerate() {
        if *c != format!("x{}", i + 1) {
            return Err(Error::Format(format!(
                "header column {} is '{c}', expected 'x{}'",
                i + 1,
                i + 1
            )));
        }
    }
    for (j, c) in cols[d..].iter().enumerate() {
        if *c != format!("y{}", j + 1) {
            return Err(Error::Format(format!(
                "header column {} is '{c}', expected 'y{}'",
                d + j + 1,
                j + 1
            )));
        }
    }
    Ok((d, m))
}

pub fn read_csv(input: impl BufRead) -> Result<Dataset> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Format("missing header: file is empty".into()))?;
    let (d, m) = parse_header(&header)?;

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("'{cell}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != d + m {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", d + m, values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite value {v}"),
            });
        }
        let mut values = values;
        targets.push(values.split_off(d));
        inputs.push(values);
    }
    if inputs.is_empty() {
        return Err(Error::InvalidInput("CSV has a header but no data rows".into()));
    }
    Dataset::new(inputs, targets)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_csv(BufReader::new(File::open(path)?))
}
