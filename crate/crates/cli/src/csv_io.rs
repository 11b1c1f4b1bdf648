//! CSV tables: a header row of feature names, one row per timestep, and an
//! optional leading `timestamp` column that is carried along but never used
//! as a feature.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;
use tsxplain::types::{validate_sample, SampleError};
use tsxplain::Sample;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("reading csv: {0}")]
    Io(String),
    /// `line` and `column` are 1-based positions in the file.
    #[error("csv line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
    #[error("csv content: {0}")]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub timestamps: Option<Vec<String>>,
    pub names: Vec<String>,
    pub sample: Sample,
}

impl Table {
    pub fn new(names: Vec<String>, sample: Sample) -> Self {
        Table {
            timestamps: None,
            names,
            sample,
        }
    }

    /// Rows `[start, start + len)` as a new table.
    pub fn slice(&self, start: usize, len: usize) -> Result<Table, SampleError> {
        let f = self.sample.features();
        let values = self.sample.as_slice()[start * f..(start + len) * f].to_vec();
        Ok(Table {
            timestamps: self.timestamps.as_ref().map(|ts| ts[start..start + len].to_vec()),
            names: self.names.clone(),
            sample: Sample::from_flat(len, f, values)?,
        })
    }

    /// Axis label for timestep `t`.
    pub fn time_label(&self, t: usize) -> String {
        match &self.timestamps {
            Some(ts) => ts[t].clone(),
            None => t.to_string(),
        }
    }
}

pub fn read_csv_file(path: &Path) -> Result<Table, CsvError> {
    let file = std::fs::File::open(path).map_err(|e| CsvError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file)
}

pub fn read_csv(input: impl Read) -> Result<Table, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| CsvError::Io(e.to_string()))?.clone();
    let has_time = header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("timestamp"));
    let skip = usize::from(has_time);
    let names: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
    if names.is_empty() {
        return Err(CsvError::Sample(SampleError::NoFeatures));
    }

    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CsvError::Io(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() + skip {
            return Err(CsvError::Parse {
                line,
                column: record.len().min(names.len() + skip) + 1,
                message: format!("expected {} fields, found {}", names.len() + skip, record.len()),
            });
        }
        if has_time {
            timestamps.push(record[0].to_string());
        }
        let row = record
            .iter()
            .enumerate()
            .skip(skip)
            .map(|(i, field)| {
                field.parse::<f64>().map_err(|_| CsvError::Parse {
                    line,
                    column: i + 1,
                    message: format!("cannot parse `{field}` as a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(CsvError::Parse {
                line,
                column: i + skip + 1,
                message: format!("non-finite value `{}`", &record[i + skip]),
            });
        }
        rows.push(row);
    }
    Ok(Table {
        timestamps: has_time.then_some(timestamps),
        names,
        sample: validate_sample(&rows)?,
    })
}

pub fn write_csv(table: &Table, output: impl Write) -> Result<(), CsvError> {
    let io = |e: csv::Error| CsvError::Io(e.to_string());
    let mut writer = csv::Writer::from_writer(output);
    let mut header: Vec<&str> = Vec::new();
    if table.timestamps.is_some() {
        header.push("timestamp");
    }
    header.extend(table.names.iter().map(String::as_str));
    writer.write_record(&header).map_err(io)?;
    for t in 0..table.sample.timesteps() {
        let mut record: Vec<String> = Vec::new();
        if let Some(ts) = &table.timestamps {
            record.push(ts[t].clone());
        }
        // Debug formatting is the shortest string that parses back to the same bits
        record.extend(table.sample.row(t).iter().map(|v| format!("{v:?}")));
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush().map_err(|e| CsvError::Io(e.to_string()))
}

pub fn write_csv_file(table: &Table, path: &Path) -> Result<(), CsvError> {
    let mut buffer = Vec::new();
    write_csv(table, &mut buffer)?;
    std::fs::write(path, buffer).map_err(|e| CsvError::Io(format!("{}: {e}", path.display())))
}
