//! CSV ingestion.
//!
//! Files need a header row; cells are decimal numbers. In a single-sample
//! column an empty cell is skipped, so samples of different sizes can share
//! one file. Paired files need both cells on every row. Error messages name
//! the file, the line (the header is line 1) and the column.

use std::path::Path;

use crate::config::{ColumnSource, PairSource};
use crate::{CliError, CliResult};

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record));
    }
    Ok(Table { headers, rows })
}

fn column_index(table: &Table, path: &Path, name: Option<&str>, fallback: usize) -> CliResult<usize> {
    match name {
        Some(name) => table.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Config(format!(
                "{}: no column `{name}` (columns: {})",
                path.display(),
                table.headers.join(", ")
            ))
        }),
        None if fallback < table.headers.len() => Ok(fallback),
        None => {
            Err(CliError::Config(format!("{}: expected at least {} columns", path.display(), fallback + 1)))
        }
    }
}

fn parse_cell(path: &Path, line: u64, column: &str, cell: &str) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Data(format!(
            "{}: line {line}, column `{column}`: `{cell}` is not a finite number",
            path.display()
        ))),
    }
}

/// One numeric column, blanks skipped.
pub fn read_column(src: &ColumnSource) -> CliResult<Vec<f64>> {
    let table = read_table(&src.path)?;
    let j = column_index(&table, &src.path, src.column.as_deref(), 0)?;
    let name = &table.headers[j];
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        match record.get(j) {
            None | Some("") => continue,
            Some(cell) => out.push(parse_cell(&src.path, *line, name, cell)?),
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: column `{name}` holds no observations", src.path.display())));
    }
    Ok(out)
}

/// Two numeric columns read as matched pairs.
pub fn read_pairs(src: &PairSource) -> CliResult<Vec<(f64, f64)>> {
    let table = read_table(&src.path)?;
    let jx = column_index(&table, &src.path, src.x.as_deref(), 0)?;
    let jy = column_index(&table, &src.path, src.y.as_deref(), 1)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        let cell = |j: usize| -> CliResult<f64> {
            let name = &table.headers[j];
            match record.get(j) {
                None | Some("") => Err(CliError::Data(format!(
                    "{}: line {line}, column `{name}`: missing value in a paired row",
                    src.path.display()
                ))),
                Some(c) => parse_cell(&src.path, *line, name, c),
            }
        };
        out.push((cell(jx)?, cell(jy)?));
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no paired observations", src.path.display())));
    }
    Ok(out)
}
