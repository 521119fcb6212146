//! CSV reading and writing for samples and results.
//!
//! The on-disk format is deliberately minimal: a UTF-8 header row naming the
//! columns, comma separators, LF line endings, and decimal floats. Floats
//! are written with Rust's shortest round-trip formatting, so a file read
//! back yields bit-identical values ("NaN" included), which is what the
//! round-trip guarantee of the output files rests on.

use std::fs;
use std::path::Path;

use crate::{CliError, CliResult};

/// An in-memory table: named columns over row-major `f64` data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Column names from the header row.
    pub columns: Vec<String>,
    /// Row-major values, `rows × columns.len()`.
    pub values: Vec<f64>,
}

impl Table {
    /// Number of data rows.
    pub fn rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    /// One row as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.columns.len();
        &self.values[i * w..(i + 1) * w]
    }

    /// Index of a named column, if present.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Extracts one column by index.
    pub fn column(&self, index: usize) -> Vec<f64> {
        let w = self.columns.len();
        (0..self.rows()).map(|i| self.values[i * w + index]).collect()
    }
}

/// Reads a CSV table, reporting malformed rows with their 1-based line
/// number.
///
/// # Errors
///
/// [`CliError::Io`] when the file cannot be read; [`CliError::Parse`] for an
/// empty file, a row with the wrong number of fields, or an unparseable
/// number.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_table(&text, path)
}

/// Parses CSV text; split out from [`read_table`] for testing.
pub fn parse_table(text: &str, path: &Path) -> CliResult<Table> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected a header row".into()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.iter().any(|c| c.is_empty()) {
        return Err(err(1, format!("empty column name in header {header:?}")));
    }
    let width = columns.len();
    let mut values = Vec::new();
    for (index, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = index + 1;
        let fields = line.split(',').count();
        if fields != width {
            return Err(err(
                line_no,
                format!("expected {width} comma-separated fields, got {fields}"),
            ));
        }
        for field in line.split(',') {
            let trimmed = field.trim();
            let value: f64 = trimmed
                .parse()
                .map_err(|_| err(line_no, format!("cannot parse {trimmed:?} as a number")))?;
            values.push(value);
        }
    }
    Ok(Table { columns, values })
}

/// Writes a table as CSV with shortest round-trip float formatting.
///
/// # Errors
///
/// [`CliError::Io`] when the file cannot be written.
pub fn write_table(path: &Path, table: &Table) -> CliResult<()> {
    fs::write(path, format_table(table)).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Renders a table to CSV text.
pub fn format_table(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    let width = table.columns.len();
    for i in 0..table.rows() {
        for (k, v) in table.values[i * width..(i + 1) * width].iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Splits an input table into its coordinate block and optional response.
///
/// The response is the column named `y` when present; every other column is
/// an input coordinate, in header order. Returns the row-major coordinates,
/// the inferred dimension, and the response column.
pub fn split_inputs(table: &Table) -> (Vec<f64>, usize, Option<Vec<f64>>) {
    let y_index = table.column_index("y");
    let coord_indices: Vec<usize> = (0..table.columns.len())
        .filter(|&i| Some(i) != y_index)
        .collect();
    let d = coord_indices.len();
    let mut coords = Vec::with_capacity(table.rows() * d);
    for i in 0..table.rows() {
        let row = table.row(i);
        for &c in &coord_indices {
            coords.push(row[c]);
        }
    }
    (coords, d, y_index.map(|i| table.column(i)))
}

/// Helper for building output tables column by column.
#[derive(Debug, Default)]
pub struct TableBuilder {
    columns: Vec<String>,
    data: Vec<Vec<f64>>,
}

impl TableBuilder {
    /// Empty builder.
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a named column; all columns must end up the same length.
    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push(name.to_string());
        self.data.push(values);
    }

    /// Assembles the row-major table.
    pub fn finish(self) -> Table {
        let rows = self.data.first().map_or(0, Vec::len);
        for (name, col) in self.columns.iter().zip(&self.data) {
            assert_eq!(col.len(), rows, "column {name} has inconsistent length");
        }
        let width = self.columns.len();
        let mut values = vec![0.0; rows * width];
        for (k, col) in self.data.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * width + k] = v;
            }
        }
        Table {
            columns: self.columns,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_path() -> std::path::PathBuf {
        std::path::PathBuf::from("test.csv")
    }

    #[test]
    fn parses_header_and_rows() {
        let t = parse_table("x1,x2,y\n1,2.5,3\n-0.5,NaN,1e-3\n", &fake_path()).unwrap();
        assert_eq!(t.columns, vec!["x1", "x2", "y"]);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.row(0), &[1.0, 2.5, 3.0]);
        assert!(t.row(1)[1].is_nan());
    }

    #[test]
    fn reports_line_numbers_for_bad_rows() {
        let e = parse_table("x1\n1\nnope\n", &fake_path()).unwrap_err();
        match e {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        let e = parse_table("x1,x2\n1,2\n3\n", &fake_path()).unwrap_err();
        match e {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 2"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn round_trips_bit_exactly() {
        let table = Table {
            columns: vec!["a".into(), "b".into()],
            values: vec![
                0.1,
                f64::NAN,
                -0.0,
                1.0 / 3.0,
                f64::MIN_POSITIVE,
                1e300,
            ],
        };
        let text = format_table(&table);
        let back = parse_table(&text, &fake_path()).unwrap();
        assert_eq!(back.columns, table.columns);
        assert_eq!(back.values.len(), table.values.len());
        for (a, b) in table.values.iter().zip(&back.values) {
            assert!(
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn splits_response_column_anywhere_in_header() {
        let t = parse_table("x1,y,x2\n1,9,2\n3,8,4\n", &fake_path()).unwrap();
        let (coords, d, y) = split_inputs(&t);
        assert_eq!(d, 2);
        assert_eq!(coords, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(y.unwrap(), vec![9.0, 8.0]);
    }

    #[test]
    fn builder_produces_row_major_layout() {
        let mut b = TableBuilder::new();
        b.push("p", vec![1.0, 2.0]);
        b.push("q", vec![3.0, 4.0]);
        let t = b.finish();
        assert_eq!(t.values, vec![1.0, 3.0, 2.0, 4.0]);
    }
}
