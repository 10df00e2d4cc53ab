//! Tabular experiment output and its CSV form.
//!
//! Files start with `# key = value` metadata lines, then a header row and
//! the data rows. Floats are written with 17 significant digits so a read
//! returns the same bits.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::time::Duration;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn parse(field: &str) -> Cell {
        if let Ok(i) = field.parse::<i64>() {
            return Cell::Int(i);
        }
        match field.parse::<f64>() {
            Ok(x) => Cell::Num(x),
            Err(_) => Cell::Text(field.to_string()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) if x.is_finite() => write!(f, "{x:.16e}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Vec<(String, String)>,
    /// Wall-clock time of the run. Not written to CSV.
    pub runtime: Option<Duration>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; text cells give `NaN`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Rows whose `key` column equals `value`.
    pub fn filter_text(&self, key: &str, value: &str) -> Vec<&[Cell]> {
        let Some(j) = self.column_index(key) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r[j].as_str() == Some(value))
            .map(|r| r.as_slice())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |source| Error::Io {
            path: "<output>".into(),
            source,
        };
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {}", v.replace('\n', " ")).map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |source| Error::Csv {
            path: "<output>".into(),
            source,
        };
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_csv(&mut buf).map_err(|e| relabel(e, path))?;
        buf.flush().map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let io = |source| Error::Io {
            path: "<input>".into(),
            source,
        };
        let mut reader = BufReader::new(input);
        let mut metadata = Vec::new();
        let mut body = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line).map_err(io)? == 0 {
                break;
            }
            match line.strip_prefix('#') {
                Some(rest) => {
                    let (k, v) = rest
                        .trim()
                        .split_once(" = ")
                        .ok_or_else(|| invalid(format!("malformed metadata line `{}`", line.trim_end())))?;
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => {
                    body.push_str(&line);
                    reader.read_to_string(&mut body).map_err(io)?;
                    break;
                }
            }
        }
        let csv_err = |source| Error::Csv {
            path: "<input>".into(),
            source,
        };
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(Cell::parse).collect());
        }
        Ok(Self {
            columns,
            rows,
            metadata,
            runtime: None,
        })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::read_csv(file).map_err(|e| relabel(e, path))
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.into(),
            source,
        },
        Error::Csv { source, .. } => Error::Csv {
            path: path.into(),
            source,
        },
        other => other,
    }
}
