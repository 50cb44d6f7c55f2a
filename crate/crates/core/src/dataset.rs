//! Numeric CSV ingestion: two-column `(x, y)` files and the five-column
//! banknote authentication layout `(vw, sw, kw, ei, class)`.
//!
//! Files are comma separated. A single header line is detected when the
//! first row does not parse as numbers.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BivariateSample;

/// Public location of the banknote authentication file.
pub const BANKNOTE_URL: &str =
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00267/data_banknote_authentication.txt";
pub const BANKNOTE_GENUINE_ROWS: usize = 762;
pub const BANKNOTE_FORGERY_ROWS: usize = 610;

/// Rectangular numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        column,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    parse_error(line, 1, e.to_string())
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut header = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = None;
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(e, k + 1))?;
            let line = record
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(k + 1);
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: Vec<std::result::Result<f64, usize>> = record
                .iter()
                .enumerate()
                .map(|(c, f)| f.parse::<f64>().map_err(|_| c + 1))
                .collect();
            if header.is_none() && rows.is_empty() && parsed.iter().any(|p| p.is_err()) {
                header = Some(record.iter().map(|s| s.to_string()).collect::<Vec<_>>());
                width = Some(record.len());
                continue;
            }
            let expected = *width.get_or_insert(record.len());
            if record.len() != expected {
                return Err(parse_error(
                    line,
                    record.len().min(expected) + 1,
                    format!("expected {expected} fields, found {}", record.len()),
                ));
            }
            let mut row = Vec::with_capacity(expected);
            for (c, p) in parsed.into_iter().enumerate() {
                match p {
                    Ok(v) if v.is_finite() => row.push(v),
                    Ok(_) => return Err(parse_error(line, c + 1, "non-finite value")),
                    Err(col) => {
                        return Err(parse_error(
                            line,
                            col,
                            format!("`{}` is not a number", &record[col - 1]),
                        ))
                    }
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(parse_error(1, 1, "no data rows"));
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
            _ => parse_error(0, 0, format!("{}: {e}", path.display())),
        })?;
        Self::parse(&text)
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Index of a column given by 0-based number or header name.
    pub fn column_index(&self, key: &str) -> Result<usize> {
        let key = key.trim();
        if let Ok(i) = key.parse::<usize>() {
            return if i < self.width() {
                Ok(i)
            } else {
                Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.width(),
                })
            };
        }
        self.header
            .as_ref()
            .and_then(|h| h.iter().position(|name| name.eq_ignore_ascii_case(key)))
            .ok_or_else(|| Error::Unsupported(format!("no column named `{key}`")))
    }

    /// The two selected columns as a bivariate sample.
    pub fn pair(&self, cols: (usize, usize)) -> Result<BivariateSample> {
        for c in [cols.0, cols.1] {
            if c >= self.width() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    len: self.width(),
                });
            }
        }
        BivariateSample::new(self.rows.iter().map(|r| (r[cols.0], r[cols.1])))
    }
}

/// Banknote feature columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BanknoteVar {
    /// Variance of the wavelet-transformed image.
    Vw,
    /// Skewness.
    Sw,
    /// Kurtosis.
    Kw,
    /// Entropy.
    Ei,
}

impl BanknoteVar {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for BanknoteVar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vw" | "0" => Ok(Self::Vw),
            "sw" | "1" => Ok(Self::Sw),
            "kw" | "2" => Ok(Self::Kw),
            "ei" | "3" => Ok(Self::Ei),
            other => Err(Error::Unsupported(format!(
                "unknown banknote column `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BanknoteClass {
    /// Class label 0.
    Genuine,
    /// Class label 1.
    Forgery,
}

impl FromStr for BanknoteClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "genuine" | "g" | "gdata" | "0" => Ok(Self::Genuine),
            "forgery" | "f" | "fdata" | "1" => Ok(Self::Forgery),
            other => Err(Error::Unsupported(format!(
                "unknown banknote class `{other}`"
            ))),
        }
    }
}

impl fmt::Display for BanknoteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Genuine => "genuine",
            Self::Forgery => "forgery",
        })
    }
}

/// Banknote rows split by class.
#[derive(Debug, Clone, PartialEq)]
pub struct Banknote {
    pub genuine: Vec<[f64; 4]>,
    pub forgery: Vec<[f64; 4]>,
    /// Set when the class counts differ from 762 / 610.
    pub warning: Option<String>,
}

impl Banknote {
    pub fn from_table(table: &Table) -> Result<Self> {
        if table.width() != 5 {
            return Err(parse_error(
                1,
                table.width().min(5) + 1,
                format!("banknote layout needs 5 columns, found {}", table.width()),
            ));
        }
        let offset = 1 + usize::from(table.header.is_some());
        let mut genuine = Vec::new();
        let mut forgery = Vec::new();
        for (k, r) in table.rows.iter().enumerate() {
            let features = [r[0], r[1], r[2], r[3]];
            match r[4] {
                0.0 => genuine.push(features),
                1.0 => forgery.push(features),
                c => {
                    return Err(parse_error(
                        k + offset,
                        5,
                        format!("class must be 0 or 1, found {c}"),
                    ))
                }
            }
        }
        let warning = (genuine.len() != BANKNOTE_GENUINE_ROWS
            || forgery.len() != BANKNOTE_FORGERY_ROWS)
            .then(|| {
                format!(
                    "expected {BANKNOTE_GENUINE_ROWS} genuine and {BANKNOTE_FORGERY_ROWS} forgery rows, found {} and {}",
                    genuine.len(),
                    forgery.len()
                )
            });
        Ok(Self {
            genuine,
            forgery,
            warning,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&Table::read(path)?)
    }

    pub fn class(&self, class: BanknoteClass) -> &[[f64; 4]] {
        match class {
            BanknoteClass::Genuine => &self.genuine,
            BanknoteClass::Forgery => &self.forgery,
        }
    }

    pub fn pair(
        &self,
        class: BanknoteClass,
        x: BanknoteVar,
        y: BanknoteVar,
    ) -> Result<BivariateSample> {
        BivariateSample::new(
            self.class(class)
                .iter()
                .map(|r| (r[x.index()], r[y.index()])),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_column_with_and_without_header() {
        let t = Table::parse("1,2\n2,1\n3,4\n4,3\n").unwrap();
        assert!(t.header.is_none());
        assert_eq!(t.rows.len(), 4);
        let t = Table::parse("x, y\n1,2\n2,1\n\n3,4\n").unwrap();
        assert_eq!(
            t.header.as_deref(),
            Some(&["x".to_string(), "y".to_string()][..])
        );
        assert_eq!(t.column_index("Y").unwrap(), 1);
        assert_eq!(t.column_index("0").unwrap(), 0);
        assert!(t.column_index("2").is_err());
        assert!(t.column_index("z").is_err());
        let s = t.pair((1, 0)).unwrap();
        assert_eq!(s.x(), &[2.0, 1.0, 4.0]);
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert!(matches!(Table::parse(""), Err(Error::ParseError { .. })));
        assert!(matches!(
            Table::parse("x,y\n"),
            Err(Error::ParseError { .. })
        ));
        match Table::parse("1,2\n3,abc\n") {
            Err(Error::ParseError { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        match Table::parse("1,2\n3\n") {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Table::parse("1,2\n3,inf\n") {
            Err(Error::ParseError { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Table::read("/nonexistent/file.csv"),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn banknote_split() {
        let text = "3.6,8.6,-2.8,-0.4,0\n4.5,8.1,-2.4,-1.4,0\n-1.3,-2.1,2.1,0.2,1\n";
        let b = Banknote::from_table(&Table::parse(text).unwrap()).unwrap();
        assert_eq!(b.genuine.len(), 2);
        assert_eq!(b.forgery.len(), 1);
        assert!(b.warning.is_some());
        let s = b
            .pair(BanknoteClass::Genuine, BanknoteVar::Sw, BanknoteVar::Kw)
            .unwrap();
        assert_eq!(s.x(), &[8.6, 8.1]);
        assert_eq!(s.y(), &[-2.8, -2.4]);
        assert!(Banknote::from_table(&Table::parse("1,2,3,4,2\n").unwrap()).is_err());
        assert!(Banknote::from_table(&Table::parse("1,2\n").unwrap()).is_err());
        assert_eq!("SW".parse::<BanknoteVar>().unwrap(), BanknoteVar::Sw);
        assert_eq!(
            "fdata".parse::<BanknoteClass>().unwrap(),
            BanknoteClass::Forgery
        );
    }
}
