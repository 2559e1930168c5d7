//! Tabular input: one categorical X column followed by one or more numeric
//! Y columns.
//!
//! Tables are column-wise only. The first CSV column is always X, every other
//! column must hold finite numbers written with a `.` decimal separator.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell {value:?} in column {column:?}, row {row}")]
    NonNumericCell {
        column: String,
        row: usize,
        value: String,
    },
    #[error("table has {rows} data rows, at least 2 are required")]
    TooFewRows { rows: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumnName(String),
    #[error("column names must be non-empty")]
    EmptyColumnName,
    #[error("table needs at least one numeric column")]
    NoValueColumns,
    #[error("column {column:?} has {found} values, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in column {column:?}, row {row}")]
    NonFinite { column: String, row: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("invalid table context: {0}")]
    InvalidContext(String),
}

impl TableError {
    /// Stable machine-readable name, used in API error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            TableError::RaggedRows { .. } => "RaggedRows",
            TableError::NonNumericCell { .. } => "NonNumericCell",
            TableError::TooFewRows { .. } => "TooFewRows",
            TableError::DuplicateColumnName(_) => "DuplicateColumnName",
            TableError::EmptyColumnName => "EmptyColumnName",
            TableError::NoValueColumns => "NoValueColumns",
            TableError::LengthMismatch { .. } => "LengthMismatch",
            TableError::NonFinite { .. } => "NonFinite",
            TableError::Csv(_) => "CsvError",
            TableError::InvalidContext(_) => "InvalidContext",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// A validated data table. Construct through [`DataTable::new`] or
/// [`parse_csv`]; deserialization re-validates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct DataTable {
    x_name: String,
    x_values: Vec<String>,
    y_columns: Vec<ValueColumn>,
}

#[derive(Deserialize)]
struct RawTable {
    x_name: String,
    x_values: Vec<String>,
    y_columns: Vec<ValueColumn>,
}

impl TryFrom<RawTable> for DataTable {
    type Error = TableError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        DataTable::new(raw.x_name, raw.x_values, raw.y_columns)
    }
}

impl DataTable {
    pub fn new(
        x_name: impl Into<String>,
        x_values: Vec<String>,
        y_columns: Vec<ValueColumn>,
    ) -> Result<Self, TableError> {
        let x_name = x_name.into();
        if y_columns.is_empty() {
            return Err(TableError::NoValueColumns);
        }
        let mut seen = HashSet::new();
        for name in std::iter::once(&x_name).chain(y_columns.iter().map(|c| &c.name)) {
            if name.trim().is_empty() {
                return Err(TableError::EmptyColumnName);
            }
            if !seen.insert(name.as_str()) {
                return Err(TableError::DuplicateColumnName(name.clone()));
            }
        }
        let len = x_values.len();
        if len < 2 {
            return Err(TableError::TooFewRows { rows: len });
        }
        for col in &y_columns {
            if col.values.len() != len {
                return Err(TableError::LengthMismatch {
                    column: col.name.clone(),
                    expected: len,
                    found: col.values.len(),
                });
            }
            if let Some(i) = col.values.iter().position(|v| !v.is_finite()) {
                return Err(TableError::NonFinite {
                    column: col.name.clone(),
                    row: i + 1,
                });
            }
        }
        Ok(DataTable {
            x_name,
            x_values,
            y_columns,
        })
    }

    pub fn x_name(&self) -> &str {
        &self.x_name
    }

    pub fn x_values(&self) -> &[String] {
        &self.x_values
    }

    pub fn y_columns(&self) -> &[ValueColumn] {
        &self.y_columns
    }

    pub fn column(&self, name: &str) -> Option<&ValueColumn> {
        self.y_columns.iter().find(|c| c.name == name)
    }

    pub fn row_count(&self) -> usize {
        self.x_values.len()
    }

    /// Value of `column` at the row labelled `category` (first match).
    pub fn cell(&self, column: &str, category: &str) -> Option<f64> {
        let row = self.x_values.iter().position(|x| x == category)?;
        self.column(column).map(|c| c.values[row])
    }

    /// Canonical CSV form: header row, `x` first, numbers in shortest
    /// round-trip notation.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once(self.x_name.as_str())
            .chain(self.y_columns.iter().map(|c| c.name.as_str()))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (i, x) in self.x_values.iter().enumerate() {
            let mut rec = vec![x.clone()];
            rec.extend(self.y_columns.iter().map(|c| c.values[i].to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 input")
    }
}

/// Parse UTF-8 CSV bytes. With `header = false` the columns are named
/// `x`, `y1`, `y2`, ...
pub fn parse_csv(bytes: &[u8], header: bool) -> Result<DataTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        rows.push(rec.map_err(|e| TableError::Csv(e.to_string()))?);
    }
    // Blank trailing lines show up as single empty fields.
    while rows
        .last()
        .is_some_and(|r| r.len() == 1 && r[0].trim().is_empty())
    {
        rows.pop();
    }
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(TableError::RaggedRows {
                row: i + 1,
                expected: width,
                found: r.len(),
            });
        }
    }
    let (names, data): (Vec<String>, &[csv::StringRecord]) = if header {
        match rows.split_first() {
            Some((h, rest)) => (h.iter().map(str::to_string).collect(), rest),
            None => return Err(TableError::TooFewRows { rows: 0 }),
        }
    } else {
        let names = (0..width)
            .map(|i| if i == 0 { "x".to_string() } else { format!("y{i}") })
            .collect();
        (names, &rows[..])
    };
    if width < 2 {
        return Err(TableError::NoValueColumns);
    }
    if data.len() < 2 {
        return Err(TableError::TooFewRows { rows: data.len() });
    }

    let x_values = data.iter().map(|r| r[0].to_string()).collect();
    let mut y_columns = Vec::with_capacity(width - 1);
    for (c, name) in names.iter().enumerate().skip(1) {
        let mut values = Vec::with_capacity(data.len());
        for (r, rec) in data.iter().enumerate() {
            let cell = &rec[c];
            let v = parse_number(cell).ok_or_else(|| TableError::NonNumericCell {
                column: name.clone(),
                row: r + 1,
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        y_columns.push(ValueColumn {
            name: name.clone(),
            values,
        });
    }
    DataTable::new(names[0].clone(), x_values, y_columns)
}

/// Strict numeric cell parsing: optional sign, digits, `.` decimals and an
/// optional exponent. Thousands separators, `inf` and `NaN` are rejected.
fn parse_number(cell: &str) -> Option<f64> {
    let s = cell.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let starts_ok = body.starts_with(|c: char| c.is_ascii_digit())
        || (body.starts_with('.') && body[1..].starts_with(|c: char| c.is_ascii_digit()));
    if !starts_ok || !body.chars().all(|c| c.is_ascii_digit() || ".eE+-".contains(c)) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Line,
    Column,
    Bar,
    Pie,
    None,
}

impl std::str::FromStr for ChartKind {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(ChartKind::Line),
            "column" => Ok(ChartKind::Column),
            "bar" => Ok(ChartKind::Bar),
            "pie" => Ok(ChartKind::Pie),
            "none" | "" => Ok(ChartKind::None),
            other => Err(TableError::InvalidContext(format!("unknown chart kind {other:?}"))),
        }
    }
}

/// Subject bucket used when the configured list does not contain a subject.
pub const OTHER_SUBJECT: &str = "other";

/// Default subject list, Statista-style topic areas.
pub const DEFAULT_SUBJECTS: [&str; 25] = [
    "agriculture",
    "consumer goods",
    "economy",
    "education",
    "energy",
    "environment",
    "finance",
    "food and nutrition",
    "health",
    "internet",
    "leisure",
    "media",
    "metals and electronics",
    "politics",
    "real estate",
    "retail",
    "society",
    "sports",
    "technology",
    "telecommunications",
    "transportation",
    "travel",
    "demographics",
    "chemicals",
    "construction",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectList {
    subjects: Vec<String>,
}

impl Default for SubjectList {
    fn default() -> Self {
        SubjectList {
            subjects: DEFAULT_SUBJECTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SubjectList {
    pub fn new(subjects: impl IntoIterator<Item = String>) -> Self {
        SubjectList {
            subjects: subjects.into_iter().map(|s| s.trim().to_lowercase()).collect(),
        }
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    /// Maps a free-form subject onto the configured list, or `"other"`.
    pub fn normalize(&self, subject: &str) -> String {
        let s = subject.trim().to_lowercase();
        if self.subjects.contains(&s) {
            s
        } else {
            OTHER_SUBJECT.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableContext {
    pub title: String,
    pub subject: String,
    pub chart_kind: ChartKind,
}

impl TableContext {
    pub fn new(
        title: &str,
        subject: &str,
        chart_kind: ChartKind,
        subjects: &SubjectList,
    ) -> Result<Self, TableError> {
        let title = title.trim();
        if title.is_empty() {
            return Err(TableError::InvalidContext("title must be non-empty".into()));
        }
        Ok(TableContext {
            title: title.to_string(),
            subject: subjects.normalize(subject),
            chart_kind,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableShape {
    pub is_time_series: bool,
    pub is_multi_column: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TimeKey {
    Year(i32),
    Date(NaiveDate),
}

fn time_key(label: &str) -> Option<TimeKey> {
    let s = label.trim();
    if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse().ok().map(TimeKey::Year);
    }
    if s.len() == 10 {
        return NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(TimeKey::Date);
    }
    None
}

/// True when every label is a 4-digit year (or every label an ISO date) and
/// the sequence is strictly increasing or strictly decreasing.
pub fn is_time_axis(x_values: &[String]) -> bool {
    let keys: Option<Vec<TimeKey>> = x_values.iter().map(|x| time_key(x)).collect();
    let Some(keys) = keys else { return false };
    let same_kind = keys
        .windows(2)
        .all(|w| matches!((w[0], w[1]), (TimeKey::Year(_), TimeKey::Year(_)) | (TimeKey::Date(_), TimeKey::Date(_))));
    if !same_kind || keys.len() < 2 {
        return false;
    }
    keys.windows(2).all(|w| w[0] < w[1]) || keys.windows(2).all(|w| w[0] > w[1])
}

pub fn detect_shape(t: &DataTable) -> TableShape {
    TableShape {
        is_time_series: is_time_axis(&t.x_values),
        is_multi_column: t.y_columns.len() >= 2,
    }
}

/// `"<first>-<last>"` for time series, `"ALL <x_name>"` otherwise.
pub fn x_range_label(t: &DataTable) -> String {
    if is_time_axis(&t.x_values) {
        format!("{}-{}", t.x_values[0], t.x_values[t.x_values.len() - 1])
    } else {
        format!("ALL {}", t.x_name)
    }
}

impl fmt::Display for DataTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}
