//! The ten supported BI analyses, computed exhaustively over every numeric
//! column of a table.

use crate::table::{is_time_axis, DataTable, TableShape};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("series has {0} points, at least 3 are required")]
    SeriesTooShort(usize),
    #[error("series is constant")]
    ConstantSeries,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unknown analysis type {0:?}")]
    UnknownType(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalysisType {
    Max,
    Min,
    Sum,
    Average,
    Value,
    MostRecent,
    Compare,
    Trend,
    Correlated,
    Ranked,
}

impl AnalysisType {
    pub const ALL: [AnalysisType; 10] = [
        AnalysisType::Max,
        AnalysisType::Min,
        AnalysisType::Sum,
        AnalysisType::Average,
        AnalysisType::Value,
        AnalysisType::MostRecent,
        AnalysisType::Compare,
        AnalysisType::Trend,
        AnalysisType::Correlated,
        AnalysisType::Ranked,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisType::Max => "MAX",
            AnalysisType::Min => "MIN",
            AnalysisType::Sum => "SUM",
            AnalysisType::Average => "AVERAGE",
            AnalysisType::Value => "VALUE",
            AnalysisType::MostRecent => "MOST_RECENT",
            AnalysisType::Compare => "COMPARE",
            AnalysisType::Trend => "TREND",
            AnalysisType::Correlated => "CORRELATED",
            AnalysisType::Ranked => "RANKED",
        }
    }

    /// TREND and MOST_RECENT need a time axis, CORRELATED needs two columns.
    pub fn applicable(self, shape: TableShape) -> bool {
        match self {
            AnalysisType::Trend | AnalysisType::MostRecent => shape.is_time_series,
            AnalysisType::Correlated => shape.is_multi_column,
            _ => true,
        }
    }

    pub fn applicable_types(shape: TableShape) -> Vec<AnalysisType> {
        Self::ALL.into_iter().filter(|t| t.applicable(shape)).collect()
    }
}

impl fmt::Display for AnalysisType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisType {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AnalyticsError::UnknownType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TrendDirection {
    Up,
    Down,
    None,
}

impl TrendDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendDirection::Up => "UP",
            TrendDirection::Down => "DOWN",
            TrendDirection::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryValue {
    pub category: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    /// MAX / MIN: the arg category and its value.
    Extreme(CategoryValue),
    /// SUM / AVERAGE over the whole column.
    Aggregate { value: f64 },
    /// VALUE / MOST_RECENT: one cell.
    Cell(CategoryValue),
    Compare {
        lower: CategoryValue,
        higher: CategoryValue,
    },
    Trend {
        direction: TrendDirection,
        relative_change: f64,
    },
    Correlation { other_column: String, coefficient: f64 },
    /// Descending by value, ties in row order.
    Ranked { entries: Vec<CategoryValue> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub kind: AnalysisType,
    pub y_column: String,
    pub detail: Detail,
}

impl AnalysisResult {
    /// Magnitude used to pick the "most extreme" result of a type: larger is
    /// more extreme.
    pub fn salience(&self) -> f64 {
        match (&self.kind, &self.detail) {
            (AnalysisType::Min, Detail::Extreme(cv)) => -cv.value,
            (_, Detail::Extreme(cv)) | (_, Detail::Cell(cv)) => cv.value,
            (_, Detail::Aggregate { value }) => *value,
            (_, Detail::Compare { lower, higher }) => higher.value - lower.value,
            (_, Detail::Trend { relative_change, .. }) => relative_change.abs(),
            (_, Detail::Correlation { coefficient, .. }) => coefficient.abs(),
            (_, Detail::Ranked { entries }) => entries.first().map(|e| e.value).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticsConfig {
    /// Minimum |relative end-to-end OLS change| for UP / DOWN.
    pub trend_threshold: f64,
    /// Minimum |r| for a CORRELATED result.
    pub correlation_threshold: f64,
    pub rank_depth: usize,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        AnalyticsConfig {
            trend_threshold: 0.1,
            correlation_threshold: 0.8,
            rank_depth: 3,
        }
    }
}

const TREND_EPS: f64 = 1e-9;

/// OLS slope over the index, scaled to the full span and divided by the
/// series mean magnitude.
pub fn trend_change(values: &[f64]) -> Result<f64, AnalyticsError> {
    let n = values.len();
    if n < 3 {
        return Err(AnalyticsError::SeriesTooShort(n));
    }
    let nf = n as f64;
    let mean_i = (nf - 1.0) / 2.0;
    let mean_v = values.iter().sum::<f64>() / nf;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let di = i as f64 - mean_i;
        num += di * (v - mean_v);
        den += di * di;
    }
    let slope = num / den;
    Ok(slope * (nf - 1.0) / mean_v.abs().max(TREND_EPS))
}

pub fn trend_of(values: &[f64]) -> Result<TrendDirection, AnalyticsError> {
    trend_with_threshold(values, AnalyticsConfig::default().trend_threshold)
}

pub fn trend_with_threshold(values: &[f64], threshold: f64) -> Result<TrendDirection, AnalyticsError> {
    let change = trend_change(values)?;
    Ok(direction_of(change, threshold))
}

fn direction_of(change: f64, threshold: f64) -> TrendDirection {
    if change >= threshold {
        TrendDirection::Up
    } else if change <= -threshold {
        TrendDirection::Down
    } else {
        TrendDirection::None
    }
}

/// Pearson correlation coefficient, clamped to [-1, 1].
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64, AnalyticsError> {
    if a.len() != b.len() {
        return Err(AnalyticsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(AnalyticsError::SeriesTooShort(a.len()));
    }
    let constant = |s: &[f64]| s.iter().all(|v| *v == s[0]);
    if constant(a) || constant(b) {
        return Err(AnalyticsError::ConstantSeries);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Rows ordered most-recent first when the X axis is a time axis.
fn recency_order(t: &DataTable) -> Vec<usize> {
    let n = t.row_count();
    let xs = t.x_values();
    let increasing = n < 2 || xs[0] < xs[n - 1];
    if increasing {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    }
}

fn cv(t: &DataTable, values: &[f64], row: usize) -> CategoryValue {
    CategoryValue {
        category: t.x_values()[row].clone(),
        value: values[row],
    }
}

/// Rows sorted by value descending; equal values keep row order.
fn descending_rows(values: &[f64]) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..values.len()).collect();
    rows.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    rows
}

/// COMPARE for one column: the two most recent rows of a time series,
/// otherwise the two largest values. The earlier row is `lower` on ties.
pub fn compare_pair(t: &DataTable, y_column: &str, shape: TableShape) -> Option<AnalysisResult> {
    let values = &t.column(y_column)?.values;
    let (a, b) = if shape.is_time_series && is_time_axis(t.x_values()) {
        let order = recency_order(t);
        (order[0], order[1])
    } else {
        let rows = descending_rows(values);
        (rows[0], rows[1])
    };
    let (first, second) = (a.min(b), a.max(b));
    let (lower, higher) = if values[second] < values[first] {
        (second, first)
    } else {
        (first, second)
    };
    Some(AnalysisResult {
        kind: AnalysisType::Compare,
        y_column: y_column.to_string(),
        detail: Detail::Compare {
            lower: cv(t, values, lower),
            higher: cv(t, values, higher),
        },
    })
}

pub fn run_all(t: &DataTable, shape: TableShape) -> Vec<AnalysisResult> {
    run_all_with(t, shape, &AnalyticsConfig::default())
}

/// Every applicable analysis, in column order then [`AnalysisType::ALL`]
/// order. CORRELATED results are listed under the earlier column of the pair.
pub fn run_all_with(t: &DataTable, shape: TableShape, cfg: &AnalyticsConfig) -> Vec<AnalysisResult> {
    let cols = t.y_columns();
    let n = t.row_count();
    let time_series = shape.is_time_series && is_time_axis(t.x_values());
    let mut out = Vec::new();
    for (ci, col) in cols.iter().enumerate() {
        let values = &col.values;
        let name = &col.name;
        let push = |out: &mut Vec<AnalysisResult>, kind, detail| {
            out.push(AnalysisResult {
                kind,
                y_column: name.clone(),
                detail,
            })
        };
        let desc = descending_rows(values);
        let max_row = desc[0];
        let min_row = (0..n)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .expect("non-empty column");
        let sum: f64 = values.iter().sum();

        push(&mut out, AnalysisType::Max, Detail::Extreme(cv(t, values, max_row)));
        push(&mut out, AnalysisType::Min, Detail::Extreme(cv(t, values, min_row)));
        push(&mut out, AnalysisType::Sum, Detail::Aggregate { value: sum });
        push(
            &mut out,
            AnalysisType::Average,
            Detail::Aggregate {
                value: sum / n as f64,
            },
        );
        push(&mut out, AnalysisType::Value, Detail::Cell(cv(t, values, n - 1)));
        if time_series {
            let latest = recency_order(t)[0];
            push(&mut out, AnalysisType::MostRecent, Detail::Cell(cv(t, values, latest)));
        }
        if let Some(cmp) = compare_pair(t, name, shape) {
            out.push(cmp);
        }
        if time_series {
            let mut chrono_values = values.clone();
            if recency_order(t)[0] == 0 {
                chrono_values.reverse();
            }
            if let Ok(change) = trend_change(&chrono_values) {
                push(
                    &mut out,
                    AnalysisType::Trend,
                    Detail::Trend {
                        direction: direction_of(change, cfg.trend_threshold),
                        relative_change: change,
                    },
                );
            }
        }
        if shape.is_multi_column {
            for other in &cols[ci + 1..] {
                if let Ok(r) = correlation(values, &other.values) {
                    if r.abs() >= cfg.correlation_threshold {
                        push(
                            &mut out,
                            AnalysisType::Correlated,
                            Detail::Correlation {
                                other_column: other.name.clone(),
                                coefficient: r,
                            },
                        );
                    }
                }
            }
        }
        let entries = desc
            .iter()
            .take(cfg.rank_depth.min(n))
            .map(|&r| cv(t, values, r))
            .collect();
        push(&mut out, AnalysisType::Ranked, Detail::Ranked { entries });
    }
    out
}
