//! Deterministic template realizer. Patterns live in
//! `patterns/templates.v1.txt`, one per insight type.

use super::RealizeError;
use crate::analytics::AnalysisType;
use crate::rdf::{RdfTriple, SetType, TripleSet};
use std::collections::HashMap;
use std::sync::OnceLock;

pub const PATTERN_VERSION: &str = "v1";
const PATTERN_FILE: &str = include_str!("../../patterns/templates.v1.txt");

fn patterns() -> &'static HashMap<&'static str, &'static str> {
    static PATTERNS: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        PATTERN_FILE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once(char::is_whitespace))
            .map(|(k, p)| (k, p.trim()))
            .collect()
    })
}

fn fill(key: &str, title: Option<&str>, slots: &[(&str, &str)]) -> Result<String, RealizeError> {
    let pattern = patterns()
        .get(key)
        .ok_or_else(|| RealizeError::UnknownType(key.to_string()))?;
    let body = pattern.strip_prefix("{title}: ").unwrap_or(pattern);
    let mut out = String::new();
    let mut rest = body;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..]
            .find('}')
            .map(|c| open + c)
            .ok_or_else(|| RealizeError::UnknownType(key.to_string()))?;
        let name = &rest[open + 1..close];
        let value = slots
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| RealizeError::UnknownType(format!("{key}:{name}")))?;
        out.push_str(value);
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(match title {
        Some(t) => format!("{t}: {out}"),
        None => capitalize(&out),
    })
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn malformed(kind: AnalysisType) -> RealizeError {
    RealizeError::MalformedSet(kind.to_string())
}

fn first_of(content: &[RdfTriple], kind: AnalysisType) -> Result<&RdfTriple, RealizeError> {
    content
        .iter()
        .find(|t| t.kind() == Some(kind))
        .ok_or_else(|| malformed(kind))
}

fn join_ranking(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// One sentence for a set, using the pattern of its insight type.
pub fn realize_template(ts: &TripleSet) -> Result<String, RealizeError> {
    let kind = match ts.insight_type() {
        SetType::Analysis(k) => k,
        SetType::TitleOnly => return Err(RealizeError::UnknownType("TITLE".into())),
    };
    let title = ts.title();
    let content = ts.content();
    use AnalysisType::*;
    match kind {
        Max | Min | Value | MostRecent => {
            let t = first_of(content, if matches!(kind, MostRecent) { Value } else { kind })?;
            let column = t.column().ok_or_else(|| malformed(kind))?;
            fill(
                kind.as_str(),
                title,
                &[("column", column), ("value", t.object()), ("x", t.subject())],
            )
        }
        Sum | Average => {
            let t = first_of(content, kind)?;
            let column = t.column().ok_or_else(|| malformed(kind))?;
            fill(
                kind.as_str(),
                title,
                &[("column", column), ("value", t.object()), ("range", t.subject())],
            )
        }
        Compare => {
            let cmp = first_of(content, Compare)?;
            let column = cmp.column().ok_or_else(|| malformed(kind))?;
            let value_of = |category: &str| {
                content
                    .iter()
                    .find(|t| t.kind() == Some(Value) && t.subject() == category && t.predicate() == column)
                    .map(|t| t.object())
                    .ok_or_else(|| malformed(kind))
            };
            let (lower_x, higher_x) = (cmp.subject(), cmp.object());
            let (lower_value, higher_value) = (value_of(lower_x)?, value_of(higher_x)?);
            let tie = lower_value.parse::<f64>().ok() == higher_value.parse::<f64>().ok();
            fill(
                if tie { "COMPARE_TIE" } else { "COMPARE" },
                title,
                &[
                    ("column", column),
                    ("higher_x", higher_x),
                    ("higher_value", higher_value),
                    ("lower_x", lower_x),
                    ("lower_value", lower_value),
                ],
            )
        }
        Trend => {
            let t = first_of(content, Trend)?;
            let column = t.column().ok_or_else(|| malformed(kind))?;
            let key = match t.object() {
                "UP" => "TREND_UP",
                "DOWN" => "TREND_DOWN",
                "NONE" => "TREND_NONE",
                _ => return Err(malformed(kind)),
            };
            fill(key, title, &[("column", column), ("range", t.subject())])
        }
        Correlated => {
            let t = first_of(content, Correlated)?;
            fill(
                "CORRELATED",
                title,
                &[("column", t.subject()), ("other", t.object())],
            )
        }
        Ranked => {
            let ranks: Vec<&RdfTriple> = content.iter().filter(|t| t.kind() == Some(Ranked)).collect();
            let column = ranks
                .first()
                .and_then(|t| t.column())
                .ok_or_else(|| malformed(kind))?;
            let items: Vec<String> = ranks
                .iter()
                .map(|t| format!("{} ({})", t.subject(), t.object()))
                .collect();
            fill(
                "RANKED",
                title,
                &[("column", column), ("ranking", &join_ranking(&items))],
            )
        }
    }
}
