//! RDF-style triples for analysis results and their `[W]` / `[B]`
//! linearization.
//!
//! Linear form: fields joined by `" [W] "`, triples joined by `" [B] "`.
//! Field text may not contain either marker; collisions are rejected rather
//! than escaped so the wire format stays bit-exact.

use crate::analytics::{AnalysisResult, AnalysisType, Detail};
use crate::numfmt::canonical;
use crate::table::TableContext;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

pub const FIELD_SEP: &str = " [W] ";
pub const TRIPLE_SEP: &str = " [B] ";
pub const RESERVED: [&str; 2] = ["[W]", "[B]"];
pub const CONTEXT_SUBJECT: &str = "CONTEXT";
pub const TITLE_PREDICATE: &str = "TITLE";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdfError {
    #[error("field {0:?} contains a reserved separator token")]
    ReservedTokenInField(String),
    #[error("triple fields must be non-empty")]
    EmptyField,
    #[error("triple {index} has {fields} fields, expected 3")]
    MalformedTriple { index: usize, fields: usize },
    #[error("triple set is empty")]
    EmptySet,
    #[error("a TITLE triple must be the last triple of a set")]
    TitleNotLast,
    #[error("unknown insight type marker {0:?}")]
    UnknownMarker(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RdfTriple {
    subject: String,
    predicate: String,
    object: String,
}

impl RdfTriple {
    /// Fields are trimmed; empty fields and reserved tokens are rejected.
    pub fn new(subject: &str, predicate: &str, object: &str) -> Result<Self, RdfError> {
        let check = |f: &str| -> Result<String, RdfError> {
            let f = f.trim();
            if f.is_empty() {
                return Err(RdfError::EmptyField);
            }
            if RESERVED.iter().any(|r| f.contains(r)) {
                return Err(RdfError::ReservedTokenInField(f.to_string()));
            }
            Ok(f.to_string())
        };
        Ok(RdfTriple {
            subject: check(subject)?,
            predicate: check(predicate)?,
            object: check(object)?,
        })
    }

    pub fn title(title: &str) -> Result<Self, RdfError> {
        Self::new(CONTEXT_SUBJECT, TITLE_PREDICATE, title)
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    pub fn fields(&self) -> [&str; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn is_title(&self) -> bool {
        self.subject == CONTEXT_SUBJECT && self.predicate == TITLE_PREDICATE
    }

    /// Analysis type signalled by the predicate; `None` for TITLE triples.
    /// Plain column predicates are VALUE triples.
    pub fn kind(&self) -> Option<AnalysisType> {
        if self.is_title() {
            return None;
        }
        Some(split_predicate(&self.predicate).0)
    }

    /// Column name carried by the predicate (`"MAX Market cap"` →
    /// `"Market cap"`); `None` for CORRELATED and TITLE.
    pub fn column(&self) -> Option<&str> {
        if self.is_title() {
            return None;
        }
        split_predicate(&self.predicate).1
    }
}

const OPERATORS: [(&str, AnalysisType); 6] = [
    ("MAX ", AnalysisType::Max),
    ("MIN ", AnalysisType::Min),
    ("SUM ", AnalysisType::Sum),
    ("AVERAGE ", AnalysisType::Average),
    ("COMPARE ", AnalysisType::Compare),
    ("TREND ", AnalysisType::Trend),
];

fn split_predicate(predicate: &str) -> (AnalysisType, Option<&str>) {
    if predicate == "CORRELATED" {
        return (AnalysisType::Correlated, None);
    }
    for (prefix, kind) in OPERATORS {
        if let Some(col) = predicate.strip_prefix(prefix) {
            return (kind, Some(col));
        }
    }
    if let Some(rest) = predicate.strip_prefix("RANK_") {
        if let Some((digits, col)) = rest.split_once(' ') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return (AnalysisType::Ranked, Some(col));
            }
        }
    }
    (AnalysisType::Value, Some(predicate))
}

/// The operator word of a predicate (`"MAX"`, `"RANK_2"`), if any.
pub fn predicate_operator(predicate: &str) -> Option<&str> {
    match split_predicate(predicate) {
        (AnalysisType::Value, _) => None,
        (_, None) => Some(predicate),
        (_, Some(col)) => Some(predicate[..predicate.len() - col.len()].trim_end()),
    }
}

impl Serialize for RdfTriple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.fields().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RdfTriple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [s, p, o] = <[String; 3]>::deserialize(d)?;
        RdfTriple::new(&s, &p, &o).map_err(serde::de::Error::custom)
    }
}

/// Insight type of a set, or the marker for a set holding only a TITLE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetType {
    Analysis(AnalysisType),
    TitleOnly,
}

impl SetType {
    pub fn analysis(self) -> Option<AnalysisType> {
        match self {
            SetType::Analysis(t) => Some(t),
            SetType::TitleOnly => None,
        }
    }
}

impl fmt::Display for SetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetType::Analysis(t) => f.write_str(t.as_str()),
            SetType::TitleOnly => f.write_str(TITLE_PREDICATE),
        }
    }
}

impl Serialize for SetType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SetType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == TITLE_PREDICATE {
            return Ok(SetType::TitleOnly);
        }
        s.parse()
            .map(SetType::Analysis)
            .map_err(|_| serde::de::Error::custom(RdfError::UnknownMarker(s)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TripleSet {
    triples: Vec<RdfTriple>,
    insight_type: SetType,
}

#[derive(Deserialize)]
struct RawSet {
    triples: Vec<RdfTriple>,
    insight_type: Option<SetType>,
}

impl<'de> Deserialize<'de> for TripleSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSet::deserialize(d)?;
        match raw.insight_type {
            Some(t) => TripleSet::with_type(raw.triples, t),
            None => TripleSet::new(raw.triples),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn validate(triples: &[RdfTriple]) -> Result<(), RdfError> {
    if triples.is_empty() {
        return Err(RdfError::EmptySet);
    }
    let last = triples.len() - 1;
    if triples[..last].iter().any(RdfTriple::is_title) {
        return Err(RdfError::TitleNotLast);
    }
    Ok(())
}

/// Type implied by the triples: the first non-VALUE analysis predicate,
/// else VALUE, else TITLE-only.
fn infer_type(triples: &[RdfTriple]) -> SetType {
    let kinds: Vec<AnalysisType> = triples.iter().filter_map(RdfTriple::kind).collect();
    kinds
        .iter()
        .copied()
        .find(|k| *k != AnalysisType::Value)
        .or(kinds.first().copied())
        .map(SetType::Analysis)
        .unwrap_or(SetType::TitleOnly)
}

impl TripleSet {
    /// Builds a set whose type is inferred from its predicates.
    pub fn new(triples: Vec<RdfTriple>) -> Result<Self, RdfError> {
        validate(&triples)?;
        let insight_type = infer_type(&triples);
        Ok(TripleSet {
            triples,
            insight_type,
        })
    }

    pub fn with_type(triples: Vec<RdfTriple>, insight_type: SetType) -> Result<Self, RdfError> {
        validate(&triples)?;
        Ok(TripleSet {
            triples,
            insight_type,
        })
    }

    pub fn triples(&self) -> &[RdfTriple] {
        &self.triples
    }

    pub fn insight_type(&self) -> SetType {
        self.insight_type
    }

    pub fn title(&self) -> Option<&str> {
        self.triples.last().filter(|t| t.is_title()).map(|t| t.object())
    }

    /// Triples other than the TITLE triple.
    pub fn content(&self) -> &[RdfTriple] {
        match self.triples.last() {
            Some(t) if t.is_title() => &self.triples[..self.triples.len() - 1],
            _ => &self.triples,
        }
    }

    /// `[[s,p,o],...]` JSON form.
    pub fn to_json_array(&self) -> serde_json::Value {
        serde_json::to_value(&self.triples).expect("triples serialize")
    }

    pub fn linearize(&self) -> String {
        linearize(self)
    }
}

pub fn linearize(ts: &TripleSet) -> String {
    ts.triples
        .iter()
        .map(|t| t.fields().join(FIELD_SEP))
        .collect::<Vec<_>>()
        .join(TRIPLE_SEP)
}

/// Inverse of [`linearize`]. The set type is inferred from the predicates,
/// so a MOST_RECENT set comes back as VALUE.
pub fn parse_linear(s: &str) -> Result<TripleSet, RdfError> {
    if s.trim().is_empty() {
        return Err(RdfError::EmptySet);
    }
    let mut triples = Vec::new();
    for (index, chunk) in s.split(TRIPLE_SEP).enumerate() {
        let fields: Vec<&str> = chunk.split(FIELD_SEP).collect();
        if fields.len() != 3 {
            return Err(RdfError::MalformedTriple {
                index,
                fields: fields.len(),
            });
        }
        triples.push(RdfTriple::new(fields[0], fields[1], fields[2])?);
    }
    TripleSet::new(triples)
}

/// Casts one analysis result into its triple form, with the TITLE triple
/// appended last.
pub fn cast(a: &AnalysisResult, ctx: &TableContext, range_label: &str) -> Result<TripleSet, RdfError> {
    let col = a.y_column.as_str();
    let op = |name: &str| format!("{name} {col}");
    let mut triples = Vec::new();
    match &a.detail {
        Detail::Extreme(cv) => {
            triples.push(RdfTriple::new(&cv.category, &op(a.kind.as_str()), &canonical(cv.value))?)
        }
        Detail::Aggregate { value } => {
            triples.push(RdfTriple::new(range_label, &op(a.kind.as_str()), &canonical(*value))?)
        }
        Detail::Cell(cv) => triples.push(RdfTriple::new(&cv.category, col, &canonical(cv.value))?),
        Detail::Compare { lower, higher } => {
            triples.push(RdfTriple::new(&higher.category, col, &canonical(higher.value))?);
            triples.push(RdfTriple::new(&lower.category, col, &canonical(lower.value))?);
            triples.push(RdfTriple::new(&lower.category, &op("COMPARE"), &higher.category)?);
        }
        Detail::Trend { direction, .. } => {
            triples.push(RdfTriple::new(range_label, &op("TREND"), direction.as_str())?)
        }
        Detail::Correlation { other_column, .. } => {
            triples.push(RdfTriple::new(col, "CORRELATED", other_column)?)
        }
        Detail::Ranked { entries } => {
            for (i, e) in entries.iter().enumerate() {
                triples.push(RdfTriple::new(
                    &e.category,
                    &op(&format!("RANK_{}", i + 1)),
                    &canonical(e.value),
                )?);
            }
        }
    }
    triples.push(RdfTriple::title(&ctx.title)?);
    TripleSet::with_type(triples, SetType::Analysis(a.kind))
}

impl fmt::Display for TripleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.linearize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{run_all, CategoryValue};
    use crate::table::{detect_shape, parse_csv, ChartKind, SubjectList};
    use proptest::prelude::*;

    fn ctx() -> TableContext {
        TableContext::new(
            "Worldwide cheese market cap",
            "food and nutrition",
            ChartKind::Line,
            &SubjectList::default(),
        )
        .unwrap()
    }

    fn max_result() -> AnalysisResult {
        AnalysisResult {
            kind: AnalysisType::Max,
            y_column: "Market cap".into(),
            detail: Detail::Extreme(CategoryValue {
                category: "2022".into(),
                value: 81.2,
            }),
        }
    }

    #[test]
    fn cast_max_with_title() {
        let ts = cast(&max_result(), &ctx(), "1960-2022").unwrap();
        assert_eq!(
            serde_json::to_string(&ts.to_json_array()).unwrap(),
            r#"[["2022","MAX Market cap","81.2"],["CONTEXT","TITLE","Worldwide cheese market cap"]]"#
        );
        assert_eq!(
            ts.linearize(),
            "2022 [W] MAX Market cap [W] 81.2 [B] CONTEXT [W] TITLE [W] Worldwide cheese market cap"
        );
        let single = TripleSet::new(vec![RdfTriple::new("2022", "MAX Market cap", "81.2").unwrap()]).unwrap();
        assert_eq!(single.linearize(), "2022 [W] MAX Market cap [W] 81.2");
    }

    #[test]
    fn cast_compare_and_ranked() {
        let t = parse_csv(b"Year,Market cap\n1960,14.1\n2021,76.1\n2022,81.2", true).unwrap();
        let rs = run_all(&t, detect_shape(&t));
        let cmp = rs.iter().find(|r| r.kind == AnalysisType::Compare).unwrap();
        let ts = cast(cmp, &ctx(), "1960-2022").unwrap();
        assert_eq!(
            serde_json::to_string(&ts.to_json_array()).unwrap(),
            r#"[["2022","Market cap","81.2"],["2021","Market cap","76.1"],["2021","COMPARE Market cap","2022"],["CONTEXT","TITLE","Worldwide cheese market cap"]]"#
        );
        assert_eq!(parse_linear(&ts.linearize()).unwrap(), ts);

        let ranked = rs.iter().find(|r| r.kind == AnalysisType::Ranked).unwrap();
        let ts = cast(ranked, &ctx(), "1960-2022").unwrap();
        assert_eq!(
            serde_json::to_string(&ts.to_json_array()).unwrap(),
            r#"[["2022","RANK_1 Market cap","81.2"],["2021","RANK_2 Market cap","76.1"],["1960","RANK_3 Market cap","14.1"],["CONTEXT","TITLE","Worldwide cheese market cap"]]"#
        );
    }

    #[test]
    fn reserved_tokens_rejected() {
        let mut bad = ctx();
        bad.title = "Sales [W] 2020".into();
        assert!(matches!(
            cast(&max_result(), &bad, "x"),
            Err(RdfError::ReservedTokenInField(_))
        ));
    }

    #[test]
    fn parse_examples() {
        let ts = parse_linear("a [W] b [W] c").unwrap();
        assert_eq!(ts.triples(), [RdfTriple::new("a", "b", "c").unwrap()]);
        assert_eq!(
            parse_linear("a [W] b"),
            Err(RdfError::MalformedTriple { index: 0, fields: 2 })
        );
        assert!(parse_linear("CONTEXT [W] TITLE [W] t [B] a [W] b [W] c").is_err());
    }

    #[test]
    fn kinds_and_columns() {
        let t = RdfTriple::new("2021", "COMPARE Market cap", "2022").unwrap();
        assert_eq!(t.kind(), Some(AnalysisType::Compare));
        assert_eq!(t.column(), Some("Market cap"));
        let r = RdfTriple::new("a", "RANK_12 Sales", "3").unwrap();
        assert_eq!(r.kind(), Some(AnalysisType::Ranked));
        assert_eq!(predicate_operator(r.predicate()), Some("RANK_12"));
        let v = RdfTriple::new("a", "RANK_x", "3").unwrap();
        assert_eq!(v.kind(), Some(AnalysisType::Value));
        assert_eq!(RdfTriple::title("T").unwrap().kind(), None);
        let set = TripleSet::new(vec![RdfTriple::title("T").unwrap()]).unwrap();
        assert_eq!(set.insight_type(), SetType::TitleOnly);
    }

    #[test]
    fn cast_is_injective_on_fixture() {
        let t = parse_csv(b"Year,A,B\n2019,1,2\n2020,5,10\n2021,3,6\n2022,8,17", true).unwrap();
        let rs = run_all(&t, detect_shape(&t));
        let sets: Vec<TripleSet> = rs.iter().map(|r| cast(r, &ctx(), "2019-2022").unwrap()).collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                assert_ne!(sets[i], sets[j], "{:?} vs {:?}", rs[i], rs[j]);
            }
        }
    }

    fn arb_field() -> impl Strategy<Value = String> {
        "[ab \\[\\]WB0-9.,-]{1,8}".prop_filter_map("valid field", |s| {
            let t = s.trim().to_string();
            (!t.is_empty() && !RESERVED.iter().any(|r| t.contains(r))).then_some(t)
        })
    }

    fn arb_set() -> impl Strategy<Value = TripleSet> {
        (
            proptest::collection::vec((arb_field(), arb_field(), arb_field()), 1..5),
            proptest::option::of(arb_field()),
        )
            .prop_map(|(fields, title)| {
                let mut triples: Vec<RdfTriple> = fields
                    .iter()
                    .map(|(s, p, o)| RdfTriple::new(s, p, o).unwrap())
                    .filter(|t| !t.is_title())
                    .collect();
                if triples.is_empty() {
                    triples.push(RdfTriple::new("x", "y", "z").unwrap());
                }
                if let Some(t) = title {
                    triples.push(RdfTriple::title(&t).unwrap());
                }
                TripleSet::new(triples).unwrap()
            })
    }

    proptest! {
        #[test]
        fn linear_round_trip(ts in arb_set()) {
            let s = ts.linearize();
            prop_assert_eq!(s.trim(), s.as_str());
            prop_assert_eq!(parse_linear(&s).unwrap(), ts);
        }

        #[test]
        fn json_round_trip(ts in arb_set()) {
            let json = serde_json::to_string(&ts).unwrap();
            prop_assert_eq!(serde_json::from_str::<TripleSet>(&json).unwrap(), ts);
        }
    }
}
