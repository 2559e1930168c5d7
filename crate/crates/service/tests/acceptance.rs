//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use nbiig_core::analytics::{run_all, AnalysisResult, AnalysisType, CategoryValue, Detail};
use nbiig_core::faithfulness::{extract_numbers, numeric_field, FaithfulnessScorer};
use nbiig_core::numfmt::canonical;
use nbiig_core::rdf::{cast, linearize, parse_linear, RdfTriple, SetType, TripleSet};
use nbiig_core::realization::InsightCandidate;
use nbiig_core::recommender::{estimate_priors, recommend_detailed, PreferenceModel, RecommendConfig, SegmentKey};
use nbiig_core::table::{
    detect_shape, parse_csv, x_range_label, ChartKind, DataTable, SubjectList, TableContext, TableShape, ValueColumn,
};
use nbiig_core::{generate_candidates, AnalyticsConfig, TypeDictionary};
use nbiig_corpus::augment::{build_augmentation_prompts, parse_prompt, CONTEXT_SIZE, DEFAULT_PER_TYPE_CAP, GENERATION_CUE};
use nbiig_corpus::gold::{score_matching, GoldRecord};
use nbiig_corpus::io::read_jsonl;
use nbiig_corpus::matching::build_pairs_with;
use nbiig_corpus::split::split_dataset;
use nbiig_corpus::MatchedPair;
use nbiig_eval::parent::parent_single;
use nbiig_eval::{evaluate, modified_precision, tokenize, EvalRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

const CHEESE_TITLE: &str = "Worldwide cheese market cap";
const TABLE_SEED: u64 = 20_240_501;
const TABLE_COUNT: usize = 1000;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

// ---------- random tables ----------

const ONSETS: [&str; 10] = ["B", "K", "M", "T", "V", "S", "L", "R", "D", "N"];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 10] = ["mor", "lan", "rit", "sen", "dow", "gal", "pex", "ruv", "tam", "zol"];
const COLUMNS: [&str; 8] = [
    "Revenue",
    "Exports",
    "Shipments",
    "Visitors",
    "Subscribers",
    "Turnover",
    "Deliveries",
    "Output",
];

fn category_name(i: usize) -> String {
    format!("{}{}{}", ONSETS[i % 10], NUCLEI[(i / 10) % 5], CODAS[(i / 50 + i) % 10])
}

struct GeneratedTable {
    table: DataTable,
    ctx: TableContext,
    time_series: bool,
}

fn random_value(rng: &mut ChaCha8Rng) -> f64 {
    let scale = if rng.random_bool(0.5) { 10.0 } else { 100.0 };
    let magnitude: i64 = rng.random_range(0..=50_000);
    let sign = if rng.random_bool(0.15) { -1 } else { 1 };
    (sign * magnitude) as f64 / scale
}

fn random_table(rng: &mut ChaCha8Rng, index: usize) -> GeneratedTable {
    let rows = rng.random_range(3..=50);
    let cols = rng.random_range(1..=4);
    let roll: f64 = rng.random();
    let (x_name, x_values, time_series) = if roll < 0.45 {
        let start = rng.random_range(1950..=1990);
        ("Year", (0..rows).map(|i| (start + i).to_string()).collect::<Vec<_>>(), true)
    } else if roll < 0.6 {
        let start = rng.random_range(2000..=2040);
        ("Year", (0..rows).map(|i| (start - i).to_string()).collect(), true)
    } else {
        let offset = rng.random_range(0..50);
        ("Region", (0..rows).map(|i| category_name(i + offset)).collect(), false)
    };
    let mut names: Vec<&str> = COLUMNS.to_vec();
    let mut y_columns = Vec::with_capacity(cols);
    for _ in 0..cols {
        let name = names.remove(rng.random_range(0..names.len()));
        let mut values: Vec<f64> = Vec::with_capacity(rows);
        for r in 0..rows {
            if r > 0 && rng.random_bool(0.2) {
                let j = rng.random_range(0..r);
                values.push(values[j]);
            } else {
                values.push(random_value(rng));
            }
        }
        y_columns.push(ValueColumn {
            name: name.to_string(),
            values,
        });
    }
    let table = DataTable::new(x_name, x_values, y_columns).expect("generated table is valid");
    let title = if index % 3 == 0 {
        format!("{} trade figures {}", category_name(index), 1990 + index % 30)
    } else {
        format!("{} statistics", category_name(index))
    };
    let chart = if time_series { ChartKind::Line } else { ChartKind::Bar };
    let ctx = TableContext::new(&title, "economy", chart, &SubjectList::default()).expect("valid context");
    GeneratedTable {
        table,
        ctx,
        time_series,
    }
}

fn random_tables() -> Vec<GeneratedTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(TABLE_SEED);
    (0..TABLE_COUNT).map(|i| random_table(&mut rng, i)).collect()
}

// ---------- brute-force oracle ----------

fn first_max(values: &[f64], skip: &[usize]) -> usize {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        match best {
            Some(b) if *v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best.expect("non-empty column")
}

fn first_min(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, PartialEq)]
enum Expected {
    Cell(String, String),
    Number(String),
    Pair { lower: (String, String), higher: (String, String) },
    Ranking(Vec<(String, String)>),
}

fn cell(xs: &[String], values: &[f64], i: usize) -> (String, String) {
    (xs[i].clone(), canonical(values[i]))
}

fn oracle(kind: AnalysisType, xs: &[String], values: &[f64], time_series: bool) -> Expected {
    let n = values.len();
    match kind {
        AnalysisType::Max => {
            let (x, v) = cell(xs, values, first_max(values, &[]));
            Expected::Cell(x, v)
        }
        AnalysisType::Min => {
            let (x, v) = cell(xs, values, first_min(values));
            Expected::Cell(x, v)
        }
        AnalysisType::Value => {
            let (x, v) = cell(xs, values, n - 1);
            Expected::Cell(x, v)
        }
        AnalysisType::Sum | AnalysisType::Average => {
            let mut acc = 0.0;
            for v in values {
                acc += v;
            }
            if kind == AnalysisType::Average {
                acc /= n as f64;
            }
            Expected::Number(canonical(acc))
        }
        AnalysisType::Ranked => {
            let mut picked = Vec::new();
            for _ in 0..n.min(3) {
                picked.push(first_max(values, &picked));
            }
            Expected::Ranking(picked.into_iter().map(|i| cell(xs, values, i)).collect())
        }
        AnalysisType::Compare => {
            let (a, b) = if time_series {
                let increasing = xs[0] < xs[n - 1];
                if increasing {
                    (n - 2, n - 1)
                } else {
                    (0, 1)
                }
            } else {
                let top = first_max(values, &[]);
                let second = first_max(values, &[top]);
                (top.min(second), top.max(second))
            };
            let (lower, higher) = if values[b] < values[a] { (b, a) } else { (a, b) };
            Expected::Pair {
                lower: cell(xs, values, lower),
                higher: cell(xs, values, higher),
            }
        }
        other => panic!("no oracle for {other}"),
    }
}

fn cv(c: &CategoryValue) -> (String, String) {
    (c.category.clone(), canonical(c.value))
}

fn observed(r: &AnalysisResult) -> Expected {
    match &r.detail {
        Detail::Extreme(c) | Detail::Cell(c) => {
            let (x, v) = cv(c);
            Expected::Cell(x, v)
        }
        Detail::Aggregate { value } => Expected::Number(canonical(*value)),
        Detail::Compare { lower, higher } => Expected::Pair {
            lower: cv(lower),
            higher: cv(higher),
        },
        Detail::Ranked { entries } => Expected::Ranking(entries.iter().map(cv).collect()),
        other => panic!("unexpected detail {other:?}"),
    }
}

const ORACLE_KINDS: [AnalysisType; 7] = [
    AnalysisType::Max,
    AnalysisType::Min,
    AnalysisType::Sum,
    AnalysisType::Average,
    AnalysisType::Ranked,
    AnalysisType::Value,
    AnalysisType::Compare,
];

fn analytics_oracle(tables: &[GeneratedTable]) -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for (i, g) in tables.iter().enumerate() {
        let shape = detect_shape(&g.table);
        if shape.is_time_series != g.time_series {
            failures.push(format!("table {i}: time axis misdetected"));
            continue;
        }
        let results = run_all(&g.table, shape);
        for col in g.table.y_columns() {
            for kind in ORACLE_KINDS {
                let found: Vec<&AnalysisResult> =
                    results.iter().filter(|r| r.kind == kind && r.y_column == col.name).collect();
                let want = oracle(kind, g.table.x_values(), &col.values, g.time_series);
                checked += 1;
                match found.as_slice() {
                    [one] if observed(one) == want => {}
                    other => failures.push(format!(
                        "table {i} {kind} {}: expected {want:?}, got {:?}",
                        col.name,
                        other.iter().map(|r| observed(r)).collect::<Vec<_>>()
                    )),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    let mut detail = format!(
        "{checked} payloads over {} tables, {} mismatches, {:.2}s (limit 10s)",
        tables.len(),
        failures.len(),
        elapsed.as_secs_f64()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

// ---------- cheese fixture ----------

fn cheese_sets(file: &str) -> Vec<TripleSet> {
    let bytes = std::fs::read(manifest_path(&format!("tests/fixtures/{file}"))).expect("fixture");
    let table = parse_csv(&bytes, true).expect("fixture parses");
    let ctx = TableContext::new(CHEESE_TITLE, "food and nutrition", ChartKind::Line, &SubjectList::default()).unwrap();
    let range = x_range_label(&table);
    run_all(&table, detect_shape(&table))
        .iter()
        .map(|r| cast(r, &ctx, &range).expect("cheese results cast"))
        .collect()
}

fn cheese_fixture_triples() -> Outcome {
    let title = format!("CONTEXT [W] TITLE [W] {CHEESE_TITLE}");
    let expected = [
        ("MAX", "cheese.csv", format!("2022 [W] MAX Market cap [W] 81.2 [B] {title}")),
        ("VALUE", "cheese.csv", format!("2022 [W] Market cap [W] 81.2 [B] {title}")),
        (
            "COMPARE",
            "cheese.csv",
            format!("2022 [W] Market cap [W] 81.2 [B] 2021 [W] Market cap [W] 76.1 [B] 2021 [W] COMPARE Market cap [W] 2022 [B] {title}"),
        ),
        ("TREND", "cheese.csv", format!("1960-2022 [W] TREND Market cap [W] UP [B] {title}")),
        ("CORRELATED", "cheese_profit.csv", format!("Profit [W] CORRELATED [W] Market cap [B] {title}")),
    ];
    let plain = cheese_sets("cheese.csv");
    let profit = cheese_sets("cheese_profit.csv");
    let mut missing = Vec::new();
    for (kind, file, want) in &expected {
        let sets = if *file == "cheese.csv" { &plain } else { &profit };
        if !sets.iter().any(|s| s.linearize() == *want) {
            missing.push(*kind);
        }
    }
    let titled = plain
        .iter()
        .chain(&profit)
        .all(|s| s.triples().last().is_some_and(|t| t.fields() == ["CONTEXT", "TITLE", CHEESE_TITLE]));
    if !titled {
        missing.push("TITLE");
    }
    let pass = missing.is_empty();
    let detail = if pass {
        "MAX, VALUE, COMPARE, TREND, CORRELATED and TITLE triple sets byte-exact".to_string()
    } else {
        format!("mismatched: {}", missing.join(", "))
    };
    outcome(pass, detail)
}

// ---------- linearization round trip ----------

const FIELD_CHARS: &[char] = &[
    'a', 'b', 'q', 'W', 'B', 'Z', '0', '7', '9', ' ', ' ', '[', ']', '-', '.', ',', ':', '_', '(', 'é', 'ü', '€', '%',
];

fn random_field(rng: &mut ChaCha8Rng) -> String {
    loop {
        let len = rng.random_range(1..=14);
        let s: String = (0..len).map(|_| FIELD_CHARS[rng.random_range(0..FIELD_CHARS.len())]).collect();
        let s = s.trim().to_string();
        if !s.is_empty() && !s.contains("[W]") && !s.contains("[B]") {
            return s;
        }
    }
}

fn random_predicate(rng: &mut ChaCha8Rng) -> String {
    let col = random_field(rng);
    match rng.random_range(0..9) {
        0 => format!("MAX {col}"),
        1 => format!("MIN {col}"),
        2 => format!("SUM {col}"),
        3 => format!("AVERAGE {col}"),
        4 => format!("COMPARE {col}"),
        5 => format!("TREND {col}"),
        6 => format!("RANK_{} {col}", rng.random_range(1..=5)),
        7 => "CORRELATED".to_string(),
        _ => col,
    }
}

fn random_triple_set(rng: &mut ChaCha8Rng) -> TripleSet {
    let content = rng.random_range(0..=5);
    let mut triples: Vec<RdfTriple> = (0..content)
        .map(|_| RdfTriple::new(&random_field(rng), &random_predicate(rng), &random_field(rng)).unwrap())
        .collect();
    if content == 0 || rng.random_bool(0.7) {
        triples.push(RdfTriple::title(&random_field(rng)).unwrap());
    }
    TripleSet::new(triples).expect("generated set is valid")
}

fn linearization_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0usize;
    let mut first = None;
    for _ in 0..10_000 {
        let ts = random_triple_set(&mut rng);
        let line = linearize(&ts);
        if parse_linear(&line).ok().as_ref() != Some(&ts) {
            failures += 1;
            first.get_or_insert(line);
        }
    }
    let mut detail = format!("10000 sets, {failures} failures");
    if let Some(f) = first {
        detail.push_str(&format!("; first: {f:?}"));
    }
    outcome(failures == 0, detail)
}

// ---------- template faithfulness and mutations ----------

fn template_candidates(tables: &[GeneratedTable], scorer: &FaithfulnessScorer) -> Vec<InsightCandidate> {
    let cfg = AnalyticsConfig::default();
    tables
        .iter()
        .flat_map(|g| generate_candidates(&g.table, &g.ctx, None, scorer, &cfg))
        .collect()
}

fn template_faithfulness(candidates: &[InsightCandidate]) -> Outcome {
    let imperfect: Vec<&InsightCandidate> = candidates.iter().filter(|c| c.faithfulness != 1.0).collect();
    let mut detail = format!(
        "{} of {} template insights score exactly 1.0",
        candidates.len() - imperfect.len(),
        candidates.len()
    );
    if let Some(c) = imperfect.first() {
        detail.push_str(&format!("; first miss ({}): {:?}", c.faithfulness, c.text));
    }
    outcome(!candidates.is_empty() && imperfect.is_empty(), detail)
}

fn is_number_boundary(c: Option<char>) -> bool {
    c.is_none_or(|c| !(c.is_alphanumeric() || c == '.' || c == '_'))
}

/// Replaces the first standalone occurrence of `surface`.
fn replace_number(text: &str, surface: &str, replacement: &str) -> Option<String> {
    let mut from = 0;
    while let Some(pos) = text[from..].find(surface).map(|p| p + from) {
        let end = pos + surface.len();
        let before = text[..pos].chars().next_back();
        let after = text[end..].chars().next();
        if is_number_boundary(before) && is_number_boundary(after) {
            return Some(format!("{}{replacement}{}", &text[..pos], &text[end..]));
        }
        from = end;
    }
    None
}

fn replace_all_ci(text: &str, needle: &str, replacement: &str) -> String {
    let lower = text.to_lowercase();
    let needle = needle.to_lowercase();
    let mut out = String::new();
    let mut last = 0;
    for (pos, _) in lower.match_indices(&needle) {
        out.push_str(&text[last..pos]);
        out.push_str(replacement);
        last = pos + needle.len();
    }
    out.push_str(&text[last..]);
    out
}

fn known_numbers(ts: &TripleSet) -> Vec<f64> {
    ts.triples()
        .iter()
        .flat_map(|t| t.fields())
        .flat_map(extract_numbers)
        .map(|m| m.value)
        .collect()
}

fn swap_number(c: &InsightCandidate, ts: &TripleSet, rng: &mut ChaCha8Rng) -> Option<String> {
    let supported: Vec<f64> = ts
        .content()
        .iter()
        .flat_map(|t| t.fields())
        .filter_map(numeric_field)
        .collect();
    let mentions: Vec<_> = extract_numbers(&c.text)
        .into_iter()
        .filter(|m| supported.iter().any(|&v| m.matches(v)))
        .collect();
    if mentions.is_empty() {
        return None;
    }
    let m = &mentions[rng.random_range(0..mentions.len())];
    let known = known_numbers(ts);
    let mut candidate = m.value;
    for step in 1.. {
        candidate = m.value + (step as f64) * 7.3 + 1.0;
        let probe = extract_numbers(&canonical(candidate));
        if probe.iter().all(|p| !known.iter().any(|&k| p.matches(k))) {
            break;
        }
    }
    replace_number(&c.text, &m.surface, &canonical(candidate))
}

fn swap_entity(c: &InsightCandidate, ts: &TripleSet) -> Option<String> {
    let first = ts.content().first()?;
    let entity = first.column().unwrap_or(first.subject());
    let swapped = replace_all_ci(&c.text, entity, "Zorblax");
    (swapped != c.text).then_some(swapped)
}

fn append_number(c: &InsightCandidate) -> String {
    format!("{} It later reached 98765.4.", c.text.trim_end())
}

fn mutation_test(candidates: &[InsightCandidate], scorer: &FaithfulnessScorer) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let names = ["number swap", "entity swap", "appended number"];
    let mut counts = [0usize; 3];
    let mut above_limit = Vec::new();
    let mut false_positives = 0usize;
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < 500 && attempts < 50_000 {
        attempts += 1;
        let c = &candidates[rng.random_range(0..candidates.len())];
        let Some(ts) = c.triples.as_ref() else { continue };
        let kind = done % 3;
        let mutated = match kind {
            0 => swap_number(c, ts, &mut rng),
            1 => swap_entity(c, ts),
            _ => Some(append_number(c)),
        };
        let Some(mutated) = mutated else { continue };
        if scorer.score(&c.text, ts).map(|r| r.score).ok() != Some(1.0) {
            false_positives += 1;
        }
        let score = scorer.score(&mutated, ts).map(|r| r.score).unwrap_or(0.0);
        let limit_ok = score < 1.0 && (kind != 0 || score <= 0.75);
        if !limit_ok {
            above_limit.push(format!("{} scored {score}: {mutated:?}", names[kind]));
        }
        counts[kind] += 1;
        done += 1;
    }
    let pass = done == 500 && above_limit.is_empty() && false_positives == 0;
    let mut detail = format!(
        "{done} perturbations ({} number swaps, {} entity swaps, {} appended numbers), {} not penalized, {false_positives} false positives",
        counts[0],
        counts[1],
        counts[2],
        above_limit.len()
    );
    if let Some(f) = above_limit.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

// ---------- gold corpus ----------

fn gold_records() -> Vec<GoldRecord> {
    read_jsonl(&manifest_path("../corpus/data/gold_matching.jsonl")).expect("gold corpus")
}

fn gold_matching(records: &[GoldRecord]) -> Outcome {
    let start = Instant::now();
    let score = score_matching(records, &TypeDictionary::default());
    let elapsed = start.elapsed();
    let (p, r) = (score.precision(), score.recall());
    let pass = p >= 0.95 && r >= 0.95 && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "{} sentences, precision {p:.4}, recall {r:.4} (min 0.95), {:.2}s (limit 5s)",
            score.sentences,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------- split ----------

fn split_exactness() -> Outcome {
    let items: Vec<u32> = (0..59_000).collect();
    let a = split_dataset(&items, 42).expect("split");
    let b = split_dataset(&items, 42).expect("split");
    let sizes = (a.train.len(), a.test.len(), a.validation.len());
    let all: HashSet<u32> = a.train.iter().chain(&a.test).chain(&a.validation).copied().collect();
    let pass = sizes == (53_000, 3_000, 3_000) && a == b && all.len() == items.len();
    outcome(
        pass,
        format!(
            "sizes {}/{}/{}, deterministic: {}, disjoint cover: {}",
            sizes.0,
            sizes.1,
            sizes.2,
            a == b,
            all.len() == items.len()
        ),
    )
}

// ---------- recommender ----------

fn recommender_distribution(records: &[GoldRecord], scorer: &FaithfulnessScorer) -> Outcome {
    let subjects = SubjectList::default();
    let dict = TypeDictionary::default();
    let pairs: Vec<MatchedPair> = records
        .iter()
        .flat_map(|r| build_pairs_with(&r.instance, &dict, &subjects))
        .collect();
    let typed: Vec<(SegmentKey, Vec<AnalysisType>)> = pairs
        .iter()
        .filter_map(|p| Some((p.segment.clone()?, p.insight_types.iter().copied().collect())))
        .collect();
    let priors = estimate_priors(typed.iter().map(|(k, t)| (k, t.as_slice())));
    let shape = TableShape {
        is_time_series: true,
        is_multi_column: false,
    };
    let mut per_segment: BTreeMap<&SegmentKey, usize> = BTreeMap::new();
    for (k, _) in typed.iter().filter(|(k, _)| k.shape() == shape) {
        *per_segment.entry(k).or_default() += 1;
    }
    let Some(segment) = per_segment.iter().max_by_key(|(_, n)| **n).map(|(k, _)| (*k).clone()) else {
        return outcome(false, "gold corpus has no single-column time-series segment".into());
    };
    let prior = priors.get(&segment);

    let bytes = std::fs::read(manifest_path("tests/fixtures/cheese.csv")).expect("fixture");
    let table = parse_csv(&bytes, true).unwrap();
    let ctx = TableContext::new(CHEESE_TITLE, &segment.subject, ChartKind::Line, &subjects).unwrap();
    let mut candidates = generate_candidates(&table, &ctx, None, scorer, &AnalyticsConfig::default());
    let mut injected = candidates[0].clone();
    injected.id = "ins-inapplicable".into();
    injected.insight_type = AnalysisType::Correlated;
    injected.salience = 1e9;
    candidates.push(injected);

    let available: Vec<AnalysisType> = AnalysisType::ALL
        .into_iter()
        .filter(|t| t.applicable(shape) && candidates.iter().any(|c| c.insight_type == *t))
        .collect();
    let mass: f64 = available.iter().map(|t| prior.prob(*t)).sum();
    let target: BTreeMap<AnalysisType, f64> = available.iter().map(|t| (*t, prior.prob(*t) / mass)).collect();

    let draws = 10_000u64;
    let cfg = RecommendConfig::default();
    let prefs = PreferenceModel::default();
    let mut first: BTreeMap<AnalysisType, usize> = BTreeMap::new();
    let mut bad_size = 0usize;
    let mut inapplicable = 0usize;
    for seed in 0..draws {
        let rec = recommend_detailed(shape, &candidates, &prior, &prefs, seed, &cfg).expect("recommendation");
        *first.entry(rec.sampled_types[0]).or_default() += 1;
        if !(4..=6).contains(&rec.candidates.len()) {
            bad_size += 1;
        }
        inapplicable += rec.candidates.iter().filter(|c| !c.insight_type.applicable(shape)).count();
    }

    // categorical tables must never receive time-only types
    let cat_shape = TableShape {
        is_time_series: false,
        is_multi_column: false,
    };
    let mut cat_rng = ChaCha8Rng::seed_from_u64(5);
    let cat = loop {
        let g = random_table(&mut cat_rng, 0);
        if !g.time_series && g.table.y_columns().len() == 1 {
            break g;
        }
    };
    let mut cat_candidates = generate_candidates(&cat.table, &cat.ctx, None, scorer, &AnalyticsConfig::default());
    for kind in [AnalysisType::Trend, AnalysisType::MostRecent, AnalysisType::Correlated] {
        let mut c = cat_candidates[0].clone();
        c.id = format!("ins-{kind}");
        c.insight_type = kind;
        c.salience = 1e9;
        cat_candidates.push(c);
    }
    let uniform = priors.get(&SegmentKey::new(cat_shape, "economy"));
    for seed in 0..1000 {
        let rec = recommend_detailed(cat_shape, &cat_candidates, &uniform, &prefs, seed, &cfg).expect("recommendation");
        inapplicable += rec.candidates.iter().filter(|c| !c.insight_type.applicable(cat_shape)).count();
        if !(4..=6).contains(&rec.candidates.len()) {
            bad_size += 1;
        }
    }

    let l1: f64 = target
        .iter()
        .map(|(t, p)| (first.get(t).copied().unwrap_or(0) as f64 / draws as f64 - p).abs())
        .sum();
    let expected_l1: f64 = target
        .values()
        .map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * draws as f64)).sqrt())
        .sum();
    let pass = l1 <= 0.02 && bad_size == 0 && inapplicable == 0;
    outcome(
        pass,
        format!(
            "prior {}/{} over {} types, L1 {l1:.4} (limit 0.02, sampling expectation {expected_l1:.4}), {bad_size} draws outside [4,6], {inapplicable} inapplicable picks",
            segment.subject,
            if segment.is_time_series { "time" } else { "categorical" },
            target.len()
        ),
    )
}

// ---------- augmentation prompts ----------

fn prompt_set(kind_pred: &str, i: usize) -> TripleSet {
    parse_linear(&format!(
        "{} [W] {kind_pred} Revenue [W] {}.5 [B] CONTEXT [W] TITLE [W] Synthetic series {i}",
        category_name(i),
        i
    ))
    .expect("prompt set parses")
}

fn labeled_pair(kind_pred: &str, word: &str, i: usize) -> MatchedPair {
    let triples = prompt_set(kind_pred, i);
    MatchedPair {
        sentence: format!("The {word} Revenue was {i}.5 in {}.", category_name(i)),
        insight_types: triples.insight_type().analysis().into_iter().collect(),
        triples,
        segment: None,
    }
}

fn augmentation_contract() -> Outcome {
    let labeled: Vec<MatchedPair> = (0..8)
        .map(|i| labeled_pair("MAX", "maximum", i))
        .chain((0..6).map(|i| labeled_pair("MIN", "minimum", 100 + i)))
        .collect();
    let unlabeled: Vec<TripleSet> = (1000..4200)
        .map(|i| prompt_set("MAX", i))
        .chain((5000..5040).map(|i| prompt_set("MIN", i)))
        .collect();
    let prompts = match build_augmentation_prompts(&labeled, &unlabeled, DEFAULT_PER_TYPE_CAP, 3) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("prompt construction failed: {e}")),
    };
    let mut per_type: BTreeMap<AnalysisType, usize> = BTreeMap::new();
    let mut malformed = 0usize;
    for p in &prompts {
        *per_type.entry(p.target_type).or_default() += 1;
        let text = p.render();
        let blocks = text.matches("RDF: ").count();
        let ok = text.ends_with(GENERATION_CUE)
            && blocks == CONTEXT_SIZE + 1
            && parse_prompt(&text).is_ok_and(|(ctx, target)| ctx.len() == 5 && target == p.target)
            && p.context_pairs.iter().all(|(rdf, _)| *rdf != p.target);
        if !ok {
            malformed += 1;
        }
    }
    let max = per_type.get(&AnalysisType::Max).copied().unwrap_or(0);
    let min = per_type.get(&AnalysisType::Min).copied().unwrap_or(0);
    let pass = malformed == 0 && max == 2500 && min == 40;
    outcome(
        pass,
        format!(
            "{} prompts, {malformed} malformed, MAX targets {max} of 3200 (cap 2500), MIN targets {min} of 40",
            prompts.len()
        ),
    )
}

// ---------- metrics ----------

fn hallucinate(text: &str) -> String {
    let base = text.trim_end().trim_end_matches('.');
    format!("{base} and 98765.4.")
}

fn metric_identities(candidates: &[InsightCandidate]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let sample: Vec<&InsightCandidate> = (0..100)
        .map(|_| &candidates[rng.random_range(0..candidates.len())])
        .collect();
    let identical: Vec<EvalRecord> = sample
        .iter()
        .map(|c| EvalRecord::new(&c.text, [c.text.as_str()]).with_triples(c.triples.clone().expect("template triples")))
        .collect();
    let report = evaluate(&identical).expect("evaluation");
    let parent_one = report.parent.is_some_and(|p| (p - 1.0).abs() < 1e-9);
    let identity = (report.bleu - 100.0).abs() < 1e-9
        && report.ter.abs() < 1e-12
        && (report.chrfpp - 100.0).abs() < 1e-9
        && parent_one;

    let cand = tokenize("the the the the the the the");
    let refs = vec![tokenize("the cat is on the mat"), tokenize("there is a cat on the mat")];
    let (clipped, total) = modified_precision(&cand, &refs, 1);
    let precision = clipped as f64 / total as f64;
    let micro = (precision - 2.0 / 7.0).abs() <= 1e-9;

    let mut monotone = 0usize;
    for c in &sample {
        let ts = c.triples.as_ref().expect("template triples");
        let clean = parent_single(&c.text, &c.text, ts);
        let bad = parent_single(&hallucinate(&c.text), &c.text, ts);
        if bad < clean {
            monotone += 1;
        }
    }
    let pass = identity && micro && monotone == sample.len();
    outcome(
        pass,
        format!(
            "identical corpus BLEU {:.4} TER {:.4} chrF++ {:.4} PARENT {}, unigram precision {clipped}/{total}, hallucination lowers PARENT in {monotone}/{}",
            report.bleu,
            report.ter,
            report.chrfpp,
            report.parent.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into()),
            sample.len()
        ),
    )
}

// ---------- end-to-end CLI ----------

fn nbiig() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nbiig"));
    for var in ["NBIIG_SEED", "NBIIG_REALIZER_URL", "NBIIG_REALIZER_FIXTURE", "NBIIG_PRIORS"] {
        c.env_remove(var);
    }
    c
}

fn end_to_end_cli() -> Outcome {
    let cheese = manifest_path("tests/fixtures/cheese.csv");
    // warm the page cache so the timing reflects the binary, not the disk
    let _ = nbiig().arg("--help").output();
    let start = Instant::now();
    let out = nbiig()
        .args(["insights", "--json", "--context", CHEESE_TITLE])
        .arg(&cheese)
        .output()
        .expect("spawn nbiig");
    let elapsed = start.elapsed();
    let parsed: Option<Vec<serde_json::Value>> = serde_json::from_slice(&out.stdout).ok();
    let insights_ok = out.status.success() && parsed.is_some_and(|v| !v.is_empty());

    let mut goldens = Vec::new();
    for (format, golden) in [("plain", "tests/golden/cheese_report.txt"), ("markdown", "tests/golden/cheese_report.md")] {
        let out = nbiig()
            .args(["report", "--context", CHEESE_TITLE, "--select", "8,1,7", "--format", format])
            .arg(&cheese)
            .output()
            .expect("spawn nbiig");
        let want = std::fs::read(manifest_path(golden)).expect("golden");
        goldens.push((format, out.status.success() && out.stdout == want));
    }
    let pass = insights_ok && elapsed < Duration::from_secs(1) && goldens.iter().all(|(_, ok)| *ok);
    outcome(
        pass,
        format!(
            "insights --json in {:.3}s (limit 1s), report goldens: {}",
            elapsed.as_secs_f64(),
            goldens
                .iter()
                .map(|(f, ok)| format!("{f} {}", if *ok { "match" } else { "differ" }))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn main() {
    let scorer = FaithfulnessScorer::default();
    let tables = random_tables();
    let candidates = template_candidates(&tables, &scorer);
    let template_only: Vec<InsightCandidate> = candidates
        .iter()
        .filter(|c| matches!(c.triples.as_ref().map(|t| t.insight_type()), Some(SetType::Analysis(_))))
        .cloned()
        .collect();
    let gold = gold_records();

    let criteria: Vec<Criterion> = vec![
        ("analytics oracle", Box::new(|| analytics_oracle(&tables))),
        ("cheese fixture triples", Box::new(cheese_fixture_triples)),
        ("linearization round trip", Box::new(linearization_round_trip)),
        ("template faithfulness", Box::new(|| template_faithfulness(&candidates))),
        ("faithfulness mutations", Box::new(|| mutation_test(&template_only, &scorer))),
        ("gold matching corpus", Box::new(|| gold_matching(&gold))),
        ("split exactness", Box::new(split_exactness)),
        ("recommender distribution", Box::new(|| recommender_distribution(&gold, &scorer))),
        ("augmentation prompt contract", Box::new(augmentation_contract)),
        ("metric identities", Box::new(|| metric_identities(&template_only))),
        ("end-to-end CLI", Box::new(end_to_end_cli)),
    ];

    let mut failed = BTreeSet::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.insert(i + 1);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
