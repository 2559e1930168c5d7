//! End-to-end corpus build: pairs, splits, type distribution and
//! augmentation prompts written under one output directory.

use crate::augment::{build_prompts_for_type, low_prior_types, DEFAULT_PER_TYPE_CAP, LOW_PRIOR_THRESHOLD};
use crate::io::{write_jsonl, PairRecord, PromptRecord};
use crate::matching::{build_pairs_with, type_distribution, MatchedPair, WebpageInstance};
use crate::split::split_dataset;
use crate::CorpusError;
use nbiig_core::analytics::AnalysisType;
use nbiig_core::lexicon::TypeDictionary;
use nbiig_core::rdf::TripleSet;
use nbiig_core::table::SubjectList;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub instances: usize,
    pub pairs: usize,
    pub train: usize,
    pub test: usize,
    pub validation: usize,
    pub prompts: usize,
    pub distribution: BTreeMap<AnalysisType, usize>,
    /// Low-prior types without enough labeled pairs for a 5-shot context.
    pub skipped_types: Vec<AnalysisType>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub seed: u64,
    pub per_type_cap: usize,
    pub dictionary: TypeDictionary,
    pub subjects: SubjectList,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            seed: 0,
            per_type_cap: DEFAULT_PER_TYPE_CAP,
            dictionary: TypeDictionary::default(),
            subjects: SubjectList::default(),
        }
    }
}

pub fn build_corpus(instances: &[WebpageInstance], outdir: &Path, opts: &BuildOptions) -> Result<CorpusSummary, CorpusError> {
    std::fs::create_dir_all(outdir).map_err(|e| CorpusError::io(outdir, e))?;

    let mut pairs: Vec<MatchedPair> = Vec::new();
    let mut all_sets: Vec<TripleSet> = Vec::new();
    for inst in instances {
        pairs.extend(build_pairs_with(inst, &opts.dictionary, &opts.subjects));
        all_sets.extend(inst.triple_pool(&opts.subjects).1);
    }
    let labeled_lin: BTreeSet<String> = pairs.iter().map(|p| p.triples.linearize()).collect();
    let mut seen = BTreeSet::new();
    let unlabeled: Vec<TripleSet> = all_sets
        .into_iter()
        .filter(|s| !labeled_lin.contains(&s.linearize()) && seen.insert(s.linearize()))
        .collect();

    let records: Vec<PairRecord> = pairs.iter().map(PairRecord::from).collect();
    write_jsonl(&outdir.join("pairs.jsonl"), &records)?;
    let split = split_dataset(&records, opts.seed)?;
    write_jsonl(&outdir.join("train.jsonl"), &split.train)?;
    write_jsonl(&outdir.join("test.jsonl"), &split.test)?;
    write_jsonl(&outdir.join("validation.jsonl"), &split.validation)?;

    let distribution = type_distribution(&pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut prompts = Vec::new();
    let mut skipped_types = Vec::new();
    for kind in low_prior_types(&pairs, &unlabeled, LOW_PRIOR_THRESHOLD) {
        match build_prompts_for_type(kind, &pairs, &unlabeled, opts.per_type_cap, &mut rng) {
            Ok(p) => prompts.extend(p),
            Err(CorpusError::InsufficientContextPairs { available, .. }) => {
                tracing::warn!(%kind, available, "not enough labeled pairs for a 5-shot context");
                skipped_types.push(kind);
            }
            Err(e) => return Err(e),
        }
    }
    let prompt_records: Vec<PromptRecord> = prompts.iter().map(PromptRecord::from).collect();
    write_jsonl(&outdir.join("prompts.jsonl"), &prompt_records)?;

    let summary = CorpusSummary {
        instances: instances.len(),
        pairs: pairs.len(),
        train: split.train.len(),
        test: split.test.len(),
        validation: split.validation.len(),
        prompts: prompts.len(),
        distribution,
        skipped_types,
    };
    write_pretty(&outdir.join("distribution.json"), &summary.distribution)?;
    write_pretty(&outdir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CorpusError::io(path, e))
}
