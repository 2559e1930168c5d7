//! Table to scored insight candidates in one call.

use crate::analytics::{run_all_with, AnalyticsConfig};
use crate::faithfulness::FaithfulnessScorer;
use crate::rdf::cast;
use crate::realization::{realize_all, InsightCandidate, RemoteRealizer};
use crate::table::{detect_shape, x_range_label, DataTable, TableContext};

/// Analytics, casting, realization and faithfulness scoring. Results that
/// cannot be cast (a label colliding with a separator token) are skipped.
pub fn generate_candidates(
    table: &DataTable,
    ctx: &TableContext,
    realizer: Option<&RemoteRealizer>,
    scorer: &FaithfulnessScorer,
    cfg: &AnalyticsConfig,
) -> Vec<InsightCandidate> {
    let shape = detect_shape(table);
    let range = x_range_label(table);
    let mut salience = Vec::new();
    let mut sets = Vec::new();
    for result in run_all_with(table, shape, cfg) {
        match cast(&result, ctx, &range) {
            Ok(ts) => {
                salience.push(result.salience());
                sets.push(ts);
            }
            Err(e) => tracing::warn!(error = %e, kind = %result.kind, "skipping result that cannot be cast"),
        }
    }
    let mut candidates = realize_all(&sets, realizer, scorer);
    for (c, s) in candidates.iter_mut().zip(salience) {
        c.salience = s;
    }
    candidates
}
