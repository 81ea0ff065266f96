//! Assemble the final depth report from labeled edges.

use crate::model::{depth_mm, DepthEntry, DepthReport};

use super::edges::LabeledEdge;

/// Convert labeled edges to depth entries, d = c*t/2 per edge. Subtraction
/// image references are attached positionally when provided.
pub fn depth_report(edges: &[LabeledEdge], subtraction_refs: &[Option<String>]) -> DepthReport {
    let entries = edges
        .iter()
        .enumerate()
        .map(|(i, edge)| DepthEntry {
            arrival_ps: edge.fit.t0_ps,
            depth_mm: depth_mm(edge.fit.t0_ps),
            label: edge.fit.label,
            ambiguous: edge.ambiguous,
            subtraction_ref: subtraction_refs.get(i).cloned().flatten(),
        })
        .collect();
    DepthReport { entries }
}
