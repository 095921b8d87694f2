//! Corpus evaluation: the nine metrics plus per-layout breakdowns.

use layout_core::LayoutTree;
use layout_metrics as metrics;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub align: f64,
    pub overlap: f64,
    pub s_align: f64,
    pub s_overlap: f64,
    pub s_inclusion: f64,
    pub w_label: f64,
    pub w_box: f64,
    pub w_s_label: f64,
    /// Pair-label distance scaled by 100, the scale used in reports.
    pub w_s_label_x100: f64,
    pub w_s_box: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerLayout {
    pub name: String,
    pub nodes: usize,
    pub depth: usize,
    pub align: f64,
    pub overlap: f64,
    pub s_align: f64,
    pub s_overlap: f64,
    pub s_inclusion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub metrics: MetricsSummary,
    pub per_layout: Vec<PerLayout>,
    pub warnings: Vec<String>,
}

/// Evaluate a generated corpus against a reference corpus.
pub fn evaluate(
    pred: &[(String, LayoutTree)],
    reference: &[LayoutTree],
) -> EvaluationReport {
    let mut warnings = Vec::new();
    if pred.is_empty() {
        warnings.push("empty prediction corpus; distances default to 0".into());
    }
    if reference.is_empty() {
        warnings.push("empty reference corpus; distances default to 0".into());
    }
    let per_layout: Vec<PerLayout> = pred
        .iter()
        .map(|(name, t)| {
            let leaves: Vec<metrics::Box2> =
                metrics::leaf_boxes(t).iter().map(|tb| tb.box_).collect();
            PerLayout {
                name: name.clone(),
                nodes: t.node_count(),
                depth: t.depth(),
                align: metrics::align_score(&leaves),
                overlap: metrics::overlap_score(&leaves),
                s_align: metrics::s_align(t),
                s_overlap: metrics::s_overlap(t),
                s_inclusion: metrics::s_inclusion(t),
            }
        })
        .collect();

    let mean = |f: fn(&PerLayout) -> f64| -> f64 {
        if per_layout.is_empty() {
            0.0
        } else {
            per_layout.iter().map(f).sum::<f64>() / per_layout.len() as f64
        }
    };
    let pred_trees: Vec<LayoutTree> = pred.iter().map(|(_, t)| t.clone()).collect();
    let w_s_label = metrics::wasserstein_label(&pred_trees, reference, true);
    let summary = MetricsSummary {
        align: mean(|p| p.align),
        overlap: mean(|p| p.overlap),
        s_align: mean(|p| p.s_align),
        s_overlap: mean(|p| p.s_overlap),
        s_inclusion: mean(|p| p.s_inclusion),
        w_label: metrics::wasserstein_label(&pred_trees, reference, false),
        w_box: metrics::wasserstein_box(&pred_trees, reference, false),
        w_s_label,
        w_s_label_x100: 100.0 * w_s_label,
        w_s_box: metrics::wasserstein_box(&pred_trees, reference, true),
    };
    EvaluationReport { metrics: summary, per_layout, warnings }
}

/// CSV export of the per-layout table.
pub fn to_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("name,nodes,depth,align,overlap,s_align,s_overlap,s_inclusion\n");
    for p in &report.per_layout {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.name, p.nodes, p.depth, p.align, p.overlap, p.s_align, p.s_overlap, p.s_inclusion
        ));
    }
    out
}
