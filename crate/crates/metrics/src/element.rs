use crate::Box2;

/// Alignment score: for each box, the distance to its best-aligned neighbour
/// along any of the six alignment lines (left, x-center, right, top,
/// y-center, bottom), passed through `-log(1 - d)` and averaged.
///
/// Perfectly edge-aligned sets score 0; a single box scores 0. Distances are
/// clamped just below 1 so stray off-canvas boxes cannot produce infinities.
pub fn align_score(boxes: &[Box2]) -> f64 {
    if boxes.len() <= 1 {
        return 0.0;
    }
    let lines = |b: &Box2| {
        [b.x, b.x + b.w / 2.0, b.right(), b.y, b.y + b.h / 2.0, b.bottom()]
    };
    let mut total = 0.0;
    for (i, a) in boxes.iter().enumerate() {
        let la = lines(a);
        let mut d = f64::INFINITY;
        for (j, b) in boxes.iter().enumerate() {
            if i == j {
                continue;
            }
            let lb = lines(b);
            for k in 0..6 {
                d = d.min((la[k] - lb[k]).abs());
            }
        }
        let d = d.clamp(0.0, 1.0 - 1e-12);
        total += -(1.0 - d).ln();
    }
    total / boxes.len() as f64
}

/// Overlap score: total pairwise intersection area over total box area.
///
/// Zero-area boxes contribute nothing; a set of only zero-area boxes scores 0.
pub fn overlap_score(boxes: &[Box2]) -> f64 {
    let total_area: f64 = boxes.iter().map(Box2::area).sum();
    if total_area <= 0.0 {
        return 0.0;
    }
    let mut inter = 0.0;
    for i in 0..boxes.len() {
        for j in (i + 1)..boxes.len() {
            inter += boxes[i].intersection_area(&boxes[j]);
        }
    }
    inter / total_area
}
