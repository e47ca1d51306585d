//! Exhaustive cosine ranking and confusion-matrix retrieval metrics.

/// Indices and cosine scores of the top `k` items, ties broken by key.
pub fn cosine_top_k(query: &[f64], items: &[((String, String), Vec<f64>)], k: usize) -> Vec<(usize, f64)> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let qn = norm(query);
    let mut scored: Vec<(usize, f64)> = items
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (i, v.iter().zip(query).map(|(a, b)| a * b).sum::<f64>() / (norm(v) * qn)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| items[a.0].0.cmp(&items[b.0].0)));
    scored.truncate(k);
    scored
}

/// (tp, fp, fn) when the first `k` ranked items are predicted relevant.
pub fn confusion_at_k(relevance: &[bool], total_relevant: usize, k: usize) -> (usize, usize, usize) {
    let predicted = &relevance[..k.min(relevance.len())];
    let tp = predicted.iter().filter(|&&r| r).count();
    (tp, predicted.len() - tp, total_relevant - tp)
}

pub fn precision(tp: usize, fp: usize) -> f64 {
    if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 }
}

pub fn recall(tp: usize, fn_: usize) -> f64 {
    if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 }
}
