//! Brute-force key-object selection over rendered tag strings.

/// `ego[t]` is the ego longitude tag text; `risk[n][t]` the (collision,
/// overlap) texts of object `n`, `None` where unobserved. Returns every object
/// index with the frames where the ego brakes or waits while either risk is
/// LOW or HIGH.
pub fn key_objects(ego: &[&str], risk: &[Vec<Option<(&str, &str)>>]) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for (n, row) in risk.iter().enumerate() {
        let mut frames = Vec::new();
        for (t, cell) in row.iter().enumerate() {
            let Some((c, o)) = cell else { continue };
            let braking = ego[t] == "DECELERATING" || ego[t] == "STANDING_STILL";
            let risky = *c != "NO" || *o != "NO";
            if braking && risky {
                frames.push(t);
            }
        }
        if !frames.is_empty() {
            out.push((n, frames));
        }
    }
    out
}
