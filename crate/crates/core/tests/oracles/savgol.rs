//! Per-window least-squares smoothing.

/// Least-squares polynomial fit of `ys` at integer abscissae `0..n` via the
/// normal equations, solved by Gaussian elimination with partial pivoting,
/// then evaluated at `at`.
fn normal_equations_fit(ys: &[f64], degree: usize, at: f64) -> f64 {
    let n = ys.len();
    let c = (n as f64 - 1.0) / 2.0;
    let m = degree + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (i, y) in ys.iter().enumerate() {
        let u = i as f64 - c;
        for r in 0..m {
            for col in 0..m {
                a[r][col] += u.powi((r + col) as i32);
            }
            a[r][m] += y * u.powi(r as i32);
        }
    }
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            for j in k..=m {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut coef = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| a[k][j] * coef[j]).sum();
        coef[k] = (a[k][m] - s) / a[k][k];
    }
    let u = at - c;
    coef.iter().enumerate().map(|(p, cf)| cf * u.powi(p as i32)).sum()
}

pub fn smooth(series: &[f64], window: usize, polyorder: usize) -> Vec<f64> {
    let n = series.len();
    let w = window;
    let half = w / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - w);
            normal_equations_fit(&series[start..start + w], polyorder, (i - start) as f64)
        })
        .collect()
}
