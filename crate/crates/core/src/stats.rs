//! Small statistics used to judge experiment trends.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// 1-based ranks; tied values share their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = shared;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// Largest sample for which the exact permutation test is enumerated.
pub const MAX_EXACT_N: usize = 9;

/// Spearman's rho of `y` against `x` and the exact one-sided p-value for a
/// decreasing association: the share of all orderings of `y` whose rho is at
/// most the observed one.
pub fn spearman_decreasing(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 || x.len() > MAX_EXACT_N {
        return Err(Error::InvalidParameters(format!(
            "exact Spearman test needs 3..={MAX_EXACT_N} paired values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let observed = pearson(&rx, &ry);
    let mut perm = ry.clone();
    let mut at_most = 0usize;
    let mut total = 0usize;
    heap_permutations(&mut perm, &mut |p| {
        total += 1;
        if pearson(&rx, p) <= observed + 1e-12 {
            at_most += 1;
        }
    });
    Ok((observed, at_most as f64 / total as f64))
}

/// Visits every ordering of `xs` (Heap's algorithm).
fn heap_permutations(xs: &mut [f64], visit: &mut impl FnMut(&[f64])) {
    let n = xs.len();
    let mut c = vec![0usize; n];
    visit(xs);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                xs.swap(0, i);
            } else {
                xs.swap(c[i], i);
            }
            visit(xs);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Pairs `i < j` with `ys[j] > ys[i]`: violations of a non-increasing sequence.
pub fn increasing_pairs(ys: &[f64]) -> usize {
    let mut count = 0;
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            if ys[j] > ys[i] {
                count += 1;
            }
        }
    }
    count
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameters(
            "log-log fit needs at least two positive pairs".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}
