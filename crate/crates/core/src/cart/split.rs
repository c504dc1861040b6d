use super::{FeatureKind, SplitRule, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub rule: SplitRule,
    pub improvement: f64,
    pub n_left: usize,
    pub n_right: usize,
}

/// Relative tolerance under which two SSE reductions count as tied.
pub(crate) const TIE_TOL: f64 = 1e-9;

/// Reductions below `NOISE_FLOOR * sum(y^2)` are rounding error in the
/// running-sum SSE and never justify a split.
pub(crate) const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Split of `rows` maximising the SSE reduction, subject to both children
/// holding at least `minbucket` rows. Ties go to the lowest variable index,
/// then the lowest threshold (or lowest level-subset bitmask). `None` when no
/// admissible split reduces the SSE.
pub fn best_split(table: &Table, rows: &[usize], minbucket: usize) -> Option<SplitCandidate> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let y = table.y();
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n as f64;
    let parent_sse: f64 = rows.iter().map(|&r| (y[r] - mean).powi(2)).sum();
    if parent_sse <= 0.0 {
        return None;
    }
    let minbucket = minbucket.max(1);

    let mut candidates = Vec::new();
    for var in 0..table.n_features() {
        match table.kinds()[var] {
            FeatureKind::Numeric => numeric_candidates(table, rows, var, mean, parent_sse, minbucket, &mut candidates),
            FeatureKind::Categorical => {
                categorical_candidates(table, rows, var, mean, parent_sse, minbucket, &mut candidates)
            }
        }
    }
    let top = candidates.iter().map(|c| c.improvement).fold(f64::NEG_INFINITY, f64::max);
    let sumsq: f64 = rows.iter().map(|&r| y[r] * y[r]).sum();
    let tol = (TIE_TOL * parent_sse).max(NOISE_FLOOR * sumsq);
    if top.is_nan() || top <= tol {
        return None;
    }
    candidates.into_iter().find(|c| c.improvement >= top - tol)
}

fn child_sse(sum: f64, sumsq: f64, count: usize) -> f64 {
    (sumsq - sum * sum / count as f64).max(0.0)
}

fn numeric_candidates(
    table: &Table,
    rows: &[usize],
    var: usize,
    mean: f64,
    parent_sse: f64,
    minbucket: usize,
    out: &mut Vec<SplitCandidate>,
) {
    let n = rows.len();
    let mut order: Vec<(f64, f64)> = rows.iter().map(|&r| (table.value(r, var), table.y()[r] - mean)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = order.iter().map(|p| p.1).sum();
    let total_sq: f64 = order.iter().map(|p| p.1 * p.1).sum();
    let (mut s, mut q) = (0.0, 0.0);
    for i in 0..n - 1 {
        s += order[i].1;
        q += order[i].1 * order[i].1;
        let (lo, hi) = (order[i].0, order[i + 1].0);
        if lo >= hi {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < minbucket || n_right < minbucket {
            continue;
        }
        let threshold = lo + (hi - lo) / 2.0;
        if !(lo < threshold && threshold < hi) {
            continue;
        }
        let sse = child_sse(s, q, n_left) + child_sse(total - s, total_sq - q, n_right);
        out.push(SplitCandidate {
            rule: SplitRule::Numeric { var, threshold },
            improvement: parent_sse - sse,
            n_left,
            n_right,
        });
    }
}

fn categorical_candidates(
    table: &Table,
    rows: &[usize],
    var: usize,
    mean: f64,
    parent_sse: f64,
    minbucket: usize,
    out: &mut Vec<SplitCandidate>,
) {
    let mut levels: Vec<i64> = rows.iter().map(|&r| table.value(r, var) as i64).collect();
    levels.sort_unstable();
    levels.dedup();
    let k = levels.len();
    if k < 2 {
        return;
    }
    let mut count = vec![0usize; k];
    let mut sum = vec![0.0; k];
    let mut sumsq = vec![0.0; k];
    for &r in rows {
        let code = table.value(r, var) as i64;
        let idx = levels.binary_search(&code).expect("level collected above");
        let c = table.y()[r] - mean;
        count[idx] += 1;
        sum[idx] += c;
        sumsq[idx] += c * c;
    }
    let (tn, ts, tq): (usize, f64, f64) = (count.iter().sum(), sum.iter().sum(), sumsq.iter().sum());
    // Masks without the highest level enumerate each partition exactly once.
    for mask in 1u32..(1u32 << (k - 1)) {
        let (mut ln, mut ls, mut lq) = (0usize, 0.0, 0.0);
        let mut left = Vec::new();
        for i in 0..k {
            if mask & (1 << i) != 0 {
                ln += count[i];
                ls += sum[i];
                lq += sumsq[i];
                left.push(levels[i]);
            }
        }
        let rn = tn - ln;
        if ln < minbucket || rn < minbucket {
            continue;
        }
        let sse = child_sse(ls, lq, ln) + child_sse(ts - ls, tq - lq, rn);
        out.push(SplitCandidate {
            rule: SplitRule::Categorical { var, left },
            improvement: parent_sse - sse,
            n_left: ln,
            n_right: rn,
        });
    }
}
