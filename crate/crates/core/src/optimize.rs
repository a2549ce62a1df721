//! One-dimensional search over the location axis: a uniform grid scan
//! followed by golden-section refinement around the best cell.

/// Grid spacing for location scans.
pub const GRID_STEP: f64 = 0.02;

/// Absolute tolerance on the location after refinement.
pub const REFINE_TOL: f64 = 1e-8;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location truncation `sqrt(2 ln n) + 1`; a single observation uses
/// `max(|x|, 1) + 1` so its analytic argmax `t = x` is inside the range.
pub fn location_bound(data: &[f64]) -> f64 {
    match data.len() {
        0 => 1.0,
        1 => data[0].abs().max(1.0) + 1.0,
        n => (2.0 * (n as f64).ln()).sqrt() + 1.0,
    }
}

/// Symmetric grid `{k * step : |k * step| < bound} ∪ {-bound, bound}`.
pub fn symmetric_grid(bound: f64, step: f64) -> Vec<f64> {
    let k_max = (bound / step).floor() as i64;
    let mut grid = Vec::with_capacity(2 * k_max as usize + 3);
    let mut push_end = false;
    if (k_max as f64) * step < bound {
        grid.push(-bound);
        push_end = true;
    }
    for k in -k_max..=k_max {
        grid.push(k as f64 * step);
    }
    if push_end {
        grid.push(bound);
    }
    grid
}

/// True if candidate `(t, v)` beats incumbent `(best_t, best_v)`: larger
/// value first, then smaller `|t|`, then negative `t`.
#[inline]
pub fn beats(t: f64, v: f64, best_t: f64, best_v: f64) -> bool {
    if v != best_v {
        return v > best_v;
    }
    if t.abs() != best_t.abs() {
        return t.abs() < best_t.abs();
    }
    t < best_t
}

/// Maximizes `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `tol`. Returns the best point evaluated.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, usize) {
    let mut evals = 0;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 >= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

/// Result of [`scan_and_refine`].
#[derive(Debug, Clone, Copy)]
pub struct ScanMax {
    pub t: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Scans `grid` with `coarse`, then refines the best cell with `fine`
/// (restricted to `[-bound, bound]`). The refined point replaces the grid
/// point only when it is strictly better.
pub fn scan_and_refine<C, F>(grid: &[f64], bound: f64, mut coarse: C, mut fine: F) -> ScanMax
where
    C: FnMut(f64) -> f64,
    F: FnMut(f64) -> f64,
{
    let mut best_t = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, &t) in grid.iter().enumerate() {
        let v = coarse(t);
        if beats(t, v, best_t, best_v) {
            best_t = t;
            best_v = v;
            best_idx = i;
        }
    }
    let mut evaluations = grid.len();
    let lo = if best_idx > 0 { grid[best_idx - 1] } else { -bound };
    let hi = if best_idx + 1 < grid.len() { grid[best_idx + 1] } else { bound };
    let exact = fine(best_t);
    let (t_ref, v_ref, n) = golden_section_max(&mut fine, lo.max(-bound), hi.min(bound), REFINE_TOL);
    evaluations += n + 1;
    if v_ref > exact {
        ScanMax {
            t: t_ref,
            value: v_ref,
            evaluations,
        }
    } else {
        ScanMax {
            t: best_t,
            value: exact,
            evaluations,
        }
    }
}
