//! Small numerical helpers shared by the analytic and pricing modules.

use statrs::function::gamma::ln_gamma;

/// Number of grid points used before golden-section refinement.
pub const GRID_POINTS: usize = 10_000;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Probability mass function of `Binomial(n, p)` for every outcome `0..=n`.
///
/// Weights are formed in log space so `n` in the tens of thousands does not
/// overflow.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut w = vec![0.0; n + 1];
        w[0] = 1.0;
        return w;
    }
    if p >= 1.0 {
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        return w;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .map(|k| (ln_choose(n, k) + k as f64 * lp + (n - k) as f64 * lq).exp())
        .collect()
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns the best abscissa seen and its value. `f` is assumed unimodal on
/// the bracket.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Global maximization of a scalar function on `[lo, hi]`.
///
/// A uniform grid of [`GRID_POINTS`] locates the best bracket, which golden
/// section then refines. Ties on the grid resolve to the lowest abscissa, and
/// the refinement only replaces the grid point when it is strictly better.
pub fn maximize_on_interval<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let at = |i: usize| if i == GRID_POINTS - 1 { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best_v = f(lo);
    for i in 1..GRID_POINTS {
        let v = f(at(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let left = at(best_i.saturating_sub(1));
    let right = at((best_i + 1).min(GRID_POINTS - 1));
    let best_x = at(best_i);

    let (gx, gv) = golden_section_max(&f, left, right);
    let mut out = (best_x, best_v);
    if gv > best_v {
        out = (gx, gv);
    }
    // golden section never probes the bracket ends
    for edge in [left, right] {
        let v = f(edge);
        if v > out.1 {
            out = (edge, v);
        }
    }
    out
}
