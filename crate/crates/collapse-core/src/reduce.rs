//! Deterministic pairwise (tree) reductions.
//!
//! Every floating-point accumulation in this crate goes through these
//! helpers. The reduction tree is fixed by the index range alone (split at
//! the midpoint, recurse), so the result is bit-identical no matter how the
//! work is scheduled. The parallel variants walk the same tree with
//! `rayon::join`, which keeps parallel runs equal to serial runs bit for bit.

use num_complex::Complex64;
use rayon::prelude::*;

/// Below this length the tree bottoms out in a simple left-to-right loop.
const LEAF: usize = 32;

/// Pairwise sum of a real slice. Deterministic for a given slice content.
pub fn tree_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
}

/// Pairwise sum of a complex slice.
pub fn tree_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    tree_sum_c(&xs[..mid]) + tree_sum_c(&xs[mid..])
}

/// Pairwise sum of `f(i)` over `0..n` without materializing the values.
/// Same tree as [`tree_sum`] over the index range.
pub fn tree_sum_fn(n: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= LEAF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

/// Complex variant of [`tree_sum_fn`].
pub fn tree_sum_fn_c(n: usize, f: &dyn Fn(usize) -> Complex64) -> Complex64 {
    fn go(lo: usize, hi: usize, f: &dyn Fn(usize) -> Complex64) -> Complex64 {
        if hi - lo <= LEAF {
            let mut acc = Complex64::ZERO;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

/// Parallel pairwise sum over `0..n`: identical tree to [`tree_sum_fn`], with
/// subtrees above `grain` dispatched through `rayon::join`. Bit-identical to
/// the serial result for any thread count.
pub fn par_tree_sum_fn(n: usize, grain: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> f64 {
    fn go(lo: usize, hi: usize, grain: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> f64 {
        if hi - lo <= LEAF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        if hi - lo >= grain {
            let (a, b) = rayon::join(|| go(lo, mid, grain, f), || go(mid, hi, grain, f));
            a + b
        } else {
            go(lo, mid, grain, f) + go(mid, hi, grain, f)
        }
    }
    go(0, n, grain.max(LEAF + 1), f)
}

/// Parallel complex variant of [`par_tree_sum_fn`].
pub fn par_tree_sum_fn_c(
    n: usize,
    grain: usize,
    f: &(dyn Fn(usize) -> Complex64 + Sync),
) -> Complex64 {
    fn go(
        lo: usize,
        hi: usize,
        grain: usize,
        f: &(dyn Fn(usize) -> Complex64 + Sync),
    ) -> Complex64 {
        if hi - lo <= LEAF {
            let mut acc = Complex64::ZERO;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        if hi - lo >= grain {
            let (a, b) = rayon::join(|| go(lo, mid, grain, f), || go(mid, hi, grain, f));
            a + b
        } else {
            go(lo, mid, grain, f) + go(mid, hi, grain, f)
        }
    }
    go(0, n, grain.max(LEAF + 1), f)
}

/// Ordered parallel map: evaluates `f` over `0..n` in parallel, returning the
/// results in index order so downstream reductions stay deterministic.
pub fn par_map_ordered<T: Send>(n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}
