//! Small numeric helpers shared across modules.

use std::f64::consts::PI;
use std::ops::Add;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. Summation order depends only on the slice
/// length, so reductions are reproducible regardless of thread count.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().fold(T::default(), |acc, &x| acc + x)
    } else {
        let (lo, hi) = xs.split_at(xs.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Generalized Laguerre polynomial L_p^alpha(x) by three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
