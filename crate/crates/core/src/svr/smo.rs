//! Sequential minimal optimization for the ε-SVR dual.
//!
//! The dual is written over `2n` variables `β = [α; α*]` with labels
//! `s = [+1; −1]`:
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ   s.t.  sᵀβ = 0,  0 ≤ β ≤ C
//! Q_tu = s_t s_u K(x_t, x_u),  p = [ε − y; ε + y]
//! ```
//!
//! Each iteration picks the maximal KKT violator `i` from the "up" set and
//! pairs it with the "low" index giving the largest second-order decrease,
//! then solves the two-variable subproblem analytically.

use super::kernel::{KernelCache, KernelSpec};

const TAU: f64 = 1e-12;

pub(crate) struct SmoOutput {
    /// `α − α*` per training sample.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal violating-pair gap.
    pub gap: f64,
    pub objective: f64,
}

pub(crate) fn solve(
    x: &[Vec<f64>],
    y: &[f64],
    kernel: KernelSpec,
    c: f64,
    epsilon: f64,
    tolerance: f64,
    max_iterations: usize,
    cache_mb: f64,
) -> SmoOutput {
    let n = y.len();
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let sample = |t: usize| if t < n { t } else { t - n };
    let linear: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] })
        .collect();

    let mut cache = KernelCache::new(x, kernel, cache_mb);
    let mut alpha = vec![0.0; l];
    let mut grad = linear.clone();
    let at_upper = |a: f64| a >= c;
    let at_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    while iterations < max_iterations {
        // i: maximal violator in the up set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = -sign(t) * grad[t];
            let in_up = if sign(t) > 0.0 { !at_upper(alpha[t]) } else { !at_lower(alpha[t]) };
            if in_up && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            gap = 0.0;
            break;
        };
        let row_i = cache.row(sample(i));
        let kii = cache.diag(sample(i));

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_decrease = f64::INFINITY;
        for t in 0..l {
            let in_low = if sign(t) > 0.0 { !at_lower(alpha[t]) } else { !at_upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = sign(t) * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let diff = gmax + v;
            if diff > 0.0 {
                let st = sample(t);
                let quad = kii + cache.diag(st) - 2.0 * row_i[st];
                let quad = if quad > 0.0 { quad } else { TAU };
                let decrease = -(diff * diff) / quad;
                if decrease <= best_decrease {
                    best_decrease = decrease;
                    j_sel = Some(t);
                }
            }
        }
        gap = gmax + gmax2;
        let j = match j_sel {
            Some(j) if gap >= tolerance => j,
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;

        let row_j = cache.row(sample(j));
        let (si, sj) = (sign(i), sign(j));
        let kij = row_i[sample(j)];
        let quad = (kii + cache.diag(sample(j)) - 2.0 * kij).max(TAU);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if si != sj {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            let st = sample(t);
            let s = sign(t);
            grad[t] += s * (si * row_i[st] * di + sj * row_j[st] * dj);
        }
    }

    // offset: average over free variables, else midpoint of the feasible interval
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if at_upper(alpha[t]) {
            if sign(t) < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if at_lower(alpha[t]) {
            if sign(t) > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        0.5 * (upper + lower)
    };

    let objective = 0.5 * (0..l).map(|t| alpha[t] * (grad[t] + linear[t])).sum::<f64>();
    let coefficients = (0..n).map(|k| alpha[k] - alpha[k + n]).collect();
    SmoOutput {
        coefficients,
        bias: -rho,
        iterations,
        converged,
        gap,
        objective,
    }
}
