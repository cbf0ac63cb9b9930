//! Independent oracles shared by the integration tests. Nothing here calls
//! the code under test except to read inputs or evaluate kernels.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steelprop::nn::{Batch, Network};
use steelprop::svr::{kernel_eval, KernelSpec, SvrModel};
use steelprop::tree::RegressionTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_rows(rng: &mut ChaCha8Rng, n: usize, p: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| rng.random_range(lo..hi)).collect()).collect()
}

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn bundled_dataset() -> PathBuf {
    repo_root().join("data/synthetic.csv")
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// `max |a − b| / max |b|`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den.max(f64::MIN_POSITIVE)
}

// ---- ridge ----

/// `(XᵀX + λI')⁻¹ Xᵀy` with an explicit inverse; `I'` skips column 0 when it is a bias.
pub fn ridge_by_inverse(x: &[Vec<f64>], y: &[f64], lambda: f64, bias_column: bool) -> Vec<f64> {
    let (n, p) = (x.len(), x[0].len());
    let a = DMatrix::from_fn(n, p, |i, j| x[i][j]);
    let mut m = a.transpose() * &a;
    for j in usize::from(bias_column)..p {
        m[(j, j)] += lambda;
    }
    let inv = m.try_inverse().expect("system is well conditioned");
    let w = inv * a.transpose() * DVector::from_column_slice(y);
    w.iter().copied().collect()
}

/// A random well-conditioned 20×5 system; with `bias_column` the first column is all ones.
pub fn ridge_system(seed: u64, bias_column: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let mut x = uniform_rows(&mut r, 20, 5, -1.0, 1.0);
    if bias_column {
        for row in &mut x {
            row[0] = 1.0;
        }
    }
    let y = x
        .iter()
        .map(|row| row.iter().enumerate().map(|(j, v)| (j as f64 - 2.0) * v).sum::<f64>() + r.random_range(-0.3..0.3))
        .collect();
    (x, y)
}

// ---- neural net ----

pub fn half_sse(net: &Network, x: &[Vec<f64>], t: &[f64]) -> f64 {
    x.iter()
        .zip(t)
        .map(|(xi, ti)| {
            let r = net.forward(xi).unwrap() - ti;
            0.5 * r * r
        })
        .sum()
}

/// Central differences of `½ Σ r²` with step `h`.
pub fn fd_gradient(net: &Network, x: &[Vec<f64>], t: &[f64], h: f64) -> Vec<f64> {
    let base = net.params();
    let mut probe = net.clone();
    (0..base.len())
        .map(|j| {
            let mut p = base.clone();
            p[j] = base[j] + h;
            probe.set_params(&p);
            let up = half_sse(&probe, x, t);
            p[j] = base[j] - h;
            probe.set_params(&p);
            let down = half_sse(&probe, x, t);
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Random net with parameters spread wide enough to exercise tanh curvature.
pub fn random_net(seed: u64, n_inputs: usize, n_hidden: usize) -> Network {
    let mut r = rng(seed);
    let mut net = Network::zeros(n_inputs, n_hidden);
    let p: Vec<f64> = (0..net.n_params()).map(|_| r.random_range(-1.5..1.5)).collect();
    net.set_params(&p);
    net
}

pub struct GradientCheck {
    pub fd_rel: f64,
    pub jtr_rel: f64,
}

pub fn check_gradient(seed: u64, n_inputs: usize, n_hidden: usize, n_samples: usize) -> GradientCheck {
    let net = random_net(seed, n_inputs, n_hidden);
    let mut r = rng(seed ^ 0xdead_beef);
    let x = uniform_rows(&mut r, n_samples, n_inputs, -2.0, 2.0);
    let t: Vec<f64> = (0..n_samples).map(|_| r.random_range(-1.0..1.0)).collect();
    let batch = Batch::new(&x, &t).unwrap();
    let g = net.gradient(batch).unwrap();
    let fd = fd_gradient(&net, &x, &t, 1e-6);
    let jac = net.jacobian(batch).unwrap();
    let jtr = jac.transpose_mul(&jac.residuals);
    GradientCheck {
        fd_rel: rel_err(&g, &fd),
        jtr_rel: rel_err(&jtr, &g),
    }
}

// ---- SVR ----

pub fn svr_set(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let x = uniform_rows(&mut r, n, 3, -1.0, 1.0);
    let y = x
        .iter()
        .map(|v| (2.0 * v[0]).sin() + v[1] * v[2] + 0.05 * r.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

fn gram(kernel: &KernelSpec, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| x.iter().map(|b| kernel_eval(kernel, a, b).unwrap()).collect())
        .collect()
}

/// Worst violation of the ε-SVR optimality conditions, with every decision
/// value rebuilt from the full training set and the model's coefficients.
pub fn kkt_violation_oracle(model: &SvrModel, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let c = model.params.c;
    let eps = model.params.epsilon;
    let beta: Vec<f64> = (0..x.len()).map(|i| model.coefficient_of(i)).collect();
    let k = gram(&model.kernel, x);
    let at_bound = |b: f64| b.abs() >= c * (1.0 - 1e-12);
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let f: f64 = beta.iter().zip(&k[i]).map(|(b, kij)| b * kij).sum::<f64>() + model.bias;
        let r = y[i] - f;
        let b = beta[i];
        let v = if b == 0.0 {
            (r.abs() - eps).max(0.0)
        } else if b > 0.0 && at_bound(b) {
            (eps - r).max(0.0)
        } else if b < 0.0 && at_bound(b) {
            (r + eps).max(0.0)
        } else if b > 0.0 {
            (r - eps).abs()
        } else {
            (r + eps).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// `½βᵀKβ + εΣ|β| − yᵀβ` for the model's coefficients.
pub fn dual_objective_of(model: &SvrModel, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let beta: Vec<f64> = (0..x.len()).map(|i| model.coefficient_of(i)).collect();
    dual_objective(&gram(&model.kernel, x), &beta, y, model.params.epsilon)
}

fn dual_objective(k: &[Vec<f64>], beta: &[f64], y: &[f64], eps: f64) -> f64 {
    let mut quad = 0.0;
    for i in 0..beta.len() {
        for j in 0..beta.len() {
            quad += beta[i] * beta[j] * k[i][j];
        }
    }
    0.5 * quad + eps * beta.iter().map(|b| b.abs()).sum::<f64>() - y.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
}

/// Projection of `v` onto `{0 ≤ z ≤ C, Σ z[..n] − Σ z[n..] = 0}` by bisection
/// on the multiplier of the equality constraint.
fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let at = |nu: f64| -> Vec<f64> { v.iter().enumerate().map(|(i, vi)| (vi - nu * sign(i)).clamp(0.0, c)).collect() };
    let balance = |z: &[f64]| z.iter().enumerate().map(|(i, zi)| sign(i) * zi).sum::<f64>();
    let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Minimum of the ε-SVR dual in `(α, α*)` by accelerated projected gradient.
pub fn brute_force_dual(kernel: &KernelSpec, x: &[Vec<f64>], y: &[f64], c: f64, eps: f64, iters: usize) -> f64 {
    let n = x.len();
    let k = gram(kernel, x);
    // λmax(Q) = 2 λmax(K) ≤ 2 · max absolute row sum.
    let lip = 2.0 * k.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let grad = |z: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let kb: Vec<f64> = k.iter().map(|row| row.iter().zip(&beta).map(|(a, b)| a * b).sum()).collect();
        let mut g = vec![0.0; 2 * n];
        for i in 0..n {
            g[i] = kb[i] + eps - y[i];
            g[n + i] = -kb[i] + eps + y[i];
        }
        g
    };
    let mut z = vec![0.0; 2 * n];
    let mut w = z.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g = grad(&w);
        let step: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - gi / lip).collect();
        let z_next = project(&step, n, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = z_next
            .iter()
            .zip(&z)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        z = z_next;
        t = t_next;
    }
    let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
    // With α·α* = 0 at the optimum, ε(α + α*) equals ε|β|.
    let slack: f64 = (0..n).map(|i| eps * (z[i] + z[n + i] - beta[i].abs())).sum();
    dual_objective(&k, &beta, y, eps) + slack
}

// ---- tree ----

/// `(x, y)` drawn on the unit square with a three-level step response.
pub fn step_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let x = uniform_rows(&mut r, n, 2, 0.0, 1.0);
    let y = x
        .iter()
        .map(|v| {
            if v[0] < 0.3 {
                3.0
            } else if v[1] > 0.6 {
                1.0
            } else {
                -2.0
            }
        })
        .collect();
    (x, y)
}

pub fn noisy_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let x = uniform_rows(&mut r, n, 2, 0.0, 1.0);
    let y = x
        .iter()
        .map(|v| (6.0 * v[0]).sin() + v[1] + 0.2 * r.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

/// Largest gap between each leaf's stored value and the mean of the training
/// targets routed to it.
pub fn leaf_mean_error(tree: &RegressionTree, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (xi, yi) in x.iter().zip(y) {
        let leaf = tree.leaf_index(xi).unwrap();
        let e = groups.entry(leaf).or_insert((0.0, 0));
        e.0 += yi;
        e.1 += 1;
    }
    groups
        .iter()
        .map(|(&leaf, &(sum, n))| {
            let mean = sum / n as f64;
            assert_eq!(tree.nodes[leaf].count, n, "leaf {leaf} sample count");
            (tree.nodes[leaf].value - mean).abs() / mean.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

// ---- reference score table ----

pub struct ScoreTable {
    pub treatments: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub means: Vec<f64>,
}

/// Reads a `K-Fold,<model>...` table whose last row holds the column means.
pub fn read_score_table(text: &str) -> ScoreTable {
    let mut lines = text.lines();
    let treatments = lines.next().unwrap().split(',').skip(1).map(String::from).collect();
    let mut rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let means = rows.pop().unwrap();
    ScoreTable { treatments, rows, means }
}
