//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sqrt(mean(((y − ŷ) / y)²))`, written out term by term.
pub fn direct_rmspe(y: &[f64], y_hat: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..y.len() {
        let r = (y[i] - y_hat[i]) / y[i];
        acc += r * r;
    }
    (acc / y.len() as f64).sqrt()
}

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Relative gap with a floor on the scale so that near-zero gradients are
/// compared absolutely.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| x.iter().map(|b| (-gamma * a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>()).exp()).collect())
        .collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

/// One coordinate's role on a face of the box.
#[derive(Clone, Copy)]
enum State {
    Fixed(f64),
    /// Free inside `(lo, hi)` with linear coefficient `q`.
    Free { q: f64, lo: f64, hi: f64 },
}

/// Maximizes a concave quadratic `L(v) − ½ vᵀHv` subject to `aᵀv = 0` by
/// enumerating every face of the feasible polytope: on each face the free
/// coordinates solve the equality-constrained stationarity system, and the
/// best feasible stationary point over all faces is the global maximum.
fn enumerate_faces(h: &[Vec<f64>], a: &[f64], choices: &[Vec<State>], objective: &dyn Fn(&[f64]) -> f64) -> f64 {
    let n = h.len();
    let mut best = f64::NEG_INFINITY;
    let mut pick = vec![0usize; n];
    loop {
        let states: Vec<State> = (0..n).map(|i| choices[i][pick[i]]).collect();
        if let Some(v) = solve_face(h, a, &states) {
            best = best.max(objective(&v));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn solve_face(h: &[Vec<f64>], a: &[f64], states: &[State]) -> Option<Vec<f64>> {
    let n = h.len();
    let free: Vec<usize> = (0..n).filter(|&i| matches!(states[i], State::Free { .. })).collect();
    let mut v: Vec<f64> = states.iter().map(|s| if let State::Fixed(x) = s { *x } else { 0.0 }).collect();
    let fixed_balance: f64 = (0..n).map(|i| a[i] * v[i]).sum();
    if free.is_empty() {
        return (fixed_balance.abs() < 1e-9).then_some(v);
    }
    let f = free.len();
    let mut kkt = DMatrix::<f64>::zeros(f + 1, f + 1);
    let mut rhs = DVector::<f64>::zeros(f + 1);
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            kkt[(r, c)] = h[i][j];
        }
        kkt[(r, f)] = a[i];
        kkt[(f, r)] = a[i];
        let State::Free { q, .. } = states[i] else { unreachable!() };
        rhs[r] = q - (0..n).filter(|j| !free.contains(j)).map(|j| h[i][j] * v[j]).sum::<f64>();
    }
    rhs[f] = -fixed_balance;
    let sol = kkt.lu().solve(&rhs)?;
    for (r, &i) in free.iter().enumerate() {
        let State::Free { lo, hi, .. } = states[i] else { unreachable!() };
        if sol[r] < lo - 1e-9 || sol[r] > hi + 1e-9 {
            return None;
        }
        v[i] = sol[r];
    }
    Some(v)
}

/// `Σα − ½ Σ αᵢαⱼ yᵢyⱼ Kᵢⱼ`.
pub fn svc_dual_objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exact maximum of the C-SVC dual over `0 ≤ α ≤ C`, `yᵀα = 0`.
pub fn svc_dual_brute_force(k: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let choices: Vec<Vec<State>> =
        (0..n).map(|_| vec![State::Fixed(0.0), State::Fixed(c), State::Free { q: 1.0, lo: 0.0, hi: c }]).collect();
    enumerate_faces(&h, y, &choices, &|a| svc_dual_objective(k, y, a))
}

/// `Σ yβ − ε Σ|β| − ½ βᵀKβ`.
pub fn svr_dual_objective(k: &[Vec<f64>], y: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * beta[j] * k[i][j];
        }
    }
    (0..n).map(|i| y[i] * beta[i] - epsilon * beta[i].abs()).sum::<f64>() - 0.5 * quad
}

/// Exact maximum of the ε-SVR dual over `−C ≤ β ≤ C`, `Σβ = 0`. The
/// absolute value splits each coordinate into a positive and a negative
/// free piece, so there are five faces per coordinate.
pub fn svr_dual_brute_force(k: &[Vec<f64>], y: &[f64], c: f64, epsilon: f64) -> f64 {
    let n = y.len();
    let ones = vec![1.0; n];
    let choices: Vec<Vec<State>> = (0..n)
        .map(|i| {
            vec![
                State::Fixed(-c),
                State::Fixed(0.0),
                State::Fixed(c),
                State::Free { q: y[i] - epsilon, lo: 0.0, hi: c },
                State::Free { q: y[i] + epsilon, lo: -c, hi: 0.0 },
            ]
        })
        .collect();
    enumerate_faces(k, &ones, &choices, &|b| svr_dual_objective(k, y, b, epsilon))
}

/// Maximal-violating-pair gap of a C-SVC dual point, from the gradient only.
pub fn svc_kkt_gap(k: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let tol = 1e-12 * c.max(1.0);
    // gradient of the minimization form ½αᵀQα − Σα
    let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j] * alpha[j]).sum::<f64>() - 1.0).collect();
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for i in 0..n {
        let v = -y[i] * g[i];
        let in_up = (y[i] > 0.0 && alpha[i] < c - tol) || (y[i] < 0.0 && alpha[i] > tol);
        let in_low = (y[i] > 0.0 && alpha[i] > tol) || (y[i] < 0.0 && alpha[i] < c - tol);
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    if up.is_finite() && low.is_finite() {
        (up - low).max(0.0)
    } else {
        0.0
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum()
}

/// Within-cluster sum of squares of a labelling, with centroids as means.
pub fn partition_inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..d).map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64).collect();
        total += members.iter().map(|p| squared_distance(p, &mean)).sum::<f64>();
    }
    total
}

/// Optimal k-partition by exhaustive enumeration of all `kⁿ` labellings.
pub fn brute_force_partition(points: &[Vec<f64>], k: usize) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = (labels.clone(), f64::INFINITY);
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            let w = partition_inertia(points, &labels, k);
            if w < best.1 {
                best = (labels.clone(), w);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// True when two labellings induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn eigenvalues_desc(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}
