//! Independent oracles and a PASS/FAIL reporter for the acceptance target.
#![allow(dead_code, clippy::needless_range_loop)]

use oneshot_core::HermitianMatrix;

pub struct Reporter {
    results: Vec<(String, bool)>,
}

impl Reporter {
    pub fn new() -> Self {
        Reporter {
            results: Vec::new(),
        }
    }

    pub fn record(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        println!(
            "{} {id}: {}",
            if pass { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
        self.results.push((id.to_string(), pass));
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.1).count()
    }
}

/// Running minimum of slacks with the worst case's label.
pub struct Worst {
    pub slack: f64,
    pub label: String,
    pub count: usize,
}

impl Worst {
    pub fn new() -> Self {
        Worst {
            slack: f64::INFINITY,
            label: String::new(),
            count: 0,
        }
    }

    pub fn push(&mut self, slack: f64, label: impl FnOnce() -> String) {
        self.count += 1;
        if slack < self.slack || slack.is_nan() {
            self.slack = slack;
            self.label = label();
        }
    }

    pub fn ok(&self, tol: f64) -> bool {
        self.count > 0 && self.slack >= -tol
    }

    pub fn summary(&self) -> String {
        format!(
            "{} cases, min slack {:.3e} ({})",
            self.count, self.slack, self.label
        )
    }
}

/// `1/2 sum |p - q| + 1/2 |sum p - sum q|`.
pub fn gtd(p: &[f64], q: &[f64]) -> f64 {
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    let dt: f64 = p.iter().sum::<f64>() - q.iter().sum::<f64>();
    0.5 * l1 + 0.5 * dt.abs()
}

/// Classical purified distance from the generalized fidelity.
pub fn purified_classical(p: &[f64], q: &[f64]) -> f64 {
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    let tp: f64 = p.iter().sum();
    let tq: f64 = q.iter().sum();
    let f = (bc + ((1.0 - tp).max(0.0) * (1.0 - tq).max(0.0)).sqrt()).min(1.0);
    (1.0 - f * f).max(0.0).sqrt()
}

// ---------- LP by vertex enumeration ----------

/// `max c.x` over `A x <= b`, `x >= 0`, by trying every basis of `n` tight
/// constraints. Assumes the feasible set is bounded and nonempty.
pub fn lp_vertex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let n = c.len();
    let m = a.len();
    // Constraint k < m is row k, k >= m is x_{k-m} >= 0 written as -x <= 0.
    let row = |k: usize| -> (Vec<f64>, f64) {
        if k < m {
            (a[k].clone(), b[k])
        } else {
            let mut r = vec![0.0; n];
            r[k - m] = -1.0;
            (r, 0.0)
        }
    };
    let mut best = f64::NEG_INFINITY;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let (mat, rhs): (Vec<Vec<f64>>, Vec<f64>) = pick.iter().map(|&k| row(k)).unzip();
        if let Some(x) = solve_dense(mat, rhs) {
            let feasible = (0..m + n).all(|k| {
                let (r, bk) = row(k);
                r.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= bk + 1e-10
            });
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(u, v)| u * v).sum());
            }
        }
        if !next_combination(&mut pick, m + n) {
            break;
        }
    }
    best
}

fn next_combination(pick: &mut [usize], total: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < total - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

// ---------- D_max by bisection ----------

/// `log2 min { l : l sigma - rho >= 0 }` for full-rank `sigma`.
pub fn dmax_bisection(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> f64 {
    let feasible = |l: f64| (&sigma.scale(l) - rho).min_eigenvalue().unwrap() >= 0.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while !feasible(hi) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.log2()
}

// ---------- Toeplitz hashing from explicit bit matrices ----------

/// `T[i][j] = s[i - j + n - 1]` as explicit bits.
pub fn toeplitz_matrix(n: usize, l: usize, seed: u64) -> Vec<Vec<u8>> {
    (0..l)
        .map(|i| {
            (0..n)
                .map(|j| ((seed >> (i + n - 1 - j)) & 1) as u8)
                .collect()
        })
        .collect()
}

pub fn toeplitz_apply(t: &[Vec<u8>], x: usize) -> usize {
    t.iter().enumerate().fold(0, |acc, (i, row)| {
        let bit = row
            .iter()
            .enumerate()
            .fold(0u8, |b, (j, &tij)| b ^ (tij & ((x >> j) & 1) as u8));
        acc | ((bit as usize) << i)
    })
}

/// Largest fraction of seeds on which two distinct inputs collide.
pub fn toeplitz_max_collision(n: usize, l: usize) -> f64 {
    let seeds = 1u64 << (n + l - 1);
    let mats: Vec<Vec<Vec<u8>>> = (0..seeds).map(|s| toeplitz_matrix(n, l, s)).collect();
    let mut worst = 0usize;
    for x in 0..1usize << n {
        for y in x + 1..1usize << n {
            let c = mats
                .iter()
                .filter(|t| toeplitz_apply(t, x) == toeplitz_apply(t, y))
                .count();
            worst = worst.max(c);
        }
    }
    worst as f64 / seeds as f64
}

/// Exact `T(omega_SZY, U_S x U_Z x P_Y)` for Toeplitz hashing of `x` in row-major `p[x][y]`.
pub fn pa_error_bruteforce(p: &[Vec<f64>], n: usize, l: usize) -> f64 {
    let ny = p[0].len();
    let seeds = 1u64 << (n + l - 1);
    let py: Vec<f64> = (0..ny).map(|y| p.iter().map(|r| r[y]).sum()).collect();
    let keys = 1usize << l;
    let mut total = 0.0;
    for s in 0..seeds {
        let t = toeplitz_matrix(n, l, s);
        let mut joint = vec![vec![0.0; ny]; keys];
        for (x, row) in p.iter().enumerate() {
            let z = toeplitz_apply(&t, x);
            for y in 0..ny {
                joint[z][y] += row[y];
            }
        }
        let flat: Vec<f64> = joint.into_iter().flatten().collect();
        let ideal: Vec<f64> = (0..keys * ny).map(|c| py[c % ny] / keys as f64).collect();
        total += gtd(&flat, &ideal);
    }
    total / seeds as f64
}

// ---------- convex split by full enumeration ----------

/// `(T, P)` between the convex-split mixture and `rho'_A x sigma^N`, for
/// diagonal `rho[a][b]`, enumerating all `|B|^N` strings.
pub fn convex_split_bruteforce(
    rho: &[Vec<f64>],
    rho_prime: &[Vec<f64>],
    sigma: &[f64],
    copies: usize,
) -> (f64, f64) {
    let nb = sigma.len();
    let pa: Vec<f64> = rho_prime.iter().map(|r| r.iter().sum()).collect();
    let strings = nb.pow(copies as u32);
    let (mut tau, mut target) = (Vec::new(), Vec::new());
    for (a, row) in rho.iter().enumerate() {
        for s in 0..strings {
            let bs: Vec<usize> = (0..copies).map(|k| s / nb.pow(k as u32) % nb).collect();
            let prod: f64 = bs.iter().map(|&b| sigma[b]).product();
            let mix: f64 =
                bs.iter().map(|&b| row[b] * prod / sigma[b]).sum::<f64>() / copies as f64;
            tau.push(mix);
            target.push(pa[a] * prod);
        }
    }
    (gtd(&tau, &target), purified_classical(&tau, &target))
}
