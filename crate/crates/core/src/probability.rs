//! Finite classical (sub-)distributions over product alphabets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Caps;
use crate::linalg::strides_of;

/// Tolerance on total weight for normalized distributions.
pub const NORM_TOL: f64 = 1e-12;

/// Largest alphabet accepted by [`event_gap_distance`].
pub const MAX_EVENT_OUTCOMES: usize = 20;

/// Nonnegative weight table over a product alphabet, row-major over `shape`.
///
/// Total weight is at most one. Operations that need a normalized input
/// (a joint distribution proper) check it with [`Distribution::require_normalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    shape: Vec<usize>,
    weights: Vec<f64>,
}

impl Distribution {
    /// Sub-normalized table: weights finite and nonnegative, total `<= 1 + 1e-12`.
    pub fn new(shape: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::usage(format!("invalid shape {shape:?}")));
        }
        let size = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if size != Some(weights.len()) {
            return Err(Error::usage(format!(
                "shape {shape:?} does not match {} weights",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::domain(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + NORM_TOL {
            return Err(Error::domain(format!("total weight {total} exceeds 1")));
        }
        Ok(Distribution { shape, weights })
    }

    /// Normalized table: total weight within `1e-12` of one.
    pub fn normalized(shape: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let d = Self::new(shape, weights)?;
        d.require_normalized()?;
        Ok(d)
    }

    /// Two-factor table from rows indexed by x.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::usage("ragged distribution rows"));
        }
        Self::new(vec![nx, ny], rows.iter().flatten().copied().collect())
    }

    /// One-factor table.
    pub fn from_vec(weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![weights.len()], weights)
    }

    /// Uniform distribution on `n` outcomes.
    pub fn uniform(n: usize) -> Self {
        Distribution {
            shape: vec![n],
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Product table `P(x) Q(y)` with factors concatenated.
    pub fn product(p: &Self, q: &Self) -> Self {
        let mut weights = Vec::with_capacity(p.len() * q.len());
        for &a in &p.weights {
            for &b in &q.weights {
                weights.push(a * b);
            }
        }
        let mut shape = p.shape.clone();
        shape.extend_from_slice(&q.shape);
        Distribution { shape, weights }
    }

    pub fn require_normalized(&self) -> Result<()> {
        let t = self.total();
        if (t - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!(
                "distribution must be normalized (total {t})"
            )));
        }
        Ok(())
    }

    pub fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [nx, ny] => Ok((nx, ny)),
            _ => Err(Error::usage(format!(
                "expected a two-factor distribution, got shape {:?}",
                self.shape
            ))),
        }
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Entry of a two-factor table.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.shape[1] + y]
    }

    /// Same weights, new shape with the same cell count.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.weights.clone())
    }

    /// Sums out every factor not in `keep` (given in the order to retain).
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::usage("marginal: keep must be nonempty"));
        }
        let mut seen = vec![false; self.shape.len()];
        for &k in keep {
            if k >= self.shape.len() || seen[k] {
                return Err(Error::usage(format!("marginal: bad factor list {keep:?}")));
            }
            seen[k] = true;
        }
        let strides = strides_of(&self.shape);
        let out_shape: Vec<usize> = keep.iter().map(|&k| self.shape[k]).collect();
        let out_strides = strides_of(&out_shape);
        let mut out = vec![0.0; out_shape.iter().product()];
        for (lin, &w) in self.weights.iter().enumerate() {
            let mut o = 0;
            for (pos, &k) in keep.iter().enumerate() {
                o += (lin / strides[k] % self.shape[k]) * out_strides[pos];
            }
            out[o] += w;
        }
        Ok(Distribution {
            shape: out_shape,
            weights: out,
        })
    }

    /// Bipartite marginals `(P_X, P_Y)` as plain vectors.
    pub fn marginals2(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (nx, ny) = self.require_bipartite()?;
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                let w = self.get(x, y);
                px[x] += w;
                py[y] += w;
            }
        }
        Ok((px, py))
    }

    /// Swaps the two factors of a bipartite table.
    pub fn swapped(&self) -> Result<Self> {
        let (nx, ny) = self.require_bipartite()?;
        let mut w = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                w[y * nx + x] = self.get(x, y);
            }
        }
        Ok(Distribution {
            shape: vec![ny, nx],
            weights: w,
        })
    }

    /// `P^{x n}` as a bipartite table over (X^n, Y^n).
    ///
    /// Outcome strings are ordered row-major with the first copy most
    /// significant. Fails with a resource error above `caps.max_cells`.
    pub fn iid_power(&self, n: usize, caps: &Caps) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("iid_power needs n >= 1"));
        }
        let (nx, ny) = self.require_bipartite()?;
        let cells = (self.len() as f64).powi(n as i32);
        if cells > caps.max_cells as f64 {
            return Err(Error::resource(format!(
                "iid power would have {cells:.3e} cells (cap {})",
                caps.max_cells
            )));
        }
        let nxn = nx.pow(n as u32);
        let nyn = ny.pow(n as u32);
        let mut w = vec![0.0; nxn * nyn];
        for xs in 0..nxn {
            for ys in 0..nyn {
                let (mut a, mut b) = (xs, ys);
                let mut p = 1.0;
                for _ in 0..n {
                    p *= self.get(a % nx, b % ny);
                    a /= nx;
                    b /= ny;
                }
                w[xs * nyn + ys] = p;
            }
        }
        Ok(Distribution {
            shape: vec![nxn, nyn],
            weights: w,
        })
    }

    /// Applies a row-stochastic (or sub-stochastic) map `w[a][b]` to factor `k`.
    pub fn apply_map(&self, k: usize, map: &[Vec<f64>]) -> Result<Self> {
        if k >= self.shape.len() || map.len() != self.shape[k] {
            return Err(Error::usage("apply_map: map does not match factor"));
        }
        let out_k = map.first().map_or(0, Vec::len);
        if out_k == 0 || map.iter().any(|r| r.len() != out_k) {
            return Err(Error::usage("apply_map: ragged or empty map"));
        }
        let mut shape = self.shape.clone();
        shape[k] = out_k;
        let in_strides = strides_of(&self.shape);
        let out_strides = strides_of(&shape);
        let mut out = vec![0.0; shape.iter().product()];
        for (lin, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let a = lin / in_strides[k] % self.shape[k];
            let base = lin - a * in_strides[k];
            // Re-express the other coordinates in the output strides.
            let mut obase = 0;
            for f in 0..self.shape.len() {
                if f != k {
                    obase += (base / in_strides[f] % self.shape[f]) * out_strides[f];
                }
            }
            for (b, &t) in map[a].iter().enumerate() {
                out[obase + b * out_strides[k]] += w * t;
            }
        }
        Distribution::new(shape, out)
    }

    pub fn to_json(&self) -> DistributionJson {
        DistributionJson {
            shape: self.shape.clone(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: DistributionJson = serde_json::from_str(text)?;
        j.into_distribution()
    }

    /// CSV rows `i0,i1,...,weight` in row-major order.
    pub fn to_csv(&self) -> String {
        let strides = strides_of(&self.shape);
        let mut s = String::new();
        for f in 0..self.shape.len() {
            s.push_str(&format!("i{f},"));
        }
        s.push_str("weight\n");
        for (lin, w) in self.weights.iter().enumerate() {
            for (f, &d) in self.shape.iter().enumerate() {
                s.push_str(&format!("{},", lin / strides[f] % d));
            }
            s.push_str(&format!("{w}\n"));
        }
        s
    }
}

/// Wire format `{"shape": [nx, ny], "weights": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub shape: Vec<usize>,
    pub weights: Vec<f64>,
}

impl DistributionJson {
    pub fn into_distribution(self) -> Result<Distribution> {
        Distribution::new(self.shape, self.weights)
    }
}

/// `T(P, Q) = 1/2 sum |P - Q| + 1/2 |sum P - sum Q|`.
pub fn generalized_trace_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.shape != q.shape {
        return Err(Error::usage(format!(
            "shape mismatch {:?} vs {:?}",
            p.shape, q.shape
        )));
    }
    Ok(gtd_slices(&p.weights, &q.weights))
}

pub(crate) fn gtd_slices(p: &[f64], q: &[f64]) -> f64 {
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    let dt = p.iter().sum::<f64>() - q.iter().sum::<f64>();
    0.5 * l1 + 0.5 * dt.abs()
}

/// `max_S |P(S) - Q(S)|` by enumerating all events.
pub fn event_gap_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.shape != q.shape {
        return Err(Error::usage("shape mismatch"));
    }
    p.require_normalized()?;
    q.require_normalized()?;
    let k = p.len();
    if k > MAX_EVENT_OUTCOMES {
        return Err(Error::resource(format!(
            "event enumeration over {k} outcomes exceeds {MAX_EVENT_OUTCOMES}"
        )));
    }
    let diff: Vec<f64> = p
        .weights
        .iter()
        .zip(&q.weights)
        .map(|(a, b)| a - b)
        .collect();
    // Gray-code walk keeps each event's gap at one addition.
    let mut gap = 0.0f64;
    let mut best = 0.0f64;
    let mut in_set = vec![false; k];
    for i in 1u64..(1u64 << k) {
        let bit = i.trailing_zeros() as usize;
        in_set[bit] = !in_set[bit];
        if in_set[bit] {
            gap += diff[bit];
        } else {
            gap -= diff[bit];
        }
        best = best.max(gap.abs());
    }
    Ok(best)
}
