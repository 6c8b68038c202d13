//! Information-spectrum divergences, relative entropy and variance, the
//! standard normal distribution, and exact i.i.d. evaluation by type classes.
//!
//! All logarithms are base 2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::Caps;
use crate::probability::Distribution;

/// Relative tolerance for merging equal log-ratios.
pub const LOG_RATIO_MERGE_TOL: f64 = 1e-10;

/// A likelihood-ratio value (bits) together with its mass under the first argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LikelihoodAtom {
    pub log_ratio: f64,
    pub mass: f64,
}

/// `log2 max P/Q` over the support of P; `+inf` when Q does not dominate P.
pub fn d_max_classical(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_shapes(p, q)?;
    let mut best = f64::NEG_INFINITY;
    for (&a, &b) in p.weights().iter().zip(q.weights()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            best = best.max((a / b).log2());
        }
    }
    Ok(best)
}

/// Log-ratio atoms of P against Q, sorted ascending with ties merged.
pub fn likelihood_atoms(p: &Distribution, q: &Distribution) -> Result<Vec<LikelihoodAtom>> {
    check_shapes(p, q)?;
    let raw = p
        .weights()
        .iter()
        .zip(q.weights())
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| LikelihoodAtom {
            log_ratio: if b > 0.0 {
                (a / b).log2()
            } else {
                f64::INFINITY
            },
            mass: a,
        })
        .collect();
    Ok(merge_atoms(raw))
}

/// Sorts atoms ascending and merges log-ratios equal up to [`LOG_RATIO_MERGE_TOL`].
pub fn merge_atoms(mut atoms: Vec<LikelihoodAtom>) -> Vec<LikelihoodAtom> {
    atoms.sort_by(|a, b| a.log_ratio.total_cmp(&b.log_ratio));
    let mut out: Vec<LikelihoodAtom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if let Some(last) = out.last_mut() {
            let same = if a.log_ratio.is_infinite() || last.log_ratio.is_infinite() {
                a.log_ratio == last.log_ratio
            } else {
                (a.log_ratio - last.log_ratio).abs()
                    <= LOG_RATIO_MERGE_TOL * a.log_ratio.abs().max(1.0)
            };
            if same {
                last.mass += a.mass;
                continue;
            }
        }
        out.push(a);
    }
    out
}

/// `inf { a : Pr_P[P/Q > 2^a] < eps }` over ascending merged atoms.
///
/// Returns `-inf` when the total mass is already below `eps`, `+inf` when the
/// mass with infinite ratio is at least `eps`.
pub fn d_s_from_atoms(atoms: &[LikelihoodAtom], eps: f64) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::domain(format!(
            "spectrum parameter must be positive, got {eps}"
        )));
    }
    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    if total < eps {
        return Ok(f64::NEG_INFINITY);
    }
    // Walk down from the largest ratio; `above` is the mass strictly above atom k.
    let mut above = 0.0;
    let mut best = f64::INFINITY;
    for a in atoms.iter().rev() {
        if above < eps {
            best = a.log_ratio;
        } else {
            break;
        }
        above += a.mass;
    }
    Ok(best)
}

/// Information-spectrum divergence `D_s^eps(P || Q)`.
pub fn d_s(p: &Distribution, q: &Distribution, eps: f64) -> Result<f64> {
    d_s_from_atoms(&likelihood_atoms(p, q)?, eps)
}

/// Reference tables for the bipartite spectrum quantities.
pub fn product_of_marginals(p: &Distribution) -> Result<Distribution> {
    let (px, py) = p.marginals2()?;
    let (nx, ny) = (px.len(), py.len());
    Distribution::new(
        vec![nx, ny],
        (0..nx * ny).map(|i| px[i / ny] * py[i % ny]).collect(),
    )
}

/// Unnormalized table `Q(x, y) = P_Y(y)`. Not a [`Distribution`] since its
/// total can exceed one, so the atoms are formed directly.
fn conditional_atoms(p: &Distribution) -> Result<Vec<LikelihoodAtom>> {
    let (nx, ny) = p.require_bipartite()?;
    let (_, py) = p.marginals2()?;
    let mut raw = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            let a = p.get(x, y);
            if a > 0.0 {
                raw.push(LikelihoodAtom {
                    log_ratio: (a / py[y]).log2(),
                    mass: a,
                });
            }
        }
    }
    Ok(merge_atoms(raw))
}

/// `I_s^eps(X;Y) = D_s^eps(P_XY || P_X x P_Y)`.
pub fn i_s(p: &Distribution, eps: f64) -> Result<f64> {
    p.require_normalized()?;
    d_s(p, &product_of_marginals(p)?, eps)
}

/// `I_s^eps(X;Y)_{P|Q} = D_s^eps(P_XY || P_X x Q_Y)`.
pub fn i_s_given_q(p: &Distribution, q_y: &[f64], eps: f64) -> Result<f64> {
    let (nx, ny) = p.require_bipartite()?;
    if q_y.len() != ny {
        return Err(Error::usage("Q_Y length does not match |Y|"));
    }
    let (px, _) = p.marginals2()?;
    let base = Distribution::new(
        vec![nx, ny],
        (0..nx * ny).map(|i| px[i / ny] * q_y[i % ny]).collect(),
    )?;
    d_s(p, &base, eps)
}

/// `H_s^eps(X|Y) = -D_s^eps(P_XY || 1_X x P_Y)`.
pub fn h_s(p: &Distribution, eps: f64) -> Result<f64> {
    p.require_normalized()?;
    Ok(-d_s_from_atoms(&conditional_atoms(p)?, eps)?)
}

/// Relative entropy `D = sum P log2(P/Q)` and variance `V = sum P (log2(P/Q) - D)^2`.
pub fn kl_and_variance(p: &Distribution, q: &Distribution) -> Result<(f64, f64)> {
    check_shapes(p, q)?;
    let mut pairs = Vec::new();
    for (&a, &b) in p.weights().iter().zip(q.weights()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::domain("P is not dominated by Q"));
            }
            pairs.push((a, (a / b).log2()));
        }
    }
    let d: f64 = pairs.iter().map(|(a, l)| a * l).sum();
    let v: f64 = pairs.iter().map(|(a, l)| a * (l - d) * (l - d)).sum();
    Ok((d, v))
}

fn check_shapes(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(Error::usage(format!(
            "shape mismatch {:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(())
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Complementary error function.
///
/// Power series for |x| < 1.5, continued fraction (modified Lentz) beyond.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 1.5 {
        // erf(x) = 2/sqrt(pi) sum_k (-1)^k x^{2k+1} / (k! (2k+1))
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -x2 / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return 1.0 - FRAC_2_SQRT_PI * sum;
    }
    if x > 27.0 {
        return 0.0;
    }
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 * 0.5;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF on (0, 1).
///
/// Rational initial guess followed by Halley refinement against [`gaussian_cdf`].
pub fn gaussian_cdf_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "quantile argument must lie in (0,1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    let mut x = if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = gaussian_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
        x -= u / (1.0 + x * u / 2.0);
    }
    Ok(x)
}

/// Exact `D_s^eps(P^{x n} || Q^{x n})` without materializing the product.
///
/// Outcomes are first merged into atoms of equal log-ratio; strings over the
/// atoms are then grouped by count vector. The number of count vectors,
/// `C(n+k-1, k-1)` for `k` atoms, must not exceed `caps.max_cells`.
pub fn d_s_iid_exact(
    p: &Distribution,
    q: &Distribution,
    n: usize,
    eps: f64,
    caps: &Caps,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::domain(format!(
            "spectrum parameter must be positive, got {eps}"
        )));
    }
    let atoms = likelihood_atoms(p, q)?;
    let k = atoms.len();
    if k == 0 {
        return d_s_from_atoms(&[], eps);
    }
    let ln_mass: Vec<f64> = atoms.iter().map(|a| a.mass.ln()).collect();
    let mut out = Vec::new();
    for_each_type_class(n, k, caps, |counts, ln_multinomial| {
        let mut lm = ln_multinomial;
        let mut lr = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                lm += c as f64 * ln_mass[i];
                lr += c as f64 * atoms[i].log_ratio;
            }
        }
        out.push(LikelihoodAtom {
            log_ratio: lr,
            mass: lm.exp(),
        });
    })?;
    d_s_from_atoms(&merge_atoms(out), eps)
}

/// Calls `f(counts, ln(n! / prod counts!))` for every count vector of `n`
/// draws over `k` symbols, after checking the class count against the cap.
pub(crate) fn for_each_type_class(
    n: usize,
    k: usize,
    caps: &Caps,
    mut f: impl FnMut(&[usize], f64),
) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let classes = binomial_f64(n + k - 1, k - 1);
    if classes > caps.max_cells as f64 {
        return Err(Error::resource(format!(
            "{classes:.3e} type classes exceed the cap {}",
            caps.max_cells
        )));
    }
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut counts = vec![0usize; k];
    counts[k - 1] = n;
    loop {
        let ln_multinomial = ln_fact[n] - counts.iter().map(|&c| ln_fact[c]).sum::<f64>();
        f(&counts, ln_multinomial);
        if !next_composition(&mut counts) {
            return Ok(());
        }
    }
}

/// Steps through all count vectors summing to the same total.
fn next_composition(c: &mut [usize]) -> bool {
    let k = c.len();
    if k <= 1 {
        return false;
    }
    // Find the rightmost position j < k-1 such that mass can move left into j from the tail.
    let tail = c[k - 1];
    if tail > 0 {
        // move one unit from the last slot into slot k-2
        c[k - 1] -= 1;
        c[k - 2] += 1;
        return true;
    }
    // last slot empty: find rightmost nonzero j < k-1 with j > 0
    let mut j = k - 2;
    while c[j] == 0 {
        if j == 0 {
            return false;
        }
        j -= 1;
    }
    if j == 0 {
        return false;
    }
    let v = c[j];
    c[j] = 0;
    c[j - 1] += 1;
    c[k - 1] = v - 1;
    true
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gaussian prediction of the spectrum rate from `D`, `V` and `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondOrderPrediction {
    pub rate: f64,
    pub variance: f64,
    pub eps: f64,
    pub n: usize,
    /// `D + sqrt(V/n) * Phi^{-1}(eps)`.
    pub predicted: f64,
}

impl SecondOrderPrediction {
    pub fn new(rate: f64, variance: f64, eps: f64, n: usize) -> Result<Self> {
        if variance < 0.0 || n == 0 {
            return Err(Error::domain("variance must be nonnegative and n positive"));
        }
        let predicted = rate + (variance / n as f64).sqrt() * gaussian_cdf_inv(eps)?;
        Ok(SecondOrderPrediction {
            rate,
            variance,
            eps,
            n,
            predicted,
        })
    }

    /// `D - sqrt(V/n) * Phi^{-1}(eps)`: the expansion of the upper-tail
    /// threshold `Pr[L > a] < eps` by the central limit theorem.
    pub fn upper_tail(&self) -> f64 {
        let z = gaussian_cdf_inv(self.eps).unwrap_or(0.0);
        self.rate - (self.variance / self.n as f64).sqrt() * z
    }
}

/// One row of the second-order comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondOrderRow {
    pub n: usize,
    pub exact_rate: f64,
    pub predicted_rate: f64,
    pub residual: f64,
    /// `residual * n / log2(n)`; undefined (NaN) at n = 1.
    pub normalized_residual: f64,
    pub upper_tail_rate: f64,
}

/// Exact rates `D_s^eps(P^n||Q^n)/n` against the Gaussian prediction.
pub fn second_order_table(
    p: &Distribution,
    q: &Distribution,
    eps: f64,
    ns: &[usize],
    caps: &Caps,
) -> Result<Vec<SecondOrderRow>> {
    p.require_normalized()?;
    let (d, v) = kl_and_variance(p, q)?;
    ns.iter()
        .map(|&n| {
            let exact = d_s_iid_exact(p, q, n, eps, caps)? / n as f64;
            let pred = SecondOrderPrediction::new(d, v, eps, n)?;
            let residual = (exact - pred.predicted).abs();
            let normalized_residual = if n > 1 {
                residual * n as f64 / (n as f64).log2()
            } else {
                f64::NAN
            };
            Ok(SecondOrderRow {
                n,
                exact_rate: exact,
                predicted_rate: pred.predicted,
                residual,
                normalized_residual,
                upper_tail_rate: pred.upper_tail(),
            })
        })
        .collect()
}
