use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use super::{Check, ProtocolReport};
use crate::classical::{check_eps, imax_partial_classical};
use crate::error::{Error, Result};
use crate::probability::{generalized_trace_distance, Distribution};
use crate::random;

/// Largest alphabet on either side.
pub const MAX_SPLIT_ALPHABET: usize = 16;

/// Below this `K` the input is treated as a product and nothing is sent.
const K_ZERO: f64 = 1e-9;

/// Exact rejection-sampling run: Alice draws from `2^R`-ish shared samples of
/// `Q_Y` and sends the index of the first one she accepts.
#[derive(Clone, Debug, Serialize)]
pub struct SplitRun {
    pub report: ProtocolReport,
    pub eps: f64,
    pub delta: f64,
    /// `I_max^{eps-delta,T}(X. ; Y)`.
    pub k: f64,
    /// `K + log2 log2(1/delta)`.
    pub r: f64,
    /// Shared samples `N = ceil(2^R)`, zero on the product short-circuit.
    pub copies: u64,
    /// Probability that all `N` samples are rejected.
    pub gamma: f64,
    /// `log2(N + 1)`: one message per index plus the failure symbol.
    pub communication: f64,
    /// Whole bits needed for the messages.
    pub communication_bits: u32,
    pub converse_imax: f64,
    pub q: Vec<f64>,
    #[serde(skip)]
    pub smoothed: Distribution,
    #[serde(skip)]
    pub output: Distribution,
}

fn validate(p: &Distribution, eps: f64, delta: f64) -> Result<(usize, usize)> {
    p.require_normalized()?;
    let (nx, ny) = p.require_bipartite()?;
    if nx > MAX_SPLIT_ALPHABET || ny > MAX_SPLIT_ALPHABET {
        return Err(Error::resource(format!(
            "alphabets {nx}x{ny} exceed {MAX_SPLIT_ALPHABET}x{MAX_SPLIT_ALPHABET}"
        )));
    }
    check_eps(eps)?;
    if !(delta > 0.0 && delta <= eps) {
        return Err(Error::domain(format!(
            "delta {delta} must lie in (0, eps = {eps}]"
        )));
    }
    Ok((nx, ny))
}

/// Closed-form state splitting with exact output `P''`.
pub fn state_split_exact(p: &Distribution, eps: f64, delta: f64) -> Result<SplitRun> {
    let (nx, ny) = validate(p, eps, delta)?;
    let inner = imax_partial_classical(p, eps - delta)?;
    let q = inner
        .q
        .clone()
        .ok_or_else(|| Error::numerical("max-information LP returned no Q"))?;
    let k = inner.value.max(0.0);
    let r = k + (1.0 / delta).log2().log2();
    let (px, _) = p.marginals2()?;
    let smoothed = inner.optimizer;

    let (copies, gamma) = if k < K_ZERO {
        (0, 0.0)
    } else {
        let n = r.exp2().ceil().max(1.0);
        if n > 1e9 {
            return Err(Error::resource(format!("{n} shared samples")));
        }
        let g = (n * (-(-k).exp2()).ln_1p()).exp();
        (n as u64, g)
    };
    let mut out = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            out[x * ny + y] = (1.0 - gamma) * smoothed.get(x, y) + gamma * px[x] * q[y];
        }
    }
    let output = Distribution::new(vec![nx, ny], out)?;
    let error = generalized_trace_distance(&output, p)?;
    let communication = if copies == 0 {
        0.0
    } else {
        ((copies + 1) as f64).log2()
    };
    let communication_bits = if copies == 0 {
        0
    } else {
        (copies + 1).next_power_of_two().trailing_zeros()
    };
    let converse_imax = imax_partial_classical(p, eps)?.value;
    let (ox, _) = output.marginals2()?;
    let marginal_gap = ox
        .iter()
        .zip(&px)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut checks = vec![
        Check::le("error <= eps", error, eps),
        Check::le("communication <= R + 1", communication, r + 1.0),
        Check::le("converse I_max^eps <= R", converse_imax, r),
        Check::le("X marginal preserved", marginal_gap, 1e-12),
    ];
    if copies > 0 {
        // Bob's output is dominated by (N + 1) Q, so the unsmoothed max-information
        // of P'' cannot exceed the message count.
        let produced = imax_partial_classical(&output, 0.0)?.value;
        checks.push(Check::le(
            "I_max(P'') <= log2(N + 1)",
            produced,
            communication + 1e-9,
        ));
    }
    Ok(SplitRun {
        report: ProtocolReport {
            protocol: "state-splitting",
            error,
            resource: communication,
            bound: r + 1.0,
            checks,
        },
        eps,
        delta,
        k,
        r,
        copies,
        gamma,
        communication,
        communication_bits,
        converse_imax,
        q,
        smoothed,
        output,
    })
}

/// Monte-Carlo execution of the protocol loop.
#[derive(Clone, Debug, Serialize)]
pub struct SplitSample {
    pub trials: usize,
    pub seed: u64,
    /// Shared samples examined by Alice.
    pub steps: u64,
    pub accepts: u64,
    pub failures: u64,
    pub expected_accept_rate: f64,
    /// Standard score of the per-step acceptance rate.
    pub accept_z: f64,
    pub expected_failure_rate: f64,
    pub failure_z: f64,
    /// `T(empirical, P)` next to the exact `T(P'', P)`.
    pub empirical_error: Option<f64>,
    pub exact_error: f64,
    /// `T(empirical, P'')`.
    pub empirical_vs_exact: Option<f64>,
    pub chi2: Option<f64>,
    pub chi2_dof: usize,
    /// `(x, message, y)` per trial; message 0 means every sample was rejected.
    pub transcript: Vec<(u32, u64, u32)>,
}

impl SplitSample {
    /// Acceptance and failure rates within 5 sigma, chi-square within
    /// `dof + 5 sqrt(2 dof)`.
    pub fn consistent(&self) -> bool {
        let chi_ok = self.chi2.map_or(true, |c| {
            c <= self.chi2_dof as f64 + 5.0 * (2.0 * self.chi2_dof as f64).sqrt()
        });
        self.accept_z.abs() <= 5.0 && self.failure_z.abs() <= 5.0 && chi_ok
    }
}

fn z_score(hits: u64, n: u64, p: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let var = p * (1.0 - p) / n as f64;
    let diff = hits as f64 / n as f64 - p;
    if var <= 0.0 {
        return if diff.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    diff / var.sqrt()
}

pub fn state_split_sample(
    p: &Distribution,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<SplitSample> {
    let exact = state_split_exact(p, eps, delta)?;
    let (nx, ny) = p.require_bipartite()?;
    let (px, _) = p.marginals2()?;
    let mut rng = random::seeded(seed);
    let q_clamped: Vec<f64> = exact.q.iter().map(|v| v.max(0.0)).collect();
    let x_dist = WeightedIndex::new(&px).map_err(|e| Error::numerical(e.to_string()))?;
    let q_dist = WeightedIndex::new(&q_clamped).map_err(|e| Error::numerical(e.to_string()))?;
    let scale = exact.k.exp2();
    let accept: Vec<f64> = (0..nx * ny)
        .map(|c| {
            let (x, y) = (c / ny, c % ny);
            let denom = px[x] * scale * q_clamped[y];
            if denom > 0.0 {
                (exact.smoothed.get(x, y) / denom).min(1.0)
            } else {
                0.0
            }
        })
        .collect();

    let mut counts = vec![0u64; nx * ny];
    let mut transcript = Vec::with_capacity(trials);
    let (mut steps, mut accepts, mut failures) = (0u64, 0u64, 0u64);
    for _ in 0..trials {
        let x = x_dist.sample(&mut rng);
        let mut sent = None;
        for i in 1..=exact.copies {
            let y = q_dist.sample(&mut rng);
            steps += 1;
            if rng.gen::<f64>() < accept[x * ny + y] {
                accepts += 1;
                sent = Some((i, y));
                break;
            }
        }
        let (msg, y) = match sent {
            Some(s) => s,
            None => {
                if exact.copies > 0 {
                    failures += 1;
                }
                (0, q_dist.sample(&mut rng))
            }
        };
        counts[x * ny + y] += 1;
        transcript.push((x as u32, msg, y as u32));
    }

    let (empirical_error, empirical_vs_exact, chi2) = if trials == 0 {
        (None, None, None)
    } else {
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
        let emp = Distribution::new(vec![nx, ny], freq)?;
        let mut chi = 0.0;
        for (c, &e) in counts.iter().zip(exact.output.weights()) {
            let expected = e * trials as f64;
            if expected > 0.0 {
                chi += (*c as f64 - expected).powi(2) / expected;
            } else if *c > 0 {
                chi = f64::INFINITY;
            }
        }
        (
            Some(generalized_trace_distance(&emp, p)?),
            Some(generalized_trace_distance(&emp, &exact.output)?),
            Some(chi),
        )
    };
    let support = exact.output.weights().iter().filter(|&&w| w > 0.0).count();
    let expected_accept_rate = if exact.copies == 0 {
        1.0
    } else {
        (-exact.k).exp2()
    };
    Ok(SplitSample {
        trials,
        seed,
        steps,
        accepts,
        failures,
        expected_accept_rate,
        accept_z: if exact.copies == 0 {
            0.0
        } else {
            z_score(accepts, steps, expected_accept_rate)
        },
        expected_failure_rate: exact.gamma,
        failure_z: z_score(failures, trials as u64, exact.gamma),
        empirical_error,
        exact_error: exact.report.error,
        empirical_vs_exact,
        chi2,
        chi2_dof: support.saturating_sub(1),
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlated() -> Distribution {
        Distribution::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap()
    }

    #[test]
    fn product_short_circuits() {
        let p = Distribution::from_rows(&[vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        let run = state_split_exact(&p, 0.2, 0.05).unwrap();
        assert_eq!(run.copies, 0);
        assert_eq!(run.communication, 0.0);
        assert!(run.report.error <= 0.15 + 1e-12);
        assert!(run.report.passed());
    }

    #[test]
    fn correlated_bits_within_eps() {
        let run = state_split_exact(&correlated(), 0.2, 0.05).unwrap();
        assert!(run.copies > 0);
        assert!(run.report.error <= 0.2, "{}", run.report.error);
        assert!(run.report.passed(), "{:?}", run.report.checks);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(matches!(
            state_split_exact(&correlated(), 0.2, 0.3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            state_split_exact(&correlated(), 0.2, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sampling_matches_closed_form() {
        let s = state_split_sample(&correlated(), 0.2, 0.05, 100_000, 7).unwrap();
        assert!(s.consistent(), "{s:?}");
        assert!((s.empirical_error.unwrap() - s.exact_error).abs() < 0.01);
        let again = state_split_sample(&correlated(), 0.2, 0.05, 1000, 7).unwrap();
        assert_eq!(again.transcript[..], s.transcript[..1000]);
    }

    #[test]
    fn zero_trials_is_empty() {
        let s = state_split_sample(&correlated(), 0.2, 0.05, 0, 1).unwrap();
        assert!(s.transcript.is_empty() && s.empirical_error.is_none() && s.steps == 0);
    }
}
