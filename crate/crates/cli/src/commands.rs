use std::path::Path;

use clap::ValueEnum;
use oneshot_core::classical::{
    check_thm1_sandwich, classical_measure, ClassicalKind, SandwichReport,
};
use oneshot_core::protocols::{
    pa_converse_check, pa_smoothed_run, privacy_amplify_exact, state_split_exact,
    state_split_sample, ProtocolReport, SplitRun, SplitSample, SLACK_TOL,
};
use oneshot_core::quantum::{
    check_partial_full_equivalence, dmax_quantum, quantum_measure, EquivalenceReport, Metric,
    QuantumKind, SmoothingBall,
};
use oneshot_core::spectrum::{h_s, i_s, product_of_marginals, second_order_table};
use oneshot_core::{random, Caps};
use serde::Serialize;

use crate::io::{read_distribution, read_operator, read_state};
use crate::{CliError, Format, Hook, MeasureKind, MetricArg, Outcome, Output, QuantumKindArg};

fn verdict(min_slack: f64, hook: &Hook) -> Outcome {
    if min_slack - hook.corrupt_bound >= -SLACK_TOL {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    }
}

fn report_verdict(report: &ProtocolReport, hook: &Hook) -> Outcome {
    verdict(report.min_slack(), hook)
}

#[derive(Serialize)]
struct ScalarResult {
    kind: &'static str,
    eps: f64,
    value: f64,
}

pub fn measure(
    kind: MeasureKind,
    eps: f64,
    input: &Path,
    out: &Output,
) -> Result<Outcome, CliError> {
    let p = read_distribution(input)?;
    let lp_kind = match kind {
        MeasureKind::ImaxPartial => Some(ClassicalKind::ImaxPartial),
        MeasureKind::HminPartial => Some(ClassicalKind::HminPartial),
        MeasureKind::ImaxFull => Some(ClassicalKind::ImaxFull),
        MeasureKind::HminFull => Some(ClassicalKind::HminFull),
        MeasureKind::Is | MeasureKind::Hs => None,
    };
    match lp_kind {
        Some(k) => {
            let r = classical_measure(k, &p, eps)?;
            match out.format_or(Format::Json) {
                Format::Json => out.json(&r)?,
                Format::Csv => out.raw(r.optimizer.to_csv())?,
            }
        }
        None => {
            let (name, value) = match kind {
                MeasureKind::Is => ("is", i_s(&p, eps)?),
                _ => ("hs", h_s(&p, eps)?),
            };
            let r = ScalarResult {
                kind: name,
                eps,
                value,
            };
            match out.format_or(Format::Json) {
                Format::Json => out.json(&r)?,
                Format::Csv => out.csv("kind,eps,value", [format!("{name},{eps},{value}")])?,
            }
        }
    }
    Ok(Outcome::Pass)
}

pub fn qmeasure(
    kind: QuantumKindArg,
    metric: MetricArg,
    eps: f64,
    input: &Path,
    sigma: Option<&Path>,
    out: &Output,
) -> Result<Outcome, CliError> {
    let rho = read_state(input)?;
    let ball = SmoothingBall {
        metric: match metric {
            MetricArg::P => Metric::Purified,
            MetricArg::T => Metric::GeneralizedTrace,
        },
        eps,
    };
    let qkind = match kind {
        QuantumKindArg::Dmax => {
            let path = sigma.ok_or_else(|| CliError::Validation("dmax needs --sigma".into()))?;
            let value = dmax_quantum(rho.matrix(), &read_operator(path)?)?;
            let r = ScalarResult {
                kind: "dmax",
                eps: 0.0,
                value,
            };
            match out.format_or(Format::Json) {
                Format::Json => out.json(&r)?,
                Format::Csv => out.csv("kind,value", [format!("dmax,{value}")])?,
            }
            return Ok(Outcome::Pass);
        }
        QuantumKindArg::Imax => QuantumKind::Imax,
        QuantumKindArg::Hmin => QuantumKind::Hmin,
        QuantumKindArg::ImaxPartial => QuantumKind::ImaxPartial,
        QuantumKindArg::HminPartial => QuantumKind::HminPartial,
        QuantumKindArg::ImaxFull => QuantumKind::ImaxFull,
        QuantumKindArg::HminFull => QuantumKind::HminFull,
    };
    let r = quantum_measure(qkind, &rho, ball)?;
    match out.format_or(Format::Json) {
        Format::Json => out.json(&r)?,
        Format::Csv => out.csv(
            "kind,eps,value,distance,operator_residual,marginal_residual",
            [format!(
                "{},{eps},{},{},{},{}",
                kind.to_possible_value()
                    .map_or_else(String::new, |v| v.get_name().to_string()),
                r.value,
                r.distance,
                r.operator_residual,
                r.marginal_residual
            )],
        )?,
    }
    Ok(Outcome::Pass)
}

pub fn second_order(
    input: &Path,
    q: Option<&Path>,
    eps: f64,
    ns: &[usize],
    out: &Output,
) -> Result<Outcome, CliError> {
    let p = read_distribution(input)?;
    let q = match q {
        Some(path) => read_distribution(path)?,
        None => product_of_marginals(&p)?,
    };
    let rows = second_order_table(&p, &q, eps, ns, &Caps::from_env())?;
    match out.format_or(Format::Csv) {
        Format::Json => out.json(&rows)?,
        Format::Csv => out.csv(
            "n,exact,predicted,residual,normalized_residual",
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.n, r.exact_rate, r.predicted_rate, r.residual, r.normalized_residual
                )
            }),
        )?,
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct SplitOutput {
    run: SplitRun,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<SplitSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_consistent: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
pub fn split(
    input: &Path,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    transcript: bool,
    out: &Output,
    hook: &Hook,
) -> Result<Outcome, CliError> {
    let p = read_distribution(input)?;
    let run = state_split_exact(&p, eps, delta)?;
    let verdict = report_verdict(&run.report, hook);
    let sample = if trials > 0 {
        Some(state_split_sample(&p, eps, delta, trials, seed)?)
    } else {
        None
    };
    match out.format_or(Format::Json) {
        Format::Csv => match &sample {
            Some(s) => out.csv(
                "x,message,y",
                s.transcript.iter().map(|(x, m, y)| format!("{x},{m},{y}")),
            )?,
            None => out.csv(
                "error,k,r,copies,communication,communication_bits",
                [format!(
                    "{},{},{},{},{},{}",
                    run.report.error,
                    run.k,
                    run.r,
                    run.copies,
                    run.communication,
                    run.communication_bits
                )],
            )?,
        },
        Format::Json => {
            let sample_consistent = sample.as_ref().map(SplitSample::consistent);
            let sample = sample.map(|mut s| {
                if !transcript {
                    s.transcript.clear();
                }
                s
            });
            out.json(&SplitOutput {
                run,
                sample,
                sample_consistent,
            })?
        }
    }
    Ok(verdict)
}

#[allow(clippy::too_many_arguments)]
pub fn pa(
    input: &Path,
    n: Option<u32>,
    ell: Option<u32>,
    eps: Option<f64>,
    delta: Option<f64>,
    converse: bool,
    out: &Output,
    hook: &Hook,
) -> Result<Outcome, CliError> {
    let p = read_distribution(input)?;
    if let Some(n) = n {
        let nx = p.shape().first().copied().unwrap_or(0);
        if n >= usize::BITS || nx != 1usize << n {
            return Err(CliError::Validation(format!(
                "--n {n} does not match |X| = {nx}"
            )));
        }
    }
    let format = out.format_or(Format::Json);
    if converse {
        let eps = eps.ok_or_else(|| CliError::Validation("--converse needs --eps".into()))?;
        let c = pa_converse_check(&p, eps)?;
        match format {
            Format::Json => out.json(&c)?,
            Format::Csv => out.csv("ell,error", c.sweep.iter().map(|(l, e)| format!("{l},{e}")))?,
        }
        return Ok(report_verdict(&c.report, hook));
    }
    let (run, report) = match ell {
        Some(l) => {
            let run = privacy_amplify_exact(&p, l)?;
            let report = run.report.clone();
            if format == Format::Json {
                out.json(&run)?;
            }
            (run, report)
        }
        None => {
            let (eps, delta) = eps.zip(delta).ok_or_else(|| {
                CliError::Validation("pa needs --ell, --converse, or both --eps and --delta".into())
            })?;
            let s = pa_smoothed_run(&p, eps, delta)?;
            if format == Format::Json {
                out.json(&s)?;
            }
            let report = s.report.clone();
            (s.run, report)
        }
    };
    if format == Format::Csv {
        out.csv(
            "ell,error,leftover_bound,hmin",
            [format!(
                "{},{},{},{}",
                run.key_bits, run.error, run.leftover_bound, run.hmin
            )],
        )?;
    }
    Ok(report_verdict(&report, hook))
}

pub struct ThmcheckConfig {
    pub trials: usize,
    pub seed: u64,
    pub nx: usize,
    pub ny: usize,
    pub eps: f64,
    pub delta: f64,
    pub quantum_trials: usize,
}

#[derive(Serialize)]
struct ThmcheckOutput {
    seed: u64,
    eps: f64,
    delta: f64,
    classical: Vec<SandwichReport>,
    quantum: Vec<EquivalenceReport>,
    min_slack: f64,
}

pub fn thmcheck(cfg: &ThmcheckConfig, out: &Output, hook: &Hook) -> Result<Outcome, CliError> {
    if cfg.nx == 0 || cfg.ny == 0 || cfg.nx * cfg.ny > 4096 {
        return Err(CliError::Validation(format!(
            "alphabets {}x{} must be nonempty with at most 4096 cells",
            cfg.nx, cfg.ny
        )));
    }
    let mut rng = random::seeded(cfg.seed);
    let mut classical = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let p = random::distribution(&mut rng, cfg.nx, cfg.ny);
        classical.push(check_thm1_sandwich(&p, cfg.eps, cfg.delta)?);
    }
    let mut quantum = Vec::with_capacity(cfg.quantum_trials);
    for _ in 0..cfg.quantum_trials {
        let rho = random::density(&mut rng, &[2, 2], 4);
        quantum.push(check_partial_full_equivalence(&rho, cfg.eps, cfg.delta)?);
    }
    let min_slack = classical
        .iter()
        .map(SandwichReport::min_slack)
        .chain(quantum.iter().map(EquivalenceReport::min_slack))
        .fold(f64::INFINITY, f64::min);
    match out.format_or(Format::Json) {
        Format::Json => out.json(&ThmcheckOutput {
            seed: cfg.seed,
            eps: cfg.eps,
            delta: cfg.delta,
            classical,
            quantum,
            min_slack,
        })?,
        Format::Csv => out.csv(
            "family,index,min_slack",
            classical
                .iter()
                .enumerate()
                .map(|(i, r)| format!("classical,{i},{}", r.min_slack()))
                .chain(
                    quantum
                        .iter()
                        .enumerate()
                        .map(|(i, r)| format!("quantum,{i},{}", r.min_slack())),
                ),
        )?,
    }
    Ok(verdict(min_slack, hook))
}
