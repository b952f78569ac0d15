//! One runner per configuration mode.

use anyhow::{bail, Result};
use fracthermistor::continuation::{
    global_solve, glued_residuals, CertificateStatus, GlobalSolution, GronwallCertificate, HypothesisCheck, Termination,
};
use fracthermistor::fracops::{caputo_derivative, gamma_fn, rl_integral, FracOrder, SampledFn, TimeGrid};
use fracthermistor::model::{validate_hypotheses, HypothesisSet, ProblemSpec, Verdict};
use fracthermistor::picard::{existence_radius, pointwise_residuals, solve_local, LocalBall, LocalSolve, SolveStatus};

use crate::config::{Check, Loaded, Mode, Target};
use crate::report::{num, CertificateSummary, Escape, HypothesisLine, LadderRow, NodeLine, Report, WitnessLine};

/// Errors at or below this level count as exact in a convergence study.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    /// Escape or hypothesis violation: a result, not a malfunction.
    Informative = 2,
}

pub type Row = Vec<Option<String>>;

pub struct Outcome {
    pub report: Report,
    pub exit: Exit,
    /// `t,u,I,S,residual` rows.
    pub trajectory: Option<Vec<Row>>,
    /// `N,error,order` rows.
    pub table: Option<Vec<Row>>,
    /// `t,v,w,majorant` rows.
    pub majorant: Option<Vec<Row>>,
}

impl Outcome {
    fn new(report: Report, exit: Exit) -> Self {
        Self {
            report,
            exit,
            trajectory: None,
            table: None,
            majorant: None,
        }
    }
}

pub fn run(cfg: &Loaded, progress: &dyn Fn(&str)) -> Result<Outcome> {
    match cfg.mode {
        Mode::Local => local(cfg, progress),
        Mode::Global => global(cfg, progress, false),
        Mode::Gronwall => global(cfg, progress, true),
        Mode::Validate => validate(cfg, progress),
        Mode::Converge => converge(cfg, progress),
    }
}

fn local_solve(cfg: &Loaded, intervals: usize) -> Result<LocalSolve<f64>> {
    let ball = LocalBall::new(cfg.b, &cfg.spec)?;
    let grid = TimeGrid::uniform(0.0, ball.h, intervals)?;
    Ok(solve_local(&cfg.spec, ball, &grid, cfg.picard)?)
}

fn local(cfg: &Loaded, progress: &dyn Fn(&str)) -> Result<Outcome> {
    let mut report = Report::new(Mode::Local.name());
    let h = existence_radius(cfg.b, &cfg.spec)?;
    progress(&format!("local solve on [0, {h}] with {} intervals", cfg.grid_points));
    let run = local_solve(cfg, cfg.grid_points)?;
    let r = &run.report;
    report.h = Some(h);
    report.beta = Some(h);
    report.iterations = Some(r.iterations);
    report.integral_residual = Some(r.integral_residual);
    report.differential_residual = Some(r.differential_residual);
    if !r.in_ball {
        report
            .warnings
            .push(format!("solution leaves the ball |u - u0| <= {}", cfg.b));
    }
    if !r.updates_monotone {
        report
            .warnings
            .push("Picard updates are not monotone after their peak".into());
    }
    let exit = match r.status {
        SolveStatus::Converged => {
            report.verdict = "converged".into();
            Exit::Success
        }
        SolveStatus::MaxIterations => {
            report.verdict = "solver-failure".into();
            report.warnings.push(format!(
                "no convergence to {} within {} sweeps",
                cfg.picard.tol, cfg.picard.max_iter
            ));
            Exit::Failure
        }
        SolveStatus::NonFinite { index } => {
            report.verdict = "solver-failure".into();
            report.warnings.push(format!("non-finite iterate at node {index}"));
            Exit::Failure
        }
    };
    let mut out = Outcome::new(report, exit);
    out.trajectory = Some(trajectory(&run.solution, &cfg.spec)?);
    Ok(out)
}

fn global(cfg: &Loaded, progress: &dyn Fn(&str), certify_only: bool) -> Result<Outcome> {
    let mode = if certify_only { Mode::Gronwall } else { Mode::Global };
    let mut report = Report::new(mode.name());
    let h = existence_radius(cfg.continuation.step_b, &cfg.spec)?;
    progress(&format!(
        "global solve on [0, {}], first segment [0, {h}]",
        cfg.spec.horizon
    ));
    let run = global_solve(&cfg.spec, &cfg.continuation, cfg.picard)?;
    progress(&format!(
        "{} segments, beta = {}: {}",
        run.segments().len(),
        run.beta(),
        run.termination().label()
    ));
    report.h = Some(h);
    report.beta = Some(run.beta());
    report.iterations = Some(run.iterations());
    report.segments = Some(run.segments().len());
    if run.values().iter().all(|v| v.is_finite()) {
        match glued_residuals(&run, &cfg.spec) {
            Ok(r) => {
                report.integral_residual = Some(r.integral);
                report.differential_residual = Some(r.differential);
            }
            Err(e) => report.warnings.push(format!("residuals unavailable: {e}")),
        }
    }
    if run.reports().iter().any(|r| !r.in_ball) {
        report.warnings.push("a segment left its ball".into());
    }
    report.certificate = Some(certificate_summary(run.certificate()));

    let mut exit = match run.termination() {
        Termination::ReachedHorizon => Exit::Success,
        Termination::NoncontinuableEscape {
            t_star,
            value,
            threshold,
        } => {
            report.escape = Some(Escape {
                t_star: *t_star,
                value: *value,
                threshold: *threshold,
            });
            Exit::Informative
        }
        Termination::SolverFailure { .. } | Termination::Continuable => Exit::Failure,
    };
    report.verdict = run.termination().label().into();
    if certify_only {
        (report.verdict, exit) = match run.certificate() {
            CertificateStatus::Issued(c) if c.holds => ("holds".into(), Exit::Success),
            CertificateStatus::Issued(_) => ("violated".into(), Exit::Informative),
            CertificateStatus::NotAttempted(_) => ("not-attempted".into(), Exit::Informative),
            CertificateStatus::Unavailable { .. } => ("unavailable".into(), Exit::Failure),
        };
    }

    let mut out = Outcome::new(report, exit);
    out.trajectory = Some(trajectory(&run.flattened(), &cfg.spec)?);
    if let Some(cert) = run.certificate().certificate() {
        out.majorant = Some(majorant_rows(&run, cert));
    }
    Ok(out)
}

fn certificate_summary(status: &CertificateStatus<f64>) -> CertificateSummary {
    match status {
        CertificateStatus::Issued(c) => CertificateSummary {
            status: "issued",
            holds: Some(c.holds),
            iterations: Some(c.iterations),
            reason: match c.hypothesis {
                HypothesisCheck::Passed => None,
                HypothesisCheck::Violated(_) => Some("hypothesis inequality violated".into()),
            },
            witness: c.witness.map(|w| NodeLine {
                index: w.index,
                t: w.t,
                lhs: w.lhs,
                rhs: w.rhs,
            }),
        },
        CertificateStatus::NotAttempted(reason) => CertificateSummary {
            status: "not-attempted",
            holds: None,
            iterations: None,
            reason: Some((*reason).into()),
            witness: None,
        },
        CertificateStatus::Unavailable { iterations, increment } => CertificateSummary {
            status: "unavailable",
            holds: None,
            iterations: Some(*iterations),
            reason: Some(format!("majorant iteration unsettled, last increment {increment}")),
            witness: None,
        },
    }
}

fn majorant_rows(run: &GlobalSolution<f64>, cert: &GronwallCertificate<f64>) -> Vec<Row> {
    (0..run.values().len())
        .map(|k| {
            vec![
                num(run.grid().points()[k]),
                num(run.values()[k].abs()),
                num(cert.w.values()[k]),
                num(cert.majorant.values()[k]),
            ]
        })
        .collect()
}

/// `t,u,I,S,residual` rows; I, S and the residual are empty where the
/// source is undefined or the trajectory is not finite.
fn trajectory(u: &SampledFn<f64>, spec: &ProblemSpec<f64>) -> Result<Vec<Row>> {
    let pointwise = if u.is_finite() {
        Some(pointwise_residuals(u, spec)?)
    } else {
        None
    };
    Ok((0..u.len())
        .map(|k| {
            let (t, v) = (u.times()[k], u.values()[k]);
            match &pointwise {
                Some(p) => {
                    let s = p.source[k];
                    vec![
                        num(t),
                        num(v),
                        num(p.integral_accumulated[k]),
                        s.and_then(num),
                        s.and_then(|_| num(p.integral[k])),
                    ]
                }
                None => vec![num(t), num(v), None, None, None],
            }
        })
        .collect())
}

fn validate(cfg: &Loaded, progress: &dyn Fn(&str)) -> Result<Outcome> {
    let mut report = Report::new(Mode::Validate.name());
    let v = &cfg.validate;
    let spec = &cfg.spec;
    let s_range = v.s_range.unwrap_or([0.0, spec.horizon]);
    let u_range = v.u_range.unwrap_or([spec.u0 - cfg.b, spec.u0 + cfg.b]);
    let checks = HypothesisSet {
        h1: v.checks.contains(&Check::H1),
        h2: v.checks.contains(&Check::H2),
        h3: v.checks.contains(&Check::H3),
        growth: v.checks.contains(&Check::Growth),
    };
    progress(&format!(
        "auditing on [{}, {}] x [{}, {}] with {} samples per axis",
        s_range[0], s_range[1], u_range[0], u_range[1], v.samples
    ));
    let audit = validate_hypotheses(
        spec,
        (s_range[0], s_range[1]),
        (u_range[0], u_range[1]),
        v.samples,
        checks,
    )?;
    if checks.growth && spec.constants.growth.is_none() {
        report
            .warnings
            .push("growth check requested but c3, c4, c5 are not configured".into());
    }

    let line = |name, verdict: &Option<Verdict<f64>>| {
        verdict.as_ref().map(|v| HypothesisLine {
            name,
            holds: v.holds(),
            witness: match v {
                Verdict::HoldsOnSample => None,
                Verdict::Violated(w) => Some(WitnessLine {
                    s: w.s,
                    u: w.u,
                    v: w.v,
                    observed: w.observed,
                    bound: w.bound,
                }),
            },
        })
    };
    let lines: Vec<_> = [
        line("h1", &audit.h1),
        line("h2", &audit.h2),
        line("h2_regularized", &audit.h2_regularized),
        line("h3", &audit.h3),
        line("growth", &audit.growth),
    ]
    .into_iter()
    .flatten()
    .collect();
    // with δ > 0 the regularized form of H2 is the one the estimates use
    let h2 = audit.h2_regularized.as_ref().or(audit.h2.as_ref());
    let holds = [audit.h1.as_ref(), h2, audit.h3.as_ref(), audit.growth.as_ref()]
        .into_iter()
        .flatten()
        .all(Verdict::holds);
    report.hypotheses = Some(lines);
    report.inconsistency_window = audit.inconsistency_window.map(|w| w.upper);
    let exit = if holds {
        report.verdict = "holds".into();
        Exit::Success
    } else {
        report.verdict = "hypothesis-violation".into();
        Exit::Informative
    };
    Ok(Outcome::new(report, exit))
}

/// Empirical orders between consecutive rungs; `None` where either error
/// is at the exactness floor.
pub fn empirical_orders(ladder: &[usize], errors: &[f64]) -> Vec<Option<f64>> {
    let mut orders = vec![None];
    for i in 1..ladder.len() {
        let (a, b) = (errors[i - 1], errors[i]);
        orders.push(if a > EXACT_FLOOR && b > EXACT_FLOOR {
            Some((a / b).ln() / (ladder[i] as f64 / ladder[i - 1] as f64).ln())
        } else {
            None
        });
    }
    orders
}

fn converge(cfg: &Loaded, progress: &dyn Fn(&str)) -> Result<Outcome> {
    let mut report = Report::new(Mode::Converge.name());
    let c = &cfg.converge;
    let ladder = &c.ladder;
    let gamma = c.order;
    let two_alpha = 2.0 * cfg.spec.alpha.value();
    let solver_contract = (2.0 - two_alpha).min(1.0) - 0.25;

    // (error per rung, acceptance test on an order)
    let (errors, accept): (Vec<f64>, Box<dyn Fn(f64) -> bool>) = match c.target {
        Target::CaputoPower | Target::RlConstant | Target::RlPower => {
            let order = FracOrder::new(gamma)?;
            let mut errors = Vec::new();
            for &n in ladder {
                progress(&format!("{:?} at N = {n}", c.target));
                let grid = TimeGrid::uniform(0.0, 1.0, n)?;
                let (approx, exact): (_, Box<dyn Fn(f64) -> f64>) = match c.target {
                    Target::CaputoPower => {
                        let g = SampledFn::from_fn(grid, |t| t * t);
                        let k = 2.0 / gamma_fn(3.0 - gamma)?;
                        (
                            caputo_derivative(&g, order)?,
                            Box::new(move |t: f64| k * t.powf(2.0 - gamma)),
                        )
                    }
                    Target::RlConstant => {
                        let g = SampledFn::constant(grid, 1.0);
                        let k = 1.0 / gamma_fn(1.0 + gamma)?;
                        (rl_integral(&g, order)?, Box::new(move |t: f64| k * t.powf(gamma)))
                    }
                    _ => {
                        let g = SampledFn::from_fn(grid, |t| t * t);
                        let k = 2.0 / gamma_fn(3.0 + gamma)?;
                        (rl_integral(&g, order)?, Box::new(move |t: f64| k * t.powf(2.0 + gamma)))
                    }
                };
                let err = approx
                    .times()
                    .iter()
                    .zip(approx.values())
                    .fold(0.0f64, |m, (&t, &v)| m.max((v - exact(t)).abs()));
                errors.push(err);
            }
            let expected = if c.target == Target::CaputoPower {
                2.0 - gamma
            } else {
                2.0
            };
            (errors, Box::new(move |p: f64| (p - expected).abs() <= 0.25))
        }
        Target::Solve => {
            let finest = *ladder.last().expect("validated ladder");
            let reference_n = c.reference_points.unwrap_or(4 * finest);
            if let Some(n) = ladder.iter().find(|&&n| !reference_n.is_multiple_of(n)) {
                bail!("reference of {reference_n} intervals is not a multiple of the rung {n}");
            }
            progress(&format!("reference solve at N = {reference_n}"));
            let reference = local_solve(cfg, reference_n)?;
            if !reference.report.converged() {
                return Ok(solver_failure(report, reference_n));
            }
            let mut errors = Vec::new();
            for &n in ladder {
                progress(&format!("solve at N = {n}"));
                let run = local_solve(cfg, n)?;
                if !run.report.converged() {
                    return Ok(solver_failure(report, n));
                }
                let stride = reference_n / n;
                let err = run.solution.values().iter().enumerate().fold(0.0f64, |m, (k, &v)| {
                    m.max((v - reference.solution.values()[k * stride]).abs())
                });
                errors.push(err);
            }
            (errors, Box::new(move |p: f64| p >= solver_contract))
        }
        Target::Residual => {
            let mut errors = Vec::new();
            for &n in ladder {
                progress(&format!("solve at N = {n}"));
                let run = local_solve(cfg, n)?;
                if !run.report.converged() {
                    return Ok(solver_failure(report, n));
                }
                errors.push(run.report.differential_residual);
            }
            (errors, Box::new(move |p: f64| p >= solver_contract))
        }
    };

    let orders = empirical_orders(ladder, &errors);
    let exact = errors.iter().all(|&e| e <= EXACT_FLOOR);
    let measured: Vec<f64> = orders.iter().flatten().copied().collect();
    let meets = errors.iter().all(|e| e.is_finite())
        && (exact || (!measured.is_empty() && measured.iter().all(|&p| accept(p))));
    let rows: Vec<LadderRow> = ladder
        .iter()
        .zip(&errors)
        .zip(&orders)
        .map(|((&n, &error), &order)| LadderRow { n, error, order })
        .collect();
    let table = rows
        .iter()
        .map(|r| vec![Some(r.n.to_string()), num(r.error), r.order.and_then(num)])
        .collect();
    report.convergence = Some(rows);
    report.verdict = if meets { "converged" } else { "order-below-contract" }.into();
    let mut out = Outcome::new(report, if meets { Exit::Success } else { Exit::Failure });
    out.table = Some(table);
    Ok(out)
}

fn solver_failure(mut report: Report, n: usize) -> Outcome {
    report.verdict = "solver-failure".into();
    report.warnings.push(format!("local solve at N = {n} did not converge"));
    Outcome::new(report, Exit::Failure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_skip_exact_rungs() {
        let orders = empirical_orders(&[10, 20, 40], &[4e-2, 1e-2, 0.0]);
        assert_eq!(orders[0], None);
        assert!((orders[1].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(orders[2], None);
    }
}
