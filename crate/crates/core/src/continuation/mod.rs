//! Global solutions by continuation: repeated extension of a local solution
//! past its right end, termination classification, and Gronwall
//! certificates for the a priori bound.
//!
//! All segments of a [`GlobalSolution`] live on one glued grid, and each
//! extension solves the same causal discrete equations as a direct solve on
//! that grid would; the history over `[0, β]` enters as a frozen sum.

mod gronwall;
mod history;

pub use gronwall::{gronwall_majorant, GronwallCertificate, GronwallOptions, HypothesisCheck, NodeWitness};
pub use history::{apply_k, history_term_u1};

use crate::error::{invalid, Error, Result};
use crate::fracops::{caputo_rows, gamma_fn, sup_abs_diff, SampledFn, TimeGrid};
use crate::model::{validate_hypotheses, HypothesisSet, ProblemSpec};
use crate::picard::{
    existence_radius, radius_unclamped, residuals, solve_local, update_diagnostics, LocalBall, PicardOptions,
    SolveReport, SolveStatus, Sweep, VolterraMap,
};
use crate::real::Real;

/// Per-run settings of the continuation engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationConfig<T> {
    /// Ball radius b used to size every segment.
    pub step_b: T,
    /// Escape threshold B: the solution is declared noncontinuable once it
    /// leaves `[−B, B]`.
    pub blowup_threshold: T,
    pub max_segments: usize,
    /// Grid intervals per unit time.
    pub grid_density: T,
    pub min_intervals: usize,
    pub max_intervals: usize,
    /// Grading exponent toward the left end of each segment; 1 is uniform.
    pub grading: T,
    /// Upper bound on an extension's length; at most 1.
    pub max_step: T,
}

impl<T: Real> ContinuationConfig<T> {
    /// Defaults for `spec`, with `B = 10⁶·max(1, |u₀|)`.
    pub fn for_problem(spec: &ProblemSpec<T>) -> Self {
        Self {
            step_b: T::one(),
            blowup_threshold: T::lit(1e6) * spec.u0.abs().max(T::one()),
            max_segments: 1000,
            grid_density: T::lit(256.0),
            min_intervals: 16,
            max_intervals: 4096,
            grading: T::one(),
            max_step: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("{x} must be positive")))
            }
        };
        positive("continuation.step_b", self.step_b)?;
        positive("continuation.blowup_threshold", self.blowup_threshold)?;
        positive("continuation.grid_density", self.grid_density)?;
        positive("continuation.max_step", self.max_step)?;
        if self.max_step > T::one() {
            return Err(invalid("continuation.max_step", "extensions are limited to length 1"));
        }
        if self.max_segments == 0 {
            return Err(invalid("continuation.max_segments", "must be at least 1"));
        }
        if self.min_intervals == 0 || self.max_intervals < self.min_intervals {
            return Err(invalid(
                "continuation.min_intervals",
                "need 1 <= min_intervals <= max_intervals",
            ));
        }
        if !(self.grading >= T::one()) {
            return Err(invalid("continuation.grading", "must be at least 1"));
        }
        Ok(())
    }

    /// Grid of one segment `[start, end]`.
    pub fn segment_grid(&self, start: T, end: T) -> Result<TimeGrid<T>> {
        // 1e-9 absorbs rounding in `end - start`
        let want = (self.grid_density * (end - start) - T::lit(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX);
        let intervals = want.clamp(self.min_intervals, self.max_intervals);
        TimeGrid::graded(start, end, intervals, self.grading)
    }
}

/// How a global run ended, or that it can still be extended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination<T> {
    Continuable,
    ReachedHorizon,
    /// `|u(t*)| > B`: the graph left the compact window `[t₀, T] × [−B, B]`.
    NoncontinuableEscape {
        t_star: T,
        value: T,
        threshold: T,
    },
    SolverFailure {
        report: Box<SolveReport<T>>,
    },
}

impl<T> Termination<T> {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Termination::Continuable)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Continuable => "continuable",
            Termination::ReachedHorizon => "reached-horizon",
            Termination::NoncontinuableEscape { .. } => "noncontinuable-escape",
            Termination::SolverFailure { .. } => "solver-failure",
        }
    }
}

/// Outcome of certifying a finished solution.
#[derive(Debug, Clone, PartialEq)]
pub enum CertificateStatus<T> {
    NotAttempted(&'static str),
    Issued(Box<GronwallCertificate<T>>),
    Unavailable { iterations: usize, increment: T },
}

impl<T> CertificateStatus<T> {
    pub fn certificate(&self) -> Option<&GronwallCertificate<T>> {
        match self {
            CertificateStatus::Issued(c) => Some(c),
            _ => None,
        }
    }
}

/// A solution on `[0, β]` assembled from glued segments.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution<T> {
    segments: Vec<SampledFn<T>>,
    reports: Vec<SolveReport<T>>,
    grid: TimeGrid<T>,
    values: Vec<T>,
    termination: Termination<T>,
    certificate: CertificateStatus<T>,
}

impl<T: Real> GlobalSolution<T> {
    /// Starts a global solution from a local solve on `[0, h]`.
    pub fn from_local(
        local: crate::picard::LocalSolve<T>,
        spec: &ProblemSpec<T>,
        config: &ContinuationConfig<T>,
    ) -> Self {
        let grid = local.solution.grid().clone();
        let values = local.solution.values().to_vec();
        let mut solution = Self {
            segments: vec![local.solution],
            reports: vec![local.report],
            grid,
            values,
            termination: Termination::Continuable,
            certificate: CertificateStatus::NotAttempted("not requested"),
        };
        solution.termination = solution.after_segment(0, spec, config);
        solution
    }

    pub fn segments(&self) -> &[SampledFn<T>] {
        &self.segments
    }

    pub fn reports(&self) -> &[SolveReport<T>] {
        &self.reports
    }

    pub fn termination(&self) -> &Termination<T> {
        &self.termination
    }

    pub fn certificate(&self) -> &CertificateStatus<T> {
        &self.certificate
    }

    /// Right end β of the computed solution.
    pub fn beta(&self) -> T {
        self.grid.end()
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The glued solution on the union grid (boundary nodes stored once).
    pub fn flattened(&self) -> SampledFn<T> {
        SampledFn::new(self.grid.clone(), self.values.clone()).expect("glued grid matches values")
    }

    /// Total Picard sweeps across segments.
    pub fn iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }

    /// Largest segment integral residual.
    pub fn integral_residual(&self) -> T {
        self.reports.iter().fold(T::zero(), |m, r| m.max(r.integral_residual))
    }

    /// Verdict after appending the segment starting at union index `from`.
    fn after_segment(&self, from: usize, spec: &ProblemSpec<T>, config: &ContinuationConfig<T>) -> Termination<T> {
        let report = self.reports.last().expect("at least one segment");
        let t = self.grid.points();
        if let SolveStatus::NonFinite { .. } = report.status {
            if let Some(k) = (from..t.len()).find(|&k| !self.values[k].is_finite()) {
                return Termination::NoncontinuableEscape {
                    t_star: t[k],
                    value: self.values[k],
                    threshold: config.blowup_threshold,
                };
            }
        }
        if !report.converged() {
            return Termination::SolverFailure {
                report: Box::new(report.clone()),
            };
        }
        if let Some(k) = (from..t.len()).find(|&k| !(self.values[k].abs() <= config.blowup_threshold)) {
            return Termination::NoncontinuableEscape {
                t_star: t[k],
                value: self.values[k],
                threshold: config.blowup_threshold,
            };
        }
        if reached(self.beta(), spec.horizon) {
            Termination::ReachedHorizon
        } else {
            Termination::Continuable
        }
    }
}

fn reached<T: Real>(beta: T, horizon: T) -> bool {
    beta >= horizon - T::lit(1e-12) * horizon.max(T::one())
}

/// Extends a non-terminal solution by one segment `[β, β + h]` with
/// `h = min{radius(b), max_step ≤ 1, T − β}`, solving `v = K v` by Picard
/// iteration with the history frozen.
pub fn extend_segment<T: Real>(
    mut solution: GlobalSolution<T>,
    spec: &ProblemSpec<T>,
    config: &ContinuationConfig<T>,
    options: PicardOptions<T>,
) -> Result<GlobalSolution<T>> {
    spec.validate()?;
    config.validate()?;
    options.validate()?;
    // A reached-horizon solution may be extended toward a later horizon.
    if matches!(
        solution.termination,
        Termination::NoncontinuableEscape { .. } | Termination::SolverFailure { .. }
    ) {
        return Err(invalid(
            "solution",
            format!("already terminal ({})", solution.termination.label()),
        ));
    }
    let beta = solution.beta();
    let step = radius_unclamped(config.step_b, spec)?
        .min(config.max_step)
        .min(spec.horizon - beta);
    if !(step > T::zero()) {
        solution.termination = Termination::ReachedHorizon;
        return Ok(solution);
    }
    let segment_grid = config.segment_grid(beta, beta + step)?;
    let union = solution.grid.concat(&segment_grid)?;
    let m = solution.grid.len() - 1;
    let n = union.len();
    let map = VolterraMap::new(spec, &union, m + 1)?;

    let u_beta = solution.values[m];
    let mut u = solution.values.clone();
    u.resize(n, u_beta);
    let mut next = u.clone();
    let mut sweep = Sweep::default();
    let mut updates = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    for _ in 0..options.max_iter {
        map.apply_from(&u, m + 1, &mut next, &mut sweep)?;
        if let Some(index) = next[m + 1..].iter().position(|v| !v.is_finite()) {
            updates.push(T::infinity());
            u[m + 1..].copy_from_slice(&next[m + 1..]);
            status = SolveStatus::NonFinite { index: index + m + 1 };
            break;
        }
        let delta = sup_abs_diff(&u[m + 1..], &next[m + 1..]);
        updates.push(delta);
        u[m + 1..].copy_from_slice(&next[m + 1..]);
        if delta <= options.tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    let (integral_residual, differential_residual, in_ball) = if matches!(status, SolveStatus::NonFinite { .. }) {
        (T::nan(), T::nan(), false)
    } else {
        map.apply_from(&u, m + 1, &mut next, &mut sweep)?;
        let integral = sup_abs_diff(&u[m + 1..], &next[m + 1..]);
        let mut caputo = vec![T::zero(); n];
        caputo_rows(
            union.points(),
            &u,
            spec.caputo_order().value(),
            union.uniform_spacing(),
            m + 1,
            &mut caputo,
        )?;
        let mut differential = T::zero();
        for k in m + 1..n {
            let s = spec.ratio(union.points()[k], sweep.rates[k], sweep.integral[k])?;
            differential = differential.max((caputo[k] - s).abs());
        }
        let history = history::HistoryTerm::new(spec, solution.grid.points(), &solution.values)?;
        let mut in_ball = true;
        for k in m + 1..n {
            let u1 = history.value(union.points()[k], sweep.integral[k])?;
            in_ball &= (u[k] - u1).abs() <= config.step_b;
        }
        (integral, differential, in_ball)
    };

    let (updates_monotone, contraction_estimate) = update_diagnostics(&updates);
    let segment = SampledFn::new(segment_grid, u[m..].to_vec())?;
    solution.segments.push(segment);
    solution.reports.push(SolveReport {
        status,
        iterations: updates.len(),
        sup_update: updates,
        integral_residual,
        differential_residual,
        in_ball,
        updates_monotone,
        contraction_estimate,
    });
    solution.grid = union;
    solution.values = u;
    solution.termination = solution.after_segment(m + 1, spec, config);
    Ok(solution)
}

/// Solves on `[0, T]` by a local solve followed by extensions until the
/// horizon is reached, the solution escapes `[−B, B]`, a segment fails, or
/// `max_segments` is exhausted. A Gronwall certificate is attached when the
/// sampled hypotheses allow one.
pub fn global_solve<T: Real>(
    spec: &ProblemSpec<T>,
    config: &ContinuationConfig<T>,
    options: PicardOptions<T>,
) -> Result<GlobalSolution<T>> {
    spec.validate()?;
    config.validate()?;
    options.validate()?;
    let h0 = existence_radius(config.step_b, spec)?;
    let grid = config.segment_grid(T::zero(), h0)?;
    let local = solve_local(
        spec,
        LocalBall {
            b: config.step_b,
            h: h0,
        },
        &grid,
        options,
    )?;
    let mut solution = GlobalSolution::from_local(local, spec, config);
    while !solution.termination.is_terminal() && solution.segments.len() < config.max_segments {
        solution = extend_segment(solution, spec, config, options)?;
    }
    if !solution.termination.is_terminal() {
        solution.termination = classify_termination(&solution, spec, config);
    }
    solution.certificate = certify_solution(&solution, spec, GronwallOptions::default())?;
    Ok(solution)
}

/// Verdict for a solution: reached-horizon when `β ≥ T`, escape at the
/// first node with `|u| > B`, solver failure (with the last report) otherwise.
pub fn classify_termination<T: Real>(
    solution: &GlobalSolution<T>,
    spec: &ProblemSpec<T>,
    config: &ContinuationConfig<T>,
) -> Termination<T> {
    if reached(solution.beta(), spec.horizon) {
        return Termination::ReachedHorizon;
    }
    let t = solution.grid.points();
    if let Some(k) = solution
        .values
        .iter()
        .position(|v| !(v.abs() <= config.blowup_threshold))
    {
        return Termination::NoncontinuableEscape {
            t_star: t[k],
            value: solution.values[k],
            threshold: config.blowup_threshold,
        };
    }
    Termination::SolverFailure {
        report: Box::new(solution.reports.last().expect("at least one segment").clone()),
    }
}

/// Forcing, coefficient and exponent of the a priori bound
/// `|u(t)| ≤ w(t) + a∫₀ᵗ |u(s)|(t − s)^{2α−1} ds`.
///
/// With the growth envelope `f ≤ c₄|u| + c₅` the bound reads
/// `w = |u₀| + λc₅t^{2α}/(Γ(2α+1)δ²)`, `a = λc₄/(Γ(2α)δ²)`; under the
/// bounded-conductivity hypotheses `w = |u₀| + λc₂t^{2α}/(Γ(2α+1)δ²)` and
/// `a = λ/(Γ(2α)c₁²)`.
pub fn a_priori_bound<T: Real>(
    spec: &ProblemSpec<T>,
    grid: &TimeGrid<T>,
    use_growth: bool,
) -> Result<(SampledFn<T>, T, T)> {
    let k = &spec.constants;
    let two_alpha = T::two() * spec.alpha.value();
    let d2 = spec.delta * spec.delta;
    let (forcing, a) = match (use_growth, k.growth) {
        (true, Some(g)) => (g.c5, spec.lambda * g.c4 / (gamma_fn(two_alpha)? * d2)),
        _ => (k.c2, spec.lambda / (gamma_fn(two_alpha)? * k.c1 * k.c1)),
    };
    let scale = spec.lambda * forcing / (gamma_fn(two_alpha + T::one())? * d2);
    let u0 = spec.u0.abs();
    let w = SampledFn::from_fn(grid.clone(), |t| u0 + scale * t.powf(two_alpha));
    Ok((w, a, T::one() - two_alpha))
}

/// Certifies `|u| ≤ majorant` for a finished solution when δ > 0 and the
/// sampled hypotheses behind [`a_priori_bound`] hold along the trajectory.
pub fn certify_solution<T: Real>(
    solution: &GlobalSolution<T>,
    spec: &ProblemSpec<T>,
    options: GronwallOptions<T>,
) -> Result<CertificateStatus<T>> {
    if !(spec.delta > T::zero()) {
        return Ok(CertificateStatus::NotAttempted(
            "delta = 0 leaves the denominator unbounded below",
        ));
    }
    if solution.values.iter().any(|v| !v.is_finite()) {
        return Ok(CertificateStatus::NotAttempted("solution is not finite"));
    }
    let lo = solution.values.iter().fold(T::infinity(), |m, &v| m.min(v));
    let hi = solution.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let pad = T::lit(1e-9).max((hi - lo) * T::lit(1e-6));
    let checks = HypothesisSet {
        h1: true,
        h2: true,
        h3: false,
        growth: true,
    };
    let audit = validate_hypotheses(spec, (T::zero(), solution.beta()), (lo - pad, hi + pad), 32, checks)?;
    let use_growth = matches!(audit.growth, Some(v) if v.holds());
    if !use_growth && !audit.local_estimates_hold() {
        return Ok(CertificateStatus::NotAttempted(
            "sampled H1/H2 do not hold along the solution",
        ));
    }
    let (w, a, exponent) = a_priori_bound(spec, &solution.grid, use_growth)?;
    let v = SampledFn::new(solution.grid.clone(), solution.values.iter().map(|x| x.abs()).collect())?;
    match gronwall_majorant(&v, &w, a, exponent, options) {
        Ok(cert) => Ok(CertificateStatus::Issued(Box::new(cert))),
        Err(Error::GronwallDivergent { iterations, increment }) => Ok(CertificateStatus::Unavailable {
            iterations,
            increment: T::lit(increment),
        }),
        Err(e) => Err(e),
    }
}

/// Integral and differential residuals of the glued solution on its union grid.
pub fn glued_residuals<T: Real>(
    solution: &GlobalSolution<T>,
    spec: &ProblemSpec<T>,
) -> Result<crate::picard::Residuals<T>> {
    residuals(&solution.flattened(), spec)
}
