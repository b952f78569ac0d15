//! Local solver on `[0, h]`: the fixed-point map A of the Volterra form,
//! the existence radius of the invariant ball, and Picard iteration.
//!
//! Convergence of the iteration is observed, not guaranteed: existence of a
//! fixed point on the ball comes from a compactness argument, which gives no
//! contraction rate.

use crate::error::{invalid, Error, Result};
use crate::fracops::{
    caputo_derivative, gamma_fn, sup_abs_diff, CumulativeTrapezoid, ProductIntegrator, SampledFn, TimeGrid,
};
use crate::model::{DenominatorPlacement, ProblemSpec};
use crate::real::Real;

/// Fraction of the interval excluded at the left end when measuring the
/// differential residual. The L1 Caputo scheme has a mesh-independent error
/// at the first few nodes for solutions behaving like `u₀ + c·t^{2α}`.
pub const INTERIOR_FRACTION: f64 = 0.1;

/// Radius `b` of the sup-norm ball around `u₀` and the time `h` on which A
/// maps that ball into itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBall<T> {
    pub b: T,
    pub h: T,
}

impl<T: Real> LocalBall<T> {
    /// The ball of radius `b` with `h` from [`existence_radius`].
    pub fn new(b: T, spec: &ProblemSpec<T>) -> Result<Self> {
        Ok(Self {
            b,
            h: existence_radius(b, spec)?,
        })
    }
}

/// `h = min{ (b·Γ(2α+1)·c₁² / (λM))^{1/(2α)}, T }`.
pub fn existence_radius<T: Real>(b: T, spec: &ProblemSpec<T>) -> Result<T> {
    spec.validate()?;
    if !(b > T::zero()) || !b.is_finite() {
        return Err(invalid("b", format!("{b} must be positive")));
    }
    Ok(radius_unclamped(b, spec)?.min(spec.horizon))
}

/// The first branch of the radius, `+∞` when λ = 0.
pub(crate) fn radius_unclamped<T: Real>(b: T, spec: &ProblemSpec<T>) -> Result<T> {
    if spec.lambda == T::zero() {
        return Ok(T::infinity());
    }
    let two_alpha = T::two() * spec.alpha.value();
    let c1 = spec.constants.c1;
    let scale = b * gamma_fn(two_alpha + T::one())? * c1 * c1 / (spec.lambda * spec.constants.growth_m);
    Ok(scale.powf(T::one() / two_alpha))
}

/// Non-integer exponents `j·2α + n < 2` (`j ≥ 1`, `n ≥ 0`), smallest first,
/// at most three. Solutions behave like `u₀ + c·t^{2α} + …` near the origin
/// and the source inherits these powers; the integrator corrects for them.
pub(crate) fn starting_exponents<T: Real>(two_alpha: T) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    let mut j = 1;
    while T::from_usize(j) * two_alpha < T::two() {
        for n in 0..2 {
            let sigma = T::from_usize(j) * two_alpha + T::from_usize(n);
            let integer = (sigma - sigma.round()).abs() < T::lit(1e-6);
            if sigma < T::two() && !integer && !out.iter().any(|&x| (x - sigma).abs() < T::lit(1e-6)) {
                out.push(sigma);
            }
        }
        j += 1;
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite exponents"));
    out.truncate(3);
    out
}

/// Discrete Volterra operator on a fixed grid:
/// `(Φu)(t_k) = u₀ + (1/Γ(2α)) Σ_j w_j^{(k)} g_j` with product-integration
/// weights and `g_j` the regularized source in the configured placement.
#[derive(Debug, Clone)]
pub(crate) struct VolterraMap<'a, T> {
    spec: &'a ProblemSpec<T>,
    integrator: ProductIntegrator<T>,
    accumulator: CumulativeTrapezoid<T>,
    times: Vec<T>,
    inv_gamma: T,
}

/// Per-node quantities of one operator evaluation.
#[derive(Debug, Clone, Default)]
pub(crate) struct Sweep<T> {
    pub rates: Vec<T>,
    pub integral: Vec<T>,
    /// Integrand of the kernel sum (λf/(δ+I)² for Inner, f for Outer).
    pub integrand: Vec<T>,
}

impl<'a, T: Real> VolterraMap<'a, T> {
    /// Operator rows for targets `first_target..` of `grid`.
    pub fn new(spec: &'a ProblemSpec<T>, grid: &TimeGrid<T>, first_target: usize) -> Result<Self> {
        let exponents = starting_exponents(T::two() * spec.alpha.value());
        let integrator = ProductIntegrator::with_first_target(grid, spec.kernel_exponent(), first_target)?
            .with_corrections(&exponents)?;
        Ok(Self {
            spec,
            integrator,
            accumulator: CumulativeTrapezoid::new(grid.points(), &exponents)?,
            times: grid.points().to_vec(),
            inv_gamma: T::one() / gamma_fn(T::two() * spec.alpha.value())?,
        })
    }

    /// Fills the rates, trapezoid integral and kernel integrand for `u`.
    pub fn prepare(&self, u: &[T], sweep: &mut Sweep<T>) -> Result<()> {
        prepare_sweep(self.spec, &self.times, &self.accumulator, u, sweep)
    }

    /// `(Φu)(t_k)` for a prepared sweep; `k ≥ 1`.
    pub fn value_at(&self, k: usize, sweep: &Sweep<T>) -> Result<T> {
        let conv = self.integrator.integrate(k, &sweep.integrand) * self.inv_gamma;
        let increment = match self.spec.placement {
            DenominatorPlacement::Inner => conv,
            DenominatorPlacement::Outer => self.spec.ratio(self.times[k], conv, sweep.integral[k])?,
        };
        Ok(self.spec.u0 + increment)
    }

    /// Writes `(Φu)(t_k)` into `out[k]` for `k ≥ from` (and `out[0] = u₀`
    /// when `from == 0`).
    pub fn apply_from(&self, u: &[T], from: usize, out: &mut [T], sweep: &mut Sweep<T>) -> Result<()> {
        self.prepare(u, sweep)?;
        if from == 0 {
            out[0] = self.spec.u0;
        }
        for k in from.max(1)..self.times.len() {
            out[k] = self.value_at(k, sweep)?;
        }
        Ok(())
    }
}

/// Conductivity, accumulated integral and kernel integrand of `u` on `times`.
pub(crate) fn prepare_sweep<T: Real>(
    spec: &ProblemSpec<T>,
    times: &[T],
    accumulator: &CumulativeTrapezoid<T>,
    u: &[T],
    sweep: &mut Sweep<T>,
) -> Result<()> {
    let n = times.len();
    sweep.rates.resize(n, T::zero());
    sweep.integral.resize(n, T::zero());
    sweep.integrand.resize(n, T::zero());
    for k in 0..n {
        sweep.rates[k] = spec.conductivity.eval(times[k], u[k])?;
    }
    accumulator.accumulate(&sweep.rates, &mut sweep.integral);
    match spec.placement {
        DenominatorPlacement::Inner => {
            for k in 0..n {
                sweep.integrand[k] = spec.ratio(times[k], sweep.rates[k], sweep.integral[k])?;
            }
        }
        DenominatorPlacement::Outer => sweep.integrand.copy_from_slice(&sweep.rates),
    }
    Ok(())
}

fn require_origin<T: Real>(grid: &TimeGrid<T>) -> Result<()> {
    if grid.start() != T::zero() {
        return Err(Error::InvalidGrid(format!(
            "the Volterra form needs a grid starting at 0, got {}",
            grid.start()
        )));
    }
    Ok(())
}

/// The fixed-point operator A applied to `u` on its own grid.
pub fn apply_a<T: Real>(u: &SampledFn<T>, spec: &ProblemSpec<T>) -> Result<SampledFn<T>> {
    spec.validate()?;
    require_origin(u.grid())?;
    let map = VolterraMap::new(spec, u.grid(), 1)?;
    let mut out = vec![T::zero(); u.len()];
    map.apply_from(u.values(), 0, &mut out, &mut Sweep::default())?;
    SampledFn::new(u.grid().clone(), out)
}

/// Stopping rule of the Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for PicardOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 200,
        }
    }
}

impl<T: Real> PicardOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(invalid("tol", format!("{} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// `max_iter` sweeps without reaching the tolerance.
    MaxIterations,
    /// An iterate produced a non-finite value at this node.
    NonFinite {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub status: SolveStatus,
    pub iterations: usize,
    /// `‖u^{k+1} − u^k‖_sup` per sweep.
    pub sup_update: Vec<T>,
    /// `‖u − Au‖_sup` of the returned iterate.
    pub integral_residual: T,
    /// Caputo residual on the interior window, see [`INTERIOR_FRACTION`].
    pub differential_residual: T,
    pub in_ball: bool,
    /// Whether the updates are nonincreasing after their peak. A `false`
    /// here is a warning only.
    pub updates_monotone: bool,
    /// Ratio of the last two updates, an empirical contraction factor.
    pub contraction_estimate: Option<T>,
}

impl<T: Real> SolveReport<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

pub(crate) fn update_diagnostics<T: Real>(updates: &[T]) -> (bool, Option<T>) {
    let peak = updates
        .iter()
        .enumerate()
        .fold(
            (0, T::neg_infinity()),
            |(i, m), (j, &x)| if x > m { (j, x) } else { (i, m) },
        )
        .0;
    let monotone = updates[peak..].windows(2).all(|w| w[1] <= w[0]);
    let contraction = match updates {
        [.., a, b] if *a > T::zero() => Some(*b / *a),
        _ => None,
    };
    (monotone, contraction)
}

/// Solution and diagnostics of a local Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolve<T> {
    pub solution: SampledFn<T>,
    pub report: SolveReport<T>,
}

/// Picard iteration `u^{k+1} = A u^k` from `u⁰ ≡ u₀` on `grid`, which must
/// span exactly `[0, ball.h]`.
///
/// Non-convergence and non-finite iterates are reported through
/// [`SolveReport::status`]; only precondition violations are errors.
pub fn solve_local<T: Real>(
    spec: &ProblemSpec<T>,
    ball: LocalBall<T>,
    grid: &TimeGrid<T>,
    options: PicardOptions<T>,
) -> Result<LocalSolve<T>> {
    spec.validate()?;
    options.validate()?;
    require_origin(grid)?;
    let h = existence_radius(ball.b, spec)?;
    let close = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs().max(T::one());
    if !close(h, ball.h) {
        return Err(invalid(
            "ball.h",
            format!("{} differs from the existence radius {h}", ball.h),
        ));
    }
    if !close(grid.end(), h) {
        return Err(Error::InvalidGrid(format!(
            "grid ends at {} but the local interval is [0, {h}]",
            grid.end()
        )));
    }

    let map = VolterraMap::new(spec, grid, 1)?;
    let n = grid.len();
    let mut u = vec![spec.u0; n];
    let mut next = vec![T::zero(); n];
    let mut sweep = Sweep::default();
    let mut updates = Vec::new();
    let mut status = SolveStatus::MaxIterations;

    for _ in 0..options.max_iter {
        map.apply_from(&u, 0, &mut next, &mut sweep)?;
        if let Some(index) = next.iter().position(|v| !v.is_finite()) {
            updates.push(T::infinity());
            std::mem::swap(&mut u, &mut next);
            status = SolveStatus::NonFinite { index };
            break;
        }
        let delta = sup_abs_diff(&u, &next);
        updates.push(delta);
        std::mem::swap(&mut u, &mut next);
        if delta <= options.tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    let solution = SampledFn::new(grid.clone(), u)?;
    let (integral_residual, differential_residual) = if matches!(status, SolveStatus::NonFinite { .. }) {
        (T::nan(), T::nan())
    } else {
        let r = residuals(&solution, spec)?;
        (r.integral, r.differential)
    };
    let in_ball = solution.values().iter().all(|&v| (v - spec.u0).abs() <= ball.b);
    let (updates_monotone, contraction_estimate) = update_diagnostics(&updates);
    Ok(LocalSolve {
        solution,
        report: SolveReport {
            status,
            iterations: updates.len(),
            sup_update: updates,
            integral_residual,
            differential_residual,
            in_ball,
            updates_monotone,
            contraction_estimate,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<T> {
    /// `‖u − Au‖_sup`.
    pub integral: T,
    /// `max |D^{2α}u − S(t, u)|` over the interior window.
    pub differential: T,
}

/// Pointwise `|u − Au|` and the Caputo-minus-source mismatch at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseResiduals<T> {
    pub integral: Vec<T>,
    /// `D^{2α}u(t_k) − S(t_k, u_k)`; `None` where the source is undefined.
    pub differential: Vec<Option<T>>,
    pub integral_accumulated: Vec<T>,
    pub source: Vec<Option<T>>,
}

/// Per-node residuals of `u` for both formulations.
pub fn pointwise_residuals<T: Real>(u: &SampledFn<T>, spec: &ProblemSpec<T>) -> Result<PointwiseResiduals<T>> {
    spec.validate()?;
    require_origin(u.grid())?;
    let map = VolterraMap::new(spec, u.grid(), 1)?;
    let mut au = vec![T::zero(); u.len()];
    let mut sweep = Sweep::default();
    map.apply_from(u.values(), 0, &mut au, &mut sweep)?;
    let integral = u.values().iter().zip(&au).map(|(&a, &b)| (a - b).abs()).collect();
    let caputo = caputo_derivative(u, spec.caputo_order())?;
    let times = u.times();
    let mut source = Vec::with_capacity(u.len());
    let mut differential = Vec::with_capacity(u.len());
    for k in 0..u.len() {
        let s = match spec.ratio(times[k], sweep.rates[k], sweep.integral[k]) {
            Ok(s) => Some(s),
            Err(Error::SingularSource { .. }) => None,
            Err(e) => return Err(e),
        };
        source.push(s);
        differential.push(if k == 0 {
            None
        } else {
            s.map(|s| caputo.values()[k] - s)
        });
    }
    Ok(PointwiseResiduals {
        integral,
        differential,
        integral_accumulated: sweep.integral,
        source,
    })
}

/// Integral and differential residuals of `u`.
pub fn residuals<T: Real>(u: &SampledFn<T>, spec: &ProblemSpec<T>) -> Result<Residuals<T>> {
    let pointwise = pointwise_residuals(u, spec)?;
    let integral = pointwise.integral.iter().fold(T::zero(), |m, &x| m.max(x));
    let times = u.times();
    let cut = times[0] + T::lit(INTERIOR_FRACTION) * (times[times.len() - 1] - times[0]);
    let differential = pointwise
        .differential
        .iter()
        .zip(times)
        .filter(|(_, &t)| t >= cut)
        .filter_map(|(d, _)| d.map(|d| d.abs()))
        .fold(T::zero(), |m, x| m.max(x));
    Ok(Residuals { integral, differential })
}
