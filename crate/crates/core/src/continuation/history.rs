//! The history term u₁ and the continuation operator K.

use crate::error::{Error, Result};
use crate::fracops::{gamma_fn, row_into, CumulativeTrapezoid, SampledFn};
use crate::model::{DenominatorPlacement, ProblemSpec};
use crate::picard::{prepare_sweep, starting_exponents, Sweep, VolterraMap};
use crate::real::Real;

use super::GlobalSolution;

/// Frozen contribution of `[0, β]` to the Volterra form at times `t > β`.
pub(crate) struct HistoryTerm<'a, T> {
    spec: &'a ProblemSpec<T>,
    times: &'a [T],
    integrand: Vec<T>,
    inv_gamma: T,
}

impl<'a, T: Real> HistoryTerm<'a, T> {
    pub fn new(spec: &'a ProblemSpec<T>, times: &'a [T], values: &[T]) -> Result<Self> {
        let mut sweep = Sweep::default();
        let accumulator = CumulativeTrapezoid::new(times, &starting_exponents(T::two() * spec.alpha.value()))?;
        prepare_sweep(spec, times, &accumulator, values, &mut sweep)?;
        Ok(Self {
            spec,
            times,
            integrand: sweep.integrand,
            inv_gamma: T::one() / gamma_fn(T::two() * spec.alpha.value())?,
        })
    }

    pub fn beta(&self) -> T {
        self.times[self.times.len() - 1]
    }

    /// `u₁(t)` given the accumulated integral `I(t)` (used by the outer
    /// placement only).
    pub fn value(&self, t: T, integral_t: T) -> Result<T> {
        let beta = self.beta();
        if t < beta {
            return Err(Error::BeforeHistory {
                t: t.as_f64(),
                beta: beta.as_f64(),
            });
        }
        let mut w = vec![T::zero(); self.times.len()];
        row_into(self.times, t, self.spec.kernel_exponent(), &mut w);
        let conv = w
            .iter()
            .zip(&self.integrand)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            * self.inv_gamma;
        let increment = match self.spec.placement {
            DenominatorPlacement::Inner => conv,
            DenominatorPlacement::Outer => self.spec.ratio(t, conv, integral_t)?,
        };
        Ok(self.spec.u0 + increment)
    }
}

/// `u₁(t)` for `t ≥ β`: the Volterra form with the integral cut at β.
///
/// Under the outer placement the denominator needs `I(t)`, which depends on
/// the unknown continuation; the solution is continued by its value at β.
pub fn history_term_u1<T: Real>(solution: &GlobalSolution<T>, t: T, spec: &ProblemSpec<T>) -> Result<T> {
    spec.validate()?;
    let history = HistoryTerm::new(spec, solution.grid().points(), solution.values())?;
    let integral_t = match spec.placement {
        DenominatorPlacement::Inner => T::zero(),
        DenominatorPlacement::Outer => {
            let times = solution.grid().points();
            let accumulator = CumulativeTrapezoid::new(times, &starting_exponents(T::two() * spec.alpha.value()))?;
            let mut sweep = Sweep::default();
            prepare_sweep(spec, times, &accumulator, solution.values(), &mut sweep)?;
            let beta = solution.beta();
            let u_beta = solution.values()[solution.values().len() - 1];
            let tail = if t > beta {
                T::half() * (t - beta) * (spec.conductivity.eval(beta, u_beta)? + spec.conductivity.eval(t, u_beta)?)
            } else {
                T::zero()
            };
            sweep.integral[sweep.integral.len() - 1] + tail
        }
    };
    history.value(t, integral_t)
}

/// The continuation operator K on `v` over `[β, β + h]`:
/// `(Kv)(t) = u₁(t) + (1/Γ(2α))∫_β^t (t − s)^{2α−1} S(s) ds`, evaluated on the
/// glued grid so the history and the segment share one quadrature.
///
/// `v` must start at β with `v(β) = u(β)`.
pub fn apply_k<T: Real>(v: &SampledFn<T>, solution: &GlobalSolution<T>, spec: &ProblemSpec<T>) -> Result<SampledFn<T>> {
    spec.validate()?;
    let beta = solution.beta();
    let first = v.first();
    if v.grid().start() != beta {
        return Err(Error::Misaligned {
            beta: beta.as_f64(),
            first: v.grid().start().as_f64(),
        });
    }
    let u_beta = solution.values()[solution.values().len() - 1];
    let tol = T::lit(1e-12) * u_beta.abs().max(T::one());
    if (first - u_beta).abs() > tol {
        return Err(Error::GlueMismatch {
            expected: u_beta.as_f64(),
            found: first.as_f64(),
        });
    }
    let union = solution.grid().concat(v.grid())?;
    let m = solution.grid().len() - 1;
    let map = VolterraMap::new(spec, &union, m + 1)?;
    let mut u = solution.values().to_vec();
    u.extend_from_slice(&v.values()[1..]);
    let mut out = u.clone();
    map.apply_from(&u, m + 1, &mut out, &mut Sweep::default())?;
    SampledFn::new(v.grid().clone(), out[m..].to_vec())
}
