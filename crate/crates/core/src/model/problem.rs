use crate::error::{invalid, Error, Result};
use crate::fracops::FracOrder;
use crate::model::conductivity::Conductivity;
use crate::model::nonlocal::NonlocalState;
use crate::real::Real;

/// Constants of the growth envelope `c₃ ≤ |f(s, u)| ≤ c₄·|u| + c₅`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants<T> {
    pub c3: T,
    pub c4: T,
    pub c5: T,
}

/// Constants the hypotheses on f are stated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisConstants<T> {
    /// Lower bound of f.
    pub c1: T,
    /// Upper bound of f.
    pub c2: T,
    /// Lipschitz constant of f in u.
    pub lipschitz: T,
    /// Quadratic growth constant: f(s, u) ≤ M·s².
    pub growth_m: T,
    /// Exponent ω ≥ 2 of |f(s,u) − f(s,v)| ≤ s^ω·|u − v|.
    pub omega: T,
    pub growth: Option<GrowthConstants<T>>,
}

impl<T: Real> HypothesisConstants<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |field, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("{x} must be positive")))
            }
        };
        positive("constants.c1", self.c1)?;
        positive("constants.c2", self.c2)?;
        positive("constants.lipschitz", self.lipschitz)?;
        positive("constants.m", self.growth_m)?;
        if self.c1 > self.c2 {
            return Err(invalid(
                "constants.c1",
                format!("c1 = {} exceeds c2 = {}", self.c1, self.c2),
            ));
        }
        if !(self.omega >= T::two()) {
            return Err(invalid("constants.omega", format!("{} must be at least 2", self.omega)));
        }
        if let Some(g) = self.growth {
            positive("constants.c3", g.c3)?;
            if !(g.c4 >= T::zero()) || !(g.c5 >= T::zero()) {
                return Err(invalid("constants.c4", "c4 and c5 must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Where the nonlocal denominator `(δ + I)²` is evaluated inside the
/// Volterra form of the problem.
///
/// `Inner` uses `I(s)` at the integration variable; it is the form whose
/// solutions satisfy the Caputo differential equation. `Outer` freezes
/// `I(t)` at the output time, exactly as the integral equation is usually
/// printed; its fixed points do not satisfy the differential form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorPlacement {
    #[default]
    Inner,
    Outer,
}

/// The fractional nonlocal thermistor initial value problem
/// `D^{2α} u = λ f(t, u) / (δ + ∫₀ᵗ f(x, u(x)) dx)²`, `u(0) = u₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<T> {
    /// Half the Caputo order; must lie in (0, 1/2).
    pub alpha: FracOrder<T>,
    pub lambda: T,
    pub u0: T,
    pub conductivity: Conductivity<T>,
    pub constants: HypothesisConstants<T>,
    /// Denominator regularization δ ≥ 0.
    pub delta: T,
    pub horizon: T,
    pub placement: DenominatorPlacement,
}

impl<T: Real> ProblemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let alpha = self.alpha.value();
        if !(alpha < T::half()) {
            return Err(invalid(
                "alpha",
                format!("{alpha} is outside (0, 0.5): the Caputo order 2*alpha must lie in (0, 1)"),
            ));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(invalid(
                "lambda",
                format!("{} must be a finite nonnegative number", self.lambda),
            ));
        }
        if !self.u0.is_finite() {
            return Err(invalid("u0", "must be finite"));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(invalid("horizon", format!("{} must be positive", self.horizon)));
        }
        if !(self.delta >= T::zero()) || !self.delta.is_finite() {
            return Err(invalid("delta", format!("{} must be nonnegative", self.delta)));
        }
        self.conductivity.validate()?;
        self.constants.validate()?;
        if self.delta == T::zero() && self.conductivity.positive_at_origin(self.u0) {
            return Err(invalid(
                "delta",
                "must be positive when f(0, u0) > 0; otherwise the source is not integrable at t = 0",
            ));
        }
        Ok(())
    }

    /// Regularization used when none is configured: 1 for families with
    /// f(0, u₀) > 0 and for the inner placement (where f/I² behaves like
    /// s⁻⁴ at the origin for f ~ s²), 0 otherwise.
    pub fn default_delta(conductivity: &Conductivity<T>, u0: T, placement: DenominatorPlacement) -> T {
        if conductivity.positive_at_origin(u0) || placement == DenominatorPlacement::Inner {
            T::one()
        } else {
            T::zero()
        }
    }

    /// The Caputo order 2α.
    pub fn caputo_order(&self) -> FracOrder<T> {
        FracOrder::new(T::two() * self.alpha.value()).expect("validated alpha < 1/2")
    }

    /// The exponent 2α − 1 of the Volterra kernel.
    pub fn kernel_exponent(&self) -> T {
        T::two() * self.alpha.value() - T::one()
    }

    /// `λ f(t, u) / (δ + I)²` given the accumulated integral `I`.
    pub fn source_with_integral(&self, t: T, u: T, integral: T) -> Result<T> {
        let f = self.conductivity.eval(t, u)?;
        self.ratio(t, f, integral)
    }

    /// `λ·f / (δ + I)²` for an already evaluated conductivity.
    pub(crate) fn ratio(&self, t: T, f: T, integral: T) -> Result<T> {
        let denom = self.delta + integral;
        if denom == T::zero() {
            if self.lambda == T::zero() {
                return Ok(T::zero());
            }
            return Err(Error::SingularSource { t: t.as_f64() });
        }
        Ok(self.lambda * f / (denom * denom))
    }
}

/// Source term `λ f(t, u_t) / (δ + I(t))²` of the differential form, with
/// `I(t)` read from `state` (interpolated between nodes).
pub fn source_term<T: Real>(spec: &ProblemSpec<T>, t: T, u_t: T, state: &NonlocalState<T>) -> Result<T> {
    let integral = state.at(t).ok_or_else(|| {
        invalid(
            "t",
            format!(
                "{t} is outside the accumulated range [{}, {}]",
                state.start(),
                state.end()
            ),
        )
    })?;
    spec.source_with_integral(t, u_t, integral)
}
