use crate::error::{Error, Result};
use crate::fracops::gamma::gamma_fn;
use crate::fracops::grid::SampledFn;
use crate::fracops::weights::ProductIntegrator;
use crate::real::Real;

/// A fractional order in the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder<T>(T);

impl<T: Real> FracOrder<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value < T::one() {
            Ok(Self(value))
        } else {
            Err(Error::OrderOutOfRange(value.as_f64()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Riemann–Liouville integral of order `order` with lower terminal at the
/// first grid point, by product integration of the piecewise-linear
/// interpolant. The value at the first node is zero.
pub fn rl_integral<T: Real>(g: &SampledFn<T>, order: FracOrder<T>) -> Result<SampledFn<T>> {
    let alpha = order.value();
    let integrator = ProductIntegrator::new(g.grid(), alpha - T::one())?;
    let norm = gamma_fn(alpha)?;
    let values = (0..g.len())
        .map(|k| integrator.integrate(k, g.values()) / norm)
        .collect();
    SampledFn::new(g.grid().clone(), values)
}

/// L1 discretization of the Caputo derivative of order `order` ∈ (0, 1).
///
/// `g'` is replaced by cell difference quotients, so a constant `g` gives an
/// output of exact zeros. The value at the first node is zero.
pub fn caputo_derivative<T: Real>(g: &SampledFn<T>, order: FracOrder<T>) -> Result<SampledFn<T>> {
    let gamma = order.value();
    let n = g.len();
    if n < 2 {
        return Err(Error::InvalidGrid("Caputo derivative needs at least 2 points".into()));
    }
    let mut out = vec![T::zero(); n];
    caputo_rows(g.times(), g.values(), gamma, g.grid().uniform_spacing(), 1, &mut out)?;
    SampledFn::new(g.grid().clone(), out)
}

/// L1 Caputo values at nodes `from..` of `(t, v)`, written into `out[from..]`.
pub(crate) fn caputo_rows<T: Real>(
    t: &[T],
    v: &[T],
    gamma: T,
    uniform_spacing: Option<T>,
    from: usize,
    out: &mut [T],
) -> Result<()> {
    let n = t.len();
    let p = T::one() - gamma;
    let norm = gamma_fn(T::two() - gamma)?;
    if let Some(h) = uniform_spacing {
        let b: Vec<T> = (0..n)
            .map(|m| {
                if m == 0 {
                    T::zero()
                } else {
                    T::from_usize(m).powf(p) - T::from_usize(m - 1).powf(p)
                }
            })
            .collect();
        let scale = h.powf(-gamma) / norm;
        for k in from.max(1)..n {
            let mut acc = T::zero();
            for j in 0..k {
                acc = acc + b[k - j] * (v[j + 1] - v[j]);
            }
            out[k] = scale * acc;
        }
    } else {
        for k in from.max(1)..n {
            let mut acc = T::zero();
            for j in 0..k {
                let slope = (v[j + 1] - v[j]) / (t[j + 1] - t[j]);
                acc = acc + slope * ((t[k] - t[j]).powf(p) - (t[k] - t[j + 1]).powf(p));
            }
            out[k] = acc / norm;
        }
    }
    Ok(())
}

/// Riemann–Liouville derivative, d/dt of the order-(1 − γ) integral taken by
/// backward differences. Diagnostic only; the first node copies the second.
pub fn rl_derivative<T: Real>(g: &SampledFn<T>, order: FracOrder<T>) -> Result<SampledFn<T>> {
    let complement = FracOrder::new(T::one() - order.value())?;
    let integral = rl_integral(g, complement)?;
    let t = g.times();
    let j = integral.values();
    let mut out = vec![T::zero(); g.len()];
    for k in 1..g.len() {
        out[k] = (j[k] - j[k - 1]) / (t[k] - t[k - 1]);
    }
    out[0] = out[1];
    SampledFn::new(g.grid().clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::grid::TimeGrid;

    fn order(x: f64) -> FracOrder<f64> {
        FracOrder::new(x).unwrap()
    }

    #[test]
    fn order_bounds() {
        assert!(FracOrder::new(0.0_f64).is_err());
        assert!(FracOrder::new(1.0_f64).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert_eq!(order(0.3).value(), 0.3);
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = TimeGrid::uniform(0.0, 1.0, 16).unwrap();
        let zero = SampledFn::constant(grid, 0.0);
        assert!(rl_integral(&zero, order(0.5))
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_constant_is_bit_exact_zero_on_any_grid() {
        for grid in [
            TimeGrid::uniform(0.0, 1.0, 33).unwrap(),
            TimeGrid::graded(0.0, 3.0, 17, 2.5).unwrap(),
        ] {
            let seven = SampledFn::constant(grid, 7.0);
            let d = caputo_derivative(&seven, order(0.5)).unwrap();
            assert!(d.values().iter().all(|&v| v == 0.0 && v.is_sign_positive()));
        }
    }

    #[test]
    fn caputo_of_linear_is_exact() {
        // D^γ t = t^{1−γ}/Γ(2−γ); L1 is exact for piecewise-linear data.
        let grid = TimeGrid::graded(0.0, 1.0, 20, 1.7).unwrap();
        let g = SampledFn::from_fn(grid, |t| t);
        let d = caputo_derivative(&g, order(0.5)).unwrap();
        let want = std::f64::consts::FRAC_2_SQRT_PI;
        assert!((d.last() - want).abs() < 1e-13);
    }

    #[test]
    fn rl_derivative_of_constant_is_not_zero() {
        // D^γ_RL 1 = t^{−γ}/Γ(1−γ)
        let grid = TimeGrid::uniform(0.0, 1.0, 2000).unwrap();
        let one = SampledFn::constant(grid, 1.0);
        let d = rl_derivative(&one, order(0.5)).unwrap();
        let want = 1.0 / std::f64::consts::PI.sqrt();
        assert!((d.last() - want).abs() < 1e-3, "{}", d.last());
    }
}
