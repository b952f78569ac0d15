use crate::error::Result;
use crate::fracops::{SampledFn, TimeGrid};
use crate::model::conductivity::Conductivity;
use crate::real::Real;

/// Running trapezoid accumulation of `I(t) = ∫₀ᵗ f(x, u(x)) dx`.
///
/// Each [`NonlocalState::push`] extends the integral by one cell; nothing is
/// recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalState<T> {
    times: Vec<T>,
    integral: Vec<T>,
    last_rate: T,
}

impl<T: Real> NonlocalState<T> {
    /// Empty history at `t0` with integrand value `rate` there.
    pub fn new(t0: T, rate: T) -> Self {
        Self {
            times: vec![t0],
            integral: vec![T::zero()],
            last_rate: rate,
        }
    }

    /// Appends the node `t` with integrand value `rate`.
    pub fn push(&mut self, t: T, rate: T) {
        let last = self.integral.len() - 1;
        let dt = t - self.times[last];
        let next = self.integral[last] + T::half() * dt * (self.last_rate + rate);
        self.times.push(t);
        self.integral.push(next);
        self.last_rate = rate;
    }

    pub fn last_index(&self) -> usize {
        self.integral.len() - 1
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        self.times[self.times.len() - 1]
    }

    pub fn values(&self) -> &[T] {
        &self.integral
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn last_rate(&self) -> T {
        self.last_rate
    }

    /// I(t), linearly interpolated between nodes; `None` outside the history.
    pub fn at(&self, t: T) -> Option<T> {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let i = self.times.partition_point(|&p| p <= t);
        if i >= n {
            return Some(self.integral[n - 1]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        Some(self.integral[i - 1] + w * (self.integral[i] - self.integral[i - 1]))
    }

    pub fn to_sampled(&self) -> Result<SampledFn<T>> {
        SampledFn::new(TimeGrid::new(self.times.clone())?, self.integral.clone())
    }
}

/// Trapezoid accumulation of `f(s, u(s))` along `u`.
pub fn accumulate<T: Real>(f: &Conductivity<T>, u: &SampledFn<T>) -> Result<NonlocalState<T>> {
    let t = u.times();
    let v = u.values();
    let mut state = NonlocalState::new(t[0], f.eval(t[0], v[0])?);
    for k in 1..t.len() {
        state.push(t[k], f.eval(t[k], v[k])?);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rate_is_exact() {
        let grid = TimeGrid::graded(0.0_f64, 3.0, 7, 2.0).unwrap();
        let u = SampledFn::from_fn(grid, |t| t.sin());
        let state = accumulate(&Conductivity::Constant { value: 2.0 }, &u).unwrap();
        assert_eq!(state.values()[0], 0.0);
        assert!((state.values()[state.last_index()] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_rate_converges_to_cube() {
        let f = Conductivity::QuadraticTime {
            scale: 1.0,
            amplitude: 0.0,
        };
        let mut errs = Vec::new();
        for n in [100, 200] {
            let u = SampledFn::constant(TimeGrid::uniform(0.0_f64, 1.0, n).unwrap(), 0.0);
            let state = accumulate(&f, &u).unwrap();
            errs.push((state.values()[n] - 1.0 / 3.0).abs());
        }
        // trapezoid error for s² on [0,1] is h²/6
        assert!((errs[0] - 1e-4 / 6.0).abs() < 1e-12);
        assert!((errs[0] / errs[1] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn push_extends_incrementally() {
        let mut state = NonlocalState::new(0.0, 1.0);
        state.push(1.0, 3.0);
        assert_eq!(state.values(), &[0.0, 2.0]);
        state.push(2.0, 1.0);
        assert_eq!(state.values(), &[0.0, 2.0, 4.0]);
        assert_eq!(state.at(1.5), Some(3.0));
        assert_eq!(state.at(2.5), None);
    }
}
