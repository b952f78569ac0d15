//! Constructive form of the generalized Gronwall inequality with weakly
//! singular kernel.
//!
//! Instead of an explicit constant k(α), the majorant is the discrete
//! resolvent solution `m = w + a·K m`, built by iterating from `m = w`.
//! Since the product-integration weights are positive, any `v` satisfying
//! the discrete hypothesis `v ≤ w + a·K v` stays below `m`.

use crate::error::{invalid, Error, Result};
use crate::fracops::{ProductIntegrator, SampledFn};
use crate::real::Real;

/// A node where an inequality of the certificate fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeWitness<T> {
    pub index: usize,
    pub t: T,
    pub lhs: T,
    pub rhs: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisCheck<T> {
    Passed,
    /// `v(t) ≤ w(t) + a∫₀ᵗ v(s)(t − s)^{−exponent} ds` fails here.
    Violated(NodeWitness<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallCertificate<T> {
    pub w: SampledFn<T>,
    pub a: T,
    pub exponent: T,
    pub majorant: SampledFn<T>,
    pub iterations: usize,
    pub hypothesis: HypothesisCheck<T>,
    /// First node where the certified function exceeds the majorant, or the
    /// hypothesis witness when the hypothesis fails.
    pub witness: Option<NodeWitness<T>>,
    pub holds: bool,
}

/// Stopping rule of the majorant iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallOptions<T> {
    /// Stop once a sweep changes m by at most `tol·max(1, ‖m‖_sup)`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for GronwallOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 500,
        }
    }
}

/// Builds the majorant of `v` for forcing `w`, coefficient `a ≥ 0` and
/// kernel `(t − s)^{−exponent}`, and checks `v` against it.
///
/// Fails with [`Error::GronwallDivergent`] when the iteration does not reach
/// `tol` within `max_iter` sweeps; that outcome is distinct from a
/// certificate with `holds == false`.
pub fn gronwall_majorant<T: Real>(
    v: &SampledFn<T>,
    w: &SampledFn<T>,
    a: T,
    exponent: T,
    options: GronwallOptions<T>,
) -> Result<GronwallCertificate<T>> {
    if v.grid() != w.grid() {
        return Err(invalid("w", "v and w must share a grid"));
    }
    if !(a >= T::zero()) || !a.is_finite() {
        return Err(invalid("a", format!("{a} must be finite and nonnegative")));
    }
    if !(exponent > T::zero() && exponent < T::one()) {
        return Err(invalid("exponent", format!("{exponent} outside (0, 1)")));
    }
    if let Some(bad) = w.values().iter().find(|x| !(**x >= T::zero())) {
        return Err(invalid("w", format!("forcing must be nonnegative, found {bad}")));
    }
    if !(options.tol > T::zero()) || options.max_iter == 0 {
        return Err(invalid("tol", "tolerance must be positive and max_iter at least 1"));
    }

    let integrator = ProductIntegrator::new(v.grid(), -exponent)?;
    let t = v.times();
    let n = v.len();
    let span = t[n - 1] - t[0];
    let mass = span.powf(T::one() - exponent) / (T::one() - exponent);
    // Truncating the iteration at `tol` leaves m short of the discrete fixed
    // point by about a·mass·tol relative to the local size of m.
    let size = |x: &[T]| x.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let base_slack = T::lit(10.0) * options.tol * (T::one() + a * mass);
    let slack = |rhs: T| (base_slack + T::lit(1e-12)) * (T::one() + rhs.abs());

    let mut hypothesis = HypothesisCheck::Passed;
    for k in 0..n {
        let rhs = w.values()[k] + a * integrator.integrate(k, v.values());
        let lhs = v.values()[k];
        if !(lhs <= rhs + slack(rhs)) {
            hypothesis = HypothesisCheck::Violated(NodeWitness {
                index: k,
                t: t[k],
                lhs,
                rhs,
            });
            break;
        }
    }

    let mut current = w.values().to_vec();
    let mut next = vec![T::zero(); n];
    let mut iterations = 0;
    let mut increment = T::infinity();
    while iterations < options.max_iter {
        iterations += 1;
        for k in 0..n {
            next[k] = w.values()[k] + a * integrator.integrate(k, &current);
        }
        increment = crate::fracops::sup_abs_diff(&current, &next);
        std::mem::swap(&mut current, &mut next);
        if !increment.is_finite() {
            break;
        }
        if increment <= options.tol * size(&current) {
            break;
        }
    }
    if !(increment <= options.tol * size(&current)) {
        return Err(Error::GronwallDivergent {
            iterations,
            increment: increment.as_f64(),
        });
    }
    let majorant = SampledFn::new(v.grid().clone(), current)?;

    let exceed = (0..n).find_map(|k| {
        let (lhs, rhs) = (v.values()[k], majorant.values()[k]);
        (!(lhs <= rhs + slack(rhs))).then_some(NodeWitness {
            index: k,
            t: t[k],
            lhs,
            rhs,
        })
    });
    let (holds, witness) = match hypothesis {
        HypothesisCheck::Violated(wit) => (false, Some(wit)),
        HypothesisCheck::Passed => (exceed.is_none(), exceed),
    };
    Ok(GronwallCertificate {
        w: w.clone(),
        a,
        exponent,
        majorant,
        iterations,
        hypothesis,
        witness,
        holds,
    })
}
