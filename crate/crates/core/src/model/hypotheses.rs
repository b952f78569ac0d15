//! Sampling-based audit of the structural hypotheses on the conductivity.
//!
//! Verdicts are "holds on the sample", never proofs: f is evaluated on a
//! tensor grid refined by its midpoints and every violation carries the
//! witness point.

use crate::error::Result;
use crate::model::problem::ProblemSpec;
use crate::real::Real;

/// Relative slack on every sampled comparison.
const REL_SLACK: f64 = 1e-10;

/// A sampled point where a claimed inequality fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub s: T,
    pub u: T,
    /// Second temperature for the two-point (Lipschitz-type) conditions.
    pub v: Option<T>,
    pub observed: T,
    pub bound: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict<T> {
    HoldsOnSample,
    Violated(Witness<T>),
}

impl<T> Verdict<T> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnSample)
    }
}

/// Which hypotheses to audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisSet {
    /// c₁ ≤ f ≤ c₂ and Lipschitz in u with constant L_f.
    pub h1: bool,
    /// f(s, u) ≤ M·s².
    pub h2: bool,
    /// |f(s,u) − f(s,v)| ≤ s^ω·|u − v|.
    pub h3: bool,
    /// c₃ ≤ |f| ≤ c₄·|u| + c₅ (skipped when the growth constants are absent).
    pub growth: bool,
}

impl HypothesisSet {
    pub const ALL: Self = Self {
        h1: true,
        h2: true,
        h3: true,
        growth: true,
    };

    pub const NONE: Self = Self {
        h1: false,
        h2: false,
        h3: false,
        growth: false,
    };
}

impl Default for HypothesisSet {
    fn default() -> Self {
        Self::ALL
    }
}

/// The range `s < sqrt(c₁/M)` where c₁ ≤ f and f ≤ M·s² cannot both hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InconsistencyWindow<T> {
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    pub h1: Option<Verdict<T>>,
    pub h2: Option<Verdict<T>>,
    /// H2 with the regularized denominator: f(s, u) ≤ M·(s + δ/c₁)², the
    /// form under which the local estimates survive when δ > 0.
    pub h2_regularized: Option<Verdict<T>>,
    pub h3: Option<Verdict<T>>,
    pub growth: Option<Verdict<T>>,
    pub inconsistency_window: Option<InconsistencyWindow<T>>,
    /// Number of (s, u) points sampled.
    pub points: usize,
}

impl<T> HypothesisReport<T> {
    /// All audited hypotheses hold on the sample.
    pub fn all_hold(&self) -> bool {
        [&self.h1, &self.h2, &self.h3, &self.growth]
            .into_iter()
            .flatten()
            .all(Verdict::holds)
    }

    /// H1 and the regularized H2 both hold, the premise of the local estimates.
    pub fn local_estimates_hold(&self) -> bool {
        let h2 = self.h2_regularized.as_ref().or(self.h2.as_ref());
        matches!((&self.h1, h2), (Some(a), Some(b)) if a.holds() && b.holds())
    }
}

/// `samples` equispaced nodes on `[lo, hi]` plus their midpoints.
fn refined_axis<T: Real>(lo: T, hi: T, samples: usize) -> Vec<T> {
    let n = samples.max(2);
    let cells = T::from_usize(2 * (n - 1));
    (0..2 * n - 1)
        .map(|i| lo + (hi - lo) * (T::from_usize(i) / cells))
        .collect()
}

fn within<T: Real>(observed: T, bound: T) -> bool {
    observed <= bound + T::lit(REL_SLACK) * bound.abs().max(T::one())
}

/// Tracks the first violation seen in scan order.
struct Audit<T> {
    active: bool,
    first: Option<Witness<T>>,
}

impl<T: Real> Audit<T> {
    fn new(active: bool) -> Self {
        Self { active, first: None }
    }

    fn check(&mut self, observed: T, bound: T, s: T, u: T, v: Option<T>) {
        if self.active && self.first.is_none() && !within(observed, bound) {
            self.first = Some(Witness {
                s,
                u,
                v,
                observed,
                bound,
            });
        }
    }

    fn check_lower(&mut self, observed: T, bound: T, s: T, u: T) {
        if self.active && self.first.is_none() && !within(bound, observed) {
            self.first = Some(Witness {
                s,
                u,
                v: None,
                observed,
                bound,
            });
        }
    }

    fn verdict(self) -> Option<Verdict<T>> {
        self.active
            .then(|| self.first.map_or(Verdict::HoldsOnSample, Verdict::Violated))
    }
}

/// Audits the requested hypotheses for `spec.conductivity` on
/// `s_range × u_range`, with `samples` nodes per axis before refinement.
pub fn validate_hypotheses<T: Real>(
    spec: &ProblemSpec<T>,
    s_range: (T, T),
    u_range: (T, T),
    samples: usize,
    checks: HypothesisSet,
) -> Result<HypothesisReport<T>> {
    let k = &spec.constants;
    let f = &spec.conductivity;
    let s_axis = refined_axis(s_range.0, s_range.1, samples);
    let u_axis = refined_axis(u_range.0, u_range.1, samples);

    let regularize = checks.h2 && spec.delta > T::zero();
    let mut h1 = Audit::new(checks.h1);
    let mut h2 = Audit::new(checks.h2);
    let mut h2_reg = Audit::new(regularize);
    let mut h3 = Audit::new(checks.h3);
    let mut growth = Audit::new(checks.growth && k.growth.is_some());
    let shift = if regularize { spec.delta / k.c1 } else { T::zero() };

    let mut row = vec![T::zero(); u_axis.len()];
    for &s in &s_axis {
        for (slot, &u) in row.iter_mut().zip(&u_axis) {
            *slot = f.eval(s, u)?;
        }
        let s_pow = s.powf(k.omega);
        for (j, (&u, &fv)) in u_axis.iter().zip(&row).enumerate() {
            h1.check_lower(fv, k.c1, s, u);
            h1.check(fv, k.c2, s, u, None);
            h2.check(fv, k.growth_m * s * s, s, u, None);
            h2_reg.check(fv, k.growth_m * (s + shift) * (s + shift), s, u, None);
            if let Some(g) = k.growth {
                growth.check_lower(fv.abs(), g.c3, s, u);
                growth.check(fv.abs(), g.c4 * u.abs() + g.c5, s, u, None);
            }
            if j + 1 < u_axis.len() {
                let (v, fw) = (u_axis[j + 1], row[j + 1]);
                let du = v - u;
                let df = (fw - fv).abs();
                h1.check(df / du, k.lipschitz, s, u, Some(v));
                h3.check(df, s_pow * du, s, u, Some(v));
            }
        }
    }

    let inconsistency_window = if checks.h1 && checks.h2 {
        let upper = (k.c1 / k.growth_m).sqrt();
        (s_range.0 < upper).then_some(InconsistencyWindow { upper })
    } else {
        None
    };

    Ok(HypothesisReport {
        h1: h1.verdict(),
        h2: h2.verdict(),
        h2_regularized: h2_reg.verdict(),
        h3: h3.verdict(),
        growth: growth.verdict(),
        inconsistency_window,
        points: s_axis.len() * u_axis.len(),
    })
}
