//! Product-integration weights for the weakly singular kernel (t − s)^μ, μ ∈ (−1, 0).
//!
//! The smooth factor is replaced by its piecewise-linear interpolant on the
//! grid and each cell is integrated against the kernel in closed form, so
//! the rule is exact for piecewise-linear data on any grid.

use crate::error::{Error, Result};
use crate::fracops::gamma::gamma_fn;
use crate::fracops::grid::TimeGrid;
use crate::real::Real;

/// Dense rows are cached up to this many grid points; larger nonuniform grids
/// recompute rows on demand.
const MAX_CACHED_POINTS: usize = 4096;

/// Weights `w_j` with `Σ_j w_j v_j = ∫_{t_0}^{t_k} (t_k − s)^μ v̂(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadWeights<T> {
    pub target_index: usize,
    pub weights: Vec<T>,
    pub kernel_exponent: T,
}

pub(crate) fn check_exponent<T: Real>(mu: T) -> Result<()> {
    if mu > -T::one() && mu < T::zero() {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(mu.as_f64()))
    }
}

/// Writes into `out[..points.len()]` the weights for ∫ from `points[0]` to
/// `points[last]` of `(target − s)^μ v̂(s) ds`, with `target ≥ points[last]`.
pub(crate) fn row_into<T: Real>(points: &[T], target: T, mu: T, out: &mut [T]) {
    let n = points.len();
    let p = mu + T::one();
    let q = p + T::one();
    out[..n].iter_mut().for_each(|w| *w = T::zero());
    // moments of cell j: ((far^p − near^p)/p, (far^q − near^q)/q)
    let mut far = target - points[0];
    let mut far_p = far.powf(p);
    for j in 0..n - 1 {
        let near = target - points[j + 1];
        let near_p = near.powf(p);
        let width = points[j + 1] - points[j];
        let m0 = (far_p - near_p) / p;
        let m1 = (far_p * far - near_p * near) / q;
        out[j] = out[j] + (m1 - near * m0) / width;
        out[j + 1] = out[j + 1] + (far * m0 - m1) / width;
        far = near;
        far_p = near_p;
    }
}

/// Closed-form product-integration weights on `grid` for the node `target_index`.
pub fn singular_weights<T: Real>(
    grid: &TimeGrid<T>,
    target_index: usize,
    kernel_exponent: T,
) -> Result<QuadWeights<T>> {
    check_exponent(kernel_exponent)?;
    if target_index == 0 || target_index >= grid.len() {
        return Err(Error::IndexOutOfRange {
            index: target_index,
            len: grid.len(),
        });
    }
    let pts = grid.points();
    let mut weights = vec![T::zero(); grid.len()];
    row_into(&pts[..=target_index], pts[target_index], kernel_exponent, &mut weights);
    Ok(QuadWeights {
        target_index,
        weights,
        kernel_exponent,
    })
}

#[derive(Debug, Clone)]
enum Table<T> {
    /// Uniform spacing: weights depend on `k − j` only.
    Toeplitz {
        scale: T,
        /// `first[m]`: weight of node `k − m` from the cell to its right only.
        first: Vec<T>,
        /// `interior[m]`: weight of an interior node at distance `m`.
        interior: Vec<T>,
        last: T,
    },
    Rows(Vec<Vec<T>>),
    OnDemand,
}

/// Applies the product-integration rule at every node of a fixed grid.
///
/// Rows are only built for targets `k >= first_target`, which lets a
/// continuation segment reuse the full history grid without paying for rows
/// it never evaluates.
#[derive(Debug, Clone)]
pub struct ProductIntegrator<T> {
    points: Vec<T>,
    mu: T,
    first_target: usize,
    table: Table<T>,
    /// Starting weights per row `k ≥ first_target`, applied at nodes `0..`.
    corrections: Vec<Vec<T>>,
}

impl<T: Real> ProductIntegrator<T> {
    pub fn new(grid: &TimeGrid<T>, kernel_exponent: T) -> Result<Self> {
        Self::with_first_target(grid, kernel_exponent, 1)
    }

    pub fn with_first_target(grid: &TimeGrid<T>, kernel_exponent: T, first_target: usize) -> Result<Self> {
        check_exponent(kernel_exponent)?;
        let first_target = first_target.max(1);
        if first_target >= grid.len() {
            return Err(Error::IndexOutOfRange {
                index: first_target,
                len: grid.len(),
            });
        }
        let points = grid.points().to_vec();
        let mu = kernel_exponent;
        let table = if let Some(h) = grid.uniform_spacing() {
            toeplitz(h, points.len(), mu)
        } else if (points.len() - first_target) * points.len() <= MAX_CACHED_POINTS * MAX_CACHED_POINTS / 2 {
            let rows = (first_target..points.len())
                .map(|k| {
                    let mut row = vec![T::zero(); k + 1];
                    row_into(&points[..=k], points[k], mu, &mut row);
                    row
                })
                .collect();
            Table::Rows(rows)
        } else {
            Table::OnDemand
        };
        Ok(Self {
            points,
            mu,
            first_target,
            table,
            corrections: Vec::new(),
        })
    }

    /// Adds starting weights at the first nodes of every row so that the
    /// rule also integrates `(s − t₀)^σ` exactly for each given σ.
    ///
    /// With `m` distinct exponents in `{0, 1} ∪ exponents`, every row gets
    /// weights at nodes `0..m`, so rows `k < m − 1` use values past `t_k`.
    pub fn with_corrections(mut self, exponents: &[T]) -> Result<Self> {
        self.corrections.clear();
        let all = exponent_set(exponents)?;
        if all.is_empty() {
            return Ok(self);
        }
        let t0 = self.points[0];
        let powers: Vec<Vec<T>> = all
            .iter()
            .map(|&sigma| self.points.iter().map(|&t| (t - t0).powf(sigma)).collect())
            .collect();
        self.corrections = starting_weights(&self.points, self.mu, self.first_target, &all, |k, l| {
            self.integrate_plain(k, &powers[l])
        })?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kernel_exponent(&self) -> T {
        self.mu
    }

    /// `Σ_{j ≤ k} w_j^{(k)} values[j]`, including starting weights if any;
    /// zero at `k = 0`.
    pub fn integrate(&self, k: usize, values: &[T]) -> T {
        let plain = self.integrate_plain(k, values);
        match self.corrections.get(k.wrapping_sub(self.first_target)) {
            Some(c) if k > 0 => c.iter().zip(values).fold(plain, |acc, (&w, &v)| acc + w * v),
            _ => plain,
        }
    }

    fn integrate_plain(&self, k: usize, values: &[T]) -> T {
        if k == 0 {
            return T::zero();
        }
        debug_assert!(k >= self.first_target, "row {k} was not tabulated");
        match &self.table {
            Table::Toeplitz {
                scale,
                first,
                interior,
                last,
            } => {
                let mut acc = first[k] * values[0] + *last * values[k];
                for j in 1..k {
                    acc = acc + interior[k - j] * values[j];
                }
                *scale * acc
            }
            Table::Rows(rows) => {
                let row = &rows[k - self.first_target];
                row.iter().zip(values).fold(T::zero(), |acc, (&w, &v)| acc + w * v)
            }
            Table::OnDemand => {
                let mut row = vec![T::zero(); k + 1];
                row_into(&self.points[..=k], self.points[k], self.mu, &mut row);
                row.iter().zip(values).fold(T::zero(), |acc, (&w, &v)| acc + w * v)
            }
        }
    }
}

/// `{0, 1} ∪ exponents`, sorted and deduplicated; empty when `exponents` is.
fn exponent_set<T: Real>(exponents: &[T]) -> Result<Vec<T>> {
    if exponents.is_empty() {
        return Ok(Vec::new());
    }
    let mut all = vec![T::zero(), T::one()];
    for &sigma in exponents {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::ExponentOutOfRange(sigma.as_f64()));
        }
        if !all.iter().any(|&x| (x - sigma).abs() <= T::epsilon()) {
            all.push(sigma);
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite exponents"));
    Ok(all)
}

/// Starting weights for rows `first_target..` of a rule for
/// `∫_{t₀}^{t_k} (t_k − s)^μ v(s) ds` whose plain value on `(s − t₀)^{σ_l}` is
/// `plain(k, l)`: every row gets weights at nodes `0..m`, `m = all.len()`,
/// making it exact for all exponents. Exactness for 0 and 1 (already exact
/// for the plain rule) is imposed too, so the corrections do not disturb it.
///
/// Rows `k < m − 1` therefore see nodes past `t_k`; only the first few nodes
/// after `t₀` are coupled that way. Grids with fewer than `m` nodes use the
/// smallest exponents that fit.
fn starting_weights<T: Real>(
    points: &[T],
    mu: T,
    first_target: usize,
    all: &[T],
    plain: impl Fn(usize, usize) -> T,
) -> Result<Vec<Vec<T>>> {
    let t0 = points[0];
    let p = mu + T::one();
    let mut moments = Vec::with_capacity(all.len());
    for &sigma in all {
        // ∫₀^τ (τ − s)^μ s^σ ds = B(μ+1, σ+1)·τ^{μ+σ+1}
        moments.push(gamma_fn(p)? * gamma_fn(sigma + T::one())? / gamma_fn(p + sigma + T::one())?);
    }
    let mut rows = Vec::with_capacity(points.len().saturating_sub(first_target));
    let m = all.len().min(points.len());
    for k in first_target..points.len() {
        let tau = points[k] - t0;
        let mut matrix = vec![vec![T::zero(); m]; m];
        let mut rhs = vec![T::zero(); m];
        for l in 0..m {
            rhs[l] = moments[l] * tau.powf(p + all[l]) - plain(k, l);
            for (i, entry) in matrix[l].iter_mut().enumerate() {
                *entry = (points[i] - t0).powf(all[l]);
            }
        }
        rows.push(solve_dense(matrix, rhs));
    }
    Ok(rows)
}

/// Cumulative trapezoid rule `∫_{t₀}^{t_k} v(s) ds` on a fixed grid, with
/// optional starting weights as in [`ProductIntegrator::with_corrections`].
#[derive(Debug, Clone)]
pub(crate) struct CumulativeTrapezoid<T> {
    points: Vec<T>,
    corrections: Vec<Vec<T>>,
}

impl<T: Real> CumulativeTrapezoid<T> {
    pub fn new(points: &[T], exponents: &[T]) -> Result<Self> {
        let all = exponent_set(exponents)?;
        let mut rule = Self {
            points: points.to_vec(),
            corrections: Vec::new(),
        };
        if !all.is_empty() && points.len() > 1 {
            let t0 = points[0];
            let sums: Vec<Vec<T>> = all
                .iter()
                .map(|&sigma| {
                    let v: Vec<T> = points.iter().map(|&t| (t - t0).powf(sigma)).collect();
                    let mut out = vec![T::zero(); v.len()];
                    rule.accumulate_plain(&v, &mut out);
                    out
                })
                .collect();
            rule.corrections = starting_weights(points, T::zero(), 1, &all, |k, l| sums[l][k])?;
        }
        Ok(rule)
    }

    fn accumulate_plain(&self, values: &[T], out: &mut [T]) {
        out[0] = T::zero();
        for k in 1..self.points.len() {
            let dt = self.points[k] - self.points[k - 1];
            out[k] = out[k - 1] + T::half() * dt * (values[k - 1] + values[k]);
        }
    }

    /// Writes `∫_{t₀}^{t_k} v` into `out[k]` for every node.
    pub fn accumulate(&self, values: &[T], out: &mut [T]) {
        self.accumulate_plain(values, out);
        for (k, c) in self.corrections.iter().enumerate() {
            out[k + 1] = c.iter().zip(values).fold(out[k + 1], |acc, (&w, &v)| acc + w * v);
        }
    }
}

/// Gaussian elimination with partial pivoting for the small starting-weight
/// systems.
fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Vec<T> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] = a[row][c] - factor * a[col][c];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail = (row + 1..n).fold(T::zero(), |acc, c| acc + a[row][c] * x[c]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

fn toeplitz<T: Real>(h: T, len: usize, mu: T) -> Table<T> {
    let p = mu + T::one();
    let q = p + T::one();
    // left[m], right[m]: unit-spacing cell weights for a cell whose far end
    // is m steps from the target.
    let mut left = vec![T::zero(); len + 1];
    let mut right = vec![T::zero(); len + 1];
    for m in 1..=len {
        let (hi, lo) = (T::from_usize(m), T::from_usize(m - 1));
        let dp = (hi.powf(p) - lo.powf(p)) / p;
        let dq = (hi.powf(q) - lo.powf(q)) / q;
        left[m] = dq - lo * dp;
        right[m] = hi * dp - dq;
    }
    let mut interior = vec![T::zero(); len];
    for m in 1..len {
        interior[m] = left[m] + right[m + 1];
    }
    left.truncate(len);
    Table::Toeplitz {
        scale: h.powf(p),
        first: left,
        interior,
        last: right[1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(w: &QuadWeights<f64>) -> f64 {
        w.weights.iter().sum()
    }

    #[test]
    fn constant_data_integrates_to_the_kernel_mass() {
        let mu = -0.5;
        let grid = TimeGrid::new(vec![0.0, 0.1, 0.25, 0.7, 1.0, 1.6]).unwrap();
        for k in 1..grid.len() {
            let w = singular_weights(&grid, k, mu).unwrap();
            let t: f64 = grid.points()[k];
            let exact = t.powf(mu + 1.0) / (mu + 1.0);
            assert!((mass(&w) - exact).abs() < 1e-14 * exact.max(1.0));
            assert!(w.weights[k + 1..].iter().all(|&x| x == 0.0));
            assert!(w.weights[..=k].iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn rejects_bad_exponent_and_index() {
        let grid = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            singular_weights(&grid, 0, -0.5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            singular_weights(&grid, 5, -0.5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            singular_weights(&grid, 2, 0.0),
            Err(Error::ExponentOutOfRange(_))
        ));
        assert!(matches!(
            singular_weights(&grid, 2, -1.0),
            Err(Error::ExponentOutOfRange(_))
        ));
    }

    #[test]
    fn toeplitz_table_matches_direct_rows() {
        let grid = TimeGrid::uniform(0.0, 2.0, 40).unwrap();
        let mu = -0.3;
        let integrator = ProductIntegrator::new(&grid, mu).unwrap();
        let values: Vec<f64> = grid.points().iter().map(|&t: &f64| (3.0 * t).sin() + 1.0).collect();
        for k in 1..grid.len() {
            let w = singular_weights(&grid, k, mu).unwrap();
            let direct: f64 = w.weights.iter().zip(&values).map(|(a, b)| a * b).sum();
            let fast = integrator.integrate(k, &values);
            assert!((direct - fast).abs() < 1e-13, "k = {k}: {direct} vs {fast}");
        }
    }

    #[test]
    fn history_rows_extend_past_the_last_node() {
        // ∫_0^1 (1.5 − s)^μ ds for constant data
        let grid = TimeGrid::new(vec![0.0, 0.3, 1.0]).unwrap();
        let mu = -0.5_f64;
        let mut row = vec![0.0; 3];
        row_into(grid.points(), 1.5, mu, &mut row);
        let exact = (1.5_f64.powf(0.5) - 0.5_f64.powf(0.5)) / 0.5;
        assert!((row.iter().sum::<f64>() - exact).abs() < 1e-14);
    }

    #[test]
    fn starting_weights_make_fractional_powers_exact() {
        let grid = TimeGrid::uniform(0.0, 1.0, 50).unwrap();
        let mu = -0.5;
        let rule = ProductIntegrator::new(&grid, mu)
            .unwrap()
            .with_corrections(&[0.5, 1.5])
            .unwrap();
        for sigma in [0.0, 0.5, 1.0, 1.5] {
            let v: Vec<f64> = grid.points().iter().map(|&s: &f64| s.powf(sigma)).collect();
            // B(1/2, σ+1) t^{σ+1/2}
            let b = crate::fracops::gamma_fn(0.5).unwrap() * crate::fracops::gamma_fn(sigma + 1.0).unwrap()
                / crate::fracops::gamma_fn(sigma + 1.5).unwrap();
            for k in [1, 2, 3, 7, 50] {
                let exact = b * grid.points()[k].powf(sigma + 0.5);
                assert!((rule.integrate(k, &v) - exact).abs() < 1e-13, "σ = {sigma}, k = {k}");
            }
        }
        let empty = ProductIntegrator::new(&grid, mu)
            .unwrap()
            .with_corrections(&[])
            .unwrap();
        assert!(empty.corrections.is_empty());
        assert!(ProductIntegrator::new(&grid, mu)
            .unwrap()
            .with_corrections(&[-0.5])
            .is_err());
    }

    #[test]
    fn corrected_trapezoid_is_exact_for_square_roots() {
        let points: Vec<f64> = TimeGrid::uniform(0.0, 2.0, 30).unwrap().points().to_vec();
        let rule = CumulativeTrapezoid::new(&points, &[0.5]).unwrap();
        let v: Vec<f64> = points.iter().map(|s| s.sqrt()).collect();
        let mut out = vec![0.0; v.len()];
        rule.accumulate(&v, &mut out);
        for (k, &t) in points.iter().enumerate() {
            assert!((out[k] - 2.0 / 3.0 * t.powf(1.5)).abs() < 1e-14, "k = {k}");
        }
        let plain = CumulativeTrapezoid::new(&points, &[]).unwrap();
        let ones = vec![1.0; v.len()];
        plain.accumulate(&ones, &mut out);
        assert_eq!(out[30], 2.0);
    }
}
