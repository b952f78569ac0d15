use crate::error::{Error, Result};
use crate::real::Real;

/// Strictly increasing time nodes, at least two of them, starting at t ≥ 0.
///
/// Grids built by [`TimeGrid::uniform`] remember their spacing so the
/// product-integration weights can use a Toeplitz table.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    points: Vec<T>,
    spacing: Option<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if !(points[0] >= T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "first point {} is negative or not a number",
                points[0]
            )));
        }
        for (i, pair) in points.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if !(step > T::zero()) || !step.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "points {i} and {} are not strictly increasing with finite spacing",
                    i + 1
                )));
            }
        }
        Ok(Self { points, spacing: None })
    }

    /// `intervals + 1` equispaced points on `[start, end]`.
    pub fn uniform(start: T, end: T, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidGrid("zero intervals".into()));
        }
        let n = T::from_usize(intervals);
        let len = end - start;
        let mut points: Vec<T> = (0..=intervals).map(|i| start + len * (T::from_usize(i) / n)).collect();
        points[intervals] = end;
        let mut grid = Self::new(points)?;
        grid.spacing = Some(len / n);
        Ok(grid)
    }

    /// Points `start + (end - start)·(j/n)^grading`, clustered near `start`
    /// when `grading > 1`. A grading of exactly 1 yields the uniform grid.
    pub fn graded(start: T, end: T, intervals: usize, grading: T) -> Result<Self> {
        if !(grading >= T::one()) || !grading.is_finite() {
            return Err(Error::InvalidGrid(format!("grading {grading} must be >= 1")));
        }
        if grading == T::one() {
            return Self::uniform(start, end, intervals);
        }
        if intervals == 0 {
            return Err(Error::InvalidGrid("zero intervals".into()));
        }
        let n = T::from_usize(intervals);
        let len = end - start;
        let mut points: Vec<T> = (0..=intervals)
            .map(|i| start + len * (T::from_usize(i) / n).powf(grading))
            .collect();
        points[intervals] = end;
        Self::new(points)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> T {
        self.points[0]
    }

    pub fn end(&self) -> T {
        self.points[self.points.len() - 1]
    }

    /// Spacing of a grid built as uniform.
    pub fn uniform_spacing(&self) -> Option<T> {
        self.spacing
    }

    /// Glues `next` (which must start at this grid's end) onto this grid.
    pub fn concat(&self, next: &TimeGrid<T>) -> Result<Self> {
        if next.start() != self.end() {
            return Err(Error::InvalidGrid(format!(
                "cannot glue a grid starting at {} onto one ending at {}",
                next.start(),
                self.end()
            )));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&next.points[1..]);
        let spacing = match (self.spacing, next.spacing) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        Ok(Self { points, spacing })
    }

    /// Index of the node equal to `t`, if any.
    pub fn index_of(&self, t: T) -> Option<usize> {
        self.points.binary_search_by(|p| p.partial_cmp(&t).unwrap()).ok()
    }
}

/// Values sampled on a [`TimeGrid`]; the discrete carrier for u, I, S and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn<T> {
    grid: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Real> SampledFn<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn constant(grid: TimeGrid<T>, value: T) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn times(&self) -> &[T] {
        self.grid.points()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(
            T::zero(),
            |acc, v| if v.abs() > acc || v.is_nan() { v.abs() } else { acc },
        )
    }

    /// Sup-norm distance to another function on a grid of the same length.
    pub fn sup_distance(&self, other: &SampledFn<T>) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                grid: self.len(),
                values: other.len(),
            });
        }
        Ok(sup_abs_diff(&self.values, &other.values))
    }

    /// Linear interpolation at `t`; `None` outside the grid.
    pub fn interpolate(&self, t: T) -> Option<T> {
        let pts = self.grid.points();
        if t < pts[0] || t > pts[pts.len() - 1] {
            return None;
        }
        let i = pts.partition_point(|&p| p <= t);
        if i == 0 {
            return Some(self.values[0]);
        }
        if i >= pts.len() {
            return Some(self.values[pts.len() - 1]);
        }
        let (t0, t1) = (pts[i - 1], pts[i]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[i - 1] + w * (self.values[i] - self.values[i - 1]))
    }
}

pub(crate) fn sup_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = (x - y).abs();
        if d > acc || d.is_nan() {
            d
        } else {
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_grids() {
        assert!(TimeGrid::new(vec![0.0_f64]).is_err());
        assert!(TimeGrid::new(vec![-1.0_f64, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0_f64, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0_f64, f64::INFINITY]).is_err());
        assert!(TimeGrid::new(vec![0.0_f64, f64::NAN]).is_err());
        assert!(TimeGrid::<f64>::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn uniform_and_graded_hit_both_ends() {
        let g = TimeGrid::uniform(0.5_f64, 0.8, 3).unwrap();
        assert_eq!(g.start(), 0.5);
        assert_eq!(g.end(), 0.8);
        assert!(g.uniform_spacing().is_some());
        let g = TimeGrid::graded(0.0_f64, 2.0, 8, 2.0).unwrap();
        assert_eq!(g.points()[1], 2.0 / 64.0);
        assert_eq!(g.end(), 2.0);
        assert!(g.uniform_spacing().is_none());
    }

    #[test]
    fn concat_requires_shared_endpoint() {
        let a = TimeGrid::uniform(0.0_f64, 1.0, 4).unwrap();
        let b = TimeGrid::uniform(1.0_f64, 2.0, 4).unwrap();
        let c = a.concat(&b).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c.uniform_spacing(), Some(0.25));
        assert!(b.concat(&a).is_err());
    }

    #[test]
    fn sampled_fn_checks_lengths_and_interpolates() {
        let g = TimeGrid::uniform(0.0_f64, 1.0, 2).unwrap();
        assert!(SampledFn::new(g.clone(), vec![1.0]).is_err());
        let f = SampledFn::new(g, vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(f.interpolate(0.25), Some(0.5));
        assert_eq!(f.interpolate(0.75), Some(2.5));
        assert_eq!(f.interpolate(1.0), Some(4.0));
        assert_eq!(f.interpolate(1.5), None);
        assert_eq!(f.sup_norm(), 4.0);
    }
}
