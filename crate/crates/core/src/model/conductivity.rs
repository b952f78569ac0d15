use crate::error::{invalid, Result};
use crate::model::table::ConductivityTable;
use crate::real::Real;

/// Electrical conductivity f(s, u) as a function of time and temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum Conductivity<T> {
    /// f = c
    Constant {
        value: T,
    },
    /// f = c + ε·sin²(u)
    BoundedOscillatory {
        base: T,
        amplitude: T,
    },
    /// f = a·s²·(1 + ε·sin²(u))
    QuadraticTime {
        scale: T,
        amplitude: T,
    },
    /// f = min(c₃ + c₄·|u|, cap)
    AffineGrowth {
        floor: T,
        slope: T,
        cap: T,
    },
    Table(ConductivityTable<T>),
}

impl<T: Real> Conductivity<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |field: &'static str, x: T| {
            if x >= T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("{x} must be a finite nonnegative number")))
            }
        };
        match *self {
            Self::Constant { value } => nonneg("conductivity.value", value),
            Self::BoundedOscillatory { base, amplitude } => {
                nonneg("conductivity.base", base)?;
                nonneg("conductivity.amplitude", amplitude)
            }
            Self::QuadraticTime { scale, amplitude } => {
                nonneg("conductivity.scale", scale)?;
                nonneg("conductivity.amplitude", amplitude)
            }
            Self::AffineGrowth { floor, slope, cap } => {
                nonneg("conductivity.floor", floor)?;
                nonneg("conductivity.slope", slope)?;
                nonneg("conductivity.cap", cap)?;
                if cap < floor {
                    return Err(invalid("conductivity.cap", format!("{cap} is below the floor {floor}")));
                }
                Ok(())
            }
            Self::Table(_) => Ok(()),
        }
    }

    /// f(s, u); fails only for table queries outside the tabulated rectangle.
    pub fn eval(&self, s: T, u: T) -> Result<T> {
        let sin2 = |u: T| {
            let x = u.sin();
            x * x
        };
        Ok(match self {
            Self::Constant { value } => *value,
            Self::BoundedOscillatory { base, amplitude } => *base + *amplitude * sin2(u),
            Self::QuadraticTime { scale, amplitude } => *scale * s * s * (T::one() + *amplitude * sin2(u)),
            Self::AffineGrowth { floor, slope, cap } => (*floor + *slope * u.abs()).min(*cap),
            Self::Table(table) => table.eval(s, u)?,
        })
    }

    /// Short family tag used in reports.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::BoundedOscillatory { .. } => "bounded_oscillatory",
            Self::QuadraticTime { .. } => "quadratic_time",
            Self::AffineGrowth { .. } => "affine_growth",
            Self::Table(_) => "table",
        }
    }

    /// Whether f(0, u₀) > 0, which makes an unregularized source
    /// non-integrable at the origin.
    pub fn positive_at_origin(&self, u0: T) -> bool {
        self.eval(T::zero(), u0).is_ok_and(|f| f > T::zero())
    }
}
