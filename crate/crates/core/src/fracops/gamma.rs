use crate::error::{Error, Result};
use crate::real::Real;

/// Largest argument accepted by [`gamma_fn`]; Γ(171.7) already overflows `f64`.
pub const GAMMA_MAX_ARG: f64 = 170.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function for positive arguments.
///
/// Lanczos approximation (g = 7, nine terms) with the reflection formula
/// below 1/2, evaluated in `f64` regardless of `T`. Relative error stays
/// below 1e-13 on [1e-3, 170].
pub fn gamma_fn<T: Real>(x: T) -> Result<T> {
    let x = x.as_f64();
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain {
            function: "gamma",
            value: x,
            reason: "only positive arguments are supported",
        });
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow(x));
    }
    Ok(T::lit(gamma_positive(x)))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * lanczos(1.0 - x));
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z + 1/2) overflows on its own near x = 170; split the power.
    let half_power = t.powf(0.5 * (z + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half_power * ((-t).exp() * half_power) * series
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_are_reproduced() {
        let mut factorial = 1.0_f64;
        for n in 1..=20 {
            let g: f64 = gamma_fn(n as f64).unwrap();
            assert!((g - factorial).abs() <= 1e-13 * factorial, "Γ({n}) = {g}");
            factorial *= n as f64;
        }
    }

    #[test]
    fn rejects_nonpositive_and_overflowing_arguments() {
        assert!(matches!(gamma_fn(0.0_f64), Err(Error::Domain { .. })));
        assert!(matches!(gamma_fn(-2.5_f64), Err(Error::Domain { .. })));
        assert!(matches!(gamma_fn(f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(gamma_fn(170.5_f64), Err(Error::Overflow(_))));
        assert!(gamma_fn(170.0_f64).unwrap().is_finite());
    }

    #[test]
    fn single_precision_goes_through_f64() {
        let g: f32 = gamma_fn(0.5_f32).unwrap();
        assert!((g - std::f32::consts::PI.sqrt()).abs() < 1e-6);
    }
}
