//! The flat bump homeomorphism `x + exp(1/(x-1) - 1/(x+1))` of `[-1, 1]`,
//! transported affinely to any bounded interval and extended by the
//! identity.

use crate::error::Result;
use crate::root::solve_increasing;

/// `exp(-2 / (1 - u^2))`, the displacement on the normalized interval.
fn lift(u: f64) -> f64 {
    if u <= -1.0 || u >= 1.0 {
        return 0.0;
    }
    let w = (1.0 - u) * (1.0 + u);
    (-2.0 / w).exp()
}

fn normalized(a: f64, b: f64, x: f64) -> f64 {
    (2.0 * x - a - b) / (b - a)
}

pub(crate) fn eval(a: f64, b: f64, x: f64) -> f64 {
    if x <= a || x >= b {
        return x;
    }
    x + 0.5 * (b - a) * lift(normalized(a, b, x))
}

pub(crate) fn deriv(a: f64, b: f64, x: f64) -> f64 {
    if x <= a || x >= b {
        return 1.0;
    }
    let u = normalized(a, b, x);
    let w = (1.0 - u) * (1.0 + u);
    1.0 - lift(u) * 4.0 * u / (w * w)
}

pub(crate) fn inverse(a: f64, b: f64, y: f64, tol: f64) -> Result<f64> {
    if y <= a || y >= b {
        return Ok(y);
    }
    let v = normalized(a, b, y);
    let f = |u: f64| Ok(u + lift(u));
    let df = |u: f64| {
        let w = (1.0 - u) * (1.0 + u);
        Ok(1.0 - lift(u) * 4.0 * u / (w * w))
    };
    // The displacement never exceeds exp(-2).
    let lo = (v - (-2.0_f64).exp()).max(-1.0);
    let u = solve_increasing(&f, Some(&df), v, (lo, v), 2.0 * tol / (b - a))?;
    Ok(0.5 * (a + b) + 0.5 * (b - a) * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(eval(-1.0, 1.0, 1.0), 1.0);
        assert_eq!(eval(-1.0, 1.0, -1.0), -1.0);
        assert!((eval(-1.0, 1.0, 0.0) - (-2.0_f64).exp()).abs() < 1e-16);
        assert_eq!(eval(-1.0, 1.0, 3.0), 3.0);
        assert_eq!(deriv(-1.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn strictly_above_identity_inside() {
        for i in 1..200 {
            let x = -0.95 + 1.9 * i as f64 / 200.0;
            assert!(eval(-1.0, 1.0, x) > x);
            assert!(deriv(-1.0, 1.0, x) > 0.0);
        }
    }

    #[test]
    fn inverse_round_trip_on_shifted_interval() {
        let (a, b) = (2.0, 5.0);
        for i in 0..=100 {
            let y = a + (b - a) * i as f64 / 100.0;
            let x = inverse(a, b, y, 1e-12).unwrap();
            assert!((eval(a, b, x) - y).abs() <= 1e-10);
        }
    }
}
