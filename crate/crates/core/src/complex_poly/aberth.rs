use std::f64::consts::PI;

use super::ComplexValue;
use crate::error::{Error, Result};

/// Highest degree accepted by [`poly_roots_oracle`].
pub const MAX_ORACLE_DEGREE: usize = 8;

const MAX_ITERATIONS: usize = 500;
const STEP_TOL: f64 = 1e-15;
const RESIDUAL_TOL: f64 = 1e-9;

fn horner(coeffs: &[ComplexValue], z: ComplexValue) -> (ComplexValue, ComplexValue) {
    // coefficients are ascending; returns (p(z), p'(z))
    let mut p = ComplexValue::new(0.0, 0.0);
    let mut dp = ComplexValue::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `|p(z)| / sum_k |a_k| |z|^k`, the backward-error style residual used as the
/// oracle's acceptance test.
pub fn scaled_residual(coeffs: &[ComplexValue], z: ComplexValue) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm());
    if scale == 0.0 {
        p.norm()
    } else {
        p.norm() / scale
    }
}

/// All roots of `sum_k coeffs[k] x^k` (ascending order, degree at most 8) by
/// Aberth–Ehrlich simultaneous iteration.
///
/// Initial guesses sit on a circle around the root centroid with a radius
/// from the Fujiwara bound and a fixed angular offset, so the result is
/// deterministic. Roots are accepted when every scaled residual is at most
/// `1e-9`. Multiple roots converge only linearly and come back as a cluster:
/// an m-fold root is resolved to roughly `eps^(1/m)`, so `(x-1)^6` gives six
/// roots within `1e-2` of 1.
///
/// ```
/// use optoep::complex_poly::{poly_roots_oracle, ComplexValue};
///
/// let one = ComplexValue::new(1.0, 0.0);
/// let zero = ComplexValue::new(0.0, 0.0);
/// let roots = poly_roots_oracle(&[one, zero, one]).unwrap(); // x^2 + 1
/// assert!(roots.iter().any(|z| (z - ComplexValue::i()).norm() < 1e-12));
/// ```
pub fn poly_roots_oracle(coeffs: &[ComplexValue]) -> Result<Vec<ComplexValue>> {
    if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
    }
    let Some(degree) = coeffs.len().checked_sub(1) else {
        return Err(Error::InvalidInput("empty coefficient list".into()));
    };
    if degree > MAX_ORACLE_DEGREE {
        return Err(Error::InvalidInput(format!("degree {degree} exceeds {MAX_ORACLE_DEGREE}")));
    }
    let lead = coeffs[degree];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    let monic: Vec<ComplexValue> = coeffs.iter().map(|&a| a / lead).collect();

    let centroid = -monic[degree - 1] / degree as f64;
    let radius = (0..degree)
        .map(|k| {
            let a = monic[k].norm();
            if k == 0 {
                (a / 2.0).powf(1.0 / degree as f64)
            } else {
                a.powf(1.0 / (degree - k) as f64)
            }
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        * 2.0;
    let mut z: Vec<ComplexValue> = (0..degree)
        .map(|k| centroid + ComplexValue::from_polar(radius, 2.0 * PI * k as f64 / degree as f64 + 0.4))
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut converged = true;
        for k in 0..degree {
            let (p, dp) = horner(&monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let repulsion: ComplexValue = (0..degree)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        ComplexValue::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = newton / (ComplexValue::new(1.0, 0.0) - newton * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] -= step;
            if step.norm() > STEP_TOL * (1.0 + z[k].norm()) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }

    let worst = z.iter().map(|&r| scaled_residual(&monic, r)).fold(0.0, f64::max);
    if worst.is_nan() || worst > RESIDUAL_TOL {
        return Err(Error::NumericFailure {
            message: format!("Aberth iteration did not reach residual {RESIDUAL_TOL:e} in {MAX_ITERATIONS} iterations"),
            residual: worst,
        });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> ComplexValue {
        ComplexValue::new(re, 0.0)
    }

    #[test]
    fn quadratic_unit_imaginary() {
        let roots = poly_roots_oracle(&[c(1.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(roots.len(), 2);
        for target in [ComplexValue::i(), -ComplexValue::i()] {
            assert!(roots.iter().any(|z| (z - target).norm() < 1e-12));
        }
    }

    #[test]
    fn sixfold_root_clusters() {
        // (x - 1)^6, binomial coefficients with alternating sign
        let coeffs: Vec<ComplexValue> = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0].iter().map(|&a| c(a)).collect();
        let roots = poly_roots_oracle(&coeffs).unwrap();
        assert_eq!(roots.len(), 6);
        for z in roots {
            assert!((z - 1.0).norm() < 1e-2, "{z}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(poly_roots_oracle(&[]).is_err());
        assert!(poly_roots_oracle(&[c(1.0), c(0.0)]).is_err());
        assert!(poly_roots_oracle(&[c(1.0); 10]).is_err());
        assert!(poly_roots_oracle(&[c(f64::NAN), c(1.0)]).is_err());
        assert_eq!(poly_roots_oracle(&[c(3.0)]).unwrap(), Vec::new());
    }
}
