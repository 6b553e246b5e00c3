//! Complex scalars, the closed-form cubic solver, an independent
//! simultaneous-iteration root finder, and the cubic discriminant.
//!
//! All quantities here are dimensionless: callers normalize rates and
//! frequencies by the cavity loss rate before handing coefficients over.

mod aberth;
mod cubic;

pub use aberth::{poly_roots_oracle, scaled_residual, MAX_ORACLE_DEGREE};
pub use cubic::solve_cubic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The scalar used for every spectrum and amplitude.
pub type ComplexValue = Complex64;

/// Imaginary parts at or below this (relative to `max(1, |c|)`) count as zero
/// when deciding whether a cubic has real coefficients.
pub const REAL_COEFFICIENT_TOL: f64 = 1e-12;

/// Default radius for grouping near-coincident roots into one cluster.
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-6;

/// Coefficients of the monic cubic `x^3 + c2 x^2 + c1 x + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub c2: ComplexValue,
    pub c1: ComplexValue,
    pub c0: ComplexValue,
}

impl CubicCoefficients {
    pub fn new(c2: ComplexValue, c1: ComplexValue, c0: ComplexValue) -> Self {
        Self { c2, c1, c0 }
    }

    pub fn real(c2: f64, c1: f64, c0: f64) -> Self {
        Self::new(c2.into(), c1.into(), c0.into())
    }

    /// Coefficients of `(x - r0)(x - r1)(x - r2)`.
    pub fn from_roots(roots: [ComplexValue; 3]) -> Self {
        let [a, b, c] = roots;
        Self::new(-(a + b + c), a * b + a * c + b * c, -(a * b * c))
    }

    pub fn eval(&self, x: ComplexValue) -> ComplexValue {
        ((x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: ComplexValue) -> ComplexValue {
        (x * 3.0 + self.c2 * 2.0) * x + self.c1
    }

    pub fn is_finite(&self) -> bool {
        [self.c2, self.c1, self.c0].iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// True when every imaginary part is below `tol * max(1, |c_k|)`.
    pub fn is_real(&self, tol: f64) -> bool {
        [self.c2, self.c1, self.c0]
            .iter()
            .all(|c| c.im.abs() <= tol * c.norm().max(1.0))
    }

    /// Drops the imaginary parts.
    pub fn real_part(&self) -> Self {
        Self::real(self.c2.re, self.c1.re, self.c0.re)
    }

    /// Natural size of `|p(x)|` near the roots: `max(1, |c2|^3, |c1|^(3/2), |c0|)`.
    pub fn residual_scale(&self) -> f64 {
        1f64.max(self.c2.norm().powi(3))
            .max(self.c1.norm().powf(1.5))
            .max(self.c0.norm())
    }
}

/// Cardano discriminant quantities of a real monic cubic.
///
/// `A = c2^2 - 3 c1`, `B = c1 c2 - 9 c0`, `C = c1^2 - 3 c0 c2` and
/// `D = B^2 - 4 A C`. `D < 0` means three distinct real roots, `D > 0` one
/// real root and a conjugate pair, `D = 0` a repeated root, and
/// `D = A = B = 0` a triple root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DiscriminantReport {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
}

impl DiscriminantReport {
    pub fn from_real(c2: f64, c1: f64, c0: f64) -> Self {
        let a = c2 * c2 - 3.0 * c1;
        let b = c1 * c2 - 9.0 * c0;
        let c = c1 * c1 - 3.0 * c0 * c2;
        Self { A: a, B: b, C: c, D: b * b - 4.0 * a * c }
    }

    /// Rescale from coefficients in units `k`, `k^2`, `k^3` to units of 1.
    pub fn normalized(&self, k: f64) -> Self {
        let k2 = k * k;
        Self {
            A: self.A / k2,
            B: self.B / (k2 * k),
            C: self.C / (k2 * k2),
            D: self.D / (k2 * k2 * k2),
        }
    }
}

/// Discriminant of a cubic whose coefficients are real up to
/// [`REAL_COEFFICIENT_TOL`]. Materially complex coefficients are rejected:
/// the sign classification only means something for real cubics.
pub fn cubic_discriminant(c: &CubicCoefficients) -> Result<DiscriminantReport> {
    if !c.is_finite() {
        return Err(Error::InvalidInput("cubic coefficients must be finite".into()));
    }
    if !c.is_real(REAL_COEFFICIENT_TOL) {
        return Err(Error::NotApplicable(format!(
            "discriminant classification needs real coefficients, got imaginary parts ({:e}, {:e}, {:e})",
            c.c2.im, c.c1.im, c.c0.im
        )));
    }
    Ok(DiscriminantReport::from_real(c.c2.re, c.c1.re, c.c0.re))
}

/// Groups roots that lie within `radius` of each other (single linkage) and
/// returns the cluster sizes in descending order, e.g. `[2, 1]` for a double root.
pub fn root_multiplicities(roots: &[ComplexValue], radius: f64) -> Vec<usize> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (from, to) = (label[j], label[i]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    let mut sizes: Vec<usize> = (0..n)
        .map(|k| label.iter().filter(|&&l| l == k).count())
        .filter(|&s| s > 0)
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Smallest pairwise distance between three values.
pub fn min_pairwise_distance(x: &[ComplexValue; 3]) -> f64 {
    (x[0] - x[1]).norm().min((x[0] - x[2]).norm()).min((x[1] - x[2]).norm())
}
