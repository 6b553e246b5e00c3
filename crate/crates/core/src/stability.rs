//! Classical stability of the linearized quadrature dynamics: the 6x6
//! drift matrix, its characteristic polynomial, a Routh-Hurwitz test and
//! a root-based cross-check.

use serde::Serialize;

use crate::com_model::ReducedParams;
use crate::complex_poly::{poly_roots_oracle, ComplexValue};
use crate::error::Result;

/// Relative size below which a Routh pivot or row counts as zero.
pub const ROUTH_ZERO_TOL: f64 = 1e-12;

/// Drift matrix acting on `(X_a, Y_a, X_b, Y_b, X_c, Y_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftMatrix(pub [[f64; 6]; 6]);

impl DriftMatrix {
    pub fn trace(&self) -> f64 {
        (0..6).map(|i| self.0[i][i]).sum()
    }

    fn mul(&self, other: &[[f64; 6]; 6]) -> [[f64; 6]; 6] {
        let mut out = [[0.0; 6]; 6];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..6).map(|k| self.0[i][k] * other[k][j]).sum();
            }
        }
        out
    }
}

/// Builds `M` from the reduced parameters, with the resonator rate
/// `gamma_b` in the resonator block and `delta' = Delta - omega_b` in the
/// cavity blocks.
pub fn build_drift_matrix(r: &ReducedParams) -> DriftMatrix {
    let (ka, kb, kc) = (r.kappa_a(), r.gamma_b, r.kappa_c);
    let (da, dc, wb) = (r.detuning_a(), r.detuning_c(), r.omega_b);
    let (ga, gc) = (r.g_a, r.g_c);
    DriftMatrix([
        [-ka, da, 0.0, -ga, 0.0, 0.0],
        [-da, -ka, -ga, 0.0, 0.0, 0.0],
        [0.0, -ga, -kb, wb, 0.0, -gc],
        [-ga, 0.0, -wb, -kb, -gc, 0.0],
        [0.0, 0.0, 0.0, -gc, -kc, dc],
        [0.0, 0.0, -gc, 0.0, -dc, -kc],
    ])
}

/// Coefficients `[c0, .., c5]` of `lambda^6 + c5 lambda^5 + .. + c0 = det(M - lambda I)`,
/// from the Faddeev-LeVerrier recurrence.
pub fn char_coeffs(m: &DriftMatrix) -> [f64; 6] {
    let mut c = [0.0; 7];
    c[6] = 1.0;
    let mut acc = [[0.0; 6]; 6];
    for k in 1..=6 {
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += c[7 - k];
        }
        let am = m.mul(&acc);
        let trace: f64 = (0..6).map(|i| am[i][i]).sum();
        c[6 - k] = -trace / k as f64;
        acc = am;
    }
    [c[0], c[1], c[2], c[3], c[4], c[5]]
}

/// The Routh array and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouthTable {
    pub rows: Vec<Vec<f64>>,
    pub first_column: Vec<f64>,
    /// A zero pivot or a zero row was met; the verdict is then "not stable".
    pub marginal: bool,
}

/// Routh-Hurwitz test for the monic sextic with coefficients `[c0, .., c5]`.
///
/// A pivot that vanishes relative to its row is replaced by
/// `ROUTH_ZERO_TOL` times the row scale; a row that vanishes is replaced by
/// the derivative of the auxiliary polynomial above it. Both mark the table
/// marginal, and a marginal table is never stable.
///
/// ```
/// use optoep::stability::routh_hurwitz;
///
/// // (s + 1)^6
/// let (stable, _) = routh_hurwitz(&[1.0, 6.0, 15.0, 20.0, 15.0, 6.0]);
/// assert!(stable);
/// ```
pub fn routh_hurwitz(c: &[f64; 6]) -> (bool, RouthTable) {
    const N: usize = 6;
    let desc = [1.0, c[5], c[4], c[3], c[2], c[1], c[0]];
    let width = N / 2 + 1;
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; width]; N + 1];
    for (j, &a) in desc.iter().enumerate() {
        rows[j % 2][j / 2] = a;
    }
    let row_scale = |row: &[f64]| row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut marginal = false;

    for i in 1..=N {
        if i >= 2 {
            let (above, pivot_row) = (rows[i - 2].clone(), rows[i - 1].clone());
            let p = pivot_row[0];
            rows[i] = (0..width)
                .map(|j| {
                    let a = above.get(j + 1).copied().unwrap_or(0.0);
                    let b = pivot_row.get(j + 1).copied().unwrap_or(0.0);
                    (p * a - above[0] * b) / p
                })
                .collect();
        }
        let reference = row_scale(&rows[i - 1]).max(if i >= 2 { row_scale(&rows[i - 2]) } else { 0.0 });
        if row_scale(&rows[i]) <= ROUTH_ZERO_TOL * reference {
            // zero row: differentiate the auxiliary polynomial of the row above
            marginal = true;
            let degree = N + 1 - i;
            rows[i] = (0..width)
                .map(|j| rows[i - 1][j] * degree.saturating_sub(2 * j) as f64)
                .collect();
        }
        let scale = row_scale(&rows[i]);
        if rows[i][0].abs() <= ROUTH_ZERO_TOL * scale {
            marginal = true;
            rows[i][0] = ROUTH_ZERO_TOL * scale.max(f64::MIN_POSITIVE);
        }
    }
    let first_column: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let stable = !marginal && first_column.iter().all(|&v| v > 0.0);
    (stable, RouthTable { rows, first_column, marginal })
}

/// Both stability verdicts for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub char_coeffs: [f64; 6],
    pub rh_stable: bool,
    pub rh_table: RouthTable,
    /// `None` when the root oracle failed.
    pub eigen_stable: Option<bool>,
    pub max_real_part: Option<f64>,
    pub oracle_error: Option<String>,
}

/// Routh-Hurwitz verdict plus the largest real part among the roots of
/// the characteristic polynomial, found independently.
pub fn stability_report(r: &ReducedParams) -> Result<StabilityReport> {
    r.validate()?;
    let coeffs = char_coeffs(&build_drift_matrix(r));
    let (rh_stable, rh_table) = routh_hurwitz(&coeffs);
    let ascending: Vec<ComplexValue> =
        coeffs.iter().copied().chain(std::iter::once(1.0)).map(ComplexValue::from).collect();
    let (eigen_stable, max_real_part, oracle_error) = match poly_roots_oracle(&ascending) {
        Ok(roots) => {
            let max = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            (Some(max < 0.0), Some(max), None)
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(StabilityReport { char_coeffs: coeffs, rh_stable, rh_table, eigen_stable, max_real_part, oracle_error })
}
