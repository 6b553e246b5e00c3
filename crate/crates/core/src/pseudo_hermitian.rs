//! Pseudo-Hermiticity conditions on the reduced parameters, constructors
//! that satisfy them, and parameter paths for one-dimensional sweeps.
//!
//! The conditions are
//!
//! ```text
//! r1 = gamma_b + (1 + eta) kappa_c                                = 0
//! r2 = Delta_c + eta Delta_a                                      = 0
//! r3 = (1 + lambda^2 eta) G_a^2 + eta (1 + eta)(Delta_a^2 + kappa_c^2) = 0
//! ```
//!
//! When all three hold the characteristic cubic in `x = Omega + omega_b`
//! has real coefficients, so the spectrum is real or contains one
//! conjugate pair.

use serde::{Deserialize, Serialize};

use crate::com_model::{ReducedParams, DEFAULT_OMEGA_B};
use crate::error::{ensure_finite, Error, Result};

/// `|eta + 1|` below this is treated as the balanced case `eta = -1`.
pub const BALANCED_ETA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Residual tolerances; `rate` applies to r1 and r2 (units of kappa_c),
/// `quadratic` to r3 (units of kappa_c^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhTolerance {
    pub rate: f64,
    pub quadratic: f64,
}

impl Default for PhTolerance {
    fn default() -> Self {
        Self { rate: 1e-10, quadratic: 1e-10 }
    }
}

impl PhResiduals {
    /// r1 and r2 vanish; r3 may not (the coupling-plane phase diagrams use this).
    pub fn linear_ok(&self, kappa_c: f64, tol: &PhTolerance) -> bool {
        self.r1.abs() <= tol.rate * kappa_c && self.r2.abs() <= tol.rate * kappa_c
    }

    pub fn all_ok(&self, kappa_c: f64, tol: &PhTolerance) -> bool {
        self.linear_ok(kappa_c, tol) && self.r3.abs() <= tol.quadratic * kappa_c * kappa_c
    }
}

/// The three residuals, written with `lambda^2 G_a^2 = G_c^2` so that
/// `G_a = 0` is allowed.
pub fn ph_residuals(r: &ReducedParams) -> PhResiduals {
    let (eta, k) = (r.eta, r.kappa_c);
    PhResiduals {
        r1: r.gamma_b + (1.0 + eta) * k,
        r2: r.delta_c + eta * r.delta_a,
        r3: r.g_a * r.g_a + eta * r.g_c * r.g_c + eta * (1.0 + eta) * (r.delta_a * r.delta_a + k * k),
    }
}

/// Which root of `Delta_a^2` to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningSign {
    #[default]
    Positive,
    Negative,
}

impl DetuningSign {
    pub fn apply(self, magnitude: f64) -> f64 {
        match self {
            Self::Positive => magnitude,
            Self::Negative => -magnitude,
        }
    }
}

fn is_balanced(eta: f64) -> bool {
    (eta + 1.0).abs() < BALANCED_ETA_TOL
}

/// `(1 + eta)(1 + lambda^2 eta) > 0`, the condition for r3 = 0 to have a
/// real detuning at large enough coupling. Undefined at `eta = -1`.
pub fn ph_feasible(eta: f64, lambda: f64) -> Result<bool> {
    ensure_finite("eta", eta)?;
    ensure_finite("lambda", lambda)?;
    if is_balanced(eta) {
        return Err(Error::NotApplicable("eta = -1 is the balanced case; it needs lambda = 1".into()));
    }
    Ok((1.0 + eta) * (1.0 + lambda * lambda * eta) > 0.0)
}

/// `G_a` below which `Delta_a^2 < 0`: `kappa_c sqrt(-eta (1+eta) / (1 + lambda^2 eta))`.
pub fn min_coupling(eta: f64, lambda: f64, kappa_c: f64) -> f64 {
    kappa_c * (-eta * (1.0 + eta) / (1.0 + lambda * lambda * eta)).sqrt()
}

/// A parameter set on the pseudo-Hermitian surface for `eta != -1`.
///
/// `gamma_b = -(1+eta) kappa_c`, `G_c = lambda G_a`,
/// `Delta_a^2 = -(1 + lambda^2 eta) G_a^2 / (eta (1+eta)) - kappa_c^2` and
/// `Delta_c = -eta Delta_a`.
///
/// ```
/// use optoep::pseudo_hermitian::{enforce_ph, DetuningSign};
///
/// let r = enforce_ph(-1.1, 1.334, 1.824, 1.0, DetuningSign::Positive).unwrap();
/// assert!((r.delta_a - 5.29).abs() < 0.01);
/// assert!((r.gamma_b - 0.1).abs() < 1e-12);
/// ```
pub fn enforce_ph(eta: f64, lambda: f64, g_a: f64, kappa_c: f64, sign: DetuningSign) -> Result<ReducedParams> {
    enforce_ph_with(eta, lambda, g_a, kappa_c, sign, DEFAULT_OMEGA_B * kappa_c)
}

/// [`enforce_ph`] with an explicit resonator frequency.
pub fn enforce_ph_with(
    eta: f64,
    lambda: f64,
    g_a: f64,
    kappa_c: f64,
    sign: DetuningSign,
    omega_b: f64,
) -> Result<ReducedParams> {
    for (name, v) in [("eta", eta), ("lambda", lambda), ("g_a", g_a), ("kappa_c", kappa_c), ("omega_b", omega_b)] {
        ensure_finite(name, v)?;
    }
    if kappa_c <= 0.0 {
        return Err(Error::InvalidInput(format!("kappa_c must be positive, got {kappa_c}")));
    }
    if eta == 0.0 {
        return Err(Error::InvalidInput("eta = 0 has no pseudo-Hermitian detuning".into()));
    }
    if !ph_feasible(eta, lambda)? {
        return Err(Error::InfeasibleLambda { eta, lambda });
    }
    let delta_sq = -(1.0 + lambda * lambda * eta) * g_a * g_a / (eta * (1.0 + eta)) - kappa_c * kappa_c;
    if delta_sq < 0.0 {
        return Err(Error::InfeasibleCoupling { g_a, g_min: min_coupling(eta, lambda, kappa_c) });
    }
    let delta_a = sign.apply(delta_sq.sqrt());
    Ok(ReducedParams {
        eta,
        g_a,
        g_c: lambda * g_a,
        delta_a,
        delta_c: -eta * delta_a,
        kappa_c,
        gamma_b: -(1.0 + eta) * kappa_c,
        omega_b,
    })
}

/// The balanced case `eta = -1`, `lambda = 1`, `gamma_b = 0`, `Delta_c = Delta_a`;
/// r3 vanishes identically so `Delta_a` is free.
pub fn enforce_ph_balanced(delta_a: f64, g_a: f64, kappa_c: f64) -> ReducedParams {
    ReducedParams {
        eta: -1.0,
        g_a,
        g_c: g_a,
        delta_a,
        delta_c: delta_a,
        kappa_c,
        gamma_b: 0.0,
        omega_b: DEFAULT_OMEGA_B * kappa_c,
    }
}

/// Sign of the resonator rate on the pseudo-Hermitian surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrRegime {
    /// `-2 < eta < -1`, `gamma_b > 0`.
    Loss,
    /// `eta = -1`, `gamma_b = 0`.
    Neutral,
    /// `-1 < eta < -1/2`, `gamma_b < 0`.
    Gain,
}

/// Regime of the mechanical resonator for an `eta` that admits a
/// third-order exceptional point.
pub fn mr_regime(eta: f64) -> Result<MrRegime> {
    if !(eta > -2.0 && eta < -0.5) {
        return Err(Error::Ep3InfeasibleEta(eta));
    }
    Ok(if is_balanced(eta) {
        MrRegime::Neutral
    } else if eta < -1.0 {
        MrRegime::Loss
    } else {
        MrRegime::Gain
    })
}

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `G_a`, with `G_c = lambda G_a` following it.
    GA,
    /// `Delta_a`, with `Delta_c = -eta Delta_a` following it.
    DeltaA,
    /// `G_c` alone; `lambda` changes.
    GC,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::GA => "g_a",
            Self::DeltaA => "delta_a",
            Self::GC => "g_c",
        }
    }
}

/// How the remaining parameters are fixed along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamFamily {
    /// r1 and r2 enforced; `lambda`, `G_a`, `Delta_a` given (the axis
    /// overrides one of them) and r3 is whatever it comes out as.
    /// `eta = -1, lambda = 1` is the balanced family where r3 vanishes.
    Free { eta: f64, lambda: f64, g_a: f64, delta_a: f64 },
    /// r1, r2 and r3 enforced: `Delta_a` follows `G_a` through r3 = 0.
    Enforced { eta: f64, lambda: f64, sign: DetuningSign },
}

impl ParamFamily {
    pub fn balanced(delta_a: f64, g_a: f64) -> Self {
        Self::Free { eta: -1.0, lambda: 1.0, g_a, delta_a }
    }
}

/// A one-parameter family of reduced parameter sets.
///
/// `gamma_offset` is added to the pseudo-Hermitian resonator rate, i.e.
/// `kappa_a + gamma_b + kappa_c = gamma_offset`; a nonzero offset breaks
/// the first condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPath {
    pub family: ParamFamily,
    pub axis: SweepAxis,
    pub kappa_c: f64,
    pub omega_b: f64,
    pub gamma_offset: f64,
}

impl ParamPath {
    pub fn new(family: ParamFamily, axis: SweepAxis) -> Self {
        Self { family, axis, kappa_c: 1.0, omega_b: DEFAULT_OMEGA_B, gamma_offset: 0.0 }
    }

    pub fn with_kappa_c(mut self, kappa_c: f64) -> Self {
        self.kappa_c = kappa_c;
        self
    }

    pub fn with_omega_b(mut self, omega_b: f64) -> Self {
        self.omega_b = omega_b;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.gamma_offset = offset;
        self
    }

    /// Parameter set at axis value `v`.
    pub fn at(&self, v: f64) -> Result<ReducedParams> {
        ensure_finite("axis value", v)?;
        let k = self.kappa_c;
        let mut r = match self.family {
            ParamFamily::Free { eta, lambda, g_a, delta_a } => {
                let (g_a, g_c, delta_a) = match self.axis {
                    SweepAxis::GA => (v, lambda * v, delta_a),
                    SweepAxis::DeltaA => (g_a, lambda * g_a, v),
                    SweepAxis::GC => (g_a, v, delta_a),
                };
                ReducedParams {
                    eta,
                    g_a,
                    g_c,
                    delta_a,
                    delta_c: -eta * delta_a,
                    kappa_c: k,
                    gamma_b: -(1.0 + eta) * k,
                    omega_b: self.omega_b,
                }
            }
            ParamFamily::Enforced { eta, lambda, sign } => {
                if self.axis != SweepAxis::GA {
                    return Err(Error::NotApplicable(format!(
                        "the enforced family derives delta_a from g_a; axis {} is not available",
                        self.axis.name()
                    )));
                }
                if is_balanced(eta) {
                    return Err(Error::NotApplicable(
                        "eta = -1 leaves delta_a free; use the balanced family".into(),
                    ));
                }
                enforce_ph_with(eta, lambda, v, k, sign, self.omega_b)?
            }
        };
        r.gamma_b += self.gamma_offset;
        r.validate()?;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_residuals_vanish() {
        let r = enforce_ph_balanced(3.0 * 3f64.sqrt(), 2.0, 1.0);
        let res = ph_residuals(&r);
        assert_eq!((res.r1, res.r2, res.r3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn loss_resonator_rate_cancels() {
        let r = enforce_ph(-1.1, 1.33, 3.0, 1.0, DetuningSign::Positive).unwrap();
        assert!((r.gamma_b - 0.1).abs() < 1e-15);
        assert!(ph_residuals(&r).r1.abs() < 1e-15);
    }

    #[test]
    fn enforce_loss_example() {
        let r = enforce_ph(-1.1, 1.334, 1.824, 1.0, DetuningSign::Positive).unwrap();
        assert!((r.delta_a - 5.29).abs() < 5e-3, "{}", r.delta_a);
        assert!((r.delta_c - 5.82).abs() < 5e-3, "{}", r.delta_c);
        let res = ph_residuals(&r);
        assert!(res.r1.abs() <= 1e-12 && res.r2.abs() <= 1e-12 && res.r3.abs() <= 1e-12, "{res:?}");
    }

    #[test]
    fn enforce_gain_example() {
        let r = enforce_ph(-0.8, 0.494, 2.613, 1.0, DetuningSign::Positive).unwrap();
        assert!((r.delta_a - 5.77).abs() < 5e-3, "{}", r.delta_a);
        assert!((r.gamma_b + 0.2).abs() < 1e-12);
        let neg = enforce_ph(-0.8, 0.494, 2.613, 1.0, DetuningSign::Negative).unwrap();
        assert_eq!(neg.delta_a, -r.delta_a);
    }

    #[test]
    fn weak_coupling_is_infeasible() {
        match enforce_ph(-1.1, 1.334, 0.1, 1.0, DetuningSign::Positive) {
            Err(Error::InfeasibleCoupling { g_min, .. }) => {
                assert!((g_min - min_coupling(-1.1, 1.334, 1.0)).abs() < 1e-15);
                assert!(g_min > 0.1);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            enforce_ph(-1.1, 0.5, 3.0, 1.0, DetuningSign::Positive),
            Err(Error::InfeasibleLambda { .. })
        ));
        assert!(matches!(enforce_ph(-1.0, 1.0, 3.0, 1.0, DetuningSign::Positive), Err(Error::NotApplicable(_))));
        assert!(matches!(enforce_ph(0.0, 1.0, 3.0, 1.0, DetuningSign::Positive), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn feasibility() {
        assert!(ph_feasible(-1.1, 1.33).unwrap());
        assert!(!ph_feasible(-1.1, 0.5).unwrap());
        assert!(ph_feasible(-0.5, 1.0).unwrap());
        assert!(ph_feasible(-1.0, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(mr_regime(-1.0).unwrap(), MrRegime::Neutral);
        assert_eq!(mr_regime(-1.1).unwrap(), MrRegime::Loss);
        assert_eq!(mr_regime(-0.8).unwrap(), MrRegime::Gain);
        assert_eq!(mr_regime(-1.0 + 1e-10).unwrap(), MrRegime::Neutral);
        for bad in [-2.0, -0.5, -0.4, -3.0, f64::NAN] {
            assert!(matches!(mr_regime(bad), Err(Error::Ep3InfeasibleEta(_))));
        }
    }

    #[test]
    fn balanced_degenerate_point() {
        let r = enforce_ph_balanced(0.0, 0.0, 1.0);
        assert_eq!(r.gamma_b, 0.0);
        assert_eq!(r.delta_c, 0.0);
    }

    #[test]
    fn paths() {
        let p = ParamPath::new(ParamFamily::balanced(10.0, 3.0), SweepAxis::GA);
        let r = p.at(2.5).unwrap();
        assert_eq!((r.g_a, r.g_c, r.delta_a, r.delta_c, r.gamma_b), (2.5, 2.5, 10.0, 10.0, 0.0));
        let r = p.with_offset(0.1).at(2.5).unwrap();
        assert_eq!(r.gamma_b, 0.1);

        let p = ParamPath::new(ParamFamily::Free { eta: -1.1, lambda: 1.2, g_a: 2.0, delta_a: 5.0 }, SweepAxis::DeltaA);
        let r = p.at(7.0).unwrap();
        assert_eq!((r.delta_a, r.g_c), (7.0, 1.2 * 2.0));
        assert!((r.delta_c - 7.7).abs() < 1e-12);

        let p = ParamPath::new(ParamFamily::Enforced { eta: -1.1, lambda: 1.6, sign: DetuningSign::Positive }, SweepAxis::GA);
        assert!(ph_residuals(&p.at(-3.0).unwrap()).r3.abs() < 1e-12);
        assert!(p.at(0.0).is_err());
        let bad = ParamPath { axis: SweepAxis::DeltaA, ..p };
        assert!(matches!(bad.at(1.0), Err(Error::NotApplicable(_))));
    }
}
