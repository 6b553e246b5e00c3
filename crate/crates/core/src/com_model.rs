//! Parameter model of the two-cavity, one-resonator system: classical steady
//! state, reduction to the coupling/detuning parametrization, the 3x3
//! effective Hamiltonian and its spectrum.
//!
//! Rates are signed: a negative cavity rate `kappa_a` is gain, a negative
//! `gamma_b` is a gain resonator. Every quantity is expressed in the same
//! frequency unit; the library never assumes `kappa_c = 1` except where a
//! function says it normalizes.

use serde::{Deserialize, Serialize};

use crate::complex_poly::{solve_cubic, ComplexValue, CubicCoefficients, REAL_COEFFICIENT_TOL};
use crate::error::{ensure_finite, Error, Result};

/// Resonator frequency used when a configuration leaves it unspecified.
/// The plotted variable `x = Omega + omega_b` does not depend on it.
pub const DEFAULT_OMEGA_B: f64 = 50.0;

const MIN_DENOMINATOR: f64 = 1e-9;
const PICARD_DAMPING: f64 = 0.5;
const PICARD_TOL: f64 = 1e-12;
const PICARD_MAX_ITER: usize = 1000;
const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// Lab-frame inputs of the driven system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub omega_a: f64,
    pub omega_c: f64,
    pub omega_b: f64,
    /// Drive (laser) frequencies.
    pub nu_a: f64,
    pub nu_c: f64,
    /// Single-photon optomechanical couplings.
    pub g_a: f64,
    pub g_c: f64,
    /// Drive amplitudes, `[re, im]` in serialized form.
    pub drive_a: ComplexValue,
    pub drive_c: ComplexValue,
    /// Signed rate of cavity a (negative = gain).
    pub kappa_a: f64,
    /// Loss rate of cavity c; the unit all reduced quantities refer to.
    pub kappa_c: f64,
    /// Signed resonator rate.
    pub gamma_b: f64,
}

impl PhysicalParams {
    pub fn detuning_a(&self) -> f64 {
        self.omega_a - self.nu_a
    }

    pub fn detuning_c(&self) -> f64 {
        self.omega_c - self.nu_c
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_c", self.omega_c),
            ("omega_b", self.omega_b),
            ("nu_a", self.nu_a),
            ("nu_c", self.nu_c),
            ("g_a", self.g_a),
            ("g_c", self.g_c),
            ("drive_a.re", self.drive_a.re),
            ("drive_a.im", self.drive_a.im),
            ("drive_c.re", self.drive_c.re),
            ("drive_c.im", self.drive_c.im),
            ("kappa_a", self.kappa_a),
            ("kappa_c", self.kappa_c),
            ("gamma_b", self.gamma_b),
        ] {
            ensure_finite(name, v)?;
        }
        if self.kappa_c <= 0.0 {
            return Err(Error::InvalidInput(format!("kappa_c must be positive, got {}", self.kappa_c)));
        }
        Ok(())
    }

    /// Multiply every rate, frequency, coupling and drive by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            omega_a: self.omega_a * s,
            omega_c: self.omega_c * s,
            omega_b: self.omega_b * s,
            nu_a: self.nu_a * s,
            nu_c: self.nu_c * s,
            g_a: self.g_a * s,
            g_c: self.g_c * s,
            drive_a: self.drive_a * s,
            drive_c: self.drive_c * s,
            kappa_a: self.kappa_a * s,
            kappa_c: self.kappa_c * s,
            gamma_b: self.gamma_b * s,
        }
    }
}

/// Classical fixed point of the driven, damped equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub a_s: ComplexValue,
    pub b_s: ComplexValue,
    pub c_s: ComplexValue,
    /// Detunings shifted by the static resonator displacement.
    pub delta_a_eff: f64,
    pub delta_c_eff: f64,
    /// Enhanced couplings `g a_s` and `g c_s` before any phase convention.
    pub g_a_eff: ComplexValue,
    pub g_c_eff: ComplexValue,
    pub iterations: usize,
    /// Largest relative mismatch of the fixed-point equations.
    pub residual: f64,
}

fn checked_ratio(num: ComplexValue, den: ComplexValue, what: &str) -> Result<ComplexValue> {
    if den.norm() < MIN_DENOMINATOR {
        return Err(Error::InvalidInput(format!("{what} denominator |{den}| is below {MIN_DENOMINATOR:e}")));
    }
    Ok(num / den)
}

struct Amplitudes {
    a: ComplexValue,
    c: ComplexValue,
    b: ComplexValue,
    delta_a: f64,
    delta_c: f64,
}

fn amplitudes_for(p: &PhysicalParams, b_s: ComplexValue) -> Result<Amplitudes> {
    let displacement = 2.0 * b_s.re;
    let delta_a = p.detuning_a() + p.g_a * displacement;
    let delta_c = p.detuning_c() + p.g_c * displacement;
    let a = checked_ratio(p.drive_a, ComplexValue::new(p.kappa_a, delta_a), "cavity a")?;
    let c = checked_ratio(p.drive_c, ComplexValue::new(p.kappa_c, delta_c), "cavity c")?;
    let force = ComplexValue::new(0.0, -(p.g_a * a.norm_sqr() + p.g_c * c.norm_sqr()));
    let b = checked_ratio(force, ComplexValue::new(p.gamma_b, p.omega_b), "resonator")?;
    Ok(Amplitudes { a, c, b, delta_a, delta_c })
}

fn rel_gap(x: ComplexValue, y: ComplexValue) -> f64 {
    let d = (x - y).norm();
    if d == 0.0 {
        0.0
    } else {
        d / x.norm().max(y.norm())
    }
}

/// Self-consistent steady state by damped Picard iteration on the resonator
/// amplitude.
///
/// `a_s = Omega_a / (kappa_a + i delta'_a)`, `c_s = Omega_c / (kappa_c + i delta'_c)`,
/// `b_s = -i (g_a |a_s|^2 + g_c |c_s|^2) / (gamma_b + i omega_b)` with
/// `delta' = delta + g (b_s + b_s^*)`.
pub fn steady_state(p: &PhysicalParams) -> Result<SteadyState> {
    p.validate()?;
    let mut b = ComplexValue::new(0.0, 0.0);
    let mut last_step = f64::INFINITY;
    for iteration in 1..=PICARD_MAX_ITER {
        let next = amplitudes_for(p, b)?.b;
        last_step = rel_gap(next, b);
        if last_step <= PICARD_TOL {
            let amp = amplitudes_for(p, next)?;
            let residual = rel_gap(amp.b, next);
            if residual > STEADY_RESIDUAL_TOL {
                return Err(Error::NumericFailure {
                    message: "steady state converged to a point that fails the fixed-point check".into(),
                    residual,
                });
            }
            return Ok(SteadyState {
                a_s: amp.a,
                b_s: next,
                c_s: amp.c,
                delta_a_eff: amp.delta_a,
                delta_c_eff: amp.delta_c,
                g_a_eff: amp.a * p.g_a,
                g_c_eff: amp.c * p.g_c,
                iterations: iteration,
                residual,
            });
        }
        b += (next - b) * PICARD_DAMPING;
    }
    Err(Error::NumericFailure {
        message: format!("steady state did not converge in {PICARD_MAX_ITER} damped iterations"),
        residual: last_step,
    })
}

/// How the complex enhanced couplings are made real. Both are equivalent to
/// rotating the phases of the drive lasers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `G -> |G|`.
    #[default]
    Magnitude,
    /// `G -> sign(Re G) |G|`, keeping the sign of the real part.
    SignedMagnitude,
}

/// The reduced parametrization: `eta = kappa_a / kappa_c`, real couplings,
/// and detunings `Delta = delta' + omega_b` measured from the blue sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedParams {
    pub eta: f64,
    pub g_a: f64,
    pub g_c: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub kappa_c: f64,
    pub gamma_b: f64,
    pub omega_b: f64,
}

impl ReducedParams {
    /// `G_c / G_a`; infinite or NaN when `G_a = 0`.
    pub fn lambda(&self) -> f64 {
        self.g_c / self.g_a
    }

    pub fn kappa_a(&self) -> f64 {
        self.eta * self.kappa_c
    }

    /// Shifted detuning `delta'_a = Delta_a - omega_b`.
    pub fn detuning_a(&self) -> f64 {
        self.delta_a - self.omega_b
    }

    pub fn detuning_c(&self) -> f64 {
        self.delta_c - self.omega_b
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("g_a", self.g_a),
            ("g_c", self.g_c),
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
            ("kappa_c", self.kappa_c),
            ("gamma_b", self.gamma_b),
            ("omega_b", self.omega_b),
        ] {
            ensure_finite(name, v)?;
        }
        if self.kappa_c <= 0.0 {
            return Err(Error::InvalidInput(format!("kappa_c must be positive, got {}", self.kappa_c)));
        }
        Ok(())
    }

    /// Everything divided by `kappa_c`, so the result has `kappa_c = 1`.
    pub fn normalized(&self) -> Self {
        let k = self.kappa_c;
        Self {
            eta: self.eta,
            g_a: self.g_a / k,
            g_c: self.g_c / k,
            delta_a: self.delta_a / k,
            delta_c: self.delta_c / k,
            kappa_c: 1.0,
            gamma_b: self.gamma_b / k,
            omega_b: self.omega_b / k,
        }
    }

    /// Every dimensional field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            eta: self.eta,
            g_a: self.g_a * s,
            g_c: self.g_c * s,
            delta_a: self.delta_a * s,
            delta_c: self.delta_c * s,
            kappa_c: self.kappa_c * s,
            gamma_b: self.gamma_b * s,
            omega_b: self.omega_b * s,
        }
    }
}

/// Reduce a physical parameter set and its steady state.
pub fn reduce(p: &PhysicalParams, s: &SteadyState, convention: PhaseConvention) -> Result<ReducedParams> {
    p.validate()?;
    let real_coupling = |g: ComplexValue| match convention {
        PhaseConvention::Magnitude => g.norm(),
        PhaseConvention::SignedMagnitude => {
            if g.re < 0.0 {
                -g.norm()
            } else {
                g.norm()
            }
        }
    };
    let g_a = real_coupling(s.g_a_eff);
    if g_a == 0.0 {
        return Err(Error::UndefinedLambda);
    }
    Ok(ReducedParams {
        eta: p.kappa_a / p.kappa_c,
        g_a,
        g_c: real_coupling(s.g_c_eff),
        delta_a: s.delta_a_eff + p.omega_b,
        delta_c: s.delta_c_eff + p.omega_b,
        kappa_c: p.kappa_c,
        gamma_b: p.gamma_b,
        omega_b: p.omega_b,
    })
}

/// The 3x3 non-Hermitian matrix acting on `(delta a, delta b^dagger, delta c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian(pub [[ComplexValue; 3]; 3]);

/// ```text
/// [ delta'_a - i kappa_a        G_a            0           ]
/// [ -G_a^*              -omega_b - i gamma_b   -G_c^*      ]
/// [ 0                           G_c        delta'_c - i kappa_c ]
/// ```
pub fn build_h_eff(r: &ReducedParams) -> EffectiveHamiltonian {
    let c = ComplexValue::new;
    let z = c(0.0, 0.0);
    EffectiveHamiltonian([
        [c(r.detuning_a(), -r.kappa_a()), c(r.g_a, 0.0), z],
        [c(-r.g_a, 0.0), c(-r.omega_b, -r.gamma_b), c(-r.g_c, 0.0)],
        [z, c(r.g_c, 0.0), c(r.detuning_c(), -r.kappa_c)],
    ])
}

impl EffectiveHamiltonian {
    /// Monic characteristic polynomial of `H + shift * I`, i.e. of the
    /// variable `x = Omega + shift`.
    pub fn characteristic(&self, shift: f64) -> CubicCoefficients {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += shift;
        }
        let trace = m[0][0] + m[1][1] + m[2][2];
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        CubicCoefficients::new(-trace, minors, -det3(&m))
    }

    /// A unit right eigenvector for eigenvalue `omega`, from the largest cross
    /// product of two rows of `H - omega I`.
    pub fn eigenvector(&self, omega: ComplexValue) -> [ComplexValue; 3] {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= omega;
        }
        let cross = |u: &[ComplexValue; 3], v: &[ComplexValue; 3]| {
            [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
        };
        let norm = |v: &[ComplexValue; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let best = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])]
            .into_iter()
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .unwrap_or([ComplexValue::new(0.0, 0.0); 3]);
        let n = norm(&best);
        if n == 0.0 {
            best
        } else {
            best.map(|z| z / n)
        }
    }

    pub fn apply(&self, v: &[ComplexValue; 3]) -> [ComplexValue; 3] {
        let m = &self.0;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }
}

fn det3(m: &[[ComplexValue; 3]; 3]) -> ComplexValue {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of `H + shift * I - x I`, evaluated directly.
pub fn shifted_determinant(h: &EffectiveHamiltonian, shift: f64, x: ComplexValue) -> ComplexValue {
    let mut m = h.0;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += shift - x;
    }
    det3(&m)
}

/// The three eigenvalues expressed as `x = Omega + omega_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTriple(pub [ComplexValue; 3]);

impl SpectralTriple {
    pub fn min_gap(&self) -> f64 {
        crate::complex_poly::min_pairwise_distance(&self.0)
    }

    /// True when the values are all real, or one real value plus a
    /// conjugate pair, within `tol`.
    pub fn is_pseudo_hermitian_pattern(&self, tol: f64) -> bool {
        let x = &self.0;
        if x.iter().all(|z| z.im.abs() <= tol) {
            return true;
        }
        (0..3).any(|k| {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            x[k].im.abs() <= tol && (x[i] - x[j].conj()).norm() <= tol
        })
    }
}

/// Eigenvalues of `h` shifted to `x = Omega + omega_b`.
///
/// The characteristic cubic is formed from `H + omega_b I`. Coefficients
/// that are real to within [`REAL_COEFFICIENT_TOL`] (the pseudo-Hermitian
/// case) are snapped to real so the solver's real path keeps the
/// real/conjugate-pair structure exact.
pub fn spectrum(h: &EffectiveHamiltonian, omega_b: f64) -> Result<SpectralTriple> {
    let mut coeffs = h.characteristic(omega_b);
    if coeffs.is_real(REAL_COEFFICIENT_TOL) {
        coeffs = coeffs.real_part();
    }
    solve_cubic(&coeffs).map(SpectralTriple)
}

/// Rotating-wave validity ratios of one cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityRwa {
    /// `|delta' + omega_b| / |delta' - omega_b|`; `None` when `delta' = omega_b`.
    pub sideband_ratio: Option<f64>,
    /// `|G| / |delta'|`; `None` when `delta' = 0` and `G != 0`.
    pub coupling_ratio: Option<f64>,
}

impl CavityRwa {
    fn new(detuning: f64, omega_b: f64, g: f64) -> Self {
        let den = (detuning - omega_b).abs();
        let sideband_ratio = (den > 0.0).then(|| (detuning + omega_b).abs() / den);
        let coupling_ratio = if g == 0.0 {
            Some(0.0)
        } else if detuning != 0.0 {
            Some(g.abs() / detuning.abs())
        } else {
            None
        };
        Self { sideband_ratio, coupling_ratio }
    }

    fn ok(&self, threshold: f64) -> bool {
        matches!(self.sideband_ratio, Some(r) if r <= threshold)
            && matches!(self.coupling_ratio, Some(r) if r <= threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaReport {
    pub cavity_a: CavityRwa,
    pub cavity_c: CavityRwa,
    pub threshold: f64,
    pub ok: bool,
}

pub const DEFAULT_RWA_THRESHOLD: f64 = 0.1;

/// Checks `|delta' + omega_b| << |delta' - omega_b|` and `|G| << |delta'|`
/// for both cavities against `threshold`.
pub fn rwa_validity(r: &ReducedParams, threshold: f64) -> RwaReport {
    let cavity_a = CavityRwa::new(r.detuning_a(), r.omega_b, r.g_a);
    let cavity_c = CavityRwa::new(r.detuning_c(), r.omega_b, r.g_c);
    RwaReport { cavity_a, cavity_c, threshold, ok: cavity_a.ok(threshold) && cavity_c.ok(threshold) }
}
