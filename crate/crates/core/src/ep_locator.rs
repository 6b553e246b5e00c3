//! Third-order exceptional points in closed form, discriminant
//! classification of a parameter set, and EP2 search along a path.

use serde::{Deserialize, Serialize};

use crate::com_model::{ReducedParams, DEFAULT_OMEGA_B};
use crate::complex_poly::{solve_cubic, ComplexValue, CubicCoefficients, DiscriminantReport};
use crate::error::{ensure_finite, Error, Result};
use crate::pseudo_hermitian::{
    enforce_ph_balanced, enforce_ph_with, min_coupling, mr_regime, ph_residuals, DetuningSign, MrRegime,
    ParamPath, PhTolerance,
};

/// Default number of grid points scanned by [`find_ep2`].
pub const DEFAULT_EP_GRID: usize = 2048;

const BISECTION_LIMIT: usize = 200;
const GOLDEN_LIMIT: usize = 200;

/// Closed-form location of the EP3s for a given `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ep3Criticals {
    pub eta: f64,
    pub kappa_c: f64,
    pub regime: MrRegime,
    pub lambda_ep3: f64,
    /// Magnitude of the critical coupling; `-g_a_ep3` is an EP3 as well.
    pub g_a_ep3: f64,
    pub delta_a_ep3_plus: f64,
    pub delta_a_ep3_minus: f64,
    /// Coalesced eigenvalue `x = Omega + omega_b` on the `Delta_a > 0` branch.
    pub x_ep3_plus: f64,
    pub x_ep3_minus: f64,
    /// Smallest `G_a` with a real pseudo-Hermitian detuning at `lambda_ep3`;
    /// `None` in the balanced case, where `Delta_a` is unconstrained.
    pub g_a_min: Option<f64>,
}

/// EP3 parameters for `-2 < eta < -1/2`.
///
/// ```
/// use optoep::ep_locator::ep3_criticals;
///
/// let c = ep3_criticals(-1.0, 1.0).unwrap();
/// assert_eq!((c.lambda_ep3, c.g_a_ep3), (1.0, 2.0));
/// assert!((c.x_ep3_plus - 2.0 * 3f64.sqrt()).abs() < 1e-15);
/// ```
pub fn ep3_criticals(eta: f64, kappa_c: f64) -> Result<Ep3Criticals> {
    ensure_finite("kappa_c", kappa_c)?;
    if kappa_c <= 0.0 {
        return Err(Error::InvalidInput(format!("kappa_c must be positive, got {kappa_c}")));
    }
    let regime = mr_regime(eta)?;
    if regime == MrRegime::Neutral {
        let delta = 3.0 * 3f64.sqrt() * kappa_c;
        let x = 2.0 * 3f64.sqrt() * kappa_c;
        return Ok(Ep3Criticals {
            eta: -1.0,
            kappa_c,
            regime,
            lambda_ep3: 1.0,
            g_a_ep3: 2.0 * kappa_c,
            delta_a_ep3_plus: delta,
            delta_a_ep3_minus: -delta,
            x_ep3_plus: x,
            x_ep3_minus: -x,
            g_a_min: None,
        });
    }
    let lambda = ((2.0 * eta + 1.0) / (eta * (eta + 2.0))).powf(1.5);
    let l2 = lambda * lambda;
    let inv_sq = -3.0 * (1.0 + l2) / (1.0 + eta + eta * eta) - (1.0 + l2 * eta) / (eta * (1.0 + eta));
    let g = 2.0 * kappa_c / inv_sq.sqrt();
    let delta_sq = -(1.0 + l2 * eta) * g * g / (eta * (1.0 + eta)) - kappa_c * kappa_c;
    if !(inv_sq > 0.0 && delta_sq >= 0.0) {
        return Err(Error::NumericFailure {
            message: format!("EP3 closed form is not real at eta = {eta}"),
            residual: inv_sq.min(delta_sq),
        });
    }
    let delta = delta_sq.sqrt();
    Ok(Ep3Criticals {
        eta,
        kappa_c,
        regime,
        lambda_ep3: lambda,
        g_a_ep3: g,
        delta_a_ep3_plus: delta,
        delta_a_ep3_minus: -delta,
        x_ep3_plus: (1.0 - eta) * delta / 3.0,
        x_ep3_minus: -(1.0 - eta) * delta / 3.0,
        g_a_min: Some(min_coupling(eta, lambda, kappa_c)),
    })
}

impl Ep3Criticals {
    /// The reduced parameter set at the EP3 on the requested detuning branch.
    pub fn params(&self, sign: DetuningSign) -> Result<ReducedParams> {
        let k = self.kappa_c;
        if self.regime == MrRegime::Neutral {
            let delta = match sign {
                DetuningSign::Positive => self.delta_a_ep3_plus,
                DetuningSign::Negative => self.delta_a_ep3_minus,
            };
            return Ok(enforce_ph_balanced(delta, self.g_a_ep3, k));
        }
        enforce_ph_with(self.eta, self.lambda_ep3, self.g_a_ep3, k, sign, DEFAULT_OMEGA_B * k)
    }
}

/// Real characteristic cubic in `x = Omega + omega_b` for a parameter set
/// with r1 = r2 = 0 and r3 taken as zero.
///
/// `c2 = (eta-1) Delta_a`,
/// `c1 = G_a^2 + G_c^2 - eta Delta_a^2 + (1+eta+eta^2) kappa_c^2`,
/// `c0 = (eta G_a^2 - G_c^2) Delta_a - (1+eta)^2 (1-eta) kappa_c^2 Delta_a`.
/// The exact cubic of the matrix differs only by `i kappa_c r3` in `c0`.
pub fn ph_characteristic(r: &ReducedParams) -> CubicCoefficients {
    let (eta, d, k2) = (r.eta, r.delta_a, r.kappa_c * r.kappa_c);
    let (ga2, gc2) = (r.g_a * r.g_a, r.g_c * r.g_c);
    CubicCoefficients::real(
        (eta - 1.0) * d,
        ga2 + gc2 - eta * d * d + (1.0 + eta + eta * eta) * k2,
        (eta * ga2 - gc2) * d - (1.0 + eta) * (1.0 + eta) * (1.0 - eta) * k2 * d,
    )
}

/// Classification thresholds. `eps_d`, `eps_a` and `eps_b` apply to
/// `D / s^6`, `A / s^2` and `B / s^3`, where `s` is the larger of `kappa_c`
/// and the natural root scale `max(|c2|, |c1|^(1/2), |c0|^(1/3))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eps_d: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub ph: PhTolerance,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_d: 1e-8, eps_a: 1e-6, eps_b: 1e-6, ph: PhTolerance::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpClass {
    ThreeReal,
    OneRealPair,
    Ep2,
    Ep3,
}

impl EpClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::ThreeReal => "three_real",
            Self::OneRealPair => "one_real_pair",
            Self::Ep2 => "ep2",
            Self::Ep3 => "ep3",
        }
    }
}

/// A class together with the discriminant that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: EpClass,
    /// A, B, C, D in `kappa_c` units.
    pub report: DiscriminantReport,
    /// Root scale `s` in `kappa_c` units.
    pub scale: f64,
}

impl Classification {
    /// The report divided by powers of the root scale, as compared to the thresholds.
    pub fn scaled(&self) -> DiscriminantReport {
        self.report.normalized(self.scale)
    }
}

/// Classify a real cubic whose coefficients are in units of `kappa_c`.
pub fn classify_coefficients(c: &CubicCoefficients, kappa_c: f64, tol: &Tolerances) -> Classification {
    let report = DiscriminantReport::from_real(c.c2.re, c.c1.re, c.c0.re).normalized(kappa_c);
    let scale = 1f64
        .max(c.c2.re.abs() / kappa_c)
        .max((c.c1.re.abs() / (kappa_c * kappa_c)).sqrt())
        .max((c.c0.re.abs() / kappa_c.powi(3)).cbrt());
    let s = report.normalized(scale);
    let class = if s.D.abs() <= tol.eps_d {
        if s.A.abs() <= tol.eps_a && s.B.abs() <= tol.eps_b {
            EpClass::Ep3
        } else {
            EpClass::Ep2
        }
    } else if s.D < 0.0 {
        EpClass::ThreeReal
    } else {
        EpClass::OneRealPair
    };
    Classification { class, report, scale }
}

/// Classify a parameter set by the discriminant of [`ph_characteristic`].
///
/// r1 and r2 must vanish within `tol.ph`; r3 is not checked, so the
/// coupling-plane diagrams can classify points off the r3 = 0 surface.
pub fn classify_point(r: &ReducedParams, tol: &Tolerances) -> Result<Classification> {
    r.validate()?;
    let res = ph_residuals(r);
    if !res.linear_ok(r.kappa_c, &tol.ph) {
        return Err(Error::NotApplicable(format!(
            "discriminant classification needs r1 = r2 = 0, got r1 = {:e}, r2 = {:e}",
            res.r1, res.r2
        )));
    }
    Ok(classify_coefficients(&ph_characteristic(r), r.kappa_c, tol))
}

/// A coalescence located on a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpLocation {
    pub axis_value: f64,
    pub class: EpClass,
    /// Mean of the coalescing roots (all three for an EP3).
    pub coalesced: ComplexValue,
    /// The root that does not take part; `None` for an EP3.
    pub spectator: Option<ComplexValue>,
    /// Roots sorted by real then imaginary part.
    pub roots: [ComplexValue; 3],
    /// Indices into `roots` of the closest pair.
    pub pair: (usize, usize),
    pub classification: Classification,
}

fn discriminant_at(path: &ParamPath, v: f64) -> Option<f64> {
    let r = path.at(v).ok()?;
    let c = ph_characteristic(&r);
    let d = DiscriminantReport::from_real(c.c2.re, c.c1.re, c.c0.re).normalized(r.kappa_c).D;
    d.is_finite().then_some(d)
}

fn sorted_roots(mut roots: [ComplexValue; 3]) -> [ComplexValue; 3] {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

fn locate(path: &ParamPath, v: f64, tol: &Tolerances) -> Result<EpLocation> {
    let r = path.at(v)?;
    let classification = classify_point(&r, tol)?;
    let roots = sorted_roots(solve_cubic(&ph_characteristic(&r))?);
    let pair = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .min_by(|&(a, b), &(c, d)| (roots[a] - roots[b]).norm().total_cmp(&(roots[c] - roots[d]).norm()))
        .unwrap_or((0, 1));
    let (coalesced, spectator) = if classification.class == EpClass::Ep3 {
        ((roots[0] + roots[1] + roots[2]) / 3.0, None)
    } else {
        ((roots[pair.0] + roots[pair.1]) / 2.0, Some(roots[3 - pair.0 - pair.1]))
    };
    Ok(EpLocation { axis_value: v, class: classification.class, coalesced, spectator, roots, pair, classification })
}

fn resolution(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

fn bisect(path: &ParamPath, mut lo: f64, mut hi: f64, mut d_lo: f64) -> f64 {
    let mut d_hi = f64::NAN;
    for _ in 0..BISECTION_LIMIT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(d) = discriminant_at(path, mid) else { break };
        if d == 0.0 {
            return mid;
        }
        if (d < 0.0) == (d_lo < 0.0) {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
            d_hi = d;
        }
    }
    if d_hi.is_nan() || d_lo.abs() <= d_hi.abs() {
        lo
    } else {
        hi
    }
}

fn golden_min_abs(path: &ParamPath, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let f = |v: f64| discriminant_at(path, v).map_or(f64::INFINITY, f64::abs);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_LIMIT {
        if b - a <= resolution(0.5 * (a + b)) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Coalescences of the real characteristic cubic along `path` for axis
/// values in `[from, to]`.
///
/// `D` is scanned on a uniform grid of `grid` points. Sign changes are
/// refined by bisection; interior local minima of `|D|` where `D` keeps
/// its sign (the tangency at an EP3) are refined by golden-section search
/// and kept only if they classify as EP2 or EP3. Points where the path is
/// infeasible are skipped. Results are sorted by axis value.
///
/// ```
/// use optoep::ep_locator::{find_ep2, Tolerances, DEFAULT_EP_GRID};
/// use optoep::pseudo_hermitian::{ParamFamily, ParamPath, SweepAxis};
///
/// let path = ParamPath::new(ParamFamily::balanced(10.0, 0.0), SweepAxis::GA);
/// let hits = find_ep2(&path, 0.0, 6.0, DEFAULT_EP_GRID, &Tolerances::default()).unwrap();
/// let g: Vec<f64> = hits.iter().map(|h| h.axis_value).collect();
/// assert!((g[0] - 2.99).abs() < 0.01 && (g[1] - 3.60).abs() < 0.01);
/// ```
pub fn find_ep2(path: &ParamPath, from: f64, to: f64, grid: usize, tol: &Tolerances) -> Result<Vec<EpLocation>> {
    ensure_finite("range start", from)?;
    ensure_finite("range end", to)?;
    if grid < 2 {
        return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {grid}")));
    }
    if path.gamma_offset != 0.0 {
        return Err(Error::NotApplicable("EP2 search needs r1 = 0; the path has a rate offset".into()));
    }
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    if lo == hi {
        return Ok(Vec::new());
    }
    let axis: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let values: Vec<Option<f64>> = axis.iter().map(|&v| discriminant_at(path, v)).collect();

    let mut candidates = Vec::new();
    for i in 0..grid {
        let Some(d) = values[i] else { continue };
        if d == 0.0 {
            candidates.push(axis[i]);
            continue;
        }
        if let Some(Some(next)) = values.get(i + 1) {
            if *next != 0.0 && (d < 0.0) != (*next < 0.0) {
                candidates.push(bisect(path, axis[i], axis[i + 1], d));
            }
        }
        if i > 0 && i + 1 < grid {
            if let (Some(prev), Some(next)) = (values[i - 1], values[i + 1]) {
                let same_sign = (prev < 0.0) == (d < 0.0) && (next < 0.0) == (d < 0.0);
                if same_sign && d.abs() <= prev.abs() && d.abs() < next.abs() {
                    candidates.push(golden_min_abs(path, axis[i - 1], axis[i + 1]));
                }
            }
        }
    }

    let mut hits: Vec<EpLocation> = Vec::new();
    for v in candidates {
        let hit = locate(path, v, tol)?;
        if !matches!(hit.class, EpClass::Ep2 | EpClass::Ep3) {
            continue;
        }
        hits.push(hit);
    }
    hits.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    let step = (hi - lo) / (grid - 1) as f64;
    hits.dedup_by(|b, a| (b.axis_value - a.axis_value).abs() <= 1e-9 * step.max(1.0));
    Ok(hits)
}
