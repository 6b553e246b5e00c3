use serde::{Deserialize, Serialize};

use super::contour::{segment_intersection, zero_contour, Contour};
use crate::com_model::{ReducedParams, DEFAULT_OMEGA_B};
use crate::complex_poly::DiscriminantReport;
use crate::ep_locator::{classify_coefficients, ph_characteristic, EpClass, Tolerances};
use crate::error::{ensure_finite, Error, Result};
use crate::pseudo_hermitian::{enforce_ph_balanced, DetuningSign, BALANCED_ETA_TOL};

/// Default raster size per axis.
pub const DEFAULT_PHASE_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    fn validate(&self, name: &str) -> Result<()> {
        ensure_finite(name, self.min)?;
        ensure_finite(name, self.max)?;
        if self.count < 2 {
            return Err(Error::InvalidInput(format!("{name} needs at least 2 points, got {}", self.count)));
        }
        Ok(())
    }
}

/// Which plane the diagram covers. All values are in units of `kappa_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseMode {
    /// `eta = -1`, `lambda = 1`; axes `(G_a, Delta_a)`.
    Balanced,
    /// Fixed `eta`; axes `(G_a, G_c)`, with `Delta_a` from r3 = 0.
    Unbalanced { eta: f64, sign: DetuningSign },
}

impl PhaseMode {
    pub fn axis_names(&self) -> (&'static str, &'static str) {
        match self {
            Self::Balanced => ("g_a", "delta_a"),
            Self::Unbalanced { .. } => ("g_a", "g_c"),
        }
    }

    /// The parameter set at `(p1, p2)`, or `None` where r3 = 0 has no real detuning.
    pub fn params(&self, p1: f64, p2: f64) -> Option<ReducedParams> {
        match *self {
            Self::Balanced => Some(enforce_ph_balanced(p2, p1, 1.0)),
            Self::Unbalanced { eta, sign } => {
                let delta_sq = -(p1 * p1 + eta * p2 * p2) / (eta * (1.0 + eta)) - 1.0;
                (delta_sq >= 0.0).then(|| {
                    let delta_a = sign.apply(delta_sq.sqrt());
                    ReducedParams {
                        eta,
                        g_a: p1,
                        g_c: p2,
                        delta_a,
                        delta_c: -eta * delta_a,
                        kappa_c: 1.0,
                        gamma_b: -(1.0 + eta),
                        omega_b: DEFAULT_OMEGA_B,
                    }
                })
            }
        }
    }
}

/// One raster cell; `class` is `None` for infeasible cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCell {
    pub p1: f64,
    pub p2: f64,
    pub report: Option<DiscriminantReport>,
    pub class: Option<EpClass>,
}

impl PhaseCell {
    /// -1, 0 or 1, or `None` for infeasible cells.
    pub fn sign_d(&self) -> Option<i8> {
        self.report.map(|r| if r.D > 0.0 { 1 } else if r.D < 0.0 { -1 } else { 0 })
    }
}

/// An A = 0, B = 0 crossing, i.e. an EP3 within grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ep3Marker {
    pub p1: f64,
    pub p2: f64,
    /// Distance, in cells, to the nearest extracted D = 0 segment. D = B^2 - 4AC
    /// vanishes wherever A and B do, but the D < 0 region ends in a cusp at
    /// an EP3 that a raster resolves only a few cells away; `None` if D has
    /// no zero contour at all.
    pub d_contour_cells: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub mode: PhaseMode,
    pub p1: AxisSpec,
    pub p2: AxisSpec,
    /// Row-major: `cells[j * p1.count + i]`.
    pub cells: Vec<PhaseCell>,
    pub d_contour: Contour,
    pub a_contour: Contour,
    pub b_contour: Contour,
    pub ep3_markers: Vec<Ep3Marker>,
    pub warnings: Vec<String>,
}

/// Discriminant raster, zero contours of D, A and B, and EP3 markers.
///
/// ```
/// use optoep::ep_locator::Tolerances;
/// use optoep::sweep::{phase_diagram, AxisSpec, PhaseMode};
///
/// let d = phase_diagram(
///     PhaseMode::Balanced,
///     AxisSpec::new(0.0, 6.0, 64),
///     AxisSpec::new(0.0, 20.0, 64),
///     &Tolerances::default(),
/// )
/// .unwrap();
/// let m = &d.ep3_markers[0];
/// assert!((m.p1 - 2.0).abs() < 0.1 && (m.p2 - 27f64.sqrt()).abs() < 0.35);
/// ```
pub fn phase_diagram(mode: PhaseMode, p1: AxisSpec, p2: AxisSpec, tol: &Tolerances) -> Result<PhaseDiagram> {
    p1.validate("p1 axis")?;
    p2.validate("p2 axis")?;
    if let PhaseMode::Unbalanced { eta, .. } = mode {
        ensure_finite("eta", eta)?;
        if eta == 0.0 || (eta + 1.0).abs() < BALANCED_ETA_TOL {
            return Err(Error::InvalidInput(format!("unbalanced diagram needs eta other than 0 and -1, got {eta}")));
        }
    }
    let (xs, ys) = (p1.values(), p2.values());
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            let cell = match mode.params(x, y) {
                Some(r) => {
                    let c = classify_coefficients(&ph_characteristic(&r), 1.0, tol);
                    PhaseCell { p1: x, p2: y, report: Some(c.report), class: Some(c.class) }
                }
                None => PhaseCell { p1: x, p2: y, report: None, class: None },
            };
            cells.push(cell);
        }
    }

    let field = |f: fn(&DiscriminantReport) -> f64| -> Vec<f64> {
        cells.iter().map(|c| c.report.as_ref().map_or(f64::NAN, f)).collect()
    };
    let d_contour = zero_contour(&xs, &ys, &field(|r| r.D));
    let a_contour = zero_contour(&xs, &ys, &field(|r| r.A));
    let b_contour = zero_contour(&xs, &ys, &field(|r| r.B));

    let mut ep3_markers: Vec<Ep3Marker> = Vec::new();
    let cell_size = p1.step().abs().hypot(p2.step().abs());
    for a in &a_contour.segments {
        for b in b_contour.segments.iter().filter(|b| b.cell == a.cell) {
            let Some((x, y)) = segment_intersection(a, b) else { continue };
            if ep3_markers.iter().any(|m| (m.p1 - x).hypot(m.p2 - y) <= cell_size) {
                continue;
            }
            let (h1, h2) = (p1.step().abs(), p2.step().abs());
            let d_contour_cells = d_contour
                .segments
                .iter()
                .flat_map(|d| [d.start, d.end])
                .map(|(u, v)| ((u - x) / h1).hypot((v - y) / h2))
                .min_by(f64::total_cmp);
            ep3_markers.push(Ep3Marker { p1: x, p2: y, d_contour_cells });
        }
    }

    let mut warnings = Vec::new();
    if cells.iter().all(|c| c.class.is_none()) {
        warnings.push("every cell is infeasible: r3 = 0 has no real detuning on this grid".to_string());
    }
    Ok(PhaseDiagram { mode, p1, p2, cells, d_contour, a_contour, b_contour, ep3_markers, warnings })
}
