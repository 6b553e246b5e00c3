use serde::{Deserialize, Serialize};

use crate::com_model::{build_h_eff, spectrum};
use crate::complex_poly::{min_pairwise_distance, ComplexValue, DiscriminantReport};
use crate::ep_locator::{classify_point, find_ep2, EpClass, EpLocation, Tolerances, DEFAULT_EP_GRID};
use crate::error::{ensure_finite, Error, Result};
use crate::pseudo_hermitian::{ParamFamily, ParamPath, SweepAxis, BALANCED_ETA_TOL};

/// Default number of points in a one-dimensional sweep.
pub const DEFAULT_SWEEP_POINTS: usize = 1024;

const GOLDEN_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    /// Gap (in the units of the path) below which a gap minimum counts as a coalescence.
    pub gap_threshold: f64,
    /// Grid used by the discriminant search on pseudo-Hermitian paths.
    pub ep_grid: usize,
    pub tolerances: Tolerances,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { gap_threshold: 1e-3, ep_grid: DEFAULT_EP_GRID, tolerances: Tolerances::default() }
    }
}

/// Spectrum and classification at one axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    /// Eigenvalues `x = Omega + omega_b` in branch order; `None` if the point failed.
    pub x: Option<[ComplexValue; 3]>,
    /// Discriminant in `kappa_c` units; only on pseudo-Hermitian paths.
    pub report: Option<DiscriminantReport>,
    pub class: Option<EpClass>,
    pub error: Option<String>,
}

/// A coalescence found on the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coalescence {
    pub axis_value: f64,
    /// Mean of the coalescing eigenvalues.
    pub x: ComplexValue,
    pub gap: f64,
    /// Discriminant class when the path admits one.
    pub class: Option<EpClass>,
}

/// A local minimum of the smallest eigenvalue gap, refined between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapDip {
    pub axis_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSet {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub coalescences: Vec<Coalescence>,
    pub dips: Vec<GapDip>,
}

impl BranchSet {
    /// Values of branch `k` at the points that succeeded.
    pub fn branch(&self, k: usize) -> Vec<(f64, ComplexValue)> {
        self.points.iter().filter_map(|p| p.x.map(|x| (p.axis_value, x[k]))).collect()
    }
}

/// True when the path keeps all three pseudo-Hermiticity residuals at zero,
/// so the characteristic cubic is real everywhere along it.
pub fn path_is_pseudo_hermitian(path: &ParamPath) -> bool {
    if path.gamma_offset != 0.0 {
        return false;
    }
    match path.family {
        ParamFamily::Enforced { .. } => true,
        ParamFamily::Free { eta, lambda, .. } => (eta + 1.0).abs() < BALANCED_ETA_TOL && lambda.abs() == 1.0,
    }
}

fn eigenvalues(path: &ParamPath, v: f64) -> Result<[ComplexValue; 3]> {
    let r = path.at(v)?;
    let x = spectrum(&build_h_eff(&r), r.omega_b)?;
    Ok(x.0)
}

fn lexicographic(a: &ComplexValue, b: &ComplexValue) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Reorders `next` to follow `prev` with the least summed displacement;
/// ties go to the lexicographically smallest `(Re, Im)` sequence.
pub fn match_branches(prev: &[ComplexValue; 3], next: &[ComplexValue; 3]) -> [ComplexValue; 3] {
    let mut best: Option<(f64, [ComplexValue; 3])> = None;
    for perm in PERMUTATIONS {
        let cand = perm.map(|k| next[k]);
        let cost: f64 = (0..3).map(|i| (cand[i] - prev[i]).norm()).sum();
        let better = match &best {
            None => true,
            Some((c, b)) => {
                cost < *c
                    || (cost == *c
                        && cand.iter().zip(b.iter()).map(|(x, y)| lexicographic(x, y)).find(|o| o.is_ne())
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((cost, cand));
        }
    }
    best.map_or(*next, |(_, b)| b)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_LIMIT {
        if b - a <= 1e-12 * (0.5 * (a + b)).abs().max(1.0) {
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
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Eigenvalues along `path` at `n` evenly spaced axis values in `[from, to]`.
///
/// Values are in the units of the path. The first point is sorted by
/// `(Re, Im)` and each later one is matched to its predecessor by
/// [`match_branches`]. A point that fails keeps its error and is skipped by
/// the matching. On pseudo-Hermitian paths the coalescences come from
/// [`find_ep2`]; elsewhere they are gap minima below
/// `opts.gap_threshold`. Every interior gap minimum is listed in `dips`.
///
/// ```
/// use optoep::pseudo_hermitian::{ParamFamily, ParamPath, SweepAxis};
/// use optoep::sweep::{eigen_sweep, SweepOptions};
///
/// let path = ParamPath::new(ParamFamily::balanced(3.0 * 3f64.sqrt(), 0.0), SweepAxis::GA);
/// let b = eigen_sweep(&path, -4.0, 4.0, 256, &SweepOptions::default()).unwrap();
/// let at: Vec<f64> = b.coalescences.iter().map(|c| c.axis_value).collect();
/// assert!((at[0] + 2.0).abs() < 1e-6 && (at[1] - 2.0).abs() < 1e-6);
/// ```
pub fn eigen_sweep(path: &ParamPath, from: f64, to: f64, n: usize, opts: &SweepOptions) -> Result<BranchSet> {
    ensure_finite("range start", from)?;
    ensure_finite("range end", to)?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("a sweep needs at least 2 points, got {n}")));
    }
    let ph = path_is_pseudo_hermitian(path);
    let mut points = Vec::with_capacity(n);
    let mut prev: Option<[ComplexValue; 3]> = None;
    for i in 0..n {
        let v = from + (to - from) * i as f64 / (n - 1) as f64;
        let mut point = SweepPoint { axis_value: v, x: None, report: None, class: None, error: None };
        match eigenvalues(path, v) {
            Ok(mut x) => {
                x = match prev {
                    Some(p) => match_branches(&p, &x),
                    None => {
                        x.sort_by(lexicographic);
                        x
                    }
                };
                prev = Some(x);
                point.x = Some(x);
            }
            Err(e) => point.error = Some(e.to_string()),
        }
        if ph && point.x.is_some() {
            if let Ok(c) = path.at(v).and_then(|r| classify_point(&r, &opts.tolerances)) {
                point.report = Some(c.report);
                point.class = Some(c.class);
            }
        }
        points.push(point);
    }

    let gap_at = |v: f64| eigenvalues(path, v).map_or(f64::INFINITY, |x| min_pairwise_distance(&x));
    let gaps: Vec<f64> = points.iter().map(|p| p.x.map_or(f64::INFINITY, |x| min_pairwise_distance(&x))).collect();
    let mut dips = Vec::new();
    if from != to {
        for i in 1..n.saturating_sub(1) {
            if gaps[i].is_finite() && gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1] {
                let (v, gap) = golden_min(gap_at, points[i - 1].axis_value, points[i + 1].axis_value);
                dips.push(GapDip { axis_value: v, gap });
            }
        }
    }

    let coalescences = if from == to {
        Vec::new()
    } else if ph {
        find_ep2(path, from, to, opts.ep_grid, &opts.tolerances)?
            .iter()
            .map(|h: &EpLocation| {
                let gap = if h.class == EpClass::Ep3 {
                    0.0
                } else {
                    (h.roots[h.pair.0] - h.roots[h.pair.1]).norm()
                };
                Coalescence { axis_value: h.axis_value, x: h.coalesced, gap, class: Some(h.class) }
            })
            .collect()
    } else {
        dips.iter()
            .filter(|d| d.gap < opts.gap_threshold)
            .filter_map(|d| {
                let x = eigenvalues(path, d.axis_value).ok()?;
                let (i, j) = [(0, 1), (0, 2), (1, 2)]
                    .into_iter()
                    .min_by(|&(a, b), &(c, e)| (x[a] - x[b]).norm().total_cmp(&(x[c] - x[e]).norm()))?;
                Some(Coalescence { axis_value: d.axis_value, x: (x[i] + x[j]) / 2.0, gap: d.gap, class: None })
            })
            .collect()
    };

    Ok(BranchSet { axis: path.axis, points, coalescences, dips })
}

/// [`eigen_sweep`] with the resonator rate moved off the pseudo-Hermitian
/// value by `offset`, i.e. `kappa_a + gamma_b + kappa_c = offset`.
pub fn broken_ph_sweep(
    path: &ParamPath,
    from: f64,
    to: f64,
    n: usize,
    offset: f64,
    opts: &SweepOptions,
) -> Result<BranchSet> {
    ensure_finite("offset", offset)?;
    eigen_sweep(&path.with_offset(path.gamma_offset + offset), from, to, n, opts)
}

/// Axis value and size of the smallest eigenvalue gap over the sweep.
pub fn min_gap(b: &BranchSet) -> Result<(f64, f64)> {
    b.points
        .iter()
        .filter_map(|p| p.x.map(|x| (p.axis_value, min_pairwise_distance(&x))))
        .chain(b.dips.iter().map(|d| (d.axis_value, d.gap)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidInput("the branch set has no successful points".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ep_locator::ep3_criticals;
    use crate::pseudo_hermitian::DetuningSign;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    #[test]
    fn matching_follows_nearest() {
        let prev = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let next = [c(2.1, 0.0), c(-0.1, 0.0), c(0.9, 0.0)];
        assert_eq!(match_branches(&prev, &next), [c(-0.1, 0.0), c(0.9, 0.0), c(2.1, 0.0)]);
        // a triple coincidence ties every permutation
        let same = [c(1.0, 0.0); 3];
        assert_eq!(match_branches(&same, &[c(1.0, 1.0), c(1.0, -1.0), c(1.0, 0.0)])[0], c(1.0, -1.0));
    }

    #[test]
    fn balanced_ep3_sweep() {
        let path = ParamPath::new(ParamFamily::balanced(3.0 * 3f64.sqrt(), 0.0), SweepAxis::GA);
        let b = eigen_sweep(&path, -4.0, 4.0, DEFAULT_SWEEP_POINTS, &SweepOptions::default()).unwrap();
        assert_eq!(b.points.len(), DEFAULT_SWEEP_POINTS);
        assert_eq!(b.coalescences.len(), 2);
        for (co, g) in b.coalescences.iter().zip([-2.0, 2.0]) {
            assert!((co.axis_value - g).abs() < 1e-6);
            assert_eq!(co.class, Some(EpClass::Ep3));
            assert!((co.x.re - 2.0 * 3f64.sqrt()).abs() < 1e-4);
        }
        for p in &b.points {
            let x = p.x.unwrap();
            assert!((x[0].im + x[1].im + x[2].im).abs() <= 1e-8);
        }
    }

    #[test]
    fn multiset_preserved() {
        let path = ParamPath::new(ParamFamily::balanced(10.0, 0.0), SweepAxis::GA);
        let b = eigen_sweep(&path, 0.0, 6.0, 200, &SweepOptions::default()).unwrap();
        for p in &b.points {
            let mut got = p.x.unwrap();
            let mut want = eigenvalues(&path, p.axis_value).unwrap();
            got.sort_by(lexicographic);
            want.sort_by(lexicographic);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn loss_resonator_ep2() {
        let eta = -1.1;
        let lambda = 1.2 * ep3_criticals(eta, 1.0).unwrap().lambda_ep3;
        let path = ParamPath::new(ParamFamily::Enforced { eta, lambda, sign: DetuningSign::Positive }, SweepAxis::GA);
        let b = eigen_sweep(&path, -4.0, 4.0, DEFAULT_SWEEP_POINTS, &SweepOptions::default()).unwrap();
        assert!(b.points.iter().any(|p| p.error.is_some()));
        assert_eq!(b.coalescences.len(), 2, "{:?}", b.coalescences);
        for co in &b.coalescences {
            assert!((co.axis_value.abs() - 2.44).abs() < 0.02);
            assert!((co.x.re - 9.05).abs() < 0.05);
        }
    }

    #[test]
    fn zero_length_range() {
        let path = ParamPath::new(ParamFamily::balanced(10.0, 0.0), SweepAxis::GA);
        let b = eigen_sweep(&path, 3.0, 3.0, 2, &SweepOptions::default()).unwrap();
        assert_eq!(b.points[0].x, b.points[1].x);
        assert!(b.coalescences.is_empty() && b.dips.is_empty());
        assert!(eigen_sweep(&path, 0.0, 1.0, 1, &SweepOptions::default()).is_err());
    }

    #[test]
    fn zero_offset_matches_plain_sweep() {
        let path = ParamPath::new(ParamFamily::balanced(10.0, 0.0), SweepAxis::GA);
        let opts = SweepOptions::default();
        let plain = eigen_sweep(&path, 1.0, 5.0, 300, &opts).unwrap();
        let broken = broken_ph_sweep(&path, 1.0, 5.0, 300, 0.0, &opts).unwrap();
        assert_eq!(plain, broken);
    }

    #[test]
    fn broken_balanced_dips() {
        let path = ParamPath::new(ParamFamily::balanced(10.0, 0.0), SweepAxis::GA);
        let b = broken_ph_sweep(&path, 2.0, 4.5, DEFAULT_SWEEP_POINTS, 0.1, &SweepOptions::default()).unwrap();
        assert!(b.coalescences.is_empty());
        assert_eq!(b.dips.len(), 2, "{:?}", b.dips);
        assert!((b.dips[0].axis_value - 2.989).abs() < 0.01);
        assert!((b.dips[1].axis_value - 3.609).abs() < 0.01);
    }

    #[test]
    fn min_gap_examples() {
        let path = ParamPath::new(ParamFamily::balanced(3.0 * 3f64.sqrt(), 0.0), SweepAxis::GA);
        let b = eigen_sweep(&path, 1.0, 3.0, 101, &SweepOptions::default()).unwrap();
        let (g, gap) = min_gap(&b).unwrap();
        assert!((g - 2.0).abs() < 1e-6 && gap < 1e-4, "{g} {gap}");

        let flat = BranchSet {
            axis: SweepAxis::GA,
            points: (0..3)
                .map(|i| SweepPoint {
                    axis_value: i as f64,
                    x: Some([c(0.0, 0.0), c(1.5, 0.0), c(4.0, 0.0)]),
                    report: None,
                    class: None,
                    error: None,
                })
                .collect(),
            coalescences: Vec::new(),
            dips: Vec::new(),
        };
        assert_eq!(min_gap(&flat).unwrap().1, 1.5);
        let empty = BranchSet { points: Vec::new(), ..flat };
        assert!(min_gap(&empty).is_err());
    }
}
