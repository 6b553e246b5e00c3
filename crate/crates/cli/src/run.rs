//! Executes a [`RunConfig`] and renders its outputs in memory.

use std::path::PathBuf;

use optoep::com_model::{build_h_eff, reduce, rwa_validity, spectrum, steady_state, DEFAULT_RWA_THRESHOLD};
use optoep::ep_locator::{classify_point, ep3_criticals, Tolerances};
use optoep::pseudo_hermitian::{ParamFamily, ParamPath, SweepAxis};
use optoep::stability::stability_report;
use optoep::sweep::{
    broken_ph_sweep, eigen_sweep, match_branches, path_is_pseudo_hermitian, phase_diagram, AxisSpec, BranchSet,
    PhaseDiagram, SweepOptions,
};
use optoep::{ComplexValue, Error};
use serde_json::json;

use crate::config::{Format, PointSpec, RunConfig, SweepTask, Task};
use crate::output::{eigen_fields, num, report_fields, Csv, CONTOUR_HEADER, PHASE_HEADER, SWEEP_HEADER};

/// Failure of a run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, unreadable files.
    Usage(String),
    Library(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Library(e) => match e {
                Error::InvalidInput(_) | Error::NotApplicable(_) | Error::Ep3InfeasibleEta(_) | Error::UndefinedLambda => 2,
                Error::InfeasibleCoupling { .. } | Error::InfeasibleLambda { .. } => 3,
                Error::NumericFailure { .. } => 4,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Library(e)
    }
}

/// One rendered file; `path = None` means standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub path: Option<PathBuf>,
    pub text: String,
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Rendered>, CliError> {
    let k = cfg.kappa_c;
    if !(k.is_finite() && k > 0.0) {
        return Err(CliError::Usage(format!("kappa_c must be positive and finite, got {k}")));
    }
    let main = |text: String| Rendered { path: cfg.output.clone(), text };
    let json_text = |v: serde_json::Value| serde_json::to_string_pretty(&v).expect("values serialize") + "\n";
    match &cfg.task {
        Task::Ep3 { eta } => Ok(vec![main(json_text(json!(ep3_criticals(*eta, k)?)))]),
        Task::Sweep { sweep } => {
            let path = sweep_path(sweep, k);
            let b = eigen_sweep(&path, sweep.from * k, sweep.to * k, sweep.n, &sweep_options(sweep, &cfg.tolerances))?;
            Ok(vec![main(render_branches(&path, &b, cfg, false)?)])
        }
        Task::Broken { sweep, offset } => {
            let path = sweep_path(sweep, k);
            let opts = sweep_options(sweep, &cfg.tolerances);
            let b = broken_ph_sweep(&path, sweep.from * k, sweep.to * k, sweep.n, offset * k, &opts)?;
            Ok(vec![main(render_branches(&path.with_offset(offset * k), &b, cfg, true)?)])
        }
        Task::Phase { mode, p1, p2, contours } => {
            let mut d = phase_diagram(*mode, *p1, *p2, &cfg.tolerances)?;
            for w in &d.warnings {
                eprintln!("warning: {w}");
            }
            scale_diagram(&mut d, k);
            let mut out = vec![main(match cfg.format {
                Format::Csv => phase_csv(&d),
                Format::Json => json_text(json!(d)),
            })];
            if let Some(path) = contours {
                out.push(Rendered { path: Some(path.clone()), text: contour_csv(&d) });
            }
            Ok(out)
        }
        Task::Stability { point } => {
            let r = match *point {
                PointSpec::Family { family, g_a, offset, omega_b } => ParamPath::new(family, SweepAxis::GA)
                    .with_kappa_c(k)
                    .with_omega_b(omega_b * k)
                    .with_offset(offset * k)
                    .at(g_a * k)?,
                PointSpec::Explicit { params } => params.scaled(k),
            };
            let s = stability_report(&r)?;
            let c = s.char_coeffs;
            let v = json!({
                "c0": c[0], "c1": c[1], "c2": c[2], "c3": c[3], "c4": c[4], "c5": c[5],
                "rh_stable": s.rh_stable,
                "eigen_stable": s.eigen_stable,
                "max_real_part": s.max_real_part,
            });
            Ok(vec![main(json_text(v))])
        }
        Task::Steady { params, convention } => {
            let p = params.scaled(k);
            let s = steady_state(&p)?;
            let r = reduce(&p, &s, *convention)?;
            let x = spectrum(&build_h_eff(&r), r.omega_b)?;
            let v = json!({
                "steady_state": s,
                "reduced": r,
                "x": x.0,
                "rwa": rwa_validity(&r, DEFAULT_RWA_THRESHOLD),
            });
            Ok(vec![main(json_text(v))])
        }
    }
}

fn sweep_path(s: &SweepTask, k: f64) -> ParamPath {
    let family = match s.family {
        ParamFamily::Free { eta, lambda, g_a, delta_a } => {
            ParamFamily::Free { eta, lambda, g_a: g_a * k, delta_a: delta_a * k }
        }
        f @ ParamFamily::Enforced { .. } => f,
    };
    ParamPath::new(family, s.axis).with_kappa_c(k).with_omega_b(s.omega_b * k)
}

fn sweep_options(s: &SweepTask, tol: &Tolerances) -> SweepOptions {
    let mut opts = SweepOptions { tolerances: *tol, ..SweepOptions::default() };
    if let Some(g) = s.gap_threshold {
        opts.gap_threshold = g;
    }
    opts
}

struct Row {
    axis: f64,
    // grid rows sort before event rows at the same axis value
    event: bool,
    fields: Vec<String>,
}

/// Grid rows plus one row per coalescence (and, for broken sweeps, per gap
/// minimum), ordered along the sweep direction.
fn render_branches(path: &ParamPath, b: &BranchSet, cfg: &RunConfig, broken: bool) -> Result<String, CliError> {
    if cfg.format == Format::Json {
        return Ok(serde_json::to_string_pretty(b).expect("branch sets serialize") + "\n");
    }
    let mut rows: Vec<Row> = b
        .points
        .iter()
        .map(|p| {
            let mut fields = vec![num(p.axis_value)];
            fields.extend(eigen_fields(p.x.as_ref()));
            fields.extend(report_fields(p.report.as_ref()));
            fields.push(p.class.map_or(String::new(), |c| c.name().to_string()));
            Row { axis: p.axis_value, event: false, fields }
        })
        .collect();

    let ph = path_is_pseudo_hermitian(path);
    let mut events: Vec<(f64, String)> = b
        .coalescences
        .iter()
        .map(|c| (c.axis_value, c.class.map_or("coalescence", |c| c.name()).to_string()))
        .collect();
    if broken {
        events.extend(b.dips.iter().map(|d| (d.axis_value, "gap_min".to_string())));
    }
    for (v, label) in events {
        let r = path.at(v)?;
        let x = spectrum(&build_h_eff(&r), r.omega_b)?.0;
        // follow the branch order of the nearest grid point
        let near = b
            .points
            .iter()
            .filter(|p| p.x.is_some())
            .min_by(|p, q| (p.axis_value - v).abs().total_cmp(&(q.axis_value - v).abs()));
        let x: [ComplexValue; 3] = match near.and_then(|p| p.x) {
            Some(prev) => match_branches(&prev, &x),
            None => x,
        };
        let report = if ph { Some(classify_point(&r, &cfg.tolerances)?.report) } else { None };
        let mut fields = vec![num(v)];
        fields.extend(eigen_fields(Some(&x)));
        fields.extend(report_fields(report.as_ref()));
        fields.push(label);
        rows.push(Row { axis: v, event: true, fields });
    }
    let ascending = b.points.first().zip(b.points.last()).is_none_or(|(f, l)| f.axis_value <= l.axis_value);
    rows.sort_by(|p, q| {
        let ord = p.axis.total_cmp(&q.axis);
        let ord = if ascending { ord } else { ord.reverse() };
        ord.then(p.event.cmp(&q.event))
    });
    let mut csv = Csv::new(SWEEP_HEADER);
    for r in &rows {
        csv.row(&r.fields);
    }
    Ok(csv.finish())
}

fn scale_diagram(d: &mut PhaseDiagram, k: f64) {
    if k == 1.0 {
        return;
    }
    let pt = |p: &mut (f64, f64)| {
        p.0 *= k;
        p.1 *= k;
    };
    let axis = |a: &mut AxisSpec| {
        a.min *= k;
        a.max *= k;
    };
    axis(&mut d.p1);
    axis(&mut d.p2);
    for c in &mut d.cells {
        c.p1 *= k;
        c.p2 *= k;
    }
    for contour in [&mut d.d_contour, &mut d.a_contour, &mut d.b_contour] {
        for s in &mut contour.segments {
            pt(&mut s.start);
            pt(&mut s.end);
        }
        for line in &mut contour.polylines {
            line.iter_mut().for_each(pt);
        }
    }
    for m in &mut d.ep3_markers {
        m.p1 *= k;
        m.p2 *= k;
    }
}

fn phase_csv(d: &PhaseDiagram) -> String {
    let mut csv = Csv::new(PHASE_HEADER);
    for c in &d.cells {
        let mut fields = vec![num(c.p1), num(c.p2)];
        fields.extend(report_fields(c.report.as_ref()));
        fields.push(c.sign_d().map_or(String::new(), |s| s.to_string()));
        fields.push(c.class.map_or("infeasible", |c| c.name()).to_string());
        csv.row(&fields);
    }
    csv.finish()
}

/// Two rows per segment (start, end); EP3 markers follow as one row each
/// under the level name `ep3`.
fn contour_csv(d: &PhaseDiagram) -> String {
    let mut csv = Csv::new(CONTOUR_HEADER);
    for (name, contour) in [("D", &d.d_contour), ("A", &d.a_contour), ("B", &d.b_contour)] {
        for (id, s) in contour.segments.iter().enumerate() {
            for p in [s.start, s.end] {
                csv.row(&[name.to_string(), id.to_string(), num(p.0), num(p.1)]);
            }
        }
    }
    for (id, m) in d.ep3_markers.iter().enumerate() {
        csv.row(&["ep3".to_string(), id.to_string(), num(m.p1), num(m.p2)]);
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use optoep::pseudo_hermitian::DetuningSign;
    use optoep::sweep::PhaseMode;

    fn cfg(task: Task) -> RunConfig {
        RunConfig { kappa_c: 1.0, tolerances: Tolerances::default(), output: None, format: Format::Csv, task }
    }

    fn balanced_sweep(delta_a: f64, from: f64, to: f64, n: usize) -> Task {
        Task::Sweep {
            sweep: SweepTask {
                family: ParamFamily::balanced(delta_a, 0.0),
                axis: SweepAxis::GA,
                from,
                to,
                n,
                omega_b: 50.0,
                gap_threshold: None,
            },
        }
    }

    #[test]
    fn exit_codes() {
        let code = |e: Error| CliError::from(e).exit_code();
        assert_eq!(code(Error::Ep3InfeasibleEta(-0.4)), 2);
        assert_eq!(code(Error::InfeasibleLambda { eta: -1.1, lambda: 0.1 }), 3);
        assert_eq!(code(Error::InfeasibleCoupling { g_a: 0.1, g_min: 0.3 }), 3);
        assert_eq!(code(Error::NumericFailure { message: String::new(), residual: 1.0 }), 4);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
    }

    #[test]
    fn sweep_rows_include_coalescences() {
        let out = run(&cfg(balanced_sweep(10.0, 0.0, 6.0, 64))).unwrap();
        let text = &out[0].text;
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        let ep2: Vec<f64> =
            lines.iter().filter(|l| l.ends_with(",ep2")).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(ep2.len(), 2);
        assert!((ep2[0] - 2.98934).abs() < 1e-4 && (ep2[1] - 3.60858).abs() < 1e-4);
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 11));
        let axis: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert!(axis.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kappa_scaling_scales_axes_and_eigenvalues() {
        let base = run(&cfg(balanced_sweep(10.0, 0.0, 6.0, 16))).unwrap();
        let mut c = cfg(balanced_sweep(10.0, 0.0, 6.0, 16));
        c.kappa_c = 2.0;
        let scaled = run(&c).unwrap();
        for (a, b) in base[0].text.lines().zip(scaled[0].text.lines()).skip(1) {
            let (a, b): (Vec<&str>, Vec<&str>) = (a.split(',').collect(), b.split(',').collect());
            for i in 0..7 {
                let (x, y): (f64, f64) = (a[i].parse().unwrap(), b[i].parse().unwrap());
                assert!((2.0 * x - y).abs() <= 1e-9 * (1.0 + y.abs()), "{x} {y}");
            }
            assert_eq!(a[10], b[10]);
        }
    }

    #[test]
    fn broken_rows_mark_gap_minima() {
        let task = Task::Broken {
            sweep: SweepTask {
                family: ParamFamily::balanced(27f64.sqrt(), 0.0),
                axis: SweepAxis::GA,
                from: 1.5,
                to: 2.5,
                n: 101,
                omega_b: 50.0,
                gap_threshold: None,
            },
            offset: 0.1,
        };
        let out = run(&cfg(task)).unwrap();
        let mins: Vec<&str> = out[0].text.lines().filter(|l| l.ends_with(",gap_min")).collect();
        assert!(!mins.is_empty());
        assert!(out[0].text.lines().skip(1).all(|l| l.contains(",,,")), "no discriminant off the pseudo-Hermitian set");
    }

    #[test]
    fn stability_json_fields() {
        let task = Task::Stability {
            point: PointSpec::Family {
                family: ParamFamily::Enforced { eta: -1.1, lambda: 1.2, sign: DetuningSign::Positive },
                g_a: 2.0,
                offset: 0.0,
                omega_b: 50.0,
            },
        };
        let out = run(&cfg(task)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out[0].text).unwrap();
        for key in ["c0", "c1", "c2", "c3", "c4", "c5", "rh_stable", "eigen_stable", "max_real_part"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        // c5 = 2 (kappa_a + gamma_b + kappa_c) = 0 on the pseudo-Hermitian set
        assert!(v["c5"].as_f64().unwrap().abs() < 1e-12);
        assert_eq!(v["rh_stable"], false);
    }

    #[test]
    fn phase_outputs() {
        let mut c = cfg(Task::Phase {
            mode: PhaseMode::Balanced,
            p1: AxisSpec::new(-6.0, 6.0, 33),
            p2: AxisSpec::new(-10.0, 10.0, 33),
            contours: Some(PathBuf::from("contours.csv")),
        });
        c.output = Some(PathBuf::from("phase.csv"));
        let out = run(&c).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text.lines().count(), 1 + 33 * 33);
        assert!(out[1].text.starts_with(CONTOUR_HEADER));
        assert!(out[1].text.lines().any(|l| l.starts_with("ep3,")));
    }
}
