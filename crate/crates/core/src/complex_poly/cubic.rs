use std::f64::consts::PI;

use super::{ComplexValue, CubicCoefficients, DiscriminantReport};
use crate::error::{Error, Result};

/// All three roots of `x^3 + c2 x^2 + c1 x + c0 = 0`.
///
/// Exactly real coefficients go through a real-arithmetic path, so a cubic
/// with `D < 0` returns three roots with zero imaginary part and one with
/// `D > 0` returns a real root plus an exact conjugate pair. Complex
/// coefficients use Cardano's formula in complex arithmetic. Either way one
/// root is taken from the closed form (the cube-root branch of largest
/// magnitude), the other two come from the deflated quadratic, and each root
/// gets a guarded Newton polish.
///
/// Repeated roots are not merged; see [`super::root_multiplicities`].
///
/// ```
/// use optoep::complex_poly::{solve_cubic, CubicCoefficients};
///
/// let roots = solve_cubic(&CubicCoefficients::real(-6.0, 11.0, -6.0)).unwrap();
/// let mut re: Vec<f64> = roots.iter().map(|r| r.re).collect();
/// re.sort_by(f64::total_cmp);
/// assert!((re[0] - 1.0).abs() < 1e-12 && (re[2] - 3.0).abs() < 1e-12);
/// ```
pub fn solve_cubic(c: &CubicCoefficients) -> Result<[ComplexValue; 3]> {
    if !c.is_finite() {
        return Err(Error::InvalidInput("cubic coefficients must be finite".into()));
    }
    let roots = if c.c2.im == 0.0 && c.c1.im == 0.0 && c.c0.im == 0.0 {
        solve_real(c.c2.re, c.c1.re, c.c0.re)
    } else {
        solve_complex(c)
    };
    if roots.iter().any(|r| !(r.re.is_finite() && r.im.is_finite())) {
        return Err(Error::NumericFailure {
            message: "cubic solver produced a non-finite root".into(),
            residual: f64::NAN,
        });
    }
    Ok(roots)
}

fn eval_real(c2: f64, c1: f64, c0: f64, x: f64) -> f64 {
    ((x + c2) * x + c1) * x + c0
}

fn polish_real(c2: f64, c1: f64, c0: f64, mut x: f64) -> f64 {
    let mut fx = eval_real(c2, c1, c0, x);
    for _ in 0..4 {
        let d = (3.0 * x + 2.0 * c2) * x + c1;
        if fx == 0.0 || d == 0.0 {
            break;
        }
        let next = x - fx / d;
        let f_next = eval_real(c2, c1, c0, next);
        if f_next.abs() < fx.abs() {
            x = next;
            fx = f_next;
        } else {
            break;
        }
    }
    x
}

fn polish(c: &CubicCoefficients, mut x: ComplexValue) -> ComplexValue {
    let mut fx = c.eval(x).norm();
    for _ in 0..4 {
        let d = c.derivative(x);
        if fx == 0.0 || d.norm() == 0.0 {
            break;
        }
        let next = x - c.eval(x) / d;
        let f_next = c.eval(next).norm();
        if f_next < fx {
            x = next;
            fx = f_next;
        } else {
            break;
        }
    }
    x
}

/// Product of the two remaining roots once `x1` is known. Of the two
/// algebraically equal forms, use the one that does not divide by a small root.
fn remaining_product<T>(x1: T, c1: T, c0: T, linear: T) -> T
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Div<Output = T>
        + std::ops::Neg<Output = T>
        + Magnitude,
{
    let from_sum = c1 + x1 * linear;
    if x1.magnitude() > 0.0 && x1.magnitude() * x1.magnitude() >= from_sum.magnitude() {
        -c0 / x1
    } else {
        from_sum
    }
}

trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for ComplexValue {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

fn solve_real(c2: f64, c1: f64, c0: f64) -> [ComplexValue; 3] {
    let report = DiscriminantReport::from_real(c2, c1, c0);
    let shift = c2 / 3.0;
    let p = (3.0 * c1 - c2 * c2) / 3.0;
    let q = (2.0 * c2 * c2 * c2 - 9.0 * c2 * c1 + 27.0 * c0) / 27.0;

    if p == 0.0 && q == 0.0 {
        return [ComplexValue::new(-shift, 0.0); 3];
    }

    if report.D <= 0.0 {
        // Three real roots: trigonometric form, deflate on the largest one.
        let x1 = if p < 0.0 {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
                .fold(f64::NAN, |best, x| if best.is_nan() || x.abs() > best.abs() { x } else { best })
        } else {
            (-q).cbrt() - shift
        };
        let x1 = polish_real(c2, c1, c0, x1);
        let linear = c2 + x1;
        let product = remaining_product(x1, c1, c0, linear);
        let disc = (linear * linear - 4.0 * product).max(0.0);
        let w = -0.5 * (linear + disc.sqrt().copysign(linear));
        let (x2, x3) = if w != 0.0 { (w, product / w) } else { (0.0, -linear) };
        [x1, polish_real(c2, c1, c0, x2), polish_real(c2, c1, c0, x3)].map(|x| ComplexValue::new(x, 0.0))
    } else {
        // One real root from the stable Cardano branch, then a conjugate pair.
        let h = (q * q / 4.0 + p * p * p / 27.0).max(0.0);
        let u = (-0.5 * q - h.sqrt().copysign(q)).cbrt();
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let x1 = polish_real(c2, c1, c0, t - shift);
        let linear = c2 + x1;
        let product = remaining_product(x1, c1, c0, linear);
        let disc = linear * linear - 4.0 * product;
        let x1c = ComplexValue::new(x1, 0.0);
        if disc < 0.0 {
            let pair = ComplexValue::new(-0.5 * linear, 0.5 * (-disc).sqrt());
            let pair = polish(&CubicCoefficients::real(c2, c1, c0), pair);
            [x1c, pair, pair.conj()]
        } else {
            let w = -0.5 * (linear + disc.sqrt().copysign(linear));
            let (x2, x3) = if w != 0.0 { (w, product / w) } else { (0.0, -linear) };
            [x1c, ComplexValue::new(polish_real(c2, c1, c0, x2), 0.0), ComplexValue::new(polish_real(c2, c1, c0, x3), 0.0)]
        }
    }
}

fn solve_complex(c: &CubicCoefficients) -> [ComplexValue; 3] {
    let (c2, c1, c0) = (c.c2, c.c1, c.c0);
    let delta0 = c2 * c2 - c1 * 3.0;
    let delta1 = c2 * c2 * c2 * 2.0 - c2 * c1 * 9.0 + c0 * 27.0;
    let s = (delta1 * delta1 - delta0 * delta0 * delta0 * 4.0).sqrt();
    let plus = (delta1 + s) * 0.5;
    let minus = (delta1 - s) * 0.5;
    let cubed = if plus.norm() >= minus.norm() { plus } else { minus };
    if cubed.norm() == 0.0 {
        return [-c2 / 3.0; 3];
    }
    let base = ComplexValue::from_polar(cubed.norm().cbrt(), cubed.arg() / 3.0);
    let x1 = (0..3)
        .map(|k| {
            let ck = base * ComplexValue::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
            -(c2 + ck + delta0 / ck) / 3.0
        })
        .fold(None, |best: Option<ComplexValue>, x| match best {
            Some(b) if b.norm() >= x.norm() => Some(b),
            _ => Some(x),
        })
        .unwrap_or(-c2 / 3.0);
    let x1 = polish(c, x1);
    let linear = c2 + x1;
    let product = remaining_product(x1, c1, c0, linear);
    let mut sq = (linear * linear - product * 4.0).sqrt();
    if (linear.conj() * sq).re < 0.0 {
        sq = -sq;
    }
    let w = -(linear + sq) * 0.5;
    let (x2, x3) = if w.norm() != 0.0 { (w, product / w) } else { (w, -linear - w) };
    [x1, polish(c, x2), polish(c, x3)]
}
