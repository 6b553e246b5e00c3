//! CSV rendering. Numbers use the shortest decimal that round-trips, so
//! identical runs give byte-identical files.

use std::fmt::Write;

use optoep::complex_poly::DiscriminantReport;
use optoep::ComplexValue;

pub const SWEEP_HEADER: &str = "axis,re_x1,im_x1,re_x2,im_x2,re_x3,im_x3,D,A,B,class";
pub const PHASE_HEADER: &str = "p1,p2,D,A,B,sign_D,class";
pub const CONTOUR_HEADER: &str = "level_name,segment_id,p1,p2";

pub fn num(v: f64) -> String {
    // Debug for f64 prints the shortest string that parses back exactly,
    // switching to exponent form for very small and very large magnitudes
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Accumulates CSV text row by row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { text: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn eigen_fields(x: Option<&[ComplexValue; 3]>) -> Vec<String> {
    match x {
        Some(x) => x.iter().flat_map(|z| [num(z.re), num(z.im)]).collect(),
        None => vec![String::new(); 6],
    }
}

pub fn report_fields(r: Option<&DiscriminantReport>) -> Vec<String> {
    match r {
        Some(r) => vec![num(r.D), num(r.A), num(r.B)],
        None => vec![String::new(); 3],
    }
}
