//! Deterministic CSV output.
//!
//! One format for reals everywhere: 17 significant digits, '.' decimal,
//! LF line endings. Identical configs must produce byte-identical bodies;
//! the only run-dependent line is the leading version comment, which
//! comparisons are expected to skip.

use std::fmt::Write as _;

pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub enum Field {
    Int(i128),
    Real(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Real(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i128)
    }
}

impl From<u128> for Field {
    fn from(x: u128) -> Self {
        Field::Int(x as i128)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x as i128)
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# bindweed {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(buf, "{header}");
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[Field]) {
        let line: Vec<String> = fields
            .iter()
            .map(|f| match f {
                Field::Int(i) => i.to_string(),
                Field::Real(x) => fmt_real(*x),
                Field::Text(t) => t.clone(),
            })
            .collect();
        let _ = writeln!(self.buf, "{}", line.join(","));
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}
