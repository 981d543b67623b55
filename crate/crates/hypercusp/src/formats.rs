//! Text, JSON and CSV forms of multivectors, points and cosets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hypercusp_core::clifford::{grade, MAX_DIM};
use hypercusp_core::vahlen::{Coset, VahlenMatrix};
use hypercusp_core::{Complex64, Multivector, Paravector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: &'static str },
    #[error("blade index {0} exceeds the algebra dimension")]
    BladeOutOfRange(usize),
    #[error("dimension {0} is not supported")]
    BadDim(usize),
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected a point in the upper half-space: {0}")]
    Point(&'static str),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e.to_string())
    }
}

/// Blade name: "1" for the scalar, otherwise e.g. "e1e3".
pub fn blade_name(mask: usize) -> String {
    if mask == 0 {
        return "1".into();
    }
    let mut s = String::new();
    for i in 0..usize::BITS as usize {
        if mask >> i & 1 == 1 {
            let _ = write!(s, "e{}", i + 1);
        }
    }
    s
}

/// `1.0 + 2.0*e1 - 0.5*e1e2`. Zero coefficients are omitted; the zero
/// multivector prints as `0.0`.
pub fn mv_to_text(m: &Multivector) -> String {
    let mut out = String::new();
    for (mask, &c) in m.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mag = format!("{:?}", c.abs());
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        out.push_str(&mag);
        if mask != 0 {
            out.push('*');
            out.push_str(&blade_name(mask));
        }
    }
    if out.is_empty() {
        out.push_str("0.0");
    }
    out
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &'static str) -> FormatError {
        FormatError::Parse { pos: self.pos, msg }
    }

    fn number(&mut self) -> Result<f64, FormatError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            let prev = if self.pos > start { self.s[self.pos - 1] } else { 0 };
            let ok = b.is_ascii_digit()
                || b == b'.'
                || ((b == b'e' || b == b'E') && self.pos > start && self.s.get(self.pos + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+'))
                || ((b == b'-' || b == b'+') && (prev == b'e' || prev == b'E'));
            if !ok {
                break;
            }
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        txt.parse::<f64>().map_err(|_| FormatError::Parse { pos: start, msg: "expected a number" })
    }

    fn blade(&mut self) -> Result<(usize, usize), FormatError> {
        let mut mask = 0usize;
        let mut last = 0usize;
        while self.peek() == Some(b'e') {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
            let i: usize = std::str::from_utf8(&self.s[start..self.pos])
                .expect("ascii")
                .parse()
                .map_err(|_| FormatError::Parse { pos: start, msg: "expected a blade index" })?;
            if i == 0 || i <= last {
                return Err(FormatError::Parse { pos: start, msg: "blade indices must increase from 1" });
            }
            if i > MAX_DIM {
                return Err(FormatError::BladeOutOfRange(i));
            }
            mask |= 1 << (i - 1);
            last = i;
        }
        if mask == 0 {
            return Err(self.err("expected a blade"));
        }
        Ok((mask, last))
    }
}

/// Parses the text form. `dim` fixes the algebra; otherwise the largest
/// blade index is used.
pub fn mv_from_text(s: &str, dim: Option<usize>) -> Result<Multivector, FormatError> {
    let mut c = Cursor { s: s.as_bytes(), pos: 0 };
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut top = 0usize;
    c.skip_ws();
    if c.peek().is_none() {
        return Err(c.err("empty input"));
    }
    let mut first = true;
    while c.peek().is_some() {
        let mut sign = 1.0;
        match c.peek() {
            Some(b'+') => c.pos += 1,
            Some(b'-') => {
                sign = -1.0;
                c.pos += 1;
            }
            _ if first => {}
            _ => return Err(c.err("expected '+' or '-'")),
        }
        first = false;
        c.skip_ws();
        let (mask, coef) = if c.peek() == Some(b'e') {
            let (m, t) = c.blade()?;
            top = top.max(t);
            (m, 1.0)
        } else {
            let v = c.number()?;
            c.skip_ws();
            if c.peek() == Some(b'*') {
                c.pos += 1;
                c.skip_ws();
                let (m, t) = c.blade()?;
                top = top.max(t);
                (m, v)
            } else {
                (0, v)
            }
        };
        if !coef.is_finite() {
            return Err(FormatError::NonFinite);
        }
        terms.push((mask, sign * coef));
        c.skip_ws();
    }
    let n = dim.unwrap_or(top.max(1));
    if n == 0 || n > MAX_DIM {
        return Err(FormatError::BadDim(n));
    }
    if top > n {
        return Err(FormatError::BladeOutOfRange(top));
    }
    let mut m = Multivector::zero(n);
    for (mask, v) in terms {
        m.coeffs_mut()[mask] += v;
    }
    Ok(m)
}

/// `{"dim":3,"coeffs":{"0":1.0,"1":2.0,"3":-0.5}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvJson {
    pub dim: usize,
    pub coeffs: BTreeMap<String, f64>,
}

impl MvJson {
    /// Keeps every coefficient that is not +0.0, so −0.0 survives the round trip.
    pub fn from_mv(m: &Multivector) -> Self {
        let coeffs = m
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.to_bits() != 0)
            .map(|(i, &c)| (i.to_string(), c))
            .collect();
        Self { dim: m.dim(), coeffs }
    }

    pub fn to_mv(&self) -> Result<Multivector, FormatError> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(FormatError::BadDim(self.dim));
        }
        let mut m = Multivector::zero(self.dim);
        for (k, &v) in &self.coeffs {
            let mask: usize = k.parse().map_err(|_| FormatError::Json(format!("bad blade key {k:?}")))?;
            if mask >= 1 << self.dim {
                return Err(FormatError::BladeOutOfRange(mask));
            }
            if !v.is_finite() {
                return Err(FormatError::NonFinite);
            }
            m.coeffs_mut()[mask] = v;
        }
        Ok(m)
    }
}

pub fn mv_to_json(m: &Multivector) -> String {
    serde_json::to_string(&MvJson::from_mv(m)).expect("serializable")
}

pub fn mv_from_json(s: &str) -> Result<Multivector, FormatError> {
    serde_json::from_str::<MvJson>(s)?.to_mv()
}

pub fn mv_value(m: &Multivector) -> Value {
    serde_json::to_value(MvJson::from_mv(m)).expect("serializable")
}

/// Complex multivector as {"re": ..., "im": ...}.
pub fn cmv_value(m: &Multivector<Complex64>) -> Value {
    json!({ "re": mv_value(&m.re()), "im": mv_value(&m.im()) })
}

/// A point is either a coordinate array [x0, …, xn] or a multivector JSON
/// record whose only components are 1, e1, …, en.
pub fn point_from_value(v: &Value) -> Result<Paravector, FormatError> {
    let p = match v {
        Value::Array(a) => {
            let c: Vec<f64> = a
                .iter()
                .map(|x| x.as_f64().ok_or(FormatError::Point("coordinates must be numbers")))
                .collect::<Result<_, _>>()?;
            if c.len() < 2 || c.len() > MAX_DIM + 1 {
                return Err(FormatError::Point("need between 2 and MAX_DIM+1 coordinates"));
            }
            Paravector::new(&c)
        }
        Value::Object(_) => {
            let m = serde_json::from_value::<MvJson>(v.clone())?.to_mv()?;
            if m.coeffs().iter().enumerate().any(|(i, &c)| grade(i) > 1 && c != 0.0) {
                return Err(FormatError::Point("not a paravector"));
            }
            Paravector::from_mv(&m)
        }
        _ => return Err(FormatError::Point("expected an array or a multivector record")),
    };
    if !p.is_finite() {
        return Err(FormatError::NonFinite);
    }
    if p.xn() <= 0.0 {
        return Err(FormatError::Point("x_n must be positive"));
    }
    Ok(p)
}

/// One point, or an array of points.
pub fn points_from_json(s: &str) -> Result<Vec<Paravector>, FormatError> {
    let v: Value = serde_json::from_str(s)?;
    match &v {
        Value::Array(a) if a.first().is_some_and(|x| x.is_array() || x.is_object()) => a.iter().map(point_from_value).collect(),
        _ => Ok(vec![point_from_value(&v)?]),
    }
}

pub fn point_value(p: &Paravector) -> Value {
    json!(p.coords())
}

pub fn matrix_value(m: &VahlenMatrix) -> Value {
    json!({ "a": mv_value(&m.a), "b": mv_value(&m.b), "c": mv_value(&m.c), "d": mv_value(&m.d) })
}

/// Array of {c, d, representative} records.
pub fn cosets_value(cosets: &[Coset]) -> Value {
    Value::Array(
        cosets
            .iter()
            .map(|c| json!({ "c": mv_value(&c.key.c), "d": mv_value(&c.key.d), "representative": matrix_value(&c.rep) }))
            .collect(),
    )
}

/// A JSON number, or "inf", "-inf", "nan" for non-finite values.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Minimal CSV table. Numbers are written in shortest round-trip form.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| format!("{v:?}")).collect());
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Header for point coordinates and 2^n coefficient columns.
pub fn point_coeff_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
    h.extend((0..1usize << n).map(blade_name));
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_example() {
        let m = mv_from_text("1.0 + 2.0*e1 - 0.5*e1e2", Some(3)).unwrap();
        assert_eq!(m.coeffs()[..4], [1.0, 2.0, 0.0, -0.5]);
        assert_eq!(mv_to_text(&m), "1.0 + 2.0*e1 - 0.5*e1e2");
    }

    #[test]
    fn text_edge_cases() {
        let m = mv_from_text("-e2 + 1e-3*e1e3 - 2.5e+2", None).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.get(2), -1.0);
        assert_eq!(m.get(5), 1e-3);
        assert_eq!(m.scalar_part(), -250.0);
        assert_eq!(mv_to_text(&Multivector::zero(2)), "0.0");
        assert!(mv_from_text("e2e1", None).is_err());
        assert!(mv_from_text("1.0 2.0", None).is_err());
        assert!(mv_from_text("e4", Some(3)).is_err());
        assert!(mv_from_text("", None).is_err());
    }

    #[test]
    fn json_example() {
        let m = mv_from_json(r#"{"dim":3,"coeffs":{"0":1.0,"1":2.0,"3":-0.5}}"#).unwrap();
        assert_eq!(m, mv_from_text("1.0 + 2.0*e1 - 0.5*e1e2", Some(3)).unwrap());
        assert!(mv_from_json(r#"{"dim":2,"coeffs":{"4":1.0}}"#).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let vals = [0.1, -0.0, 1e-310, f64::MAX, -f64::MIN_POSITIVE, 1.0 / 3.0, 0.0, 123_456_789.123_456_79];
        let m = Multivector::from_coeffs(3, vals.to_vec()).unwrap();
        let back = mv_from_json(&mv_to_json(&m)).unwrap();
        for (a, b) in m.coeffs().iter().zip(back.coeffs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn points() {
        let p = points_from_json("[0.1, 0.2, 1.5]").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].xn(), 1.5);
        let ps = points_from_json(r#"[[0.0, 1.0], {"dim":1,"coeffs":{"1":2.0}}]"#).unwrap();
        assert_eq!(ps[1].xn(), 2.0);
        assert!(points_from_json("[0.0, -1.0]").is_err());
        assert!(points_from_json(r#"{"dim":2,"coeffs":{"3":1.0}}"#).is_err());
    }

    #[test]
    fn csv_render() {
        let mut t = CsvTable::new(point_coeff_header(1));
        t.push_numbers(&[0.5, 1.0, 2.0, -0.25]);
        assert_eq!(t.render(), "x0,x1,1,e1\n0.5,1.0,2.0,-0.25\n");
    }
}
