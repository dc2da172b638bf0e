//! JSON and CSV interchange.
//!
//! JSON written here is canonical: object keys sorted, floats printed with 17
//! significant digits, arrays of scalars kept on one line. Loading and saving
//! a canonical file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::asf::{DualPair, Exponent, Field, LpSpace};
use crate::continuous::{ContinuousAsf, FiniteMeasure};
use crate::error::{Error, Result};
use crate::numkernel::DenseMatrix;
use crate::optimize::SearchResult;

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarDoc {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarDoc {
    fn value(&self) -> Complex64 {
        match *self {
            ScalarDoc::Real(re) => Complex64::new(re, 0.0),
            ScalarDoc::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExponentDoc {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
struct PairDoc {
    field: Field,
    dim: usize,
    p: ExponentDoc,
    vectors: Vec<Vec<ScalarDoc>>,
    functionals: Vec<Vec<ScalarDoc>>,
}

#[derive(Deserialize)]
struct CasfDoc {
    pair: Value,
    measure: FiniteMeasure,
}

fn parse_exponent(doc: &ExponentDoc) -> Result<Exponent> {
    match doc {
        ExponentDoc::Number(p) => Exponent::new(*p),
        ExponentDoc::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad exponent {s:?}")))
                .and_then(Exponent::new),
        },
    }
}

/// Parses `"inf"`, `"infinity"` or a number.
pub fn parse_exponent_str(s: &str) -> Result<Exponent> {
    parse_exponent(&ExponentDoc::Text(s.to_string()))
}

fn pair_from_doc(doc: PairDoc) -> Result<DualPair> {
    let space = LpSpace::new(doc.dim, parse_exponent(&doc.p)?, doc.field)?;
    let rows = |r: &[Vec<ScalarDoc>]| -> Vec<Vec<Complex64>> {
        r.iter().map(|row| row.iter().map(ScalarDoc::value).collect()).collect()
    };
    DualPair::from_rows(space, &rows(&doc.vectors), &rows(&doc.functionals))
}

pub fn pair_from_value(v: Value) -> Result<DualPair> {
    pair_from_doc(serde_json::from_value(v)?)
}

pub fn pair_from_json(text: &str) -> Result<DualPair> {
    pair_from_doc(serde_json::from_str(text)?)
}

pub fn casf_from_json(text: &str) -> Result<ContinuousAsf> {
    let doc: CasfDoc = serde_json::from_str(text)?;
    let pair = pair_from_value(doc.pair)?;
    let measure = FiniteMeasure::new(doc.measure.atoms, doc.measure.weights)?;
    ContinuousAsf::new(measure, pair)
}

pub fn read_pair(path: &Path) -> Result<DualPair> {
    pair_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_casf(path: &Path) -> Result<ContinuousAsf> {
    casf_from_json(&std::fs::read_to_string(path)?)
}

fn scalar_value(z: Complex64, field: Field) -> Value {
    match field {
        Field::Real => json!(z.re),
        Field::Complex => json!([z.re, z.im]),
    }
}

fn rows_value(m: &DenseMatrix, field: Field) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(|&z| scalar_value(z, field)).collect()))
            .collect(),
    )
}

pub fn exponent_value(p: Exponent) -> Value {
    match p {
        Exponent::Infinity => json!("inf"),
        Exponent::Finite(p) => json!(p),
    }
}

pub fn pair_to_value(pair: &DualPair) -> Value {
    let sp = pair.space();
    json!({
        "field": sp.field,
        "dim": sp.dim,
        "p": exponent_value(sp.p),
        "vectors": rows_value(pair.vectors(), sp.field),
        "functionals": rows_value(pair.functionals(), sp.field),
    })
}

pub fn pair_to_json(pair: &DualPair) -> String {
    to_canonical_string(&pair_to_value(pair))
}

pub fn casf_to_value(casf: &ContinuousAsf) -> Value {
    json!({
        "pair": pair_to_value(casf.pair()),
        "measure": casf.measure(),
    })
}

pub fn casf_to_json(casf: &ContinuousAsf) -> String {
    to_canonical_string(&casf_to_value(casf))
}

/// The pair JSON with an extra `"search"` block; it still loads as a pair.
pub fn search_result_to_value(r: &SearchResult) -> Value {
    let mut v = pair_to_value(&r.pair);
    let search = json!({
        "objective": r.objective,
        "value": r.objective_value,
        "welch_gap": r.welch_gap,
        "feasibility": r.feasibility,
        "residuals": r.residuals,
        "seed": r.seed,
        "restart": r.restart,
        "iters": r.iters_used,
        "converged": r.converged,
    });
    v.as_object_mut().expect("pair JSON is an object").insert("search".into(), search);
    v
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Canonical JSON text with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Canonical JSON text of any serializable value.
pub fn canonical_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(to_canonical_string(&serde_json::to_value(value)?))
}

fn depth(v: &Value) -> Option<usize> {
    match v {
        Value::Object(_) => None,
        Value::Array(a) => a.iter().try_fold(1, |acc, x| depth(x).map(|d| acc.max(d + 1))),
        _ => Some(0),
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_f64() {
        let x = n.as_f64().expect("f64 number");
        write!(out, "{x:.16e}").unwrap();
    } else {
        write!(out, "{n}").unwrap();
    }
}

fn write_inline(out: &mut String, v: &Value) {
    match v {
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(out, x);
            }
            out.push(']');
        }
        Value::Number(n) => write_number(out, n),
        other => out.push_str(&other.to_string()),
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Object(map) => write_object(out, map, level),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            if depth(v).is_some_and(|d| d <= 2) {
                write_inline(out, v);
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, x, level + 1);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push(']');
        }
        other => write_inline(out, other),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, level: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    for (i, k) in keys.iter().enumerate() {
        indent(out, level + 1);
        out.push_str(&Value::String((*k).clone()).to_string());
        out.push_str(": ");
        write_value(out, &map[*k], level + 1);
        if i + 1 < keys.len() {
            out.push(',');
        }
        out.push('\n');
    }
    indent(out, level);
    out.push('}');
}

/// `re+imj` with shortest round-trip formatting of each part.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad complex literal {s:?}"));
    let body = s.trim().strip_suffix('j').ok_or_else(bad)?;
    // the split is the last sign that is not part of an exponent and not leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|&z| format_complex(z)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DenseMatrix> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(parse_complex).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
    }
    DenseMatrix::new(rows.len(), cols, rows.into_iter().flatten().collect())
}

/// Six significant digits, switching to exponent form outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..5).contains(&e) {
        format!("{:.*}", (5 - e) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn sig6_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        sig6(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", sig6(z.re), sign, sig6(z.im.abs()))
    }
}

/// Left-aligned text table with a header rule.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (c, cell) in r.iter().enumerate().take(cols) {
            width[c] = width[c].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate() {
            if c + 1 == cells.len() {
                s.push_str(cell);
            } else {
                let pad = width[c] - cell.chars().count();
                s.push_str(cell);
                s.push_str(&" ".repeat(pad + 2));
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut out, header.to_vec());
    line(&mut out, width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect());
    for r in rows {
        line(&mut out, r.iter().map(|s| s.as_str()).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pair_round_trip() {
        for pair in [fixtures::mercedes_benz(), fixtures::sic_d2(), fixtures::jordan_pair()] {
            let text = pair_to_json(&pair);
            let back = pair_from_json(&text).unwrap();
            assert_eq!(back, pair);
            assert_eq!(pair_to_json(&back), text);
        }
    }

    #[test]
    fn accepts_both_scalar_forms_and_inf() {
        let text = r#"{"field":"complex","dim":2,"p":"inf","vectors":[[1,[0,1]]],"functionals":[[[1,0],0]],"extra":1}"#;
        let pair = pair_from_json(text).unwrap();
        assert_eq!(pair.space().p, Exponent::Infinity);
        assert_eq!(pair.vector(0)[1], Complex64::new(0.0, 1.0));
        let bad = r#"{"field":"real","dim":2,"p":2,"vectors":[[1,0]],"functionals":[]}"#;
        assert!(pair_from_json(bad).is_err());
        let ragged = r#"{"field":"real","dim":2,"p":2,"vectors":[[1]],"functionals":[[1]]}"#;
        assert!(matches!(pair_from_json(ragged), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn casf_round_trip() {
        let casf = crate::continuous::partition_construction(&fixtures::mercedes_benz(), &[1.0, 2.0, 0.5]).unwrap();
        let text = casf_to_json(&casf);
        let back = casf_from_json(&text).unwrap();
        assert_eq!(casf_to_json(&back), text);
    }

    #[test]
    fn canonical_layout() {
        let text = to_canonical_string(&json!({"b": [1.5, 2], "a": {"z": [[1.0, 0.0]]}}));
        assert_eq!(text, "{\n  \"a\": {\n    \"z\": [[1.0000000000000000e0, 0.0000000000000000e0]]\n  },\n  \"b\": [1.5000000000000000e0, 2]\n}\n");
    }

    #[test]
    fn complex_text() {
        for z in [Complex64::new(1.5, -0.25), Complex64::new(-1e-20, 3e10), Complex64::new(0.0, 0.0), Complex64::new(-2.0, -0.0)] {
            let s = format_complex(z);
            let back = parse_complex(&s).unwrap();
            assert_eq!(back, z, "{s}");
        }
        assert_eq!(format_complex(Complex64::new(1.5, 0.0)), "1.5+0j");
        assert!(parse_complex("1.5").is_err());
        let m = fixtures::sic_d2().gram();
        assert_eq!(matrix_from_csv(&matrix_to_csv(&m)).unwrap(), m);
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.25), "0.250000");
        assert_eq!(sig6(3.375), "3.37500");
        assert_eq!(sig6(123456.7), "1.23457e5");
        assert_eq!(sig6(1e-7), "1.00000e-7");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn table_alignment() {
        let t = table(&["a", "bbb"], &[vec!["xx".into(), "y".into()]]);
        assert_eq!(t, "a   bbb\n--  ---\nxx  y\n");
    }
}
