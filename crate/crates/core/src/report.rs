//! JSON report types. Exact rationals are written as `"p/q"` strings.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serializer;

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(r))
}

pub(crate) fn ser_rational_pair<S: Serializer>(
    r: &(BigRational, BigRational),
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&ratio_string(&r.0))?;
    seq.serialize_element(&ratio_string(&r.1))?;
    seq.end()
}

pub(crate) fn ser_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

pub(crate) fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq([z.re, z.im])
}

/// Scientific decimal with `digits` significant digits, rounded to nearest.
pub fn decimal_string(r: &BigRational, digits: usize) -> String {
    use num_traits::{Signed, ToPrimitive, Zero};
    if r.is_zero() {
        return "0".into();
    }
    let digits = digits.max(1);
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow10 = |e: i64| -> BigRational { ten.pow(e as i32) };
    let approx = a.numer().to_f64().unwrap_or(f64::MAX).log10() - a.denom().to_f64().unwrap_or(f64::MAX).log10();
    let mut e = if approx.is_finite() { approx.floor() as i64 } else { 0 };
    while a >= pow10(e + 1) {
        e += 1;
    }
    while a < pow10(e) {
        e -= 1;
    }
    let scaled = (&a * pow10(digits as i64 - 1 - e)).round().to_integer();
    let mut text = scaled.to_string();
    if text.len() > digits {
        text.truncate(digits);
        e += 1;
    }
    let (head, tail) = text.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

/// The domain parameters echoed at the top of every report.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    pub n: u32,
}

impl Config {
    pub fn of(domain: &crate::geometry::DomainSpec) -> Self {
        match domain.exponent() {
            Some(e) => Self {
                m: Some(e.m()),
                l: Some(e.l()),
                gamma: None,
                n: domain.n(),
            },
            None => Self {
                m: None,
                l: None,
                gamma: Some(domain.gamma().label()),
                n: domain.n(),
            },
        }
    }
}

/// Leaves of a JSON value as `(dotted.path, text)` pairs in document order.
pub fn flatten_json(value: &serde_json::Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            serde_json::Value::Object(map) => map.iter().for_each(|(k, x)| walk(&join(k), x, out)),
            serde_json::Value::Array(items) => {
                items.iter().enumerate().for_each(|(i, x)| walk(&join(&i.to_string()), x, out))
            }
            serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}
