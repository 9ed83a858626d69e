//! Canonical JSON: sorted keys, numbers rounded to 12 significant digits,
//! no negative zero, non-finite values as `null`.

use serde_json::{Map, Number, Value};

use crate::geometry::{Matrix, Vector};

pub const SIG_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn num(x: f64) -> Value {
    let r = round_sig(x);
    let r = if r == 0.0 { 0.0 } else { r };
    Number::from_f64(r).map_or(Value::Null, Value::Number)
}

pub fn vec_json(v: &Vector) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn mat_json(m: &Matrix) -> Value {
    Value::Array((0..m.nrows()).map(|r| Value::Array(m.row(r).iter().map(|&x| num(x)).collect())).collect())
}

pub fn vecs_json(vs: &[Vector]) -> Value {
    Value::Array(vs.iter().map(vec_json).collect())
}

/// Re-rounds every float in `v` (idempotent on already canonical values).
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Pretty-printed document; `serde_json::Map` keeps keys sorted.
pub fn render(v: Value) -> String {
    serde_json::to_string_pretty(&canonical(v)).expect("JSON values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_and_zero() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(0.9999999999999996), 1.0);
        assert_eq!(num(-0.0).to_string(), "0.0");
        assert_eq!(num(-1e-300 * 1e-300).to_string(), "0.0");
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(round_sig(123456.7890123456), 123456.789012);
    }

    #[test]
    fn keys_are_sorted() {
        let s = render(json!({"b": 1, "a": {"z": 0.30000000000000004, "c": [-0.0]}}));
        assert_eq!(s, "{\n  \"a\": {\n    \"c\": [\n      0.0\n    ],\n    \"z\": 0.3\n  },\n  \"b\": 1\n}");
    }
}
