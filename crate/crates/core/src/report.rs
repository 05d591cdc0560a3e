//! Output formatting shared by CSV and JSON writers.
//!
//! Floats are always written with 12 significant digits so that reruns
//! produce byte-identical files.

use serde_json::Value;

pub const SIG_DIGITS: usize = 12;

/// 12-significant-digit scientific notation, e.g. `7.74421643952e-1`.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    fmt_f64(x).parse().unwrap_or(x)
}

/// Rounds every float inside a JSON document to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Serializes a count as a JSON integer when it fits in 64 bits, else as a string.
pub fn ser_u128<S: serde::Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    match u64::try_from(*v) {
        Ok(x) => s.serialize_u64(x),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_string(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("JSON values always serialize");
    s.push('\n');
    s
}
