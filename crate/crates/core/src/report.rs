//! JSON helpers shared by every report: numbers rounded to 15 significant
//! digits, complex values as `{"re", "im"}`, infinities as strings.

use num_complex::Complex64;
use serde_json::{json, Value};

/// Rounds to 15 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// A real number; `±inf` becomes `"inf"` / `"-inf"` and NaN becomes `null`.
pub fn real(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        json!(round_sig(x))
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": real(z.re), "im": real(z.im) })
}

pub fn reals<'a>(xs: impl IntoIterator<Item = &'a f64>) -> Value {
    Value::Array(xs.into_iter().map(|&x| real(x)).collect())
}

pub fn complexes<'a>(zs: impl IntoIterator<Item = &'a Complex64>) -> Value {
    Value::Array(zs.into_iter().map(|&z| complex(z)).collect())
}

/// Pretty JSON with object keys in sorted order.
pub fn to_pretty(v: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys already come out sorted
    serde_json::to_string_pretty(v).expect("Value serialization is infallible")
}

/// Rewrites every number in a serialized value with [`real`].
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => real(x),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}
