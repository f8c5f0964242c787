//! Text output of floating-point numbers: every value is rounded to 12
//! significant digits, then printed in its shortest round-trip form.

use serde::Serialize;
use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

pub fn num(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 {
        // no negative zero in output files
        return "0.0".into();
    }
    format!("{r:?}")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r })
                .map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded like [`num`], newline-terminated.
pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("output serializes");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(2.0), "2.0");
        assert_eq!(num(-0.0), "0.0");
        assert_eq!(num(123456789012345.0), "123456789012000.0");
        assert_eq!(num(1e-20), "1e-20");
    }

    #[test]
    fn json_floats_are_rounded() {
        let s = json(&serde_json::json!({"a": [0.1 + 0.2, 1], "b": {"c": 2.0 / 3.0}}));
        assert!(s.contains("0.3,") || s.contains("0.3\n"), "{s}");
        assert!(s.contains("0.666666666667"));
        assert!(s.contains(" 1\n"), "integers stay integers: {s}");
    }
}
