//! Deterministic number formatting for CSV and JSON outputs.

use serde::Serialize;
use serde_json::Value;

/// Twelve significant digits in scientific notation, e.g. `4.93296249718e0`.
/// Non-finite values print as `nan`, `inf` or `-inf`.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `x` rounded to twelve significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt12(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to twelve significant digits and a
/// trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// CSV text from a header and rows of already formatted cells.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(4.932962497177735), "4.93296249718e0");
        assert_eq!(fmt12(3.0781917084516815e-96), "3.07819170845e-96");
        assert_eq!(fmt12(0.0), "0.00000000000e0");
        assert_eq!(fmt12(f64::NAN), "nan");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn json_floats_are_rounded() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            n: usize,
            v: Vec<f64>,
        }
        let s = to_json(&S { a: 1.0 / 3.0, n: 7, v: vec![2.0 / 3.0, f64::NAN] });
        assert!(s.contains("0.333333333333,"), "{s}");
        assert!(s.contains("\"n\": 7"));
        assert!(s.contains("null"));
    }

    #[test]
    fn csv_layout() {
        let t = to_csv(&["a", "b"], &[vec!["1".into(), "x".into()]]);
        assert_eq!(t, "a,b\n1,x\n");
    }
}
