//! Output formatting helpers.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Wraps a `serde_json` formatter so that floats are written with [`fmt_g17`]
/// and non-finite values as `null`.
struct G17<F>(F);

fn write_g17<W: ?Sized + Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        w.write_all(fmt_g17(v).as_bytes())
    } else {
        w.write_all(b"null")
    }
}

macro_rules! delegate {
    ($($name:ident$(($arg:ident: $t:ty))?),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $t)?) -> io::Result<()> {
            self.0.$name(w $(, $arg)?)
        })*
    };
}

impl<F: Formatter> Formatter for G17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_g17(w, v)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_g17(w, v as f64)
    }

    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        end_object_key,
        begin_object_value,
        end_object_value,
    );
}

/// Serializes `value` as JSON with every float in `%.17g` form.
pub fn to_json_g17<T: Serialize + ?Sized>(value: &T, pretty: bool) -> String {
    let mut buf = Vec::new();
    let res = if pretty {
        value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, G17(PrettyFormatter::new())))
    } else {
        value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, G17(CompactFormatter)))
    };
    res.expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::{fmt_g17, to_json_g17};

    #[test]
    fn json_floats_use_seventeen_digits() {
        let v = serde_json::json!({"a": 0.1, "b": [1.0, f64::NAN], "n": 3});
        let s = to_json_g17(&v, false);
        assert_eq!(s, r#"{"a":0.10000000000000001,"b":[1,null],"n":3}"#);
        let back: serde_json::Value = serde_json::from_str(&to_json_g17(&v, true)).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn matches_printf_g17() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(2.17), "2.1699999999999999");
        assert_eq!(fmt_g17(-1.5e-7), "-1.4999999999999999e-07");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e-4), "0.0001");
    }

    #[test]
    fn round_trips() {
        for x in [std::f64::consts::PI, -7.123456789e-12, 9.87654321e15, 1.0 / 3.0] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
