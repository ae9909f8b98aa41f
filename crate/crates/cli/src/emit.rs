//! Deterministic CSV/JSON assembly and output writing.
//!
//! Every floating-point value is printed through one formatter with 12
//! significant digits, and object fields keep their declaration order, so
//! identical inputs produce byte-identical output.

use crate::config::RunConfig;
use crate::Failure;

/// Canonical number format shared by CSV and JSON emission.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// JSON literal for one number. JSON has no non-finite literals, so those
/// are emitted as strings.
pub fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        format!("\"{x}\"")
    }
}

/// JSON string literal with the escapes that can actually occur in error
/// messages and paths.
pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `{"a":1,"b":2}` from preformatted value literals, in slice order.
pub fn json_object(fields: &[(&str, String)]) -> String {
    let body: Vec<String> =
        fields.iter().map(|(key, value)| format!("{}:{value}", json_str(key))).collect();
    format!("{{{}}}", body.join(","))
}

/// `[x,y,z]` from preformatted element literals.
pub fn json_array<I: IntoIterator<Item = String>>(elements: I) -> String {
    let body: Vec<String> = elements.into_iter().collect();
    format!("[{}]", body.join(","))
}

/// `key,value` CSV from preformatted value strings, in slice order.
pub fn kv_csv(fields: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (key, value) in fields {
        out.push_str(&format!("{key},{value}\n"));
    }
    out
}

/// Write to the configured output path, or stdout when none is set.
pub fn write(cfg: &RunConfig, content: &str) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_twelve_significant_digits() {
        assert_eq!(num(7.0), "7.00000000000e0");
        assert_eq!(num(0.1), "1.00000000000e-1");
        assert_eq!(num(-2.4048255576957731), "-2.40482555770e0");
    }

    #[test]
    fn json_handles_non_finite_and_escapes() {
        assert_eq!(json_num(f64::INFINITY), "\"inf\"");
        assert_eq!(json_str("a\"b\\c\nd"), "\"a\\\"b\\\\c\\nd\"");
    }

    #[test]
    fn object_and_csv_preserve_field_order() {
        let fields = [("b", "1".to_string()), ("a", "2".to_string())];
        assert_eq!(json_object(&fields), "{\"b\":1,\"a\":2}");
        assert_eq!(kv_csv(&fields), "key,value\nb,1\na,2\n");
    }
}
