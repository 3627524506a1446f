//! Lenient JSON extraction from model replies.
//!
//! Models rarely emit bare JSON; replies come wrapped in prose or fenced
//! in ```json blocks. The rule here: take the last balanced `{...}` block
//! that parses as a JSON object.

use serde_json::Value;

/// The last parseable JSON object anywhere in `text`, if any.
pub fn extract_last_json_object(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    let mut best: Option<Value> = None;
    let mut i = 0usize;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(end) = balanced_end(bytes, i) {
                if let Ok(value) = serde_json::from_slice::<Value>(&bytes[i..=end]) {
                    if value.is_object() {
                        best = Some(value);
                        i = end + 1;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    best
}

/// Index of the brace closing the block opened at `start`, honoring string
/// literals and escapes.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + offset);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_object() {
        let v = extract_last_json_object(r#"{"a": 1}"#).unwrap();
        assert_eq!(v["a"], 1);
    }

    #[test]
    fn fenced_object() {
        let text = "Sure, here you go:\n```json\n{\"Claim\": \"x\"}\n```\nHope that helps!";
        let v = extract_last_json_object(text).unwrap();
        assert_eq!(v["Claim"], "x");
    }

    #[test]
    fn last_of_several_wins() {
        let text = r#"first {"a": 1} then {"b": 2}"#;
        let v = extract_last_json_object(text).unwrap();
        assert!(v.get("b").is_some());
        assert!(v.get("a").is_none());
    }

    #[test]
    fn braces_inside_strings_do_not_confuse() {
        let text = r#"{"text": "a { tricky } value", "n": 3}"#;
        let v = extract_last_json_object(text).unwrap();
        assert_eq!(v["n"], 3);
    }

    #[test]
    fn malformed_outer_falls_back_to_inner() {
        let text = r#"{broken json {"inner": true}"#;
        let v = extract_last_json_object(text).unwrap();
        assert_eq!(v["inner"], true);
    }

    #[test]
    fn none_when_no_object() {
        assert!(extract_last_json_object("just prose, no braces").is_none());
        assert!(extract_last_json_object("unbalanced { here").is_none());
    }
}
