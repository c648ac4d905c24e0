use anyhow::Result;
use serde::Serialize;

use crate::Format;

/// Structured text (TOML) or flattened `key,value` CSV.
pub fn render<T: Serialize>(value: &T, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(toml::to_string(value)?),
        Format::Csv => {
            let tree = toml::Value::try_from(value)?;
            let mut rows = Vec::new();
            flatten("", &tree, &mut rows);
            let mut out = String::from("key,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{v}\n"));
            }
            Ok(out)
        }
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                flatten(&key(k), v, out);
            }
        }
        toml::Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        toml::Value::String(s) => out.push((prefix.to_string(), s.replace(',', ";"))),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
