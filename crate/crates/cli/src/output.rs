use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use prodspec::export::csv_metadata;

use crate::CliError;

/// Parameter echo embedded in every output file.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Meta(BTreeMap<String, String>);

impl Meta {
    pub fn new<A: Serialize>(command: &str, seed: Option<u64>, args: &A) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        map.insert("command".into(), command.into());
        map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        map.insert(
            "seed".into(),
            seed.map_or_else(|| "none".into(), |s| s.to_string()),
        );
        let value = serde_json::to_value(args).map_err(|e| CliError::Numeric(e.to_string()))?;
        if let Value::Object(fields) = value {
            for (k, v) in fields {
                let text = match v {
                    Value::Null => continue,
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                map.insert(k.replace('_', "-"), text);
            }
        }
        Ok(Meta(map))
    }

    pub fn insert(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn csv_header(&self) -> String {
        let pairs: Vec<(&str, String)> = self
            .0
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        csv_metadata(&pairs)
    }
}

pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
