//! Flat `key=value` config files, spliced into the argument list so that
//! flags given on the command line take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

pub const SUBCOMMANDS: [&str; 5] = ["sample", "limit", "validate", "kstest", "kernel"];

/// Parse config text into `--key=value` arguments. Blank lines and `#`
/// comments are skipped; `key=true` becomes a bare `--key` and `key=false`
/// is dropped.
pub fn parse_config(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            format!(
                "config line {}: expected key=value, got `{line}`",
                lineno + 1
            )
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", lineno + 1));
        }
        if key == "config" {
            return Err(format!(
                "config line {}: nested config files are not supported",
                lineno + 1
            ));
        }
        match value.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => out.push(format!("--{key}={v}").into()),
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter().skip(1);
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Rebuild `args` as `prog subcommand <config entries> <everything else>`.
/// Without a `--config` flag (or without a subcommand) the list is returned
/// unchanged.
pub fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| {
        format!(
            "cannot read config file {}: {e}",
            Path::new(&path).display()
        )
    })?;
    let injected = parse_config(&text)?;
    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.push(args[0].clone());
    out.push(args[pos].clone());
    out.extend(injected);
    out.extend(args[1..pos].iter().cloned());
    out.extend(args[pos + 1..].iter().cloned());
    Ok(out)
}
