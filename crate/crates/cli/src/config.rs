//! `key=value` config files, merged with the command line. Keys that also
//! appear as explicit flags are dropped from the file.

use std::fs;
use std::path::Path;

/// Reads a config file into `--key value` argument pairs.
///
/// Blank lines and lines starting with `#` are skipped.
pub fn config_args(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", lineno + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        if key == "config" {
            return Err(format!("line {}: config files cannot include other config files", lineno + 1));
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    Ok(args)
}

/// Finds the value of `--config` in raw arguments, in either `--config x` or `--config=x` form.
pub fn find_config(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Inserts config-derived arguments right after the subcommand name,
/// skipping keys already given on the command line.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let given: Vec<&str> = args[2..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split_once('=').map_or(a, |(k, _)| k))
        .collect();
    let extra = config_args(Path::new(&path))?;
    let mut out = Vec::with_capacity(args.len() + extra.len());
    out.extend_from_slice(&args[..2]);
    for pair in extra.chunks(2) {
        if !given.contains(&&pair[0][2..]) {
            out.extend_from_slice(pair);
        }
    }
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
