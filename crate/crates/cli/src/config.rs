//! Flat `key=value` configuration files.
//!
//! Keys are flag names without the leading dashes. Entries are spliced into
//! the argument list straight after the subcommand so that flags given on
//! the command line, which come later, take precedence.

use std::path::Path;

use crate::CliError;

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn to_flags(entries: &[(String, String)]) -> Vec<String> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    flags
}

/// Strips `--config <file>` from `argv` and splices the file's entries in
/// after the (possibly nested) subcommand.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut args = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = Some(
                iter.next()
                    .ok_or_else(|| CliError::Usage("--config needs a file".into()))?,
            );
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else {
            args.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let flags = to_flags(&parse_config(&text)?);
    // Program name, subcommand, and for `extract` the extractor kind.
    let depth = if args.get(1).map(String::as_str) == Some("extract") {
        3
    } else {
        2
    };
    let insert_at = depth.min(args.len());
    args.splice(insert_at..insert_at, flags);
    Ok(args)
}
