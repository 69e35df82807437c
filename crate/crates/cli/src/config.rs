//! `--config` files: one `key=value` per line, `#` comments, keys named like
//! the long flags without dashes. The file's entries are inserted in front of
//! the command-line flags, so flags given explicitly win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::args::SUBCOMMANDS;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, found `{line}`", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

fn to_flags(entries: Vec<(String, String)>) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => flags.push(format!("--{key}={value}").into()),
        }
    }
    flags
}

/// Returns `args` with the config file's entries spliced in directly after
/// the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let flags = to_flags(parse_config(&text)?);
    let Some(pos) = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let e = parse_config("# run\na = -3\n\nT=200\nprobe=true\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("a".into(), "-3".into()),
                ("T".into(), "200".into()),
                ("probe".into(), "true".into())
            ]
        );
        assert!(parse_config("novalue\n").is_err());
        assert!(parse_config("=3\n").is_err());
    }

    #[test]
    fn flags_follow_the_subcommand() {
        let dir = std::env::temp_dir().join(format!("pantograph-config-{}", std::process::id()));
        std::fs::write(&dir, "a=-3\nprobe=true\nq=0.5\n").unwrap();
        let args: Vec<OsString> = [
            "pantograph",
            "--config",
            dir.to_str().unwrap(),
            "classify",
            "--q",
            "0.9",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let out = expand(args).unwrap();
        let out: Vec<String> = out
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            out,
            vec![
                "pantograph",
                "--config",
                dir.to_str().unwrap(),
                "classify",
                "--a=-3",
                "--probe",
                "--q=0.5",
                "--q",
                "0.9"
            ]
        );
        std::fs::remove_file(dir).unwrap();
    }
}
