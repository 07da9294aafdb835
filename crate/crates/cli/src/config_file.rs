//! `key=value` config files. Each key becomes `--key value` inserted right
//! after the subcommand, so anything given on the command line later wins.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {line:?}", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn to_flags(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => flags.push(format!("--{key}={value}").into()),
        }
    }
    flags
}

/// Finds `--config` anywhere in `args`.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Index of the subcommand name, skipping top-level flags.
fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--config" {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Returns `args` with the config file's flags spliced in, or unchanged if
/// there is no `--config`.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(at) = subcommand_index(&args) else {
        return Ok(args);
    };
    let flags = to_flags(&load(&path)?);
    let mut out = args[..=at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_normalizes_keys() {
        let pairs = parse("# comment\n\nthreshold = 0.2\n--flow=fixed\ncount_cap=3\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("threshold".into(), "0.2".into()),
                ("flow".into(), "fixed".into()),
                ("count-cap".into(), "3".into())
            ]
        );
        assert!(parse("novalue").is_err());
        assert!(parse("=3").is_err());
    }

    #[test]
    fn booleans_become_switches() {
        let flags = to_flags(&[("paper-literal".into(), "true".into()), ("strict".into(), "false".into())]);
        assert_eq!(flags, os(&["--paper-literal"]));
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        fs::write(&cfg, "threshold=0.3\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        let args = os(&["evsynth", "--config", cfg, "events", "a.png", "b", "--threshold", "0.5"]);
        let got = expand(args).unwrap();
        assert_eq!(
            got,
            os(&["evsynth", "--config", cfg, "events", "--threshold=0.3", "a.png", "b", "--threshold", "0.5"])
        );
    }

    #[test]
    fn no_config_is_identity() {
        let args = os(&["evsynth", "bench", "--images", "2"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
