//! Key=value run files.
//!
//! ```text
//! # comment
//! kind = sk
//! n = 8
//! pump-ratio = 1.25
//! no-noise = false
//! ```
//!
//! Keys are long flag names (`_` and `-` are interchangeable). `true` turns a
//! switch on, `false` leaves it off. The file's entries are spliced in front
//! of the command-line flags, so flags given explicitly win.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Parses a run file into `--key value` arguments.
pub fn config_args(text: &str, origin: &Path) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key = value, found {line:?}",
                origin.display(),
                idx + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(CliError::Usage(format!("{}:{}: invalid key {key:?}", origin.display(), idx + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage(format!("{}:{}: run files cannot nest", origin.display(), idx + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Expands `--config FILE` (or `--config=FILE`) into the file's arguments,
/// inserted directly after the subcommand name.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == "--config" {
            path = argv.get(i + 1).cloned();
            i += 1;
        } else if let Some(p) = argv[i].strip_prefix("--config=") {
            path = Some(p.to_string());
        }
        i += 1;
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read run file {path}: {e}")))?;
    let extra = config_args(&text, Path::new(&path))?;
    let Some(sub) = argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(argv);
    };
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_keys_switches_and_comments() {
        let text = "# run\nkind = sk\nn=8\n\nno_noise = true\nmean-field = false\n";
        assert_eq!(config_args(text, Path::new("x")).unwrap(), s(&["--kind", "sk", "--n", "8", "--no-noise"]));
        assert!(config_args("novalue\n", Path::new("x")).is_err());
        assert!(config_args("config = y\n", Path::new("x")).is_err());
    }

    #[test]
    fn file_entries_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "n = 8\nseed = 3\n").unwrap();
        let argv = s(&["ising-traj", "simulate", "--config", path.to_str().unwrap(), "--seed", "5"]);
        let out = expand_config(argv).unwrap();
        assert_eq!(out[..6], s(&["ising-traj", "simulate", "--n", "8", "--seed", "3"])[..]);
        assert_eq!(out[out.len() - 2..], s(&["--seed", "5"])[..]);
    }
}
