//! `key = value` config files, merged into the argument list.
//!
//! Config entries become `--key=value` flags placed directly after the
//! subcommand, ahead of the user's own flags. Since every flag may override
//! itself, flags on the command line win over the file, which wins over the
//! built-in defaults.

use std::ffi::OsString;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected `key = value`", no + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k == "config" {
            return Err(format!("config line {}: invalid key `{k}`", no + 1));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

/// The argument list with `--config <path>` replaced by the file's entries.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => path = Some(it.next().ok_or("--config needs a path")?),
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("reading {}: {e}", path.to_string_lossy()))?;
    let entries = parse_config(&text)?;
    // the subcommand is the first argument after the program name that is not a flag
    let sub = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 2);
    let at = sub.ok_or("--config needs a subcommand")?;
    let flags = entries.into_iter().map(|(k, v)| OsString::from(format!("--{k}={v}")));
    rest.splice(at..at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = parse_config("# sweep\nomega = 2\n\nkappa0=0.01\nn_traj = 5\n").unwrap();
        assert_eq!(c, vec![("omega".into(), "2".into()), ("kappa0".into(), "0.01".into()), ("n-traj".into(), "5".into())]);
        assert!(parse_config("omega 2").is_err());
        assert!(parse_config("= 2").is_err());
    }
}
