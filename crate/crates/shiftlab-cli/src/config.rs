//! `--config FILE`: flat `key = value` lines spliced into argv as `--key=value` right
//! after the subcommand, so explicit flags given later on the command line win. A
//! `command = name` line supplies the subcommand when none is given. Unknown keys
//! fall through to clap and are rejected there.

use std::collections::BTreeMap;

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", ln + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(format!("config line {}: bad key {k:?}", ln + 1));
        }
        if out.insert(k.replace('_', "-"), v.to_string()).is_some() {
            return Err(format!("config line {}: duplicate key {k:?}", ln + 1));
        }
    }
    Ok(out)
}

pub fn expand(argv: Vec<String>) -> Result<Vec<String>, String> {
    // only a leading --config (before the subcommand) is recognised
    let (path, rest): (Option<String>, Vec<String>) = match argv.get(1).map(String::as_str) {
        Some("--config") => {
            let p = argv.get(2).ok_or("--config needs a file argument")?.clone();
            (Some(p), argv[3..].to_vec())
        }
        Some(a) if a.starts_with("--config=") => (Some(a["--config=".len()..].to_string()), argv[2..].to_vec()),
        _ => (None, argv[1..].to_vec()),
    };
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut map = parse(&text)?;
    let from_file = map.remove("command");
    let (cmd, tail) = match rest.first() {
        Some(c) if !c.starts_with('-') => (c.clone(), rest[1..].to_vec()),
        _ => (
            from_file.ok_or("no subcommand given on the command line or in the config file")?,
            rest,
        ),
    };
    let mut out = vec![argv[0].clone(), cmd];
    for (k, v) in map {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    out.extend(tail);
    Ok(out)
}
