//! Plain-text configuration: `key = value` lines, optional `[section]`
//! headers named after subcommands, `#` comments. Keys before the first
//! header apply to every subcommand. Command-line flags win over both.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{usage, CliResult};

/// Keys that do not change any computed number and stay out of the hash.
const UNHASHED: [&str; 3] = ["config", "out", "jobs"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| usage(format!("config line {}: unclosed section", no + 1)))?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(format!("config line {}: expected `key = value`", no + 1))
            })?;
            let key = normalize(k);
            if key.is_empty() {
                return Err(usage(format!("config line {}: empty key", no + 1)));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(usage(format!(
                    "config line {}: `{key}` set twice in the same section",
                    no + 1
                )));
            }
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Top-level keys overlaid with the `[command]` section.
    pub fn for_command(&self, command: &str) -> BTreeMap<String, String> {
        let mut out = self.sections.get("").cloned().unwrap_or_default();
        if let Some(s) = self.sections.get(command) {
            out.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        out
    }
}

/// Resolved settings of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub command: String,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Merges config values with flags; every key must be one of `known`.
    pub fn resolve(
        command: &str,
        file: Option<&ConfigFile>,
        flags: Vec<(String, String)>,
        known: &[String],
    ) -> CliResult<Self> {
        let mut values = file.map(|f| f.for_command(command)).unwrap_or_default();
        for k in values.keys() {
            if !known.contains(k) {
                return Err(usage(format!(
                    "config key `{k}` is not an option of `{command}`"
                )));
            }
        }
        values.remove("config");
        values.extend(flags);
        Ok(Self {
            command: command.to_string(),
            values,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("--{key}: cannot parse `{v}`"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key).map(|v| v.trim().to_ascii_lowercase()) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(usage(format!("--{key}: expected true or false, got `{v}`"))),
            },
        }
    }

    /// First 16 hex digits of SHA-256 over the command and the sorted
    /// `key=value` pairs that affect results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.values {
            if UNHASHED.contains(&k.as_str()) {
                continue;
            }
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// `a..b` or a single integer.
pub fn parse_range(text: &str) -> CliResult<std::ops::RangeInclusive<u32>> {
    let bad = || usage(format!("cannot parse `{text}` as a range `a..b`"));
    match text.split_once("..") {
        Some((a, b)) => {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let a: u32 = text.trim().parse().map_err(|_| bad())?;
            Ok(a..=a)
        }
    }
}

/// A number written as a decimal or a fraction `a/b`.
pub fn parse_real(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| usage(format!("bad number `{t}`")))?;
            let b: f64 = b.trim().parse().map_err(|_| usage(format!("bad number `{t}`")))?;
            a / b
        }
        None => t.parse().map_err(|_| usage(format!("bad number `{t}`")))?,
    };
    if v.is_nan() {
        return Err(usage(format!("bad number `{t}`")));
    }
    Ok(v)
}

pub fn parse_reals(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_real)
        .collect()
}

/// `--resolution`: one spacing `h` (expanded to `h, h/2, h/4`) or a
/// comma-separated decreasing schedule.
pub fn parse_schedule(text: &str) -> CliResult<Vec<f64>> {
    let hs = parse_reals(text)?;
    let hs = match hs.as_slice() {
        [h] => vec![*h, h / 2.0, h / 4.0],
        _ => hs,
    };
    if hs.is_empty() || !hs.iter().all(|h| *h > 0.0 && h.is_finite()) {
        return Err(usage("--resolution: spacings must be positive"));
    }
    if !hs.windows(2).all(|w| w[1] < w[0]) {
        return Err(usage("--resolution: spacings must be strictly decreasing"));
    }
    Ok(hs)
}

/// `2^-k` for exact dyadic spacings, scientific notation otherwise.
pub fn format_spacing(h: f64) -> String {
    let k = -h.log2();
    if k.fract() == 0.0 && 2f64.powi(-(k as i32)) == h {
        format!("2^-{k}")
    } else {
        format!("{h:e}")
    }
}

pub fn format_schedule(hs: &[f64]) -> String {
    hs.iter()
        .map(|h| format_spacing(*h))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_precedence() {
        let f = ConfigFile::parse(
            "# sweep\nseed = 3\nout=res\n[decompose]\ncorpus = gaussian\nseed = 4\n[norms]\nentry = plateau\n",
        )
        .unwrap();
        let known: Vec<String> = ["seed", "out", "corpus", "params"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let s = Settings::resolve(
            "decompose",
            Some(&f),
            vec![("corpus".into(), "all".into())],
            &known,
        )
        .unwrap();
        assert_eq!(s.get("seed"), Some("4"));
        assert_eq!(s.get("corpus"), Some("all"));
        assert_eq!(s.get("out"), Some("res"));
        // keys of other sections are ignored, unknown keys of this one are not
        assert!(Settings::resolve("whitney", Some(&f), vec![], &known).is_ok());
        let g = ConfigFile::parse("[whitney]\nbogus = 1\n").unwrap();
        assert!(Settings::resolve("whitney", Some(&g), vec![], &known).is_err());
    }

    #[test]
    fn malformed_config() {
        assert!(ConfigFile::parse("[open\n").is_err());
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2\n").is_err());
        assert_eq!(
            ConfigFile::parse("a_b = 1").unwrap().for_command("x")["a-b"],
            "1"
        );
    }

    #[test]
    fn hash_ignores_output_location() {
        let known: Vec<String> = ["out", "seed"].iter().map(|s| s.to_string()).collect();
        let a = Settings::resolve("w", None, vec![("out".into(), "a".into())], &known).unwrap();
        let b = Settings::resolve("w", None, vec![("out".into(), "b".into())], &known).unwrap();
        let c = Settings::resolve("w", None, vec![("seed".into(), "1".into())], &known).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn schedules_and_ranges() {
        assert_eq!(parse_schedule("1/16").unwrap(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_schedule("0.1,0.05").unwrap().len(), 2);
        assert!(parse_schedule("0.05,0.1").is_err());
        assert!(parse_schedule("-1").is_err());
        assert_eq!(parse_range("2..5").unwrap(), 2..=5);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("5..2").is_err());
        assert_eq!(format_schedule(&[0.0625, 0.1]), "2^-4,1e-1");
    }
}
