//! Flat `key = value` config files shared by training and synthetic generation.
//! Blank lines and `#` comments are ignored; later keys override earlier ones.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidRow {
            row: i + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::InvalidRow {
                row: i + 1,
                reason: "empty key".into(),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn read_key_values(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text)
}

/// Parses `value` for `key`, naming the key in the error.
pub fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| Error::Config(format!("{key} = {value}: {e}")))
}

/// `a..b` or `a-b` or a single value, inclusive.
pub fn parse_range(key: &str, value: &str) -> Result<(usize, usize)> {
    let (lo, hi) = match value.split_once("..").or_else(|| value.split_once('-')) {
        Some((lo, hi)) => (parse_value(key, lo.trim())?, parse_value(key, hi.trim())?),
        None => {
            let v = parse_value(key, value)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(Error::Config(format!("{key} = {value}: empty range")));
    }
    Ok((lo, hi))
}

/// Comma-separated list with surrounding whitespace removed and empty items dropped.
pub fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blanks_and_whitespace() {
        let kv = parse_key_values("# header\n\nlr = 0.01  # inline\n  epochs=4\n").unwrap();
        assert_eq!(
            kv,
            [
                ("lr".to_string(), "0.01".to_string()),
                ("epochs".into(), "4".into())
            ]
        );
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(matches!(
            parse_key_values("a = 1\nnot a pair\n"),
            Err(Error::InvalidRow { row: 2, .. })
        ));
        assert!(parse_key_values(" = 3").is_err());
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("r", "10..30").unwrap(), (10, 30));
        assert_eq!(parse_range("r", "4-8").unwrap(), (4, 8));
        assert_eq!(parse_range("r", "12").unwrap(), (12, 12));
        assert!(parse_range("r", "9..3").is_err());
        assert_eq!(parse_list(" a, b ,,c "), ["a", "b", "c"]);
        assert!(parse_value::<f64>("lr", "fast").is_err());
    }
}
