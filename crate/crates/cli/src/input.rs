//! Data files: one observation per line, an optional header line, `#`
//! comments, and commas or whitespace around the value.

use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_observations(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_observations(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_content = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let first_content = !seen_content;
        seen_content = true;
        if fields.is_empty() {
            continue;
        }
        if fields.len() > 1 {
            bail!("expected one observation per line, found {} fields at line {lineno}", fields.len());
        }
        let v: f64 = match fields[0].parse() {
            Ok(v) => v,
            Err(_) if first_content => continue,
            Err(_) => bail!("cannot parse `{}` as a number at line {lineno}", fields[0]),
        };
        if v.is_nan() || v.is_infinite() {
            bail!("non-finite observation at line {lineno}");
        }
        if v <= 0.0 {
            bail!("non-positive observation at line {lineno}");
        }
        out.push(v);
    }
    if out.is_empty() {
        bail!("no observations found");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_separators() {
        let v = parse_observations("x\n# comment\n1.5\n 2 ,\n\n3\t\n").unwrap();
        assert_eq!(v, vec![1.5, 2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_lines() {
        let e = parse_observations("x\n1\n-2\n").unwrap_err().to_string();
        assert_eq!(e, "non-positive observation at line 3");
        let e = parse_observations("1\n0\n").unwrap_err().to_string();
        assert_eq!(e, "non-positive observation at line 2");
        assert!(parse_observations("1\nabc\n").unwrap_err().to_string().contains("line 2"));
        assert!(parse_observations("1,2\n").is_err());
        assert!(parse_observations("header\n").is_err());
        assert!(parse_observations("1\ninf\n").is_err());
    }
}
