//! Codebook specifications: inline text or a file with one label per line.
//!
//! Inline: `0,1` is a gray codebook with two labels; labels with several
//! channels are separated by `;`, e.g. `1,0,0;0,0,1`.

use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use shearseg::Codebook;

fn parse_row(row: &str, line: usize) -> Result<Vec<f64>> {
    row.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().with_context(|| format!("label {line}: bad value {t:?}"))
        })
        .collect()
}

/// Parse file contents: one label per non-empty line, channels comma-separated.
/// Lines starting with `#` are ignored.
pub fn parse_codebook_text(text: &str) -> Result<Codebook<f64>> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| parse_row(l, i + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Codebook::new(rows)?)
}

pub fn parse_codebook_inline(spec: &str) -> Result<Codebook<f64>> {
    let spec = spec.trim();
    ensure!(!spec.is_empty(), "empty codebook");
    let rows = if spec.contains(';') {
        spec.split(';').enumerate().map(|(i, r)| parse_row(r, i + 1)).collect::<Result<Vec<_>>>()?
    } else {
        parse_row(spec, 1)?.into_iter().map(|x| vec![x]).collect()
    };
    Ok(Codebook::new(rows)?)
}

/// A path to an existing file is read as a codebook file, anything else is parsed inline.
pub fn parse_codebook(spec: &str) -> Result<Codebook<f64>> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read codebook {spec}"))?;
        parse_codebook_text(&text).with_context(|| format!("codebook file {spec}"))
    } else {
        parse_codebook_inline(spec).with_context(|| format!("inline codebook {spec:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_gray_and_rgb() {
        let cb = parse_codebook_inline("0, 1").unwrap();
        assert_eq!((cb.labels(), cb.channels()), (2, 1));
        let cb = parse_codebook_inline("1,0,0;0,1,0;0,0,1").unwrap();
        assert_eq!((cb.labels(), cb.channels()), (3, 3));
        assert_eq!(cb.entry(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn file_format() {
        let text = "# fish\n0.7451,0.8314,0.8196\n0.1843,0.2784,0.2275\n\n0.3686,0.5569,0.6353\n0.8353,0.7333,0.3020\n";
        let cb = parse_codebook_text(text).unwrap();
        assert_eq!((cb.labels(), cb.channels()), (4, 3));
    }

    #[test]
    fn invalid_codebooks() {
        assert!(parse_codebook_inline("0.5").is_err());
        assert!(parse_codebook_inline("0,x").is_err());
        assert!(parse_codebook_inline("0,0;1").is_err());
        assert!(parse_codebook_inline("0,2").is_err());
        assert!(parse_codebook_inline("").is_err());
    }
}
