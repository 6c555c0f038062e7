//! Binary PGM (P5) / PPM (P6) at 8 or 16 bits, and PFM float images.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};

/// A decoded image with channel planes in `[0, 1]` (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: Vec<Vec<f64>>,
    /// Maximum sample value of the source file; `None` for float files.
    pub maxval: Option<u16>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: Vec<Vec<f64>>) -> Self {
        Self { width, height, channels, maxval: None }
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }
}

pub fn read(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    decode(&bytes).with_context(|| format!("{} is not a supported image", path.display()))
}

pub fn decode(bytes: &[u8]) -> Result<Raster> {
    match bytes.get(..2) {
        Some(b"P5") | Some(b"P6") => decode_pnm(bytes),
        Some(b"Pf") | Some(b"PF") => decode_pfm(bytes),
        _ => bail!("unknown magic number (expected P5, P6, Pf or PF)"),
    }
}

/// Header tokens separated by whitespace, `#` comments skipped. Returns the
/// tokens and the offset just past the single whitespace byte after the last.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        ensure!(i > start, "truncated header");
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    ensure!(i < bytes.len(), "missing image data");
    Ok((tokens, i + 1))
}

fn parse_dim(s: &str, what: &str) -> Result<usize> {
    let v: usize = s.parse().with_context(|| format!("bad {what} {s:?}"))?;
    ensure!(v > 0, "{what} must be positive");
    Ok(v)
}

fn decode_pnm(bytes: &[u8]) -> Result<Raster> {
    let (tok, offset) = header_tokens(bytes, 4)?;
    let nch = if tok[0] == "P5" { 1 } else { 3 };
    let width = parse_dim(&tok[1], "width")?;
    let height = parse_dim(&tok[2], "height")?;
    let maxval: u16 = tok[3].parse().with_context(|| format!("bad maxval {:?}", tok[3]))?;
    ensure!(maxval > 0, "maxval must be positive");
    let wide = maxval > 255;
    let bps = if wide { 2 } else { 1 };
    let data = &bytes[offset..];
    let want = width * height * nch * bps;
    ensure!(data.len() >= want, "expected {want} data bytes, found {}", data.len());

    let scale = f64::from(maxval);
    let mut channels = vec![Vec::with_capacity(width * height); nch];
    for (i, chunk) in data[..want].chunks_exact(bps).enumerate() {
        let raw = if wide { u16::from_be_bytes([chunk[0], chunk[1]]) } else { u16::from(chunk[0]) };
        ensure!(raw <= maxval, "sample {raw} exceeds maxval {maxval}");
        channels[i % nch].push(f64::from(raw) / scale);
    }
    Ok(Raster { width, height, channels, maxval: Some(maxval) })
}

fn decode_pfm(bytes: &[u8]) -> Result<Raster> {
    let (tok, offset) = header_tokens(bytes, 4)?;
    let nch = if tok[0] == "Pf" { 1 } else { 3 };
    let width = parse_dim(&tok[1], "width")?;
    let height = parse_dim(&tok[2], "height")?;
    let scale: f64 = tok[3].parse().with_context(|| format!("bad scale {:?}", tok[3]))?;
    ensure!(scale != 0.0, "PFM scale must be non-zero");
    let little = scale < 0.0;
    let data = &bytes[offset..];
    let want = width * height * nch * 4;
    ensure!(data.len() >= want, "expected {want} data bytes, found {}", data.len());

    let mut channels = vec![vec![0.0; width * height]; nch];
    // PFM stores rows bottom to top
    for (i, chunk) in data[..want].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (pixel, ch) = (i / nch, i % nch);
        let (r, c) = (height - 1 - pixel / width, pixel % width);
        channels[ch][r * width + c] = f64::from(v);
    }
    Ok(Raster { width, height, channels, maxval: None })
}

/// Quantise `[0, 1]` values to `maxval` levels, clamping out-of-range input.
pub fn quantize(x: f64, maxval: u16) -> u16 {
    let m = f64::from(maxval);
    if x.is_nan() {
        return 0;
    }
    (x.clamp(0.0, 1.0) * m).round() as u16
}

/// Encode as P5 (one channel) or P6 (three channels).
pub fn encode_pnm(raster: &Raster, maxval: u16) -> Result<Vec<u8>> {
    let nch = raster.channels.len();
    ensure!(nch == 1 || nch == 3, "PNM needs 1 or 3 channels, got {nch}");
    ensure!(maxval > 0, "maxval must be positive");
    let n = raster.width * raster.height;
    ensure!(
        raster.channels.iter().all(|c| c.len() == n),
        "channel length does not match {}x{}",
        raster.width,
        raster.height
    );
    let magic = if nch == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", raster.width, raster.height).into_bytes();
    for i in 0..n {
        for ch in &raster.channels {
            let q = quantize(ch[i], maxval);
            if maxval > 255 {
                out.extend_from_slice(&q.to_be_bytes());
            } else {
                out.push(q as u8);
            }
        }
    }
    Ok(out)
}

/// Encode as little-endian PFM.
pub fn encode_pfm(raster: &Raster) -> Result<Vec<u8>> {
    let nch = raster.channels.len();
    ensure!(nch == 1 || nch == 3, "PFM needs 1 or 3 channels, got {nch}");
    let (w, h) = (raster.width, raster.height);
    let magic = if nch == 1 { "Pf" } else { "PF" };
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    for r in (0..h).rev() {
        for c in 0..w {
            for ch in &raster.channels {
                out.extend_from_slice(&(ch[r * w + c] as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Write by extension: `.pfm` as float, anything else as PGM/PPM at `maxval`.
pub fn write(path: &Path, raster: &Raster, maxval: u16) -> Result<()> {
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pfm") => encode_pfm(raster)?,
        _ => encode_pnm(raster, maxval)?,
    };
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Write a single gray plane as 8-bit PGM.
pub fn write_gray8(path: &Path, side: usize, values: &[f64]) -> Result<()> {
    write(path, &Raster::new(side, side, vec![values.to_vec()]), 255)
}
