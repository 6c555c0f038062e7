//! Coefficient dump: `SHCOEF1\n`, a text header, then little-endian `f64` planes.
//!
//! ```text
//! SHCOEF1
//! N j0 eta
//! kind j k        (eta lines, system order)
//! <eta * N * N little-endian f64, plane-major, row-major>
//! ```

use std::io::{BufRead, Write};

use anyhow::{bail, ensure, Context, Result};
use shearseg::{GridSpec, SubbandIndex, SubbandKind};

pub const MAGIC: &[u8] = b"SHCOEF1\n";

/// Header and raw planes of a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub grid: GridSpec,
    pub subbands: Vec<SubbandIndex>,
    pub planes: Vec<f64>,
}

pub fn write_dump<W: Write>(mut w: W, grid: &GridSpec, subbands: &[SubbandIndex], planes: &[f64]) -> Result<()> {
    let n = grid.side();
    ensure!(planes.len() == subbands.len() * n * n, "plane data does not match {} subbands of {n}x{n}", subbands.len());
    w.write_all(MAGIC)?;
    writeln!(w, "{n} {} {}", grid.scales(), subbands.len())?;
    for sb in subbands {
        writeln!(w, "{sb}")?;
    }
    let mut bytes = Vec::with_capacity(planes.len() * 8);
    for x in planes {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

fn read_line<R: BufRead>(r: &mut R, what: &str) -> Result<String> {
    let mut line = String::new();
    let got = r.read_line(&mut line).with_context(|| format!("reading {what}"))?;
    ensure!(got > 0 && line.ends_with('\n'), "truncated dump: missing {what}");
    Ok(line.trim_end().to_owned())
}

pub fn read_dump<R: BufRead>(mut r: R) -> Result<Dump> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).context("truncated dump: missing magic")?;
    ensure!(magic == MAGIC, "not a coefficient dump (bad magic)");

    let header = read_line(&mut r, "header")?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().with_context(|| format!("bad header field {t:?}")))
        .collect::<Result<_>>()?;
    let [n, j0, eta] = fields[..] else { bail!("header must be \"N j0 eta\", got {header:?}") };
    let grid = GridSpec::new(n)?;
    ensure!(grid.scales() == j0, "header j0 = {j0} but N = {n} implies {}", grid.scales());
    ensure!(grid.subband_count() == eta, "header eta = {eta} but N = {n} implies {}", grid.subband_count());

    let mut subbands = Vec::with_capacity(eta);
    for i in 0..eta {
        let line = read_line(&mut r, "subband table")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [kind, j, k] = parts[..] else { bail!("subband line {i} malformed: {line:?}") };
        let kind = SubbandKind::from_name(kind).with_context(|| format!("unknown subband kind {kind:?}"))?;
        let sb = SubbandIndex { kind, j: j.parse()?, k: k.parse()? };
        ensure!(sb.is_valid_for(&grid), "subband {sb} does not belong to N = {n}");
        subbands.push(sb);
    }

    let count = eta * n * n;
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).with_context(|| format!("truncated dump: expected {count} coefficients"))?;
    let mut rest = [0u8; 1];
    ensure!(r.read(&mut rest)? == 0, "trailing bytes after coefficient data");
    let planes = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    Ok(Dump { grid, subbands, planes })
}
