//! Serialization of grids and multisets, and portable-pixmap export.
//!
//! The grid file is a human-readable header followed by the raw cell
//! payload, one byte per cell, row-major with the last coordinate fastest.
//! Readers re-derive the parameters from `(d, b, t)` and reject files whose
//! header disagrees with them, so a well-formed file always round-trips
//! byte-exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{pigment_shade, ColourMultiset, GridColouring};
use crate::params::derive_params_with_budget;

/// Grid file schema version.
pub const SCHEMA_VERSION: u32 = 1;
/// Colour encoding identifier fixed by the construction.
pub const COLOUR_ENCODING: &str = "pigment+shade*d;blank=k-1";
/// Erasure tie-breaking rule identifier fixed by the construction.
pub const ERASURE_RULE: &str = "lex-keep-first";

const MAGIC: &str = "gridcode";

/// Writes a grid to a writer in the gridcode file format.
pub fn write_grid_to<W: Write>(g: &GridColouring, mut w: W) -> Result<()> {
    let p = g.params();
    write!(
        w,
        "{MAGIC} {SCHEMA_VERSION}\nd {}\nb {}\nt {}\nm {}\nk {}\ns_max {}\nn {}\n\
         colour-encoding {COLOUR_ENCODING}\nerasure-rule {ERASURE_RULE}\npayload {}\n",
        p.d,
        p.b,
        p.t,
        p.m,
        p.k,
        p.s_max,
        p.n,
        g.cells().len()
    )?;
    w.write_all(g.cells())?;
    Ok(())
}

/// Writes a grid file to disk.
pub fn write_grid(g: &GridColouring, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_to(g, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a grid from a reader, validating the header against re-derived
/// parameters, the payload length, and the colour range.
pub fn read_grid_from<R: Read>(mut r: R) -> Result<GridColouring> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let bad = |msg: String| Error::FormatViolation(msg);

    let mut header = HeaderReader { bytes: &bytes, offset: 0 };
    let magic = header.line()?;
    let version = magic
        .strip_prefix(MAGIC)
        .and_then(|v| v.strip_prefix(' '))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| bad(format!("bad magic line {magic:?}")))?;
    if version != SCHEMA_VERSION {
        return Err(bad(format!(
            "unsupported schema version {version}, expected {SCHEMA_VERSION}"
        )));
    }

    let d = header.field("d")?;
    let b = header.field("b")?;
    let t = header.field("t")?;
    let m = header.field("m")?;
    let k = header.field("k")?;
    let s_max = header.field("s_max")?;
    let n = header.field("n")?;

    for (name, expected) in [("colour-encoding", COLOUR_ENCODING), ("erasure-rule", ERASURE_RULE)] {
        let line = header.line()?;
        let value = line
            .strip_prefix(name)
            .and_then(|v| v.strip_prefix(' '))
            .ok_or_else(|| bad(format!("expected `{name} ...`, got {line:?}")))?;
        if value != expected {
            return Err(bad(format!("{name} {value:?} differs from {expected:?}")));
        }
    }
    let payload_len = header.field("payload")? as usize;
    let offset = header.offset;

    let cells_declared = n
        .checked_pow(d.try_into().map_err(|_| bad(format!("d {d} out of range")))?)
        .ok_or_else(|| bad("n^d overflows".into()))?;
    let params = derive_params_with_budget(d as u32, b as u32, t, cells_declared)
        .map_err(|e| bad(format!("header parameters do not derive: {e}")))?;
    if (params.m, u64::from(params.k), params.s_max, params.n) != (m, k, s_max, n) {
        return Err(bad(format!(
            "header (m={m}, k={k}, s_max={s_max}, n={n}) disagrees with derivation \
             (m={}, k={}, s_max={}, n={})",
            params.m, params.k, params.s_max, params.n
        )));
    }
    if payload_len as u64 != params.cell_count() {
        return Err(bad(format!(
            "payload length {payload_len} differs from n^d = {}",
            params.cell_count()
        )));
    }
    let payload = bytes
        .get(offset..offset + payload_len)
        .ok_or_else(|| bad(format!(
            "payload holds {} bytes, header promises {payload_len}",
            bytes.len() - offset
        )))?;
    if bytes.len() - offset != payload_len {
        return Err(bad(format!(
            "trailing bytes after payload: {}",
            bytes.len() - offset - payload_len
        )));
    }
    GridColouring::from_parts(params, payload.to_vec())
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> HeaderReader<'a> {
    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.offset..];
        let end = rest
            .iter()
            .position(|&c| c == b'\n')
            .ok_or_else(|| Error::FormatViolation("unterminated header line".into()))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::FormatViolation("header is not valid UTF-8".into()))?;
        self.offset += end + 1;
        Ok(line)
    }

    fn field(&mut self, name: &str) -> Result<u64> {
        let line = self.line()?;
        line.strip_prefix(name)
            .and_then(|v| v.strip_prefix(' '))
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| {
                Error::FormatViolation(format!("expected `{name} <value>`, got {line:?}"))
            })
    }
}

/// Reads a grid file from disk.
pub fn read_grid(path: &Path) -> Result<GridColouring> {
    read_grid_from(File::open(path)?)
}

/// Writes a multiset as a single comma-separated line of counts.
pub fn write_multiset_to<W: Write>(mult: &ColourMultiset, mut w: W) -> Result<()> {
    let line: Vec<String> = mult.counts.iter().map(|c| c.to_string()).collect();
    writeln!(w, "{}", line.join(","))?;
    Ok(())
}

pub fn write_multiset(mult: &ColourMultiset, path: &Path) -> Result<()> {
    write_multiset_to(mult, BufWriter::new(File::create(path)?))
}

/// Parses a multiset count line, ignoring surrounding whitespace.
pub fn parse_multiset(text: &str) -> Result<ColourMultiset> {
    let counts = text
        .trim()
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::FormatViolation(format!("bad count {part:?}")))
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(ColourMultiset::new(counts))
}

pub fn read_multiset(path: &Path) -> Result<ColourMultiset> {
    parse_multiset(&std::fs::read_to_string(path)?)
}

/// Renders a two-dimensional grid as a binary portable pixmap (P6, maxval
/// 255), one pixel per cell. Pigment `i`, shade `h` maps to an RGB triple
/// whose channel `i` is `255 - h*(128/b)` with the other channels zero;
/// blank maps to white. The palette is a fixed formula so image bytes are
/// stable across machines.
pub fn export_image_to<W: Write>(g: &GridColouring, mut w: W) -> Result<()> {
    let p = g.params();
    if p.d != 2 {
        return Err(Error::InvalidParameter(format!(
            "image export requires d = 2, got d = {}",
            p.d
        )));
    }
    let step = (128 / p.b) as u8;
    write!(w, "P6\n{} {}\n255\n", p.n, p.n)?;
    let mut row = Vec::with_capacity(3 * p.n as usize);
    for cells_row in g.cells().chunks(p.n as usize) {
        row.clear();
        for &cell in cells_row {
            let mut px = [255u8, 255, 255];
            if let Some((pigment, shade)) = pigment_shade(cell, p.d, p.b) {
                if pigment >= 3 {
                    return Err(Error::InvalidParameter(format!(
                        "pigment {pigment} has no colour channel"
                    )));
                }
                px = [0, 0, 0];
                px[pigment as usize] = 255 - shade as u8 * step;
            }
            row.extend_from_slice(&px);
        }
        w.write_all(&row)?;
    }
    Ok(())
}

pub fn export_image(g: &GridColouring, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    export_image_to(g, &mut w)?;
    w.flush()?;
    Ok(())
}
