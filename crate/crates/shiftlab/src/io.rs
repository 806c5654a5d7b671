//! NetPBM and small file helpers.

use crate::error::{Error, Result};

/// Binary greymap (P5), one byte per pixel.
pub fn encode_pgm(width: usize, height: usize, maxval: u8, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses a P5 greymap with maxval <= 255. Comments are not supported.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| Error::Parse(e.to_string()))?);
    }
    if fields[0] != "P5" {
        return Err(Error::Parse(format!("not a P5 greymap: {}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("bad PGM field '{s}': {e}")));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval > 255 {
        return Err(Error::Unsupported("16-bit PGM".into()));
    }
    pos += 1;
    let data = bytes.get(pos..pos + w * h).ok_or_else(|| Error::Parse("PGM pixel data truncated".into()))?;
    Ok((w, h, data.to_vec()))
}

pub fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
