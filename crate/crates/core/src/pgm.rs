//! Netpbm grayscale (PGM) reading and writing.
//!
//! Both the plain (`P2`) and raw (`P5`) variants are accepted, with `#`
//! comments anywhere in the header. Raw samples are one byte when
//! `maxval < 256` and two big-endian bytes otherwise.

use std::io::Write;
use std::path::Path;

use crate::measure::RawImage;
use crate::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token. `None` at end of input.
    fn uint(&mut self, what: &str) -> Result<Option<u64>> {
        self.skip_ws_and_comments();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Ok(None);
        }
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| Error::MalformedHeader {
                    offset: start,
                    reason: format!("{what} overflows"),
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader {
                offset: start,
                reason: format!("expected {what}, found byte 0x{:02x}", self.bytes[start]),
            });
        }
        match self.bytes.get(self.pos) {
            None => {}
            Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
            Some(b) => {
                return Err(Error::MalformedHeader {
                    offset: self.pos,
                    reason: format!("unexpected byte 0x{b:02x} after {what}"),
                })
            }
        }
        Ok(Some(value))
    }

    fn header_uint(&mut self, what: &str) -> Result<u64> {
        let offset = self.pos;
        self.uint(what)?.ok_or_else(|| Error::MalformedHeader {
            offset: offset.max(self.bytes.len()),
            reason: format!("missing {what}"),
        })
    }
}

/// Parses a PGM image. Values are returned row-major, top row first, without
/// normalization.
pub fn load_pgm(bytes: &[u8]) -> Result<RawImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::UnsupportedMagic { offset: 0 });
    }
    let raw = match bytes[1] {
        b'2' => false,
        b'5' => true,
        _ => return Err(Error::UnsupportedMagic { offset: 0 }),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if let Some(&b) = bytes.get(2) {
        if !b.is_ascii_whitespace() && b != b'#' {
            return Err(Error::UnsupportedMagic { offset: 0 });
        }
    }

    let width = cur.header_uint("width")?;
    let height = cur.header_uint("height")?;
    let maxval_offset = cur.pos;
    let maxval = cur.header_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader {
            offset: maxval_offset,
            reason: format!("image dimensions must be positive, got {width}x{height}"),
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader {
            offset: maxval_offset,
            reason: format!("maxval must be in 1..=65535, got {maxval}"),
        });
    }
    let count = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .ok_or_else(|| Error::MalformedHeader {
            offset: maxval_offset,
            reason: "image too large".into(),
        })?;

    let mut values = Vec::with_capacity(count.min(1 << 24));
    if raw {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(Error::MalformedHeader {
                    offset: cur.pos,
                    reason: "missing whitespace after maxval".into(),
                })
            }
        }
        let sample_bytes = if maxval < 256 { 1 } else { 2 };
        let data = &bytes[cur.pos..];
        let available = data.len() / sample_bytes;
        if available < count {
            return Err(Error::TruncatedData {
                offset: bytes.len(),
                expected: count,
                found: available,
            });
        }
        for k in 0..count {
            let v = if sample_bytes == 1 {
                u64::from(data[k])
            } else {
                u64::from(u16::from_be_bytes([data[2 * k], data[2 * k + 1]]))
            };
            if v > maxval {
                return Err(Error::MalformedData {
                    offset: cur.pos + k * sample_bytes,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            values.push(v as f64);
        }
    } else {
        for _ in 0..count {
            cur.skip_ws_and_comments();
            let offset = cur.pos;
            let v = match cur.uint("sample") {
                Ok(Some(v)) => v,
                Ok(None) => {
                    return Err(Error::TruncatedData {
                        offset: bytes.len(),
                        expected: count,
                        found: values.len(),
                    })
                }
                Err(Error::MalformedHeader { offset, reason }) => {
                    return Err(Error::MalformedData { offset, reason })
                }
                Err(e) => return Err(e),
            };
            if v > maxval {
                return Err(Error::MalformedData {
                    offset,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            values.push(v as f64);
        }
    }

    Ok(RawImage {
        width: width as usize,
        height: height as usize,
        values,
        maxval: maxval as u32,
    })
}

/// Reads and parses a PGM file.
pub fn read_pgm_file(path: impl AsRef<Path>) -> Result<RawImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_pgm(&bytes)
}

/// Writes a plain (`P2`) PGM. Samples are written verbatim, one image row
/// per line.
pub fn write_pgm_p2<W: Write>(
    out: &mut W,
    width: usize,
    height: usize,
    maxval: u16,
    samples: &[u16],
) -> std::io::Result<()> {
    assert_eq!(samples.len(), width * height, "sample count must match dimensions");
    writeln!(out, "P2")?;
    writeln!(out, "{width} {height}")?;
    writeln!(out, "{maxval}")?;
    for row in samples.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}
