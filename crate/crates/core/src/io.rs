//! Grayscale PGM images and Middlebury `.flo` flow fields.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A grayscale image with samples normalized to `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<f64>,
}

impl PgmImage {
    /// Quantizes `samples` (clamped to `[0, 1]`) at the given maxval.
    pub fn from_samples(width: usize, height: usize, maxval: u16, samples: Vec<f64>) -> Result<Self> {
        if maxval == 0 {
            return Err(Error::Parameter("maxval must be at least 1".into()));
        }
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} image cannot hold {} samples",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            maxval,
            samples,
        })
    }

    /// Integer level of every sample as it will be written.
    pub fn levels(&self) -> Vec<u16> {
        let m = f64::from(self.maxval);
        self.samples
            .iter()
            .map(|s| {
                let s = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
                (s * m).round() as u16
            })
            .collect()
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    // Whitespace and `#` comments, which run to the end of the line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b'\n' | b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                self.err(format!("unexpected end of data while reading {what}"))
            } else {
                self.err(format!("expected {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("{what} is out of range"),
            })
    }
}

/// Parses a P2 or P5 image from memory.
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut c = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(c.err("unsupported magic number, expected P2 or P5")),
    };
    c.pos = 2;
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(c.err("expected whitespace after the magic number"));
    }
    let width = c.number("width")? as usize;
    let height = c.number("height")? as usize;
    let header_at = c.pos;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            offset: header_at,
            message: "image dimensions must be positive".into(),
        });
    }
    if maxval == 0 || maxval > 65_535 {
        return Err(c.err(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| c.err("image dimensions overflow"))?;
    let m = maxval as f64;

    let mut samples = Vec::with_capacity(count.min(1 << 24));
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if !bytes.get(c.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            return Err(c.err("expected a single whitespace byte before the raster"));
        }
        c.pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes
            .get(c.pos..c.pos + need)
            .ok_or_else(|| Error::Parse {
                offset: bytes.len(),
                message: format!("raster truncated, expected {need} bytes"),
            })?;
        let mut levels: Box<dyn Iterator<Item = u64>> = if wide {
            Box::new(raster.chunks_exact(2).map(|p| u64::from(u16::from_be_bytes([p[0], p[1]]))))
        } else {
            Box::new(raster.iter().map(|&b| u64::from(b)))
        };
        for i in 0..count {
            let v = levels.next().unwrap_or(0);
            if v > maxval {
                return Err(Error::Parse {
                    offset: c.pos + i * if wide { 2 } else { 1 },
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            samples.push(v as f64 / m);
        }
    } else {
        for _ in 0..count {
            c.skip_separators();
            let at = c.pos;
            let v = c.number("sample")?;
            if v > maxval {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            samples.push(v as f64 / m);
        }
    }
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<PgmImage> {
    parse_pgm(&fs::read(path)?)
}

/// Binary (P5) encoding with the header `P5\n<w> <h>\n<maxval>\n`.
pub fn encode_pgm(img: &PgmImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    for level in img.levels() {
        if img.maxval > 255 {
            out.extend_from_slice(&level.to_be_bytes());
        } else {
            out.push(level as u8);
        }
    }
    out
}

/// ASCII (P2) encoding, one image row per line.
pub fn encode_pgm_ascii(img: &PgmImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n{}\n", img.width, img.height, img.maxval);
    for row in img.levels().chunks(img.width) {
        let line: Vec<String> = row.iter().map(u16::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_pgm(img: &PgmImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Per-pixel displacement `(u, v)` in pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = width * height;
        if u.len() != n || v.len() != n {
            return Err(Error::Dimension(format!(
                "{width}x{height} flow needs {n} components per direction, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(Error::Data("flow components must be finite".into()));
        }
        Ok(Self { width, height, u, v })
    }

    /// Mean Euclidean distance to a reference field of the same size.
    pub fn mean_endpoint_error(&self, reference: &FlowField) -> Result<f64> {
        if (self.width, self.height) != (reference.width, reference.height) {
            return Err(Error::Dimension("flow fields differ in size".into()));
        }
        let n = self.u.len();
        let total: f64 = (0..n)
            .map(|i| (self.u[i] - reference.u[i]).hypot(self.v[i] - reference.v[i]))
            .sum();
        Ok(total / n as f64)
    }
}

const FLO_MAGIC: &[u8; 4] = b"PIEH";

/// Middlebury layout: `PIEH`, little-endian `i32` width and height, then
/// interleaved little-endian `f32` pairs.
pub fn encode_flo(flow: &FlowField) -> Result<Vec<u8>> {
    let dim = |d: usize| {
        i32::try_from(d).map_err(|_| Error::Dimension(format!("dimension {d} does not fit a .flo header")))
    };
    let mut out = Vec::with_capacity(12 + 8 * flow.u.len());
    out.extend_from_slice(FLO_MAGIC);
    out.extend_from_slice(&dim(flow.width)?.to_le_bytes());
    out.extend_from_slice(&dim(flow.height)?.to_le_bytes());
    for (u, v) in flow.u.iter().zip(&flow.v) {
        out.extend_from_slice(&(*u as f32).to_le_bytes());
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn write_flo(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_flo(flow)?)?;
    Ok(())
}

pub fn parse_flo(bytes: &[u8]) -> Result<FlowField> {
    let parse = |offset: usize, message: &str| Error::Parse {
        offset,
        message: message.into(),
    };
    if bytes.get(..4) != Some(FLO_MAGIC) {
        return Err(parse(0, "missing PIEH magic"));
    }
    let int = |at: usize| -> Result<i32> {
        bytes
            .get(at..at + 4)
            .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| parse(bytes.len(), "header truncated"))
    };
    let (w, h) = (int(4)?, int(8)?);
    if w <= 0 || h <= 0 {
        return Err(parse(4, "dimensions must be positive"));
    }
    let n = (w as usize)
        .checked_mul(h as usize)
        .ok_or_else(|| parse(4, "dimensions overflow"))?;
    let body = bytes
        .get(12..12 + 8 * n)
        .ok_or_else(|| parse(bytes.len(), "flow data truncated"))?;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for pair in body.chunks_exact(8) {
        u.push(f64::from(f32::from_le_bytes([pair[0], pair[1], pair[2], pair[3]])));
        v.push(f64::from(f32::from_le_bytes([pair[4], pair[5], pair[6], pair[7]])));
    }
    FlowField::new(w as usize, h as usize, u, v)
}

pub fn read_flo(path: impl AsRef<Path>) -> Result<FlowField> {
    parse_flo(&fs::read(path)?)
}

/// One `u,v` line per pixel in row-major order.
pub fn write_flow_csv(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::new();
    for (u, v) in flow.u.iter().zip(&flow.v) {
        writeln!(out, "{u},{v}")?;
    }
    fs::write(path, out)?;
    Ok(())
}
