//! Minimal netpbm reader for gray (P2/P5) and color (P3/P6) maps with
//! maxval <= 255, plus a P5 writer.

use std::path::Path;

use crate::error::{Error, PnmError, Result};
use crate::perception::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    AsciiGray,
    AsciiColor,
    BinaryGray,
    BinaryColor,
}

impl Format {
    fn channels(self) -> usize {
        match self {
            Format::AsciiGray | Format::BinaryGray => 1,
            Format::AsciiColor | Format::BinaryColor => 3,
        }
    }

    fn is_gray(self) -> bool {
        self.channels() == 1
    }
}

struct Header {
    format: Format,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte (binary) or first sample token (ASCII).
    data_offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments running to end of line.
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next unsigned decimal token, with its starting offset.
    fn number(&mut self, what: &str) -> Result<(u32, usize), PnmError> {
        self.skip_blank();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            let reason = match self.bytes.get(start) {
                None => format!("unexpected end of data while reading {what}"),
                Some(b) => format!("expected {what}, found byte 0x{b:02x}"),
            };
            return Err(PnmError::MalformedHeader {
                offset: start,
                reason,
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        let value = text.parse::<u32>().map_err(|_| PnmError::MalformedHeader {
            offset: start,
            reason: format!("{what} `{text}` out of range"),
        })?;
        Ok((value, start))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header, PnmError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => Format::AsciiGray,
        Some(b"P3") => Format::AsciiColor,
        Some(b"P5") => Format::BinaryGray,
        Some(b"P6") => Format::BinaryColor,
        Some([b'P', d]) if d.is_ascii_digit() => {
            return Err(PnmError::Unsupported {
                magic: format!("P{}", *d as char),
                hint: "only P2/P5 gray maps and P3/P6 pixmaps are supported",
            })
        }
        _ => return Err(PnmError::BadMagic),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PnmError::MalformedHeader {
            offset: 2,
            reason: "magic number must be followed by whitespace".into(),
        });
    }
    let (width, w_at) = cur.number("width")?;
    let (height, h_at) = cur.number("height")?;
    if width == 0 {
        return Err(PnmError::MalformedHeader {
            offset: w_at,
            reason: "width is zero".into(),
        });
    }
    if height == 0 {
        return Err(PnmError::MalformedHeader {
            offset: h_at,
            reason: "height is zero".into(),
        });
    }
    let (maxval, m_at) = cur.number("maxval")?;
    if maxval == 0 {
        return Err(PnmError::MalformedHeader {
            offset: m_at,
            reason: "maxval is zero".into(),
        });
    }
    if maxval > 255 {
        return Err(PnmError::MaxvalTooLarge {
            offset: m_at,
            maxval,
        });
    }
    let data_offset = match format {
        Format::BinaryGray | Format::BinaryColor => {
            // exactly one whitespace byte separates the header from the raster
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos + 1,
                Some(_) => {
                    return Err(PnmError::MalformedHeader {
                        offset: cur.pos,
                        reason: "expected whitespace after maxval".into(),
                    })
                }
                None => cur.pos,
            }
        }
        Format::AsciiGray | Format::AsciiColor => cur.pos,
    };
    Ok(Header {
        format,
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset,
    })
}

fn scale(sample: u32, maxval: u32) -> u8 {
    if maxval == 255 {
        sample as u8
    } else {
        ((sample * 255 + maxval / 2) / maxval) as u8
    }
}

/// Integer Rec.601 luma: `(299 R + 587 G + 114 B + 500) / 1000`.
pub fn rec601_luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Raw samples of a decoded file, scaled to 0..=255.
fn read_samples(bytes: &[u8], h: &Header) -> Result<Vec<u8>, PnmError> {
    let expected = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(h.format.channels()))
        .ok_or_else(|| PnmError::MalformedHeader {
            offset: 2,
            reason: "image dimensions overflow".into(),
        })?;
    let mut out = Vec::with_capacity(expected);
    match h.format {
        Format::BinaryGray | Format::BinaryColor => {
            let raster = &bytes[h.data_offset.min(bytes.len())..];
            if raster.len() < expected {
                return Err(PnmError::Truncated {
                    offset: bytes.len(),
                    expected,
                    found: raster.len(),
                });
            }
            for (i, &s) in raster[..expected].iter().enumerate() {
                if u32::from(s) > h.maxval {
                    return Err(PnmError::InvalidSample {
                        offset: h.data_offset + i,
                        reason: format!("sample {s} exceeds maxval {}", h.maxval),
                    });
                }
                out.push(scale(u32::from(s), h.maxval));
            }
        }
        Format::AsciiGray | Format::AsciiColor => {
            let mut cur = Cursor {
                bytes,
                pos: h.data_offset,
            };
            while out.len() < expected {
                cur.skip_blank();
                if cur.pos >= bytes.len() {
                    return Err(PnmError::Truncated {
                        offset: bytes.len(),
                        expected,
                        found: out.len(),
                    });
                }
                let (s, at) = cur.number("sample").map_err(|e| match e {
                    PnmError::MalformedHeader { offset, reason } => {
                        PnmError::InvalidSample { offset, reason }
                    }
                    other => other,
                })?;
                if s > h.maxval {
                    return Err(PnmError::InvalidSample {
                        offset: at,
                        reason: format!("sample {s} exceeds maxval {}", h.maxval),
                    });
                }
                out.push(scale(s, h.maxval));
            }
        }
    }
    Ok(out)
}

/// Decodes a P2/P5 gray map. Color pixmaps are rejected; see
/// [`decode_ppm_as_gray`].
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let h = parse_header(bytes)?;
    if !h.format.is_gray() {
        return Err(PnmError::Unsupported {
            magic: String::from_utf8_lossy(&bytes[..2]).into_owned(),
            hint: "color pixmap; use the PPM-to-gray loader",
        });
    }
    let samples = read_samples(bytes, &h)?;
    Ok(GrayImage::new(h.height, h.width, samples).expect("dimensions checked"))
}

/// Decodes a P3/P6 pixmap and converts it to gray with integer Rec.601 luma.
pub fn decode_ppm_as_gray(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let h = parse_header(bytes)?;
    if h.format.is_gray() {
        return Err(PnmError::Unsupported {
            magic: String::from_utf8_lossy(&bytes[..2]).into_owned(),
            hint: "gray map; use the PGM loader",
        });
    }
    let samples = read_samples(bytes, &h)?;
    let gray = samples
        .chunks_exact(3)
        .map(|p| rec601_luma(p[0], p[1], p[2]))
        .collect();
    Ok(GrayImage::new(h.height, h.width, gray).expect("dimensions checked"))
}

/// Decodes any supported netpbm file, converting color to gray.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let h = parse_header(bytes)?;
    if h.format.is_gray() {
        decode_pgm(bytes)
    } else {
        decode_ppm_as_gray(bytes)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(decode_pgm(&read(path.as_ref())?)?)
}

pub fn load_ppm_as_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(decode_ppm_as_gray(&read(path.as_ref())?)?)
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(decode_gray(&read(path.as_ref())?)?)
}

/// Binary P5 encoding with maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}
