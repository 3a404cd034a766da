//! Portable graymap reading and writing.

use std::path::Path;

use crate::error::{Error, Result};

/// A decoded grayscale image with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gray {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f32>,
}

/// Quantizes to 8 bits and emits binary (P5) bytes.
pub fn encode_pgm(pixels: &[f32], height: usize, width: usize) -> Result<Vec<u8>> {
    if pixels.len() != height * width {
        return Err(Error::dim(format!(
            "{} pixels for a {height}x{width} image",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|&v| quantize(v)));
    Ok(out)
}

fn quantize(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn write_pgm(path: &Path, pixels: &[f32], height: usize, width: usize) -> Result<()> {
    let bytes = encode_pgm(pixels, height, width)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Gray> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|msg| Error::Image {
        path: path.to_path_buf(),
        msg,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&[u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.token().ok_or_else(|| format!("missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what} `{}`", String::from_utf8_lossy(tok)))
    }
}

/// Decodes P5 (8- or 16-bit) and P2 graymaps.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Gray, String> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().ok_or("empty file")?.to_vec();
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        other => return Err(format!("not a graymap (magic `{}`)", String::from_utf8_lossy(other))),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero-sized image".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f32;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        cur.pos += 1;
        let raster = &bytes[cur.pos.min(bytes.len())..];
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if raster.len() < need {
            return Err(format!("raster truncated: {} of {need} bytes", raster.len()));
        }
        if wide {
            for c in raster[..need].chunks_exact(2) {
                pixels.push(u16::from_be_bytes([c[0], c[1]]) as f32 * scale);
            }
        } else {
            pixels.extend(raster[..need].iter().map(|&b| b as f32 * scale));
        }
    } else {
        for k in 0..count {
            let v = cur.number(&format!("sample {k}"))?;
            if v > maxval {
                return Err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f32 * scale);
        }
    }
    Ok(Gray {
        height,
        width,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_identity_on_quantized_values() {
        let pixels: Vec<f32> = (0..12).map(|k| k as f32 * 20.0 / 255.0).collect();
        let bytes = encode_pgm(&pixels, 3, 4).unwrap();
        let g = decode_pgm(&bytes).unwrap();
        assert_eq!((g.height, g.width), (3, 4));
        assert_eq!(encode_pgm(&g.pixels, 3, 4).unwrap(), bytes);
        for (a, b) in pixels.iter().zip(&g.pixels) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn ascii_with_comments() {
        let g = decode_pgm(b"P2\n# hi\n2 1\n# there\n4\n0 4\n").unwrap();
        assert_eq!(g.pixels, vec![0.0, 1.0]);
    }

    #[test]
    fn sixteen_bit_binary() {
        let mut bytes = b"P5 1 1 65535\n".to_vec();
        bytes.extend([0xff, 0xff]);
        assert_eq!(decode_pgm(&bytes).unwrap().pixels, vec![1.0]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_pgm(b"P6 1 1 255\n\0\0\0").is_err());
        assert!(decode_pgm(b"P5 2 2 255\n\0").is_err());
        assert!(decode_pgm(b"P2 1 1 3\n9").is_err());
        assert!(encode_pgm(&[0.0; 3], 2, 2).is_err());
    }

    #[test]
    fn out_of_range_values_are_clamped() {
        let bytes = encode_pgm(&[-1.0, 2.0, f32::NAN], 1, 3).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 255, 0]);
    }
}
