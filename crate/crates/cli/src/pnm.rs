//! Netpbm grayscale and colour maps: P2/P5 (PGM) and P3/P6 (PPM), 8-bit only.
//!
//! Header fields are whitespace separated and may be interleaved with `#`
//! comments running to end of line. In the binary variants exactly one
//! whitespace byte separates `maxval` from the payload. Samples are kept as
//! stored; they are not rescaled to 255.

use std::path::Path;

use sel_core::RasterImage;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    AsciiGray,
    AsciiRgb,
    BinaryGray,
    BinaryRgb,
}

impl Variant {
    fn channels(self) -> usize {
        match self {
            Variant::AsciiGray | Variant::BinaryGray => 1,
            Variant::AsciiRgb | Variant::BinaryRgb => 3,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
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
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32, PnmError> {
        let token = self
            .token()
            .ok_or_else(|| PnmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PnmError::MalformedHeader(format!(
                    "{what} `{}` is not a number",
                    String::from_utf8_lossy(token)
                ))
            })
    }
}

/// Decodes an in-memory PGM/PPM file.
pub fn decode_pnm(bytes: &[u8]) -> Result<RasterImage, PnmError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().unwrap_or_default();
    let variant = match magic {
        b"P2" => Variant::AsciiGray,
        b"P3" => Variant::AsciiRgb,
        b"P5" => Variant::BinaryGray,
        b"P6" => Variant::BinaryRgb,
        other => {
            return Err(PnmError::UnsupportedFormat(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval > 255 {
        return Err(PnmError::MaxvalTooLarge(maxval));
    }
    if maxval == 0 {
        return Err(PnmError::MalformedHeader("maxval must be positive".into()));
    }
    let expected = width * height * variant.channels();
    let pixels = match variant {
        Variant::BinaryGray | Variant::BinaryRgb => {
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(PnmError::TruncatedPayload { expected, found: 0 }),
            }
            let payload = &bytes[cur.pos..];
            if payload.len() < expected {
                return Err(PnmError::TruncatedPayload {
                    expected,
                    found: payload.len(),
                });
            }
            payload[..expected].to_vec()
        }
        Variant::AsciiGray | Variant::AsciiRgb => {
            let mut pixels = Vec::with_capacity(expected);
            while pixels.len() < expected {
                let Some(token) = cur.token() else {
                    return Err(PnmError::TruncatedPayload {
                        expected,
                        found: pixels.len(),
                    });
                };
                let value: u32 = std::str::from_utf8(token)
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| PnmError::MalformedHeader("non-numeric sample".into()))?;
                pixels.push(value);
            }
            pixels
                .into_iter()
                .map(|v| {
                    u8::try_from(v).map_err(|_| PnmError::SampleOutOfRange { value: v, maxval })
                })
                .collect::<Result<Vec<u8>, _>>()?
        }
    };
    if let Some(&v) = pixels.iter().find(|&&v| u32::from(v) > maxval) {
        return Err(PnmError::SampleOutOfRange {
            value: v.into(),
            maxval,
        });
    }
    RasterImage::new(width, height, variant.channels(), pixels)
        .map_err(|e| PnmError::UnsupportedFormat(e.to_string()))
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<RasterImage, PnmError> {
    decode_pnm(&std::fs::read(path)?)
}

/// Binary encoding (P5 for gray, P6 for RGB) with maxval 255.
pub fn encode_pnm(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// ASCII encoding (P2 for gray, P3 for RGB) with maxval 255.
pub fn encode_pnm_ascii(img: &RasterImage) -> String {
    let magic = if img.channels() == 1 { "P2" } else { "P3" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height());
    for row in img.pixels().chunks(img.width().max(1) * img.channels()) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pnm(img: &RasterImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    std::fs::write(path, encode_pnm(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p5_all_zero() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0u8; 4]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 2, 1));
        assert_eq!(img.pixels(), &[0, 0, 0, 0]);
    }

    #[test]
    fn ascii_and_binary_agree() {
        let p3 = b"P3\n# a comment\n2 1\n255\n255 0 0   0 255 0\n";
        let mut p6 = b"P6 2 1 255\n".to_vec();
        p6.extend([255, 0, 0, 0, 255, 0]);
        assert_eq!(decode_pnm(p3).unwrap(), decode_pnm(&p6).unwrap());
    }

    #[test]
    fn comments_inside_header() {
        let bytes = b"P2 # gray\n# size next\n3 # width\n1\n# max\n9\n1 2 3\n";
        let img = decode_pnm(bytes).unwrap();
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n65535\n"),
            Err(PnmError::MaxvalTooLarge(65535))
        ));
        assert!(matches!(
            decode_pnm(b"P1\n2 2\n"),
            Err(PnmError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n255\n\x00\x00"),
            Err(PnmError::TruncatedPayload {
                expected: 4,
                found: 2
            })
        ));
        assert!(matches!(
            decode_pnm(b"P2\n2 1\n255\n7\n"),
            Err(PnmError::TruncatedPayload {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            decode_pnm(b"P2\n1 1\n10\n11\n"),
            Err(PnmError::SampleOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn binary_round_trip_is_byte_exact(w in 1usize..8, h in 1usize..8, rgb: bool, seed: u64) {
            let channels = if rgb { 3 } else { 1 };
            let mut rng = sel_core::RngStream::new(seed, 0);
            let pixels: Vec<u8> = (0..w * h * channels).map(|_| rng.below(256) as u8).collect();
            let img = RasterImage::new(w, h, channels, pixels).unwrap();
            let bytes = encode_pnm(&img);
            let decoded = decode_pnm(&bytes).unwrap();
            prop_assert_eq!(&decoded, &img);
            prop_assert_eq!(encode_pnm(&decoded), bytes);
            prop_assert_eq!(decode_pnm(encode_pnm_ascii(&img).as_bytes()).unwrap(), img);
        }
    }
}
