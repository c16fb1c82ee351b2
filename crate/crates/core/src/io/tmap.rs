//! TMAP: little-endian raw float raster.
//!
//! Layout: `b"TMAP"`, version `u16`, channel tag `u16`, width `u32`,
//! height `u32`, then `width * height` `f32` values row-major from the
//! top-left pixel.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::raster::{Channel, RasterMap};

pub const MAGIC: &[u8; 4] = b"TMAP";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum TmapError {
    #[error("bad magic {found:?} at byte 0")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported version {version} at byte 4")]
    Version { version: u16 },
    #[error("unknown channel tag {tag} at byte 6")]
    Channel { tag: u16 },
    #[error("zero dimension {width}x{height} at byte 8")]
    EmptyDims { width: u32, height: u32 },
    #[error("truncated at byte {offset}: expected {expected} bytes, file has {actual}")]
    Truncated {
        offset: usize,
        expected: usize,
        actual: usize,
    },
    #[error("{extra} trailing bytes after payload at byte {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("value {value} outside [0, 1] at byte {offset}")]
    OutOfRange { offset: usize, value: f32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn encode_tmap(map: &RasterMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&map.channel().tag().to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    for v in map.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn need(bytes: &[u8], offset: usize, len: usize) -> Result<(), TmapError> {
    if bytes.len() < offset + len {
        return Err(TmapError::Truncated {
            offset: bytes.len(),
            expected: offset + len,
            actual: bytes.len(),
        });
    }
    Ok(())
}

pub fn decode_tmap(bytes: &[u8]) -> Result<RasterMap, TmapError> {
    need(bytes, 0, 4)?;
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(TmapError::BadMagic { found: magic });
    }
    need(bytes, 4, HEADER_LEN - 4)?;
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u16_at(4);
    if version != VERSION {
        return Err(TmapError::Version { version });
    }
    let tag = u16_at(6);
    let channel = Channel::from_tag(tag).ok_or(TmapError::Channel { tag })?;
    let (width, height) = (u32_at(8), u32_at(12));
    if width == 0 || height == 0 {
        return Err(TmapError::EmptyDims { width, height });
    }
    let count = width as usize * height as usize;
    need(bytes, HEADER_LEN, 4 * count)?;
    let end = HEADER_LEN + 4 * count;
    if bytes.len() > end {
        return Err(TmapError::Trailing {
            offset: end,
            extra: bytes.len() - end,
        });
    }
    let mut data = Vec::with_capacity(count);
    for (k, chunk) in bytes[HEADER_LEN..end].chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes(chunk.try_into().unwrap());
        if !(0.0..=1.0).contains(&value) {
            return Err(TmapError::OutOfRange {
                offset: HEADER_LEN + 4 * k,
                value,
            });
        }
        data.push(value);
    }
    Ok(
        RasterMap::from_vec(width as usize, height as usize, channel, data)
            .expect("validated above"),
    )
}

pub fn read_tmap(path: &Path) -> Result<RasterMap, TmapError> {
    let bytes = fs::read(path).map_err(|source| TmapError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_tmap(&bytes)
}

pub fn write_tmap(map: &RasterMap, path: &Path) -> Result<(), TmapError> {
    fs::write(path, encode_tmap(map)).map_err(|source| TmapError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> RasterMap {
        RasterMap::from_vec(
            3,
            2,
            Channel::Character,
            vec![0.0, 0.25, 1.0, 0.5, 0.125, 0.75],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_3x2() {
        let m = sample();
        let bytes = encode_tmap(&m);
        assert_eq!(bytes.len(), HEADER_LEN + 24);
        assert_eq!(&bytes[6..8], &[1, 0]);
        assert_eq!(decode_tmap(&bytes).unwrap(), m);
    }

    #[test]
    fn bad_magic() {
        let mut b = encode_tmap(&sample());
        b[0] = b'X';
        assert!(matches!(decode_tmap(&b), Err(TmapError::BadMagic { found }) if &found == b"XMAP"));
    }

    #[test]
    fn short_payload() {
        let b = encode_tmap(&sample());
        let err = decode_tmap(&b[..b.len() - 4]).unwrap_err();
        assert!(matches!(
            err,
            TmapError::Truncated {
                offset: 36,
                expected: 40,
                actual: 36
            }
        ));
        assert!(err.to_string().contains("byte 36"));
    }

    #[test]
    fn header_errors() {
        let b = encode_tmap(&sample());
        assert!(matches!(
            decode_tmap(&b[..10]),
            Err(TmapError::Truncated { offset: 10, .. })
        ));
        let mut v = b.clone();
        v[4] = 2;
        assert!(matches!(
            decode_tmap(&v),
            Err(TmapError::Version { version: 2 })
        ));
        let mut c = b.clone();
        c[6] = 7;
        assert!(matches!(
            decode_tmap(&c),
            Err(TmapError::Channel { tag: 7 })
        ));
        let mut t = b.clone();
        t.push(0);
        assert!(matches!(
            decode_tmap(&t),
            Err(TmapError::Trailing {
                offset: 40,
                extra: 1
            })
        ));
    }

    #[test]
    fn out_of_range_value() {
        let mut b = encode_tmap(&sample());
        b[HEADER_LEN + 8..HEADER_LEN + 12].copy_from_slice(&1.5f32.to_le_bytes());
        let err = decode_tmap(&b).unwrap_err();
        assert!(matches!(err, TmapError::OutOfRange { offset: 24, .. }));
        b[HEADER_LEN + 8..HEADER_LEN + 12].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_tmap(&b),
            Err(TmapError::OutOfRange { offset: 24, .. })
        ));
    }

    proptest! {
        #[test]
        fn arbitrary_maps_round_trip(
            w in 1usize..12,
            h in 1usize..12,
            tag in 0u16..3,
            seed in proptest::collection::vec(0u32..=(1 << 24), 144),
        ) {
            let data: Vec<f32> = (0..w * h).map(|k| seed[k] as f32 / (1 << 24) as f32).collect();
            let m = RasterMap::from_vec(w, h, Channel::from_tag(tag).unwrap(), data).unwrap();
            let back = decode_tmap(&encode_tmap(&m)).unwrap();
            prop_assert_eq!(back.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back, m);
        }
    }
}
