//! Dense `channels × height × width` latent grids and the `MCCDLAT1`
//! interchange format.
//!
//! Values are held as `f64` in memory; the file format stores `f32`
//! little-endian, so writing narrows and reading widens exactly.

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"MCCDLAT1";
const RANK: u32 = 3;
const HEADER_LEN: usize = 8 + 4 + 4 * RANK as usize;

#[derive(Debug, Error, PartialEq)]
pub enum LatentError {
    #[error("grid dimensions must all be >= 1, got {channels}x{height}x{width}")]
    EmptyDims {
        channels: usize,
        height: usize,
        width: usize,
    },
    #[error("data length {got} does not match {channels}x{height}x{width} = {expected}")]
    LengthMismatch {
        channels: usize,
        height: usize,
        width: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: Shape, got: Shape },
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("truncated latent file at byte {offset}: need {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("bad magic at byte 0: expected MCCDLAT1, found {found:?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported rank {rank} at byte 8 (only rank 3 is supported)")]
    BadRank { rank: u32 },
    #[error("invalid dimensions at byte {offset}: {source}")]
    Dims { offset: usize, source: LatentError },
    #[error("non-finite f32 at byte {offset}")]
    NonFinite { offset: usize },
    #[error("{extra} trailing bytes after payload at byte {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane(&self) -> usize {
        self.height * self.width
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

/// A `channels × height × width` real-valued grid stored row-major
/// (channel, then row, then column).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    shape: Shape,
    data: Vec<f64>,
}

impl LatentGrid {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self, LatentError> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(LatentError::EmptyDims {
                channels,
                height,
                width,
            });
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(LatentError::LengthMismatch {
                channels,
                height,
                width,
                expected,
                got: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LatentError::NonFinite { index, value });
        }
        Ok(Self {
            shape: Shape::new(channels, height, width),
            data,
        })
    }

    /// # Panics
    /// Panics if any dimension is zero.
    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        assert!(channels > 0 && height > 0 && width > 0, "empty latent grid");
        assert!(value.is_finite());
        Self {
            shape: Shape::new(channels, height, width),
            data: vec![value; channels * height * width],
        }
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    /// Builds a grid by evaluating `f(channel, row, col)` at every cell.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, LatentError> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape.channels
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        debug_assert!(c < self.shape.channels && y < self.shape.height && x < self.shape.width);
        (c * self.shape.height + y) * self.shape.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(c, y, x)]
    }

    #[inline]
    pub(crate) fn set(&mut self, c: usize, y: usize, x: usize, value: f64) {
        let i = self.index(c, y, x);
        self.data[i] = value;
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.shape.plane();
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_shape(&self, expected: Shape) -> Result<(), LatentError> {
        if self.shape == expected {
            Ok(())
        } else {
            Err(LatentError::ShapeMismatch {
                expected,
                got: self.shape,
            })
        }
    }

    /// Rounds every value through `f32`, i.e. the precision the file format keeps.
    pub fn quantized(&self) -> Self {
        Self {
            shape: self.shape,
            data: self.data.iter().map(|&v| v as f32 as f64).collect(),
        }
    }

    pub fn l2_distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&RANK.to_le_bytes());
        for d in [self.shape.channels, self.shape.height, self.shape.width] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &self.data {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let need = |offset: usize, len: usize| -> Result<(), FormatError> {
            if bytes.len() < offset + len {
                Err(FormatError::Truncated {
                    offset: bytes.len(),
                    needed: offset + len - bytes.len(),
                })
            } else {
                Ok(())
            }
        };
        let read_u32 = |offset: usize| u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());

        need(0, 8)?;
        if &bytes[..8] != MAGIC {
            return Err(FormatError::BadMagic {
                found: bytes[..8].to_vec(),
            });
        }
        need(8, 4)?;
        let rank = read_u32(8);
        if rank != RANK {
            return Err(FormatError::BadRank { rank });
        }
        need(12, 12)?;
        let (channels, height, width) = (read_u32(12) as usize, read_u32(16) as usize, read_u32(20) as usize);
        let count = channels
            .checked_mul(height)
            .and_then(|n| n.checked_mul(width))
            .filter(|&n| n > 0)
            .ok_or(FormatError::Dims {
                offset: 12,
                source: LatentError::EmptyDims {
                    channels,
                    height,
                    width,
                },
            })?;
        need(HEADER_LEN, count * 4)?;
        let end = HEADER_LEN + count * 4;
        if bytes.len() > end {
            return Err(FormatError::Trailing {
                offset: end,
                extra: bytes.len() - end,
            });
        }
        let mut data = Vec::with_capacity(count);
        for (i, chunk) in bytes[HEADER_LEN..end].chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(FormatError::NonFinite {
                    offset: HEADER_LEN + 4 * i,
                });
            }
            data.push(v as f64);
        }
        Ok(Self {
            shape: Shape::new(channels, height, width),
            data,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self, FormatError> {
        let bytes = std::fs::read(path).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
