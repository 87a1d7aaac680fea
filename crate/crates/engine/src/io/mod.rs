//! On-disk formats: the NCAW weight file, grid snapshots and 8-bit images.
//!
//! Every multi-byte field is little-endian and floats are stored as raw
//! IEEE-754 `f32` (or `f64` for the snapshot time), so a write followed by a
//! read reproduces the input bit for bit.

mod image;
mod state;
mod weights;

pub use self::image::{encode_png, load_target, quantize, rgba8_frame, save_png, to_rgb8};
pub use self::state::{decode_state, encode_state, load_state, read_state, save_state, write_state, STATE_HEADER_LEN};
pub use self::weights::{
    decode_weights, encode_weights, load_weights, read_weights, save_weights, write_weights, WEIGHTS_HEADER_LEN,
    WEIGHTS_MAGIC, WEIGHTS_VERSION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"NCAW\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated {what}: need {expected} bytes, have {actual}")]
    Truncated {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("unknown variant code {0}")]
    UnknownVariant(u8),
    #[error("unknown padding code {0}")]
    UnknownPadding(u8),
    #[error("header dimensions too large")]
    Oversized,
    #[error(transparent)]
    Invalid(#[from] nca_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] ::image::ImageError),
}

/// Little-endian cursor over a byte slice.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], what: &'static str) -> Self {
        Self { bytes, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Oversized)?;
        if end > self.bytes.len() {
            return Err(FormatError::Truncated {
                what: self.what,
                expected: end,
                actual: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, FormatError> {
        let bytes = self.take(n.checked_mul(4).ok_or(FormatError::Oversized)?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("chunk of 4")))
            .collect())
    }

    fn finish(self) -> Result<(), FormatError> {
        match self.bytes.len() - self.pos {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n)),
        }
    }
}

fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    out.reserve(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn dim(v: u32) -> Result<usize, FormatError> {
    usize::try_from(v).map_err(|_| FormatError::Oversized)
}
