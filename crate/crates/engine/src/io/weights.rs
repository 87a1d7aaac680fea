//! NCAW weight files.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "NCAW"
//!      4     4  version (u32) = 1
//!      8     4  C (u32)
//!     12     4  D (u32)
//!     16     1  variant (0 vanilla, 1 pe, 2 noise)
//!     17     1  padding (0 circular, 1 replicate)
//!     18     4  sobel divisor (f32)
//!     22     4  laplacian divisor (f32)
//!     26    16  reserved, zero on write, ignored on read
//!     42     …  W1 (D × (4C + p), row-major), b1 (D), W2 (C × D, row-major)
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nca_core::weights::Padding;
use nca_core::{RuleWeights, Variant};

use super::{dim, put_f32s, FormatError, Reader};

pub const WEIGHTS_MAGIC: [u8; 4] = *b"NCAW";
pub const WEIGHTS_VERSION: u32 = 1;
pub const WEIGHTS_HEADER_LEN: usize = 42;

/// Serializes validated weights.
pub fn encode_weights(w: &RuleWeights) -> Result<Vec<u8>, FormatError> {
    w.validate()?;
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| FormatError::Oversized);
    let mut out = Vec::with_capacity(WEIGHTS_HEADER_LEN + 4 * (w.w1.len() + w.b1.len() + w.w2.len()));
    out.extend_from_slice(&WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(w.channels)?.to_le_bytes());
    out.extend_from_slice(&to_u32(w.hidden)?.to_le_bytes());
    out.push(w.variant.code());
    out.push(w.padding.code());
    out.extend_from_slice(&w.sobel_divisor.to_le_bytes());
    out.extend_from_slice(&w.laplacian_divisor.to_le_bytes());
    out.extend_from_slice(&[0u8; 16]);
    put_f32s(&mut out, &w.w1);
    put_f32s(&mut out, &w.b1);
    put_f32s(&mut out, &w.w2);
    Ok(out)
}

pub fn decode_weights(bytes: &[u8]) -> Result<RuleWeights, FormatError> {
    let mut r = Reader::new(bytes, "weight file");
    let magic: [u8; 4] = r.array()?;
    if magic != WEIGHTS_MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != WEIGHTS_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let channels = dim(r.u32()?)?;
    let hidden = dim(r.u32()?)?;
    let variant_code = r.u8()?;
    let padding_code = r.u8()?;
    let sobel_divisor = r.f32()?;
    let laplacian_divisor = r.f32()?;
    r.take(16)?;
    let variant = Variant::from_code(variant_code).ok_or(FormatError::UnknownVariant(variant_code))?;
    let padding = Padding::from_code(padding_code).ok_or(FormatError::UnknownPadding(padding_code))?;
    let inputs = channels
        .checked_mul(4)
        .and_then(|v| v.checked_add(variant.positional_inputs()))
        .ok_or(FormatError::Oversized)?;
    let w1 = r.f32s(hidden.checked_mul(inputs).ok_or(FormatError::Oversized)?)?;
    let b1 = r.f32s(hidden)?;
    let w2 = r.f32s(channels.checked_mul(hidden).ok_or(FormatError::Oversized)?)?;
    r.finish()?;
    let w = RuleWeights {
        channels,
        hidden,
        w1,
        b1,
        w2,
        variant,
        padding,
        sobel_divisor,
        laplacian_divisor,
    };
    w.validate()?;
    Ok(w)
}

pub fn write_weights(w: &RuleWeights, mut sink: impl Write) -> Result<(), FormatError> {
    sink.write_all(&encode_weights(w)?)?;
    Ok(())
}

pub fn read_weights(mut source: impl Read) -> Result<RuleWeights, FormatError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_weights(&bytes)
}

pub fn save_weights(w: &RuleWeights, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, encode_weights(w)?)?;
    Ok(())
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<RuleWeights, FormatError> {
    decode_weights(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_size_follows_dimensions() {
        let w = RuleWeights::zeros(12, 96, Variant::Noise);
        let bytes = encode_weights(&w).unwrap();
        assert_eq!(bytes.len(), WEIGHTS_HEADER_LEN + 4 * (96 * 48 + 96 + 12 * 96));
        let pe = RuleWeights::zeros(12, 96, Variant::Pe);
        assert_eq!(
            encode_weights(&pe).unwrap().len(),
            WEIGHTS_HEADER_LEN + 4 * (96 * 50 + 96 + 12 * 96)
        );
    }

    #[test]
    fn header_layout() {
        let w = RuleWeights::zeros(3, 5, Variant::Pe);
        let b = encode_weights(&w).unwrap();
        assert_eq!(&b[0..4], b"NCAW");
        assert_eq!(b[4..8], 1u32.to_le_bytes());
        assert_eq!(b[8..12], 3u32.to_le_bytes());
        assert_eq!(b[12..16], 5u32.to_le_bytes());
        assert_eq!((b[16], b[17]), (1, 1));
        assert_eq!(b[18..22], 8.0f32.to_le_bytes());
        assert_eq!(b[22..26], 4.0f32.to_le_bytes());
        assert!(b[26..42].iter().all(|&x| x == 0));
    }

    #[test]
    fn reserved_bytes_are_ignored() {
        let w = RuleWeights::random(3, 4, Variant::Vanilla, 1, 1.0);
        let mut b = encode_weights(&w).unwrap();
        b[30] = 0xAB;
        assert_eq!(decode_weights(&b).unwrap(), w);
    }

    #[test]
    fn rejects_malformed_files() {
        let w = RuleWeights::random(3, 4, Variant::Noise, 1, 1.0);
        let good = encode_weights(&w).unwrap();
        let mut bad = good.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_weights(&bad), Err(FormatError::BadMagic(_))));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_weights(&bad), Err(FormatError::UnsupportedVersion(2))));
        assert!(matches!(
            decode_weights(&good[..good.len() - 1]),
            Err(FormatError::Truncated { .. })
        ));
        assert!(matches!(
            decode_weights(&good[..10]),
            Err(FormatError::Truncated { .. })
        ));
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode_weights(&bad), Err(FormatError::TrailingBytes(1))));
        let mut bad = good.clone();
        bad[16] = 7;
        assert!(matches!(decode_weights(&bad), Err(FormatError::UnknownVariant(7))));
        // noise variant with replicate padding
        let mut bad = good.clone();
        bad[17] = 1;
        assert!(matches!(decode_weights(&bad), Err(FormatError::Invalid(_))));
        let mut bad = good;
        bad[WEIGHTS_HEADER_LEN..WEIGHTS_HEADER_LEN + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_weights(&bad), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn huge_dimensions_do_not_allocate() {
        let mut b = encode_weights(&RuleWeights::zeros(3, 4, Variant::Noise)).unwrap();
        b[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        b[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_weights(&b).is_err());
    }
}
