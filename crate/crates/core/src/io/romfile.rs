//! `FROM` binary ROM container.
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic `FROM`                       |
//! | 4      | 1    | version (1)                        |
//! | 5      | 2    | rule count, big-endian             |
//! | 7      | 2    | element count, big-endian          |
//! | 9      | n    | antecedent module                  |
//! | 9+n    | n    | conclusion module                  |
//!
//! Each module is `rules * elements * 4` bits packed MSB first into
//! `n = ceil(bits / 8)` bytes, zero padded.

use thiserror::Error;

use crate::bitserial::WORD_BITS;
use crate::chip::{ChipError, Module, RomImage};

pub const MAGIC: &[u8; 4] = b"FROM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RomFileError {
    #[error("bad magic, expected `FROM`")]
    BadMagic,
    #[error("unsupported container version {0}")]
    Version(u8),
    #[error("truncated: {found} bytes, need {needed}")]
    Truncated { needed: usize, found: usize },
    #[error("payload is {found} bytes but the header declares {declared}")]
    Inconsistent { declared: usize, found: usize },
    #[error("nonzero padding bits in the {0:?} module")]
    Padding(Module),
    #[error("rule count {0} does not fit the container")]
    TooManyRules(usize),
    #[error(transparent)]
    Image(#[from] ChipError),
}

fn module_bytes(bits: usize) -> usize {
    bits.div_ceil(8)
}

fn pack_bits(bits: &[bool], out: &mut Vec<u8>) {
    for chunk in bits.chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)));
        out.push(byte);
    }
}

fn unpack_bits(bytes: &[u8], bits: usize, module: Module) -> Result<Vec<bool>, RomFileError> {
    let out: Vec<bool> = (0..bytes.len() * 8)
        .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect();
    if out[bits..].iter().any(|&b| b) {
        return Err(RomFileError::Padding(module));
    }
    Ok(out[..bits].to_vec())
}

/// Serializes an image into the `FROM` container.
pub fn rom_dump(image: &RomImage) -> Result<Vec<u8>, RomFileError> {
    let rules = u16::try_from(image.rule_count())
        .map_err(|_| RomFileError::TooManyRules(image.rule_count()))?;
    let elements = image.elements() as u16;
    let bits = image.rule_count() * image.elements() * WORD_BITS;
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * module_bytes(bits));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&rules.to_be_bytes());
    out.extend_from_slice(&elements.to_be_bytes());
    pack_bits(image.module(Module::Antecedent), &mut out);
    pack_bits(image.module(Module::Conclusion), &mut out);
    Ok(out)
}

/// Parses a `FROM` container. Never returns a partially filled image.
pub fn rom_load(bytes: &[u8]) -> Result<RomImage, RomFileError> {
    if bytes.len() < HEADER_LEN {
        if !MAGIC.starts_with(&bytes[..bytes.len().min(4)]) {
            return Err(RomFileError::BadMagic);
        }
        return Err(RomFileError::Truncated {
            needed: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(RomFileError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(RomFileError::Version(bytes[4]));
    }
    let rules = u16::from_be_bytes([bytes[5], bytes[6]]) as usize;
    let elements = u16::from_be_bytes([bytes[7], bytes[8]]) as usize;
    let bits = rules * elements * WORD_BITS;
    let n = module_bytes(bits);
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < 2 * n {
        return Err(RomFileError::Truncated {
            needed: HEADER_LEN + 2 * n,
            found: bytes.len(),
        });
    }
    if payload.len() > 2 * n {
        return Err(RomFileError::Inconsistent {
            declared: 2 * n,
            found: payload.len(),
        });
    }
    let antecedent = unpack_bits(&payload[..n], bits, Module::Antecedent)?;
    let conclusion = unpack_bits(&payload[n..], bits, Module::Conclusion)?;
    Ok(RomImage::new(rules, elements, antecedent, conclusion)?)
}
