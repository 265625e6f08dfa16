//! Basis-index bit layout shared by every module.
//!
//! Variable (qubit) 0 occupies the most significant bit of an `n`-bit basis
//! index, so the assignment `x = (0,1,1,0,0,0,1,0)` is basis state `|98>`.

use crate::error::{Error, Result};

/// Unit type naming the project-wide bit layout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BitConvention;

impl BitConvention {
    /// Mask selecting variable `var` inside an `n`-bit index.
    #[inline]
    pub fn mask(var: usize, n: usize) -> usize {
        1usize << (n - 1 - var)
    }

    #[inline]
    pub fn bit(index: usize, var: usize, n: usize) -> u8 {
        ((index >> (n - 1 - var)) & 1) as u8
    }

    pub fn decode(index: usize, n: usize) -> Vec<u8> {
        (0..n).map(|v| Self::bit(index, v, n)).collect()
    }

    pub fn encode(bits: &[u8]) -> Result<usize> {
        let mut index = 0usize;
        for (pos, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::Alphabet {
                    position: pos,
                    value: b as i64,
                    alphabet: "binary",
                });
            }
            index = (index << 1) | b as usize;
        }
        Ok(index)
    }

    /// MSB-first rendering, e.g. `01100010`.
    pub fn bitstring(index: usize, n: usize) -> String {
        (0..n)
            .map(|v| if Self::bit(index, v, n) == 1 { '1' } else { '0' })
            .collect()
    }
}
