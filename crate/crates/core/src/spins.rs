//! Spin configurations and their canonical encoding.
//!
//! A configuration is a slice of `i8` entries, each `+1` or `-1`. Because the
//! Ising energy is invariant under a global flip, `sigma` and `-sigma` are
//! identified by a canonical key: the configuration is first flipped so that
//! `sigma[0] == +1`, then bit `i` of the key is set when `sigma[i] == -1`.
//! Bit 0 is therefore always clear and `key >> 1` indexes the `2^(n-1)`
//! canonical configurations.

use crate::error::{Error, Result};

/// Largest mode count representable by a `u64` canonical key.
pub const MAX_KEYED_MODES: usize = 64;

pub fn validate_spins(sigma: &[i8], n: usize) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::param(format!(
            "spin vector has length {}, expected {n}",
            sigma.len()
        )));
    }
    if let Some(pos) = sigma.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::param(format!(
            "spin {pos} is {}, expected +1 or -1",
            sigma[pos]
        )));
    }
    Ok(())
}

/// Canonical key of `sigma` (see module docs). Requires `sigma.len() <= 64`.
pub fn canonical_key(sigma: &[i8]) -> u64 {
    debug_assert!(sigma.len() <= MAX_KEYED_MODES);
    let flip = sigma.first().copied().unwrap_or(1);
    sigma
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &s)| s * flip < 0)
        .fold(0u64, |key, (i, _)| key | (1 << i))
}

/// Expands a canonical key into the configuration with `sigma[0] == +1`.
pub fn config_from_key(key: u64, n: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if key >> i & 1 == 1 { -1 } else { 1 })
        .collect()
}

pub fn flip_all(sigma: &[i8]) -> Vec<i8> {
    sigma.iter().map(|s| -s).collect()
}

/// `+`/`-` string form used in CSV exports.
pub fn format_config(sigma: &[i8]) -> String {
    sigma.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn parse_config(text: &str) -> Result<Vec<i8>> {
    text.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(Error::param(format!("invalid spin character {other:?}"))),
        })
        .collect()
}
