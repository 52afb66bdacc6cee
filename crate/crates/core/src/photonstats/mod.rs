//! Monte Carlo detection-event streams for pair-source, heralded-source and
//! converted heralded-source correlation experiments.
//!
//! Photon streams are sorted `Vec<u64>` timestamps in picoseconds. Every
//! random element draws from its own sub-stream of the master seed (see
//! [`SeedTree`]), so adding or removing an element leaves the draws of the
//! others untouched.

mod detector;
mod elements;
mod experiment;
mod source;

pub use detector::*;
pub use elements::*;
pub use experiment::*;
pub use source::*;

use std::hash::Hasher;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::timetag::TagError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error(transparent)]
    Tag(#[from] TagError),
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SimError::InvalidParameter {
            name,
            reason: format!("{value} is outside [0, 1]"),
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<(), SimError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidParameter {
            name,
            reason: format!("{value} must be finite and non-negative"),
        })
    }
}

/// Master seed plus per-element stream selection.
///
/// `rng(name)` is ChaCha8 keyed by the master seed with stream number
/// `FNV-1a-64(name)`; streams of distinct names never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, element: &str) -> ChaCha8Rng {
        let mut h = fnv::FnvHasher::default();
        h.write(element.as_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(h.finish());
        rng
    }
}
