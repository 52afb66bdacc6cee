//! Models for a thin-film lithium niobate sum-frequency converter and the
//! upconversion single-photon detector built from it.

pub mod conversion;
pub mod dispersion;
pub mod noise;
pub mod timetag;
pub mod photonstats;
pub mod spd;
