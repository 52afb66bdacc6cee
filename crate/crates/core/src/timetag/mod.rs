//! Timetag streams, the `QTAG1` file format and coincidence analysis.

mod correlate;
mod format;
mod stream;

pub use correlate::*;
pub use format::*;
pub use stream::*;

#[derive(Debug, thiserror::Error)]
pub enum TagError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic, not a QTAG1 file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated record {index}")]
    TruncatedRecord { index: usize },
    #[error("record {index} has unknown channel {channel}")]
    UnknownChannel { index: usize, channel: u8 },
    #[error("timestamps not sorted at index {index}")]
    Unsorted { index: usize },
    #[error("timestamp {timestamp} outside acquisition of length {duration}")]
    OutsideAcquisition { timestamp: u64, duration: u64 },
    #[error("channel {channel} has zero count rate")]
    ZeroRate { channel: u8 },
    #[error("{0}")]
    Invalid(String),
}
