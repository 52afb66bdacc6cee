use super::TagError;

/// Detection timestamps of one channel, in integer picoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    channel: u8,
    timestamps: Vec<u64>,
    duration_ps: u64,
}

impl EventStream {
    /// Wraps sorted timestamps; rejects decreasing or out-of-window entries.
    pub fn new(channel: u8, timestamps: Vec<u64>, duration_ps: u64) -> Result<Self, TagError> {
        if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
            return Err(TagError::Unsorted { index: i + 1 });
        }
        if let Some(&last) = timestamps.last() {
            if last >= duration_ps {
                return Err(TagError::OutsideAcquisition {
                    timestamp: last,
                    duration: duration_ps,
                });
            }
        }
        Ok(Self {
            channel,
            timestamps,
            duration_ps,
        })
    }

    pub fn empty(channel: u8, duration_ps: u64) -> Self {
        Self {
            channel,
            timestamps: Vec::new(),
            duration_ps,
        }
    }

    pub fn channel(&self) -> u8 {
        self.channel
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    pub fn into_timestamps(self) -> Vec<u64> {
        self.timestamps
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ps as f64 * 1e-12
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Mean count rate in cps.
    pub fn rate_cps(&self) -> f64 {
        self.len() as f64 / self.duration_s()
    }
}

/// Streams of channels `0..n` sharing one acquisition window and tick size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSet {
    resolution_ps: u64,
    duration_ps: u64,
    streams: Vec<EventStream>,
}

impl EventSet {
    /// Streams must be ordered by channel id `0, 1, …` and match `duration_ps`;
    /// every timestamp and the duration must be whole ticks.
    pub fn new(
        resolution_ps: u64,
        duration_ps: u64,
        streams: Vec<EventStream>,
    ) -> Result<Self, TagError> {
        if resolution_ps == 0 {
            return Err(TagError::Invalid("resolution must be at least 1 ps".into()));
        }
        if !duration_ps.is_multiple_of(resolution_ps) {
            return Err(TagError::Invalid(format!(
                "duration {duration_ps} ps is not a multiple of {resolution_ps} ps"
            )));
        }
        for (i, s) in streams.iter().enumerate() {
            if usize::from(s.channel) != i {
                return Err(TagError::Invalid(format!(
                    "stream {i} carries channel {}",
                    s.channel
                )));
            }
            if s.duration_ps != duration_ps {
                return Err(TagError::Invalid(format!(
                    "channel {i} duration {} differs from {duration_ps}",
                    s.duration_ps
                )));
            }
            if s.timestamps.iter().any(|t| t % resolution_ps != 0) {
                return Err(TagError::Invalid(format!(
                    "channel {i} has timestamps off the {resolution_ps} ps grid"
                )));
            }
        }
        if streams.len() > usize::from(u8::MAX) {
            return Err(TagError::Invalid("channel count must fit one byte".into()));
        }
        Ok(Self {
            resolution_ps,
            duration_ps,
            streams,
        })
    }

    pub fn resolution_ps(&self) -> u64 {
        self.resolution_ps
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn streams(&self) -> &[EventStream] {
        &self.streams
    }

    pub fn into_streams(self) -> Vec<EventStream> {
        self.streams
    }

    pub fn channel(&self, id: u8) -> Option<&EventStream> {
        self.streams.get(usize::from(id))
    }

    pub fn total_events(&self) -> usize {
        self.streams.iter().map(EventStream::len).sum()
    }

    /// All events as `(timestamp, channel)` in file order: by time, ties by channel.
    pub fn merged(&self) -> Vec<(u64, u8)> {
        let mut all: Vec<(u64, u8)> = self
            .streams
            .iter()
            .flat_map(|s| s.timestamps.iter().map(move |&t| (t, s.channel)))
            .collect();
        all.sort_unstable();
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_late() {
        assert!(matches!(
            EventStream::new(0, vec![5, 3], 10),
            Err(TagError::Unsorted { index: 1 })
        ));
        assert!(EventStream::new(0, vec![5, 10], 10).is_err());
        assert!(EventStream::new(0, vec![5, 5, 9], 10).is_ok());
    }

    #[test]
    fn set_requires_contiguous_channels() {
        let a = EventStream::new(0, vec![1], 10).unwrap();
        let c = EventStream::new(2, vec![1], 10).unwrap();
        assert!(EventSet::new(1, 10, vec![a.clone(), c]).is_err());
        let b = EventStream::new(1, vec![2, 4], 10).unwrap();
        let set = EventSet::new(1, 10, vec![a, b]).unwrap();
        assert_eq!(set.merged(), vec![(1, 0), (2, 1), (4, 1)]);
        assert!(EventSet::new(3, 10, vec![]).is_err());
    }
}
