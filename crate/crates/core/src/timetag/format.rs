//! `QTAG1` binary timetag files and the `channel,timestamp_ps` CSV dialect.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 5    | magic `QTAG1`                  |
//! | 5      | 1    | format version (1)             |
//! | 6      | 8    | picoseconds per tick           |
//! | 14     | 1    | channel count                  |
//! | 15     | 8    | acquisition duration in ticks  |
//! | 23     | 9·n  | records: channel u8, tick u64  |
//!
//! Records are sorted by tick, ties by channel.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EventSet, EventStream, TagError};

pub const MAGIC: &[u8; 5] = b"QTAG1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 23;
pub const RECORD_LEN: usize = 9;

pub fn write_events<W: Write>(set: &EventSet, out: W) -> Result<(), TagError> {
    let mut w = BufWriter::new(out);
    let res = set.resolution_ps();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&res.to_le_bytes())?;
    w.write_all(&[set.streams().len() as u8])?;
    w.write_all(&(set.duration_ps() / res).to_le_bytes())?;

    // k-way merge over the per-channel cursors; channel order breaks ties.
    let streams = set.streams();
    let mut cursor = vec![0usize; streams.len()];
    let mut record = [0u8; RECORD_LEN];
    loop {
        let mut next: Option<(u64, usize)> = None;
        for (ch, s) in streams.iter().enumerate() {
            if let Some(&t) = s.timestamps().get(cursor[ch]) {
                if next.is_none_or(|(bt, _)| t < bt) {
                    next = Some((t, ch));
                }
            }
        }
        let Some((t, ch)) = next else { break };
        cursor[ch] += 1;
        record[0] = ch as u8;
        record[1..].copy_from_slice(&(t / res).to_le_bytes());
        w.write_all(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events<R: Read>(input: R) -> Result<EventSet, TagError> {
    let mut r = BufReader::new(input);
    let mut header = [0u8; HEADER_LEN];
    read_exact_or(&mut r, &mut header, TagError::TruncatedHeader)?;
    if &header[0..5] != MAGIC {
        return Err(TagError::BadMagic);
    }
    if header[5] != VERSION {
        return Err(TagError::UnsupportedVersion(header[5]));
    }
    let res = u64::from_le_bytes(header[6..14].try_into().unwrap());
    let channels = header[14];
    let duration_ticks = u64::from_le_bytes(header[15..23].try_into().unwrap());
    if res == 0 {
        return Err(TagError::Invalid("zero tick resolution".into()));
    }
    let duration_ps = duration_ticks
        .checked_mul(res)
        .ok_or_else(|| TagError::Invalid("duration overflows picoseconds".into()))?;

    let mut per_channel: Vec<Vec<u64>> = vec![Vec::new(); usize::from(channels)];
    let mut record = [0u8; RECORD_LEN];
    let mut last: Option<(u64, u8)> = None;
    let mut index = 0usize;
    loop {
        let got = read_fill(&mut r, &mut record)?;
        if got == 0 {
            break;
        }
        if got < RECORD_LEN {
            return Err(TagError::TruncatedRecord { index });
        }
        let ch = record[0];
        let tick = u64::from_le_bytes(record[1..].try_into().unwrap());
        if ch >= channels {
            return Err(TagError::UnknownChannel { index, channel: ch });
        }
        if last.is_some_and(|prev| (tick, ch) < prev) {
            return Err(TagError::Unsorted { index });
        }
        if tick >= duration_ticks {
            return Err(TagError::OutsideAcquisition {
                timestamp: tick,
                duration: duration_ticks,
            });
        }
        last = Some((tick, ch));
        per_channel[usize::from(ch)].push(tick * res);
        index += 1;
    }
    let streams = per_channel
        .into_iter()
        .enumerate()
        .map(|(ch, ts)| EventStream::new(ch as u8, ts, duration_ps))
        .collect::<Result<Vec<_>, _>>()?;
    EventSet::new(res, duration_ps, streams)
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], err: TagError) -> Result<(), TagError> {
    match read_fill(r, buf)? {
        n if n == buf.len() => Ok(()),
        _ => Err(err),
    }
}

/// Reads until `buf` is full or EOF; returns bytes read.
fn read_fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize, TagError> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn write_events_path<P: AsRef<Path>>(set: &EventSet, path: P) -> Result<(), TagError> {
    write_events(set, File::create(path)?)
}

pub fn read_events_path<P: AsRef<Path>>(path: P) -> Result<EventSet, TagError> {
    read_events(File::open(path)?)
}

/// Single-stream file: the stream becomes channel 0 at 1 ps resolution.
pub fn write_stream<P: AsRef<Path>>(stream: &EventStream, path: P) -> Result<(), TagError> {
    let s = EventStream::new(0, stream.timestamps().to_vec(), stream.duration_ps())?;
    write_events_path(&EventSet::new(1, stream.duration_ps(), vec![s])?, path)
}

/// Reads a single-channel file.
pub fn read_stream<P: AsRef<Path>>(path: P) -> Result<EventStream, TagError> {
    let set = read_events_path(path)?;
    let n = set.streams().len();
    if n != 1 {
        return Err(TagError::Invalid(format!("expected one channel, found {n}")));
    }
    Ok(set.into_streams().remove(0))
}

/// CSV with header `channel,timestamp_ps`, rows in file order.
pub fn write_events_csv<W: Write>(set: &EventSet, out: W) -> Result<(), TagError> {
    let mut w = BufWriter::new(out);
    w.write_all(b"channel,timestamp_ps\n")?;
    for (t, ch) in set.merged() {
        writeln!(w, "{ch},{t}")?;
    }
    w.flush()?;
    Ok(())
}
