//! Binary shot log for offline recombination.
//!
//! Layout: the 8-byte magic `DVQSHOT1`, then fixed 21-byte little-endian
//! records `(fragment: u32, input: u8, shot: u64, bitstring: u64)`.

use std::io::{Read, Write};

use super::sampling::Streams;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DVQSHOT1";
const RECORD: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub fragment: u32,
    pub input: u8,
    pub shot: u64,
    pub bitstring: u64,
}

pub fn write_shot_log(mut w: impl Write, records: &[ShotRecord]) -> Result<()> {
    w.write_all(MAGIC)?;
    for r in records {
        let mut buf = [0u8; RECORD];
        buf[..4].copy_from_slice(&r.fragment.to_le_bytes());
        buf[4] = r.input;
        buf[5..13].copy_from_slice(&r.shot.to_le_bytes());
        buf[13..].copy_from_slice(&r.bitstring.to_le_bytes());
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_shot_log(mut r: impl Read) -> Result<Vec<ShotRecord>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::ShotLog("missing magic header".into()));
    }
    let body = &bytes[MAGIC.len()..];
    if body.len() % RECORD != 0 {
        return Err(Error::ShotLog(format!("truncated record at byte {}", MAGIC.len() + body.len() / RECORD * RECORD)));
    }
    Ok(body
        .chunks_exact(RECORD)
        .map(|c| ShotRecord {
            fragment: u32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
            input: c[4],
            shot: u64::from_le_bytes(c[5..13].try_into().expect("8 bytes")),
            bitstring: u64::from_le_bytes(c[13..].try_into().expect("8 bytes")),
        })
        .collect())
}

/// Flattens streams into records, shot index counting per `(fragment, input)`.
pub fn records_from_streams(streams: &Streams) -> Vec<ShotRecord> {
    let mut out = Vec::new();
    for (f, pair) in streams.iter().enumerate() {
        for (input, s) in pair.iter().enumerate() {
            out.extend(s.iter().enumerate().map(|(i, &b)| ShotRecord {
                fragment: f as u32,
                input: input as u8,
                shot: i as u64,
                bitstring: b,
            }));
        }
    }
    out
}

/// Rebuilds per-fragment streams, ordered by shot index, from log records.
pub fn streams_from_records(records: &[ShotRecord], fragments: usize) -> Result<Streams> {
    let mut tagged: Vec<Vec<(u64, u64)>> = vec![Vec::new(); 2 * fragments];
    for r in records {
        if r.fragment as usize >= fragments || r.input > 1 {
            return Err(Error::ShotLog(format!("record for fragment {}, input {} outside the plan", r.fragment, r.input)));
        }
        tagged[2 * r.fragment as usize + r.input as usize].push((r.shot, r.bitstring));
    }
    let mut streams = Vec::with_capacity(fragments);
    for f in 0..fragments {
        let mut pair = [Vec::new(), Vec::new()];
        for input in 0..2 {
            let s = &mut tagged[2 * f + input];
            s.sort_unstable();
            if s.iter().enumerate().any(|(i, (shot, _))| *shot != i as u64) {
                return Err(Error::ShotLog(format!("gap or duplicate in shot indices of fragment {f}, input {input}")));
            }
            pair[input] = s.iter().map(|(_, b)| *b).collect();
        }
        streams.push(pair);
    }
    Ok(streams)
}
