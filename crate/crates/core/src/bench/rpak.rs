//! RPAK v1, the packed-record format for ingestion benchmarks.
//!
//! One file, sequential reads, no per-record open/close. Layout:
//!
//! ```text
//! magic   4 bytes  52 50 41 4B ("RPAK")
//! count   u32 little-endian
//! record  count × (u32 little-endian length, payload bytes)
//! ```
//!
//! Iteration order is exactly input order.

use super::BenchError;

pub const RPAK_MAGIC: [u8; 4] = [0x52, 0x50, 0x41, 0x4B];

/// Pack payloads into RPAK bytes. Every payload must be non-empty and the
/// list itself must be non-empty.
pub fn pack_records<T: AsRef<[u8]>>(records: &[T]) -> Result<Vec<u8>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecordList);
    }
    let mut size = 8usize;
    for (index, r) in records.iter().enumerate() {
        let len = r.as_ref().len();
        if len == 0 {
            return Err(BenchError::EmptyRecord { index });
        }
        size += 4 + len;
    }
    let mut out = Vec::with_capacity(size);
    out.extend_from_slice(&RPAK_MAGIC);
    out.extend_from_slice(&(records.len() as u32).to_le_bytes());
    for r in records {
        let payload = r.as_ref();
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(payload);
    }
    Ok(out)
}

/// Validate the header and return a lazy iterator over record payloads.
/// Payloads are zero-copy slices into the pack; truncation is reported at
/// the failing record index.
pub fn iter_records(packed: &[u8]) -> Result<RecordIter<'_>, BenchError> {
    if packed.len() < 8 {
        return Err(BenchError::PackTruncatedHeader { got: packed.len() });
    }
    if packed[0..4] != RPAK_MAGIC {
        return Err(BenchError::BadPackMagic);
    }
    let count = u32::from_le_bytes(packed[4..8].try_into().expect("bounds checked"));
    Ok(RecordIter {
        data: packed,
        offset: 8,
        index: 0,
        count,
    })
}

pub struct RecordIter<'a> {
    data: &'a [u8],
    offset: usize,
    index: u32,
    count: u32,
}

impl<'a> RecordIter<'a> {
    pub fn count(&self) -> u32 {
        self.count
    }
}

impl<'a> Iterator for RecordIter<'a> {
    type Item = Result<&'a [u8], BenchError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.index >= self.count {
            return None;
        }
        let index = self.index as usize;
        if self.data.len() < self.offset + 4 {
            self.index = self.count; // stop after reporting
            return Some(Err(BenchError::PackTruncated { index }));
        }
        let len = u32::from_le_bytes(
            self.data[self.offset..self.offset + 4]
                .try_into()
                .expect("bounds checked"),
        ) as usize;
        let start = self.offset + 4;
        let Some(end) = start.checked_add(len) else {
            self.index = self.count;
            return Some(Err(BenchError::PackTruncated { index }));
        };
        if self.data.len() < end {
            self.index = self.count;
            return Some(Err(BenchError::PackTruncated { index }));
        }
        self.offset = end;
        self.index += 1;
        Some(Ok(&self.data[start..end]))
    }
}
