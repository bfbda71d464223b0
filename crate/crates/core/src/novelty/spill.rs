//! Sorted run files and their k-way merge.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Fixed 28-byte little-endian record: a 128-bit key and three u32 fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rec {
    pub key: u128,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

pub(crate) const REC_BYTES: usize = 28;

impl Rec {
    fn encode(&self, buf: &mut [u8; REC_BYTES]) {
        buf[..16].copy_from_slice(&self.key.to_le_bytes());
        buf[16..20].copy_from_slice(&self.a.to_le_bytes());
        buf[20..24].copy_from_slice(&self.b.to_le_bytes());
        buf[24..].copy_from_slice(&self.c.to_le_bytes());
    }

    fn decode(buf: &[u8; REC_BYTES]) -> Rec {
        let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        Rec {
            key: u128::from_le_bytes(buf[..16].try_into().unwrap()),
            a: u32_at(16),
            b: u32_at(20),
            c: u32_at(24),
        }
    }
}

/// Sort order of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RunOrder {
    /// By key.
    Key,
    /// By field `a`, then key.
    FieldA,
}

impl RunOrder {
    pub fn sort_key(self, r: &Rec) -> (u32, u128) {
        match self {
            RunOrder::Key => (0, r.key),
            RunOrder::FieldA => (r.a, r.key),
        }
    }

    pub fn sort(self, recs: &mut [Rec]) {
        recs.sort_unstable_by_key(|r| self.sort_key(r));
    }
}

pub(crate) fn write_run(path: &Path, recs: &[Rec]) -> Result<u64> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::with_capacity(1 << 16, file);
    let mut buf = [0u8; REC_BYTES];
    for r in recs {
        r.encode(&mut buf);
        out.write_all(&buf).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok((recs.len() * REC_BYTES) as u64)
}

pub(crate) struct RunReader {
    path: PathBuf,
    input: BufReader<File>,
}

impl RunReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(RunReader {
            path: path.to_path_buf(),
            input: BufReader::with_capacity(1 << 16, file),
        })
    }
}

impl Iterator for RunReader {
    type Item = Result<Rec>;

    fn next(&mut self) -> Option<Result<Rec>> {
        let mut buf = [0u8; REC_BYTES];
        match self.input.read_exact(&mut buf) {
            Ok(()) => Some(Ok(Rec::decode(&buf))),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => None,
            Err(e) => Some(Err(Error::io(&self.path, e))),
        }
    }
}

pub(crate) type RecIter<'a> = Box<dyn Iterator<Item = Result<Rec>> + Send + 'a>;

/// Merges individually sorted inputs into one sorted stream. Equal keys are
/// yielded one after another, lowest input index first.
pub(crate) struct Merge<'a> {
    inputs: Vec<RecIter<'a>>,
    heap: BinaryHeap<Reverse<((u32, u128), usize)>>,
    heads: Vec<Option<Rec>>,
    order: RunOrder,
    primed: bool,
}

impl<'a> Merge<'a> {
    pub fn new(inputs: Vec<RecIter<'a>>, order: RunOrder) -> Self {
        let n = inputs.len();
        Merge {
            inputs,
            heap: BinaryHeap::with_capacity(n),
            heads: vec![None; n],
            order,
            primed: false,
        }
    }

    fn advance(&mut self, i: usize) -> Result<()> {
        if let Some(rec) = self.inputs[i].next().transpose()? {
            self.heap.push(Reverse((self.order.sort_key(&rec), i)));
            self.heads[i] = Some(rec);
        } else {
            self.heads[i] = None;
        }
        Ok(())
    }
}

impl Iterator for Merge<'_> {
    type Item = Result<Rec>;

    fn next(&mut self) -> Option<Result<Rec>> {
        if !self.primed {
            self.primed = true;
            for i in 0..self.inputs.len() {
                if let Err(e) = self.advance(i) {
                    return Some(Err(e));
                }
            }
        }
        let Reverse((_, i)) = self.heap.pop()?;
        let rec = self.heads[i].take().expect("heap entry has a head");
        if let Err(e) = self.advance(i) {
            return Some(Err(e));
        }
        Some(Ok(rec))
    }
}
