use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::path::{Path, PathBuf};

use super::kind::{kind_of, Fingerprint};
use super::spill::{write_run, Merge, Rec, RecIter, RunOrder, RunReader};
use crate::error::Result;

/// Occurrence aggregate of one term: number of papers and the two
/// smallest paper sequence numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Agg {
    pub occ: u32,
    pub first: u32,
    /// `u32::MAX` while only one paper is known.
    pub second: u32,
}

pub const NO_SEQ: u32 = u32::MAX;

impl Agg {
    pub fn single(seq: u32) -> Self {
        Agg {
            occ: 1,
            first: seq,
            second: NO_SEQ,
        }
    }

    /// Combines two aggregates of disjoint paper sets. Associative and
    /// commutative.
    pub fn merge(&mut self, other: Agg) {
        self.occ += other.occ;
        let mut seqs = [self.first, self.second, other.first, other.second];
        seqs.sort_unstable();
        self.first = seqs[0];
        self.second = seqs[1];
    }

    fn add(&mut self, seq: u32) {
        self.merge(Agg::single(seq));
    }
}

/// Fingerprints are already uniformly distributed, so the map hashes them
/// by folding the halves.
#[derive(Default)]
pub(crate) struct FpHasher(u64);

impl Hasher for FpHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }

    fn write_u128(&mut self, v: u128) {
        self.0 = (v >> 64) as u64 ^ (v as u64).rotate_left(29);
    }
}

type FpMap = HashMap<Fingerprint, Agg, BuildHasherDefault<FpHasher>>;

/// Approximate heap bytes per unit of `HashMap::capacity` for this map.
pub const MAP_BYTES_PER_SLOT: usize = 38;

/// One hash partition of the term space. Spills sorted runs when its map
/// would outgrow the memory share.
pub struct CountShard {
    pub shard_id: usize,
    map: FpMap,
    limit_bytes: usize,
    dir: PathBuf,
    runs: Vec<PathBuf>,
    pub spills: u64,
    pub spilled_bytes: u64,
}

/// Sorted credit candidates (`occ >= 2`) of one shard, ordered by first
/// paper then fingerprint. Fields: `a` = first, `b` = occ, `c` = second.
#[derive(Debug, Default)]
pub struct CreditRuns {
    pub(crate) mem: Vec<Rec>,
    pub(crate) runs: Vec<PathBuf>,
}

impl CreditRuns {
    pub(crate) fn iter(&self) -> Result<RecIter<'_>> {
        let mut inputs: Vec<RecIter<'_>> = Vec::with_capacity(self.runs.len() + 1);
        for r in &self.runs {
            inputs.push(Box::new(RunReader::open(r)?));
        }
        if !self.mem.is_empty() {
            inputs.push(Box::new(self.mem.iter().copied().map(Ok)));
        }
        Ok(Box::new(Merge::new(inputs, RunOrder::FieldA)))
    }

    pub fn mem_bytes(&self) -> usize {
        self.mem.capacity() * std::mem::size_of::<Rec>()
    }
}

/// Result of finishing one shard.
#[derive(Debug, Default)]
pub struct ShardSummary {
    pub credits: CreditRuns,
    pub distinct: [u64; 4],
    pub candidates: [u64; 4],
    pub spills: u64,
    pub spilled_bytes: u64,
}

impl CountShard {
    pub fn new(shard_id: usize, limit_bytes: usize, dir: &Path) -> Self {
        CountShard {
            shard_id,
            map: FpMap::default(),
            limit_bytes,
            dir: dir.to_path_buf(),
            runs: Vec::new(),
            spills: 0,
            spilled_bytes: 0,
        }
    }

    pub fn bytes(&self) -> usize {
        self.map.capacity() * MAP_BYTES_PER_SLOT
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn absorb(&mut self, items: &[(Fingerprint, u32)]) -> Result<()> {
        for &(fp, seq) in items {
            if let Some(agg) = self.map.get_mut(&fp) {
                agg.add(seq);
                continue;
            }
            let full = self.map.len() == self.map.capacity();
            let grown = (self.map.capacity().max(3) * 2 + 1) * MAP_BYTES_PER_SLOT;
            if full && grown > self.limit_bytes && !self.map.is_empty() {
                self.spill()?;
            }
            self.map.insert(fp, Agg::single(seq));
        }
        Ok(())
    }

    /// Writes the map as a key-sorted run and empties it, keeping its
    /// allocation for reuse.
    pub fn spill(&mut self) -> Result<()> {
        let mut recs: Vec<Rec> = self.map.drain().map(|(key, g)| agg_rec(key, g)).collect();
        RunOrder::Key.sort(&mut recs);
        let path = self.dir.join(format!("s{}-r{}.run", self.shard_id, self.runs.len()));
        self.spilled_bytes += write_run(&path, &recs)?;
        self.runs.push(path);
        self.spills += 1;
        Ok(())
    }

    /// Merges everything seen into the credit candidates of this shard.
    /// Candidate buffers larger than the shard's memory share go to disk.
    pub fn finish(mut self) -> Result<ShardSummary> {
        let mut out = CreditWriter {
            dir: self.dir.clone(),
            shard_id: self.shard_id,
            limit: (self.limit_bytes / std::mem::size_of::<Rec>()).max(1024),
            buffer: Vec::new(),
            runs: Vec::new(),
            summary: ShardSummary::default(),
        };

        if self.runs.is_empty() {
            let map = std::mem::take(&mut self.map);
            let mut recs: Vec<Rec> = map.into_iter().map(|(key, g)| agg_rec(key, g)).collect();
            RunOrder::Key.sort(&mut recs);
            for r in recs {
                out.emit(r.key, rec_agg(&r))?;
            }
        } else {
            if !self.map.is_empty() {
                self.spill()?;
            }
            self.map = FpMap::default();
            let mut inputs: Vec<RecIter<'_>> = Vec::new();
            for r in &self.runs {
                inputs.push(Box::new(RunReader::open(r)?));
            }
            let mut current: Option<(u128, Agg)> = None;
            for rec in Merge::new(inputs, RunOrder::Key) {
                let rec = rec?;
                match current.as_mut() {
                    Some((key, g)) if *key == rec.key => g.merge(rec_agg(&rec)),
                    _ => {
                        if let Some((key, g)) = current.take() {
                            out.emit(key, g)?;
                        }
                        current = Some((rec.key, rec_agg(&rec)));
                    }
                }
            }
            if let Some((key, g)) = current {
                out.emit(key, g)?;
            }
            for r in &self.runs {
                let _ = std::fs::remove_file(r);
            }
        }

        let mut summary = out.summary;
        let mut buffer = out.buffer;
        RunOrder::FieldA.sort(&mut buffer);
        buffer.shrink_to_fit();
        summary.credits = CreditRuns {
            mem: buffer,
            runs: out.runs,
        };
        summary.spills += self.spills;
        summary.spilled_bytes += self.spilled_bytes;
        Ok(summary)
    }
}

struct CreditWriter {
    dir: PathBuf,
    shard_id: usize,
    limit: usize,
    buffer: Vec<Rec>,
    runs: Vec<PathBuf>,
    summary: ShardSummary,
}

impl CreditWriter {
    fn emit(&mut self, key: u128, g: Agg) -> Result<()> {
        let k = kind_of(key).index();
        self.summary.distinct[k] += 1;
        if g.occ < 2 {
            return Ok(());
        }
        self.summary.candidates[k] += 1;
        self.buffer.push(Rec {
            key,
            a: g.first,
            b: g.occ,
            c: g.second,
        });
        if self.buffer.len() >= self.limit {
            RunOrder::FieldA.sort(&mut self.buffer);
            let path = self.dir.join(format!("s{}-c{}.run", self.shard_id, self.runs.len()));
            self.summary.spilled_bytes += write_run(&path, &self.buffer)?;
            self.summary.spills += 1;
            self.runs.push(path);
            self.buffer.clear();
        }
        Ok(())
    }
}

fn agg_rec(key: u128, g: Agg) -> Rec {
    Rec {
        key,
        a: g.occ,
        b: g.first,
        c: g.second,
    }
}

fn rec_agg(r: &Rec) -> Agg {
    Agg {
        occ: r.a,
        first: r.b,
        second: r.c,
    }
}
