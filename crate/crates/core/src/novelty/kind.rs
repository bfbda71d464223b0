use std::fmt;
use std::hash::BuildHasher;
use std::str::FromStr;

use foldhash::quality::FixedState;
use serde::{Deserialize, Serialize};

use crate::textproc::TermSets;

/// The four term families tracked by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Word = 0,
    Phrase = 1,
    WordPair = 2,
    PhrasePair = 3,
}

impl TermKind {
    pub const ALL: [TermKind; 4] = [
        TermKind::Word,
        TermKind::Phrase,
        TermKind::WordPair,
        TermKind::PhrasePair,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Word => "word",
            TermKind::Phrase => "phrase",
            TermKind::WordPair => "word_pair",
            TermKind::PhrasePair => "phrase_pair",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn from_index(i: u128) -> TermKind {
        TermKind::ALL[(i & 3) as usize]
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TermKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TermKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown term kind {s:?}"))
    }
}

/// Subset of kinds to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindSet(pub [bool; 4]);

impl KindSet {
    pub fn all() -> Self {
        KindSet([true; 4])
    }

    pub fn only(kinds: &[TermKind]) -> Self {
        let mut set = [false; 4];
        for k in kinds {
            set[k.index()] = true;
        }
        KindSet(set)
    }

    pub fn contains(self, kind: TermKind) -> bool {
        self.0[kind.index()]
    }
}

impl Default for KindSet {
    fn default() -> Self {
        KindSet::all()
    }
}

/// 128-bit term identity. The low two bits carry the kind.
pub type Fingerprint = u128;

const SEEDS: [(u64, u64); 4] = [
    (0x9e37_79b9_7f4a_7c15, 0xc2b2_ae3d_27d4_eb4f),
    (0x1656_67b1_9e37_79f9, 0x27d4_eb2f_1656_67c5),
    (0x85eb_ca77_c2b2_ae63, 0x94d0_49bb_1331_11eb),
    (0xbf58_476d_1ce4_e5b9, 0xff51_afd7_ed55_8ccd),
];

fn tag(kind: TermKind, h1: u64, h2: u64) -> Fingerprint {
    (((h1 as u128) << 64) | h2 as u128) & !3 | kind as u128
}

pub fn kind_of(fp: Fingerprint) -> TermKind {
    TermKind::from_index(fp)
}

/// Fingerprint of a word or phrase string.
pub fn fingerprint(kind: TermKind, term: &str) -> Fingerprint {
    let (a, b) = SEEDS[kind.index()];
    let h1 = FixedState::with_seed(a).hash_one(term);
    let h2 = FixedState::with_seed(b).hash_one(term);
    tag(kind, h1, h2)
}

/// Fingerprint of an order-normalized pair given its elements' fingerprints.
pub fn pair_fingerprint(kind: TermKind, a: Fingerprint, b: Fingerprint) -> Fingerprint {
    let (s1, s2) = SEEDS[kind.index()];
    let h1 = FixedState::with_seed(s1).hash_one((a, b));
    let h2 = FixedState::with_seed(s2).hash_one((b, a));
    tag(kind, h1, h2)
}

/// One paper's fingerprints for the selected kinds, each in TermSets order.
#[derive(Debug, Clone, Default)]
pub struct PaperPrints {
    pub words: Vec<Fingerprint>,
    pub phrases: Vec<Fingerprint>,
    pub word_pairs: Vec<Fingerprint>,
    pub phrase_pairs: Vec<Fingerprint>,
}

impl PaperPrints {
    pub fn compute(terms: &TermSets, kinds: KindSet) -> Self {
        let vocab_fp: Vec<Fingerprint> = if kinds.contains(TermKind::Word) || kinds.contains(TermKind::WordPair) {
            terms.vocab.iter().map(|w| fingerprint(TermKind::Word, w)).collect()
        } else {
            Vec::new()
        };
        let phrase_fp: Vec<Fingerprint> = if kinds.contains(TermKind::Phrase) || kinds.contains(TermKind::PhrasePair) {
            terms.phrases.iter().map(|p| fingerprint(TermKind::Phrase, p)).collect()
        } else {
            Vec::new()
        };
        let mut out = PaperPrints::default();
        if kinds.contains(TermKind::Word) {
            out.words = vocab_fp
                .iter()
                .zip(&terms.partner_only)
                .filter(|(_, &p)| !p)
                .map(|(&f, _)| f)
                .collect();
        }
        if kinds.contains(TermKind::WordPair) {
            out.word_pairs = terms
                .word_pairs
                .iter()
                .map(|&(i, j)| pair_fingerprint(TermKind::WordPair, vocab_fp[i as usize], vocab_fp[j as usize]))
                .collect();
        }
        if kinds.contains(TermKind::PhrasePair) {
            out.phrase_pairs = terms
                .phrase_pairs
                .iter()
                .map(|&(i, j)| pair_fingerprint(TermKind::PhrasePair, phrase_fp[i as usize], phrase_fp[j as usize]))
                .collect();
        }
        if kinds.contains(TermKind::Phrase) {
            out.phrases = phrase_fp;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.words.len() + self.phrases.len() + self.word_pairs.len() + self.phrase_pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Fingerprint> + '_ {
        self.words
            .iter()
            .chain(&self.phrases)
            .chain(&self.word_pairs)
            .chain(&self.phrase_pairs)
            .copied()
    }

    /// Order-independent digest used to check that both passes saw the
    /// same terms.
    pub fn digest(&self) -> u64 {
        let sum = self.iter().fold(self.len() as u128, |acc, f| acc.wrapping_add(f));
        (sum as u64) ^ ((sum >> 64) as u64).rotate_left(17)
    }
}
