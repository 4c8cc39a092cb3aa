//! Accumulated shortcut edges with provenance.
//!
//! Each record is packed into a `u64` as
//! `from (28 bits) | to (28 bits) | level (7 bits, capped at 63) | anchor (1 bit)`, so a
//! sorted vector orders records by `(from, to)` first. The anchor bit says
//! which endpoint was the shortcutter that produced the edge.

use serde::{Deserialize, Serialize};

use crate::graph::{Digraph, Vertex};

const ID_BITS: u32 = 28;
const ID_MASK: u64 = (1 << ID_BITS) - 1;
const LEVEL_MASK: u64 = 0x3f;
const PAIR_SHIFT: u32 = 8;

/// Which endpoint of a shortcut did the searching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    /// Shortcut `(v, w)` added for a descendant `w` of shortcutter `v`.
    Source,
    /// Shortcut `(w, v)` added for an ancestor `w` of shortcutter `v`.
    Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shortcut {
    pub from: Vertex,
    pub to: Vertex,
    /// Recursion level that first produced the edge.
    pub level: u8,
    pub shortcutter: Vertex,
}

#[inline]
pub(crate) fn pack(from: Vertex, to: Vertex, level: u32, anchor: Anchor) -> u64 {
    debug_assert!((from as u64) <= ID_MASK && (to as u64) <= ID_MASK);
    let level = (level as u64).min(LEVEL_MASK);
    ((from as u64) << (ID_BITS + PAIR_SHIFT))
        | ((to as u64) << PAIR_SHIFT)
        | (level << 1)
        | (anchor == Anchor::Target) as u64
}

#[inline]
fn pair_key(e: u64) -> u64 {
    e >> PAIR_SHIFT
}

#[inline]
fn unpack(e: u64) -> Shortcut {
    let from = (e >> (ID_BITS + PAIR_SHIFT)) as Vertex;
    let to = ((e >> PAIR_SHIFT) & ID_MASK) as Vertex;
    let level = ((e >> 1) & LEVEL_MASK) as u8;
    let shortcutter = if e & 1 == 0 { from } else { to };
    Shortcut {
        from,
        to,
        level,
        shortcutter,
    }
}

/// Dense storage is used once a set would need more bytes as sorted records
/// than as an `n x n` byte matrix, provided the matrix stays under this size.
const DENSE_MAX_BYTES: usize = 1 << 28;

#[derive(Clone, Debug)]
enum Store {
    Sparse(Vec<u64>),
    /// Row-major `n x n` codes; 0 is absent, otherwise `1 + (level << 1 | anchor)`.
    Dense { n: usize, codes: Vec<u8>, len: usize },
}

#[inline]
fn code_of(e: u64) -> u8 {
    1 + (e & 0xff) as u8
}

#[inline]
fn record(from: usize, to: usize, code: u8) -> u64 {
    ((from as u64) << (ID_BITS + PAIR_SHIFT)) | ((to as u64) << PAIR_SHIFT) | (code - 1) as u64
}

/// Deduplicated set of shortcut edges. Self-loops never enter the set. When
/// one pair is produced more than once, the record with the lowest level is
/// kept.
#[derive(Clone, Debug)]
pub struct ShortcutSet {
    store: Store,
}

impl Default for ShortcutSet {
    fn default() -> Self {
        ShortcutSet {
            store: Store::Sparse(Vec::new()),
        }
    }
}

impl PartialEq for ShortcutSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.records().eq(other.records())
    }
}

impl Eq for ShortcutSet {}

impl ShortcutSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from raw packed records over a graph with `n` vertices.
    pub(crate) fn from_raw(n: usize, raw: Vec<u64>) -> Self {
        let mut set = ShortcutSet::new();
        set.absorb_raw(n, raw);
        set
    }

    pub fn from_shortcuts<I: IntoIterator<Item = Shortcut>>(n: usize, it: I) -> Self {
        let raw = it
            .into_iter()
            .filter(|s| s.from != s.to)
            .map(|s| {
                let anchor = if s.shortcutter == s.from {
                    Anchor::Source
                } else {
                    Anchor::Target
                };
                pack(s.from, s.to, s.level as u32, anchor)
            })
            .collect();
        Self::from_raw(n, raw)
    }

    /// Adds raw packed records, switching to dense storage when that is smaller.
    pub(crate) fn absorb_raw(&mut self, n: usize, mut raw: Vec<u64>) {
        if raw.is_empty() {
            return;
        }
        if let Store::Sparse(entries) = &self.store {
            let dense_bytes = n.saturating_mul(n);
            let sparse_bytes = (entries.len() + raw.len()).saturating_mul(8);
            if dense_bytes <= DENSE_MAX_BYTES && sparse_bytes > dense_bytes {
                self.densify(n);
            }
        }
        match &mut self.store {
            Store::Dense { n: dn, codes, len } => {
                debug_assert_eq!(*dn, n);
                for e in raw {
                    let s = unpack(e);
                    let slot = &mut codes[s.from as usize * n + s.to as usize];
                    let c = code_of(e);
                    if *slot == 0 {
                        *len += 1;
                        *slot = c;
                    } else if c < *slot {
                        *slot = c;
                    }
                }
            }
            Store::Sparse(entries) => {
                raw.sort_unstable();
                raw.dedup_by(|b, a| pair_key(*a) == pair_key(*b));
                if entries.is_empty() {
                    raw.shrink_to_fit();
                    *entries = raw;
                } else {
                    *entries = merge_sorted(entries, &raw);
                }
            }
        }
    }

    fn densify(&mut self, n: usize) {
        if let Store::Sparse(entries) = &self.store {
            let mut codes = vec![0u8; n * n];
            for &e in entries {
                let s = unpack(e);
                codes[s.from as usize * n + s.to as usize] = code_of(e);
            }
            let len = entries.len();
            self.store = Store::Dense { n, codes, len };
        }
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Sparse(e) => e.len(),
            Store::Dense { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Packed records in ascending `(from, to)` order.
    fn records(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.store {
            Store::Sparse(e) => Box::new(e.iter().copied()),
            Store::Dense { n, codes, .. } => {
                let n = *n;
                Box::new(
                    codes
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0)
                        .map(move |(i, &c)| record(i / n, i % n, c)),
                )
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Shortcut> + '_ {
        self.records().map(unpack)
    }

    /// `(from, to)` pairs in sorted order.
    pub fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.iter().map(|s| (s.from, s.to))
    }

    pub fn contains(&self, from: Vertex, to: Vertex) -> bool {
        match &self.store {
            Store::Sparse(entries) => {
                let key = ((from as u64) << ID_BITS) | to as u64;
                let i = entries.partition_point(|&e| pair_key(e) < key);
                i < entries.len() && pair_key(entries[i]) == key
            }
            Store::Dense { n, codes, .. } => {
                (from as usize) < *n && (to as usize) < *n && codes[from as usize * n + to as usize] != 0
            }
        }
    }

    /// In-place union; on shared pairs the lower-level record is kept.
    pub fn union_with(&mut self, other: &ShortcutSet) {
        if other.is_empty() {
            return;
        }
        if self.is_empty() {
            self.store = other.store.clone();
            return;
        }
        match (&mut self.store, &other.store) {
            (Store::Sparse(a), Store::Sparse(b)) => *a = merge_sorted(a, b),
            (Store::Dense { n, codes, len }, Store::Dense { n: m, codes: oc, .. }) if n == m => {
                for (slot, &c) in codes.iter_mut().zip(oc) {
                    if c != 0 {
                        if *slot == 0 {
                            *len += 1;
                            *slot = c;
                        } else if c < *slot {
                            *slot = c;
                        }
                    }
                }
            }
            (Store::Dense { n, .. }, _) => {
                let n = *n;
                self.absorb_raw(n, other.records().collect());
            }
            (Store::Sparse(_), Store::Dense { n, .. }) => {
                let mut out = other.clone();
                out.absorb_raw(*n, self.records().collect());
                *self = out;
            }
        }
    }

    pub fn union(mut self, other: &ShortcutSet) -> ShortcutSet {
        self.union_with(other);
        self
    }

    /// Forward adjacency view over the set for graphs with `n` vertices.
    pub fn adjacency(&self, n: usize) -> ShortcutAdjacency<'_> {
        match &self.store {
            Store::Sparse(entries) => {
                let mut offsets = vec![0usize; n + 1];
                for &e in entries {
                    offsets[unpack(e).from as usize + 1] += 1;
                }
                for i in 1..=n {
                    offsets[i] += offsets[i - 1];
                }
                ShortcutAdjacency::Sparse { entries, offsets }
            }
            Store::Dense { n: dn, codes, .. } => ShortcutAdjacency::Dense { n: *dn, codes },
        }
    }

    /// The input graph with every shortcut added.
    pub fn augment(&self, g: &Digraph) -> Digraph {
        g.with_extra_edges(self.pairs())
    }
}

fn merge_sorted(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ka, kb) = (pair_key(a[i]), pair_key(b[j]));
        if ka < kb {
            out.push(a[i]);
            i += 1;
        } else if kb < ka {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i].min(b[j]));
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out.shrink_to_fit();
    out
}

/// Out-neighbor lists of a [`ShortcutSet`], for traversing `G ∪ F` without
/// materializing the union.
pub enum ShortcutAdjacency<'a> {
    Sparse { entries: &'a [u64], offsets: Vec<usize> },
    Dense { n: usize, codes: &'a [u8] },
}

impl ShortcutAdjacency<'_> {
    pub fn for_each_target(&self, v: Vertex, mut f: impl FnMut(Vertex)) {
        let v = v as usize;
        match self {
            ShortcutAdjacency::Sparse { entries, offsets } => {
                if v + 1 < offsets.len() {
                    for &e in &entries[offsets[v]..offsets[v + 1]] {
                        f(((e >> PAIR_SHIFT) & ID_MASK) as Vertex);
                    }
                }
            }
            ShortcutAdjacency::Dense { n, codes } => {
                if v < *n {
                    for (w, &c) in codes[v * n..(v + 1) * n].iter().enumerate() {
                        if c != 0 {
                            f(w as Vertex);
                        }
                    }
                }
            }
        }
    }

    pub fn targets(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        self.for_each_target(v, |w| out.push(w));
        out
    }
}
