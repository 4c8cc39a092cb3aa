//! Labels placed by shortcutters, and partitioning by exact label sets.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::{Vertex, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelKind {
    Anc,
    Des,
    Eliminated,
}

/// A mark left on a vertex by a shortcutter (a top-level vertex id).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub kind: LabelKind,
    pub shortcutter: Vertex,
}

impl Label {
    pub fn anc(v: Vertex) -> Self {
        Label { kind: LabelKind::Anc, shortcutter: v }
    }

    pub fn des(v: Vertex) -> Self {
        Label { kind: LabelKind::Des, shortcutter: v }
    }

    pub fn eliminated(v: Vertex) -> Self {
        Label {
            kind: LabelKind::Eliminated,
            shortcutter: v,
        }
    }
}

#[inline]
fn key(shortcutter: Vertex, kind: LabelKind) -> u32 {
    (shortcutter << 1) | (kind == LabelKind::Des) as u32
}

/// Per-vertex label sets over the vertices `0..n` of one subproblem.
///
/// Anc/Des labels are stored as sorted keys `shortcutter << 1 | is_des`, so
/// comparing key vectors compares label sets in the canonical order
/// (by shortcutter, then Anc before Des). Eliminated labels only matter for
/// exclusion and counting, so they are kept as a per-vertex list.
#[derive(Clone, Debug, Default)]
pub struct LabelTable {
    keys: Vec<Vec<u32>>,
    eliminated: Vec<Vec<Vertex>>,
    assignments: u64,
}

impl LabelTable {
    pub fn new(n: usize) -> Self {
        LabelTable {
            keys: vec![Vec::new(); n],
            eliminated: vec![Vec::new(); n],
            assignments: 0,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    /// Adds a label to `v`. A second label from the same shortcutter replaces
    /// nothing and is rejected.
    pub fn add(&mut self, v: Vertex, label: Label) -> bool {
        let v = v as usize;
        if self.has_label_from(v as Vertex, label.shortcutter) {
            return false;
        }
        match label.kind {
            LabelKind::Eliminated => self.eliminated[v].push(label.shortcutter),
            kind => {
                let k = key(label.shortcutter, kind);
                let keys = &mut self.keys[v];
                // Shortcutters are normally processed in ascending order, so
                // this is almost always a push.
                if keys.last().is_none_or(|&last| last < k) {
                    keys.push(k);
                } else {
                    let at = keys.partition_point(|&x| x < k);
                    keys.insert(at, k);
                }
            }
        }
        self.assignments += 1;
        true
    }

    /// Adds a label from a shortcutter larger than every shortcutter that has
    /// labeled `v` so far.
    #[inline]
    pub(crate) fn push_ordered(&mut self, v: Vertex, label: Label) {
        let v = v as usize;
        match label.kind {
            LabelKind::Eliminated => self.eliminated[v].push(label.shortcutter),
            kind => {
                let k = key(label.shortcutter, kind);
                debug_assert!(self.keys[v].last().is_none_or(|&last| (last >> 1) < label.shortcutter));
                self.keys[v].push(k);
            }
        }
        self.assignments += 1;
    }

    fn has_label_from(&self, v: Vertex, s: Vertex) -> bool {
        let keys = &self.keys[v as usize];
        keys.binary_search(&(s << 1)).is_ok()
            || keys.binary_search(&((s << 1) | 1)).is_ok()
            || self.eliminated[v as usize].contains(&s)
    }

    pub fn is_eliminated(&self, v: Vertex) -> bool {
        !self.eliminated[v as usize].is_empty()
    }

    /// Number of label records on `v`, Eliminated ones included.
    pub fn label_count(&self, v: Vertex) -> usize {
        self.keys[v as usize].len() + self.eliminated[v as usize].len()
    }

    pub fn max_label_count(&self) -> usize {
        (0..self.keys.len()).map(|v| self.label_count(v as Vertex)).max().unwrap_or(0)
    }

    /// Total labels assigned so far.
    pub fn assignments(&self) -> u64 {
        self.assignments
    }

    pub fn labels(&self, v: Vertex) -> Vec<Label> {
        let mut out: Vec<Label> = self.keys[v as usize]
            .iter()
            .map(|&k| Label {
                kind: if k & 1 == 1 { LabelKind::Des } else { LabelKind::Anc },
                shortcutter: k >> 1,
            })
            .collect();
        out.extend(self.eliminated[v as usize].iter().map(|&s| Label::eliminated(s)));
        out
    }

    pub(crate) fn keys(&self, v: Vertex) -> &[u32] {
        &self.keys[v as usize]
    }
}

fn compare_counting(a: &[u32], b: &[u32], comparisons: &mut u64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        *comparisons += 1;
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    *comparisons += 1;
    a.len().cmp(&b.len())
}

/// Groups the non-eliminated vertices among `0..labels.vertex_count()` into
/// cells of identical label sets. Cells are sorted by their label keys and
/// each cell lists its vertices ascending. `comparisons` counts key element
/// comparisons spent ordering the cells, plus one unit per label hashed.
pub(crate) fn partition_cells(labels: &LabelTable, comparisons: &mut u64) -> Vec<Vec<Vertex>> {
    let mut index: HashMap<&[u32], usize> = HashMap::new();
    let mut cells: Vec<(&[u32], Vec<Vertex>)> = Vec::new();
    for v in 0..labels.vertex_count() as Vertex {
        if labels.is_eliminated(v) {
            continue;
        }
        let k = labels.keys(v);
        *comparisons += k.len() as u64;
        let slot = *index.entry(k).or_insert_with(|| {
            cells.push((k, Vec::new()));
            cells.len() - 1
        });
        cells[slot].1.push(v);
    }
    cells.sort_by(|a, b| compare_counting(a.0, b.0, comparisons));
    cells.into_iter().map(|(_, c)| c).collect()
}

/// Partition of `vertices` by exact label sets; vertices carrying any
/// Eliminated label are left out.
pub fn partition_by_labels(vertices: &VertexSet, labels: &LabelTable) -> Vec<VertexSet> {
    let mut restricted = LabelTable::new(labels.vertex_count());
    for v in 0..labels.vertex_count() as Vertex {
        if vertices.contains(v) {
            restricted.keys[v as usize] = labels.keys[v as usize].clone();
            restricted.eliminated[v as usize] = labels.eliminated[v as usize].clone();
        } else {
            restricted.eliminated[v as usize] = vec![Vertex::MAX];
        }
    }
    let mut cmp = 0;
    partition_cells(&restricted, &mut cmp)
        .into_iter()
        .map(|c| VertexSet::from_iter(vertices.universe(), c))
        .collect()
}
