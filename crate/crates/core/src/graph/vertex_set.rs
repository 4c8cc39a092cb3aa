use super::Vertex;

/// Bitset over `[0, universe)` with constant-time membership and ascending
/// iteration.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    universe: usize,
    len: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for v in 0..universe {
            s.insert(v as Vertex);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = Vertex>>(universe: usize, it: I) -> Self {
        let mut s = Self::new(universe);
        for v in it {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        let v = v as usize;
        v < self.universe && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Returns true when `v` was not already present.
    pub fn insert(&mut self, v: Vertex) -> bool {
        let i = v as usize;
        assert!(i < self.universe, "vertex {v} outside universe {}", self.universe);
        let bit = 1u64 << (i % 64);
        let fresh = self.words[i / 64] & bit == 0;
        self.words[i / 64] |= bit;
        self.len += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        let i = v as usize;
        if i >= self.universe {
            return false;
        }
        let bit = 1u64 << (i % 64);
        let present = self.words[i / 64] & bit != 0;
        self.words[i / 64] &= !bit;
        self.len -= present as usize;
        present
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some((wi * 64) as Vertex + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn membership_agrees_with_iteration(universe in 1usize..300, picks in prop::collection::vec(0usize..300, 0..80)) {
            let picks: Vec<Vertex> = picks.into_iter().filter(|&v| v < universe).map(|v| v as Vertex).collect();
            let s = VertexSet::from_iter(universe, picks.iter().copied());
            let listed = s.to_vec();
            prop_assert_eq!(listed.len(), s.len());
            prop_assert!(listed.windows(2).all(|w| w[0] < w[1]));
            for v in 0..universe as Vertex {
                prop_assert_eq!(s.contains(v), listed.binary_search(&v).is_ok());
                prop_assert_eq!(s.contains(v), picks.contains(&v));
            }
        }
    }

    #[test]
    fn insert_remove() {
        let mut s = VertexSet::new(10);
        assert!(s.insert(3));
        assert!(!s.insert(3));
        assert!(s.remove(3));
        assert!(!s.remove(3));
        assert!(s.is_empty());
        assert!(!s.contains(99));
    }
}
