use super::{strongly_connected_components, Digraph};

/// Number of ordered pairs `(u, v)` with `u != v` and `u` reaching `v`.
///
/// Reach sets are propagated as bitsets over the condensation in reverse
/// topological order, so memory is `components * n / 8` bytes. Returns
/// `None` when that would exceed `max_bytes`.
pub fn reachable_pair_count(g: &Digraph, max_bytes: usize) -> Option<u64> {
    let n = g.vertex_count();
    let scc = strongly_connected_components(g);
    let stride = n.div_ceil(64);
    if scc.count.saturating_mul(stride).saturating_mul(8) > max_bytes {
        return None;
    }
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); scc.count];
    for v in 0..n {
        members[scc.ids[v] as usize].push(v as u32);
    }
    let mut reach = vec![0u64; scc.count * stride];
    let mut total = 0u64;
    // Successor components carry smaller ids, so ascending order is a valid
    // processing order.
    for c in 0..scc.count {
        let (done, rest) = reach.split_at_mut(c * stride);
        let row = &mut rest[..stride];
        for &v in &members[c] {
            row[v as usize / 64] |= 1 << (v % 64);
            for &w in g.out_neighbors(v) {
                let d = scc.ids[w as usize] as usize;
                if d != c {
                    let src = &done[d * stride..(d + 1) * stride];
                    for (a, b) in row.iter_mut().zip(src) {
                        *a |= *b;
                    }
                }
            }
        }
        let size: u64 = row.iter().map(|w| w.count_ones() as u64).sum();
        total += members[c].len() as u64 * (size - 1);
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{transitive_closure_oracle, OracleConfig};

    #[test]
    fn counts_match_closure() {
        let g = Digraph::new(7, [(0, 1), (1, 2), (2, 0), (2, 3), (4, 3), (5, 5), (6, 4)]).unwrap();
        let m = transitive_closure_oracle(&g, &OracleConfig::default()).unwrap();
        let expected = (m.count() - g.vertex_count()) as u64;
        assert_eq!(reachable_pair_count(&g, usize::MAX), Some(expected));
    }

    #[test]
    fn path_pairs() {
        let g = Digraph::new(10, (0..9).map(|i| (i, i + 1))).unwrap();
        assert_eq!(reachable_pair_count(&g, usize::MAX), Some(45));
        assert_eq!(reachable_pair_count(&g, 8), None);
    }
}
