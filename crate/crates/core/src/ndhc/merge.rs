use fixedbitset::FixedBitSet;

use crate::planar::VertexId;

/// Canonical partition: parts sorted internally and ordered by smallest element.
pub type Parts = Vec<Vec<VertexId>>;

pub fn canonical(mut parts: Parts) -> Parts {
    for p in &mut parts {
        p.sort_unstable();
    }
    parts.retain(|p| !p.is_empty());
    parts.sort_unstable_by_key(|p| p[0]);
    parts
}

/// Repeatedly merges a part meeting `kappa` with an adjacent part that does not, scanning
/// `edges` in order until no such edge remains. `kappa` indexes into `parts`.
///
/// Only edges with both ends inside the partitioned set matter; others are skipped.
pub fn merge_parts(
    parts: &[Vec<VertexId>],
    kappa: &[usize],
    edges: &[(VertexId, VertexId)],
    num_vertices: usize,
) -> Parts {
    let k = parts.len();
    let mut label = vec![usize::MAX; num_vertices];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            label[v] = i;
        }
    }
    let mut parent: Vec<usize> = (0..k).collect();
    let mut marked = vec![false; k];
    for &i in kappa {
        marked[i] = true;
    }
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    loop {
        let mut changed = false;
        for &(u, v) in edges {
            let (lu, lv) = (label[u], label[v]);
            if lu == usize::MAX || lv == usize::MAX {
                continue;
            }
            let (a, b) = (find(&mut parent, lu), find(&mut parent, lv));
            if a != b && marked[a] != marked[b] {
                let (keep, absorb) = if marked[a] { (a, b) } else { (b, a) };
                parent[absorb] = keep;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    for (i, p) in parts.iter().enumerate() {
        let r = find(&mut parent, i);
        groups[r].extend_from_slice(p);
    }
    canonical(groups)
}

/// Number of edges (with multiplicity) whose ends lie in different parts of `label`;
/// edges with an end outside the labelled set are ignored.
pub fn count_crossings(label: &[u32], edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> usize {
    edges
        .into_iter()
        .filter(|&(u, v)| {
            let (a, b) = (label[u], label[v]);
            a != u32::MAX && b != u32::MAX && a != b
        })
        .count()
}

pub fn bitset_of(vs: &[VertexId], n: usize) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for &v in vs {
        b.insert(v);
    }
    b
}
