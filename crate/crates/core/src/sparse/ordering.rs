use std::collections::VecDeque;

use super::SparseMatrix;

/// Symmetrised adjacency lists of the off-diagonal pattern.
fn adjacency(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = a.dim();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> Vec<usize> {
    let mut order = vec![start];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !seen[v]).collect();
        next.sort_by_key(|&v| adj[v].len());
        for v in next {
            seen[v] = true;
            order.push(v);
            q.push_back(v);
        }
    }
    order
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj = adjacency(a);
    let mut placed = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by_key(|&v| adj[v].len());
    for &root in &candidates {
        if placed[root] {
            continue;
        }
        // Move towards a pseudo-peripheral node: the last node of a BFS.
        let mut scratch = placed.clone();
        let far = *bfs_levels(&adj, root, &mut scratch).last().unwrap();
        let order = bfs_levels(&adj, far, &mut placed);
        perm.extend(order);
    }
    perm.reverse();
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        let mut t = Vec::new();
        for i in 0..10 {
            t.push((i, i, 2.0));
            t.push((i, (i * 7) % 10, -1.0));
        }
        let a = SparseMatrix::from_triplets(10, &t).unwrap();
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
