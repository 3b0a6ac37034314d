use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::SparseSymmetricMatrix;

fn adjacency(a: &SparseSymmetricMatrix) -> Vec<Vec<usize>> {
    let n = a.dim();
    let mut adj = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if j != i {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Breadth-first level structure from `root`: visit order and the level of
/// each visited vertex.
fn bfs(adj: &[Vec<usize>], root: usize, mark: &mut [u32], stamp: u32) -> (Vec<usize>, Vec<usize>) {
    let mut order = alloc::vec![root];
    let mut level = alloc::vec![0usize; 1];
    mark[root] = stamp;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        let lv = level[head];
        head += 1;
        for &w in &adj[v] {
            if mark[w] != stamp {
                mark[w] = stamp;
                order.push(w);
                level.push(lv + 1);
            }
        }
    }
    (order, level)
}

/// Reverse Cuthill–McKee ordering. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymmetricMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj = adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = alloc::vec![false; n];
    let mut mark = alloc::vec![0u32; n];
    let mut stamp = 0u32;
    let mut perm = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        // pseudo-peripheral root (George–Liu)
        let mut root = seed;
        stamp += 1;
        let (mut order, mut level) = bfs(&adj, root, &mut mark, stamp);
        loop {
            let depth = *level.last().expect("root visited");
            let candidate = order
                .iter()
                .zip(&level)
                .filter(|&(_, &l)| l == depth)
                .map(|(&v, _)| v)
                .min_by_key(|&v| (degree[v], v))
                .expect("last level is non-empty");
            stamp += 1;
            let (o2, l2) = bfs(&adj, candidate, &mut mark, stamp);
            if *l2.last().expect("candidate visited") > depth {
                root = candidate;
                order = o2;
                level = l2;
            } else {
                break;
            }
        }

        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    perm.reverse();
    perm
}

/// Largest distance between a row and its first stored column under `perm`.
pub fn bandwidth(a: &SparseSymmetricMatrix, perm: &[usize]) -> usize {
    let mut inv = alloc::vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut bw = 0;
    for i in 0..a.dim() {
        for &j in a.row(i).0 {
            bw = bw.max(inv[i].abs_diff(inv[j]));
        }
    }
    bw
}
