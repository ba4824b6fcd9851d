//! Perfect matchings on the support of a dense square matrix.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Adjacency lists of the bipartite graph `{(i,j) : allowed(i,j)}`.
pub(crate) fn adjacency(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    (0..n).map(|i| (0..n).filter(|&j| allowed(i, j)).collect()).collect()
}

/// Hopcroft-Karp. Returns `row -> col` when a perfect matching exists.
pub(crate) fn perfect_matching(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    if adj.iter().any(|a| a.is_empty()) {
        return None;
    }
    let mut row_mate = vec![NIL; n];
    let mut col_mate = vec![NIL; n];
    let mut dist = vec![0usize; n];
    let mut size = 0;
    // Cheap greedy start.
    for i in 0..n {
        if let Some(&j) = adj[i].iter().find(|&&j| col_mate[j] == NIL) {
            row_mate[i] = j;
            col_mate[j] = i;
            size += 1;
        }
    }
    let mut queue = VecDeque::with_capacity(n);
    loop {
        queue.clear();
        let mut found = false;
        for i in 0..n {
            if row_mate[i] == NIL {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let r = col_mate[j];
                if r == NIL {
                    found = true;
                } else if dist[r] == usize::MAX {
                    dist[r] = dist[i] + 1;
                    queue.push_back(r);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n];
        for i in 0..n {
            if row_mate[i] == NIL && hk_dfs(i, adj, &mut row_mate, &mut col_mate, &mut dist, &mut it) {
                size += 1;
            }
        }
    }
    (size == n).then_some(row_mate)
}

fn hk_dfs(
    i: usize,
    adj: &[Vec<usize>],
    row_mate: &mut [usize],
    col_mate: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    while it[i] < adj[i].len() {
        let j = adj[i][it[i]];
        it[i] += 1;
        let r = col_mate[j];
        let ok = r == NIL || (dist[r] == dist[i] + 1 && hk_dfs(r, adj, row_mate, col_mate, dist, it));
        if ok {
            row_mate[i] = j;
            col_mate[j] = i;
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

/// Rewrites a perfect matching into the lexicographically smallest perfect
/// matching of the same graph (row 0 gets the smallest feasible column, then row 1, ...).
pub(crate) fn lexicographic_min(adj: &[Vec<usize>], row_mate: &mut [usize]) {
    let n = adj.len();
    let mut col_mate = vec![NIL; n];
    for (i, &j) in row_mate.iter().enumerate() {
        col_mate[j] = i;
    }
    let mut col_fixed = vec![false; n];
    let mut row_fixed = vec![false; n];
    let mut stamp = vec![0u32; n];
    let mut epoch = 0u32;
    for k in 0..n {
        let cur = row_mate[k];
        for &c in &adj[k] {
            if c >= cur {
                break;
            }
            if col_fixed[c] {
                continue;
            }
            epoch += 1;
            let mut ctx = Refine {
                adj,
                row_mate,
                col_mate: &mut col_mate,
                col_fixed: &col_fixed,
                row_fixed: &row_fixed,
                stamp: &mut stamp,
                epoch,
                banned: c,
                target: cur,
                owner: k,
            };
            let r2 = ctx.col_mate[c];
            if ctx.reroute(r2) {
                row_mate[k] = c;
                col_mate[c] = k;
                break;
            }
        }
        row_fixed[k] = true;
        col_fixed[row_mate[k]] = true;
    }
}

struct Refine<'a> {
    adj: &'a [Vec<usize>],
    row_mate: &'a mut [usize],
    col_mate: &'a mut [usize],
    col_fixed: &'a [bool],
    row_fixed: &'a [bool],
    stamp: &'a mut [u32],
    epoch: u32,
    banned: usize,
    target: usize,
    owner: usize,
}

impl Refine<'_> {
    /// Alternating path from row `r` ending at the column freed by `owner`.
    fn reroute(&mut self, r: usize) -> bool {
        debug_assert!(!self.row_fixed[r] && r != self.owner);
        for idx in 0..self.adj[r].len() {
            let c2 = self.adj[r][idx];
            if c2 == self.banned || self.col_fixed[c2] || self.stamp[c2] == self.epoch {
                continue;
            }
            self.stamp[c2] = self.epoch;
            let ok = if c2 == self.target {
                true
            } else {
                let r3 = self.col_mate[c2];
                r3 != self.owner && self.reroute(r3)
            };
            if ok {
                self.row_mate[r] = c2;
                self.col_mate[c2] = r;
                return true;
            }
        }
        false
    }
}
