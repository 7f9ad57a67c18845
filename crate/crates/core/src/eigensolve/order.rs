use std::collections::VecDeque;

use crate::fem::SparseSymMatrix;

const LEAF: usize = 64;

/// Fill-reducing ordering by recursive level-set dissection. Returns `perm`
/// with `perm[new] = old`; separators are numbered after the parts they split.
pub fn nested_dissection(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.n;
    let mut nd = Dissector { a, region: vec![0; n], next_region: 1, seen: vec![0; n], stamp: 0, level: vec![0; n] };
    let mut out = Vec::with_capacity(n);
    nd.dissect((0..n).collect(), &mut out);
    debug_assert_eq!(out.len(), n);
    out
}

struct Dissector<'a> {
    a: &'a SparseSymMatrix,
    region: Vec<u32>,
    next_region: u32,
    seen: Vec<u32>,
    stamp: u32,
    level: Vec<u32>,
}

impl Dissector<'_> {
    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.a.row(v).0.iter().map(|&j| j as usize).filter(move |&j| j != v)
    }

    /// BFS inside the current region; returns visit order and fills `level`.
    fn bfs(&mut self, start: usize, id: u32) -> Vec<usize> {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut order = vec![start];
        self.seen[start] = stamp;
        self.level[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let lv = self.level[v];
            let next: Vec<usize> = self.neighbors(v).filter(|&j| self.region[j] == id && self.seen[j] != stamp).collect();
            for j in next {
                self.seen[j] = stamp;
                self.level[j] = lv + 1;
                order.push(j);
                queue.push_back(j);
            }
        }
        order
    }

    fn dissect(&mut self, nodes: Vec<usize>, out: &mut Vec<usize>) {
        if nodes.len() <= LEAF {
            out.extend(nodes);
            return;
        }
        let id = self.next_region;
        self.next_region += 1;
        for &v in &nodes {
            self.region[v] = id;
        }
        // Pseudo-peripheral start: restart from the last node reached.
        let mut order = self.bfs(nodes[0], id);
        for _ in 0..2 {
            let far = *order.last().unwrap();
            order = self.bfs(far, id);
        }
        if order.len() < nodes.len() {
            let stamp = self.stamp;
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| self.seen[v] != stamp).collect();
            self.dissect(order, out);
            self.dissect(rest, out);
            return;
        }
        let depth = self.level[*order.last().unwrap()] as usize;
        let mut count = vec![0usize; depth + 1];
        for &v in &order {
            count[self.level[v] as usize] += 1;
        }
        let half = nodes.len() / 2;
        let mut below = 0;
        let mut m = 0;
        while m < depth && below + count[m] < half {
            below += count[m];
            m += 1;
        }
        if m == 0 || m >= depth {
            out.extend(nodes);
            return;
        }
        let m = m as u32;
        let (mut part_a, mut part_b, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &order {
            let lv = self.level[v];
            if lv < m {
                part_a.push(v);
            } else if lv > m {
                part_b.push(v);
            } else if self.neighbors(v).any(|j| self.region[j] == id && self.level[j] == m + 1) {
                sep.push(v);
            } else {
                part_a.push(v);
            }
        }
        self.dissect(part_a, out);
        self.dissect(part_b, out);
        out.extend(sep);
    }
}
