//! Local-constraint trellis and best-first path enumeration.
//!
//! A state is a vector of F_p^δ packed as a base-p integer. Stage `i` adds
//! `label * w_i` to the state; accepted paths start at zero and end at the
//! target. Paths are emitted in non-decreasing total cost, ties broken by the
//! lexicographic order of their label sequences.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{mod_add, mod_mul};

/// Upper limit on `p^δ` and on the size of the transition table.
const MAX_STATES: u64 = 1 << 20;
const MAX_TABLE: u64 = 1 << 26;

/// One trellis section.
#[derive(Clone, Debug)]
pub struct Stage {
    /// Contribution of label 1 to the state.
    pub w: Vec<u8>,
    /// `costs[e]` for `e = 0..p`.
    pub costs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trellis {
    p: u8,
    delta: usize,
    n_states: usize,
    stages: Vec<Stage>,
    target: u32,
    next: Vec<u32>,
    h: Vec<f64>,
}

fn encode_state(p: u8, v: &[u8]) -> u32 {
    v.iter().rev().fold(0u32, |acc, &d| acc * p as u32 + d as u32)
}

fn decode_state(p: u8, delta: usize, mut s: u32) -> Vec<u8> {
    (0..delta)
        .map(|_| {
            let d = (s % p as u32) as u8;
            s /= p as u32;
            d
        })
        .collect()
}

impl Trellis {
    pub fn new(p: u8, delta: usize, stages: Vec<Stage>, target: &[u8]) -> Result<Trellis> {
        let n_states = (p as u64).checked_pow(delta as u32).filter(|&s| s <= MAX_STATES);
        let Some(n_states) = n_states else {
            return Err(Error::config("osd.delta", format!("{p}^{delta} trellis states exceed the supported limit")));
        };
        if (stages.len() as u64 + 1) * n_states * p as u64 > MAX_TABLE {
            return Err(Error::config("osd.delta", "trellis too large"));
        }
        let n_states = n_states as usize;
        assert_eq!(target.len(), delta);
        for st in &stages {
            assert_eq!(st.w.len(), delta);
            assert_eq!(st.costs.len(), p as usize);
        }
        let pu = p as usize;
        let mut next = vec![0u32; stages.len() * n_states * pu];
        for (i, st) in stages.iter().enumerate() {
            for s in 0..n_states {
                let base = decode_state(p, delta, s as u32);
                for e in 0..p {
                    let v: Vec<u8> = base.iter().zip(&st.w).map(|(&b, &w)| mod_add(p, b, mod_mul(p, e, w))).collect();
                    next[(i * n_states + s) * pu + e as usize] = encode_state(p, &v);
                }
            }
        }
        let t = stages.len();
        let target = encode_state(p, target);
        let mut h = vec![f64::INFINITY; (t + 1) * n_states];
        h[t * n_states + target as usize] = 0.0;
        for i in (0..t).rev() {
            for s in 0..n_states {
                let mut best = f64::INFINITY;
                for e in 0..pu {
                    let ns = next[(i * n_states + s) * pu + e] as usize;
                    let c = stages[i].costs[e] + h[(i + 1) * n_states + ns];
                    if c < best {
                        best = c;
                    }
                }
                h[i * n_states + s] = best;
            }
        }
        Ok(Trellis { p, delta, n_states, stages, target, next, h })
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    #[inline]
    fn step(&self, stage: usize, state: u32, e: u8) -> u32 {
        self.next[(stage * self.n_states + state as usize) * self.p as usize + e as usize]
    }

    /// Minimum cost from `(stage, state)` to the target.
    #[inline]
    pub fn cost_to_go(&self, stage: usize, state: u32) -> f64 {
        self.h[stage * self.n_states + state as usize]
    }

    /// Whether a full label sequence ends at the target; returns its cost.
    pub fn path_cost(&self, labels: &[u8]) -> Option<f64> {
        assert_eq!(labels.len(), self.len());
        let mut s = 0u32;
        let mut c = 0.0;
        for (i, &e) in labels.iter().enumerate() {
            c += self.stages[i].costs[e as usize];
            s = self.step(i, s, e);
        }
        (s == self.target).then_some(c)
    }

    pub fn enumerate(&self) -> Slva<'_> {
        Slva::new(self)
    }
}

/// An accepted path and its total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Prefix {
    pub labels: Vec<u8>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    stage: u32,
    state: u32,
    label: u8,
    g: f64,
    key: f64,
}

const ROOT: u32 = u32::MAX;

/// Serial list enumeration of trellis paths in non-decreasing cost.
#[derive(Debug)]
pub struct Slva<'a> {
    trellis: &'a Trellis,
    arena: Vec<Node>,
    heap: Vec<u32>,
    last: f64,
}

impl<'a> Slva<'a> {
    fn new(trellis: &'a Trellis) -> Self {
        let mut s = Slva { trellis, arena: Vec::new(), heap: Vec::new(), last: 0.0 };
        let h0 = trellis.cost_to_go(0, 0);
        if h0.is_finite() {
            s.arena.push(Node { parent: ROOT, stage: 0, state: 0, label: 0, g: 0.0, key: h0 });
            s.heap.push(0);
        }
        s
    }

    fn labels(&self, mut id: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.arena[id as usize].stage as usize);
        while id != ROOT {
            let n = &self.arena[id as usize];
            if n.parent == ROOT {
                break;
            }
            out.push(n.label);
            id = n.parent;
        }
        out.reverse();
        out
    }

    fn less(&self, a: u32, b: u32) -> bool {
        let (na, nb) = (&self.arena[a as usize], &self.arena[b as usize]);
        match na.key.total_cmp(&nb.key) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.labels(a) < self.labels(b),
        }
    }

    fn push(&mut self, id: u32) {
        self.heap.push(id);
        let mut i = self.heap.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.less(self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn pop(&mut self) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        let n = self.heap.len();
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut m = i;
            if l < n && self.less(self.heap[l], self.heap[m]) {
                m = l;
            }
            if r < n && self.less(self.heap[r], self.heap[m]) {
                m = r;
            }
            if m == i {
                break;
            }
            self.heap.swap(i, m);
            i = m;
        }
        Some(top)
    }

    /// Cost of the next path without consuming it; `None` once exhausted.
    pub fn peek_weight(&mut self) -> Option<f64> {
        self.heap.first().map(|&id| self.arena[id as usize].key)
    }

    /// Nodes allocated so far.
    pub fn arena_len(&self) -> usize {
        self.arena.len()
    }

    /// The next lightest accepted path.
    pub fn next_path(&mut self) -> Option<Prefix> {
        let t = self.trellis;
        let end = t.len() as u32;
        while let Some(id) = self.pop() {
            let node = self.arena[id as usize];
            if node.stage == end {
                debug_assert!(node.key >= self.last);
                self.last = node.key;
                return Some(Prefix { labels: self.labels(id), weight: node.key });
            }
            let i = node.stage as usize;
            for e in 0..t.p {
                let ns = t.step(i, node.state, e);
                let h = t.cost_to_go(i + 1, ns);
                if !h.is_finite() {
                    continue;
                }
                let g = node.g + t.stages[i].costs[e as usize];
                let key = (g + h).max(node.key);
                let cid = self.arena.len() as u32;
                self.arena.push(Node { parent: id, stage: node.stage + 1, state: ns, label: e, g, key });
                self.push(cid);
            }
        }
        None
    }
}
