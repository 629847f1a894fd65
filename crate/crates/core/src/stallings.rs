//! Folded subgroup automata (Stallings graphs) for finitely generated
//! subgroups of a free group.
//!
//! Every transition carries a witness tag: a word over symbols `1..=m`
//! standing for the `m` original generators of the subgroup. Tags are kept
//! consistent through folding by gauge transformations at the vertex being
//! merged away, so the product of tags along any base loop evaluates to the
//! word that loop reads.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::word::{letter_from_key, letter_key, Word};

const NONE: u32 = u32::MAX;

/// A product of original generators, as a word over generator symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Witness(pub Word);

impl Witness {
    /// Evaluates the expression in the ambient free group.
    pub fn evaluate(&self, gens: &[Word]) -> Word {
        self.0.substitute(gens)
    }

    /// Indices (0-based) and signs of the generator factors, in order.
    pub fn factors(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.0.letters().iter().map(|&x| (x.unsigned_abs() as usize - 1, x < 0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Index {
    Finite(usize),
    Infinite,
}

/// Folded core graph of a finitely generated subgroup. State 0 is the base.
#[derive(Clone, Debug)]
pub struct SubgroupGraph {
    rank: usize,
    gens: Vec<Word>,
    next: Vec<Vec<u32>>,
    tags: Vec<Vec<Word>>,
    dist: Vec<u32>,
}

struct RawEdge {
    from: usize,
    label: i32,
    to: usize,
    tag: Word,
    alive: bool,
}

/// Graph under construction; edges are stored once with their own label
/// and traversed in either direction.
struct Folder {
    edges: Vec<RawEdge>,
    incident: Vec<Vec<usize>>,
    alive_vertex: Vec<bool>,
    merged_into: Vec<usize>,
}

impl Folder {
    fn new() -> Self {
        Folder {
            edges: Vec::new(),
            incident: vec![Vec::new()],
            alive_vertex: vec![true],
            merged_into: vec![0],
        }
    }

    fn add_vertex(&mut self) -> usize {
        self.incident.push(Vec::new());
        self.alive_vertex.push(true);
        self.merged_into.push(self.incident.len() - 1);
        self.incident.len() - 1
    }

    fn add_edge(&mut self, from: usize, label: i32, to: usize, tag: Word) {
        let id = self.edges.len();
        self.edges.push(RawEdge { from, label, to, tag, alive: true });
        self.incident[from].push(id);
        if to != from {
            self.incident[to].push(id);
        }
    }

    /// Outgoing traversals from `u`: (letter, target, edge id, traversal tag).
    fn outgoing(&self, u: usize) -> Vec<(i32, usize, usize, Word)> {
        let mut out = Vec::new();
        for &id in &self.incident[u] {
            let e = &self.edges[id];
            if !e.alive {
                continue;
            }
            if e.from == u {
                out.push((e.label, e.to, id, e.tag.clone()));
            }
            if e.to == u {
                out.push((-e.label, e.from, id, e.tag.inverse()));
            }
        }
        out
    }

    fn gauge(&mut self, z: usize, gamma: &Word) {
        let ginv = gamma.inverse();
        for &id in &self.incident[z] {
            let e = &mut self.edges[id];
            if !e.alive {
                continue;
            }
            if e.from == z {
                e.tag = gamma.multiply(&e.tag);
            }
            if e.to == z {
                e.tag = e.tag.multiply(&ginv);
            }
        }
    }

    /// Redirects every edge at `z` to `y`.
    fn merge_into(&mut self, z: usize, y: usize) {
        let ids = std::mem::take(&mut self.incident[z]);
        for id in ids {
            let e = &mut self.edges[id];
            if !e.alive {
                continue;
            }
            let was_loop_at_y = (e.from == y) || (e.to == y);
            if e.from == z {
                e.from = y;
            }
            if e.to == z {
                e.to = y;
            }
            if !was_loop_at_y {
                self.incident[y].push(id);
            }
        }
        self.alive_vertex[z] = false;
        self.merged_into[z] = y;
    }

    fn find(&self, mut v: usize) -> usize {
        while self.merged_into[v] != v {
            v = self.merged_into[v];
        }
        v
    }

    /// Copies a folded graph in, returning the new index of its base.
    fn add_graph(&mut self, g: &SubgroupGraph, reuse_base: bool) -> usize {
        let offset = self.incident.len();
        let first_new = if reuse_base { 1 } else { 0 };
        for _ in first_new..g.num_states() {
            self.add_vertex();
        }
        let map = |s: usize| {
            if reuse_base && s == 0 {
                0
            } else {
                offset + s - first_new
            }
        };
        for (v, row) in g.next.iter().enumerate() {
            for x in 1..=g.rank as i32 {
                let t = row[letter_key(x) as usize];
                if t != NONE {
                    self.add_edge(map(v), x, map(t as usize), Word::identity());
                }
            }
        }
        map(0)
    }

    /// Lexicographically least among shortest path labels from `from` to `to`.
    fn least_path(&self, from: usize, to: usize) -> Option<Word> {
        let mut pred: Vec<Option<(usize, i32)>> = vec![None; self.incident.len()];
        let mut seen = vec![false; self.incident.len()];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            if v == to {
                let mut out = Vec::new();
                let mut s = v;
                while let Some((p, x)) = pred[s] {
                    out.push(x);
                    s = p;
                }
                out.reverse();
                return Some(Word::from_letters(out));
            }
            let mut out = self.outgoing(v);
            out.sort_by_key(|t| letter_key(t.0));
            for (x, t, _, _) in out {
                if !seen[t] {
                    seen[t] = true;
                    pred[t] = Some((v, x));
                    q.push_back(t);
                }
            }
        }
        None
    }

    fn fold(&mut self) {
        let mut work: VecDeque<usize> = (0..self.incident.len()).collect();
        while let Some(u) = work.pop_front() {
            if !self.alive_vertex[u] {
                continue;
            }
            let out = self.outgoing(u);
            let mut seen: HashMap<i32, usize> = HashMap::new();
            let mut pair = None;
            for (i, t) in out.iter().enumerate() {
                if let Some(&j) = seen.get(&t.0) {
                    pair = Some((j, i));
                    break;
                }
                seen.insert(t.0, i);
            }
            let Some((i1, i2)) = pair else { continue };
            let (_, v1, e1, tau1) = out[i1].clone();
            let (_, v2, e2, tau2) = out[i2].clone();
            if v1 == v2 {
                // Parallel traversals: the extra edge closes a loop reading the identity.
                self.edges[e2].alive = false;
            } else {
                let (z, y, tz, to, ez) =
                    if v2 != 0 { (v2, v1, tau2, tau1, e2) } else { (v1, v2, tau1, tau2, e1) };
                let gamma = to.inverse().multiply(&tz);
                self.gauge(z, &gamma);
                self.merge_into(z, y);
                self.edges[ez].alive = false;
                work.push_back(y);
            }
            work.push_back(u);
        }
    }

    fn degree(&self, v: usize) -> usize {
        self.incident[v]
            .iter()
            .filter(|&&id| self.edges[id].alive)
            .map(|&id| if self.edges[id].from == self.edges[id].to { 2 } else { 1 })
            .sum()
    }

    fn trim_hairs(&mut self) {
        let mut changed = true;
        while changed {
            changed = false;
            for v in 1..self.incident.len() {
                if self.alive_vertex[v] && self.degree(v) <= 1 {
                    for &id in &self.incident[v] {
                        self.edges[id].alive = false;
                    }
                    self.alive_vertex[v] = false;
                    changed = true;
                }
            }
        }
    }
}

impl SubgroupGraph {
    /// Folds the bouquet of the given generators.
    pub fn build(rank: usize, gens: &[Word]) -> Self {
        let mut f = Folder::new();
        for (i, g) in gens.iter().enumerate() {
            let letters = g.letters();
            if letters.is_empty() {
                continue;
            }
            let sym = Word::letter(i as i32 + 1);
            let mut cur = 0usize;
            for (k, &x) in letters.iter().enumerate() {
                let to = if k + 1 == letters.len() { 0 } else { f.add_vertex() };
                let tag = if k == 0 { sym.clone() } else { Word::identity() };
                if x > 0 {
                    f.add_edge(cur, x, to, tag);
                } else {
                    f.add_edge(to, -x, cur, tag.inverse());
                }
                cur = to;
            }
        }
        f.fold();
        f.trim_hairs();
        Self::from_folder(rank, gens.to_vec(), &f)
    }

    fn from_folder(rank: usize, gens: Vec<Word>, f: &Folder) -> Self {
        // Renumber states in breadth-first order from the base, exploring letters canonically.
        let nv = f.incident.len();
        let mut adj: Vec<Vec<(u32, usize, Word)>> = vec![Vec::new(); nv];
        for e in f.edges.iter().filter(|e| e.alive) {
            adj[e.from].push((letter_key(e.label), e.to, e.tag.clone()));
            adj[e.to].push((letter_key(-e.label), e.from, e.tag.inverse()));
        }
        let mut order = vec![NONE; nv];
        let mut states = vec![0usize];
        order[0] = 0;
        let mut head = 0;
        while head < states.len() {
            let v = states[head];
            head += 1;
            let mut out = adj[v].clone();
            out.sort_by_key(|t| t.0);
            for (_, to, _) in out {
                if order[to] == NONE {
                    order[to] = states.len() as u32;
                    states.push(to);
                }
            }
        }
        let n = states.len();
        let mut next = vec![vec![NONE; 2 * rank]; n];
        let mut tags = vec![vec![Word::identity(); 2 * rank]; n];
        for (new, &old) in states.iter().enumerate() {
            for (k, to, tag) in &adj[old] {
                next[new][*k as usize] = order[*to];
                tags[new][*k as usize] = tag.clone();
            }
        }
        let mut g = SubgroupGraph { rank, gens, next, tags, dist: Vec::new() };
        g.dist = g.bfs_distances();
        g
    }

    fn bfs_distances(&self) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.next.len()];
        dist[0] = 0;
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for &t in &self.next[v] {
                if t != NONE && dist[t as usize] == u32::MAX {
                    dist[t as usize] = dist[v] + 1;
                    q.push_back(t as usize);
                }
            }
        }
        dist
    }

    /// The graph of the whole free group of the given rank.
    pub fn full(rank: usize) -> Self {
        let gens: Vec<Word> = (1..=rank as i32).map(Word::letter).collect();
        Self::build(rank, &gens)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Word] {
        &self.gens
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.next.iter().flatten().filter(|&&t| t != NONE).count() / 2
    }

    /// Rank of the subgroup: edges - states + 1.
    pub fn subgroup_rank(&self) -> usize {
        self.num_edges() + 1 - self.num_states()
    }

    pub fn is_trivial(&self) -> bool {
        self.num_edges() == 0
    }

    #[inline]
    pub fn step(&self, state: usize, letter: i32) -> Option<usize> {
        let t = self.next[state][letter_key(letter) as usize];
        (t != NONE).then_some(t as usize)
    }

    /// Reads as much of `w` as possible from `state`; returns the last state and
    /// the number of letters read.
    pub fn read_prefix(&self, state: usize, w: &[i32]) -> (usize, usize) {
        let mut s = state;
        for (i, &x) in w.iter().enumerate() {
            match self.step(s, x) {
                Some(t) => s = t,
                None => return (s, i),
            }
        }
        (s, w.len())
    }

    pub fn read(&self, state: usize, w: &[i32]) -> Option<usize> {
        let (s, n) = self.read_prefix(state, w);
        (n == w.len()).then_some(s)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.read(0, w.letters()) == Some(0)
    }

    /// A witness expressing `w` in the original generators, when `w` is a member.
    pub fn membership(&self, w: &Word) -> Option<Witness> {
        let mut s = 0usize;
        let mut acc: Vec<i32> = Vec::new();
        for &x in w.letters() {
            let k = letter_key(x) as usize;
            let t = self.next[s][k];
            if t == NONE {
                return None;
            }
            for &y in self.tags[s][k].letters() {
                if acc.last() == Some(&-y) {
                    acc.pop();
                } else {
                    acc.push(y);
                }
            }
            s = t as usize;
        }
        (s == 0).then(|| Witness(Word::from_letters(acc)))
    }

    pub fn contains_all(&self, ws: &[Word]) -> bool {
        ws.iter().all(|x| self.contains(x))
    }

    /// `g H g^-1`.
    pub fn conjugate(&self, g: &Word) -> SubgroupGraph {
        let gens: Vec<Word> = self.gens.iter().map(|h| g.conjugate(h)).collect();
        Self::build(self.rank, &gens)
    }

    pub fn index(&self) -> Index {
        let complete = self.next.iter().all(|row| row.iter().all(|&t| t != NONE));
        if complete {
            Index::Finite(self.num_states())
        } else {
            Index::Infinite
        }
    }

    /// Shortest path label from `state` back to the base, lexicographically least.
    fn path_to_base(&self, mut state: usize) -> Vec<i32> {
        let mut out = Vec::with_capacity(self.dist[state] as usize);
        while state != 0 {
            let d = self.dist[state];
            let (k, t) = self.next[state]
                .iter()
                .enumerate()
                .find(|(_, &t)| t != NONE && self.dist[t as usize] + 1 == d)
                .expect("connected core graph");
            out.push(letter_from_key(k as u32));
            state = *t as usize;
        }
        out
    }

    /// Shortest path label from the base to `state`, lexicographically least.
    fn path_from_base(&self, state: usize) -> Word {
        // Breadth-first numbering makes the canonical access word the lex-least shortest one.
        let mut pred: Vec<Option<(usize, i32)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[0] = true;
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            if v == state {
                break;
            }
            for k in 0..2 * self.rank {
                let t = self.next[v][k];
                if t != NONE && !seen[t as usize] {
                    seen[t as usize] = true;
                    pred[t as usize] = Some((v, letter_from_key(k as u32)));
                    q.push_back(t as usize);
                }
            }
        }
        let mut out = Vec::new();
        let mut s = state;
        while let Some((p, x)) = pred[s] {
            out.push(x);
            s = p;
        }
        out.reverse();
        Word::from_letters(out)
    }

    /// The shortlex-least `r` with `r H = g H`.
    pub fn canonical_coset_rep(&self, g: &Word) -> Word {
        let u = g.inverse();
        let (s, n) = self.read_prefix(0, u.letters());
        let rest_inv = u.suffix_from(n).inverse();
        let back = self.path_to_base(s);
        rest_inv.multiply(&Word::from_letters(back))
    }

    /// `H ∩ K`, built from a free basis of the pullback core.
    pub fn intersect(&self, other: &SubgroupGraph) -> SubgroupGraph {
        assert_eq!(self.rank, other.rank);
        let mut index: HashMap<(u32, u32), usize> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut f = Folder::new();
        let mut head = 0;
        while head < pairs.len() {
            let (p, q) = pairs[head];
            let v = head;
            head += 1;
            // Inverse letters only discover vertices; each positive edge is
            // added once, from its source.
            for x in (1..=self.rank as i32).flat_map(|x| [x, -x]) {
                let k = letter_key(x) as usize;
                let (tp, tq) = (self.next[p as usize][k], other.next[q as usize][k]);
                if tp == NONE || tq == NONE {
                    continue;
                }
                let to = *index.entry((tp, tq)).or_insert_with(|| {
                    pairs.push((tp, tq));
                    f.add_vertex()
                });
                if x > 0 {
                    f.add_edge(v, x, to, Word::identity());
                }
            }
        }
        f.trim_hairs();
        let gens = spanning_tree_basis(&f);
        Self::build(self.rank, &gens)
    }

    /// Finds `a ∈ self`, `b ∈ other` with `a b = w`; first split point wins.
    pub fn product_membership(&self, w: &Word, other: &SubgroupGraph) -> Option<(Word, Word)> {
        let letters = w.letters();
        let winv = w.inverse();
        for i in 0..=letters.len() {
            let Some(x) = self.read(0, &letters[..i]) else { break };
            // s^-1 is the length-(n-i) prefix of w^-1.
            let Some(y) = other.read(0, &winv.letters()[..letters.len() - i]) else { continue };
            if let Some(c) = self.joint_path_to_base(x, other, y) {
                let p = w.prefix(i);
                let s = w.suffix_from(i);
                let a = p.multiply(&c);
                let b = c.inverse().multiply(&s);
                return Some((a, b));
            }
        }
        None
    }

    /// A word leading `x` (in self) and `y` (in other) simultaneously to the bases.
    fn joint_path_to_base(&self, x: usize, other: &SubgroupGraph, y: usize) -> Option<Word> {
        if x == 0 && y == 0 {
            return Some(Word::identity());
        }
        let mut pred: HashMap<(usize, usize), ((usize, usize), i32)> = HashMap::new();
        let mut q = VecDeque::from([(x, y)]);
        pred.insert((x, y), ((usize::MAX, usize::MAX), 0));
        while let Some((p, r)) = q.pop_front() {
            for k in 0..2 * self.rank {
                let (tp, tr) = (self.next[p][k], other.next[r][k]);
                if tp == NONE || tr == NONE {
                    continue;
                }
                let nxt = (tp as usize, tr as usize);
                if pred.contains_key(&nxt) {
                    continue;
                }
                pred.insert(nxt, ((p, r), letter_from_key(k as u32)));
                if nxt == (0, 0) {
                    let mut out = Vec::new();
                    let mut cur = nxt;
                    while cur != (x, y) {
                        let (prev, l) = pred[&cur];
                        out.push(l);
                        cur = prev;
                    }
                    out.reverse();
                    return Some(Word::from_letters(out));
                }
                q.push_back(nxt);
            }
        }
        None
    }

    /// `g' ∈ H g K` where `H = self`, `K = other`.
    pub fn double_coset_member(&self, g_prime: &Word, g: &Word, other: &SubgroupGraph) -> bool {
        self.double_coset_witness(g_prime, g, other).is_some()
    }

    /// Returns `(h, k)` with `g' = h g k`, `h ∈ H`, `k ∈ K`.
    pub fn double_coset_witness(
        &self,
        g_prime: &Word,
        g: &Word,
        other: &SubgroupGraph,
    ) -> Option<(Word, Word)> {
        let ginv = g.inverse();
        let conj = self.conjugate(&ginv);
        let target = ginv.multiply(g_prime);
        let (hc, k) = conj.product_membership(&target, other)?;
        // hc = g^-1 h g
        Some((g.conjugate(&hc), k))
    }

    /// Shortlex-least element of the double coset `H g K` (`H = self`).
    ///
    /// Reduced words of `H g K` are exactly the reduced path labels from the
    /// base of `H` to the base of `K` in the folding of `H`, a `g`-path and `K`.
    pub fn double_coset_rep(&self, g: &Word, other: &SubgroupGraph) -> Word {
        let mut f = Folder::new();
        f.add_graph(self, true);
        let q = f.add_graph(other, false);
        let letters = g.letters();
        let mut cur = 0usize;
        for (i, &x) in letters.iter().enumerate() {
            let to = if i + 1 == letters.len() { q } else { f.add_vertex() };
            if x > 0 {
                f.add_edge(cur, x, to, Word::identity());
            } else {
                f.add_edge(to, -x, cur, Word::identity());
            }
            cur = to;
        }
        if letters.is_empty() {
            // Identify the two bases with an empty path.
            f.merge_into(q, 0);
        }
        f.fold();
        let target = f.find(q);
        f.least_path(0, target).expect("double coset graph is connected")
    }

    /// Free basis of the subgroup read off a spanning tree of the graph.
    pub fn free_basis(&self) -> Vec<Word> {
        let mut access: Vec<Option<Word>> = vec![None; self.num_states()];
        let mut tree_edge = vec![vec![false; 2 * self.rank]; self.num_states()];
        access[0] = Some(Word::identity());
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for k in 0..2 * self.rank {
                let t = self.next[v][k];
                if t == NONE || access[t as usize].is_some() {
                    continue;
                }
                let x = letter_from_key(k as u32);
                access[t as usize] = Some(access[v].as_ref().unwrap().multiply(&Word::letter(x)));
                tree_edge[v][k] = true;
                tree_edge[t as usize][letter_key(-x) as usize] = true;
                q.push_back(t as usize);
            }
        }
        let mut basis = Vec::new();
        for v in 0..self.num_states() {
            for x in 1..=self.rank as i32 {
                let k = letter_key(x) as usize;
                let t = self.next[v][k];
                if t == NONE || tree_edge[v][k] {
                    continue;
                }
                let u = access[v].as_ref().unwrap();
                let back = access[t as usize].as_ref().unwrap().inverse();
                basis.push(u.multiply(&Word::letter(x)).multiply(&back));
            }
        }
        basis
    }

    /// Canonical access word of every state (shortlex-least path from the base).
    pub fn access_words(&self) -> Vec<Word> {
        (0..self.num_states()).map(|s| self.path_from_base(s)).collect()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  0 [shape=doublecircle];");
        for (v, row) in self.next.iter().enumerate() {
            for x in 1..=self.rank as i32 {
                let t = row[letter_key(x) as usize];
                if t != NONE {
                    let _ = writeln!(s, "  {v} -> {t} [label=\"{}\"];", Word::letter(x));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn spanning_tree_basis(f: &Folder) -> Vec<Word> {
    // Breadth-first spanning tree over live edges, then one basis element per non-tree edge.
    let nv = f.incident.len();
    let mut access: Vec<Option<Word>> = vec![None; nv];
    let mut is_tree = vec![false; f.edges.len()];
    access[0] = Some(Word::identity());
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for &id in &f.incident[v] {
            let e = &f.edges[id];
            if !e.alive {
                continue;
            }
            let (other, x) = if e.from == v { (e.to, e.label) } else { (e.from, -e.label) };
            if access[other].is_none() {
                access[other] = Some(access[v].as_ref().unwrap().multiply(&Word::letter(x)));
                is_tree[id] = true;
                q.push_back(other);
            }
        }
    }
    let mut basis = Vec::new();
    for (id, e) in f.edges.iter().enumerate() {
        if !e.alive || is_tree[id] {
            continue;
        }
        if let (Some(u), Some(v)) = (&access[e.from], &access[e.to]) {
            basis.push(u.multiply(&Word::letter(e.label)).multiply(&v.inverse()));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    fn h(gens: &[&str]) -> SubgroupGraph {
        SubgroupGraph::build(2, &gens.iter().map(|s| w(s)).collect::<Vec<_>>())
    }

    #[test]
    fn build_trivial_and_cyclic() {
        let t = h(&[]);
        assert_eq!(t.num_states(), 1);
        assert_eq!(t.num_edges(), 0);
        let a = h(&["a"]);
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.num_edges(), 1);
        assert_eq!(a.step(0, 1), Some(0));
    }

    #[test]
    fn membership_with_witness() {
        let g = h(&["aa", "b"]);
        assert!(g.contains(&w("aab")));
        assert!(!g.contains(&w("a")));
        assert_eq!(g.membership(&Word::identity()), Some(Witness(Word::identity())));
        let wit = g.membership(&w("aa")).unwrap();
        assert_eq!(wit, Witness(w("a")));
        assert_eq!(wit.evaluate(g.generators()), w("aa"));
        assert!(g.membership(&w("a")).is_none());
    }

    #[test]
    fn witnesses_survive_heavy_folding() {
        let gens = vec![w("abAB"), w("aab"), w("bab"), w("ABa")];
        let g = SubgroupGraph::build(2, &gens);
        for x in [w("abABaab"), w("babaab"), w("ABababAB"), w("aabbab")] {
            if let Some(wit) = g.membership(&x) {
                assert_eq!(wit.evaluate(&gens), x);
            }
        }
        for (i, gen) in gens.iter().enumerate() {
            let wit = g.membership(gen).unwrap();
            assert_eq!(wit.evaluate(&gens), *gen, "generator {i}");
        }
    }

    #[test]
    fn intersections() {
        let full = SubgroupGraph::full(2);
        let g = h(&["aa", "b"]);
        let i = g.intersect(&full);
        assert_eq!(i.num_states(), g.num_states());
        assert_eq!(i.num_edges(), g.num_edges());
        assert!(h(&["a"]).intersect(&h(&["b"])).is_trivial());
        let k = g.intersect(&h(&["aaa", "b"]));
        assert!(k.contains(&w("aaaaaa")));
        assert!(k.contains(&w("b")));
        assert!(!k.contains(&w("aa")));
    }

    #[test]
    fn intersection_reached_through_inverse_edges() {
        // The common element AbCAb starts with an inverse letter in both graphs.
        let x = SubgroupGraph::build(3, &[w("Ab"), w("c")]);
        let y = SubgroupGraph::build(3, &[w("acBa"), w("b")]);
        let k = x.intersect(&y);
        assert!(k.contains(&w("AbCAb")));
        assert_eq!(k.free_basis().len(), 1);
    }

    #[test]
    fn conjugation() {
        assert_eq!(h(&["a"]).conjugate(&Word::identity()).num_states(), 1);
        let c = h(&["a"]).conjugate(&w("b"));
        assert!(c.contains(&w("baB")));
        assert!(!c.contains(&w("a")));
    }

    #[test]
    fn indices() {
        assert_eq!(SubgroupGraph::full(2).index(), Index::Finite(1));
        assert_eq!(h(&["a"]).index(), Index::Infinite);
        assert_eq!(h(&["aa", "b", "abA"]).index(), Index::Finite(2));
    }

    #[test]
    fn product_membership_examples() {
        let a2 = h(&["aa"]);
        let b = h(&["b"]);
        assert_eq!(a2.product_membership(&Word::identity(), &b), Some((Word::identity(), Word::identity())));
        assert_eq!(a2.product_membership(&w("aab"), &b), Some((w("aa"), w("b"))));
        assert_eq!(a2.product_membership(&w("ab"), &b), None);
    }

    #[test]
    fn double_coset_examples() {
        let hh = h(&["aa", "b"]);
        let kk = h(&["abA"]);
        let g = w("ba");
        assert!(hh.double_coset_member(&g, &g, &kk));
        let sample = w("aa").multiply(&g).multiply(&w("abA"));
        assert!(hh.double_coset_member(&sample, &g, &kk));
        let bb = h(&["b"]);
        assert!(!bb.double_coset_member(&w("a"), &Word::identity(), &bb));
    }

    #[test]
    fn double_coset_reps() {
        let hh = h(&["a"]);
        let kk = h(&["b"]);
        assert_eq!(hh.double_coset_rep(&w("aaabbb"), &kk), Word::identity());
        assert_eq!(hh.double_coset_rep(&w("aBaBab"), &kk), w("BaBa"));
        let triv = h(&[]);
        assert_eq!(triv.double_coset_rep(&w("abA"), &triv), w("abA"));
        let g = w("baaB");
        let r = hh.double_coset_rep(&g, &kk);
        assert!(hh.double_coset_member(&r, &g, &kk));
    }

    #[test]
    fn double_coset_reps_agree_with_membership() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let hh = h(&["aab", "bA"]);
        let kk = h(&["ab", "bbb"]);
        for i in 0..200 {
            let g = crate::word::random_word(&mut rng, 2, i % 7);
            let g2 = crate::word::random_word(&mut rng, 2, (i * 3) % 7);
            let (r, r2) = (hh.double_coset_rep(&g, &kk), hh.double_coset_rep(&g2, &kk));
            assert!(r <= g);
            assert!(hh.double_coset_member(&r, &g, &kk));
            assert_eq!(r == r2, hh.double_coset_member(&g2, &g, &kk), "{g} {g2}");
        }
    }

    #[test]
    fn coset_reps() {
        let a = h(&["a"]);
        assert_eq!(a.canonical_coset_rep(&w("aaa")), Word::identity());
        // Left cosets: b a^5 <a> = b <a>, while a^5 b is already minimal in its coset.
        assert_eq!(a.canonical_coset_rep(&w("baaaaa")), w("b"));
        assert_eq!(a.canonical_coset_rep(&w("aaaaab")), w("aaaaab"));
        let r = a.canonical_coset_rep(&w("baaBa"));
        assert_eq!(a.canonical_coset_rep(&r), r);
    }

    #[test]
    fn coset_reps_agree_with_membership() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let hh = h(&["aab", "bA", "bbb"]);
        let rand_word = |rng: &mut rand_chacha::ChaCha8Rng| {
            let n = rng.gen_range(0..9);
            Word::from_letters((0..n).map(|_| {
                let g = rng.gen_range(1..=2);
                if rng.gen_bool(0.5) { g } else { -g }
            }))
        };
        for _ in 0..300 {
            let g = rand_word(&mut rng);
            let g2 = rand_word(&mut rng);
            let (r, r2) = (hh.canonical_coset_rep(&g), hh.canonical_coset_rep(&g2));
            assert_eq!(hh.canonical_coset_rep(&r), r);
            assert!(hh.contains(&r.inverse().multiply(&g)));
            assert_eq!(r == r2, hh.contains(&g.inverse().multiply(&g2)));
            assert!(r <= g);
        }
    }

    #[test]
    fn nielsen_schreier_on_finite_index() {
        for gens in [vec!["aa", "b", "abA"], vec!["aaa", "b", "abA", "aabAA"], vec!["a", "b"]] {
            let g = h(&gens);
            if let Index::Finite(n) = g.index() {
                assert_eq!(g.subgroup_rank() - 1, n);
            } else {
                panic!("expected finite index for {gens:?}");
            }
        }
    }

    #[test]
    fn howson_exhaustive_short_words() {
        let hh = h(&["aab", "ba"]);
        let kk = h(&["ab", "bb"]);
        let i = hh.intersect(&kk);
        let mut frontier = vec![Word::identity()];
        for _ in 0..6 {
            let mut nxt = Vec::new();
            for u in &frontier {
                for x in crate::word::letters(2) {
                    let v = u.multiply(&Word::letter(x));
                    if v.len() == u.len() + 1 {
                        nxt.push(v);
                    }
                }
            }
            for v in &nxt {
                assert_eq!(i.contains(v), hh.contains(v) && kk.contains(v), "{v}");
            }
            frontier = nxt;
        }
    }

    #[test]
    fn dot_export_mentions_every_edge() {
        let g = h(&["aa", "b"]);
        let dot = g.to_dot("H");
        assert_eq!(dot.matches("->").count(), g.num_edges());
    }
}
