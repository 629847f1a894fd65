//! Invariant subtrees of a subgroup action, kept as finite orbit quotients.
//!
//! A subtree invariant under `H` is stored by its `H`-orbits of vertices and
//! edges, each keyed by the shortlex-least element of the double coset
//! `H g X` where `g X` names the cell. Minimal subtrees and convex hulls are
//! built the same way: saturate a finite family of segments, then prune
//! vertex orbits of valence one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::bass_serre::{Cell, CellType, Side, Splitting, Step, Vertex};
use crate::error::{Error, Result};
use crate::stallings::SubgroupGraph;
use crate::word::Word;

pub type VertexKey = (Side, Word);

/// `Y / H` for an `H`-invariant subtree `Y` with finitely many orbits.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    group: SubgroupGraph,
    vertices: BTreeMap<VertexKey, Vertex>,
    edges: BTreeMap<Word, Step>,
    ends: BTreeMap<Word, (VertexKey, VertexKey)>,
}

pub fn vertex_key(sp: &Splitting, h: &SubgroupGraph, v: &Vertex) -> VertexKey {
    (v.side, h.double_coset_rep(&v.rep, sp.side_group(v.side)))
}

pub fn edge_key(sp: &Splitting, h: &SubgroupGraph, rep: &Word) -> Word {
    h.double_coset_rep(rep, sp.edge_group())
}

/// Some generator or product of two generators is hyperbolic (Serre's criterion).
pub fn is_nontrivial_action(h: &SubgroupGraph, sp: &Splitting) -> bool {
    let gens = h.generators();
    if gens.iter().any(|g| sp.is_hyperbolic(g)) {
        return true;
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if sp.is_hyperbolic(&gens[i].multiply(&gens[j])) {
                return true;
            }
        }
    }
    false
}

/// A vertex fixed by every generator, reached from `start` by repeated
/// projection onto fixed-point sets.
pub fn fixed_vertex(sp: &Splitting, gens: &[Word], start: &Vertex) -> Option<Vertex> {
    let mut v = start.clone();
    for _ in 0..64 {
        let mut moved = false;
        for g in gens {
            if sp.act_vertex(g, &v) != v {
                v = sp.nearest_fixed_vertex(g, &v)?;
                moved = true;
            }
        }
        if !moved {
            return Some(v);
        }
    }
    None
}

impl QuotientGraph {
    fn empty(group: &SubgroupGraph) -> Self {
        QuotientGraph {
            group: group.clone(),
            vertices: BTreeMap::new(),
            edges: BTreeMap::new(),
            ends: BTreeMap::new(),
        }
    }

    pub fn group(&self) -> &SubgroupGraph {
        &self.group
    }

    fn add_vertex(&mut self, sp: &Splitting, v: &Vertex) -> VertexKey {
        let key = vertex_key(sp, &self.group, v);
        self.vertices.entry(key.clone()).or_insert_with(|| sp.vertex(key.0, &key.1));
        key
    }

    fn add_edge(&mut self, sp: &Splitting, s: &Step) {
        let key = edge_key(sp, &self.group, &s.edge.rep);
        if self.edges.contains_key(&key) {
            return;
        }
        let e = sp.edge(&key);
        let o = self.add_vertex(sp, &sp.origin(&e));
        let t = self.add_vertex(sp, &sp.terminus(&e));
        self.edges.insert(key.clone(), Step { edge: e, forward: true });
        self.ends.insert(key, (o, t));
    }

    fn add_path(&mut self, sp: &Splitting, from: &Vertex, to: &Vertex) {
        self.add_vertex(sp, from);
        for s in sp.geodesic(from, to) {
            self.add_edge(sp, &s);
        }
    }

    /// Orbits of the `H`-saturation of the segments from a base point to its
    /// generator translates and to every seed.
    pub fn saturate(sp: &Splitting, h: &SubgroupGraph, seeds: &[Cell]) -> Self {
        let mut q = Self::empty(h);
        let p = seeds
            .iter()
            .map(|c| match c {
                Cell::V(v) => v.clone(),
                Cell::E(e) => sp.origin(e),
            })
            .next()
            .unwrap_or_else(|| sp.base_vertex());
        q.add_vertex(sp, &p);
        for g in h.generators() {
            q.add_path(sp, &p, &sp.act_vertex(g, &p));
        }
        for c in seeds {
            match c {
                Cell::V(v) => q.add_path(sp, &p, v),
                Cell::E(e) => {
                    q.add_path(sp, &p, &sp.origin(e));
                    q.add_edge(sp, &Step { edge: e.clone(), forward: true });
                }
            }
        }
        q
    }

    /// Smallest `H`-invariant subtree containing the seeds.
    pub fn hull(sp: &Splitting, h: &SubgroupGraph, seeds: &[Cell]) -> Self {
        if seeds.is_empty() {
            return Self::empty(h);
        }
        let mut q = Self::saturate(sp, h, seeds);
        let protected = q.seed_keys(sp, seeds);
        q.prune(sp, &protected, |_| 0);
        q
    }

    fn seed_keys(&self, sp: &Splitting, seeds: &[Cell]) -> BTreeSet<VertexKey> {
        let mut out = BTreeSet::new();
        for c in seeds {
            match c {
                Cell::V(v) => {
                    out.insert(vertex_key(sp, &self.group, v));
                }
                Cell::E(e) => {
                    out.insert(vertex_key(sp, &self.group, &sp.origin(e)));
                    out.insert(vertex_key(sp, &self.group, &sp.terminus(e)));
                }
            }
        }
        out
    }

    /// Edge orbits incident to a vertex orbit, with the endpoint of the
    /// representative edge lying in that orbit (loops appear twice).
    fn incidences(&self, sp: &Splitting, key: &VertexKey) -> Vec<(Word, Vertex)> {
        let mut out = Vec::new();
        for (ek, (o, t)) in &self.ends {
            let e = &self.edges[ek].edge;
            if o == key {
                out.push((ek.clone(), sp.origin(e)));
            }
            if t == key {
                out.push((ek.clone(), sp.terminus(e)));
            }
        }
        out
    }

    /// Valence one in the lifted subtree: a single incident orbit whose edge is
    /// fixed by the whole `H`-stabilizer of its endpoint.
    fn is_leaf(&self, sp: &Splitting, key: &VertexKey) -> bool {
        let inc = self.incidences(sp, key);
        match inc.as_slice() {
            [] => true,
            [(ek, u)] => {
                let e = &self.edges[ek].edge;
                let hu = self.group.intersect(&sp.vertex_stabilizer(u));
                let stab_e = sp.edge_stabilizer(e);
                hu.free_basis().iter().all(|g| stab_e.contains(g))
            }
            _ => false,
        }
    }

    /// Deletes leaf vertex orbits (and their edge) until none remain; `pick`
    /// chooses which current leaf goes next.
    pub fn prune<F>(&mut self, sp: &Splitting, protected: &BTreeSet<VertexKey>, mut pick: F)
    where
        F: FnMut(&[VertexKey]) -> usize,
    {
        loop {
            let leaves: Vec<VertexKey> = self
                .vertices
                .keys()
                .filter(|k| !protected.contains(*k) && self.is_leaf(sp, k))
                .cloned()
                .collect();
            if leaves.is_empty() {
                return;
            }
            let k = leaves[pick(&leaves) % leaves.len()].clone();
            self.vertices.remove(&k);
            let dead: Vec<Word> =
                self.ends.iter().filter(|(_, (o, t))| *o == k || *t == k).map(|(e, _)| e.clone()).collect();
            for e in dead {
                self.ends.remove(&e);
                self.edges.remove(&e);
            }
        }
    }

    pub fn num_vertex_orbits(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edge_orbits(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_keys(&self) -> impl Iterator<Item = &VertexKey> {
        self.vertices.keys()
    }

    pub fn edge_keys(&self) -> impl Iterator<Item = &Word> {
        self.edges.keys()
    }

    pub fn vertex_reps(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn edge_reps(&self) -> impl Iterator<Item = &Step> {
        self.edges.values()
    }

    pub fn edge_ends(&self, key: &Word) -> Option<&(VertexKey, VertexKey)> {
        self.ends.get(key)
    }

    /// Orbit representatives of every cell.
    pub fn cells(&self) -> Vec<Cell> {
        self.vertices
            .values()
            .map(|v| Cell::V(v.clone()))
            .chain(self.edges.values().map(|s| Cell::E(s.edge.clone())))
            .collect()
    }

    pub fn contains_vertex(&self, sp: &Splitting, v: &Vertex) -> bool {
        self.vertices.contains_key(&vertex_key(sp, &self.group, v))
    }

    pub fn contains_cell(&self, sp: &Splitting, c: &Cell) -> bool {
        match c {
            Cell::V(v) => self.contains_vertex(sp, v),
            Cell::E(e) => self.edges.contains_key(&edge_key(sp, &self.group, &e.rep)),
        }
    }

    /// Nearest vertex of the lifted subtree to `v`.
    pub fn project(&self, sp: &Splitting, v: &Vertex) -> Option<Vertex> {
        let target = self.vertices.values().next()?;
        sp.geodesic_vertices(v, target).into_iter().find(|u| self.contains_vertex(sp, u))
    }

    /// Generators of `H ∩ Stab(v)` for a vertex orbit representative.
    pub fn vertex_stabilizer(&self, sp: &Splitting, key: &VertexKey) -> Vec<Word> {
        self.group.intersect(&sp.vertex_stabilizer(&self.vertices[key])).free_basis()
    }

    pub fn edge_stabilizer(&self, sp: &Splitting, key: &Word) -> Vec<Word> {
        self.group.intersect(&sp.edge_stabilizer(&self.edges[key].edge)).free_basis()
    }

    pub fn to_json(&self, sp: &Splitting) -> serde_json::Value {
        #[derive(Serialize)]
        struct V {
            side: Side,
            key: Word,
            stabilizer: Vec<Word>,
        }
        #[derive(Serialize)]
        struct E {
            key: Word,
            origin: VertexKey,
            terminus: VertexKey,
            stabilizer: Vec<Word>,
        }
        let vs: Vec<V> = self
            .vertices
            .keys()
            .map(|k| V { side: k.0, key: k.1.clone(), stabilizer: self.vertex_stabilizer(sp, k) })
            .collect();
        let es: Vec<E> = self
            .ends
            .iter()
            .map(|(k, (o, t))| E {
                key: k.clone(),
                origin: o.clone(),
                terminus: t.clone(),
                stabilizer: self.edge_stabilizer(sp, k),
            })
            .collect();
        serde_json::json!({
            "group": self.group.generators(),
            "vertices": vs,
            "edges": es,
        })
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph \"{name}\" {{");
        let id = |k: &VertexKey| format!("\"{:?}:{}\"", k.0, k.1);
        for k in self.vertices.keys() {
            let _ = writeln!(s, "  {};", id(k));
        }
        for (e, (o, t)) in &self.ends {
            let _ = writeln!(s, "  {} -- {} [label=\"{e}\"];", id(o), id(t));
        }
        s.push_str("}\n");
        s
    }
}

/// `Min_T(H) / H`.
pub fn min_subtree_quotient(h: &SubgroupGraph, sp: &Splitting) -> Result<QuotientGraph> {
    if !is_nontrivial_action(h, sp) {
        return Err(Error::TrivialAction);
    }
    let mut q = QuotientGraph::saturate(sp, h, &[]);
    q.prune(sp, &BTreeSet::new(), |_| 0);
    Ok(q)
}

/// The edge group of `sp1` acts non-trivially on the tree of `sp2` and its
/// minimal subtree contains `e2`.
pub fn crosses_strongly(sp1: &Splitting, sp2: &Splitting, e2: &crate::bass_serre::Edge) -> bool {
    match min_subtree_quotient(sp1.edge_group(), sp2) {
        Ok(q) => q.contains_cell(sp2, &Cell::E(e2.clone())),
        Err(_) => false,
    }
}

/// Number of edge orbits of `Min_{T2}(C1) / C1`, or 0 when `C1` is elliptic.
pub fn strong_intersection(sp1: &Splitting, sp2: &Splitting) -> usize {
    min_subtree_quotient(sp1.edge_group(), sp2).map_or(0, |q| q.num_edge_orbits())
}

/// Fiber of the asymmetric core over a base cell of the first tree.
#[derive(Clone, Debug)]
pub enum Fiber {
    Min(QuotientGraph),
    /// A chosen fixed vertex of an elliptic stabilizer.
    Point(Vertex),
    /// Over the base edge when its stabilizer is elliptic: a segment from a
    /// fixed point over the origin to one over the terminus.
    Segment(Vertex, Vertex),
}

#[derive(Clone, Debug)]
pub struct AsymmetricCore {
    pub fibers: BTreeMap<CellType, Fiber>,
    /// Every stabilizer acts non-trivially, so no choices were made.
    pub canonical: bool,
}

impl AsymmetricCore {
    pub fn two_cells(&self) -> usize {
        match self.fibers.get(&CellType::E) {
            Some(Fiber::Min(q)) => q.num_edge_orbits(),
            _ => 0,
        }
    }
}

fn project_fiber(sp2: &Splitting, f: &Fiber, shift: &Word, v: &Vertex) -> Vertex {
    // Projection onto shift * f.
    let local = sp2.act_vertex(&shift.inverse(), v);
    let p = match f {
        Fiber::Min(q) => q.project(sp2, &local).expect("nonempty minimal subtree"),
        Fiber::Point(p) => p.clone(),
        Fiber::Segment(..) => unreachable!("vertex fibers are never segments"),
    };
    sp2.act_vertex(shift, &p)
}

/// `A_1(T_1 × T_2)` at orbit level. Elliptic stabilizers get fixed points
/// chosen by iterated projection from the base vertex of `T_2`.
pub fn asymmetric_core(sp1: &Splitting, sp2: &Splitting) -> AsymmetricCore {
    let mut fibers = BTreeMap::new();
    let mut canonical = true;
    for t in sp1.cell_types() {
        let k = sp1.type_group(t);
        if is_nontrivial_action(k, sp2) {
            fibers.insert(t, Fiber::Min(min_subtree_quotient(k, sp2).expect("non-trivial action")));
            continue;
        }
        canonical = false;
        let q = fixed_vertex(sp2, k.generators(), &sp2.base_vertex()).expect("elliptic subgroup has a fixed point");
        if t != CellType::E {
            fibers.insert(t, Fiber::Point(q));
            continue;
        }
        let over_o = &fibers[&CellType::A];
        let over_t = &fibers[&sp1.terminus_side().into()];
        let s1 = sp1.terminus_shift();
        let mut p = project_fiber(sp2, over_o, &Word::identity(), &q);
        let mut p2 = project_fiber(sp2, over_t, s1, &p);
        for _ in 0..4 {
            let np = project_fiber(sp2, over_o, &Word::identity(), &p2);
            let np2 = project_fiber(sp2, over_t, s1, &np);
            if np == p && np2 == p2 {
                break;
            }
            p = np;
            p2 = np2;
        }
        fibers.insert(t, Fiber::Segment(p, p2));
    }
    AsymmetricCore { fibers, canonical }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bass_serre::SplittingSpec;
    use crate::word::w;
    use rand::{Rng, SeedableRng};

    fn free_product() -> Splitting {
        Splitting::new(SplittingSpec::amalgam("F", &[w("a")], &[w("b")], &[]), 2).unwrap()
    }

    fn torus_a() -> Splitting {
        Splitting::new(SplittingSpec::hnn("Ta", &[w("a"), w("baB")], &[w("a")], w("b")), 2).unwrap()
    }

    fn torus_b() -> Splitting {
        Splitting::new(SplittingSpec::hnn("Tb", &[w("b"), w("abA")], &[w("b")], w("a")), 2).unwrap()
    }

    fn sub(gens: &[&str]) -> SubgroupGraph {
        SubgroupGraph::build(2, &gens.iter().map(|s| w(s)).collect::<Vec<_>>())
    }

    #[test]
    fn nontrivial_action_examples() {
        let t = free_product();
        assert!(!is_nontrivial_action(&sub(&["a"]), &t));
        assert!(is_nontrivial_action(&sub(&["ab"]), &t));
        assert!(!is_nontrivial_action(&sub(&[]), &t));
        assert!(is_nontrivial_action(&sub(&["a", "b"]), &t));
    }

    #[test]
    fn min_of_whole_group_is_the_splitting() {
        for sp in [free_product(), torus_a()] {
            let q = min_subtree_quotient(&SubgroupGraph::full(2), &sp).unwrap();
            assert_eq!(q.num_edge_orbits(), 1);
            assert_eq!(q.num_vertex_orbits(), sp.cell_types().len() - 1);
        }
    }

    #[test]
    fn min_of_ab_is_a_two_edge_circuit() {
        let t = free_product();
        let q = min_subtree_quotient(&sub(&["ab"]), &t).unwrap();
        assert_eq!(q.num_edge_orbits(), 2);
        assert_eq!(q.num_vertex_orbits(), 2);
    }

    #[test]
    fn min_of_a_in_tb_has_one_edge_orbit() {
        let q = min_subtree_quotient(&sub(&["a"]), &torus_b()).unwrap();
        assert_eq!(q.num_edge_orbits(), 1);
        assert!(min_subtree_quotient(&sub(&["a"]), &free_product()).is_err());
    }

    #[test]
    fn pruning_is_confluent() {
        let t = free_product();
        let h = sub(&["abAB", "aab"]);
        let reference = min_subtree_quotient(&h, &t).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let mut q = QuotientGraph::saturate(&t, &h, &[]);
            q.prune(&t, &BTreeSet::new(), |leaves| rng.gen_range(0..leaves.len()));
            assert_eq!(q.vertex_keys().collect::<Vec<_>>(), reference.vertex_keys().collect::<Vec<_>>());
            assert_eq!(q.edge_keys().collect::<Vec<_>>(), reference.edge_keys().collect::<Vec<_>>());
        }
    }

    #[test]
    fn strong_crossing_examples() {
        let (ta, tb) = (torus_a(), torus_b());
        assert!(crosses_strongly(&ta, &tb, &tb.base_edge()));
        assert!(!crosses_strongly(&free_product(), &tb, &tb.base_edge()));
        // No power of a times bab lies in the edge group, so this edge is off the axis of a.
        let far = tb.act_edge(&w("bab"), &tb.base_edge());
        assert!(!crosses_strongly(&ta, &tb, &far));
    }

    #[test]
    fn strong_intersection_examples() {
        let (ta, tb) = (torus_a(), torus_b());
        assert_eq!(strong_intersection(&ta, &tb), 1);
        assert_eq!(strong_intersection(&tb, &ta), 1);
        assert_eq!(strong_intersection(&free_product(), &ta), 0);
        assert_eq!(strong_intersection(&ta, &ta), 0);
    }

    #[test]
    fn asymmetric_core_examples() {
        let (ta, tb) = (torus_a(), torus_b());
        let a1 = asymmetric_core(&ta, &tb);
        assert!(a1.canonical);
        assert_eq!(a1.two_cells(), strong_intersection(&ta, &tb));
        let f = free_product();
        let self_core = asymmetric_core(&f, &f);
        assert!(!self_core.canonical);
        assert_eq!(self_core.two_cells(), 0);
        match &self_core.fibers[&CellType::E] {
            Fiber::Segment(p, q) => assert_eq!(f.distance(p, q), 1),
            other => panic!("unexpected fiber {other:?}"),
        }
    }

    #[test]
    fn hull_of_two_points_is_the_segment() {
        let t = free_product();
        let triv = sub(&[]);
        let u = t.vertex(Side::A, &w("ab"));
        let v = t.vertex(Side::B, &w("Ba"));
        let h = QuotientGraph::hull(&t, &triv, &[Cell::V(u.clone()), Cell::V(v.clone())]);
        assert_eq!(h.num_edge_orbits(), t.distance(&u, &v));
        assert_eq!(h.num_vertex_orbits(), t.distance(&u, &v) + 1);
    }

    #[test]
    fn fixed_vertex_of_elliptic_subgroup() {
        let t = free_product();
        let gens = [w("bab"), w("baaB")];
        let start = t.vertex(Side::A, &w("ab"));
        let v = fixed_vertex(&t, &gens[1..], &start).unwrap();
        assert_eq!(t.act_vertex(&gens[1], &v), v);
    }
}
