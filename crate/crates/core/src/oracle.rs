//! Brute-force ground truth: balls, finite windows of a tree, approximate
//! heaviness, and a report checking a computed core against them.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bass_serre::{Cell, DirectionRef, Edge, Endpoint, Splitting, Vertex};
use crate::corecomplex::{fiber_convex_closure, CellKey, CoreComplex, Pair, DEFAULT_CAP};
use crate::word::{letters, Word};

/// All reduced words of length at most `radius`, in canonical order.
pub fn ball(rank: usize, radius: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..radius {
        let mut next = Vec::with_capacity(layer.len() * 2 * rank.max(1));
        for w in &layer {
            let last = w.letters().last().copied();
            for x in letters(rank) {
                if Some(-x) != last {
                    next.push(w.multiply(&Word::letter(x)));
                }
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The translates `g · v_A` and `g · e` for `g` in a ball, as a graph. Being
/// a subgraph of a tree, its path distances are tree distances wherever a
/// path exists.
#[derive(Clone, Debug)]
pub struct TreeWindow {
    pub radius: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    index: HashMap<Vertex, usize>,
    ends: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl TreeWindow {
    pub fn build(sp: &Splitting, radius: usize) -> Self {
        let mut win = TreeWindow {
            radius,
            vertices: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
            ends: Vec::new(),
            adj: Vec::new(),
        };
        let base = sp.base_vertex();
        let base_edge = sp.base_edge();
        let mut seen_edges = HashMap::new();
        for g in ball(sp.rank(), radius) {
            win.add_vertex(sp.act_vertex(&g, &base));
            if radius == 0 {
                continue;
            }
            let e = sp.act_edge(&g, &base_edge);
            if seen_edges.contains_key(&e) {
                continue;
            }
            let o = win.add_vertex(sp.origin(&e));
            let t = win.add_vertex(sp.terminus(&e));
            seen_edges.insert(e.clone(), win.edges.len());
            win.adj[o].push(win.edges.len());
            win.adj[t].push(win.edges.len());
            win.ends.push((o, t));
            win.edges.push(e);
        }
        win
    }

    fn add_vertex(&mut self, v: Vertex) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.index.insert(v.clone(), self.vertices.len());
        self.vertices.push(v);
        self.adj.push(Vec::new());
        self.vertices.len() - 1
    }

    pub fn vertex_index(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn edge_ends(&self, j: usize) -> (usize, usize) {
        self.ends[j]
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj[i].iter().map(move |&j| {
            let (o, t) = self.ends[j];
            (if o == i { t } else { o }, j)
        })
    }

    /// Breadth-first distances from vertex `i`; `None` off its component.
    pub fn distances_from(&self, i: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[i] = Some(0);
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("visited");
            for (v, _) in self.neighbours(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: &Vertex, v: &Vertex) -> Option<usize> {
        let (i, j) = (self.vertex_index(u)?, self.vertex_index(v)?);
        self.distances_from(i)[j]
    }

    /// Component label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.vertices.len()];
        for s in 0..self.vertices.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbours(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = s;
                        stack.push(v);
                    }
                }
            }
        }
        comp
    }

    /// Whether a cell subset induces a connected graph on each component.
    pub fn is_convex(&self, vertex_in: &[bool], edge_in: &[bool]) -> bool {
        let comp = self.components();
        let mut seen = vec![false; self.vertices.len()];
        let mut roots: HashMap<usize, usize> = HashMap::new();
        for s in 0..self.vertices.len() {
            if !vertex_in[s] || seen[s] {
                continue;
            }
            *roots.entry(comp[s]).or_default() += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for (v, j) in self.neighbours(u) {
                    if edge_in[j] && vertex_in[v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        roots.values().all(|&n| n == 1)
    }
}

/// An element of the ball moving the base point into `d1 × d2`, at least `min`
/// away from it in both coordinates.
pub fn approx_heavy(pair: Pair<'_>, d1: &DirectionRef, d2: &DirectionRef, radius: usize, min: usize) -> Option<Word> {
    OrbitSample::new(pair, radius).witness(pair, d1, d2, min)
}

/// Orbit of the base point of `T_1 × T_2` under a ball.
pub struct OrbitSample {
    points: Vec<(Word, Vertex, Vertex, usize, usize)>,
}

impl OrbitSample {
    pub fn new(pair: Pair<'_>, radius: usize) -> Self {
        let (b1, b2) = (pair.t1.base_vertex(), pair.t2.base_vertex());
        let points = ball(pair.t1.rank(), radius)
            .into_iter()
            .map(|g| {
                let (v1, v2) = (pair.t1.act_vertex(&g, &b1), pair.t2.act_vertex(&g, &b2));
                let (d1, d2) = (pair.t1.distance(&b1, &v1), pair.t2.distance(&b2, &v2));
                (g, v1, v2, d1, d2)
            })
            .collect();
        OrbitSample { points }
    }

    pub fn witness(&self, pair: Pair<'_>, d1: &DirectionRef, d2: &DirectionRef, min: usize) -> Option<Word> {
        self.points
            .iter()
            .filter(|p| p.3 >= min && p.4 >= min)
            .find(|p| pair.t1.vertex_in_direction(&p.1, d1) && pair.t2.vertex_in_direction(&p.2, d2))
            .map(|p| p.0.clone())
    }

    /// Witnesses for the four quadrants at a square, or the first one missing.
    pub fn square(&self, pair: Pair<'_>, e1: &Edge, e2: &Edge, min: usize) -> std::result::Result<Vec<Word>, QuadrantName> {
        let mut out = Vec::new();
        for a in [Endpoint::Origin, Endpoint::Terminus] {
            for b in [Endpoint::Origin, Endpoint::Terminus] {
                let d1 = DirectionRef { edge: e1.clone(), toward: a };
                let d2 = DirectionRef { edge: e2.clone(), toward: b };
                match self.witness(pair, &d1, &d2, min) {
                    Some(g) => out.push(g),
                    None => return Err(QuadrantName(a, b)),
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadrantName(pub Endpoint, pub Endpoint);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub cell: String,
    pub trace: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub radius: usize,
    pub heavy_depth: usize,
    pub light_depth: usize,
    pub checks: Vec<CheckResult>,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn clean(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Displacement required of a heavy witness at radius `radius`.
pub fn heavy_depth(radius: usize) -> usize {
    (radius / 3).max(1)
}

/// Above this displacement no witness may exist for a quadrant of a square
/// outside the core, for candidate squares at distance at most `near`.
pub fn light_depth(radius: usize, near: usize) -> usize {
    (radius / 2).max(near + 2)
}

/// Check a computed core against the orbit of the base point.
pub fn crosscheck(core: &CoreComplex, pair: Pair<'_>, radius: usize) -> Report {
    let sample = OrbitSample::new(pair, radius);
    let near = (radius / 4).max(1);
    let (hd, ld) = (heavy_depth(radius), light_depth(radius, near));
    let mut checks = Vec::new();
    let mut violations = Vec::new();

    let bad: Vec<&CellKey> = core.lower.iter().filter(|k| !core.upper.contains(k)).collect();
    for k in &bad {
        violations.push(Violation { check: "lower_in_upper".into(), cell: k.to_string(), trace: vec![] });
    }
    checks.push(CheckResult {
        name: "lower_in_upper".into(),
        passed: bad.is_empty(),
        detail: format!("{} lower cells outside upper", bad.len()),
    });

    // (i) squares of the lower bound look heavy.
    let mut missing = 0;
    for k in core.lower.iter().filter(|k| k.is_square()) {
        let (c1, c2) = pair.cells_of(k);
        let (Cell::E(e1), Cell::E(e2)) = (c1, c2) else { unreachable!("square") };
        if let Err(q) = sample.square(pair, &e1, &e2, hd) {
            missing += 1;
            violations.push(Violation {
                check: "heavy_lower_squares".into(),
                cell: format!("{k} quadrant {:?}", q),
                trace: vec![],
            });
        }
    }
    checks.push(CheckResult {
        name: "heavy_lower_squares".into(),
        passed: missing == 0,
        detail: format!("depth {hd}, {missing} squares lacking a witness"),
    });

    // (ii) squares near the base outside the upper bound look light.
    let mut heavy_outside = 0;
    let e1 = pair.t1.base_edge();
    let mut tried = std::collections::BTreeSet::new();
    for g in ball(pair.t1.rank(), near) {
        let e2 = pair.t2.act_edge(&g, &pair.t2.base_edge());
        let k = pair.key_of(&Cell::E(e1.clone()), &Cell::E(e2.clone()));
        if core.upper.contains(&k) || !tried.insert(k.clone()) {
            continue;
        }
        if let Ok(trace) = sample.square(pair, &e1, &e2, ld) {
            heavy_outside += 1;
            violations.push(Violation { check: "light_outside_upper".into(), cell: k.to_string(), trace });
        }
    }
    checks.push(CheckResult {
        name: "light_outside_upper".into(),
        passed: heavy_outside == 0,
        detail: format!("depth {ld}, {} squares tried, {heavy_outside} look heavy", tried.len()),
    });

    // (iii) fibers of the upper bound are subtrees, in both directions.
    let window_radius = radius.min(6);
    let mut broken = Vec::new();
    for (p, flip) in [(pair, false), (pair.swapped(), true)] {
        let win = TreeWindow::build(p.t2, window_radius);
        let upper: std::collections::BTreeSet<CellKey> = if flip {
            core.upper.iter().map(|k| pair.transpose(k)).collect()
        } else {
            core.upper.clone()
        };
        for t in p.t1.cell_types() {
            let base = p.t1.base_cell(t);
            let vin: Vec<bool> =
                win.vertices.iter().map(|v| upper.contains(&p.key_of(&base, &Cell::V(v.clone())))).collect();
            let ein: Vec<bool> = win.edges.iter().map(|e| upper.contains(&p.key_of(&base, &Cell::E(e.clone())))).collect();
            let closed = (0..win.edges.len()).all(|j| {
                let (o, t) = win.edge_ends(j);
                !ein[j] || (vin[o] && vin[t])
            });
            if !closed || !win.is_convex(&vin, &ein) {
                broken.push(format!("{}{:?}", if flip { "horizontal " } else { "vertical " }, t));
            }
        }
    }
    for b in &broken {
        violations.push(Violation { check: "fiber_convexity".into(), cell: b.clone(), trace: vec![] });
    }
    checks.push(CheckResult {
        name: "fiber_convexity".into(),
        passed: broken.is_empty(),
        detail: format!("window radius {window_radius}, {} broken fibers", broken.len()),
    });

    // The upper bound must already be closed.
    let closed = fiber_convex_closure(pair, &core.upper, DEFAULT_CAP).map(|c| c == core.upper).unwrap_or(false);
    checks.push(CheckResult {
        name: "upper_closed".into(),
        passed: closed,
        detail: format!("{} upper orbits", core.upper.len()),
    });
    if !closed {
        violations.push(Violation { check: "upper_closed".into(), cell: "upper".into(), trace: vec![] });
    }

    Report { radius, heavy_depth: hd, light_depth: ld, checks, violations }
}
