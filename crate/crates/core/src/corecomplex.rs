//! The core of `T_1 × T_2` at orbit level.
//!
//! A product cell `(x_1, x_2)` is named by translating `x_1` to the base cell
//! of its type: the orbit of `(x_1^0, g x_2^0)` is keyed by the types and the
//! shortlex-least element of `K_1 g K_2`, where `K_i` stabilize the base cells.
//!
//! The core is sandwiched. Cells certified by elements hyperbolic in both
//! trees lie in the core, and so does their fiber-convex closure. Conversely
//! any closed connected invariant set with convex fibers contains the core,
//! which gives the upper bound from the two asymmetric cores.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bass_serre::{Cell, CellType, DirectionRef, Edge, Endpoint, Splitting, Step, Vertex};
use crate::error::{Error, Result};
use crate::minsubtree::{asymmetric_core, is_nontrivial_action, strong_intersection, Fiber, QuotientGraph};
use crate::oracle::ball;
use crate::word::Word;

/// Orbit of the product cell `(x_1^0(t1), rep · x_2^0(t2))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub t1: CellType,
    pub t2: CellType,
    pub rep: Word,
}

impl CellKey {
    pub fn dim(&self) -> usize {
        usize::from(self.t1.is_edge()) + usize::from(self.t2.is_edge())
    }

    pub fn is_square(&self) -> bool {
        self.dim() == 2
    }
}

/// Diagonal of the square orbit `(e_1^0, rep · e_2^0)`; `same` joins
/// `(o, o)` to `(t, t)`, otherwise `(o, t)` to `(t, o)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagonalKey {
    pub rep: Word,
    pub same: bool,
}

pub type CellSet = BTreeSet<CellKey>;

/// Default cap on the number of cell orbits in any closure.
pub const DEFAULT_CAP: usize = 10_000;
/// Default certificate search radius in rank 2.
pub const DEFAULT_BUDGET: usize = 8;

/// Default search radius for a given rank; balls grow like `(2n - 1)^L`.
pub fn default_budget(rank: usize) -> usize {
    match rank {
        0..=2 => DEFAULT_BUDGET,
        3 => 6,
        _ => 5,
    }
}

/// A pair of splittings of the same free group.
#[derive(Clone, Copy)]
pub struct Pair<'a> {
    pub t1: &'a Splitting,
    pub t2: &'a Splitting,
}

impl<'a> Pair<'a> {
    pub fn new(t1: &'a Splitting, t2: &'a Splitting) -> Self {
        assert_eq!(t1.rank(), t2.rank(), "splittings of different free groups");
        Pair { t1, t2 }
    }

    pub fn swapped(&self) -> Pair<'a> {
        Pair { t1: self.t2, t2: self.t1 }
    }

    pub fn key_of(&self, c1: &Cell, c2: &Cell) -> CellKey {
        let (t1, t2) = (c1.cell_type(), c2.cell_type());
        let local = c1.rep().inverse().multiply(c2.rep());
        let rep = self.t1.type_group(t1).double_coset_rep(&local, self.t2.type_group(t2));
        CellKey { t1, t2, rep }
    }

    /// Representative product cell of an orbit.
    pub fn cells_of(&self, k: &CellKey) -> (Cell, Cell) {
        (self.t1.base_cell(k.t1), self.t2.cell(k.t2, &k.rep))
    }

    /// The same orbit named in the swapped pair.
    pub fn transpose(&self, k: &CellKey) -> CellKey {
        let rep = self.t2.type_group(k.t2).double_coset_rep(&k.rep.inverse(), self.t1.type_group(k.t1));
        CellKey { t1: k.t2, t2: k.t1, rep }
    }

    pub fn transpose_diagonal(&self, d: &DiagonalKey) -> DiagonalKey {
        let rep = self.t2.edge_group().double_coset_rep(&d.rep.inverse(), self.t1.edge_group());
        DiagonalKey { rep, same: d.same }
    }

    pub fn faces(&self, k: &CellKey) -> Vec<CellKey> {
        let (c1, c2) = self.cells_of(k);
        let f1 = faces_with_self(self.t1, &c1);
        let f2 = faces_with_self(self.t2, &c2);
        let mut out = Vec::new();
        for a in &f1 {
            for b in &f2 {
                if (a, b) != (&c1, &c2) {
                    out.push(self.key_of(a, b));
                }
            }
        }
        out
    }

    pub fn diagonal_key(&self, e2: &Step) -> DiagonalKey {
        DiagonalKey {
            rep: self.t1.edge_group().double_coset_rep(&e2.edge.rep, self.t2.edge_group()),
            same: e2.forward,
        }
    }
}

fn faces_with_self(sp: &Splitting, c: &Cell) -> Vec<Cell> {
    match c {
        Cell::V(_) => vec![c.clone()],
        Cell::E(e) => vec![c.clone(), Cell::V(sp.origin(e)), Cell::V(sp.terminus(e))],
    }
}

/// Element hyperbolic in both trees, with an axis anchor in each.
#[derive(Clone, Debug)]
struct BiHyperbolic {
    h: Word,
    anchor1: Vertex,
    l1: usize,
    anchor2: Vertex,
    l2: usize,
}

/// Verified witness that a quadrant is heavy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavyCertificate {
    pub h: Word,
    pub l1: usize,
    pub l2: usize,
}

/// Where the attracting end of an element sits relative to a cell: the first
/// step from a vertex towards it, or the side of an edge containing it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Exit {
    Step(Step),
    Side(Endpoint),
}

fn exit(sp: &Splitting, h: &Word, anchor: &Vertex, l: usize, c: &Cell) -> Exit {
    let probe = match c {
        Cell::V(v) => v.clone(),
        Cell::E(e) => sp.origin(e),
    };
    let d = sp.distance(anchor, &probe) + 1;
    let target = sp.act_vertex(&h.pow((d / l + 2) as i64), anchor);
    match c {
        Cell::V(v) => Exit::Step(sp.geodesic(v, &target).swap_remove(0)),
        Cell::E(e) => {
            let toward = DirectionRef { edge: e.clone(), toward: Endpoint::Terminus };
            if sp.vertex_in_direction(&target, &toward) {
                Exit::Side(Endpoint::Terminus)
            } else {
                Exit::Side(Endpoint::Origin)
            }
        }
    }
}

/// Whether the attracting end lies in `d`, from a known axis vertex.
fn end_in(sp: &Splitting, h: &Word, anchor: &Vertex, l: usize, d: &DirectionRef) -> bool {
    let far = sp.endpoint(&d.edge, d.toward.opposite());
    let reach = 2 * sp.distance(anchor, &far) + 2;
    let target = sp.act_vertex(&h.pow((reach / l + 1) as i64), anchor);
    sp.vertex_in_direction(&target, d)
}

/// No "cross" `{x}×* ∪ *×{y}` contains every exit pair: then every quadrant
/// containing the cell contains the attracting ends of some element.
fn exits_certify(pairs: &[(Exit, Exit)]) -> bool {
    let firsts: BTreeSet<Option<&Exit>> = pairs.iter().map(|p| Some(&p.0)).chain([None]).collect();
    let seconds: BTreeSet<Option<&Exit>> = pairs.iter().map(|p| Some(&p.1)).chain([None]).collect();
    for x in &firsts {
        for y in &seconds {
            if pairs.iter().all(|p| Some(&p.0) == *x || Some(&p.1) == *y) {
                return false;
            }
        }
    }
    true
}

/// Lazily evaluated stream of elements hyperbolic in both trees: the ball of
/// radius `budget` in canonical order, then conjugates and products of the
/// first elements found.
pub struct Certifier<'a> {
    pair: Pair<'a>,
    budget: usize,
    candidates: RefCell<Candidates>,
}

struct Candidates {
    words: Vec<Word>,
    next: usize,
    found: Vec<BiHyperbolic>,
    extended: bool,
}

impl<'a> Certifier<'a> {
    pub fn new(pair: Pair<'a>, budget: usize) -> Self {
        let words = if budget == 0 { Vec::new() } else { ball(pair.t1.rank(), budget) };
        Certifier {
            pair,
            budget,
            candidates: RefCell::new(Candidates { words, next: 0, found: Vec::new(), extended: budget == 0 }),
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    fn evaluate(&self, h: &Word) -> Option<BiHyperbolic> {
        let (a1, p1) = self.pair.t1.axis_segment(h).ok()?;
        let (a2, p2) = self.pair.t2.axis_segment(h).ok()?;
        Some(BiHyperbolic { h: h.clone(), anchor1: a1, l1: p1.len(), anchor2: a2, l2: p2.len() })
    }

    /// The `i`-th element of the stream, if the budget reaches it.
    fn get(&self, i: usize) -> Option<BiHyperbolic> {
        let mut c = self.candidates.borrow_mut();
        while c.found.len() <= i {
            if c.next < c.words.len() {
                let w = c.words[c.next].clone();
                c.next += 1;
                if let Some(b) = self.evaluate(&w) {
                    c.found.push(b);
                }
                continue;
            }
            if c.extended {
                return None;
            }
            c.extended = true;
            // Two rounds: conjugates by powers of other hyperbolics, then products.
            let seeds: Vec<Word> = c.found.iter().take(12).map(|b| b.h.clone()).collect();
            let mut extra = Vec::new();
            for (i, h) in seeds.iter().enumerate() {
                for (j, k) in seeds.iter().enumerate() {
                    if i != j {
                        for m in 1..=2 {
                            extra.push(k.pow(m).conjugate(h));
                        }
                        extra.push(h.multiply(k));
                    }
                }
            }
            c.words.extend(extra);
        }
        Some(c.found[i].clone())
    }

    /// Elements whose exit pairs certify that the product cell lies in the core.
    pub fn certify_cell(&self, c1: &Cell, c2: &Cell) -> Option<Vec<Word>> {
        let mut pairs: Vec<(Exit, Exit)> = Vec::new();
        let mut used = Vec::new();
        let mut i = 0;
        while let Some(b) = self.get(i) {
            i += 1;
            let p = (
                exit(self.pair.t1, &b.h, &b.anchor1, b.l1, c1),
                exit(self.pair.t2, &b.h, &b.anchor2, b.l2, c2),
            );
            if pairs.contains(&p) {
                continue;
            }
            pairs.push(p);
            used.push(b.h.clone());
            if exits_certify(&pairs) {
                return Some(used);
            }
        }
        None
    }

    pub fn certify_key(&self, k: &CellKey) -> Option<Vec<Word>> {
        let (c1, c2) = self.pair.cells_of(k);
        self.certify_cell(&c1, &c2)
    }

    /// A witness for the quadrant `d1 × d2`.
    pub fn heavy_certificate(&self, d1: &DirectionRef, d2: &DirectionRef) -> Option<HeavyCertificate> {
        let mut i = 0;
        while let Some(b) = self.get(i) {
            i += 1;
            if end_in(self.pair.t1, &b.h, &b.anchor1, b.l1, d1) && end_in(self.pair.t2, &b.h, &b.anchor2, b.l2, d2) {
                return Some(HeavyCertificate { h: b.h, l1: b.l1, l2: b.l2 });
            }
        }
        None
    }

    /// All four quadrants `Q(±e1, ±e2)` are certified heavy.
    pub fn certify_square(&self, e1: &Edge, e2: &Edge) -> bool {
        self.square_certificates(e1, e2).is_some()
    }

    pub fn square_certificates(&self, e1: &Edge, e2: &Edge) -> Option<Vec<HeavyCertificate>> {
        let mut out = Vec::new();
        for a in [Endpoint::Origin, Endpoint::Terminus] {
            for b in [Endpoint::Origin, Endpoint::Terminus] {
                let d1 = DirectionRef { edge: e1.clone(), toward: a };
                let d2 = DirectionRef { edge: e2.clone(), toward: b };
                out.push(self.heavy_certificate(&d1, &d2)?);
            }
        }
        Some(out)
    }
}

/// Closure under faces and under convex hulls of the fibers of both
/// projections. Diagonals survive only where they are the whole fiber over the
/// interior of an edge in both directions; otherwise they thicken to squares.
pub fn fiber_convex_closure(pair: Pair<'_>, cells: &CellSet, cap: usize) -> Result<CellSet> {
    Ok(closure_with_diagonals(pair, cells, &BTreeSet::new(), cap)?.0)
}

fn closure_with_diagonals(
    pair: Pair<'_>,
    cells: &CellSet,
    diagonals: &BTreeSet<DiagonalKey>,
    cap: usize,
) -> Result<(CellSet, BTreeSet<DiagonalKey>)> {
    let mut set = cells.clone();
    let mut diags = diagonals.clone();
    loop {
        let before = (set.len(), diags.len());
        for k in set.clone() {
            set.extend(pair.faces(&k));
        }
        vertical_hulls(pair, &mut set);
        let mut swapped: CellSet = set.iter().map(|k| pair.transpose(k)).collect();
        vertical_hulls(pair.swapped(), &mut swapped);
        let back = pair.swapped();
        set.extend(swapped.iter().map(|k| back.transpose(k)));
        if !diags.is_empty() && !diagonals_stay_thin(pair, &set, &diags) {
            set.extend(diags.iter().map(|d| CellKey { t1: CellType::E, t2: CellType::E, rep: d.rep.clone() }));
            diags.clear();
        }
        if set.len() > cap {
            return Err(Error::BudgetExceeded { cap });
        }
        if (set.len(), diags.len()) == before {
            return Ok((set, diags));
        }
    }
}

/// Replace each fiber of the first projection by its convex hull.
fn vertical_hulls(pair: Pair<'_>, set: &mut CellSet) {
    for t1 in pair.t1.cell_types() {
        let seeds: Vec<Cell> = set.iter().filter(|k| k.t1 == t1).map(|k| pair.t2.cell(k.t2, &k.rep)).collect();
        if seeds.is_empty() {
            continue;
        }
        let hull = QuotientGraph::hull(pair.t2, pair.t1.type_group(t1), &seeds);
        let base = pair.t1.base_cell(t1);
        for c2 in hull.cells() {
            set.insert(pair.key_of(&base, &c2));
        }
    }
}

fn diagonals_stay_thin(pair: Pair<'_>, set: &CellSet, diags: &BTreeSet<DiagonalKey>) -> bool {
    if diags.len() != 1 || set.iter().any(|k| k.t1.is_edge() || k.t2.is_edge()) {
        return false;
    }
    let d = diags.iter().next().expect("one diagonal");
    let (c1, c2) = (pair.t1.edge_group(), pair.t2.edge_group());
    // The stabilizers of the two edges must agree, so each fiber is one point.
    let kinv = d.rep.inverse();
    c1.generators().iter().all(|g| c2.contains(&g.conjugate(&kinv)))
        && c2.generators().iter().all(|g| c1.contains(&g.conjugate(&d.rep)))
}

/// Cells and diagonals of the asymmetric core of the first tree.
fn asymmetric_cells(pair: Pair<'_>) -> (CellSet, BTreeSet<DiagonalKey>) {
    let a = asymmetric_core(pair.t1, pair.t2);
    let mut cells = CellSet::new();
    let mut diags = BTreeSet::new();
    for (t, fiber) in &a.fibers {
        let base = pair.t1.base_cell(*t);
        match fiber {
            Fiber::Min(q) => cells.extend(q.cells().iter().map(|c| pair.key_of(&base, c))),
            Fiber::Point(p) => {
                cells.insert(pair.key_of(&base, &Cell::V(p.clone())));
            }
            Fiber::Segment(p, q) => {
                let path = pair.t2.geodesic(p, q);
                match path.len() {
                    0 => {
                        cells.insert(pair.key_of(&base, &Cell::V(p.clone())));
                    }
                    1 => {
                        diags.insert(pair.diagonal_key(&path[0]));
                    }
                    _ => cells.extend(path.iter().map(|s| pair.key_of(&base, &Cell::E(s.edge.clone())))),
                }
            }
        }
    }
    (cells, diags)
}

/// Closure of the asymmetric core of `pair.t1`, named in `pair`.
fn closed_asymmetric(pair: Pair<'_>, cap: usize) -> Result<(CellSet, BTreeSet<DiagonalKey>)> {
    let (cells, diags) = asymmetric_cells(pair);
    closure_with_diagonals(pair, &cells, &diags, cap)
}

/// Upper bound for the core: the ordinary cells common to both closed
/// asymmetric cores, with the diagonals they share or that sit inside a square
/// of the other.
pub fn upper_bound(pair: Pair<'_>, cap: usize) -> Result<(CellSet, BTreeSet<DiagonalKey>)> {
    let (u1, d1) = closed_asymmetric(pair, cap)?;
    let back = pair.swapped();
    let (u2s, d2s) = closed_asymmetric(back, cap)?;
    let u2: CellSet = u2s.iter().map(|k| back.transpose(k)).collect();
    let d2: BTreeSet<DiagonalKey> = d2s.iter().map(|d| back.transpose_diagonal(d)).collect();
    let cells: CellSet = u1.intersection(&u2).cloned().collect();
    let square = |d: &DiagonalKey, u: &CellSet| {
        u.contains(&CellKey { t1: CellType::E, t2: CellType::E, rep: d.rep.clone() })
    };
    let diags = d1
        .iter()
        .filter(|d| d2.contains(d) || square(d, &u2))
        .chain(d2.iter().filter(|d| square(d, &u1)))
        .cloned()
        .collect();
    Ok((cells, diags))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Exact,
    Bounds,
}

/// Three-valued answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tri {
    True,
    False,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantRef {
    pub d1: DirectionRef,
    pub d2: DirectionRef,
}

/// Open rectangle `e_1 × ]x, x'[` between the fibers over the endpoints of a
/// light edge, cut out by two light quadrants facing each other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwiceLightRect {
    pub e1: Edge,
    pub bridge: Vec<Step>,
    /// The augmenting diagonal runs from `(o(e1), from)` to `(t(e1), to)`.
    pub from: Vertex,
    pub to: Vertex,
    pub quadrants: [QuadrantRef; 2],
}

#[derive(Clone, Debug)]
pub struct CoreOptions {
    pub budget: usize,
    pub cap: usize,
    /// The caller vouches that both splittings are JSJ over the same family.
    pub jsj_asserted: bool,
}

impl Default for CoreOptions {
    fn default() -> Self {
        CoreOptions { budget: DEFAULT_BUDGET, cap: DEFAULT_CAP, jsj_asserted: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreComplex {
    pub labels: (String, String),
    pub status: Status,
    pub lower: CellSet,
    pub upper: CellSet,
    pub connected: Option<bool>,
    pub diagonals: BTreeSet<DiagonalKey>,
    pub twice_light: Vec<TwiceLightRect>,
    /// Elements certifying the seeds of the lower bound.
    pub certificates: BTreeMap<String, Vec<Word>>,
    pub jsj_fast_path: bool,
    pub budget: usize,
}

pub fn counts(set: &CellSet) -> [usize; 3] {
    let mut c = [0; 3];
    for k in set {
        c[k.dim()] += 1;
    }
    c
}

fn has_light_free_edge(set: &CellSet) -> bool {
    set.iter().any(|k| k.t1.is_edge())
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}{:?}:{}", self.t1, self.t2, self.rep)
    }
}

pub fn compute_core(pair: Pair<'_>, opts: &CoreOptions) -> Result<CoreComplex> {
    let (mut upper, diagonals) = upper_bound(pair, opts.cap)?;
    let labels = (pair.t1.label().to_string(), pair.t2.label().to_string());

    // A zero budget asks for bounds only, so the asserted fast path is off too.
    let jsj = opts.jsj_asserted
        && opts.budget > 0
        && is_nontrivial_action(pair.t1.edge_group(), pair.t2)
        && is_nontrivial_action(pair.t2.edge_group(), pair.t1)
        && asymmetric_core(pair.t1, pair.t2).canonical
        && asymmetric_core(pair.t2, pair.t1).canonical;
    let mut certificates = BTreeMap::new();
    let mut lower = if jsj {
        upper = closed_asymmetric(pair, opts.cap)?.0;
        upper.clone()
    } else {
        let certifier = Certifier::new(pair, opts.budget);
        let mut covered = CellSet::new();
        let mut ordered: Vec<&CellKey> = upper.iter().collect();
        ordered.sort_by_key(|k| std::cmp::Reverse(k.dim()));
        for k in ordered {
            if covered.contains(k) {
                continue;
            }
            if let Some(ws) = certifier.certify_key(k) {
                covered.extend(pair.faces(k));
                covered.insert(k.clone());
                certificates.insert(k.to_string(), ws);
            }
        }
        fiber_convex_closure(pair, &covered, opts.cap)?
    };
    if !lower.is_subset(&upper) {
        return Err(Error::Inconsistent(format!(
            "lower bound escapes upper bound for {} x {}",
            labels.0, labels.1
        )));
    }
    // A nonempty connected closed set with convex fibers contains the core.
    if lower != upper && has_light_free_edge(&lower) {
        upper = lower.clone();
    }
    if jsj {
        lower = upper.clone();
    }
    let status = if lower == upper { Status::Exact } else { Status::Bounds };
    let connected = match status {
        Status::Exact => Some(has_light_free_edge(&upper)),
        Status::Bounds if !has_light_free_edge(&upper) => Some(false),
        Status::Bounds => None,
    };
    let mut core = CoreComplex {
        labels,
        status,
        lower,
        upper,
        connected,
        diagonals: BTreeSet::new(),
        twice_light: Vec::new(),
        certificates,
        jsj_fast_path: jsj,
        budget: opts.budget,
    };
    if core.status == Status::Exact && core.connected == Some(false) && !core.upper.is_empty() {
        core.diagonals = diagonals;
        core.twice_light = detect_twice_light(pair, &core.upper).into_iter().collect();
    }
    Ok(core)
}

/// The bridge between the fibers over the endpoints of the base edge of the
/// first tree, when the core has no cell over that edge.
pub fn detect_twice_light(pair: Pair<'_>, cells: &CellSet) -> Option<TwiceLightRect> {
    if has_light_free_edge(cells) {
        return None;
    }
    let (sp1, sp2) = (pair.t1, pair.t2);
    let e1 = sp1.base_edge();
    let o1 = Cell::V(sp1.origin(&e1));
    let t1 = Cell::V(sp1.terminus(&e1));
    let in_fiber = |c1: &Cell, y: &Vertex| cells.contains(&pair.key_of(c1, &Cell::V(y.clone())));
    let x = cells.iter().find(|k| k.t1 == CellType::A && !k.t2.is_edge())?;
    let x = sp2.vertex(x.t2.side()?, &x.rep);
    let ts: CellType = sp1.terminus_side().into();
    let y = cells.iter().find(|k| k.t1 == ts && !k.t2.is_edge())?;
    let y = sp2.act_vertex(sp1.terminus_shift(), &sp2.vertex(y.t2.side()?, &y.rep));
    let verts = sp2.geodesic_vertices(&x, &y);
    let steps = sp2.geodesic(&x, &y);
    let i = verts.iter().rposition(|v| in_fiber(&o1, v))?;
    let j = i + verts[i..].iter().position(|v| in_fiber(&t1, v))?;
    if i == j {
        return None;
    }
    let bridge = steps[i..j].to_vec();
    let first = bridge.first()?;
    let last = bridge.last()?;
    let toward_source = |s: &Step| if s.forward { Endpoint::Origin } else { Endpoint::Terminus };
    let quadrants = [
        QuadrantRef {
            d1: DirectionRef { edge: e1.clone(), toward: Endpoint::Terminus },
            d2: DirectionRef { edge: last.edge.clone(), toward: toward_source(last) },
        },
        QuadrantRef {
            d1: DirectionRef { edge: e1.clone(), toward: Endpoint::Origin },
            d2: DirectionRef { edge: first.edge.clone(), toward: toward_source(first).opposite() },
        },
    ];
    Some(TwiceLightRect { e1, bridge, from: verts[i].clone(), to: verts[j].clone(), quadrants })
}

impl CoreComplex {
    pub fn is_exact(&self) -> bool {
        self.status == Status::Exact
    }

    pub fn squares(&self) -> impl Iterator<Item = &CellKey> {
        self.upper.iter().filter(|k| k.is_square())
    }

    /// Number of square orbits, once the core is known exactly.
    pub fn intersection_number(&self) -> Option<usize> {
        self.is_exact().then(|| counts(&self.upper)[2])
    }

    pub fn is_compatible(&self) -> Tri {
        if counts(&self.lower)[2] > 0 {
            Tri::False
        } else if self.is_exact() {
            Tri::True
        } else {
            Tri::Unknown
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("core serializes");
        let extra = serde_json::json!({
            "lower_counts": counts(&self.lower),
            "upper_counts": counts(&self.upper),
        });
        v.as_object_mut().expect("object").insert("summary".into(), extra);
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let mut v = v.clone();
        if let Some(o) = v.as_object_mut() {
            o.remove("summary");
        }
        serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The 1-skeleton of the quotient, squares drawn as filled clusters.
    pub fn to_dot(&self, pair: Pair<'_>) -> String {
        let mut out = String::from("graph core {\n  node [shape=point];\n");
        let name = |k: &CellKey| format!("\"{k}\"");
        for k in self.upper.iter().filter(|k| k.dim() == 0) {
            let style = if self.lower.contains(k) { "" } else { ", style=dotted" };
            let _ = writeln!(out, "  {} [xlabel={}{}];", name(k), name(k), style);
        }
        for k in self.upper.iter().filter(|k| k.dim() == 1) {
            let ends: Vec<CellKey> = pair.faces(k);
            let colour = if k.t1.is_edge() { "black" } else { "blue" };
            let style = if self.lower.contains(k) { "solid" } else { "dotted" };
            let _ = writeln!(out, "  {} -- {} [color={colour}, style={style}];", name(&ends[0]), name(&ends[1]));
        }
        for (i, k) in self.squares().enumerate() {
            let corners: Vec<CellKey> = pair.faces(k).into_iter().filter(|f| f.dim() == 0).collect();
            let _ = writeln!(out, "  subgraph cluster_sq{i} {{ style=filled; color=lightgrey; label={};", name(k));
            for c in corners {
                let _ = writeln!(out, "    {};", name(&c));
            }
            out.push_str("  }\n");
        }
        for d in &self.diagonals {
            let _ = writeln!(out, "  // diagonal over {} same={}", d.rep, d.same);
        }
        for r in &self.twice_light {
            let a = pair.key_of(&Cell::V(pair.t1.origin(&r.e1)), &Cell::V(r.from.clone()));
            let b = pair.key_of(&Cell::V(pair.t1.terminus(&r.e1)), &Cell::V(r.to.clone()));
            let _ = writeln!(out, "  {} -- {} [style=dashed, color=red];", name(&a), name(&b));
        }
        out.push_str("}\n");
        out
    }
}

/// Whether the quadrants at `(e1, e2)` are all heavy: certified, refuted by
/// an exact core lacking the square, or undecided.
pub fn scott_crossing(certifier: &Certifier<'_>, e1: &Edge, e2: &Edge, core: Option<&CoreComplex>) -> Tri {
    // Certificates are sound, so a square missing from an exact core can
    // never be certified and the search is skipped.
    if let Some(c) = core.filter(|c| c.is_exact()) {
        let k = certifier.pair.key_of(&Cell::E(e1.clone()), &Cell::E(e2.clone()));
        if !c.upper.contains(&k) {
            return Tri::False;
        }
    }
    if certifier.certify_square(e1, e2) {
        Tri::True
    } else {
        Tri::Unknown
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum CoreEmptiness {
    Nonempty { witness: CellKey, elements: Vec<Word> },
    Unknown,
}

/// A certified cell proves the core nonempty.
pub fn emptiness_check(pair: Pair<'_>, budget: usize, cap: usize) -> Result<CoreEmptiness> {
    if budget == 0 {
        return Ok(CoreEmptiness::Unknown);
    }
    let certifier = Certifier::new(pair, budget);
    let (upper, _) = upper_bound(pair, cap)?;
    for k in &upper {
        if let Some(elements) = certifier.certify_key(k) {
            return Ok(CoreEmptiness::Nonempty { witness: k.clone(), elements });
        }
    }
    Ok(CoreEmptiness::Unknown)
}

/// `(i(T_1, T_2), si(T_1, T_2), si(T_2, T_1))` when the core is exact.
pub fn intersection_numbers(pair: Pair<'_>, core: &CoreComplex) -> (Option<usize>, usize, usize) {
    (core.intersection_number(), strong_intersection(pair.t1, pair.t2), strong_intersection(pair.t2, pair.t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bass_serre::SplittingSpec;
    use crate::word::w;

    fn sp(spec: SplittingSpec, rank: usize) -> Splitting {
        Splitting::new(spec, rank).unwrap()
    }

    fn free_product() -> Splitting {
        sp(SplittingSpec::amalgam("F", &[w("a")], &[w("b")], &[]), 2)
    }

    fn torus_a() -> Splitting {
        sp(SplittingSpec::hnn("Ta", &[w("a"), w("baB")], &[w("a")], w("b")), 2)
    }

    fn torus_b() -> Splitting {
        sp(SplittingSpec::hnn("Tb", &[w("b"), w("abA")], &[w("b")], w("a")), 2)
    }

    fn f3_pair() -> (Splitting, Splitting) {
        (
            sp(SplittingSpec::amalgam("S", &[w("a")], &[w("b"), w("c")], &[]), 3),
            sp(SplittingSpec::amalgam("T", &[w("a"), w("b")], &[w("c")], &[]), 3),
        )
    }

    #[test]
    fn self_pair_is_the_diagonal() {
        let t = free_product();
        let core = compute_core(Pair::new(&t, &t), &CoreOptions::default()).unwrap();
        assert_eq!(core.status, Status::Exact);
        assert_eq!(counts(&core.upper), [2, 0, 0]);
        assert_eq!(core.connected, Some(false));
        assert_eq!(core.twice_light.len(), 1);
        assert_eq!(core.twice_light[0].bridge.len(), 1);
        assert_eq!(core.is_compatible(), Tri::True);
        assert_eq!(core.intersection_number(), Some(0));
    }

    #[test]
    fn torus_pair_has_one_square() {
        let (a, b) = (torus_a(), torus_b());
        let core = compute_core(Pair::new(&a, &b), &CoreOptions::default()).unwrap();
        assert_eq!(core.status, Status::Exact, "{:?} {:?}", core.lower, core.upper);
        assert_eq!(counts(&core.upper)[2], 1);
        assert_eq!(core.is_compatible(), Tri::False);
        assert_eq!(core.connected, Some(true));
        assert!(core.twice_light.is_empty());
    }

    #[test]
    fn f3_pair_is_compatible() {
        let (s, t) = f3_pair();
        let core = compute_core(Pair::new(&s, &t), &CoreOptions::default()).unwrap();
        assert_eq!(core.status, Status::Exact, "{:?} {:?}", core.lower, core.upper);
        assert_eq!(counts(&core.upper), [3, 2, 0]);
        assert_eq!(core.connected, Some(true));
        assert_eq!(core.is_compatible(), Tri::True);
    }

    #[test]
    fn starved_budget_never_exact() {
        let t = free_product();
        let (a, b) = (torus_a(), torus_b());
        let (s, u) = f3_pair();
        let opts = CoreOptions { budget: 0, ..CoreOptions::default() };
        for (x, y) in [(&t, &t), (&a, &b), (&s, &u)] {
            let core = compute_core(Pair::new(x, y), &opts).unwrap();
            assert_eq!(core.status, Status::Bounds);
            assert!(core.lower.is_empty());
            assert_eq!(emptiness_check(Pair::new(x, y), 0, DEFAULT_CAP).unwrap(), CoreEmptiness::Unknown);
        }
    }

    #[test]
    fn swap_symmetry() {
        let t = free_product();
        let (a, b) = (torus_a(), torus_b());
        let (s, u) = f3_pair();
        for (x, y) in [(&t, &t), (&a, &b), (&s, &u)] {
            let p = Pair::new(x, y);
            let c12 = compute_core(p, &CoreOptions::default()).unwrap();
            let c21 = compute_core(p.swapped(), &CoreOptions::default()).unwrap();
            assert_eq!(counts(&c12.upper), counts(&c21.upper));
            let back: CellSet = c21.upper.iter().map(|k| p.swapped().transpose(k)).collect();
            assert_eq!(back, c12.upper);
        }
    }

    #[test]
    fn scott_crossing_examples() {
        let (a, b) = (torus_a(), torus_b());
        let p = Pair::new(&a, &b);
        let core = compute_core(p, &CoreOptions::default()).unwrap();
        let cert = Certifier::new(p, 6);
        assert_eq!(scott_crossing(&cert, &a.base_edge(), &b.base_edge(), Some(&core)), Tri::True);
        let certs = cert.square_certificates(&a.base_edge(), &b.base_edge()).unwrap();
        for c in certs {
            assert!(c.l1 > 0 && c.l2 > 0);
        }

        let t = free_product();
        let p = Pair::new(&t, &t);
        let core = compute_core(p, &CoreOptions::default()).unwrap();
        let cert = Certifier::new(p, 6);
        for g in ["1", "b", "ab", "bA"] {
            let e2 = t.edge(&w(g));
            assert_eq!(scott_crossing(&cert, &t.base_edge(), &e2, Some(&core)), Tri::False);
        }
    }

    #[test]
    fn emptiness_witnesses() {
        let (a, b) = (torus_a(), torus_b());
        let t = free_product();
        for (x, y) in [(&a, &b), (&t, &t), (&a, &t)] {
            match emptiness_check(Pair::new(x, y), 4, DEFAULT_CAP).unwrap() {
                CoreEmptiness::Nonempty { witness, elements } => {
                    assert!(Certifier::new(Pair::new(x, y), 4).certify_key(&witness).is_some());
                    assert!(!elements.is_empty());
                }
                CoreEmptiness::Unknown => panic!("no witness for {} x {}", x.label(), y.label()),
            }
        }
    }

    #[test]
    fn closure_fixed_points() {
        let (a, b) = (torus_a(), torus_b());
        let p = Pair::new(&a, &b);
        assert!(fiber_convex_closure(p, &CellSet::new(), DEFAULT_CAP).unwrap().is_empty());
        let core = compute_core(p, &CoreOptions::default()).unwrap();
        assert_eq!(fiber_convex_closure(p, &core.upper, DEFAULT_CAP).unwrap(), core.upper);
        let (seeds, _) = asymmetric_cells(p);
        let closed = fiber_convex_closure(p, &seeds, DEFAULT_CAP).unwrap();
        assert_eq!(counts(&closed)[2], 1);
    }

    #[test]
    fn json_round_trip() {
        let (a, b) = (torus_a(), torus_b());
        let core = compute_core(Pair::new(&a, &b), &CoreOptions::default()).unwrap();
        let back = CoreComplex::from_json(&core.to_json()).unwrap();
        assert_eq!(back, core);
    }
}
