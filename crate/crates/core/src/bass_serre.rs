//! One-edge splittings of a free group and the geometry of their Bass-Serre trees.
//!
//! Cells are named by canonical left-coset representatives. The single edge
//! orbit is the coset space `F/C`; the edge `gC` has origin `gA` and terminus
//! `g s V`, where for an amalgam `s = 1` and `V = B`, and for an HNN extension
//! `s = t^-1` and `V = A` (so that `t C t^-1 ⊆ A` stabilizes both ends).
//!
//! Paths are computed by multiplying out precomputed paths for the basis
//! letters and cancelling backtracks, which in a tree leaves the geodesic.

use std::fmt;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stallings::{Index, SubgroupGraph, Witness};
use crate::word::{letter_key, letters, random_word, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Amalgam,
    Hnn,
}

/// Input description of a splitting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingSpec {
    pub kind: Kind,
    #[serde(default)]
    pub label: String,
    pub a_gens: Vec<Word>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_gens: Vec<Word>,
    pub c_gens: Vec<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_letter: Option<Word>,
}

impl SplittingSpec {
    pub fn amalgam(label: &str, a: &[Word], b: &[Word], c: &[Word]) -> Self {
        SplittingSpec {
            kind: Kind::Amalgam,
            label: label.to_string(),
            a_gens: a.to_vec(),
            b_gens: b.to_vec(),
            c_gens: c.to_vec(),
            stable_letter: None,
        }
    }

    pub fn hnn(label: &str, a: &[Word], c: &[Word], t: Word) -> Self {
        SplittingSpec {
            kind: Kind::Hnn,
            label: label.to_string(),
            a_gens: a.to_vec(),
            b_gens: Vec::new(),
            c_gens: c.to_vec(),
            stable_letter: Some(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub side: Side,
    pub rep: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub rep: Word,
}

/// Orbit type of a tree cell: the two vertex sides and the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellType {
    A,
    B,
    E,
}

impl CellType {
    pub fn is_edge(self) -> bool {
        self == CellType::E
    }

    pub fn side(self) -> Option<Side> {
        match self {
            CellType::A => Some(Side::A),
            CellType::B => Some(Side::B),
            CellType::E => None,
        }
    }
}

impl From<Side> for CellType {
    fn from(s: Side) -> Self {
        match s {
            Side::A => CellType::A,
            Side::B => CellType::B,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    V(Vertex),
    E(Edge),
}

impl Cell {
    pub fn cell_type(&self) -> CellType {
        match self {
            Cell::V(v) => v.side.into(),
            Cell::E(_) => CellType::E,
        }
    }

    pub fn rep(&self) -> &Word {
        match self {
            Cell::V(v) => &v.rep,
            Cell::E(e) => &e.rep,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::V(v) => v.fmt(f),
            Cell::E(e) => e.fmt(f),
        }
    }
}

/// An edge traversed origin-to-terminus (`forward`) or backwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub edge: Edge,
    pub forward: bool,
}

impl Step {
    pub fn reversed(&self) -> Step {
        Step { edge: self.edge.clone(), forward: !self.forward }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    Origin,
    Terminus,
}

impl Endpoint {
    pub fn opposite(self) -> Endpoint {
        match self {
            Endpoint::Origin => Endpoint::Terminus,
            Endpoint::Terminus => Endpoint::Origin,
        }
    }
}

/// The half-tree cut off by `edge` on the side of `toward`: the direction at the
/// other endpoint that contains `edge`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectionRef {
    pub edge: Edge,
    pub toward: Endpoint,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.rep, self.side)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}C", self.rep)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Asserted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    /// True when no mechanical check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    fn push(&mut self, name: &str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), status, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "splitting {}", self.label)?;
        for c in &self.checks {
            writeln!(f, "  {:<10} {:?} {}", c.name, c.status, c.detail)?;
        }
        Ok(())
    }
}

/// Syllable decomposition `g = x_0 s_1 x_1 ... s_n x_n` read off the geodesic
/// from the base vertex to `g` times the base vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    /// Vertex-group syllables with the side whose conjugate they lie in.
    pub syllables: Vec<(Side, Word)>,
    /// Stable-letter exponents between syllables (HNN only; empty for amalgams).
    pub stable: Vec<i32>,
    pub path: Vec<Step>,
}

impl NormalForm {
    pub fn crossings(&self) -> usize {
        self.path.len()
    }
}

/// Expresses `w` as a product of `gens`.
pub fn express(w: &Word, gens: &[Word], rank: usize) -> Result<Witness> {
    SubgroupGraph::build(rank, gens)
        .membership(w)
        .ok_or_else(|| Error::NotAMember { word: w.clone() })
}

/// A validated splitting with the automata needed to name cells.
#[derive(Clone, Debug)]
pub struct Splitting {
    spec: SplittingSpec,
    rank: usize,
    a: SubgroupGraph,
    v: SubgroupGraph,
    c: SubgroupGraph,
    s: Word,
    letter_paths: Vec<Vec<Step>>,
}

fn check_rank(ws: &[Word], rank: usize) -> Option<&Word> {
    ws.iter().find(|w| w.max_generator() > rank)
}

pub fn validate(spec: &SplittingSpec, rank: usize) -> ValidationReport {
    let mut rep = ValidationReport { label: spec.label.clone(), checks: Vec::new() };
    let all: Vec<Word> = spec
        .a_gens
        .iter()
        .chain(&spec.b_gens)
        .chain(&spec.c_gens)
        .chain(spec.stable_letter.iter())
        .cloned()
        .collect();
    if let Some(bad) = check_rank(&all, rank) {
        rep.push("rank", CheckStatus::Fail, format!("generator {bad} uses a letter beyond rank {rank}"));
        return rep;
    }
    match spec.kind {
        Kind::Amalgam if spec.stable_letter.is_some() => {
            rep.push("shape", CheckStatus::Fail, "amalgam with a stable letter");
            return rep;
        }
        Kind::Hnn if spec.stable_letter.as_ref().is_none_or(Word::is_identity) => {
            rep.push("shape", CheckStatus::Fail, "HNN extension needs a nontrivial stable letter");
            return rep;
        }
        Kind::Hnn if !spec.b_gens.is_empty() => {
            rep.push("shape", CheckStatus::Fail, "HNN extension with B generators");
            return rep;
        }
        _ => rep.push("shape", CheckStatus::Pass, ""),
    }
    let a = SubgroupGraph::build(rank, &spec.a_gens);
    match spec.c_gens.iter().find(|c| !a.contains(c)) {
        Some(c) => rep.push("C<=A", CheckStatus::Fail, format!("generator {c} of C is not in A")),
        None => rep.push("C<=A", CheckStatus::Pass, ""),
    }
    match spec.kind {
        Kind::Amalgam => {
            let b = SubgroupGraph::build(rank, &spec.b_gens);
            match spec.c_gens.iter().find(|c| !b.contains(c)) {
                Some(c) => rep.push("C<=B", CheckStatus::Fail, format!("generator {c} of C is not in B")),
                None => rep.push("C<=B", CheckStatus::Pass, ""),
            }
        }
        Kind::Hnn => {
            let t = spec.stable_letter.as_ref().unwrap();
            match spec.c_gens.iter().find(|c| !a.contains(&t.conjugate(c))) {
                Some(c) => rep.push(
                    "tCT<=A",
                    CheckStatus::Fail,
                    format!("conjugate of C generator {c} by t is not in A"),
                ),
                None => rep.push("tCT<=A", CheckStatus::Pass, ""),
            }
        }
    }
    let gen_set = generating_set(spec);
    match SubgroupGraph::build(rank, &gen_set).index() {
        Index::Finite(1) => rep.push("generates", CheckStatus::Pass, ""),
        _ => rep.push("generates", CheckStatus::Fail, "vertex groups and stable letter do not generate F"),
    }
    if !rep.passed() {
        return rep;
    }
    let sp = Splitting::build_unchecked(spec.clone(), rank);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut bad = None;
    for i in 0..200 {
        let w = random_word(&mut rng, rank, i % 9);
        let nf = sp.normal_form(&w);
        let back = sp.evaluate_normal_form(&nf);
        let fixes = nf.path.is_empty();
        if back != w || fixes != sp.a.contains(&w) {
            bad = Some(w);
            break;
        }
    }
    match bad {
        None => rep.push("injective", CheckStatus::Asserted, "normal forms round-trip on 200 sampled words"),
        Some(w) => rep.push("injective", CheckStatus::Fail, format!("normal form of {w} is inconsistent")),
    }
    rep
}

fn generating_set(spec: &SplittingSpec) -> Vec<Word> {
    let mut g = spec.a_gens.clone();
    match spec.kind {
        Kind::Amalgam => g.extend(spec.b_gens.iter().cloned()),
        Kind::Hnn => g.extend(spec.stable_letter.iter().cloned()),
    }
    g
}

fn push_step(path: &mut Vec<Step>, s: Step) {
    if let Some(top) = path.last() {
        if top.edge == s.edge && top.forward != s.forward {
            path.pop();
            return;
        }
    }
    path.push(s);
}

impl Splitting {
    pub fn new(spec: SplittingSpec, rank: usize) -> Result<Self> {
        let rep = validate(&spec, rank);
        if !rep.passed() {
            let msg = rep
                .checks
                .iter()
                .filter(|c| c.status == CheckStatus::Fail)
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::InvalidSplitting(format!("{}: {msg}", spec.label)));
        }
        Ok(Self::build_unchecked(spec, rank))
    }

    fn build_unchecked(spec: SplittingSpec, rank: usize) -> Self {
        let a = SubgroupGraph::build(rank, &spec.a_gens);
        let c = SubgroupGraph::build(rank, &spec.c_gens);
        let (v, s) = match spec.kind {
            Kind::Amalgam => (SubgroupGraph::build(rank, &spec.b_gens), Word::identity()),
            Kind::Hnn => (a.clone(), spec.stable_letter.as_ref().unwrap().inverse()),
        };
        let mut sp = Splitting { spec, rank, a, v, c, s, letter_paths: Vec::new() };
        sp.letter_paths = letters(rank).map(|x| sp.path_of_letter(x)).collect();
        sp
    }

    /// Path from the base vertex to `x` times the base vertex, via an expression
    /// of `x` in the vertex groups and stable letter.
    fn path_of_letter(&self, x: i32) -> Vec<Step> {
        let gens = generating_set(&self.spec);
        let wit = express(&Word::letter(x), &gens, self.rank).expect("generating set spans F");
        let na = self.spec.a_gens.len();
        let mut prefix = Word::identity();
        let mut path = Vec::new();
        for (i, inv) in wit.factors() {
            let g = if inv { gens[i].inverse() } else { gens[i].clone() };
            if i >= na {
                let local = match self.spec.kind {
                    // b: over the base edge to the B vertex, then back down the edge bC.
                    Kind::Amalgam => vec![
                        Step { edge: self.base_edge(), forward: true },
                        Step { edge: self.edge(&g), forward: false },
                    ],
                    // t: the edge tC ends at the base vertex; t^-1: the base edge leads to t^-1 A.
                    Kind::Hnn if !inv => vec![Step { edge: self.edge(&g), forward: false }],
                    Kind::Hnn => vec![Step { edge: self.base_edge(), forward: true }],
                };
                for st in local {
                    push_step(&mut path, self.act_step(&prefix, &st));
                }
            }
            prefix = prefix.multiply(&g);
        }
        debug_assert_eq!(prefix, Word::letter(x));
        path
    }

    pub fn spec(&self) -> &SplittingSpec {
        &self.spec
    }

    pub fn label(&self) -> &str {
        &self.spec.label
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> Kind {
        self.spec.kind
    }

    pub fn edge_group(&self) -> &SubgroupGraph {
        &self.c
    }

    pub fn side_group(&self, side: Side) -> &SubgroupGraph {
        match side {
            Side::A => &self.a,
            Side::B => &self.v,
        }
    }

    /// Side of the terminus of every edge.
    pub fn terminus_side(&self) -> Side {
        match self.spec.kind {
            Kind::Amalgam => Side::B,
            Kind::Hnn => Side::A,
        }
    }

    /// Cell orbit types present in the tree.
    pub fn cell_types(&self) -> Vec<CellType> {
        match self.spec.kind {
            Kind::Amalgam => vec![CellType::A, CellType::B, CellType::E],
            Kind::Hnn => vec![CellType::A, CellType::E],
        }
    }

    /// Stabilizer of the base cell of the given type.
    pub fn type_group(&self, t: CellType) -> &SubgroupGraph {
        match t {
            CellType::A => &self.a,
            CellType::B => &self.v,
            CellType::E => &self.c,
        }
    }

    /// The element `s` with terminus of the base edge equal to `s` times the base terminus vertex.
    pub fn terminus_shift(&self) -> &Word {
        &self.s
    }

    pub fn cell(&self, t: CellType, g: &Word) -> Cell {
        match t.side() {
            Some(side) => Cell::V(self.vertex(side, g)),
            None => Cell::E(self.edge(g)),
        }
    }

    pub fn base_cell(&self, t: CellType) -> Cell {
        self.cell(t, &Word::identity())
    }

    pub fn act_cell(&self, g: &Word, c: &Cell) -> Cell {
        match c {
            Cell::V(v) => Cell::V(self.act_vertex(g, v)),
            Cell::E(e) => Cell::E(self.act_edge(g, e)),
        }
    }

    pub fn base_vertex(&self) -> Vertex {
        Vertex { side: Side::A, rep: Word::identity() }
    }

    pub fn base_edge(&self) -> Edge {
        Edge { rep: Word::identity() }
    }

    pub fn vertex(&self, side: Side, g: &Word) -> Vertex {
        Vertex { side, rep: self.side_group(side).canonical_coset_rep(g) }
    }

    pub fn edge(&self, g: &Word) -> Edge {
        Edge { rep: self.c.canonical_coset_rep(g) }
    }

    pub fn origin(&self, e: &Edge) -> Vertex {
        self.vertex(Side::A, &e.rep)
    }

    pub fn terminus(&self, e: &Edge) -> Vertex {
        self.vertex(self.terminus_side(), &e.rep.multiply(&self.s))
    }

    pub fn endpoint(&self, e: &Edge, end: Endpoint) -> Vertex {
        match end {
            Endpoint::Origin => self.origin(e),
            Endpoint::Terminus => self.terminus(e),
        }
    }

    pub fn step_source(&self, s: &Step) -> Vertex {
        if s.forward {
            self.origin(&s.edge)
        } else {
            self.terminus(&s.edge)
        }
    }

    pub fn step_target(&self, s: &Step) -> Vertex {
        if s.forward {
            self.terminus(&s.edge)
        } else {
            self.origin(&s.edge)
        }
    }

    pub fn act_vertex(&self, g: &Word, v: &Vertex) -> Vertex {
        self.vertex(v.side, &g.multiply(&v.rep))
    }

    pub fn act_edge(&self, g: &Word, e: &Edge) -> Edge {
        self.edge(&g.multiply(&e.rep))
    }

    pub fn act_step(&self, g: &Word, s: &Step) -> Step {
        Step { edge: self.act_edge(g, &s.edge), forward: s.forward }
    }

    pub fn act_direction(&self, g: &Word, d: &DirectionRef) -> DirectionRef {
        DirectionRef { edge: self.act_edge(g, &d.edge), toward: d.toward }
    }

    /// Stabilizer `g X g^-1` of the vertex `g X`.
    pub fn vertex_stabilizer(&self, v: &Vertex) -> SubgroupGraph {
        self.side_group(v.side).conjugate(&v.rep)
    }

    pub fn edge_stabilizer(&self, e: &Edge) -> SubgroupGraph {
        self.c.conjugate(&e.rep)
    }

    /// Reduced path from the base vertex to `g` times the base vertex.
    pub fn path_to(&self, g: &Word) -> Vec<Step> {
        let mut path = Vec::new();
        let mut prefix = Word::identity();
        for &x in g.letters() {
            for st in &self.letter_paths[letter_key(x) as usize] {
                push_step(&mut path, self.act_step(&prefix, st));
            }
            prefix = prefix.multiply(&Word::letter(x));
        }
        path
    }

    /// Reduced path from the base vertex to `v`.
    fn path_to_vertex(&self, v: &Vertex) -> Vec<Step> {
        let mut p = self.path_to(&v.rep);
        if v.side == Side::B {
            push_step(&mut p, Step { edge: self.edge(&v.rep), forward: true });
        }
        p
    }

    /// The unique reduced edge path from `u` to `v`.
    pub fn geodesic(&self, u: &Vertex, v: &Vertex) -> Vec<Step> {
        // Work in coordinates where u's representative is the identity.
        let uinv = u.rep.inverse();
        let local_v = self.vertex(v.side, &uinv.multiply(&v.rep));
        let mut path = Vec::new();
        if u.side == Side::B {
            path.push(Step { edge: self.base_edge(), forward: false });
        }
        for st in self.path_to_vertex(&local_v) {
            push_step(&mut path, st);
        }
        path.iter().map(|s| self.act_step(&u.rep, s)).collect()
    }

    pub fn distance(&self, u: &Vertex, v: &Vertex) -> usize {
        self.geodesic(u, v).len()
    }

    /// Vertices along the geodesic, both ends included.
    pub fn geodesic_vertices(&self, u: &Vertex, v: &Vertex) -> Vec<Vertex> {
        let mut out = vec![u.clone()];
        for s in self.geodesic(u, v) {
            out.push(self.step_target(&s));
        }
        out
    }

    /// Displacement of the base vertex.
    pub fn displacement(&self, g: &Word) -> usize {
        self.path_to(g).len()
    }

    /// Translation length, via `l(g) = max(0, d(v, g^2 v) - d(v, g v))`.
    pub fn translation_length(&self, g: &Word) -> usize {
        let d1 = self.displacement(g);
        let d2 = self.displacement(&g.multiply(g));
        d2.saturating_sub(d1)
    }

    pub fn is_hyperbolic(&self, g: &Word) -> bool {
        self.translation_length(g) > 0
    }

    /// A vertex on the axis of `g` and the `l(g)` edges from it to its translate.
    pub fn axis_segment(&self, g: &Word) -> Result<(Vertex, Vec<Step>)> {
        let l = self.translation_length(g);
        if l == 0 {
            return Err(Error::Elliptic { word: g.clone() });
        }
        let base = self.base_vertex();
        let path = self.path_to(g);
        let depth = (path.len() - l) / 2;
        let anchor = if depth == 0 { base } else { self.step_target(&path[depth - 1]) };
        let period = path[depth..depth + l].to_vec();
        Ok((anchor, period))
    }

    /// Distance from `v` to the axis of a hyperbolic `g`.
    pub fn distance_to_axis(&self, g: &Word, v: &Vertex) -> Result<usize> {
        let l = self.translation_length(g);
        if l == 0 {
            return Err(Error::Elliptic { word: g.clone() });
        }
        let d = self.distance(v, &self.act_vertex(g, v));
        Ok((d - l) / 2)
    }

    /// The fixed vertex of an elliptic `g` nearest to `v`: the midpoint of `[v, g v]`.
    pub fn nearest_fixed_vertex(&self, g: &Word, v: &Vertex) -> Option<Vertex> {
        if self.is_hyperbolic(g) {
            return None;
        }
        let verts = self.geodesic_vertices(v, &self.act_vertex(g, v));
        Some(verts[verts.len() / 2].clone())
    }

    /// Whether the vertex lies in the half-tree `d`.
    pub fn vertex_in_direction(&self, v: &Vertex, d: &DirectionRef) -> bool {
        let near = self.endpoint(&d.edge, d.toward);
        let far = self.endpoint(&d.edge, d.toward.opposite());
        self.distance(v, &near) < self.distance(v, &far)
    }

    pub fn edge_in_direction(&self, e: &Edge, d: &DirectionRef) -> bool {
        *e == d.edge || (self.vertex_in_direction(&self.origin(e), d) && self.vertex_in_direction(&self.terminus(e), d))
    }

    /// Whether the attracting end of a hyperbolic `h` lies in the half-tree `d`.
    pub fn end_in_direction(&self, h: &Word, d: &DirectionRef) -> Result<bool> {
        let (anchor, period) = self.axis_segment(h)?;
        let l = period.len();
        let base = self.endpoint(&d.edge, d.toward.opposite());
        let reach = 2 * self.distance(&anchor, &base) + 2;
        let k = reach / l + 1;
        let hk = h.pow(k as i64);
        Ok(self.vertex_in_direction(&self.act_vertex(&hk, &anchor), d))
    }

    pub fn normal_form(&self, g: &Word) -> NormalForm {
        let path = self.path_to(g);
        let mut syllables = Vec::new();
        let mut stable = Vec::new();
        let mut p = Word::identity();
        let mut side = Side::A;
        let tau = self.terminus_side();
        for st in &path {
            let f = &st.edge.rep;
            if st.forward {
                syllables.push((Side::A, p.inverse().multiply(f)));
                p = f.multiply(&self.s);
                side = tau;
            } else {
                let fs = f.multiply(&self.s);
                syllables.push((tau, p.inverse().multiply(&fs)));
                p = f.clone();
                side = Side::A;
            }
            if self.spec.kind == Kind::Hnn {
                stable.push(if st.forward { -1 } else { 1 });
            }
        }
        syllables.push((side, p.inverse().multiply(g)));
        NormalForm { syllables, stable, path }
    }

    pub fn evaluate_normal_form(&self, nf: &NormalForm) -> Word {
        let t = self.spec.stable_letter.clone().unwrap_or_default();
        let mut out = Word::identity();
        for (i, (_, x)) in nf.syllables.iter().enumerate() {
            out = out.multiply(x);
            if let Some(&e) = nf.stable.get(i) {
                out = out.multiply(&t.pow(e as i64));
            }
        }
        out
    }
}
