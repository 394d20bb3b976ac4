//! Closed walks, balance checks, and the exhaustive counting oracle.
//!
//! A labeling is balanced when the ordered product of its values along every
//! closed walk is the identity. A closed walk never uses the same edge use
//! twice; in flexible mode an edge `e` and its reversal `ē` are different
//! uses, and `ē` carries the inverse of the label on `e`. Rigid mode only has
//! forward uses.
//!
//! Nothing here relies on the closed-form counts. The walk family is the full
//! set of edge-use-distinct closed walks, not a cycle basis, so the oracle is
//! sound for non-Abelian groups.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digraph::Digraph;
use crate::group::{ElementIndex, FiniteGroup};

/// Default limit on the number of candidate labelings the oracle may visit.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Edges may be walked against their direction.
    Flexible,
    /// Edges may only be walked along their direction.
    Rigid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Labels on edges only.
    Edges,
    /// Labels on vertices and edges.
    Full,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Flexible => "flexible",
            Mode::Rigid => "rigid",
        })
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Edges => "edges",
            Target::Full => "full",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flexible" => Ok(Mode::Flexible),
            "rigid" => Ok(Mode::Rigid),
            _ => Err(format!("unknown mode `{s}` (expected flexible or rigid)")),
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edges" => Ok(Target::Edges),
            "full" => Ok(Target::Full),
            _ => Err(format!("unknown target `{s}` (expected edges or full)")),
        }
    }
}

/// One traversal of an edge, with or against its direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeUse {
    pub edge: usize,
    pub reversed: bool,
}

impl EdgeUse {
    pub fn forward(edge: usize) -> Self {
        EdgeUse {
            edge,
            reversed: false,
        }
    }

    pub fn backward(edge: usize) -> Self {
        EdgeUse {
            edge,
            reversed: true,
        }
    }

    /// Dense id: `2·edge + reversed`.
    #[inline]
    pub fn key(self) -> usize {
        2 * self.edge + usize::from(self.reversed)
    }

    pub fn tail(self, d: &Digraph) -> usize {
        let e = d.edge(self.edge);
        if self.reversed {
            e.endpoint
        } else {
            e.origin
        }
    }

    pub fn head(self, d: &Digraph) -> usize {
        let e = d.edge(self.edge);
        if self.reversed {
            e.origin
        } else {
            e.endpoint
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub vertex: usize,
    pub edge: EdgeUse,
}

/// `v₁, e₁, …, vₙ, eₙ` with `eₙ` returning to `v₁`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ClosedWalk {
    pub steps: Vec<Step>,
}

impl ClosedWalk {
    pub fn new(steps: Vec<Step>) -> Self {
        ClosedWalk { steps }
    }

    /// Builds a walk from a start vertex and a sequence of edge uses.
    pub fn from_uses(d: &Digraph, start: usize, uses: &[EdgeUse]) -> Self {
        let mut vertex = start;
        let steps = uses
            .iter()
            .map(|&u| {
                let step = Step { vertex, edge: u };
                if u.edge < d.n_edges() {
                    vertex = u.head(d);
                }
                step
            })
            .collect();
        ClosedWalk { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn visits(&self, v: usize) -> bool {
        self.steps.iter().any(|s| s.vertex == v)
    }

    /// Checks incidence, distinctness of edge uses, and the mode restriction.
    pub fn validate(&self, d: &Digraph, mode: Mode) -> Result<(), WalkError> {
        let n = self.steps.len();
        let mut used = vec![false; 2 * d.n_edges()];
        for (i, s) in self.steps.iter().enumerate() {
            if s.edge.edge >= d.n_edges() {
                return Err(WalkError::UnknownEdge {
                    step: i,
                    edge: s.edge.edge,
                });
            }
            if s.vertex >= d.n_vertices() {
                return Err(WalkError::UnknownVertex {
                    step: i,
                    vertex: s.vertex,
                });
            }
            if mode == Mode::Rigid && s.edge.reversed {
                return Err(WalkError::ReversedInRigid { step: i });
            }
            if std::mem::replace(&mut used[s.edge.key()], true) {
                return Err(WalkError::RepeatedEdgeUse { step: i });
            }
            let next = self.steps[(i + 1) % n].vertex;
            if s.edge.tail(d) != s.vertex || s.edge.head(d) != next {
                return Err(WalkError::Incidence { step: i });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error("step {step}: edge use does not connect consecutive walk vertices")]
    Incidence { step: usize },
    #[error("step {step}: edge use repeats an earlier one")]
    RepeatedEdgeUse { step: usize },
    #[error("step {step}: reversed edge use in a rigid walk")]
    ReversedInRigid { step: usize },
    #[error("step {step}: no edge {edge}")]
    UnknownEdge { step: usize, edge: usize },
    #[error("step {step}: no vertex {vertex}")]
    UnknownVertex { step: usize, vertex: usize },
}

/// Values on edges. In flexible mode the value on `ē` is the inverse of the
/// stored value and is never stored itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeLabeling {
    pub values: Vec<ElementIndex>,
    pub mode: Mode,
}

impl EdgeLabeling {
    pub fn identity(g: &FiniteGroup, d: &Digraph, mode: Mode) -> Self {
        EdgeLabeling {
            values: vec![g.identity(); d.n_edges()],
            mode,
        }
    }

    /// Value carried by one edge use.
    pub fn along(&self, g: &FiniteGroup, u: EdgeUse) -> ElementIndex {
        let v = self.values[u.edge];
        if u.reversed {
            g.inv(v)
        } else {
            v
        }
    }
}

/// Values on vertices and edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullLabeling {
    pub vertex_values: Vec<ElementIndex>,
    pub edge_values: Vec<ElementIndex>,
    pub mode: Mode,
}

impl FullLabeling {
    pub fn identity(g: &FiniteGroup, d: &Digraph, mode: Mode) -> Self {
        FullLabeling {
            vertex_values: vec![g.identity(); d.n_vertices()],
            edge_values: vec![g.identity(); d.n_edges()],
            mode,
        }
    }

    pub fn along(&self, g: &FiniteGroup, u: EdgeUse) -> ElementIndex {
        let v = self.edge_values[u.edge];
        if u.reversed {
            g.inv(v)
        } else {
            v
        }
    }
}

/// `f(e₁)·f(e₂)⋯f(eₙ)`; the empty walk gives the identity.
pub fn walk_product_edges(
    g: &FiniteGroup,
    d: &Digraph,
    f: &EdgeLabeling,
    w: &ClosedWalk,
) -> Result<ElementIndex, WalkError> {
    w.validate(d, f.mode)?;
    Ok(g.product(w.steps.iter().map(|s| f.along(g, s.edge))))
}

/// `h(v₁)·h(e₁)·h(v₂)·h(e₂)⋯h(vₙ)·h(eₙ)`; the empty walk gives the identity.
pub fn walk_product_full(
    g: &FiniteGroup,
    d: &Digraph,
    h: &FullLabeling,
    w: &ClosedWalk,
) -> Result<ElementIndex, WalkError> {
    w.validate(d, h.mode)?;
    Ok(g.product(
        w.steps
            .iter()
            .flat_map(|s| [h.vertex_values[s.vertex], h.along(g, s.edge)]),
    ))
}

/// Edge uses leaving each vertex, sorted by key.
fn outgoing_uses(d: &Digraph, mode: Mode) -> Vec<Vec<EdgeUse>> {
    let mut out = vec![Vec::new(); d.n_vertices()];
    for (id, e) in d.edges().iter().enumerate() {
        out[e.origin].push(EdgeUse::forward(id));
        if mode == Mode::Flexible {
            out[e.endpoint].push(EdgeUse::backward(id));
        }
    }
    for uses in &mut out {
        uses.sort_by_key(|u| u.key());
    }
    out
}

/// Lazily enumerates every non-empty edge-use-distinct closed walk.
///
/// Rotations of one cyclic sequence are reported once, starting at the step
/// with the smallest `(vertex, edge use)` pair. A walk and its reversal are
/// different walks. With `base`, only walks visiting that vertex are kept.
pub struct ClosedWalks<'a> {
    d: &'a Digraph,
    out: Vec<Vec<EdgeUse>>,
    starts: Vec<(usize, EdgeUse)>,
    next_start: usize,
    base: Option<usize>,
    steps: Vec<Step>,
    cursors: Vec<usize>,
    used: Vec<bool>,
}

pub fn all_closed_walks(d: &Digraph, mode: Mode, base: Option<usize>) -> ClosedWalks<'_> {
    let out = outgoing_uses(d, mode);
    let starts = out
        .iter()
        .enumerate()
        .flat_map(|(v, uses)| uses.iter().map(move |&u| (v, u)))
        .collect();
    ClosedWalks {
        d,
        out,
        starts,
        next_start: 0,
        base,
        steps: Vec::new(),
        cursors: Vec::new(),
        used: vec![false; 2 * d.n_edges()],
    }
}

impl ClosedWalks<'_> {
    fn closes(&self) -> Option<ClosedWalk> {
        let start = self.steps[0].vertex;
        let last = self.steps.last().unwrap();
        if last.edge.head(self.d) != start {
            return None;
        }
        let walk = ClosedWalk::new(self.steps.clone());
        match self.base {
            Some(b) if !walk.visits(b) => None,
            _ => Some(walk),
        }
    }

    fn push(&mut self, step: Step) {
        self.used[step.edge.key()] = true;
        self.steps.push(step);
        self.cursors.push(0);
    }
}

impl Iterator for ClosedWalks<'_> {
    type Item = ClosedWalk;

    fn next(&mut self) -> Option<ClosedWalk> {
        loop {
            if self.steps.is_empty() {
                let &(v, u) = self.starts.get(self.next_start)?;
                self.next_start += 1;
                self.push(Step { vertex: v, edge: u });
                if let Some(w) = self.closes() {
                    return Some(w);
                }
                continue;
            }
            let first = self.steps[0];
            let floor = (first.vertex, first.edge.key());
            let here = self.steps.last().unwrap().edge.head(self.d);
            let depth = self.steps.len() - 1;
            let candidates = &self.out[here];
            let found = (self.cursors[depth]..candidates.len()).find(|&i| {
                let u = candidates[i];
                !self.used[u.key()] && (here, u.key()) > floor
            });
            match found {
                Some(i) => {
                    self.cursors[depth] = i + 1;
                    let u = candidates[i];
                    self.push(Step {
                        vertex: here,
                        edge: u,
                    });
                    if let Some(w) = self.closes() {
                        return Some(w);
                    }
                }
                None => {
                    let s = self.steps.pop().unwrap();
                    self.cursors.pop();
                    self.used[s.edge.key()] = false;
                }
            }
        }
    }
}

/// Which values a compiled walk reads: edge labels only, or vertex and edge
/// labels laid out as `[vertices..., edges...]`.
#[derive(Debug, Clone)]
pub struct BalanceChecker {
    mode: Mode,
    n_vertices: usize,
    n_edges: usize,
    walks: Vec<ClosedWalk>,
}

impl BalanceChecker {
    /// Enumerates the walk family once; shortest walks are tried first.
    pub fn new(d: &Digraph, mode: Mode) -> Self {
        let mut walks: Vec<ClosedWalk> = all_closed_walks(d, mode, None).collect();
        walks.sort_by_key(ClosedWalk::len);
        BalanceChecker {
            mode,
            n_vertices: d.n_vertices(),
            n_edges: d.n_edges(),
            walks,
        }
    }

    pub fn walks(&self) -> &[ClosedWalk] {
        &self.walks
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Walks as `(slot, inverted)` sequences over the slot layout of `target`.
    fn compile(&self, target: Target) -> CompiledWalks {
        let offset = match target {
            Target::Edges => 0,
            Target::Full => self.n_vertices,
        };
        let mut ops = Vec::new();
        let mut bounds = vec![0];
        for w in &self.walks {
            for s in &w.steps {
                if target == Target::Full {
                    ops.push((s.vertex as u32, false));
                }
                ops.push(((offset + s.edge.edge) as u32, s.edge.reversed));
            }
            bounds.push(ops.len());
        }
        CompiledWalks { ops, bounds }
    }

    /// First walk whose product is not the identity.
    pub fn first_violation_edges(&self, g: &FiniteGroup, f: &EdgeLabeling) -> Option<&ClosedWalk> {
        assert_eq!(f.values.len(), self.n_edges, "labeling length != |E|");
        self.walks
            .iter()
            .find(|w| g.product(w.steps.iter().map(|s| f.along(g, s.edge))) != g.identity())
    }

    pub fn first_violation_full(&self, g: &FiniteGroup, h: &FullLabeling) -> Option<&ClosedWalk> {
        assert_eq!(
            h.vertex_values.len(),
            self.n_vertices,
            "labeling length != |V|"
        );
        assert_eq!(h.edge_values.len(), self.n_edges, "labeling length != |E|");
        self.walks.iter().find(|w| {
            g.product(
                w.steps
                    .iter()
                    .flat_map(|s| [h.vertex_values[s.vertex], h.along(g, s.edge)]),
            ) != g.identity()
        })
    }

    pub fn edges_balanced(&self, g: &FiniteGroup, f: &EdgeLabeling) -> bool {
        self.first_violation_edges(g, f).is_none()
    }

    pub fn full_balanced(&self, g: &FiniteGroup, h: &FullLabeling) -> bool {
        self.first_violation_full(g, h).is_none()
    }
}

struct CompiledWalks {
    ops: Vec<(u32, bool)>,
    bounds: Vec<usize>,
}

impl CompiledWalks {
    fn accepts(&self, g: &FiniteGroup, slots: &[ElementIndex]) -> bool {
        self.bounds.windows(2).all(|b| {
            let mut acc = g.identity();
            for &(slot, inverted) in &self.ops[b[0]..b[1]] {
                let x = slots[slot as usize];
                acc = g.mul(acc, if inverted { g.inv(x) } else { x });
            }
            acc == g.identity()
        })
    }
}

/// Panics if the labeling lengths do not match the graph.
pub fn is_balanced_edges(g: &FiniteGroup, d: &Digraph, f: &EdgeLabeling) -> bool {
    BalanceChecker::new(d, f.mode).edges_balanced(g, f)
}

/// Panics if the labeling lengths do not match the graph.
pub fn is_balanced_full(g: &FiniteGroup, d: &Digraph, h: &FullLabeling) -> bool {
    BalanceChecker::new(d, h.mode).full_balanced(g, h)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {required} candidate labelings required, budget is {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },
}

/// Number of labeled slots for a target: `|E|` or `|V| + |E|`.
pub fn slot_count(d: &Digraph, target: Target) -> usize {
    match target {
        Target::Edges => d.n_edges(),
        Target::Full => d.n_vertices() + d.n_edges(),
    }
}

/// Candidate labelings the oracle would visit: `|G|^slots`.
pub fn candidate_count(g: &FiniteGroup, d: &Digraph, target: Target) -> BigUint {
    BigUint::from(g.order()).pow(slot_count(d, target) as u32)
}

const CHUNK: u64 = 1 << 12;

/// Exhaustive search over every labeling of the target's slots.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub budget: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            budget: DEFAULT_ORACLE_BUDGET,
        }
    }
}

impl Oracle {
    pub fn with_budget(budget: u64) -> Self {
        Oracle { budget }
    }

    fn candidates(&self, g: &FiniteGroup, d: &Digraph, target: Target) -> Result<u64, OracleError> {
        let required = candidate_count(g, d, target);
        match required.to_u64() {
            Some(n) if n <= self.budget => Ok(n),
            _ => Err(OracleError::BudgetExceeded {
                required,
                budget: self.budget,
            }),
        }
    }

    /// Number of balanced labelings. Chunks of the candidate space are
    /// searched in parallel and summed exactly.
    pub fn count(
        &self,
        g: &FiniteGroup,
        d: &Digraph,
        target: Target,
        mode: Mode,
    ) -> Result<BigUint, OracleError> {
        let total = self.candidates(g, d, target)?;
        let compiled = BalanceChecker::new(d, mode).compile(target);
        let slots = slot_count(d, target);
        let chunks = total.div_ceil(CHUNK);
        let sum: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hits = 0u64;
                scan_chunk(
                    g,
                    slots,
                    c * CHUNK,
                    ((c + 1) * CHUNK).min(total),
                    |values| {
                        if compiled.accepts(g, values) {
                            hits += 1;
                        }
                    },
                );
                hits
            })
            .sum();
        Ok(BigUint::from(sum))
    }

    /// Every balanced labeling as a slot vector (vertices first for `Full`),
    /// in lexicographic order.
    pub fn accepted(
        &self,
        g: &FiniteGroup,
        d: &Digraph,
        target: Target,
        mode: Mode,
    ) -> Result<Vec<Vec<ElementIndex>>, OracleError> {
        let total = self.candidates(g, d, target)?;
        let compiled = BalanceChecker::new(d, mode).compile(target);
        let slots = slot_count(d, target);
        let chunks = total.div_ceil(CHUNK);
        let found: Vec<Vec<Vec<ElementIndex>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hits = Vec::new();
                scan_chunk(
                    g,
                    slots,
                    c * CHUNK,
                    ((c + 1) * CHUNK).min(total),
                    |values| {
                        if compiled.accepts(g, values) {
                            hits.push(values.to_vec());
                        }
                    },
                );
                hits
            })
            .collect();
        Ok(found.into_iter().flatten().collect())
    }
}

/// Visits candidates `from..to` in mixed-radix order, slot 0 most significant.
fn scan_chunk(
    g: &FiniteGroup,
    slots: usize,
    from: u64,
    to: u64,
    mut visit: impl FnMut(&[ElementIndex]),
) {
    if from >= to {
        return;
    }
    let base = g.order() as u64;
    let mut digits = vec![ElementIndex(0); slots];
    let mut rest = from;
    for d in digits.iter_mut().rev() {
        *d = ElementIndex((rest % base) as u32);
        rest /= base;
    }
    for _ in from..to {
        visit(&digits);
        for d in digits.iter_mut().rev() {
            d.0 += 1;
            if u64::from(d.0) < base {
                break;
            }
            d.0 = 0;
        }
    }
}

/// Exact number of balanced labelings by exhaustive enumeration.
pub fn brute_force_count(
    g: &FiniteGroup,
    d: &Digraph,
    target: Target,
    mode: Mode,
    budget: u64,
) -> Result<BigUint, OracleError> {
    Oracle::with_budget(budget).count(g, d, target, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::load_graph;
    use crate::group::make_group;
    use proptest::prelude::*;

    const NO_SHARED_CYCLE: &str = "n=4\n0 1\n3 1\n2 0\n2 3\n1 2\n";

    fn s3() -> FiniteGroup {
        make_group("symmetric:3").unwrap()
    }

    fn el(g: &FiniteGroup, name: &str) -> ElementIndex {
        g.element_by_name(name).unwrap()
    }

    fn triangle() -> Digraph {
        load_graph("0 1\n1 2\n2 0\n").unwrap()
    }

    #[test]
    fn empty_walk_is_identity() {
        let g = s3();
        let d = triangle();
        let f = EdgeLabeling {
            values: vec![el(&g, "213"); 3],
            mode: Mode::Flexible,
        };
        let w = ClosedWalk::default();
        assert_eq!(walk_product_edges(&g, &d, &f, &w).unwrap(), g.identity());
        let h = FullLabeling {
            vertex_values: vec![el(&g, "231"); 3],
            edge_values: vec![el(&g, "213"); 3],
            mode: Mode::Flexible,
        };
        assert_eq!(walk_product_full(&g, &d, &h, &w).unwrap(), g.identity());
    }

    #[test]
    fn out_and_back_cancels() {
        let g = s3();
        let d = load_graph("0 1").unwrap();
        let p = el(&g, "231");
        let f = EdgeLabeling {
            values: vec![p],
            mode: Mode::Flexible,
        };
        let w = ClosedWalk::from_uses(&d, 0, &[EdgeUse::forward(0), EdgeUse::backward(0)]);
        assert_eq!(walk_product_edges(&g, &d, &f, &w).unwrap(), g.identity());
    }

    #[test]
    fn triangle_with_closing_label() {
        let g = s3();
        let d = triangle();
        let (x, y) = (el(&g, "213"), el(&g, "132"));
        let z = g.inv(g.mul(x, y));
        let f = EdgeLabeling {
            values: vec![x, y, z],
            mode: Mode::Flexible,
        };
        let w = ClosedWalk::from_uses(&d, 0, &[0, 1, 2].map(EdgeUse::forward));
        assert_eq!(walk_product_edges(&g, &d, &f, &w).unwrap(), g.identity());
        assert!(is_balanced_edges(&g, &d, &f));
        let bad = EdgeLabeling {
            values: vec![x, y, x],
            mode: Mode::Flexible,
        };
        assert!(!is_balanced_edges(&g, &d, &bad));
    }

    #[test]
    fn out_and_back_full_is_apbp_inverse() {
        let g = s3();
        let d = load_graph("0 1").unwrap();
        let w = ClosedWalk::from_uses(&d, 0, &[EdgeUse::forward(0), EdgeUse::backward(0)]);
        for a in g.elements() {
            for p in g.elements() {
                for b in g.elements() {
                    let h = FullLabeling {
                        vertex_values: vec![a, b],
                        edge_values: vec![p],
                        mode: Mode::Flexible,
                    };
                    let got = walk_product_full(&g, &d, &h, &w).unwrap();
                    let expected = g.product([a, p, b, g.inv(p)]);
                    assert_eq!(got, expected);
                    assert_eq!(got == g.identity(), g.product([a, p, b]) == p);
                    assert_eq!(is_balanced_full(&g, &d, &h), g.product([a, p, b]) == p);
                }
            }
        }
    }

    #[test]
    fn constructed_triangle_full_labeling_is_balanced() {
        let g = s3();
        let d = triangle();
        let a = el(&g, "213");
        let (x, y) = (el(&g, "321"), el(&g, "132"));
        let z = g.inv(g.mul(x, y));
        let xi = g.inv(x);
        let yi = g.inv(y);
        let v1 = g.product([xi, a, x]);
        let v2 = g.product([yi, xi, a, x, y]);
        let h = FullLabeling {
            vertex_values: vec![a, v1, v2],
            edge_values: vec![
                g.mul(a, x),
                g.product([xi, a, x, y]),
                g.product([yi, xi, a, x, y, z]),
            ],
            mode: Mode::Flexible,
        };
        let w = ClosedWalk::from_uses(&d, 0, &[0, 1, 2].map(EdgeUse::forward));
        assert_eq!(walk_product_full(&g, &d, &h, &w).unwrap(), g.identity());
        assert!(is_balanced_full(&g, &d, &h));
    }

    #[test]
    fn walk_errors() {
        let d = triangle();
        let skip = ClosedWalk::new(vec![
            Step {
                vertex: 0,
                edge: EdgeUse::forward(0),
            },
            Step {
                vertex: 2,
                edge: EdgeUse::forward(2),
            },
        ]);
        assert_eq!(
            skip.validate(&d, Mode::Flexible),
            Err(WalkError::Incidence { step: 0 })
        );
        let repeat = ClosedWalk::from_uses(&d, 0, &[EdgeUse::forward(0), EdgeUse::forward(0)]);
        assert!(repeat.validate(&d, Mode::Flexible).is_err());
        let back = ClosedWalk::from_uses(&d, 0, &[EdgeUse::forward(0), EdgeUse::backward(0)]);
        assert_eq!(
            back.validate(&d, Mode::Rigid),
            Err(WalkError::ReversedInRigid { step: 1 })
        );
        assert!(back.validate(&d, Mode::Flexible).is_ok());
        let loops = load_graph("n=1\n0 0\n").unwrap();
        let twice = ClosedWalk::from_uses(&loops, 0, &[EdgeUse::forward(0), EdgeUse::forward(0)]);
        assert_eq!(
            twice.validate(&loops, Mode::Rigid),
            Err(WalkError::RepeatedEdgeUse { step: 1 })
        );
    }

    #[test]
    fn closed_walk_enumeration_small_cases() {
        let single = load_graph("n=1").unwrap();
        assert_eq!(all_closed_walks(&single, Mode::Flexible, None).count(), 0);

        let looped = load_graph("n=1\n0 0\n").unwrap();
        let rigid: Vec<_> = all_closed_walks(&looped, Mode::Rigid, None).collect();
        assert_eq!(
            rigid,
            vec![ClosedWalk::from_uses(&looped, 0, &[EdgeUse::forward(0)])]
        );
        // e, ē, and the two-step walk (rotations identified)
        assert_eq!(all_closed_walks(&looped, Mode::Flexible, None).count(), 3);

        // a single arrow: e ē (and its rotation ē e is the same walk)
        let arrow = load_graph("0 1").unwrap();
        assert_eq!(all_closed_walks(&arrow, Mode::Flexible, None).count(), 1);
        assert_eq!(all_closed_walks(&arrow, Mode::Rigid, None).count(), 0);

        // directed triangle, rigid: only the 3-cycle
        assert_eq!(all_closed_walks(&triangle(), Mode::Rigid, None).count(), 1);
    }

    #[test]
    fn walks_are_valid_and_unique_up_to_rotation() {
        let d = load_graph("n=3\n0 1\n1 2\n2 0\n1 1\n").unwrap();
        for mode in [Mode::Flexible, Mode::Rigid] {
            let walks: Vec<_> = all_closed_walks(&d, mode, None).collect();
            let mut canon = std::collections::HashSet::new();
            for w in &walks {
                w.validate(&d, mode).unwrap();
                let n = w.len();
                let rot = (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|i| {
                                let s = w.steps[(r + i) % n];
                                (s.vertex, s.edge.key())
                            })
                            .collect::<Vec<_>>()
                    })
                    .min()
                    .unwrap();
                assert!(canon.insert(rot), "rotation reported twice");
            }
        }
    }

    #[test]
    fn base_filter_keeps_walks_through_base() {
        let d = load_graph(NO_SHARED_CYCLE).unwrap();
        let all = all_closed_walks(&d, Mode::Rigid, None).count();
        let through_y = all_closed_walks(&d, Mode::Rigid, Some(3)).count();
        assert_eq!(all, 2);
        assert_eq!(through_y, 1);
    }

    #[test]
    fn no_rigid_walk_joins_x_and_y() {
        let d = load_graph(NO_SHARED_CYCLE).unwrap();
        let walks: Vec<_> = all_closed_walks(&d, Mode::Rigid, None).collect();
        assert!(!walks.is_empty());
        assert!(walks.iter().all(|w| !(w.visits(0) && w.visits(3))));
    }

    #[test]
    fn balance_examples() {
        let g = s3();
        let d = triangle();
        assert!(is_balanced_edges(
            &g,
            &d,
            &EdgeLabeling::identity(&g, &d, Mode::Flexible)
        ));
        assert!(is_balanced_full(
            &g,
            &d,
            &FullLabeling::identity(&g, &d, Mode::Rigid)
        ));

        let looped = load_graph("n=1\n0 0\n").unwrap();
        let f = EdgeLabeling {
            values: vec![el(&g, "213")],
            mode: Mode::Flexible,
        };
        assert!(!is_balanced_edges(&g, &looped, &f));

        let single = load_graph("n=1").unwrap();
        for a in g.elements() {
            let h = FullLabeling {
                vertex_values: vec![a],
                edge_values: vec![],
                mode: Mode::Flexible,
            };
            assert!(is_balanced_full(&g, &single, &h));
        }
    }

    #[test]
    fn parallel_edges_need_equal_labels() {
        let g = s3();
        let d = load_graph("0 1\n0 1\n").unwrap();
        for p in g.elements() {
            for q in g.elements() {
                let f = EdgeLabeling {
                    values: vec![p, q],
                    mode: Mode::Flexible,
                };
                assert_eq!(is_balanced_edges(&g, &d, &f), p == q);
            }
        }
    }

    #[test]
    fn oracle_small_counts() {
        let z2 = make_group("cyclic:2").unwrap();
        let single = load_graph("n=1").unwrap();
        for spec in ["cyclic:1", "cyclic:3", "symmetric:3"] {
            let g = make_group(spec).unwrap();
            let n = brute_force_count(&g, &single, Target::Edges, Mode::Flexible, 10).unwrap();
            assert_eq!(n, BigUint::from(1u32));
        }
        let t = triangle();
        let count =
            |target, mode| brute_force_count(&z2, &t, target, mode, DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(count(Target::Edges, Mode::Flexible), BigUint::from(4u32));
        assert_eq!(count(Target::Full, Mode::Flexible), BigUint::from(8u32));
    }

    #[test]
    fn oracle_budget_guard() {
        let g = s3();
        let d = triangle();
        let err = brute_force_count(&g, &d, Target::Full, Mode::Flexible, 1000).unwrap_err();
        assert_eq!(
            err,
            OracleError::BudgetExceeded {
                required: BigUint::from(46656u32),
                budget: 1000
            }
        );
        assert!(err.to_string().contains("46656"));
    }

    #[test]
    fn oracle_accepted_matches_count_and_checker() {
        let g = make_group("cyclic:3").unwrap();
        let d = load_graph("0 1\n1 0\n1 1\n").unwrap();
        let o = Oracle::default();
        for target in [Target::Edges, Target::Full] {
            for mode in [Mode::Flexible, Mode::Rigid] {
                let acc = o.accepted(&g, &d, target, mode).unwrap();
                assert_eq!(
                    BigUint::from(acc.len()),
                    o.count(&g, &d, target, mode).unwrap()
                );
                let mut sorted = acc.clone();
                sorted.sort();
                assert_eq!(sorted, acc);
            }
        }
    }

    proptest! {
        #[test]
        fn reversing_an_edge_with_inverted_label_keeps_balance(
            edges in prop::collection::vec((0usize..3, 0usize..3), 1..4),
            labels in prop::collection::vec(0u32..6, 4),
            flip in 0usize..4,
        ) {
            let g = s3();
            let d = Digraph::new(3, &edges).unwrap();
            let flip = flip % edges.len();
            let f = EdgeLabeling {
                values: labels[..edges.len()].iter().map(|&x| ElementIndex(x)).collect(),
                mode: Mode::Flexible,
            };
            let mut f2 = f.clone();
            f2.values[flip] = g.inv(f.values[flip]);
            let d2 = d.with_edge_reversed(flip);
            prop_assert_eq!(is_balanced_edges(&g, &d, &f), is_balanced_edges(&g, &d2, &f2));
        }
    }
}
