//! Closed-form counts and the constructive bijections behind them.
//!
//! Every balanced labeling corresponds to a tuple of free coordinates:
//!
//! | target, mode      | free coordinates                                          | count                |
//! |-------------------|-----------------------------------------------------------|----------------------|
//! | edges, flexible   | potential on every non-base vertex                        | `|G|^(|V|-1)`        |
//! | full, flexible    | `a = h(base)` (any element if bipartite, else an involution), then the potential | `|G|^|V|` or `|G₂|·|G|^(|V|-1)` |
//! | edges, rigid      | potential on every vertex that is not the base of its SCC, then each cross-SCC edge | `|G|^(|V|-k+r)` |
//! | full, rigid       | every vertex value, then the rigid edge coordinates       | `|G|^(2|V|-k+r)`     |
//!
//! The base of the graph (or of each strongly connected component) is its
//! smallest vertex. Enumeration walks the coordinate tuples in lexicographic
//! order, earlier coordinates more significant; within each group coordinates
//! are listed by vertex index, then edge id. Sampling draws each coordinate
//! independently and uniformly and maps the tuple through the same bijection.

use std::collections::VecDeque;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::balance::{BalanceChecker, EdgeLabeling, EdgeUse, FullLabeling, Mode, Target};
use crate::digraph::{analyze, Digraph, StructureReport};
use crate::group::{ElementIndex, FiniteGroup};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("graph is not weakly connected")]
    NotWeaklyConnected,
    #[error("labeling is not balanced: propagation disagrees at edge {edge}")]
    Inconsistent { edge: usize },
    #[error("element {element} is not an involution")]
    NotInvolution { element: ElementIndex },
    #[error("underlying undirected graph is {actual}, this construction needs it {needed}")]
    WrongParity {
        actual: &'static str,
        needed: &'static str,
    },
    #[error("labeling is in {actual} mode, expected {expected}")]
    WrongMode { actual: Mode, expected: Mode },
    #[error("labeling has {actual} {what} values, graph has {expected}")]
    WrongLength {
        what: &'static str,
        actual: usize,
        expected: usize,
    },
    #[error("vertex {0} is not in the graph")]
    BadVertex(usize),
}

/// `|G₂|^s · |G|^t`, kept in factored form next to its exact value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedCount {
    pub s: u32,
    pub t: u32,
    pub value: BigUint,
}

impl BalancedCount {
    pub fn new(g: &FiniteGroup, s: u32, t: u32) -> Self {
        let value = BigUint::from(g.involutions().len()).pow(s) * BigUint::from(g.order()).pow(t);
        BalancedCount { s, t, value }
    }
}

/// Vertex labeling `p` inducing the flexible edge labeling
/// `f(e) = p(origin)⁻¹ · p(endpoint)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Potential {
    pub values: Vec<ElementIndex>,
    pub base: usize,
}

/// A balanced labeling of either target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Labeling {
    Edges(EdgeLabeling),
    Full(FullLabeling),
}

impl Labeling {
    /// Vertex values (full labelings only) followed by edge values.
    pub fn slots(&self) -> Vec<ElementIndex> {
        match self {
            Labeling::Edges(f) => f.values.clone(),
            Labeling::Full(h) => h
                .vertex_values
                .iter()
                .chain(&h.edge_values)
                .copied()
                .collect(),
        }
    }

    pub fn is_balanced(&self, g: &FiniteGroup, d: &Digraph) -> bool {
        match self {
            Labeling::Edges(f) => BalanceChecker::new(d, f.mode).edges_balanced(g, f),
            Labeling::Full(h) => BalanceChecker::new(d, h.mode).full_balanced(g, h),
        }
    }
}

fn require_connected(d: &Digraph, report: &StructureReport) -> Result<(), EnumerationError> {
    if d.n_vertices() == 0 || !report.weakly_connected {
        return Err(EnumerationError::NotWeaklyConnected);
    }
    Ok(())
}

fn check_len(what: &'static str, actual: usize, expected: usize) -> Result<(), EnumerationError> {
    if actual != expected {
        return Err(EnumerationError::WrongLength {
            what,
            actual,
            expected,
        });
    }
    Ok(())
}

fn check_mode(actual: Mode, expected: Mode) -> Result<(), EnumerationError> {
    if actual != expected {
        return Err(EnumerationError::WrongMode { actual, expected });
    }
    Ok(())
}

/// Number of balanced labelings, by closed form.
pub fn count(
    g: &FiniteGroup,
    d: &Digraph,
    target: Target,
    mode: Mode,
) -> Result<BalancedCount, EnumerationError> {
    let report = analyze(d);
    require_connected(d, &report)?;
    let v = d.n_vertices() as u32;
    let k = report.scc_count as u32;
    let r = report.cross_scc_edges as u32;
    let (s, t) = match (target, mode) {
        (Target::Edges, Mode::Flexible) => (0, v - 1),
        (Target::Full, Mode::Flexible) if report.bipartite => (0, v),
        (Target::Full, Mode::Flexible) => (1, v - 1),
        (Target::Edges, Mode::Rigid) => (0, v - k + r),
        (Target::Full, Mode::Rigid) => (0, 2 * v - k + r),
    };
    Ok(BalancedCount::new(g, s, t))
}

/// Edge uses in breadth-first discovery order from `base`, restricted to the
/// edges accepted by `keep`. Each entry is `(from, use, to)`.
fn bfs_tree(
    d: &Digraph,
    base: usize,
    keep: impl Fn(usize) -> bool,
) -> (Vec<(usize, EdgeUse, usize)>, Vec<bool>) {
    let mut uses_at = vec![Vec::new(); d.n_vertices()];
    for (id, e) in d.edges().iter().enumerate() {
        if e.is_loop() || !keep(id) {
            continue;
        }
        uses_at[e.origin].push(EdgeUse::forward(id));
        uses_at[e.endpoint].push(EdgeUse::backward(id));
    }
    let mut seen = vec![false; d.n_vertices()];
    seen[base] = true;
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([base]);
    while let Some(u) = queue.pop_front() {
        for &use_ in &uses_at[u] {
            let w = use_.head(d);
            if !seen[w] {
                seen[w] = true;
                tree.push((u, use_, w));
                queue.push_back(w);
            }
        }
    }
    (tree, seen)
}

/// `f(e) = p(origin)⁻¹ · p(endpoint)`.
pub fn potential_to_edges(g: &FiniteGroup, d: &Digraph, p: &Potential) -> EdgeLabeling {
    EdgeLabeling {
        values: d
            .edges()
            .iter()
            .map(|e| g.mul(g.inv(p.values[e.origin]), p.values[e.endpoint]))
            .collect(),
        mode: Mode::Flexible,
    }
}

/// Recovers the potential with `p(base) = 1`. Fails if `f` is not balanced,
/// so this doubles as a fast balance test for flexible edge labelings.
pub fn edges_to_potential(
    g: &FiniteGroup,
    d: &Digraph,
    f: &EdgeLabeling,
    base: usize,
) -> Result<Potential, EnumerationError> {
    check_mode(f.mode, Mode::Flexible)?;
    check_len("edge", f.values.len(), d.n_edges())?;
    if base >= d.n_vertices() {
        return Err(EnumerationError::BadVertex(base));
    }
    let (tree, seen) = bfs_tree(d, base, |_| true);
    if seen.iter().any(|&s| !s) {
        return Err(EnumerationError::NotWeaklyConnected);
    }
    let mut values = vec![g.identity(); d.n_vertices()];
    for (u, use_, w) in tree {
        values[w] = g.mul(values[u], f.along(g, use_));
    }
    for (id, e) in d.edges().iter().enumerate() {
        if g.mul(values[e.origin], f.values[id]) != values[e.endpoint] {
            return Err(EnumerationError::Inconsistent { edge: id });
        }
    }
    Ok(Potential { values, base })
}

fn require_parity(report: &StructureReport, bipartite: bool) -> Result<(), EnumerationError> {
    let name = |b: bool| if b { "bipartite" } else { "non-bipartite" };
    if report.bipartite != bipartite {
        return Err(EnumerationError::WrongParity {
            actual: name(report.bipartite),
            needed: name(bipartite),
        });
    }
    Ok(())
}

fn check_flexible_pair(
    d: &Digraph,
    f: &EdgeLabeling,
    base: usize,
) -> Result<StructureReport, EnumerationError> {
    check_mode(f.mode, Mode::Flexible)?;
    check_len("edge", f.values.len(), d.n_edges())?;
    if base >= d.n_vertices() {
        return Err(EnumerationError::BadVertex(base));
    }
    let report = analyze(d);
    require_connected(d, &report)?;
    Ok(report)
}

/// Bipartite case: `h = f` on edges, `h(base) = a`, and across each edge
/// `h(w) = h(e)⁻¹ · h(u)⁻¹ · h(e)`. Every edge is re-checked after the
/// spanning-tree propagation.
pub fn pair_to_full_bipartite(
    g: &FiniteGroup,
    d: &Digraph,
    a: ElementIndex,
    f: &EdgeLabeling,
    base: usize,
) -> Result<FullLabeling, EnumerationError> {
    let report = check_flexible_pair(d, f, base)?;
    require_parity(&report, true)?;
    let (tree, _) = bfs_tree(d, base, |_| true);
    let mut vertex_values = vec![g.identity(); d.n_vertices()];
    vertex_values[base] = a;
    for (u, use_, w) in tree {
        let x = f.along(g, use_);
        vertex_values[w] = g.conjugate(g.inv(vertex_values[u]), x);
    }
    for (id, e) in d.edges().iter().enumerate() {
        let x = f.values[id];
        if vertex_values[e.endpoint] != g.conjugate(g.inv(vertex_values[e.origin]), x) {
            return Err(EnumerationError::Inconsistent { edge: id });
        }
    }
    Ok(FullLabeling {
        vertex_values,
        edge_values: f.values.clone(),
        mode: Mode::Flexible,
    })
}

/// Non-bipartite case: `h(base) = a` with `a² = 1`, vertex values are the
/// conjugates `h(w) = f(e)⁻¹ · h(u) · f(e)` along a spanning tree, and
/// `h(e) = h(origin) · f(e)`.
pub fn pair_to_full_odd(
    g: &FiniteGroup,
    d: &Digraph,
    a: ElementIndex,
    f: &EdgeLabeling,
    base: usize,
) -> Result<FullLabeling, EnumerationError> {
    let report = check_flexible_pair(d, f, base)?;
    require_parity(&report, false)?;
    if !g.is_involution(a) {
        return Err(EnumerationError::NotInvolution { element: a });
    }
    let (tree, _) = bfs_tree(d, base, |_| true);
    let mut vertex_values = vec![g.identity(); d.n_vertices()];
    vertex_values[base] = a;
    for (u, use_, w) in tree {
        vertex_values[w] = g.conjugate(vertex_values[u], f.along(g, use_));
    }
    for (id, e) in d.edges().iter().enumerate() {
        if vertex_values[e.endpoint] != g.conjugate(vertex_values[e.origin], f.values[id]) {
            return Err(EnumerationError::Inconsistent { edge: id });
        }
    }
    let edge_values = d
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| g.mul(vertex_values[e.origin], f.values[id]))
        .collect();
    Ok(FullLabeling {
        vertex_values,
        edge_values,
        mode: Mode::Flexible,
    })
}

/// Inverse of [`pair_to_full_bipartite`] / [`pair_to_full_odd`], picked by the
/// parity of the underlying undirected graph.
pub fn full_to_pair(
    g: &FiniteGroup,
    d: &Digraph,
    h: &FullLabeling,
    base: usize,
) -> Result<(ElementIndex, EdgeLabeling), EnumerationError> {
    check_mode(h.mode, Mode::Flexible)?;
    check_len("vertex", h.vertex_values.len(), d.n_vertices())?;
    check_len("edge", h.edge_values.len(), d.n_edges())?;
    if base >= d.n_vertices() {
        return Err(EnumerationError::BadVertex(base));
    }
    let report = analyze(d);
    require_connected(d, &report)?;
    let a = h.vertex_values[base];
    let values = if report.bipartite {
        h.edge_values.clone()
    } else {
        d.edges()
            .iter()
            .enumerate()
            .map(|(id, e)| g.mul(h.vertex_values[e.origin], h.edge_values[id]))
            .collect()
    };
    Ok((
        a,
        EdgeLabeling {
            values,
            mode: Mode::Flexible,
        },
    ))
}

/// `h(v) = vv(v)`, `h(e) = vv(origin)⁻¹ · f(e)`.
pub fn pair_to_full_rigid(
    g: &FiniteGroup,
    d: &Digraph,
    vv: &[ElementIndex],
    f: &EdgeLabeling,
) -> Result<FullLabeling, EnumerationError> {
    check_mode(f.mode, Mode::Rigid)?;
    check_len("vertex", vv.len(), d.n_vertices())?;
    check_len("edge", f.values.len(), d.n_edges())?;
    Ok(FullLabeling {
        vertex_values: vv.to_vec(),
        edge_values: d
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| g.mul(g.inv(vv[e.origin]), f.values[id]))
            .collect(),
        mode: Mode::Rigid,
    })
}

/// `vv = h` on vertices, `f(e) = h(origin) · h(e)`.
pub fn full_to_pair_rigid(
    g: &FiniteGroup,
    d: &Digraph,
    h: &FullLabeling,
) -> Result<(Vec<ElementIndex>, EdgeLabeling), EnumerationError> {
    check_mode(h.mode, Mode::Rigid)?;
    check_len("vertex", h.vertex_values.len(), d.n_vertices())?;
    check_len("edge", h.edge_values.len(), d.n_edges())?;
    let values = d
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| g.mul(h.vertex_values[e.origin], h.edge_values[id]))
        .collect();
    Ok((
        h.vertex_values.clone(),
        EdgeLabeling {
            values,
            mode: Mode::Rigid,
        },
    ))
}

/// Free coordinates of a rigid balanced edge labeling: a potential that is
/// the identity on the smallest vertex of every SCC, and the values on the
/// edges between different SCCs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidCoordinates {
    pub potential: Vec<ElementIndex>,
    pub cross: Vec<ElementIndex>,
}

/// Vertices that carry a free potential coordinate (not an SCC base) and
/// edges between SCCs.
fn rigid_free_parts(d: &Digraph, report: &StructureReport) -> (Vec<usize>, Vec<usize>) {
    let comp = &report.scc_assignment;
    let mut base_of = vec![usize::MAX; report.scc_count];
    for v in 0..d.n_vertices() {
        if base_of[comp[v]] == usize::MAX {
            base_of[comp[v]] = v;
        }
    }
    let free_vertices = (0..d.n_vertices())
        .filter(|&v| base_of[comp[v]] != v)
        .collect();
    let cross_edges = d
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| comp[e.origin] != comp[e.endpoint])
        .map(|(id, _)| id)
        .collect();
    (free_vertices, cross_edges)
}

pub fn rigid_edges_from_coordinates(
    g: &FiniteGroup,
    d: &Digraph,
    c: &RigidCoordinates,
) -> Result<EdgeLabeling, EnumerationError> {
    let report = analyze(d);
    let comp = &report.scc_assignment;
    check_len("potential", c.potential.len(), d.n_vertices())?;
    let (_, cross_edges) = rigid_free_parts(d, &report);
    check_len("cross-edge", c.cross.len(), cross_edges.len())?;
    let mut values: Vec<ElementIndex> = d
        .edges()
        .iter()
        .map(|e| g.mul(g.inv(c.potential[e.origin]), c.potential[e.endpoint]))
        .collect();
    for (&id, &x) in cross_edges.iter().zip(&c.cross) {
        debug_assert_ne!(comp[d.edge(id).origin], comp[d.edge(id).endpoint]);
        values[id] = x;
    }
    Ok(EdgeLabeling {
        values,
        mode: Mode::Rigid,
    })
}

/// Inverse of [`rigid_edges_from_coordinates`]; fails if `f` is not balanced
/// inside some strongly connected component.
pub fn rigid_edges_to_coordinates(
    g: &FiniteGroup,
    d: &Digraph,
    f: &EdgeLabeling,
) -> Result<RigidCoordinates, EnumerationError> {
    check_mode(f.mode, Mode::Rigid)?;
    check_len("edge", f.values.len(), d.n_edges())?;
    let report = analyze(d);
    let comp = &report.scc_assignment;
    let (free_vertices, cross_edges) = rigid_free_parts(d, &report);
    let mut potential = vec![g.identity(); d.n_vertices()];
    let mut done = vec![false; d.n_vertices()];
    for base in 0..d.n_vertices() {
        if done[base] {
            continue;
        }
        let (tree, seen) = bfs_tree(d, base, |id| {
            let e = d.edge(id);
            comp[e.origin] == comp[base] && comp[e.endpoint] == comp[base]
        });
        for (u, use_, w) in tree {
            potential[w] = g.mul(potential[u], f.along(g, use_));
        }
        for (v, s) in seen.into_iter().enumerate() {
            done[v] |= s;
        }
    }
    debug_assert!(free_vertices.iter().all(|&v| done[v]));
    for (id, e) in d.edges().iter().enumerate() {
        if comp[e.origin] == comp[e.endpoint]
            && g.mul(potential[e.origin], f.values[id]) != potential[e.endpoint]
        {
            return Err(EnumerationError::Inconsistent { edge: id });
        }
    }
    Ok(RigidCoordinates {
        potential,
        cross: cross_edges.iter().map(|&id| f.values[id]).collect(),
    })
}

/// Which bijection a [`Plan`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    EdgesFlexible,
    FullBipartite,
    FullOdd,
    EdgesRigid,
    FullRigid,
}

/// The free coordinates of one (graph, target, mode) instance, with the
/// domain of each coordinate, and the map from coordinate tuples to labelings.
#[derive(Debug, Clone)]
pub struct Plan<'a> {
    g: &'a FiniteGroup,
    d: &'a Digraph,
    layout: Layout,
    domains: Vec<Vec<ElementIndex>>,
    /// Vertices whose potential is a coordinate, in vertex order.
    potential_vertices: Vec<usize>,
    /// Cross-SCC edges (rigid only), in edge order.
    cross_edges: Vec<usize>,
}

impl<'a> Plan<'a> {
    pub fn new(
        g: &'a FiniteGroup,
        d: &'a Digraph,
        target: Target,
        mode: Mode,
    ) -> Result<Self, EnumerationError> {
        let report = analyze(d);
        require_connected(d, &report)?;
        let all: Vec<ElementIndex> = g.elements().collect();
        let n = d.n_vertices();
        let layout = match (target, mode) {
            (Target::Edges, Mode::Flexible) => Layout::EdgesFlexible,
            (Target::Full, Mode::Flexible) if report.bipartite => Layout::FullBipartite,
            (Target::Full, Mode::Flexible) => Layout::FullOdd,
            (Target::Edges, Mode::Rigid) => Layout::EdgesRigid,
            (Target::Full, Mode::Rigid) => Layout::FullRigid,
        };
        let (potential_vertices, cross_edges) = match mode {
            Mode::Flexible => ((1..n).collect(), Vec::new()),
            Mode::Rigid => rigid_free_parts(d, &report),
        };
        let mut domains = Vec::new();
        match layout {
            Layout::FullBipartite => domains.push(all.clone()),
            Layout::FullOdd => domains.push(g.involutions()),
            Layout::FullRigid => domains.extend(std::iter::repeat_n(all.clone(), n)),
            Layout::EdgesFlexible | Layout::EdgesRigid => {}
        }
        domains.extend(std::iter::repeat_n(
            all.clone(),
            potential_vertices.len() + cross_edges.len(),
        ));
        Ok(Plan {
            g,
            d,
            layout,
            domains,
            potential_vertices,
            cross_edges,
        })
    }

    pub fn domains(&self) -> &[Vec<ElementIndex>] {
        &self.domains
    }

    /// Product of the domain sizes; equals the closed-form count.
    pub fn size(&self) -> BigUint {
        self.domains
            .iter()
            .fold(BigUint::from(1u32), |acc, d| acc * BigUint::from(d.len()))
    }

    /// Maps a coordinate tuple (given as positions into each domain) to its
    /// labeling.
    pub fn build(&self, picks: &[usize]) -> Labeling {
        let (g, d) = (self.g, self.d);
        let coords: Vec<ElementIndex> = picks
            .iter()
            .zip(&self.domains)
            .map(|(&i, dom)| dom[i])
            .collect();
        let lead = match self.layout {
            Layout::FullBipartite | Layout::FullOdd => 1,
            Layout::FullRigid => d.n_vertices(),
            Layout::EdgesFlexible | Layout::EdgesRigid => 0,
        };
        let (head, rest) = coords.split_at(lead);
        let (pot, cross) = rest.split_at(self.potential_vertices.len());
        let mut potential = vec![g.identity(); d.n_vertices()];
        for (&v, &x) in self.potential_vertices.iter().zip(pot) {
            potential[v] = x;
        }
        let expect = "plan coordinates always map to a balanced labeling";
        match self.layout {
            Layout::EdgesFlexible => Labeling::Edges(potential_to_edges(
                g,
                d,
                &Potential {
                    values: potential,
                    base: 0,
                },
            )),
            Layout::FullBipartite | Layout::FullOdd => {
                let f = potential_to_edges(
                    g,
                    d,
                    &Potential {
                        values: potential,
                        base: 0,
                    },
                );
                let h = if self.layout == Layout::FullBipartite {
                    pair_to_full_bipartite(g, d, head[0], &f, 0)
                } else {
                    pair_to_full_odd(g, d, head[0], &f, 0)
                };
                Labeling::Full(h.expect(expect))
            }
            Layout::EdgesRigid | Layout::FullRigid => {
                debug_assert_eq!(cross.len(), self.cross_edges.len());
                let f = rigid_edges_from_coordinates(
                    g,
                    d,
                    &RigidCoordinates {
                        potential,
                        cross: cross.to_vec(),
                    },
                )
                .expect(expect);
                if self.layout == Layout::EdgesRigid {
                    Labeling::Edges(f)
                } else {
                    Labeling::Full(pair_to_full_rigid(g, d, head, &f).expect(expect))
                }
            }
        }
    }

    /// All labelings in lexicographic order of their coordinate tuples.
    pub fn into_labelings(self) -> Labelings<'a> {
        let done = self.domains.iter().any(Vec::is_empty);
        Labelings {
            picks: vec![0; self.domains.len()],
            plan: self,
            done,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Labeling {
        let picks: Vec<usize> = self
            .domains
            .iter()
            .map(|dom| rng.gen_range(0..dom.len()))
            .collect();
        self.build(&picks)
    }
}

pub struct Labelings<'a> {
    plan: Plan<'a>,
    picks: Vec<usize>,
    done: bool,
}

impl Iterator for Labelings<'_> {
    type Item = Labeling;

    fn next(&mut self) -> Option<Labeling> {
        if self.done {
            return None;
        }
        let out = self.plan.build(&self.picks);
        self.done = true;
        for (i, dom) in self.picks.iter_mut().zip(&self.plan.domains).rev() {
            *i += 1;
            if *i < dom.len() {
                self.done = false;
                break;
            }
            *i = 0;
        }
        Some(out)
    }
}

/// Stream of all balanced rigid edge labelings.
pub fn rigid_edge_enumerator<'a>(
    g: &'a FiniteGroup,
    d: &'a Digraph,
) -> Result<impl Iterator<Item = EdgeLabeling> + 'a, EnumerationError> {
    let labelings = Plan::new(g, d, Target::Edges, Mode::Rigid)?.into_labelings();
    Ok(labelings.map(|l| match l {
        Labeling::Edges(f) => f,
        Labeling::Full(_) => unreachable!("edge plan yields edge labelings"),
    }))
}

/// Every balanced labeling exactly once, in the documented coordinate order.
pub fn enumerate_all<'a>(
    g: &'a FiniteGroup,
    d: &'a Digraph,
    target: Target,
    mode: Mode,
) -> Result<Labelings<'a>, EnumerationError> {
    Ok(Plan::new(g, d, target, mode)?.into_labelings())
}

/// One uniformly random balanced labeling. The generator is ChaCha8 seeded
/// with `seed`, so output is identical on every platform.
pub fn sample_uniform(
    g: &FiniteGroup,
    d: &Digraph,
    target: Target,
    mode: Mode,
    seed: u64,
) -> Result<Labeling, EnumerationError> {
    let plan = Plan::new(g, d, target, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(plan.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{is_balanced_edges, is_balanced_full};
    use crate::digraph::load_graph;
    use crate::group::make_group;
    use std::collections::HashSet;

    const NO_SHARED_CYCLE: &str = "n=4\n0 1\n3 1\n2 0\n2 3\n1 2\n";

    fn el(g: &FiniteGroup, name: &str) -> ElementIndex {
        g.element_by_name(name).unwrap()
    }

    fn value(g: &FiniteGroup, d: &Digraph, target: Target, mode: Mode) -> u64 {
        count(g, d, target, mode).unwrap().value.try_into().unwrap()
    }

    #[test]
    fn count_examples() {
        let z3 = make_group("cyclic:3").unwrap();
        let z2 = make_group("cyclic:2").unwrap();
        let s3 = make_group("symmetric:3").unwrap();
        let single = load_graph("n=1").unwrap();
        assert_eq!(value(&z3, &single, Target::Edges, Mode::Flexible), 1);

        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let c = count(&s3, &tri, Target::Full, Mode::Flexible).unwrap();
        assert_eq!((c.s, c.t), (1, 2));
        assert_eq!(c.value, BigUint::from(144u32));

        let arrow = load_graph("0 1").unwrap();
        assert_eq!(value(&z2, &arrow, Target::Full, Mode::Flexible), 4);
        assert_eq!(value(&z3, &arrow, Target::Edges, Mode::Rigid), 3);
        assert_eq!(value(&z3, &arrow, Target::Full, Mode::Rigid), 27);

        let kite = load_graph(NO_SHARED_CYCLE).unwrap();
        assert_eq!(value(&z2, &kite, Target::Edges, Mode::Rigid), 8);

        let looped = load_graph("n=1\n0 0\n0 0\n").unwrap();
        assert_eq!(value(&s3, &looped, Target::Full, Mode::Flexible), 4);
    }

    #[test]
    fn count_rejects_disconnected() {
        let g = make_group("cyclic:2").unwrap();
        let d = load_graph("n=3\n0 1\n").unwrap();
        assert_eq!(
            count(&g, &d, Target::Edges, Mode::Flexible),
            Err(EnumerationError::NotWeaklyConnected)
        );
        assert!(enumerate_all(&g, &d, Target::Full, Mode::Rigid).is_err());
        assert!(sample_uniform(&g, &d, Target::Full, Mode::Rigid, 1).is_err());
    }

    #[test]
    fn potential_examples() {
        let g = make_group("symmetric:3").unwrap();
        let arrow = load_graph("0 1").unwrap();
        let t = el(&g, "213");
        let p = Potential {
            values: vec![g.identity(), t],
            base: 0,
        };
        let f = potential_to_edges(&g, &arrow, &p);
        assert_eq!(f.values, vec![t]);
        assert_eq!(edges_to_potential(&g, &arrow, &f, 0).unwrap(), p);

        let looped = load_graph("n=2\n0 1\n1 1\n").unwrap();
        let f = potential_to_edges(
            &g,
            &looped,
            &Potential {
                values: vec![t, el(&g, "231")],
                base: 0,
            },
        );
        assert_eq!(f.values[1], g.identity());

        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let id = EdgeLabeling::identity(&g, &tri, Mode::Flexible);
        assert_eq!(
            edges_to_potential(&g, &tri, &id, 0).unwrap().values,
            vec![g.identity(); 3]
        );
        let bad = EdgeLabeling {
            values: vec![t, t, t],
            mode: Mode::Flexible,
        };
        // the tree uses edges 0 and 2, so the conflict shows up on edge 1
        assert_eq!(
            edges_to_potential(&g, &tri, &bad, 0),
            Err(EnumerationError::Inconsistent { edge: 1 })
        );
    }

    #[test]
    fn bipartite_pair_on_an_arrow() {
        let g = make_group("cyclic:2").unwrap();
        let d = load_graph("0 1").unwrap();
        let f = EdgeLabeling {
            values: vec![ElementIndex(0)],
            mode: Mode::Flexible,
        };
        let h = pair_to_full_bipartite(&g, &d, ElementIndex(1), &f, 0).unwrap();
        assert_eq!(h.vertex_values, vec![ElementIndex(1), ElementIndex(1)]);
        assert_eq!(h.edge_values, vec![ElementIndex(0)]);
        assert!(is_balanced_full(&g, &d, &h));
        assert_eq!(full_to_pair(&g, &d, &h, 0).unwrap(), (ElementIndex(1), f));
    }

    #[test]
    fn alternating_square_pairs_are_balanced() {
        let g = make_group("symmetric:3").unwrap();
        let d = load_graph("0 1\n2 1\n2 3\n0 3\n").unwrap();
        for a in g.elements() {
            for p1 in g.elements() {
                let p = Potential {
                    values: vec![g.identity(), p1, g.inv(p1), el(&g, "312")],
                    base: 0,
                };
                let f = potential_to_edges(&g, &d, &p);
                let h = pair_to_full_bipartite(&g, &d, a, &f, 0).unwrap();
                assert!(is_balanced_full(&g, &d, &h));
                assert_eq!(full_to_pair(&g, &d, &h, 0).unwrap(), (a, f));
            }
        }
    }

    #[test]
    fn odd_pair_rejects_non_involution_and_wrong_parity() {
        let g = make_group("symmetric:3").unwrap();
        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let f = EdgeLabeling::identity(&g, &tri, Mode::Flexible);
        let r = el(&g, "231");
        assert_eq!(
            pair_to_full_odd(&g, &tri, r, &f, 0),
            Err(EnumerationError::NotInvolution { element: r })
        );
        let h = pair_to_full_odd(&g, &tri, g.identity(), &f, 0).unwrap();
        assert_eq!(h, FullLabeling::identity(&g, &tri, Mode::Flexible));
        assert!(matches!(
            pair_to_full_bipartite(&g, &tri, g.identity(), &f, 0),
            Err(EnumerationError::WrongParity { .. })
        ));
    }

    #[test]
    fn odd_pair_on_the_triangle_matches_hand_construction() {
        let g = make_group("symmetric:3").unwrap();
        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let a = el(&g, "213");
        let (x, y) = (el(&g, "321"), el(&g, "132"));
        let z = g.inv(g.mul(x, y));
        let f = EdgeLabeling {
            values: vec![x, y, z],
            mode: Mode::Flexible,
        };
        let h = pair_to_full_odd(&g, &tri, a, &f, 0).unwrap();
        let (xi, yi) = (g.inv(x), g.inv(y));
        assert_eq!(
            h.vertex_values,
            vec![a, g.product([xi, a, x]), g.product([yi, xi, a, x, y])]
        );
        assert_eq!(
            h.edge_values,
            vec![
                g.mul(a, x),
                g.product([xi, a, x, y]),
                g.product([yi, xi, a, x, y, z])
            ]
        );
        assert!(is_balanced_full(&g, &tri, &h));
        assert_eq!(full_to_pair(&g, &tri, &h, 0).unwrap(), (a, f));
    }

    #[test]
    fn rigid_pair_examples() {
        let g = make_group("cyclic:4").unwrap();
        let arrow = load_graph("0 1").unwrap();
        for a in g.elements() {
            for b in g.elements() {
                for p in g.elements() {
                    let f = EdgeLabeling {
                        values: vec![p],
                        mode: Mode::Rigid,
                    };
                    let h = pair_to_full_rigid(&g, &arrow, &[a, b], &f).unwrap();
                    assert!(is_balanced_full(&g, &arrow, &h));
                    assert_eq!(full_to_pair_rigid(&g, &arrow, &h).unwrap(), (vec![a, b], f));
                }
            }
        }
        let looped = load_graph("n=1\n0 0\n").unwrap();
        let v = ElementIndex(3);
        let h = FullLabeling {
            vertex_values: vec![v],
            edge_values: vec![g.inv(v)],
            mode: Mode::Rigid,
        };
        assert!(is_balanced_full(&g, &looped, &h));
        let (_, f) = full_to_pair_rigid(&g, &looped, &h).unwrap();
        assert_eq!(f.values, vec![g.identity()]);
    }

    #[test]
    fn rigid_enumerator_examples() {
        let z2 = make_group("cyclic:2").unwrap();
        let arrow = load_graph("0 1").unwrap();
        let all: Vec<_> = rigid_edge_enumerator(&z2, &arrow).unwrap().collect();
        assert_eq!(
            all.iter().map(|f| f.values.clone()).collect::<Vec<_>>(),
            vec![vec![ElementIndex(0)], vec![ElementIndex(1)]]
        );

        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let all: Vec<_> = rigid_edge_enumerator(&z2, &tri).unwrap().collect();
        assert_eq!(all.len(), 4);
        for f in &all {
            assert_eq!(z2.product(f.values.iter().copied()), z2.identity());
        }

        let kite = load_graph(NO_SHARED_CYCLE).unwrap();
        let all: Vec<_> = rigid_edge_enumerator(&z2, &kite).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|f| is_balanced_edges(&z2, &kite, f)));
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 8);
    }

    #[test]
    fn rigid_coordinates_roundtrip() {
        let g = make_group("symmetric:3").unwrap();
        // two SCCs {0,1} and {2}, plus a cross edge and a loop
        let d = load_graph("0 1\n1 0\n1 2\n2 2\n").unwrap();
        for f in rigid_edge_enumerator(&g, &d).unwrap() {
            let c = rigid_edges_to_coordinates(&g, &d, &f).unwrap();
            assert_eq!(rigid_edges_from_coordinates(&g, &d, &c).unwrap(), f);
            assert!(is_balanced_edges(&g, &d, &f));
        }
    }

    #[test]
    fn enumerate_all_examples() {
        let z2 = make_group("cyclic:2").unwrap();
        let z3 = make_group("cyclic:3").unwrap();
        let single = load_graph("n=1").unwrap();
        let only: Vec<_> = enumerate_all(&z2, &single, Target::Edges, Mode::Flexible)
            .unwrap()
            .collect();
        assert_eq!(
            only,
            vec![Labeling::Edges(EdgeLabeling {
                values: vec![],
                mode: Mode::Flexible
            })]
        );

        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let all: Vec<_> = enumerate_all(&z2, &tri, Target::Full, Mode::Flexible)
            .unwrap()
            .collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 8);
        assert!(all.iter().all(|l| l.is_balanced(&z2, &tri)));

        let arrow = load_graph("0 1").unwrap();
        assert_eq!(
            enumerate_all(&z3, &arrow, Target::Full, Mode::Rigid)
                .unwrap()
                .count(),
            27
        );
    }

    #[test]
    fn enumeration_order_is_lexicographic_in_the_potential() {
        let z3 = make_group("cyclic:3").unwrap();
        let path = load_graph("0 1\n1 2\n").unwrap();
        let firsts: Vec<Vec<u32>> = enumerate_all(&z3, &path, Target::Edges, Mode::Flexible)
            .unwrap()
            .take(4)
            .map(|l| l.slots().iter().map(|x| x.0).collect())
            .collect();
        // potentials (0,0,0), (0,0,1), (0,0,2), (0,1,0)
        assert_eq!(firsts, vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn sampling_is_deterministic_and_balanced() {
        let g = make_group("symmetric:3").unwrap();
        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        for target in [Target::Edges, Target::Full] {
            for mode in [Mode::Flexible, Mode::Rigid] {
                let a = sample_uniform(&g, &tri, target, mode, 42).unwrap();
                let b = sample_uniform(&g, &tri, target, mode, 42).unwrap();
                assert_eq!(a, b);
                assert!(a.is_balanced(&g, &tri));
            }
        }
        let single = load_graph("n=1").unwrap();
        let unique: HashSet<_> = (0..20)
            .map(|s| sample_uniform(&g, &single, Target::Edges, Mode::Rigid, s).unwrap())
            .collect();
        assert_eq!(unique.len(), 1);
    }

    #[test]
    fn sampling_hits_every_outcome() {
        // triangle over Z2, full flexible: 8 balanced labelings
        let g = make_group("cyclic:2").unwrap();
        let tri = load_graph("0 1\n1 2\n2 0\n").unwrap();
        let plan = Plan::new(&g, &tri, Target::Full, Mode::Flexible).unwrap();
        assert_eq!(plan.size(), BigUint::from(8u32));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *hits.entry(plan.sample(&mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(hits.len(), 8);
        // chi-squared with 7 degrees of freedom; 24.32 is the 0.999 quantile
        let expected = draws as f64 / 8.0;
        let chi2: f64 = hits
            .values()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }
}
