//! Directed multigraphs and the structural facts the counting formulas need.
//!
//! Loops and parallel edges are allowed. An edge is identified by its
//! position in the edge list, never by its endpoint pair.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub origin: usize,
    pub endpoint: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.origin == self.endpoint
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: vertex {vertex} is out of range for n={n_vertices}")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("edge {edge}: vertex {vertex} is out of range for n={n_vertices}")]
    EdgeOutOfRange {
        edge: usize,
        vertex: usize,
        n_vertices: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl Digraph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        for (id, &(o, t)) in edges.iter().enumerate() {
            for v in [o, t] {
                if v >= n_vertices {
                    return Err(GraphError::EdgeOutOfRange {
                        edge: id,
                        vertex: v,
                        n_vertices,
                    });
                }
            }
        }
        Ok(Digraph {
            n_vertices,
            edges: edges
                .iter()
                .map(|&(origin, endpoint)| Edge { origin, endpoint })
                .collect(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }

    /// Same graph with edge `id` pointing the other way.
    pub fn with_edge_reversed(&self, id: usize) -> Digraph {
        let mut out = self.clone();
        let e = &mut out.edges[id];
        std::mem::swap(&mut e.origin, &mut e.endpoint);
        out
    }

    /// Same graph with one more edge appended (it gets the next id).
    pub fn with_edge(&self, origin: usize, endpoint: usize) -> Result<Digraph, GraphError> {
        let mut pairs: Vec<(usize, usize)> =
            self.edges.iter().map(|e| (e.origin, e.endpoint)).collect();
        pairs.push((origin, endpoint));
        Digraph::new(self.n_vertices, &pairs)
    }

    /// Edges incident to each vertex in the underlying undirected graph, as
    /// `(edge id, neighbour)`. A loop appears once.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.origin].push((id, e.endpoint));
            if !e.is_loop() {
                adj[e.endpoint].push((id, e.origin));
            }
        }
        adj
    }

    fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.origin].push(e.endpoint);
        }
        adj
    }
}

/// Parses the edge-list format: an optional `n=<N>` line, then one
/// `<origin> <endpoint>` pair per line. `#` starts a comment.
pub fn load_graph(text: &str) -> Result<Digraph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut seen_content = false;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("n=") {
            if seen_content {
                return Err(GraphError::Malformed {
                    line,
                    message: "`n=` must come before any edge".into(),
                });
            }
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| GraphError::Malformed {
                    line,
                    message: format!("bad vertex count `{}`", rest.trim()),
                })?;
            declared = Some(n);
            seen_content = true;
            continue;
        }
        seen_content = true;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Malformed {
                line,
                message: format!("expected `<origin> <endpoint>`, got `{content}`"),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Malformed {
                line,
                message: format!("`{s}` is not a vertex index"),
            })
        };
        pairs.push((line, parse(fields[0])?, parse(fields[1])?));
    }
    let n = match declared {
        Some(n) => {
            for &(line, o, t) in &pairs {
                for v in [o, t] {
                    if v >= n {
                        return Err(GraphError::VertexOutOfRange {
                            line,
                            vertex: v,
                            n_vertices: n,
                        });
                    }
                }
            }
            n
        }
        None => pairs
            .iter()
            .map(|&(_, o, t)| o.max(t) + 1)
            .max()
            .unwrap_or(0),
    };
    let edges: Vec<(usize, usize)> = pairs.iter().map(|&(_, o, t)| (o, t)).collect();
    Digraph::new(n, &edges)
}

/// Renders a graph in the edge-list format (always with an `n=` line).
pub fn write_graph(d: &Digraph) -> String {
    let mut out = format!("n={}\n", d.n_vertices());
    for e in d.edges() {
        out.push_str(&format!("{} {}\n", e.origin, e.endpoint));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub weakly_connected: bool,
    /// Bipartiteness of the underlying undirected graph; any loop makes it false.
    pub bipartite: bool,
    pub scc_count: usize,
    /// Edges whose endpoints lie in different strongly connected components.
    pub cross_scc_edges: usize,
    /// Component of each vertex. Components are numbered by their smallest vertex.
    pub scc_assignment: Vec<usize>,
}

pub fn analyze(d: &Digraph) -> StructureReport {
    let (scc_assignment, scc_count) = strongly_connected_components(d);
    let cross_scc_edges = d
        .edges()
        .iter()
        .filter(|e| scc_assignment[e.origin] != scc_assignment[e.endpoint])
        .count();
    StructureReport {
        weakly_connected: is_weakly_connected(d),
        bipartite: two_coloring(d).is_some(),
        scc_count,
        cross_scc_edges,
        scc_assignment,
    }
}

/// The empty graph is not considered connected.
pub fn is_weakly_connected(d: &Digraph) -> bool {
    let n = d.n_vertices();
    if n == 0 {
        return false;
    }
    let adj = d.undirected_adjacency();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &(_, w) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == n
}

/// Proper 2-colouring of the underlying undirected graph, if one exists.
/// Each connected piece gets colour 0 at its smallest vertex.
pub fn two_coloring(d: &Digraph) -> Option<Vec<u8>> {
    if d.has_loop() {
        return None;
    }
    let adj = d.undirected_adjacency();
    let mut color: Vec<Option<u8>> = vec![None; d.n_vertices()];
    for start in 0..d.n_vertices() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &(_, w) in &adj[u] {
                match color[w] {
                    None => {
                        color[w] = Some(1 - cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(Option::unwrap).collect())
}

/// Tarjan's algorithm, iterative. Returns the component of every vertex and
/// the number of components; components are renumbered in order of their
/// smallest vertex so the result does not depend on edge order.
pub fn strongly_connected_components(d: &Digraph) -> (Vec<usize>, usize) {
    let n = d.n_vertices();
    let adj = d.out_adjacency();
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut raw_comp = vec![UNVISITED; n];
    let mut next_index = 0;
    let mut n_comp = 0;
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    raw_comp[w] = n_comp;
                    if w == v {
                        break;
                    }
                }
                n_comp += 1;
            }
        }
    }

    let mut renumber = vec![UNVISITED; n_comp];
    let mut next = 0;
    let assignment = raw_comp
        .iter()
        .map(|&c| {
            if renumber[c] == UNVISITED {
                renumber[c] = next;
                next += 1;
            }
            renumber[c]
        })
        .collect();
    (assignment, n_comp)
}

/// Every digraph on `1..=max_vertices` vertices with at most `max_edges`
/// edges, one representative per multiset of (origin, endpoint) pairs, edges
/// listed in sorted order. Loops and parallel edges are included; connectivity
/// is not filtered.
pub fn small_digraphs(max_vertices: usize, max_edges: usize) -> Vec<Digraph> {
    fn extend(
        n: usize,
        kinds: &[(usize, usize)],
        from: usize,
        left: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Digraph>,
    ) {
        out.push(Digraph::new(n, current).expect("generated edges are in range"));
        if left == 0 {
            return;
        }
        for k in from..kinds.len() {
            current.push(kinds[k]);
            extend(n, kinds, k, left - 1, current, out);
            current.pop();
        }
    }

    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let kinds: Vec<(usize, usize)> = (0..n).flat_map(|o| (0..n).map(move |t| (o, t))).collect();
        extend(n, &kinds, 0, max_edges, &mut Vec::new(), &mut out);
    }
    out
}

/// Every digraph on `1..=max_vertices` vertices with at most `max_edges`
/// edges as an ordered edge list, so graphs differing only in edge ids are
/// distinct. Loops and parallel edges are included; connectivity is not
/// filtered.
pub fn labeled_digraphs(max_vertices: usize, max_edges: usize) -> Vec<Digraph> {
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let kinds: Vec<(usize, usize)> = (0..n).flat_map(|o| (0..n).map(move |t| (o, t))).collect();
        let mut layer: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for size in 0..=max_edges {
            out.extend(
                layer
                    .iter()
                    .map(|edges| Digraph::new(n, edges).expect("generated edges are in range")),
            );
            if size == max_edges {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|edges| {
                    kinds.iter().map(move |&k| {
                        let mut next = edges.clone();
                        next.push(k);
                        next
                    })
                })
                .collect();
        }
    }
    out
}
