//! Balanced group-valued labelings of directed graphs.
//!
//! A labeling of the edges (or of the vertices and edges) of a directed graph
//! by elements of a finite group is balanced when the ordered product along
//! every closed walk is the identity. This crate counts such labelings in
//! closed form, enumerates and samples them through explicit bijections, and
//! checks all of it against an exhaustive oracle.
//!
//! Two traversal semantics are supported: [`Mode::Flexible`], where an edge may
//! be walked backwards and then contributes the inverse of its label, and
//! [`Mode::Rigid`], where edges are only walked forwards.

pub mod balance;
pub mod digraph;
pub mod enumeration;
pub mod group;

pub use balance::{
    all_closed_walks, brute_force_count, is_balanced_edges, is_balanced_full, walk_product_edges,
    walk_product_full, BalanceChecker, ClosedWalk, EdgeLabeling, EdgeUse, FullLabeling, Mode,
    Oracle, OracleError, Step, Target, WalkError, DEFAULT_ORACLE_BUDGET,
};
pub use digraph::{analyze, load_graph, Digraph, GraphError, StructureReport};
pub use enumeration::{
    count, edges_to_potential, enumerate_all, full_to_pair, full_to_pair_rigid,
    pair_to_full_bipartite, pair_to_full_odd, pair_to_full_rigid, potential_to_edges,
    rigid_edge_enumerator, sample_uniform, BalancedCount, EnumerationError, Labeling, Plan,
    Potential,
};
pub use group::{make_group, ElementIndex, FiniteGroup, GroupError};
