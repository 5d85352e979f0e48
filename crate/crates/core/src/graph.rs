//! The colored-digraph encoding of a CNF DQBF.
//!
//! Per variable `v` there are three vertices (the variable node and the two
//! literal nodes) wired as `(v,+v) (v,-v) (+v,-v) (-v,+v)`; per existential
//! `y_i` and `x ∈ D_i` there is a dependency edge `(y_i, x)`; per clause `c`
//! and literal `l ∈ c` an occurrence edge `(c, l)`. Universal gadgets are
//! colored 1, existential gadgets 2, clause nodes 3.

use std::fmt::Write as _;

use crate::formula::{Dqbf, Var};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VertexKind {
    /// Variable node of `v`.
    Var(Var),
    /// Positive literal node of `v`.
    Pos(Var),
    /// Negative literal node of `v`.
    Neg(Var),
    /// Clause node, 0-based matrix position.
    Clause(usize),
    /// Vertex of a hand-built graph with no formula meaning.
    Free,
}

impl std::fmt::Display for VertexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VertexKind::Var(v) => write!(f, "v{v}"),
            VertexKind::Pos(v) => write!(f, "+{v}"),
            VertexKind::Neg(v) => write!(f, "-{v}"),
            VertexKind::Clause(i) => write!(f, "c{}", i + 1),
            VertexKind::Free => write!(f, "·"),
        }
    }
}

/// A directed vertex-colored graph with edges kept sorted by `(from, to)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColoredDigraph {
    colors: Vec<u32>,
    kinds: Vec<VertexKind>,
    edges: Vec<(u32, u32)>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

impl ColoredDigraph {
    pub fn new(colors: Vec<u32>, kinds: Vec<VertexKind>, mut edges: Vec<(u32, u32)>) -> Self {
        assert_eq!(colors.len(), kinds.len());
        let n = colors.len() as u32;
        edges.sort_unstable();
        edges.dedup();
        let mut out_adj = vec![Vec::new(); colors.len()];
        let mut in_adj = vec![Vec::new(); colors.len()];
        for &(u, v) in &edges {
            assert!(u < n && v < n, "edge endpoint out of range");
            out_adj[u as usize].push(v);
            in_adj[v as usize].push(u);
        }
        for adj in &mut in_adj {
            adj.sort_unstable();
        }
        ColoredDigraph {
            colors,
            kinds,
            edges,
            out_adj,
            in_adj,
        }
    }

    /// Hand-built graph without formula structure (test fixtures).
    pub fn from_colored_edges(colors: Vec<u32>, edges: Vec<(u32, u32)>) -> Self {
        let kinds = vec![VertexKind::Free; colors.len()];
        ColoredDigraph::new(colors, kinds, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.colors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn color(&self, v: u32) -> u32 {
        self.colors[v as usize]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn kind(&self, v: u32) -> VertexKind {
        self.kinds[v as usize]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_adj[v as usize]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.in_adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.out_adj[u as usize].binary_search(&v).is_ok()
    }

    /// DOT export for inspection.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph g {\n");
        for v in 0..self.vertex_count() {
            writeln!(
                out,
                "  {} [label=\"{}\" color={}];",
                v,
                self.kinds[v],
                ["black", "blue", "green", "red"][self.colors[v].min(3) as usize]
            )
            .unwrap();
        }
        for &(u, v) in &self.edges {
            writeln!(out, "  {u} -> {v};").unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// Plain text listing: one header line, then colors and edges.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p digraph {} {}", self.vertex_count(), self.edge_count()).unwrap();
        for v in 0..self.vertex_count() {
            writeln!(out, "n {} {} {}", v, self.colors[v], self.kinds[v]).unwrap();
        }
        for &(u, v) in &self.edges {
            writeln!(out, "e {u} {v}").unwrap();
        }
        out
    }
}

/// Vertex numbering: variable nodes first (`v-1`), then the literal pairs
/// (`+v` at `m+2(v-1)`, `-v` right after, with `m` the variable count), then
/// clause nodes. This makes literal permutations O(1) to read off a vertex
/// permutation.
pub fn build_graph(dqbf: &Dqbf) -> ColoredDigraph {
    let m = dqbf.variable_count();
    let d = dqbf.clause_count();
    let var_node = |v: Var| v - 1;
    let pos_node = |v: Var| (m as u32) + 2 * (v - 1);
    let neg_node = |v: Var| (m as u32) + 2 * (v - 1) + 1;
    let clause_node = |i: usize| (3 * m + i) as u32;

    let mut colors = vec![0u32; 3 * m + d];
    let mut kinds = vec![VertexKind::Free; 3 * m + d];
    for v in 1..=m as Var {
        let color = if dqbf.prefix().is_universal(v) { 1 } else { 2 };
        colors[var_node(v) as usize] = color;
        colors[pos_node(v) as usize] = color;
        colors[neg_node(v) as usize] = color;
        kinds[var_node(v) as usize] = VertexKind::Var(v);
        kinds[pos_node(v) as usize] = VertexKind::Pos(v);
        kinds[neg_node(v) as usize] = VertexKind::Neg(v);
    }
    for i in 0..d {
        colors[clause_node(i) as usize] = 3;
        kinds[clause_node(i) as usize] = VertexKind::Clause(i);
    }

    let mut edges = Vec::with_capacity(4 * m + d);
    for v in 1..=m as Var {
        edges.push((var_node(v), pos_node(v)));
        edges.push((var_node(v), neg_node(v)));
        edges.push((pos_node(v), neg_node(v)));
        edges.push((neg_node(v), pos_node(v)));
    }
    let mut dependency_edges = 0usize;
    for e in dqbf.prefix().existentials() {
        for &x in &e.deps {
            edges.push((var_node(e.var), var_node(x)));
            dependency_edges += 1;
        }
    }
    let mut occurrence_edges = 0usize;
    for (i, clause) in dqbf.matrix().iter().enumerate() {
        for l in clause.literals() {
            let target = if l.is_negated() { neg_node(l.var()) } else { pos_node(l.var()) };
            edges.push((clause_node(i), target));
            occurrence_edges += 1;
        }
    }

    let expected = 4 * m + dependency_edges + occurrence_edges;
    let graph = ColoredDigraph::new(colors, kinds, edges);
    assert_eq!(graph.edge_count(), expected, "edge kinds must not overlap");
    assert_eq!(
        dependency_edges,
        dqbf.prefix().existentials().iter().map(|e| e.deps.len()).sum::<usize>()
    );
    assert_eq!(
        occurrence_edges,
        dqbf.matrix().iter().map(|c| c.len()).sum::<usize>()
    );
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Dqbf, Prefix};
    use crate::generators::fixtures;

    #[test]
    fn graph_example_counts_and_colors() {
        let g = build_graph(&fixtures::x_swap_triple());
        assert_eq!(g.vertex_count(), 12);
        assert_eq!(g.edge_count(), 23);
        let count = |c| g.colors().iter().filter(|&&x| x == c).count();
        assert_eq!(count(1), 6);
        assert_eq!(count(2), 3);
        assert_eq!(count(3), 3);
    }

    #[test]
    fn single_universal_gadget() {
        let f = Dqbf::new(Prefix::new(vec![1], vec![]).unwrap(), vec![]).unwrap();
        let g = build_graph(&f);
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 4);
        assert!(g.colors().iter().all(|&c| c == 1));
    }

    #[test]
    fn dependency_edges_read_off_the_prefix() {
        let g = build_graph(&fixtures::or_pair());
        // y1=3 depends on x1=1, y2=4 on x2=2; variable nodes are var-1
        let dep_edges: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| matches!(g.kind(u), VertexKind::Var(_)) && matches!(g.kind(v), VertexKind::Var(_)))
            .collect();
        assert_eq!(dep_edges, vec![(2, 0), (3, 1)]);
    }

    #[test]
    fn construction_is_deterministic() {
        let f = fixtures::x_swap_triple();
        assert_eq!(build_graph(&f), build_graph(&f));
    }

    #[test]
    fn exports_do_not_panic() {
        let g = build_graph(&fixtures::or_pair());
        assert!(g.to_dot().contains("digraph"));
        assert!(g.to_text().starts_with("p digraph 14 22"));
    }
}
