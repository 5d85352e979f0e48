//! Automorphism groups of colored digraphs.
//!
//! The search is an individualization–refinement backtracker. A leftmost path
//! fixes a base `b_1, …, b_L`; for every level the search looks for coset
//! representatives mapping `b_l` to each other vertex of its cell while
//! fixing `b_1..b_{l-1}`, skipping targets already in the orbit of `b_l`
//! under the generators found so far. The exact group order is the product
//! of the orbit sizes along the base.

use std::collections::BTreeMap;
use std::collections::HashSet;

use num_bigint::BigUint;
use thiserror::Error;

use crate::graph::ColoredDigraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomError {
    #[error("budget exceeded: {what} ({actual} > {limit})")]
    BudgetExceeded {
        what: &'static str,
        limit: u64,
        actual: u64,
    },
}

/// Guards for the backtracking search.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_vertices: usize,
    pub max_edges: usize,
    /// Bound on individualize-refine steps over the whole search.
    pub max_nodes: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_vertices: 2_000_000,
            max_edges: 100_000_000,
            max_nodes: 10_000_000,
        }
    }
}

/// A permutation of graph vertices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexPermutation {
    image: Vec<u32>,
}

impl VertexPermutation {
    pub fn identity(degree: usize) -> Self {
        VertexPermutation {
            image: (0..degree as u32).collect(),
        }
    }

    /// `None` unless `image` is a bijection on `0..image.len()`.
    pub fn from_image(image: Vec<u32>) -> Option<Self> {
        let mut seen = vec![false; image.len()];
        for &v in &image {
            if v as usize >= image.len() || seen[v as usize] {
                return None;
            }
            seen[v as usize] = true;
        }
        Some(VertexPermutation { image })
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.image[v as usize]
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Self) -> Self {
        VertexPermutation {
            image: self.image.iter().map(|&v| other.apply(v)).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v as usize] = i as u32;
        }
        VertexPermutation { image }
    }

    /// Color- and edge-preservation check against a graph.
    pub fn is_automorphism_of(&self, graph: &ColoredDigraph) -> bool {
        if self.degree() != graph.vertex_count() {
            return false;
        }
        for v in 0..self.degree() as u32 {
            if graph.color(self.apply(v)) != graph.color(v) {
                return false;
            }
        }
        graph
            .edges()
            .iter()
            .all(|&(u, v)| graph.has_edge(self.apply(u), self.apply(v)))
    }
}

/// An ordered partition of the vertices; cell members are kept ascending.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrderedPartition {
    cells: Vec<Vec<u32>>,
    cell_of: Vec<usize>,
}

impl OrderedPartition {
    pub fn from_cells(cells: Vec<Vec<u32>>, degree: usize) -> Self {
        let mut cell_of = vec![usize::MAX; degree];
        let mut cells = cells;
        for (i, cell) in cells.iter_mut().enumerate() {
            cell.sort_unstable();
            for &v in cell.iter() {
                assert!(cell_of[v as usize] == usize::MAX, "vertex in two cells");
                cell_of[v as usize] = i;
            }
        }
        assert!(cell_of.iter().all(|&c| c != usize::MAX), "partition must cover all vertices");
        OrderedPartition { cells, cell_of }
    }

    /// The unit partition grouped by color, cells ordered by color value.
    pub fn by_colors(graph: &ColoredDigraph) -> Self {
        let mut by_color: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for v in 0..graph.vertex_count() as u32 {
            by_color.entry(graph.color(v)).or_default().push(v);
        }
        OrderedPartition::from_cells(by_color.into_values().collect(), graph.vertex_count())
    }

    pub fn cells(&self) -> &[Vec<u32>] {
        &self.cells
    }

    pub fn cell_of(&self, v: u32) -> usize {
        self.cell_of[v as usize]
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 1)
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.len()).collect()
    }

    /// True iff every cell of `self` lies inside one cell of `coarser`.
    pub fn refines(&self, coarser: &OrderedPartition) -> bool {
        self.cells
            .iter()
            .all(|cell| cell.iter().all(|&v| coarser.cell_of(v) == coarser.cell_of(cell[0])))
    }

    /// Equitability with respect to directed in/out degrees between cells.
    pub fn is_equitable(&self, graph: &ColoredDigraph) -> bool {
        for cell in &self.cells {
            for target in 0..self.cells.len() {
                let degs: HashSet<(usize, usize)> = cell
                    .iter()
                    .map(|&v| {
                        let out = graph.out_neighbors(v).iter().filter(|&&w| self.cell_of(w) == target).count();
                        let inn = graph.in_neighbors(v).iter().filter(|&&w| self.cell_of(w) == target).count();
                        (out, inn)
                    })
                    .collect();
                if degs.len() > 1 {
                    return false;
                }
            }
        }
        true
    }

    /// Splits `v` out of its cell, placing the singleton first.
    fn individualize(&self, cell: usize, v: u32) -> OrderedPartition {
        debug_assert_eq!(self.cell_of(v), cell);
        debug_assert!(self.cells[cell].len() > 1);
        let mut cells = Vec::with_capacity(self.cells.len() + 1);
        for (i, c) in self.cells.iter().enumerate() {
            if i == cell {
                cells.push(vec![v]);
                cells.push(c.iter().copied().filter(|&w| w != v).collect());
            } else {
                cells.push(c.clone());
            }
        }
        OrderedPartition::from_cells(cells, self.cell_of.len())
    }

    /// First non-singleton cell of minimum size.
    fn target_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in self.cells.iter().enumerate() {
            if c.len() > 1 && best.is_none_or(|(len, _)| c.len() < len) {
                best = Some((c.len(), i));
            }
        }
        best.map(|(_, i)| i)
    }
}

/// Refines until equitable: vertices split by the multiset of
/// `(cell, out-degree, in-degree)` triples, synchronously each round, with
/// sub-cells ordered by signature. The result refines the input and is
/// deterministic for a fixed graph and input partition.
pub fn refine(graph: &ColoredDigraph, partition: &OrderedPartition) -> OrderedPartition {
    let degree = partition.cell_of.len();
    let mut current = partition.clone();
    let mut out_count = vec![0u32; degree.max(1)];
    let mut in_count = vec![0u32; degree.max(1)];
    let mut touched: Vec<usize> = Vec::new();
    let mut signatures: Vec<Vec<(usize, u32, u32)>> = vec![Vec::new(); degree];
    loop {
        // signature of v: sparse sorted (cell, out-degree, in-degree) triples
        for (v, sig) in signatures.iter_mut().enumerate() {
            for &w in graph.out_neighbors(v as u32) {
                let c = current.cell_of(w);
                if out_count[c] == 0 && in_count[c] == 0 {
                    touched.push(c);
                }
                out_count[c] += 1;
            }
            for &w in graph.in_neighbors(v as u32) {
                let c = current.cell_of(w);
                if out_count[c] == 0 && in_count[c] == 0 {
                    touched.push(c);
                }
                in_count[c] += 1;
            }
            touched.sort_unstable();
            sig.clear();
            sig.extend(touched.iter().map(|&c| (c, out_count[c], in_count[c])));
            for &c in &touched {
                out_count[c] = 0;
                in_count[c] = 0;
            }
            touched.clear();
        }
        let mut next: Vec<Vec<u32>> = Vec::with_capacity(current.cells.len());
        let mut split = false;
        for cell in &current.cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut groups: BTreeMap<&[(usize, u32, u32)], Vec<u32>> = BTreeMap::new();
            for &v in cell {
                groups.entry(&signatures[v as usize]).or_default().push(v);
            }
            if groups.len() > 1 {
                split = true;
            }
            next.extend(groups.into_values());
        }
        if !split {
            return current;
        }
        current = OrderedPartition::from_cells(next, degree);
    }
}

/// Generators, exact order, and vertex orbits of an automorphism group.
#[derive(Clone, Debug)]
pub struct GroupReport {
    pub generators: Vec<VertexPermutation>,
    pub order: BigUint,
    pub orbits: Vec<Vec<u32>>,
}

pub fn find_automorphisms(graph: &ColoredDigraph) -> Result<GroupReport, AutomError> {
    find_automorphisms_with(graph, &SearchLimits::default())
}

pub fn find_automorphisms_with(
    graph: &ColoredDigraph,
    limits: &SearchLimits,
) -> Result<GroupReport, AutomError> {
    if graph.vertex_count() > limits.max_vertices {
        return Err(AutomError::BudgetExceeded {
            what: "graph vertices",
            limit: limits.max_vertices as u64,
            actual: graph.vertex_count() as u64,
        });
    }
    if graph.edge_count() > limits.max_edges {
        return Err(AutomError::BudgetExceeded {
            what: "graph edges",
            limit: limits.max_edges as u64,
            actual: graph.edge_count() as u64,
        });
    }

    let degree = graph.vertex_count();
    if degree == 0 {
        return Ok(GroupReport {
            generators: Vec::new(),
            order: BigUint::from(1u32),
            orbits: Vec::new(),
        });
    }

    // leftmost path: partitions π_0..π_L, targets and base points per level
    let mut path = vec![refine(graph, &OrderedPartition::by_colors(graph))];
    let mut targets: Vec<usize> = Vec::new();
    let mut base: Vec<u32> = Vec::new();
    while let Some(cell) = path.last().unwrap().target_cell() {
        let b = path.last().unwrap().cells()[cell][0];
        targets.push(cell);
        base.push(b);
        let next = refine(graph, &path.last().unwrap().individualize(cell, b));
        path.push(next);
    }

    let mut search = ConstrainedSearch {
        graph,
        path: &path,
        targets: &targets,
        nodes: 0,
        max_nodes: limits.max_nodes,
    };

    let mut generators: Vec<VertexPermutation> = Vec::new();
    for level in (0..base.len()).rev() {
        let b = base[level];
        let cell = &path[level].cells()[targets[level]];
        for &candidate in cell.iter().filter(|&&v| v != b) {
            let known: Vec<&VertexPermutation> = generators
                .iter()
                .filter(|g| base[..level].iter().all(|&p| g.apply(p) == p))
                .collect();
            if orbit_of(b, &known).contains(&candidate) {
                continue;
            }
            if let Some(g) = search.coset_representative(level, candidate)? {
                debug_assert!(g.is_automorphism_of(graph));
                generators.push(g);
            }
        }
    }

    let mut order = BigUint::from(1u32);
    for level in 0..base.len() {
        let fixing: Vec<&VertexPermutation> = generators
            .iter()
            .filter(|g| base[..level].iter().all(|&p| g.apply(p) == p))
            .collect();
        order *= BigUint::from(orbit_of(base[level], &fixing).len() as u64);
    }

    let orbits = orbits(&generators, degree);
    Ok(GroupReport {
        generators,
        order,
        orbits,
    })
}

fn orbit_of(start: u32, generators: &[&VertexPermutation]) -> HashSet<u32> {
    let mut orbit = HashSet::from([start]);
    let mut queue = vec![start];
    while let Some(v) = queue.pop() {
        for g in generators {
            let w = g.apply(v);
            if orbit.insert(w) {
                queue.push(w);
            }
        }
    }
    orbit
}

/// Orbit partition of `0..degree` under the generated group, each orbit
/// ascending, orbits ordered by minimum element.
pub fn orbits(generators: &[VertexPermutation], degree: usize) -> Vec<Vec<u32>> {
    let refs: Vec<&VertexPermutation> = generators.iter().collect();
    let mut seen = vec![false; degree];
    let mut result = Vec::new();
    for v in 0..degree as u32 {
        if seen[v as usize] {
            continue;
        }
        let mut orbit: Vec<u32> = orbit_of(v, &refs).into_iter().collect();
        orbit.sort_unstable();
        for &w in &orbit {
            seen[w as usize] = true;
        }
        result.push(orbit);
    }
    result
}

struct ConstrainedSearch<'a> {
    graph: &'a ColoredDigraph,
    path: &'a [OrderedPartition],
    targets: &'a [usize],
    nodes: u64,
    max_nodes: u64,
}

impl ConstrainedSearch<'_> {
    /// Searches for one automorphism fixing `base[..level]` pointwise and
    /// mapping `base[level]` to `candidate`. Exhaustive over its subtree.
    fn coset_representative(
        &mut self,
        level: usize,
        candidate: u32,
    ) -> Result<Option<VertexPermutation>, AutomError> {
        let domain = &self.path[level];
        let cell = self.targets[level];
        let image = refine(self.graph, &domain.individualize(cell, candidate));
        self.bump()?;
        if image.cell_sizes() != self.path[level + 1].cell_sizes() {
            return Ok(None);
        }
        self.descend(level + 1, image)
    }

    fn descend(
        &mut self,
        depth: usize,
        image: OrderedPartition,
    ) -> Result<Option<VertexPermutation>, AutomError> {
        let domain = &self.path[depth];
        if domain.is_discrete() {
            let mut map = vec![0u32; domain.cell_of.len()];
            for (dc, ic) in domain.cells().iter().zip(image.cells()) {
                map[dc[0] as usize] = ic[0];
            }
            let perm = VertexPermutation::from_image(map).expect("matched discrete partitions");
            if perm.is_automorphism_of(self.graph) {
                return Ok(Some(perm));
            }
            return Ok(None);
        }
        let cell = self.targets[depth];
        for &w in &image.cells()[cell] {
            let next = refine(self.graph, &image.individualize(cell, w));
            self.bump()?;
            if next.cell_sizes() != self.path[depth + 1].cell_sizes() {
                continue;
            }
            if let Some(found) = self.descend(depth + 1, next)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn bump(&mut self) -> Result<(), AutomError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(AutomError::BudgetExceeded {
                what: "search nodes",
                limit: self.max_nodes,
                actual: self.nodes,
            });
        }
        Ok(())
    }
}

/// Exact order of the group generated by `generators`, by a Schreier–Sims
/// stabilizer chain: pick the first moved point, multiply the orbit size by
/// the order of its stabilizer, generated by the (deduplicated) Schreier
/// generators.
pub fn group_order(generators: &[VertexPermutation], degree: usize) -> BigUint {
    let gens: Vec<VertexPermutation> = generators.iter().filter(|g| !g.is_identity()).cloned().collect();
    if gens.is_empty() {
        return BigUint::from(1u32);
    }
    let beta = (0..degree as u32)
        .find(|&v| gens.iter().any(|g| g.apply(v) != v))
        .expect("a non-identity generator moves some point");

    // orbit with transversal representatives u_w : beta ↦ w
    let mut transversal: BTreeMap<u32, VertexPermutation> = BTreeMap::new();
    transversal.insert(beta, VertexPermutation::identity(degree));
    let mut queue = vec![beta];
    while let Some(v) = queue.pop() {
        for g in &gens {
            let w = g.apply(v);
            if !transversal.contains_key(&w) {
                let rep = transversal[&v].then(g);
                transversal.insert(w, rep);
                queue.push(w);
            }
        }
    }

    let mut stabilizer: Vec<VertexPermutation> = Vec::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for u in transversal.values() {
        for g in &gens {
            let schreier = u.then(g).then(&transversal[&g.apply(u.apply(beta))].inverse());
            debug_assert_eq!(schreier.apply(beta), beta);
            if !schreier.is_identity() && seen.insert(schreier.image().to_vec()) {
                stabilizer.push(schreier);
            }
        }
    }

    BigUint::from(transversal.len() as u64) * group_order(&stabilizer, degree)
}
