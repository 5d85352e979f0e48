//! Literal permutations: extraction from graph automorphisms, admissibility
//! and syntactic-symmetry checks, and the eligibility filter applied before
//! breaker construction.

use std::fmt;

use thiserror::Error;

use crate::autom::VertexPermutation;
use crate::formula::{Clause, Dqbf, Literal, Prefix, Var};
use crate::graph::{ColoredDigraph, VertexKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("not a literal permutation: {0}")]
    NotAPermutation(String),
}

/// A negation-compatible bijection on the `2m` literals of a formula with
/// `m` variables: `g(¬l) = ¬g(l)` always holds, so the map is determined by
/// the images of the positive literals.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LiteralPermutation {
    /// Image of the positive literal of variable `i+1`.
    positive_images: Vec<Literal>,
}

impl LiteralPermutation {
    pub fn identity(variable_count: usize) -> Self {
        LiteralPermutation {
            positive_images: (1..=variable_count as Var).map(Literal::positive).collect(),
        }
    }

    /// Builds the permutation from images of positive literals, checking
    /// bijectivity. Negation-compatibility holds by construction.
    pub fn from_positive_images(positive_images: Vec<Literal>) -> Result<Self, SymmetryError> {
        let m = positive_images.len();
        let mut seen = vec![false; m];
        for l in &positive_images {
            let v = l.var() as usize;
            if v > m {
                return Err(SymmetryError::NotAPermutation(format!(
                    "image variable {v} out of range 1..={m}"
                )));
            }
            if seen[v - 1] {
                return Err(SymmetryError::NotAPermutation(format!(
                    "variable {v} is hit twice"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(LiteralPermutation { positive_images })
    }

    /// The permutation moving only the listed variables: `var ↦ image`
    /// (and `¬var ↦ ¬image`).
    pub fn from_moves(variable_count: usize, moves: &[(Var, Literal)]) -> Result<Self, SymmetryError> {
        let mut images: Vec<Literal> = (1..=variable_count as Var).map(Literal::positive).collect();
        for &(v, l) in moves {
            if v == 0 || v as usize > variable_count {
                return Err(SymmetryError::NotAPermutation(format!(
                    "variable {v} out of range"
                )));
            }
            images[v as usize - 1] = l;
        }
        LiteralPermutation::from_positive_images(images)
    }

    pub fn variable_count(&self) -> usize {
        self.positive_images.len()
    }

    pub fn apply(&self, lit: Literal) -> Literal {
        let img = self.positive_images[lit.var() as usize - 1];
        if lit.is_negated() {
            img.negate()
        } else {
            img
        }
    }

    /// Image of the positive literal of `var`.
    pub fn apply_var(&self, var: Var) -> Literal {
        self.positive_images[var as usize - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.positive_images
            .iter()
            .enumerate()
            .all(|(i, l)| *l == Literal::positive(i as Var + 1))
    }

    pub fn moves(&self, var: Var) -> bool {
        self.apply_var(var) != Literal::positive(var)
    }

    pub fn moved_variables(&self) -> impl Iterator<Item = Var> + '_ {
        (1..=self.variable_count() as Var).filter(|&v| self.moves(v))
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Self) -> Self {
        LiteralPermutation {
            positive_images: self.positive_images.iter().map(|&l| other.apply(l)).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![Literal::positive(1); self.variable_count()];
        for (i, l) in self.positive_images.iter().enumerate() {
            let source = Literal::positive(i as Var + 1);
            images[l.var() as usize - 1] = if l.is_negated() { source.negate() } else { source };
        }
        LiteralPermutation { positive_images: images }
    }

    pub fn map_clause(&self, clause: &Clause) -> Clause {
        clause.map(|l| self.apply(l))
    }

    /// `g(φ)`: the matrix rewritten literal by literal, same prefix.
    pub fn map_matrix(&self, dqbf: &Dqbf) -> Dqbf {
        Dqbf::new(
            dqbf.prefix().clone(),
            dqbf.matrix().iter().map(|c| self.map_clause(c)).collect(),
        )
        .expect("a literal permutation keeps variables in range")
    }
}

impl fmt::Display for LiteralPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut moved = false;
        for v in 1..=self.variable_count() as Var {
            if self.moves(v) {
                if moved {
                    write!(f, " ")?;
                }
                write!(f, "{}->{}", v, self.apply_var(v))?;
                moved = true;
            }
        }
        if !moved {
            write!(f, "id")?;
        }
        Ok(())
    }
}

/// Reads the literal permutation off a graph automorphism via its action on
/// the literal nodes.
///
/// Color-valid automorphisms always map literal nodes to literal nodes; the
/// `InternalInconsistency` error guards against anything else.
pub fn extract_literal_permutation(
    auto: &VertexPermutation,
    graph: &ColoredDigraph,
) -> Result<LiteralPermutation, SymmetryError> {
    let mut variable_count = 0usize;
    for v in 0..graph.vertex_count() as u32 {
        if let VertexKind::Var(x) = graph.kind(v) {
            variable_count = variable_count.max(x as usize);
        }
    }
    let mut images = vec![Literal::positive(1); variable_count];
    for v in 0..graph.vertex_count() as u32 {
        if let VertexKind::Pos(x) = graph.kind(v) {
            let target = auto.apply(v);
            let image = match graph.kind(target) {
                VertexKind::Pos(y) => Literal::positive(y),
                VertexKind::Neg(y) => Literal::negative(y),
                other => {
                    return Err(SymmetryError::InternalInconsistency(format!(
                        "literal node +{x} maps to {other}"
                    )))
                }
            };
            images[x as usize - 1] = image;
        }
    }
    LiteralPermutation::from_positive_images(images)
}

/// Admissibility of a literal permutation for a prefix: quantifier types are
/// preserved and dependencies follow the permutation - whenever `x ∈ D_j`,
/// the variable of `g(x)` lies in the dependency set of the existential that
/// `g(y_j)` maps to.
pub fn check_admissible(prefix: &Prefix, perm: &LiteralPermutation) -> bool {
    for &x in prefix.universals() {
        if !prefix.is_universal(perm.apply_var(x).var()) {
            return false;
        }
    }
    for e in prefix.existentials() {
        let image_var = perm.apply_var(e.var).var();
        let image_pos = match prefix.existential_position(image_var) {
            Some(p) => p,
            None => return false,
        };
        let image_deps = prefix.dependencies(image_pos);
        for &x in &e.deps {
            if !image_deps.contains(&perm.apply_var(x).var()) {
                return false;
            }
        }
    }
    true
}

/// Syntactic-symmetry check: the permuted clause multiset equals the
/// original one. This is the exact property graph automorphisms guarantee;
/// symmetries that only preserve logical equivalence are out of reach here.
pub fn check_syntactic(dqbf: &Dqbf, perm: &LiteralPermutation) -> bool {
    let mut original: Vec<&Clause> = dqbf.matrix().iter().collect();
    let mut mapped: Vec<Clause> = dqbf.matrix().iter().map(|c| perm.map_clause(c)).collect();
    original.sort_unstable();
    mapped.sort_unstable();
    original.into_iter().eq(mapped.iter())
}

/// The breaker-theorem side conditions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Condition {
    /// Each dependency set is closed under the permutation.
    C1,
    /// Each existential maps to an existential with the same dependency set.
    C2,
    /// Moving an existential forbids touching incomparable positions.
    C3,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::C1 => write!(f, "C1"),
            Condition::C2 => write!(f, "C2"),
            Condition::C3 => write!(f, "C3"),
        }
    }
}

/// Outcome of [`filter_eligible`]. Witness semantics: for `C1` the pair is
/// `(existential position, universal variable)`, for `C2`
/// `(existential position, image variable)`, for `C3` the two existential
/// positions `(i, j)`. Positions are 1-based in the sorted prefix.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EligibilityVerdict {
    Eligible,
    Violated {
        condition: Condition,
        witness: (usize, usize),
    },
}

impl EligibilityVerdict {
    pub fn is_eligible(&self) -> bool {
        matches!(self, EligibilityVerdict::Eligible)
    }

    pub fn violated_condition(&self) -> Option<Condition> {
        match self {
            EligibilityVerdict::Eligible => None,
            EligibilityVerdict::Violated { condition, .. } => Some(*condition),
        }
    }

    pub fn witness(&self) -> Option<(usize, usize)> {
        match self {
            EligibilityVerdict::Eligible => None,
            EligibilityVerdict::Violated { witness, .. } => Some(*witness),
        }
    }
}

impl fmt::Display for EligibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EligibilityVerdict::Eligible => write!(f, "eligible"),
            EligibilityVerdict::Violated { condition, witness } => {
                write!(f, "violates {condition} at ({}, {})", witness.0, witness.1)
            }
        }
    }
}

/// Checks the three breaker conditions for an admissible literal permutation
/// over a topologically sorted prefix, reporting the first violation.
///
/// Specialised to literal permutations the conditions read: (C1) for every
/// `i` and `x ∈ D_i` the variable of `g(x)` stays in `D_i`; (C2) the variable
/// of `g(y_i)` is an existential with exactly the dependency set `D_i`; (C3)
/// for incomparable `D_i, D_j`, if `g` moves `y_i` then `y_j` and every
/// `x ∈ D_j ∖ D_i` stay fixed.
pub fn filter_eligible(prefix: &Prefix, perm: &LiteralPermutation) -> EligibilityVerdict {
    assert!(
        prefix.is_topologically_sorted(),
        "eligibility is defined over a topologically sorted prefix"
    );
    let es = prefix.existentials();

    for (i, e) in es.iter().enumerate() {
        for &x in &e.deps {
            if !e.deps.contains(&perm.apply_var(x).var()) {
                return EligibilityVerdict::Violated {
                    condition: Condition::C1,
                    witness: (i + 1, x as usize),
                };
            }
        }
    }

    for (i, e) in es.iter().enumerate() {
        let image_var = perm.apply_var(e.var).var();
        let same_deps = prefix
            .existential_position(image_var)
            .is_some_and(|p| prefix.dependencies(p) == &e.deps);
        if !same_deps {
            return EligibilityVerdict::Violated {
                condition: Condition::C2,
                witness: (i + 1, image_var as usize),
            };
        }
    }

    for (i, ei) in es.iter().enumerate() {
        if !perm.moves(ei.var) {
            continue;
        }
        for (j, ej) in es.iter().enumerate() {
            if i == j {
                continue;
            }
            let comparable = ei.deps.is_subset(&ej.deps) || ej.deps.is_subset(&ei.deps);
            if comparable {
                continue;
            }
            let fixed_y = !perm.moves(ej.var);
            let fixed_block = ej.deps.difference(&ei.deps).all(|&x| !perm.moves(x));
            if !fixed_y || !fixed_block {
                return EligibilityVerdict::Violated {
                    condition: Condition::C3,
                    witness: (i + 1, j + 1),
                };
            }
        }
    }

    EligibilityVerdict::Eligible
}

/// Closes a set of literal permutations over `variable_count` variables
/// under composition; `None` once the closure exceeds `cap` elements. The
/// result is sorted for determinism and always contains the identity.
pub fn close_under_composition(
    perms: &[LiteralPermutation],
    variable_count: usize,
    cap: usize,
) -> Option<Vec<LiteralPermutation>> {
    use std::collections::BTreeSet;
    let m = variable_count;
    let key = |p: &LiteralPermutation| -> Vec<Literal> {
        (1..=m as Var).map(|v| p.apply_var(v)).collect()
    };
    let identity = LiteralPermutation::identity(m);
    let mut seen: BTreeSet<Vec<Literal>> = BTreeSet::new();
    let mut elements = vec![identity.clone()];
    seen.insert(key(&identity));
    let mut frontier = vec![identity];
    while let Some(p) = frontier.pop() {
        for g in perms {
            let q = p.then(g);
            if seen.insert(key(&q)) {
                if seen.len() > cap {
                    return None;
                }
                elements.push(q.clone());
                frontier.push(q);
            }
        }
    }
    elements.sort_by_key(|p| key(p));
    Some(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autom::find_automorphisms;
    use crate::formula::{Dqbf, Existential, Prefix};
    use crate::generators::fixtures;
    use crate::graph::build_graph;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    #[test]
    fn permutation_basics() {
        let swap = LiteralPermutation::from_moves(2, &[(1, lit(2)), (2, lit(1))]).unwrap();
        assert_eq!(swap.apply(lit(-1)), lit(-2));
        assert_eq!(swap.then(&swap), LiteralPermutation::identity(2));
        assert_eq!(swap.inverse(), swap);
        let flip = LiteralPermutation::from_moves(2, &[(1, lit(-1))]).unwrap();
        assert_eq!(flip.apply(lit(-1)), lit(1));
        assert_eq!(flip.inverse(), flip);
        let mixed = LiteralPermutation::from_moves(2, &[(1, lit(-2)), (2, lit(1))]).unwrap();
        assert_eq!(mixed.inverse().apply(lit(-2)), lit(1));
        assert!(LiteralPermutation::from_moves(2, &[(1, lit(2))]).is_err());
    }

    #[test]
    fn extraction_from_graph_example() {
        let f = fixtures::x_swap_triple();
        let g = build_graph(&f);
        let report = find_automorphisms(&g).unwrap();
        assert_eq!(report.generators.len(), 1);
        let perm = extract_literal_permutation(&report.generators[0], &g).unwrap();
        assert_eq!(perm.apply_var(1), lit(2));
        assert_eq!(perm.apply_var(2), lit(1));
        assert_eq!(perm.apply_var(3), lit(3));
    }

    #[test]
    fn extraction_of_identity_and_flip() {
        let f = fixtures::x_swap_triple();
        let g = build_graph(&f);
        let id = VertexPermutation::identity(g.vertex_count());
        assert!(extract_literal_permutation(&id, &g).unwrap().is_identity());

        // a one-variable formula whose gadget can be flipped
        let flip_f = Dqbf::new(Prefix::new(vec![1], vec![]).unwrap(), vec![]).unwrap();
        let fg = build_graph(&flip_f);
        // vertices: var=0, +1=1, -1=2; swap the literal nodes
        let flip = VertexPermutation::from_image(vec![0, 2, 1]).unwrap();
        assert!(flip.is_automorphism_of(&fg));
        let perm = extract_literal_permutation(&flip, &fg).unwrap();
        assert_eq!(perm.apply_var(1), lit(-1));
    }

    #[test]
    fn admissibility_examples() {
        let e3 = fixtures::or_pair();
        let p = e3.prefix();
        let swap = LiteralPermutation::from_moves(4, &[(1, lit(2)), (2, lit(1)), (3, lit(4)), (4, lit(3))]).unwrap();
        assert!(check_admissible(p, &swap));

        let y_swap_only = LiteralPermutation::from_moves(4, &[(3, lit(4)), (4, lit(3))]).unwrap();
        assert!(!check_admissible(p, &y_swap_only));

        assert!(check_admissible(p, &LiteralPermutation::identity(4)));

        // existential image must stay existential
        let cross = LiteralPermutation::from_moves(4, &[(1, lit(3)), (3, lit(1))]).unwrap();
        assert!(!check_admissible(p, &cross));
    }

    #[test]
    fn syntactic_examples() {
        let e5 = fixtures::x_swap_triple();
        let swap = LiteralPermutation::from_moves(3, &[(1, lit(2)), (2, lit(1))]).unwrap();
        assert!(check_syntactic(&e5, &swap));
        let flip = LiteralPermutation::from_moves(3, &[(1, lit(-1))]).unwrap();
        assert!(!check_syntactic(&e5, &flip));
        assert!(check_syntactic(&e5, &LiteralPermutation::identity(3)));
    }

    #[test]
    fn eligibility_rejects_the_incomparable_flip() {
        let e4 = fixtures::incomparable_deps();
        let p = e4.prefix();
        assert!(p.is_topologically_sorted());
        let g = LiteralPermutation::from_moves(5, &[(2, lit(-2)), (5, lit(-5))]).unwrap();
        assert!(check_admissible(p, &g));
        assert!(check_syntactic(&e4, &g));
        assert_eq!(
            filter_eligible(p, &g),
            EligibilityVerdict::Violated {
                condition: Condition::C3,
                witness: (2, 1),
            }
        );
    }

    #[test]
    fn eligibility_rejects_dependency_escape() {
        let e3 = fixtures::or_pair();
        let swap = LiteralPermutation::from_moves(4, &[(1, lit(2)), (2, lit(1)), (3, lit(4)), (4, lit(3))]).unwrap();
        let verdict = filter_eligible(e3.prefix(), &swap);
        assert_eq!(verdict.violated_condition(), Some(Condition::C1));
        assert_eq!(verdict.witness(), Some((1, 1)));
    }

    #[test]
    fn eligibility_accepts_identity_everywhere() {
        for f in [
            fixtures::or_pair(),
            fixtures::unit_conjunction(),
            fixtures::incomparable_deps(),
            fixtures::x_swap_triple(),
        ] {
            let id = LiteralPermutation::identity(f.variable_count());
            assert!(filter_eligible(f.prefix(), &id).is_eligible());
        }
    }

    #[test]
    fn eligibility_rejects_c2_on_unequal_dependency_sets() {
        // an admissible permutation passing C1 always passes C2, so this
        // exercises the guard against non-admissible input
        let p = Prefix::new(
            vec![1],
            vec![Existential::new(2, []), Existential::new(3, [1])],
        )
        .unwrap();
        let swap = LiteralPermutation::from_moves(3, &[(2, lit(3)), (3, lit(2))]).unwrap();
        let verdict = filter_eligible(&p, &swap);
        assert_eq!(verdict.violated_condition(), Some(Condition::C2));
    }

    #[test]
    fn closure_generates_the_full_group() {
        let f = fixtures::x_swap_triple();
        let g = build_graph(&f);
        let report = find_automorphisms(&g).unwrap();
        let perms: Vec<LiteralPermutation> = report
            .generators
            .iter()
            .map(|a| extract_literal_permutation(a, &g).unwrap())
            .collect();
        let closure = close_under_composition(&perms, 3, 1000).unwrap();
        assert_eq!(closure.len(), 2);
        assert!(close_under_composition(&perms, 3, 1).is_none());
    }

    #[test]
    fn detector_output_is_sound_on_fixtures() {
        for f in [
            fixtures::or_pair(),
            fixtures::unit_conjunction(),
            fixtures::incomparable_deps(),
            fixtures::x_swap_triple(),
        ] {
            let g = build_graph(&f);
            let report = find_automorphisms(&g).unwrap();
            for auto in &report.generators {
                let perm = extract_literal_permutation(auto, &g).unwrap();
                assert!(check_admissible(f.prefix(), &perm), "{f:?} {perm}");
                assert!(check_syntactic(&f, &perm), "{f:?} {perm}");
            }
        }
    }
}
