//! Conjunctive symmetry breakers.
//!
//! For every eligible generator `g` and every existential position `i` the
//! breaker conjoins
//!
//! ```text
//! (⋀_{x∈D_i} (x ↔ g(x)) ∧ ⋀_{j<i} (y_j ↔ g(y_j)))  →  (y_i → g(y_i))
//! ```
//!
//! over a topologically sorted prefix. [`build_breaker_formula`] returns this
//! formula structurally; [`encode_cnf`] produces the clause form with a chain
//! of fresh `z` variables tracking the antecedent prefix-equivalences, one
//! per moved position of the variable order, and [`apply`] conjoins the
//! result onto a formula, extending the prefix with the fresh existentials.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{BoolExpr, Clause, Dqbf, Existential, Literal, Prefix, Var};
use crate::symmetry::{filter_eligible, Condition, EligibilityVerdict, LiteralPermutation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BreakerError {
    #[error("prefix is not topologically sorted")]
    NotSorted,
    #[error("generator {index} is not eligible: violates {condition} at ({}, {})", witness.0, witness.1)]
    IneligibleGenerator {
        index: usize,
        condition: Condition,
        witness: (usize, usize),
    },
    #[error("fresh variables must extend the numbering: expected {expected}, artifact starts after {found}")]
    VariableCollision { expected: usize, found: usize },
}

/// The breaker's variable order: the block `D_1` ascending, then `y_1`, then
/// `D_2 ∖ D_1` ascending, then `y_2`, and so on. Universals outside every
/// dependency set do not appear.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VariableOrder {
    order: Vec<Var>,
    /// 1-based position `d_i` of the i-th existential; `d_i = |D_1∪…∪D_i| + i`.
    existential_positions: Vec<usize>,
}

impl VariableOrder {
    pub fn variables(&self) -> &[Var] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based position of the `i`-th existential (0-based `i`).
    pub fn existential_position(&self, i: usize) -> usize {
        self.existential_positions[i]
    }
}

impl fmt::Display for VariableOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.order.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Builds the block variable order of a topologically sorted prefix.
pub fn variable_order(prefix: &Prefix) -> Result<VariableOrder, BreakerError> {
    if !prefix.is_topologically_sorted() {
        return Err(BreakerError::NotSorted);
    }
    let mut order: Vec<Var> = Vec::new();
    let mut positions = Vec::with_capacity(prefix.existential_count());
    let mut covered: BTreeSet<Var> = BTreeSet::new();
    for e in prefix.existentials() {
        order.extend(e.deps.iter().copied().filter(|x| !covered.contains(x)));
        covered.extend(e.deps.iter().copied());
        order.push(e.var);
        positions.push(order.len());
    }
    Ok(VariableOrder {
        order,
        existential_positions: positions,
    })
}

fn ensure_eligible(prefix: &Prefix, generators: &[LiteralPermutation]) -> Result<(), BreakerError> {
    for (index, g) in generators.iter().enumerate() {
        if let EligibilityVerdict::Violated { condition, witness } = filter_eligible(prefix, g) {
            return Err(BreakerError::IneligibleGenerator {
                index,
                condition,
                witness,
            });
        }
    }
    Ok(())
}

fn moves_some_existential(prefix: &Prefix, g: &LiteralPermutation) -> bool {
    prefix.existentials().iter().any(|e| g.moves(e.var))
}

/// The breaker as a structural formula over the original variables.
///
/// Conjuncts whose consequent is trivial (`g(y_i) = y_i`) are omitted, and a
/// generator fixing every existential drops out entirely.
pub fn build_breaker_formula(
    prefix: &Prefix,
    generators: &[LiteralPermutation],
) -> Result<BoolExpr, BreakerError> {
    if !prefix.is_topologically_sorted() {
        return Err(BreakerError::NotSorted);
    }
    ensure_eligible(prefix, generators)?;
    let mut conjuncts = Vec::new();
    for g in generators {
        if !moves_some_existential(prefix, g) {
            continue;
        }
        for (i, e) in prefix.existentials().iter().enumerate() {
            if !g.moves(e.var) {
                continue;
            }
            let mut antecedent = Vec::new();
            for &x in &e.deps {
                antecedent.push(BoolExpr::iff(
                    BoolExpr::lit(Literal::positive(x)),
                    BoolExpr::lit(g.apply_var(x)),
                ));
            }
            for earlier in &prefix.existentials()[..i] {
                antecedent.push(BoolExpr::iff(
                    BoolExpr::lit(Literal::positive(earlier.var)),
                    BoolExpr::lit(g.apply_var(earlier.var)),
                ));
            }
            conjuncts.push(BoolExpr::implies(
                BoolExpr::and(antecedent),
                BoolExpr::implies(
                    BoolExpr::lit(Literal::positive(e.var)),
                    BoolExpr::lit(g.apply_var(e.var)),
                ),
            ));
        }
    }
    Ok(BoolExpr::and(conjuncts))
}

/// A fresh chain variable with its dependency set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreshVariable {
    pub var: Var,
    pub deps: BTreeSet<Var>,
}

/// The clauses and fresh variables contributed by one generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratorBreaker {
    pub permutation: LiteralPermutation,
    pub fresh: Vec<FreshVariable>,
    pub clauses: Vec<Clause>,
}

/// The CNF symmetry breaker: fresh `z` variables per used generator plus the
/// clauses to conjoin. Clauses of one generator never mention another
/// generator's chain variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BreakerArtifact {
    base_variable_count: usize,
    generators: Vec<GeneratorBreaker>,
}

impl BreakerArtifact {
    pub fn base_variable_count(&self) -> usize {
        self.base_variable_count
    }

    pub fn generator_breakers(&self) -> &[GeneratorBreaker] {
        &self.generators
    }

    pub fn used_generators(&self) -> impl Iterator<Item = &LiteralPermutation> {
        self.generators.iter().map(|g| &g.permutation)
    }

    pub fn used_generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn fresh_variables(&self) -> impl Iterator<Item = &FreshVariable> {
        self.generators.iter().flat_map(|g| g.fresh.iter())
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.generators.iter().flat_map(|g| g.clauses.iter())
    }

    pub fn added_variable_count(&self) -> usize {
        self.generators.iter().map(|g| g.fresh.len()).sum()
    }

    pub fn added_clause_count(&self) -> usize {
        self.generators.iter().map(|g| g.clauses.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Reference to the previous chain variable; the chain starts at ⊤ and fixed
/// positions alias instead of allocating.
#[derive(Clone, Copy)]
enum ChainLink {
    Top,
    Z(Var),
}

/// CNF encoding of the breaker over the given variable order.
///
/// Per generator `g`, walking the order positions `j = 1..m`: a moved
/// position below the last allocates a fresh `z_j` (dependency set: the
/// universals at positions `≤ j`) and emits two chain clauses - for a
/// universal `v_j` the two 4-literal clauses
/// `(z_j ∨ ¬z_{j-1} ∨ v_j ∨ g(v_j))` and `(z_j ∨ ¬z_{j-1} ∨ ¬v_j ∨ ¬g(v_j))`,
/// for an existential `(z_j ∨ ¬z_{j-1} ∨ ¬v_j)` and `(z_j ∨ ¬z_{j-1} ∨ g(v_j))`;
/// fixed positions alias `z_j = z_{j-1}`. For each moved existential the
/// final clause `(¬z_{d_i-1} ∨ ¬y_i ∨ g(y_i))` is emitted. `¬z_0` literals
/// vanish because the chain starts at ⊤.
pub fn encode_cnf(
    prefix: &Prefix,
    generators: &[LiteralPermutation],
    order: &VariableOrder,
) -> Result<BreakerArtifact, BreakerError> {
    if !prefix.is_topologically_sorted() {
        return Err(BreakerError::NotSorted);
    }
    ensure_eligible(prefix, generators)?;

    let mut next_var = prefix.variable_count() as Var + 1;
    let mut breakers = Vec::new();
    for g in generators {
        if !moves_some_existential(prefix, g) {
            continue;
        }
        let mut fresh = Vec::new();
        let mut clauses = Vec::new();
        // chain[j] is z_j, 1-based; chain[0] = ⊤
        let mut chain = vec![ChainLink::Top];
        let mut universal_deps: BTreeSet<Var> = BTreeSet::new();

        let m = order.len();
        for (pos, &v) in order.variables().iter().enumerate() {
            let j = pos + 1;
            if prefix.is_universal(v) {
                universal_deps.insert(v);
            }
            let previous = chain[j - 1];
            if !g.moves(v) || j == m {
                // fixed positions collapse; the final position needs no chain
                chain.push(previous);
                continue;
            }
            let z = next_var;
            next_var += 1;
            fresh.push(FreshVariable {
                var: z,
                deps: universal_deps.clone(),
            });
            chain.push(ChainLink::Z(z));
            let head = Literal::positive(z);
            if prefix.is_universal(v) {
                let lit = Literal::positive(v);
                let a = chain_clause(head, previous, &[lit, g.apply(lit)]);
                let b = chain_clause(head, previous, &[lit.negate(), g.apply(lit).negate()]);
                // a polarity flip makes both clauses the same tautology
                if a == b {
                    clauses.push(a);
                } else {
                    clauses.push(a);
                    clauses.push(b);
                }
            } else {
                let lit = Literal::positive(v);
                clauses.push(chain_clause(head, previous, &[lit.negate()]));
                clauses.push(chain_clause(head, previous, &[g.apply(lit)]));
            }
        }

        for (i, e) in prefix.existentials().iter().enumerate() {
            if !g.moves(e.var) {
                continue;
            }
            let d = order.existential_position(i);
            let tail = [Literal::negative(e.var), g.apply_var(e.var)];
            let clause = match chain[d - 1] {
                ChainLink::Top => Clause::new(tail.to_vec()),
                ChainLink::Z(z) => {
                    let mut lits = vec![Literal::negative(z)];
                    lits.extend(tail);
                    Clause::new(lits)
                }
            };
            clauses.push(clause);
        }

        breakers.push(GeneratorBreaker {
            permutation: g.clone(),
            fresh,
            clauses,
        });
    }

    Ok(BreakerArtifact {
        base_variable_count: prefix.variable_count(),
        generators: breakers,
    })
}

fn chain_clause(head: Literal, previous: ChainLink, rest: &[Literal]) -> Clause {
    let mut lits = vec![head];
    if let ChainLink::Z(z) = previous {
        lits.push(Literal::negative(z));
    }
    lits.extend_from_slice(rest);
    Clause::new(lits)
}

/// Conjoins a breaker artifact onto a formula: the prefix is topologically
/// sorted and extended with the fresh existentials, the breaker clauses are
/// appended to the matrix.
pub fn apply(dqbf: &Dqbf, artifact: &BreakerArtifact) -> Result<Dqbf, BreakerError> {
    if artifact.base_variable_count != dqbf.variable_count() {
        return Err(BreakerError::VariableCollision {
            expected: dqbf.variable_count() + 1,
            found: artifact.base_variable_count + 1,
        });
    }
    for (offset, f) in artifact.fresh_variables().enumerate() {
        let expected = dqbf.variable_count() as Var + 1 + offset as Var;
        if f.var != expected {
            return Err(BreakerError::VariableCollision {
                expected: expected as usize,
                found: f.var as usize,
            });
        }
    }
    let (sorted, _) = dqbf.sorted();
    let mut existentials = sorted.prefix().existentials().to_vec();
    existentials.extend(
        artifact
            .fresh_variables()
            .map(|f| Existential::new(f.var, f.deps.iter().copied())),
    );
    let prefix = Prefix::new(sorted.prefix().universals().to_vec(), existentials)
        .expect("fresh variables extend the numbering consecutively");
    let mut matrix = sorted.matrix().to_vec();
    matrix.extend(artifact.clauses().cloned());
    Ok(Dqbf::new(prefix, matrix).expect("breaker clauses stay within the extended prefix"))
}
