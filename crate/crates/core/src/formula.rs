//! The DQBF data model: literals, clauses, prefixes with dependency sets,
//! interpretations (tuples of Skolem truth tables) and their exact semantics.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; all operations are pure functions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// 1-based variable index.
pub type Var = u32;

/// Default bound on the number of universal variables for which
/// [`truth_value`] is willing to enumerate all `2^n` assignments.
pub const DEFAULT_UNIVERSAL_GUARD: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("budget exceeded: {what} ({actual} > {limit})")]
    BudgetExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },
    #[error("invalid formula: {0}")]
    Invalid(String),
}

/// A variable or its negation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: Var,
    negated: bool,
}

impl Literal {
    pub fn new(var: Var, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated }
    }

    pub fn positive(var: Var) -> Self {
        Literal::new(var, false)
    }

    pub fn negative(var: Var) -> Self {
        Literal::new(var, true)
    }

    /// Parses a DIMACS-style signed integer; `None` for zero or out-of-range
    /// magnitudes.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > Var::MAX as u64 {
            return None;
        }
        Some(Literal::new(value.unsigned_abs() as Var, value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Flips only the polarity.
    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Truth of the literal given the truth of its variable.
    pub fn eval(self, var_value: bool) -> bool {
        var_value != self.negated
    }

}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept sorted by `(var, polarity)` and free of
/// duplicates. Tautological clauses (containing both `v` and `¬v`) are kept
/// verbatim so that serialisation round-trips.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(mut literals: Vec<Literal>) -> Self {
        literals.sort_unstable();
        literals.dedup();
        Clause { literals }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    pub fn is_tautology(&self) -> bool {
        self.literals
            .windows(2)
            .any(|w| w[0].var() == w[1].var())
    }

    /// Applies `f` to every literal and renormalises.
    pub fn map(&self, mut f: impl FnMut(Literal) -> Literal) -> Clause {
        Clause::new(self.literals.iter().map(|&l| f(l)).collect())
    }

    pub fn is_satisfied_by(&self, assignment: &FullAssignment) -> bool {
        self.literals
            .iter()
            .any(|l| l.eval(assignment.value(l.var())))
    }

    pub fn max_var(&self) -> Option<Var> {
        self.literals.iter().map(|l| l.var()).max()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// An existentially quantified variable together with its dependency set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Existential {
    pub var: Var,
    pub deps: BTreeSet<Var>,
}

impl Existential {
    pub fn new(var: Var, deps: impl IntoIterator<Item = Var>) -> Self {
        Existential {
            var,
            deps: deps.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Role {
    Universal(usize),
    Existential(usize),
}

/// The quantifier prefix `∀x_1..x_n ∃y_1(D_1)..y_k(D_k)`.
///
/// Universals are kept in ascending index order (their relative order carries
/// no semantics; truth-table bit order is fixed by variable index). The
/// existential list is ordered and its order is meaningful.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prefix {
    universals: Vec<Var>,
    existentials: Vec<Existential>,
    roles: Vec<Role>,
}

impl Prefix {
    pub fn new(mut universals: Vec<Var>, existentials: Vec<Existential>) -> Result<Self, FormulaError> {
        universals.sort_unstable();
        let total = universals.len() + existentials.len();
        let mut roles = vec![None; total];
        let mut place = |var: Var, role: Role| -> Result<(), FormulaError> {
            if var == 0 || var as usize > total {
                return Err(FormulaError::Invalid(format!(
                    "variable {var} outside 1..={total}"
                )));
            }
            let slot = &mut roles[var as usize - 1];
            if slot.is_some() {
                return Err(FormulaError::Invalid(format!("variable {var} quantified twice")));
            }
            *slot = Some(role);
            Ok(())
        };
        for (i, &u) in universals.iter().enumerate() {
            place(u, Role::Universal(i))?;
        }
        for (i, e) in existentials.iter().enumerate() {
            place(e.var, Role::Existential(i))?;
        }
        // coverage of 1..=total follows from the pigeonhole above
        let universal_set: BTreeSet<Var> = universals.iter().copied().collect();
        for e in &existentials {
            if !e.deps.is_subset(&universal_set) {
                return Err(FormulaError::Invalid(format!(
                    "dependency set of {} mentions non-universal variables",
                    e.var
                )));
            }
        }
        Ok(Prefix {
            universals,
            existentials,
            roles: roles.into_iter().map(|r| r.unwrap()).collect(),
        })
    }

    pub fn empty() -> Self {
        Prefix {
            universals: Vec::new(),
            existentials: Vec::new(),
            roles: Vec::new(),
        }
    }

    pub fn universal_count(&self) -> usize {
        self.universals.len()
    }

    pub fn existential_count(&self) -> usize {
        self.existentials.len()
    }

    pub fn variable_count(&self) -> usize {
        self.roles.len()
    }

    pub fn universals(&self) -> &[Var] {
        &self.universals
    }

    pub fn existentials(&self) -> &[Existential] {
        &self.existentials
    }

    pub fn is_universal(&self, var: Var) -> bool {
        matches!(self.role(var), Some(Role::Universal(_)))
    }

    pub fn is_existential(&self, var: Var) -> bool {
        matches!(self.role(var), Some(Role::Existential(_)))
    }

    /// Position of `var` in the existential list.
    pub fn existential_position(&self, var: Var) -> Option<usize> {
        match self.role(var) {
            Some(Role::Existential(i)) => Some(i),
            _ => None,
        }
    }

    pub fn universal_position(&self, var: Var) -> Option<usize> {
        match self.role(var) {
            Some(Role::Universal(i)) => Some(i),
            _ => None,
        }
    }

    pub fn dependencies(&self, position: usize) -> &BTreeSet<Var> {
        &self.existentials[position].deps
    }

    /// `D_i ⊊ D_j ⟹ i < j` for all pairs.
    pub fn is_topologically_sorted(&self) -> bool {
        let es = &self.existentials;
        for i in 0..es.len() {
            for j in 0..i {
                if es[i].deps.is_subset(&es[j].deps) && es[i].deps != es[j].deps {
                    return false;
                }
            }
        }
        true
    }

    fn role(&self, var: Var) -> Option<Role> {
        if var == 0 || var as usize > self.roles.len() {
            None
        } else {
            Some(self.roles[var as usize - 1])
        }
    }
}

/// Stably sorts the existentials by `(|D_i|, original position)`.
///
/// Returns the sorted prefix and the permutation mapping old existential
/// positions to new ones. The output satisfies `D_i ⊊ D_j ⟹ i < j` since a
/// proper subset has strictly smaller cardinality.
pub fn topological_sort(prefix: &Prefix) -> (Prefix, Vec<usize>) {
    let mut indexed: Vec<(usize, &Existential)> = prefix.existentials.iter().enumerate().collect();
    indexed.sort_by_key(|(pos, e)| (e.deps.len(), *pos));
    let mut old_to_new = vec![0; indexed.len()];
    for (new_pos, (old_pos, _)) in indexed.iter().enumerate() {
        old_to_new[*old_pos] = new_pos;
    }
    let sorted = Prefix::new(
        prefix.universals.clone(),
        indexed.into_iter().map(|(_, e)| e.clone()).collect(),
    )
    .expect("reordering existentials preserves prefix validity");
    (sorted, old_to_new)
}

/// A prenex CNF DQBF `P.φ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dqbf {
    prefix: Prefix,
    matrix: Vec<Clause>,
}

impl Dqbf {
    pub fn new(prefix: Prefix, matrix: Vec<Clause>) -> Result<Self, FormulaError> {
        let total = prefix.variable_count() as Var;
        for clause in &matrix {
            if let Some(v) = clause.max_var() {
                if v > total {
                    return Err(FormulaError::Invalid(format!(
                        "clause mentions variable {v}, prefix quantifies only 1..={total}"
                    )));
                }
            }
        }
        Ok(Dqbf { prefix, matrix })
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn matrix(&self) -> &[Clause] {
        &self.matrix
    }

    pub fn clause_count(&self) -> usize {
        self.matrix.len()
    }

    pub fn variable_count(&self) -> usize {
        self.prefix.variable_count()
    }

    /// The same matrix under the topologically sorted prefix.
    pub fn sorted(&self) -> (Dqbf, Vec<usize>) {
        let (prefix, perm) = topological_sort(&self.prefix);
        (
            Dqbf {
                prefix,
                matrix: self.matrix.clone(),
            },
            perm,
        )
    }
}

/// An assignment of the universal variables, bit-packed over the ascending
/// universal list (bit `i` is the value of `universals[i]`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Assignment<'a> {
    universals: &'a [Var],
    bits: u64,
}

impl<'a> Assignment<'a> {
    pub fn new(universals: &'a [Var], bits: u64) -> Self {
        assert!(universals.len() <= 64, "at most 64 universal variables");
        Assignment { universals, bits }
    }

    pub fn for_prefix(prefix: &'a Prefix, bits: u64) -> Self {
        Assignment::new(prefix.universals(), bits)
    }

    pub fn value(&self, var: Var) -> bool {
        let pos = self
            .universals
            .binary_search(&var)
            .expect("variable not in the universal set");
        self.bits >> pos & 1 == 1
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn universals(&self) -> &'a [Var] {
        self.universals
    }

    /// All `2^n` assignments in ascending bit order.
    pub fn enumerate(universals: &'a [Var]) -> impl Iterator<Item = Assignment<'a>> {
        assert!(universals.len() < 64);
        (0..1u64 << universals.len()).map(move |bits| Assignment::new(universals, bits))
    }
}

/// A total assignment of all variables `1..=m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FullAssignment {
    values: Vec<bool>,
}

impl FullAssignment {
    pub fn new(variable_count: usize) -> Self {
        FullAssignment {
            values: vec![false; variable_count],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        FullAssignment { values }
    }

    pub fn variable_count(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var as usize - 1]
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var as usize - 1] = value;
    }
}

/// One truth table per existential variable: table `i` has `2^|D_i|` entries,
/// indexed by the values of `D_i` in ascending variable order, least
/// significant bit first.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interpretation {
    tables: Vec<Vec<bool>>,
}

impl Interpretation {
    pub fn new(prefix: &Prefix, tables: Vec<Vec<bool>>) -> Result<Self, FormulaError> {
        if tables.len() != prefix.existential_count() {
            return Err(FormulaError::Invalid(format!(
                "expected {} tables, got {}",
                prefix.existential_count(),
                tables.len()
            )));
        }
        for (e, t) in prefix.existentials().iter().zip(&tables) {
            let want = 1usize << e.deps.len();
            if t.len() != want {
                return Err(FormulaError::Invalid(format!(
                    "table for {} must have {} entries, got {}",
                    e.var,
                    want,
                    t.len()
                )));
            }
        }
        Ok(Interpretation { tables })
    }

    /// The interpretation assigning `value` everywhere.
    pub fn constant(prefix: &Prefix, value: bool) -> Self {
        Interpretation {
            tables: prefix
                .existentials()
                .iter()
                .map(|e| vec![value; 1 << e.deps.len()])
                .collect(),
        }
    }

    pub fn tables(&self) -> &[Vec<bool>] {
        &self.tables
    }

    pub fn table(&self, position: usize) -> &[bool] {
        &self.tables[position]
    }

    /// In-crate access for the oracle's incremental enumeration; callers
    /// must keep table lengths intact.
    pub(crate) fn tables_mut(&mut self) -> &mut [Vec<bool>] {
        &mut self.tables
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "s{}=", i + 1)?;
            for &b in t {
                write!(f, "{}", b as u8)?;
            }
        }
        Ok(())
    }
}

/// Truth table index for a dependency set under `value_of`, ascending
/// variable order, least significant bit first.
pub(crate) fn table_index(deps: &BTreeSet<Var>, mut value_of: impl FnMut(Var) -> bool) -> usize {
    let mut idx = 0;
    for (bit, &v) in deps.iter().enumerate() {
        idx |= (value_of(v) as usize) << bit;
    }
    idx
}

/// Extends `sigma` to all variables using the Skolem tables of `s`.
pub fn induced_assignment(prefix: &Prefix, s: &Interpretation, sigma: &Assignment) -> FullAssignment {
    let mut full = FullAssignment::new(prefix.variable_count());
    induced_assignment_into(prefix, s, sigma.bits(), &mut full);
    full
}

pub(crate) fn induced_assignment_into(
    prefix: &Prefix,
    s: &Interpretation,
    sigma_bits: u64,
    out: &mut FullAssignment,
) {
    for (pos, &u) in prefix.universals().iter().enumerate() {
        out.set(u, sigma_bits >> pos & 1 == 1);
    }
    for (j, e) in prefix.existentials().iter().enumerate() {
        let idx = table_index(&e.deps, |v| {
            let pos = prefix.universal_position(v).expect("dependency is universal");
            sigma_bits >> pos & 1 == 1
        });
        out.set(e.var, s.table(j)[idx]);
    }
}

/// CNF evaluation: true iff every clause contains a satisfied literal.
pub fn eval_matrix(dqbf: &Dqbf, assignment: &FullAssignment) -> bool {
    dqbf.matrix().iter().all(|c| c.is_satisfied_by(assignment))
}

/// `[Φ]_s`: the conjunction of the matrix value over all `2^n` induced
/// assignments. Errors once the universal count exceeds `max_universals`.
pub fn truth_value(dqbf: &Dqbf, s: &Interpretation, max_universals: u32) -> Result<bool, FormulaError> {
    let n = dqbf.prefix().universal_count();
    guard_universals(n, max_universals)?;
    let mut full = FullAssignment::new(dqbf.variable_count());
    for bits in 0..1u64 << n {
        induced_assignment_into(dqbf.prefix(), s, bits, &mut full);
        if !eval_matrix(dqbf, &full) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Like [`truth_value`] but with the matrix conjoined with an extra formula.
pub fn truth_value_conjoined(
    dqbf: &Dqbf,
    extra: &BoolExpr,
    s: &Interpretation,
    max_universals: u32,
) -> Result<bool, FormulaError> {
    let n = dqbf.prefix().universal_count();
    guard_universals(n, max_universals)?;
    let mut full = FullAssignment::new(dqbf.variable_count());
    for bits in 0..1u64 << n {
        induced_assignment_into(dqbf.prefix(), s, bits, &mut full);
        if !eval_matrix(dqbf, &full) || !extra.eval(&full) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parallel [`truth_value`]; identical result, assignments are scanned in
/// chunks across threads.
#[cfg(feature = "parallel")]
pub fn truth_value_par(dqbf: &Dqbf, s: &Interpretation, max_universals: u32) -> Result<bool, FormulaError> {
    use rayon::prelude::*;

    let n = dqbf.prefix().universal_count();
    guard_universals(n, max_universals)?;
    let total = 1u64 << n;
    let chunk = 1u64 << n.saturating_sub(8).min(16);
    let chunks = total.div_ceil(chunk);
    Ok((0..chunks).into_par_iter().all(|c| {
        let mut full = FullAssignment::new(dqbf.variable_count());
        (c * chunk..total.min((c + 1) * chunk)).all(|bits| {
            induced_assignment_into(dqbf.prefix(), s, bits, &mut full);
            eval_matrix(dqbf, &full)
        })
    }))
}

fn guard_universals(n: usize, max_universals: u32) -> Result<(), FormulaError> {
    // the hard cap keeps 1u64 << n well-defined whatever the caller allows
    if n as u128 > max_universals.min(63) as u128 {
        return Err(FormulaError::BudgetExceeded {
            what: "universal variables",
            limit: max_universals.min(63) as u128,
            actual: n as u128,
        });
    }
    Ok(())
}

/// A propositional formula over literals; used for the structural (non-CNF)
/// form of symmetry breakers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BoolExpr {
    Const(bool),
    Lit(Literal),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn lit(l: Literal) -> Self {
        BoolExpr::Lit(l)
    }

    pub fn and(mut items: Vec<BoolExpr>) -> Self {
        match items.len() {
            0 => BoolExpr::Const(true),
            1 => items.pop().unwrap(),
            _ => BoolExpr::And(items),
        }
    }

    pub fn or(mut items: Vec<BoolExpr>) -> Self {
        match items.len() {
            0 => BoolExpr::Const(false),
            1 => items.pop().unwrap(),
            _ => BoolExpr::Or(items),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(a))
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Iff(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, a: &FullAssignment) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Lit(l) => l.eval(a.value(l.var())),
            BoolExpr::Not(e) => !e.eval(a),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(a)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(a)),
            BoolExpr::Implies(p, q) => !p.eval(a) || q.eval(a),
            BoolExpr::Iff(p, q) => p.eval(a) == q.eval(a),
        }
    }
}
