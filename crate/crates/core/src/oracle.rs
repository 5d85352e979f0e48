//! Brute-force ground truth at desk scale: interpretation enumeration,
//! truth decisions with model witnesses, exhaustive literal-permutation
//! symmetry scans, and the semantic transport of interpretations along a
//! syntactic symmetry.
//!
//! The oracle is a test instrument, not a solver; budgets are explicit
//! parameters with conservative defaults.

use thiserror::Error;

use crate::formula::{
    induced_assignment_into, table_index, BoolExpr, Dqbf, FormulaError, FullAssignment,
    Interpretation, Literal, Prefix, Var,
};
use crate::symmetry::{check_admissible, check_syntactic, LiteralPermutation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("budget exceeded: {what} ({actual} > {limit})")]
    BudgetExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },
    #[error("transport is ill-defined at existential {existential}")]
    IllDefined { existential: Var },
}

impl From<FormulaError> for OracleError {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::BudgetExceeded { what, limit, actual } => {
                OracleError::BudgetExceeded { what, limit, actual }
            }
            FormulaError::Invalid(msg) => panic!("oracle received an invalid formula: {msg}"),
        }
    }
}

/// Enumeration budgets.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Guard on `2^n` universal-assignment enumeration.
    pub max_universals: u32,
    /// Guard on the number of interpretations scanned.
    pub max_interpretations: u128,
    /// Guard on `n + k` for the exhaustive symmetry scan.
    pub max_symmetry_variables: u32,
    /// Fan the interpretation scan out over rayon. Ignored without the
    /// `parallel` feature.
    pub parallel: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_universals: 24,
            max_interpretations: 1 << 20,
            max_symmetry_variables: 6,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl Budget {
    pub fn sequential() -> Self {
        Budget {
            parallel: false,
            ..Budget::default()
        }
    }
}

fn guard_universals(n: usize, budget: &Budget) -> Result<(), OracleError> {
    // hard cap keeps 1u64 << n well-defined whatever the budget allows
    if n as u128 > budget.max_universals.min(63) as u128 {
        return Err(OracleError::BudgetExceeded {
            what: "universal variables",
            limit: budget.max_universals.min(63) as u128,
            actual: n as u128,
        });
    }
    Ok(())
}

/// `Π_i 2^(2^|D_i|)`, or `None` on overflow.
pub fn interpretation_count(prefix: &Prefix) -> Option<u128> {
    let mut total: u128 = 1;
    for e in prefix.existentials() {
        let bits = 1u32.checked_shl(e.deps.len() as u32)?;
        if bits > 127 {
            return None;
        }
        total = total.checked_mul(1u128 << bits)?;
    }
    Some(total)
}

/// Decodes the interpretation of a given rank: the tables form a mixed-radix
/// counter with the first existential's table as the fastest digit and each
/// table read as a binary number, least significant entry first.
pub fn interpretation_at(prefix: &Prefix, mut rank: u128) -> Interpretation {
    let tables = prefix
        .existentials()
        .iter()
        .map(|e| {
            let len = 1usize << e.deps.len();
            let table = (0..len).map(|i| rank >> i & 1 == 1).collect();
            rank >>= len;
            table
        })
        .collect();
    Interpretation::new(prefix, tables).expect("decoded tables have the right shape")
}

/// Streams every interpretation exactly once in rank order.
pub fn enumerate_interpretations<'a>(
    prefix: &'a Prefix,
    budget: &Budget,
) -> Result<impl Iterator<Item = Interpretation> + 'a, OracleError> {
    let total = checked_interpretation_count(prefix, budget)?;
    Ok((0..total).map(move |rank| interpretation_at(prefix, rank)))
}

fn checked_interpretation_count(prefix: &Prefix, budget: &Budget) -> Result<u128, OracleError> {
    let total = interpretation_count(prefix).ok_or(OracleError::BudgetExceeded {
        what: "interpretations",
        limit: budget.max_interpretations,
        actual: u128::MAX,
    })?;
    if total > budget.max_interpretations {
        return Err(OracleError::BudgetExceeded {
            what: "interpretations",
            limit: budget.max_interpretations,
            actual: total,
        });
    }
    Ok(total)
}

/// Decides the truth of a formula by scanning all interpretations; returns
/// the first model in rank order as witness when true.
pub fn brute_truth(dqbf: &Dqbf, budget: &Budget) -> Result<(bool, Option<Interpretation>), OracleError> {
    brute_truth_filtered(dqbf, None, budget)
}

/// [`brute_truth`] of `P.(φ ∧ ψ)` for a structural extra formula `ψ` over
/// the same variables.
pub fn brute_truth_conjoined(
    dqbf: &Dqbf,
    extra: &BoolExpr,
    budget: &Budget,
) -> Result<(bool, Option<Interpretation>), OracleError> {
    brute_truth_filtered(dqbf, Some(extra), budget)
}

fn brute_truth_filtered(
    dqbf: &Dqbf,
    extra: Option<&BoolExpr>,
    budget: &Budget,
) -> Result<(bool, Option<Interpretation>), OracleError> {
    let n = dqbf.prefix().universal_count();
    guard_universals(n, budget)?;
    let total = checked_interpretation_count(dqbf.prefix(), budget)?;

    let is_model = |s: &Interpretation, full: &mut FullAssignment| -> bool {
        for bits in 0..1u64 << n {
            induced_assignment_into(dqbf.prefix(), s, bits, full);
            let holds = dqbf.matrix().iter().all(|c| c.is_satisfied_by(full))
                && extra.is_none_or(|e| e.eval(full));
            if !holds {
                return false;
            }
        }
        true
    };

    // scans ranks start..end, enumerating incrementally from one decode
    let scan = |start: u128, end: u128| -> Option<Interpretation> {
        let mut full = FullAssignment::new(dqbf.variable_count());
        let mut s = interpretation_at(dqbf.prefix(), start);
        for _ in start..end {
            if is_model(&s, &mut full) {
                return Some(s);
            }
            increment_tables(s.tables_mut());
        }
        None
    };

    #[cfg(feature = "parallel")]
    if budget.parallel {
        use rayon::prelude::*;
        let chunk: u128 = 4096;
        let chunks = total.div_ceil(chunk);
        let found = (0..chunks)
            .into_par_iter()
            .find_map_first(|c| scan(c * chunk, total.min((c + 1) * chunk)));
        return Ok((found.is_some(), found));
    }

    Ok(match scan(0, total) {
        Some(s) => (true, Some(s)),
        None => (false, None),
    })
}

/// Binary increment over the concatenated tables, first table fastest,
/// least significant entry first; wraps to all-false at the end.
fn increment_tables(tables: &mut [Vec<bool>]) {
    for table in tables.iter_mut() {
        for bit in table.iter_mut() {
            *bit = !*bit;
            if *bit {
                return;
            }
        }
    }
}

/// Exhaustively lists the literal-permutation symmetries of a formula: all
/// negation-compatible literal permutations that preserve quantifier types,
/// dependencies, and the clause multiset. Identity included.
pub fn brute_symmetries(dqbf: &Dqbf, budget: &Budget) -> Result<Vec<LiteralPermutation>, OracleError> {
    let prefix = dqbf.prefix();
    let m = prefix.variable_count();
    if m as u32 > budget.max_symmetry_variables {
        return Err(OracleError::BudgetExceeded {
            what: "symmetry scan variables",
            limit: budget.max_symmetry_variables as u128,
            actual: m as u128,
        });
    }
    let universals = prefix.universals().to_vec();
    let existential_vars: Vec<Var> = prefix.existentials().iter().map(|e| e.var).collect();

    let mut found = Vec::new();
    for u_perm in permutations(universals.len()) {
        for e_perm in permutations(existential_vars.len()) {
            for flips in 0..1u32 << m {
                let mut images = vec![Literal::positive(1); m];
                for (i, &u) in universals.iter().enumerate() {
                    images[u as usize - 1] = Literal::positive(universals[u_perm[i]]);
                }
                for (i, &e) in existential_vars.iter().enumerate() {
                    images[e as usize - 1] = Literal::positive(existential_vars[e_perm[i]]);
                }
                for (v, image) in images.iter_mut().enumerate() {
                    if flips >> v & 1 == 1 {
                        *image = image.negate();
                    }
                }
                let perm = LiteralPermutation::from_positive_images(images)
                    .expect("constructed from variable bijections");
                if check_admissible(prefix, &perm) && check_syntactic(dqbf, &perm) {
                    found.push(perm);
                }
            }
        }
    }
    Ok(found)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut result = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    loop {
        result.push(items.clone());
        // next lexicographic permutation
        let Some(i) = (0..n - 1).rev().find(|&i| items[i] < items[i + 1]) else {
            return result;
        };
        let j = (i + 1..n).rev().find(|&j| items[j] > items[i]).unwrap();
        items.swap(i, j);
        items[i + 1..].reverse();
    }
}

/// Transports an interpretation along an admissible literal permutation: the
/// unique `t` with `σ_t = g(g⁻¹(σ)_s)` for every universal assignment `σ`.
///
/// Computed by evaluating that identity over all `2^n` assignments and
/// reading off each existential's table; conflicting reads (impossible for
/// admissible `g`) surface as `IllDefined`.
pub fn transport_interpretation(
    prefix: &Prefix,
    g: &LiteralPermutation,
    s: &Interpretation,
    budget: &Budget,
) -> Result<Interpretation, OracleError> {
    let n = prefix.universal_count();
    guard_universals(n, budget)?;
    let g_inverse = g.inverse();
    let mut tables: Vec<Vec<Option<bool>>> = prefix
        .existentials()
        .iter()
        .map(|e| vec![None; 1 << e.deps.len()])
        .collect();
    let mut inner = FullAssignment::new(prefix.variable_count());
    for bits in 0..1u64 << n {
        let sigma_value = |v: Var| bits >> prefix.universal_position(v).unwrap() & 1 == 1;
        // ρ = g⁻¹(σ), evaluated variable-wise: ρ(x) = [g⁻¹(x)]_σ
        let mut rho_bits = 0u64;
        for (pos, &u) in prefix.universals().iter().enumerate() {
            let l = g_inverse.apply_var(u);
            if l.eval(sigma_value(l.var())) {
                rho_bits |= 1 << pos;
            }
        }
        induced_assignment_into(prefix, s, rho_bits, &mut inner);
        // σ_t(y_j) = [g(y_j)]_{ρ_s}
        for (j, e) in prefix.existentials().iter().enumerate() {
            let image = g.apply_var(e.var);
            let value = image.eval(inner.value(image.var()));
            let idx = table_index(&e.deps, sigma_value);
            match tables[j][idx] {
                None => tables[j][idx] = Some(value),
                Some(prev) if prev == value => {}
                Some(_) => return Err(OracleError::IllDefined { existential: e.var }),
            }
        }
    }
    let tables = tables
        .into_iter()
        .map(|t| t.into_iter().map(|v| v.unwrap_or(false)).collect())
        .collect();
    Ok(Interpretation::new(prefix, tables).expect("tables have the right shape"))
}

/// Checks the semantic transport identity for one generator and one
/// interpretation: `P.g(φ)` is true under `s` exactly when `P.φ` is true
/// under the transported interpretation `g(s)`.
pub fn check_transport_truth(
    dqbf: &Dqbf,
    g: &LiteralPermutation,
    s: &Interpretation,
    budget: &Budget,
) -> Result<bool, OracleError> {
    let mapped = g.map_matrix(dqbf);
    let lhs = crate::formula::truth_value(&mapped, s, budget.max_universals)?;
    let transported = transport_interpretation(dqbf.prefix(), g, s, budget)?;
    let rhs = crate::formula::truth_value(dqbf, &transported, budget.max_universals)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{truth_value, Clause, Existential};
    use crate::generators::fixtures;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    #[test]
    fn interpretation_counts() {
        let e1 = fixtures::or_pair();
        assert_eq!(interpretation_count(e1.prefix()), Some(16));

        let empty = Prefix::new(vec![1], vec![]).unwrap();
        assert_eq!(interpretation_count(&empty), Some(1));

        let free = Prefix::new(vec![1], vec![Existential::new(2, [])]).unwrap();
        assert_eq!(interpretation_count(&free), Some(2));
    }

    #[test]
    fn enumeration_yields_each_interpretation_once() {
        let e1 = fixtures::or_pair();
        let budget = Budget::default();
        let all: Vec<Interpretation> =
            enumerate_interpretations(e1.prefix(), &budget).unwrap().collect();
        assert_eq!(all.len(), 16);
        let mut dedup = all.clone();
        dedup.sort_by_key(|s| format!("{s}"));
        dedup.dedup();
        assert_eq!(dedup.len(), 16);
        // first existential's table is the fastest digit
        assert_eq!(all[0].table(0), &[false, false]);
        assert_eq!(all[1].table(0), &[true, false]);
        assert_eq!(all[1].table(1), &[false, false]);
    }

    #[test]
    fn incremental_enumeration_matches_rank_decoding() {
        let e1 = fixtures::or_pair();
        let p = e1.prefix();
        let mut s = interpretation_at(p, 0);
        for rank in 0..16 {
            assert_eq!(s, interpretation_at(p, rank));
            increment_tables(s.tables_mut());
        }
        // wraps around
        assert_eq!(s, interpretation_at(p, 0));
    }

    #[test]
    fn enumeration_budget() {
        let prefix = Prefix::new(
            vec![1, 2, 3],
            vec![
                Existential::new(4, [1, 2, 3]),
                Existential::new(5, [1, 2, 3]),
                Existential::new(6, [1, 2, 3]),
            ],
        )
        .unwrap();
        // 2^8 per table, three tables: 2^24 > 2^20
        assert!(matches!(
            enumerate_interpretations(&prefix, &Budget::default()).err(),
            Some(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn brute_truth_worked_examples() {
        let budget = Budget::default();

        let e1 = fixtures::or_pair();
        let (truth, witness) = brute_truth(&e1, &budget).unwrap();
        assert!(truth);
        let witness = witness.unwrap();
        assert_eq!(truth_value(&e1, &witness, 24), Ok(true));
        // (⊤, ¬x2) is one of the models
        let s_prime =
            Interpretation::new(e1.prefix(), vec![vec![true, true], vec![true, false]]).unwrap();
        assert_eq!(truth_value(&e1, &s_prime, 24), Ok(true));

        let e2 = fixtures::unit_conjunction();
        assert_eq!(brute_truth(&e2, &budget).unwrap(), (false, None));

        let e4 = fixtures::incomparable_deps();
        let (truth, witness) = brute_truth(&e4, &budget).unwrap();
        assert!(truth);
        assert_eq!(truth_value(&e4, &witness.unwrap(), 24), Ok(true));
        // s = (x2, x3) is a model
        let s = Interpretation::new(e4.prefix(), vec![vec![false, true], vec![false, true]]).unwrap();
        assert_eq!(truth_value(&e4, &s, 24), Ok(true));
    }

    #[test]
    fn brute_truth_conjoined_flips_on_bad_breaker() {
        // appending ¬y2 to the incomparable-deps formula makes it false
        let e4 = fixtures::incomparable_deps();
        let budget = Budget::default();
        let not_y2 = BoolExpr::lit(lit(-5));
        let (truth, witness) = brute_truth_conjoined(&e4, &not_y2, &budget).unwrap();
        assert!(!truth);
        assert!(witness.is_none());
    }

    #[test]
    fn witness_is_first_in_rank_order_regardless_of_parallelism() {
        let e1 = fixtures::or_pair();
        let seq = brute_truth(&e1, &Budget::sequential()).unwrap();
        let par = brute_truth(&e1, &Budget::default()).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn brute_symmetries_examples() {
        let budget = Budget::default();

        let e5 = fixtures::x_swap_triple();
        let syms = brute_symmetries(&e5, &budget).unwrap();
        assert_eq!(syms.len(), 2);
        assert!(syms.iter().any(|p| p.is_identity()));
        let swap = LiteralPermutation::from_moves(3, &[(1, lit(2)), (2, lit(1))]).unwrap();
        assert!(syms.contains(&swap));

        let e2 = fixtures::unit_conjunction();
        let syms = brute_symmetries(&e2, &budget).unwrap();
        assert_eq!(syms.len(), 1);
        assert!(syms[0].is_identity());

        let empty = Dqbf::new(Prefix::empty(), vec![]).unwrap();
        let syms = brute_symmetries(&empty, &budget).unwrap();
        assert_eq!(syms.len(), 1);
    }

    #[test]
    fn brute_symmetries_closed_under_composition_and_inverse() {
        let budget = Budget::default();
        for f in [fixtures::or_pair(), fixtures::x_swap_triple(), fixtures::incomparable_deps()] {
            let syms = brute_symmetries(&f, &budget).unwrap();
            for a in &syms {
                assert!(syms.contains(&a.inverse()));
                for b in &syms {
                    assert!(syms.contains(&a.then(b)));
                }
            }
        }
    }

    #[test]
    fn transport_examples() {
        let e3 = fixtures::or_pair();
        let p = e3.prefix();
        let budget = Budget::default();
        let g = LiteralPermutation::from_moves(
            4,
            &[(1, lit(2)), (2, lit(1)), (3, lit(4)), (4, lit(3))],
        )
        .unwrap();

        // s = (¬x1, x2) transports to (x1, ¬x2)
        let s = Interpretation::new(p, vec![vec![true, false], vec![false, true]]).unwrap();
        let t = transport_interpretation(p, &g, &s, &budget).unwrap();
        assert_eq!(t.table(0), &[false, true]);
        assert_eq!(t.table(1), &[true, false]);

        // s' = (¬x1, ⊤) transports to (⊤, ¬x2)
        let s2 = Interpretation::new(p, vec![vec![true, false], vec![true, true]]).unwrap();
        let t2 = transport_interpretation(p, &g, &s2, &budget).unwrap();
        assert_eq!(t2.table(0), &[true, true]);
        assert_eq!(t2.table(1), &[true, false]);

        // identity transports nothing
        let id = LiteralPermutation::identity(4);
        assert_eq!(transport_interpretation(p, &id, &s, &budget).unwrap(), s);
    }

    #[test]
    fn transport_rejects_non_admissible_maps() {
        // y1 observes x1 only; swapping the universals makes its transported
        // value depend on a variable outside the dependency set
        let p = Prefix::new(vec![1, 2], vec![Existential::new(3, [1])]).unwrap();
        let g = LiteralPermutation::from_moves(3, &[(1, lit(2)), (2, lit(1))]).unwrap();
        assert!(!check_admissible(&p, &g));
        let s = Interpretation::new(&p, vec![vec![false, true]]).unwrap();
        assert_eq!(
            transport_interpretation(&p, &g, &s, &Budget::default()),
            Err(OracleError::IllDefined { existential: 3 })
        );
    }

    #[test]
    fn transport_truth_examples() {
        let e3 = fixtures::or_pair();
        let p = e3.prefix();
        let budget = Budget::default();
        let g = LiteralPermutation::from_moves(
            4,
            &[(1, lit(2)), (2, lit(1)), (3, lit(4)), (4, lit(3))],
        )
        .unwrap();

        // both sides false for s = (¬x1, x2)
        let s = Interpretation::new(p, vec![vec![true, false], vec![false, true]]).unwrap();
        let mapped = g.map_matrix(&e3);
        assert_eq!(truth_value(&mapped, &s, 24), Ok(false));
        assert!(check_transport_truth(&e3, &g, &s, &budget).unwrap());

        // both sides true for s' = (¬x1, ⊤)
        let s2 = Interpretation::new(p, vec![vec![true, false], vec![true, true]]).unwrap();
        assert_eq!(truth_value(&mapped, &s2, 24), Ok(true));
        assert!(check_transport_truth(&e3, &g, &s2, &budget).unwrap());

        // identity holds for any formula and interpretation
        let id = LiteralPermutation::identity(4);
        for rank in 0..16 {
            let s = interpretation_at(p, rank);
            assert!(check_transport_truth(&e3, &id, &s, &budget).unwrap());
        }
    }

    #[test]
    fn truth_of_conjunction_splits_on_random_instances() {
        use crate::generators::{random_dqbf, RandomParams};
        let budget = Budget::default();
        let params = RandomParams {
            clause_count: 6,
            ..RandomParams::default()
        };
        for seed in 0..40 {
            let f = random_dqbf(seed, &params);
            let half = f.clause_count() / 2;
            let phi = Dqbf::new(f.prefix().clone(), f.matrix()[..half].to_vec()).unwrap();
            let psi = Dqbf::new(f.prefix().clone(), f.matrix()[half..].to_vec()).unwrap();
            for s in enumerate_interpretations(f.prefix(), &budget).unwrap() {
                let lhs = truth_value(&f, &s, 24).unwrap();
                let rhs =
                    truth_value(&phi, &s, 24).unwrap() && truth_value(&psi, &s, 24).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn empty_clause_is_always_false() {
        let f = Dqbf::new(
            Prefix::new(vec![1], vec![]).unwrap(),
            vec![Clause::new(vec![])],
        )
        .unwrap();
        assert_eq!(brute_truth(&f, &Budget::default()).unwrap(), (false, None));
    }
}
