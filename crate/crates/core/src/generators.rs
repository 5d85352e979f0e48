//! Test corpora: the crafted KBKF and parity QBF families (lifted to DQBF)
//! and seeded random DQBFs.

use rand::prelude::*;
use rand::rngs::StdRng;

use crate::formula::{Clause, Dqbf, Existential, Literal, Prefix, Var};

/// The KBKF family of false QBFs, lifted to DQBF.
///
/// Variables per level `i = 1..=n`: two existentials `d_i, e_i` and a
/// universal `x_i`, numbered `3(i-1)+1..3i`, plus innermost existentials
/// `f_1..f_n` numbered `3n+1..4n`. `d_i`/`e_i` depend on `x_1..x_{i-1}`,
/// every `f_j` on all universals. 4n variables, 4n+1 clauses.
pub fn kbkf(n: u32) -> Dqbf {
    assert!(n >= 1);
    let d = |i: u32| 3 * (i - 1) + 1;
    let e = |i: u32| 3 * (i - 1) + 2;
    let x = |i: u32| 3 * i;
    let f = |j: u32| 3 * n + j;

    let universals: Vec<Var> = (1..=n).map(x).collect();
    let mut existentials = Vec::new();
    for i in 1..=n {
        let deps: Vec<Var> = (1..i).map(x).collect();
        existentials.push(Existential::new(d(i), deps.clone()));
        existentials.push(Existential::new(e(i), deps));
    }
    for j in 1..=n {
        existentials.push(Existential::new(f(j), (1..=n).map(x)));
    }
    let prefix = Prefix::new(universals, existentials).unwrap();

    let pos = Literal::positive;
    let neg = Literal::negative;
    let mut matrix = vec![Clause::new(vec![neg(d(1)), neg(e(1))])];
    for i in 1..n {
        matrix.push(Clause::new(vec![pos(d(i)), pos(x(i)), neg(d(i + 1)), neg(e(i + 1))]));
        matrix.push(Clause::new(vec![pos(e(i)), neg(x(i)), neg(d(i + 1)), neg(e(i + 1))]));
    }
    let tail: Vec<Literal> = (1..=n).map(|j| neg(f(j))).collect();
    let mut last_d = vec![pos(d(n)), pos(x(n))];
    last_d.extend(tail.iter().copied());
    matrix.push(Clause::new(last_d));
    let mut last_e = vec![pos(e(n)), neg(x(n))];
    last_e.extend(tail.iter().copied());
    matrix.push(Clause::new(last_e));
    for j in 1..=n {
        matrix.push(Clause::new(vec![pos(x(j)), pos(f(j))]));
        matrix.push(Clause::new(vec![neg(x(j)), pos(f(j))]));
    }
    Dqbf::new(prefix, matrix).unwrap()
}

/// The parity family: `∃x_1..x_n ∀z ∃t_2..t_n` with `t_i` chained as the
/// xor of `x_1..x_i` and the requirement `z ≠ t_n`. 2n variables, 4n-2
/// clauses, false for every `n`.
pub fn parity(n: u32) -> Dqbf {
    assert!(n >= 1);
    let x = |i: u32| i;
    let z = n + 1;
    let t = |i: u32| n + i; // t_2..t_n at n+2..2n

    let mut existentials: Vec<Existential> = (1..=n).map(|i| Existential::new(x(i), [])).collect();
    for i in 2..=n {
        existentials.push(Existential::new(t(i), [z]));
    }
    let prefix = Prefix::new(vec![z], existentials).unwrap();

    let pos = Literal::positive;
    let neg = Literal::negative;
    let mut matrix = Vec::new();
    let mut xor = |out: Var, a: Var, b: Var| {
        matrix.push(Clause::new(vec![neg(out), pos(a), pos(b)]));
        matrix.push(Clause::new(vec![neg(out), neg(a), neg(b)]));
        matrix.push(Clause::new(vec![pos(out), neg(a), pos(b)]));
        matrix.push(Clause::new(vec![pos(out), pos(a), neg(b)]));
    };
    if n >= 2 {
        xor(t(2), x(1), x(2));
        for i in 3..=n {
            xor(t(i), t(i - 1), x(i));
        }
    }
    let last = if n == 1 { x(1) } else { t(n) };
    matrix.push(Clause::new(vec![pos(z), pos(last)]));
    matrix.push(Clause::new(vec![neg(z), neg(last)]));
    Dqbf::new(prefix, matrix).unwrap()
}

/// Parameters for [`random_dqbf`]. Bounds keep the instances inside the
/// brute-force oracle's budget.
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    /// Universal count, at most 3.
    pub universals: u32,
    /// Existential count, at most 2.
    pub existentials: u32,
    /// Maximum dependency-set size, at most 2.
    pub max_dependencies: u32,
    pub clause_count: u32,
    /// Clause lengths are drawn from `1..=max_clause_len`.
    pub max_clause_len: u32,
    /// Close the dependency structure and the clause set under the swap of
    /// the first two universals, planting a guaranteed symmetry.
    pub plant_symmetry: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            universals: 3,
            existentials: 2,
            max_dependencies: 2,
            clause_count: 6,
            max_clause_len: 3,
            plant_symmetry: false,
        }
    }
}

/// Seed-deterministic random DQBF. Universals are `1..=n`, existentials
/// `n+1..=n+k` with dependency sets drawn uniformly among the subsets of the
/// universals of size at most `max_dependencies`; clauses never repeat a
/// variable. With `plant_symmetry` (and `n ≥ 2`) the swap `x_1 ↔ x_2` is a
/// guaranteed syntactic symmetry: dependency sets treat `x_1, x_2`
/// symmetrically and the matrix is closed under the swap, at the price of up
/// to doubling `clause_count`.
pub fn random_dqbf(seed: u64, params: &RandomParams) -> Dqbf {
    assert!(params.universals <= 3, "universals capped at 3");
    assert!(params.existentials <= 2, "existentials capped at 2");
    assert!(params.max_dependencies <= 2, "dependency sets capped at 2");
    let mut rng = StdRng::seed_from_u64(seed);
    let n = params.universals;
    let k = params.existentials;
    let plant = params.plant_symmetry && n >= 2;

    let universals: Vec<Var> = (1..=n).collect();
    let existentials: Vec<Existential> = (n + 1..=n + k)
        .map(|v| {
            let max = params.max_dependencies.min(n) as usize;
            let size = rng.random_range(0..=max);
            let mut pool = universals.clone();
            pool.shuffle(&mut rng);
            let mut deps: Vec<Var> = pool.into_iter().take(size).collect();
            if plant && deps.contains(&1) != deps.contains(&2) {
                // symmetric dependency sets: both of x1, x2 or neither
                deps.retain(|&x| x != 1 && x != 2);
                if deps.is_empty() && rng.random_bool(0.5) {
                    deps.push(1);
                    deps.push(2);
                }
            }
            Existential::new(v, deps)
        })
        .collect();
    let prefix = Prefix::new(universals, existentials).unwrap();

    let total = n + k;
    let mut matrix = Vec::new();
    for _ in 0..params.clause_count {
        let len = rng.random_range(1..=params.max_clause_len.min(total).max(1));
        let mut vars: Vec<Var> = (1..=total).collect();
        vars.shuffle(&mut rng);
        let lits: Vec<Literal> = vars
            .into_iter()
            .take(len as usize)
            .map(|v| Literal::new(v, rng.random_bool(0.5)))
            .collect();
        matrix.push(Clause::new(lits));
    }
    if plant {
        let swap = |l: Literal| match l.var() {
            1 => Literal::new(2, l.is_negated()),
            2 => Literal::new(1, l.is_negated()),
            _ => l,
        };
        // closure is over the clause multiset, so drop duplicates first
        matrix.sort_unstable();
        matrix.dedup();
        let mut closed = matrix.clone();
        for c in &matrix {
            let mapped = c.map(swap);
            if !closed.contains(&mapped) {
                closed.push(mapped);
            }
        }
        matrix = closed;
    }
    Dqbf::new(prefix, matrix).unwrap()
}

/// Small named formulas used throughout the test suites.
pub mod fixtures {
    use super::*;

    /// `∀x1,x2 ∃y1({x1}), y2({x2}) . (x1 ∨ y1) ∧ (x2 ∨ y2)` - true, carries
    /// the admissible swap `x1↔x2, y1↔y2` which is not breaker-eligible.
    pub fn or_pair() -> Dqbf {
        let prefix = Prefix::new(
            vec![1, 2],
            vec![Existential::new(3, [1]), Existential::new(4, [2])],
        )
        .unwrap();
        let matrix = vec![
            Clause::new(vec![Literal::positive(1), Literal::positive(3)]),
            Clause::new(vec![Literal::positive(2), Literal::positive(4)]),
        ];
        Dqbf::new(prefix, matrix).unwrap()
    }

    /// `∀x ∃y({x}) . x ∧ y` - false, rigid up to nothing: its only
    /// literal-permutation symmetry is the identity.
    pub fn unit_conjunction() -> Dqbf {
        let prefix = Prefix::new(vec![1], vec![Existential::new(2, [1])]).unwrap();
        let matrix = vec![
            Clause::new(vec![Literal::positive(1)]),
            Clause::new(vec![Literal::positive(2)]),
        ];
        Dqbf::new(prefix, matrix).unwrap()
    }

    /// `∀x1,x2,x3 ∃y1({x2}), y2({x3})` over the CNF of
    /// `(x1 ↔ y1) ∨ (x2 ↔ y2) ∨ (x1 ↔ x3)` - true with model `(x2, x3)`;
    /// its dependency sets are incomparable and its flip symmetries violate
    /// the third breaker condition.
    pub fn incomparable_deps() -> Dqbf {
        let prefix = Prefix::new(
            vec![1, 2, 3],
            vec![Existential::new(4, [2]), Existential::new(5, [3])],
        )
        .unwrap();
        let lit = |v: i64| Literal::from_dimacs(v).unwrap();
        let matrix = vec![
            Clause::new(vec![lit(-1), lit(-2), lit(3), lit(4), lit(5)]),
            Clause::new(vec![lit(-1), lit(2), lit(3), lit(4), lit(-5)]),
            Clause::new(vec![lit(1), lit(-2), lit(-3), lit(-4), lit(5)]),
            Clause::new(vec![lit(1), lit(2), lit(-3), lit(-4), lit(-5)]),
        ];
        Dqbf::new(prefix, matrix).unwrap()
    }

    /// `∀x1,x2 ∃y1({x1,x2}) . (x1∨x2∨y1) ∧ (¬x1∨¬x2∨y1) ∧ (x1∨x2∨¬y1)` -
    /// the swap `x1↔x2` is its single nontrivial symmetry, and eligible.
    pub fn x_swap_triple() -> Dqbf {
        let prefix = Prefix::new(vec![1, 2], vec![Existential::new(3, [1, 2])]).unwrap();
        let lit = |v: i64| Literal::from_dimacs(v).unwrap();
        let matrix = vec![
            Clause::new(vec![lit(1), lit(2), lit(3)]),
            Clause::new(vec![lit(-1), lit(-2), lit(3)]),
            Clause::new(vec![lit(1), lit(2), lit(-3)]),
        ];
        Dqbf::new(prefix, matrix).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_symmetries, brute_truth, Budget};

    #[test]
    fn kbkf_counts_follow_the_family_pattern() {
        for n in [1u32, 2, 3, 5, 10, 20] {
            let f = kbkf(n);
            assert_eq!(f.variable_count() as u32, 4 * n, "vars of kbkf({n})");
            assert_eq!(f.clause_count() as u32, 4 * n + 1, "clauses of kbkf({n})");
            assert!(f.prefix().is_topologically_sorted());
        }
    }

    #[test]
    fn kbkf_small_members_are_false() {
        let budget = Budget::default();
        assert!(!brute_truth(&kbkf(1), &budget).unwrap().0);
        assert!(!brute_truth(&kbkf(2), &budget).unwrap().0);
    }

    #[test]
    fn parity_counts_follow_the_family_pattern() {
        for n in [1u32, 2, 3, 5, 10, 20] {
            let f = parity(n);
            assert_eq!(f.variable_count() as u32, 2 * n, "vars of parity({n})");
            assert_eq!(f.clause_count() as u32, 4 * n - 2, "clauses of parity({n})");
        }
    }

    #[test]
    fn parity_small_members_are_false() {
        // frozen regression values: the family is false for every n
        let budget = Budget::default();
        for n in 1..=3 {
            assert!(!brute_truth(&parity(n), &budget).unwrap().0, "parity({n})");
        }
    }

    #[test]
    fn kbkf_one_has_the_level_swap_symmetry() {
        let f = kbkf(1);
        let syms = brute_symmetries(&f, &Budget::default()).unwrap();
        // identity and (d1 e1)(x1 -x1)
        assert_eq!(syms.len(), 2);
    }

    #[test]
    fn random_is_deterministic() {
        let params = RandomParams::default();
        assert_eq!(random_dqbf(1, &params), random_dqbf(1, &params));
        assert_ne!(random_dqbf(1, &params), random_dqbf(2, &params));
    }

    #[test]
    fn planted_symmetry_is_found_by_the_oracle() {
        let params = RandomParams {
            plant_symmetry: true,
            ..RandomParams::default()
        };
        for seed in 0..20 {
            let f = random_dqbf(seed, &params);
            let syms = brute_symmetries(&f, &Budget::default()).unwrap();
            assert!(syms.len() >= 2, "seed {seed} lost its planted symmetry");
        }
    }

    #[test]
    fn empty_matrix_is_true() {
        let params = RandomParams {
            clause_count: 0,
            ..RandomParams::default()
        };
        let f = random_dqbf(3, &params);
        assert_eq!(f.clause_count(), 0);
        assert!(brute_truth(&f, &Budget::default()).unwrap().0);
    }

    #[test]
    fn random_respects_parameter_bounds() {
        let params = RandomParams::default();
        for seed in 0..50 {
            let f = random_dqbf(seed, &params);
            assert!(f.prefix().universal_count() <= 3);
            assert!(f.prefix().existential_count() <= 2);
            for e in f.prefix().existentials() {
                assert!(e.deps.len() <= 2);
            }
            for c in f.matrix() {
                assert!(c.len() <= 3);
                // no duplicate variables inside a clause
                let mut vars: Vec<Var> = c.literals().iter().map(|l| l.var()).collect();
                vars.dedup();
                assert_eq!(vars.len(), c.len());
            }
        }
    }
}
