//! Detect-and-break orchestration: graph construction, automorphism search,
//! literal-permutation extraction, eligibility filtering, and breaker
//! application, plus the order formatting shared by reports.

use num_bigint::BigUint;
use thiserror::Error;

use crate::autom::{find_automorphisms_with, AutomError, GroupReport, SearchLimits};
use crate::breaker::{apply, encode_cnf, variable_order, BreakerArtifact, BreakerError};
use crate::formula::{topological_sort, Dqbf, FormulaError, Prefix};
use crate::graph::build_graph;
use crate::symmetry::{
    check_admissible, check_syntactic, extract_literal_permutation, filter_eligible,
    EligibilityVerdict, LiteralPermutation, SymmetryError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Autom(#[from] AutomError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Breaker(#[from] BreakerError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Everything the `detect` step produces.
#[derive(Debug)]
pub struct Detection {
    pub sorted_prefix: Prefix,
    /// Maps original existential positions to sorted ones.
    pub sort_permutation: Vec<usize>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub group: GroupReport,
    /// Literal permutations of the group generators, in discovery order.
    pub generators: Vec<LiteralPermutation>,
    /// Eligibility verdicts, parallel to `generators`.
    pub verdicts: Vec<EligibilityVerdict>,
}

impl Detection {
    pub fn eligible_generators(&self) -> Vec<&LiteralPermutation> {
        self.generators
            .iter()
            .zip(&self.verdicts)
            .filter(|(_, v)| v.is_eligible())
            .map(|(g, _)| g)
            .collect()
    }

    pub fn eligible_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_eligible()).count()
    }
}

/// Builds the graph, finds its automorphism group, extracts the literal
/// permutations, and filters them by the breaker conditions.
pub fn detect(dqbf: &Dqbf, limits: &SearchLimits) -> Result<Detection, PipelineError> {
    let (sorted_prefix, sort_permutation) = topological_sort(dqbf.prefix());
    let graph = build_graph(dqbf);
    let group = find_automorphisms_with(&graph, limits)?;
    let mut generators = Vec::with_capacity(group.generators.len());
    let mut verdicts = Vec::with_capacity(group.generators.len());
    for auto in &group.generators {
        let perm = extract_literal_permutation(auto, &graph)?;
        debug_assert!(check_admissible(dqbf.prefix(), &perm), "detector soundness: {perm}");
        debug_assert!(check_syntactic(dqbf, &perm), "detector soundness: {perm}");
        verdicts.push(filter_eligible(&sorted_prefix, &perm));
        generators.push(perm);
    }
    Ok(Detection {
        sorted_prefix,
        sort_permutation,
        graph_vertices: graph.vertex_count(),
        graph_edges: graph.edge_count(),
        group,
        generators,
        verdicts,
    })
}

/// The full break step.
#[derive(Debug)]
pub struct BreakOutcome {
    pub detection: Detection,
    pub artifact: BreakerArtifact,
    pub broken: Dqbf,
}

/// Detects symmetries and conjoins the CNF breaker built from the eligible
/// generators (all of them unless `max_generators` caps the list).
pub fn break_symmetries(
    dqbf: &Dqbf,
    max_generators: Option<usize>,
    limits: &SearchLimits,
) -> Result<BreakOutcome, PipelineError> {
    let detection = detect(dqbf, limits)?;
    let mut chosen: Vec<LiteralPermutation> = detection
        .eligible_generators()
        .into_iter()
        .cloned()
        .collect();
    if let Some(cap) = max_generators {
        chosen.truncate(cap);
    }
    let order = variable_order(&detection.sorted_prefix)?;
    let artifact = encode_cnf(&detection.sorted_prefix, &chosen, &order)?;
    let broken = apply(dqbf, &artifact)?;
    Ok(BreakOutcome {
        detection,
        artifact,
        broken,
    })
}

/// Group order for human output: exact below `10^6`, otherwise scientific
/// notation with three significant digits (truncated), e.g. `8.58e9`.
pub fn format_order(order: &BigUint) -> String {
    if order < &BigUint::from(1_000_000u32) {
        order.to_string()
    } else {
        format_order_scientific(order)
    }
}

/// Scientific notation with three significant digits, truncated; the
/// fractional part keeps at least one digit, trailing zeros trimmed.
pub fn format_order_scientific(order: &BigUint) -> String {
    let digits = order.to_string();
    let exponent = digits.len() - 1;
    let mut mantissa: Vec<u8> = digits.bytes().take(3).collect();
    while mantissa.len() < 3 {
        mantissa.push(b'0');
    }
    let mut fraction = String::from_utf8(mantissa[1..].to_vec()).unwrap();
    while fraction.len() > 1 && fraction.ends_with('0') {
        fraction.pop();
    }
    format!("{}.{}e{}", mantissa[0] as char, fraction, exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixtures;
    use crate::oracle::{brute_truth, Budget};
    use crate::symmetry::Condition;

    #[test]
    fn detect_on_the_swap_triple() {
        let f = fixtures::x_swap_triple();
        let d = detect(&f, &SearchLimits::default()).unwrap();
        assert_eq!(d.group.order, BigUint::from(2u32));
        assert_eq!(d.generators.len(), 1);
        assert_eq!(d.eligible_count(), 1);
        assert_eq!(d.graph_vertices, 12);
        assert_eq!(d.graph_edges, 23);
    }

    #[test]
    fn incomparable_flips_are_detected_but_ineligible() {
        let f = fixtures::incomparable_deps();
        let d = detect(&f, &SearchLimits::default()).unwrap();
        assert_eq!(d.group.order, BigUint::from(4u32));
        assert!(!d.generators.is_empty());
        assert_eq!(d.eligible_count(), 0);
        for v in &d.verdicts {
            assert_eq!(v.violated_condition(), Some(Condition::C3));
        }
    }

    #[test]
    fn break_preserves_truth_on_fixtures() {
        let budget = Budget::default();
        for f in [
            fixtures::or_pair(),
            fixtures::unit_conjunction(),
            fixtures::incomparable_deps(),
            fixtures::x_swap_triple(),
        ] {
            let outcome = break_symmetries(&f, None, &SearchLimits::default()).unwrap();
            let original = brute_truth(&f, &budget).unwrap().0;
            let broken = brute_truth(&outcome.broken, &budget).unwrap().0;
            assert_eq!(original, broken, "{f:?}");
        }
    }

    #[test]
    fn crafted_family_orders_at_small_sizes() {
        let limits = SearchLimits::default();
        for n in 1..=6u32 {
            let d = detect(&crate::generators::kbkf(n), &limits).unwrap();
            assert_eq!(d.group.order, BigUint::from(2u32).pow(n), "kbkf({n})");
        }
        for n in 2..=6u32 {
            let d = detect(&crate::generators::parity(n), &limits).unwrap();
            assert_eq!(d.group.order, BigUint::from(2u32).pow(n + 1), "parity({n})");
        }
        // the single-variable parity instance has only the joint flip
        let d = detect(&crate::generators::parity(1), &limits).unwrap();
        assert_eq!(d.group.order, BigUint::from(2u32));
    }

    #[test]
    fn generator_cap_limits_the_breaker() {
        let f = crate::generators::parity(2);
        let all = break_symmetries(&f, None, &SearchLimits::default()).unwrap();
        let one = break_symmetries(&f, Some(1), &SearchLimits::default()).unwrap();
        assert!(one.artifact.used_generator_count() <= 1);
        assert!(one.artifact.added_clause_count() <= all.artifact.added_clause_count());
    }

    #[test]
    fn order_formatting() {
        assert_eq!(format_order(&BigUint::from(1u32)), "1");
        assert_eq!(format_order(&BigUint::from(1024u32)), "1024");
        assert_eq!(format_order(&BigUint::from(999_999u32)), "999999");
        assert_eq!(format_order(&BigUint::from(1_000_000u32)), "1.0e6");
        assert_eq!(format_order(&BigUint::from(1_048_576u32)), "1.04e6");
        assert_eq!(format_order(&BigUint::from(8_589_934_592u64)), "8.58e9");
        assert_eq!(format_order_scientific(&BigUint::from(2u32)), "2.0e0");
        assert_eq!(
            format_order_scientific(&BigUint::from(2u32).pow(5120)),
            "1.87e1541"
        );
    }
}
