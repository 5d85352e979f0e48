//! QDIMACS and DQDIMACS text formats.
//!
//! QDIMACS: a `p cnf <vars> <clauses>` header, alternating `a`/`e` quantifier
//! lines, then zero-terminated clauses. DQDIMACS additionally allows
//! `d <y> <x..> 0` lines that declare an existential variable with an explicit
//! dependency set; `d` lines may be interleaved with `e` blocks.
//!
//! Parsing lifts plain QBF prefixes to DQBF dependency sets: an existential in
//! an `e` block depends on every universal declared in earlier blocks.
//!
//! Corner cases the formats leave open are resolved here as follows: a
//! variable may be quantified at most once (`e` plus `d` for the same
//! variable is an error); `d` lines with empty dependency lists are allowed;
//! comment lines are skipped and not preserved; variables counted by the
//! header but never quantified are treated as innermost existentials that
//! depend on all universals, with a warning.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Clause, Dqbf, Existential, FormulaError, Literal, Prefix, Var};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SourceFormat {
    Qdimacs,
    Dqdimacs,
}

#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub dqbf: Dqbf,
    pub format: SourceFormat,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: variable {var} is not declared")]
    UndeclaredVariable { line: usize, var: i64 },
    #[error("line {line}: variable {var} is quantified twice")]
    DuplicateQuantification { line: usize, var: Var },
    #[error("line {line}: missing terminating 0")]
    BadTermination { line: usize },
    #[error("line {line}: unexpected token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("inconsistent formula: {0}")]
    Inconsistent(#[from] FormulaError),
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error(
        "existential at position {position} breaks the dependency chain; \
         the formula cannot be written as QDIMACS"
    )]
    NotLinearizable { position: usize },
}

pub fn parse(input: &str) -> Result<ParseOutcome, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut header_line = 0;
    let mut universals: Vec<Var> = Vec::new();
    let mut universal_set: BTreeSet<Var> = BTreeSet::new();
    let mut existentials: Vec<Existential> = Vec::new();
    let mut quantified: BTreeSet<Var> = BTreeSet::new();
    let mut saw_d = false;
    let mut in_prefix = true;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut pending_line = 0;
    let mut warnings: Vec<String> = Vec::new();

    for (line_no, raw) in input.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::MalformedHeader {
                    line: line_no,
                    message: "duplicate header".into(),
                });
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "cnf" {
                return Err(ParseError::MalformedHeader {
                    line: line_no,
                    message: format!("expected `p cnf <vars> <clauses>`, got `{line}`"),
                });
            }
            let vars = tokens[2]
                .parse::<usize>()
                .ok()
                .filter(|&v| v <= Var::MAX as usize)
                .ok_or_else(|| ParseError::MalformedHeader {
                    line: line_no,
                    message: format!("bad variable count `{}`", tokens[2]),
                })?;
            let count = tokens[3].parse::<usize>().map_err(|_| ParseError::MalformedHeader {
                line: line_no,
                message: format!("bad clause count `{}`", tokens[3]),
            })?;
            header = Some((vars, count));
            header_line = line_no;
            continue;
        }
        let (var_limit, _) = header.ok_or(ParseError::MalformedHeader {
            line: line_no,
            message: "content before the `p cnf` header".into(),
        })?;

        let first = line.split_whitespace().next().unwrap();
        if in_prefix && (first == "a" || first == "e" || first == "d") {
            let ints = parse_quantifier_line(line, line_no)?;
            let declare = |vars: &mut BTreeSet<Var>, v: i64| -> Result<Var, ParseError> {
                if v <= 0 || v as usize > var_limit {
                    return Err(ParseError::UndeclaredVariable { line: line_no, var: v });
                }
                let v = v as Var;
                if !vars.insert(v) {
                    return Err(ParseError::DuplicateQuantification { line: line_no, var: v });
                }
                Ok(v)
            };
            match first {
                "a" => {
                    for &v in &ints {
                        let v = declare(&mut quantified, v)?;
                        universals.push(v);
                        universal_set.insert(v);
                    }
                }
                "e" => {
                    // QBF lift: depend on every universal declared so far
                    for &v in &ints {
                        let v = declare(&mut quantified, v)?;
                        existentials.push(Existential::new(v, universal_set.iter().copied()));
                    }
                }
                _ => {
                    saw_d = true;
                    if ints.is_empty() {
                        return Err(ParseError::InvalidToken {
                            line: line_no,
                            token: "d".into(),
                        });
                    }
                    let y = declare(&mut quantified, ints[0])?;
                    let mut deps = BTreeSet::new();
                    for &x in &ints[1..] {
                        if x <= 0 || !universal_set.contains(&(x as Var)) {
                            return Err(ParseError::UndeclaredVariable { line: line_no, var: x });
                        }
                        deps.insert(x as Var);
                    }
                    existentials.push(Existential { var: y, deps });
                }
            }
            continue;
        }

        // clause section; clauses may span lines, each ends at a 0 token
        in_prefix = false;
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line: line_no,
                token: token.into(),
            })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut pending)));
            } else {
                if value.unsigned_abs() as usize > var_limit {
                    return Err(ParseError::UndeclaredVariable { line: line_no, var: value });
                }
                if pending.is_empty() {
                    pending_line = line_no;
                }
                pending.push(Literal::from_dimacs(value).unwrap());
            }
        }
    }

    let (var_limit, clause_limit) = header.ok_or(ParseError::MalformedHeader {
        line: 0,
        message: "missing `p cnf` header".into(),
    })?;
    if !pending.is_empty() {
        return Err(ParseError::BadTermination { line: pending_line });
    }
    if clauses.len() != clause_limit {
        warnings.push(format!(
            "header announces {clause_limit} clauses, found {}",
            clauses.len()
        ));
    }

    let unquantified: Vec<Var> = (1..=var_limit as Var).filter(|v| !quantified.contains(v)).collect();
    if !unquantified.is_empty() {
        warnings.push(format!(
            "{} variable(s) never quantified, treated as innermost existentials: {:?}",
            unquantified.len(),
            unquantified
        ));
        for v in unquantified {
            existentials.push(Existential::new(v, universal_set.iter().copied()));
        }
    }

    let prefix = Prefix::new(universals, existentials).map_err(|e| {
        // validity of the quantifier set is checked above, so any residue is a header mismatch
        ParseError::MalformedHeader {
            line: header_line,
            message: e.to_string(),
        }
    })?;
    let dqbf = Dqbf::new(prefix, clauses)?;
    Ok(ParseOutcome {
        dqbf,
        format: if saw_d { SourceFormat::Dqdimacs } else { SourceFormat::Qdimacs },
        warnings,
    })
}

fn parse_quantifier_line(line: &str, line_no: usize) -> Result<Vec<i64>, ParseError> {
    let mut ints = Vec::new();
    for token in line.split_whitespace().skip(1) {
        let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
            line: line_no,
            token: token.into(),
        })?;
        ints.push(value);
    }
    match ints.pop() {
        Some(0) => Ok(ints),
        _ => Err(ParseError::BadTermination { line: line_no }),
    }
}

/// Serialises a formula.
///
/// DQDIMACS output is canonical: one `a` line with all universals, one `d`
/// line per existential in prefix order, clauses in matrix order. QDIMACS
/// output requires the dependency sets to form a chain under `⊆`; the
/// existentials are stably sorted by dependency-set size (a no-op for
/// formulas parsed from QDIMACS) and alternating quantifier blocks are
/// reconstructed from the chain.
pub fn write(dqbf: &Dqbf, format: SourceFormat) -> Result<String, WriteError> {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", dqbf.variable_count(), dqbf.clause_count()).unwrap();
    match format {
        SourceFormat::Dqdimacs => {
            let universals = dqbf.prefix().universals();
            if !universals.is_empty() {
                write_block(&mut out, "a", universals);
            }
            for e in dqbf.prefix().existentials() {
                write!(out, "d {}", e.var).unwrap();
                for &x in &e.deps {
                    write!(out, " {x}").unwrap();
                }
                writeln!(out, " 0").unwrap();
            }
        }
        SourceFormat::Qdimacs => {
            let (sorted, _) = crate::formula::topological_sort(dqbf.prefix());
            let existentials = sorted.existentials();
            for (i, e) in existentials.iter().enumerate() {
                if i + 1 < existentials.len() && !e.deps.is_subset(&existentials[i + 1].deps) {
                    return Err(WriteError::NotLinearizable { position: i + 1 });
                }
            }
            let mut emitted: BTreeSet<Var> = BTreeSet::new();
            let mut i = 0;
            while i < existentials.len() {
                let deps = &existentials[i].deps;
                let block: Vec<Var> = deps.iter().copied().filter(|v| !emitted.contains(v)).collect();
                if !block.is_empty() {
                    write_block(&mut out, "a", &block);
                    emitted.extend(block);
                }
                let mut run = Vec::new();
                while i < existentials.len() && &existentials[i].deps == deps {
                    run.push(existentials[i].var);
                    i += 1;
                }
                write_block(&mut out, "e", &run);
            }
            let trailing: Vec<Var> = dqbf
                .prefix()
                .universals()
                .iter()
                .copied()
                .filter(|v| !emitted.contains(v))
                .collect();
            if !trailing.is_empty() {
                write_block(&mut out, "a", &trailing);
            }
        }
    }
    for clause in dqbf.matrix() {
        for l in clause.literals() {
            write!(out, "{l} ").unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    Ok(out)
}

fn write_block(out: &mut String, kind: &str, vars: &[Var]) {
    write!(out, "{kind}").unwrap();
    for v in vars {
        write!(out, " {v}").unwrap();
    }
    writeln!(out, " 0").unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixtures;

    #[test]
    fn parses_qbf_lift() {
        let out = parse("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap();
        assert_eq!(out.format, SourceFormat::Qdimacs);
        let p = out.dqbf.prefix();
        assert_eq!(p.universals(), &[1]);
        assert_eq!(p.existentials().len(), 1);
        assert_eq!(p.existentials()[0].var, 2);
        assert!(p.existentials()[0].deps.contains(&1));
        assert_eq!(out.dqbf.clause_count(), 1);
    }

    #[test]
    fn parses_explicit_dependency_line() {
        let out = parse("p cnf 3 1\na 1 2 0\nd 3 1 0\n1 -3 0\n").unwrap();
        assert_eq!(out.format, SourceFormat::Dqdimacs);
        let e = &out.dqbf.prefix().existentials()[0];
        assert_eq!(e.var, 3);
        assert_eq!(e.deps.iter().copied().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn parses_graph_example_file() {
        let text = "p cnf 3 3\na 1 2 0\nd 3 1 2 0\n1 2 3 0\n-1 -2 3 0\n1 2 -3 0\n";
        let out = parse(text).unwrap();
        assert_eq!(out.dqbf, fixtures::x_swap_triple());
        assert_eq!(out.format, SourceFormat::Dqdimacs);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn qbf_lift_is_monotone() {
        let text = "p cnf 6 1\na 1 0\ne 2 3 0\na 4 0\ne 5 6 0\n1 -5 0\n";
        let out = parse(text).unwrap();
        let es = out.dqbf.prefix().existentials();
        for w in es.windows(2) {
            assert!(w[0].deps.is_subset(&w[1].deps));
        }
        assert_eq!(es[3].deps.len(), 2);
    }

    #[test]
    fn parse_error_cases() {
        assert!(matches!(
            parse("p dnf 1 0\n"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse("a 1 0\np cnf 1 0\n"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse("p cnf 1 1\na 1 0\n2 0\n"),
            Err(ParseError::UndeclaredVariable { var: 2, .. })
        ));
        assert!(matches!(
            parse("p cnf 2 0\na 1 0\ne 1 0\n"),
            Err(ParseError::DuplicateQuantification { var: 1, .. })
        ));
        assert!(matches!(
            parse("p cnf 2 0\na 1 0\nd 2 1 0\ne 2 0\n"),
            Err(ParseError::DuplicateQuantification { var: 2, .. })
        ));
        assert!(matches!(
            parse("p cnf 2 1\na 1 2\n"),
            Err(ParseError::BadTermination { .. })
        ));
        assert!(matches!(
            parse("p cnf 2 1\na 1 0\ne 2 0\n1 2\n"),
            Err(ParseError::BadTermination { .. })
        ));
        assert!(matches!(
            parse("p cnf 2 1\na 1 0\ne 2 0\n1 x 0\n"),
            Err(ParseError::InvalidToken { .. })
        ));
        // dependency on a variable that is not universal
        assert!(matches!(
            parse("p cnf 3 0\na 1 0\nd 2 3 0\n"),
            Err(ParseError::UndeclaredVariable { .. })
        ));
        // negative variable in a quantifier line
        assert!(matches!(
            parse("p cnf 2 0\na -1 0\n"),
            Err(ParseError::UndeclaredVariable { .. })
        ));
        // header variable count beyond the literal range
        assert!(matches!(
            parse("p cnf 99999999999 0\n"),
            Err(ParseError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn unquantified_variables_become_innermost_existentials() {
        let out = parse("p cnf 3 1\na 1 0\n1 2 -3 0\n").unwrap();
        assert_eq!(out.warnings.len(), 1);
        let es = out.dqbf.prefix().existentials();
        assert_eq!(es.len(), 2);
        for e in es {
            assert!(e.deps.contains(&1));
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let out = parse("c hello\n\np cnf 1 1\nc mid\ne 1 0\n1 0\n").unwrap();
        assert_eq!(out.dqbf.clause_count(), 1);
    }

    #[test]
    fn clause_spanning_lines() {
        let out = parse("p cnf 3 1\ne 1 2 3 0\n1 2\n3 0\n").unwrap();
        assert_eq!(out.dqbf.matrix()[0].len(), 3);
    }

    #[test]
    fn write_round_trips_graph_example() {
        let text = "p cnf 3 3\na 1 2 0\nd 3 1 2 0\n1 2 3 0\n-1 -2 3 0\n1 2 -3 0\n";
        let first = parse(text).unwrap();
        let written = write(&first.dqbf, first.format).unwrap();
        let second = parse(&written).unwrap();
        assert_eq!(first.dqbf, second.dqbf);
        assert_eq!(second.format, SourceFormat::Dqdimacs);
    }

    #[test]
    fn qdimacs_rejects_incomparable_dependencies() {
        let e4 = fixtures::incomparable_deps();
        assert!(matches!(
            write(&e4, SourceFormat::Qdimacs),
            Err(WriteError::NotLinearizable { .. })
        ));
        assert!(write(&e4, SourceFormat::Dqdimacs).is_ok());
    }

    #[test]
    fn qdimacs_degenerate_output() {
        let f = Dqbf::new(Prefix::new(vec![1], vec![]).unwrap(), vec![]).unwrap();
        assert_eq!(write(&f, SourceFormat::Qdimacs).unwrap(), "p cnf 1 0\na 1 0\n");
    }

    #[test]
    fn qdimacs_round_trip_preserves_blocks() {
        let text = "p cnf 5 2\ne 1 0\na 2 3 0\ne 4 5 0\n1 -4 0\n2 5 0\n";
        let first = parse(text).unwrap();
        let written = write(&first.dqbf, SourceFormat::Qdimacs).unwrap();
        let second = parse(&written).unwrap();
        assert_eq!(first.dqbf, second.dqbf);
        assert_eq!(second.format, SourceFormat::Qdimacs);
    }

    #[test]
    fn empty_formula() {
        let out = parse("p cnf 0 0\n").unwrap();
        assert_eq!(out.dqbf.variable_count(), 0);
        assert_eq!(write(&out.dqbf, SourceFormat::Dqdimacs).unwrap(), "p cnf 0 0\n");
    }
}
