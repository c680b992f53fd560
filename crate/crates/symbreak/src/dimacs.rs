//! DIMACS CNF reading and writing.

use std::io::{self, BufRead, Write};

use symbreak_core::cnf::FormulaError;
use symbreak_core::{Formula, Lit};

/// Largest variable index whose literal codes fit in 32 bits.
const MAX_VAR: i64 = 1 << 31;

#[derive(Debug, thiserror::Error)]
pub enum DimacsError {
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: second header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: `{token}` is not a literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: clause before the header")]
    ClauseBeforeHeader { line: usize },
    #[error("input ends inside a clause")]
    UnterminatedClause,
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a DIMACS CNF formula. The variable count is the larger of the
/// header value and the largest variable used. A line holding only `%`
/// ends the input, as in the SATLIB files.
pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<Formula, DimacsError> {
    let mut header_vars: Option<u32> = None;
    let mut max_var = 0u32;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim_start();
        if trimmed.starts_with('c') || trimmed.is_empty() {
            continue;
        }
        if trimmed == "%" {
            break;
        }
        if trimmed.starts_with('p') {
            if header_vars.is_some() {
                return Err(DimacsError::DuplicateHeader { line: lineno });
            }
            header_vars = Some(parse_header(trimmed).ok_or_else(|| DimacsError::BadHeader {
                line: lineno,
                text: trimmed.to_string(),
            })?);
            continue;
        }
        if header_vars.is_none() {
            return Err(DimacsError::ClauseBeforeHeader { line: lineno });
        }
        for token in trimmed.split_whitespace() {
            let bad = || DimacsError::BadToken { line: lineno, token: token.to_string() };
            let value: i64 = token.parse().map_err(|_| bad())?;
            if value == 0 {
                if token != "0" {
                    return Err(bad());
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if value.abs() > MAX_VAR {
                return Err(bad());
            }
            let lit = Lit::from_dimacs(value).ok_or_else(bad)?;
            max_var = max_var.max(lit.var());
            current.push(lit);
        }
    }
    let header_vars = header_vars.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    Ok(Formula::new(header_vars.max(max_var), clauses)?)
}

/// Parses a DIMACS formula held in memory.
pub fn parse_dimacs_str(text: &str) -> Result<Formula, DimacsError> {
    parse_dimacs(text.as_bytes())
}

fn parse_header(line: &str) -> Option<u32> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "p" || parts.next()? != "cnf" {
        return None;
    }
    let vars: u32 = parts.next()?.parse().ok()?;
    let _clauses: u64 = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some(vars)
}

/// Writes `formula` followed by `added`, with the header counts covering
/// both and `aux_vars` extra variables. Each comment becomes a leading
/// `c symbreak:` line.
pub fn emit_dimacs<W: Write>(
    out: &mut W,
    formula: &Formula,
    added: &[Vec<Lit>],
    aux_vars: u32,
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(out, "c symbreak: {c}")?;
    }
    writeln!(
        out,
        "p cnf {} {}",
        u64::from(formula.num_vars()) + u64::from(aux_vars),
        formula.clauses().len() + added.len()
    )?;
    let mut line = String::new();
    for clause in formula.clauses().iter().chain(added) {
        line.clear();
        for l in clause {
            line.push_str(&l.to_dimacs().to_string());
            line.push(' ');
        }
        line.push_str("0\n");
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(c: &[i64]) -> Vec<Lit> {
        c.iter().map(|&d| Lit::from_dimacs(d).unwrap()).collect()
    }

    #[test]
    fn small_examples() {
        let f = parse_dimacs_str("p cnf 2 1\n1 -2 0").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.clauses(), &[lits(&[1, -2])]);

        let f = parse_dimacs_str("p cnf 1 0\n").unwrap();
        assert_eq!((f.num_vars(), f.clauses().len()), (1, 0));

        let f = parse_dimacs_str("p cnf 2 2\n1 1 -2 0\n-2 1 0").unwrap();
        assert_eq!(f.clauses().len(), 2);
        assert_eq!(f.clause_set().len(), 1);
    }

    #[test]
    fn clauses_may_span_lines_and_exceed_the_header() {
        let f = parse_dimacs_str("c hello\np cnf 1 1\n1\n-3\n0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[lits(&[1, -3])]);
    }

    #[test]
    fn percent_line_ends_the_input() {
        let f = parse_dimacs_str("p cnf 2 1\n1 2 0\n%\n0\n").unwrap();
        assert_eq!(f.clauses().len(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_dimacs_str("1 2 0\n"), Err(DimacsError::ClauseBeforeHeader { line: 1 })));
        assert!(matches!(parse_dimacs_str("c only\n"), Err(DimacsError::MissingHeader)));
        assert!(matches!(parse_dimacs_str("p cnf x 1\n"), Err(DimacsError::BadHeader { .. })));
        assert!(matches!(parse_dimacs_str("p cnf 2 1\n1 a 0\n"), Err(DimacsError::BadToken { line: 2, .. })));
        assert!(matches!(parse_dimacs_str("p cnf 2 1\n1 -0 0\n"), Err(DimacsError::BadToken { .. })));
        assert!(matches!(parse_dimacs_str("p cnf 2 1\n1 2\n"), Err(DimacsError::UnterminatedClause)));
        assert!(matches!(parse_dimacs_str("p cnf 2 1\np cnf 2 1\n"), Err(DimacsError::DuplicateHeader { line: 2 })));
    }

    #[test]
    fn header_counts_cover_added_clauses() {
        let f = parse_dimacs_str("p cnf 2 1\n1 -2 0\n").unwrap();
        let mut out = Vec::new();
        emit_dimacs(&mut out, &f, &[lits(&[1])], 0, &[]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "p cnf 2 2\n1 -2 0\n1 0\n");
        let mut out = Vec::new();
        emit_dimacs(&mut out, &f, &[lits(&[3])], 1, &["note".into()]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "c symbreak: note\np cnf 3 2\n1 -2 0\n3 0\n");
    }
}
