//! End-to-end preprocessing: model graph, structure detection, remainder
//! search and breaking clauses.

use alloc::vec::Vec;

use crate::breaking::{
    binary_clause_heuristic, build_order, lex_leader_encode, BreakingClauses, Source, VariableOrder,
};
use crate::cnf::{Formula, LiteralPermutation};
use crate::detect::{DetectFailure, DetectedStructure, Detector};
use crate::graph::{build_model_graph, ColoredGraph};
use crate::refine::{initial_coloring, Coloring, Refiner};
use crate::remainder::{find_remainder_generators, SearchBudget};

/// Which generators are re-checked right before they are encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerifyLevel {
    /// Structure generators are verified during detection; nothing more.
    #[default]
    StructuresOnly,
    /// Every encoded generator is checked again against the formula.
    AllEmitted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub johnson: bool,
    pub row_column: bool,
    pub row: bool,
    pub binary: bool,
    pub remainder: bool,
    /// Positions per lex-leader chain.
    pub max_len: usize,
    pub budget: SearchBudget,
    pub verify: VerifyLevel,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            johnson: true,
            row_column: true,
            row: true,
            binary: true,
            remainder: true,
            max_len: 64,
            budget: SearchBudget::default(),
            verify: VerifyLevel::StructuresOnly,
        }
    }
}

/// Millisecond clock supplied by the caller.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// A clock that always reads zero.
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub graph_ms: f64,
    pub refine_ms: f64,
    pub detect_ms: f64,
    pub remainder_ms: f64,
    pub breaking_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BreakerOutput {
    pub breaking: BreakingClauses,
    pub structures: Vec<DetectedStructure>,
    /// Size of each class covered by each structure, per structure.
    pub orbit_sizes: Vec<Vec<usize>>,
    pub remainder_generators: Vec<LiteralPermutation>,
    pub binary_clauses: usize,
    pub order: VariableOrder,
    pub times: PhaseTimes,
}

impl BreakerOutput {
    pub fn clauses(&self) -> &[Vec<crate::cnf::Lit>] {
        &self.breaking.clauses
    }

    pub fn aux_count(&self) -> u32 {
        self.breaking.aux_count
    }
}

/// A literal class handed to the detectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// The class and its negation class (one id if self-negating).
    pub colors: Vec<u32>,
    /// Members tried as `sigma`, in partition order.
    pub members: Vec<u32>,
}

/// The class holding the negations of class `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("class {0} is its own negation class")]
pub struct SelfNegating(pub u32);

pub fn negation_class_of(coloring: &Coloring, sigma: u32) -> Result<u32, SelfNegating> {
    let v = coloring.class(sigma)[0];
    let neg = coloring.color_of(v ^ 1);
    if neg == sigma {
        Err(SelfNegating(sigma))
    } else {
        Ok(neg)
    }
}

/// Literal classes of size at least 3, largest first, ties by color id. A
/// class and its negation class form one candidate represented by the class
/// with the lower id. A self-negating class is represented by its positive
/// literals.
pub fn candidates(g: &ColoredGraph, coloring: &Coloring) -> Vec<Candidate> {
    let mut out = Vec::new();
    for c in coloring.colors() {
        let members = coloring.class(c);
        if !g.is_literal(members[0]) {
            continue;
        }
        let cand = match negation_class_of(coloring, c) {
            Ok(neg) if c < neg => Candidate {
                colors: alloc::vec![c, neg],
                members: members.to_vec(),
            },
            Ok(_) => continue,
            Err(_) => Candidate {
                colors: alloc::vec![c],
                members: members.iter().copied().filter(|v| v & 1 == 0).collect(),
            },
        };
        if cand.members.len() >= 3 {
            out.push(cand);
        }
    }
    out.sort_by_key(|c| (core::cmp::Reverse(c.members.len()), c.colors[0]));
    out
}

pub fn run(f: &Formula, config: &Config) -> BreakerOutput {
    run_timed(f, config, &NoClock)
}

pub fn run_timed(f: &Formula, config: &Config, clock: &dyn Clock) -> BreakerOutput {
    let mut times = PhaseTimes::default();
    let t0 = clock.now_ms();
    let g = build_model_graph(f);
    let t1 = clock.now_ms();
    times.graph_ms = t1 - t0;
    let mut refiner = Refiner::new();
    let stable = refiner.refine_stable(&g, &initial_coloring(&g)).coloring;
    let t2 = clock.now_ms();
    times.refine_ms = t2 - t1;

    let structures = detect_all(f, &g, &stable, config);
    let orbit_sizes: Vec<Vec<usize>> = structures
        .iter()
        .map(|s| s.covered_colors().iter().map(|&c| stable.class_size(c)).collect())
        .collect();
    let t3 = clock.now_ms();
    times.detect_ms = t3 - t2;

    let mut remainder_generators = Vec::new();
    if config.remainder {
        let covered: Vec<u32> = structures
            .iter()
            .flat_map(|s| s.support())
            .map(|l| l.code())
            .collect();
        // with every literal covered or already a singleton, all literals are
        // singletons of the remainder coloring and every dive pair yields the
        // identity on literals
        let mut open = alloc::vec![false; g.literal_vertices() as usize];
        for v in 0..g.literal_vertices() {
            open[v as usize] = stable.class_size(stable.color_of(v)) > 1;
        }
        for &v in &covered {
            open[v as usize] = false;
        }
        if open.contains(&true) {
            let pi_rem = refiner.discretize_refine(&g, &stable, &covered).coloring;
            remainder_generators = find_remainder_generators(f, &g, &pi_rem, config.budget);
        }
    }
    let t4 = clock.now_ms();
    times.remainder_ms = t4 - t3;

    let mut order = build_order(&structures, f.num_vars());
    let mut breaking = BreakingClauses::default();
    let mut binary_clauses = 0;
    if config.binary && !remainder_generators.is_empty() {
        let (bin, stabilized) = binary_clause_heuristic(&remainder_generators, &order);
        binary_clauses = bin.len();
        order = order.with_stabilized(&stabilized);
        breaking.extend(bin);
    }
    let recheck = config.verify == VerifyLevel::AllEmitted;
    for (si, s) in structures.iter().enumerate() {
        for (gi, phi) in s.generators().iter().enumerate() {
            if recheck && !f.is_automorphism(phi) {
                continue;
            }
            let source = Source::Structure {
                structure: si,
                generator: gi,
            };
            let next = f.num_vars() + breaking.aux_count + 1;
            breaking.extend(lex_leader_encode(phi, &order, next, config.max_len, source));
        }
    }
    for (ri, phi) in remainder_generators.iter().enumerate() {
        if recheck && !f.is_automorphism(phi) {
            continue;
        }
        let next = f.num_vars() + breaking.aux_count + 1;
        breaking.extend(lex_leader_encode(phi, &order, next, config.max_len, Source::Remainder(ri)));
    }
    times.breaking_ms = clock.now_ms() - t4;

    BreakerOutput {
        breaking,
        structures,
        orbit_sizes,
        remainder_generators,
        binary_clauses,
        order,
        times,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Johnson,
    RowColumn,
    Row,
}

/// Detector-major search over the candidates: Johnson, then row-column,
/// then row. Classes covered by a structure are not tried again.
pub fn detect_all(
    f: &Formula,
    g: &ColoredGraph,
    stable: &Coloring,
    config: &Config,
) -> Vec<DetectedStructure> {
    let cands = candidates(g, stable);
    let mut marked = alloc::vec![false; g.vertex_count()];
    let mut det = Detector::new(f, g, stable);
    let mut out: Vec<DetectedStructure> = Vec::new();
    let kinds = [
        (Kind::Johnson, config.johnson),
        (Kind::RowColumn, config.row_column),
        (Kind::Row, config.row),
    ];
    for (kind, enabled) in kinds {
        if !enabled {
            continue;
        }
        for i in 0..cands.len() {
            if cands[i].colors.iter().any(|&c| marked[c as usize]) {
                continue;
            }
            let sigma = &cands[i].members;
            let found: Vec<DetectedStructure> = match kind {
                Kind::Johnson => {
                    let others: Vec<Vec<u32>> = cands
                        .iter()
                        .enumerate()
                        .filter(|&(j, c)| j != i && !c.colors.iter().any(|&x| marked[x as usize]))
                        .map(|(_, c)| c.members.clone())
                        .collect();
                    match det.detect_johnson_extended(stable, sigma, &others) {
                        Ok(o) => core::iter::once(o.structure).chain(o.rows).collect(),
                        Err(e) => recurse(&mut det, stable, sigma, e, |d, b, s| d.detect_johnson(b, s)),
                    }
                }
                Kind::RowColumn => match det.detect_row_column(stable, sigma) {
                    Ok(s) => alloc::vec![s],
                    Err(e) => recurse(&mut det, stable, sigma, e, |d, b, s| d.detect_row_column(b, s)),
                },
                Kind::Row => match det
                    .detect_row(stable, sigma)
                    .or_else(|_| det.detect_row_blocks(stable, sigma))
                {
                    Ok(s) => alloc::vec![s],
                    Err(e) => recurse(&mut det, stable, sigma, e, |d, b, s| {
                        d.detect_row(b, s).or_else(|_| d.detect_row_blocks(b, s))
                    }),
                },
            };
            for s in found {
                for &c in s.covered_colors() {
                    marked[c as usize] = true;
                }
                out.push(s);
            }
        }
    }
    out
}

fn recurse<F>(
    det: &mut Detector<'_>,
    stable: &Coloring,
    sigma: &[u32],
    first: DetectFailure,
    detect: F,
) -> Vec<DetectedStructure>
where
    F: FnMut(&mut Detector<'_>, &Coloring, &[u32]) -> Result<DetectedStructure, DetectFailure>,
{
    if first == DetectFailure::SizeGate && sigma.len() < 3 {
        return Vec::new();
    }
    det.stabilizer_recursion(stable, sigma, detect)
        .map(|s| alloc::vec![s])
        .unwrap_or_default()
}
