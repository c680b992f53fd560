//! Run report for `--stats`.

use std::time::Instant;

use serde::Serialize;
use symbreak_core::pipeline::{Clock, PhaseTimes};
use symbreak_core::BreakerOutput;

/// Wall clock for phase timings.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> WallClock {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1000.0
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Stats {
    pub structures: Vec<StructureStats>,
    pub remainder: RemainderStats,
    pub clauses_added: usize,
    pub aux_vars: u32,
    pub phase_times_ms: PhaseTimesMs,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct StructureStats {
    pub kind: String,
    pub dims: Vec<usize>,
    pub generators: usize,
    pub orbit_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct RemainderStats {
    pub generators: usize,
    pub binary_clauses: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PhaseTimesMs {
    pub graph: f64,
    pub refine: f64,
    pub detect: f64,
    pub remainder: f64,
    pub breaking: f64,
}

impl From<PhaseTimes> for PhaseTimesMs {
    fn from(t: PhaseTimes) -> Self {
        PhaseTimesMs {
            graph: t.graph_ms,
            refine: t.refine_ms,
            detect: t.detect_ms,
            remainder: t.remainder_ms,
            breaking: t.breaking_ms,
        }
    }
}

impl Stats {
    pub fn from_output(out: &BreakerOutput) -> Stats {
        let structures = out
            .structures
            .iter()
            .zip(&out.orbit_sizes)
            .map(|(s, sizes)| StructureStats {
                kind: s.kind().to_string(),
                dims: s.dims(),
                generators: s.generators().len(),
                orbit_sizes: sizes.clone(),
            })
            .collect();
        Stats {
            structures,
            remainder: RemainderStats {
                generators: out.remainder_generators.len(),
                binary_clauses: out.binary_clauses,
            },
            clauses_added: out.clauses().len(),
            aux_vars: out.aux_count(),
            phase_times_ms: out.times.into(),
        }
    }

    /// Comment lines for the output header. Timings are left out so the
    /// output stays byte-identical between runs.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = Vec::with_capacity(self.structures.len() + 2);
        for s in &self.structures {
            let dims: Vec<String> = s.dims.iter().map(|d| d.to_string()).collect();
            lines.push(format!("{} {} generators {}", s.kind, dims.join("x"), s.generators));
        }
        lines.push(format!(
            "remainder generators {} binary clauses {}",
            self.remainder.generators, self.remainder.binary_clauses
        ));
        lines.push(format!("clauses added {} aux vars {}", self.clauses_added, self.aux_vars));
        lines
    }
}
