//! Model graph dump in the DIMACS graph format: `p edge n m`, one `e u v`
//! line per edge and one `n v c` line per vertex color, 1-based.

use std::io::{self, Write};

use symbreak_core::ColoredGraph;

pub fn write_graph<W: Write>(out: &mut W, g: &ColoredGraph) -> io::Result<()> {
    writeln!(out, "p edge {} {}", g.vertex_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1)?;
    }
    for (v, c) in g.initial_coloring().iter().enumerate() {
        writeln!(out, "n {} {}", v + 1, c)?;
    }
    Ok(())
}
