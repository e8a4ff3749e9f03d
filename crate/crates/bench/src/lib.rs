//! Parser-scaling workloads: generation, measurement and CSV output.

pub use ctxlang_core::bench::*;

/// CSV text for a measured grid; the first failing row aborts.
pub fn to_csv(grid: &[BenchConfig], trials: usize, timed: bool) -> Result<String, String> {
    let mut out = format!("{}\n", csv_header(timed));
    for row in run_bench(grid, trials, timed) {
        out.push_str(&csv_row(&row?));
        out.push('\n');
    }
    Ok(out)
}
