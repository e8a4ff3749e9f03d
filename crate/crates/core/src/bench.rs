//! Generated parser-scaling workloads and their measurement.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::loader::MemorySources;
use crate::parse::ParseStats;
use crate::types::check::ParseOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `"begin" _ "endX"`: every operator shares the prefix `begin`.
    SharedPrefix,
    /// `"beginX" _ "endX"`: the prefix alone picks the operator.
    UniquePrefix,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::SharedPrefix, Family::UniquePrefix];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::SharedPrefix => "SHARED_PREFIX",
            Family::UniquePrefix => "UNIQUE_PREFIX",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "shared_prefix" | "shared" => Ok(Family::SharedPrefix),
            "unique_prefix" | "unique" => Ok(Family::UniquePrefix),
            _ => Err(format!("unknown benchmark family `{s}` (expected shared_prefix or unique_prefix)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub family: Family,
    /// Number of generated operators, at least 1.
    pub p: usize,
    /// Nesting depth of the generated expression, at least 1.
    pub depth: usize,
}

/// Name of the generated entry file.
pub const BENCH_FILE: &str = "Bench.ctx";

/// Source text of one workload: `p` begin/end operators, each with its own
/// assumption class, and a main that nests `depth` of them around a string.
pub fn gen_benchmark(cfg: BenchConfig) -> String {
    let p = cfg.p.max(1);
    let mut out = String::from("import dsl Bench;\n\ndsl Bench {\n");
    for x in 1..=p {
        let begin = match cfg.family {
            Family::SharedPrefix => "begin".to_string(),
            Family::UniquePrefix => format!("begin{x}"),
        };
        out.push_str(&format!(
            "  static String \"{begin}\" _ \"end{x}\" (D{x} |- String f) {{ return f.apply(new D{x}()); }}\n"
        ));
    }
    out.push_str("}\n");
    for x in 1..=p {
        out.push_str(&format!("\ndsl D{x} {{\n  int \"dummy{x}\" () {{ return {x}; }}\n}}\n"));
    }
    let (open, close) = match cfg.family {
        Family::SharedPrefix => ("begin".to_string(), format!("end{p}")),
        Family::UniquePrefix => (format!("begin{p}"), format!("end{p}")),
    };
    let mut expr = "\"hello, world!\"".to_string();
    for _ in 0..cfg.depth.max(1) {
        expr = format!("{open} {expr} {close}");
    }
    out.push_str(&format!("\nmain {{\n  println({expr});\n}}\n"));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub config: BenchConfig,
    pub stats: ParseStats,
    /// Median compile time; `None` when timing is off.
    pub time_ns: Option<u128>,
}

/// Compiles one workload; returns the parse statistics of its main block
/// and the time spent parsing it.
pub fn measure(cfg: BenchConfig) -> Result<(ParseStats, Duration), String> {
    let text = gen_benchmark(cfg);
    let program = crate::driver::compile_text(BENCH_FILE, &text, &MemorySources::default(), ParseOptions::default())
        .map_err(|e| e.rendered)?;
    Ok((program.checked.main_stats, program.checked.main_time))
}

/// Measures each configuration in order. Timing takes the median main-block
/// parse time over `trials` compilations.
pub fn run_bench(grid: &[BenchConfig], trials: usize, timed: bool) -> Vec<Result<BenchRow, String>> {
    grid.iter()
        .map(|&config| {
            let (stats, first) = measure(config)?;
            let time_ns = if timed {
                let mut times = vec![first.as_nanos()];
                for _ in 1..trials.max(1) {
                    times.push(measure(config)?.1.as_nanos());
                }
                times.sort_unstable();
                Some(times[times.len() / 2])
            } else {
                None
            };
            Ok(BenchRow { config, stats, time_ns })
        })
        .collect()
}

/// Grid of `families × depths × P`, with P doubling from 1 up to `max_p`.
pub fn grid(families: &[Family], depths: &[usize], max_p: usize) -> Vec<BenchConfig> {
    let mut out = Vec::new();
    for &family in families {
        for &depth in depths {
            let mut p = 1;
            while p <= max_p.max(1) {
                out.push(BenchConfig { family, p, depth });
                p *= 2;
            }
        }
    }
    out
}

pub fn csv_header(timed: bool) -> &'static str {
    if timed {
        "family,P,depth,L,memo_entries,time_ns"
    } else {
        "family,P,depth,L,memo_entries"
    }
}

pub fn csv_row(row: &BenchRow) -> String {
    let c = row.config;
    let mut line = format!("{},{},{},{},{}", c.family, c.p, c.depth, row.stats.languages_seen, row.stats.memo_entries);
    if let Some(t) = row.time_ns {
        line.push_str(&format!(",{t}"));
    }
    line
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_prefix_text() {
        let t = gen_benchmark(BenchConfig { family: Family::SharedPrefix, p: 3, depth: 1 });
        assert!(t.contains(r#"begin "hello, world!" end3"#));
        assert_eq!(t.matches("static String \"begin\" _").count(), 3);
        assert_eq!(t.matches("\"dummy").count(), 3);
    }

    #[test]
    fn unique_prefix_text() {
        let t = gen_benchmark(BenchConfig { family: Family::UniquePrefix, p: 3, depth: 2 });
        assert!(t.contains(r#"begin3 begin3 "hello, world!" end3 end3"#));
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powi(2))).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-9);
    }
}
