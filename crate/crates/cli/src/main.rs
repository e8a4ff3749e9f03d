use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctxlang_core::bench::{self, Family};
use ctxlang_core::{compile_file, execute, ParseOptions, ParseStats, Program, Vfs};

#[derive(Parser)]
#[command(name = "ctxlang", version, about = "Compile and run ctxlang programs")]
struct Cli {
    /// Print parse statistics of the main block to stderr.
    #[arg(long, global = true)]
    stats: bool,
    /// Print every parse goal to stderr.
    #[arg(long = "trace-parse", global = true)]
    trace_parse: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, link and type-check programs.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Extra directory searched for imported classes.
        #[arg(long = "path", value_name = "DIR")]
        paths: Vec<PathBuf>,
    },
    /// Compile a program and run its main block.
    Run {
        file: PathBuf,
        #[arg(long = "path", value_name = "DIR")]
        paths: Vec<PathBuf>,
        /// Directory whose files the program may open.
        #[arg(long, value_name = "DIR")]
        vfs: Option<PathBuf>,
    },
    /// Print the lowered form of a program.
    DumpCore {
        file: PathBuf,
        #[arg(long = "path", value_name = "DIR")]
        paths: Vec<PathBuf>,
    },
    /// Measure parser scaling on generated programs and print CSV.
    Bench {
        /// shared_prefix or unique_prefix; both when omitted.
        #[arg(long)]
        family: Option<Family>,
        /// Largest operator count; P doubles from 1 up to this.
        #[arg(long = "max-p", default_value_t = 64)]
        max_p: usize,
        /// Nesting depth; 1, 2 and 3 when omitted.
        #[arg(long)]
        depth: Option<usize>,
        /// Timed compilations per row (median reported).
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, value_name = "CSV")]
        out: Option<PathBuf>,
        /// Leave out the time column so output is reproducible.
        #[arg(long = "no-time")]
        no_time: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = ParseOptions { trace: cli.trace_parse };
    let ok = match &cli.command {
        Command::Check { files, paths } => {
            let mut ok = true;
            for f in files {
                ok &= compile(f, paths, options, &cli).is_some();
            }
            ok
        }
        Command::Run { file, paths, vfs } => {
            let Some(program) = compile(file, paths, options, &cli) else { return ExitCode::from(1) };
            let vfs = match vfs {
                Some(dir) => match Vfs::from_dir(dir) {
                    Ok(v) => v,
                    Err(e) => {
                        eprintln!("error: cannot read {}: {e}", dir.display());
                        return ExitCode::from(1);
                    }
                },
                None => Vfs::new(),
            };
            let run = execute(&program.core, vfs, true);
            let _ = std::io::stdout().flush();
            match run.fault {
                Some(f) => {
                    eprintln!("{f}");
                    false
                }
                None => true,
            }
        }
        Command::DumpCore { file, paths } => match compile(file, paths, options, &cli) {
            Some(program) => {
                dump_core(&program);
                true
            }
            None => false,
        },
        Command::Bench { family, max_p, depth, trials, out, no_time } => {
            let families = family.map(|f| vec![f]).unwrap_or_else(|| Family::ALL.to_vec());
            let depths = depth.map(|d| vec![d]).unwrap_or_else(|| vec![1, 2, 3]);
            run_bench(&bench::grid(&families, &depths, *max_p), *trials, !no_time, out.as_deref())
        }
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn compile(file: &Path, paths: &[PathBuf], options: ParseOptions, cli: &Cli) -> Option<Program> {
    match compile_file(file, paths, options) {
        Ok(p) => {
            for line in &p.checked.trace {
                eprintln!("{line}");
            }
            if cli.stats {
                print_stats(file, &p.checked.main_stats);
            }
            Some(p)
        }
        Err(e) => {
            eprint!("{e}");
            None
        }
    }
}

fn print_stats(file: &Path, s: &ParseStats) {
    eprintln!(
        "{}: input_length={} languages_seen={} memo_entries={} evaluations={}",
        file.display(),
        s.input_length,
        s.languages_seen,
        s.memo_entries,
        s.evaluations
    );
}

fn dump_core(p: &Program) {
    for class in &p.core.classes {
        let bodies = class.operators.iter().chain(&class.methods).chain(&class.constructors);
        for body in bodies {
            println!("{}", render_body(body));
        }
    }
    let mut files: Vec<_> = p.core.functions.keys().collect();
    files.sort();
    for f in files {
        for body in &p.core.functions[f] {
            println!("{}", render_body(body));
        }
    }
    if let Some(main) = &p.core.main {
        println!("main = {main}");
    }
}

fn render_body(b: &ctxlang_core::lower::CoreBody) -> String {
    let body = match &b.body {
        ctxlang_core::lower::CoreBodyKind::Block(c) => c.to_string(),
        ctxlang_core::lower::CoreBodyKind::Native(n) => format!("(native {n:?})"),
    };
    format!("{} ({}) = {body}", b.name, b.params.join(" "))
}

fn run_bench(grid: &[bench::BenchConfig], trials: usize, timed: bool, out: Option<&Path>) -> bool {
    let mut text = format!("{}\n", bench::csv_header(timed));
    let mut ok = true;
    for (cfg, row) in grid.iter().zip(bench::run_bench(grid, trials, timed)) {
        match row {
            Ok(row) => text.push_str(&format!("{}\n", bench::csv_row(&row))),
            Err(e) => {
                eprintln!("error: {} P={} depth={}:\n{e}", cfg.family, cfg.p, cfg.depth);
                ok = false;
            }
        }
    }
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return false;
            }
        }
        None => print!("{text}"),
    }
    ok
}
