use ctxlang_bench::*;

#[test]
fn csv_without_time_is_byte_stable() {
    let g = grid(&Family::ALL, &[1], 16);
    let first = to_csv(&g, 1, false).unwrap();
    assert_eq!(first, to_csv(&g, 1, false).unwrap());
    assert_eq!(first, include_str!("depth1_p16.csv"));
}

#[test]
fn timed_csv_has_a_time_column() {
    let csv = to_csv(&grid(&[Family::UniquePrefix], &[1], 2), 3, true).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,P,depth,L,memo_entries,time_ns"));
    for line in lines {
        let time = line.rsplit(',').next().unwrap();
        assert!(time.parse::<u128>().unwrap() > 0, "{line}");
    }
}

#[test]
fn generated_programs_print_their_payload() {
    for family in Family::ALL {
        for depth in 1..=3 {
            let text = gen_benchmark(BenchConfig { family, p: 4, depth });
            let program = ctxlang_core::compile_text(
                BENCH_FILE,
                &text,
                &ctxlang_core::MemorySources::default(),
                Default::default(),
            )
            .unwrap();
            let run = ctxlang_core::execute(&program.core, ctxlang_core::Vfs::new(), false);
            assert_eq!(run.output, "hello, world!\n", "{family} depth {depth}");
        }
    }
}

#[test]
fn a_single_operator_adds_a_constant_per_nesting_level() {
    for family in Family::ALL {
        let l: Vec<usize> =
            (1..=4).map(|depth| measure(BenchConfig { family, p: 1, depth }).unwrap().0.languages_seen).collect();
        let steps: Vec<usize> = l.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| *s == steps[0]), "{family}: {l:?}");
    }
}

#[test]
fn shared_prefix_doubling_p_scales_l_by_two_to_the_depth() {
    for depth in 1..=3 {
        let l = |p| measure(BenchConfig { family: Family::SharedPrefix, p, depth }).unwrap().0.languages_seen as f64;
        let ratio = l(32) / l(16);
        let expected = 2f64.powi(depth as i32);
        assert!((ratio / expected - 1.0).abs() < 0.2, "depth {depth}: ratio {ratio}");
    }
}

fn median_ns(cfg: BenchConfig) -> u128 {
    run_bench(&[cfg], 9, true).remove(0).unwrap().time_ns.unwrap()
}

#[test]
fn wall_clock_follows_the_counters() {
    let shared = |depth| median_ns(BenchConfig { family: Family::SharedPrefix, p: 32, depth });
    assert!(shared(3) > shared(1));
    let unique = |p| median_ns(BenchConfig { family: Family::UniquePrefix, p, depth: 2 }) as f64;
    let (small, large) = (unique(8), unique(64));
    assert!(large < 2.0 * small, "unique prefix P=8 {small}ns, P=64 {large}ns");
}
