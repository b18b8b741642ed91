//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! indented detail lines, and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hetpath::eval::{self, AccuracyOptions, LinesSpec, SurfaceSpec};
use hetpath::metrics::{avg_delay_asymmetry, synth_delays};
use hetpath::model::{
    delay_gap, mixture_round, rearranged_round_time, segment_delay, RoundContext,
};
use hetpath::reorder_prob::{
    brute_force_m_distribution, brute_force_q_distribution, m_distribution, q_distribution,
    q_table_literal,
};
use hetpath::sim::arrival_log;
use hetpath::{run_sim, DelayDataset, ModelConfig, PathSet, Scenario, SimOptions};
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

type Check = fn() -> Outcome;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in 2..=8 {
        for m_ack in 1..=4 {
            let closed = m_distribution(c, m_ack).unwrap();
            let brute = brute_force_m_distribution(c, m_ack).unwrap();
            worst = worst.max(closed.max_abs_diff(&brute));
        }
        let q = q_distribution(c).unwrap();
        worst = worst.max(q.max_abs_diff(&brute_force_q_distribution(c).unwrap()));
    }
    let elapsed = start.elapsed();
    let oracles_ok = worst <= TOL && elapsed < Duration::from_secs(10);

    let total_c3: f64 = q_table_literal(3).unwrap().iter().sum();
    let c3_ok = (total_c3 - 0.75).abs() <= TOL;
    let mut deficit_rows = Vec::new();
    let mut deficit_ok = true;
    for c in 3..=8 {
        let total: f64 = q_table_literal(c).unwrap().iter().sum();
        let want = brute_force_q_distribution(c).unwrap().p(c - 1);
        let ok = ((1.0 - total) - want).abs() <= TOL;
        deficit_ok &= ok;
        deficit_rows.push(format!(
            "C={c}: literal total {total:.15}, deficit {:.15}, p(q=C-1) {want:.15} {}",
            1.0 - total,
            if ok { "match" } else { "MISMATCH" }
        ));
    }
    let mut o = Outcome::new(
        oracles_ok && c3_ok && deficit_ok,
        format!(
            "closed forms vs enumeration max |err| {worst:.2e} in {:.2}s; literal q table total at C=3 {total_c3}; deficit = p(q=C-1) for C 3..8: {}",
            elapsed.as_secs_f64(),
            if deficit_ok { "yes" } else { "no" }
        ),
    );
    for r in deficit_rows {
        o = o.detail(r);
    }
    o
}

fn random_context_inputs(rng: &mut ChaCha8Rng) -> (PathSet, ModelConfig, f64, f64) {
    let n = rng.gen_range(1..=8);
    let bws: Vec<f64> = (0..n).map(|_| rng.gen_range(50e3..50e6)).collect();
    let ds: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..0.3)).collect();
    let cfg = ModelConfig {
        segment_size_bytes: rng.gen_range(64..=1500),
        m_ack: rng.gen_range(1..=4),
        ..ModelConfig::default()
    };
    let batch = rng.gen_range(1.0..40.0);
    let prior = rng.gen_range(0.0..500.0f64).floor();
    (PathSet::from_vectors(&bws, &ds), cfg, batch, prior)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst_rel = 0.0f64;
    let mut worst_gap = 0.0f64;
    for i in 0..1000 {
        let (paths, cfg, batch, prior) = random_context_inputs(&mut rng);
        let ctx = RoundContext::new(&paths, &cfg, i + 1, batch, batch, prior);
        let direct = mixture_round(&ctx).unwrap().expected_t;
        worst_rel = worst_rel.max(rel_err(rearranged_round_time(&ctx), direct));
        let d1 = segment_delay(&ctx, 1);
        for k in 1..=ctx.batch {
            let diff = segment_delay(&ctx, k) - d1;
            worst_gap = worst_gap.max((delay_gap(&ctx, k).total() - diff).abs());
        }
    }
    Outcome::new(
        worst_rel <= 1e-9 && worst_gap <= 1e-12,
        format!(
            "round time two routes: max rel err {worst_rel:.2e} (tol 1e-9) over 1000 contexts; delay-gap decomposition max abs err {worst_gap:.2e} (tol 1e-12)"
        ),
    )
}

fn random_dataset(seed: u64, links: usize, samples: usize) -> DelayDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("link,delay_ms\n");
    for l in 0..links {
        for _ in 0..samples {
            csv.push_str(&format!("L{},{}\n", l + 1, rng.gen_range(10.0..=100.0)));
        }
    }
    DelayDataset::from_reader(csv.as_bytes()).unwrap()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let bws = eval::default_bandwidths_bps();
    let links: Vec<usize> = (2..=8).collect();
    let config = ModelConfig::default();
    let datasets = [
        (
            "evenly spread",
            eval::spread_delay_dataset(8, 6, 0.010, 0.100),
        ),
        ("uniform random", random_dataset(0x5eed_0003, 8, 6)),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    let mut worst = f64::INFINITY;
    for (name, ds) in &datasets {
        let table =
            eval::accuracy_experiment(ds, &bws, &links, &config, &AccuracyOptions::default())
                .unwrap();
        let mut parts = Vec::new();
        for row in &table.rows {
            let mean = row.mean_accuracy().unwrap_or(f64::NEG_INFINITY);
            pass &= mean >= 0.65 && row.failures.is_empty();
            worst = worst.min(mean);
            parts.push(format!(
                "m={} {:.4} (ns3 {:.4})",
                row.m,
                mean,
                eval::ns3_reference(row.m).unwrap()
            ));
        }
        details.push(format!(
            "{name}: {}; grand mean {:.4} (ns3 {:.4})",
            parts.join(", "),
            table.grand_mean().unwrap(),
            eval::NS3_REFERENCE_MEAN
        ));
    }
    // Context only: the same experiment at shorter transfers.
    let ds = &datasets[0].1;
    for segments in [10u64, 40] {
        let cfg = ModelConfig::default().with_transfer_bytes(segments * 536);
        let t =
            eval::accuracy_experiment(ds, &bws, &links, &cfg, &AccuracyOptions::default()).unwrap();
        let min = t
            .rows
            .iter()
            .filter_map(|r| r.mean_accuracy())
            .fold(f64::INFINITY, f64::min);
        details.push(format!(
            "context, {segments}-segment transfer: grand mean {:.4}, worst m {:.4}",
            t.grand_mean().unwrap(),
            min
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    let mut o = Outcome::new(
        pass,
        format!(
            "model vs sim accuracy, {} B transfer: worst per-m mean {worst:.4} (floor 0.65), {:.1}s",
            config.transfer_bytes,
            elapsed.as_secs_f64()
        ),
    );
    o.details = details;
    o
}

fn criterion_4() -> Outcome {
    let grid = eval::sweep_lines(&LinesSpec::default()).unwrap();
    let at5 = grid.crossover(4, 1, 0.005).unwrap().value();
    let at50 = grid.crossover(4, 1, 0.050).unwrap().value();
    let in_band = at5.is_some_and(|x| (0.025..=0.046).contains(&x));
    let shrinks = matches!((at5, at50), (Some(a), Some(b)) if b < a);
    let show = |v: Option<f64>| {
        v.map_or("none in 10-90 ms".to_string(), |x| {
            format!("{:.2} ms", x * 1e3)
        })
    };

    let wide = eval::sweep_lines(&LinesSpec {
        d_mins_s: vec![0.005, 0.050],
        delay_asym_s: eval::Axis::new(0.010, 0.200, 39),
        link_counts: vec![1, 4],
        ..LinesSpec::default()
    })
    .unwrap();
    Outcome::new(
        in_band && shrinks,
        format!(
            "4 vs 1 link crossover at d_min 5 ms: {} (band 25-46 ms); at d_min 50 ms: {}",
            show(at5),
            show(at50)
        ),
    )
    .detail(format!(
        "context, axis widened to 200 ms: d_min 5 ms {}, d_min 50 ms {}",
        show(wide.crossover(4, 1, 0.005).unwrap().value()),
        show(wide.crossover(4, 1, 0.050).unwrap().value())
    ))
}

fn criterion_5() -> Outcome {
    let grid = eval::sweep_surface(&SurfaceSpec::default()).unwrap();
    let mi = grid.link_index_of(4).unwrap();
    let (na, nb) = (grid.delay_asyms_s.len(), grid.bw_asyms_bps.len());
    let corner = grid.at(mi, 0, na - 1, nb - 1);
    let delay_factor = grid.at(mi, 0, 0, nb - 1) / corner;
    let bw_factor = grid.at(mi, 0, na - 1, 0) / corner;
    Outcome::new(
        delay_factor > bw_factor,
        format!(
            "m=4 throughput drop factor along delay axis {delay_factor:.3} vs along bandwidth axis {bw_factor:.3}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = ModelConfig::default();
    let t = |m| {
        eval::model_throughput(
            eval::synth_paths(m, 0.020, 0.030, 100e3, 0.0).unwrap(),
            &cfg,
        )
        .unwrap()
    };
    let (t2, t4) = (t(2), t(4));
    Outcome::new(
        t2 > t4,
        format!("d_min 20 ms, asymmetry 30 ms: 2 links {t2:.1} bit/s vs 4 links {t4:.1} bit/s"),
    )
}

fn criterion_7() -> Outcome {
    let mut problems = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for i in 0..20 {
        let n = rng.gen_range(1..=6);
        let bws: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1e6..50e6)).collect();
        let ds: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..0.2)).collect();
        let cfg = ModelConfig {
            m_ack: rng.gen_range(1..=3),
            ..ModelConfig::default()
        }
        .with_transfer_bytes(rng.gen_range(1..=150_000));
        let sc = Scenario::new(
            PathSet::from_vectors(&bws, &ds),
            cfg.clone(),
            format!("r{i}"),
        );
        let opts = SimOptions {
            log_arrivals: true,
            ..SimOptions::default()
        };
        let a = run_sim(&sc, opts).unwrap();
        let b = run_sim(&sc, opts).unwrap();
        if a != b || a.finish_time_s.to_bits() != b.finish_time_s.to_bits() {
            problems.push(format!("scenario {i}: repeat run differs"));
        }
        let cap: f64 = bws.iter().sum();
        if a.throughput_bps > cap {
            problems.push(format!(
                "scenario {i}: {} > capacity {cap}",
                a.throughput_bps
            ));
        }
        if a.bytes_delivered != cfg.transfer_bytes {
            problems.push(format!(
                "scenario {i}: delivered {} of {}",
                a.bytes_delivered, cfg.transfer_bytes
            ));
        }
        if a.spurious_retransmissions != 0 {
            problems.push(format!(
                "scenario {i}: {} retransmissions",
                a.spurious_retransmissions
            ));
        }
        if n == 1 {
            let log = arrival_log(&a).unwrap();
            if !log.windows(2).all(|w| w[0].segment < w[1].segment) {
                problems.push(format!("scenario {i}: single link delivered out of order"));
            }
        }
    }
    for (bw, d) in [(1e6, 0.01), (20e6, 0.08)] {
        let sc = Scenario::new(
            PathSet::from_vectors(&[bw], &[d]),
            ModelConfig::default(),
            "one",
        );
        let r = run_sim(
            &sc,
            SimOptions {
                log_arrivals: true,
                ..SimOptions::default()
            },
        )
        .unwrap();
        let segs: Vec<usize> = arrival_log(&r).unwrap().iter().map(|a| a.segment).collect();
        if segs != (1..=segs.len()).collect::<Vec<_>>() {
            problems.push(format!("single link {bw} bit/s: arrival log not 1..N"));
        }
    }
    let mut o = Outcome::new(
        problems.is_empty(),
        format!(
            "determinism, capacity, conservation, no retransmissions, in-order single link: {} problem(s) over 20 random + 2 single-link scenarios",
            problems.len()
        ),
    );
    o.details = problems;
    o
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut worst = 0.0f64;
    for n in 2..=8 {
        for _ in 0..100 {
            let d = rng.gen_range(0.0..0.2);
            let a = rng.gen_range(0.0..0.2);
            let v = synth_delays(n, d, a).unwrap();
            worst = worst.max((avg_delay_asymmetry(&v) - a).abs());
        }
    }

    let mut runner = TestRunner::new(PtConfig {
        cases: 256,
        failure_persistence: None,
        ..PtConfig::default()
    });
    let strategy = (
        prop::collection::vec(0.0..1.0f64, 2..9),
        any::<prop::sample::Index>(),
        -1.0..1.0f64,
    );
    let props = runner.run(&strategy, |(values, idx, shift)| {
        let base = avg_delay_asymmetry(&values);
        let mut perm = values.clone();
        perm.rotate_left(idx.index(values.len()));
        perm.reverse();
        prop_assert!((avg_delay_asymmetry(&perm) - base).abs() <= 1e-12);
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        prop_assert!((avg_delay_asymmetry(&shifted) - base).abs() <= 1e-12);
        Ok(())
    });
    let mut o = Outcome::new(
        worst <= 1e-12 && props.is_ok(),
        format!(
            "synth round-trip max |err| {worst:.2e} over 700 draws (tol 1e-12); permutation/translation invariance {}",
            if props.is_ok() { "held" } else { "violated" }
        ),
    );
    if let Err(e) = props {
        o = o.detail(e.to_string());
    }
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("probability oracles", criterion_1),
        ("algebraic identities", criterion_2),
        ("model vs simulator accuracy", criterion_3),
        ("delay-asymmetry crossover", criterion_4),
        ("delay vs bandwidth asymmetry dominance", criterion_5),
        ("two links beat four", criterion_6),
        ("simulator sanity", criterion_7),
        ("asymmetry metrics", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.summary
        );
        for d in &o.details {
            println!("    {d}");
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
