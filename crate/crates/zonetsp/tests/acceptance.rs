//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `-- --nocapture` to see them on success).

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use zonetsp::hp::{min_hp, min_two_hps, ContractedGraph, EmbeddedHp};
use zonetsp::oracle::{brute_force_hp, brute_force_two_hps, held_karp, OracleBudget};
use zonetsp::sweep::{SweepOptions, Tour};
use zonetsp::tsplib::{parse_instance, parse_tour, VertexId};
use zonetsp::zoning::{auto_zone, enumerate_boundary_choices, load_zone_plan, ZoneSpec};
use zonetsp::{run_sweep, Instance, Metric};

const ATT48: &str = include_str!("../data/att48.tsp");
const ATT48_ZONES: &str = include_str!("../data/att48.zones");
const GOLDEN_LENGTH: u64 = 10628;

/// The known optimal tour written the way the sweep's back-substitution
/// emits it, derived by hand from the shipped plan's per-zone solutions:
/// the closure inserts 17 between 43 and 27, zone 8 contributes
/// 27-19-37-6-(28..30)-43, and so on inward to the merged zone-5
/// through-path 12-11-13-25-14-23-3-22-16-(zones 4..1)-47-20.
const GOLDEN_EXPANSION: [VertexId; 48] = [
    17, 27, 19, 37, 6, 28, 7, 18, 44, 31, 38, 8, 1, 9, 40, 15, 12, 11, 13, 25, 14, 23, 3, 22,
    16, 41, 34, 29, 2, 26, 4, 35, 45, 10, 24, 42, 5, 48, 39, 32, 21, 47, 20, 33, 46, 36, 30, 43,
];

fn att48_instance() -> Instance {
    parse_instance(ATT48).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zonetsp"))
}

fn data_path(name: &str) -> String {
    format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), name)
}

#[test]
fn criterion_1_att48_golden_run() {
    let inst = att48_instance();
    let plan = load_zone_plan(ATT48_ZONES, &inst).unwrap();

    let golden = inst.tour_length(&GOLDEN_EXPANSION).unwrap();
    assert_eq!(golden, GOLDEN_LENGTH, "pinned golden length");

    let started = Instant::now();
    let outcome = run_single_threaded(|| run_sweep(&inst, &plan, &SweepOptions::default()));
    let elapsed = started.elapsed();
    let outcome = outcome.unwrap();

    assert_eq!(outcome.tour.length, golden, "sweep length equals the golden constant");
    let expected = Tour::new(GOLDEN_EXPANSION.to_vec(), golden).canonicalized();
    assert_eq!(
        outcome.tour.seq, expected.seq,
        "sweep tour equals the golden expansion up to rotation/reflection"
    );
    assert!(
        elapsed < Duration::from_secs(60),
        "single-threaded runtime {elapsed:?} exceeds 60 s"
    );
    println!(
        "criterion 1: PASS — att48 tour {} in {:.1} ms single-threaded",
        outcome.tour.length,
        elapsed.as_secs_f64() * 1e3
    );
}

#[cfg(feature = "parallel")]
fn run_single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[test]
fn criterion_2_table_fidelity_in_trace_output() {
    let output = bin()
        .args([
            "solve",
            &data_path("att48.tsp"),
            "--zones",
            &data_path("att48.zones"),
            "--trace",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "solve --trace failed: {output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();

    let after = |marker: &str| -> usize {
        lines.iter().position(|l| *l == marker).unwrap_or_else(|| panic!("missing {marker:?}")) + 1
    };

    let z1 = after("zone 1 candidates: 3");
    assert_eq!(
        &lines[z1..z1 + 3],
        &["26 4 35 45 10", "26 4 35 45 24", "10 4 35 45 24"],
        "zone 1 candidates equal the golden three paths"
    );

    let z2 = after("zone 2 candidates: 15");
    let expected = [
        "2 [26 10] 24 29",
        "2 [26 10] 24 42",
        "2 [26 10] 24 48",
        "2 [26 10] 24 39",
        "2 [26 10] 24 32",
        "29 [26 10] 24 42",
        "29 [26 10] 24 48",
        "29 [26 10] 24 39",
        "29 [26 10] 24 32",
        "42 [26 10] 24 48",
        "42 [26 10] 24 39",
        "42 [26 10] 24 32",
        "48 10 [26 24] 39",
        "48 10 [26 24] 32",
        "39 10 [26 24] 32",
    ];
    assert_eq!(&lines[z2..z2 + 15], &expected, "zone 2 candidates equal the golden fifteen");

    assert!(
        lines.contains(&"zone 2 survivors: [26 10] [26 24]"),
        "zone 2 keeps only the 26-10 and 26-24 embeddings"
    );
    assert!(
        lines.contains(&"zone 2 filtered: [10 24]"),
        "zone 2 filtering eliminates the embedded 10-24 path"
    );
    println!("criterion 2: PASS — trace matches the golden zone 1/2 candidates");
}

#[test]
fn criterion_3_combination_counting() {
    for b in 2..=10usize {
        let pool: Vec<VertexId> = (1..=b as VertexId).collect();
        let spec = ZoneSpec {
            index: 1,
            own_vertices: vec![99],
            boundary_candidates: pool,
            allowed_crossings: (2..=b).step_by(2).collect(),
        };
        let distinct: BTreeSet<Vec<VertexId>> = enumerate_boundary_choices(&spec)
            .into_iter()
            .map(|c| {
                let mut s = c.chosen;
                s.sort_unstable();
                s
            })
            .collect();
        assert_eq!(distinct.len(), (1usize << (b - 1)) - 1, "b = {b}");
    }
    println!("criterion 3: PASS — subset counts equal 2^(b-1)-1 for b in 2..=10");
}

struct CaseGen {
    rng: ChaCha8Rng,
    inst: Instance,
}

impl CaseGen {
    fn new(seed: u64) -> CaseGen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = BTreeSet::new();
        let mut coords = Vec::with_capacity(18);
        while coords.len() < 18 {
            let p = (rng.gen_range(0..=1000), rng.gen_range(0..=1000));
            if used.insert(p) {
                coords.push((p.0 as f64, p.1 as f64));
            }
        }
        CaseGen { rng, inst: Instance::new("case".into(), Metric::Euc2d, coords) }
    }

    /// Random contracted graph with up to `max_elements` elements and up to
    /// three super-edges of 2..=4 vertices each.
    fn graph(&mut self, max_elements: usize) -> (Vec<VertexId>, Vec<Vec<VertexId>>) {
        let m = self.rng.gen_range(2..=max_elements);
        let supers = self.rng.gen_range(0..=3.min(m - 1));
        let free_count = m - supers;
        let mut ids: Vec<VertexId> = (1..=18).collect();
        ids.shuffle(&mut self.rng);
        let mut at = 0;
        let free: Vec<VertexId> = ids[at..at + free_count].to_vec();
        at += free_count;
        let mut seqs = Vec::with_capacity(supers);
        for _ in 0..supers {
            let len = self.rng.gen_range(2..=4).min(ids.len() - at);
            seqs.push(ids[at..at + len].to_vec());
            at += len;
        }
        (free, seqs)
    }
}

fn ports_of(free: &[VertexId], seqs: &[Vec<VertexId>]) -> Vec<VertexId> {
    let mut ports: Vec<VertexId> = free.to_vec();
    for s in seqs {
        ports.push(s[0]);
        ports.push(*s.last().unwrap());
    }
    ports
}

#[test]
fn criterion_4_hp_oracle_equivalence() {
    let budget = OracleBudget::default();
    let mut gen = CaseGen::new(0x5eed_4001);
    let inst = gen.inst.clone();

    let mut compared = 0;
    let mut attempts = 0;
    while compared < 200 {
        attempts += 1;
        assert!(attempts < 2000, "path generator starved");
        let (free, seqs) = gen.graph(9);
        let supers: Vec<EmbeddedHp> =
            seqs.iter().map(|s| EmbeddedHp::from_sequence(&inst, s.clone())).collect();
        let graph = ContractedGraph::new(&inst, free.clone(), supers);
        let ports = ports_of(&free, &seqs);
        let a = ports[gen.rng.gen_range(0..ports.len())];
        let b = loop {
            let v = ports[gen.rng.gen_range(0..ports.len())];
            if v != a {
                break v;
            }
        };
        match (min_hp(&graph, a, b), brute_force_hp(&graph, a, b, &budget)) {
            (Ok(fast), Ok(slow)) => {
                assert_eq!(fast.length, slow.length, "case {compared}: length mismatch");
                assert_eq!(fast.expanded, slow.expanded, "case {compared}: tie-break mismatch");
                compared += 1;
            }
            // both endpoints on one super-edge with other elements left over
            (Err(f), Err(s)) => assert_eq!(s, f.into()),
            (fast, slow) => panic!("feasibility disagreement: {fast:?} vs {slow:?}"),
        }
    }

    let mut done = 0;
    let mut attempts = 0;
    while done < 100 {
        attempts += 1;
        assert!(attempts < 1000, "two-path generator starved");
        let (free, seqs) = gen.graph(9);
        let ports = ports_of(&free, &seqs);
        if ports.len() < 4 {
            continue;
        }
        let mut picks: Vec<VertexId> = ports.clone();
        picks.shuffle(&mut gen.rng);
        picks.truncate(4);
        picks.sort_unstable();
        picks.dedup();
        if picks.len() < 4 {
            continue;
        }
        let pairs = [(picks[0], picks[1]), (picks[2], picks[3])];
        let supers: Vec<EmbeddedHp> =
            seqs.iter().map(|s| EmbeddedHp::from_sequence(&inst, s.clone())).collect();
        let graph = ContractedGraph::new(&inst, free.clone(), supers);
        let fast = min_two_hps(&graph, pairs);
        let slow = brute_force_two_hps(&graph, pairs, &budget);
        match (fast, slow) {
            (Ok((f1, f2)), Ok((s1, s2))) => {
                assert_eq!(
                    f1.length + f2.length,
                    s1.length + s2.length,
                    "two-path total mismatch"
                );
                done += 1;
            }
            (Err(e), Err(o)) => {
                // agreement on infeasibility; not counted as a comparison
                let _ = (e, o);
            }
            (fast, slow) => panic!("feasibility disagreement: {fast:?} vs {slow:?}"),
        }
    }
    println!("criterion 4: PASS — 200 path and 100 two-path oracle comparisons, all exact");
}

fn random_uniform_instance(seed: u64) -> (Instance, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(6..=12);
    let target = *[3usize, 4].choose(&mut rng).unwrap();
    let mut used = BTreeSet::new();
    let mut coords = Vec::with_capacity(n);
    while coords.len() < n {
        let p = (rng.gen_range(0..=1000i64), rng.gen_range(0..=1000i64));
        if used.insert(p) {
            coords.push((p.0 as f64, p.1 as f64));
        }
    }
    (Instance::new(format!("uniform-{seed}"), Metric::Euc2d, coords), target)
}

// Zone decomposition is an approximation in general: a boundary vertex can
// carry two crossing edges in the true optimum, and an optimal edge can skip
// a zone entirely; neither is expressible by the distinct-vertex boundary
// enumeration. Mismatching seeds are written out as reproducible artifacts
// and the assertion reports them.
#[test]
fn criterion_5_small_instance_exactness() {
    const BASE_SEED: u64 = 0xa77_4800;
    let budget = OracleBudget::default();
    let opts = SweepOptions { keep_ties: true, ..Default::default() };
    let started = Instant::now();
    let mut mismatches: Vec<(u64, u64, u64)> = Vec::new();
    let artifact_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("counterexamples");

    for seed in 0..100u64 {
        let (inst, target) = random_uniform_instance(BASE_SEED + seed);
        let plan = auto_zone(&inst, target, usize::MAX).unwrap();
        let swept = run_sweep(&inst, &plan, &opts).unwrap();
        let exact = held_karp(&inst, &budget).unwrap();
        if swept.tour.length != exact.length {
            std::fs::create_dir_all(&artifact_dir).unwrap();
            let path = artifact_dir.join(format!("seed-{seed}.tsp"));
            std::fs::write(&path, inst.to_tsplib()).unwrap();
            eprintln!(
                "criterion 5: seed {seed} (target {target}): sweep {} vs exact {} — artifact {}",
                swept.tour.length,
                exact.length,
                path.display()
            );
            mismatches.push((seed, swept.tour.length, exact.length));
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "runtime {elapsed:?} exceeds 5 s");
    assert!(
        mismatches.is_empty(),
        "criterion 5: FAIL — {} of 100 instances differ from the exact optimum \
         (seeds {:?}; reproducible artifacts under {}); every mismatch is a tour whose \
         optimum needs a doubled boundary vertex or a zone-skipping edge, which the \
         boundary enumeration cannot represent",
        mismatches.len(),
        mismatches.iter().map(|(s, _, _)| *s).collect::<Vec<_>>(),
        artifact_dir.display()
    );
    println!("criterion 5: PASS — 100/100 instances match the exact optimum");
}

#[test]
fn criterion_6_metric_bit_exactness() {
    let inst = att48_instance();
    // hand-derived from the instance's coordinate rows (see tsplib tests)
    assert_eq!(inst.distance(1, 2), 1495);
    assert_eq!(inst.distance(1, 9), 147);
    assert_eq!(inst.distance(26, 10), 358);

    let tour_text = std::fs::read_to_string(data_path("att48.opt.tour")).unwrap();
    let seq = parse_tour(&tour_text).unwrap();
    assert_eq!(inst.tour_length(&seq).unwrap(), GOLDEN_LENGTH);
    println!("criterion 6: PASS — pinned ATT distances and canonical tour length {GOLDEN_LENGTH}");
}

#[test]
fn criterion_7_determinism_across_thread_counts() {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let run = |threads: &str, svg: &Path| -> Vec<u8> {
        let output = bin()
            .args([
                "solve",
                &data_path("att48.tsp"),
                "--zones",
                &data_path("att48.zones"),
                "--trace",
                "--threads",
                threads,
                "--svg-out",
            ])
            .arg(svg)
            .output()
            .unwrap();
        assert!(output.status.success(), "solve failed: {output:?}");
        output.stdout
    };
    let svg1 = tmp.join("det-1.svg");
    let svg4 = tmp.join("det-4.svg");
    let out1 = run("1", &svg1);
    let out4 = run("4", &svg4);
    assert_eq!(out1, out4, "reports differ between 1 and 4 threads");
    assert_eq!(
        std::fs::read(&svg1).unwrap(),
        std::fs::read(&svg4).unwrap(),
        "SVG output differs between 1 and 4 threads"
    );

    // repeated run stays byte-identical too
    let svg1b = tmp.join("det-1b.svg");
    let out1b = run("1", &svg1b);
    assert_eq!(out1, out1b, "repeated runs differ");
    assert_eq!(std::fs::read(&svg1).unwrap(), std::fs::read(&svg1b).unwrap());
    println!("criterion 7: PASS — byte-identical reports and SVG across thread counts");
}

/// Exhaustive check of the solver against the exact optimum *within the tour
/// family the decomposition can express*: every edge inside one zone or
/// between adjacent zones, and at each stepped boundary at most one crossing
/// edge per next-zone vertex. This pins the implementation itself: criterion
/// 5 measures the method, this measures the code.
#[test]
fn sweep_matches_restricted_brute_force() {
    for seed in 0..40u64 {
        let (inst, _) = random_uniform_instance(0xbf_0000 + seed);
        let n = inst.dimension().min(9);
        let coords: Vec<(f64, f64)> = (1..=n as VertexId).map(|id| inst.coord(id)).collect();
        let inst = Instance::new(format!("restricted-{seed}"), Metric::Euc2d, coords);
        let target = if seed % 2 == 0 { 3 } else { 4 };
        let plan = auto_zone(&inst, target, usize::MAX).unwrap();
        let m = plan.len();
        let stepped = if m == 1 { 0 } else { (m - 2).max(1) };

        // zone index per vertex
        let mut zone_of = vec![0usize; n + 1];
        for (zi, z) in plan.zones.iter().enumerate() {
            for &v in &z.own_vertices {
                zone_of[v as usize] = zi + 1;
            }
        }

        let representable = |tour: &[VertexId]| -> bool {
            let edges: Vec<(VertexId, VertexId)> = (0..tour.len())
                .map(|i| (tour[i], tour[(i + 1) % tour.len()]))
                .collect();
            for &(u, v) in &edges {
                if zone_of[u as usize].abs_diff(zone_of[v as usize]) > 1 {
                    return false;
                }
            }
            for k in 1..=stepped {
                // each zone k+1 vertex may take at most one edge from zone k
                let mut hits: std::collections::BTreeMap<VertexId, usize> = Default::default();
                for &(u, v) in &edges {
                    let (zu, zv) = (zone_of[u as usize], zone_of[v as usize]);
                    if zu == k && zv == k + 1 {
                        *hits.entry(v).or_default() += 1;
                    } else if zv == k && zu == k + 1 {
                        *hits.entry(u).or_default() += 1;
                    }
                }
                if hits.values().any(|&c| c > 1) {
                    return false;
                }
            }
            true
        };

        // enumerate all tours with vertex 1 fixed first
        let mut rest: Vec<VertexId> = (2..=n as VertexId).collect();
        let mut best: Option<u64> = None;
        permute(&mut rest, 0, &mut |perm| {
            let mut tour = vec![1];
            tour.extend_from_slice(perm);
            if representable(&tour) {
                let len = inst.tour_length(&tour).unwrap();
                if best.is_none_or(|b| len < b) {
                    best = Some(len);
                }
            }
        });
        let best = best.expect("family is never empty");
        let swept = run_sweep(&inst, &plan, &SweepOptions::default()).unwrap();
        assert_eq!(
            swept.tour.length, best,
            "seed {seed}: sweep differs from restricted brute force (n={n}, target={target})"
        );
    }
}

fn permute(items: &mut Vec<VertexId>, at: usize, visit: &mut impl FnMut(&[VertexId])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}
