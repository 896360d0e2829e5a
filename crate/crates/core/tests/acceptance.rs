//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs without the libtest harness so the lines are always printed. Set
//! `ACCEPTANCE_ONLY=3,4` to run a subset.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use worbel::bench::{run_benchmark, BenchSpec, Distribution, ExactStatus};
use worbel::candidates::{build_candidate_set, check_candidate};
use worbel::exact::{solve_exact, solve_exact_candidates, ExactConfig};
use worbel::greedy::solve_greedy_candidates;
use worbel::instance::{
    generate_gaussian, generate_uniform, ConstraintParams, LabelInfo, LabeledPoint,
};
use worbel::reduction::{
    equivalence_report, rect_ring, reduce, DbcrInstance, Provenance, ReductionOutput,
};
use worbel::render::label_layout;
use worbel::wcnf::{decode_assignment, encode_wcnf};
use worbel::{
    build_conflict_graph, render_svg, ConflictGraph, Point2, Rect, RenderOptions, RpfaInstance,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn main() {
    let only: Option<HashSet<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [Criterion; 8] = [
        (1, "exact solver matches brute force", exact_vs_brute_force),
        (2, "weight lemmas", weight_lemmas),
        (3, "maxsat encoding equivalence", maxsat_equivalence),
        (4, "adversarial greedy ratio", adversarial_ratio),
        (5, "optimality ratio experiment", ratio_experiment),
        (6, "scalability ordering", scalability),
        (7, "candidate soundness", candidate_soundness),
        (8, "reduction verifier", reduction_verifier),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} {verdict} {name}: {} ({:.1}s)",
            out.detail,
            t.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn instance(pts: &[(f64, f64, usize)], labels: &[&str], params: ConstraintParams) -> RpfaInstance {
    RpfaInstance::new(
        pts.iter()
            .map(|&(x, y, label)| LabeledPoint {
                position: Point2::new(x, y),
                label,
            })
            .collect(),
        labels.iter().map(|l| LabelInfo::new(*l).unwrap()).collect(),
        params,
        None,
    )
    .unwrap()
}

fn random_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    side: i32,
    labels: usize,
) -> Vec<(f64, f64, usize)> {
    let mut seen = HashSet::new();
    let mut pts = Vec::new();
    while pts.len() < n {
        let (x, y) = (rng.random_range(0..side), rng.random_range(0..side));
        if seen.insert((x, y)) {
            pts.push((x as f64, y as f64, rng.random_range(0..labels)));
        }
    }
    pts
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn first(failures: &[String]) -> String {
    failures
        .first()
        .map(|f| format!(", first: {f}"))
        .unwrap_or_default()
}

fn graph_of(inst: &RpfaInstance) -> ConflictGraph {
    build_conflict_graph(build_candidate_set(inst).unwrap(), inst.n())
}

// ---------------------------------------------------------------- criterion 1

/// Smallest number of pairwise disjoint single-label rectangles covering all
/// points, over every rectangle spanned by a subset of the points.
fn brute_force_partition(pts: &[(f64, f64, usize)]) -> usize {
    let n = pts.len();
    let mut rects: HashMap<[u64; 4], (Rect, u32)> = HashMap::new();
    for mask in 1u32..(1 << n) {
        let members = (0..n).filter(|&i| mask >> i & 1 == 1);
        let xs: Vec<f64> = members.clone().map(|i| pts[i].0).collect();
        let ys: Vec<f64> = members.map(|i| pts[i].1).collect();
        let r = Rect::new(
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            ys.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let inside: u32 = (0..n)
            .filter(|&i| r.contains(Point2::new(pts[i].0, pts[i].1)))
            .fold(0, |m, i| m | 1 << i);
        let first = inside.trailing_zeros() as usize;
        if (0..n).all(|i| inside >> i & 1 == 0 || pts[i].2 == pts[first].2) {
            rects.insert(r.key(), (r, inside));
        }
    }
    let rects: Vec<(Rect, u32)> = rects.into_values().collect();
    fn search(
        rects: &[(Rect, u32)],
        n: usize,
        covered: u32,
        chosen: &mut Vec<usize>,
        best: &mut usize,
    ) {
        if chosen.len() >= *best {
            return;
        }
        if covered.count_ones() as usize == n {
            *best = chosen.len();
            return;
        }
        let p = (!covered).trailing_zeros();
        for (i, (r, inside)) in rects.iter().enumerate() {
            if inside >> p & 1 == 1
                && inside & covered == 0
                && chosen.iter().all(|&c| !rects[c].0.overlaps(r))
            {
                chosen.push(i);
                search(rects, n, covered | inside, chosen, best);
                chosen.pop();
            }
        }
    }
    let mut best = n + 1;
    search(&rects, n, 0, &mut Vec::new(), &mut best);
    best
}

fn exact_vs_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    for case in 0..200 {
        let n = rng.random_range(1..=8);
        let pts = random_points(&mut rng, n, 7, 2);
        let inst = instance(&pts, &["red", "blue"], ConstraintParams::unconstrained());
        let s = solve_exact(&graph_of(&inst), None).unwrap().unwrap();
        let oracle = (n, brute_force_partition(&pts));
        if (s.covered_points, s.cardinality) != oracle {
            mismatches.push(format!(
                "case {case}: got {:?}, oracle {oracle:?}",
                (s.covered_points, s.cardinality)
            ));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "200 instances, {} mismatches{}",
            mismatches.len(),
            first(&mismatches)
        ),
    )
}

// ---------------------------------------------------------------- criterion 2

fn random_independent_set(g: &ConflictGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.shuffle(rng);
    let keep = rng.random_range(0.2..1.0);
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if rng.random_bool(keep) && chosen.iter().all(|&c| !g.adjacent(c, i)) {
            chosen.push(i);
        }
    }
    chosen
}

fn weight_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let param_sets = [
        ConstraintParams::unconstrained(),
        ConstraintParams {
            t: 1,
            rho_t: 0.5,
            ..ConstraintParams::unconstrained()
        },
        ConstraintParams {
            rho_l: 0.5,
            rho_u: 3.0,
            ..ConstraintParams::unconstrained()
        },
    ];
    let (mut pairs, mut sets) = (0usize, 0usize);
    let mut failures = Vec::new();
    for case in 0..500 {
        let n = rng.random_range(2..=10);
        let labels = rng.random_range(1..=3);
        let pts = random_points(&mut rng, n, 12, labels);
        let inst = instance(
            &pts,
            &["oak", "pine", "birch"],
            param_sets[case % param_sets.len()],
        );
        let g = graph_of(&inst);
        let samples: Vec<(usize, usize, i64)> = (0..12)
            .map(|_| {
                let s = random_independent_set(&g, &mut rng);
                let covered: usize = s.iter().map(|&i| g.cands.rects[i].covered.len()).sum();
                let w: i64 = s.iter().map(|&i| g.weight(i)).sum();
                (covered, s.len(), w)
            })
            .collect();
        for &(covered, card, w) in &samples {
            sets += 1;
            if w != 2 * n as i64 * covered as i64 - card as i64 {
                failures.push(format!(
                    "case {case}: identity broken for ({covered}, {card}, {w})"
                ));
            }
        }
        for a in &samples {
            for b in &samples {
                pairs += 1;
                if a.0 > b.0 && a.2 <= b.2 {
                    failures.push(format!(
                        "case {case}: coverage {} > {} but weight {} <= {}",
                        a.0, b.0, a.2, b.2
                    ));
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "500 graphs, {sets} sets, {pairs} pairs, {} failures{}",
            failures.len(),
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn maxsat_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut graphs = 0;
    let mut violating = 0u64;
    for case in 0..120 {
        let n = rng.random_range(2..=6);
        let pts = random_points(&mut rng, n, 8, 2);
        let params = if case % 2 == 0 {
            ConstraintParams::unconstrained()
        } else {
            ConstraintParams {
                t: 1,
                rho_t: 0.5,
                ..ConstraintParams::unconstrained()
            }
        };
        let inst = instance(&pts, &["red", "blue"], params);
        let full = build_candidate_set(&inst).unwrap();
        let mut keep: Vec<usize> = (0..full.len()).collect();
        if keep.len() > 12 {
            keep.shuffle(&mut rng);
            keep.truncate(rng.random_range(4..=12));
            keep.sort_unstable();
        }
        let g = build_conflict_graph(full.subset(&keep), inst.n());
        graphs += 1;
        let f = encode_wcnf(&g);
        let m = g.len();
        let all_false = f.satisfied_weight(&vec![false; m]);
        let mut best: Option<(u64, Vec<bool>)> = None;
        for mask in 0u32..(1 << m) {
            let truth: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let score = f.satisfied_weight(&truth);
            if f.violated_intersections(&truth) > 0 {
                violating += 1;
                if score >= all_false {
                    failures.push(format!(
                        "case {case}: violating assignment scores {score} >= {all_false}"
                    ));
                }
            }
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, truth));
            }
        }
        let (_, truth) = best.unwrap();
        let via_sat = match decode_assignment(&g, &truth) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("case {case}: best assignment does not decode: {e}"));
                continue;
            }
        };
        let exact = solve_exact(&g, None).unwrap().unwrap();
        if via_sat.objective() != exact.objective() {
            failures.push(format!(
                "case {case}: maxsat {:?} vs exact {:?}",
                (via_sat.covered_points, via_sat.cardinality),
                (exact.covered_points, exact.cardinality)
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{graphs} graphs (<= 12 candidates), {violating} violating assignments, {} failures{}",
            failures.len(),
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- criterion 4

/// `v` vertical two-point rectangles of alternating labels, crossed by one
/// horizontal rectangle through four blue points.
fn adversarial_fixture(v: usize) -> RpfaInstance {
    let mut pts = Vec::new();
    for k in 0..v {
        let bottom = match k {
            0 => 0.0,
            2 | 4 => 2.5,
            _ if k == v - 1 => 5.0,
            _ => -50.0,
        };
        let x = 40.0 * k as f64;
        pts.push((x, bottom, k % 2));
        pts.push((x + 5.0, 100.0, k % 2));
    }
    let params = ConstraintParams {
        f: 5.0,
        ..ConstraintParams::unconstrained()
    };
    instance(&pts, &["blue", "red"], params)
}

fn adversarial_ratio() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for v in [7, 15, 31] {
        let inst = adversarial_fixture(v);
        let g = graph_of(&inst);
        let multi: Vec<usize> = g
            .cands
            .rects
            .iter()
            .map(|c| c.covered.len())
            .filter(|&k| k > 1)
            .collect();
        let horizontal = multi.iter().filter(|&&k| k == 4).count();
        let vertical = multi.iter().filter(|&&k| k == 2).count();
        let greedy = solve_greedy_candidates(&g.cands);
        let exact = solve_exact(&g, None).unwrap().unwrap();
        let ratio = greedy.cardinality as f64 / exact.cardinality as f64;
        let shape_ok = multi.len() == v + 1 && horizontal == 1 && vertical == v;
        let ok = if v == 7 {
            inst.n() == 14 && greedy.cardinality == 11 && exact.cardinality == 7
        } else {
            (1.7..2.0).contains(&ratio)
        };
        pass &=
            ok && shape_ok && greedy.covered_points == inst.n() && exact.covered_points == inst.n();
        notes.push(format!(
            "v={v}: greedy {} exact {} ratio {ratio:.3}",
            greedy.cardinality, exact.cardinality
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

// ---------------------------------------------------------------- criterion 5

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn ratio_experiment() -> Outcome {
    let spec = BenchSpec {
        distributions: vec![Distribution::Uniform, Distribution::Gaussian],
        ns: (20..=120).step_by(10).collect(),
        cs: vec![2, 3, 4, 8],
        replicates: 6,
        master_seed: 2024,
        budget: Duration::from_secs(60),
        exact_max_candidates: Some(2000),
        workers: 1,
        ..Default::default()
    };
    let t = Instant::now();
    let rows = run_benchmark(&spec, |_| {});
    let elapsed = t.elapsed();
    let mut pass = elapsed < Duration::from_secs(30 * 60);
    let mut notes = Vec::new();
    for d in [Distribution::Uniform, Distribution::Gaussian] {
        let mine: Vec<_> = rows.iter().filter(|r| r.point.distribution == d).collect();
        let eligible = mine
            .iter()
            .filter(|r| r.candidates.is_some_and(|c| c <= 2000))
            .count();
        let unsolved = mine
            .iter()
            .filter(|r| matches!(r.exact_status, ExactStatus::Timeout | ExactStatus::Failed))
            .count();
        let mut ratios: Vec<f64> = mine.iter().filter_map(|r| r.ratio()).collect();
        let solved = ratios.len();
        let med = median(&mut ratios);
        let max = ratios.last().copied().unwrap_or(f64::NAN);
        let above = ratios.iter().filter(|&&r| r > 1.25).count();
        pass &= solved >= 100 && med <= 1.10 && max <= 1.25;
        notes.push(format!(
            "{d}: {solved} solved of {eligible} eligible ({unsolved} unsolved), median {med:.3}, max {max:.3} ({above} above 1.25)"
        ));
    }
    notes.push(format!("{:.0}s", elapsed.as_secs_f64()));
    Outcome::new(pass, notes.join("; "))
}

// ---------------------------------------------------------------- criterion 6

fn scalability() -> Outcome {
    let budget = Duration::from_secs(60);
    let mut matched = 0;
    let mut slowest_greedy = 0.0f64;
    let (mut large, mut exceeded, mut refused) = (0, 0, 0);
    let spec = BenchSpec {
        distributions: vec![Distribution::Uniform, Distribution::Gaussian],
        ns: vec![150, 250, 400],
        cs: vec![2, 4],
        replicates: 1,
        master_seed: 7,
        ..Default::default()
    };
    for p in spec.grid() {
        let inst = p.distribution.generate(p.n, p.c, p.seed);
        let t = Instant::now();
        let cands = match worbel::build_candidate_set_with(
            &inst,
            &worbel::CandidateConfig {
                cap: 100_000,
                ..Default::default()
            },
        ) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if cands.len() < 1000 {
            continue;
        }
        matched += 1;
        let greedy = solve_greedy_candidates(&cands);
        assert!(greedy.cardinality > 0);
        slowest_greedy = slowest_greedy.max(t.elapsed().as_secs_f64());
        if cands.len() < 5000 {
            continue;
        }
        match solve_exact_candidates(cands, &ExactConfig::with_budget(budget)) {
            Ok((_, None, _)) => {
                large += 1;
                exceeded += 1;
            }
            Ok((_, Some(_), _)) => large += 1,
            // the graph is too large to build at all; not counted as a run
            Err(_) => refused += 1,
        }
    }
    let pass = matched > 0 && slowest_greedy < 10.0 && large > 0 && 2 * exceeded >= large;
    Outcome::new(
        pass,
        format!(
            "{matched} instances with 10^3..10^5 candidates, slowest greedy {slowest_greedy:.2}s; \
             exact over {}s on {exceeded}/{large} runs with >= 5000 candidates ({refused} refused by the edge limit)",
            budget.as_secs()
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

fn candidate_soundness() -> Outcome {
    let mixed = ConstraintParams {
        rho_l: 0.5,
        rho_u: 3.0,
        t: 1,
        rho_t: 0.1,
        f: 8.0,
    };
    let mut corpus: Vec<RpfaInstance> = Vec::new();
    for seed in 0..3 {
        for (n, c) in [(20, 2), (50, 4), (80, 8)] {
            for params in [
                ConstraintParams::unconstrained(),
                ConstraintParams::case_study(),
                mixed,
            ] {
                let mut u = generate_uniform(n, c, seed);
                u.params = params;
                corpus.push(u);
                let mut g = generate_gaussian(n.min(40), c, seed);
                g.params = params;
                corpus.push(g);
            }
        }
    }
    corpus.push(adversarial_fixture(7));
    let toy = DbcrInstance {
        outer: rect_ring(0, 0, 2, 2),
        holes: vec![],
        elements: vec![(1, 1)],
        omega: 1,
    };
    corpus.push(reduce(&toy).unwrap().rpfa0);

    let (mut checked, mut bad) = (0usize, 0usize);
    for inst in &corpus {
        let cands = build_candidate_set(inst).unwrap();
        for c in &cands.rects {
            checked += 1;
            if !check_candidate(inst, c).is_empty() {
                bad += 1;
            }
        }
    }

    // rendered labels under the case-study parameters
    let (mut labels, mut label_bad) = (0usize, 0usize);
    for seed in 0..4 {
        for inst in [
            generate_uniform(150, 4, seed),
            generate_gaussian(150, 4, seed),
        ] {
            let mut inst = inst;
            inst.params = ConstraintParams::case_study();
            let cands = build_candidate_set(&inst).unwrap();
            let sol = solve_greedy_candidates(&cands);
            let svg = render_svg(&inst, &cands, &sol, &RenderOptions::default());
            if svg.matches("<text").count() != sol.cardinality {
                label_bad += 1;
            }
            for &i in &sol.chosen {
                labels += 1;
                let c = &cands.rects[i];
                let l = label_layout(&inst, c);
                let b = l.bbox();
                let eps = 1e-9 * (1.0 + c.rect.major());
                let fits = b.x_min >= c.rect.x_min - eps
                    && b.x_max <= c.rect.x_max + eps
                    && b.y_min >= c.rect.y_min - eps
                    && b.y_max <= c.rect.y_max + eps;
                if !fits || c.rect.minor() < 16.0 || l.font < 16.0 - 1e-9 {
                    label_bad += 1;
                }
            }
        }
    }
    Outcome::new(
        bad == 0 && label_bad == 0 && labels > 0,
        format!(
            "{} instances, {checked} candidates, {bad} violations; {labels} case-study labels, {label_bad} not fitting",
            corpus.len()
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

type P = (i64, i64);

fn lattice(p: Point2) -> P {
    (p.x.round() as i64, p.y.round() as i64)
}

/// Colour switches met while walking every ring of the refined polygon.
fn walk_sigma(out: &ReductionOutput) -> usize {
    let colour: HashMap<P, usize> = out
        .provenance
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == Provenance::Boundary)
        .map(|(i, _)| (lattice(out.rpfa0.position(i)), out.rpfa0.label_of(i)))
        .collect();
    let mut switches = 0;
    for ring in out.refined.rings() {
        let mut walk: Vec<P> = Vec::new();
        for (k, &a) in ring.iter().enumerate() {
            let b = ring[(k + 1) % ring.len()];
            let mut p = a;
            while p != b {
                walk.push(p);
                p = (p.0 + (b.0 - a.0).signum(), p.1 + (b.1 - a.1).signum());
            }
        }
        for (k, p) in walk.iter().enumerate() {
            if colour[p] != colour[&walk[(k + 1) % walk.len()]] {
                switches += 1;
            }
        }
    }
    switches
}

/// Straight segments needed to cover the layer contours: every corner starts
/// a new segment on a closed contour, an open one needs one more.
fn count_delta(out: &ReductionOutput) -> usize {
    let mut layers: BTreeMap<u32, HashSet<P>> = BTreeMap::new();
    for (i, t) in out.provenance.iter().enumerate() {
        if let Provenance::Layer(d) = t {
            layers
                .entry(*d)
                .or_default()
                .insert(lattice(out.rpfa0.position(i)));
        }
    }
    let mut total = 0;
    for pts in layers.values() {
        let mut seen: HashSet<P> = HashSet::new();
        for &s in pts {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let p = comp[k];
                k += 1;
                for q in [
                    (p.0 + 1, p.1),
                    (p.0 - 1, p.1),
                    (p.0, p.1 + 1),
                    (p.0, p.1 - 1),
                ] {
                    if pts.contains(&q) && seen.insert(q) {
                        comp.push(q);
                    }
                }
            }
            let (mut corners, mut ends) = (0, 0);
            for &p in &comp {
                let h = [(p.0 + 1, p.1), (p.0 - 1, p.1)]
                    .iter()
                    .filter(|q| pts.contains(q))
                    .count();
                let v = [(p.0, p.1 + 1), (p.0, p.1 - 1)]
                    .iter()
                    .filter(|q| pts.contains(q))
                    .count();
                if h == 1 && v == 1 {
                    corners += 1;
                }
                if h + v <= 1 {
                    ends += 1;
                }
            }
            total += if comp.len() == 1 {
                1
            } else if ends == 0 {
                corners
            } else {
                corners + 1
            };
        }
    }
    total
}

fn reduction_suite() -> Vec<DbcrInstance> {
    let l = vec![(0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)];
    let u = vec![
        (0, 0),
        (6, 0),
        (6, 4),
        (4, 4),
        (4, 2),
        (2, 2),
        (2, 4),
        (0, 4),
    ];
    let sq = |k| rect_ring(0, 0, k, k);
    let hole = || vec![rect_ring(2, 2, 3, 3)];
    let d = |outer: Vec<P>, holes: Vec<Vec<P>>, elements: Vec<P>, omega| DbcrInstance {
        outer,
        holes,
        elements,
        omega,
    };
    vec![
        d(sq(2), vec![], vec![(1, 1)], 1),
        d(sq(2), vec![], vec![(1, 1)], 0),
        d(sq(3), vec![], vec![(1, 1), (2, 2)], 1),
        d(sq(3), vec![], vec![(1, 2), (2, 1)], 1),
        d(sq(3), vec![], vec![(1, 1), (2, 2)], 0),
        d(sq(4), vec![], vec![(1, 1), (2, 3), (3, 2)], 1),
        d(rect_ring(0, 0, 4, 3), vec![], vec![(1, 1), (3, 2)], 1),
        d(l.clone(), vec![], vec![(1, 1)], 1),
        d(l.clone(), vec![], vec![(1, 1)], 0),
        d(l.clone(), vec![], vec![(1, 3), (3, 1)], 1),
        d(l.clone(), vec![], vec![(1, 3), (3, 1)], 2),
        d(u.clone(), vec![], vec![(1, 1)], 1),
        d(u.clone(), vec![], vec![(1, 3), (5, 1)], 1),
        d(u.clone(), vec![], vec![(1, 3), (5, 1)], 2),
        d(u.clone(), vec![], vec![(1, 1), (5, 3)], 1),
        d(u.clone(), vec![], vec![(1, 1), (5, 3)], 2),
        d(u.clone(), vec![], vec![(1, 3), (3, 1)], 1),
        d(u.clone(), vec![], vec![(1, 3), (3, 1)], 2),
        d(sq(5), hole(), vec![(1, 1), (4, 4)], 1),
        d(sq(5), hole(), vec![(1, 1), (4, 4)], 2),
        d(sq(5), hole(), vec![(1, 4), (4, 1)], 1),
        d(sq(5), hole(), vec![(1, 4), (4, 1)], 2),
    ]
}

fn reduction_verifier() -> Outcome {
    let suite = reduction_suite();
    let (mut yes, mut no) = (0, 0);
    let mut failures = Vec::new();
    for (i, inp) in suite.iter().enumerate() {
        let out = match reduce(inp) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("toy {i}: {e}"));
                continue;
            }
        };
        let sigma = walk_sigma(&out);
        let delta = count_delta(&out);
        if out.k != delta + inp.omega + sigma {
            failures.push(format!(
                "toy {i}: k={} but recount gives {delta}+{}+{sigma}",
                out.k, inp.omega
            ));
        }
        match equivalence_report(inp, &out) {
            Ok(r) => {
                if r.dbcr_yes {
                    yes += 1;
                } else {
                    no += 1;
                }
                if !r.agree() {
                    failures.push(format!("toy {i}: {r:?}"));
                }
            }
            Err(e) => failures.push(format!("toy {i}: {e}")),
        }
    }
    Outcome::new(
        failures.is_empty() && suite.len() >= 20 && yes > 0 && no > 0,
        format!(
            "{} toys ({yes} yes, {no} no), {} failures{}",
            suite.len(),
            failures.len(),
            first(&failures)
        ),
    )
}
