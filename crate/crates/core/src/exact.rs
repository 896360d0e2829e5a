//! Exact maximum-weight independent set.
//!
//! The default method splits the conflict graph into connected components and
//! solves each as a 0/1 program: one variable per candidate, one `<= 1` row per
//! maximal clique. Rectangles that pairwise intersect share a common point, so
//! the maximal cliques are exactly the sets of candidates stabbed by one
//! point, and a stabbing point can be taken at the lower-left corner of some
//! pairwise intersection. This relaxation is usually tight; the remaining gap
//! is closed by LP-based branch and bound. Weights are integral, so the search
//! stops as soon as the bound is within 1 of the incumbent.
//!
//! The combinatorial method branches on the uncovered point with the fewest
//! available candidates: either one of those candidates is chosen (heaviest
//! first) or the point stays uncovered, with independent parts solved
//! separately and a fractional covering bound for pruning. It also serves as
//! the fallback when the LP solver reports a numerical failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use microlp::{
    ComparisonOp, OptimizationDirection, Problem, SolveOptions, SolveOutcome, TerminationReason,
};

use crate::candidates::CandidateSet;
use crate::error::SolveError;
use crate::greedy::solve_greedy;
use crate::wis::{build_conflict_graph, conflict_edge_count_capped, ConflictGraph, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExactMethod {
    #[default]
    Lp,
    Combinatorial,
}

#[derive(Debug, Clone, Copy)]
pub struct ExactConfig {
    /// Wall-clock budget; `None` runs to completion.
    pub budget: Option<Duration>,
    /// Refuse graphs with more edges than this.
    pub max_edges: usize,
    pub method: ExactMethod,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            budget: None,
            max_edges: 200_000_000,
            method: ExactMethod::Lp,
        }
    }
}

impl ExactConfig {
    pub fn with_budget(budget: Duration) -> Self {
        Self {
            budget: Some(budget),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactStats {
    /// Branch-and-bound nodes over all components.
    pub nodes: u64,
    pub components: usize,
    /// Components handed to the combinatorial fallback.
    pub fallbacks: usize,
    pub timed_out: bool,
}

/// Maximum-weight independent set, or `Ok(None)` when the budget runs out.
pub fn solve_exact(
    g: &ConflictGraph,
    budget: Option<Duration>,
) -> Result<Option<Solution>, SolveError> {
    let cfg = ExactConfig {
        budget,
        ..ExactConfig::default()
    };
    solve_exact_with(g, &cfg).map(|(s, _)| s)
}

pub fn solve_exact_with(
    g: &ConflictGraph,
    cfg: &ExactConfig,
) -> Result<(Option<Solution>, ExactStats), SolveError> {
    let edges = g.edge_count();
    if edges > cfg.max_edges {
        return Err(SolveError::MemoryLimit(format!(
            "{edges} conflict edges exceed the limit of {}",
            cfg.max_edges
        )));
    }
    let deadline = cfg.budget.map(|b| Instant::now() + b);
    match cfg.method {
        ExactMethod::Combinatorial => Ok(solve_combinatorial(g, deadline)),
        ExactMethod::Lp => Ok(solve_lp(g, deadline)),
    }
}

/// Builds the conflict graph and solves it. Edges are counted before any
/// adjacency is stored, and graph construction is charged to the budget.
pub fn solve_exact_candidates(
    cands: CandidateSet,
    cfg: &ExactConfig,
) -> Result<(ConflictGraph, Option<Solution>, ExactStats), SolveError> {
    let start = Instant::now();
    if conflict_edge_count_capped(&cands, cfg.max_edges).is_none() {
        return Err(SolveError::MemoryLimit(format!(
            "conflict edges exceed the limit of {}",
            cfg.max_edges
        )));
    }
    let n = cands.n;
    let g = build_conflict_graph(cands, n);
    let rest = ExactConfig {
        budget: cfg.budget.map(|b| b.saturating_sub(start.elapsed())),
        ..*cfg
    };
    let (s, stats) = solve_exact_with(&g, &rest)?;
    Ok((g, s, stats))
}

fn solve_combinatorial(
    g: &ConflictGraph,
    deadline: Option<Instant>,
) -> (Option<Solution>, ExactStats) {
    let warm = solve_greedy(g);
    let mut search = Search::new(g, deadline);
    let live: Vec<u32> = (0..g.n as u32)
        .filter(|&p| search.avail_count[p as usize] > 0)
        .collect();
    let found = search.solve(&live, warm.total_weight);
    let stats = ExactStats {
        nodes: search.nodes,
        components: 1,
        fallbacks: 0,
        timed_out: search.timed_out,
    };
    if search.timed_out {
        return (None, stats);
    }
    let sol = match found {
        Some((_, chosen)) => g.solution(chosen.into_iter().map(|c| c as usize).collect()),
        None => warm,
    };
    (Some(sol), stats)
}

/// Connected components of the conflict graph, each sorted.
pub fn components(g: &ConflictGraph) -> Vec<Vec<u32>> {
    let m = g.len();
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    for s in 0..m {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s as u32];
        let mut k = 0;
        while k < comp.len() {
            let c = comp[k] as usize;
            k += 1;
            for &d in &g.adj[c] {
                if !seen[d as usize] {
                    seen[d as usize] = true;
                    comp.push(d);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Candidate sets sharing a common point, covering every maximal clique of
/// the conflict graph (sets of size one are left out).
///
/// Pairwise intersecting boxes share a point, so a maximal clique is the set
/// of candidates stabbed by some point. Sweeping a vertical line, the stabbed
/// sets on the line only grow until the next right edge is passed, so it is
/// enough to look at lines just before such an edge that follows a left edge.
/// On each of those lines the candidates are intervals in y, swept the same
/// way.
pub fn stabbing_cliques(g: &ConflictGraph) -> Vec<Vec<u32>> {
    clique_rows(g, None).expect("no deadline")
}

/// As [`stabbing_cliques`]; `None` when the deadline passes first.
fn clique_rows(g: &ConflictGraph, deadline: Option<Instant>) -> Option<Vec<Vec<u32>>> {
    let r = |i: u32| &g.cands.rects[i as usize].rect;
    // start events sort before end events at the same coordinate
    let sweep = |events: &mut Vec<(f64, bool, u32)>| {
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    };
    let mut xs: Vec<(f64, bool, u32)> = Vec::with_capacity(2 * g.len());
    for i in 0..g.len() as u32 {
        if !g.adj[i as usize].is_empty() {
            xs.push((r(i).x_min, false, i));
            xs.push((r(i).x_max, true, i));
        }
    }
    sweep(&mut xs);

    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut line: Vec<u32> = Vec::new();
    let mut slot = vec![usize::MAX; g.len()];
    let mut ys: Vec<(f64, bool, u32)> = Vec::new();
    let mut stab: Vec<u32> = Vec::new();
    let mut grew_x = false;
    for &(_, end, i) in &xs {
        if !end {
            slot[i as usize] = line.len();
            line.push(i);
            grew_x = true;
            continue;
        }
        if grew_x && line.len() >= 2 {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return None;
            }
            ys.clear();
            for &k in &line {
                ys.push((r(k).y_min, false, k));
                ys.push((r(k).y_max, true, k));
            }
            sweep(&mut ys);
            stab.clear();
            let mut grew_y = false;
            for &(_, yend, k) in &ys {
                if yend {
                    if grew_y && stab.len() >= 2 {
                        let mut c = stab.clone();
                        c.sort_unstable();
                        seen.insert(c);
                    }
                    grew_y = false;
                    let pos = stab.iter().position(|&a| a == k).expect("stabbed interval");
                    stab.swap_remove(pos);
                } else {
                    stab.push(k);
                    grew_y = true;
                }
            }
        }
        grew_x = false;
        let pos = slot[i as usize];
        let last = *line.last().expect("active candidate");
        line.swap_remove(pos);
        if last != i {
            slot[last as usize] = pos;
        }
    }
    let mut out: Vec<Vec<u32>> = seen.into_iter().collect();
    out.sort_unstable();
    Some(out)
}

fn solve_lp(g: &ConflictGraph, deadline: Option<Instant>) -> (Option<Solution>, ExactStats) {
    let warm = solve_greedy(g);
    let mut in_warm = vec![false; g.len()];
    for &c in &warm.chosen {
        in_warm[c] = true;
    }
    let comps = components(g);
    let mut comp_of = vec![0usize; g.len()];
    for (k, comp) in comps.iter().enumerate() {
        for &c in comp {
            comp_of[c as usize] = k;
        }
    }
    let mut stats = ExactStats {
        components: comps.len(),
        ..Default::default()
    };
    let Some(cliques) = clique_rows(g, deadline) else {
        stats.timed_out = true;
        return (None, stats);
    };
    let mut rows: Vec<Vec<Vec<u32>>> = vec![Vec::new(); comps.len()];
    for q in cliques {
        rows[comp_of[q[0] as usize]].push(q);
    }

    let mut chosen: Vec<usize> = Vec::new();
    for (k, comp) in comps.iter().enumerate() {
        if comp.len() == 1 {
            chosen.push(comp[0] as usize);
            continue;
        }
        let remaining = match deadline {
            Some(d) => {
                let now = Instant::now();
                if now >= d {
                    stats.timed_out = true;
                    return (None, stats);
                }
                Some(d - now)
            }
            None => None,
        };
        match solve_component_lp(g, comp, &rows[k], &in_warm, remaining) {
            LpResult::Solved(mut c, nodes) => {
                stats.nodes += nodes;
                chosen.append(&mut c);
            }
            LpResult::TimedOut(nodes) => {
                stats.nodes += nodes;
                stats.timed_out = true;
                return (None, stats);
            }
            LpResult::Failed(why) => {
                log::warn!(
                    "LP solve of a {}-candidate component failed ({why}); using branch and bound",
                    comp.len()
                );
                stats.fallbacks += 1;
                let mut search = Search::new(g, deadline);
                let mut points: Vec<u32> = comp
                    .iter()
                    .flat_map(|&c| g.cands.rects[c as usize].covered.iter().copied())
                    .collect();
                points.sort_unstable();
                points.dedup();
                let warm_part: i64 = comp
                    .iter()
                    .filter(|&&c| in_warm[c as usize])
                    .map(|&c| g.weight(c as usize))
                    .sum();
                let found = search.solve(&points, warm_part);
                stats.nodes += search.nodes;
                if search.timed_out {
                    stats.timed_out = true;
                    return (None, stats);
                }
                match found {
                    Some((_, c)) => chosen.extend(c.into_iter().map(|c| c as usize)),
                    None => chosen.extend(
                        comp.iter()
                            .filter(|&&c| in_warm[c as usize])
                            .map(|&c| c as usize),
                    ),
                }
            }
        }
    }
    (Some(g.solution(chosen)), stats)
}

enum LpResult {
    Solved(Vec<usize>, u64),
    TimedOut(u64),
    Failed(String),
}

fn solve_component_lp(
    g: &ConflictGraph,
    comp: &[u32],
    rows: &[Vec<u32>],
    in_warm: &[bool],
    time_limit: Option<Duration>,
) -> LpResult {
    let mut local = std::collections::HashMap::with_capacity(comp.len());
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = comp
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            local.insert(c, k);
            p.add_binary_var(g.weight(c as usize) as f64)
        })
        .collect();
    for q in rows {
        let expr: Vec<_> = q.iter().map(|c| (vars[local[c]], 1.0)).collect();
        p.add_constraint(&expr[..], ComparisonOp::Le, 1.0);
    }
    // Every solution weighs less than 2n^2, so this relative gap means an
    // absolute gap below 1, which integral weights close.
    let n = g.n as f64;
    let mut options = SolveOptions::default();
    options.time_limit = time_limit;
    options.mip_gap = 0.9 / (2.0 * n * n);
    options.warm_start = Some(
        comp.iter()
            .zip(&vars)
            .map(|(&c, &v)| (v, if in_warm[c as usize] { 1.0 } else { 0.0 }))
            .collect(),
    );
    let outcome = match p.solve_with(options) {
        Ok(o) => o,
        Err(e) => return LpResult::Failed(e.to_string()),
    };
    let nodes = outcome.stats().nodes_solved;
    let sol = match outcome {
        SolveOutcome::Solution(s) => s,
        SolveOutcome::Interrupted(_) => return LpResult::TimedOut(nodes),
    };
    match sol.termination_reason() {
        TerminationReason::ProvenOptimal | TerminationReason::MipGap => {}
        _ => return LpResult::TimedOut(nodes),
    }
    let picked: Vec<usize> = comp
        .iter()
        .zip(&vars)
        .filter(|(_, &v)| sol.var_value(v) > 0.5)
        .map(|(&c, _)| c as usize)
        .collect();
    for (x, &a) in picked.iter().enumerate() {
        if picked[x + 1..].iter().any(|&b| g.adjacent(a, b)) {
            return LpResult::Failed("rounded solution is not independent".into());
        }
    }
    let w: i64 = picked.iter().map(|&c| g.weight(c)).sum();
    if (w as f64 - sol.objective()).abs() > 0.5 {
        return LpResult::Failed(format!(
            "objective {} does not match weight {w}",
            sol.objective()
        ));
    }
    LpResult::Solved(picked, nodes)
}

/// Lower bound on the number of rectangles needed to cover every point that
/// has at least one candidate.
pub fn root_cardinality_bound(g: &ConflictGraph) -> usize {
    let mut search = Search::new(g, None);
    let live: Vec<u32> = (0..g.n as u32)
        .filter(|&p| search.avail_count[p as usize] > 0)
        .collect();
    let ub = search.bound(&live);
    (2 * g.n as i64 * live.len() as i64 - ub) as usize
}

struct Search<'a> {
    g: &'a ConflictGraph,
    deadline: Option<Instant>,
    weights: Vec<i64>,
    /// Candidates containing each point.
    point_cands: Vec<Vec<u32>>,
    avail: Vec<bool>,
    avail_count: Vec<u32>,
    trail: Vec<u32>,
    stamp: Vec<u32>,
    slack: Vec<f64>,
    touched: Vec<u32>,
    epoch: u32,
    nodes: u64,
    timed_out: bool,
}

type Found = Option<(i64, Vec<u32>)>;

impl<'a> Search<'a> {
    fn new(g: &'a ConflictGraph, deadline: Option<Instant>) -> Self {
        let m = g.len();
        let mut point_cands = vec![Vec::new(); g.n];
        for (i, c) in g.cands.rects.iter().enumerate() {
            for &p in &c.covered {
                point_cands[p as usize].push(i as u32);
            }
        }
        let weights: Vec<i64> = (0..m).map(|i| g.weight(i)).collect();
        for pc in &mut point_cands {
            pc.sort_by(|&a, &b| {
                weights[b as usize]
                    .cmp(&weights[a as usize])
                    .then(a.cmp(&b))
            });
        }
        let avail_count = point_cands.iter().map(|v| v.len() as u32).collect();
        Self {
            g,
            deadline,
            weights,
            point_cands,
            avail: vec![true; m],
            avail_count,
            trail: Vec::new(),
            stamp: vec![0; m],
            slack: vec![1.0; m],
            touched: Vec::new(),
            epoch: 0,
            nodes: 0,
            timed_out: false,
        }
    }

    fn remove(&mut self, c: u32) {
        if self.avail[c as usize] {
            self.avail[c as usize] = false;
            for &p in &self.g.cands.rects[c as usize].covered {
                self.avail_count[p as usize] -= 1;
            }
            self.trail.push(c);
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let c = self.trail.pop().unwrap();
            self.avail[c as usize] = true;
            for &p in &self.g.cands.rects[c as usize].covered {
                self.avail_count[p as usize] += 1;
            }
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Upper bound on the weight achievable on `points`.
    ///
    /// Covering all `L` live points needs at least `k` rectangles, giving
    /// `2nL - k`; leaving a point out costs `2n > k`, so this bounds every
    /// solution. `k` is the larger of two fractional packings over points:
    /// `1/s_p` with `s_p` the largest candidate containing `p`, and a greedy
    /// dual packing where each candidate absorbs at most 1.
    fn bound(&mut self, points: &[u32]) -> i64 {
        let two_n = 2 * self.g.n as i64;
        let mut order: Vec<(usize, u32, u32)> = Vec::with_capacity(points.len());
        let mut frac = 0.0f64;
        for &p in points {
            if self.avail_count[p as usize] == 0 {
                continue;
            }
            let best = self.point_cands[p as usize]
                .iter()
                .filter(|&&c| self.avail[c as usize])
                .map(|&c| self.g.cands.rects[c as usize].covered.len())
                .max()
                .unwrap_or(1);
            frac += 1.0 / best as f64;
            order.push((best, self.avail_count[p as usize], p));
        }
        let live = order.len() as i64;
        order.sort_unstable();
        let mut packed = 0.0f64;
        for &(_, _, p) in &order {
            let y = self.point_cands[p as usize]
                .iter()
                .filter(|&&c| self.avail[c as usize])
                .map(|&c| self.slack[c as usize])
                .fold(1.0f64, f64::min);
            if y <= 0.0 {
                continue;
            }
            packed += y;
            for k in 0..self.point_cands[p as usize].len() {
                let c = self.point_cands[p as usize][k] as usize;
                if self.avail[c] {
                    if self.slack[c] == 1.0 {
                        self.touched.push(c as u32);
                    }
                    self.slack[c] -= y;
                }
            }
        }
        for &c in &self.touched {
            self.slack[c as usize] = 1.0;
        }
        self.touched.clear();
        let k = (frac.max(packed) - 1e-9).ceil().max(0.0) as i64;
        two_n * live - k
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    /// Splits `points` into groups whose available candidates are connected in
    /// the conflict graph. Points without candidates are dropped.
    fn components(&mut self, points: &[u32]) -> Vec<Vec<u32>> {
        let epoch = self.next_epoch();
        let mut comp_of_cand: std::collections::HashMap<u32, usize> = Default::default();
        let mut groups: Vec<Vec<u32>> = Vec::new();
        for &p in points {
            if self.avail_count[p as usize] == 0 {
                continue;
            }
            let start = *self.point_cands[p as usize]
                .iter()
                .find(|&&c| self.avail[c as usize])
                .unwrap();
            if self.stamp[start as usize] != epoch {
                let id = groups.len();
                groups.push(Vec::new());
                let mut stack = vec![start];
                self.stamp[start as usize] = epoch;
                while let Some(c) = stack.pop() {
                    comp_of_cand.insert(c, id);
                    for &d in &self.g.adj[c as usize] {
                        if self.avail[d as usize] && self.stamp[d as usize] != epoch {
                            self.stamp[d as usize] = epoch;
                            stack.push(d);
                        }
                    }
                }
            }
            let id = comp_of_cand[&start];
            groups[id].push(p);
        }
        groups
    }

    /// Best weight strictly above `alpha` on `points`, with the chosen candidates.
    fn solve(&mut self, points: &[u32], alpha: i64) -> Found {
        self.nodes += 1;
        if self.out_of_time() {
            return None;
        }
        let mut groups = self.components(points);
        match groups.len() {
            0 => {
                return if 0 > alpha {
                    Some((0, Vec::new()))
                } else {
                    None
                }
            }
            1 => return self.branch(&groups.pop().unwrap(), alpha),
            _ => {}
        }
        groups.sort_by_key(|g| g.len());
        let bounds: Vec<i64> = groups.iter().map(|g| self.bound(g)).collect::<Vec<_>>();
        let mut rest_bound: i64 = bounds.iter().sum();
        if rest_bound <= alpha {
            return None;
        }
        let mut value = 0i64;
        let mut chosen = Vec::new();
        for (k, group) in groups.iter().enumerate() {
            rest_bound -= bounds[k];
            // This part must exceed `local` for the total to beat `alpha`.
            let local = (alpha - value - rest_bound).max(-1);
            let r = self.branch(group, local);
            match r {
                Some((v, mut s)) => {
                    value += v;
                    chosen.append(&mut s);
                }
                None => return None,
            }
        }
        if value > alpha {
            Some((value, chosen))
        } else {
            None
        }
    }

    fn branch(&mut self, points: &[u32], mut alpha: i64) -> Found {
        if self.out_of_time() {
            return None;
        }
        if self.bound(points) <= alpha {
            return None;
        }
        let pivot = *points
            .iter()
            .filter(|&&p| self.avail_count[p as usize] > 0)
            .min_by_key(|&&p| (self.avail_count[p as usize], p))
            .expect("component has a live point");
        let options: Vec<u32> = self.point_cands[pivot as usize]
            .iter()
            .copied()
            .filter(|&c| self.avail[c as usize])
            .collect();
        let mut best: Found = None;
        for c in options {
            let mark = self.trail.len();
            self.remove(c);
            for k in 0..self.g.adj[c as usize].len() {
                let d = self.g.adj[c as usize][k];
                self.remove(d);
            }
            let covered = &self.g.cands.rects[c as usize].covered;
            let rest: Vec<u32> = points
                .iter()
                .copied()
                .filter(|p| covered.binary_search(p).is_err())
                .collect();
            let w = self.weights[c as usize];
            let r = self.solve(&rest, alpha - w);
            self.undo(mark);
            if let Some((v, mut s)) = r {
                alpha = v + w;
                s.push(c);
                best = Some((alpha, s));
            }
            if self.timed_out {
                return None;
            }
        }
        // leave the pivot uncovered
        let mark = self.trail.len();
        for k in 0..self.point_cands[pivot as usize].len() {
            let c = self.point_cands[pivot as usize][k];
            self.remove(c);
        }
        let rest: Vec<u32> = points.iter().copied().filter(|&p| p != pivot).collect();
        let r = self.solve(&rest, alpha);
        self.undo(mark);
        if let Some(found) = r {
            best = Some(found);
        }
        if self.timed_out {
            return None;
        }
        best
    }
}

/// Exhaustive optimum over all `2^m` subsets; the reference for small graphs.
pub fn brute_force_mwis(g: &ConflictGraph) -> Solution {
    let m = g.len();
    assert!(m <= 24, "brute force limited to 24 candidates");
    let mut best = Solution::empty();
    for mask in 0u32..(1u32 << m) {
        let chosen: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let independent = chosen
            .iter()
            .enumerate()
            .all(|(x, &a)| chosen[x + 1..].iter().all(|&b| !g.adjacent(a, b)));
        if !independent {
            continue;
        }
        let s = g.solution(chosen);
        if s.total_weight > best.total_weight {
            best = s;
        }
    }
    best
}
