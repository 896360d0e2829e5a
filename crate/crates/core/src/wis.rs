//! Weighted independent set model over candidate rectangles.
//!
//! A candidate covering `|R|` of the `n` points weighs `2n|R| - 1`, so the weight
//! of an independent set `S` is `2n|P_S| - |S|`: coverage dominates, cardinality
//! breaks ties.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::candidates::{check_candidate, CandidateSet, Violation};
use crate::instance::RpfaInstance;

/// Weight of a candidate covering `covered` of `n` points.
pub fn rect_weight(n: usize, covered: usize) -> i64 {
    2 * n as i64 * covered as i64 - 1
}

#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub cands: CandidateSet,
    /// Sorted neighbour lists; `adj[a]` contains `b` iff the rectangles overlap.
    pub adj: Vec<Vec<u32>>,
    pub n: usize,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.cands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cands.is_empty()
    }

    pub fn weight(&self, a: usize) -> i64 {
        rect_weight(self.n, self.cands.rects[a].covered.len())
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    /// Iterates every edge once as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, ns)| {
            ns.iter()
                .map(|&b| b as usize)
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    /// Builds a solution from chosen indices, computing its statistics.
    pub fn solution(&self, mut chosen: Vec<usize>) -> Solution {
        chosen.sort_unstable();
        Solution::from_chosen(&self.cands, chosen)
    }
}

fn sweep_order(cands: &CandidateSet) -> Vec<u32> {
    let rects = &cands.rects;
    let mut order: Vec<u32> = (0..cands.len() as u32).collect();
    order.sort_by(|&a, &b| {
        rects[a as usize]
            .rect
            .x_min
            .total_cmp(&rects[b as usize].rect.x_min)
            .then(a.cmp(&b))
    });
    order
}

/// Number of edges the conflict graph would have, without storing them.
pub fn conflict_edge_count(cands: &CandidateSet) -> usize {
    conflict_edge_count_capped(cands, usize::MAX).expect("no cap")
}

/// As [`conflict_edge_count`], giving up with `None` once the count exceeds `cap`.
pub fn conflict_edge_count_capped(cands: &CandidateSet, cap: usize) -> Option<usize> {
    let rects = &cands.rects;
    let order = sweep_order(cands);
    let total = AtomicUsize::new(0);
    (0..order.len()).into_par_iter().try_for_each(|pos| {
        let a = &rects[order[pos] as usize].rect;
        let mut k = 0;
        for &j in &order[pos + 1..] {
            let b = &rects[j as usize].rect;
            if b.x_min > a.x_max {
                break;
            }
            if a.y_min <= b.y_max && b.y_min <= a.y_max {
                k += 1;
            }
        }
        let sum = total.fetch_add(k, Ordering::Relaxed) + k;
        if sum > cap {
            None
        } else {
            Some(())
        }
    })?;
    Some(total.into_inner())
}

/// Overlap edges via a sweep over `x_min`; builds rows in parallel.
pub fn build_conflict_graph(cands: CandidateSet, n: usize) -> ConflictGraph {
    assert!(n >= 1, "conflict graph needs at least one point");
    let mut cands = cands;
    for c in &mut cands.rects {
        c.weight = rect_weight(n, c.covered.len());
    }
    let m = cands.len();
    let rects = &cands.rects;
    let order = sweep_order(&cands);
    // forward[i]: overlapping candidates that come after i in sweep order
    let forward: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|pos| {
            let a = &rects[order[pos] as usize].rect;
            let mut out = Vec::new();
            for &j in &order[pos + 1..] {
                let b = &rects[j as usize].rect;
                if b.x_min > a.x_max {
                    break;
                }
                if a.y_min <= b.y_max && b.y_min <= a.y_max {
                    out.push(j);
                }
            }
            out
        })
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (pos, row) in forward.into_iter().enumerate() {
        let a = order[pos];
        for b in row {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
    }
    adj.par_iter_mut().for_each(|row| row.sort_unstable());
    ConflictGraph { cands, adj, n }
}

/// Reference O(m^2) builder.
pub fn build_conflict_graph_quadratic(cands: CandidateSet, n: usize) -> ConflictGraph {
    let m = cands.len();
    let mut adj = vec![Vec::new(); m];
    for (a, row) in adj.iter_mut().enumerate() {
        for b in 0..m {
            if a != b && cands.rects[a].rect.overlaps(&cands.rects[b].rect) {
                row.push(b as u32);
            }
        }
    }
    let mut cands = cands;
    for c in &mut cands.rects {
        c.weight = rect_weight(n, c.covered.len());
    }
    ConflictGraph { cands, adj, n }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Sorted candidate indices.
    pub chosen: Vec<usize>,
    pub covered_points: usize,
    pub cardinality: usize,
    pub total_weight: i64,
}

impl Solution {
    pub fn empty() -> Self {
        Self {
            chosen: Vec::new(),
            covered_points: 0,
            cardinality: 0,
            total_weight: 0,
        }
    }

    /// Statistics for `chosen`, assuming pairwise-disjoint candidates.
    pub fn from_chosen(cands: &CandidateSet, mut chosen: Vec<usize>) -> Self {
        chosen.sort_unstable();
        let covered_points: usize = chosen.iter().map(|&i| cands.rects[i].covered.len()).sum();
        let total_weight = chosen
            .iter()
            .map(|&i| rect_weight(cands.n, cands.rects[i].covered.len()))
            .sum();
        Self {
            cardinality: chosen.len(),
            chosen,
            covered_points,
            total_weight,
        }
    }

    /// `(covered, cardinality)` key: higher coverage first, then fewer rectangles.
    pub fn objective(&self) -> (usize, std::cmp::Reverse<usize>) {
        (self.covered_points, std::cmp::Reverse(self.cardinality))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionViolation {
    IndexOutOfRange(usize),
    DuplicateIndex(usize),
    Overlap(usize, usize),
    PointCoveredTwice(u32),
    Candidate(usize, Violation),
    CoveredCount { stored: usize, actual: usize },
    Cardinality { stored: usize, actual: usize },
    WeightIdentity { stored: i64, expected: i64 },
    TooManyRectangles { cardinality: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<SolutionViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a solution from scratch: independence (by geometry, not just by
/// the stored edges), per-candidate constraints, statistics and the weight identity.
pub fn validate_solution(g: &ConflictGraph, s: &Solution, inst: &RpfaInstance) -> ValidationReport {
    validate_inner(&g.cands, Some(g), s, inst)
}

/// As [`validate_solution`], for a selection made without a conflict graph.
pub fn validate_selection(
    cands: &CandidateSet,
    s: &Solution,
    inst: &RpfaInstance,
) -> ValidationReport {
    validate_inner(cands, None, s, inst)
}

fn validate_inner(
    cands: &CandidateSet,
    graph: Option<&ConflictGraph>,
    s: &Solution,
    inst: &RpfaInstance,
) -> ValidationReport {
    let mut v = Vec::new();
    let m = cands.len();
    let mut seen = std::collections::BTreeSet::new();
    let mut valid_idx = Vec::new();
    for &i in &s.chosen {
        if i >= m {
            v.push(SolutionViolation::IndexOutOfRange(i));
        } else if !seen.insert(i) {
            v.push(SolutionViolation::DuplicateIndex(i));
        } else {
            valid_idx.push(i);
        }
    }
    for (x, &a) in valid_idx.iter().enumerate() {
        for &b in &valid_idx[x + 1..] {
            if cands.rects[a].rect.overlaps(&cands.rects[b].rect)
                || graph.is_some_and(|g| g.adjacent(a, b))
            {
                v.push(SolutionViolation::Overlap(a.min(b), a.max(b)));
            }
        }
    }
    let mut owner = vec![false; inst.n()];
    let mut actual_covered = 0;
    for &i in &valid_idx {
        for &p in &cands.rects[i].covered {
            if (p as usize) < owner.len() {
                if owner[p as usize] {
                    v.push(SolutionViolation::PointCoveredTwice(p));
                } else {
                    owner[p as usize] = true;
                    actual_covered += 1;
                }
            }
        }
        for viol in check_candidate(inst, &cands.rects[i]) {
            v.push(SolutionViolation::Candidate(i, viol));
        }
    }
    if s.covered_points != actual_covered {
        v.push(SolutionViolation::CoveredCount {
            stored: s.covered_points,
            actual: actual_covered,
        });
    }
    if s.cardinality != s.chosen.len() {
        v.push(SolutionViolation::Cardinality {
            stored: s.cardinality,
            actual: s.chosen.len(),
        });
    }
    let n = cands.n;
    let expected = 2 * n as i64 * s.covered_points as i64 - s.cardinality as i64;
    let summed: i64 = valid_idx
        .iter()
        .map(|&i| rect_weight(n, cands.rects[i].covered.len()))
        .sum();
    if s.total_weight != expected || s.total_weight != summed {
        v.push(SolutionViolation::WeightIdentity {
            stored: s.total_weight,
            expected,
        });
    }
    if s.cardinality > n {
        v.push(SolutionViolation::TooManyRectangles {
            cardinality: s.cardinality,
            n,
        });
    }
    ValidationReport { violations: v }
}
