//! Descending-weight greedy selection.
//!
//! Candidates are visited by weight (descending), ties broken by
//! `(x_min, y_min, x_max, y_max, label)`. A candidate is taken when it overlaps
//! no chosen rectangle. The loop stops once every point is covered.

use crate::candidates::CandidateSet;
use crate::geometry::Rect;
use crate::wis::{rect_weight, ConflictGraph, Solution};

/// Visit order used by the greedy solver.
pub fn greedy_order(cands: &CandidateSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    let n = cands.n;
    order.sort_by(|&a, &b| {
        let ra = &cands.rects[a];
        let rb = &cands.rects[b];
        rect_weight(n, rb.covered.len())
            .cmp(&rect_weight(n, ra.covered.len()))
            .then(ra.rect.total_cmp(&rb.rect))
            .then(ra.label.cmp(&rb.label))
    });
    order
}

pub fn solve_greedy(g: &ConflictGraph) -> Solution {
    solve_greedy_candidates(&g.cands)
}

/// Greedy on a bare candidate set; conflicts are found geometrically, so no
/// conflict graph is needed.
pub fn solve_greedy_candidates(cands: &CandidateSet) -> Solution {
    let mut index = GridIndex::new(cands);
    let mut chosen = Vec::new();
    let mut covered = 0usize;
    for i in greedy_order(cands) {
        if covered >= cands.n {
            break;
        }
        let r = &cands.rects[i].rect;
        if !index.overlaps_any(r) {
            index.insert(r);
            chosen.push(i);
            covered += cands.rects[i].covered.len();
        }
    }
    Solution::from_chosen(cands, chosen)
}

/// Greedy using the conflict graph's adjacency to block neighbours.
pub fn solve_greedy_adjacency(g: &ConflictGraph) -> Solution {
    let mut blocked = vec![false; g.len()];
    let mut chosen = Vec::new();
    let mut covered = 0usize;
    for i in greedy_order(&g.cands) {
        if covered >= g.n {
            break;
        }
        if blocked[i] {
            continue;
        }
        chosen.push(i);
        covered += g.cands.rects[i].covered.len();
        for &j in &g.adj[i] {
            blocked[j as usize] = true;
        }
    }
    g.solution(chosen)
}

/// Uniform bucket grid over the chosen rectangles. Each rectangle is
/// registered in every cell it touches; a query inspects the cells its
/// rectangle touches.
pub struct GridIndex {
    origin_x: f64,
    origin_y: f64,
    cell_w: f64,
    cell_h: f64,
    side: usize,
    cells: Vec<Vec<u32>>,
    rects: Vec<Rect>,
}

const GRID_SIDE: usize = 64;

impl GridIndex {
    pub fn new(cands: &CandidateSet) -> Self {
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for c in &cands.rects {
            x0 = x0.min(c.rect.x_min);
            y0 = y0.min(c.rect.y_min);
            x1 = x1.max(c.rect.x_max);
            y1 = y1.max(c.rect.y_max);
        }
        if !x0.is_finite() {
            (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
        }
        let side = GRID_SIDE;
        Self {
            origin_x: x0,
            origin_y: y0,
            cell_w: ((x1 - x0) / side as f64).max(f64::MIN_POSITIVE),
            cell_h: ((y1 - y0) / side as f64).max(f64::MIN_POSITIVE),
            side,
            cells: vec![Vec::new(); side * side],
            rects: Vec::new(),
        }
    }

    fn cell_range(&self, lo: f64, hi: f64, origin: f64, size: f64) -> (usize, usize) {
        let max = self.side - 1;
        let a = ((lo - origin) / size).floor().clamp(0.0, max as f64) as usize;
        let b = ((hi - origin) / size).floor().clamp(0.0, max as f64) as usize;
        (a, b)
    }

    fn cells_of(&self, r: &Rect) -> (usize, usize, usize, usize) {
        let (cx0, cx1) = self.cell_range(r.x_min, r.x_max, self.origin_x, self.cell_w);
        let (cy0, cy1) = self.cell_range(r.y_min, r.y_max, self.origin_y, self.cell_h);
        (cx0, cx1, cy0, cy1)
    }

    pub fn insert(&mut self, r: &Rect) {
        let id = self.rects.len() as u32;
        self.rects.push(*r);
        let (cx0, cx1, cy0, cy1) = self.cells_of(r);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                self.cells[cy * self.side + cx].push(id);
            }
        }
    }

    pub fn overlaps_any(&self, r: &Rect) -> bool {
        let (cx0, cx1, cy0, cy1) = self.cells_of(r);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &id in &self.cells[cy * self.side + cx] {
                    if self.rects[id as usize].overlaps(r) {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }
}
