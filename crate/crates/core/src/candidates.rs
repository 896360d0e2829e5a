//! Candidate rectangle generation.
//!
//! For every pair of points the bounding box is taken as a base rectangle and
//! extended leftwards, then rightwards, inside the horizontal strip spanned by the
//! pair. Every extension step snaps the moving edge to the next point. Rectangles
//! whose aspect ratio misses the label's band are stretched without covering new
//! points; finally the minimum font size is checked. Singleton rectangles are
//! added for every point. The result is deduplicated and sorted.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::CandidateError;
use crate::geometry::{Axis, Point2, Rect};
use crate::instance::{format_instance, RpfaInstance};
use crate::wis::rect_weight;

/// Relative slack when comparing a computed aspect ratio against its bounds.
/// Stretching lands exactly on a bound up to one rounding step.
pub const RATIO_EPS: f64 = 1e-9;

pub const DEFAULT_CANDIDATE_CAP: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRect {
    pub rect: Rect,
    pub label: usize,
    /// Sorted indices of all instance points inside `rect`.
    pub covered: Vec<u32>,
    pub mismatch: u32,
    pub weight: i64,
}

impl CandidateRect {
    pub fn size(&self) -> usize {
        self.covered.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub rects: Vec<CandidateRect>,
    /// Fingerprint of the instance the set was generated from.
    pub instance_id: u64,
    /// Number of points in the source instance.
    pub n: usize,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Keeps only the candidates at the given indices (in that order).
    pub fn subset(&self, keep: &[usize]) -> CandidateSet {
        CandidateSet {
            rects: keep.iter().map(|&i| self.rects[i].clone()).collect(),
            instance_id: self.instance_id,
            n: self.n,
        }
    }

    /// Debug dump: `x_min,y_min,x_max,y_max,label,weight,covered_count,mismatch_count`.
    pub fn to_csv(&self, inst: &RpfaInstance) -> String {
        let mut out =
            String::from("x_min,y_min,x_max,y_max,label,weight,covered_count,mismatch_count\n");
        for c in &self.rects {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.rect.x_min,
                c.rect.y_min,
                c.rect.x_max,
                c.rect.y_max,
                inst.labels[c.label].name,
                c.weight,
                c.covered.len(),
                c.mismatch
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateConfig {
    /// Distance kept between a stretched edge and the point that blocks it.
    /// One grid unit for integer data.
    pub gap: f64,
    /// Size of singleton boxes when no minimum font size is set but the
    /// rectangle still needs positive area.
    pub singleton_extent: f64,
    /// Also run the pair pass on vertical strips.
    pub vertical_strips: bool,
    pub cap: usize,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self {
            gap: 1.0,
            singleton_extent: 1.0,
            vertical_strips: false,
            cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

/// Stable 64-bit FNV-1a fingerprint of an instance's file form.
pub fn instance_fingerprint(inst: &RpfaInstance) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in format_instance(inst).bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Which constraint a candidate violates.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    CoveredSetMismatch,
    MismatchCount { stored: u32, actual: u32 },
    Tolerance { mismatch: u32, allowed: usize },
    AspectRatio { ratio: f64, lo: f64, hi: f64 },
    Degenerate,
    FontSize,
    Weight { stored: i64, expected: i64 },
}

/// Checks one candidate against the instance constraints from scratch.
pub fn check_candidate(inst: &RpfaInstance, c: &CandidateRect) -> Vec<Violation> {
    let mut out = Vec::new();
    let inside: Vec<u32> = (0..inst.n() as u32)
        .filter(|&i| c.rect.contains(inst.position(i as usize)))
        .collect();
    if inside != c.covered {
        out.push(Violation::CoveredSetMismatch);
    }
    let actual = inside
        .iter()
        .filter(|&&i| inst.label_of(i as usize) != c.label)
        .count() as u32;
    if actual != c.mismatch {
        out.push(Violation::MismatchCount {
            stored: c.mismatch,
            actual,
        });
    }
    let allowed = inst.params.tolerance(inside.len());
    if actual as usize > allowed {
        out.push(Violation::Tolerance {
            mismatch: actual,
            allowed,
        });
    }
    let p = &inst.params;
    let label = &inst.labels[c.label];
    if c.rect.is_degenerate() {
        if !(p.f == 0.0 && p.rho_l == 0.0) {
            out.push(Violation::Degenerate);
        }
    } else {
        let ratio = c.rect.major() / c.rect.minor();
        let (lo, hi) = ratio_band(p.rho_l, p.rho_u, label.bbox_ratio.value());
        if !ratio_in_band(ratio, lo, hi) {
            out.push(Violation::AspectRatio { ratio, lo, hi });
        }
    }
    if p.f > 0.0 && (c.rect.minor() < p.f || !label.fits(&c.rect, p.f)) {
        out.push(Violation::FontSize);
    }
    let expected = rect_weight(inst.n(), c.covered.len());
    if c.weight != expected {
        out.push(Violation::Weight {
            stored: c.weight,
            expected,
        });
    }
    out
}

/// Allowed band `[rho_l * a_l, rho_u * a_l]` for a rectangle's aspect ratio.
pub fn ratio_band(rho_l: f64, rho_u: f64, label_ratio: f64) -> (f64, f64) {
    (rho_l * label_ratio, rho_u * label_ratio)
}

pub fn ratio_in_band(ratio: f64, lo: f64, hi: f64) -> bool {
    ratio >= lo * (1.0 - RATIO_EPS) && ratio <= hi * (1.0 + RATIO_EPS)
}

/// Builds the full candidate set with the default configuration.
pub fn build_candidate_set(inst: &RpfaInstance) -> Result<CandidateSet, CandidateError> {
    build_candidate_set_with(inst, &CandidateConfig::default())
}

pub fn build_candidate_set_with(
    inst: &RpfaInstance,
    cfg: &CandidateConfig,
) -> Result<CandidateSet, CandidateError> {
    let counter = AtomicUsize::new(0);
    let overflow = AtomicBool::new(false);
    let emit_limit = |batch: usize| -> bool {
        let total = counter.fetch_add(batch, Ordering::Relaxed) + batch;
        if total > cfg.cap {
            overflow.store(true, Ordering::Relaxed);
        }
        overflow.load(Ordering::Relaxed)
    };

    let gen = Generator::new(inst, cfg);
    let mut raw: Vec<CandidateRect> = pair_pass(&gen, &emit_limit, &overflow);

    if cfg.vertical_strips && !overflow.load(Ordering::Relaxed) {
        let transposed = transpose_instance(inst);
        let tgen = Generator::new(&transposed, cfg);
        let mut extra = pair_pass(&tgen, &emit_limit, &overflow);
        for c in &mut extra {
            c.rect = transpose_rect(&c.rect);
        }
        raw.append(&mut extra);
    }

    for i in 0..inst.n() {
        if overflow.load(Ordering::Relaxed) {
            break;
        }
        let mut s = gen.singletons(i);
        emit_limit(s.len());
        raw.append(&mut s);
    }
    if overflow.load(Ordering::Relaxed) {
        return Err(CandidateError::TooManyCandidates { cap: cfg.cap });
    }

    raw.par_sort_unstable_by(|a, b| a.rect.total_cmp(&b.rect).then(a.label.cmp(&b.label)));
    raw.dedup_by(|a, b| a.label == b.label && a.rect.key() == b.rect.key());
    if raw.len() > cfg.cap {
        return Err(CandidateError::TooManyCandidates { cap: cfg.cap });
    }
    let n = inst.n();
    for c in &mut raw {
        c.weight = rect_weight(n, c.covered.len());
    }
    Ok(CandidateSet {
        rects: raw,
        instance_id: instance_fingerprint(inst),
        n,
    })
}

fn pair_pass(
    gen: &Generator<'_>,
    emit_limit: &(dyn Fn(usize) -> bool + Sync),
    overflow: &AtomicBool,
) -> Vec<CandidateRect> {
    let n = gen.inst.n();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut local = Vec::new();
            for j in i + 1..n {
                if overflow.load(Ordering::Relaxed) {
                    break;
                }
                let before = local.len();
                gen.pair_candidates(i, j, &mut local);
                if emit_limit(local.len() - before) {
                    break;
                }
            }
            local
        })
        .flatten()
        .collect()
}

fn transpose_rect(r: &Rect) -> Rect {
    Rect::new(r.y_min, r.x_min, r.y_max, r.x_max)
}

fn transpose_instance(inst: &RpfaInstance) -> RpfaInstance {
    let mut t = inst.clone();
    for p in &mut t.points {
        p.position = Point2::new(p.position.y, p.position.x);
    }
    t.bounds = transpose_rect(&inst.bounds);
    t
}

/// One step of a strip extension: the label census of the current rectangle.
#[derive(Clone)]
struct Census {
    counts: Vec<u32>,
    total: u32,
}

impl Census {
    fn new(labels: usize) -> Self {
        Self {
            counts: vec![0; labels],
            total: 0,
        }
    }

    fn add(&mut self, label: usize) {
        self.counts[label] += 1;
        self.total += 1;
    }

    /// Predominant label (lowest index on ties) and the number of other points.
    fn predominant(&self) -> (usize, u32) {
        let mut best = 0;
        for (l, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = l;
            }
        }
        (best, self.total - self.counts[best])
    }
}

pub(crate) struct Generator<'a> {
    inst: &'a RpfaInstance,
    cfg: &'a CandidateConfig,
    /// Point indices sorted by (x, y, index).
    by_x: Vec<u32>,
}

impl<'a> Generator<'a> {
    pub(crate) fn new(inst: &'a RpfaInstance, cfg: &'a CandidateConfig) -> Self {
        let mut by_x: Vec<u32> = (0..inst.n() as u32).collect();
        by_x.sort_by(|&a, &b| {
            let pa = inst.position(a as usize);
            let pb = inst.position(b as usize);
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(a.cmp(&b))
        });
        Self { inst, cfg, by_x }
    }

    fn x(&self, i: u32) -> f64 {
        self.inst.position(i as usize).x
    }

    fn label(&self, i: u32) -> usize {
        self.inst.label_of(i as usize)
    }

    fn tolerance_ok(&self, census: &Census) -> bool {
        let (_, mismatch) = census.predominant();
        mismatch as usize <= self.inst.params.tolerance(census.total as usize)
    }

    /// True once further widening of a `width x height` rectangle can never bring
    /// its ratio back into the band of `label`.
    fn extension_exhausted(&self, width: f64, height: f64, label: usize) -> bool {
        if height <= 0.0 || width < height {
            return false;
        }
        let a_l = self.inst.labels[label].bbox_ratio.value();
        let (_, hi) = ratio_band(self.inst.params.rho_l, self.inst.params.rho_u, a_l);
        width / height > hi * (1.0 + RATIO_EPS)
    }

    /// Candidates of the horizontal strip spanned by points `i` and `j`.
    pub(crate) fn pair_candidates(&self, i: usize, j: usize, out: &mut Vec<CandidateRect>) {
        let pi = self.inst.position(i);
        let pj = self.inst.position(j);
        let base = Rect::bounding(pi, pj);
        let (y_lo, y_hi) = (base.y_min, base.y_max);
        let height = y_hi - y_lo;

        let strip: Vec<u32> = self
            .by_x
            .iter()
            .copied()
            .filter(|&k| {
                let y = self.inst.position(k as usize).y;
                y_lo <= y && y <= y_hi
            })
            .collect();
        let a = strip.partition_point(|&k| self.x(k) < base.x_min);
        let b = strip.partition_point(|&k| self.x(k) <= base.x_max);

        let mut census = Census::new(self.inst.labels.len());
        for &k in &strip[a..b] {
            census.add(self.label(k));
        }
        if !self.tolerance_ok(&census) {
            return;
        }

        // Leftward extension. Each entry: (first strip index, census).
        let mut lefts: Vec<(usize, Census)> = vec![(a, census.clone())];
        let mut start = a;
        while start > 0 {
            let x_new = self.x(strip[start - 1]);
            let mut next = start;
            while next > 0 && self.x(strip[next - 1]) == x_new {
                next -= 1;
                census.add(self.label(strip[next]));
            }
            if !self.tolerance_ok(&census) {
                break;
            }
            let (label, _) = census.predominant();
            if self.extension_exhausted(base.x_max - x_new, height, label) {
                break;
            }
            start = next;
            lefts.push((start, census.clone()));
        }

        // Rightward extension of every left variant.
        for (left, left_census) in lefts {
            let x_left = self.x(strip[left]);
            self.emit_strip_rect(
                &strip,
                left,
                b,
                &left_census,
                x_left,
                base.x_max,
                y_lo,
                y_hi,
                out,
            );
            let mut census = left_census;
            let mut end = b;
            while end < strip.len() {
                let x_new = self.x(strip[end]);
                let mut next = end;
                while next < strip.len() && self.x(strip[next]) == x_new {
                    census.add(self.label(strip[next]));
                    next += 1;
                }
                if !self.tolerance_ok(&census) {
                    break;
                }
                let (label, _) = census.predominant();
                if self.extension_exhausted(x_new - x_left, height, label) {
                    break;
                }
                end = next;
                self.emit_strip_rect(&strip, left, end, &census, x_left, x_new, y_lo, y_hi, out);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn emit_strip_rect(
        &self,
        strip: &[u32],
        from: usize,
        to: usize,
        census: &Census,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        out: &mut Vec<CandidateRect>,
    ) {
        let mut covered: Vec<u32> = strip[from..to].to_vec();
        covered.sort_unstable();
        let (label, mismatch) = census.predominant();
        let rect = Rect::new(x_min, y_min, x_max, y_max);
        self.finalize(rect, label, covered, mismatch, out);
    }

    /// Aspect-ratio check with stretching, then the font check.
    fn finalize(
        &self,
        rect: Rect,
        label: usize,
        covered: Vec<u32>,
        mismatch: u32,
        out: &mut Vec<CandidateRect>,
    ) {
        let p = &self.inst.params;
        if rect.width() == 0.0 && rect.height() == 0.0 && !(p.f == 0.0 && p.rho_l == 0.0) {
            // coincident points: same treatment as a singleton
            for r in self.singleton_shapes(rect, label, &covered) {
                self.push_if_font_ok(r, label, covered.clone(), mismatch, out);
            }
            return;
        }
        let a_l = self.inst.labels[label].bbox_ratio.value();
        let (lo, hi) = ratio_band(p.rho_l, p.rho_u, a_l);
        let shapes: Vec<Rect> = if rect.is_degenerate() {
            if p.f == 0.0 && p.rho_l == 0.0 {
                vec![rect]
            } else {
                self.stretch_to_ratio(&rect, &covered, hi, true)
            }
        } else {
            let ratio = rect.major() / rect.minor();
            if ratio_in_band(ratio, lo, hi) {
                vec![rect]
            } else if ratio > hi {
                self.stretch_to_ratio(&rect, &covered, hi, true)
            } else {
                self.stretch_to_ratio(&rect, &covered, lo, false)
            }
        };
        for r in shapes {
            if !r.is_degenerate() {
                let ratio = r.major() / r.minor();
                if !ratio_in_band(ratio, lo, hi) {
                    continue;
                }
            }
            self.push_if_font_ok(r, label, covered.clone(), mismatch, out);
        }
    }

    fn push_if_font_ok(
        &self,
        rect: Rect,
        label: usize,
        covered: Vec<u32>,
        mismatch: u32,
        out: &mut Vec<CandidateRect>,
    ) {
        let f = self.inst.params.f;
        if f > 0.0 && (rect.minor() < f || !self.inst.labels[label].fits(&rect, f)) {
            return;
        }
        out.push(CandidateRect {
            rect,
            label,
            covered,
            mismatch,
            weight: 0,
        });
    }

    /// Stretches `rect` until its ratio equals `target`. Too elongated
    /// rectangles grow along the minor axis, too square ones along the major axis.
    fn stretch_to_ratio(
        &self,
        rect: &Rect,
        covered: &[u32],
        target: f64,
        grow_minor: bool,
    ) -> Vec<Rect> {
        let horizontal = rect.width() >= rect.height();
        let (major_axis, minor_axis) = if horizontal {
            (Axis::X, Axis::Y)
        } else {
            (Axis::Y, Axis::X)
        };
        if grow_minor {
            if !target.is_finite() {
                return Vec::new();
            }
            let wanted = rect.major() / target;
            if wanted <= rect.minor() {
                return Vec::new();
            }
            self.stretch_axis(rect, minor_axis, wanted, covered)
        } else {
            let wanted = rect.minor() * target;
            if wanted <= rect.major() {
                return Vec::new();
            }
            self.stretch_axis(rect, major_axis, wanted, covered)
        }
    }

    /// Grows `rect` along `axis` to `target` length without covering a point
    /// outside `covered`. Returns the positive-side, negative-side and centred
    /// variants that fit.
    fn stretch_axis(&self, rect: &Rect, axis: Axis, target: f64, covered: &[u32]) -> Vec<Rect> {
        let (lo, hi) = rect.extent(axis);
        let delta = target - (hi - lo);
        if delta <= 0.0 {
            return vec![*rect];
        }
        let (c_lo, c_hi) = rect.extent(axis.other());
        let mut free_pos = f64::INFINITY;
        let mut free_neg = f64::INFINITY;
        for (k, pt) in self.inst.points.iter().enumerate() {
            let (along, across) = match axis {
                Axis::X => (pt.position.x, pt.position.y),
                Axis::Y => (pt.position.y, pt.position.x),
            };
            if across < c_lo || across > c_hi {
                continue;
            }
            if along > hi {
                free_pos = free_pos.min(along - hi - self.cfg.gap);
            } else if along < lo {
                free_neg = free_neg.min(lo - along - self.cfg.gap);
            } else {
                debug_assert!(covered.binary_search(&(k as u32)).is_ok());
            }
        }
        let free_pos = free_pos.max(0.0);
        let free_neg = free_neg.max(0.0);
        let mut out = Vec::with_capacity(3);
        if free_pos >= delta {
            out.push(rect.with_extent(axis, lo, hi + delta));
        }
        if free_neg >= delta {
            out.push(rect.with_extent(axis, lo - delta, hi));
        }
        let half = delta / 2.0;
        let centred = if free_pos >= half && free_neg >= half {
            Some((lo - half, hi + half))
        } else if free_pos < half && free_pos + free_neg >= delta {
            Some((lo - (delta - free_pos), hi + free_pos))
        } else if free_neg < half && free_pos + free_neg >= delta {
            Some((lo - free_neg, hi + (delta - free_neg)))
        } else {
            None
        };
        if let Some((a, b)) = centred {
            let r = rect.with_extent(axis, a, b);
            if !out.iter().any(|o| o.key() == r.key()) {
                out.push(r);
            }
        }
        out
    }

    /// Shapes for a rectangle of zero width and height at a point location:
    /// the label box at minimum font size, placed by stretching horizontally
    /// and then vertically (up to nine placements).
    fn singleton_shapes(&self, at: Rect, label: usize, covered: &[u32]) -> Vec<Rect> {
        let p = &self.inst.params;
        let info = &self.inst.labels[label];
        let height = if p.f > 0.0 {
            p.f
        } else {
            self.cfg.singleton_extent
        };
        let width = height * info.bbox_ratio.value();
        let mut out: Vec<Rect> = Vec::with_capacity(9);
        for h in self.stretch_axis(&at, Axis::X, width, covered) {
            for r in self.stretch_axis(&h, Axis::Y, height, covered) {
                if !out.iter().any(|o| o.key() == r.key()) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Singleton candidates of point `i`.
    pub(crate) fn singletons(&self, i: usize) -> Vec<CandidateRect> {
        let at = Rect::from_point(self.inst.position(i));
        let mut census = Census::new(self.inst.labels.len());
        let mut covered = Vec::new();
        for (k, pt) in self.inst.points.iter().enumerate() {
            if at.contains(pt.position) {
                covered.push(k as u32);
                census.add(pt.label);
            }
        }
        if !self.tolerance_ok(&census) {
            return Vec::new();
        }
        let (label, mismatch) = census.predominant();
        let mut out = Vec::new();
        let p = &self.inst.params;
        if p.f == 0.0 && p.rho_l == 0.0 {
            out.push(CandidateRect {
                rect: at,
                label,
                covered,
                mismatch,
                weight: 0,
            });
            return out;
        }
        for r in self.singleton_shapes(at, label, &covered) {
            self.push_if_font_ok(r, label, covered.clone(), mismatch, &mut out);
        }
        out
    }
}

/// Candidates generated from the pair `(i, j)` alone (without deduplication or weights).
pub fn pair_candidates(inst: &RpfaInstance, i: usize, j: usize) -> Vec<CandidateRect> {
    let cfg = CandidateConfig::default();
    let gen = Generator::new(inst, &cfg);
    let mut out = Vec::new();
    gen.pair_candidates(i, j, &mut out);
    out
}

pub fn singleton_candidates(inst: &RpfaInstance, i: usize) -> Vec<CandidateRect> {
    singleton_candidates_with(inst, i, &CandidateConfig::default())
}

pub fn singleton_candidates_with(
    inst: &RpfaInstance,
    i: usize,
    cfg: &CandidateConfig,
) -> Vec<CandidateRect> {
    Generator::new(inst, cfg).singletons(i)
}
