//! Reduction from disjoint box covering in a rectilinear polygon (DBCR) to the
//! two-label, unconstrained aggregation problem.
//!
//! The polygon grid is refined by 10. Lattice points outside the polygon are
//! peeled into layers by 8-neighbour dilation from the boundary; odd layers
//! become blue and even layers red. Boundary lattice points get a checkered
//! colouring (corners and points aligned with an element are blue) and the
//! elements become red points. The bound is `k = delta + omega + sigma`, where
//! `delta` is the number of segments covering the layer contours and `sigma`
//! the number of colour switches along the boundary.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::candidates::{build_candidate_set, CandidateRect, CandidateSet};
use crate::error::ReductionError;
use crate::exact::solve_exact;
use crate::geometry::{Point2, Rect};
use crate::instance::{ConstraintParams, LabelInfo, LabeledPoint, RpfaInstance};
use crate::wis::{build_conflict_graph, rect_weight, validate_solution, ConflictGraph, Solution};

pub const REFINEMENT: i64 = 10;
pub const DEFAULT_MARGIN: i64 = 4;
pub const RED: usize = 0;
pub const BLUE: usize = 1;

/// Largest polygon side (before refinement) accepted by the brute-force verifier.
pub const VERIFY_MAX_SIDE: i64 = 10;
pub const VERIFY_MAX_ELEMENTS: usize = 3;

type P = (i64, i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbcrInstance {
    /// Outer ring of the polygon.
    pub outer: Vec<P>,
    pub holes: Vec<Vec<P>>,
    pub elements: Vec<P>,
    pub omega: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Layer(u32),
    Boundary,
    Element,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Layer(i) => write!(f, "layer:{i}"),
            Provenance::Boundary => write!(f, "boundary"),
            Provenance::Element => write!(f, "element"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub rpfa0: RpfaInstance,
    pub k: usize,
    pub delta: usize,
    pub omega: usize,
    pub sigma: usize,
    pub provenance: Vec<Provenance>,
    /// The input after grid refinement.
    pub refined: DbcrInstance,
    pub margin: i64,
}

impl ReductionOutput {
    /// Sidecar file: one `index,tag` line per point.
    pub fn provenance_text(&self) -> String {
        let mut s = String::from("index,tag\n");
        for (i, p) in self.provenance.iter().enumerate() {
            let _ = writeln!(s, "{i},{p}");
        }
        s
    }

    fn index_of(&self) -> HashMap<P, usize> {
        self.rpfa0
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| ((p.position.x as i64, p.position.y as i64), i))
            .collect()
    }
}

impl DbcrInstance {
    pub fn rings(&self) -> impl Iterator<Item = &Vec<P>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    fn edges(&self) -> Vec<(P, P)> {
        self.rings()
            .flat_map(|r| (0..r.len()).map(move |i| (r[i], r[(i + 1) % r.len()])))
            .collect()
    }

    pub fn corners(&self) -> Vec<P> {
        self.rings().flatten().copied().collect()
    }

    pub fn bbox(&self) -> (P, P) {
        let xs = self.outer.iter().map(|p| p.0);
        let ys = self.outer.iter().map(|p| p.1);
        (
            (xs.clone().min().unwrap_or(0), ys.clone().min().unwrap_or(0)),
            (xs.max().unwrap_or(0), ys.max().unwrap_or(0)),
        )
    }

    pub fn scaled(&self, f: i64) -> DbcrInstance {
        let s = |p: &P| (p.0 * f, p.1 * f);
        DbcrInstance {
            outer: self.outer.iter().map(s).collect(),
            holes: self
                .holes
                .iter()
                .map(|h| h.iter().map(s).collect())
                .collect(),
            elements: self.elements.iter().map(s).collect(),
            omega: self.omega,
        }
    }

    /// Even-odd test in doubled coordinates; `(qx, qy)` must not lie on an
    /// edge line crossing (one of them odd suffices for lattice queries).
    fn inside_doubled(&self, qx: i64, qy: i64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if a.0 != b.0 {
                continue;
            }
            let x = 2 * a.0;
            let (y0, y1) = (2 * a.1.min(b.1), 2 * a.1.max(b.1));
            if x > qx && y0 < qy && qy < y1 {
                inside = !inside;
            }
        }
        inside
    }

    /// Point on the boundary (any ring).
    pub fn on_boundary(&self, p: P) -> bool {
        self.edges().iter().any(|&(a, b)| on_segment(p, a, b))
    }

    /// Closed containment in the polygon region for a lattice point.
    pub fn contains_point(&self, p: P) -> bool {
        self.on_boundary(p) || self.inside_doubled(2 * p.0 + 1, 2 * p.1 + 1)
    }

    /// Strict interior for a lattice point.
    pub fn interior_point(&self, p: P) -> bool {
        !self.on_boundary(p) && self.inside_doubled(2 * p.0 + 1, 2 * p.1 + 1)
    }

    /// True when the closed integer rectangle lies inside the closed polygon.
    pub fn contains_rect(&self, lo: P, hi: P) -> bool {
        if lo == hi {
            return self.contains_point(lo);
        }
        if lo.0 == hi.0 || lo.1 == hi.1 {
            // segment: every unit piece's midpoint must be inside or on the boundary
            let steps = (hi.0 - lo.0) + (hi.1 - lo.1);
            return (0..steps).all(|s| {
                let (mx, my) = if lo.0 == hi.0 {
                    (2 * lo.0, 2 * (lo.1 + s) + 1)
                } else {
                    (2 * (lo.0 + s) + 1, 2 * lo.1)
                };
                self.edges()
                    .iter()
                    .any(|&(a, b)| on_segment_doubled((mx, my), a, b))
                    || self.inside_doubled_any(mx, my)
            });
        }
        (lo.0..hi.0).all(|x| (lo.1..hi.1).all(|y| self.inside_doubled(2 * x + 1, 2 * y + 1)))
    }

    /// Inside test for a doubled point off the boundary with exactly one odd
    /// coordinate. Points on a horizontal grid line are nudged up by a quarter
    /// unit, which cannot cross an integer edge.
    fn inside_doubled_any(&self, qx: i64, qy: i64) -> bool {
        if qy % 2 != 0 {
            self.inside_doubled(qx, qy)
        } else {
            self.inside_quad(2 * qx, 2 * qy + 1)
        }
    }

    /// Even-odd test in quadrupled coordinates.
    fn inside_quad(&self, qx: i64, qy: i64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if a.0 != b.0 {
                continue;
            }
            let x = 4 * a.0;
            let (y0, y1) = (4 * a.1.min(b.1), 4 * a.1.max(b.1));
            if x > qx && y0 < qy && qy < y1 {
                inside = !inside;
            }
        }
        inside
    }

    /// Reflex (270 degree) corners, found by counting inside quadrants.
    pub fn reflex_corners(&self) -> Vec<P> {
        self.corners()
            .into_iter()
            .filter(|&(x, y)| {
                let quads = [(1, 1), (-1, 1), (1, -1), (-1, -1)];
                quads
                    .iter()
                    .filter(|(dx, dy)| self.inside_doubled(2 * x + dx, 2 * y + dy))
                    .count()
                    == 3
            })
            .collect()
    }

    /// Rectangles spanned by pairs of opposite reflex corners.
    pub fn spanning_rectangles(&self) -> Vec<(P, P)> {
        let reflex = self.reflex_corners();
        let edges = self.edges();
        let mut out = Vec::new();
        for (i, &u) in reflex.iter().enumerate() {
            for &v in &reflex[i + 1..] {
                let lo = (u.0.min(v.0), u.1.min(v.1));
                let hi = (u.0.max(v.0), u.1.max(v.1));
                // u and v must be opposite corners of the rectangle
                let opposite = (u == lo && v == hi)
                    || (v == lo && u == hi)
                    || (u == (lo.0, hi.1) && v == (hi.0, lo.1))
                    || (v == (lo.0, hi.1) && u == (hi.0, lo.1));
                if !opposite || !self.contains_rect(lo, hi) {
                    continue;
                }
                let touches_only_uv =
                    edges
                        .iter()
                        .all(|&(a, b)| match clip_segment(a, b, lo, hi) {
                            None => true,
                            Some((s, t)) => s == t && (s == u || s == v),
                        });
                if touches_only_uv {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    /// Checks every restriction the reduction relies on.
    pub fn validate(&self) -> Result<(), ReductionError> {
        let bad = |m: String| Err(ReductionError::InvalidInput(m));
        for (ri, ring) in self.rings().enumerate() {
            if ring.len() < 4 || ring.len() % 2 != 0 {
                return bad(format!("ring {ri} needs an even number (>= 4) of vertices"));
            }
            for i in 0..ring.len() {
                let (a, b, c) = (
                    ring[i],
                    ring[(i + 1) % ring.len()],
                    ring[(i + 2) % ring.len()],
                );
                if (a.0 == b.0) == (a.1 == b.1) {
                    return bad(format!(
                        "edge {a:?}-{b:?} of ring {ri} is not axis-parallel"
                    ));
                }
                if (a.0 == b.0) == (b.0 == c.0) {
                    return bad(format!(
                        "ring {ri} has collinear consecutive edges at {b:?}"
                    ));
                }
            }
        }
        let edges = self.edges();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if let Some((s, t)) = clip_segment(
                    c,
                    d,
                    (a.0.min(b.0), a.1.min(b.1)),
                    (a.0.max(b.0), a.1.max(b.1)),
                ) {
                    let shared_vertex = s == t && (s == a || s == b) && (s == c || s == d);
                    let adjacent = b == c || d == a;
                    if !(shared_vertex && adjacent) {
                        return bad(format!("edges {a:?}-{b:?} and {c:?}-{d:?} intersect"));
                    }
                }
            }
        }
        for (hi, hole) in self.holes.iter().enumerate() {
            let outer_only = DbcrInstance {
                outer: self.outer.clone(),
                holes: vec![],
                elements: vec![],
                omega: 0,
            };
            if !hole.iter().all(|&p| outer_only.interior_point(p)) {
                return bad(format!("hole {hi} is not inside the outer ring"));
            }
            for (hj, other) in self.holes.iter().enumerate() {
                if hi != hj {
                    let single = DbcrInstance {
                        outer: other.clone(),
                        holes: vec![],
                        elements: vec![],
                        omega: 0,
                    };
                    if hole.iter().any(|&p| single.interior_point(p)) {
                        return bad(format!("hole {hi} lies inside hole {hj}"));
                    }
                }
            }
        }
        for &e in &self.elements {
            if !self.interior_point(e) {
                return bad(format!("element {e:?} is not strictly inside the polygon"));
            }
        }
        let corners = self.corners();
        for (i, &e) in self.elements.iter().enumerate() {
            for &f in &self.elements[i + 1..] {
                if e.0 == f.0 || e.1 == f.1 {
                    return bad(format!(
                        "elements {e:?} and {f:?} are not in general position"
                    ));
                }
            }
            for &c in &corners {
                if e.0 == c.0 || e.1 == c.1 {
                    return bad(format!(
                        "element {e:?} and corner {c:?} are not in general position"
                    ));
                }
            }
        }
        for (lo, hi) in self.spanning_rectangles() {
            let covered = self
                .elements
                .iter()
                .any(|&e| lo.0 <= e.0 && e.0 <= hi.0 && lo.1 <= e.1 && e.1 <= hi.1);
            if !covered {
                return bad(format!(
                    "spanning rectangle {lo:?}-{hi:?} contains no element"
                ));
            }
        }
        Ok(())
    }
}

fn on_segment(p: P, a: P, b: P) -> bool {
    a.0.min(b.0) <= p.0 && p.0 <= a.0.max(b.0) && a.1.min(b.1) <= p.1 && p.1 <= a.1.max(b.1)
}

fn on_segment_doubled(q: P, a: P, b: P) -> bool {
    on_segment(q, (2 * a.0, 2 * a.1), (2 * b.0, 2 * b.1))
}

/// Intersection of an axis-parallel segment with a closed rectangle.
fn clip_segment(a: P, b: P, lo: P, hi: P) -> Option<(P, P)> {
    let x0 = a.0.min(b.0).max(lo.0);
    let x1 = a.0.max(b.0).min(hi.0);
    let y0 = a.1.min(b.1).max(lo.1);
    let y1 = a.1.max(b.1).min(hi.1);
    (x0 <= x1 && y0 <= y1).then_some(((x0, y0), (x1, y1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionConfig {
    /// Number of layers peeled outside the polygon's bounding box.
    pub margin: i64,
    pub colouring: Colouring,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            colouring: Colouring::ChordAware,
        }
    }
}

/// How boundary points are coloured.
///
/// `Parity` is the plain scheme: corners and every boundary point sharing a
/// coordinate with an element are blue, the rest alternate by parity so that
/// opposite points differ. On non-convex polygons it leaves monochrome chords:
/// a reflex corner is blue and one of its two chords always ends on a blue
/// parity point, and two element-aligned points can face each other across a
/// part of the polygon that does not contain the element.
///
/// `ChordAware` marks only the first boundary point hit by each axis ray from
/// an element as blue, and forces the far end of every chord leaving a
/// reflex corner to red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Colouring {
    Parity,
    #[default]
    ChordAware,
}

pub fn reduce(inp: &DbcrInstance) -> Result<ReductionOutput, ReductionError> {
    reduce_with(inp, &ReductionConfig::default())
}

pub fn reduce_with(
    inp: &DbcrInstance,
    cfg: &ReductionConfig,
) -> Result<ReductionOutput, ReductionError> {
    inp.validate()?;
    if cfg.margin < 1 {
        return Err(ReductionError::InvalidInput(
            "margin must be at least 1".into(),
        ));
    }
    let r = inp.scaled(REFINEMENT);
    let ((x0, y0), (x1, y1)) = r.bbox();
    let (gx0, gy0, gx1, gy1) = (
        x0 - cfg.margin,
        y0 - cfg.margin,
        x1 + cfg.margin,
        y1 + cfg.margin,
    );
    let lattice_points = ((gx1 - gx0 + 1) * (gy1 - gy0 + 1)) as u64;
    if lattice_points > 4_000_000 {
        return Err(ReductionError::ResourceLimit(format!(
            "{lattice_points} lattice points in the embedding grid"
        )));
    }

    // classify lattice points
    let edges = r.edges();
    let mut boundary: Vec<P> = Vec::new();
    let mut outside: HashSet<P> = HashSet::new();
    for x in gx0..=gx1 {
        for y in gy0..=gy1 {
            let p = (x, y);
            if edges.iter().any(|&(a, b)| on_segment(p, a, b)) {
                boundary.push(p);
            } else if !r.inside_doubled(2 * x + 1, 2 * y + 1) {
                outside.insert(p);
            }
        }
    }

    // layers by multi-source 8-neighbour BFS
    let mut layer: HashMap<P, u32> = HashMap::new();
    let mut queue: VecDeque<(P, u32)> = boundary.iter().map(|&p| (p, 0)).collect();
    let boundary_set: HashSet<P> = boundary.iter().copied().collect();
    while let Some((p, d)) = queue.pop_front() {
        for dx in -1..=1 {
            for dy in -1..=1 {
                let q = (p.0 + dx, p.1 + dy);
                if outside.contains(&q) && !layer.contains_key(&q) && !boundary_set.contains(&q) {
                    layer.insert(q, d + 1);
                    queue.push_back((q, d + 1));
                }
            }
        }
    }

    let delta = segment_cover_count(&layer)?;

    // boundary colours
    let colours = boundary_colours(&r, cfg.colouring, &boundary_set)?;
    let sigma = colour_switches_per_edge(&r, &colours);

    let mut points: Vec<(P, usize, Provenance)> = Vec::new();
    let mut layered: Vec<(&P, &u32)> = layer.iter().collect();
    layered.sort();
    for (&p, &d) in layered {
        points.push((p, if d % 2 == 1 { BLUE } else { RED }, Provenance::Layer(d)));
    }
    let mut bpts: Vec<(&P, &usize)> = colours.iter().collect();
    bpts.sort();
    for (&p, &c) in bpts {
        points.push((p, c, Provenance::Boundary));
    }
    for &e in &r.elements {
        points.push((e, RED, Provenance::Element));
    }

    let labels = vec![
        LabelInfo::new("red").expect("valid name"),
        LabelInfo::new("blue").expect("valid name"),
    ];
    let rpfa0 = RpfaInstance::new(
        points
            .iter()
            .map(|&(p, l, _)| LabeledPoint {
                position: Point2::new(p.0 as f64, p.1 as f64),
                label: l,
            })
            .collect(),
        labels,
        ConstraintParams::unconstrained(),
        Some(Rect::new(gx0 as f64, gy0 as f64, gx1 as f64, gy1 as f64)),
    )
    .map_err(|e| ReductionError::InvalidInput(e.to_string()))?;
    Ok(ReductionOutput {
        rpfa0,
        k: delta + inp.omega + sigma,
        delta,
        omega: inp.omega,
        sigma,
        provenance: points.iter().map(|&(_, _, t)| t).collect(),
        refined: r,
        margin: cfg.margin,
    })
}

/// Colours of all boundary lattice points of a refined polygon.
fn boundary_colours(
    r: &DbcrInstance,
    mode: Colouring,
    boundary: &HashSet<P>,
) -> Result<BTreeMap<P, usize>, ReductionError> {
    let corners: HashSet<P> = r.corners().into_iter().collect();
    let (ex, ey): (HashSet<i64>, HashSet<i64>) = match mode {
        Colouring::Parity => (
            r.elements.iter().map(|e| e.0).collect(),
            r.elements.iter().map(|e| e.1).collect(),
        ),
        Colouring::ChordAware => (HashSet::new(), HashSet::new()),
    };
    let mut forced: HashMap<P, usize> = HashMap::new();
    if mode == Colouring::ChordAware {
        for &e in &r.elements {
            for d in DIRS {
                forced.insert(ray_hit(e, d, boundary), BLUE);
            }
        }
        for c in r.reflex_corners() {
            for d in DIRS {
                let q = (c.0 + d.0, c.1 + d.1);
                if boundary.contains(&q) || !r.inside_doubled(2 * q.0 + 1, 2 * q.1 + 1) {
                    continue;
                }
                let end = ray_hit(c, d, boundary);
                if corners.contains(&end) {
                    return Err(ReductionError::InvalidInput(format!(
                        "chord from reflex corner {c:?} ends at corner {end:?}"
                    )));
                }
                if forced.insert(end, RED) == Some(BLUE) {
                    return Err(ReductionError::InvalidInput(format!(
                        "boundary point {end:?} is aligned with both an element and a reflex corner"
                    )));
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (a, b) in r.edges() {
        let (xa, xb) = (a.0.min(b.0), a.0.max(b.0));
        let (ya, yb) = (a.1.min(b.1), a.1.max(b.1));
        for x in xa..=xb {
            for y in ya..=yb {
                let p = (x, y);
                if out.contains_key(&p) {
                    continue;
                }
                let important = corners.contains(&p) || ex.contains(&x) || ey.contains(&y);
                let colour = if let Some(&c) = forced.get(&p) {
                    c
                } else if important {
                    BLUE
                } else if a.1 == b.1 {
                    let interior_above = r.inside_doubled(2 * x, 2 * y + 1);
                    let odd = x.rem_euclid(2) == 1;
                    if interior_above {
                        // bottom boundary: red iff x odd
                        if odd {
                            RED
                        } else {
                            BLUE
                        }
                    } else if odd {
                        // top boundary: blue iff x odd
                        BLUE
                    } else {
                        RED
                    }
                } else {
                    let interior_right = r.inside_doubled_any(2 * x + 1, 2 * y);
                    let odd = y.rem_euclid(2) == 1;
                    if interior_right {
                        // left boundary: red iff y odd
                        if odd {
                            RED
                        } else {
                            BLUE
                        }
                    } else if odd {
                        // right boundary: blue iff y odd
                        BLUE
                    } else {
                        RED
                    }
                };
                out.insert(p, colour);
            }
        }
    }
    Ok(out)
}

const DIRS: [P; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// First boundary point reached from `s` walking in direction `d`.
fn ray_hit(s: P, d: P, boundary: &HashSet<P>) -> P {
    let mut q = (s.0 + d.0, s.1 + d.1);
    while !boundary.contains(&q) {
        q = (q.0 + d.0, q.1 + d.1);
    }
    q
}

fn colour_switches_per_edge(r: &DbcrInstance, colours: &BTreeMap<P, usize>) -> usize {
    let mut switches = 0;
    for (a, b) in r.edges() {
        let steps = (b.0 - a.0).abs() + (b.1 - a.1).abs();
        let (dx, dy) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
        for s in 0..steps {
            let p = (a.0 + s * dx, a.1 + s * dy);
            let q = (p.0 + dx, p.1 + dy);
            if colours[&p] != colours[&q] {
                switches += 1;
            }
        }
    }
    switches
}

/// A 4-connected component of one layer, ordered along the contour.
#[derive(Debug, Clone)]
struct Contour {
    points: Vec<P>,
    cyclic: bool,
}

fn contours(layer: &HashMap<P, u32>) -> Result<Vec<Contour>, ReductionError> {
    let mut by_layer: BTreeMap<u32, Vec<P>> = BTreeMap::new();
    for (&p, &d) in layer {
        by_layer.entry(d).or_default().push(p);
    }
    let mut out = Vec::new();
    for (d, mut pts) in by_layer {
        pts.sort();
        let set: HashSet<P> = pts.iter().copied().collect();
        let nbrs = |p: P| -> Vec<P> {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|(dx, dy)| (p.0 + dx, p.1 + dy))
                .filter(|q| set.contains(q))
                .collect()
        };
        if pts.iter().any(|&p| nbrs(p).len() > 2) {
            return Err(ReductionError::UnsupportedLayer { layer: d });
        }
        let mut seen: HashSet<P> = HashSet::new();
        // paths first (start at an endpoint), then cycles
        let mut starts: Vec<P> = pts.iter().copied().filter(|&p| nbrs(p).len() < 2).collect();
        starts.extend(pts.iter().copied());
        for s in starts {
            if seen.contains(&s) {
                continue;
            }
            let mut order = vec![s];
            seen.insert(s);
            let mut cur = s;
            loop {
                let next = nbrs(cur).into_iter().find(|q| !seen.contains(q));
                match next {
                    Some(q) => {
                        seen.insert(q);
                        order.push(q);
                        cur = q;
                    }
                    None => break,
                }
            }
            let cyclic = order.len() > 2 && nbrs(s).len() == 2;
            out.push(Contour {
                points: order,
                cyclic,
            });
        }
    }
    Ok(out)
}

fn is_turn(prev: P, p: P, next: P) -> bool {
    (prev.0 == p.0) != (p.0 == next.0)
}

/// Splits a contour into maximal straight runs; every point is in exactly one.
fn straight_runs(c: &Contour) -> Vec<Vec<P>> {
    let pts = &c.points;
    let n = pts.len();
    if n <= 2 {
        return vec![pts.clone()];
    }
    if !c.cyclic {
        let mut runs = vec![vec![pts[0]]];
        for i in 1..n {
            let turn_before = i >= 2 && is_turn(pts[i - 2], pts[i - 1], pts[i]);
            if turn_before {
                runs.push(Vec::new());
            }
            runs.last_mut().unwrap().push(pts[i]);
        }
        return runs;
    }
    let turns: Vec<usize> = (0..n)
        .filter(|&i| is_turn(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]))
        .collect();
    if turns.is_empty() {
        return vec![pts.clone()];
    }
    let mut runs = Vec::new();
    for (t, &start) in turns.iter().enumerate() {
        let end = turns[(t + 1) % turns.len()];
        let mut run = Vec::new();
        let mut i = start;
        loop {
            run.push(pts[i]);
            i = (i + 1) % n;
            if i == end {
                break;
            }
        }
        runs.push(run);
    }
    runs
}

fn segment_cover_count(layer: &HashMap<P, u32>) -> Result<usize, ReductionError> {
    Ok(contours(layer)?
        .iter()
        .map(|c| straight_runs(c).len())
        .sum())
}

/// Answer of both brute-force deciders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub dbcr_yes: bool,
    pub rpfa_optimum: usize,
    pub k: usize,
    pub candidates: usize,
}

impl EquivalenceReport {
    pub fn rpfa_yes(&self) -> bool {
        self.rpfa_optimum <= self.k
    }

    pub fn agree(&self) -> bool {
        self.dbcr_yes == self.rpfa_yes()
    }
}

fn check_verify_scale(inp: &DbcrInstance) -> Result<(), ReductionError> {
    let ((x0, y0), (x1, y1)) = inp.bbox();
    if x1 - x0 > VERIFY_MAX_SIDE
        || y1 - y0 > VERIFY_MAX_SIDE
        || inp.elements.len() > VERIFY_MAX_ELEMENTS
    {
        return Err(ReductionError::ResourceLimit(format!(
            "brute-force verification is limited to polygons of side <= {VERIFY_MAX_SIDE} and <= {VERIFY_MAX_ELEMENTS} elements"
        )));
    }
    Ok(())
}

/// Decides DBCR by enumerating partitions of the elements into groups whose
/// bounding boxes lie inside the polygon and are pairwise disjoint. Returns a
/// smallest such grouping when one with at most `omega` groups exists.
pub fn dbcr_brute_force(inp: &DbcrInstance) -> Option<Vec<Vec<usize>>> {
    let m = inp.elements.len();
    let mut best: Option<Vec<Vec<usize>>> = None;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    fn rec(
        inp: &DbcrInstance,
        i: usize,
        groups: &mut Vec<Vec<usize>>,
        best: &mut Option<Vec<Vec<usize>>>,
    ) {
        if i == inp.elements.len() {
            let boxes: Vec<(P, P)> = groups.iter().map(|g| group_box(inp, g)).collect();
            if !boxes.iter().all(|&(lo, hi)| inp.contains_rect(lo, hi)) {
                return;
            }
            for a in 0..boxes.len() {
                for b in a + 1..boxes.len() {
                    let (l1, h1) = boxes[a];
                    let (l2, h2) = boxes[b];
                    if l1.0 <= h2.0 && l2.0 <= h1.0 && l1.1 <= h2.1 && l2.1 <= h1.1 {
                        return;
                    }
                }
            }
            if best.as_ref().is_none_or(|b| groups.len() < b.len()) {
                *best = Some(groups.clone());
            }
            return;
        }
        for g in 0..groups.len() {
            groups[g].push(i);
            rec(inp, i + 1, groups, best);
            groups[g].pop();
        }
        groups.push(vec![i]);
        rec(inp, i + 1, groups, best);
        groups.pop();
    }
    if m == 0 {
        return Some(Vec::new());
    }
    rec(inp, 0, &mut groups, &mut best);
    best.filter(|b| b.len() <= inp.omega)
}

fn group_box(inp: &DbcrInstance, g: &[usize]) -> (P, P) {
    let xs = g.iter().map(|&i| inp.elements[i].0);
    let ys = g.iter().map(|&i| inp.elements[i].1);
    (
        (xs.clone().min().unwrap(), ys.clone().min().unwrap()),
        (xs.max().unwrap(), ys.max().unwrap()),
    )
}

/// Minimum number of rectangles covering all points of the reduced instance,
/// computed exactly over its complete candidate set.
pub fn rpfa0_optimum(out: &ReductionOutput) -> Result<(usize, usize), ReductionError> {
    let cands = build_candidate_set(&out.rpfa0)
        .map_err(|e| ReductionError::ResourceLimit(e.to_string()))?;
    let m = cands.len();
    let g = build_conflict_graph(cands, out.rpfa0.n());
    let s = solve_exact(&g, None)
        .map_err(|e| ReductionError::ResourceLimit(e.to_string()))?
        .expect("no budget set");
    debug_assert_eq!(s.covered_points, out.rpfa0.n());
    Ok((s.cardinality, m))
}

pub fn equivalence_report(
    inp: &DbcrInstance,
    out: &ReductionOutput,
) -> Result<EquivalenceReport, ReductionError> {
    check_verify_scale(inp)?;
    let dbcr_yes = dbcr_brute_force(inp).is_some();
    let (rpfa_optimum, candidates) = rpfa0_optimum(out)?;
    Ok(EquivalenceReport {
        dbcr_yes,
        rpfa_optimum,
        k: out.k,
        candidates,
    })
}

/// Whether the DBCR instance and the reduced instance with bound `k` have the
/// same yes/no answer.
pub fn verify_equivalence(
    inp: &DbcrInstance,
    out: &ReductionOutput,
) -> Result<bool, ReductionError> {
    Ok(equivalence_report(inp, out)?.agree())
}

/// Builds the solution of the reduced instance described in the forward
/// direction of the proof from a DBCR grouping of the elements: straight
/// pieces of every layer contour, one rectangle per colour run of each
/// boundary ring, and the bounding box of each element group.
pub fn forward_solution(
    out: &ReductionOutput,
    groups: &[Vec<usize>],
) -> Result<(ConflictGraph, Solution), ReductionError> {
    let r = &out.refined;
    let index = out.index_of();
    let colour = |p: &P| out.rpfa0.points[index[p]].label;
    let mut rects: Vec<(Rect, Vec<P>)> = Vec::new();
    let mut stolen: HashSet<P> = HashSet::new();

    for ring in r.rings() {
        for run in boundary_runs(ring, &|p| colour(p)) {
            let (lo, hi) = bbox_of_points(&run);
            let mut members = Vec::new();
            for x in lo.0..=hi.0 {
                for y in lo.1..=hi.1 {
                    if index.contains_key(&(x, y)) {
                        members.push((x, y));
                        if !run.contains(&(x, y)) {
                            stolen.insert((x, y));
                        }
                    }
                }
            }
            rects.push((point_rect(lo, hi), members));
        }
    }

    let layer: HashMap<P, u32> = out
        .rpfa0
        .points
        .iter()
        .zip(&out.provenance)
        .filter_map(|(p, t)| match t {
            Provenance::Layer(d) => Some(((p.position.x as i64, p.position.y as i64), *d)),
            _ => None,
        })
        .collect();
    for c in contours(&layer)? {
        for run in straight_runs(&c) {
            let kept: Vec<P> = run.into_iter().filter(|p| !stolen.contains(p)).collect();
            if kept.is_empty() {
                continue;
            }
            let (lo, hi) = bbox_of_points(&kept);
            rects.push((point_rect(lo, hi), kept));
        }
    }

    for g in groups {
        let (lo, hi) = group_box(r, g);
        let members = g.iter().map(|&i| r.elements[i]).collect();
        rects.push((point_rect(lo, hi), members));
    }

    let inst = &out.rpfa0;
    let n = inst.n();
    let cands: Vec<CandidateRect> = rects
        .into_iter()
        .map(|(rect, _)| {
            let covered: Vec<u32> = (0..n as u32)
                .filter(|&i| rect.contains(inst.position(i as usize)))
                .collect();
            let reds = covered
                .iter()
                .filter(|&&i| inst.label_of(i as usize) == RED)
                .count();
            let label = if reds * 2 >= covered.len() { RED } else { BLUE };
            let mismatch = covered
                .iter()
                .filter(|&&i| inst.label_of(i as usize) != label)
                .count() as u32;
            CandidateRect {
                rect,
                label,
                weight: rect_weight(n, covered.len()),
                covered,
                mismatch,
            }
        })
        .collect();
    let m = cands.len();
    let g = build_conflict_graph(
        CandidateSet {
            rects: cands,
            instance_id: 0,
            n,
        },
        n,
    );
    let s = g.solution((0..m).collect());
    let report = validate_solution(&g, &s, inst);
    if !report.is_valid() {
        return Err(ReductionError::InvalidInput(format!(
            "forward construction is not viable: {:?}",
            report.violations.first()
        )));
    }
    Ok((g, s))
}

fn point_rect(lo: P, hi: P) -> Rect {
    Rect::new(lo.0 as f64, lo.1 as f64, hi.0 as f64, hi.1 as f64)
}

fn bbox_of_points(pts: &[P]) -> (P, P) {
    let x0 = pts.iter().map(|p| p.0).min().unwrap();
    let x1 = pts.iter().map(|p| p.0).max().unwrap();
    let y0 = pts.iter().map(|p| p.1).min().unwrap();
    let y1 = pts.iter().map(|p| p.1).max().unwrap();
    ((x0, y0), (x1, y1))
}

/// Lattice points of a ring in walking order (each once).
pub fn ring_lattice_walk(ring: &[P]) -> Vec<P> {
    let mut out = Vec::new();
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        let steps = (b.0 - a.0).abs() + (b.1 - a.1).abs();
        let (dx, dy) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
        for s in 0..steps {
            out.push((a.0 + s * dx, a.1 + s * dy));
        }
    }
    out
}

/// Maximal single-colour runs along a ring, treated cyclically.
fn boundary_runs(ring: &[P], colour: &dyn Fn(&P) -> usize) -> Vec<Vec<P>> {
    let walk = ring_lattice_walk(ring);
    let n = walk.len();
    let start = (0..n).find(|&i| colour(&walk[i]) != colour(&walk[(i + n - 1) % n]));
    let Some(start) = start else {
        return vec![walk];
    };
    let mut runs: Vec<Vec<P>> = Vec::new();
    for k in 0..n {
        let p = walk[(start + k) % n];
        let new_run = k == 0 || colour(&p) != colour(&walk[(start + k + n - 1) % n]);
        if new_run {
            runs.push(Vec::new());
        }
        runs.last_mut().unwrap().push(p);
    }
    runs
}

/// Parses the DBCR text format:
///
/// ```text
/// # comment
/// outer: 0,0 4,0 4,4 0,4
/// hole: 1,1 1,2 2,2 2,1
/// elements: 3,3
/// omega: 1
/// ```
pub fn parse_dbcr(text: &str) -> Result<DbcrInstance, ReductionError> {
    let mut outer = None;
    let mut holes = Vec::new();
    let mut elements = Vec::new();
    let mut omega = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| ReductionError::Parse {
            line: ln + 1,
            message: m,
        };
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err("expected `key: value`".into()))?;
        let coords = |v: &str| -> Result<Vec<P>, ReductionError> {
            v.split_whitespace()
                .map(|tok| {
                    let (x, y) = tok
                        .split_once(',')
                        .ok_or_else(|| err(format!("bad coordinate {tok:?}")))?;
                    let x = x
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad coordinate {tok:?}")))?;
                    let y = y
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad coordinate {tok:?}")))?;
                    Ok((x, y))
                })
                .collect()
        };
        match key.trim() {
            "outer" => {
                if outer.is_some() {
                    return Err(err("second outer ring".into()));
                }
                outer = Some(coords(value)?);
            }
            "hole" => holes.push(coords(value)?),
            "elements" | "element" => elements.extend(coords(value)?),
            "omega" => omega = Some(value.trim().parse().map_err(|_| err("bad omega".into()))?),
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| ReductionError::Parse {
        line: text.lines().count(),
        message: format!("missing `{k}`"),
    };
    Ok(DbcrInstance {
        outer: outer.ok_or_else(|| missing("outer"))?,
        holes,
        elements,
        omega: omega.ok_or_else(|| missing("omega"))?,
    })
}

pub fn format_dbcr(inp: &DbcrInstance) -> String {
    let ring = |r: &[P]| {
        r.iter()
            .map(|p| format!("{},{}", p.0, p.1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = format!("outer: {}\n", ring(&inp.outer));
    for h in &inp.holes {
        let _ = writeln!(s, "hole: {}", ring(h));
    }
    if !inp.elements.is_empty() {
        let _ = writeln!(s, "elements: {}", ring(&inp.elements));
    }
    let _ = writeln!(s, "omega: {}", inp.omega);
    s
}

/// Rectangle `[x0,x1] x [y0,y1]` as a counter-clockwise ring.
pub fn rect_ring(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<P> {
    vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}
