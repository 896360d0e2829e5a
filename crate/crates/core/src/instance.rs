//! Instance model, the text file format, the monospace font model and the
//! synthetic Uniform / Gaussian generators.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::InstanceError;
use crate::geometry::{AspectRatio, Point2, Rect};

/// Width of one monospace glyph as a fraction of the font height.
pub const GLYPH_WIDTH: f64 = 0.6;

/// Side length of the square drawing area used by the generators.
pub const GENERATOR_BOX: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelInfo {
    pub name: String,
    pub bbox_ratio: AspectRatio,
    pub char_count: usize,
}

impl LabelInfo {
    pub fn new(name: impl Into<String>) -> Result<Self, InstanceError> {
        let name = name.into();
        validate_label_name(&name)?;
        let char_count = name.chars().count();
        let ratio = (GLYPH_WIDTH * char_count as f64).max(1.0);
        Ok(Self {
            name,
            bbox_ratio: AspectRatio::new(ratio).expect("ratio clamped to >= 1"),
            char_count,
        })
    }

    /// Unrotated text box `(width, height)` at the given font height.
    pub fn text_box(&self, font: f64) -> (f64, f64) {
        (GLYPH_WIDTH * self.char_count as f64 * font, font)
    }

    /// Whether the label, aligned with the major axis of `rect`, fits at font height `font`.
    pub fn fits(&self, rect: &Rect, font: f64) -> bool {
        let (w, h) = self.text_box(font);
        w.max(h) <= rect.major() && w.min(h) <= rect.minor()
    }

    /// Largest font height at which the label fits inside `rect`.
    pub fn max_font(&self, rect: &Rect) -> f64 {
        let c = GLYPH_WIDTH * self.char_count as f64;
        if c >= 1.0 {
            rect.minor().min(rect.major() / c)
        } else {
            rect.major().min(rect.minor() / c)
        }
    }
}

fn validate_label_name(name: &str) -> Result<(), InstanceError> {
    if name.is_empty() {
        return Err(InstanceError::Validation("empty label name".into()));
    }
    if name.trim() != name || name.contains([',', ';', '\n', '\r', '#']) {
        return Err(InstanceError::Validation(format!(
            "label {name:?} contains a reserved character or surrounding whitespace"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub position: Point2,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintParams {
    pub rho_l: f64,
    pub rho_u: f64,
    pub t: u32,
    pub rho_t: f64,
    pub f: f64,
}

impl ConstraintParams {
    /// All constraints disabled: `rho_l = 0`, `rho_u = inf`, `t = rho_t = f = 0`.
    pub fn unconstrained() -> Self {
        Self {
            rho_l: 0.0,
            rho_u: f64::INFINITY,
            t: 0,
            rho_t: 0.0,
            f: 0.0,
        }
    }

    /// Parameters of the crop-harvest case study.
    pub fn case_study() -> Self {
        Self {
            rho_l: 0.75,
            rho_u: 2.0,
            t: 2,
            rho_t: 0.2,
            f: 16.0,
        }
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Validation(m));
        if !(self.rho_l >= 0.0 && self.rho_l < 1.0) {
            return bad(format!("rho_l must lie in [0, 1), got {}", self.rho_l));
        }
        if !(self.rho_u > 1.0) {
            return bad(format!("rho_u must be > 1, got {}", self.rho_u));
        }
        if !(0.0..=1.0).contains(&self.rho_t) {
            return bad(format!("rho_t must lie in [0, 1], got {}", self.rho_t));
        }
        if !(self.f >= 0.0 && self.f.is_finite()) {
            return bad(format!("f must be a finite number >= 0, got {}", self.f));
        }
        Ok(())
    }

    /// Largest number of mismatched points a rectangle covering `covered` points may hold.
    pub fn tolerance(&self, covered: usize) -> usize {
        let ratio_bound = (self.rho_t * covered as f64).floor() as usize;
        ratio_bound.min(self.t as usize)
    }
}

impl Default for ConstraintParams {
    fn default() -> Self {
        Self::unconstrained()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpfaInstance {
    pub points: Vec<LabeledPoint>,
    pub labels: Vec<LabelInfo>,
    pub params: ConstraintParams,
    pub bounds: Rect,
}

impl RpfaInstance {
    /// Builds and validates an instance. `bounds` defaults to the bounding box of the points.
    pub fn new(
        points: Vec<LabeledPoint>,
        labels: Vec<LabelInfo>,
        params: ConstraintParams,
        bounds: Option<Rect>,
    ) -> Result<Self, InstanceError> {
        if points.is_empty() {
            return Err(InstanceError::Validation("instance has no points".into()));
        }
        let bounds = bounds.unwrap_or_else(|| bbox_of(points.iter().map(|p| p.position)));
        let inst = Self {
            points,
            labels,
            params,
            bounds,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn position(&self, i: usize) -> Point2 {
        self.points[i].position
    }

    pub fn label_of(&self, i: usize) -> usize {
        self.points[i].label
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        self.params.validate()?;
        if self.points.is_empty() {
            return Err(InstanceError::Validation("instance has no points".into()));
        }
        let mut seen = HashMap::new();
        for (i, l) in self.labels.iter().enumerate() {
            validate_label_name(&l.name)?;
            if let Some(prev) = seen.insert(l.name.as_str(), i) {
                return Err(InstanceError::Validation(format!(
                    "label {:?} listed twice (#{prev} and #{i})",
                    l.name
                )));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.position.is_finite() {
                return Err(InstanceError::Validation(format!(
                    "point {i} is not finite"
                )));
            }
            if p.label >= self.labels.len() {
                return Err(InstanceError::Validation(format!(
                    "point {i} has label index {} out of range",
                    p.label
                )));
            }
            if !self.bounds.contains(p.position) {
                return Err(InstanceError::Validation(format!(
                    "point {i} at ({}, {}) lies outside bounds {}",
                    p.position.x, p.position.y, self.bounds
                )));
            }
        }
        Ok(())
    }

    /// Indices of points that share coordinates with an earlier point.
    pub fn duplicate_points(&self) -> Vec<usize> {
        let mut seen = HashMap::new();
        let mut dups = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let key = (p.position.x.to_bits(), p.position.y.to_bits());
            if seen.insert(key, i).is_some() {
                dups.push(i);
            }
        }
        dups
    }
}

pub fn bbox_of(points: impl IntoIterator<Item = Point2>) -> Rect {
    let mut it = points.into_iter();
    let first = it.next().unwrap_or(Point2::new(0.0, 0.0));
    it.fold(Rect::from_point(first), |r, p| {
        Rect::new(
            r.x_min.min(p.x),
            r.y_min.min(p.y),
            r.x_max.max(p.x),
            r.y_max.max(p.y),
        )
    })
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInstance {
    pub instance: RpfaInstance,
    pub warnings: Vec<String>,
}

/// Reads an instance file; warnings (duplicate coordinates) go to the log.
pub fn load_instance(path: impl AsRef<Path>) -> Result<RpfaInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_owned(),
        source,
    })?;
    let parsed = parse_instance(&text)?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(parsed.instance)
}

pub fn save_instance(inst: &RpfaInstance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, format_instance(inst)).map_err(|source| InstanceError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn format_instance(inst: &RpfaInstance) -> String {
    let p = &inst.params;
    let b = &inst.bounds;
    let mut out = String::new();
    let _ = writeln!(out, "#param rho_l={}", p.rho_l);
    let _ = writeln!(out, "#param rho_u={}", p.rho_u);
    let _ = writeln!(out, "#param t={}", p.t);
    let _ = writeln!(out, "#param rho_t={}", p.rho_t);
    let _ = writeln!(out, "#param f={}", p.f);
    let _ = writeln!(
        out,
        "#param bounds={},{},{},{}",
        b.x_min, b.y_min, b.x_max, b.y_max
    );
    let names: Vec<&str> = inst.labels.iter().map(|l| l.name.as_str()).collect();
    let _ = writeln!(out, "#param labels={}", names.join(";"));
    for pt in &inst.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            pt.position.x, pt.position.y, inst.labels[pt.label].name
        );
    }
    out
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance, InstanceError> {
    let mut params = ConstraintParams::unconstrained();
    let mut bounds = None;
    let mut labels: Vec<LabelInfo> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut in_header = true;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#param") {
            if !in_header {
                return Err(parse_err(line_no, 1, "#param after the first point"));
            }
            let col = line.len() - rest.trim_start().len() + 1;
            let (key, value) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, col, "expected key=value"))?;
            let vcol = col + key.len() + 1;
            let value = value.trim();
            match key.trim() {
                "rho_l" => params.rho_l = parse_f64(value, line_no, vcol)?,
                "rho_u" => params.rho_u = parse_f64(value, line_no, vcol)?,
                "rho_t" => params.rho_t = parse_f64(value, line_no, vcol)?,
                "f" => params.f = parse_f64(value, line_no, vcol)?,
                "t" => {
                    params.t = value
                        .parse()
                        .map_err(|_| parse_err(line_no, vcol, "t must be a nonnegative integer"))?
                }
                "bounds" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 4 {
                        return Err(parse_err(line_no, vcol, "bounds needs 4 numbers"));
                    }
                    let mut c = [0.0; 4];
                    for (slot, s) in c.iter_mut().zip(&parts) {
                        *slot = parse_f64(s.trim(), line_no, vcol)?;
                    }
                    bounds = Some(
                        Rect::try_new(c[0], c[1], c[2], c[3])
                            .map_err(|e| InstanceError::Validation(format!("bounds: {e}")))?,
                    );
                }
                "labels" => {
                    for name in value.split(';').filter(|s| !s.is_empty()) {
                        intern_label(name, &mut labels, &mut label_index)?;
                    }
                }
                other => {
                    return Err(parse_err(
                        line_no,
                        col,
                        &format!("unknown parameter {other:?}"),
                    ))
                }
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        in_header = false;
        let fields: Vec<&str> = line.splitn(3, ',').collect();
        if fields.len() != 3 {
            return Err(parse_err(line_no, 1, "expected x,y,label"));
        }
        let x = parse_f64(fields[0].trim(), line_no, 1)?;
        let y = parse_f64(fields[1].trim(), line_no, fields[0].len() + 2)?;
        let label =
            intern_label(fields[2].trim(), &mut labels, &mut label_index).map_err(|e| match e {
                InstanceError::Validation(m) => {
                    parse_err(line_no, fields[0].len() + fields[1].len() + 3, &m)
                }
                other => other,
            })?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(line_no, 1, "coordinates must be finite"));
        }
        points.push(LabeledPoint {
            position: Point2::new(x, y),
            label,
        });
    }

    let instance = RpfaInstance::new(points, labels, params, bounds)?;
    let warnings = instance
        .duplicate_points()
        .into_iter()
        .map(|i| {
            let p = instance.position(i);
            format!("point {i} duplicates the coordinates ({}, {})", p.x, p.y)
        })
        .collect();
    Ok(ParsedInstance { instance, warnings })
}

fn intern_label(
    name: &str,
    labels: &mut Vec<LabelInfo>,
    index: &mut HashMap<String, usize>,
) -> Result<usize, InstanceError> {
    if let Some(&i) = index.get(name) {
        return Ok(i);
    }
    let info = LabelInfo::new(name)?;
    labels.push(info);
    index.insert(name.to_owned(), labels.len() - 1);
    Ok(labels.len() - 1)
}

fn parse_f64(s: &str, line: usize, column: usize) -> Result<f64, InstanceError> {
    s.parse::<f64>()
        .map_err(|_| parse_err(line, column, &format!("not a number: {s:?}")))
}

fn parse_err(line: usize, column: usize, message: &str) -> InstanceError {
    InstanceError::Parse {
        line,
        column,
        message: message.to_owned(),
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn random_label_names(rng: &mut ChaCha8Rng, k: usize) -> Vec<LabelInfo> {
    let mut names: Vec<String> = Vec::with_capacity(k);
    while names.len() < k {
        let len = rng.random_range(3..=10);
        let name: String = (0..len)
            .map(|_| char::from(b'a' + rng.random_range(0..26u8)))
            .collect();
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
        .into_iter()
        .map(|n| LabelInfo::new(n).expect("lowercase names are valid"))
        .collect()
}

fn generator_bounds() -> Rect {
    Rect::new(0.0, 0.0, GENERATOR_BOX, GENERATOR_BOX)
}

/// `n` points on the integer pixel grid of `[0, 1000]^2`, labels uniform over `k` random tags.
pub fn generate_uniform(n: usize, k: usize, seed: u64) -> RpfaInstance {
    assert!(n >= 1 && k >= 1, "generate_uniform needs n >= 1 and k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = random_label_names(&mut rng, k);
    let side = GENERATOR_BOX as i64;
    let points = (0..n)
        .map(|_| {
            let x = rng.random_range(0..=side) as f64;
            let y = rng.random_range(0..=side) as f64;
            LabeledPoint {
                position: Point2::new(x, y),
                label: rng.random_range(0..k),
            }
        })
        .collect();
    RpfaInstance {
        points,
        labels,
        params: ConstraintParams::unconstrained(),
        bounds: generator_bounds(),
    }
}

/// Symmetric Dirichlet(1, ..., 1) sample scaled to integer counts summing to `n`
/// by largest-remainder rounding.
pub fn dirichlet_counts(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let shares: Vec<f64> = draws.iter().map(|d| d / total * n as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Mixture of `k` Gaussians inside `[0, 1000]^2`. Category sizes follow a
/// symmetric Dirichlet; each category has a uniform mean and a standard
/// deviation drawn from `U(0, 0.5)` times the box side. Samples outside the box
/// are rejected and redrawn; coordinates are rounded to whole pixels.
pub fn generate_gaussian(n: usize, k: usize, seed: u64) -> RpfaInstance {
    assert!(k >= 1 && n >= k, "generate_gaussian needs n >= k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = random_label_names(&mut rng, k);
    let counts = dirichlet_counts(&mut rng, n, k);
    let mut points = Vec::with_capacity(n);
    for (label, &count) in counts.iter().enumerate() {
        let mx = rng.random_range(0.0..GENERATOR_BOX);
        let my = rng.random_range(0.0..GENERATOR_BOX);
        let sigma = rng.random_range(0.0..0.5) * GENERATOR_BOX;
        for _ in 0..count {
            let position = loop {
                let zx: f64 = rng.sample(StandardNormal);
                let zy: f64 = rng.sample(StandardNormal);
                let x = (mx + sigma * zx).round();
                let y = (my + sigma * zy).round();
                if (0.0..=GENERATOR_BOX).contains(&x) && (0.0..=GENERATOR_BOX).contains(&y) {
                    break Point2::new(x, y);
                }
            };
            points.push(LabeledPoint { position, label });
        }
    }
    RpfaInstance {
        points,
        labels,
        params: ConstraintParams::unconstrained(),
        bounds: generator_bounds(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_point_csv() {
        let text = "#param rho_l=0\n1,2,red\n3,4,blue\n5,6,red\n";
        let inst = parse_instance(text).unwrap().instance;
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.labels.len(), 2);
        assert_eq!(inst.labels[inst.label_of(1)].name, "blue");
    }

    #[test]
    fn rho_l_out_of_range_is_rejected() {
        let err = parse_instance("#param rho_l=1.5\n1,2,red\n").unwrap_err();
        assert!(matches!(err, InstanceError::Validation(_)), "{err}");
    }

    #[test]
    fn empty_point_list_is_rejected() {
        let err = parse_instance("#param t=1\n").unwrap_err();
        assert!(matches!(err, InstanceError::Validation(_)));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_instance("1,2,red\n3,abc,red\n").unwrap_err() {
            InstanceError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            parse_instance("1,2\n").unwrap_err(),
            InstanceError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_instance("#param t=-1\n1,2,a\n").unwrap_err(),
            InstanceError::Parse { .. }
        ));
    }

    #[test]
    fn duplicates_warn() {
        let parsed = parse_instance("1,2,red\n1,2,blue\n").unwrap();
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn points_outside_bounds_rejected() {
        let err = parse_instance("#param bounds=0,0,10,10\n11,2,red\n").unwrap_err();
        assert!(matches!(err, InstanceError::Validation(_)));
    }

    #[test]
    fn tolerance_formula() {
        let p = ConstraintParams {
            t: 2,
            rho_t: 0.2,
            ..ConstraintParams::unconstrained()
        };
        assert_eq!(p.tolerance(5), 1);
        assert_eq!(p.tolerance(4), 0);
        assert_eq!(p.tolerance(20), 2);
    }

    #[test]
    fn font_model() {
        let l = LabelInfo::new("corn").unwrap();
        assert!((l.bbox_ratio.value() - 2.4).abs() < 1e-12);
        let r = Rect::new(0.0, 0.0, 48.0, 16.0);
        assert!(l.fits(&r, 16.0));
        assert!(!l.fits(&r, 17.0));
        assert!((l.max_font(&r) - 16.0).abs() < 1e-12);
        // vertical rectangle takes rotated text
        let v = Rect::new(0.0, 0.0, 16.0, 48.0);
        assert!(l.fits(&v, 16.0));
        let one = LabelInfo::new("a").unwrap();
        assert_eq!(one.bbox_ratio.value(), 1.0);
    }

    #[test]
    fn uniform_generator_contract() {
        let inst = generate_uniform(20, 2, 7);
        assert_eq!(inst.n(), 20);
        assert_eq!(inst.labels.len(), 2);
        assert!(inst.points.iter().all(|p| inst.bounds.contains(p.position)));
        assert_eq!(inst, generate_uniform(20, 2, 7));
        let big = generate_uniform(1000, 16, 1);
        assert!(big.labels.iter().all(|l| (3..=10).contains(&l.char_count)));
        inst.validate().unwrap();
    }

    #[test]
    fn gaussian_generator_contract() {
        let inst = generate_gaussian(100, 4, 3);
        assert_eq!(inst.n(), 100);
        let one = generate_gaussian(50, 1, 9);
        assert!(one.points.iter().all(|p| p.label == 0));
        let many = generate_gaussian(500, 8, 2);
        assert!(many
            .points
            .iter()
            .all(|p| (0.0..=1000.0).contains(&p.position.x)
                && (0.0..=1000.0).contains(&p.position.y)));
        assert_eq!(many, generate_gaussian(500, 8, 2));
        many.validate().unwrap();
    }

    proptest! {
        #[test]
        fn dirichlet_counts_compose_n(n in 1usize..500, k in 1usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = dirichlet_counts(&mut rng, n, k);
            prop_assert_eq!(c.len(), k);
            prop_assert_eq!(c.iter().sum::<usize>(), n);
        }

        #[test]
        fn save_load_roundtrip(n in 1usize..40, k in 1usize..5, seed in any::<u64>(), gauss in any::<bool>()) {
            let mut inst = if gauss && n >= k { generate_gaussian(n, k, seed) } else { generate_uniform(n, k, seed) };
            inst.params = ConstraintParams::case_study();
            let back = parse_instance(&format_instance(&inst)).unwrap().instance;
            prop_assert_eq!(back, inst);
        }
    }
}
