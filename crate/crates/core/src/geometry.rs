//! Points, closed axis-aligned rectangles and aspect ratios.
//!
//! All predicates are plain comparisons on `f64` coordinates, so containment and
//! overlap decisions are exact for integer and dyadic inputs. No predicate does
//! arithmetic on coordinates before comparing them.

use std::cmp::Ordering;
use std::fmt;

use crate::error::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Direction of the longer side. Squares count as horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Closed axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
///
/// Zero width or height is allowed; such rectangles show up as intermediate
/// shapes during candidate generation (two points on a common line).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    /// Builds a rectangle; the caller guarantees `x_min <= x_max` and `y_min <= y_max`.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max, "inverted rect");
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn try_new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let coords = [x_min, y_min, x_max, y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if x_min > x_max || y_min > y_max {
            return Err(GeometryError::Inverted);
        }
        Ok(Self::new(x_min, y_min, x_max, y_max))
    }

    pub fn from_point(p: Point2) -> Self {
        Self::new(p.x, p.y, p.x, p.y)
    }

    /// Smallest rectangle containing both points.
    pub fn bounding(a: Point2, b: Point2) -> Self {
        Self::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y))
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn major(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn minor(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn orientation(&self) -> Orientation {
        if self.width() >= self.height() {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        }
    }

    /// True when width or height is zero.
    pub fn is_degenerate(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    pub fn extent(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::X => (self.x_min, self.x_max),
            Axis::Y => (self.y_min, self.y_max),
        }
    }

    pub fn with_extent(&self, axis: Axis, lo: f64, hi: f64) -> Rect {
        match axis {
            Axis::X => Rect::new(lo, self.y_min, hi, self.y_max),
            Axis::Y => Rect::new(self.x_min, lo, self.x_max, hi),
        }
    }

    pub fn length(&self, axis: Axis) -> f64 {
        let (lo, hi) = self.extent(axis);
        hi - lo
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            (self.x_min + self.x_max) * 0.5,
            (self.y_min + self.y_max) * 0.5,
        )
    }

    pub fn contains(&self, p: Point2) -> bool {
        contains(self, p)
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        overlaps(self, other)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x_min <= other.x_min
            && other.x_max <= self.x_max
            && self.y_min <= other.y_min
            && other.y_max <= self.y_max
    }

    pub fn aspect_ratio(&self) -> Result<AspectRatio, GeometryError> {
        aspect_ratio(self)
    }

    /// Total order used for deterministic sorting: `(x_min, y_min, x_max, y_max)`.
    pub fn total_cmp(&self, other: &Rect) -> Ordering {
        self.x_min
            .total_cmp(&other.x_min)
            .then(self.y_min.total_cmp(&other.y_min))
            .then(self.x_max.total_cmp(&other.x_max))
            .then(self.y_max.total_cmp(&other.y_max))
    }

    /// Bit-level key, suitable for hashing and exact deduplication.
    pub fn key(&self) -> [u64; 4] {
        [
            canonical_bits(self.x_min),
            canonical_bits(self.y_min),
            canonical_bits(self.x_max),
            canonical_bits(self.y_max),
        ]
    }
}

fn canonical_bits(v: f64) -> u64 {
    // -0.0 and 0.0 describe the same coordinate.
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] x [{}, {}]",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

/// Major-axis length over minor-axis length; always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(value: f64) -> Result<Self, GeometryError> {
        if value.is_nan() || value < 1.0 {
            return Err(GeometryError::InvalidAspectRatio(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Closed containment: boundary points are inside.
pub fn contains(r: &Rect, p: Point2) -> bool {
    r.x_min <= p.x && p.x <= r.x_max && r.y_min <= p.y && p.y <= r.y_max
}

/// Closed-region intersection. Shared edges and corners count as overlap.
pub fn overlaps(a: &Rect, b: &Rect) -> bool {
    a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max && b.y_min <= a.y_max
}

pub fn aspect_ratio(r: &Rect) -> Result<AspectRatio, GeometryError> {
    if r.is_degenerate() {
        return Err(GeometryError::Degenerate(*r));
    }
    Ok(AspectRatio(r.major() / r.minor()))
}
