//! SVG output of a solution.
//!
//! Map coordinates are y-up; the document is y-down with one map unit per user
//! unit, so y is flipped against the instance bounds. Label text follows the
//! monospace model used by the constraints: `textLength` pins the drawn width to
//! the model width.

use std::fmt::Write as _;

use crate::candidates::{CandidateRect, CandidateSet};
use crate::geometry::{Orientation, Point2, Rect};
use crate::instance::RpfaInstance;
use crate::wis::Solution;

/// Categorical palette, cycled by label index.
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Draw rectangle outlines; off gives the borderless look.
    pub outlines: bool,
    pub show_uncovered: bool,
    pub point_radius: f64,
    /// Padding around the instance bounds, in map units.
    pub padding: f64,
    pub fill_opacity: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            outlines: true,
            show_uncovered: true,
            point_radius: 1.5,
            padding: 5.0,
            fill_opacity: 0.35,
        }
    }
}

/// Placement of one label inside its rectangle, in map coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelLayout {
    pub center: Point2,
    pub font: f64,
    pub vertical: bool,
    /// Text box along its reading direction and across it.
    pub length: f64,
    pub height: f64,
}

impl LabelLayout {
    /// The axis-aligned box occupied by the text.
    pub fn bbox(&self) -> Rect {
        let (w, h) = if self.vertical {
            (self.height, self.length)
        } else {
            (self.length, self.height)
        };
        Rect::new(
            self.center.x - w / 2.0,
            self.center.y - h / 2.0,
            self.center.x + w / 2.0,
            self.center.y + h / 2.0,
        )
    }
}

/// Text placement for a candidate: centred, turned when the rectangle is
/// taller than wide (squares stay horizontal), largest font that fits.
pub fn label_layout(inst: &RpfaInstance, c: &CandidateRect) -> LabelLayout {
    let label = &inst.labels[c.label];
    let font = label.max_font(&c.rect);
    let (length, height) = label.text_box(font);
    LabelLayout {
        center: c.rect.center(),
        font,
        vertical: c.rect.orientation() == Orientation::Vertical,
        length,
        height,
    }
}

pub fn render_svg(
    inst: &RpfaInstance,
    cands: &CandidateSet,
    sol: &Solution,
    opts: &RenderOptions,
) -> String {
    let b = inst.bounds;
    let pad = opts.padding;
    let width = b.width() + 2.0 * pad;
    let height = b.height() + 2.0 * pad;
    let tx = |x: f64| x - b.x_min + pad;
    let ty = |y: f64| b.y_max - y + pad;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let stroke = if opts.outlines {
        "stroke=\"#333333\" stroke-width=\"0.5\""
    } else {
        "stroke=\"none\""
    };
    let _ = writeln!(out, "<g id=\"rectangles\" {stroke}>");
    let mut covered = vec![false; inst.n()];
    for &i in &sol.chosen {
        let c = &cands.rects[i];
        for &p in &c.covered {
            covered[p as usize] = true;
        }
        let r = &c.rect;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"{}\"/>",
            num(tx(r.x_min)),
            num(ty(r.y_max)),
            num(r.width()),
            num(r.height()),
            PALETTE[c.label % PALETTE.len()],
            num(opts.fill_opacity)
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"labels\" font-family=\"monospace\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"#000000\">\n");
    for &i in &sol.chosen {
        let c = &cands.rects[i];
        let l = label_layout(inst, c);
        if l.font <= 0.0 {
            continue;
        }
        let (cx, cy) = (tx(l.center.x), ty(l.center.y));
        let rotate = if l.vertical {
            format!(" transform=\"rotate(-90 {} {})\"", num(cx), num(cy))
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" textLength=\"{}\" lengthAdjust=\"spacingAndGlyphs\"{}>{}</text>",
            num(cx),
            num(cy),
            num(l.font),
            num(l.length),
            rotate,
            escape(&inst.labels[c.label].name)
        );
    }
    out.push_str("</g>\n");

    if opts.show_uncovered {
        out.push_str("<g id=\"uncovered\">\n");
        for (i, p) in inst.points.iter().enumerate() {
            if covered[i] {
                continue;
            }
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>",
                num(tx(p.position.x)),
                num(ty(p.position.y)),
                num(opts.point_radius),
                PALETTE[p.label % PALETTE.len()]
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Fixed-precision number without trailing zeros.
fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
