//! Weighted MaxSAT encoding of the conflict graph and model import.
//!
//! Variable `i + 1` is true iff candidate `i` is selected. Each candidate gets a
//! unit clause weighted like the candidate; each conflict edge gets the clause
//! `(-a -b)` with weight `2|R|n^2`, which exceeds the sum of all unit clauses.

use std::fmt::Write as _;

use crate::error::SolveError;
use crate::wis::{ConflictGraph, Solution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub weight: u64,
    /// DIMACS literals: `v` or `-v`, 1-based.
    pub lits: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WcnfFormula {
    pub num_vars: usize,
    pub soft: Vec<Clause>,
    pub intersection: Vec<Clause>,
    pub intersection_weight: u64,
}

impl WcnfFormula {
    pub fn num_clauses(&self) -> usize {
        self.soft.len() + self.intersection.len()
    }

    /// Sum of all unit (rectangle) clause weights.
    pub fn soft_total(&self) -> u64 {
        self.soft.iter().map(|c| c.weight).sum()
    }

    /// Total weight of clauses satisfied by `truth`.
    pub fn satisfied_weight(&self, truth: &[bool]) -> u64 {
        let sat = |c: &Clause| {
            c.lits.iter().any(|&l| {
                let v = truth[(l.unsigned_abs() - 1) as usize];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        };
        self.soft
            .iter()
            .chain(self.intersection.iter())
            .filter(|c| sat(c))
            .map(|c| c.weight)
            .sum()
    }

    pub fn violated_intersections(&self, truth: &[bool]) -> usize {
        self.intersection
            .iter()
            .filter(|c| {
                c.lits
                    .iter()
                    .all(|&l| truth[(l.unsigned_abs() - 1) as usize])
            })
            .count()
    }

    /// Text form `p wcnf <vars> <clauses> <top>`, one clause per line,
    /// weight first, `0`-terminated. With `hard_intersections` the conflict
    /// clauses carry the top weight.
    pub fn to_text(&self, hard_intersections: bool) -> String {
        let top = self.soft_total() + self.intersection_weight * self.intersection.len() as u64 + 1;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p wcnf {} {} {}",
            self.num_vars,
            self.num_clauses(),
            top
        );
        for c in &self.soft {
            write_clause(&mut out, c.weight, &c.lits);
        }
        for c in &self.intersection {
            let w = if hard_intersections { top } else { c.weight };
            write_clause(&mut out, w, &c.lits);
        }
        out
    }
}

fn write_clause(out: &mut String, weight: u64, lits: &[i64]) {
    let _ = write!(out, "{weight}");
    for l in lits {
        let _ = write!(out, " {l}");
    }
    out.push_str(" 0\n");
}

pub fn encode_wcnf(g: &ConflictGraph) -> WcnfFormula {
    let m = g.len();
    let n = g.n as u64;
    let intersection_weight = 2 * m as u64 * n * n;
    let soft = (0..m)
        .map(|i| Clause {
            weight: g.weight(i) as u64,
            lits: vec![i as i64 + 1],
        })
        .collect();
    let intersection = g
        .edges()
        .map(|(a, b)| Clause {
            weight: intersection_weight,
            lits: vec![-(a as i64 + 1), -(b as i64 + 1)],
        })
        .collect();
    WcnfFormula {
        num_vars: m,
        soft,
        intersection,
        intersection_weight,
    }
}

/// Turns a truth vector into a solution; fails if two selected candidates conflict.
pub fn decode_assignment(g: &ConflictGraph, truth: &[bool]) -> Result<Solution, SolveError> {
    if truth.len() != g.len() {
        return Err(SolveError::AssignmentLength {
            expected: g.len(),
            got: truth.len(),
        });
    }
    let chosen: Vec<usize> = (0..truth.len()).filter(|&i| truth[i]).collect();
    for &a in &chosen {
        for &b in &g.adj[a] {
            let b = b as usize;
            if a < b && truth[b] {
                return Err(SolveError::InfeasibleAssignment(a, b));
            }
        }
    }
    Ok(g.solution(chosen))
}

/// Reads a model: either `v`-prefixed solver output lines or plain lines of
/// signed literals. Unmentioned variables are false; `0` terminators and
/// comment (`c`) / status (`s`, `o`) lines are ignored.
pub fn parse_model(text: &str, num_vars: usize) -> Result<Vec<bool>, SolveError> {
    let mut truth = vec![false; num_vars];
    let has_v = text.lines().any(|l| l.trim_start().starts_with('v'));
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let body = match t.chars().next() {
            Some('c') | Some('s') | Some('o') => continue,
            Some('v') => &t[1..],
            _ if has_v => continue,
            _ => t,
        };
        let body = body.trim();
        // compact form: "v 0110..." as a bit string
        if !body.is_empty()
            && body.len() == num_vars
            && body.chars().all(|c| c == '0' || c == '1')
            && num_vars > 1
        {
            for (i, ch) in body.chars().enumerate() {
                truth[i] = ch == '1';
            }
            continue;
        }
        for tok in body.split_whitespace() {
            let l: i64 = tok
                .parse()
                .map_err(|_| SolveError::ModelParse(format!("bad literal {tok:?}")))?;
            if l == 0 {
                continue;
            }
            let v = l.unsigned_abs() as usize;
            if v > num_vars {
                return Err(SolveError::ModelParse(format!(
                    "variable {v} out of range 1..={num_vars}"
                )));
            }
            truth[v - 1] = l > 0;
        }
    }
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{CandidateRect, CandidateSet};
    use crate::geometry::Rect;
    use crate::wis::build_conflict_graph;

    fn graph(rects: Vec<Rect>, n: usize) -> ConflictGraph {
        let rects = rects
            .into_iter()
            .enumerate()
            .map(|(i, r)| CandidateRect {
                rect: r,
                label: 0,
                covered: vec![(i % n) as u32],
                mismatch: 0,
                weight: 0,
            })
            .collect();
        build_conflict_graph(
            CandidateSet {
                rects,
                instance_id: 0,
                n,
            },
            n,
        )
    }

    fn spread(k: usize) -> Vec<Rect> {
        (0..k)
            .map(|i| Rect::new(10.0 * i as f64, 0.0, 10.0 * i as f64 + 1.0, 1.0))
            .collect()
    }

    #[test]
    fn intersection_weight_example() {
        let mut rects = spread(8);
        rects[1] = Rect::new(0.5, 0.5, 2.0, 2.0);
        let g = graph(rects, 3);
        let f = encode_wcnf(&g);
        assert_eq!(f.intersection.len(), 1);
        assert_eq!(f.intersection[0].weight, 144);
        assert!(f.intersection_weight > f.soft_total());
    }

    #[test]
    fn edgeless_graph_has_only_units() {
        let f = encode_wcnf(&graph(spread(4), 4));
        assert!(f.intersection.is_empty());
        assert_eq!(f.soft.len(), 4);
        assert!(f.soft.iter().all(|c| c.weight > 0 && c.lits.len() == 1));
    }

    #[test]
    fn text_format() {
        let g = graph(
            vec![Rect::new(0.0, 0.0, 1.0, 1.0), Rect::new(1.0, 0.0, 2.0, 1.0)],
            2,
        );
        let f = encode_wcnf(&g);
        // weights: 2*2*1-1 = 3 each; edge weight 2*2*4 = 16; top = 3+3+16+1 = 23
        assert_eq!(
            f.to_text(false),
            "p wcnf 2 3 23\n3 1 0\n3 2 0\n16 -1 -2 0\n"
        );
        assert_eq!(f.to_text(true), "p wcnf 2 3 23\n3 1 0\n3 2 0\n23 -1 -2 0\n");
    }

    #[test]
    fn decode_examples() {
        let g = graph(
            vec![
                Rect::new(0.0, 0.0, 1.0, 1.0),
                Rect::new(1.0, 0.0, 2.0, 1.0),
                Rect::new(5.0, 0.0, 6.0, 1.0),
            ],
            3,
        );
        assert_eq!(
            decode_assignment(&g, &[false; 3]).unwrap(),
            Solution::empty()
        );
        assert_eq!(
            decode_assignment(&g, &[true; 3]),
            Err(SolveError::InfeasibleAssignment(0, 1))
        );
        assert_eq!(
            decode_assignment(&g, &[true, false, true]).unwrap().chosen,
            vec![0, 2]
        );
        assert!(matches!(
            decode_assignment(&g, &[true]),
            Err(SolveError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn model_formats() {
        assert_eq!(
            parse_model("1 -2 3 0\n", 3).unwrap(),
            vec![true, false, true]
        );
        assert_eq!(
            parse_model("c comment\ns OPTIMUM FOUND\no 12\nv -1 2 -3\n", 3).unwrap(),
            vec![false, true, false]
        );
        assert_eq!(parse_model("v 101\n", 3).unwrap(), vec![true, false, true]);
        assert!(parse_model("1 x\n", 3).is_err());
        assert!(parse_model("4\n", 3).is_err());
    }
}
