//! End-to-end solve: candidates, conflict graph, solver, validation.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::candidates::{build_candidate_set_with, CandidateConfig, CandidateSet};
use crate::error::{Error, SolveError};
use crate::exact::{solve_exact_candidates, ExactConfig};
use crate::greedy::solve_greedy_candidates;
use crate::instance::RpfaInstance;
use crate::wis::{
    build_conflict_graph, conflict_edge_count_capped, validate_selection, validate_solution,
    ConflictGraph, Solution, ValidationReport,
};

/// Candidate count above which `auto` switches to the greedy solver.
pub const AUTO_THRESHOLD: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Greedy,
    Exact,
    Auto,
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "exact" => Ok(Self::Exact),
            "auto" => Ok(Self::Auto),
            _ => Err(format!(
                "unknown solver {s:?} (expected greedy, exact or auto)"
            )),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Greedy => "greedy",
            Self::Exact => "exact",
            Self::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub solver: SolverChoice,
    pub candidates: CandidateConfig,
    /// Budget for the exact solver; `None` runs to completion.
    pub budget: Option<Duration>,
    pub auto_threshold: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            solver: SolverChoice::Auto,
            candidates: CandidateConfig::default(),
            budget: None,
            auto_threshold: AUTO_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub candidates: CandidateSet,
    /// Built by the exact solver, or on demand by [`PipelineResult::conflict_graph`].
    pub graph: Option<ConflictGraph>,
    pub solution: Solution,
    /// The solver that produced `solution` (never `Auto`).
    pub solver: SolverChoice,
    /// The exact solver ran out of time; `solution` is the greedy one.
    pub timed_out: bool,
    pub candidate_secs: f64,
    pub solve_secs: f64,
    pub report: ValidationReport,
}

impl PipelineResult {
    pub fn conflict_graph(&mut self) -> &ConflictGraph {
        let (cands, n) = (&self.candidates, self.candidates.n);
        self.graph
            .get_or_insert_with(|| build_conflict_graph(cands.clone(), n))
    }

    /// As [`Self::conflict_graph`], refusing to build a graph with more than
    /// `max_edges` edges.
    pub fn try_conflict_graph(&mut self, max_edges: usize) -> Result<&ConflictGraph, SolveError> {
        if self.graph.is_none() && conflict_edge_count_capped(&self.candidates, max_edges).is_none()
        {
            return Err(SolveError::MemoryLimit(format!(
                "conflict edges exceed the limit of {max_edges}"
            )));
        }
        Ok(self.conflict_graph())
    }

    pub fn stats_line(&self) -> String {
        // the graph is only built for the exact solver
        let edges = match &self.graph {
            Some(g) => g.edge_count().to_string(),
            None => "-".to_string(),
        };
        format!(
            "solver={} candidates={} edges={} covered={}/{} rectangles={} weight={} timed_out={} candidate_secs={:.3} solve_secs={:.3}",
            self.solver,
            self.candidates.len(),
            edges,
            self.solution.covered_points,
            self.candidates.n,
            self.solution.cardinality,
            self.solution.total_weight,
            self.timed_out,
            self.candidate_secs,
            self.solve_secs
        )
    }
}

pub fn run_pipeline(inst: &RpfaInstance, cfg: &PipelineConfig) -> Result<PipelineResult, Error> {
    let t = Instant::now();
    let cands = build_candidate_set_with(inst, &cfg.candidates)?;
    let candidate_secs = t.elapsed().as_secs_f64();

    let solver = match cfg.solver {
        SolverChoice::Auto if cands.len() > cfg.auto_threshold => {
            log::info!(
                "{} candidates exceed the auto threshold of {}; using greedy",
                cands.len(),
                cfg.auto_threshold
            );
            SolverChoice::Greedy
        }
        SolverChoice::Auto => SolverChoice::Exact,
        s => s,
    };
    let t = Instant::now();
    let mut graph = None;
    let (solution, timed_out) = match solver {
        SolverChoice::Exact => {
            let ecfg = ExactConfig {
                budget: cfg.budget,
                ..ExactConfig::default()
            };
            let (g, s, _) = solve_exact_candidates(cands.clone(), &ecfg)?;
            graph = Some(g);
            match s {
                Some(s) => (s, false),
                None => {
                    log::warn!("exact solver hit its budget; falling back to greedy");
                    (solve_greedy_candidates(&cands), true)
                }
            }
        }
        _ => (solve_greedy_candidates(&cands), false),
    };
    let solve_secs = t.elapsed().as_secs_f64();
    let report = match &graph {
        Some(g) => validate_solution(g, &solution, inst),
        None => validate_selection(&cands, &solution, inst),
    };
    Ok(PipelineResult {
        candidates: cands,
        graph,
        solution,
        solver: if timed_out {
            SolverChoice::Greedy
        } else {
            solver
        },
        timed_out,
        candidate_secs,
        solve_secs,
        report,
    })
}

/// One row per chosen rectangle; `points` lists covered point indices.
pub fn solution_csv(inst: &RpfaInstance, cands: &CandidateSet, sol: &Solution) -> String {
    let mut out = String::from("x_min,y_min,x_max,y_max,label,covered_count,points\n");
    for &i in &sol.chosen {
        let c = &cands.rects[i];
        let pts: Vec<String> = c.covered.iter().map(u32::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.rect.x_min,
            c.rect.y_min,
            c.rect.x_max,
            c.rect.y_max,
            inst.labels[c.label].name,
            c.covered.len(),
            pts.join(" ")
        );
    }
    out
}
