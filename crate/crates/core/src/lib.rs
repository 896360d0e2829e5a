//! Rectilinear point feature aggregation.
//!
//! Categorized points are covered by disjoint labelled rectangles chosen from a
//! generated candidate set. Selection is a weighted independent set problem,
//! solved greedily or exactly; the exact model can also be exported as
//! weighted MaxSAT.

pub mod bench;
pub mod candidates;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod greedy;
pub mod instance;
pub mod pipeline;
pub mod reduction;
pub mod render;
pub mod wcnf;
pub mod wis;

pub use candidates::{
    build_candidate_set, build_candidate_set_with, CandidateConfig, CandidateRect, CandidateSet,
};
pub use error::{Error, Result};
pub use exact::{solve_exact, solve_exact_candidates, solve_exact_with, ExactConfig};
pub use geometry::{aspect_ratio, contains, overlaps, AspectRatio, Point2, Rect};
pub use greedy::{solve_greedy, solve_greedy_candidates};
pub use instance::{ConstraintParams, LabelInfo, LabeledPoint, RpfaInstance};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineResult, SolverChoice};
pub use render::{render_svg, RenderOptions};
pub use wcnf::{decode_assignment, encode_wcnf, parse_model, WcnfFormula};
pub use wis::{
    build_conflict_graph, rect_weight, validate_selection, validate_solution, ConflictGraph,
    Solution,
};
