//! Verifiable A* search-trace datasets for grid mazes and two-box Sokoban.
//!
//! The crate generates problem instances with five maze generators (plus a
//! Sokoban sampler), labels them with A* traces and optimal plans, corrupts
//! datasets by deranging traces across problems, and validates model output
//! by replaying traces against simulated open and closed lists.

pub mod batch;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod generators;
pub mod grid;
pub mod search;
pub mod seed;
pub mod sokoban;
pub mod tokens;
pub mod validate;

pub use dataset::{build_dataset, build_test_suite, emit_training_text, swap_traces, Dataset, DatasetManifest, DatasetRecord, Source, TextMode};
pub use error::{DatasetError, DomainError, EncodeError, GenerationError, SearchError};
pub use eval::{render, score, EvalReport, ReportFormat, ResponseRecord, TestSetReport};
pub use generators::{generate, sample_start_goal, GeneratorConfig, GeneratorKind};
pub use grid::{manhattan, Action, Coord, GridMaze, Plan, PlanVerdict, WallGrid};
pub use search::{astar, astar_maze, bfs_shortest_path, EventKind, SearchResult, SearchSpace, TraceEvent};
pub use sokoban::{astar_sokoban, gen_sokoban, SokobanInstance, SokobanState};
pub use tokens::{parse_response, Domain, ParsedResponse, Vocabulary};
pub use validate::{classify_response, validate_sokoban_trace, validate_trace, Problem, ResponseClassification, TraceErrorClass, TraceVerdict};
