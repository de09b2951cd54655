//! Two-box Sokoban on a 7x7 board.
//!
//! The outer ring is wall; two more walls are drawn from the 5x5 interior.
//! The worker moves one cell per action and may push (never pull) a single
//! box one cell further in the same direction.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{DomainError, GenerationError, SearchError};
use crate::grid::{manhattan, Action, Coord, WallGrid};
use crate::search::{astar, SearchResult, SearchSpace};
use crate::seed;

pub const BOARD_SIZE: u16 = 7;
pub const INTERIOR_WALLS: usize = 2;
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SokobanState {
    pub worker: Coord,
    /// Sorted, so equal positions compare equal regardless of box identity.
    boxes: [Coord; 2],
}

impl SokobanState {
    pub fn new(worker: Coord, boxes: [Coord; 2]) -> Self {
        let mut boxes = boxes;
        boxes.sort();
        SokobanState { worker, boxes }
    }

    pub fn boxes(&self) -> [Coord; 2] {
        self.boxes
    }

    pub fn has_box(&self, c: Coord) -> bool {
        self.boxes.contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SokobanInstance {
    walls: WallGrid,
    docks: [Coord; 2],
    boxes_start: [Coord; 2],
    worker_start: Coord,
}

impl SokobanInstance {
    pub fn new(
        walls: WallGrid,
        docks: [Coord; 2],
        boxes: [Coord; 2],
        worker: Coord,
    ) -> Result<Self, DomainError> {
        let bad = |m: &str| Err(DomainError::Sokoban(m.to_string()));
        if walls.width() != BOARD_SIZE || walls.height() != BOARD_SIZE {
            return bad("board must be 7x7");
        }
        let pieces = [docks[0], docks[1], boxes[0], boxes[1], worker];
        if pieces.iter().any(|&c| walls.is_wall(c)) {
            return bad("dock, box or worker on a wall");
        }
        if docks[0] == docks[1] || boxes[0] == boxes[1] || boxes.contains(&worker) {
            return bad("overlapping docks, boxes or worker");
        }
        let mut docks = docks;
        docks.sort();
        let mut boxes = boxes;
        boxes.sort();
        Ok(SokobanInstance { walls, docks, boxes_start: boxes, worker_start: worker })
    }

    pub fn walls(&self) -> &WallGrid {
        &self.walls
    }

    pub fn docks(&self) -> [Coord; 2] {
        self.docks
    }

    pub fn boxes_start(&self) -> [Coord; 2] {
        self.boxes_start
    }

    pub fn worker_start(&self) -> Coord {
        self.worker_start
    }

    pub fn initial_state(&self) -> SokobanState {
        SokobanState::new(self.worker_start, self.boxes_start)
    }

    pub fn is_solved(&self, state: &SokobanState) -> bool {
        state.boxes == self.docks
    }

    /// Applies one action; `None` when the move or push is blocked.
    pub fn step(&self, state: &SokobanState, action: Action) -> Option<SokobanState> {
        let target = state.worker.offset(action).filter(|&c| self.walls.is_free(c))?;
        if !state.has_box(target) {
            return Some(SokobanState { worker: target, boxes: state.boxes });
        }
        let pushed = target.offset(action).filter(|&c| self.walls.is_free(c) && !state.has_box(c))?;
        let mut boxes = state.boxes;
        for b in boxes.iter_mut() {
            if *b == target {
                *b = pushed;
            }
        }
        Some(SokobanState::new(target, boxes))
    }

    /// Minimum over both box-to-dock assignments of summed Manhattan distance.
    pub fn heuristic(&self, state: &SokobanState) -> u32 {
        let [a, b] = state.boxes;
        let [p, q] = self.docks;
        (manhattan(a, p) + manhattan(b, q)).min(manhattan(a, q) + manhattan(b, p))
    }

    pub fn execute_plan(&self, plan: &[Action]) -> SokobanVerdict {
        let mut state = self.initial_state();
        for (i, &action) in plan.iter().enumerate() {
            match self.step(&state, action) {
                Some(next) => state = next,
                None => {
                    let target = state.worker.offset(action);
                    let reason = match target {
                        Some(t) if state.has_box(t) => SokobanFailure::BlockedPush,
                        _ => SokobanFailure::BlockedMove,
                    };
                    return SokobanVerdict { failure: Some((i, reason)) };
                }
            }
        }
        if self.is_solved(&state) {
            SokobanVerdict { failure: None }
        } else {
            SokobanVerdict { failure: Some((plan.len(), SokobanFailure::BoxesOffDocks)) }
        }
    }
}

impl SearchSpace for SokobanInstance {
    type State = SokobanState;

    fn start(&self) -> SokobanState {
        self.initial_state()
    }

    fn is_goal(&self, state: &SokobanState) -> bool {
        self.is_solved(state)
    }

    fn heuristic(&self, state: &SokobanState) -> u32 {
        SokobanInstance::heuristic(self, state)
    }

    fn successors(&self, state: &SokobanState) -> Vec<(Action, SokobanState)> {
        Action::ALL.into_iter().filter_map(|a| self.step(state, a).map(|s| (a, s))).collect()
    }

    fn plan_is_valid(&self, plan: &[Action]) -> bool {
        self.execute_plan(plan).is_valid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SokobanFailure {
    BlockedMove,
    BlockedPush,
    BoxesOffDocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SokobanVerdict {
    pub failure: Option<(usize, SokobanFailure)>,
}

impl SokobanVerdict {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn astar_sokoban(instance: &SokobanInstance) -> Result<SearchResult<SokobanState>, SearchError> {
    astar(instance, Some(DEFAULT_NODE_BUDGET))
}

/// Samples a board and admits it only if A* solves it from a start where
/// the boxes are not already docked.
pub fn gen_sokoban(seed: u64) -> Result<SokobanInstance, GenerationError> {
    let mut rng = seed::rng(seed);
    let n = BOARD_SIZE;
    let interior: Vec<Coord> = (1..n - 1).flat_map(|y| (1..n - 1).map(move |x| Coord::new(x, y))).collect();
    for _ in 0..DEFAULT_MAX_ATTEMPTS {
        let mut walls = WallGrid::open(n, n);
        for i in 0..n {
            for c in [Coord::new(i, 0), Coord::new(i, n - 1), Coord::new(0, i), Coord::new(n - 1, i)] {
                walls.set_wall(c, true);
            }
        }
        for i in sample(&mut rng, interior.len(), INTERIOR_WALLS) {
            walls.set_wall(interior[i], true);
        }
        let free: Vec<Coord> = walls.free_cells().collect();
        let picks: Vec<Coord> = sample(&mut rng, free.len(), 5).into_iter().map(|i| free[i]).collect();
        let inst = SokobanInstance::new(walls, [picks[0], picks[1]], [picks[2], picks[3]], picks[4])?;
        if inst.is_solved(&inst.initial_state()) {
            continue;
        }
        if astar_sokoban(&inst).is_ok() {
            return Ok(inst);
        }
    }
    Err(GenerationError::BudgetExhausted(DEFAULT_MAX_ATTEMPTS))
}
