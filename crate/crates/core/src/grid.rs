//! Maze world: coordinates, wall grids, actions, and plan execution.
//!
//! Coordinates use a bottom-left origin. `Up` increments `y`, `Right`
//! increments `x`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u16; 2]", into = "[u16; 2]")]
pub struct Coord {
    pub x: u16,
    pub y: u16,
}

impl Coord {
    pub const fn new(x: u16, y: u16) -> Self {
        Coord { x, y }
    }

    /// Cell one step away in direction `action`, or `None` when that would
    /// leave the non-negative quadrant.
    pub fn offset(self, action: Action) -> Option<Coord> {
        let Coord { x, y } = self;
        match action {
            Action::Up => y.checked_add(1).map(|y| Coord { x, y }),
            Action::Down => y.checked_sub(1).map(|y| Coord { x, y }),
            Action::Left => x.checked_sub(1).map(|x| Coord { x, y }),
            Action::Right => x.checked_add(1).map(|x| Coord { x, y }),
        }
    }
}

impl From<[u16; 2]> for Coord {
    fn from([x, y]: [u16; 2]) -> Self {
        Coord { x, y }
    }
}

impl From<Coord> for [u16; 2] {
    fn from(c: Coord) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

pub fn manhattan(a: Coord, b: Coord) -> u32 {
    (a.x.abs_diff(b.x) + a.y.abs_diff(b.y)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    /// Fixed expansion order used by every search in this crate.
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn token(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }

    pub fn from_token(tok: &str) -> Option<Action> {
        match tok {
            "up" => Some(Action::Up),
            "down" => Some(Action::Down),
            "left" => Some(Action::Left),
            "right" => Some(Action::Right),
            _ => None,
        }
    }

    /// Action that moves `from` onto the adjacent cell `to`.
    pub fn between(from: Coord, to: Coord) -> Option<Action> {
        Action::ALL.into_iter().find(|&a| from.offset(a) == Some(to))
    }
}

pub type Plan = Vec<Action>;

/// Rectangular wall layout without a start or goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WallGrid {
    width: u16,
    height: u16,
    cells: Vec<bool>,
}

impl WallGrid {
    pub fn open(width: u16, height: u16) -> Self {
        WallGrid { width, height, cells: vec![false; width as usize * height as usize] }
    }

    pub fn solid(width: u16, height: u16) -> Self {
        WallGrid { width, height, cells: vec![true; width as usize * height as usize] }
    }

    pub fn from_walls(
        width: u16,
        height: u16,
        walls: impl IntoIterator<Item = Coord>,
    ) -> Result<Self, DomainError> {
        let mut grid = WallGrid::open(width, height);
        for w in walls {
            if !grid.in_bounds(w) {
                return Err(DomainError::OutOfBounds { coord: w, width, height });
            }
            grid.set_wall(w, true);
        }
        Ok(grid)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Coord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn coord(&self, index: usize) -> Coord {
        let w = self.width as usize;
        Coord::new((index % w) as u16, (index / w) as u16)
    }

    /// Out-of-bounds cells count as walls.
    pub fn is_wall(&self, c: Coord) -> bool {
        !self.in_bounds(c) || self.cells[self.index(c)]
    }

    pub fn is_free(&self, c: Coord) -> bool {
        !self.is_wall(c)
    }

    pub fn set_wall(&mut self, c: Coord, wall: bool) {
        let i = self.index(c);
        self.cells[i] = wall;
    }

    /// Wall coordinates in row-major order (row `y = 0` first).
    pub fn walls(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells.iter().enumerate().filter(|(_, &w)| w).map(|(i, _)| self.coord(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells.iter().enumerate().filter(|(_, &w)| !w).map(|(i, _)| self.coord(i))
    }

    pub fn wall_count(&self) -> usize {
        self.cells.iter().filter(|&&w| w).count()
    }

    /// Free neighbours of `c` in the order Up, Down, Left, Right.
    pub fn free_neighbors(&self, c: Coord) -> impl Iterator<Item = (Action, Coord)> + '_ {
        Action::ALL
            .into_iter()
            .filter_map(move |a| c.offset(a).map(|n| (a, n)))
            .filter(|&(_, n)| self.is_free(n))
    }

    /// Number of undirected edges between orthogonally adjacent free cells.
    pub fn free_edge_count(&self) -> usize {
        self.free_cells()
            .map(|c| {
                [Action::Up, Action::Right]
                    .into_iter()
                    .filter_map(|a| c.offset(a))
                    .filter(|&n| self.is_free(n))
                    .count()
            })
            .sum()
    }
}

/// A maze problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMaze {
    grid: WallGrid,
    start: Coord,
    goal: Coord,
}

impl GridMaze {
    pub fn new(grid: WallGrid, start: Coord, goal: Coord) -> Result<Self, DomainError> {
        for c in [start, goal] {
            if !grid.in_bounds(c) {
                return Err(DomainError::OutOfBounds { coord: c, width: grid.width, height: grid.height });
            }
            if grid.is_wall(c) {
                return Err(DomainError::EndpointOnWall(c));
            }
        }
        if start == goal {
            return Err(DomainError::StartIsGoal(start));
        }
        Ok(GridMaze { grid, start, goal })
    }

    pub fn grid(&self) -> &WallGrid {
        &self.grid
    }

    pub fn width(&self) -> u16 {
        self.grid.width
    }

    pub fn height(&self) -> u16 {
        self.grid.height
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    pub fn goal(&self) -> Coord {
        self.goal
    }

    pub fn is_wall(&self, c: Coord) -> bool {
        self.grid.is_wall(c)
    }

    /// In-bounds, non-wall cells at distance one from `c`, ordered Up, Down,
    /// Left, Right.
    pub fn neighbors(&self, c: Coord) -> Result<Vec<Coord>, DomainError> {
        if !self.grid.in_bounds(c) {
            return Err(DomainError::OutOfBounds { coord: c, width: self.width(), height: self.height() });
        }
        Ok(self.grid.free_neighbors(c).map(|(_, n)| n).collect())
    }

    pub fn execute_plan(&self, plan: &[Action]) -> PlanVerdict {
        let mut pos = self.start;
        for (step, &action) in plan.iter().enumerate() {
            let next = match pos.offset(action) {
                Some(n) if self.grid.in_bounds(n) => n,
                _ => return PlanVerdict::fail(step, PlanFailure::OutOfBounds),
            };
            if self.grid.is_wall(next) {
                return PlanVerdict::fail(step, PlanFailure::HitWall);
            }
            pos = next;
        }
        if pos == self.goal {
            PlanVerdict::VALID
        } else {
            PlanVerdict::fail(plan.len(), PlanFailure::EndedOffGoal)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanFailure {
    HitWall,
    OutOfBounds,
    EndedOffGoal,
}

/// Outcome of executing a maze plan. `failure` is `None` exactly when valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanVerdict {
    pub failure: Option<(usize, PlanFailure)>,
}

impl PlanVerdict {
    pub const VALID: PlanVerdict = PlanVerdict { failure: None };

    fn fail(step: usize, reason: PlanFailure) -> Self {
        PlanVerdict { failure: Some((step, reason)) }
    }

    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u16, y: u16) -> Coord {
        Coord::new(x, y)
    }

    fn open_maze(w: u16, h: u16, walls: &[Coord], start: Coord, goal: Coord) -> GridMaze {
        GridMaze::new(WallGrid::from_walls(w, h, walls.iter().copied()).unwrap(), start, goal).unwrap()
    }

    #[test]
    fn neighbors_follow_fixed_order() {
        let m = open_maze(3, 3, &[], c(0, 0), c(2, 2));
        assert_eq!(m.neighbors(c(1, 1)).unwrap(), vec![c(1, 2), c(1, 0), c(0, 1), c(2, 1)]);
        let m = open_maze(3, 3, &[c(1, 2)], c(0, 0), c(2, 2));
        assert_eq!(m.neighbors(c(1, 1)).unwrap(), vec![c(1, 0), c(0, 1), c(2, 1)]);
        let m = open_maze(3, 3, &[], c(2, 2), c(1, 1));
        assert_eq!(m.neighbors(c(0, 0)).unwrap(), vec![c(0, 1), c(1, 0)]);
    }

    #[test]
    fn neighbors_out_of_bounds_is_error() {
        let m = open_maze(3, 3, &[], c(0, 0), c(2, 2));
        assert!(matches!(m.neighbors(c(3, 0)), Err(DomainError::OutOfBounds { .. })));
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(c(0, 0), c(3, 4)), 7);
        assert_eq!(manhattan(c(5, 5), c(5, 5)), 0);
        assert_eq!(manhattan(c(29, 0), c(0, 29)), 58);
    }

    #[test]
    fn execute_plan_examples() {
        // 2x3 corridor up the left column, right column walled.
        let m = open_maze(2, 3, &[c(1, 0), c(1, 1), c(1, 2)], c(0, 0), c(0, 2));
        assert!(m.execute_plan(&[Action::Up, Action::Up]).is_valid());
        assert_eq!(
            m.execute_plan(&[Action::Up, Action::Right]).failure,
            Some((1, PlanFailure::HitWall))
        );
        assert_eq!(
            m.execute_plan(&[Action::Up, Action::Up, Action::Down]).failure,
            Some((3, PlanFailure::EndedOffGoal))
        );
        assert_eq!(m.execute_plan(&[Action::Left]).failure, Some((0, PlanFailure::OutOfBounds)));
        assert_eq!(m.execute_plan(&[]).failure, Some((0, PlanFailure::EndedOffGoal)));
    }

    #[test]
    fn maze_rejects_bad_endpoints() {
        let g = WallGrid::from_walls(3, 3, [c(1, 1)]).unwrap();
        assert!(matches!(GridMaze::new(g.clone(), c(1, 1), c(0, 0)), Err(DomainError::EndpointOnWall(_))));
        assert!(matches!(GridMaze::new(g.clone(), c(0, 0), c(0, 0)), Err(DomainError::StartIsGoal(_))));
        assert!(matches!(GridMaze::new(g, c(0, 0), c(5, 0)), Err(DomainError::OutOfBounds { .. })));
        assert!(WallGrid::from_walls(3, 3, [c(3, 3)]).is_err());
    }

    #[test]
    fn walls_are_row_major() {
        let g = WallGrid::from_walls(3, 3, [c(2, 0), c(0, 1), c(1, 0)]).unwrap();
        assert_eq!(g.walls().collect::<Vec<_>>(), vec![c(1, 0), c(2, 0), c(0, 1)]);
    }
}
