//! A* with explicit open and closed lists and a linearized event trace.
//!
//! Every generated child that enters (or improves its entry in) the open list
//! produces a `Create` event; every expansion produces a `Close` event.
//! Children already closed are skipped silently. Ties on `f` prefer the larger
//! `g`, then the earlier insertion.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::grid::{manhattan, Action, Coord, GridMaze, Plan};

/// A deterministic state space searched by [`astar`] and replayed by the
/// trace validator.
pub trait SearchSpace {
    type State: Copy + Eq + Hash + Debug;

    fn start(&self) -> Self::State;
    fn is_goal(&self, state: &Self::State) -> bool;
    fn heuristic(&self, state: &Self::State) -> u32;
    /// Legal successors in the fixed action order Up, Down, Left, Right.
    fn successors(&self, state: &Self::State) -> Vec<(Action, Self::State)>;
    fn plan_is_valid(&self, plan: &[Action]) -> bool;
}

impl SearchSpace for GridMaze {
    type State = Coord;

    fn start(&self) -> Coord {
        GridMaze::start(self)
    }

    fn is_goal(&self, state: &Coord) -> bool {
        *state == self.goal()
    }

    fn heuristic(&self, state: &Coord) -> u32 {
        manhattan(*state, self.goal())
    }

    fn successors(&self, state: &Coord) -> Vec<(Action, Coord)> {
        self.grid().free_neighbors(*state).collect()
    }

    fn plan_is_valid(&self, plan: &[Action]) -> bool {
        self.execute_plan(plan).is_valid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Create,
    Close,
}

impl EventKind {
    pub fn token(self) -> &'static str {
        match self {
            EventKind::Create => "create",
            EventKind::Close => "close",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEvent<S> {
    pub kind: EventKind,
    pub state: S,
    pub g: u32,
    pub h: u32,
}

impl<S> TraceEvent<S> {
    pub fn create(state: S, g: u32, h: u32) -> Self {
        TraceEvent { kind: EventKind::Create, state, g, h }
    }

    pub fn close(state: S, g: u32, h: u32) -> Self {
        TraceEvent { kind: EventKind::Close, state, g, h }
    }

    pub fn f(&self) -> u32 {
        self.g + self.h
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult<S> {
    pub plan: Plan,
    pub trace: Vec<TraceEvent<S>>,
    /// Number of `Close` events.
    pub expanded: usize,
}

struct NodeInfo<S> {
    g: u32,
    parent: Option<(S, Action)>,
    closed: bool,
}

/// Heap key: max-heap over (lowest f, highest g, earliest insertion).
type OpenKey = (Reverse<u32>, u32, Reverse<u64>);

/// Runs A* from `space.start()`. `budget` caps the number of expansions.
pub fn astar<P: SearchSpace>(space: &P, budget: Option<usize>) -> Result<SearchResult<P::State>, SearchError> {
    let start = space.start();
    let mut nodes: HashMap<P::State, NodeInfo<P::State>> = HashMap::new();
    let mut open: BinaryHeap<(OpenKey, OpenEntry<P::State>)> = BinaryHeap::new();
    let mut trace = Vec::new();
    let mut inserted = 0u64;
    let mut expanded = 0usize;

    let h0 = space.heuristic(&start);
    nodes.insert(start, NodeInfo { g: 0, parent: None, closed: false });
    open.push(((Reverse(h0), 0, Reverse(inserted)), OpenEntry(start)));
    trace.push(TraceEvent::create(start, 0, h0));

    while let Some(((Reverse(_), g, _), OpenEntry(state))) = open.pop() {
        let info = nodes.get_mut(&state).expect("queued states are tracked");
        if info.closed || info.g != g {
            continue; // stale entry superseded by a cheaper create
        }
        if budget.is_some_and(|b| expanded >= b) {
            return Err(SearchError::BudgetExceeded(expanded));
        }
        info.closed = true;
        expanded += 1;
        let h = space.heuristic(&state);
        trace.push(TraceEvent::close(state, g, h));

        if space.is_goal(&state) {
            let plan = reconstruct(&nodes, state);
            return Ok(SearchResult { plan, trace, expanded });
        }

        for (action, child) in space.successors(&state) {
            let ng = g + 1;
            match nodes.entry(child) {
                Entry::Occupied(mut e) => {
                    let node = e.get_mut();
                    if node.closed || node.g <= ng {
                        continue;
                    }
                    node.g = ng;
                    node.parent = Some((state, action));
                }
                Entry::Vacant(e) => {
                    e.insert(NodeInfo { g: ng, parent: Some((state, action)), closed: false });
                }
            }
            let ch = space.heuristic(&child);
            inserted += 1;
            open.push(((Reverse(ng + ch), ng, Reverse(inserted)), OpenEntry(child)));
            trace.push(TraceEvent::create(child, ng, ch));
        }
    }
    Err(SearchError::Unsolvable { expanded })
}

/// Heap payload excluded from ordering; the key alone decides priority.
struct OpenEntry<S>(S);

impl<S> PartialEq for OpenEntry<S> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl<S> Eq for OpenEntry<S> {}
impl<S> PartialOrd for OpenEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for OpenEntry<S> {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

fn reconstruct<S: Copy + Eq + Hash>(nodes: &HashMap<S, NodeInfo<S>>, goal: S) -> Plan {
    let mut plan = Vec::new();
    let mut cur = goal;
    while let Some((parent, action)) = nodes[&cur].parent {
        plan.push(action);
        cur = parent;
    }
    plan.reverse();
    plan
}

pub fn astar_maze(maze: &GridMaze) -> Result<SearchResult<Coord>, SearchError> {
    astar(maze, None)
}

/// Breadth-first shortest path length from start to goal.
pub fn bfs_shortest_path(maze: &GridMaze) -> Option<u32> {
    let grid = maze.grid();
    let mut dist = vec![u32::MAX; grid.cell_count()];
    let mut queue = VecDeque::from([maze.start()]);
    dist[grid.index(maze.start())] = 0;
    while let Some(c) = queue.pop_front() {
        let d = dist[grid.index(c)];
        if c == maze.goal() {
            return Some(d);
        }
        for (_, n) in grid.free_neighbors(c) {
            let i = grid.index(n);
            if dist[i] == u32::MAX {
                dist[i] = d + 1;
                queue.push_back(n);
            }
        }
    }
    None
}
