//! Replays a linearized trace against simulated open and closed lists.
//!
//! Per event, in order:
//!
//! * `create`: the state must be a legal successor of the last closed state
//!   (the very first event must instead create the start state with `g = 0`),
//!   else [`TraceErrorClass::InvalidNeighbor`]; it must not be closed, else
//!   [`TraceErrorClass::AlreadyClosed`]; its `h` must equal the heuristic and
//!   its `g` must be one more than the last closed `g` and must not exceed an
//!   existing open entry, else [`TraceErrorClass::InvalidNeighbor`].
//! * `close`: the state must be open with exactly the stated `g` and `h`,
//!   else [`TraceErrorClass::NotInOpenList`]; no open state may have a
//!   strictly lower `f`, else [`TraceErrorClass::NotLowestF`].
//!
//! Closing the goal ends the replay successfully; later events are ignored.
//! Running out of events first is [`TraceErrorClass::GoalNotReached`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{Coord, GridMaze};
use crate::search::{EventKind, SearchSpace, TraceEvent};
use crate::sokoban::{SokobanInstance, SokobanState};
use crate::tokens::{parse_response, ParsedResponse, TraceState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceErrorClass {
    ParsingError,
    InvalidNeighbor,
    AlreadyClosed,
    NotInOpenList,
    NotLowestF,
    GoalNotReached,
}

impl TraceErrorClass {
    pub const ALL: [TraceErrorClass; 6] = [
        TraceErrorClass::ParsingError,
        TraceErrorClass::InvalidNeighbor,
        TraceErrorClass::AlreadyClosed,
        TraceErrorClass::NotInOpenList,
        TraceErrorClass::NotLowestF,
        TraceErrorClass::GoalNotReached,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceErrorClass::ParsingError => "parsing_error",
            TraceErrorClass::InvalidNeighbor => "invalid_neighbor",
            TraceErrorClass::AlreadyClosed => "already_closed",
            TraceErrorClass::NotInOpenList => "not_in_open_list",
            TraceErrorClass::NotLowestF => "not_lowest_f",
            TraceErrorClass::GoalNotReached => "goal_not_reached",
        }
    }
}

impl fmt::Display for TraceErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceError {
    pub class: TraceErrorClass,
    /// Index of the offending event; the event count for `GoalNotReached`.
    pub event_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceVerdict {
    pub error: Option<TraceError>,
}

impl TraceVerdict {
    pub const VALID: TraceVerdict = TraceVerdict { error: None };

    fn fail(class: TraceErrorClass, event_index: usize) -> Self {
        TraceVerdict { error: Some(TraceError { class, event_index }) }
    }

    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    pub fn class(&self) -> Option<TraceErrorClass> {
        self.error.map(|e| e.class)
    }
}

/// Open list with an `f`-value multiset for the lowest-`f` check.
struct OpenList<S> {
    entries: HashMap<S, (u32, u32)>,
    by_f: BTreeMap<u32, usize>,
}

impl<S: Eq + std::hash::Hash + Copy> OpenList<S> {
    fn new() -> Self {
        OpenList { entries: HashMap::new(), by_f: BTreeMap::new() }
    }

    fn insert(&mut self, s: S, g: u32, h: u32) {
        if let Some((og, oh)) = self.entries.insert(s, (g, h)) {
            self.drop_f(og + oh);
        }
        *self.by_f.entry(g + h).or_default() += 1;
    }

    fn remove(&mut self, s: &S) {
        if let Some((g, h)) = self.entries.remove(s) {
            self.drop_f(g + h);
        }
    }

    fn drop_f(&mut self, f: u32) {
        if let Some(n) = self.by_f.get_mut(&f) {
            *n -= 1;
            if *n == 0 {
                self.by_f.remove(&f);
            }
        }
    }

    fn min_f(&self) -> Option<u32> {
        self.by_f.keys().next().copied()
    }
}

/// Replays parsed events for any search space.
pub fn validate_events<P: SearchSpace>(space: &P, events: &[TraceEvent<P::State>]) -> TraceVerdict {
    use TraceErrorClass::*;
    let mut open = OpenList::new();
    let mut closed: HashSet<P::State> = HashSet::new();
    let mut last_closed: Option<(P::State, u32)> = None;

    for (i, e) in events.iter().enumerate() {
        match e.kind {
            EventKind::Create => {
                let expected_g = match last_closed {
                    None if i == 0 => {
                        if e.state != space.start() {
                            return TraceVerdict::fail(InvalidNeighbor, i);
                        }
                        0
                    }
                    None => return TraceVerdict::fail(InvalidNeighbor, i),
                    Some((parent, pg)) => {
                        if !space.successors(&parent).iter().any(|(_, s)| *s == e.state) {
                            return TraceVerdict::fail(InvalidNeighbor, i);
                        }
                        if closed.contains(&e.state) {
                            return TraceVerdict::fail(AlreadyClosed, i);
                        }
                        pg + 1
                    }
                };
                if e.h != space.heuristic(&e.state) || e.g != expected_g {
                    return TraceVerdict::fail(InvalidNeighbor, i);
                }
                if let Some(&(og, _)) = open.entries.get(&e.state) {
                    if e.g > og {
                        return TraceVerdict::fail(InvalidNeighbor, i);
                    }
                }
                open.insert(e.state, e.g, e.h);
            }
            EventKind::Close => {
                match open.entries.get(&e.state) {
                    Some(&(g, h)) if g == e.g && h == e.h => {}
                    _ => return TraceVerdict::fail(NotInOpenList, i),
                }
                if open.min_f().is_some_and(|m| m < e.f()) {
                    return TraceVerdict::fail(NotLowestF, i);
                }
                open.remove(&e.state);
                closed.insert(e.state);
                last_closed = Some((e.state, e.g));
                if space.is_goal(&e.state) {
                    return TraceVerdict::VALID;
                }
            }
        }
    }
    TraceVerdict::fail(GoalNotReached, events.len())
}

pub fn validate_trace(maze: &GridMaze, events: &[TraceEvent<Coord>]) -> TraceVerdict {
    validate_events(maze, events)
}

pub fn validate_sokoban_trace(instance: &SokobanInstance, events: &[TraceEvent<SokobanState>]) -> TraceVerdict {
    validate_events(instance, events)
}

/// Trace verdict for a parsed response. A malformed trace section counts as
/// `ParsingError` at the event where parsing stopped, unless the parsed
/// prefix already failed earlier or already closed the goal.
pub fn validate_parsed<P: SearchSpace>(space: &P, parsed: &ParsedResponse<P::State>) -> TraceVerdict {
    let verdict = validate_events(space, &parsed.events);
    match (&parsed.parse_error, verdict.error) {
        (Some(pe), Some(TraceError { class: TraceErrorClass::GoalNotReached, .. })) => {
            TraceVerdict::fail(TraceErrorClass::ParsingError, pe.event_index)
        }
        _ => verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseClassification {
    pub plan_valid: bool,
    pub trace_valid: bool,
    pub trace_error: Option<TraceError>,
    /// The trace or plan section failed to parse.
    pub parse_failed: bool,
}

/// Judges plan validity and trace validity of one raw response separately.
pub fn classify<P, T>(space: &P, raw: &[T]) -> ResponseClassification
where
    P: SearchSpace,
    P::State: TraceState,
    T: AsRef<str>,
{
    let parsed = parse_response::<P::State, T>(raw);
    let plan_valid = parsed.plan.as_deref().is_some_and(|p| space.plan_is_valid(p));
    let verdict = validate_parsed(space, &parsed);
    ResponseClassification {
        plan_valid,
        trace_valid: verdict.is_valid(),
        trace_error: verdict.error,
        parse_failed: parsed.parse_error.is_some() || parsed.plan_error.is_some(),
    }
}

/// A maze or Sokoban problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Maze(GridMaze),
    Sokoban(SokobanInstance),
}

pub fn classify_response<T: AsRef<str>>(problem: &Problem, raw: &[T]) -> ResponseClassification {
    match problem {
        Problem::Maze(m) => classify(m, raw),
        Problem::Sokoban(s) => classify(s, raw),
    }
}
