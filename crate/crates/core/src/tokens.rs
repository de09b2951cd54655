//! Token grammar for problems, traces and plans.
//!
//! ```text
//! maze-problem    = "bos" "start" X Y "goal" X Y { "wall" X Y } "trace"
//! sokoban-problem = "bos" "worker" X Y "box" X Y "box" X Y "dock" X Y "dock" X Y
//!                   { "wall" X Y } "trace"
//! trace           = { event }
//! event           = ( "create" | "close" ) state COST COST
//! maze-state      = X Y
//! sokoban-state   = "worker" X Y "box" X Y "box" X Y
//! plan            = "plan" { "up" | "down" | "left" | "right" } "eos"
//! X, Y            = "0" | "1" | ... | "29"
//! COST            = "c0" | "c1" | ... | "c899"      (first COST is g, second h)
//! ```
//!
//! Walls are listed in row-major order starting from row `y = 0`. Sokoban
//! boxes and docks are listed in sorted order. On disk, tokens are joined by
//! single spaces and each sample occupies one line.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, EncodeError};
use crate::grid::{Action, Coord, GridMaze, Plan, WallGrid};
use crate::search::{EventKind, TraceEvent};
use crate::sokoban::{SokobanInstance, SokobanState, BOARD_SIZE};

pub const GRAMMAR_VERSION: &str = "tracelab-tokens/1";
pub const COORD_TOKENS: u16 = 30;
pub const COST_TOKENS: u32 = 900;

pub const MAZE_WORDS: [&str; 14] = [
    "create", "close", "wall", "start", "goal", "plan", "trace", "up", "down", "left", "right", "bos", "eos", "pad",
];
pub const SOKOBAN_WORDS: [&str; 3] = ["worker", "box", "dock"];

pub type TokenStream = Vec<String>;

pub fn to_line<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ")
}

pub fn from_line(line: &str) -> TokenStream {
    line.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Maze,
    Sokoban,
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashSet<String>,
}

impl Vocabulary {
    pub fn for_domain(domain: Domain) -> Self {
        let mut tokens: Vec<String> = MAZE_WORDS.iter().map(|w| w.to_string()).collect();
        if domain == Domain::Sokoban {
            tokens.extend(SOKOBAN_WORDS.iter().map(|w| w.to_string()));
        }
        tokens.extend((0..COORD_TOKENS).map(|c| c.to_string()));
        tokens.extend((0..COST_TOKENS).map(|c| format!("c{c}")));
        let index = tokens.iter().cloned().collect();
        Vocabulary { tokens, index }
    }

    pub fn maze() -> Self {
        Self::for_domain(Domain::Maze)
    }

    pub fn sokoban() -> Self {
        Self::for_domain(Domain::Sokoban)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

fn coord_token(v: u16) -> Result<String, EncodeError> {
    if v < COORD_TOKENS {
        Ok(v.to_string())
    } else {
        Err(EncodeError::Coordinate(v))
    }
}

fn cost_token(v: u32) -> Result<String, EncodeError> {
    if v < COST_TOKENS {
        Ok(format!("c{v}"))
    } else {
        Err(EncodeError::Cost(v))
    }
}

fn push_coord(out: &mut TokenStream, c: Coord) -> Result<(), EncodeError> {
    out.push(coord_token(c.x)?);
    out.push(coord_token(c.y)?);
    Ok(())
}

fn parse_coord_value(tok: &str) -> Option<u16> {
    let v: u16 = tok.parse().ok()?;
    (v < COORD_TOKENS && v.to_string() == tok).then_some(v)
}

fn parse_cost_value(tok: &str) -> Option<u32> {
    let digits = tok.strip_prefix('c')?;
    let v: u32 = digits.parse().ok()?;
    (v < COST_TOKENS && v.to_string() == digits).then_some(v)
}

/// States that can be written into and read out of trace events.
pub trait TraceState: Sized {
    fn encode_state(&self, out: &mut TokenStream) -> Result<(), EncodeError>;
    fn decode_state(cursor: &mut Cursor<'_>) -> Result<Self, Unexpected>;
}

impl TraceState for Coord {
    fn encode_state(&self, out: &mut TokenStream) -> Result<(), EncodeError> {
        push_coord(out, *self)
    }

    fn decode_state(cursor: &mut Cursor<'_>) -> Result<Self, Unexpected> {
        cursor.coord()
    }
}

impl TraceState for SokobanState {
    fn encode_state(&self, out: &mut TokenStream) -> Result<(), EncodeError> {
        out.push("worker".into());
        push_coord(out, self.worker)?;
        for b in self.boxes() {
            out.push("box".into());
            push_coord(out, b)?;
        }
        Ok(())
    }

    fn decode_state(cursor: &mut Cursor<'_>) -> Result<Self, Unexpected> {
        cursor.word("worker")?;
        let worker = cursor.coord()?;
        cursor.word("box")?;
        let a = cursor.coord()?;
        cursor.word("box")?;
        let b = cursor.coord()?;
        if a == b {
            cursor.pos -= 2;
            return Err(cursor.unexpected("a box position distinct from the first box"));
        }
        Ok(SokobanState::new(worker, [a, b]))
    }
}

pub fn encode_trace<S: TraceState>(events: &[TraceEvent<S>]) -> Result<TokenStream, EncodeError> {
    let mut out = Vec::with_capacity(events.len() * 5);
    for e in events {
        out.push(e.kind.token().into());
        e.state.encode_state(&mut out)?;
        out.push(cost_token(e.g)?);
        out.push(cost_token(e.h)?);
    }
    Ok(out)
}

pub fn encode_plan(plan: &[Action]) -> TokenStream {
    let mut out = Vec::with_capacity(plan.len() + 2);
    out.push("plan".into());
    out.extend(plan.iter().map(|a| a.token().to_string()));
    out.push("eos".into());
    out
}

fn push_walls(out: &mut TokenStream, grid: &WallGrid) -> Result<(), EncodeError> {
    for w in grid.walls() {
        out.push("wall".into());
        push_coord(out, w)?;
    }
    Ok(())
}

pub fn encode_problem(maze: &GridMaze) -> Result<TokenStream, EncodeError> {
    let mut out = vec!["bos".to_string(), "start".into()];
    push_coord(&mut out, maze.start())?;
    out.push("goal".into());
    push_coord(&mut out, maze.goal())?;
    push_walls(&mut out, maze.grid())?;
    out.push("trace".into());
    Ok(out)
}

pub fn encode_sokoban_problem(inst: &SokobanInstance) -> Result<TokenStream, EncodeError> {
    let mut out = vec!["bos".to_string(), "worker".into()];
    push_coord(&mut out, inst.worker_start())?;
    for b in inst.boxes_start() {
        out.push("box".into());
        push_coord(&mut out, b)?;
    }
    for d in inst.docks() {
        out.push("dock".into());
        push_coord(&mut out, d)?;
    }
    push_walls(&mut out, inst.walls())?;
    out.push("trace".into());
    Ok(out)
}

/// Which part of a response a parse failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Problem,
    Trace,
    Plan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub section: Section,
    /// Token offset of the offending (or missing) token.
    pub position: usize,
    /// Number of complete events parsed before the failure.
    pub event_index: usize,
    pub expected: String,
    pub found: Option<String>,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.found {
            Some(t) => write!(f, "token {}: expected {}, found `{}`", self.position, self.expected, t),
            None => write!(f, "token {}: expected {}, found end of stream", self.position, self.expected),
        }
    }
}

impl std::error::Error for ParseError {}

/// Position-tracking reader over a token slice.
pub struct Cursor<'a> {
    tokens: &'a [String],
    pos: usize,
    end: usize,
}

/// A failed expectation at the cursor's position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unexpected {
    pub position: usize,
    pub expected: String,
    pub found: Option<String>,
}

impl<'a> Cursor<'a> {
    fn new(tokens: &'a [String], pos: usize, end: usize) -> Self {
        Cursor { tokens, pos, end }
    }

    fn peek(&self) -> Option<&'a str> {
        (self.pos < self.end).then(|| self.tokens[self.pos].as_str())
    }

    fn unexpected(&self, expected: &str) -> Unexpected {
        Unexpected { position: self.pos, expected: expected.into(), found: self.peek().map(str::to_owned) }
    }

    fn word(&mut self, w: &str) -> Result<(), Unexpected> {
        if self.peek() == Some(w) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn coord_value(&mut self) -> Result<u16, Unexpected> {
        match self.peek().and_then(parse_coord_value) {
            Some(v) => {
                self.pos += 1;
                Ok(v)
            }
            None => Err(self.unexpected("a coordinate token")),
        }
    }

    fn coord(&mut self) -> Result<Coord, Unexpected> {
        let x = self.coord_value()?;
        let y = self.coord_value()?;
        Ok(Coord::new(x, y))
    }

    fn cost(&mut self) -> Result<u32, Unexpected> {
        match self.peek().and_then(parse_cost_value) {
            Some(v) => {
                self.pos += 1;
                Ok(v)
            }
            None => Err(self.unexpected("a cost token")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse<S> {
    pub events: Vec<TraceEvent<S>>,
    pub plan: Option<Plan>,
    /// First malformed fragment in the trace section; `events` holds the
    /// longest valid prefix.
    pub parse_error: Option<ParseError>,
    /// Malformed plan section; `plan` is `None` when set.
    pub plan_error: Option<ParseError>,
}

/// Parses a model response: trace events, then a `plan ... eos` section.
///
/// The plan section starts at the first `plan` token, so the plan is judged
/// independently of whatever precedes it. A single leading `trace` token is
/// skipped. Never fails; problems are reported inside the result.
pub fn parse_response<S: TraceState, T: AsRef<str>>(stream: &[T]) -> ParsedResponse<S> {
    let tokens: Vec<String> = stream.iter().map(|t| t.as_ref().to_owned()).collect();
    let plan_at = tokens.iter().position(|t| t == "plan");
    let trace_end = plan_at.unwrap_or(tokens.len());

    let mut cursor = Cursor::new(&tokens, 0, trace_end);
    if cursor.peek() == Some("trace") {
        cursor.pos += 1;
    }
    let mut events = Vec::new();
    let mut parse_error = None;
    while cursor.peek().is_some() {
        match parse_event::<S>(&mut cursor) {
            Ok(e) => events.push(e),
            Err(u) => {
                parse_error = Some(ParseError {
                    section: Section::Trace,
                    position: u.position,
                    event_index: events.len(),
                    expected: u.expected,
                    found: u.found,
                });
                break;
            }
        }
    }

    let (plan, plan_error) = match plan_at {
        None => (None, None),
        Some(p) => match parse_plan_body(&tokens, p + 1) {
            Ok(plan) => (Some(plan), None),
            Err(u) => (
                None,
                Some(ParseError {
                    section: Section::Plan,
                    position: u.position,
                    event_index: events.len(),
                    expected: u.expected,
                    found: u.found,
                }),
            ),
        },
    };
    ParsedResponse { events, plan, parse_error, plan_error }
}

fn parse_event<S: TraceState>(cursor: &mut Cursor<'_>) -> Result<TraceEvent<S>, Unexpected> {
    let kind = match cursor.peek() {
        Some("create") => EventKind::Create,
        Some("close") => EventKind::Close,
        _ => return Err(cursor.unexpected("`create` or `close`")),
    };
    cursor.pos += 1;
    let state = S::decode_state(cursor)?;
    let g = cursor.cost()?;
    let h = cursor.cost()?;
    Ok(TraceEvent { kind, state, g, h })
}

/// Actions after a `plan` token up to `eos`. Tokens after `eos` are ignored.
fn parse_plan_body(tokens: &[String], from: usize) -> Result<Plan, Unexpected> {
    let mut plan = Vec::new();
    for (i, tok) in tokens.iter().enumerate().skip(from) {
        if tok == "eos" {
            return Ok(plan);
        }
        match Action::from_token(tok) {
            Some(a) => plan.push(a),
            None => {
                return Err(Unexpected {
                    position: i,
                    expected: "an action or `eos`".into(),
                    found: Some(tok.clone()),
                })
            }
        }
    }
    Err(Unexpected { position: tokens.len(), expected: "an action or `eos`".into(), found: None })
}

pub fn parse_plan<T: AsRef<str>>(stream: &[T]) -> Result<Plan, ParseError> {
    let tokens: Vec<String> = stream.iter().map(|t| t.as_ref().to_owned()).collect();
    let mut cursor = Cursor::new(&tokens, 0, tokens.len());
    let to_err = |u: Unexpected| ParseError {
        section: Section::Plan,
        position: u.position,
        event_index: 0,
        expected: u.expected,
        found: u.found,
    };
    cursor.word("plan").map_err(to_err)?;
    parse_plan_body(&tokens, 1).map_err(to_err)
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemParseError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

fn problem_error(u: Unexpected) -> ParseError {
    ParseError { section: Section::Problem, position: u.position, event_index: 0, expected: u.expected, found: u.found }
}

fn parse_walls_and_trace(cursor: &mut Cursor<'_>) -> Result<Vec<Coord>, Unexpected> {
    let mut walls = Vec::new();
    while cursor.peek() == Some("wall") {
        cursor.pos += 1;
        walls.push(cursor.coord()?);
    }
    if cursor.peek().is_some() {
        cursor.word("trace")?;
    }
    if cursor.peek().is_some() {
        return Err(cursor.unexpected("end of problem"));
    }
    Ok(walls)
}

/// Inverse of [`encode_problem`]; the grid size is not part of the stream.
/// The trailing `trace` delimiter is optional.
pub fn parse_problem<T: AsRef<str>>(stream: &[T], width: u16, height: u16) -> Result<GridMaze, ProblemParseError> {
    let tokens: Vec<String> = stream.iter().map(|t| t.as_ref().to_owned()).collect();
    let mut cur = Cursor::new(&tokens, 0, tokens.len());
    let parsed = (|| {
        cur.word("bos")?;
        cur.word("start")?;
        let start = cur.coord()?;
        cur.word("goal")?;
        let goal = cur.coord()?;
        let walls = parse_walls_and_trace(&mut cur)?;
        Ok((start, goal, walls))
    })();
    let (start, goal, walls) = parsed.map_err(problem_error)?;
    let grid = WallGrid::from_walls(width, height, walls)?;
    Ok(GridMaze::new(grid, start, goal)?)
}

pub fn parse_sokoban_problem<T: AsRef<str>>(stream: &[T]) -> Result<SokobanInstance, ProblemParseError> {
    let tokens: Vec<String> = stream.iter().map(|t| t.as_ref().to_owned()).collect();
    let mut cur = Cursor::new(&tokens, 0, tokens.len());
    let parsed = (|| {
        cur.word("bos")?;
        cur.word("worker")?;
        let worker = cur.coord()?;
        let mut boxes = [Coord::new(0, 0); 2];
        for b in boxes.iter_mut() {
            cur.word("box")?;
            *b = cur.coord()?;
        }
        let mut docks = [Coord::new(0, 0); 2];
        for d in docks.iter_mut() {
            cur.word("dock")?;
            *d = cur.coord()?;
        }
        let walls = parse_walls_and_trace(&mut cur)?;
        Ok((worker, boxes, docks, walls))
    })();
    let (worker, boxes, docks, walls) = parsed.map_err(problem_error)?;
    let grid = WallGrid::from_walls(BOARD_SIZE, BOARD_SIZE, walls)?;
    Ok(SokobanInstance::new(grid, docks, boxes, worker)?)
}
