//! Test oracles written independently of the library's search and
//! generation code paths.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracelab::grid::{Coord, WallGrid};
use tracelab::search::{EventKind, TraceEvent};
use tracelab::sokoban::{SokobanInstance, SokobanState};
use tracelab::tokens::{encode_trace, TokenStream};
use tracelab::validate::TraceErrorClass;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_0000_FFFF)
}

fn free(grid: &WallGrid, x: i32, y: i32) -> bool {
    x >= 0 && y >= 0 && (x as u16) < grid.width() && (y as u16) < grid.height() && !grid.is_wall(Coord::new(x as u16, y as u16))
}

type Cell = (i32, i32);

/// Undirected edges between orthogonally adjacent free cells, each once.
pub fn free_edges(grid: &WallGrid) -> (Vec<Cell>, Vec<(Cell, Cell)>) {
    let mut cells = Vec::new();
    let mut edges = Vec::new();
    for y in 0..grid.height() as i32 {
        for x in 0..grid.width() as i32 {
            if !free(grid, x, y) {
                continue;
            }
            cells.push((x, y));
            if free(grid, x + 1, y) {
                edges.push(((x, y), (x + 1, y)));
            }
            if free(grid, x, y + 1) {
                edges.push(((x, y), (x, y + 1)));
            }
        }
    }
    (cells, edges)
}

struct Uf(Vec<usize>);

impl Uf {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }
}

/// Spanning-tree verdict from a union-find pass over free-cell edges:
/// `(vertices, edges, connected, acyclic)`.
pub fn tree_stats(grid: &WallGrid) -> (usize, usize, bool, bool) {
    let (cells, edges) = free_edges(grid);
    let index: HashMap<(i32, i32), usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut uf = Uf((0..cells.len()).collect());
    let mut acyclic = true;
    for (a, b) in &edges {
        let (ra, rb) = (uf.find(index[a]), uf.find(index[b]));
        if ra == rb {
            acyclic = false;
        } else {
            uf.0[ra] = rb;
        }
    }
    let roots: HashSet<usize> = (0..cells.len()).map(|i| uf.find(i)).collect();
    (cells.len(), edges.len(), roots.len() == 1, acyclic)
}

pub fn is_spanning_tree(grid: &WallGrid) -> bool {
    let (v, e, connected, acyclic) = tree_stats(grid);
    connected && acyclic && e + 1 == v
}

/// Flood fill from the first free cell; true when it reaches every free cell.
pub fn flood_connected(grid: &WallGrid) -> bool {
    let (cells, _) = free_edges(grid);
    let Some(&first) = cells.first() else { return true };
    let mut seen = HashSet::from([first]);
    let mut q = VecDeque::from([first]);
    while let Some((x, y)) = q.pop_front() {
        for (dx, dy) in [(0, 1), (0, -1), (-1, 0), (1, 0)] {
            let n = (x + dx, y + dy);
            if free(grid, n.0, n.1) && seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    seen.len() == cells.len()
}

/// A connected graph has a cycle iff it has at least as many edges as vertices.
pub fn has_cycle(grid: &WallGrid) -> bool {
    let (v, e, connected, acyclic) = tree_stats(grid);
    if connected {
        e >= v
    } else {
        !acyclic
    }
}

pub fn dead_ends(grid: &WallGrid) -> usize {
    let (cells, _) = free_edges(grid);
    cells
        .iter()
        .filter(|&&(x, y)| [(0, 1), (0, -1), (-1, 0), (1, 0)].iter().filter(|(dx, dy)| free(grid, x + dx, y + dy)).count() == 1)
        .count()
}

/// BFS distance between two cells on the free grid.
pub fn grid_distance(grid: &WallGrid, from: Coord, to: Coord) -> Option<u32> {
    let mut dist = HashMap::from([((from.x as i32, from.y as i32), 0u32)]);
    let mut q = VecDeque::from([(from.x as i32, from.y as i32)]);
    while let Some(c) = q.pop_front() {
        let d = dist[&c];
        if c == (to.x as i32, to.y as i32) {
            return Some(d);
        }
        for (dx, dy) in [(0, 1), (0, -1), (-1, 0), (1, 0)] {
            let n = (c.0 + dx, c.1 + dy);
            if free(grid, n.0, n.1) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                q.push_back(n);
            }
        }
    }
    None
}

type SokoKey = ((i32, i32), [(i32, i32); 2]);

fn soko_key(s: &SokobanState) -> SokoKey {
    let w = (s.worker.x as i32, s.worker.y as i32);
    let mut b = s.boxes().map(|c| (c.x as i32, c.y as i32));
    b.sort();
    (w, b)
}

/// Independent push-semantics successor function.
fn soko_successors(inst: &SokobanInstance, (w, boxes): SokoKey) -> Vec<SokoKey> {
    let g = inst.walls();
    let mut out = Vec::new();
    for (dx, dy) in [(0, 1), (0, -1), (-1, 0), (1, 0)] {
        let t = (w.0 + dx, w.1 + dy);
        if !free(g, t.0, t.1) {
            continue;
        }
        if let Some(k) = boxes.iter().position(|&b| b == t) {
            let p = (t.0 + dx, t.1 + dy);
            if !free(g, p.0, p.1) || boxes.contains(&p) {
                continue;
            }
            let mut nb = boxes;
            nb[k] = p;
            nb.sort();
            out.push((t, nb));
        } else {
            out.push((t, boxes));
        }
    }
    out
}

/// Exact remaining cost for every state reachable from the instance start,
/// by forward exploration then reverse BFS from solved states. Unsolvable
/// states are absent.
pub fn sokoban_distances(inst: &SokobanInstance) -> HashMap<SokoKey, u32> {
    let start = soko_key(&inst.initial_state());
    let mut seen = HashSet::from([start]);
    let mut q = VecDeque::from([start]);
    let mut reverse: HashMap<SokoKey, Vec<SokoKey>> = HashMap::new();
    while let Some(s) = q.pop_front() {
        for n in soko_successors(inst, s) {
            reverse.entry(n).or_default().push(s);
            if seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    let mut docks = inst.docks().map(|c| (c.x as i32, c.y as i32));
    docks.sort();
    let mut dist: HashMap<SokoKey, u32> = HashMap::new();
    let mut q = VecDeque::new();
    for &s in &seen {
        if s.1 == docks {
            dist.insert(s, 0);
            q.push_back(s);
        }
    }
    while let Some(s) = q.pop_front() {
        let d = dist[&s];
        for &p in reverse.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(p) {
                e.insert(d + 1);
                q.push_back(p);
            }
        }
    }
    dist
}

pub fn sokoban_state_from_key(((wx, wy), b): SokoKey) -> SokobanState {
    SokobanState::new(Coord::new(wx as u16, wy as u16), b.map(|(x, y)| Coord::new(x as u16, y as u16)))
}

pub fn sokoban_optimal(inst: &SokobanInstance) -> Option<u32> {
    sokoban_distances(inst).get(&soko_key(&inst.initial_state())).copied()
}

/// A mutated trace (events or raw tokens) and the index the validator must
/// report.
pub enum Mutation {
    Events(Vec<TraceEvent<Coord>>, usize),
    Tokens(TokenStream, usize),
}

fn neighbors4(c: Coord) -> impl Iterator<Item = Coord> {
    [(0i32, 1i32), (0, -1), (-1, 0), (1, 0)].into_iter().filter_map(move |(dx, dy)| {
        let (x, y) = (c.x as i32 + dx, c.y as i32 + dy);
        (x >= 0 && y >= 0).then(|| Coord::new(x as u16, y as u16))
    })
}

/// Targeted single-event corruption of a valid maze trace that must yield
/// exactly `class`. Returns `None` when the trace offers no site for it.
pub fn mutate(
    grid: &WallGrid,
    trace: &[TraceEvent<Coord>],
    class: TraceErrorClass,
    rng: &mut ChaCha8Rng,
) -> Option<Mutation> {
    let walls: Vec<Coord> = grid.walls().collect();
    let creates: Vec<usize> = (2..trace.len()).filter(|&i| trace[i].kind == EventKind::Create).collect();
    let closes: Vec<usize> = (1..trace.len()).filter(|&i| trace[i].kind == EventKind::Close).collect();
    match class {
        TraceErrorClass::InvalidNeighbor => {
            let k = *creates.choose(rng)?;
            let mut t = trace.to_vec();
            t[k].state = *walls.choose(rng)?;
            Some(Mutation::Events(t, k))
        }
        TraceErrorClass::NotInOpenList => {
            let k = *closes.choose(rng)?;
            let mut t = trace.to_vec();
            t[k].state = *walls.choose(rng)?;
            Some(Mutation::Events(t, k))
        }
        TraceErrorClass::AlreadyClosed => {
            // Sites: a create whose last closed node has a closed neighbour.
            let mut closed = HashSet::new();
            let mut last = None;
            let mut sites = Vec::new();
            for (i, e) in trace.iter().enumerate() {
                match e.kind {
                    EventKind::Close => {
                        closed.insert(e.state);
                        last = Some(e.state);
                    }
                    EventKind::Create => {
                        if let Some(p) = last {
                            for n in neighbors4(p).filter(|n| closed.contains(n)) {
                                sites.push((i, n));
                            }
                        }
                    }
                }
            }
            let &(k, target) = sites.choose(rng)?;
            let mut t = trace.to_vec();
            t[k].state = target;
            Some(Mutation::Events(t, k))
        }
        TraceErrorClass::NotLowestF => {
            // Sites: a close while some other open node has a larger f.
            let mut open: HashMap<Coord, (u32, u32)> = HashMap::new();
            let mut sites = Vec::new();
            for (i, e) in trace.iter().enumerate() {
                match e.kind {
                    EventKind::Create => {
                        open.insert(e.state, (e.g, e.h));
                    }
                    EventKind::Close => {
                        for (&s, &(g, h)) in &open {
                            if g + h > e.g + e.h {
                                sites.push((i, s, g, h));
                            }
                        }
                        open.remove(&e.state);
                    }
                }
            }
            sites.sort_by_key(|&(i, s, _, _)| (i, s));
            let &(k, s, g, h) = sites.choose(rng)?;
            let mut t = trace.to_vec();
            t[k] = TraceEvent::close(s, g, h);
            Some(Mutation::Events(t, k))
        }
        TraceErrorClass::GoalNotReached => {
            let mut t = trace.to_vec();
            t.pop();
            let n = t.len();
            Some(Mutation::Events(t, n))
        }
        TraceErrorClass::ParsingError => {
            let k = rng.gen_range(0..trace.len());
            let mut toks = encode_trace(trace).ok()?;
            let at = 5 * k + rng.gen_range(0..5);
            match rng.gen_range(0..3) {
                0 => {
                    toks.remove(at);
                }
                1 => {
                    // Wrong token class for the slot.
                    toks[at] = match at % 5 {
                        0 => "up".into(),
                        1 | 2 => "c3".into(),
                        _ => "3".into(),
                    };
                }
                _ => toks[at] = "zebra".into(),
            }
            Some(Mutation::Tokens(toks, k))
        }
    }
}
