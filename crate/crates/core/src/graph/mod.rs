//! Adjacency graphs of tilings: graph distance `D^ε` and ball profiles.
//!
//! Two tiling squares are adjacent when their closures share a boundary
//! segment of positive length; corner contact does not count. Points on square
//! boundaries belong to every closed square containing them, and the distance
//! between two points is the least number of steps from a square containing
//! one to a square containing the other.

mod lazy;

use std::collections::VecDeque;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::tiling::Tiling;

pub use lazy::{lazy_ball_profile, lazy_distance};

/// Graph distance between points or sets; `Unreachable` is the `∞` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GraphDistance {
    Steps(u32),
    Unreachable,
}

impl GraphDistance {
    pub fn steps(self) -> Option<u32> {
        match self {
            GraphDistance::Steps(n) => Some(n),
            GraphDistance::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, GraphDistance::Steps(_))
    }
}

impl fmt::Display for GraphDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphDistance::Steps(n) => write!(f, "{n}"),
            GraphDistance::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// Cumulative ball sizes `#B_r` for `r = 0..=r_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallProfile {
    /// `counts[r]` is the number of squares within graph distance `r`.
    pub counts: Vec<u64>,
    /// Smallest radius whose layer touched an unresolved or unexplored cell
    /// or the domain boundary; counts past it are lower bounds.
    pub truncated_at: Option<u32>,
    /// Exploration stopped at the node budget (lazy profiles only); `counts`
    /// then stops at the last complete radius.
    pub budget_exhausted: bool,
}

impl BallProfile {
    pub fn truncated(&self) -> bool {
        self.truncated_at.is_some() || self.budget_exhausted
    }

    /// Whether `counts[r]` is exact.
    pub fn exact_at(&self, r: u32) -> bool {
        (r as usize) < self.counts.len() && self.truncated_at.map_or(true, |t| r <= t)
    }
}

/// A closed region used as a source or target set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Point(Point),
    /// `[x0, x1] x [y0, y1]`; a degenerate box is a segment.
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disk { center: Point, radius: f64 },
}

impl Region {
    pub fn intersects(&self, s: &DyadicSquare) -> bool {
        let side = s.side();
        let (sx0, sy0) = (s.x0(), s.y0());
        let (sx1, sy1) = (sx0 + side, sy0 + side);
        match *self {
            Region::Point(p) => s.contains_point(p),
            Region::Rect { x0, y0, x1, y1 } => x0 <= sx1 && sx0 <= x1 && y0 <= sy1 && sy0 <= y1,
            Region::Disk { center, radius } => {
                let dx = (sx0 - center.x).max(0.0).max(center.x - sx1);
                let dy = (sy0 - center.y).max(0.0).max(center.y - sy1);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }
}

const BLOCKED_UNRESOLVED: u8 = 1;
const BLOCKED_BOUNDARY: u8 = 2;

/// Explicit adjacency structure of a finished tiling.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    squares: Vec<DyadicSquare>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    /// Bit flags: touches an unresolved/pruned cell, touches the domain boundary.
    blocked: Vec<u8>,
    index: FxHashMap<DyadicSquare, u32>,
    levels: Vec<i32>,
    holes: FxHashMap<DyadicSquare, ()>,
    hole_levels: Vec<i32>,
}

struct Edge {
    coord: i64,
    lo: i64,
    hi: i64,
    id: u32,
}

/// Pairs of ids whose intervals on a common line overlap with positive length.
fn sweep(mut before: Vec<Edge>, mut after: Vec<Edge>, pairs: &mut Vec<(u32, u32)>) {
    before.sort_unstable_by_key(|e| (e.coord, e.lo));
    after.sort_unstable_by_key(|e| (e.coord, e.lo));
    let (mut i, mut j) = (0, 0);
    while i < before.len() && j < after.len() {
        let (a, b) = (&before[i], &after[j]);
        if a.coord != b.coord {
            if a.coord < b.coord {
                i += 1;
            } else {
                j += 1;
            }
            continue;
        }
        if a.lo.max(b.lo) < a.hi.min(b.hi) {
            pairs.push((a.id, b.id));
        }
        if a.hi <= b.hi {
            i += 1;
        } else {
            j += 1;
        }
    }
}

impl AdjacencyGraph {
    /// Build the graph of `t`, in `O(N log N)`.
    pub fn build(t: &Tiling) -> Self {
        let accepted = t.squares.len();
        let holes: Vec<DyadicSquare> = t
            .unresolved
            .iter()
            .map(|c| c.square)
            .chain(t.pruned.iter().copied())
            .collect();
        let all: Vec<DyadicSquare> = t.squares.iter().map(|c| c.square).chain(holes.iter().copied()).collect();
        let finest = all.iter().map(|s| s.level).max().unwrap_or(t.domain.level);
        let ext: Vec<[i64; 4]> = all.iter().map(|s| s.extent_at(finest)).collect();
        let dom = t.domain.extent_at(finest);

        let mut blocked = vec![0u8; accepted];
        let mut pairs = Vec::new();
        for axis in 0..2 {
            // axis 0: vertical contacts (left square's right edge = right square's left edge)
            let (lo_i, hi_i, a_i, b_i) = if axis == 0 { (2, 3, 1, 0) } else { (0, 1, 3, 2) };
            let mut before = Vec::with_capacity(all.len());
            let mut after = Vec::with_capacity(all.len());
            for (id, e) in ext.iter().enumerate() {
                before.push(Edge { coord: e[a_i], lo: e[lo_i], hi: e[hi_i], id: id as u32 });
                after.push(Edge { coord: e[b_i], lo: e[lo_i], hi: e[hi_i], id: id as u32 });
            }
            sweep(before, after, &mut pairs);
        }

        let mut degree = vec![0u32; accepted];
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            let (a, b) = (a as usize, b as usize);
            match (a < accepted, b < accepted) {
                (true, true) => {
                    degree[a] += 1;
                    degree[b] += 1;
                    edges.push((a as u32, b as u32));
                }
                (true, false) => blocked[a] |= BLOCKED_UNRESOLVED,
                (false, true) => blocked[b] |= BLOCKED_UNRESOLVED,
                _ => {}
            }
        }
        for (id, e) in ext.iter().take(accepted).enumerate() {
            if e[0] == dom[0] || e[1] == dom[1] || e[2] == dom[2] || e[3] == dom[3] {
                blocked[id] |= BLOCKED_BOUNDARY;
            }
        }

        let mut offsets = vec![0u32; accepted + 1];
        for i in 0..accepted {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[accepted] as usize];
        for (a, b) in edges {
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for i in 0..accepted {
            targets[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }

        let squares: Vec<DyadicSquare> = all[..accepted].to_vec();
        let index = squares.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
        let mut levels: Vec<i32> = squares.iter().map(|s| s.level).collect();
        levels.sort_unstable();
        levels.dedup();
        let mut hole_levels: Vec<i32> = holes.iter().map(|s| s.level).collect();
        hole_levels.sort_unstable();
        hole_levels.dedup();
        Self {
            squares,
            offsets,
            targets,
            blocked,
            index,
            levels,
            holes: holes.into_iter().map(|s| (s, ())).collect(),
            hole_levels,
        }
    }

    pub fn node_count(&self) -> usize {
        self.squares.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn square(&self, id: u32) -> DyadicSquare {
        self.squares[id as usize]
    }

    pub fn id_of(&self, s: &DyadicSquare) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.targets[self.offsets[id as usize] as usize..self.offsets[id as usize + 1] as usize]
    }

    /// Touches an unresolved or unexplored cell.
    pub fn touches_unresolved(&self, id: u32) -> bool {
        self.blocked[id as usize] & BLOCKED_UNRESOLVED != 0
    }

    pub fn touches_boundary(&self, id: u32) -> bool {
        self.blocked[id as usize] & BLOCKED_BOUNDARY != 0
    }

    /// Ids of the tiling squares whose closure contains `p`.
    pub fn squares_containing(&self, p: Point) -> Vec<u32> {
        let mut out = Vec::new();
        for &level in &self.levels {
            for s in DyadicSquare::squares_at_level_containing(level, p) {
                if let Some(&id) = self.index.get(&s) {
                    out.push(id);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `p` lies in an unresolved or unexplored cell.
    pub fn in_hole(&self, p: Point) -> bool {
        self.hole_levels.iter().any(|&level| {
            DyadicSquare::squares_at_level_containing(level, p)
                .iter()
                .any(|s| self.holes.contains_key(s))
        })
    }

    /// Ids of the tiling squares meeting `region`.
    pub fn squares_meeting(&self, region: &Region) -> Vec<u32> {
        (0..self.squares.len() as u32)
            .filter(|&i| region.intersects(&self.squares[i as usize]))
            .collect()
    }

    /// Breadth-first distances from `sources`, stopping once a node with
    /// `stop(id)` is settled. Unvisited nodes hold `u32::MAX`.
    fn bfs(&self, sources: &[u32], mut stop: impl FnMut(u32) -> bool) -> (Vec<u32>, Option<u32>) {
        let mut dist = vec![u32::MAX; self.squares.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if stop(v) {
                return (dist, Some(v));
            }
            let d = dist[v as usize] + 1;
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
        (dist, None)
    }

    /// Distance between square ids.
    pub fn square_distance(&self, a: u32, b: u32) -> GraphDistance {
        let (dist, hit) = self.bfs(&[a], |v| v == b);
        match hit {
            Some(v) => GraphDistance::Steps(dist[v as usize]),
            None => GraphDistance::Unreachable,
        }
    }

    /// `D^ε(z, w)`.
    pub fn distance(&self, z: Point, w: Point) -> GraphDistance {
        self.set_distance(&Region::Point(z), &Region::Point(w))
    }

    /// `inf_{z∈A} inf_{w∈B} D^ε(z, w)`.
    pub fn set_distance(&self, a: &Region, b: &Region) -> GraphDistance {
        let sources = self.squares_meeting(a);
        let mut is_target = vec![false; self.squares.len()];
        let mut any = false;
        for id in self.squares_meeting(b) {
            is_target[id as usize] = true;
            any = true;
        }
        if sources.is_empty() || !any {
            return GraphDistance::Unreachable;
        }
        let (dist, hit) = self.bfs(&sources, |v| is_target[v as usize]);
        match hit {
            Some(v) => GraphDistance::Steps(dist[v as usize]),
            None => GraphDistance::Unreachable,
        }
    }

    /// All distances from the squares containing `z`.
    pub fn distances_from(&self, z: Point) -> Vec<u32> {
        self.bfs(&self.squares_containing(z), |_| false).0
    }

    /// `#B_r(center)` for `r = 0..=r_max`.
    pub fn ball_profile(&self, center: Point, r_max: u32) -> Result<BallProfile> {
        let sources = self.squares_containing(center);
        if sources.is_empty() {
            return Err(Error::domain(format!(
                "center {center:?} is not covered by any tiling square"
            )));
        }
        let mut layer = vec![0u64; r_max as usize + 1];
        let mut truncated_at = None;
        let (dist, _) = self.bfs(&sources, |_| false);
        for (id, &d) in dist.iter().enumerate() {
            if d <= r_max {
                layer[d as usize] += 1;
                if d < r_max && self.blocked[id] != 0 {
                    truncated_at = Some(truncated_at.map_or(d, |t: u32| t.min(d)));
                }
            }
        }
        let mut counts = Vec::with_capacity(layer.len());
        let mut acc = 0;
        for c in layer {
            acc += c;
            counts.push(acc);
        }
        Ok(BallProfile {
            counts,
            truncated_at,
            budget_exhausted: false,
        })
    }
}
