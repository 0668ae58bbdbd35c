//! Breadth-first search on a [`LazyTiling`], evaluating squares on demand.

use rustc_hash::{FxHashMap, FxHashSet};

use super::{BallProfile, GraphDistance};
use crate::dyadic::{DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::tiling::LazyTiling;

/// `#B_r(center)` for `r = 0..=r_max`, visiting at most `budget` squares.
///
/// When the budget runs out the profile stops at the last complete radius and
/// `budget_exhausted` is set.
pub fn lazy_ball_profile<F: Field>(
    t: &mut LazyTiling<F>,
    center: Point,
    r_max: u32,
    budget: usize,
) -> Result<BallProfile> {
    let (sources, _) = t.leaves_containing(center)?;
    if sources.is_empty() {
        return Err(Error::domain(format!(
            "center {center:?} is not covered by any tiling square"
        )));
    }
    let mut seen: FxHashSet<DyadicSquare> = sources.iter().copied().collect();
    let mut frontier = sources;
    let mut counts = vec![frontier.len() as u64];
    let mut truncated_at = None;
    let mut buf = Vec::new();
    for r in 0..r_max {
        let mut next = Vec::new();
        for &s in &frontier {
            buf.clear();
            let scan = t.neighbors(s, &mut buf)?;
            if (scan.touches_boundary || scan.touches_unresolved) && truncated_at.is_none() {
                truncated_at = Some(r);
            }
            for &n in &buf {
                if seen.insert(n) {
                    next.push(n);
                }
            }
        }
        if seen.len() > budget {
            return Ok(BallProfile { counts, truncated_at, budget_exhausted: true });
        }
        counts.push(seen.len() as u64);
        frontier = next;
    }
    Ok(BallProfile { counts, truncated_at, budget_exhausted: false })
}

/// `D^ε(z, w)` on a lazy tiling; `None` when more than `budget` squares would
/// have to be visited.
///
/// The search grows balls around both ends, one full layer at a time on the
/// smaller side. Cells left unresolved at the depth cap are impassable, so the
/// result is an upper bound on the distance in the full tiling.
pub fn lazy_distance<F: Field>(
    t: &mut LazyTiling<F>,
    z: Point,
    w: Point,
    budget: usize,
) -> Result<Option<GraphDistance>> {
    let (sources, _) = t.leaves_containing(z)?;
    let (targets, _) = t.leaves_containing(w)?;
    if sources.is_empty() || targets.is_empty() {
        return Ok(Some(GraphDistance::Unreachable));
    }
    if sources.iter().any(|s| targets.contains(s)) {
        return Ok(Some(GraphDistance::Steps(0)));
    }
    let mut sides = [Side::new(sources), Side::new(targets)];
    let mut buf = Vec::new();
    loop {
        let k = if sides[0].frontier.len() <= sides[1].frontier.len() { 0 } else { 1 };
        let [a, b] = &mut sides;
        let (grow, other) = if k == 0 { (a, &*b) } else { (b, &*a) };
        if grow.frontier.is_empty() {
            return Ok(Some(GraphDistance::Unreachable));
        }
        let mut best: Option<u32> = None;
        let mut next = Vec::new();
        for &s in &grow.frontier {
            buf.clear();
            t.neighbors(s, &mut buf)?;
            for &n in &buf {
                if let Some(&d) = other.dist.get(&n) {
                    let total = grow.radius + 1 + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                if !grow.dist.contains_key(&n) {
                    grow.dist.insert(n, grow.radius + 1);
                    next.push(n);
                }
            }
        }
        if let Some(d) = best {
            return Ok(Some(GraphDistance::Steps(d)));
        }
        grow.frontier = next;
        grow.radius += 1;
        if sides[0].dist.len() + sides[1].dist.len() > budget {
            return Ok(None);
        }
    }
}

struct Side {
    dist: FxHashMap<DyadicSquare, u32>,
    frontier: Vec<DyadicSquare>,
    radius: u32,
}

impl Side {
    fn new(start: Vec<DyadicSquare>) -> Self {
        Self { dist: start.iter().map(|&s| (s, 0)).collect(), frontier: start, radius: 0 }
    }
}
