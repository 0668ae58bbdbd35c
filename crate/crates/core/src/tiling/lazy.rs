//! On-demand tilings.
//!
//! For `Q < 2` a full tiling at a useful depth cap has far too many squares
//! to enumerate, while graph balls and geodesics only touch a small part of
//! it. [`LazyTiling`] decides the status of a square the first time it is
//! asked about and memoizes the answer.

use rustc_hash::FxHashMap;

use super::mass_from_value;
use crate::dyadic::{DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::Params;

/// Status of a square whose strict ancestors were all split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellState {
    /// Tiling square.
    Accepted(f64),
    /// Mass above `ε`, refined further.
    Split,
    /// Mass above `ε` at the depth cap.
    Unresolved(f64),
}

/// Where a square sits relative to the tiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Located {
    /// Contained in this tiling square (possibly equal to it).
    Leaf(DyadicSquare),
    /// Contained in this unresolved cell.
    Unresolved(DyadicSquare),
    /// The square itself is split: the tiling is finer here.
    Split,
    /// Not inside the domain.
    Outside,
}

/// What a neighbor scan ran into besides tiling squares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NeighborScan {
    pub touches_unresolved: bool,
    pub touches_boundary: bool,
}

pub struct LazyTiling<F> {
    field: F,
    q: f64,
    epsilon: f64,
    domain: DyadicSquare,
    depth_cap: i32,
    states: FxHashMap<DyadicSquare, CellState>,
}

impl<F: Field> LazyTiling<F> {
    pub fn new(domain: DyadicSquare, epsilon: f64, field: F, params: &Params, depth_cap: i32) -> Result<Self> {
        super::validate(&domain, epsilon, depth_cap)?;
        Ok(Self {
            field,
            q: params.q,
            epsilon,
            domain,
            depth_cap,
            states: FxHashMap::default(),
        })
    }

    pub fn domain(&self) -> DyadicSquare {
        self.domain
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Squares whose status has been decided so far.
    pub fn evaluated(&self) -> usize {
        self.states.len()
    }

    /// Status of `s`, which must have all strict ancestors split.
    fn state(&mut self, s: DyadicSquare) -> Result<CellState> {
        if let Some(st) = self.states.get(&s) {
            return Ok(*st);
        }
        let h = self.field.square_value(&s)?;
        let m = mass_from_value(h, &s, self.q);
        let st = if m <= self.epsilon {
            CellState::Accepted(m)
        } else if s.level >= self.depth_cap {
            CellState::Unresolved(m)
        } else {
            CellState::Split
        };
        self.states.insert(s, st);
        Ok(st)
    }

    /// Status of `s` if all its ancestors are split, `None` otherwise.
    pub fn cell_state(&mut self, s: DyadicSquare) -> Result<Option<CellState>> {
        match self.locate(s)? {
            Located::Leaf(a) if a == s => Ok(Some(self.state(s)?)),
            Located::Unresolved(a) if a == s => Ok(Some(self.state(s)?)),
            Located::Split => Ok(Some(CellState::Split)),
            _ => Ok(None),
        }
    }

    /// Walk down from the domain towards `target`.
    pub fn locate(&mut self, target: DyadicSquare) -> Result<Located> {
        if target.level < self.domain.level || !self.domain.contains(&target) {
            return Ok(Located::Outside);
        }
        // the deepest ancestor already known to be split shortens the walk
        let mut level = target.level;
        while level > self.domain.level {
            if let Some(CellState::Split) = self.states.get(&target.ancestor_at(level - 1)) {
                break;
            }
            level -= 1;
        }
        for l in level..=target.level {
            let a = target.ancestor_at(l);
            match self.state(a)? {
                CellState::Accepted(_) => return Ok(Located::Leaf(a)),
                CellState::Unresolved(_) => return Ok(Located::Unresolved(a)),
                CellState::Split => {}
            }
        }
        Ok(Located::Split)
    }

    /// Tiling squares whose closure contains `p`, and whether `p` also lies in
    /// an unresolved cell.
    pub fn leaves_containing(&mut self, p: Point) -> Result<(Vec<DyadicSquare>, bool)> {
        let mut out = Vec::new();
        let mut in_unresolved = false;
        if !self.domain.contains_point(p) {
            return Ok((out, false));
        }
        let mut stack = vec![self.domain];
        while let Some(s) = stack.pop() {
            match self.state(s)? {
                CellState::Accepted(_) => out.push(s),
                CellState::Unresolved(_) => in_unresolved = true,
                CellState::Split => {
                    stack.extend(s.children().into_iter().filter(|c| c.contains_point(p)));
                }
            }
        }
        out.sort();
        Ok((out, in_unresolved))
    }

    /// Append the tiling squares adjacent to the tiling square `s` to `out`.
    pub fn neighbors(&mut self, s: DyadicSquare, out: &mut Vec<DyadicSquare>) -> Result<NeighborScan> {
        let mut scan = NeighborScan::default();
        // (dx, dy, children of the neighbor that face s)
        const SIDES: [(i64, i64, [u8; 2]); 4] = [(1, 0, [0, 2]), (-1, 0, [1, 3]), (0, 1, [0, 1]), (0, -1, [2, 3])];
        for (dx, dy, facing) in SIDES {
            let e = DyadicSquare::new(s.level, s.ix + dx, s.iy + dy);
            match self.locate(e)? {
                Located::Outside => scan.touches_boundary = true,
                Located::Leaf(a) => out.push(a),
                Located::Unresolved(_) => scan.touches_unresolved = true,
                Located::Split => {
                    let mut stack = vec![e];
                    while let Some(t) = stack.pop() {
                        for k in facing {
                            let c = t.child(k);
                            match self.state(c)? {
                                CellState::Accepted(_) => out.push(c),
                                CellState::Unresolved(_) => scan.touches_unresolved = true,
                                CellState::Split => stack.push(c),
                            }
                        }
                    }
                }
            }
        }
        Ok(scan)
    }

    /// Require that `s` is a tiling square.
    pub fn expect_leaf(&mut self, s: DyadicSquare) -> Result<f64> {
        match self.cell_state(s)? {
            Some(CellState::Accepted(m)) => Ok(m),
            _ => Err(Error::domain(format!("{s} is not a square of the tiling"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{with_log_singularity, ConstantField};
    use crate::tiling::subdivide;

    #[test]
    fn agrees_with_eager_subdivision() {
        let params = Params::from_q(1.0).unwrap();
        let field = with_log_singularity(ConstantField::zero(), 1.5, Point::new(0.3, 0.6)).unwrap();
        let eager = subdivide(DyadicSquare::unit(), 0.05, &field, &params, 9).unwrap();
        let mut lazy = LazyTiling::new(DyadicSquare::unit(), 0.05, &field, &params, 9).unwrap();
        for c in &eager.squares {
            assert_eq!(lazy.locate(c.square).unwrap(), Located::Leaf(c.square));
            for k in 0..4 {
                assert_eq!(lazy.locate(c.square.child(k)).unwrap(), Located::Leaf(c.square));
            }
        }
        for c in &eager.unresolved {
            assert_eq!(lazy.locate(c.square).unwrap(), Located::Unresolved(c.square));
        }
    }

    #[test]
    fn uniform_neighbors() {
        let params = Params::from_q(1.0).unwrap();
        let mut lazy = LazyTiling::new(DyadicSquare::unit(), 0.3, ConstantField::zero(), &params, 8).unwrap();
        let mut out = Vec::new();
        let scan = lazy.neighbors(DyadicSquare::new(2, 1, 1), &mut out).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(scan, NeighborScan::default());
        out.clear();
        let scan = lazy.neighbors(DyadicSquare::new(2, 0, 0), &mut out).unwrap();
        assert_eq!(out.len(), 2);
        assert!(scan.touches_boundary);
        let (leaves, unresolved) = lazy.leaves_containing(Point::new(0.5, 0.5)).unwrap();
        assert_eq!(leaves.len(), 4);
        assert!(!unresolved);
    }
}
