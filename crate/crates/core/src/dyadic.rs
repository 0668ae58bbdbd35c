//! Exact dyadic geometry: points, squares and boxes with power-of-two sides.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// The point `(x, y) * 2^-exp` with integer numerators, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint {
    x: i64,
    y: i64,
    exp: u32,
}

impl DyadicPoint {
    pub fn new(x: i64, y: i64, exp: u32) -> Self {
        let (mut x, mut y, mut exp) = (x, y, exp);
        while exp > 0 && x % 2 == 0 && y % 2 == 0 {
            x /= 2;
            y /= 2;
            exp -= 1;
        }
        Self { x, y, exp }
    }

    /// Exact dyadic point for `p`; `None` if a coordinate needs more than
    /// `max_exp` binary digits after the point.
    pub fn from_point(p: Point, max_exp: u32) -> Option<Self> {
        const LIMIT: f64 = 4.0e18;
        (0..=max_exp).find_map(|exp| {
            let scale = (exp as f64).exp2();
            let (sx, sy) = (p.x * scale, p.y * scale);
            if sx.abs() >= LIMIT || sy.abs() >= LIMIT || !sx.is_finite() || !sy.is_finite() {
                return Some(None);
            }
            (sx.fract() == 0.0 && sy.fract() == 0.0).then(|| Some(Self::new(sx as i64, sy as i64, exp)))
        })
        .flatten()
    }

    pub fn numerators(&self) -> (i64, i64) {
        (self.x, self.y)
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Coordinates scaled by `2^shift`, if they are integers.
    pub fn scaled(&self, shift: u32) -> Option<(i64, i64)> {
        if shift >= self.exp {
            let k = shift - self.exp;
            Some((self.x << k, self.y << k))
        } else {
            None
        }
    }

    pub fn to_point(&self) -> Point {
        let s = (-(self.exp as f64)).exp2();
        Point::new(self.x as f64 * s, self.y as f64 * s)
    }
}

/// The closed square `[ix 2^-level, (ix+1) 2^-level] x [iy 2^-level, (iy+1) 2^-level]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: i32,
    pub ix: i64,
    pub iy: i64,
}

impl fmt::Display for DyadicSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {}]", self.level, self.ix, self.iy)
    }
}

/// Highest level for which corners and centers are exact in `f64`.
pub const MAX_LEVEL: i32 = 50;

impl DyadicSquare {
    pub const fn new(level: i32, ix: i64, iy: i64) -> Self {
        Self { level, ix, iy }
    }

    /// `[0, 1]^2`.
    pub const fn unit() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn side(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn x0(&self) -> f64 {
        self.ix as f64 * self.side()
    }

    pub fn y0(&self) -> f64 {
        self.iy as f64 * self.side()
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        Point::new((self.ix as f64 + 0.5) * s, (self.iy as f64 + 0.5) * s)
    }

    /// Center as an exact dyadic point.
    pub fn center_exact(&self) -> DyadicPoint {
        // ((2 ix + 1), (2 iy + 1)) * 2^-(level + 1); negative levels rescale
        let e = self.level + 1;
        if e >= 0 {
            DyadicPoint::new(2 * self.ix + 1, 2 * self.iy + 1, e as u32)
        } else {
            let k = (-e) as u32;
            DyadicPoint::new((2 * self.ix + 1) << k, (2 * self.iy + 1) << k, 0)
        }
    }

    /// Child `k` in `0..4`: bit 0 selects the right half, bit 1 the upper half.
    pub fn child(&self, k: u8) -> Self {
        debug_assert!(k < 4);
        Self::new(
            self.level + 1,
            2 * self.ix + (k & 1) as i64,
            2 * self.iy + (k >> 1) as i64,
        )
    }

    pub fn children(&self) -> [Self; 4] {
        [self.child(0), self.child(1), self.child(2), self.child(3)]
    }

    pub fn parent(&self) -> Self {
        Self::new(self.level - 1, self.ix.div_euclid(2), self.iy.div_euclid(2))
    }

    /// The ancestor (or self) at `level <= self.level`.
    pub fn ancestor_at(&self, level: i32) -> Self {
        debug_assert!(level <= self.level);
        let k = (self.level - level) as u32;
        if k >= 63 {
            return Self::new(level, if self.ix < 0 { -1 } else { 0 }, if self.iy < 0 { -1 } else { 0 });
        }
        Self::new(level, self.ix >> k, self.iy >> k)
    }

    /// `other` is a subset of `self` (so `self` is an ancestor or equal).
    pub fn contains(&self, other: &DyadicSquare) -> bool {
        other.level >= self.level && other.ancestor_at(self.level) == *self
    }

    /// Closed-square membership.
    pub fn contains_point(&self, p: Point) -> bool {
        let s = self.side();
        let (x0, y0) = (self.ix as f64 * s, self.iy as f64 * s);
        p.x >= x0 && p.x <= x0 + s && p.y >= y0 && p.y <= y0 + s
    }

    /// Integer extent `[x0, x1] x [y0, y1]` at the finer `level`.
    pub fn extent_at(&self, level: i32) -> [i64; 4] {
        debug_assert!(level >= self.level);
        let k = (level - self.level) as u32;
        let (x0, y0) = (self.ix << k, self.iy << k);
        [x0, x0 + (1 << k), y0, y0 + (1 << k)]
    }

    /// The (up to four) squares of `level` whose closure contains `p`.
    pub fn squares_at_level_containing(level: i32, p: Point) -> Vec<DyadicSquare> {
        let scale = (level as f64).exp2();
        let (sx, sy) = (p.x * scale, p.y * scale);
        let xs = grid_candidates(sx);
        let ys = grid_candidates(sy);
        let mut out = Vec::with_capacity(4);
        for &ix in &xs {
            for &iy in &ys {
                out.push(DyadicSquare::new(level, ix, iy));
            }
        }
        out
    }

    /// Closed squares share a boundary segment of positive length.
    pub fn is_adjacent(&self, other: &DyadicSquare) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        let x_touch = a[1] == b[0] || b[1] == a[0];
        let y_touch = a[3] == b[2] || b[3] == a[2];
        let x_overlap = a[0].max(b[0]) < a[1].min(b[1]);
        let y_overlap = a[2].max(b[2]) < a[3].min(b[3]);
        (x_touch && y_overlap) || (y_touch && x_overlap)
    }

    /// Interiors intersect.
    pub fn overlaps(&self, other: &DyadicSquare) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        a[0].max(b[0]) < a[1].min(b[1]) && a[2].max(b[2]) < a[3].min(b[3])
    }

    /// Closed squares intersect (including corner contact).
    pub fn touches(&self, other: &DyadicSquare) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        a[0].max(b[0]) <= a[1].min(b[1]) && a[2].max(b[2]) <= a[3].min(b[3])
    }
}

fn grid_candidates(s: f64) -> Vec<i64> {
    let f = s.floor();
    if f == s {
        vec![f as i64 - 1, f as i64]
    } else {
        vec![f as i64]
    }
}
