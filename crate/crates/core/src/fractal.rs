//! Deterministic test sets in the unit square and their dyadic coverings.
//!
//! Coordinates are exact rationals and every intersection test is decided in
//! integer arithmetic, with the closed-set convention: touching a square's
//! boundary counts as meeting it.
//!
//! Cantor sets keep the two outer intervals `[0, 1/k]` and `[1 − 1/k, 1]` of
//! ratio `1/k`. The intersection test uses the self-similarity of the set and
//! is exact; it never looks further than `level + 1` generations below a
//! square of the given level, so any construction depth `≥ level + 2` yields
//! the limit set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicSquare;
use crate::error::{Error, Result};
use crate::experiment::fit::{least_squares, LineFit};
use crate::tiling::Tiling;

/// An exact rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "String")]
pub struct Rational {
    num: i64,
    den: i64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Int(i64),
    Float(f64),
    Text(String),
}

impl TryFrom<RationalRepr> for Rational {
    type Error = Error;

    fn try_from(r: RationalRepr) -> Result<Self> {
        match r {
            RationalRepr::Int(n) => Ok(Rational::integer(n)),
            RationalRepr::Float(x) => Rational::from_f64(x),
            RationalRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Rational> for String {
    fn from(r: Rational) -> String {
        r.to_string()
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::config("rational with zero denominator"));
        }
        let g = gcd(num, den).max(1);
        let s = den.signum();
        Ok(Self { num: s * num / g, den: s * den / g })
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    /// The exact value of a finite float whose binary expansion fits in 62 bits.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::config(format!("{x} is not a finite number")));
        }
        for k in 0..62 {
            let scaled = x * (k as f64).exp2();
            if scaled.fract() == 0.0 {
                if scaled.abs() >= 4.0e18 {
                    break;
                }
                return Rational::new(scaled as i64, 1i64 << k);
            }
        }
        Err(Error::config(format!("{x} has no exact short rational form")))
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn in_unit(self) -> bool {
        self.num >= 0 && self.num <= self.den
    }

    /// `lo/d ≤ self ≤ hi/d`.
    fn within(self, lo: i128, hi: i128, d: i128) -> bool {
        let (p, q) = (self.num as i128, self.den as i128);
        lo * q <= p * d && p * d <= hi * q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("cannot read {s:?} as a rational"));
        match s.split_once('/') {
            Some((p, q)) => Rational::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => match s.trim().parse::<i64>() {
                Ok(n) => Ok(Rational::integer(n)),
                Err(_) => Rational::from_f64(s.trim().parse().map_err(|_| bad())?),
            },
        }
    }
}

/// A closed subset of the unit square, independent of any field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FractalSet {
    Point { x: Rational, y: Rational },
    /// `[x0, x1] × {y}`.
    HorizontalSegment { y: Rational, x0: Rational, x1: Rational },
    /// Boundary of `[x0, x0 + side] × [y0, y0 + side]`.
    SquareBoundary { x0: Rational, y0: Rational, side: Rational },
    /// `C_k × [0, 1]` with ratio `1/k`.
    CantorProduct { k: u32, depth: u32 },
    /// `C_k × C_k` with ratio `1/k`.
    CantorDust { k: u32, depth: u32 },
    /// All points `(a/q, b/q)` of the unit square with `1 ≤ q ≤ count`.
    RationalGrid { count: u32 },
}

/// A closed dyadic square as `[lo, hi] / den` on each axis.
#[derive(Debug, Clone, Copy)]
struct Box2 {
    x: (i128, i128),
    y: (i128, i128),
    den: i128,
}

impl Box2 {
    fn of(s: &DyadicSquare) -> Self {
        if s.level >= 0 {
            let (x, y) = (s.ix as i128, s.iy as i128);
            Box2 { x: (x, x + 1), y: (y, y + 1), den: 1i128 << s.level }
        } else {
            let sh = -s.level;
            let (x, y) = (s.ix as i128, s.iy as i128);
            Box2 { x: (x << sh, (x + 1) << sh), y: (y << sh, (y + 1) << sh), den: 1 }
        }
    }
}

/// Whether `[a, b] / den` meets the Cantor set of ratio `1/k`.
fn cantor_meets(k: i128, mut a: i128, mut b: i128, den: i128) -> bool {
    loop {
        if b < 0 || a > den {
            return false;
        }
        // both ends of every construction interval belong to the set
        if a <= 0 || b >= den {
            return true;
        }
        let (ka, kb) = (k * a, k * b);
        let right = (k - 1) * den;
        if (ka <= den && den <= kb) || (ka <= right && right <= kb) {
            return true;
        }
        if kb < den {
            (a, b) = (ka, kb);
        } else if ka > right {
            (a, b) = (ka - right, kb - right);
        } else {
            return false;
        }
    }
}

fn segment_meets(x: (i128, i128), y: (i128, i128), den: i128, sx: (Rational, Rational), sy: (Rational, Rational)) -> bool {
    // [sx.0, sx.1] × [sy.0, sy.1] against [x.0, x.1] × [y.0, y.1] / den
    let le = |r: Rational, v: i128| (r.num as i128) * den <= v * r.den as i128;
    let ge = |r: Rational, v: i128| (r.num as i128) * den >= v * r.den as i128;
    le(sx.0, x.1) && ge(sx.1, x.0) && le(sy.0, y.1) && ge(sy.1, y.0)
}

impl FractalSet {
    /// The horizontal unit segment at height `1/2`.
    pub fn unit_segment() -> Self {
        let half = Rational { num: 1, den: 2 };
        FractalSet::HorizontalSegment { y: half, x0: Rational::integer(0), x1: Rational::integer(1) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FractalSet::Point { .. } => "point",
            FractalSet::HorizontalSegment { .. } => "horizontal-segment",
            FractalSet::SquareBoundary { .. } => "square-boundary",
            FractalSet::CantorProduct { .. } => "cantor-product",
            FractalSet::CantorDust { .. } => "cantor-dust",
            FractalSet::RationalGrid { .. } => "rational-grid",
        }
    }

    /// Hausdorff (and, except for the rational grid at infinite count,
    /// Minkowski) dimension.
    pub fn nominal_dimension(&self) -> f64 {
        let cantor = |k: u32| std::f64::consts::LN_2 / (k as f64).ln();
        match *self {
            FractalSet::Point { .. } | FractalSet::RationalGrid { .. } => 0.0,
            FractalSet::HorizontalSegment { .. } | FractalSet::SquareBoundary { .. } => 1.0,
            FractalSet::CantorProduct { k, .. } => 1.0 + cantor(k),
            FractalSet::CantorDust { k, .. } => 2.0 * cantor(k),
        }
    }

    /// Check the parameters: coordinates inside the unit square, `k ≥ 3`,
    /// non-degenerate sides.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::config(format!("{}: {what}", self.name())));
        match *self {
            FractalSet::Point { x, y } => {
                if !(x.in_unit() && y.in_unit()) {
                    return bad("point outside the unit square");
                }
            }
            FractalSet::HorizontalSegment { y, x0, x1 } => {
                if !(y.in_unit() && x0.in_unit() && x1.in_unit()) || x0.to_f64() > x1.to_f64() {
                    return bad("segment must satisfy 0 ≤ x0 ≤ x1 ≤ 1 and 0 ≤ y ≤ 1");
                }
            }
            FractalSet::SquareBoundary { x0, y0, side } => {
                let far = |a: Rational| (a.num as i128) * side.den as i128 + (side.num as i128) * a.den as i128
                    <= (a.den as i128) * side.den as i128;
                if !(x0.in_unit() && y0.in_unit()) || side.num <= 0 || !far(x0) || !far(y0) {
                    return bad("square must have positive side and lie in the unit square");
                }
            }
            FractalSet::CantorProduct { k, .. } | FractalSet::CantorDust { k, .. } => {
                if !(3..=1024).contains(&k) {
                    return bad("ratio 1/k needs 3 ≤ k ≤ 1024");
                }
            }
            FractalSet::RationalGrid { count } => {
                if count == 0 || count > 4096 {
                    return bad("count must be in 1..=4096");
                }
            }
        }
        Ok(())
    }

    fn check_depth(&self, level: i32) -> Result<()> {
        if let FractalSet::CantorProduct { depth, .. } | FractalSet::CantorDust { depth, .. } = *self {
            if (depth as i64) < level as i64 + 2 {
                return Err(Error::config(format!(
                    "{} construction depth {depth} is too shallow for level {level}; need at least {}",
                    self.name(),
                    level as i64 + 2
                )));
            }
        }
        Ok(())
    }

    /// Whether the closed square `s` meets the set.
    pub fn intersects(&self, s: &DyadicSquare) -> Result<bool> {
        self.check_depth(s.level)?;
        let b = Box2::of(s);
        let d = b.den;
        Ok(match *self {
            FractalSet::Point { x, y } => x.within(b.x.0, b.x.1, d) && y.within(b.y.0, b.y.1, d),
            FractalSet::HorizontalSegment { y, x0, x1 } => segment_meets(b.x, b.y, d, (x0, x1), (y, y)),
            FractalSet::SquareBoundary { x0, y0, side } => {
                let add = |a: Rational| {
                    Rational::new(a.num * side.den + side.num * a.den, a.den * side.den).expect("nonzero denominator")
                };
                let (x1, y1) = (add(x0), add(y0));
                segment_meets(b.x, b.y, d, (x0, x1), (y0, y0))
                    || segment_meets(b.x, b.y, d, (x0, x1), (y1, y1))
                    || segment_meets(b.x, b.y, d, (x0, x0), (y0, y1))
                    || segment_meets(b.x, b.y, d, (x1, x1), (y0, y1))
            }
            FractalSet::CantorProduct { k, .. } => {
                cantor_meets(k as i128, b.x.0, b.x.1, d) && b.y.0 <= d && b.y.1 >= 0
            }
            FractalSet::CantorDust { k, .. } => {
                cantor_meets(k as i128, b.x.0, b.x.1, d) && cantor_meets(k as i128, b.y.0, b.y.1, d)
            }
            FractalSet::RationalGrid { count } => rational_grid_meets(count as i128, b),
        })
    }

    /// `N_0^δ(X)`: dyadic squares of side `2^{-level}` in the unit square meeting the set.
    pub fn euclidean_count(&self, level: u32) -> Result<u64> {
        let level = level as i32;
        self.check_depth(level)?;
        match *self {
            FractalSet::CantorProduct { k, .. } => Ok(cantor_count(k as i128, level) * (1u64 << level)),
            FractalSet::CantorDust { k, .. } => {
                let c = cantor_count(k as i128, level);
                Ok(c * c)
            }
            _ => {
                let mut n = 0;
                let mut stack = vec![DyadicSquare::unit()];
                while let Some(s) = stack.pop() {
                    if self.intersects(&s)? {
                        if s.level == level {
                            n += 1;
                        } else {
                            stack.extend(s.children());
                        }
                    }
                }
                Ok(n)
            }
        }
    }

    /// Slope of `log N_0^δ` against `level · log 2` over `levels`.
    pub fn box_dimension(&self, levels: std::ops::RangeInclusive<u32>) -> Result<LineFit> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for level in levels {
            xs.push(level as f64 * std::f64::consts::LN_2);
            ys.push((self.euclidean_count(level)? as f64).ln());
        }
        Ok(least_squares(&xs, &ys))
    }
}

/// Intervals `[i, i+1] / 2^level` of `[0, 1]` meeting the Cantor set.
fn cantor_count(k: i128, level: i32) -> u64 {
    fn go(k: i128, lo: i128, l: i32, level: i32) -> u64 {
        if !cantor_meets(k, lo, lo + 1, 1i128 << l) {
            0
        } else if l == level {
            1
        } else {
            go(k, 2 * lo, l + 1, level) + go(k, 2 * lo + 1, l + 1, level)
        }
    }
    go(k, 0, 0, level)
}

fn rational_grid_meets(count: i128, b: Box2) -> bool {
    // a point a/q lies in [lo, hi]/den iff ceil(lo q / den) ≤ floor(hi q / den)
    let axis = |(lo, hi): (i128, i128), q: i128| {
        let lo = lo.max(0);
        let hi = hi.min(b.den);
        lo <= hi && (lo * q + b.den - 1).div_euclid(b.den) <= (hi * q).div_euclid(b.den)
    };
    (1..=count).any(|q| axis(b.x, q) && axis(b.y, q))
}

/// `(count, unresolved_hits)`: tiling squares and unresolved cells meeting `x`.
pub fn quantum_count(x: &FractalSet, t: &Tiling) -> Result<(u64, u64)> {
    let mut count = 0;
    for c in &t.squares {
        if x.intersects(&c.square)? {
            count += 1;
        }
    }
    let mut hits = 0;
    for c in &t.unresolved {
        if x.intersects(&c.square)? {
            hits += 1;
        }
    }
    Ok((count, hits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn sq(level: i32, ix: i64, iy: i64) -> DyadicSquare {
        DyadicSquare::new(level, ix, iy)
    }

    /// Endpoints of the `2^depth` construction intervals, as integers over `k^depth`.
    fn cylinders(k: i64, depth: u32) -> Vec<(i64, i64)> {
        let mut v = vec![(0i64, 1i64)];
        for _ in 0..depth {
            v = v
                .into_iter()
                .flat_map(|(a, b)| {
                    let (a, b) = (a * k, b * k);
                    [(a, a + (b - a) / k), (b - (b - a) / k, b)]
                })
                .collect();
        }
        v
    }

    #[test]
    fn rational_parsing() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), r(1, 3));
        assert_eq!("2/4".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("0.25".parse::<Rational>().unwrap(), r(1, 4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!(Rational::from_f64(0.1).is_ok());
        let x: FractalSet = toml::from_str("kind = \"point\"\nx = \"1/3\"\ny = 0.5").unwrap();
        assert_eq!(x, FractalSet::Point { x: r(1, 3), y: r(1, 2) });
    }

    #[test]
    fn closed_set_convention() {
        let seg = FractalSet::HorizontalSegment { y: r(1, 2), x0: r(0, 1), x1: r(1, 1) };
        assert!(seg.intersects(&sq(2, 0, 1)).unwrap());
        assert!(!seg.intersects(&sq(2, 0, 0)).unwrap());
        let p = FractalSet::Point { x: r(1, 2), y: r(1, 2) };
        assert!(!p.intersects(&sq(2, 0, 0)).unwrap());
        assert!(p.intersects(&sq(1, 0, 0)).unwrap());
    }

    #[test]
    fn point_counts() {
        for (x, y, k) in [(r(1, 2), r(1, 2), 4), (r(1, 3), r(1, 2), 2), (r(1, 3), r(2, 7), 1), (r(0, 1), r(0, 1), 1)] {
            let p = FractalSet::Point { x, y };
            for level in 1..12 {
                assert_eq!(p.euclidean_count(level).unwrap(), k);
            }
        }
    }

    #[test]
    fn segment_counts() {
        for y in [r(1, 2), r(1, 3)] {
            let seg = FractalSet::HorizontalSegment { y, x0: r(0, 1), x1: r(1, 1) };
            for n in 0..12u32 {
                let c = seg.euclidean_count(n).unwrap();
                assert!(c >= 1 << n && c <= 2 * ((1 << n) + 1));
            }
        }
    }

    #[test]
    fn cantor_matches_cylinders() {
        // level-2 dyadic squares against depth-4 cylinders of C_3 × [0,1]
        let x = FractalSet::CantorProduct { k: 3, depth: 8 };
        let cyl = cylinders(3, 6);
        let k6 = 729i64;
        for ix in 0..4 {
            for iy in 0..4 {
                let s = sq(2, ix, iy);
                // [ix/4, (ix+1)/4] meets the depth-6 union iff some cylinder overlaps it
                let brute = cyl.iter().any(|&(a, b)| a * 4 <= (ix + 1) * k6 && b * 4 >= ix * k6);
                assert_eq!(x.intersects(&s).unwrap(), brute, "square {s}");
            }
        }
        let dust = FractalSet::CantorDust { k: 3, depth: 20 };
        let cyl = cylinders(3, 10);
        let k10 = 3i64.pow(10);
        for level in 1..=5 {
            let n = 1i64 << level;
            let hit = |i: i64| cyl.iter().any(|&(a, b)| a * n <= (i + 1) * k10 && b * n >= i * k10);
            let per_axis = (0..n).filter(|&i| hit(i)).count() as u64;
            assert_eq!(dust.euclidean_count(level as u32).unwrap(), per_axis * per_axis);
        }
    }

    #[test]
    fn cantor_points_on_edges() {
        // 1/4 lies in C_3, so every closed interval ending there meets it
        for level in 2..20 {
            let den = 1i128 << level;
            assert!(cantor_meets(3, den / 4 - 1, den / 4, den));
            assert!(cantor_meets(3, den / 4, den / 4 + 1, den));
        }
        assert!(!cantor_meets(3, 3, 4, 8)); // [3/8, 1/2] sits in the removed middle third
    }

    #[test]
    fn shallow_construction_is_rejected() {
        let x = FractalSet::CantorDust { k: 3, depth: 5 };
        assert!(x.intersects(&sq(3, 0, 0)).is_ok());
        assert!(matches!(x.intersects(&sq(4, 0, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_of_the_domain() {
        let b = FractalSet::SquareBoundary { x0: r(0, 1), y0: r(0, 1), side: r(1, 1) };
        assert_eq!(b.euclidean_count(2).unwrap(), 12);
        let inner = FractalSet::SquareBoundary { x0: r(1, 4), y0: r(1, 4), side: r(1, 2) };
        assert!(!inner.intersects(&sq(3, 3, 3)).unwrap());
        assert!(inner.intersects(&sq(3, 2, 3)).unwrap());
        assert!(FractalSet::SquareBoundary { x0: r(3, 4), y0: r(0, 1), side: r(1, 2) }.validate().is_err());
    }

    #[test]
    fn dimension_self_test() {
        let sets = [
            FractalSet::Point { x: r(1, 3), y: r(1, 2) },
            FractalSet::unit_segment(),
            FractalSet::SquareBoundary { x0: r(1, 5), y0: r(1, 7), side: r(1, 2) },
            FractalSet::CantorProduct { k: 3, depth: 16 },
            FractalSet::CantorDust { k: 3, depth: 16 },
            FractalSet::RationalGrid { count: 3 },
        ];
        for x in &sets {
            let fit = x.box_dimension(6..=14).unwrap();
            assert!((fit.slope - x.nominal_dimension()).abs() < 0.05, "{} slope {}", x.name(), fit.slope);
        }
    }

    #[test]
    fn cantor_dust_slope_levels_4_to_12() {
        let fit = FractalSet::CantorDust { k: 3, depth: 14 }.box_dimension(4..=12).unwrap();
        assert!((fit.slope - 1.2619).abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn dense_rational_grid_looks_two_dimensional() {
        let g = FractalSet::RationalGrid { count: 64 };
        let fit = g.box_dimension(1..=5).unwrap();
        assert!(fit.slope > 1.9, "{}", fit.slope);
        assert_eq!(g.nominal_dimension(), 0.0);
    }

    proptest! {
        #[test]
        fn children_refine_parent(level in 0i32..12, ix in 0i64..4096, iy in 0i64..4096, k in 3u32..8) {
            let n = 1i64 << level;
            let s = sq(level, ix % n, iy % n);
            for x in [FractalSet::CantorDust { k, depth: 20 }, FractalSet::RationalGrid { count: 5 }, FractalSet::unit_segment()] {
                let parent = x.intersects(&s).unwrap();
                let any_child = s.children().iter().any(|c| x.intersects(c).unwrap());
                prop_assert_eq!(parent, any_child);
            }
        }
    }
}
