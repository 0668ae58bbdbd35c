//! Maximal-square tilings `S^ε(U)`.
//!
//! A dyadic square `S ⊆ U` belongs to the tiling when `M(S) ≤ ε` and every
//! strict dyadic ancestor `S' ⊆ U` has `M(S') > ε`. Subdivision runs top-down
//! from `U`; a square still above `ε` at the depth cap is reported as
//! unresolved rather than refined further.

pub mod check;
mod lazy;

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSquare, Point, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::field::{Field, FieldId};
use crate::params::Params;

pub use lazy::{CellState, LazyTiling, Located, NeighborScan};

/// Default depth cap.
pub const DEFAULT_DEPTH_CAP: i32 = 24;

/// A square together with its mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub square: DyadicSquare,
    pub mass: f64,
}

/// `M(S) = exp(ĥ_{|S|/2}(v_S)) |S|^Q`; `+inf` when the field value is `+inf`.
pub fn mass<F: Field + ?Sized>(s: &DyadicSquare, field: &F, params: &Params) -> Result<f64> {
    let h = field.square_value(s)?;
    Ok(mass_from_value(h, s, params.q))
}

pub(crate) fn mass_from_value(h: f64, s: &DyadicSquare, q: f64) -> f64 {
    if h == f64::INFINITY {
        return f64::INFINITY;
    }
    // exp2 keeps 2^{-level Q} exact for integer exponents, so ties at ε stay ties
    h.exp() * (-(s.level as f64) * q).exp2()
}

/// The result of subdividing a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tiling {
    pub domain: DyadicSquare,
    pub epsilon: f64,
    pub params: Params,
    pub depth_cap: i32,
    /// Accepted squares, sorted by `(level, ix, iy)`.
    pub squares: Vec<Cell>,
    /// Squares at the depth cap whose mass still exceeds `ε`.
    pub unresolved: Vec<Cell>,
    /// Squares left unexplored by a restricted subdivision.
    pub pruned: Vec<DyadicSquare>,
    pub field_id: FieldId,
}

impl Tiling {
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Tiling square(s) whose closure contains `p`.
    pub fn squares_containing(&self, p: Point) -> Vec<DyadicSquare> {
        self.squares
            .iter()
            .map(|c| c.square)
            .filter(|s| s.contains_point(p))
            .collect()
    }

    /// Largest side length among accepted squares.
    pub fn max_side(&self) -> Result<f64> {
        max_side(self)
    }
}

/// Largest side length among accepted squares.
pub fn max_side(t: &Tiling) -> Result<f64> {
    t.squares
        .iter()
        .map(|c| c.square.level)
        .min()
        .map(|level| (-(level as f64)).exp2())
        .ok_or_else(|| Error::domain("tiling has no accepted squares"))
}

fn validate(u: &DyadicSquare, epsilon: f64, depth_cap: i32) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::config(format!("epsilon = {epsilon} must be positive and finite")));
    }
    if depth_cap <= u.level {
        return Err(Error::config(format!(
            "depth cap {depth_cap} must exceed the domain level {}",
            u.level
        )));
    }
    if depth_cap > MAX_LEVEL {
        return Err(Error::config(format!("depth cap {depth_cap} above {MAX_LEVEL}")));
    }
    Ok(())
}

/// The full tiling `S^ε(U)`, down to `depth_cap`.
pub fn subdivide<F: Field + ?Sized>(
    u: DyadicSquare,
    epsilon: f64,
    field: &F,
    params: &Params,
    depth_cap: i32,
) -> Result<Tiling> {
    subdivide_where(u, epsilon, field, params, depth_cap, |_| true)
}

/// Subdivision restricted to squares accepted by `keep`.
///
/// Squares rejected by `keep` are recorded in [`Tiling::pruned`] without
/// evaluating the field. Since a square and all its ancestors either meet a
/// set or not together, `keep = "intersects X"` yields exactly the tiling
/// squares meeting `X`.
pub fn subdivide_where<F, K>(
    u: DyadicSquare,
    epsilon: f64,
    field: &F,
    params: &Params,
    depth_cap: i32,
    mut keep: K,
) -> Result<Tiling>
where
    F: Field + ?Sized,
    K: FnMut(&DyadicSquare) -> bool,
{
    validate(&u, epsilon, depth_cap)?;
    let mut squares = Vec::new();
    let mut unresolved = Vec::new();
    let mut pruned = Vec::new();
    let mut stack = vec![u];
    while let Some(s) = stack.pop() {
        if !keep(&s) {
            pruned.push(s);
            continue;
        }
        let m = mass(&s, field, params)?;
        if m <= epsilon {
            squares.push(Cell { square: s, mass: m });
        } else if s.level >= depth_cap {
            unresolved.push(Cell { square: s, mass: m });
        } else {
            stack.extend(s.children().iter().rev());
        }
    }
    squares.sort_by_key(|c| c.square);
    unresolved.sort_by_key(|c| c.square);
    pruned.sort();
    Ok(Tiling {
        domain: u,
        epsilon,
        params: *params,
        depth_cap,
        squares,
        unresolved,
        pruned,
        field_id: field.id(),
    })
}

/// A largest square of the tiling, found level by level without building the
/// rest of it. Ties go to the smallest `(ix, iy)`; `None` if every square down
/// to the depth cap is split or unresolved.
pub fn largest_square<F: Field + ?Sized>(
    u: DyadicSquare,
    epsilon: f64,
    field: &F,
    params: &Params,
    depth_cap: i32,
) -> Result<Option<Cell>> {
    validate(&u, epsilon, depth_cap)?;
    let mut frontier = vec![u];
    while !frontier.is_empty() {
        let mut next = Vec::with_capacity(4 * frontier.len());
        let mut best: Option<Cell> = None;
        for s in frontier {
            let m = mass(&s, field, params)?;
            if m <= epsilon {
                if best.map_or(true, |b| s < b.square) {
                    best = Some(Cell { square: s, mass: m });
                }
            } else if s.level < depth_cap && best.is_none() {
                next.extend(s.children());
            }
        }
        if best.is_some() {
            return Ok(best);
        }
        frontier = next;
    }
    Ok(None)
}

/// Finite-scale thickness estimate at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThickPoint {
    /// Least-squares slope of `ĥ_{2^{-n-1}}(v_{S_n(z)})` against `n log 2`.
    pub alpha: f64,
    /// `z` sat on a dyadic grid line at some level; the square with smallest
    /// `(ix, iy)` was used there.
    pub on_grid_line: bool,
}

/// Thickness surrogate `lim h_δ(z) / log δ⁻¹` over the given square levels.
pub fn thick_point_estimate<F: Field + ?Sized>(
    z: Point,
    field: &F,
    levels: RangeInclusive<i32>,
) -> Result<ThickPoint> {
    if levels.is_empty() {
        return Err(Error::domain("empty level range"));
    }
    let mut on_grid_line = false;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in levels {
        let scale = (n as f64).exp2();
        let mut pick = |c: f64| {
            let s = c * scale;
            let f = s.floor();
            if f == s {
                on_grid_line = true;
                f as i64 - 1
            } else {
                f as i64
            }
        };
        let (ix, iy) = (pick(z.x), pick(z.y));
        let sq = DyadicSquare::new(n, ix, iy);
        xs.push(n as f64 * std::f64::consts::LN_2);
        ys.push(field.square_value(&sq)?);
    }
    let alpha = if xs.len() == 1 {
        if xs[0] == 0.0 {
            0.0
        } else {
            ys[0] / xs[0]
        }
    } else {
        crate::experiment::fit::least_squares(&xs, &ys).slope
    };
    Ok(ThickPoint { alpha, on_grid_line })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{with_log_singularity, ConstantField, FnField};

    fn q(q: f64) -> Params {
        Params::from_q(q).unwrap()
    }

    #[test]
    fn mass_examples() {
        let f = ConstantField::zero();
        assert_eq!(mass(&DyadicSquare::new(2, 0, 0), &f, &q(2.0)).unwrap(), 0.0625);
        assert_eq!(mass(&DyadicSquare::new(1, 1, 0), &f, &q(1.0)).unwrap(), 0.5);
        let log3 = FnField::new("log3", |n| if n.scale() == 0.125 { 3f64.ln() } else { 0.0 });
        let m = mass(&DyadicSquare::new(2, 1, 1), &log3, &q(2.0)).unwrap();
        assert!((m - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn uniform_stub_tiling() {
        let t = subdivide(DyadicSquare::unit(), 0.3, &ConstantField::zero(), &q(1.0), 10).unwrap();
        assert_eq!(t.len(), 16);
        assert!(t.squares.iter().all(|c| c.square.level == 2));
        assert!(t.unresolved.is_empty());
        assert_eq!(t.max_side().unwrap(), 0.25);
    }

    #[test]
    fn large_epsilon_keeps_domain() {
        let t = subdivide(DyadicSquare::unit(), 1.0, &ConstantField::zero(), &q(1.0), 10).unwrap();
        assert_eq!(t.squares, vec![Cell { square: DyadicSquare::unit(), mass: 1.0 }]);
        assert_eq!(t.max_side().unwrap(), 1.0);
    }

    #[test]
    fn tie_is_accepted() {
        let t = subdivide(DyadicSquare::unit(), 0.25, &ConstantField::zero(), &q(1.0), 10).unwrap();
        assert!(t.squares.iter().all(|c| c.square.level == 2));
    }

    #[test]
    fn config_errors() {
        let f = ConstantField::zero();
        assert!(matches!(subdivide(DyadicSquare::unit(), 0.3, &f, &q(1.0), 0), Err(Error::Config(_))));
        assert!(matches!(subdivide(DyadicSquare::unit(), 0.0, &f, &q(1.0), 4), Err(Error::Config(_))));
    }

    #[test]
    fn empty_tiling_has_no_max_side() {
        let f = with_log_singularity(ConstantField::zero(), 3.0, Point::new(0.5, 0.5)).unwrap();
        let t = subdivide(DyadicSquare::new(2, 1, 1), 1e-6, &f, &q(1.0), 3).unwrap();
        assert!(t.is_empty() && !t.unresolved.is_empty());
        assert!(t.max_side().is_err());
    }

    #[test]
    fn largest_square_matches_full_tiling() {
        let bumpy = FnField::new("bumpy", |n| {
            let p = n.point();
            2.0 * (7.0 * p.x).sin() * (5.0 * p.y).cos() + n.scale().ln() * 0.3
        });
        for (qq, eps) in [(1.0, 0.05), (2.0, 1e-3), (0.7, 0.2)] {
            let t = subdivide(DyadicSquare::unit(), eps, &bumpy, &q(qq), 10).unwrap();
            let best = largest_square(DyadicSquare::unit(), eps, &bumpy, &q(qq), 10).unwrap().unwrap();
            assert_eq!(best.square.side(), t.max_side().unwrap());
            assert_eq!(Some(best.square), t.squares.iter().filter(|c| c.square.level == best.square.level).map(|c| c.square).min());
        }
        let hole = with_log_singularity(ConstantField::zero(), 3.0, Point::new(0.5, 0.5)).unwrap();
        assert!(largest_square(DyadicSquare::new(2, 1, 1), 1e-6, &hole, &q(1.0), 3).unwrap().is_none());
    }

    #[test]
    fn thick_point_of_constant_is_zero() {
        let e = thick_point_estimate(Point::new(0.3, 0.7), &ConstantField::zero(), 2..=12).unwrap();
        assert_eq!(e.alpha, 0.0);
        assert!(!e.on_grid_line);
    }

    #[test]
    fn thick_point_recovers_alpha() {
        let z = Point::new(1.0 / 3.0, 1.0 / 3.0);
        let f = with_log_singularity(ConstantField::zero(), 1.2, z).unwrap();
        let e = thick_point_estimate(z, &f, 2..=20).unwrap();
        assert!((e.alpha - 1.2).abs() < 1e-6, "{}", e.alpha);
    }

    #[test]
    fn thick_point_flags_grid_lines() {
        let e = thick_point_estimate(Point::new(0.5, 0.3), &ConstantField::zero(), 1..=4).unwrap();
        assert!(e.on_grid_line);
        assert!(thick_point_estimate(Point::new(0.5, 0.3), &ConstantField::zero(), 4..=3).is_err());
    }
}
