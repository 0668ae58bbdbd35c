//! Structural checks on tilings, used by tests and `tile --verify`.

use rustc_hash::FxHashSet;

use super::{mass, Tiling};
use crate::dyadic::DyadicSquare;
use crate::error::Result;
use crate::field::Field;

/// Accepted, unresolved and pruned squares have disjoint interiors, lie in the
/// domain and cover it exactly (area counted in integers).
pub fn check_partition(t: &Tiling) -> std::result::Result<(), String> {
    let all: Vec<DyadicSquare> = t
        .squares
        .iter()
        .chain(&t.unresolved)
        .map(|c| c.square)
        .chain(t.pruned.iter().copied())
        .collect();
    let finest = all.iter().map(|s| s.level).max().unwrap_or(t.domain.level);
    let mut set = FxHashSet::default();
    let mut area: u128 = 0;
    for s in &all {
        if !t.domain.contains(s) {
            return Err(format!("{s} lies outside the domain {}", t.domain));
        }
        if !set.insert(*s) {
            return Err(format!("{s} appears twice"));
        }
        area += 1u128 << (2 * (finest - s.level));
    }
    for s in &all {
        let mut a = *s;
        while a.level > t.domain.level {
            a = a.parent();
            if set.contains(&a) {
                return Err(format!("{s} is nested inside {a}"));
            }
        }
    }
    let full = 1u128 << (2 * (finest - t.domain.level));
    if area != full {
        return Err(format!("covered area {area} != domain area {full} (units of level {finest})"));
    }
    Ok(())
}

/// Every accepted square has mass `≤ ε` and all its ancestors inside the
/// domain have mass `> ε`; every unresolved square sits at the cap with mass
/// `> ε`. Masses are recomputed from `field`.
pub fn check_maximality<F: Field + ?Sized>(t: &Tiling, field: &F) -> Result<std::result::Result<(), String>> {
    for c in &t.squares {
        let m = mass(&c.square, field, &t.params)?;
        if m.to_bits() != c.mass.to_bits() {
            return Ok(Err(format!("{}: stored mass {} but field gives {m}", c.square, c.mass)));
        }
        if !(m <= t.epsilon) {
            return Ok(Err(format!("{} accepted with mass {m} > ε", c.square)));
        }
        let mut a = c.square;
        while a.level > t.domain.level {
            a = a.parent();
            let ma = mass(&a, field, &t.params)?;
            if !(ma > t.epsilon) {
                return Ok(Err(format!("ancestor {a} of {} has mass {ma} ≤ ε", c.square)));
            }
        }
    }
    for c in &t.unresolved {
        if c.square.level != t.depth_cap || !(c.mass > t.epsilon) {
            return Ok(Err(format!("bad unresolved cell {} (mass {})", c.square, c.mass)));
        }
    }
    Ok(Ok(()))
}

/// Every accepted square of `fine` lies inside an accepted square of `coarse`
/// (or inside an unresolved/pruned cell of `coarse`).
pub fn check_refines(fine: &Tiling, coarse: &Tiling) -> std::result::Result<(), String> {
    let coarse_set: FxHashSet<DyadicSquare> = coarse
        .squares
        .iter()
        .chain(&coarse.unresolved)
        .map(|c| c.square)
        .chain(coarse.pruned.iter().copied())
        .collect();
    for c in &fine.squares {
        let mut a = c.square;
        loop {
            if coarse_set.contains(&a) {
                break;
            }
            if a.level <= coarse.domain.level {
                return Err(format!("{} is not inside any square of the coarser tiling", c.square));
            }
            a = a.parent();
        }
    }
    Ok(())
}
