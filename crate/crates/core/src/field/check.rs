//! Self-checks of the covariance kernel and the octave sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{wn_covariance_at, Field, FieldNode, OctaveField};
use crate::dyadic::{DyadicPoint, DyadicSquare, Point};
use crate::error::Result;
use crate::rng::derive_seed;

/// Outcome of one check: the worst deviation seen against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// Covariance by quadrature of the heat-kernel integral, in the variable `v = log s`.
pub fn covariance_by_quadrature(za: Point, ta: f64, zb: Point, tb: f64) -> f64 {
    let tau = ta.max(tb);
    if tau >= 1.0 {
        return 0.0;
    }
    let r2 = {
        let (dx, dy) = (za.x - zb.x, za.y - zb.y);
        dx * dx + dy * dy
    };
    let f = |v: f64| 0.5 * (-0.5 * r2 * (-v).exp()).exp();
    simpson(&f, 2.0 * tau.ln(), 0.0, 1e-13)
}

/// Diagonal against `log(1/t)` and random off-diagonal pairs against quadrature.
pub fn covariance_check(seed: u64, pairs: usize) -> Result<Vec<CheckLine>> {
    let mut diag: f64 = 0.0;
    for n in 1..=20u32 {
        let t = (-(n as f64)).exp2();
        let z = Point::new(0.3, 0.7);
        diag = diag.max((wn_covariance_at(z, t, z, t)? - (1.0 / t).ln()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut off: f64 = 0.0;
    for _ in 0..pairs {
        let z = Point::new(rng.random(), rng.random());
        let w = Point::new(rng.random(), rng.random());
        let ta = (-(rng.random_range(1..16) as f64)).exp2();
        let tb = (-(rng.random_range(1..16) as f64)).exp2();
        let exact = wn_covariance_at(z, ta, w, tb)?;
        off = off.max((exact - covariance_by_quadrature(z, ta, w, tb)).abs());
    }
    Ok(vec![
        CheckLine { name: "covariance diagonal vs log(1/t)".into(), worst: diag, tolerance: 1e-10 },
        CheckLine { name: "covariance off-diagonal vs quadrature".into(), worst: off, tolerance: 1e-8 },
    ])
}

/// Empirical single-point variance of the octave sampler at each level,
/// relative to `level log 2`. Returns the worst relative error.
pub fn octave_variance_check(seed: u64, replicas: u32, levels: std::ops::RangeInclusive<u32>) -> Result<CheckLine> {
    let levels: Vec<u32> = levels.collect();
    let max_level = levels.iter().copied().max().unwrap_or(0);
    let mut sum2 = vec![0.0; levels.len()];
    for r in 0..replicas {
        let f = OctaveField::new(DyadicSquare::unit(), max_level, derive_seed(seed, r as u64))?;
        // a point off every coarse lattice, so interpolation is exercised
        let center = DyadicPoint::new(0x5555_5555 >> 2, 0x3333_3333 >> 2, 30);
        for (acc, &level) in sum2.iter_mut().zip(&levels) {
            let v = f.value(&FieldNode::new(center, level))?;
            *acc += v * v;
        }
    }
    let mut worst: f64 = 0.0;
    for (acc, &level) in sum2.iter().zip(&levels) {
        let var = acc / replicas as f64;
        let target = level as f64 * std::f64::consts::LN_2;
        worst = worst.max((var / target - 1.0).abs());
    }
    Ok(CheckLine { name: "octave single-point variance (relative)".into(), worst, tolerance: 0.1 })
}
