//! Gaussian field oracles.
//!
//! The sampled field is the white-noise approximation `ĥ_t(z)` of the
//! Gaussian free field: a centered Gaussian process indexed by a point `z`
//! and a scale `t ∈ (0, 1]` with
//!
//! ```text
//! Cov(ĥ_s(z), ĥ_t(w)) = ½ (E1(r²/2) − E1(r²/(2τ))),   r = |z − w| > 0, τ = max(s, t)²
//! Var(ĥ_t(z))         = log(1/t)
//! ```
//!
//! Tilings only ever ask for `ĥ_{|S|/2}(v_S)` at the center `v_S` of a dyadic
//! square `S`, so queries are keyed by [`FieldNode`]: an exact dyadic center and
//! a dyadic scale. Every backend answers the same node with the same value for
//! its whole lifetime.

pub mod check;
mod exact;
mod octave;
mod stub;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicPoint, DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::special::exp1;

pub use exact::{ExactField, DEFAULT_EXACT_CAP};
pub use octave::{OctaveField, DEFAULT_MAX_DEPTH, KERNEL_RADIUS, PATCH_SIDE};
pub use stub::{with_log_singularity, ConstantField, FnField, LogSingularity};

/// A query point of the field: exact dyadic center and scale `t = 2^-scale_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldNode {
    pub center: DyadicPoint,
    pub scale_exp: u32,
}

impl FieldNode {
    pub fn new(center: DyadicPoint, scale_exp: u32) -> Self {
        Self { center, scale_exp }
    }

    /// `(v_S, |S|/2)` for a square of level `>= -1`.
    pub fn for_square(s: &DyadicSquare) -> Result<Self> {
        if s.level < -1 {
            return Err(Error::domain(format!(
                "square {s} is larger than the unit scale (|S|/2 > 1)"
            )));
        }
        Ok(Self::new(s.center_exact(), (s.level + 1) as u32))
    }

    /// Node from floating coordinates; both the center and the scale must be dyadic.
    pub fn from_parts(center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::domain(format!("scale {scale} outside (0, 1]")));
        }
        let (m, e) = frexp(scale);
        if m != 0.5 {
            return Err(Error::domain(format!("scale {scale} is not a power of two")));
        }
        let scale_exp = (1 - e) as u32;
        let c = DyadicPoint::from_point(center, 60)
            .ok_or_else(|| Error::domain(format!("center {center:?} is not a dyadic point")))?;
        Ok(Self::new(c, scale_exp))
    }

    pub fn scale(&self) -> f64 {
        (-(self.scale_exp as f64)).exp2()
    }

    pub fn point(&self) -> Point {
        self.center.to_point()
    }
}

fn frexp(x: f64) -> (f64, i32) {
    let e = x.log2().floor() as i32 + 1;
    (x / (e as f64).exp2(), e)
}

/// Which sampler produced a realization, plus its seed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldId {
    pub backend: String,
    pub seed: u64,
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.backend, self.seed)
    }
}

/// A realization of `ĥ` restricted to the nodes it supports.
pub trait Field: Send + Sync {
    /// `ĥ_t(z)` at `node`. May be `+inf` (log-singularity sentinel).
    fn value(&self, node: &FieldNode) -> Result<f64>;

    fn id(&self) -> FieldId;

    /// Convenience: the value used for the mass of square `s`.
    fn square_value(&self, s: &DyadicSquare) -> Result<f64> {
        self.value(&FieldNode::for_square(s)?)
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        (**self).value(node)
    }
    fn id(&self) -> FieldId {
        (**self).id()
    }
}

impl<F: Field + ?Sized> Field for Box<F> {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        (**self).value(node)
    }
    fn id(&self) -> FieldId {
        (**self).id()
    }
}

/// Sampler selection for experiments and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Dense Cholesky over the full quadtree down to the depth cap.
    Exact,
    /// Lazy octave-layer synthesis.
    Octave,
    /// `ĥ ≡ 0`.
    Stub,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Octave => "octave",
            Backend::Stub => "stub",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "octave" => Ok(Backend::Octave),
            "stub" => Ok(Backend::Stub),
            _ => Err(Error::config(format!("unknown backend {s:?} (exact|octave|stub)"))),
        }
    }
}

/// A realization from any backend.
pub enum FieldRealization {
    Exact(ExactField),
    Octave(OctaveField),
    Constant(ConstantField),
    Shifted(Box<LogSingularity<FieldRealization>>),
}

impl FieldRealization {
    /// Realization of `backend` able to answer every square of `domain` down
    /// to level `depth`.
    pub fn for_domain(backend: Backend, domain: DyadicSquare, depth: i32, seed: u64) -> Result<Self> {
        Ok(match backend {
            Backend::Exact => FieldRealization::Exact(ExactField::for_quadtree(domain, depth, seed)?),
            Backend::Octave => {
                let depth = u32::try_from(depth).map_err(|_| Error::config("depth must be non-negative"))?;
                FieldRealization::Octave(OctaveField::new(domain, depth, seed)?)
            }
            Backend::Stub => FieldRealization::Constant(ConstantField::zero()),
        })
    }
}

impl Field for FieldRealization {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        match self {
            FieldRealization::Exact(f) => f.value(node),
            FieldRealization::Octave(f) => f.value(node),
            FieldRealization::Constant(f) => f.value(node),
            FieldRealization::Shifted(f) => f.value(node),
        }
    }

    fn id(&self) -> FieldId {
        match self {
            FieldRealization::Exact(f) => f.id(),
            FieldRealization::Octave(f) => f.id(),
            FieldRealization::Constant(f) => f.id(),
            FieldRealization::Shifted(f) => f.id(),
        }
    }
}

/// Whole-plane GFF covariance `log(|z|₊ |w|₊ / |z − w|)`, `|z|₊ = max(|z|, 1)`.
pub fn wp_gff_covariance(z: Point, w: Point) -> Result<f64> {
    let r = z.dist(w);
    if r == 0.0 {
        return Err(Error::domain("whole-plane covariance diverges at z = w"));
    }
    let zp = z.x.hypot(z.y).max(1.0);
    let wp = w.x.hypot(w.y).max(1.0);
    Ok((zp * wp / r).ln())
}

/// `Cov(ĥ_{t_a}(z_a), ĥ_{t_b}(z_b))` for arbitrary points and scales in `(0, 1]`.
pub fn wn_covariance_at(za: Point, ta: f64, zb: Point, tb: f64) -> Result<f64> {
    for t in [ta, tb] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain(format!("scale {t} outside (0, 1]")));
        }
    }
    let tau = ta.max(tb);
    let r2 = {
        let (dx, dy) = (za.x - zb.x, za.y - zb.y);
        dx * dx + dy * dy
    };
    Ok(wn_cov_r2(r2, tau))
}

/// Covariance from squared distance and the coarser scale.
pub(crate) fn wn_cov_r2(r2: f64, tau: f64) -> f64 {
    if tau >= 1.0 {
        return 0.0;
    }
    if r2 == 0.0 {
        return -tau.ln();
    }
    let a = 0.5 * r2;
    let b = a / (tau * tau);
    if b < 1e-8 {
        // both arguments tiny: E1(a) - E1(b) = ln(b/a) + (b - a) + O(b^2)
        return 0.5 * (-2.0 * tau.ln() + (b - a));
    }
    0.5 * (exp1(a) - exp1(b))
}

/// [`wn_covariance_at`] for two field nodes.
pub fn wn_covariance(a: &FieldNode, b: &FieldNode) -> f64 {
    let tau = a.scale().max(b.scale());
    let (pa, pb) = (a.point(), b.point());
    let (dx, dy) = (pa.x - pb.x, pa.y - pb.y);
    wn_cov_r2(dx * dx + dy * dy, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(x: f64, y: f64, t: f64) -> FieldNode {
        FieldNode::from_parts(Point::new(x, y), t).unwrap()
    }

    #[test]
    fn whole_plane_examples() {
        let v = wp_gff_covariance(Point::new(0.0, 0.0), Point::new(0.5, 0.0)).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = wp_gff_covariance(Point::new(2.0, 0.0), Point::new(0.0, 3.0)).unwrap();
        assert!((v - 0.509_284_790_497_286_7).abs() < 1e-12, "{v}");
        let v = wp_gff_covariance(Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        assert!((v + 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(wp_gff_covariance(Point::new(1.0, 1.0), Point::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn same_point_examples() {
        assert_eq!(wn_covariance(&node(0.5, 0.5, 1.0), &node(0.5, 0.5, 1.0)), 0.0);
        let a = node(0.5, 0.5, 0.25);
        let b = node(0.5, 0.5, 0.5);
        let inc = wn_covariance(&a, &a) - 2.0 * wn_covariance(&a, &b) + wn_covariance(&b, &b);
        assert!((inc - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_is_log_inverse_scale() {
        for k in 1..=20 {
            let t = (-(k as f64)).exp2();
            let n = node(0.25, 0.75, t);
            assert!((wn_covariance(&n, &n) - (1.0 / t).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn increments_are_uncorrelated_with_coarse_field() {
        // Cov(ĥ_t - ĥ_T, ĥ_T) = 0  <=>  Cov(ĥ_t, ĥ_T) = Var(ĥ_T)
        for (t, big) in [(0.125, 0.5), (2f64.powi(-10), 0.25), (0.5, 0.5)] {
            let a = node(0.3125, 0.5, t);
            let b = node(0.3125, 0.5, big);
            assert_eq!(wn_covariance(&a, &b), wn_covariance(&b, &b));
        }
    }

    #[test]
    fn decorrelates_monotonically() {
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let r = 0.01 * i as f64;
            let c = wn_covariance_at(Point::new(0.0, 0.0), 0.125, Point::new(r, 0.0), 0.25).unwrap();
            assert!(c < prev, "not decreasing at r = {r}");
            prev = c;
        }
    }

    #[test]
    fn small_separation_approaches_diagonal() {
        let c = wn_covariance_at(Point::new(0.0, 0.0), 0.5, Point::new(1e-9, 0.0), 0.5).unwrap();
        assert!((c - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_scales() {
        let p = Point::new(0.0, 0.0);
        assert!(wn_covariance_at(p, 0.0, p, 0.5).is_err());
        assert!(wn_covariance_at(p, 1.5, p, 0.5).is_err());
        assert!(FieldNode::from_parts(p, 0.3).is_err());
        assert!(FieldNode::for_square(&DyadicSquare::new(-2, 0, 0)).is_err());
    }
}
