//! Deterministic fields: constants, closures and the log-singular shift.

use super::{Field, FieldId, FieldNode};
use crate::dyadic::Point;
use crate::error::{Error, Result};

/// `ĥ ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField(pub f64);

impl ConstantField {
    pub fn zero() -> Self {
        Self(0.0)
    }
}

impl Field for ConstantField {
    fn value(&self, _: &FieldNode) -> Result<f64> {
        Ok(self.0)
    }

    fn id(&self) -> FieldId {
        FieldId {
            backend: if self.0 == 0.0 { "stub".into() } else { format!("const({})", self.0) },
            seed: 0,
        }
    }
}

type NodeFn = dyn Fn(&FieldNode) -> f64 + Send + Sync;

/// A field given by an arbitrary function of the node.
pub struct FnField {
    name: String,
    f: Box<NodeFn>,
}

impl FnField {
    pub fn new(name: impl Into<String>, f: impl Fn(&FieldNode) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
        }
    }
}

impl Field for FnField {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        Ok((self.f)(node))
    }

    fn id(&self) -> FieldId {
        FieldId {
            backend: self.name.clone(),
            seed: 0,
        }
    }
}

/// `base + alpha log(1/|v - z0|)`, evaluated at the node center `v`.
///
/// At `v = z0` the value is `+inf`, so the corresponding square is never
/// accepted by a tiling.
pub struct LogSingularity<F> {
    base: F,
    alpha: f64,
    z0: Point,
}

impl<F: Field> LogSingularity<F> {
    pub fn new(base: F, alpha: f64, z0: Point) -> Result<Self> {
        if !(0.0..4.0).contains(&alpha) {
            return Err(Error::domain(format!("alpha = {alpha} outside [0, 4)")));
        }
        Ok(Self { base, alpha, z0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z0(&self) -> Point {
        self.z0
    }
}

/// Wrap `base` with a log singularity of strength `alpha` at `z0`.
pub fn with_log_singularity<F: Field>(base: F, alpha: f64, z0: Point) -> Result<LogSingularity<F>> {
    LogSingularity::new(base, alpha, z0)
}

impl<F: Field> Field for LogSingularity<F> {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        let base = self.base.value(node)?;
        if self.alpha == 0.0 {
            return Ok(base);
        }
        let r = node.point().dist(self.z0);
        if r == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(base - self.alpha * r.ln())
    }

    fn id(&self) -> FieldId {
        let inner = self.base.id();
        FieldId {
            backend: format!(
                "{}+log(alpha={},z0=({},{}))",
                inner.backend, self.alpha, self.z0.x, self.z0.y
            ),
            seed: inner.seed,
        }
    }
}
