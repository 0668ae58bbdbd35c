//! Coupling constants: matter central charge, background charge and, in the
//! phase `c_M <= 1`, the coupling `gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matter central charge at which `Q = 2`.
const CM_CRITICAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Matter central charge, `c_m < 25`.
    pub c_m: f64,
    /// Background charge, `Q > 0`, with `c_m = 25 - 6 Q^2`.
    pub q: f64,
    /// Coupling `gamma` in `(0, 2]`, present only when `c_m <= 1`.
    pub gamma: Option<f64>,
}

impl Params {
    /// Resolve parameters from the matter central charge.
    pub fn from_cm(c_m: f64) -> Result<Self> {
        if !c_m.is_finite() || c_m >= 25.0 {
            return Err(Error::domain(format!(
                "c_m = {c_m}: Q would be non-positive or zero (need c_m < 25)"
            )));
        }
        let q = ((25.0 - c_m) / 6.0).sqrt();
        Ok(Self {
            c_m,
            q,
            gamma: gamma_for(c_m, q),
        })
    }

    /// Resolve parameters from the background charge.
    pub fn from_q(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::domain(format!("Q = {q} must be positive")));
        }
        let c_m = 25.0 - 6.0 * q * q;
        Ok(Self {
            c_m,
            q,
            gamma: gamma_for(c_m, q),
        })
    }

    /// `true` in the phase `c_m in (1, 25)` where the tiling has singularities.
    pub fn is_singular_phase(&self) -> bool {
        self.q < 2.0
    }

    /// Largest Euclidean dimension with a finite quantum exponent, `Q^2 / 2`.
    pub fn kpz_threshold(&self) -> f64 {
        0.5 * self.q * self.q
    }
}

/// Smaller root of `gamma^2 - 2 Q gamma + 4 = 0`, i.e. `Q = 2/gamma + gamma/2`.
fn gamma_for(c_m: f64, q: f64) -> Option<f64> {
    if c_m > CM_CRITICAL {
        return None;
    }
    let disc = (q * q - 4.0).max(0.0);
    // 4 / (Q + sqrt(Q^2 - 4)) equals Q - sqrt(Q^2 - 4) without the cancellation.
    Some(4.0 / (q + disc.sqrt()))
}

/// Watabiki's dimension prediction, defined for `c_m <= 1`.
pub fn watabiki_dimension(c_m: f64) -> Option<f64> {
    if c_m > 1.0 {
        return None;
    }
    let (a, b, c) = ((25.0 - c_m).sqrt(), (49.0 - c_m).sqrt(), (1.0 - c_m).sqrt());
    Some(2.0 * (a + b) / (a + c))
}

/// The competing dimension guess `gamma Q + gamma / sqrt(6)`.
pub fn dimension_guess(params: &Params) -> Option<f64> {
    params
        .gamma
        .map(|g| g * params.q + g / 6f64.sqrt())
}
