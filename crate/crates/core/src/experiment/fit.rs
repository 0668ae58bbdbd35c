//! Ordinary least squares for exponent fits.

use serde::{Deserialize, Serialize};

/// Fitted line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (NaN with fewer than three points).
    pub stderr: f64,
    pub r2: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        stderr,
        r2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = least_squares(&xs, &ys);
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.stderr.abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noisy_line_stderr() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 2.0, 1.0];
        let f = least_squares(&xs, &ys);
        assert!((f.slope - 0.5).abs() < 1e-15);
        // residuals -0.5, 1, -0.5 -> sse 1.5; stderr = sqrt(1.5 / 1 / 2)
        assert!((f.stderr - (0.75f64).sqrt()).abs() < 1e-15);
    }
}
