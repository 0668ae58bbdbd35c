//! Exponential integral `E1(x) = ∫_x^∞ e^{-u}/u du` for `x > 0`.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(x)` for `x > 0`, absolute error below `1e-12` for `x < 1` and relative
/// error below `1e-14` for `x >= 1`.
///
/// Power series below 1, modified Lentz continued fraction above.
pub fn exp1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 is only defined here for positive arguments");
    if x < 1.0 {
        exp1_series(x)
    } else {
        exp1_cont_frac(x)
    }
}

fn exp1_series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn exp1_cont_frac(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}
