//! Monte-Carlo campaigns over ε-ladders and replicas.
//!
//! Every replica draws its field from `derive_seed(base_seed, replica)` and
//! reuses that realization across the whole ladder. Replicas run in parallel
//! and are gathered in replica order, so results do not depend on the number
//! of worker threads.

pub mod fit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::field::{Backend, FieldRealization};
use crate::fractal::{quantum_count, FractalSet};
use crate::graph::{lazy_ball_profile, lazy_distance, GraphDistance};
use crate::params::{dimension_guess, watabiki_dimension, Params};
use crate::rng::derive_seed;
use crate::tiling::{subdivide_where, LazyTiling, DEFAULT_DEPTH_CAP};
use fit::least_squares;

/// Node budget of a single lazy graph search.
pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Thresholds `ε_0 > ε_1 > … ` and the replicas run at each of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub epsilons: Vec<f64>,
    pub replicas: u32,
    pub base_seed: u64,
}

impl Ladder {
    pub fn new(epsilons: Vec<f64>, replicas: u32, base_seed: u64) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::config("the ε ladder is empty"));
        }
        if replicas == 0 {
            return Err(Error::config("replicas must be at least 1"));
        }
        if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::config("every ε must be positive and finite"));
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("the ε ladder must be strictly decreasing"));
        }
        Ok(Self { epsilons, replicas, base_seed })
    }

    /// `ε_k = ε_0 2^{-k}` for `k = 0..=steps`.
    pub fn geometric(epsilon0: f64, steps: u32, replicas: u32, base_seed: u64) -> Result<Self> {
        Self::new(
            (0..=steps).map(|k| epsilon0 * (-(k as f64)).exp2()).collect(),
            replicas,
            base_seed,
        )
    }

    pub fn replica_seed(&self, replica: u32) -> u64 {
        derive_seed(self.base_seed, replica as u64)
    }
}

/// Shared settings of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub params: Params,
    pub backend: Backend,
    pub domain: DyadicSquare,
    pub depth_cap: i32,
    pub node_budget: usize,
}

impl Setup {
    pub fn new(params: Params, backend: Backend) -> Self {
        Self {
            params,
            backend,
            domain: DyadicSquare::unit(),
            depth_cap: DEFAULT_DEPTH_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn field(&self, seed: u64) -> Result<FieldRealization> {
        FieldRealization::for_domain(self.backend, self.domain, self.depth_cap, seed)
    }
}

/// A fitted exponent together with its censoring record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    /// `(log ε⁻¹, log value)` pairs.
    pub points: Vec<(f64, f64)>,
    /// Replicas excluded from the fit.
    pub censored: u32,
    pub replicas: u32,
}

impl ExponentFit {
    fn from_points(points: Vec<(f64, f64)>, censored: u32, replicas: u32) -> Self {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let line = if points.len() >= 2 {
            least_squares(&xs, &ys)
        } else {
            fit::LineFit { slope: f64::NAN, intercept: f64::NAN, stderr: f64::NAN, r2: f64::NAN }
        };
        Self { slope: line.slope, stderr: line.stderr, r2: line.r2, points, censored, replicas }
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.replicas.max(1) as f64
    }

    /// At least three points and at most half the replicas censored.
    pub fn reportable(&self) -> bool {
        self.points.len() >= 3 && 2 * self.censored <= self.replicas && self.slope.is_finite()
    }
}

/// The quantum exponent `Q − √(Q² − 2x)` and its phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KpzPrediction {
    Finite(f64),
    /// `x = Q²/2`; the value `Q` is the limit from below.
    AtBoundary(f64),
    /// `x > Q²/2`: the set meets infinitely many singularities.
    Infinite,
}

impl KpzPrediction {
    pub fn value(self) -> Option<f64> {
        match self {
            KpzPrediction::Finite(v) | KpzPrediction::AtBoundary(v) => Some(v),
            KpzPrediction::Infinite => None,
        }
    }
}

pub fn kpz_exponent_prediction(params: &Params, x: f64) -> Result<KpzPrediction> {
    if !(0.0..=2.0).contains(&x) {
        return Err(Error::domain(format!("dimension x = {x} outside [0, 2]")));
    }
    let q = params.q;
    let disc = q * q - 2.0 * x;
    Ok(if disc > 0.0 {
        // 2x / (Q + √(Q² − 2x)) avoids cancellation for small x
        KpzPrediction::Finite(2.0 * x / (q + disc.sqrt()))
    } else if disc == 0.0 {
        KpzPrediction::AtBoundary(q)
    } else {
        KpzPrediction::Infinite
    })
}

fn replicas<T: Send>(ladder: &Ladder, run: impl Fn(u32, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..ladder.replicas)
        .into_par_iter()
        .map(|r| run(r, ladder.replica_seed(r)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpzRecord {
    pub epsilon: f64,
    pub replica: u32,
    pub count: u64,
    pub unresolved_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpzOutcome {
    pub prediction: KpzPrediction,
    pub records: Vec<KpzRecord>,
    /// Fraction of replicas with `unresolved_hits > 0`, per ε.
    pub unresolved_fraction: Vec<f64>,
    /// Slope of `log mean N^ε` against `log ε⁻¹` over uncensored replicas.
    /// When `x > Q²/2` the meaningful statistic is `unresolved_fraction`; the
    /// fit is then only present if some replica met no unresolved cell.
    pub fit: Option<ExponentFit>,
}

fn kpz_records(x: &FractalSet, ladder: &Ladder, setup: &Setup) -> Result<Vec<Vec<KpzRecord>>> {
    x.validate()?;
    replicas(ladder, |replica, seed| {
        let field = setup.field(seed)?;
        ladder
            .epsilons
            .iter()
            .map(|&epsilon| {
                let mut failure = None;
                let t = subdivide_where(setup.domain, epsilon, &field, &setup.params, setup.depth_cap, |s| {
                    x.intersects(s).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        false
                    })
                })?;
                if let Some(e) = failure {
                    return Err(e);
                }
                let (count, unresolved_hits) = quantum_count(x, &t)?;
                Ok(KpzRecord { epsilon, replica, count, unresolved_hits })
            })
            .collect()
    })
}

/// Count the tiling squares meeting `x` along the ladder and fit the quantum exponent.
pub fn run_kpz(x: &FractalSet, ladder: &Ladder, setup: &Setup) -> Result<KpzOutcome> {
    let prediction = kpz_exponent_prediction(&setup.params, x.nominal_dimension())?;
    let per_replica = kpz_records(x, ladder, setup)?;
    let n = ladder.replicas as f64;
    let unresolved_fraction = (0..ladder.epsilons.len())
        .map(|k| per_replica.iter().filter(|r| r[k].unresolved_hits > 0).count() as f64 / n)
        .collect();
    let kept: Vec<&Vec<KpzRecord>> =
        per_replica.iter().filter(|r| r.iter().all(|c| c.unresolved_hits == 0)).collect();
    let fit = match prediction {
        KpzPrediction::Infinite if kept.is_empty() => None,
        _ => {
            if kept.is_empty() {
                let worst = per_replica.iter().flatten().map(|c| c.unresolved_hits).max().unwrap_or(0);
                return Err(Error::Experiment(format!(
                    "all {} replicas met unresolved cells (up to {worst} hits); raise the depth cap or ε",
                    ladder.replicas
                )));
            }
            let points = ladder
                .epsilons
                .iter()
                .enumerate()
                .map(|(k, eps)| {
                    let mean = kept.iter().map(|r| r[k].count as f64).sum::<f64>() / kept.len() as f64;
                    (-eps.ln(), mean.ln())
                })
                .collect();
            Some(ExponentFit::from_points(points, ladder.replicas - kept.len() as u32, ladder.replicas))
        }
    };
    Ok(KpzOutcome {
        prediction,
        records: per_replica.into_iter().flatten().collect(),
        unresolved_fraction,
        fit,
    })
}

/// `N^ε(X) ε^{Q − √(Q² − 2x)}` at one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePoint {
    pub epsilon: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub replicas: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOutcome {
    pub exponent: f64,
    pub records: Vec<KpzRecord>,
    pub series: Vec<MeasurePoint>,
    pub censored: u32,
}

impl MeasureOutcome {
    /// `max/min` of the mean rescaled count over the finer half of the ladder.
    pub fn upper_half_spread(&self) -> f64 {
        let tail = &self.series[self.series.len() / 2..];
        let hi = tail.iter().map(|p| p.mean).fold(f64::MIN, f64::max);
        let lo = tail.iter().map(|p| p.mean).fold(f64::MAX, f64::min);
        hi / lo
    }
}

/// Rescaled counts approximating the quantum measure of `x`.
pub fn run_measure(x: &FractalSet, ladder: &Ladder, setup: &Setup) -> Result<MeasureOutcome> {
    let exponent = kpz_exponent_prediction(&setup.params, x.nominal_dimension())?
        .value()
        .ok_or_else(|| {
            Error::domain(format!(
                "dimension {} exceeds Q²/2 = {}; the rescaled count has no finite exponent",
                x.nominal_dimension(),
                setup.params.kpz_threshold()
            ))
        })?;
    let per_replica = kpz_records(x, ladder, setup)?;
    let kept: Vec<&Vec<KpzRecord>> =
        per_replica.iter().filter(|r| r.iter().all(|c| c.unresolved_hits == 0)).collect();
    if kept.is_empty() {
        return Err(Error::Experiment("every replica met unresolved cells".into()));
    }
    let series = ladder
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            let vals: Vec<f64> = kept.iter().map(|r| r[k].count as f64 * epsilon.powf(exponent)).collect();
            MeasurePoint {
                epsilon,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                min: vals.iter().copied().fold(f64::MAX, f64::min),
                max: vals.iter().copied().fold(f64::MIN, f64::max),
                replicas: vals.len() as u32,
            }
        })
        .collect();
    Ok(MeasureOutcome {
        exponent,
        censored: ladder.replicas - kept.len() as u32,
        records: per_replica.into_iter().flatten().collect(),
        series,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub radius: u32,
    pub replica: u32,
    pub count: u64,
    pub truncated: bool,
}

/// Dimension predictions drawn next to `e(r)` when `c_M ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallReference {
    pub gamma_q_guess: f64,
    pub watabiki: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallOutcome {
    pub radii: Vec<u32>,
    pub records: Vec<BallRecord>,
    /// Median over replicas of `log #B_r / log r`, per radius (NaN when no
    /// replica reached that radius).
    pub median_exponent: Vec<f64>,
    /// Replicas whose center was uncovered or whose search ran out of budget
    /// before the largest radius.
    pub censored: u32,
    pub reference: Option<BallReference>,
}

impl BallOutcome {
    /// `e(r)` strictly increases along the last `k` radii.
    pub fn increasing_tail(&self, k: usize) -> bool {
        let tail = &self.median_exponent[self.median_exponent.len().saturating_sub(k)..];
        tail.iter().all(|v| v.is_finite()) && tail.windows(2).all(|w| w[1] > w[0])
    }

    /// `max − min` of `e(r)` along the last `k` radii.
    pub fn tail_range(&self, k: usize) -> f64 {
        let tail = &self.median_exponent[self.median_exponent.len().saturating_sub(k)..];
        let hi = tail.iter().copied().fold(f64::MIN, f64::max);
        let lo = tail.iter().copied().fold(f64::MAX, f64::min);
        hi - lo
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Ball volumes `#B_r(center)` at the radii `radii` (each `≥ 2`) in the
/// tiling at `epsilon`, one ball per replica of `ladder`.
pub fn run_ball_growth(
    center: Point,
    radii: &[u32],
    epsilon: f64,
    replicas_of: &Ladder,
    setup: &Setup,
) -> Result<BallOutcome> {
    if radii.is_empty() || radii.iter().any(|&r| r < 2) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("ball radii must be increasing and at least 2"));
    }
    let r_max = *radii.last().expect("non-empty");
    let per_replica = replicas(replicas_of, |replica, seed| {
        let field = setup.field(seed)?;
        let mut lt = LazyTiling::new(setup.domain, epsilon, field, &setup.params, setup.depth_cap)?;
        let profile = match lazy_ball_profile(&mut lt, center, r_max, setup.node_budget) {
            Ok(p) => p,
            Err(Error::Domain(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some(
            radii
                .iter()
                .filter(|&&r| (r as usize) < profile.counts.len())
                .map(|&radius| BallRecord {
                    radius,
                    replica,
                    count: profile.counts[radius as usize],
                    truncated: !profile.exact_at(radius),
                })
                .collect::<Vec<_>>(),
        ))
    })?;
    let censored = per_replica
        .iter()
        .filter(|r| r.as_ref().map_or(true, |v| v.len() < radii.len()))
        .count() as u32;
    let records: Vec<BallRecord> = per_replica.into_iter().flatten().flatten().collect();
    let median_exponent = radii
        .iter()
        .map(|&r| {
            let mut e: Vec<f64> = records
                .iter()
                .filter(|b| b.radius == r)
                .map(|b| (b.count as f64).ln() / (r as f64).ln())
                .collect();
            median(&mut e)
        })
        .collect();
    let reference = dimension_guess(&setup.params)
        .zip(watabiki_dimension(setup.params.c_m))
        .map(|(gamma_q_guess, watabiki)| BallReference { gamma_q_guess, watabiki });
    Ok(BallOutcome { radii: radii.to_vec(), records, median_exponent, censored, reference })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtpRecord {
    pub epsilon: f64,
    pub replica: u32,
    /// Absent when censored.
    pub distance: Option<u32>,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtpOutcome {
    pub records: Vec<PtpRecord>,
    /// Slope of `log mean D^ε(z, w)` against `log ε⁻¹`.
    pub fit: ExponentFit,
    /// `1/(2+Q)`.
    pub lower_exponent: f64,
}

impl PtpOutcome {
    /// The fitted exponent is finite and at least `1/(2+Q) − slack`.
    pub fn respects_lower_bound(&self, slack: f64) -> bool {
        self.fit.slope.is_finite() && self.fit.slope >= self.lower_exponent - slack
    }
}

/// `D^ε(z, w)` along the ladder. Distances are computed on lazily built
/// tilings in which unresolved cells are impassable, so each value bounds the
/// distance in the untruncated tiling from above.
pub fn run_ptp_distance(z: Point, w: Point, ladder: &Ladder, setup: &Setup) -> Result<PtpOutcome> {
    if z == w {
        return Err(Error::domain("the two points coincide"));
    }
    let per_replica = replicas(ladder, |replica, seed| {
        let field = setup.field(seed)?;
        // a replica with one censored rung is out of the fit; later rungs are skipped
        let mut out = Vec::with_capacity(ladder.epsilons.len());
        let mut censored = false;
        for &epsilon in &ladder.epsilons {
            let d = if censored {
                None
            } else {
                let mut lt = LazyTiling::new(setup.domain, epsilon, &field, &setup.params, setup.depth_cap)?;
                lazy_distance(&mut lt, z, w, setup.node_budget)?.and_then(GraphDistance::steps)
            };
            censored |= d.is_none();
            out.push(PtpRecord { epsilon, replica, distance: d, censored: d.is_none() });
        }
        Ok(out)
    })?;
    let kept: Vec<&Vec<PtpRecord>> = per_replica.iter().filter(|r| r.iter().all(|p| !p.censored)).collect();
    let points = if kept.is_empty() {
        Vec::new()
    } else {
        ladder
            .epsilons
            .iter()
            .enumerate()
            .map(|(k, eps)| {
                let mean = kept.iter().map(|r| r[k].distance.unwrap_or(0) as f64).sum::<f64>() / kept.len() as f64;
                (-eps.ln(), mean.max(1.0).ln())
            })
            .collect()
    };
    let fit = ExponentFit::from_points(points, ladder.replicas - kept.len() as u32, ladder.replicas);
    Ok(PtpOutcome {
        records: per_replica.into_iter().flatten().collect(),
        fit,
        lower_exponent: 1.0 / (2.0 + setup.params.q),
    })
}
