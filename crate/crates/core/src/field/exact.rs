//! Exact multivariate Gaussian sampling of `ĥ` on a finite node set.

use rustc_hash::FxHashMap;

use super::{wn_covariance, Field, FieldId, FieldNode};
use crate::dyadic::DyadicSquare;
use crate::error::{Error, Result};
use crate::rng::NormalStream;

/// Default limit on the number of distinct nodes.
pub const DEFAULT_EXACT_CAP: usize = 4096;

const JITTERS: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

/// Joint sample of `ĥ` at a fixed list of nodes, drawn through a Cholesky
/// factor of the covariance matrix.
#[derive(Debug, Clone)]
pub struct ExactField {
    seed: u64,
    values: FxHashMap<FieldNode, f64>,
}

impl ExactField {
    /// Sample with the default node cap.
    pub fn sample(nodes: &[FieldNode], seed: u64) -> Result<Self> {
        Self::sample_capped(nodes, seed, DEFAULT_EXACT_CAP)
    }

    pub fn sample_capped(nodes: &[FieldNode], seed: u64, cap: usize) -> Result<Self> {
        let mut order = Vec::with_capacity(nodes.len());
        let mut seen = FxHashMap::default();
        for n in nodes {
            if seen.insert(*n, ()).is_none() {
                order.push(*n);
            }
        }
        if order.len() > cap {
            return Err(Error::Capacity(format!(
                "{} nodes exceed the exact-backend cap of {cap}; use the octave backend",
                order.len()
            )));
        }

        // Scale-1 nodes are identically zero and drop out of the factorization.
        let mut values = FxHashMap::default();
        let live: Vec<FieldNode> = order
            .iter()
            .copied()
            .filter(|n| {
                if n.scale_exp == 0 {
                    values.insert(*n, 0.0);
                    false
                } else {
                    true
                }
            })
            .collect();

        let n = live.len();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let c = wn_covariance(&live[i], &live[j]);
                cov[i * n + j] = c;
                cov[j * n + i] = c;
            }
        }
        let chol = cholesky_with_jitter(&cov, n)?;

        let mut normals = NormalStream::new(seed);
        let z: Vec<f64> = (0..n).map(|_| normals.next_normal()).collect();
        for i in 0..n {
            let row = &chol[i * n..i * n + i + 1];
            let v: f64 = row.iter().zip(&z).map(|(l, z)| l * z).sum();
            values.insert(live[i], v);
        }
        Ok(Self { seed, values })
    }

    /// Sample every square center of the quadtree under `domain` down to
    /// `depth` (inclusive), which is what a tiling with that depth cap needs.
    pub fn for_quadtree(domain: DyadicSquare, depth: i32, seed: u64) -> Result<Self> {
        if depth < domain.level {
            return Err(Error::config("depth above the domain level"));
        }
        let levels = (depth - domain.level + 1) as u32;
        let count: u64 = (0..levels).map(|k| 4u64.saturating_pow(k)).fold(0, u64::saturating_add);
        if count > DEFAULT_EXACT_CAP as u64 {
            return Err(Error::Capacity(format!(
                "a depth-{depth} quadtree has {count} nodes, above the exact-backend cap \
                 of {DEFAULT_EXACT_CAP}; use the octave backend"
            )));
        }
        let mut nodes = Vec::with_capacity(count as usize);
        let mut frontier = vec![domain];
        while let Some(s) = frontier.pop() {
            nodes.push(FieldNode::for_square(&s)?);
            if s.level < depth {
                frontier.extend(s.children());
            }
        }
        nodes.sort();
        Self::sample(&nodes, seed)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Field for ExactField {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        self.values.get(node).copied().ok_or_else(|| {
            Error::domain(format!("node {node:?} is not part of this exact realization"))
        })
    }

    fn id(&self) -> FieldId {
        FieldId {
            backend: "exact".into(),
            seed: self.seed,
        }
    }
}

/// Lower Cholesky factor (row-major, full `n x n`), escalating diagonal jitter
/// from 0 to `1e-8` before giving up.
pub(crate) fn cholesky_with_jitter(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut last_minor = 0;
    for &jitter in &JITTERS {
        match cholesky(a, n, jitter) {
            Ok(l) => return Ok(l),
            Err(minor) => last_minor = minor,
        }
    }
    Err(Error::Numeric(format!(
        "covariance matrix is not positive definite: leading minor {} fails even with jitter {:e}",
        last_minor + 1,
        JITTERS[JITTERS.len() - 1]
    )))
}

fn cholesky(a: &[f64], n: usize, jitter: f64) -> std::result::Result<Vec<f64>, usize> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (li, lj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let dot: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
            if i == j {
                let d = a[i * n + i] + jitter - dot;
                if !(d > 0.0) {
                    return Err(i);
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - dot) / l[j * n + j];
            }
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Point;

    fn node(x: f64, y: f64, t: f64) -> FieldNode {
        FieldNode::from_parts(Point::new(x, y), t).unwrap()
    }

    #[test]
    fn empty_list() {
        let f = ExactField::sample(&[], 1).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn unit_scale_is_zero() {
        let n = node(0.5, 0.5, 1.0);
        let f = ExactField::sample(&[n], 9).unwrap();
        assert_eq!(f.value(&n).unwrap(), 0.0);
    }

    #[test]
    fn single_node_variance() {
        let n = node(0.5, 0.5, 1.0 / 16.0);
        let reps = 1000;
        let vals: Vec<f64> = (0..reps)
            .map(|s| ExactField::sample(&[n], s).unwrap().value(&n).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let target = 16f64.ln();
        assert!((var / target - 1.0).abs() < 0.15, "variance {var} vs {target}");
    }

    #[test]
    fn deterministic_and_consistent() {
        let nodes = [node(0.25, 0.25, 0.25), node(0.75, 0.25, 0.25), node(0.5, 0.5, 0.5)];
        let a = ExactField::sample(&nodes, 5).unwrap();
        let b = ExactField::sample(&nodes, 5).unwrap();
        for n in &nodes {
            assert_eq!(a.value(n).unwrap().to_bits(), b.value(n).unwrap().to_bits());
            assert_eq!(a.value(n).unwrap().to_bits(), a.value(n).unwrap().to_bits());
        }
        assert!(a.value(&node(0.125, 0.125, 0.125)).is_err());
    }

    #[test]
    fn duplicates_are_merged() {
        let n = node(0.5, 0.5, 0.25);
        let f = ExactField::sample(&[n, n, n], 3).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let nodes: Vec<FieldNode> = (0..10).map(|i| node(i as f64 / 16.0, 0.0, 0.5)).collect();
        assert!(matches!(ExactField::sample_capped(&nodes, 1, 5), Err(Error::Capacity(_))));
        assert!(matches!(
            ExactField::for_quadtree(DyadicSquare::unit(), 6, 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn indefinite_matrix_reports_minor() {
        let a = [1.0, 2.0, 2.0, 1.0];
        match cholesky_with_jitter(&a, 2) {
            Err(Error::Numeric(msg)) => assert!(msg.contains("minor 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quadtree_factorizes() {
        let f = ExactField::for_quadtree(DyadicSquare::unit(), 4, 17).unwrap();
        assert_eq!(f.len(), 1 + 4 + 16 + 64 + 256);
    }
}
