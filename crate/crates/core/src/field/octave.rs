//! Octave-layer synthesis of `ĥ`.
//!
//! `ĥ_{2^-j} = Σ_{n<j} Δ_n` with `Δ_n = ĥ_{2^{-n-1}} − ĥ_{2^{-n}}`. The layers
//! are independent stationary Gaussian fields. Layer `n` is sampled on the
//! lattice `2^{-n-2} Z²`, where its covariance reads
//!
//! ```text
//! C(k) = ½ (E1(k²/32) − E1(k²/8)),   k = lattice distance,
//! ```
//!
//! the same function for every `n`. One convolution kernel, the square root
//! of `C` taken through a circulant embedding, therefore serves all layers:
//! `Δ_n = kernel ⋆ ξ_n` with `ξ_n` addressable lattice white noise. The
//! lattice is synthesized lazily in square patches by FFT convolution and
//! cached; evicting a patch is harmless because regenerating it gives the
//! same numbers.
//!
//! Off-lattice centers (fine squares seen by coarse layers) are bilinearly
//! interpolated and rescaled so that every layer keeps variance `log 2`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rustc_hash::FxHashMap;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Field, FieldId, FieldNode};
use crate::dyadic::DyadicSquare;
use crate::error::{Error, Result};
use crate::rng::LatticeNoise;
use crate::special::exp1;

/// Default maximum layer depth.
pub const DEFAULT_MAX_DEPTH: u32 = 40;
/// Kernel half-width in lattice units; truncation loses ~1e-11 of the variance.
pub const KERNEL_RADIUS: usize = 12;
/// Side of the FFT block used per patch.
const BLOCK: usize = 64;
/// Lattice nodes per patch side.
pub const PATCH_SIDE: usize = BLOCK - 2 * KERNEL_RADIUS;
/// Torus on which the kernel is computed.
const EMBED: usize = 256;
/// Relative negative spectral mass tolerated in the circulant embedding.
const NEG_MASS_TOL: f64 = 1e-6;
/// Patches kept before the cache is flushed.
const DEFAULT_PATCH_BUDGET: usize = 1 << 17;

/// Layer covariance at squared lattice distance `k2`.
pub(crate) fn layer_covariance(k2: f64) -> f64 {
    if k2 == 0.0 {
        std::f64::consts::LN_2
    } else {
        0.5 * (exp1(k2 / 32.0) - exp1(k2 / 8.0))
    }
}

struct LayerKernel {
    /// Transform of the truncated kernel, in the transposed layout produced
    /// by [`fft2_forward`].
    spectrum: Vec<Complex<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Sum of squared kernel taps, the synthesized layer variance.
    variance: f64,
    /// `C(0), C(1), C(2)` for interpolation weights.
    corner_cov: [f64; 3],
}

fn kernel() -> Result<&'static LayerKernel> {
    static KERNEL: OnceLock<std::result::Result<LayerKernel, String>> = OnceLock::new();
    KERNEL
        .get_or_init(build_kernel)
        .as_ref()
        .map_err(|e| Error::Numeric(e.clone()))
}

fn build_kernel() -> std::result::Result<LayerKernel, String> {
    let mut planner = FftPlanner::<f64>::new();
    let big = planner.plan_fft_forward(EMBED);
    let big_inv = planner.plan_fft_inverse(EMBED);

    // periodized covariance on the EMBED torus
    let mut buf: Vec<Complex<f64>> = (0..EMBED * EMBED)
        .map(|idx| {
            let (i, j) = (idx / EMBED, idx % EMBED);
            let di = i.min(EMBED - i) as f64;
            let dj = j.min(EMBED - j) as f64;
            Complex::new(layer_covariance(di * di + dj * dj), 0.0)
        })
        .collect();
    fft2(&mut buf, EMBED, big.as_ref());

    let total: f64 = buf.iter().map(|c| c.re.abs()).sum();
    let negative: f64 = buf.iter().filter(|c| c.re < 0.0).map(|c| -c.re).sum();
    if negative > NEG_MASS_TOL * total {
        return Err(format!(
            "circulant embedding has negative spectral mass {:.3e} of {:.3e}; increase padding",
            negative, total
        ));
    }
    for c in buf.iter_mut() {
        *c = Complex::new(c.re.max(0.0).sqrt(), 0.0);
    }
    fft2(&mut buf, EMBED, big_inv.as_ref());
    let norm = 1.0 / (EMBED * EMBED) as f64;

    // truncate to |d| <= KERNEL_RADIUS and wrap into the patch block
    let fwd = planner.plan_fft_forward(BLOCK);
    let inv = planner.plan_fft_inverse(BLOCK);
    let r = KERNEL_RADIUS as isize;
    let mut block = vec![Complex::new(0.0, 0.0); BLOCK * BLOCK];
    let mut variance = 0.0;
    for di in -r..=r {
        for dj in -r..=r {
            let src = (di.rem_euclid(EMBED as isize) as usize) * EMBED + dj.rem_euclid(EMBED as isize) as usize;
            let tap = buf[src].re * norm;
            variance += tap * tap;
            let dst = (di.rem_euclid(BLOCK as isize) as usize) * BLOCK + dj.rem_euclid(BLOCK as isize) as usize;
            block[dst] = Complex::new(tap, 0.0);
        }
    }
    fft2_forward(&mut block, fwd.as_ref());

    Ok(LayerKernel {
        spectrum: block,
        fwd,
        inv,
        variance,
        corner_cov: [layer_covariance(0.0), layer_covariance(1.0), layer_covariance(2.0)],
    })
}

fn transpose(buf: &mut [Complex<f64>], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Row transforms, transpose, row transforms, transpose back.
fn fft2(buf: &mut [Complex<f64>], n: usize, fft: &dyn Fft<f64>) {
    fft.process(buf);
    transpose(buf, n);
    fft.process(buf);
    transpose(buf, n);
}

/// Forward 2D transform leaving the result transposed.
fn fft2_forward(buf: &mut [Complex<f64>], fft: &dyn Fft<f64>) {
    fft.process(buf);
    transpose(buf, BLOCK);
    fft.process(buf);
}

/// Inverse of [`fft2_forward`] (unnormalized).
fn fft2_inverse(buf: &mut [Complex<f64>], fft: &dyn Fft<f64>) {
    fft.process(buf);
    transpose(buf, BLOCK);
    fft.process(buf);
}

type PatchKey = (u32, i64, i64);

/// Lazily synthesized octave-layer realization over a dyadic window.
pub struct OctaveField {
    seed: u64,
    window: DyadicSquare,
    depth: u32,
    kernel: &'static LayerKernel,
    patches: Mutex<FxHashMap<PatchKey, Arc<[f32]>>>,
    patch_budget: usize,
    built: AtomicU64,
}

impl OctaveField {
    /// Realization answering nodes centered in `window` with square level up
    /// to `depth` (scales down to `2^-(depth+1)`).
    pub fn new(window: DyadicSquare, depth: u32, seed: u64) -> Result<Self> {
        if depth > DEFAULT_MAX_DEPTH {
            return Err(Error::Capacity(format!(
                "octave depth {depth} exceeds the maximum of {DEFAULT_MAX_DEPTH}"
            )));
        }
        Ok(Self {
            seed,
            window,
            depth,
            kernel: kernel()?,
            patches: Mutex::new(FxHashMap::default()),
            patch_budget: DEFAULT_PATCH_BUDGET,
            built: AtomicU64::new(0),
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn window(&self) -> DyadicSquare {
        self.window
    }

    /// Variance actually synthesized per layer (`log 2` up to kernel truncation).
    pub fn layer_variance() -> Result<f64> {
        Ok(kernel()?.variance)
    }

    /// Patches synthesized so far, counting rebuilds after cache flushes.
    pub fn patches_built(&self) -> u64 {
        self.built.load(Ordering::Relaxed)
    }

    /// Number of cached patches.
    pub fn cached_patches(&self) -> usize {
        self.patches.lock().unwrap().len()
    }

    /// `Δ_layer` at lattice node `(a, b)` of that layer.
    pub fn layer_value(&self, layer: u32, a: i64, b: i64) -> f64 {
        let p = PATCH_SIDE as i64;
        let (pa, pb) = (a.div_euclid(p), b.div_euclid(p));
        let patch = self.patch((layer, pa, pb));
        let (u, v) = ((a - pa * p) as usize, (b - pb * p) as usize);
        patch[u * PATCH_SIDE + v] as f64
    }

    fn patch(&self, key: PatchKey) -> Arc<[f32]> {
        if let Some(p) = self.patches.lock().unwrap().get(&key) {
            return Arc::clone(p);
        }
        let built = self.synthesize(key);
        self.built.fetch_add(1, Ordering::Relaxed);
        let mut cache = self.patches.lock().unwrap();
        if cache.len() >= self.patch_budget {
            cache.clear();
        }
        Arc::clone(cache.entry(key).or_insert(built))
    }

    fn synthesize(&self, (layer, pa, pb): PatchKey) -> Arc<[f32]> {
        let k = self.kernel;
        let r = KERNEL_RADIUS as i64;
        let (a0, b0) = (pa * PATCH_SIDE as i64 - r, pb * PATCH_SIDE as i64 - r);
        let mut noise = LatticeNoise::new(self.seed);
        let mut row = vec![0.0; BLOCK];
        let mut buf = vec![Complex::new(0.0, 0.0); BLOCK * BLOCK];
        for u in 0..BLOCK {
            noise.fill_row(layer, a0 + u as i64, b0, &mut row);
            for (dst, &x) in buf[u * BLOCK..(u + 1) * BLOCK].iter_mut().zip(&row) {
                *dst = Complex::new(x, 0.0);
            }
        }
        fft2_forward(&mut buf, k.fwd.as_ref());
        for (x, s) in buf.iter_mut().zip(&k.spectrum) {
            *x *= s;
        }
        fft2_inverse(&mut buf, k.inv.as_ref());
        let norm = 1.0 / (BLOCK * BLOCK) as f64;
        let mut out = Vec::with_capacity(PATCH_SIDE * PATCH_SIDE);
        for u in 0..PATCH_SIDE {
            let base = (u + KERNEL_RADIUS) * BLOCK + KERNEL_RADIUS;
            out.extend(buf[base..base + PATCH_SIDE].iter().map(|c| (c.re * norm) as f32));
        }
        out.into()
    }

    /// Bilinear interpolation at lattice coordinates `a + fa`, `b + fb`,
    /// rescaled to keep the layer variance.
    fn interpolate(&self, layer: u32, a: i64, fa: f64, b: i64, fb: f64) -> f64 {
        let p = PATCH_SIDE as i64;
        let (pa, pb) = (a.div_euclid(p), b.div_euclid(p));
        let (u, v) = ((a - pa * p) as usize, (b - pb * p) as usize);
        let corners = if u + 1 < PATCH_SIDE && v + 1 < PATCH_SIDE {
            let patch = self.patch((layer, pa, pb));
            let at = |du: usize, dv: usize| patch[(u + du) * PATCH_SIDE + v + dv] as f64;
            [at(0, 0), at(0, 1), at(1, 0), at(1, 1)]
        } else {
            [
                self.layer_value(layer, a, b),
                self.layer_value(layer, a, b + 1),
                self.layer_value(layer, a + 1, b),
                self.layer_value(layer, a + 1, b + 1),
            ]
        };
        let v = (1.0 - fa) * ((1.0 - fb) * corners[0] + fb * corners[1]) + fa * ((1.0 - fb) * corners[2] + fb * corners[3]);
        v * self.interpolation_gain(fa, fb)
    }

    fn interpolation_gain(&self, fa: f64, fb: f64) -> f64 {
        let c = self.kernel.corner_cov;
        // variance of the bilinear combination of the four corners
        let ax = (1.0 - fa) * (1.0 - fa) + fa * fa;
        let bx = 2.0 * fa * (1.0 - fa);
        let ay = (1.0 - fb) * (1.0 - fb) + fb * fb;
        let by = 2.0 * fb * (1.0 - fb);
        let var = ax * ay * c[0] + (ax * by + bx * ay) * c[1] + bx * by * c[2];
        (c[0] / var).sqrt()
    }
}

impl Field for OctaveField {
    fn value(&self, node: &FieldNode) -> Result<f64> {
        if node.scale_exp > self.depth + 1 {
            return Err(Error::Capacity(format!(
                "scale 2^-{} is finer than the synthesized depth {}",
                node.scale_exp, self.depth
            )));
        }
        if !self.window.contains_point(node.point()) {
            return Err(Error::domain(format!(
                "node {:?} lies outside the sampling window {}",
                node.point(),
                self.window
            )));
        }
        let (x, y) = node.center.numerators();
        let e = node.center.exp();
        let mut total = 0.0;
        for layer in 0..node.scale_exp {
            // lattice spacing 2^-(layer+2)
            let grid = layer + 2;
            if grid >= e {
                let k = grid - e;
                total += self.layer_value(layer, x << k, y << k);
            } else {
                let k = e - grid;
                let (a, b) = (x >> k, y >> k);
                let denom = (k as f64).exp2();
                let fa = (x - (a << k)) as f64 / denom;
                let fb = (y - (b << k)) as f64 / denom;
                total += self.interpolate(layer, a, fa, b, fb);
            }
        }
        Ok(total)
    }

    fn id(&self) -> FieldId {
        FieldId {
            backend: "octave".into(),
            seed: self.seed,
        }
    }
}
