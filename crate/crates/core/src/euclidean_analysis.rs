//! Euclidean symbol analysis on R^d.
//!
//! Dyadic partitions of unity, the fractional laplacian length
//! `ψ_ε(ξ) = c_{d,ε}|ξ|^{2ε}`, grid estimates of Mikhlin constants,
//! transform-based Sobolev norms, matrix local inversion and the
//! twisted homogeneous symbols `|ξ|^ε / |gξ|^ε` on `R^{n×n}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::group_geometry::GroupElement;
use crate::numerics::{binomial_f64, geomspace, linear_fit, seeded_rng, GaussLegendre, Neumaier};

type PointFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A symbol `M: R^d -> C` with optional annular support metadata.
#[derive(Clone)]
pub struct EuclideanSymbol {
    pub d: usize,
    f: Arc<PointFn>,
    /// `M` vanishes for `|ξ| < support_inner`.
    pub support_inner: Option<f64>,
    /// `M` vanishes for `|ξ| > support_outer`.
    pub support_outer: Option<f64>,
}

impl fmt::Debug for EuclideanSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EuclideanSymbol")
            .field("d", &self.d)
            .field("support_inner", &self.support_inner)
            .field("support_outer", &self.support_outer)
            .finish()
    }
}

impl EuclideanSymbol {
    pub fn new<F>(d: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        EuclideanSymbol {
            d,
            f: Arc::new(f),
            support_inner: None,
            support_outer: None,
        }
    }

    pub fn real<F>(d: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(d, move |x| Complex64::new(f(x), 0.0))
    }

    pub fn with_support(mut self, inner: Option<f64>, outer: Option<f64>) -> Self {
        self.support_inner = inner;
        self.support_outer = outer;
        self
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }

    /// `ξ ↦ M(λξ)`; support metadata is rescaled accordingly.
    pub fn dilate(&self, lambda: f64) -> Self {
        let f = self.f.clone();
        EuclideanSymbol {
            d: self.d,
            f: Arc::new(move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                f(&y)
            }),
            support_inner: self.support_inner.map(|r| r / lambda),
            support_outer: self.support_outer.map(|r| r / lambda),
        }
    }

    /// `M1 + M2`.
    pub fn sum(&self, other: &EuclideanSymbol) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        EuclideanSymbol::new(self.d, move |x| f(x) + g(x))
    }

    /// Pointwise product with a real radial weight.
    pub fn times_radial<W>(&self, w: W) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = self.f.clone();
        EuclideanSymbol {
            d: self.d,
            f: Arc::new(move |x: &[f64]| f(x) * w(euclid_norm(x))),
            support_inner: self.support_inner,
            support_outer: self.support_outer,
        }
    }
}

pub(crate) fn euclid_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, ∞)`, built from `e^{-1/t}`.
pub fn eta(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = f(2.0 - r);
    let b = f(r - 1.0);
    a / (a + b)
}

/// Littlewood–Paley partition `φ_j(ξ) = (η(2^{-j}ξ) - η(2^{1-j}ξ))^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicPartition {
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for DyadicPartition {
    fn default() -> Self {
        DyadicPartition {
            j_min: -60,
            j_max: 60,
        }
    }
}

impl DyadicPartition {
    /// `Σ_{j in range} φ_j(ξ)²`.
    pub fn sum_of_squares(&self, xi: &[f64]) -> f64 {
        let mut acc = Neumaier::default();
        for j in self.j_min..=self.j_max {
            let v = lp_partition_value(self, j, xi);
            acc.add(v * v);
        }
        acc.sum()
    }
}

fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

/// `φ_j(ξ)`.
pub fn lp_partition_value(_p: &DyadicPartition, j: i32, xi: &[f64]) -> f64 {
    let r = euclid_norm(xi);
    (eta(pow2(-j) * r) - eta(pow2(1 - j) * r)).max(0.0).sqrt()
}

/// `σ_j = (2N+1)^{-1} Σ_{|k-j| <= N} φ_k²`.
pub fn sigma_partition_value(p: &DyadicPartition, big_n: u32, j: i32, xi: &[f64]) -> Result<f64> {
    if big_n < 1 {
        return Err(Error::Input("N must be at least 1".into()));
    }
    let n = big_n as i32;
    let mut acc = Neumaier::default();
    for k in (j - n)..=(j + n) {
        let v = lp_partition_value(p, k, xi);
        acc.add(v * v);
    }
    Ok(acc.sum() / (2 * n + 1) as f64)
}

/// `π^{(d-1)/2} Γ((1+2ε)/2) / Γ((d+2ε)/2)`: integrating `|x|^{-d-2ε}` over
/// the hyperplanes orthogonal to `ξ`.
fn transverse_constant(d: usize, eps: f64) -> f64 {
    let df = d as f64;
    PI.powf(0.5 * (df - 1.0)) * gamma(0.5 + eps) / gamma(0.5 * (df + 2.0 * eps))
}

/// `∫_0^∞ (1 - cos 2πλt) t^{-1-2ε} dt` by quadrature.
///
/// The first period is mapped by `t = u^q`, `q = 1/(1-ε)`, which makes the
/// integrand vanish linearly at the origin. Later periods are integrated
/// one at a time, and the cosine tail beyond `M` periods uses the
/// two-term integration-by-parts expansion.
fn radial_cosine_integral(eps: f64, lambda: f64) -> f64 {
    let rule = GaussLegendre::new(24);
    let period = 1.0 / lambda;
    let a = 1.0 + 2.0 * eps;
    let q = 1.0 / (1.0 - eps);
    let w = 2.0 * PI * lambda;
    let head = rule.integrate_composite(0.0, period.powf(1.0 / q), 8, |u| {
        if u == 0.0 {
            return 0.0;
        }
        let t = u.powf(q);
        let one_minus_cos = 2.0 * (0.5 * w * t).sin().powi(2);
        one_minus_cos * t.powf(-a) * q * u.powf(q - 1.0)
    });
    // ∫_T^∞ t^{-a} dt with T = one period
    let power_tail = period.powf(1.0 - a) / (a - 1.0);
    let periods = 512;
    let mut cos_sum = Neumaier::default();
    for m in 1..periods {
        let lo = m as f64 * period;
        cos_sum.add(rule.integrate(lo, lo + period, |t| (w * t).cos() * t.powf(-a)));
    }
    let end = periods as f64 * period;
    // ∫_end^∞ cos(wt) t^{-a} dt, end a multiple of the period
    let remainder = a / (w * w) * end.powf(-a - 1.0)
        - a * (a + 1.0) * (a + 2.0) / w.powi(4) * end.powf(-a - 3.0);
    head + power_tail - cos_sum.sum() - remainder
}

/// `c_{d,ε}` with `ψ_ε(ξ) = c_{d,ε}|ξ|^{2ε}`.
pub fn frac_laplacian_constant(d: usize, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if d == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    Ok(4.0 * transverse_constant(d, eps) * radial_cosine_integral(eps, 1.0))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "eps = {eps} outside (0, 1); the constant blows up at the endpoints"
        )));
    }
    Ok(())
}

/// `(ψ_ε(ξ), c_{d,ε})`.
pub fn frac_laplacian_length(d: usize, eps: f64, xi: &[f64]) -> Result<(f64, f64)> {
    if xi.len() != d {
        return Err(Error::Input(format!("point has {} coordinates, d = {d}", xi.len())));
    }
    let c = frac_laplacian_constant(d, eps)?;
    let r = euclid_norm(xi);
    Ok((c * r.powf(2.0 * eps), c))
}

/// `ψ_ε(ξ)` by quadrature at the actual frequency `|ξ|`, without using
/// homogeneity; serves as a cross-check of [`frac_laplacian_length`].
pub fn frac_laplacian_direct(d: usize, eps: f64, xi: &[f64]) -> Result<f64> {
    check_eps(eps)?;
    let r = euclid_norm(xi);
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * transverse_constant(d, eps) * radial_cosine_integral(eps, r))
}

/// Sampling plan for grid-based estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    /// Log-spaced radii for Mikhlin sweeps, strictly increasing.
    pub radii: Vec<f64>,
    /// Directions per radius.
    pub angular: usize,
    /// Half-width `L` of the box `[-L, L)^d` for transform norms.
    pub box_half_width: f64,
    /// Points per axis for transform norms.
    pub box_points: usize,
    pub seed: u64,
}

impl GridSpec {
    /// Radii `2^{-12} .. 2^{12}` with `levels` shells.
    pub fn mikhlin(d: usize, levels: usize, angular: usize, seed: u64) -> Self {
        GridSpec {
            d,
            radii: geomspace(2f64.powi(-12), 2f64.powi(12), levels.max(2)),
            angular,
            box_half_width: 8.0,
            box_points: 256,
            seed,
        }
    }

    pub fn transform(d: usize, box_half_width: f64, box_points: usize) -> Self {
        GridSpec {
            d,
            radii: vec![1.0],
            angular: 1,
            box_half_width,
            box_points,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.angular == 0 || self.radii.is_empty() || self.box_points < 4 {
            return Err(Error::Input("grid counts must be positive".into()));
        }
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) || self.radii[0] <= 0.0 {
            return Err(Error::Input("grid radii must be positive and increasing".into()));
        }
        if !(self.box_half_width > 0.0) {
            return Err(Error::Input("box half-width must be positive".into()));
        }
        Ok(())
    }

    /// Unit directions: uniform angles for `d = 2`, otherwise the coordinate
    /// axes followed by seeded Gaussian directions.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        if d == 1 {
            return vec![vec![1.0], vec![-1.0]];
        }
        if d == 2 {
            let mut rng = seeded_rng(self.seed, 0x31);
            let offset: f64 = rng.random::<f64>() * 2.0 * PI / self.angular as f64;
            return (0..self.angular)
                .map(|i| {
                    let t = offset + 2.0 * PI * i as f64 / self.angular as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
        }
        let mut out = Vec::with_capacity(self.angular + d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            out.push(e);
        }
        let mut rng = seeded_rng(self.seed, 0x32);
        while out.len() < self.angular.max(d) + d {
            let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let r = euclid_norm(&v);
            if r > 1e-8 {
                out.push(v.iter().map(|x| x / r).collect());
            }
        }
        out
    }
}

/// Every multi-index in `N^d` with `|γ| <= order`, ordered by degree.
pub fn euclidean_multi_indices(d: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut current = vec![0usize; d];
        compositions(total, 0, &mut current, &mut out);
    }
    out
}

fn compositions(rest: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == current.len() {
        current[pos] = rest;
        out.push(current.clone());
        return;
    }
    for v in (0..=rest).rev() {
        current[pos] = v;
        compositions(rest - v, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Tensor central difference of multi-index `gamma` with step `h`.
fn partial_difference(m: &EuclideanSymbol, xi: &[f64], gamma: &[usize], h: f64) -> Complex64 {
    let mut stencils: Vec<Vec<(f64, f64)>> = Vec::with_capacity(gamma.len());
    for &g in gamma {
        let mut s = Vec::with_capacity(g + 1);
        for l in 0..=g {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            s.push(((g as f64 / 2.0 - l as f64) * h, sign * binomial_f64(g, l)));
        }
        stencils.push(s);
    }
    let total: usize = stencils.iter().map(|s| s.len()).product();
    let mut point = xi.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rem = flat;
        let mut weight = 1.0;
        for (i, s) in stencils.iter().enumerate() {
            let (off, w) = s[rem % s.len()];
            rem /= s.len();
            point[i] = xi[i] + off;
            weight *= w;
        }
        acc += m.eval(&point) * weight;
    }
    let order: usize = gamma.iter().sum();
    acc / h.powi(order as i32)
}

/// `∂^γ M(ξ)` by central differences with one Richardson level and a step
/// proportional to `|ξ|`.
pub fn euclidean_partial(m: &EuclideanSymbol, xi: &[f64], gamma: &[usize]) -> Complex64 {
    let order: usize = gamma.iter().sum();
    if order == 0 {
        return m.eval(xi);
    }
    let r = euclid_norm(xi);
    let h = 0.5 * r * f64::EPSILON.powf(1.0 / (order as f64 + 4.0));
    let coarse = partial_difference(m, xi, gamma, h);
    let fine = partial_difference(m, xi, gamma, 0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// Outcome of a Mikhlin sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MikhlinEstimate {
    /// Grid supremum of `|ξ|^{|γ|}|∂^γ M(ξ)|`; a lower estimate of the true sup.
    pub value: f64,
    /// Supremum per radius, aligned with `GridSpec::radii`.
    pub shell_sups: Vec<f64>,
    /// Shell suprema grow toward the outer or inner edge of the grid.
    pub unbounded: bool,
    /// Grid points with non-finite derivative estimates (excluded).
    pub singular_points: usize,
}

/// Mikhlin constant `sup |ξ|^{|γ|} |∂^γ M(ξ)|` over the grid, `|γ| <= order`.
pub fn mikhlin_constant(m: &EuclideanSymbol, order: usize, grid: &GridSpec) -> Result<MikhlinEstimate> {
    grid.validate()?;
    if grid.d != m.d {
        return Err(Error::Input("grid and symbol dimensions differ".into()));
    }
    let gammas = euclidean_multi_indices(m.d, order);
    let dirs = grid.directions();
    let mut shell_sups = Vec::with_capacity(grid.radii.len());
    let mut singular = 0;
    let mut xi = vec![0.0; m.d];
    for &r in &grid.radii {
        let mut sup: f64 = 0.0;
        for dir in &dirs {
            for (x, u) in xi.iter_mut().zip(dir) {
                *x = r * u;
            }
            for gamma in &gammas {
                let k: usize = gamma.iter().sum();
                let v = euclidean_partial(m, &xi, gamma).norm() * r.powi(k as i32);
                if v.is_finite() {
                    sup = sup.max(v);
                } else {
                    singular += 1;
                }
            }
        }
        shell_sups.push(sup);
    }
    let value = shell_sups.iter().cloned().fold(0.0, f64::max);
    Ok(MikhlinEstimate {
        value,
        unbounded: shells_unbounded(&grid.radii, &shell_sups),
        shell_sups,
        singular_points: singular,
    })
}

/// Log-log slope test on the outer and inner halves of the shell sups.
fn shells_unbounded(radii: &[f64], sups: &[f64]) -> bool {
    if radii.len() < 4 {
        return false;
    }
    let floor = 1e-300;
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ls: Vec<f64> = sups.iter().map(|s| s.max(floor).ln()).collect();
    let half = radii.len() / 2;
    let (outer, _) = linear_fit(&lr[half..], &ls[half..]);
    let (inner, _) = linear_fit(&lr[..=half], &ls[..=half]);
    let grows_out = outer > 0.05 && sups[sups.len() - 1] > 2.0 * sups[half];
    let grows_in = inner < -0.05 && sups[0] > 2.0 * sups[half];
    grows_out || grows_in
}

/// Uniform box grid and its discrete Fourier transform.
struct BoxTransform {
    d: usize,
    n: usize,
    spacing: f64,
    coeffs: Vec<Complex64>,
}

impl BoxTransform {
    /// Sample `f` on `[-L, L)^d` and transform; errors if `f` has mass on
    /// the outer layer of the box.
    fn new(d: usize, grid: &GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let n = grid.box_points;
        let total = n
            .checked_pow(d as u32)
            .filter(|t| *t <= 1 << 26)
            .ok_or_else(|| Error::Input("transform grid too large".into()))?;
        let spacing = 2.0 * grid.box_half_width / n as f64;
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        let mut x = vec![0.0; d];
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        for (flat, slot) in data.iter_mut().enumerate() {
            let mut rem = flat;
            let mut on_edge = false;
            for xi in x.iter_mut() {
                let idx = rem % n;
                rem /= n;
                on_edge |= idx == 0 || idx == n - 1;
                *xi = -grid.box_half_width + idx as f64 * spacing;
            }
            let v = f(&x);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numeric("symbol is not finite on the box grid".into()));
            }
            let a = v.norm();
            peak = peak.max(a);
            if on_edge {
                edge = edge.max(a);
            }
            *slot = v;
        }
        if peak > 0.0 && edge > 1e-8 * peak {
            return Err(Error::accuracy(
                "symbol leaks outside the transform box",
                edge / peak,
            ));
        }
        fft_nd(&mut data, d, n);
        Ok(BoxTransform {
            d,
            n,
            spacing,
            coeffs: data,
        })
    }

    /// `Σ_k w(|k|) |f̂(k)|² dk` with `f̂ = Δ^d · DFT` and `k = m/(NΔ)`.
    fn weighted_energy(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let n = self.n;
        let dk = 1.0 / (n as f64 * self.spacing);
        let scale = self.spacing.powi(self.d as i32);
        let mut acc = Neumaier::default();
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut rem = flat;
            let mut k2 = 0.0;
            for _ in 0..self.d {
                let idx = rem % n;
                rem /= n;
                let m = if idx < n / 2 { idx as f64 } else { idx as f64 - n as f64 };
                k2 += (m * dk) * (m * dk);
            }
            let fhat2 = (c * scale).norm_sqr();
            acc.add(weight(k2.sqrt()) * fhat2);
        }
        acc.sum() * dk.powi(self.d as i32)
    }
}

/// In-place d-dimensional FFT of an `n^d` array, first axis fastest.
fn fft_nd(data: &mut [Complex64], d: usize, n: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        for start in 0..data.len() / n {
            let outer = start / stride;
            let inner = start % stride;
            let base = outer * block + inner;
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[base + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v;
            }
        }
    }
}

fn check_support_in_box(m: &EuclideanSymbol, grid: &GridSpec) -> Result<()> {
    if let Some(outer) = m.support_outer {
        if outer >= grid.box_half_width {
            return Err(Error::accuracy(
                "declared support exceeds the transform box",
                outer / grid.box_half_width,
            ));
        }
    }
    Ok(())
}

/// `‖(1+|k|²)^{α/2} M̂‖_{L²}`.
#[allow(non_snake_case)]
pub fn sobolev_norm_H(m: &EuclideanSymbol, alpha: f64, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    if grid.d != m.d {
        return Err(Error::Input("grid and symbol dimensions differ".into()));
    }
    check_support_in_box(m, grid)?;
    let t = BoxTransform::new(m.d, grid, |x| m.eval(x))?;
    Ok(t.weighted_energy(|k| (1.0 + k * k).powf(alpha)).sqrt())
}

/// `‖|k|^{d/2+ε} (√ψ_ε M)^‖_{L²}` for `M` supported away from the origin.
#[allow(non_snake_case)]
pub fn sobolev_norm_W(m: &EuclideanSymbol, d: usize, eps: f64, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    if grid.d != d || m.d != d {
        return Err(Error::Input("grid and symbol dimensions differ".into()));
    }
    match m.support_inner {
        Some(r) if r > 0.0 => {}
        _ => {
            return Err(Error::Domain(
                "W-norm needs a symbol supported away from 0 (declare support_inner > 0)".into(),
            ))
        }
    }
    check_support_in_box(m, grid)?;
    let c = frac_laplacian_constant(d, eps)?;
    let sqrt_c = c.sqrt();
    let t = BoxTransform::new(d, grid, |x| {
        let r = euclid_norm(x);
        m.eval(x) * (sqrt_c * r.powf(eps))
    })?;
    let power = d as f64 + 2.0 * eps;
    Ok(t.weighted_energy(|k| k.powf(power)).sqrt())
}

/// `I(A) = (A + e)^{-1} - e`, refusing `A + e` with condition number above `1/tol`.
pub fn local_inversion(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Input("local inversion needs a square matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let shifted = a + &eye;
    let sv = shifted.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond * tol > 1.0 {
        return Err(Error::Domain(format!(
            "A + e is too close to singular (condition number {cond:.3e})"
        )));
    }
    let inv = shifted
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Domain("A + e is singular".into()))?;
    Ok(inv - eye)
}

/// The degree-0 symbol `M_g(ξ) = |ξ|^ε / |gξ|^ε` on `R^{n×n}` (row-major `ξ`).
pub fn twisted_symbol(g: &GroupElement, eps: f64) -> EuclideanSymbol {
    let n = g.n();
    let gm = g.matrix().clone();
    EuclideanSymbol::real(n * n, move |x| {
        let xi = DMatrix::from_row_slice(n, n, x);
        let num = xi.norm();
        let den = (&gm * &xi).norm();
        (num / den).powf(eps)
    })
}

/// `sup_{g ∈ Σ}` of the Mikhlin constant of [`twisted_symbol`].
pub fn twisted_homogeneous_mikhlin(
    sigma: &[GroupElement],
    eps: f64,
    order: usize,
    grid: &GridSpec,
) -> Result<f64> {
    let n = sigma
        .first()
        .map(|g| g.n())
        .ok_or_else(|| Error::Input("empty Σ sample".into()))?;
    if grid.d != n * n {
        return Err(Error::Input(format!("grid dimension must be n² = {}", n * n)));
    }
    let mut sup: f64 = 0.0;
    for g in sigma {
        if g.n() != n {
            return Err(Error::Input("Σ elements have mixed sizes".into()));
        }
        let est = mikhlin_constant(&twisted_symbol(g, eps), order, grid)?;
        sup = sup.max(est.value);
    }
    Ok(sup)
}
