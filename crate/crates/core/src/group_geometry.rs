//! Geometry of SL_n(R): Cartan decomposition, the length function and its
//! local/asymptotic distance, left-invariant Lie derivatives, Weyl chamber
//! integration, the Harish-Chandra function and distortion constants.
//!
//! Chamber coordinates are written in gaps `a_i = Z_i - Z_{i+1}`, so the
//! Lebesgue measure on the chamber is `da_1 ... da_{n-1}` and all K factors
//! are normalized to total mass one.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{linear_fit, seeded_rng, GaussLegendre, Neumaier};

/// An element of SL_n(R).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    m: DMatrix<f64>,
}

impl GroupElement {
    /// Validate `m` as an element of SL_n(R).
    ///
    /// The determinant tolerance is `1e-10` times the Hadamard bound
    /// (product of row norms), which is the natural scale of `det`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n < 2 || m.ncols() != n {
            return Err(Error::Input(format!(
                "expected a square matrix of size >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let det = m.determinant();
        let scale: f64 = m.row_iter().map(|r| r.norm()).product::<f64>().max(1.0);
        if (det - 1.0).abs() > 1e-10 * scale {
            return Err(Error::Domain(format!(
                "determinant {det:.12e} is not 1 (tolerance {:.1e})",
                1e-10 * scale
            )));
        }
        Ok(GroupElement { m })
    }

    /// Row-major constructor.
    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Input(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            m: DMatrix::identity(n, n),
        }
    }

    /// `diag(e^{z_1}, ..., e^{z_n})`; the mean of `z` is removed first.
    pub fn diag_exp(z: &[f64]) -> Self {
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let d: Vec<f64> = z.iter().map(|v| (v - mean).exp()).collect();
        GroupElement {
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)),
        }
    }

    /// `exp(X)` for a traceless `X`.
    pub fn exp_algebra(x: &DMatrix<f64>) -> Result<Self> {
        let tr = x.trace();
        if tr.abs() > 1e-10 * (1.0 + x.norm()) {
            return Err(Error::Domain(format!("algebra element has trace {tr:e}")));
        }
        Self::new(x.clone().exp())
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            m: &self.m * &other.m,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self
            .m
            .clone()
            .try_inverse()
            .expect("unit-determinant matrix is invertible");
        GroupElement { m: inv }
    }

    /// Row-major copy of the entries.
    pub fn to_row_vec(&self) -> Vec<f64> {
        self.m.transpose().as_slice().to_vec()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.m)
    }
}

/// `g = k1 · diag(e^{s_i}) · k2` with `s_1 >= ... >= s_n`, `sum s_i = 0`.
#[derive(Debug, Clone)]
pub struct CartanDecomposition {
    pub k1: DMatrix<f64>,
    pub exponents: Vec<f64>,
    pub k2: DMatrix<f64>,
}

impl CartanDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = nalgebra::DVector::from_iterator(
            self.exponents.len(),
            self.exponents.iter().map(|s| s.exp()),
        );
        &self.k1 * DMatrix::from_diagonal(&d) * &self.k2
    }
}

/// One-sided Jacobi SVD `m = u · diag(sv) · vt`.
///
/// Column rotations keep every singular value accurate relative to its own
/// size, which the bidiagonal QR route loses on elements far out in the group.
fn jacobi_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for k in 0..n {
                        let (x, y) = (mat[(k, i)], mat[(k, j)]);
                        mat[(k, i)] = c * x - s * y;
                        mat[(k, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            let sv: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
            if sv.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
                return Err(Error::Domain("matrix is singular".into()));
            }
            for (j, &x) in sv.iter().enumerate() {
                a.column_mut(j).unscale_mut(x);
            }
            return Ok((a, sv, v.transpose()));
        }
    }
    Err(Error::Numeric("Jacobi SVD did not converge".into()))
}

/// KAK factorization from the singular value decomposition.
pub fn kak_decompose(g: &GroupElement) -> Result<CartanDecomposition> {
    let m = g.matrix();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let n = g.n();
    let (u, sv, vt) = jacobi_svd(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let mut k1 = DMatrix::zeros(n, n);
    let mut k2 = DMatrix::zeros(n, n);
    let mut logs = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        k1.set_column(dst, &u.column(src));
        k2.set_row(dst, &vt.row(src));
        logs.push(sv[src].ln());
    }
    if k1.determinant() < 0.0 {
        for i in 0..n {
            k1[(i, n - 1)] = -k1[(i, n - 1)];
            k2[(n - 1, i)] = -k2[(n - 1, i)];
        }
    }
    let mean = logs.iter().sum::<f64>() / n as f64;
    if mean.abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "log-determinant {:.3e} is not 0",
            mean * n as f64
        )));
    }
    let exponents = logs.iter().map(|s| s - mean).collect();
    Ok(CartanDecomposition { k1, exponents, k2 })
}

/// `L(g) = max(‖g‖, ‖g^{-1}‖) = exp(max(s_1, -s_n))`.
#[allow(non_snake_case)]
pub fn length_L(g: &GroupElement) -> Result<f64> {
    let kak = kak_decompose(g)?;
    Ok(length_from_exponents(&kak.exponents))
}

pub(crate) fn length_from_exponents(s: &[f64]) -> f64 {
    let first = s[0];
    let last = s[s.len() - 1];
    first.max(-last).max(0.0).exp()
}

/// Normalized Hilbert–Schmidt norm `sqrt(tr(AᵀA)/n)`.
pub fn normalized_hs(a: &DMatrix<f64>) -> f64 {
    (a.norm_squared() / a.nrows() as f64).sqrt()
}

/// Distance to the identity: `max(min(|g - e|, 1), L(g) - 1)`.
pub fn bracevert(g: &GroupElement) -> Result<f64> {
    let n = g.n();
    let local = normalized_hs(&(g.matrix() - DMatrix::<f64>::identity(n, n)));
    Ok(local.min(1.0).max(length_L(g)? - 1.0))
}

/// Orthonormal basis of sl_n(R) under `⟨X,Y⟩ = tr(XᵀY)`: the off-diagonal
/// matrix units followed by the normalized diagonal elements
/// `(e_11 + ... + e_kk - k e_{k+1,k+1}) / sqrt(k(k+1))`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub n: usize,
    pub basis: Vec<DMatrix<f64>>,
}

impl LieBasis {
    pub fn new(n: usize) -> Self {
        let mut basis = Vec::with_capacity(n * n - 1);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut e = DMatrix::zeros(n, n);
                    e[(i, j)] = 1.0;
                    basis.push(e);
                }
            }
        }
        for k in 1..n {
            let mut h = DMatrix::zeros(n, n);
            let norm = ((k * (k + 1)) as f64).sqrt();
            for i in 0..k {
                h[(i, i)] = 1.0 / norm;
            }
            h[(k, k)] = -(k as f64) / norm;
            basis.push(h);
        }
        LieBasis { n, basis }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Ordered tuple `(j_1, ..., j_k)` of zero-based basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub indices: Vec<usize>,
}

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        MultiIndex { indices }
    }

    pub fn empty() -> Self {
        MultiIndex { indices: vec![] }
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// Every multi-index of exactly `order` over `dim` basis elements.
    pub fn all_of_order(dim: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        for _ in 0..order {
            let mut next = Vec::with_capacity(out.len() * dim);
            for m in &out {
                for j in 0..dim {
                    let mut idx = m.indices.clone();
                    idx.push(j);
                    next.push(MultiIndex::new(idx));
                }
            }
            out = next;
        }
        out
    }
}

type MatrixFn = dyn Fn(&DMatrix<f64>) -> Result<Complex64> + Send + Sync;

/// A symbol on the group with metadata.
///
/// `support_radius` is measured in `log L`, so the support is contained in
/// `{g : L(g) <= exp(support_radius)}`.
#[derive(Clone)]
pub struct SymbolHandle {
    f: Arc<MatrixFn>,
    pub name: String,
    pub radial: bool,
    pub support_radius: Option<f64>,
}

impl fmt::Debug for SymbolHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolHandle")
            .field("name", &self.name)
            .field("radial", &self.radial)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl SymbolHandle {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&DMatrix<f64>) -> Result<Complex64> + Send + Sync + 'static,
    {
        SymbolHandle {
            f: Arc::new(f),
            name: name.into(),
            radial: false,
            support_radius: None,
        }
    }

    /// Real-valued symbol from an infallible closure.
    pub fn real<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&DMatrix<f64>) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, move |g| Ok(Complex64::new(f(g), 0.0)))
    }

    pub fn constant(c: f64) -> Self {
        let mut s = Self::real(format!("const({c})"), move |_| c);
        s.radial = true;
        s
    }

    pub fn with_radial(mut self, radial: bool) -> Self {
        self.radial = radial;
        self
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn eval(&self, g: &GroupElement) -> Result<Complex64> {
        (self.f)(g.matrix())
    }

    pub fn eval_matrix(&self, g: &DMatrix<f64>) -> Result<Complex64> {
        let v = (self.f)(g)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numeric(format!("symbol {} is not finite", self.name)));
        }
        Ok(v)
    }

    /// `a·m1 + b·m2`.
    pub fn linear_combination(a: f64, m1: &SymbolHandle, b: f64, m2: &SymbolHandle) -> Self {
        let (f1, f2) = (m1.f.clone(), m2.f.clone());
        SymbolHandle {
            f: Arc::new(move |g| Ok(f1(g)? * a + f2(g)? * b)),
            name: format!("{a}*{}+{b}*{}", m1.name, m2.name),
            radial: m1.radial && m2.radial,
            support_radius: match (m1.support_radius, m2.support_radius) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
        }
    }

    /// Scalar multiple.
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        SymbolHandle {
            f: Arc::new(move |g| Ok(f(g)? * c)),
            name: format!("{c}*{}", self.name),
            radial: self.radial,
            support_radius: self.support_radius,
        }
    }
}

/// Largest order accepted by [`lie_derivative`] for a given `n`.
pub fn default_max_order(n: usize) -> usize {
    n * n / 2 + 1
}

/// Derivative value together with the Richardson error estimate.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeEstimate {
    pub value: Complex64,
    pub error: f64,
    pub step: f64,
}

/// Left-invariant derivative `∂_{X_{j_1}} ⋯ ∂_{X_{j_k}} m(g)`, i.e. the
/// mixed partial of `m(g exp(s_1 X_{j_1}) ⋯ exp(s_k X_{j_k}))` at `s = 0`.
///
/// `h` is a lower bound on the step; see [`lie_derivative_estimate`].
pub fn lie_derivative(
    m: &SymbolHandle,
    g: &GroupElement,
    gamma: &MultiIndex,
    basis: &LieBasis,
    h: f64,
) -> Result<Complex64> {
    Ok(lie_derivative_estimate(m, g, gamma, basis, h)?.value)
}

/// Mixed central differences over the `2^k` sign patterns with one
/// Richardson level, `(4 D_{h/2} - D_h) / 3`.
///
/// The step balances truncation against roundoff for order `k`:
/// `max(h, eps^{1/(k+4)})`, shrunk by `min(1, ⌊g⌋)` so that symbols
/// varying on the scale of `⌊g⌋` near the identity stay resolved.
pub fn lie_derivative_estimate(
    m: &SymbolHandle,
    g: &GroupElement,
    gamma: &MultiIndex,
    basis: &LieBasis,
    h: f64,
) -> Result<DerivativeEstimate> {
    let k = gamma.order();
    let max_order = default_max_order(basis.n);
    if k > max_order {
        return Err(Error::Domain(format!(
            "order {k} exceeds the maximum {max_order} for n = {}",
            basis.n
        )));
    }
    if let Some(&j) = gamma.indices.iter().find(|&&j| j >= basis.len()) {
        return Err(Error::Input(format!("basis index {j} out of range")));
    }
    if g.n() != basis.n {
        return Err(Error::Input("basis and group element sizes differ".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Input(format!("step must be positive, got {h}")));
    }
    if k == 0 {
        let v = m.eval_matrix(g.matrix())?;
        return Ok(DerivativeEstimate {
            value: v,
            error: 0.0,
            step: 0.0,
        });
    }
    let local = bracevert(g)?;
    let shrink = if local > 0.0 { local.min(1.0) } else { 1.0 };
    let step = h.max(f64::EPSILON.powf(1.0 / (k as f64 + 4.0))) * shrink;
    if step < 1e-12 {
        return Err(Error::Numeric(format!("step {step:e} underflows")));
    }
    let coarse = mixed_difference(m, g, gamma, basis, step)?;
    let fine = mixed_difference(m, g, gamma, basis, 0.5 * step)?;
    let value = (fine * 4.0 - coarse) / 3.0;
    Ok(DerivativeEstimate {
        value,
        error: (fine - coarse).norm() / 3.0,
        step,
    })
}

fn mixed_difference(
    m: &SymbolHandle,
    g: &GroupElement,
    gamma: &MultiIndex,
    basis: &LieBasis,
    h: f64,
) -> Result<Complex64> {
    let k = gamma.order();
    let mut cache: HashMap<(usize, bool), DMatrix<f64>> = HashMap::new();
    for &j in &gamma.indices {
        for sign in [false, true] {
            cache.entry((j, sign)).or_insert_with(|| {
                let s = if sign { -h } else { h };
                (&basis.basis[j] * s).exp()
            });
        }
    }
    let mut acc_re = Neumaier::default();
    let mut acc_im = Neumaier::default();
    for pattern in 0u32..(1u32 << k) {
        let mut prod = g.matrix().clone();
        let mut sign = 1.0;
        for (pos, &j) in gamma.indices.iter().enumerate() {
            let neg = pattern & (1 << pos) != 0;
            if neg {
                sign = -sign;
            }
            prod = &prod * &cache[&(j, neg)];
        }
        let v = m.eval_matrix(&prod)? * sign;
        acc_re.add(v.re);
        acc_im.add(v.im);
    }
    let denom = (2.0 * h).powi(k as i32);
    Ok(Complex64::new(acc_re.sum() / denom, acc_im.sum() / denom))
}

/// `prod_{j<k} sinh(Z_j - Z_k)` in gap coordinates.
pub fn weyl_density(gaps: &[f64]) -> f64 {
    let mut prod = 1.0;
    for j in 0..gaps.len() {
        let mut diff = 0.0;
        for gap in &gaps[j..] {
            diff += gap;
            prod *= diff.sinh();
        }
    }
    prod
}

/// Chamber point from gap coordinates (zero-sum).
pub fn exponents_from_gaps(gaps: &[f64]) -> Vec<f64> {
    let n = gaps.len() + 1;
    let mut z = vec![0.0; n];
    for i in 1..n {
        z[i] = z[i - 1] - gaps[i - 1];
    }
    let mean = z.iter().sum::<f64>() / n as f64;
    z.iter().map(|v| v - mean).collect()
}

/// Membership in `{max(Z_1, -Z_n) <= R}` in gap coordinates.
fn in_chamber_ball(gaps: &[f64], radius: f64) -> bool {
    let n = gaps.len() + 1;
    let nf = n as f64;
    let mut top = 0.0;
    let mut bottom = 0.0;
    for (i, a) in gaps.iter().enumerate() {
        let i1 = (i + 1) as f64;
        top += (nf - i1) * a;
        bottom += i1 * a;
    }
    top <= nf * radius && bottom <= nf * radius
}

/// Importance sampler for the chamber ball with density proportional to
/// `exp(tilt · ρ-weights · a)` on the bounding box.
#[derive(Debug, Clone)]
pub struct ChamberSampler {
    pub n: usize,
    pub radius: f64,
    rates: Vec<f64>,
    bounds: Vec<f64>,
}

impl ChamberSampler {
    pub fn new(n: usize, radius: f64, tilt: f64) -> Self {
        let nf = n as f64;
        let mut rates = Vec::with_capacity(n - 1);
        let mut bounds = Vec::with_capacity(n - 1);
        for i in 1..n {
            let w = (i * (n - i)) as f64;
            rates.push(tilt * w);
            let i_f = i as f64;
            bounds.push(nf * radius / (nf - i_f).max(i_f));
        }
        ChamberSampler {
            n,
            radius,
            rates,
            bounds,
        }
    }

    /// One draw: gap coordinates and the importance weight
    /// `weyl_density / proposal density` (zero outside the ball).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let mut gaps = Vec::with_capacity(self.n - 1);
        let mut inv_density = 1.0;
        for (&c, &b) in self.rates.iter().zip(&self.bounds) {
            let u: f64 = rng.random();
            if c * b < 1e-8 {
                gaps.push(u * b);
                inv_density *= b;
            } else {
                let tail = (-c * b).exp();
                let a = b + (u + (1.0 - u) * tail).ln() / c;
                let a = a.clamp(0.0, b);
                gaps.push(a);
                inv_density *= (1.0 - tail) / (c * (c * (a - b)).exp());
            }
        }
        if !in_chamber_ball(&gaps, self.radius) {
            return (gaps, 0.0);
        }
        let w = weyl_density(&gaps) * inv_density;
        (gaps, w)
    }
}

/// Haar measure of `B_R = {g : L(g) <= e^R}`.
///
/// `n = 2, 3` use Gauss–Legendre quadrature over the chamber polytope,
/// `n = 4, 5` an importance-sampled Monte Carlo estimate with a fixed seed.
pub fn weyl_ball_volume(n: usize, radius: f64) -> Result<f64> {
    Ok(weyl_ball_volume_with_error(n, radius)?.0)
}

/// Volume together with the estimated relative error.
pub fn weyl_ball_volume_with_error(n: usize, radius: f64) -> Result<(f64, f64)> {
    if !(2..=5).contains(&n) {
        return Err(Error::Domain(format!("n = {n} outside 2..=5")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    match n {
        2 => {
            let coarse = weyl_2(radius, 8);
            let fine = weyl_2(radius, 16);
            finish_quadrature(fine, coarse)
        }
        3 => {
            let coarse = weyl_3(radius, 8);
            let fine = weyl_3(radius, 16);
            finish_quadrature(fine, coarse)
        }
        _ => weyl_monte_carlo(n, radius, 400_000, 0x5eed_0001),
    }
}

fn finish_quadrature(fine: f64, coarse: f64) -> Result<(f64, f64)> {
    let rel = ((fine - coarse) / fine).abs();
    if !fine.is_finite() || rel > 0.05 {
        return Err(Error::accuracy("Weyl chamber quadrature did not converge", rel));
    }
    Ok((fine, rel))
}

fn weyl_2(radius: f64, nodes: usize) -> f64 {
    let rule = GaussLegendre::new(nodes);
    let top = 2.0 * radius;
    rule.integrate_composite(0.0, top, top.ceil() as usize, f64::sinh)
}

fn weyl_3(radius: f64, nodes: usize) -> f64 {
    let rule = GaussLegendre::new(nodes);
    let inner = |a: f64| {
        let upper = if a <= radius {
            0.5 * (3.0 * radius - a)
        } else {
            3.0 * radius - 2.0 * a
        };
        if upper <= 0.0 {
            return 0.0;
        }
        rule.integrate_composite(0.0, upper, upper.ceil() as usize, |b| {
            a.sinh() * b.sinh() * (a + b).sinh()
        })
    };
    let first = rule.integrate_composite(0.0, radius, radius.ceil() as usize, inner);
    let width = 0.5 * radius;
    let second = rule.integrate_composite(radius, 1.5 * radius, width.ceil() as usize, inner);
    first + second
}

fn weyl_monte_carlo(n: usize, radius: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let sampler = ChamberSampler::new(n, radius, 0.5);
    let mut rng = seeded_rng(seed, n as u64);
    let mut sum = Neumaier::default();
    let mut sq = Neumaier::default();
    for _ in 0..samples {
        let (_, w) = sampler.sample(&mut rng);
        sum.add(w);
        sq.add(w * w);
    }
    let nf = samples as f64;
    let mean = sum.sum() / nf;
    let var = (sq.sum() / nf - mean * mean).max(0.0);
    let rel = (var / nf).sqrt() / mean;
    if !(mean > 0.0) || rel > 0.05 {
        return Err(Error::accuracy(
            "Monte Carlo chamber volume did not reach 5%",
            rel,
        ));
    }
    Ok((mean, rel))
}

/// Least-squares slope of `log μ(B_R)` against `R`.
pub fn weyl_growth_slope(n: usize, radii: &[f64]) -> Result<f64> {
    let mut logs = Vec::with_capacity(radii.len());
    for &r in radii {
        logs.push(weyl_ball_volume(n, r)?.ln());
    }
    Ok(linear_fit(radii, &logs).0)
}

/// `σ_n = [n²/2]`.
pub fn sigma_n(n: usize) -> usize {
    n * n / 2
}

/// Haar-distributed element of SO(n): QR of a Gaussian matrix with the
/// sign of each `R_ii` moved into `Q`, then the first column flipped if
/// needed to land in the identity component.
pub fn haar_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// `Δ(p)^{-1/2}` for the Iwasawa component of `x = k' p`.
fn modular_inverse_sqrt(x: &DMatrix<f64>) -> Result<f64> {
    let n = x.nrows();
    let r = x.clone().qr().r();
    let mut log_delta = 0.0;
    for i in 0..n {
        let d = r[(i, i)].abs();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Numeric("QR breakdown in Iwasawa factor".into()));
        }
        log_delta += (n as f64 + 1.0 - 2.0 * (i as f64 + 1.0)) * d.ln();
    }
    Ok((-0.5 * log_delta).exp())
}

/// `Ξ(g) = ∫_K Δ(gk)^{-1/2} dk` by Monte Carlo over Haar-random `k`.
pub fn harish_chandra_xi(g: &GroupElement, samples: usize, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Input("samples must be at least 1".into()));
    }
    let n = g.n();
    let mut rng = seeded_rng(seed, 0x11);
    let mut sum = Neumaier::default();
    let mut sq = Neumaier::default();
    for _ in 0..samples {
        let k = haar_orthogonal(n, &mut rng);
        let v = modular_inverse_sqrt(&(g.matrix() * k))?;
        sum.add(v);
        sq.add(v * v);
    }
    let nf = samples as f64;
    let mean = sum.sum() / nf;
    let var = (sq.sum() / nf - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        std_error: (var / nf).sqrt(),
    })
}

/// Weighted Monte Carlo sample of Haar measure restricted to a ball.
#[derive(Debug, Clone)]
pub struct HaarSample {
    pub points: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
}

impl HaarSample {
    /// `h = k1 exp(Z) k2` with `Z` drawn by [`ChamberSampler`] in the ball of
    /// log-radius `radius`; weights integrate to the ball volume.
    pub fn draw(n: usize, radius: f64, samples: usize, seed: u64) -> Self {
        let sampler = ChamberSampler::new(n, radius, 0.5);
        let mut rng = seeded_rng(seed, 0x22);
        let mut points = Vec::with_capacity(samples);
        let mut weights = Vec::with_capacity(samples);
        let scale = 1.0 / samples as f64;
        for _ in 0..samples {
            let (gaps, w) = sampler.sample(&mut rng);
            let k1 = haar_orthogonal(n, &mut rng);
            let k2 = haar_orthogonal(n, &mut rng);
            if w == 0.0 {
                continue;
            }
            let z = exponents_from_gaps(&gaps);
            let d = GroupElement::diag_exp(&z);
            points.push(&k1 * d.matrix() * &k2);
            weights.push(w * scale);
        }
        HaarSample { points, weights }
    }

    /// `∫ |f|²` over the sample.
    pub fn l2_norm_sq(&self, f: &SymbolHandle) -> Result<f64> {
        let mut acc = Neumaier::default();
        for (h, w) in self.points.iter().zip(&self.weights) {
            acc.add(w * f.eval_matrix(h)?.norm_sqr());
        }
        Ok(acc.sum())
    }
}

/// Log-radius of the sampling ball used by [`distortion_constant`].
fn distortion_radius(phi: &SymbolHandle, omega: &[GroupElement]) -> Result<f64> {
    let support = phi.support_radius.ok_or_else(|| {
        Error::Domain("distortion needs a symbol with a declared support radius".into())
    })?;
    let mut shift: f64 = 0.0;
    for g in omega {
        shift = shift.max(length_L(g)?.ln());
    }
    Ok(support + shift)
}

/// Rescale `phi` to unit L² norm over the exact Monte Carlo measure that
/// [`distortion_constant`] uses for the same `omega`, sample count and seed.
pub fn normalize_for_distortion(
    phi: &SymbolHandle,
    omega: &[GroupElement],
    haar_samples: usize,
    seed: u64,
) -> Result<SymbolHandle> {
    let n = omega
        .first()
        .map(|g| g.n())
        .ok_or_else(|| Error::Input("empty omega sample".into()))?;
    let radius = distortion_radius(phi, omega)?;
    let sample = HaarSample::draw(n, radius, haar_samples, seed);
    let norm_sq = sample.l2_norm_sq(phi)?;
    if !(norm_sq > 0.0) {
        return Err(Error::Domain("symbol vanishes on the sample".into()));
    }
    Ok(phi.scaled(1.0 / norm_sq.sqrt()))
}

/// `sup_{g ∈ Ω} (1/2) ∫ |φ(gh) - φ(h)|² dμ(h)` for nonnegative normalized φ.
pub fn distortion_constant(
    phi: &SymbolHandle,
    omega: &[GroupElement],
    haar_samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = omega
        .first()
        .map(|g| g.n())
        .ok_or_else(|| Error::Input("empty omega sample".into()))?;
    if omega.iter().any(|g| g.n() != n) {
        return Err(Error::Input("omega elements have mixed sizes".into()));
    }
    let radius = distortion_radius(phi, omega)?;
    let sample = HaarSample::draw(n, radius, haar_samples, seed);
    let mut base = Vec::with_capacity(sample.points.len());
    let mut norm = Neumaier::default();
    for (h, w) in sample.points.iter().zip(&sample.weights) {
        let v = phi.eval_matrix(h)?;
        if v.re < -1e-12 || v.im.abs() > 1e-12 {
            return Err(Error::Domain("distortion needs a nonnegative symbol".into()));
        }
        norm.add(w * v.re * v.re);
        base.push(v.re);
    }
    let norm_sq = norm.sum();
    if (norm_sq - 1.0).abs() > 1e-3 {
        return Err(Error::Domain(format!(
            "symbol is not L2-normalized: measured squared norm {norm_sq:.6}"
        )));
    }
    let mut sup: f64 = 0.0;
    for g in omega {
        let mut acc = Neumaier::default();
        for ((h, w), b) in sample.points.iter().zip(&sample.weights).zip(&base) {
            let v = phi.eval_matrix(&(g.matrix() * h))?.re;
            acc.add(w * (v - b) * (v - b));
        }
        sup = sup.max(0.5 * acc.sum());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_element(n: usize, spread: f64, seed: u64) -> GroupElement {
        let mut rng = seeded_rng(seed, 7);
        let k1 = haar_orthogonal(n, &mut rng);
        let k2 = haar_orthogonal(n, &mut rng);
        let z: Vec<f64> = (0..n).map(|_| spread * (rng.random::<f64>() - 0.5)).collect();
        let d = GroupElement::diag_exp(&z);
        GroupElement::new(&k1 * d.matrix() * &k2).unwrap()
    }

    #[test]
    fn rejects_bad_determinant_and_nan() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(GroupElement::new(m), Err(Error::Domain(_))));
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]);
        assert!(matches!(GroupElement::new(m), Err(Error::Input(_))));
    }

    #[test]
    fn kak_of_diagonal_and_identity() {
        let e = std::f64::consts::E;
        let g = GroupElement::from_row_slice(3, &[e, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0 / e])
            .unwrap();
        let kak = kak_decompose(&g).unwrap();
        for (s, t) in kak.exponents.iter().zip([1.0, 0.0, -1.0]) {
            assert!((s - t).abs() < 1e-12);
        }
        let kak = kak_decompose(&GroupElement::identity(4)).unwrap();
        assert!(kak.exponents.iter().all(|s| s.abs() < 1e-14));
        let prod = &kak.k1 * &kak.k2;
        assert!((prod.transpose() * &prod - DMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn kak_round_trip_recovers_exponents() {
        let mut rng = seeded_rng(42, 1);
        for n in 2..=5 {
            let k1 = haar_orthogonal(n, &mut rng);
            let k2 = haar_orthogonal(n, &mut rng);
            let mut z: Vec<f64> = (0..n).map(|i| 1.7 * i as f64 - 0.3 * (i * i) as f64).collect();
            let mean = z.iter().sum::<f64>() / n as f64;
            z.iter_mut().for_each(|v| *v -= mean);
            z.sort_by(|a, b| b.total_cmp(a));
            let g = GroupElement::new(&k1 * GroupElement::diag_exp(&z).matrix() * &k2).unwrap();
            let kak = kak_decompose(&g).unwrap();
            for (s, t) in kak.exponents.iter().zip(&z) {
                assert!((s - t).abs() < 1e-10, "n={n}: {s} vs {t}");
            }
            let rel = (kak.reconstruct() - g.matrix()).norm() / g.matrix().norm();
            assert!(rel < 1e-10);
            assert!((kak.k1.determinant() - 1.0).abs() < 1e-12);
            assert!((kak.k2.determinant() - 1.0).abs() < 1e-12);
            let eye = DMatrix::<f64>::identity(n, n);
            assert!((kak.k1.transpose() * &kak.k1 - &eye).norm() < 1e-12);
            assert!((kak.k2.transpose() * &kak.k2 - &eye).norm() < 1e-12);
        }
    }

    #[test]
    fn length_examples() {
        let s: f64 = 2.5;
        let g = GroupElement::diag_exp(&[s, 0.0, -s]);
        assert!((length_L(&g).unwrap() - s.exp()).abs() < 1e-10 * s.exp());
        assert_eq!(length_L(&GroupElement::identity(3)).unwrap(), 1.0);
        let g = GroupElement::from_row_slice(3, &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5])
            .unwrap();
        // operator norms of g and g^{-1} by direct SVD
        let op = |m: &DMatrix<f64>| m.clone().svd(false, false).singular_values.max();
        let oracle = op(g.matrix()).max(op(g.inverse().matrix()));
        assert!((length_L(&g).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bracevert_regimes() {
        assert_eq!(bracevert(&GroupElement::identity(3)).unwrap(), 0.0);
        let g = GroupElement::diag_exp(&[10.0, 0.0, -10.0]);
        let b = bracevert(&g).unwrap();
        let l = length_L(&g).unwrap();
        assert!(b >= 0.5 * l && b <= 2.0 * l);
        let basis = LieBasis::new(3);
        let mut x = &basis.basis[1] * 0.7 + &basis.basis[6] * 0.3;
        x *= 1e-3 / normalized_hs(&x);
        let g = GroupElement::exp_algebra(&x).unwrap();
        let local = normalized_hs(&(g.matrix() - DMatrix::<f64>::identity(3, 3)));
        let ratio = bracevert(&g).unwrap() / local;
        assert!((1.0..=3f64.sqrt() + 1e-2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lie_basis_is_orthonormal_and_traceless() {
        for n in 2..=5 {
            let b = LieBasis::new(n);
            assert_eq!(b.len(), n * n - 1);
            for (i, x) in b.basis.iter().enumerate() {
                assert!(x.trace().abs() < 1e-14);
                for (j, y) in b.basis.iter().enumerate() {
                    let ip = (x.transpose() * y).trace();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - target).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lie_derivative_of_constant_vanishes() {
        let g = random_element(3, 2.0, 3);
        let basis = LieBasis::new(3);
        let m = SymbolHandle::constant(1.0);
        for gamma in [vec![0], vec![2, 5], vec![7, 7, 1], vec![0, 1, 2, 3, 4]] {
            let d = lie_derivative(&m, &g, &MultiIndex::new(gamma), &basis, 1e-4).unwrap();
            assert!(d.norm() < 1e-10);
        }
    }

    #[test]
    fn lie_derivative_matches_entry_and_trace_oracles() {
        let g = random_element(3, 1.5, 9);
        let basis = LieBasis::new(3);
        let entry = SymbolHandle::real("g11", |m| m[(0, 0)]);
        for j in 0..basis.len() {
            let d = lie_derivative(&entry, &g, &MultiIndex::new(vec![j]), &basis, 1e-4).unwrap();
            let oracle = (g.matrix() * &basis.basis[j])[(0, 0)];
            assert!((d.re - oracle).abs() < 1e-8 * (1.0 + oracle.abs()), "j={j}");
        }
        let trace = SymbolHandle::real("tr/n", |m| m.trace() / 3.0);
        for (j, k) in [(0, 1), (3, 7), (6, 6), (2, 4)] {
            let d = lie_derivative(&trace, &g, &MultiIndex::new(vec![j, k]), &basis, 1e-4)
                .unwrap();
            let oracle = (g.matrix() * &basis.basis[j] * &basis.basis[k]).trace() / 3.0;
            assert!((d.re - oracle).abs() < 1e-7 * (1.0 + oracle.abs()), "({j},{k})");
        }
    }

    #[test]
    fn lie_derivative_rejects_excess_order() {
        let basis = LieBasis::new(2);
        let gamma = MultiIndex::new(vec![0; 4]);
        let r = lie_derivative(
            &SymbolHandle::constant(1.0),
            &GroupElement::identity(2),
            &gamma,
            &basis,
            1e-4,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn weyl_volume_matches_closed_form_for_n2() {
        for r in [0.1, 1.0, 4.0, 9.0] {
            let v = weyl_ball_volume(2, r).unwrap();
            let exact = (2.0 * r).cosh() - 1.0;
            assert!(((v - exact) / exact).abs() < 1e-12, "R={r}");
        }
    }

    #[test]
    fn weyl_volume_n3_against_brute_force_grid() {
        // midpoint rule over the gap box, independent of the polytope split
        let r = 1.3;
        let steps = 1200;
        let hbox = 1.5 * r / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let a = (i as f64 + 0.5) * hbox;
                let b = (j as f64 + 0.5) * hbox;
                if 2.0 * a + b <= 3.0 * r && a + 2.0 * b <= 3.0 * r {
                    acc += a.sinh() * b.sinh() * (a + b).sinh();
                }
            }
        }
        acc *= hbox * hbox;
        let v = weyl_ball_volume(3, r).unwrap();
        assert!(((v - acc) / v).abs() < 5e-3, "{v} vs {acc}");
    }

    #[test]
    fn weyl_volume_monte_carlo_n4_matches_small_radius_grid() {
        let v = weyl_ball_volume(4, 0.8).unwrap();
        // coarse midpoint oracle in gap coordinates
        let steps = 90;
        let bounds = [4.0 * 0.8 / 3.0, 4.0 * 0.8 / 2.0, 4.0 * 0.8 / 3.0];
        let hs: Vec<f64> = bounds.iter().map(|b| b / steps as f64).collect();
        let mut acc = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let g = [
                        (i as f64 + 0.5) * hs[0],
                        (j as f64 + 0.5) * hs[1],
                        (k as f64 + 0.5) * hs[2],
                    ];
                    if in_chamber_ball(&g, 0.8) {
                        acc += weyl_density(&g);
                    }
                }
            }
        }
        acc *= hs.iter().product::<f64>();
        assert!(((v - acc) / acc).abs() < 0.03, "{v} vs {acc}");
    }

    #[test]
    fn weyl_slopes_match_sigma() {
        let radii: Vec<f64> = (2..=10).map(|r| r as f64).collect();
        let s2 = weyl_growth_slope(2, &radii).unwrap();
        let s3 = weyl_growth_slope(3, &radii).unwrap();
        assert!((s2 / 2.0 - 1.0).abs() < 0.05, "slope {s2}");
        assert!((s3 / 4.0 - 1.0).abs() < 0.05, "slope {s3}");
    }

    #[test]
    fn xi_at_identity_is_one() {
        let est = harish_chandra_xi(&GroupElement::identity(3), 200, 1).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi_is_left_k_invariant_exactly() {
        let g = random_element(3, 2.0, 5);
        let mut rng = seeded_rng(77, 0);
        let k = haar_orthogonal(3, &mut rng);
        let kg = GroupElement::new(&k * g.matrix()).unwrap();
        let a = harish_chandra_xi(&g, 2000, 9).unwrap().value;
        let b = harish_chandra_xi(&kg, 2000, 9).unwrap().value;
        assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn haar_sampler_mean_is_zero() {
        // E[k] = 0 under Haar measure on SO(n), n >= 2
        let mut rng = seeded_rng(5, 5);
        let mut acc = DMatrix::<f64>::zeros(3, 3);
        let count = 20000;
        for _ in 0..count {
            acc += haar_orthogonal(3, &mut rng);
        }
        acc /= count as f64;
        assert!(acc.amax() < 0.03);
    }

    #[test]
    fn distortion_needs_normalization() {
        let phi = SymbolHandle::real("ind", |m| {
            if m.norm() < 3.0 {
                1.0
            } else {
                0.0
            }
        })
        .with_support_radius(1.0);
        let omega = vec![GroupElement::identity(2)];
        let r = distortion_constant(&phi, &omega, 2000, 1);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
