//! Finite sections of Schur multipliers: Schatten norms, lower bounds for
//! `‖A ↦ M∘A‖_{S_p → S_p}` by a duality-map power iteration, the exact
//! `p = 2` value, the Sobolev upper bound for `p = ∞` on unit cubes, and
//! the rigidity witness over nested orbit samples.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::StandardNormal;
use rand::Rng;
use std::sync::Arc;

use crate::composition_calculus::CompositionFrame;
use crate::error::{Error, Result};
use crate::group_geometry::{normalized_hs, GroupElement, SymbolHandle};
use crate::numerics::{seeded_rng, GaussLegendre, Neumaier};
use crate::profile::{rigidity_records, ProfileGrid, RadialProfile};
use crate::report::{CertificationReport, CheckRecord, Classification, Verdict};
use crate::sphere_spectra::RigidityExponents;

pub type CMatrix = DMatrix<Complex64>;

/// Above this size `p = ∞` norms use power iteration instead of a full SVD.
pub const POWER_ITERATION_THRESHOLD: usize = 512;

/// `M_{ij} = m(a_i b_j)`; with `b_j = a_j^{-1}` this is `m(g_i g_j^{-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSchurMultiplier {
    pub symbol: CMatrix,
}

impl TruncatedSchurMultiplier {
    pub fn from_matrix(symbol: CMatrix) -> Result<Self> {
        if symbol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("symbol matrix has non-finite entries".into()));
        }
        Ok(TruncatedSchurMultiplier { symbol })
    }

    pub fn from_real(symbol: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(symbol.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn from_group_points(points: &[GroupElement], m: &SymbolHandle) -> Result<Self> {
        let inverses: Vec<GroupElement> = points.iter().map(|g| g.inverse()).collect();
        Self::from_pairs(points, &inverses, m)
    }

    pub fn from_pairs(rows: &[GroupElement], cols: &[GroupElement], m: &SymbolHandle) -> Result<Self> {
        let mut out = CMatrix::zeros(rows.len(), cols.len());
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                out[(i, j)] = m.eval_matrix(&(a.matrix() * b.matrix()))?;
            }
        }
        Ok(TruncatedSchurMultiplier { symbol: out })
    }

    pub fn size(&self) -> (usize, usize) {
        self.symbol.shape()
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        TruncatedSchurMultiplier {
            symbol: self.symbol.view((0, 0), (k, k)).into_owned(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.symbol.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Input(format!("Schatten exponent must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// Singular values, sorted decreasingly.
fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let s = a.clone().singular_values();
    let mut v: Vec<f64> = s.iter().copied().collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("SVD produced non-finite singular values".into()));
    }
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

/// `ℓ_p` norm of `s`, scaled by the largest entry to avoid overflow.
fn lp_norm(s: &[f64], p: f64) -> f64 {
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    top * s.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Largest singular value by power iteration on `A*A`.
pub fn top_singular_value(a: &CMatrix, iterations: usize) -> f64 {
    let mut v = nalgebra::DVector::<Complex64>::from_fn(a.ncols(), |i, _| {
        Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0)
    });
    let mut sigma = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v /= Complex64::new(nv, 0.0);
        let w = a * &v;
        let next = w.norm();
        v = a.adjoint() * w;
        if (next - sigma).abs() <= 1e-15 * next {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma
}

/// Schatten `p` norm; `p = f64::INFINITY` is the operator norm.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() && a.nrows().max(a.ncols()) > POWER_ITERATION_THRESHOLD {
        return Ok(top_singular_value(a, 500));
    }
    Ok(lp_norm(&singular_values(a)?, p))
}

/// Entrywise product `M ∘ A`.
pub fn schur_apply(m: &TruncatedSchurMultiplier, a: &CMatrix) -> Result<CMatrix> {
    if m.symbol.shape() != a.shape() {
        return Err(Error::Input(format!(
            "shape mismatch: multiplier {:?}, matrix {:?}",
            m.symbol.shape(),
            a.shape()
        )));
    }
    Ok(m.symbol.component_mul(a))
}

/// Norming element of `b` in the dual class: `Y` with `‖Y‖_{p'} = 1` and
/// `tr(Y* b) = ‖b‖_p`.
fn duality_map(b: &CMatrix, p: f64) -> Result<CMatrix> {
    let svd = b.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("SVD did not return singular vectors".into())),
    };
    let s = &svd.singular_values;
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(CMatrix::zeros(b.nrows(), b.ncols()));
    }
    let weights: Vec<f64> = if p.is_infinite() {
        let i = s.iter().enumerate().fold(0, |best, (i, v)| if *v > s[best] { i } else { best });
        (0..s.len()).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
    } else if p == 1.0 {
        s.iter().map(|v| if *v > 1e-12 * top { 1.0 } else { 0.0 }).collect()
    } else {
        let raw: Vec<f64> = s.iter().map(|v| (v / top).powf(p - 1.0)).collect();
        let q = p / (p - 1.0);
        let norm = lp_norm(&raw, q);
        raw.iter().map(|v| v / norm).collect()
    };
    let mut out = CMatrix::zeros(b.nrows(), b.ncols());
    for (k, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let col = u.column(k);
        let row = vt.row(k);
        out += (&col * &row) * Complex64::new(*w, 0.0);
    }
    Ok(out)
}

fn dual_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn ratio(m: &TruncatedSchurMultiplier, a: &CMatrix, p: f64) -> Result<f64> {
    let den = schatten_norm(a, p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(schatten_norm(&schur_apply(m, a)?, p)? / den)
}

/// Best ratio found and the matrix attaining it.
#[derive(Debug, Clone)]
pub struct LowerBound {
    pub value: f64,
    pub witness: CMatrix,
}

/// Lower bound for the `S_p → S_p` norm of `A ↦ M∘A`.
pub fn schur_norm_lower_bound(m: &TruncatedSchurMultiplier, p: f64, iterations: usize, seed: u64) -> Result<f64> {
    Ok(schur_norm_lower_bound_warm(m, p, iterations, seed, None)?.value)
}

/// As [`schur_norm_lower_bound`], with an extra start matrix.
///
/// Every matrix unit contributes its exact ratio `|M_ij|`. The iteration
/// `A ← J_{p'}(M̄ ∘ J_p(M ∘ A))` is run from the best unit, the all-ones
/// matrix, Toeplitz phases `e^{2πi θ(i-j)}`, seeded Gaussian matrices and the
/// warm start; the best ratio seen anywhere is returned.
pub fn schur_norm_lower_bound_warm(
    m: &TruncatedSchurMultiplier,
    p: f64,
    iterations: usize,
    seed: u64,
    warm: Option<&CMatrix>,
) -> Result<LowerBound> {
    check_p(p)?;
    let (r, c) = m.size();
    if r == 0 || c == 0 {
        return Ok(LowerBound {
            value: 0.0,
            witness: CMatrix::zeros(r, c),
        });
    }
    let mut best_ij = (0, 0);
    let mut best_val = -1.0;
    for i in 0..r {
        for j in 0..c {
            let v = m.symbol[(i, j)].norm();
            if v > best_val {
                best_val = v;
                best_ij = (i, j);
            }
        }
    }
    let mut unit = CMatrix::zeros(r, c);
    unit[best_ij] = Complex64::new(1.0, 0.0);
    let mut best = LowerBound {
        value: best_val,
        witness: unit.clone(),
    };

    let mut starts = vec![unit, CMatrix::from_element(r, c, Complex64::new(1.0, 0.0))];
    for theta in [0.25, 1.0 / r.max(2) as f64, 0.5] {
        starts.push(CMatrix::from_fn(r, c, |i, j| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta * (i as f64 - j as f64))
        }));
    }
    let mut rng = seeded_rng(seed, 0x5c4u64);
    for _ in 0..4 {
        starts.push(CMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }));
    }
    if let Some(w) = warm {
        if w.shape() != (r, c) {
            return Err(Error::Input("warm start has the wrong shape".into()));
        }
        starts.push(w.clone());
    }

    let q = dual_exponent(p);
    let conj = m.symbol.map(|z| z.conj());
    for start in starts {
        let mut a = start;
        for step in 0..=iterations {
            let v = ratio(m, &a, p)?;
            if v > best.value {
                best = LowerBound {
                    value: v,
                    witness: a.clone(),
                };
            }
            if step == iterations {
                break;
            }
            let y = duality_map(&schur_apply(m, &a)?, p)?;
            let z = conj.component_mul(&y);
            let next = duality_map(&z, q)?;
            if next.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                break;
            }
            a = next;
        }
    }
    Ok(best)
}

/// `p = 2`: Schur multiplication is diagonal on matrix units.
pub fn schur_norm_exact_p2(m: &TruncatedSchurMultiplier) -> f64 {
    m.sup_abs()
}

/// Zero-pad a `k × l` matrix into the leading block of an `r × c` one.
pub fn embed_leading(a: &CMatrix, r: usize, c: usize) -> CMatrix {
    let mut out = CMatrix::zeros(r, c);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out
}

/// Lower bounds on the leading `k × k` sections for each `k` in `sizes`
/// (increasing), each warm-started from the previous witness so that the
/// sequence is non-decreasing.
pub fn nested_lower_bounds(
    m: &TruncatedSchurMultiplier,
    sizes: &[usize],
    p: f64,
    iterations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut warm: Option<CMatrix> = None;
    let mut last = 0;
    for &k in sizes {
        if k < last || k > m.size().0 || k > m.size().1 {
            return Err(Error::Input(format!("section sizes must increase within the matrix, got {k}")));
        }
        let section = m.leading(k);
        let w = warm.as_ref().map(|a| embed_leading(a, k, k));
        let lb = schur_norm_lower_bound_warm(&section, p, iterations, seed, w.as_ref())?;
        out.push(lb.value);
        warm = Some(lb.witness);
        last = k;
    }
    Ok(out)
}

type CubeFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// A kernel `S(x, y)` on `Q_1 × Q_2 ⊂ R^{d_1} × R^{d_2}`.
#[derive(Clone)]
pub struct CubeSymbol {
    pub d1: usize,
    pub d2: usize,
    f: Arc<CubeFn>,
}

impl std::fmt::Debug for CubeSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CubeSymbol").field("d1", &self.d1).field("d2", &self.d2).finish()
    }
}

impl CubeSymbol {
    pub fn new<F>(d1: usize, d2: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        CubeSymbol { d1, d2, f: Arc::new(f) }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Complex64 {
        (self.f)(x, y)
    }

    /// `M_{ij} = S(x_i, y_j)`.
    pub fn section(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> TruncatedSchurMultiplier {
        TruncatedSchurMultiplier {
            symbol: CMatrix::from_fn(xs.len(), ys.len(), |i, j| self.eval(&xs[i], &ys[j])),
        }
    }
}

/// Unit cubes `[lo, lo + 1]^d` and a tensor Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeGrid {
    pub lo1: Vec<f64>,
    pub lo2: Vec<f64>,
    pub nodes: usize,
}

impl CubeGrid {
    pub fn unit(d1: usize, d2: usize, nodes: usize) -> Self {
        CubeGrid {
            lo1: vec![0.0; d1],
            lo2: vec![0.0; d2],
            nodes,
        }
    }
}

/// Sum over `ρ ∈ {0,1}^{d_1+d_2}` of `‖∂^ρ S‖` on `Q_1 × Q_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevBound {
    /// `Σ_ρ ‖∂^ρ S‖_{L_2}`.
    pub value: f64,
    /// `Σ_ρ ‖∂^ρ S‖_{L_1}`; bounds the `S_∞` Schur norm with constant
    /// `kernel_constant` on unit cubes.
    pub l1_sum: f64,
    pub kernel_constant: f64,
    /// `(ρ as bit mask, ‖∂^ρ S‖_{L_2})`.
    pub terms: Vec<(u32, f64)>,
    /// Richardson error estimate of the derivative quadrature.
    pub error: f64,
}

impl SobolevBound {
    /// Certified upper bound for the `S_∞` norm of the Schur multiplier.
    pub fn certified(&self) -> f64 {
        self.kernel_constant * self.l1_sum
    }
}

fn mixed_difference(s: &CubeSymbol, pt: &[f64], mask: u32, h: f64) -> Complex64 {
    let dim = pt.len();
    let dirs: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
    let k = dirs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut buf = pt.to_vec();
    for pattern in 0u32..(1 << k) {
        let mut sign = 1.0;
        buf.copy_from_slice(pt);
        for (b, &i) in dirs.iter().enumerate() {
            if pattern & (1 << b) != 0 {
                buf[i] -= h;
                sign = -sign;
            } else {
                buf[i] += h;
            }
        }
        let (x, y) = buf.split_at(s.d1);
        acc += s.eval(x, y) * sign;
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Sobolev-type upper bound for the `S_∞` Schur norm of `S` on unit cubes.
///
/// On `[0,1]`, `f(x) = ∫f + ∫ f'(t) (1[t <= x] - (1 - t)) dt` with a kernel
/// bounded by 1 in `x` for every `t`; tensoring over coordinates writes `S`
/// as an average of products `u(x) v(y)` with `|u|, |v| <= 1` weighted by
/// `|∂^ρ S|`, whence the `L_1` sum with constant 1.
pub fn schur_infty_upper_bound(s: &CubeSymbol, grid: &CubeGrid) -> Result<SobolevBound> {
    if grid.lo1.len() != s.d1 || grid.lo2.len() != s.d2 {
        return Err(Error::Input("cube corners do not match the symbol dimensions".into()));
    }
    let dim = s.d1 + s.d2;
    if dim == 0 || dim > 6 {
        return Err(Error::Input(format!("total dimension {dim} must lie in 1..=6")));
    }
    let rule = GaussLegendre::new(grid.nodes.max(2));
    let q = rule.len();
    let total = q.pow(dim as u32);
    let lo: Vec<f64> = grid.lo1.iter().chain(&grid.lo2).copied().collect();
    let mut terms = Vec::new();
    let mut l2_sum = 0.0;
    let mut l1_sum = 0.0;
    let mut err_sum = 0.0;
    let mut pt = vec![0.0; dim];
    for mask in 0u32..(1 << dim) {
        let order = mask.count_ones() as i32;
        let h = if order == 0 { 0.0 } else { f64::EPSILON.powf(1.0 / (order as f64 + 4.0)) };
        let mut l2 = Neumaier::default();
        let mut l1 = Neumaier::default();
        let mut e2 = Neumaier::default();
        for idx in 0..total {
            let mut w = 1.0;
            let mut rem = idx;
            for (c, p) in pt.iter_mut().enumerate() {
                let node = rem % q;
                rem /= q;
                *p = lo[c] + 0.5 * (rule.nodes[node] + 1.0);
                w *= 0.5 * rule.weights[node];
            }
            let (v, e) = if order == 0 {
                let (x, y) = pt.split_at(s.d1);
                (s.eval(x, y), 0.0)
            } else {
                let coarse = mixed_difference(s, &pt, mask, h);
                let fine = mixed_difference(s, &pt, mask, 0.5 * h);
                ((fine * 4.0 - coarse) / 3.0, (fine - coarse).norm() / 3.0)
            };
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numeric("symbol is not finite on the cube".into()));
            }
            l2.add(w * v.norm_sqr());
            l1.add(w * v.norm());
            e2.add(w * e * e);
        }
        let norm = l2.sum().sqrt();
        let err = e2.sum().sqrt();
        if err > 1e-4 * norm.max(1e-6) {
            return Err(Error::accuracy(
                format!("mixed derivative with mask {mask:b} is unstable"),
                err,
            ));
        }
        terms.push((mask, norm));
        l2_sum += norm;
        l1_sum += l1.sum();
        err_sum += err;
    }
    Ok(SobolevBound {
        value: l2_sum,
        l1_sum,
        kernel_constant: 1.0,
        terms,
        error: err_sum,
    })
}

/// Which norm the radial symbol is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialMode {
    /// `m(g) = φ(|g|)` with the normalized Hilbert–Schmidt norm.
    HilbertSchmidt,
    /// `m(g) = φ(‖g‖)` with the operator norm.
    Operator,
}

impl RadialMode {
    pub fn norm(&self, g: &DMatrix<f64>) -> f64 {
        match self {
            RadialMode::HilbertSchmidt => normalized_hs(g),
            RadialMode::Operator => g.clone().singular_values().max(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialMode::HilbertSchmidt => "hs-radial",
            RadialMode::Operator => "opnorm-radial",
        }
    }
}

/// The radial symbol `g ↦ φ(N(g))`.
pub fn radial_symbol(phi: &RadialProfile, mode: RadialMode) -> SymbolHandle {
    let phi = phi.clone();
    SymbolHandle::real(format!("{}∘{}", phi.name, mode.name()), move |g| phi.eval(mode.norm(g)))
        .with_radial(true)
}

/// Row points `a_i` and column points `b_j`; the section of size `k` uses
/// the first `k` of each and has entries `m(a_i b_j)`.
#[derive(Debug, Clone)]
pub struct WitnessDesign {
    pub rows: Vec<GroupElement>,
    pub cols: Vec<GroupElement>,
    pub sizes: Vec<usize>,
}

/// van der Corput radical inverse in base 2.
fn radical_inverse(mut i: usize) -> f64 {
    let mut f = 0.5;
    let mut out = 0.0;
    while i > 0 {
        if i & 1 == 1 {
            out += f;
        }
        f *= 0.5;
        i >>= 1;
    }
    out
}

fn rotation(n: usize, theta: f64) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::identity(n, n);
    let (s, c) = theta.sin_cos();
    k[(0, 0)] = c;
    k[(0, 1)] = -s;
    k[(1, 0)] = s;
    k[(1, 1)] = c;
    k
}

impl WitnessDesign {
    /// `a_i = D k_{θ_i}`, `b_j = k_{θ_j}^{-1} D` so that
    /// `a_i b_j = D k_{θ_i - θ_j} D`, with `D` the SO(n) frame of parameter
    /// `r` and `θ_i = 2π v(i)` in radical-inverse order: every prefix of
    /// length `2^j` is the uniform grid of `2^j` angles.
    pub fn orbit(n: usize, r: f64, sizes: &[usize]) -> Result<Self> {
        let frame = CompositionFrame::so_n(n, r)?;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(frame.diagonal()));
        let count = sizes.iter().copied().max().unwrap_or(0);
        let mut rows = Vec::with_capacity(count);
        let mut cols = Vec::with_capacity(count);
        for i in 0..count {
            let k = rotation(n, 2.0 * std::f64::consts::PI * radical_inverse(i));
            rows.push(GroupElement::new(&d * &k)?);
            cols.push(GroupElement::new(k.transpose() * &d)?);
        }
        Ok(WitnessDesign {
            rows,
            cols,
            sizes: sizes.to_vec(),
        })
    }

    /// `b_j = g_j^{-1}` for explicit points.
    pub fn from_points(points: Vec<GroupElement>, sizes: &[usize]) -> Result<Self> {
        if sizes.iter().any(|&k| k > points.len()) {
            return Err(Error::Input("section size exceeds the number of points".into()));
        }
        let cols = points.iter().map(|g| g.inverse()).collect();
        Ok(WitnessDesign {
            rows: points,
            cols,
            sizes: sizes.to_vec(),
        })
    }
}

/// Settings for [`rigidity_witness`].
#[derive(Debug, Clone)]
pub struct WitnessConfig {
    pub mode: RadialMode,
    pub iterations: usize,
    pub seed: u64,
    pub grid: ProfileGrid,
    /// Relative growth of the lower bounds above which they count as growing.
    pub growth_tol: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            mode: RadialMode::HilbertSchmidt,
            iterations: 20,
            seed: 0,
            grid: ProfileGrid::default(),
            growth_tol: 0.05,
        }
    }
}

/// Classify a radial profile against the rigidity inequalities of rank `n`
/// at exponent `p`, with Schur lower bounds on the nested sections of
/// `design` as supporting evidence.
///
/// VIOLATED when an inequality record fails, CONSISTENT when all pass,
/// INCONCLUSIVE otherwise (including when `(n, p)` is outside the range of
/// the statement).
pub fn rigidity_witness(
    phi: &RadialProfile,
    n: usize,
    p: f64,
    design: Option<&WitnessDesign>,
    config: &WitnessConfig,
) -> CertificationReport {
    let mut report = CertificationReport::new("rigidity-witness");
    report.param("profile", &phi.name);
    report.param("n", n);
    report.param("p", p);
    report.param("mode", config.mode.name());
    report.seed(config.seed);
    let exps = match RigidityExponents::new(n, p) {
        Ok(e) => e,
        Err(e) => {
            report.push(
                CheckRecord::new("exponents", "rigidity: admissible (n, p)", f64::NAN, Verdict::Inconclusive)
                    .with_note(e.to_string()),
            );
            report.classification = Some(Classification::Inconclusive);
            report.set_input_digest(b"");
            return report;
        }
    };
    report.param("alpha0", exps.alpha0);
    report.param("alpha", exps.alpha);
    report.param("c", &exps.c);
    let inequality = rigidity_records(phi, &exps, &config.grid);
    let classification = if inequality.iter().any(|r| r.verdict == Verdict::Fail) {
        Classification::Violated
    } else if inequality.iter().all(|r| r.verdict == Verdict::Pass) {
        Classification::Consistent
    } else {
        Classification::Inconclusive
    };
    report.extend(inequality);

    if let Some(design) = design {
        match witness_bounds(phi, design, p, config) {
            Ok(bounds) => {
                for (k, b) in design.sizes.iter().zip(&bounds) {
                    report.push(
                        CheckRecord::new(
                            format!("schur-lower-bound-N{k}"),
                            "restriction: finite sections bound the multiplier norm from below",
                            *b,
                            Verdict::Pass,
                        )
                        .with_note(format!("S_{p} lower bound, {} section", config.mode.name())),
                    );
                }
                if let (Some(first), Some(last)) = (bounds.first(), bounds.last()) {
                    let growth = if *first > 0.0 { last / first } else { 1.0 };
                    let verdict = if growth <= 1.0 + config.growth_tol {
                        Verdict::Pass
                    } else {
                        Verdict::Inconclusive
                    };
                    report.push(
                        CheckRecord::new(
                            "schur-lower-bound-growth",
                            "bounded multipliers have bounded section norms",
                            growth,
                            verdict,
                        )
                        .with_bound(1.0 + config.growth_tol)
                        .with_note("ratio of the largest to the smallest section bound"),
                    );
                }
            }
            Err(e) => report.push(
                CheckRecord::new("schur-lower-bounds", "restriction lower bounds", f64::NAN, Verdict::Inconclusive)
                    .with_note(e.to_string()),
            ),
        }
    }
    report.classification = Some(classification);
    report.set_input_digest(b"");
    report
}

fn witness_bounds(phi: &RadialProfile, design: &WitnessDesign, p: f64, config: &WitnessConfig) -> Result<Vec<f64>> {
    let count = design.sizes.iter().copied().max().unwrap_or(0);
    let symbol = radial_symbol(phi, config.mode);
    let m = TruncatedSchurMultiplier::from_pairs(&design.rows[..count], &design.cols[..count], &symbol)?;
    nested_lower_bounds(&m, &design.sizes, p, config.iterations, config.seed)
}
