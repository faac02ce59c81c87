//! Spectra of the sphere averaging operators `T_δ` on `S^{n-1}`.
//!
//! `T_δ` acts on degree-`k` spherical harmonics by the normalized Gegenbauer
//! value `φ_k(δ) = C_k^λ(δ) / C_k^λ(1)`, `λ = (n-2)/2`, with multiplicity
//! `m_k`. Schatten norms of `x ↦ T_x` and its derivatives are sums over
//! this spectrum.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{GaussLegendre, Neumaier};

/// Default edge of the compact interval `[-c, c]` for derivative estimates.
pub const DEFAULT_INTERIOR: f64 = 0.95;

/// Default largest degree summed before giving up on a tail bound.
pub const DEFAULT_KMAX: usize = 10_000_000;

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("sphere spectra need n >= 3, got {n}")));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Input("x is not finite".into()));
    }
    if x.abs() > 1.0 {
        return Err(Error::Domain(format!("|x| = {} exceeds 1", x.abs())));
    }
    Ok(())
}

/// Normalized Gegenbauer values `R_0, R_1, ...` at a fixed point,
/// `(k + 2λ) R_{k+1} = 2(k + λ) x R_k - k R_{k-1}`.
#[derive(Debug, Clone)]
pub struct GegenbauerSeq {
    lambda: f64,
    x: f64,
    k: usize,
    prev: f64,
    cur: f64,
}

impl GegenbauerSeq {
    pub fn new(lambda: f64, x: f64) -> Self {
        GegenbauerSeq {
            lambda,
            x,
            k: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for GegenbauerSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let k = self.k as f64;
        let next = if self.k == 0 {
            self.x
        } else {
            (2.0 * (k + self.lambda) * self.x * self.cur - k * self.prev) / (k + 2.0 * self.lambda)
        };
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        Some(out)
    }
}

/// `φ_k(x)` for `S^{n-1}`.
pub fn phi_k(n: usize, k: usize, x: f64) -> Result<f64> {
    check_n(n)?;
    check_x(x)?;
    let lambda = 0.5 * (n as f64 - 2.0);
    Ok(GegenbauerSeq::new(lambda, x).nth(k).expect("infinite sequence"))
}

/// `c_n = Γ((n-1)/2) / (√π Γ((n-2)/2))`.
pub fn sphere_constant(n: usize) -> f64 {
    let nf = n as f64;
    (ln_gamma(0.5 * (nf - 1.0)) - ln_gamma(0.5 * (nf - 2.0))).exp() / PI.sqrt()
}

/// `φ_k(x)` from `c_n ∫_0^π (x + i√(1-x²) cos θ)^k sin^{n-3} θ dθ`, returning
/// the real part and the size of the imaginary part.
pub fn phi_k_integral(n: usize, k: usize, x: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    check_x(x)?;
    let rule = GaussLegendre::new(2 * k + 64);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    let half = 0.5 * PI;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = half * (t + 1.0);
        let z = num_complex::Complex64::new(x, s * theta.cos()).powu(k as u32);
        let weight = w * half * theta.sin().powi(n as i32 - 3);
        re.add(weight * z.re);
        im.add(weight * z.im);
    }
    let c = sphere_constant(n);
    Ok((c * re.sum(), (c * im.sum()).abs()))
}

/// Coefficient of `R_{k-r}^{(λ+r)}` in `∂^r R_k^{(λ)}`:
/// `2^r (λ)_r ∏_{i<r}(k+2λ+i)(k-i) / ∏_{i<2r}(2λ+i)`.
fn derivative_coefficient(lambda: f64, k: usize, r: usize) -> f64 {
    let kf = k as f64;
    let mut c = 1.0;
    for i in 0..r {
        let fi = i as f64;
        c *= 2.0 * (lambda + fi) * (kf + 2.0 * lambda + fi) * (kf - fi);
        c /= (2.0 * lambda + 2.0 * fi) * (2.0 * lambda + 2.0 * fi + 1.0);
    }
    c
}

/// `∂^r φ_k(x)` via the Gegenbauer derivative identity.
pub fn phi_k_derivative(n: usize, k: usize, r: usize, x: f64) -> Result<f64> {
    Ok(phi_k_derivative_checked(n, k, r, x)?.0)
}

/// As [`phi_k_derivative`], also flagging points so close to `±1` that the
/// interior estimates no longer apply (`r >= 1` and `|x| > 0.999`).
pub fn phi_k_derivative_checked(n: usize, k: usize, r: usize, x: f64) -> Result<(f64, bool)> {
    check_n(n)?;
    check_x(x)?;
    let near_singular = r >= 1 && x.abs() > 0.999;
    if r > k {
        return Ok((0.0, near_singular));
    }
    let lambda = 0.5 * (n as f64 - 2.0);
    let base = GegenbauerSeq::new(lambda + r as f64, x)
        .nth(k - r)
        .expect("infinite sequence");
    Ok((derivative_coefficient(lambda, k, r) * base, near_singular))
}

/// All `∂^r φ_k(x)` for `k = 0..=k_max` in one recurrence pass.
pub fn phi_derivative_table(n: usize, r: usize, x: f64, k_max: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    check_x(x)?;
    let lambda = 0.5 * (n as f64 - 2.0);
    let mut out = vec![0.0; k_max + 1];
    if r > k_max {
        return Ok(out);
    }
    let seq = GegenbauerSeq::new(lambda + r as f64, x);
    for (k, base) in (r..=k_max).zip(seq) {
        out[k] = derivative_coefficient(lambda, k, r) * base;
    }
    Ok(out)
}

/// `m_k = (n+k-3)! (n+2k-2) / ((n-2)! k!)`, exact.
pub fn multiplicity(n: usize, k: usize) -> Result<u128> {
    check_n(n)?;
    let overflow = || Error::Range(format!("multiplicity overflows u128 at n = {n}, k = {k}"));
    // binom(n+k-3, k) built incrementally; each partial product is a binomial
    let mut binom: u128 = 1;
    for i in 1..=k as u128 {
        binom = binom
            .checked_mul(n as u128 - 3 + i)
            .ok_or_else(overflow)?
            / i;
    }
    let num = binom
        .checked_mul((n + 2 * k - 2) as u128)
        .ok_or_else(overflow)?;
    Ok(num / (n as u128 - 2))
}

/// `m_k` as `f64` (for sums where exactness is not needed).
pub fn multiplicity_f64(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let log_binom = ln_gamma(nf + kf - 2.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - 2.0);
    log_binom.exp() * (nf + 2.0 * kf - 2.0) / (nf - 2.0)
}

/// Exponents of the rigidity statement for radial symbols on SL_n(R).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityExponents {
    pub n: usize,
    pub p: f64,
    pub alpha0: f64,
    pub alpha: f64,
    /// `c_0, ..., c_{[α]}`.
    pub c: Vec<f64>,
}

/// Default offset `ε` in `α = α_0 - ε` when `α_0` is an integer.
pub const DEFAULT_INTEGER_EPS: f64 = 1e-3;

/// `α_0 = (n-2)/2 - (n-1)/p`.
pub fn alpha0(n: usize, p: f64) -> f64 {
    0.5 * (n as f64 - 2.0) - (n as f64 - 1.0) / p
}

fn is_integer(v: f64) -> bool {
    (v - v.round()).abs() < 1e-12
}

impl RigidityExponents {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        Self::with_eps(n, p, DEFAULT_INTEGER_EPS)
    }

    pub fn with_eps(n: usize, p: f64, eps: f64) -> Result<Self> {
        check_n(n)?;
        if !p.is_finite() || p <= 2.0 + 2.0 / (n as f64 - 2.0) {
            return Err(Error::Domain(format!(
                "p = {p} must exceed 2 + 2/(n-2) = {}",
                2.0 + 2.0 / (n as f64 - 2.0)
            )));
        }
        let a0 = alpha0(n, p);
        let alpha = if is_integer(a0) { a0.round() - eps } else { a0 };
        let top = alpha.floor() as usize;
        let mut c = Vec::with_capacity(top + 1);
        let ck = |k: usize| n as f64 / rank_floor(k, p) as f64;
        c.push(if alpha > 1.0 {
            ck(1)
        } else {
            alpha * n as f64 / (n as f64 - 2.0)
        });
        for k in 1..=top {
            c.push(ck(k));
        }
        Ok(RigidityExponents {
            n,
            p,
            alpha0: a0,
            alpha,
            c,
        })
    }

    /// `[α]`.
    pub fn floor_alpha(&self) -> usize {
        self.alpha.floor() as usize
    }
}

/// `[(2k+1)/(1 - 2/p)]`.
pub(crate) fn rank_floor(k: usize, p: f64) -> usize {
    // (2k+1)/(1-2/p) is often an exact integer (p = 3, 4, 6, ...) and rounds to just below it
    let x = (2 * k + 1) as f64 / (1.0 - 2.0 / p);
    let near = x.round();
    if (x - near).abs() <= 1e-9 * x.max(1.0) {
        near as usize
    } else {
        x.floor() as usize
    }
}

/// Outcome of a Schatten-norm sum over the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SpNorm {
    Finite {
        value: f64,
        /// Largest degree summed.
        terms: usize,
        /// Bound on the neglected part of the p-th power sum.
        tail_bound: f64,
        /// Bound on the error of `value`.
        norm_error: f64,
    },
    /// `r >= α_0`: the series diverges.
    Divergent { alpha0: f64, r: usize },
}

impl SpNorm {
    pub fn value(&self) -> Option<f64> {
        match self {
            SpNorm::Finite { value, .. } => Some(*value),
            SpNorm::Divergent { .. } => None,
        }
    }
}

/// Measured constant `C'` in `|∂^r φ_k(x)| <= C' (1+k)^{r+1-n/2}`: the max
/// over `k <= 200` and `|x| <= c` of the ratio.
pub fn decay_constant(n: usize, r: usize, c: f64) -> Result<f64> {
    check_n(n)?;
    let exponent = r as f64 + 1.0 - 0.5 * n as f64;
    let mut best: f64 = 0.0;
    let points = 201;
    for i in 0..points {
        let x = -c + 2.0 * c * i as f64 / (points - 1) as f64;
        let table = phi_derivative_table(n, r, x, 200)?;
        for (k, v) in table.iter().enumerate() {
            best = best.max(v.abs() / (1.0 + k as f64).powf(exponent));
        }
    }
    Ok(best)
}

/// Safety factor applied to the measured decay constant in tail bounds.
pub const TAIL_SAFETY: f64 = 2.0;

/// `A` in `m_k <= A (1+k)^{n-2}`; `binom(n+k-3, n-3) <= (1+k)^{n-3}` and
/// `(n+2k-2)/(n-2) <= 2(1+k)` give `A = 2`.
const MULTIPLICITY_BOUND: f64 = 2.0;

/// Bound on `Σ_{k>K} m_k w_k^p` where `|w_k| <= scale · C'(1+k)^{r+1-n/2}`.
fn tail_bound(scale_c: f64, p: f64, beta: f64, k: usize) -> f64 {
    MULTIPLICITY_BOUND * scale_c.powf(p) * (1.0 + k as f64).powf(-p * beta) / (p * beta)
}

fn sp_decay_constant(n: usize, r: usize, points: &[f64]) -> Result<f64> {
    let c = points
        .iter()
        .fold(0.5f64, |acc, x| acc.max(x.abs()))
        .min(DEFAULT_INTERIOR);
    Ok(TAIL_SAFETY * decay_constant(n, r, c)?)
}

/// `(Σ_{k<=K} m_k |∂^r φ_k(x)|^p)` for fixed `K`, in ascending `k` with
/// compensated summation.
pub fn sp_partial_power_sum(n: usize, p: f64, r: usize, x: f64, k_last: usize) -> Result<f64> {
    let table = phi_derivative_table(n, r, x, k_last)?;
    let mut acc = Neumaier::default();
    for (k, v) in table.iter().enumerate() {
        acc.add(multiplicity_f64(n, k) * v.abs().powf(p));
    }
    Ok(acc.sum())
}

/// `‖∂^r T_x‖_{S_p}` truncated where the tail bound makes the norm error
/// at most `tail_tol`, or the divergence flag when `r >= α_0`.
pub fn sp_derivative_norm(n: usize, p: f64, r: usize, x: f64, tail_tol: f64) -> Result<SpNorm> {
    sp_derivative_norm_with(n, p, r, x, tail_tol, DEFAULT_KMAX)
}

pub fn sp_derivative_norm_with(
    n: usize,
    p: f64,
    r: usize,
    x: f64,
    tail_tol: f64,
    k_max: usize,
) -> Result<SpNorm> {
    check_n(n)?;
    check_x(x)?;
    if x.abs() > DEFAULT_INTERIOR {
        return Err(Error::Domain(format!(
            "|x| = {} outside the interior interval [-{DEFAULT_INTERIOR}, {DEFAULT_INTERIOR}]",
            x.abs()
        )));
    }
    if !(p >= 1.0) || !p.is_finite() || !(tail_tol > 0.0) {
        return Err(Error::Input("need finite p >= 1 and tail_tol > 0".into()));
    }
    let a0 = alpha0(n, p);
    if r as f64 >= a0 {
        return Ok(SpNorm::Divergent { alpha0: a0, r });
    }
    let beta = a0 - r as f64;
    let cprime = sp_decay_constant(n, r, &[x])?;
    let lambda = 0.5 * (n as f64 - 2.0);
    let mut seq = GegenbauerSeq::new(lambda + r as f64, x);
    let mut acc = Neumaier::default();
    for k in 0..=k_max {
        if k >= r {
            let v = derivative_coefficient(lambda, k, r) * seq.next().expect("infinite");
            acc.add(multiplicity_f64(n, k) * v.abs().powf(p));
        }
        if k >= r && (k.is_power_of_two() || k % 1024 == 0) {
            let s = acc.sum();
            let t = tail_bound(cprime, p, beta, k);
            if s > 0.0 {
                let err = t / (p * s.powf((p - 1.0) / p));
                if err <= tail_tol {
                    return Ok(SpNorm::Finite {
                        value: s.powf(1.0 / p),
                        terms: k,
                        tail_bound: t,
                        norm_error: err,
                    });
                }
            }
        }
    }
    let s = acc.sum();
    let t = tail_bound(cprime, p, beta, k_max);
    Err(Error::accuracy(
        format!("tail bound not reached within k_max = {k_max}"),
        t / (p * s.powf((p - 1.0) / p)).max(f64::MIN_POSITIVE),
    ))
}

/// `‖∂^{[α]} T_x - ∂^{[α]} T_y‖_{S_p}` with the tail controlled to relative
/// accuracy `rel_tol`.
#[allow(non_snake_case)]
pub fn holder_constant_Tx(n: usize, p: f64, alpha: f64, x: f64, y: f64) -> Result<f64> {
    holder_difference_with(n, p, alpha, x, y, 1e-3, DEFAULT_KMAX)
}

pub fn holder_difference_with(
    n: usize,
    p: f64,
    alpha: f64,
    x: f64,
    y: f64,
    rel_tol: f64,
    k_max: usize,
) -> Result<f64> {
    check_n(n)?;
    check_x(x)?;
    check_x(y)?;
    if x.abs() > DEFAULT_INTERIOR || y.abs() > DEFAULT_INTERIOR {
        return Err(Error::Domain("points outside the interior interval".into()));
    }
    if x == y {
        return Ok(0.0);
    }
    let r = alpha.floor().max(0.0) as usize;
    let a0 = alpha0(n, p);
    if r as f64 >= a0 {
        return Err(Error::Domain(format!(
            "[alpha] = {r} must be below alpha0 = {a0}"
        )));
    }
    let beta = a0 - r as f64;
    // both sequences obey the same decay; the difference is bounded by the sum
    let cprime = 2.0 * sp_decay_constant(n, r, &[x, y])?;
    let lambda = 0.5 * (n as f64 - 2.0);
    let mut sx = GegenbauerSeq::new(lambda + r as f64, x);
    let mut sy = GegenbauerSeq::new(lambda + r as f64, y);
    let mut acc = Neumaier::default();
    for k in r..=k_max {
        let c = derivative_coefficient(lambda, k, r);
        let d = c * (sx.next().expect("infinite") - sy.next().expect("infinite"));
        acc.add(multiplicity_f64(n, k) * d.abs().powf(p));
        if k.is_power_of_two() || k % 1024 == 0 {
            let s = acc.sum();
            let t = tail_bound(cprime, p, beta, k);
            if s > 0.0 && t <= rel_tol * p * s {
                return Ok(s.powf(1.0 / p));
            }
        }
    }
    Err(Error::accuracy(
        format!("Hölder tail not controlled within k_max = {k_max}"),
        tail_bound(cprime, p, beta, k_max) / (p * acc.sum()).max(f64::MIN_POSITIVE),
    ))
}

/// Node set on `S²` with a latitude/longitude layout.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub nodes: Vec<[f64; 3]>,
}

impl SphereGrid {
    /// Nodes every `step_deg` degrees in latitude and longitude (poles once).
    pub fn lat_lon(step_deg: f64) -> Self {
        let mut nodes = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
        let lat_steps = (180.0 / step_deg).round() as usize;
        let lon_steps = (360.0 / step_deg).round() as usize;
        for i in 1..lat_steps {
            let theta = PI * i as f64 / lat_steps as f64;
            for j in 0..lon_steps {
                let phi = 2.0 * PI * j as f64 / lon_steps as f64;
                nodes.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
            }
        }
        SphereGrid { nodes }
    }
}

fn orthonormal_frame(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if x[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let dot = helper[0] * x[0] + helper[1] * x[1] + helper[2] * x[2];
    let mut u = [
        helper[0] - dot * x[0],
        helper[1] - dot * x[1],
        helper[2] - dot * x[2],
    ];
    let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    let v = [
        x[1] * u[2] - x[2] * u[1],
        x[2] * u[0] - x[0] * u[2],
        x[0] * u[1] - x[1] * u[0],
    ];
    (u, v)
}

fn circle_average<F: Fn([f64; 3]) -> f64>(f: &F, x: [f64; 3], delta: f64, points: usize) -> f64 {
    let s = (1.0 - delta * delta).max(0.0).sqrt();
    let (u, v) = orthonormal_frame(x);
    let mut acc = Neumaier::default();
    for i in 0..points {
        let t = 2.0 * PI * i as f64 / points as f64;
        let (c, sn) = (t.cos(), t.sin());
        let y = [
            delta * x[0] + s * (c * u[0] + sn * v[0]),
            delta * x[1] + s * (c * u[1] + sn * v[1]),
            delta * x[2] + s * (c * u[2] + sn * v[2]),
        ];
        acc.add(f(y));
    }
    acc.sum() / points as f64
}

/// `T_δ f` on `S²` at every grid node, averaging `f` over the circle
/// `{⟨x,y⟩ = δ}` with `circle_points` equispaced points. The error estimate
/// compares against half as many points and must not exceed `tol`.
pub fn averaging_operator_oracle<F: Fn([f64; 3]) -> f64>(
    delta: f64,
    f: F,
    grid: &SphereGrid,
    circle_points: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    check_x(delta)?;
    if circle_points < 4 {
        return Err(Error::Input("need at least 4 circle points".into()));
    }
    let mut out = Vec::with_capacity(grid.nodes.len());
    let mut worst: f64 = 0.0;
    for &x in &grid.nodes {
        let fine = circle_average(&f, x, delta, circle_points);
        let coarse = circle_average(&f, x, delta, circle_points / 2);
        worst = worst.max((fine - coarse).abs());
        out.push(fine);
    }
    if worst > tol {
        return Err(Error::accuracy("circle quadrature too coarse", worst));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre(k: usize, x: f64) -> f64 {
        // Bonnet recurrence, written independently of GegenbauerSeq
        let (mut p0, mut p1) = (1.0, x);
        if k == 0 {
            return 1.0;
        }
        for j in 1..k {
            let jf = j as f64;
            let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn legendre_values() {
        assert_eq!(phi_k(3, 0, 0.3).unwrap(), 1.0);
        assert!((phi_k(3, 1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((phi_k(3, 2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        for k in 0..30 {
            assert!((phi_k(3, k, -0.37).unwrap() - legendre(k, -0.37)).abs() < 1e-13);
        }
    }

    #[test]
    fn recurrence_matches_integral() {
        for n in 3..=8 {
            for k in [0, 1, 2, 5, 17, 50] {
                for x in [-0.95, -0.4, 0.0, 0.3, 0.95] {
                    let a = phi_k(n, k, x).unwrap();
                    let (b, im) = phi_k_integral(n, k, x).unwrap();
                    assert!((a - b).abs() < 1e-10, "n={n} k={k} x={x}: {a} vs {b}");
                    assert!(im < 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalization_and_bound() {
        for n in 3..=10 {
            for k in 0..60 {
                assert_eq!(phi_k(n, k, 1.0).unwrap(), 1.0);
                for i in 0..=40 {
                    let x = -1.0 + i as f64 / 20.0;
                    assert!(phi_k(n, k, x).unwrap().abs() <= 1.0 + 1e-12);
                }
            }
        }
        assert!(matches!(phi_k(3, 2, 1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn derivatives_match_legendre_and_finite_differences() {
        assert!((phi_k_derivative(3, 2, 1, 0.5).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(phi_k_derivative(3, 2, 3, 0.5).unwrap(), 0.0);
        for n in [3, 5, 8] {
            for k in [3, 7, 12] {
                for r in 1..=3 {
                    let x = 0.21;
                    let h = 1e-4;
                    let f = |t: f64| phi_k_derivative(n, k, r - 1, t).unwrap();
                    let fd = (f(x + h) - f(x - h)) / (2.0 * h);
                    let d = phi_k_derivative(n, k, r, x).unwrap();
                    assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "n={n} k={k} r={r}");
                }
            }
        }
        assert!(phi_k_derivative_checked(4, 3, 1, 0.9995).unwrap().1);
    }

    #[test]
    fn multiplicities() {
        for k in 0..=100 {
            assert_eq!(multiplicity(3, k).unwrap(), 2 * k as u128 + 1);
            assert_eq!(multiplicity(4, k).unwrap(), (k as u128 + 1).pow(2));
        }
        assert_eq!(multiplicity(4, 2).unwrap(), 9);
        assert!(matches!(multiplicity(60, 200), Err(Error::Range(_))));
        // harmonic count oracle: dim P_k - dim P_{k-2}
        let binom = |a: u128, b: u128| -> u128 {
            let mut c = 1u128;
            for i in 0..b {
                c = c * (a - i) / (i + 1);
            }
            c
        };
        for n in 3..=9u128 {
            for k in 0..40u128 {
                let oracle = binom(n + k - 1, k) - if k >= 2 { binom(n + k - 3, k - 2) } else { 0 };
                assert_eq!(multiplicity(n as usize, k as usize).unwrap(), oracle);
                let approx = multiplicity_f64(n as usize, k as usize);
                assert!((approx - oracle as f64).abs() < 1e-9 * oracle as f64);
                assert!((oracle as f64) <= 2.0 * (1.0 + k as f64).powi(n as i32 - 2));
            }
        }
    }

    #[test]
    fn rigidity_exponents_examples() {
        let e = RigidityExponents::new(5, 10.0).unwrap();
        assert!((e.alpha0 - 1.1).abs() < 1e-12);
        assert_eq!(e.floor_alpha(), 1);
        assert!((e.c[1] - 5.0 / 3.0).abs() < 1e-12);
        assert!((e.c[0] - e.c[1]).abs() < 1e-12);
        let e = RigidityExponents::new(3, 100.0).unwrap();
        assert!((e.c[0] - 0.48 * 3.0).abs() < 1e-12);
        let e = RigidityExponents::new(16, 100.0).unwrap();
        assert!((e.c[0] - 16.0 / 3.0).abs() < 1e-12);
        let e = RigidityExponents::new(6, 5.0).unwrap();
        assert!((e.alpha - (1.0 - DEFAULT_INTEGER_EPS)).abs() < 1e-12);
        assert!(RigidityExponents::new(4, 3.0).is_err());
        assert!((RigidityExponents::new(4, 4.0).unwrap().alpha0 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sp_norm_convergence_law() {
        let r0 = sp_derivative_norm(5, 4.0, 0, 0.0, 1e-6).unwrap();
        let SpNorm::Finite { value, terms, .. } = r0 else {
            panic!("expected finite");
        };
        // Cauchy check: doubling the cutoff moves the norm by less than tol
        let twice = sp_partial_power_sum(5, 4.0, 0, 0.0, 2 * terms).unwrap().powf(0.25);
        assert!((twice - value).abs() < 1e-6);
        assert!(matches!(
            sp_derivative_norm(5, 4.0, 1, 0.0, 1e-6).unwrap(),
            SpNorm::Divergent { .. }
        ));
    }

    #[test]
    fn partial_sum_matches_direct_summation() {
        let direct: f64 = (0..=300)
            .map(|k| multiplicity(5, k).unwrap() as f64 * phi_k(5, k, 0.3).unwrap().powi(2))
            .sum();
        let fast = sp_partial_power_sum(5, 2.0, 0, 0.3, 300).unwrap();
        assert!(((direct - fast) / direct).abs() < 1e-12);
    }

    #[test]
    fn holder_zero_on_diagonal() {
        assert_eq!(holder_constant_Tx(5, 4.0, 0.5, 0.1, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn averaging_constant_and_delta_one() {
        let grid = SphereGrid::lat_lon(30.0);
        let ones = averaging_operator_oracle(0.3, |_| 1.0, &grid, 360, 1e-12).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let f = |y: [f64; 3]| (y[0] + 2.0 * y[1] * y[2]).sin();
        let same = averaging_operator_oracle(1.0, f, &grid, 360, 1e-12).unwrap();
        for (x, v) in grid.nodes.iter().zip(same) {
            assert!((f(*x) - v).abs() < 1e-14);
        }
    }
}
