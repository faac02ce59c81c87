//! Higher chain rule and the change of variables behind the radial rigidity
//! estimates: partial Bell polynomials, Faà di Bruno, the maps `H_r`,
//! `H̃_r`, the rank choice and the SO(n,1) trace coefficients.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::binomial_f64;
use crate::sphere_spectra::{alpha0, rank_floor, RigidityExponents};

/// Partial Bell polynomial `B_{k,j}(z_1, ..., z_{k-j+1})` by the recurrence
/// `B_{n,k} = Σ_i binom(n-1, i-1) z_i B_{n-i,k-1}`.
pub fn bell_polynomial(k: usize, j: usize, z: &[f64]) -> Result<f64> {
    if j == 0 || j > k {
        return Err(Error::Input(format!("need 1 <= j <= k, got k = {k}, j = {j}")));
    }
    if z.len() < k - j + 1 {
        return Err(Error::Input(format!(
            "B_{{{k},{j}}} needs {} arguments, got {}",
            k - j + 1,
            z.len()
        )));
    }
    Ok(bell_table(k, z)[k][j])
}

/// Table `t[a][b] = B_{a,b}` for `a <= k`; `z` must have at least `k` entries
/// or be padded by zeros.
fn bell_table(k: usize, z: &[f64]) -> Vec<Vec<f64>> {
    let zi = |i: usize| z.get(i - 1).copied().unwrap_or(0.0);
    let mut t = vec![vec![0.0; k + 1]; k + 1];
    t[0][0] = 1.0;
    for a in 1..=k {
        for b in 1..=a {
            let mut acc = 0.0;
            for i in 1..=(a - b + 1) {
                acc += binomial_f64(a - 1, i - 1) * zi(i) * t[a - i][b - 1];
            }
            t[a][b] = acc;
        }
    }
    t
}

/// First `order` derivatives of a scalar function at a point:
/// `values[i]` is the `(i+1)`-th derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeJet {
    pub values: Vec<f64>,
}

impl DerivativeJet {
    pub fn new(values: Vec<f64>) -> Self {
        DerivativeJet { values }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }
}

/// `∂^k (f∘φ)(x) = Σ_j B_{k,j}(φ', ..., φ^{(k-j+1)}) f^{(j)}(φ(x))`.
pub fn faa_di_bruno(f_jet: &DerivativeJet, phi_jet: &DerivativeJet, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Input("order must be at least 1".into()));
    }
    if f_jet.order() < k || phi_jet.order() < k {
        return Err(Error::Input(format!(
            "jets of order {} and {} are too short for k = {k}",
            f_jet.order(),
            phi_jet.order()
        )));
    }
    let table = bell_table(k, &phi_jet.values);
    Ok((1..=k).map(|j| table[k][j] * f_jet.values[j - 1]).sum())
}

/// Stirling number of the second kind `S(k, j) = B_{k,j}(1, ..., 1)`.
pub fn stirling2(k: usize, j: usize) -> f64 {
    if j == 0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if j > k {
        return 0.0;
    }
    bell_table(k, &vec![1.0; k])[k][j]
}

/// `C_k = Σ_j S(k, j)`, the Bell number.
///
/// Every partition term of `B_{k,j}` is bounded by `max_s |z_s|^{k/s}`, so
/// `|∂^k (f∘φ)| <= C_k ‖f‖_{C^k} max_j |∂^j φ|^{k/j}` with
/// `‖f‖_{C^k} = max_{1<=j<=k} |f^{(j)}|`.
pub fn bell_constant(k: usize) -> f64 {
    (1..=k).map(|j| stirling2(k, j)).sum()
}

/// `C_k ‖f‖_{C^k} max_{1<=j<=k} s_j^{k/j}` with `s_j = sup |∂^j φ|`.
pub fn composition_derivative_bound(f_norm: f64, phi_jet_sups: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Input("order must be at least 1".into()));
    }
    if phi_jet_sups.len() < k {
        return Err(Error::Input("need k derivative sups".into()));
    }
    let m = phi_jet_sups[..k]
        .iter()
        .enumerate()
        .map(|(i, s)| s.abs().powf(k as f64 / (i + 1) as f64))
        .fold(0.0, f64::max);
    Ok(bell_constant(k) * f_norm * m)
}

/// `g(x) = (1 + 2x² + 2√(x² + x⁴))^{1/2} = x + √(1 + x²)`, the operator norm
/// of a 2×2 unimodular matrix with squared Hilbert–Schmidt norm `2 + 4x²`.
pub fn g_norm(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("g is defined for x >= 0, got {x}")));
    }
    Ok(x + x.hypot(1.0))
}

/// Diagonal frame `D = diag(e^r, e^s × (m-1), e^t × (n-m))` with
/// `r + (m-1)s + (n-m)t = 0`. `m = n` is the SO(n) frame `s = -r/(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionFrame {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl CompositionFrame {
    pub fn new(n: usize, m: usize, r: f64) -> Result<Self> {
        if n < 3 || m < 2 || m > n {
            return Err(Error::Domain(format!("need 2 <= m <= n, n >= 3; got n = {n}, m = {m}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("r must be positive, got {r}")));
        }
        let denom = (n + m - 2) as f64;
        let s = -((n - m + 2) as f64) / denom * r;
        let t = (m as f64 - 2.0) / denom * r;
        Ok(CompositionFrame {
            n,
            m,
            r,
            s,
            t,
            x_lo: (r + s).exp(),
            x_hi: (2.0 * r).exp(),
        })
    }

    /// SO(n) frame.
    pub fn so_n(n: usize, r: f64) -> Result<Self> {
        Self::new(n, n, r)
    }

    /// Frame with `x = e^{r+s}`: `r = log x · (n+m-2)/(2m-4)`.
    pub fn coupled(n: usize, m: usize, x: f64) -> Result<Self> {
        if m <= 2 {
            return Err(Error::Domain("coupling needs m > 2".into()));
        }
        if !(x > 1.0) {
            return Err(Error::Domain(format!("coupling needs x > 1, got {x}")));
        }
        let r = x.ln() * (n + m - 2) as f64 / (2.0 * m as f64 - 4.0);
        Self::new(n, m, r)
    }

    /// `r + (m-1)s + (n-m)t`, zero up to rounding.
    pub fn trace_residual(&self) -> f64 {
        self.r + (self.m as f64 - 1.0) * self.s + (self.n - self.m) as f64 * self.t
    }

    /// The diagonal of `D`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![self.r.exp()];
        d.extend(std::iter::repeat_n(self.s.exp(), self.m - 1));
        d.extend(std::iter::repeat_n(self.t.exp(), self.n - self.m));
        d
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let slack = 1e-12 * self.x_hi;
        if !(x >= self.x_lo - slack && x <= self.x_hi + slack) {
            return Err(Error::Domain(format!(
                "x = {x} outside [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        Ok(())
    }

    /// `H_r(x) = (x/e^{r+s} - e^{r+s}/x) / (2 sinh(r-s))`.
    #[allow(non_snake_case)]
    pub fn H_r(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let e = (self.r + self.s).exp();
        Ok((x / e - e / x) / (2.0 * (self.r - self.s).sinh()))
    }

    /// `∂^j H_r(x)` in closed form.
    #[allow(non_snake_case)]
    pub fn H_r_derivative(&self, j: usize, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let (r, s) = (self.r, self.s);
        match j {
            0 => self.H_r(x),
            1 => {
                Ok((1.0 + (2.0 * r + 2.0 * s).exp() / (x * x)) / ((2.0 * r).exp() - (2.0 * s).exp()))
            }
            _ => {
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                let fact: f64 = (1..=j).map(|i| i as f64).product();
                Ok(sign * fact / (((-2.0 * s).exp() - (-2.0 * r).exp()) * x.powi(j as i32 + 1)))
            }
        }
    }

    /// `A_r²` and `B_r²`: the normalized Hilbert–Schmidt norm of `D k_δ D`
    /// is `√(A_r² + δ²(B_r² - A_r²))`.
    pub fn a_b_squared(&self) -> (f64, f64) {
        let (r, s, t) = (self.r, self.s, self.t);
        let nf = self.n as f64;
        let rest = (self.n - self.m) as f64 * (4.0 * t).exp();
        let b2 = ((4.0 * r).exp() + (self.m as f64 - 1.0) * (4.0 * s).exp() + rest) / nf;
        let a2 = (2.0 * (2.0 * r + 2.0 * s).exp() + (self.m as f64 - 2.0) * (4.0 * s).exp() + rest)
            / nf;
        (a2, b2)
    }

    pub fn a_r(&self) -> f64 {
        self.a_b_squared().0.sqrt()
    }

    pub fn b_r(&self) -> f64 {
        self.a_b_squared().1.sqrt()
    }

    /// `H̃_r(x) = √((x²/A_r² - 1)/(B_r²/A_r² - 1))` on `[A_r, B_r]`.
    #[allow(non_snake_case)]
    pub fn H_tilde_r(&self, x: f64) -> Result<f64> {
        let (a2, b2) = self.a_b_squared();
        self.check_tilde_domain(x, a2, b2)?;
        Ok(((x * x / a2 - 1.0).max(0.0) / (b2 / a2 - 1.0)).sqrt())
    }

    fn check_tilde_domain(&self, x: f64, a2: f64, b2: f64) -> Result<()> {
        let (a, b) = (a2.sqrt(), b2.sqrt());
        if !(x >= a * (1.0 - 1e-12) && x <= b * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("x = {x} outside [{a}, {b}]")));
        }
        Ok(())
    }

    /// `∂^j H̃_r(x) = A_r^{1-j} (B_r² - A_r²)^{-1/2} H^{(j)}(x/A_r)` with
    /// `H(u) = √(u² - 1)`; valid for `x > A_r`.
    #[allow(non_snake_case)]
    pub fn H_tilde_r_derivative(&self, j: usize, x: f64) -> Result<f64> {
        let (a2, b2) = self.a_b_squared();
        self.check_tilde_domain(x, a2, b2)?;
        if j == 0 {
            return self.H_tilde_r(x);
        }
        let a = a2.sqrt();
        let u = x / a;
        if u <= 1.0 {
            return Err(Error::Domain("derivatives of H̃_r blow up at x = A_r".into()));
        }
        let scale = a.powi(1 - j as i32) / (b2 - a2).sqrt();
        Ok(scale * sqrt_derivative(j, u))
    }
}

/// `d^j/du^j √(u² - 1) = P_j(u) (u² - 1)^{1/2 - j}` with `P_1 = u` and
/// `P_{j+1} = (u² - 1) P_j' + (1 - 2j) u P_j`.
pub fn sqrt_derivative(j: usize, u: f64) -> f64 {
    if j == 0 {
        return (u * u - 1.0).sqrt();
    }
    // coefficients of P_j, lowest degree first
    let mut p = vec![0.0, 1.0];
    for jj in 1..j {
        let mut next = vec![0.0; p.len() + 1];
        for (deg, c) in p.iter().enumerate() {
            if deg >= 1 {
                let d = deg as f64 * c;
                next[deg + 1] += d;
                next[deg - 1] -= d;
            }
            next[deg + 1] += (1.0 - 2.0 * jj as f64) * c;
        }
        p = next;
    }
    let val = p.iter().rev().fold(0.0, |acc, c| acc * u + c);
    val * (u * u - 1.0).powf(0.5 - j as f64)
}

/// `C` in `max_{1<=j<=k} |∂^j H_r(x)|^{k/j} <= C / ((x-1)^k x^{n/(m-2)})`,
/// measured at the coupling `x = e^{r+s}` over the sample `xs`.
pub fn hr_derivative_constant(n: usize, m: usize, k: usize, xs: &[f64]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &x in xs {
        let frame = CompositionFrame::coupled(n, m, x)?;
        let mut worst: f64 = 0.0;
        for j in 1..=k {
            let d = frame.H_r_derivative(j, x)?.abs();
            worst = worst.max(d.powf(k as f64 / j as f64));
        }
        let target = (x - 1.0).powi(k as i32) * x.powf(n as f64 / (m as f64 - 2.0));
        best = best.max(worst * target);
    }
    Ok(best)
}

/// `max_x |∂^j H̃_r(x)| x^{j + n/(m-2)}` over `xs` with the coupled frame
/// `x = e^{r+s}`.
pub fn h_tilde_derivative_constant(n: usize, m: usize, j: usize, xs: &[f64]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &x in xs {
        let frame = CompositionFrame::coupled(n, m, x)?;
        let d = frame.H_tilde_r_derivative(j, x)?.abs();
        best = best.max(d * x.powf(j as f64 + n as f64 / (m as f64 - 2.0)));
    }
    Ok(best)
}

/// Result of the rank choice for derivative order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankChoice {
    pub m: usize,
    /// `β = (m-2)/2 - (m-1)/p`.
    pub beta: f64,
    /// `c_k = n/(m-2)`.
    pub c_k: f64,
}

fn beta_of(m: usize, p: f64) -> f64 {
    (m as f64 - 2.0) / 2.0 - (m as f64 - 1.0) / p
}

/// Smallest `m` with `(m-2)/2 - (m-1)/p > k`, found by direct search and
/// cross-checked against `m - 2 = [(2k+1)/(1-2/p)]`.
pub fn rank_choice(n: usize, k: usize, p: f64) -> Result<RankChoice> {
    if k == 0 {
        return Err(Error::Input("rank choice is defined for k >= 1".into()));
    }
    let exps = RigidityExponents::new(n, p)?;
    if k as f64 >= exps.alpha {
        return Err(Error::Range(format!(
            "k = {k} is not below alpha = {}",
            exps.alpha
        )));
    }
    let mut m = 3;
    while beta_of(m, p) <= k as f64 + 1e-9 {
        m += 1;
    }
    let formula = rank_floor(k, p) + 2;
    if formula != m {
        return Err(Error::Numeric(format!(
            "rank search gave m = {m}, floor formula gives {formula}"
        )));
    }
    let beta = beta_of(m, p);
    if (beta - beta.round()).abs() < 1e-12 {
        return Err(Error::Numeric(format!("beta = {beta} is an integer")));
    }
    debug_assert!(m <= n && alpha0(m, p) > k as f64);
    Ok(RankChoice {
        m,
        beta,
        c_k: n as f64 / (m as f64 - 2.0),
    })
}

/// Coefficients of `tr((D k_δ D)ᵀ(D k_δ D)) = a δ² + b δ + c` for the boost
/// `D(r)` of SO(n,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoN1Coefficients {
    pub n: usize,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn so_n1_coefficients(n: usize, r: f64) -> Result<SoN1Coefficients> {
    if n < 2 {
        return Err(Error::Domain("SO(n,1) needs n >= 2".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    Ok(SoN1Coefficients {
        n,
        r,
        a: 4.0 * r.sinh().powi(4),
        b: 2.0 * (2.0 * r).sinh().powi(2),
        c: n as f64 - 3.0 + 4.0 * r.cosh().powi(4),
    })
}

impl SoN1Coefficients {
    pub fn trace(&self, delta: f64) -> f64 {
        self.a * delta * delta + self.b * delta + self.c
    }

    /// Inverse of `δ ↦ aδ² + bδ + c` on `[c, a + b + c]`.
    pub fn g_r(&self, x: f64) -> Result<f64> {
        let top = self.a + self.b + self.c;
        let slack = 1e-12 * top;
        if !(x >= self.c - slack && x <= top + slack) {
            return Err(Error::Domain(format!("x = {x} outside [{}, {top}]", self.c)));
        }
        let h = self.b / (2.0 * self.a);
        Ok(-h + (h * h + (x - self.c) / self.a).max(0.0).sqrt())
    }
}

/// Barycentric interpolant on Chebyshev points of the second kind.
#[derive(Debug, Clone)]
pub struct ChebyshevInterpolant {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl ChebyshevInterpolant {
    pub fn new<F: Fn(f64) -> f64>(lo: f64, hi: f64, count: usize, f: F) -> Self {
        let count = count.max(2);
        let nodes: Vec<f64> = (0..count)
            .map(|i| {
                let t = (std::f64::consts::PI * i as f64 / (count - 1) as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * t
            })
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        ChebyshevInterpolant {
            lo,
            hi,
            nodes,
            values,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.nodes.len() - 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (&xi, &fi)) in self.nodes.iter().zip(&self.values).enumerate() {
            let diff = x - xi;
            if diff == 0.0 {
                return fi;
            }
            let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == last {
                w *= 0.5;
            }
            num += w * fi / diff;
            den += w / diff;
        }
        num / den
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Tabulate `ψ_r(δ) = φ(e^{r+s} g(δ sinh(r-s)))` on `[0, 1]` and report the
/// largest error of `ψ_r ∘ H_r` against `φ` on `samples` points of the frame
/// domain.
pub fn reconstruction_error<F: Fn(f64) -> f64>(
    frame: &CompositionFrame,
    phi: F,
    nodes: usize,
    samples: usize,
) -> Result<f64> {
    let e = (frame.r + frame.s).exp();
    let sh = (frame.r - frame.s).sinh();
    let psi = ChebyshevInterpolant::new(0.0, 1.0, nodes, |d| {
        phi(e * g_norm(d * sh).expect("d >= 0"))
    });
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = frame.x_lo + (frame.x_hi - frame.x_lo) * i as f64 / (samples - 1).max(1) as f64;
        let h = frame.H_r(x)?.clamp(0.0, 1.0);
        worst = worst.max((psi.eval(h) - phi(x)).abs());
    }
    Ok(worst)
}
