//! Radial profiles `φ` on `(1, ∞)` and the finite checks of the radial
//! rigidity inequalities: existence of `φ_∞`, decay `x^{-c_0}`, derivative
//! decay `(x-1)^{-k} x^{-c_k}` and the Hölder bound at the top order.
//!
//! Boundedness of a weighted quantity is tested on consecutive decades: the
//! sup over the outermost window may not exceed the sup over the others by
//! more than the relative tolerance.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{binomial_f64, geomspace};
use crate::report::{CheckRecord, Verdict};
use crate::sphere_spectra::RigidityExponents;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type DerivFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct RadialProfile {
    pub name: String,
    f: Arc<ScalarFn>,
    deriv: Option<Arc<DerivFn>>,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("name", &self.name)
            .field("analytic_derivatives", &self.deriv.is_some())
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialProfile {
            name: name.into(),
            f: Arc::new(f),
            deriv: None,
        }
    }

    /// Attach closed-form derivatives `(k, x) ↦ φ^{(k)}(x)`, `k >= 1`.
    pub fn with_derivatives<D>(mut self, d: D) -> Self
    where
        D: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(d));
        self
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile::new(format!("const({c})"), move |_| c).with_derivatives(|_, _| 0.0)
    }

    /// `(1 + x)^{-a}`.
    pub fn power_decay(a: f64) -> Self {
        RadialProfile::new(format!("(1+x)^-{a}"), move |x| (1.0 + x).powf(-a)).with_derivatives(
            move |k, x| {
                let mut c = 1.0;
                for i in 0..k {
                    c *= -(a + i as f64);
                }
                c * (1.0 + x).powf(-a - k as f64)
            },
        )
    }

    /// `(1 + log x)^{-a}`.
    pub fn log_power(a: f64) -> Self {
        RadialProfile::new(format!("(1+log x)^-{a}"), move |x| (1.0 + x.ln()).powf(-a))
    }

    /// `sin(ω x)`.
    pub fn sine(omega: f64) -> Self {
        RadialProfile::new(format!("sin({omega}x)"), move |x| (omega * x).sin()).with_derivatives(
            move |k, x| omega.powi(k as i32) * (omega * x + k as f64 * std::f64::consts::FRAC_PI_2).sin(),
        )
    }

    /// `hi` on `x < at`, `lo` on `x >= at`.
    pub fn step(at: f64, hi: f64, lo: f64) -> Self {
        RadialProfile::new(format!("step({at})"), move |x| if x < at { hi } else { lo })
    }

    /// Piecewise-linear interpolation of `(x, φ)` samples, constant outside.
    pub fn tabulated(name: impl Into<String>, mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Input("a tabulated profile needs at least two samples".into()));
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Input("tabulated profile has non-finite samples".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Input("tabulated profile has repeated abscissae".into()));
        }
        let s = Arc::new(samples);
        Ok(RadialProfile::new(name, move |x| {
            let idx = s.partition_point(|(xi, _)| *xi <= x);
            if idx == 0 {
                return s[0].1;
            }
            if idx == s.len() {
                return s[s.len() - 1].1;
            }
            let (x0, y0) = s[idx - 1];
            let (x1, y1) = s[idx];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.deriv.is_some()
    }

    /// `φ^{(k)}(x)`: closed form when attached, otherwise central differences
    /// with one Richardson level; the stencil stays inside `(1, ∞)`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.eval(x);
        }
        if let Some(d) = &self.deriv {
            return d(k, x);
        }
        let reach = 0.9 * (x - 1.0) / (0.5 * k as f64).max(1.0);
        let h = (x * f64::EPSILON.powf(1.0 / (k as f64 + 4.0))).min(reach);
        let coarse = self.central_difference(k, x, h);
        let fine = self.central_difference(k, x, 0.5 * h);
        (4.0 * fine - coarse) / 3.0
    }

    fn central_difference(&self, k: usize, x: f64, h: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial_f64(k, i) * self.eval(x + (k as f64 / 2.0 - i as f64) * h);
        }
        acc / h.powi(k as i32)
    }
}

/// Sampling plan for the rigidity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileGrid {
    /// Smallest `x - 1` sampled is `10^{-near_one_decades}`.
    pub near_one_decades: u32,
    /// Largest `x` sampled is `10^{far_decades}`.
    pub far_decades: u32,
    pub per_decade: usize,
    /// `φ_∞` is read off at this point.
    pub limit_point: f64,
    /// Relative steps `(y - x)/(x - 1)` for the Hölder quotients.
    pub holder_scales: Vec<f64>,
    pub tol: f64,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid {
            near_one_decades: 4,
            far_decades: 7,
            per_decade: 48,
            limit_point: 1e14,
            holder_scales: vec![1e-2, 1e-3, 1e-4],
            tol: 1e-3,
        }
    }
}

impl ProfileGrid {
    /// Decade windows of `x - 1`, innermost first.
    fn windows(&self) -> Vec<Vec<f64>> {
        let lo = -(self.near_one_decades as i32);
        let hi = self.far_decades as i32;
        (lo..hi)
            .map(|d| {
                geomspace(10f64.powi(d), 10f64.powi(d + 1), self.per_decade)
                    .into_iter()
                    .map(|u| 1.0 + u)
                    .collect()
            })
            .collect()
    }
}

/// Whether the outermost entry stays within `(1 + tol)` of the others.
fn bounded_last(sups: &[f64], tol: f64) -> bool {
    let (last, rest) = match sups.split_last() {
        Some(v) => v,
        None => return true,
    };
    let prev = rest.iter().copied().fold(0.0, f64::max);
    last.is_finite() && (*last <= (1.0 + tol) * prev || *last <= f64::MIN_POSITIVE)
}

fn window_sups<F: Fn(f64) -> f64>(windows: &[Vec<f64>], w: F) -> Vec<f64> {
    windows
        .iter()
        .map(|win| {
            win.iter().map(|&x| w(x)).fold(0.0, |a: f64, b| {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            })
        })
        .collect()
}

/// `|φ(x) - φ_∞| x^{c}` bounded for large `x`. `on_fail` is the verdict
/// used when it is not.
pub fn decay_record(
    phi: &RadialProfile,
    c: f64,
    name: &str,
    anchor: &str,
    grid: &ProfileGrid,
    on_fail: Verdict,
) -> CheckRecord {
    let limit = phi.eval(grid.limit_point);
    let windows = grid.windows();
    let sups = window_sups(&windows, |x| (phi.eval(x) - limit).abs() * x.powf(c));
    let measured = sups.iter().copied().fold(0.0, f64::max);
    let ok = bounded_last(&sups, grid.tol);
    let last = sups.last().copied().unwrap_or(0.0);
    CheckRecord::new(name, anchor, measured, if ok { Verdict::Pass } else { on_fail })
        .with_tolerance(grid.tol)
        .with_note(format!("exponent {c}; outermost decade sup {last:e}"))
}

/// Records for the rigidity inequalities of rank `exps.n` at `exps.p`.
pub fn rigidity_records(phi: &RadialProfile, exps: &RigidityExponents, grid: &ProfileGrid) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let windows = grid.windows();
    let n = exps.n as f64;

    let tail: Vec<f64> = windows[windows.len() - 2..]
        .iter()
        .map(|win| {
            let (lo, hi) = win.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                let v = phi.eval(x);
                (lo.min(v), hi.max(v))
            });
            hi - lo
        })
        .collect();
    let scale = phi.eval(grid.limit_point).abs().max(1.0);
    let limit_ok = tail[1] <= 0.9 * tail[0] || tail[1] <= 1e-9 * scale;
    out.push(
        CheckRecord::new(
            "limit-existence",
            "rigidity i): φ has a limit φ_∞ at infinity",
            tail[1],
            if limit_ok { Verdict::Pass } else { Verdict::Fail },
        )
        .with_bound((0.9 * tail[0]).max(1e-9 * scale))
        .with_note("oscillation over the outermost decade versus the one before"),
    );

    out.push(decay_record(
        phi,
        exps.c[0],
        "decay-c0",
        "rigidity i): |φ(x) - φ_∞| <= C x^{-c_0}",
        grid,
        Verdict::Fail,
    ));

    let top = exps.floor_alpha();
    for k in 1..=top {
        let ck = exps.c[k];
        let sups = window_sups(&windows, |x| {
            phi.derivative(k, x).abs() * (x - 1.0).powi(k as i32) * x.powf(ck)
        });
        let measured = sups.iter().copied().fold(0.0, f64::max);
        let mut reversed = sups.clone();
        reversed.reverse();
        let ok = bounded_last(&sups, grid.tol) && bounded_last(&reversed, grid.tol);
        out.push(
            CheckRecord::new(
                format!("derivative-k{k}"),
                format!("rigidity ii): |φ^({k})(x)| <= C (x-1)^-{k} x^-c_{k}"),
                measured,
                if ok { Verdict::Pass } else { Verdict::Fail },
            )
            .with_tolerance(grid.tol)
            .with_note(format!("c_{k} = {ck}")),
        );
    }

    let beta = exps.alpha - top as f64;
    let lo = 10f64.powi(-(grid.near_one_decades.min(3) as i32));
    let hi = 10f64.powi(grid.far_decades.min(4) as i32);
    let weight_exp = n / (n - 2.0);
    let mut per_scale = Vec::with_capacity(grid.holder_scales.len());
    for &h in &grid.holder_scales {
        let steps = ((hi / lo).ln() / h.ln_1p()).ceil() as usize;
        let mut best: f64 = 0.0;
        let mut u = lo;
        let mut prev = phi.derivative(top, 1.0 + u);
        for _ in 0..steps {
            let next_u = u * (1.0 + h);
            let cur = phi.derivative(top, 1.0 + next_u);
            let x = 1.0 + u;
            let q = (cur - prev).abs() / (next_u - u).powf(beta);
            let w = ((x - 1.0) * x.powf(weight_exp)).powf(exps.alpha);
            let v = q * w;
            best = if best.is_nan() || v.is_nan() { f64::NAN } else { best.max(v) };
            prev = cur;
            u = next_u;
        }
        per_scale.push(best);
    }
    let ok = bounded_last(&per_scale, grid.tol.max(1e-2));
    out.push(
        CheckRecord::new(
            "holder-top",
            format!("rigidity iii): Hölder constant of φ^({top}) of order {beta:.4}"),
            per_scale.last().copied().unwrap_or(0.0),
            if ok { Verdict::Pass } else { Verdict::Fail },
        )
        .with_tolerance(grid.tol.max(1e-2))
        .with_note(format!("weighted quotients at relative steps {:?}: {:?}", grid.holder_scales, per_scale)),
    );
    out
}
