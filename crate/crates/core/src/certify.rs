//! Certification pipelines behind the command-line tool: built-in symbol
//! families, the Hörmander–Mikhlin sweep, the rigidity command and thin
//! wrappers over the sphere, Schur and geometry modules.

use nalgebra::DMatrix;
use rand::Rng;
use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euclidean_analysis::eta;
use crate::group_geometry::{
    bracevert, default_max_order, haar_orthogonal, lie_derivative_estimate, sigma_n, weyl_ball_volume_with_error,
    GroupElement, LieBasis, MultiIndex, SymbolHandle,
};
use crate::numerics::{linear_fit, seeded_rng};
use crate::profile::{decay_record, RadialProfile};
use crate::report::{CertificationReport, CheckRecord, Table, Verdict};
use crate::schur_numerics::{
    rigidity_witness, schur_norm_exact_p2, schur_norm_lower_bound, TruncatedSchurMultiplier, WitnessConfig,
    WitnessDesign,
};
use crate::sphere_spectra::{alpha0, phi_k, phi_k_derivative, phi_k_integral, sp_derivative_norm, SpNorm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `f(t) = (1 + t)^{-a}`.
    RadialPower,
    /// `f(t) = (1 + log(1 + t))^{-a}`.
    RadialLogPower,
    /// `f(t) = exp(1 - 1/(1 - (t/w)²))` on `t < w`, 0 beyond.
    HmBump,
    /// `g ↦ (g gᵀ)_{11} / tr(g gᵀ)`, bounded and not radial.
    RieszLike,
    /// Piecewise-linear table `(t, f(t))`.
    CsvSampled,
    /// `f(t) = sin(ω t)`.
    Sine,
    /// `f(t) = 1` on `t < at`, 0 beyond.
    Step,
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "radial-power" => FamilyKind::RadialPower,
            "radial-log-power" => FamilyKind::RadialLogPower,
            "hm-bump" => FamilyKind::HmBump,
            "riesz-like" => FamilyKind::RieszLike,
            "csv-sampled" => FamilyKind::CsvSampled,
            "sine" => FamilyKind::Sine,
            "step" => FamilyKind::Step,
            _ => return Err(Error::Input(format!("unknown symbol family '{s}'"))),
        })
    }
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::RadialPower => "radial-power",
            FamilyKind::RadialLogPower => "radial-log-power",
            FamilyKind::HmBump => "hm-bump",
            FamilyKind::RieszLike => "riesz-like",
            FamilyKind::CsvSampled => "csv-sampled",
            FamilyKind::Sine => "sine",
            FamilyKind::Step => "step",
        }
    }
}

/// A built-in symbol family with its parameters.
///
/// Radial families are a scalar function `f`. The Hörmander–Mikhlin sweep
/// uses `m(g) = f(⌊g⌋)`; the rigidity command uses `φ(x) = f(x)` on
/// `x = |g| > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFamily {
    pub kind: FamilyKind,
    pub params: BTreeMap<String, f64>,
    /// Support radius in `⌊g⌋`: the symbol is multiplied by `η(2t/R)`.
    pub cutoff: Option<f64>,
    pub table: Option<Vec<(f64, f64)>>,
}

impl SymbolFamily {
    pub fn new(kind: FamilyKind) -> Self {
        SymbolFamily {
            kind,
            params: BTreeMap::new(),
            cutoff: None,
            table: None,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_cutoff(mut self, r: f64) -> Self {
        self.cutoff = Some(r);
        self
    }

    pub fn with_table(mut self, table: Vec<(f64, f64)>) -> Self {
        self.table = Some(table);
        self
    }

    /// Parse `key=value` pairs.
    pub fn parse_params(mut self, pairs: &[String]) -> Result<Self> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("parameter '{p}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("parameter '{k}' has a non-numeric value")))?;
            self.params.insert(k.trim().to_string(), v);
        }
        Ok(self)
    }

    fn get(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.params.get(key).copied().or(default) {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(Error::Input(format!("parameter {key} = {v} is not finite"))),
            None => Err(Error::Input(format!("family {} needs parameter {key}", self.kind.name()))),
        }
    }

    fn validate(&self) -> Result<()> {
        let allowed: &[&str] = match self.kind {
            FamilyKind::RadialPower | FamilyKind::RadialLogPower => &["a"],
            FamilyKind::HmBump => &["w"],
            FamilyKind::Sine => &["omega"],
            FamilyKind::Step => &["at"],
            FamilyKind::RieszLike | FamilyKind::CsvSampled => &[],
        };
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Input(format!("family {} has no parameter {k}", self.kind.name())));
        }
        if let Some(r) = self.cutoff {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Input(format!("cutoff must be positive, got {r}")));
            }
        }
        if self.kind == FamilyKind::HmBump && !(self.get("w", Some(1.0))? > 0.0) {
            return Err(Error::Input("hm-bump width must be positive".into()));
        }
        if self.kind == FamilyKind::Step && !(self.get("at", Some(2.0))? > 1.0) {
            return Err(Error::Input("step location must exceed 1".into()));
        }
        Ok(())
    }

    /// The scalar function `f`, or an input error for non-radial kinds.
    pub fn scalar(&self) -> Result<RadialProfile> {
        self.validate()?;
        let base = match self.kind {
            FamilyKind::RadialPower => RadialProfile::power_decay(self.get("a", None)?),
            FamilyKind::RadialLogPower => {
                let a = self.get("a", None)?;
                RadialProfile::new(format!("(1+log(1+t))^-{a}"), move |t| (1.0 + t.ln_1p()).powf(-a))
            }
            FamilyKind::HmBump => {
                let w = self.get("w", Some(1.0))?;
                RadialProfile::new(format!("bump({w})"), move |t| {
                    let u = t / w;
                    if u.abs() >= 1.0 {
                        0.0
                    } else {
                        (1.0 - 1.0 / (1.0 - u * u)).exp()
                    }
                })
            }
            FamilyKind::Sine => RadialProfile::sine(self.get("omega", Some(1.0))?),
            FamilyKind::Step => RadialProfile::step(self.get("at", Some(2.0))?, 1.0, 0.0),
            FamilyKind::CsvSampled => {
                let table = self
                    .table
                    .clone()
                    .ok_or_else(|| Error::Input("csv-sampled needs a table".into()))?;
                RadialProfile::tabulated("csv-sampled", table)?
            }
            FamilyKind::RieszLike => {
                return Err(Error::Input("riesz-like is not a radial family".into()));
            }
        };
        Ok(match self.cutoff {
            None => base,
            Some(r) => {
                let name = format!("{}·η(2t/{r})", base.name);
                RadialProfile::new(name, move |t| base.eval(t) * eta(2.0 * t / r))
            }
        })
    }

    /// `m(g) = f(⌊g⌋)`, or the Riesz-like symbol.
    pub fn symbol(&self) -> Result<SymbolHandle> {
        self.validate()?;
        if self.kind == FamilyKind::RieszLike {
            return Ok(SymbolHandle::real("riesz-like", |g| {
                let gg = g * g.transpose();
                gg[(0, 0)] / gg.trace()
            }));
        }
        let f = self.scalar()?;
        let name = f.name.clone();
        let mut s = SymbolHandle::new(name, move |g| {
            let gm = GroupElement::new(g.clone())?;
            Ok(num_complex::Complex64::new(f.eval(bracevert(&gm)?), 0.0))
        })
        .with_radial(true);
        if let Some(r) = self.cutoff {
            s = s.with_support_radius(r.ln_1p());
        }
        Ok(s)
    }

    /// The profile for the rigidity command.
    pub fn profile(&self) -> Result<RadialProfile> {
        self.scalar()
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.name(),
            "params": self.params,
            "cutoff": self.cutoff,
            "table_rows": self.table.as_ref().map(|t| t.len()),
        })
    }

    fn digest_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        if let Some(t) = &self.table {
            for (x, y) in t {
                out.extend_from_slice(&x.to_le_bytes());
                out.extend_from_slice(&y.to_le_bytes());
            }
        }
        out
    }
}

/// Settings for [`certify_hm`].
#[derive(Debug, Clone, PartialEq)]
pub struct HmConfig {
    pub n: usize,
    /// Highest derivative order; defaults to `[n²/2] + 1`.
    pub order: Option<usize>,
    /// Number of shell radii and of points per ray.
    pub levels: usize,
    pub seed: u64,
    /// Multi-indices sampled per order when there are more than this many.
    pub gamma_samples: usize,
    pub rays: usize,
    /// Spacing of ray parameters `s_j = j · ray_step`.
    pub ray_step: f64,
    /// Relative growth allowed between the outer ray points and the rest.
    pub tol: f64,
}

impl HmConfig {
    pub fn new(n: usize) -> Self {
        HmConfig {
            n,
            order: None,
            levels: 8,
            seed: 0,
            gamma_samples: 12,
            rays: 3,
            ray_step: 1.5,
            tol: 0.1,
        }
    }
}

fn multi_indices(dim: usize, order: usize, cap: usize, rng: &mut impl Rng) -> Vec<MultiIndex> {
    let total = (dim as f64).powi(order as i32);
    if total <= cap as f64 {
        return MultiIndex::all_of_order(dim, order);
    }
    let mut out: Vec<MultiIndex> = (0..dim.min(cap / 2).max(1))
        .map(|j| MultiIndex::new(vec![j * (dim / dim.min(cap / 2).max(1)); order]))
        .collect();
    while out.len() < cap {
        out.push(MultiIndex::new((0..order).map(|_| rng.random_range(0..dim)).collect()));
    }
    out
}

/// Unit traceless diagonal direction with distinct, irregular entries.
fn generic_direction(n: usize, ray: usize) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n)
        .map(|i| ((i + 1) as f64 * (0.754877666 + 0.1 * ray as f64)).fract() + i as f64)
        .collect();
    z.reverse();
    let mean = z.iter().sum::<f64>() / n as f64;
    z.iter_mut().for_each(|v| *v -= mean);
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.iter_mut().for_each(|v| *v /= norm);
    z
}

/// Hörmander–Mikhlin sweep: `max_γ ⌊g⌋^{|γ|} |d^γ m(g)|` per order over
/// local shells `exp(t X)` and asymptotic rays `k_1 exp(s Z) k_2`.
pub fn certify_hm(family: &SymbolFamily, cfg: &HmConfig) -> Result<CertificationReport> {
    let n = cfg.n;
    if !(2..=6).contains(&n) {
        return Err(Error::Input(format!("n must lie in 2..=6, got {n}")));
    }
    let max_order = default_max_order(n);
    let order = cfg.order.unwrap_or(max_order);
    if order > max_order {
        return Err(Error::Input(format!("order {order} exceeds [n²/2]+1 = {max_order}")));
    }
    if cfg.levels < 3 {
        return Err(Error::Input("at least three grid levels are needed".into()));
    }
    let m = family.symbol()?;
    let mut report = CertificationReport::new("certify-hm");
    report.param("family", family.describe());
    report.param("n", n);
    report.param("order", order);
    report.param("grid_levels", cfg.levels);
    report.param("gamma_samples", cfg.gamma_samples);
    report.seed(cfg.seed);
    report.set_input_digest(&family.digest_bytes());

    let basis = LieBasis::new(n);
    let dim = basis.len();
    let mut rng = seeded_rng(cfg.seed, 7);
    let gammas: Vec<Vec<MultiIndex>> = (0..=order)
        .map(|k| multi_indices(dim, k, cfg.gamma_samples, &mut rng))
        .collect();

    let mut shells = Vec::new();
    let x: DMatrix<f64> = {
        let mut acc = DMatrix::zeros(n, n);
        for b in &basis.basis {
            acc += b * rng.random_range(-1.0..1.0);
        }
        let norm = acc.norm();
        acc / norm
    };
    for j in 0..cfg.levels {
        shells.push(GroupElement::exp_algebra(&(&x * 2f64.powi(-(j as i32))))?);
    }
    let mut rays: Vec<Vec<GroupElement>> = Vec::new();
    for r in 0..cfg.rays {
        let k1 = haar_orthogonal(n, &mut rng);
        let k2 = haar_orthogonal(n, &mut rng);
        let z = generic_direction(n, r);
        let mut pts = Vec::new();
        for j in 1..=cfg.levels {
            let s = j as f64 * cfg.ray_step;
            let d = GroupElement::diag_exp(&z.iter().map(|v| v * s).collect::<Vec<_>>());
            pts.push(GroupElement::new(&k1 * d.matrix() * &k2)?);
        }
        rays.push(pts);
    }

    // values[k] for a point: (weighted max, raw max)
    let eval_point = |g: &GroupElement| -> Result<Vec<(f64, f64)>> {
        let floor = bracevert(g)?;
        let mut out = Vec::with_capacity(order + 1);
        for (k, set) in gammas.iter().enumerate() {
            let mut raw: f64 = 0.0;
            for gamma in set {
                let est = lie_derivative_estimate(&m, g, gamma, &basis, 1e-4)?;
                raw = raw.max(est.value.norm());
            }
            out.push((floor.powi(k as i32) * raw, raw));
        }
        Ok(out)
    };

    let mut table = Table::new(&["kind", "index", "floor", "order", "weighted", "raw"]);
    let mut constants = vec![0.0f64; order + 1];
    for (j, g) in shells.iter().enumerate() {
        let vals = eval_point(g)?;
        let floor = bracevert(g)?;
        for (k, (w, r)) in vals.iter().enumerate() {
            constants[k] = constants[k].max(*w);
            table.push(vec![0.0, j as f64, floor, k as f64, *w, *r]);
        }
    }
    let mut ray_vals: Vec<Vec<(f64, Vec<(f64, f64)>)>> = Vec::new();
    for (ri, pts) in rays.iter().enumerate() {
        let mut seq = Vec::new();
        for (j, g) in pts.iter().enumerate() {
            let vals = eval_point(g)?;
            let floor = bracevert(g)?;
            for (k, (w, r)) in vals.iter().enumerate() {
                constants[k] = constants[k].max(*w);
                table.push(vec![1.0 + ri as f64, j as f64, floor, k as f64, *w, *r]);
            }
            seq.push((floor, vals));
        }
        ray_vals.push(seq);
    }

    let mut all_pass = true;
    for k in 0..=order {
        let mut growing = false;
        for seq in &ray_vals {
            let w: Vec<f64> = seq.iter().map(|(_, v)| v[k].0).collect();
            let (last, rest) = w.split_last().expect("rays are non-empty");
            let prev = rest.iter().copied().fold(0.0, f64::max);
            if !(*last <= (1.0 + cfg.tol) * prev || *last <= 1e-12) {
                growing = true;
            }
        }
        let verdict = if constants[k].is_finite() && !growing {
            Verdict::Pass
        } else {
            all_pass = false;
            Verdict::Fail
        };
        report.push(
            CheckRecord::new(
                format!("hm-order-{k}"),
                "Hörmander–Mikhlin: ⌊g⌋^|γ| |d^γ m(g)| <= C_hm",
                constants[k],
                verdict,
            )
            .with_tolerance(cfg.tol)
            .with_note(format!("{} multi-indices sampled", gammas[k].len())),
        );
    }
    let c_hm = constants.iter().copied().fold(0.0, f64::max);
    report.push(CheckRecord::new(
        "hm-constant",
        "Hörmander–Mikhlin: measured C_hm over all orders",
        c_hm,
        if all_pass { Verdict::Pass } else { Verdict::Fail },
    ));

    let slope_of = |k: usize| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for seq in &ray_vals {
            for (floor, vals) in seq.iter().skip(seq.len() / 2) {
                if vals[k].1 > 0.0 && *floor > 1.0 {
                    xs.push(floor.ln());
                    ys.push(vals[k].1.ln());
                }
            }
        }
        (xs.len() >= 2).then(|| linear_fit(&xs, &ys).0)
    };
    let scale = ray_vals
        .iter()
        .flat_map(|s| s.iter().map(|(_, v)| v[0].1))
        .fold(0.0, f64::max);
    let decay = slope_of(0).map(|s| -s).unwrap_or(0.0);
    report.push(
        CheckRecord::new(
            "decay-exponent",
            "fitted decay exponent of |m| along rays",
            decay,
            Verdict::Pass,
        )
        .with_note(format!("σ_n + 1 = {}", sigma_n(n) + 1)),
    );

    if order >= 1 {
        let negligible = |k: usize| {
            ray_vals
                .iter()
                .flat_map(|s| s.iter().map(move |(_, v)| v[k].1))
                .all(|v| v <= 1e-9 * scale.max(1e-300))
        };
        let (a, b) = (order - 1, order);
        let record = if a == 0 || negligible(a) && negligible(b) {
            CheckRecord::new(
                "decay-propagation",
                "top two derivative orders decay at the same rate",
                0.0,
                Verdict::Pass,
            )
            .with_note(if a == 0 { "order below 2" } else { "derivatives vanish on the rays" })
        } else {
            match (slope_of(a), slope_of(b)) {
                (Some(sa), Some(sb)) => {
                    let diff = (sa - sb).abs();
                    let bound = 0.1 * sa.abs().max(1.0);
                    CheckRecord::upper(
                        "decay-propagation",
                        "top two derivative orders decay at the same rate",
                        diff,
                        bound,
                        0.0,
                    )
                    .with_note(format!("slopes {sa:.4} (order {a}) and {sb:.4} (order {b})"))
                }
                _ => CheckRecord::new(
                    "decay-propagation",
                    "top two derivative orders decay at the same rate",
                    f64::NAN,
                    Verdict::Inconclusive,
                ),
            }
        };
        report.push(record);
    }
    report.tables.insert("samples".into(), table);
    Ok(report)
}

/// Settings for [`cmd_rigidity`].
#[derive(Debug, Clone)]
pub struct RigidityConfig {
    pub n: usize,
    pub p: f64,
    pub witness: WitnessConfig,
    /// Explicit point set; if absent and `orbit_sizes` is non-empty the
    /// D·SO(n) orbit design is used.
    pub points: Option<Vec<GroupElement>>,
    pub sizes: Vec<usize>,
    pub orbit_r: f64,
}

impl RigidityConfig {
    pub fn new(n: usize, p: f64) -> Self {
        RigidityConfig {
            n,
            p,
            witness: WitnessConfig::default(),
            points: None,
            sizes: Vec::new(),
            orbit_r: 1.0,
        }
    }
}

/// Rigidity inequalities for the family's profile, the sufficient-side
/// decay `σ_n + 1` for comparison, and Schur lower bounds when a design is
/// requested.
pub fn cmd_rigidity(family: &SymbolFamily, cfg: &RigidityConfig) -> Result<CertificationReport> {
    let phi = family.profile()?;
    if cfg.n < 3 {
        return Err(Error::Input("rigidity needs n >= 3".into()));
    }
    let design = match (&cfg.points, cfg.sizes.is_empty()) {
        (Some(pts), _) => {
            let sizes = if cfg.sizes.is_empty() { vec![pts.len()] } else { cfg.sizes.clone() };
            if pts.iter().any(|g| g.n() != cfg.n) {
                return Err(Error::Input("point dimension differs from --n".into()));
            }
            Some(WitnessDesign::from_points(pts.clone(), &sizes)?)
        }
        (None, false) => Some(WitnessDesign::orbit(cfg.n, cfg.orbit_r, &cfg.sizes)?),
        (None, true) => None,
    };
    let mut report = rigidity_witness(&phi, cfg.n, cfg.p, design.as_ref(), &cfg.witness);
    report.command = "rigidity".into();
    report.param("family", family.describe());
    let sigma = (sigma_n(cfg.n) + 1) as f64;
    report.push(decay_record(
        &phi,
        sigma,
        "decay-sigma",
        "sufficient side: decay of order σ_n + 1 in rank n",
        &cfg.witness.grid,
        Verdict::Inconclusive,
    ));
    let mut extra = family.digest_bytes();
    if let Some(pts) = &cfg.points {
        for g in pts {
            for v in g.to_row_vec() {
                extra.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    report.set_input_digest(&extra);
    Ok(report)
}

/// `φ_k^{(r)}(x)` tables plus the integral oracle and `S_p` sums.
pub fn cmd_sphere_spectrum(n: usize, p: f64, r: usize, xs: &[f64], k_max: usize) -> Result<CertificationReport> {
    if n < 3 {
        return Err(Error::Input("sphere spectra need n >= 3".into()));
    }
    if xs.is_empty() || xs.iter().any(|x| !(x.abs() <= 1.0)) {
        return Err(Error::Input("points must lie in [-1, 1]".into()));
    }
    let mut report = CertificationReport::new("sphere-spectrum");
    report.param("n", n);
    report.param("p", p);
    report.param("r", r);
    report.param("x", xs);
    report.param("kmax", k_max);
    report.set_input_digest(b"");
    let mut table = Table::new(&["k", "x", "value"]);
    let mut oracle: f64 = 0.0;
    for &x in xs {
        for k in 0..=k_max {
            let v = phi_k_derivative(n, k, r, x)?;
            table.push(vec![k as f64, x, v]);
            if r == 0 && k <= 50 {
                let (re, _) = phi_k_integral(n, k, x)?;
                oracle = oracle.max((re - phi_k(n, k, x)?).abs());
            }
        }
    }
    if r == 0 {
        report.push(CheckRecord::upper(
            "integral-oracle",
            "φ_k from the weighted integral matches the recurrence (k <= 50)",
            oracle,
            1e-10,
            0.0,
        ));
    }
    let a0 = alpha0(n, p);
    for &x in xs {
        let name = format!("sp-norm-x{x}");
        let anchor = "‖∂^r T_x‖_{S_p} converges iff r < α_0";
        let rec = match sp_derivative_norm(n, p, r, x, 1e-6) {
            Ok(SpNorm::Finite { value, norm_error, .. }) => {
                let v = if (r as f64) < a0 { Verdict::Pass } else { Verdict::Fail };
                CheckRecord::new(name, anchor, value, v)
                    .with_tolerance(norm_error)
                    .with_note("finite")
            }
            Ok(SpNorm::Divergent { .. }) => {
                let v = if (r as f64) >= a0 { Verdict::Pass } else { Verdict::Fail };
                CheckRecord::new(name, anchor, f64::INFINITY, v).with_note("divergent")
            }
            Err(e @ (Error::Domain(_) | Error::Range(_))) => {
                CheckRecord::new(name, anchor, f64::NAN, Verdict::Inconclusive).with_note(e.to_string())
            }
            Err(e) => return Err(e),
        };
        report.push(rec.with_bound(a0));
    }
    report.tables.insert("phi".into(), table);
    Ok(report)
}

/// Lower bound for the Schur norm of a real symbol matrix.
pub fn cmd_schur_bound(matrix: &DMatrix<f64>, p: f64, iterations: usize, seed: u64) -> Result<CertificationReport> {
    let m = TruncatedSchurMultiplier::from_real(matrix)?;
    let mut report = CertificationReport::new("schur-bound");
    report.param("p", if p.is_infinite() { "inf".to_string() } else { p.to_string() });
    report.param("size", matrix.nrows());
    report.param("iterations", iterations);
    report.seed(seed);
    let bytes: Vec<u8> = matrix.iter().flat_map(|v| v.to_le_bytes()).collect();
    report.set_input_digest(&bytes);
    let lb = schur_norm_lower_bound(&m, p, iterations, seed)?;
    let sup = m.sup_abs();
    report.push(
        CheckRecord::new("lower-bound", "restriction: finite-section lower bound", lb, Verdict::Pass)
            .with_note("one-sided: the true norm is at least this value"),
    );
    report.push(CheckRecord::new(
        "sup-entry",
        "every Schur norm dominates the largest entry",
        sup,
        if lb >= sup - 1e-8 { Verdict::Pass } else { Verdict::Fail },
    ));
    if p == 2.0 {
        let exact = schur_norm_exact_p2(&m);
        report.push(CheckRecord::upper(
            "exact-p2",
            "p = 2: the norm equals the largest entry",
            (lb - exact).abs(),
            1e-6,
            0.0,
        ));
    }
    Ok(report)
}

/// Weyl-chamber volumes of `log L`-balls and the fitted growth slope.
pub fn cmd_geometry(n: usize, radii: &[f64]) -> Result<CertificationReport> {
    if radii.len() < 2 {
        return Err(Error::Input("need at least two radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Input("radii must be positive".into()));
    }
    let mut report = CertificationReport::new("geometry");
    report.param("n", n);
    report.param("radii", radii);
    report.set_input_digest(b"");
    let mut table = Table::new(&["R", "volume", "error"]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let (v, e) = weyl_ball_volume_with_error(n, r)?;
        table.push(vec![r, v, e]);
        xs.push(r);
        ys.push(v.ln());
    }
    let slope = linear_fit(&xs, &ys).0;
    let sigma = sigma_n(n) as f64;
    report.push(
        CheckRecord::upper(
            "weyl-growth-slope",
            "log μ(B_R) grows like σ_n R",
            (slope - sigma).abs() / sigma,
            0.05,
            0.0,
        )
        .with_note(format!("fitted slope {slope:.6}, σ_n = {sigma}")),
    );
    report.tables.insert("volumes".into(), table);
    Ok(report)
}
