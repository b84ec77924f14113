//! Radially weighted stable-like forms `μ_W(dx) = e^{−W(x)}dx` on Rⁿ: the
//! growth function `Φ(l)`, lower bounds for `κ_W(B_lᶜ)`, the resulting
//! super-Poincaré rate, and the ramp functions `g_l` of the threshold example.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_grid, loglog_fit, PowerFit};
use crate::lattice::unit_ball_volume;
use crate::quad::{integrate, integrate_power_tail, QuadOptions};

const PI: f64 = std::f64::consts::PI;

fn opts(rtol: f64) -> QuadOptions {
    QuadOptions { rtol, atol: 1e-300, max_intervals: 4000 }
}

/// `ln(1 + r²)` without overflow for large `r`.
fn ln1p_sq(r: f64) -> f64 {
    if r > 1.0 {
        2.0 * r.ln() + (1.0 / (r * r)).ln_1p()
    } else {
        (r * r).ln_1p()
    }
}

/// Registered weight families, as they appear in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `W(r) = ((n+ε)/2) log(1 + r²) + c`
    Log { eps: f64, n: usize, alpha: f64 },
    /// `W ≡ value`; not normalizable, for hand-checkable kernel integrals.
    Constant { value: f64, n: usize, alpha: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialWeight {
    pub spec: WeightSpec,
    pub n: usize,
    pub alpha: f64,
    /// Additive constant making `e^{−W}` a probability density (0 when not normalizable).
    pub shift: f64,
    pub normalized: bool,
}

impl RadialWeight {
    pub fn new(spec: WeightSpec) -> Result<Self> {
        let (n, alpha) = match spec {
            WeightSpec::Log { n, alpha, .. } | WeightSpec::Constant { n, alpha, .. } => (n, alpha),
        };
        if n < 2 || !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Invalid(format!("weighted forms need n ≥ 2 and 0 < alpha < 2, got n = {n}, alpha = {alpha}")));
        }
        match spec {
            WeightSpec::Log { eps, .. } => {
                if !(eps > 0.0) {
                    return Err(Error::Invalid(format!("e^(-W) is not integrable for eps = {eps}")));
                }
                let nf = n as f64;
                let f = |r: f64| (-(nf + eps) / 2.0 * ln1p_sq(r) + (nf - 1.0) * r.ln()).exp();
                let z = nf * unit_ball_volume(n) * (integrate(f, 0.0, 1.0, opts(1e-12))? + integrate_power_tail(f, 1.0, opts(1e-12))?);
                Ok(Self { spec, n, alpha, shift: z.ln(), normalized: true })
            }
            WeightSpec::Constant { .. } => Ok(Self { spec, n, alpha, shift: 0.0, normalized: false }),
        }
    }

    pub fn log_family(n: usize, alpha: f64, eps: f64) -> Result<Self> {
        Self::new(WeightSpec::Log { eps, n, alpha })
    }

    pub fn w(&self, r: f64) -> f64 {
        match self.spec {
            WeightSpec::Log { eps, n, .. } => (n as f64 + eps) / 2.0 * ln1p_sq(r) + self.shift,
            WeightSpec::Constant { value, .. } => value,
        }
    }

    pub fn dw(&self, r: f64) -> f64 {
        match self.spec {
            WeightSpec::Log { eps, n, .. } => (n as f64 + eps) * r / (1.0 + r * r),
            WeightSpec::Constant { .. } => 0.0,
        }
    }

    /// `sup_{|z|≤ρ} W(z)`; both families are non-decreasing in `|z|`.
    pub fn sup_w(&self, rho: f64) -> f64 {
        self.w(rho)
    }

    /// `sup_{|z|≤ρ} |∇W(z)|`.
    pub fn sup_grad(&self, rho: f64) -> f64 {
        self.dw(rho.min(1.0))
    }

    /// `e^{−W(r)}`.
    pub fn density(&self, r: f64) -> f64 {
        (-self.w(r)).exp()
    }

    /// `s = n + α/2`, the exponent of the jump kernel.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + self.alpha / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBehavior {
    /// Minimum attained at a finite radius.
    Attained,
    /// Objective decreases to a positive limit; the infimum is that limit.
    Converging,
    /// Objective decays like a negative power; the infimum is 0.
    Decaying,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiValue {
    pub l: f64,
    pub value: f64,
    /// `ln Φ(l)` (−∞ when Φ(l) = 0); finite even where `Φ(l)` overflows.
    pub log_value: f64,
    pub argmin: Option<f64>,
    pub tail: TailBehavior,
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Infimum over `u ∈ [lo, ∞)` of `exp(g(u))` given on a log grid, with tail detection.
fn log_inf(g: &dyn Fn(f64) -> f64, lo: f64, decades: f64) -> (f64, Option<f64>, TailBehavior) {
    let grid = log_grid(lo, lo * 10f64.powf(decades), 400);
    let vals: Vec<f64> = grid.iter().map(|&r| g(r)).collect();
    let last = grid.len() - 1;
    let back = grid.len() - 1 - grid.len() / (decades as usize).max(1) * 2;
    let tail_slope = (vals[last] - vals[back]) / (grid[last].ln() - grid[back].ln());
    let (imin, &vmin) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if tail_slope < -1e-3 && imin == last {
        return (f64::NEG_INFINITY, None, TailBehavior::Decaying);
    }
    // a flat tail only differs from the minimum by rounding
    if imin == last || (tail_slope.abs() <= 1e-3 && vals[last] - vmin <= 1e-10 * (1.0 + vmin.abs())) {
        return (vmin, None, TailBehavior::Converging);
    }
    if imin == 0 {
        // check the left end is a true boundary minimum, not a coarse sampling artifact
        let (x, v) = golden_min(&|t: f64| g(t.exp()), grid[0].ln(), grid[1].ln());
        return if v < vmin { (v, Some(x.exp()), TailBehavior::Attained) } else { (vmin, Some(grid[0]), TailBehavior::Attained) };
    }
    let (x, v) = golden_min(&|t: f64| g(t.exp()), grid[imin - 1].ln(), grid[imin + 1].ln());
    (v.min(vmin), Some(x.exp()), TailBehavior::Attained)
}

/// `Φ(l) = inf_{|x|≥l} e^{W(x)}/|x|^{n+α/2}`.
pub fn phi_l(weight: &RadialWeight, l: f64) -> Result<PhiValue> {
    if !(l >= 1.0) {
        return Err(Error::Invalid(format!("Phi(l) needs l ≥ 1, got {l}")));
    }
    let s = weight.kernel_exponent();
    let (lv, argmin, tail) = log_inf(&|r| weight.w(r) - s * r.ln(), l, 12.0);
    Ok(PhiValue { l, value: lv.exp(), log_value: lv, argmin, tail })
}

/// `∫_{S^{n−1}} |Rθ₀ − ρθ|^{−s} dθ` for `n ∈ {2, 3}`.
fn angular(n: usize, s: f64, big_r: f64, rho: f64) -> f64 {
    if rho == 0.0 || big_r == 0.0 {
        let d = big_r.max(rho);
        return n as f64 * unit_ball_volume(n) * d.powf(-s);
    }
    if n == 3 {
        let e = 2.0 - s;
        return 2.0 * PI / (big_r * rho * (s - 2.0)) * ((big_r - rho).abs().powf(e) - (big_r + rho).powf(e));
    }
    let d2 = (big_r - rho) * (big_r - rho);
    let f = |t: f64| {
        let h = (0.5 * t).sin();
        (d2 + 4.0 * big_r * rho * h * h).powf(-s / 2.0)
    };
    // the peak at θ = 0 has width |R − ρ|/√(Rρ)
    let w = ((big_r - rho).abs() / (big_r * rho).sqrt()).clamp(1e-12, PI);
    let mut v = integrate(f, 0.0, w.min(PI), opts(1e-9)).unwrap_or(f64::NAN);
    if w < PI {
        v += integrate(f, w, PI, opts(1e-9)).unwrap_or(f64::NAN);
    }
    2.0 * v
}

/// `∫_{|y|<l} h(|y|) |x − y|^{−s} dy` for `|x| = R > l`.
fn ball_integral(n: usize, s: f64, big_r: f64, l: f64, h: &dyn Fn(f64) -> f64) -> Result<f64> {
    let nf = n as f64;
    let f = |rho: f64| h(rho) * rho.powf(nf - 1.0) * angular(n, s, big_r, rho);
    let gap = big_r - l;
    let mut cuts = vec![0.0, 0.5 * l];
    let near = l - (4.0 * gap).min(0.25 * l);
    if near > 0.5 * l {
        cuts.push(near);
    }
    cuts.push(l);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(f, w[0], w[1], opts(1e-8))?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaLower {
    pub l: f64,
    /// `½ inf_{|x|≥l+η} ∫_{|y|<l} (e^{W(x)−W(y)} + 1)|x − y|^{−(n+α/2)} dy`
    pub value: f64,
    pub argmin: Option<f64>,
    pub eta: f64,
    /// `Φ(l)`, the crude final member of the chain (times a fitted constant).
    pub phi: f64,
}

/// Lower bound for `κ_W(B_lᶜ)` with the singular interface `|x| = l` excluded by `η`.
pub fn kappa_w_lower_with(weight: &RadialWeight, l: f64, eta: f64) -> Result<KappaLower> {
    let n = weight.n;
    if !(n == 2 || n == 3) {
        return Err(Error::Invalid("kappa lower bound supports n = 2 or 3".into()));
    }
    if !(l >= 1.0 && eta > 0.0) {
        return Err(Error::Invalid("kappa lower bound needs l ≥ 1 and eta > 0".into()));
    }
    let s = weight.kernel_exponent();
    let objective = |big_r: f64| -> f64 {
        // e^{W(x)} ∫ e^{−W(y)}K + ∫ K, combined in logs against overflow
        let ig = ball_integral(n, s, big_r, l, &|rho| weight.density(rho)).unwrap_or(f64::NAN);
        let i1 = ball_integral(n, s, big_r, l, &|_| 1.0).unwrap_or(f64::NAN);
        let a = weight.w(big_r) + ig.ln();
        let b = i1.ln();
        let m = a.max(b);
        (0.5f64).ln() + m + ((a - m).exp() + (b - m).exp()).ln()
    };
    // search over the offset u = |x| − l ∈ [η, ∞)
    let (lv, arg, tail) = log_inf(&|u| objective(l + u), eta, 8.0);
    let value = if tail == TailBehavior::Decaying { 0.0 } else { lv.exp() };
    Ok(KappaLower { l, value, argmin: arg.map(|u| l + u), eta, phi: phi_l(weight, l)?.value })
}

/// [`kappa_w_lower_with`] at the default margin `η = 10⁻³·l`.
pub fn kappa_w_lower(weight: &RadialWeight, l: f64) -> Result<KappaLower> {
    kappa_w_lower_with(weight, l, 1e-3 * l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// Existential constants of the chain, carried as the given values.
    Symbolic,
    /// Constants calibrated against computed quantities.
    Fitted,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BetaConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub mode: ConstantMode,
}

impl Default for BetaConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0, c3: 1.0, mode: ConstantMode::Symbolic }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaValue {
    pub r: f64,
    pub value: f64,
    pub log_value: f64,
    /// Optimal `(s, l)`; `None` when infeasible.
    pub s: Option<f64>,
    pub l: Option<f64>,
}

/// Tabulates `Φ(l − 1)` once and evaluates
/// `β(r) = inf{2c₁(s^{−2n/α} + s^{−n}) sup_{|z|≤l+1} e^{W/2} : s + 1/Φ(l−1) ≤ c₂(r∧1),
/// sup_{|z|≤l+2} e^{2|∇W|} ≤ c₃/s}`.
pub struct BetaSolver<'a> {
    weight: &'a RadialWeight,
    constants: BetaConstants,
    ls: Vec<f64>,
    log_phi: Vec<f64>,
}

impl<'a> BetaSolver<'a> {
    pub fn new(weight: &'a RadialWeight, constants: BetaConstants, l_max: f64) -> Result<Self> {
        let ls = log_grid(2.0, l_max.max(4.0), 3000);
        let log_phi = ls.iter().map(|&l| Ok(phi_l(weight, l - 1.0)?.log_value)).collect::<Result<Vec<_>>>()?;
        // Φ(l) → ∞ is the standing hypothesis
        let k = ls.len();
        let slope = (log_phi[k - 1] - log_phi[k / 2]) / (ls[k - 1].ln() - ls[k / 2].ln());
        if !(slope > 1e-3) {
            return Err(Error::Invalid(format!("Phi(l) does not diverge (tail slope {slope:.3e}); the rate needs lim Phi = inf")));
        }
        Ok(Self { weight, constants, ls, log_phi })
    }

    pub fn eval(&self, r: f64) -> BetaValue {
        let c = &self.constants;
        let nf = self.weight.n as f64;
        let a = self.weight.alpha;
        let budget = c.c2 * r.min(1.0);
        let mut best = (f64::INFINITY, None, None);
        for (&l, &lp) in self.ls.iter().zip(&self.log_phi) {
            // the cost decreases in s, so the largest feasible s is optimal
            let s_cap = c.c3 * (-2.0 * self.weight.sup_grad(l + 2.0)).exp();
            let s = (budget - (-lp).exp()).min(s_cap);
            if !(s > 0.0) {
                continue;
            }
            let ls_ = s.ln();
            let x = -2.0 * nf / a * ls_;
            let y = -nf * ls_;
            let m = x.max(y);
            let log_cost = (2.0 * c.c1).ln() + m + ((x - m).exp() + (y - m).exp()).ln() + 0.5 * self.weight.sup_w(l + 1.0);
            if log_cost < best.0 {
                best = (log_cost, Some(s), Some(l));
            }
        }
        BetaValue { r, value: best.0.exp(), log_value: best.0, s: best.1, l: best.2 }
    }
}

pub fn theorem_beta(weight: &RadialWeight, r: f64, constants: BetaConstants) -> Result<BetaValue> {
    Ok(BetaSolver::new(weight, constants, 1e80)?.eval(r))
}

/// Log-log fit of `β` over `r ∈ [r_lo, r_hi]` against `−2n/α − (n+ε)/(2ε−α)`.
#[derive(Debug, Clone, Serialize)]
pub struct BetaFit {
    pub r: Vec<f64>,
    pub log_beta: Vec<f64>,
    pub slope: f64,
    pub expected: f64,
    pub rel_error: f64,
}

pub fn beta_slope(weight: &RadialWeight, constants: BetaConstants, r_lo: f64, r_hi: f64) -> Result<BetaFit> {
    let eps = match weight.spec {
        WeightSpec::Log { eps, .. } => eps,
        WeightSpec::Constant { .. } => return Err(Error::Invalid("rate slope is defined for the log family".into())),
    };
    let solver = BetaSolver::new(weight, constants, 1e80)?;
    let r = log_grid(r_lo, r_hi, 13);
    let log_beta: Vec<f64> = r.iter().map(|&x| solver.eval(x).log_value).collect();
    if log_beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("rate infeasible on part of the fit range".into()));
    }
    let lx: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = log_beta.iter().sum::<f64>() / lx.len() as f64;
    let sxy: f64 = lx.iter().zip(&log_beta).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let (nf, a) = (weight.n as f64, weight.alpha);
    let expected = -2.0 * nf / a - (nf + eps) / (2.0 * eps - a);
    Ok(BetaFit { r, log_beta, slope, expected, rel_error: (slope / expected - 1.0).abs() })
}

/// Radial ramp: 0 on `[0, l]`, linear on `[l, 2l]`, 1 beyond.
pub fn g_l(l: f64, r: f64) -> f64 {
    ((r - l) / l).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GlQuantities {
    pub l: f64,
    /// `sup_x ∫ |g_l²(y) − g_l²(x)| |x − y|^{−(n+α/2)} dy`
    pub inner_sup: f64,
    /// `μ_W(g_l²)`
    pub mass: f64,
    /// `μ_W(g_l)`
    pub l1mass: f64,
}

/// `∫_{R²} |g_l²(y) − g_l²(x)| |x − y|^{−s} dy` at `|x| = R`.
fn gl_inner(s: f64, l: f64, big_r: f64) -> Result<f64> {
    let gx = g_l(l, big_r).powi(2);
    let f = |rho: f64| (g_l(l, rho).powi(2) - gx).abs() * rho * angular(2, s, big_r, rho);
    let mut cuts = vec![0.0, l, 2.0 * l];
    if big_r > 0.0 {
        cuts.push(big_r);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        // ρ = R + (end − R)·v⁴ smooths the |ρ − R|^{−α/2} endpoint singularity
        let (near, far) = if w[0] == big_r { (w[0], w[1]) } else if w[1] == big_r { (w[1], w[0]) } else { (f64::NAN, f64::NAN) };
        if near.is_nan() {
            total += integrate(f, w[0], w[1], opts(1e-7))?;
        } else {
            let h = far - near;
            total += integrate(|v: f64| f(near + h * v.powi(4)) * 4.0 * h.abs() * v.powi(3), 0.0, 1.0, opts(1e-7))?;
        }
    }
    let last = *cuts.last().expect("non-empty");
    Ok(total + integrate_power_tail(f, last.max(l), opts(1e-7))?)
}

/// `pre: n = 2`; the supremum runs over 33 base radii in `[0, 4l]`.
pub fn gl_quantities(weight: &RadialWeight, l: f64) -> Result<GlQuantities> {
    if weight.n != 2 {
        return Err(Error::Invalid("ramp quantities are computed for n = 2".into()));
    }
    if !(l >= 1.0) {
        return Err(Error::Invalid("ramp quantities need l ≥ 1".into()));
    }
    let s = weight.kernel_exponent();
    let mut inner_sup: f64 = 0.0;
    for i in 0..=32 {
        let big_r = 4.0 * l * i as f64 / 32.0;
        inner_sup = inner_sup.max(gl_inner(s, l, big_r)?);
    }
    let radial = |p: i32| -> Result<f64> {
        let f = |rho: f64| g_l(l, rho).powi(p) * weight.density(rho) * 2.0 * PI * rho;
        Ok(integrate(f, l, 2.0 * l, opts(1e-10))? + integrate_power_tail(f, 2.0 * l, opts(1e-10))?)
    };
    Ok(GlQuantities { l, inner_sup, mass: radial(2)?, l1mass: radial(1)? })
}

#[derive(Debug, Clone, Serialize)]
pub struct GlFits {
    pub ls: Vec<f64>,
    pub quantities: Vec<GlQuantities>,
    pub inner_sup: PowerFit,
    pub mass: PowerFit,
    pub l1mass_sq: PowerFit,
}

pub fn gl_fits(weight: &RadialWeight, ls: &[f64]) -> Result<GlFits> {
    let q = ls.iter().map(|&l| gl_quantities(weight, l)).collect::<Result<Vec<_>>>()?;
    let fit = |v: Vec<f64>| loglog_fit(ls, &v).ok_or_else(|| Error::Invalid("degenerate ramp data".into()));
    Ok(GlFits {
        ls: ls.to_vec(),
        inner_sup: fit(q.iter().map(|g| g.inner_sup).collect())?,
        mass: fit(q.iter().map(|g| g.mass).collect())?,
        l1mass_sq: fit(q.iter().map(|g| g.l1mass * g.l1mass).collect())?,
        quantities: q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Below,
    At,
    Above,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCase {
    pub eps: f64,
    /// Slope of `Φ` over `l ∈ [10², 10⁴]`, `None` when `Φ ≡ 0`.
    pub phi_slope: Option<f64>,
    pub phi_tail: TailBehavior,
    /// Slope of `R(l) = inner_sup / (μ_W(g_l²) − μ_W(g_l)²)`.
    pub ratio_slope: f64,
    /// `None` when neither the sufficient nor the necessary side decides.
    pub first_holds: Option<bool>,
    pub second_holds: Option<bool>,
    pub observed: Threshold,
    pub expected: Threshold,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub alpha: f64,
    pub cases: Vec<ThresholdCase>,
    pub pass: bool,
}

/// Classifies each `ε` against `α/2` from computed quantities only: the
/// sufficiency side reads the trend of `Φ`, the necessity side the trend of `R(l)`.
pub fn example_threshold(n: usize, alpha: f64, eps_grid: &[f64], ls: &[f64], slope_tol: f64) -> Result<ThresholdReport> {
    let mut cases = Vec::new();
    for &eps in eps_grid {
        let w = RadialWeight::log_family(n, alpha, eps)?;
        let phis = log_grid(1e2, 1e4, 9).into_iter().map(|l| phi_l(&w, l)).collect::<Result<Vec<_>>>()?;
        let phi_tail = phis[0].tail;
        let phi_slope = if phis.iter().all(|p| p.value > 0.0) {
            let xs: Vec<f64> = phis.iter().map(|p| p.l).collect();
            let ys: Vec<f64> = phis.iter().map(|p| p.value).collect();
            loglog_fit(&xs, &ys).map(|f| f.slope)
        } else {
            None
        };
        let gl = ls.iter().map(|&l| gl_quantities(&w, l)).collect::<Result<Vec<_>>>()?;
        let ratio: Vec<f64> = gl.iter().map(|g| g.inner_sup / (g.mass - g.l1mass * g.l1mass)).collect();
        let ratio_slope = loglog_fit(ls, &ratio).ok_or_else(|| Error::Invalid("degenerate ratio data".into()))?.slope;
        // sufficiency reads Φ; a failure needs the necessity ratio: vanishing
        // rules out the first inequality, a non-growing ratio the second
        let bounded_below = phi_slope.is_some();
        let diverging = phi_slope.is_some_and(|s| s > slope_tol);
        let first_holds = if bounded_below { Some(true) } else if ratio_slope < -slope_tol { Some(false) } else { None };
        let second_holds = if diverging { Some(true) } else if ratio_slope <= slope_tol { Some(false) } else { None };
        let observed = match (first_holds, second_holds) {
            (Some(true), Some(true)) => Threshold::Above,
            (Some(true), Some(false)) => Threshold::At,
            (Some(false), Some(false)) => Threshold::Below,
            _ => Threshold::Undetermined,
        };
        let half = alpha / 2.0;
        let expected = if (eps - half).abs() < 1e-12 {
            Threshold::At
        } else if eps < half {
            Threshold::Below
        } else {
            Threshold::Above
        };
        cases.push(ThresholdCase { eps, phi_slope, phi_tail, ratio_slope, first_holds, second_holds, observed, expected });
    }
    let pass = cases.iter().all(|c| c.observed == c.expected);
    Ok(ThresholdReport { n, alpha, cases, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_fn(a: f64, b: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }

    #[test]
    fn log_weight_is_normalized() {
        for (n, eps) in [(2usize, 0.5), (3, 1.0), (2, 1.5)] {
            let w = RadialWeight::log_family(n, 1.0, eps).unwrap();
            // ∫_0^∞ r^{n−1}(1+r²)^{−(n+ε)/2} dr = B(n/2, ε/2)/2
            let z = n as f64 * unit_ball_volume(n) * beta_fn(n as f64 / 2.0, eps / 2.0) / 2.0;
            assert!((w.shift - z.ln()).abs() < 1e-9, "n = {n}, eps = {eps}");
        }
        assert!(RadialWeight::log_family(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn phi_regimes() {
        let a = 1.0;
        let above = RadialWeight::log_family(2, a, 1.0).unwrap();
        let at = RadialWeight::log_family(2, a, 0.5).unwrap();
        let below = RadialWeight::log_family(2, a, 0.25).unwrap();
        let p = phi_l(&above, 100.0).unwrap();
        assert_eq!(p.tail, TailBehavior::Attained);
        assert!((p.argmin.unwrap() - 100.0).abs() < 1e-6);
        let q = phi_l(&at, 100.0).unwrap();
        assert_eq!(q.tail, TailBehavior::Converging);
        assert!((q.value / at.shift.exp() - 1.0).abs() < 1e-9);
        let z = phi_l(&below, 100.0).unwrap();
        assert_eq!(z.tail, TailBehavior::Decaying);
        assert_eq!(z.value, 0.0);
        // interior minimum at r² = (n + α/2)/(ε − α/2) for small l
        let m = phi_l(&above, 1.0).unwrap();
        assert!((m.argmin.unwrap() - 5f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn phi_is_monotone() {
        let w = RadialWeight::log_family(2, 1.5, 1.5).unwrap();
        let v: Vec<f64> = log_grid(1.0, 1e3, 20).iter().map(|&l| phi_l(&w, l).unwrap().value).collect();
        assert!(v.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-12)));
    }

    #[test]
    fn constant_weight_ball_integral() {
        // ∫_{|y|<l} |x − y|^{−s} dy at |x| = R in three dimensions, closed form
        let (l, big_r, s) = (1.0f64, 2.0f64, 3.5f64);
        let got = ball_integral(3, s, big_r, l, &|_| 1.0).unwrap();
        let e = 2.0 - s;
        let prim = |rho: f64| {
            let (u, v) = (big_r - rho, big_r + rho);
            let lower = -big_r * u.powf(e + 1.0) / (e + 1.0) + u.powf(e + 2.0) / (e + 2.0);
            let upper = v.powf(e + 2.0) / (e + 2.0) - big_r * v.powf(e + 1.0) / (e + 1.0);
            lower - upper
        };
        let exact = 2.0 * PI / (big_r * (s - 2.0)) * (prim(l) - prim(0.0));
        assert!((got / exact - 1.0).abs() < 1e-8, "{got} vs {exact}");
        let w = RadialWeight::new(WeightSpec::Constant { value: 0.0, n: 3, alpha: 1.0 }).unwrap();
        assert!(!w.normalized);
        let k = kappa_w_lower(&w, 1.0).unwrap();
        assert!(k.value.is_finite() && k.value >= 0.0);
    }

    #[test]
    fn two_dimensional_angular_matches_series() {
        // ∫_0^{2π} (R² + ρ² − 2Rρ cos θ)^{−1} dθ = 2π/(R² − ρ²)
        let v = angular(2, 2.0, 3.0, 1.0);
        assert!((v - 2.0 * PI / 8.0).abs() < 1e-9);
    }

    #[test]
    fn ramp_shape() {
        assert_eq!(g_l(2.0, 1.0), 0.0);
        assert_eq!(g_l(2.0, 3.0), 0.5);
        assert_eq!(g_l(2.0, 9.0), 1.0);
    }

    #[test]
    fn beta_infeasible_without_divergence() {
        let w = RadialWeight::log_family(2, 1.0, 0.5).unwrap();
        assert!(theorem_beta(&w, 0.1, BetaConstants::default()).is_err());
    }

    #[test]
    fn beta_monotone_and_saturates() {
        let w = RadialWeight::log_family(2, 1.0, 1.0).unwrap();
        let solver = BetaSolver::new(&w, BetaConstants::default(), 1e40).unwrap();
        let rs = log_grid(1e-6, 10.0, 15);
        let v: Vec<f64> = rs.iter().map(|&r| solver.eval(r).log_value).collect();
        assert!(v.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        assert_eq!(solver.eval(1.0).log_value, solver.eval(5.0).log_value);
    }
}
