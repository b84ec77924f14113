//! Young functions, Orlicz gauges and the quadrature-defined `N_h = Φ_h⁻¹`.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::fit::{local_slope, log_grid};
use crate::quad::{integrate_to_inf, QuadOptions};
use serde::{Deserialize, Serialize};

/// Quotient with `0/0 = 1`, `∞/∞ = 1`, `r/0 = ∞`, `r/∞ = 0`.
pub fn ratio(a: f64, b: f64) -> f64 {
    match (a, b) {
        (a, b) if a == 0.0 && b == 0.0 => 1.0,
        (a, b) if a.is_infinite() && b.is_infinite() => 1.0,
        (_, b) if b == 0.0 => f64::INFINITY,
        (_, b) if b.is_infinite() => 0.0,
        (a, b) => a / b,
    }
}

/// Monotone table interpolated linearly in log-log coordinates, extrapolated
/// with the end slopes. Values above `cap` map to `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTable {
    ls: Vec<f64>,
    lv: Vec<f64>,
    pub cap: Option<f64>,
}

impl LogTable {
    pub fn new(s: &[f64], v: &[f64], cap: Option<f64>) -> Result<Self> {
        if s.len() != v.len() || s.len() < 2 {
            return Err(Error::Invalid("table needs at least two matching points".into()));
        }
        let mut ls = Vec::with_capacity(s.len());
        let mut lv = Vec::with_capacity(s.len());
        for (x, y) in s.iter().zip(v) {
            if !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()) {
                continue;
            }
            let (lx, ly) = (x.ln(), y.ln());
            if let (Some(px), Some(py)) = (ls.last(), lv.last()) {
                if lx <= *px || ly < *py {
                    continue;
                }
            }
            ls.push(lx);
            lv.push(ly);
        }
        if ls.len() < 2 {
            return Err(Error::Invalid("table has fewer than two usable increasing points".into()));
        }
        Ok(Self { ls, lv, cap })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.ls.len();
        match self.ls.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.saturating_sub(1).min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn slope(&self, i: usize) -> f64 {
        (self.lv[i + 1] - self.lv[i]) / (self.ls[i + 1] - self.ls[i])
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if let Some(c) = self.cap {
            if s > c {
                return f64::INFINITY;
            }
        }
        let x = s.ln();
        let i = self.segment(x);
        (self.lv[i] + self.slope(i) * (x - self.ls[i])).exp()
    }

    pub fn left_deriv(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let x = s.ln();
        let n = self.ls.len();
        let i = match self.ls.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.saturating_sub(1).min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        self.slope(i) * self.eval(s) / s
    }

    /// `inf{s : N(s) ≥ r}` for the interpolant.
    pub fn inv(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let y = r.ln();
        let n = self.lv.len();
        let mut i = match self.lv.binary_search_by(|p| p.total_cmp(&y)) {
            Ok(i) => i.saturating_sub(1).min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        while i > 0 && self.lv[i] >= y {
            i -= 1;
        }
        while i + 1 < n - 1 && self.lv[i + 1] < y {
            i += 1;
        }
        let b = self.slope(i);
        let s = if b == 0.0 { self.ls[i + 1] } else { self.ls[i] + (y - self.lv[i]) / b };
        let s = s.exp();
        match self.cap {
            Some(c) if s > c => c,
            _ => s,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ls.iter().zip(&self.lv).map(|(a, b)| (a.exp(), b.exp()))
    }
}

/// Increasing piecewise-linear function through `(0,0)` and the given knots,
/// continued with the last slope, or `+∞` beyond `cap` when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 || xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(Error::Invalid("piecewise-linear function must start at the origin".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || ys.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("piecewise-linear knots must increase".into()));
        }
        Ok(Self { xs, ys, cap: None })
    }

    /// Same knots, infinite to the right of `cap`.
    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }

    fn seg(&self, x: f64) -> usize {
        let n = self.xs.len();
        self.xs.partition_point(|p| *p < x).saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.cap.is_some_and(|c| x > c) {
            return f64::INFINITY;
        }
        let i = self.seg(x);
        let b = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + b * (x - self.xs[i])
    }

    pub fn left_deriv(&self, x: f64) -> f64 {
        let i = self.seg(x);
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn inv(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let n = self.ys.len();
        let i = self.ys.partition_point(|p| *p < r).saturating_sub(1).min(n - 2);
        let b = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        if b == 0.0 {
            return self.xs[i + 1];
        }
        let x = self.xs[i] + (r - self.ys[i]) / b;
        match self.cap {
            Some(c) if x > c => c,
            _ => x,
        }
    }
}

/// Convex increasing `N` with `N(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum YoungFunction {
    /// `c·s^p`
    Power { c: f64, p: f64 },
    /// `s^{p1} ∧ s^{p2}`
    MinPower { p1: f64, p2: f64 },
    /// `s^{p1} ∨ s^{p2}`
    MaxPower { p1: f64, p2: f64 },
    /// `s^p·log(λ + s)^q`, or `s^p·log(λ + 1/s)^q` when `reciprocal`.
    LogPower { p: f64, q: f64, lambda: f64, reciprocal: bool },
    /// `a·N(b·s)`
    Scaled { inner: Box<YoungFunction>, a: f64, b: f64 },
    Tabulated(LogTable),
    Linear(PiecewiseLinear),
    /// `N ≡ 0`, the inverse of an everywhere-infinite `Φ`.
    Zero,
}

fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64) -> f64 {
    // smallest s with f(s) ≥ target, searched in log scale
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut k = 0;
    while f(hi) < target && k < 2000 {
        hi *= 2.0;
        k += 1;
    }
    if f(hi) < target {
        return f64::INFINITY;
    }
    k = 0;
    while f(lo) >= target && k < 2000 {
        lo *= 0.5;
        k += 1;
    }
    if f(lo) >= target {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    hi
}

impl YoungFunction {
    pub fn power(p: f64) -> Self {
        YoungFunction::Power { c: 1.0, p }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power { c, p } => c * s.powf(*p),
            YoungFunction::MinPower { p1, p2 } => s.powf(*p1).min(s.powf(*p2)),
            YoungFunction::MaxPower { p1, p2 } => s.powf(*p1).max(s.powf(*p2)),
            YoungFunction::LogPower { p, q, lambda, reciprocal } => {
                let arg = if *reciprocal { lambda + 1.0 / s } else { lambda + s };
                s.powf(*p) * arg.ln().powf(*q)
            }
            YoungFunction::Scaled { inner, a, b } => a * inner.eval(b * s),
            YoungFunction::Tabulated(t) => t.eval(s),
            YoungFunction::Linear(l) => l.eval(s),
            YoungFunction::Zero => 0.0,
        }
    }

    pub fn eval_ext(&self, s: f64) -> ExtReal {
        ExtReal::from_f64(self.eval(s))
    }

    /// `N⁻¹(r) = inf{s ≥ 0 : N(s) ≥ r}`.
    pub fn inv(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power { c, p } => (r / c).powf(1.0 / p),
            YoungFunction::MinPower { p1, p2 } => r.powf(1.0 / p1).max(r.powf(1.0 / p2)),
            YoungFunction::MaxPower { p1, p2 } => r.powf(1.0 / p1).min(r.powf(1.0 / p2)),
            YoungFunction::LogPower { .. } => bisect_increasing(|s| self.eval(s), r),
            YoungFunction::Scaled { inner, a, b } => inner.inv(r / a) / b,
            YoungFunction::Tabulated(t) => t.inv(r),
            YoungFunction::Linear(l) => l.inv(r),
            YoungFunction::Zero => f64::INFINITY,
        }
    }

    /// Left derivative `N′₋(s)`.
    pub fn left_deriv(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power { c, p } => c * p * s.powf(p - 1.0),
            YoungFunction::MinPower { p1, p2 } | YoungFunction::MaxPower { p1, p2 } => {
                let (a, b) = (s.powf(*p1), s.powf(*p2));
                let lower_wins = matches!(self, YoungFunction::MinPower { .. });
                // left of s the active branch is decided just below s
                let pick_first = if a == b {
                    (p1 > p2) == lower_wins
                } else {
                    (a < b) == lower_wins
                };
                if pick_first {
                    p1 * s.powf(p1 - 1.0)
                } else {
                    p2 * s.powf(p2 - 1.0)
                }
            }
            YoungFunction::LogPower { p, q, lambda, reciprocal } => {
                let (arg, darg) = if *reciprocal {
                    (lambda + 1.0 / s, -1.0 / (s * s))
                } else {
                    (lambda + s, 1.0)
                };
                let l = arg.ln();
                p * s.powf(p - 1.0) * l.powf(*q) + q * s.powf(*p) * l.powf(q - 1.0) * darg / arg
            }
            YoungFunction::Scaled { inner, a, b } => a * b * inner.left_deriv(b * s),
            YoungFunction::Tabulated(t) => t.left_deriv(s),
            YoungFunction::Linear(l) => l.left_deriv(s),
            YoungFunction::Zero => 0.0,
        }
    }

    pub fn scaled(self, a: f64, b: f64) -> Self {
        YoungFunction::Scaled { inner: Box::new(self), a, b }
    }

    /// Midpoint convexity and monotonicity on a log grid over `[1e-8, 1e8]`.
    pub fn check_young(&self, points: usize) -> Result<()> {
        let grid = log_grid(1e-8, 1e8, points);
        if self.eval(0.0) != 0.0 {
            return Err(Error::NotYoung(format!("{self:?}: N(0) ≠ 0")));
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (na, nb) = (self.eval(a), self.eval(b));
            if nb.is_infinite() {
                break;
            }
            if nb < na {
                return Err(Error::NotYoung(format!("decreasing near s = {a}")));
            }
            let mid = self.eval(0.5 * (a + b));
            if mid > 0.5 * (na + nb) * (1.0 + 1e-9) {
                return Err(Error::NotYoung(format!("not convex near s = {a}")));
            }
        }
        Ok(())
    }

    /// `c_N = inf_{s>0} N(s) / (s N′₋(s))`, over `[1e-8, 1e8]` with local refinement.
    pub fn c_n(&self) -> Result<f64> {
        let q = |s: f64| {
            let d = self.left_deriv(s);
            if d <= 0.0 {
                None
            } else {
                Some(self.eval(s) / (s * d))
            }
        };
        let grid = log_grid(1e-8, 1e8, 801);
        let mut best = f64::INFINITY;
        let mut arg = 0usize;
        for (i, s) in grid.iter().enumerate() {
            let v = q(*s).ok_or_else(|| Error::NotYoung(format!("N′ vanishes at s = {s}")))?;
            if v < best {
                best = v;
                arg = i;
            }
        }
        let lo = grid[arg.saturating_sub(1)];
        let hi = grid[(arg + 1).min(grid.len() - 1)];
        for s in log_grid(lo, hi, 201) {
            if let Some(v) = q(s) {
                best = best.min(v);
            }
        }
        Ok(best)
    }

    /// Whether `s ↦ N(s)/s` is non-decreasing on a log grid.
    pub fn ratio_increasing(&self) -> bool {
        let grid = log_grid(1e-8, 1e8, 400);
        grid.windows(2).all(|w| self.eval(w[1]) / w[1] >= self.eval(w[0]) / w[0] * (1.0 - 1e-12))
    }
}

/// Named constructor used by manifests and the CLI.
pub fn builtin(name: &str, params: &serde_json::Value) -> Result<YoungFunction> {
    let get = |k: &str| -> Result<f64> {
        params.get(k).and_then(|v| v.as_f64()).ok_or_else(|| Error::Invalid(format!("{name}: missing parameter {k}")))
    };
    let opt = |k: &str, d: f64| params.get(k).and_then(|v| v.as_f64()).unwrap_or(d);
    let stable_exp = |n: f64, a: f64| -> Result<f64> {
        if !(a > 0.0 && a < 2.0 && n >= 1.0) {
            return Err(Error::Invalid(format!("{name}: need 0 < alpha < 2 and n ≥ 1")));
        }
        Ok(n / (n - a / 2.0))
    };
    let f = match name {
        "power" => YoungFunction::Power { c: opt("c", 1.0), p: get("p")? },
        "min_power" => YoungFunction::MinPower { p1: get("p1")?, p2: get("p2")? },
        "max_power" => YoungFunction::MaxPower { p1: get("p1")?, p2: get("p2")? },
        "stable_min" => {
            let n = get("n")?;
            YoungFunction::MinPower { p1: stable_exp(n, get("alpha1")?)?, p2: stable_exp(n, get("alpha2")?)? }
        }
        "stable_max" => {
            let n = get("n")?;
            YoungFunction::MaxPower { p1: stable_exp(n, get("alpha1")?)?, p2: stable_exp(n, get("alpha2")?)? }
        }
        "truncated" => {
            let n = get("n")?;
            if n < 2.0 {
                return Err(Error::Invalid("truncated: needs n ≥ 2".into()));
            }
            YoungFunction::MinPower { p1: stable_exp(n, get("alpha")?)?, p2: n / (n - 1.0) }
        }
        "log_plus" | "log_minus" => {
            let e = stable_exp(get("n")?, get("alpha")?)?;
            let q = get("q")?;
            log_power_auto(e, q * e, name == "log_minus")?
        }
        "log_power" => log_power_auto(get("p")?, get("q")?, params.get("reciprocal").and_then(|v| v.as_bool()).unwrap_or(false))?,
        other => return Err(Error::Invalid(format!("unknown Young family {other}"))),
    };
    let p_ok = match &f {
        YoungFunction::Power { c, p } => *c > 0.0 && *p >= 1.0,
        YoungFunction::MinPower { p1, p2 } | YoungFunction::MaxPower { p1, p2 } => *p1 >= 1.0 && *p2 >= 1.0,
        _ => true,
    };
    if !p_ok {
        return Err(Error::NotYoung(format!("{name} with exponents below 1")));
    }
    Ok(f)
}

/// `s^p log(λ + s^{±1})^q` with `λ` doubled from 2 until the grid convexity check passes.
pub fn log_power_auto(p: f64, q: f64, reciprocal: bool) -> Result<YoungFunction> {
    let mut lambda = 2.0;
    for _ in 0..40 {
        let f = YoungFunction::LogPower { p, q, lambda, reciprocal };
        if f.check_young(400).is_ok() {
            return Ok(f);
        }
        lambda *= 2.0;
    }
    Err(Error::NotYoung(format!("s^{p} log^{q}: no λ ≤ 2^41 gives convexity")))
}

/// Gauge `inf{r > 0 : mass(r) ≤ 1}` for a non-increasing `mass`.
pub fn gauge<F: Fn(f64) -> f64>(mass: F, scale: f64) -> ExtReal {
    if scale <= 0.0 {
        return ExtReal::ZERO;
    }
    let mut hi = scale;
    let mut k = 0;
    while !(mass(hi) <= 1.0) {
        hi *= 2.0;
        k += 1;
        if k > 2100 {
            return ExtReal::Infinite;
        }
    }
    let mut lo = hi;
    k = 0;
    while mass(lo) <= 1.0 {
        lo *= 0.5;
        k += 1;
        if k > 2100 {
            return ExtReal::ZERO;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    ExtReal::Finite(hi)
}

/// `‖f‖_N = inf{r > 0 : Σ N(|f_i|/r) μ_i ≤ 1}`.
pub fn orlicz_norm(mu: &[f64], n: &YoungFunction, f: &[f64]) -> ExtReal {
    let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    gauge(|r| f.iter().zip(mu).map(|(x, m)| if *x == 0.0 { 0.0 } else { n.eval(x.abs() / r) * m }).sum(), scale)
}

/// Closed form `‖1_A‖_N = 1 / N⁻¹(1/μ(A))`.
pub fn indicator_norm(n: &YoungFunction, mass: f64) -> f64 {
    1.0 / n.inv(1.0 / mass)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub worst_lower_slack: f64,
    pub worst_upper_slack: f64,
    pub pass: bool,
}

/// Checks `c⁻¹‖f‖_{cN} ≤ ‖f‖_N ≤ ‖f‖_{cN}` for each `f`.
pub fn scaling_bound_check(mu: &[f64], n: &YoungFunction, c: f64, family: &[Vec<f64>]) -> Result<ScalingReport> {
    if c < 1.0 {
        return Err(Error::Invalid(format!("scaling factor must be ≥ 1, got {c}")));
    }
    let cn = n.clone().scaled(c, 1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    for f in family {
        let a = orlicz_norm(mu, n, f).to_f64();
        let b = orlicz_norm(mu, &cn, f).to_f64();
        let tol = 1e-10 * b.max(1e-300);
        lo = lo.min(a - b / c + tol);
        hi = hi.min(b - a + tol);
    }
    Ok(ScalingReport { worst_lower_slack: lo, worst_upper_slack: hi, pass: lo >= 0.0 && hi >= 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DominationWitness {
    Zero,
    Infinity,
}

#[derive(Debug, Clone, Serialize)]
pub struct Domination {
    pub dominated: bool,
    pub sup_ratio: f64,
    pub witness: Option<DominationWitness>,
    pub low_end_slope: f64,
    pub high_end_slope: f64,
}

/// Decides whether `sup N1/N2 < ∞` from the ratio on the grid and its trend at both ends.
pub fn domination(n1: &YoungFunction, n2: &YoungFunction, grid: &[f64]) -> Domination {
    let r: Vec<f64> = grid.iter().map(|s| ratio(n1.eval(*s), n2.eval(*s))).collect();
    let sup = r.iter().cloned().fold(0.0, f64::max);
    let k = (grid.len() / 10).max(2);
    let end = grid.len() - 1;
    let low = local_slope(grid[0], r[0], grid[k], r[k]);
    let high = local_slope(grid[end - k], r[end - k], grid[end], r[end]);
    let tol = 1e-3;
    let witness = if sup.is_infinite() {
        Some(if r[0].is_infinite() { DominationWitness::Zero } else { DominationWitness::Infinity })
    } else if high > tol {
        Some(DominationWitness::Infinity)
    } else if low < -tol {
        Some(DominationWitness::Zero)
    } else {
        None
    };
    Domination { dominated: witness.is_none(), sup_ratio: sup, witness, low_end_slope: low, high_end_slope: high }
}

/// Profile `h` of the class used to build `Φ_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `r^a`
    Power { a: f64 },
    /// `r^{a1} ∧ r^{a2}`
    MinPower { a1: f64, a2: f64 },
    /// `r^a log(λ + 1/r)^q`
    LogMinus { a: f64, q: f64, lambda: f64 },
    /// `r^a log(λ + r)^q`
    LogPlus { a: f64, q: f64, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileH {
    pub h: ProfileKind,
    pub alpha: f64,
    pub n: f64,
}

impl ProfileH {
    pub fn h(&self, r: f64) -> f64 {
        match &self.h {
            ProfileKind::Power { a } => r.powf(*a),
            ProfileKind::MinPower { a1, a2 } => r.powf(*a1).min(r.powf(*a2)),
            ProfileKind::LogMinus { a, q, lambda } => r.powf(*a) * (lambda + 1.0 / r).ln().powf(*q),
            ProfileKind::LogPlus { a, q, lambda } => r.powf(*a) * (lambda + r).ln().powf(*q),
        }
    }

    /// Class condition (i): `h` and `r/h(r)` increasing on a log grid.
    pub fn check_class(&self) -> bool {
        let g = log_grid(1e-8, 1e8, 400);
        g.windows(2).all(|w| {
            self.h(w[1]) >= self.h(w[0]) * (1.0 - 1e-12) && w[1] / self.h(w[1]) >= w[0] / self.h(w[0]) * (1.0 - 1e-12)
        })
    }

    /// `∫_0^x r^{α−1}/h(r) dr`.
    pub fn inner(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if let ProfileKind::Power { a } = self.h {
            let e = self.alpha - a;
            if e <= 0.0 {
                return Err(Error::Invalid(format!("inner integral diverges at 0 (exponent {e})")));
            }
            return Ok(x.powf(e) / e);
        }
        let g = |w: f64| {
            let r = x * (-w).exp();
            r.powf(self.alpha) / self.h(r)
        };
        let v = integrate_to_inf(g, 0.0, QuadOptions { rtol: 1e-11, atol: 0.0, max_intervals: 4000 })?;
        if !v.is_finite() {
            return Err(Error::Invalid("inner integral diverges".into()));
        }
        Ok(v)
    }

    /// `Φ_h(s) = ∫_0^s dt ∫_0^{t^{-1/n}} r^{α−1}/h(r) dr`.
    pub fn phi(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        if let ProfileKind::Power { a } = self.h {
            let e = self.alpha - a;
            let k = 1.0 - e / self.n;
            if e <= 0.0 || k <= 0.0 {
                return Err(Error::Invalid("Φ_h diverges for this profile".into()));
            }
            return Ok(s.powf(k) / (e * k));
        }
        let n = self.n;
        let err = std::cell::Cell::new(None);
        let f = |w: f64| {
            let t = s * (-w).exp();
            match self.inner(t.powf(-1.0 / n)) {
                Ok(v) => v * t,
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            }
        };
        let v = integrate_to_inf(f, 0.0, QuadOptions { rtol: 1e-10, atol: 0.0, max_intervals: 4000 })?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(v)
    }

    /// `N_h = Φ_h⁻¹`, tabulated on a log grid.
    pub fn invert(&self, s_min: f64, s_max: f64, points: usize) -> Result<YoungFunction> {
        let grid = log_grid(s_min, s_max, points);
        let phis = grid.iter().map(|s| self.phi(*s)).collect::<Result<Vec<_>>>()?;
        Ok(YoungFunction::Tabulated(LogTable::new(&phis, &grid, None)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(f64::INFINITY, f64::INFINITY), 1.0);
        assert_eq!(ratio(2.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(2.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn c_n_of_powers() {
        for p in [1.0, 1.2, 1.5, 2.0, 3.0] {
            assert!((YoungFunction::power(p).c_n().unwrap() - 1.0 / p).abs() < 1e-9);
        }
        let m = YoungFunction::MinPower { p1: 1.5, p2: 3.0 };
        assert!((m.c_n().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn square_gauge_is_l2() {
        let mu = [0.5, 2.0, 1.0];
        let f = [1.0, -0.3, 2.0];
        let l2 = (0.5 + 0.09 * 2.0 + 4.0f64).sqrt();
        assert!((orlicz_norm(&mu, &YoungFunction::power(2.0), &f).to_f64() - l2).abs() < 1e-12);
        assert_eq!(orlicz_norm(&mu, &YoungFunction::power(2.0), &[0.0; 3]), ExtReal::ZERO);
    }

    #[test]
    fn indicator_gauge_closed_form() {
        let mu = [0.5, 2.0, 1.0];
        let n = YoungFunction::MinPower { p1: 1.5, p2: 2.5 };
        let f = [1.0, 0.0, 1.0];
        assert!((orlicz_norm(&mu, &n, &f).to_f64() - indicator_norm(&n, 1.5)).abs() < 1e-12);
    }

    #[test]
    fn builtin_collapse_and_unit() {
        let n = builtin("stable_min", &json!({"n": 1.0, "alpha1": 1.0, "alpha2": 1.0})).unwrap();
        assert!((n.eval(3.0) - 3f64.powf(2.0)).abs() < 1e-12);
        assert_eq!(n.eval(1.0), 1.0);
        let l = builtin("log_plus", &json!({"n": 2.0, "alpha": 1.0, "q": 0.0})).unwrap();
        assert!((l.eval(5.0) - 5f64.powf(4.0 / 3.0)).abs() < 1e-12);
        assert!(builtin("nope", &json!({})).is_err());
    }

    #[test]
    fn log_families_are_young() {
        for (q, rec) in [(1.0, false), (-1.0, false), (2.0, true), (-2.0, true)] {
            let f = log_power_auto(1.5, q, rec).unwrap();
            f.check_young(400).unwrap();
        }
    }

    #[test]
    fn phi_h_closed_form() {
        let h = ProfileH { h: ProfileKind::Power { a: 0.5 }, alpha: 1.0, n: 1.0 };
        assert!((h.phi(4.0).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(h.phi(0.0).unwrap(), 0.0);
        let nh = h.invert(1e-6, 1e6, 121).unwrap();
        for u in [0.1, 1.0, 7.0] {
            assert!((nh.eval(u) - u * u / 16.0).abs() < 1e-9 * u * u);
        }
    }

    #[test]
    fn quadrature_profile_matches_closed_form() {
        let a = ProfileH { h: ProfileKind::MinPower { a1: 0.5, a2: 0.5 }, alpha: 1.0, n: 1.0 };
        assert!((a.phi(4.0).unwrap() - 8.0).abs() < 1e-7);
    }

    #[test]
    fn domination_examples() {
        let g = log_grid(1e-8, 1e8, 161);
        let d = domination(&YoungFunction::power(3.0), &YoungFunction::power(2.0), &g);
        assert!(!d.dominated && d.witness == Some(DominationWitness::Infinity));
        let d = domination(&YoungFunction::power(2.0), &YoungFunction::MaxPower { p1: 2.0, p2: 3.0 }, &g);
        assert!(d.dominated);
        let d = domination(&YoungFunction::power(2.0), &YoungFunction::power(2.0), &g);
        assert!(d.dominated && d.sup_ratio == 1.0);
    }
}
