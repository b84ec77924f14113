//! Theorem engines. Each one derives the conclusion objects of an implication
//! (Young functions, rates, constants) and verifies them on concrete models.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{check_len, Error, Result};
use crate::ext::ExtReal;
use crate::fit::{local_slope, log_grid};
use crate::isoperimetry::{profile_of, FlowModel, IsoperimetricProfile};
use crate::measure::{
    bar_extension, c_gamma, dirichlet_energy, killed_energy, l1_form, FiniteMeasureSpace, JumpKernel,
    KillingPotential, ThetaProvider, WeightFunction,
};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};
use crate::report::{Check, Report};
use crate::superpoincare::{lemma2_bound, sp_verify, RateFunction, BUSER_FACTOR};
use crate::young::{log_power_auto, orlicz_norm, PiecewiseLinear, YoungFunction};

/// Orlicz-Sobolev constant obtained from a super-Poincaré rate: the factor
/// `1/2` of the layer-cake step times the rescaling `4/(1 − e⁻¹)`.
pub const C_STAR: f64 = 2.0 / BUSER_FACTOR;

/// Outcome of one theorem engine on one input.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub inputs_digest: String,
    pub constants: BTreeMap<String, f64>,
    pub derived: BTreeMap<String, Value>,
    pub hypotheses_hold: bool,
    pub notes: Vec<String>,
    pub reports: Vec<Report>,
    pub empirical_constant: Option<f64>,
    pub pass: bool,
}

impl TheoremReport {
    pub fn new(theorem: impl Into<String>, inputs_digest: impl Into<String>) -> Self {
        Self {
            theorem: theorem.into(),
            inputs_digest: inputs_digest.into(),
            constants: BTreeMap::new(),
            derived: BTreeMap::new(),
            hypotheses_hold: true,
            notes: Vec::new(),
            reports: Vec::new(),
            empirical_constant: None,
            pass: true,
        }
    }

    pub fn push(&mut self, r: Report) {
        self.pass &= r.pass;
        self.reports.push(r);
    }

    pub fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), v);
    }

    pub fn derive<T: Serialize>(&mut self, name: &str, v: &T) {
        self.derived.insert(name.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn checks(&self) -> usize {
        self.reports.iter().map(|r| r.checks).sum()
    }

    pub fn violations(&self) -> usize {
        self.reports.iter().map(|r| r.violations).sum()
    }

    pub fn worst(&self) -> Option<&Check> {
        self.reports
            .iter()
            .filter_map(|r| r.worst.as_ref())
            .min_by(|a, b| a.scaled_slack().total_cmp(&b.scaled_slack()))
    }

    pub fn worst_slack(&self) -> f64 {
        self.worst().map_or(f64::INFINITY, Check::scaled_slack)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// CSV with columns `instance,theorem,pass,worst_slack`.
pub fn batch_csv<'a, I: IntoIterator<Item = (&'a str, &'a TheoremReport)>>(rows: I) -> String {
    let mut s = String::from("instance,theorem,pass,worst_slack\n");
    for (inst, r) in rows {
        s.push_str(&format!("{inst},{},{},{:e}\n", r.theorem, r.pass, r.worst_slack()));
    }
    s
}

/// FNV-1a over the canonical JSON of `inputs`.
pub fn digest<T: Serialize>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).unwrap_or_default();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn model_json(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    potential: Option<&KillingPotential>,
) -> Value {
    let m = space.len();
    let rows = |g: &dyn Fn(usize, usize) -> f64| (0..m).map(|i| (0..m).map(|k| g(i, k)).collect::<Vec<_>>()).collect::<Vec<_>>();
    json!({
        "mu": space.mu(),
        "j": rows(&|i, k| kernel.get(i, k)),
        "gamma": rows(&|i, k| gamma.get(i, k)),
        "v": potential.map(|p| p.v.clone()),
        "xi": potential.map(|p| p.xi.clone()),
    })
}

fn model_digest(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    potential: Option<&KillingPotential>,
    extra: Value,
) -> String {
    digest(&json!([model_json(space, kernel, gamma, potential), extra]))
}

/// Smallest `x > 0` with `f(x) ≥ target` for non-decreasing `f`.
fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64) -> Option<f64> {
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut k = 0;
    while f(hi) < target {
        hi *= 2.0;
        k += 1;
        if k > 2000 {
            return None;
        }
    }
    k = 0;
    while f(lo) >= target {
        lo *= 0.5;
        k += 1;
        if k > 1070 {
            return Some(0.0);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn mass_grid(profile: &IsoperimetricProfile) -> Vec<f64> {
    let mut g = log_grid(profile.min_mass * 0.5, profile.total_mass * 2.0, 48);
    for b in profile.breakpoints() {
        g.push(b);
        g.push(b * (1.0 + 1e-9));
    }
    g.sort_by(f64::total_cmp);
    g
}

fn rate_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 25)
}

/// Both sides of the layer-cake inequality after rescaling `f` so that
/// `∫ G(|f|) dμ = 1`; `scale` is the factor applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreSides {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

/// `∫dμ ∫₀^{|f|} κ_γ(1/G(s)) ds ≤ ½ ∫∫|f(x) − f(y)| γ J` with exact `κ_γ`.
pub fn lemma1_core(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    g: &dyn Fn(f64) -> f64,
    f: &[f64],
) -> Result<CoreSides> {
    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    lemma1_core_with(&profile, space, kernel, gamma, g, f)
}

/// As [`lemma1_core`] with a precomputed profile.
pub fn lemma1_core_with(
    profile: &IsoperimetricProfile,
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    g: &dyn Fn(f64) -> f64,
    f: &[f64],
) -> Result<CoreSides> {
    check_len(space.len(), f.len())?;
    let mu = space.mu();
    let total = |lam: f64| f.iter().zip(mu).map(|(x, w)| g(lam * x.abs()) * w).sum::<f64>();
    let scale = match solve_increasing(total, 1.0) {
        Some(s) if s > 0.0 && f.iter().any(|x| *x != 0.0) => s,
        _ => return Err(Error::Invalid("cannot normalize: G(|f|) integrates to 0 at every scale".into())),
    };
    let h: Vec<f64> = f.iter().map(|x| x * scale).collect();
    // s where 1/G(s) crosses a profile breakpoint
    let mut cuts: Vec<f64> = profile
        .breakpoints()
        .iter()
        .filter_map(|b| solve_increasing(g, 1.0 / b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut lhs = 0.0;
    for (x, w) in h.iter().zip(mu) {
        let a = x.abs();
        let mut knots = vec![0.0];
        knots.extend(cuts.iter().cloned().filter(|c| *c > 0.0 && *c < a * (1.0 - 1e-12)));
        knots.push(a);
        let mut acc = 0.0;
        for k in knots.windows(2) {
            if k[1] > k[0] {
                let mid = 0.5 * (k[0] + k[1]);
                acc += (k[1] - k[0]) * profile.kappa(1.0 / g(mid)).to_f64();
            }
        }
        lhs += w * acc;
    }
    let rhs = 0.5 * l1_form(space, kernel, gamma, &h)?;
    Ok(CoreSides { lhs, rhs, scale })
}

/// `‖f‖₂² ≤ (1/(2κ_γ(s))) ∫∫|f²(x) − f²(y)| γ J + (2/s)‖f‖₁²` on the family.
pub fn lemma1_poincare(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    s: f64,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    lemma1_poincare_with(&profile, space, kernel, gamma, s, family, tol)
}

pub fn lemma1_poincare_with(
    profile: &IsoperimetricProfile,
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    s: f64,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("Poincare from isoperimetry", tol);
    let kappa = profile.kappa(s);
    if kappa == ExtReal::ZERO {
        rep.note(format!("kappa({s}) = 0: inequality vacuous"));
        return Ok(rep);
    }
    for (idx, f) in family.iter().enumerate() {
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        let first = match kappa {
            ExtReal::Finite(k) => l1_form(space, kernel, gamma, &sq)? / (2.0 * k),
            ExtReal::Infinite => 0.0,
        };
        let rhs = first + 2.0 / s * space.l1(f).powi(2);
        rep.check("||f||_2^2 <= l1(f^2)/(2 kappa(s)) + (2/s)||f||_1^2", space.l2_sq(f), rhs, || format!("f#{idx}, s = {s}"));
    }
    Ok(rep)
}

/// `Φ(t) = ∫₀ᵗ dr/κ_γ(1/r)`, exact for the step profile. `Φ` is constant once
/// `1/r` drops below the smallest subset mass.
pub fn sobolev_phi(profile: &IsoperimetricProfile) -> Result<PiecewiseLinear> {
    let mut rs: Vec<f64> = profile.breakpoints().iter().map(|b| 1.0 / b).collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for r in rs {
        let a = *xs.last().expect("nonempty");
        let k = profile.kappa(2.0 / (a + r)).to_f64();
        if !(k > 0.0) {
            return Err(Error::Invalid("isoperimetric profile vanishes (disconnected model)".into()));
        }
        let y = ys.last().expect("nonempty") + (r - a) / k;
        xs.push(r);
        ys.push(y);
    }
    PiecewiseLinear::new(xs, ys)
}

/// Inverse of an increasing piecewise-linear `Φ` that is flat past its last knot.
fn invert_capped(phi: &PiecewiseLinear) -> Result<YoungFunction> {
    let cap = *phi.ys.last().expect("nonempty");
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for (x, y) in phi.xs.iter().zip(&phi.ys).skip(1) {
        if *y > *xs.last().expect("nonempty") {
            xs.push(*y);
            ys.push(*x);
        }
    }
    Ok(YoungFunction::Linear(PiecewiseLinear::new(xs, ys)?.with_cap(cap)))
}

/// `N = Φ⁻¹` from the exact profile and `‖f‖_N ≤ ½ ∫∫|f(x) − f(y)| γ J` on the family.
pub fn lemma1_sobolev(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<(YoungFunction, Report)> {
    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    let n = invert_capped(&sobolev_phi(&profile)?)?;
    let mut rep = Report::new("Orlicz-Sobolev from isoperimetry", tol);
    for (idx, f) in family.iter().enumerate() {
        let lhs = orlicz_norm(space.mu(), &n, f).to_f64();
        let rhs = 0.5 * l1_form(space, kernel, gamma, f)?;
        rep.check("||f||_N <= (1/2) l1(f)", lhs, rhs, || format!("f#{idx}"));
    }
    Ok((n, rep))
}

/// `Φ_γ(s) = ∫₀ˢ Θ_γ(β⁻¹(r)) dr` on `[0, s_max]` as a piecewise-linear function
/// (exact for step rates, chords of the concave curve otherwise).
/// `None` when `β⁻¹` is infinite near 0, so that `Φ_γ ≡ ∞`.
pub fn phi_gamma_table(beta: &RateFunction, theta: &ThetaProvider, s_max: f64) -> Result<Option<PiecewiseLinear>> {
    if !(s_max > 0.0) {
        return Err(Error::Invalid(format!("s_max must be positive, got {s_max}")));
    }
    let big = |r: f64| -> Result<f64> {
        match beta.inv(r) {
            ExtReal::Finite(t) => theta.big_theta(t),
            ExtReal::Infinite => Ok(f64::INFINITY),
        }
    };
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    match beta {
        RateFunction::Step { beta: b, left, .. } => {
            if b.last().is_some_and(|x| *x > 0.0) {
                return Ok(None);
            }
            let mut cuts: Vec<f64> = b.iter().cloned().chain([*left]).filter(|y| *y > 0.0 && *y < s_max).collect();
            cuts.push(s_max);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut a = 0.0;
            for c in cuts {
                let v = big(a)?;
                let y = ys.last().expect("nonempty") + (c - a) * v;
                xs.push(c);
                ys.push(y);
                a = c;
            }
        }
        _ => {
            let knots = log_grid(s_max * 1e-12, s_max, 241);
            if !beta.inv(knots[0] * 1e-3).is_finite() {
                return Ok(None);
            }
            let err = std::cell::Cell::new(None);
            let h = |r: f64| match big(r) {
                Ok(v) => v,
                Err(e) => {
                    err.set(Some(e));
                    f64::NAN
                }
            };
            let opts = QuadOptions::default();
            let mut a = 0.0;
            for c in knots {
                let piece = integrate(h, a, c, opts);
                if let Some(e) = err.take() {
                    return Err(e);
                }
                let y = ys.last().expect("nonempty") + piece?;
                if !y.is_finite() {
                    return Ok(None);
                }
                xs.push(c);
                ys.push(y);
                a = c;
            }
        }
    }
    Ok(Some(PiecewiseLinear::new(xs, ys)?))
}

/// `N_γ = Φ_γ⁻¹`, or `None` when `Φ_γ` is infinite.
pub fn thm21_young(beta: &RateFunction, theta: &ThetaProvider, s_max: f64) -> Result<Option<YoungFunction>> {
    match phi_gamma_table(beta, theta, s_max)? {
        Some(phi) => Ok(Some(invert_capped(&phi)?)),
        None => Ok(None),
    }
}

/// `l1(f) + 2 Σ |f_i| ξ_i v_i μ_i`, the `L¹` energy of `f̄` on the extended space.
pub fn l1_bar(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    potential: Option<&KillingPotential>,
    f: &[f64],
) -> Result<f64> {
    let base = l1_form(space, kernel, gamma, f)?;
    Ok(match potential {
        Some(p) => base + 2.0 * (0..space.len()).map(|i| f[i].abs() * p.xi[i] * p.v[i] * space.mu()[i]).sum::<f64>(),
        None => base,
    })
}

/// Builds `N_γ` from `β` and checks `‖f‖_{N_γ} ≤ C★ · l1(f)` on the family.
///
/// With a killing potential the profile is the cemetery version and the
/// energy on the right is that of the extension, which yields the killed
/// inequality with constant `2C★`.
pub fn thm21_verify(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    potential: Option<&KillingPotential>,
    beta: &RateFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<TheoremReport> {
    let inputs = json!({ "beta": beta, "family": family.len() });
    let mut rep = TheoremReport::new("thm21", model_digest(space, kernel, gamma, potential, inputs));
    rep.constant("C_star", C_STAR);
    let theta = ThetaProvider::new(space, kernel, gamma, potential)?;
    let tail = beta.tail_value(&log_grid(1e2, 1e12, 21));
    if tail > 0.0 {
        rep.notes.push(format!("beta does not reach 0 on [1e2, 1e12] (tail value {tail:e})"));
    }
    let s_max = 2.0 / space.mu().iter().cloned().fold(f64::INFINITY, f64::min);
    let n = match thm21_young(beta, &theta, s_max)? {
        Some(n) => n,
        None => {
            rep.hypotheses_hold = false;
            rep.notes.push("hypothesis Phi_gamma < inf fails; inequality not asserted".into());
            return Ok(rep);
        }
    };
    rep.derive("N_gamma", &n);

    let model = match potential {
        Some(p) => FlowModel::killed(space, kernel, gamma, p)?,
        None => FlowModel::new(space, kernel, gamma)?,
    };
    let profile = profile_of(&model)?;
    rep.push(lemma2_bound(&profile, &theta, beta, &mass_grid(&profile), tol)?);

    let mut main = Report::new("Orlicz-Sobolev from super-Poincare", tol);
    let mut emp: f64 = 0.0;
    for (idx, f) in family.iter().enumerate() {
        let lhs = orlicz_norm(space.mu(), &n, f).to_f64();
        let l1 = l1_bar(space, kernel, gamma, potential, f)?;
        main.check("||f||_{N_gamma} <= C_star l1(f)", lhs, C_STAR * l1, || format!("f#{idx}"));
        if lhs > 0.0 {
            emp = emp.max(lhs / l1);
        }
    }
    rep.push(main);
    rep.empirical_constant = Some(emp);
    Ok(rep)
}

/// `β₁(r) = 2 inf{s > 0 : C s⁻¹N⁻¹(s) ≤ r}`.
pub fn beta1_from_young(n: &YoungFunction, c: f64) -> RateFunction {
    RateFunction::Orlicz { n: n.clone(), a: 2.0, b: 1.0 / c, e: 1.0 }
}

/// `β(r) = 4 inf{s > 0 : s⁻¹N⁻¹(s) ≤ √r/(2C√(2c_γ))}`.
pub fn sp_rate_from_young(n: &YoungFunction, c: f64, c_gamma: f64) -> RateFunction {
    RateFunction::Orlicz { n: n.clone(), a: 4.0, b: 1.0 / (2.0 * c * (2.0 * c_gamma).sqrt()), e: 0.5 }
}

/// `Φ(t) = 4 ∫₀ᵗ β₁⁻¹(r/2) dr`.
pub fn phi_from_rate(beta1: &RateFunction, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let g = |r: f64| beta1.inv(r / 2.0).to_f64();
    // r = t e^{-y} keeps the singularity at 0 integrable for the quadrature
    let v = integrate_to_inf(|y| g(t * (-y).exp()) * t * (-y).exp(), 0.0, QuadOptions::default())?;
    if !v.is_finite() {
        return Err(Error::Invalid(format!("Phi diverges at t = {t}")));
    }
    Ok(4.0 * v)
}

/// `N = Φ⁻¹` for `Φ` from [`phi_from_rate`], tabulated on `[t_max·1e-12, t_max]`.
pub fn young_from_rate(beta1: &RateFunction, t_max: f64, points: usize) -> Result<YoungFunction> {
    let ts = log_grid(t_max * 1e-12, t_max, points);
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mut prev_t = 0.0;
    let mut acc = 0.0;
    for t in ts {
        acc += if prev_t == 0.0 {
            phi_from_rate(beta1, t)?
        } else {
            4.0 * integrate(|r| beta1.inv(r / 2.0).to_f64(), prev_t, t, QuadOptions::default())?
        };
        prev_t = t;
        if acc > *xs.last().expect("nonempty") {
            xs.push(acc);
            ys.push(t);
        }
    }
    Ok(YoungFunction::Linear(PiecewiseLinear::new(xs, ys)?))
}

fn with_indicators(m: usize, family: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut fam = family.to_vec();
    if m <= 12 {
        fam.extend(crate::instance::indicators(m));
    }
    fam
}

fn pi_report(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    beta1: &RateFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("Poincare with rate beta_1", tol);
    for (idx, f) in family.iter().enumerate() {
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        let (l2, l1, e) = (space.l2_sq(f), space.l1(f), l1_form(space, kernel, gamma, &sq)?);
        for r in rate_grid() {
            rep.check("||f||_2^2 <= r l1(f^2) + beta_1(r)||f||_1^2", l2, r * e + beta1.eval(r) * l1 * l1, || {
                format!("f#{idx}, r = {r}")
            });
        }
    }
    Ok(rep)
}

/// Orlicz-Sobolev with constant `C` ⇒ isoperimetric bound, `β₁`-Poincaré and
/// super-Poincaré. The family should vanish somewhere; indicators of proper
/// subsets are appended for `m ≤ 12`.
pub fn thm41(
    n: &YoungFunction,
    c: f64,
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<TheoremReport> {
    if !n.ratio_increasing() {
        return Err(Error::NotYoung("s^-1 N(s) is not increasing".into()));
    }
    let inputs = json!({ "N": n, "C": c, "family": family.len() });
    let mut rep = TheoremReport::new("thm41", model_digest(space, kernel, gamma, None, inputs));
    rep.constant("C", c);
    let fam = with_indicators(space.len(), family);

    let mut pre = Report::new("hypothesis: Orlicz-Sobolev at C", tol);
    for (idx, f) in fam.iter().enumerate() {
        let lhs = orlicz_norm(space.mu(), n, f).to_f64();
        pre.check("||f||_N <= C l1(f)", lhs, c * l1_form(space, kernel, gamma, f)?, || format!("f#{idx}"));
    }
    rep.push(pre);

    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    let mut iso = Report::new("isoperimetric bound", tol);
    for s in mass_grid(&profile) {
        let bound = 1.0 / (2.0 * c * s * n.inv(1.0 / s));
        iso.check("1/(2 C s N^-1(1/s)) <= kappa(s)", bound, profile.kappa(s).to_f64(), || format!("s = {s}"));
    }
    rep.push(iso);

    let beta1 = beta1_from_young(n, c);
    rep.push(pi_report(space, kernel, gamma, &beta1, &fam, tol)?);
    rep.derive("beta_1", &beta1);

    let cg = c_gamma(space, kernel, gamma);
    rep.constant("c_gamma", cg);
    let beta = sp_rate_from_young(n, c, cg);
    rep.push(sp_verify(space, kernel, None, &beta, &fam, &rate_grid(), tol)?);
    rep.derive("beta", &beta);
    Ok(rep)
}

/// `β₁`-Poincaré ⇒ isoperimetric bound, Orlicz-Sobolev with `N = Φ⁻¹` at
/// constant `1/2`, and super-Poincaré with `β(r) = 2β₁(√r/(2√(2c_γ)))`.
pub fn thm42(
    beta1: &RateFunction,
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<TheoremReport> {
    let inputs = json!({ "beta_1": beta1, "family": family.len() });
    let mut rep = TheoremReport::new("thm42", model_digest(space, kernel, gamma, None, inputs));
    let fam = with_indicators(space.len(), family);
    rep.push(pi_report(space, kernel, gamma, beta1, &fam, tol)?);
    let tail = beta1.tail_value(&log_grid(1e2, 1e12, 21));
    if tail > 1e-6 * beta1.eval(1.0) {
        rep.notes.push(format!("beta_1 tail does not vanish (value {tail:e} on [1e2, 1e12])"));
    }

    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    let mut iso = Report::new("isoperimetric bound", tol);
    for s in mass_grid(&profile) {
        let bound = 1.0 / (4.0 * beta1.inv(1.0 / (2.0 * s)).to_f64());
        iso.check("1/(4 beta_1^-1(1/(2s))) <= kappa(s)", bound, profile.kappa(s).to_f64(), || format!("s = {s}"));
    }
    rep.push(iso);

    let t_max = 2.0 / profile.min_mass;
    let n = young_from_rate(beta1, t_max, 481)?;
    let mut os = Report::new("Orlicz-Sobolev with N = Phi^-1", tol);
    for (idx, f) in fam.iter().enumerate() {
        let lhs = orlicz_norm(space.mu(), &n, f).to_f64();
        os.check("||f||_N <= (1/2) l1(f)", lhs, 0.5 * l1_form(space, kernel, gamma, f)?, || format!("f#{idx}"));
    }
    rep.push(os);
    rep.derive("N", &n);

    let cg = c_gamma(space, kernel, gamma);
    rep.constant("c_gamma", cg);
    let beta = RateFunction::Reparam { inner: Box::new(beta1.clone()), a: 2.0, b: 1.0 / (2.0 * (2.0 * cg).sqrt()), e: 0.5 };
    rep.push(sp_verify(space, kernel, None, &beta, &fam, &rate_grid(), tol)?);
    rep.derive("beta", &beta);
    Ok(rep)
}

/// The four Young/rate correspondences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cor41Case {
    /// `N = s^{p₁} ∧ s^{p₂}` with `β₁ ≍ r^{−p₁'} ∨ r^{−p₂'}`
    MinPower,
    /// `N = s^{p₁} ∨ s^{p₂}` with `β₁ ≍ r^{−p₁'} ∧ r^{−p₂'}`
    MaxPower,
    /// `N = s^p log(λ + 1/s)^q` with `β₁ ≍ r^{−p'} log(2 + r)^{−q/(p−1)}`
    LogSmall,
    /// `N = s^p log(λ + s)^q` with `β₁ ≍ r^{−p'} log(2 + 1/r)^{−q/(p−1)}`
    LogLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    YoungToRate,
    RateToYoung,
}

/// A Young function and its tagged rate (constant 1) for one case.
#[derive(Debug, Clone, Serialize)]
pub struct Cor41Pair {
    pub case: Cor41Case,
    pub young: YoungFunction,
    pub rate: RateFunction,
}

/// Builds the pair; `(a, b)` are `(p₁, p₂)` for the power cases and `(p, q)` for the log cases.
pub fn cor41_pair(case: Cor41Case, a: f64, b: f64) -> Result<Cor41Pair> {
    let conj = |p: f64| p / (p - 1.0);
    match case {
        Cor41Case::MinPower | Cor41Case::MaxPower => {
            if !(a > 1.0 && b > 1.0) {
                return Err(Error::Invalid(format!("exponents must exceed 1, got ({a}, {b})")));
            }
            let (young, rate) = if case == Cor41Case::MinPower {
                (YoungFunction::MinPower { p1: a, p2: b }, RateFunction::MaxPower { c: 1.0, a: conj(a), b: conj(b) })
            } else {
                (YoungFunction::MaxPower { p1: a, p2: b }, RateFunction::MinPower { c: 1.0, a: conj(a), b: conj(b) })
            };
            Ok(Cor41Pair { case, young, rate })
        }
        Cor41Case::LogSmall | Cor41Case::LogLarge => {
            if !(a > 1.0) {
                return Err(Error::Invalid(format!("exponent must exceed 1, got {a}")));
            }
            let small = case == Cor41Case::LogSmall;
            let young = log_power_auto(a, b, small)?;
            let rate = RateFunction::LogPower { c: 1.0, a: conj(a), b: b / (a - 1.0), reciprocal: !small };
            Ok(Cor41Pair { case, young, rate })
        }
    }
}

/// Converts in either direction with the traced constants: `Young → rate`
/// gives `β₁(r) = 2 inf{s : C s⁻¹N⁻¹(s) ≤ r}`, `rate → Young` gives
/// `N = Φ⁻¹` with `Φ(t) = 4∫₀ᵗ β₁⁻¹(r/2) dr` tabulated up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Converter {
    pub direction: Direction,
    pub c: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum Converted {
    Rate(RateFunction),
    Young(YoungFunction),
}

impl Converter {
    pub fn apply_young(&self, n: &YoungFunction) -> Result<Converted> {
        if self.direction != Direction::YoungToRate {
            return Err(Error::Invalid("converter expects a rate".into()));
        }
        Ok(Converted::Rate(beta1_from_young(n, self.c)))
    }

    pub fn apply_rate(&self, beta1: &RateFunction) -> Result<Converted> {
        if self.direction != Direction::RateToYoung {
            return Err(Error::Invalid("converter expects a Young function".into()));
        }
        Ok(Converted::Young(young_from_rate(beta1, self.t_max, 481)?))
    }
}

pub fn cor41(direction: Direction, c: f64, t_max: f64) -> Converter {
    Converter { direction, c, t_max }
}

/// Round trip `N → β₁ → N′` on a wide log grid.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    pub case: Cor41Case,
    pub low_slope: (f64, f64),
    pub high_slope: (f64, f64),
    /// Range of `N′/N` over the grid.
    pub young_ratio: (f64, f64),
    /// Range of `β₁ / tagged rate` over the grid.
    pub rate_ratio: (f64, f64),
    pub slope_tol: f64,
    pub pass: bool,
}

pub fn cor41_round_trip(pair: &Cor41Pair, c: f64, t_range: (f64, f64), slope_tol: f64) -> Result<RoundTrip> {
    let beta1 = beta1_from_young(&pair.young, c);
    let n = &pair.young;
    // N′(Φ(t)) = t, so slopes of N′ are d log t / d log Φ
    let slopes = |t: f64| -> Result<(f64, f64)> {
        let t2 = t * 2.0;
        let (u1, u2) = (phi_from_rate(&beta1, t)?, phi_from_rate(&beta1, t2)?);
        Ok((local_slope(u1, n.eval(u1), u2, n.eval(u2)), local_slope(u1, t, u2, t2)))
    };
    let low_slope = slopes(t_range.0)?;
    let high_slope = slopes(t_range.1 / 2.0)?;
    let mut yr = (f64::INFINITY, 0.0f64);
    for t in log_grid(t_range.0, t_range.1, 61) {
        let u = phi_from_rate(&beta1, t)?;
        let q = t / n.eval(u);
        yr = (yr.0.min(q), yr.1.max(q));
    }
    let mut rr = (f64::INFINITY, 0.0f64);
    for r in log_grid(1e-12, 1e12, 61) {
        let q = beta1.eval(r) / pair.rate.eval(r);
        rr = (rr.0.min(q), rr.1.max(q));
    }
    let pass = (low_slope.0 - low_slope.1).abs() <= slope_tol && (high_slope.0 - high_slope.1).abs() <= slope_tol;
    Ok(RoundTrip { case: pair.case, low_slope, high_slope, young_ratio: yr, rate_ratio: rr, slope_tol, pass })
}

/// `Ē(f̄, ḡ) = E_V(f, g)` on the family, consecutive pairs.
pub fn gf_check(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: &KillingPotential,
    gamma: &WeightFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let bar = bar_extension(space, kernel, potential, gamma)?;
    let mut rep = Report::new("extension identity", tol);
    for (idx, w) in family.windows(2).enumerate() {
        let a = dirichlet_energy(&bar.space, &bar.kernel, &bar.lift(&w[0]), &bar.lift(&w[1]))?;
        let b = killed_energy(space, kernel, potential, &w[0], &w[1])?;
        // equality as two inequalities, so the slack scales with the energies
        rep.check("Ebar(fbar, gbar) <= E_V(f, g)", a, b, || format!("pair #{idx}"));
        rep.check("E_V(f, g) <= Ebar(fbar, gbar)", b, a, || format!("pair #{idx}"));
    }
    Ok(rep)
}

/// Killed models: the extension identity, the forward Orlicz-Sobolev
/// inequality with `N̄_γ`, and the converse rate
/// `β(r) = c₁ inf{s : s⁻¹N⁻¹(s) ≤ c₂√r}` checked against `E_V`.
///
/// The converse applies the super-Poincaré conclusion to the extended space
/// with `c₁ = 4`, `c₂ = 1/(2C★√(2c̄_γ))`; these are sufficient, not minimal.
#[allow(clippy::too_many_arguments)]
pub fn thm43(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: &KillingPotential,
    gamma: &WeightFunction,
    beta: &RateFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<TheoremReport> {
    for i in 0..space.len() {
        if potential.v[i] > 0.0 && potential.xi[i] == 0.0 {
            return Err(Error::Invalid(format!("xi vanishes at point {i} where V > 0: profile infinite")));
        }
    }
    let inputs = json!({ "beta": beta, "family": family.len() });
    let mut rep = TheoremReport::new("thm43", model_digest(space, kernel, gamma, Some(potential), inputs));
    rep.push(gf_check(space, kernel, potential, gamma, family, tol)?);
    rep.push(sp_verify(space, kernel, Some(potential), beta, family, &rate_grid(), tol)?);

    let fwd = thm21_verify(space, kernel, gamma, Some(potential), beta, family, tol)?;
    rep.constant("C_star", C_STAR);
    rep.constant("C_killed", 2.0 * C_STAR);
    rep.hypotheses_hold = fwd.hypotheses_hold;
    rep.notes.extend(fwd.notes.iter().cloned());
    rep.empirical_constant = fwd.empirical_constant;
    let n: Option<YoungFunction> = fwd.derived.get("N_gamma").and_then(|v| serde_json::from_value(v.clone()).ok());
    rep.derived.extend(fwd.derived.clone());
    for r in fwd.reports {
        rep.push(r);
    }
    let Some(n) = n else {
        return Ok(rep);
    };

    let bar = bar_extension(space, kernel, potential, gamma)?;
    let cg = c_gamma(&bar.space, &bar.kernel, &bar.gamma);
    let c2 = 1.0 / (2.0 * C_STAR * (2.0 * cg).sqrt());
    rep.constant("c_gamma_bar", cg);
    rep.constant("c1", 4.0);
    rep.constant("c2", c2);
    let conv = RateFunction::Orlicz { n, a: 4.0, b: c2, e: 0.5 };
    let mut back = sp_verify(space, kernel, Some(potential), &conv, family, &rate_grid(), tol)?;
    back.name = "converse super-Poincare".into();
    rep.push(back);
    rep.derive("beta_converse", &conv);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(j: f64) -> (FiniteMeasureSpace, JumpKernel) {
        (FiniteMeasureSpace::uniform(2), JumpKernel::from_rows(&[vec![0.0, j], vec![j, 0.0]]).unwrap())
    }

    #[test]
    fn sobolev_two_point_is_linear() {
        let (s, k) = two_point(3.0);
        let fam = vec![vec![1.0, 0.0], vec![0.0, 2.5]];
        let (n, rep) = lemma1_sobolev(&s, &k, &WeightFunction::ones(2), &fam, 1e-12).unwrap();
        assert!((n.eval(0.2) - 0.6).abs() < 1e-12);
        assert!(n.eval(0.4).is_infinite());
        assert!(rep.pass);
    }

    #[test]
    fn core_indicator_is_single_level() {
        let (s, k) = two_point(3.0);
        let g = |x: f64| x * x;
        let c = lemma1_core(&s, &k, &WeightFunction::ones(2), &g, &[1.0, 0.0]).unwrap();
        // f = 1_{a}: scale 1, κ(1/s²) = 3 for s < 1 ⇒ lhs = 3, rhs = ½·2·3
        assert!((c.scale - 1.0).abs() < 1e-12);
        assert!((c.lhs - 3.0).abs() < 1e-9 && (c.rhs - 3.0).abs() < 1e-12);
        assert!(lemma1_core(&s, &k, &WeightFunction::ones(2), &g, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn phi_gamma_two_point_power_rate() {
        let j = 0.8;
        let (s, k) = two_point(j);
        let pot = KillingPotential::zero(2);
        let th = ThetaProvider::new(&s, &k, &WeightFunction::ones(2), Some(&pot)).unwrap();
        let beta = RateFunction::Power { c: 0.5, a: 1.0 };
        let phi = phi_gamma_table(&beta, &th, 4.0).unwrap().unwrap();
        // Θ(t) = (1 − e^{−2jt})/j, β⁻¹(r) = c/r
        let exact = |x: f64| {
            integrate(|r| (1.0 - (-2.0 * j * 0.5 / r).exp()) / j, 0.0, x, QuadOptions::default()).unwrap()
        };
        for (x, y) in phi.xs.iter().zip(&phi.ys).filter(|p| *p.0 >= 1e-3).step_by(20) {
            assert!((y - exact(*x)).abs() < 1e-6 * exact(*x), "{x}: {y} vs {}", exact(*x));
        }
        assert_eq!(phi.eval(0.0), 0.0);
    }

    #[test]
    fn inflating_beta_shrinks_n() {
        let (s, k) = two_point(1.0);
        let th = ThetaProvider::new(&s, &k, &WeightFunction::ones(2), None).unwrap();
        let b = RateFunction::Power { c: 1.0, a: 1.0 };
        let n1 = thm21_young(&b, &th, 2.0).unwrap().unwrap();
        let n2 = thm21_young(&b.clone().scaled(2.0, 1.0), &th, 2.0).unwrap().unwrap();
        for u in [0.01, 0.1, 0.5] {
            assert!(n2.eval(u) <= n1.eval(u) + 1e-12);
        }
    }

    #[test]
    fn conservative_step_rate_reports_infinite_phi() {
        let (s, k) = two_point(1.0);
        let beta = RateFunction::step(vec![0.1, 1.0], vec![0.9, 0.6], 1.0).unwrap().0;
        let r = thm21_verify(&s, &k, &WeightFunction::ones(2), None, &beta, &[vec![1.0, 0.0]], 1e-9).unwrap();
        assert!(!r.hypotheses_hold && r.pass);
    }

    #[test]
    fn beta1_of_square_is_closed_form() {
        // N = s²: β₁(r) = 2C²/r², Φ(t) = 16C·2(t/4)^{1/2}
        let c = 0.7;
        let b = beta1_from_young(&YoungFunction::power(2.0), c);
        for r in [0.1, 1.0, 10.0] {
            assert!((b.eval(r) - 2.0 * c * c / (r * r)).abs() < 1e-9 * b.eval(r));
        }
        let t = 3.0;
        assert!((phi_from_rate(&b, t).unwrap() - 32.0 * c * (t / 4.0).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn cor41_collapse_case_is_classical() {
        let pair = cor41_pair(Cor41Case::MinPower, 2.0, 2.0).unwrap();
        let rt = cor41_round_trip(&pair, 1.0, (1e-20, 1e20), 1e-3).unwrap();
        assert!(rt.pass, "{rt:?}");
        assert!((rt.rate_ratio.0 - rt.rate_ratio.1).abs() < 1e-6 * rt.rate_ratio.1);
    }
}
