//! Super-Poincaré rate functions: estimation, verification, the
//! semigroup-decay form and the isoperimetric lower bound they imply.

use crate::error::{check_len, Error, Result};
use crate::ext::ExtReal;
use crate::isoperimetry::IsoperimetricProfile;
use crate::measure::{generator, FiniteMeasureSpace, JumpKernel, KillingPotential, Spectral, ThetaProvider};
use crate::report::Report;
use crate::young::YoungFunction;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Non-increasing `β : (0,∞) → [0,∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum RateFunction {
    /// `c·r^{-a}`
    Power { c: f64, a: f64 },
    /// `c·(r^{-a} ∨ r^{-b})`
    MaxPower { c: f64, a: f64, b: f64 },
    /// `c·(r^{-a} ∧ r^{-b})`
    MinPower { c: f64, a: f64, b: f64 },
    /// `c·r^{-a}·log(2 + r)^{-b}`, or `log(2 + 1/r)` when `reciprocal`.
    LogPower { c: f64, a: f64, b: f64, reciprocal: bool },
    /// Right-continuous steps: `left` below `r[0]`, `beta[i]` on `[r[i], r[i+1])`.
    Step { r: Vec<f64>, beta: Vec<f64>, left: f64 },
    /// `a·β(b·r)`
    Scaled { inner: Box<RateFunction>, a: f64, b: f64 },
    /// `a·β(b·r^e)`
    Reparam { inner: Box<RateFunction>, a: f64, b: f64, e: f64 },
    /// `a·inf{s > 0 : s⁻¹N⁻¹(s) ≤ b·r^e}`
    Orlicz { n: YoungFunction, a: f64, b: f64, e: f64 },
}

/// `s ↦ N⁻¹(s)/s`, non-increasing for a Young function.
fn inv_ratio(n: &YoungFunction, s: f64) -> f64 {
    n.inv(s) / s
}

fn decreasing_inverse<F: Fn(f64) -> f64>(f: F, y: f64) -> f64 {
    // inf{s > 0 : f(s) ≤ y} for non-increasing f, in log scale
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut k = 0;
    while f(hi) > y {
        hi *= 2.0;
        k += 1;
        if k > 2000 {
            return f64::INFINITY;
        }
    }
    k = 0;
    while f(lo) <= y {
        lo *= 0.5;
        k += 1;
        if k > 2000 {
            return 0.0;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= y {
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

impl RateFunction {
    /// Step rate from a table, repairing monotonicity with a running minimum.
    /// Returns the rate and the number of repaired entries.
    pub fn step(r: Vec<f64>, beta: Vec<f64>, left: f64) -> Result<(Self, usize)> {
        check_len(r.len(), beta.len())?;
        if r.is_empty() || r.windows(2).any(|w| w[1] <= w[0]) || r[0] <= 0.0 {
            return Err(Error::NotRate("table abscissae must be positive and increasing".into()));
        }
        let mut repaired = 0;
        let mut out = Vec::with_capacity(beta.len());
        let mut run = left;
        for b in beta {
            if b < 0.0 || b.is_nan() {
                return Err(Error::NotRate(format!("negative value {b}")));
            }
            if b > run {
                repaired += 1;
            }
            run = run.min(b);
            out.push(run);
        }
        Ok((RateFunction::Step { r, beta: out, left }, repaired))
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::INFINITY;
        }
        match self {
            RateFunction::Power { c, a } => c * r.powf(-a),
            RateFunction::MaxPower { c, a, b } => c * r.powf(-a).max(r.powf(-b)),
            RateFunction::MinPower { c, a, b } => c * r.powf(-a).min(r.powf(-b)),
            RateFunction::LogPower { c, a, b, reciprocal } => {
                let l = if *reciprocal { (2.0 + 1.0 / r).ln() } else { (2.0 + r).ln() };
                c * r.powf(-a) * l.powf(-b)
            }
            RateFunction::Step { r: rs, beta, left } => {
                let i = rs.partition_point(|x| *x <= r);
                if i == 0 {
                    *left
                } else {
                    beta[i - 1]
                }
            }
            RateFunction::Scaled { inner, a, b } => a * inner.eval(b * r),
            RateFunction::Reparam { inner, a, b, e } => a * inner.eval(b * r.powf(*e)),
            RateFunction::Orlicz { n, a, b, e } => a * decreasing_inverse(|s| inv_ratio(n, s), b * r.powf(*e)),
        }
    }

    /// `β⁻¹(y) = inf{s > 0 : β(s) ≤ y}`; `+∞` when `β` never drops to `y`.
    pub fn inv(&self, y: f64) -> ExtReal {
        match self {
            RateFunction::Power { c, a } if y > 0.0 => ExtReal::Finite((y / c).powf(-1.0 / a)),
            RateFunction::Step { r, beta, left } => {
                if *left <= y {
                    return ExtReal::ZERO;
                }
                let i = beta.partition_point(|b| *b > y);
                if i == beta.len() {
                    ExtReal::Infinite
                } else {
                    ExtReal::Finite(r[i])
                }
            }
            RateFunction::Scaled { inner, a, b } => match inner.inv(y / a) {
                ExtReal::Finite(x) => ExtReal::Finite(x / b),
                e => e,
            },
            RateFunction::Reparam { inner, a, b, e } => match inner.inv(y / a) {
                ExtReal::Finite(x) => ExtReal::Finite((x / b).powf(1.0 / e)),
                inf => inf,
            },
            RateFunction::Orlicz { n, a, b, e } if y > 0.0 => {
                ExtReal::from_f64((inv_ratio(n, y / a) / b).powf(1.0 / e))
            }
            _ => {
                if y <= 0.0 {
                    return ExtReal::Infinite;
                }
                ExtReal::from_f64(decreasing_inverse(|s| self.eval(s), y))
            }
        }
    }

    pub fn scaled(self, a: f64, b: f64) -> Self {
        RateFunction::Scaled { inner: Box::new(self), a, b }
    }

    /// Non-increasing on a log grid.
    pub fn check_monotone(&self, grid: &[f64]) -> bool {
        grid.windows(2).all(|w| self.eval(w[1]) <= self.eval(w[0]) * (1.0 + 1e-12))
    }

    /// Infimum over the grid tail, used for the `β(∞) = 0` trend check.
    pub fn tail_value(&self, grid: &[f64]) -> f64 {
        grid.iter().map(|r| self.eval(*r)).fold(f64::INFINITY, f64::min)
    }

    /// CSV table with columns `r,beta`.
    pub fn to_csv(&self, grid: &[f64]) -> String {
        let mut s = String::from("r,beta\n");
        for r in grid {
            s.push_str(&format!("{:e},{:e}\n", r, self.eval(*r)));
        }
        s
    }
}

/// Quadratic data for `‖f‖₂² − r·E_V(f,f)` in the variables `g = μ f`.
struct SpForm {
    mu: Vec<f64>,
    /// `D L` (symmetric energy matrix).
    energy: DMatrix<f64>,
}

impl SpForm {
    fn new(space: &FiniteMeasureSpace, kernel: &JumpKernel, potential: Option<&KillingPotential>) -> Result<Self> {
        let l = generator(space, kernel, potential)?;
        let mu = space.mu().to_vec();
        let m = mu.len();
        let energy = DMatrix::from_fn(m, m, |i, k| 0.5 * (mu[i] * l[(i, k)] + mu[k] * l[(k, i)]));
        Ok(Self { mu, energy })
    }

    /// `B = D⁻¹(D − r·DL)D⁻¹`, so that `Q(f) = gᵀBg` with `g = μ∘f`.
    fn b(&self, r: f64) -> DMatrix<f64> {
        let m = self.mu.len();
        DMatrix::from_fn(m, m, |i, k| {
            let d = if i == k { self.mu[i] } else { 0.0 };
            (d - r * self.energy[(i, k)]) / (self.mu[i] * self.mu[k])
        })
    }

    fn value(&self, r: f64, f: &[f64]) -> f64 {
        let m = f.len();
        let mut q = 0.0;
        let mut n1 = 0.0;
        for i in 0..m {
            q += f[i] * f[i] * self.mu[i];
            n1 += f[i].abs() * self.mu[i];
            for k in 0..m {
                q -= r * f[i] * self.energy[(i, k)] * f[k];
            }
        }
        if n1 == 0.0 {
            f64::NEG_INFINITY
        } else {
            q / (n1 * n1)
        }
    }
}

/// Stationary points of `gᵀBg` on every face of the unit ℓ¹ sphere.
fn face_enumeration(b: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let m = b.nrows();
    let best = (1u32..(1u32 << m))
        .into_par_iter()
        .map(|support| {
            let idx: Vec<usize> = (0..m).filter(|i| support >> i & 1 == 1).collect();
            let k = idx.len();
            let sub = DMatrix::from_fn(k, k, |a, c| b[(idx[a], idx[c])]);
            let mut local = (f64::NEG_INFINITY, Vec::new());
            let Some(inv) = sub.clone().try_inverse() else { return local };
            // first sign fixed to + (g and −g give the same value)
            for signs in 0u32..(1u32 << (k - 1)) {
                let sigma = DVector::from_fn(k, |a, _| if a > 0 && signs >> (a - 1) & 1 == 1 { -1.0 } else { 1.0 });
                let y = &inv * &sigma;
                let denom = sigma.dot(&y);
                if !(denom > 0.0) {
                    continue;
                }
                if (0..k).any(|a| sigma[a] * y[a] < -1e-14 * denom.abs()) {
                    continue;
                }
                let mut g = vec![0.0; m];
                for a in 0..k {
                    g[idx[a]] = (sigma[a] * y[a]).max(0.0) * sigma[a] / denom;
                }
                let v = g.iter().enumerate().map(|(i, gi)| gi * (0..m).map(|c| b[(i, c)] * g[c]).sum::<f64>()).sum::<f64>();
                if v > local.0 {
                    local = (v, g);
                }
            }
            local
        })
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), |a, c| if c.0 > a.0 { c } else { a });
    best
}

fn project_l1_sphere(g: &mut [f64]) {
    // Euclidean projection onto the unit ℓ¹ ball, then radial push to the sphere
    let n1: f64 = g.iter().map(|x| x.abs()).sum();
    if n1 <= 1.0 {
        if n1 > 0.0 {
            g.iter_mut().for_each(|x| *x /= n1);
        }
        return;
    }
    let mut u: Vec<f64> = g.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if *uj > t {
            theta = t;
        }
    }
    for x in g.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
    let n1: f64 = g.iter().map(|x| x.abs()).sum();
    if n1 > 0.0 {
        g.iter_mut().for_each(|x| *x /= n1);
    }
}

/// Best value of `(‖f‖₂² − r E(f,f))/‖f‖₁²` found, and the maximizer.
///
/// Every candidate is evaluated exactly, so the value is a certified lower
/// bound on the optimal rate. For `m ≤ 12` all faces of the ℓ¹ sphere are
/// enumerated, which makes the value the exact optimum up to rounding.
pub fn sp_estimate_with(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: Option<&KillingPotential>,
    r: f64,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if !(r >= 0.0) {
        return Err(Error::Invalid(format!("rate argument must be nonnegative, got {r}")));
    }
    let form = SpForm::new(space, kernel, potential)?;
    let m = space.len();
    let mu = space.mu();
    let b = form.b(r);
    let mut best = (form.value(r, &vec![1.0; m]), vec![1.0; m]);
    let consider = |f: Vec<f64>, best: &mut (f64, Vec<f64>)| {
        let v = form.value(r, &f);
        if v > best.0 {
            *best = (v, f);
        }
    };
    for i in 0..m {
        let mut f = vec![0.0; m];
        f[i] = 1.0;
        consider(f, &mut best);
    }
    if m <= 12 {
        let (_, g) = face_enumeration(&b);
        if !g.is_empty() {
            consider(g.iter().zip(mu).map(|(x, w)| x / w).collect(), &mut best);
        }
    }
    // multi-start projected gradient ascent in g = μ∘f
    let eig = nalgebra::SymmetricEigen::new(b.clone());
    let lip = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, c| eig.eigenvalues[*c].total_cmp(&eig.eigenvalues[*a]));
    let starts: Vec<Vec<f64>> = (0..64)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d).wrapping_add(s as u64));
            match s {
                s if s < m.min(8) => eig.eigenvectors.column(order[s]).iter().cloned().collect(),
                s if s < 16 => {
                    let mask: u64 = rng.gen();
                    (0..m).map(|i| (mask >> (i % 64) & 1) as f64 * mu[i]).collect()
                }
                _ => (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            }
        })
        .collect();
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut g| {
            if g.iter().all(|x| *x == 0.0) {
                g[0] = 1.0;
            }
            project_l1_sphere(&mut g);
            let eta = 0.5 / lip;
            for _ in 0..400 {
                let grad: Vec<f64> = (0..m).map(|i| 2.0 * (0..m).map(|c| b[(i, c)] * g[c]).sum::<f64>()).collect();
                for i in 0..m {
                    g[i] += eta * grad[i];
                }
                project_l1_sphere(&mut g);
            }
            let f: Vec<f64> = g.iter().zip(mu).map(|(x, w)| x / w).collect();
            (form.value(r, &f), f)
        })
        .collect();
    for (_, f) in runs {
        consider(f, &mut best);
    }
    Ok(best)
}

pub fn sp_estimate(space: &FiniteMeasureSpace, kernel: &JumpKernel, r: f64, seed: u64) -> Result<f64> {
    Ok(sp_estimate_with(space, kernel, None, r, seed)?.0)
}

/// Step rate from estimates on `grid`, inflated by `factor`; the left value is
/// the exact `β(0+) = 1/μ_min` (also inflated).
pub fn estimated_rate(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: Option<&KillingPotential>,
    grid: &[f64],
    factor: f64,
    seed: u64,
) -> Result<RateFunction> {
    let vals = grid
        .iter()
        .map(|r| sp_estimate_with(space, kernel, potential, *r, seed).map(|v| v.0.max(0.0) * factor))
        .collect::<Result<Vec<_>>>()?;
    let mu_min = space.mu().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RateFunction::step(grid.to_vec(), vals, factor / mu_min)?.0)
}

/// (SP1) `‖f‖₂² ≤ r E_V(f,f) + β(r)‖f‖₁²` for every `(f, r)`.
pub fn sp_verify(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: Option<&KillingPotential>,
    beta: &RateFunction,
    family: &[Vec<f64>],
    r_grid: &[f64],
    tol: f64,
) -> Result<Report> {
    let form = SpForm::new(space, kernel, potential)?;
    let mut rep = Report::new("super-Poincare", tol);
    for (idx, f) in family.iter().enumerate() {
        check_len(space.len(), f.len())?;
        let l2 = space.l2_sq(f);
        let l1 = space.l1(f);
        let e = quad_energy(&form.energy, f);
        for &r in r_grid {
            rep.check("||f||_2^2 <= r E(f,f) + beta(r) ||f||_1^2", l2, r * e + beta.eval(r) * l1 * l1, || {
                format!("f#{idx}, r = {r}")
            });
        }
    }
    Ok(rep)
}

fn quad_energy(e: &DMatrix<f64>, f: &[f64]) -> f64 {
    let m = f.len();
    (0..m).map(|i| f[i] * (0..m).map(|k| e[(i, k)] * f[k]).sum::<f64>()).sum()
}

/// Exponential-decay form of (SP1) and its indicator specialization.
#[allow(clippy::too_many_arguments)]
pub fn sp_decay_check(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: Option<&KillingPotential>,
    beta: &RateFunction,
    family: &[Vec<f64>],
    t_grid: &[f64],
    r_grid: &[f64],
    tol: f64,
) -> Result<Report> {
    let spec = Spectral::new(space, kernel, potential)?;
    let mut rep = Report::new("semigroup decay", tol);
    let m = space.len();
    for &t in t_grid {
        let pt = spec.kernel(t)?;
        for (idx, f) in family.iter().enumerate() {
            let lhs = space.l2_sq(&pt.apply(space, f));
            let (l2, l1) = (space.l2_sq(f), space.l1(f));
            for &r in r_grid {
                let e = (-2.0 * t / r).exp();
                rep.check("||P_t f||^2 <= decay bound", lhs, l2 * e + beta.eval(r) * l1 * l1 * (1.0 - e), || {
                    format!("f#{idx}, t = {t}, r = {r}")
                });
            }
        }
        if m <= 16 {
            let half = spec.kernel(t / 2.0)?;
            for mask in 1u64..(1u64 << m) {
                let ind: Vec<f64> = (0..m).map(|i| (mask >> i & 1) as f64).collect();
                let lhs = space.l2_sq(&half.apply(space, &ind));
                let a = space.mask_mass(mask);
                for &r in r_grid {
                    let e = (-t / r).exp();
                    rep.check("||P_{t/2} 1_A||^2 <= indicator decay bound", lhs, a * e + a * a * beta.eval(r) * (1.0 - e), || {
                        format!("subset {mask:x}, t = {t}, r = {r}")
                    });
                }
            }
        }
    }
    Ok(rep)
}

pub const BUSER_FACTOR: f64 = 0.632_120_558_828_557_7; // 1 − e^{-1}

/// `κ(s) ≥ (1 − e⁻¹) / (2 Θ(β⁻¹(1/(2s))))` on the grid.
pub fn lemma2_bound(profile: &IsoperimetricProfile, theta: &ThetaProvider, beta: &RateFunction, s_grid: &[f64], tol: f64) -> Result<Report> {
    let mut rep = Report::new("isoperimetric bound from super-Poincare", tol);
    let mut skipped = 0;
    for &s in s_grid {
        let t = match beta.inv(1.0 / (2.0 * s)) {
            ExtReal::Finite(t) => t,
            ExtReal::Infinite => {
                skipped += 1;
                continue;
            }
        };
        let big = theta.big_theta(t)?;
        let bound = if big == 0.0 { f64::INFINITY } else { BUSER_FACTOR / (2.0 * big) };
        let kappa = profile.kappa(s).to_f64();
        rep.check("(1-1/e)/(2 Theta(beta^-1(1/2s))) <= kappa(s)", bound, kappa, || format!("s = {s}, t = {t}"));
    }
    if skipped > 0 {
        rep.note(format!("{skipped} grid points skipped: rate inverse infinite"));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(j: f64) -> (FiniteMeasureSpace, JumpKernel) {
        (FiniteMeasureSpace::uniform(2), JumpKernel::from_rows(&[vec![0.0, j], vec![j, 0.0]]).unwrap())
    }

    #[test]
    fn two_point_estimate_matches_sweep() {
        let (s, k) = two_point(0.7);
        for &r in &[0.0, 0.3, 1.0, 5.0] {
            let est = sp_estimate(&s, &k, r, 1).unwrap();
            // f = (cos θ, sin θ) swept densely
            let mut best = f64::NEG_INFINITY;
            for i in 0..200_000 {
                let th = i as f64 / 200_000.0 * std::f64::consts::TAU;
                let f = [th.cos(), th.sin()];
                let n1 = f[0].abs() + f[1].abs();
                let v = (f[0] * f[0] + f[1] * f[1] - r * 0.7 * (f[0] - f[1]).powi(2)) / (n1 * n1);
                best = best.max(v);
            }
            assert!((est - best).abs() < 1e-6, "r = {r}: {est} vs {best}");
        }
        assert!((sp_estimate(&s, &k, 0.0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_r_approaches_total_mass_floor() {
        let s = FiniteMeasureSpace::new(vec![1.0, 2.0, 0.5]).unwrap();
        let k = JumpKernel::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let v = sp_estimate(&s, &k, 1e6, 0).unwrap();
        assert!(v >= 1.0 / 3.5 - 1e-12 && v < 1.0 / 3.5 + 1e-3);
    }

    #[test]
    fn step_rate_inverse_and_repair() {
        let (r, n) = RateFunction::step(vec![1.0, 2.0, 4.0], vec![3.0, 3.5, 1.0], 5.0).unwrap();
        assert_eq!(n, 1);
        assert_eq!(r.eval(2.5), 3.0);
        assert_eq!(r.inv(3.0), ExtReal::Finite(1.0));
        assert_eq!(r.inv(2.0), ExtReal::Finite(4.0));
        assert_eq!(r.inv(0.5), ExtReal::Infinite);
        assert_eq!(r.inv(6.0), ExtReal::ZERO);
    }

    #[test]
    fn closed_form_inverse_round_trip() {
        let b = RateFunction::MaxPower { c: 2.0, a: 2.0, b: 0.5 };
        for y in [0.01, 1.0, 50.0] {
            let x = b.inv(y).to_f64();
            assert!((b.eval(x) - y).abs() < 1e-9 * y);
        }
    }
}
