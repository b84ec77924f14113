//! Subordinated simple random walks on Zⁿ, their Poissonized semigroups,
//! truncated stable-like kernels and radial integrals for the reference
//! functions `f_s(x) = (s − |x|)⁺`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::fit::{log_grid, loglog_fit, PowerFit};
use crate::measure::{FiniteMeasureSpace, JumpKernel};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};
use crate::superpoincare::{sp_estimate, sp_verify, RateFunction};
use crate::report::Report;
use crate::young::YoungFunction;

fn check_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("lattice dimension must be 1, 2 or 3, got {n}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("alpha must lie in (0, 2), got {alpha}")))
    }
}

/// Values on the cube `[−R, R]ⁿ`, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub n: usize,
    pub radius: usize,
    pub values: Vec<f64>,
}

impl LatticeWindow {
    pub fn zeros(n: usize, radius: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, radius, values: vec![0.0; (2 * radius + 1).pow(n as u32)] })
    }

    pub fn delta(n: usize, radius: usize) -> Result<Self> {
        let mut w = Self::zeros(n, radius)?;
        let c = w.values.len() / 2;
        w.values[c] = 1.0;
        Ok(w)
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.n {
            return None;
        }
        let r = self.radius as i64;
        let mut idx = 0usize;
        for &xi in x {
            if xi < -r || xi > r {
                return None;
            }
            idx = idx * self.side() + (xi + r) as usize;
        }
        Some(idx)
    }

    /// Value at offset `x`; zero outside the window.
    pub fn get(&self, x: &[i64]) -> f64 {
        self.index(x).map_or(0.0, |i| self.values[i])
    }

    pub fn offset(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut x = vec![0i64; self.n];
        for i in (0..self.n).rev() {
            x[i] = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        x
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `max_x |v(x) − v(−x)|`; the index of `−x` is the mirror index.
    pub fn max_asymmetry(&self) -> f64 {
        let len = self.values.len();
        (0..len).map(|i| (self.values[i] - self.values[len - 1 - i]).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &LatticeWindow) -> f64 {
        let r = self.radius.max(other.radius);
        let probe = LatticeWindow { n: self.n, radius: r, values: Vec::new() };
        (0..(2 * r + 1).pow(self.n as u32))
            .map(|i| {
                let x = probe.offset(i);
                (self.get(&x) - other.get(&x)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Restriction to a smaller concentric window.
    pub fn restrict(&self, radius: usize) -> LatticeWindow {
        let mut out = LatticeWindow { n: self.n, radius, values: vec![0.0; (2 * radius + 1).pow(self.n as u32)] };
        for i in 0..out.values.len() {
            out.values[i] = self.get(&out.offset(i));
        }
        out
    }

    /// One row per site: offset coordinates then value.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let names = ["x1", "x2", "x3"];
        s.push_str(&names[..self.n].join(","));
        s.push_str(",value\n");
        for (i, v) in self.values.iter().enumerate() {
            let x = self.offset(i);
            for xi in x {
                s.push_str(&format!("{xi},"));
            }
            s.push_str(&format!("{v:e}\n"));
        }
        s
    }

    fn strides(&self) -> Vec<usize> {
        let side = self.side();
        (0..self.n).map(|i| side.pow((self.n - 1 - i) as u32)).collect()
    }
}

/// One step of the nearest-neighbour walk; the caller guarantees no mass
/// reaches the window boundary.
fn srw_step(cur: &LatticeWindow) -> LatticeWindow {
    let mut next = LatticeWindow { n: cur.n, radius: cur.radius, values: vec![0.0; cur.values.len()] };
    let strides = cur.strides();
    let side = cur.side();
    let w = 1.0 / (2 * cur.n) as f64;
    for (idx, &v) in cur.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for &st in &strides {
            let coord = (idx / st) % side;
            if coord + 1 < side {
                next.values[idx + st] += w * v;
            }
            if coord > 0 {
                next.values[idx - st] += w * v;
            }
        }
    }
    next
}

/// Transition kernels `q_0, …, q_K` of the simple random walk on `[−R, R]ⁿ`.
pub fn srw_kernels(n: usize, k_max: usize, radius: usize) -> Result<Vec<LatticeWindow>> {
    if radius < k_max {
        return Err(Error::Invalid(format!("window radius {radius} is smaller than the walk length {k_max}")));
    }
    let mut out = vec![LatticeWindow::delta(n, radius)?];
    for _ in 0..k_max {
        let next = srw_step(out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(out)
}

fn ln_binom(k: u64, j: u64) -> f64 {
    ln_gamma(k as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((k - j) as f64 + 1.0)
}

/// `P(S_k = j)` for the simple walk on Z.
fn b1(k: u64, j: i64) -> f64 {
    let a = j.unsigned_abs();
    if a > k || (k - a) % 2 == 1 {
        return 0.0;
    }
    (ln_binom(k, (k + a) / 2) - k as f64 * std::f64::consts::LN_2).exp()
}

/// Closed form of `q_k(0, x)` for `n ∈ {1, 2}`; in two dimensions the
/// rotated coordinates `x₁ ± x₂` move as independent one-dimensional walks.
pub fn srw_closed(n: usize, k: u64, x: &[i64]) -> Result<f64> {
    match (n, x) {
        (1, [j]) => Ok(b1(k, *j)),
        (2, [a, b]) => Ok(b1(k, a + b) * b1(k, a - b)),
        _ => Err(Error::Invalid(format!("closed-form walk kernel needs n ∈ {{1, 2}} and a matching offset, got n = {n}"))),
    }
}

/// Weights `c(k) = (α/2)Γ(k − α/2) / (Γ(1 − α/2)Γ(k + 1))`, `k = 1..=K`, of
/// the subordinator with Bernstein function `r^{α/2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubordinationWeights {
    pub alpha: f64,
    pub k: usize,
    pub c: Vec<f64>,
    pub tail: f64,
}

impl SubordinationWeights {
    /// `c(k)`, 1-based.
    pub fn weight(&self, k: usize) -> f64 {
        self.c[k - 1]
    }

    pub fn partial_sum(&self) -> f64 {
        self.c.iter().sum()
    }

    /// `c(k)·k^{1+α/2}`; decreases in `k` towards [`weight_limit`].
    pub fn scaled_weight(&self, k: usize) -> f64 {
        self.weight(k) * (k as f64).powf(1.0 + self.alpha / 2.0)
    }
}

pub fn subord_weights(alpha: f64, k_max: usize) -> Result<SubordinationWeights> {
    check_alpha(alpha)?;
    if k_max == 0 {
        return Err(Error::Invalid("truncation depth must be at least 1".into()));
    }
    let a = alpha / 2.0;
    let mut c = Vec::with_capacity(k_max);
    let mut ck = a;
    // 1 − Σ_{j≤k} c(j) = Π_{j≤k} (j − a)/j, free of cancellation
    let mut tail = 1.0;
    for k in 1..=k_max {
        c.push(ck);
        tail *= (k as f64 - a) / k as f64;
        ck *= (k as f64 - a) / (k as f64 + 1.0);
    }
    Ok(SubordinationWeights { alpha, k: k_max, c, tail })
}

/// `c(k)` straight from the Γ formula.
pub fn weight_formula(alpha: f64, k: usize) -> f64 {
    let a = alpha / 2.0;
    (a.ln() - ln_gamma(1.0 - a) + ln_gamma(k as f64 - a) - ln_gamma(k as f64 + 1.0)).exp()
}

/// `Σ_{k>K} c(k) = Γ(K + 1 − α/2) / (Γ(1 − α/2)Γ(K + 1))`.
pub fn tail_formula(alpha: f64, k: usize) -> f64 {
    let a = alpha / 2.0;
    (ln_gamma(k as f64 + 1.0 - a) - ln_gamma(1.0 - a) - ln_gamma(k as f64 + 1.0)).exp()
}

/// `lim_k c(k)·k^{1+α/2} = α / (2Γ(1 − α/2))`.
pub fn weight_limit(alpha: f64) -> f64 {
    alpha / (2.0 * gamma(1.0 - alpha / 2.0))
}

/// `p₁ = Σ_{k≤K} c(k) q_k` with its truncation accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct P1Kernel {
    pub alpha: f64,
    pub k: usize,
    pub window: LatticeWindow,
    /// Missing weight `Σ_{k>K} c(k)`; bounds every entry's error since `q_k ≤ 1`.
    pub tail: f64,
    /// Sharper entrywise bound `Σ_{k>K} c(k) max_x q_k(x)`.
    pub entry_bound: f64,
}

/// `Σ_{k>K} c(k)(2/(πk))^{n/2}`, using `max_x q_k ≤ (2/(πk))^{n/2}` (n ≤ 2) and
/// that `c(k)k^{1+α/2}` is non-increasing.
fn entry_tail_bound(w: &SubordinationWeights, n: usize) -> f64 {
    let a = w.alpha / 2.0;
    let e = a + n as f64 / 2.0;
    let kf = w.k as f64;
    w.scaled_weight(w.k) * (2.0 / std::f64::consts::PI).powf(n as f64 / 2.0) * kf.powf(-e) / e
}

/// `p₁` on `[−R, R]ⁿ` by iterating the walk (`R ≥ K`).
pub fn p1_kernel(n: usize, alpha: f64, k_max: usize, radius: usize) -> Result<P1Kernel> {
    if radius < k_max {
        return Err(Error::Invalid(format!("window radius {radius} is smaller than the truncation depth {k_max}")));
    }
    let w = subord_weights(alpha, k_max)?;
    let mut q = LatticeWindow::delta(n, radius)?;
    let mut p = LatticeWindow::zeros(n, radius)?;
    for k in 1..=k_max {
        q = srw_step(&q);
        let c = w.weight(k);
        for (pv, qv) in p.values.iter_mut().zip(&q.values) {
            *pv += c * qv;
        }
    }
    let entry_bound = if n <= 2 { entry_tail_bound(&w, n) } else { w.tail };
    Ok(P1Kernel { alpha, k: k_max, window: p, tail: w.tail, entry_bound })
}

/// `p₁(0, x)` from the closed-form walk kernels; `K` may exceed `|x|`.
pub fn p1_at(w: &SubordinationWeights, n: usize, x: &[i64]) -> Result<f64> {
    let js: Vec<i64> = match (n, x) {
        (1, [a]) => vec![a.abs()],
        (2, [a, b]) => vec![(a + b).abs(), (a - b).abs()],
        _ => return Err(Error::Invalid("closed-form p1 needs n ∈ {1, 2}".into())),
    };
    let jmax = *js.iter().max().expect("non-empty") as u64;
    let k0 = if jmax == 0 { 2 } else { jmax };
    let mut q = srw_closed(n, k0, x)?;
    let mut k = k0;
    let mut sum = 0.0;
    while k as usize <= w.k {
        sum += w.weight(k as usize) * q;
        let kf = k as f64;
        for &j in &js {
            let m = (kf + j as f64) / 2.0;
            q *= (kf + 2.0) * (kf + 1.0) / (4.0 * (m + 1.0) * (kf - m + 1.0));
        }
        k += 2;
    }
    Ok(sum)
}

/// `p₁` along the first axis with a power-law fit over `|x| ∈ [2, R/2]`.
#[derive(Debug, Clone, Serialize)]
pub struct P1Profile {
    pub n: usize,
    pub alpha: f64,
    pub k: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub entry_bound: f64,
    pub fit: PowerFit,
    /// max/min of `p₁(x)|x|^{n+α}` over the fitted points.
    pub band: f64,
}

pub fn p1_profile(n: usize, alpha: f64, k_max: usize, radius: usize) -> Result<P1Profile> {
    if radius < 4 {
        return Err(Error::Invalid("profile needs R ≥ 4".into()));
    }
    let w = subord_weights(alpha, k_max)?;
    let radii: Vec<f64> = (2..=radius / 2).map(|r| r as f64).collect();
    let values = radii
        .iter()
        .map(|&r| {
            let mut x = vec![0i64; n];
            x[0] = r as i64;
            p1_at(&w, n, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(&radii, &values).ok_or_else(|| Error::Invalid("degenerate p1 profile".into()))?;
    let e = n as f64 + alpha;
    let scaled: Vec<f64> = radii.iter().zip(&values).map(|(r, v)| v * r.powf(e)).collect();
    let band = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(P1Profile { n, alpha, k: k_max, radii, values, entry_bound: entry_tail_bound(&w, n), fit, band })
}

/// `P_t = e^{−t} Σ_k t^k p₁^{*k} / k!` on the window of `p₁`.
#[derive(Debug, Clone, Serialize)]
pub struct SemigroupWindow {
    pub t: f64,
    pub terms: usize,
    pub window: LatticeWindow,
    pub poisson_tail: f64,
    /// Mass lost by truncating the convolution powers to the window.
    pub leak: f64,
}

impl SemigroupWindow {
    /// Entrywise error budget against the infinite-lattice kernel.
    pub fn error_bound(&self) -> f64 {
        self.poisson_tail + self.leak
    }
}

/// `P(Poisson(t) > k)`.
pub fn poisson_tail(t: f64, k: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let mut w = (-t).exp();
    let mut cdf = w;
    for j in 1..=k {
        w *= t / j as f64;
        cdf += w;
    }
    // summing the tail directly avoids cancellation once cdf ≈ 1
    let mut tail = 0.0;
    let mut wj = w;
    for j in (k + 1)..(k + 2000) {
        wj *= t / j as f64;
        tail += wj;
        if wj < 1e-300 || (j as f64 > t && wj < tail * 1e-17) {
            break;
        }
    }
    if tail > 0.0 {
        tail
    } else {
        (1.0 - cdf).max(0.0)
    }
}

/// Smallest number of terms with Poisson tail below `1e-12`.
pub fn poisson_terms(t: f64) -> usize {
    let mut k = 0;
    while poisson_tail(t, k) >= 1e-12 {
        k += 1;
    }
    k
}

/// Direct convolution truncated to the window of `a`.
pub fn convolve_direct(a: &LatticeWindow, b: &LatticeWindow) -> LatticeWindow {
    let mut out = LatticeWindow { n: a.n, radius: a.radius, values: vec![0.0; a.values.len()] };
    let bnz: Vec<(Vec<i64>, f64)> =
        b.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (b.offset(i), *v)).collect();
    let mut z = vec![0i64; a.n];
    for (i, &av) in a.values.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        let x = a.offset(i);
        for (y, bv) in &bnz {
            for d in 0..a.n {
                z[d] = x[d] + y[d];
            }
            if let Some(j) = out.index(&z) {
                out.values[j] += av * bv;
            }
        }
    }
    out
}

fn fft_nd(data: &mut [Complex64], side: usize, n: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(side) } else { planner.plan_fft_forward(side) };
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for axis in 0..n {
        let stride = side.pow((n - 1 - axis) as u32);
        let block = stride * side;
        for base in 0..data.len() / side {
            let outer = base / stride;
            let inner = base % stride;
            let start = outer * block + inner;
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[start + j * stride];
            }
            fft.process(&mut line);
            for (j, l) in line.iter().enumerate() {
                data[start + j * stride] = *l;
            }
        }
    }
}

/// Same as [`convolve_direct`] through zero-padded FFTs.
pub fn convolve_fft(a: &LatticeWindow, b: &LatticeWindow) -> LatticeWindow {
    let n = a.n;
    let side = a.side() + b.side() - 1;
    let len = side.pow(n as u32);
    let embed = |w: &LatticeWindow| {
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (i, v) in w.values.iter().enumerate() {
            let x = w.offset(i);
            let mut idx = 0;
            for xi in x {
                idx = idx * side + (xi + w.radius as i64) as usize;
            }
            buf[idx] = Complex64::new(*v, 0.0);
        }
        buf
    };
    let mut planner = FftPlanner::new();
    let mut fa = embed(a);
    let mut fb = embed(b);
    fft_nd(&mut fa, side, n, &mut planner, false);
    fft_nd(&mut fb, side, n, &mut planner, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_nd(&mut fa, side, n, &mut planner, true);
    let scale = 1.0 / len as f64;
    let shift = (a.radius + b.radius) as i64;
    let mut out = LatticeWindow { n, radius: a.radius, values: vec![0.0; a.values.len()] };
    for i in 0..out.values.len() {
        let x = out.offset(i);
        let mut idx = 0;
        for xi in x {
            idx = idx * side + (xi + shift) as usize;
        }
        out.values[i] = fa[idx].re * scale;
    }
    out
}

fn semigroup_with(
    p1: &P1Kernel,
    t: f64,
    terms: usize,
    max_leak: f64,
    conv: fn(&LatticeWindow, &LatticeWindow) -> LatticeWindow,
) -> Result<SemigroupWindow> {
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("time must be non-negative, got {t}")));
    }
    let ptail = poisson_tail(t, terms);
    if ptail >= 1e-12 {
        return Err(Error::Invalid(format!("{terms} terms leave Poisson tail {ptail:e} at t = {t}; need {}", poisson_terms(t))));
    }
    let win = &p1.window;
    let m1 = win.sum();
    let mut w = (-t).exp();
    let mut pow = LatticeWindow::delta(win.n, win.radius)?;
    let mut acc = LatticeWindow { n: win.n, radius: win.radius, values: pow.values.iter().map(|v| w * v).collect() };
    let mut expected = w;
    let mut mk = 1.0;
    for k in 1..=terms {
        pow = conv(&pow, win);
        w *= t / k as f64;
        mk *= m1;
        expected += w * mk;
        for (a, v) in acc.values.iter_mut().zip(&pow.values) {
            *a += w * v;
        }
    }
    let leak = (expected - acc.sum()).max(0.0);
    if leak > max_leak {
        let safe = (win.radius as f64 * (leak / max_leak).powf(1.0 / p1.alpha)).ceil() as usize;
        return Err(Error::WindowOverflow { radius: win.radius, leak, safe_radius: safe });
    }
    Ok(SemigroupWindow { t, terms, window: acc, poisson_tail: ptail, leak })
}

pub fn lattice_semigroup(p1: &P1Kernel, t: f64, terms: usize, max_leak: f64) -> Result<SemigroupWindow> {
    semigroup_with(p1, t, terms, max_leak, convolve_direct)
}

pub fn lattice_semigroup_fft(p1: &P1Kernel, t: f64, terms: usize, max_leak: f64) -> Result<SemigroupWindow> {
    semigroup_with(p1, t, terms, max_leak, convolve_fft)
}

/// `(1 − φ(θ))^{α/2}` with `φ(θ) = n⁻¹ Σ cos θ_i`, the symbol of `I − p₁` for `K = ∞`.
pub fn p1_symbol(alpha: f64, theta: &[f64]) -> f64 {
    let phi = theta.iter().map(|t| t.cos()).sum::<f64>() / theta.len() as f64;
    (1.0 - phi).max(0.0).powf(alpha / 2.0)
}

/// `p_t(0, 0) = π^{−n} ∫_{[0,π]ⁿ} exp(−t(1 − φ(θ))^{α/2}) dθ` for the untruncated walk.
pub fn on_diagonal(n: usize, alpha: f64, t: f64) -> Result<f64> {
    check_dim(n)?;
    check_alpha(alpha)?;
    let pi = std::f64::consts::PI;
    let opts = QuadOptions { rtol: 1e-9, atol: 1e-15, max_intervals: 4000 };
    // resolve the peak at the origin, of width about t^{-1/α}
    let w = (4.0 * t.max(1.0).powf(-1.0 / alpha)).min(pi);
    let split = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let g = |x: f64| f(x).unwrap_or(f64::NAN);
        Ok(integrate(g, 0.0, w, opts)? + integrate(g, w, pi, opts)?)
    };
    let f = |th: &[f64]| (-t * p1_symbol(alpha, th)).exp();
    let v = match n {
        1 => split(&|a| Ok(f(&[a])))?,
        2 => split(&|a| split(&|b| Ok(f(&[a, b]))))?,
        _ => split(&|a| split(&|b| split(&|c| Ok(f(&[a, b, c])))))?,
    };
    Ok(v / pi.powi(n as i32))
}

/// The semigroup of the untruncated walk on the torus `(Z/L)ⁿ`.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    pub n: usize,
    pub l: usize,
    pub values: Vec<f64>,
}

impl TorusKernel {
    pub fn get(&self, x: &[i64]) -> f64 {
        let l = self.l as i64;
        let idx = x.iter().fold(0usize, |acc, &xi| acc * self.l + xi.rem_euclid(l) as usize);
        self.values[idx]
    }

    /// `max_i Σ_x |p(x) − p(x − e_i)|`.
    pub fn gradient_sum(&self) -> f64 {
        let l = self.l;
        (0..self.n)
            .map(|axis| {
                let stride = l.pow((self.n - 1 - axis) as u32);
                (0..self.values.len())
                    .map(|i| {
                        let c = (i / stride) % l;
                        let j = if c == 0 { i + (l - 1) * stride } else { i - stride };
                        (self.values[i] - self.values[j]).abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Inverse FFT of `exp(−t(1 − φ)^{α/2})` on the `Lⁿ` frequency grid.
pub fn torus_kernel(n: usize, alpha: f64, t: f64, l: usize) -> Result<TorusKernel> {
    check_dim(n)?;
    check_alpha(alpha)?;
    if l < 4 {
        return Err(Error::Invalid("torus side must be at least 4".into()));
    }
    let len = l.pow(n as u32);
    let step = 2.0 * std::f64::consts::PI / l as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut th = vec![0.0; n];
    for (i, b) in buf.iter_mut().enumerate() {
        let mut r = i;
        for d in (0..n).rev() {
            th[d] = (r % l) as f64 * step;
            r /= l;
        }
        *b = Complex64::new((-t * p1_symbol(alpha, &th)).exp(), 0.0);
    }
    let mut planner = FftPlanner::new();
    fft_nd(&mut buf, l, n, &mut planner, true);
    let scale = 1.0 / len as f64;
    Ok(TorusKernel { n, l, values: buf.iter().map(|c| c.re * scale).collect() })
}

/// Fitted power law of a decay quantity over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub n: usize,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: PowerFit,
    pub expected_slope: f64,
    /// `|fitted/expected − 1|`.
    pub rel_error: f64,
    /// Largest relative change of the data when the torus side is halved.
    pub torus_sensitivity: Option<f64>,
}

fn decay_fit(n: usize, alpha: f64, times: &[f64], values: Vec<f64>, expected: f64) -> Result<DecayFit> {
    let fit = loglog_fit(times, &values).ok_or_else(|| Error::Invalid("degenerate decay data".into()))?;
    Ok(DecayFit { n, alpha, times: times.to_vec(), values, fit, expected_slope: expected, rel_error: (fit.slope / expected - 1.0).abs(), torus_sensitivity: None })
}

/// `t ↦ p_t(0, 0)`; expected slope `−n/α`.
pub fn heat_decay(n: usize, alpha: f64, times: &[f64]) -> Result<DecayFit> {
    let v = times.iter().map(|&t| on_diagonal(n, alpha, t)).collect::<Result<Vec<_>>>()?;
    decay_fit(n, alpha, times, v, -(n as f64) / alpha)
}

/// `t ↦ max_e Σ_x |p_t(0, x) − p_t(e, x)|` on a torus of side `l`; expected slope `−1/α`.
/// The same data on side `l/2` gives the reported torus sensitivity.
pub fn gradient_decay(n: usize, alpha: f64, times: &[f64], l: usize) -> Result<DecayFit> {
    let grad = |side: usize| -> Result<Vec<f64>> { times.iter().map(|&t| Ok(torus_kernel(n, alpha, t, side)?.gradient_sum())).collect() };
    let v = grad(l)?;
    let half = grad(l / 2)?;
    let sens = v.iter().zip(&half).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max);
    let mut fit = decay_fit(n, alpha, times, v, -1.0 / alpha)?;
    fit.torus_sensitivity = Some(sens);
    Ok(fit)
}

/// `c₂(r^{−n/α} ∨ r^{−n/2})`.
pub fn truncated_kernel_rate(n: usize, alpha: f64, c2: f64) -> Result<RateFunction> {
    check_alpha(alpha)?;
    if !(c2 > 0.0) {
        return Err(Error::Invalid("rate constant must be positive".into()));
    }
    let nf = n as f64;
    Ok(RateFunction::MaxPower { c: c2, a: nf / alpha, b: nf / 2.0 })
}

/// Gradient profile `t ↦ 2c₁/h(t^{1/α} ∧ t^{1/2})` of the truncated form.
pub fn truncated_theta(alpha: f64, c1: f64, h: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |t: f64| 2.0 * c1 / h(t.powf(1.0 / alpha).min(t.sqrt()))
}

/// `Φ̃_h(s) = ∫_0^s dr ∫_0^{r^{−α/n} ∨ r^{−2/n}} dt / h(t^{1/α} ∧ t^{1/2})`.
pub fn tilde_phi_h(n: usize, alpha: f64, h: &dyn Fn(f64) -> f64, s: f64) -> Result<f64> {
    let nf = n as f64;
    let opts = QuadOptions { rtol: 1e-9, atol: 1e-300, max_intervals: 4000 };
    let integrand = |t: f64| 1.0 / h(t.powf(1.0 / alpha).min(t.sqrt()));
    // inner primitive on [0, u]; singular like t^{-1/2} at 0, so substitute t = v²
    let inner = |u: f64| -> f64 {
        let g = |v: f64| 2.0 * v * integrand(v * v);
        let lo = u.min(1.0).sqrt();
        let mut acc = integrate(g, 0.0, lo, opts).unwrap_or(f64::NAN);
        if u > 1.0 {
            acc += integrate(g, 1.0, u.sqrt(), opts).unwrap_or(f64::NAN);
        }
        acc
    };
    let upper = |r: f64| r.powf(-alpha / nf).max(r.powf(-2.0 / nf));
    let outer = |r: f64| inner(upper(r));
    // outer integrand behaves like r^{-1/n} near 0; substitute r = s·w^n
    let g = |w: f64| s * nf * w.powf(nf - 1.0) * outer(s * w.powf(nf));
    let v = if s > 1.0 {
        let w1 = (1.0 / s).powf(1.0 / nf);
        integrate(g, 0.0, w1, opts)? + integrate(g, w1, 1.0, opts)?
    } else {
        integrate(g, 0.0, 1.0, opts)?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature { a: 0.0, b: s })
    }
}

/// Lattice truncated stable-like kernel `|x|^{−(n+α)} 1{0 < |x| ≤ ρ}` and its symbol.
#[derive(Debug, Clone)]
pub struct TruncatedLattice {
    pub n: usize,
    pub alpha: f64,
    pub rho: usize,
    // (x₁, x₂, weight × orbit size) over the closed first quadrant
    terms: Vec<(usize, usize, f64)>,
    total: f64,
}

impl TruncatedLattice {
    pub fn new(n: usize, alpha: f64, rho: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if !(1..=2).contains(&n) || rho == 0 {
            return Err(Error::Invalid("truncated lattice symbol needs n ∈ {1, 2} and ρ ≥ 1".into()));
        }
        let e = n as f64 + alpha;
        let r2 = (rho * rho) as f64;
        let mut terms = Vec::new();
        if n == 1 {
            for j in 1..=rho {
                terms.push((j, 0, 2.0 * (j as f64).powf(-e)));
            }
        } else {
            for a in 0..=rho {
                for b in 0..=rho {
                    let d2 = (a * a + b * b) as f64;
                    if d2 == 0.0 || d2 > r2 {
                        continue;
                    }
                    let orbit = (if a > 0 { 2.0 } else { 1.0 }) * (if b > 0 { 2.0 } else { 1.0 });
                    terms.push((a, b, orbit * d2.powf(-e / 2.0)));
                }
            }
        }
        let total = terms.iter().map(|t| t.2).sum();
        Ok(Self { n, alpha, rho, terms, total })
    }

    /// `ψ(θ) = Σ_x w(x)(1 − cos θ·x)`.
    pub fn psi(&self, theta: &[f64]) -> f64 {
        let c1: Vec<f64> = (0..=self.rho).map(|j| (theta[0] * j as f64).cos()).collect();
        if self.n == 1 {
            return self.terms.iter().map(|&(a, _, w)| w * (1.0 - c1[a])).sum();
        }
        let c2: Vec<f64> = (0..=self.rho).map(|j| (theta[1] * j as f64).cos()).collect();
        let s: f64 = self.terms.iter().map(|&(a, b, w)| w * c1[a] * c2[b]).sum();
        (self.total - s).max(0.0)
    }

    /// `β(r) = (2π)^{−n} ∫ (1 − rψ(θ))⁺ dθ`, a valid (SP1) rate on Zⁿ with counting measure
    /// (Plancherel plus `|f̂| ≤ ‖f‖₁`).
    pub fn rates(&self, r_grid: &[f64]) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        let k_lo = 0.01 / self.rho as f64;
        // ∫_0^{k_lo} with ψ ≈ ψ(k_lo)(k/k_lo)² handled in closed form
        let near = |r: f64, psi_lo: f64, dim: usize| -> f64 {
            let a = r * psi_lo;
            match dim {
                1 => {
                    if a <= 1.0 {
                        k_lo * (1.0 - a / 3.0)
                    } else {
                        2.0 / 3.0 * k_lo / a.sqrt()
                    }
                }
                _ => {
                    if a <= 1.0 {
                        k_lo * k_lo / 2.0 * (1.0 - a / 2.0)
                    } else {
                        k_lo * k_lo / (4.0 * a)
                    }
                }
            }
        };
        let trap = |xs: &[f64], ys: &[f64]| -> f64 { xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum() };
        if self.n == 1 {
            let ks = log_grid(k_lo, pi, 2000);
            let psis: Vec<f64> = ks.iter().map(|&k| self.psi(&[k])).collect();
            return r_grid
                .iter()
                .map(|&r| {
                    let ys: Vec<f64> = psis.iter().map(|p| (1.0 - r * p).max(0.0)).collect();
                    (near(r, psis[0], 1) + trap(&ks, &ys)) / pi
                })
                .collect();
        }
        // octant symmetry of the square lattice: 8 ∫_0^{π/4} dφ ∫_0^{π/cos φ} ... k dk
        let n_ang = 17;
        let angs: Vec<f64> = (0..n_ang).map(|i| pi / 4.0 * i as f64 / (n_ang - 1) as f64).collect();
        let simpson = |vals: &[f64]| -> f64 {
            let h = pi / 4.0 / (n_ang - 1) as f64;
            let mut s = vals[0] + vals[n_ang - 1];
            for (i, v) in vals.iter().enumerate().take(n_ang - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        };
        let rays: Vec<(Vec<f64>, Vec<f64>)> = angs
            .iter()
            .map(|&phi| {
                let ks = log_grid(k_lo, pi / phi.cos(), 400);
                let ps = ks.iter().map(|&k| self.psi(&[k * phi.cos(), k * phi.sin()])).collect();
                (ks, ps)
            })
            .collect();
        r_grid
            .iter()
            .map(|&r| {
                let per: Vec<f64> = rays
                    .iter()
                    .map(|(ks, ps)| {
                        let ys: Vec<f64> = ks.iter().zip(ps).map(|(k, p)| (1.0 - r * p).max(0.0) * k).collect();
                        near(r, ps[0], 2) + trap(ks, &ys)
                    })
                    .collect();
                8.0 * simpson(&per) / (4.0 * pi * pi)
            })
            .collect()
    }

    /// Rates on the two scaling windows: `r = 1/ψ` at `|θ| ∈ [64/ρ, 0.1]` (stable regime)
    /// and at `|θ| ∈ [0.001/ρ, 0.1/ρ]` (diffusive regime).
    pub fn fit(&self) -> Result<TruncatedFit> {
        let rho = self.rho as f64;
        // the narrow stable window needs ρ ≳ 10³; small ρ falls back to a wider one
        let stable = if 64.0 / rho < 0.01 { (64.0 / rho, 0.1) } else { (8.0 / rho, 0.4) };
        self.fit_with(stable, (0.001 / rho, 0.1 / rho))
    }

    /// Fits over `r = 1/ψ(θe₁)` for `θ` in the two given frequency windows.
    pub fn fit_with(&self, stable: (f64, f64), diffusive: (f64, f64)) -> Result<TruncatedFit> {
        let r_of = |k: f64| {
            let mut th = vec![0.0; self.n];
            th[0] = k;
            1.0 / self.psi(&th)
        };
        let small_range = (r_of(stable.1), r_of(stable.0));
        let large_range = (r_of(diffusive.1), r_of(diffusive.0));
        let fit_on = |(a, b): (f64, f64)| -> Result<PowerFit> {
            let g = log_grid(a, b, 12);
            let v = self.rates(&g);
            loglog_fit(&g, &v).ok_or_else(|| Error::Invalid("degenerate truncated rate".into()))
        };
        let nf = self.n as f64;
        Ok(TruncatedFit {
            n: self.n,
            alpha: self.alpha,
            rho: self.rho,
            small: fit_on(small_range)?,
            large: fit_on(large_range)?,
            small_range,
            large_range,
            small_expected: -nf / self.alpha,
            large_expected: -nf / 2.0,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedFit {
    pub n: usize,
    pub alpha: f64,
    pub rho: usize,
    pub small: PowerFit,
    pub large: PowerFit,
    pub small_range: (f64, f64),
    pub large_range: (f64, f64),
    pub small_expected: f64,
    pub large_expected: f64,
}

impl TruncatedFit {
    pub fn rel_errors(&self) -> (f64, f64) {
        ((self.small.slope / self.small_expected - 1.0).abs(), (self.large.slope / self.large_expected - 1.0).abs())
    }
}

/// Nearest-neighbour graph on the box `{0, …, side−1}ⁿ` with counting measure:
/// the finite-window version of the kernel truncated at distance 1.
pub fn truncated_window(n: usize, side: usize) -> Result<(FiniteMeasureSpace, JumpKernel)> {
    check_dim(n)?;
    let m = side.pow(n as u32);
    let mut rows = vec![vec![0.0; m]; m];
    for i in 0..m {
        for axis in 0..n {
            let st = side.pow(axis as u32);
            if (i / st) % side + 1 < side {
                rows[i][i + st] = 1.0;
                rows[i + st][i] = 1.0;
            }
        }
    }
    Ok((FiniteMeasureSpace::uniform(m), JumpKernel::from_rows(&rows)?))
}

/// Fits `c₂` in `c₂(r^{−n/α} ∨ r^{−n/2})` to estimated rates on a finite window and
/// verifies (SP1) with the fitted rate.
pub fn fit_truncated_rate(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    n: usize,
    alpha: f64,
    r_grid: &[f64],
    family: &[Vec<f64>],
    seed: u64,
) -> Result<(RateFunction, Report)> {
    let shape = truncated_kernel_rate(n, alpha, 1.0)?;
    let mut c2: f64 = 0.0;
    for &r in r_grid {
        c2 = c2.max(sp_estimate(space, kernel, r, seed)? / shape.eval(r));
    }
    let beta = truncated_kernel_rate(n, alpha, c2 * 1.01)?;
    let rep = sp_verify(space, kernel, None, &beta, family, r_grid, 1e-9)?;
    Ok((beta, rep))
}

/// Volume `ω_n = π^{n/2}/Γ(n/2 + 1)` of the unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0)
}

/// Kernels for the energy of `f_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RadialKernel {
    /// `1/(ρ^{n+α₁/2} ∨ ρ^{n+α₂/2})`
    MinKernel { alpha1: f64, alpha2: f64 },
    /// `1/(ρ^{n+α₁/2} ∧ ρ^{n+α₂/2})`
    MaxKernel { alpha1: f64, alpha2: f64 },
    /// `1{ρ ≤ 1} ρ^{−(n+α/2)}`
    Truncated { alpha: f64 },
}

impl RadialKernel {
    fn validate(&self) -> Result<()> {
        let ok = |a: f64| a > 0.0 && a < 2.0;
        let good = match *self {
            RadialKernel::MinKernel { alpha1, alpha2 } | RadialKernel::MaxKernel { alpha1, alpha2 } => ok(alpha1) && ok(alpha2),
            RadialKernel::Truncated { alpha } => ok(alpha),
        };
        if good {
            Ok(())
        } else {
            Err(Error::Invalid(format!("kernel {self:?} is not integrable against s ∧ ρ (need exponents in (0, 2))")))
        }
    }

    pub fn eval(&self, n: usize, rho: f64) -> f64 {
        let nf = n as f64;
        match *self {
            RadialKernel::MinKernel { alpha1, alpha2 } => 1.0 / rho.powf(nf + alpha1 / 2.0).max(rho.powf(nf + alpha2 / 2.0)),
            RadialKernel::MaxKernel { alpha1, alpha2 } => 1.0 / rho.powf(nf + alpha1 / 2.0).min(rho.powf(nf + alpha2 / 2.0)),
            RadialKernel::Truncated { alpha } => {
                if rho <= 1.0 {
                    rho.powf(-(nf + alpha / 2.0))
                } else {
                    0.0
                }
            }
        }
    }

    /// Exponent `a/2` of the singularity `ρ^{−a/2}` of `ρ·k(ρ)ρ^{n−1}` at 0.
    fn near_exponent(&self) -> f64 {
        match *self {
            RadialKernel::MinKernel { alpha1, alpha2 } => alpha1.min(alpha2) / 2.0,
            RadialKernel::MaxKernel { alpha1, alpha2 } => alpha1.max(alpha2) / 2.0,
            RadialKernel::Truncated { alpha } => alpha / 2.0,
        }
    }
}

/// `2 ∫_{B(0,s)} dx ∫ (s ∧ |x − y|) k(|x − y|) dy = 2ω_n sⁿ · nω_n ∫_0^∞ (s ∧ ρ) k(ρ) ρ^{n−1} dρ`,
/// the bound on the L¹ energy of `f_s`.
pub fn radial_l1_energy(n: usize, kernel: RadialKernel, s: f64) -> Result<f64> {
    kernel.validate()?;
    if !(s > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let nf = n as f64;
    let opts = QuadOptions { rtol: 1e-10, atol: 1e-300, max_intervals: 4000 };
    let g = |rho: f64| s.min(rho) * kernel.eval(n, rho) * rho.powf(nf - 1.0);
    let b1 = s.min(1.0);
    let b2 = s.max(1.0);
    // ρ = b₁u^m turns the ρ^{−a/2} endpoint singularity into a bounded integrand
    let m = 2.0 / (1.0 - kernel.near_exponent());
    let mut total = integrate(|u| b1 * m * u.powf(m - 1.0) * g(b1 * u.powf(m)), 0.0, 1.0, opts)?;
    if b2 > b1 {
        total += integrate(g, b1, b2, opts)?;
    }
    if !matches!(kernel, RadialKernel::Truncated { .. }) {
        total += integrate_to_inf(g, b2, opts)?;
    }
    let w = unit_ball_volume(n);
    Ok(2.0 * w * s.powf(nf) * nf * w * total)
}

/// Power fits of [`radial_l1_energy`] over `s ∈ [10⁻³, 10⁻¹]` and `s ∈ [10, 10³]`.
pub fn radial_energy_fits(n: usize, kernel: RadialKernel) -> Result<(PowerFit, PowerFit)> {
    let fit = |a: f64, b: f64| -> Result<PowerFit> {
        let g = log_grid(a, b, 9);
        let v = g.iter().map(|&s| radial_l1_energy(n, kernel, s)).collect::<Result<Vec<_>>>()?;
        loglog_fit(&g, &v).ok_or_else(|| Error::Invalid("degenerate energy data".into()))
    };
    Ok((fit(1e-3, 1e-1)?, fit(10.0, 1e3)?))
}

/// `f_s(x) = (s − |x|)⁺` as a function of `|x|`.
pub fn f_s(s: f64, r: f64) -> f64 {
    (s - r).max(0.0)
}

/// `∫_{Rⁿ} N(f_s(x)/r) dx = nω_n ∫_0^s N((s − ρ)/r) ρ^{n−1} dρ`.
pub fn fs_modular(n: usize, big_n: &YoungFunction, s: f64, r: f64) -> Result<f64> {
    let nf = n as f64;
    let opts = QuadOptions { rtol: 1e-10, atol: 1e-300, max_intervals: 4000 };
    let v = integrate(|rho| big_n.eval((s - rho) / r) * rho.powf(nf - 1.0), 0.0, s, opts)?;
    Ok(nf * unit_ball_volume(n) * v)
}

/// Luxemburg norm `‖f_s‖_N` by bisection on the scale.
pub fn radial_orlicz_fs(n: usize, big_n: &YoungFunction, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let (mut lo, mut hi) = (s * 1e-3, s);
    while fs_modular(n, big_n, s, hi)? > 1.0 {
        lo = hi;
        hi *= 4.0;
    }
    while fs_modular(n, big_n, s, lo)? <= 1.0 {
        hi = lo;
        lo /= 4.0;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if fs_modular(n, big_n, s, mid)? <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok(hi)
}

/// `sⁿ N(c(s^{α₁/2−n} ∨ s^{α₂/2−n}))`, bounded in `s` exactly when `N` is dominated by `N^∧`.
pub fn nm_quantity(n: usize, alpha1: f64, alpha2: f64, big_n: &YoungFunction, c: f64, s: f64) -> f64 {
    let nf = n as f64;
    s.powf(nf) * big_n.eval(c * s.powf(alpha1 / 2.0 - nf).max(s.powf(alpha2 / 2.0 - nf)))
}

#[derive(Debug, Clone, Serialize)]
pub struct NmScan {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub small_slope: f64,
    pub large_slope: f64,
    /// Neither end shows power growth beyond the slope tolerance.
    pub bounded: bool,
}

/// [`nm_quantity`] on a log grid with end-slope fits over the outer decade on each side.
pub fn nm_scan(n: usize, alpha1: f64, alpha2: f64, big_n: &YoungFunction, c: f64, s_grid: &[f64], slope_tol: f64) -> Result<NmScan> {
    if s_grid.len() < 4 {
        return Err(Error::Invalid("scan needs at least 4 radii".into()));
    }
    let values: Vec<f64> = s_grid.iter().map(|&s| nm_quantity(n, alpha1, alpha2, big_n, c, s)).collect();
    let lo = s_grid[0];
    let hi = s_grid[s_grid.len() - 1];
    let pick = |keep: &dyn Fn(f64) -> bool| -> (Vec<f64>, Vec<f64>) {
        s_grid.iter().zip(&values).filter(|(s, _)| keep(**s)).map(|(s, v)| (*s, *v)).unzip()
    };
    let (xs, ys) = pick(&|s| s <= lo * 10.0);
    let small = loglog_fit(&xs, &ys).ok_or_else(|| Error::Invalid("degenerate small-s scan".into()))?.slope;
    let (xs, ys) = pick(&|s| s >= hi / 10.0);
    let large = loglog_fit(&xs, &ys).ok_or_else(|| Error::Invalid("degenerate large-s scan".into()))?.slope;
    // growth means the quantity increases away from s = 1 on either side
    let bounded = small >= -slope_tol && large <= slope_tol;
    Ok(NmScan { s_grid: s_grid.to_vec(), values, small_slope: small, large_slope: large, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_kernels_small_cases() {
        let q = srw_kernels(1, 2, 3).unwrap();
        assert_eq!(q[1].get(&[1]), 0.5);
        assert_eq!(q[1].get(&[-1]), 0.5);
        assert_eq!(q[2].get(&[0]), 0.5);
        assert_eq!(q[2].get(&[2]), 0.25);
        assert!(srw_kernels(1, 4, 3).is_err());
    }

    #[test]
    fn walk_kernels_match_closed_form() {
        for n in [1, 2] {
            let q = srw_kernels(n, 12, 12).unwrap();
            for (k, w) in q.iter().enumerate() {
                assert!((w.sum() - 1.0).abs() < 1e-12);
                for i in 0..w.values.len() {
                    let x = w.offset(i);
                    let l1: i64 = x.iter().map(|v| v.abs()).sum();
                    if (l1 - k as i64) % 2 != 0 {
                        assert_eq!(w.values[i], 0.0);
                    }
                    assert!((w.values[i] - srw_closed(n, k as u64, &x).unwrap()).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn weights_first_terms_and_formula() {
        let w = subord_weights(1.0, 10).unwrap();
        assert!((w.weight(1) - 0.5).abs() < 1e-15);
        assert!((w.weight(2) - 0.125).abs() < 1e-15);
        for alpha in [0.3, 1.0, 1.7] {
            let w = subord_weights(alpha, 500).unwrap();
            assert!((w.weight(1) - weight_formula(alpha, 1)).abs() < 1e-14);
            for k in [1, 7, 100, 500] {
                assert!((w.weight(k) / weight_formula(alpha, k) - 1.0).abs() < 1e-10);
            }
            assert!((w.partial_sum() + w.tail - 1.0).abs() < 1e-12);
            assert!((w.tail / tail_formula(alpha, 500) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scaled_weights_decrease_to_limit() {
        let w = subord_weights(1.0, 1_000_000).unwrap();
        let lim = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((weight_limit(1.0) - lim).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for k in [1_000, 10_000, 100_000, 1_000_000] {
            let r = w.scaled_weight(k);
            assert!(r < prev && r > lim);
            assert!((r / lim - 1.0).abs() < 1e-2);
            prev = r;
        }
    }

    #[test]
    fn p1_window_matches_closed_form() {
        for n in [1, 2] {
            let p = p1_kernel(n, 1.2, 16, 16).unwrap();
            let w = subord_weights(1.2, 16).unwrap();
            let mass = p.window.sum();
            assert!(mass <= 1.0 + 1e-12 && mass >= 1.0 - p.tail - 1e-12);
            assert!(p.window.max_asymmetry() < 1e-15);
            for x in [vec![0i64; n], { let mut v = vec![0; n]; v[0] = 3; v }, vec![2; n]] {
                let exact = p1_at(&w, n, &x).unwrap();
                assert!((p.window.get(&x) - exact).abs() < 1e-14, "{x:?}");
            }
        }
    }

    #[test]
    fn semigroup_identity_and_fft_path() {
        let p = p1_kernel(2, 1.0, 6, 6).unwrap();
        let id = lattice_semigroup(&p, 0.0, 0, 1.0).unwrap();
        assert_eq!(id.window, LatticeWindow::delta(2, 6).unwrap());
        let t = 0.5;
        let k = poisson_terms(t);
        let d = lattice_semigroup(&p, t, k, 1.0).unwrap();
        let f = lattice_semigroup_fft(&p, t, k, 1.0).unwrap();
        assert!(d.window.max_abs_diff(&f.window) < 1e-10);
        assert!((d.leak - f.leak).abs() < 1e-10);
        assert!(lattice_semigroup(&p, t, 1, 1.0).is_err());
    }

    #[test]
    fn semigroup_overflow_names_safe_radius() {
        let p = p1_kernel(1, 1.0, 8, 8).unwrap();
        match lattice_semigroup(&p, 3.0, poisson_terms(3.0), 1e-6) {
            Err(Error::WindowOverflow { radius, safe_radius, .. }) => assert!(radius == 8 && safe_radius > 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semigroup_composes() {
        let p = p1_kernel(1, 1.0, 40, 40).unwrap();
        let run = |t: f64| lattice_semigroup(&p, t, poisson_terms(t), 1.0).unwrap();
        let (a, b, ab) = (run(0.3), run(0.5), run(0.8));
        let comp = convolve_direct(&a.window, &b.window);
        let budget = a.error_bound() + b.error_bound() + ab.error_bound() + 1e-12;
        assert!(comp.max_abs_diff(&ab.window) <= budget);
    }

    #[test]
    fn torus_kernel_agrees_with_quadrature() {
        for (n, l) in [(1, 4096), (2, 256)] {
            let k = torus_kernel(n, 1.0, 2.0, l).unwrap();
            let total: f64 = k.values.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let diag = on_diagonal(n, 1.0, 2.0).unwrap();
            assert!((k.get(&vec![0; n]) / diag - 1.0).abs() < 1e-3, "n = {n}");
        }
    }

    #[test]
    fn truncated_rate_branches() {
        let b = truncated_kernel_rate(2, 1.5, 3.0).unwrap();
        assert!((b.eval(4.0) - 3.0 / 4.0).abs() < 1e-15);
        assert!((b.eval(0.25) - 3.0 * 0.25f64.powf(-2.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn tilde_phi_growth_exponents() {
        let alpha = 1.0;
        let h = |s: f64| s.powf(alpha / 2.0).max(s);
        let slope = |a: f64, b: f64| {
            let g = log_grid(a, b, 5);
            let v: Vec<f64> = g.iter().map(|&s| tilde_phi_h(2, alpha, &h, s).unwrap()).collect();
            loglog_fit(&g, &v).unwrap().slope
        };
        assert!((slope(1e-8, 1e-6) - 0.5).abs() < 2e-2);
        assert!((slope(1e6, 1e8) - 0.75).abs() < 2e-2);
    }

    #[test]
    fn truncated_symbol_limits() {
        for n in [1, 2] {
            let t = TruncatedLattice::new(n, 1.0, 16).unwrap();
            assert_eq!(t.psi(&vec![0.0; n]), 0.0);
            let b = t.rates(&[1e-9, 1.0, 10.0]);
            assert!((b[0] - 1.0).abs() < 1e-4, "{}", b[0]);
            assert!(b[1] > b[2] && b[2] > 0.0);
        }
    }

    #[test]
    fn finite_window_rate_is_certified() {
        let (space, kernel) = truncated_window(2, 4).unwrap();
        let fam = crate::instance::random_functions(space.len(), 30, 5);
        let grid = log_grid(0.05, 5.0, 8);
        let (beta, rep) = fit_truncated_rate(&space, &kernel, 2, 1.0, &grid, &fam, 5).unwrap();
        assert!(matches!(beta, RateFunction::MaxPower { .. }));
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn truncated_energy_closed_form() {
        let alpha = 1.0;
        let a = alpha / 2.0;
        for (n, s) in [(1usize, 0.3f64), (2, 0.7), (3, 2.5)] {
            let inner = if s <= 1.0 {
                s.powf(1.0 - a) / (1.0 - a) + s * (s.powf(-a) - 1.0) / a
            } else {
                1.0 / (1.0 - a)
            };
            let w = unit_ball_volume(n);
            let exact = 2.0 * w * s.powi(n as i32) * n as f64 * w * inner;
            let got = radial_l1_energy(n, RadialKernel::Truncated { alpha }, s).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-8, "n = {n}, s = {s}");
        }
        assert!(radial_l1_energy(2, RadialKernel::Truncated { alpha: 2.0 }, 1.0).is_err());
    }

    #[test]
    fn fs_two_norm_closed_form() {
        let sq = YoungFunction::power(2.0);
        for n in [1usize, 2, 3] {
            for s in [0.5f64, 2.0] {
                let exact = (s.powi(n as i32 + 2) * unit_ball_volume(n) * 2.0 / ((n + 1) * (n + 2)) as f64).sqrt();
                let got = radial_orlicz_fs(n, &sq, s).unwrap();
                assert!((got / exact - 1.0).abs() < 1e-9);
            }
        }
        assert_eq!(f_s(1.0, 1.5), 0.0);
        assert!(f_s(1.0, 0.25) > 0.0);
    }

    #[test]
    fn fs_norm_scaling() {
        let (n, alpha) = (2usize, 1.0);
        let big_n = YoungFunction::power(n as f64 / (n as f64 - alpha / 2.0));
        let g = log_grid(0.1, 10.0, 7);
        let v: Vec<f64> = g.iter().map(|&s| radial_orlicz_fs(n, &big_n, s).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let slope = loglog_fit(&g, &v).unwrap().slope;
        assert!((slope - (n as f64 + 1.0 - alpha / 2.0)).abs() < 1e-2);
    }

    #[test]
    fn nm_dichotomy() {
        let (n, a1, a2) = (2usize, 0.5, 1.5);
        let e = |a: f64| n as f64 / (n as f64 - a / 2.0);
        let wedge = YoungFunction::MinPower { p1: e(a1), p2: e(a2) };
        let bumped = YoungFunction::MinPower { p1: e(a1) + 0.2, p2: e(a2) };
        let g = log_grid(1e-3, 1e3, 25);
        assert!(nm_scan(n, a1, a2, &wedge, 1.0, &g, 0.05).unwrap().bounded);
        assert!(!nm_scan(n, a1, a2, &bumped, 1.0, &g, 0.05).unwrap().bounded);
    }
}
