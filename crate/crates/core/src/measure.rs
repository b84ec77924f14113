//! Finite measure spaces, jump kernels, Dirichlet energies and the
//! associated symmetric Markov semigroups.

use crate::error::{check_len, Error, Result};
use crate::quad::{integrate, QuadOptions};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// `m` atoms with positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasureSpace {
    mu: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Invalid("measure space needs at least one point".into()));
        }
        if let Some(i) = mu.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Invalid(format!("mass at point {i} must be positive and finite, got {}", mu[i])));
        }
        Ok(Self { mu })
    }

    pub fn uniform(m: usize) -> Self {
        Self { mu: vec![1.0; m] }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_mass(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// `Σ |f|^p μ`.
    pub fn lp_pow(&self, f: &[f64], p: f64) -> f64 {
        f.iter().zip(&self.mu).map(|(x, m)| x.abs().powf(p) * m).sum()
    }

    pub fn l1(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mu).map(|(x, m)| x.abs() * m).sum()
    }

    pub fn l2_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mu).map(|(x, m)| x * x * m).sum()
    }

    /// Mass of the subset encoded by `mask` (bit `i` = point `i`).
    pub fn mask_mass(&self, mask: u64) -> f64 {
        (0..self.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.mu[i]).sum()
    }
}

fn check_symmetric(what: &'static str, a: &DMatrix<f64>) -> Result<()> {
    let m = a.nrows();
    for i in 0..m {
        for k in (i + 1)..m {
            let (x, y) = (a[(i, k)], a[(k, i)]);
            if x != y {
                return Err(Error::Asymmetric { what, i, k, a: x, b: y });
            }
        }
    }
    Ok(())
}

fn square(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    for r in rows {
        check_len(m, r.len())?;
    }
    Ok(DMatrix::from_fn(m, m, |i, k| rows[i][k]))
}

/// Symmetric nonnegative density `J(x, y)` with respect to `μ ⊗ μ`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpKernel {
    j: DMatrix<f64>,
}

impl JumpKernel {
    pub fn new(j: DMatrix<f64>) -> Result<Self> {
        if j.nrows() != j.ncols() {
            return Err(Error::Dimension { expected: j.nrows(), got: j.ncols() });
        }
        check_symmetric("jump kernel", &j)?;
        if let Some((idx, x)) = j.iter().enumerate().find(|(_, x)| !(**x >= 0.0 && x.is_finite())) {
            let m = j.nrows();
            return Err(Error::Invalid(format!("jump density at ({}, {}) is {x}", idx % m, idx / m)));
        }
        let mut j = j;
        j.fill_diagonal(0.0);
        Ok(Self { j })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(square(rows)?)
    }

    pub fn len(&self) -> usize {
        self.j.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.j.nrows() == 0
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.j[(i, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }
}

/// Symmetric weight `γ(x, y) > 0` off the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    gamma: DMatrix<f64>,
}

impl WeightFunction {
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() {
            return Err(Error::Dimension { expected: gamma.nrows(), got: gamma.ncols() });
        }
        check_symmetric("weight", &gamma)?;
        let m = gamma.nrows();
        for i in 0..m {
            for k in 0..m {
                if i != k && !(gamma[(i, k)] > 0.0 && gamma[(i, k)].is_finite()) {
                    return Err(Error::Invalid(format!("weight at ({i}, {k}) must be positive, got {}", gamma[(i, k)])));
                }
            }
        }
        Ok(Self { gamma })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(square(rows)?)
    }

    pub fn ones(m: usize) -> Self {
        Self { gamma: DMatrix::from_element(m, m, 1.0) }
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.gamma[(i, k)]
    }

    pub fn len(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.nrows() == 0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { gamma: &self.gamma * c }
    }
}

/// Killing rate `v ≥ 0` and the weight `ξ ≥ 0` towards the cemetery state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingPotential {
    pub v: Vec<f64>,
    pub xi: Vec<f64>,
}

impl KillingPotential {
    pub fn new(v: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        check_len(v.len(), xi.len())?;
        if v.iter().chain(&xi).any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Invalid("killing rate and cemetery weight must be nonnegative".into()));
        }
        Ok(Self { v, xi })
    }

    pub fn zero(m: usize) -> Self {
        Self { v: vec![0.0; m], xi: vec![1.0; m] }
    }
}

/// Transition densities `p_t(i, k)` with respect to `μ`.
#[derive(Debug, Clone)]
pub struct SemigroupKernel {
    pub t: f64,
    pub p: DMatrix<f64>,
}

impl SemigroupKernel {
    /// `(P_t g)_i = Σ_k p_t(i,k) g_k μ_k`.
    pub fn apply(&self, space: &FiniteMeasureSpace, g: &[f64]) -> Vec<f64> {
        let m = space.len();
        (0..m).map(|i| (0..m).map(|k| self.p[(i, k)] * g[k] * space.mu[k]).sum()).collect()
    }

    /// Kernel of `P_s P_t`.
    pub fn compose(&self, other: &SemigroupKernel, space: &FiniteMeasureSpace) -> SemigroupKernel {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(space.mu()));
        SemigroupKernel { t: self.t + other.t, p: &self.p * d * &other.p }
    }
}

fn check_model(space: &FiniteMeasureSpace, kernel: &JumpKernel) -> Result<()> {
    check_len(space.len(), kernel.len())
}

/// `½ Σ_{i,k} (f_i − f_k)(g_i − g_k) J_ik μ_i μ_k`.
pub fn dirichlet_energy(space: &FiniteMeasureSpace, kernel: &JumpKernel, f: &[f64], g: &[f64]) -> Result<f64> {
    check_model(space, kernel)?;
    check_len(space.len(), f.len())?;
    check_len(space.len(), g.len())?;
    let mu = space.mu();
    let mut s = 0.0;
    for i in 0..mu.len() {
        for k in (i + 1)..mu.len() {
            s += (f[i] - f[k]) * (g[i] - g[k]) * kernel.get(i, k) * mu[i] * mu[k];
        }
    }
    Ok(s)
}

/// `E_V(f, g) = E(f, g) + Σ v_i f_i g_i μ_i`.
pub fn killed_energy(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: &KillingPotential,
    f: &[f64],
    g: &[f64],
) -> Result<f64> {
    check_len(space.len(), potential.v.len())?;
    let e = dirichlet_energy(space, kernel, f, g)?;
    Ok(e + (0..space.len()).map(|i| potential.v[i] * f[i] * g[i] * space.mu[i]).sum::<f64>())
}

/// `Σ_{i,k} |f_i − f_k| γ_ik J_ik μ_i μ_k` over both orderings.
pub fn l1_form(space: &FiniteMeasureSpace, kernel: &JumpKernel, gamma: &WeightFunction, f: &[f64]) -> Result<f64> {
    check_model(space, kernel)?;
    check_len(space.len(), f.len())?;
    check_len(space.len(), gamma.len())?;
    let mu = space.mu();
    let mut s = 0.0;
    for i in 0..mu.len() {
        for k in (i + 1)..mu.len() {
            s += (f[i] - f[k]).abs() * gamma.get(i, k) * kernel.get(i, k) * mu[i] * mu[k];
        }
    }
    Ok(2.0 * s)
}

/// `(L f)_i = Σ_k (f_i − f_k) J_ik μ_k + v_i f_i`.
pub fn generator(space: &FiniteMeasureSpace, kernel: &JumpKernel, potential: Option<&KillingPotential>) -> Result<DMatrix<f64>> {
    check_model(space, kernel)?;
    let m = space.len();
    let mu = space.mu();
    let mut l = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut row = 0.0;
        for k in 0..m {
            if k != i {
                let w = kernel.get(i, k) * mu[k];
                l[(i, k)] = -w;
                row += w;
            }
        }
        l[(i, i)] = row;
    }
    if let Some(p) = potential {
        check_len(m, p.v.len())?;
        for i in 0..m {
            l[(i, i)] += p.v[i];
        }
    }
    Ok(l)
}

/// Spectral data of `D^{1/2} L D^{-1/2}`, reused for every `t`.
#[derive(Debug, Clone)]
pub struct Spectral {
    mu: Vec<f64>,
    eigenvalues: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(space: &FiniteMeasureSpace, kernel: &JumpKernel, potential: Option<&KillingPotential>) -> Result<Self> {
        let l = generator(space, kernel, potential)?;
        let m = space.len();
        let sq: Vec<f64> = space.mu().iter().map(|x| x.sqrt()).collect();
        let s = DMatrix::from_fn(m, m, |i, k| {
            let x = sq[i] * l[(i, k)] / sq[k];
            if i == k {
                x
            } else {
                // enforce exact symmetry against rounding in the scaling
                0.5 * (x + sq[k] * l[(k, i)] / sq[i])
            }
        });
        let eig = SymmetricEigen::new(s);
        if eig.eigenvalues.iter().chain(eig.eigenvectors.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Eigen);
        }
        Ok(Self { mu: space.mu().to_vec(), eigenvalues: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn kernel(&self, t: f64) -> Result<SemigroupKernel> {
        if !(t >= 0.0) {
            return Err(Error::Invalid(format!("time must be nonnegative, got {t}")));
        }
        let m = self.mu.len();
        let mut u = self.vectors.clone();
        for (c, lam) in self.eigenvalues.iter().enumerate() {
            let e = (-t * lam.max(0.0)).exp();
            u.column_mut(c).scale_mut(e);
        }
        let core = u * self.vectors.transpose();
        let p = DMatrix::from_fn(m, m, |i, k| {
            let x = 0.5 * (core[(i, k)] + core[(k, i)]) / (self.mu[i] * self.mu[k]).sqrt();
            x.max(0.0)
        });
        Ok(SemigroupKernel { t, p })
    }

    /// `θ_γ(t) = max_{i≠k} Σ_z |p_t(i,z) − p_t(k,z)| μ_z / γ_ik`.
    pub fn theta(&self, gamma: &WeightFunction, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("profile needs t > 0, got {t}")));
        }
        let p = self.kernel(t)?.p;
        Ok(theta_from_kernel(&self.mu, &p, gamma))
    }

    /// `Θ_γ(t) = ∫_0^t θ_γ`.
    pub fn theta_integral(&self, gamma: &WeightFunction, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Invalid(format!("integral needs t ≥ 0, got {t}")));
        }
        if t == 0.0 || self.mu.len() < 2 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let f = |s: f64| if s <= 0.0 { self.theta_at_zero(gamma) } else { self.theta(gamma, s).unwrap_or(f64::NAN) };
        // split at the mixing scale so long horizons do not starve the head
        let gap = self.eigenvalues.iter().copied().filter(|l| *l > 1e-12).fold(f64::INFINITY, f64::min);
        let knot = if gap.is_finite() { (1.0 / gap).min(t) } else { t };
        let opts = QuadOptions::default();
        let head = integrate(f, 0.0, knot, opts)?;
        let tail = if knot < t { integrate(f, knot, t, opts)? } else { 0.0 };
        Ok(head + tail)
    }

    fn theta_at_zero(&self, gamma: &WeightFunction) -> f64 {
        let m = self.mu.len();
        let mut best: f64 = 0.0;
        for i in 0..m {
            for k in 0..m {
                if i != k {
                    best = best.max(2.0 / gamma.get(i, k));
                }
            }
        }
        best
    }
}

/// Memoized `θ` and `Θ` for one model.
///
/// With a killing potential the profile is the cemetery version
/// `max(θ_γ(P^V), max_{v(x)>0} P^V_t 1(x)/ξ(x))`, where `P^V` is the killed semigroup.
#[derive(Debug)]
pub struct ThetaProvider {
    spectral: Spectral,
    gamma: WeightFunction,
    cemetery: Option<Vec<f64>>,
    cache: std::sync::Mutex<Vec<(f64, f64)>>,
}

impl ThetaProvider {
    pub fn new(
        space: &FiniteMeasureSpace,
        kernel: &JumpKernel,
        gamma: &WeightFunction,
        potential: Option<&KillingPotential>,
    ) -> Result<Self> {
        check_len(space.len(), gamma.len())?;
        let cemetery = match potential {
            Some(p) => {
                for i in 0..space.len() {
                    if p.v[i] > 0.0 && p.xi[i] == 0.0 {
                        return Err(Error::Invalid(format!("cemetery weight vanishes at point {i} where the killing rate is positive; the profile is infinite")));
                    }
                }
                Some((0..space.len()).map(|i| if p.v[i] > 0.0 { p.xi[i] } else { f64::INFINITY }).collect())
            }
            None => None,
        };
        Ok(Self { spectral: Spectral::new(space, kernel, potential)?, gamma: gamma.clone(), cemetery, cache: Default::default() })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.theta_at_zero();
        }
        let p = match self.spectral.kernel(t) {
            Ok(k) => k.p,
            Err(_) => return f64::NAN,
        };
        let mut th = theta_from_kernel(&self.spectral.mu, &p, &self.gamma);
        if let Some(xi) = &self.cemetery {
            let m = xi.len();
            for x in 0..m {
                if xi[x].is_finite() {
                    let mass: f64 = (0..m).map(|z| p[(x, z)] * self.spectral.mu[z]).sum();
                    th = th.max(mass / xi[x]);
                }
            }
        }
        th
    }

    fn theta_at_zero(&self) -> f64 {
        let mut th = self.spectral.theta_at_zero(&self.gamma);
        if let Some(xi) = &self.cemetery {
            th = xi.iter().filter(|x| x.is_finite()).fold(th, |a, x| a.max(1.0 / x));
        }
        th
    }

    /// `Θ(t) = ∫_0^t θ`, accumulated from the nearest cached point below `t`.
    pub fn big_theta(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let (t0, v0) = {
            let c = self.cache.lock().expect("cache lock");
            let i = c.partition_point(|p| p.0 <= t);
            if i > 0 { c[i - 1] } else { (0.0, 0.0) }
        };
        if t0 == t {
            return Ok(v0);
        }
        let f = |s: f64| self.theta(s);
        let opts = QuadOptions::default();
        // split long intervals geometrically so the quadrature sees the decay scale
        let mut a = t0;
        let mut acc = v0;
        while a < t {
            let b = if a == 0.0 { t.min(1e-3) } else { (a * 4.0).min(t) };
            let b = if b <= a { t } else { b };
            acc += integrate(f, a, b, opts)?;
            a = b;
        }
        let mut c = self.cache.lock().expect("cache lock");
        let i = c.partition_point(|p| p.0 < t);
        if i >= c.len() || c[i].0 != t {
            c.insert(i, (t, acc));
        }
        Ok(acc)
    }
}

fn theta_from_kernel(mu: &[f64], p: &DMatrix<f64>, gamma: &WeightFunction) -> f64 {
    let m = mu.len();
    let mut best: f64 = 0.0;
    for i in 0..m {
        for k in (i + 1)..m {
            let d: f64 = (0..m).map(|z| (p[(i, z)] - p[(k, z)]).abs() * mu[z]).sum();
            best = best.max(d / gamma.get(i, k));
        }
    }
    best
}

pub fn semigroup(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: Option<&KillingPotential>,
    t: f64,
) -> Result<SemigroupKernel> {
    Spectral::new(space, kernel, potential)?.kernel(t)
}

pub fn theta_gamma(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    potential: Option<&KillingPotential>,
    t: f64,
) -> Result<f64> {
    Spectral::new(space, kernel, potential)?.theta(gamma, t)
}

pub fn theta_integral(space: &FiniteMeasureSpace, kernel: &JumpKernel, gamma: &WeightFunction, t: f64) -> Result<f64> {
    Spectral::new(space, kernel, None)?.theta_integral(gamma, t)
}

/// Killed model lifted to a conservative model with a cemetery point.
#[derive(Debug, Clone)]
pub struct BarExtension {
    pub space: FiniteMeasureSpace,
    pub kernel: JumpKernel,
    pub gamma: WeightFunction,
}

impl BarExtension {
    /// Index of the cemetery point.
    pub fn cemetery(&self) -> usize {
        self.space.len() - 1
    }

    /// `f̄` with `f̄(Δ) = 0`.
    pub fn lift(&self, f: &[f64]) -> Vec<f64> {
        let mut v = f.to_vec();
        v.push(0.0);
        v
    }
}

/// Appends a cemetery point of mass 1 with `J̄(i,Δ) = v_i` and `γ̄(i,Δ) = ξ_i`.
///
/// A zero `ξ_i` is replaced by the smallest positive float so that `γ̄`
/// stays a valid weight; such points carry no flow when `v_i = 0`.
pub fn bar_extension(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    potential: &KillingPotential,
    gamma: &WeightFunction,
) -> Result<BarExtension> {
    check_model(space, kernel)?;
    let m = space.len();
    check_len(m, potential.v.len())?;
    check_len(m, gamma.len())?;
    let mut mu = space.mu().to_vec();
    mu.push(1.0);
    let j = DMatrix::from_fn(m + 1, m + 1, |i, k| match (i == m, k == m) {
        (false, false) => kernel.get(i, k),
        (true, false) => potential.v[k],
        (false, true) => potential.v[i],
        (true, true) => 0.0,
    });
    let g = DMatrix::from_fn(m + 1, m + 1, |i, k| match (i == m, k == m) {
        (false, false) => gamma.get(i, k),
        (true, false) => potential.xi[k].max(f64::MIN_POSITIVE),
        (false, true) => potential.xi[i].max(f64::MIN_POSITIVE),
        (true, true) => 1.0,
    });
    Ok(BarExtension { space: FiniteMeasureSpace::new(mu)?, kernel: JumpKernel::new(j)?, gamma: WeightFunction::new(g)? })
}

/// `max_i Σ_k γ_ik² J_ik μ_k`.
pub fn c_gamma(space: &FiniteMeasureSpace, kernel: &JumpKernel, gamma: &WeightFunction) -> f64 {
    let m = space.len();
    (0..m)
        .map(|i| (0..m).map(|k| gamma.get(i, k).powi(2) * kernel.get(i, k) * space.mu[k]).sum::<f64>())
        .fold(0.0, f64::max)
}
