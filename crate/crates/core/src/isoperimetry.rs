//! Exact isoperimetric constants by subset enumeration and the two-way
//! Orlicz/Poincaré isoperimetric verifiers.

use crate::error::{check_len, Error, Result};
use crate::ext::ExtReal;
use crate::measure::{l1_form, FiniteMeasureSpace, JumpKernel, KillingPotential, WeightFunction};
use crate::report::Report;
use crate::young::{orlicz_norm, YoungFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const MAX_ENUMERATION: usize = 24;

/// Pairwise boundary weights `γ_ik J_ik μ_i μ_k` plus an optional per-point
/// outflow to a cemetery.
#[derive(Debug, Clone)]
pub struct FlowModel {
    mu: Vec<f64>,
    w: Vec<f64>,
    outflow: Vec<f64>,
    include_full: bool,
}

impl FlowModel {
    pub fn new(space: &FiniteMeasureSpace, kernel: &JumpKernel, gamma: &WeightFunction) -> Result<Self> {
        let m = space.len();
        check_len(m, kernel.len())?;
        check_len(m, gamma.len())?;
        let mu = space.mu().to_vec();
        let mut w = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                if i != k {
                    w[i * m + k] = gamma.get(i, k) * kernel.get(i, k) * mu[i] * mu[k];
                }
            }
        }
        Ok(Self { mu, w, outflow: vec![0.0; m], include_full: false })
    }

    /// Flows of the bar construction restricted to subsets of the original
    /// points: every subset, including the whole space, is proper in `Ē`.
    pub fn killed(
        space: &FiniteMeasureSpace,
        kernel: &JumpKernel,
        gamma: &WeightFunction,
        potential: &KillingPotential,
    ) -> Result<Self> {
        let mut f = Self::new(space, kernel, gamma)?;
        check_len(space.len(), potential.v.len())?;
        f.outflow = (0..space.len()).map(|i| potential.xi[i] * potential.v[i] * space.mu()[i]).collect();
        f.include_full = true;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mass(&self, mask: u64) -> f64 {
        (0..self.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.mu[i]).sum()
    }

    pub fn flow(&self, mask: u64) -> f64 {
        let m = self.len();
        let mut s = 0.0;
        for i in (0..m).filter(|i| mask >> i & 1 == 1) {
            s += self.outflow[i];
            for k in (0..m).filter(|k| mask >> k & 1 == 0) {
                s += self.w[i * m + k];
            }
        }
        s
    }

    fn full(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    /// Folds over every admissible nonempty subset as `(mask, mass, flow)`,
    /// in parallel over contiguous blocks of the Gray-code sequence.
    pub fn fold_subsets<T, I, F, R>(&self, init: I, fold: F, reduce: R) -> Result<T>
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        F: Fn(&mut T, u64, f64, f64) + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        let m = self.len();
        if m > MAX_ENUMERATION {
            return Err(Error::TooLarge { max: MAX_ENUMERATION, got: m });
        }
        let total: u64 = 1 << m;
        let blocks: u64 = if m >= 14 { 64 } else { 1 };
        let per = total.div_ceil(blocks);
        let full = self.full();
        let run = |b: u64| {
            let mut acc = init();
            let start = (b * per).max(1);
            let end = ((b + 1) * per).min(total);
            if start >= end {
                return acc;
            }
            let mut mask = start ^ (start >> 1);
            let mut inside = vec![0.0; m];
            for i in 0..m {
                inside[i] = (0..m).filter(|k| mask >> k & 1 == 1).map(|k| self.w[i * m + k]).sum();
            }
            let row: Vec<f64> = (0..m).map(|i| self.w[i * m..(i + 1) * m].iter().sum()).collect();
            let mut mass = self.mass(mask);
            let mut flow = self.flow(mask);
            for g in start..end {
                if g > start {
                    let i = g.trailing_zeros() as usize;
                    let bit = 1u64 << i;
                    if mask & bit == 0 {
                        flow += row[i] - 2.0 * inside[i] + self.outflow[i];
                        mass += self.mu[i];
                        for k in 0..m {
                            inside[k] += self.w[k * m + i];
                        }
                    } else {
                        flow -= row[i] - 2.0 * inside[i] + self.outflow[i];
                        mass -= self.mu[i];
                        for k in 0..m {
                            inside[k] -= self.w[k * m + i];
                        }
                    }
                    mask ^= bit;
                }
                if mask != full || self.include_full {
                    fold(&mut acc, mask, mass, flow.max(0.0));
                }
            }
            acc
        };
        let parts: Vec<T> = if blocks > 1 {
            (0..blocks).into_par_iter().map(run).collect()
        } else {
            vec![run(0)]
        };
        let mut it = parts.into_iter();
        let first = it.next().expect("at least one block");
        Ok(it.fold(first, reduce))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub mass: f64,
    pub ratio: f64,
    pub mask: u64,
}

/// Points minimal in (mass, flow/mass); the step curve `κ` reads off them.
#[derive(Debug, Clone, Default)]
struct Frontier {
    pts: Vec<FrontierPoint>,
}

impl Frontier {
    fn insert(&mut self, p: FrontierPoint) {
        let lo = self.pts.partition_point(|q| q.mass < p.mass);
        if lo > 0 && self.pts[lo - 1].ratio <= p.ratio {
            return;
        }
        let hi = self.pts.partition_point(|q| q.mass <= p.mass);
        if self.pts[lo..hi].iter().any(|q| q.ratio < p.ratio || (q.ratio == p.ratio && q.mask <= p.mask)) {
            return;
        }
        let mut end = lo;
        while end < self.pts.len() && self.pts[end].ratio >= p.ratio {
            end += 1;
        }
        self.pts.splice(lo..end, std::iter::once(p));
    }

    fn merge(mut self, other: Frontier) -> Frontier {
        for p in other.pts {
            self.insert(p);
        }
        self
    }
}

/// Step curve `κ_γ(s) = inf{J_γ(A×Aᶜ)/μ(A) : 0 < μ(A) < s}`.
#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricProfile {
    pub points: Vec<FrontierPoint>,
    pub total_mass: f64,
    pub min_mass: f64,
    pub exact: bool,
}

impl IsoperimetricProfile {
    pub fn kappa(&self, s: f64) -> ExtReal {
        let i = self.points.partition_point(|p| p.mass < s);
        if i == 0 {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(self.points[i - 1].ratio)
        }
    }

    /// Minimizing subset for `κ_γ(s)`.
    pub fn minimizer(&self, s: f64) -> Option<u64> {
        let i = self.points.partition_point(|p| p.mass < s);
        (i > 0).then(|| self.points[i - 1].mask)
    }

    /// `inf` over all admissible subsets.
    pub fn kappa_min(&self) -> f64 {
        self.points.last().map_or(f64::INFINITY, |p| p.ratio)
    }

    /// Masses where the curve steps, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass).collect()
    }
}

pub fn profile_of(model: &FlowModel) -> Result<IsoperimetricProfile> {
    let fr = model.fold_subsets(
        Frontier::default,
        |f, mask, mass, flow| f.insert(FrontierPoint { mass, ratio: flow / mass, mask }),
        Frontier::merge,
    )?;
    // recompute with a canonical summation order so results do not depend on block layout
    let mut exact = Frontier::default();
    for p in fr.pts {
        let mass = model.mass(p.mask);
        exact.insert(FrontierPoint { mass, ratio: model.flow(p.mask) / mass, mask: p.mask });
    }
    Ok(IsoperimetricProfile {
        points: exact.pts,
        total_mass: model.mu.iter().sum(),
        min_mass: model.mu.iter().cloned().fold(f64::INFINITY, f64::min),
        exact: true,
    })
}

pub fn enumerate_profile(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
) -> Result<IsoperimetricProfile> {
    profile_of(&FlowModel::new(space, kernel, gamma)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub mass: f64,
    pub flow: f64,
    pub mask: u64,
}

/// Every nonempty proper subset, ordered by mask.
pub fn profile_entries(model: &FlowModel) -> Result<Vec<ProfileEntry>> {
    let mut v = model.fold_subsets(
        Vec::new,
        |v, mask, _, _| v.push(mask),
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    v.sort_unstable();
    Ok(v.into_iter().map(|mask| ProfileEntry { mass: model.mass(mask), flow: model.flow(mask), mask }).collect())
}

/// CSV with columns `mass,flow,subset` (subset as hex bitmask).
pub fn profile_csv(entries: &[ProfileEntry]) -> String {
    let mut s = String::from("mass,flow,subset\n");
    for e in entries {
        s.push_str(&format!("{:e},{:e},{:x}\n", e.mass, e.flow, e.mask));
    }
    s
}

/// Upper envelope of `κ_γ` from random subsets refined by greedy local search.
pub fn sampled_profile(model: &FlowModel, budget: usize, seed: u64) -> IsoperimetricProfile {
    let m = model.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fr = Frontier::default();
    let full = model.full();
    let push = |fr: &mut Frontier, mask: u64| {
        if mask != 0 && (mask != full || model.include_full) {
            let mass = model.mass(mask);
            fr.insert(FrontierPoint { mass, ratio: model.flow(mask) / mass, mask });
        }
    };
    for i in 0..m.min(64) {
        push(&mut fr, 1u64 << i);
    }
    for _ in 0..budget {
        let mut mask: u64 = rng.gen::<u64>() & full;
        if mask == 0 {
            mask = 1 << rng.gen_range(0..m);
        }
        push(&mut fr, mask);
        loop {
            let cur = model.flow(mask) / model.mass(mask);
            let mut best = (cur, mask);
            for i in 0..m {
                let cand = mask ^ (1u64 << i);
                if cand == 0 || (cand == full && !model.include_full) {
                    continue;
                }
                let r = model.flow(cand) / model.mass(cand);
                push(&mut fr, cand);
                if r < best.0 && model.mass(cand) <= model.mass(mask) {
                    best = (r, cand);
                }
            }
            if best.1 == mask {
                break;
            }
            mask = best.1;
        }
    }
    IsoperimetricProfile {
        points: fr.pts,
        total_mass: model.mu.iter().sum(),
        min_mass: model.mu.iter().cloned().fold(f64::INFINITY, f64::min),
        exact: false,
    }
}

/// `inf_A N⁻¹(1/μ(A))·J_γ(A×Aᶜ)` with the minimizing mask.
pub fn kappa_orlicz(model: &FlowModel, n: &YoungFunction) -> Result<(ExtReal, Option<u64>)> {
    let best = model.fold_subsets(
        || (f64::INFINITY, u64::MAX),
        |b, mask, mass, flow| {
            let v = n.inv(1.0 / mass) * flow;
            if v < b.0 || (v == b.0 && mask < b.1) {
                *b = (v, mask);
            }
        },
        |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
    )?;
    if best.1 == u64::MAX {
        return Ok((ExtReal::Infinite, None));
    }
    let v = n.inv(1.0 / model.mass(best.1)) * model.flow(best.1);
    Ok((ExtReal::from_f64(v), Some(best.1)))
}

/// Largest `‖f‖_N / l1(f)` over the family.
pub fn empirical_constant(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    gamma: &WeightFunction,
    n: &YoungFunction,
    family: &[Vec<f64>],
) -> Result<f64> {
    let mut c: f64 = 0.0;
    for f in family {
        let lhs = orlicz_norm(space.mu(), n, f).to_f64();
        let rhs = l1_form(space, kernel, gamma, f)?;
        if lhs > 0.0 {
            c = c.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
        }
    }
    Ok(c)
}

/// (LOS) with constant `C` ⇒ `κ ≥ 1/(2C)`.
pub fn thm20_forward(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    n: &YoungFunction,
    c: f64,
    tol: f64,
) -> Result<Report> {
    if !(c > 0.0) {
        return Err(Error::Invalid("constant must be positive".into()));
    }
    let ones = WeightFunction::ones(space.len());
    let (kappa, mask) = kappa_orlicz(&FlowModel::new(space, kernel, &ones)?, n)?;
    let mut r = Report::new("orlicz isoperimetry from Sobolev", tol);
    r.check("1/(2C) <= kappa", 1.0 / (2.0 * c), kappa.to_f64(), || format!("subset {:x}", mask.unwrap_or(0)));
    Ok(r)
}

/// `κ` ⇒ (LOS) with `C = 1/(2 c_N κ)` on the family.
pub fn thm20_backward(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    n: &YoungFunction,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<(Report, f64)> {
    let cn = n.c_n()?;
    let ones = WeightFunction::ones(space.len());
    let kappa = kappa_orlicz(&FlowModel::new(space, kernel, &ones)?, n)?.0.to_f64();
    if !(cn > 0.0) || !(kappa > 0.0) {
        return Err(Error::Invalid(format!("need c_N > 0 and kappa > 0 (c_N = {cn}, kappa = {kappa})")));
    }
    let c = 1.0 / (2.0 * cn * kappa);
    let mut r = Report::new("Sobolev from orlicz isoperimetry", tol);
    for (idx, f) in family.iter().enumerate() {
        let lhs = orlicz_norm(space.mu(), n, f).to_f64();
        let rhs = c * l1_form(space, kernel, &ones, f)?;
        r.check("||f||_N <= C l1(f)", lhs, rhs, || format!("f#{idx} = {f:?}"));
    }
    Ok((r, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoincareMode {
    Forward,
    Backward,
}

/// Smallest `C̃₂` with `μ(A) ≤ 2C₁J(A×Aᶜ) + C̃₂μ(A)²` for all nonempty `A`, whole space included.
pub fn min_c2_tilde(space: &FiniteMeasureSpace, kernel: &JumpKernel, c1: f64) -> Result<f64> {
    let model = FlowModel::new(space, kernel, &WeightFunction::ones(space.len()))?;
    let inner = model.fold_subsets(
        || 0.0f64,
        |b, _, mass, flow| *b = b.max((mass - 2.0 * c1 * flow) / (mass * mass)),
        f64::max,
    )?;
    Ok(inner.max(1.0 / space.total_mass()))
}

/// Poincaré isoperimetry in either direction.
///
/// Forward checks the subset form with `C̃₂ = C₂`; backward checks the
/// functional form with `C₂ = 2C̃₂` on the family.
pub fn thm20_poincare(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    c1: f64,
    c2: f64,
    mode: PoincareMode,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let ones = WeightFunction::ones(space.len());
    let model = FlowModel::new(space, kernel, &ones)?;
    let mut r = Report::new(format!("poincare isoperimetry ({mode:?})"), tol);
    match mode {
        PoincareMode::Forward => {
            let worst = model.fold_subsets(
                || (f64::INFINITY, 0u64, 0.0, 0.0),
                |b, mask, mass, flow| {
                    let s = 2.0 * c1 * flow + c2 * mass * mass - mass;
                    if s < b.0 {
                        *b = (s, mask, mass, 2.0 * c1 * flow + c2 * mass * mass);
                    }
                },
                |a, b| if b.0 < a.0 { b } else { a },
            )?;
            let full = model.mass(model.full());
            r.check("mu(A) <= 2C1 J + C2 mu(A)^2", full, c2 * full * full, || "whole space".into());
            r.check("mu(A) <= 2C1 J + C2 mu(A)^2", worst.2, worst.3, || format!("subset {:x}", worst.1));
        }
        PoincareMode::Backward => {
            for (idx, f) in family.iter().enumerate() {
                let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
                let lhs = space.l2_sq(f);
                let rhs = c1 * l1_form(space, kernel, &ones, &sq)? + 2.0 * c2 * space.l1(f).powi(2);
                r.check("||f||_2^2 <= C1 l1(f^2) + 2C2~ ||f||_1^2", lhs, rhs, || format!("f#{idx}"));
            }
        }
    }
    Ok(r)
}

/// `2 ∫_0^∞ J({f > r} × {f ≤ r}) dr` for nonnegative `f`, evaluated level by level.
pub fn layer_cake_l1(model: &FlowModel, f: &[f64]) -> f64 {
    let mut levels: Vec<f64> = f.to_vec();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut total = 0.0;
    for w in levels.windows(2) {
        let mask = f.iter().enumerate().filter(|(_, x)| **x > w[0]).fold(0u64, |a, (i, _)| a | 1 << i);
        total += (w[1] - w[0]) * model.flow(mask);
    }
    2.0 * total
}

/// Co-area checks: layer-cake identity and `l1(f)/μ(f) ≥ inf_A J(A×Aᶜ)/μ(A)`.
pub fn coarea_check(
    space: &FiniteMeasureSpace,
    kernel: &JumpKernel,
    family: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    if space.len() > 16 {
        return Err(Error::TooLarge { max: 16, got: space.len() });
    }
    let ones = WeightFunction::ones(space.len());
    let model = FlowModel::new(space, kernel, &ones)?;
    let inf = profile_of(&model)?.kappa_min();
    let mut r = Report::new("co-area", tol);
    for (idx, f) in family.iter().enumerate() {
        if f.iter().any(|x| *x < 0.0) {
            return Err(Error::Invalid("co-area check needs nonnegative functions".into()));
        }
        let direct = l1_form(space, kernel, &ones, f)?;
        let cake = layer_cake_l1(&model, f);
        r.check("layer cake <= direct", cake, direct, || format!("f#{idx}"));
        r.check("direct <= layer cake", direct, cake, || format!("f#{idx}"));
        let mean: f64 = space.l1(f);
        if mean > 0.0 && f.iter().any(|x| *x == 0.0) {
            r.check("inf_A J/mu(A) <= l1(f)/mu(f)", inf, direct / mean, || format!("f#{idx}"));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> (FiniteMeasureSpace, JumpKernel) {
        (FiniteMeasureSpace::uniform(2), JumpKernel::from_rows(&[vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap())
    }

    #[test]
    fn two_point_profile() {
        let (s, k) = two_point();
        let p = enumerate_profile(&s, &k, &WeightFunction::ones(2)).unwrap();
        assert_eq!(p.kappa(1.0), ExtReal::Infinite);
        assert_eq!(p.kappa(1.5), ExtReal::Finite(3.0));
        assert_eq!(p.kappa(10.0), ExtReal::Finite(3.0));
        assert_eq!(p.minimizer(1.5), Some(1));
    }

    #[test]
    fn two_point_orlicz() {
        let (s, k) = two_point();
        let m = FlowModel::new(&s, &k, &WeightFunction::ones(2)).unwrap();
        let (v, _) = kappa_orlicz(&m, &YoungFunction::power(2.0)).unwrap();
        assert_eq!(v, ExtReal::Finite(3.0));
    }

    #[test]
    fn disconnected_orlicz_is_zero() {
        let s = FiniteMeasureSpace::uniform(4);
        let k = JumpKernel::from_rows(&[
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0],
            vec![0.0, 0.0, 2.0, 0.0],
        ])
        .unwrap();
        let m = FlowModel::new(&s, &k, &WeightFunction::ones(4)).unwrap();
        assert_eq!(kappa_orlicz(&m, &YoungFunction::power(1.5)).unwrap().0, ExtReal::Finite(0.0));
    }

    #[test]
    fn gray_code_flows_match_direct() {
        let s = FiniteMeasureSpace::new(vec![0.5, 1.0, 2.0, 0.7, 1.3]).unwrap();
        let mut rows = vec![vec![0.0; 5]; 5];
        for i in 0..5 {
            for k in 0..5 {
                if i != k {
                    rows[i][k] = 1.0 + ((i * k) % 3) as f64 + (i + k) as f64 * 0.1;
                }
            }
        }
        let k = JumpKernel::from_rows(&rows).unwrap();
        let m = FlowModel::new(&s, &k, &WeightFunction::ones(5)).unwrap();
        let bad = m
            .fold_subsets(|| 0.0f64, |b, mask, mass, flow| *b = b.max((flow - m.flow(mask)).abs() + (mass - m.mass(mask)).abs()), f64::max)
            .unwrap();
        assert!(bad < 1e-12);
        let count = m.fold_subsets(|| 0usize, |c, _, _, _| *c += 1, |a, b| a + b).unwrap();
        assert_eq!(count, 30);
    }

    #[test]
    fn complement_symmetry() {
        let (s, k) = two_point();
        let m = FlowModel::new(&s, &k, &WeightFunction::ones(2)).unwrap();
        assert_eq!(m.flow(1), m.flow(2));
    }
}
