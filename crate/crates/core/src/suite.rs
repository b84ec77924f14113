//! Per-instance verification suites over the finite-space engines, shared by
//! batch runs and the command line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::log_grid;
use crate::instance::{indicators, random_functions, vanishing_functions, Instance};
use crate::isoperimetry::{empirical_constant, kappa_orlicz, profile_of, thm20_backward, thm20_forward, FlowModel};
use crate::measure::{Spectral, ThetaProvider, WeightFunction};
use crate::pipeline::{gf_check, lemma1_core_with, lemma1_poincare_with, lemma1_sobolev, thm21_verify, thm41, thm42, thm43, TheoremReport};
use crate::report::Report;
use crate::superpoincare::{estimated_rate, lemma2_bound, sp_verify, RateFunction};
use crate::young::{log_power_auto, YoungFunction};

/// Young functions exercised by the isoperimetry suite.
pub fn standard_youngs() -> Result<Vec<(&'static str, YoungFunction)>> {
    Ok(vec![
        ("power_1.5", YoungFunction::power(1.5)),
        ("power_2", YoungFunction::power(2.0)),
        ("min_power", YoungFunction::MinPower { p1: 1.5, p2: 3.0 }),
        ("max_power", YoungFunction::MaxPower { p1: 1.5, p2: 3.0 }),
        ("log_plus", log_power_auto(1.5, 1.0, false)?),
        ("log_minus", log_power_auto(1.5, 1.0, true)?),
    ])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteOptions {
    /// Random functions per instance.
    pub functions: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { functions: 500, seed: 0, tol: 1e-9 }
    }
}

fn conservative(inst: &Instance) -> Result<()> {
    if inst.potential.is_some() {
        return Err(Error::Invalid("suite expects a model without killing".into()));
    }
    Ok(())
}

/// Forward `κ ≥ 1/(2C_emp)` with `C_emp` over vanishing functions and
/// indicators, and backward (LOS) at `C = 1/(2c_Nκ)`, for each Young function.
pub fn thm20_suite(inst: &Instance, youngs: &[(&str, YoungFunction)], o: SuiteOptions) -> Result<TheoremReport> {
    conservative(inst)?;
    let m = inst.len();
    let mut rep = TheoremReport::new("thm20", crate::pipeline::digest(&(inst.to_doc(), o.seed)));
    let fam = vanishing_functions(m, o.functions, o.seed);
    let mut with_ind = fam.clone();
    with_ind.extend(indicators(m));
    let ones = WeightFunction::ones(m);
    for (name, n) in youngs {
        let c_emp = empirical_constant(&inst.space, &inst.kernel, &ones, n, &with_ind)?;
        rep.constant(&format!("C_emp[{name}]"), c_emp);
        let mut fwd = thm20_forward(&inst.space, &inst.kernel, n, c_emp, o.tol)?;
        fwd.name = format!("{} [{name}]", fwd.name);
        rep.push(fwd);
        let (mut bwd, c) = thm20_backward(&inst.space, &inst.kernel, n, &fam, o.tol)?;
        bwd.name = format!("{} [{name}]", bwd.name);
        rep.constant(&format!("C[{name}]"), c);
        rep.push(bwd);
    }
    Ok(rep)
}

/// Layer-cake core, Poincaré-type and Sobolev-type conclusions with the enumerated profile.
pub fn lemma1_suite(inst: &Instance, o: SuiteOptions) -> Result<TheoremReport> {
    conservative(inst)?;
    let m = inst.len();
    let (space, kernel, gamma) = (&inst.space, &inst.kernel, &inst.gamma);
    let mut rep = TheoremReport::new("lemma1", crate::pipeline::digest(&(inst.to_doc(), o.seed)));
    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    let fam = vanishing_functions(m, o.functions, o.seed);
    let mut core = Report::new("layer-cake core", o.tol);
    let gs: [(&str, fn(f64) -> f64); 2] = [("s^2", |s| s * s), ("s^1.5", |s| s.powf(1.5))];
    for (gname, g) in gs {
        for (idx, f) in fam.iter().enumerate().filter(|(_, f)| f.iter().any(|x| *x != 0.0)) {
            let c = lemma1_core_with(&profile, space, kernel, gamma, &g, f)?;
            core.check("int kappa(1/G) <= (1/2) l1", c.lhs, c.rhs, || format!("G = {gname}, f#{idx}"));
        }
    }
    rep.push(core);
    let all = random_functions(m, o.functions, o.seed.wrapping_add(1));
    let total = space.total_mass();
    for s in [0.25 * total, 0.5 * total, total] {
        rep.push(lemma1_poincare_with(&profile, space, kernel, gamma, s, &all, o.tol)?);
    }
    let (_, sob) = lemma1_sobolev(space, kernel, gamma, &fam, o.tol)?;
    rep.push(sob);
    Ok(rep)
}

/// Rate grid used to estimate `β` on finite spaces.
pub fn estimation_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 30)
}

/// Certified rate `β = 1.01 × sp_estimate` and the Buser-type bound on a 20-point mass grid.
pub fn lemma2_suite(inst: &Instance, o: SuiteOptions) -> Result<(TheoremReport, RateFunction)> {
    conservative(inst)?;
    let (space, kernel, gamma) = (&inst.space, &inst.kernel, &inst.gamma);
    let mut rep = TheoremReport::new("lemma2", crate::pipeline::digest(&(inst.to_doc(), o.seed)));
    let grid = estimation_grid();
    let beta = estimated_rate(space, kernel, None, &grid, 1.01, o.seed)?;
    let fam = random_functions(inst.len(), o.functions, o.seed);
    let mut cert = sp_verify(space, kernel, None, &beta, &fam, &grid, o.tol)?;
    cert.name = format!("hypothesis: {}", cert.name);
    rep.push(cert);
    let profile = profile_of(&FlowModel::new(space, kernel, gamma)?)?;
    let theta = ThetaProvider::new(space, kernel, gamma, None)?;
    let s_grid = log_grid(profile.min_mass, profile.total_mass, 20);
    rep.push(lemma2_bound(&profile, &theta, &beta, &s_grid, o.tol)?);
    rep.derive("beta", &beta);
    Ok((rep, beta))
}

/// Certified rate for a killed model on a grid reaching past the spectral scale.
pub fn killed_rate(inst: &Instance, seed: u64) -> Result<RateFunction> {
    let pot = inst.potential.as_ref().ok_or_else(|| Error::Invalid("model has no killing potential".into()))?;
    let spec = Spectral::new(&inst.space, &inst.kernel, Some(pot))?;
    let lam0 = spec.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    estimated_rate(&inst.space, &inst.kernel, Some(pot), &log_grid(1e-3, 4.0 / lam0, 40), 1.01, seed)
}

/// Orlicz-Sobolev from a super-Poincaré rate at `C★`; for conservative
/// models the report records that the finiteness hypothesis fails.
pub fn thm21_suite(inst: &Instance, beta: &RateFunction, o: SuiteOptions) -> Result<TheoremReport> {
    let fam = if inst.potential.is_some() {
        random_functions(inst.len(), o.functions, o.seed)
    } else {
        vanishing_functions(inst.len(), o.functions, o.seed)
    };
    thm21_verify(&inst.space, &inst.kernel, &inst.gamma, inst.potential.as_ref(), beta, &fam, o.tol)
}

/// Orlicz-Sobolev at the certified `C` for `N = s²`, then its `β₁` fed to the converse engine.
pub fn thm4x_suite(inst: &Instance, o: SuiteOptions) -> Result<(TheoremReport, TheoremReport)> {
    conservative(inst)?;
    let (space, kernel, gamma) = (&inst.space, &inst.kernel, &inst.gamma);
    let n = YoungFunction::power(2.0);
    let kappa = kappa_orlicz(&FlowModel::new(space, kernel, gamma)?, &n)?.0.to_f64();
    let c = 1.0 / (2.0 * n.c_n()? * kappa);
    let fam = vanishing_functions(inst.len(), o.functions, o.seed);
    let r41 = thm41(&n, c, space, kernel, gamma, &fam, o.tol)?;
    let beta1: RateFunction = serde_json::from_value(r41.derived["beta_1"].clone()).map_err(|e| Error::Invalid(e.to_string()))?;
    let r42 = thm42(&beta1, space, kernel, gamma, &fam, o.tol)?;
    Ok((r41, r42))
}

/// Extension identity at `gf_tol`, then the forward and converse killed statements for `β`.
pub fn killed_suite(inst: &Instance, beta: &RateFunction, o: SuiteOptions, gf_tol: f64) -> Result<(Report, TheoremReport)> {
    let pot = inst.potential.as_ref().ok_or_else(|| Error::Invalid("model has no killing potential".into()))?;
    let fam = random_functions(inst.len(), o.functions, o.seed);
    let gf = gf_check(&inst.space, &inst.kernel, pot, &inst.gamma, &fam, gf_tol)?;
    let t43 = thm43(&inst.space, &inst.kernel, pot, &inst.gamma, beta, &fam, o.tol)?;
    Ok((gf, t43))
}
