//! Experiment runners. Each returns the files to write and the theorem reports
//! that decide the exit status.

use std::collections::BTreeMap;

use nlform::fit::loglog_fit;
use nlform::instance::{random_instance, Instance};
use nlform::isoperimetry::{profile_csv, profile_entries, profile_of, FlowModel};
use nlform::lattice::{
    gradient_decay, heat_decay, nm_scan, p1_kernel, p1_profile, radial_energy_fits, subord_weights, weight_limit, RadialKernel,
    TruncatedLattice,
};
use nlform::perturbed::{beta_slope, example_threshold, gl_fits, phi_l, RadialWeight};
use nlform::pipeline::{batch_csv, digest, TheoremReport};
use nlform::report::Report;
use nlform::suite::{killed_rate, killed_suite, lemma1_suite, lemma2_suite, standard_youngs, thm20_suite, thm21_suite, thm4x_suite, SuiteOptions};
use nlform::young::builtin;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::manifest::*;

#[derive(Debug, Default)]
pub struct Outcome {
    /// Relative path to contents.
    pub files: BTreeMap<String, String>,
    pub reports: Vec<(String, TheoremReport)>,
    /// Output directory requested by the manifest.
    pub output_dir: Option<std::path::PathBuf>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.pass)
    }

    fn json<T: Serialize>(&mut self, path: &str, v: &T) {
        let mut s = serde_json::to_string_pretty(v).expect("serializable");
        s.push('\n');
        self.files.insert(path.into(), s);
    }

    /// Writes `summary.csv` and the top-level `report.json`.
    fn finish<P: Serialize>(mut self, kind: Kind, seed: u64, tol: &Tolerances, results: P) -> Self {
        let csv = batch_csv(self.reports.iter().map(|(l, r)| (l.as_str(), r)));
        self.files.insert("summary.csv".into(), csv);
        let summary: Vec<Value> = self
            .reports
            .iter()
            .map(|(l, r)| {
                json!({
                    "label": l,
                    "theorem": r.theorem,
                    "pass": r.pass,
                    "checks": r.checks(),
                    "violations": r.violations(),
                    "worst_scaled_slack": r.worst_slack(),
                })
            })
            .collect();
        let top = json!({
            "kind": kind.name(),
            "seed": seed,
            "tolerances": tol,
            "pass": self.pass(),
            "reports": summary,
            "results": results,
        });
        self.json("report.json", &top);
        self
    }
}

fn pass_report(name: &str, inputs: &impl Serialize, reports: Vec<Report>) -> TheoremReport {
    let mut t = TheoremReport::new(name, digest(inputs));
    for r in reports {
        t.push(r);
    }
    t
}

fn nonempty(len: usize, field: &str) -> CliResult<()> {
    if len == 0 {
        return Err(CliError::Validation(format!("field `{field}` is empty")));
    }
    Ok(())
}

/// `|x| ≤ bound` as an inequality check.
fn within(rep: &mut Report, claim: &str, err: f64, bound: f64, witness: String) {
    rep.check(claim, err, bound, || witness);
}

fn resolve_theorems(name: &str, inst: &Instance, requested: &Option<Vec<TheoremId>>) -> CliResult<Vec<TheoremId>> {
    let killed = inst.potential.is_some();
    let mut ids = requested.clone().unwrap_or_else(|| TheoremId::defaults(killed));
    ids.sort();
    ids.dedup();
    for id in &ids {
        if id.needs_killing().is_some_and(|k| k != killed) {
            let what = if killed { "has a killing potential" } else { "has no killing potential" };
            return Err(CliError::Validation(format!("theorem {id:?} does not apply: instance `{name}` {what}").to_lowercase()));
        }
    }
    Ok(ids)
}

fn verify_instance(name: &str, inst: &Instance, ids: &[TheoremId], o: SuiteOptions, gf_tol: f64) -> CliResult<Vec<TheoremReport>> {
    let ctx = |t: &str| format!("instance `{name}`, {t}");
    let mut out = Vec::new();
    let mut beta = None;
    for id in ids {
        match id {
            TheoremId::Thm20 => {
                let youngs = module(ctx("young functions"), standard_youngs())?;
                out.push(module(ctx("thm20"), thm20_suite(inst, &youngs, o))?);
            }
            TheoremId::Lemma1 => out.push(module(ctx("lemma1"), lemma1_suite(inst, o))?),
            TheoremId::Lemma2 => {
                let (r, b) = module(ctx("lemma2"), lemma2_suite(inst, o))?;
                beta = Some(b);
                out.push(r);
            }
            TheoremId::Thm21 => {
                if beta.is_none() {
                    beta = Some(if inst.potential.is_some() {
                        module(ctx("rate estimate"), killed_rate(inst, o.seed))?
                    } else {
                        module(ctx("rate estimate"), lemma2_suite(inst, o))?.1
                    });
                }
                out.push(module(ctx("thm21"), thm21_suite(inst, beta.as_ref().expect("set above"), o))?);
            }
            TheoremId::Thm41 => {
                let (a, b) = module(ctx("thm41"), thm4x_suite(inst, o))?;
                out.push(a);
                out.push(b);
            }
            TheoremId::Thm43 => {
                if beta.is_none() {
                    beta = Some(module(ctx("rate estimate"), killed_rate(inst, o.seed))?);
                }
                let (gf, t43) = module(ctx("thm43"), killed_suite(inst, beta.as_ref().expect("set above"), o, gf_tol))?;
                out.push(pass_report("gf_check", &(inst.to_doc(), o.seed), vec![gf]));
                out.push(t43);
            }
        }
    }
    Ok(out)
}

/// Runs the finite-space theorem suites on named instances in parallel.
fn verify_set(named: Vec<(String, Instance)>, theorems: &Option<Vec<TheoremId>>, functions: usize, seed: u64, tol: &Tolerances) -> CliResult<Outcome> {
    let plans = named
        .iter()
        .map(|(n, i)| resolve_theorems(n, i, theorems))
        .collect::<CliResult<Vec<_>>>()?;
    let results = named
        .par_iter()
        .zip(plans.par_iter())
        .enumerate()
        .map(|(k, ((name, inst), ids))| {
            let o = SuiteOptions { functions, seed: seed.wrapping_add(k as u64), tol: tol.tol };
            verify_instance(name, inst, ids, o, tol.gf_tol)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Outcome::default();
    for ((name, _), reps) in named.iter().zip(results) {
        out.json(&format!("reports/{name}.json"), &reps);
        out.reports.extend(reps.into_iter().map(|r| (name.clone(), r)));
    }
    Ok(out)
}

fn load_named(kind: Kind, text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<(Vec<(String, Instance)>, Option<Vec<TheoremId>>, usize, u64, Tolerances, Outcome)> {
    let mut pre = Outcome::default();
    match kind {
        Kind::FiniteVerify => {
            let m: Manifest<FiniteParams> = parse(text, base, kind)?;
            pre.output_dir = m.output_dir.clone();
            nonempty(m.params.instances.len(), "params.instances")?;
            let named = m.params.instances.iter().enumerate().map(|(i, r)| r.load(i, &m.base)).collect::<CliResult<Vec<_>>>()?;
            let mut seen = std::collections::BTreeSet::new();
            for (n, _) in &named {
                if !seen.insert(n.clone()) {
                    return Err(CliError::Validation(format!("duplicate instance name `{n}`")));
                }
            }
            let (seed, tol) = ov.apply(m.seed, m.tolerances)?;
            Ok((named, m.params.theorems, m.params.functions, seed, tol, pre))
        }
        Kind::TheoremBatch => {
            let m: Manifest<BatchParams> = parse(text, base, kind)?;
            pre.output_dir = m.output_dir.clone();
            nonempty(m.params.count, "params.count")?;
            m.params.generator.validate().map_err(|e| CliError::Validation(format!("params.generator: {e}")))?;
            let (seed, tol) = ov.apply(m.seed, m.tolerances)?;
            let named: Vec<(String, Instance)> = (0..m.params.count)
                .map(|i| (format!("inst-{i:03}"), random_instance(&m.params.generator, seed.wrapping_add(i as u64))))
                .collect();
            for (n, inst) in &named {
                pre.json(&format!("instances/{n}.json"), &inst.to_doc());
            }
            Ok((named, m.params.theorems, m.params.functions, seed, tol, pre))
        }
        other => Err(CliError::Validation(format!("kind {} does not describe finite instances", other.name()))),
    }
}

pub fn verify(kind: Kind, text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<Outcome> {
    let (named, theorems, functions, seed, tol, pre) = load_named(kind, text, base, ov)?;
    let mut out = verify_set(named, &theorems, functions, seed, &tol)?;
    out.files.extend(pre.files);
    out.output_dir = pre.output_dir;
    Ok(out.finish(kind, seed, &tol, json!({ "functions": functions })))
}

/// Isoperimetric profiles by subset enumeration.
pub fn enumerate(kind: Kind, text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<Outcome> {
    let (named, _, _, seed, tol, pre) = load_named(kind, text, base, ov)?;
    let rows = named
        .par_iter()
        .map(|(name, inst)| {
            let model = module(format!("instance `{name}`"), FlowModel::new(&inst.space, &inst.kernel, &inst.gamma))?;
            let entries = module(format!("instance `{name}`, enumeration"), profile_entries(&model))?;
            let profile = module(format!("instance `{name}`, profile"), profile_of(&model))?;
            Ok((name.clone(), profile_csv(&entries), json!({
                "instance": name,
                "points": inst.len(),
                "subsets": entries.len(),
                "total_mass": profile.total_mass,
                "kappa_min": profile.kappa_min(),
                "breakpoints": profile.breakpoints(),
            })))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Outcome { output_dir: pre.output_dir, ..Default::default() };
    let mut summary = Vec::new();
    for (name, csv, js) in rows {
        out.files.insert(format!("profiles/{name}.csv"), csv);
        summary.push(js);
    }
    Ok(out.finish(kind, seed, &tol, summary))
}

pub fn subordinate(text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<Outcome> {
    let m: Manifest<LatticeParams> = parse(text, base, Kind::LatticeSubordination)?;
    let (seed, tol) = ov.apply(m.seed, m.tolerances)?;
    let p = &m.params;
    nonempty(p.cases.len(), "params.cases")?;
    let times = p.times.validate("params.times")?;
    let cases = p
        .cases
        .par_iter()
        .map(|c| -> CliResult<(String, TheoremReport, BTreeMap<String, String>, Value)> {
            let label = format!("n{}_alpha{}", c.n, c.alpha);
            let ctx = |t: &str| format!("case {label}, {t}");
            let mut files = BTreeMap::new();
            let w = subord_weights(c.alpha, p.k_max).map_err(|e| CliError::Validation(format!("case {label}: {e}")))?;
            let mut weights = Report::new("subordination weights", tol.tol);
            weights.check("sum_k c(k) <= 1", w.partial_sum(), 1.0, || format!("K = {}", p.k_max));
            within(&mut weights, "|c(1) - alpha/2|", (w.weight(1) - c.alpha / 2.0).abs(), tol.tol, "k = 1".into());
            let lim = weight_limit(c.alpha);
            let scaled = w.scaled_weight(p.k_max);
            let mut reports = vec![weights];
            let mut results = json!({
                "n": c.n,
                "alpha": c.alpha,
                "weights": {"k_max": p.k_max, "partial_sum": w.partial_sum(), "tail": w.tail, "scaled_weight_at_k_max": scaled, "scaled_weight_limit": lim},
            });
            let rel = |slope: f64, expected: f64| (slope / expected - 1.0).abs();
            if c.n <= 2 {
                let prof = module(ctx("p1 profile"), p1_profile(c.n, c.alpha, p.k_max, p.radius))?;
                let expected = -(c.n as f64 + c.alpha);
                let mut r = Report::new("p1 power law", tol.tol);
                within(&mut r, "|slope/expected - 1|", rel(prof.fit.slope, expected), tol.slope_tol, format!("slope {} vs {expected}", prof.fit.slope));
                reports.push(r);
                let mut csv = String::from("radius,p1\n");
                for (x, v) in prof.radii.iter().zip(&prof.values) {
                    csv.push_str(&format!("{x},{v:e}\n"));
                }
                files.insert(format!("lattice/{label}/p1_profile.csv"), csv);
                results["p1"] = json!({"slope": prof.fit.slope, "expected_slope": expected, "band": prof.band, "entry_bound": prof.entry_bound});
            }
            let heat = module(ctx("on-diagonal decay"), heat_decay(c.n, c.alpha, &times))?;
            let mut r = Report::new("on-diagonal decay", tol.tol);
            within(&mut r, "|slope/expected - 1|", heat.rel_error, tol.slope_tol, format!("slope {} vs {}", heat.fit.slope, heat.expected_slope));
            reports.push(r);
            let mut csv = String::from("t,p_t_00\n");
            for (t, v) in heat.times.iter().zip(&heat.values) {
                csv.push_str(&format!("{t},{v:e}\n"));
            }
            files.insert(format!("lattice/{label}/on_diagonal.csv"), csv);
            results["on_diagonal"] = json!({"slope": heat.fit.slope, "expected_slope": heat.expected_slope});
            if let Some(side) = p.gradient_side {
                let g = module(ctx("gradient decay"), gradient_decay(c.n, c.alpha, &times, side))?;
                let mut r = Report::new("gradient decay", tol.tol);
                within(&mut r, "|slope/expected - 1|", g.rel_error, tol.slope_tol, format!("slope {} vs {}", g.fit.slope, g.expected_slope));
                if let Some(s) = g.torus_sensitivity {
                    r.note(format!("torus sensitivity {s:e}"));
                }
                reports.push(r);
                results["gradient"] = json!({"side": side, "slope": g.fit.slope, "expected_slope": g.expected_slope, "torus_sensitivity": g.torus_sensitivity});
            }
            if let Some(rho) = p.truncated_rho {
                let f = module(ctx("truncated rate"), TruncatedLattice::new(c.n, c.alpha, rho).and_then(|t| t.fit()))?;
                let (es, el) = f.rel_errors();
                let mut r = Report::new("truncated rate crossover", tol.tol);
                within(&mut r, "|small-r slope/expected - 1|", es, tol.slope_tol, format!("rho = {rho}"));
                within(&mut r, "|large-r slope/expected - 1|", el, tol.slope_tol, format!("rho = {rho}"));
                reports.push(r);
                results["truncated"] = serde_json::to_value(&f).unwrap_or(Value::Null);
            }
            if let Some((k, radius)) = p.window {
                let win = module(ctx("p1 window"), p1_kernel(c.n, c.alpha, k, radius))?;
                files.insert(format!("lattice/{label}/p1_window.csv"), win.window.to_csv());
                results["window"] = json!({"k": k, "radius": radius, "tail": win.tail, "entry_bound": win.entry_bound});
            }
            Ok((label, pass_report("lattice-subordination", &(c, p.k_max, p.radius, &times), reports), files, results))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Outcome { output_dir: m.output_dir.clone(), ..Default::default() };
    let mut results = Vec::new();
    for (label, rep, files, res) in cases {
        out.files.extend(files);
        out.reports.push((label, rep));
        results.push(res);
    }
    Ok(out.finish(Kind::LatticeSubordination, seed, &tol, results))
}

pub fn sharpness(text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<Outcome> {
    let m: Manifest<SharpnessParams> = parse(text, base, Kind::SharpnessScan)?;
    let (seed, tol) = ov.apply(m.seed, m.tolerances)?;
    let p = &m.params;
    nonempty(p.radial.len() + p.nm.len(), "params.radial and params.nm")?;
    let grid = p.s_grid.validate("params.s_grid")?;
    let mut out = Outcome { output_dir: m.output_dir.clone(), ..Default::default() };
    let mut radial_rep = Report::new("radial energy exponents", tol.tol);
    let mut csv = String::from("n,mode,alpha1,alpha2,small_slope,small_expected,large_slope,large_expected\n");
    let fits = p
        .radial
        .par_iter()
        .map(|c| {
            let kernel = match c.mode {
                KernelMode::Min => RadialKernel::MinKernel { alpha1: c.alpha1, alpha2: c.alpha2 },
                KernelMode::Max => RadialKernel::MaxKernel { alpha1: c.alpha1, alpha2: c.alpha2 },
            };
            module(format!("radial case {c:?}"), radial_energy_fits(c.n, kernel))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut radial = Vec::new();
    for (c, (small, large)) in p.radial.iter().zip(fits) {
        let nf = c.n as f64;
        let (lo, hi) = (c.alpha1.min(c.alpha2), c.alpha1.max(c.alpha2));
        let (near, far) = (nf + 1.0 - lo / 2.0, nf + 1.0 - hi / 2.0);
        let (se, le) = match c.mode {
            KernelMode::Min => (near, far),
            KernelMode::Max => (far, near),
        };
        let w = format!("{c:?}");
        within(&mut radial_rep, "|small-s slope/expected - 1|", (small.slope / se - 1.0).abs(), tol.slope_tol, w.clone());
        within(&mut radial_rep, "|large-s slope/expected - 1|", (large.slope / le - 1.0).abs(), tol.slope_tol, w);
        let mode = serde_json::to_value(c.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        csv.push_str(&format!("{},{mode},{},{},{},{se},{},{le}\n", c.n, c.alpha1, c.alpha2, small.slope, large.slope));
        radial.push(json!({"case": c, "small_slope": small.slope, "small_expected": se, "large_slope": large.slope, "large_expected": le}));
    }
    if !p.radial.is_empty() {
        out.files.insert("sharpness/radial.csv".into(), csv);
        out.reports.push(("radial".into(), pass_report("radial energy", &p.radial, vec![radial_rep])));
    }
    let mut nm_rep = Report::new("dominance dichotomy", tol.tol);
    let mut nm = Vec::new();
    let mut csv = String::from("case,s,value\n");
    for (i, c) in p.nm.iter().enumerate() {
        let young = builtin(&c.young.name, &c.young.params).map_err(|e| CliError::Validation(format!("params.nm[{i}].young: {e}")))?;
        let scan = module(format!("nm case {i}"), nm_scan(c.n, c.alpha1, c.alpha2, &young, c.c, &grid, tol.slope_tol))?;
        nm_rep.check("scan outcome differs from expectation", (scan.bounded != c.expect_bounded) as u8 as f64, 0.0, || {
            format!("case {i}: bounded {} expected {}", scan.bounded, c.expect_bounded)
        });
        for (s, v) in scan.s_grid.iter().zip(&scan.values) {
            csv.push_str(&format!("{i},{s:e},{v:e}\n"));
        }
        nm.push(json!({"case": c, "bounded": scan.bounded, "small_slope": scan.small_slope, "large_slope": scan.large_slope}));
    }
    if !p.nm.is_empty() {
        out.files.insert("sharpness/nm_scan.csv".into(), csv);
        out.reports.push(("nm".into(), pass_report("dominance scan", &p.nm, vec![nm_rep])));
    }
    Ok(out.finish(Kind::SharpnessScan, seed, &tol, json!({"radial": radial, "nm": nm})))
}

pub fn perturbed(text: &str, base: &std::path::Path, ov: &Overrides) -> CliResult<Outcome> {
    let m: Manifest<PerturbedParams> = parse(text, base, Kind::PerturbedThreshold)?;
    let (seed, tol) = ov.apply(m.seed, m.tolerances)?;
    let p = &m.params;
    nonempty(p.eps.len(), "params.eps")?;
    let phi_ls = p.phi_ls.validate("params.phi_ls")?;
    let ramp_ls = p.ramp_ls.validate("params.ramp_ls")?;
    let invalid = |e: nlform::Error| CliError::Validation(format!("params: {e}"));
    let weights = p.eps.iter().map(|&e| RadialWeight::log_family(p.n, p.alpha, e)).collect::<nlform::Result<Vec<_>>>().map_err(invalid)?;
    let extra = p.weights.iter().map(|s| RadialWeight::new(*s)).collect::<nlform::Result<Vec<_>>>().map_err(invalid)?;
    let mut out = Outcome { output_dir: m.output_dir.clone(), ..Default::default() };
    let rows = weights
        .par_iter()
        .map(|w| -> CliResult<_> {
            let phis = phi_ls.iter().map(|&l| phi_l(w, l)).collect::<nlform::Result<Vec<_>>>();
            let phis = module(format!("weight {:?}, phi", w.spec), phis)?;
            let ramp = module(format!("weight {:?}, ramp", w.spec), gl_fits(w, &ramp_ls))?;
            Ok((phis, ramp))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut phi_csv = String::from("eps,l,phi,log_phi,tail\n");
    let mut ramp_csv = String::from("eps,l,inner_sup,mass,l1mass\n");
    let mut per_eps = Vec::new();
    for (eps, (phis, ramp)) in p.eps.iter().zip(&rows) {
        for v in phis {
            phi_csv.push_str(&format!("{eps},{:e},{:e},{},{:?}\n", v.l, v.value, v.log_value, v.tail));
        }
        for q in &ramp.quantities {
            ramp_csv.push_str(&format!("{eps},{:e},{:e},{:e},{:e}\n", q.l, q.inner_sup, q.mass, q.l1mass));
        }
        let vals: Vec<f64> = phis.iter().map(|v| v.value).collect();
        let phi_slope = loglog_fit(&phi_ls, &vals).filter(|_| vals.iter().all(|v| *v > 0.0)).map(|f| f.slope);
        per_eps.push(json!({
            "eps": eps,
            "phi_slope": phi_slope,
            "phi_tail": phis[0].tail,
            "ramp_slopes": {"inner_sup": ramp.inner_sup.slope, "mass": ramp.mass.slope, "l1mass_sq": ramp.l1mass_sq.slope},
        }));
    }
    out.files.insert("perturbed/phi.csv".into(), phi_csv);
    out.files.insert("perturbed/ramp.csv".into(), ramp_csv);
    let th = module("threshold classification", example_threshold(p.n, p.alpha, &p.eps, &ramp_ls, p.classify_tol))?;
    let mut cls = Report::new("threshold classification", tol.tol);
    for c in &th.cases {
        cls.check("classification differs from the threshold", (c.observed != c.expected) as u8 as f64, 0.0, || {
            format!("eps {}: observed {:?}, expected {:?}", c.eps, c.observed, c.expected)
        });
    }
    let mut reports = vec![cls];
    let mut betas = Vec::new();
    if let Some(b) = p.beta {
        let mut rep = Report::new("rate exponent", tol.tol);
        let mut csv = String::from("eps,r,log_beta\n");
        for (eps, w) in p.eps.iter().zip(&weights).filter(|(e, _)| **e > p.alpha / 2.0) {
            let fit = module(format!("rate for eps {eps}"), beta_slope(w, b.constants, b.r_lo, b.r_hi))?;
            within(&mut rep, "|slope/expected - 1|", fit.rel_error, tol.slope_tol, format!("eps {eps}: slope {} vs {}", fit.slope, fit.expected));
            for (r, lb) in fit.r.iter().zip(&fit.log_beta) {
                csv.push_str(&format!("{eps},{r:e},{lb}\n"));
            }
            betas.push(json!({"eps": eps, "slope": fit.slope, "expected": fit.expected}));
        }
        out.files.insert("perturbed/beta.csv".into(), csv);
        reports.push(rep);
    }
    if !extra.is_empty() {
        let mut csv = String::from("weight,l,phi,log_phi,tail\n");
        for (i, w) in extra.iter().enumerate() {
            for &l in &phi_ls {
                let v = module(format!("params.weights[{i}]"), phi_l(w, l))?;
                csv.push_str(&format!("{i},{l:e},{:e},{},{:?}\n", v.value, v.log_value, v.tail));
            }
        }
        out.files.insert("perturbed/weights.csv".into(), csv);
    }
    out.reports.push((format!("n{}_alpha{}", p.n, p.alpha), pass_report("perturbed-threshold", &(p.n, p.alpha, &p.eps), reports)));
    let results = json!({"n": p.n, "alpha": p.alpha, "threshold": th, "cases": per_eps, "rates": betas});
    Ok(out.finish(Kind::PerturbedThreshold, seed, &tol, results))
}

/// Command-line overrides of the manifest.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, seed: u64, mut tol: Tolerances) -> CliResult<(u64, Tolerances)> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("--tol must be positive and finite, got {t}")));
            }
            tol.tol = t;
        }
        Ok((self.seed.unwrap_or(seed), tol))
    }
}
