use nlform::instance::{random_functions, random_instance, vanishing_functions, GenerateOptions, Instance};
use nlform::isoperimetry::{kappa_orlicz, FlowModel};
use nlform::measure::Spectral;
use nlform::pipeline::*;
use nlform::superpoincare::estimated_rate;
use nlform::fit::log_grid;
use nlform::{KillingPotential, RateFunction, YoungFunction};

fn certified_c(inst: &Instance, n: &YoungFunction) -> f64 {
    let model = FlowModel::new(&inst.space, &inst.kernel, &inst.gamma).unwrap();
    let kappa = kappa_orlicz(&model, n).unwrap().0.to_f64();
    1.0 / (2.0 * n.c_n().unwrap() * kappa)
}

fn killed_rate(inst: &Instance, pot: &KillingPotential, seed: u64) -> RateFunction {
    let spec = Spectral::new(&inst.space, &inst.kernel, Some(pot)).unwrap();
    let lam0 = spec.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    let grid = log_grid(1e-3, 4.0 / lam0, 40);
    estimated_rate(&inst.space, &inst.kernel, Some(pot), &grid, 1.01, seed).unwrap()
}

fn opts(gamma: bool, killing: bool) -> GenerateOptions {
    GenerateOptions { random_gamma: gamma, killing, ..Default::default() }
}

#[test]
fn thm41_then_thm42_chain() {
    for seed in 0..8 {
        let inst = random_instance(&opts(seed % 2 == 0, false), seed);
        let n = YoungFunction::power(2.0);
        let c = certified_c(&inst, &n);
        let fam = vanishing_functions(inst.len(), 60, seed);
        let r41 = thm41(&n, c, &inst.space, &inst.kernel, &inst.gamma, &fam, 1e-9).unwrap();
        assert!(r41.pass, "seed {seed}: {}", r41.to_json());
        let beta1: RateFunction = serde_json::from_value(r41.derived["beta_1"].clone()).unwrap();
        let r42 = thm42(&beta1, &inst.space, &inst.kernel, &inst.gamma, &fam, 1e-9).unwrap();
        assert!(r42.pass, "seed {seed}: {}", r42.to_json());
    }
}

#[test]
fn killed_forward_and_converse() {
    for seed in 0..6 {
        let inst = random_instance(&opts(seed % 2 == 1, true), 100 + seed);
        let pot = inst.potential.clone().unwrap();
        let beta = killed_rate(&inst, &pot, seed);
        let fam = random_functions(inst.len(), 60, seed);
        let r = thm43(&inst.space, &inst.kernel, &pot, &inst.gamma, &beta, &fam, 1e-9).unwrap();
        assert!(r.hypotheses_hold, "{:?}", r.notes);
        assert!(r.pass, "seed {seed}: {}", serde_json::to_string(&r.reports).unwrap());
        assert!(r.empirical_constant.unwrap() <= C_STAR);
    }
}

#[test]
fn lemma1_on_random_instances() {
    for seed in 0..6 {
        let inst = random_instance(&opts(true, false), 200 + seed);
        let fam = vanishing_functions(inst.len(), 50, seed);
        let g = |s: f64| s * s;
        for f in &fam {
            let c = lemma1_core(&inst.space, &inst.kernel, &inst.gamma, &g, f).unwrap();
            assert!(c.lhs <= c.rhs * (1.0 + 1e-9) + 1e-12, "{c:?}");
        }
        let (_, rep) = lemma1_sobolev(&inst.space, &inst.kernel, &inst.gamma, &fam, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
        let total = inst.space.total_mass();
        let all = random_functions(inst.len(), 50, seed);
        for s in [0.3 * total, total] {
            let rep = lemma1_poincare(&inst.space, &inst.kernel, &inst.gamma, s, &all, 1e-9).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}

#[test]
fn cor41_all_cases_round_trip() {
    let cases = [
        (Cor41Case::MinPower, 1.5, 3.0),
        (Cor41Case::MaxPower, 1.5, 3.0),
        (Cor41Case::LogSmall, 2.0, 1.0),
        (Cor41Case::LogLarge, 2.0, 1.0),
    ];
    for (case, a, b) in cases {
        let pair = cor41_pair(case, a, b).unwrap();
        let rt = cor41_round_trip(&pair, 1.0, (1e-150, 1e150), 1e-3).unwrap();
        println!("{rt:?}");
        assert!(rt.pass, "{rt:?}");
        assert!(rt.young_ratio.1 / rt.young_ratio.0 < 1e3);
    }
}
