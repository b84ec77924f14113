//! JSON instances, seeded random instances and test-function families.

use crate::error::{check_len, Error, Result};
use crate::measure::{FiniteMeasureSpace, JumpKernel, KillingPotential, WeightFunction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Serialized form `{"mu", "j", "v", "gamma", "xi"}`; matrices row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub mu: Vec<f64>,
    pub j: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
}

/// Validated model.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: FiniteMeasureSpace,
    pub kernel: JumpKernel,
    pub gamma: WeightFunction,
    pub potential: Option<KillingPotential>,
}

impl Instance {
    pub fn from_doc(doc: &InstanceDoc) -> Result<Self> {
        let space = FiniteMeasureSpace::new(doc.mu.clone())?;
        let m = space.len();
        check_len(m, doc.j.len())?;
        let kernel = JumpKernel::from_rows(&doc.j)?;
        let gamma = match &doc.gamma {
            Some(g) => {
                check_len(m, g.len())?;
                WeightFunction::from_rows(g)?
            }
            None => WeightFunction::ones(m),
        };
        let potential = match &doc.v {
            Some(v) => {
                check_len(m, v.len())?;
                let xi = doc.xi.clone().unwrap_or_else(|| vec![1.0; m]);
                Some(KillingPotential::new(v.clone(), xi)?)
            }
            None => None,
        };
        Ok(Self { space, kernel, gamma, potential })
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, String> {
        let doc: InstanceDoc = serde_json::from_str(s).map_err(|e| e.to_string())?;
        Self::from_doc(&doc).map_err(|e| e.to_string())
    }

    pub fn to_doc(&self) -> InstanceDoc {
        let m = self.space.len();
        let rows = |f: &dyn Fn(usize, usize) -> f64| (0..m).map(|i| (0..m).map(|k| f(i, k)).collect()).collect();
        InstanceDoc {
            mu: self.space.mu().to_vec(),
            j: rows(&|i, k| self.kernel.get(i, k)),
            v: self.potential.as_ref().map(|p| p.v.clone()),
            gamma: Some(rows(&|i, k| self.gamma.get(i, k))),
            xi: self.potential.as_ref().map(|p| p.xi.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }
}

/// Parameters for seeded random connected instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateOptions {
    pub m_min: usize,
    pub m_max: usize,
    /// Probability of each non-tree edge.
    pub density: f64,
    /// Log-uniform range for masses.
    pub mass_range: (f64, f64),
    /// Log-uniform range for jump densities.
    pub jump_range: (f64, f64),
    /// Draw a non-constant weight `γ` in `[0.5, 2]`.
    pub random_gamma: bool,
    /// Add a killing rate at a few points.
    pub killing: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            m_min: 3,
            m_max: 10,
            density: 0.3,
            mass_range: (0.1, 10.0),
            jump_range: (0.1, 10.0),
            random_gamma: false,
            killing: false,
        }
    }
}

impl GenerateOptions {
    pub fn validate(&self) -> Result<()> {
        let range = |(a, b): (f64, f64)| a > 0.0 && a <= b && b.is_finite();
        let bad = |msg: &str| Err(Error::Invalid(msg.into()));
        if !(2 <= self.m_min && self.m_min <= self.m_max && self.m_max <= 20) {
            return bad("need 2 <= m_min <= m_max <= 20");
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must lie in [0, 1]");
        }
        if !range(self.mass_range) || !range(self.jump_range) {
            return bad("mass_range and jump_range need 0 < low <= high < inf");
        }
        Ok(())
    }
}

fn log_uniform(rng: &mut impl Rng, (a, b): (f64, f64)) -> f64 {
    (rng.gen_range(a.ln()..=b.ln())).exp()
}

/// Connected instance: a random spanning tree plus independent extra edges.
pub fn random_instance(opts: &GenerateOptions, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(opts.m_min..=opts.m_max);
    let mu: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng, opts.mass_range)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let mut j = vec![vec![0.0; m]; m];
    for t in 1..m {
        let a = order[t];
        let b = order[rng.gen_range(0..t)];
        let w = log_uniform(&mut rng, opts.jump_range);
        j[a][b] = w;
        j[b][a] = w;
    }
    for i in 0..m {
        for k in (i + 1)..m {
            if j[i][k] == 0.0 && rng.gen_bool(opts.density) {
                let w = log_uniform(&mut rng, opts.jump_range);
                j[i][k] = w;
                j[k][i] = w;
            }
        }
    }
    let mut g = vec![vec![1.0; m]; m];
    if opts.random_gamma {
        for i in 0..m {
            for k in (i + 1)..m {
                let w = log_uniform(&mut rng, (0.5, 2.0));
                g[i][k] = w;
                g[k][i] = w;
            }
        }
    }
    let potential = opts.killing.then(|| {
        let mut v = vec![0.0; m];
        let hits = rng.gen_range(1..=m.div_ceil(2));
        for _ in 0..hits {
            v[rng.gen_range(0..m)] = log_uniform(&mut rng, (0.1, 5.0));
        }
        let xi = (0..m).map(|_| log_uniform(&mut rng, (0.5, 2.0))).collect();
        KillingPotential { v, xi }
    });
    Instance {
        space: FiniteMeasureSpace::new(mu).expect("positive masses"),
        kernel: JumpKernel::from_rows(&j).expect("symmetric by construction"),
        gamma: WeightFunction::from_rows(&g).expect("positive weights"),
        potential,
    }
}

/// Indicators of every nonempty proper subset (`m ≤ 20`).
pub fn indicators(m: usize) -> Vec<Vec<f64>> {
    assert!(m <= 20, "indicator family limited to 20 points");
    (1u64..(1u64 << m) - 1).map(|mask| (0..m).map(|i| (mask >> i & 1) as f64).collect()).collect()
}

/// Mixed random functions: uniform, sparse, spiky and two-valued shapes.
pub fn random_functions(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut f: Vec<f64> = match i % 4 {
                0 => (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                1 => (0..m).map(|_| if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-3.0..3.0) }).collect(),
                2 => {
                    let mut f: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.1..0.1)).collect();
                    f[rng.gen_range(0..m)] = rng.gen_range(1.0..10.0);
                    f
                }
                _ => {
                    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    (0..m).map(|_| if rng.gen_bool(0.5) { a } else { b }).collect()
                }
            };
            let scale = (rng.gen_range(-3.0f64..3.0)).exp();
            f.iter_mut().for_each(|x| *x *= scale);
            f
        })
        .collect()
}

/// Random functions that vanish at one or more points.
pub fn vanishing_functions(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    random_functions(m, count, seed)
        .into_iter()
        .map(|mut f| {
            f[rng.gen_range(0..m)] = 0.0;
            f
        })
        .collect()
}

/// Nonnegative random functions.
pub fn nonneg_functions(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    random_functions(m, count, seed).into_iter().map(|f| f.into_iter().map(f64::abs).collect()).collect()
}
