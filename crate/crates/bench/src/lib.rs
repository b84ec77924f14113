//! Fixtures shared by the benchmarks.

use nlform::instance::{random_functions, random_instance, GenerateOptions, Instance};

/// Connected instance with exactly `m` points.
pub fn instance(m: usize, seed: u64) -> Instance {
    random_instance(&GenerateOptions { m_min: m, m_max: m, ..Default::default() }, seed)
}

pub fn functions(m: usize, count: usize) -> Vec<Vec<f64>> {
    random_functions(m, count, 1)
}
