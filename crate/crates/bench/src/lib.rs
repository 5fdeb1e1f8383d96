//! Shared fixtures for the criterion benchmarks.

use esdg::experiments::{setup, Problem, RunConfig, Setup};
use esdg::{Conserved, FluxState, Gas, NodeFamily, Primitive};

/// 2D vortex problem at degree `n` on a `kx x ky` mesh.
pub fn vortex2d(n: usize, family: NodeFamily, elems: [usize; 2]) -> Setup<2> {
    let cfg = RunConfig { degree: n, family, elems: elems.to_vec(), ..RunConfig::preset(Problem::Vortex2d) };
    setup::<2>(&cfg).expect("valid benchmark configuration")
}

/// Taylor-Green problem at degree `n` on `k^3` elements.
pub fn taylor_green(n: usize, family: NodeFamily, k: usize) -> Setup<3> {
    let cfg = RunConfig { degree: n, family, elems: vec![k; 3], ..RunConfig::preset(Problem::TaylorGreen) };
    setup::<3>(&cfg).expect("valid benchmark configuration")
}

/// Deterministic admissible flux states spread over moderate densities and velocities.
pub fn flux_states(gas: &Gas, count: usize) -> Vec<FluxState<3>> {
    (0..count)
        .map(|i| {
            let s = i as f64 / count as f64;
            let w = Primitive { rho: 0.5 + s, vel: [s - 0.5, 0.3 * s, -0.2], p: 1.0 + 0.5 * s * s };
            gas.flux_state_from_primitive(&w)
        })
        .collect()
}

pub fn zero_like<const D: usize>(u: &[Conserved<D>]) -> Vec<Conserved<D>> {
    vec![Conserved::zero(); u.len()]
}
