#![allow(dead_code)]

use aelim_core::liouville::{steady_state, BipartiteLindblad, BipartiteSpace, DensityVec, LindbladModel};
use aelim_core::numkernel::ComplexMatrix;
use aelim_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let m = random_matrix(rng, d, d);
    (&m + &m.adjoint()).scale_real(0.5)
}

pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityVec {
    let m = random_matrix(rng, d, d);
    let rho = &m * &m.adjoint();
    let tr = rho.trace();
    DensityVec::from_matrix(&rho.scale(C64::new(1.0, 0.0) / tr)).unwrap()
}

/// Random Hamiltonian of norm ~`h` plus `jumps` random jump operators
/// with rates in `[rate/2, rate]`.
pub fn random_lindblad(rng: &mut ChaCha8Rng, d: usize, h: f64, jumps: usize, rate: f64) -> LindbladModel {
    let ham = random_hermitian(rng, d).scale_real(h);
    let js = (0..jumps)
        .map(|_| (random_matrix(rng, d, d), rng.gen_range(rate / 2.0..=rate)))
        .collect();
    LindbladModel::new(ham, js).unwrap()
}

/// Slow `A` (rates ~`slow`), fast dissipative `B`, Hamiltonian coupling of
/// strength `coupling`. Returns the model and the steady state of `B`.
pub fn random_bipartite(
    rng: &mut ChaCha8Rng,
    da: usize,
    db: usize,
    slow: f64,
    coupling: f64,
) -> (BipartiteLindblad, DensityVec) {
    let space = BipartiteSpace::new(da, db).unwrap();
    let ma = random_lindblad(rng, da, slow, 1, slow);
    let mb = random_lindblad(rng, db, 1.0, 2, 1.0);
    let mc = LindbladModel::hamiltonian_only(random_hermitian(rng, da * db).scale_real(coupling)).unwrap();
    let bl = BipartiteLindblad::from_models(space, &ma, &mb, &mc).unwrap();
    let rho_b = steady_state(bl.local_b()).unwrap().unique().unwrap();
    (bl, rho_b)
}
