#![allow(dead_code)]

use gfid_core::dst::ObservationSet;
use gfid_core::filters::{apply_filter, generate_input, FilterBank, FilterRule, IncrementBank, InputKind};
use gfid_core::graph::{generate_graph, GraphModel};
use gfid_core::noise::{corrupt, NoiseSpec};
use gfid_core::spectral::{eigendecompose, spectral_support, SpectralBasis, SpectralSupport};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub basis: SpectralBasis,
    pub bank: FilterBank,
    pub x: DVector<f64>,
    pub support: SpectralSupport,
    pub obs: ObservationSet,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn observe(
    bank: &FilterBank,
    basis: &SpectralBasis,
    x: &DVector<f64>,
    sigma: f64,
    r: &mut ChaCha8Rng,
) -> ObservationSet {
    let ys: Vec<_> = bank.filters().iter().map(|f| apply_filter(f, basis, x).unwrap()).collect();
    let ys = corrupt(&ys, NoiseSpec::new(sigma).unwrap(), r).unwrap();
    ObservationSet::new(ys, basis).unwrap()
}

pub fn multi(model: &GraphModel, rule: &FilterRule, input: InputKind, sigma: f64, seed: u64) -> Instance {
    let mut r = rng(seed);
    let basis = eigendecompose(&generate_graph(model, &mut r).unwrap()).unwrap();
    let bank = rule.generate_bank(&mut r).unwrap();
    let (x, x_hat) = generate_input(input, &basis, &mut r).unwrap();
    let support = spectral_support(&x_hat, &basis, None, None).unwrap();
    let obs = observe(&bank, &basis, &x, sigma, &mut r);
    Instance { basis, bank, x, support, obs }
}

pub struct SingleInstance {
    pub basis: SpectralBasis,
    pub inc: IncrementBank,
    pub support: SpectralSupport,
    pub obs: ObservationSet,
}

pub fn single(model: &GraphModel, rule: &FilterRule, input: InputKind, sigma: f64, seed: u64) -> SingleInstance {
    let mut r = rng(seed);
    let basis = eigendecompose(&generate_graph(model, &mut r).unwrap()).unwrap();
    let inc = rule.generate_increments(&mut r).unwrap();
    let (x, x_hat) = generate_input(input, &basis, &mut r).unwrap();
    let support = spectral_support(&x_hat, &basis, None, None).unwrap();
    let obs = observe(&inc.to_filter_bank(), &basis, &x, sigma, &mut r);
    SingleInstance { basis, inc, support, obs }
}
