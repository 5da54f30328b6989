//! Analytic gradients of the whole ranker (both layers, all biases) against
//! central finite differences.

mod common;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::gradients::{check, max_relative_error, random_case, TOL};
use smoothrank::ranker::FEATURE_DIM;

#[test]
fn hundred_small_models_every_coordinate() {
    let worst = max_relative_error(120, 7);
    assert!(worst <= TOL, "max relative error {worst:e}");
}

#[test]
fn production_shape_sampled_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let (p, x, t) = random_case(&mut rng, FEATURE_DIM, 16);
        let n = p.num_params();
        // Always include the output layer; sample the rest.
        let mut coords: Vec<usize> = (n - 3 * 16 - 2..n).collect();
        coords.extend((0..150).map(|_| rng.gen_range(0..n)));
        let worst = check(&p, &x, &t, &coords);
        assert!(worst <= TOL, "max relative error {worst:e}");
    }
}
