//! Central finite differences over the full ranker.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smoothrank::ranker::{backward, forward, init_params, ModelParams};
use smoothrank::smoothing::{cross_entropy, TargetDistribution};

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-5;

fn loss(p: &ModelParams, x: &[f64], t: &TargetDistribution) -> f64 {
    cross_entropy(t, forward(p, x).unwrap().0).unwrap()
}

fn near_kink(p: &ModelParams, x: &[f64]) -> bool {
    let h = p.hidden_dim();
    (0..h).any(|j| {
        let pre = p.b1[j] + x.iter().enumerate().map(|(i, xi)| xi * p.w1[i * h + j]).sum::<f64>();
        pre.abs() < 1e-3
    })
}

pub fn random_case(rng: &mut ChaCha8Rng, d: usize, h: usize) -> (ModelParams, Vec<f64>, TargetDistribution) {
    loop {
        let mut p = init_params(rng.gen(), d, h).unwrap();
        for b in p.b1.iter_mut().chain(p.b2.iter_mut()) {
            *b = rng.gen_range(-0.5..0.5);
        }
        let x: Vec<f64> = (0..d)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let r: f64 = rng.gen();
        let t = TargetDistribution { p_nonrel: 1.0 - r, p_rel: r };
        if !near_kink(&p, &x) {
            return (p, x, t);
        }
    }
}

/// Max relative error over the listed flat coordinates.
pub fn check(p: &ModelParams, x: &[f64], t: &TargetDistribution, coords: &[usize]) -> f64 {
    let (_, hidden) = forward(p, x).unwrap();
    let g = backward(p, x, &hidden, t).unwrap();
    let analytic: Vec<f64> = g.iter().copied().collect();
    let mut worst = 0.0f64;
    for &c in coords {
        let mut plus = p.clone();
        *plus.iter_mut().nth(c).unwrap() += H;
        let mut minus = p.clone();
        *minus.iter_mut().nth(c).unwrap() -= H;
        let numeric = (loss(&plus, x, t) - loss(&minus, x, t)) / (2.0 * H);
        let a = analytic[c];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
        worst = worst.max(rel);
    }
    worst
}

pub fn max_relative_error(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let d = rng.gen_range(2..8);
        let h = rng.gen_range(1..6);
        let (p, x, t) = random_case(&mut rng, d, h);
        let all: Vec<usize> = (0..p.num_params()).collect();
        worst = worst.max(check(&p, &x, &t, &all));
    }
    worst
}
