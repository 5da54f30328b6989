use rand::distributions::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::seed::rng;
use crate::smoothing::{ce_gradient, TargetDistribution};

pub const DEFAULT_HIDDEN: usize = 64;

/// Weights of `logits = W2ᵀ relu(W1ᵀ x + b1) + b2`.
///
/// `w1` is `d × h` and `w2` is `h × 2`, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    d: usize,
    h: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(d: usize, h: usize) -> Self {
        Self {
            d,
            h,
            w1: vec![0.0; d * h],
            b1: vec![0.0; h],
            w2: vec![0.0; h * 2],
            b2: vec![0.0; 2],
        }
    }

    pub(crate) fn from_parts(d: usize, h: usize, flat: &[f64]) -> Self {
        let mut p = Self::zeros(d, h);
        let mut offset = 0;
        for t in p.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn hidden_dim(&self) -> usize {
        self.h
    }

    pub fn num_params(&self) -> usize {
        Self::count(self.d, self.h)
    }

    pub fn count(d: usize, h: usize) -> usize {
        d * h + h + h * 2 + 2
    }

    /// Tensors in storage order: `w1, b1, w2, b2`.
    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.tensors().into_iter().flatten()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.tensors_mut().into_iter().flatten()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.d == other.d && self.h == other.h
    }

    pub fn fill(&mut self, value: f64) {
        self.iter_mut().for_each(|x| *x = value);
    }

    /// `self += scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += scale * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

/// Xavier-uniform weights from a seeded generator, zero biases.
pub fn init_params(seed: u64, d: usize, h: usize) -> Result<ModelParams> {
    if d == 0 || h == 0 {
        return Err(Error::InvalidArgument(format!("model dims must be positive, got {d}x{h}")));
    }
    let mut rng = rng(seed);
    let mut p = ModelParams::zeros(d, h);
    let a1 = (6.0 / (d + h) as f64).sqrt();
    let a2 = (6.0 / (h + 2) as f64).sqrt();
    let u1 = Uniform::new(-a1, a1);
    let u2 = Uniform::new(-a2, a2);
    p.w1.iter_mut().for_each(|w| *w = u1.sample(&mut rng));
    p.w2.iter_mut().for_each(|w| *w = u2.sample(&mut rng));
    Ok(p)
}

/// Returns the logits and the post-activation hidden layer.
pub fn forward(params: &ModelParams, features: &[f64]) -> Result<([f64; 2], Vec<f64>)> {
    if features.len() != params.d {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} features, got {}",
            params.d,
            features.len()
        )));
    }
    let h = params.h;
    let mut hidden = params.b1.clone();
    for (x, row) in features.iter().zip(params.w1.chunks_exact(h)) {
        if *x == 0.0 {
            continue;
        }
        for (acc, w) in hidden.iter_mut().zip(row) {
            *acc += x * w;
        }
    }
    hidden.iter_mut().for_each(|a| *a = a.max(0.0));
    let mut logits = [params.b2[0], params.b2[1]];
    for (hj, row) in hidden.iter().zip(params.w2.chunks_exact(2)) {
        logits[0] += hj * row[0];
        logits[1] += hj * row[1];
    }
    Ok((logits, hidden))
}

/// Accumulates `scale * d(loss)/d(params)` into `grads` for one example.
/// `hidden` and `logits` must come from [`forward`] on the same input.
pub(crate) fn accumulate_gradients(
    params: &ModelParams,
    features: &[f64],
    hidden: &[f64],
    logits: [f64; 2],
    target: &TargetDistribution,
    scale: f64,
    grads: &mut ModelParams,
) {
    let h = params.h;
    let dz = ce_gradient(target, logits);
    let dz = [scale * dz[0], scale * dz[1]];
    grads.b2[0] += dz[0];
    grads.b2[1] += dz[1];
    let mut dpre = vec![0.0; h];
    for j in 0..h {
        grads.w2[2 * j] += hidden[j] * dz[0];
        grads.w2[2 * j + 1] += hidden[j] * dz[1];
        // relu'(0) = 0
        if hidden[j] > 0.0 {
            dpre[j] = params.w2[2 * j] * dz[0] + params.w2[2 * j + 1] * dz[1];
        }
    }
    for (g, d) in grads.b1.iter_mut().zip(&dpre) {
        *g += d;
    }
    for (x, row) in features.iter().zip(grads.w1.chunks_exact_mut(h)) {
        if *x == 0.0 {
            continue;
        }
        for (g, d) in row.iter_mut().zip(&dpre) {
            *g += x * d;
        }
    }
}

/// Exact gradients of the cross-entropy between `target` and the logits of
/// `features`, given the `hidden` layer from the matching forward pass.
pub fn backward(
    params: &ModelParams,
    features: &[f64],
    hidden: &[f64],
    target: &TargetDistribution,
) -> Result<ModelParams> {
    if features.len() != params.d || hidden.len() != params.h {
        return Err(Error::ShapeMismatch("backward inputs do not match the model".into()));
    }
    let mut logits = [params.b2[0], params.b2[1]];
    for (hj, row) in hidden.iter().zip(params.w2.chunks_exact(2)) {
        logits[0] += hj * row[0];
        logits[1] += hj * row[1];
    }
    let mut grads = ModelParams::zeros(params.d, params.h);
    accumulate_gradients(params, features, hidden, logits, target, 1.0, &mut grads);
    Ok(grads)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::smoothing::{hard_target, softmax};
    use rand::Rng;

    #[test]
    fn zero_params_give_zero_logits() {
        let p = ModelParams::zeros(5, 3);
        let (z, _) = forward(&p, &[1.0, -2.0, 0.5, 3.0, 0.0]).unwrap();
        assert_eq!(z, [0.0, 0.0]);
    }

    #[test]
    fn zero_features_pass_bias_through() {
        let mut p = init_params(1, 4, 3).unwrap();
        p.b1 = vec![0.5, 1.0, 2.0];
        p.b2 = vec![0.1, -0.2];
        let (z, hidden) = forward(&p, &[0.0; 4]).unwrap();
        assert_eq!(hidden, p.b1);
        let expected0 = 0.1 + 0.5 * p.w2[0] + 1.0 * p.w2[2] + 2.0 * p.w2[4];
        let expected1 = -0.2 + 0.5 * p.w2[1] + 1.0 * p.w2[3] + 2.0 * p.w2[5];
        assert!((z[0] - expected0).abs() < 1e-15 && (z[1] - expected1).abs() < 1e-15);
    }

    #[test]
    fn forward_matches_matrix_oracle() {
        let mut r = rng(99);
        let mut p = init_params(3, 7, 5).unwrap();
        p.b1.iter_mut().for_each(|b| *b = r.gen_range(-0.5..0.5));
        p.b2.iter_mut().for_each(|b| *b = r.gen_range(-0.5..0.5));
        let x: Vec<f64> = (0..7).map(|_| r.gen_range(-1.0..1.0)).collect();
        // Column-at-a-time evaluation, independent of the row-major loop.
        let mut hidden = [0.0; 5];
        for j in 0..5 {
            let col: f64 = (0..7).map(|i| p.w1[i * 5 + j] * x[i]).sum();
            hidden[j] = (col + p.b1[j]).max(0.0);
        }
        let z: Vec<f64> = (0..2)
            .map(|k| (0..5).map(|j| p.w2[j * 2 + k] * hidden[j]).sum::<f64>() + p.b2[k])
            .collect();
        let (logits, h) = forward(&p, &x).unwrap();
        for j in 0..5 {
            assert!((h[j] - hidden[j]).abs() < 1e-12);
        }
        assert!((logits[0] - z[0]).abs() < 1e-12 && (logits[1] - z[1]).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let p = ModelParams::zeros(3, 2);
        assert!(matches!(forward(&p, &[1.0]), Err(Error::ShapeMismatch(_))));
        assert!(backward(&p, &[1.0, 2.0, 3.0], &[0.0], &hard_target(1).unwrap()).is_err());
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        let p = init_params(4, 6, 4).unwrap();
        let x = [0.3, -0.1, 0.9, 0.0, 0.2, 1.0];
        let (z, hidden) = forward(&p, &x).unwrap();
        let s = softmax(z);
        let t = TargetDistribution { p_nonrel: s[0], p_rel: s[1] };
        let g = backward(&p, &x, &hidden, &t).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn output_layer_gradient_closed_form() {
        let p = init_params(8, 4, 4).unwrap();
        let x = [1.0, 0.5, -0.5, 0.25];
        let (z, hidden) = forward(&p, &x).unwrap();
        let t = hard_target(1).unwrap();
        let g = backward(&p, &x, &hidden, &t).unwrap();
        let s = softmax(z);
        let dz = [s[0] - t.p_nonrel, s[1] - t.p_rel];
        for j in 0..4 {
            for k in 0..2 {
                assert_eq!(g.w2[j * 2 + k], hidden[j] * dz[k]);
            }
        }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_params(7, 262, 64).unwrap();
        let b = init_params(7, 262, 64).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_params(8, 262, 64).unwrap());
        assert!(a.b1.iter().chain(&a.b2).all(|&x| x == 0.0));
        let a1 = (6.0f64 / (262.0 + 64.0)).sqrt();
        let a2 = (6.0f64 / 66.0).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= a1));
        assert!(a.w2.iter().all(|w| w.abs() <= a2));
        assert!(init_params(1, 0, 3).is_err());
    }
}
