use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::codec::hex_f64s;
use crate::error::{Error, Result};
use crate::maze::{Action, Controller, OBS_DIM};
use crate::runtime::seed::Seed;

/// Fully connected network shape: tanh hidden layers, linear logits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arch {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl Arch {
    /// The maze agent: observation in, one logit per move out.
    pub fn agent() -> Self {
        Arch {
            input_dim: OBS_DIM,
            hidden: vec![32],
            output_dim: Action::ALL.len(),
        }
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let dims: Vec<usize> = std::iter::once(self.input_dim)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.output_dim))
            .collect();
        (0..dims.len() - 1).map(move |i| (dims[i], dims[i + 1]))
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(|(i, o)| i * o + o).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::Config(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }
}

/// Flat weight vector of an [`Arch`]; each layer stores its row-major
/// `out x in` matrix followed by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    pub arch: Arch,
    #[serde(with = "hex_f64s")]
    weights: Vec<f64>,
}

impl PolicyParams {
    pub fn new(arch: Arch, weights: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        if weights.len() != arch.param_count() {
            return Err(Error::DimensionMismatch {
                expected: arch.param_count(),
                got: weights.len(),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Config(format!("non-finite weight {bad}")));
        }
        Ok(PolicyParams { arch, weights })
    }

    pub fn zeros(arch: Arch) -> Self {
        let n = arch.param_count();
        PolicyParams {
            arch,
            weights: vec![0.0; n],
        }
    }

    /// Gaussian init with `1/sqrt(fan_in)` scale and zero biases.
    pub fn random(arch: Arch, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let mut weights = Vec::with_capacity(arch.param_count());
        for (fan_in, fan_out) in arch.layers() {
            let normal = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt()).expect("positive scale");
            weights.extend((0..fan_in * fan_out).map(|_| normal.sample(&mut rng)));
            weights.extend(std::iter::repeat_n(0.0, fan_out));
        }
        PolicyParams { arch, weights }
    }

    /// Hand-wired agent that steps along the goal direction.
    ///
    /// Hidden unit 0 reads the x component and unit 1 the y component of the
    /// goal vector; the output layer turns their signs into near-certain
    /// moves. Needs one hidden layer of width two or more.
    pub fn goal_seeker(arch: Arch) -> Result<Self> {
        if arch.hidden.len() != 1 || arch.hidden[0] < 2 || arch.input_dim != OBS_DIM || arch.output_dim != 4 {
            return Err(Error::Config(format!("goal seeker needs a single hidden layer agent, got {arch:?}")));
        }
        const IN_GAIN: f64 = 10.0;
        const OUT_GAIN: f64 = 50.0;
        let hidden = arch.hidden[0];
        let mut p = PolicyParams::zeros(arch);
        let w = &mut p.weights;
        w[OBS_DIM - 2] = IN_GAIN;
        w[OBS_DIM + OBS_DIM - 1] = IN_GAIN;
        let out = OBS_DIM * hidden + hidden;
        let gains = [
            (Action::Up, 1, -OUT_GAIN),
            (Action::Down, 1, OUT_GAIN),
            (Action::Left, 0, -OUT_GAIN),
            (Action::Right, 0, OUT_GAIN),
        ];
        for (action, unit, g) in gains {
            w[out + action.index() * hidden + unit] = g;
        }
        Ok(p)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Same architecture, different weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        PolicyParams::new(self.arch.clone(), weights)
    }

    pub fn logits(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim,
                got: input.len(),
            });
        }
        let mut act = input.to_vec();
        let mut offset = 0;
        let layers: Vec<_> = self.arch.layers().collect();
        for (li, &(fan_in, fan_out)) in layers.iter().enumerate() {
            let mat = &self.weights[offset..offset + fan_in * fan_out];
            let bias = &self.weights[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let last = li + 1 == layers.len();
            let mut next = Vec::with_capacity(fan_out);
            for (row, b) in mat.chunks_exact(fan_in).zip(bias) {
                let mut z = *b;
                for (w, x) in row.iter().zip(&act) {
                    // observations are mostly one-hot zeros
                    if *x != 0.0 {
                        z += w * x;
                    }
                }
                next.push(if last { z } else { z.tanh() });
            }
            act = next;
        }
        Ok(act)
    }

    pub fn probabilities(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(input)?))
    }

    /// Samples an output index from the softmax over the logits.
    pub fn sample(&self, input: &[f64], rng: &mut ChaCha8Rng) -> Result<usize> {
        Ok(sample_index(&self.probabilities(input)?, rng))
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Inverse-CDF draw; falls back to the last index on rounding shortfall.
pub fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples a move from the policy's softmax.
pub fn act(params: &PolicyParams, obs: &[f64], rng: &mut ChaCha8Rng) -> Result<Action> {
    let i = params.sample(obs, rng)?;
    Action::from_index(i).ok_or(Error::DimensionMismatch {
        expected: Action::ALL.len(),
        got: params.arch.output_dim,
    })
}

impl Controller for PolicyParams {
    fn input_dim(&self) -> usize {
        self.arch.input_dim
    }

    fn act(&self, obs: &[f64], rng: &mut ChaCha8Rng) -> Result<Action> {
        if self.arch.output_dim != Action::ALL.len() {
            return Err(Error::DimensionMismatch {
                expected: Action::ALL.len(),
                got: self.arch.output_dim,
            });
        }
        act(self, obs, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn agent_parameter_count() {
        assert_eq!(Arch::agent().param_count(), 52 * 32 + 32 + 32 * 4 + 4);
    }

    #[test]
    fn uniform_and_saturated_softmax() {
        assert_eq!(softmax(&[0.3; 4]), vec![0.25; 4]);
        let p = softmax(&[0.0, 1000.0, 0.0, 0.0]);
        assert_eq!(p[1], 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| sample_index(&p, &mut rng) == 1));
    }

    #[test]
    fn sampling_matches_softmax() {
        let probs = softmax(&[0.5, -1.0, 1.2, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[sample_index(&probs, &mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.02, "{counts:?} vs {probs:?}");
        }
    }

    #[test]
    fn zero_weights_are_uniform() {
        let p = PolicyParams::zeros(Arch::agent());
        let probs = p.probabilities(&vec![1.0; OBS_DIM]).unwrap();
        assert_eq!(probs, vec![0.25; 4]);
    }

    #[test]
    fn dimension_checks() {
        let p = PolicyParams::zeros(Arch::agent());
        assert!(matches!(
            p.logits(&[0.0; 3]),
            Err(Error::DimensionMismatch { expected: 52, got: 3 })
        ));
        assert!(PolicyParams::new(Arch::agent(), vec![0.0; 10]).is_err());
        assert!(PolicyParams::new(Arch::agent(), vec![f64::NAN; Arch::agent().param_count()]).is_err());
    }

    #[test]
    fn goal_seeker_heads_for_goal() {
        let p = PolicyParams::goal_seeker(Arch::agent()).unwrap();
        let mut obs = vec![0.0; OBS_DIM];
        obs[50] = 1.0;
        let probs = p.probabilities(&obs).unwrap();
        assert!(probs[Action::Right.index()] > 0.999_999);
        obs[50] = 0.0;
        obs[51] = -1.0;
        let probs = p.probabilities(&obs).unwrap();
        assert!(probs[Action::Up.index()] > 0.999_999);
    }

    #[test]
    fn serde_keeps_weights_exact() {
        let p = PolicyParams::random(Arch::agent(), Seed(5));
        let text = serde_json::to_string(&p).unwrap();
        let back: PolicyParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }

    proptest! {
        #[test]
        fn softmax_is_a_simplex_point(logits in prop::collection::vec(-50.0f64..50.0, 1..10)) {
            let p = softmax(&logits);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
