//! One-hidden-layer policy network with a masked softmax head.
//!
//! `h = relu(W1 x + b1)`, `logits = W2 h + b2`. Actions outside the mask are
//! left out of the softmax normalization entirely, so they get probability
//! exactly zero and receive no gradient. All arithmetic is `f64`.

mod adam;
mod checkpoint;
mod grad;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, ModelConfig, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use grad::{policy_gradient, StepSample};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl NetDims {
    /// Input `L + A`, hidden `n * (L + A)`, output `A`.
    pub fn for_braids(strands: usize, slots: usize, actions: usize) -> Self {
        let input = slots + actions;
        Self {
            input,
            hidden: strands * input,
            output: actions,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.hidden == 0 || self.output == 0 {
            return Err(Error::InvalidDims(format!(
                "zero-sized layer in {}x{}x{}",
                self.input, self.hidden, self.output
            )));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden * self.input + self.hidden + self.output * self.hidden + self.output
    }
}

/// Weights and biases; also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// `hidden x input`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `output x hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Params {
    pub fn zeros(dims: NetDims) -> Self {
        Self {
            w1: vec![0.0; dims.hidden * dims.input],
            b1: vec![0.0; dims.hidden],
            w2: vec![0.0; dims.output * dims.hidden],
            b2: vec![0.0; dims.output],
        }
    }

    pub(crate) fn tensors(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
    }

    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.iter_mut() {
            *a *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    dims: NetDims,
    params: Params,
}

impl PolicyNet {
    /// Uniform(-b, b) weights with `b = sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(dims: NetDims, seed: u64) -> Result<Self> {
        dims.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            (0..fan_in * fan_out)
                .map(|_| dist.sample(&mut rng))
                .collect()
        };
        let w1 = layer(dims.input, dims.hidden);
        let w2 = layer(dims.hidden, dims.output);
        Ok(Self {
            dims,
            params: Params {
                w1,
                b1: vec![0.0; dims.hidden],
                w2,
                b2: vec![0.0; dims.output],
            },
        })
    }

    pub fn from_params(dims: NetDims, params: Params) -> Result<Self> {
        dims.validate()?;
        let expected = Params::zeros(dims);
        for ((name, a), (_, b)) in params.tensors().iter().zip(expected.tensors().iter()) {
            if a.len() != b.len() {
                return Err(Error::InvalidDims(format!(
                    "{name} has {} entries, expected {}",
                    a.len(),
                    b.len()
                )));
            }
        }
        Ok(Self { dims, params })
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Hidden activations after the relu.
    pub(crate) fn hidden(&self, x: &[f64], out: &mut Vec<f64>) {
        let d = self.dims;
        // Most inputs are zero (the mask block), so only nonzero columns are summed.
        let nonzero: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
        out.clear();
        out.extend(
            self.params
                .w1
                .chunks_exact(d.input)
                .zip(&self.params.b1)
                .map(|(row, b)| {
                    let z = b + nonzero.iter().map(|&j| row[j] * x[j]).sum::<f64>();
                    z.max(0.0)
                }),
        );
    }

    pub(crate) fn logit(&self, h: &[f64], k: usize) -> f64 {
        let d = self.dims;
        self.params.b2[k] + dot(&self.params.w2[k * d.hidden..(k + 1) * d.hidden], h)
    }

    fn check_inputs(&self, x: &[f64], mask: &[bool]) -> Result<()> {
        if x.len() != self.dims.input {
            return Err(Error::InputSize {
                expected: self.dims.input,
                got: x.len(),
            });
        }
        if mask.len() != self.dims.output {
            return Err(Error::MaskLength {
                expected: self.dims.output,
                got: mask.len(),
            });
        }
        if !mask.contains(&true) {
            return Err(Error::NoLegalMove);
        }
        Ok(())
    }

    /// Raw logits; masked entries are `-inf`.
    pub fn logits(&self, x: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
        self.check_inputs(x, mask)?;
        let mut h = Vec::with_capacity(self.dims.hidden);
        self.hidden(x, &mut h);
        Ok(mask
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                if m {
                    self.logit(&h, k)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect())
    }

    /// Masked softmax over the output layer.
    pub fn forward(&self, x: &[f64], mask: &[bool]) -> Result<ActionDistribution> {
        let logits = self.logits(x, mask)?;
        Ok(ActionDistribution::from_logits(&logits, mask))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax restricted to valid entries; invalid entries hold exactly `0.0`.
pub(crate) fn masked_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&z, _)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&z, &m)| if m { (z - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    probs
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
    mask: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    Sample,
    Greedy,
}

impl ActionDistribution {
    pub fn from_logits(logits: &[f64], mask: &[bool]) -> Self {
        Self {
            probs: masked_softmax(logits, mask),
            mask: mask.to_vec(),
        }
    }

    /// Wraps precomputed probabilities; entries outside `mask` are forced to zero.
    pub fn from_probs(mut probs: Vec<f64>, mask: Vec<bool>) -> Self {
        for (p, &m) in probs.iter_mut().zip(&mask) {
            if !m {
                *p = 0.0;
            }
        }
        Self { probs, mask }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Highest-probability valid action, lowest id on ties.
    pub fn greedy(&self) -> usize {
        argmax_valid(&self.probs, &self.mask)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = None;
        for (k, (&p, &m)) in self.probs.iter().zip(&self.mask).enumerate() {
            if !m || p <= 0.0 {
                continue;
            }
            acc += p;
            last = Some(k);
            if u < acc {
                return k;
            }
        }
        // Rounding left `acc` a hair under 1.
        last.unwrap_or_else(|| self.greedy())
    }

    pub fn select<R: Rng + ?Sized>(&self, mode: SelectMode, rng: &mut R) -> usize {
        match mode {
            SelectMode::Greedy => self.greedy(),
            SelectMode::Sample => self.sample(rng),
        }
    }
}

pub(crate) fn argmax_valid(values: &[f64], mask: &[bool]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (k, (&v, &m)) in values.iter().zip(mask).enumerate() {
        if m && best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k).expect("mask has a valid entry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn small() -> PolicyNet {
        PolicyNet::init(
            NetDims {
                input: 6,
                hidden: 8,
                output: 5,
            },
            3,
        )
        .unwrap()
    }

    #[test]
    fn init_shapes_and_determinism() {
        let dims = NetDims::for_braids(4, 12, 60);
        assert_eq!(
            dims,
            NetDims {
                input: 72,
                hidden: 288,
                output: 60
            }
        );
        let a = PolicyNet::init(dims, 11).unwrap();
        assert_eq!(a.params().w1.len(), 288 * 72);
        assert_eq!(a, PolicyNet::init(dims, 11).unwrap());
        assert_ne!(a, PolicyNet::init(dims, 12).unwrap());
        assert!(a
            .params()
            .b1
            .iter()
            .chain(&a.params().b2)
            .all(|&b| b == 0.0));
        let bound = (6.0f64 / (72.0 + 288.0)).sqrt();
        assert!(a.params().w1.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn zero_sized_layers_rejected() {
        assert!(PolicyNet::init(
            NetDims {
                input: 0,
                hidden: 3,
                output: 2
            },
            0
        )
        .is_err());
    }

    #[test]
    fn single_valid_action_is_certain() {
        let net = small();
        let mask = [false, false, true, false, false];
        let d = net
            .forward(&[0.3, -1.0, 0.0, 1.0, 1.0, 0.0], &mask)
            .unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(d.select(SelectMode::Sample, &mut rng), 2);
        }
    }

    #[test]
    fn zero_weights_give_uniform_over_valid() {
        let dims = NetDims {
            input: 6,
            hidden: 8,
            output: 5,
        };
        let net = PolicyNet::from_params(dims, Params::zeros(dims)).unwrap();
        let mask = [true, false, true, true, false];
        let d = net.forward(&[1.0; 6], &mask).unwrap();
        for (k, &p) in d.probs().iter().enumerate() {
            let want = if mask[k] { 1.0 / 3.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let mask = [true, true, false, true];
        let z = [0.5, -2.0, 9.0, 3.0];
        let shifted: Vec<f64> = z.iter().map(|v| v + 123.0).collect();
        let a = masked_softmax(&z, &mask);
        let b = masked_softmax(&shifted, &mask);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let net = small();
        assert!(matches!(
            net.forward(&[0.0; 6], &[false; 5]),
            Err(Error::NoLegalMove)
        ));
        assert!(matches!(
            net.forward(&[0.0; 5], &[true; 5]),
            Err(Error::InputSize { .. })
        ));
    }

    #[test]
    fn greedy_selection() {
        let mask = vec![false, true, true, false];
        let d = ActionDistribution::from_probs(vec![0.0, 0.7, 0.3, 0.0], mask.clone());
        assert_eq!(d.greedy(), 1);
        let d = ActionDistribution::from_probs(vec![0.0, 0.5, 0.5, 0.0], mask);
        assert_eq!(d.greedy(), 1);
    }

    #[test]
    fn sampling_follows_probabilities() {
        let d = ActionDistribution::from_probs(vec![0.0, 0.75, 0.25], vec![false, true, true]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let ones = (0..n).filter(|_| d.sample(&mut rng) == 1).count();
        let frac = ones as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.02, "{frac}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn case() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
            (1usize..12).prop_flat_map(|n| {
                (
                    prop::collection::vec(-50.0f64..50.0, n),
                    prop::collection::vec(any::<bool>(), n),
                )
                    .prop_filter("needs a valid entry", |(_, m)| m.contains(&true))
            })
        }

        proptest! {
            #[test]
            fn masked_probabilities_are_normalized((z, m) in case()) {
                let p = masked_softmax(&z, &m);
                let total: f64 = p.iter().zip(&m).filter(|(_, &v)| v).map(|(x, _)| x).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                for (x, &v) in p.iter().zip(&m) {
                    prop_assert!(*x >= 0.0);
                    if !v { prop_assert_eq!(*x, 0.0); }
                }
            }

            #[test]
            fn greedy_ignores_affine_rescaling((z, m) in case(), scale in 0.01f64..100.0, shift in -100.0f64..100.0) {
                let base = argmax_valid(&z, &m);
                let moved: Vec<f64> = z.iter().map(|v| v * scale + shift).collect();
                prop_assert_eq!(argmax_valid(&moved, &m), base);
            }

            #[test]
            fn forward_is_pure(seed in any::<u64>()) {
                let net = PolicyNet::init(NetDims { input: 4, hidden: 6, output: 3 }, seed).unwrap();
                let x = [0.1, -0.4, 1.0, 0.0];
                let m = [true, false, true];
                prop_assert_eq!(net.forward(&x, &m).unwrap(), net.forward(&x, &m).unwrap());
            }
        }
    }
}
