//! Seeded synthetic inputs: stand-ins for backbone feature maps and sampled
//! (untrained) convolution parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ConvKernel, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Kernel with weights and biases drawn uniformly from `[-s, s]`,
/// `s = 1 / sqrt(in_channels * 9)`.
pub fn uniform_kernel(rng: &mut impl Rng, out_channels: usize, in_channels: usize) -> ConvKernel {
    let s = 1.0 / ((in_channels * 9) as f64).sqrt();
    let weights = (0..out_channels * in_channels * 9).map(|_| rng.gen_range(-s..=s)).collect();
    let bias = (0..out_channels).map(|_| rng.gen_range(-s..=s)).collect();
    ConvKernel::new(out_channels, in_channels, weights, bias).expect("shapes are consistent")
}

/// Non-negative feature map with values in `[0, 1)`, like post-ReLU backbone
/// activations.
pub fn feature_map(rng: &mut impl Rng, channels: usize, height: usize, width: usize) -> Tensor {
    Tensor::from_fn(channels, height, width, |_, _, _| rng.gen::<f64>())
}

/// One feature map per scale, `channels[i] × sizes[i].0 × sizes[i].1`.
pub fn synthetic_pyramid(sizes: &[(usize, usize)], channels: &[usize], seed: u64) -> Vec<Tensor> {
    assert_eq!(sizes.len(), channels.len(), "one channel count per scale");
    let mut rng = rng(seed);
    sizes
        .iter()
        .zip(channels)
        .map(|(&(h, w), &c)| feature_map(&mut rng, c, h, w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pyramid_is_seeded() {
        let sizes = [(4, 4), (2, 2)];
        let a = synthetic_pyramid(&sizes, &[3, 2], 9);
        assert_eq!(a, synthetic_pyramid(&sizes, &[3, 2], 9));
        assert_ne!(a, synthetic_pyramid(&sizes, &[3, 2], 10));
        assert_eq!(a[1].shape(), (2, 2, 2));
    }

    #[test]
    fn kernel_bounds() {
        let k = uniform_kernel(&mut rng(1), 4, 16);
        let s = 1.0 / 12.0;
        assert!(k.weights().iter().chain(k.bias()).all(|v| v.abs() <= s));
    }
}
