//! Dense `C × H × W` tensors and the fixed set of neural primitives used by the
//! weave blocks and detection heads.
//!
//! All primitives are pure and deterministic. The 3×3 convolution accumulates
//! each output element in a fixed order (bias, then input channel, then `dy`,
//! then `dx`), so stacking kernels along the output axis reproduces separate
//! convolutions bit for bit.

use std::ops::Range;

use crate::error::shape_err;
use crate::{Error, Result};

/// Bilinear ×2 transposed-convolution taps (stride 2, padding 1).
pub const BILINEAR_X2_TAPS: [f64; 4] = [0.25, 0.75, 0.75, 0.25];

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        assert!(
            channels > 0 && height > 0 && width > 0,
            "tensor dimensions must be positive, got {channels}x{height}x{width}"
        );
        Self { channels, height, width, data: vec![value; channels * height * width] }
    }

    /// Builds a tensor from channel-major, row-major data.
    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(shape_err!("dimensions must be positive, got {channels}x{height}x{width}"));
        }
        if data.len() != channels * height * width {
            return Err(shape_err!(
                "{channels}x{height}x{width} tensor needs {} values, got {}",
                channels * height * width,
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor data"));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(channels, height, width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    t.data[(c * height + y) * width + x] = f(c, y, x);
                }
            }
        }
        t
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f64) {
        self.data[(c * self.height + y) * self.width + x] = value;
    }

    /// One channel plane, row-major.
    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise sum; shapes must match.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape() != other.shape() {
            return Err(shape_err!("cannot add {:?} and {:?}", self.shape(), other.shape()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Tensor { channels: self.channels, height: self.height, width: self.width, data })
    }

    /// Returns the largest absolute elementwise difference and its `(c, y, x)`
    /// location, or `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> Option<(f64, (usize, usize, usize))> {
        if self.shape() != other.shape() {
            return None;
        }
        let mut worst = (0.0, 0usize);
        for (i, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            let d = (a - b).abs();
            if d > worst.0 || d.is_nan() {
                worst = (d, i);
            }
        }
        let plane = self.height * self.width;
        let i = worst.1;
        Some((worst.0, (i / plane, (i % plane) / self.width, i % self.width)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    out_channels: usize,
    in_channels: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl ConvKernel {
    /// `weights` is laid out `out × in × 3 × 3`.
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if out_channels == 0 || in_channels == 0 {
            return Err(shape_err!(
                "kernel channels must be positive, got out {out_channels} in {in_channels}"
            ));
        }
        if weights.len() != out_channels * in_channels * 9 {
            return Err(shape_err!(
                "{out_channels}x{in_channels}x3x3 kernel needs {} weights, got {}",
                out_channels * in_channels * 9,
                weights.len()
            ));
        }
        if bias.len() != out_channels {
            return Err(shape_err!("bias length {} != out channels {out_channels}", bias.len()));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel"));
        }
        Ok(Self { out_channels, in_channels, weights, bias })
    }

    pub fn zeros(out_channels: usize, in_channels: usize) -> Self {
        Self::new(
            out_channels,
            in_channels,
            vec![0.0; out_channels * in_channels * 9],
            vec![0.0; out_channels],
        )
        .expect("positive dims")
    }

    /// Center tap 1 on matching channel pairs; the convolution is the identity.
    pub fn identity(channels: usize) -> Self {
        let mut k = Self::zeros(channels, channels);
        for c in 0..channels {
            k.weights[(c * channels + c) * 9 + 4] = 1.0;
        }
        k
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, o: usize, c: usize, dy: usize, dx: usize) -> f64 {
        self.weights[((o * self.in_channels + c) * 3 + dy) * 3 + dx]
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// Output-channel slice as its own kernel.
    pub fn rows(&self, rows: Range<usize>) -> Result<ConvKernel> {
        if rows.is_empty() || rows.end > self.out_channels {
            return Err(shape_err!("row range {rows:?} outside 0..{}", self.out_channels));
        }
        let per_row = self.in_channels * 9;
        ConvKernel::new(
            rows.len(),
            self.in_channels,
            self.weights[rows.start * per_row..rows.end * per_row].to_vec(),
            self.bias[rows].to_vec(),
        )
    }

    /// Keeps only the given input-channel ranges, concatenated in order. Bias is
    /// carried over unchanged.
    pub fn select_inputs(&self, ranges: &[Range<usize>]) -> Result<ConvKernel> {
        if let Some(r) = ranges.iter().find(|r| r.end > self.in_channels || r.start > r.end) {
            return Err(shape_err!("input range {r:?} outside 0..{}", self.in_channels));
        }
        let in_channels: usize = ranges.iter().map(|r| r.len()).sum();
        let mut weights = Vec::with_capacity(self.out_channels * in_channels * 9);
        for o in 0..self.out_channels {
            for r in ranges {
                let base = o * self.in_channels * 9;
                weights.extend_from_slice(&self.weights[base + r.start * 9..base + r.end * 9]);
            }
        }
        ConvKernel::new(self.out_channels, in_channels, weights, self.bias.clone())
    }

    /// Stacks kernels along the output axis.
    pub fn stack(parts: &[&ConvKernel]) -> Result<ConvKernel> {
        let first = parts.first().ok_or(Error::Empty("kernel stack"))?;
        if let Some(p) = parts.iter().find(|p| p.in_channels != first.in_channels) {
            return Err(shape_err!(
                "cannot stack kernels with {} and {} input channels",
                first.in_channels,
                p.in_channels
            ));
        }
        let mut weights = Vec::new();
        let mut bias = Vec::new();
        for p in parts {
            weights.extend_from_slice(&p.weights);
            bias.extend_from_slice(&p.bias);
        }
        ConvKernel::new(bias.len(), first.in_channels, weights, bias)
    }

    pub fn without_bias(mut self) -> ConvKernel {
        self.bias.iter_mut().for_each(|b| *b = 0.0);
        self
    }
}

/// Stride-1, zero-padded 3×3 convolution. Spatial size is preserved.
pub fn conv3x3(input: &Tensor, kernel: &ConvKernel) -> Result<Tensor> {
    if input.channels != kernel.in_channels {
        return Err(shape_err!(
            "conv3x3 input has {} channels, kernel expects {}",
            input.channels,
            kernel.in_channels
        ));
    }
    if !input.is_finite() {
        return Err(Error::NonFinite("conv3x3 input"));
    }
    let (h, w) = (input.height, input.width);
    let plane = h * w;
    let cin = kernel.in_channels;
    let mut out = vec![0.0; kernel.out_channels * plane];

    for (o, dst) in out.chunks_exact_mut(plane).enumerate() {
        dst.fill(kernel.bias[o]);
        for c in 0..cin {
            let src = input.channel(c);
            let taps = &kernel.weights[(o * cin + c) * 9..(o * cin + c + 1) * 9];
            for dy in 0..3 {
                let (y0, y1) = (1usize.saturating_sub(dy), (h + 1 - dy).min(h));
                for dx in 0..3 {
                    let (x0, x1) = (1usize.saturating_sub(dx), (w + 1 - dx).min(w));
                    if x0 >= x1 {
                        continue;
                    }
                    let wv = taps[dy * 3 + dx];
                    for y in y0..y1 {
                        let sy = y + dy - 1;
                        let d = &mut dst[y * w + x0..y * w + x1];
                        let s = &src[sy * w + x0 + dx - 1..sy * w + x1 + dx - 1];
                        for (d, s) in d.iter_mut().zip(s) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor { channels: kernel.out_channels, height: h, width: w, data: out })
}

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    relu_in_place(&mut out);
    out
}

pub(crate) fn relu_in_place(t: &mut Tensor) {
    t.data.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Channel-wise bilinear ×2 upsampling, evaluated as a stride-2, padding-1
/// transposed convolution with the separable kernel `outer(BILINEAR_X2_TAPS)`.
pub fn upsample_bilinear_x2(input: &Tensor) -> Tensor {
    let (c, h, w) = input.shape();
    let (oh, ow) = (2 * h, 2 * w);

    // Input index range and tap offset contributing to output coordinate `o`:
    // tap index = o + 1 - 2i must lie in 0..4.
    let contributions = |o: usize, len: usize| {
        let a = o + 1;
        let lo = a.saturating_sub(3).div_ceil(2);
        let hi = (a / 2).min(len - 1);
        (lo..=hi).map(move |i| (i, BILINEAR_X2_TAPS[a - 2 * i]))
    };

    // Horizontal pass: C × H × 2W.
    let mut rows = vec![0.0; c * h * ow];
    for ch in 0..c {
        let src = input.channel(ch);
        for y in 0..h {
            for x in 0..ow {
                let mut acc = 0.0;
                for (j, k) in contributions(x, w) {
                    acc += src[y * w + j] * k;
                }
                rows[(ch * h + y) * ow + x] = acc;
            }
        }
    }

    let mut out = vec![0.0; c * oh * ow];
    for ch in 0..c {
        for y in 0..oh {
            for (i, k) in contributions(y, h) {
                let src = &rows[(ch * h + i) * ow..(ch * h + i + 1) * ow];
                let dst = &mut out[(ch * oh + y) * ow..(ch * oh + y + 1) * ow];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * k;
                }
            }
        }
    }
    Tensor { channels: c, height: oh, width: ow, data: out }
}

/// 2×2 max pooling with stride 2; a trailing odd row or column is dropped.
pub fn maxpool_2x2_s2(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = input.shape();
    if h < 2 || w < 2 {
        return Err(shape_err!("maxpool needs at least 2x2 spatial input, got {h}x{w}"));
    }
    let (oh, ow) = (h / 2, w / 2);
    Ok(Tensor::from_fn(c, oh, ow, |ch, y, x| {
        let (sy, sx) = (2 * y, 2 * x);
        input
            .get(ch, sy, sx)
            .max(input.get(ch, sy, sx + 1))
            .max(input.get(ch, sy + 1, sx))
            .max(input.get(ch, sy + 1, sx + 1))
    }))
}

pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor> {
    let first = parts.first().ok_or(Error::Empty("concat_channels"))?;
    let (h, w) = (first.height, first.width);
    if let Some(p) = parts.iter().find(|p| p.height != h || p.width != w) {
        return Err(shape_err!(
            "concat spatial mismatch: {h}x{w} vs {}x{}",
            p.height,
            p.width
        ));
    }
    let channels = parts.iter().map(|p| p.channels).sum();
    let mut data = Vec::with_capacity(channels * h * w);
    for p in parts {
        data.extend_from_slice(&p.data);
    }
    Ok(Tensor { channels, height: h, width: w, data })
}

pub fn split_channels(input: &Tensor, sizes: &[usize]) -> Result<Vec<Tensor>> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(shape_err!("split sizes must be non-empty and positive, got {sizes:?}"));
    }
    let total: usize = sizes.iter().sum();
    if total != input.channels {
        return Err(shape_err!(
            "split sizes {sizes:?} sum to {total}, tensor has {} channels",
            input.channels
        ));
    }
    let plane = input.height * input.width;
    let mut start = 0;
    Ok(sizes
        .iter()
        .map(|&n| {
            let t = Tensor {
                channels: n,
                height: input.height,
                width: input.width,
                data: input.data[start * plane..(start + n) * plane].to_vec(),
            };
            start += n;
            t
        })
        .collect())
}

/// Contiguous channel slice.
pub fn slice_channels(input: &Tensor, range: Range<usize>) -> Result<Tensor> {
    if range.is_empty() || range.end > input.channels {
        return Err(shape_err!("channel range {range:?} outside 0..{}", input.channels));
    }
    let plane = input.height * input.width;
    Ok(Tensor {
        channels: range.len(),
        height: input.height,
        width: input.width,
        data: input.data[range.start * plane..range.end * plane].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor {
        Tensor::from_fn(c, h, w, |_, _, _| rng.gen_range(-1.0..1.0))
    }

    fn random_kernel(rng: &mut ChaCha8Rng, out: usize, inp: usize) -> ConvKernel {
        let weights = (0..out * inp * 9).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bias = (0..out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ConvKernel::new(out, inp, weights, bias).unwrap()
    }

    /// Direct transcription of the padded-convolution sum.
    fn conv_reference(x: &Tensor, k: &ConvKernel) -> Tensor {
        let (_, h, w) = x.shape();
        Tensor::from_fn(k.out_channels(), h, w, |o, y, xx| {
            let mut acc = k.bias()[o];
            for c in 0..x.channels() {
                for dy in 0..3 {
                    for dx in 0..3 {
                        let (sy, sx) = (y as isize + dy as isize - 1, xx as isize + dx as isize - 1);
                        if sy >= 0 && sx >= 0 && (sy as usize) < h && (sx as usize) < w {
                            acc += x.get(c, sy as usize, sx as usize) * k.weight(o, c, dy, dx);
                        }
                    }
                }
            }
            acc
        })
    }

    #[test]
    fn conv_all_ones_counts_taps() {
        let x = Tensor::filled(1, 3, 3, 1.0);
        let k = ConvKernel::new(1, 1, vec![1.0; 9], vec![0.0]).unwrap();
        let y = conv3x3(&x, &k).unwrap();
        assert_eq!(y.data(), &[4.0, 6.0, 4.0, 6.0, 9.0, 6.0, 4.0, 6.0, 4.0]);
    }

    #[test]
    fn conv_identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_tensor(&mut rng, 5, 7, 6);
        assert_eq!(conv3x3(&x, &ConvKernel::identity(5)).unwrap(), x);
    }

    #[test]
    fn conv_matches_reference_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (c, h, w, o) in [(3, 5, 4, 2), (1, 1, 1, 3), (2, 1, 6, 1), (4, 8, 8, 5)] {
            let x = random_tensor(&mut rng, c, h, w);
            let k = random_kernel(&mut rng, o, c);
            let (d, _) = conv3x3(&x, &k).unwrap().max_abs_diff(&conv_reference(&x, &k)).unwrap();
            assert!(d < 1e-12, "{c}x{h}x{w}->{o}: {d}");
        }
    }

    #[test]
    fn stacked_kernel_equals_concat_of_separate_convs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_tensor(&mut rng, 4, 8, 8);
        let k1 = random_kernel(&mut rng, 2, 4);
        let k2 = random_kernel(&mut rng, 3, 4);
        let stacked = ConvKernel::stack(&[&k1, &k2]).unwrap();
        let joint = conv3x3(&x, &stacked).unwrap();
        let a = conv3x3(&x, &k1).unwrap();
        let b = conv3x3(&x, &k2).unwrap();
        assert_eq!(joint, concat_channels(&[&a, &b]).unwrap());
    }

    #[test]
    fn conv_rejects_channel_mismatch_and_non_finite() {
        let k = ConvKernel::zeros(1, 2);
        assert!(matches!(conv3x3(&Tensor::zeros(3, 2, 2), &k), Err(Error::Shape(_))));
        let mut x = Tensor::zeros(2, 2, 2);
        x.set(0, 0, 0, f64::NAN);
        assert_eq!(conv3x3(&x, &k), Err(Error::NonFinite("conv3x3 input")));
        assert!(Tensor::from_vec(1, 1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn relu_cases() {
        let x = Tensor::from_vec(1, 1, 3, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let pos = Tensor::from_vec(1, 1, 3, vec![0.5, 0.0, 3.0]).unwrap();
        assert_eq!(relu(&pos), pos);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_tensor(&mut rng, 3, 4, 4);
        assert_eq!(relu(&relu(&r)), relu(&r));
    }

    #[test]
    fn upsample_shape_and_constant_interior() {
        let x = Tensor::filled(3, 5, 5, 2.5);
        let y = upsample_bilinear_x2(&x);
        assert_eq!(y.shape(), (3, 10, 10));
        for c in 0..3 {
            for yy in 1..9 {
                for xx in 1..9 {
                    assert_eq!(y.get(c, yy, xx), 2.5);
                }
            }
        }
        // Border rows/columns only see the 0.75 tap.
        assert_eq!(y.get(0, 0, 5), 2.5 * 0.75);
        assert_eq!(y.get(0, 0, 0), 2.5 * 0.75 * 0.75);
    }

    #[test]
    fn upsample_impulse_response() {
        let mut x = Tensor::zeros(1, 5, 5);
        x.set(0, 2, 2, 1.0);
        let y = upsample_bilinear_x2(&x);
        // Hand evaluation: output rows/cols 3..=6 receive taps 0.25, 0.75, 0.75, 0.25.
        for yy in 0..10 {
            for xx in 0..10 {
                let tap = |o: usize| match o {
                    3 | 6 => 0.25,
                    4 | 5 => 0.75,
                    _ => 0.0,
                };
                assert_eq!(y.get(0, yy, xx), tap(yy) * tap(xx), "({yy},{xx})");
            }
        }
        let mut values: Vec<f64> = y.data().iter().copied().filter(|v| *v != 0.0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        assert_eq!(values, vec![0.0625, 0.1875, 0.5625]);
    }

    #[test]
    fn maxpool_cases() {
        let x = Tensor::from_vec(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(maxpool_2x2_s2(&x).unwrap().data(), &[4.0]);
        let c = Tensor::filled(2, 6, 6, -1.5);
        assert_eq!(maxpool_2x2_s2(&c).unwrap(), Tensor::filled(2, 3, 3, -1.5));
        assert_eq!(maxpool_2x2_s2(&Tensor::zeros(4, 40, 40)).unwrap().shape(), (4, 20, 20));
        assert_eq!(maxpool_2x2_s2(&Tensor::zeros(1, 5, 7)).unwrap().shape(), (1, 2, 3));
        assert!(maxpool_2x2_s2(&Tensor::zeros(1, 1, 4)).is_err());
    }

    #[test]
    fn concat_and_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_tensor(&mut rng, 3, 4, 4);
        let b = random_tensor(&mut rng, 5, 4, 4);
        let c = random_tensor(&mut rng, 2, 4, 4);
        assert_eq!(concat_channels(&[&a]).unwrap(), a);
        let ab = concat_channels(&[&a, &b]).unwrap();
        assert_eq!(ab.channels(), 8);
        assert_eq!(ab.channel(3), b.channel(0));
        assert_eq!(split_channels(&ab, &[3, 5]).unwrap(), vec![a.clone(), b.clone()]);
        let abc = concat_channels(&[&a, &b, &c]).unwrap();
        assert_eq!(split_channels(&abc, &[3, 5, 2]).unwrap(), vec![a.clone(), b, c]);

        let eight = Tensor::zeros(8, 2, 2);
        let halves = split_channels(&eight, &[4, 4]).unwrap();
        assert!(halves.iter().all(|t| t.shape() == (4, 2, 2)));
        assert_eq!(concat_channels(&[&halves[0], &halves[1]]).unwrap(), eight);

        assert!(split_channels(&eight, &[4, 3]).is_err());
        assert!(concat_channels(&[&a, &Tensor::zeros(1, 3, 4)]).is_err());
        assert!(concat_channels(&[]).is_err());
    }

    #[test]
    fn kernel_slicing_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let k = random_kernel(&mut rng, 5, 7);
        let top = k.rows(0..2).unwrap();
        let bottom = k.rows(2..5).unwrap();
        assert_eq!(ConvKernel::stack(&[&top, &bottom]).unwrap(), k);
        assert_eq!(k.select_inputs(&[0..3, 3..7]).unwrap(), k);
        let picked = k.select_inputs(&[1..2, 5..7]).unwrap();
        assert_eq!(picked.in_channels(), 3);
        assert_eq!(picked.weight(4, 1, 2, 0), k.weight(4, 5, 2, 0));
    }

    proptest! {
        #[test]
        fn conv_is_affine_in_input(seed in any::<u64>(), c in 1usize..4, h in 1usize..7, w in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_tensor(&mut rng, c, h, w);
            let y = random_tensor(&mut rng, c, h, w);
            let k = random_kernel(&mut rng, 2, c);
            let sum = conv3x3(&x.add(&y).unwrap(), &k).unwrap();
            let parts = conv3x3(&x, &k).unwrap().add(&conv3x3(&y, &k.clone().without_bias()).unwrap()).unwrap();
            let (d, _) = sum.max_abs_diff(&parts).unwrap();
            prop_assert!(d < 1e-12);
        }

        #[test]
        fn ops_are_bitwise_pure(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_tensor(&mut rng, 2, 6, 4);
            let k = random_kernel(&mut rng, 3, 2);
            prop_assert_eq!(conv3x3(&x, &k).unwrap(), conv3x3(&x, &k).unwrap());
            prop_assert_eq!(upsample_bilinear_x2(&x), upsample_bilinear_x2(&x));
            prop_assert_eq!(maxpool_2x2_s2(&x).unwrap(), maxpool_2x2_s2(&x).unwrap());
        }
    }
}
