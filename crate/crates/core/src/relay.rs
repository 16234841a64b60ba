//! Reference forward pass of the scale-aware relay layer.
//!
//! The layer sits between a backbone and its neck and refines every pyramid
//! level in place:
//!
//! ```text
//! out_l = x_l * A_c(x_{l+1}) * A_s(x_l) + x_l
//! ```
//!
//! * `A_c` is channel attention computed from the adjacent coarser (more
//!   semantic) level: global average pooling, a 1x1 projection onto the finer
//!   level's channel count, a `C -> C/r -> C` bottleneck with ReLU, and a
//!   sigmoid. The top level has no coarser neighbor and attends to itself.
//! * `A_s` is spatial attention from the level itself: channel-wise mean and max
//!   planes, a `k x k` zero-padded convolution to one plane, and a sigmoid.
//!
//! Both attentions lie in (0, 1), so every output is bounded by twice the input
//! magnitude. Global pooling makes the cross-scale path independent of spatial
//! resolution, so no resampling between levels is needed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{sigmoid, sqrt};
use crate::rng::SeedTree;

/// Dense `channels x height x width` tensor, row-major within each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Shape(format!("feature map dims must be >= 1, got {channels}x{height}x{width}")));
        }
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!("data length {} does not match {channels}x{height}x{width}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("feature map contains non-finite values".into()));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data)
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

    /// `(channels, height, width)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Feature levels, finest first. Each level halves the previous height and
/// width exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    levels: Vec<FeatureMap>,
}

impl Pyramid {
    pub fn new(levels: Vec<FeatureMap>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::Shape(format!("pyramid needs at least 2 levels, got {}", levels.len())));
        }
        for (i, pair) in levels.windows(2).enumerate() {
            let (fine, coarse) = (&pair[0], &pair[1]);
            if fine.height != 2 * coarse.height || fine.width != 2 * coarse.width {
                return Err(Error::Shape(format!(
                    "level {} is {}x{} but level {} is {}x{}; each level must halve height and width",
                    i,
                    fine.height,
                    fine.width,
                    i + 1,
                    coarse.height,
                    coarse.width
                )));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[FeatureMap] {
        &self.levels
    }

    pub fn into_levels(self) -> Vec<FeatureMap> {
        self.levels
    }

    pub fn shapes(&self) -> Vec<(usize, usize, usize)> {
        self.levels.iter().map(FeatureMap::shape).collect()
    }
}

/// Layer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelayConfig {
    /// Bottleneck reduction ratio `r`; must divide every channel count.
    pub reduction: usize,
    /// Side of the spatial-attention kernel; must be odd.
    pub kernel_size: usize,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self { reduction: 16, kernel_size: 7 }
    }
}

/// Weights of one channel-attention branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAttentionParams {
    pub in_channels: usize,
    pub channels: usize,
    pub hidden: usize,
    /// 1x1 projection `channels x in_channels`; `None` when attending to the
    /// level's own features.
    pub projection: Option<Vec<f64>>,
    /// `hidden x channels`
    pub fc1_weight: Vec<f64>,
    pub fc1_bias: Vec<f64>,
    /// `channels x hidden`
    pub fc2_weight: Vec<f64>,
    pub fc2_bias: Vec<f64>,
}

/// Weights of one spatial-attention branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialAttentionParams {
    pub kernel_size: usize,
    /// `2 x k x k`: plane 0 convolves the channel mean, plane 1 the channel max.
    pub weight: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    pub channel: ChannelAttentionParams,
    pub spatial: SpatialAttentionParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayParams {
    pub levels: Vec<LevelParams>,
    pub config: RelayConfig,
    pub seed: u64,
}

fn check_config(channel_counts: &[usize], cfg: &RelayConfig) -> Result<()> {
    if channel_counts.len() < 2 {
        return Err(Error::Config(format!("need at least 2 levels, got {}", channel_counts.len())));
    }
    if cfg.reduction == 0 {
        return Err(Error::Config("reduction ratio must be >= 1".into()));
    }
    if cfg.kernel_size == 0 || cfg.kernel_size.is_multiple_of(2) {
        return Err(Error::Config(format!("kernel size must be odd, got {}", cfg.kernel_size)));
    }
    for &c in channel_counts {
        if c == 0 || c % cfg.reduction != 0 {
            return Err(Error::Config(format!("reduction ratio {} does not divide channel count {c}", cfg.reduction)));
        }
    }
    Ok(())
}

impl RelayParams {
    /// All weights and biases zero: every attention value is exactly 0.5.
    pub fn zeros(channel_counts: &[usize], cfg: RelayConfig) -> Result<Self> {
        Self::build(channel_counts, cfg, 0, |_, _| 0.0)
    }

    fn build(
        channel_counts: &[usize],
        cfg: RelayConfig,
        seed: u64,
        mut draw: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_config(channel_counts, &cfg)?;
        let k = cfg.kernel_size;
        let n = channel_counts.len();
        let mut levels = Vec::with_capacity(n);
        for (l, &c) in channel_counts.iter().enumerate() {
            let in_channels = if l + 1 < n { channel_counts[l + 1] } else { c };
            let hidden = c / cfg.reduction;
            let mut take = |count: usize, fan_in: usize| (0..count).map(|_| draw(l, fan_in)).collect::<Vec<f64>>();
            let projection = (l + 1 < n).then(|| take(c * in_channels, in_channels));
            let fc1_weight = take(hidden * c, c);
            let fc1_bias = take(hidden, c);
            let fc2_weight = take(c * hidden, hidden);
            let fc2_bias = take(c, hidden);
            let weight = take(2 * k * k, 2 * k * k);
            let bias = take(1, 2 * k * k)[0];
            levels.push(LevelParams {
                channel: ChannelAttentionParams {
                    in_channels,
                    channels: c,
                    hidden,
                    projection,
                    fc1_weight,
                    fc1_bias,
                    fc2_weight,
                    fc2_bias,
                },
                spatial: SpatialAttentionParams { kernel_size: k, weight, bias },
            });
        }
        Ok(Self { levels, config: cfg, seed })
    }
}

/// Seeded initialization: every weight and bias uniform in `[-b, b]` with
/// `b = 1 / sqrt(fan_in)`. Level `l` draws from its own stream.
pub fn init_relay_params(channel_counts: &[usize], cfg: RelayConfig, seed: u64) -> Result<RelayParams> {
    let tree = SeedTree::new(seed);
    let mut streams: Vec<ChaCha8Rng> = (0..channel_counts.len()).map(|l| tree.stream(l as u64)).collect();
    RelayParams::build(channel_counts, cfg, seed, |level, fan_in| {
        let bound = 1.0 / sqrt(fan_in as f64);
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite positive bound");
        dist.sample(&mut streams[level])
    })
}

/// Per-channel spatial mean.
pub fn global_avg_pool(f: &FeatureMap) -> Vec<f64> {
    let n = (f.height * f.width) as f64;
    (0..f.channels).map(|c| f.plane(c).iter().sum::<f64>() / n).collect()
}

/// Channel attention for a level with `target_channels` channels, driven by
/// the `semantic` map.
pub fn channel_attention(
    semantic: &FeatureMap,
    params: &ChannelAttentionParams,
    target_channels: usize,
) -> Result<Vec<f64>> {
    if semantic.channels != params.in_channels || target_channels != params.channels {
        return Err(Error::Shape(format!(
            "channel attention expects {} -> {} channels, got {} -> {}",
            params.in_channels, params.channels, semantic.channels, target_channels
        )));
    }
    let pooled = global_avg_pool(semantic);
    let projected = match &params.projection {
        Some(w) => matvec(w, &pooled, params.channels),
        None if params.in_channels == params.channels => pooled,
        None => return Err(Error::Shape("missing cross-scale projection".into())),
    };
    let mut hidden = matvec(&params.fc1_weight, &projected, params.hidden);
    for (h, b) in hidden.iter_mut().zip(&params.fc1_bias) {
        *h = (*h + b).max(0.0);
    }
    let out = matvec(&params.fc2_weight, &hidden, params.channels);
    Ok(out.iter().zip(&params.fc2_bias).map(|(v, b)| sigmoid(v + b)).collect())
}

/// `rows x v.len()` row-major matrix times `v`.
fn matvec(m: &[f64], v: &[f64], rows: usize) -> Vec<f64> {
    let cols = v.len();
    (0..rows).map(|r| m[r * cols..(r + 1) * cols].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Spatial attention map (one channel, same height and width as `f`).
pub fn spatial_attention(f: &FeatureMap, params: &SpatialAttentionParams) -> Result<FeatureMap> {
    let k = params.kernel_size;
    if k.is_multiple_of(2) || params.weight.len() != 2 * k * k {
        return Err(Error::Shape(format!("spatial kernel must be 2x{k}x{k} with odd k")));
    }
    let (h, w) = (f.height, f.width);
    let n = h * w;
    let mut avg = vec![0.0; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for c in 0..f.channels {
        for (i, &v) in f.plane(c).iter().enumerate() {
            avg[i] += v;
            if v > max[i] {
                max[i] = v;
            }
        }
    }
    let inv = 1.0 / f.channels as f64;
    avg.iter_mut().for_each(|v| *v *= inv);

    let pad = (k / 2) as isize;
    let planes = [&avg, &max];
    let mut out = Vec::with_capacity(n);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = params.bias;
            for (p, plane) in planes.iter().enumerate() {
                let kernel = &params.weight[p * k * k..(p + 1) * k * k];
                for ky in 0..k as isize {
                    let sy = y + ky - pad;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for kx in 0..k as isize {
                        let sx = x + kx - pad;
                        if sx < 0 || sx >= w as isize {
                            continue;
                        }
                        acc += kernel[(ky as usize) * k + kx as usize] * plane[sy as usize * w + sx as usize];
                    }
                }
            }
            out.push(sigmoid(acc));
        }
    }
    FeatureMap::new(1, h, w, out)
}

/// Refined pyramid together with the attention each level received.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayOutput {
    pub pyramid: Pyramid,
    pub channel_attention: Vec<Vec<f64>>,
    pub spatial_attention: Vec<FeatureMap>,
}

pub fn relay_forward(p: &Pyramid, params: &RelayParams) -> Result<Pyramid> {
    relay_forward_detailed(p, params).map(|o| o.pyramid)
}

pub fn relay_forward_detailed(p: &Pyramid, params: &RelayParams) -> Result<RelayOutput> {
    let levels = p.levels();
    if params.levels.len() != levels.len() {
        return Err(Error::Shape(format!("params cover {} levels, pyramid has {}", params.levels.len(), levels.len())));
    }
    let mut out = Vec::with_capacity(levels.len());
    let mut channel_att = Vec::with_capacity(levels.len());
    let mut spatial_att = Vec::with_capacity(levels.len());
    for (l, x) in levels.iter().enumerate() {
        let semantic = levels.get(l + 1).unwrap_or(x);
        let lp = &params.levels[l];
        let a_c = channel_attention(semantic, &lp.channel, x.channels)?;
        let a_s = spatial_attention(x, &lp.spatial)?;
        let n = x.height * x.width;
        let mut data = Vec::with_capacity(x.data.len());
        for (c, &ac) in a_c.iter().enumerate() {
            for (&v, &s) in x.plane(c).iter().zip(&a_s.data[..n]) {
                data.push(v * ac * s + v);
            }
        }
        out.push(FeatureMap::new(x.channels, x.height, x.width, data)?);
        channel_att.push(a_c);
        spatial_att.push(a_s);
    }
    Ok(RelayOutput { pyramid: Pyramid::new(out)?, channel_attention: channel_att, spatial_attention: spatial_att })
}

/// Seeded pyramid with values uniform in `[-1, 1]`, for demos and tests.
pub fn random_pyramid(shapes: &[(usize, usize, usize)], seed: u64) -> Result<Pyramid> {
    let tree = SeedTree::new(seed);
    let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let levels = shapes
        .iter()
        .enumerate()
        .map(|(l, &(c, h, w))| {
            let mut rng = tree.stream(1000 + l as u64);
            FeatureMap::from_fn(c, h, w, |_, _, _| dist.sample(&mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    Pyramid::new(levels)
}
