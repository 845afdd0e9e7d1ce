//! Blur kernels, degradation synthesis with calibrated noise, and the BSNR
//! and ISNR evaluation metrics.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Point-spread function families supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurFamily {
    Gaussian,
    Pillbox,
    Delta,
}

impl BlurFamily {
    pub fn tag(self) -> u8 {
        match self {
            BlurFamily::Gaussian => 0,
            BlurFamily::Pillbox => 1,
            BlurFamily::Delta => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(BlurFamily::Gaussian),
            1 => Ok(BlurFamily::Pillbox),
            2 => Ok(BlurFamily::Delta),
            other => Err(Error::BadFamilyTag(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlurFamily::Gaussian => "gaussian",
            BlurFamily::Pillbox => "pillbox",
            BlurFamily::Delta => "delta",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gaussian" => Some(BlurFamily::Gaussian),
            "pillbox" => Some(BlurFamily::Pillbox),
            "delta" => Some(BlurFamily::Delta),
            _ => None,
        }
    }
}

/// A discrete, unit-sum, radially symmetric point-spread function.
///
/// Taps cover a `(2*half_width+1)^2` square, row-major, and always sum to 1;
/// both supported families are symmetric under every rotation and reflection
/// of the square lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    family: BlurFamily,
    param: f64,
    half_width: usize,
    taps: Vec<f64>,
}

impl BlurKernel {
    /// Gaussian blur with variance `sigma2`, truncated at half-width
    /// `ceil(3*sqrt(sigma2))` and renormalized to unit sum.
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::NonPositiveSigma(sigma2));
        }
        let half_width = (3.0 * sigma2.sqrt()).ceil() as usize;
        Ok(Self::build(BlurFamily::Gaussian, sigma2, half_width, |x, y| {
            (-((x * x + y * y) as f64) / (2.0 * sigma2)).exp()
        }))
    }

    /// Pillbox (uniform disk) blur of the given radius: equal weight on every
    /// lattice point with `sqrt(x^2+y^2) <= radius`, renormalized to unit sum.
    pub fn pillbox(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius(radius));
        }
        let half_width = radius.ceil() as usize;
        let r2 = radius * radius;
        Ok(Self::build(BlurFamily::Pillbox, radius, half_width, |x, y| {
            if ((x * x + y * y) as f64) <= r2 {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// The identity kernel.
    pub fn delta() -> Self {
        Self {
            family: BlurFamily::Delta,
            param: 0.0,
            half_width: 0,
            taps: vec![1.0],
        }
    }

    /// Constructs a kernel from a family name and parameter, as used by the
    /// command line and codebook metadata. The delta family ignores `param`.
    pub fn from_family(family: BlurFamily, param: f64) -> Result<Self> {
        match family {
            BlurFamily::Gaussian => Self::gaussian(param),
            BlurFamily::Pillbox => Self::pillbox(param),
            BlurFamily::Delta => Ok(Self::delta()),
        }
    }

    fn build(
        family: BlurFamily,
        param: f64,
        half_width: usize,
        weight: impl Fn(isize, isize) -> f64,
    ) -> Self {
        let side = 2 * half_width + 1;
        let mut taps = Vec::with_capacity(side * side);
        let h = half_width as isize;
        for y in -h..=h {
            for x in -h..=h {
                taps.push(weight(x, y));
            }
        }
        let sum: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= sum;
        }
        Self {
            family,
            param,
            half_width,
            taps,
        }
    }

    pub fn family(&self) -> BlurFamily {
        self.family
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap weight at offset `(dy, dx)` from the kernel center.
    /// Panics if the offset lies outside the support square.
    #[inline]
    pub fn tap(&self, dy: isize, dx: isize) -> f64 {
        let h = self.half_width as isize;
        debug_assert!(dy.abs() <= h && dx.abs() <= h);
        self.taps[((dy + h) * (2 * h + 1) + (dx + h)) as usize]
    }
}

/// Correlates the mirror-padded image with the kernel; output has the same
/// dimensions as the input. Both kernel families are symmetric, so this
/// equals convolution. Taps are accumulated in a fixed row-major order per
/// pixel, making the result independent of any internal scheduling.
pub fn convolve(image: &GrayImage, kernel: &BlurKernel) -> GrayImage {
    let h = kernel.half_width() as isize;
    GrayImage::from_fn(image.width(), image.height(), |row, col| {
        let mut acc = 0.0;
        for dy in -h..=h {
            for dx in -h..=h {
                acc += kernel.tap(dy, dx) * image.get_mirrored(row as isize + dy, col as isize + dx);
            }
        }
        acc
    })
}

/// A degradation record: the original, its blurred (noise-free) version, the
/// final observation, and the noise calibration that produced it.
#[derive(Debug, Clone)]
pub struct DegradedPair {
    pub original: GrayImage,
    pub blurred_noiseless: GrayImage,
    pub degraded: GrayImage,
    /// Calibrated noise variance in squared intensity units.
    pub noise_variance: f64,
    pub target_bsnr_db: f64,
    /// BSNR recomputed from the population variance of the actual noise
    /// sample.
    pub realized_bsnr_db: f64,
    pub seed: u64,
}

/// Draws `count` zero-mean unit-variance Gaussian values.
///
/// The stream is a ChaCha8 generator seeded with `seed`, mapped to uniforms
/// on [0, 1) by taking the top 53 bits of each 64-bit draw, then transformed
/// in pairs by Box-Muller. The sequence is fully determined by `seed`.
pub fn standard_normal(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u1 = 1.0 - unit(); // (0, 1], keeps the log finite
        let u2 = unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        if out.len() < count {
            out.push(r * theta.sin());
        }
    }
    out
}

/// Blurs `image` with `kernel` and adds i.i.d. zero-mean Gaussian noise whose
/// variance is calibrated so the blurred-signal-to-noise ratio hits
/// `target_bsnr_db`: `noise_variance = Var(blurred) / 10^(target/10)` with
/// the population variance taken over pixels. Deterministic per `seed`.
pub fn degrade(
    image: &GrayImage,
    kernel: &BlurKernel,
    target_bsnr_db: f64,
    seed: u64,
) -> Result<DegradedPair> {
    if !target_bsnr_db.is_finite() {
        return Err(Error::NonFiniteBsnr(target_bsnr_db));
    }
    let blurred = convolve(image, kernel);
    let signal_variance = blurred.population_variance();
    if signal_variance == 0.0 {
        return Err(Error::ConstantImage);
    }
    let noise_variance = signal_variance / 10f64.powf(target_bsnr_db / 10.0);
    let sigma = noise_variance.sqrt();
    let noise = standard_normal(blurred.data().len(), seed);
    let degraded = GrayImage::new(
        blurred.width(),
        blurred.height(),
        blurred
            .data()
            .iter()
            .zip(&noise)
            .map(|(&b, &z)| b + sigma * z)
            .collect(),
    )?;
    let noise_mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let sample_variance = noise
        .iter()
        .map(|z| {
            let d = sigma * (z - noise_mean);
            d * d
        })
        .sum::<f64>()
        / noise.len() as f64;
    let realized_bsnr_db = bsnr_db(&blurred, sample_variance)?;
    Ok(DegradedPair {
        original: image.clone(),
        blurred_noiseless: blurred,
        degraded,
        noise_variance,
        target_bsnr_db,
        realized_bsnr_db,
        seed,
    })
}

/// Blurred-signal-to-noise ratio in dB:
/// `10 log10(Var(blurred) / noise_variance)` with population variance.
pub fn bsnr_db(blurred_noiseless: &GrayImage, noise_variance: f64) -> Result<f64> {
    if !(noise_variance > 0.0) {
        return Err(Error::NonPositiveNoiseVariance(noise_variance));
    }
    let signal_variance = blurred_noiseless.population_variance();
    if signal_variance == 0.0 {
        return Err(Error::ConstantImage);
    }
    Ok(10.0 * (signal_variance / noise_variance).log10())
}

/// Improvement in SNR in dB:
/// `10 log10( sum (original-degraded)^2 / sum (original-restored)^2 )`.
/// Zero restoration error would make the ratio infinite and is reported as a
/// distinct error.
pub fn isnr_db(original: &GrayImage, degraded: &GrayImage, restored: &GrayImage) -> Result<f64> {
    if !original.same_dimensions(degraded) {
        return Err(Error::DimensionMismatch(
            original.width(),
            original.height(),
            degraded.width(),
            degraded.height(),
        ));
    }
    if !original.same_dimensions(restored) {
        return Err(Error::DimensionMismatch(
            original.width(),
            original.height(),
            restored.width(),
            restored.height(),
        ));
    }
    let energy = |a: &GrayImage, b: &GrayImage| {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
    };
    let degradation = energy(original, degraded);
    let restoration = energy(original, restored);
    if restoration == 0.0 {
        return Err(Error::InfiniteIsnr);
    }
    Ok(10.0 * (degradation / restoration).log10())
}
