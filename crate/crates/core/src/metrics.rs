//! Pixel-space image metrics and framewise aggregation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::sphere::EquirectImage;

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 99.0;

fn check_same(a: &EquirectImage, b: &EquirectImage) -> Result<()> {
    if !a.same_shape(b) {
        return Err(invalid(format!(
            "image shapes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Mean squared error over all pixels and channels.
pub fn mse(a: &EquirectImage, b: &EquirectImage) -> Result<f64> {
    check_same(a, b)?;
    let sum: f64 = a
        .rgb
        .iter()
        .zip(&b.rgb)
        .flat_map(|(p, q)| (0..3).map(move |c| {
            let d = p[c] as f64 - q[c] as f64;
            d * d
        }))
        .sum();
    Ok(sum / (3 * a.len()) as f64)
}

/// `10·log10(peak² / mse)`, or `cap` when the error is zero.
pub fn psnr_from_mse(mse: f64, peak: f64, cap: f64) -> f64 {
    if mse <= 0.0 {
        return cap;
    }
    (10.0 * (peak * peak / mse).log10()).min(cap)
}

pub fn psnr(a: &EquirectImage, b: &EquirectImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, 1.0, PSNR_CAP))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Odd window side in pixels.
    pub window: usize,
    pub sigma: f64,
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 7,
            sigma: 1.5,
            peak: 1.0,
        }
    }
}

/// Rec. 601 luma.
pub fn luma(rgb: [f32; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

fn gaussian_kernel(window: usize, sigma: f64) -> Vec<f64> {
    let half = (window / 2) as f64;
    let mut k: Vec<f64> = (0..window)
        .map(|i| {
            let x = i as f64 - half;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable valid-mode filtering of a `w×h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w - n + 1, h - n + 1);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let src = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&src[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM over Gaussian-weighted windows of the luma channel. Only
/// windows lying fully inside the image contribute.
pub fn ssim_with(a: &EquirectImage, b: &EquirectImage, params: &SsimParams) -> Result<f64> {
    check_same(a, b)?;
    let SsimParams { window, sigma, peak } = *params;
    if window % 2 == 0 || window == 0 {
        return Err(invalid("SSIM window must be odd"));
    }
    if !(sigma > 0.0) || !(peak > 0.0) {
        return Err(invalid("SSIM sigma and peak must be positive"));
    }
    let (w, h) = (a.width(), a.height());
    if window > w || window > h {
        return Err(invalid("SSIM window exceeds the image"));
    }
    let x: Vec<f64> = a.rgb.iter().map(|&p| luma(p)).collect();
    let y: Vec<f64> = b.rgb.iter().map(|&p| luma(p)).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let k = gaussian_kernel(window, sigma);
    let [mx, my, exx, eyy, exy] = [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, w, h, &k));
    let c1 = (0.01 * peak) * (0.01 * peak);
    let c2 = (0.03 * peak) * (0.03 * peak);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = exx[i] - ux * ux;
            let vy = eyy[i] - uy * uy;
            let cov = exy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

pub fn ssim(a: &EquirectImage, b: &EquirectImage) -> Result<f64> {
    ssim_with(a, b, &SsimParams::default())
}

/// Pixel MSE between the first ground-truth frame and the final generated
/// frame of a loop; lower means less drift.
pub fn loop_consistency(first_gt: &EquirectImage, final_gen: &EquirectImage) -> Result<f64> {
    mse(first_gt, final_gen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Psnr,
    Ssim,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mse, Metric::Psnr, Metric::Ssim];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn eval(self, a: &EquirectImage, b: &EquirectImage) -> Result<f64> {
        match self {
            Metric::Mse => mse(a, b),
            Metric::Psnr => psnr(a, b),
            Metric::Ssim => ssim(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub per_frame: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>, per_frame: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_frame);
        Self {
            name: name.into(),
            per_frame,
            mean,
            std,
        }
    }
}

/// Mean and population standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub frames: Vec<usize>,
    pub metrics: Vec<MetricSeries>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<&MetricSeries> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Applies each metric to every frame pair.
pub fn report(frames_a: &[EquirectImage], frames_b: &[EquirectImage], metrics: &[Metric]) -> Result<MetricReport> {
    if frames_a.len() != frames_b.len() {
        return Err(invalid(format!(
            "frame counts differ ({} vs {})",
            frames_a.len(),
            frames_b.len()
        )));
    }
    let mut out = MetricReport {
        frames: (0..frames_a.len()).collect(),
        metrics: Vec::with_capacity(metrics.len()),
    };
    for &m in metrics {
        let values = frames_a
            .iter()
            .zip(frames_b)
            .map(|(a, b)| m.eval(a, b))
            .collect::<Result<Vec<_>>>()?;
        out.metrics.push(MetricSeries::new(m.name(), values));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(f: impl Fn(usize, usize) -> [f32; 3]) -> EquirectImage {
        let (w, h) = (32, 16);
        let rgb = (0..w * h).map(|i| f(i % w, i / w)).collect();
        EquirectImage::from_rgb(w, h, rgb).unwrap()
    }

    #[test]
    fn trivial_values() {
        let black = img(|_, _| [0.0; 3]);
        let white = img(|_, _| [1.0; 3]);
        assert_eq!(mse(&black, &black).unwrap(), 0.0);
        assert_eq!(mse(&black, &white).unwrap(), 1.0);
        assert_eq!(psnr(&black, &black).unwrap(), PSNR_CAP);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
        assert!((psnr_from_mse(0.01, 1.0, PSNR_CAP) - 20.0).abs() < 1e-12);
        let check = img(|x, y| [((x + y) % 2) as f32; 3]);
        let inv = img(|x, y| [((x + y + 1) % 2) as f32; 3]);
        assert_eq!(mse(&check, &inv).unwrap(), 1.0);
        assert_eq!(ssim(&check, &check).unwrap(), 1.0);
    }

    #[test]
    fn ssim_offset_symmetry() {
        let a = img(|_, _| [0.3; 3]);
        let b = img(|_, _| [0.35; 3]);
        let ab = ssim(&a, &b).unwrap();
        assert!(ab < 1.0);
        assert_eq!(ab, ssim(&b, &a).unwrap());
    }

    #[test]
    fn report_shapes() {
        let a = img(|x, _| [x as f32 / 32.0; 3]);
        let r = report(&[a.clone()], &[a.clone()], &Metric::ALL).unwrap();
        assert_eq!(r.get("mse").unwrap().mean, 0.0);
        assert_eq!(r.get("psnr").unwrap().mean, PSNR_CAP);
        assert_eq!(r.get("ssim").unwrap().mean, 1.0);
        assert!(report(&[a.clone()], &[a.clone()], &[]).unwrap().metrics.is_empty());
        assert!(report(&[a.clone()], &[], &Metric::ALL).is_err());
        let r = report(&[a.clone(), a.clone()], &[a.clone(), a], &[Metric::Mse]).unwrap();
        assert_eq!(r.metrics[0].per_frame.len(), 2);
    }
}
