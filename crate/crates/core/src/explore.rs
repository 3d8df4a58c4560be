//! The generate-reconstruct loop over clip windows, its generator and
//! reconstructor contracts, and desk-scale implementations of both.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{CameraPose, Convention, SimilarityTransform};
use crate::memory::{MemPoint, MemoryConfig, PointCloudMemory, PosedFrame, UpdateReport};
use crate::raster::{render_scene, reproject, reproject_chunks, unproject, RasterConfig, Reprojection};
use crate::sphere::{plucker_field, EquirectImage, PluckerField};
use crate::trajectory::clip_targets;

/// Everything a generator sees for one clip.
#[derive(Debug, Clone, Copy)]
pub struct GenerateRequest<'a> {
    pub step: usize,
    /// Final frame of the previous clip (or the initial frame).
    pub last_frame: &'a EquirectImage,
    /// Pose of `last_frame`.
    pub anchor: &'a CameraPose,
    /// Poses of the frames to produce.
    pub targets: &'a [CameraPose],
    /// Memory rendered at each target pose.
    pub reprojections: &'a [Reprojection],
    /// Ray embeddings of each target pose; empty when disabled.
    pub plucker: &'a [PluckerField],
}

/// Produces one frame per target pose, sized like `last_frame`.
pub trait Generator {
    fn generate(&mut self, req: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>>;
}

impl<G: Generator + ?Sized> Generator for &mut G {
    fn generate(&mut self, req: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>> {
        (**self).generate(req)
    }
}

/// Per-frame point sets in the reconstructor's own coordinate system, with
/// the camera poses it estimated in that system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reconstruction {
    pub points: Vec<Vec<MemPoint>>,
    pub poses: Vec<CameraPose>,
}

/// Maps posed frames to point clouds and estimated poses, in input order.
pub trait Reconstructor {
    fn reconstruct(&mut self, frames: &[&EquirectImage], poses: &[CameraPose]) -> Result<Reconstruction>;
}

fn add_noise(img: &mut EquirectImage, normal: &Normal<f64>, rng: &mut ChaCha8Rng) {
    for px in &mut img.rgb {
        for c in px.iter_mut() {
            *c = (*c as f64 + normal.sample(rng)).clamp(0.0, 1.0) as f32;
        }
    }
}

fn noise(sigma: f64) -> Result<Option<Normal<f64>>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid("noise sigma must be finite and non-negative"));
    }
    Ok((sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid sigma")))
}

/// Renders the hidden scene at each target, plus optional Gaussian pixel
/// noise. Ignores memory entirely.
#[derive(Debug, Clone)]
pub struct OracleGenerator {
    scene: Vec<MemPoint>,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    raster: RasterConfig,
}

impl OracleGenerator {
    pub fn new(scene: Vec<MemPoint>, noise_sigma: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            scene,
            noise: noise(noise_sigma)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
            raster: RasterConfig::default(),
        })
    }

    pub fn with_raster(mut self, raster: RasterConfig) -> Self {
        self.raster = raster;
        self
    }
}

pub fn oracle_generator(hidden_scene: Vec<MemPoint>, noise_sigma: f64, seed: u64) -> Result<OracleGenerator> {
    OracleGenerator::new(hidden_scene, noise_sigma, seed)
}

impl Generator for OracleGenerator {
    fn generate(&mut self, req: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>> {
        let (w, h) = (req.last_frame.width(), req.last_frame.height());
        req.targets
            .iter()
            .map(|pose| {
                let mut img = render_scene(&self.scene, pose, w, h, &self.raster)?.image;
                if let Some(n) = &self.noise {
                    add_noise(&mut img, n, &mut self.rng);
                }
                Ok(img)
            })
            .collect()
    }
}

/// Memoryless baseline: warps the last frame to each target through its own
/// depth, leaving disoccluded pixels as background, and adds pixel noise.
/// Noise therefore compounds from clip to clip.
#[derive(Debug, Clone)]
pub struct PassthroughGenerator {
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    raster: RasterConfig,
}

impl PassthroughGenerator {
    pub fn new(noise_sigma: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            noise: noise(noise_sigma)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
            raster: RasterConfig::default(),
        })
    }

    pub fn with_raster(mut self, raster: RasterConfig) -> Self {
        self.raster = raster;
        self
    }
}

impl Generator for PassthroughGenerator {
    fn generate(&mut self, req: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>> {
        let (w, h) = (req.last_frame.width(), req.last_frame.height());
        let points = unproject(req.last_frame, req.anchor, 1, None, 0)?;
        req.targets
            .iter()
            .map(|pose| {
                let mut img = reproject(&points, pose, w, h, &self.raster)?.image;
                if let Some(n) = &self.noise {
                    add_noise(&mut img, n, &mut self.rng);
                }
                Ok(img)
            })
            .collect()
    }
}

/// Copies the reprojected color (and depth) wherever memory covers a pixel
/// and keeps the fallback's output elsewhere. Memory wins where it
/// disagrees with the last frame.
#[derive(Debug, Clone)]
pub struct MemoryConditioned<G> {
    fallback: G,
}

pub fn memory_conditioned_generator<G: Generator>(fallback: G) -> MemoryConditioned<G> {
    MemoryConditioned { fallback }
}

impl<G> MemoryConditioned<G> {
    pub fn fallback(&self) -> &G {
        &self.fallback
    }
}

impl<G: Generator> Generator for MemoryConditioned<G> {
    fn generate(&mut self, req: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>> {
        let base = self.fallback.generate(req)?;
        if base.len() != req.reprojections.len() {
            return Err(invalid("one reprojection per target is required"));
        }
        base.into_iter()
            .zip(req.reprojections)
            .map(|(mut img, r)| {
                let n = img.len();
                if r.image.len() != n {
                    return Err(invalid("reprojection size differs from the generated frame"));
                }
                let mut depth = img.depth.take().unwrap_or_else(|| vec![f32::INFINITY; n]);
                let mut mask = img.mask.take().unwrap_or_else(|| depth.iter().map(|d| d.is_finite()).collect());
                let r_depth = r.image.depth.as_deref().unwrap_or(&[]);
                for (i, &covered) in r.mask().iter().enumerate() {
                    if covered {
                        img.rgb[i] = r.image.rgb[i];
                        depth[i] = r_depth[i];
                        mask[i] = true;
                    }
                }
                img.depth = Some(depth);
                img.mask = Some(mask);
                Ok(img)
            })
            .collect()
    }
}

/// Lifts each frame through its depth raster and reports both points and
/// poses under a fixed similarity, as an external reconstructor working in
/// its own gauge would.
#[derive(Debug, Clone)]
pub struct OracleReconstructor {
    pub stride: usize,
    pub perturbation: SimilarityTransform,
    pub output_convention: Convention,
}

impl OracleReconstructor {
    pub fn new(stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride must be at least 1"));
        }
        Ok(Self {
            stride,
            perturbation: SimilarityTransform::identity(),
            output_convention: Convention::WorldToCameraCv,
        })
    }

    pub fn with_perturbation(mut self, t: SimilarityTransform) -> Self {
        self.perturbation = t;
        self
    }
}

pub fn oracle_reconstructor(stride: usize) -> Result<OracleReconstructor> {
    OracleReconstructor::new(stride)
}

impl Reconstructor for OracleReconstructor {
    fn reconstruct(&mut self, frames: &[&EquirectImage], poses: &[CameraPose]) -> Result<Reconstruction> {
        if frames.len() != poses.len() {
            return Err(invalid("frame and pose counts differ"));
        }
        let t = &self.perturbation;
        let mut out = Reconstruction::default();
        for (i, (img, pose)) in frames.iter().zip(poses).enumerate() {
            let pts = unproject(img, pose, self.stride, None, i as u32)?
                .into_iter()
                .map(|p| MemPoint::new(t.apply(&p.position()), p.rgb, p.confidence, p.frame_id))
                .collect();
            out.points.push(pts);
            out.poses.push(t.apply_to_pose(pose).to_convention(self.output_convention));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreConfig {
    /// Frames per clip including the shared first frame.
    pub clip_len: usize,
    pub memory: MemoryConfig,
    /// Retrieval radius around the clip's anchor camera (meters).
    pub retrieval_radius: f64,
    pub raster: RasterConfig,
    pub build_plucker: bool,
    /// Keep every step's reprojections in the returned run.
    pub keep_reprojections: bool,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            clip_len: 25,
            memory: MemoryConfig::default(),
            retrieval_radius: 10.0,
            raster: RasterConfig::default(),
            build_plucker: true,
            keep_reprojections: true,
        }
    }
}

/// Frame range and poses of one generated clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    /// Global index of the clip's first (shared) frame.
    pub start: usize,
    pub poses: Vec<CameraPose>,
}

impl ClipRecord {
    pub fn end(&self) -> usize {
        self.start + self.poses.len()
    }
}

/// What one step retrieved, rendered and stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub step: usize,
    /// Frames retrieved around the anchor for reprojection.
    pub retrieved: Vec<u32>,
    /// Points gathered from the retrieved frames.
    pub context_points: usize,
    /// Mean mask coverage over the step's reprojections.
    pub mean_coverage: f64,
    pub update: UpdateReport,
    pub memory_frames: usize,
    pub memory_points: usize,
}

#[derive(Debug, Clone)]
pub struct ExplorationRun {
    /// Every frame by global index; frame 0 is the initial frame.
    pub frames: Vec<EquirectImage>,
    pub poses: Vec<CameraPose>,
    pub clips: Vec<ClipRecord>,
    /// Reprojections per step, one per target; empty when not kept.
    pub reprojections: Vec<Vec<Reprojection>>,
    pub steps: Vec<StepSummary>,
    pub memory: PointCloudMemory,
    pub config: ExploreConfig,
}

impl ExplorationRun {
    pub fn initial(&self) -> &EquirectImage {
        &self.frames[0]
    }

    pub fn clip_frames(&self, t: usize) -> &[EquirectImage] {
        let c = &self.clips[t];
        &self.frames[c.start..c.end()]
    }

    pub fn final_frame(&self) -> &EquirectImage {
        self.frames.last().expect("run has frames")
    }
}

/// Observer invoked after every step, e.g. to persist outputs.
pub trait StepObserver {
    fn on_step(&mut self, run: &ExplorationRun, reprojections: &[Reprojection], summary: &StepSummary) -> Result<()>;
}

impl StepObserver for () {
    fn on_step(&mut self, _: &ExplorationRun, _: &[Reprojection], _: &StepSummary) -> Result<()> {
        Ok(())
    }
}

fn wrap_generator(step: usize, e: Error) -> Error {
    match e {
        Error::Generator { message, .. } => Error::Generator { step, message },
        other => Error::Generator {
            step,
            message: other.to_string(),
        },
    }
}

fn wrap_reconstructor(step: usize, e: Error) -> Error {
    match e {
        Error::Reconstructor { message, .. } => Error::Reconstructor { step, message },
        other => Error::Reconstructor {
            step,
            message: other.to_string(),
        },
    }
}

pub fn explore(
    x0: &EquirectImage,
    poses: &[CameraPose],
    generator: &mut dyn Generator,
    reconstructor: &mut dyn Reconstructor,
    cfg: &ExploreConfig,
) -> Result<ExplorationRun> {
    explore_observed(x0, poses, generator, reconstructor, cfg, &mut ())
}

/// Runs the loop: for each clip window, retrieve nearby memory at the anchor,
/// reproject it to the targets, generate, then fold the clip into memory.
///
/// Steps are numbered from 1. The first step sees empty memory, so its
/// reprojections are all background with a false mask; the initial frame
/// enters memory together with the first clip.
pub fn explore_observed(
    x0: &EquirectImage,
    poses: &[CameraPose],
    generator: &mut dyn Generator,
    reconstructor: &mut dyn Reconstructor,
    cfg: &ExploreConfig,
    observer: &mut dyn StepObserver,
) -> Result<ExplorationRun> {
    let windows = clip_targets(poses, cfg.clip_len, 1)?;
    if !(cfg.retrieval_radius >= 0.0) {
        return Err(invalid("retrieval radius must be non-negative"));
    }
    if u32::try_from(poses.len()).is_err() {
        return Err(invalid("too many poses"));
    }
    let (w, h) = (x0.width(), x0.height());
    let mut run = ExplorationRun {
        frames: vec![x0.clone()],
        poses: poses.to_vec(),
        clips: Vec::with_capacity(windows.len()),
        reprojections: Vec::new(),
        steps: Vec::with_capacity(windows.len()),
        memory: PointCloudMemory::new(cfg.memory)?,
        config: *cfg,
    };
    for (k, window) in windows.iter().enumerate() {
        let step = k + 1;
        let anchor = window.poses[0];
        let targets = &window.poses[1..];

        let retrieved = run.memory.retrieve_local(&anchor, cfg.retrieval_radius);
        let slices = run.memory.frame_slices(&retrieved)?;
        let context_points = slices.iter().map(|s| s.len()).sum();
        let reprojections = targets
            .iter()
            .map(|pose| reproject_chunks(slices.iter().copied(), pose, w, h, &cfg.raster))
            .collect::<Result<Vec<_>>>()?;
        let plucker = if cfg.build_plucker {
            plucker_field(targets, w, h)?
        } else {
            Vec::new()
        };

        let last_frame = &run.frames[window.start];
        let req = GenerateRequest {
            step,
            last_frame,
            anchor: &anchor,
            targets,
            reprojections: &reprojections,
            plucker: &plucker,
        };
        let generated = generator.generate(&req).map_err(|e| wrap_generator(step, e))?;
        if generated.len() != targets.len() {
            return Err(Error::Generator {
                step,
                message: format!("expected {} frames, got {}", targets.len(), generated.len()),
            });
        }
        if let Some(bad) = generated.iter().position(|g| !g.same_shape(last_frame)) {
            return Err(Error::Generator {
                step,
                message: format!("frame {bad} has the wrong size"),
            });
        }
        run.frames.extend(generated);

        let posed: Vec<PosedFrame<'_>> = (window.start..window.end())
            .map(|i| PosedFrame {
                id: i as u32,
                image: &run.frames[i],
                pose: poses[i],
            })
            .collect();
        let update = run
            .memory
            .update_memory(&posed, &run.frames, cfg.retrieval_radius, reconstructor)
            .map_err(|e| wrap_reconstructor(step, e))?;

        let mean_coverage = if reprojections.is_empty() {
            0.0
        } else {
            reprojections.iter().map(|r| r.covered_fraction).sum::<f64>() / reprojections.len() as f64
        };
        let summary = StepSummary {
            step,
            retrieved,
            context_points,
            mean_coverage,
            update,
            memory_frames: run.memory.frame_count(),
            memory_points: run.memory.point_count(),
        };
        run.clips.push(ClipRecord {
            start: window.start,
            poses: window.poses.clone(),
        });
        observer.on_step(&run, &reprojections, &summary)?;
        run.steps.push(summary);
        if cfg.keep_reprojections {
            run.reprojections.push(reprojections);
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn box_scene() -> Vec<MemPoint> {
        let mut pts = Vec::new();
        let n = 40;
        for a in 0..n {
            for b in 0..n {
                let s = -2.0 + 4.0 * (a as f64 + 0.5) / n as f64;
                let t = -2.0 + 4.0 * (b as f64 + 0.5) / n as f64;
                for (p, rgb) in [
                    (Vector3::new(s, t, 2.0), [1.0, 0.0, 0.0]),
                    (Vector3::new(s, t, -2.0), [0.0, 1.0, 0.0]),
                    (Vector3::new(2.0, s, t), [0.0, 0.0, 1.0]),
                    (Vector3::new(-2.0, s, t), [1.0, 1.0, 0.0]),
                    (Vector3::new(s, 2.0, t), [0.0, 1.0, 1.0]),
                    (Vector3::new(s, -2.0, t), [1.0, 0.0, 1.0]),
                ] {
                    pts.push(MemPoint::new(p, rgb, 1.0, 0));
                }
            }
        }
        pts
    }

    fn line(n: usize) -> Vec<CameraPose> {
        (0..n)
            .map(|i| CameraPose::from_yaw(Vector3::new(0.02 * i as f64, 0.0, 0.0), 0.0))
            .collect()
    }

    #[test]
    fn chains_clips_and_counts_frames() {
        let scene = box_scene();
        let poses = line(9);
        let cfg = ExploreConfig {
            clip_len: 5,
            ..ExploreConfig::default()
        };
        let x0 = render_scene(&scene, &poses[0], 32, 16, &cfg.raster).unwrap().image;
        let mut g = oracle_generator(scene, 0.0, 0).unwrap();
        let mut r = oracle_reconstructor(1).unwrap();
        let run = explore(&x0, &poses, &mut g, &mut r, &cfg).unwrap();
        assert_eq!(run.frames.len(), 9);
        assert_eq!(run.clips.len(), 2);
        assert_eq!(run.clip_frames(0).last(), run.clip_frames(1).first());
        assert!(run.reprojections[0].iter().all(|r| r.covered_fraction == 0.0));
        assert!(run.steps[1].mean_coverage > 0.5);
        assert_eq!(run.memory.frame_count(), 9);
    }

    struct Failing;

    impl Generator for Failing {
        fn generate(&mut self, _: &GenerateRequest<'_>) -> Result<Vec<EquirectImage>> {
            Err(invalid("boom"))
        }
    }

    #[test]
    fn generator_errors_carry_step() {
        let poses = line(5);
        let x0 = EquirectImage::filled(8, 4, [0.2; 3]).unwrap();
        let mut r = oracle_reconstructor(1).unwrap();
        let cfg = ExploreConfig {
            clip_len: 5,
            ..ExploreConfig::default()
        };
        let err = explore(&x0, &poses, &mut Failing, &mut r, &cfg).unwrap_err();
        assert!(matches!(err, Error::Generator { step: 1, .. }));
    }

    #[test]
    fn reconstructor_needs_depth() {
        let img = EquirectImage::filled(8, 4, [0.2; 3]).unwrap();
        let mut r = oracle_reconstructor(1).unwrap();
        assert!(r.reconstruct(&[&img], &[CameraPose::identity()]).is_err());
    }
}
