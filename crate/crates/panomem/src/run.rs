//! Run-directory layout written by `explore` and read by `eval`.
//!
//! ```text
//! run/
//!   .lock                 present while a process writes the run
//!   manifest.json         RunManifest
//!   poses.json            every pose, by global frame index
//!   gt/frame_0000.png     direct scene renders, when a scene is known
//!   clip_01/              one directory per step
//!     frame_000.png ...   the clip's frames, frame_000 shared with the previous clip
//!     depth_000.f32, mask_000.png
//!     reproj_001.png, reproj_001_depth.f32, reproj_001_mask.png
//!     plucker_001.f32     only with --write-plucker
//!     poses.json, step.json
//!   memory/step_01/       frames inserted at that step (PLY + poses + manifest)
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use panomem_core::explore::{ExplorationRun, StepObserver, StepSummary};
use panomem_core::sphere::plucker_field;
use panomem_core::{EquirectImage, Reprojection};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{
    letterbox, read_json, read_png, save_memory, write_depth, write_json, write_mask_png, write_plucker, write_png,
    write_poses, write_rgb_png, PoseRecord,
};

pub const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".lock";

pub fn clip_dir_name(step: usize) -> String {
    format!("clip_{step:02}")
}

pub fn gt_frame_name(index: usize) -> String {
    format!("frame_{index:04}.png")
}

/// Exclusive claim on a run directory, released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipEntry {
    pub step: usize,
    pub dir: String,
    /// Global index of the clip's first frame.
    pub start: usize,
    /// One past the global index of its last frame.
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub generator: String,
    pub reconstructor: String,
    pub scene: Option<String>,
    /// Directory of ground-truth renders, relative to the run.
    pub ground_truth: Option<String>,
    pub clips: Vec<ClipEntry>,
    /// Every clip starts with exactly the previous clip's last frame.
    pub boundary_chaining: bool,
    pub loop_consistency: Option<f64>,
    pub config: RunConfig,
}

fn write_color(path: &Path, img: &EquirectImage, cfg: &RunConfig) -> Result<()> {
    if cfg.letterbox {
        let (w, h, rgb) = letterbox(img, cfg.letterbox_height())?;
        write_rgb_png(path, w, h, &rgb)
    } else {
        write_png(path, img)
    }
}

/// Writes the raster pair for an image carrying depth and mask.
fn write_geometry(dir: &Path, stem: &str, img: &EquirectImage) -> Result<()> {
    if img.depth.is_some() || img.mask.is_some() {
        write_depth(&dir.join(format!("{stem}_depth.f32")), img)?;
        let mask: Vec<bool> = (0..img.len()).map(|i| img.is_covered(i)).collect();
        write_mask_png(&dir.join(format!("{stem}_mask.png")), img.width(), img.height(), &mask)?;
    }
    Ok(())
}

/// Step observer that persists each clip as it completes.
pub struct RunWriter<'a> {
    dir: PathBuf,
    cfg: &'a RunConfig,
    pub write_plucker: bool,
    failure: Option<Error>,
}

impl<'a> RunWriter<'a> {
    pub fn new(dir: &Path, cfg: &'a RunConfig) -> Self {
        Self {
            dir: dir.to_path_buf(),
            cfg,
            write_plucker: false,
            failure: None,
        }
    }

    /// The I/O error that stopped the run, if any.
    pub fn take_failure(&mut self) -> Option<Error> {
        self.failure.take()
    }

    fn write_step(&self, run: &ExplorationRun, reps: &[Reprojection], s: &StepSummary) -> Result<()> {
        let t = s.step;
        let clip = &run.clips[t - 1];
        let dir = self.dir.join(clip_dir_name(t));
        for (k, frame) in run.clip_frames(t - 1).iter().enumerate() {
            write_color(&dir.join(format!("frame_{k:03}.png")), frame, self.cfg)?;
            if frame.depth.is_some() {
                write_depth(&dir.join(format!("depth_{k:03}.f32")), frame)?;
                let mask: Vec<bool> = (0..frame.len()).map(|i| frame.is_covered(i)).collect();
                write_mask_png(&dir.join(format!("mask_{k:03}.png")), frame.width(), frame.height(), &mask)?;
            }
        }
        for (k, r) in reps.iter().enumerate() {
            let stem = format!("reproj_{:03}", k + 1);
            write_color(&dir.join(format!("{stem}.png")), &r.image, self.cfg)?;
            write_geometry(&dir, &stem, &r.image)?;
        }
        if self.write_plucker {
            let (w, h) = (run.initial().width(), run.initial().height());
            for (k, f) in plucker_field(&clip.poses[1..], w, h)?.iter().enumerate() {
                write_plucker(&dir.join(format!("plucker_{:03}.f32", k + 1)), f)?;
            }
        }
        let records: Vec<PoseRecord> = crate::io::records_from_poses(&clip.poses)
            .into_iter()
            .map(|mut r| {
                r.frame += clip.start;
                r
            })
            .collect();
        write_json(&dir.join("poses.json"), &records)?;
        let u = &s.update;
        write_json(
            &dir.join("step.json"),
            &json!({
                "step": t,
                "start": clip.start,
                "end": clip.end(),
                "retrieved": s.retrieved,
                "context_points": s.context_points,
                "mean_coverage": s.mean_coverage,
                "inserted": u.inserted,
                "context": u.context,
                "stored_points": u.stored,
                "dropped_points": u.dropped,
                "alignment_scale": u.alignment_scale,
                "memory_frames": s.memory_frames,
                "memory_points": s.memory_points,
            }),
        )?;
        save_memory(
            &self.dir.join("memory").join(format!("step_{t:02}")),
            &run.memory,
            Some(&u.inserted),
        )
    }
}

impl StepObserver for RunWriter<'_> {
    fn on_step(
        &mut self,
        run: &ExplorationRun,
        reps: &[Reprojection],
        s: &StepSummary,
    ) -> panomem_core::Result<()> {
        self.write_step(run, reps, s).map_err(|e| {
            let msg = e.to_string();
            self.failure = Some(e);
            panomem_core::Error::InvalidArgument(format!("writing step {}: {msg}", s.step))
        })
    }
}

/// Writes the run-level files once every step has been persisted.
pub fn finish_run(dir: &Path, run: &ExplorationRun, manifest: &RunManifest) -> Result<()> {
    write_poses(&dir.join("poses.json"), &run.poses)?;
    write_json(&dir.join(MANIFEST), manifest)
}

pub fn clip_entries(run: &ExplorationRun) -> Vec<ClipEntry> {
    run.clips
        .iter()
        .enumerate()
        .map(|(i, c)| ClipEntry {
            step: i + 1,
            dir: clip_dir_name(i + 1),
            start: c.start,
            end: c.end(),
        })
        .collect()
}

/// Whether every clip's first frame equals the previous clip's last.
pub fn boundary_chaining(run: &ExplorationRun) -> bool {
    (1..run.clips.len()).all(|t| run.clip_frames(t).first() == run.clip_frames(t - 1).last())
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    read_json(&dir.join(MANIFEST))
}

/// Generated frames by global index, read back from the clip directories.
pub fn read_run_frames(dir: &Path, manifest: &RunManifest) -> Result<Vec<EquirectImage>> {
    let mut frames: Vec<Option<EquirectImage>> = vec![None; manifest.frames];
    for c in &manifest.clips {
        for (k, slot) in frames.iter_mut().enumerate().take(c.end).skip(c.start) {
            if slot.is_none() {
                *slot = Some(read_png(&dir.join(&c.dir).join(format!("frame_{:03}.png", k - c.start)))?);
            }
        }
    }
    frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.ok_or_else(|| Error::format(dir.join(MANIFEST), format!("frame {i} is not in any clip"))))
        .collect()
}

/// Ground-truth renders, when the run recorded them.
pub fn read_ground_truth(dir: &Path, manifest: &RunManifest) -> Result<Option<Vec<EquirectImage>>> {
    let Some(gt) = &manifest.ground_truth else {
        return Ok(None);
    };
    (0..manifest.frames)
        .map(|i| read_png(&dir.join(gt).join(gt_frame_name(i))))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}
