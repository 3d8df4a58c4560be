//! The explicit 3D memory: colored, confidence-tagged points grouped by the
//! frame that produced them, with locality-aware retrieval.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use nalgebra::Vector3;
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::explore::Reconstructor;
use crate::geometry::{align_poses, CameraPose};
use crate::sphere::EquirectImage;

/// One colored point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemPoint {
    pub xyz: [f32; 3],
    pub rgb: [f32; 3],
    pub confidence: f32,
    pub frame_id: u32,
}

impl MemPoint {
    pub fn new(xyz: Vector3<f64>, rgb: [f32; 3], confidence: f32, frame_id: u32) -> Self {
        Self {
            xyz: [xyz.x as f32, xyz.y as f32, xyz.z as f32],
            rgb,
            confidence,
            frame_id,
        }
    }

    #[inline]
    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.xyz[0] as f64, self.xyz[1] as f64, self.xyz[2] as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryConfig {
    /// Points below this confidence are dropped on insertion.
    pub confidence_threshold: f32,
    /// Upper bound on frames returned by [`PointCloudMemory::retrieve_local`].
    pub frame_cap: usize,
    /// Edge length of the spatial hash cells over camera positions (meters).
    pub cell_size: f64,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.5,
            frame_cap: 99,
            cell_size: 10.0,
        }
    }
}

/// Points and pose stored for one source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub pose: CameraPose,
    pub points: Vec<MemPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InsertReport {
    pub stored: usize,
    pub dropped: usize,
}

/// A frame handed to [`PointCloudMemory::update_memory`].
#[derive(Debug, Clone, Copy)]
pub struct PosedFrame<'a> {
    pub id: u32,
    pub image: &'a EquirectImage,
    pub pose: CameraPose,
}

/// Looks up previously seen frames by id, for reconstruction context.
pub trait FrameSource {
    fn frame(&self, id: u32) -> Option<&EquirectImage>;
}

impl FrameSource for [EquirectImage] {
    fn frame(&self, id: u32) -> Option<&EquirectImage> {
        self.get(id as usize)
    }
}

impl FrameSource for Vec<EquirectImage> {
    fn frame(&self, id: u32) -> Option<&EquirectImage> {
        self.get(id as usize)
    }
}

/// Outcome of one memory update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateReport {
    /// Frames inserted by this update.
    pub inserted: Vec<u32>,
    /// Previously stored frames fed to the reconstructor as context.
    pub context: Vec<u32>,
    pub stored: usize,
    pub dropped: usize,
    /// Scale of the estimated-to-ground-truth alignment.
    pub alignment_scale: f64,
}

type Cell = [i64; 3];

#[derive(Debug, Clone, Default)]
pub struct PointCloudMemory {
    config: MemoryConfig,
    frames: BTreeMap<u32, FrameRecord>,
    grid: BTreeMap<Cell, Vec<u32>>,
    point_count: usize,
}

impl PointCloudMemory {
    pub fn new(config: MemoryConfig) -> Result<Self> {
        if config.frame_cap < 1 {
            return Err(invalid("frame_cap must be at least 1"));
        }
        if !(0.0..=1.0).contains(&config.confidence_threshold) {
            return Err(invalid("confidence_threshold must lie in [0, 1]"));
        }
        if !(config.cell_size > 0.0 && config.cell_size.is_finite()) {
            return Err(invalid("cell_size must be positive"));
        }
        Ok(Self {
            config,
            ..Self::default()
        })
    }

    pub fn config(&self) -> &MemoryConfig {
        &self.config
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn contains(&self, frame_id: u32) -> bool {
        self.frames.contains_key(&frame_id)
    }

    pub fn frame_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.frames.keys().copied()
    }

    pub fn frame(&self, frame_id: u32) -> Option<&FrameRecord> {
        self.frames.get(&frame_id)
    }

    fn cell_of(&self, p: &Vector3<f64>) -> Cell {
        let s = self.config.cell_size;
        [
            (p.x / s).floor() as i64,
            (p.y / s).floor() as i64,
            (p.z / s).floor() as i64,
        ]
    }

    /// Stores the points of `frame_id` that pass the confidence threshold.
    pub fn insert_frame(
        &mut self,
        frame_id: u32,
        pose: CameraPose,
        points: Vec<MemPoint>,
    ) -> Result<InsertReport> {
        if self.frames.contains_key(&frame_id) {
            return Err(Error::Conflict(frame_id));
        }
        let total = points.len();
        let threshold = self.config.confidence_threshold;
        let kept: Vec<MemPoint> = points
            .into_iter()
            .filter(|p| p.confidence >= threshold)
            .map(|mut p| {
                p.frame_id = frame_id;
                p
            })
            .collect();
        if kept.iter().any(|p| p.xyz.iter().any(|c| !c.is_finite())) {
            return Err(invalid(format!("frame {frame_id} has non-finite point coordinates")));
        }
        let report = InsertReport {
            stored: kept.len(),
            dropped: total - kept.len(),
        };
        let cell = self.cell_of(&pose.center());
        self.grid.entry(cell).or_default().push(frame_id);
        self.point_count += kept.len();
        self.frames.insert(frame_id, FrameRecord { pose, points: kept });
        Ok(report)
    }

    /// Frames whose camera lies within `radius` of the query camera, nearest
    /// first (ties by lower id), truncated to `frame_cap`.
    pub fn retrieve_local(&self, query: &CameraPose, radius: f64) -> Vec<u32> {
        if self.frames.is_empty() || !(radius >= 0.0) {
            return Vec::new();
        }
        let q = query.center();
        let mut hits: Vec<(f64, u32)> = Vec::new();
        let mut consider = |id: u32| {
            let c = self.frames[&id].pose.center();
            let d = (c - q).norm();
            if d <= radius {
                hits.push((d, id));
            }
        };
        let reach = (radius / self.config.cell_size).ceil();
        let cells_to_scan = (2.0 * reach + 1.0).powi(3);
        if !reach.is_finite() || cells_to_scan > self.grid.len() as f64 {
            self.frames.keys().for_each(|&id| consider(id));
        } else {
            let reach = reach as i64;
            let base = self.cell_of(&q);
            for dx in -reach..=reach {
                for dy in -reach..=reach {
                    for dz in -reach..=reach {
                        let cell = [base[0] + dx, base[1] + dy, base[2] + dz];
                        if let Some(ids) = self.grid.get(&cell) {
                            ids.iter().for_each(|&id| consider(id));
                        }
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        hits.truncate(self.config.frame_cap);
        hits.into_iter().map(|(_, id)| id).collect()
    }

    /// Point slices of the given frames in ascending id order.
    pub fn frame_slices(&self, frame_ids: &[u32]) -> Result<Vec<&[MemPoint]>> {
        let ids: BTreeSet<u32> = frame_ids.iter().copied().collect();
        ids.into_iter()
            .map(|id| {
                self.frames
                    .get(&id)
                    .map(|f| f.points.as_slice())
                    .ok_or(Error::NotFound(id))
            })
            .collect()
    }

    /// Concatenated points of the given frames, ordered by frame id then
    /// insertion order.
    pub fn gather_points(&self, frame_ids: &[u32]) -> Result<Vec<MemPoint>> {
        Ok(self.frame_slices(frame_ids)?.concat())
    }

    /// Reconstructs `frames` together with nearby stored context, aligns the
    /// estimated poses onto the given ones and inserts the new frames.
    ///
    /// Frames already in memory are used as context only. The reconstructor
    /// sees at most `frame_cap` frames in total.
    pub fn update_memory(
        &mut self,
        frames: &[PosedFrame<'_>],
        archive: &dyn FrameSource,
        radius: f64,
        reconstructor: &mut dyn Reconstructor,
    ) -> Result<UpdateReport> {
        let new: Vec<&PosedFrame<'_>> = frames.iter().filter(|f| !self.contains(f.id)).collect();
        let Some(last) = new.last() else {
            return Ok(UpdateReport {
                alignment_scale: 1.0,
                ..UpdateReport::default()
            });
        };
        let budget = self.config.frame_cap.saturating_sub(new.len());
        let new_ids: BTreeSet<u32> = new.iter().map(|f| f.id).collect();
        if new_ids.len() != new.len() {
            return Err(invalid("duplicate frame ids in update"));
        }
        let context: Vec<u32> = self
            .retrieve_local(&last.pose, radius)
            .into_iter()
            .filter(|id| !new_ids.contains(id))
            .take(budget)
            .collect();

        let mut images: Vec<&EquirectImage> = Vec::with_capacity(context.len() + new.len());
        let mut poses: Vec<CameraPose> = Vec::with_capacity(context.len() + new.len());
        for &id in &context {
            let img = archive.frame(id).ok_or(Error::NotFound(id))?;
            images.push(img);
            poses.push(self.frames[&id].pose);
        }
        for f in &new {
            images.push(f.image);
            poses.push(f.pose);
        }

        let rec = reconstructor.reconstruct(&images, &poses)?;
        if rec.points.len() != images.len() || rec.poses.len() != images.len() {
            return Err(Error::Reconstructor {
                step: 0,
                message: format!(
                    "expected {} outputs, got {} point sets and {} poses",
                    images.len(),
                    rec.points.len(),
                    rec.poses.len()
                ),
            });
        }
        let align = align_poses(&rec.poses, &poses, true)?;

        let mut report = UpdateReport {
            context: context.clone(),
            alignment_scale: align.scale,
            ..UpdateReport::default()
        };
        let offset = context.len();
        for (k, f) in new.iter().enumerate() {
            let pts = rec.points[offset + k]
                .iter()
                .map(|p| MemPoint::new(align.apply(&p.position()), p.rgb, p.confidence, f.id))
                .collect();
            let ins = self.insert_frame(f.id, f.pose, pts)?;
            report.inserted.push(f.id);
            report.stored += ins.stored;
            report.dropped += ins.dropped;
        }
        Ok(report)
    }
}
