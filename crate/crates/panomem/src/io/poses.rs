use std::path::Path;

use panomem_core::trajectory::{Trajectory, TrajectoryKind};
use panomem_core::{CameraPose, Convention};
use serde::{Deserialize, Serialize};

use super::{read_bytes, write_json};
use crate::error::{Error, Result};

/// One entry of the pose interchange file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub frame: usize,
    pub pos: [f64; 3],
    /// `[w, x, y, z]`.
    pub quat: [f64; 4],
    pub convention: String,
}

/// A trajectory: the pose records plus how they were generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub kind: String,
    pub step: f64,
    pub seed: Option<u64>,
    pub poses: Vec<PoseRecord>,
}

pub fn records_from_poses(poses: &[CameraPose]) -> Vec<PoseRecord> {
    poses
        .iter()
        .enumerate()
        .map(|(frame, p)| {
            let v = p.position();
            PoseRecord {
                frame,
                pos: [v.x, v.y, v.z],
                quat: p.quat_wxyz(),
                convention: p.convention().tag().to_string(),
            }
        })
        .collect()
}

/// Converts records to poses ordered by frame index. Frame indices must be
/// unique.
pub fn poses_from_records(path: &Path, records: &[PoseRecord]) -> Result<Vec<CameraPose>> {
    let mut sorted: Vec<&PoseRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.frame);
    if sorted.windows(2).any(|w| w[0].frame == w[1].frame) {
        return Err(Error::format(path, "duplicate frame index"));
    }
    sorted
        .into_iter()
        .map(|r| {
            let conv = Convention::from_tag(&r.convention).ok_or_else(|| {
                Error::format(path, format!("frame {}: unknown convention {:?}", r.frame, r.convention))
            })?;
            CameraPose::new(r.pos, r.quat, conv).map_err(|e| Error::format(path, format!("frame {}: {e}", r.frame)))
        })
        .collect()
}

pub fn write_poses(path: &Path, poses: &[CameraPose]) -> Result<()> {
    write_json(path, &records_from_poses(poses))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyPoseFile {
    Bare(Vec<PoseRecord>),
    Trajectory(TrajectoryFile),
}

fn parse(path: &Path) -> Result<AnyPoseFile> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, format!("not a pose or trajectory file: {e}")))
}

/// Reads poses from either a bare pose array or a trajectory file.
pub fn read_poses(path: &Path) -> Result<Vec<CameraPose>> {
    match parse(path)? {
        AnyPoseFile::Bare(r) => poses_from_records(path, &r),
        AnyPoseFile::Trajectory(t) => poses_from_records(path, &t.poses),
    }
}

pub fn write_trajectory(path: &Path, t: &Trajectory) -> Result<()> {
    write_json(
        path,
        &TrajectoryFile {
            kind: t.kind.name().to_string(),
            step: t.step,
            seed: t.seed,
            poses: records_from_poses(&t.poses),
        },
    )
}

/// Reads a trajectory file. A bare pose array becomes a curve whose step is
/// the mean spacing.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    match parse(path)? {
        AnyPoseFile::Trajectory(t) => {
            let kind = TrajectoryKind::from_name(&t.kind)
                .ok_or_else(|| Error::format(path, format!("unknown trajectory kind {:?}", t.kind)))?;
            Ok(Trajectory {
                poses: poses_from_records(path, &t.poses)?,
                step: t.step,
                kind,
                seed: t.seed,
            })
        }
        AnyPoseFile::Bare(r) => {
            let poses = poses_from_records(path, &r)?;
            let total: f64 = poses.windows(2).map(|w| (w[1].center() - w[0].center()).norm()).sum();
            let step = if poses.len() > 1 { total / (poses.len() - 1) as f64 } else { 0.0 };
            Ok(Trajectory {
                poses,
                step,
                kind: TrajectoryKind::Curve,
                seed: None,
            })
        }
    }
}
