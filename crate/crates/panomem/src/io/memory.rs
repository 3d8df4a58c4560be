use std::path::Path;

use panomem_core::{MemoryConfig, PointCloudMemory};
use serde::{Deserialize, Serialize};

use super::{read_json, read_ply, write_json, write_ply, PoseRecord};
use crate::error::{Error, Result};

/// `manifest.json` of a memory directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryManifest {
    /// Every frame held by the memory when this directory was written.
    pub frames: Vec<u32>,
    /// Frames whose PLY files live in this directory.
    pub stored: Vec<u32>,
    pub confidence_threshold: f32,
    pub frame_cap: usize,
    pub cell_size: f64,
}

fn ply_name(id: u32) -> String {
    format!("frame_{id:04}.ply")
}

/// Writes the frames `ids` (all frames when `None`) as PLY files plus
/// `poses.json` and `manifest.json`.
pub fn save_memory(dir: &Path, mem: &PointCloudMemory, ids: Option<&[u32]>) -> Result<()> {
    let all: Vec<u32> = mem.frame_ids().collect();
    let stored = ids.map_or_else(|| all.clone(), <[u32]>::to_vec);
    let mut records = Vec::with_capacity(stored.len());
    for &id in &stored {
        let rec = mem.frame(id).ok_or(panomem_core::Error::NotFound(id))?;
        write_ply(&dir.join(ply_name(id)), &rec.points)?;
        let mut r = super::records_from_poses(&[rec.pose]).remove(0);
        r.frame = id as usize;
        records.push(r);
    }
    write_json(&dir.join("poses.json"), &records)?;
    let cfg = mem.config();
    write_json(
        &dir.join("manifest.json"),
        &MemoryManifest {
            frames: all,
            stored,
            confidence_threshold: cfg.confidence_threshold,
            frame_cap: cfg.frame_cap,
            cell_size: cfg.cell_size,
        },
    )
}

/// Rebuilds a memory from one or more directories written by
/// [`save_memory`], in order. The last manifest supplies the configuration.
pub fn load_memory(dirs: &[&Path]) -> Result<PointCloudMemory> {
    let last = dirs.last().ok_or_else(|| Error::usage("no memory directories given"))?;
    let m: MemoryManifest = read_json(&last.join("manifest.json"))?;
    let mut mem = PointCloudMemory::new(MemoryConfig {
        confidence_threshold: m.confidence_threshold,
        frame_cap: m.frame_cap,
        cell_size: m.cell_size,
    })?;
    for dir in dirs {
        let manifest: MemoryManifest = read_json(&dir.join("manifest.json"))?;
        let poses_path = dir.join("poses.json");
        let records: Vec<PoseRecord> = read_json(&poses_path)?;
        for id in manifest.stored {
            let rec = records
                .iter()
                .find(|r| r.frame == id as usize)
                .ok_or_else(|| Error::format(&poses_path, format!("no pose for frame {id}")))?;
            let pose = super::poses_from_records(&poses_path, std::slice::from_ref(rec))?.remove(0);
            let points = read_ply(&dir.join(ply_name(id)), id)?;
            mem.insert_frame(id, pose, points)?;
        }
    }
    Ok(mem)
}
