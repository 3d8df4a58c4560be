//! On-disk formats. Every writer goes through a temporary sibling file and a
//! rename, so a file either exists complete or not at all.

mod image;
mod memory;
mod ply;
mod poses;
mod report;
mod scene;
mod tensor;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use self::image::{
    letterbox, read_mask_png, read_png, read_rgb_png, unletterbox, write_mask_png, write_png, write_rgb_png,
};
pub use self::memory::{load_memory, save_memory, MemoryManifest};
pub use self::ply::{read_ply, write_ply};
pub use self::poses::{
    read_poses, read_trajectory, records_from_poses, poses_from_records, write_poses, write_trajectory, PoseRecord,
    TrajectoryFile,
};
pub use self::report::{report_json, write_report_csv, write_report_json};
pub use self::scene::{load_scene, read_scene_spec, write_scene_spec, SceneSpecFile};
pub use self::tensor::{
    read_depth, read_plucker, read_tensor, write_depth, write_plucker, write_tensor, TensorHeader,
};

use crate::error::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to `path` atomically, creating parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).map_err(|e| Error::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}
