use std::path::Path;

use panomem_core::synthworld::{make_scene, ColorScheme, SceneSpec};
use panomem_core::MemPoint;
use serde::{Deserialize, Serialize};

use super::{read_json, read_ply, write_json};
use crate::error::{Error, Result};

/// JSON form of [`SceneSpec`]. Missing fields take the room-1 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpecFile {
    pub seed: u64,
    pub extent: [f64; 3],
    pub enclosed: bool,
    pub pillars: usize,
    pub boxes: usize,
    pub spheres: usize,
    pub density: f64,
    /// `"solid"` or `"checker"`.
    pub colors: String,
}

impl Default for SceneSpecFile {
    fn default() -> Self {
        SceneSpec::room_1().into()
    }
}

impl From<SceneSpec> for SceneSpecFile {
    fn from(s: SceneSpec) -> Self {
        Self {
            seed: s.seed,
            extent: s.extent,
            enclosed: s.enclosed,
            pillars: s.pillars,
            boxes: s.boxes,
            spheres: s.spheres,
            density: s.density,
            colors: match s.colors {
                ColorScheme::Solid => "solid",
                ColorScheme::Checker => "checker",
            }
            .to_string(),
        }
    }
}

impl SceneSpecFile {
    pub fn to_spec(&self) -> std::result::Result<SceneSpec, String> {
        let colors = match self.colors.as_str() {
            "solid" => ColorScheme::Solid,
            "checker" => ColorScheme::Checker,
            other => return Err(format!("unknown color scheme {other:?}")),
        };
        let spec = SceneSpec {
            seed: self.seed,
            extent: self.extent,
            enclosed: self.enclosed,
            pillars: self.pillars,
            boxes: self.boxes,
            spheres: self.spheres,
            density: self.density,
            colors,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

pub fn read_scene_spec(path: &Path) -> Result<SceneSpec> {
    let f: SceneSpecFile = read_json(path)?;
    f.to_spec().map_err(|m| Error::format(path, m))
}

pub fn write_scene_spec(path: &Path, spec: &SceneSpec) -> Result<()> {
    write_json(path, &SceneSpecFile::from(spec.clone()))
}

/// Resolves a scene argument: the name `room-1`, a `.ply` point cloud, or a
/// scene-spec JSON file.
pub fn load_scene(arg: &str) -> Result<Vec<MemPoint>> {
    if arg == "room-1" {
        return Ok(make_scene(&SceneSpec::room_1())?);
    }
    let path = Path::new(arg);
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => read_ply(path, 0),
        Some("json") => Ok(make_scene(&read_scene_spec(path)?)?),
        _ => Err(Error::format(path, "scene must be room-1, a .ply file or a .json spec")),
    }
}
