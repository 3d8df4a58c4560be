//! Run configuration. Values resolve in the order flags > `PANOMEM_*`
//! environment variables > JSON config file > defaults.

use std::path::Path;

use panomem_core::explore::ExploreConfig;
use panomem_core::{MemoryConfig, RasterConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::read_json;

pub const ENV_PREFIX: &str = "PANOMEM_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Panorama width; must be twice `height`.
    pub width: usize,
    pub height: usize,
    /// Write color frames padded to 16:9 (1024×576 at the default size).
    pub letterbox: bool,
    /// Frames per clip including the shared first frame.
    pub clip_len: usize,
    pub frame_cap: usize,
    pub confidence_threshold: f32,
    /// Spatial hash cell size for retrieval (meters).
    pub cell_size: f64,
    pub retrieval_radius: f64,
    pub splat_radius: u32,
    /// Pixel stride of the oracle reconstructor.
    pub stride: usize,
    /// Pixel noise of the oracle and passthrough generators.
    pub noise_sigma: f64,
    pub seed: u64,
    pub build_plucker: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 512,
            letterbox: false,
            clip_len: 25,
            frame_cap: 99,
            confidence_threshold: 0.5,
            cell_size: 10.0,
            retrieval_radius: 10.0,
            splat_radius: 1,
            stride: 1,
            noise_sigma: 0.05,
            seed: 0,
            build_plucker: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width != 2 * self.height {
            return Err(Error::usage(format!(
                "resolution {}×{} is not 2:1",
                self.width, self.height
            )));
        }
        if self.clip_len < 2 {
            return Err(Error::usage("clip_len must be at least 2"));
        }
        if self.frame_cap == 0 || self.stride == 0 || self.splat_radius == 0 {
            return Err(Error::usage("frame_cap, stride and splat_radius must be positive"));
        }
        if !(self.noise_sigma >= 0.0) || !(self.retrieval_radius >= 0.0) || !(self.cell_size > 0.0) {
            return Err(Error::usage("noise_sigma and retrieval_radius must be non-negative, cell_size positive"));
        }
        Ok(())
    }

    /// Height of letterboxed color output: 16:9 of the width.
    pub fn letterbox_height(&self) -> usize {
        self.width * 9 / 16
    }

    pub fn raster(&self) -> RasterConfig {
        RasterConfig {
            splat_radius: self.splat_radius,
            ..RasterConfig::default()
        }
    }

    pub fn memory(&self) -> MemoryConfig {
        MemoryConfig {
            confidence_threshold: self.confidence_threshold,
            frame_cap: self.frame_cap,
            cell_size: self.cell_size,
        }
    }

    pub fn explore(&self) -> ExploreConfig {
        ExploreConfig {
            clip_len: self.clip_len,
            memory: self.memory(),
            retrieval_radius: self.retrieval_radius,
            raster: self.raster(),
            build_plucker: self.build_plucker,
            keep_reprojections: false,
        }
    }

    /// Defaults, then `file`, then matching entries of `env`.
    pub fn load(file: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let base = match file {
            Some(p) => read_json::<RunConfig>(p)?,
            None => RunConfig::default(),
        };
        let mut value = serde_json::to_value(&base).expect("config serializes");
        let fields = value.as_object_mut().expect("config is an object");
        for (key, raw) in env {
            let Some(name) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let name = name.to_ascii_lowercase();
            if let Some(slot) = fields.get_mut(&name) {
                *slot = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
            }
        }
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| Error::usage(format!("bad {ENV_PREFIX}* value: {e}")))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!((c.width, c.height, c.clip_len, c.frame_cap), (1024, 512, 25, 99));
        assert_eq!(c.letterbox_height(), 576);
    }

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        std::fs::write(&p, r#"{"clip_len": 5, "seed": 3, "noise_sigma": 0.1}"#).unwrap();
        let c = RunConfig::load(Some(&p), env(&[("PANOMEM_SEED", "9"), ("OTHER_SEED", "1")])).unwrap();
        assert_eq!((c.clip_len, c.seed, c.noise_sigma), (5, 9, 0.1));
        assert_eq!(c.width, 1024);
        assert!(RunConfig::load(None, env(&[("PANOMEM_SEED", "x")])).is_err());
        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        assert!(RunConfig::load(Some(&p), env(&[])).is_err());
    }
}
