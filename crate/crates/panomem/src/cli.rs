//! The `panomem` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{UnitQuaternion, Vector3};
use panomem_core::explore::{
    explore_observed, memory_conditioned_generator, oracle_generator, oracle_reconstructor, Generator,
    PassthroughGenerator,
};
use panomem_core::geometry::{align_poses, pose_auc, pose_errors, AucCombine};
use panomem_core::metrics::{loop_consistency, report, Metric, MetricReport, MetricSeries};
use panomem_core::raster::render_scene;
use panomem_core::sphere::{cubemap_to_pano, pano_to_cubemap, plucker_field, CubeFace, CubeMap, Sampling};
use panomem_core::synthworld::{make_scene, SceneSpec};
use panomem_core::trajectory::{action_walk, catmull_rom, gen_polyline_loop, Action, LoopParams};
use panomem_core::{CameraPose, Convention, EquirectImage, MemPoint};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::run::{self, RunLock, RunManifest, RunWriter};

#[derive(Debug, Parser)]
#[command(name = "panomem", version, about = "Panoramic point-cloud memory toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for [`RunConfig`]; each flag beats `PANOMEM_*` and the config file.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Panorama width [default: 1024]; height follows as width/2 unless given
    #[arg(long, global = true)]
    pub width: Option<usize>,
    /// Panorama height [default: 512]
    #[arg(long, global = true)]
    pub height: Option<usize>,
    /// Write color frames letterboxed to 16:9 (1024×576 at the default size)
    #[arg(long, global = true)]
    pub letterbox: bool,
    /// Frames per clip including the shared first frame [default: 25]
    #[arg(long, global = true)]
    pub clip_len: Option<usize>,
    /// Most frames returned by memory retrieval [default: 99]
    #[arg(long, global = true)]
    pub frame_cap: Option<usize>,
    /// Minimum point confidence kept in memory [default: 0.5]
    #[arg(long, global = true)]
    pub confidence_threshold: Option<f32>,
    /// Spatial hash cell size in meters [default: 10]
    #[arg(long, global = true)]
    pub cell_size: Option<f64>,
    /// Retrieval radius in meters [default: 10]
    #[arg(long, global = true)]
    pub retrieval_radius: Option<f64>,
    /// Point splat radius in pixels [default: 1]
    #[arg(long, global = true)]
    pub splat_radius: Option<u32>,
    /// Pixel stride of the oracle reconstructor [default: 1]
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// Generator pixel noise [default: 0.05]
    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,
    /// Random seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Skip Plücker fields during exploration
    #[arg(long, global = true)]
    pub no_plucker: bool,
}

impl ConfigArgs {
    /// Resolves the configuration against `env`.
    pub fn resolve(&self, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig> {
        let mut c = RunConfig::load(self.config.as_deref(), env)?;
        match (self.width, self.height) {
            (Some(w), Some(h)) => (c.width, c.height) = (w, h),
            (Some(w), None) => (c.width, c.height) = (w, w / 2),
            (None, Some(h)) => (c.width, c.height) = (2 * h, h),
            (None, None) => {}
        }
        if self.letterbox {
            c.letterbox = true;
        }
        if self.no_plucker {
            c.build_plucker = false;
        }
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { c.$f = v; })*};
        }
        take!(
            clip_len,
            frame_cap,
            confidence_threshold,
            cell_size,
            retrieval_radius,
            splat_radius,
            stride,
            noise_sigma,
            seed
        );
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Nearest,
    Bilinear,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Nearest => Sampling::Nearest,
            SamplingArg::Bilinear => Sampling::Bilinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvertTarget {
    /// Panorama PNG to a directory of six face PNGs
    Cube,
    /// Directory of six face PNGs to a panorama PNG
    Pano,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryArg {
    Loop,
    Curve,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    /// Renders the hidden scene plus noise
    Oracle,
    /// Warps the last frame through its depth, plus noise
    Passthrough,
    /// Passthrough with memory reprojections pasted where covered
    Memory,
}

impl GeneratorArg {
    fn name(self) -> &'static str {
        match self {
            GeneratorArg::Oracle => "oracle",
            GeneratorArg::Passthrough => "passthrough",
            GeneratorArg::Memory => "memory_conditioned",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between a panorama and six cube faces
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        to: ConvertTarget,
        /// Face side in pixels [default: width/4]
        #[arg(long)]
        face_size: Option<usize>,
        #[arg(long, value_enum, default_value = "bilinear")]
        sampling: SamplingArg,
    },
    /// Rotate a panorama on the sphere
    Rotate {
        input: PathBuf,
        output: PathBuf,
        /// Longitude offset in degrees
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dphi: f64,
        /// Latitude offset in degrees
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dtheta: f64,
        #[arg(long, value_enum, default_value = "bilinear")]
        sampling: SamplingArg,
    },
    /// Write spherical Plücker fields for poses
    Plucker {
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Only this frame index
        #[arg(long)]
        frame: Option<usize>,
    },
    /// Generate a camera trajectory
    Trajectory {
        #[arg(long, value_enum, default_value = "loop")]
        kind: TrajectoryArg,
        /// Loop length in meters
        #[arg(long, default_value_t = 20.0)]
        length: f64,
        /// Spacing between poses in meters
        #[arg(long, default_value_t = 0.4)]
        step: f64,
        /// Camera height for loops
        #[arg(long, default_value_t = 1.5)]
        cam_height: f64,
        /// Keep loop positions within this distance of the start
        #[arg(long)]
        max_radius: Option<f64>,
        /// JSON array of [x, y, z] control points (curve)
        #[arg(long)]
        controls: Option<PathBuf>,
        /// Comma-separated actions such as F,F0.8,R22.5,R-45 (walk)
        #[arg(long, allow_hyphen_values = true)]
        actions: Option<String>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Render a scene at each pose
    Render {
        /// room-1, a .ply point cloud or a scene-spec .json
        #[arg(long)]
        scene: String,
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the generate-reconstruct loop into a run directory
    Explore {
        #[arg(long)]
        scene: String,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value = "memory")]
        generator: GeneratorArg,
        #[arg(long, short)]
        out: PathBuf,
        /// Run passthrough and memory-conditioned generators and report both loops
        #[arg(long)]
        compare: bool,
        /// Also write the Plücker field of every target
        #[arg(long)]
        write_plucker: bool,
        /// Skip ground-truth renders
        #[arg(long)]
        no_gt: bool,
    },
    /// Score frames against references
    Eval {
        /// Run directory with ground truth
        #[arg(long)]
        run: Option<PathBuf>,
        /// Reference frame directory
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Frame directory compared with --reference
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "mse,psnr,ssim")]
        metrics: Vec<String>,
        /// Estimated poses for pose AUC
        #[arg(long, requires = "gt_poses")]
        est_poses: Option<PathBuf>,
        #[arg(long, requires = "est_poses")]
        gt_poses: Option<PathBuf>,
        /// AUC threshold in degrees
        #[arg(long, default_value_t = 30.0)]
        tau: f64,
        /// JSON report path [default: stdout]
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fit the similarity taking estimated poses onto ground truth
    Align {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Pin the scale to 1
        #[arg(long)]
        no_scale: bool,
        /// Accept pose files in different conventions
        #[arg(long)]
        convert: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic scene
    Scene {
        /// Scene-spec JSON [default: room-1]
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override the surface density (points/m²)
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, short)]
        output: PathBuf,
        /// Also write the resolved spec
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
}

/// Parses `args`, runs the command, and returns the process exit code.
/// Failures are reported on stderr as one JSON object.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return 0;
            }
            let err = Error::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(&cli, std::env::vars()) {
        Ok(out) => {
            // A closed pipe downstream is not an error for us.
            let _ = writeln!(std::io::stdout(), "{out}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Runs a parsed command; the returned JSON summarizes what was written.
pub fn execute(cli: &Cli, env: impl IntoIterator<Item = (String, String)>) -> Result<Value> {
    let cfg = cli.config.resolve(env)?;
    match &cli.command {
        Command::Convert {
            input,
            output,
            to,
            face_size,
            sampling,
        } => convert(&cli.config, input, output, *to, *face_size, (*sampling).into()),
        Command::Rotate {
            input,
            output,
            dphi,
            dtheta,
            sampling,
        } => {
            let img = io::read_png(input)?;
            let out = img.rotate(dphi.to_radians(), dtheta.to_radians(), (*sampling).into())?;
            io::write_png(output, &out)?;
            Ok(json!({ "output": output, "width": out.width(), "height": out.height() }))
        }
        Command::Plucker { poses, out_dir, frame } => {
            let poses = io::read_poses(poses)?;
            let picked: Vec<usize> = match frame {
                Some(f) if *f < poses.len() => vec![*f],
                Some(f) => return Err(Error::usage(format!("frame {f} is out of range ({} poses)", poses.len()))),
                None => (0..poses.len()).collect(),
            };
            let mut files = Vec::new();
            for i in picked {
                let field = plucker_field(&poses[i..=i], cfg.width, cfg.height)?.remove(0);
                let path = out_dir.join(format!("plucker_{i:04}.f32"));
                io::write_plucker(&path, &field)?;
                files.push(path);
            }
            Ok(json!({ "files": files }))
        }
        Command::Trajectory {
            kind,
            length,
            step,
            cam_height,
            max_radius,
            controls,
            actions,
            output,
        } => {
            let t = match kind {
                TrajectoryArg::Loop => gen_polyline_loop(&LoopParams {
                    length: *length,
                    step: *step,
                    seed: cfg.seed,
                    height: *cam_height,
                    max_radius: *max_radius,
                    ..LoopParams::default()
                })?,
                TrajectoryArg::Curve => {
                    let path = controls
                        .as_deref()
                        .ok_or_else(|| Error::usage("--controls is required for a curve"))?;
                    let pts: Vec<[f64; 3]> = io::read_json(path)?;
                    let pts: Vec<Vector3<f64>> = pts.into_iter().map(Vector3::from).collect();
                    catmull_rom(&pts, *step)?
                }
                TrajectoryArg::Walk => {
                    let spec = actions
                        .as_deref()
                        .ok_or_else(|| Error::usage("--actions is required for a walk"))?;
                    let start = CameraPose::from_yaw(Vector3::new(0.0, *cam_height, 0.0), 0.0);
                    action_walk(&parse_actions(spec)?, &start)
                }
            };
            io::write_trajectory(output, &t)?;
            Ok(json!({
                "output": output,
                "kind": t.kind.name(),
                "poses": t.len(),
                "arc_length": t.arc_length(),
                "closure": t.closure(),
            }))
        }
        Command::Render { scene, poses, out_dir } => {
            let scene = io::load_scene(scene)?;
            let poses = io::read_poses(poses)?;
            let mut frames = Vec::new();
            for (i, p) in poses.iter().enumerate() {
                let r = render_scene(&scene, p, cfg.width, cfg.height, &cfg.raster())?;
                let stem = format!("render_{i:04}");
                io::write_png(&out_dir.join(format!("{stem}.png")), &r.image)?;
                io::write_depth(&out_dir.join(format!("{stem}_depth.f32")), &r.image)?;
                io::write_mask_png(
                    &out_dir.join(format!("{stem}_mask.png")),
                    cfg.width,
                    cfg.height,
                    r.mask(),
                )?;
                frames.push(json!({ "frame": i, "covered_fraction": r.covered_fraction }));
            }
            Ok(json!({ "out_dir": out_dir, "frames": frames }))
        }
        Command::Explore {
            scene,
            trajectory,
            generator,
            out,
            compare,
            write_plucker,
            no_gt,
        } => {
            let points = io::load_scene(scene)?;
            let poses = io::read_poses(trajectory)?;
            let opts = ExploreOpts {
                scene_name: scene,
                points: &points,
                poses: &poses,
                cfg: &cfg,
                write_plucker: *write_plucker,
                write_gt: !*no_gt,
            };
            if *compare {
                let a = explore_into(&out.join("passthrough"), GeneratorArg::Passthrough, &opts)?;
                let b = explore_into(&out.join("memory_conditioned"), GeneratorArg::Memory, &opts)?;
                let (la, lb) = (a.loop_consistency.unwrap_or(f64::NAN), b.loop_consistency.unwrap_or(f64::NAN));
                let summary = json!({
                    "passthrough": { "run": "passthrough", "loop_consistency": la },
                    "memory_conditioned": { "run": "memory_conditioned", "loop_consistency": lb },
                    "memory_reduces_drift": lb < la,
                });
                io::write_json(&out.join("loop_report.json"), &summary)?;
                Ok(summary)
            } else {
                let m = explore_into(out, *generator, &opts)?;
                Ok(json!({
                    "run": out,
                    "frames": m.frames,
                    "clips": m.clips.len(),
                    "boundary_chaining": m.boundary_chaining,
                    "loop_consistency": m.loop_consistency,
                }))
            }
        }
        Command::Eval {
            run,
            reference,
            frames,
            metrics,
            est_poses,
            gt_poses,
            tau,
            out,
            csv,
        } => {
            let metrics = metrics
                .iter()
                .map(|m| Metric::from_name(m.trim()).ok_or_else(|| Error::usage(format!("unknown metric {m:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let mut rep = match (run, reference, frames) {
                (Some(dir), None, None) => eval_run(dir, &metrics)?,
                (None, Some(a), Some(b)) => eval_dirs(a, b, &metrics)?,
                (None, None, None) if est_poses.is_some() => MetricReport::default(),
                _ => return Err(Error::usage("pass either --run, or --reference with --frames")),
            };
            if let (Some(e), Some(g)) = (est_poses, gt_poses) {
                let (e, g) = (io::read_poses(e)?, io::read_poses(g)?);
                let auc = pose_auc(&pose_errors(&e, &g)?, *tau, AucCombine::BothWithin)?;
                rep.metrics.push(MetricSeries::new(format!("pose_auc@{tau}"), vec![auc]));
            }
            let value = io::report_json(&rep);
            if let Some(p) = out {
                io::write_json(p, &value)?;
            }
            if let Some(p) = csv {
                io::write_report_csv(p, &rep)?;
            }
            Ok(value)
        }
        Command::Align {
            est,
            gt,
            no_scale,
            convert,
            out,
        } => {
            let (e, g) = (io::read_poses(est)?, io::read_poses(gt)?);
            let v = align(&e, &g, !*no_scale, *convert)?;
            if let Some(p) = out {
                io::write_json(p, &v)?;
            }
            Ok(v)
        }
        Command::Scene {
            spec,
            density,
            output,
            spec_out,
        } => {
            let mut s = match spec {
                Some(p) => io::read_scene_spec(p)?,
                None => SceneSpec::room_1(),
            };
            if let Some(d) = density {
                s.density = *d;
            }
            let points = make_scene(&s)?;
            io::write_ply(output, &points)?;
            if let Some(p) = spec_out {
                io::write_scene_spec(p, &s)?;
            }
            Ok(json!({ "output": output, "points": points.len() }))
        }
    }
}

fn convert(
    flags: &ConfigArgs,
    input: &Path,
    output: &Path,
    to: ConvertTarget,
    face_size: Option<usize>,
    sampling: Sampling,
) -> Result<Value> {
    match to {
        ConvertTarget::Cube => {
            let img = io::read_png(input)?;
            let f = face_size.unwrap_or(img.width() / 4);
            let cm = pano_to_cubemap(&img, f, sampling)?;
            for face in CubeFace::ALL {
                io::write_rgb_png(&output.join(format!("{}.png", face.name())), f, f, cm.face(face))?;
            }
            Ok(json!({ "output": output, "face_size": f }))
        }
        ConvertTarget::Pano => {
            let mut size = None;
            let faces = CubeFace::ALL.map(|face| {
                let path = input.join(format!("{}.png", face.name()));
                let (w, h, rgb) = io::read_rgb_png(&path)?;
                if w != h || size.is_some_and(|s| s != w) {
                    return Err(Error::format(&path, format!("{w}×{h} face does not match the others")));
                }
                size = Some(w);
                Ok(rgb)
            });
            let mut list = Vec::with_capacity(6);
            for f in faces {
                list.push(f?);
            }
            let f = size.expect("six faces");
            let faces: [Vec<[f32; 3]>; 6] = list.try_into().expect("six faces");
            let cm = CubeMap::new(f, faces)?;
            let (w, h) = match (flags.width, flags.height) {
                (Some(w), _) => (w, w / 2),
                (None, Some(h)) => (2 * h, h),
                (None, None) => (4 * f, 2 * f),
            };
            let img = cubemap_to_pano(&cm, w, h, sampling)?;
            io::write_png(output, &img)?;
            Ok(json!({ "output": output, "width": w, "height": h }))
        }
    }
}

fn parse_actions(spec: &str) -> Result<Vec<Action>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| {
            let bad = || Error::usage(format!("bad action {tok:?}; use F[meters] or R<degrees>"));
            let (head, rest) = tok.split_at(1);
            let action = match head {
                "F" | "f" if rest.is_empty() => Action::forward(Action::DEFAULT_FORWARD),
                "F" | "f" => Action::forward(rest.parse().map_err(|_| bad())?),
                "R" | "r" if rest.is_empty() => Action::rotate(Action::DEFAULT_ROTATE),
                "R" | "r" => Action::rotate(rest.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            };
            Ok(action?)
        })
        .collect()
}

struct ExploreOpts<'a> {
    scene_name: &'a str,
    points: &'a [MemPoint],
    poses: &'a [CameraPose],
    cfg: &'a RunConfig,
    write_plucker: bool,
    write_gt: bool,
}

fn explore_into(dir: &Path, which: GeneratorArg, o: &ExploreOpts<'_>) -> Result<RunManifest> {
    let cfg = o.cfg;
    let first = o.poses.first().ok_or_else(|| Error::usage("trajectory has no poses"))?;
    let _lock = RunLock::acquire(dir)?;
    let x0 = render_scene(o.points, first, cfg.width, cfg.height, &cfg.raster())?.image;
    let mut generator: Box<dyn Generator> = match which {
        GeneratorArg::Oracle => Box::new(oracle_generator(o.points.to_vec(), cfg.noise_sigma, cfg.seed)?.with_raster(cfg.raster())),
        GeneratorArg::Passthrough => Box::new(PassthroughGenerator::new(cfg.noise_sigma, cfg.seed)?.with_raster(cfg.raster())),
        GeneratorArg::Memory => Box::new(memory_conditioned_generator(
            PassthroughGenerator::new(cfg.noise_sigma, cfg.seed)?.with_raster(cfg.raster()),
        )),
    };
    let mut recon = oracle_reconstructor(cfg.stride)?;
    let mut writer = RunWriter::new(dir, cfg);
    writer.write_plucker = o.write_plucker;
    let result = explore_observed(&x0, o.poses, generator.as_mut(), &mut recon, &cfg.explore(), &mut writer);
    let run = match result {
        Ok(r) => r,
        Err(e) => return Err(writer.take_failure().unwrap_or(Error::Core(e))),
    };
    let mut loop_score = None;
    if o.write_gt {
        for (i, p) in o.poses.iter().enumerate() {
            let img = render_scene(o.points, p, cfg.width, cfg.height, &cfg.raster())?.image;
            if i == 0 {
                loop_score = Some(loop_consistency(&img, run.final_frame())?);
            }
            io::write_png(&dir.join("gt").join(run::gt_frame_name(i)), &img)?;
        }
    } else {
        loop_score = Some(loop_consistency(&x0, run.final_frame())?);
    }
    let manifest = RunManifest {
        version: 1,
        frames: run.frames.len(),
        width: cfg.width,
        height: cfg.height,
        generator: which.name().to_string(),
        reconstructor: "oracle".to_string(),
        scene: Some(o.scene_name.to_string()),
        ground_truth: o.write_gt.then(|| "gt".to_string()),
        clips: run::clip_entries(&run),
        boundary_chaining: run::boundary_chaining(&run),
        loop_consistency: loop_score,
        config: cfg.clone(),
    };
    run::finish_run(dir, &run, &manifest)?;
    Ok(manifest)
}

fn eval_run(dir: &Path, metrics: &[Metric]) -> Result<MetricReport> {
    let manifest = run::read_manifest(dir)?;
    let frames = run::read_run_frames(dir, &manifest)?;
    let gt = run::read_ground_truth(dir, &manifest)?
        .ok_or_else(|| Error::format(dir.join(run::MANIFEST), "run has no ground-truth renders"))?;
    let mut rep = report(&gt[1..], &frames[1..], metrics)?;
    rep.frames = (1..frames.len()).collect();
    let last = frames.last().expect("run has frames");
    rep.metrics
        .push(MetricSeries::new("loop_consistency", vec![loop_consistency(&gt[0], last)?]));
    Ok(rep)
}

fn png_names(dir: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".png") && !n.ends_with("_mask.png"))
        .collect();
    names.sort();
    Ok(names)
}

fn eval_dirs(a: &Path, b: &Path, metrics: &[Metric]) -> Result<MetricReport> {
    let names = png_names(a)?;
    if names.is_empty() {
        return Err(Error::format(a, "no PNG frames found"));
    }
    if png_names(b)? != names {
        return Err(Error::format(b, "frame names differ from the reference directory"));
    }
    let load = |dir: &Path| names.iter().map(|n| io::read_png(&dir.join(n))).collect::<Result<Vec<EquirectImage>>>();
    Ok(report(&load(a)?, &load(b)?, metrics)?)
}

fn align(est: &[CameraPose], gt: &[CameraPose], with_scale: bool, convert: bool) -> Result<Value> {
    if est.len() != gt.len() {
        return Err(Error::usage(format!(
            "pose counts differ ({} vs {})",
            est.len(),
            gt.len()
        )));
    }
    let conventions = |ps: &[CameraPose]| {
        let mut c: Vec<Convention> = ps.iter().map(|p| p.convention()).collect();
        c.dedup();
        c
    };
    let (ce, cg) = (conventions(est), conventions(gt));
    if !convert && (ce.len() > 1 || ce != cg) {
        return Err(Error::usage(format!(
            "pose conventions differ ({} vs {}); pass --convert to align anyway",
            ce.iter().map(|c| c.tag()).collect::<Vec<_>>().join("/"),
            cg.iter().map(|c| c.tag()).collect::<Vec<_>>().join("/"),
        )));
    }
    let t = align_poses(est, gt, with_scale)?;
    let residuals: Vec<f64> = est
        .iter()
        .zip(gt)
        .map(|(e, g)| (t.apply(&e.center()) - g.center()).norm())
        .collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let q = UnitQuaternion::from_rotation_matrix(&t.rotation);
    Ok(json!({
        "scale": t.scale,
        "rotation": [q.w, q.i, q.j, q.k],
        "translation": [t.translation.x, t.translation.y, t.translation.z],
        "residuals": residuals,
        "rms_residual": rms,
    }))
}
