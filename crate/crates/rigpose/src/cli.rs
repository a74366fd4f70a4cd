//! The `rigpose` command line: `synth`, `solve`, `ransac`, `bench`, `traj`, `iters`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rigpose_core::constraints::AffineCorrespondence;
use rigpose_core::robust::{ransac_estimate, ransac_iterations, RansacConfig};
use rigpose_core::solvers::{solve_relpose, Mode, SolverOptions};
use rigpose_core::synthbench::{
    generate_scene, noisy_correspondences, pose_errors, run_bench_trial, BenchConfig, BenchSolver, MotionType,
    SceneConfig,
};
use serde::Serialize;

use crate::error::CliError;
use crate::io::{
    bench_csv, chain_motions, json_lines, load_acs, load_poses, load_rig, load_scene_config, load_trajectory,
    parse_motion_type, relative_motion, rig_json, rotation_to_wxyz, trajectory_text, write_text, AcRecord, BenchRow,
    PoseRecord, Stamped,
};

#[derive(Debug, Parser)]
#[command(name = "rigpose", version, about = "Relative pose of a calibrated multi-camera rig from affine correspondences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic scenes: rig, correspondences and ground-truth trajectory.
    Synth(SynthArgs),
    /// Minimal solve on a file holding exactly two correspondences.
    Solve(SolveArgs),
    /// Robust estimate for every frame pair of a correspondence file.
    Ransac(RansacArgs),
    /// Noise sweep over the synthetic benchmark, as CSV.
    Bench(BenchArgs),
    /// Chain per-pair motions into a trajectory.
    Traj(TrajArgs),
    /// RANSAC iterations needed for success probability p, outlier ratio eps, sample size s.
    Iters(ItersArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Inter,
    Intra,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Inter => Mode::Inter,
            ModeArg::Intra => Mode::Intra,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthMode {
    Inter,
    Intra,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Pixel,
    Normalized,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scene configuration JSON; unset fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for rig.json, acs.jsonl and gt.txt.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pixel noise; overrides the configuration.
    #[arg(long)]
    sigma: Option<f64>,
    /// Side of the square support region in pixels; overrides the configuration.
    #[arg(long)]
    support: Option<f64>,
    #[arg(long, value_enum, default_value_t = SynthMode::All)]
    mode: SynthMode,
    /// Number of consecutive frame pairs.
    #[arg(long, default_value_t = 1)]
    frames: u64,
    /// Share of correspondences per pair whose view-2 point is scrambled.
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, value_enum, default_value_t = SpaceArg::Pixel)]
    space: SpaceArg,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    rig: PathBuf,
    #[arg(long)]
    acs: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Known rotation angle in degrees; selects the 5DOF solver.
    #[arg(long)]
    angle_prior: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RansacArgs {
    #[arg(long)]
    rig: PathBuf,
    #[arg(long)]
    acs: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Known rotation angle in degrees, applied to every pair.
    #[arg(long)]
    angle_prior: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inlier threshold on the Sampson distance, normalized coordinates.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    #[arg(long, default_value_t = 0.999)]
    confidence: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Ground-truth trajectory; frame pair k compares against lines k and k+1.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated pixel noise levels.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 40.0)]
    support: f64,
    /// Trials per (motion, noise, solver) cell.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated solvers: inter, intra, ka-inter, ka-intra.
    #[arg(long, value_delimiter = ',', default_value = "inter,intra,ka-inter,ka-intra")]
    solvers: Vec<String>,
    /// Comma-separated motion types: forward, sideways, random.
    #[arg(long, value_delimiter = ',', default_value = "random")]
    motion: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, default_value_t = 5e-3)]
    threshold: f64,
    /// Record wall-clock time per trial; without it `wall_ms` is 0 and output is reproducible.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrajArgs {
    /// Per-pair motions as written by `ransac`.
    #[arg(long)]
    poses: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ItersArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    s: u32,
}

/// Parses `argv`, runs the command and returns the process exit code. Errors are reported
/// on stderr as a single `error: <kind>: <message>` line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let err = CliError::Usage(first.to_string());
            eprintln!("{}", err.line());
            return err.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => synth(a, stdout),
        Command::Solve(a) => solve(a, stdout),
        Command::Ransac(a) => ransac(a, stdout),
        Command::Bench(a) => bench(a, stdout),
        Command::Traj(a) => traj(a, stdout),
        Command::Iters(a) => iters(a, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_text(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn angle_prior(deg: Option<f64>) -> Result<Option<f64>, CliError> {
    match deg {
        Some(d) if !(d.is_finite() && (0.0..180.0).contains(&d)) => {
            Err(CliError::Config(format!("angle prior must lie in [0, 180) degrees, got {d}")))
        }
        d => Ok(d.map(f64::to_radians)),
    }
}

fn synth(a: SynthArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(path) => load_scene_config(path)?,
        None => SceneConfig::default(),
    };
    if let Some(s) = a.sigma {
        cfg.noise_sigma_px = s;
    }
    if let Some(s) = a.support {
        cfg.support_side_px = s;
    }
    if a.frames == 0 {
        return Err(CliError::Config("need at least one frame pair".into()));
    }
    if !(0.0..=1.0).contains(&a.outliers) {
        return Err(CliError::Config(format!("outlier share must lie in [0, 1], got {}", a.outliers)));
    }
    cfg.validate()?;
    let modes: &[Mode] = match a.mode {
        SynthMode::Inter => &[Mode::Inter],
        SynthMode::Intra => &[Mode::Intra],
        SynthMode::All => &[Mode::Inter, Mode::Intra],
    };

    let mut records = Vec::new();
    let mut motions = Vec::new();
    for pair in 0..a.frames {
        let mut scene_cfg = cfg.clone();
        scene_cfg.seed = a.seed.wrapping_add(pair);
        let scene = generate_scene(&scene_cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(scene_cfg.seed);
        rng.set_stream(1);
        for &mode in modes {
            let acs = noisy_correspondences(&scene, mode, cfg.noise_sigma_px, cfg.support_side_px, a.outliers, &mut rng)?;
            for ac in &acs {
                records.push(match a.space {
                    SpaceArg::Pixel => AcRecord::pixel(pair, &scene.rig, ac)?,
                    SpaceArg::Normalized => AcRecord::normalized(pair, ac),
                });
            }
        }
        motions.push(scene.gt_pose);
    }
    let frames: Vec<Stamped> = chain_motions(&motions)
        .into_iter()
        .enumerate()
        .map(|(k, pose)| Stamped { timestamp: k as f64, pose })
        .collect();

    write_text(&a.out.join("rig.json"), &rig_json(&cfg.rig()))?;
    write_text(&a.out.join("acs.jsonl"), &json_lines(&records))?;
    write_text(&a.out.join("gt.txt"), &trajectory_text(&frames))?;
    writeln!(stdout, "wrote {} correspondences over {} frame pairs to {}", records.len(), a.frames, a.out.display())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

#[derive(Debug, Serialize)]
struct CandidateJson {
    q_wxyz: [f64; 4],
    t_xyz: [f64; 3],
    cayley: [f64; 3],
    depths: [f64; 2],
    residual: f64,
    scale_degenerate: bool,
    positive_depth: bool,
}

#[derive(Debug, Serialize)]
struct SolveJson {
    candidates: Vec<CandidateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn solve(a: SolveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rig = load_rig(&a.rig)?;
    let acs: Vec<AffineCorrespondence> = load_acs(&a.acs, &rig)?.into_values().flatten().collect();
    let pair: [AffineCorrespondence; 2] = acs
        .try_into()
        .map_err(|v: Vec<_>| CliError::parse(&a.acs, 0, format!("expected exactly 2 correspondences, found {}", v.len())))?;
    let sol = solve_relpose(&rig, &pair, a.mode.into(), angle_prior(a.angle_prior)?, &SolverOptions::default())?;
    let json = SolveJson {
        candidates: sol
            .candidates
            .iter()
            .map(|c| CandidateJson {
                q_wxyz: rotation_to_wxyz(&c.pose.rotation),
                t_xyz: c.pose.translation.into(),
                cayley: c.cayley.to_vector().into(),
                depths: [c.depths.0, c.depths.1],
                residual: c.residual,
                scale_degenerate: c.scale_degenerate,
                positive_depth: c.positive_depth,
            })
            .collect(),
        failure: sol.failure.map(|e| e.to_string()),
    };
    let mut text = serde_json::to_string_pretty(&json).expect("candidates serialize");
    text.push('\n');
    emit(a.out.as_deref(), &text, stdout)
}

fn ransac(a: RansacArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rig = load_rig(&a.rig)?;
    let pairs = load_acs(&a.acs, &rig)?;
    let gt = a.gt.as_deref().map(load_trajectory).transpose()?;
    let prior = angle_prior(a.angle_prior)?;
    let mode: Mode = a.mode.into();
    let mut cfg = RansacConfig {
        success_prob: a.confidence,
        inlier_threshold: a.threshold,
        max_iterations: a.max_iterations,
        ..RansacConfig::default()
    };
    cfg.validate()?;

    let mut records = Vec::new();
    for (&pair, acs) in &pairs {
        cfg.seed = a.seed.wrapping_add(pair);
        let result = match ransac_estimate(&rig, acs, mode, prior, &cfg) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: frame pair {pair}: {e}");
                continue;
            }
        };
        let mut rec = PoseRecord::new(pair, &result.best.pose);
        rec.inliers = Some(result.inlier_count);
        rec.correspondences = Some(acs.len());
        rec.iterations = Some(result.iterations_run);
        if let Some(frames) = &gt {
            let k = usize::try_from(pair).ok().filter(|&k| k + 1 < frames.len()).ok_or_else(|| {
                CliError::Config(format!("ground truth has no frames {pair} and {}", pair + 1))
            })?;
            let motion = relative_motion(&frames[k].pose, &frames[k + 1].pose);
            if let Ok(e) = pose_errors(&motion, &result.best.pose) {
                rec.eps_r_deg = Some(e.rotation_deg);
                rec.eps_t = Some(e.translation);
                rec.eps_tdir_deg = Some(e.translation_dir_deg);
            }
        }
        records.push(rec);
    }
    emit(a.out.as_deref(), &json_lines(&records), stdout)
}

fn parse_solver(name: &str) -> Option<BenchSolver> {
    match name {
        "inter" => Some(BenchSolver::Inter),
        "intra" => Some(BenchSolver::Intra),
        "ka-inter" => Some(BenchSolver::InterKnownAngle),
        "ka-intra" => Some(BenchSolver::IntraKnownAngle),
        _ => None,
    }
}

fn bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let solvers: Vec<BenchSolver> = a
        .solvers
        .iter()
        .map(|s| parse_solver(s).ok_or_else(|| CliError::Config(format!("unknown solver {s:?}"))))
        .collect::<Result<_, _>>()?;
    let motions: Vec<MotionType> = a
        .motion
        .iter()
        .map(|m| parse_motion_type(m).ok_or_else(|| CliError::Config(format!("unknown motion type {m:?}"))))
        .collect::<Result<_, _>>()?;
    if let Some(s) = a.sigma.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(CliError::Config(format!("noise level must be non-negative, got {s}")));
    }
    if !(0.0..=1.0).contains(&a.outliers) {
        return Err(CliError::Config(format!("outlier share must lie in [0, 1], got {}", a.outliers)));
    }

    let mut rows = Vec::new();
    for &motion in &motions {
        for &sigma in &a.sigma {
            for &solver in &solvers {
                let mut cfg = BenchConfig::default();
                cfg.solver = solver;
                cfg.outlier_ratio = a.outliers;
                cfg.ransac.inlier_threshold = a.threshold;
                cfg.scene.motion_type = motion;
                cfg.scene.noise_sigma_px = sigma;
                cfg.scene.support_side_px = a.support;
                cfg.scene.seed = a.seed;
                cfg.ransac.validate()?;
                cfg.scene.validate()?;
                for trial in 0..a.trials {
                    let start = Instant::now();
                    let t = run_bench_trial(&cfg, trial)?;
                    let wall_ms = if a.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
                    rows.push(BenchRow {
                        trial,
                        motion_type: motion.name(),
                        sigma_px: sigma,
                        support_px: a.support,
                        solver: solver.name(),
                        eps_r_deg: t.errors.rotation_deg,
                        eps_t: t.errors.translation,
                        eps_tdir_deg: t.errors.translation_dir_deg,
                        iterations: t.iterations,
                        wall_ms,
                    });
                }
            }
        }
    }
    emit(a.out.as_deref(), &bench_csv(&rows), stdout)
}

fn traj(a: TrajArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut poses = load_poses(&a.poses)?;
    poses.sort_by_key(|(id, _)| *id);
    let Some(&(first, _)) = poses.first() else {
        return Err(CliError::parse(&a.poses, 0, "no poses"));
    };
    for (k, (id, _)) in poses.iter().enumerate() {
        if *id != first + k as u64 {
            return Err(CliError::parse(&a.poses, 0, format!("frame pair {} is missing", first + k as u64)));
        }
    }
    let motions: Vec<_> = poses.iter().map(|(_, p)| *p).collect();
    let frames: Vec<Stamped> = chain_motions(&motions)
        .into_iter()
        .enumerate()
        .map(|(k, pose)| Stamped { timestamp: (first + k as u64) as f64, pose })
        .collect();
    emit(a.out.as_deref(), &trajectory_text(&frames), stdout)
}

fn iters(a: ItersArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if !(a.p > 0.0 && a.p < 1.0) || !(0.0..1.0).contains(&a.eps) || a.s == 0 {
        return Err(CliError::Config("need 0 < p < 1, 0 <= eps < 1 and s >= 1".into()));
    }
    writeln!(stdout, "{}", ransac_iterations(a.p, a.eps, a.s)).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}
