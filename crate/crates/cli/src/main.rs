mod manifest;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pcdenoise::geometry::estimate_normals;
use pcdenoise::io::{read_point_cloud, write_point_cloud};
use pcdenoise::metrics::DEFAULT_PEAK;
use pcdenoise::optimizer::build_frame_graphs;
use pcdenoise::synth::surface_names;
use pcdenoise::{
    add_gaussian_noise, denoise_sequence, evaluate_frame, generate_sequence, DenoiseConfig, Frame, ReferenceFrame,
    Sequence, SyntheticSpec,
};

use manifest::{display, FrameRecord, NoiseRecord, RunManifest};

#[derive(Parser)]
#[command(name = "pcdenoise", version, about = "Dynamic point cloud denoising")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a deforming synthetic surface into clean frames with normals.
    Synth(SynthArgs),
    /// Add Gaussian noise to frames.
    Noise(NoiseArgs),
    /// Denoise a frame sequence.
    Denoise(DenoiseArgs),
    /// Compare test frames against clean frames.
    Eval(EvalArgs),
    /// Dump temporal patch matches between two frames as CSV.
    Match(MatchArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "sinusoid-sheet")]
    surface: String,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 3)]
    frames: usize,
    #[arg(long, default_value_t = 0.3)]
    amplitude: f64,
    /// Deformation phase advance per frame, radians.
    #[arg(long, default_value_t = 0.3)]
    phase_step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseArgs {
    /// Absolute standard deviation.
    #[arg(long, conflicts_with = "relative_sigma", required_unless_present = "relative_sigma")]
    sigma: Option<f64>,
    /// Standard deviation as a fraction of the first frame's bounding-box diagonal.
    #[arg(long)]
    relative_sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set lambda1=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to `<out>/manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Frames in temporal order.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, num_args = 1.., required = true)]
    clean: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    test: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PEAK)]
    peak: f64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Previous (already denoised) frame.
    previous: PathBuf,
    current: PathBuf,
    /// CSV output; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    /// Bad input data, with context already in the message.
    Data(String),
    Run(pcdenoise::Error),
}

impl From<pcdenoise::Error> for Failure {
    fn from(e: pcdenoise::Error) -> Self {
        match e {
            pcdenoise::Error::Config(msg) => Failure::Usage(msg),
            other => Failure::Run(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Noise(a) => noise(a),
        Command::Denoise(a) => denoise(a),
        Command::Eval(a) => eval(a),
        Command::Match(a) => dump_matches(a),
    }
}

fn load_config(args: &ConfigArgs) -> CliResult<DenoiseConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            DenoiseConfig::from_text(&text)?
        }
        None => DenoiseConfig::default(),
    };
    for kv in &args.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected KEY=VALUE, got `{kv}`")))?;
        config.set(key.trim(), value.trim())?;
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn read_sequence(paths: &[PathBuf]) -> CliResult<Sequence> {
    let frames = paths
        .iter()
        .enumerate()
        .map(|(t, p)| {
            read_point_cloud(p)
                .map(|f| f.with_frame_index(t))
                .map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Sequence::new(frames)?)
}

/// `<out>/<stem>.ply` for each input, refusing duplicate stems.
fn output_paths(out: &Path, inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut seen = BTreeSet::new();
    inputs
        .iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Failure::Usage(format!("bad input name {}", p.display())))?;
            if !seen.insert(stem.to_string()) {
                return Err(Failure::Usage(format!("two inputs share the name `{stem}`")));
            }
            Ok(out.join(format!("{stem}.ply")))
        })
        .collect()
}

fn write_frames(frames: &[Frame], paths: &[PathBuf]) -> CliResult<()> {
    for (frame, path) in frames.iter().zip(paths) {
        write_point_cloud(frame, path)?;
    }
    Ok(())
}

fn strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| display(p)).collect()
}

fn synth(a: SynthArgs) -> CliResult<()> {
    if !surface_names().contains(&a.surface.as_str()) {
        return Err(Failure::Usage(format!(
            "unknown surface `{}` (known: {})",
            a.surface,
            surface_names().join(", ")
        )));
    }
    let spec = SyntheticSpec {
        surface: a.surface,
        points_per_frame: a.points,
        frames: a.frames,
        amplitude: a.amplitude,
        phase_step: a.phase_step,
        seed: a.seed,
    };
    let start = Instant::now();
    let seq = generate_sequence(&spec)?;
    fs::create_dir_all(&a.out)?;
    let paths: Vec<PathBuf> = (0..seq.len()).map(|t| a.out.join(format!("frame_{t:03}.ply"))).collect();
    write_frames(seq.frames(), &paths)?;

    let mut m = RunManifest::new("synth");
    m.seeds.insert("sampling".into(), spec.seed);
    m.synthetic = Some(spec);
    m.outputs = strings(&paths);
    m.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
    m.write(&a.out.join("manifest.json"))?;
    Ok(())
}

fn noise(a: NoiseArgs) -> CliResult<()> {
    let start = Instant::now();
    let seq = read_sequence(&a.inputs)?;
    let sigma = match (a.sigma, a.relative_sigma) {
        (Some(s), _) => s,
        (None, Some(r)) => r * seq.frames()[0].bbox_diagonal(),
        (None, None) => unreachable!("clap requires one of them"),
    };
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Failure::Usage(format!("sigma must be non-negative, got {sigma}")));
    }
    let noisy = seq
        .frames()
        .iter()
        .enumerate()
        .map(|(t, f)| add_gaussian_noise(f, sigma, a.seed.wrapping_add(t as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&a.out)?;
    let paths = output_paths(&a.out, &a.inputs)?;
    write_frames(&noisy, &paths)?;

    let mut m = RunManifest::new("noise");
    m.noise = Some(NoiseRecord {
        sigma,
        relative_sigma: a.relative_sigma,
        seed: a.seed,
    });
    m.seeds.insert("noise".into(), a.seed);
    m.inputs = strings(&a.inputs);
    m.outputs = strings(&paths);
    m.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
    m.write(&a.out.join("manifest.json"))?;
    Ok(())
}

fn denoise(a: DenoiseArgs) -> CliResult<()> {
    let config = load_config(&a.config)?;
    let start = Instant::now();
    let seq = read_sequence(&a.inputs)?;
    let paths = output_paths(&a.out, &a.inputs)?;
    let (denoised, results) = denoise_sequence(&seq, &config)?;
    let solve_time = start.elapsed().as_secs_f64();
    fs::create_dir_all(&a.out)?;
    write_frames(denoised.frames(), &paths)?;

    let mut m = RunManifest::new("denoise");
    m.seeds.insert("patch_centers".into(), config.seed);
    m.config = Some(config);
    m.inputs = strings(&a.inputs);
    m.outputs = strings(&paths);
    m.frames = results
        .iter()
        .enumerate()
        .map(|(t, r)| FrameRecord {
            frame: t,
            temporal_active: r.diagnostics.temporal_active,
            best_iteration: r.diagnostics.best_iteration,
            degenerate_normals: r.diagnostics.degenerate_normals,
            trace_factor: r.diagnostics.trace_factor,
            trace_metric: r.diagnostics.trace_metric,
            objective_trace: r.objective_trace.clone(),
        })
        .collect();
    m.timings_s.insert("denoise".into(), solve_time);
    m.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
    m.write(&a.manifest.unwrap_or_else(|| a.out.join("manifest.json")))?;
    Ok(())
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        v.to_string()
    }
}

fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn eval(a: EvalArgs) -> CliResult<()> {
    if a.clean.len() != a.test.len() {
        return Err(Failure::Usage(format!(
            "{} clean frames but {} test frames",
            a.clean.len(),
            a.test.len()
        )));
    }
    let start = Instant::now();
    let clean = read_sequence(&a.clean)?;
    let test = read_sequence(&a.test)?;
    let mut reports = Vec::with_capacity(clean.len());
    for (t, (c, x)) in clean.frames().iter().zip(test.frames()).enumerate() {
        let reference = match c.normals() {
            Some(_) => c.clone(),
            None => {
                log::warn!("clean frame {t} has no normals; estimating them for GPSNR");
                estimate_normals(c, DenoiseConfig::default().k_plane)?.frame
            }
        };
        reports.push(evaluate_frame(t, x, &reference, a.peak)?);
    }

    let mut csv = String::from("frame,mse_nn,mse_index,gpsnr_db\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.frame,
            format_value(r.mse_nn),
            r.mse_index.map(format_value).unwrap_or_default(),
            format_value(r.gpsnr_db)
        );
    }
    emit(&csv, a.csv.as_deref())?;

    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("eval");
        m.inputs = strings(&a.clean).into_iter().chain(strings(&a.test)).collect();
        m.outputs = a.csv.iter().map(|p| display(p)).collect();
        m.metrics = reports;
        m.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
        m.write(path)?;
    }
    Ok(())
}

fn dump_matches(a: MatchArgs) -> CliResult<()> {
    let config = load_config(&a.config)?;
    let seq = read_sequence(&[a.previous.clone(), a.current.clone()])?;
    let (previous, current) = (&seq.frames()[0], &seq.frames()[1]);
    let reference = ReferenceFrame::prepare(previous, &config)?;
    let graphs = build_frame_graphs(current.positions(), Some(&reference), &config)?;

    let mut csv = String::from("target_patch,target_center,matched_patch,matched_center,distance,initial_weight\n");
    for m in &graphs.matches {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            m.target_patch,
            graphs.patches.patches()[m.target_patch].center(),
            m.matched_patch,
            reference.patches.patches.patches()[m.matched_patch].center(),
            format_value(m.distance),
            format_value((-m.distance).exp())
        );
    }
    emit(&csv, a.csv.as_deref())
}
