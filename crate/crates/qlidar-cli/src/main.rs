//! Command-line runner for the photon-pair LiDAR simulator and
//! reconstruction pipeline.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qlidar::adaptive::{correlation_driven_search, probe_cost_model, SearchParams};
use qlidar::corr::{gamma_plus, peak_stats, remove_crosstalk, Method};
use qlidar::io::{
    export_pgm_f64, read_frame_stack, run_built_scenario, write_frame_stack, ScenarioConfig,
};
use qlidar::model::{build_hot_pixel_mask, depth_mm, EdgeLabel, HotPixelMask};
use qlidar::sim::{acquire_stack, acquire_stack_at_gate_index, simulate_linear_scan};

#[derive(Parser)]
#[command(
    name = "qlidar",
    about = "Photon-pair LiDAR: simulate gated SPAD scans, correlate, and range",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the acquisition seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override frames per gate position.
    #[arg(long)]
    frames: Option<usize>,
    /// Correlation path: direct or fft.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a linear scan and write one frame-stack file per gate.
    Simulate(CommonArgs),
    /// Correlate a recorded stack file: sum-coordinate image and peak stats.
    Correlate {
        /// Frame-stack file (.qlfs).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "fft")]
        method: String,
    },
    /// Full linear-scan pipeline: profiles, edges, depth report, images.
    Scan(CommonArgs),
    /// Correlation-driven adaptive search instead of a full scan.
    Adaptive(CommonArgs),
    /// Rebuild the depth report from an edges.csv.
    Report {
        /// edges.csv produced by `scan`.
        #[arg(long)]
        edges: PathBuf,
    },
}

fn load(args: &CommonArgs) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::from_path(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.acquisition.seed = seed;
    }
    if let Some(frames) = args.frames {
        config.acquisition.n_frames = frames;
    }
    if let Some(method) = &args.method {
        config.pipeline.method = method.clone();
    }
    Ok(config)
}

fn hot_mask_from_dark(built: &qlidar::io::BuiltScenario) -> Result<HotPixelMask> {
    let dark_scene = qlidar::sim::Scene::empty(built.scene.width, built.scene.height);
    let dark = acquire_stack(
        &dark_scene,
        &built.detector,
        built.schedule.gate_at(0),
        built.dark_frames.max(2),
        built.seed ^ 0x9E37_79B9_7F4A_7C15,
    )?;
    Ok(build_hot_pixel_mask(&dark, built.pipeline.hot_pixel_threshold)?)
}

fn cmd_simulate(args: &CommonArgs) -> Result<()> {
    let built = load(args)?.build()?;
    std::fs::create_dir_all(&args.out)?;
    let dataset = simulate_linear_scan(
        &built.scene,
        &built.detector,
        &built.schedule,
        built.n_frames,
        built.seed,
    )?;
    for (i, stack) in dataset.stacks.iter().enumerate() {
        let path = args.out.join(format!("stack_{i:04}.qlfs"));
        write_frame_stack(stack, &path)?;
    }
    println!(
        "wrote {} stacks ({} frames each) to {}",
        dataset.len(),
        built.n_frames,
        args.out.display()
    );
    Ok(())
}

fn cmd_correlate(input: &Path, out: &Path, method: &str) -> Result<()> {
    let method: Method = method.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let stack = read_frame_stack(input)?;
    let gamma = gamma_plus(&stack, method)?;
    let corrected = remove_crosstalk(&gamma, &stack, Default::default())?;
    let stats = peak_stats(&corrected, 4, 4)?;
    std::fs::create_dir_all(out)?;
    let pgm = out.join("sum_image.pgm");
    export_pgm_f64(corrected.width(), corrected.height(), corrected.values(), &pgm)?;
    println!(
        "peak {:.4} at ({}, {}), background mean {:.5} std {:.5}, snr {:.2}",
        stats.peak_value,
        stats.peak_location.0,
        stats.peak_location.1,
        stats.background_mean,
        stats.background_std,
        stats.snr
    );
    println!("sum image written to {}", pgm.display());
    Ok(())
}

fn cmd_scan(args: &CommonArgs) -> Result<()> {
    let built = load(args)?.build()?;
    let run = run_built_scenario(&built, &args.out)?;
    println!(
        "scan complete: {} gates, {} intensity edge(s), {} correlation edge(s)",
        run.profiles.len(),
        run.intensity_edges.len(),
        run.correlation_edges.len()
    );
    for entry in &run.report.entries {
        println!(
            "  {} edge at {:.1} ps -> {:.1} mm{}",
            entry.label,
            entry.arrival_ps,
            entry.depth_mm,
            if entry.ambiguous { " (ambiguous)" } else { "" }
        );
    }
    println!("outputs in {}", run.out_dir.display());
    Ok(())
}

fn cmd_adaptive(args: &CommonArgs) -> Result<()> {
    let built = load(args)?.build()?;
    std::fs::create_dir_all(&args.out)?;
    let mask = hot_mask_from_dark(&built)?;
    let params = SearchParams {
        snr_threshold: built.pipeline.snr_threshold,
        profile: built.pipeline.profile,
        ..SearchParams::default()
    };
    let (scene, detector, schedule) =
        (built.scene.clone(), built.detector.clone(), built.schedule.clone());
    let seed = built.seed;
    let acquire = move |gate_index: usize, n_frames: usize| {
        acquire_stack_at_gate_index(&scene, &detector, &schedule, gate_index, n_frames, seed)
            .expect("probe acquisition")
    };
    let outcome = match correlation_driven_search(
        acquire,
        built.schedule.count,
        built.n_frames,
        &mask,
        &params,
    ) {
        Ok(o) => o,
        Err(e) => bail!("adaptive search failed: {e}"),
    };

    let probes_csv = args.out.join("probes.csv");
    let mut text = String::from("gate_index,gate_start_ps,corr_peak,corr_snr,phase\n");
    for p in &outcome.state.probed {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            p.gate_index, p.gate_start_ps, p.corr_peak, p.corr_snr, p.phase
        ));
    }
    std::fs::write(&probes_csv, text)?;

    let n_probes = outcome.state.probed.len();
    println!(
        "quantum edge at {:.1} ps -> {:.1} mm ({} probes, bracket {:?}, est. acquisition {:.2} s)",
        outcome.fit.t0_ps,
        depth_mm(outcome.fit.t0_ps),
        n_probes,
        outcome.state.bracket,
        probe_cost_model(n_probes, built.n_frames, 370.0, 255)
    );
    println!("probe log written to {}", probes_csv.display());
    Ok(())
}

fn cmd_report(edges: &Path) -> Result<()> {
    let text = std::fs::read_to_string(edges)?;
    let mut lines = text.lines();
    let header = lines.next().context("empty edges.csv")?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| {
        columns
            .iter()
            .position(|&c| c == name)
            .with_context(|| format!("missing column {name}"))
    };
    let (t0_col, label_col) = (col("t0_ps")?, col("label")?);

    let mut entries = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let t0: f64 = fields[t0_col].parse()?;
        entries.push((t0, fields[label_col].to_string()));
    }
    if entries.is_empty() {
        println!("no edges.");
        return Ok(());
    }
    for (t0, label) in &entries {
        println!("{label} edge: arrival {t0:.1} ps, depth {:.1} mm", depth_mm(*t0));
    }
    let quantum = entries
        .iter()
        .filter(|(_, l)| l == &EdgeLabel::Quantum.to_string())
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match quantum {
        Some((t0, _)) => println!("quantum return: {t0:.1} ps -> {:.1} mm", depth_mm(*t0)),
        None => println!("quantum return: none"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Correlate { input, out, method } => cmd_correlate(input, out, method),
        Command::Scan(args) => cmd_scan(args),
        Command::Adaptive(args) => cmd_adaptive(args),
        Command::Report { edges } => cmd_report(edges),
    }
}
