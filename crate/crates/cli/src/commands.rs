use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use sardrt::config::SceneConfig;
use sardrt::imaging::{read_raster, render, write_pgm, write_raster, Geometry, RadarConfig, SarImage};
use sardrt::learn::{grad_check, GradCheckOptions, HistoryRow, OptimState, StopReason, View};
use sardrt::scatter::DoubleScale;
use sardrt::scene::ParamMap;
use sardrt::Execution;
use serde_json::json;

use crate::manifest::Manifest;
use crate::{GradcheckArgs, LearnArgs, SimulateArgs};

struct Scene {
    cfg: SceneConfig,
    geom: Geometry,
    params: ParamMap,
    radars: Vec<RadarConfig>,
    inputs: Vec<PathBuf>,
}

fn load_scene(config: &Path, seed: Option<u64>) -> Result<Scene> {
    let mut cfg = SceneConfig::load(config)
        .with_context(|| format!("loading config {}", config.display()))?;
    if let Some(seed) = seed {
        cfg.radar.seed = seed;
    }
    let mesh = cfg.load_mesh()?;
    let params = cfg.initial_params(mesh.num_vertices())?;
    let radars = cfg.radars()?;
    let mut inputs = vec![config.to_path_buf(), cfg.resolve(&cfg.mesh)];
    if let Some(csv) = &cfg.params.csv {
        inputs.push(cfg.resolve(csv));
    }
    Ok(Scene {
        geom: Geometry::new(mesh)?,
        cfg,
        params,
        radars,
        inputs,
    })
}

fn output_dir(scene: &Scene, out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| scene.cfg.resolve(&scene.cfg.outputs));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn start_manifest(command: &'static str, scene: &Scene, exec: Execution) -> Result<Manifest> {
    let mut m = Manifest::new(command, exec == Execution::Sequential, scene.cfg.to_toml_string());
    for p in &scene.inputs {
        m.add_input(p)?;
    }
    Ok(m)
}

/// Writes `<stem>.sarf` and `<stem>.pgm` and records both in the manifest.
fn save_image(dir: &Path, stem: &str, img: &SarImage, manifest: &mut Manifest) -> Result<()> {
    for (ext, is_raster) in [("sarf", true), ("pgm", false)] {
        let name = format!("{stem}.{ext}");
        let path = dir.join(&name);
        if is_raster {
            write_raster(&path, img)?;
        } else {
            write_pgm(&path, img)?;
        }
        manifest.add_output(dir, &name)?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs, exec: Execution) -> Result<ExitCode> {
    let scene = load_scene(&args.config, args.seed)?;
    let dir = output_dir(&scene, &args.out)?;
    let mut manifest = start_manifest("simulate", &scene, exec)?;
    let mut shapes = Vec::new();
    for (i, radar) in scene.radars.iter().enumerate() {
        let (img, ledger) = render(&scene.geom, &scene.params, radar, exec)
            .with_context(|| format!("rendering view {i}"))?;
        log::info!("view {i}: {} hits, {}x{} pixels", ledger.len(), img.rows(), img.cols());
        save_image(&dir, &format!("view_{i}"), &img, &mut manifest)?;
        shapes.push([img.rows(), img.cols()]);
    }
    manifest.summary = json!({ "views": scene.radars.len(), "shapes": shapes });
    manifest.write(&dir)?;
    println!("wrote {} views to {}", scene.radars.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn learn(args: &LearnArgs, exec: Execution) -> Result<ExitCode> {
    let mut scene = load_scene(&args.config, args.seed)?;
    if let Some(iters) = args.iters {
        scene.cfg.optim.iters = iters;
    }
    if args.refs.len() != scene.radars.len() {
        bail!(
            "{} reference images given but the config defines {} views",
            args.refs.len(),
            scene.radars.len()
        );
    }
    let dir = output_dir(&scene, &args.out)?;
    let mut manifest = start_manifest("learn", &scene, exec)?;

    let held: Vec<usize> = scene.cfg.optim.held_out.clone();
    let mut train = Vec::new();
    let mut held_out = Vec::new();
    let mut order = Vec::new();
    for (i, (radar, path)) in scene.radars.iter().zip(&args.refs).enumerate() {
        let reference = read_raster(path)
            .with_context(|| format!("reading reference for view {i} from {}", path.display()))?;
        manifest.add_input(path)?;
        let view = View {
            radar: radar.clone(),
            reference,
        };
        if held.contains(&i) {
            held_out.push((i, view));
        } else {
            train.push((i, view));
        }
    }
    order.extend(train.iter().map(|(i, _)| *i));
    order.extend(held_out.iter().map(|(i, _)| *i));
    let train: Vec<View> = train.into_iter().map(|(_, v)| v).collect();
    let held_out: Vec<View> = held_out.into_iter().map(|(_, v)| v).collect();

    let cfg = &scene.cfg;
    let n = scene.geom.mesh.num_vertices();
    let mut init = scene.params.clone();
    let mut state =
        OptimState::new(cfg.adam(), cfg.bounds()?, cfg.space()?, cfg.binding(n)?, &mut init)?;
    let outcome = sardrt::learn::learn(
        &scene.geom,
        init,
        &train,
        &held_out,
        &mut state,
        &cfg.learn_config(exec),
    )?;

    outcome.params.save_csv(&dir.join("params_final.csv"))?;
    manifest.add_output(&dir, "params_final.csv")?;
    HistoryRow::save_csv(&outcome.history, &dir.join("history.csv"))?;
    manifest.add_output(&dir, "history.csv")?;
    for (img, view) in outcome.images.iter().zip(&order) {
        save_image(&dir, &format!("final_view_{view}"), img, &mut manifest)?;
    }

    let last = outcome.history.last();
    let stop = match &outcome.stop {
        StopReason::Budget => "budget".to_string(),
        StopReason::EarlyStop => "early_stop".to_string(),
        StopReason::NonFinite(m) => format!("non_finite: {m}"),
    };
    manifest.summary = json!({
        "steps": outcome.steps,
        "stop": stop,
        "initial_loss": outcome.initial_loss(),
        "final_loss": last.map(|r| r.total_loss),
        "view_order": order,
    });
    manifest.write(&dir)?;
    println!(
        "{} steps ({stop}); loss {:.4e} -> {:.4e}; results in {}",
        outcome.steps,
        outcome.initial_loss(),
        last.map_or(f64::NAN, |r| r.total_loss),
        dir.display()
    );
    if let StopReason::NonFinite(m) = &outcome.stop {
        eprintln!("stopped on a non-finite value ({m}); params_final.csv holds the last finite parameters");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn gradcheck(args: &GradcheckArgs, exec: Execution) -> Result<ExitCode> {
    let scene = load_scene(&args.config, None)?;
    let radar = scene
        .radars
        .get(args.view)
        .with_context(|| format!("view {} not configured ({} views)", args.view, scene.radars.len()))?;
    let opts = GradCheckOptions {
        probes: args.probes,
        seed: args.seed.unwrap_or(scene.cfg.optim.seed),
        loss: scene.cfg.loss,
        space: scene.cfg.space()?,
        exec,
        corrupt_adjoint: args.corrupt_adjoint,
        ..Default::default()
    };
    let model = DoubleScale { wave: radar.wave };
    let report = grad_check(&scene.geom, &scene.params, radar, &model, None, &opts)?;

    let mut table = Vec::new();
    writeln!(table, "vertex,channel,analytic,numeric,rel_error")?;
    for p in &report.probes {
        writeln!(
            table,
            "{},{},{:e},{:e},{:e}",
            p.vertex,
            p.channel.name(),
            p.analytic,
            p.numeric,
            p.rel_error
        )?;
    }
    let table = String::from_utf8(table)?;
    print!("{table}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("gradcheck.csv"), &table)?;
    }
    let ok = report.passes(args.tol);
    println!(
        "{} probes, max rel error {:.3e}, median {:.3e}: {}",
        report.probes.len(),
        report.max_rel_error,
        report.median_rel_error,
        if ok { "ok" } else { "FAILED" }
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
