//! Subcommand definitions and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use scaleloss_core::evaluator::{coco_iou_thresholds, evaluate, validate_detections, EvalConfig};
use scaleloss_core::harness::{
    beta_sweep, default_betas, gen_scene, iou_decay_curve, loss_share_report, regress, JitterModel, LossVariant,
    SceneConfig,
};
use scaleloss_core::losses::{position_loss, sfl_weights, total_loss, LossConfig, DEFAULT_BETA};
use scaleloss_core::relay::{init_relay_params, random_pyramid, relay_forward_detailed, RelayConfig};
use scaleloss_core::rng::DEFAULT_SEED;

use crate::error::{CliError, Result};
use crate::output::{check_out_dir, resolve_out_dir, write_atomic, OUT_DIR_ENV};
use crate::report::{self, RelayLevelStats, RunInfo};
use crate::{coco, pairs};

#[derive(Debug, Parser)]
#[command(
    name = "scaleloss",
    version,
    about = "Scale-adaptive box regression loss: evaluation, loss inspection and synthetic experiments"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output directory for written artifacts.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,

    /// Echo the resolved configuration to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// COCO-style AP with very tiny / tiny / small / medium buckets.
    Eval(EvalArgs),
    /// Loss breakdown for a CSV of matched boxes.
    Loss(LossArgs),
    /// IoU decay under pixel shifts, as CSV and optionally SVG.
    Curves(CurvesArgs),
    /// Loss shares per area tercile under the plain and scale-adaptive losses.
    Demo(DemoArgs),
    /// Final IoU per size bucket for several beta values.
    Sweep(SweepArgs),
    /// Forward pass of the relay attention layer on a random pyramid.
    RelayDemo(RelayArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// COCO annotation file.
    pub gt: PathBuf,
    /// COCO results file.
    pub dets: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub max_dets: usize,
    /// Comma separated; defaults to 0.50:0.05:0.95.
    #[arg(long, value_delimiter = ',')]
    pub iou_thresholds: Option<Vec<f64>>,
    /// Also write `eval.csv` to the output directory.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// CSV with header gt_x,gt_y,gt_w,gt_h,pr_x,pr_y,pr_w,pr_h.
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8.0, 16.0, 32.0, 64.0])]
    pub sides: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])]
    pub shifts: Vec<f64>,
    /// Also write `curves.svg`.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Objects per bucket: very tiny, tiny, small, medium.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [8, 8, 8, 8])]
    pub counts: Vec<usize>,
    /// `F` for a pure axis shift of fraction F, or `uniform:T:S`.
    #[arg(long, default_value = "0.25", value_parser = parse_jitter)]
    pub jitter: JitterModel,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Defaults to 1, 1/ln 2 and 2/ln 2.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct RelayArgs {
    /// Levels as CxHxW, finest first.
    #[arg(long, value_delimiter = ',', value_parser = parse_shape, default_value = "256x80x80,512x40x40,1024x20x20")]
    pub shapes: Vec<(usize, usize, usize)>,
    #[arg(long, default_value_t = 16)]
    pub reduction: usize,
    #[arg(long, default_value_t = 7)]
    pub kernel: usize,
}

fn parse_jitter(s: &str) -> std::result::Result<JitterModel, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("not a number: {v:?}"));
    match s.strip_prefix("uniform:") {
        Some(rest) => {
            let (t, sc) = rest.split_once(':').ok_or("expected uniform:TRANSLATION:SCALE")?;
            Ok(JitterModel::Uniform { translation: num(t)?, scale: num(sc)? })
        }
        None => Ok(JitterModel::AxisShift { fraction: num(s)? }),
    }
}

fn parse_shape(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split('x').collect();
    let dims: Vec<usize> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
    match dims[..] {
        [c, h, w] if parts.len() == 3 => Ok((c, h, w)),
        _ => Err(format!("expected CxHxW, got {s:?}")),
    }
}

impl SceneArgs {
    fn scene(&self, seed: u64) -> SceneConfig {
        let mut counts = [0; 4];
        counts.copy_from_slice(&self.counts);
        SceneConfig { counts, jitter: self.jitter, seed, ..SceneConfig::default() }
    }
}

fn require_file(p: &Path) -> Result<()> {
    match std::fs::metadata(p) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::io(p, std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a regular file"))),
        Err(e) => Err(CliError::io(p, e)),
    }
}

/// Output directory, checked up front so no work is wasted on a bad path.
fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = resolve_out_dir(cli.out.as_deref());
    check_out_dir(&dir)?;
    Ok(dir)
}

fn emit(out: &mut dyn Write, path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)?;
    writeln!(out, "wrote {}", path.display()).map_err(|e| CliError::io("<stdout>", e))
}

fn print(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    if cli.verbose > 0 {
        eprintln!("{cli:#?}");
    }
    match &cli.command {
        Command::Eval(a) => cmd_eval(cli, a, out),
        Command::Loss(a) => cmd_loss(a, out),
        Command::Curves(a) => cmd_curves(cli, a, out),
        Command::Demo(a) => cmd_demo(cli, a, out),
        Command::Sweep(a) => cmd_sweep(cli, a, out),
        Command::RelayDemo(a) => cmd_relay(cli, a, out),
    }
}

fn cmd_eval(cli: &Cli, a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    require_file(&a.gt)?;
    require_file(&a.dets)?;
    let dir = if a.csv { Some(out_dir(cli)?) } else { None };
    let cfg = EvalConfig {
        iou_thresholds: a.iou_thresholds.clone().unwrap_or_else(coco_iou_thresholds),
        max_dets_per_image: a.max_dets,
        ..EvalConfig::default()
    };
    cfg.validate()?;
    let gts = coco::load_ground_truth(&a.gt)?;
    let dets = coco::load_detections(&a.dets)?;
    validate_detections(&gts, &dets).map_err(|e| CliError::parse(&a.dets, e.to_string()))?;
    let r = evaluate(&gts, &dets, &cfg)?;
    print(out, &report::eval_table(&r, gts.categories()))?;
    if let Some(dir) = dir {
        emit(out, &dir.join("eval.csv"), report::eval_csv(&r).as_bytes())?;
    }
    Ok(())
}

fn cmd_loss(a: &LossArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = LossConfig::new(a.alpha, a.beta)?;
    let pairs = pairs::load_pairs(&a.pairs)?;
    let pos = position_loss(&pairs, &cfg)?;
    let b = total_loss(0.0, 0.0, pos)?;
    let w = sfl_weights(&pairs, cfg.beta)?;
    print(out, &report::loss_text(&b, &w))
}

fn cmd_curves(cli: &Cli, a: &CurvesArgs, out: &mut dyn Write) -> Result<()> {
    if a.sides.iter().chain(&a.shifts).any(|v| !v.is_finite()) || a.sides.iter().any(|&s| s <= 0.0) {
        return Err(CliError::Config("configuration error: sides must be positive and shifts finite".into()));
    }
    let dir = out_dir(cli)?;
    let pts = iou_decay_curve(&a.sides, &a.shifts);
    let info = RunInfo { seed: cli.seed, alpha: 1.0, betas: vec![DEFAULT_BETA], lr: 0.0, steps: 0 };
    emit(out, &dir.join("curves.csv"), report::curves_csv(&pts, &info).as_bytes())?;
    if a.svg {
        emit(out, &dir.join("curves.svg"), report::curves_svg(&pts).as_bytes())?;
    }
    Ok(())
}

fn cmd_demo(cli: &Cli, a: &DemoArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = LossConfig::new(a.alpha, a.beta)?;
    let scene_cfg = a.scene.scene(cli.seed);
    scene_cfg.validate()?;
    let dir = out_dir(cli)?;
    let s = gen_scene(&scene_cfg)?;
    let (steps, lr) = (a.scene.steps, a.scene.lr);
    let plain = regress(&s.gts, &s.preds, LossVariant::Plain, &cfg, steps, lr)?;
    let sfl = regress(&s.gts, &s.preds, LossVariant::Sfl, &cfg, steps, lr)?;
    let combined = regress(&s.gts, &s.preds, LossVariant::L1Sfl, &cfg, steps, lr)?;
    let shares = loss_share_report(&plain, &sfl)?;
    print(out, &report::demo_summary(&[&plain, &sfl, &combined]))?;
    print(out, &format!("smallest tercile rebalanced: {}\n", shares.rebalanced()))?;
    let info = RunInfo { seed: cli.seed, alpha: cfg.alpha, betas: vec![cfg.beta], lr, steps };
    emit(out, &dir.join("demo.csv"), report::demo_csv(&shares, &info).as_bytes())
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let betas = a.betas.clone().unwrap_or_else(default_betas);
    let scene_cfg = a.scene.scene(cli.seed);
    scene_cfg.validate()?;
    let dir = out_dir(cli)?;
    let rows = beta_sweep(&scene_cfg, &betas, a.scene.steps, a.scene.lr)?;
    let info = RunInfo { seed: cli.seed, alpha: 1.0, betas: betas.clone(), lr: a.scene.lr, steps: a.scene.steps };
    emit(out, &dir.join("sweep.csv"), report::sweep_csv(&rows, &info).as_bytes())
}

fn cmd_relay(cli: &Cli, a: &RelayArgs, out: &mut dyn Write) -> Result<()> {
    let dir = out_dir(cli)?;
    let cfg = RelayConfig { reduction: a.reduction, kernel_size: a.kernel };
    let counts: Vec<usize> = a.shapes.iter().map(|s| s.0).collect();
    let params = init_relay_params(&counts, cfg, cli.seed)?;
    let input = random_pyramid(&a.shapes, cli.seed)?;
    let r = relay_forward_detailed(&input, &params)?;
    let range = |v: &mut dyn Iterator<Item = f64>| {
        v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let mut stats = Vec::new();
    for (l, (x, y)) in input.levels().iter().zip(r.pyramid.levels()).enumerate() {
        let ca = range(&mut r.channel_attention[l].iter().copied());
        let sa = (r.spatial_attention[l].min(), r.spatial_attention[l].max());
        if x.shape() != y.shape() {
            return Err(CliError::Numerical(format!(
                "relay level {l}: shape changed from {:?} to {:?}",
                x.shape(),
                y.shape()
            )));
        }
        if !(ca.0 > 0.0 && ca.1 < 1.0 && sa.0 > 0.0 && sa.1 < 1.0) {
            return Err(CliError::Numerical(format!("relay level {l}: attention left (0, 1): {ca:?} {sa:?}")));
        }
        stats.push(RelayLevelStats {
            level: l,
            shape: x.shape(),
            out_shape: y.shape(),
            input: [x.min(), x.max(), x.mean()],
            output: [y.min(), y.max(), y.mean()],
            channel_attention: ca,
            spatial_attention: sa,
        });
    }
    for s in &stats {
        print(
            out,
            &format!(
                "level {} {:?} -> {:?}  in [{:.4}, {:.4}] mean {:.4}  out [{:.4}, {:.4}] mean {:.4}  ca [{:.4}, {:.4}]  sa [{:.4}, {:.4}]\n",
                s.level,
                s.shape,
                s.out_shape,
                s.input[0],
                s.input[1],
                s.input[2],
                s.output[0],
                s.output[1],
                s.output[2],
                s.channel_attention.0,
                s.channel_attention.1,
                s.spatial_attention.0,
                s.spatial_attention.1
            ),
        )?;
    }
    print(out, "shapes preserved, attention within (0, 1)\n")?;
    emit(out, &dir.join("relay.csv"), report::relay_csv(&stats, cli.seed).as_bytes())
}
