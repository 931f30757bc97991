//! `bench`: experiments, synthetic data generation, one-off fusion, model
//! training, and the classic two-sensor disagreement demo.

use anyhow::{bail, Context, Result};
use bench_harness::{
    generate_synthetic, load_feature_csv, run_experiment, ExperimentConfig, Standardizer,
    SyntheticSpec,
};
use clap::{Parser, Subcommand};
use evidential_train::TrainConfig;
use fusion_ops::{fuse_dbf, FusionMethod};
use sl_core::Opinion;
use std::io::Read;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "bench", about = "Multimodal evidential fusion benchmarks", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a full experiment from a config file and write report artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.json/report.csv/SVGs/loss histories.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate a synthetic dataset and write it as CSV files.
    Gen {
        /// Spec file (key = value): classes, views, dims, separation,
        /// noise, samples, seed.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse a JSON array of opinions read from a file or standard input.
    Fuse {
        #[arg(long)]
        method: FusionMethod,
        /// Agreement sharpness for dbf.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Apply a permutation (e.g. `2,0,1`) before fusing; handy for
        /// demonstrating baf's order dependence.
        #[arg(long)]
        order: Option<String>,
        /// Read opinions from this file instead of standard input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Train evidential networks on CSV data and save the model.
    Train {
        /// Training config file (key = value, TrainConfig keys).
        #[arg(long)]
        config: PathBuf,
        /// Directory holding features_v0.csv, features_v1.csv, ... and
        /// labels.csv.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        what: DemoCmd,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Fuse two maximally disagreeing near-dogmatic opinions with every
    /// method and print the resulting beliefs and uncertainties.
    Zadeh,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { config, out } => cmd_run(&config, &out),
        Cmd::Gen { spec, out } => cmd_gen(&spec, &out),
        Cmd::Fuse {
            method,
            lambda,
            order,
            input,
        } => cmd_fuse(method, lambda, order.as_deref(), input.as_deref()),
        Cmd::Train { config, data, out } => cmd_train(&config, &data, &out),
        Cmd::Demo { what: DemoCmd::Zadeh } => cmd_demo_zadeh(),
    }
}

fn cmd_run(config: &Path, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig::from_file(config)
        .with_context(|| format!("reading experiment config {}", config.display()))?;
    let report = run_experiment(&cfg, out)?;
    println!(
        "{} methods x {} seeds in {:.1}s -> {}",
        cfg.methods.len(),
        cfg.seeds.len(),
        report.wall_time_seconds,
        out.join("report.json").display()
    );
    for m in &report.methods {
        println!(
            "  {:>5}: clean acc {:.4} +- {:.4}, conflict AUC {:.4} +- {:.4}",
            m.method, m.clean_accuracy.mean, m.clean_accuracy.std, m.auc.mean, m.auc.std
        );
    }
    Ok(())
}

fn cmd_gen(spec_path: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading spec {}", spec_path.display()))?;
    let spec = SyntheticSpec::from_key_values(&text)?;
    let data = generate_synthetic(&spec)?;
    for (name, batch) in [("train", &data.train), ("test", &data.test)] {
        let dir = out.join(name);
        std::fs::create_dir_all(&dir)?;
        for v in 0..batch.num_views() {
            bench_harness::csv_io::write_matrix_csv(
                &dir.join(format!("features_v{v}.csv")),
                batch.view(v),
            )?;
        }
        bench_harness::csv_io::write_labels_csv(&dir.join("labels.csv"), batch.labels())?;
        println!("{}: {} samples, {} views", dir.display(), batch.len(), batch.num_views());
    }
    Ok(())
}

fn parse_order(text: &str, n: usize) -> Result<Vec<usize>> {
    let order: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse().context("order entries must be indices"))
        .collect::<Result<_>>()?;
    let mut seen = vec![false; n];
    if order.len() != n {
        bail!("order has {} entries for {} opinions", order.len(), n);
    }
    for &i in &order {
        if i >= n || seen[i] {
            bail!("order must be a permutation of 0..{n}");
        }
        seen[i] = true;
    }
    Ok(order)
}

fn cmd_fuse(
    method: FusionMethod,
    lambda: f64,
    order: Option<&str>,
    input: Option<&Path>,
) -> Result<()> {
    let text = match input {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let mut opinions: Vec<Opinion> =
        serde_json::from_str(&text).context("input must be a JSON array of opinions")?;
    if let Some(order) = order {
        let perm = parse_order(order, opinions.len())?;
        opinions = perm.into_iter().map(|i| opinions[i].clone()).collect();
    }

    let output = if method == FusionMethod::Dbf {
        let (fused, diag) = fuse_dbf(&opinions, lambda)?;
        serde_json::json!({
            "method": method.to_string(),
            "lambda": lambda,
            "fused": fused,
            "diagnostics": {
                "conflict": diag.conflict.rows(),
                "agreement": diag.agreement.rows(),
                "discounts": diag.discounts.as_slice(),
            },
        })
    } else {
        let fused = method.fuse(&opinions, lambda)?;
        serde_json::json!({
            "method": method.to_string(),
            "fused": fused,
            "diagnostics": null,
        })
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

fn discover_features(data: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    loop {
        let candidate = data.join(format!("features_v{}.csv", paths.len()));
        if !candidate.exists() {
            break;
        }
        paths.push(candidate);
    }
    if paths.is_empty() {
        bail!("no features_v0.csv in {}", data.display());
    }
    Ok(paths)
}

fn cmd_train(config: &Path, data: &Path, out: &Path) -> Result<()> {
    let cfg = TrainConfig::from_file(config)
        .with_context(|| format!("reading training config {}", config.display()))?;
    let features = discover_features(data)?;
    let batch = load_feature_csv(&features, &data.join("labels.csv"))?;
    let batch = Standardizer::fit(&batch).apply(&batch);

    let outcome = evidential_train::train(&batch, &cfg)?;
    std::fs::create_dir_all(out)?;
    outcome.network.save(&out.join("model.json"))?;
    evidential_train::write_loss_history(&out.join("loss_history.csv"), &outcome.history)?;

    let (preds, _) =
        bench_harness::fused_scores(&outcome.network, &batch, cfg.fusion, cfg.lambda)?;
    let hits = preds
        .iter()
        .zip(batch.labels())
        .filter(|(p, l)| p == l)
        .count();
    let last = outcome.history.last().expect("at least one epoch");
    println!(
        "trained {} epochs on {} samples ({} views); final loss {:.6}, train accuracy {:.4}",
        outcome.history.len(),
        batch.len(),
        batch.num_views(),
        last.total,
        hits as f64 / batch.len() as f64
    );
    println!("model -> {}", out.join("model.json").display());
    Ok(())
}

fn cmd_demo_zadeh() -> Result<()> {
    let a = Opinion::try_new(vec![0.99, 0.0, 0.01], 0.0, None)?;
    let b = Opinion::try_new(vec![0.0, 0.99, 0.01], 0.0, None)?;
    let pair = [a, b];

    println!("Two sources, three classes: near-total disagreement, no uncertainty.");
    println!("source 1: b = (0.99, 0.00, 0.01), u = 0");
    println!("source 2: b = (0.00, 0.99, 0.01), u = 0\n");
    println!("{:<10} {:>8} {:>8} {:>8} {:>8}", "method", "b1", "b2", "b3", "u");

    let mut rows: Vec<(String, Opinion)> = Vec::new();
    for method in [FusionMethod::Bcf, FusionMethod::Cbf, FusionMethod::Baf] {
        rows.push((method.to_string(), method.fuse(&pair, 1.0)?));
    }
    for lambda in [1.0, 3.0] {
        let (fused, _) = fuse_dbf(&pair, lambda)?;
        rows.push((format!("dbf l={lambda}"), fused));
    }
    for (name, fused) in rows {
        let b = fused.beliefs();
        println!(
            "{:<10} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            name,
            b[0],
            b[1],
            b[2],
            fused.uncertainty()
        );
    }
    Ok(())
}
