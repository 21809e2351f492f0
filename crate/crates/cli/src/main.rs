//! Command-line front end: seeded, replicate-parallel experiment drivers with
//! machine-readable output.

mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use gibbsim_core::coupling::{
    disagreement_sample, verify_disagreement, CouplingContext,
};
use gibbsim_core::diagnostics::correlation_decay;
use gibbsim_core::order::OrderInterval;
use gibbsim_core::partition::gibbs_rejection_sample;
use gibbsim_core::percolation::{connection_sweep, estimate_threshold, fit_decay};
use gibbsim_core::rng::{RngStream, Role};
use gibbsim_core::thinning::ThinningKernel;
use gibbsim_core::verify::{run_all, VerifyOptions};
use gibbsim_core::Configuration;
use output::{fmt_f64, json_object, json_points, json_str};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "gibbsim",
    about = "Gibbs ball processes: dependent thinning, disagreement coupling, percolation",
    version
)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured replicate count.
    #[arg(long, global = true)]
    reps: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format where the command supports both.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw configurations from the specification (thinning or rejection).
    Sample,
    /// Draw dependent thinnings: kept points plus the dominating draw.
    Thin,
    /// Run the disagreement coupling and verify it structurally.
    Couple,
    /// Boolean-model connection sweeps, decay fits, threshold estimation.
    Percolate,
    /// Correlation decay between distant cells of the specification.
    Decay,
    /// Run the invariant suite; exits nonzero on any failure.
    Verify,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.run.reps = reps;
    }
    if cli.print_config {
        emit(&cli.out, cfg.to_toml())?;
        return Ok(0);
    }
    let format = cli.format;
    let (text, code) = match cli.command {
        Command::Sample => (cmd_sample(&cfg, format)?, 0),
        Command::Thin => (cmd_thin(&cfg, format)?, 0),
        Command::Couple => (cmd_couple(&cfg, format)?, 0),
        Command::Percolate => (cmd_percolate(&cfg, format)?, 0),
        Command::Decay => (cmd_decay(&cfg, format)?, 0),
        Command::Verify => cmd_verify(&cfg)?,
    };
    emit(&cli.out, text)?;
    Ok(code)
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn require_jsonl(format: Option<Format>, cmd: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        bail!("{cmd} emits JSON lines; --format csv is not available here");
    }
    Ok(())
}

/// Run replicates 0..reps deterministically, optionally across threads;
/// outputs are merged in replicate order so the bytes never depend on the
/// parallelism degree.
fn replicate_lines<F>(reps: u64, parallel: usize, f: F) -> Result<Vec<String>>
where
    F: Fn(u64) -> Result<String> + Sync + Send,
{
    if parallel <= 1 {
        (0..reps).map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .context("building the worker pool")?;
        pool.install(|| (0..reps).into_par_iter().map(f).collect())
    }
}

fn cmd_sample(cfg: &RunConfig, format: Option<Format>) -> Result<String> {
    require_jsonl(format, "sample")?;
    let spec = cfg.build_spec()?;
    let z_method = cfg.z_method()?;
    let root = RngStream::from_seed(cfg.run.seed);
    let sampler = cfg.run.sampler.clone();
    let lines = replicate_lines(cfg.run.reps, cfg.run.parallel, |i| {
        let stream = root.replicate(i);
        let (points, meta) = match sampler.as_str() {
            "thin" => {
                let kernel = ThinningKernel::new(
                    spec.clone(),
                    OrderInterval::full(),
                    Configuration::empty(),
                    z_method.clone(),
                )
                .map_err(anyhow::Error::msg)?
                .with_bias_budget(cfg.estimator.bias_budget);
                let (kept, _, diag) = kernel.thin_sample(stream).map_err(anyhow::Error::msg)?;
                (
                    kept,
                    json_object(&[
                        ("sampler", json_str("thin")),
                        ("bias_used", fmt_f64(diag.bias_used)),
                        ("budget_exceeded", diag.budget_exceeded.to_string()),
                    ]),
                )
            }
            "rejection" => {
                let mut rng = stream.role(Role::Scratch).rng();
                let omega = gibbs_rejection_sample(
                    &spec,
                    &OrderInterval::full(),
                    &Configuration::empty(),
                    &mut rng,
                )
                .map_err(anyhow::Error::msg)?;
                (omega, json_object(&[("sampler", json_str("rejection"))]))
            }
            other => bail!("run.sampler: unknown sampler '{other}'"),
        };
        Ok(json_object(&[
            ("replicate", i.to_string()),
            ("count", points.len().to_string()),
            ("points", json_points(&points, &spec.codec)),
            ("meta", meta),
        ]))
    })?;
    Ok(lines.join("\n") + "\n")
}

fn cmd_thin(cfg: &RunConfig, format: Option<Format>) -> Result<String> {
    require_jsonl(format, "thin")?;
    let spec = cfg.build_spec()?;
    let z_method = cfg.z_method()?;
    let root = RngStream::from_seed(cfg.run.seed);
    let lines = replicate_lines(cfg.run.reps, cfg.run.parallel, |i| {
        let kernel = ThinningKernel::new(
            spec.clone(),
            OrderInterval::full(),
            Configuration::empty(),
            z_method.clone(),
        )
        .map_err(anyhow::Error::msg)?
        .with_bias_budget(cfg.estimator.bias_budget);
        let (kept, dominating, diag) = kernel
            .thin_sample(root.replicate(i))
            .map_err(anyhow::Error::msg)?;
        Ok(json_object(&[
            ("replicate", i.to_string()),
            ("count", kept.len().to_string()),
            ("points", json_points(&kept, &spec.codec)),
            ("dominating", json_points(&dominating, &spec.codec)),
            (
                "meta",
                json_object(&[
                    ("bias_used", fmt_f64(diag.bias_used)),
                    ("budget_exceeded", diag.budget_exceeded.to_string()),
                ]),
            ),
        ]))
    })?;
    Ok(lines.join("\n") + "\n")
}

fn cmd_couple(cfg: &RunConfig, format: Option<Format>) -> Result<String> {
    require_jsonl(format, "couple")?;
    let spec = cfg.build_spec()?;
    let gamma1 = cfg.boundary(&cfg.couple.gamma1)?;
    let gamma2 = cfg.boundary(&cfg.couple.gamma2)?;
    let ctx = CouplingContext {
        spec: spec.clone(),
        z_method: cfg.z_method()?,
        bias_budget: cfg.estimator.bias_budget,
        depth_cap: cfg.couple.depth_cap,
        shared_streams: cfg.couple.shared_streams,
    };
    let root = RngStream::from_seed(cfg.run.seed);
    let wbits = spec.wbits();
    let lines = replicate_lines(cfg.run.reps, cfg.run.parallel, |i| {
        match disagreement_sample(&ctx, &gamma1, &gamma2, root.replicate(i)) {
            Ok(sample) => {
                let report = verify_disagreement(&sample, wbits);
                Ok(json_object(&[
                    ("replicate", i.to_string()),
                    ("xi1", json_points(&sample.xi1, &spec.codec)),
                    ("xi2", json_points(&sample.xi2, &spec.codec)),
                    ("xi3", json_points(&sample.xi3, &spec.codec)),
                    ("layer_count", sample.depth().to_string()),
                    (
                        "disagreement_count",
                        sample.disagreement().len().to_string(),
                    ),
                    ("agreement_points", sample.agreement_points.to_string()),
                    ("verified", report.ok().to_string()),
                    ("bias_used", fmt_f64(sample.diagnostics.bias_used)),
                ]))
            }
            Err(err) => Ok(json_object(&[
                ("replicate", i.to_string()),
                ("aborted", "true".into()),
                ("error", json_str(&err.to_string())),
            ])),
        }
    })?;
    // summary over the parsed fields we just produced
    let mut violations = 0u64;
    let mut aborted = 0u64;
    let mut depth_hist: Vec<u64> = Vec::new();
    for line in &lines {
        if line.contains("\"aborted\":true") {
            aborted += 1;
            continue;
        }
        if line.contains("\"verified\":false") {
            violations += 1;
        }
        if let Some(depth) = field_u64(line, "layer_count") {
            let d = depth as usize;
            if depth_hist.len() <= d {
                depth_hist.resize(d + 1, 0);
            }
            depth_hist[d] += 1;
        }
    }
    let hist = format!(
        "[{}]",
        depth_hist
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let summary = json_object(&[
        (
            "summary",
            json_object(&[
                ("records", cfg.run.reps.to_string()),
                ("violations", violations.to_string()),
                ("aborted", aborted.to_string()),
                ("depth_histogram", hist),
            ]),
        ),
    ]);
    Ok(lines.join("\n") + "\n" + &summary + "\n")
}

fn field_u64(line: &str, key: &str) -> Option<u64> {
    let tag = format!("\"{key}\":");
    let at = line.find(&tag)? + tag.len();
    let rest = &line[at..];
    let end = rest.find([',', '}'])?;
    rest[..end].parse().ok()
}

fn cmd_percolate(cfg: &RunConfig, format: Option<Format>) -> Result<String> {
    let window = cfg.build_window()?;
    let law = cfg.build_law()?;
    let p = &cfg.percolate;
    let mut rng = RngStream::from_seed(cfg.run.seed).rng();
    let cells = connection_sweep(&window, &p.alphas, &law, &p.distances, cfg.run.reps, &mut rng)
        .map_err(anyhow::Error::msg)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for c in &cells {
        rows.push(vec![
            fmt_f64(c.alpha),
            fmt_f64(c.distance),
            fmt_f64(c.probability()),
            fmt_f64(c.std_error()),
            c.reps.to_string(),
            cfg.run.seed.to_string(),
        ]);
    }
    if p.fit_decay {
        for &alpha in &p.alphas {
            let table: Vec<(f64, f64, f64)> = cells
                .iter()
                .filter(|c| c.alpha == alpha)
                .map(|c| (c.distance, c.probability(), c.std_error()))
                .filter(|&(_, prob, _)| 0.0 < prob && prob < 1.0)
                .collect();
            if table.len() >= 4 {
                if let Ok(fit) = fit_decay(&table) {
                    for (name, value) in [
                        ("kappa", fit.kappa),
                        ("prefactor", fit.prefactor),
                        ("r_squared", fit.r_squared),
                    ] {
                        rows.push(vec![
                            fmt_f64(alpha),
                            name.into(),
                            fmt_f64(value),
                            fmt_f64(0.0),
                            cfg.run.reps.to_string(),
                            cfg.run.seed.to_string(),
                        ]);
                    }
                }
            }
        }
    }
    if p.estimate_threshold {
        if p.threshold_sizes.len() != 2 || p.threshold_bracket.len() != 2 {
            bail!("percolate.threshold_sizes and threshold_bracket need two entries each");
        }
        let est = estimate_threshold(
            window.dim(),
            &law,
            &(p.threshold_sizes[0], p.threshold_sizes[1]),
            &(p.threshold_bracket[0], p.threshold_bracket[1]),
            p.threshold_reps,
            p.threshold_bisections,
            p.threshold_bootstrap,
            window.wbits(),
            &mut rng,
        )
        .map_err(anyhow::Error::msg)?;
        for (name, value) in [
            ("alpha_c", est.alpha_c),
            ("alpha_c_ci_lo", est.ci_lo),
            ("alpha_c_ci_hi", est.ci_hi),
        ] {
            rows.push(vec![
                "threshold".into(),
                name.into(),
                fmt_f64(value),
                fmt_f64(0.0),
                p.threshold_reps.to_string(),
                cfg.run.seed.to_string(),
            ]);
        }
    }
    let header = ["alpha", "distance", "p_connect", "se", "reps", "seed"];
    Ok(render_table(&header, &rows, format.unwrap_or(Format::Csv)))
}

fn cmd_decay(cfg: &RunConfig, format: Option<Format>) -> Result<String> {
    let spec = cfg.build_spec()?;
    let mut rng = RngStream::from_seed(cfg.run.seed).rng();
    let decay = correlation_decay(
        &spec,
        cfg.decay.cell_len,
        &cfg.decay.separations,
        cfg.run.reps,
        &mut rng,
    )
    .map_err(anyhow::Error::msg)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in &decay.rows {
        rows.push(vec![
            fmt_f64(r.separation),
            fmt_f64(r.indicator_cov),
            fmt_f64(r.indicator_se),
            fmt_f64(r.count_cov_density),
            fmt_f64(r.count_se),
            cfg.run.reps.to_string(),
            cfg.run.seed.to_string(),
        ]);
    }
    if let Some(fit) = &decay.fit {
        for (name, value) in [
            ("kappa", fit.kappa),
            ("prefactor", fit.prefactor),
            ("r_squared", fit.r_squared),
        ] {
            rows.push(vec![
                "fit".into(),
                name.into(),
                fmt_f64(value),
                fmt_f64(0.0),
                fmt_f64(0.0),
                cfg.run.reps.to_string(),
                cfg.run.seed.to_string(),
            ]);
        }
    }
    let header = [
        "separation",
        "indicator_cov",
        "indicator_se",
        "count_cov_density",
        "count_se",
        "reps",
        "seed",
    ];
    Ok(render_table(&header, &rows, format.unwrap_or(Format::Csv)))
}

fn render_table(header: &[&str], rows: &[Vec<String>], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        Format::Jsonl => {
            let mut out = String::new();
            for row in rows {
                let fields: Vec<(&str, String)> = header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| {
                        let rendered = if v.parse::<f64>().is_ok() {
                            v.clone()
                        } else {
                            json_str(v)
                        };
                        (*k, rendered)
                    })
                    .collect();
                out.push_str(&json_object(&fields));
                out.push('\n');
            }
            out
        }
    }
}

fn cmd_verify(cfg: &RunConfig) -> Result<(String, i32)> {
    let opts = VerifyOptions {
        seed: cfg.run.seed,
        reps: cfg.verify.reps,
        plant_violation: cfg.verify.plant_violation,
    };
    let results = run_all(&opts);
    let mut lines: Vec<String> = results
        .iter()
        .map(|r| {
            json_object(&[
                ("check", json_str(&r.name)),
                ("passed", r.passed.to_string()),
                ("detail", json_str(&r.detail)),
            ])
        })
        .collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    lines.push(json_object(&[
        (
            "summary",
            json_object(&[
                ("passed", (results.len() - failed).to_string()),
                ("failed", failed.to_string()),
            ]),
        ),
    ]));
    Ok((
        lines.join("\n") + "\n",
        if failed > 0 { 1 } else { 0 },
    ))
}
