use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use lenscs_core::dictionary::tightness_metric;
use lenscs_core::experiments::{load_csv, persist_csv, summarize, Scheme, Simulator};
use lenscs_core::lens_model::build_geometry;
use lenscs_core::linalg::DENSE_LIMIT;
use lenscs_core::pilot_design::{coherence_report, CoherenceReport};
use lenscs_core::Error;

mod config;
mod report;

#[derive(Parser)]
#[command(
    name = "lenscs",
    version,
    about = "Compressive channel estimation experiments for lens arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the antenna layout of a lens array.
    Geometry {
        aperture_h: f64,
        aperture_v: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Report pilot coherence and dictionary tightness for a config.
    Coherence {
        #[arg(long)]
        config: PathBuf,
        /// Also evaluate the random baseband baseline.
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        /// Materialize the full sensing matrix to get its total coherence.
        #[arg(long)]
        dense: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte Carlo sweep and write results, config copy and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "LENSCS_THREADS")]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plot and summarize a results CSV.
    Report {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Random,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Empty(_) | Error::DegenerateAngle { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Geometry {
            aperture_h,
            aperture_v,
            format,
        } => cmd_geometry(aperture_h, aperture_v, format),
        Command::Coherence {
            config,
            baseline,
            dense,
            seed,
        } => cmd_coherence(&config, baseline.is_some(), dense, seed),
        Command::Run {
            config,
            out,
            workers,
            seed,
        } => cmd_run(&config, &out, workers, seed),
        Command::Report { csv, out } => cmd_report(&csv, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn cmd_geometry(h: f64, v: f64, format: Format) -> lenscs_core::Result<()> {
    let geo = build_geometry(h, v)?;
    let mut out = std::io::stdout().lock();
    match format {
        Format::Text => {
            writeln!(out, "{} antennas (aperture {h} x {v})", geo.count())?;
            writeln!(
                out,
                "{:>5} {:>8} {:>8} {:>10} {:>10}",
                "index", "v", "h", "alpha", "beta"
            )?;
            for (i, a) in geo.antennas().iter().enumerate() {
                writeln!(
                    out,
                    "{i:>5} {:>8.1} {:>8} {:>10.6} {:>10.6}",
                    a.v_index, a.h_index, a.alpha, a.beta
                )?;
            }
        }
        Format::Csv => {
            writeln!(out, "index,v_index,h_index,alpha,beta")?;
            for (i, a) in geo.antennas().iter().enumerate() {
                writeln!(out, "{i},{},{},{},{}", a.v_index, a.h_index, a.alpha, a.beta)?;
            }
        }
    }
    Ok(())
}

fn print_report(label: &str, r: &CoherenceReport) {
    println!("{label}: mu_tx = {:.6}, mu_rx = {:.6}", r.bound_tx, r.bound_rx);
}

fn cmd_coherence(path: &Path, with_random: bool, dense: bool, seed: Option<u64>) -> lenscs_core::Result<()> {
    let mut cfg = config::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let l = cfg.l_paths[0];
    let sim = Simulator::new(cfg)?;
    let dict = sim.dictionary();
    let limit = if dense { DENSE_LIMIT } else { 0 };
    let designed = coherence_report(&sim.plan(Scheme::Proposed, l, 0)?, dict, limit)?;
    print_report("designed", &designed);
    if with_random {
        let random = coherence_report(&sim.plan(Scheme::RandomBb, l, 0)?, dict, limit)?;
        print_report("random", &random);
        println!(
            "designed tx coherence <= random: {}",
            designed.bound_tx <= random.bound_tx
        );
    }
    let (eps, c) = tightness_metric(&dict.a_t.view(), dict.n_t())?;
    println!("eps_T = {eps:.6}, c_T = {c:.6}");
    if dense {
        match (designed.total_coherence, designed.bound_holds()) {
            (Some(total), Some(holds)) => {
                println!("total coherence = {total:.6}");
                println!("coherence product bound holds: {holds}");
            }
            _ => println!(
                "total coherence skipped: {} columns exceed the dense budget",
                dict.atoms()
            ),
        }
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &[u8]) -> lenscs_core::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn cmd_run(path: &Path, out: &Path, workers: Option<usize>, seed: Option<u64>) -> lenscs_core::Result<()> {
    let mut cfg = config::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let sim = Simulator::new(cfg.clone())?;
    std::fs::create_dir_all(out)?;
    let records = sim.run_sweep(workers)?;

    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "config_path": path.display().to_string(),
        "config_copy": "config.txt",
        "results": "results.csv",
        "output_dir": out.display().to_string(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "records": records.len(),
        "config": {
            "tx_aperture": [cfg.tx_aperture.0, cfg.tx_aperture.1],
            "rx_aperture": cfg.rx_aperture.map(|(h, v)| vec![h, v]),
            "n_t_rf": cfg.n_t_rf,
            "n_r_rf": cfg.n_r_rf,
            "n_t_pilot": cfg.n_t_pilot,
            "grid": [cfg.grid.0, cfg.grid.1],
            "snr_db_list": cfg.snr_db_list,
            "l_paths": cfg.l_paths,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "schemes": cfg.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "atoms_per_path": cfg.atoms_per_path,
            "residual_tol": cfg.residual_tol,
        },
    });
    write_atomic(&out.join("config.txt"), config::render(&cfg).as_bytes())?;
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.into()))?;
    write_atomic(&out.join("manifest.json"), json.as_bytes())?;
    persist_csv(&records, &out.join("results.csv"))?;
    println!(
        "{} records written to {}",
        records.len(),
        out.join("results.csv").display()
    );
    Ok(())
}

fn cmd_report(csv: &Path, out: &Path) -> lenscs_core::Result<()> {
    let records = load_csv(csv)?;
    let rows = summarize(&records)?;
    std::fs::create_dir_all(out)?;
    let snr = report::line_chart("Mean NMSE vs SNR", "SNR (dB)", "NMSE (dB)", &report::snr_series(&rows));
    let paths = report::line_chart(
        "Mean NMSE vs multipath count",
        "L",
        "NMSE (dB)",
        &report::l_series(&rows),
    );
    write_atomic(&out.join("nmse_vs_snr.svg"), snr.as_bytes())?;
    write_atomic(&out.join("nmse_vs_l.svg"), paths.as_bytes())?;
    let text = report::summary_text(&rows);
    write_atomic(&out.join("summary.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}
