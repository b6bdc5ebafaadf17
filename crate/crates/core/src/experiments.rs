//! Monte Carlo harness: paired trials across schemes, sweeps, aggregation and
//! CSV persistence.
//!
//! Every trial derives its channel, switch, noise and random-pilot draws from
//! `(seed, L, trial)` alone, so all schemes (and all SNR points) of one trial
//! see the same channel and the same underlying noise samples.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{build_grid, RedundantDictionary};
use crate::lens_model::{build_geometry, sample_paths, synthesize_channel, ArrayGeometry, ChannelRealization};
use crate::pilot_design::{beam_sweep_plan, designed_plan, random_bb_plan};
use crate::recovery::{estimate_channel, ls_estimate, nmse_db, EstimatorConfig};
use crate::seed::{stage_rng, trial_seed, Stage};
use crate::training::{build_rf_switches, calibrate_noise, simulate_training, PilotPlan, PlanDims};
use crate::{Error, Result, C64};

/// Exact CSV header.
pub const CSV_HEADER: [&str; 7] = [
    "scheme",
    "snr_db",
    "l_paths",
    "trial",
    "nmse_db",
    "wall_time_ms",
    "seed_used",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Designed baseband pilots, random switches, lens dictionary.
    Proposed,
    /// Random baseband pilots and combiners, lens dictionary.
    RandomBb,
    /// Designed pilots, sparsity sought directly in the antenna domain.
    NoDictionary,
    /// Full-pilot beam sweep with LS inversion.
    LsFull,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::RandomBb, Scheme::NoDictionary, Scheme::LsFull];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::RandomBb => "random_bb",
            Scheme::NoDictionary => "no_dictionary",
            Scheme::LsFull => "ls_full",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `(D_h, D_v)` of the transmit lens.
    pub tx_aperture: (f64, f64),
    /// `None` for a single-antenna receiver.
    pub rx_aperture: Option<(f64, f64)>,
    pub n_t_rf: usize,
    pub n_r_rf: usize,
    pub n_t_pilot: usize,
    /// `(G_v, G_h)`.
    pub grid: (usize, usize),
    pub snr_db_list: Vec<f64>,
    pub l_paths: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// OMP sparsity budget per multipath component.
    pub atoms_per_path: usize,
    pub residual_tol: f64,
}

impl ExperimentConfig {
    /// 64×64 lens arrays on both ends, 4 RF chains each, 20×20 grid.
    pub fn lens_to_lens() -> Self {
        Self {
            tx_aperture: (4.7, 4.7),
            rx_aperture: Some((4.7, 4.7)),
            n_t_rf: 4,
            n_r_rf: 4,
            n_t_pilot: 32,
            grid: (20, 20),
            snr_db_list: vec![0.0, 10.0],
            l_paths: vec![3],
            trials: 100,
            seed: 2024,
            schemes: Scheme::ALL.to_vec(),
            atoms_per_path: EstimatorConfig::DEFAULT_ATOMS_PER_PATH,
            residual_tol: EstimatorConfig::DEFAULT_RESIDUAL_TOL,
        }
    }

    /// 128-antenna lens transmitter to a single-antenna user.
    pub fn downlink_single_antenna() -> Self {
        Self {
            tx_aperture: (6.4, 6.4),
            rx_aperture: None,
            n_t_rf: 4,
            n_r_rf: 1,
            n_t_pilot: 64,
            snr_db_list: vec![10.0],
            l_paths: (1..=6).collect(),
            schemes: vec![Scheme::Proposed],
            ..Self::lens_to_lens()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("snr_db_list must be a nonempty list of numbers".into()));
        }
        if self.l_paths.is_empty() || self.l_paths.contains(&0) {
            return Err(Error::Config(
                "l_paths must be a nonempty list of positive integers".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if self.atoms_per_path == 0 {
            return Err(Error::Config("atoms_per_path must be at least 1".into()));
        }
        if self.rx_aperture.is_none() && self.n_r_rf != 1 {
            return Err(Error::Config(
                "a single-antenna receiver has exactly one RF chain".into(),
            ));
        }
        Ok(())
    }
}

/// One Monte Carlo outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub l_paths: usize,
    pub trial: usize,
    pub nmse_db: f64,
    pub wall_time_ms: f64,
    pub seed_used: u64,
}

/// Geometry, dictionaries and dimensioning resolved once from a config.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ExperimentConfig,
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    lens_dict: RedundantDictionary,
    antenna_dict: RedundantDictionary,
    dims: PlanDims,
}

impl Simulator {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let tx = build_geometry(cfg.tx_aperture.0, cfg.tx_aperture.1)?;
        let rx = match cfg.rx_aperture {
            Some((h, v)) => build_geometry(h, v)?,
            None => ArrayGeometry::single_antenna(),
        };
        let grid = build_grid(cfg.grid.0, cfg.grid.1)?;
        let lens_dict = RedundantDictionary::new(&tx, &rx, grid)?;
        let antenna_dict = RedundantDictionary::antenna_domain(tx.count(), rx.count());
        let dims = PlanDims {
            n_t: tx.count(),
            n_r: rx.count(),
            n_t_rf: cfg.n_t_rf,
            n_r_rf: cfg.n_r_rf,
            n_t_pilot: cfg.n_t_pilot,
        };
        dims.validate()?;
        if cfg
            .schemes
            .iter()
            .any(|s| matches!(s, Scheme::Proposed | Scheme::NoDictionary | Scheme::RandomBb))
            && dims.cols_per_group() > dims.n_t_rf
        {
            return Err(Error::Config("pilot blocks per group exceed the RF chain count".into()));
        }
        Ok(Self {
            cfg,
            tx,
            rx,
            lens_dict,
            antenna_dict,
            dims,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn dims(&self) -> PlanDims {
        self.dims
    }

    pub fn tx(&self) -> &ArrayGeometry {
        &self.tx
    }

    pub fn rx(&self) -> &ArrayGeometry {
        &self.rx
    }

    pub fn dictionary(&self) -> &RedundantDictionary {
        &self.lens_dict
    }

    /// The channel of trial `(l, trial)`, shared by every scheme.
    pub fn channel(&self, l: usize, trial: usize) -> Result<ChannelRealization> {
        let mut rng = stage_rng(self.cfg.seed, l, trial, Stage::Channel);
        let paths = sample_paths(l, &mut rng)?;
        synthesize_channel(&self.tx, &self.rx, &paths)
    }

    fn switches(&self, l: usize, trial: usize) -> (Vec<usize>, Vec<usize>) {
        let mut rng = stage_rng(self.cfg.seed, l, trial, Stage::Switches);
        build_rf_switches(self.dims.n_t, self.dims.n_r, &mut rng)
    }

    /// Plan used by `scheme` in trial `(l, trial)`.
    pub fn plan(&self, scheme: Scheme, l: usize, trial: usize) -> Result<PilotPlan> {
        let (tx_sw, rx_sw) = self.switches(l, trial);
        let d = self.dims;
        match scheme {
            Scheme::Proposed | Scheme::NoDictionary => designed_plan(d, tx_sw, rx_sw),
            Scheme::RandomBb => {
                let mut rng = stage_rng(self.cfg.seed, l, trial, Stage::RandomPilots);
                random_bb_plan(d, tx_sw, rx_sw, &mut rng)
            }
            Scheme::LsFull => beam_sweep_plan(d.n_t, d.n_r, d.n_t_rf, d.n_r_rf, tx_sw, rx_sw),
        }
    }

    pub fn estimator(&self, l: usize) -> EstimatorConfig {
        EstimatorConfig {
            max_atoms: self.cfg.atoms_per_path * l,
            residual_tol: self.cfg.residual_tol,
            ..EstimatorConfig::for_paths(l)
        }
    }

    /// Channel estimate of one scheme for one trial, with the true channel.
    pub fn estimate(
        &self,
        scheme: Scheme,
        snr_db: f64,
        l: usize,
        trial: usize,
    ) -> Result<(Array2<C64>, ChannelRealization)> {
        let h = self.channel(l, trial)?;
        // Noise power is fixed by the proposed plan and shared by all schemes.
        let sigma2 = calibrate_noise(&h, &self.plan(Scheme::Proposed, l, trial)?, snr_db)?;
        let plan = self.plan(scheme, l, trial)?;
        let mut noise_rng = stage_rng(self.cfg.seed, l, trial, Stage::Noise);
        let obs = simulate_training(&h, &plan, sigma2, &mut noise_rng)?;
        let cfg = self.estimator(l);
        let h_hat = match scheme {
            Scheme::Proposed | Scheme::RandomBb => estimate_channel(&obs, &plan, &self.lens_dict, &cfg)?.0,
            Scheme::NoDictionary => estimate_channel(&obs, &plan, &self.antenna_dict, &cfg)?.0,
            Scheme::LsFull => ls_estimate(&obs, &plan)?,
        };
        Ok((h_hat, h))
    }

    pub fn run_trial(&self, scheme: Scheme, snr_db: f64, l: usize, trial: usize) -> Result<ResultRecord> {
        let start = Instant::now();
        let (h_hat, h) = self.estimate(scheme, snr_db, l, trial)?;
        let nmse = nmse_db(&h_hat.view(), &h.matrix.view())?;
        Ok(ResultRecord {
            scheme,
            snr_db,
            l_paths: l,
            trial,
            nmse_db: nmse,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            seed_used: trial_seed(self.cfg.seed, l, trial),
        })
    }

    /// All `schemes × SNRs × L × trials` records, in that nesting order.
    pub fn run_sweep(&self, workers: Option<usize>) -> Result<Vec<ResultRecord>> {
        let cfg = &self.cfg;
        let mut tasks = Vec::new();
        for &scheme in &cfg.schemes {
            for &snr in &cfg.snr_db_list {
                for &l in &cfg.l_paths {
                    for trial in 0..cfg.trials {
                        tasks.push((scheme, snr, l, trial));
                    }
                }
            }
        }
        let run = || {
            tasks
                .par_iter()
                .map(|&(scheme, snr, l, trial)| self.run_trial(scheme, snr, l, trial))
                .collect::<Result<Vec<_>>>()
        };
        match workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
                .install(run),
            None => run(),
        }
    }
}

/// Convenience wrapper over [`Simulator::run_sweep`].
pub fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<ResultRecord>> {
    Simulator::new(cfg.clone())?.run_sweep(workers)
}

/// Per-(scheme, SNR, L) aggregate of per-trial NMSE values in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub l_paths: usize,
    pub mean_nmse_db: f64,
    pub median_nmse_db: f64,
    pub count: usize,
}

/// Groups records and averages in the dB domain. Values are sorted inside each
/// group before summation, so the result does not depend on record order.
pub fn summarize(records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::Empty("no records to summarize".into()));
    }
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.l_paths.cmp(&b.l_paths))
            .then(a.nmse_db.total_cmp(&b.nmse_db))
    });
    let rows = sorted
        .chunk_by(|a, b| a.scheme == b.scheme && a.snr_db.total_cmp(&b.snr_db).is_eq() && a.l_paths == b.l_paths)
        .map(|group| {
            let values: Vec<f64> = group.iter().map(|r| r.nmse_db).collect();
            let n = values.len();
            let median = if n % 2 == 1 {
                values[n / 2]
            } else {
                0.5 * (values[n / 2 - 1] + values[n / 2])
            };
            SummaryRow {
                scheme: group[0].scheme,
                snr_db: group[0].snr_db,
                l_paths: group[0].l_paths,
                mean_nmse_db: values.iter().sum::<f64>() / n as f64,
                median_nmse_db: median,
                count: n,
            }
        })
        .collect();
    Ok(rows)
}

/// 17 significant digits, enough to round-trip every finite `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes records to `path` through a temporary file in the same directory,
/// renamed into place only once complete.
pub fn persist_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(tmp.as_file_mut());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in records {
            w.write_record([
                r.scheme.as_str().to_string(),
                format_float(r.snr_db),
                r.l_paths.to_string(),
                r.trial.to_string(),
                format_float(r.nmse_db),
                format_float(r.wall_time_ms),
                r.seed_used.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
    }
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let display = path.display().to_string();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: display.clone(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(parse_err(1, format!("expected header `{}`", CSV_HEADER.join(","))));
    }
    let mut records = Vec::new();
    for row in reader.deserialize::<ResultRecord>() {
        let record = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            let message = match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            };
            parse_err(line, message)
        })?;
        records.push(record);
    }
    Ok(records)
}
