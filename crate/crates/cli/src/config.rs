//! Flat `key = value` experiment files. `#` starts a comment; lists are comma
//! separated; `rx_aperture = single` selects a one-antenna receiver.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use lenscs_core::experiments::ExperimentConfig;
use lenscs_core::{Error, Result};

const KEYS: [&str; 13] = [
    "tx_aperture",
    "rx_aperture",
    "n_t_rf",
    "n_r_rf",
    "n_t_pilot",
    "grid",
    "snr_db_list",
    "l_paths",
    "trials",
    "seed",
    "schemes",
    "atoms_per_path",
    "residual_tol",
];

/// Keys that may be omitted; they fall back to the estimator defaults.
const OPTIONAL: [&str; 2] = ["atoms_per_path", "residual_tol"];

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: format!("cannot read config: {e}"),
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line: line as u64,
        message,
    };
    let mut cfg = ExperimentConfig {
        schemes: Vec::new(),
        ..ExperimentConfig::lens_to_lens()
    };
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(n, format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(n, format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(n, format!("duplicate key `{key}`")));
        }
        let bad = |m: String| err(n, format!("{key}: {m}"));
        match key {
            "tx_aperture" => cfg.tx_aperture = pair(value).map_err(bad)?,
            "rx_aperture" => {
                cfg.rx_aperture = if value == "single" {
                    None
                } else {
                    Some(pair(value).map_err(bad)?)
                }
            }
            "n_t_rf" => cfg.n_t_rf = scalar(value).map_err(bad)?,
            "n_r_rf" => cfg.n_r_rf = scalar(value).map_err(bad)?,
            "n_t_pilot" => cfg.n_t_pilot = scalar(value).map_err(bad)?,
            "grid" => {
                let g: Vec<usize> = list(value).map_err(bad)?;
                match g[..] {
                    [v, h] => cfg.grid = (v, h),
                    _ => return Err(bad("expected `G_v, G_h`".into())),
                }
            }
            "snr_db_list" => cfg.snr_db_list = list(value).map_err(bad)?,
            "l_paths" => cfg.l_paths = list(value).map_err(bad)?,
            "trials" => cfg.trials = scalar(value).map_err(bad)?,
            "seed" => cfg.seed = scalar(value).map_err(bad)?,
            "schemes" => cfg.schemes = list(value).map_err(bad)?,
            "atoms_per_path" => cfg.atoms_per_path = scalar(value).map_err(bad)?,
            "residual_tol" => cfg.residual_tol = scalar(value).map_err(bad)?,
            _ => unreachable!(),
        }
    }
    let last = text.lines().count();
    for key in KEYS {
        if !OPTIONAL.contains(&key) && !seen.contains(key) {
            return Err(err(last, format!("missing key `{key}`")));
        }
    }
    cfg.validate().map_err(|e| err(last, e.to_string()))?;
    Ok(cfg)
}

/// Inverse of [`parse`]; floats use the shortest round-trip form.
pub fn render(cfg: &ExperimentConfig) -> String {
    let join = |items: Vec<String>| items.join(", ");
    let mut s = String::new();
    let _ = writeln!(s, "tx_aperture = {}, {}", cfg.tx_aperture.0, cfg.tx_aperture.1);
    match cfg.rx_aperture {
        Some((h, v)) => {
            let _ = writeln!(s, "rx_aperture = {h}, {v}");
        }
        None => s.push_str("rx_aperture = single\n"),
    }
    let _ = writeln!(s, "n_t_rf = {}", cfg.n_t_rf);
    let _ = writeln!(s, "n_r_rf = {}", cfg.n_r_rf);
    let _ = writeln!(s, "n_t_pilot = {}", cfg.n_t_pilot);
    let _ = writeln!(s, "grid = {}, {}", cfg.grid.0, cfg.grid.1);
    let _ = writeln!(
        s,
        "snr_db_list = {}",
        join(cfg.snr_db_list.iter().map(f64::to_string).collect())
    );
    let _ = writeln!(
        s,
        "l_paths = {}",
        join(cfg.l_paths.iter().map(usize::to_string).collect())
    );
    let _ = writeln!(s, "trials = {}", cfg.trials);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(
        s,
        "schemes = {}",
        join(cfg.schemes.iter().map(|k| k.as_str().to_string()).collect())
    );
    let _ = writeln!(s, "atoms_per_path = {}", cfg.atoms_per_path);
    let _ = writeln!(s, "residual_tol = {}", cfg.residual_tol);
    s
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("`{value}`: {e}"))
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(|v| scalar(v.trim()))
        .collect::<std::result::Result<_, _>>()?;
    if value.trim().is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn pair(value: &str) -> std::result::Result<(f64, f64), String> {
    match list::<f64>(value)?[..] {
        [h, v] => Ok((h, v)),
        _ => Err("expected `D_h, D_v`".into()),
    }
}
