use std::path::Path;
use std::process::{Command, Output};

fn lenscs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lenscs"))
        .args(args)
        .env_remove("LENSCS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TOY: &str = "\
tx_aperture = 2.2, 2.2
rx_aperture = 1.3, 2.0
n_t_rf = 4
n_r_rf = 2
n_t_pilot = 8
grid = 4, 4
snr_db_list = 0, 10
l_paths = 2
trials = 3
seed = 5
schemes = proposed, random_bb, no_dictionary, ls_full
";

const LINK64: &str = "\
tx_aperture = 4.7, 4.7
rx_aperture = 4.7, 4.7
n_t_rf = 4
n_r_rf = 4
n_t_pilot = 32
grid = 20, 20
snr_db_list = 0
l_paths = 3
trials = 1
seed = 1
schemes = proposed
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// CSV body rows without the wall-clock column, sorted.
fn body(path: &Path) -> Vec<(String, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows: Vec<(String, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                format!("{},{},{},{},{}", f[0], f[1], f[2], f[3], f[6]),
                f[4].parse().unwrap(),
            )
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows
}

fn same_body(a: &[(String, f64)], b: &[(String, f64)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.0 == y.0 && (x.1 == y.1 || (x.1 - y.1).abs() <= 1e-9 * x.1.abs().max(y.1.abs())))
}

#[test]
fn geometry_counts_and_errors() {
    let o = lenscs(&["geometry", "6.4", "6.4"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("128 antennas"));
    let o = lenscs(&["geometry", "4.7", "4.7"]);
    assert!(stdout(&o).starts_with("64 antennas"));
    let o = lenscs(&["geometry", "4.7", "4.7", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 65);
    assert!(text.starts_with("index,v_index,h_index,alpha,beta\n"));
    let o = lenscs(&["geometry", "0.5", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coherence_reports() {
    let dir = tempfile::tempdir().unwrap();
    let link64 = write(dir.path(), "link64.cfg", LINK64);
    let o = lenscs(&["coherence", "--config", &link64, "--baseline", "random"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("designed: mu_tx"));
    assert!(text.contains("random: mu_tx"));
    assert!(text.contains("designed tx coherence <= random: true"));
    let eps: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("eps_T = "))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(eps < 0.2);

    let toy = write(dir.path(), "toy.cfg", TOY);
    let o = lenscs(&["coherence", "--config", &toy, "--dense"]);
    assert!(stdout(&o).contains("coherence product bound holds: "));
    let one = write(dir.path(), "one.cfg", &TOY.replace("grid = 4, 4", "grid = 1, 1"));
    let o = lenscs(&["coherence", "--config", &one, "--dense", "--seed", "9"]);
    assert!(stdout(&o).contains("coherence product bound holds: true"));

    let bad = write(dir.path(), "bad.cfg", &TOY.replace("trials = 3", "trials = x"));
    let o = lenscs(&["coherence", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.cfg") && err.contains("line 9"), "{err}");
}

#[test]
fn run_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.cfg", TOY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = lenscs(&["run", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = lenscs(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "8"]);
    assert!(o.status.success());
    let rows = body(&a.join("results.csv"));
    assert_eq!(rows.len(), 4 * 2 * 3);
    assert!(same_body(&rows, &body(&b.join("results.csv"))));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["trials"], 3);
    assert_eq!(manifest["records"], 24);
    let copy = a.join(manifest["config_copy"].as_str().unwrap());
    let c = dir.path().join("c");
    let o = lenscs(&["run", "--config", copy.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(same_body(&rows, &body(&c.join("results.csv"))));

    let d = dir.path().join("d");
    let o = lenscs(&["run", "--config", &cfg, "--out", d.to_str().unwrap(), "--seed", "6"]);
    assert!(o.status.success());
    assert!(!same_body(&rows, &body(&d.join("results.csv"))));
}

#[test]
fn run_failures_leave_no_csv() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = write(dir.path(), "inf.cfg", &TOY.replace("n_t_pilot = 8", "n_t_pilot = 6"));
    let out = dir.path().join("out");
    let o = lenscs(&["run", "--config", &infeasible, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("results.csv").exists());

    let cfg = write(dir.path(), "toy.cfg", TOY);
    let blocker = write(dir.path(), "file", "x");
    let o = lenscs(&["run", "--config", &cfg, "--out", &format!("{blocker}/sub")]);
    assert_eq!(o.status.code(), Some(3));

    let o = lenscs(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--workers",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("none.cfg");
    let o = lenscs(&[
        "run",
        "--config",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_plots_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "toy.cfg",
        &TOY.replace("proposed, random_bb, no_dictionary, ls_full", "proposed, ls_full"),
    );
    let run = dir.path().join("run");
    assert!(lenscs(&["run", "--config", &cfg, "--out", run.to_str().unwrap()])
        .status
        .success());
    let rep = dir.path().join("rep");
    let o = lenscs(&[
        "report",
        run.join("results.csv").to_str().unwrap(),
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(rep.join("nmse_vs_snr.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(rep.join("nmse_vs_l.svg").exists());

    let records = lenscs_core::experiments::load_csv(&run.join("results.csv")).unwrap();
    let rows = lenscs_core::experiments::summarize(&records).unwrap();
    let summary = std::fs::read_to_string(rep.join("summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), rows.len() + 1);
    for r in &rows {
        let line = format!("{}\t{}\t{}\t{:.4}\t", r.scheme, r.snr_db, r.l_paths, r.mean_nmse_db);
        assert!(summary.contains(&line), "{line}");
    }

    let single = write(
        dir.path(),
        "one.csv",
        "scheme,snr_db,l_paths,trial,nmse_db,wall_time_ms,seed_used\nproposed,0,3,0,-12.5,1.0,1\n",
    );
    let o = lenscs(&["report", &single, "--out", dir.path().join("one").to_str().unwrap()]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join("one/nmse_vs_snr.svg")).unwrap();
    assert!(svg.contains("<circle"));

    let empty = write(
        dir.path(),
        "empty.csv",
        "scheme,snr_db,l_paths,trial,nmse_db,wall_time_ms,seed_used\n",
    );
    assert_eq!(
        lenscs(&["report", &empty, "--out", dir.path().join("e").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let bad = write(
        dir.path(),
        "bad.csv",
        "scheme,snr_db,l_paths,trial,nmse_db,wall_time_ms,seed_used\nproposed,0,3\n",
    );
    let o = lenscs(&["report", &bad, "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
