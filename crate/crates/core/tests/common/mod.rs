//! Shared oracles and fixtures for the integration and acceptance targets.
#![allow(dead_code)]

use deepboost_af::boosting::{best_split, build_binning, BinStats, FeatureMatrix, SplitParams};
use deepboost_af::synthetic::{generate, write_dataset, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// `||a - b|| / (||a|| + ||b||)`, zero when both vanish.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na + nb == 0.0 {
        0.0
    } else {
        diff / (na + nb)
    }
}

/// Central differences of a scalar function at `x`.
pub fn numeric_grad(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact greedy split search over raw feature values: sort each feature,
/// try every midpoint between adjacent distinct values, keep the first
/// strictly best (feature ascending, threshold ascending). Returns
/// `(feature, threshold, gain)`.
pub fn exhaustive_best_split(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
) -> Option<(usize, f64, f64)> {
    let n = rows.len();
    let total_g: f64 = grad.iter().sum();
    let total_h: f64 = hess.iter().sum();
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..rows[0].len() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| rows[a][j].partial_cmp(&rows[b][j]).unwrap());
        let (mut gl, mut hl) = (0.0, 0.0);
        for k in 0..n - 1 {
            gl += grad[order[k]];
            hl += hess[order[k]];
            let (a, b) = (rows[order[k]][j], rows[order[k + 1]][j]);
            if a == b {
                continue;
            }
            let (gr, hr) = (total_g - gl, total_h - hl);
            if hl < min_child_weight || hr < min_child_weight {
                continue;
            }
            let s = |g: f64, h: f64| g * g / (h + lambda);
            let gain = 0.5 * (s(gl, hl) + s(gr, hr) - s(gl + gr, hl + hr)) - gamma;
            if gain > 0.0 && best.is_none_or(|(_, _, g)| gain > g) {
                best = Some((j, (a + b) / 2.0, gain));
            }
        }
    }
    best
}

/// Random instance on a dyadic grid, so every partial sum is exact and the
/// histogram and presorted searches can be compared with `==`. Returns
/// `(rows, grad, hess)`.
pub fn dyadic_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut g = rng(seed);
    let n = g.random_range(2..=64);
    let f = g.random_range(1..=4);
    let levels = g.random_range(2..=24);
    let rows = (0..n)
        .map(|_| (0..f).map(|_| g.random_range(0..levels) as f64 * 0.25 - 2.0).collect())
        .collect();
    let grad = (0..n).map(|_| g.random_range(-16i32..=16) as f64 / 16.0).collect();
    let hess = (0..n).map(|_| g.random_range(1..=16) as f64 / 16.0).collect();
    (rows, grad, hess)
}

/// Histogram search through the public binning and split API, reduced
/// across features with the same strict-improvement rule as the oracle.
pub fn histogram_best_split(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    params: &SplitParams,
    max_bins: usize,
) -> Option<(usize, f64, f64)> {
    let x = FeatureMatrix::from_rows(rows.to_vec()).unwrap();
    let binning = build_binning(&x, max_bins).unwrap();
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..x.cols() {
        let mut hist = vec![BinStats::default(); binning.n_bins(j)];
        for i in 0..x.rows() {
            hist[binning.bin(j, x.get(i, j)) as usize].add(grad[i], hess[i]);
        }
        if let Some(c) = best_split(&hist, params) {
            if best.is_none_or(|(_, _, g)| c.gain > g) {
                best = Some((j, binning.cuts[j][c.bin as usize], c.gain));
            }
        }
    }
    best
}

pub fn bin_path() -> &'static str {
    env!("CARGO_BIN_EXE_deepboost-af")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(bin_path())
        .args(args)
        .output()
        .expect("spawn deepboost-af")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A synthetic two-class project: records, labels and a config file with
/// every booster configured. Returns the config path.
pub fn synthetic_project(dir: &Path, n: usize, data_seed: u64, dcae_json: &str) -> PathBuf {
    let records = generate(n, data_seed, &SyntheticSpec::default());
    write_dataset(&records, &dir.join("records"), &dir.join("REFERENCE.csv")).unwrap();
    write_config(
        dir,
        &format!(
            r#"{{
  "records_dir": "records",
  "labels_file": "REFERENCE.csv",
  "cache_path": "out/cache.bin",
  "output_dir": "out",
  "split_seed": 7,
  "dcae": {dcae_json},
  "boosters": {{"adaboost": {{}}, "gbdt-level": {{}}, "gbdt-leaf": {{}}}}
}}"#
        ),
    )
}

pub fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path
}

/// Every file under `dir` (relative path -> bytes).
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Blank out wall-clock content: timing sidecars are dropped and the
/// trailing TTT column of report CSVs is cleared. Everything else must
/// match byte for byte.
pub fn mask_timings(files: BTreeMap<String, Vec<u8>>) -> BTreeMap<String, Vec<u8>> {
    files
        .into_iter()
        .filter(|(name, _)| {
            !(name.ends_with(".ttt") || name.ends_with("timing.csv") || name.ends_with("report.txt"))
        })
        .map(|(name, bytes)| {
            let file = Path::new(&name).file_name().unwrap().to_string_lossy().into_owned();
            if file == "report.csv" || file.starts_with("eval-") {
                let text = String::from_utf8(bytes).unwrap();
                let masked: String = text
                    .lines()
                    .map(|l| format!("{},TTT\n", &l[..l.rfind(',').unwrap()]))
                    .collect();
                (name, masked.into_bytes())
            } else {
                (name, bytes)
            }
        })
        .collect()
}

pub fn read_csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub mod gradcheck;
