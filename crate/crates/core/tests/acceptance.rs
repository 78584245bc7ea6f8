//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! report is always printed and criteria never overlap in time.
//!
//! Criteria listed in `KNOWN_FAILURES` are still evaluated at full tolerance and
//! reported as FAIL; they only do not fail the process. The README explains why.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{gaussian, low_rank, median, null_space_vector, rel_frobenius, wbcd_config};
use xlmimo_elm::activation::{rapp, rapp_derivative, rapp_peak, RappParams};
use xlmimo_elm::channel::{sample_ricean, NoiseModel, RiceanConfig};
use xlmimo_elm::data::synth_two_gaussians;
use xlmimo_elm::elm::{train, HiddenLayer};
use xlmimo_elm::experiments::{
    iterations_to_threshold, run_online, run_sweep_kappa, run_sweep_nr, run_sweep_snr, summarize,
    ResultRow, RunOptions, MODEL_DIGITAL, MODEL_OTA,
};
use xlmimo_elm::numkernel::{norm, pseudoinverse, svd, Matrix, RngStream, DEFAULT_REL_TOL};

const KNOWN_FAILURES: &[u32] = &[2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Mean accuracy per swept value for one model, in grid order.
fn means_by_value(rows: &[ResultRow], model: &str) -> Vec<(f64, f64)> {
    summarize(rows)
        .unwrap()
        .into_iter()
        .filter(|s| s.model == model)
        .map(|s| (s.value, s.mean_accuracy))
        .collect()
}

fn non_decreasing(means: &[(f64, f64)], slack: f64) -> bool {
    means.windows(2).all(|w| w[1].1 >= w[0].1 - slack)
}

fn fmt_means(means: &[(f64, f64)]) -> String {
    means
        .iter()
        .map(|(v, m)| format!("{v}: {m:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn interpolation() -> Outcome {
    let (n, d) = (64, 8);
    let hits = (0..100u64)
        .filter(|&seed| {
            let mut rng = RngStream::new(seed);
            let table = synth_two_gaussians(&mut rng, n, d, 2.0).unwrap();
            let cfg = RiceanConfig::new(0.0, n, d + 1).unwrap();
            let h = sample_ricean(&cfg, &mut rng).unwrap().into_real();
            let layer = HiddenLayer::over_the_air(h, RappParams::default(), NoiseModel::Noiseless);
            let g = layer.hidden_matrix(table.features(), &mut rng).unwrap();
            let t: Vec<f64> = table.labels().iter().map(|&l| l as f64).collect();
            let fit = train(&g, &t).unwrap();
            fit.train_residual / (n as f64).sqrt() < 1e-6
        })
        .count();
    outcome(
        hits >= 95,
        format!("{hits}/100 seeds with training RMSE < 1e-6 (need >= 95)"),
    )
}

fn digital_parity() -> Outcome {
    let mut cfg = wbcd_config(50, "[sweep]\nn_r = [128, 512, 1024]");
    cfg.baseline = true;
    let rows = run_sweep_nr(&cfg, RunOptions::default()).unwrap();
    let ota = means_by_value(&rows, MODEL_OTA);
    let dig = means_by_value(&rows, MODEL_DIGITAL);
    let worst_gap = ota
        .iter()
        .zip(&dig)
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    let pass = worst_gap <= 0.03 && non_decreasing(&ota, 0.01) && non_decreasing(&dig, 0.01);
    outcome(
        pass,
        format!(
            "max |gap| {:.1} pt (limit 3); XL-MIMO-ELM [{}]; digital ELM [{}]; both must be non-decreasing within 1 pt",
            100.0 * worst_gap,
            fmt_means(&ota),
            fmt_means(&dig)
        ),
    )
}

fn high_snr() -> Outcome {
    let cfg = wbcd_config(
        50,
        "[channel]\nn_r = 512\n[sweep]\nsnr_db = [0.0, 10.0, 20.0, 30.0]",
    );
    let rows = run_sweep_snr(&cfg, RunOptions::default()).unwrap();
    let means = means_by_value(&rows, MODEL_OTA);
    let (levels, reference) = means.split_at(4);
    let gap = (levels[3].1 - reference[0].1).abs();
    let pass = gap <= 0.01 && non_decreasing(levels, 0.01);
    outcome(
        pass,
        format!(
            "30 dB vs noise-free gap {:.2} pt (limit 1); [{}], noise-free {:.4}",
            100.0 * gap,
            fmt_means(levels),
            reference[0].1
        ),
    )
}

fn los_degradation() -> Outcome {
    let cfg = wbcd_config(50, "[channel]\nn_r = 256\n[sweep]\nkappa = [0.0, 100.0]");
    let rows = run_sweep_kappa(&cfg, RunOptions::default()).unwrap();
    let means = means_by_value(&rows, MODEL_OTA);
    let drop = means[0].1 - means[1].1;
    outcome(
        drop >= 0.02,
        format!(
            "kappa 0 -> 100 drops mean accuracy by {:.1} pt (need >= 2); [{}]",
            100.0 * drop,
            fmt_means(&means)
        ),
    )
}

/// Iterations until normalized accuracy reaches 0.95, per (seed, step);
/// runs that never reach it count as one past the last iteration.
fn crossing_iterations(rows: &[ResultRow], eta: f64, steps: usize, iters: usize) -> Vec<f64> {
    let seeds = rows.iter().map(|r| r.seed).max().unwrap() + 1;
    let mut out = Vec::new();
    for seed in 0..seeds {
        for step in 1..=steps {
            let trace: Vec<f64> = rows
                .iter()
                .filter(|r| r.value == eta && r.seed == seed && r.step == Some(step))
                .map(|r| r.normalized_accuracy.unwrap_or(0.0))
                .collect();
            out.push(iterations_to_threshold(&trace, 0.95).unwrap_or(iters + 1) as f64);
        }
    }
    out
}

fn online_recovery() -> Outcome {
    let (steps, iters) = (5, 20);
    let cfg = wbcd_config(
        20,
        &format!(
            "[online]\neta = [0.5, 0.9, 0.99]\nn_r = 1024\ngamma = 0.5\nbatch_size = 32\nsteps = {steps}\niters_per_step = {iters}"
        ),
    );
    let rows = run_online(&cfg, RunOptions::default()).unwrap();
    let mut per_step = Vec::new();
    for step in 1..=steps {
        let median_trace: Vec<f64> = (0..=iters)
            .map(|it| {
                let mut v: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.value == 0.9 && r.step == Some(step) && r.iteration == Some(it))
                    .map(|r| r.normalized_accuracy.unwrap_or(0.0))
                    .collect();
                median(&mut v)
            })
            .collect();
        per_step.push(iterations_to_threshold(&median_trace, 0.95));
    }
    let recovered = per_step.iter().all(|s| s.is_some_and(|k| k <= 20));
    let m99 = median(&mut crossing_iterations(&rows, 0.99, steps, iters));
    let m50 = median(&mut crossing_iterations(&rows, 0.5, steps, iters));
    let steps_txt: Vec<String> = per_step
        .iter()
        .map(|s| s.map_or("never".into(), |k| k.to_string()))
        .collect();
    outcome(
        recovered && m99 <= m50,
        format!(
            "eta 0.9 median reaches 0.95 after [{}] updates per step (limit 20); median iterations eta 0.99: {m99}, eta 0.5: {m50}",
            steps_txt.join(", ")
        ),
    )
}

fn minimum_receive_power() -> Outcome {
    let mut violations = 0;
    for seed in 0..100u64 {
        let mut rng = RngStream::new(seed);
        let d = 8 + (seed % 24) as usize;
        let n_r = 64;
        let table = synth_two_gaussians(&mut rng, d, 4, 2.0).unwrap();
        let cfg = RiceanConfig::new(0.0, n_r, 5).unwrap();
        let h = sample_ricean(&cfg, &mut rng).unwrap().into_real();
        let layer = HiddenLayer::over_the_air(h, RappParams::default(), NoiseModel::Noiseless);
        let g = layer.hidden_matrix(table.features(), &mut rng).unwrap();
        let t: Vec<f64> = table.labels().iter().map(|&l| l as f64).collect();
        let w = train(&g, &t).unwrap().w;
        for _ in 0..10 {
            let scale = 10f64.powf(4.0 * rng.uniform() - 3.0);
            let v = null_space_vector(&g, &mut rng);
            let shifted: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + scale * b).collect();
            if norm(&w) > norm(&shifted) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} of 1000 null-space shifts reduced ||w*|| (100 underdetermined fits)"),
    )
}

fn numerical_kernel() -> Outcome {
    let mut worst_penrose: f64 = 0.0;
    let mut worst_svd: f64 = 0.0;
    for k in 0..200u64 {
        let mut rng = RngStream::new(k);
        let a = match k % 4 {
            0 => gaussian(&mut rng, 8, 3),
            1 => gaussian(&mut rng, 3, 8),
            2 => gaussian(&mut rng, 8, 8),
            _ => low_rank(&mut rng, 8, 8, 1 + (k as usize / 4) % 7),
        };
        let p = pseudoinverse(&a, DEFAULT_REL_TOL).unwrap();
        let ap = a.matmul(&p).unwrap();
        let pa = p.matmul(&a).unwrap();
        let errs = [
            rel_frobenius(&ap.matmul(&a).unwrap(), &a),
            rel_frobenius(&pa.matmul(&p).unwrap(), &p),
            rel_frobenius(&ap.transpose(), &ap),
            rel_frobenius(&pa.transpose(), &pa),
        ];
        worst_penrose = errs.iter().copied().fold(worst_penrose, f64::max);
        worst_svd = worst_svd.max(rel_frobenius(&svd(&a).unwrap().reconstruct(), &a));
    }
    outcome(
        worst_penrose < 1e-8 && worst_svd < 1e-10,
        format!("200 matrices: worst Penrose error {worst_penrose:.1e} (limit 1e-8), worst SVD reconstruction {worst_svd:.1e} (limit 1e-10)"),
    )
}

fn activation_suite() -> Outcome {
    let p = RappParams::default();
    let pk = rapp_peak(&p);
    let mut rng = RngStream::new(8);
    let mut bounded = true;
    let mut odd = true;
    let mut worst_fd: f64 = 0.0;
    for k in 0..100_000 {
        let y = (rng.uniform() * 2.0 - 1.0) * 1e6;
        bounded &= rapp(y, &p).abs() <= pk.g_star;
        odd &= rapp(-y, &p) == -rapp(y, &p);
        if k < 1000 {
            let y = y * 1e-5;
            let numeric = (rapp(y + 1e-6, &p) - rapp(y - 1e-6, &p)) / 2e-6;
            let analytic = rapp_derivative(y, &p);
            worst_fd = worst_fd.max((numeric - analytic).abs() / analytic.abs().max(1e-2));
        }
    }
    let grid = Matrix::from_fn(1_000_001, 1, |i, _| i as f64 * 1e-4);
    let (best_y, best_g) =
        grid.as_slice()
            .iter()
            .map(|&y| (y, rapp(y, &p)))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 { b } else { a },
            );
    let peak_err = (pk.y_star - best_y).abs().max((pk.g_star - best_g).abs());
    outcome(
        bounded && odd && worst_fd < 1e-5 && peak_err < 1e-3,
        format!("bounded {bounded}, odd {odd}, derivative rel. error {worst_fd:.1e} (limit 1e-5), peak vs grid search {peak_err:.1e} (limit 1e-3)"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic_smoke.toml");
    let mut identical = 0;
    let kinds = ["sweep-nr", "sweep-snr", "sweep-kappa", "online", "single"];
    for kind in kinds {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{kind}-{k}.csv"));
                let status = Command::new(env!("CARGO_BIN_EXE_xlmimo-elm"))
                    .args([
                        kind, "--config", config, "--seed", "42", "--seeds", "2", "--out",
                    ])
                    .arg(&out)
                    .output()
                    .unwrap();
                assert!(
                    status.status.success(),
                    "{kind}: {}",
                    String::from_utf8_lossy(&status.stderr)
                );
                std::fs::read(&out).unwrap()
            })
            .collect();
        if outputs[0] == outputs[1] {
            identical += 1;
        }
    }
    outcome(
        identical == kinds.len(),
        format!(
            "{identical}/{} subcommands byte-identical across two runs with --seed 42",
            kinds.len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "interpolation", interpolation, Duration::from_secs(5)),
        (
            2,
            "parity with digital ELM",
            digital_parity,
            Duration::from_secs(300),
        ),
        (
            3,
            "high-SNR consistency",
            high_snr,
            Duration::from_secs(300),
        ),
        (
            4,
            "LoS degradation",
            los_degradation,
            Duration::from_secs(180),
        ),
        (
            5,
            "online recovery",
            online_recovery,
            Duration::from_secs(600),
        ),
        (
            6,
            "minimum receive power",
            minimum_receive_power,
            Duration::from_secs(10),
        ),
        (
            7,
            "numerical kernel",
            numerical_kernel,
            Duration::from_secs(10),
        ),
        (
            8,
            "activation suite",
            activation_suite,
            Duration::from_secs(5),
        ),
        (9, "determinism", determinism, Duration::from_secs(60)),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut out = std::io::stdout();
    let mut unexpected = Vec::new();
    let mut failed = Vec::new();
    for (id, name, check, limit) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = result.pass && in_time;
        let known = KNOWN_FAILURES.contains(&id);
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = match (pass, known) {
            (false, true) => " [known failure, see README]",
            (true, true) => " [listed as known failure but passed]",
            _ => "",
        };
        writeln!(
            out,
            "[{tag}] criterion {id} {name}: {}; {:.1} s (limit {} s){}{note}",
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { " OVER TIME" },
        )
        .unwrap();
        out.flush().unwrap();
        if !pass {
            failed.push(id);
            if !known {
                unexpected.push(id);
            }
        }
    }
    writeln!(
        out,
        "acceptance: {} failed {:?}, unexpected {:?}",
        failed.len(),
        failed,
        unexpected
    )
    .unwrap();
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
