//! Acceptance suite: one check per release criterion, each reported with a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture` to
//! see the lines on success.

use std::process::Command;
use std::time::Instant;

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cavity_erasure::analytic::{
    generation_variances, min_cycles_to_var_p, saturation_limit, storage_fidelity,
    storage_variances, target_fidelity, ProtocolConfig, Strategy, VariancePair,
};
use cavity_erasure::experiments::{cmd_compare, paper_grid};
use cavity_erasure::gaussian::{
    beamsplitter_matrix, gain_matrix, mirror_mix, overlap_fidelity, QuadratureState,
};
use cavity_erasure::trajectory::run_ensemble;

const METER_VAR: f64 = 0.5 * 0.1353352832366127; // 0.5 e^-2
const TARGET_VAR_P: f64 = 0.5 * 0.006737946999085467; // 0.5 e^-5

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(results: &mut Vec<Outcome>, name: &'static str, pass: bool, detail: String) {
    results.push(Outcome { name, pass, detail });
}

/// 1. Erasing strategies preserve the P variance bitwise in storage.
fn criterion_1(results: &mut Vec<Outcome>) {
    let mut worst = 0.0f64;
    for strategy in [Strategy::SqueezedMeterErasing, Strategy::VacuumMeterErasing] {
        for r in [0.9, 0.99, 0.999] {
            for n in [1u32, 10, 100, 1000] {
                let cfg = ProtocolConfig::storage(strategy, r, n, METER_VAR, true).unwrap();
                let input = VariancePair::new(0.5, 0.31830988618367);
                let out = storage_variances(&cfg, input).unwrap();
                worst = worst.max((out.var_p - input.var_p).abs());
            }
        }
    }
    check(
        results,
        "exact P-preservation (storage, strategies A/B)",
        worst == 0.0,
        format!("max |var_p_out - var_p_in| = {worst:e}"),
    );
}

/// 2. Monte Carlo matches the closed forms at the figure parameters within
/// |z| < 3 for every strategy in both scenarios, 1e5 trajectories each.
fn criterion_2(results: &mut Vec<Outcome>) {
    let start = Instant::now();
    let report = cmd_compare(&paper_grid(100_000, 42), 1.0).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let per_config = elapsed / 8.0;
    let pass = report.all_pass() && per_config < 60.0;
    check(
        results,
        "analytic-Monte Carlo equivalence (8 configs, 1e5 trajectories)",
        pass,
        format!(
            "max |z| = {:.3}, {:.1} s/config",
            report.max_abs_z(),
            per_config
        ),
    );
}

/// 3. Coherent-storage fidelity reference value, analytic and Monte Carlo.
fn criterion_3(results: &mut Vec<Outcome>) {
    let cfg =
        ProtocolConfig::storage(Strategy::SqueezedMeterErasing, 0.99, 100, METER_VAR, true)
            .unwrap();
    let analytic = storage_fidelity(&cfg, VariancePair::vacuum()).unwrap();
    let in_window = (analytic - 0.8344).abs() <= 0.0005;

    let input = QuadratureState::coherent(3.0, 1.0);
    let stats = run_ensemble(&cfg, &input, 100_000, 4242).unwrap();
    let (f_mc, f_se) = stats.jackknife(|m| {
        let est = QuadratureState::new(m.mean_x, m.mean_p, m.var_x, m.var_p, 0.0)
            .expect("ensemble moments form a valid state");
        overlap_fidelity(&input, &est)
    });
    let mc_ok = (f_mc - analytic).abs() <= 3.0 * f_se;
    check(
        results,
        "coherent-storage fidelity value (A, N=100)",
        in_window && mc_ok,
        format!("analytic F = {analytic:.6}, MC F = {f_mc:.6} +- {f_se:.1e}"),
    );
}

/// 4. Squeezed-state storage stays near unity fidelity out to 100 cycles.
fn criterion_4(results: &mut Vec<Outcome>) {
    let input = VariancePair::new(0.5 * 5.0f64.exp(), TARGET_VAR_P);
    let mut min_f = 1.0f64;
    for n in 0..=100 {
        let cfg =
            ProtocolConfig::storage(Strategy::SqueezedMeterErasing, 0.99, n, METER_VAR, false)
                .unwrap();
        min_f = min_f.min(storage_fidelity(&cfg, input).unwrap());
    }
    check(
        results,
        "squeezed-storage near-unity fidelity (A, N <= 100)",
        min_f >= 0.99,
        format!("min F = {min_f:.6}"),
    );
}

/// 5. Strategy ordering of coherent-storage fidelities over the figure range.
fn criterion_5(results: &mut Vec<Outcome>) {
    let mut ok = true;
    let mut witness = String::new();
    for n in 1..=500u32 {
        let f = |s: Strategy| {
            let cfg = ProtocolConfig::storage(s, 0.99, n, METER_VAR, true).unwrap();
            storage_fidelity(&cfg, VariancePair::vacuum()).unwrap()
        };
        let (fa, fb, fc, fd) = (
            f(Strategy::SqueezedMeterErasing),
            f(Strategy::VacuumMeterErasing),
            f(Strategy::Unprotected),
            f(Strategy::SqueezedInjection),
        );
        if !(fa >= fb - 1e-12 && fb >= fc - 1e-12 && fa >= fd - 1e-12) {
            ok = false;
            witness = format!("violated at N = {n}");
            break;
        }
    }
    check(
        results,
        "strategy ordering F_A >= F_B >= F_C, F_A >= F_D (N = 1..500)",
        ok,
        if ok { "holds at every N".into() } else { witness },
    );
}

/// 6. Unprotected squeezing saturates at the loss floor; protected squeezing
/// passes far below it.
fn criterion_6(results: &mut Vec<Outcome>) {
    let g = (0.02f64).exp();
    let limit = saturation_limit(0.99, g, METER_VAR).unwrap();
    let unprotected = generation_variances(
        &ProtocolConfig::generation(Strategy::SqueezedInjection, 0.99, g, 5000, METER_VAR)
            .unwrap(),
    )
    .var_p;
    let protected = generation_variances(
        &ProtocolConfig::generation(Strategy::SqueezedMeterErasing, 0.99, g, 5000, METER_VAR)
            .unwrap(),
    )
    .var_p;
    let rel = (unprotected - limit).abs() / limit;
    let ratio = protected / limit;
    check(
        results,
        "saturation bound (N = 5000)",
        rel < 1e-2 && ratio < 1e-20,
        format!("limit = {limit:.6}, unprotected rel err = {rel:.2e}, protected/limit = {ratio:.2e}"),
    );
}

/// 7. Cycle-count inversion hits the target exactly between 251 and 252.
fn criterion_7(results: &mut Vec<Outcome>) {
    let g = (0.02f64).exp();
    let n = min_cycles_to_var_p(0.99, g, TARGET_VAR_P).unwrap();
    let var = |cycles: u32| {
        generation_variances(
            &ProtocolConfig::generation(Strategy::SqueezedMeterErasing, 0.99, g, cycles, METER_VAR)
                .unwrap(),
        )
        .var_p
    };
    let bracket = var(251) > TARGET_VAR_P && TARGET_VAR_P > var(252);
    check(
        results,
        "cycle-count inversion (target 0.5 e^-5)",
        n == 252 && bracket,
        format!("min_cycles = {n}, var(251) = {:.6e}, var(252) = {:.6e}", var(251), var(252)),
    );
}

/// 8. Strategy D's target fidelity starts above strategy A's and crosses
/// below it exactly once within 2000 cycles.
fn criterion_8(results: &mut Vec<Outcome>) {
    let g = (0.02f64).exp();
    let target = VariancePair::new(0.25 / TARGET_VAR_P, TARGET_VAR_P);
    let f = |s: Strategy, n: u32| {
        let cfg = ProtocolConfig::generation(s, 0.99, g, n, METER_VAR).unwrap();
        target_fidelity(generation_variances(&cfg), target)
    };
    let mut crossings = Vec::new();
    let mut prev_sign = 0i8;
    let mut first_diff = 0.0;
    for n in 1..=2000u32 {
        let d = f(Strategy::SqueezedInjection, n) - f(Strategy::SqueezedMeterErasing, n);
        if n == 1 {
            first_diff = d;
        }
        let sign = if d > 0.0 { 1 } else { -1 };
        if prev_sign != 0 && sign != prev_sign {
            crossings.push(n);
        }
        prev_sign = sign;
    }
    check(
        results,
        "strategy D/A fidelity crossover exists and is unique (N <= 2000)",
        first_diff > 0.0 && crossings.len() == 1,
        format!("F_D - F_A at N=1: {first_diff:.4}, crossings at {crossings:?}"),
    );
}

/// 9. Randomized invariant suite: symplectic form, uncertainty bound,
/// conditioning contraction, fidelity range; 1000 cases each.
fn criterion_9(results: &mut Vec<Outcome>) {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE97);
    let omega2 = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega4 = Matrix4::zeros();
    omega4[(0, 1)] = 1.0;
    omega4[(1, 0)] = -1.0;
    omega4[(2, 3)] = 1.0;
    omega4[(3, 2)] = -1.0;

    let random_state = |rng: &mut ChaCha12Rng| {
        let vx = rng.gen_range(0.26f64..4.0);
        let vp = rng.gen_range(0.26f64..4.0);
        let scale = (0.25 * rng.gen_range(1.0f64..8.0) / (vx * vp)).sqrt().max(1.0);
        let (vx, vp) = (vx * scale, vp * scale);
        let room = (vx * vp - 0.25).max(0.0).sqrt();
        let c = rng.gen_range(-0.99f64..0.99) * room;
        QuadratureState::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            vx,
            vp,
            c,
        )
        .expect("sampled state is valid")
    };

    let mut pass = true;
    let mut detail = String::from("1000 randomized cases");
    'outer: for case in 0..1000 {
        let r = rng.gen_range(0.05f64..1.0);
        let gain = rng.gen_range(0.2f64..5.0);
        let s4 = beamsplitter_matrix(r).unwrap();
        let s2 = gain_matrix(gain);
        let bs_defect = (s4 * omega4 * s4.transpose() - omega4).abs().max();
        let sq_defect = (s2 * omega2 * s2.transpose() - omega2).abs().max();
        if bs_defect > 1e-12 || sq_defect > 1e-12 {
            pass = false;
            detail = format!("case {case}: symplectic defect {bs_defect:e}/{sq_defect:e}");
            break 'outer;
        }

        let signal = random_state(&mut rng).squeeze_gain(gain).unwrap();
        let meter = random_state(&mut rng);
        let meter = meter.displaced(-meter.mean_x(), -meter.mean_p());
        let joint = mirror_mix(&signal, &meter, r).unwrap();
        let outcome = rng.gen_range(-4.0f64..4.0);
        let conditioned = joint.condition_on_meter_p(outcome).unwrap();
        let marginal = joint.signal_marginal();
        if conditioned.det_cov() < 0.25 - 1e-9
            || marginal.det_cov() < 0.25 - 1e-9
            || signal.det_cov() < 0.25 - 1e-9
        {
            pass = false;
            detail = format!("case {case}: uncertainty bound violated");
            break 'outer;
        }
        if conditioned.var_p() > marginal.var_p() + 1e-12 {
            pass = false;
            detail = format!("case {case}: conditioning inflated var_p");
            break 'outer;
        }

        let a = random_state(&mut rng);
        let b = random_state(&mut rng);
        let fid = overlap_fidelity(&a, &b);
        if !(0.0..=1.0).contains(&fid) {
            pass = false;
            detail = format!("case {case}: fidelity {fid} out of range");
            break 'outer;
        }
    }
    check(results, "randomized invariant suite (1000 cases)", pass, detail);
}

/// 10. The compare command is bit-reproducible under a fixed seed.
fn criterion_10(results: &mut Vec<Outcome>) {
    let bin = env!("CARGO_BIN_EXE_cavity-erasure");
    let dir = std::env::temp_dir().join("cavity-erasure-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |tag: &str| {
        let out_path = dir.join(format!("report-{tag}.csv"));
        let output = Command::new(bin)
            .args([
                "compare",
                "--seed",
                "42",
                "--trajectories",
                "10000",
                "--out",
            ])
            .arg(&out_path)
            .output()
            .expect("compare runs");
        (
            output.status.code(),
            output.stdout,
            std::fs::read(&out_path).expect("report written"),
        )
    };
    let (code_a, stdout_a, report_a) = run("a");
    let (code_b, stdout_b, report_b) = run("b");
    let pass = code_a == Some(0)
        && code_b == Some(0)
        && stdout_a == stdout_b
        && report_a == report_b;
    check(
        results,
        "compare --seed 42 is byte-identical across runs",
        pass,
        format!(
            "exit codes {code_a:?}/{code_b:?}, report {} bytes",
            report_a.len()
        ),
    );
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    criterion_1(&mut results);
    criterion_2(&mut results);
    criterion_3(&mut results);
    criterion_4(&mut results);
    criterion_5(&mut results);
    criterion_6(&mut results);
    criterion_7(&mut results);
    criterion_8(&mut results);
    criterion_9(&mut results);
    criterion_10(&mut results);

    let mut all_pass = true;
    for (i, outcome) in results.iter().enumerate() {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:2}. {} — {}", i + 1, outcome.name, outcome.detail);
        all_pass &= outcome.pass;
    }
    assert!(all_pass, "acceptance criteria failed; see the lines above");
}
