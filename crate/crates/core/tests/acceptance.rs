//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use hybridsim::algorithms::{analytic_pr0, build_active_reset_prepared, build_ipe_step, build_rwpe, RwpeParams};
use hybridsim::bayes::{posterior, refit, EvidenceRecord, PosteriorGrid, RefitConfig};
use hybridsim::fixedpoint::{FixedQ216, Int18};
use hybridsim::hir::{lower_to_native, parse, GateKind, Instruction, Operand, Profile};
use hybridsim::histogram::Histogram;
use hybridsim::sim::{write_jsonl, ClassicalMode, ExecConfig, Executor, NoiseModel, Scalar, Schedule, ShotRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dense, fixed, reset, within_sigma};

const BINS: usize = 100;
const LO: f64 = -2.0;
const HI: f64 = 2.0;
const BIN_WIDTH: f64 = (HI - LO) / BINS as f64;

type Check = (bool, String);

fn rwpe_run(mode: ClassicalMode, noise: Option<NoiseModel>, shots: u64, seed: u64) -> Vec<ShotRecord> {
    let program = build_rwpe(&RwpeParams::default()).unwrap();
    let mut cfg = ExecConfig::new(mode, seed, shots);
    cfg.noise = noise;
    Executor::new(&program, &cfg).unwrap().run_shots().unwrap()
}

fn estimate_histogram(records: &[ShotRecord]) -> Histogram {
    Histogram::from_values(records.iter().map(|r| 2.0 * r.output("mu").unwrap().as_f64()), BINS, LO, HI).unwrap()
}

/// The mode bin contains 0.5 within one bin width of tolerance.
fn peak_at_half(h: &Histogram) -> bool {
    (h.mode_bin_center() - 0.5).abs() <= BIN_WIDTH
}

fn criterion_1() -> Check {
    let h = estimate_histogram(&rwpe_run(ClassicalMode::ExactReal, None, 10_000, 1));
    (peak_at_half(&h), format!("exact mode bin center {:.2}, peak {}/10000", h.mode_bin_center(), h.peak_height()))
}

fn criterion_2() -> Check {
    let records = rwpe_run(ClassicalMode::FixedPoint, None, 10_000, 2);
    let complete = records.iter().all(|r| r.iterations == 24 && r.evidence.len() == 24);
    let h = estimate_histogram(&records);
    (
        peak_at_half(&h) && complete,
        format!(
            "fixed mode bin center {:.2}, peak {}/10000, all shots ran 24 iterations: {complete}",
            h.mode_bin_center(),
            h.peak_height()
        ),
    )
}

fn criterion_3() -> Check {
    let ideal = estimate_histogram(&rwpe_run(ClassicalMode::FixedPoint, None, 5_000, 3));
    let noisy = estimate_histogram(&rwpe_run(ClassicalMode::FixedPoint, Some(NoiseModel::default()), 5_000, 3));
    let ideal_frac = ideal.peak_height() as f64 / 5_000.0;
    let noisy_frac = noisy.peak_height() as f64 / 5_000.0;
    (
        peak_at_half(&noisy) && noisy_frac < ideal_frac,
        format!(
            "noisy mode bin center {:.2}, peak fraction noisy {noisy_frac:.4} < ideal {ideal_frac:.4}",
            noisy.mode_bin_center()
        ),
    )
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shots = 100_000u64;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 0..20 {
        let phi: f64 = rng.gen_range(-0.9..0.9);
        let phi_inv: f64 = rng.gen_range(-1.0..1.0);
        let t: f64 = rng.gen_range(0.5..4.0);
        let program = build_ipe_step(-2.0 * phi).unwrap();
        let cfg =
            ExecConfig::new(ClassicalMode::ExactReal, 100 + k, shots).with_input("t", t).with_input("phi_inv", phi_inv);
        let zeros =
            Executor::new(&program, &cfg).unwrap().run_shots().unwrap().iter().filter(|r| r.evidence[0].d == 0).count()
                as u64;
        let p = analytic_pr0(phi * PI, phi_inv * PI, t);
        let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1e-12);
        worst = worst.max((zeros as f64 / shots as f64 - p).abs() / sigma);
        ok &= within_sigma(zeros, shots, p, 3.0);
    }
    (ok, format!("20 triples, worst deviation {worst:.2} sigma"))
}

fn criterion_5() -> Check {
    let shots = 100_000u64;
    let mut ok = true;
    let mut details = Vec::new();
    for r in [0.0, 0.05, 0.2] {
        for excited in [false, true] {
            let excite: &[u32] = if excited { &[0] } else { &[] };
            let program = build_active_reset_prepared(1, excite).unwrap();
            let cfg =
                ExecConfig::new(ClassicalMode::FixedPoint, 5, shots).with_noise(NoiseModel::readout_only(r).unwrap());
            let successes = Executor::new(&program, &cfg)
                .unwrap()
                .run_shots()
                .unwrap()
                .iter()
                .filter(|rec| rec.output("success") == Some(Scalar::Bit(true)))
                .count() as u64;
            let p = reset::success_probability(excited, r);
            ok &= within_sigma(successes, shots, p, 3.0);
            details.push(format!("r={r} from |{}>: {:.4} vs {p:.4}", excited as u8, successes as f64 / shots as f64));
        }
    }
    (ok, details.join("; "))
}

fn lowered_unitary(source: &str) -> dense::M {
    let program = parse(source).unwrap();
    let lowered = lower_to_native(&program, &Profile::native()).unwrap();
    let n = lowered.entry_procedure().qubits as usize;
    let mut u = dense::identity(1 << n);
    for instr in &lowered.entry_procedure().blocks[0].instructions {
        let Instruction::Gate { gate, angle, qubits } = instr else { panic!("unexpected {instr:?}") };
        let theta = match angle {
            Some(Operand::Lit(x)) => x * PI,
            None => 0.0,
            Some(other) => panic!("non-literal angle {other:?}"),
        };
        let g = match gate {
            GateKind::H => dense::h(),
            GateKind::X => dense::x(),
            GateKind::Sx => dense::sx(),
            GateKind::Rz => dense::rz(theta),
            GateKind::Eswap => dense::eswap(theta),
            other => panic!("non-native gate {other:?} after lowering"),
        };
        let qs: Vec<usize> = qubits.iter().map(|q| q.0 as usize).collect();
        u = dense::matmul(&dense::embed(&g, &qs, n), &u);
    }
    u
}

fn criterion_6() -> Check {
    let mut worst: f64 = 0.0;
    for (c, t) in [(0, 1), (1, 0)] {
        let u = lowered_unitary(&format!("proc p() qubits 2 entry\nentry:\n  cnot q{c}, q{t}\n  ret\nend\n"));
        worst = worst.max(dense::distance_up_to_phase(&u, &dense::embed(&dense::cnot(), &[c, t], 2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let theta: f64 = rng.gen_range(-2.0..2.0);
        let u = lowered_unitary(&format!("proc p() qubits 2 entry\nentry:\n  crz({theta}) q0, q1\n  ret\nend\n"));
        worst = worst.max(dense::distance_up_to_phase(&u, &dense::embed(&dense::crz(theta * PI), &[0, 1], 2)));
    }
    let swap_phase = dense::relative_phase(&dense::eswap(PI), &dense::swap());
    let swap_dist = dense::distance_up_to_phase(&dense::eswap(PI), &dense::swap());
    let phase_ok = (swap_phase - dense::c(0.0, -1.0)).norm() < 1e-10;
    (
        worst < 1e-10 && swap_dist < 1e-10 && phase_ok,
        format!("max lowering error {worst:.2e}; ESWAP(pi) = {swap_phase:.3} * SWAP (distance {swap_dist:.1e})"),
    )
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut pairs: Vec<(i32, i32)> =
        (0..n).map(|_| (rng.gen_range(-(1 << 17)..(1 << 17)), rng.gen_range(-(1 << 17)..(1 << 17)))).collect();
    for a in fixed::BOUNDARY_RAWS {
        for b in fixed::BOUNDARY_RAWS {
            pairs.push((a, b));
        }
    }
    let fx = |r: i32| FixedQ216::from_raw(r as i64);
    let int = |r: i32| Int18::wrapping(r as i64);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for &(a, b) in &pairs {
        let cases = [
            ((fx(a) + fx(b)).raw(), fixed::add(a, b)),
            ((fx(a) - fx(b)).raw(), fixed::sub(a, b)),
            ((fx(a) * fx(b)).raw(), fixed::mul_q216(a, b)),
            ((-fx(a)).raw(), fixed::neg(a)),
            ((int(a) + int(b)).get(), fixed::add(a, b)),
            ((int(a) - int(b)).get(), fixed::sub(a, b)),
            ((int(a) * int(b)).get(), fixed::mul_int(a, b)),
            ((-int(a)).get(), fixed::neg(a)),
        ];
        for (got, want) in cases {
            checked += 1;
            mismatches += (got != want) as usize;
        }
    }
    let mut encode_mismatch = 0usize;
    for _ in 0..n {
        let x: f64 = rng.gen_range(-2.1..2.1);
        let x = if rng.gen_bool(0.1) { (x * 65536.0).round() / 65536.0 + 0.5 / 65536.0 } else { x };
        let got = FixedQ216::encode(x).ok().map(|v| v.raw());
        encode_mismatch += (got != fixed::encode(x)) as usize;
    }
    let mut recip_violations = 0usize;
    let raws = (0..n).map(|_| rng.gen_range(-(1 << 17)..(1 << 17))).chain(fixed::BOUNDARY_RAWS);
    for raw in raws {
        if raw == 0 {
            continue;
        }
        let a = fx(raw);
        let pre = a.recip_unwrapped().unwrap();
        if a.recip().unwrap().raw() != fixed::wrap(&pre.into()) {
            recip_violations += 1;
        }
        if raw.abs() >= 1 << 8 {
            let exact = 65536.0 / raw as f64;
            if ((pre as f64 / 65536.0) - exact).abs() > exact.abs() / 1024.0 {
                recip_violations += 1;
            }
        }
    }
    (
        mismatches == 0 && encode_mismatch == 0 && recip_violations == 0,
        format!(
            "{checked} op results, {mismatches} mismatches; encode mismatches {encode_mismatch}; reciprocal violations {recip_violations}"
        ),
    )
}

fn criterion_8() -> Check {
    let records = rwpe_run(ClassicalMode::ExactReal, None, 1_000, 8);
    let config = RefitConfig { true_phi: Some(0.25), ..Default::default() };
    let summary = refit(&records, &config).unwrap();
    let (raw, per_shot, pooled) = (summary.mse_raw.unwrap(), summary.mse_refit.unwrap(), summary.mse_pooled.unwrap());

    let prior = PosteriorGrid::uniform(2001, -1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for pair in records.chunks(2).take(20) {
        let ev1 = EvidenceRecord::from_shot(&pair[0]).unwrap();
        let ev2 = EvidenceRecord::from_shot(&pair[1]).unwrap();
        let joint = posterior(&ev1.concat(&ev2), &prior).unwrap();
        let sequential = posterior(&ev2, &posterior(&ev1, &prior).unwrap()).unwrap();
        for (a, b) in joint.weights().iter().zip(sequential.weights()) {
            worst = worst.max((a - b).abs());
        }
    }
    (
        per_shot <= raw && pooled <= raw && worst <= 1e-10,
        format!("MSE raw {raw:.4}, per-shot refit {per_shot:.4}, pooled {pooled:.2e}; sequential Bayes max diff {worst:.1e}"),
    )
}

/// Records, histogram and refit bytes for a noisy run in each classical mode.
fn pipeline_bytes(schedule: Schedule) -> Vec<Vec<u8>> {
    let program = build_rwpe(&RwpeParams::default()).unwrap();
    let mut out = Vec::new();
    for mode in [ClassicalMode::ExactReal, ClassicalMode::FixedPoint] {
        let cfg = ExecConfig::new(mode, 9, 2_000).with_noise(NoiseModel::default());
        let records = Executor::new(&program, &cfg).unwrap().run_shots_with(schedule).unwrap();
        let mut jsonl = Vec::new();
        write_jsonl(&mut jsonl, &records).unwrap();
        out.push(jsonl);
        out.push(estimate_histogram(&records).to_csv().into_bytes());
        if mode == ClassicalMode::ExactReal {
            let config = RefitConfig { grid_size: 401, true_phi: Some(0.25), ..Default::default() };
            out.push(serde_json::to_vec(&refit(&records, &config).unwrap()).unwrap());
        }
    }
    out
}

fn criterion_9() -> Check {
    let serial = pipeline_bytes(Schedule::Serial);
    let parallel = pipeline_bytes(Schedule::Parallel);
    let rerun = pipeline_bytes(Schedule::Parallel);
    let same = serial == parallel && parallel == rerun;
    let bytes: usize = serial.iter().map(Vec::len).sum();
    (same, format!("2000-shot noisy pipelines in both modes, {bytes} bytes, serial == parallel == rerun: {same}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 9] = [
        ("ideal RWPE peak", criterion_1),
        ("fixed-point fidelity", criterion_2),
        ("noisy run", criterion_3),
        ("likelihood agreement", criterion_4),
        ("active reset", criterion_5),
        ("lowering soundness", criterion_6),
        ("fixed-point oracle suite", criterion_7),
        ("Bayesian refit", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        failed += !pass as usize;
        println!(
            "criterion {} {name}: {} ({detail}) [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
