//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quditkit::gates::{build_cinc, build_f, build_x, build_z, single_matrix, UnitaryMatrix};
use quditkit::grover::{analytic_success, build_diffusion_circuit, run_grover, GroverProblem};
use quditkit::leakage::{
    analytic_survival, grover_erasure_mc, leakage_rate, sweep, unitary_leak_op, LeakageConfig,
};
use quditkit::state::computational_unitary;
use quditkit::table3::{self, compare, generate, parse_csv, trace_row};
use quditkit::toffoli::{decompose, optimize_cancel, stats, verify_equivalence};
use quditkit::{Circuit, Delta, SingleKind, StateVector};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let reference = parse_csv(table3::FIXTURE).expect("bundled table parses");
    let simulated = generate(0).expect("table generation");
    // Strict: no errata.
    let report = compare(&reference, &simulated, &[]);

    let bold = trace_row("11111110").expect("trace");
    let want = [
        "11211120", "12211220", "12111210", "12111310", "12121310", "12121210", "12121211",
    ];
    let bold_ok = bold.cycles == want && bold.output == "11111111";

    let target1 = generate(1).expect("table generation");
    let others_fixed = simulated
        .iter()
        .chain(&target1)
        .filter(|r| r.input != "11111110" && r.input != "11111111")
        .all(|r| r.output == r.input)
        && simulated.len() + target1.len() == 256;
    let elapsed = start.elapsed();

    let mut detail = format!(
        "{}/{} rows bit-exact, bold row {}, other inputs unchanged {}, {}",
        report.exact_rows,
        report.rows,
        if bold_ok { "ok" } else { "WRONG" },
        others_fixed,
        secs(elapsed)
    );
    for d in &report.diffs {
        detail.push_str(&format!(
            "; {} {} printed {} simulated {}",
            d.input, d.column, d.printed, d.simulated
        ));
    }
    outcome(
        report.exact() && bold_ok && others_fixed && elapsed < Duration::from_secs(5),
        detail,
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for n in 3..=8 {
        for d in 2..=4usize {
            if d.pow(n as u32) > 1 << 16 {
                continue;
            }
            let r = verify_equivalence(n, d).expect("equivalence");
            checked.push(format!("({n},{d})"));
            if !r.ok() {
                bad.push(format!("({n},{d}) {}/{} off={}", r.matched, r.total, r.off_subspace));
            }
        }
    }
    // Amplitude-level check of the subspace claim on one superposition per case.
    let mut worst = 0.0f64;
    for (n, d) in [(3, 2), (4, 3), (5, 2), (3, 4)] {
        let c = decompose(n, d).unwrap();
        let dims = c.dims();
        let len: usize = dims.iter().product();
        let logical = vec![d; n];
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 10 + d as u64);
        for (i, amp) in amps.iter_mut().enumerate() {
            let digits = decode(&dims, i);
            if digits.iter().zip(&logical).all(|(x, l)| x < l) {
                *amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut sv = StateVector::from_amplitudes(&dims, amps).unwrap();
        sv.run(&c, false).unwrap();
        worst = worst.max(sv.off_subspace_mass(&logical));
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && worst <= 1e-10 && elapsed < Duration::from_secs(60),
        format!(
            "{} cases {}, failures [{}], worst off-subspace mass {worst:.1e}, {}",
            checked.len(),
            checked.join(""),
            bad.join("; "),
            secs(elapsed)
        ),
    )
}

fn decode(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &p) in dims.iter().enumerate().rev() {
        out[k] = idx % p;
        idx /= p;
    }
    out
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    let mut n8 = 0;
    for n in 3..=16 {
        for d in 2..=4 {
            let c = optimize_cancel(&decompose(n, d).unwrap());
            let s = stats(&c, d).unwrap();
            if n == 8 && d == 2 {
                n8 = s.two_qudit_count;
            }
            if s.two_qudit_count != 2 * n - 3 || s.wire_count != n || s.max_level > d + 1 {
                bad.push(format!(
                    "(n={n},d={d}) count={} wires={} max_level={}",
                    s.two_qudit_count, s.wire_count, s.max_level
                ));
            }
        }
    }
    outcome(
        bad.is_empty() && n8 == 13,
        format!("42 cases, n=8 d=2 count {n8}, failures [{}]", bad.join("; ")),
    )
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in 2..=4 {
        for n in [4, 8, 16] {
            let a = stats(&decompose(n, d).unwrap(), d).unwrap().parallel_depth;
            let b = stats(&decompose(2 * n, d).unwrap(), d).unwrap().parallel_depth;
            ok &= b <= a + 4;
            parts.push(format!("d={d} {n}->{a} {}->{b}", 2 * n));
        }
    }
    outcome(ok, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for d in 2..=5usize {
        let mut n = 1;
        while d.pow(n as u32) <= 1024 {
            let size = d.pow(n as u32);
            let marked = decode(&vec![d; n], (7 * n + 3 * d) % size);
            let p = GroverProblem::new(n, d, marked, None).unwrap();
            let got = run_grover(&p, false).unwrap().success_probability;
            worst = worst.max((got - analytic_success(size, p.iterations)).abs());
            cases += 1;
            n += 1;
        }
    }
    let four = GroverProblem::new(2, 2, vec![1, 0], None).unwrap();
    let p4 = run_grover(&four, false).unwrap().success_probability;
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9
            && four.iterations == 1
            && (p4 - 1.0).abs() <= 1e-9
            && elapsed < Duration::from_secs(30),
        format!(
            "{cases} cases, worst |sim - analytic| {worst:.1e}, N=4 k={} success {p4:.12}, {}",
            four.iterations,
            secs(elapsed)
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, d) in [(2, 2), (3, 2), (2, 3usize)] {
        let size = d.pow(n as u32);
        let s = 2.0 / size as f64;
        let want = UnitaryMatrix::from_fn(size, |i, j| {
            Complex64::new(if i == j { s - 1.0 } else { s }, 0.0)
        });
        let (got, leak) = computational_unitary(&build_diffusion_circuit(n, d).unwrap()).unwrap();
        let eq = got.eq_up_to_global_phase(&want, 1e-9);
        ok &= eq && leak <= 1e-10;
        parts.push(format!("({n},{d}) {}", if eq { "equal" } else { "DIFFERENT" }));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in 2..=5 {
        for t in [0.1, 0.5, 1.0, PI] {
            let u = unitary_leak_op(t, d).unwrap();
            for _ in 0..20 {
                let mut amps = vec![Complex64::new(0.0, 0.0); d + 2];
                for a in amps.iter_mut().take(d) {
                    *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                amps.iter_mut().for_each(|a| *a /= norm);
                let pop = amps[d - 1].norm_sqr();
                let mut sv = StateVector::from_amplitudes(&[d + 2], amps).unwrap();
                sv.apply_matrix(0, &u).unwrap();
                let got = leakage_rate(&sv, 0, d).unwrap();
                worst = worst.max((got - (t / 2.0).sin().powi(2) * pop).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{count} states, worst deviation {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let got = analytic_survival(8, 2, 0.001);
    let direct = 0.999f64.powi(96);
    let mut ok = (got - direct).abs() <= 1e-12;
    let mut detail = format!("analytic_survival(8,2,0.001) = {got:.9} vs 0.999^96 = {direct:.9}");
    for p in [1e-4, 1e-3] {
        let rows = sweep(2, 2..=14, &LeakageConfig::erasure(p, 100, 0), 0).unwrap();
        let curve: Vec<f64> = rows.iter().map(|r| r.analytic_survival).collect();
        let monotone = curve.windows(2).all(|w| w[1] < w[0]);
        ok &= monotone && rows.len() == 13;
        detail.push_str(&format!(
            "; p_l={p}: n=2 {:.4} .. n=14 {:.4}, monotone {monotone}",
            curve[0],
            curve[curve.len() - 1]
        ));
    }
    outcome(ok, detail)
}

fn mc_line(p_l: f64, level: Option<usize>, k: Option<usize>) -> (bool, String) {
    let problem = GroverProblem::new(4, 2, vec![0; 4], k).unwrap();
    let cfg = LeakageConfig {
        leak_level: level,
        ..LeakageConfig::erasure(p_l, 10_000, 2024)
    };
    let row = grover_erasure_mc(&problem, &cfg).unwrap();
    let mc = row.mc_success.unwrap();
    let se = row.mc_stderr.unwrap();
    let z = (mc - row.composed).abs() / se;
    (
        z <= 3.0,
        format!(
            "p_l={p_l} level={} k={}: mc {mc:.5} ± {se:.5}, analytic {:.5}, {z:.1} SE",
            cfg.level(2),
            problem.iterations,
            row.composed
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [0.001, 0.01] {
        let (pass, line) = mc_line(p, None, None);
        ok &= pass;
        parts.push(line);
    }
    // Diagnostic: every erasure fatal and one Toffoli exposure per sqrt(N) round.
    for p in [0.001, 0.01] {
        let (_, line) = mc_line(p, Some(3), Some(4));
        parts.push(format!("[diagnostic] {line}"));
    }
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed < Duration::from_secs(120),
        format!("{}; {}", parts.join("; "), secs(elapsed)),
    )
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut unitary = true;
    for d in 2..=8 {
        for u in [build_x(d), build_z(d), build_f(d)] {
            unitary &= u.unwrap().is_unitary(1e-10);
        }
    }
    for phys in 2..=6 {
        for m in 2..=phys {
            for kind in [SingleKind::X, SingleKind::Xinv, SingleKind::Z, SingleKind::F, SingleKind::Finv] {
                unitary &= single_matrix(kind, m, phys).unwrap().is_unitary(1e-10);
            }
            for v in 0..phys {
                for delta in [Delta::Inc, Delta::Dec] {
                    unitary &= build_cinc(phys, v, m, delta).unwrap().is_unitary(1e-10);
                }
            }
        }
    }
    ok &= unitary;
    notes.push(format!("unitarity {unitary}"));

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_norm = 0.0f64;
    for _ in 0..5 {
        let dims = common::random_dims(&mut rng, 4);
        let c = common::random_circuit(&mut rng, &dims, 10_000);
        let mut sv = StateVector::prepare_basis(&dims, &vec![0; dims.len()]).unwrap();
        sv.run(&c, false).unwrap();
        worst_norm = worst_norm.max((sv.norm_sqr() - 1.0).abs());
    }
    ok &= worst_norm <= 1e-10;
    notes.push(format!("norm drift {worst_norm:.1e}"));

    let mut round_trips = 0;
    for _ in 0..1000 {
        let dims = common::random_dims(&mut rng, 5);
        let len = rng.gen_range(0..40);
        let c = common::random_circuit(&mut rng, &dims, len);
        let text = c.emit().unwrap();
        if let Ok(back) = Circuit::parse(&text) {
            if back == c && back.emit().unwrap() == text {
                round_trips += 1;
            }
        }
    }
    ok &= round_trips == 1000;
    notes.push(format!("round trip {round_trips}/1000"));

    let (repro, detail) = cli_reproducible();
    ok &= repro;
    notes.push(detail);
    outcome(ok, notes.join(", "))
}

fn cli_run(args: &[String]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut argv = vec!["quditkit".to_string()];
    argv.extend(args.iter().cloned());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = quditkit::cli::main_with(&argv, &mut out, &mut err);
    (code, out, err)
}

fn cli_reproducible() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let circuit = path("n8.qdc");
    let commands: Vec<(Vec<String>, Option<String>)> = vec![
        (s(&["decompose", "--n", "8", "--d", "2", "--out", &circuit]), Some(circuit.clone())),
        (s(&["decompose", "--n", "9", "--d", "3", "--optimize"]), None),
        (s(&["simulate", &circuit, "--input", "11111110", "--trace"]), None),
        (s(&["grover", "--n", "3", "--d", "3", "--marked", "120", "--seed", "5"]), None),
        (s(&["grover", "--n", "4", "--d", "2", "--marked", "1011", "--json", "--seed", "9"]), None),
        (
            s(&["leakage", "--d", "2", "--n-range", "2..8", "--p-l", "0.01", "--trials", "300",
                "--seed", "3", "--mc-max-n", "4", "--out", &path("sweep.csv")]),
            Some(path("sweep.csv")),
        ),
        (
            s(&["leakage", "--model", "unitary", "--t", "0.5", "--d", "3", "--n-range", "2..4",
                "--p-l", "0.001", "--trials", "100", "--seed", "1"]),
            None,
        ),
        (s(&["verify", "--suite", "all"]), None),
    ];
    let mut bad = Vec::new();
    for (args, file) in &commands {
        let first = cli_run(args);
        let first_file = file.as_ref().map(|f| std::fs::read(f).unwrap_or_default());
        let second = cli_run(args);
        let second_file = file.as_ref().map(|f| std::fs::read(f).unwrap_or_default());
        if first.0 != 0 || first != second || first_file != second_file || first.1.is_empty() && file.is_none() {
            bad.push(format!("`{}` (exit {})", args.join(" "), first.0));
        }
    }
    (
        bad.is_empty(),
        format!("CLI {}/{} commands byte-identical{}", commands.len() - bad.len(), commands.len(),
            if bad.is_empty() { String::new() } else { format!(" [{}]", bad.join("; ")) }),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("truth table bit-exact", criterion_1),
        ("functional equivalence", criterion_2),
        ("gate count and ancilla", criterion_3),
        ("log depth", criterion_4),
        ("Grover success", criterion_5),
        ("diffusion matrix", criterion_6),
        ("unitary leakage identity", criterion_7),
        ("erasure survival formula", criterion_8),
        ("erasure Monte Carlo", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {} - {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
