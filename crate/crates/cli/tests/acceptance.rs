//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `--nocapture` to see the lines.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use qor_core::attacks::{intercept_measure, InterceptMode, InterceptPlan};
use qor_core::classgroup::{class_number, enumerate_reduced, Discriminant, QuadraticForm};
use qor_core::protocol::{
    chi_square_uniform, procedure4_final_state, run, MapperKind, MessageCircuit, Procedure, RunConfig, RunContext,
    Sobol,
};
use qor_core::qsim::{exact_rotation_angle, FilterOutcome, RegisterLayout, StateVector};
use qor_core::scheme::{
    adjacency, commutator_norm, compose_actions, intersection_numbers, num_classes, scheme, spectral, ActionTable,
    CycleAction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FAST: Duration = Duration::from_secs(1);
const DEMO_BUDGET: Duration = Duration::from_secs(120);
const DEMO_SHOTS: usize = 10_000;
const DEMO_SEED: u64 = 7;
const SENDER_KEY: u64 = 213;
const WRONG_KEY: u64 = 236;
/// `10⁴/5 ± 200`, five binomial standard deviations.
const OUTCOME_EXPECTED: f64 = 2000.0;
const OUTCOME_BAND: f64 = 200.0;
const MIN_P_VALUE: f64 = 0.001;
const TV_TOL: f64 = 1e-6;
const MATRIX_TOL: f64 = 1e-9;
const FIDELITY_TOL: f64 = 1e-9;
const WRONG_KEY_MAX: f64 = 1.0 - 1e-3;
const FIRST_HOP_SUPPORT: [u64; 5] = [116, 193, 213, 248, 307];
const SPECTRAL_ORDERS: [usize; 4] = [5, 7, 11, 12];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    match out {
        Ok(d) if elapsed < budget => Ok(format!("{d} ({elapsed:.2?})")),
        Ok(d) => Err(format!("{d}, but took {elapsed:.2?} > {budget:?}")),
        Err(d) => Err(format!("{d} ({elapsed:.2?})")),
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn table() -> Arc<ActionTable> {
    Arc::new(ActionTable::bundled())
}

fn class_number_cli() -> Outcome {
    timed(FAST, || {
        let out = Command::new(env!("CARGO_BIN_EXE_qor"))
            .args(["classgroup", "class-number", "-167"])
            .output()
            .map_err(|e| e.to_string())?;
        let text = String::from_utf8_lossy(&out.stdout).trim().to_string();
        let lib = class_number(&Discriminant::new(-167).unwrap()).map_err(|e| e.to_string())?;
        check(out.status.success() && text == "11" && lib == 11, format!("cli printed {text:?}, library {lib}"))
    })
}

fn group_axioms() -> Outcome {
    timed(FAST, || {
        let forms = enumerate_reduced(&Discriminant::new(-167).unwrap()).map_err(|e| e.to_string())?;
        let n = forms.len();
        let index = |f: &QuadraticForm| forms.iter().position(|g| g == f);
        let mut cayley = vec![vec![0usize; n]; n];
        for (x, fx) in forms.iter().enumerate() {
            for (y, fy) in forms.iter().enumerate() {
                let xy = fx.compose(fy).map_err(|e| e.to_string())?;
                cayley[x][y] = index(&xy).ok_or(format!("{fx}·{fy} = {xy} not reduced in the set"))?;
            }
        }
        let id = index(&Discriminant::new(-167).unwrap().principal_form()).ok_or("identity missing")?;
        let mut failures = 0;
        for x in 0..n {
            failures += usize::from(cayley[id][x] != x || cayley[x][id] != x);
            failures += usize::from((0..n).filter(|&y| cayley[x][y] == id).count() != 1);
            for y in 0..n {
                for z in 0..n {
                    failures += usize::from(cayley[cayley[x][y]][z] != cayley[x][cayley[y][z]]);
                }
            }
        }
        check(n == 11 && failures == 0, format!("{n}x{n} table, {failures} axiom violations"))
    })
}

fn superposed_demo(report: &qor_core::protocol::RunReport, elapsed: Duration) -> Outcome {
    let hits = report.recovered_keys.get(&SENDER_KEY).copied().unwrap_or(0);
    let fidelity = report.statistics.min_message_fidelity.unwrap_or(0.0);
    let detail = format!("{hits}/{DEMO_SHOTS} shots recover {SENDER_KEY}, min fidelity {fidelity:.12} ({elapsed:.2?})");
    check(hits == DEMO_SHOTS as u64 && fidelity >= 1.0 - FIDELITY_TOL && elapsed < DEMO_BUDGET, detail)
}

fn first_measurement_uniformity(report: &qor_core::protocol::RunReport) -> Outcome {
    let counts: Vec<u64> = report.histogram.values().copied().collect();
    let in_band = counts.iter().all(|&c| (c as f64 - OUTCOME_EXPECTED).abs() <= OUTCOME_BAND);
    let (stat, p) = chi_square_uniform(&counts).ok_or("no counts")?;
    let has_example = report.histogram.contains_key("011101100 0 100");
    check(
        counts.len() == 5 && in_band && p > MIN_P_VALUE && has_example,
        format!("counts {:?}, chi2 {stat:.3}, p {p:.4}", report.histogram),
    )
}

fn exact_grover() -> Outcome {
    let (q, omega) = (3usize, 5usize);
    let layout = RegisterLayout::new(&[("index", q), ("ancilla", 1)]).map_err(|e| e.to_string())?;
    let mut s = StateVector::new(layout);
    for b in 0..q {
        s.apply_h(b).map_err(|e| e.to_string())?;
    }
    let outcome = s.grover_filter(omega, "index", q).map_err(|e| e.to_string())?;
    let theta = exact_rotation_angle(q, omega);
    let reference = (1.0 - (1u64 << q) as f64 / (2 * omega) as f64).acos();
    // ancilla is the qubit above the index register
    let tv: f64 = 0.5
        * s.amplitudes()
            .iter()
            .enumerate()
            .map(|(x, a)| {
                let target = if x < omega { 1.0 / omega as f64 } else { 0.0 };
                (a.norm_sqr() - target).abs()
            })
            .sum::<f64>();
    check(
        outcome == FilterOutcome::Rotated { theta } && (theta - reference).abs() < 1e-15 && tv < TV_TOL,
        format!("θ = {theta:.15} (arccos 0.2 = {reference:.15}), total variation {tv:.2e}"),
    )
}

fn commuting_unitaries() -> Outcome {
    let data = spectral(11).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in 0..=num_classes(11) {
        for t in 0..=num_classes(11) {
            let us = data.walk_unitary(s, 1.3).map_err(|e| e.to_string())?;
            let ut = data.walk_unitary(t, 0.7).map_err(|e| e.to_string())?;
            worst = worst.max(commutator_norm(&us, &ut));
        }
    }
    check(worst < MATRIX_TOL, format!("max ‖[U_s(1.3), U_t(0.7)]‖_F = {worst:.2e} over 36 pairs"))
}

fn spectral_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in SPECTRAL_ORDERS {
        let d = num_classes(n);
        let data = spectral(n).map_err(|e| e.to_string())?;
        let self_paired = |x: usize| x == 0 || 2 * x == n;
        let mult = |t: usize| if self_paired(t) { 1 } else { 2 };
        for s in 0..=d {
            // closed form, one conjugate term for the self-paired classes
            let mut closed: Vec<f64> = (0..=d)
                .flat_map(|t| {
                    let angle = 2.0 * PI * (s * t) as f64 / n as f64;
                    let value = if self_paired(s) { angle.cos() } else { 2.0 * angle.cos() };
                    std::iter::repeat_n(value, mult(t))
                })
                .collect();
            closed.sort_by(f64::total_cmp);
            let a = adjacency(n, s).map_err(|e| e.to_string())?;
            let mut numeric: Vec<f64> = a.entries().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            numeric.sort_by(f64::total_cmp);
            for (c, x) in closed.iter().zip(&numeric) {
                worst = worst.max((c - x).abs());
            }
            let library = data.spectrum(s);
            for (c, x) in library.iter().zip(&numeric) {
                worst = worst.max((c - x).abs());
            }
            let reconstructed = data.reconstruct(s) - a.entries().map(|x| Complex64::new(x, 0.0));
            worst = worst.max(max_abs(&reconstructed));
        }
        let es = data.idempotents();
        for (s, es_) in es.iter().enumerate() {
            for (t, et) in es.iter().enumerate() {
                let expected = if s == t { es_.clone() } else { DMatrix::zeros(n, n) };
                worst = worst.max(max_abs(&(es_ * et - expected)));
            }
        }
    }
    check(worst < MATRIX_TOL, format!("max deviation {worst:.2e} for n in {SPECTRAL_ORDERS:?}"))
}

fn intersection_numbers_match() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for n in SPECTRAL_ORDERS {
        let classes = scheme(n).map_err(|e| e.to_string())?;
        let table = intersection_numbers(n).map_err(|e| e.to_string())?;
        for (i, ai) in classes.iter().enumerate() {
            for (j, aj) in classes.iter().enumerate() {
                let product = ai.entries() * aj.entries();
                let mut expansion = DMatrix::zeros(n, n);
                for (k, ak) in classes.iter().enumerate() {
                    expansion += ak.entries() * f64::from(table.get(i, j, k));
                }
                mismatches += usize::from(expansion != product);
                checked += 1;
            }
        }
    }
    check(mismatches == 0, format!("{checked} products A_iA_j, {mismatches} mismatches"))
}

fn action_properties() -> Outcome {
    let t = table();
    let names: Vec<String> = t.cycle_names().map(str::to_string).collect();
    let mut j_set = t.j_set().to_vec();
    j_set.sort_unstable();
    let mut problems = Vec::new();
    for name in &names {
        let action = CycleAction::forward(t.clone(), name).map_err(|e| e.to_string())?;
        let mut orbit: Vec<u64> = (0..11).scan(t.j0(), |j, _| Some(std::mem::replace(j, action.apply(*j)))).collect();
        let closes = action.act(t.j0(), 11) == t.j0();
        orbit.sort_unstable();
        if orbit != j_set || !closes {
            problems.push(format!("{name} is not an 11-cycle on J"));
        }
        if (0..t.p()).any(|j| action.inverse().apply(action.apply(j)) != j) {
            problems.push(format!("{name} inverse fails"));
        }
    }
    let mut pairs = 0;
    for x in &names {
        for y in &names {
            let ax = CycleAction::forward(t.clone(), x).map_err(|e| e.to_string())?;
            let ay = CycleAction::forward(t.clone(), y).map_err(|e| e.to_string())?;
            for &j in t.j_set() {
                if compose_actions(&ax, &ay, j).ok() != compose_actions(&ay, &ax, j).ok() {
                    problems.push(format!("{x}{y} does not commute at {j}"));
                }
            }
            pairs += 1;
        }
    }
    check(
        names.len() == 5 && pairs == 25 && problems.is_empty(),
        format!("{} cycles, {pairs} ordered pairs, residues 0..{}: {problems:?}", names.len(), t.p() - 1),
    )
}

fn message_roundtrip() -> Outcome {
    let t = table();
    let sobol = Sobol::new(4).map_err(|e| e.to_string())?;
    let layout = RegisterLayout::new(&[("message", 4)]).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 1.0;
    for k in 0..200 {
        let key = t.j_set()[rng.random_range(0..t.j_set().len())];
        let original = if k < 100 {
            StateVector::basis(layout.clone(), &[("message", rng.random_range(0..16))]).map_err(|e| e.to_string())?
        } else {
            let amps: Vec<Complex64> = (0..16)
                .map(|_| Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU)))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            StateVector::from_amplitudes(layout.clone(), amps.into_iter().map(|a| a / norm).collect())
                .map_err(|e| e.to_string())?
        };
        let circuit = MessageCircuit::new(key, t.p(), &sobol).map_err(|e| e.to_string())?;
        let mut s = original.clone();
        circuit.encrypt(&mut s, "message").map_err(|e| e.to_string())?;
        circuit.decrypt(&mut s, "message").map_err(|e| e.to_string())?;
        worst = worst.min(s.fidelity(&original).map_err(|e| e.to_string())?);
    }
    let right = MessageCircuit::new(SENDER_KEY, t.p(), &sobol).map_err(|e| e.to_string())?;
    let wrong = MessageCircuit::new(WRONG_KEY, t.p(), &sobol).map_err(|e| e.to_string())?;
    let original = StateVector::basis(layout, &[("message", 0b0101)]).map_err(|e| e.to_string())?;
    let mut s = original.clone();
    right.encrypt(&mut s, "message").map_err(|e| e.to_string())?;
    wrong.decrypt(&mut s, "message").map_err(|e| e.to_string())?;
    let wrong_fidelity = s.fidelity(&original).map_err(|e| e.to_string())?;
    check(
        worst >= 1.0 - FIDELITY_TOL && wrong_fidelity < WRONG_KEY_MAX,
        format!(
            "min roundtrip fidelity {worst:.12} over 100 basis + 100 superposed, \
             wrong key ({SENDER_KEY}, {WRONG_KEY}) fidelity {wrong_fidelity:.6}"
        ),
    )
}

fn full_cycle() -> Outcome {
    let config = RunConfig { procedure: Procedure::FullCycle, ..RunConfig::demo5(200, DEMO_SEED) };
    let ctx = RunContext::new(config).map_err(|e| e.to_string())?;
    let report = run(&ctx).map_err(|e| e.to_string())?;
    let squaring = procedure4_final_state(&ctx, MapperKind::RepeatedSquaring).map_err(|e| e.to_string())?;
    let naive = procedure4_final_state(&ctx, MapperKind::Naive).map_err(|e| e.to_string())?;
    let gap = squaring.amplitudes().iter().zip(naive.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    check(
        report.recovered_keys.keys().eq([SENDER_KEY].iter()) && gap < MATRIX_TOL,
        format!("keys {:?}, mapper gap {gap:.2e}", report.recovered_keys),
    )
}

fn attack_uniformity() -> Outcome {
    let ctx = RunContext::new(RunConfig::demo5(DEMO_SHOTS, DEMO_SEED)).map_err(|e| e.to_string())?;
    let plan = InterceptPlan::new(&[0], InterceptMode::MeasureAndResend, 99);
    let report = intercept_measure(&ctx, &plan).map_err(|e| e.to_string())?;
    let hop = report.hop(0).ok_or("hop 0 missing")?;
    let observed: Vec<u64> = hop.histogram.keys().copied().collect();
    let p = hop.uniformity.as_ref().map(|u| u.p_value).unwrap_or(0.0);
    check(
        observed == FIRST_HOP_SUPPORT && hop.support == FIRST_HOP_SUPPORT && p > MIN_P_VALUE && report.key_unchanged(),
        format!("observed {:?}, p {p:.4}, receiver keys {:?}", hop.histogram, report.recovered_keys),
    )
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut outputs = Vec::new();
    for dir in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_qor"))
            .args(["demo5", "--shots", "500", "--seed", "13", "--out-dir"])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("demo5 exited with {}", status.status));
        }
        let read = |name: &str| std::fs::read(dir.path().join(name)).map_err(|e| e.to_string());
        outputs.push((read("transcript.json")?, read("histogram.csv")?));
    }
    check(
        outputs[0] == outputs[1],
        format!("transcript {} bytes, histogram {} bytes", outputs[0].0.len(), outputs[0].1.len()),
    )
}

#[test]
fn acceptance() {
    let mut results: BTreeMap<u32, (&str, Outcome)> = BTreeMap::new();
    results.insert(1, ("class number of -167", class_number_cli()));
    results.insert(2, ("group axioms on the Cayley table", group_axioms()));

    let start = Instant::now();
    let demo = RunContext::new(RunConfig::demo5(DEMO_SHOTS, DEMO_SEED)).and_then(|ctx| run(&ctx));
    let elapsed = start.elapsed();
    match &demo {
        Ok(report) => {
            results.insert(3, ("five-actor demo recovers the sender key", superposed_demo(report, elapsed)));
            results.insert(4, ("first-measurement uniformity", first_measurement_uniformity(report)));
        }
        Err(e) => {
            results.insert(3, ("five-actor demo recovers the sender key", Err(e.to_string())));
            results.insert(4, ("first-measurement uniformity", Err(e.to_string())));
        }
    }
    results.insert(5, ("exact Grover filter", exact_grover()));
    results.insert(6, ("commuting walk unitaries", commuting_unitaries()));
    results.insert(7, ("spectral closed forms and idempotents", spectral_closed_forms()));
    results.insert(8, ("intersection numbers", intersection_numbers_match()));
    results.insert(9, ("class action properties on the fixture", action_properties()));
    results.insert(10, ("message roundtrip and wrong-key fidelity", message_roundtrip()));
    results.insert(11, ("full-cycle run and mapper equivalence", full_cycle()));
    results.insert(12, ("measure-and-resend at the first hop", attack_uniformity()));
    results.insert(13, ("byte-identical reruns", determinism()));

    let mut failed = Vec::new();
    for (n, (name, outcome)) in &results {
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {n:>2} {name}: {detail}");
                failed.push(*n);
            }
        }
    }
    assert_eq!(results.len(), 13);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
