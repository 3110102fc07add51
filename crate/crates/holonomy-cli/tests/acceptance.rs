//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `cargo test -- --nocapture`).
//!
//! Thresholds are pinned in code; the oracle-pinned phase/solid-angle
//! constants are measured inside the relevant tests rather than assumed.

use holonomy::evolve::{
    adiabatic_propagate, pin_constant, simulate_gate_matrix, simulate_holonomy,
    wilson_line_holonomy,
};
use holonomy::gates::{
    circuit_unitary_with, cnot_matrix, compose_single_qubit, controlled_not_construction,
    extract_gate_phase, gate_fidelity, haar_random_su2, noncommutativity_witness,
    synthesize_single_qubit, unwrap_phase,
};
use holonomy::linalg::{Basis, QuantumState};
use holonomy::loops::ParameterLoop;
use holonomy::model::{GateKind, GateModel};
use holonomy::noise::{
    energy_gap, fit_proportional, fit_scaling_exponent, heating_budget, leakage_estimate,
    spontaneous_emission_budget, GateClass, NoiseBudget,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::Command;

fn models() -> [(GateModel, &'static str); 3] {
    [
        (GateModel::u1(), "u1"),
        (GateModel::u2(), "u2"),
        (GateModel::u3(0.1, 0.01), "u3"),
    ]
}

/// Convert a dimensionless gap*T product into seconds and a step count that
/// resolves the fast scale (10 slices per unit of gap*T).
fn run_params(model: &GateModel, omega_t: f64) -> (f64, usize) {
    let gap = model.gap_scale(1.0);
    (omega_t / gap, (10.0 * omega_t).ceil() as usize)
}

#[test]
fn criterion_01_unitarity() {
    let mut worst = 0.0f64;
    for (model, name) in models() {
        let lp = ParameterLoop::latitude(PI / 3.0, 0.1, 1.0).unwrap();
        let (t, _) = run_params(&model, 500.0);
        let prop = adiabatic_propagate(&model, &lp, t, 10_000).unwrap();
        let defect = prop.matrix.unitarity_defect();
        assert!(
            defect < 1e-9,
            "{name}: propagator unitarity defect {defect:.3e}"
        );
        worst = worst.max(defect);
    }
    println!("criterion 01 unitarity: PASS (max |U^dag U - I| = {worst:.3e} over 10^4-step runs)");
}

#[test]
fn criterion_02_oracle_pinning_and_phase_slope() {
    let thetas = [
        PI / 6.0,
        PI / 4.0,
        PI / 3.0,
        FRAC_PI_2,
        2.0 * PI / 3.0,
        5.0 * PI / 6.0,
    ];
    for (model, name) in models() {
        let pinned = pin_constant(&model).unwrap();
        let mut points = Vec::new();
        for &theta0 in &thetas {
            let lp = ParameterLoop::latitude(theta0, 0.1, 1.0).unwrap();
            let area = lp.solid_angle(20_000).unwrap();
            let oracle = wilson_line_holonomy(&model, &lp, 20_000).unwrap();
            let raw = extract_gate_phase(model.kind, &oracle).unwrap();
            points.push((area, unwrap_phase(raw, pinned.c * area, TAU)));
        }
        let (slope, r_squared, max_residual) = fit_proportional(&points);
        assert!(
            (slope - pinned.c).abs() < 1e-4,
            "{name}: slope {slope} vs pinned c {}",
            pinned.c
        );
        assert!(r_squared > 0.9999, "{name}: r^2 = {r_squared}");
        assert!(
            max_residual < 1e-3,
            "{name}: residual {max_residual:.3e} rad"
        );
        println!(
            "criterion 02 oracle pinning ({name}): PASS (c = {}, slope = {slope:.9}, r^2 = {r_squared:.9}, max residual = {max_residual:.3e} rad)",
            pinned.c
        );
    }
}

#[test]
fn criterion_03_adiabatic_convergence_to_oracle() {
    for (model, name) in models() {
        let lp = ParameterLoop::latitude(PI / 3.0, 0.1, 1.0).unwrap();
        let (t, steps) = run_params(&model, 2000.0);
        let sim = simulate_holonomy(&model, &lp, t, steps).unwrap();
        let oracle = wilson_line_holonomy(&model, &lp, 20_000).unwrap();
        let fidelity = gate_fidelity(&sim.renormalized(), &oracle).unwrap();
        assert!(fidelity >= 0.999, "{name}: fidelity {fidelity}");
        // The simulated holonomy must also match the closed-form gate at the
        // oracle-pinned phase c * solid_angle.
        let pinned = pin_constant(&model).unwrap();
        let area = lp.solid_angle(20_000).unwrap();
        let analytic = holonomy::gates::analytic_gate(model.kind, pinned.c * area).matrix;
        let analytic_fidelity = gate_fidelity(&sim.renormalized(), &analytic).unwrap();
        assert!(
            analytic_fidelity >= 0.999,
            "{name}: fidelity to analytic target {analytic_fidelity}"
        );
        println!(
            "criterion 03 adiabatic convergence ({name}): PASS (fidelity to oracle = {fidelity:.9}, to analytic c*area gate = {analytic_fidelity:.9} at gap*T = 2000)"
        );
    }
}

#[test]
fn criterion_04_leakage_scaling_exponent() {
    for (model, name) in [(GateModel::u1(), "u1"), (GateModel::u2(), "u2")] {
        let lp = ParameterLoop::latitude(FRAC_PI_2, 0.1, 1.0).unwrap();
        let omega_t_list = [2000.0, 3170.0, 5024.0, 7962.0, 12619.0, 20000.0];
        let mut table = Vec::new();
        for &omega_t in &omega_t_list {
            let (t, steps) = run_params(&model, omega_t);
            let sim = simulate_holonomy(&model, &lp, t, steps).unwrap();
            table.push((t, sim.leakage));
        }
        let fit = fit_scaling_exponent(&table).unwrap();
        assert!(
            (-2.3..=-1.7).contains(&fit.exponent),
            "{name}: exponent {} outside [-2.3, -1.7]",
            fit.exponent
        );
        println!(
            "criterion 04 leakage scaling ({name}): PASS (exponent = {:.4}, r^2 = {:.6})",
            fit.exponent, fit.r_squared
        );
    }
}

#[test]
fn criterion_05_path_independence() {
    // A latitude loop and a lune (sector) of equal cap area, pi steradians.
    let latitude = ParameterLoop::latitude(PI / 3.0, 0.1, 1.0).unwrap();
    let theta_max = 2.0 * PI / 3.0;
    let span = PI / (1.0 - theta_max.cos());
    let lune = ParameterLoop::sector(theta_max, span, 0.12, 1.0).unwrap();
    let area_a = latitude.solid_angle(40_000).unwrap();
    let area_b = lune.solid_angle(40_000).unwrap();
    assert!((area_a - area_b).abs() < 1e-8, "loop areas differ");

    for (model, name) in models() {
        let oracle_a = wilson_line_holonomy(&model, &latitude, 40_000).unwrap();
        let oracle_b = wilson_line_holonomy(&model, &lune, 40_000).unwrap();
        let phase_a = extract_gate_phase(model.kind, &oracle_a).unwrap();
        let phase_b = extract_gate_phase(model.kind, &oracle_b).unwrap();
        let oracle_gap = (phase_a - unwrap_phase(phase_b, phase_a, TAU)).abs();
        assert!(
            oracle_gap < 1e-5,
            "{name}: oracle phases differ by {oracle_gap:.3e}"
        );

        let (t, steps) = run_params(&model, 2000.0);
        let sim_a = simulate_holonomy(&model, &latitude, t, steps).unwrap();
        let sim_b = simulate_holonomy(&model, &lune, t, steps).unwrap();
        let sp_a = extract_gate_phase(model.kind, &sim_a.renormalized()).unwrap();
        let sp_b = extract_gate_phase(model.kind, &sim_b.renormalized()).unwrap();
        let sim_gap = (sp_a - unwrap_phase(sp_b, sp_a, TAU)).abs();
        assert!(
            sim_gap < 1e-3,
            "{name}: simulated phases differ by {sim_gap:.3e}"
        );
        println!(
            "criterion 05 path independence ({name}): PASS (oracle gap = {oracle_gap:.3e} rad, simulated gap = {sim_gap:.3e} rad)"
        );
    }
}

#[test]
fn criterion_06_u3_decoupled_states() {
    let model = GateModel::u3(0.1, 0.01);
    let lp = ParameterLoop::latitude(PI / 3.0, 0.1, 1.0).unwrap();
    let mut worst_phase = 0.0f64;
    let mut worst_population = 0.0f64;
    for omega_t in [200.0, 2000.0] {
        let (t, steps) = run_params(&model, omega_t);
        let prop = adiabatic_propagate(&model, &lp, t, steps).unwrap();
        for index in [0usize, 1, 4] {
            let state = QuantumState::basis_state(Basis::TwoIon, index);
            let out = prop.matrix.apply(&state).unwrap();
            let amp = out.amplitude(index);
            let phase = amp.arg().abs();
            let population_change = (1.0 - amp.norm_sqr()).abs();
            assert!(phase < 1e-6, "phase {phase:.3e} on decoupled state {index}");
            assert!(
                population_change < 1e-10,
                "population change {population_change:.3e} on state {index}"
            );
            worst_phase = worst_phase.max(phase);
            worst_population = worst_population.max(population_change);
        }
    }
    println!(
        "criterion 06 decoupling: PASS (max phase = {worst_phase:.3e} rad, max population change = {worst_population:.3e})"
    );
}

#[test]
fn criterion_07_nonabelian_composites() {
    let witness = noncommutativity_witness(FRAC_PI_2, FRAC_PI_2);
    assert!(witness > 0.1, "analytic commutator norm {witness}");

    let pinned_u1 = pin_constant(&GateModel::u1()).unwrap();
    let pinned_u2 = pin_constant(&GateModel::u2()).unwrap();
    let s1 = simulate_gate_matrix(&GateModel::u1(), FRAC_PI_2, &pinned_u1, 2000.0, 10.0).unwrap();
    let s2 = simulate_gate_matrix(&GateModel::u2(), FRAC_PI_2, &pinned_u2, 2000.0, 10.0).unwrap();
    let ab = s1.matmul(&s2).unwrap();
    let ba = s2.matmul(&s1).unwrap();
    let diff = ab.entries() - ba.entries();
    let simulated_norm = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mismatch = 1.0 - gate_fidelity(&ab, &ba).unwrap();
    assert!(
        simulated_norm > 0.1,
        "simulated commutator norm {simulated_norm}"
    );
    assert!(mismatch > 0.01, "composite fidelity mismatch {mismatch}");
    println!(
        "criterion 07 non-abelianness: PASS (analytic ||[U1,U2]||_F = {witness:.4}, simulated = {simulated_norm:.4}, order mismatch = {mismatch:.4})"
    );
}

#[test]
fn criterion_08_universality() {
    // 100 seeded Haar-random targets synthesized from U1/U2.
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut min_fidelity = f64::INFINITY;
    for _ in 0..100 {
        let target = haar_random_su2(&mut rng);
        let seq = synthesize_single_qubit(&target, 1e-9).unwrap();
        let fidelity = gate_fidelity(&compose_single_qubit(&seq), &target).unwrap();
        min_fidelity = min_fidelity.min(fidelity);
    }
    assert!(
        min_fidelity > 1.0 - 1e-9,
        "synthesis fidelity {min_fidelity}"
    );

    let circuit = controlled_not_construction().unwrap();
    let analytic = holonomy::gates::circuit_unitary(&circuit).unwrap();
    let analytic_fidelity = gate_fidelity(&analytic, &cnot_matrix()).unwrap();
    assert!(
        analytic_fidelity > 1.0 - 1e-9,
        "analytic CNOT fidelity {analytic_fidelity}"
    );

    // The same circuit with every gate replaced by its simulated holonomy.
    let pins = [
        pin_constant(&GateModel::u1()).unwrap(),
        pin_constant(&GateModel::u2()).unwrap(),
        pin_constant(&GateModel::u3(0.1, 0.01)).unwrap(),
    ];
    let simulated = circuit_unitary_with(&circuit, |op| {
        let (model, pinned) = match op.kind {
            GateKind::U1 => (GateModel::u1(), pins[0]),
            GateKind::U2 => (GateModel::u2(), pins[1]),
            GateKind::U3 => (GateModel::u3(0.1, 0.01), pins[2]),
        };
        simulate_gate_matrix(&model, op.phase, &pinned, 2000.0, 10.0)
            .map_err(|e| holonomy::gates::GateError::Numerical(e.to_string()))
    })
    .unwrap();
    let simulated_fidelity = gate_fidelity(&simulated, &cnot_matrix()).unwrap();
    assert!(
        simulated_fidelity > 0.99,
        "simulated CNOT fidelity {simulated_fidelity}"
    );
    println!(
        "criterion 08 universality: PASS (min synthesis fidelity = {:.3e} below 1, analytic CNOT = {:.3e} below 1, simulated CNOT fidelity = {simulated_fidelity:.6})",
        1.0 - min_fidelity,
        1.0 - analytic_fidelity
    );
}

#[test]
fn criterion_09_noise_budget_plugins_and_homogeneity() {
    // Hand-computed plug-in values, evaluated independently here.
    let omega = TAU * 1e6;
    let eta = 0.1;
    let delta = TAU * 1e5;
    let gamma_s = TAU * 1e7;
    let gamma_h = 1e3;
    let t_gate = 1e-4;
    let budget = NoiseBudget::new(
        omega,
        eta,
        delta,
        gamma_s,
        gamma_h,
        t_gate,
        GateClass::TwoBit,
    )
    .unwrap();

    let expected_gap = eta * eta * omega * omega / delta;
    let expected_leakage = 1.0 / (expected_gap * t_gate).powi(2);
    let expected_spontaneous = gamma_s / (expected_gap * expected_gap * t_gate);
    let expected_heating_rate = gamma_h * eta * eta * omega * omega / (delta * delta);
    let expected_ratio = expected_heating_rate / expected_gap;

    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(energy_gap(&budget), expected_gap) < 1e-12);
    assert!(rel(leakage_estimate(&budget).unwrap(), expected_leakage) < 1e-12);
    assert!(
        rel(
            spontaneous_emission_budget(&budget).unwrap(),
            expected_spontaneous
        ) < 1e-12
    );
    let heating = heating_budget(&budget).unwrap();
    assert!(rel(heating.effective_rate, expected_heating_rate) < 1e-12);
    assert!(rel(heating.condition_ratio, expected_ratio) < 1e-12);

    // Homogeneity: common rescaling of (Omega, delta, gamma, 1/t) leaves
    // every dimensionless budget unchanged.
    for lambda in [2.0, 8.0, 0.25] {
        let scaled = NoiseBudget::new(
            omega * lambda,
            eta,
            delta * lambda,
            gamma_s * lambda,
            gamma_h * lambda,
            t_gate / lambda,
            GateClass::TwoBit,
        )
        .unwrap();
        assert!(
            rel(
                leakage_estimate(&scaled).unwrap(),
                leakage_estimate(&budget).unwrap()
            ) < 1e-12
        );
        assert!(
            rel(
                spontaneous_emission_budget(&scaled).unwrap(),
                spontaneous_emission_budget(&budget).unwrap()
            ) < 1e-12
        );
        assert!(
            rel(
                heating_budget(&scaled).unwrap().condition_ratio,
                heating_budget(&budget).unwrap().condition_ratio
            ) < 1e-12
        );
    }
    println!(
        "criterion 09 noise budgets: PASS (plug-ins match hand values to 1e-12 relative; homogeneous under rescaling)"
    );
}

#[test]
fn criterion_10_byte_reproducibility() {
    let binary = env!("CARGO_BIN_EXE_holonomy");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = || {
        let status = Command::new(binary)
            .args([
                "circuit",
                "--omega-t",
                "300",
                "--n-haar-targets",
                "10",
                "--seed",
                "7",
                "--output-dir",
            ])
            .arg(&out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "run failed");
        (
            std::fs::read(out.join("circuit.json")).unwrap(),
            std::fs::read(out.join("metadata.json")).unwrap(),
        )
    };
    let (results_a, metadata_a) = run();
    std::fs::remove_dir_all(&out).unwrap();
    let (results_b, metadata_b) = run();
    assert_eq!(
        results_a, results_b,
        "result files differ between identical runs"
    );
    assert_eq!(
        metadata_a, metadata_b,
        "metadata differs between identical runs"
    );
    println!(
        "criterion 10 reproducibility: PASS (identical config+seed byte-reproduces {} + {} bytes)",
        results_a.len(),
        metadata_a.len()
    );
}
