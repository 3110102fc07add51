//! The experiment executors: each takes a validated config, runs the
//! simulation pipeline, and writes its result files plus a metadata echo.

use crate::config::{Experiment, RunConfig};
use crate::output::{
    ensure_output_dir, fmt, plot_sweep_svg, write_csv, write_json, write_metadata,
};
use anyhow::{anyhow, Context, Result};
use holonomy::evolve::{
    adiabatic_convergence_sweep, pin_constant, simulate_gate_matrix, simulate_holonomy,
    wilson_line_holonomy, EvolveError, PinnedConstant,
};
use holonomy::gates::{
    analytic_gate, circuit_unitary, circuit_unitary_with, cnot_matrix, controlled_not_construction,
    extract_gate_phase, gate_fidelity, haar_random_su2, noncommutativity_witness,
    phase_optimal_distance, synthesize_single_qubit,
};
use holonomy::model::{GateKind, GateModel};
use holonomy::noise::{budget_report, fit_scaling_exponent};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Distinguishes bad configuration (exit 2) from numerical failures during a
/// run (exit 3).
#[derive(Debug)]
pub enum RunError {
    Validation(Vec<String>),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Other(e)
    }
}

pub fn execute(config: &RunConfig) -> Result<(), RunError> {
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(RunError::Validation(errors));
    }
    let result = match config.experiment {
        Experiment::SimulateGate => simulate_gate(config),
        Experiment::SweepAdiabaticity => sweep_adiabaticity(config),
        Experiment::HolonomyCompare => holonomy_compare(config),
        Experiment::NoiseBudget => noise_budget(config),
        Experiment::Circuit => circuit(config),
        Experiment::NonabelianDemo => nonabelian_demo(config),
    };
    result.map_err(RunError::Other)
}

fn pin_all() -> Result<BTreeMap<&'static str, PinnedConstant>> {
    let mut pinned = BTreeMap::new();
    pinned.insert("u1", pin_constant(&GateModel::u1()).map_err(numerical)?);
    pinned.insert("u2", pin_constant(&GateModel::u2()).map_err(numerical)?);
    pinned.insert(
        "u3",
        pin_constant(&GateModel::u3(0.1, 0.01)).map_err(numerical)?,
    );
    Ok(pinned)
}

fn pinned_for(kind: GateKind, pinned: &BTreeMap<&'static str, PinnedConstant>) -> PinnedConstant {
    match kind {
        GateKind::U1 => pinned["u1"],
        GateKind::U2 => pinned["u2"],
        GateKind::U3 => pinned["u3"],
    }
}

/// Library numerical failures surface as exit-code-3 errors with the loop
/// position preserved in the message.
fn numerical(e: EvolveError) -> anyhow::Error {
    anyhow!("numerical failure: {e}")
}

fn simulate_gate(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let pinned = pin_all()?;
    let model = config.gate_model();
    let lp = config.loop_section.build().map_err(|e| anyhow!(e))?;
    let solid_angle = lp.solid_angle(20_000).map_err(|e| anyhow!("{e}"))?;
    let omega_t = config.timing.omega_t;
    let total_time = omega_t / model.gap_scale(lp.omega_scale());
    let steps = config.timing.steps_for(omega_t);
    let sim = simulate_holonomy(&model, &lp, total_time, steps).map_err(numerical)?;
    let extracted_phase =
        extract_gate_phase(model.kind, &sim.renormalized()).map_err(|e| anyhow!("{e}"))?;
    let oracle =
        wilson_line_holonomy(&model, &lp, config.timing.oracle_steps).map_err(numerical)?;
    let oracle_phase = extract_gate_phase(model.kind, &oracle).map_err(|e| anyhow!("{e}"))?;
    write_csv(
        &dir.join("simulate_gate.csv"),
        &hash,
        &["solid_angle", "extracted_phase", "leakage", "oracle_phase"],
        &[vec![
            fmt(solid_angle),
            fmt(extracted_phase),
            fmt(sim.leakage),
            fmt(oracle_phase),
        ]],
    )?;
    write_metadata(&dir, config, pinned)
}

#[derive(Serialize)]
struct SweepSummary {
    config_sha256: String,
    exponent: f64,
    r_squared: f64,
    points_used: usize,
    points_excluded: usize,
    leakage_monotone: bool,
    /// Mean of leakage * (gap T)^2: the measured coefficient of the
    /// 1/(gap T)^2 law.
    measured_coefficient: f64,
}

fn sweep_adiabaticity(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let pinned = pin_all()?;
    let model = config.gate_model();
    let lp = config.loop_section.build().map_err(|e| anyhow!(e))?;
    let gap = model.gap_scale(lp.omega_scale());
    let t_list: Vec<f64> = config.timing.omega_t_list.iter().map(|x| x / gap).collect();
    let steps_list: Vec<usize> = config
        .timing
        .omega_t_list
        .iter()
        .map(|&x| config.timing.steps_for(x))
        .collect();
    let sweep = adiabatic_convergence_sweep(
        &model,
        &lp,
        &t_list,
        &steps_list,
        config.timing.oracle_steps,
    )
    .map_err(numerical)?;
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.total_time),
                fmt(r.leakage),
                fmt(r.oracle_distance),
                fmt(r.phase),
            ]
        })
        .collect();
    write_csv(
        &dir.join("sweep_adiabaticity.csv"),
        &hash,
        &["t_total", "leakage", "oracle_distance", "phase"],
        &rows,
    )?;
    let table: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .map(|r| (r.total_time, r.leakage))
        .collect();
    let fit = fit_scaling_exponent(&table).context("fitting leakage scaling")?;
    let coefficient = sweep
        .rows
        .iter()
        .map(|r| r.leakage * (gap * r.total_time).powi(2))
        .sum::<f64>()
        / sweep.rows.len() as f64;
    write_json(
        &dir.join("sweep_summary.json"),
        &SweepSummary {
            config_sha256: hash.clone(),
            exponent: fit.exponent,
            r_squared: fit.r_squared,
            points_used: fit.used,
            points_excluded: fit.excluded,
            leakage_monotone: sweep.leakage_monotone,
            measured_coefficient: coefficient,
        },
    )?;
    if config.plot {
        let points: Vec<(f64, f64)> = sweep
            .rows
            .iter()
            .map(|r| (gap * r.total_time, r.leakage))
            .collect();
        plot_sweep_svg(&dir.join("sweep_adiabaticity.svg"), &points)?;
    }
    write_metadata(&dir, config, pinned)
}

#[derive(Serialize)]
struct CompareReport {
    config_sha256: String,
    solid_angle: f64,
    leakage: f64,
    fidelity_simulated_vs_oracle: f64,
    frobenius_distance_simulated_vs_oracle: f64,
    simulated_phase: f64,
    oracle_phase: f64,
    analytic_phase: f64,
    fidelity_simulated_vs_analytic: f64,
    dark_phase_drift_bound: f64,
}

fn holonomy_compare(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let pinned = pin_all()?;
    let model = config.gate_model();
    let lp = config.loop_section.build().map_err(|e| anyhow!(e))?;
    let solid_angle = lp.solid_angle(20_000).map_err(|e| anyhow!("{e}"))?;
    let omega_t = config.timing.omega_t;
    let total_time = omega_t / model.gap_scale(lp.omega_scale());
    let steps = config.timing.steps_for(omega_t);
    let sim = simulate_holonomy(&model, &lp, total_time, steps).map_err(numerical)?;
    let oracle =
        wilson_line_holonomy(&model, &lp, config.timing.oracle_steps).map_err(numerical)?;
    let renormalized = sim.renormalized();
    let c = pinned_for(model.kind, &pinned).c;
    let analytic = analytic_gate(model.kind, c * solid_angle).matrix;
    let drift_bound =
        holonomy::evolve::dark_eigenvalue_bound(&model, &lp, 200).map_err(numerical)? * total_time;
    let report = CompareReport {
        config_sha256: hash,
        solid_angle,
        leakage: sim.leakage,
        fidelity_simulated_vs_oracle: gate_fidelity(&renormalized, &oracle)
            .map_err(|e| anyhow!("{e}"))?,
        frobenius_distance_simulated_vs_oracle: phase_optimal_distance(&renormalized, &oracle)
            .map_err(|e| anyhow!("{e}"))?,
        simulated_phase: extract_gate_phase(model.kind, &renormalized)
            .map_err(|e| anyhow!("{e}"))?,
        oracle_phase: extract_gate_phase(model.kind, &oracle).map_err(|e| anyhow!("{e}"))?,
        analytic_phase: c * solid_angle,
        fidelity_simulated_vs_analytic: gate_fidelity(&renormalized, &analytic)
            .map_err(|e| anyhow!("{e}"))?,
        dark_phase_drift_bound: drift_bound,
    };
    write_json(&dir.join("holonomy_compare.json"), &report)?;
    write_metadata(&dir, config, pinned)
}

fn noise_budget(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let budget = config.noise_budget().map_err(|e| anyhow!("noise: {e}"))?;
    let report = budget_report(&budget, config.noise.thresholds.into())
        .map_err(|e| anyhow!("noise: {e}"))?;
    write_json(
        &dir.join("noise_budget.json"),
        &serde_json::json!({ "config_sha256": hash, "report": report }),
    )?;
    write_metadata(&dir, config, pin_all()?)
}

#[derive(Serialize)]
struct CircuitReport {
    config_sha256: String,
    n_haar_targets: usize,
    seed: u64,
    min_synthesis_fidelity: f64,
    mean_synthesis_fidelity: f64,
    max_sequence_length: usize,
    cnot_circuit: holonomy::gates::Circuit,
    cnot_analytic_fidelity: f64,
    cnot_simulated_fidelity: f64,
    omega_t: f64,
}

fn circuit(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let pinned = pin_all()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut min_fidelity = f64::INFINITY;
    let mut sum_fidelity = 0.0;
    let mut max_len = 0usize;
    for _ in 0..config.phases.n_haar_targets {
        let target = haar_random_su2(&mut rng);
        let seq = synthesize_single_qubit(&target, 1e-9).map_err(|e| anyhow!("{e}"))?;
        max_len = max_len.max(seq.len());
        let fidelity = gate_fidelity(&holonomy::gates::compose_single_qubit(&seq), &target)
            .map_err(|e| anyhow!("{e}"))?;
        min_fidelity = min_fidelity.min(fidelity);
        sum_fidelity += fidelity;
    }
    let cnot_circuit = controlled_not_construction().map_err(|e| anyhow!("{e}"))?;
    let analytic = circuit_unitary(&cnot_circuit).map_err(|e| anyhow!("{e}"))?;
    let cnot_analytic_fidelity =
        gate_fidelity(&analytic, &cnot_matrix()).map_err(|e| anyhow!("{e}"))?;

    // Replace every analytic gate by the holonomy simulated at the
    // configured adiabaticity.
    let omega_t = config.timing.omega_t;
    let steps_per_unit = config.timing.steps_per_unit;
    let eta = config.gate.eta;
    let delta = config.gate.delta;
    let simulated = circuit_unitary_with(&cnot_circuit, |op| {
        let model = match op.kind {
            GateKind::U1 => GateModel::u1(),
            GateKind::U2 => GateModel::u2(),
            GateKind::U3 => GateModel::u3(eta, delta),
        };
        let c = pinned_for(op.kind, &pinned);
        simulate_gate_matrix(&model, op.phase, &c, omega_t, steps_per_unit)
            .map_err(|e| holonomy::gates::GateError::Numerical(e.to_string()))
    })
    .map_err(|e| anyhow!("numerical failure: {e}"))?;
    let cnot_simulated_fidelity =
        gate_fidelity(&simulated, &cnot_matrix()).map_err(|e| anyhow!("{e}"))?;

    write_json(
        &dir.join("circuit.json"),
        &CircuitReport {
            config_sha256: hash,
            n_haar_targets: config.phases.n_haar_targets,
            seed: config.seed,
            min_synthesis_fidelity: min_fidelity,
            mean_synthesis_fidelity: sum_fidelity / config.phases.n_haar_targets as f64,
            max_sequence_length: max_len,
            cnot_circuit,
            cnot_analytic_fidelity,
            cnot_simulated_fidelity,
            omega_t,
        },
    )?;
    write_metadata(&dir, config, pinned)
}

#[derive(Serialize)]
struct NonabelianReport {
    config_sha256: String,
    phi1: f64,
    phi2: f64,
    commutator_norm_analytic: f64,
    fidelity_mismatch_analytic: f64,
    commutator_norm_simulated: f64,
    fidelity_mismatch_simulated: f64,
    omega_t: f64,
}

fn nonabelian_demo(config: &RunConfig) -> Result<()> {
    let dir = ensure_output_dir(config)?;
    let hash = crate::output::config_hash(config);
    let pinned = pin_all()?;
    let phi1 = config.phases.phi1;
    let phi2 = config.phases.phi2;

    let u1 = analytic_gate(GateKind::U1, phi1).matrix;
    let u2 = analytic_gate(GateKind::U2, phi2).matrix;
    let analytic_mismatch = 1.0
        - gate_fidelity(
            &u1.matmul(&u2).map_err(|e| anyhow!("{e}"))?,
            &u2.matmul(&u1).map_err(|e| anyhow!("{e}"))?,
        )
        .map_err(|e| anyhow!("{e}"))?;

    let omega_t = config.timing.omega_t;
    let spu = config.timing.steps_per_unit;
    let s1 = simulate_gate_matrix(&GateModel::u1(), phi1, &pinned["u1"], omega_t, spu)
        .map_err(numerical)?;
    let s2 = simulate_gate_matrix(&GateModel::u2(), phi2, &pinned["u2"], omega_t, spu)
        .map_err(numerical)?;
    let ab = s1.matmul(&s2).map_err(|e| anyhow!("{e}"))?;
    let ba = s2.matmul(&s1).map_err(|e| anyhow!("{e}"))?;
    let diff = ab.entries() - ba.entries();
    let commutator_norm_simulated = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let simulated_mismatch = 1.0 - gate_fidelity(&ab, &ba).map_err(|e| anyhow!("{e}"))?;

    write_json(
        &dir.join("nonabelian_demo.json"),
        &NonabelianReport {
            config_sha256: hash,
            phi1,
            phi2,
            commutator_norm_analytic: noncommutativity_witness(phi1, phi2),
            fidelity_mismatch_analytic: analytic_mismatch,
            commutator_norm_simulated,
            fidelity_mismatch_simulated: simulated_mismatch,
            omega_t,
        },
    )?;
    write_metadata(&dir, config, pinned)
}

/// A compact human-readable summary printed after a successful run.
pub fn describe_outputs(config: &RunConfig) -> String {
    let dir = config.output_dir.display();
    let mut files = vec![format!("{dir}/metadata.json")];
    match config.experiment {
        Experiment::SimulateGate => files.push(format!("{dir}/simulate_gate.csv")),
        Experiment::SweepAdiabaticity => {
            files.push(format!("{dir}/sweep_adiabaticity.csv"));
            files.push(format!("{dir}/sweep_summary.json"));
            if config.plot {
                files.push(format!("{dir}/sweep_adiabaticity.svg"));
            }
        }
        Experiment::HolonomyCompare => files.push(format!("{dir}/holonomy_compare.json")),
        Experiment::NoiseBudget => files.push(format!("{dir}/noise_budget.json")),
        Experiment::Circuit => files.push(format!("{dir}/circuit.json")),
        Experiment::NonabelianDemo => files.push(format!("{dir}/nonabelian_demo.json")),
    }
    files.join("\n")
}
