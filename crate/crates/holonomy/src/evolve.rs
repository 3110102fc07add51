//! Adiabatic propagation around control loops, holonomy extraction on the
//! dark subspace, and a time-independent Wilson-line oracle.
//!
//! Two independent routes compute each gate:
//!
//! * the time-domain route integrates the Schrodinger equation with exact
//!   per-step exponentials of the midpoint-sampled Hamiltonian, then reads
//!   the holonomy off the full propagator;
//! * the Wilson-line route parallel-transports the instantaneous dark basis
//!   around the loop with subspace overlap unitaries. It knows nothing about
//!   time or Rabi magnitudes, only the loop geometry, which makes it the
//!   oracle the simulated gates are checked against.
//!
//! Dark eigenvalues sit at zero, so no dynamical-phase subtraction is
//! performed anywhere; the accumulated |dark eigenvalue| * T is asserted to
//! stay below a microradian instead.

use crate::gates::{extract_gate_phase, phase_optimal_distance};
use crate::linalg::{
    align_columns, columns_to_states, kernel_columns, matrix_exponential_step, polar_unitary,
    states_to_columns, Basis, LinalgError, OperatorMatrix, QuantumState, DEFAULT_NULL_TOL,
};
use crate::loops::{LoopError, ParameterLoop};
use crate::model::{GateKind, GateModel, LoopPoint, ModelError};
use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("dark subspace dimension jumped at s = {s}: expected {expected}, found {found}")]
    SubspaceDimensionJump {
        s: f64,
        expected: usize,
        found: usize,
    },
    #[error("singular dark-subspace overlap at s = {s}: the discretization stepped across a discontinuity")]
    SingularOverlapAt { s: f64 },
    #[error("tracked dark state leaks outside its block at s = {s}: coupling {coupling:.3e}")]
    BlockCouplingAudit { s: f64, coupling: f64 },
    #[error("total time must be positive and finite, got {t}")]
    InvalidTime { t: f64 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("constant pinning failed: {0}")]
    PinningFailed(String),
}

type Result<T> = std::result::Result<T, EvolveError>;

/// Indices of the two-ion states |11>, |aa>, |ee> whose 3x3 block carries
/// the whole U3 dynamics.
const U3_BLOCK: [usize; 3] = [5, 10, 15];

/// The computational-space unitary extracted after a loop, with leakage and
/// phase diagnostics.
#[derive(Debug, Clone)]
pub struct HolonomyResult {
    /// Raw k x k matrix <D_a(0)| U |D_b(0)> on the tracked dark basis; not
    /// renormalized.
    pub holonomy: OperatorMatrix,
    /// 1 - mean over columns of the retained population; in [0, 1].
    pub leakage: f64,
    /// arg of each diagonal entry: phase accumulated by each tracked basis
    /// state.
    pub phase_diagnostics: Vec<f64>,
    /// Physical duration of the run (seconds); zero for Wilson-line results.
    pub total_time: f64,
    pub steps: usize,
}

impl HolonomyResult {
    /// Holonomy with each column scaled back to unit norm; use for fidelity
    /// metrics only, the raw matrix is the measured object.
    pub fn renormalized(&self) -> OperatorMatrix {
        let mut m = self.holonomy.entries().clone();
        for mut col in m.columns_mut() {
            let n = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                col.mapv_inplace(|z| z / n);
            }
        }
        OperatorMatrix::general(m).expect("square")
    }
}

/// Full-space propagator of one adiabatic traversal plus step diagnostics.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub matrix: OperatorMatrix,
    /// Largest ||H|| * dt over the run; above ~0.1 the step resolution is
    /// questionable.
    pub max_step_phase: f64,
    pub steps: usize,
    pub total_time: f64,
}

impl Propagation {
    /// Advisory, not an error: convergence studies legitimately run with
    /// coarse steps.
    pub fn step_size_warning(&self) -> Option<String> {
        (self.max_step_phase >= 0.1).then(|| {
            format!(
                "step resolution marginal: max ||H||*dt = {:.3} >= 0.1; increase steps",
                self.max_step_phase
            )
        })
    }
}

/// The computational reference basis the holonomy is expressed in:
/// {|0>, |1>} for the single-bit gates, {|00>, |01>, |10>, |11>} for U3.
pub fn computational_reference(model: &GateModel) -> Vec<QuantumState> {
    match model.kind {
        GateKind::U1 | GateKind::U2 => vec![
            QuantumState::basis_state(Basis::SingleIon, 0),
            QuantumState::basis_state(Basis::SingleIon, 1),
        ],
        GateKind::U3 => vec![
            QuantumState::basis_state(Basis::TwoIon, Basis::product_index(0, 0)),
            QuantumState::basis_state(Basis::TwoIon, Basis::product_index(0, 1)),
            QuantumState::basis_state(Basis::TwoIon, Basis::product_index(1, 0)),
            QuantumState::basis_state(Basis::TwoIon, Basis::product_index(1, 1)),
        ],
    }
}

/// Tracked dark basis at a loop point, aligned to `reference` columns.
///
/// U1/U2 track the full 2-dimensional kernel of the 4x4 Hamiltonian. U3
/// tracks the kernel of the {|11>, |aa>, |ee>} block together with the three
/// exactly decoupled computational states; every call audits that the block
/// does not couple to the other 13 dimensions.
fn tracked_dark_columns(
    model: &GateModel,
    point: &LoopPoint,
    reference: &Array2<C64>,
    s: f64,
) -> Result<Array2<C64>> {
    let h = model.hamiltonian(point)?;
    match model.kind {
        GateKind::U1 | GateKind::U2 => {
            let kernel = kernel_columns(h.entries(), DEFAULT_NULL_TOL)?;
            if kernel.ncols() != 2 {
                return Err(EvolveError::SubspaceDimensionJump {
                    s,
                    expected: 2,
                    found: kernel.ncols(),
                });
            }
            align_columns(&kernel, reference).map_err(|e| match e {
                LinalgError::SingularOverlap { .. } => EvolveError::SingularOverlapAt { s },
                other => other.into(),
            })
        }
        GateKind::U3 => {
            audit_u3_block(&h, s)?;
            let mut block = Array2::zeros((3, 3));
            for (bi, &i) in U3_BLOCK.iter().enumerate() {
                for (bj, &j) in U3_BLOCK.iter().enumerate() {
                    block[(bi, bj)] = h.entry(i, j);
                }
            }
            let block_kernel = kernel_columns(&block, DEFAULT_NULL_TOL)?;
            if block_kernel.ncols() != 1 {
                return Err(EvolveError::SubspaceDimensionJump {
                    s,
                    expected: 1,
                    found: block_kernel.ncols(),
                });
            }
            let mut cols: Array2<C64> = Array2::zeros((16, 4));
            cols[(Basis::product_index(0, 0), 0)] = C64::new(1.0, 0.0);
            cols[(Basis::product_index(0, 1), 1)] = C64::new(1.0, 0.0);
            cols[(Basis::product_index(1, 0), 2)] = C64::new(1.0, 0.0);
            for (bi, &i) in U3_BLOCK.iter().enumerate() {
                cols[(i, 3)] = block_kernel[(bi, 0)];
            }
            align_columns(&cols, reference).map_err(|e| match e {
                LinalgError::SingularOverlap { .. } => EvolveError::SingularOverlapAt { s },
                other => other.into(),
            })
        }
    }
}

/// Verify the {|11>, |aa>, |ee>} block of a two-ion Hamiltonian really is
/// decoupled from the other 13 product states.
fn audit_u3_block(h: &OperatorMatrix, s: f64) -> Result<()> {
    let scale = h.max_abs().max(1e-300);
    let mut worst = 0.0f64;
    for &col in &U3_BLOCK {
        for row in 0..16 {
            if !U3_BLOCK.contains(&row) {
                worst = worst.max(h.entry(row, col).norm());
            }
        }
    }
    if worst > 1e-12 * scale {
        return Err(EvolveError::BlockCouplingAudit { s, coupling: worst });
    }
    Ok(())
}

/// Largest |eigenvalue| found inside the tracked dark space over `samples`
/// loop points. Multiplied by the traversal time it bounds the spurious
/// dynamical phase the dark space can accumulate; the zero-eigenvalue design
/// keeps it at rounding scale.
pub fn dark_eigenvalue_bound(
    model: &GateModel,
    control_loop: &ParameterLoop,
    samples: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..=samples {
        let point = control_loop.point(k as f64 / samples as f64);
        let h = model.hamiltonian(&point)?;
        let entries = match model.kind {
            GateKind::U1 | GateKind::U2 => h.entries().clone(),
            GateKind::U3 => {
                let mut block = Array2::zeros((3, 3));
                for (bi, &i) in U3_BLOCK.iter().enumerate() {
                    for (bj, &j) in U3_BLOCK.iter().enumerate() {
                        block[(bi, bj)] = h.entry(i, j);
                    }
                }
                block
            }
        };
        let (vals, _) = crate::linalg::eigh_checked(&entries)?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in vals.iter() {
            if v.abs() <= DEFAULT_NULL_TOL * scale {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Public variant returning states; mainly for tests and diagnostics.
pub fn dark_basis_at(model: &GateModel, point: &LoopPoint) -> Result<Vec<QuantumState>> {
    let reference = states_to_columns(&computational_reference(model));
    let cols = tracked_dark_columns(model, point, &reference, f64::NAN)?;
    Ok(columns_to_states(&cols, model.basis())?)
}

/// Time-ordered product of exact step exponentials of the midpoint-sampled
/// Hamiltonian around the loop: one traversal of duration `total_time` in
/// `steps` slices. Unitary to machine precision regardless of step size.
pub fn adiabatic_propagate(
    model: &GateModel,
    control_loop: &ParameterLoop,
    total_time: f64,
    steps: usize,
) -> Result<Propagation> {
    if total_time <= 0.0 || !total_time.is_finite() {
        return Err(EvolveError::InvalidTime { t: total_time });
    }
    if steps < 2 {
        return Err(EvolveError::InvalidSweep(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let dim = model.basis().dim();
    let dt = total_time / steps as f64;
    let mut u: Array2<C64> = Array2::eye(dim);
    let mut max_step_phase = 0.0f64;
    for k in 0..steps {
        let s_mid = (k as f64 + 0.5) / steps as f64;
        let h = model.hamiltonian(&control_loop.point(s_mid))?;
        max_step_phase = max_step_phase.max(h.max_abs() * dt);
        let step = matrix_exponential_step(&h, dt)?;
        u = step.entries().dot(&u);
    }
    Ok(Propagation {
        matrix: OperatorMatrix::general(u)?,
        max_step_phase,
        steps,
        total_time,
    })
}

/// Discrete path-ordered product of dark-subspace overlap unitaries around
/// the loop, expressed in the computational reference basis at s = 0.
///
/// Independent of the total time and of the Rabi magnitude: only the loop
/// geometry enters. Exactly unitary; converges O(1/n^2) to the continuum
/// holonomy for smooth loops.
pub fn wilson_line_holonomy(
    model: &GateModel,
    control_loop: &ParameterLoop,
    steps: usize,
) -> Result<OperatorMatrix> {
    if steps < 2 {
        return Err(EvolveError::InvalidSweep(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let reference = states_to_columns(&computational_reference(model));
    let start = tracked_dark_columns(model, &control_loop.point(0.0), &reference, 0.0)?;
    // Parallel transport: each new dark basis is gauge-aligned to the
    // previous one, which removes eigensolver phase and ordering noise.
    let mut transported = start.clone();
    for k in 1..steps {
        let s = k as f64 / steps as f64;
        transported = tracked_dark_columns(model, &control_loop.point(s), &transported, s)?;
    }
    // Close the loop against the very same columns used at s = 0; the
    // holonomy is the polar factor of the closure overlap.
    let closure = start.t().mapv(|z| z.conj()).dot(&transported);
    let (w, min_singular) = polar_unitary(&closure)?;
    if min_singular < crate::linalg::MIN_OVERLAP_SINGULAR_VALUE {
        return Err(EvolveError::SingularOverlapAt { s: 1.0 });
    }
    Ok(OperatorMatrix::general(w)?)
}

/// holonomy[a][b] = <D_a(0)| propagator |D_b(0)> plus leakage and per-state
/// phase diagnostics.
pub fn extract_holonomy(
    propagator: &OperatorMatrix,
    dark_basis_at_start: &[QuantumState],
) -> Result<HolonomyResult> {
    let cols = states_to_columns(dark_basis_at_start);
    if propagator.dim() != cols.nrows() {
        return Err(EvolveError::Linalg(LinalgError::DimensionMismatch {
            expected: cols.nrows(),
            got: propagator.dim(),
        }));
    }
    let k = cols.ncols();
    let propagated = propagator.entries().dot(&cols);
    let holonomy = cols.t().mapv(|z| z.conj()).dot(&propagated);
    let mut retained = 0.0;
    for b in 0..k {
        retained += holonomy
            .slice(s![.., b])
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>();
    }
    let leakage = (1.0 - retained / k as f64).clamp(0.0, 1.0);
    let phase_diagnostics = (0..k).map(|a| holonomy[(a, a)].arg()).collect();
    Ok(HolonomyResult {
        holonomy: OperatorMatrix::general(holonomy)?,
        leakage,
        phase_diagnostics,
        total_time: 0.0,
        steps: 0,
    })
}

/// One adiabatic traversal followed by holonomy extraction on the
/// computational reference basis.
pub fn simulate_holonomy(
    model: &GateModel,
    control_loop: &ParameterLoop,
    total_time: f64,
    steps: usize,
) -> Result<HolonomyResult> {
    let propagation = adiabatic_propagate(model, control_loop, total_time, steps)?;
    let reference = computational_reference(model);
    let mut result = extract_holonomy(&propagation.matrix, &reference)?;
    result.total_time = total_time;
    result.steps = steps;
    Ok(result)
}

/// One row of an adiabaticity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Total traversal time (seconds).
    pub total_time: f64,
    /// Dark-space population loss after the loop.
    pub leakage: f64,
    /// Frobenius distance (optimal global phase) between the renormalized
    /// simulated holonomy and the Wilson-line oracle.
    pub oracle_distance: f64,
    /// Gate phase extracted from the simulated holonomy.
    pub phase: f64,
}

/// Result of sweeping the traversal time at fixed loop geometry.
#[derive(Debug, Clone)]
pub struct ConvergenceSweep {
    pub rows: Vec<SweepRow>,
    /// Advisory: whether leakage decreased monotonically along the sweep.
    pub leakage_monotone: bool,
}

/// Propagate the same loop at each time in `t_list` (entry k using
/// `steps_list[k]` slices) and compare against the Wilson-line oracle
/// computed once with `oracle_steps`. Runs are independent and execute in
/// parallel.
pub fn adiabatic_convergence_sweep(
    model: &GateModel,
    control_loop: &ParameterLoop,
    t_list: &[f64],
    steps_list: &[usize],
    oracle_steps: usize,
) -> Result<ConvergenceSweep> {
    if t_list.len() < 4 {
        return Err(EvolveError::InvalidSweep(format!(
            "need at least 4 sweep times, got {}",
            t_list.len()
        )));
    }
    if t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvolveError::InvalidSweep("t_list must be ascending".into()));
    }
    if t_list.len() != steps_list.len() {
        return Err(EvolveError::InvalidSweep(format!(
            "t_list has {} entries but steps_list has {}",
            t_list.len(),
            steps_list.len()
        )));
    }
    let oracle = wilson_line_holonomy(model, control_loop, oracle_steps)?;
    let rows: Result<Vec<SweepRow>> = t_list
        .par_iter()
        .zip(steps_list.par_iter())
        .map(|(&t, &steps)| {
            let result = simulate_holonomy(model, control_loop, t, steps)?;
            let distance = phase_optimal_distance(&result.renormalized(), &oracle)
                .map_err(|e| EvolveError::InvalidSweep(e.to_string()))?;
            let phase = extract_gate_phase(model.kind, &result.renormalized())
                .map_err(|e| EvolveError::InvalidSweep(e.to_string()))?;
            Ok(SweepRow {
                total_time: t,
                leakage: result.leakage,
                oracle_distance: distance,
                phase,
            })
        })
        .collect();
    let rows = rows?;
    let leakage_monotone = rows.windows(2).all(|w| w[1].leakage <= w[0].leakage);
    Ok(ConvergenceSweep {
        rows,
        leakage_monotone,
    })
}

/// The oracle-pinned proportionality between gate phase and enclosed solid
/// angle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PinnedConstant {
    /// phase = c * solid_angle for counterclockwise loops.
    pub c: f64,
    /// Largest deviation (rad) of the pinning data from the snapped model.
    pub residual: f64,
}

/// Candidate readings for the phase/solid-angle ratio.
const PIN_CANDIDATES: [f64; 4] = [1.0, -1.0, 0.5, -0.5];

/// Pin the constant c in phase = c * solid-angle for a gate kind by running
/// the Wilson-line oracle on two small latitude loops (small enough that no
/// phase wrapping can occur) and snapping the measured ratio to the nearest
/// candidate in {+-1, +-1/2}. This runs before any acceptance threshold is
/// evaluated; the artifact records c rather than assuming a reading.
pub fn pin_constant(model: &GateModel) -> Result<PinnedConstant> {
    pin_constant_with(model, &[0.4, 0.7], 4000)
}

/// [`pin_constant`] with explicit probe latitudes and oracle resolution.
pub fn pin_constant_with(
    model: &GateModel,
    probe_thetas: &[f64],
    steps: usize,
) -> Result<PinnedConstant> {
    let mut ratios = Vec::with_capacity(probe_thetas.len());
    for &theta0 in probe_thetas {
        let lp = ParameterLoop::latitude(theta0, 0.1, 1.0)?;
        let area = lp.solid_angle(20_000)?;
        let oracle = wilson_line_holonomy(model, &lp, steps)?;
        let phase = extract_gate_phase(model.kind, &oracle)
            .map_err(|e| EvolveError::PinningFailed(e.to_string()))?;
        ratios.push((phase / area, area, phase));
    }
    let mean_ratio = ratios.iter().map(|r| r.0).sum::<f64>() / ratios.len() as f64;
    let c = PIN_CANDIDATES
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - mean_ratio)
                .abs()
                .partial_cmp(&(b - mean_ratio).abs())
                .unwrap()
        })
        .unwrap();
    let residual = ratios
        .iter()
        .map(|(_, area, phase)| (phase - c * area).abs())
        .fold(0.0, f64::max);
    if residual > 1e-3 {
        return Err(EvolveError::PinningFailed(format!(
            "no candidate constant fits: best c = {c}, residual = {residual:.3e} rad"
        )));
    }
    Ok(PinnedConstant { c, residual })
}

/// A latitude loop realizing a requested gate phase under the pinned
/// constant, choosing the traversal orientation that keeps the loop below
/// the equator of the control sphere.
pub fn loop_for_phase(
    phase: f64,
    pinned: &PinnedConstant,
    ramp_fraction: f64,
    omega_scale: f64,
) -> Result<ParameterLoop> {
    use std::f64::consts::{PI, TAU};
    let mut principal = phase.rem_euclid(TAU);
    if principal > PI {
        principal -= TAU;
    }
    if principal.abs() < 1e-12 {
        // Identity gate: a degenerate but valid tiny loop.
        return Ok(ParameterLoop::latitude(1e-6, ramp_fraction, omega_scale)?);
    }
    // phase = c * area with signed area; realize |area| <= 2 pi and flip the
    // traversal direction instead of using caps past the equator.
    let signed_area = principal / pinned.c;
    let theta0 = (1.0 - signed_area.abs() / TAU).acos();
    let lp = ParameterLoop::latitude(theta0, ramp_fraction, omega_scale)?;
    if signed_area < 0.0 {
        Ok(lp.reversed()?)
    } else {
        Ok(lp)
    }
}

/// Simulate the gate that realizes `phase` under the pinned constant and
/// return its renormalized computational-space matrix. `adiabaticity` is
/// the dimensionless product of gap scale and traversal time;
/// `steps_per_unit` slices per unit of it resolve the fast scale.
pub fn simulate_gate_matrix(
    model: &GateModel,
    phase: f64,
    pinned: &PinnedConstant,
    adiabaticity: f64,
    steps_per_unit: f64,
) -> Result<OperatorMatrix> {
    let lp = loop_for_phase(phase, pinned, 0.1, 1.0)?;
    let gap = model.gap_scale(lp.omega_scale());
    let total_time = adiabaticity / gap;
    let steps = (steps_per_unit * adiabaticity).ceil().max(100.0) as usize;
    let result = simulate_holonomy(model, &lp, total_time, steps)?;
    Ok(result.renormalized())
}
