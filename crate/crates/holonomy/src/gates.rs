//! Analytic gate targets, fidelity metrics, non-commutativity checks and
//! universal circuit synthesis from the holonomic primitives.
//!
//! The primitive set is U1(phi) = diag(1, e^{i phi}), U2(phi) =
//! e^{i phi sigma_y} and the two-bit U3(phi) = diag(1, 1, 1, e^{i phi}).
//! U1 and U3 are physically meaningful only through the relative phase they
//! put on |1> and |11>; every fidelity here is therefore global-phase
//! insensitive but relative-phase sensitive.

use crate::linalg::{polar_unitary, OperatorMatrix};
use crate::model::GateKind;
use ndarray::linalg::kron;
use ndarray::{array, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("dimension mismatch: {a}x{a} vs {b}x{b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("target is not unitary: max |U^dag U - I| = {defect:.3e}")]
    NonUnitaryTarget { defect: f64 },
    #[error("expected a {expected}x{expected} matrix for {kind}, got {got}x{got}")]
    WrongGateDimension {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

type Result<T> = std::result::Result<T, GateError>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// An analytic gate: its kind, phase parameter and explicit matrix on the
/// computational basis.
#[derive(Debug, Clone)]
pub struct GateTarget {
    pub kind: GateKind,
    pub phase: f64,
    pub matrix: OperatorMatrix,
}

/// The closed-form gate matrix for a kind and phase.
///
/// U2 uses sigma_y = i(|1><0| - |0><1|), so e^{i phi sigma_y} is the real
/// rotation [[cos phi, sin phi], [-sin phi, cos phi]].
pub fn analytic_gate(kind: GateKind, phase: f64) -> GateTarget {
    let matrix = match kind {
        GateKind::U1 => Array2::from_diag(&array![c(1.0, 0.0), C64::from_polar(1.0, phase)]),
        GateKind::U2 => {
            let (s, co) = phase.sin_cos();
            array![[c(co, 0.0), c(s, 0.0)], [c(-s, 0.0), c(co, 0.0)]]
        }
        GateKind::U3 => Array2::from_diag(&array![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            C64::from_polar(1.0, phase)
        ]),
    };
    GateTarget {
        kind,
        phase,
        matrix: OperatorMatrix::general(matrix).expect("square"),
    }
}

/// |Tr(A^dag B)| / d: global-phase-insensitive unitary overlap in [0, 1].
pub fn gate_fidelity(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GateError::DimensionMismatch {
            a: a.dim(),
            b: b.dim(),
        });
    }
    let product = a.dagger().matmul(b).expect("dims checked");
    Ok(product.trace().norm() / a.dim() as f64)
}

/// Frobenius distance min over alpha of ||A - e^{i alpha} B||_F.
pub fn phase_optimal_distance(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GateError::DimensionMismatch {
            a: a.dim(),
            b: b.dim(),
        });
    }
    let alpha = a.dagger().matmul(b).expect("dims checked").trace().arg();
    let rotated = b.entries().mapv(|z| z * C64::from_polar(1.0, -alpha));
    let diff = a.entries() - &rotated;
    Ok(diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// ||U1(phi1) U2(phi2) - U2(phi2) U1(phi1)||_F using the analytic gates;
/// positive whenever the pair genuinely fails to commute.
pub fn noncommutativity_witness(phi1: f64, phi2: f64) -> f64 {
    let u1 = analytic_gate(GateKind::U1, phi1).matrix;
    let u2 = analytic_gate(GateKind::U2, phi2).matrix;
    let ab = u1.matmul(&u2).expect("2x2");
    let ba = u2.matmul(&u1).expect("2x2");
    let diff = ab.entries() - ba.entries();
    diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bring `raw` onto the 2 pi branch nearest `target` (used when comparing
/// extracted phases against c * solid-angle models with |c * area| > pi).
pub fn unwrap_phase(raw: f64, target: f64, period: f64) -> f64 {
    let k = ((target - raw) / period).round();
    raw + k * period
}

/// Phase parameter of a (possibly leaky) computational-space holonomy,
/// assuming it realizes the given gate kind.
///
/// U1 and U3 read the phase of the last diagonal entry relative to the
/// first (the decoupled states anchor the global phase exactly). U2 first
/// projects onto the closest unitary, strips the det-phase, then reads the
/// sigma_y rotation angle; the remaining sign ambiguity of the det branch
/// is resolved toward the candidate with the larger real trace, and callers
/// fitting c * solid-angle models unwrap on a pi grid.
pub fn extract_gate_phase(kind: GateKind, holonomy: &OperatorMatrix) -> Result<f64> {
    let expected = kind.computational_dim();
    if holonomy.dim() != expected {
        return Err(GateError::WrongGateDimension {
            kind,
            expected,
            got: holonomy.dim(),
        });
    }
    match kind {
        GateKind::U1 => Ok((holonomy.entry(1, 1) / holonomy.entry(0, 0)).arg()),
        GateKind::U3 => Ok((holonomy.entry(3, 3) / holonomy.entry(0, 0)).arg()),
        GateKind::U2 => {
            let (u, _) = polar_unitary(holonomy.entries())
                .map_err(|e| GateError::Numerical(e.to_string()))?;
            let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
            let strip = C64::from_polar(1.0, -det.arg() / 2.0);
            let u = u.mapv(|z| z * strip);
            let cos_phi = 0.5 * (u[(0, 0)] + u[(1, 1)]).re;
            let sin_phi = 0.5 * (u[(0, 1)] - u[(1, 0)]).re;
            Ok(sin_phi.atan2(cos_phi))
        }
    }
}

/// One synthesis step: gate kind and phase, applied in list order (first
/// element acts first).
pub type SynthesisStep = (GateKind, f64);

/// Compose a single-qubit sequence into its 2x2 matrix; matrices multiply
/// right-to-left so the first listed gate acts first.
pub fn compose_single_qubit(sequence: &[SynthesisStep]) -> OperatorMatrix {
    let mut total = OperatorMatrix::identity(2);
    for &(kind, phase) in sequence {
        let g = analytic_gate(kind, phase).matrix;
        total = g.matmul(&total).expect("2x2");
    }
    total
}

/// Euler-style decomposition of an arbitrary single-qubit unitary into U1/U2
/// primitives (z-phases via U1, y-rotations via U2), up to global phase.
/// At most three steps; identity-like phases are dropped.
pub fn synthesize_single_qubit(target: &OperatorMatrix, tol: f64) -> Result<Vec<SynthesisStep>> {
    if target.dim() != 2 {
        return Err(GateError::DimensionMismatch {
            a: target.dim(),
            b: 2,
        });
    }
    let defect = target.unitarity_defect();
    if defect > 1e-8 {
        return Err(GateError::NonUnitaryTarget { defect });
    }
    let u = target.entries();
    // ZYZ angles: U ~ e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
    let gamma = 2.0 * u[(1, 0)].norm().atan2(u[(0, 0)].norm());
    let half = gamma / 2.0;
    let (sum, diff) = if half.sin().abs() < 1e-9 {
        ((u[(1, 1)] / u[(0, 0)]).arg(), 0.0)
    } else if half.cos().abs() < 1e-9 {
        (0.0, (-u[(1, 0)] / u[(0, 1)]).arg())
    } else {
        (
            (u[(1, 1)] / u[(0, 0)]).arg(),
            (-u[(1, 0)] / u[(0, 1)]).arg(),
        )
    };
    // The half-angle split of (beta + delta, beta - delta) is 2 pi ambiguous;
    // shifting both z-phases by pi selects the other branch (it equals the
    // first with the sign of gamma flipped, a different gate). Try both and
    // keep the one that actually recomposes.
    let candidates = [
        ((sum + diff) / 2.0, (sum - diff) / 2.0),
        (
            (sum + diff) / 2.0 + std::f64::consts::PI,
            (sum - diff) / 2.0 + std::f64::consts::PI,
        ),
    ];
    // All three primitives are 2 pi periodic; keep phases on the principal
    // branch so identity factors drop out of the sequence.
    let principal = |phase: f64| {
        let wrapped = phase.rem_euclid(std::f64::consts::TAU);
        if wrapped > std::f64::consts::PI {
            wrapped - std::f64::consts::TAU
        } else {
            wrapped
        }
    };
    let mut best: Option<(f64, Vec<SynthesisStep>)> = None;
    for (beta, delta) in candidates {
        let mut seq: Vec<SynthesisStep> = Vec::with_capacity(3);
        for step in [
            (GateKind::U1, principal(delta)),
            (GateKind::U2, principal(-gamma / 2.0)),
            (GateKind::U1, principal(beta)),
        ] {
            if step.1.abs() > 1e-12 {
                seq.push(step);
            }
        }
        let fidelity = gate_fidelity(&compose_single_qubit(&seq), target)?;
        if best.as_ref().is_none_or(|(f, _)| fidelity > *f) {
            best = Some((fidelity, seq));
        }
    }
    let (fidelity, sequence) = best.expect("two candidates evaluated");
    if fidelity < 1.0 - tol {
        return Err(GateError::Numerical(format!(
            "synthesis fidelity {fidelity} below 1 - {tol}"
        )));
    }
    Ok(sequence)
}

/// Which qubit(s) a circuit operation acts on; the simulator is two-qubit
/// wide, with qubit 0 the first tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubits {
    Single(u8),
    Pair,
}

/// One gate application inside a two-qubit circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitOp {
    pub kind: GateKind,
    pub phase: f64,
    pub qubits: Qubits,
}

/// Ordered list of holonomic gate applications; first element acts first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub ops: Vec<CircuitOp>,
}

/// The 4x4 unitary of a two-qubit circuit, composed right-to-left.
pub fn circuit_unitary(circuit: &Circuit) -> Result<OperatorMatrix> {
    circuit_unitary_with(circuit, |op| Ok(analytic_gate(op.kind, op.phase).matrix))
}

/// Same as [`circuit_unitary`] but with a caller-supplied realization of
/// each op (e.g. simulated holonomies instead of analytic matrices).
pub fn circuit_unitary_with<F>(circuit: &Circuit, mut realize: F) -> Result<OperatorMatrix>
where
    F: FnMut(&CircuitOp) -> Result<OperatorMatrix>,
{
    let eye2: Array2<C64> = Array2::eye(2);
    let mut total: Array2<C64> = Array2::eye(4);
    for op in &circuit.ops {
        let g = realize(op)?;
        let lifted: Array2<C64> = match op.qubits {
            Qubits::Single(0) => {
                if g.dim() != 2 {
                    return Err(GateError::WrongGateDimension {
                        kind: op.kind,
                        expected: 2,
                        got: g.dim(),
                    });
                }
                kron(g.entries(), &eye2)
            }
            Qubits::Single(_) => {
                if g.dim() != 2 {
                    return Err(GateError::WrongGateDimension {
                        kind: op.kind,
                        expected: 2,
                        got: g.dim(),
                    });
                }
                kron(&eye2, g.entries())
            }
            Qubits::Pair => {
                if g.dim() != 4 {
                    return Err(GateError::WrongGateDimension {
                        kind: op.kind,
                        expected: 4,
                        got: g.dim(),
                    });
                }
                g.entries().clone()
            }
        };
        total = lifted.dot(&total);
    }
    OperatorMatrix::general(total).map_err(|e| GateError::Numerical(e.to_string()))
}

/// The Hadamard matrix.
pub fn hadamard() -> OperatorMatrix {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    OperatorMatrix::general(array![
        [c(inv, 0.0), c(inv, 0.0)],
        [c(inv, 0.0), c(-inv, 0.0)]
    ])
    .expect("square")
}

/// The 4x4 CNOT with qubit 0 as control.
pub fn cnot_matrix() -> OperatorMatrix {
    OperatorMatrix::general(array![
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
    ])
    .expect("square")
}

/// CNOT built from the holonomic primitives: Hadamard on the target qubit,
/// the conditional phase U3(pi) (= CZ), Hadamard again.
pub fn controlled_not_construction() -> Result<Circuit> {
    let h_seq = synthesize_single_qubit(&hadamard(), 1e-10)?;
    let mut ops: Vec<CircuitOp> = h_seq
        .iter()
        .map(|&(kind, phase)| CircuitOp {
            kind,
            phase,
            qubits: Qubits::Single(1),
        })
        .collect();
    ops.push(CircuitOp {
        kind: GateKind::U3,
        phase: std::f64::consts::PI,
        qubits: Qubits::Pair,
    });
    ops.extend(h_seq.iter().map(|&(kind, phase)| CircuitOp {
        kind,
        phase,
        qubits: Qubits::Single(1),
    }));
    Ok(Circuit { ops })
}

/// Haar-random SU(2) element: a uniform point on S^3 via four normal
/// deviates (Box-Muller over the generator's uniforms).
pub fn haar_random_su2<R: Rng + ?Sized>(rng: &mut R) -> OperatorMatrix {
    let mut gauss = || {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let raw = [gauss(), gauss(), gauss(), gauss()];
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let q: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let a = c(q[0], q[1]);
    let b = c(q[2], q[3]);
    OperatorMatrix::general(array![[a, -b.conj()], [b, a.conj()]]).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn u1_zero_phase_is_identity() {
        let g = analytic_gate(GateKind::U1, 0.0);
        assert!(phase_optimal_distance(&g.matrix, &OperatorMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn u2_quarter_turn_matches_exponential() {
        // e^{i (pi/2) sigma_y} = i sigma_y maps |0> to -|1>.
        let g = analytic_gate(GateKind::U2, FRAC_PI_2);
        assert!((g.matrix.entry(0, 0)).norm() < 1e-15);
        assert_abs_diff_eq!(g.matrix.entry(1, 0).re, -1.0, epsilon = 1e-15);
        // Cross-check against a direct series evaluation of the exponential.
        let sigma_y = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let mut series: Array2<C64> = Array2::eye(2);
        let mut term: Array2<C64> = Array2::eye(2);
        for k in 1..40 {
            term = term.dot(&sigma_y.mapv(|z| z * C64::i() * FRAC_PI_2 / k as f64));
            series += &term;
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.matrix.entry(i, j) - series[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn u3_pi_is_controlled_z() {
        let g = analytic_gate(GateKind::U3, PI);
        for i in 0..4 {
            let expected = if i == 3 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(g.matrix.entry(i, i).re, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn fidelity_examples() {
        let g = analytic_gate(GateKind::U2, 0.4).matrix;
        assert_abs_diff_eq!(gate_fidelity(&g, &g).unwrap(), 1.0, epsilon = 1e-15);
        let shifted =
            OperatorMatrix::general(g.entries().mapv(|z| z * C64::from_polar(1.0, 1.3))).unwrap();
        assert_abs_diff_eq!(gate_fidelity(&g, &shifted).unwrap(), 1.0, epsilon = 1e-14);
        // diag(1, e^{i pi}) against the identity: |1 + e^{i pi}|/2 = 0.
        let z = analytic_gate(GateKind::U1, PI).matrix;
        assert!(gate_fidelity(&z, &OperatorMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn witness_vanishes_when_one_factor_is_identity() {
        assert!(noncommutativity_witness(0.0, 1.23) < 1e-15);
        assert!(noncommutativity_witness(0.77, 0.0) < 1e-15);
    }

    #[test]
    fn witness_at_quarter_phases() {
        // U1 = diag(1, i), U2 = [[0,1],[-1,0]]: commutator norm is
        // sqrt(2 |1 - i|^2) = 2.
        assert_abs_diff_eq!(
            noncommutativity_witness(FRAC_PI_2, FRAC_PI_2),
            2.0,
            epsilon = 1e-12
        );
        // U1 = sigma_z vs the pi/2 rotation: every off-diagonal entry of the
        // commutator has modulus 2, so the norm is 2 sqrt(2).
        assert_abs_diff_eq!(
            noncommutativity_witness(PI, FRAC_PI_2),
            2.0 * 2.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn u2_is_a_one_parameter_group() {
        let a = 0.7;
        let b = -1.9;
        let prod = analytic_gate(GateKind::U2, a)
            .matrix
            .matmul(&analytic_gate(GateKind::U2, b).matrix)
            .unwrap();
        let direct = analytic_gate(GateKind::U2, a + b).matrix;
        assert!(phase_optimal_distance(&prod, &direct).unwrap() < 1e-12);
    }

    #[test]
    fn gate_periods() {
        let eye2 = OperatorMatrix::identity(2);
        let eye4 = OperatorMatrix::identity(4);
        assert!(
            gate_fidelity(
                &analytic_gate(GateKind::U1, std::f64::consts::TAU).matrix,
                &eye2
            )
            .unwrap()
                > 1.0 - 1e-12
        );
        assert!(
            gate_fidelity(
                &analytic_gate(GateKind::U3, std::f64::consts::TAU).matrix,
                &eye4
            )
            .unwrap()
                > 1.0 - 1e-12
        );
        // e^{i pi sigma_y} = -I: identity up to global phase at pi.
        assert!(
            gate_fidelity(&analytic_gate(GateKind::U2, PI).matrix, &eye2).unwrap() > 1.0 - 1e-12
        );
    }

    #[test]
    fn synthesize_identity_is_empty() {
        let seq = synthesize_single_qubit(&OperatorMatrix::identity(2), 1e-10).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn synthesize_hadamard() {
        let seq = synthesize_single_qubit(&hadamard(), 1e-10).unwrap();
        assert!(seq.len() <= 5);
        let recomposed = compose_single_qubit(&seq);
        assert!(gate_fidelity(&recomposed, &hadamard()).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn synthesize_haar_random_targets() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let target = haar_random_su2(&mut rng);
            let seq = synthesize_single_qubit(&target, 1e-9).unwrap();
            assert!(seq.len() <= 5);
            let fidelity = gate_fidelity(&compose_single_qubit(&seq), &target).unwrap();
            assert!(fidelity > 1.0 - 1e-9, "fidelity {fidelity}");
        }
    }

    #[test]
    fn synthesize_rejects_non_unitary() {
        let m = OperatorMatrix::general(array![
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.5, 0.0)]
        ])
        .unwrap();
        assert!(matches!(
            synthesize_single_qubit(&m, 1e-9),
            Err(GateError::NonUnitaryTarget { .. })
        ));
    }

    #[test]
    fn cnot_truth_table_and_fidelity() {
        let circuit = controlled_not_construction().unwrap();
        let u = circuit_unitary(&circuit).unwrap();
        let cnot = cnot_matrix();
        assert!(gate_fidelity(&u, &cnot).unwrap() > 1.0 - 1e-9);
        // |10> -> |11> and |00> -> |00> up to the circuit's global phase.
        let ten = u.entries().column(2).to_owned();
        assert_abs_diff_eq!(ten[3].norm(), 1.0, epsilon = 1e-9);
        assert!(ten[2].norm() < 1e-9);
        let zz = u.entries().column(0).to_owned();
        assert_abs_diff_eq!(zz[0].norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn extract_phase_roundtrip() {
        for phase in [-2.5, -0.3, 0.0, 0.9, 3.0] {
            let g1 = analytic_gate(GateKind::U1, phase).matrix;
            let wrapped = extract_gate_phase(GateKind::U1, &g1).unwrap();
            assert_abs_diff_eq!(
                unwrap_phase(wrapped, phase, std::f64::consts::TAU),
                phase,
                epsilon = 1e-12
            );
            let g3 = analytic_gate(GateKind::U3, phase).matrix;
            let wrapped = extract_gate_phase(GateKind::U3, &g3).unwrap();
            assert_abs_diff_eq!(
                unwrap_phase(wrapped, phase, std::f64::consts::TAU),
                phase,
                epsilon = 1e-12
            );
        }
        for phase in [-1.2, 0.0, 0.4, 1.5] {
            let g2 = analytic_gate(GateKind::U2, phase).matrix;
            let got = extract_gate_phase(GateKind::U2, &g2).unwrap();
            assert_abs_diff_eq!(got, phase, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_samples_are_unitary_and_seeded() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = haar_random_su2(&mut rng);
        assert!(a.unitarity_defect() < 1e-12);
        let mut rng2 = ChaCha12Rng::seed_from_u64(3);
        let b = haar_random_su2(&mut rng2);
        assert!(phase_optimal_distance(&a, &b).unwrap() < 1e-15);
    }
}
