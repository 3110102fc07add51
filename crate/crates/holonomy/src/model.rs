//! The gate Hamiltonians and the control maps that turn a geometric point
//! (theta, phi) into Rabi frequencies.
//!
//! Single ion (basis |0>, |1>, |a>, |e>):
//!
//! ```text
//! H = |e>(Omega_0 <0| + Omega_1 <1| + Omega_a <a|) + h.c.
//! ```
//!
//! Two ions (16-dimensional product basis): an effective second-order
//! interaction built from sigma_mu^phi = e^{i phi} |e><mu| + h.c. acting on
//! both ions,
//!
//! ```text
//! H = (eta^2/delta) [ -|Omega_1|^2 s1 x s1 + |Omega_a|^2 sa x sa ].
//! ```
//!
//! All frequencies are angular (rad/s, hbar = 1).

use crate::linalg::{Basis, OperatorMatrix};
use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("control value must be finite: {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("detuning delta must be nonzero")]
    ZeroDetuning,
    #[error("Lamb-Dicke criterion violated: eta^2 = {eta_sq} >= 0.1")]
    LambDicke { eta_sq: f64 },
    #[error("theta = {theta} outside [0, pi]")]
    ThetaRange { theta: f64 },
    #[error("theta = pi is singular for the two-ion control map (tan(theta/2) diverges)")]
    ThetaAtPi,
    #[error("omega_scale must be positive, got {omega_scale}")]
    OmegaScale { omega_scale: f64 },
    #[error("Rabi magnitude must be nonnegative: {name} = {value}")]
    NegativeMagnitude { name: &'static str, value: f64 },
}

type Result<T> = std::result::Result<T, ModelError>;

/// Which of the three holonomic gates a Hamiltonian realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Single-bit phase gate diag(1, e^{i phi}) on {|0>, |1>}.
    U1,
    /// Single-bit rotation e^{i phi sigma_y} on {|0>, |1>}.
    U2,
    /// Two-bit conditional phase diag(1, 1, 1, e^{i phi}) on {|00>..|11>}.
    U3,
}

impl GateKind {
    pub fn basis(self) -> Basis {
        match self {
            GateKind::U1 | GateKind::U2 => Basis::SingleIon,
            GateKind::U3 => Basis::TwoIon,
        }
    }

    /// Dimension of the computational space the gate acts on.
    pub fn computational_dim(self) -> usize {
        match self {
            GateKind::U1 | GateKind::U2 => 2,
            GateKind::U3 => 4,
        }
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GateKind::U1 => write!(f, "u1"),
            GateKind::U2 => write!(f, "u2"),
            GateKind::U3 => write!(f, "u3"),
        }
    }
}

/// The three single-ion Rabi frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleIonControls {
    pub omega0: C64,
    pub omega1: C64,
    pub omega_a: C64,
}

impl SingleIonControls {
    pub fn new(omega0: C64, omega1: C64, omega_a: C64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("omega1", omega1), ("omega_a", omega_a)] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(ModelError::NonFinite {
                    name,
                    value: v.norm(),
                });
            }
        }
        Ok(Self {
            omega0,
            omega1,
            omega_a,
        })
    }

    /// Root sum square of the three Rabi magnitudes; the single-ion gap.
    pub fn total_rabi(&self) -> f64 {
        (self.omega0.norm_sqr() + self.omega1.norm_sqr() + self.omega_a.norm_sqr()).sqrt()
    }
}

/// Controls of the effective two-ion interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoIonControls {
    /// Lamb-Dicke parameter (dimensionless), eta^2 << 1.
    pub eta: f64,
    /// Additional detuning (rad/s), nonzero.
    pub delta: f64,
    /// |Omega_1| (rad/s).
    pub omega1_mag: f64,
    /// |Omega_a| (rad/s).
    pub omega_a_mag: f64,
    /// Phase of Omega_1 (rad).
    pub phi1: f64,
    /// Phase of Omega_a (rad).
    pub phi_a: f64,
}

impl TwoIonControls {
    pub fn new(
        eta: f64,
        delta: f64,
        omega1_mag: f64,
        omega_a_mag: f64,
        phi1: f64,
        phi_a: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("eta", eta),
            ("delta", delta),
            ("omega1_mag", omega1_mag),
            ("omega_a_mag", omega_a_mag),
            ("phi1", phi1),
            ("phi_a", phi_a),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite { name, value: v });
            }
        }
        if eta * eta >= 0.1 {
            return Err(ModelError::LambDicke { eta_sq: eta * eta });
        }
        if delta == 0.0 {
            return Err(ModelError::ZeroDetuning);
        }
        for (name, v) in [("omega1_mag", omega1_mag), ("omega_a_mag", omega_a_mag)] {
            if v < 0.0 {
                return Err(ModelError::NegativeMagnitude { name, value: v });
            }
        }
        Ok(Self {
            eta,
            delta,
            omega1_mag,
            omega_a_mag,
            phi1,
            phi_a,
        })
    }

    /// Effective gap scale eta^2 (|Omega_1|^2 + |Omega_a|^2) / delta.
    pub fn effective_gap(&self) -> f64 {
        self.eta
            * self.eta
            * (self.omega1_mag * self.omega1_mag + self.omega_a_mag * self.omega_a_mag)
            / self.delta.abs()
    }
}

/// A point on a control loop: polar/azimuthal control angles plus the overall
/// Rabi magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopPoint {
    /// Polar control angle (rad), in [0, pi].
    pub theta: f64,
    /// Azimuthal control angle (rad); continuous, not wrapped.
    pub phi: f64,
    /// Overall Rabi magnitude Omega (rad/s), positive.
    pub omega_scale: f64,
}

impl LoopPoint {
    pub fn new(theta: f64, phi: f64, omega_scale: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(ModelError::ThetaRange { theta });
        }
        if !phi.is_finite() {
            return Err(ModelError::NonFinite {
                name: "phi",
                value: phi,
            });
        }
        if omega_scale <= 0.0 || !omega_scale.is_finite() {
            return Err(ModelError::OmegaScale { omega_scale });
        }
        Ok(Self {
            theta,
            phi,
            omega_scale,
        })
    }
}

/// Physical parameters of the two-ion interaction that are not part of the
/// loop geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoIonParams {
    pub eta: f64,
    pub delta: f64,
}

impl Default for TwoIonParams {
    /// eta = 0.1, delta = eta^2 rad/s, so that the effective two-ion gap
    /// equals Omega^2 numerically and Delta_2 * T sweeps read like Omega * T.
    fn default() -> Self {
        Self {
            eta: 0.1,
            delta: 0.01,
        }
    }
}

/// A gate kind plus the physical context needed to build its Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateModel {
    pub kind: GateKind,
    /// Used by U3 only.
    pub two_ion: TwoIonParams,
}

impl GateModel {
    pub fn u1() -> Self {
        Self {
            kind: GateKind::U1,
            two_ion: TwoIonParams::default(),
        }
    }

    pub fn u2() -> Self {
        Self {
            kind: GateKind::U2,
            two_ion: TwoIonParams::default(),
        }
    }

    pub fn u3(eta: f64, delta: f64) -> Self {
        Self {
            kind: GateKind::U3,
            two_ion: TwoIonParams { eta, delta },
        }
    }

    pub fn of_kind(kind: GateKind) -> Self {
        Self {
            kind,
            two_ion: TwoIonParams::default(),
        }
    }

    pub fn basis(&self) -> Basis {
        self.kind.basis()
    }

    /// The gate Hamiltonian at a loop point.
    pub fn hamiltonian(&self, point: &LoopPoint) -> Result<OperatorMatrix> {
        match self.kind {
            GateKind::U1 => build_single_ion_hamiltonian(&u1_control_map(point)),
            GateKind::U2 => build_single_ion_hamiltonian(&u2_control_map(point)),
            GateKind::U3 => build_two_ion_hamiltonian(&u3_control_map(
                point,
                self.two_ion.eta,
                self.two_ion.delta,
            )?),
        }
    }

    /// The energy scale that sets the adiabaticity clock: Omega for the
    /// single-bit gates, eta^2 Omega^2 / |delta| for the two-bit gate.
    pub fn gap_scale(&self, omega_scale: f64) -> f64 {
        match self.kind {
            GateKind::U1 | GateKind::U2 => omega_scale,
            GateKind::U3 => {
                self.two_ion.eta * self.two_ion.eta * omega_scale * omega_scale
                    / self.two_ion.delta.abs()
            }
        }
    }
}

/// H = |e>(Omega_0 <0| + Omega_1 <1| + Omega_a <a|) + h.c. on the basis
/// |0>, |1>, |a>, |e>. Hermitian and traceless by construction; rank <= 2,
/// so the kernel is always at least 2-dimensional.
pub fn build_single_ion_hamiltonian(controls: &SingleIonControls) -> Result<OperatorMatrix> {
    let validated = SingleIonControls::new(controls.omega0, controls.omega1, controls.omega_a)?;
    let mut h: Array2<C64> = Array2::zeros((4, 4));
    for (level, omega) in [
        (0, validated.omega0),
        (1, validated.omega1),
        (2, validated.omega_a),
    ] {
        h[(3, level)] = omega;
        h[(level, 3)] = omega.conj();
    }
    Ok(OperatorMatrix::hermitian(h).expect("constructed hermitian"))
}

/// Controls for the single-bit phase gate: Omega_0 = 0 (|0> decoupled),
/// Omega_1 = -Omega sin(theta/2) e^{i phi}, Omega_a = Omega cos(theta/2).
pub fn u1_control_map(point: &LoopPoint) -> SingleIonControls {
    let half = point.theta / 2.0;
    SingleIonControls {
        omega0: C64::new(0.0, 0.0),
        omega1: C64::from_polar(point.omega_scale * half.sin(), point.phi) * C64::new(-1.0, 0.0),
        omega_a: C64::new(point.omega_scale * half.cos(), 0.0),
    }
}

/// Controls for the single-bit rotation gate: Omega_0 = Omega sin(theta)
/// cos(phi), Omega_1 = Omega sin(theta) sin(phi), Omega_a = Omega cos(theta).
/// The resulting kernel is 2-dimensional for every (theta, phi).
pub fn u2_control_map(point: &LoopPoint) -> SingleIonControls {
    let (st, ct) = (point.theta.sin(), point.theta.cos());
    let (sp, cp) = (point.phi.sin(), point.phi.cos());
    SingleIonControls {
        omega0: C64::new(point.omega_scale * st * cp, 0.0),
        omega1: C64::new(point.omega_scale * st * sp, 0.0),
        omega_a: C64::new(point.omega_scale * ct, 0.0),
    }
}

/// Controls for the two-bit gate: relative intensity |Omega_1|^2/|Omega_a|^2
/// = tan(theta/2), phase phi_1 - phi_a = phi/2 with the gauge phi_a = 0, and
/// total intensity fixed to |Omega_1|^2 + |Omega_a|^2 = Omega^2 so the gap
/// stays bounded along the loop.
///
/// theta = pi is rejected: the intensity ratio diverges there, so callers
/// keep loops below pi.
pub fn u3_control_map(point: &LoopPoint, eta: f64, delta: f64) -> Result<TwoIonControls> {
    if point.theta >= std::f64::consts::PI {
        return Err(ModelError::ThetaAtPi);
    }
    let tan_half = (point.theta / 2.0).tan();
    let total_intensity = point.omega_scale * point.omega_scale;
    // |Omega_1|^2 = I t/(1+t), |Omega_a|^2 = I/(1+t) with t = tan(theta/2).
    let omega1_sq = total_intensity * tan_half / (1.0 + tan_half);
    let omega_a_sq = total_intensity / (1.0 + tan_half);
    TwoIonControls::new(
        eta,
        delta,
        omega1_sq.sqrt(),
        omega_a_sq.sqrt(),
        point.phi / 2.0,
        0.0,
    )
}

/// sigma_mu^phi = e^{i phi} |e><mu| + h.c. on one ion.
fn sigma_mu(level: usize, phi: f64) -> Array2<C64> {
    let mut s: Array2<C64> = Array2::zeros((4, 4));
    s[(3, level)] = C64::from_polar(1.0, phi);
    s[(level, 3)] = C64::from_polar(1.0, -phi);
    s
}

/// H = (eta^2/delta) [ -|Omega_1|^2 s1 x s1 + |Omega_a|^2 sa x sa ] on the
/// 16-dimensional two-ion basis. Any product state with a |0> slot is
/// annihilated exactly.
pub fn build_two_ion_hamiltonian(controls: &TwoIonControls) -> Result<OperatorMatrix> {
    let validated = TwoIonControls::new(
        controls.eta,
        controls.delta,
        controls.omega1_mag,
        controls.omega_a_mag,
        controls.phi1,
        controls.phi_a,
    )?;
    let prefactor = validated.eta * validated.eta / validated.delta;
    let s1 = sigma_mu(1, validated.phi1);
    let sa = sigma_mu(2, validated.phi_a);
    let coupling_1 = kron(&s1, &s1);
    let coupling_a = kron(&sa, &sa);
    let w1 = validated.omega1_mag * validated.omega1_mag;
    let wa = validated.omega_a_mag * validated.omega_a_mag;
    let h = coupling_1.mapv(|z| z * C64::new(-prefactor * w1, 0.0))
        + coupling_a.mapv(|z| z * C64::new(prefactor * wa, 0.0));
    Ok(OperatorMatrix::hermitian(h).expect("constructed hermitian"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{null_space_basis, Basis, QuantumState};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::{Eigh, UPLO};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn point(theta: f64, phi: f64) -> LoopPoint {
        LoopPoint::new(theta, phi, 1.0).unwrap()
    }

    #[test]
    fn single_ion_eigenvalues_with_only_ancilla_drive() {
        let h = build_single_ion_hamiltonian(
            &SingleIonControls::new(0.0.into(), 0.0.into(), C64::new(2.0, 0.0)).unwrap(),
        )
        .unwrap();
        let (vals, _) = h.entries().eigh(UPLO::Lower).unwrap();
        let mut sorted: Vec<f64> = vals.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(sorted[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[3], 2.0, epsilon = 1e-12);
        assert!(h.trace().norm() < 1e-15);
    }

    #[test]
    fn single_ion_all_zero_gives_zero_matrix() {
        let h = build_single_ion_hamiltonian(
            &SingleIonControls::new(0.0.into(), 0.0.into(), 0.0.into()).unwrap(),
        )
        .unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn single_ion_equal_drives_dark_space() {
        // Omega_0 = Omega_1 = Omega_a: the kernel inside the ground manifold
        // is the plane orthogonal to (|0> + |1> + |a>)/sqrt(3).
        let h = build_single_ion_hamiltonian(
            &SingleIonControls::new(1.0.into(), 1.0.into(), 1.0.into()).unwrap(),
        )
        .unwrap();
        let kernel = null_space_basis(&h, 1e-9, Basis::SingleIon).unwrap();
        assert_eq!(kernel.len(), 2);
        let bright: Vec<C64> = (0..3).map(|_| C64::new(1.0 / 3.0f64.sqrt(), 0.0)).collect();
        for v in &kernel {
            let overlap: C64 = (0..3).map(|i| bright[i].conj() * v.amplitude(i)).sum();
            assert!(overlap.norm() < 1e-10);
            assert!(v.amplitude(3).norm() < 1e-10);
        }
    }

    #[test]
    fn u1_map_base_point_and_antipode() {
        let c0 = u1_control_map(&point(0.0, 0.3));
        assert!(c0.omega0.norm() < 1e-15);
        assert!(c0.omega1.norm() < 1e-15);
        assert_abs_diff_eq!(c0.omega_a.re, 1.0, epsilon = 1e-15);

        let phi = 0.7;
        let cpi = u1_control_map(&point(PI, phi));
        assert!(cpi.omega_a.norm() < 1e-15);
        let expected = -C64::from_polar(1.0, phi);
        assert!((cpi.omega1 - expected).norm() < 1e-15);
    }

    #[test]
    fn u1_map_dark_state_at_equator() {
        // theta = pi/2, phi = 0: kernel inside span{|1>, |a>} is
        // cos(pi/4)|1> + sin(pi/4)|a>.
        let controls = u1_control_map(&point(FRAC_PI_2, 0.0));
        assert!((controls.omega1 - C64::new(-1.0 / 2.0f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((controls.omega_a - C64::new(1.0 / 2.0f64.sqrt(), 0.0)).norm() < 1e-15);
        let h = build_single_ion_hamiltonian(&controls).unwrap();
        let dark = QuantumState::new(
            Basis::SingleIon,
            ndarray::array![
                C64::new(0.0, 0.0),
                C64::new(FRAC_PI_4.cos(), 0.0),
                C64::new(FRAC_PI_4.sin(), 0.0),
                C64::new(0.0, 0.0)
            ],
        )
        .unwrap();
        let hv = h.apply(&dark).unwrap();
        assert!(hv.norm() < 1e-12);
    }

    #[test]
    fn u1_map_annihilates_zero_for_every_point() {
        let zero = QuantumState::basis_state(Basis::SingleIon, 0);
        for &theta in &[0.0, 0.4, 1.2, 2.8, PI] {
            for &phi in &[0.0, 1.0, 4.0] {
                let h = build_single_ion_hamiltonian(&u1_control_map(&point(theta, phi))).unwrap();
                assert_eq!(h.apply(&zero).unwrap().norm(), 0.0);
            }
        }
    }

    #[test]
    fn u2_map_examples() {
        let c0 = u2_control_map(&point(0.0, 0.9));
        assert!(c0.omega0.norm() < 1e-15 && c0.omega1.norm() < 1e-15);
        assert_abs_diff_eq!(c0.omega_a.re, 1.0, epsilon = 1e-15);
        let kernel = null_space_basis(
            &build_single_ion_hamiltonian(&c0).unwrap(),
            1e-9,
            Basis::SingleIon,
        )
        .unwrap();
        assert_eq!(kernel.len(), 2);
        assert!((kernel[0].amplitude(0).norm() - 1.0).abs() < 1e-12);
        assert!((kernel[1].amplitude(1).norm() - 1.0).abs() < 1e-12);

        // theta = pi/2, phi = 0: controls (Omega, 0, 0); dark space is
        // span{|1>, |a>}.
        let c1 = u2_control_map(&point(FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(c1.omega0.re, 1.0, epsilon = 1e-15);
        assert!(c1.omega1.norm() < 1e-15 && c1.omega_a.norm() < 1e-12);
        let kernel = null_space_basis(
            &build_single_ion_hamiltonian(&c1).unwrap(),
            1e-9,
            Basis::SingleIon,
        )
        .unwrap();
        assert_eq!(kernel.len(), 2);
        for v in &kernel {
            assert!(v.amplitude(0).norm() < 1e-12);
            assert!(v.amplitude(3).norm() < 1e-12);
        }

        // theta = pi/4, phi = pi/2: controls (0, Omega/sqrt2, Omega/sqrt2);
        // the dark space contains |0>.
        let c2 = u2_control_map(&point(FRAC_PI_4, FRAC_PI_2));
        assert!(c2.omega0.norm() < 1e-12);
        assert_abs_diff_eq!(c2.omega1.re, 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c2.omega_a.re, 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        let h = build_single_ion_hamiltonian(&c2).unwrap();
        let zero = QuantumState::basis_state(Basis::SingleIon, 0);
        assert!(h.apply(&zero).unwrap().norm() < 1e-15);
    }

    #[test]
    fn u2_dark_state_pair_spans_the_kernel() {
        // The two degenerate dark states
        //   D1 = cos(t)(cos(p)|0> + sin(p)|1>) - sin(t)|a>
        //   D2 = cos(p)|1> - sin(p)|0>
        // are annihilated for every control point.
        for &(theta, phi) in &[(0.4, 0.9), (1.3, 2.2), (2.1, 5.0)] {
            let h = build_single_ion_hamiltonian(&u2_control_map(&point(theta, phi))).unwrap();
            let ct = theta.cos();
            let (sp, cp) = (phi.sin(), phi.cos());
            let d1 = QuantumState::new(
                Basis::SingleIon,
                ndarray::array![
                    C64::new(ct * cp, 0.0),
                    C64::new(ct * sp, 0.0),
                    C64::new(-theta.sin(), 0.0),
                    C64::new(0.0, 0.0)
                ],
            )
            .unwrap();
            let d2 = QuantumState::new(
                Basis::SingleIon,
                ndarray::array![
                    C64::new(-sp, 0.0),
                    C64::new(cp, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0)
                ],
            )
            .unwrap();
            assert!(h.apply(&d1).unwrap().norm() < 1e-12);
            assert!(h.apply(&d2).unwrap().norm() < 1e-12);
            assert!(d1.inner(&d2).norm() < 1e-12);
        }
    }

    #[test]
    fn u2_kernel_is_two_dimensional_everywhere() {
        for &theta in &[0.0, 0.3, 1.0, 1.8, 2.9] {
            for &phi in &[0.0, 0.7, 2.0, 5.0] {
                let h = build_single_ion_hamiltonian(&u2_control_map(&point(theta, phi))).unwrap();
                let kernel = null_space_basis(&h, 1e-9, Basis::SingleIon).unwrap();
                assert_eq!(kernel.len(), 2, "theta={theta} phi={phi}");
            }
        }
    }

    #[test]
    fn u3_map_intensity_ratio_and_phase() {
        let c = u3_control_map(&point(FRAC_PI_2, 0.0), 0.1, 0.01).unwrap();
        assert_abs_diff_eq!(c.omega1_mag * c.omega1_mag, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.omega_a_mag * c.omega_a_mag, 0.5, epsilon = 1e-14);

        let c0 = u3_control_map(&point(0.0, 0.0), 0.1, 0.01).unwrap();
        assert_eq!(c0.omega1_mag, 0.0);
        assert_abs_diff_eq!(c0.omega_a_mag, 1.0, epsilon = 1e-15);

        let cpi = u3_control_map(&point(0.3, PI), 0.1, 0.01).unwrap();
        assert_abs_diff_eq!(cpi.phi1, FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(cpi.phi_a, 0.0);

        assert!(matches!(
            u3_control_map(&point(PI, 0.0), 0.1, 0.01),
            Err(ModelError::ThetaAtPi)
        ));
    }

    #[test]
    fn u3_ratio_matches_tan_half_theta() {
        for k in 0..20 {
            let theta = (PI - 0.1) * k as f64 / 19.0;
            let c = u3_control_map(&point(theta, 0.0), 0.1, 0.01).unwrap();
            let ratio = c.omega1_mag * c.omega1_mag / (c.omega_a_mag * c.omega_a_mag);
            assert_abs_diff_eq!(ratio, (theta / 2.0).tan(), epsilon = 1e-12);
        }
    }

    #[test]
    fn two_ion_hamiltonian_couples_ee_to_11() {
        // |Omega_a| = 0, |Omega_1| = Omega, phi_1 = 0: <ee|H|11> = -(eta^2/delta) Omega^2.
        let eta = 0.1;
        let delta = 0.02;
        let omega = 3.0;
        let c = TwoIonControls::new(eta, delta, omega, 0.0, 0.0, 0.0).unwrap();
        let h = build_two_ion_hamiltonian(&c).unwrap();
        let ee = Basis::product_index(3, 3);
        let one_one = Basis::product_index(1, 1);
        let expected = -eta * eta / delta * omega * omega;
        assert_abs_diff_eq!(h.entry(ee, one_one).re, expected, epsilon = 1e-12);
        assert!(h.entry(ee, one_one).im.abs() < 1e-15);
    }

    #[test]
    fn two_ion_hamiltonian_annihilates_zero_slots() {
        let c = TwoIonControls::new(0.1, 0.01, 0.8, 0.6, 0.4, 0.2).unwrap();
        let h = build_two_ion_hamiltonian(&c).unwrap();
        for state in [
            Basis::product_index(0, 0),
            Basis::product_index(0, 1),
            Basis::product_index(1, 0),
        ] {
            let v = QuantumState::basis_state(Basis::TwoIon, state);
            assert_eq!(h.apply(&v).unwrap().norm(), 0.0, "state index {state}");
        }
    }

    #[test]
    fn two_ion_hamiltonian_decouples_11_when_omega1_zero() {
        let c = TwoIonControls::new(0.1, 0.01, 0.0, 1.0, 0.0, 0.0).unwrap();
        let h = build_two_ion_hamiltonian(&c).unwrap();
        let one_one = Basis::product_index(1, 1);
        for col in 0..16 {
            assert_eq!(h.entry(one_one, col).norm(), 0.0);
        }
    }

    #[test]
    fn two_ion_dark_state_phase_follows_control_phase() {
        // The kernel within span{|11>, |aa>} must be
        // cos(theta/2)|11> + sin(theta/2) e^{i phi} |aa> for the u3 map.
        let theta = 1.1;
        let phi = 0.8;
        let c = u3_control_map(&point(theta, phi), 0.1, 0.01).unwrap();
        let h = build_two_ion_hamiltonian(&c).unwrap();
        let one_one = Basis::product_index(1, 1);
        let aa = Basis::product_index(2, 2);
        let mut amplitudes = ndarray::Array1::zeros(16);
        amplitudes[one_one] = C64::new((theta / 2.0).cos(), 0.0);
        amplitudes[aa] = C64::from_polar((theta / 2.0).sin(), phi);
        let dark = QuantumState::new(Basis::TwoIon, amplitudes).unwrap();
        let hv = h.apply(&dark).unwrap();
        assert!(hv.norm() < 1e-12, "residual {}", hv.norm());
    }

    #[test]
    fn two_ion_rejects_zero_detuning() {
        assert!(matches!(
            TwoIonControls::new(0.1, 0.0, 1.0, 1.0, 0.0, 0.0),
            Err(ModelError::ZeroDetuning)
        ));
    }

    #[test]
    fn lamb_dicke_criterion_enforced() {
        assert!(matches!(
            TwoIonControls::new(0.4, 0.01, 1.0, 1.0, 0.0, 0.0),
            Err(ModelError::LambDicke { .. })
        ));
    }

    #[test]
    fn single_ion_kernel_at_least_two_dimensional() {
        for &(o0, o1, oa) in &[
            (1.0, 0.0, 0.0),
            (0.3, -0.4, 0.5),
            (0.0, 0.0, 0.0),
            (2.0, 2.0, 2.0),
        ] {
            let h = build_single_ion_hamiltonian(
                &SingleIonControls::new(o0.into(), o1.into(), oa.into()).unwrap(),
            )
            .unwrap();
            let kernel = null_space_basis(&h, 1e-9, Basis::SingleIon).unwrap();
            assert!(kernel.len() >= 2);
        }
    }
}
