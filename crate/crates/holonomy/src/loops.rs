//! Closed control paths on the (theta, phi) sphere and their enclosed solid
//! angles.
//!
//! Every loop starts and ends at the pole theta = 0, where the control
//! Hamiltonian does not depend on phi, so geometric closure at the pole is
//! closure in control space too. Loops are parameterized by a dimensionless
//! s in [0, 1]; the physical duration is applied only at propagation time,
//! so one geometric loop serves every adiabaticity sweep.

use crate::model::LoopPoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("theta0 = {theta0} outside (0, pi)")]
    ThetaRange { theta0: f64 },
    #[error("ramp_fraction = {ramp_fraction} outside (0, 0.5)")]
    RampFraction { ramp_fraction: f64 },
    #[error("phi_span = {phi_span} must be nonzero and finite")]
    PhiSpan { phi_span: f64 },
    #[error("omega_scale must be positive, got {omega_scale}")]
    OmegaScale { omega_scale: f64 },
    #[error("open loop: endpoint mismatch {mismatch:.3e} exceeds 1e-9")]
    OpenLoop { mismatch: f64 },
    #[error("need at least {min} steps, got {got}")]
    TooFewSteps { min: usize, got: usize },
    #[error("loop composition requires equal omega_scale and uniform speed profiles")]
    IncompatibleComposition,
    #[error("power warp exponent {exponent} outside [0.2, 5]")]
    WarpExponent { exponent: f64 },
}

type Result<T> = std::result::Result<T, LoopError>;

/// C1 interpolant with zero slope at both ends.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// One segment of a piecewise loop over a sub-interval of s.
///
/// Theta ramps use smoothstep so theta-dot is continuous (kinks there would
/// inject nonadiabatic transitions unrelated to the scaling law under test);
/// phi sweeps are linear in s, so the sweep velocity switches on at the
/// segment joints and sets the leakage envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) enum Piece {
    ThetaRamp {
        s0: f64,
        s1: f64,
        theta_from: f64,
        theta_to: f64,
        phi: f64,
    },
    PhiSweep {
        s0: f64,
        s1: f64,
        theta: f64,
        phi_from: f64,
        phi_to: f64,
    },
}

impl Piece {
    fn range(&self) -> (f64, f64) {
        match *self {
            Piece::ThetaRamp { s0, s1, .. } => (s0, s1),
            Piece::PhiSweep { s0, s1, .. } => (s0, s1),
        }
    }

    fn sample(&self, s: f64) -> (f64, f64) {
        match *self {
            Piece::ThetaRamp {
                s0,
                s1,
                theta_from,
                theta_to,
                phi,
            } => {
                let x = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
                (theta_from + (theta_to - theta_from) * smoothstep(x), phi)
            }
            Piece::PhiSweep {
                s0,
                s1,
                theta,
                phi_from,
                phi_to,
            } => {
                let x = if s1 > s0 {
                    ((s - s0) / (s1 - s0)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (theta, phi_from + (phi_to - phi_from) * x)
            }
        }
    }

    fn rescaled(&self, a: f64, b: f64) -> Piece {
        // Affine remap of the s-interval onto [a + s0*(b-a), a + s1*(b-a)].
        let remap = |s: f64| a + s * (b - a);
        match *self {
            Piece::ThetaRamp {
                s0,
                s1,
                theta_from,
                theta_to,
                phi,
            } => Piece::ThetaRamp {
                s0: remap(s0),
                s1: remap(s1),
                theta_from,
                theta_to,
                phi,
            },
            Piece::PhiSweep {
                s0,
                s1,
                theta,
                phi_from,
                phi_to,
            } => Piece::PhiSweep {
                s0: remap(s0),
                s1: remap(s1),
                theta,
                phi_from,
                phi_to,
            },
        }
    }

    fn reversed(&self) -> Piece {
        match *self {
            Piece::ThetaRamp {
                s0,
                s1,
                theta_from,
                theta_to,
                phi,
            } => Piece::ThetaRamp {
                s0: 1.0 - s1,
                s1: 1.0 - s0,
                theta_from: theta_to,
                theta_to: theta_from,
                phi,
            },
            Piece::PhiSweep {
                s0,
                s1,
                theta,
                phi_from,
                phi_to,
            } => Piece::PhiSweep {
                s0: 1.0 - s1,
                s1: 1.0 - s0,
                theta,
                phi_from: phi_to,
                phi_to: phi_from,
            },
        }
    }
}

/// Optional monotone reparameterization of s; changes traversal speed, never
/// the geometric path.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedProfile {
    #[default]
    Uniform,
    /// s -> 3s^2 - 2s^3 (slow at both ends).
    Smoothstep,
    /// s -> s^p.
    Power(f64),
}

impl SpeedProfile {
    fn apply(&self, s: f64) -> f64 {
        match *self {
            SpeedProfile::Uniform => s,
            SpeedProfile::Smoothstep => smoothstep(s),
            SpeedProfile::Power(p) => s.clamp(0.0, 1.0).powf(p),
        }
    }
}

/// A closed path s in [0, 1] -> (theta(s), phi(s)) with theta(0) = theta(1)
/// = 0, plus the overall Rabi magnitude it will be driven with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLoop {
    pieces: Vec<Piece>,
    omega_scale: f64,
    #[serde(default)]
    speed_profile: SpeedProfile,
}

impl ParameterLoop {
    /// Canonical loop: ramp theta 0 -> theta0 at phi = 0 over [0, r], sweep
    /// phi 0 -> 2 pi at theta0 over [r, 1-r], ramp theta back to 0 at
    /// phi = 2 pi. Encloses the polar cap of area 2 pi (1 - cos theta0).
    pub fn latitude(theta0: f64, ramp_fraction: f64, omega_scale: f64) -> Result<Self> {
        Self::sector(theta0, std::f64::consts::TAU, ramp_fraction, omega_scale)
    }

    /// Lune-like sector: same construction as [`ParameterLoop::latitude`]
    /// but sweeping only `phi_span` of longitude; encloses
    /// phi_span * (1 - cos theta_max).
    pub fn sector(
        theta_max: f64,
        phi_span: f64,
        ramp_fraction: f64,
        omega_scale: f64,
    ) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max < std::f64::consts::PI) {
            return Err(LoopError::ThetaRange { theta0: theta_max });
        }
        if !(ramp_fraction > 0.0 && ramp_fraction < 0.5) {
            return Err(LoopError::RampFraction { ramp_fraction });
        }
        if phi_span == 0.0 || !phi_span.is_finite() {
            return Err(LoopError::PhiSpan { phi_span });
        }
        if omega_scale <= 0.0 || !omega_scale.is_finite() {
            return Err(LoopError::OmegaScale { omega_scale });
        }
        let r = ramp_fraction;
        let pieces = vec![
            Piece::ThetaRamp {
                s0: 0.0,
                s1: r,
                theta_from: 0.0,
                theta_to: theta_max,
                phi: 0.0,
            },
            Piece::PhiSweep {
                s0: r,
                s1: 1.0 - r,
                theta: theta_max,
                phi_from: 0.0,
                phi_to: phi_span,
            },
            Piece::ThetaRamp {
                s0: 1.0 - r,
                s1: 1.0,
                theta_from: theta_max,
                theta_to: 0.0,
                phi: phi_span,
            },
        ];
        Ok(Self {
            pieces,
            omega_scale,
            speed_profile: SpeedProfile::Uniform,
        })
    }

    /// Build directly from pieces; used by tests that need deliberately
    /// malformed (open) paths.
    #[cfg(test)]
    pub(crate) fn from_pieces(pieces: Vec<Piece>, omega_scale: f64) -> Self {
        Self {
            pieces,
            omega_scale,
            speed_profile: SpeedProfile::Uniform,
        }
    }

    pub fn omega_scale(&self) -> f64 {
        self.omega_scale
    }

    pub fn speed_profile(&self) -> SpeedProfile {
        self.speed_profile
    }

    /// Same geometric path traversed with a different speed profile.
    pub fn with_speed_profile(mut self, profile: SpeedProfile) -> Result<Self> {
        if let SpeedProfile::Power(p) = profile {
            if !(0.2..=5.0).contains(&p) {
                return Err(LoopError::WarpExponent { exponent: p });
            }
        }
        self.speed_profile = profile;
        Ok(self)
    }

    /// (theta, phi) at loop parameter s (clamped to [0, 1]).
    pub fn sample(&self, s: f64) -> (f64, f64) {
        let s = self.speed_profile.apply(s.clamp(0.0, 1.0));
        let piece = self
            .pieces
            .iter()
            .find(|p| {
                let (s0, s1) = p.range();
                s >= s0 && s <= s1
            })
            .or_else(|| self.pieces.last())
            .expect("loop has at least one piece");
        piece.sample(s)
    }

    pub fn point(&self, s: f64) -> LoopPoint {
        let (theta, phi) = self.sample(s);
        LoopPoint {
            theta,
            phi,
            omega_scale: self.omega_scale,
        }
    }

    /// n + 1 samples at s = k/n, including both endpoints.
    pub fn discretize(&self, n: usize) -> Result<Vec<LoopPoint>> {
        if n < 2 {
            return Err(LoopError::TooFewSteps { min: 2, got: n });
        }
        Ok((0..=n).map(|k| self.point(k as f64 / n as f64)).collect())
    }

    /// Signed solid angle enclosed on the control sphere, evaluated as the
    /// line integral (1 - cos theta) dphi by the midpoint rule (O(1/n^2) for
    /// smooth pieces). Counterclockwise traversal (increasing phi) counts
    /// positive.
    pub fn solid_angle(&self, n: usize) -> Result<f64> {
        if n < 100 {
            return Err(LoopError::TooFewSteps { min: 100, got: n });
        }
        let mismatch = self.closure_mismatch();
        if mismatch > 1e-9 {
            return Err(LoopError::OpenLoop { mismatch });
        }
        let mut area = 0.0;
        let mut prev = self.sample(0.0);
        for k in 1..=n {
            let s_next = k as f64 / n as f64;
            let next = self.sample(s_next);
            let mid = self.sample((k as f64 - 0.5) / n as f64);
            area += (1.0 - mid.0.cos()) * (next.1 - prev.1);
            prev = next;
        }
        Ok(area)
    }

    /// Distance between the endpoint direction vectors on the unit sphere;
    /// zero for a geometrically closed path.
    pub fn closure_mismatch(&self) -> f64 {
        let (t0, p0) = self.sample(0.0);
        let (t1, p1) = self.sample(1.0);
        let v0 = [t0.sin() * p0.cos(), t0.sin() * p0.sin(), t0.cos()];
        let v1 = [t1.sin() * p1.cos(), t1.sin() * p1.sin(), t1.cos()];
        v0.iter()
            .zip(v1.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The same path traversed backwards; the solid angle changes sign.
    pub fn reversed(&self) -> Result<Self> {
        if self.speed_profile != SpeedProfile::Uniform {
            return Err(LoopError::IncompatibleComposition);
        }
        let mut pieces: Vec<Piece> = self.pieces.iter().map(Piece::reversed).collect();
        pieces.reverse();
        Ok(Self {
            pieces,
            omega_scale: self.omega_scale,
            speed_profile: SpeedProfile::Uniform,
        })
    }

    /// Concatenation: this loop on s in [0, 1/2], then `other` on [1/2, 1].
    /// Both must share omega_scale and run at uniform speed.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.omega_scale != other.omega_scale
            || self.speed_profile != SpeedProfile::Uniform
            || other.speed_profile != SpeedProfile::Uniform
        {
            return Err(LoopError::IncompatibleComposition);
        }
        let mut pieces: Vec<Piece> = self.pieces.iter().map(|p| p.rescaled(0.0, 0.5)).collect();
        pieces.extend(other.pieces.iter().map(|p| p.rescaled(0.5, 1.0)));
        Ok(Self {
            pieces,
            omega_scale: self.omega_scale,
            speed_profile: SpeedProfile::Uniform,
        })
    }
}

/// Area of the polar cap below latitude theta0: 2 pi (1 - cos theta0).
pub fn cap_solid_angle(theta0: f64) -> f64 {
    std::f64::consts::TAU * (1.0 - theta0.cos())
}
