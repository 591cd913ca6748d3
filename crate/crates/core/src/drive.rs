//! Classical drive fields, the closed-form P-frame displacement, the Q-frame
//! condition, and observable conversion between frames.

use faer::MatRef;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::device::SystemModel;
use crate::error::{Error, Result};

/// Time-dependent field `𝓔(t)` felt by the cavity.
pub trait Field: Sync {
    fn field(&self, t: f64) -> c64;
}

impl<F> Field for F
where
    F: Fn(f64) -> c64 + Sync,
{
    fn field(&self, t: f64) -> c64 {
        self(t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    #[default]
    Monochromatic,
}

/// `𝓔(t) = E e^{i·phase} e^{−i ω_d t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    #[serde(default)]
    pub kind: DriveKind,
    pub amplitude: f64,
    pub omega_d: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DriveSpec {
    pub fn monochromatic(amplitude: f64, omega_d: f64) -> Self {
        DriveSpec {
            kind: DriveKind::Monochromatic,
            amplitude,
            omega_d,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid("drive.amplitude", "must be non-negative and finite"));
        }
        if !(self.omega_d > 0.0 && self.omega_d.is_finite()) {
            return Err(Error::invalid("drive.omega_d", "must be positive and finite"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("drive.phase", "must be finite"));
        }
        Ok(())
    }
}

impl Field for DriveSpec {
    fn field(&self, t: f64) -> c64 {
        field_at(self, t)
    }
}

pub fn field_at(drive: &DriveSpec, t: f64) -> c64 {
    match drive.kind {
        DriveKind::Monochromatic => {
            c64::from_polar(drive.amplitude, drive.phase - drive.omega_d * t)
        }
    }
}

/// Choice of the cavity displacement `α(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    /// No displacement, `α ≡ 0`.
    Lab,
    /// Displacement cancelling the direct drive only.
    PFrame,
    /// Self-consistent displacement pinning `⟨c⟩_U` at zero.
    QFrame,
}

impl FrameMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameMode::Lab => "lab",
            FrameMode::PFrame => "p_frame",
            FrameMode::QFrame => "q_frame",
        }
    }
}

impl FromStr for FrameMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(FrameMode::Lab),
            "p_frame" | "p" => Ok(FrameMode::PFrame),
            "q_frame" | "q" => Ok(FrameMode::QFrame),
            other => Err(Error::Config(format!("unknown frame `{other}`"))),
        }
    }
}

/// Closed-form solution of `dα/dt = −(iω_c + κ/2)α − i𝓔(t)`, `α(0) = 0`,
/// for a monochromatic field.
pub fn p_displacement(drive: &DriveSpec, omega_c: f64, kappa: f64, t: f64) -> c64 {
    let i = c64::i();
    let detuning = drive.omega_d - omega_c;
    let num = i * drive.amplitude * c64::from_polar(1.0, drive.phase) * c64::new(kappa / 2.0, detuning);
    let den = kappa * kappa / 4.0 + detuning * detuning;
    let decaying = (-(c64::new(kappa / 2.0, omega_c)) * t).exp();
    let driven = c64::from_polar(1.0, -drive.omega_d * t);
    num / den * (decaying - driven)
}

/// Right-hand side of the linear P-frame condition.
#[inline]
pub fn p_alpha_rate(alpha: c64, omega_c: f64, kappa: f64, field: c64) -> c64 {
    -c64::new(kappa / 2.0, omega_c) * alpha - c64::i() * field
}

/// Q-frame rate from precomputed expectations `⟨c⟩_U` and `⟨a_q ⊗ I⟩_U`.
///
/// The commutator `[D†H_gD, c] = −u (a_q ⊗ I)` is taken in the untruncated
/// algebra, so any residual drift of `⟨c⟩_U` measures truncation error.
#[inline]
pub fn q_alpha_rate(
    alpha: c64,
    c_u: c64,
    a_u: c64,
    u: c64,
    omega_c: f64,
    kappa: f64,
    field: c64,
) -> c64 {
    let i = c64::i();
    -i * u * a_u - c64::new(kappa / 2.0, omega_c) * (c_u + alpha) - i * field
}

/// `dα/dt` in the Q-frame for a transformed-frame density matrix.
pub fn q_alpha_rhs(
    alpha: c64,
    rho_u: MatRef<'_, c64>,
    model: &SystemModel,
    drive: &dyn Field,
    t: f64,
) -> Result<c64> {
    let (c_u, a_u) = cavity_and_coupling_expectations(rho_u, model)?;
    Ok(q_alpha_rate(
        alpha,
        c_u,
        a_u,
        model.coupling.u,
        model.omega_c,
        model.kappa,
        drive.field(t),
    ))
}

/// `(Tr ρ c, Tr ρ (a_q ⊗ I))` using the block structure of both operators.
pub fn cavity_and_coupling_expectations(
    rho: MatRef<'_, c64>,
    model: &SystemModel,
) -> Result<(c64, c64)> {
    let d = model.trunc.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.nrows(),
        });
    }
    let n = model.trunc.cavity_dim();
    let q = model.trunc.q_dim;
    let mut c_u = c64::new(0.0, 0.0);
    for m in 0..q {
        for i in 0..n - 1 {
            // Tr(ρ c) = Σ ρ[(m,i+1),(m,i)] √(i+1)
            c_u += rho[(m * n + i + 1, m * n + i)] * ((i + 1) as f64).sqrt();
        }
    }
    let mut a_u = c64::new(0.0, 0.0);
    let a = &model.coupling.a_q;
    for m in 0..q {
        for mp in 0..q {
            let amp = a[(mp, m)];
            if amp == c64::new(0.0, 0.0) {
                continue;
            }
            let mut block = c64::new(0.0, 0.0);
            for i in 0..n {
                block += rho[(m * n + i, mp * n + i)];
            }
            a_u += block * amp;
        }
    }
    Ok((c_u, a_u))
}

/// Observables available through [`to_lab`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    /// `⟨c⟩`
    Amplitude,
    /// `⟨c†c⟩`
    PhotonNumber,
    /// `2 Re(⟨c⟩ e^{iω_d t})`
    RealQuadrature,
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" | "c" => Ok(ObservableKind::Amplitude),
            "photon_number" | "n" => Ok(ObservableKind::PhotonNumber),
            "real_quadrature" | "quadrature" => Ok(ObservableKind::RealQuadrature),
            other => Err(Error::UnknownObservable(other.to_owned())),
        }
    }
}

/// Lab-frame amplitude from its transformed-frame value.
#[inline]
pub fn lab_amplitude(c_u: c64, alpha: c64) -> c64 {
    c_u + alpha
}

/// `⟨c†c⟩ = ⟨c†c⟩_U + 2 Re(α*⟨c⟩_U) + |α|²`.
#[inline]
pub fn lab_photon_number(n_u: f64, c_u: c64, alpha: c64) -> f64 {
    n_u + 2.0 * (alpha.conj() * c_u).re + alpha.norm_sqr()
}

#[inline]
pub fn real_quadrature(c_lab: c64, omega_d: f64, t: f64) -> f64 {
    2.0 * (c_lab * c64::from_polar(1.0, omega_d * t)).re
}

/// Converts a transformed-frame state into a lab-frame observable. Real
/// observables are returned with zero imaginary part.
pub fn to_lab(
    kind: ObservableKind,
    rho_u: MatRef<'_, c64>,
    n_max: usize,
    alpha: c64,
    t: f64,
    omega_d: f64,
) -> Result<c64> {
    let n = n_max + 1;
    let d = rho_u.nrows();
    if d % n != 0 || rho_u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d,
        });
    }
    let mut c_u = c64::new(0.0, 0.0);
    let mut n_u = 0.0;
    for k in 0..d {
        let i = k % n;
        n_u += rho_u[(k, k)].re * i as f64;
        if i + 1 < n {
            c_u += rho_u[(k + 1, k)] * ((i + 1) as f64).sqrt();
        }
    }
    let c_lab = lab_amplitude(c_u, alpha);
    Ok(match kind {
        ObservableKind::Amplitude => c_lab,
        ObservableKind::PhotonNumber => c64::new(lab_photon_number(n_u, c_u, alpha), 0.0),
        ObservableKind::RealQuadrature => c64::new(real_quadrature(c_lab, omega_d, t), 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig2_drive() -> DriveSpec {
        DriveSpec::monochromatic(1.0e-2, 1.0)
    }

    #[test]
    fn field_values() {
        let off = DriveSpec::monochromatic(0.0, 1.0);
        for t in [0.0, 1.0, 123.4] {
            assert_eq!(field_at(&off, t).norm(), 0.0);
        }
        let d = fig2_drive();
        assert_eq!(field_at(&d, 0.0), c64::new(1.0e-2, 0.0));
        for t in [0.3, 17.0, 4000.0] {
            assert_abs_diff_eq!(field_at(&d, t).norm(), 1.0e-2, epsilon = 1e-17);
        }
    }

    #[test]
    fn p_displacement_starts_at_zero() {
        let d = fig2_drive();
        assert_eq!(p_displacement(&d, 1.0, 7.2e-3, 0.0).norm(), 0.0);
    }

    #[test]
    fn p_displacement_resonant_steady_state() {
        let d = fig2_drive();
        let kappa = 7.2e-3;
        let t = 60.0 / kappa;
        let p = p_displacement(&d, 1.0, kappa, t);
        assert_abs_diff_eq!(p.norm(), 2.0 * 1.0e-2 / kappa, epsilon = 1e-9);
    }

    #[test]
    fn p_displacement_solves_linear_condition() {
        let d = DriveSpec {
            phase: 0.4,
            ..DriveSpec::monochromatic(3.0e-3, 1.0015)
        };
        let (wc, kappa) = (1.0, 1.619e-3);
        // fixed-step RK4 of the linear condition from P(0) = 0
        let rate = |t: f64, p: c64| p_alpha_rate(p, wc, kappa, field_at(&d, t));
        let h: f64 = 5e-4;
        let mut p = c64::new(0.0, 0.0);
        let mut t0 = 0.0;
        for target in [0.5, 10.0, 333.3, 2500.0] {
            let steps = ((target - t0) / h).ceil() as usize;
            let step = (target - t0) / steps as f64;
            for k in 0..steps {
                let t = t0 + k as f64 * step;
                let k1 = rate(t, p);
                let k2 = rate(t + step / 2.0, p + k1 * (step / 2.0));
                let k3 = rate(t + step / 2.0, p + k2 * (step / 2.0));
                let k4 = rate(t + step, p + k3 * step);
                p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
            }
            t0 = target;
            let err = (p - p_displacement(&d, wc, kappa, target)).norm();
            assert!(err <= 1e-8 * d.amplitude, "t = {target}: {err}");
        }
    }

    #[test]
    fn p_displacement_bounded() {
        let d = DriveSpec::monochromatic(1.0e-2, 1.003);
        let kappa = 7.2e-3;
        let det: f64 = 0.003;
        let bound = 2.0 * d.amplitude / (kappa * kappa / 4.0 + det * det).sqrt() * 1.01;
        for k in 0..2000 {
            let t = k as f64 * 3.7;
            assert!(p_displacement(&d, 1.0, kappa, t).norm() <= bound);
        }
    }

    #[test]
    fn frame_names_round_trip() {
        for f in [FrameMode::Lab, FrameMode::PFrame, FrameMode::QFrame] {
            assert_eq!(f.as_str().parse::<FrameMode>().unwrap(), f);
        }
        assert!("x_frame".parse::<FrameMode>().is_err());
    }

    #[test]
    fn unknown_observable_is_rejected() {
        assert!(matches!(
            "entropy".parse::<ObservableKind>(),
            Err(Error::UnknownObservable(_))
        ));
    }

    #[test]
    fn to_lab_with_vacuum() {
        let n_max = 6;
        let d = 2 * (n_max + 1);
        let mut rho = faer::Mat::<c64>::zeros(d, d);
        rho[(0, 0)] = c64::new(1.0, 0.0);
        let alpha = c64::new(2.0, 0.0);
        let n = to_lab(ObservableKind::PhotonNumber, rho.as_ref(), n_max, alpha, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(n.re, 4.0, epsilon = 1e-15);
        let zero = c64::new(0.0, 0.0);
        let n0 = to_lab(ObservableKind::PhotonNumber, rho.as_ref(), n_max, zero, 0.0, 1.0).unwrap();
        assert_eq!(n0.re, 0.0);
        let q = to_lab(ObservableKind::RealQuadrature, rho.as_ref(), n_max, alpha, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(q.re, 4.0, epsilon = 1e-15);
    }
}
