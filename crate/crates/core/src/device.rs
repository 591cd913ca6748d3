//! Device Hamiltonians and their qubit-linear cavity couplings.
//!
//! All energies are in units of ħω_c and all rates in units of ω_c.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, CompositeOperator, TruncationSpec};

/// Two-level qubit with `H_q = (ω_q/2) Z` and `H_g = g X (c† + c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub omega_q: f64,
    pub g: f64,
}

impl TlsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_q > 0.0 && self.omega_q.is_finite()) {
            return Err(Error::invalid("omega_q", "must be positive and finite"));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::invalid("g", "must be non-negative and finite"));
        }
        Ok(())
    }
}

fn default_charge_cutoff() -> usize {
    10
}

/// Transmon in the charge basis `|−cutoff⟩ … |cutoff⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j: f64,
    pub g: f64,
    #[serde(default)]
    pub n_g: f64,
    #[serde(default = "default_charge_cutoff")]
    pub charge_cutoff: usize,
}

impl TransmonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0 && self.e_c.is_finite()) {
            return Err(Error::invalid("e_c", "must be positive and finite"));
        }
        if !(self.e_j >= 0.0 && self.e_j.is_finite()) {
            return Err(Error::invalid("e_j", "must be non-negative and finite"));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::invalid("g", "must be non-negative and finite"));
        }
        if !self.n_g.is_finite() {
            return Err(Error::invalid("n_g", "must be finite"));
        }
        if self.charge_cutoff < 1 {
            return Err(Error::invalid("charge_cutoff", "must be at least 1"));
        }
        Ok(())
    }

    pub fn q_dim(&self) -> usize {
        2 * self.charge_cutoff + 1
    }
}

/// Which device a model was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Device {
    Tls(TlsParams),
    Transmon(TransmonParams),
    /// Hand-assembled model (e.g. after a qubit basis change).
    Custom,
}

/// `H_g = a_q ⊗ (u c† + u* c)`.
#[derive(Clone, Debug)]
pub struct QubitLinearCoupling {
    pub a_q: Mat<c64>,
    pub u: c64,
}

/// Qubit–cavity system: `H_qc = H_q + H_g + ω_c c†c`, cavity decay `κ`.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub device: Device,
    pub h_q: Mat<c64>,
    pub coupling: QubitLinearCoupling,
    pub omega_c: f64,
    pub kappa: f64,
    pub trunc: TruncationSpec,
}

impl SystemModel {
    /// Assembles a model from explicit matrices, checking the invariants.
    pub fn new(
        h_q: Mat<c64>,
        coupling: QubitLinearCoupling,
        omega_c: f64,
        kappa: f64,
        trunc: TruncationSpec,
    ) -> Result<Self> {
        let model = SystemModel {
            device: Device::Custom,
            h_q,
            coupling,
            omega_c,
            kappa,
            trunc,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.trunc.validate()?;
        let q = self.trunc.q_dim;
        for (name, m) in [("h_q", &self.h_q), ("a_q", &self.coupling.a_q)] {
            if m.nrows() != q || m.ncols() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: m.nrows(),
                });
            }
            if !fock::is_hermitian(m.as_ref(), 1e-12) {
                return Err(Error::invalid(name, "must be Hermitian"));
            }
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", "must be positive and finite"));
        }
        Ok(())
    }

    /// Same device with a different cavity truncation.
    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        let mut m = self.clone();
        m.trunc.n_max = n_max;
        m.trunc.validate()?;
        Ok(m)
    }

    /// Coupling amplitude `|u|`.
    pub fn g(&self) -> f64 {
        self.coupling.u.norm()
    }

    /// Eigenvalues and eigenvectors (columns) of `H_q`, ascending. Each
    /// eigenvector is phased so its largest component is real and positive.
    pub fn qubit_eigen(&self) -> Result<(Vec<f64>, Mat<c64>)> {
        let q = self.trunc.q_dim;
        let err = |e| Error::Eigensolver(format!("{e:?}"));
        let (vals, mut vecs) = if (0..q).all(|i| (0..q).all(|j| self.h_q[(i, j)].im == 0.0)) {
            let h = Mat::<f64>::from_fn(q, q, |i, j| self.h_q[(i, j)].re);
            let evd = h.self_adjoint_eigen(faer::Side::Lower).map_err(err)?;
            let u = evd.U();
            (
                (0..q).map(|i| evd.S()[i]).collect::<Vec<_>>(),
                Mat::from_fn(q, q, |i, j| c64::new(u[(i, j)], 0.0)),
            )
        } else {
            let evd = self.h_q.self_adjoint_eigen(faer::Side::Lower).map_err(err)?;
            ((0..q).map(|i| evd.S()[i].re).collect(), evd.U().to_owned())
        };
        for k in 0..q {
            let lead = (0..q)
                .map(|m| vecs[(m, k)])
                .fold(c64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() + 1e-12 { b } else { a });
            let rot = lead.conj() / lead.norm();
            for m in 0..q {
                vecs[(m, k)] *= rot;
            }
        }
        Ok((vals, vecs))
    }

    /// The same physics expressed in the eigenbasis of `H_q`, keeping the
    /// lowest `levels` eigenstates (all of them when `None`).
    pub fn in_qubit_eigenbasis(&self, levels: Option<usize>) -> Result<Self> {
        let (vals, vecs) = self.qubit_eigen()?;
        let q = self.trunc.q_dim;
        let k = levels.unwrap_or(q);
        if k < 2 || k > q {
            return Err(Error::invalid(
                "qubit_levels",
                format!("must lie in [2, {q}], got {k}"),
            ));
        }
        let v = vecs.subcols(0, k);
        let a = v.adjoint() * &self.coupling.a_q * v;
        let h_q = Mat::from_fn(k, k, |i, j| {
            if i == j {
                c64::new(vals[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let real = (0..q).all(|i| {
            (0..q).all(|j| self.h_q[(i, j)].im == 0.0 && self.coupling.a_q[(i, j)].im == 0.0)
        });
        // re-symmetrize to remove round-off asymmetry
        let a_q = Mat::from_fn(k, k, |i, j| {
            let x = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            debug_assert!(!real || x.im == 0.0);
            x
        });
        let mut trunc = self.trunc;
        trunc.q_dim = k;
        Ok(SystemModel {
            device: if k == q { self.device } else { Device::Custom },
            h_q,
            coupling: QubitLinearCoupling { a_q, u: self.coupling.u },
            omega_c: self.omega_c,
            kappa: self.kappa,
            trunc,
        })
    }

    /// `H_q ⊗ I`.
    pub fn qubit_hamiltonian(&self) -> CompositeOperator {
        let id = Mat::<c64>::identity(self.trunc.cavity_dim(), self.trunc.cavity_dim());
        CompositeOperator::new_checked_hermitian(
            fock::kron(self.h_q.as_ref(), id.as_ref()),
            self.trunc,
        )
        .expect("dimension fixed by construction")
    }

    /// `H_g = a_q ⊗ (u c† + u* c)`.
    pub fn coupling_operator(&self) -> CompositeOperator {
        let c = fock::ladder(self.trunc.n_max);
        let u = self.coupling.u;
        let n = self.trunc.cavity_dim();
        let cav = Mat::from_fn(n, n, |i, j| u * c[(j, i)].conj() + u.conj() * c[(i, j)]);
        CompositeOperator::new_checked_hermitian(
            fock::kron(self.coupling.a_q.as_ref(), cav.as_ref()),
            self.trunc,
        )
        .expect("dimension fixed by construction")
    }

    /// `H_qc = H_q ⊗ I + H_g + ω_c I ⊗ c†c`.
    pub fn joint_hamiltonian(&self) -> CompositeOperator {
        let hq = self.qubit_hamiltonian();
        let hg = self.coupling_operator();
        let n = fock::number(&self.trunc).scale(c64::new(self.omega_c, 0.0));
        hq.add(&hg).and_then(|h| h.add(&n)).expect("same dimensions")
    }
}

fn pauli_x() -> Mat<c64> {
    Mat::from_fn(2, 2, |i, j| c64::new(if i != j { 1.0 } else { 0.0 }, 0.0))
}

fn pauli_z() -> Mat<c64> {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c64::new(1.0, 0.0),
        (1, 1) => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, 0.0),
    })
}

/// Two-level qubit model. `trunc.q_dim` is forced to 2.
pub fn build_tls(params: TlsParams, kappa: f64, n_max: usize) -> Result<SystemModel> {
    params.validate()?;
    let trunc = TruncationSpec::new(n_max, 2)?;
    let z = pauli_z();
    let h_q = Mat::from_fn(2, 2, |i, j| z[(i, j)] * (params.omega_q / 2.0));
    let mut model = SystemModel::new(
        h_q,
        QubitLinearCoupling {
            a_q: pauli_x(),
            u: c64::new(params.g, 0.0),
        },
        1.0,
        kappa,
        trunc,
    )?;
    model.device = Device::Tls(params);
    Ok(model)
}

/// Charge-basis matrices `(H_q, N̂ − N_g)` for a transmon.
pub fn transmon_matrices(params: &TransmonParams) -> (Mat<c64>, Mat<c64>) {
    let k = params.charge_cutoff as i64;
    let q = params.q_dim();
    let charge = |idx: usize| idx as i64 - k;
    let h_q = Mat::from_fn(q, q, |i, j| {
        if i == j {
            let n = charge(i) as f64 - params.n_g;
            c64::new(4.0 * params.e_c * n * n, 0.0)
        } else if i.abs_diff(j) == 1 {
            c64::new(-params.e_j / 2.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let n_op = Mat::from_fn(q, q, |i, j| {
        if i == j {
            c64::new(charge(i) as f64 - params.n_g, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    (h_q, n_op)
}

/// Transmon model with coupling `i g (c† − c) Σ (n − N_g)|n⟩⟨n|`.
pub fn build_transmon(params: TransmonParams, kappa: f64, n_max: usize) -> Result<SystemModel> {
    params.validate()?;
    let trunc = TruncationSpec::new(n_max, params.q_dim())?;
    let (h_q, a_q) = transmon_matrices(&params);
    let mut model = SystemModel::new(
        h_q,
        QubitLinearCoupling {
            a_q,
            u: c64::new(0.0, params.g),
        },
        1.0,
        kappa,
        trunc,
    )?;
    model.device = Device::Transmon(params);
    Ok(model)
}

/// `D†(α) H_g D(α) = H_g + 2 Re(u* α) (a_q ⊗ I)`.
pub fn displaced_coupling(model: &SystemModel, alpha: c64) -> CompositeOperator {
    let shift = displacement_shift(model.coupling.u, alpha);
    let hg = model.coupling_operator();
    let id = Mat::<c64>::identity(model.trunc.cavity_dim(), model.trunc.cavity_dim());
    let extra = fock::kron(model.coupling.a_q.as_ref(), id.as_ref());
    let d = model.trunc.dim();
    let m = Mat::from_fn(d, d, |i, j| hg.matrix()[(i, j)] + extra[(i, j)] * shift);
    CompositeOperator::new_checked_hermitian(m, model.trunc).expect("dimension fixed")
}

/// Scalar `2 Re(u* α)` multiplying `a_q ⊗ I` in the displaced coupling.
#[inline]
pub fn displacement_shift(u: c64, alpha: c64) -> f64 {
    2.0 * (u.conj() * alpha).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn standard_transmon() -> TransmonParams {
        TransmonParams {
            e_c: 5.0e-2,
            e_j: 1.6,
            g: 3.0e-2,
            n_g: 0.0,
            charge_cutoff: 10,
        }
    }

    #[test]
    fn tls_qubit_levels() {
        let m = build_tls(TlsParams { omega_q: 0.75, g: 0.03 }, 7.2e-3, 5).unwrap();
        let (vals, _) = m.qubit_eigen().unwrap();
        assert_abs_diff_eq!(vals[0], -0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(vals[1], 0.375, epsilon = 1e-15);
    }

    #[test]
    fn uncoupled_tls_joint_levels_are_products() {
        let m = build_tls(TlsParams { omega_q: 0.75, g: 0.0 }, 7.2e-3, 6).unwrap();
        let h = m.joint_hamiltonian();
        let evals = h
            .matrix()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        let mut expected: Vec<f64> = (0..=6)
            .flat_map(|n| [-0.375 + n as f64, 0.375 + n as f64])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in evals.iter().zip(&expected) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn free_rotor_limit() {
        let p = TransmonParams {
            e_j: 0.0,
            ..standard_transmon()
        };
        let m = build_transmon(p, 1e-3, 2).unwrap();
        let (vals, _) = m.qubit_eigen().unwrap();
        let mut expected: Vec<f64> = (-10i64..=10).map(|n| 4.0 * 0.05 * (n * n) as f64).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&expected) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn standard_transmon_levels() {
        let m = build_transmon(standard_transmon(), 1.619e-3, 2).unwrap();
        let (vals, vecs) = m.qubit_eigen().unwrap();
        let e_ge = vals[1] - vals[0];
        let e_ef = vals[2] - vals[1];
        assert!((e_ge - 0.7462).abs() < 5e-4, "E_ge = {e_ge}");
        // independent numpy eigvalsh of the same 21×21 charge-basis matrix
        assert_abs_diff_eq!(e_ge, 0.746_228_486_566_626_8, epsilon = 1e-10);
        assert_abs_diff_eq!(e_ef, 0.685_267_117_459_662_1, epsilon = 1e-10);
        // edge charge states barely populated in the eighth excited state
        let edge = vecs[(0, 8)].norm_sqr() + vecs[(20, 8)].norm_sqr();
        assert!(edge < 1e-10, "edge occupation {edge}");
    }

    #[test]
    fn coupling_sign_does_not_enter_qubit_spectrum() {
        let a = build_transmon(standard_transmon(), 1e-3, 2).unwrap();
        let b = build_transmon(
            TransmonParams {
                g: 0.0,
                ..standard_transmon()
            },
            1e-3,
            2,
        )
        .unwrap();
        let (va, _) = a.qubit_eigen().unwrap();
        let (vb, _) = b.qubit_eigen().unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn displaced_coupling_at_zero_is_bare_coupling() {
        let m = build_tls(TlsParams { omega_q: 0.75, g: 0.03 }, 7.2e-3, 4).unwrap();
        let a = displaced_coupling(&m, c64::new(0.0, 0.0));
        let b = m.coupling_operator();
        for i in 0..m.trunc.dim() {
            for j in 0..m.trunc.dim() {
                assert_eq!(a.matrix()[(i, j)], b.matrix()[(i, j)]);
            }
        }
        assert!(a.is_hermitian());
    }

    #[test]
    fn displacement_shift_values() {
        // TLS, u = g, α = 1 → 2g
        assert_abs_diff_eq!(displacement_shift(c64::new(0.03, 0.0), c64::new(1.0, 0.0)), 0.06);
        // transmon, u = i g, α = i → 2g
        assert_abs_diff_eq!(
            displacement_shift(c64::new(0.0, 0.03), c64::new(0.0, 1.0)),
            0.06,
            epsilon = 1e-17
        );
    }

    #[test]
    fn rejects_bad_params() {
        assert!(build_tls(TlsParams { omega_q: -1.0, g: 0.1 }, 1e-3, 4).is_err());
        assert!(build_tls(TlsParams { omega_q: 1.0, g: 0.1 }, 0.0, 4).is_err());
        let p = TransmonParams {
            charge_cutoff: 0,
            ..standard_transmon()
        };
        assert!(build_transmon(p, 1e-3, 4).is_err());
    }

    #[test]
    fn eigenbasis_projection_keeps_spectrum() {
        let m = build_transmon(standard_transmon(), 1.619e-3, 3).unwrap();
        let e = m.in_qubit_eigenbasis(None).unwrap();
        let h1 = m
            .joint_hamiltonian()
            .matrix()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        let h2 = e
            .joint_hamiltonian()
            .matrix()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        for (a, b) in h1.iter().zip(&h2) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-11);
        }
    }
}
