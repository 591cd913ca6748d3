//! Dense operator algebra on the truncated qubit ⊗ cavity space.
//!
//! Composite indices are qubit-major: `index = m * (n_max + 1) + i` for qubit
//! basis state `m` and Fock state `i`.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sizes of the truncated Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Highest retained Fock state.
    pub n_max: usize,
    /// Dimension of the qubit factor.
    pub q_dim: usize,
    /// Guard band used when exponentiating ladder operators. `None` picks
    /// `max(20, 4⌈|α|²⌉)` for each displacement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
}

impl TruncationSpec {
    pub fn new(n_max: usize, q_dim: usize) -> Result<Self> {
        let spec = TruncationSpec {
            n_max,
            q_dim,
            pad: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = Some(pad);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::invalid("n_max", "must be at least 1"));
        }
        if self.q_dim < 2 {
            return Err(Error::invalid("q_dim", "must be at least 2"));
        }
        Ok(())
    }

    #[inline]
    pub fn cavity_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Composite dimension `q_dim * (n_max + 1)`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.q_dim * self.cavity_dim()
    }

    #[inline]
    pub fn index(&self, qubit: usize, fock: usize) -> usize {
        qubit * self.cavity_dim() + fock
    }

    /// Guard band for a displacement of amplitude `amp`.
    pub fn pad_for(&self, amp: c64) -> usize {
        let auto = default_pad(amp);
        match self.pad {
            Some(p) => {
                if amp.norm_sqr() > p as f64 {
                    log::warn!(
                        "guard band {p} is smaller than |α|² = {:.3}; displacement accuracy degraded",
                        amp.norm_sqr()
                    );
                }
                p
            }
            None => auto,
        }
    }
}

fn default_pad(amp: c64) -> usize {
    let four_n = 4 * amp.norm_sqr().ceil() as usize;
    four_n.max(20)
}

/// A dense operator on the composite space together with its truncation.
#[derive(Clone, Debug)]
pub struct CompositeOperator {
    trunc: TruncationSpec,
    matrix: Mat<c64>,
    hermitian: bool,
}

impl CompositeOperator {
    /// Wraps a matrix, checking its dimension against `trunc`.
    pub fn new(matrix: Mat<c64>, trunc: TruncationSpec) -> Result<Self> {
        let d = trunc.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(CompositeOperator {
            trunc,
            matrix,
            hermitian: false,
        })
    }

    /// Wraps a matrix and marks it Hermitian if it is within `1e-12` of its
    /// adjoint relative to its largest entry.
    pub fn new_checked_hermitian(matrix: Mat<c64>, trunc: TruncationSpec) -> Result<Self> {
        let mut op = Self::new(matrix, trunc)?;
        op.hermitian = is_hermitian(op.matrix.as_ref(), 1e-12);
        Ok(op)
    }

    pub fn identity(trunc: TruncationSpec) -> Self {
        let d = trunc.dim();
        CompositeOperator {
            trunc,
            matrix: Mat::identity(d, d),
            hermitian: true,
        }
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        CompositeOperator {
            trunc: self.trunc,
            matrix: self.matrix.adjoint().to_owned(),
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, rhs: &CompositeOperator) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(CompositeOperator {
            trunc: self.trunc,
            matrix: &self.matrix * &rhs.matrix,
            hermitian: false,
        })
    }

    pub fn add(&self, rhs: &CompositeOperator) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(CompositeOperator {
            trunc: self.trunc,
            matrix: &self.matrix + &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn scale(&self, factor: c64) -> Self {
        let matrix = Mat::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * factor);
        CompositeOperator {
            trunc: self.trunc,
            matrix,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// True when `‖m − m†‖_max ≤ rel_tol · ‖m‖_max`.
pub fn is_hermitian(m: faer::MatRef<'_, c64>, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.norm_max().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for j in 0..n {
        for i in 0..=j {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Cavity lowering operator on `n_max + 1` Fock states.
pub fn ladder(n_max: usize) -> Mat<c64> {
    let n = n_max + 1;
    Mat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Kronecker product in qubit-major order.
pub fn kron(qubit_op: faer::MatRef<'_, c64>, cavity_op: faer::MatRef<'_, c64>) -> Mat<c64> {
    let nc = cavity_op.nrows();
    let mc = cavity_op.ncols();
    Mat::from_fn(qubit_op.nrows() * nc, qubit_op.ncols() * mc, |r, c| {
        qubit_op[(r / nc, c / mc)] * cavity_op[(r % nc, c % mc)]
    })
}

/// `I_qubit ⊗ c`.
pub fn annihilation(trunc: &TruncationSpec) -> CompositeOperator {
    let id = Mat::<c64>::identity(trunc.q_dim, trunc.q_dim);
    CompositeOperator {
        trunc: *trunc,
        matrix: kron(id.as_ref(), ladder(trunc.n_max).as_ref()),
        hermitian: false,
    }
}

/// `I_qubit ⊗ c†c`.
pub fn number(trunc: &TruncationSpec) -> CompositeOperator {
    let d = trunc.dim();
    let n = trunc.cavity_dim();
    CompositeOperator {
        trunc: *trunc,
        matrix: Mat::from_fn(d, d, |i, j| {
            if i == j {
                c64::new((i % n) as f64, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        }),
        hermitian: true,
    }
}

/// `qubit_op ⊗ cavity_op`, checking both factor dimensions.
pub fn embed(
    qubit_op: faer::MatRef<'_, c64>,
    cavity_op: faer::MatRef<'_, c64>,
    trunc: &TruncationSpec,
) -> Result<CompositeOperator> {
    for (found_r, found_c, expected) in [
        (qubit_op.nrows(), qubit_op.ncols(), trunc.q_dim),
        (cavity_op.nrows(), cavity_op.ncols(), trunc.cavity_dim()),
    ] {
        if found_r != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: found_r,
            });
        }
        if found_c != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: found_c,
            });
        }
    }
    let hermitian = is_hermitian(qubit_op, 1e-14) && is_hermitian(cavity_op, 1e-14);
    Ok(CompositeOperator {
        trunc: *trunc,
        matrix: kron(qubit_op, cavity_op),
        hermitian,
    })
}

/// `exp(amp·c† − amp*·c)` on `n_max + 1` Fock states, computed on
/// `n_max + 1 + pad` states and then truncated.
pub fn cavity_displacement(amp: c64, n_max: usize, pad: usize) -> Mat<c64> {
    let big = n_max + 1 + pad;
    let c = ladder(big - 1);
    let generator = Mat::from_fn(big, big, |i, j| amp * c[(j, i)].conj() - amp.conj() * c[(i, j)]);
    let full = expm(&generator);
    Mat::from_fn(n_max + 1, n_max + 1, |i, j| full[(i, j)])
}

/// Guard-banded displacement acting as identity on the qubit factor.
pub fn displacement_matrix(amp: c64, trunc: &TruncationSpec) -> Result<CompositeOperator> {
    if !(amp.re.is_finite() && amp.im.is_finite()) {
        return Err(Error::invalid("amp", "displacement amplitude must be finite"));
    }
    let pad = trunc.pad_for(amp);
    let cav = cavity_displacement(amp, trunc.n_max, pad);
    let id = Mat::<c64>::identity(trunc.q_dim, trunc.q_dim);
    Ok(CompositeOperator {
        trunc: *trunc,
        matrix: kron(id.as_ref(), cav.as_ref()),
        hermitian: false,
    })
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    // Scale so that ‖A/2^s‖₁ ≤ 1/2; 20 Taylor terms then reach round-off.
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let inv = 1.0 / 2f64.powi(squarings as i32);
    let scaled = Mat::from_fn(n, n, |i, j| a[(i, j)] * inv);

    let mut result = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..=20u32 {
        term = &term * &scaled;
        let f = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * f);
        result = &result + &term;
        if term.norm_max() < 1e-18 * result.norm_max() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `Tr(ρ · op)`.
pub fn expect(op: &CompositeOperator, rho: faer::MatRef<'_, c64>) -> Result<c64> {
    check_dim(op.dim(), rho.nrows())?;
    check_dim(op.dim(), rho.ncols())?;
    Ok(trace_product(rho, op.matrix.as_ref()))
}

/// `Tr(a · b)` without forming the product.
pub fn trace_product(a: faer::MatRef<'_, c64>, b: faer::MatRef<'_, c64>) -> c64 {
    let n = a.nrows();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n = 0..=n_max`.
pub fn coherent_amplitudes(alpha: c64, n_max: usize) -> Vec<c64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut amp = c64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=n_max {
        out.push(amp);
        amp = amp * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Projector `|ψ⟩⟨ψ|`.
pub fn projector(psi: &[c64]) -> Mat<c64> {
    let n = psi.len();
    Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj())
}
