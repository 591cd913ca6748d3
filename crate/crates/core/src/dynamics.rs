//! Coupled evolution of the transformed-frame density matrix `ρ_U` and the
//! displacement `α`.
//!
//! The generator is applied through the block structure of the model
//! (qubit operator ⊗ cavity ladder), never as dense `D × D` products. With
//! `rotating` enabled and a diagonal `h_q`, the state is integrated in the
//! interaction picture of `H_0 = h_q ⊗ I + ω_c I ⊗ c†c`, which removes the
//! fast free phases without changing the physics.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::device::{Device, SystemModel};
use crate::drive::{p_alpha_rate, q_alpha_rate, real_quadrature, DriveSpec, Field, FrameMode};
use crate::error::{Error, Result};
use crate::fock;
use crate::spectrum::LabeledSpectrum;

/// `ρ_U`, `α`, and `t`.
#[derive(Clone, Debug)]
pub struct FrameState {
    pub rho_u: Mat<c64>,
    pub alpha: c64,
    pub t: f64,
}

/// Dormand–Prince settings. Times are in units of `1/ω_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub max_steps: usize,
    /// Integrate in the interaction picture of the free Hamiltonian.
    pub rotating: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-10,
            h_max: 10.0,
            t_end: 100.0,
            sample_dt: 1.0,
            max_steps: 50_000_000,
            rotating: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive and finite, got {x}")))
            }
        };
        pos("rtol", self.rtol)?;
        pos("atol", self.atol)?;
        pos("h_init", self.h_init)?;
        pos("h_min", self.h_min)?;
        pos("h_max", self.h_max)?;
        pos("sample_dt", self.sample_dt)?;
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(Error::invalid("h_init", "need h_min ≤ h_init ≤ h_max"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be non-negative and finite"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be positive"));
        }
        Ok(())
    }
}

/// One output row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub kappa_t: f64,
    pub alpha: c64,
    pub photon_number: f64,
    pub real_quadrature: f64,
    pub abs_c_u: f64,
    /// `None` for two-level devices.
    pub transmon_occupation: Option<f64>,
    pub trace_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub max_abs_c_u: f64,
    pub max_trace_error: f64,
    /// Largest `‖ρ − ρ†‖_max` seen before Hermitization.
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue_final: f64,
    pub last_step: f64,
    pub rotating: bool,
    pub abort: Option<Abort>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub mode: FrameMode,
    pub samples: Vec<Sample>,
    pub diagnostics: Diagnostics,
    pub final_state: FrameState,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.diagnostics.abort.is_none()
    }

    /// Converts an aborted run into [`Error::IntegratorAbort`].
    pub fn into_result(self) -> Result<Self> {
        match &self.diagnostics.abort {
            Some(a) => Err(Error::IntegratorAbort {
                t: a.t,
                reason: a.reason.clone(),
            }),
            None => Ok(self),
        }
    }
}

/// Initial state `|p̃,0̃⟩⟨p̃,0̃|`. In the Q-frame, `α(0) = ⟨c⟩` and
/// `ρ_U = D†(α) ρ D(α)`, so that `⟨c⟩_U(0) = 0`.
pub fn prepare_initial(
    spec: &LabeledSpectrum,
    branch: usize,
    model: &SystemModel,
    mode: FrameMode,
) -> Result<FrameState> {
    let d = model.trunc.dim();
    if spec.eigen.trunc.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spec.eigen.trunc.dim(),
        });
    }
    let psi = spec.state(branch, 0)?;
    let n = model.trunc.cavity_dim();
    match mode {
        FrameMode::Lab | FrameMode::PFrame => Ok(FrameState {
            rho_u: fock::projector(&psi),
            alpha: c64::new(0.0, 0.0),
            t: 0.0,
        }),
        FrameMode::QFrame => {
            let mut alpha = c64::new(0.0, 0.0);
            for (r, z) in psi.iter().enumerate() {
                if r % n + 1 < n {
                    alpha += z.conj() * psi[r + 1] * ((r % n + 1) as f64).sqrt();
                }
            }
            let dm = fock::displacement_matrix(-alpha, &model.trunc)?;
            let m = dm.matrix();
            let mut shifted: Vec<c64> = (0..d)
                .map(|r| (0..d).map(|c| m[(r, c)] * psi[c]).sum())
                .collect();
            let norm = shifted.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            shifted.iter_mut().for_each(|z| *z /= norm);
            let rho_u = fock::projector(&shifted);
            let (c_u, _) = crate::drive::cavity_and_coupling_expectations(rho_u.as_ref(), model)?;
            if c_u.norm() > 1e-10 {
                log::warn!("Q-frame initial state has |⟨c⟩_U| = {:.3e}", c_u.norm());
            }
            Ok(FrameState { rho_u, alpha, t: 0.0 })
        }
    }
}

/// `(dρ_U/dt, dα/dt)` for the given frame.
pub fn rhs(
    state: &FrameState,
    model: &SystemModel,
    drive: &dyn Field,
    mode: FrameMode,
) -> Result<(Mat<c64>, c64)> {
    let kernel = Kernel::new(model, false)?;
    let d = kernel.d;
    check_square(&state.rho_u, d)?;
    let mut y = vec![c64::new(0.0, 0.0); d * d + 1];
    pack(&state.rho_u, state.alpha, &mut y);
    let mut dy = vec![c64::new(0.0, 0.0); d * d + 1];
    let mut ws = Workspace::new(d, kernel.q);
    kernel.eval(state.t, &y, &mut dy, &mut ws, drive, mode);
    Ok((Mat::from_fn(d, d, |r, c| dy[r * d + c]), dy[d * d]))
}

/// Lab-frame observables for one state.
pub fn observables_at(state: &FrameState, model: &SystemModel, omega_d: f64) -> Result<Sample> {
    let kernel = Kernel::new(model, false)?;
    check_square(&state.rho_u, kernel.d)?;
    let d = kernel.d;
    let rho: Vec<c64> = (0..d * d).map(|k| state.rho_u[(k / d, k % d)]).collect();
    Ok(kernel.sample(state.t, &rho, state.alpha, omega_d))
}

/// Integrates a monochromatic drive.
pub fn integrate(
    initial: &FrameState,
    model: &SystemModel,
    drive: &DriveSpec,
    mode: FrameMode,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    drive.validate()?;
    integrate_field(initial, model, drive, drive.omega_d, mode, config)
}

/// Integrates an arbitrary field `𝓔(t)`; `omega_d` only sets the
/// reference frequency of the reported quadrature.
pub fn integrate_field(
    initial: &FrameState,
    model: &SystemModel,
    drive: &dyn Field,
    omega_d: f64,
    mode: FrameMode,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    model.validate()?;
    let kernel = Kernel::new(model, config.rotating)?;
    let d = kernel.d;
    check_square(&initial.rho_u, d)?;
    let len = d * d + 1;
    let mut y = vec![c64::new(0.0, 0.0); len];
    pack(&initial.rho_u, initial.alpha, &mut y);
    if mode == FrameMode::Lab && initial.alpha != c64::new(0.0, 0.0) {
        return Err(Error::invalid("alpha", "lab frame requires α = 0"));
    }
    let t0 = initial.t;
    kernel.enter_rotating(t0, &mut y[..d * d]);

    let mut diag = Diagnostics {
        rotating: kernel.rotating,
        min_eigenvalue_final: f64::NAN,
        ..Diagnostics::default()
    };
    let mut samples = Vec::new();
    let mut ws = Workspace::new(d, kernel.q);
    let mut stepper = Dp5::new(len);
    let mut scratch = vec![c64::new(0.0, 0.0); d * d];

    let t_end = t0 + config.t_end;
    let mut next_sample_index = 0usize;
    let sample_time = |k: usize| t0 + k as f64 * config.sample_dt;
    let emit = |t: f64, yv: &[c64], samples: &mut Vec<Sample>, diag: &mut Diagnostics, scratch: &mut Vec<c64>| {
        scratch.copy_from_slice(&yv[..d * d]);
        kernel.leave_rotating(t, scratch);
        let s = kernel.sample(t, scratch, yv[d * d], omega_d);
        diag.max_abs_c_u = diag.max_abs_c_u.max(s.abs_c_u);
        diag.max_trace_error = diag.max_trace_error.max(s.trace_error);
        samples.push(s);
    };

    emit(t0, &y, &mut samples, &mut diag, &mut scratch);
    next_sample_index += 1;

    let mut t = t0;
    let mut h = config.h_init.min(config.h_max);
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    kernel.eval(t, &y, &mut stepper.k[0], &mut ws, drive, mode);
    diag.rhs_evaluations += 1;

    while t < t_end {
        if diag.accepted + diag.rejected >= config.max_steps {
            diag.abort = Some(Abort {
                t,
                reason: format!("step budget of {} exhausted", config.max_steps),
            });
            break;
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let err = stepper.step(&kernel, t, h, &y, &mut ws, drive, mode, config);
        diag.rhs_evaluations += 6;
        if !err.is_finite() {
            if h * 0.2 < config.h_min {
                diag.abort = Some(Abort {
                    t,
                    reason: "non-finite state".into(),
                });
                break;
            }
            h *= 0.2;
            diag.rejected += 1;
            rejected_last = true;
            continue;
        }
        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            // samples inside (t, t_new]
            while sample_time(next_sample_index) <= t_new + 1e-9 * config.sample_dt {
                let ts = sample_time(next_sample_index).min(t_end);
                let theta = ((ts - t) / h).clamp(0.0, 1.0);
                stepper.interpolate(&y, h, theta);
                let dense = std::mem::take(&mut stepper.dense);
                emit(ts, &dense, &mut samples, &mut diag, &mut scratch);
                stepper.dense = dense;
                next_sample_index += 1;
            }
            std::mem::swap(&mut y, &mut stepper.y_new);
            diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(hermitize(&mut y[..d * d], d));
            stepper.k.swap(0, 6);
            t = t_new;
            diag.accepted += 1;
            let expo = 0.2 - 0.04 * 0.75;
            let mut fac = 0.9 * err.max(1e-10).powf(-expo) * err_old.powf(0.04);
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            h = (h * fac).min(config.h_max);
            rejected_last = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            diag.rejected += 1;
            rejected_last = true;
        }
        if h < config.h_min && t < t_end {
            diag.abort = Some(Abort {
                t,
                reason: format!("step size {h:.3e} fell below h_min = {:.3e}", config.h_min),
            });
            break;
        }
    }
    if diag.abort.is_none() && samples.last().map(|s| s.t < t_end - 1e-9 * config.sample_dt).unwrap_or(true) {
        emit(t_end, &y, &mut samples, &mut diag, &mut scratch);
    }
    diag.last_step = h;

    kernel.leave_rotating(t, &mut y[..d * d]);
    let rho_u = Mat::from_fn(d, d, |r, c| y[r * d + c]);
    diag.min_eigenvalue_final = rho_u
        .self_adjoint_eigenvalues(Side::Lower)
        .ok()
        .and_then(|v| v.first().copied())
        .unwrap_or(f64::NAN);
    Ok(Trajectory {
        mode,
        samples,
        diagnostics: diag,
        final_state: FrameState {
            rho_u,
            alpha: y[d * d],
            t,
        },
    })
}

fn check_square(m: &Mat<c64>, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.nrows(),
        });
    }
    Ok(())
}

fn pack(rho: &Mat<c64>, alpha: c64, y: &mut [c64]) {
    let d = rho.nrows();
    for r in 0..d {
        for c in 0..d {
            y[r * d + c] = rho[(r, c)];
        }
    }
    y[d * d] = alpha;
}

/// Replaces `ρ` by `(ρ + ρ†)/2` and returns the defect it removed.
fn hermitize(rho: &mut [c64], d: usize) -> f64 {
    let mut defect: f64 = 0.0;
    for r in 0..d {
        let x = rho[r * d + r];
        defect = defect.max(x.im.abs());
        rho[r * d + r] = c64::new(x.re, 0.0);
        for c in r + 1..d {
            let a = rho[r * d + c];
            let b = rho[c * d + r];
            defect = defect.max((a - b.conj()).norm());
            let m = (a + b.conj()) * 0.5;
            rho[r * d + c] = m;
            rho[c * d + r] = m.conj();
        }
    }
    defect
}

struct Workspace {
    k: Vec<c64>,
    kt: Vec<c64>,
    /// `(I ⊗ B) ρ` with `B` the cavity part of the coupling.
    y: Vec<c64>,
    /// Phased `a_q`.
    amat: Mat<c64>,
}

impl Workspace {
    fn new(d: usize, q: usize) -> Self {
        Workspace {
            k: vec![c64::new(0.0, 0.0); d * d],
            kt: vec![c64::new(0.0, 0.0); d * d],
            y: vec![c64::new(0.0, 0.0); d * d],
            amat: Mat::zeros(q, q),
        }
    }
}

/// Structured generator for one model.
struct Kernel {
    q: usize,
    n: usize,
    d: usize,
    omega_c: f64,
    kappa: f64,
    u: c64,
    hq_dense: Mat<c64>,
    a_dense: Mat<c64>,
    /// `a_q` entries per row `(m', value)`.
    a_rows: Vec<Vec<(usize, c64)>>,
    /// `N_t` entries per row `(m', value)`, `None` for two-level devices.
    occupation: Option<Vec<Vec<(usize, c64)>>>,
    sqrt: Vec<f64>,
    /// Per column `(m', j)`: `j`, `√j`, and `√(j+1)` (zero at the cutoff).
    col_j: Vec<f64>,
    col_sqrt: Vec<f64>,
    col_sqrt1: Vec<f64>,
    rotating: bool,
    /// Diagonal of `h_q` when rotating.
    levels: Vec<f64>,
}

fn sparse_rows(m: &Mat<c64>, rel: f64) -> Vec<Vec<(usize, c64)>> {
    let q = m.nrows();
    let scale = (0..q)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max);
    (0..q)
        .map(|i| {
            (0..q)
                .filter(|&j| m[(i, j)].norm() > rel * scale)
                .map(|j| (j, m[(i, j)]))
                .collect()
        })
        .collect()
}

/// Interaction-picture phases at one time: `w = e^{iω_c t}` and
/// `pair[m·q + m'] = e^{i(E_m − E_m')t}`.
struct Phases {
    w: c64,
    pair: Vec<c64>,
}

impl Kernel {
    fn new(model: &SystemModel, rotating: bool) -> Result<Self> {
        model.validate()?;
        let q = model.trunc.q_dim;
        let n = model.trunc.cavity_dim();
        let d = q * n;
        let hq_rows = sparse_rows(&model.h_q, 1e-15);
        let a_rows = sparse_rows(&model.coupling.a_q, 1e-14);
        let diagonal = hq_rows.iter().enumerate().all(|(m, row)| row.iter().all(|(j, _)| *j == m));
        let rotating = rotating && diagonal;
        let levels = (0..q).map(|m| model.h_q[(m, m)].re).collect();
        let occupation = match model.device {
            Device::Tls(_) => None,
            _ => {
                let (_, v) = model.qubit_eigen()?;
                let nt = Mat::from_fn(q, q, |i, j| {
                    (1..q).map(|l| v[(i, l)] * v[(j, l)].conj() * l as f64).sum::<c64>()
                });
                Some(sparse_rows(&nt, 1e-14))
            }
        };
        Ok(Kernel {
            q,
            n,
            d,
            omega_c: model.omega_c,
            kappa: model.kappa,
            u: model.coupling.u,
            hq_dense: model.h_q.clone(),
            a_dense: model.coupling.a_q.clone(),
            a_rows,
            occupation,
            sqrt: (0..=n).map(|i| (i as f64).sqrt()).collect(),
            col_j: (0..d).map(|c| (c % n) as f64).collect(),
            col_sqrt: (0..d).map(|c| ((c % n) as f64).sqrt()).collect(),
            col_sqrt1: (0..d)
                .map(|c| if c % n + 1 < n { ((c % n + 1) as f64).sqrt() } else { 0.0 })
                .collect(),
            rotating,
            levels,
        })
    }

    fn phases(&self, t: f64) -> Phases {
        let q = self.q;
        if !self.rotating {
            return Phases {
                w: c64::new(1.0, 0.0),
                pair: vec![c64::new(1.0, 0.0); q * q],
            };
        }
        let p: Vec<c64> = self.levels.iter().map(|e| c64::from_polar(1.0, e * t)).collect();
        Phases {
            w: c64::from_polar(1.0, self.omega_c * t),
            pair: (0..q * q).map(|k| p[k / q] * p[k % q].conj()).collect(),
        }
    }

    /// `ρ → ρ_I`, `ρ_I[a,b] = e^{i(ω_a − ω_b)t} ρ[a,b]` with
    /// `ω_{(m,i)} = E_m + ω_c i`.
    fn enter_rotating(&self, t: f64, rho: &mut [c64]) {
        if self.rotating {
            self.apply_phase(t, rho, false);
        }
    }

    fn leave_rotating(&self, t: f64, rho: &mut [c64]) {
        if self.rotating {
            self.apply_phase(t, rho, true);
        }
    }

    fn apply_phase(&self, t: f64, rho: &mut [c64], inverse: bool) {
        let (n, d) = (self.n, self.d);
        let sign = if inverse { -1.0 } else { 1.0 };
        let p: Vec<c64> = (0..d)
            .map(|r| c64::from_polar(1.0, sign * (self.levels[r / n] + self.omega_c * (r % n) as f64) * t))
            .collect();
        for r in 0..d {
            for c in 0..d {
                rho[r * d + c] *= p[r] * p[c].conj();
            }
        }
    }

    /// Lab-frame `(Tr ρ c, Tr ρ (a_q ⊗ I))` from the integration variable.
    fn expectations(&self, rho: &[c64], ph: &Phases) -> (c64, c64) {
        let (q, n, d) = (self.q, self.n, self.d);
        let mut c_u = c64::new(0.0, 0.0);
        let mut a_u = c64::new(0.0, 0.0);
        for m in 0..q {
            for i in 0..n - 1 {
                let r = m * n + i;
                c_u += rho[(r + 1) * d + r] * self.sqrt[i + 1];
            }
            for &(mp, a) in &self.a_rows[m] {
                // Tr ρ A = Σ ρ[(m',i),(m,i)] a[m,m']
                let mut block = c64::new(0.0, 0.0);
                for i in 0..n {
                    block += rho[(mp * n + i) * d + m * n + i];
                }
                a_u += block * a * ph.pair[m * q + mp];
            }
        }
        (c_u * ph.w.conj(), a_u)
    }

    fn eval(&self, t: f64, y: &[c64], dy: &mut [c64], ws: &mut Workspace, drive: &dyn Field, mode: FrameMode) {
        let (q, n, d) = (self.q, self.n, self.d);
        let dd = d * d;
        let rho = &y[..dd];
        let alpha = y[dd];
        let field = drive.field(t);
        let ph = self.phases(t);
        let (c_u, a_u) = self.expectations(rho, &ph);
        let (mu, dalpha) = match mode {
            FrameMode::Lab => (field, c64::new(0.0, 0.0)),
            FrameMode::PFrame => (c64::new(0.0, 0.0), p_alpha_rate(alpha, self.omega_c, self.kappa, field)),
            FrameMode::QFrame => (
                -self.u * a_u - c64::new(self.omega_c, -self.kappa / 2.0) * c_u,
                q_alpha_rate(alpha, c_u, a_u, self.u, self.omega_c, self.kappa, field),
            ),
        };
        let s = 2.0 * (self.u.conj() * alpha).re;
        let up = self.u * ph.w;
        let dn = self.u.conj() * ph.w.conj();

        // K = H ρ, with H_0 omitted when rotating. The coupling factorizes as
        // (A ⊗ I)(I ⊗ B) ρ with B = s + u w c† + u* w* c.
        let yb = &mut ws.y;
        for r in 0..d {
            let i = r % n;
            let out = &mut yb[r * d..(r + 1) * d];
            let cur = &rho[r * d..(r + 1) * d];
            let bu = up * self.sqrt[i];
            let bd = dn * self.sqrt[(i + 1).min(n)];
            match (i > 0, i + 1 < n) {
                (true, true) => {
                    let lo = &rho[(r - 1) * d..r * d];
                    let hi = &rho[(r + 1) * d..(r + 2) * d];
                    for (((o, c), l), h) in out.iter_mut().zip(cur).zip(lo).zip(hi) {
                        *o = c * s + bu * l + bd * h;
                    }
                }
                (false, true) => {
                    let hi = &rho[(r + 1) * d..(r + 2) * d];
                    for ((o, c), h) in out.iter_mut().zip(cur).zip(hi) {
                        *o = c * s + bd * h;
                    }
                }
                (true, false) => {
                    let lo = &rho[(r - 1) * d..r * d];
                    for ((o, c), l) in out.iter_mut().zip(cur).zip(lo) {
                        *o = c * s + bu * l;
                    }
                }
                (false, false) => {
                    for (o, c) in out.iter_mut().zip(cur) {
                        *o = c * s;
                    }
                }
            }
        }
        for m in 0..q {
            for mp in 0..q {
                ws.amat[(m, mp)] = self.a_dense[(m, mp)] * ph.pair[m * q + mp];
            }
        }
        let k = &mut ws.k;
        {
            let nd = n * d;
            let mut kv = faer::MatMut::from_row_major_slice_mut(&mut k[..], q, nd);
            let yv = faer::MatRef::from_row_major_slice(&yb[..], q, nd);
            matmul(kv.as_mut(), Accum::Replace, ws.amat.as_ref(), yv, c64::new(1.0, 0.0), Par::Seq);
            if !self.rotating {
                let rv = faer::MatRef::from_row_major_slice(rho, q, nd);
                matmul(kv.as_mut(), Accum::Add, self.hq_dense.as_ref(), rv, c64::new(1.0, 0.0), Par::Seq);
            }
        }
        if !self.rotating {
            for r in 0..d {
                let i = r % n;
                if i > 0 {
                    axpy_real(&mut k[r * d..(r + 1) * d], self.omega_c * i as f64, &rho[r * d..(r + 1) * d]);
                }
            }
        }
        // kt = K†
        const B: usize = 32;
        let kt = &mut ws.kt;
        for rb in (0..d).step_by(B) {
            for cb in (0..d).step_by(B) {
                for r in rb..(rb + B).min(d) {
                    for c in cb..(cb + B).min(d) {
                        kt[r * d + c] = k[c * d + r].conj();
                    }
                }
            }
        }

        let im = c64::i();
        let mu_i = mu * ph.w;
        let imu = im * mu_i;
        let imc = im * mu_i.conj();
        let driven = mu != c64::new(0.0, 0.0);
        let half_kappa = 0.5 * self.kappa;
        let (cj, csq, csq1) = (&self.col_j, &self.col_sqrt, &self.col_sqrt1);
        for r in 0..d {
            let i = r % n;
            let out = &mut dy[r * d..(r + 1) * d];
            let krow = &k[r * d..(r + 1) * d];
            let ktrow = &kt[r * d..(r + 1) * d];
            let rrow = &rho[r * d..(r + 1) * d];
            let fi = i as f64;
            // −i(K − K†) − (κ/2)(i + j)ρ
            for ((((o, kj), ktj), rj), j) in out.iter_mut().zip(krow).zip(ktrow).zip(rrow).zip(cj) {
                *o = im * (ktj - kj) - *rj * (half_kappa * (fi + j));
            }
            if i + 1 < n {
                let ru = &rho[(r + 1) * d..(r + 2) * d];
                // κ cρc†
                let kf = self.kappa * self.sqrt[i + 1];
                for ((o, s1), rj) in out[..d - 1].iter_mut().zip(&csq1[..d - 1]).zip(&ru[1..]) {
                    *o += *rj * (kf * s1);
                }
                if driven {
                    let f = imc * self.sqrt[i + 1];
                    for (o, rj) in out.iter_mut().zip(ru) {
                        *o -= f * rj;
                    }
                }
            }
            if driven {
                if i > 0 {
                    let f = imu * self.sqrt[i];
                    for (o, rj) in out.iter_mut().zip(&rho[(r - 1) * d..r * d]) {
                        *o -= f * rj;
                    }
                }
                // iμ ρc† + iμ* ρc
                for ((o, s1), rj) in out[..d - 1].iter_mut().zip(&csq1[..d - 1]).zip(&rrow[1..]) {
                    *o += imu * (*rj * s1);
                }
                for ((o, s0), rj) in out[1..].iter_mut().zip(&csq[1..]).zip(&rrow[..d - 1]) {
                    *o += imc * (*rj * s0);
                }
            }
        }
        dy[dd] = dalpha;
    }

    fn sample(&self, t: f64, rho: &[c64], alpha: c64, omega_d: f64) -> Sample {
        let (n, d) = (self.n, self.d);
        let (c_u, _) = self.expectations(rho, &self.phases(0.0));
        let mut n_u = 0.0;
        let mut trace = 0.0;
        for r in 0..d {
            let p = rho[r * d + r].re;
            trace += p;
            n_u += p * (r % n) as f64;
        }
        let transmon_occupation = self.occupation.as_ref().map(|rows| {
            let mut acc = c64::new(0.0, 0.0);
            for (m, row) in rows.iter().enumerate() {
                for &(mp, x) in row {
                    let mut block = c64::new(0.0, 0.0);
                    for i in 0..n {
                        block += rho[(mp * n + i) * d + m * n + i];
                    }
                    acc += block * x;
                }
            }
            acc.re
        });
        let c_lab = c_u + alpha;
        Sample {
            t,
            kappa_t: self.kappa * t,
            alpha,
            photon_number: crate::drive::lab_photon_number(n_u, c_u, alpha),
            real_quadrature: real_quadrature(c_lab, omega_d, t),
            abs_c_u: c_u.norm(),
            transmon_occupation,
            trace_error: (trace - 1.0).abs(),
        }
    }
}

#[inline]
fn axpy_real(y: &mut [c64], a: f64, x: &[c64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

// Dormand–Prince 5(4) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Dp5 {
    k: [Vec<c64>; 7],
    stage: Vec<c64>,
    y_new: Vec<c64>,
    dense: Vec<c64>,
}

impl Dp5 {
    fn new(len: usize) -> Self {
        let z = || vec![c64::new(0.0, 0.0); len];
        Dp5 {
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            y_new: z(),
            dense: z(),
        }
    }

    /// One trial step from `(t, y)` with `k[0] = f(t, y)`. Returns the
    /// scaled RMS error; `y_new` and `k[6]` hold the candidate.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        kernel: &Kernel,
        t: f64,
        h: f64,
        y: &[c64],
        ws: &mut Workspace,
        drive: &dyn Field,
        mode: FrameMode,
        cfg: &IntegratorConfig,
    ) -> f64 {
        let len = y.len();
        let stages: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in stages.iter().enumerate() {
            self.stage.copy_from_slice(y);
            for (j, aj) in a.iter().enumerate() {
                axpy_real(&mut self.stage, h * aj, &self.k[j]);
            }
            let (_, rest) = self.k.split_at_mut(s + 1);
            kernel.eval(t + c * h, &self.stage, &mut rest[0], ws, drive, mode);
        }
        self.y_new.copy_from_slice(y);
        for (j, bj) in [(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)] {
            axpy_real(&mut self.y_new, h * bj, &self.k[j]);
        }
        let (_, last) = self.k.split_at_mut(6);
        kernel.eval(t + h, &self.y_new, &mut last[0], ws, drive, mode);
        self.stage.iter_mut().for_each(|x| *x = c64::new(0.0, 0.0));
        for (j, ej) in [(0, E1), (2, E3), (3, E4), (4, E5), (5, E6), (6, E7)] {
            axpy_real(&mut self.stage, h * ej, &self.k[j]);
        }
        let mut sum = 0.0;
        for ((e, a), b) in self.stage.iter().zip(y).zip(&self.y_new) {
            let sc_re = cfg.atol + cfg.rtol * a.re.abs().max(b.re.abs());
            let sc_im = cfg.atol + cfg.rtol * a.im.abs().max(b.im.abs());
            sum += (e.re / sc_re).powi(2) + (e.im / sc_im).powi(2);
        }
        (sum / (2 * len) as f64).sqrt()
    }

    /// Dense output at `t + θh` for the step just accepted into `y_new`.
    fn interpolate(&mut self, y: &[c64], h: f64, theta: f64) {
        let k = &self.k;
        let th1 = 1.0 - theta;
        for idx in 0..y.len() {
            let y0 = y[idx];
            let ydiff = self.y_new[idx] - y0;
            let bspl = k[0][idx] * h - ydiff;
            let r4 = ydiff - k[6][idx] * h - bspl;
            let r5 = (k[0][idx] * D1
                + k[2][idx] * D3
                + k[3][idx] * D4
                + k[4][idx] * D5
                + k[5][idx] * D6
                + k[6][idx] * D7)
                * h;
            self.dense[idx] = y0 + (ydiff + (bspl + (r4 + r5 * th1) * theta) * th1) * theta;
        }
    }
}

/// Samples of a labeled branch as a function of photon number, for overlay
/// against dynamics.
pub fn branch_reference(spec: &LabeledSpectrum, branch: usize) -> Result<Vec<(f64, f64)>> {
    let b = spec.branch(branch)?;
    Ok(b.photon_number
        .iter()
        .zip(&b.transmon_occupation)
        .take(b.n_reliable + 1)
        .map(|(x, y)| (*x, *y))
        .collect())
}

/// Closed-form `𝒫(t)` series, mainly for comparisons.
pub fn p_series(drive: &DriveSpec, model: &SystemModel, times: &[f64]) -> Vec<c64> {
    times
        .iter()
        .map(|t| crate::drive::p_displacement(drive, model.omega_c, model.kappa, *t))
        .collect()
}
