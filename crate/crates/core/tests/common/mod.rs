//! Oracles and checks shared by the property and acceptance targets.
#![allow(dead_code)]

use faer::Mat;
use qframe::c64;
use qframe::device::{build_tls, build_transmon, displaced_coupling, SystemModel, TlsParams, TransmonParams};
use qframe::drive::{p_alpha_rate, p_displacement, DriveSpec, FrameMode};
use qframe::dynamics::{integrate, prepare_initial, FrameState, IntegratorConfig, Trajectory};
use qframe::fock::{CompositeOperator, TruncationSpec};
use qframe::spectrum::{diagonalize_joint, label_branches, LabelOptions};

pub const FRAMES: [FrameMode; 3] = [FrameMode::Lab, FrameMode::PFrame, FrameMode::QFrame];

pub fn tls(omega_q: f64, g: f64, kappa: f64, n_max: usize) -> SystemModel {
    build_tls(TlsParams { omega_q, g }, kappa, n_max).unwrap()
}

pub fn evolve(model: &SystemModel, drive: DriveSpec, mode: FrameMode, branch: usize, cfg: IntegratorConfig) -> Trajectory {
    let spec = label_branches(diagonalize_joint(model).unwrap(), model, LabelOptions::default()).unwrap();
    let init = prepare_initial(&spec, branch, model, mode).unwrap();
    integrate(&init, model, &drive, mode, &cfg).unwrap().into_result().unwrap()
}

pub fn cfg(t_end: f64, sample_dt: f64, rtol: f64) -> IntegratorConfig {
    IntegratorConfig {
        rtol,
        atol: rtol * 1e-2,
        t_end,
        sample_dt,
        ..IntegratorConfig::default()
    }
}

/// `⟨m|D(α)|n⟩` from the generalized-Laguerre closed form.
pub fn displacement_element(alpha: c64, m: usize, n: usize) -> c64 {
    let x = alpha.norm_sqr();
    let (lo, hi) = (m.min(n), m.max(n));
    let a = (hi - lo) as f64;
    // L_lo^{(a)}(x) by three-term recurrence
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    let lag = if lo == 0 {
        1.0
    } else {
        for k in 1..lo {
            let k = k as f64;
            let l2 = ((2.0 * k + 1.0 + a - x) * l1 - (k + a) * l0) / (k + 1.0);
            l0 = l1;
            l1 = l2;
        }
        l1
    };
    let ratio: f64 = (lo + 1..=hi).map(|k| 1.0 / (k as f64).sqrt()).product();
    let base = if m >= n { alpha } else { -alpha.conj() };
    base.powu((hi - lo) as u32) * ratio * lag * (-x / 2.0).exp()
}

/// Nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Largest deviation of the displaced coupling from `D† c D` built on a
/// 70-level space.
pub fn displaced_coupling_error(alpha: c64, phase: f64, g: f64, n_max: usize) -> f64 {
    let mut model = tls(0.75, g, 1e-3, n_max);
    model.coupling.u = c64::from_polar(g, phase);
    let fast = displaced_coupling(&model, alpha);

    let big = 70;
    let d_big = Mat::from_fn(big, big, |m, n| displacement_element(alpha, m, n));
    let c_big = Mat::from_fn(big, big, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let cd = d_big.adjoint() * &c_big * &d_big;
    let u = model.coupling.u;
    let nc = n_max + 1;
    let a = &model.coupling.a_q;
    let mut worst: f64 = 0.0;
    for r in 0..2 * nc {
        for s in 0..2 * nc {
            let (qm, i) = (r / nc, r % nc);
            let (qn, j) = (s / nc, s % nc);
            let cav = u * cd[(j, i)].conj() + u.conj() * cd[(i, j)];
            worst = worst.max((fast.matrix()[(r, s)] - a[(qm, qn)] * cav).norm());
        }
    }
    worst
}

/// `|𝒫(t+h) − 𝒫(t) − ∫ rate ds|` over `h = 1` with 20-point quadrature.
pub fn p_ode_residual(e: f64, wd: f64, kappa: f64, phase: f64, t: f64) -> f64 {
    let drive = DriveSpec { phase, ..DriveSpec::monochromatic(e, wd) };
    let p = |s: f64| p_displacement(&drive, 1.0, kappa, s);
    let rate = |s: f64| p_alpha_rate(p(s), 1.0, kappa, c64::from_polar(e, phase - wd * s));
    let h = 1.0;
    let integral: c64 = gauss_legendre(20)
        .into_iter()
        .map(|(x, w)| rate(t + 0.5 * h * (x + 1.0)) * (0.5 * h * w))
        .sum();
    (p(t + h) - p(t) - integral).norm()
}

pub struct Conservation {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub final_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn conservation(e: f64, wd: f64, g: f64, branch: usize, mode: FrameMode) -> Conservation {
    let model = tls(0.75, g, 7.2e-3, 8);
    let tr = evolve(&model, DriveSpec::monochromatic(e, wd), mode, branch, cfg(150.0, 10.0, 1e-8));
    let rho = &tr.final_state.rho_u;
    let final_defect = (0..rho.nrows())
        .flat_map(|i| (0..rho.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (rho[(i, j)] - rho[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    Conservation {
        trace_error: tr.diagnostics.max_trace_error,
        hermiticity_defect: tr.diagnostics.max_hermiticity_defect,
        final_defect,
        min_eigenvalue: tr.diagnostics.min_eigenvalue_final,
    }
}

/// `(flags a non-Hermitian matrix, accepts its Hermitian completion)`.
pub fn hermiticity_guard() -> (bool, bool) {
    let trunc = TruncationSpec::new(2, 2).unwrap();
    let mut m = Mat::<c64>::identity(6, 6);
    m[(0, 1)] = c64::new(0.0, 1.0);
    let flags = !CompositeOperator::new_checked_hermitian(m.clone(), trunc).unwrap().is_hermitian();
    m[(1, 0)] = c64::new(0.0, -1.0);
    let accepts = CompositeOperator::new_checked_hermitian(m, trunc).unwrap().is_hermitian();
    (flags, accepts)
}

/// With g = 0 the cavity is a driven damped oscillator: from vacuum it stays
/// coherent with amplitude 𝒫(t). Returns the largest deviation in photon
/// number, α (displaced frames) and real quadrature.
pub fn uncoupled_cavity_error(mode: FrameMode) -> f64 {
    let kappa = 7.2e-3;
    let drive = DriveSpec::monochromatic(2e-3, 1.003);
    let model = tls(0.75, 0.0, kappa, 14);
    let tr = evolve(&model, drive, mode, 0, cfg(600.0, 20.0, 1e-11));
    let mut worst: f64 = 0.0;
    for s in &tr.samples {
        let p = p_displacement(&drive, 1.0, kappa, s.t);
        worst = worst.max((s.photon_number - p.norm_sqr()).abs());
        if mode != FrameMode::Lab {
            worst = worst.max((s.alpha - p).norm());
        }
        let quad = 2.0 * (p * c64::from_polar(1.0, drive.omega_d * s.t)).re;
        worst = worst.max((s.real_quadrature - quad).abs());
    }
    worst
}

/// Largest `|α − 𝒫|` and `|⟨c⟩_U|` for an uncoupled q-frame run.
pub fn q_frame_drift() -> f64 {
    let kappa = 1.6e-3;
    let drive = DriveSpec::monochromatic(3e-3, 1.0015);
    let model = tls(0.75, 0.0, kappa, 3);
    let tr = evolve(&model, drive, FrameMode::QFrame, 0, cfg(2000.0, 50.0, 1e-13));
    tr.samples
        .iter()
        .map(|s| (s.alpha - p_displacement(&drive, 1.0, kappa, s.t)).norm().max(s.abs_c_u))
        .fold(0.0, f64::max)
}

/// Weak-drive TLS in all three frames. Returns the largest photon-number and
/// quadrature deviations from the lab frame, each divided by its tolerance
/// `max(1e-3, 1 % of peak)`.
pub fn cross_frame_ratio() -> f64 {
    let model_for = |n| tls(0.75, 0.03, 7.2e-3, n);
    let drive = DriveSpec::monochromatic(2e-3, 1.0);
    let c = cfg(3.0 / 7.2e-3, 20.0, 1e-9);
    let lab = evolve(&model_for(16), drive, FrameMode::Lab, 0, c);
    let p = evolve(&model_for(10), drive, FrameMode::PFrame, 0, c);
    let q = evolve(&model_for(5), drive, FrameMode::QFrame, 0, c);
    let peak = lab.samples.iter().map(|s| s.photon_number).fold(0.0, f64::max);
    let tol = (0.01 * peak).max(1e-3);
    let qpeak = lab.samples.iter().map(|s| s.real_quadrature.abs()).fold(0.0, f64::max);
    let qtol = (0.01 * qpeak).max(1e-3);
    let mut worst: f64 = 0.0;
    for other in [&p, &q] {
        assert_eq!(other.samples.len(), lab.samples.len());
        for (a, b) in lab.samples.iter().zip(&other.samples) {
            worst = worst.max((a.photon_number - b.photon_number).abs() / tol);
            worst = worst.max((a.real_quadrature - b.real_quadrature).abs() / qtol);
        }
    }
    worst
}

/// Largest drift of photon number and transmon occupation when the low
/// labeled eigenstates of a TLS and a transmon evolve undriven.
pub fn stationarity_drift() -> f64 {
    let transmon = build_transmon(
        TransmonParams { e_c: 0.05, e_j: 1.6, g: 0.03, n_g: 0.0, charge_cutoff: 10 },
        1e-12,
        6,
    )
    .unwrap()
    .in_qubit_eigenbasis(Some(5))
    .unwrap();
    let models = [tls(0.75, 0.03, 1e-12, 6), transmon];
    let mut worst: f64 = 0.0;
    for model in &models {
        let spec = label_branches(diagonalize_joint(model).unwrap(), model, LabelOptions::default()).unwrap();
        for branch in 0..2 {
            for n in 0..3 {
                let psi = spec.eigen.vector(spec.branches[branch].indices[n]);
                let rho = Mat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj());
                let init = FrameState { rho_u: rho, alpha: c64::new(0.0, 0.0), t: 0.0 };
                let tr = integrate(&init, model, &DriveSpec::monochromatic(0.0, 1.0), FrameMode::Lab, &cfg(200.0, 50.0, 1e-10))
                    .unwrap();
                let s0 = tr.samples[0];
                for s in &tr.samples {
                    worst = worst.max((s.photon_number - s0.photon_number).abs());
                    if let (Some(a), Some(b)) = (s.transmon_occupation, s0.transmon_occupation) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    worst
}
