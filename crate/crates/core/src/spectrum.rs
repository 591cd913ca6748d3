//! Joint spectrum of `H_qc`, branch labeling, and dispersive quantities.
//!
//! Branches are labeled by largest overlap: `|p̃,0̃⟩` is the eigenvector
//! closest to `|p⟩_q|0⟩_c`, and `|p̃,ñ+1⟩` the one closest to
//! `c†|p̃,ñ⟩`. Overlaps are squared moduli of normalized inner products, so
//! an overlap above one half is necessarily the unique maximum.

use std::io::Write;
use std::path::Path;

use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use serde::{Serialize, Serializer};

use crate::device::{Device, SystemModel};
use crate::error::{Error, Result};
use crate::fock::TruncationSpec;

/// Largest composite dimension handled by the dense eigensolver by default.
pub const DEFAULT_DENSE_CEILING: usize = 6000;

/// Overlap at or below which a label is no longer trusted.
pub const RELIABLE_OVERLAP: f64 = 0.5;

/// Two seed overlaps closer than this are reported as ambiguous.
pub const SEED_AMBIGUITY: f64 = 1e-6;

#[derive(Clone, Debug)]
enum Vectors {
    /// Eigenvectors of the gauge-rotated real Hamiltonian; Fock component
    /// `i` picks up `e^{iφi}` on the way back.
    Real { vectors: Mat<f64>, phase: f64 },
    Complex(Mat<c64>),
}

/// Full eigendecomposition of `H_qc`, energies ascending.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub trunc: TruncationSpec,
    pub energies: Vec<f64>,
    vectors: Vectors,
}

impl Eigenpairs {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Eigenvector `k` in the model's original basis.
    pub fn vector(&self, k: usize) -> Vec<c64> {
        let n = self.trunc.cavity_dim();
        match &self.vectors {
            Vectors::Real { vectors, phase } => (0..vectors.nrows())
                .map(|r| c64::from_polar(vectors[(r, k)], *phase * (r % n) as f64))
                .collect(),
            Vectors::Complex(v) => (0..v.nrows()).map(|r| v[(r, k)]).collect(),
        }
    }

    /// All eigenvectors as columns of a complex matrix.
    pub fn vectors(&self) -> Mat<c64> {
        let d = self.trunc.dim();
        let n = self.trunc.cavity_dim();
        match &self.vectors {
            Vectors::Real { vectors, phase } => Mat::from_fn(d, d, |r, k| {
                c64::from_polar(vectors[(r, k)], *phase * (r % n) as f64)
            }),
            Vectors::Complex(v) => v.clone(),
        }
    }

    /// `Σ_k |⟨v_k|w⟩|²`-style overlaps are evaluated in the solver gauge;
    /// `w` must be expressed in that gauge too.
    fn overlap(&self, k: usize, w: &GaugeVec) -> f64 {
        match (&self.vectors, w) {
            (Vectors::Real { vectors, .. }, GaugeVec::Real(w)) => {
                let col = vectors.col(k);
                let mut acc = 0.0;
                for (r, x) in w.iter().enumerate() {
                    acc += col[r] * x;
                }
                acc * acc
            }
            (Vectors::Complex(v), GaugeVec::Complex(w)) => {
                let col = v.col(k);
                let mut acc = c64::new(0.0, 0.0);
                for (r, x) in w.iter().enumerate() {
                    acc += col[r].conj() * x;
                }
                acc.norm_sqr()
            }
            _ => unreachable!("gauge mismatch"),
        }
    }

    fn gauge_column(&self, k: usize) -> GaugeVec {
        match &self.vectors {
            Vectors::Real { vectors, .. } => {
                GaugeVec::Real((0..vectors.nrows()).map(|r| vectors[(r, k)]).collect())
            }
            Vectors::Complex(v) => GaugeVec::Complex((0..v.nrows()).map(|r| v[(r, k)]).collect()),
        }
    }

    fn gauge_product_state(&self, qubit: &[c64], fock: usize) -> GaugeVec {
        let n = self.trunc.cavity_dim();
        let d = self.trunc.dim();
        match &self.vectors {
            Vectors::Real { phase, .. } => {
                // qubit eigenvectors of a real h_q are real up to a global phase
                let global = qubit
                    .iter()
                    .copied()
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .map(|z| z.conj() / z.norm())
                    .unwrap_or(c64::new(1.0, 0.0));
                let rot = c64::from_polar(1.0, -phase * fock as f64);
                let mut v = vec![0.0; d];
                for (m, a) in qubit.iter().enumerate() {
                    v[m * n + fock] = (a * global * rot).re;
                }
                GaugeVec::Real(v)
            }
            Vectors::Complex(_) => {
                let mut v = vec![c64::new(0.0, 0.0); d];
                for (m, a) in qubit.iter().enumerate() {
                    v[m * n + fock] = *a;
                }
                GaugeVec::Complex(v)
            }
        }
    }
}

enum GaugeVec {
    Real(Vec<f64>),
    Complex(Vec<c64>),
}

impl GaugeVec {
    /// `c†` in qubit-major order, then normalized. Returns the norm before
    /// normalization.
    fn raise(&self, n: usize) -> (GaugeVec, f64) {
        fn shift<T: Copy + Default + std::ops::Mul<f64, Output = T>>(v: &[T], n: usize) -> Vec<T> {
            let mut out = vec![T::default(); v.len()];
            for (r, slot) in out.iter_mut().enumerate() {
                let i = r % n;
                if i > 0 {
                    *slot = v[r - 1] * (i as f64).sqrt();
                }
            }
            out
        }
        match self {
            GaugeVec::Real(v) => {
                let mut w = shift(v, n);
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    w.iter_mut().for_each(|x| *x /= norm);
                }
                (GaugeVec::Real(w), norm)
            }
            GaugeVec::Complex(v) => {
                let mut w = shift(v, n);
                let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    w.iter_mut().for_each(|x| *x /= norm);
                }
                (GaugeVec::Complex(w), norm)
            }
        }
    }
}

/// Diagonalizes `H_qc` with the default dense ceiling.
pub fn diagonalize_joint(model: &SystemModel) -> Result<Eigenpairs> {
    diagonalize_joint_with_ceiling(model, DEFAULT_DENSE_CEILING)
}

/// Diagonalizes `H_qc`. When `h_q` and `a_q` are real, the Fock basis is
/// rotated by `e^{−iφn}` with `φ = arg u` so the problem becomes real
/// symmetric.
pub fn diagonalize_joint_with_ceiling(model: &SystemModel, ceiling: usize) -> Result<Eigenpairs> {
    let trunc = model.trunc;
    let d = trunc.dim();
    if d > ceiling {
        return Err(Error::TooLarge { dim: d, ceiling });
    }
    let n = trunc.cavity_dim();
    let hq = &model.h_q;
    let a = &model.coupling.a_q;
    let u = model.coupling.u;
    let wc = model.omega_c;
    let real = (0..trunc.q_dim).all(|i| {
        (0..trunc.q_dim).all(|j| hq[(i, j)].im == 0.0 && a[(i, j)].im == 0.0)
    });

    if real {
        let g = u.norm();
        let phase = if g > 0.0 { u.arg() } else { 0.0 };
        let h = Mat::<f64>::from_fn(d, d, |r, c| {
            let (m, i) = (r / n, r % n);
            let (mp, j) = (c / n, c % n);
            let mut x = 0.0;
            if i == j {
                x += hq[(m, mp)].re;
                if m == mp {
                    x += wc * i as f64;
                }
            } else if i.abs_diff(j) == 1 {
                x += a[(m, mp)].re * g * (i.max(j) as f64).sqrt();
            }
            x
        });
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let energies = (0..d).map(|k| evd.S()[k]).collect();
        Ok(Eigenpairs {
            trunc,
            energies,
            vectors: Vectors::Real {
                vectors: evd.U().to_owned(),
                phase,
            },
        })
    } else {
        let h = model.joint_hamiltonian();
        let evd = h
            .matrix()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let energies = (0..d).map(|k| evd.S()[k].re).collect();
        Ok(Eigenpairs {
            trunc,
            energies,
            vectors: Vectors::Complex(evd.U().to_owned()),
        })
    }
}

/// One labeled branch `|p̃, ñ⟩`, `n = 0, 1, …`.
#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    /// Index of the qubit eigenstate `|p⟩_q` (0 = g, 1 = e, …).
    pub qubit_level: usize,
    /// Eigenvector index for each `n`.
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// Overlap used to pick each label.
    pub overlaps: Vec<f64>,
    /// Highest `n` whose label and all predecessors have overlap > 1/2.
    pub n_reliable: usize,
    /// `⟨N_t⟩` in each labeled state.
    pub transmon_occupation: Vec<f64>,
    /// `⟨c†c⟩` in each labeled state.
    pub photon_number: Vec<f64>,
}

impl Branch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Labeled eigenstates of `H_qc`.
#[derive(Clone, Debug)]
pub struct LabeledSpectrum {
    pub eigen: Eigenpairs,
    pub branches: Vec<Branch>,
    pub qubit_energies: Vec<f64>,
}

impl LabeledSpectrum {
    pub fn branch(&self, p: usize) -> Result<&Branch> {
        self.branches
            .iter()
            .find(|b| b.qubit_level == p)
            .ok_or(Error::MissingLabel { branch: p, needed: 0 })
    }

    /// `ε_{p,n}`.
    pub fn energy(&self, p: usize, n: usize) -> Result<f64> {
        let b = self.branch(p)?;
        b.energies
            .get(n)
            .copied()
            .ok_or(Error::MissingLabel { branch: p, needed: n })
    }

    /// `|p̃, ñ⟩` in the model basis.
    pub fn state(&self, p: usize, n: usize) -> Result<Vec<c64>> {
        let b = self.branch(p)?;
        let k = *b
            .indices
            .get(n)
            .ok_or(Error::MissingLabel { branch: p, needed: n })?;
        Ok(self.eigen.vector(k))
    }
}

/// Labeling options.
#[derive(Clone, Copy, Debug)]
pub struct LabelOptions {
    /// Number of qubit levels to follow, starting from the ground state.
    pub branches: usize,
    /// Stop after this photon label (defaults to `n_max`).
    pub n_stop: Option<usize>,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            branches: 2,
            n_stop: None,
        }
    }
}

/// Labels branches `p = 0..opts.branches` by recursive largest overlap.
pub fn label_branches(
    eigen: Eigenpairs,
    model: &SystemModel,
    opts: LabelOptions,
) -> Result<LabeledSpectrum> {
    let trunc = model.trunc;
    if eigen.trunc != trunc {
        return Err(Error::DimensionMismatch {
            expected: trunc.dim(),
            found: eigen.trunc.dim(),
        });
    }
    let (qubit_energies, qubit_vecs) = model.qubit_eigen()?;
    if qubit_energies.len() >= 2 {
        let wq = qubit_energies[1] - qubit_energies[0];
        let ratio = (model.g() / (model.omega_c - wq)).abs();
        if ratio >= 0.5 {
            log::warn!("outside the dispersive regime: |g/(ω_c − ω_q)| = {ratio:.3}; labels may be unreliable");
        }
    }
    let n_branches = opts.branches.min(trunc.q_dim);
    let n_cav = trunc.cavity_dim();
    let d = trunc.dim();
    let n_stop = opts.n_stop.unwrap_or(trunc.n_max).min(trunc.n_max);
    let mut consumed = vec![false; d];

    // seeds, ascending in qubit energy
    let mut seeds = Vec::with_capacity(n_branches);
    for p in 0..n_branches {
        let qv: Vec<c64> = (0..trunc.q_dim).map(|m| qubit_vecs[(m, p)]).collect();
        let target = eigen.gauge_product_state(&qv, 0);
        let mut scored: Vec<(usize, f64)> = (0..d)
            .filter(|k| !consumed[*k])
            .map(|k| (k, eigen.overlap(k, &target)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        if scored.len() >= 2 && scored[0].1 - scored[1].1 < SEED_AMBIGUITY {
            let best = scored[0].1;
            let candidates = scored
                .iter()
                .take_while(|(_, o)| best - o < SEED_AMBIGUITY)
                .copied()
                .collect();
            return Err(Error::AmbiguousSeed {
                branch: p,
                candidates,
            });
        }
        let (k, o) = scored[0];
        consumed[k] = true;
        seeds.push((p, k, o));
    }

    let mut order: Vec<_> = seeds.clone();
    order.sort_by(|a, b| eigen.energies[a.1].total_cmp(&eigen.energies[b.1]));

    let mut branches = Vec::with_capacity(n_branches);
    for (p, k0, o0) in order {
        let mut indices = vec![k0];
        let mut overlaps = vec![o0];
        let mut current = eigen.gauge_column(k0);
        for _n in 1..=n_stop {
            let (w, norm) = current.raise(n_cav);
            if norm < 1e-12 {
                break;
            }
            let target_e = eigen.energies[*indices.last().unwrap()] + model.omega_c;
            match best_overlap(&eigen, &w, target_e, &consumed) {
                Some((k, o)) => {
                    consumed[k] = true;
                    indices.push(k);
                    overlaps.push(o);
                    current = eigen.gauge_column(k);
                }
                None => break,
            }
        }
        let first_bad = overlaps.iter().position(|o| *o <= RELIABLE_OVERLAP);
        let n_reliable = match first_bad {
            Some(0) => 0,
            Some(pos) => pos - 1,
            None => overlaps.len() - 1,
        };
        let energies = indices.iter().map(|k| eigen.energies[*k]).collect();
        let (transmon_occupation, photon_number) = indices
            .iter()
            .map(|k| state_moments(&eigen.vector(*k), &qubit_vecs, n_cav))
            .unzip();
        branches.push(Branch {
            qubit_level: p,
            indices,
            energies,
            overlaps,
            n_reliable,
            transmon_occupation,
            photon_number,
        });
    }
    branches.sort_by_key(|b| b.qubit_level);
    Ok(LabeledSpectrum {
        eigen,
        branches,
        qubit_energies,
    })
}

/// Exact argmax of the overlap over unconsumed eigenvectors. Candidates are
/// visited in order of energy distance to `target_e`; the search stops once
/// the best overlap exceeds the weight not yet visited. Ties go to the
/// lower energy.
fn best_overlap(
    eigen: &Eigenpairs,
    w: &GaugeVec,
    target_e: f64,
    consumed: &[bool],
) -> Option<(usize, f64)> {
    let d = eigen.len();
    // eigenvalues are sorted: walk outwards from the insertion point
    let start = eigen.energies.partition_point(|e| *e < target_e);
    let (mut lo, mut hi) = (start as isize - 1, start);
    let mut remaining = 1.0;
    let mut best: Option<(usize, f64)> = None;
    while lo >= 0 || hi < d {
        let take_hi = if lo < 0 {
            true
        } else if hi >= d {
            false
        } else {
            (eigen.energies[hi] - target_e).abs() <= (target_e - eigen.energies[lo as usize]).abs()
        };
        let k = if take_hi {
            hi += 1;
            hi - 1
        } else {
            lo -= 1;
            (lo + 1) as usize
        };
        let o = eigen.overlap(k, w);
        remaining -= o;
        if !consumed[k] {
            best = match best {
                Some((bk, bo)) if bo > o || (bo == o && eigen.energies[bk] <= eigen.energies[k]) => {
                    Some((bk, bo))
                }
                _ => Some((k, o)),
            };
        }
        if let Some((_, bo)) = best {
            // margin covers round-off in the running sum
            if bo > remaining + 1e-12 {
                break;
            }
        }
    }
    best
}

/// `(⟨N_t⟩, ⟨c†c⟩)` for a composite state; `N_t = Σ_l l |l⟩⟨l|` in the
/// eigenbasis of `H_q`.
pub fn state_moments(psi: &[c64], qubit_vecs: &Mat<c64>, n_cav: usize) -> (f64, f64) {
    let q = qubit_vecs.nrows();
    let mut occupation = 0.0;
    for l in 1..qubit_vecs.ncols() {
        let mut weight = 0.0;
        for i in 0..n_cav {
            let mut amp = c64::new(0.0, 0.0);
            for m in 0..q {
                amp += qubit_vecs[(m, l)].conj() * psi[m * n_cav + i];
            }
            weight += amp.norm_sqr();
        }
        occupation += l as f64 * weight;
    }
    let photons = psi
        .iter()
        .enumerate()
        .map(|(r, z)| (r % n_cav) as f64 * z.norm_sqr())
        .sum();
    (occupation, photons)
}

/// `ε_{p,n+1} − ε_{p,n}` for `n < n_reliable`.
pub fn cavity_frequency_curve(spec: &LabeledSpectrum, p: usize) -> Result<Vec<f64>> {
    let b = spec.branch(p)?;
    if b.n_reliable < 2 {
        return Err(Error::MissingLabel { branch: p, needed: 2 });
    }
    Ok(b.energies[..=b.n_reliable]
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect())
}

/// `(ω′_c, χ)` from `ε_{g,1} − ε_{g,0} = ω′_c + χ`, `ε_{e,1} − ε_{e,0} = ω′_c − χ`.
pub fn dispersive_quantities(spec: &LabeledSpectrum) -> Result<(f64, f64)> {
    let gap = |p: usize| -> Result<f64> {
        let b = spec.branch(p)?;
        if b.energies.len() < 2 {
            return Err(Error::MissingLabel { branch: p, needed: 1 });
        }
        Ok(b.energies[1] - b.energies[0])
    };
    let (gg, ge) = (gap(0)?, gap(1)?);
    Ok(((gg + ge) / 2.0, (gg - ge) / 2.0))
}

/// A photon-number scale that may be unbounded (e.g. `n_c` at `g = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonScale(pub f64);

impl PhotonScale {
    pub fn is_unbounded(&self) -> bool {
        !self.0.is_finite()
    }
}

impl Serialize for PhotonScale {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_unbounded() {
            s.serialize_str("unbounded")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// Perturbative cavity renormalization, dispersive shift, and critical
/// photon number.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbativeEstimates {
    pub omega_c_ren_pert: f64,
    pub chi_pert: f64,
    pub n_crit: PhotonScale,
}

const RESONANCE_EPS: f64 = 1e-12;

/// TLS: `χ_p = g²/(ω_c − ω_q)`, `n_c = (ω_q − ω_c)²/4g²`, `ω′_{c,p} = ω_c`.
/// Transmon, with `ω_q = √(8E_J E_C) − E_C` and `δ = ω_c − ω_q + E_C`:
/// `ω′_{c,p} − ω_c = g²/δ`, `χ_p = g² E_C/((ω_c − ω_q) δ)`,
/// `n_c = (δ²/4g² − 1)/3`.
pub fn perturbative_estimates(model: &SystemModel) -> Result<PerturbativeEstimates> {
    let wc = model.omega_c;
    match model.device {
        Device::Tls(p) => {
            let delta = wc - p.omega_q;
            if delta.abs() < RESONANCE_EPS {
                return Err(Error::ResonantDenominator("ω_c − ω_q"));
            }
            let g2 = p.g * p.g;
            let n_crit = if g2 == 0.0 {
                f64::INFINITY
            } else {
                delta * delta / (4.0 * g2)
            };
            Ok(PerturbativeEstimates {
                omega_c_ren_pert: wc,
                chi_pert: g2 / delta,
                n_crit: PhotonScale(n_crit),
            })
        }
        Device::Transmon(p) => {
            let wq = (8.0 * p.e_j * p.e_c).sqrt() - p.e_c;
            let delta = wc - wq;
            let shifted = delta + p.e_c;
            if delta.abs() < RESONANCE_EPS {
                return Err(Error::ResonantDenominator("ω_c − ω_q"));
            }
            if shifted.abs() < RESONANCE_EPS {
                return Err(Error::ResonantDenominator("ω_c − ω_q + E_C"));
            }
            let g2 = p.g * p.g;
            let n_crit = if g2 == 0.0 {
                f64::INFINITY
            } else {
                (shifted * shifted / (4.0 * g2) - 1.0) / 3.0
            };
            Ok(PerturbativeEstimates {
                omega_c_ren_pert: wc + g2 / shifted,
                chi_pert: g2 * p.e_c / (delta * shifted),
                n_crit: PhotonScale(n_crit),
            })
        }
        Device::Custom => Err(Error::Config(
            "perturbative estimates need a TLS or transmon device".into(),
        )),
    }
}

/// Numerical and perturbative dispersive quantities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DispersiveSummary {
    pub omega_c_ren: f64,
    pub chi: f64,
    pub omega_c_ren_pert: f64,
    pub chi_pert: f64,
    pub n_crit: PhotonScale,
}

pub fn dispersive_summary(spec: &LabeledSpectrum, model: &SystemModel) -> Result<DispersiveSummary> {
    let (omega_c_ren, chi) = dispersive_quantities(spec)?;
    let pert = perturbative_estimates(model)?;
    Ok(DispersiveSummary {
        omega_c_ren,
        chi,
        omega_c_ren_pert: pert.omega_c_ren_pert,
        chi_pert: pert.chi_pert,
        n_crit: pert.n_crit,
    })
}

/// Spectrum table header.
pub const SPECTRUM_CSV_HEADER: [&str; 7] = [
    "branch",
    "n",
    "energy",
    "gap_to_next",
    "label_overlap",
    "transmon_occupation",
    "photon_number",
];

/// Writes every labeled state as one CSV row; `gap_to_next` is empty on the
/// last label of a branch.
pub fn write_spectrum_csv(spec: &LabeledSpectrum, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SPECTRUM_CSV_HEADER)?;
    for b in &spec.branches {
        for n in 0..b.len() {
            let gap = b
                .energies
                .get(n + 1)
                .map(|e| crate::fmt_f64(e - b.energies[n]))
                .unwrap_or_default();
            w.write_record([
                branch_name(b.qubit_level),
                n.to_string(),
                crate::fmt_f64(b.energies[n]),
                gap,
                crate::fmt_f64(b.overlaps[n]),
                crate::fmt_f64(b.transmon_occupation[n]),
                crate::fmt_f64(b.photon_number[n]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `g`, `e`, `f`, then `l3`, `l4`, ….
pub fn branch_name(p: usize) -> String {
    match p {
        0 => "g".into(),
        1 => "e".into(),
        2 => "f".into(),
        _ => format!("l{p}"),
    }
}

/// Inverse of [`branch_name`].
pub fn parse_branch(name: &str) -> Result<usize> {
    match name {
        "g" => Ok(0),
        "e" => Ok(1),
        "f" => Ok(2),
        other => other
            .strip_prefix('l')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("unknown branch `{other}`"))),
    }
}

/// Writes `(branch, n, overlap, reliable)` summaries for quick inspection.
pub fn write_branch_summary(spec: &LabeledSpectrum, mut out: impl Write) -> std::io::Result<()> {
    for b in &spec.branches {
        writeln!(
            out,
            "branch {}: {} labels, reliable to n = {}, min overlap {:.4}",
            branch_name(b.qubit_level),
            b.len(),
            b.n_reliable,
            b.overlaps.iter().copied().fold(1.0, f64::min)
        )?;
    }
    Ok(())
}
