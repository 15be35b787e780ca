//! The matrices `ψ` and `Ψ` and the adapted complex structure on a tube.
//!
//! Along a geodesic with parallel normal frame `v_1, ..., v_{m-1}` (`m = dim M`), the Jacobi
//! fields `ζ_i` (`ζ_i(0) = v_i`, `ζ_i'(0) = 0`) and `η_i` (`η_i(0) = 0`, `η_i'(0) = v_i`) satisfy
//! `η = ψ ζ` for a real matrix `ψ(σ)`. Its holomorphic continuation `Ψ(σ + iτ)` determines the
//! adapted complex structure through
//!
//! ```text
//! J ζ = (Im Ψ)^{-1} (η - Re Ψ ζ).
//! ```
//!
//! For `M = CP^n` the normal space has dimension `m - 1 = 2n - 1`.
//!
//! Supported models have parallel curvature along the geodesic: the Jacobi operator is
//! `R = Q diag(K_1, ..., K_{m-1}) Qᵀ` in the parallel frame.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{CMat, RMat, RVec, C64, I};
use crate::{Error, Result};

/// Step of the continuation integrator, along the real axis and along vertical rays.
pub const CONTINUATION_STEP: f64 = 1e-3;
/// `|det ζ|` below this marks `σ` as a point of the singular set.
pub const SINGULAR_DET: f64 = 1e-10;
/// Smallest admissible singular value (or eigenvalue, for the tube probe) of `Im Ψ`.
pub const MIN_IM_SINGULAR_VALUE: f64 = 1e-10;
pub const DEFAULT_TAU_MAX: f64 = 40.0;
pub const DEFAULT_TAU_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// Constant-curvature closed forms `tan(√K s)/√K`, `tanh(√-K s)/√-K`, `s`.
    ClosedForm,
    /// Integration of the complexified Jacobi equation along the real axis and then a vertical ray.
    Continued,
}

/// Jacobi operator along a geodesic with constant curvature blocks in a rotated parallel frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    curvatures: Vec<f64>,
    frame: RMat,
    name: String,
}

impl BlockModel {
    pub fn new(curvatures: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if curvatures.is_empty() {
            return Err(Error::InvalidParameter("model needs at least one normal direction".into()));
        }
        if curvatures.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidParameter("curvatures must be finite".into()));
        }
        let k = curvatures.len();
        Ok(Self { curvatures, frame: RMat::identity(k, k), name: name.into() })
    }

    /// `CP^n`: curvature 1 in the complex-line direction, 1/4 in the other `2n - 2` directions.
    pub fn cpn(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("CP^n needs n >= 1".into()));
        }
        let mut k = vec![1.0];
        k.extend(std::iter::repeat_n(0.25, 2 * n - 2));
        Self::new(k, format!("cpn(n={n})"))
    }

    /// Round sphere `S^m`: curvature 1 in all `m - 1` normal directions.
    pub fn sphere(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("S^m needs m >= 2".into()));
        }
        Self::new(vec![1.0; m - 1], format!("sphere(m={m})"))
    }

    /// Single normal direction of curvature `k`.
    pub fn block(k: f64) -> Result<Self> {
        Self::new(vec![k], format!("block(K={k})"))
    }

    /// Same curvatures in the parallel frame rotated by the orthogonal matrix `q`.
    pub fn rotated(mut self, q: RMat) -> Result<Self> {
        let k = self.curvatures.len();
        if q.nrows() != k || q.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, got: q.nrows() });
        }
        let defect = (&q.transpose() * &q - RMat::identity(k, k)).norm();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("frame is not orthogonal (defect {defect:e})")));
        }
        self.frame = q;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.curvatures.len()
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Jacobi operator `R = Q diag(K) Qᵀ`.
    pub fn jacobi_operator(&self) -> RMat {
        &self.frame * RMat::from_diagonal(&RVec::from_column_slice(&self.curvatures)) * self.frame.transpose()
    }

    fn conjugate_diag(&self, diag: Vec<C64>) -> CMat {
        let q = self.frame.map(|x| C64::new(x, 0.0));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(diag));
        &q * d * q.transpose()
    }
}

/// `(cos(√K s), sin(√K s)/√K, tan(√K s)/√K)` with the hyperbolic and flat variants.
fn closed_form_entries(k: f64, s: C64) -> (C64, C64) {
    if k > 0.0 {
        let r = k.sqrt();
        ((s * r).cos(), (s * r).sin() / r)
    } else if k < 0.0 {
        let r = (-k).sqrt();
        ((s * r).cosh(), (s * r).sinh() / r)
    } else {
        (C64::new(1.0, 0.0), s)
    }
}

/// `ψ(σ) = (ζ(σ)^{-1} η(σ))ᵀ`, with `ζ`, `η` the matrices of Jacobi-field coefficients.
pub fn psi_real(model: &BlockModel, sigma: f64, backend: Backend) -> Result<RMat> {
    let (zeta, eta) = match backend {
        Backend::ClosedForm => closed_form_fields(model, C64::new(sigma, 0.0)),
        Backend::Continued => {
            let (y, _) = continue_real(model, sigma);
            split_fields(&y)
        }
    };
    let det = zeta.determinant();
    if det.norm() < SINGULAR_DET || !det.is_finite() {
        return Err(Error::SingularSigma { sigma, det: det.norm() });
    }
    let psi = zeta.try_inverse().ok_or(Error::SingularSigma { sigma, det: det.norm() })? * eta;
    Ok(psi.transpose().map(|c| c.re))
}

fn closed_form_fields(model: &BlockModel, s: C64) -> (CMat, CMat) {
    let pairs: Vec<(C64, C64)> = model.curvatures.iter().map(|&k| closed_form_entries(k, s)).collect();
    let zeta = model.conjugate_diag(pairs.iter().map(|p| p.0).collect());
    let eta = model.conjugate_diag(pairs.iter().map(|p| p.1).collect());
    (zeta, eta)
}

fn split_fields(y: &CMat) -> (CMat, CMat) {
    let k = y.nrows();
    (y.columns(0, k).into_owned(), y.columns(k, k).into_owned())
}

/// RK4 for `dY/dt = c P`, `dP/dt = -c R Y` with complex direction `c`.
fn rk4_linear(r: &CMat, y: &mut CMat, p: &mut CMat, c: C64, h: f64, steps: usize) {
    let f = |y: &CMat, p: &CMat| (p * c, -(r * y) * c);
    let hh = C64::new(h, 0.0);
    let half = C64::new(0.5 * h, 0.0);
    for _ in 0..steps {
        let (k1y, k1p) = f(y, p);
        let (k2y, k2p) = f(&(&*y + &k1y * half), &(&*p + &k1p * half));
        let (k3y, k3p) = f(&(&*y + &k2y * half), &(&*p + &k2p * half));
        let (k4y, k4p) = f(&(&*y + &k3y * hh), &(&*p + &k3p * hh));
        let sixth = C64::new(h / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        *y += (k1y + k2y * two + k3y * two + k4y) * sixth;
        *p += (k1p + k2p * two + k3p * two + k4p) * sixth;
    }
}

fn steps_for(length: f64) -> (usize, f64) {
    let steps = (length.abs() / CONTINUATION_STEP).ceil() as usize;
    if steps == 0 {
        (0, 0.0)
    } else {
        (steps, length / steps as f64)
    }
}

/// `Y = [ζ | η]` and `Y'` at real time `sigma`.
fn continue_real(model: &BlockModel, sigma: f64) -> (CMat, CMat) {
    let k = model.dim();
    let r = model.jacobi_operator().map(|x| C64::new(x, 0.0));
    let mut y = CMat::zeros(k, 2 * k);
    let mut p = CMat::zeros(k, 2 * k);
    for i in 0..k {
        y[(i, i)] = C64::new(1.0, 0.0);
        p[(i, k + i)] = C64::new(1.0, 0.0);
    }
    let (steps, h) = steps_for(sigma);
    rk4_linear(&r, &mut y, &mut p, C64::new(1.0, 0.0), h, steps);
    (y, p)
}

fn psi_from_fields(y: &CMat) -> Option<CMat> {
    let (zeta, eta) = split_fields(y);
    Some((zeta.try_inverse()? * eta).transpose())
}

fn check_imaginary_part(psi: &CMat, tau: f64) -> Result<()> {
    if !psi.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite(format!("Ψ at τ = {tau}")));
    }
    if tau != 0.0 {
        let sv = psi.map(|c| c.im).singular_values().min();
        if sv < MIN_IM_SINGULAR_VALUE {
            return Err(Error::ContinuationBreakdown { tau, min_sv: sv });
        }
    }
    Ok(())
}

/// `Ψ(σ + iτ)`.
pub fn psi_complex(model: &BlockModel, sigma: f64, tau: f64, backend: Backend) -> Result<CMat> {
    let psi = match backend {
        Backend::ClosedForm => {
            let s = C64::new(sigma, tau);
            let diag = model
                .curvatures
                .iter()
                .map(|&k| {
                    let (c, sn) = closed_form_entries(k, s);
                    sn / c
                })
                .collect();
            model.conjugate_diag(diag)
        }
        Backend::Continued => return psi_continued_column(model, sigma, &[tau]).pop().expect("one entry"),
    };
    check_imaginary_part(&psi, tau)?;
    Ok(psi)
}

/// `Ψ(σ + iτ)` for several heights on one vertical ray, continuing the Jacobi system once.
pub fn psi_continued_column(model: &BlockModel, sigma: f64, taus: &[f64]) -> Vec<Result<CMat>> {
    let r = model.jacobi_operator().map(|x| C64::new(x, 0.0));
    let (y0, p0) = continue_real(model, sigma);
    let mut out: Vec<Option<Result<CMat>>> = vec![None; taus.len()];
    for sign in [1.0, -1.0] {
        let mut order: Vec<usize> = (0..taus.len()).filter(|&i| taus[i] * sign >= 0.0 && out[i].is_none()).collect();
        order.sort_by(|&a, &b| (taus[a] * sign).total_cmp(&(taus[b] * sign)));
        let (mut y, mut p) = (y0.clone(), p0.clone());
        let mut reached = 0.0;
        for i in order {
            let target = taus[i];
            let (steps, h) = steps_for(target - reached);
            // d/dτ Y(σ + iτ) = i Y', d/dτ Y' = -i R Y
            rk4_linear(&r, &mut y, &mut p, I, h, steps);
            reached = target;
            let value = match psi_from_fields(&y) {
                Some(psi) => check_imaginary_part(&psi, target).map(|_| psi),
                None => Err(Error::NotInvertible { sigma, tau: target }),
            };
            out[i] = Some(value);
        }
    }
    out.into_iter().map(|v| v.expect("every height visited")).collect()
}

/// `Ψ` on a `(σ, τ)` grid; rows follow `sigmas`, columns follow `taus`.
pub fn psi_grid(model: &BlockModel, sigmas: &[f64], taus: &[f64], backend: Backend) -> Vec<Vec<Result<CMat>>> {
    sigmas
        .par_iter()
        .map(|&sigma| match backend {
            Backend::Continued => psi_continued_column(model, sigma, taus),
            Backend::ClosedForm => taus.iter().map(|&tau| psi_complex(model, sigma, tau, backend)).collect(),
        })
        .collect()
}

/// Matrix of `J` acting on coefficients `(a, b)` of `Σ a_i ζ_i + Σ b_i η_i`.
pub fn j_matrix(model: &BlockModel, sigma: f64, tau: f64, backend: Backend) -> Result<RMat> {
    let psi = psi_complex(model, sigma, tau, backend).map_err(|e| match e {
        Error::ContinuationBreakdown { .. } => Error::NotInvertible { sigma, tau },
        other => other,
    })?;
    j_matrix_from_psi(&psi, sigma, tau)
}

pub fn j_matrix_from_psi(psi: &CMat, sigma: f64, tau: f64) -> Result<RMat> {
    let k = psi.nrows();
    let a = psi.map(|c| c.re);
    let b = psi.map(|c| c.im);
    if b.clone().singular_values().min() < MIN_IM_SINGULAR_VALUE {
        return Err(Error::NotInvertible { sigma, tau });
    }
    let c = b.clone().try_inverse().ok_or(Error::NotInvertible { sigma, tau })?;
    // Jζ = C(η - Aζ); Jη = A Jζ - Bζ
    let mut j = RMat::zeros(2 * k, 2 * k);
    j.view_mut((0, 0), (k, k)).copy_from(&(-(&c * &a).transpose()));
    j.view_mut((0, k), (k, k)).copy_from(&(-(&a * &c * &a + &b).transpose()));
    j.view_mut((k, 0), (k, k)).copy_from(&c.transpose());
    j.view_mut((k, k), (k, k)).copy_from(&(&a * &c).transpose());
    Ok(j)
}

/// Image under `J` of `Σ a_i ζ_i + Σ b_i η_i`, as the coefficient pair of the result.
pub fn complex_structure_j(
    model: &BlockModel,
    sigma: f64,
    tau: f64,
    zeta_coeffs: &RVec,
    eta_coeffs: &RVec,
    backend: Backend,
) -> Result<(RVec, RVec)> {
    let k = model.dim();
    if zeta_coeffs.len() != k || eta_coeffs.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: zeta_coeffs.len().min(eta_coeffs.len()) });
    }
    let j = j_matrix(model, sigma, tau, backend)?;
    let mut x = RVec::zeros(2 * k);
    x.rows_mut(0, k).copy_from(zeta_coeffs);
    x.rows_mut(k, k).copy_from(eta_coeffs);
    let y = j * x;
    Ok((y.rows(0, k).into_owned(), y.rows(k, k).into_owned()))
}

/// Outcome of [`tube_radius_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TubeRadius {
    Entire,
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub tau_max: f64,
    pub tau_step: f64,
    pub sigma_samples: usize,
    pub backend: Backend,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { tau_max: DEFAULT_TAU_MAX, tau_step: DEFAULT_TAU_STEP, sigma_samples: 64, backend: Backend::ClosedForm }
    }
}

/// Smallest eigenvalue of the symmetric part of `Im Ψ`; `-∞` when `Ψ` is not finite.
fn im_positivity(psi: &Result<CMat>) -> f64 {
    match psi {
        Ok(psi) if psi.iter().all(|c| c.is_finite()) => {
            let b = psi.map(|c| c.im);
            let sym = (&b + b.transpose()) * 0.5;
            SymmetricEigen::new(sym).eigenvalues.min()
        }
        Ok(_) | Err(Error::NonFinite(_)) | Err(Error::NotInvertible { .. }) => f64::NEG_INFINITY,
        // a small singular value of Im Ψ is measured again below
        Err(Error::ContinuationBreakdown { min_sv, .. }) => *min_sv,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Largest probed height `τ` such that `Im Ψ(σ + iτ')` is positive definite (smallest
/// eigenvalue above [`MIN_IM_SINGULAR_VALUE`]) for every `σ` on the grid and every probed
/// `0 < τ' ≤ τ`. Reaching `tau_max` returns `Entire`.
pub fn tube_radius_probe(model: &BlockModel, options: ProbeOptions) -> Result<TubeRadius> {
    if !(options.tau_max > 0.0) || !(options.tau_step > 0.0) || options.sigma_samples == 0 {
        return Err(Error::InvalidParameter("tube probe needs tau_max > 0, tau_step > 0 and sigma samples".into()));
    }
    let count = (options.tau_max / options.tau_step).round().max(1.0) as usize;
    let taus: Vec<f64> = (1..=count).map(|i| (i as f64 * options.tau_step).min(options.tau_max)).collect();
    let sigmas: Vec<f64> = (0..options.sigma_samples)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / options.sigma_samples as f64)
        .collect();
    let grid = psi_grid(model, &sigmas, &taus, options.backend);
    // first failing height per σ, then the earliest over σ
    let first_fail = grid
        .iter()
        .filter_map(|column| column.iter().position(|psi| !(im_positivity(psi) > MIN_IM_SINGULAR_VALUE)))
        .min();
    Ok(match first_fail {
        None => TubeRadius::Entire,
        Some(0) => TubeRadius::Finite(0.0),
        Some(i) => TubeRadius::Finite(taus[i - 1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_rotation(rng: &mut impl Rng, k: usize) -> RMat {
        let a = RMat::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        a.qr().q()
    }

    #[test]
    fn psi_real_examples() {
        let one = BlockModel::block(1.0).unwrap();
        let quarter = BlockModel::block(0.25).unwrap();
        for backend in [Backend::ClosedForm, Backend::Continued] {
            assert_abs_diff_eq!(psi_real(&one, 0.7, backend).unwrap()[(0, 0)], 0.7f64.tan(), epsilon = 1e-10);
            assert_abs_diff_eq!(psi_real(&quarter, 0.7, backend).unwrap()[(0, 0)], 2.0 * 0.35f64.tan(), epsilon = 1e-10);
            let cpn = BlockModel::cpn(2).unwrap();
            assert_eq!(psi_real(&cpn, 0.0, backend).unwrap().norm(), 0.0);
        }
        assert!(matches!(psi_real(&one, PI / 2.0, Backend::ClosedForm), Err(Error::SingularSigma { .. })));
        let hyperbolic = BlockModel::block(-1.0).unwrap();
        assert_abs_diff_eq!(psi_real(&hyperbolic, 0.4, Backend::ClosedForm).unwrap()[(0, 0)], 0.4f64.tanh(), epsilon = 1e-14);
    }

    #[test]
    fn psi_complex_examples() {
        let one = BlockModel::block(1.0).unwrap();
        let quarter = BlockModel::block(0.25).unwrap();
        for backend in [Backend::ClosedForm, Backend::Continued] {
            let a = psi_complex(&one, 0.0, 1.0, backend).unwrap()[(0, 0)];
            assert_abs_diff_eq!(a.re, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, 0.7615941559557649, epsilon = 1e-10);
            let b = psi_complex(&quarter, 0.0, 1.0, backend).unwrap()[(0, 0)];
            assert_abs_diff_eq!(b.im, 0.9242343145200195, epsilon = 1e-10);
        }
        let near = psi_complex(&one, PI / 4.0, 1e-9, Backend::ClosedForm).unwrap()[(0, 0)];
        assert_abs_diff_eq!(near.re, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn continuation_passes_through_poles_of_psi() {
        let one = BlockModel::block(1.0).unwrap();
        let a = psi_complex(&one, PI / 2.0, 0.3, Backend::Continued).unwrap()[(0, 0)];
        let b = C64::new(PI / 2.0, 0.3).tan();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn backends_agree_on_rotated_frames() {
        let mut rng = seeded_rng(4);
        let model = BlockModel::cpn(2).unwrap().rotated(random_rotation(&mut rng, 3)).unwrap();
        let taus = [0.1, 0.7, -0.4, 2.5];
        let column = psi_continued_column(&model, 1.1, &taus);
        for (tau, value) in taus.iter().zip(column) {
            let closed = psi_complex(&model, 1.1, *tau, Backend::ClosedForm).unwrap();
            assert!((value.unwrap() - closed).norm() < 1e-9);
        }
    }

    #[test]
    fn schwarz_reflection_and_holomorphy() {
        let model = BlockModel::cpn(2).unwrap();
        let a = psi_complex(&model, 0.9, 0.6, Backend::Continued).unwrap();
        let b = psi_complex(&model, 0.9, -0.6, Backend::Continued).unwrap();
        assert!((a.conjugate() - b).norm() < 1e-9);

        let h = 1e-4;
        let f = |s: f64, t: f64| psi_complex(&model, s, t, Backend::ClosedForm).unwrap();
        let d_sigma = (f(0.9 + h, 0.6) - f(0.9 - h, 0.6)) / C64::new(2.0 * h, 0.0);
        let d_tau = (f(0.9, 0.6 + h) - f(0.9, 0.6 - h)) / C64::new(2.0 * h, 0.0);
        assert!((d_tau - d_sigma * I).norm() < 1e-6);
    }

    #[test]
    fn j_squares_to_minus_identity() {
        let mut rng = seeded_rng(12);
        let model = BlockModel::cpn(2).unwrap();
        for _ in 0..200 {
            let sigma = rng.random_range(0.0..2.0 * PI);
            let tau = rng.random_range(0.2..4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let j = j_matrix(&model, sigma, tau, Backend::ClosedForm).unwrap();
            let defect = (&j * &j + RMat::identity(6, 6)).norm();
            assert!(defect < 1e-7, "defect {defect}");
            let a = RVec::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let b = RVec::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let (ja, jb) = complex_structure_j(&model, sigma, tau, &a, &b, Backend::ClosedForm).unwrap();
            let (jja, jjb) = complex_structure_j(&model, sigma, tau, &ja, &jb, Backend::ClosedForm).unwrap();
            assert!((jja + &a).norm() + (jjb + &b).norm() < 1e-7);
        }
        assert!(matches!(j_matrix(&model, 0.3, 0.0, Backend::ClosedForm), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn imaginary_part_is_positive_for_cpn() {
        let model = BlockModel::cpn(3).unwrap();
        for i in 0..20 {
            for t in 1..10 {
                let psi = psi_complex(&model, i as f64 * 0.31, t as f64 * 0.5, Backend::ClosedForm).unwrap();
                assert!(im_positivity(&Ok(psi)) > 0.0);
            }
        }
    }

    #[test]
    fn tube_probe_examples() {
        let options = ProbeOptions::default();
        assert_eq!(tube_radius_probe(&BlockModel::block(1.0).unwrap(), options).unwrap(), TubeRadius::Entire);
        assert_eq!(tube_radius_probe(&BlockModel::block(0.25).unwrap(), options).unwrap(), TubeRadius::Entire);
        assert_eq!(tube_radius_probe(&BlockModel::cpn(2).unwrap(), options).unwrap(), TubeRadius::Entire);
        match tube_radius_probe(&BlockModel::block(-1.0).unwrap(), options).unwrap() {
            TubeRadius::Finite(r) => assert!((r - PI / 2.0).abs() < 0.01, "radius {r}"),
            TubeRadius::Entire => panic!("K = -1 has a finite tube"),
        }
        let continued = ProbeOptions { tau_max: 3.0, backend: Backend::Continued, sigma_samples: 16, ..options };
        match tube_radius_probe(&BlockModel::block(-1.0).unwrap(), continued).unwrap() {
            TubeRadius::Finite(r) => assert!((r - PI / 2.0).abs() < 0.01, "radius {r}"),
            TubeRadius::Entire => panic!("K = -1 has a finite tube"),
        }
    }
}
