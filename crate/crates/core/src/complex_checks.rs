//! Pluripotential and degree checks on the model tube.
//!
//! * Levi forms `∂²f/∂z_j∂z̄_k` by fourth-order finite differences in affine charts.
//! * Homogeneous complex Monge–Ampère residual and rank of `i∂∂̄u0`. The exponent is the complex
//!   dimension of the tube (`2n` for `T CP^n`), so the Levi form must have rank `2n - 1`.
//! * Harmonicity of `u0` along leaves and the circle-maximum function `F(r)`.
//! * Degrees of line bundles restricted to a compactified leaf `C ≅ CP^1`, computed as
//!   `(1/4π) ∫ Δφ dA` for a weight `φ` of a Hermitian metric.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model_embedding::{self, LeafCoordinate, ProductPoint};
use crate::numerics::{self, herm, CMat, CVec, RMat, C64, I};
use crate::projective_geometry::GeodesicFrame;
use crate::{Error, Result};

/// Default finite-difference step for Levi forms.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Eigenvalues above this fraction of the largest one count towards the rank.
pub const RANK_THRESHOLD: f64 = 1e-6;
/// Minimal number of angular samples of [`circle_max_profile`].
pub const MIN_ANGULAR_SAMPLES: usize = 720;
/// Total variation below which a circle-maximum profile counts as constant.
pub const CONSTANCY_TOLERANCE: f64 = 1e-6;
/// Largest accepted quadrature error estimate and rounding error of a degree.
pub const DEGREE_TOLERANCE: f64 = 0.05;

/// Complex Hessian of a real function at a point of `C^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviReport {
    pub point: CVec,
    pub matrix: CMat,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Size of the anti-Hermitian part removed by averaging.
    pub residual_estimate: f64,
}

impl LeviReport {
    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    pub fn rank(&self, relative: f64) -> usize {
        let scale = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.eigenvalues.iter().filter(|l| **l > relative * scale).count()
    }

    /// `|det| / (product of the largest k-1 |eigenvalues|)`.
    pub fn normalized_determinant(&self) -> f64 {
        let mut abs: Vec<f64> = self.eigenvalues.iter().map(|l| l.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let det: f64 = abs.iter().product();
        let norm: f64 = abs[1..].iter().product();
        if norm == 0.0 {
            0.0
        } else {
            det / norm
        }
    }
}

/// Levi form of `f` at `at`, with `z_j = x_j + i y_j` and
/// `∂_j∂̄_k f = ¼ (f_{x_j x_k} + f_{y_j y_k} + i (f_{x_j y_k} - f_{y_j x_k}))`.
pub fn levi_form<F>(f: F, at: &CVec, fd_step: f64) -> Result<LeviReport>
where
    F: Fn(&CVec) -> f64 + Sync,
{
    let k = at.len();
    let dim = 2 * k;
    let direction = |a: usize| {
        let mut d = CVec::zeros(k);
        d[a / 2] = if a.is_multiple_of(2) { C64::new(1.0, 0.0) } else { I };
        d
    };
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|a| (a..dim).map(move |b| (a, b))).collect();
    let entries: Vec<((usize, usize), f64)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (da, db) = (direction(a), direction(b));
            let value = if a == b {
                numerics::second_derivative(|s| f(&(at + &da * C64::new(s, 0.0))), fd_step)
            } else {
                numerics::mixed_derivative(|s, t| f(&(at + &da * C64::new(s, 0.0) + &db * C64::new(t, 0.0))), fd_step)
            };
            ((a, b), value)
        })
        .collect();
    let mut hess = RMat::zeros(dim, dim);
    for ((a, b), v) in entries {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("Levi form entry ({a}, {b})")));
        }
        hess[(a, b)] = v;
        hess[(b, a)] = v;
    }
    let raw = CMat::from_fn(k, k, |j, l| {
        let (xj, yj, xl, yl) = (2 * j, 2 * j + 1, 2 * l, 2 * l + 1);
        C64::new(hess[(xj, xl)] + hess[(yj, yl)], hess[(xj, yl)] - hess[(yj, xl)]) * 0.25
    });
    let matrix = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let residual_estimate = (&raw - raw.adjoint()).norm() * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(LeviReport { point: at.clone(), matrix, eigenvalues, residual_estimate })
}

/// Affine chart of `CP^n x CP^n` dividing by coordinate `first` of `Z` and `second` of `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductChart {
    pub first: usize,
    pub second: usize,
}

fn affine(v: &CVec, idx: usize) -> CVec {
    let lead = v[idx];
    CVec::from_iterator(v.len() - 1, v.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, c)| c / lead))
}

fn homogeneous(xi: &CVec, idx: usize) -> CVec {
    let mut out = CVec::zeros(xi.len() + 1);
    let mut it = xi.iter();
    for i in 0..out.len() {
        out[i] = if i == idx { C64::new(1.0, 0.0) } else { *it.next().expect("length") };
    }
    out
}

impl ProductChart {
    /// Chart given by the largest homogeneous coordinate of each factor.
    pub fn around(z: &CVec, w: &CVec) -> Self {
        Self { first: numerics::argmax_abs(z), second: numerics::argmax_abs(w) }
    }

    pub fn for_point(p: &ProductPoint) -> Self {
        Self::around(p.first().rep(), p.second().rep())
    }

    /// `(ξ, η) ∈ C^{2n}`.
    pub fn coordinates(&self, p: &ProductPoint) -> CVec {
        self.coordinates_of(p.first().rep(), p.second().rep())
    }

    pub fn coordinates_of(&self, z: &CVec, w: &CVec) -> CVec {
        let a = affine(z, self.first);
        let b = affine(w, self.second);
        CVec::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
    }

    pub fn point(&self, c: &CVec) -> Result<ProductPoint> {
        let n = c.len() / 2;
        let xi = c.rows(0, n).into_owned();
        let eta = c.rows(n, n).into_owned();
        ProductPoint::from_reps(homogeneous(&xi, self.first), homogeneous(&eta, self.second))
    }
}

/// Levi form of a function on `CP^n x CP^n`, in the chart adapted to `p`.
pub fn levi_form_at<F>(f: F, p: &ProductPoint, fd_step: f64) -> Result<LeviReport>
where
    F: Fn(&ProductPoint) -> f64 + Sync,
{
    let chart = ProductChart::for_point(p);
    let at = chart.coordinates(p);
    levi_form(|c| chart.point(c).map(|q| f(&q)).unwrap_or(f64::NAN), &at, fd_step)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcmaReport {
    pub residual: f64,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

fn finite_u0(p: &ProductPoint) -> f64 {
    model_embedding::u0(p).finite().unwrap_or(f64::NAN)
}

/// Normalised Monge–Ampère residual and rank of the Levi form of `field` at `p`.
pub fn hcma_check_field<F>(field: F, p: &ProductPoint, fd_step: f64) -> Result<HcmaReport>
where
    F: Fn(&ProductPoint) -> f64 + Sync,
{
    let levi = levi_form_at(field, p, fd_step)?;
    Ok(HcmaReport { residual: levi.normalized_determinant(), rank: levi.rank(RANK_THRESHOLD), eigenvalues: levi.eigenvalues })
}

/// [`hcma_check_field`] for `u0`; `p` should lie off `M ∪ D`.
pub fn hcma_check(p: &ProductPoint, fd_step: f64) -> Result<HcmaReport> {
    if p.on_divisor() {
        return Err(Error::NonFinite("u0 is infinite on D".into()));
    }
    hcma_check_field(finite_u0, p, fd_step)
}

/// Largest flat-Laplacian residual of `field ∘ φ_γ` in `(σ, τ)` over the grid.
pub fn leaf_laplacian_max<F>(frame: &GeodesicFrame, field: F, sigmas: &[f64], taus: &[f64], fd_step: f64) -> f64
where
    F: Fn(&ProductPoint) -> f64 + Sync,
{
    sigmas
        .par_iter()
        .map(|&sigma| {
            taus.iter()
                .map(|&tau| {
                    numerics::laplacian_2d(
                        |x, y| field(&model_embedding::leaf_map(frame, LeafCoordinate::new(sigma + x, tau + y))),
                        fd_step,
                    )
                    .abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Harmonicity residual of `u0` on the leaf of `frame` over a `sigma_count x tau_count` grid
/// with `τ` in `tau_range` (which should avoid `τ = 0` by at least 0.1).
pub fn leaf_harmonicity(frame: &GeodesicFrame, sigma_count: usize, tau_range: (f64, f64), tau_count: usize, fd_step: f64) -> f64 {
    let sigmas: Vec<f64> = (0..sigma_count).map(|i| 2.0 * std::f64::consts::PI * i as f64 / sigma_count as f64).collect();
    let taus: Vec<f64> = (0..tau_count)
        .map(|i| tau_range.0 + (tau_range.1 - tau_range.0) * i as f64 / (tau_count.max(2) - 1) as f64)
        .collect();
    leaf_laplacian_max(frame, finite_u0, &sigmas, &taus, fd_step)
}

/// Table of `F(r) = max_{|z| = r} f(z)` with its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub log_convex: bool,
    pub constant: bool,
}

/// `F(r) = max_{|z| = r} (u0 - u1)(z)` sampled on `radii` (ascending, positive).
pub fn circle_max_profile<F0, F1>(u0: F0, u1: F1, radii: &[f64], samples: usize) -> CircleProfile
where
    F0: Fn(C64) -> f64 + Sync,
    F1: Fn(C64) -> f64 + Sync,
{
    let samples = samples.max(MIN_ANGULAR_SAMPLES);
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            (0..samples)
                .map(|k| {
                    let z = C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / samples as f64);
                    u0(z) - u1(z)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let log_convex = (1..values.len().saturating_sub(1)).all(|i| {
        let left = (values[i] - values[i - 1]) / (logs[i] - logs[i - 1]);
        let right = (values[i + 1] - values[i]) / (logs[i + 1] - logs[i]);
        right >= left - 1e-9 * scale
    });
    let variation: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    CircleProfile { radii: radii.to_vec(), values, log_convex, constant: variation < CONSTANCY_TOLERANCE }
}

/// Holomorphic representatives of a leaf and their derivatives in a local leaf coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafJet {
    pub z: CVec,
    pub dz: CVec,
    pub w: CVec,
    pub dw: CVec,
}

/// Weight `φ` of a Hermitian metric on a line bundle over `CP^n x CP^n`, in the local
/// trivialisation attached to `chart`. Only `i∂∂̄φ` matters, so weights may differ by
/// pluriharmonic terms between charts.
pub trait LineBundleWeight: Sync {
    fn name(&self) -> String;
    fn weight(&self, jet: &LeafJet, chart: ProductChart) -> f64;
}

/// `O(a, b)` with the product of Fubini–Study metrics: `φ = a log‖Z‖² + b log‖W‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bidegree {
    pub a: i64,
    pub b: i64,
}

impl Bidegree {
    /// `O(D) = O(1, 1)`.
    pub fn divisor() -> Self {
        Self { a: 1, b: 1 }
    }
}

impl LineBundleWeight for Bidegree {
    fn name(&self) -> String {
        format!("O({},{})", self.a, self.b)
    }

    fn weight(&self, jet: &LeafJet, _chart: ProductChart) -> f64 {
        self.a as f64 * jet.z.norm_squared().ln() + self.b as f64 * jet.w.norm_squared().ln()
    }
}

/// Anticanonical bundle with the metric induced by the product Fubini–Study volume form:
/// `φ = -log det (∂∂̄ log(1+|ξ|²)) - log det (∂∂̄ log(1+|η|²))` in the affine chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Anticanonical;

fn fs_levi_matrix(xi: &CVec) -> CMat {
    let s = 1.0 + xi.norm_squared();
    CMat::from_fn(xi.len(), xi.len(), |j, k| {
        let delta = if j == k { s } else { 0.0 };
        (C64::new(delta, 0.0) - xi[j].conj() * xi[k]) / (s * s)
    })
}

impl LineBundleWeight for Anticanonical {
    fn name(&self) -> String {
        "anticanonical".into()
    }

    fn weight(&self, jet: &LeafJet, chart: ProductChart) -> f64 {
        let xi = affine(&jet.z, chart.first);
        let eta = affine(&jet.w, chart.second);
        let det = fs_levi_matrix(&xi).determinant().re * fs_levi_matrix(&eta).determinant().re;
        -det.ln()
    }
}

/// Tangent bundle of the leaf with the metric induced from the product metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LeafTangent;

/// Fubini–Study density `(‖Z‖²‖Z'‖² - |⟨Z', Z⟩|²) / ‖Z‖⁴` of a holomorphic curve.
pub fn fs_density(z: &CVec, dz: &CVec) -> f64 {
    let n2 = z.norm_squared();
    (n2 * dz.norm_squared() - herm(dz, z).norm_sqr()) / (n2 * n2)
}

impl LineBundleWeight for LeafTangent {
    fn name(&self) -> String {
        "leaf tangent".into()
    }

    fn weight(&self, jet: &LeafJet, _chart: ProductChart) -> f64 {
        -(fs_density(&jet.z, &jet.dz) + fs_density(&jet.w, &jet.dw)).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeOptions {
    pub sigma_nodes: usize,
    pub tau_nodes: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub cap_radius: f64,
    /// Rotation of the leaf parametrisation `s ↦ s + offset`.
    pub sigma_offset: f64,
    pub fd_step: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self {
            sigma_nodes: 64,
            tau_nodes: 32,
            radial_nodes: 16,
            angular_nodes: 64,
            cap_radius: 0.1,
            sigma_offset: 0.0,
            fd_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub bundle: String,
    pub value: f64,
    pub degree: i64,
    pub rounding_error: f64,
    pub error_estimate: f64,
}

fn jet_main(frame: &GeodesicFrame, s: C64) -> LeafJet {
    let half = s * 0.5;
    let (c, sn) = (half.cos(), half.sin());
    let zb = numerics::conj(frame.z());
    let wb = numerics::conj(frame.w());
    LeafJet {
        z: frame.z() * c + frame.w() * sn,
        dz: (frame.w() * c - frame.z() * sn) * C64::new(0.5, 0.0),
        w: &zb * c + &wb * sn,
        dw: (&wb * c - &zb * sn) * C64::new(0.5, 0.0),
    }
}

fn jet_at_infinity(frame: &GeodesicFrame, zeta: C64) -> LeafJet {
    let (z, w) = model_embedding::leaf_reps_at_infinity(frame, zeta);
    let (z1, w1) = model_embedding::leaf_reps_at_infinity(frame, C64::new(1.0, 0.0));
    let (z0, w0) = model_embedding::leaf_reps_at_infinity(frame, C64::new(0.0, 0.0));
    LeafJet { z, dz: z1 - z0, w, dw: w1 - w0 }
}

fn jet_at_zero(frame: &GeodesicFrame, xi: C64) -> LeafJet {
    let (z, w) = model_embedding::leaf_reps_at_zero(frame, xi);
    let (z1, w1) = model_embedding::leaf_reps_at_zero(frame, C64::new(1.0, 0.0));
    let (z0, w0) = model_embedding::leaf_reps_at_zero(frame, C64::new(0.0, 0.0));
    LeafJet { z, dz: z1 - z0, w, dw: w1 - w0 }
}

fn laplacian_of_weight<W, J>(weight: &W, jet: J, c: C64, h: f64) -> f64
where
    W: LineBundleWeight + ?Sized,
    J: Fn(C64) -> LeafJet,
{
    let centre = jet(c);
    let chart = ProductChart::around(&centre.z, &centre.w);
    numerics::laplacian_2d(|x, y| weight.weight(&jet(c + C64::new(x, y)), chart), h)
}

fn integrate_degree<W: LineBundleWeight + ?Sized>(weight: &W, frame: &GeodesicFrame, o: &DegreeOptions) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let height = -o.cap_radius.ln();
    let taus = numerics::gauss_legendre(o.tau_nodes, -height, height);
    let d_sigma = two_pi / o.sigma_nodes as f64;
    let main: f64 = (0..o.sigma_nodes)
        .into_par_iter()
        .map(|i| {
            let sigma = o.sigma_offset + i as f64 * d_sigma;
            taus.iter()
                .map(|&(tau, w)| w * d_sigma * laplacian_of_weight(weight, |s| jet_main(frame, s), C64::new(sigma, tau), o.fd_step))
                .sum::<f64>()
        })
        .sum();
    let radii = numerics::gauss_legendre(o.radial_nodes, 0.0, o.cap_radius);
    let d_theta = two_pi / o.angular_nodes as f64;
    let cap = |jet: &(dyn Fn(C64) -> LeafJet + Sync)| -> f64 {
        (0..o.angular_nodes)
            .into_par_iter()
            .map(|k| {
                let theta = o.sigma_offset + k as f64 * d_theta;
                radii
                    .iter()
                    .map(|&(r, w)| {
                        let c = C64::from_polar(r, theta);
                        w * r * d_theta * laplacian_of_weight(weight, jet, c, o.fd_step * o.cap_radius)
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    let inf = cap(&|c| jet_at_infinity(frame, c));
    let zero = cap(&|c| jet_at_zero(frame, c));
    (main + inf + zero) / (2.0 * two_pi)
}

/// Degree of the line bundle with weight `weight` on the compactified leaf of `frame`.
pub fn restricted_degree<W: LineBundleWeight + ?Sized>(weight: &W, frame: &GeodesicFrame, options: DegreeOptions) -> Result<DegreeReport> {
    if !(options.cap_radius > 0.0 && options.cap_radius < 1.0) {
        return Err(Error::InvalidParameter("cap radius must lie in (0, 1)".into()));
    }
    let value = integrate_degree(weight, frame, &options);
    let coarse = DegreeOptions {
        sigma_nodes: (options.sigma_nodes / 2).max(4),
        tau_nodes: (options.tau_nodes / 2).max(2),
        radial_nodes: (options.radial_nodes / 2).max(2),
        angular_nodes: (options.angular_nodes / 2).max(4),
        ..options
    };
    let error_estimate = (value - integrate_degree(weight, frame, &coarse)).abs();
    if !value.is_finite() || error_estimate > DEGREE_TOLERANCE {
        return Err(Error::PoorConvergence { estimate: error_estimate });
    }
    let degree = value.round();
    let rounding_error = (value - degree).abs();
    if rounding_error > DEGREE_TOLERANCE {
        return Err(Error::PoorConvergence { estimate: rounding_error });
    }
    Ok(DegreeReport { bundle: weight.name(), value, degree: degree as i64, rounding_error, error_estimate })
}

/// Degrees `(O(D)|_C, -K_X|_C, T_C, det N_C)` on the leaf of `frame`, with
/// `deg det N_C = deg(-K_X|_C) - deg T_C` by adjunction.
pub fn leaf_degrees(frame: &GeodesicFrame, options: DegreeOptions) -> Result<[DegreeReport; 4]> {
    let divisor = restricted_degree(&Bidegree::divisor(), frame, options)?;
    let anti = restricted_degree(&Anticanonical, frame, options)?;
    let tangent = restricted_degree(&LeafTangent, frame, options)?;
    let normal = DegreeReport {
        bundle: "det normal".into(),
        value: anti.value - tangent.value,
        degree: anti.degree - tangent.degree,
        rounding_error: anti.rounding_error + tangent.rounding_error,
        error_estimate: anti.error_estimate + tangent.error_estimate,
    };
    Ok([divisor, anti, tangent, normal])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn c(v: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&(a, b)| C64::new(a, b)))
    }

    fn random_leaf_point(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> ProductPoint {
        let frame = GeodesicFrame::random(rng, n);
        let sigma = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let tau = rng.random_range(lo..hi) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        model_embedding::leaf_map(&frame, LeafCoordinate::new(sigma, tau))
    }

    #[test]
    fn levi_form_examples() {
        let at = c(&[(0.3, -0.2), (0.1, 0.5)]);
        let l = levi_form(|z| z[0].norm_sqr(), &at, 1e-3).unwrap();
        assert!((l.matrix.clone() - CMat::from_diagonal(&c(&[(1.0, 0.0), (0.0, 0.0)]))).norm() < 1e-8);

        let l = levi_form(|z| (1.0 + z.norm_squared()).ln(), &CVec::zeros(2), 1e-3).unwrap();
        assert!((l.matrix - CMat::identity(2, 2)).norm() < 1e-8);

        let pluriharmonic = |v: &CVec| (v[0] * v[2] + v[1] * v[3] + 1.0).norm_sqr().ln();
        let l = levi_form(pluriharmonic, &c(&[(0.2, 0.1), (-0.3, 0.4), (0.5, 0.0), (0.1, -0.2)]), 1e-3).unwrap();
        assert!(l.matrix.norm() < 1e-5);
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = seeded_rng(3);
        let p = ProductPoint::random(&mut rng, 2);
        let chart = ProductChart::for_point(&p);
        let back = chart.point(&chart.coordinates(&p)).unwrap();
        assert!(back.approx_eq(&p, 1e-14));
    }

    #[test]
    fn kahler_potential_hessian_is_the_product_metric() {
        let mut rng = seeded_rng(8);
        for _ in 0..10 {
            let p = random_leaf_point(&mut rng, 2, 0.2, 2.0);
            let chart = ProductChart::for_point(&p);
            let at = chart.coordinates(&p);
            let rho = levi_form(|c| model_embedding::kahler_potential(&chart.point(c).unwrap()).to_f64(), &at, 1e-3).unwrap();
            let fs = levi_form(
                |c| (1.0 + c.rows(0, 2).norm_squared()).ln() + (1.0 + c.rows(2, 2).norm_squared()).ln(),
                &at,
                1e-3,
            )
            .unwrap();
            assert!((rho.matrix - fs.matrix).norm() < 1e-5);
        }
    }

    #[test]
    fn hcma_examples() {
        let mut rng = seeded_rng(10);
        for _ in 0..20 {
            let p = random_leaf_point(&mut rng, 1, 0.2, 3.0);
            let r = hcma_check(&p, DEFAULT_FD_STEP).unwrap();
            assert!(r.residual < 1e-4, "{r:?}");
            assert_eq!(r.rank, 1);
        }
        for _ in 0..5 {
            let p = random_leaf_point(&mut rng, 2, 0.2, 3.0);
            let r = hcma_check(&p, DEFAULT_FD_STEP).unwrap();
            assert!(r.residual < 1e-3, "{r:?}");
            assert_eq!(r.rank, 3);
        }
        let p = random_leaf_point(&mut rng, 2, 0.2, 3.0);
        let control = hcma_check_field(|q| model_embedding::exhaustion_n(q).to_f64(), &p, DEFAULT_FD_STEP).unwrap();
        assert_eq!(control.rank, 4);
        assert!(control.residual > 1e-2);
    }

    #[test]
    fn hcma_residual_converges_with_the_step() {
        let mut rng = seeded_rng(14);
        let p = random_leaf_point(&mut rng, 1, 0.5, 1.0);
        let steps = [0.08, 0.04, 0.02];
        let res: Vec<f64> = steps.iter().map(|h| hcma_check(&p, *h).unwrap().residual).collect();
        for w in res.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.5, "{res:?}");
        }
    }

    #[test]
    fn u0_is_plurisubharmonic() {
        let mut rng = seeded_rng(15);
        for _ in 0..40 {
            let p = random_leaf_point(&mut rng, 2, 0.2, 3.0);
            let l = levi_form_at(finite_u0, &p, DEFAULT_FD_STEP).unwrap();
            assert!(l.eigenvalues[0] >= -1e-6 * l.max_eigenvalue());
        }
    }

    #[test]
    fn leaf_harmonicity_examples() {
        let frame = GeodesicFrame::standard(1);
        assert!(leaf_harmonicity(&frame, 20, (0.5, 3.0), 10, 1e-3) < 1e-5);
        let sigmas = [0.3, 1.7];
        let taus = [0.6, 2.0];
        let square = leaf_laplacian_max(&frame, |p| finite_u0(p).powi(2), &sigmas, &taus, 1e-3);
        assert_abs_diff_eq!(square, 2.0, epsilon = 1e-5);
        // in the chart z = e^{i(σ+iτ)} around ∞_γ, u0 = -log|z|
        for zeta in [C64::new(0.3, 0.1), C64::new(-0.05, 0.2)] {
            let (a, b) = model_embedding::leaf_reps_at_infinity(&frame, zeta);
            let p = ProductPoint::from_reps(a, b).unwrap();
            assert_abs_diff_eq!(finite_u0(&p), -zeta.norm().ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn circle_profile_controls() {
        let radii: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
        let zero = circle_max_profile(|z| z.re, |z| z.re, &radii, 720);
        assert!(zero.constant && zero.log_convex);
        let linear = circle_max_profile(|z| 3.0 * z.norm().ln(), |_| 0.0, &radii, 720);
        assert!(linear.log_convex && !linear.constant);
        let convex = circle_max_profile(|z| (1.0 + z.norm_sqr()).ln() - z.norm().ln(), |_| 0.0, &radii, 720);
        assert!(convex.log_convex && !convex.constant);
        let concave = circle_max_profile(|z| -(1.0 + z.norm_sqr()).ln(), |_| 0.0, &radii, 720);
        assert!(!concave.log_convex);
    }

    #[test]
    fn degrees_on_leaves() {
        let mut rng = seeded_rng(19);
        for n in 1..=2 {
            let frame = GeodesicFrame::random(&mut rng, n);
            let [divisor, anti, tangent, normal] = leaf_degrees(&frame, DegreeOptions::default()).unwrap();
            assert_eq!(divisor.degree, 2);
            assert_eq!(anti.degree, 2 * n as i64 + 2);
            assert_eq!(tangent.degree, 2);
            assert_eq!(normal.degree, 2 * n as i64);
            for r in [&divisor, &anti, &tangent] {
                assert!(r.rounding_error < 0.05, "{r:?}");
            }
        }
    }

    #[test]
    fn degrees_do_not_depend_on_the_atlas() {
        let mut rng = seeded_rng(20);
        let frame = GeodesicFrame::random(&mut rng, 2);
        let other = DegreeOptions { cap_radius: 0.25, sigma_offset: 0.37, ..DegreeOptions::default() };
        for weight in [&Bidegree { a: 2, b: 1 } as &dyn LineBundleWeight, &Anticanonical] {
            let a = restricted_degree(weight, &frame, DegreeOptions::default()).unwrap();
            let b = restricted_degree(weight, &frame, other).unwrap();
            assert_eq!(a.degree, b.degree);
        }
    }
}
