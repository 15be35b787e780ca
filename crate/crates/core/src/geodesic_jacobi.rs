//! Geodesics and Jacobi fields on metrics given in a real coordinate chart.
//!
//! Jacobi fields are integrated as the linearisation of the geodesic equation
//! `x' = v, v' = -Γ(x)(v, v)`:
//!
//! ```text
//! J' = K,   K' = -(∂_J Γ)(v, v) - 2 Γ(v, K)
//! ```
//!
//! `K` is the coordinate derivative; the covariant derivative is `DJ/dt = K + Γ(v, J)`.
//! Initial data are always given as `(ι(0), Dι/dt(0))`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::model_embedding::ProductPoint;
use crate::numerics::{self, herm, CMat, CVec, RMat, RVec, C64, I};
use crate::projective_geometry::{self, GeodesicFrame, ProjectivePoint};
use crate::{Error, Result};

pub type MetricFn = Arc<dyn Fn(&RVec) -> RMat + Send + Sync>;
/// `(x, u, v) ↦ Γ(x)(u, v)`.
pub type ChristoffelFn = Arc<dyn Fn(&RVec, &RVec, &RVec) -> RVec + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&RVec) -> bool + Send + Sync>;

/// Step of the central differences used for Christoffel symbols built from the metric.
pub const CHRISTOFFEL_FD_STEP: f64 = 1e-5;
/// Singular values below this fraction of the largest one count as zero.
pub const MULTIPLICITY_ZERO: f64 = 1e-6;
/// Upper end of the band `[MULTIPLICITY_ZERO, MULTIPLICITY_AMBIGUOUS]` that is reported as ambiguous.
pub const MULTIPLICITY_AMBIGUOUS: f64 = 1e-4;
/// Largest relative energy drift accepted by [`integrate_geodesic`].
pub const MAX_ENERGY_DRIFT: f64 = 1e-6;

const DERIVATIVE_STEP: f64 = 1e-3;

/// Riemannian metric on an open subset of `R^m`.
#[derive(Clone)]
pub struct MetricChart {
    dim: usize,
    metric: MetricFn,
    christoffel: Option<ChristoffelFn>,
    domain: DomainFn,
    description: String,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("dim", &self.dim)
            .field("analytic_christoffel", &self.christoffel.is_some())
            .field("description", &self.description)
            .finish()
    }
}

impl MetricChart {
    pub fn new(dim: usize, metric: MetricFn, description: impl Into<String>) -> Self {
        Self { dim, metric, christoffel: None, domain: Arc::new(|_| true), description: description.into() }
    }

    pub fn with_christoffel(mut self, christoffel: ChristoffelFn) -> Self {
        self.christoffel = Some(christoffel);
        self
    }

    pub fn with_domain(mut self, domain: DomainFn) -> Self {
        self.domain = domain;
        self
    }

    /// Euclidean metric on `R^m`.
    pub fn flat(dim: usize) -> Self {
        Self::new(dim, Arc::new(move |_| RMat::identity(dim, dim)), format!("flat R^{dim}"))
            .with_christoffel(Arc::new(move |_, _, _| RVec::zeros(dim)))
    }

    /// Flat torus `R^m / (2π Z)^m`; the chart is the universal cover.
    pub fn flat_torus(dim: usize) -> Self {
        let mut chart = Self::flat(dim);
        chart.description = format!("flat torus T^{dim}");
        chart
    }

    /// Round unit sphere `S^2` in stereographic coordinates, `g = 4/(1+|x|²)² I`.
    pub fn round_sphere() -> Self {
        let metric: MetricFn = Arc::new(|x: &RVec| {
            let lambda = 2.0 / (1.0 + x.norm_squared());
            RMat::identity(2, 2) * (lambda * lambda)
        });
        // conformal metric e^{2f} δ with f = log 2 - log(1+|x|²)
        let christoffel: ChristoffelFn = Arc::new(|x: &RVec, u: &RVec, v: &RVec| {
            let grad = x * (-2.0 / (1.0 + x.norm_squared()));
            u * grad.dot(v) + v * grad.dot(u) - &grad * u.dot(v)
        });
        Self::new(2, metric, "round S^2, stereographic")
            .with_christoffel(christoffel)
            .with_domain(Arc::new(|x: &RVec| x.norm() < 1e6))
    }

    /// Affine chart of `CP^n` with the metric computed by pulling back [`projective_geometry::fs_metric`].
    /// Christoffel symbols come from finite differences of the metric.
    pub fn cpn_pullback(chart: CpnChart) -> Self {
        let dim = 2 * chart.n();
        let description = format!("CP^{} affine chart, Fubini–Study pullback", chart.n());
        let metric: MetricFn = Arc::new(move |x: &RVec| chart.pullback_metric(x));
        Self::new(dim, metric, description)
    }

    /// Affine chart of `CP^n` with the closed-form Fubini–Study metric and Christoffel symbols.
    pub fn cpn(chart: CpnChart) -> Self {
        let dim = 2 * chart.n();
        let description = format!("CP^{} affine chart", chart.n());
        let metric: MetricFn = Arc::new(move |x: &RVec| cpn_metric(&numerics::real_to_complex(x)));
        let christoffel: ChristoffelFn = Arc::new(|x: &RVec, u: &RVec, v: &RVec| {
            let xi = numerics::real_to_complex(x);
            let u = numerics::real_to_complex(u);
            let v = numerics::real_to_complex(v);
            let denom = 1.0 + xi.norm_squared();
            let g = (&u * herm(&v, &xi) + &v * herm(&u, &xi)) / C64::new(-denom, 0.0);
            numerics::complex_to_real(&g)
        });
        Self::new(dim, metric, description).with_christoffel(christoffel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.christoffel.is_some()
    }

    pub fn metric_tensor(&self, x: &RVec) -> RMat {
        (self.metric)(x)
    }

    pub fn contains(&self, x: &RVec) -> bool {
        (self.domain)(x)
    }

    pub fn inner(&self, x: &RVec, u: &RVec, v: &RVec) -> f64 {
        u.dot(&(self.metric_tensor(x) * v))
    }

    /// `Γ(x)(u, v)`.
    pub fn christoffel(&self, x: &RVec, u: &RVec, v: &RVec) -> RVec {
        match &self.christoffel {
            Some(f) => f(x, u, v),
            None => self.christoffel_fd(x, u, v),
        }
    }

    fn christoffel_fd(&self, x: &RVec, u: &RVec, v: &RVec) -> RVec {
        let h = CHRISTOFFEL_FD_STEP;
        let m = self.dim;
        let g = self.metric_tensor(x);
        let partial = |dir: &RVec| (self.metric_tensor(&(x + dir * h)) - self.metric_tensor(&(x - dir * h))) / (2.0 * h);
        let du = partial(u);
        let dv = partial(v);
        let mut third = RVec::zeros(m);
        for l in 0..m {
            let mut e = RVec::zeros(m);
            e[l] = 1.0;
            third[l] = u.dot(&(partial(&e) * v));
        }
        let rhs = (du * v + dv * u - third) * 0.5;
        g.lu().solve(&rhs).unwrap_or_else(|| RVec::from_element(m, f64::NAN))
    }

    /// Directional derivative `(∂_d Γ)(x)(v, v)`, fourth order central differences.
    fn christoffel_derivative(&self, x: &RVec, d: &RVec, v: &RVec) -> RVec {
        let len = d.norm();
        if len == 0.0 {
            return RVec::zeros(self.dim);
        }
        let e = d / len;
        let h = if self.christoffel.is_some() { DERIVATIVE_STEP } else { 10.0 * DERIVATIVE_STEP };
        let at = |s: f64| self.christoffel(&(x + &e * s), v, v);
        (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) * (len / (12.0 * h))
    }

    pub fn energy(&self, x: &RVec, v: &RVec) -> f64 {
        0.5 * self.inner(x, v, v)
    }

    /// Checks symmetry and positive definiteness of the metric at `x`.
    pub fn check_metric(&self, x: &RVec) -> Result<()> {
        let g = self.metric_tensor(x);
        let asym = (&g - g.transpose()).norm();
        if asym > 1e-9 * g.norm() {
            return Err(Error::InvalidParameter(format!("metric not symmetric (residual {asym:e})")));
        }
        let eig = SymmetricEigen::new(g).eigenvalues;
        if eig.min() <= 0.0 {
            return Err(Error::InvalidParameter("metric not positive definite".into()));
        }
        Ok(())
    }

    /// Basis of `{u : g(u, v) = 0}` that is orthonormal for `g` at `x`.
    pub fn normal_basis(&self, x: &RVec, v: &RVec) -> Vec<RVec> {
        let mut basis: Vec<RVec> = vec![v / self.inner(x, v, v).sqrt()];
        for i in 0..self.dim {
            let mut e = RVec::zeros(self.dim);
            e[i] = 1.0;
            for b in &basis {
                e -= b * self.inner(x, &e, b);
            }
            let len = self.inner(x, &e, &e).sqrt();
            if len > 1e-8 {
                basis.push(e / len);
            }
            if basis.len() == self.dim {
                break;
            }
        }
        basis.remove(0);
        basis
    }
}

/// Fubini–Study metric (scaled as in [`projective_geometry`]) in the affine coordinate `ξ`.
fn cpn_metric(xi: &CVec) -> RMat {
    let n = xi.len();
    let s = 1.0 + xi.norm_squared();
    let dim = 2 * n;
    let basis: Vec<CVec> = (0..dim)
        .map(|a| {
            let mut e = CVec::zeros(n);
            e[a / 2] = if a % 2 == 0 { C64::new(1.0, 0.0) } else { I };
            e
        })
        .collect();
    RMat::from_fn(dim, dim, |a, b| {
        let (u, v) = (&basis[a], &basis[b]);
        let h = (herm(u, v) * s - herm(u, xi) * herm(xi, v)) / (s * s);
        projective_geometry::METRIC_SCALE * h.re
    })
}

/// Affine chart `ξ ↦ [q + E ξ]` of `CP^n`, with `q` a unit vector and `E` an orthonormal
/// basis of `q^⊥`.
#[derive(Debug, Clone)]
pub struct CpnChart {
    q: CVec,
    e: CMat,
}

impl CpnChart {
    pub fn new(q: CVec) -> Result<Self> {
        let q = ProjectivePoint::new(q)?.rep().clone();
        let dim = q.len();
        let mut cols: Vec<CVec> = Vec::new();
        for i in 0..dim {
            let mut v = numerics::unit_vector(dim, i);
            v -= &q * herm(&v, &q);
            for c in &cols {
                v -= c * herm(&v, c);
            }
            if v.norm() > 1e-6 {
                cols.push(&v / C64::new(v.norm(), 0.0));
            }
            if cols.len() == dim - 1 {
                break;
            }
        }
        Ok(Self { e: CMat::from_columns(&cols), q })
    }

    /// Chart centred at the pole `(z + iw)/√2` of the geodesic; the whole geodesic lies on `|ξ| = 1`.
    pub fn for_geodesic(frame: &GeodesicFrame) -> Self {
        let q = (frame.z() + frame.w() * I) / C64::new(std::f64::consts::SQRT_2, 0.0);
        let mut cols = vec![(frame.z() - frame.w() * I) / C64::new(std::f64::consts::SQRT_2, 0.0)];
        let dim = q.len();
        for i in 0..dim {
            let mut v = numerics::unit_vector(dim, i);
            for c in [frame.z(), frame.w()] {
                v -= c * herm(&v, c);
            }
            for c in &cols[1..] {
                v -= c * herm(&v, c);
            }
            if v.norm() > 1e-6 {
                cols.push(&v / C64::new(v.norm(), 0.0));
            }
            if cols.len() == dim - 1 {
                break;
            }
        }
        Self { e: CMat::from_columns(&cols), q }
    }

    pub fn n(&self) -> usize {
        self.q.len() - 1
    }

    /// Unnormalised representative `q + E ξ`.
    pub fn rep(&self, x: &RVec) -> CVec {
        &self.q + &self.e * numerics::real_to_complex(x)
    }

    pub fn point(&self, x: &RVec) -> ProjectivePoint {
        ProjectivePoint::new(self.rep(x)).expect("chart representative is nonzero")
    }

    /// Coordinates of a point, `None` when it lies on the hyperplane at infinity of the chart.
    pub fn coordinates(&self, p: &CVec) -> Option<RVec> {
        let lead = herm(p, &self.q);
        if lead.norm() < 1e-12 * p.norm() {
            return None;
        }
        let xi = self.e.adjoint() * p / lead;
        Some(numerics::complex_to_real(&xi))
    }

    /// Chart vector of the tangent vector with horizontal lift `h` at the representative `p`.
    pub fn tangent_coordinates(&self, p: &CVec, h: &CVec) -> RVec {
        let lead = herm(p, &self.q);
        let dlead = herm(h, &self.q);
        let dxi = (self.e.adjoint() * h * lead - self.e.adjoint() * p * dlead) / (lead * lead);
        numerics::complex_to_real(&dxi)
    }

    /// Horizontal lift, at the unit representative of `point(x)`, of the chart vector `u`.
    pub fn horizontal_lift(&self, x: &RVec, u: &RVec) -> CVec {
        let xi = numerics::real_to_complex(x);
        let du = numerics::real_to_complex(u);
        let s = (1.0 + xi.norm_squared()).sqrt();
        let rep = self.rep(x) / C64::new(s, 0.0);
        let d_rep = &self.e * &du / C64::new(s, 0.0) - &rep * C64::new(herm(&du, &xi).re / (s * s), 0.0);
        &d_rep - &rep * herm(&d_rep, &rep)
    }

    fn pullback_metric(&self, x: &RVec) -> RMat {
        let dim = 2 * self.n();
        let at = self.point(x);
        // use the same unit representative as `horizontal_lift`
        let s = (1.0 + x.norm_squared()).sqrt();
        let rep = self.rep(x) / C64::new(s, 0.0);
        let phase = herm(&rep, at.rep());
        let lifts: Vec<CVec> = (0..dim)
            .map(|a| {
                let mut u = RVec::zeros(dim);
                u[a] = 1.0;
                self.horizontal_lift(x, &u) * phase.conj()
            })
            .collect();
        RMat::from_fn(dim, dim, |a, b| {
            projective_geometry::fs_metric(&lifts[a], &lifts[b], &at).expect("horizontal lifts are tangent")
        })
    }

    /// Initial position and velocity of the geodesic of `frame` in this chart.
    pub fn geodesic_initial_data(&self, frame: &GeodesicFrame) -> Option<(RVec, RVec)> {
        let x0 = self.coordinates(frame.z())?;
        let h = frame.w() * C64::new(0.5, 0.0);
        Some((x0, self.tangent_coordinates(frame.z(), &h)))
    }
}

/// Sampled solution of the geodesic equation.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub positions: Vec<RVec>,
    pub velocities: Vec<RVec>,
    pub step: f64,
    /// Largest relative deviation of the energy from its initial value.
    pub energy_drift: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> (&RVec, &RVec) {
        (&self.positions[0], &self.velocities[0])
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty path")
    }
}

fn step_count(t_end: f64, step: f64) -> Result<(usize, f64)> {
    if !(t_end > 0.0) || !(step > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("need t_end > 0 and step > 0, got {t_end}, {step}")));
    }
    let steps = (t_end / step).ceil().max(1.0) as usize;
    Ok((steps, t_end / steps as f64))
}

pub fn integrate_geodesic(chart: &MetricChart, x0: &RVec, v0: &RVec, t_end: f64, step: f64) -> Result<GeodesicPath> {
    let m = chart.dim;
    if x0.len() != m || v0.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: x0.len().min(v0.len()) });
    }
    if v0.norm() == 0.0 {
        return Err(Error::InvalidParameter("initial velocity must be nonzero".into()));
    }
    if !chart.contains(x0) {
        return Err(Error::LeftChartDomain { t: 0.0 });
    }
    let (steps, h) = step_count(t_end, step)?;
    let rhs = |_t: f64, y: &RVec| {
        let x = y.rows(0, m).into_owned();
        let v = y.rows(m, m).into_owned();
        let a = -chart.christoffel(&x, &v, &v);
        let mut out = RVec::zeros(2 * m);
        out.rows_mut(0, m).copy_from(&v);
        out.rows_mut(m, m).copy_from(&a);
        out
    };
    let e0 = chart.energy(x0, v0);
    let mut y = RVec::zeros(2 * m);
    y.rows_mut(0, m).copy_from(x0);
    y.rows_mut(m, m).copy_from(v0);
    let mut path = GeodesicPath {
        times: vec![0.0],
        positions: vec![x0.clone()],
        velocities: vec![v0.clone()],
        step: h,
        energy_drift: 0.0,
    };
    for k in 0..steps {
        let t = k as f64 * h;
        y = numerics::rk4_step(&rhs, t, &y, h);
        let x = y.rows(0, m).into_owned();
        let v = y.rows(m, m).into_owned();
        if !chart.contains(&x) || !x.iter().all(|c| c.is_finite()) {
            return Err(Error::LeftChartDomain { t: t + h });
        }
        let drift = ((chart.energy(&x, &v) - e0) / e0).abs();
        path.energy_drift = path.energy_drift.max(drift);
        if drift > MAX_ENERGY_DRIFT {
            return Err(Error::StepTooLarge { drift });
        }
        path.times.push(t + h);
        path.positions.push(x);
        path.velocities.push(v);
    }
    Ok(path)
}

/// Geodesic integrated together with a family of Jacobi fields.
///
/// State layout: `[x, v, J_1, K_1, ..., J_k, K_k]`.
#[derive(Debug, Clone)]
struct JacobiBundle {
    chart: MetricChart,
    count: usize,
    step: f64,
    times: Vec<f64>,
    states: Vec<RVec>,
}

impl JacobiBundle {
    fn integrate(chart: &MetricChart, path: &GeodesicPath, initial: &[(RVec, RVec)], step: f64) -> Result<Self> {
        let m = chart.dim;
        let (x0, v0) = path.start();
        let mut y = RVec::zeros(2 * m * (1 + initial.len()));
        y.rows_mut(0, m).copy_from(x0);
        y.rows_mut(m, m).copy_from(v0);
        for (i, (iota, diota)) in initial.iter().enumerate() {
            if iota.len() != m || diota.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: iota.len().min(diota.len()) });
            }
            let k0 = diota - chart.christoffel(x0, v0, iota);
            y.rows_mut(2 * m * (i + 1), m).copy_from(iota);
            y.rows_mut(2 * m * (i + 1) + m, m).copy_from(&k0);
        }
        let (steps, h) = step_count(path.t_end(), step)?;
        let mut bundle = Self { chart: chart.clone(), count: initial.len(), step: h, times: vec![0.0], states: vec![y.clone()] };
        for k in 0..steps {
            let t = k as f64 * h;
            y = bundle.step_from(t, &y, h);
            if !y.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite(format!("Jacobi integration at t = {}", t + h)));
            }
            let x = y.rows(0, m).into_owned();
            if !chart.contains(&x) {
                return Err(Error::LeftChartDomain { t: t + h });
            }
            bundle.times.push(t + h);
            bundle.states.push(y.clone());
        }
        Ok(bundle)
    }

    fn rhs(&self, y: &RVec) -> RVec {
        let m = self.chart.dim;
        let x = y.rows(0, m).into_owned();
        let v = y.rows(m, m).into_owned();
        let mut out = RVec::zeros(y.len());
        out.rows_mut(0, m).copy_from(&v);
        out.rows_mut(m, m).copy_from(&(-self.chart.christoffel(&x, &v, &v)));
        for i in 0..self.count {
            let base = 2 * m * (i + 1);
            let j = y.rows(base, m).into_owned();
            let kk = y.rows(base + m, m).into_owned();
            let dk = -self.chart.christoffel_derivative(&x, &j, &v) - self.chart.christoffel(&x, &v, &kk) * 2.0;
            out.rows_mut(base, m).copy_from(&kk);
            out.rows_mut(base + m, m).copy_from(&dk);
        }
        out
    }

    fn step_from(&self, t: f64, y: &RVec, h: f64) -> RVec {
        numerics::rk4_step(&|_t, y: &RVec| self.rhs(y), t, y, h)
    }

    fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Full state at time `t`, stepping from the nearest earlier sample.
    fn state_at(&self, t: f64) -> Result<RVec> {
        if !(t >= -1e-12 && t <= self.t_end() + 1e-12) {
            return Err(Error::OutOfRange { value: t, lo: 0.0, hi: self.t_end() });
        }
        let k = ((t / self.step).floor() as usize).min(self.states.len() - 1);
        let dt = t - self.times[k];
        if dt.abs() < 1e-15 {
            return Ok(self.states[k].clone());
        }
        Ok(self.step_from(self.times[k], &self.states[k], dt))
    }

    fn split(&self, y: &RVec, i: usize) -> (RVec, RVec, RVec, RVec) {
        let m = self.chart.dim;
        let base = 2 * m * (i + 1);
        (
            y.rows(0, m).into_owned(),
            y.rows(m, m).into_owned(),
            y.rows(base, m).into_owned(),
            y.rows(base + m, m).into_owned(),
        )
    }

    /// Gram matrix `g(J_i, J_j)` of the fields at the state `y`.
    fn gram(&self, y: &RVec) -> RMat {
        let m = self.chart.dim;
        let x = y.rows(0, m).into_owned();
        let g = self.chart.metric_tensor(&x);
        let fields: Vec<RVec> = (0..self.count).map(|i| self.split(y, i).2).collect();
        RMat::from_fn(self.count, self.count, |a, b| fields[a].dot(&(&g * &fields[b])))
    }

    /// Singular values of the field matrix in a `g`-orthonormal frame, ascending.
    fn singular_values(&self, y: &RVec) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.gram(y));
        let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        sv.sort_by(f64::total_cmp);
        sv
    }
}

/// One Jacobi field along a geodesic.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    bundle: JacobiBundle,
    /// Difference between the endpoint values at the working step and at half the step.
    pub richardson_error: f64,
}

/// One sample `(t, ι(t), Dι/dt(t))` of a Jacobi field.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSample {
    pub t: f64,
    pub position: RVec,
    pub iota: RVec,
    pub covariant_derivative: RVec,
}

impl JacobiSolution {
    pub fn len(&self) -> usize {
        self.bundle.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundle.states.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.bundle.times
    }

    fn sample_from_state(&self, t: f64, y: &RVec) -> JacobiSample {
        let (x, v, j, k) = self.bundle.split(y, 0);
        let cov = &k + self.bundle.chart.christoffel(&x, &v, &j);
        JacobiSample { t, position: x, iota: j, covariant_derivative: cov }
    }

    pub fn sample(&self, k: usize) -> JacobiSample {
        self.sample_from_state(self.bundle.times[k], &self.bundle.states[k])
    }

    /// Field at an arbitrary time of the integrated range.
    pub fn at(&self, t: f64) -> Result<JacobiSample> {
        let y = self.bundle.state_at(t)?;
        Ok(self.sample_from_state(t, &y))
    }

    /// `g(ι, ι)^{1/2}` at sample `k`.
    pub fn length(&self, k: usize) -> f64 {
        let s = self.sample(k);
        self.bundle.chart.inner(&s.position, &s.iota, &s.iota).max(0.0).sqrt()
    }

    /// Residual of the Jacobi equation `D²ι/dt² + R(ι, γ')γ' = 0` at sample `k`,
    /// from the second-order difference of the covariant derivative against the
    /// integrated right-hand side.
    pub fn residual(&self, k: usize) -> f64 {
        let b = &self.bundle;
        if k == 0 || k + 1 >= b.states.len() {
            return 0.0;
        }
        let m = b.chart.dim;
        let d = (&b.states[k + 1] - &b.states[k - 1]) / (2.0 * b.step);
        let rhs = b.rhs(&b.states[k]);
        let diff = (d - rhs).rows(2 * m, 2 * m).norm();
        diff * b.step
    }
}

/// Jacobi field along `path` with `ι(0) = iota0` and `Dι/dt(0) = diota0`.
pub fn jacobi_field(chart: &MetricChart, path: &GeodesicPath, iota0: &RVec, diota0: &RVec) -> Result<JacobiSolution> {
    let initial = [(iota0.clone(), diota0.clone())];
    let bundle = JacobiBundle::integrate(chart, path, &initial, path.step)?;
    let half = JacobiBundle::integrate(chart, path, &initial, 0.5 * path.step)?;
    let m = chart.dim;
    let end = bundle.states.last().expect("nonempty");
    let end_half = half.states.last().expect("nonempty");
    let richardson_error = (end - end_half).rows(2 * m, 2 * m).norm();
    Ok(JacobiSolution { bundle, richardson_error })
}

/// Conjugate point with the dimension of the space of Jacobi fields vanishing there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
}

/// Jacobi fields `η_i` with `η_i(0) = 0`, `Dη_i(0) = v_i` for a `g`-orthonormal basis `v_i` of `γ'(0)^⊥`.
fn normal_bundle(chart: &MetricChart, path: &GeodesicPath) -> Result<JacobiBundle> {
    let (x0, v0) = path.start();
    let initial: Vec<(RVec, RVec)> = chart
        .normal_basis(x0, v0)
        .into_iter()
        .map(|b| (RVec::zeros(chart.dim), b))
        .collect();
    JacobiBundle::integrate(chart, path, &initial, path.step)
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, f(t)?))
}

/// Refined zeros of the normal Jacobi matrix inside `interval`, each with the kernel
/// combination of the fields and the singular values there.
struct Zero {
    t: f64,
    multiplicity: usize,
    kernel: Vec<RVec>,
}

fn find_zeros(bundle: &JacobiBundle, interval: (f64, f64)) -> Result<Vec<Zero>> {
    let (lo, hi) = interval;
    let mut zeros = Vec::new();
    if bundle.count == 0 {
        return Ok(zeros);
    }
    let extremes: Vec<(f64, f64)> = bundle
        .states
        .iter()
        .map(|y| {
            let sv = bundle.singular_values(y);
            (sv[0], *sv.last().expect("nonempty"))
        })
        .collect();
    let smallest: Vec<f64> = extremes.iter().map(|e| e.0).collect();
    let smax = extremes.iter().map(|e| e.1).fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(zeros);
    }
    for k in 1..smallest.len() - 1 {
        let t = bundle.times[k];
        if !(t > lo && t < hi) {
            continue;
        }
        if !(smallest[k] <= smallest[k - 1] && smallest[k] < smallest[k + 1]) {
            continue;
        }
        if smallest[k] > 1e-2 * smax {
            continue;
        }
        let objective = |t: f64| bundle.state_at(t).map(|y| bundle.singular_values(&y)[0]);
        let (t_star, _) = golden_section(objective, bundle.times[k - 1], bundle.times[k + 1])?;
        if !(t_star > lo && t_star < hi) {
            continue;
        }
        let y = bundle.state_at(t_star)?;
        let sv = bundle.singular_values(&y);
        if sv[0] > MULTIPLICITY_AMBIGUOUS * smax {
            continue;
        }
        if let Some(s) = sv.iter().find(|s| **s >= MULTIPLICITY_ZERO * smax && **s <= MULTIPLICITY_AMBIGUOUS * smax) {
            return Err(Error::AmbiguousMultiplicity { t: t_star, ratio: s / smax });
        }
        let multiplicity = sv.iter().filter(|s| **s < MULTIPLICITY_ZERO * smax).count();
        let eig = SymmetricEigen::new(bundle.gram(&y));
        let mut order: Vec<usize> = (0..bundle.count).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let kernel = order[..multiplicity].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        zeros.push(Zero { t: t_star, multiplicity, kernel });
    }
    Ok(zeros)
}

/// Conjugate points of `γ(0)` along `path` with `t` strictly inside `interval`.
pub fn conjugate_points(chart: &MetricChart, path: &GeodesicPath, interval: (f64, f64)) -> Result<Vec<ConjugatePoint>> {
    let bundle = normal_bundle(chart, path)?;
    Ok(find_zeros(&bundle, interval)?.iter().map(Zero::point).collect())
}

impl Zero {
    fn point(&self) -> ConjugatePoint {
        ConjugatePoint { t: self.t, multiplicity: self.multiplicity }
    }
}

/// Number of conjugate points in `(0, period)` counted with multiplicity.
pub fn morse_index(chart: &MetricChart, path: &GeodesicPath, period: f64) -> Result<usize> {
    Ok(conjugate_points(chart, path, (0.0, period))?.iter().map(|c| c.multiplicity).sum())
}

/// Total number of first-order zeros in `[0, period)` of the normal Jacobi fields
/// `η_i(0) = 0`, `Dη_i(0) = v_i`; every field contributes its zero at `t = 0`.
pub fn vanishing_order_total(chart: &MetricChart, path: &GeodesicPath, period: f64) -> Result<usize> {
    let bundle = normal_bundle(chart, path)?;
    let zeros = find_zeros(&bundle, (0.0, period))?;
    vanishing_order(chart, &bundle, &zeros)
}

/// Conjugate points, Morse index and total vanishing order over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseSummary {
    pub conjugate_points: Vec<ConjugatePoint>,
    pub index: usize,
    pub vanishing_order: usize,
}

/// [`conjugate_points`], [`morse_index`] and [`vanishing_order_total`] from one integration.
pub fn morse_summary(chart: &MetricChart, path: &GeodesicPath, period: f64) -> Result<MorseSummary> {
    let bundle = normal_bundle(chart, path)?;
    let zeros = find_zeros(&bundle, (0.0, period))?;
    let vanishing_order = vanishing_order(chart, &bundle, &zeros)?;
    let conjugate_points: Vec<ConjugatePoint> = zeros.iter().map(Zero::point).collect();
    let index = conjugate_points.iter().map(|c| c.multiplicity).sum();
    Ok(MorseSummary { conjugate_points, index, vanishing_order })
}

fn vanishing_order(chart: &MetricChart, bundle: &JacobiBundle, zeros: &[Zero]) -> Result<usize> {
    let m = chart.dim;
    let mut total = bundle.count;
    for zero in zeros {
        let y = bundle.state_at(zero.t)?;
        let x = y.rows(0, m).into_owned();
        let v = y.rows(m, m).into_owned();
        let scale = (0..bundle.count)
            .map(|i| {
                let (_, _, j, k) = bundle.split(&y, i);
                let cov = &k + chart.christoffel(&x, &v, &j);
                chart.inner(&x, &cov, &cov).sqrt()
            })
            .fold(0.0, f64::max);
        for c in &zero.kernel {
            let mut cov = RVec::zeros(m);
            for i in 0..bundle.count {
                let (_, _, j, k) = bundle.split(&y, i);
                cov += (&k + chart.christoffel(&x, &v, &j)) * c[i];
            }
            if chart.inner(&x, &cov, &cov).sqrt() < MULTIPLICITY_ZERO * scale.max(1e-300) {
                return Err(Error::DegenerateZero { t: zero.t });
            }
        }
        total += zero.multiplicity;
    }
    Ok(total)
}

/// Parallel vector field `V(σ + iτ) = (ι(σ), τ Dι/dt(σ))` on the leaf through a geodesic.
#[derive(Debug, Clone)]
pub struct ParallelField {
    pub jacobi: JacobiSolution,
}

impl ParallelField {
    pub fn new(jacobi: JacobiSolution) -> Self {
        Self { jacobi }
    }
}

/// Horizontal and vertical parts of the parallel field at `σ + iτ`.
pub fn parallel_field_eval(pf: &ParallelField, sigma: f64, tau: f64) -> Result<(RVec, RVec)> {
    let s = pf.jacobi.at(sigma)?;
    Ok((s.iota, s.covariant_derivative * tau))
}

/// Frame of a first-order variation of the geodesic `frame` through geodesics, whose
/// variation field is the Jacobi field with `ι(0) = iota0` and `Dι/dt(0) = diota0`
/// (horizontal lifts at `z`, normal to the geodesic).
pub fn cpn_varied_frame(frame: &GeodesicFrame, iota0: &CVec, diota0: &CVec, eps: f64) -> GeodesicFrame {
    // transvection along ι(0) moves z and parallel-transports w; Dι(0) tilts the direction
    let z = frame.z() + iota0 * C64::new(eps, 0.0);
    let aw = frame.z() * (-herm(frame.w(), iota0));
    let w = frame.w() + (aw + diota0 * C64::new(2.0, 0.0)) * C64::new(eps, 0.0);
    GeodesicFrame::orthonormalized(z, w).expect("small variation of an orthonormal frame")
}

/// Horizontal derivative at `ε = 0` of a curve of projective points, fourth order.
pub fn horizontal_derivative<F: Fn(f64) -> ProjectivePoint>(curve: F, eps: f64) -> CVec {
    let p0 = curve(0.0);
    let aligned = |s: f64| {
        let p = curve(s);
        let h = herm(p.rep(), p0.rep());
        p.rep() * (h.conj() / h.norm())
    };
    let d = (aligned(-2.0 * eps) - aligned(2.0 * eps) + (aligned(eps) - aligned(-eps)) * C64::new(8.0, 0.0))
        / C64::new(12.0 * eps, 0.0);
    &d - p0.rep() * herm(&d, p0.rep())
}

/// Push-forward to `CP^n x CP^n` of the parallel field of the Jacobi data `(iota0, diota0)`,
/// evaluated at the image of `point(frame)`; returned as horizontal lifts in both factors.
pub fn cpn_parallel_pushforward<F>(frame: &GeodesicFrame, iota0: &CVec, diota0: &CVec, point: F) -> (CVec, CVec)
where
    F: Fn(&GeodesicFrame) -> ProductPoint,
{
    let eps = 1e-3;
    let first = horizontal_derivative(|s| point(&cpn_varied_frame(frame, iota0, diota0, s)).first().clone(), eps);
    let second = horizontal_derivative(|s| point(&cpn_varied_frame(frame, iota0, diota0, s)).second().clone(), eps);
    (first, second)
}

/// `g`-orthonormal basis of the normal space of the geodesic at `z`, as horizontal lifts:
/// the complex-line direction `i w / 2` first, then `u/2, i u/2` for an orthonormal basis
/// `u` of `{z, w}^⊥`.
pub fn cpn_normal_lifts(frame: &GeodesicFrame) -> Vec<CVec> {
    let dim = frame.z().len();
    let mut out = vec![frame.w() * C64::new(0.0, 0.5)];
    let mut complement: Vec<CVec> = Vec::new();
    for i in 0..dim {
        let mut v = numerics::unit_vector(dim, i);
        for c in [frame.z(), frame.w()] {
            v -= c * herm(&v, c);
        }
        for c in &complement {
            v -= c * herm(&v, c);
        }
        if v.norm() > 1e-6 {
            complement.push(&v / C64::new(v.norm(), 0.0));
        }
        if complement.len() == dim - 2 {
            break;
        }
    }
    for u in complement {
        out.push(&u * C64::new(0.5, 0.0));
        out.push(&u * C64::new(0.0, 0.5));
    }
    out
}

/// Closed geodesic of `frame` integrated over one period in the chart centred at its pole.
pub fn cpn_closed_geodesic(frame: &GeodesicFrame, step: f64) -> Result<(MetricChart, GeodesicPath)> {
    let chart = CpnChart::for_geodesic(frame);
    let (x0, v0) = chart.geodesic_initial_data(frame).expect("z is inside the pole chart");
    let metric = MetricChart::cpn(chart);
    let path = integrate_geodesic(&metric, &x0, &v0, 2.0 * std::f64::consts::PI, step)?;
    Ok((metric, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_embedding::{leaf_end_infinity, leaf_map, LeafCoordinate};
    use crate::numerics::seeded_rng;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const STEP: f64 = 2.0 * PI * 5e-4;

    fn rv(v: &[f64]) -> RVec {
        RVec::from_column_slice(v)
    }

    #[test]
    fn flat_geodesic_is_a_line() {
        let chart = MetricChart::flat(3);
        let path = integrate_geodesic(&chart, &rv(&[1.0, 0.0, 0.0]), &rv(&[0.0, 1.0, 2.0]), 2.0, 0.01).unwrap();
        let end = path.positions.last().unwrap();
        assert_abs_diff_eq!((end - rv(&[1.0, 2.0, 4.0])).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_equator_is_closed() {
        let chart = MetricChart::round_sphere();
        let path = integrate_geodesic(&chart, &rv(&[1.0, 0.0]), &rv(&[0.0, 1.0]), 2.0 * PI, STEP).unwrap();
        assert_abs_diff_eq!((path.positions.last().unwrap() - rv(&[1.0, 0.0])).norm(), 0.0, epsilon = 1e-10);
        assert!(path.energy_drift < 1e-8);
        assert!(path.positions.iter().all(|x| (x.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn geodesic_leaving_the_chart_is_reported() {
        let chart = MetricChart::round_sphere();
        // great circle through the north pole, which is at infinity in this chart
        let err = integrate_geodesic(&chart, &rv(&[0.0, 0.0]), &rv(&[2.0, 0.0]), 2.0 * PI, 0.01).unwrap_err();
        assert!(matches!(err, Error::LeftChartDomain { .. } | Error::StepTooLarge { .. }));
    }

    #[test]
    fn large_steps_are_rejected() {
        let chart = MetricChart::round_sphere();
        let err = integrate_geodesic(&chart, &rv(&[0.3, 0.0]), &rv(&[0.0, 3.0]), 2.0 * PI, 0.5).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. } | Error::LeftChartDomain { .. }));
    }

    #[test]
    fn pullback_metric_matches_closed_form() {
        let mut rng = seeded_rng(5);
        let q = numerics::random_unit_cvec(&mut rng, 3);
        let chart = CpnChart::new(q).unwrap();
        let pullback = MetricChart::cpn_pullback(chart.clone());
        let closed = MetricChart::cpn(chart);
        for _ in 0..10 {
            let x = numerics::complex_to_real(&numerics::random_cvec(&mut rng, 2));
            let a = pullback.metric_tensor(&x);
            let b = closed.metric_tensor(&x);
            assert!((&a - &b).norm() < 1e-12 * b.norm());
            pullback.check_metric(&x).unwrap();
        }
    }

    #[test]
    fn analytic_christoffels_match_metric_differences() {
        let mut rng = seeded_rng(6);
        let chart = CpnChart::new(numerics::random_unit_cvec(&mut rng, 3)).unwrap();
        let fd = MetricChart::cpn_pullback(chart.clone());
        let exact = MetricChart::cpn(chart);
        for _ in 0..5 {
            let x = numerics::complex_to_real(&(numerics::random_cvec(&mut rng, 2) * C64::new(0.5, 0.0)));
            let u = numerics::complex_to_real(&numerics::random_cvec(&mut rng, 2));
            let v = numerics::complex_to_real(&numerics::random_cvec(&mut rng, 2));
            let a = fd.christoffel(&x, &u, &v);
            let b = exact.christoffel(&x, &u, &v);
            assert!((&a - &b).norm() < 1e-7 * (1.0 + b.norm()), "{a} vs {b}");
        }
        let sphere = MetricChart::round_sphere();
        let sphere_fd = MetricChart::new(2, sphere.metric.clone(), "round S^2 without Christoffel supplier");
        let x = rv(&[0.3, -0.4]);
        let u = rv(&[1.0, 0.5]);
        let v = rv(&[-0.2, 0.7]);
        assert!((sphere.christoffel(&x, &u, &v) - sphere_fd.christoffel(&x, &u, &v)).norm() < 1e-8);
    }

    #[test]
    fn cpn_pullback_geodesic_follows_projective_geodesic() {
        let mut rng = seeded_rng(11);
        let frame = GeodesicFrame::random(&mut rng, 2);
        let chart = CpnChart::for_geodesic(&frame);
        let (x0, v0) = chart.geodesic_initial_data(&frame).unwrap();
        let metric = MetricChart::cpn_pullback(chart.clone());
        assert_abs_diff_eq!(metric.inner(&x0, &v0, &v0), 1.0, epsilon = 1e-12);
        let path = integrate_geodesic(&metric, &x0, &v0, 2.0 * PI, 2.0 * PI / 1000.0).unwrap();
        for (t, x) in path.times.iter().zip(&path.positions).step_by(50) {
            let p = chart.point(x);
            let q = projective_geometry::geodesic_point(&frame, *t);
            assert!(p.distance_proxy(&q) < 1e-6, "t = {t}");
        }
        assert!(path.energy_drift < 1e-8);
    }

    #[test]
    fn flat_jacobi_fields_are_affine() {
        let chart = MetricChart::flat(2);
        let path = integrate_geodesic(&chart, &rv(&[0.0, 0.0]), &rv(&[1.0, 0.0]), 3.0, 0.01).unwrap();
        let sol = jacobi_field(&chart, &path, &rv(&[0.0, 1.0]), &rv(&[0.5, 2.0])).unwrap();
        let end = sol.at(3.0).unwrap();
        assert_abs_diff_eq!((end.iota - rv(&[1.5, 7.0])).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_curvature_jacobi_fields() {
        let mut rng = seeded_rng(2);
        let frame = GeodesicFrame::random(&mut rng, 2);
        let (chart, path) = cpn_closed_geodesic(&frame, STEP).unwrap();
        let cpn = CpnChart::for_geodesic(&frame);
        let lifts = cpn_normal_lifts(&frame);
        let zero = RVec::zeros(4);
        for (idx, lift) in lifts.iter().enumerate() {
            let d0 = cpn.tangent_coordinates(frame.z(), lift);
            assert_abs_diff_eq!(chart.inner(&path.positions[0], &d0, &d0), 1.0, epsilon = 1e-12);
            let sol = jacobi_field(&chart, &path, &zero, &d0).unwrap();
            assert!(sol.richardson_error < 1e-8);
            for k in (0..sol.len()).step_by(97) {
                let t = sol.times()[k];
                let expected = if idx == 0 { t.sin().abs() } else { 2.0 * (0.5 * t).sin().abs() };
                assert_abs_diff_eq!(sol.length(k), expected, epsilon = 1e-8);
                assert!(sol.residual(k) < 1e-6);
            }
        }
    }

    #[test]
    fn sphere_jacobi_field_is_sine() {
        let chart = MetricChart::round_sphere();
        let path = integrate_geodesic(&chart, &rv(&[1.0, 0.0]), &rv(&[0.0, 1.0]), 2.0 * PI, STEP).unwrap();
        let sol = jacobi_field(&chart, &path, &rv(&[0.0, 0.0]), &rv(&[1.0, 0.0])).unwrap();
        for k in (0..sol.len()).step_by(101) {
            assert_abs_diff_eq!(sol.length(k), sol.times()[k].sin().abs(), epsilon = 1e-8);
        }
    }

    #[test]
    fn conjugate_points_examples() {
        let sphere = MetricChart::round_sphere();
        let path = integrate_geodesic(&sphere, &rv(&[1.0, 0.0]), &rv(&[0.0, 1.0]), 2.0 * PI, STEP).unwrap();
        let pts = conjugate_points(&sphere, &path, (0.0, 2.0 * PI)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_abs_diff_eq!(pts[0].t, PI, epsilon = 1e-8);
        assert_eq!(pts[0].multiplicity, 1);
        assert_eq!(morse_index(&sphere, &path, 2.0 * PI).unwrap(), 1);

        let frame = GeodesicFrame::standard(2);
        let (chart, path) = cpn_closed_geodesic(&frame, STEP).unwrap();
        let pts = conjugate_points(&chart, &path, (0.0, 2.0 * PI)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_abs_diff_eq!(pts[0].t, PI, epsilon = 1e-8);
        assert_eq!(pts[0].multiplicity, 1);

        let flat = MetricChart::flat_torus(2);
        let path = integrate_geodesic(&flat, &rv(&[0.0, 0.0]), &rv(&[1.0, 0.0]), 2.0 * PI, STEP).unwrap();
        assert!(conjugate_points(&flat, &path, (0.0, 2.0 * PI)).unwrap().is_empty());
        assert_eq!(morse_index(&flat, &path, 2.0 * PI).unwrap(), 0);
    }

    #[test]
    fn vanishing_orders_of_cpn() {
        let mut rng = seeded_rng(17);
        for n in 1..=3 {
            let frame = GeodesicFrame::random(&mut rng, n);
            let (chart, path) = cpn_closed_geodesic(&frame, STEP).unwrap();
            assert_eq!(morse_index(&chart, &path, 2.0 * PI).unwrap(), 1);
            assert_eq!(vanishing_order_total(&chart, &path, 2.0 * PI).unwrap(), 2 * n);
        }
    }

    #[test]
    fn jacobi_fields_are_linear_and_conserve_the_wronskian() {
        let mut rng = seeded_rng(23);
        let frame = GeodesicFrame::random(&mut rng, 2);
        let (chart, path) = cpn_closed_geodesic(&frame, STEP).unwrap();
        let random = |rng: &mut rand_chacha::ChaCha8Rng| numerics::complex_to_real(&numerics::random_cvec(rng, 2));
        let (a0, a1, b0, b1) = (random(&mut rng), random(&mut rng), random(&mut rng), random(&mut rng));
        let (p, q) = (0.7, -1.3);
        let fa = jacobi_field(&chart, &path, &a0, &a1).unwrap();
        let fb = jacobi_field(&chart, &path, &b0, &b1).unwrap();
        let fc = jacobi_field(&chart, &path, &(&a0 * p + &b0 * q), &(&a1 * p + &b1 * q)).unwrap();
        let wronskian = |k: usize| {
            let (sa, sb) = (fa.sample(k), fb.sample(k));
            chart.inner(&sa.position, &sa.covariant_derivative, &sb.iota)
                - chart.inner(&sa.position, &sa.iota, &sb.covariant_derivative)
        };
        let w0 = wronskian(0);
        for k in (0..fa.len()).step_by(73) {
            let (sa, sb, sc) = (fa.sample(k), fb.sample(k), fc.sample(k));
            assert!((sc.iota - (sa.iota * p + sb.iota * q)).norm() < 1e-8);
            assert!((wronskian(k) - w0).abs() < 1e-7);
        }
    }

    #[test]
    fn parallel_field_examples() {
        let chart = MetricChart::round_sphere();
        let path = integrate_geodesic(&chart, &rv(&[1.0, 0.0]), &rv(&[0.0, 1.0]), 2.0 * PI, STEP).unwrap();
        let sol = jacobi_field(&chart, &path, &rv(&[0.5, 0.0]), &rv(&[0.25, 0.0])).unwrap();
        let pf = ParallelField::new(sol);
        let (h, v) = parallel_field_eval(&pf, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!((h - rv(&[0.5, 0.0])).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v - rv(&[0.25, 0.0])).norm(), 0.0, epsilon = 1e-12);
        let (h, v) = parallel_field_eval(&pf, 1.0, 0.0).unwrap();
        assert!(h.norm() > 0.1);
        assert_eq!(v.norm(), 0.0);
        let (_, v2) = parallel_field_eval(&pf, 1.0, 2.0).unwrap();
        let (_, v1) = parallel_field_eval(&pf, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!((v2 - v1 * 2.0).norm(), 0.0, epsilon = 1e-14);
        assert!(matches!(parallel_field_eval(&pf, 7.0, 1.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn parallel_fields_match_the_leaf_pushforward() {
        let mut rng = seeded_rng(31);
        let frame = GeodesicFrame::random(&mut rng, 2);
        let (chart, path) = cpn_closed_geodesic(&frame, STEP).unwrap();
        let cpn = CpnChart::for_geodesic(&frame);
        let lifts = cpn_normal_lifts(&frame);
        let (h0, k0) = (&lifts[1], &lifts[2]);
        let sol = jacobi_field(&chart, &path, &cpn.tangent_coordinates(frame.z(), h0), &cpn.tangent_coordinates(frame.z(), k0)).unwrap();
        let pf = ParallelField::new(sol);
        let sigma = 0.8;
        let (h, _) = parallel_field_eval(&pf, sigma, 0.0).unwrap();
        let (first, second) = cpn_parallel_pushforward(&frame, h0, k0, |f| leaf_map(f, LeafCoordinate::new(sigma, 0.0)));
        let sample = pf.jacobi.at(sigma).unwrap();
        let metric = MetricChart::cpn(cpn.clone());
        let from_chart = metric.inner(&sample.position, &h, &h).sqrt();
        // on M the push-forward is (ι, ῑ), each factor carrying the full length
        let p = projective_geometry::geodesic_point(&frame, sigma);
        let len_first = projective_geometry::fs_metric(&first, &first, &p).unwrap().sqrt();
        let len_second = projective_geometry::fs_metric(&second, &second, &p.conjugate()).unwrap().sqrt();
        assert_abs_diff_eq!(from_chart, len_first, epsilon = 1e-7);
        assert_abs_diff_eq!(len_first, len_second, epsilon = 1e-9);
    }

    #[test]
    fn parallel_fields_do_not_vanish_at_the_divisor() {
        let mut rng = seeded_rng(37);
        for n in 1..=3 {
            let frame = GeodesicFrame::random(&mut rng, n);
            let zero = CVec::zeros(n + 1);
            for lift in cpn_normal_lifts(&frame) {
                for (a, b) in [(&lift, &zero), (&zero, &lift)] {
                    let (first, second) = cpn_parallel_pushforward(&frame, a, b, leaf_end_infinity);
                    assert!(first.norm() + second.norm() > 0.1);
                }
            }
        }
    }
}
