//! Fubini–Study geometry of `CP^n`.
//!
//! Points are unit vectors in `C^{n+1}` modulo phase. A tangent vector at `[p]` is
//! represented by its horizontal lift `dir` (`⟨dir, p⟩ = 0`). The metric is scaled so
//! that closed geodesics have length `2π`:
//!
//! ```text
//! g(u, v) = 4 Re⟨u, v⟩,   γ(t) = [cos(t/2) z + sin(t/2) w]
//! ```
//!
//! With this scaling the holomorphic sectional curvature is 1 and the totally real
//! sectional curvature is 1/4.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{self, herm, CVec, C64};
use crate::{tol, Error, Result};

/// Scale of the metric relative to the round Hermitian product on horizontal lifts.
pub const METRIC_SCALE: f64 = 4.0;

/// Point of `CP^n`, stored as a unit representative.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    rep: CVec,
}

impl ProjectivePoint {
    /// Normalises `v`; fails on the zero vector.
    pub fn new(v: CVec) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < tol::ALGEBRAIC {
            return Err(Error::ZeroVector);
        }
        Ok(Self { rep: v / C64::new(norm, 0.0) })
    }

    pub fn basis(n: usize, idx: usize) -> Self {
        Self { rep: numerics::unit_vector(n + 1, idx) }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Self { rep: numerics::random_unit_cvec(rng, n + 1) }
    }

    pub fn rep(&self) -> &CVec {
        &self.rep
    }

    /// Complex dimension `n` of the ambient `CP^n`.
    pub fn n(&self) -> usize {
        self.rep.len() - 1
    }

    /// Representative whose first non-negligible coordinate is real and positive.
    pub fn canonical(&self) -> CVec {
        numerics::fix_phase(&self.rep, 1e-8)
    }

    /// `|⟨p, q⟩|`, equal to 1 exactly when the points coincide.
    pub fn overlap(&self, other: &Self) -> f64 {
        herm(&self.rep, &other.rep).norm()
    }

    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.rep.len() == other.rep.len() && self.distance_proxy(other) <= tolerance
    }

    /// Chordal distance `sqrt(1 - |⟨p,q⟩|²)`, computed without cancellation.
    pub fn distance_proxy(&self, other: &Self) -> f64 {
        let h = herm(&self.rep, &other.rep);
        let phase = if h.norm() > 0.0 { h / h.norm() } else { C64::new(1.0, 0.0) };
        (&self.rep - &other.rep * phase).norm()
    }

    pub fn conjugate(&self) -> Self {
        Self { rep: numerics::conj(&self.rep) }
    }
}

/// Tangent vector at a point of `CP^n`, given by its horizontal lift.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ProjectivePoint,
    dir: CVec,
}

impl TangentVector {
    pub fn new(base: ProjectivePoint, dir: CVec) -> Result<Self> {
        if dir.len() != base.rep.len() {
            return Err(Error::DimensionMismatch { expected: base.rep.len(), got: dir.len() });
        }
        let residual = herm(&dir, &base.rep).norm();
        if residual > tol::DERIVED * (1.0 + dir.norm()) {
            return Err(Error::NotTangent { residual });
        }
        Ok(Self { base, dir })
    }

    /// Projects an arbitrary vector onto the horizontal space at `base`.
    pub fn from_ambient(base: ProjectivePoint, v: &CVec) -> Self {
        let p = base.rep.clone();
        let dir = v - &p * herm(v, &p);
        Self { base, dir }
    }

    pub fn zero(base: ProjectivePoint) -> Self {
        let dir = CVec::zeros(base.rep.len());
        Self { base, dir }
    }

    /// Random tangent vector with the given Fubini–Study length.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, length: f64) -> Self {
        let base = ProjectivePoint::random(rng, n);
        loop {
            let raw = numerics::random_cvec(rng, n + 1);
            let v = Self::from_ambient(base.clone(), &raw);
            let norm = v.norm();
            if norm > 1e-6 {
                return v.scaled(length / norm);
            }
        }
    }

    pub fn base(&self) -> &ProjectivePoint {
        &self.base
    }

    pub fn dir(&self) -> &CVec {
        &self.dir
    }

    pub fn norm(&self) -> f64 {
        (METRIC_SCALE * self.dir.norm_squared()).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { base: self.base.clone(), dir: &self.dir * C64::new(factor, 0.0) }
    }

    /// Same tangent vector with base representative multiplied by a unit scalar.
    pub fn rephased(&self, phase: C64) -> Self {
        Self { base: ProjectivePoint { rep: &self.base.rep * phase }, dir: &self.dir * phase }
    }

    /// Larger of the chordal base distance and the metric distance of the directions
    /// after aligning the phase gauge.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.base.rep.len() != other.base.rep.len() {
            return f64::INFINITY;
        }
        let h = herm(&self.base.rep, &other.base.rep);
        let phase = if h.norm() > 0.0 { h / h.norm() } else { C64::new(1.0, 0.0) };
        let dir = (&self.dir - &other.dir * phase).norm() * METRIC_SCALE.sqrt();
        self.base.distance_proxy(&other.base).max(dir)
    }

    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.distance(other) <= tolerance
    }
}

/// Orthonormal pair `(z, w)` describing the closed geodesic `[cos(t/2) z + sin(t/2) w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFrame {
    #[serde(with = "numerics::cvec_serde")]
    z: CVec,
    #[serde(with = "numerics::cvec_serde")]
    w: CVec,
}

impl GeodesicFrame {
    pub fn new(z: CVec, w: CVec) -> Result<Self> {
        let frame = Self { z, w };
        frame.validate()?;
        Ok(frame)
    }

    /// Gram–Schmidt on `(z, w)`.
    pub fn orthonormalized(z: CVec, w: CVec) -> Result<Self> {
        let z = ProjectivePoint::new(z)?.rep;
        let w = &w - &z * herm(&w, &z);
        let w = ProjectivePoint::new(w)?.rep;
        Ok(Self { z, w })
    }

    /// `(e_0, e_1)` in `C^{n+1}`.
    pub fn standard(n: usize) -> Self {
        assert!(n >= 1, "CP^n needs n >= 1");
        Self { z: numerics::unit_vector(n + 1, 0), w: numerics::unit_vector(n + 1, 1) }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        loop {
            let z = numerics::random_cvec(rng, n + 1);
            let w = numerics::random_cvec(rng, n + 1);
            if let Ok(frame) = Self::orthonormalized(z, w) {
                return frame;
            }
        }
    }

    pub fn z(&self) -> &CVec {
        &self.z
    }

    pub fn w(&self) -> &CVec {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.z.len() != self.w.len() {
            return Err(Error::DimensionMismatch { expected: self.z.len(), got: self.w.len() });
        }
        if self.z.len() < 2 {
            return Err(Error::InvalidParameter("frame needs at least two coordinates".into()));
        }
        let residual = (self.z.norm() - 1.0)
            .abs()
            .max((self.w.norm() - 1.0).abs())
            .max(herm(&self.z, &self.w).norm());
        if residual > tol::ALGEBRAIC {
            return Err(Error::InvalidFrame { residual });
        }
        Ok(())
    }

    /// Unnormalised representative `cos(t/2) z + sin(t/2) w`.
    pub fn curve_rep(&self, t: f64) -> CVec {
        let (s, c) = (0.5 * t).sin_cos();
        &self.z * C64::new(c, 0.0) + &self.w * C64::new(s, 0.0)
    }

    /// Same geodesic started `shift` later.
    pub fn shifted(&self, shift: f64) -> Self {
        let (s, c) = (0.5 * shift).sin_cos();
        let z = &self.z * C64::new(c, 0.0) + &self.w * C64::new(s, 0.0);
        let w = &self.w * C64::new(c, 0.0) - &self.z * C64::new(s, 0.0);
        Self { z, w }
    }
}

pub fn geodesic_point(frame: &GeodesicFrame, t: f64) -> ProjectivePoint {
    // |cos|² + |sin|² = 1 for the orthonormal frame, renormalise only to absorb rounding
    let rep = frame.curve_rep(t);
    let norm = rep.norm();
    ProjectivePoint { rep: rep / C64::new(norm, 0.0) }
}

/// Velocity `γ'(t)` of the geodesic, as a horizontal lift at `geodesic_point(frame, t)`.
pub fn geodesic_velocity(frame: &GeodesicFrame, t: f64) -> TangentVector {
    let (s, c) = (0.5 * t).sin_cos();
    let dir = (&frame.w * C64::new(c, 0.0) - &frame.z * C64::new(s, 0.0)) * C64::new(0.5, 0.0);
    TangentVector { base: geodesic_point(frame, t), dir }
}

/// Frame `(z, w)` of the geodesic with initial velocity `v`; `v` must have unit length.
pub fn frame_from_tangent(v: &TangentVector) -> Result<GeodesicFrame> {
    let norm = v.norm();
    if (norm - 1.0).abs() > tol::DERIVED {
        return Err(Error::NonUnitVector { norm });
    }
    let z = v.base.rep.clone();
    // γ'(0) has lift w/2
    let w = &v.dir * C64::new(2.0, 0.0);
    GeodesicFrame::orthonormalized(z, w)
}

/// Fubini–Study inner product of two horizontal lifts at `at`.
pub fn fs_metric(u: &CVec, v: &CVec, at: &ProjectivePoint) -> Result<f64> {
    for x in [u, v] {
        if x.len() != at.rep.len() {
            return Err(Error::DimensionMismatch { expected: at.rep.len(), got: x.len() });
        }
        let residual = herm(x, &at.rep).norm();
        if residual > tol::DERIVED * (1.0 + x.norm()) {
            return Err(Error::NotTangent { residual });
        }
    }
    Ok(METRIC_SCALE * herm(u, v).re)
}
