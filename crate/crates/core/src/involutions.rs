//! Anti-holomorphic involutions `σ_A: [Z] ↦ [conj(A Z)]` of `CP^n`.

use nalgebra::{DMatrix, SVD};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohomology::{cpn_table, product_table, rpn_table, CohomologyTable};
use crate::numerics::{herm, random_cmat, random_cvec, CMat, CVec, C64, I};
use crate::projective_geometry::ProjectivePoint;
use crate::{Error, Result};

/// Relative tolerance for `conj(A) A = c Id`.
pub const INVOLUTION_TOLERANCE: f64 = 1e-9;
/// Fixed-point residual accepted as a solution.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-9;
/// Below this residual a sample counts as a fixed point when certifying emptiness.
pub const EMPTINESS_THRESHOLD: f64 = 1e-6;
/// Smallest singular value (relative) accepted for `A`.
pub const MIN_RELATIVE_SINGULAR_VALUE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvolutionType {
    /// Equivalent to complex conjugation; fixed set `RP^n`.
    Real,
    /// Equivalent to `[Z] ↦ [J conj(Z)]`; no fixed points.
    Quaternionic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiholMap {
    a: CMat,
}

impl AntiholMap {
    pub fn new(a: CMat) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() < 2 {
            return Err(Error::InvalidParameter(format!("matrix must be square of size >= 2, got {}x{}", a.nrows(), a.ncols())));
        }
        if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        let sv = a.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if smax == 0.0 || smin < MIN_RELATIVE_SINGULAR_VALUE * smax {
            return Err(Error::InvalidParameter("matrix is not invertible".into()));
        }
        Ok(Self { a })
    }

    /// Complex conjugation on `CP^n`.
    pub fn standard(n: usize) -> Self {
        Self { a: CMat::identity(n + 1, n + 1) }
    }

    /// `J = [[0, -I], [I, 0]]` on `C^{2m}`.
    pub fn quaternionic(m: usize) -> Self {
        let mut a = CMat::zeros(2 * m, 2 * m);
        for k in 0..m {
            a[(k, m + k)] = C64::new(-1.0, 0.0);
            a[(m + k, k)] = C64::new(1.0, 0.0);
        }
        Self { a }
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.nrows() - 1
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.a.singular_values();
        sv.max() / sv.min()
    }

    /// Antilinear lift `v ↦ conj(A v)`.
    pub fn lift(&self, v: &CVec) -> CVec {
        (&self.a * v).map(|x| x.conj())
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        ProjectivePoint::new(self.lift(p.rep())).expect("A is invertible")
    }

    /// The map `σ_{A'}` with `A' = μ conj(B)^{-1} A B`, conjugate to `σ_A` through `[v] ↦ [B^{-1} v]`.
    pub fn transported(&self, b: &CMat, mu: C64) -> Result<Self> {
        let b_bar_inv = b
            .map(|x| x.conj())
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("transport matrix is not invertible".into()))?;
        Self::new(b_bar_inv * &self.a * b * mu)
    }

    /// `A / sqrt|c|`, so that `conj(A) A = ±Id`.
    pub fn normalized(&self) -> Result<Self> {
        let check = is_involution(self);
        if !check.is_involution {
            return Err(Error::NotInvolution { residual: check.residual });
        }
        Ok(Self { a: &self.a / C64::new(check.c.norm().sqrt(), 0.0) })
    }
}

/// Image of a fixed point of `σ_A` under the transport to `σ_{A'}`.
pub fn transport_point(b: &CMat, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    let inv = b.clone().try_inverse().ok_or_else(|| Error::InvalidParameter("transport matrix is not invertible".into()))?;
    ProjectivePoint::new(inv * p.rep())
}

/// Random `(B, μ)` with `B` Gaussian and `|μ| = 1`.
pub fn random_transport<R: Rng + ?Sized>(rng: &mut R, size: usize) -> (CMat, C64) {
    let b = random_cmat(rng, size, size) + CMat::identity(size, size) * C64::new(0.5, 0.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    (b, C64::from_polar(1.0, phase))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvolutionCheck {
    pub is_involution: bool,
    /// `c` with `conj(A) A ≈ c Id`, the normalized trace.
    pub c: C64,
    /// `‖conj(A) A - c Id‖ / ‖conj(A) A‖`.
    pub residual: f64,
}

pub fn is_involution(m: &AntiholMap) -> InvolutionCheck {
    let square = m.a.map(|x| x.conj()) * &m.a;
    let size = m.a.nrows();
    let c = square.trace() / C64::new(size as f64, 0.0);
    let residual = (&square - CMat::identity(size, size) * c).norm() / square.norm();
    InvolutionCheck { is_involution: residual < INVOLUTION_TOLERANCE && c.norm() > 0.0, c, residual }
}

pub fn involution_type(m: &AntiholMap) -> Result<InvolutionType> {
    let check = is_involution(m);
    if !check.is_involution {
        return Err(Error::NotInvolution { residual: check.residual });
    }
    // conj(A) A = c Id forces c to be real
    if check.c.re > 0.0 {
        Ok(InvolutionType::Real)
    } else if m.a.nrows() % 2 == 1 {
        Err(Error::InconsistentSignature { dim: m.a.nrows() })
    } else {
        Ok(InvolutionType::Quaternionic)
    }
}

/// Projective distance between `[v]` and `[conj(A v)]`, in `[0, 1]`: the length of the part
/// of the unit vector along `conj(A v)` orthogonal to `v`.
pub fn fixed_residual(m: &AntiholMap, v: &CVec) -> f64 {
    let tv = m.lift(v);
    let tv = &tv / C64::new(tv.norm(), 0.0);
    let v = v / C64::new(v.norm(), 0.0);
    (&tv - &v * herm(&tv, &v)).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSample {
    pub kind: InvolutionType,
    pub trials: usize,
    /// Fixed points found, each with residual below [`FIXED_POINT_TOLERANCE`].
    pub points: Vec<ProjectivePoint>,
    pub max_accepted_residual: f64,
    /// Smallest residual seen over all trials.
    pub min_residual: f64,
    /// Real dimension of the fixed family, from the rank of `u ↦ u + conj(A u)`.
    pub family_dimension: Option<usize>,
}

/// Samples the real-structure equation `conj(A v) = λ v` from random starts.
///
/// For the real type `v = u + conj(A u)` is an exact fixed vector after normalizing `A`.
/// Emptiness for the quaternionic type is a numeric certificate: no trial reaches a residual
/// below [`EMPTINESS_THRESHOLD`].
pub fn fixed_points_sample<R: Rng + ?Sized>(m: &AntiholMap, trials: usize, rng: &mut R) -> Result<FixedPointSample> {
    let kind = involution_type(m)?;
    let t = m.normalized()?;
    let size = m.a.nrows();
    let mut points = Vec::new();
    let mut max_accepted: f64 = 0.0;
    let mut min_residual = f64::INFINITY;
    for _ in 0..trials {
        let u = random_cvec(rng, size);
        let v = &u + t.lift(&u);
        min_residual = min_residual.min(fixed_residual(&t, &u));
        if v.norm() < 1e-8 {
            continue;
        }
        let r = fixed_residual(&t, &v);
        min_residual = min_residual.min(r);
        if kind == InvolutionType::Real && r < FIXED_POINT_TOLERANCE {
            max_accepted = max_accepted.max(r);
            points.push(ProjectivePoint::new(v)?);
        }
    }
    let family_dimension = match kind {
        InvolutionType::Real => Some(real_rank_of_symmetrizer(&t).saturating_sub(1)),
        InvolutionType::Quaternionic => None,
    };
    Ok(FixedPointSample { kind, trials, points, max_accepted_residual: max_accepted, min_residual, family_dimension })
}

/// Real rank of `u ↦ u + conj(A u)` on `C^{n+1} = R^{2n+2}`.
fn real_rank_of_symmetrizer(m: &AntiholMap) -> usize {
    let size = m.a.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * size, 2 * size);
    for k in 0..2 * size {
        let mut u = CVec::zeros(size);
        u[k % size] = if k < size { C64::new(1.0, 0.0) } else { I };
        let image = &u + m.lift(&u);
        for j in 0..size {
            real[(j, k)] = image[j].re;
            real[(size + j, k)] = image[j].im;
        }
    }
    let sv = SVD::new(real, false, false).singular_values;
    let smax = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * smax).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedSetKind {
    /// `RP^n x RP^n`.
    RealProjectiveProduct,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFixedSet {
    pub types: (InvolutionType, InvolutionType),
    pub kind: FixedSetKind,
    pub fixed_cohomology: CohomologyTable,
    pub required: CohomologyTable,
    /// The fixed set cannot carry the cohomology of `CP^n`.
    pub contradiction: bool,
}

/// Fixed set `K_1 x K_2` of `σ_1 x σ_2` on `CP^n x CP^n`, compared with `H^*(CP^n)`.
pub fn product_involution_fixed_set(m1: &AntiholMap, m2: &AntiholMap) -> Result<ProductFixedSet> {
    if m1.n() != m2.n() {
        return Err(Error::DimensionMismatch { expected: m1.n(), got: m2.n() });
    }
    let n = m1.n();
    let types = (involution_type(m1)?, involution_type(m2)?);
    let (kind, fixed_cohomology) = match types {
        (InvolutionType::Real, InvolutionType::Real) => {
            (FixedSetKind::RealProjectiveProduct, product_table(&rpn_table(n), &rpn_table(n)))
        }
        _ => (FixedSetKind::Empty, CohomologyTable::new("empty", Vec::new())),
    };
    let required = cpn_table(n);
    let contradiction = fixed_cohomology.groups != required.groups;
    Ok(ProductFixedSet { types, kind, fixed_cohomology, required, contradiction })
}
