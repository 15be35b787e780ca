//! The compactified tube `X = CP^n x CP^n`.
//!
//! `T CP^n` sits inside `X` through the leaf maps
//!
//! ```text
//! φ_γ(s) = [cos(s/2) z + sin(s/2) w] x [cos(s/2) z̄ + sin(s/2) w̄],   s = σ + iτ,
//! ```
//!
//! which send `s` to the tangent vector `τ γ'(σ)`. The complement of the image is the
//! divisor `D = {Σ Z_a W_a = 0}`; `M = CP^n` sits inside as `[z] x [z̄]`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{self, bilinear, herm, CMat, CVec, C64, I};
use crate::projective_geometry::{self, GeodesicFrame, ProjectivePoint, TangentVector};
use crate::{tol, Error, Result};

/// `|pairing|` below this is treated as lying on `D`.
pub const DIVISOR_TOLERANCE: f64 = 1e-12;

/// The length of the vector attached to a point off `D` is
/// `INVERSE_LENGTH_FACTOR · acosh(ρ)` with `ρ = ‖z + w̄‖/2` in the normalised gauge.
/// Settled by the round trip against [`embed_tangent`].
pub const INVERSE_LENGTH_FACTOR: f64 = 2.0;

/// Extended real value; `Infinite` marks points of the divisor `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `f64::INFINITY` for `Infinite`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// A point `[Z] x [W]` of `CP^n x CP^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    first: ProjectivePoint,
    second: ProjectivePoint,
}

#[derive(Serialize, Deserialize)]
struct ProductPointRepr {
    #[serde(with = "numerics::cvec_serde")]
    first: CVec,
    #[serde(with = "numerics::cvec_serde")]
    second: CVec,
}

impl Serialize for ProductPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProductPointRepr { first: self.first.rep().clone(), second: self.second.rep().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ProductPointRepr::deserialize(d)?;
        ProductPoint::from_reps(repr.first, repr.second).map_err(serde::de::Error::custom)
    }
}

impl ProductPoint {
    pub fn new(first: ProjectivePoint, second: ProjectivePoint) -> Result<Self> {
        if first.rep().len() != second.rep().len() {
            return Err(Error::DimensionMismatch { expected: first.rep().len(), got: second.rep().len() });
        }
        Ok(Self { first, second })
    }

    pub fn from_reps(z: CVec, w: CVec) -> Result<Self> {
        Self::new(ProjectivePoint::new(z)?, ProjectivePoint::new(w)?)
    }

    /// Totally real embedding `[z] ↦ [z] x [z̄]` of the base manifold.
    pub fn totally_real(p: &ProjectivePoint) -> Self {
        Self { first: p.clone(), second: p.conjugate() }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Self { first: ProjectivePoint::random(rng, n), second: ProjectivePoint::random(rng, n) }
    }

    pub fn first(&self) -> &ProjectivePoint {
        &self.first
    }

    pub fn second(&self) -> &ProjectivePoint {
        &self.second
    }

    pub fn n(&self) -> usize {
        self.first.n()
    }

    /// `Σ Z_a W_a` on the unit representatives; defined up to phase.
    pub fn pairing(&self) -> C64 {
        bilinear(self.first.rep(), self.second.rep())
    }

    pub fn on_divisor(&self) -> bool {
        self.pairing().norm() < DIVISOR_TOLERANCE
    }

    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.first.approx_eq(&other.first, tolerance) && self.second.approx_eq(&other.second, tolerance)
    }

    /// Largest chordal distance of the two factors.
    pub fn distance_proxy(&self, other: &Self) -> f64 {
        self.first.distance_proxy(&other.first).max(self.second.distance_proxy(&other.second))
    }
}

/// Leaf coordinate `s = σ + iτ`; `σ` is taken modulo `2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafCoordinate {
    pub sigma: f64,
    pub tau: f64,
}

impl LeafCoordinate {
    pub fn new(sigma: f64, tau: f64) -> Self {
        Self { sigma, tau }
    }

    pub fn as_complex(self) -> C64 {
        C64::new(self.sigma, self.tau)
    }
}

/// Unnormalised holomorphic representatives of `φ_γ(s)` for complex `s`.
///
/// The pair `(cos(s/2), sin(s/2))` is rescaled by `e^{-|τ|/2}`; the overall factor
/// does not change the projective point and keeps the representatives bounded
/// for any `τ`. Use [`leaf_reps_holomorphic`] when holomorphy in `s` matters.
pub fn leaf_reps(frame: &GeodesicFrame, c: LeafCoordinate) -> (CVec, CVec) {
    let (a, b) = scaled_cos_sin(c.sigma, c.tau);
    combine(frame, a, b)
}

/// Representatives `cos(s/2) z + sin(s/2) w` and the conjugate pattern,
/// holomorphic in `s`. Only meant for moderate `|τ|`.
pub fn leaf_reps_holomorphic(frame: &GeodesicFrame, s: C64) -> (CVec, CVec) {
    let half = s * 0.5;
    combine(frame, half.cos(), half.sin())
}

/// Representatives in the leaf chart `ζ = e^{is}` centred at `∞_γ` (`ζ = 0`):
/// `ζ (z - iw) + (z + iw)`, holomorphic and polynomial in `ζ`.
pub fn leaf_reps_at_infinity(frame: &GeodesicFrame, zeta: C64) -> (CVec, CVec) {
    // (ζ + 1) cos-part and -i(ζ - 1) sin-part, i.e. 2 e^{is/2} (cos(s/2), sin(s/2))
    combine(frame, zeta + 1.0, -I * (zeta - 1.0))
}

/// Representatives in the chart `ξ = e^{-is}` centred at `0_γ` (`ξ = 0`).
pub fn leaf_reps_at_zero(frame: &GeodesicFrame, xi: C64) -> (CVec, CVec) {
    // multiply the ζ-chart pair by ξ = 1/ζ
    combine(frame, 1.0 + xi, -I * (1.0 - xi))
}

fn combine(frame: &GeodesicFrame, a: C64, b: C64) -> (CVec, CVec) {
    let first = frame.z() * a + frame.w() * b;
    let second = numerics::conj(frame.z()) * a + numerics::conj(frame.w()) * b;
    (first, second)
}

/// `e^{-|τ|/2} (cos(s/2), sin(s/2))` without overflow.
fn scaled_cos_sin(sigma: f64, tau: f64) -> (C64, C64) {
    // cos(s/2) = (e^{is/2} + e^{-is/2})/2, e^{±is/2} = e^{±iσ/2} e^{∓τ/2}
    let scale_plus = (-0.5 * tau - 0.5 * tau.abs()).exp();
    let scale_minus = (0.5 * tau - 0.5 * tau.abs()).exp();
    let ep = C64::from_polar(scale_plus, 0.5 * sigma);
    let em = C64::from_polar(scale_minus, -0.5 * sigma);
    ((ep + em) * 0.5, (ep - em) / (2.0 * I))
}

pub fn leaf_map(frame: &GeodesicFrame, c: LeafCoordinate) -> ProductPoint {
    let (z, w) = leaf_reps(frame, c);
    ProductPoint::from_reps(z, w).expect("leaf representatives never vanish")
}

/// Endpoint `∞_γ = [z + iw] x [z̄ + iw̄]` (`τ → +∞`).
pub fn leaf_end_infinity(frame: &GeodesicFrame) -> ProductPoint {
    let (z, w) = leaf_reps_at_infinity(frame, C64::new(0.0, 0.0));
    ProductPoint::from_reps(z, w).expect("nonzero")
}

/// Endpoint `0_γ = [z - iw] x [z̄ - iw̄]` (`τ → -∞`).
pub fn leaf_end_zero(frame: &GeodesicFrame) -> ProductPoint {
    let (z, w) = leaf_reps_at_zero(frame, C64::new(0.0, 0.0));
    ProductPoint::from_reps(z, w).expect("nonzero")
}

pub fn embed_tangent(v: &TangentVector) -> ProductPoint {
    let len = v.norm();
    if len < tol::ALGEBRAIC {
        return ProductPoint::totally_real(v.base());
    }
    let frame = projective_geometry::frame_from_tangent(&v.scaled(1.0 / len))
        .expect("unit vector after rescaling");
    leaf_map(&frame, LeafCoordinate::new(0.0, len))
}

/// `(𝒩 - 1, |pairing|)` for unit representatives, with `𝒩 - 1` from Lagrange's identity
/// `‖z‖²‖w‖² - |Σ z_a w_a|² = Σ_{a<b} |z_a w̄_b - z_b w̄_a|²`.
fn excess_and_pairing(p: &ProductPoint) -> (f64, f64) {
    let z = p.first.rep();
    let w = p.second.rep();
    let mut lagrange = 0.0;
    for a in 0..z.len() {
        for b in (a + 1)..z.len() {
            lagrange += (z[a] * w[b].conj() - z[b] * w[a].conj()).norm_sqr();
        }
    }
    let pairing = p.pairing().norm();
    (lagrange / (pairing * pairing), pairing)
}

/// Exhaustion `𝒩 = ‖z‖²‖w‖² / |Σ z_a w_a|²`, `Infinite` on `D`.
pub fn exhaustion_n(p: &ProductPoint) -> Extended {
    let pairing = p.pairing().norm();
    if pairing < DIVISOR_TOLERANCE {
        return Extended::Infinite;
    }
    Extended::Finite(1.0 / (pairing * pairing))
}

/// `u0 = ½ acosh(2𝒩 - 1)`, the length of the tangent vector represented by `p`.
pub fn u0(p: &ProductPoint) -> Extended {
    let (excess, pairing) = excess_and_pairing(p);
    if pairing < DIVISOR_TOLERANCE {
        return Extended::Infinite;
    }
    // acosh(1 + 2x) = ln(1 + 2x + 2 sqrt(x(1 + x)))
    let x = excess;
    Extended::Finite(0.5 * (2.0 * x + 2.0 * (x * (1.0 + x)).sqrt()).ln_1p())
}

/// Kähler potential `ρ = log(2𝒩)` (equal to `log(1 + cosh(2 u0))`).
pub fn kahler_potential(p: &ProductPoint) -> Extended {
    match exhaustion_n(p) {
        Extended::Finite(n) => Extended::Finite((2.0 * n).ln()),
        Extended::Infinite => Extended::Infinite,
    }
}

/// Result of inverting the embedding.
#[derive(Debug, Clone, PartialEq)]
pub enum Inverse {
    /// Point of the tube, with the tangent vector it represents.
    Tangent(TangentVector),
    /// Point of `D`: the geodesic whose leaf ends at the point (`τ → +∞`).
    Divisor(GeodesicFrame),
}

pub fn invert_embedding(p: &ProductPoint) -> Inverse {
    let z = p.first.rep();
    let w = p.second.rep();
    let pairing = bilinear(z, w);
    let lead_phase = |v: &CVec| -> C64 {
        match v.iter().find(|c| c.norm() > 1e-8) {
            Some(c) => c.conj() / c.norm(),
            None => C64::new(1.0, 0.0),
        }
    };

    if pairing.norm() < DIVISOR_TOLERANCE {
        // ‖z‖ = ‖w‖ = √2
        let a = lead_phase(z) * std::f64::consts::SQRT_2;
        let zz = z * a;
        let ww = w * C64::new(std::f64::consts::SQRT_2, 0.0);
        let wbar = numerics::conj(&ww);
        let fz = (&zz + &wbar) * C64::new(0.5, 0.0);
        let fw = (&zz - &wbar) / (2.0 * I);
        let frame = GeodesicFrame::orthonormalized(fz, fw).expect("orthonormal on D");
        return Inverse::Divisor(frame);
    }

    // Σ z_a w_a = 1 and ‖z‖ = ‖w‖ (unit inputs): scale z by a, w by 1/(a·pairing), |a|² = 1/|pairing|
    let modulus = 1.0 / pairing.norm().sqrt();
    let mut a = C64::new(modulus, 0.0);
    a *= lead_phase(&(z * a));
    let zz = z * a;
    let ww = w / (a * pairing);
    let wbar = numerics::conj(&ww);
    let sum = &zz + &wbar;
    let diff = &zz - &wbar;
    // ρ² - 1 = ‖z - w̄‖²/4 since Re Σ z_a w_a = 1
    let rho = sum.norm() * 0.5;
    let sinh_half = diff.norm() * 0.5;
    let base = ProjectivePoint::new(sum.clone()).expect("z + w̄ is nonzero off D");
    if sinh_half < tol::ALGEBRAIC {
        return Inverse::Tangent(TangentVector::zero(base));
    }
    let length = INVERSE_LENGTH_FACTOR * (rho + sinh_half).ln();
    // direction of the geodesic [cos(t/2) (z+w̄)/2ρ + sin(t/2) (z-w̄)/(2i sqrt(ρ²-1))]
    let unit_w = &diff / (2.0 * I * sinh_half);
    let base_rep = &sum / C64::new(2.0 * rho, 0.0);
    let base = ProjectivePoint::new(base_rep.clone()).expect("nonzero");
    // the representative of `base` equals base_rep up to rounding; keep the same phase gauge
    let phase = herm(base.rep(), &base_rep);
    let phase = phase / phase.norm();
    let dir = &unit_w * (phase.conj() * (0.5 * length));
    let v = TangentVector::from_ambient(base, &dir);
    Inverse::Tangent(v)
}

/// Anti-holomorphic involution `N_{-1}: [z] x [w] ↦ [w̄] x [z̄]`.
pub fn involution_n(p: &ProductPoint) -> ProductPoint {
    ProductPoint { first: p.second.conjugate(), second: p.first.conjugate() }
}

/// Segre image `[z wᵀ]` with unit Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SegrePoint {
    zeta: CMat,
}

impl SegrePoint {
    pub fn matrix(&self) -> &CMat {
        &self.zeta
    }

    /// `Σ|ζ_ij|² / |Σ ζ_aa|²`, `Infinite` when the trace vanishes.
    pub fn exhaustion(&self) -> Extended {
        let trace = self.zeta.trace();
        if trace.norm() < DIVISOR_TOLERANCE {
            return Extended::Infinite;
        }
        Extended::Finite(self.zeta.norm_squared() / trace.norm_sqr())
    }

    pub fn conjugate_transpose(&self) -> SegrePoint {
        SegrePoint { zeta: self.zeta.adjoint() }
    }

    /// Numerical rank with relative singular value cutoff `tolerance`.
    pub fn rank(&self, tolerance: f64) -> usize {
        let sv = self.zeta.clone().singular_values();
        let max = sv.max();
        sv.iter().filter(|s| **s > tolerance * max).count()
    }

    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        let h: C64 = self.zeta.iter().zip(other.zeta.iter()).map(|(a, b)| a * b.conj()).sum();
        let phase = if h.norm() > 0.0 { h / h.norm() } else { C64::new(1.0, 0.0) };
        (&self.zeta - &other.zeta * phase).norm() <= tolerance
    }
}

pub fn segre(p: &ProductPoint) -> SegrePoint {
    let z = p.first.rep();
    let w = p.second.rep();
    let zeta = DMatrix::from_fn(z.len(), w.len(), |i, j| z[i] * w[j]);
    SegrePoint { zeta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn e(n: usize, i: usize) -> CVec {
        numerics::unit_vector(n + 1, i)
    }

    #[test]
    fn leaf_map_examples() {
        let f = GeodesicFrame::standard(2);
        let origin = leaf_map(&f, LeafCoordinate::new(0.0, 0.0));
        assert!(origin.approx_eq(&ProductPoint::from_reps(e(2, 0), e(2, 0)).unwrap(), 1e-12));

        let plus = &e(2, 0) + &e(2, 1) * I;
        let expected_inf = ProductPoint::from_reps(plus.clone(), plus.clone()).unwrap();
        let far = leaf_map(&f, LeafCoordinate::new(0.0, 40.0));
        assert!(far.approx_eq(&expected_inf, 1e-12));
        assert!(far.on_divisor());
        assert!(leaf_end_infinity(&f).approx_eq(&expected_inf, 1e-15));

        let minus = &e(2, 0) - &e(2, 1) * I;
        let expected_zero = ProductPoint::from_reps(minus.clone(), minus).unwrap();
        assert!(leaf_map(&f, LeafCoordinate::new(0.0, -40.0)).approx_eq(&expected_zero, 1e-12));
        assert!(leaf_end_zero(&f).approx_eq(&expected_zero, 1e-15));
    }

    #[test]
    fn leaf_map_is_periodic_and_overflow_free() {
        let mut rng = seeded_rng(3);
        for _ in 0..50 {
            let f = GeodesicFrame::random(&mut rng, 3);
            let sigma: f64 = rng.random_range(0.0..2.0 * PI);
            let tau: f64 = rng.random_range(-5.0..5.0);
            let a = leaf_map(&f, LeafCoordinate::new(sigma, tau));
            let b = leaf_map(&f, LeafCoordinate::new(sigma + 2.0 * PI, tau));
            assert!(a.approx_eq(&b, 1e-12));
        }
        let f = GeodesicFrame::standard(1);
        let p = leaf_map(&f, LeafCoordinate::new(0.3, 2000.0));
        assert!(p.first().rep().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    }

    #[test]
    fn scaled_reps_agree_with_holomorphic_reps() {
        let f = GeodesicFrame::random(&mut seeded_rng(8), 2);
        let c = LeafCoordinate::new(0.9, -1.7);
        let a = leaf_map(&f, c);
        let (z, w) = leaf_reps_holomorphic(&f, c.as_complex());
        assert!(a.approx_eq(&ProductPoint::from_reps(z, w).unwrap(), 1e-13));
        let zeta = C64::new(0.0, c.as_complex().re).exp() * (-c.tau).exp();
        let (z, w) = leaf_reps_at_infinity(&f, zeta);
        assert!(a.approx_eq(&ProductPoint::from_reps(z, w).unwrap(), 1e-13));
        let (z, w) = leaf_reps_at_zero(&f, C64::new(1.0, 0.0) / zeta);
        assert!(a.approx_eq(&ProductPoint::from_reps(z, w).unwrap(), 1e-13));
    }

    #[test]
    fn embed_tangent_examples() {
        let base = ProjectivePoint::basis(2, 0);
        let zero = TangentVector::zero(base.clone());
        assert!(embed_tangent(&zero).approx_eq(&ProductPoint::from_reps(e(2, 0), e(2, 0)).unwrap(), 1e-15));

        let v = TangentVector::new(base, e(2, 1) * C64::new(0.5, 0.0)).unwrap();
        let (c, s) = (0.5f64.cosh(), 0.5f64.sinh());
        let first = &e(2, 0) * C64::new(c, 0.0) + &e(2, 1) * C64::new(0.0, s);
        let expected = ProductPoint::from_reps(first.clone(), first).unwrap();
        assert!(embed_tangent(&v).approx_eq(&expected, 1e-12));
    }

    #[test]
    fn exhaustion_examples() {
        let mut rng = seeded_rng(1);
        let p = ProjectivePoint::random(&mut rng, 3);
        assert_abs_diff_eq!(exhaustion_n(&ProductPoint::totally_real(&p)).to_f64(), 1.0, epsilon = 1e-12);

        let f = GeodesicFrame::random(&mut rng, 3);
        let q = leaf_map(&f, LeafCoordinate::new(0.4, 1.0));
        assert_abs_diff_eq!(exhaustion_n(&q).to_f64(), 1f64.cosh().powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(exhaustion_n(&q).to_f64(), 2.381097845541816, epsilon = 1e-12);

        let d = &e(2, 0) + &e(2, 1) * I;
        let on_d = ProductPoint::from_reps(d.clone(), d).unwrap();
        assert_eq!(exhaustion_n(&on_d), Extended::Infinite);
        assert_eq!(u0(&on_d), Extended::Infinite);
        assert_eq!(kahler_potential(&on_d), Extended::Infinite);
    }

    #[test]
    fn u0_examples() {
        let p = ProductPoint::totally_real(&ProjectivePoint::basis(1, 0));
        assert_eq!(u0(&p), Extended::Finite(0.0));
        let f = GeodesicFrame::standard(2);
        assert_abs_diff_eq!(u0(&leaf_map(&f, LeafCoordinate::new(0.0, 1.0))).to_f64(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u0(&leaf_map(&f, LeafCoordinate::new(1.3, -0.7))).to_f64(), 0.7, epsilon = 1e-12);
        // tiny heights stay accurate
        assert_abs_diff_eq!(u0(&leaf_map(&f, LeafCoordinate::new(0.2, 1e-7))).to_f64(), 1e-7, epsilon = 1e-15);
    }

    #[test]
    fn kahler_potential_examples() {
        let f = GeodesicFrame::standard(1);
        let on_m = leaf_map(&f, LeafCoordinate::new(0.5, 0.0));
        assert_abs_diff_eq!(kahler_potential(&on_m).to_f64(), 2f64.ln(), epsilon = 1e-12);
        let leaf = leaf_map(&f, LeafCoordinate::new(0.5, 1.0));
        assert_abs_diff_eq!(kahler_potential(&leaf).to_f64(), (1.0 + 2f64.cosh()).ln(), epsilon = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let on_m = ProductPoint::from_reps(e(2, 0), e(2, 0)).unwrap();
        match invert_embedding(&on_m) {
            Inverse::Tangent(v) => {
                assert!(v.norm() < 1e-12);
                assert!(v.base().approx_eq(&ProjectivePoint::basis(2, 0), 1e-12));
            }
            other => panic!("unexpected {other:?}"),
        }

        let d = &e(2, 0) + &e(2, 1) * I;
        let on_d = ProductPoint::from_reps(d.clone(), d).unwrap();
        match invert_embedding(&on_d) {
            Inverse::Divisor(frame) => {
                let ends = [leaf_end_infinity(&frame), leaf_end_zero(&frame)];
                assert!(ends.iter().any(|q| q.approx_eq(&on_d, 1e-12)));
                assert!(leaf_end_infinity(&frame).approx_eq(&on_d, 1e-12));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_divisor_points_invert_to_geodesics_ending_there() {
        let mut rng = seeded_rng(21);
        for _ in 0..30 {
            let z = numerics::random_unit_cvec(&mut rng, 4);
            // w with Σ z_a w_a = 0: project a random vector onto the orthogonal complement of z̄
            let raw = numerics::random_cvec(&mut rng, 4);
            let zbar = numerics::conj(&z);
            let w = &raw - &zbar * herm(&raw, &zbar);
            let p = ProductPoint::from_reps(z, w).unwrap();
            assert!(p.on_divisor());
            match invert_embedding(&p) {
                Inverse::Divisor(frame) => assert!(leaf_end_infinity(&frame).approx_eq(&p, 1e-10)),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn involution_examples() {
        let mut rng = seeded_rng(2);
        let p = ProjectivePoint::random(&mut rng, 3);
        let m = ProductPoint::totally_real(&p);
        assert!(involution_n(&m).approx_eq(&m, 1e-15));
        let f = GeodesicFrame::random(&mut rng, 3);
        assert!(involution_n(&leaf_end_infinity(&f)).approx_eq(&leaf_end_zero(&f), 1e-12));
        for _ in 0..100 {
            let q = ProductPoint::random(&mut rng, 3);
            assert!(involution_n(&involution_n(&q)).approx_eq(&q, 1e-15));
        }
    }

    #[test]
    fn involution_reflects_leaves() {
        let mut rng = seeded_rng(4);
        let f = GeodesicFrame::random(&mut rng, 2);
        let a = leaf_map(&f, LeafCoordinate::new(0.8, 1.3));
        let b = leaf_map(&f, LeafCoordinate::new(0.8, -1.3));
        assert!(involution_n(&a).approx_eq(&b, 1e-12));
    }

    #[test]
    fn segre_examples() {
        let p = ProductPoint::from_reps(e(2, 0), e(2, 0)).unwrap();
        let s = segre(&p);
        assert_abs_diff_eq!(s.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.matrix().norm(), 1.0, epsilon = 1e-15);

        let mut rng = seeded_rng(9);
        for _ in 0..20 {
            let q = ProductPoint::random(&mut rng, 3);
            let sq = segre(&q);
            assert_eq!(sq.rank(1e-10), 1);
            assert!(segre(&involution_n(&q)).approx_eq(&sq.conjugate_transpose(), 1e-12));
            let a = sq.exhaustion().to_f64();
            let b = exhaustion_n(&q).to_f64();
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = seeded_rng(6);
        let p = ProductPoint::random(&mut rng, 2);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.starts_with("{\"first\":[["));
        let back: ProductPoint = serde_json::from_str(&text).unwrap();
        assert!(back.approx_eq(&p, 1e-15));

        let f = GeodesicFrame::random(&mut rng, 2);
        let back: GeodesicFrame = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
