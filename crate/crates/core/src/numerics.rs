//! Small numerical kernels shared across modules: complex vector helpers,
//! a fixed-step RK4 stepper, Gauss–Legendre nodes and seeded sampling.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Hermitian product `⟨a, b⟩ = Σ a_i conj(b_i)`.
pub fn herm(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Bilinear pairing `Σ a_i b_i` (no conjugation).
pub fn bilinear(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn conj(v: &CVec) -> CVec {
    v.map(|x| x.conj())
}

pub fn unit_vector(len: usize, idx: usize) -> CVec {
    let mut v = CVec::zeros(len);
    v[idx] = C64::new(1.0, 0.0);
    v
}

/// Index of the coordinate with the largest modulus.
pub fn argmax_abs(v: &CVec) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Multiply by the unit scalar that makes the first coordinate above `eps`
/// in modulus real and positive.
pub fn fix_phase(v: &CVec, eps: f64) -> CVec {
    match v.iter().find(|x| x.norm() > eps) {
        Some(lead) => {
            let phase = lead.conj() / lead.norm();
            v * phase
        }
        None => v.clone(),
    }
}

/// Real coordinates `(Re v_0, Im v_0, Re v_1, ...)`.
pub fn complex_to_real(v: &CVec) -> RVec {
    RVec::from_iterator(2 * v.len(), v.iter().flat_map(|c| [c.re, c.im]))
}

pub fn real_to_complex(x: &RVec) -> CVec {
    debug_assert!(x.len().is_multiple_of(2));
    CVec::from_iterator(x.len() / 2, x.as_slice().chunks(2).map(|p| C64::new(p[0], p[1])))
}

/// One classical Runge–Kutta step for `y' = f(t, y)` with real time step.
pub fn rk4_step<T, F>(f: &F, t: f64, y: &DVector<T>, h: f64) -> DVector<T>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(f64, &DVector<T>) -> DVector<T>,
{
    let half = T::from_real(0.5 * h);
    let full = T::from_real(h);
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + &k1 * half));
    let k3 = f(t + 0.5 * h, &(y + &k2 * half));
    let k4 = f(t + h, &(y + &k3 * full));
    let sixth = T::from_real(h / 6.0);
    let two = T::from_real(2.0);
    y + (k1 + k2 * two + k3 * two + k4) * sixth
}

/// Integrate `y' = f(t, y)` from `t0` over `steps` equal steps of size `h`.
pub fn rk4_integrate<T, F>(f: &F, t0: f64, y0: &DVector<T>, h: f64, steps: usize) -> DVector<T>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(f64, &DVector<T>) -> DVector<T>,
{
    let mut y = y0.clone();
    for k in 0..steps {
        y = rk4_step(f, t0 + k as f64 * h, &y, h);
    }
    y
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(count: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(count > 0);
    let mut out = Vec::with_capacity(count);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for i in 0..count {
        // Chebyshev initial guess then Newton on P_count.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (count as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid + half * x, half * w));
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Gaussian vector (not normalised).
pub fn random_cvec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVec {
    CVec::from_fn(len, |_, _| random_complex(rng))
}

pub fn random_unit_cvec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVec {
    loop {
        let v = random_cvec(rng, len);
        let norm = v.norm();
        if norm > 1e-6 {
            return v / C64::new(norm, 0.0);
        }
    }
}

pub fn random_cmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// Second derivative at 0 of a one-variable function, fourth order
/// (Richardson combination of the `h` and `2h` three-point stencils).
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    let f0 = f(0.0);
    let d = |s: f64| (f(s) - 2.0 * f0 + f(-s)) / (s * s);
    (4.0 * d(h) - d(2.0 * h)) / 3.0
}

/// Mixed derivative `∂²f/∂x∂y` at the origin, fourth order.
pub fn mixed_derivative<F: Fn(f64, f64) -> f64>(f: F, h: f64) -> f64 {
    let d = |s: f64| (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
    (4.0 * d(h) - d(2.0 * h)) / 3.0
}

/// First derivative at 0, fourth order central differences.
pub fn first_derivative<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Flat Laplacian `f_xx + f_yy` at the origin, fourth order.
pub fn laplacian_2d<F: Fn(f64, f64) -> f64>(f: F, h: f64) -> f64 {
    let f0 = f(0.0, 0.0);
    let d = |s: f64| (f(s, 0.0) + f(-s, 0.0) + f(0.0, s) + f(0.0, -s) - 4.0 * f0) / (s * s);
    (4.0 * d(h) - d(2.0 * h)) / 3.0
}

/// Serde adapter storing a complex vector as an array of `[re, im]` pairs.
pub mod cvec_serde {
    use super::{CVec, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVec::from_iterator(pairs.len(), pairs.into_iter().map(|[re, im]| C64::new(re, im))))
    }
}
