//! Exact integer cohomology of the unit tangent bundle `UM`, the divisor `D` and the
//! compactification `X` for `M = CP^n`.
//!
//! The long exact sequences are chased with the structure known for this model:
//!
//! * `S^{2n-1} → UM → M`: cup product with the Euler class is multiplication by
//!   `χ(M) = n + 1` from `H^0(M)` to `H^{2n}(M)` and zero elsewhere.
//! * `S^1 → UM → D`: an upward induction in low degrees and a downward one from the top
//!   class of `D`, which is a closed oriented manifold of real dimension `4n - 2`.
//! * Mayer–Vietoris for `X = (tube around M) ∪ (tube around D)` with intersection `≃ UM`.
//!
//! All arithmetic uses arbitrary precision integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `Z^rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` with `d_1 | d_2 | ... | d_k`, each `d_i ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FGAbelianGroup {
    rank: usize,
    #[serde(with = "bigint_strings")]
    torsion: Vec<BigInt>,
}

mod bigint_strings {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl FGAbelianGroup {
    pub fn zero() -> Self {
        Self { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        Self { rank, torsion: Vec::new() }
    }

    /// `Z/d`; `d = 0` gives `Z` and `d = ±1` the trivial group.
    pub fn cyclic(d: impl Into<BigInt>) -> Self {
        Self::from_orders(0, vec![d.into()])
    }

    /// `Z^rank ⊕ ⊕ Z/d_i` in canonical form, for arbitrary orders `d_i` (`0` meaning `Z`).
    pub fn from_orders(rank: usize, orders: Vec<BigInt>) -> Self {
        let k = orders.len();
        let mut m = IntegerMatrix::zeros(k, k);
        for (i, d) in orders.into_iter().enumerate() {
            m.set(i, i, d);
        }
        let coker = m.cokernel();
        Self { rank: rank + coker.rank, torsion: coker.torsion }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let orders = self.torsion.iter().chain(other.torsion.iter()).cloned().collect();
        Self::from_orders(self.rank + other.rank, orders)
    }

    /// Cyclic summands as orders (`0` for `Z`).
    fn cyclic_orders(&self) -> Vec<BigInt> {
        std::iter::repeat_n(BigInt::zero(), self.rank).chain(self.torsion.iter().cloned()).collect()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut orders = Vec::new();
        for a in self.cyclic_orders() {
            for b in other.cyclic_orders() {
                orders.push(a.gcd(&b));
            }
        }
        Self::from_orders(0, orders)
    }

    pub fn tor(&self, other: &Self) -> Self {
        let orders = self
            .torsion
            .iter()
            .flat_map(|a| other.torsion.iter().map(move |b| a.gcd(b)))
            .collect();
        Self::from_orders(0, orders)
    }

    /// Torsion factors joined by `;`, empty for a free group.
    pub fn torsion_string(&self) -> String {
        self.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Result of [`smith_normal_form`]: `u · a · v = s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub s: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.s.rows.min(self.s.cols)).map(|i| self.s.get(i, i).clone()).filter(|d| !d.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged integer matrix".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| BigInt::from(x))).collect();
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: impl Into<BigInt>) {
        self.data[i * self.cols + j] = value.into();
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimensions");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let value = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, value);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[target] += factor * row[source]`.
    fn add_row(&mut self, target: usize, source: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(source, j) * factor;
            self.data[target * self.cols + j] += v;
        }
    }

    fn add_col(&mut self, target: usize, source: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, source) * factor;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Cokernel of `a: Z^cols → Z^rows`.
    pub fn cokernel(&self) -> FGAbelianGroup {
        let snf = smith_normal_form(self);
        let factors = snf.invariant_factors();
        let torsion: Vec<BigInt> = factors.iter().filter(|d| !d.is_one()).cloned().collect();
        FGAbelianGroup { rank: self.rows - factors.len(), torsion }
    }

    /// Basis of the kernel of `a: Z^cols → Z^rows`, as columns.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let snf = smith_normal_form(self);
        (snf.rank()..self.cols).map(|j| snf.v.column(j)).collect()
    }

    pub fn is_smith_form(&self) -> bool {
        let k = self.rows.min(self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && !self.get(i, j).is_zero() {
                    return false;
                }
            }
        }
        let diag: Vec<&BigInt> = (0..k).map(|i| self.get(i, i)).collect();
        if diag.iter().any(|d| d.is_negative()) {
            return false;
        }
        diag.windows(2).all(|w| if w[0].is_zero() { w[1].is_zero() } else { (w[1] % w[0]).is_zero() })
    }
}

/// Smith normal form `u · a · v = s` with `u`, `v` unimodular and `s` diagonal with
/// nonnegative entries `s_1 | s_2 | ...`.
pub fn smith_normal_form(a: &IntegerMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut v = IntegerMatrix::identity(n);
    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the remaining block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = s.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < s.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { u, s, v };
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..m {
                let q = -(s.get(i, t).div_floor(s.get(t, t)));
                if !q.is_zero() {
                    s.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                }
                if !s.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = -(s.get(t, j).div_floor(s.get(t, t)));
                if !q.is_zero() {
                    s.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                }
                if !s.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(s.get(i, j) % s.get(t, t)).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, s, v }
}

/// Dense table `H^0, ..., H^dim` of a space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyTable {
    pub space: String,
    pub groups: Vec<FGAbelianGroup>,
}

impl CohomologyTable {
    pub fn new(space: impl Into<String>, groups: Vec<FGAbelianGroup>) -> Self {
        Self { space: space.into(), groups }
    }

    pub fn dim(&self) -> usize {
        self.groups.len().saturating_sub(1)
    }

    /// `H^j`, zero outside the stored range.
    pub fn get(&self, j: i64) -> FGAbelianGroup {
        if j < 0 {
            return FGAbelianGroup::zero();
        }
        self.groups.get(j as usize).cloned().unwrap_or_else(FGAbelianGroup::zero)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.groups.iter().enumerate().map(|(j, g)| if j % 2 == 0 { g.rank as i64 } else { -(g.rank as i64) }).sum()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.rank).collect()
    }
}

/// `H^*(CP^n) = Z` in even degrees `0, ..., 2n`.
pub fn cpn_table(n: usize) -> CohomologyTable {
    let groups = (0..=2 * n).map(|j| if j % 2 == 0 { FGAbelianGroup::free(1) } else { FGAbelianGroup::zero() }).collect();
    CohomologyTable::new(format!("CP^{n}"), groups)
}

/// `H^*(RP^n; Z)`.
pub fn rpn_table(n: usize) -> CohomologyTable {
    let groups = (0..=n)
        .map(|k| {
            if k == 0 || (k == n && n % 2 == 1) {
                FGAbelianGroup::free(1)
            } else if k % 2 == 0 {
                FGAbelianGroup::cyclic(2)
            } else {
                FGAbelianGroup::zero()
            }
        })
        .collect();
    CohomologyTable::new(format!("RP^{n}"), groups)
}

/// Künneth formula `H^k(X x Y) = ⊕ H^i ⊗ H^j ⊕ ⊕_{i+j=k+1} Tor(H^i, H^j)`.
pub fn product_table(a: &CohomologyTable, b: &CohomologyTable) -> CohomologyTable {
    if a.groups.is_empty() || b.groups.is_empty() {
        return CohomologyTable::new(format!("{} x {}", a.space, b.space), Vec::new());
    }
    let dim = a.dim() + b.dim();
    let groups = (0..=dim as i64)
        .map(|k| {
            let mut g = FGAbelianGroup::zero();
            for i in 0..=k {
                g = g.direct_sum(&a.get(i).tensor(&b.get(k - i)));
            }
            for i in 0..=k + 1 {
                g = g.direct_sum(&a.get(i).tor(&b.get(k + 1 - i)));
            }
            g
        })
        .collect();
    CohomologyTable::new(format!("{} x {}", a.space, b.space), groups)
}

fn free_rank(table: &CohomologyTable, j: i64, what: &str) -> Result<usize> {
    let g = table.get(j);
    if !g.is_free() {
        return Err(Error::InconsistentChase(format!("{what}: H^{j}({}) = {g} is expected to be free", table.space)));
    }
    Ok(g.rank)
}

/// Matrix of `∪e: H^{j-2n}(M) → H^j(M)` for the sphere bundle of `T CP^n`.
fn euler_map(h_m: &CohomologyTable, n: usize, j: i64, euler: &BigInt) -> Result<Option<IntegerMatrix>> {
    let src = j - 2 * n as i64;
    if src < 0 || j > h_m.dim() as i64 {
        return Ok(None);
    }
    let rows = free_rank(h_m, j, "sphere Gysin")?;
    let cols = free_rank(h_m, src, "sphere Gysin")?;
    let mut m = IntegerMatrix::zeros(rows, cols);
    if src == 0 && rows == 1 && cols == 1 {
        m.set(0, 0, euler.clone());
    }
    Ok(Some(m))
}

/// `H^*(UM)` from `H^*(M)` (`M = CP^n`, real dimension `2n`) and the Euler number of `TM`.
pub fn sphere_gysin(h_m: &CohomologyTable, euler: &BigInt) -> Result<CohomologyTable> {
    if !h_m.dim().is_multiple_of(2) || h_m.dim() == 0 {
        return Err(Error::InvalidParameter("base must have even positive dimension".into()));
    }
    let n = h_m.dim() / 2;
    let top = 4 * n - 1;
    let mut groups = Vec::with_capacity(top + 1);
    for j in 0..=top as i64 {
        // 0 → coker(∪e into H^j(M)) → H^j(UM) → ker(∪e out of H^{j-2n+1}(M)) → 0
        let coker = match euler_map(h_m, n, j, euler)? {
            Some(m) => m.cokernel(),
            None => h_m.get(j),
        };
        let src = j - 2 * n as i64 + 1;
        let ker = if src < 0 {
            FGAbelianGroup::zero()
        } else {
            match euler_map(h_m, n, j + 1, euler)? {
                Some(m) => FGAbelianGroup::free(m.kernel_basis().len()),
                None => h_m.get(src),
            }
        };
        if !ker.is_free() {
            return Err(Error::InconsistentChase(format!("kernel in degree {j} must be free")));
        }
        groups.push(coker.direct_sum(&ker));
    }
    Ok(CohomologyTable::new(format!("UCP^{n}"), groups))
}

/// `H^*(D)` from `H^*(UM)` through the Gysin sequence of the circle bundle `UM → D`.
pub fn circle_gysin(h_um: &CohomologyTable) -> Result<CohomologyTable> {
    if !(h_um.dim() + 1).is_multiple_of(4) {
        return Err(Error::InvalidParameter("UM must have dimension 4n - 1".into()));
    }
    let n = (h_um.dim() + 1) / 4;
    let dim = 4 * n - 2;
    let mut groups = vec![FGAbelianGroup::zero(); dim + 1];
    let ni = n as i64;

    // upward: H^{j-2}(D) --∪e--> H^j(D) --π*--> H^j(UM) --> H^{j-1}(D) --∪e--> H^{j+1}(D)
    for j in 0..=(2 * ni - 1) {
        let um = h_um.get(j);
        let um_prev = h_um.get(j - 1);
        if j % 2 == 1 {
            // H^j(UM) = 0 forces ∪e onto H^j(D) from H^{j-2}(D) = 0
            if !um.is_zero() {
                return Err(Error::InconsistentChase(format!("H^{j}(UM) = {um}, expected 0")));
            }
            groups[j as usize] = FGAbelianGroup::zero();
        } else {
            if !um_prev.is_zero() {
                return Err(Error::InconsistentChase(format!("H^{}(UM) = {um_prev}, expected 0", j - 1)));
            }
            if j <= 2 * ni - 2 {
                // 0 → H^{j-2}(D) → H^j(D) → H^j(UM) = Z → 0, split
                if um != FGAbelianGroup::free(1) {
                    return Err(Error::InconsistentChase(format!("H^{j}(UM) = {um}, expected Z")));
                }
                let below = if j >= 2 { groups[(j - 2) as usize].clone() } else { FGAbelianGroup::zero() };
                groups[j as usize] = below.direct_sum(&um);
            }
        }
    }

    // Poincaré duality with the free, even lower half: odd groups above the middle vanish
    // downward: 0 = H^{j+1}(D) → H^{j+1}(UM) → H^j(D) --∪e--> H^{j+2}(D) → H^{j+2}(UM) = 0
    let mut j = dim as i64;
    while j >= 2 * ni {
        let um_next = h_um.get(j + 1);
        let um_next2 = h_um.get(j + 2);
        if !um_next2.is_zero() {
            return Err(Error::InconsistentChase(format!("H^{}(UM) = {um_next2}, expected 0", j + 2)));
        }
        if um_next != FGAbelianGroup::free(1) {
            return Err(Error::InconsistentChase(format!("H^{}(UM) = {um_next}, expected Z", j + 1)));
        }
        let above = groups.get((j + 2) as usize).cloned().unwrap_or_else(FGAbelianGroup::zero);
        groups[j as usize] = um_next.direct_sum(&above);
        j -= 2;
    }

    // middle: H^{2n-2}(D) --∪e--> H^{2n}(D) → H^{2n}(UM) → H^{2n-1}(D) = 0 needs a finite cokernel
    let low = &groups[(2 * ni - 2) as usize];
    let mid = &groups[(2 * ni) as usize];
    let um_mid = h_um.get(2 * ni);
    if low.rank != mid.rank || um_mid.rank != 0 {
        return Err(Error::InconsistentChase(format!(
            "middle degrees: H^{}(D) = {low}, H^{}(D) = {mid}, H^{}(UM) = {um_mid}",
            2 * ni - 2,
            2 * ni,
            2 * ni
        )));
    }
    Ok(CohomologyTable::new(format!("D(n={n})"), groups))
}

/// `H^*(X)` from the Mayer–Vietoris sequence of `X = U_M ∪ U_D`, `U_M ∩ U_D ≃ UM`.
pub fn mayer_vietoris_x(h_d: &CohomologyTable, h_m: &CohomologyTable, h_um: &CohomologyTable) -> Result<CohomologyTable> {
    let n = h_m.dim() / 2;
    let ni = n as i64;
    if h_d.dim() != 4 * n - 2 || h_um.dim() != 4 * n - 1 {
        return Err(Error::InvalidParameter("tables do not belong to the same n".into()));
    }
    let dim = 4 * n;
    let mut groups = Vec::with_capacity(dim + 1);
    for j in 0..=dim as i64 {
        let g = if j < 2 * ni {
            // H^j(M) → H^j(UM) is onto for j < 2n, so H^j(X) ≅ ker ≅ H^j(D)
            if j <= 2 * ni - 2 && h_m.get(j) != h_um.get(j) {
                return Err(Error::InconsistentChase(format!("H^{j}(M) and H^{j}(UM) differ")));
            }
            h_d.get(j)
        } else if j == 2 * ni {
            // ker(Z ⊕ H^{2n}(D) → Z/(n+1)) is a full-rank subgroup of a free group
            if h_um.get(j).rank != 0 || !h_d.get(j).is_free() {
                return Err(Error::InconsistentChase("middle degree".into()));
            }
            h_d.get(j).direct_sum(&h_m.get(j))
        } else if j == 2 * ni + 1 {
            if !h_d.get(j).is_zero() || !h_m.get(j).is_zero() {
                return Err(Error::InconsistentChase(format!("H^{j} inputs must vanish")));
            }
            FGAbelianGroup::zero()
        } else {
            // UM lives in odd degrees and D in even ones here, so the restriction maps vanish
            let um = h_um.get(j - 1);
            let d = h_d.get(j);
            if !(um.is_zero() || h_d.get(j - 1).is_zero()) || !(d.is_zero() || h_um.get(j).is_zero()) {
                return Err(Error::InconsistentChase(format!("restriction maps in degree {j} do not vanish")));
            }
            if !d.is_free() {
                return Err(Error::InconsistentChase(format!("H^{j}(D) must be free")));
            }
            um.direct_sum(&d)
        };
        groups.push(g);
    }
    Ok(CohomologyTable::new(format!("X(n={n})"), groups))
}

/// The three tables for `M = CP^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCohomology {
    pub n: usize,
    pub um: CohomologyTable,
    pub d: CohomologyTable,
    pub x: CohomologyTable,
}

pub fn model_cohomology(n: usize) -> Result<ModelCohomology> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let m = cpn_table(n);
    let um = sphere_gysin(&m, &BigInt::from(n + 1))?;
    let d = circle_gysin(&um)?;
    let x = mayer_vietoris_x(&d, &m, &um)?;
    Ok(ModelCohomology { n, um, d, x })
}

pub fn um_closed_form(n: usize) -> CohomologyTable {
    let groups = (0..4 * n)
        .map(|j| {
            if j == 2 * n {
                FGAbelianGroup::cyclic(n + 1)
            } else if (j < 2 * n && j % 2 == 0) || (j > 2 * n && j % 2 == 1) {
                FGAbelianGroup::free(1)
            } else {
                FGAbelianGroup::zero()
            }
        })
        .collect();
    CohomologyTable::new(format!("UCP^{n}"), groups)
}

pub fn d_closed_form(n: usize) -> CohomologyTable {
    let groups = (0..=4 * n - 2)
        .map(|j| {
            if j % 2 == 1 {
                FGAbelianGroup::zero()
            } else if j <= 2 * n - 2 {
                FGAbelianGroup::free(j / 2 + 1)
            } else {
                FGAbelianGroup::free(2 * n - j / 2)
            }
        })
        .collect();
    CohomologyTable::new(format!("D(n={n})"), groups)
}

/// `H^*(CP^n x CP^n)`: rank `min(k, 2n - k) + 1` in degree `2k`.
pub fn x_closed_form(n: usize) -> CohomologyTable {
    let groups = (0..=4 * n)
        .map(|j| if j % 2 == 1 { FGAbelianGroup::zero() } else { FGAbelianGroup::free((j / 2).min(2 * n - j / 2) + 1) })
        .collect();
    CohomologyTable::new(format!("X(n={n})"), groups)
}

/// Outcome of the eigenspace argument for the action of `N_{-1}^*` on `H^2(D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenspaceVerdict {
    pub d: i64,
    /// Matrix of the action on coordinate vectors in the basis `{x, ω}`.
    pub action: IntegerMatrix,
    pub squares_to_identity: bool,
    pub eigenspace_rank: usize,
    pub basis: Vec<Vec<BigInt>>,
    /// `ω = (0, 1)` lies in the `(-1)`-eigenspace lattice.
    pub contains_omega: bool,
}

impl EigenspaceVerdict {
    /// `c_1(D)`, which lies in the `(-1)`-eigenspace, is an integer multiple of `ω`.
    pub fn conclusion_holds(&self) -> bool {
        self.squares_to_identity && self.eigenspace_rank == 1 && self.contains_omega
    }
}

/// Whether `v` is an integer combination of `basis`.
pub fn in_integer_span(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let rows = v.len();
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let mut b = IntegerMatrix::zeros(rows, basis.len());
    for (j, col) in basis.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            b.set(i, j, x.clone());
        }
    }
    let snf = smith_normal_form(&b);
    let mut vm = IntegerMatrix::zeros(rows, 1);
    for (i, x) in v.iter().enumerate() {
        vm.set(i, 0, x.clone());
    }
    let uv = snf.u.mul(&vm);
    (0..rows).all(|i| {
        let x = uv.get(i, 0);
        if i < basis.len() && !snf.s.get(i, i).is_zero() {
            (x % snf.s.get(i, i)).is_zero()
        } else {
            x.is_zero()
        }
    })
}

/// `(-1)`-eigenspace of the involution with matrix `[[1, -d], [0, -1]]` acting through its
/// transpose on coordinate vectors.
pub fn eigenspace_argument(d: i64) -> EigenspaceVerdict {
    let m = IntegerMatrix::from_rows(&[vec![1, -d], vec![0, -1]]).expect("2x2");
    let action = m.transpose();
    let squares_to_identity = action.mul(&action) == IntegerMatrix::identity(2);
    let mut shifted = action.clone();
    for i in 0..2 {
        let v = shifted.get(i, i) + 1;
        shifted.set(i, i, v);
    }
    let basis = shifted.kernel_basis();
    let omega = [BigInt::zero(), BigInt::one()];
    let contains_omega = in_integer_span(&basis, &omega);
    EigenspaceVerdict { d, action, squares_to_identity, eigenspace_rank: basis.len(), basis, contains_omega }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntegerMatrix {
        IntegerMatrix::from_rows(rows).unwrap()
    }

    fn check_snf(a: &IntegerMatrix) -> SmithForm {
        let snf = smith_normal_form(a);
        assert_eq!(snf.u.mul(a).mul(&snf.v), snf.s);
        assert!(snf.u.is_unimodular() && snf.v.is_unimodular());
        assert!(snf.s.is_smith_form(), "{:?}", snf.s);
        snf
    }

    #[test]
    fn smith_examples() {
        let snf = check_snf(&m(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(snf.invariant_factors(), vec![BigInt::from(1), BigInt::from(6)]);
        let three = m(&[vec![3]]);
        check_snf(&three);
        assert_eq!(three.cokernel(), FGAbelianGroup::cyclic(3));
        let zero = IntegerMatrix::zeros(2, 3);
        assert_eq!(check_snf(&zero).rank(), 0);
        assert_eq!(zero.cokernel(), FGAbelianGroup::free(2));
        let snf = check_snf(&m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]));
        assert_eq!(snf.invariant_factors(), vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let again = smith_normal_form(&snf.s);
        assert_eq!(again.s, snf.s);
    }

    #[test]
    fn determinant_and_kernel() {
        assert_eq!(m(&[vec![2, 1], vec![7, 4]]).determinant(), BigInt::from(1));
        assert_eq!(m(&[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 9]]).determinant(), BigInt::from(-3));
        let k = m(&[vec![1, 2, 3]]).kernel_basis();
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn group_arithmetic() {
        let g = FGAbelianGroup::from_orders(1, vec![BigInt::from(4), BigInt::from(6)]);
        assert_eq!(g.rank(), 1);
        assert_eq!(g.torsion(), &[BigInt::from(2), BigInt::from(12)]);
        assert_eq!(g.to_string(), "Z + Z/2 + Z/12");
        assert_eq!(FGAbelianGroup::cyclic(1), FGAbelianGroup::zero());
        assert_eq!(FGAbelianGroup::cyclic(0), FGAbelianGroup::free(1));
        assert_eq!(FGAbelianGroup::cyclic(4).tensor(&FGAbelianGroup::cyclic(6)), FGAbelianGroup::cyclic(2));
        assert_eq!(FGAbelianGroup::cyclic(4).tor(&FGAbelianGroup::free(3)), FGAbelianGroup::zero());
    }

    #[test]
    fn sphere_gysin_examples() {
        let t2 = sphere_gysin(&cpn_table(2), &BigInt::from(3)).unwrap();
        let expected = ["Z", "0", "Z", "0", "Z/3", "Z", "0", "Z"];
        assert_eq!(t2.groups.iter().map(|g| g.to_string()).collect::<Vec<_>>(), expected);
        let t1 = sphere_gysin(&cpn_table(1), &BigInt::from(2)).unwrap();
        assert_eq!(t1.groups.iter().map(|g| g.to_string()).collect::<Vec<_>>(), ["Z", "0", "Z/2", "Z"]);
        // UCP^1 = RP^3
        assert_eq!(t1.groups, rpn_table(3).groups);
        let t3 = sphere_gysin(&cpn_table(3), &BigInt::from(4)).unwrap();
        assert_eq!(t3.groups[6], FGAbelianGroup::cyclic(4));
    }

    #[test]
    fn circle_gysin_examples() {
        let ranks = |n: usize| circle_gysin(&um_closed_form(n)).unwrap().ranks();
        assert_eq!(ranks(2), vec![1, 0, 2, 0, 2, 0, 1]);
        assert_eq!(ranks(1), vec![1, 0, 1]);
        assert_eq!(ranks(3), vec![1, 0, 2, 0, 3, 0, 3, 0, 2, 0, 1]);
        assert!(circle_gysin(&um_closed_form(3)).unwrap().groups.iter().all(|g| g.is_free()));
        let mut broken = um_closed_form(2);
        broken.groups[3] = FGAbelianGroup::free(1);
        assert!(matches!(circle_gysin(&broken), Err(Error::InconsistentChase(_))));
    }

    #[test]
    fn mayer_vietoris_examples() {
        let c1 = model_cohomology(1).unwrap();
        assert_eq!(c1.x.ranks(), vec![1, 0, 2, 0, 1]);
        let c2 = model_cohomology(2).unwrap();
        assert_eq!(c2.x.ranks(), vec![1, 0, 2, 0, 3, 0, 2, 0, 1]);
        assert!(c2.x.groups.iter().enumerate().all(|(j, g)| j % 2 == 0 || g.is_zero()));
    }

    #[test]
    fn tables_match_closed_forms() {
        for n in 1..=10 {
            let c = model_cohomology(n).unwrap();
            assert_eq!(c.um, um_closed_form(n));
            assert_eq!(c.d, d_closed_form(n));
            assert_eq!(c.x, x_closed_form(n));
            assert_eq!(c.x.euler_characteristic(), ((n + 1) * (n + 1)) as i64);
            assert_eq!(c.d.euler_characteristic(), (n * (n + 1)) as i64);
            assert_eq!(c.x.groups, product_table(&cpn_table(n), &cpn_table(n)).groups);
        }
    }

    #[test]
    fn real_projective_products() {
        let t = product_table(&rpn_table(1), &rpn_table(1));
        assert_eq!(t.ranks(), vec![1, 2, 1]);
        let t = product_table(&rpn_table(2), &rpn_table(2));
        assert_eq!(t.groups[2].to_string(), "Z/2 + Z/2");
        assert_eq!(t.groups[3], FGAbelianGroup::cyclic(2));
    }

    #[test]
    fn eigenspace_examples() {
        let v = eigenspace_argument(0);
        assert!(v.conclusion_holds());
        assert_eq!(v.basis.len(), 1);
        assert!(v.basis[0][0].is_zero() && v.basis[0][1].abs().is_one());
        for d in -10..=10 {
            assert!(eigenspace_argument(d).conclusion_holds(), "d = {d}");
        }
    }
}
