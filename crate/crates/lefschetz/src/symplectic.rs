//! Integer symplectic matrices and the homological shadow of factorizations.
//!
//! A positive twist along `c` acts by `x ↦ x + ⟨c,x⟩c`. A word
//! `t_{c1} ⋯ t_{cl}` maps to the matrix product `T(c1)⋯T(cl)`, so the
//! rightmost twist is applied first.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizations::Factorization;
use crate::surfaces::{pairing, HomologyClass};

/// Square integer matrix acting on `H_1` in the basis `(a1, b1, ..., ag, bg)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl SpMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        SpMatrix { n, entries }
    }

    /// Row-major construction; does not check the symplectic condition.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(n, r.len()));
        }
        Ok(SpMatrix { n, entries: rows.concat() })
    }

    /// Standard form `J` with `⟨x,y⟩ = xᵀ J y`.
    pub fn j(n: usize) -> Self {
        let mut m = SpMatrix { n, entries: vec![0; n * n] };
        for i in (0..n).step_by(2) {
            m.entries[i * n + i + 1] = 1;
            m.entries[(i + 1) * n + i] = -1;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Panics if an entry leaves the `i64` range, in every build profile.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let x = a
                        .checked_mul(other.entries[k * n + j])
                        .and_then(|x| x.checked_add(entries[i * n + j]))
                        .expect("symplectic matrix entry overflows i64");
                    entries[i * n + j] = x;
                }
            }
        }
        SpMatrix { n, entries }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        SpMatrix { n, entries }
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `MᵀJM = J`.
    pub fn is_symplectic(&self) -> bool {
        let j = Self::j(self.n);
        self.transpose().mul(&j).mul(self) == j
    }

    /// Inverse of a symplectic matrix, `-J Mᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = Self::j(self.n);
        let m = j.mul(&self.transpose()).mul(&j);
        SpMatrix { n: self.n, entries: m.entries.iter().map(|x| -x).collect() }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Self::identity(self.n);
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }
}

impl fmt::Display for SpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Matrix of `t_c^e`: `x ↦ x + e⟨c,x⟩c`.
pub fn transvection(c: &HomologyClass, exponent: i64) -> SpMatrix {
    let n = c.dim();
    let mut m = SpMatrix::identity(n);
    for k in 0..n {
        let mut ek = vec![0; n];
        ek[k] = 1;
        let p = exponent * pairing(&c.coeffs, &ek);
        if p != 0 {
            for i in 0..n {
                m.entries[i * n + k] += p * c.coeffs[i];
            }
        }
    }
    m
}

/// Product of transvections in written order.
pub fn product_of(twists: &[(HomologyClass, i64)], dim: usize) -> SpMatrix {
    twists
        .iter()
        .fold(SpMatrix::identity(dim), |acc, (c, e)| acc.mul(&transvection(c, *e)))
}

/// Symplectic image of a factorization (conjugated twists use their image classes).
pub fn product(f: &Factorization) -> SpMatrix {
    product_of(&f.effective_twists(), f.surface().dim())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// Basis index `k` with `M e_k ≠ e_k`, and its image.
    pub witness: Option<(usize, Vec<i64>)>,
    pub note: &'static str,
}

pub const NECESSARY_ONLY: &str = "Sp-level check: necessary condition only";

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "PASS ({})", self.note),
            Some((k, img)) => write!(f, "FAIL: basis vector {k} maps to {img:?} ({})", self.note),
        }
    }
}

/// Boundary twists are trivial after capping, so the capped target is `I`.
pub fn verify(f: &Factorization) -> Verdict {
    verify_matrix(&product(f))
}

pub fn verify_matrix(m: &SpMatrix) -> Verdict {
    let n = m.dim();
    let witness = (0..n).find_map(|k| {
        let mut ek = vec![0; n];
        ek[k] = 1;
        let img = m.apply(&ek);
        (img != ek).then_some((k, img))
    });
    Verdict { pass: witness.is_none(), witness, note: NECESSARY_ONLY }
}

type Q = BigRational;

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Basis of the rational null space of `rows`.
fn nullspace(mut rows: Vec<Vec<Q>>, ncols: usize) -> Vec<Vec<Q>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let k = rows[i][c].clone();
                for j in 0..ncols {
                    let d = &k * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Q::zero(); ncols];
            v[fc] = Q::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][fc].clone();
            }
            v
        })
        .collect()
}

/// Signature of a symmetric rational matrix by congruence diagonalization.
pub(crate) fn signature(mut s: Vec<Vec<Q>>) -> i64 {
    let n = s.len();
    let mut sig = 0;
    let mut k = 0;
    while k < n {
        if s[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !s[i][i].is_zero()) {
                s.swap(k, i);
                for row in s.iter_mut() {
                    row.swap(k, i);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !s[k][j].is_zero()) {
                // diagonal block is zero: x_k += x_j makes s[k][k] = 2 s[k][j]
                for c in 0..n {
                    let v = s[j][c].clone();
                    s[k][c] += v;
                }
                for r in 0..n {
                    let v = s[r][j].clone();
                    s[r][k] += v;
                }
            } else {
                k += 1;
                continue;
            }
        }
        let d = s[k][k].clone();
        sig += if d.is_positive() { 1 } else { -1 };
        for i in k + 1..n {
            if s[i][k].is_zero() {
                continue;
            }
            let f = &s[i][k] / &d;
            for c in k..n {
                let v = &f * &s[k][c];
                s[i][c] -= v;
            }
            for r in k..n {
                let v = &f * &s[r][k];
                s[r][i] -= v;
            }
        }
        k += 1;
    }
    sig
}

/// Meyer cocycle `τ(A,B)`: signature of the symmetrized form
/// `((x1,y1),(x2,y2)) ↦ ⟨x1+y1, (I−B)y2⟩` on
/// `{(x,y) : (A⁻¹−I)x + (B−I)y = 0}`.
pub fn meyer_tau(a: &SpMatrix, b: &SpMatrix) -> i64 {
    let n = a.dim();
    assert_eq!(n, b.dim(), "dimension mismatch");
    let ai = a.inverse();
    let rows: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut r = Vec::with_capacity(2 * n);
            r.extend((0..n).map(|j| q(ai.get(i, j) - i64::from(i == j))));
            r.extend((0..n).map(|j| q(b.get(i, j) - i64::from(i == j))));
            r
        })
        .collect();
    let basis = nullspace(rows, 2 * n);
    if basis.is_empty() {
        return 0;
    }
    let jm = SpMatrix::j(n);
    // (I−B) y for each basis vector, and x + y
    let img: Vec<Vec<Q>> = basis
        .iter()
        .map(|v| {
            (0..n)
                .map(|i| {
                    (0..n).fold(Q::zero(), |acc, j| {
                        acc + q(i64::from(i == j) - b.get(i, j)) * &v[n + j]
                    })
                })
                .collect()
        })
        .collect();
    let sums: Vec<Vec<Q>> = basis
        .iter()
        .map(|v| (0..n).map(|i| &v[i] + &v[n + i]).collect())
        .collect();
    let form = |u: &[Q], w: &[Q]| -> Q {
        let mut acc = Q::zero();
        for i in 0..n {
            for j in 0..n {
                let jij = jm.get(i, j);
                if jij != 0 {
                    acc += q(jij) * &u[i] * &w[j];
                }
            }
        }
        acc
    };
    let k = basis.len();
    let g: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| form(&sums[i], &img[j])).collect())
        .collect();
    let sym: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| &g[i][j] + &g[j][i]).collect())
        .collect();
    signature(sym)
}

/// `Σ_{k=1}^{l−1} τ(M_1⋯M_k, M_{k+1})` over the given matrices.
pub fn meyer_sum(mats: &[SpMatrix]) -> i64 {
    let Some(first) = mats.first() else { return 0 };
    let mut acc = first.clone();
    let mut total = 0;
    for m in &mats[1..] {
        total += meyer_tau(&acc, m);
        acc = acc.mul(m);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hc(v: &[i64]) -> HomologyClass {
        HomologyClass::new(v.to_vec())
    }

    #[test]
    fn zero_class_gives_identity() {
        assert!(transvection(&HomologyClass::zero(3), 1).is_identity());
    }

    #[test]
    fn genus_one_twists() {
        // t_{a1}: b1 ↦ b1 + a1 under x ↦ x + ⟨c,x⟩c
        let t = transvection(&hc(&[1, 0]), 1);
        assert_eq!(t.apply(&[0, 1]), vec![1, 1]);
        assert_eq!(t.apply(&[1, 0]), vec![1, 0]);
        let t = transvection(&hc(&[0, 1]), 1);
        assert_eq!(t.apply(&[1, 0]), vec![1, -1]);
    }

    #[test]
    fn inverse_and_pow() {
        let t = transvection(&hc(&[1, 2, -1, 3]), 1);
        assert!(t.mul(&t.inverse()).is_identity());
        assert_eq!(t.pow(3), transvection(&hc(&[1, 2, -1, 3]), 3));
        assert_eq!(t.pow(-2), transvection(&hc(&[1, 2, -1, 3]), -2));
    }

    #[test]
    fn genus_one_chain_relation() {
        // (t_a t_b)^6 = 1 in Sp(2,Z)
        let ab = transvection(&hc(&[1, 0]), 1).mul(&transvection(&hc(&[0, 1]), 1));
        assert!(ab.pow(6).is_identity());
        assert!(!ab.pow(3).is_identity());
    }

    #[test]
    fn genus_two_calibration() {
        // capped lift (B0 B1 B2 C)^2 in genus 2; C separating contributes +λ each
        let b0 = hc(&[1, 0, 1, 0]);
        let b1 = hc(&[-1, 1, -1, 1]);
        let b2 = hc(&[0, 1, 0, 1]);
        let c = HomologyClass::zero(2);
        let word: Vec<_> = [&b0, &b1, &b2, &c, &b0, &b1, &b2, &c]
            .iter()
            .map(|x| ((*x).clone(), 1))
            .collect();
        let mats: Vec<_> = word.iter().map(|(c, e)| transvection(c, *e)).collect();
        assert!(product_of(&word, 4).is_identity());
        assert_eq!(-meyer_sum(&mats) - 2, -4);
    }

    #[test]
    fn tau_trivial_cases() {
        let b = transvection(&hc(&[1, 1, 0, 2]), 1);
        assert_eq!(meyer_tau(&SpMatrix::identity(4), &b), 0);
        assert_eq!(meyer_tau(&b, &b.inverse()), 0);
    }

    #[test]
    fn signature_of_hyperbolic_plane() {
        let s = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(signature(s), 0);
        let s = vec![vec![q(2), q(1)], vec![q(1), q(2)]];
        assert_eq!(signature(s), 2);
        let s = vec![vec![q(0), q(0)], vec![q(0), q(-3)]];
        assert_eq!(signature(s), -1);
    }

    fn class(n: usize) -> impl Strategy<Value = HomologyClass> {
        prop::collection::vec(-3i64..=3, n).prop_map(HomologyClass::new)
    }

    fn sp(n: usize) -> impl Strategy<Value = SpMatrix> {
        prop::collection::vec((class(n), prop_oneof![Just(1i64), Just(-1)]), 1..4)
            .prop_map(move |v| product_of(&v, n))
    }

    proptest! {
        #[test]
        fn transvections_are_symplectic(g in 1usize..=4, seed in prop::collection::vec(-5i64..=5, 8), e in -3i64..=3) {
            let c = HomologyClass::new(seed[..2 * g].to_vec());
            let t = transvection(&c, e);
            prop_assert!(t.is_symplectic());
        }

        #[test]
        fn flip_invariance(c in class(6), e in -2i64..=2) {
            prop_assert_eq!(transvection(&c, e), transvection(&(-c.clone()), e));
        }

        #[test]
        fn cocycle_identity(a in sp(4), b in sp(4), c in sp(4)) {
            let lhs = meyer_tau(&a, &b) + meyer_tau(&a.mul(&b), &c);
            let rhs = meyer_tau(&a, &b.mul(&c)) + meyer_tau(&b, &c);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn tau_bounded(a in sp(4), b in sp(4)) {
            prop_assert!(meyer_tau(&a, &b).abs() <= 4);
        }
    }
}
