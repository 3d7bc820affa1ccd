//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use lefschetz::catalog::{self, CatalogEntry};
use lefschetz::factorizations::{
    cancel_opposite_pair, hurwitz_move, partial_conjugate, rotate, ConjugationWord, Direction,
    Factorization, Twist,
};
use lefschetz::surfaces::HomologyClass;
use lefschetz::symplectic::{transvection, SpMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;

pub fn entries() -> &'static [CatalogEntry] {
    static E: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    E.get_or_init(|| catalog::standard_entries().expect("catalog builds"))
}

/// Fraction-free (Bareiss) elimination; every division is exact.
fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::from(1);
    }
    prev * sign
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Invariant factors `d_k = D_k / D_{k-1}`, where `D_k` is the gcd of all
/// `k × k` minors. Brute force; only for small matrices.
pub fn minor_gcd_diagonal(rows: &[Vec<i64>], ncols: usize) -> Vec<BigInt> {
    let nrows = rows.len();
    let mut prev = BigInt::from(1);
    let mut out = Vec::new();
    for k in 1..=nrows.min(ncols) {
        let mut g = BigInt::zero();
        for rs in subsets(nrows, k) {
            for cs in subsets(ncols, k) {
                let m: Vec<Vec<BigInt>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| BigInt::from(rows[r][c])).collect())
                    .collect();
                g = g.gcd(&det(&m));
                if g == BigInt::from(1) {
                    break;
                }
            }
            if g == BigInt::from(1) {
                break;
            }
        }
        if g.is_zero() {
            break;
        }
        out.push((&g / &prev).abs());
        prev = g;
    }
    out
}

pub fn random_class(rng: &mut impl Rng, genus: usize, range: i64) -> HomologyClass {
    loop {
        let v: Vec<i64> = (0..2 * genus).map(|_| rng.random_range(-range..=range)).collect();
        if v.iter().any(|&x| x != 0) {
            return HomologyClass::new(v);
        }
    }
}

pub fn random_sp(rng: &mut impl Rng, genus: usize, len: usize) -> SpMatrix {
    let mut m = SpMatrix::identity(2 * genus);
    for _ in 0..len {
        let c = random_class(rng, genus, 2);
        let e = if rng.random_bool(0.5) { 1 } else { -1 };
        m = m.mul(&transvection(&c, e));
    }
    m
}

/// The same factorization seen from the other side of the surface:
/// `b_i ↦ −b_i` on every class and every exponent negated.
pub fn flip_orientation(f: &Factorization) -> Factorization {
    let mut out = f.clone();
    for c in out.model.curves.values_mut() {
        for (k, x) in c.homology.coeffs.iter_mut().enumerate() {
            if k % 2 == 1 {
                *x = -*x;
            }
        }
        c.word = None;
    }
    for t in &mut out.twists {
        t.exponent = -t.exponent;
    }
    for phi in &mut out.conjugations {
        for (_, e) in &mut phi.factors {
            *e = -*e;
        }
    }
    out
}

/// One random product-preserving move; `None` when the drawn move does not apply.
pub fn random_move(rng: &mut impl Rng, f: &Factorization) -> Option<Factorization> {
    let n = f.twists.len();
    if n < 2 {
        return None;
    }
    match rng.random_range(0..4) {
        0 => {
            let i = rng.random_range(0..n - 1);
            let dir = if rng.random_bool(0.5) { Direction::Right } else { Direction::Left };
            hurwitz_move(f, i, dir).ok()
        }
        1 => rotate(f, rng.random_range(0..=n)).ok(),
        2 => {
            // insert t_c t_c^-1 and cancel it again
            let names: Vec<&String> = f
                .model
                .curves
                .iter()
                .filter(|(_, c)| c.boundary_index.is_none())
                .map(|(n, _)| n)
                .collect();
            let c = names[rng.random_range(0..names.len())];
            let pos = rng.random_range(0..=n);
            let mut g = f.clone();
            g.twists.insert(pos, Twist::new(c, -1));
            g.twists.insert(pos, Twist::new(c, 1));
            let g = g.checked().ok()?;
            cancel_opposite_pair(&g, pos, pos + 1).ok()
        }
        _ => {
            // conjugate everything by a random twist word: always commutes with the identity product
            let names: Vec<&String> = f
                .model
                .curves
                .iter()
                .filter(|(_, c)| c.boundary_index.is_none() && !c.homology.is_zero())
                .map(|(n, _)| n)
                .collect();
            let k = rng.random_range(1..=2);
            let factors: Vec<(&str, i64)> = (0..k)
                .map(|_| (names[rng.random_range(0..names.len())].as_str(), rng.random_range(-2..=2)))
                .collect();
            partial_conjugate(f, 0..n, &ConjugationWord::new(&factors)).ok()
        }
    }
}
