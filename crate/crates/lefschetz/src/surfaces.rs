//! Surfaces, their homology lattice and named curves.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact oriented surface of genus `genus` with `boundary_count` boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Surface {
    pub genus: usize,
    pub boundary_count: usize,
}

impl Surface {
    pub fn new(genus: usize, boundary_count: usize) -> Self {
        Surface { genus, boundary_count }
    }

    pub fn closed(genus: usize) -> Self {
        Surface::new(genus, 0)
    }

    /// Rank of H_1 of the capped surface.
    pub fn dim(&self) -> usize {
        2 * self.genus
    }

    /// `a1, b1, ..., ag, bg`.
    pub fn generators(&self) -> Vec<String> {
        (1..=self.genus)
            .flat_map(|i| [format!("a{i}"), format!("b{i}")])
            .collect()
    }

    /// `d1, ..., dm`.
    pub fn boundary_symbols(&self) -> Vec<String> {
        (1..=self.boundary_count).map(|i| format!("d{i}")).collect()
    }

    /// Index of a generator symbol in the basis order, if it names one.
    pub fn generator_index(&self, sym: &str) -> Option<usize> {
        let (kind, rest) = sym.split_at(1.min(sym.len()));
        let i: usize = rest.parse().ok()?;
        if i == 0 || i > self.genus {
            return None;
        }
        match kind {
            "a" => Some(2 * (i - 1)),
            "b" => Some(2 * (i - 1) + 1),
            _ => None,
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Σ_{}^{}", self.genus, self.boundary_count)
    }
}

/// Integer vector in the basis `(a1, b1, ..., ag, bg)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HomologyClass {
    pub coeffs: Vec<i64>,
}

impl HomologyClass {
    pub fn new(coeffs: Vec<i64>) -> Self {
        HomologyClass { coeffs }
    }

    pub fn zero(genus: usize) -> Self {
        HomologyClass { coeffs: vec![0; 2 * genus] }
    }

    pub fn basis(genus: usize, index: usize) -> Self {
        let mut c = Self::zero(genus);
        c.coeffs[index] = 1;
        c
    }

    /// `a_i` (1-based).
    pub fn a(genus: usize, i: usize) -> Self {
        Self::basis(genus, 2 * (i - 1))
    }

    /// `b_i` (1-based).
    pub fn b(genus: usize, i: usize) -> Self {
        Self::basis(genus, 2 * (i - 1) + 1)
    }

    /// Builds a class from `(symbol, coefficient)` pairs such as `("a1", 1)`.
    pub fn from_terms(genus: usize, terms: &[(&str, i64)]) -> Result<Self> {
        let s = Surface::closed(genus);
        let mut c = Self::zero(genus);
        for (sym, k) in terms {
            let i = s
                .generator_index(sym)
                .ok_or_else(|| Error::UnknownGenerator(sym.to_string()))?;
            c.coeffs[i] += k;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn genus(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }

    /// Same class up to sign; curve orientations are arbitrary.
    pub fn eq_up_to_sign(&self, other: &Self) -> bool {
        self == other || *self == -other.clone()
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &k) in self.coeffs.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let sym = format!("{}{}", if i % 2 == 0 { "a" } else { "b" }, i / 2 + 1);
            let sign = if k < 0 { "-" } else if first { "" } else { "+" };
            let mag = k.abs();
            if mag == 1 {
                write!(f, "{sign}{sym}")?;
            } else {
                write!(f, "{sign}{mag}{sym}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for HomologyClass {
    type Output = HomologyClass;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HomologyClass::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(x, y)| x + y).collect())
    }
}

impl Sub for HomologyClass {
    type Output = HomologyClass;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for HomologyClass {
    type Output = HomologyClass;
    fn neg(self) -> Self {
        HomologyClass::new(self.coeffs.iter().map(|x| -x).collect())
    }
}

impl Mul<HomologyClass> for i64 {
    type Output = HomologyClass;
    fn mul(self, rhs: HomologyClass) -> HomologyClass {
        HomologyClass::new(rhs.coeffs.iter().map(|x| self * x).collect())
    }
}

/// The symplectic pairing: `<a_i, b_i> = 1`, `<b_i, a_i> = -1`, all other basis pairs 0.
pub fn intersection(x: &HomologyClass, y: &HomologyClass) -> Result<i64> {
    x.same_dim(y)?;
    Ok(pairing(&x.coeffs, &y.coeffs))
}

/// Unchecked pairing on raw coordinate slices of equal length.
pub(crate) fn pairing(x: &[i64], y: &[i64]) -> i64 {
    x.chunks(2)
        .zip(y.chunks(2))
        .map(|(p, q)| p[0] * q[1] - p[1] * q[0])
        .sum()
}

/// Reduced word in a free group. Letter `k > 0` is generator `k - 1`,
/// `-k` is its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FreeWord {
    letters: Vec<i32>,
}

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord { letters: Vec::new() }
    }

    /// Builds a word and freely reduces it.
    pub fn new(letters: Vec<i32>) -> Self {
        assert!(letters.iter().all(|&l| l != 0), "letter 0 is not a generator");
        FreeWord { letters: free_reduce(&letters) }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord { letters: invert(&self.letters) }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.letters.clone();
        v.extend_from_slice(&other.letters);
        FreeWord::new(v)
    }

    /// Exponent sum of each of the first `n` generators.
    pub fn exponent_sums(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &l in &self.letters {
            let i = l.unsigned_abs() as usize - 1;
            if i < n {
                v[i] += l.signum() as i64;
            }
        }
        v
    }

    /// Parses tokens `x`, `~x`, `x^k`, `~x^k` and `[x,y]` over `alphabet`.
    pub fn parse(text: &str, alphabet: &[String]) -> Result<Self> {
        let lookup = |sym: &str| -> Result<i32> {
            alphabet
                .iter()
                .position(|g| g == sym)
                .map(|i| i as i32 + 1)
                .ok_or_else(|| Error::UnknownGenerator(sym.to_string()))
        };
        let letter = |tok: &str| -> Result<i32> {
            match tok.strip_prefix('~') {
                Some(rest) => Ok(-lookup(rest)?),
                None => lookup(tok),
            }
        };
        let mut out = Vec::new();
        let spaced = text.replace('[', " [").replace(']', "] ");
        for tok in spaced.split_whitespace() {
            if let Some(inner) = tok.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| Error::MalformedWord(tok.to_string()))?;
                let mut parts = inner.split(',');
                let (x, y) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(x), Some(y), None) => (letter(x.trim())?, letter(y.trim())?),
                    _ => return Err(Error::MalformedWord(tok.to_string())),
                };
                out.extend_from_slice(&[x, y, -x, -y]);
                continue;
            }
            let (base, exp) = match tok.split_once('^') {
                Some((b, e)) => (
                    b,
                    e.parse::<i64>()
                        .map_err(|_| Error::MalformedWord(tok.to_string()))?,
                ),
                None => (tok, 1),
            };
            let l = letter(base)?;
            let l = if exp < 0 { -l } else { l };
            for _ in 0..exp.unsigned_abs() {
                out.push(l);
            }
        }
        Ok(FreeWord::new(out))
    }

    /// Renders with `~` for inverses, e.g. `~b1 a2 b2`.
    pub fn render(&self, alphabet: &[String]) -> String {
        self.letters
            .iter()
            .map(|&l| {
                let sym = &alphabet[l.unsigned_abs() as usize - 1];
                if l < 0 {
                    format!("~{sym}")
                } else {
                    sym.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub(crate) fn invert(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|l| -l).collect()
}

/// Stack-based free reduction; idempotent.
pub(crate) fn free_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Exponent-sum vector of `w` in the surface's homology basis.
pub fn abelianize_word(w: &FreeWord, surface: &Surface) -> Result<HomologyClass> {
    let n = surface.dim();
    if let Some(&bad) = w.letters.iter().find(|l| l.unsigned_abs() as usize > n) {
        return Err(Error::UnknownGenerator(format!("generator #{}", bad.unsigned_abs())));
    }
    Ok(HomologyClass::new(w.exponent_sums(n)))
}

/// Simple closed curve with its homological and word-level shadows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub homology: HomologyClass,
    pub separating: bool,
    pub word: Option<FreeWord>,
    /// Set for curves parallel to a boundary component (1-based).
    pub boundary_index: Option<usize>,
    /// Genus of the smaller side, for separating curves.
    pub split_genus: Option<usize>,
}

impl Curve {
    pub fn nonseparating(name: &str, homology: HomologyClass) -> Self {
        Curve {
            name: name.to_string(),
            homology,
            separating: false,
            word: None,
            boundary_index: None,
            split_genus: None,
        }
    }

    pub fn separating(name: &str, genus: usize, split_genus: usize) -> Self {
        Curve {
            name: name.to_string(),
            homology: HomologyClass::zero(genus),
            separating: true,
            word: None,
            boundary_index: None,
            split_genus: Some(split_genus),
        }
    }

    pub fn boundary(name: &str, genus: usize, index: usize) -> Self {
        Curve {
            name: name.to_string(),
            homology: HomologyClass::zero(genus),
            separating: true,
            word: None,
            boundary_index: Some(index),
            split_genus: Some(0),
        }
    }

    pub fn with_word(mut self, word: FreeWord) -> Self {
        self.word = Some(word);
        self
    }

    /// Null-homotopic once the boundary is capped off.
    pub fn is_null_after_capping(&self) -> bool {
        self.boundary_index.is_some() || (self.homology.is_zero() && !self.separating)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveIssue {
    DimensionMismatch { expected: usize, found: usize },
    SeparatingWithHomology(HomologyClass),
    BoundaryNotSeparating,
    BoundaryIndexOutOfRange(usize),
    WordMismatch { word: HomologyClass, homology: HomologyClass },
    WordOutsideAlphabet,
}

impl fmt::Display for CurveIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveIssue::DimensionMismatch { expected, found } => {
                write!(f, "homology has {found} coordinates, surface needs {expected}")
            }
            CurveIssue::SeparatingWithHomology(h) => {
                write!(f, "separating curve has nonzero homology {h}")
            }
            CurveIssue::BoundaryNotSeparating => write!(f, "boundary-parallel curve not flagged separating"),
            CurveIssue::BoundaryIndexOutOfRange(i) => write!(f, "boundary index {i} out of range"),
            CurveIssue::WordMismatch { word, homology } => {
                write!(f, "word abelianizes to {word} but homology is {homology}")
            }
            CurveIssue::WordOutsideAlphabet => write!(f, "word uses letters outside the surface alphabet"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CurveReport {
    pub issues: Vec<CurveIssue>,
}

impl CurveReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn validate_curve(c: &Curve, surface: &Surface) -> CurveReport {
    let mut issues = Vec::new();
    if c.homology.dim() != surface.dim() {
        issues.push(CurveIssue::DimensionMismatch {
            expected: surface.dim(),
            found: c.homology.dim(),
        });
        return CurveReport { issues };
    }
    if c.separating && !c.homology.is_zero() {
        issues.push(CurveIssue::SeparatingWithHomology(c.homology.clone()));
    }
    if let Some(i) = c.boundary_index {
        if !c.separating {
            issues.push(CurveIssue::BoundaryNotSeparating);
        }
        if i == 0 || i > surface.boundary_count {
            issues.push(CurveIssue::BoundaryIndexOutOfRange(i));
        }
    }
    if let Some(w) = &c.word {
        match abelianize_word(w, surface) {
            Ok(h) if h != c.homology => issues.push(CurveIssue::WordMismatch {
                word: h,
                homology: c.homology.clone(),
            }),
            Ok(_) => {}
            Err(_) => issues.push(CurveIssue::WordOutsideAlphabet),
        }
    }
    CurveReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g3() -> Surface {
        Surface::closed(3)
    }

    #[test]
    fn basis_pairing() {
        let a1 = HomologyClass::a(1, 1);
        let b1 = HomologyClass::b(1, 1);
        assert_eq!(intersection(&a1, &b1).unwrap(), 1);
        assert_eq!(intersection(&b1, &a1).unwrap(), -1);
    }

    #[test]
    fn b0_meets_b1_once() {
        let b0 = HomologyClass::from_terms(3, &[("a1", 1), ("a3", 1)]).unwrap();
        assert_eq!(intersection(&b0, &HomologyClass::b(3, 1)).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = HomologyClass::zero(2);
        let y = HomologyClass::zero(3);
        assert_eq!(intersection(&x, &y), Err(Error::DimensionMismatch(4, 6)));
    }

    #[test]
    fn abelianize_examples() {
        let s = g3();
        let alpha = s.generators();
        let w = FreeWord::parse("a1 a3", &alpha).unwrap();
        assert_eq!(
            abelianize_word(&w, &s).unwrap(),
            HomologyClass::from_terms(3, &[("a1", 1), ("a3", 1)]).unwrap()
        );
        let w = FreeWord::parse("[a1,b1]", &alpha).unwrap();
        assert!(abelianize_word(&w, &s).unwrap().is_zero());
        let w = FreeWord::parse("~b1 a2 b2 ~a2 ~b3", &alpha).unwrap();
        assert_eq!(
            abelianize_word(&w, &s).unwrap(),
            HomologyClass::from_terms(3, &[("b1", -1), ("b2", 1), ("b3", -1)]).unwrap()
        );
    }

    #[test]
    fn unknown_generator_rejected() {
        let alpha = Surface::closed(2).generators();
        assert_eq!(
            FreeWord::parse("a1 a3", &alpha),
            Err(Error::UnknownGenerator("a3".into()))
        );
    }

    #[test]
    fn powers_and_render() {
        let alpha = g3().generators();
        let w = FreeWord::parse("a1 ~b1^3 b1^-2 ~a2^-1", &alpha).unwrap();
        assert_eq!(w.render(&alpha), "a1 ~b1 ~b1 ~b1 ~b1 ~b1 a2");
        assert_eq!(FreeWord::parse(&w.render(&alpha), &alpha).unwrap(), w);
    }

    #[test]
    fn validate_examples() {
        let s = g3();
        let alpha = s.generators();
        let mut c = Curve::separating("C", 3, 1);
        c.word = Some(FreeWord::parse("[a1,b1]", &alpha).unwrap());
        assert!(validate_curve(&c, &s).is_valid());

        let h = HomologyClass::from_terms(3, &[("a1", 1), ("a3", 1)]).unwrap();
        let good = Curve::nonseparating("B0", h).with_word(FreeWord::parse("a1 a3", &alpha).unwrap());
        assert!(validate_curve(&good, &s).is_valid());

        let bad = Curve::nonseparating("B0", HomologyClass::a(3, 1))
            .with_word(FreeWord::parse("a1 a3", &alpha).unwrap());
        let r = validate_curve(&bad, &s);
        assert!(matches!(r.issues.as_slice(), [CurveIssue::WordMismatch { .. }]));
    }

    #[test]
    fn display_class() {
        let h = HomologyClass::from_terms(2, &[("a1", 1), ("b1", -2), ("b2", 1)]).unwrap();
        assert_eq!(h.to_string(), "a1-2b1+b2");
        assert_eq!(HomologyClass::zero(2).to_string(), "0");
    }

    fn vec6() -> impl Strategy<Value = HomologyClass> {
        prop::collection::vec(-10i64..=10, 6).prop_map(HomologyClass::new)
    }

    fn word(n: i32) -> impl Strategy<Value = FreeWord> {
        prop::collection::vec((1..=n, any::<bool>()), 0..12)
            .prop_map(|v| FreeWord::new(v.into_iter().map(|(g, inv)| if inv { -g } else { g }).collect()))
    }

    proptest! {
        #[test]
        fn pairing_antisymmetric(x in vec6(), y in vec6()) {
            prop_assert_eq!(intersection(&x, &y).unwrap(), -intersection(&y, &x).unwrap());
            prop_assert_eq!(intersection(&x, &x).unwrap(), 0);
        }

        #[test]
        fn pairing_bilinear(x in vec6(), y in vec6(), z in vec6(), k in -10i64..=10) {
            let lhs = intersection(&(x.clone() + k * y.clone()), &z).unwrap();
            let rhs = intersection(&x, &z).unwrap() + k * intersection(&y, &z).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn abelianize_is_homomorphism(u in word(6), v in word(6)) {
            let s = g3();
            let lhs = abelianize_word(&u.concat(&v), &s).unwrap();
            let rhs = abelianize_word(&u, &s).unwrap() + abelianize_word(&v, &s).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn reduction_idempotent(v in prop::collection::vec(prop_oneof![1i32..=3, -3i32..=-1], 0..20)) {
            let once = free_reduce(&v);
            prop_assert_eq!(free_reduce(&once), once.clone());
            prop_assert!(once.windows(2).all(|p| p[0] != -p[1]));
        }
    }
}
