//! Euler characteristic, signature and the classification predicates of
//! the 4-manifold described by a factorization.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizations::Factorization;
use crate::groups::{h1_pipeline, AbelianInvariants};
use crate::surfaces::Curve;
use crate::symplectic::{meyer_sum, product, transvection, verify};

/// Local Meyer term of a separating vanishing cycle, per positive twist.
/// Fixed once against the capped genus-2 lift (σ = −4) and frozen.
pub const LAMBDA_SEP: i64 = -1;

pub const DEFAULT_OBSTRUCTION_BOUND: i64 = 50;

/// `(e_fibration, e_pencil)`.
pub fn euler(f: &Factorization, base_points: usize) -> Result<(i64, i64)> {
    if !f.is_positive() {
        return Err(Error::Precondition("Euler count needs a positive factorization".into()));
    }
    let e = 4 - 4 * f.surface().genus as i64 + f.len() as i64;
    Ok((e, e - base_points as i64))
}

/// Genus of the smaller side of a separating curve; genus-2 curves default to 1.
fn split_genus(c: &Curve, genus: usize) -> Result<usize> {
    match c.split_genus {
        Some(h) => Ok(h.min(genus - h.min(genus))),
        None if genus == 2 => Ok(1),
        None => Err(Error::Data(format!("separating curve {} has no split genus", c.name))),
    }
}

/// Signed tallies `(n, s_h)` of nonseparating and separating twists, plus
/// the signed count of twists along curves that bound a disk after capping.
pub fn tallies(f: &Factorization) -> Result<(i64, BTreeMap<usize, i64>, i64)> {
    let g = f.surface().genus;
    let mut n = 0;
    let mut s = BTreeMap::new();
    let mut null = 0;
    for t in &f.twists {
        let c = f.curve_of(t);
        if !c.separating {
            n += t.exponent;
            continue;
        }
        let h = if c.boundary_index.is_some() { 0 } else { split_genus(c, g)? };
        if h == 0 {
            null += t.exponent;
        } else {
            *s.entry(h).or_insert(0) += t.exponent;
        }
    }
    Ok((n, s, null))
}

/// `σ = −(g+1)/(2g+1)·n + Σ_h (4h(g−h)/(2g+1) − 1)·s_h`, with signed counts.
/// Twists along curves that bound a disk once capped contribute `−1` per
/// positive twist, the same local term as any separating curve.
pub fn signature_hyperelliptic(f: &Factorization) -> Result<i64> {
    if !f.model.hyperelliptic {
        return Err(Error::Precondition("factorization is not flagged hyperelliptic".into()));
    }
    let g = f.surface().genus as i64;
    let (n, s, null) = tallies(f)?;
    let mut sigma = Ratio::new(-(g + 1) * n, 2 * g + 1);
    for (&h, &count) in &s {
        let h = h as i64;
        sigma += (Ratio::new(4 * h * (g - h), 2 * g + 1) - 1) * count;
    }
    sigma += LAMBDA_SEP * null;
    if !sigma.is_integer() {
        return Err(Error::Data(format!("hyperelliptic signature {sigma} is not an integer")));
    }
    Ok(sigma.to_integer())
}

/// One piece of a signature decomposition.
#[derive(Debug, Clone)]
pub enum Summand {
    /// Computed by the hyperelliptic formula.
    Factorization { label: String, f: Box<Factorization> },
    /// Value from an external oracle.
    Stored { label: String, sigma: i64 },
}

/// A canceled pair of opposite twists along `curve`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanceledPair {
    pub curve: String,
    pub separating: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub summands: Vec<(String, i64)>,
    pub ledger: Vec<CanceledPair>,
    /// Net contribution of the ledger; `+1 − 1` per pair, always 0.
    pub ledger_net: i64,
    pub total: i64,
}

/// Novikov additivity over the summands; canceled pairs contribute `±1` each
/// and therefore net zero.
pub fn signature_decomposition(summands: &[Summand], ledger: &[CanceledPair]) -> Result<Decomposition> {
    let mut out = Vec::new();
    for s in summands {
        match s {
            Summand::Factorization { label, f } => {
                out.push((label.clone(), signature_hyperelliptic(f)?));
            }
            Summand::Stored { label, sigma } => out.push((label.clone(), *sigma)),
        }
    }
    // t_c and t_c^{-1} contribute λ and −λ (or 0 and 0 when c is nonseparating)
    let ledger_net = 0;
    let total = out.iter().map(|(_, s)| s).sum::<i64>() + ledger_net;
    Ok(Decomposition { summands: out, ledger: ledger.to_vec(), ledger_net, total })
}

/// `σ = −Σ_k τ(T_1⋯T_k, T_{k+1}) + λ_sep·(signed number of separating twists)`.
pub fn signature_meyer(f: &Factorization) -> Result<i64> {
    if !product(f).is_identity() {
        return Err(Error::Precondition(
            "Meyer signature needs a factorization whose capped product is the identity".into(),
        ));
    }
    let f = f.normalize_elementary();
    let mats: Vec<_> = f
        .twists
        .iter()
        .map(|t| transvection(&f.effective_class(t), t.exponent))
        .collect();
    let local: i64 = f
        .twists
        .iter()
        .filter(|t| f.curve_of(t).separating)
        .map(|t| LAMBDA_SEP * t.exponent)
        .sum();
    Ok(-meyer_sum(&mats) + local)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obstruction {
    NoSolution,
    /// Fiber class `aH − Σ c_i E_i`.
    Witness { a: i64, c: [i64; 9] },
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstruction::NoSolution => write!(f, "NoSolution"),
            Obstruction::Witness { a, c } => write!(f, "Witness a={a} c={c:?}"),
        }
    }
}

/// Searches `CP² # 9 CP̄²` for a fiber class `F = aH − Σ c_i E_i` with
/// `F² = m`, `a ≥ 0`, adjunction `2g−2 = m − 3a + Σ c_i` and all
/// coordinates bounded by `bound` in absolute value.
pub fn rational_obstruction(g: usize, m: usize, bound: i64) -> Obstruction {
    let (g, m) = (g as i64, m as i64);
    for a in 0..=bound {
        let sum = 2 * g - 2 - m + 3 * a;
        let squares = a * a - m;
        let mut c = [0i64; 9];
        if fill(&mut c, 0, sum, squares, bound, bound) {
            return Obstruction::Witness { a, c };
        }
    }
    Obstruction::NoSolution
}

/// Non-increasing `c[k..]` in `[-bound, max]` with the given sum and sum of squares.
fn fill(c: &mut [i64; 9], k: usize, sum: i64, squares: i64, max: i64, bound: i64) -> bool {
    let left = (9 - k) as i64;
    if left == 0 {
        return sum == 0 && squares == 0;
    }
    if squares < 0 || sum * sum > left * squares || (sum - squares).rem_euclid(2) != 0 {
        return false;
    }
    if sum > left * max || sum < -left * bound {
        return false;
    }
    let top = max.min(isqrt(squares));
    for v in (-bound..=top).rev() {
        // the rest cannot exceed v each
        if sum - v > (left - 1) * v {
            break;
        }
        c[k] = v;
        if fill(c, k + 1, sum - v, squares - v * v, v, bound) {
            return true;
        }
    }
    false
}

fn isqrt(x: i64) -> i64 {
    if x <= 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as i64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exclusion {
    Excluded,
    NotExcluded { a: i64, b: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuledVerdict {
    /// `S² × T²`, fiber class `aS + bT`: `2ab = F²`, `2g−2 = F² − 2a`.
    pub product: Exclusion,
    /// Twisted bundle: `b(2a+b) = F²`, `2g−2 = F² − 2a − b`.
    pub twisted: Exclusion,
}

impl RuledVerdict {
    pub fn both_excluded(&self) -> bool {
        self.product == Exclusion::Excluded && self.twisted == Exclusion::Excluded
    }
}

/// Whether a genus-`g` fiber of self-intersection `self_int` fits in a ruled
/// surface over the torus.
pub fn ruled_exclusion(g: usize, self_int: i64) -> RuledVerdict {
    let g = g as i64;
    let product = {
        let twice_a = self_int - 2 * g + 2;
        if twice_a % 2 != 0 {
            Exclusion::Excluded
        } else {
            let a = twice_a / 2;
            if a == 0 {
                if self_int == 0 {
                    Exclusion::NotExcluded { a: 0, b: 1 }
                } else {
                    Exclusion::Excluded
                }
            } else if self_int % (2 * a) == 0 {
                Exclusion::NotExcluded { a, b: self_int / (2 * a) }
            } else {
                Exclusion::Excluded
            }
        }
    };
    let twisted = {
        let t = self_int - 2 * g + 2; // 2a + b
        if t == 0 {
            if self_int == 0 {
                Exclusion::NotExcluded { a: 0, b: 0 }
            } else {
                Exclusion::Excluded
            }
        } else if self_int % t == 0 && (t - self_int / t) % 2 == 0 {
            let b = self_int / t;
            Exclusion::NotExcluded { a: (t - b) / 2, b }
        } else {
            Exclusion::Excluded
        }
    };
    RuledVerdict { product, twisted }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScyVerdict {
    pub pass: bool,
    pub base_points: usize,
    /// `(e, σ, c₁²)` after blowing down the base points.
    pub blown_down: (i64, i64, i64),
    pub b_plus: i64,
    pub ruled: RuledVerdict,
    pub reason: String,
}

/// A pencil with `c₁²(fibration) = 2−2g` and `2g−2` base points blows down
/// to a minimal symplectic Calabi–Yau surface unless it is ruled.
pub fn scy_criterion(r: &InvariantReport) -> ScyVerdict {
    let g = r.genus as i64;
    let m = r.base_points as i64;
    let blown_down = (r.e_fib - m, r.sigma + m, r.c1sq_fib + m);
    let b2 = blown_down.0 - 2 + 2 * r.b1;
    let b_plus = (b2 + blown_down.1) / 2;
    let ruled = ruled_exclusion(r.genus, 2 * g - 2);
    let mut reason = Vec::new();
    if r.c1sq_fib != 2 - 2 * g {
        reason.push(format!("c1² = {} ≠ 2−2g = {}", r.c1sq_fib, 2 - 2 * g));
    }
    if m != 2 * g - 2 {
        reason.push(format!("{m} base points ≠ 2g−2 = {}", 2 * g - 2));
    }
    if b_plus == 1 && !ruled.both_excluded() {
        reason.push("b⁺ = 1 and a ruled surface over T² is not excluded".into());
    }
    let pass = reason.is_empty();
    ScyVerdict {
        pass,
        base_points: r.base_points,
        blown_down,
        b_plus,
        ruled,
        reason: if pass { "minimal symplectic Calabi-Yau after blow-down".into() } else { reason.join("; ") },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kodaira {
    MinusInfinity,
    Zero,
    One,
    Two,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::MinusInfinity => write!(f, "-∞"),
            Kodaira::Zero => write!(f, "0"),
            Kodaira::One => write!(f, "1"),
            Kodaira::Two => write!(f, "2"),
        }
    }
}

/// Symplectic Kodaira dimension from `K²` and the sign of `K·[ω]` on a minimal model.
pub fn kodaira_classify(ksq: i64, k_dot_omega_sign: i8) -> Result<Kodaira> {
    match (ksq.signum(), k_dot_omega_sign.signum()) {
        (_, -1) | (-1, _) => Ok(Kodaira::MinusInfinity),
        (0, 0) => Ok(Kodaira::Zero),
        (0, 1) => Ok(Kodaira::One),
        (1, 1) => Ok(Kodaira::Two),
        (k, s) => Err(Error::Precondition(format!(
            "no minimal model has K² sign {k} with K·ω sign {s}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicates {
    pub positive: bool,
    pub sp_verify: String,
    pub chi_h_integral: bool,
    pub b1_bound: bool,
    pub scy: String,
    pub meyer_lambda_sep: i64,
    pub rational_obstruction: String,
}

/// Flat report; field names are the serialized keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub genus: usize,
    pub base_points: usize,
    pub length: usize,
    pub n: i64,
    pub s: BTreeMap<String, i64>,
    pub e_fib: i64,
    pub e_pencil: i64,
    pub sigma: i64,
    pub c1sq_fib: i64,
    pub c1sq_pencil: i64,
    pub chi_h: Option<i64>,
    pub b1: i64,
    pub h1_rank: usize,
    pub h1_torsion: Vec<i64>,
    pub predicates: Predicates,
}

impl InvariantReport {
    /// Computes every field; `sigma` comes from the Meyer route.
    pub fn compute(f: &Factorization) -> Result<Self> {
        let m = f.base_points();
        let (e_fib, e_pencil) = euler(f, m)?;
        let sigma = signature_meyer(f)?;
        let h1 = h1_pipeline(f)?;
        Self::assemble(f, sigma, &h1, e_fib, e_pencil)
    }

    fn assemble(
        f: &Factorization,
        sigma: i64,
        h1: &AbelianInvariants,
        e_fib: i64,
        e_pencil: i64,
    ) -> Result<Self> {
        let g = f.surface().genus;
        let m = f.base_points();
        let (n, s, _) = tallies(f)?;
        let c1sq_fib = 2 * e_fib + 3 * sigma;
        let chi_num = e_fib + sigma;
        let b1 = h1.rank as i64;
        let obstruction = rational_obstruction(g, m, DEFAULT_OBSTRUCTION_BOUND);
        let mut r = InvariantReport {
            genus: g,
            base_points: m,
            length: f.len(),
            n,
            s: s.into_iter().map(|(h, c)| (h.to_string(), c)).collect(),
            e_fib,
            e_pencil,
            sigma,
            c1sq_fib,
            c1sq_pencil: c1sq_fib + m as i64,
            chi_h: (chi_num % 4 == 0).then_some(chi_num / 4),
            b1,
            h1_rank: h1.rank,
            h1_torsion: h1.torsion.clone(),
            predicates: Predicates {
                positive: f.is_positive(),
                sp_verify: if verify(f).pass { "PASS" } else { "FAIL" }.into(),
                chi_h_integral: chi_num % 4 == 0,
                b1_bound: g == 0 || b1 < 2 * g as i64,
                scy: String::new(),
                meyer_lambda_sep: LAMBDA_SEP,
                rational_obstruction: format!("{obstruction} (bound {DEFAULT_OBSTRUCTION_BOUND})"),
            },
        };
        r.predicates.scy = if g >= 2 && scy_criterion(&r).pass { "PASS" } else { "FAIL" }.into();
        r.check_identities()?;
        Ok(r)
    }

    pub fn check_identities(&self) -> Result<()> {
        let ok = self.e_pencil == self.e_fib - self.base_points as i64
            && self.c1sq_fib == 2 * self.e_fib + 3 * self.sigma
            && self.c1sq_pencil == self.c1sq_fib + self.base_points as i64
            && self.e_fib == 4 - 4 * self.genus as i64 + self.length as i64;
        if !ok {
            return Err(Error::Data("report violates the Euler/c1² identities".into()));
        }
        Ok(())
    }

    pub fn h1(&self) -> AbelianInvariants {
        AbelianInvariants { rank: self.h1_rank, torsion: self.h1_torsion.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "genus {}  base points {}  length {}", self.genus, self.base_points, self.length)?;
        writeln!(f, "n = {}  s = {:?}", self.n, self.s)?;
        writeln!(f, "e  fibration {}  pencil {}", self.e_fib, self.e_pencil)?;
        writeln!(f, "σ  fibration {}  pencil {}", self.sigma, self.sigma + self.base_points as i64)?;
        writeln!(f, "c1² fibration {}  pencil {}", self.c1sq_fib, self.c1sq_pencil)?;
        match self.chi_h {
            Some(x) => writeln!(f, "χ_h {x}")?,
            None => writeln!(f, "χ_h not integral")?,
        }
        writeln!(f, "H1 {}  b1 {}", self.h1(), self.b1)?;
        let p = &self.predicates;
        writeln!(f, "positive {}  Sp {}  b1≤2g−1 {}", p.positive, p.sp_verify, p.b1_bound)?;
        writeln!(f, "SCY {}  λ_sep {}", p.scy, p.meyer_lambda_sep)?;
        write!(f, "rational obstruction {}", p.rational_obstruction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn obstruction_small_cases() {
        assert_eq!(rational_obstruction(3, 1, 50), Obstruction::NoSolution);
        assert_eq!(rational_obstruction(2, 0, 50), Obstruction::NoSolution);
        // m = 2g−2 is the boundary case of the Cauchy–Schwarz chain and has no solution
        assert_eq!(rational_obstruction(3, 4, 10), Obstruction::NoSolution);
    }

    #[test]
    fn obstruction_witness_checks_out() {
        let Obstruction::Witness { a, c } = rational_obstruction(3, 5, 10) else {
            panic!("expected a witness for m = 5");
        };
        let sum: i64 = c.iter().sum();
        let sq: i64 = c.iter().map(|x| x * x).sum();
        assert_eq!(a * a, 5 + sq);
        assert_eq!(4, 5 - 3 * a + sum);
    }

    #[test]
    fn ruled_examples() {
        let v = ruled_exclusion(3, 4);
        assert_eq!(v.product, Exclusion::Excluded);
        assert_eq!(v.twisted, Exclusion::Excluded);
        assert!(matches!(ruled_exclusion(1, 0).product, Exclusion::NotExcluded { a: 0, .. }));
    }

    #[test]
    fn kodaira_table() {
        assert_eq!(kodaira_classify(0, 0).unwrap(), Kodaira::Zero);
        assert_eq!(kodaira_classify(-3, 1).unwrap(), Kodaira::MinusInfinity);
        assert_eq!(kodaira_classify(5, 1).unwrap(), Kodaira::Two);
        assert_eq!(kodaira_classify(0, 1).unwrap(), Kodaira::One);
        assert_eq!(kodaira_classify(2, -1).unwrap(), Kodaira::MinusInfinity);
        assert!(kodaira_classify(3, 0).is_err());
    }

    /// Brute force over the full box, no pruning.
    fn brute(g: i64, m: i64, bound: i64) -> bool {
        fn rec(k: usize, sum: i64, sq: i64, bound: i64) -> bool {
            if k == 9 {
                return sum == 0 && sq == 0;
            }
            if sq < 0 {
                return false;
            }
            (-bound..=bound).any(|v| rec(k + 1, sum - v, sq - v * v, bound))
        }
        (0..=bound).any(|a| rec(0, 2 * g - 2 - m + 3 * a, a * a - m, bound))
    }

    #[test]
    fn search_matches_brute_force_on_tiny_boxes() {
        for (g, m) in [(2, 2), (2, 3), (3, 5), (3, 6), (2, 4)] {
            let fast = rational_obstruction(g as usize, m as usize, 2) != Obstruction::NoSolution;
            assert_eq!(fast, brute(g, m, 2), "g={g} m={m}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn obstruction_monotone(g in 2usize..5, m in 0usize..10, b in 1i64..12) {
            if rational_obstruction(g, m, b) == Obstruction::NoSolution {
                for smaller in 0..b {
                    prop_assert_eq!(rational_obstruction(g, m, smaller), Obstruction::NoSolution);
                }
            }
        }

        #[test]
        fn witnesses_satisfy_equations(g in 2usize..5, m in 0usize..12) {
            if let Obstruction::Witness { a, c } = rational_obstruction(g, m, 12) {
                let sum: i64 = c.iter().sum();
                let sq: i64 = c.iter().map(|x| x * x).sum();
                prop_assert_eq!(a * a, m as i64 + sq);
                prop_assert_eq!(2 * g as i64 - 2, m as i64 - 3 * a + sum);
            }
        }
    }
}
