//! Finitely presented groups read off vanishing-cycle words, their
//! abelianizations, and a bounded prover that certifies commutation
//! relations with replayable traces.
//!
//! A certificate for a word `w` is a list of terms `(P, i, s)` such that
//! `w` equals `Π P r_i^s P⁻¹` in the free group. The trace of a proof
//! appends the inverse terms to the goal and freely reduces to the empty
//! word, so a replay only needs the relator list.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizations::Factorization;
use crate::surfaces::{free_reduce, invert, FreeWord, Surface};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FPGroup {
    pub generators: Vec<String>,
    pub relators: Vec<FreeWord>,
    /// Where each relator came from: `surface` or a curve name.
    pub labels: Vec<String>,
    /// Set when some relators of the full group are known to be missing.
    pub partial: bool,
}

impl FPGroup {
    pub fn new(generators: Vec<String>, relators: Vec<FreeWord>) -> Self {
        let labels = (0..relators.len()).map(|i| format!("r{i}")).collect();
        FPGroup { generators, relators, labels, partial: false }
    }

    /// `π₁` of the closed surface: one relator `Π [a_j, b_j]`.
    pub fn surface_group(genus: usize) -> Self {
        FPGroup {
            generators: Surface::closed(genus).generators(),
            relators: vec![surface_relator(genus)],
            labels: vec!["surface".into()],
            partial: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn render(&self, i: usize) -> String {
        self.relators[i].render(&self.generators)
    }
}

impl fmt::Display for FPGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "⟨ {} | {} relators{} ⟩",
            self.generators.join(", "),
            self.relators.len(),
            if self.partial { ", partial" } else { "" }
        )?;
        for (i, (r, l)) in self.relators.iter().zip(&self.labels).enumerate() {
            writeln!(f, "  ({i}) {l}: {}", r.render(&self.generators))?;
        }
        Ok(())
    }
}

fn surface_relator(genus: usize) -> FreeWord {
    let mut w = Vec::with_capacity(4 * genus);
    for j in 0..genus as i32 {
        let (a, b) = (2 * j + 1, 2 * j + 2);
        w.extend_from_slice(&[a, b, -a, -b]);
    }
    FreeWord::new(w)
}

/// Finitely generated abelian group `ℤ^rank ⊕ ⊕ ℤ/d_i` with `d_1 | d_2 | …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub rank: usize,
    pub torsion: Vec<i64>,
}

impl AbelianInvariants {
    pub fn trivial() -> Self {
        AbelianInvariants { rank: 0, torsion: Vec::new() }
    }

    /// Normal form of `ℤ^rank ⊕ ℤ/c_1 ⊕ …` for arbitrary cyclic orders;
    /// `c = 0` adds a free summand and `c = ±1` is dropped.
    pub fn from_cyclic(rank: usize, orders: &[i64]) -> Self {
        let n = orders.len();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, &c) in orders.iter().enumerate() {
            rows[i][i] = c;
        }
        let mut a = from_relation_rows(&rows, n);
        a.rank += rank;
        a
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        if self.rank > 0 {
            parts.push(format!("ℤ{}", superscript(self.rank)));
        }
        parts.extend(self.torsion.iter().map(|d| format!("ℤ/{d}")));
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

fn superscript(n: usize) -> String {
    if n == 1 {
        return String::new();
    }
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// `q` with `|a − q·p| ≤ |p|/2`.
fn nearest_quotient(a: &BigInt, p: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(p);
    if (&r + &r).abs() > p.abs() {
        q + 1
    } else {
        q
    }
}

/// Nonzero diagonal of the Smith normal form, each entry positive and
/// dividing the next.
pub fn smith_diagonal(rows: &[Vec<i64>], ncols: usize) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged relation matrix");
            r.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    let nrows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // pivot: smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if !a[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            // move the smallest entry of row t and column t onto the diagonal
            let mut best = (t, t);
            for i in t + 1..nrows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t + 1..ncols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..nrows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = nearest_quotient(&a[i][t], &p);
                for j in t..ncols {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = nearest_quotient(&a[t][j], &p);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..nrows)
                .flat_map(|i| (t + 1..ncols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_multiple_of(&p));
            match bad {
                Some((i, _)) => {
                    for j in t..ncols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Invariants of `ℤ^ncols / ⟨rows⟩`.
pub fn from_relation_rows(rows: &[Vec<i64>], ncols: usize) -> AbelianInvariants {
    let diag = smith_diagonal(rows, ncols);
    let torsion = diag
        .iter()
        .filter(|d| !d.is_one())
        .map(|d| d.to_i64().expect("torsion order fits in i64"))
        .collect();
    AbelianInvariants { rank: ncols - diag.len(), torsion }
}

pub fn abelianization(g: &FPGroup) -> AbelianInvariants {
    let n = g.rank();
    let rows: Vec<Vec<i64>> = g.relators.iter().map(|r| r.exponent_sums(n)).collect();
    from_relation_rows(&rows, n)
}

/// Relators from the surface relation and every curve word that is valid
/// for its twist. A twist conjugated by `φ` keeps its word only when `φ`
/// provably fixes the curve. Boundary-parallel twists contribute nothing
/// once the base points are filled in.
pub fn presentation(f: &Factorization, partial: bool) -> Result<FPGroup> {
    let g = f.surface().genus;
    let mut grp = FPGroup::surface_group(g);
    let mut missing = Vec::new();
    let mut seen = BTreeSet::new();
    for t in &f.twists {
        let c = f.curve_of(t);
        if c.boundary_index.is_some() {
            continue;
        }
        let usable = match t.conj {
            None => true,
            Some(k) => f.model.fixes(&f.conjugations[k], &t.curve),
        };
        match (&c.word, usable) {
            (Some(w), true) => {
                if seen.insert(t.curve.clone()) {
                    grp.relators.push(w.clone());
                    grp.labels.push(t.curve.clone());
                }
            }
            _ => missing.push(t.curve.clone()),
        }
    }
    let m = f.base_points();
    if !partial {
        if m == 0 {
            return Err(Error::Precondition(
                "a complete presentation needs a base point section (m > 0)".into(),
            ));
        }
        if !missing.is_empty() {
            return Err(Error::Precondition(format!(
                "no usable word for {}",
                missing.join(", ")
            )));
        }
    }
    grp.partial = m == 0 || !missing.is_empty();
    Ok(grp)
}

/// `H_1` of the total space: the capped fiber's homology modulo the classes
/// of all vanishing cycles, conjugated ones included.
pub fn h1_pipeline(f: &Factorization) -> Result<AbelianInvariants> {
    let n = f.surface().dim();
    let rows: Vec<Vec<i64>> = f
        .effective_twists()
        .into_iter()
        .map(|(c, _)| c.coeffs)
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(n, rows[0].len()));
    }
    Ok(from_relation_rows(&rows, n))
}

// ---------------------------------------------------------------------------
// prover

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_len: usize,
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_len: 64, max_nodes: 1_000_000 }
    }
}

pub const BUDGET_ENV: &str = "LEFSCHETZ_PROVER_BUDGET";

impl Budget {
    /// Default budget, overridden by `LEFSCHETZ_PROVER_BUDGET=len,nodes`.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(s) => s.parse(),
            Err(_) => Ok(Budget::default()),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Data(format!("budget must look like `64,1000000`, got `{s}`"));
        let (l, n) = s.split_once(',').ok_or_else(bad)?;
        Ok(Budget {
            max_len: l.trim().parse().map_err(|_| bad())?,
            max_nodes: n.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// One conjugated relator `P r_rel^sign P⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Term {
    conj: Vec<i32>,
    rel: usize,
    sign: i8,
}

impl Term {
    fn inverse(&self) -> Term {
        Term { conj: self.conj.clone(), rel: self.rel, sign: -self.sign }
    }

    fn conjugated(&self, p: &[i32]) -> Term {
        let mut c = p.to_vec();
        c.extend_from_slice(&self.conj);
        Term { conj: free_reduce(&c), rel: self.rel, sign: self.sign }
    }

    fn expand(&self, g: &FPGroup) -> Vec<i32> {
        let r = g.relators[self.rel].letters();
        let mut w = self.conj.clone();
        if self.sign > 0 {
            w.extend_from_slice(r);
        } else {
            w.extend(invert(r));
        }
        w.extend(invert(&self.conj));
        w
    }
}

/// A word in the normal closure together with its certificate.
#[derive(Debug, Clone)]
struct Derived {
    word: Vec<i32>,
    cert: Vec<Term>,
}

impl Derived {
    fn base(g: &FPGroup, i: usize) -> Derived {
        Derived {
            word: g.relators[i].letters().to_vec(),
            cert: vec![Term { conj: Vec::new(), rel: i, sign: 1 }],
        }
    }

    fn inverse(&self) -> Derived {
        Derived {
            word: invert(&self.word),
            cert: self.cert.iter().rev().map(Term::inverse).collect(),
        }
    }

    fn conj(&self, p: &[i32]) -> Derived {
        let mut w = p.to_vec();
        w.extend_from_slice(&self.word);
        w.extend(invert(p));
        Derived {
            word: free_reduce(&w),
            cert: self.cert.iter().map(|t| t.conjugated(p)).collect(),
        }
    }

    fn mul(&self, other: &Derived) -> Derived {
        let mut w = self.word.clone();
        w.extend_from_slice(&other.word);
        let mut cert = self.cert.clone();
        cert.extend(other.cert.iter().cloned());
        Derived { word: free_reduce(&w), cert: compress(cert) }
    }

    /// Cyclic shift by `k` letters, as a conjugation.
    fn rotate(&self, k: usize) -> Derived {
        let u = invert(&self.word[..k]);
        self.conj(&u)
    }

    /// Strips `x … x⁻¹` from the ends.
    fn cyclic_reduce(&self) -> Derived {
        let mut d = self.clone();
        while d.word.len() >= 2 && d.word[0] == -d.word[d.word.len() - 1] {
            d = d.conj(&[-d.word[0]]);
        }
        d
    }

    #[cfg(test)]
    fn check(&self, g: &FPGroup) -> bool {
        let w: Vec<i32> = self.cert.iter().flat_map(|t| t.expand(g)).collect();
        free_reduce(&w) == self.word
    }
}

/// Drops adjacent mutually inverse terms.
fn compress(cert: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(cert.len());
    for t in cert {
        if out
            .last()
            .is_some_and(|l| l.rel == t.rel && l.sign == -t.sign && l.conj == t.conj)
        {
            out.pop();
        } else {
            out.push(t);
        }
    }
    out
}

fn gen(l: i32) -> usize {
    l.unsigned_abs() as usize - 1
}

fn pair(x: usize, y: usize) -> (usize, usize) {
    (x.min(y), x.max(y))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// Insert `P r^sign P⁻¹` before position `pos`.
    Insert { pos: usize, rel: usize, sign: i8, conj: Vec<i32> },
    FreeReduce,
    /// Cyclic permutation moving the first `k` letters to the end.
    Rotate(usize),
}

/// Replayable proof that `[x, y]` is trivial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub x: usize,
    pub y: usize,
    pub steps: Vec<Step>,
}

impl Trace {
    fn from_cert(g: &FPGroup, x: usize, y: usize, cert: &[Term]) -> Trace {
        // goal · (Π terms)⁻¹ freely reduces to the empty word
        let (xl, yl) = (x as i32 + 1, y as i32 + 1);
        let mut w = vec![xl, yl, -xl, -yl];
        let mut steps = Vec::with_capacity(2 * cert.len());
        for t in cert.iter().rev() {
            let t = t.inverse();
            steps.push(Step::Insert { pos: w.len(), rel: t.rel, sign: t.sign, conj: t.conj.clone() });
            w.extend(t.expand(g));
            w = free_reduce(&w);
            steps.push(Step::FreeReduce);
        }
        Trace { x, y, steps }
    }

    /// Line format: `goal x y`, `ins <pos> <rel> <sign> <conj>`, `free`, `rot <k>`.
    pub fn to_lines(&self, g: &FPGroup) -> String {
        let mut s = format!("goal {} {}\n", g.generators[self.x], g.generators[self.y]);
        for st in &self.steps {
            match st {
                Step::Insert { pos, rel, sign, conj } => {
                    let c = if conj.is_empty() {
                        "1".to_string()
                    } else {
                        conj.iter()
                            .map(|&l| {
                                let sym = &g.generators[gen(l)];
                                if l < 0 {
                                    format!("~{sym}")
                                } else {
                                    sym.clone()
                                }
                            })
                            .collect::<Vec<_>>()
                            .join(".")
                    };
                    s += &format!("ins {pos} {rel} {sign} {c}\n");
                }
                Step::FreeReduce => s += "free\n",
                Step::Rotate(k) => s += &format!("rot {k}\n"),
            }
        }
        s
    }

    pub fn from_lines(text: &str, g: &FPGroup) -> Result<Trace> {
        let bad = |l: &str| Error::Data(format!("bad trace line `{l}`"));
        let sym = |s: &str| -> Result<i32> {
            let (neg, name) = match s.strip_prefix('~') {
                Some(r) => (true, r),
                None => (false, s),
            };
            let i = g
                .generators
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))? as i32
                + 1;
            Ok(if neg { -i } else { i })
        };
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let head = lines.next().ok_or_else(|| bad(""))?;
        let hs: Vec<&str> = head.split_whitespace().collect();
        if hs.len() != 3 || hs[0] != "goal" {
            return Err(bad(head));
        }
        let x = gen(sym(hs[1])?);
        let y = gen(sym(hs[2])?);
        let mut steps = Vec::new();
        for l in lines {
            let p: Vec<&str> = l.split_whitespace().collect();
            match p.as_slice() {
                ["free"] => steps.push(Step::FreeReduce),
                ["rot", k] => steps.push(Step::Rotate(k.parse().map_err(|_| bad(l))?)),
                ["ins", pos, rel, sign, conj] => {
                    let conj = if *conj == "1" {
                        Vec::new()
                    } else {
                        conj.split('.').map(sym).collect::<Result<Vec<_>>>()?
                    };
                    steps.push(Step::Insert {
                        pos: pos.parse().map_err(|_| bad(l))?,
                        rel: rel.parse().map_err(|_| bad(l))?,
                        sign: sign.parse().map_err(|_| bad(l))?,
                        conj,
                    });
                }
                _ => return Err(bad(l)),
            }
        }
        Ok(Trace { x, y, steps })
    }
}

/// Re-executes a trace from `[x, y]`; true iff it ends at the empty word.
pub fn replay(g: &FPGroup, trace: &Trace) -> bool {
    let (x, y) = (trace.x as i32 + 1, trace.y as i32 + 1);
    let mut w = vec![x, y, -x, -y];
    for st in &trace.steps {
        match st {
            Step::Insert { pos, rel, sign, conj } => {
                if *rel >= g.relators.len() || !(*sign == 1 || *sign == -1) {
                    return false;
                }
                let p = *pos;
                if p > w.len() {
                    return false;
                }
                let t = Term { conj: conj.clone(), rel: *rel, sign: *sign };
                let ins = t.expand(g);
                w.splice(p..p, ins);
            }
            Step::FreeReduce => w = free_reduce(&w),
            Step::Rotate(k) => {
                if *k > w.len() {
                    return false;
                }
                w.rotate_left(*k);
            }
        }
    }
    free_reduce(&w).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofStatus {
    Proven,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofVerdict {
    pub status: ProofStatus,
    /// One trace per generator pair, in lexicographic pair order, when proven.
    pub traces: Vec<Trace>,
    /// Pairs the search could not settle.
    pub open: Vec<(usize, usize)>,
}

/// Working state of the elimination prover.
struct Prover<'a> {
    g: &'a FPGroup,
    budget: Budget,
    rels: Vec<Derived>,
    /// `(generator, X)` with `X.word = g · R`, so `g = R⁻¹`.
    elims: Vec<(usize, Derived)>,
    comm: HashMap<(usize, usize), Derived>,
}

impl<'a> Prover<'a> {
    fn new(g: &'a FPGroup, budget: Budget) -> Self {
        let rels = (0..g.relators.len())
            .map(|i| Derived::base(g, i).cyclic_reduce())
            .filter(|d| !d.word.is_empty())
            .collect();
        Prover { g, budget, rels, elims: Vec::new(), comm: HashMap::new() }
    }

    fn eliminated(&self, x: usize) -> bool {
        self.elims.iter().any(|(g, _)| *g == x)
    }

    fn commute(&self, x: usize, y: usize) -> bool {
        x == y || self.comm.contains_key(&pair(x, y))
    }

    /// Relation with word exactly `a b a⁻¹ b⁻¹`.
    fn commutator(&self, a: i32, b: i32) -> Option<Derived> {
        let k = self.comm.get(&pair(gen(a), gen(b)))?;
        let target = [a, b, -a, -b];
        for d in [k.clone(), k.inverse()] {
            for r in 0..4 {
                let e = d.rotate(r);
                if e.word == target {
                    return Some(e);
                }
            }
        }
        None
    }

    /// `Y` with `Y · (P u v Q) = P v u Q` for `u = w[i]`, `v = w[i+1]`.
    fn swap_at(&self, w: &[i32], i: usize) -> Option<Derived> {
        let (u, v) = (w[i], w[i + 1]);
        let k = self.commutator(v, u)?;
        Some(k.conj(&w[..i]))
    }

    /// Substitutes eliminated generator `x` (via `X.word = x R`) into `d`.
    fn substitute(&self, d: &Derived, x: usize, xd: &Derived) -> Derived {
        let mut d = d.clone();
        let xl = x as i32 + 1;
        while let Some(i) = d.word.iter().position(|&l| gen(l) == x) {
            let p = &d.word[..i];
            let y = if d.word[i] == xl {
                xd.inverse().conj(p)
            } else {
                let mut q = p.to_vec();
                q.push(-xl);
                xd.conj(&q)
            };
            d = y.mul(&d);
        }
        d
    }

    fn eliminate_step(&mut self) -> bool {
        let mut order: Vec<usize> = (0..self.rels.len()).collect();
        order.sort_by_key(|&i| self.rels[i].word.len());
        for ri in order {
            let w = &self.rels[ri].word;
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for &l in w {
                *counts.entry(gen(l)).or_default() += 1;
            }
            let cand = (0..self.g.rank())
                .find(|&x| counts.get(&x) == Some(&1) && !self.eliminated(x));
            let Some(x) = cand else { continue };
            let mut d = self.rels.remove(ri);
            let i = d.word.iter().position(|&l| gen(l) == x).unwrap();
            if d.word[i] < 0 {
                d = d.inverse();
            }
            let i = d.word.iter().position(|&l| gen(l) == x).unwrap();
            let xd = d.rotate(i);
            let max = self.budget.max_len;
            self.rels = self
                .rels
                .iter()
                .map(|r| self.substitute(r, x, &xd).cyclic_reduce())
                .filter(|r| !r.word.is_empty() && r.word.len() <= max)
                .collect();
            self.elims.push((x, xd));
            return true;
        }
        false
    }

    /// Cancels `x … x⁻¹` pairs whose middle commutes with `x`, cyclically.
    fn normalize(&self, d: &Derived) -> Derived {
        let mut d = d.cyclic_reduce();
        'outer: loop {
            let n = d.word.len();
            for i in 0..n {
                for j in i + 1..n {
                    if d.word[j] != -d.word[i] {
                        continue;
                    }
                    let x = gen(d.word[i]);
                    if (i + 1..j).all(|k| self.commute(gen(d.word[k]), x)) {
                        if let Some(e) = self.bubble(&d, i, j) {
                            d = e.cyclic_reduce();
                            continue 'outer;
                        }
                    }
                    let wrap = (j + 1..n).chain(0..i).all(|k| self.commute(gen(d.word[k]), x));
                    if wrap {
                        // rotate so the pair reads x⁻¹ … x linearly
                        let r = d.rotate(j);
                        let len = r.word.len();
                        if let Some(e) = self.bubble(&r, 0, len - (j - i)) {
                            d = e.cyclic_reduce();
                            continue 'outer;
                        }
                    }
                }
            }
            return d;
        }
    }

    /// Moves the letter at `i` right until it meets its inverse at `j`.
    fn bubble(&self, d: &Derived, i: usize, j: usize) -> Option<Derived> {
        let mut d = d.clone();
        for k in i..j - 1 {
            let y = self.swap_at(&d.word, k)?;
            let mut w = d.word.clone();
            w.swap(k, k + 1);
            d = Derived { word: w, cert: compress([y.cert.clone(), d.cert].concat()) };
        }
        d.word = free_reduce(&d.word);
        Some(d)
    }

    fn detect_commutators(&mut self) -> bool {
        let mut found = false;
        for r in &self.rels {
            if let [p, q, r3, s] = r.word[..] {
                if r3 == -p && s == -q && gen(p) != gen(q) {
                    let key = pair(gen(p), gen(q));
                    if let std::collections::hash_map::Entry::Vacant(v) = self.comm.entry(key) {
                        v.insert(r.clone());
                        found = true;
                    }
                }
            }
        }
        found
    }

    fn saturate(&mut self) {
        loop {
            if self.eliminate_step() {
                continue;
            }
            let max = self.budget.max_len;
            self.rels = self
                .rels
                .iter()
                .map(|r| self.normalize(r))
                .filter(|r| !r.word.is_empty() && r.word.len() <= max)
                .collect();
            if self.eliminate_step() {
                continue;
            }
            if !self.detect_commutators() {
                return;
            }
        }
    }

    /// Certificate for `[x, y]` from eliminations and commutations.
    fn prove_pair(&self, x: usize, y: usize) -> Option<Vec<Term>> {
        let (xl, yl) = (x as i32 + 1, y as i32 + 1);
        let mut w = vec![xl, yl, -xl, -yl];
        // goal = (Π acc) · w throughout
        let mut acc: Vec<Term> = Vec::new();
        let push = |y: &Derived, acc: &mut Vec<Term>| acc.extend(y.inverse().cert);
        for (g, xd) in &self.elims {
            let cur = Derived { word: w.clone(), cert: Vec::new() };
            let s = self.substitute(&cur, *g, xd);
            push(&Derived { word: Vec::new(), cert: s.cert }, &mut acc);
            w = s.word;
            if w.len() > self.budget.max_len {
                return None;
            }
        }
        // bubble sort by generator, cancelling as letters meet
        loop {
            w = free_reduce(&w);
            let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| gen(w[i]) > gen(w[i + 1])) else {
                break;
            };
            let y = self.swap_at(&w, i)?;
            push(&y, &mut acc);
            w.swap(i, i + 1);
        }
        if !free_reduce(&w).is_empty() {
            return None;
        }
        Some(compress(acc))
    }
}

/// Searches for proofs that every pair of generators commutes.
pub fn prove_abelian(g: &FPGroup, budget: Budget) -> ProofVerdict {
    let mut p = Prover::new(g, budget);
    p.saturate();
    let n = g.rank();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    let mut results: Vec<Option<Vec<Term>>> =
        pairs.iter().map(|&(x, y)| p.prove_pair(x, y)).collect();
    let pending: Vec<usize> = (0..pairs.len()).filter(|&i| results[i].is_none()).collect();
    if !pending.is_empty() {
        let lemmas: Vec<Derived> = p.rels.iter().chain(p.comm.values()).cloned().collect();
        let found: Vec<(usize, Option<Vec<Term>>)> = std::thread::scope(|s| {
            let handles: Vec<_> = pending
                .iter()
                .map(|&i| {
                    let (x, y) = pairs[i];
                    let lemmas = &lemmas;
                    s.spawn(move || (i, search_pair(g, lemmas, x, y, budget)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("search thread")).collect()
        });
        for (i, r) in found {
            results[i] = r;
        }
    }
    let mut traces = Vec::new();
    let mut open = Vec::new();
    for (&(x, y), r) in pairs.iter().zip(results) {
        match r {
            Some(cert) => traces.push(Trace::from_cert(g, x, y, &cert)),
            None => open.push((x, y)),
        }
    }
    let status = if open.is_empty() { ProofStatus::Proven } else { ProofStatus::Inconclusive };
    if status == ProofStatus::Inconclusive {
        traces.clear();
    }
    debug_assert!(traces.iter().all(|t| replay(g, t)));
    ProofVerdict { status, traces, open }
}

/// Best-first rewriting of `[x, y]`: replace a subword `S` by `T⁻¹`
/// whenever some lemma rotation reads `S T` and `|S| ≥ |T|`.
fn search_pair(
    g: &FPGroup,
    lemmas: &[Derived],
    x: usize,
    y: usize,
    budget: Budget,
) -> Option<Vec<Term>> {
    let mut rules: Vec<(Vec<i32>, Vec<i32>, Derived)> = Vec::new();
    let base: Vec<Derived> = (0..g.relators.len())
        .map(|i| Derived::base(g, i).cyclic_reduce())
        .chain(lemmas.iter().cloned())
        .collect();
    for d in base {
        for e in [d.clone(), d.inverse()] {
            let n = e.word.len();
            for k in 0..n {
                let r = e.rotate(k);
                if r.word.len() != n {
                    continue;
                }
                for split in n.div_ceil(2)..=n {
                    let s = r.word[..split].to_vec();
                    let t_inv = invert(&r.word[split..]);
                    rules.push((s, t_inv, r.clone()));
                }
            }
        }
    }
    let (xl, yl) = (x as i32 + 1, y as i32 + 1);
    let start = vec![xl, yl, -xl, -yl];
    // node: word, parent, rule index, position
    let mut nodes: Vec<(Vec<i32>, usize, usize, usize)> = vec![(start.clone(), usize::MAX, 0, 0)];
    let mut seen: HashMap<Vec<i32>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut heap = BinaryHeap::from([Reverse((start.len(), 0usize))]);
    while let Some(Reverse((_, id))) = heap.pop() {
        let w = nodes[id].0.clone();
        if w.is_empty() {
            // rebuild the certificate along the parent chain
            let mut acc = Vec::new();
            let mut cur = id;
            let mut chain = Vec::new();
            while nodes[cur].1 != usize::MAX {
                chain.push(cur);
                cur = nodes[cur].1;
            }
            for &c in chain.iter().rev() {
                let (_, parent, rule, pos) = &nodes[c];
                let pw = &nodes[*parent].0;
                let y = rules[*rule].2.inverse().conj(&pw[..*pos]);
                acc.extend(y.inverse().cert);
            }
            return Some(compress(acc));
        }
        for (ri, (s, t_inv, _)) in rules.iter().enumerate() {
            if s.len() > w.len() {
                continue;
            }
            for pos in 0..=w.len() - s.len() {
                if w[pos..pos + s.len()] != s[..] {
                    continue;
                }
                let mut nw = w[..pos].to_vec();
                nw.extend_from_slice(t_inv);
                nw.extend_from_slice(&w[pos + s.len()..]);
                let nw = free_reduce(&nw);
                if nw.len() > budget.max_len || seen.contains_key(&nw) {
                    continue;
                }
                if nodes.len() >= budget.max_nodes {
                    return None;
                }
                let nid = nodes.len();
                seen.insert(nw.clone(), nid);
                heap.push(Reverse((nw.len(), nid)));
                nodes.push((nw, id, ri, pos));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pi1Status {
    Certified,
    H1Only,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi1Report {
    pub status: Pi1Status,
    pub group: AbelianInvariants,
    pub relators_used: usize,
    pub proof: ProofVerdict,
}

impl fmt::Display for Pi1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = if self.group.is_trivial() { "trivial".to_string() } else { self.group.to_string() };
        match self.status {
            Pi1Status::Certified => write!(f, "Certified {g}"),
            Pi1Status::H1Only => write!(f, "H1-only {g}"),
        }
    }
}

/// Proves `π₁` abelian from the word-bearing, unconjugated vanishing
/// cycles; if that succeeds `π₁ = H_1`, computed from all cycles.
pub fn pi1_report(f: &Factorization, budget: Budget) -> Result<Pi1Report> {
    let grp = presentation(f, true)?;
    let proof = prove_abelian(&grp, budget);
    let group = h1_pipeline(f)?;
    let status = if proof.status == ProofStatus::Proven && f.base_points() > 0 {
        Pi1Status::Certified
    } else {
        Pi1Status::H1Only
    };
    Ok(Pi1Report { status, group, relators_used: grp.relators.len(), proof })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gens(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn smith_examples() {
        assert_eq!(from_relation_rows(&[vec![1, 0], vec![0, 1]], 2), AbelianInvariants::trivial());
        let a = from_relation_rows(&[vec![2, 0], vec![0, 3]], 2);
        assert_eq!(a, AbelianInvariants { rank: 0, torsion: vec![6] });
        let a = from_relation_rows(&[vec![4, 6, 0]], 3);
        assert_eq!(a, AbelianInvariants { rank: 2, torsion: vec![2] });
        assert_eq!(AbelianInvariants::from_cyclic(2, &[4, 6]).to_string(), "ℤ² ⊕ ℤ/2 ⊕ ℤ/12");
        assert_eq!(AbelianInvariants::from_cyclic(2, &[0, 1]).to_string(), "ℤ³");
        assert_eq!(from_relation_rows(&[], 0).to_string(), "1");
    }

    #[test]
    fn surface_group_abelianizes_freely() {
        let g = FPGroup::surface_group(3);
        assert_eq!(abelianization(&g), AbelianInvariants { rank: 6, torsion: vec![] });
    }

    #[test]
    fn commutator_relator_is_proven_at_once() {
        let g = FPGroup::new(gens(2), vec![FreeWord::new(vec![1, 2, -1, -2])]);
        let v = prove_abelian(&g, Budget::default());
        assert_eq!(v.status, ProofStatus::Proven);
        assert!(v.traces.iter().all(|t| replay(&g, t)));
    }

    #[test]
    fn free_group_is_inconclusive() {
        let g = FPGroup::new(gens(2), vec![]);
        let v = prove_abelian(&g, Budget { max_len: 16, max_nodes: 10_000 });
        assert_eq!(v.status, ProofStatus::Inconclusive);
        assert!(v.traces.is_empty());
    }

    #[test]
    fn eliminations_carry_valid_certificates() {
        // x0 = x1 x2, [x1, x2] = 1
        let g = FPGroup::new(
            gens(3),
            vec![FreeWord::new(vec![1, -3, -2]), FreeWord::new(vec![2, 3, -2, -3])],
        );
        let mut p = Prover::new(&g, Budget::default());
        p.saturate();
        assert!(p.elims.iter().all(|(_, d)| d.check(&g)));
        assert!(p.comm.values().all(|d| d.check(&g)));
        let v = prove_abelian(&g, Budget::default());
        assert_eq!(v.status, ProofStatus::Proven);
        for t in &v.traces {
            assert!(replay(&g, t));
            let back = Trace::from_lines(&t.to_lines(&g), &g).unwrap();
            assert_eq!(&back, t);
        }
    }

    #[test]
    fn tampered_trace_fails_replay() {
        let g = FPGroup::new(gens(2), vec![FreeWord::new(vec![1, 2, -1, -2])]);
        let v = prove_abelian(&g, Budget::default());
        let mut t = v.traces[0].clone();
        t.steps.retain(|s| !matches!(s, Step::Insert { .. }));
        assert!(!replay(&g, &t));
    }

    #[test]
    fn budget_parses() {
        assert_eq!("32, 500".parse::<Budget>().unwrap(), Budget { max_len: 32, max_nodes: 500 });
        assert!("32".parse::<Budget>().is_err());
    }

    proptest! {
        #[test]
        fn abelianization_ignores_relator_inversion_and_conjugation(
            rels in prop::collection::vec(prop::collection::vec(
                prop_oneof![1i32..=3, -3i32..=-1], 1..8), 0..4),
            c in prop_oneof![1i32..=3, -3i32..=-1],
        ) {
            let words: Vec<FreeWord> = rels.iter().map(|r| FreeWord::new(r.clone())).collect();
            let g = FPGroup::new(gens(3), words.clone());
            let twisted: Vec<FreeWord> = words
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let w = if i % 2 == 0 { w.inverse() } else { w.clone() };
                    FreeWord::new(vec![c]).concat(&w).concat(&FreeWord::new(vec![-c]))
                })
                .collect();
            let h = FPGroup::new(gens(3), twisted);
            prop_assert_eq!(abelianization(&g), abelianization(&h));
        }

        #[test]
        fn derived_operations_keep_certificates(
            a in prop::collection::vec(prop_oneof![1i32..=3, -3i32..=-1], 1..6),
            b in prop::collection::vec(prop_oneof![1i32..=3, -3i32..=-1], 1..6),
            p in prop::collection::vec(prop_oneof![1i32..=3, -3i32..=-1], 0..4),
        ) {
            let g = FPGroup::new(gens(3), vec![FreeWord::new(a), FreeWord::new(b)]);
            let x = Derived::base(&g, 0);
            let y = Derived::base(&g, 1);
            let z = x.conj(&p).mul(&y.inverse()).cyclic_reduce();
            prop_assert!(z.check(&g));
            if !z.word.is_empty() {
                let k = z.word.len() / 2;
                prop_assert!(z.rotate(k).check(&g));
            }
        }
    }
}
