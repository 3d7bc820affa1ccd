//! Signed Dehn-twist factorizations and the moves used to breed new ones.
//!
//! A twist may carry a conjugation index; it then stands for the twist
//! along `φ(c)`, where `φ` is the indexed [`ConjugationWord`]. Curve names
//! stay those of the base curves, so words and disjointness metadata can be
//! reused whenever `φ` provably fixes the curve.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surfaces::{intersection, Curve, HomologyClass, Surface};
use crate::symplectic::{product_of, transvection, SpMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Identity,
    /// Sorted multiset of 1-based boundary indices.
    Boundary(Vec<usize>),
}

impl Target {
    pub fn boundary(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        if v.is_empty() {
            Target::Identity
        } else {
            Target::Boundary(v)
        }
    }

    pub fn indices(&self) -> &[usize] {
        match self {
            Target::Identity => &[],
            Target::Boundary(v) => v,
        }
    }

    pub fn compose(&self, other: &Target) -> Target {
        let mut v = self.indices().to_vec();
        v.extend_from_slice(other.indices());
        Target::boundary(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Twist {
    pub curve: String,
    pub exponent: i64,
    pub conj: Option<usize>,
}

impl Twist {
    pub fn new(curve: &str, exponent: i64) -> Self {
        Twist { curve: curve.to_string(), exponent, conj: None }
    }
}

/// `t_{c1}^{e1} ⋯ t_{ck}^{ek}` as a mapping class; applies the last factor first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConjugationWord {
    pub factors: Vec<(String, i64)>,
}

impl ConjugationWord {
    pub fn new(factors: &[(&str, i64)]) -> Self {
        ConjugationWord {
            factors: factors
                .iter()
                .filter(|(_, e)| *e != 0)
                .map(|(c, e)| (c.to_string(), *e))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ConjugationWord) -> ConjugationWord {
        let mut factors = self.factors.clone();
        factors.extend(inner.factors.iter().cloned());
        ConjugationWord { factors }
    }

    pub fn apply(&self, model: &CurveModel, x: &HomologyClass) -> Result<HomologyClass> {
        let mut x = x.clone();
        for (c, e) in self.factors.iter().rev() {
            let c = &model.curve(c)?.homology;
            x = HomologyClass::new(transvection(c, *e).apply(&x.coeffs));
        }
        Ok(x)
    }

    pub fn matrix(&self, model: &CurveModel) -> Result<SpMatrix> {
        let mut tw = Vec::new();
        for (c, e) in &self.factors {
            tw.push((model.curve(c)?.homology.clone(), *e));
        }
        Ok(product_of(&tw, model.surface.dim()))
    }
}

impl fmt::Display for ConjugationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(c, e)| if *e == 1 { c.clone() } else { format!("{c}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A curve whose twist commutes with the product of `block`, taken in order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CommuteFact {
    pub curve: String,
    pub block: Vec<String>,
}

/// Surface plus the named curves and the isotopy-level facts asserted about them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveModel {
    pub surface: Surface,
    pub hyperelliptic: bool,
    pub curves: BTreeMap<String, Curve>,
    pub disjoint: BTreeSet<(String, String)>,
    pub facts: BTreeSet<CommuteFact>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CurveModel {
    pub fn new(surface: Surface) -> Self {
        let mut m = CurveModel {
            surface,
            hyperelliptic: false,
            curves: BTreeMap::new(),
            disjoint: BTreeSet::new(),
            facts: BTreeSet::new(),
        };
        for i in 1..=surface.boundary_count {
            m.curves
                .insert(format!("d{i}"), Curve::boundary(&format!("d{i}"), surface.genus, i));
        }
        m
    }

    pub fn curve(&self, name: &str) -> Result<&Curve> {
        self.curves
            .get(name)
            .ok_or_else(|| Error::UnknownCurve(name.to_string()))
    }

    pub fn add_curve(&mut self, c: Curve) -> Result<()> {
        if c.homology.dim() != self.surface.dim() {
            return Err(Error::DimensionMismatch(self.surface.dim(), c.homology.dim()));
        }
        match self.curves.get(&c.name) {
            Some(old) if *old != c => Err(Error::Data(format!(
                "curve {} redeclared with different data",
                c.name
            ))),
            _ => {
                self.curves.insert(c.name.clone(), c);
                Ok(())
            }
        }
    }

    pub fn declare_disjoint(&mut self, a: &str, b: &str) -> Result<()> {
        self.curve(a)?;
        self.curve(b)?;
        if a != b {
            self.disjoint.insert(pair_key(a, b));
        }
        Ok(())
    }

    /// Declares every pair across the two lists disjoint.
    pub fn declare_disjoint_all(&mut self, xs: &[&str], ys: &[&str]) -> Result<()> {
        for x in xs {
            for y in ys {
                self.declare_disjoint(x, y)?;
            }
        }
        Ok(())
    }

    pub fn add_fact(&mut self, curve: &str, block: &[&str]) -> Result<()> {
        self.curve(curve)?;
        for b in block {
            self.curve(b)?;
        }
        self.facts.insert(CommuteFact {
            curve: curve.to_string(),
            block: block.iter().map(|s| s.to_string()).collect(),
        });
        Ok(())
    }

    fn is_boundary(&self, name: &str) -> bool {
        self.curves
            .get(name)
            .is_some_and(|c| c.boundary_index.is_some())
    }

    /// Same curve, declared disjoint, or one of them is boundary-parallel.
    pub fn declared_disjoint(&self, a: &str, b: &str) -> bool {
        a == b
            || self.is_boundary(a)
            || self.is_boundary(b)
            || self.disjoint.contains(&pair_key(a, b))
    }

    /// Every curve of `phi` is declared disjoint from `c`, so `φ(c) = c`.
    pub fn fixes(&self, phi: &ConjugationWord, c: &str) -> bool {
        phi.factors.iter().all(|(x, _)| self.declared_disjoint(x, c))
    }

    /// Adds `other`'s curves and facts; shared names must agree.
    pub fn merge(&mut self, other: &CurveModel) -> Result<()> {
        if self.surface.genus != other.surface.genus {
            return Err(Error::SurfaceMismatch(
                self.surface.to_string(),
                other.surface.to_string(),
            ));
        }
        for c in other.curves.values() {
            self.add_curve(c.clone())?;
        }
        self.disjoint.extend(other.disjoint.iter().cloned());
        self.facts.extend(other.facts.iter().cloned());
        self.hyperelliptic &= other.hyperelliptic;
        Ok(())
    }

    fn boundary_curve_name(&self, index: usize) -> Option<&str> {
        self.curves
            .values()
            .find(|c| c.boundary_index == Some(index))
            .map(|c| c.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub model: CurveModel,
    pub twists: Vec<Twist>,
    pub target: Target,
    pub conjugations: Vec<ConjugationWord>,
    /// Overrides the base-point count implied by the target.
    pub base_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

impl Factorization {
    pub fn new(model: CurveModel, twists: Vec<Twist>, target: Target) -> Result<Self> {
        Factorization { model, twists, target, conjugations: Vec::new(), base_points: None }
            .checked()
    }

    pub fn empty(model: CurveModel) -> Self {
        Factorization {
            model,
            twists: Vec::new(),
            target: Target::Identity,
            conjugations: Vec::new(),
            base_points: None,
        }
    }

    /// Parses a plain space-separated word such as `B0 B1 ~C C^2`.
    pub fn from_names(model: CurveModel, word: &str, target: Target) -> Result<Self> {
        let mut twists = Vec::new();
        for tok in word.split_whitespace() {
            let (neg, rest) = match tok.strip_prefix('~') {
                Some(r) => (true, r),
                None => (false, tok),
            };
            let (name, exp) = match rest.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>().map_err(|_| Error::MalformedWord(tok.to_string()))?,
                ),
                None => (rest, 1),
            };
            twists.push(Twist::new(name, if neg { -exp } else { exp }));
        }
        Self::new(model, twists, target)
    }

    pub fn checked(mut self) -> Result<Self> {
        for t in &self.twists {
            self.model.curve(&t.curve)?;
            if t.exponent == 0 {
                return Err(Error::Precondition(format!("zero exponent on {}", t.curve)));
            }
            if let Some(k) = t.conj {
                if k >= self.conjugations.len() {
                    return Err(Error::IndexOutOfRange { index: k, len: self.conjugations.len() });
                }
            }
        }
        for phi in &self.conjugations {
            for (c, _) in &phi.factors {
                self.model.curve(c)?;
            }
        }
        if let Some(&b) = self
            .target
            .indices()
            .iter()
            .find(|&&b| b == 0 || b > self.model.surface.boundary_count)
        {
            return Err(Error::IndexOutOfRange { index: b, len: self.model.surface.boundary_count });
        }
        self.normalize_conjugations();
        Ok(self)
    }

    pub fn surface(&self) -> &Surface {
        &self.model.surface
    }

    pub fn len(&self) -> usize {
        self.twists.iter().map(|t| t.exponent.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.twists.is_empty()
    }

    pub fn base_points(&self) -> usize {
        self.base_points.unwrap_or(self.target.indices().len())
    }

    /// Homology class of the twist's actual curve.
    pub fn effective_class(&self, t: &Twist) -> HomologyClass {
        let base = &self.model.curves[&t.curve].homology;
        match t.conj {
            None => base.clone(),
            Some(k) => self.conjugations[k]
                .apply(&self.model, base)
                .expect("conjugation curves are validated on construction"),
        }
    }

    pub fn effective_twists(&self) -> Vec<(HomologyClass, i64)> {
        self.twists
            .iter()
            .map(|t| (self.effective_class(t), t.exponent))
            .collect()
    }

    pub fn curve_of(&self, t: &Twist) -> &Curve {
        &self.model.curves[&t.curve]
    }

    /// Every exponent positive and no curve null-homotopic once the boundary is capped.
    pub fn is_positive(&self) -> bool {
        self.twists.iter().all(|t| {
            let c = self.curve_of(t);
            t.exponent > 0 && c.boundary_index.is_none() && (c.separating || !c.homology.is_zero())
        })
    }

    /// Renumbers conjugations by first use and drops unused or duplicate ones.
    fn normalize_conjugations(&mut self) {
        let mut seen: Vec<ConjugationWord> = Vec::new();
        let old = std::mem::take(&mut self.conjugations);
        for t in self.twists.iter_mut() {
            if let Some(k) = t.conj {
                let phi = &old[k];
                if phi.is_identity() {
                    t.conj = None;
                    continue;
                }
                let idx = match seen.iter().position(|p| p == phi) {
                    Some(i) => i,
                    None => {
                        seen.push(phi.clone());
                        seen.len() - 1
                    }
                };
                t.conj = Some(idx);
            }
        }
        self.conjugations = seen;
    }

    fn conj_word(&self, k: Option<usize>) -> ConjugationWord {
        k.map(|k| self.conjugations[k].clone()).unwrap_or_default()
    }

    /// Whether the curves of twists `i` and `j` are disjoint by declaration,
    /// taking conjugations into account.
    fn effectively_disjoint(&self, i: usize, j: usize) -> bool {
        let (s, t) = (&self.twists[i], &self.twists[j]);
        if !self.model.declared_disjoint(&s.curve, &t.curve) {
            return false;
        }
        if s.conj == t.conj {
            return true;
        }
        // φ(c) and d are disjoint when φ fixes d and c, d are disjoint
        let ps = self.conj_word(s.conj);
        let pt = self.conj_word(t.conj);
        match (s.conj, t.conj) {
            (Some(_), None) => self.model.fixes(&ps, &t.curve),
            (None, Some(_)) => self.model.fixes(&pt, &s.curve),
            _ => {
                self.model.fixes(&ps, &t.curve)
                    && self.model.fixes(&ps, &s.curve)
                    && self.model.fixes(&pt, &t.curve)
                    && self.model.fixes(&pt, &s.curve)
            }
        }
    }

    /// Expands `t_c^k` into `|k|` elementary twists.
    pub fn normalize_elementary(&self) -> Factorization {
        let mut out = self.clone();
        out.twists = self
            .twists
            .iter()
            .flat_map(|t| {
                let unit = Twist { exponent: t.exponent.signum(), ..t.clone() };
                std::iter::repeat_n(unit, t.exponent.unsigned_abs() as usize)
            })
            .collect();
        out
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for t in &self.twists {
            let mut s = if t.exponent < 0 { format!("~{}", t.curve) } else { t.curve.clone() };
            if t.exponent.abs() != 1 {
                s = format!("{s}^{}", t.exponent.abs());
            }
            if let Some(k) = t.conj {
                s = format!("{s}{{φ{k}}}");
            }
            parts.push(s);
        }
        write!(f, "{}", parts.join(" "))?;
        match &self.target {
            Target::Identity => write!(f, " = 1"),
            Target::Boundary(v) => {
                let ds: Vec<String> = v.iter().map(|i| format!("t_d{i}")).collect();
                write!(f, " = {}", ds.join(" "))
            }
        }
    }
}

pub fn apply_twist_homology(t: &Twist, model: &CurveModel, x: &HomologyClass) -> Result<HomologyClass> {
    let c = model.curve(&t.curve)?;
    if c.homology.dim() != x.dim() {
        return Err(Error::SurfaceMismatch(
            format!("dimension {}", c.homology.dim()),
            format!("dimension {}", x.dim()),
        ));
    }
    let k = intersection(&c.homology, x)?;
    Ok(x.clone() + (t.exponent * k) * c.homology.clone())
}

/// Name and data of `t_a^e(b)`. Declared disjointness returns `b` itself.
fn image_curve(model: &mut CurveModel, a: &str, e: i64, b: &str) -> Result<String> {
    if model.declared_disjoint(a, b) {
        return Ok(b.to_string());
    }
    let inverse_tag = if e > 0 { format!("@!{a}") } else { format!("@{a}") };
    if let Some(base) = b.strip_suffix(&inverse_tag) {
        if model.curves.contains_key(base) {
            return Ok(base.to_string());
        }
    }
    let name = if e > 0 { format!("{b}@{a}") } else { format!("{b}@!{a}") };
    let ca = model.curve(a)?.clone();
    let cb = model.curve(b)?.clone();
    let k = intersection(&ca.homology, &cb.homology)?;
    let curve = Curve {
        name: name.clone(),
        homology: cb.homology.clone() + (e * k) * ca.homology.clone(),
        separating: cb.separating,
        word: None,
        boundary_index: cb.boundary_index,
        split_genus: cb.split_genus,
    };
    if !model.curves.contains_key(&name) {
        model.add_curve(curve)?;
        // t_a(b) lies in a neighbourhood of a ∪ b
        let others: Vec<String> = model
            .curves
            .keys()
            .filter(|x| {
                **x != name && model.declared_disjoint(x, a) && model.declared_disjoint(x, b)
            })
            .cloned()
            .collect();
        for x in others {
            model.declare_disjoint(&x, &name)?;
        }
        if model.declared_disjoint(a, b) {
            model.declare_disjoint(a, &name)?;
        }
    }
    Ok(name)
}

/// Rightward: `(t_a, t_b) ↦ (t_{t_a(b)}, t_a)`. Leftward: `(t_a, t_b) ↦ (t_b, t_{t_b^{-1}(a)})`.
pub fn hurwitz_move(f: &Factorization, i: usize, dir: Direction) -> Result<Factorization> {
    if i + 1 >= f.twists.len() {
        return Err(Error::IndexOutOfRange { index: i, len: f.twists.len() });
    }
    let (s, t) = (f.twists[i].clone(), f.twists[i + 1].clone());
    if s.exponent.abs() != 1 || t.exponent.abs() != 1 {
        return Err(Error::Precondition("Hurwitz moves need elementary twists".into()));
    }
    if s.conj != t.conj {
        return Err(Error::Precondition(
            "Hurwitz move across different conjugations".into(),
        ));
    }
    let mut out = f.clone();
    match dir {
        Direction::Right => {
            let name = image_curve(&mut out.model, &s.curve, s.exponent, &t.curve)?;
            out.twists[i] = Twist { curve: name, ..t };
            out.twists[i + 1] = s;
        }
        Direction::Left => {
            let name = image_curve(&mut out.model, &t.curve, -t.exponent, &s.curve)?;
            out.twists[i] = t;
            out.twists[i + 1] = Twist { curve: name, ..s };
        }
    }
    Ok(out)
}

/// Replaces each twist in `range` by its conjugate under `phi`.
pub fn partial_conjugate(
    f: &Factorization,
    range: Range<usize>,
    phi: &ConjugationWord,
) -> Result<Factorization> {
    if range.end > f.twists.len() || range.start > range.end {
        return Err(Error::IndexOutOfRange { index: range.end, len: f.twists.len() });
    }
    if phi.is_identity() {
        return Ok(f.clone());
    }
    let m = phi.matrix(&f.model)?;
    let p = product_of(&f.effective_twists()[range.clone()], f.surface().dim());
    let conj = m.mul(&p).mul(&m.inverse());
    if conj != p {
        return Err(Error::NotCommuting(format!(
            "φ = {phi} does not commute with the block:\nblock\n{p}φ·block·φ⁻¹\n{conj}"
        )));
    }
    let mut out = f.clone();
    for t in &mut out.twists[range] {
        let composed = match t.conj {
            None => phi.clone(),
            Some(k) => phi.compose(&f.conjugations[k]),
        };
        out.conjugations.push(composed);
        t.conj = Some(out.conjugations.len() - 1);
    }
    out.normalize_conjugations();
    Ok(out)
}

/// Removes twists `i < j` along the same curve with opposite exponents.
pub fn cancel_opposite_pair(f: &Factorization, i: usize, j: usize) -> Result<Factorization> {
    let n = f.twists.len();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
    }
    let (i, j) = (i.min(j), i.max(j));
    let (s, t) = (&f.twists[i], &f.twists[j]);
    if i == j || s.curve != t.curve || s.exponent != -t.exponent || s.conj != t.conj {
        return Err(Error::Precondition(format!(
            "twists {i} and {j} are not an opposite pair"
        )));
    }
    let cs = f.effective_class(s);
    for k in i + 1..j {
        let ck = f.effective_class(&f.twists[k]);
        if !f.effectively_disjoint(i, k) || intersection(&cs, &ck)? != 0 {
            return Err(Error::NotCommuting(format!(
                "twist {k} ({}) is not declared disjoint from {}",
                f.twists[k].curve, s.curve
            )));
        }
    }
    let mut out = f.clone();
    out.twists.remove(j);
    out.twists.remove(i);
    out.normalize_conjugations();
    Ok(out)
}

/// Moves the twist at `pos` across the adjacent block `block`.
pub fn commute_past_block(f: &Factorization, pos: usize, block: Range<usize>) -> Result<Factorization> {
    let n = f.twists.len();
    if block.end > n || block.is_empty() || pos >= n {
        return Err(Error::IndexOutOfRange { index: block.end.max(pos), len: n });
    }
    if pos + 1 != block.start && pos != block.end {
        return Err(Error::Precondition(format!(
            "twist {pos} is not adjacent to block {}..{}",
            block.start, block.end
        )));
    }
    let t = &f.twists[pos];
    let all_disjoint = block.clone().all(|k| {
        f.effectively_disjoint(pos, k)
            && intersection(&f.effective_class(t), &f.effective_class(&f.twists[k])) == Ok(0)
    });
    let by_fact = t.conj.is_none()
        && f.twists[block.clone()]
            .iter()
            .all(|b| b.conj.is_none() && b.exponent == 1)
        && f.model.facts.iter().any(|fact| {
            fact.curve == t.curve
                && fact.block.len() == block.len()
                && fact.block.iter().zip(&f.twists[block.clone()]).all(|(x, b)| *x == b.curve)
        });
    if !all_disjoint && !by_fact {
        return Err(Error::NotCommuting(format!(
            "no disjointness or commutation fact lets {} pass twists {}..{}",
            t.curve, block.start, block.end
        )));
    }
    let tm = transvection(&f.effective_class(t), t.exponent);
    let bm = product_of(&f.effective_twists()[block.clone()], f.surface().dim());
    if tm.mul(&bm) != bm.mul(&tm) {
        return Err(Error::NotCommuting(format!(
            "{} and the block {}..{} do not commute in Sp",
            t.curve, block.start, block.end
        )));
    }
    let mut out = f.clone();
    let moved = out.twists.remove(pos);
    let dest = if pos < block.start { block.end - 1 } else { block.start };
    out.twists.insert(dest, moved);
    out.normalize_conjugations();
    Ok(out)
}

/// Cyclic rotation moving the first `k` twists to the end; valid because
/// the target is central.
pub fn rotate(f: &Factorization, k: usize) -> Result<Factorization> {
    if k > f.twists.len() {
        return Err(Error::IndexOutOfRange { index: k, len: f.twists.len() });
    }
    let mut out = f.clone();
    out.twists.rotate_left(k);
    out.normalize_conjugations();
    Ok(out)
}

pub fn rename_curve(f: &Factorization, old: &str, new: &str) -> Result<Factorization> {
    let mut c = f.model.curve(old)?.clone();
    if f.model.curves.contains_key(new) {
        return Err(Error::Precondition(format!("curve {new} already exists")));
    }
    let ren = |s: &str| if s == old { new.to_string() } else { s.to_string() };
    let mut out = f.clone();
    c.name = new.to_string();
    out.model.curves.remove(old);
    out.model.curves.insert(new.to_string(), c);
    out.model.disjoint = f
        .model
        .disjoint
        .iter()
        .map(|(a, b)| pair_key(&ren(a), &ren(b)))
        .collect();
    out.model.facts = f
        .model
        .facts
        .iter()
        .map(|fact| CommuteFact {
            curve: ren(&fact.curve),
            block: fact.block.iter().map(|b| ren(b)).collect(),
        })
        .collect();
    for t in &mut out.twists {
        t.curve = ren(&t.curve);
    }
    for phi in &mut out.conjugations {
        for (c, _) in &mut phi.factors {
            *c = ren(c);
        }
    }
    Ok(out)
}

/// Fiber sum: concatenated words, merged models, composed targets.
pub fn concatenate(f: &Factorization, g: &Factorization) -> Result<Factorization> {
    if f.surface() != g.surface() {
        return Err(Error::SurfaceMismatch(f.surface().to_string(), g.surface().to_string()));
    }
    let mut out = f.clone();
    out.model.merge(&g.model)?;
    let shift = out.conjugations.len();
    out.conjugations.extend(g.conjugations.iter().cloned());
    out.twists.extend(g.twists.iter().map(|t| Twist {
        conj: t.conj.map(|k| k + shift),
        ..t.clone()
    }));
    out.target = f.target.compose(&g.target);
    out.base_points = match (f.base_points, g.base_points) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(0) + b.unwrap_or(0)),
    };
    out.normalize_conjugations();
    Ok(out)
}

/// Caps the listed boundary components; remaining ones are renumbered in order.
pub fn cap_boundary(f: &Factorization, which: &[usize]) -> Result<Factorization> {
    let m = f.surface().boundary_count;
    if let Some(&b) = which.iter().find(|&&b| b == 0 || b > m) {
        return Err(Error::IndexOutOfRange { index: b, len: m });
    }
    if which.is_empty() {
        return Ok(f.clone());
    }
    let capped: BTreeSet<usize> = which.iter().copied().collect();
    let renumber: BTreeMap<usize, usize> = (1..=m)
        .filter(|i| !capped.contains(i))
        .enumerate()
        .map(|(k, i)| (i, k + 1))
        .collect();
    let mut model = CurveModel::new(Surface::new(f.surface().genus, m - capped.len()));
    model.curves.clear();
    model.hyperelliptic = f.model.hyperelliptic;
    let mut names = BTreeMap::new();
    for (old, c) in &f.model.curves {
        let mut c = c.clone();
        if let Some(b) = c.boundary_index {
            if capped.contains(&b) {
                continue;
            }
            let nb = renumber[&b];
            if c.name == format!("d{b}") {
                c.name = format!("d{nb}");
            }
            c.boundary_index = Some(nb);
        }
        names.insert(old.clone(), c.name.clone());
        model.curves.insert(c.name.clone(), c);
    }
    let ren = |s: &str| names.get(s).cloned();
    for (a, b) in &f.model.disjoint {
        if let (Some(a), Some(b)) = (ren(a), ren(b)) {
            model.disjoint.insert(pair_key(&a, &b));
        }
    }
    for fact in &f.model.facts {
        let block: Option<Vec<String>> = fact.block.iter().map(|b| ren(b)).collect();
        if let (Some(curve), Some(block)) = (ren(&fact.curve), block) {
            model.facts.insert(CommuteFact { curve, block });
        }
    }
    let mut twists = Vec::new();
    for t in &f.twists {
        if let Some(name) = ren(&t.curve) {
            twists.push(Twist { curve: name, ..t.clone() });
        }
    }
    let mut conjugations = Vec::new();
    for phi in &f.conjugations {
        let factors: Option<Vec<(String, i64)>> =
            phi.factors.iter().map(|(c, e)| ren(c).map(|c| (c, *e))).collect();
        conjugations.push(ConjugationWord {
            factors: factors.ok_or_else(|| {
                Error::Precondition("conjugation uses a capped boundary curve".into())
            })?,
        });
    }
    let target = Target::boundary(
        f.target
            .indices()
            .iter()
            .filter_map(|b| renumber.get(b).copied())
            .collect(),
    );
    Factorization { model, twists, target, conjugations, base_points: f.base_points }.checked()
}

/// Moves the target boundary twists into the word as negative twists.
pub fn close_boundary(f: &Factorization) -> Result<Factorization> {
    release_boundary(f, f.target.indices())
}

/// Moves the listed target boundary twists into the word as negative twists.
pub fn release_boundary(f: &Factorization, which: &[usize]) -> Result<Factorization> {
    let mut out = f.clone();
    let mut rest = f.target.indices().to_vec();
    for &b in which {
        let k = rest
            .iter()
            .position(|&x| x == b)
            .ok_or_else(|| Error::Precondition(format!("d{b} is not in the target")))?;
        rest.remove(k);
        let name = f
            .model
            .boundary_curve_name(b)
            .ok_or_else(|| Error::UnknownCurve(format!("boundary {b}")))?
            .to_string();
        out.twists.push(Twist::new(&name, -1));
    }
    out.target = Target::boundary(rest);
    Ok(out)
}

/// Subsurface embedding. Source boundary components whose image is a target
/// boundary-parallel curve stay in the target; others become negative twists.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub target: CurveModel,
    pub curve_map: BTreeMap<String, String>,
}

impl Embedding {
    pub fn new(target: CurveModel, pairs: &[(&str, &str)]) -> Self {
        Embedding {
            target,
            curve_map: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    fn image(&self, name: &str) -> Result<String> {
        let img = self
            .curve_map
            .get(name)
            .ok_or_else(|| Error::UnknownCurve(format!("{name} (unmapped by embedding)")))?;
        self.target.curve(img)?;
        Ok(img.clone())
    }
}

pub fn embed(f: &Factorization, e: &Embedding) -> Result<Factorization> {
    let mut used: BTreeSet<String> = f.twists.iter().map(|t| t.curve.clone()).collect();
    for phi in &f.conjugations {
        used.extend(phi.factors.iter().map(|(c, _)| c.clone()));
    }
    let used: Vec<String> = used.into_iter().collect();
    for (k, a) in used.iter().enumerate() {
        let ia = e.target.curve(&e.image(a)?)?.clone();
        for b in &used[k + 1..] {
            let ib = e.target.curve(&e.image(b)?)?;
            let src = intersection(&f.model.curves[a].homology, &f.model.curves[b].homology)?;
            let dst = intersection(&ia.homology, &ib.homology)?;
            if src.abs() != dst.abs() {
                return Err(Error::Data(format!(
                    "embedding changes |⟨{a},{b}⟩| from {} to {}",
                    src.abs(),
                    dst.abs()
                )));
            }
        }
    }
    let mut twists = Vec::new();
    for t in &f.twists {
        twists.push(Twist { curve: e.image(&t.curve)?, ..t.clone() });
    }
    let mut conjugations = Vec::new();
    for phi in &f.conjugations {
        let mut factors = Vec::new();
        for (c, x) in &phi.factors {
            factors.push((e.image(c)?, *x));
        }
        conjugations.push(ConjugationWord { factors });
    }
    let mut kept = Vec::new();
    for &b in f.target.indices() {
        let src = f
            .model
            .boundary_curve_name(b)
            .ok_or_else(|| Error::UnknownCurve(format!("boundary {b}")))?;
        // two boundary circles glued together land on a nonseparating curve
        let img = e.image(src)?;
        let c = e.target.curve(&img)?;
        match c.boundary_index {
            Some(i) => kept.push(i),
            None => twists.push(Twist::new(&img, -1)),
        }
    }
    Factorization {
        model: e.target.clone(),
        twists,
        target: Target::boundary(kept),
        conjugations,
        base_points: None,
    }
    .checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{product, verify};

    fn torus() -> CurveModel {
        let mut m = CurveModel::new(Surface::closed(1));
        m.add_curve(Curve::nonseparating("a", HomologyClass::a(1, 1))).unwrap();
        m.add_curve(Curve::nonseparating("b", HomologyClass::b(1, 1))).unwrap();
        m
    }

    #[test]
    fn hurwitz_on_basis() {
        let f = Factorization::from_names(torus(), "a b", Target::Identity).unwrap();
        let g = hurwitz_move(&f, 0, Direction::Right).unwrap();
        assert_eq!(g.twists[0].curve, "b@a");
        assert_eq!(g.effective_class(&g.twists[0]), HomologyClass::new(vec![1, 1]));
        assert_eq!(product(&g), product(&f));
        let back = hurwitz_move(&g, 0, Direction::Left).unwrap();
        assert_eq!(back.twists, f.twists);
    }

    #[test]
    fn hurwitz_disjoint_is_swap() {
        let mut m = CurveModel::new(Surface::closed(2));
        m.add_curve(Curve::nonseparating("a1", HomologyClass::a(2, 1))).unwrap();
        m.add_curve(Curve::nonseparating("a2", HomologyClass::a(2, 2))).unwrap();
        m.declare_disjoint("a1", "a2").unwrap();
        let f = Factorization::from_names(m, "a1 a2", Target::Identity).unwrap();
        let g = hurwitz_move(&f, 0, Direction::Right).unwrap();
        let names: Vec<_> = g.twists.iter().map(|t| t.curve.as_str()).collect();
        assert_eq!(names, ["a2", "a1"]);
    }

    #[test]
    fn chain_relation_verifies() {
        let f = Factorization::from_names(torus(), "a b a b a b a b a b a b", Target::Identity).unwrap();
        assert!(verify(&f).pass);
        let g = Factorization::from_names(torus(), "a b a b a b", Target::Identity).unwrap();
        assert!(!verify(&g).pass);
    }

    #[test]
    fn cancel_adjacent_and_blocked() {
        let f = Factorization::from_names(torus(), "a ~a", Target::Identity).unwrap();
        assert!(cancel_opposite_pair(&f, 0, 1).unwrap().is_empty());
        let f = Factorization::from_names(torus(), "a b ~a", Target::Identity).unwrap();
        assert!(matches!(cancel_opposite_pair(&f, 0, 2), Err(Error::NotCommuting(_))));
        let f = Factorization::from_names(torus(), "a b", Target::Identity).unwrap();
        assert!(matches!(cancel_opposite_pair(&f, 0, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_conjugation_is_noop() {
        let f = Factorization::from_names(torus(), "a b", Target::Identity).unwrap();
        let g = partial_conjugate(&f, 0..2, &ConjugationWord::default()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn conjugation_rejected_when_not_commuting() {
        let f = Factorization::from_names(torus(), "a", Target::Identity).unwrap();
        let phi = ConjugationWord::new(&[("b", 1)]);
        assert!(matches!(partial_conjugate(&f, 0..1, &phi), Err(Error::NotCommuting(_))));
    }

    #[test]
    fn twist_homology_examples() {
        let mut m = CurveModel::new(Surface::closed(3));
        let b0 = HomologyClass::from_terms(3, &[("a1", 1), ("a3", 1)]).unwrap();
        m.add_curve(Curve::nonseparating("b1", HomologyClass::b(3, 1))).unwrap();
        m.add_curve(Curve::separating("C", 3, 1)).unwrap();
        let t = Twist::new("b1", -2);
        let img = apply_twist_homology(&t, &m, &b0).unwrap();
        assert_eq!(img, HomologyClass::from_terms(3, &[("a1", 1), ("b1", 2), ("a3", 1)]).unwrap());
        assert_eq!(apply_twist_homology(&Twist::new("C", 1), &m, &b0).unwrap(), b0);
        let b1 = HomologyClass::b(3, 1);
        assert_eq!(apply_twist_homology(&Twist::new("b1", 1), &m, &b1).unwrap(), b1);
    }

    #[test]
    fn cap_renumbers() {
        let mut m = CurveModel::new(Surface::new(1, 2));
        m.add_curve(Curve::nonseparating("a", HomologyClass::a(1, 1))).unwrap();
        let f = Factorization::from_names(m, "a ~a d2", Target::boundary(vec![1, 2])).unwrap();
        let g = cap_boundary(&f, &[1]).unwrap();
        assert_eq!(g.surface().boundary_count, 1);
        assert_eq!(g.target, Target::Boundary(vec![1]));
        assert_eq!(g.twists[2].curve, "d1");
        assert_eq!(cap_boundary(&f, &[]).unwrap(), f);
    }

    #[test]
    fn embed_identity() {
        let f = Factorization::from_names(torus(), "a b", Target::Identity).unwrap();
        let e = Embedding::new(torus(), &[("a", "a"), ("b", "b")]);
        assert_eq!(embed(&f, &e).unwrap(), f);
        let e = Embedding::new(torus(), &[("a", "a")]);
        assert!(matches!(embed(&f, &e), Err(Error::UnknownCurve(_))));
    }

    #[test]
    fn concatenate_with_empty() {
        let f = Factorization::from_names(torus(), "a b", Target::Identity).unwrap();
        let e = Factorization::empty(torus());
        assert_eq!(concatenate(&f, &e).unwrap(), f);
    }
}
