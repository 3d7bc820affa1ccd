//! Shipped factorizations and the recipes that breed them.
//!
//! A recipe is a small stack program. `Base` and `Entry` push a
//! factorization, moves act on the top of the stack, `Concat` joins the top
//! two. Every `Embed` records the embedded piece (with the boundary twists
//! that turned into interior twists) as a signature summand, and every
//! `Cancel` adds to the cancellation ledger.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizations::{
    cancel_opposite_pair, cap_boundary, commute_past_block, concatenate, embed, hurwitz_move,
    partial_conjugate, release_boundary, rename_curve, rotate, ConjugationWord, CurveModel,
    Direction, Embedding, Factorization, Target,
};
use crate::groups::{h1_pipeline, pi1_report, AbelianInvariants, Budget};
use crate::invariants::{
    scy_criterion, signature_decomposition, signature_hyperelliptic, signature_meyer,
    CanceledPair, Decomposition, InvariantReport, Summand,
};
use crate::surfaces::{abelianize_word, Curve, FreeWord, HomologyClass, Surface};
use crate::symplectic::verify;

// ---------------------------------------------------------------------------
// curve models

fn worded(m: &mut CurveModel, name: &str, word: &str) -> Result<()> {
    let w = FreeWord::parse(word, &m.surface.generators())?;
    let h = abelianize_word(&w, &m.surface)?;
    m.add_curve(Curve::nonseparating(name, h).with_word(w))
}

fn separating(m: &mut CurveModel, name: &str, split: usize, word: Option<&str>) -> Result<()> {
    let mut c = Curve::separating(name, m.surface.genus, split);
    if let Some(w) = word {
        c = c.with_word(FreeWord::parse(w, &m.surface.generators())?);
    }
    m.add_curve(c)
}

fn with_class(m: &mut CurveModel, name: &str, terms: &[(&str, i64)]) -> Result<()> {
    let h = HomologyClass::from_terms(m.surface.genus, terms)?;
    m.add_curve(Curve::nonseparating(name, h))
}

fn homologous(m: &mut CurveModel, name: &str, to: &str) -> Result<()> {
    let h = m.curve(to)?.homology.clone();
    m.add_curve(Curve::nonseparating(name, h))
}

fn names(prefix: &str, n: usize, suffix: &str) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}{suffix}")).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Genus 2, two boundary components: `B0, B1, B2` and the separating `C`.
pub fn lift2_model() -> Result<CurveModel> {
    let mut m = CurveModel::new(Surface::new(2, 2));
    m.hyperelliptic = true;
    with_class(&mut m, "B0", &[("a1", 1), ("a2", 1)])?;
    with_class(&mut m, "B1", &[("a1", -1), ("b1", 1), ("a2", -1), ("b2", 1)])?;
    with_class(&mut m, "B2", &[("b1", 1), ("b2", 1)])?;
    separating(&mut m, "C", 1, None)?;
    Ok(m)
}

/// Genus 2, four boundary components: `B{j}_{i}` and `C{i}` for `i = 1, 2`.
pub fn lift4_model() -> Result<CurveModel> {
    let base = lift2_model()?;
    let mut m = CurveModel::new(Surface::new(2, 4));
    m.hyperelliptic = true;
    for i in 1..=2 {
        for j in 0..3 {
            homologous_from(&mut m, &format!("B{j}_{i}"), &base, &format!("B{j}"))?;
        }
        separating(&mut m, &format!("C{i}"), 1, None)?;
    }
    Ok(m)
}

fn homologous_from(m: &mut CurveModel, name: &str, src: &CurveModel, to: &str) -> Result<()> {
    let h = src.curve(to)?.homology.clone();
    m.add_curve(Curve::nonseparating(name, h))
}

/// Genus 2, one boundary component: the seven-curve chain relation.
pub fn chain2_model() -> Result<CurveModel> {
    let mut m = CurveModel::new(Surface::new(2, 1));
    m.hyperelliptic = true;
    for s in ["e", "d", "C"] {
        separating(&mut m, s, 1, None)?;
    }
    with_class(&mut m, "x1", &[("a1", 1), ("b1", -2), ("a2", 2), ("b2", 2)])?;
    with_class(&mut m, "x2", &[("a1", 1), ("b1", -3), ("a2", 2), ("b2", 1)])?;
    with_class(&mut m, "x3", &[("a1", 1), ("b1", -4), ("a2", 2)])?;
    with_class(&mut m, "x4", &[("b1", 1), ("b2", 1)])?;
    Ok(m)
}

/// Classes `γ_0, …, γ_{2h}` in genus `h`: suffix sums of the chain
/// `a1, b1, a2 − a1, b2, …, bh, −ah`, listed from the last sum to the first.
fn even_gammas(h: usize) -> Vec<Vec<i64>> {
    let n = 2 * h;
    let unit = |k: usize| {
        let mut v = vec![0i64; n];
        v[k] = 1;
        v
    };
    let mut chain = vec![unit(0)];
    for k in 0..h {
        chain.push(unit(2 * k + 1));
        if k + 1 < h {
            let mut v = unit(2 * (k + 1));
            v[2 * k] -= 1;
            chain.push(v);
        }
    }
    let mut last = vec![0i64; n];
    last[2 * (h - 1)] = -1;
    chain.push(last);
    let mut sums = Vec::new();
    let mut acc = vec![0i64; n];
    for c in chain.iter().rev() {
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
        sums.push(acc.clone());
    }
    sums
}

/// Genus `2h`, two boundary components: `B0, …, B_{2h}` (doubled chain
/// classes) and `C` splitting the surface into two genus-`h` halves.
pub fn even_model(h: usize) -> Result<CurveModel> {
    if h == 0 {
        return Err(Error::Precondition("the even family starts at h = 1".into()));
    }
    let mut m = CurveModel::new(Surface::new(2 * h, 2));
    m.hyperelliptic = true;
    for (j, gam) in even_gammas(h).into_iter().enumerate() {
        let mut v = gam.clone();
        v.extend(gam);
        m.add_curve(Curve::nonseparating(&format!("B{j}"), HomologyClass::new(v)))?;
    }
    separating(&mut m, "C", h, None)?;
    Ok(m)
}

const P1: [&str; 6] = ["e", "x1", "x2", "x3", "d", "B2"];
const P2: [&str; 6] = ["B0", "B1", "B2", "A0", "A1", "A2"];
const P2P: [&str; 6] = ["B'0", "B'1", "B'2", "A'0", "A'1", "A'2"];

/// Genus 3, one boundary component, carrying `P1`, `P2`, `P2'`, the
/// separating `C, C'` and the curves `b1, a2` of the conjugating family.
pub fn exotic_model() -> Result<CurveModel> {
    let mut m = CurveModel::new(Surface::new(3, 1));
    separating(&mut m, "C", 1, Some("[a1,b1]"))?;
    // C' cuts off handles 1, 2 from handle 3 and the boundary
    separating(&mut m, "C'", 1, None)?;
    separating(&mut m, "e", 1, None)?;
    separating(&mut m, "d", 1, None)?;
    worded(&mut m, "x1", "a1 ~b1 a2 b2 ~b1 a2 b2")?;
    worded(&mut m, "x2", "a1 ~b1^3 a2 b2 a2")?;
    worded(&mut m, "x3", "a1 ~b1^5 a2 [b2,a2] b1 a2")?;
    worded(&mut m, "B2", "b2 b1 [b3,a3]")?;
    worded(&mut m, "B0", "a1 a2")?;
    worded(&mut m, "B1", "b2 ~a2 b1 ~a1 [b3,a3]")?;
    for j in 0..3 {
        homologous(&mut m, &format!("A{j}"), &format!("B{j}"))?;
    }
    worded(&mut m, "B'0", "a2 a3")?;
    worded(&mut m, "B'1", "a2 ~b2 a3 ~b3")?;
    worded(&mut m, "B'2", "b3 b2")?;
    for j in 0..3 {
        homologous(&mut m, &format!("A'{j}"), &format!("B'{j}"))?;
    }
    worded(&mut m, "b1", "b1")?;
    worded(&mut m, "a2", "a2")?;
    m.declare_disjoint_all(&P1, &["C'"])?;
    m.declare_disjoint_all(&P2, &["C'"])?;
    m.declare_disjoint("C", "C'")?;
    m.declare_disjoint_all(&["b1", "a2"], &["C", "C'"])?;
    m.add_fact("C", &P1)?;
    m.add_fact("C", &P2)?;
    m.add_fact("C", &P2P)?;
    Ok(m)
}

fn scy_words() -> [(&'static str, &'static str); 12] {
    [
        ("B0", "a1 a3"),
        ("B1", "a1 ~b1 a2 b2 ~a2 a3 ~b3"),
        ("B2", "~b1 a2 b2 ~a2 ~b3"),
        ("A0", "a1 [b3,a3] b2 a3 ~b2 [a3,b3]"),
        ("A1", "a3 ~b3 ~b2 [a3,b3] a1^2 ~b1 ~a1 [b3,a3] b2 [b3,a3] b2"),
        ("A2", "a1 ~b1 ~a1 [b3,a3] b2 [b3,a3] b2 ~b3 ~b2 [a3,b3]"),
        ("B'0", "~a2 a1 a2 a3"),
        ("B'1", "a1 ~b1 a2 a3^2 ~b3 ~a3 b2 ~a2"),
        ("B'2", "b1 a2 ~b2 a3 b3 ~a3 ~a2"),
        ("A'0", "a1 a2 ~b2 a3 b2 ~a2"),
        ("A'1", "a1 ~b1 a2 ~b2 a3^2 ~b3 ~a3 b2^2 ~a2"),
        ("A'2", "~b1 a2 ~b2 a3 ~b3 ~a3 b2^2 ~a2"),
    ]
}

/// Closed genus 3 obtained by gluing two genus-2 pieces along pairs of
/// boundary circles; `C` and `C'` are the glued circles, both of class `b2`.
pub fn scy_model() -> Result<CurveModel> {
    let mut m = CurveModel::new(Surface::closed(3));
    for (name, w) in scy_words() {
        worded(&mut m, name, w)?;
    }
    with_class(&mut m, "C", &[("b2", 1)])?;
    with_class(&mut m, "C'", &[("b2", 1)])?;
    m.declare_disjoint_all(&P2, &["C'"])?;
    m.declare_disjoint_all(&P2P, &["C"])?;
    m.declare_disjoint("C", "C'")?;
    Ok(m)
}

const PHI4: [&str; 4] = ["a1", "b1", "a3", "b3"];

/// Genus 3 with four boundary components; `P~` uses `B{j}_1, A{j}_2`,
/// `P~'` their primed versions, and `C1, C2, C'1, C'2` are glued circles.
pub fn scy4_model() -> Result<CurveModel> {
    let mut m = CurveModel::new(Surface::new(3, 4));
    for (name, w) in scy_words() {
        let (stem, j) = name.split_at(name.len() - 1);
        let i = if stem.starts_with('B') { 1 } else { 2 };
        worded(&mut m, &format!("{stem}{j}_{i}"), w)?;
    }
    let cs = ["C1", "C2", "C'1", "C'2"];
    for c in cs {
        with_class(&mut m, c, &[("b2", 1)])?;
    }
    for g in PHI4 {
        worded(&mut m, g, g)?;
    }
    let pt = p_tilde("");
    let ptp = p_tilde("'");
    m.declare_disjoint_all(&refs(&pt), &["C'1", "C'2"])?;
    m.declare_disjoint_all(&refs(&ptp), &["C1", "C2"])?;
    m.declare_disjoint_all(&cs, &cs)?;
    m.declare_disjoint_all(&PHI4, &cs)?;
    Ok(m)
}

fn p_tilde(prime: &str) -> Vec<String> {
    let mut v: Vec<String> = (0..3).map(|j| format!("B{prime}{j}_1")).collect();
    v.extend((0..3).map(|j| format!("A{prime}{j}_2")));
    v
}

/// Closed genus `2h+1`; the genus-`2h` classes `γ` embed as
/// `(γ, −γ_{b_h}·b_{h+1}, γ)` and `C, C'` have class `b_{h+1}`.
pub fn family_model(h: usize) -> Result<CurveModel> {
    let g = 2 * h + 1;
    let mut m = CurveModel::new(Surface::closed(g));
    for (j, gam) in even_gammas(h).into_iter().enumerate() {
        let mut v = gam.clone();
        v.extend([0, -gam[2 * h - 1]]);
        v.extend(gam);
        let c = HomologyClass::new(v);
        for name in [format!("B{j}"), format!("A{j}"), format!("B'{j}"), format!("A'{j}")] {
            m.add_curve(Curve::nonseparating(&name, c.clone()))?;
        }
    }
    let b = format!("b{}", h + 1);
    with_class(&mut m, "C", &[(&b, 1)])?;
    with_class(&mut m, "C'", &[(&b, 1)])?;
    let p = [names("B", 2 * h + 1, ""), names("A", 2 * h + 1, "")].concat();
    let pp = [names("B'", 2 * h + 1, ""), names("A'", 2 * h + 1, "")].concat();
    m.declare_disjoint_all(&refs(&p), &["C'"])?;
    m.declare_disjoint_all(&refs(&pp), &["C"])?;
    m.declare_disjoint("C", "C'")?;
    Ok(m)
}

// ---------------------------------------------------------------------------
// base relations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseId {
    Lift2,
    Lift4,
    Chain2,
    Even(usize),
}

impl fmt::Display for BaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseId::Lift2 => write!(f, "lift2"),
            BaseId::Lift4 => write!(f, "lift4"),
            BaseId::Chain2 => write!(f, "chain2"),
            BaseId::Even(h) => write!(f, "even{h}"),
        }
    }
}

pub fn base(id: BaseId) -> Result<Factorization> {
    match id {
        BaseId::Lift2 => Factorization::from_names(
            lift2_model()?,
            "B0 B1 B2 C B0 B1 B2 C",
            Target::boundary(vec![1, 2]),
        ),
        BaseId::Lift4 => Factorization::from_names(
            lift4_model()?,
            "B0_1 B1_1 B2_1 C1 B0_2 B1_2 B2_2 C2",
            Target::boundary(vec![1, 2, 3, 4]),
        ),
        BaseId::Chain2 => Factorization::from_names(
            chain2_model()?,
            "e x1 x2 x3 d C x4",
            Target::boundary(vec![1]),
        ),
        BaseId::Even(h) => {
            let half: Vec<String> = names("B", 2 * h + 1, "");
            let word = format!("{0} C {0} C", half.join(" "));
            Factorization::from_names(even_model(h)?, &word, Target::boundary(vec![1, 2]))
        }
    }
}

// ---------------------------------------------------------------------------
// recipes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelId {
    Exotic,
    Scy,
    Scy4,
    Family(usize),
}

impl ModelId {
    pub fn build(self) -> Result<CurveModel> {
        match self {
            ModelId::Exotic => exotic_model(),
            ModelId::Scy => scy_model(),
            ModelId::Scy4 => scy4_model(),
            ModelId::Family(h) => family_model(h),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Exotic => write!(f, "exotic"),
            ModelId::Scy => write!(f, "scy"),
            ModelId::Scy4 => write!(f, "scy4"),
            ModelId::Family(h) => write!(f, "family{h}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Base(BaseId),
    Entry(String),
    Hurwitz { pos: usize, right: bool },
    Rename { old: String, new: String },
    Cap(Vec<usize>),
    Release(Vec<usize>),
    /// Unlisted curves map to the same name in the target model.
    Embed { label: String, model: ModelId, map: Vec<(String, String)> },
    Conjugate { range: Range<usize>, phi: ConjugationWord },
    Rotate(usize),
    Concat,
    Cancel(usize, usize),
    Commute { pos: usize, block: Range<usize> },
    BasePoints(usize),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Base(b) => write!(f, "base {b}"),
            Step::Entry(id) => write!(f, "entry {id}"),
            Step::Hurwitz { pos, right } => {
                write!(f, "hurwitz {pos} {}", if *right { "right" } else { "left" })
            }
            Step::Rename { old, new } => write!(f, "rename {old} -> {new}"),
            Step::Cap(v) => write!(f, "cap {v:?}"),
            Step::Release(v) => write!(f, "release {v:?}"),
            Step::Embed { label, model, map } => {
                let m: Vec<String> = map.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                write!(f, "embed {label} into {model} [{}]", m.join(", "))
            }
            Step::Conjugate { range, phi } => {
                write!(f, "conjugate {}..{} by {phi}", range.start, range.end)
            }
            Step::Rotate(k) => write!(f, "rotate {k}"),
            Step::Concat => write!(f, "concat"),
            Step::Cancel(i, j) => write!(f, "cancel {i} {j}"),
            Step::Commute { pos, block } => {
                write!(f, "commute {pos} past {}..{}", block.start, block.end)
            }
            Step::BasePoints(m) => write!(f, "basepoints {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub steps: Vec<Step>,
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(f, "{k:>3}  {s}")?;
        }
        Ok(())
    }
}

/// A factorization together with the pieces it was bred from.
#[derive(Debug, Clone)]
pub struct Bred {
    pub factorization: Factorization,
    pub summands: Vec<(String, Factorization)>,
    pub ledger: Vec<CanceledPair>,
}

impl Bred {
    fn plain(label: &str, f: Factorization) -> Self {
        Bred { summands: vec![(label.to_string(), f.clone())], factorization: f, ledger: Vec::new() }
    }
}

fn step_err(k: usize, s: &Step, e: Error) -> Error {
    Error::Precondition(format!("recipe step {k} ({s}): {e}"))
}

/// Runs the recipe; the first failing step aborts with its index.
pub fn breed(recipe: &Recipe) -> Result<Bred> {
    let mut stack: Vec<Bred> = Vec::new();
    for (k, s) in recipe.steps.iter().enumerate() {
        run_step(&mut stack, s).map_err(|e| step_err(k, s, e))?;
    }
    match stack.len() {
        1 => Ok(stack.pop().expect("one element")),
        n => Err(Error::Precondition(format!("recipe leaves {n} factorizations on the stack"))),
    }
}

fn run_step(stack: &mut Vec<Bred>, s: &Step) -> Result<()> {
    if let Step::Base(b) = s {
        stack.push(Bred::plain(&b.to_string(), base(*b)?));
        return Ok(());
    }
    if let Step::Entry(id) = s {
        let e = entry(id)?;
        stack.push(Bred { factorization: e.factorization, summands: e.summands, ledger: e.ledger });
        return Ok(());
    }
    if let Step::Concat = s {
        if stack.len() < 2 {
            return Err(Error::Precondition("concat needs two factorizations".into()));
        }
        let b = stack.pop().expect("checked");
        let a = stack.last_mut().expect("checked");
        a.factorization = concatenate(&a.factorization, &b.factorization)?;
        a.summands.extend(b.summands);
        a.ledger.extend(b.ledger);
        return Ok(());
    }
    let top = stack
        .last_mut()
        .ok_or_else(|| Error::Precondition("empty recipe stack".into()))?;
    let f = &top.factorization;
    let next = match s {
        Step::Hurwitz { pos, right } => {
            hurwitz_move(f, *pos, if *right { Direction::Right } else { Direction::Left })?
        }
        Step::Rename { old, new } => {
            let out = rename_curve(f, old, new)?;
            for (_, piece) in &mut top.summands {
                if piece.model.curves.contains_key(old) && !piece.model.curves.contains_key(new) {
                    *piece = rename_curve(piece, old, new)?;
                }
            }
            out
        }
        Step::Cap(v) => cap_boundary(f, v)?,
        Step::Release(v) => release_boundary(f, v)?,
        Step::Embed { label, model, map } => {
            let target = model.build()?;
            let mut pairs: Vec<(String, String)> = map.clone();
            for name in f.model.curves.keys() {
                if !map.iter().any(|(a, _)| a == name) && target.curves.contains_key(name) {
                    pairs.push((name.clone(), name.clone()));
                }
            }
            let pairs: Vec<(&str, &str)> =
                pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let out = embed(f, &Embedding::new(target.clone(), &pairs))?;
            // boundary twists landing on interior curves belong to the piece
            let interior: Vec<usize> = f
                .target
                .indices()
                .iter()
                .copied()
                .filter(|&b| {
                    let name = format!("d{b}");
                    pairs
                        .iter()
                        .find(|(a, _)| *a == name)
                        .and_then(|(_, img)| target.curves.get(*img))
                        .is_none_or(|c| c.boundary_index.is_none())
                })
                .collect();
            top.summands = vec![(label.clone(), release_boundary(f, &interior)?)];
            out
        }
        Step::Conjugate { range, phi } => partial_conjugate(f, range.clone(), phi)?,
        Step::Rotate(k) => rotate(f, *k)?,
        Step::Cancel(i, j) => {
            let c = f.curve_of(&f.twists[(*i).min(f.twists.len().saturating_sub(1))]).clone();
            let out = cancel_opposite_pair(f, *i, *j)?;
            top.ledger.push(CanceledPair { curve: c.name, separating: c.separating });
            out
        }
        Step::Commute { pos, block } => commute_past_block(f, *pos, block.clone())?,
        Step::BasePoints(m) => {
            let mut out = f.clone();
            out.base_points = Some(*m);
            out
        }
        Step::Base(_) | Step::Entry(_) | Step::Concat => unreachable!("handled above"),
    };
    top.factorization = next;
    Ok(())
}

fn hurwitz_right(positions: impl IntoIterator<Item = usize>) -> Vec<Step> {
    positions.into_iter().map(|pos| Step::Hurwitz { pos, right: true }).collect()
}

fn rename(old: &str, new: &str) -> Step {
    Step::Rename { old: old.into(), new: new.into() }
}

fn map(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// `(B0 B1 B2 C)^2` with the first `C` moved to the right end:
/// `B0 B1 B2 A0 A1 A2 C C`, where `A_j = t_C(B_j)`.
fn lift2_a() -> Vec<Step> {
    let mut v = vec![Step::Base(BaseId::Lift2)];
    v.extend(hurwitz_right(3..6));
    v.extend((0..3).map(|j| rename(&format!("B{j}@C"), &format!("A{j}"))));
    v
}

fn lift4_a() -> Vec<Step> {
    let mut v = vec![Step::Base(BaseId::Lift4)];
    v.extend(hurwitz_right(3..6));
    v.extend((0..3).map(|j| rename(&format!("B{j}_2@C1"), &format!("A{j}_2"))));
    v.push(Step::Release(vec![1, 2]));
    v
}

fn even_a(h: usize) -> Vec<Step> {
    let k = 2 * h + 1;
    let mut v = vec![Step::Base(BaseId::Even(h))];
    v.extend(hurwitz_right(k..2 * k));
    v.extend((0..k).map(|j| rename(&format!("B{j}@C"), &format!("A{j}"))));
    v
}

fn primed(n: usize) -> Vec<(String, String)> {
    (0..n)
        .flat_map(|j| {
            [(format!("B{j}"), format!("B'{j}")), (format!("A{j}"), format!("A'{j}"))]
        })
        .collect()
}

/// `X = P1 C ~C'` from the chain relation.
fn exotic_x() -> Vec<Step> {
    vec![
        Step::Base(BaseId::Chain2),
        Step::Hurwitz { pos: 5, right: true },
        rename("x4@C", "B2"),
        Step::Embed { label: "X".into(), model: ModelId::Exotic, map: map(&[("d1", "C'")]) },
    ]
}

/// `Z = P2 C C ~C'` from the two-boundary lift with one boundary capped.
fn exotic_z() -> Vec<Step> {
    let mut v = lift2_a();
    v.push(Step::Cap(vec![1]));
    v.push(Step::Embed { label: "Z".into(), model: ModelId::Exotic, map: map(&[("d1", "C'")]) });
    v
}

/// `Y = P2' C' C' ~C = t_∂`.
fn exotic_y() -> Vec<Step> {
    let mut v = lift2_a();
    let mut m = map(&[("d1", "C"), ("d2", "d1"), ("C", "C'")]);
    m.extend(primed(3));
    v.push(Step::Embed { label: "Y".into(), model: ModelId::Exotic, map: m });
    v
}

/// The conjugating map `t_{b1}^{-m1} t_{a2}^{m2}` of the exotic family.
pub fn exotic_phi(m1: i64, m2: i64) -> ConjugationWord {
    ConjugationWord::new(&[("b1", -m1), ("a2", m2)])
}

/// The conjugating map `t_{b1}^{-m1} t_{a3}^{m2}` of the Calabi–Yau family.
pub fn scy_phi(m1: i64, m2: i64) -> ConjugationWord {
    ConjugationWord::new(&[("b1", -m1), ("a3", m2)])
}

fn commute(pos: usize, start: usize) -> Step {
    Step::Commute { pos, block: start..start + 6 }
}

/// `W_i` for `i = 1, 2, 3` conjugated by `exotic_phi(m1, m2)`.
pub fn recipe_w_i(i: usize, m1: i64, m2: i64) -> Result<Recipe> {
    let phi = exotic_phi(m1, m2);
    let (first, second) = match i {
        1 => (exotic_x(), exotic_x()),
        2 => (exotic_x(), exotic_z()),
        3 => (exotic_z(), exotic_z()),
        _ => return Err(Error::Precondition(format!("W_i exists for i = 1, 2, 3, not {i}"))),
    };
    let mut steps = first;
    steps.push(Step::Conjugate { range: 0..6, phi });
    steps.extend(second);
    steps.push(Step::Concat);
    steps.extend(exotic_y());
    steps.push(Step::Rotate(6));
    steps.push(Step::Concat);
    // a = length of the conjugated block, b = length before Y
    let (a, b) = match i {
        1 => (8, 16),
        2 => (8, 17),
        _ => (9, 18),
    };
    steps.push(Step::Cancel(b - 1, b));
    steps.push(Step::Cancel(a - 1, b - 1));
    steps.push(Step::Cancel(b - 3, b - 2));
    // move every C to the right end
    match i {
        1 => steps.extend([commute(6, 7), commute(12, 13)]),
        2 => steps.extend([commute(13, 14), commute(6, 7), commute(12, 13)]),
        _ => steps.extend([
            commute(14, 15),
            commute(7, 8),
            commute(13, 14),
            commute(6, 7),
            commute(12, 13),
        ]),
    }
    Ok(Recipe { steps })
}

/// Two closed pieces glued along `C, C'`, then the four boundary twists cancel.
fn closed_pair(a: Vec<Step>, model: ModelId, p: usize, m_second: Vec<(String, String)>) -> Vec<Step> {
    let mut steps = a.clone();
    steps.push(Step::Release(vec![1, 2]));
    steps.push(Step::Embed {
        label: "P".into(),
        model,
        map: map(&[("d1", "C'"), ("d2", "C'")]),
    });
    steps.extend(a);
    steps.push(Step::Release(vec![1, 2]));
    steps.push(Step::Embed { label: "P'".into(), model, map: m_second });
    steps.push(Step::Rotate(p));
    steps.push(Step::Concat);
    for k in (p..p + 4).rev() {
        steps.push(Step::Cancel(k, k + 1));
    }
    steps.push(Step::BasePoints(4));
    steps
}

/// `W = P P'` on the closed genus-3 surface.
pub fn recipe_w() -> Recipe {
    let mut m = map(&[("d1", "C"), ("d2", "C"), ("C", "C'")]);
    m.extend(primed(3));
    Recipe { steps: closed_pair(lift2_a(), ModelId::Scy, 6, m) }
}

/// `K_h = P P'` on the closed genus-`(2h+1)` surface.
pub fn recipe_k(h: usize) -> Recipe {
    let mut m = map(&[("d1", "C"), ("d2", "C"), ("C", "C'")]);
    m.extend(primed(2 * h + 1));
    Recipe { steps: closed_pair(even_a(h), ModelId::Family(h), 4 * h + 2, m) }
}

/// `W_φ = P~^φ P~'` in genus 3 with four boundary components.
pub fn recipe_w_phi(phi: &ConjugationWord) -> Recipe {
    let mut steps = lift4_a();
    steps.push(Step::Embed {
        label: "P~".into(),
        model: ModelId::Scy4,
        map: map(&[("d1", "C'2"), ("d2", "C'1"), ("d3", "d2"), ("d4", "d1")]),
    });
    steps.push(Step::Conjugate { range: 0..6, phi: phi.clone() });
    steps.extend(lift4_a());
    let mut m = map(&[
        ("d1", "C2"),
        ("d2", "C1"),
        ("d3", "d3"),
        ("d4", "d4"),
        ("C1", "C'1"),
        ("C2", "C'2"),
    ]);
    for j in 0..3 {
        m.push((format!("B{j}_1"), format!("B'{j}_1")));
        m.push((format!("A{j}_2"), format!("A'{j}_2")));
    }
    steps.push(Step::Embed { label: "P~'".into(), model: ModelId::Scy4, map: m });
    steps.push(Step::Rotate(6));
    steps.push(Step::Concat);
    for k in (6..10).rev() {
        steps.push(Step::Cancel(k, k + 1));
    }
    Recipe { steps }
}

/// Fixed sample of conjugating maps supported away from the glued circles.
pub fn phi_samples() -> Vec<ConjugationWord> {
    let raw: [&[(&str, i64)]; 10] = [
        &[("b1", -1), ("a3", 1)],
        &[("a1", 1), ("b3", -1)],
        &[("b1", 2)],
        &[("a3", -3)],
        &[("a1", 1), ("b1", 1), ("a3", 1), ("b3", 1)],
        &[("b3", 2), ("a1", -1)],
        &[("b1", -2), ("a3", 2), ("b1", 1)],
        &[("a1", -1), ("b3", 1), ("a3", 2)],
        &[("b1", 1), ("a1", 1), ("b1", 1)],
        &[("a3", 1), ("b3", -1), ("a1", 1), ("b1", -3)],
    ];
    raw.iter().map(|f| ConjugationWord::new(f)).collect()
}

// ---------------------------------------------------------------------------
// entries

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    /// A number the construction is asserted to have.
    Stated,
    /// A consequence computed independently of the stated numbers.
    Derived,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Stated => write!(f, "stated"),
            Tag::Derived => write!(f, "derived"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub key: String,
    pub value: String,
    pub tag: Tag,
}

fn ex(key: &str, value: impl fmt::Display, tag: Tag) -> Expected {
    Expected { key: key.into(), value: value.to_string(), tag }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub factorization: Factorization,
    /// `None` for the base relations, which are data.
    pub recipe: Option<Recipe>,
    pub summands: Vec<(String, Factorization)>,
    pub ledger: Vec<CanceledPair>,
    pub expected: Vec<Expected>,
}

impl CatalogEntry {
    pub fn decomposition(&self) -> Result<Decomposition> {
        let s: Vec<Summand> = self
            .summands
            .iter()
            .map(|(label, f)| Summand::Factorization { label: label.clone(), f: Box::new(f.clone()) })
            .collect();
        signature_decomposition(&s, &self.ledger)
    }

    /// Replays the recipe and compares with the stored factorization.
    pub fn replay_matches(&self) -> Result<bool> {
        match &self.recipe {
            None => Ok(true),
            Some(r) => Ok(breed(r)?.factorization.normalize_elementary()
                == self.factorization.normalize_elementary()),
        }
    }
}

/// Ids listed by `catalog list`. `W1(m1,m2)`, `Wm(m1,m2)`, `K<h>` and
/// `even<h>` accept other parameters as well.
pub fn standard_ids() -> Vec<String> {
    let mut v: Vec<String> = ["lift2", "lift4", "chain2", "W1", "W2", "W3", "W"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend((1..=10).map(|k| format!("Wphi{k}")));
    v.extend((1..=4).map(|h| format!("K{h}")));
    v.extend((1..=5).map(|h| format!("even{h}")));
    v
}

fn parse_pair(s: &str) -> Option<(i64, i64)> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn unknown(id: &str) -> Error {
    Error::Data(format!("unknown catalog id `{id}`"))
}

pub fn entry(id: &str) -> Result<CatalogEntry> {
    let id = id.strip_prefix("catalog:").unwrap_or(id);
    match id {
        "lift2" => return lift2_entry(),
        "lift4" => return lift4_entry(),
        "chain2" => return chain2_entry(),
        "W" => return w_entry(),
        _ => {}
    }
    if let Some(rest) = id.strip_prefix("Wphi") {
        let k: usize = rest.parse().map_err(|_| unknown(id))?;
        let phi = phi_samples().get(k.wrapping_sub(1)).cloned().ok_or_else(|| unknown(id))?;
        return w_phi_entry(id, &phi, None);
    }
    if let Some(rest) = id.strip_prefix("Wm") {
        let (m1, m2) = parse_pair(rest).ok_or_else(|| unknown(id))?;
        return w_phi_entry(id, &scy_phi(m1, m2), Some((m1, m2)));
    }
    if let Some(rest) = id.strip_prefix('K') {
        let h: usize = rest.parse().map_err(|_| unknown(id))?;
        if h == 0 {
            return Err(unknown(id));
        }
        return k_entry(h);
    }
    if let Some(rest) = id.strip_prefix("even") {
        let h: usize = rest.parse().map_err(|_| unknown(id))?;
        if h == 0 {
            return Err(unknown(id));
        }
        return even_entry(h);
    }
    if let Some(rest) = id.strip_prefix('W') {
        let (i, params) = rest.split_at(rest.find('(').unwrap_or(rest.len()));
        let i: usize = i.parse().map_err(|_| unknown(id))?;
        let (m1, m2) = if params.is_empty() {
            (1, 1)
        } else {
            parse_pair(params).ok_or_else(|| unknown(id))?
        };
        if !(1..=3).contains(&i) {
            return Err(unknown(id));
        }
        return w_i_entry(id, i, m1, m2);
    }
    Err(unknown(id))
}

pub fn standard_entries() -> Result<Vec<CatalogEntry>> {
    standard_ids().iter().map(|id| entry(id)).collect()
}

fn data_entry(id: &str, description: &str, f: Factorization, expected: Vec<Expected>) -> CatalogEntry {
    CatalogEntry {
        id: id.into(),
        description: description.into(),
        summands: vec![(id.to_string(), f.clone())],
        factorization: f,
        recipe: None,
        ledger: Vec::new(),
        expected,
    }
}

fn bred_entry(id: &str, description: String, recipe: Recipe, expected: Vec<Expected>) -> Result<CatalogEntry> {
    let b = breed(&recipe)?;
    Ok(CatalogEntry {
        id: id.into(),
        description,
        factorization: b.factorization,
        recipe: Some(recipe),
        summands: b.summands,
        ledger: b.ledger,
        expected,
    })
}

fn lift2_entry() -> Result<CatalogEntry> {
    Ok(data_entry(
        "lift2",
        "(B0 B1 B2 C)^2 = t_d1 t_d2 in genus 2 with two boundary components",
        base(BaseId::Lift2)?,
        vec![
            ex("length", 8, Tag::Stated),
            ex("target", "d1 d2", Tag::Stated),
            ex("sp_verify", "PASS", Tag::Derived),
            ex("sigma_hyperelliptic", -4, Tag::Stated),
        ],
    ))
}

fn lift4_entry() -> Result<CatalogEntry> {
    Ok(data_entry(
        "lift4",
        "further lift of lift2 to genus 2 with four boundary components",
        base(BaseId::Lift4)?,
        vec![
            ex("length", 8, Tag::Stated),
            ex("target", "d1 d2 d3 d4", Tag::Stated),
            ex("sp_verify", "PASS", Tag::Derived),
        ],
    ))
}

fn chain2_entry() -> Result<CatalogEntry> {
    Ok(data_entry(
        "chain2",
        "e x1 x2 x3 d C x4 = t_d1 in genus 2 with one boundary component",
        base(BaseId::Chain2)?,
        vec![
            ex("length", 7, Tag::Stated),
            ex("target", "d1", Tag::Stated),
            ex("separating", "C d e", Tag::Stated),
            ex("sp_verify", "PASS", Tag::Derived),
        ],
    ))
}

fn even_entry(h: usize) -> Result<CatalogEntry> {
    Ok(data_entry(
        &format!("even{h}"),
        &format!("(B0 ⋯ B{} C)^2 = t_d1 t_d2 in genus {}", 2 * h, 2 * h),
        base(BaseId::Even(h))?,
        vec![
            ex("length", 4 * h + 4, Tag::Derived),
            ex("sp_verify", "PASS", Tag::Derived),
            ex("sigma_hyperelliptic", -4, Tag::Stated),
        ],
    ))
}

fn w_i_entry(id: &str, i: usize, m1: i64, m2: i64) -> Result<CatalogEntry> {
    let i64i = i as i64;
    let mut expected = vec![
        ex("length", 18 + i, Tag::Stated),
        ex("target", "d1", Tag::Stated),
        ex("sp_verify", "PASS", Tag::Derived),
        ex("h1", AbelianInvariants::from_cyclic(0, &[m1, m2]), Tag::Stated),
    ];
    if (m1, m2) == (1, 1) {
        expected.extend([
            ex("e_pencil", 9 + i64i, Tag::Stated),
            ex("sigma_pencil", -5 - i64i, Tag::Stated),
            ex("chi_h", 1, Tag::Stated),
            ex("c1sq_pencil", 3 - i64i, Tag::Stated),
            ex("sigma_decomposition", -6 - i64i, Tag::Derived),
            ex("pi1", "Certified trivial", Tag::Stated),
        ]);
    }
    bred_entry(
        id,
        format!("W{i} in genus 3 with one base point, φ = t_b1^-{m1} t_a2^{m2}"),
        recipe_w_i(i, m1, m2)?,
        expected,
    )
}

fn w_entry() -> Result<CatalogEntry> {
    bred_entry(
        "W",
        "W = P P' on the closed genus-3 surface, four base points".into(),
        recipe_w(),
        vec![
            ex("length", 12, Tag::Stated),
            ex("target", "1", Tag::Stated),
            ex("sp_verify", "PASS", Tag::Derived),
            ex("e_fib", 4, Tag::Stated),
            ex("sigma", -4, Tag::Stated),
            ex("c1sq_fib", -4, Tag::Stated),
            ex("scy", "PASS", Tag::Stated),
            ex("blown_down", "(0, 0, 0)", Tag::Stated),
            ex("sigma_decomposition", -4, Tag::Derived),
            ex("h1", AbelianInvariants::from_cyclic(4, &[]), Tag::Stated),
            ex("pi1", "Certified ℤ⁴", Tag::Stated),
        ],
    )
}

fn w_phi_entry(id: &str, phi: &ConjugationWord, m: Option<(i64, i64)>) -> Result<CatalogEntry> {
    let mut expected = vec![
        ex("length", 12, Tag::Stated),
        ex("target", "d1 d2 d3 d4", Tag::Stated),
        ex("sp_verify", "PASS", Tag::Derived),
        ex("e_fib", 4, Tag::Derived),
        ex("sigma", -4, Tag::Derived),
        ex("sigma_decomposition", -4, Tag::Derived),
    ];
    if let Some((m1, m2)) = m {
        expected.push(ex("h1", AbelianInvariants::from_cyclic(2, &[m1, m2]), Tag::Stated));
    }
    bred_entry(
        id,
        format!("P~^φ P~' in genus 3 with four boundary components, φ = {phi}"),
        recipe_w_phi(phi),
        expected,
    )
}

fn k_entry(h: usize) -> Result<CatalogEntry> {
    let g = 2 * h + 1;
    bred_entry(
        &format!("K{h}"),
        format!("P P' on the closed genus-{g} surface built from even{h}"),
        recipe_k(h),
        vec![
            ex("length", 8 * h + 4, Tag::Derived),
            ex("sp_verify", "PASS", Tag::Derived),
            ex("b1", 2 * h + 2, Tag::Stated),
            ex("sigma_decomposition", -4, Tag::Derived),
        ],
    )
}

// ---------------------------------------------------------------------------
// recomputation of expected values

/// Recomputes the quantity named `key` from scratch.
pub fn observe(e: &CatalogEntry, key: &str) -> Result<String> {
    let f = &e.factorization;
    let report = || InvariantReport::compute(f);
    Ok(match key {
        "length" => f.len().to_string(),
        "target" => match f.target.indices() {
            [] => "1".into(),
            v => v.iter().map(|i| format!("d{i}")).collect::<Vec<_>>().join(" "),
        },
        "separating" => {
            let mut v: Vec<&str> = f
                .twists
                .iter()
                .map(|t| f.curve_of(t))
                .filter(|c| c.separating && c.boundary_index.is_none())
                .map(|c| c.name.as_str())
                .collect();
            v.sort();
            v.dedup();
            v.join(" ")
        }
        "sp_verify" => if verify(f).pass { "PASS" } else { "FAIL" }.into(),
        "sigma_hyperelliptic" => signature_hyperelliptic(&cap_boundary(
            f,
            &(1..=f.surface().boundary_count).collect::<Vec<_>>(),
        )?)?
        .to_string(),
        "sigma_decomposition" => e.decomposition()?.total.to_string(),
        "sigma_meyer" => signature_meyer(f)?.to_string(),
        "h1" => h1_pipeline(f)?.to_string(),
        "b1" => h1_pipeline(f)?.rank.to_string(),
        "pi1" => pi1_report(f, Budget::from_env()?)?.to_string(),
        "e_fib" => report()?.e_fib.to_string(),
        "e_pencil" => report()?.e_pencil.to_string(),
        "sigma" => report()?.sigma.to_string(),
        "sigma_pencil" => {
            let r = report()?;
            (r.sigma + r.base_points as i64).to_string()
        }
        "c1sq_fib" => report()?.c1sq_fib.to_string(),
        "c1sq_pencil" => report()?.c1sq_pencil.to_string(),
        "chi_h" => match report()?.chi_h {
            Some(x) => x.to_string(),
            None => "non-integral".into(),
        },
        "scy" => report()?.predicates.scy,
        "blown_down" => format!("{:?}", scy_criterion(&report()?).blown_down),
        _ => return Err(Error::Data(format!("no observer for `{key}`"))),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCheck {
    pub key: String,
    pub tag: Tag,
    pub expected: String,
    pub observed: String,
    pub ok: bool,
}

pub fn check_expected(e: &CatalogEntry) -> Vec<ExpectedCheck> {
    e.expected
        .iter()
        .map(|x| {
            let observed = observe(e, &x.key).unwrap_or_else(|err| format!("error: {err}"));
            ExpectedCheck {
                key: x.key.clone(),
                tag: x.tag,
                ok: observed == x.value,
                expected: x.value.clone(),
                observed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::validate_curve;
    use crate::symplectic::product;

    #[test]
    fn models_validate() {
        let mut models = vec![
            lift2_model().unwrap(),
            lift4_model().unwrap(),
            chain2_model().unwrap(),
            exotic_model().unwrap(),
            scy_model().unwrap(),
            scy4_model().unwrap(),
        ];
        for h in 1..=4 {
            models.push(even_model(h).unwrap());
            models.push(family_model(h).unwrap());
        }
        for m in &models {
            for c in m.curves.values() {
                let r = validate_curve(c, &m.surface);
                assert!(r.is_valid(), "{} on {}: {:?}", c.name, m.surface, r.issues);
            }
        }
    }

    #[test]
    fn bases_verify() {
        for b in [BaseId::Lift2, BaseId::Lift4, BaseId::Chain2, BaseId::Even(1), BaseId::Even(3)] {
            assert!(verify(&base(b).unwrap()).pass, "{b}");
        }
    }

    #[test]
    fn lengths_match() {
        assert_eq!(entry("W1").unwrap().factorization.len(), 19);
        assert_eq!(entry("W2").unwrap().factorization.len(), 20);
        assert_eq!(entry("W3").unwrap().factorization.len(), 21);
        assert_eq!(entry("W").unwrap().factorization.len(), 12);
        assert_eq!(entry("K2").unwrap().factorization.len(), 20);
    }

    #[test]
    fn w1_shape() {
        let f = entry("W1").unwrap().factorization;
        assert_eq!(
            f.to_string(),
            "e{φ0} x1{φ0} x2{φ0} x3{φ0} d{φ0} B2{φ0} e x1 x2 x3 d B2 B'0 B'1 B'2 A'0 A'1 A'2 C = t_d1"
        );
        assert!(f.is_positive());
    }

    #[test]
    fn w_is_p_p_prime() {
        let f = entry("W").unwrap().factorization;
        assert_eq!(f.to_string(), "B0 B1 B2 A0 A1 A2 B'0 B'1 B'2 A'0 A'1 A'2 = 1");
        assert_eq!(f.base_points(), 4);
        assert!(product(&f).is_identity());
    }

    #[test]
    fn every_standard_entry_verifies() {
        for e in standard_entries().unwrap() {
            assert!(verify(&e.factorization).pass, "{}", e.id);
            assert!(e.replay_matches().unwrap(), "{}", e.id);
        }
    }

    #[test]
    fn broken_step_reports_index() {
        let mut r = recipe_w();
        let n = r.steps.len();
        r.steps[n - 2] = Step::Cancel(0, 1);
        let err = breed(&r).unwrap_err().to_string();
        assert!(err.contains(&format!("step {}", n - 2)), "{err}");
    }

    #[test]
    fn unknown_ids() {
        for id in ["W4", "K0", "Wphi11", "nope", "W1(1)"] {
            assert!(entry(id).is_err(), "{id}");
        }
        assert!(entry("catalog:W1(2,3)").is_ok());
    }
}
