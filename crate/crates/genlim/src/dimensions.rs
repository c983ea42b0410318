//! Closure, prompted closure, VC and Littlestone dimensions, and the EUC check.
//!
//! Infinite values cannot be computed; a search that reaches `d_max` reports
//! `AtLeast(d_max)`. `Exact` is only claimed when the search was complete and
//! the window is certified to be enough (explicit periodic classes) or the
//! class states the value analytically and the search agrees.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::classes::{DimValue, HypothesisClass};
use crate::closure::{prompted_closure_set, ClosureSet};
use crate::error::{Error, Result};
use crate::space::{Example, Prompt};

/// Default bound on closure or ERM calls for one search.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MistakeTree {
    Leaf,
    Node { x: Example, zero: Box<MistakeTree>, one: Box<MistakeTree> },
}

impl MistakeTree {
    pub fn node(x: Example, zero: MistakeTree, one: MistakeTree) -> MistakeTree {
        MistakeTree::Node { x, zero: Box::new(zero), one: Box::new(one) }
    }

    /// Depth of the shallowest leaf.
    pub fn depth(&self) -> u64 {
        match self {
            MistakeTree::Leaf => 0,
            MistakeTree::Node { zero, one, .. } => 1 + zero.depth().min(one.depth()),
        }
    }

    /// Root-to-leaf labeled paths.
    pub fn paths(&self) -> Vec<Vec<(Example, bool)>> {
        match self {
            MistakeTree::Leaf => vec![Vec::new()],
            MistakeTree::Node { x, zero, one } => {
                let mut out = Vec::new();
                for (y, sub) in [(false, zero), (true, one)] {
                    for mut p in sub.paths() {
                        p.insert(0, (*x, y));
                        out.push(p);
                    }
                }
                out
            }
        }
    }

    /// Whether every path is realized by some member (ERM loss zero).
    pub fn shattered_by(&self, class: &HypothesisClass) -> Result<bool> {
        for p in self.paths() {
            if class.erm(&p)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The tree that queries `xs[k]` at every node of level `k`.
    pub fn from_shattered(xs: &[Example]) -> MistakeTree {
        match xs.split_first() {
            None => MistakeTree::Leaf,
            Some((x, rest)) => MistakeTree::node(*x, MistakeTree::from_shattered(rest), MistakeTree::from_shattered(rest)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The distinct examples realizing the value.
    pub examples: Vec<Example>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<Prompt>,
    /// The (finite) closure of `examples`, for closure-type dimensions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<Vec<Example>>,
    /// ERM loss of each labeling of `examples`, indexed by bitmask (bit i = label of examples[i]).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shattering: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<MistakeTree>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimResult {
    Exact { d: u64, witness: Witness },
    /// `growth` is set when witnesses were found for every size up to `d`.
    AtLeast { d: u64, witness: Witness, growth: bool },
    Zero,
}

impl DimResult {
    pub fn value(&self) -> u64 {
        match self {
            DimResult::Exact { d, .. } | DimResult::AtLeast { d, .. } => *d,
            DimResult::Zero => 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DimResult::Exact { .. } | DimResult::Zero)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            DimResult::Exact { witness, .. } | DimResult::AtLeast { witness, .. } => Some(witness),
            DimResult::Zero => None,
        }
    }
}

fn precondition(d_max: u64, window: u64) -> Result<()> {
    if d_max == 0 || window == 0 {
        return Err(Error::Precondition("d_max and window must be at least 1".into()));
    }
    Ok(())
}

/// Decides between Exact and AtLeast and checks the search against stated facts.
fn finish(
    best: u64,
    d_max: u64,
    complete: bool,
    window_certified: bool,
    fact: Option<DimValue>,
    witness: Witness,
    growth: bool,
    what: &str,
) -> Result<DimResult> {
    if let Some(DimValue::Finite(f)) = fact {
        if best > f {
            return Err(Error::InvariantViolation(format!("{what}: search found {best}, class states {f}")));
        }
    }
    if best == 0 {
        return Ok(DimResult::Zero);
    }
    let certified = window_certified || fact == Some(DimValue::Finite(best));
    if complete && best < d_max && certified {
        Ok(DimResult::Exact { d: best, witness })
    } else {
        Ok(DimResult::AtLeast { d: best, witness, growth })
    }
}

struct ClosedSearch {
    best: u64,
    /// Generator and closed set giving the best witness.
    best_set: Option<(Vec<Example>, Vec<Example>)>,
    witnessed: BTreeSet<u64>,
    complete: bool,
}

/// Depth-first search over finite closed sets generated inside the window.
/// Closures only grow when examples are added, so infinite or Bot closures
/// end a branch. Extensions depend only on the closed set, so each one is
/// expanded once.
fn closed_set_search(
    class: &HypothesisClass,
    prompt: Prompt,
    d_max: u64,
    window: u64,
    budget: u64,
) -> Result<ClosedSearch> {
    let xs = class.window(window);
    let mut steps = 0u64;
    let mut out = ClosedSearch { best: 0, best_set: None, witnessed: BTreeSet::new(), complete: true };
    let mut seen: BTreeSet<Vec<Example>> = BTreeSet::new();
    let mut stack: Vec<(Vec<Example>, Vec<Example>)> = vec![(Vec::new(), Vec::new())];
    while let Some((gen, closed)) = stack.pop() {
        let k = gen.len() as u64 + 1;
        for x in xs.iter().rev() {
            if closed.binary_search(x).is_ok() {
                continue;
            }
            steps += 1;
            if steps > budget {
                out.complete = false;
                return Ok(out);
            }
            let mut g = gen.clone();
            g.push(*x);
            let ClosureSet::Finite(c) = prompted_closure_set(class, &g, prompt, window)? else {
                continue;
            };
            if !seen.insert(c.clone()) {
                continue;
            }
            let size = c.len() as u64;
            out.witnessed.extend(k..=size.min(d_max));
            let better = size.min(d_max) > out.best
                || (size == d_max && out.best_set.as_ref().is_some_and(|(_, b)| b.len() as u64 != d_max));
            if better {
                out.best = size.min(d_max);
                out.best_set = Some((g.clone(), c.clone()));
            }
            if size == d_max {
                out.complete = false;
                return Ok(out);
            }
            if size < d_max {
                stack.push((g, c));
            }
        }
    }
    Ok(out)
}

/// Witness of size `d` from a generator and its closed set.
fn closed_witness(gen: &[Example], closed: &[Example], d: u64, prompt: Option<Prompt>) -> Witness {
    let examples: Vec<Example> = if closed.len() as u64 == d {
        closed.to_vec()
    } else {
        let mut ex = gen.to_vec();
        ex.extend(closed.iter().filter(|x| !gen.contains(x)).take(d as usize - gen.len()));
        ex.sort();
        ex
    };
    Witness { examples, prompt, closure: Some(closed.to_vec()), ..Witness::default() }
}

pub fn closure_dimension(class: &HypothesisClass, d_max: u64, window: u64) -> Result<DimResult> {
    closure_dimension_with_budget(class, d_max, window, DEFAULT_BUDGET)
}

pub fn closure_dimension_with_budget(
    class: &HypothesisClass,
    d_max: u64,
    window: u64,
    budget: u64,
) -> Result<DimResult> {
    precondition(d_max, window)?;
    let s = closed_set_search(class, Prompt::ONE, d_max, window, budget)?;
    let certified = class.exact_window().is_some_and(|w| w <= window);
    let witness = s.best_set.as_ref().map(|(g, c)| closed_witness(g, c, s.best, None)).unwrap_or_default();
    let growth = (1..=s.best).all(|d| s.witnessed.contains(&d));
    finish(s.best, d_max, s.complete, certified, class.facts().closure, witness, growth, "closure dimension")
}

/// Largest label used by an explicit periodic class, if every member is periodic.
fn max_label(class: &HypothesisClass) -> Option<u64> {
    let members = class.members()?;
    let mut top = 1;
    for h in members {
        h.periodic_support()?;
        top = top.max((1..=64).rev().find(|&y| h.part(y).is_some_and(|s| !s.is_empty())).unwrap_or(1));
    }
    Some(top)
}

pub fn prompted_closure_dimension(
    class: &HypothesisClass,
    d_max: u64,
    window: u64,
    prompt_window: u64,
) -> Result<DimResult> {
    precondition(d_max, window)?;
    if prompt_window == 0 {
        return Err(Error::Precondition("prompt_window must be at least 1".into()));
    }
    let mut best: Option<(u64, Prompt, ClosedSearch)> = None;
    let mut complete = true;
    let mut witnessed = BTreeSet::new();
    for y in 1..=prompt_window {
        let prompt = Prompt::new(y).unwrap();
        let s = closed_set_search(class, prompt, d_max, window, DEFAULT_BUDGET)?;
        complete &= s.complete;
        witnessed.extend(s.witnessed.iter().copied());
        if best.as_ref().map_or(true, |(b, _, _)| s.best > *b) {
            best = Some((s.best, prompt, s));
        }
    }
    let (value, prompt, s) = best.unwrap();
    let certified = class.exact_window().is_some_and(|w| w <= window)
        && max_label(class).is_some_and(|top| top <= prompt_window);
    let witness =
        s.best_set.as_ref().map(|(g, c)| closed_witness(g, c, value, Some(prompt))).unwrap_or_default();
    let growth = (1..=value).all(|d| witnessed.contains(&d));
    let fact = class.facts().prompted_closure;
    finish(value, d_max, complete, certified, fact, witness, growth, "prompted closure dimension")
}

/// ERM losses of every labeling of `xs`.
fn shattering_table(class: &HypothesisClass, xs: &[Example]) -> Result<Vec<u64>> {
    (0u64..1 << xs.len())
        .map(|mask| {
            let sample: Vec<(Example, bool)> = xs.iter().enumerate().map(|(i, x)| (*x, mask >> i & 1 == 1)).collect();
            class.erm(&sample)
        })
        .collect()
}

pub fn vc_dimension(class: &HypothesisClass, d_max: u64, window: u64) -> Result<DimResult> {
    precondition(d_max, window)?;
    let xs = class.window(window);
    let mut best: Vec<usize> = Vec::new();
    let mut steps = 0u64;
    let mut complete = true;
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    'search: while let Some(set) = stack.pop() {
        let start = set.last().map_or(0, |&i| i + 1);
        for i in (start..xs.len()).rev() {
            let mut t = set.clone();
            t.push(i);
            let pts: Vec<Example> = t.iter().map(|&j| xs[j]).collect();
            steps += 1 << pts.len();
            if steps > DEFAULT_BUDGET {
                complete = false;
                break 'search;
            }
            if shattering_table(class, &pts)?.iter().all(|&l| l == 0) {
                if t.len() > best.len() {
                    best = t.clone();
                }
                if t.len() as u64 >= d_max {
                    complete = false;
                    break 'search;
                }
                stack.push(t);
            }
        }
    }
    let pts: Vec<Example> = best.iter().map(|&j| xs[j]).collect();
    let witness = Witness { shattering: Some(shattering_table(class, &pts)?), examples: pts, ..Witness::default() };
    let certified = class.exact_window().is_some_and(|w| w <= window);
    finish(best.len() as u64, d_max, complete, certified, class.facts().vc, witness, true, "VC dimension")
}

/// Littlestone search over an explicit class with version spaces as bitsets.
struct TreeSearch {
    columns: Vec<(Example, Vec<u64>)>,
    memo: HashMap<Vec<u64>, u64>,
    cap: u64,
}

impl TreeSearch {
    fn split(&self, vs: &[u64], col: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let one: Vec<u64> = vs.iter().zip(col).map(|(a, b)| a & b).collect();
        let zero: Vec<u64> = vs.iter().zip(col).map(|(a, b)| a & !b).collect();
        (zero, one)
    }

    fn value(&mut self, vs: &[u64]) -> u64 {
        if let Some(&v) = self.memo.get(vs) {
            return v;
        }
        let size: u32 = vs.iter().map(|w| w.count_ones()).sum();
        let mut best = 0;
        if size >= 2 {
            for i in 0..self.columns.len() {
                let (zero, one) = self.split(vs, &self.columns[i].1);
                if zero.iter().all(|&w| w == 0) || one.iter().all(|&w| w == 0) {
                    continue;
                }
                let a = self.value(&zero);
                if a < best {
                    continue;
                }
                let v = 1 + a.min(self.value(&one));
                best = best.max(v);
                if best >= self.cap {
                    break;
                }
            }
        }
        self.memo.insert(vs.to_vec(), best);
        best
    }

    fn tree(&mut self, vs: &[u64], depth: u64) -> MistakeTree {
        if depth == 0 {
            return MistakeTree::Leaf;
        }
        for i in 0..self.columns.len() {
            let (zero, one) = self.split(vs, &self.columns[i].1);
            if zero.iter().all(|&w| w == 0) || one.iter().all(|&w| w == 0) {
                continue;
            }
            if self.value(&zero) >= depth - 1 && self.value(&one) >= depth - 1 {
                let x = self.columns[i].0;
                return MistakeTree::node(x, self.tree(&zero, depth - 1), self.tree(&one, depth - 1));
            }
        }
        unreachable!("value promised a tree of depth {depth}")
    }
}

pub fn littlestone_dimension(class: &HypothesisClass, d_max: u64, window: u64) -> Result<DimResult> {
    precondition(d_max, window)?;
    let fact = class.facts().littlestone;
    let Some(members) = class.members() else {
        return structured_littlestone(class, d_max, window, fact);
    };
    let words = members.len().div_ceil(64);
    let mut columns: BTreeMap<Vec<u64>, Example> = BTreeMap::new();
    for x in class.window(window) {
        let mut col = vec![0u64; words];
        for (i, h) in members.iter().enumerate() {
            if h.contains(&x) {
                col[i / 64] |= 1 << (i % 64);
            }
        }
        columns.entry(col).or_insert(x);
    }
    let mut columns: Vec<(Example, Vec<u64>)> = columns.into_iter().map(|(c, x)| (x, c)).collect();
    columns.sort_by(|a, b| a.0.cmp(&b.0));
    let mut full = vec![0u64; words];
    for i in 0..members.len() {
        full[i / 64] |= 1 << (i % 64);
    }
    let mut search = TreeSearch { columns, memo: HashMap::new(), cap: d_max };
    let best = search.value(&full).min(d_max);
    let tree = search.tree(&full, best);
    let examples = tree_examples(&tree);
    let witness = Witness { examples, tree: Some(tree), ..Witness::default() };
    let certified = class.exact_window().is_some_and(|w| w <= window);
    finish(best, d_max, best < d_max, certified, fact, witness, true, "Littlestone dimension")
}

fn tree_examples(tree: &MistakeTree) -> Vec<Example> {
    let mut out = BTreeSet::new();
    let mut stack = vec![tree];
    while let Some(t) = stack.pop() {
        if let MistakeTree::Node { x, zero, one } = t {
            out.insert(*x);
            stack.push(zero);
            stack.push(one);
        }
    }
    out.into_iter().collect()
}

/// Intensional classes: a stated value plus a verified tree, or a verified
/// tree of depth `d_max` (from the class, or from a shattered set).
fn structured_littlestone(
    class: &HypothesisClass,
    d_max: u64,
    window: u64,
    fact: Option<DimValue>,
) -> Result<DimResult> {
    let target = match fact {
        Some(DimValue::Finite(f)) => f.min(d_max),
        _ => d_max,
    };
    let mut tree = class.model().littlestone_witness(target);
    if tree.is_none() {
        let vc = vc_dimension(class, target.max(1), window)?;
        if vc.value() >= target {
            tree = vc.witness().map(|w| MistakeTree::from_shattered(&w.examples));
        }
    }
    let tree = match tree {
        Some(t) if t.shattered_by(class)? => t,
        Some(_) => return Err(Error::InvariantViolation("stated mistake tree is not shattered".into())),
        None if fact.is_none() => return Err(Error::StructuredWithoutEnumeration(class.descriptor())),
        None => return Err(Error::NoWitness { d: target }),
    };
    let witness = Witness { examples: tree_examples(&tree), tree: Some(tree), ..Witness::default() };
    if target == 0 {
        return Ok(DimResult::Zero);
    }
    Ok(match fact {
        Some(DimValue::Finite(f)) if f < d_max => DimResult::Exact { d: f, witness },
        _ => DimResult::AtLeast { d: target, witness, growth: true },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EucOutcome {
    FirstTime(u64),
    NotWithinHorizon,
}

/// First round at which the closure of the stream prefix is infinite or Bot.
pub fn euc_first_time(class: &HypothesisClass, stream: &[Example], horizon: u64, window: u64) -> Result<EucOutcome> {
    for t in 1..=horizon.min(stream.len() as u64) {
        match prompted_closure_set(class, &stream[..t as usize], Prompt::ONE, window)? {
            ClosureSet::Finite(_) => {}
            _ => return Ok(EucOutcome::FirstTime(t)),
        }
    }
    Ok(EucOutcome::NotWithinHorizon)
}
