//! The closure operator: intersection of supports over the version space.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::classes::{Hypothesis, HypothesisClass};
use crate::error::{Error, Result};
use crate::periodic::PeriodicSet;
use crate::space::{Example, Prompt, SpaceTag};

pub type MembershipFn = Arc<dyn Fn(&Example) -> bool + Send + Sync>;
pub type StreamFn = Arc<dyn Fn() -> Box<dyn Iterator<Item = Example>> + Send + Sync>;

/// A certified-infinite set, given by membership plus a rank-ascending stream.
#[derive(Clone)]
pub struct InfiniteSet {
    space: SpaceTag,
    membership: MembershipFn,
    stream: Option<StreamFn>,
    periodic: Option<PeriodicSet>,
    source: String,
}

impl InfiniteSet {
    pub fn periodic(space: SpaceTag, set: PeriodicSet, source: impl Into<String>) -> InfiniteSet {
        debug_assert!(!set.is_finite());
        let member = set.clone();
        InfiniteSet {
            space,
            membership: Arc::new(move |x| space.contains(x) && member.contains(x)),
            stream: None,
            periodic: Some(set),
            source: source.into(),
        }
    }

    pub fn from_fn(
        space: SpaceTag,
        source: impl Into<String>,
        membership: impl Fn(&Example) -> bool + Send + Sync + 'static,
    ) -> InfiniteSet {
        InfiniteSet { space, membership: Arc::new(membership), stream: None, periodic: None, source: source.into() }
    }

    pub fn with_stream(mut self, stream: StreamFn) -> InfiniteSet {
        self.stream = Some(stream);
        self
    }

    pub fn contains(&self, x: &Example) -> bool {
        (self.membership)(x)
    }

    /// Members in ascending rank order; each call is an independent cursor.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Example>> {
        match &self.stream {
            Some(s) => s(),
            None => {
                let m = self.membership.clone();
                Box::new(self.space.iter().filter(move |x| m(x)))
            }
        }
    }

    pub fn periodic_form(&self) -> Option<&PeriodicSet> {
        self.periodic.as_ref()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Merges rank-ascending streams into one rank-ascending stream without duplicates.
pub fn merge_streams(streams: Vec<Box<dyn Iterator<Item = Example>>>) -> Box<dyn Iterator<Item = Example>> {
    let mut heads: Vec<_> = streams.into_iter().map(|s| s.peekable()).collect();
    Box::new(std::iter::from_fn(move || {
        let next = heads.iter_mut().filter_map(|h| h.peek().copied()).min()?;
        for h in heads.iter_mut() {
            if h.peek() == Some(&next) {
                h.next();
            }
        }
        Some(next)
    }))
}

#[derive(Clone)]
pub enum ClosureSet {
    Bot,
    /// Rank-sorted, duplicate-free.
    Finite(Vec<Example>),
    Infinite(InfiniteSet),
}

impl fmt::Debug for ClosureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureSet::Bot => write!(f, "Bot"),
            ClosureSet::Finite(xs) => f.debug_tuple("Finite").field(xs).finish(),
            ClosureSet::Infinite(s) => write!(f, "Infinite({})", s.source),
        }
    }
}

impl ClosureSet {
    pub fn finite(mut xs: Vec<Example>) -> ClosureSet {
        xs.sort();
        xs.dedup();
        ClosureSet::Finite(xs)
    }

    /// Classifies an exact periodic intersection.
    pub fn from_periodic(space: SpaceTag, set: PeriodicSet, source: impl Into<String>) -> ClosureSet {
        match set.finite_elements() {
            Some(xs) => {
                ClosureSet::finite(xs.into_iter().map(Example::Int).filter(|x| space.contains(x)).collect())
            }
            None => ClosureSet::Infinite(InfiniteSet::periodic(space, set, source)),
        }
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, ClosureSet::Bot)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ClosureSet::Infinite(_))
    }

    pub fn finite_elements(&self) -> Option<&[Example]> {
        match self {
            ClosureSet::Finite(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Example) -> bool {
        match self {
            ClosureSet::Bot => false,
            ClosureSet::Finite(xs) => xs.binary_search(x).is_ok(),
            ClosureSet::Infinite(s) => s.contains(x),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = Example> + '_> {
        match self {
            ClosureSet::Bot => Box::new(std::iter::empty()),
            ClosureSet::Finite(xs) => Box::new(xs.iter().copied()),
            ClosureSet::Infinite(s) => s.iter(),
        }
    }

    /// The rank-smallest member not in `seen`.
    pub fn first_outside(&self, seen: &BTreeSet<Example>) -> Option<Example> {
        let budget = seen.len() + 1;
        self.iter().filter(|x| !seen.contains(x)).take(budget).next()
    }

    pub fn verdict(&self) -> CardinalityVerdict {
        match self {
            ClosureSet::Bot => CardinalityVerdict::IsBot,
            ClosureSet::Finite(xs) => CardinalityVerdict::ExactlyFinite(xs.len() as u64),
            ClosureSet::Infinite(_) => CardinalityVerdict::CertifiedInfinite,
        }
    }

    /// Serializable summary with the first few members of infinite sets.
    pub fn summary(&self) -> ClosureSummary {
        match self {
            ClosureSet::Bot => ClosureSummary::Bot,
            ClosureSet::Finite(xs) => ClosureSummary::Finite(xs.clone()),
            ClosureSet::Infinite(s) => {
                ClosureSummary::Infinite { certificate: s.source.clone(), first: s.iter().take(8).collect() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureSummary {
    Bot,
    Finite(Vec<Example>),
    Infinite { certificate: String, first: Vec<Example> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CardinalityVerdict {
    IsBot,
    ExactlyFinite(u64),
    CertifiedInfinite,
    UnknownAtLeast { count: u64, window: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Bot,
    In,
    Out,
}

fn positives(prefix: &[Example]) -> Vec<(Example, bool)> {
    prefix.iter().map(|&x| (x, true)).collect()
}

/// Closure membership through two ERM calls: the prefix must be realizable,
/// and forcing `x` negative must cost at least one mistake.
pub fn closure_membership(class: &HypothesisClass, prefix: &[Example], x: &Example) -> Result<Membership> {
    let mut sample = positives(prefix);
    if class.erm(&sample)? >= 1 {
        return Ok(Membership::Bot);
    }
    sample.push((*x, false));
    Ok(if class.erm(&sample)? >= 1 { Membership::In } else { Membership::Out })
}

/// The closure `<prefix>` of a binary class.
pub fn closure_set(class: &HypothesisClass, prefix: &[Example], window: u64) -> Result<ClosureSet> {
    prompted_closure_set(class, prefix, Prompt::ONE, window)
}

/// The prompted closure `<examples, prompt>`: intersection of `prompt`-supports
/// over members labeling every example with `prompt`.
pub fn prompted_closure_set(
    class: &HypothesisClass,
    examples: &[Example],
    prompt: Prompt,
    window: u64,
) -> Result<ClosureSet> {
    if window == 0 {
        return Err(Error::Precondition("window must be at least 1".into()));
    }
    if let Some(c) = exact_closure(class, examples, prompt) {
        return Ok(c);
    }
    match class.version_space_prompted(examples, prompt) {
        None => structured_window_closure(class, examples, window),
        Some(vs) => {
            let count = class
                .window(window)
                .iter()
                .filter(|x| vs.iter().all(|h: &Hypothesis| h.label(x) == prompt.get()))
                .count() as u64;
            Err(Error::UnclassifiableWithinWindow { count, window })
        }
    }
}

/// The closure when it can be decided without a window: from the class's
/// analytic rule, or by intersecting periodic member supports.
pub fn exact_closure(class: &HypothesisClass, examples: &[Example], prompt: Prompt) -> Option<ClosureSet> {
    if let Some(c) = class.model().analytic_closure(examples, prompt) {
        return Some(c);
    }
    let vs = class.version_space_prompted(examples, prompt)?;
    if vs.is_empty() {
        return Some(ClosureSet::Bot);
    }
    let parts: Vec<PeriodicSet> = vs.iter().map(|h| h.part(prompt.get())).collect::<Option<_>>()?;
    let inter = parts.iter().skip(1).fold(parts[0].clone(), |acc, s| acc.intersect(s));
    Some(ClosureSet::from_periodic(class.space(), inter, "periodic intersection"))
}

/// Intersection of two non-Bot closures, when finiteness of the result is decidable.
pub fn intersect_closures(a: &ClosureSet, b: &ClosureSet) -> Option<ClosureSet> {
    match (a, b) {
        (ClosureSet::Bot, _) | (_, ClosureSet::Bot) => Some(ClosureSet::Bot),
        (ClosureSet::Finite(xs), other) | (other, ClosureSet::Finite(xs)) => {
            Some(ClosureSet::Finite(xs.iter().copied().filter(|x| other.contains(x)).collect()))
        }
        (ClosureSet::Infinite(s), ClosureSet::Infinite(t)) => {
            let (p, q) = (s.periodic_form()?, t.periodic_form()?);
            let space = if s.space == t.space { s.space } else { SpaceTag::NatSpace };
            Some(ClosureSet::from_periodic(space, p.intersect(q), "periodic intersection"))
        }
    }
}

fn structured_window_closure(class: &HypothesisClass, prefix: &[Example], window: u64) -> Result<ClosureSet> {
    let mut sample = positives(prefix);
    if class.erm(&sample)? >= 1 {
        return Ok(ClosureSet::Bot);
    }
    let mut count = 0;
    for x in class.window(window) {
        sample.push((x, false));
        if class.erm(&sample)? >= 1 {
            count += 1;
        }
        sample.pop();
    }
    Err(Error::UnclassifiableWithinWindow { count, window })
}

/// Cardinality classification that reports window counts instead of failing.
pub fn classify(class: &HypothesisClass, prefix: &[Example], window: u64) -> Result<CardinalityVerdict> {
    match closure_set(class, prefix, window) {
        Ok(c) => Ok(c.verdict()),
        Err(Error::UnclassifiableWithinWindow { count, window }) => {
            Ok(CardinalityVerdict::UnknownAtLeast { count, window })
        }
        Err(e) => Err(e),
    }
}

/// The max-min oracle: the rank-smallest unseen example that every consistent
/// hypothesis labels positive, searched among the first `window` examples.
pub fn maxmin_next(class: &HypothesisClass, seen: &[Example], window: u64) -> Result<Example> {
    let mut sample = positives(seen);
    for x in class.window(window) {
        if seen.contains(&x) {
            continue;
        }
        sample.push((x, false));
        let loss = class.erm(&sample)?;
        sample.pop();
        if loss >= 1 {
            return Ok(x);
        }
    }
    Err(Error::WindowExhausted { window })
}
