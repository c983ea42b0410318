//! Hypotheses, hypothesis classes, the ERM oracle and UUS certificates.

mod fixtures;
mod towers;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::closure::ClosureSet;
use crate::dimensions::MistakeTree;
use crate::error::{Error, Result};
use crate::periodic::PeriodicSet;
use crate::space::{lcm, Example, Prompt, SpaceTag};

pub use fixtures::{
    all_ones_member, cofinite_member, finite_subset, finite_tailed, fixture, fixture_names, he_ho, in_q,
    nonpositive_member, prompted_tailed, prime_power_bits_truncation, rational_level, rational_member, singleton_member,
    threshold_member, union, FixtureParams,
};
pub use towers::{
    bits_member, bounded_profiles, naturals_member, profiles, tower_chain, tower_index, tower_member, TowerProfile,
};

pub type LabelFn = Arc<dyn Fn(&Example) -> u64 + Send + Sync>;
/// Rank-ascending enumeration of the examples carrying a given label.
pub type SupportFn = Arc<dyn Fn(u64) -> Box<dyn Iterator<Item = Example>> + Send + Sync>;

/// A labeling of the example space. Binary hypotheses use labels {0, 1};
/// prompted hypotheses use labels >= 1.
#[derive(Clone)]
pub struct Hypothesis {
    descriptor: String,
    space: SpaceTag,
    label: LabelFn,
    /// Exact label classes as eventually periodic sets, when available.
    parts: Option<Arc<Vec<(u64, PeriodicSet)>>>,
    support: Option<SupportFn>,
    unbounded: bool,
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypothesis({})", self.descriptor)
    }
}

impl Hypothesis {
    /// Binary hypothesis whose support is an eventually periodic set.
    pub fn periodic(descriptor: impl Into<String>, space: SpaceTag, support: PeriodicSet) -> Hypothesis {
        let unbounded = !support.is_finite();
        let rest = PeriodicSet::all().minus(&support);
        Hypothesis::partitioned(descriptor, space, vec![(1, support), (0, rest)], unbounded)
    }

    /// Hypothesis given by label classes that partition the integers.
    pub fn partitioned(
        descriptor: impl Into<String>,
        space: SpaceTag,
        parts: Vec<(u64, PeriodicSet)>,
        unbounded: bool,
    ) -> Hypothesis {
        let parts = Arc::new(parts);
        let lookup = parts.clone();
        let label: LabelFn = Arc::new(move |x: &Example| {
            if !space.contains(x) {
                return 0;
            }
            lookup.iter().find(|(_, s)| s.contains(x)).map_or(0, |(y, _)| *y)
        });
        Hypothesis { descriptor: descriptor.into(), space, label, parts: Some(parts), support: None, unbounded }
    }

    /// Hypothesis given only by its labeling function.
    pub fn from_fn(
        descriptor: impl Into<String>,
        space: SpaceTag,
        unbounded: bool,
        label: impl Fn(&Example) -> u64 + Send + Sync + 'static,
    ) -> Hypothesis {
        Hypothesis {
            descriptor: descriptor.into(),
            space,
            label: Arc::new(label),
            parts: None,
            support: None,
            unbounded,
        }
    }

    /// Replaces the default support enumeration (a filtered walk of the space).
    pub fn with_support(mut self, support: SupportFn) -> Hypothesis {
        self.support = Some(support);
        self
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    pub fn label(&self, x: &Example) -> u64 {
        (self.label)(x)
    }

    /// Binary membership in the support.
    pub fn contains(&self, x: &Example) -> bool {
        self.label(x) == 1
    }

    /// The exact label class for `y`, if this hypothesis is periodic.
    pub fn part(&self, y: u64) -> Option<PeriodicSet> {
        self.parts
            .as_ref()
            .map(|ps| ps.iter().find(|(l, _)| *l == y).map_or_else(PeriodicSet::empty, |(_, s)| s.clone()))
    }

    /// Exact binary support, if periodic.
    pub fn periodic_support(&self) -> Option<PeriodicSet> {
        self.part(1)
    }

    pub fn is_periodic(&self) -> bool {
        self.parts.is_some()
    }

    /// Analytic certificate that every label class used is infinite.
    pub fn unbounded(&self) -> bool {
        self.unbounded
    }

    /// Examples with label `y`, ascending by rank. Never terminates on an
    /// infinite support; callers take a prefix.
    pub fn support_with(&self, y: u64) -> Box<dyn Iterator<Item = Example>> {
        match &self.support {
            Some(f) => f(y),
            None => {
                let label = self.label.clone();
                Box::new(self.space.iter().filter(move |x| label(x) == y))
            }
        }
    }

    /// Binary support, ascending by rank.
    pub fn support(&self) -> Box<dyn Iterator<Item = Example>> {
        self.support_with(1)
    }

    /// Largest |x| that matters for the periodic description of this hypothesis.
    fn extent(&self) -> Option<(u64, u64)> {
        let parts = self.parts.as_ref()?;
        let e = parts.iter().map(|(_, s)| s.extent()).max().unwrap_or(0);
        let p = parts.iter().map(|(_, s)| s.period()).fold(1, lcm);
        Some((e, p))
    }
}

/// A labeled sample; labels are 0 or 1.
pub type LabeledSample = [(Example, bool)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Countability {
    Finite(usize),
    CountablyInfinite,
    Uncountable,
}

/// A dimension value known analytically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DimValue {
    Finite(u64),
    Infinite,
}

impl DimValue {
    pub fn is_finite(self) -> bool {
        matches!(self, DimValue::Finite(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DimensionFacts {
    pub closure: Option<DimValue>,
    pub prompted_closure: Option<DimValue>,
    pub vc: Option<DimValue>,
    pub littlestone: Option<DimValue>,
    pub euc: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    Analytic,
    EmpiricalUpTo(u64),
    Violated(String),
}

/// Support inclusion between two members, when it can be certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SupportRelation {
    Equal,
    ProperSubset,
    ProperSuperset,
    Incomparable,
}

/// The behaviour a hypothesis class exposes to the rest of the crate.
/// Only `descriptor`, `space` and `countability` are mandatory; explicit
/// classes get ERM and closures from their member list.
pub trait ClassModel: Send + Sync {
    fn descriptor(&self) -> String;
    fn space(&self) -> SpaceTag;
    fn countability(&self) -> Countability;

    fn prompted(&self) -> bool {
        false
    }

    /// Analytic certificate that every support (every prompt support) is infinite.
    fn uus_analytic(&self) -> bool {
        false
    }

    /// The member list of an explicit finite class.
    fn members(&self) -> Option<&[Hypothesis]> {
        None
    }

    /// A fixed enumeration of (a countable part of) the class.
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        self.members().and_then(|m| m.get(i).cloned())
    }

    /// Analytic ERM; `None` means "no rule" (explicit classes fall back to brute force).
    fn analytic_erm(&self, _sample: &LabeledSample) -> Option<u64> {
        None
    }

    /// Analytic closure `<prefix, prompt>`; `None` defers to the generic engine.
    fn analytic_closure(&self, _prefix: &[Example], _prompt: Prompt) -> Option<ClosureSet> {
        None
    }

    fn facts(&self) -> DimensionFacts {
        DimensionFacts::default()
    }

    /// Certified support relation between two members.
    fn relation(&self, _a: &Hypothesis, _b: &Hypothesis) -> Option<SupportRelation> {
        None
    }

    /// A member whose support contains `s` and is strictly inside `supp(h)`,
    /// from an analytic rule valid for every finite `s`.
    fn telltale_refuter(&self, _h: &Hypothesis, _s: &[Example]) -> Option<Hypothesis> {
        None
    }

    /// The least consistent member under support inclusion, if the class
    /// has one and knows it analytically.
    fn minimal_consistent(&self, _positives: &[Example]) -> Option<Hypothesis> {
        None
    }

    /// A shattered mistake tree of the requested depth.
    fn littlestone_witness(&self, _depth: u64) -> Option<MistakeTree> {
        None
    }

    /// Whether `h` belongs to the class, by analytic test.
    fn contains_hypothesis(&self, _h: &Hypothesis) -> Option<bool> {
        None
    }
}

/// A hypothesis class: a shared, immutable model.
#[derive(Clone)]
pub struct HypothesisClass {
    model: Arc<dyn ClassModel>,
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HypothesisClass({})", self.descriptor())
    }
}

impl HypothesisClass {
    pub fn new(model: impl ClassModel + 'static) -> HypothesisClass {
        HypothesisClass { model: Arc::new(model) }
    }

    /// An explicit binary class.
    pub fn explicit(name: impl Into<String>, space: SpaceTag, members: Vec<Hypothesis>) -> HypothesisClass {
        HypothesisClass::new(ExplicitClass::new(name, space, members, false))
    }

    /// An explicit prompted class.
    pub fn explicit_prompted(name: impl Into<String>, space: SpaceTag, members: Vec<Hypothesis>) -> HypothesisClass {
        HypothesisClass::new(ExplicitClass::new(name, space, members, true))
    }

    pub fn model(&self) -> &dyn ClassModel {
        self.model.as_ref()
    }

    pub fn descriptor(&self) -> String {
        self.model.descriptor()
    }

    pub fn space(&self) -> SpaceTag {
        self.model.space()
    }

    pub fn countability(&self) -> Countability {
        self.model.countability()
    }

    pub fn prompted(&self) -> bool {
        self.model.prompted()
    }

    pub fn members(&self) -> Option<&[Hypothesis]> {
        self.model.members()
    }

    pub fn is_explicit(&self) -> bool {
        self.members().is_some()
    }

    pub fn facts(&self) -> DimensionFacts {
        self.model.facts()
    }

    pub fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        self.model.enumerate(i)
    }

    /// The first `n` members of the class enumeration.
    pub fn prefix(&self, n: usize) -> Result<Vec<Hypothesis>> {
        (0..n)
            .map(|i| self.enumerate(i).ok_or_else(|| Error::StructuredWithoutEnumeration(self.descriptor())))
            .collect()
    }

    /// Minimal empirical loss over the class.
    pub fn erm(&self, sample: &LabeledSample) -> Result<u64> {
        if let Some(v) = self.model.analytic_erm(sample) {
            return Ok(v);
        }
        match self.members() {
            Some([]) => Err(Error::EmptyClass),
            Some(members) => Ok(members
                .iter()
                .map(|h| sample.iter().filter(|(x, y)| h.contains(x) != *y).count() as u64)
                .min()
                .unwrap()),
            None => Err(Error::StructuredWithoutErm(self.descriptor())),
        }
    }

    /// Members whose `prompt`-support contains every example (explicit classes).
    pub fn version_space_prompted(&self, examples: &[Example], prompt: Prompt) -> Option<Vec<Hypothesis>> {
        self.members().map(|ms| {
            ms.iter().filter(|h| examples.iter().all(|x| h.label(x) == prompt.get())).cloned().collect()
        })
    }

    /// Members whose support contains every positive (explicit classes).
    pub fn version_space(&self, positives: &[Example]) -> Option<Vec<Hypothesis>> {
        self.version_space_prompted(positives, Prompt::ONE)
    }

    /// Certified support relation; exact for periodic members.
    pub fn relation(&self, a: &Hypothesis, b: &Hypothesis) -> Option<SupportRelation> {
        if let Some(r) = self.model.relation(a, b) {
            return Some(r);
        }
        let (sa, sb) = (a.periodic_support()?, b.periodic_support()?);
        Some(match (sa.is_subset(&sb), sb.is_subset(&sa)) {
            (true, true) => SupportRelation::Equal,
            (true, false) => SupportRelation::ProperSubset,
            (false, true) => SupportRelation::ProperSuperset,
            (false, false) => SupportRelation::Incomparable,
        })
    }

    /// Window size from which dimension searches over an explicit periodic
    /// class are exact: every point outside it has a label-identical twin inside.
    pub fn exact_window(&self) -> Option<u64> {
        let members = self.members()?;
        let mut extent = 0;
        let mut period = 1;
        for h in members {
            let (e, p) = h.extent()?;
            extent = extent.max(e);
            period = lcm(period, p);
        }
        let radius = extent + period;
        Some(match self.space() {
            SpaceTag::IntSpace => 2 * radius + 1,
            SpaceTag::NatSpace => radius,
            SpaceTag::PosRatSpace => return None,
        })
    }

    /// The first `window` elements of the class's space.
    pub fn window(&self, window: u64) -> Vec<Example> {
        self.space().window(window)
    }
}

/// A finite explicit list of hypotheses.
pub struct ExplicitClass {
    name: String,
    space: SpaceTag,
    members: Vec<Hypothesis>,
    prompted: bool,
    facts: DimensionFacts,
}

impl ExplicitClass {
    pub fn new(name: impl Into<String>, space: SpaceTag, members: Vec<Hypothesis>, prompted: bool) -> ExplicitClass {
        let mut seen = std::collections::HashSet::new();
        for h in &members {
            assert!(seen.insert(h.descriptor().to_string()), "duplicate member {}", h.descriptor());
        }
        ExplicitClass { name: name.into(), space, members, prompted, facts: DimensionFacts::default() }
    }

    pub fn with_facts(mut self, facts: DimensionFacts) -> ExplicitClass {
        self.facts = facts;
        self
    }
}

impl ClassModel for ExplicitClass {
    fn descriptor(&self) -> String {
        self.name.clone()
    }
    fn space(&self) -> SpaceTag {
        self.space
    }
    fn countability(&self) -> Countability {
        Countability::Finite(self.members.len())
    }
    fn prompted(&self) -> bool {
        self.prompted
    }
    fn uus_analytic(&self) -> bool {
        self.members.iter().all(|h| h.unbounded())
    }
    fn members(&self) -> Option<&[Hypothesis]> {
        Some(&self.members)
    }
    fn facts(&self) -> DimensionFacts {
        self.facts
    }
}

/// Certifies unbounded supports: analytically when the class can, otherwise by
/// counting support elements among the first `window` elements of the space.
pub fn check_uus(class: &HypothesisClass, window: u64) -> Result<Certificate> {
    if window == 0 {
        return Err(Error::Precondition("window must be at least 1".into()));
    }
    if class.model.uus_analytic() {
        return Ok(Certificate::Analytic);
    }
    let members = class.members().ok_or_else(|| Error::StructuredWithoutEnumeration(class.descriptor()))?;
    let xs = class.window(window);
    for h in members {
        let finite = h.periodic_support().is_some_and(|s| s.is_finite());
        if finite || !xs.iter().any(|x| h.contains(x)) {
            return Ok(Certificate::Violated(h.descriptor().to_string()));
        }
    }
    Ok(Certificate::EmpiricalUpTo(window))
}

/// Prompted analogue of [`check_uus`]: every (member, prompt <= prompt_window) support.
pub fn check_puus(class: &HypothesisClass, window: u64, prompt_window: u64) -> Result<Certificate> {
    if window == 0 || prompt_window == 0 {
        return Err(Error::Precondition("windows must be at least 1".into()));
    }
    if class.model.uus_analytic() {
        return Ok(Certificate::Analytic);
    }
    let members = class.members().ok_or_else(|| Error::StructuredWithoutEnumeration(class.descriptor()))?;
    let xs = class.window(window);
    for h in members {
        for y in 1..=prompt_window {
            let finite = h.part(y).is_some_and(|s| s.is_finite());
            if finite || !xs.iter().any(|x| h.label(x) == y) {
                return Ok(Certificate::Violated(format!("{} at prompt {y}", h.descriptor())));
            }
        }
    }
    Ok(Certificate::EmpiricalUpTo(window))
}
