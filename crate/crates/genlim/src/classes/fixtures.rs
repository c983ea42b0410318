//! The fixture catalog, fixture parameters, and the union combinator.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::towers::{self, bits_member, naturals_member, plus_full_closure, power_stream, tower_member};
use super::{
    ClassModel, Countability, DimValue, DimensionFacts, ExplicitClass, Hypothesis, HypothesisClass, LabeledSample,
};
use crate::closure::{exact_closure, intersect_closures, merge_streams, ClosureSet, InfiniteSet};
use crate::dimensions::MistakeTree;
use crate::error::{Error, Result};
use crate::periodic::PeriodicSet;
use crate::space::{block, block_elems, block_index, nth_prime, prime_index, prime_power, Example, Prompt, SpaceTag};

/// `key=value` parameters of a fixture.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixtureParams(BTreeMap<String, String>);

impl FixtureParams {
    pub fn new() -> FixtureParams {
        FixtureParams::default()
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> FixtureParams {
        FixtureParams(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }

    /// Parses `k=v` items as given on the command line.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<FixtureParams> {
        let mut map = BTreeMap::new();
        for item in items {
            let (k, v) = item
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::BadParams(format!("expected key=value, got `{}`", item.as_ref())))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FixtureParams(map))
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> FixtureParams {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::BadParams(format!("`{key}` must be a natural number, got `{v}`"))),
        }
    }

    fn allow(&self, name: &str, keys: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::BadParams(format!("`{name}` does not take `{k}` (accepts: {})", keys.join(", ")))),
            None => Ok(()),
        }
    }
}

const NAMES: &[&str] = &[
    "a_or_nonpositive_finite",
    "a_or_nonpositive_all",
    "plus_full_naturals",
    "he_ho",
    "thresholds",
    "singleton_or_nonpositive",
    "cofinite",
    "prime_power_bits",
    "rational_q",
    "prompted_two",
    "finite_tailed",
    "prompted_tailed",
];

pub fn fixture_names() -> &'static [&'static str] {
    NAMES
}

/// Builds a catalog fixture.
pub fn fixture(name: &str, params: &FixtureParams) -> Result<HypothesisClass> {
    match name {
        "a_or_nonpositive_finite" | "a_or_nonpositive_all" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(Nonpositive { finite: name.ends_with("finite") }))
        }
        "plus_full_naturals" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(PlusFullNaturals))
        }
        "he_ho" => {
            params.allow(name, &["d_max"])?;
            let d = params.u64_or("d_max", 6)?;
            if d == 0 {
                return Err(Error::BadParams("d_max must be at least 1".into()));
            }
            Ok(he_ho(d))
        }
        "thresholds" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(Thresholds))
        }
        "singleton_or_nonpositive" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(SingletonOrNonpositive))
        }
        "cofinite" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(Cofinite))
        }
        "prime_power_bits" => {
            params.allow(name, &["max_ones", "n_max"])?;
            let max_ones = params.u64_or("max_ones", 3)?;
            let n_max = params.u64_or("n_max", 8)?;
            if n_max == 0 {
                return Err(Error::BadParams("n_max must be at least 1".into()));
            }
            Ok(HypothesisClass::new(PrimePowerBits { max_ones: max_ones as u32, n_max }))
        }
        "rational_q" => {
            params.allow(name, &["i_max", "level"])?;
            if let Some(level) = params.get("level") {
                let i = level.parse::<u64>().ok().filter(|&i| i >= 1);
                return i.map(rational_level).ok_or_else(|| Error::BadParams("level must be at least 1".into()));
            }
            let i_max = params.u64_or("i_max", 4)?;
            if i_max == 0 {
                return Err(Error::BadParams("i_max must be at least 1".into()));
            }
            Ok(HypothesisClass::new(RationalUnion { i_max }))
        }
        "prompted_two" => {
            params.allow(name, &[])?;
            Ok(HypothesisClass::new(PromptedTwo { members: vec![prompted_member(0), prompted_member(1)] }))
        }
        "finite_tailed" => {
            params.allow(name, &["m", "K", "members"])?;
            let m = params.u64_or("m", 4)?;
            let k = params.u64_or("K", 2)?;
            let members = parse_members(params.get("members").unwrap_or("1.2:0;1.2:1"))?;
            finite_tailed(m, k, &members)
        }
        "prompted_tailed" => {
            params.allow(name, &["m", "Y", "members"])?;
            let m = params.u64_or("m", 3)?;
            let y = params.u64_or("Y", 2)?;
            let members = parse_prompted_members(params.get("members").unwrap_or("121:0;121:1;211:0"))?;
            prompted_tailed(m, y, &members)
        }
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}

/// `121:0;211:1`: one label digit per example 1..m, then the tail shift.
fn parse_prompted_members(text: &str) -> Result<Vec<(Vec<u64>, u64)>> {
    let bad = || Error::BadParams(format!("members must look like `121:0;211:1`, got `{text}`"));
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (labels, r) = item.split_once(':').ok_or_else(bad)?;
            let labels = labels
                .trim()
                .chars()
                .map(|c| c.to_digit(10).map(u64::from).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            Ok((labels, r.trim().parse::<u64>().map_err(|_| bad())?))
        })
        .collect()
}

fn parse_members(text: &str) -> Result<Vec<(Vec<i64>, u64)>> {
    let bad = || Error::BadParams(format!("members must look like `1.2:0;3:1`, got `{text}`"));
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (pos, r) = item.split_once(':').ok_or_else(bad)?;
            let pos = pos
                .split('.')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            Ok((pos, r.trim().parse::<u64>().map_err(|_| bad())?))
        })
        .collect()
}

fn fmt_set(xs: &[i64]) -> String {
    let s: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", s.join(","))
}

/// Per-example label counts `(#label 1, #label 0)`.
fn counts(sample: &LabeledSample) -> BTreeMap<Example, (u64, u64)> {
    let mut m: BTreeMap<Example, (u64, u64)> = BTreeMap::new();
    for (x, y) in sample {
        let e = m.entry(*x).or_default();
        if *y {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    m
}

/// Loss of the best member when `forced(x)` fixes some labels and every
/// other in-space example may take either label.
fn free_loss(sample: &LabeledSample, forced: impl Fn(&Example) -> Option<bool>) -> u64 {
    counts(sample)
        .into_iter()
        .map(|(x, (c1, c0))| match forced(&x) {
            Some(true) => c0,
            Some(false) => c1,
            None => c1.min(c0),
        })
        .sum()
}

/// The `j`-th finite subset of N: the empty set, then by (max, size, lexicographic).
pub fn finite_subset(j: usize) -> Vec<i64> {
    if j == 0 {
        return Vec::new();
    }
    let mut rest = j - 1;
    let mut max = 1u32;
    while rest >= 1usize << (max - 1) {
        rest -= 1 << (max - 1);
        max += 1;
    }
    let mut subsets: Vec<Vec<i64>> = (0u64..1 << (max - 1))
        .map(|bits| (1..max as i64).filter(|&i| bits >> (i - 1) & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut s = subsets.swap_remove(rest);
    s.push(max as i64);
    s
}

fn positive_ints(xs: &[Example]) -> Vec<i64> {
    let mut v: Vec<i64> = xs.iter().filter_map(Example::as_int).filter(|&v| v >= 1).collect();
    v.sort_unstable();
    v.dedup();
    v
}

// ---------------------------------------------------------------------------
// a_or_nonpositive_finite / a_or_nonpositive_all

/// `1{x ∈ A or x <= 0}` for a finite `A ⊂ N`.
pub fn nonpositive_member(a: &[i64]) -> Hypothesis {
    let support = PeriodicSet::at_most(0).union(&PeriodicSet::finite(a));
    Hypothesis::periodic(format!("a_or_nonpositive[A={}]", fmt_set(a)), SpaceTag::IntSpace, support)
}

pub fn all_ones_member() -> Hypothesis {
    Hypothesis::periodic("all_ones", SpaceTag::IntSpace, PeriodicSet::all())
}

struct Nonpositive {
    finite: bool,
}

fn nonpositive_erm(sample: &LabeledSample) -> u64 {
    free_loss(sample, |x| match x.as_int() {
        None => Some(false),
        Some(v) if v <= 0 => Some(true),
        Some(_) => None,
    })
}

fn nonpositive_closure(prefix: &[Example]) -> ClosureSet {
    if prefix.iter().any(|x| x.as_int().is_none()) {
        return ClosureSet::Bot;
    }
    let set = PeriodicSet::at_most(0).union(&PeriodicSet::finite(&positive_ints(prefix)));
    ClosureSet::Infinite(InfiniteSet::periodic(SpaceTag::IntSpace, set, "nonpositive part"))
}

impl ClassModel for Nonpositive {
    fn descriptor(&self) -> String {
        if self.finite { "a_or_nonpositive_finite" } else { "a_or_nonpositive_all" }.to_string()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::IntSpace
    }
    fn countability(&self) -> Countability {
        if self.finite {
            Countability::CountablyInfinite
        } else {
            Countability::Uncountable
        }
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        match (self.finite, i) {
            (true, 0) => Some(all_ones_member()),
            (true, i) => Some(nonpositive_member(&finite_subset(i - 1))),
            (false, i) => Some(nonpositive_member(&finite_subset(i))),
        }
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        Some(nonpositive_erm(sample))
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        Some(if prompt == Prompt::ONE { nonpositive_closure(prefix) } else { ClosureSet::Bot })
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Finite(0)),
            vc: Some(DimValue::Infinite),
            littlestone: Some(DimValue::Infinite),
            euc: Some(true),
            ..DimensionFacts::default()
        }
    }
    fn telltale_refuter(&self, h: &Hypothesis, s: &[Example]) -> Option<Hypothesis> {
        let sup = h.periodic_support()?;
        if s.iter().any(|x| !sup.contains(x)) {
            return None;
        }
        let candidate = nonpositive_member(&positive_ints(s));
        let cs = candidate.periodic_support()?;
        (cs.is_subset(&sup) && !sup.is_subset(&cs)).then_some(candidate)
    }
    fn minimal_consistent(&self, positives: &[Example]) -> Option<Hypothesis> {
        positives.iter().all(|x| x.as_int().is_some()).then(|| nonpositive_member(&positive_ints(positives)))
    }
}

// ---------------------------------------------------------------------------
// plus_full_naturals

struct PlusFullNaturals;

impl ClassModel for PlusFullNaturals {
    fn descriptor(&self) -> String {
        "plus_full_naturals".into()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::IntSpace
    }
    fn countability(&self) -> Countability {
        Countability::Uncountable
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    /// Index 0 is `1{x ∈ N}`; the rest enumerates the prime towers.
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        match i {
            0 => Some(naturals_member()),
            i => towers::profiles().nth(i - 1).map(|p| tower_member(&p)),
        }
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        let naturals = sample.iter().filter(|(x, y)| matches!(x, Example::Int(v) if *v >= 1) != *y).count() as u64;
        Some(nonpositive_erm(sample).min(naturals))
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        Some(if prompt == Prompt::ONE { plus_full_closure(prefix) } else { ClosureSet::Bot })
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Infinite),
            vc: Some(DimValue::Infinite),
            littlestone: Some(DimValue::Infinite),
            ..DimensionFacts::default()
        }
    }
}

// ---------------------------------------------------------------------------
// he_ho

/// `h^e_d` (even negatives) and `h^o_d` (odd negatives) for d <= d_max, listed e_1, o_1, e_2, ...
pub fn he_ho(d_max: u64) -> HypothesisClass {
    let mut members = Vec::new();
    for d in 1..=d_max {
        let (lo, hi) = block(d);
        let a = PeriodicSet::from_fn(lo, hi, 1, |x| lo <= x && x <= hi);
        for (tag, r) in [("e", 0), ("o", 1)] {
            let support = a.union(&PeriodicSet::negative_residue(r, 2));
            members.push(Hypothesis::periodic(format!("h{tag}_{d}"), SpaceTag::IntSpace, support));
        }
    }
    let facts = DimensionFacts {
        closure: Some(DimValue::Finite(d_max)),
        littlestone: (d_max >= 2).then_some(DimValue::Finite(2)),
        euc: Some(true),
        ..DimensionFacts::default()
    };
    let name = format!("he_ho(d_max={d_max})");
    HypothesisClass::new(ExplicitClass::new(name, SpaceTag::IntSpace, members, false).with_facts(facts))
}

// ---------------------------------------------------------------------------
// thresholds

struct Thresholds;

pub fn threshold_member(a: i64) -> Hypothesis {
    Hypothesis::periodic(format!("threshold[a={a}]"), SpaceTag::NatSpace, PeriodicSet::at_least(a))
}

/// Binary-search mistake tree over thresholds with `a` in `[lo, lo + 2^depth)`.
fn threshold_tree(lo: i64, depth: u64) -> MistakeTree {
    if depth == 0 {
        return MistakeTree::Leaf;
    }
    let half = 1i64 << (depth - 1);
    let x = lo + half - 1;
    MistakeTree::node(Example::Int(x), threshold_tree(x + 1, depth - 1), threshold_tree(lo, depth - 1))
}

impl ClassModel for Thresholds {
    fn descriptor(&self) -> String {
        "thresholds".into()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::NatSpace
    }
    fn countability(&self) -> Countability {
        Countability::CountablyInfinite
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        Some(threshold_member(i as i64 + 1))
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        let mut cands = vec![1i64];
        for (x, _) in sample {
            if let Some(v) = x.as_int().filter(|&v| v >= 1) {
                cands.extend([v, v + 1]);
            }
        }
        let loss = |a: i64| {
            sample.iter().filter(|(x, y)| matches!(x, Example::Int(v) if *v >= 1 && *v >= a) != *y).count() as u64
        };
        cands.into_iter().map(loss).min()
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE || prefix.iter().any(|x| !SpaceTag::NatSpace.contains(x)) {
            return Some(ClosureSet::Bot);
        }
        Some(match prefix.iter().filter_map(Example::as_int).min() {
            None => ClosureSet::Finite(Vec::new()),
            Some(m) => ClosureSet::Infinite(InfiniteSet::periodic(
                SpaceTag::NatSpace,
                PeriodicSet::at_least(m),
                "smallest threshold",
            )),
        })
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Finite(0)),
            vc: Some(DimValue::Finite(1)),
            littlestone: Some(DimValue::Infinite),
            euc: Some(true),
            ..DimensionFacts::default()
        }
    }
    fn telltale_refuter(&self, h: &Hypothesis, s: &[Example]) -> Option<Hypothesis> {
        let sup = h.periodic_support()?;
        let m = s.iter().filter_map(Example::as_int).min()?;
        let candidate = threshold_member(m);
        let cs = candidate.periodic_support()?;
        (s.iter().all(|x| sup.contains(x)) && cs.is_subset(&sup) && !sup.is_subset(&cs)).then_some(candidate)
    }
    fn minimal_consistent(&self, positives: &[Example]) -> Option<Hypothesis> {
        if positives.iter().any(|x| !SpaceTag::NatSpace.contains(x)) {
            return None;
        }
        positives.iter().filter_map(Example::as_int).min().map(threshold_member)
    }
    fn littlestone_witness(&self, depth: u64) -> Option<MistakeTree> {
        (depth <= 40).then(|| threshold_tree(1, depth))
    }
}

// ---------------------------------------------------------------------------
// singleton_or_nonpositive

struct SingletonOrNonpositive;

pub fn singleton_member(a: i64) -> Hypothesis {
    let support = PeriodicSet::at_most(0).union(&PeriodicSet::finite(&[a]));
    Hypothesis::periodic(format!("singleton_or_nonpositive[a={a}]"), SpaceTag::IntSpace, support)
}

impl ClassModel for SingletonOrNonpositive {
    fn descriptor(&self) -> String {
        "singleton_or_nonpositive".into()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::IntSpace
    }
    fn countability(&self) -> Countability {
        Countability::CountablyInfinite
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        Some(singleton_member(i as i64 + 1))
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        let base = sample
            .iter()
            .filter(|(x, y)| match x.as_int() {
                None => *y,
                Some(v) if v <= 0 => !*y,
                Some(_) => false,
            })
            .count() as u64;
        let pos: Vec<(i64, bool)> =
            sample.iter().filter_map(|(x, y)| x.as_int().filter(|&v| v >= 1).map(|v| (v, *y))).collect();
        let fresh = pos.iter().filter(|(_, y)| *y).count() as u64;
        let best = pos
            .iter()
            .map(|&(a, _)| pos.iter().filter(|&&(v, y)| (v == a) != y).count() as u64)
            .min()
            .map_or(fresh, |b| b.min(fresh));
        Some(base + best)
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE || prefix.iter().any(|x| x.as_int().is_none()) {
            return Some(ClosureSet::Bot);
        }
        let pos = positive_ints(prefix);
        if pos.len() >= 2 {
            return Some(ClosureSet::Bot);
        }
        let set = PeriodicSet::at_most(0).union(&PeriodicSet::finite(&pos));
        Some(ClosureSet::Infinite(InfiniteSet::periodic(SpaceTag::IntSpace, set, "nonpositive part")))
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Finite(0)),
            vc: Some(DimValue::Finite(1)),
            littlestone: Some(DimValue::Finite(1)),
            euc: Some(true),
            ..DimensionFacts::default()
        }
    }
}

// ---------------------------------------------------------------------------
// cofinite

struct Cofinite;

pub fn cofinite_member(a: &[i64]) -> Hypothesis {
    let support = PeriodicSet::at_least(1).minus(&PeriodicSet::finite(a));
    Hypothesis::periodic(format!("cofinite[A={}]", fmt_set(a)), SpaceTag::NatSpace, support)
}

impl ClassModel for Cofinite {
    fn descriptor(&self) -> String {
        "cofinite".into()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::NatSpace
    }
    fn countability(&self) -> Countability {
        Countability::CountablyInfinite
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        Some(cofinite_member(&finite_subset(i)))
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        Some(free_loss(sample, |x| (!SpaceTag::NatSpace.contains(x)).then_some(false)))
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE || prefix.iter().any(|x| !SpaceTag::NatSpace.contains(x)) {
            return Some(ClosureSet::Bot);
        }
        Some(ClosureSet::finite(prefix.to_vec()))
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Infinite),
            vc: Some(DimValue::Infinite),
            littlestone: Some(DimValue::Infinite),
            euc: Some(false),
            ..DimensionFacts::default()
        }
    }
}

// ---------------------------------------------------------------------------
// prime_power_bits

struct PrimePowerBits {
    max_ones: u32,
    n_max: u64,
}

/// The explicit truncation: bit strings supported on positions 1..=n_max.
pub fn prime_power_bits_truncation(max_ones: u32, n_max: u64) -> HypothesisClass {
    let mut members = Vec::new();
    for bits in 0u64..1 << n_max {
        if bits.count_ones() <= max_ones {
            let steps = (1..=n_max).filter(|i| bits >> (i - 1) & 1 == 1).collect();
            members.push(bits_member(&towers::TowerProfile::new(steps).unwrap()));
        }
    }
    let name = format!("prime_power_bits_truncation(max_ones={max_ones}, n_max={n_max})");
    HypothesisClass::explicit(name, SpaceTag::NatSpace, members)
}

fn nat_power(x: &Example) -> Option<(u64, u32)> {
    match *x {
        Example::Int(v) if v >= 2 => prime_power(v as u64).map(|(n, e)| (n as u64, e)),
        _ => None,
    }
}

impl PrimePowerBits {
    /// Observed positions with their one-counts `e - 1`; `None` if no member is consistent.
    fn anchors(&self, prefix: &[Example]) -> Option<Vec<(u64, u32)>> {
        let mut at: BTreeMap<u64, u32> = BTreeMap::new();
        for x in prefix {
            let (n, e) = nat_power(x)?;
            if *at.entry(n).or_insert(e - 1) != e - 1 {
                return None;
            }
        }
        let mut prev = (0u64, 0u32);
        for (&n, &c) in &at {
            if c < prev.1 || (c - prev.1) as u64 > n - prev.0 || c > self.max_ones {
                return None;
            }
            prev = (n, c);
        }
        Some(at.into_iter().collect())
    }
}

/// One-count at position `m` if every consistent bit string agrees on it.
fn forced_count(anchors: &[(u64, u32)], max_ones: u32, m: u64) -> Option<u32> {
    let i = anchors.partition_point(|&(n, _)| n < m);
    if let Some(&(_, c)) = anchors.get(i).filter(|(n, _)| *n == m) {
        return Some(c);
    }
    let (a, ca) = if i == 0 { (0, 0) } else { anchors[i - 1] };
    let (lo, hi) = match anchors.get(i) {
        Some(&(b, cb)) => (ca.max(cb.saturating_sub((b - m) as u32)), (cb as u64).min(ca as u64 + (m - a)) as u32),
        None => (ca, (max_ones as u64).min(ca as u64 + (m - a)) as u32),
    };
    (lo == hi).then_some(lo)
}

impl ClassModel for PrimePowerBits {
    fn descriptor(&self) -> String {
        format!("prime_power_bits(max_ones={}, n_max={})", self.max_ones, self.n_max)
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::NatSpace
    }
    fn countability(&self) -> Countability {
        if self.max_ones == 0 {
            Countability::Finite(1)
        } else {
            Countability::CountablyInfinite
        }
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    /// Canonical enumeration: bit strings by (sum of one positions, count, lexicographic).
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        let mut ps = towers::profiles().filter(|p| p.step_count() <= self.max_ones as usize);
        if self.max_ones == 0 && i > 0 {
            return None;
        }
        ps.nth(i).map(|p| bits_member(&p))
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        let mut fixed = 0u64;
        let mut at: BTreeMap<u64, Vec<(u32, bool)>> = BTreeMap::new();
        for (x, y) in sample {
            match nat_power(x) {
                Some((n, e)) => at.entry(n).or_default().push((e, *y)),
                None => fixed += u64::from(*y),
            }
        }
        let k = self.max_ones as usize;
        let cost = |obs: &[(u32, bool)], c: usize| obs.iter().filter(|&&(e, y)| (e as usize == c + 1) != y).count() as u64;
        let mut dp: Vec<Option<u64>> = vec![Some(0); 1].into_iter().chain(vec![None; k]).collect();
        let mut prev_n = 0u64;
        for (n, obs) in at {
            let gap = (n - prev_n) as usize;
            let mut next = vec![None; k + 1];
            for c in 0..=k {
                let lo = c.saturating_sub(gap);
                let best = (lo..=c).filter_map(|p| dp[p]).min();
                next[c] = best.map(|b| b + cost(&obs, c));
            }
            dp = next;
            prev_n = n;
        }
        Some(fixed + dp.into_iter().flatten().min().unwrap())
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE {
            return Some(ClosureSet::Bot);
        }
        let Some(anchors) = self.anchors(prefix) else {
            return Some(ClosureSet::Bot);
        };
        let max_ones = self.max_ones;
        let last_count = anchors.last().map_or(0, |a| a.1);
        let exp = {
            let anchors = anchors.clone();
            move |m: u64| forced_count(&anchors, max_ones, m).map(|c| c + 1)
        };
        if last_count < max_ones {
            let end = anchors.last().map_or(0, |a| a.0);
            return Some(ClosureSet::finite(power_stream(exp, Some(end)).collect()));
        }
        let member = {
            let exp = exp.clone();
            move |x: &Example| nat_power(x).is_some_and(|(n, e)| exp(n) == Some(e))
        };
        let stream: Box<dyn Fn() -> Box<dyn Iterator<Item = Example>> + Send + Sync> =
            Box::new(move || power_stream(exp.clone(), None));
        Some(ClosureSet::Infinite(
            InfiniteSet::from_fn(SpaceTag::NatSpace, "all ones used", member).with_stream(Arc::from(stream)),
        ))
    }
    fn facts(&self) -> DimensionFacts {
        let many = self.max_ones >= 1;
        DimensionFacts {
            closure: Some(if many { DimValue::Infinite } else { DimValue::Finite(0) }),
            euc: Some(!many),
            ..DimensionFacts::default()
        }
    }
}

// ---------------------------------------------------------------------------
// rational_q

/// Whether `x ∈ Q_i = {p / p_i : p prime}`.
/// Membership in Q_i = {p / p_i : p prime}.
pub fn in_q(i: u64, x: &Example) -> bool {
    let pi = nth_prime(i as usize);
    match *x {
        Example::Rat { num: 1, den: 1 } => true,
        Example::Rat { num, den } => den == pi && prime_index(num).is_some(),
        Example::Int(_) => false,
    }
}

/// Q_i in rank order: 1, then p / p_i for primes p != p_i ascending.
fn q_stream(i: u64) -> Box<dyn Iterator<Item = Example>> {
    let pi = nth_prime(i as usize);
    let rest = (1usize..).map(nth_prime).filter(move |&p| p != pi).map(move |p| Example::Rat { num: p, den: pi });
    Box::new(std::iter::once(Example::Rat { num: 1, den: 1 }).chain(rest))
}

/// `1{x ∈ Q_i ∪ extra}`.
pub fn rational_member(i: u64, extra: &[Example]) -> Hypothesis {
    let mut extra = extra.to_vec();
    extra.sort();
    extra.dedup();
    let names: Vec<String> = extra.iter().map(|x| x.to_string()).collect();
    let set = Arc::new(extra);
    let lookup = set.clone();
    Hypothesis::from_fn(format!("Q_{i}+{{{}}}", names.join(",")), SpaceTag::PosRatSpace, true, move |x| {
        u64::from(in_q(i, x) || lookup.binary_search(x).is_ok())
    })
    .with_support(Arc::new(move |y| {
        if y == 1 {
            merge_streams(vec![q_stream(i), Box::new(set.as_ref().clone().into_iter())])
        } else {
            let set = set.clone();
            Box::new(SpaceTag::PosRatSpace.iter().filter(move |x| !in_q(i, x) && set.binary_search(x).is_err()))
        }
    }))
}

struct RationalLevel {
    i: u64,
}

/// The class H_i = {1{x ∈ Q_i ∪ A} : A ⊆ Q+}.
pub fn rational_level(i: u64) -> HypothesisClass {
    HypothesisClass::new(RationalLevel { i })
}

fn level_erm(i: u64, sample: &LabeledSample) -> u64 {
    free_loss(sample, |x| match x {
        Example::Int(_) => Some(false),
        _ if in_q(i, x) => Some(true),
        _ => None,
    })
}

impl ClassModel for RationalLevel {
    fn descriptor(&self) -> String {
        format!("rational_q(level={})", self.i)
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::PosRatSpace
    }
    fn countability(&self) -> Countability {
        Countability::Uncountable
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        let extra: Vec<Example> = SpaceTag::PosRatSpace
            .iter()
            .take(usize::BITS as usize)
            .enumerate()
            .filter(|(b, _)| i >> b & 1 == 1)
            .map(|(_, x)| x)
            .collect();
        Some(rational_member(self.i, &extra))
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        Some(level_erm(self.i, sample))
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE || prefix.iter().any(|x| x.as_int().is_some()) {
            return Some(ClosureSet::Bot);
        }
        let i = self.i;
        let mut extra = prefix.to_vec();
        extra.sort();
        extra.dedup();
        let extra = Arc::new(extra);
        let lookup = extra.clone();
        let stream: Box<dyn Fn() -> Box<dyn Iterator<Item = Example>> + Send + Sync> =
            Box::new(move || merge_streams(vec![q_stream(i), Box::new(extra.as_ref().clone().into_iter())]));
        let set = InfiniteSet::from_fn(SpaceTag::PosRatSpace, format!("Q_{i} part"), move |x| {
            in_q(i, x) || lookup.binary_search(x).is_ok()
        });
        Some(ClosureSet::Infinite(set.with_stream(Arc::from(stream))))
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Finite(0)),
            vc: Some(DimValue::Infinite),
            littlestone: Some(DimValue::Infinite),
            euc: Some(true),
            ..DimensionFacts::default()
        }
    }
}

struct RationalUnion {
    i_max: u64,
}

impl ClassModel for RationalUnion {
    fn descriptor(&self) -> String {
        format!("rational_q(i_max={})", self.i_max)
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::PosRatSpace
    }
    fn countability(&self) -> Countability {
        Countability::Uncountable
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        let level = (i as u64 % self.i_max) + 1;
        RationalLevel { i: level }.enumerate(i / self.i_max as usize)
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        (1..=self.i_max).map(|i| level_erm(i, sample)).min()
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if self.i_max == 1 {
            return RationalLevel { i: 1 }.analytic_closure(prefix, prompt);
        }
        if prompt != Prompt::ONE || prefix.iter().any(|x| x.as_int().is_some()) {
            return Some(ClosureSet::Bot);
        }
        let mut xs = prefix.to_vec();
        xs.push(Example::Rat { num: 1, den: 1 });
        Some(ClosureSet::finite(xs))
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(if self.i_max == 1 { DimValue::Finite(0) } else { DimValue::Infinite }),
            ..DimensionFacts::default()
        }
    }
}

// ---------------------------------------------------------------------------
// prompted_two

/// `h_1` (shift 0) or `h_2` (shift 1): label n on A_n and on {-p_{n+shift}^k}, 1 elsewhere.
fn prompted_member(shift: u64) -> Hypothesis {
    let label = move |x: &Example| -> u64 {
        match *x {
            Example::Int(v) if v >= 1 => block_index(v).unwrap(),
            Example::Int(v) if v < 0 => match prime_power(v.unsigned_abs()) {
                Some((idx, _)) if idx as u64 > shift => idx as u64 - shift,
                _ => 1,
            },
            _ => 1,
        }
    };
    Hypothesis::from_fn(format!("h_{}", shift + 1), SpaceTag::IntSpace, true, label).with_support(Arc::new(
        move |y| {
            if y >= 2 {
                let p = nth_prime((y + shift) as usize);
                let negatives = (1u32..)
                    .map_while(move |k| p.checked_pow(k).and_then(|v| i64::try_from(v).ok()))
                    .map(|v| Example::Int(-v));
                merge_streams(vec![Box::new(block_elems(y).into_iter()), Box::new(negatives)])
            } else {
                Box::new(SpaceTag::IntSpace.iter().filter(move |x| label(x) == 1))
            }
        },
    ))
}

struct PromptedTwo {
    members: Vec<Hypothesis>,
}

impl ClassModel for PromptedTwo {
    fn descriptor(&self) -> String {
        "prompted_two".into()
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::IntSpace
    }
    fn countability(&self) -> Countability {
        Countability::Finite(2)
    }
    fn prompted(&self) -> bool {
        true
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn members(&self) -> Option<&[Hypothesis]> {
        Some(&self.members)
    }
    fn analytic_closure(&self, examples: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        let y = prompt.get();
        let vs: Vec<&Hypothesis> =
            self.members.iter().filter(|h| examples.iter().all(|x| h.label(x) == y)).collect();
        Some(match vs.as_slice() {
            [] => ClosureSet::Bot,
            [_, _] if y >= 2 => ClosureSet::finite(block_elems(y)),
            _ => {
                let vs: Vec<Hypothesis> = vs.into_iter().cloned().collect();
                let first = vs[0].clone();
                let member = move |x: &Example| vs.iter().all(|h| h.label(x) == y);
                let member2 = member.clone();
                let stream: Box<dyn Fn() -> Box<dyn Iterator<Item = Example>> + Send + Sync> =
                    Box::new(move || {
                        let m = member2.clone();
                        Box::new(first.support_with(y).filter(move |x| m(x)))
                    });
                ClosureSet::Infinite(
                    InfiniteSet::from_fn(SpaceTag::IntSpace, "prompt support", member).with_stream(Arc::from(stream)),
                )
            }
        })
    }
    fn facts(&self) -> DimensionFacts {
        DimensionFacts { prompted_closure: Some(DimValue::Infinite), ..DimensionFacts::default() }
    }
}

// ---------------------------------------------------------------------------
// finite_tailed

/// Members `F ∪ {x < 0 : x ≡ r mod K}` with `F ⊆ {1..m}`.
pub fn finite_tailed(m: u64, k: u64, members: &[(Vec<i64>, u64)]) -> Result<HypothesisClass> {
    if k == 0 {
        return Err(Error::BadParams("K must be at least 1".into()));
    }
    if members.is_empty() {
        return Err(Error::BadParams("finite_tailed needs at least one member".into()));
    }
    let mut hs = Vec::new();
    for (f, r) in members {
        if f.iter().any(|&x| x < 1 || x as u64 > m) || *r >= k {
            return Err(Error::BadParams(format!("member {}:{r} out of range (m={m}, K={k})", fmt_set(f))));
        }
        let mut f = f.clone();
        f.sort_unstable();
        f.dedup();
        let support = PeriodicSet::finite(&f).union(&PeriodicSet::negative_residue(*r, k));
        let name = format!("{}|{r} mod {k}", fmt_set(&f));
        if hs.iter().any(|h: &Hypothesis| h.descriptor() == name) {
            return Err(Error::BadParams(format!("duplicate member {name}")));
        }
        hs.push(Hypothesis::periodic(name, SpaceTag::IntSpace, support));
    }
    Ok(HypothesisClass::explicit(format!("finite_tailed(m={m}, K={k})"), SpaceTag::IntSpace, hs))
}

// ---------------------------------------------------------------------------
// prompted_tailed

/// Prompted members over ℤ with prompts 1..=Y: example `x` in 1..=m gets
/// `labels[x-1]`; every other `x` gets `1 + (x + shift) mod Y`.
pub fn prompted_tailed(m: u64, y_count: u64, members: &[(Vec<u64>, u64)]) -> Result<HypothesisClass> {
    if y_count == 0 || y_count > 9 {
        return Err(Error::BadParams("Y must be between 1 and 9".into()));
    }
    if members.is_empty() {
        return Err(Error::BadParams("prompted_tailed needs at least one member".into()));
    }
    let mut hs = Vec::new();
    for (labels, shift) in members {
        if labels.len() as u64 != m || labels.iter().any(|&l| l < 1 || l > y_count) || *shift >= y_count {
            return Err(Error::BadParams(format!("member {labels:?}:{shift} out of range (m={m}, Y={y_count})")));
        }
        let digits: String = labels.iter().map(|l| l.to_string()).collect();
        let name = format!("{digits}|+{shift} mod {y_count}");
        if hs.iter().any(|h: &Hypothesis| h.descriptor() == name) {
            return Err(Error::BadParams(format!("duplicate member {name}")));
        }
        let (labels, shift, top) = (labels.clone(), *shift as i64, y_count as i64);
        let label = move |x: i64| {
            if x >= 1 && x as u64 <= m {
                labels[x as usize - 1]
            } else {
                1 + (x + shift).rem_euclid(top) as u64
            }
        };
        let parts = (1..=y_count)
            .map(|y| (y, PeriodicSet::from_fn(1, m as i64, y_count, |x| label(x) == y)))
            .collect();
        hs.push(Hypothesis::partitioned(name, SpaceTag::IntSpace, parts, true));
    }
    Ok(HypothesisClass::explicit_prompted(format!("prompted_tailed(m={m}, Y={y_count})"), SpaceTag::IntSpace, hs))
}

// ---------------------------------------------------------------------------
// union

struct Union {
    name: String,
    parts: Vec<HypothesisClass>,
}

/// The union of classes. Explicit parts are merged into one explicit class.
pub fn union(name: impl Into<String>, parts: Vec<HypothesisClass>) -> HypothesisClass {
    let name = name.into();
    let space = parts.iter().map(HypothesisClass::space).reduce(|a, b| if a == b { a } else { SpaceTag::IntSpace });
    let space = space.unwrap_or(SpaceTag::IntSpace);
    if parts.iter().all(HypothesisClass::is_explicit) {
        let prompted = parts.iter().any(HypothesisClass::prompted);
        let mut members: Vec<Hypothesis> = Vec::new();
        for h in parts.iter().flat_map(|p| p.members().unwrap()) {
            if members.iter().all(|g| g.descriptor() != h.descriptor()) {
                members.push(h.clone());
            }
        }
        return HypothesisClass::new(ExplicitClass::new(name, space, members, prompted));
    }
    HypothesisClass::new(Union { name, parts })
}

impl ClassModel for Union {
    fn descriptor(&self) -> String {
        self.name.clone()
    }
    fn space(&self) -> SpaceTag {
        self.parts.iter().map(HypothesisClass::space).reduce(|a, b| if a == b { a } else { SpaceTag::IntSpace }).unwrap()
    }
    fn countability(&self) -> Countability {
        let cs: Vec<Countability> = self.parts.iter().map(HypothesisClass::countability).collect();
        if cs.contains(&Countability::Uncountable) {
            Countability::Uncountable
        } else if cs.contains(&Countability::CountablyInfinite) {
            Countability::CountablyInfinite
        } else {
            Countability::Finite(cs.iter().map(|c| if let Countability::Finite(n) = c { *n } else { 0 }).sum())
        }
    }
    fn prompted(&self) -> bool {
        self.parts.iter().any(HypothesisClass::prompted)
    }
    fn uus_analytic(&self) -> bool {
        self.parts.iter().all(|p| p.model().uus_analytic())
    }
    /// Round-robin over the parts' enumerations.
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        let k = self.parts.len();
        let mut seen = 0;
        for round in 0.. {
            let mut any = false;
            for p in &self.parts {
                if let Some(h) = p.enumerate(round) {
                    any = true;
                    if seen == i {
                        return Some(h);
                    }
                    seen += 1;
                }
            }
            if !any || round > i * k + 1 {
                return None;
            }
        }
        None
    }
    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        self.parts.iter().map(|p| p.erm(sample).ok()).collect::<Option<Vec<u64>>>()?.into_iter().min()
    }
    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        let mut acc: Option<ClosureSet> = None;
        for p in &self.parts {
            let c = exact_closure(p, prefix, prompt)?;
            if c.is_bot() {
                continue;
            }
            acc = Some(match acc {
                None => c,
                Some(a) => intersect_closures(&a, &c)?,
            });
        }
        Some(acc.unwrap_or(ClosureSet::Bot))
    }
    fn littlestone_witness(&self, depth: u64) -> Option<MistakeTree> {
        self.parts.iter().find_map(|p| p.model().littlestone_witness(depth))
    }
}
