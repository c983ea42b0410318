//! Prime towers: supports of the form {p_n^{e(n)}} where the exponent profile
//! starts at 1 and steps up by one at finitely many distinct positions.

use std::sync::Arc;

use serde::Serialize;

use super::{ClassModel, Countability, DimValue, DimensionFacts, Hypothesis, HypothesisClass, LabeledSample};
use crate::closure::{merge_streams, ClosureSet, InfiniteSet};
use crate::periodic::PeriodicSet;
use crate::space::{nth_prime, prime_power, Example, Prompt, SpaceTag};

/// Strictly increasing step positions (1-based prime indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TowerProfile {
    steps: Vec<u64>,
}

impl TowerProfile {
    pub fn new(mut steps: Vec<u64>) -> Option<TowerProfile> {
        let sorted = steps.windows(2).all(|w| w[0] < w[1]);
        steps.dedup();
        (sorted && steps.first().map_or(true, |&s| s >= 1)).then_some(TowerProfile { steps })
    }

    pub fn flat() -> TowerProfile {
        TowerProfile { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    /// Exponent at position `n`: one plus the number of steps at or before `n`.
    pub fn exponent(&self, n: u64) -> u32 {
        1 + self.steps.partition_point(|&s| s <= n) as u32
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Position after which the exponent is constant.
    pub fn last_step(&self) -> u64 {
        self.steps.last().copied().unwrap_or(0)
    }

    fn sum(&self) -> u64 {
        self.steps.iter().sum()
    }

    /// Number of positions where both profiles give the same exponent;
    /// `None` when that set is infinite (equal step counts).
    pub fn agreements(&self, other: &TowerProfile) -> Option<u64> {
        if self.step_count() == other.step_count() {
            return None;
        }
        let end = self.last_step().max(other.last_step());
        Some((1..=end).filter(|&n| self.exponent(n) == other.exponent(n)).count() as u64)
    }

    pub fn describe(&self) -> String {
        let s: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        format!("steps[{}]", s.join(","))
    }
}

/// All profiles whose steps sum to `s`, ordered by step count then lexicographically.
fn profiles_with_sum(s: u64) -> Vec<TowerProfile> {
    fn go(rest: u64, min: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for v in min..=rest {
            cur.push(v);
            go(rest - v, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(s, 1, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.into_iter().map(|steps| TowerProfile { steps }).collect()
}

/// Profiles in enumeration order: by (sum of step positions, step count, lexicographic).
pub fn profiles() -> impl Iterator<Item = TowerProfile> {
    (0u64..).flat_map(profiles_with_sum)
}

/// The first `count` profiles with at most `max_steps` steps.
pub fn bounded_profiles(count: usize, max_steps: usize) -> Vec<TowerProfile> {
    profiles().filter(|p| p.step_count() <= max_steps).take(count).collect()
}

/// `x = p_n^e` as `(n, e)` for positive integers.
fn position_of(x: &Example) -> Option<(u64, u32)> {
    match *x {
        Example::Int(v) if v >= 2 => prime_power(v as u64).map(|(n, e)| (n as u64, e)),
        _ => None,
    }
}

fn power(n: u64, e: u32) -> Option<i64> {
    nth_prime(n as usize).checked_pow(e).and_then(|v| i64::try_from(v).ok())
}

/// Prime powers `p_n^{exp(n)}` over positions where `exp` is defined, in
/// increasing `n`. Stops at the first value that does not fit in an `i64`.
/// Values increase with `n` whenever the exponents are non-decreasing.
pub(crate) fn power_stream(
    exp: impl Fn(u64) -> Option<u32> + Send + Sync + 'static,
    last: Option<u64>,
) -> Box<dyn Iterator<Item = Example>> {
    let positions = (1u64..).take_while(move |&n| last.map_or(true, |l| n <= l));
    Box::new(
        positions
            .filter_map(move |n| exp(n).map(|e| power(n, e)))
            .take_while(Option::is_some)
            .map(|v| Example::Int(v.unwrap())),
    )
}

fn nonpositive_stream() -> Box<dyn Iterator<Item = Example>> {
    Box::new((0i64..).map(|v| Example::Int(-v)))
}

/// Tower member `Z<=0 ∪ {p_n^{e(n)}}` over the integers.
pub fn tower_member(profile: &TowerProfile) -> Hypothesis {
    let p = profile.clone();
    let q = profile.clone();
    Hypothesis::from_fn(format!("tower[{}]", profile.describe()), SpaceTag::IntSpace, true, move |x| {
        let hit = match *x {
            Example::Int(v) if v <= 0 => true,
            _ => position_of(x).is_some_and(|(n, e)| p.exponent(n) == e),
        };
        u64::from(hit)
    })
    .with_support(Arc::new(move |y| {
        let q = q.clone();
        if y == 1 {
            merge_streams(vec![nonpositive_stream(), power_stream(move |n| Some(q.exponent(n)), None)])
        } else {
            let q = q.clone();
            Box::new(
                SpaceTag::IntSpace
                    .iter()
                    .filter(move |x| !matches!(x, Example::Int(v) if *v <= 0))
                    .filter(move |x| position_of(x).map_or(true, |(n, e)| q.exponent(n) != e)),
            )
        }
    }))
}

/// Bit-string member over the naturals: support `{p_n^{e(n)}}`.
pub fn bits_member(profile: &TowerProfile) -> Hypothesis {
    let p = profile.clone();
    let q = profile.clone();
    Hypothesis::from_fn(format!("bits[{}]", profile.describe()), SpaceTag::NatSpace, true, move |x| {
        u64::from(position_of(x).is_some_and(|(n, e)| p.exponent(n) == e))
    })
    .with_support(Arc::new(move |y| {
        let q = q.clone();
        if y == 1 {
            power_stream(move |n| Some(q.exponent(n)), None)
        } else {
            Box::new(
                SpaceTag::NatSpace.iter().filter(move |x| position_of(x).map_or(true, |(n, e)| q.exponent(n) != e)),
            )
        }
    }))
}

/// The member `1{x ∈ N}` over the integers.
pub fn naturals_member() -> Hypothesis {
    Hypothesis::periodic("naturals", SpaceTag::IntSpace, PeriodicSet::at_least(1))
}

struct ChainShared {
    profiles: Vec<TowerProfile>,
    /// `closure_dims[j]` is C of the prefix with `j` members.
    closure_dims: Vec<u64>,
}

/// Prefix of the plus_full_naturals enumeration: the naturals member
/// followed by the first `len - 1` towers.
struct TowerPrefix {
    shared: Arc<ChainShared>,
    len: usize,
}

impl TowerPrefix {
    fn towers(&self) -> &[TowerProfile] {
        &self.shared.profiles[..self.len - 1]
    }
}

enum Point {
    NonPositive,
    Power(u64, u32),
    Other,
}

fn classify_point(x: &Example) -> Point {
    match *x {
        Example::Int(v) if v <= 0 => Point::NonPositive,
        _ => position_of(x).map_or(Point::Other, |(n, e)| Point::Power(n, e)),
    }
}

fn tower_label(p: &TowerProfile, pt: &Point) -> bool {
    match *pt {
        Point::NonPositive => true,
        Point::Power(n, e) => p.exponent(n) == e,
        Point::Other => false,
    }
}

fn naturals_label(x: &Example) -> bool {
    matches!(x, Example::Int(v) if *v >= 1)
}

impl ClassModel for TowerPrefix {
    fn descriptor(&self) -> String {
        format!("tower_chain(len={})", self.len)
    }
    fn space(&self) -> SpaceTag {
        SpaceTag::IntSpace
    }
    fn countability(&self) -> Countability {
        Countability::Finite(self.len)
    }
    fn uus_analytic(&self) -> bool {
        true
    }
    fn enumerate(&self, i: usize) -> Option<Hypothesis> {
        match i {
            0 => Some(naturals_member()),
            i if i < self.len => Some(tower_member(&self.shared.profiles[i - 1])),
            _ => None,
        }
    }

    fn analytic_erm(&self, sample: &LabeledSample) -> Option<u64> {
        let pts: Vec<(Point, bool)> = sample.iter().map(|(x, y)| (classify_point(x), *y)).collect();
        let nat = sample.iter().filter(|(x, y)| naturals_label(x) != *y).count() as u64;
        let best = self
            .towers()
            .iter()
            .map(|p| pts.iter().filter(|(pt, y)| tower_label(p, pt) != *y).count() as u64)
            .min()
            .map_or(nat, |t| t.min(nat));
        Some(best)
    }

    fn analytic_closure(&self, prefix: &[Example], prompt: Prompt) -> Option<ClosureSet> {
        if prompt != Prompt::ONE {
            return Some(ClosureSet::Bot);
        }
        let pts: Vec<Point> = prefix.iter().map(classify_point).collect();
        let with_naturals = prefix.iter().all(naturals_label);
        let vs: Vec<TowerProfile> =
            self.towers().iter().filter(|p| pts.iter().all(|pt| tower_label(p, pt))).cloned().collect();
        Some(tower_closure(with_naturals, vs))
    }

    fn facts(&self) -> DimensionFacts {
        DimensionFacts {
            closure: Some(DimValue::Finite(self.shared.closure_dims[self.len])),
            ..DimensionFacts::default()
        }
    }
}

/// Intersection of the naturals member (if consistent) and the given towers.
fn tower_closure(with_naturals: bool, vs: Vec<TowerProfile>) -> ClosureSet {
    let Some(first) = vs.first().cloned() else {
        return if with_naturals {
            ClosureSet::Infinite(InfiniteSet::periodic(SpaceTag::IntSpace, PeriodicSet::at_least(1), "naturals"))
        } else {
            ClosureSet::Bot
        };
    };
    let vs = Arc::new(vs);
    let agree = {
        let vs = vs.clone();
        move |n: u64| {
            let e = first.exponent(n);
            vs.iter().all(|p| p.exponent(n) == e).then_some(e)
        }
    };
    let counts_differ = vs.iter().any(|p| p.step_count() != vs[0].step_count());
    if with_naturals && counts_differ {
        let end = vs.iter().map(TowerProfile::last_step).max().unwrap_or(0);
        return ClosureSet::finite(power_stream(agree, Some(end)).collect());
    }
    let member = {
        let agree = agree.clone();
        move |x: &Example| match classify_point(x) {
            Point::NonPositive => !with_naturals,
            Point::Power(n, e) => agree(n) == Some(e),
            Point::Other => false,
        }
    };
    // With different step counts the exponents never agree past the last step.
    let end = counts_differ.then(|| vs.iter().map(TowerProfile::last_step).max().unwrap_or(0));
    let stream: Box<dyn Fn() -> Box<dyn Iterator<Item = Example>> + Send + Sync> = Box::new(move || {
        let positives = power_stream(agree.clone(), end);
        if with_naturals {
            positives
        } else {
            merge_streams(vec![nonpositive_stream(), positives])
        }
    });
    ClosureSet::Infinite(
        InfiniteSet::from_fn(SpaceTag::IntSpace, "tower agreement", member).with_stream(Arc::from(stream)),
    )
}

/// Analytic closure for the full plus_full_naturals class.
pub(crate) fn plus_full_closure(prefix: &[Example]) -> ClosureSet {
    if prefix.iter().any(|x| x.as_int().is_none()) {
        return ClosureSet::Bot;
    }
    let pos: Vec<i64> = prefix.iter().filter_map(Example::as_int).filter(|&v| v >= 1).collect();
    if prefix.iter().all(naturals_label) {
        return ClosureSet::finite(pos.into_iter().map(Example::Int).collect());
    }
    let set = PeriodicSet::at_most(0).union(&PeriodicSet::finite(&pos));
    ClosureSet::Infinite(InfiniteSet::periodic(SpaceTag::IntSpace, set, "nonpositive part"))
}

/// The nested prefixes H_1 ⊆ H_2 ⊆ ... ⊆ H_len of the plus_full_naturals
/// enumeration, each with its closure dimension computed analytically.
pub fn tower_chain(len: usize) -> Vec<HypothesisClass> {
    let profiles: Vec<TowerProfile> = profiles().take(len.saturating_sub(1)).collect();
    let mut closure_dims = vec![0u64; len + 1];
    let mut best = 0u64;
    for j in 0..profiles.len() {
        for i in 0..j {
            if let Some(a) = profiles[i].agreements(&profiles[j]) {
                best = best.max(a);
            }
        }
        closure_dims[j + 2] = best;
    }
    let shared = Arc::new(ChainShared { profiles, closure_dims });
    (1..=len).map(|j| HypothesisClass::new(TowerPrefix { shared: shared.clone(), len: j })).collect()
}

/// Index of a tower in the plus_full_naturals enumeration (0 is the naturals member).
pub fn tower_index(profile: &TowerProfile) -> usize {
    let s = profile.sum();
    let before: usize = (0..s).map(|t| profiles_with_sum(t).len()).sum();
    let within = profiles_with_sum(s).iter().position(|p| p == profile).unwrap();
    1 + before + within
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure_set;

    #[test]
    fn profile_order() {
        let ps: Vec<Vec<u64>> = profiles().take(8).map(|p| p.steps).collect();
        let expect: Vec<Vec<u64>> =
            vec![vec![], vec![1], vec![2], vec![3], vec![1, 2], vec![4], vec![1, 3], vec![5]];
        assert_eq!(ps, expect);
        for (i, p) in profiles().take(300).enumerate() {
            assert_eq!(tower_index(&p), i + 1);
        }
    }

    #[test]
    fn exponents() {
        let p = TowerProfile::new(vec![2, 5]).unwrap();
        let es: Vec<u32> = (1..=6).map(|n| p.exponent(n)).collect();
        assert_eq!(es, vec![1, 2, 2, 2, 3, 3]);
        assert!(TowerProfile::new(vec![3, 2]).is_none());
        assert!(TowerProfile::new(vec![0]).is_none());
    }

    #[test]
    fn member_stream_matches_label() {
        let h = tower_member(&TowerProfile::new(vec![2, 3]).unwrap());
        let got: Vec<Example> = h.support().take(6).collect();
        assert_eq!(got, [0, -1, 2, -2, -3, -4].map(Example::Int));
        let from_walk: Vec<Example> = SpaceTag::IntSpace.iter().filter(|x| h.contains(x)).take(40).collect();
        let from_stream: Vec<Example> = h.support().take(40).collect();
        assert_eq!(from_walk, from_stream);
    }

    #[test]
    fn chain_closure_dims_match_brute_force() {
        let chain = tower_chain(40);
        for (j, h) in chain.iter().enumerate() {
            let members: Vec<TowerProfile> = profiles().take(j).collect();
            let mut brute = 0;
            for a in 0..members.len() {
                for b in 0..a {
                    let agree = (1..=20).filter(|&n| members[a].exponent(n) == members[b].exponent(n)).count();
                    if members[a].step_count() != members[b].step_count() {
                        brute = brute.max(agree as u64);
                    }
                }
            }
            assert_eq!(h.facts().closure, Some(DimValue::Finite(brute)), "prefix {}", j + 1);
        }
    }

    #[test]
    fn chain_closure_examples() {
        let chain = tower_chain(10);
        let h = &chain[9];
        // 2 and 3 are shared by the flat tower and every tower stepping after position 2.
        let c = closure_set(h, &[Example::Int(2), Example::Int(3)], 100).unwrap();
        assert!(!c.is_infinite() && !c.is_bot());
        let c = closure_set(h, &[Example::Int(-4)], 100).unwrap();
        assert!(c.contains(&Example::Int(0)) && c.is_infinite());
        assert!(closure_set(h, &[Example::Int(6), Example::Int(-1)], 100).unwrap().is_bot());
    }
}
