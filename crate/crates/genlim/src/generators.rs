//! Generators: each round they observe one example and emit a new one.
//!
//! Every generator's state is a pure function of the examples observed so
//! far, so cloning a generator is the same as replaying its prefix. Where a
//! construction says "play any", the rank-smallest eligible example is used.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classes::{DimValue, Hypothesis, HypothesisClass};
use crate::closure::{closure_set, ClosureSet};
use crate::dimensions::closure_dimension;
use crate::error::{Error, Result};
use crate::space::{Example, SpaceTag};

/// A (deterministic) generator. It never receives feedback about its outputs.
pub trait Generator: Send {
    fn name(&self) -> String;
    /// Observes `x` and returns the next generated example.
    fn next(&mut self, x: Example) -> Result<Example>;
    fn clone_box(&self) -> Box<dyn Generator>;
    fn observed(&self) -> &[Example];
}

impl Clone for Box<dyn Generator> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Observed prefix with its distinct set and first-appearance order.
#[derive(Clone, Debug, Default)]
pub struct Observed {
    all: Vec<Example>,
    distinct: BTreeSet<Example>,
    first_seen: Vec<Example>,
}

impl Observed {
    pub fn push(&mut self, x: Example) {
        self.all.push(x);
        if self.distinct.insert(x) {
            self.first_seen.push(x);
        }
    }

    pub fn all(&self) -> &[Example] {
        &self.all
    }

    pub fn distinct(&self) -> &BTreeSet<Example> {
        &self.distinct
    }

    pub fn count(&self) -> u64 {
        self.distinct.len() as u64
    }

    /// The first `n` distinct examples in order of first appearance.
    pub fn first_distinct(&self, n: usize) -> &[Example] {
        &self.first_seen[..n.min(self.first_seen.len())]
    }

    /// The rank-smallest example of `space` not yet observed.
    pub fn filler(&self, space: SpaceTag) -> Example {
        space.iter().find(|x| !self.distinct.contains(x)).unwrap()
    }
}

/// Feeds `prefix` to a fresh copy of `generator` and returns all outputs.
pub fn replay(generator: &dyn Generator, prefix: &[Example]) -> Vec<Result<Example>> {
    let mut g = generator.clone_box();
    prefix.iter().map(|&x| g.next(x)).collect()
}

fn emit_from(closure: &ClosureSet, seen: &Observed, window: u64) -> Result<Example> {
    closure.first_outside(seen.distinct()).ok_or(Error::WindowExhausted { window })
}

/// C-based generator: filler until `cap + 1` distinct examples, then the
/// closure of those examples.
#[derive(Clone)]
pub struct UniformGenerator {
    class: HypothesisClass,
    cap: u64,
    window: u64,
    seen: Observed,
    cached: Option<ClosureSet>,
}

pub fn uniform_generator(class: &HypothesisClass, cap: u64, window: u64) -> UniformGenerator {
    UniformGenerator { class: class.clone(), cap, window, seen: Observed::default(), cached: None }
}

impl Generator for UniformGenerator {
    fn name(&self) -> String {
        format!("uniform(cap={})", self.cap)
    }

    fn next(&mut self, x: Example) -> Result<Example> {
        self.seen.push(x);
        if self.seen.count() <= self.cap {
            return Ok(self.seen.filler(self.class.space()));
        }
        if self.cached.is_none() {
            let basis = self.seen.first_distinct(self.cap as usize + 1);
            self.cached = Some(closure_set(&self.class, basis, self.window)?);
        }
        match self.cached.as_ref().unwrap() {
            ClosureSet::Bot => Err(Error::BotClosure),
            c => emit_from(c, &self.seen, self.window),
        }
    }

    fn clone_box(&self) -> Box<dyn Generator> {
        Box::new(self.clone())
    }

    fn observed(&self) -> &[Example] {
        self.seen.all()
    }
}

/// Closure dimension of a class, from its stated value or an exact search.
pub fn certified_closure_dimension(class: &HypothesisClass, d_max: u64, window: u64) -> Result<u64> {
    if let Some(DimValue::Finite(c)) = class.facts().closure {
        return Ok(c);
    }
    let r = closure_dimension(class, d_max, window)?;
    if r.is_exact() {
        Ok(r.value())
    } else {
        Err(Error::Precondition(format!("closure dimension of {} is not certified finite", class.descriptor())))
    }
}

/// Generator over a nested chain H_1 ⊆ H_2 ⊆ ... with per-link uniform
/// generators of sample complexity `complexities[n]`.
#[derive(Clone)]
pub struct NonuniformGenerator {
    chain: Vec<HypothesisClass>,
    /// Monotonized complexities d'_n.
    complexities: Vec<u64>,
    bounded: Option<u64>,
    window: u64,
    seen: Observed,
    closures: HashMap<usize, ClosureSet>,
}

/// `sup_finite` declares that the complexities are bounded; the bound is the
/// last materialized value.
pub fn nonuniform_generator(
    chain: Vec<HypothesisClass>,
    complexities: &[u64],
    sup_finite: bool,
    window: u64,
) -> Result<NonuniformGenerator> {
    if chain.is_empty() || chain.len() != complexities.len() {
        return Err(Error::Precondition("chain and complexities must be non-empty and of equal length".into()));
    }
    let mut mono = Vec::with_capacity(complexities.len());
    let mut top = 0;
    for &d in complexities {
        top = top.max(d);
        mono.push(top);
    }
    let bounded = sup_finite.then_some(top);
    Ok(NonuniformGenerator { chain, complexities: mono, bounded, window, seen: Observed::default(), closures: HashMap::new() })
}

/// The chain generator for a countable class: H_n = first n members, each
/// with sample complexity C(H_n) + 1.
pub fn countable_generator(chain: Vec<HypothesisClass>, d_max: u64, window: u64) -> Result<NonuniformGenerator> {
    let ds = chain
        .iter()
        .map(|h| certified_closure_dimension(h, d_max, window).map(|c| c + 1))
        .collect::<Result<Vec<u64>>>()?;
    nonuniform_generator(chain, &ds, false, window)
}

impl NonuniformGenerator {
    pub fn complexities(&self) -> &[u64] {
        &self.complexities
    }

    /// Index (0-based) of the link to delegate to, if any.
    fn link(&self) -> Option<usize> {
        let d_t = self.seen.count();
        match self.bounded {
            Some(c) if d_t < c => None,
            Some(_) => Some((self.seen.all().len() - 1).min(self.chain.len() - 1)),
            None => self.complexities.iter().rposition(|&d| d <= d_t),
        }
    }
}

impl Generator for NonuniformGenerator {
    fn name(&self) -> String {
        format!("nonuniform(len={})", self.chain.len())
    }

    fn next(&mut self, x: Example) -> Result<Example> {
        self.seen.push(x);
        let space = self.chain[0].space();
        let Some(n) = self.link() else {
            return Ok(self.seen.filler(space));
        };
        // Link n's uniform generator has cap d'_n - 1, so its closure basis is the first d'_n distinct.
        if !self.closures.contains_key(&n) {
            let basis = self.seen.first_distinct(self.complexities[n] as usize);
            let c = closure_set(&self.chain[n], basis, self.window)?;
            self.closures.insert(n, c);
        }
        let c = &self.closures[&n];
        if c.is_bot() {
            return Ok(self.seen.filler(space));
        }
        Ok(c.first_outside(self.seen.distinct()).unwrap_or_else(|| self.seen.filler(space)))
    }

    fn clone_box(&self) -> Box<dyn Generator> {
        Box::new(self.clone())
    }

    fn observed(&self) -> &[Example] {
        self.seen.all()
    }
}

/// Shared bookkeeping of the limit-style generators: closures fixed at the
/// switching time and their natural orderings.
#[derive(Clone, Default)]
struct LimitState {
    /// (class index, closure) for classes whose closure was not Bot.
    active: Vec<(usize, ClosureSet)>,
}

impl LimitState {
    /// n_t^i: length of the longest prefix of z^(i) inside the observed set.
    fn covered(closure: &ClosureSet, seen: &Observed) -> usize {
        closure.iter().take_while(|z| seen.distinct().contains(z)).count()
    }

    /// i_t: the largest n_t^i (lowest index on ties) among classes still
    /// consistent with every observed example, one ERM call per class.
    fn pick(&self, classes: &[HypothesisClass], seen: &Observed) -> Result<&ClosureSet> {
        let sample: Vec<(Example, bool)> = seen.distinct().iter().map(|&x| (x, true)).collect();
        let mut best: Option<(usize, &ClosureSet)> = None;
        for (i, c) in &self.active {
            if classes[*i].erm(&sample)? != 0 {
                continue;
            }
            let n = Self::covered(c, seen);
            if best.map_or(true, |(b, _)| n > b) {
                best = Some((n, c));
            }
        }
        best.map(|(_, c)| c).ok_or(Error::EmptyS)
    }

    fn emit(&self, classes: &[HypothesisClass], seen: &Observed, window: u64) -> Result<Example> {
        emit_from(self.pick(classes, seen)?, seen, window)
    }
}

/// Generator for a finite union of classes with finite closure dimensions.
#[derive(Clone)]
pub struct LimitGenerator {
    classes: Vec<HypothesisClass>,
    c: u64,
    window: u64,
    seen: Observed,
    state: Option<LimitState>,
}

/// `dims[i]` is the closure dimension of `classes[i]`.
pub fn limit_generator(classes: Vec<HypothesisClass>, dims: &[u64], window: u64) -> Result<LimitGenerator> {
    if classes.is_empty() || classes.len() != dims.len() {
        return Err(Error::Precondition("classes and dimensions must be non-empty and of equal length".into()));
    }
    let c = dims.iter().copied().max().unwrap();
    Ok(LimitGenerator { classes, c, window, seen: Observed::default(), state: None })
}

impl LimitGenerator {
    /// Index of the class played from at the current round, once switched.
    pub fn active_index(&self) -> Option<usize> {
        let state = self.state.as_ref()?;
        let picked = state.pick(&self.classes, &self.seen).ok()?;
        state.active.iter().find(|(_, c)| std::ptr::eq(c, picked)).map(|(i, _)| *i)
    }
}

impl Generator for LimitGenerator {
    fn name(&self) -> String {
        format!("limit(classes={})", self.classes.len())
    }

    fn next(&mut self, x: Example) -> Result<Example> {
        self.seen.push(x);
        if self.seen.count() <= self.c {
            return Ok(self.seen.filler(self.classes[0].space()));
        }
        if self.state.is_none() {
            let basis: Vec<Example> = self.seen.distinct().iter().copied().collect();
            let mut active = Vec::new();
            for (i, h) in self.classes.iter().enumerate() {
                let c = closure_set(h, &basis, self.window)?;
                if !c.is_bot() {
                    active.push((i, c));
                }
            }
            if active.is_empty() {
                return Err(Error::EmptyS);
            }
            self.state = Some(LimitState { active });
        }
        self.state.as_ref().unwrap().emit(&self.classes, &self.seen, self.window)
    }

    fn clone_box(&self) -> Box<dyn Generator> {
        Box::new(self.clone())
    }

    fn observed(&self) -> &[Example] {
        self.seen.all()
    }
}

/// Limit generator with stream-dependent switching: class i switches at the
/// first round its closure is infinite or Bot.
#[derive(Clone)]
pub struct EucLimitGenerator {
    classes: Vec<HypothesisClass>,
    max_wait: u64,
    window: u64,
    seen: Observed,
    /// Closure of class i at its own switching time t_i.
    settled: Vec<Option<ClosureSet>>,
    state: Option<LimitState>,
}

pub fn euc_limit_generator(classes: Vec<HypothesisClass>, max_wait: u64, window: u64) -> Result<EucLimitGenerator> {
    if classes.is_empty() {
        return Err(Error::Precondition("at least one class is required".into()));
    }
    let settled = vec![None; classes.len()];
    Ok(EucLimitGenerator { classes, max_wait, window, seen: Observed::default(), settled, state: None })
}

impl Generator for EucLimitGenerator {
    fn name(&self) -> String {
        format!("euc_limit(classes={})", self.classes.len())
    }

    fn next(&mut self, x: Example) -> Result<Example> {
        self.seen.push(x);
        if self.state.is_none() {
            for (i, h) in self.classes.iter().enumerate() {
                if self.settled[i].is_none() {
                    let c = closure_set(h, self.seen.all(), self.window)?;
                    if !matches!(c, ClosureSet::Finite(_)) {
                        self.settled[i] = Some(c);
                    }
                }
            }
            if self.settled.iter().any(Option::is_none) {
                let t = self.seen.all().len() as u64;
                if t >= self.max_wait {
                    return Err(Error::HorizonExceeded { horizon: self.max_wait, what: "closure never unbounded".into() });
                }
                return Ok(self.seen.filler(self.classes[0].space()));
            }
            let active: Vec<(usize, ClosureSet)> = self
                .settled
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.clone().filter(|c| !c.is_bot()).map(|c| (i, c)))
                .collect();
            if active.is_empty() {
                return Err(Error::EmptyS);
            }
            self.state = Some(LimitState { active });
        }
        self.state.as_ref().unwrap().emit(&self.classes, &self.seen, self.window)
    }

    fn clone_box(&self) -> Box<dyn Generator> {
        Box::new(self.clone())
    }

    fn observed(&self) -> &[Example] {
        self.seen.all()
    }
}

/// Plays from the closure of the rightmost chain link whose closure is infinite.
#[derive(Clone)]
pub struct ChainLimitGenerator {
    chain: Vec<HypothesisClass>,
    window: u64,
    seen: Observed,
}

pub fn chain_limit_generator(chain: Vec<HypothesisClass>, window: u64) -> Result<ChainLimitGenerator> {
    if chain.is_empty() {
        return Err(Error::Precondition("chain must be non-empty".into()));
    }
    Ok(ChainLimitGenerator { chain, window, seen: Observed::default() })
}

impl ChainLimitGenerator {
    /// Index of the rightmost link with an infinite closure of the current prefix.
    pub fn rightmost_infinite(&self) -> Result<Option<(usize, ClosureSet)>> {
        let basis: Vec<Example> = self.seen.distinct().iter().copied().collect();
        for i in (0..self.chain.len()).rev() {
            let c = closure_set(&self.chain[i], &basis, self.window)?;
            if c.is_infinite() {
                return Ok(Some((i, c)));
            }
        }
        Ok(None)
    }
}

impl Generator for ChainLimitGenerator {
    fn name(&self) -> String {
        format!("chain_limit(len={})", self.chain.len())
    }

    fn next(&mut self, x: Example) -> Result<Example> {
        self.seen.push(x);
        match self.rightmost_infinite()? {
            Some((_, c)) => emit_from(&c, &self.seen, self.window),
            None => Ok(self.seen.filler(self.chain[0].space())),
        }
    }

    fn clone_box(&self) -> Box<dyn Generator> {
        Box::new(self.clone())
    }

    fn observed(&self) -> &[Example] {
        self.seen.all()
    }
}

/// Finite-support distribution as (example, weight) pairs.
pub type Distribution = Vec<(Example, f64)>;

pub trait RandomizedGenerator: Send {
    fn name(&self) -> String;
    /// Observes `x` and returns the distribution of the next output.
    fn next_dist(&mut self, x: Example) -> Result<Distribution>;
    fn clone_box(&self) -> Box<dyn RandomizedGenerator>;
}

#[derive(Clone)]
pub struct PointMass {
    inner: Box<dyn Generator>,
}

pub fn point_mass(generator: Box<dyn Generator>) -> PointMass {
    PointMass { inner: generator }
}

impl RandomizedGenerator for PointMass {
    fn name(&self) -> String {
        format!("point_mass({})", self.inner.name())
    }

    fn next_dist(&mut self, x: Example) -> Result<Distribution> {
        Ok(vec![(self.inner.next(x)?, 1.0)])
    }

    fn clone_box(&self) -> Box<dyn RandomizedGenerator> {
        Box::new(self.clone())
    }
}

/// With probability `p`, re-emits the rank-smallest observed example
/// (always a mistake); otherwise follows the wrapped generator.
#[derive(Clone)]
pub struct Noisy {
    inner: Box<dyn Generator>,
    p: f64,
    seen: Observed,
}

pub fn noisy(generator: Box<dyn Generator>, p: f64) -> Result<Noisy> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("noise probability {p} is not in [0, 1]")));
    }
    Ok(Noisy { inner: generator, p, seen: Observed::default() })
}

impl RandomizedGenerator for Noisy {
    fn name(&self) -> String {
        format!("noisy:{}({})", self.p, self.inner.name())
    }

    fn next_dist(&mut self, x: Example) -> Result<Distribution> {
        self.seen.push(x);
        let base = self.inner.next(x)?;
        let wrong = *self.seen.distinct().first().unwrap();
        Ok(vec![(wrong, self.p), (base, 1.0 - self.p)].into_iter().filter(|(_, w)| *w > 0.0).collect())
    }

    fn clone_box(&self) -> Box<dyn RandomizedGenerator> {
        Box::new(self.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub failure_rate: f64,
    /// Hoeffding radius at 95% confidence; zero when every distribution was a point mass.
    pub radius: f64,
    pub trials: u64,
    pub failures: u64,
    /// Rounds at or after the switching time, per trial.
    pub checked_rounds: u64,
    pub vacuous: bool,
    pub note: String,
}

fn sample(dist: &Distribution, rng: &mut ChaCha8Rng) -> Example {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (x, w) in dist {
        acc += w;
        if u < acc {
            return *x;
        }
    }
    dist.last().unwrap().0
}

/// Monte-Carlo estimate of the probability that some output at or after the
/// round with `d_star` distinct examples misses `supp(h)` minus the observed set.
/// This is per-stream statistical evidence, not a proof.
#[allow(clippy::too_many_arguments)]
pub fn delta_uniform_check(
    rgen: &dyn RandomizedGenerator,
    h: &Hypothesis,
    stream: &[Example],
    d_star: u64,
    delta: f64,
    trials: u64,
    horizon: u64,
    seed: u64,
) -> Result<Verdict> {
    if trials < 100 {
        return Err(Error::Precondition("at least 100 trials are required".into()));
    }
    // Generator state never depends on the sampled outputs, so the
    // distributions are computed once and sampled per trial.
    let mut g = rgen.clone_box();
    let mut seen = Observed::default();
    let mut checked: Vec<(Distribution, BTreeSet<Example>)> = Vec::new();
    for &x in stream.iter().take(horizon as usize) {
        seen.push(x);
        let dist = g.next_dist(x)?;
        let total: f64 = dist.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvariantViolation(format!("distribution weights sum to {total}")));
        }
        if seen.count() >= d_star {
            checked.push((dist, seen.distinct().clone()));
        }
    }
    if checked.is_empty() {
        return Ok(Verdict {
            pass: true,
            failure_rate: 0.0,
            radius: 0.0,
            trials,
            failures: 0,
            checked_rounds: 0,
            vacuous: true,
            note: format!("stream never reached {d_star} distinct examples"),
        });
    }
    let point_masses = checked.iter().all(|(d, _)| d.len() == 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let failed = checked.iter().any(|(dist, seen)| {
            let x = sample(dist, &mut rng);
            !h.contains(&x) || seen.contains(&x)
        });
        failures += u64::from(failed);
    }
    let rate = failures as f64 / trials as f64;
    let radius = if point_masses { 0.0 } else { ((2.0f64 / 0.05).ln() / (2.0 * trials as f64)).sqrt() };
    Ok(Verdict {
        pass: rate + radius <= delta,
        failure_rate: rate,
        radius,
        trials,
        failures,
        checked_rounds: checked.len() as u64,
        vacuous: false,
        note: "per-stream evidence".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleComplexity {
    Finite(u64),
    Unbounded,
}

/// Whether an emission is a mistake: outside `supp(h)` or already observed.
pub fn is_mistake(h: &Hypothesis, seen: &BTreeSet<Example>, emitted: &Example) -> bool {
    !h.contains(emitted) || seen.contains(emitted)
}

/// Smallest d >= 1 such that no suite stream sees a mistake once d distinct
/// examples have been observed; Unbounded if a stream errs in its last round.
pub fn estimate_sample_complexity(
    generator: &dyn Generator,
    h: &Hypothesis,
    suite: &[Vec<Example>],
    horizon: u64,
) -> SampleComplexity {
    let mut worst: Option<u64> = None;
    for stream in suite {
        let mut g = generator.clone_box();
        let mut seen = Observed::default();
        let rounds = stream.len().min(horizon as usize);
        for (t, &x) in stream.iter().take(rounds).enumerate() {
            seen.push(x);
            let mistake = match g.next(x) {
                Ok(e) => is_mistake(h, seen.distinct(), &e),
                Err(_) => return SampleComplexity::Unbounded,
            };
            if mistake {
                if t + 1 == rounds {
                    return SampleComplexity::Unbounded;
                }
                worst = Some(worst.map_or(seen.count(), |w| w.max(seen.count())));
            }
        }
    }
    SampleComplexity::Finite(worst.map_or(1, |w| w + 1))
}
