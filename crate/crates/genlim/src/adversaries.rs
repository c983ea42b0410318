//! Adversaries: they choose the target hypothesis and the stream, and may
//! simulate the generator on any prefix before committing.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::classes::{in_q, tower_member, Hypothesis, HypothesisClass, TowerProfile};
use crate::dimensions::closure_dimension;
use crate::error::{Error, Result};
use crate::generators::{estimate_sample_complexity, Generator, SampleComplexity};
use crate::prompted::{PromptedGenerator, PromptedObservation};
use crate::space::{block_elems, nth_prime, Example, Prompt};

/// How many members of an intensional class are scanned for a hypothesis
/// excluding the probe.
const MEMBER_SCAN: usize = 10_000;

/// A stream strategy for the plain game.
pub trait Adversary {
    fn name(&self) -> String;
    /// The example for round `t` (1-based). `probe` is the generator after
    /// rounds 1..t-1; adversaries only ever simulate clones of it.
    fn next(&mut self, t: u64, probe: &dyn Generator) -> Result<Example>;
    /// The target, committing now if the script has not yet done so.
    fn finish(&mut self) -> Result<Hypothesis>;
    fn log(&self) -> &[String];
}

enum Script {
    /// Fixed prefix, then the support in rank order.
    Stream { prefix: Vec<Example>, rest: Option<Box<dyn Iterator<Item = Example>>> },
    ClosureAttack(Box<ClosureAttack>),
}

struct ClosureAttack {
    closure: Vec<Example>,
    candidates: Vec<Hypothesis>,
    tail: Option<Box<dyn Iterator<Item = Example>>>,
}

pub struct AdversaryScript {
    name: String,
    hypothesis: Option<Hypothesis>,
    script: Script,
    log: Vec<String>,
}

/// Streams `supp(h)` in rank order.
pub fn enumeration_adversary(h: &Hypothesis) -> AdversaryScript {
    stream_adversary(h, Vec::new())
}

/// Streams `prefix`, then `supp(h)` in rank order.
pub fn stream_adversary(h: &Hypothesis, prefix: Vec<Example>) -> AdversaryScript {
    AdversaryScript {
        name: format!("enumeration({})", h.descriptor()),
        hypothesis: Some(h.clone()),
        script: Script::Stream { prefix, rest: None },
        log: Vec::new(),
    }
}

/// Streams a finite closed set of `d` examples, probes the generator once
/// the set is exhausted and commits to a member of the version space whose
/// support excludes the probed output.
///
/// The probe happens at round |closure|, when closure minus the observed set is
/// empty, so the case where the output falls inside the closure cannot occur.
pub fn closure_attack(class: &HypothesisClass, d: u64, window: u64) -> Result<AdversaryScript> {
    if d == 0 {
        return Err(Error::Precondition("closure attack needs d >= 1".into()));
    }
    let r = closure_dimension(class, d, window)?;
    if r.value() < d {
        return Err(Error::NoWitness { d });
    }
    let witness = r.witness().ok_or(Error::NoWitness { d })?;
    let closure = witness.closure.clone().ok_or(Error::NoWitness { d })?;
    let candidates = match class.version_space(&closure) {
        Some(vs) => vs,
        None => (0..MEMBER_SCAN)
            .map_while(|i| class.enumerate(i))
            .filter(|h| closure.iter().all(|x| h.contains(x)))
            .collect(),
    };
    if candidates.is_empty() {
        return Err(Error::InvariantViolation("closure attack witness has an empty version space".into()));
    }
    let log = vec![format!("witness {:?} with closure {:?}", witness.examples, closure)];
    Ok(AdversaryScript {
        name: format!("closure_attack(d={d})"),
        hypothesis: None,
        script: Script::ClosureAttack(Box::new(ClosureAttack { closure, candidates, tail: None })),
        log,
    })
}

impl AdversaryScript {
    pub fn committed(&self) -> Option<&Hypothesis> {
        self.hypothesis.as_ref()
    }

    /// Next example of a stream script, for games without a generator to probe.
    pub fn next_unprobed(&mut self, t: u64) -> Result<Example> {
        let Script::Stream { prefix, rest } = &mut self.script else {
            return Err(Error::Precondition(format!("{} needs a generator to probe", self.name)));
        };
        let i = (t - 1) as usize;
        if i < prefix.len() {
            return Ok(prefix[i]);
        }
        let h = self.hypothesis.as_ref().unwrap();
        rest.get_or_insert_with(|| h.support())
            .next()
            .ok_or_else(|| Error::Precondition(format!("support of {} exhausted", h.descriptor())))
    }

    fn commit(&mut self, h: Hypothesis, why: String) {
        self.log.push(format!("commit {} ({why})", h.descriptor()));
        self.hypothesis = Some(h);
    }
}

impl Adversary for AdversaryScript {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn next(&mut self, t: u64, probe: &dyn Generator) -> Result<Example> {
        let i = (t - 1) as usize;
        match &mut self.script {
            Script::Stream { prefix, rest } => {
                if i < prefix.len() {
                    return Ok(prefix[i]);
                }
                let h = self.hypothesis.as_ref().unwrap();
                rest.get_or_insert_with(|| h.support())
                    .next()
                    .ok_or_else(|| Error::Precondition(format!("support of {} exhausted", h.descriptor())))
            }
            Script::ClosureAttack(attack) => {
                let p = attack.closure.len();
                if i + 1 < p {
                    return Ok(attack.closure[i]);
                }
                if i + 1 == p {
                    let x = attack.closure[i];
                    let mut sim = probe.clone_box();
                    let choice = match sim.next(x) {
                        Ok(out) => {
                            let fresh = !attack.closure.contains(&out);
                            let h = attack
                                .candidates
                                .iter()
                                .find(|h| !fresh || !h.contains(&out))
                                .cloned()
                                .ok_or_else(|| {
                                    Error::InvariantViolation(format!("probe output {out} lies in every consistent support"))
                                })?;
                            (h, format!("probe output {out}"))
                        }
                        Err(e) => (attack.candidates[0].clone(), format!("probe aborted: {e}")),
                    };
                    self.commit(choice.0, choice.1);
                    return Ok(x);
                }
                let h = self.hypothesis.as_ref().unwrap();
                let closure: BTreeSet<Example> = attack.closure.iter().copied().collect();
                let tail = attack.tail.get_or_insert_with(|| Box::new(h.support().filter(move |x| !closure.contains(x))));
                tail.next().ok_or_else(|| Error::Precondition(format!("support of {} exhausted", h.descriptor())))
            }
        }
    }

    fn finish(&mut self) -> Result<Hypothesis> {
        if self.hypothesis.is_none() {
            if let Script::ClosureAttack(a) = &self.script {
                let h = a.candidates[0].clone();
                self.commit(h, "game ended before the probe".into());
            }
        }
        Ok(self.hypothesis.clone().unwrap())
    }

    fn log(&self) -> &[String] {
        &self.log
    }
}

// ---------------------------------------------------------------------------
// prime towers

/// Positive part of a tower support in position order: p_1^{e(1)}, p_2^{e(2)}, ...
pub fn tower_positives(profile: &TowerProfile, count: usize) -> Vec<Example> {
    (1..=count as u64)
        .map_while(|n| {
            let p = nth_prime(n as usize);
            p.checked_pow(profile.exponent(n)).and_then(|v| i64::try_from(v).ok()).map(Example::Int)
        })
        .collect()
}

fn interleave(a: &[Example], b: &[Example]) -> Vec<Example> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    for i in 0..a.len().max(b.len()) {
        out.extend(a.get(i));
        out.extend(b.get(i));
    }
    out
}

fn nonpositives(count: usize) -> Vec<Example> {
    (0..count as i64).map(|v| Example::Int(-v)).collect()
}

/// Streams used to measure d_h of a tower: position order, rank order and
/// positives interleaved with non-positives.
fn tower_suite(profile: &TowerProfile, horizon: usize) -> Vec<Vec<Example>> {
    let pos = tower_positives(profile, horizon);
    let h = tower_member(profile);
    vec![
        pos.clone(),
        h.support().take(horizon).collect(),
        interleave(&pos, &nonpositives(horizon))[..horizon.min(2 * pos.len())].to_vec(),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerAttackReport {
    pub d_h0: u64,
    /// d_1 = max(d_{h0}, d_{h1}), then d_{h_n} for n = 2..=levels.
    pub d: Vec<u64>,
    pub profiles: Vec<String>,
    /// Positive part of h_infinity up to position d_levels.
    pub h_infinity_prefix: Vec<Example>,
    pub strictly_increasing: bool,
}

fn measured(generator: &dyn Generator, h: &Hypothesis, suite: &[Vec<Example>], horizon: u64) -> Result<u64> {
    match estimate_sample_complexity(generator, h, suite, horizon) {
        SampleComplexity::Finite(d) => Ok(d),
        SampleComplexity::Unbounded => {
            Err(Error::HorizonExceeded { horizon, what: format!("sample complexity of {}", h.descriptor()) })
        }
    }
}

/// Builds h_1, h_2, ... where h_{n+1} raises the exponent by one after
/// each of positions d_1, ..., d_n, measuring every d_{h_n} on a stream suite.
pub fn prime_tower_attack(generator: &dyn Generator, levels: u64, horizon: u64) -> Result<TowerAttackReport> {
    if levels == 0 || levels > 6 {
        return Err(Error::Precondition("prime tower attack supports 1..=6 levels".into()));
    }
    let hz = horizon as usize;
    let naturals = crate::classes::naturals_member();
    let nat_suite = vec![
        (1..=horizon as i64).map(Example::Int).collect::<Vec<_>>(),
        tower_positives(&TowerProfile::flat(), hz)
            .into_iter()
            .chain((1..=horizon as i64).map(Example::Int))
            .take(hz)
            .collect(),
    ];
    let d_h0 = measured(generator, &naturals, &nat_suite, horizon)?;
    let flat = TowerProfile::flat();
    let d_h1 = measured(generator, &tower_member(&flat), &tower_suite(&flat, hz), horizon)?;
    let mut d = vec![d_h0.max(d_h1)];
    let mut profiles = vec![flat.describe()];
    let mut strictly_increasing = true;
    for _ in 2..=levels {
        let steps: Vec<u64> = d.iter().map(|v| v + 1).collect();
        let Some(profile) = TowerProfile::new(steps) else {
            strictly_increasing = false;
            break;
        };
        let dn = measured(generator, &tower_member(&profile), &tower_suite(&profile, hz), horizon)?;
        strictly_increasing &= dn > *d.last().unwrap();
        profiles.push(profile.describe());
        d.push(dn);
    }
    let steps: Vec<u64> = d.iter().map(|v| v + 1).collect();
    let h_infinity_prefix = TowerProfile::new(steps)
        .map(|p| tower_positives(&p, *d.last().unwrap() as usize))
        .unwrap_or_default();
    Ok(TowerAttackReport { d_h0, d, profiles, h_infinity_prefix, strictly_increasing })
}

// ---------------------------------------------------------------------------
// rationals

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub level: u64,
    pub round: u64,
    pub output: Example,
    pub in_q: bool,
    pub outside_h1: bool,
}

impl Checkpoint {
    pub fn hit(&self) -> bool {
        self.in_q && self.outside_h1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalAttackReport {
    pub levels: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// supp(h_1): every example streamed up to the last checkpoint.
    pub h1_support: Vec<Example>,
    pub stream: Vec<Example>,
}

/// Level-n stream segment: p_n/p_1, then p_1/p_n, p_2/p_n, ...
fn rational_segment(n: u64) -> impl Iterator<Item = Example> {
    let pn = nth_prime(n as usize);
    std::iter::once(Example::rat(pn, 2).unwrap())
        .chain((1usize..).map(move |k| Example::rat(nth_prime(k), pn).unwrap()))
}

/// Nested enumerations of Q_n-classes with checkpoints t_2 < t_3 < ...: the
/// first round (t_2 >= 4) at which the generator's output lands in Q_n
/// outside the observed set. `horizon` bounds the rounds spent per level.
pub fn rational_attack(generator: &dyn Generator, levels: u64, horizon: u64) -> Result<RationalAttackReport> {
    if levels == 0 || levels > 5 {
        return Err(Error::Precondition("rational attack supports 1..=5 levels".into()));
    }
    let mut g = generator.clone_box();
    let mut stream = Vec::new();
    let mut seen = BTreeSet::new();
    let mut raw = Vec::new();
    for n in 2..=levels {
        let mut found = None;
        for (k, x) in rational_segment(n).enumerate() {
            if k as u64 >= horizon {
                break;
            }
            stream.push(x);
            seen.insert(x);
            let out = g.next(x)?;
            let t = stream.len() as u64;
            if (n > 2 || t >= 4) && in_q(n, &out) && !seen.contains(&out) {
                found = Some((t, out));
                break;
            }
        }
        let (round, output) =
            found.ok_or(Error::HorizonExceeded { horizon, what: format!("checkpoint t_{n}") })?;
        raw.push((n, round, output));
    }
    let checkpoints = raw
        .into_iter()
        .map(|(level, round, output)| Checkpoint {
            level,
            round,
            output,
            in_q: in_q(level, &output),
            outside_h1: !seen.contains(&output),
        })
        .collect();
    Ok(RationalAttackReport { levels, checkpoints, h1_support: seen.into_iter().collect(), stream })
}

// ---------------------------------------------------------------------------
// prompted

pub trait PromptedAdversary {
    fn name(&self) -> String;
    fn next(&mut self, t: u64, probe: &dyn PromptedGenerator) -> Result<PromptedObservation>;
    fn finish(&mut self) -> Result<Hypothesis>;
    fn log(&self) -> &[String];
}

/// Plays `xs` with prompts `prompts[t mod len]`, labels from `h`.
pub struct PromptedStream {
    h: Hypothesis,
    xs: Vec<Example>,
    prompts: Vec<Prompt>,
    log: Vec<String>,
}

pub fn prompted_stream_adversary(h: &Hypothesis, xs: Vec<Example>, prompts: Vec<Prompt>) -> Result<PromptedStream> {
    if prompts.is_empty() {
        return Err(Error::Precondition("at least one prompt is required".into()));
    }
    Ok(PromptedStream { h: h.clone(), xs, prompts, log: Vec::new() })
}

impl PromptedAdversary for PromptedStream {
    fn name(&self) -> String {
        format!("prompted_stream({})", self.h.descriptor())
    }

    fn next(&mut self, t: u64, _probe: &dyn PromptedGenerator) -> Result<PromptedObservation> {
        let i = (t - 1) as usize;
        let x = *self.xs.get(i).ok_or(Error::HorizonExceeded { horizon: self.xs.len() as u64, what: "stream".into() })?;
        Ok(PromptedObservation { x, true_label: self.h.label(&x), prompt: self.prompts[i % self.prompts.len()] })
    }

    fn finish(&mut self) -> Result<Hypothesis> {
        Ok(self.h.clone())
    }

    fn log(&self) -> &[String] {
        &self.log
    }
}

/// Streams sorted A_d with prompt d against a two-member prompted class
/// whose d-supports intersect in A_d, committing to whichever member
/// rejects the first output outside A_d minus the observed set.
pub struct PromptedAttack {
    d: u64,
    members: Vec<Hypothesis>,
    block: Vec<Example>,
    committed: Option<Hypothesis>,
    tail: Option<Box<dyn Iterator<Item = Example>>>,
    log: Vec<String>,
}

pub fn prompted_attack(class: &HypothesisClass, d: u64) -> Result<PromptedAttack> {
    if d < 2 {
        return Err(Error::Precondition("prompted attack needs d >= 2".into()));
    }
    let members = class.members().ok_or_else(|| Error::Precondition("prompted attack needs an explicit class".into()))?;
    let block = block_elems(d);
    if members.is_empty() || !members.iter().all(|h| block.iter().all(|x| h.label(x) == d)) {
        return Err(Error::Precondition(format!("every member must label A_{d} with {d}")));
    }
    Ok(PromptedAttack { d, members: members.to_vec(), block, committed: None, tail: None, log: Vec::new() })
}

impl PromptedAdversary for PromptedAttack {
    fn name(&self) -> String {
        format!("prompted_attack(d={})", self.d)
    }

    fn next(&mut self, t: u64, probe: &dyn PromptedGenerator) -> Result<PromptedObservation> {
        let i = (t - 1) as usize;
        let prompt = Prompt::new(self.d).unwrap();
        let x = if i < self.block.len() {
            self.block[i]
        } else {
            let h = self.finish()?;
            let d = self.d;
            let block: BTreeSet<Example> = self.block.iter().copied().collect();
            let tail = self.tail.get_or_insert_with(|| Box::new(h.support_with(d).filter(move |x| !block.contains(x))));
            tail.next().ok_or_else(|| Error::Precondition("prompt support exhausted".into()))?
        };
        let obs = PromptedObservation { x, true_label: self.d, prompt };
        if self.committed.is_none() {
            let seen = &self.block[..=i.min(self.block.len() - 1)];
            let mut sim = probe.clone_box();
            match sim.next(obs) {
                Ok(out) if !self.block.contains(&out) || seen.contains(&out) => {
                    let h = self.members.iter().find(|h| h.label(&out) != self.d).unwrap_or(&self.members[0]).clone();
                    self.log.push(format!("round {t}: output {out}, commit {}", h.descriptor()));
                    self.committed = Some(h);
                }
                Ok(_) => {}
                Err(e) => {
                    self.log.push(format!("round {t}: probe aborted ({e}), commit {}", self.members[0].descriptor()));
                    self.committed = Some(self.members[0].clone());
                }
            }
        }
        Ok(obs)
    }

    fn finish(&mut self) -> Result<Hypothesis> {
        Ok(self.committed.get_or_insert_with(|| self.members[0].clone()).clone())
    }

    fn log(&self) -> &[String] {
        &self.log
    }
}
