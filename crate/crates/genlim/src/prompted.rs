//! Prompted generation: each round reveals an example, its true label and a
//! prompt; the generator must emit an unseen example carrying the prompt.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classes::HypothesisClass;
use crate::closure::{prompted_closure_set, ClosureSet};
use crate::error::{Error, Result};
use crate::generators::Observed;
use crate::space::{Example, Prompt};

pub use crate::classes::check_puus;

/// One round's input. `true_label` is usually a prompt value, but binary
/// classes viewed as prompted may reveal label 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptedObservation {
    pub x: Example,
    pub true_label: u64,
    pub prompt: Prompt,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PromptedClosureKey {
    pub examples: Vec<Example>,
    pub prompt: Prompt,
}

impl PromptedClosureKey {
    pub fn new(examples: &[Example], prompt: Prompt) -> PromptedClosureKey {
        let examples: BTreeSet<Example> = examples.iter().copied().collect();
        PromptedClosureKey { examples: examples.into_iter().collect(), prompt }
    }
}

pub fn prompted_closure(class: &HypothesisClass, examples: &[Example], prompt: Prompt, window: u64) -> Result<ClosureSet> {
    prompted_closure_set(class, examples, prompt, window)
}

pub trait PromptedGenerator: Send {
    fn name(&self) -> String;
    fn next(&mut self, obs: PromptedObservation) -> Result<Example>;
    fn clone_box(&self) -> Box<dyn PromptedGenerator>;
}

impl Clone for Box<dyn PromptedGenerator> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Observed examples grouped by their true label.
#[derive(Clone, Debug, Default)]
struct PromptedState {
    seen: Observed,
    by_label: BTreeMap<u64, BTreeSet<Example>>,
    closures: BTreeMap<PromptedClosureKey, ClosureSet>,
}

impl PromptedState {
    fn push(&mut self, obs: &PromptedObservation) {
        self.seen.push(obs.x);
        self.by_label.entry(obs.true_label).or_default().insert(obs.x);
    }

    /// B_t: observed examples whose true label equals `prompt`.
    fn block(&self, prompt: Prompt) -> Vec<Example> {
        self.by_label.get(&prompt.get()).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    fn closure(&mut self, class: &HypothesisClass, block: &[Example], prompt: Prompt, window: u64) -> Result<&ClosureSet> {
        let key = PromptedClosureKey::new(block, prompt);
        if !self.closures.contains_key(&key) {
            let c = prompted_closure(class, block, prompt, window)?;
            self.closures.insert(key.clone(), c);
        }
        Ok(&self.closures[&key])
    }
}

/// Emits from the prompted closure of B_t once |B_t| > cap, else filler.
#[derive(Clone)]
pub struct PromptedUniformGenerator {
    class: HypothesisClass,
    cap: u64,
    window: u64,
    state: PromptedState,
}

pub fn prompted_uniform_generator(class: &HypothesisClass, cap: u64, window: u64) -> PromptedUniformGenerator {
    PromptedUniformGenerator { class: class.clone(), cap, window, state: PromptedState::default() }
}

impl PromptedGenerator for PromptedUniformGenerator {
    fn name(&self) -> String {
        format!("prompted_uniform(cap={})", self.cap)
    }

    fn next(&mut self, obs: PromptedObservation) -> Result<Example> {
        self.state.push(&obs);
        let block = self.state.block(obs.prompt);
        if (block.len() as u64) <= self.cap {
            return Ok(self.state.seen.filler(self.class.space()));
        }
        let window = self.window;
        let c = self.state.closure(&self.class, &block, obs.prompt, window)?.clone();
        match c {
            ClosureSet::Bot => Err(Error::BotClosure),
            c => c.first_outside(self.state.seen.distinct()).ok_or(Error::WindowExhausted { window }),
        }
    }

    fn clone_box(&self) -> Box<dyn PromptedGenerator> {
        Box::new(self.clone())
    }
}

/// Prompted analogue of the chain generator, with d_t = |B_t|.
#[derive(Clone)]
pub struct PromptedNonuniformGenerator {
    chain: Vec<HypothesisClass>,
    /// Monotonized prompted closure dimensions.
    pc: Vec<u64>,
    bounded: Option<u64>,
    window: u64,
    state: PromptedState,
}

pub fn prompted_nonuniform_generator(
    chain: Vec<HypothesisClass>,
    pc_values: &[u64],
    sup_finite: bool,
    window: u64,
) -> Result<PromptedNonuniformGenerator> {
    if chain.is_empty() || chain.len() != pc_values.len() {
        return Err(Error::Precondition("chain and PC values must be non-empty and of equal length".into()));
    }
    let mut top = 0;
    let pc: Vec<u64> = pc_values
        .iter()
        .map(|&v| {
            top = top.max(v);
            top
        })
        .collect();
    let bounded = sup_finite.then_some(top);
    Ok(PromptedNonuniformGenerator { chain, pc, bounded, window, state: PromptedState::default() })
}

impl PromptedGenerator for PromptedNonuniformGenerator {
    fn name(&self) -> String {
        format!("prompted_nonuniform(len={})", self.chain.len())
    }

    fn next(&mut self, obs: PromptedObservation) -> Result<Example> {
        self.state.push(&obs);
        let block = self.state.block(obs.prompt);
        let d_t = block.len() as u64;
        let space = self.chain[0].space();
        let link = match self.bounded {
            Some(c) if d_t < c.max(1) => None,
            Some(_) => Some((d_t as usize).clamp(1, self.chain.len()) - 1),
            None => self.pc.iter().rposition(|&v| v < d_t),
        };
        let Some(n) = link else {
            return Ok(self.state.seen.filler(space));
        };
        let window = self.window;
        let class = self.chain[n].clone();
        let c = self.state.closure(&class, &block, obs.prompt, window)?.clone();
        if c.is_bot() {
            return Ok(self.state.seen.filler(space));
        }
        Ok(c.first_outside(self.state.seen.distinct()).unwrap_or_else(|| self.state.seen.filler(space)))
    }

    fn clone_box(&self) -> Box<dyn PromptedGenerator> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{fixture, FixtureParams};
    use crate::space::block_elems;

    fn prompted_two() -> HypothesisClass {
        fixture("prompted_two", &FixtureParams::new()).unwrap()
    }

    #[test]
    fn closure_of_blocks_is_the_block() {
        let class = prompted_two();
        for d in 2..=8 {
            let a = block_elems(d);
            let c = prompted_closure(&class, &a, Prompt::new(d).unwrap(), 100).unwrap();
            assert_eq!(c.finite_elements().unwrap(), &a[..]);
        }
    }

    #[test]
    fn uniform_cap_below_block_size_fails_on_the_block() {
        let class = prompted_two();
        let mut g = prompted_uniform_generator(&class, 2, 100);
        let y = Prompt::new(4).unwrap();
        let outs: Vec<Result<Example>> =
            block_elems(4).into_iter().map(|x| g.next(PromptedObservation { x, true_label: 4, prompt: y })).collect();
        assert!(outs[..3].iter().all(|o| o.is_ok()));
        assert_eq!(outs[3], Err(Error::WindowExhausted { window: 100 }));
    }

    #[test]
    fn desk_class_emits_within_prompt_support() {
        let class = fixture("prompted_tailed", &FixtureParams::new()).unwrap();
        let mut g = prompted_uniform_generator(&class, 3, 50);
        let h = &class.members().unwrap()[0];
        let xs = [Example::Int(1), Example::Int(-1), Example::Int(3), Example::Int(-3)];
        let mut seen = BTreeSet::new();
        for x in xs {
            seen.insert(x);
            let y = h.label(&x);
            let out = g.next(PromptedObservation { x, true_label: y, prompt: Prompt::new(y).unwrap() }).unwrap();
            assert!(!seen.contains(&out));
        }
    }
}
