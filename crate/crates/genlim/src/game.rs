//! Round-based simulation of the generation, prompted and identification games.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::adversaries::{Adversary, AdversaryScript, PromptedAdversary};
use crate::classes::Hypothesis;
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::identification::Identifier;
use crate::prompted::PromptedGenerator;
use crate::space::{Example, Prompt};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    pub t: u64,
    pub x: Example,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<Prompt>,
    /// `None` when the generator aborted this round.
    pub emitted: Option<Example>,
    pub mistake: bool,
    pub distinct_count: u64,
    /// Observed examples carrying this round's prompt (prompted games).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt_count: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstPerfect {
    Round(u64),
    NeverWithinHorizon,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Aborted {
    pub round: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub generator: String,
    pub adversary: String,
    pub hypothesis: String,
    pub horizon: u64,
    pub rounds: Vec<Round>,
    pub first_perfect_after: FirstPerfect,
    pub aborted: Option<Aborted>,
    pub log: Vec<String>,
}

impl Transcript {
    pub fn mistakes(&self) -> u64 {
        self.rounds.iter().filter(|r| r.mistake).count() as u64
    }

    /// First round at which `d` distinct examples have been observed.
    pub fn t_star_for(&self, d: u64) -> Option<u64> {
        self.rounds.iter().find(|r| r.distinct_count >= d).map(|r| r.t)
    }

    /// Map from every distinct-count threshold reached to its first round.
    pub fn t_star(&self) -> BTreeMap<u64, u64> {
        let mut m = BTreeMap::new();
        for r in &self.rounds {
            m.entry(r.distinct_count).or_insert(r.t);
        }
        m
    }

    /// Whether every round from the first one with `d` distinct examples on is mistake-free.
    pub fn perfect_after_distinct(&self, d: u64) -> bool {
        self.rounds.iter().filter(|r| r.distinct_count >= d).all(|r| !r.mistake)
    }
}

fn first_perfect(rounds: &[Round], aborted: bool) -> FirstPerfect {
    if aborted {
        return FirstPerfect::NeverWithinHorizon;
    }
    match rounds.iter().rposition(|r| r.mistake) {
        None => FirstPerfect::Round(1),
        Some(i) if i + 1 == rounds.len() => FirstPerfect::NeverWithinHorizon,
        Some(i) => FirstPerfect::Round(i as u64 + 2),
    }
}

/// Recomputes the mistake bit of every round from the target and the prefix.
pub fn recompute_mistakes(h: &Hypothesis, rounds: &[Round]) -> Vec<bool> {
    let mut seen = BTreeSet::new();
    rounds
        .iter()
        .map(|r| {
            seen.insert(r.x);
            match (r.emitted, r.prompt) {
                (None, _) => true,
                (Some(e), None) => !h.contains(&e) || seen.contains(&e),
                (Some(e), Some(y)) => h.label(&e) != y.get() || seen.contains(&e),
            }
        })
        .collect()
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    Ok(())
}

fn invalid_stream(h: &Hypothesis, t: u64, x: &Example) -> Error {
    Error::InvariantViolation(format!("round {t}: adversary example {x} is outside supp({})", h.descriptor()))
}

/// Plays `horizon` rounds. The generator only ever sees the stream; errors
/// from either side end the game and are recorded in `aborted`.
pub fn run_generation_game(generator: &dyn Generator, adversary: &mut dyn Adversary, horizon: u64) -> Result<Transcript> {
    check_horizon(horizon)?;
    let mut g = generator.clone_box();
    let mut xs = Vec::new();
    let mut emitted = Vec::new();
    let mut aborted = None;
    for t in 1..=horizon {
        let x = match adversary.next(t, &*g) {
            Ok(x) => x,
            Err(e) => {
                aborted = Some(Aborted { round: t, reason: format!("adversary: {e}") });
                break;
            }
        };
        xs.push(x);
        match g.next(x) {
            Ok(e) => emitted.push(Some(e)),
            Err(e) => {
                emitted.push(None);
                aborted = Some(Aborted { round: t, reason: e.to_string() });
                break;
            }
        }
    }
    let h = adversary.finish()?;
    let mut seen = BTreeSet::new();
    let mut rounds = Vec::with_capacity(xs.len());
    for (i, (x, e)) in xs.iter().zip(&emitted).enumerate() {
        let t = i as u64 + 1;
        if !h.contains(x) {
            return Err(invalid_stream(&h, t, x));
        }
        seen.insert(*x);
        let mistake = e.map_or(true, |e| !h.contains(&e) || seen.contains(&e));
        rounds.push(Round {
            t,
            x: *x,
            label: None,
            prompt: None,
            emitted: *e,
            mistake,
            distinct_count: seen.len() as u64,
            prompt_count: None,
        });
    }
    Ok(Transcript {
        generator: generator.name(),
        adversary: adversary.name(),
        hypothesis: h.descriptor().to_string(),
        horizon,
        first_perfect_after: first_perfect(&rounds, aborted.is_some()),
        rounds,
        aborted,
        log: adversary.log().to_vec(),
    })
}

/// Prompted game: a mistake is an output not labeled with the round's prompt
/// or already observed.
pub fn run_prompted_game(
    generator: &dyn PromptedGenerator,
    adversary: &mut dyn PromptedAdversary,
    horizon: u64,
) -> Result<Transcript> {
    check_horizon(horizon)?;
    let mut g = generator.clone_box();
    let mut obs = Vec::new();
    let mut emitted = Vec::new();
    let mut aborted = None;
    for t in 1..=horizon {
        let o = match adversary.next(t, &*g) {
            Ok(o) => o,
            Err(e) => {
                aborted = Some(Aborted { round: t, reason: format!("adversary: {e}") });
                break;
            }
        };
        obs.push(o);
        match g.next(o) {
            Ok(e) => emitted.push(Some(e)),
            Err(e) => {
                emitted.push(None);
                aborted = Some(Aborted { round: t, reason: e.to_string() });
                break;
            }
        }
    }
    let h = adversary.finish()?;
    let mut seen = BTreeSet::new();
    let mut per_label: BTreeMap<u64, BTreeSet<Example>> = BTreeMap::new();
    let mut rounds = Vec::with_capacity(obs.len());
    for (i, (o, e)) in obs.iter().zip(&emitted).enumerate() {
        let t = i as u64 + 1;
        if h.label(&o.x) != o.true_label {
            return Err(Error::InvariantViolation(format!(
                "round {t}: revealed label {} but {} labels {} with {}",
                o.true_label,
                h.descriptor(),
                o.x,
                h.label(&o.x)
            )));
        }
        seen.insert(o.x);
        per_label.entry(o.true_label).or_default().insert(o.x);
        let y = o.prompt.get();
        let mistake = e.map_or(true, |e| h.label(&e) != y || seen.contains(&e));
        rounds.push(Round {
            t,
            x: o.x,
            label: Some(o.true_label),
            prompt: Some(o.prompt),
            emitted: *e,
            mistake,
            distinct_count: seen.len() as u64,
            prompt_count: Some(per_label.get(&y).map_or(0, |s| s.len() as u64)),
        });
    }
    Ok(Transcript {
        generator: generator.name(),
        adversary: adversary.name(),
        hypothesis: h.descriptor().to_string(),
        horizon,
        first_perfect_after: first_perfect(&rounds, aborted.is_some()),
        rounds,
        aborted,
        log: adversary.log().to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdTranscript {
    pub identifier: String,
    pub target: String,
    pub horizon: u64,
    pub stream: Vec<Example>,
    pub guesses: Vec<String>,
    /// First round from which every guess within the horizon is the target.
    pub stabilized_at: Option<u64>,
    pub aborted: Option<Aborted>,
}

/// Feeds an enumeration of the target's support to the identifier.
pub fn run_identification_game(
    identifier: &dyn Identifier,
    adversary: &mut AdversaryScript,
    horizon: u64,
) -> Result<IdTranscript> {
    check_horizon(horizon)?;
    let target = adversary
        .committed()
        .cloned()
        .ok_or_else(|| Error::Precondition("identification needs an enumeration adversary".into()))?;
    let mut id = identifier.clone_box();
    let mut stream = Vec::new();
    let mut guesses = Vec::new();
    let mut aborted = None;
    for t in 1..=horizon {
        let x = match adversary.next_unprobed(t) {
            Ok(x) => x,
            Err(e) => {
                aborted = Some(Aborted { round: t, reason: format!("adversary: {e}") });
                break;
            }
        };
        if !target.contains(&x) {
            return Err(invalid_stream(&target, t, &x));
        }
        stream.push(x);
        match id.next(x) {
            Ok(h) => guesses.push(h.descriptor().to_string()),
            Err(e) => {
                aborted = Some(Aborted { round: t, reason: e.to_string() });
                break;
            }
        }
    }
    let hit = |g: &String| g == target.descriptor();
    let stabilized_at = match guesses.iter().rposition(|g| !hit(g)) {
        _ if aborted.is_some() || guesses.is_empty() => None,
        None => Some(1),
        Some(i) if i + 1 == guesses.len() => None,
        Some(i) => Some(i as u64 + 2),
    };
    Ok(IdTranscript {
        identifier: identifier.name(),
        target: target.descriptor().to_string(),
        horizon,
        stream,
        guesses,
        stabilized_at,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{closure_attack, enumeration_adversary};
    use crate::classes::{fixture, nonpositive_member, FixtureParams};
    use crate::generators::uniform_generator;

    #[test]
    fn zero_closure_dimension_is_perfect_from_round_one() {
        let class = fixture("a_or_nonpositive_all", &FixtureParams::new()).unwrap();
        let g = uniform_generator(&class, 0, 100);
        let mut a = enumeration_adversary(&nonpositive_member(&[5]));
        let tr = run_generation_game(&g, &mut a, 20).unwrap();
        assert_eq!(tr.rounds.len(), 20);
        assert_eq!(tr.mistakes(), 0);
        assert_eq!(tr.first_perfect_after, FirstPerfect::Round(1));
    }

    #[test]
    fn closure_attack_forces_a_mistake() {
        let class = fixture("he_ho", &FixtureParams::new()).unwrap();
        let g = uniform_generator(&class, 3, 100);
        let mut a = closure_attack(&class, 4, 100).unwrap();
        let tr = run_generation_game(&g, &mut a, 30).unwrap();
        assert!(tr.rounds.iter().any(|r| r.mistake && r.distinct_count >= 4));
        let h = class.members().unwrap().iter().find(|h| h.descriptor() == tr.hypothesis).unwrap();
        assert_eq!(recompute_mistakes(h, &tr.rounds), tr.rounds.iter().map(|r| r.mistake).collect::<Vec<_>>());
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let class = fixture("thresholds", &FixtureParams::new()).unwrap();
        let g = uniform_generator(&class, 0, 10);
        let mut a = enumeration_adversary(&crate::classes::threshold_member(1));
        assert!(matches!(run_generation_game(&g, &mut a, 0), Err(Error::Precondition(_))));
    }
}
