//! Tell-tale sets and a baseline identifier.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classes::{Hypothesis, HypothesisClass, SupportRelation};
use crate::error::{Error, Result};
use crate::space::Example;

/// Candidate sets examined exhaustively before switching to sampling.
const EXHAUSTIVE_LIMIT: u64 = 2_000_000;
/// Sampled candidate sets per size when the search space is too large.
const SAMPLES_PER_SIZE: usize = 2_000;
const SAMPLE_SEED: u64 = 0x7e11;
const MEMBER_SCAN: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TelltaleVerdict {
    Found { set: Vec<Example> },
    NotWithinBudget { set_budget: u64, window: u64 },
    /// Every examined candidate set is contained in a strictly smaller consistent support.
    RefutedWithinBudget { certificate: String, examined: u64, example_witness: String },
}

/// Outcome of testing one candidate set.
enum Probe {
    Telltale,
    Refuted(Hypothesis),
    Unknown,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn same_support(class: &HypothesisClass, a: &Hypothesis, b: &Hypothesis) -> bool {
    class.relation(a, b) == Some(SupportRelation::Equal)
}

/// Members of an explicit class whose supports lie strictly inside supp(h).
fn proper_subsets(class: &HypothesisClass, h: &Hypothesis) -> Result<Option<Vec<Hypothesis>>> {
    let Some(members) = class.members() else { return Ok(None) };
    let mut out = Vec::new();
    for g in members {
        match class.relation(g, h) {
            Some(SupportRelation::ProperSubset) => out.push(g.clone()),
            Some(_) => {}
            None => return Err(Error::UnclassifiableWithinWindow { count: members.len() as u64, window: 0 }),
        }
    }
    Ok(Some(out))
}

fn probe(class: &HypothesisClass, h: &Hypothesis, s: &[Example], smaller: Option<&[Hypothesis]>) -> Probe {
    if let Some(smaller) = smaller {
        return match smaller.iter().find(|g| s.iter().all(|x| g.contains(x))) {
            Some(g) => Probe::Refuted(g.clone()),
            None => Probe::Telltale,
        };
    }
    if let Some(g) = class.model().telltale_refuter(h, s) {
        return Probe::Refuted(g);
    }
    match class.model().minimal_consistent(s) {
        Some(m) if same_support(class, &m, h) => Probe::Telltale,
        Some(m) if class.relation(&m, h) == Some(SupportRelation::ProperSubset) => Probe::Refuted(m),
        _ => Probe::Unknown,
    }
}

/// Calls `f` on every `k`-subset of `0..n` (as index lists) until it returns false.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            let go_on = go(i + 1, n, k, cur, f);
            cur.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    go(0, n, k, &mut Vec::with_capacity(k), f)
}

/// Searches for a tell-tale set of `h` among subsets of its support inside
/// the window, smallest size first.
pub fn telltale_check(class: &HypothesisClass, h: &Hypothesis, set_budget: u64, window: u64) -> Result<TelltaleVerdict> {
    if window == 0 {
        return Err(Error::Precondition("window must be at least 1".into()));
    }
    let pool: Vec<Example> = class.window(window).into_iter().filter(|x| h.contains(x)).collect();
    let smaller = proper_subsets(class, h)?;
    let n = pool.len();
    let total: u64 = (0..=set_budget.min(n as u64)).map(|k| binomial(n as u64, k)).fold(0, u64::saturating_add);
    let mut examined = 0u64;
    let mut unknown = false;
    let mut witness: Option<String> = None;
    let mut found: Option<Vec<Example>> = None;
    let mut check = |idx: &[usize]| -> bool {
        let s: Vec<Example> = idx.iter().map(|&i| pool[i]).collect();
        examined += 1;
        match probe(class, h, &s, smaller.as_deref()) {
            Probe::Telltale => {
                found = Some(s);
                false
            }
            Probe::Refuted(g) => {
                if witness.is_none() && !s.is_empty() {
                    witness = Some(format!("{:?} ⊆ supp({})", s, g.descriptor()));
                }
                true
            }
            Probe::Unknown => {
                unknown = true;
                true
            }
        }
    };
    let exhaustive = total <= EXHAUSTIVE_LIMIT;
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for k in 0..=set_budget.min(n as u64) as usize {
        if exhaustive || k <= 2 {
            if !for_each_subset(n, k, &mut check) {
                break;
            }
        } else {
            let mut stop = false;
            for _ in 0..SAMPLES_PER_SIZE {
                let mut idx = sample(&mut rng, n, k).into_vec();
                idx.sort_unstable();
                if !check(&idx) {
                    stop = true;
                    break;
                }
            }
            if stop {
                break;
            }
        }
    }
    if let Some(set) = found {
        return Ok(TelltaleVerdict::Found { set });
    }
    if unknown {
        return Ok(TelltaleVerdict::NotWithinBudget { set_budget, window });
    }
    let certificate = match (&smaller, exhaustive) {
        (Some(_), _) => "explicit members, exhaustive",
        (None, true) => "analytic refuter, exhaustive",
        (None, false) => "analytic refuter, exhaustive up to size 2 plus seeded sample",
    };
    Ok(TelltaleVerdict::RefutedWithinBudget {
        certificate: certificate.into(),
        examined,
        example_witness: witness.unwrap_or_default(),
    })
}

/// Re-checks a Found verdict: S inside supp(h), within budget, and no
/// visible member with S in its support lies strictly inside supp(h).
pub fn verify_found(class: &HypothesisClass, h: &Hypothesis, set: &[Example], set_budget: u64) -> Result<bool> {
    if set.len() as u64 > set_budget || !set.iter().all(|x| h.contains(x)) {
        return Ok(false);
    }
    let smaller = proper_subsets(class, h)?;
    Ok(matches!(probe(class, h, set, smaller.as_deref()), Probe::Telltale))
}

pub trait Identifier {
    fn name(&self) -> String;
    /// Observes `x` and returns the current guess.
    fn next(&mut self, x: Example) -> Result<Hypothesis>;
    fn clone_box(&self) -> Box<dyn Identifier>;
}

/// Guesses the first consistent member whose support is minimal among the
/// consistent members (ties broken by enumeration order).
#[derive(Clone)]
pub struct ConsistentMinimal {
    class: HypothesisClass,
    positives: Vec<Example>,
}

pub fn consistent_minimal_identifier(class: &HypothesisClass) -> ConsistentMinimal {
    ConsistentMinimal { class: class.clone(), positives: Vec::new() }
}

impl ConsistentMinimal {
    fn guess(&self) -> Result<Hypothesis> {
        if let Some(m) = self.class.model().minimal_consistent(&self.positives) {
            return Ok(m);
        }
        let consistent: Vec<Hypothesis> = match self.class.version_space(&self.positives) {
            Some(vs) => vs,
            None => (0..MEMBER_SCAN)
                .map_while(|i| self.class.enumerate(i))
                .filter(|h| self.positives.iter().all(|x| h.contains(x)))
                .collect(),
        };
        consistent
            .iter()
            .find(|h| {
                !consistent.iter().any(|g| self.class.relation(g, h) == Some(SupportRelation::ProperSubset))
            })
            .cloned()
            .ok_or(Error::NoConsistentHypothesis)
    }
}

impl Identifier for ConsistentMinimal {
    fn name(&self) -> String {
        format!("consistent_minimal({})", self.class.descriptor())
    }

    fn next(&mut self, x: Example) -> Result<Hypothesis> {
        if !self.positives.contains(&x) {
            self.positives.push(x);
        }
        self.guess()
    }

    fn clone_box(&self) -> Box<dyn Identifier> {
        Box::new(self.clone())
    }
}
