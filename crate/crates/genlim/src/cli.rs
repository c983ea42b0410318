//! Experiment runner: run configuration, the `cmd_*` entry points and
//! report serialization (JSON and CSV).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adversaries::{
    closure_attack, enumeration_adversary, prime_tower_attack, prompted_attack, prompted_stream_adversary,
    rational_attack, AdversaryScript, RationalAttackReport, TowerAttackReport,
};
use crate::classes::{fixture, he_ho, rational_level, tower_chain, union, FixtureParams, Hypothesis, HypothesisClass};
use crate::dimensions::{
    closure_dimension, euc_first_time, littlestone_dimension, prompted_closure_dimension, vc_dimension, DimResult,
    EucOutcome,
};
use crate::error::{Error, Result};
use crate::game::{run_generation_game, run_identification_game, run_prompted_game, IdTranscript, Transcript};
use crate::generators::{
    certified_closure_dimension, chain_limit_generator, countable_generator, delta_uniform_check, limit_generator,
    noisy, point_mass, uniform_generator, Generator, RandomizedGenerator, Verdict,
};
use crate::identification::{consistent_minimal_identifier, telltale_check, TelltaleVerdict};
use crate::prompted::{prompted_uniform_generator, PromptedGenerator};
use crate::space::{Example, Prompt};

/// Version of the report layout described by `schema/report.v1.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Dims,
    Game,
    Prompted,
    Attack,
    Identify,
    Landscape,
    Randomized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub fixture: Option<String>,
    #[serde(default)]
    pub params: FixtureParams,
    pub generator: Option<String>,
    pub adversary: Option<String>,
    pub attack: Option<String>,
    pub levels: u64,
    pub d: Option<u64>,
    pub horizon: u64,
    pub window: u64,
    pub d_max: u64,
    pub prompt_window: u64,
    pub budget: u64,
    pub trials: u64,
    pub delta: f64,
    pub seed: u64,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            fixture: None,
            params: FixtureParams::new(),
            generator: None,
            adversary: None,
            attack: None,
            levels: 4,
            d: None,
            horizon: 50,
            window: 100,
            d_max: 6,
            prompt_window: 8,
            budget: 5,
            trials: 1000,
            delta: 0.05,
            seed: 0,
            format: Format::Json,
        }
    }

    pub fn with_fixture(mut self, name: &str, params: &[(&str, &str)]) -> RunConfig {
        self.fixture = Some(name.to_string());
        self.params = FixtureParams::from_pairs(params);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [
            ("horizon", self.horizon),
            ("window", self.window),
            ("dmax", self.d_max),
            ("prompt-window", self.prompt_window),
            ("budget", self.budget),
            ("trials", self.trials),
            ("levels", self.levels),
        ];
        if let Some((name, _)) = bounds.iter().find(|(_, v)| *v == 0) {
            return Err(Error::BadParams(format!("--{name} must be at least 1")));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::BadParams(format!("--delta {} is not in [0, 1]", self.delta)));
        }
        Ok(())
    }

    fn class(&self) -> Result<HypothesisClass> {
        let name = self.fixture.as_deref().ok_or_else(|| Error::BadParams("--fixture is required".into()))?;
        fixture(name, &self.params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub artifact: String,
    pub version: String,
    pub schema_version: u32,
    pub config: RunConfig,
    pub results: Results,
    /// Excluded from determinism comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Dims(DimsTable),
    Game(TranscriptRecord),
    Attack(AttackResult),
    Identify(IdentifyResult),
    Landscape(Landscape),
    Randomized(RandomizedResult),
}

/// A dimension computation or the reason it could not be carried out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<DimResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DimEntry {
    fn from(r: Result<DimResult>) -> Result<DimEntry> {
        match r {
            Ok(d) => Ok(DimEntry { result: Some(d), error: None }),
            Err(e @ Error::InvariantViolation(_)) => Err(e),
            Err(e) => Ok(DimEntry { result: None, error: Some(e.to_string()) }),
        }
    }

    /// Desk-scale finiteness: the search stayed below `d_max`.
    pub fn is_finite(&self, d_max: u64) -> Option<bool> {
        self.result.as_ref().map(|r| r.value() < d_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EucSummary {
    pub stated: Option<bool>,
    pub stream: String,
    pub outcome: Option<EucOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimsTable {
    pub class: String,
    pub closure: DimEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompted_closure: Option<DimEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vc: Option<DimEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub littlestone: Option<DimEntry>,
    pub euc: EucSummary,
}

/// A transcript together with the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptRecord {
    pub config: RunConfig,
    pub seed: u64,
    #[serde(flatten)]
    pub transcript: Transcript,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackOutcome {
    Closure(Box<TranscriptRecord>),
    PrimeTower(TowerAttackReport),
    Rational(RationalAttackReport),
    Prompted(Box<TranscriptRecord>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackResult {
    pub attack: String,
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<AttackOutcome>,
    /// Set when the attack could not complete (for example a horizon overrun).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentifyResult {
    pub telltale: TelltaleVerdict,
    pub game: IdTranscript,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandscapeRow {
    pub item: String,
    pub class: String,
    pub closure: DimEntry,
    pub vc: DimEntry,
    pub littlestone: DimEntry,
    /// Observed finiteness of (C, VC, L), i.e. no witness of size `d_max`;
    /// `None` when a dimension errored.
    pub observed: [Option<bool>; 3],
    pub expected: [bool; 3],
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Landscape {
    pub rows: Vec<LandscapeRow>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomizedResult {
    pub generator: String,
    pub hypothesis: String,
    pub d_star: u64,
    pub verdict: Verdict,
}

fn report(config: &RunConfig, results: Results) -> Report {
    Report {
        artifact: "genlim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        results,
        wall_clock_ms: None,
    }
}

/// Splits `name:arg` specs.
fn split_arg(text: &str) -> (&str, Option<&str>) {
    match text.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (text, None),
    }
}

fn parse_num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::BadParams(format!("bad {what} `{s}`")))
}

fn member(class: &HypothesisClass, i: usize) -> Result<Hypothesis> {
    class.enumerate(i).ok_or_else(|| Error::BadParams(format!("{} has no member {i}", class.descriptor())))
}

/// The nested prefixes H_1 ⊆ ... ⊆ H_len of a class enumeration.
pub fn enumeration_chain(class: &HypothesisClass, len: usize) -> Result<Vec<HypothesisClass>> {
    if class.descriptor() == "plus_full_naturals" {
        return Ok(tower_chain(len));
    }
    let members = class.prefix(len)?;
    Ok((1..=members.len())
        .map(|i| {
            HypothesisClass::explicit(format!("{}[..{i}]", class.descriptor()), class.space(), members[..i].to_vec())
        })
        .collect())
}

fn build_generator(config: &RunConfig, class: &HypothesisClass) -> Result<Box<dyn Generator>> {
    let text = config.generator.as_deref().unwrap_or("uniform");
    let (name, arg) = split_arg(text);
    match name {
        "uniform" => {
            let cap = match arg {
                Some(a) => parse_num("cap", a)?,
                None => certified_closure_dimension(class, config.d_max, config.window).map_err(|_| {
                    Error::BadParams(format!("closure dimension of {} is not certified; use uniform:CAP", class.descriptor()))
                })?,
            };
            Ok(Box::new(uniform_generator(class, cap, config.window)))
        }
        "countable" => {
            let len = arg.map(|a| parse_num("chain length", a)).transpose()?.unwrap_or(50);
            let chain = enumeration_chain(class, len)?;
            Ok(Box::new(countable_generator(chain, config.d_max, config.window)?))
        }
        _ => Err(Error::BadParams(format!("unknown generator `{text}` (uniform[:CAP], countable[:LEN])"))),
    }
}

fn build_adversary(config: &RunConfig, class: &HypothesisClass) -> Result<AdversaryScript> {
    let text = config.adversary.as_deref().unwrap_or("enumeration");
    let (name, arg) = split_arg(text);
    match name {
        "enumeration" => {
            let i = arg.map(|a| parse_num("member index", a)).transpose()?.unwrap_or(0);
            Ok(enumeration_adversary(&member(class, i)?))
        }
        "closure" => {
            let d = match arg.map(|a| parse_num("d", a)).transpose()?.or(config.d) {
                Some(d) => d,
                None => certified_closure_dimension(class, config.d_max, config.window)?,
            };
            closure_attack(class, d, config.window)
        }
        _ => Err(Error::BadParams(format!("unknown adversary `{text}` (enumeration[:I], closure[:D])"))),
    }
}

fn record(config: &RunConfig, transcript: Transcript) -> TranscriptRecord {
    TranscriptRecord { config: config.clone(), seed: config.seed, transcript }
}

/// Dimension table of a fixture.
pub fn cmd_dims(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let class = config.class()?;
    let (d_max, window) = (config.d_max, config.window);
    let closure = DimEntry::from(closure_dimension(&class, d_max, window))?;
    let (prompted_closure, vc, littlestone) = if class.prompted() {
        let pc = prompted_closure_dimension(&class, d_max, window, config.prompt_window);
        (Some(DimEntry::from(pc)?), None, None)
    } else {
        let vc = DimEntry::from(vc_dimension(&class, d_max, window))?;
        let l = DimEntry::from(littlestone_dimension(&class, d_max, window))?;
        (None, Some(vc), Some(l))
    };
    Ok(report(config, Results::Dims(DimsTable { class: class.descriptor(), closure, prompted_closure, vc, littlestone, euc: euc_summary(&class, config)? })))
}

fn euc_summary(class: &HypothesisClass, config: &RunConfig) -> Result<EucSummary> {
    let stated = class.facts().euc;
    let Some(h) = class.enumerate(0) else {
        return Ok(EucSummary { stated, stream: String::new(), outcome: None, error: None });
    };
    let stream: Vec<Example> = h.support().take(config.horizon as usize).collect();
    let name = format!("rank-order enumeration of {}", h.descriptor());
    Ok(match euc_first_time(class, &stream, config.horizon, config.window) {
        Ok(o) => EucSummary { stated, stream: name, outcome: Some(o), error: None },
        Err(e @ Error::InvariantViolation(_)) => return Err(e),
        Err(e) => EucSummary { stated, stream: name, outcome: None, error: Some(e.to_string()) },
    })
}

/// One generation game.
pub fn cmd_game(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let class = config.class()?;
    let g = build_generator(config, &class)?;
    let mut a = build_adversary(config, &class)?;
    let t = run_generation_game(&*g, &mut a, config.horizon)?;
    Ok(report(config, Results::Game(record(config, t))))
}

/// One prompted game: `attack:D` or `stream:I` adversaries.
pub fn cmd_prompted(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let class = config.class()?;
    if !class.prompted() {
        return Err(Error::BadParams(format!("{} is not a prompted class", class.descriptor())));
    }
    let g = build_prompted_generator(config, &class)?;
    let text = config.adversary.as_deref().unwrap_or("stream:0");
    let t = match split_arg(text) {
        ("attack", arg) => {
            let d = arg.map(|a| parse_num("d", a)).transpose()?.or(config.d).unwrap_or(3);
            run_prompted_game(&*g, &mut prompted_attack(&class, d)?, config.horizon)?
        }
        ("stream", arg) => {
            let h = member(&class, arg.map(|a| parse_num("member index", a)).transpose()?.unwrap_or(0))?;
            let xs: Vec<Example> = class.space().iter().take(config.horizon as usize).collect();
            let prompts: Vec<Prompt> = (1..=config.prompt_window).filter_map(Prompt::new).collect();
            run_prompted_game(&*g, &mut prompted_stream_adversary(&h, xs, prompts)?, config.horizon)?
        }
        _ => return Err(Error::BadParams(format!("unknown prompted adversary `{text}` (attack[:D], stream[:I])"))),
    };
    Ok(report(config, Results::Game(record(config, t))))
}

fn build_prompted_generator(config: &RunConfig, class: &HypothesisClass) -> Result<Box<dyn PromptedGenerator>> {
    let text = config.generator.as_deref().unwrap_or("uniform");
    match split_arg(text) {
        ("uniform", arg) => {
            let cap = match arg {
                Some(a) => parse_num("cap", a)?,
                None => {
                    let r = prompted_closure_dimension(class, config.d_max, config.window, config.prompt_window)?;
                    if !r.is_exact() {
                        return Err(Error::BadParams("prompted closure dimension not certified; use uniform:CAP".into()));
                    }
                    r.value()
                }
            };
            Ok(Box::new(prompted_uniform_generator(class, cap, config.window)))
        }
        _ => Err(Error::BadParams(format!("unknown prompted generator `{text}` (uniform[:CAP])"))),
    }
}

/// The attack constructions: closure, prime_tower, rational, prompted.
pub fn cmd_attack(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let attack = config.attack.as_deref().unwrap_or("closure");
    let (generator, outcome) = match attack {
        "closure" => {
            let class = config.class()?;
            let d = match config.d {
                Some(d) => d,
                None => certified_closure_dimension(&class, config.d_max, config.window)?,
            };
            let g = uniform_generator(&class, d.saturating_sub(1), config.window);
            let mut a = closure_attack(&class, d, config.window)?;
            let t = run_generation_game(&g, &mut a, config.horizon)?;
            (g.name(), Ok(AttackOutcome::Closure(Box::new(record(config, t)))))
        }
        "prime_tower" => {
            let len = config.generator.as_deref().map(split_arg).and_then(|(_, a)| a).map(|a| parse_num("chain length", a)).transpose()?;
            let g = countable_generator(tower_chain(len.unwrap_or(200)), config.d_max, config.window)?;
            (g.name(), prime_tower_attack(&g, config.levels, config.horizon).map(AttackOutcome::PrimeTower))
        }
        "rational" => {
            let levels: Vec<HypothesisClass> = (1..=config.levels.max(1)).map(rational_level).collect();
            let g: Box<dyn Generator> = match config.generator.as_deref().unwrap_or("limit") {
                "limit" => Box::new(limit_generator(levels.clone(), &vec![0; levels.len()], config.window)?),
                "chain_limit" => Box::new(chain_limit_generator(rational_chain(config.levels)?, config.window)?),
                other => return Err(Error::BadParams(format!("unknown generator `{other}` (limit, chain_limit)"))),
            };
            (g.name(), rational_attack(&*g, config.levels, config.horizon).map(AttackOutcome::Rational))
        }
        "prompted" => {
            let class = fixture("prompted_two", &FixtureParams::new())?;
            let d = config.d.unwrap_or(3);
            let g = prompted_uniform_generator(&class, d.saturating_sub(1), config.window);
            let t = run_prompted_game(&g, &mut prompted_attack(&class, d)?, config.horizon)?;
            (g.name(), Ok(AttackOutcome::Prompted(Box::new(record(config, t)))))
        }
        other => return Err(Error::BadParams(format!("unknown attack `{other}` (closure, prime_tower, rational, prompted)"))),
    };
    let (outcome, error) = match outcome {
        Ok(o) => (Some(o), None),
        Err(e @ (Error::InvariantViolation(_) | Error::BadParams(_) | Error::Precondition(_))) => return Err(e),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(report(config, Results::Attack(AttackResult { attack: attack.into(), generator, outcome, error })))
}

/// The cumulative chain G_n = H_1 ∪ ... ∪ H_n of rational levels.
pub fn rational_chain(levels: u64) -> Result<Vec<HypothesisClass>> {
    (1..=levels).map(|n| fixture("rational_q", &FixtureParams::new().with("i_max", n))).collect()
}

/// Tell-tale check plus an identification game for one member.
pub fn cmd_identify(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let class = config.class()?;
    let mut a = build_adversary(config, &class)?;
    let h = a.committed().cloned().ok_or_else(|| Error::BadParams("identify needs an enumeration adversary".into()))?;
    let telltale = telltale_check(&class, &h, config.budget, config.window)?;
    let game = run_identification_game(&consistent_minimal_identifier(&class), &mut a, config.horizon)?;
    Ok(report(config, Results::Identify(IdentifyResult { telltale, game })))
}

/// The six landscape classes with expected finiteness of (C, VC, L).
pub fn landscape_classes() -> Result<Vec<(&'static str, HypothesisClass, [bool; 3])>> {
    let none = FixtureParams::new();
    Ok(vec![
        ("(i) uniformly generatable, not PAC learnable", fixture("a_or_nonpositive_finite", &none)?, [true, false, false]),
        ("(ii) online learnable, not uniformly generatable", he_ho(7), [false, true, true]),
        ("(iii) online learnable and uniformly generatable", fixture("singleton_or_nonpositive", &none)?, [true, true, true]),
        (
            "(iv) PAC learnable, neither online learnable nor uniformly generatable",
            union("thresholds+he_ho", vec![fixture("thresholds", &none)?, he_ho(7)]),
            [false, true, false],
        ),
        ("(v) PAC learnable and uniformly generatable, not online learnable", fixture("thresholds", &none)?, [true, true, false]),
        ("(vi) neither PAC learnable nor uniformly generatable", fixture("cofinite", &none)?, [false, false, false]),
    ])
}

pub fn cmd_landscape(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let (d_max, window) = (config.d_max, config.window);
    let mut rows = Vec::new();
    for (item, class, expected) in landscape_classes()? {
        let closure = DimEntry::from(closure_dimension(&class, d_max, window))?;
        let vc = DimEntry::from(vc_dimension(&class, d_max, window))?;
        let littlestone = DimEntry::from(littlestone_dimension(&class, d_max, window))?;
        let observed = [closure.is_finite(d_max), vc.is_finite(d_max), littlestone.is_finite(d_max)];
        let pass = observed.iter().zip(expected).all(|(o, e)| *o == Some(e));
        rows.push(LandscapeRow { item: item.into(), class: class.descriptor(), closure, vc, littlestone, observed, expected, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(report(config, Results::Landscape(Landscape { rows, pass })))
}

/// delta-uniform check of `point_mass` or `noisy:P` over a uniform generator.
pub fn cmd_randomized(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let class = config.class()?;
    let cap = certified_closure_dimension(&class, config.d_max, config.window)?;
    let base = Box::new(uniform_generator(&class, cap, config.window));
    let text = config.generator.as_deref().unwrap_or("point_mass");
    let g: Box<dyn RandomizedGenerator> = match split_arg(text) {
        ("point_mass", None) => Box::new(point_mass(base)),
        ("noisy", Some(p)) => Box::new(noisy(base, parse_num("noise probability", p)?)?),
        _ => return Err(Error::BadParams(format!("unknown randomized generator `{text}` (point_mass, noisy:P)"))),
    };
    let i = match config.adversary.as_deref().map(split_arg) {
        None => 0,
        Some(("enumeration", arg)) => arg.map(|a| parse_num("member index", a)).transpose()?.unwrap_or(0),
        Some((other, _)) => return Err(Error::BadParams(format!("unknown adversary `{other}` (enumeration[:I])"))),
    };
    let h = member(&class, i)?;
    let stream: Vec<Example> = h.support().take(config.horizon as usize).collect();
    let d_star = config.d.unwrap_or(cap + 1);
    let verdict = delta_uniform_check(&*g, &h, &stream, d_star, config.delta, config.trials, config.horizon, config.seed)?;
    Ok(report(
        config,
        Results::Randomized(RandomizedResult { generator: g.name(), hypothesis: h.descriptor().into(), d_star, verdict }),
    ))
}

pub fn run(config: &RunConfig) -> Result<Report> {
    match config.command {
        Command::Dims => cmd_dims(config),
        Command::Game => cmd_game(config),
        Command::Prompted => cmd_prompted(config),
        Command::Attack => cmd_attack(config),
        Command::Identify => cmd_identify(config),
        Command::Landscape => cmd_landscape(config),
        Command::Randomized => cmd_randomized(config),
    }
}

pub fn to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::InvariantViolation(format!("report serialization: {e}")))
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// CSV: one row per round for transcripts, `path,value` rows otherwise.
pub fn to_csv(report: &Report) -> Result<String> {
    let value = serde_json::to_value(report).map_err(|e| Error::InvariantViolation(e.to_string()))?;
    let rounds = value.pointer("/results/rounds").or_else(|| value.pointer("/results/outcome/closure/rounds"));
    let rounds = rounds.or_else(|| value.pointer("/results/outcome/prompted/rounds"));
    let mut out = String::new();
    if let Some(Value::Array(rounds)) = rounds {
        let cols = ["t", "x", "label", "prompt", "emitted", "mistake", "distinct_count", "prompt_count"];
        out.push_str(&cols.join(","));
        out.push('\n');
        for r in rounds {
            let row: Vec<String> = cols.iter().map(|c| csv_field(r.get(*c).unwrap_or(&Value::Null))).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        return Ok(out);
    }
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    out.push_str("path,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{},{}", csv_field(&Value::String(k)), csv_field(&v));
    }
    Ok(out)
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bounds_are_rejected() {
        let mut c = RunConfig::new(Command::Landscape);
        c.window = 0;
        assert!(matches!(c.validate(), Err(Error::BadParams(_))));
        assert_eq!(Error::BadParams(String::new()).exit_code(), 1);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut v = serde_json::to_value(RunConfig::new(Command::Dims)).unwrap();
        v["colour"] = Value::from(1);
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn csv_quotes_fields() {
        assert_eq!(csv_field(&Value::String("a,b".into())), "\"a,b\"");
        assert_eq!(csv_field(&Value::Bool(true)), "true");
    }
}
