//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines appear in order; exits non-zero on any unexpected FAIL.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use genlim::adversaries::{
    closure_attack, enumeration_adversary, prime_tower_attack, prompted_attack, rational_attack, stream_adversary,
};
use genlim::classes::{
    all_ones_member, finite_tailed, fixture, he_ho, naturals_member, nonpositive_member, prompted_tailed,
    rational_level, tower_chain, FixtureParams, Hypothesis, HypothesisClass,
};
use genlim::cli::{self, enumeration_chain, rational_chain, Command, RunConfig};
use genlim::closure::{closure_membership, closure_set, Membership};
use genlim::dimensions::{
    closure_dimension, euc_first_time, prompted_closure_dimension, vc_dimension, DimResult,
    EucOutcome,
};
use genlim::game::{run_generation_game, run_identification_game, run_prompted_game, FirstPerfect};
use genlim::generators::{
    certified_closure_dimension, chain_limit_generator, countable_generator, delta_uniform_check,
    estimate_sample_complexity, limit_generator, noisy, point_mass, uniform_generator, Generator, SampleComplexity,
};
use genlim::identification::{consistent_minimal_identifier, telltale_check, verify_found, TelltaleVerdict};
use genlim::prompted::{prompted_closure, prompted_uniform_generator};
use genlim::space::{Example, Prompt, SpaceTag};

type Outcome = Result<String, String>;

fn named(name: &str, params: &[(&str, &str)]) -> HypothesisClass {
    fixture(name, &FixtureParams::from_pairs(params)).expect("fixture")
}

fn ints(xs: impl IntoIterator<Item = i64>) -> Vec<Example> {
    xs.into_iter().map(Example::Int).collect()
}

/// A_n = {n(n-1)/2 + 1, ..., n(n+1)/2}.
fn a_block(n: i64) -> Vec<Example> {
    ints(n * (n - 1) / 2 + 1..=n * (n + 1) / 2)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// 1 -------------------------------------------------------------------------

fn closure_facts() -> Outcome {
    let class = named("a_or_nonpositive_all", &[]);
    let prefix = [Example::Int(-5)];
    let mut checked = 0;
    for x in SpaceTag::IntSpace.iter().take(200) {
        let Example::Int(v) = x else { unreachable!() };
        let want = if v <= 0 { Membership::In } else { Membership::Out };
        let got = closure_membership(&class, &prefix, &x).map_err(e)?;
        ensure(got == want, || format!("closure membership of {v}: {got:?}, expected {want:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} examples of rank < 200 match <-5> = Z<=0"))
}

// 2 -------------------------------------------------------------------------

fn dims_of(config: &RunConfig) -> Result<cli::DimsTable, String> {
    match cli::cmd_dims(config).map_err(e)?.results {
        cli::Results::Dims(t) => Ok(t),
        other => Err(format!("unexpected results {other:?}")),
    }
}

fn dimensions() -> Outcome {
    let all = dims_of(&RunConfig::new(Command::Dims).with_fixture("a_or_nonpositive_all", &[]))?;
    ensure(all.closure.result == Some(DimResult::Zero), || format!("C(a_or_nonpositive_all) = {:?}", all.closure))?;

    let mut config = RunConfig::new(Command::Dims).with_fixture("he_ho", &[("d_max", "7")]);
    config.d_max = 6;
    config.window = 100;
    let hh = dims_of(&config)?;
    let a6 = a_block(6);
    match &hh.closure.result {
        Some(DimResult::AtLeast { d: 6, witness, .. }) => {
            ensure(witness.examples == a6, || format!("witness {:?} is not A_6", witness.examples))?;
            let class = he_ho(7);
            let closure = closure_set(&class, &witness.examples, 100).map_err(e)?;
            ensure(closure.finite_elements() == Some(&a6[..]), || format!("closure of A_6 is {closure:?}"))?;
        }
        other => return Err(format!("C(he_ho(7)) = {other:?}, expected AtLeast(6)")),
    }
    let l = hh.littlestone.as_ref().and_then(|l| l.result.clone());
    ensure(matches!(l, Some(DimResult::Exact { d: 2, .. })), || format!("L(he_ho(7)) = {l:?}"))?;

    let finite = named("a_or_nonpositive_finite", &[]);
    let vc = vc_dimension(&finite, 5, 100).map_err(e)?;
    let DimResult::AtLeast { d: 5, witness, .. } = vc else {
        return Err(format!("VC(a_or_nonpositive_finite) = {vc:?}"));
    };
    // Each labeling of the witness is realized by the member whose finite part is the 1-labeled points.
    for mask in 0u32..32 {
        let ones: Vec<i64> =
            witness.examples.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.as_int().unwrap()).collect();
        let h = nonpositive_member(&ones);
        for (i, x) in witness.examples.iter().enumerate() {
            ensure(h.contains(x) == (mask >> i & 1 == 1), || format!("labeling {mask:05b} not realized at {x}"))?;
        }
    }
    ensure(witness.examples.iter().all(|x| x.as_int().is_some_and(|v| v >= 1)), || "witness not positive".into())?;
    Ok(format!("C = Zero; C(he_ho(7)) >= 6 via A_6; L(he_ho(7)) = 2; VC >= 5 on {:?}", witness.examples))
}

// 3 -------------------------------------------------------------------------

/// Member code: bits 0..4 give F ⊆ {1..4}, bit 4 the tail residue mod 2.
fn members_of(codes: &[u8]) -> Vec<(Vec<i64>, u64)> {
    codes.iter().map(|&c| ((1..=4).filter(|i| c >> (i - 1) & 1 == 1).collect(), u64::from(c >> 4))).collect()
}

/// C by brute force: a set S ⊆ {1..4} has a finite closure iff its version
/// space is non-empty and mixes both residues (a single residue keeps an
/// infinite tail); any example below zero fixes the residue.
fn oracle_c(codes: &[u8]) -> u64 {
    let mut best = 0;
    for s in 1u8..16 {
        let vs: Vec<u8> = codes.iter().copied().filter(|c| c & 15 & s == s).collect();
        if vs.iter().any(|c| c >> 4 != vs[0] >> 4) {
            best = best.max(u64::from(s.count_ones()));
        }
    }
    best
}

fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if p.iter().collect::<BTreeSet<_>>().len() == 4 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn transform(code: u8, perm: &[usize; 4], flip: bool) -> u8 {
    let f = (0..4).filter(|&i| code >> i & 1 == 1).fold(0u8, |f, i| f | 1 << perm[i]);
    f | ((code >> 4) ^ u8::from(flip)) << 4
}

fn subsets(n: u8, k: usize, start: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

#[derive(Default)]
struct SweepStats {
    classes: u64,
    nodes: u64,
    failure_count: u64,
    failures: Vec<String>,
    attack_failures: Vec<String>,
    dim_mismatches: Vec<String>,
}

/// Every repetition-free stream of length <= 8 over F_h and the first two
/// tail elements of h; checks every round with at least c + 1 distinct examples.
fn stream_tree(g: &dyn Generator, h: &Hypothesis, pool: &[Example], seen: &mut Vec<Example>, c: u64, stats: &mut SweepStats) {
    if seen.len() >= 8 {
        return;
    }
    for &x in pool {
        if seen.contains(&x) {
            continue;
        }
        let mut next = g.clone_box();
        stats.nodes += 1;
        let out = next.next(x);
        seen.push(x);
        if seen.len() as u64 > c {
            let ok = matches!(out, Ok(y) if h.contains(&y) && !seen.contains(&y));
            if !ok {
                stats.failure_count += 1;
                if stats.failures.len() < 5 {
                    stats.failures.push(format!("{} on {seen:?}: {out:?}", h.descriptor()));
                }
            }
        }
        stream_tree(&*next, h, pool, seen, c, stats);
        seen.pop();
    }
}

fn check_tailed_class(codes: &[u8], cross_check: bool, stats: &mut SweepStats) -> Result<(), String> {
    let members = members_of(codes);
    let class = finite_tailed(4, 2, &members).map_err(e)?;
    let c = oracle_c(codes);
    stats.classes += 1;
    if cross_check {
        let r = closure_dimension(&class, 6, 20).map_err(e)?;
        if r.value() != c || !r.is_exact() {
            stats.dim_mismatches.push(format!("{codes:?}: oracle {c}, search {r:?}"));
        }
    }
    let g = uniform_generator(&class, c, 50);
    for (h, (f, r)) in class.members().unwrap().iter().zip(&members) {
        let mut pool = ints(f.iter().copied());
        pool.extend(ints(if *r == 0 { [-2, -4] } else { [-1, -3] }));
        stream_tree(&g, h, &pool, &mut Vec::new(), c, stats);
    }
    if c >= 1 {
        let g = uniform_generator(&class, c - 1, 50);
        let mut a = closure_attack(&class, c, 20).map_err(e)?;
        let tr = run_generation_game(&g, &mut a, 8).map_err(e)?;
        if tr.mistakes() == 0 {
            stats.attack_failures.push(format!("{codes:?} (C = {c})"));
        }
    }
    Ok(())
}

fn uniform_oracle_equivalence() -> Outcome {
    // Classes are checked up to the symmetry group S_4 x Z_2 (relabel {1..4},
    // swap the tail residues), which preserves C, streams and mistakes.
    let perms = permutations();
    let canonical = |cl: &[u8]| {
        perms.iter().all(|p| {
            [false, true].iter().all(|&flip| {
                let mut t: Vec<u8> = cl.iter().map(|&c| transform(c, p, flip)).collect();
                t.sort_unstable();
                t.as_slice() >= cl
            })
        })
    };
    let mut stats = SweepStats::default();
    let mut canon = 0;
    for k in 2..=6 {
        let mut all = Vec::new();
        subsets(32, k, 0, &mut Vec::new(), &mut all);
        for cl in all.into_iter().filter(|cl| canonical(cl)) {
            check_tailed_class(&cl, canon % 10 == 0, &mut stats)?;
            canon += 1;
        }
    }
    // Seeded spot check of non-canonical representatives.
    let mut rng = ChaCha8Rng::seed_from_u64(0xa3);
    let codes: Vec<u8> = (0..32).collect();
    let mut spot = 0;
    while spot < 200 {
        let k = rng.gen_range(2..=6);
        let mut cl: Vec<u8> = codes.choose_multiple(&mut rng, k).copied().collect();
        cl.sort_unstable();
        if canonical(&cl) {
            continue;
        }
        check_tailed_class(&cl, true, &mut stats)?;
        spot += 1;
    }
    ensure(stats.failure_count == 0, || format!("{} generator mistakes, e.g. {:?}", stats.failure_count, stats.failures))?;
    ensure(stats.attack_failures.is_empty(), || format!("attack forced no mistake: {:?}", stats.attack_failures))?;
    ensure(stats.dim_mismatches.is_empty(), || format!("closure dimension mismatches: {:?}", stats.dim_mismatches))?;
    Ok(format!(
        "{canon} canonical classes + {spot} non-canonical ({} total), {} generator states, 0 failures",
        stats.classes, stats.nodes
    ))
}

// 4 -------------------------------------------------------------------------

/// Twenty streams over supp(h): rank order, positives first, an adaptive
/// echo stream, repeated examples and seeded shuffles.
fn adversarial_suite(g: &dyn Generator, h: &Hypothesis, len: usize, seed: u64) -> Vec<Vec<Example>> {
    let base: Vec<Example> = h.support().take(len).collect();
    let mut suite = vec![base.clone()];
    let (mut pos, neg): (Vec<Example>, Vec<Example>) = base.iter().partition(|x| x.as_int().is_some_and(|v| v > 0));
    pos.extend(neg);
    suite.push(pos);
    // Feed back the generator's own output whenever it is a fresh support element.
    let mut echo = Vec::new();
    let mut sim = g.clone_box();
    let mut rest = base.iter().copied();
    let mut next = base[0];
    while echo.len() < len {
        echo.push(next);
        let seen: BTreeSet<Example> = echo.iter().copied().collect();
        let out = sim.next(next).ok().filter(|y| h.contains(y) && !seen.contains(y));
        next = match out {
            Some(y) => y,
            None => match rest.find(|x| !seen.contains(x)) {
                Some(x) => x,
                None => break,
            },
        };
    }
    suite.push(echo);
    suite.push(base.iter().flat_map(|&x| [x, x]).take(len).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while suite.len() < 20 {
        let mut s = base.clone();
        s.shuffle(&mut rng);
        suite.push(s);
    }
    suite
}

fn nonuniform_generation() -> Outcome {
    let class = named("a_or_nonpositive_finite", &[]);
    let chain = enumeration_chain(&class, 50).map_err(e)?;
    let members = class.prefix(50).map_err(e)?;
    let g = countable_generator(chain.clone(), 6, 100).map_err(e)?;
    let horizon = 40;
    let mut d = Vec::new();
    for (i, h) in members.iter().enumerate() {
        let suite = adversarial_suite(&g, h, horizon, 1000 + i as u64);
        let d_h = match estimate_sample_complexity(&g, h, &suite, horizon as u64) {
            SampleComplexity::Finite(d_h) => d_h,
            SampleComplexity::Unbounded => return Err(format!("d_h unbounded for {}", h.descriptor())),
        };
        // Held-out suite: no mistake once d_h distinct examples are seen.
        for stream in adversarial_suite(&g, h, horizon, 5000 + i as u64) {
            let mut a = stream_adversary(h, stream);
            let tr = run_generation_game(&g, &mut a, horizon as u64).map_err(e)?;
            ensure(tr.aborted.is_none() && tr.perfect_after_distinct(d_h), || {
                format!("{}: mistake after {d_h} distinct on {:?}", h.descriptor(), tr.rounds.iter().map(|r| r.x).collect::<Vec<_>>())
            })?;
        }
        d.push(d_h);
    }
    for (n, link) in chain.iter().enumerate() {
        let c = closure_dimension(link, 6, 100).map_err(e)?.value();
        let worst = d[..=n].iter().copied().max().unwrap();
        ensure(worst >= c, || format!("prefix {}: max d_h {worst} < C {c}", n + 1))?;
    }
    Ok(format!("50 members x 20 streams, d_h in {}..={}", d.iter().min().unwrap(), d.iter().max().unwrap()))
}

// 5 -------------------------------------------------------------------------

fn prime_tower() -> Outcome {
    let g = countable_generator(tower_chain(200), 40, 100).map_err(e)?;
    let r = prime_tower_attack(&g, 4, 60).map_err(e)?;
    let increasing = r.d.len() == 4 && r.d.windows(2).all(|w| w[0] < w[1]);
    ensure(increasing && r.strictly_increasing, || format!("d = {:?}", r.d))?;
    Ok(format!("d = {:?}", r.d))
}

// 6 -------------------------------------------------------------------------

fn limit_generation() -> Outcome {
    let naturals = HypothesisClass::explicit("naturals", SpaceTag::IntSpace, vec![naturals_member()]);
    let classes = vec![named("a_or_nonpositive_all", &[]), naturals];
    let g = limit_generator(classes, &[0, 0], 300).map_err(e)?;
    let horizon = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut runs = Vec::new();
    // Enumerations of N that start at 1, the first element of the N-closure.
    for k in 0..10 {
        let h = naturals_member();
        let mut s: Vec<Example> = h.support().take(horizon).collect();
        if k > 0 {
            s[1..].shuffle(&mut rng);
        }
        runs.push((h, s));
    }
    for k in 0..10i64 {
        let a: Vec<i64> = (1..=2 * k + 1).map(|v| v * (k + 1)).collect();
        let h = nonpositive_member(&a);
        let mut s: Vec<Example> = h.support().take(horizon).collect();
        // Positives first, then a seeded shuffle of the rest.
        s.sort_by_key(|x| x.as_int().map_or(true, |v| v <= 0));
        let split = a.len();
        s[split..].shuffle(&mut rng);
        if k % 2 == 1 {
            s.shuffle(&mut rng);
        }
        runs.push((h, s));
    }
    let mut worst = 0;
    for (h, s) in runs {
        let first_nonpositive = s.iter().position(|x| x.as_int().is_some_and(|v| v <= 0)).map(|i| i as u64 + 1);
        let bound = first_nonpositive.unwrap_or(1);
        let mut a = stream_adversary(&h, s);
        let tr = run_generation_game(&g, &mut a, horizon as u64).map_err(e)?;
        match tr.first_perfect_after {
            FirstPerfect::Round(r) if r <= bound => worst = worst.max(r),
            other => return Err(format!("{}: first perfect {other:?}, bound {bound}", h.descriptor())),
        }
    }
    // Fully shuffled N-streams: covered prefixes tie at 0 until 1 is seen,
    // and ties go to the first class, so the first perfect round is exactly
    // the round at which 1 appears.
    let mut late = Vec::new();
    for _ in 0..5 {
        let h = naturals_member();
        let mut s: Vec<Example> = h.support().take(horizon).collect();
        s.shuffle(&mut rng);
        let one = s.iter().position(|x| *x == Example::Int(1)).unwrap() as u64 + 1;
        let tr = run_generation_game(&g, &mut stream_adversary(&h, s), horizon as u64).map_err(e)?;
        ensure(tr.first_perfect_after == FirstPerfect::Round(one), || {
            format!("shuffled N-stream: first perfect {:?}, 1 appears at {one}", tr.first_perfect_after)
        })?;
        late.push(one);
    }
    Ok(format!(
        "20 enumerations, horizon 200, latest first-perfect round {worst}; shuffled N-streams perfect from the round 1 appears {late:?}"
    ))
}

// 7 -------------------------------------------------------------------------

fn rational() -> Outcome {
    let levels: Vec<HypothesisClass> = (1..=4).map(rational_level).collect();
    let limit = limit_generator(levels, &[0; 4], 100).map_err(e)?;
    let lr = rational_attack(&limit, 4, 200).map_err(e)?;
    let limit_hits: Vec<(u64, u64, bool)> = lr.checkpoints.iter().map(|c| (c.level, c.round, c.hit())).collect();
    let supplementary = format!("limit_generator over H_1..H_4: checkpoints (level, round, hit) {limit_hits:?}");

    let g = chain_limit_generator(rational_chain(4).map_err(e)?, 100).map_err(e)?;
    let r = rational_attack(&g, 4, 200).map_err(|err| format!("chain_limit_generator: {err}; {supplementary}"))?;
    let levels: Vec<u64> = r.checkpoints.iter().map(|c| c.level).collect();
    ensure(levels == [2, 3, 4] && r.checkpoints.iter().all(|c| c.hit()), || {
        format!("chain_limit_generator checkpoints {:?}; {supplementary}", r.checkpoints)
    })?;
    Ok(format!("chain_limit_generator hits t_2..t_4; {supplementary}"))
}

// 8 -------------------------------------------------------------------------

/// Per-prompt closure dimension of a prompted_tailed class by brute force:
/// S ⊆ {1..m} (examples outside fix the shift), version space labels S with
/// y, and its shifts differ so the tails cancel.
fn oracle_pc(m: u64, members: &[(Vec<u64>, u64)], y: u64) -> u64 {
    let mut best = 0;
    for s in 1u32..1 << m {
        let vs: Vec<&(Vec<u64>, u64)> =
            members.iter().filter(|(labels, _)| (0..m as usize).all(|i| s >> i & 1 == 0 || labels[i] == y)).collect();
        if vs.iter().any(|(_, shift)| *shift != vs[0].1) {
            best = best.max(u64::from(s.count_ones()));
        }
    }
    best
}

fn prompted() -> Outcome {
    let two = named("prompted_two", &[]);
    for d in 2..=8u64 {
        let a = a_block(d as i64);
        let c = prompted_closure(&two, &a, Prompt::new(d).unwrap(), 100).map_err(e)?;
        ensure(c.finite_elements() == Some(&a[..]), || format!("prompted closure of A_{d} at prompt {d}: {c:?}"))?;
    }
    let mut attacks = 0;
    for d in 2..=6u64 {
        for cap in 0..d {
            let g = prompted_uniform_generator(&two, cap, 100);
            let tr = run_prompted_game(&g, &mut prompted_attack(&two, d).map_err(e)?, d + 1).map_err(e)?;
            ensure(tr.rounds.iter().any(|r| r.mistake && r.t <= d + 1), || format!("no mistake for d = {d}, cap {cap}"))?;
            attacks += 1;
        }
    }
    // All prompted_tailed classes with m = 3, Y = 2 and 2 or 3 members.
    let mut pool = Vec::new();
    for code in 0u64..8 {
        for shift in 0..2 {
            pool.push(((0..3).map(|i| 1 + (code >> i & 1)).collect::<Vec<u64>>(), shift));
        }
    }
    let mut classes = 0;
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            for third in (j + 1..pool.len()).map(Some).chain([None]) {
                let mut members = vec![pool[i].clone(), pool[j].clone()];
                members.extend(third.map(|k| pool[k].clone()));
                let class = prompted_tailed(3, 2, &members).map_err(e)?;
                let want = (1..=2).map(|y| oracle_pc(3, &members, y)).max().unwrap();
                let got = prompted_closure_dimension(&class, 4, 40, 2).map_err(e)?;
                ensure(got.value() == want && got.is_exact(), || format!("{members:?}: PC {got:?}, max_y C_y {want}"))?;
                classes += 1;
            }
        }
    }
    Ok(format!("A_2..A_8 closed; {attacks} attack games forced mistakes; PC = max_y C_y on {classes} classes"))
}

// 9 -------------------------------------------------------------------------

fn identification() -> Outcome {
    let finite = named("a_or_nonpositive_finite", &[]);
    let ones = all_ones_member();
    let v = telltale_check(&finite, &ones, 5, 200).map_err(e)?;
    ensure(matches!(v, TelltaleVerdict::RefutedWithinBudget { .. }), || format!("all-ones verdict {v:?}"))?;
    let id = consistent_minimal_identifier(&finite);
    let tr = run_identification_game(&id, &mut enumeration_adversary(&ones), 100).map_err(e)?;
    ensure(tr.stabilized_at.is_none(), || format!("identifier stabilized on all-ones at {:?}", tr.stabilized_at))?;

    let hh = he_ho(7);
    let id = consistent_minimal_identifier(&hh);
    let mut latest = 0;
    for h in hh.members().unwrap() {
        let v = telltale_check(&hh, h, 5, 200).map_err(e)?;
        let TelltaleVerdict::Found { set } = &v else { return Err(format!("{}: {v:?}", h.descriptor())) };
        ensure(verify_found(&hh, h, set, 5).map_err(e)?, || format!("{}: tell-tale {set:?} rejected", h.descriptor()))?;
        // Independent check: no other member contains the set and lies inside supp(h).
        for g in hh.members().unwrap().iter().filter(|g| g.descriptor() != h.descriptor()) {
            let inside = SpaceTag::IntSpace.iter().take(400).all(|x| !g.contains(&x) || h.contains(&x));
            ensure(!(inside && set.iter().all(|x| g.contains(x))), || format!("{} refutes {set:?}", g.descriptor()))?;
        }
        let tr = run_identification_game(&id, &mut enumeration_adversary(h), 100).map_err(e)?;
        match tr.stabilized_at {
            Some(t) => latest = latest.max(t),
            None => return Err(format!("identifier did not stabilize on {}", h.descriptor())),
        }
    }
    Ok(format!("all-ones refuted, never identified; 14 he_ho members Found, identified by round {latest}"))
}

// 10 ------------------------------------------------------------------------

fn euc() -> Outcome {
    let bits = named("prime_power_bits", &[]);
    for i in 0..8 {
        let h = bits.enumerate(i).unwrap();
        let stream: Vec<Example> = h.support().take(20).collect();
        let o = euc_first_time(&bits, &stream, 20, 100).map_err(e)?;
        ensure(o == EucOutcome::NotWithinHorizon, || format!("{}: {o:?}", h.descriptor()))?;
    }
    let mut checked = Vec::new();
    let finite: [(&str, &[(&str, &str)]); 6] = [
        ("a_or_nonpositive_all", &[]),
        ("a_or_nonpositive_finite", &[]),
        ("thresholds", &[]),
        ("singleton_or_nonpositive", &[]),
        ("he_ho", &[("d_max", "5")]),
        ("finite_tailed", &[]),
    ];
    for (name, params) in finite {
        let class = named(name, params);
        let c = certified_closure_dimension(&class, 8, 100).map_err(|err| format!("{name}: {err}"))?;
        for i in 0..6 {
            let Some(h) = class.enumerate(i) else { break };
            let stream: Vec<Example> = h.support().take(40).collect();
            let mut seen = BTreeSet::new();
            let t_star = stream.iter().position(|x| seen.insert(*x) && seen.len() as u64 == c + 1).map(|t| t as u64 + 1);
            let t_star = t_star.ok_or_else(|| format!("{name}: fewer than {} distinct examples", c + 1))?;
            match euc_first_time(&class, &stream, 40, 100).map_err(e)? {
                EucOutcome::FirstTime(t) if t <= t_star => {}
                other => return Err(format!("{name}/{}: {other:?}, C + 1 distinct at {t_star}", h.descriptor())),
            }
        }
        checked.push(format!("{name}(C={c})"));
    }
    Ok(format!("prime_power_bits not EUC within 20; first time <= C+1 on {}", checked.join(", ")))
}

// 11 ------------------------------------------------------------------------

fn landscape() -> Outcome {
    let mut config = RunConfig::new(Command::Landscape);
    config.d_max = 5;
    config.window = 100;
    let cli::Results::Landscape(l) = cli::cmd_landscape(&config).map_err(e)?.results else {
        return Err("unexpected results".into());
    };
    let bad: Vec<String> = l.rows.iter().filter(|r| !r.pass).map(|r| format!("{} {:?}", r.item, r.observed)).collect();
    ensure(l.pass && bad.is_empty() && l.rows.len() == 6, || format!("rows failing: {bad:?}"))?;
    Ok("six rows match (C, VC, L) finiteness at d_max 5, window 100".into())
}

// 12 ------------------------------------------------------------------------

fn randomized() -> Outcome {
    let class = named("a_or_nonpositive_all", &[]);
    let h = nonpositive_member(&[2, 7]);
    let stream: Vec<Example> = h.support().take(30).collect();
    let pm = point_mass(Box::new(uniform_generator(&class, 0, 100)));
    let v = delta_uniform_check(&pm, &h, &stream, 1, 0.01, 1000, 30, 12).map_err(e)?;
    ensure(v.pass && v.failures == 0 && !v.vacuous, || format!("point mass verdict {v:?}"))?;

    let p = 0.2;
    let rg = noisy(Box::new(uniform_generator(&class, 0, 100)), p).map_err(e)?;
    let v = delta_uniform_check(&rg, &h, &stream[..1], 1, 0.05, 1000, 1, 12).map_err(e)?;
    let exact = 1.0 - (1.0 - p).powi(v.checked_rounds as i32);
    ensure(!v.pass, || format!("noisy generator passed: {v:?}"))?;
    ensure(v.checked_rounds == 1, || format!("checked rounds {}", v.checked_rounds))?;
    ensure((v.failure_rate - exact).abs() <= v.radius, || {
        format!("rate {} vs closed form {exact} exceeds radius {}", v.failure_rate, v.radius)
    })?;
    Ok(format!(
        "point mass passes at 0.01; noisy(0.2) fails at 0.05 with rate {:.3}, closed form {exact:.3}, radius {:.3}",
        v.failure_rate, v.radius
    ))
}

// 13 ------------------------------------------------------------------------

fn determinism() -> Outcome {
    let mut configs = vec![
        RunConfig::new(Command::Landscape),
        RunConfig::new(Command::Dims).with_fixture("he_ho", &[("d_max", "7")]),
        RunConfig::new(Command::Identify).with_fixture("he_ho", &[]),
    ];
    let mut game = RunConfig::new(Command::Game).with_fixture("he_ho", &[]);
    game.generator = Some("uniform:3".into());
    game.adversary = Some("closure:4".into());
    configs.push(game);
    let mut tower = RunConfig::new(Command::Attack);
    tower.attack = Some("prime_tower".into());
    configs.push(tower);
    let mut prompted = RunConfig::new(Command::Prompted).with_fixture("prompted_two", &[]);
    prompted.generator = Some("uniform:2".into());
    prompted.adversary = Some("attack:3".into());
    configs.push(prompted);
    for seed in [1, 99] {
        let mut r = RunConfig::new(Command::Randomized).with_fixture("a_or_nonpositive_all", &[]);
        r.generator = Some("noisy:0.3".into());
        r.horizon = 5;
        r.seed = seed;
        configs.push(r);
    }
    for config in &configs {
        let a = cli::to_json(&cli::run(config).map_err(e)?).map_err(e)?;
        let b = cli::to_json(&cli::run(config).map_err(e)?).map_err(e)?;
        ensure(a == b, || format!("{:?} output differs between runs", config.command))?;
    }
    Ok(format!("{} runs byte-identical on repeat", configs.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    run: fn() -> Outcome,
    /// Documented as unattainable; its FAIL is reported but not fatal.
    known_unattainable: bool,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "closure facts", run: closure_facts, known_unattainable: false },
        Criterion { id: 2, name: "dimensions", run: dimensions, known_unattainable: false },
        Criterion { id: 3, name: "uniform-generator oracle equivalence", run: uniform_oracle_equivalence, known_unattainable: false },
        Criterion { id: 4, name: "non-uniform generation", run: nonuniform_generation, known_unattainable: false },
        Criterion { id: 5, name: "prime-tower separation", run: prime_tower, known_unattainable: false },
        Criterion { id: 6, name: "limit generation", run: limit_generation, known_unattainable: false },
        Criterion { id: 7, name: "rational attack", run: rational, known_unattainable: true },
        Criterion { id: 8, name: "prompted", run: prompted, known_unattainable: false },
        Criterion { id: 9, name: "identification separations", run: identification, known_unattainable: false },
        Criterion { id: 10, name: "EUC", run: euc, known_unattainable: false },
        Criterion { id: 11, name: "landscape", run: landscape, known_unattainable: false },
        Criterion { id: 12, name: "randomized delta-check", run: randomized, known_unattainable: false },
        Criterion { id: 13, name: "determinism", run: determinism, known_unattainable: false },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut fatal = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("acceptance {:>2} PASS {} ({secs:.1} s): {detail}", c.id, c.name),
            Err(why) if c.known_unattainable => {
                println!("acceptance {:>2} FAIL {} ({secs:.1} s) [known unattainable]: {why}", c.id, c.name)
            }
            Err(why) => {
                fatal += 1;
                println!("acceptance {:>2} FAIL {} ({secs:.1} s): {why}", c.id, c.name);
            }
        }
    }
    if fatal > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
