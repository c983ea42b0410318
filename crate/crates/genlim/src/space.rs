//! Example spaces, their canonical orders, and small number-theory helpers.
//!
//! Every "smallest" or "natural order" choice in the crate means ascending
//! canonical rank: zig-zag for integers, the diagonal enumeration for
//! positive rationals.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

/// An element of one of the countable example spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "ExampleRepr", try_from = "ExampleRepr")]
pub enum Example {
    Int(i64),
    /// Always reduced, both parts at least one.
    Rat { num: u64, den: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ExampleRepr {
    Int(i64),
    Rat([u64; 2]),
}

impl From<Example> for ExampleRepr {
    fn from(x: Example) -> Self {
        match x {
            Example::Int(v) => ExampleRepr::Int(v),
            Example::Rat { num, den } => ExampleRepr::Rat([num, den]),
        }
    }
}

impl TryFrom<ExampleRepr> for Example {
    type Error = String;
    fn try_from(r: ExampleRepr) -> Result<Self, Self::Error> {
        match r {
            ExampleRepr::Int(v) => Ok(Example::Int(v)),
            ExampleRepr::Rat([p, q]) => {
                let x = Example::rat(p, q).ok_or_else(|| format!("bad rational {p}/{q}"))?;
                match x {
                    Example::Rat { num, den } if num == p && den == q => Ok(x),
                    _ => Err(format!("rational {p}/{q} is not in lowest terms")),
                }
            }
        }
    }
}

impl Example {
    /// Builds a reduced positive rational; `None` if either part is zero.
    pub fn rat(num: u64, den: u64) -> Option<Example> {
        if num == 0 || den == 0 {
            return None;
        }
        let g = gcd(num, den);
        Some(Example::Rat { num: num / g, den: den / g })
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Example::Int(v) => Some(v),
            Example::Rat { .. } => None,
        }
    }

    /// Sort key that agrees with rank order inside each variant.
    fn key(&self) -> (u8, u128, u64) {
        match *self {
            Example::Int(v) => (0, zigzag(v) as u128, 0),
            Example::Rat { num, den } => (1, num as u128 + den as u128, num),
        }
    }
}

impl Ord for Example {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Example {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Example::Int(v) => write!(f, "{v}"),
            Example::Rat { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

/// A prompt value; prompts are positive integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prompt(u64);

impl Prompt {
    /// The prompt used for binary classes: label 1 means "in the support".
    pub const ONE: Prompt = Prompt(1);

    pub fn new(value: u64) -> Option<Prompt> {
        (value >= 1).then_some(Prompt(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for Prompt {
    type Error = String;
    fn try_from(v: u64) -> Result<Self, Self::Error> {
        Prompt::new(v).ok_or_else(|| "prompt must be at least 1".to_string())
    }
}

impl From<Prompt> for u64 {
    fn from(p: Prompt) -> u64 {
        p.0
    }
}

impl fmt::Display for Prompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceTag {
    IntSpace,
    NatSpace,
    PosRatSpace,
}

impl SpaceTag {
    /// Position of `x` inside this space's canonical order.
    pub fn position(self, x: &Example) -> Option<u64> {
        match (self, *x) {
            (SpaceTag::IntSpace, Example::Int(v)) => Some(zigzag(v)),
            (SpaceTag::NatSpace, Example::Int(v)) if v >= 1 => Some(v as u64 - 1),
            (SpaceTag::PosRatSpace, Example::Rat { .. }) => Some(rank(x)),
            _ => None,
        }
    }

    pub fn contains(self, x: &Example) -> bool {
        self.position(x).is_some()
    }

    /// The `n`-th element (0-based) of the space.
    pub fn unrank(self, n: u64) -> Example {
        unrank(self, n)
    }

    /// All elements of the space in canonical order.
    pub fn iter(self) -> SpaceIter {
        SpaceIter { tag: self, next: 0, diag: DiagonalIter::default() }
    }

    /// The first `w` elements of the space.
    pub fn window(self, w: u64) -> Vec<Example> {
        self.iter().take(w as usize).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceTag::IntSpace => "int",
            SpaceTag::NatSpace => "nat",
            SpaceTag::PosRatSpace => "posrat",
        }
    }
}

pub struct SpaceIter {
    tag: SpaceTag,
    next: u64,
    diag: DiagonalIter,
}

impl Iterator for SpaceIter {
    type Item = Example;
    fn next(&mut self) -> Option<Example> {
        let n = self.next;
        self.next += 1;
        match self.tag {
            SpaceTag::IntSpace => Some(unzigzag(n)),
            SpaceTag::NatSpace => Some(Example::Int(n as i64 + 1)),
            SpaceTag::PosRatSpace => self.diag.next(),
        }
    }
}

/// Reduced positive fractions ordered by num+den, then num.
#[derive(Clone, Debug)]
pub struct DiagonalIter {
    sum: u64,
    num: u64,
}

impl Default for DiagonalIter {
    fn default() -> Self {
        DiagonalIter { sum: 2, num: 0 }
    }
}

impl Iterator for DiagonalIter {
    type Item = Example;
    fn next(&mut self) -> Option<Example> {
        loop {
            self.num += 1;
            if self.num >= self.sum {
                self.sum += 1;
                self.num = 1;
            }
            if gcd(self.num, self.sum) == 1 {
                return Some(Example::Rat { num: self.num, den: self.sum - self.num });
            }
        }
    }
}

fn zigzag(v: i64) -> u64 {
    if v > 0 {
        2 * v as u64 - 1
    } else {
        2 * v.unsigned_abs()
    }
}

fn unzigzag(n: u64) -> Example {
    if n % 2 == 1 {
        Example::Int(n.div_ceil(2) as i64)
    } else {
        Example::Int(-((n / 2) as i64))
    }
}

/// Canonical rank of an example within its natural space
/// (zig-zag for integers, diagonal enumeration for rationals).
pub fn rank(x: &Example) -> u64 {
    match *x {
        Example::Int(v) => zigzag(v),
        Example::Rat { num, den } => {
            let s = num + den;
            let phi = totients(s);
            let before: u64 = phi[2..s as usize].iter().sum();
            before + (1..num).filter(|&a| gcd(a, s) == 1).count() as u64
        }
    }
}

/// Inverse of [`rank`] (and of [`SpaceTag::position`] for NatSpace).
pub fn unrank(tag: SpaceTag, n: u64) -> Example {
    match tag {
        SpaceTag::IntSpace => unzigzag(n),
        SpaceTag::NatSpace => Example::Int(n as i64 + 1),
        SpaceTag::PosRatSpace => {
            let mut remaining = n;
            let mut s = 2u64;
            loop {
                let phi = totient(s);
                if remaining < phi {
                    let num = (1..s).filter(|&a| gcd(a, s) == 1).nth(remaining as usize).unwrap();
                    return Example::Rat { num, den: s - num };
                }
                remaining -= phi;
                s += 1;
            }
        }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Euler's totient for 0..=n by sieve.
fn totients(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            for j in (i..=n).step_by(i) {
                phi[j] -= phi[j] / i as u64;
            }
        }
    }
    phi
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

static PRIME_TABLE: Mutex<Vec<u64>> = Mutex::new(Vec::new());

/// Runs `f` on a cached ascending prime list covering `covers`.
fn with_primes<T>(covers: impl Fn(&[u64]) -> bool, f: impl FnOnce(&[u64]) -> T) -> T {
    let mut table = PRIME_TABLE.lock().unwrap_or_else(|e| e.into_inner());
    while !covers(&table) {
        let from = table.last().map_or(2, |&p| p + 1);
        let to = (from * 2).max(1024);
        table.extend((from..to).filter(|&m| is_prime(m)));
    }
    f(&table)
}

/// The first `k` primes.
pub fn primes(k: usize) -> Vec<u64> {
    with_primes(|t| t.len() >= k, |t| t[..k].to_vec())
}

/// The `n`-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(n: usize) -> u64 {
    assert!(n >= 1, "primes are indexed from 1");
    with_primes(|t| t.len() >= n, |t| t[n - 1])
}

/// 1-based index of a prime, or `None` if `p` is not prime.
pub fn prime_index(p: u64) -> Option<usize> {
    if !is_prime(p) {
        return None;
    }
    with_primes(|t| t.last().is_some_and(|&q| q >= p), |t| t.binary_search(&p).ok().map(|i| i + 1))
}

fn int_root(x: u64, e: u32) -> u64 {
    let mut r = (x as f64).powf(1.0 / e as f64).round() as u64;
    while r > 0 && r.checked_pow(e).map_or(true, |v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(e).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

/// Writes `x = p_n^e` with `e >= 1`, returning `(n, e)`.
pub fn prime_power(x: u64) -> Option<(usize, u32)> {
    if x < 2 {
        return None;
    }
    (1..=63).rev().find_map(|e| {
        let r = int_root(x, e);
        (r >= 2 && r.checked_pow(e) == Some(x) && is_prime(r)).then(|| (prime_index(r).unwrap(), e))
    })
}

/// The triangular block A_n = {n(n-1)/2+1, ..., n(n-1)/2+n}, as an inclusive range.
pub fn block(n: u64) -> (i64, i64) {
    assert!(n >= 1, "blocks are indexed from 1");
    let start = (n * (n - 1) / 2 + 1) as i64;
    (start, start + n as i64 - 1)
}

/// The elements of A_n in increasing order.
pub fn block_elems(n: u64) -> Vec<Example> {
    let (a, b) = block(n);
    (a..=b).map(Example::Int).collect()
}

/// The `n` with `x` in A_n, for positive `x`.
pub fn block_index(x: i64) -> Option<u64> {
    if x < 1 {
        return None;
    }
    let mut n = 1u64;
    loop {
        let (_, hi) = block(n);
        if x <= hi {
            return Some(n);
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_examples() {
        assert_eq!(rank(&Example::Int(0)), 0);
        assert_eq!(rank(&Example::Int(-1)), 2);
        assert_eq!(unrank(SpaceTag::IntSpace, 0), Example::Int(0));
        assert_eq!(unrank(SpaceTag::IntSpace, 3), Example::Int(2));
    }

    #[test]
    fn zigzag_round_trip_oracle() {
        for v in -1000i64..=1000 {
            let expect = if v > 0 { 2 * v - 1 } else { -2 * v } as u64;
            assert_eq!(rank(&Example::Int(v)), expect);
            assert_eq!(unrank(SpaceTag::IntSpace, expect), Example::Int(v));
        }
    }

    #[test]
    fn diagonal_matches_brute_force() {
        let mut brute = Vec::new();
        for s in 2u64..=50 {
            for p in 1..s {
                if gcd(p, s - p) == 1 {
                    brute.push((p, s - p));
                }
            }
        }
        for (i, &(p, q)) in brute.iter().enumerate() {
            let x = Example::Rat { num: p, den: q };
            assert_eq!(rank(&x), i as u64);
            assert_eq!(unrank(SpaceTag::PosRatSpace, i as u64), x);
        }
        assert_eq!(unrank(SpaceTag::PosRatSpace, 0), Example::Rat { num: 1, den: 1 });
        let walked: Vec<_> = SpaceTag::PosRatSpace.iter().take(brute.len()).collect();
        let expect: Vec<_> = brute.iter().map(|&(p, q)| Example::Rat { num: p, den: q }).collect();
        assert_eq!(walked, expect);
    }

    #[test]
    fn round_trip_all_spaces() {
        for tag in [SpaceTag::IntSpace, SpaceTag::NatSpace] {
            for n in 0..100_000u64 {
                assert_eq!(tag.position(&unrank(tag, n)), Some(n));
            }
        }
        for (n, x) in SpaceTag::PosRatSpace.iter().take(100_000).enumerate() {
            assert_eq!(rank(&x), n as u64);
        }
        for n in (0..100_000u64).step_by(997) {
            assert_eq!(rank(&unrank(SpaceTag::PosRatSpace, n)), n);
        }
    }

    #[test]
    fn ord_agrees_with_rank() {
        let xs = SpaceTag::IntSpace.window(500);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let qs = SpaceTag::PosRatSpace.window(500);
        assert!(qs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn int_order_embedding() {
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                if a.abs() < b.abs() || (a.abs() == b.abs() && a > 0 && b < 0) {
                    assert!(rank(&Example::Int(a)) < rank(&Example::Int(b)));
                }
            }
        }
    }

    #[test]
    fn primes_examples() {
        assert_eq!(primes(1), vec![2]);
        assert_eq!(primes(4), vec![2, 3, 5, 7]);
        assert_eq!(primes(6), vec![2, 3, 5, 7, 11, 13]);
        for k in 1..40 {
            assert_eq!(primes(k)[..], primes(k + 1)[..k]);
        }
        assert_eq!(prime_power(125), Some((3, 3)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(13), Some((6, 1)));
        assert_eq!(prime_power(1 << 62), Some((1, 62)));
        assert_eq!(prime_power(nth_prime(1000).pow(4)), Some((1000, 4)));
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn blocks() {
        assert_eq!(block(1), (1, 1));
        assert_eq!(block(2), (2, 3));
        assert_eq!(block(4), (7, 10));
        for x in 1..200 {
            let n = block_index(x).unwrap();
            let (lo, hi) = block(n);
            assert!(lo <= x && x <= hi);
        }
    }

    #[test]
    fn serde_shape() {
        let xs = vec![Example::Int(-3), Example::rat(2, 4).unwrap()];
        let s = serde_json::to_string(&xs).unwrap();
        assert_eq!(s, r#"[{"int":-3},{"rat":[1,2]}]"#);
        let back: Vec<Example> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
        assert!(serde_json::from_str::<Example>(r#"{"rat":[2,4]}"#).is_err());
    }
}
