//! Eventually periodic subsets of the integers.
//!
//! A set is stored as an explicit window `[lo, hi]` plus one residue pattern
//! modulo `period` for everything below the window and one for everything
//! above it. Unions, intersections, finiteness and inclusion are exact.

use std::fmt;

use crate::space::{lcm, Example};

#[derive(Clone, Debug)]
pub struct PeriodicSet {
    lo: i64,
    hi: i64,
    window: Vec<bool>,
    period: u64,
    below: Vec<bool>,
    above: Vec<bool>,
}

impl PeriodicSet {
    /// Samples `f` on `[lo, hi]` and on one period on either side. `f` must
    /// be `period`-periodic below `lo` and above `hi`.
    pub fn from_fn(lo: i64, hi: i64, period: u64, f: impl Fn(i64) -> bool) -> PeriodicSet {
        assert!(period >= 1);
        let (lo, hi) = if hi < lo { (0, -1) } else { (lo, hi) };
        let window = (lo..=hi).map(&f).collect();
        let p = period as i64;
        let below = (0..p).map(|r| f(lo - 1 - (lo - 1 - r).rem_euclid(p))).collect();
        let above = (0..p).map(|r| f(hi + 1 + (r - (hi + 1)).rem_euclid(p))).collect();
        PeriodicSet { lo, hi, window, period, below, above }
    }

    pub fn empty() -> PeriodicSet {
        PeriodicSet::from_fn(0, -1, 1, |_| false)
    }

    pub fn finite(elems: &[i64]) -> PeriodicSet {
        match (elems.iter().min(), elems.iter().max()) {
            (Some(&lo), Some(&hi)) => PeriodicSet::from_fn(lo, hi, 1, |x| elems.contains(&x)),
            _ => PeriodicSet::empty(),
        }
    }

    /// All integers `x <= bound`.
    pub fn at_most(bound: i64) -> PeriodicSet {
        PeriodicSet::from_fn(bound, bound, 1, |x| x <= bound)
    }

    /// All integers `x >= bound`.
    pub fn at_least(bound: i64) -> PeriodicSet {
        PeriodicSet::from_fn(bound, bound, 1, |x| x >= bound)
    }

    /// Negative integers congruent to `r` modulo `k`.
    pub fn negative_residue(r: u64, k: u64) -> PeriodicSet {
        PeriodicSet::from_fn(-1, 0, k, |x| x < 0 && x.rem_euclid(k as i64) == r as i64)
    }

    pub fn all() -> PeriodicSet {
        PeriodicSet::from_fn(0, -1, 1, |_| true)
    }

    pub fn contains_int(&self, x: i64) -> bool {
        let p = self.period as i64;
        if x < self.lo {
            self.below[x.rem_euclid(p) as usize]
        } else if x > self.hi {
            self.above[x.rem_euclid(p) as usize]
        } else {
            self.window[(x - self.lo) as usize]
        }
    }

    pub fn contains(&self, x: &Example) -> bool {
        x.as_int().is_some_and(|v| self.contains_int(v))
    }

    fn combine(&self, other: &PeriodicSet, op: impl Fn(bool, bool) -> bool) -> PeriodicSet {
        let (lo, hi) = self.joint_bounds(other);
        let period = lcm(self.period, other.period);
        PeriodicSet::from_fn(lo, hi, period, |x| op(self.contains_int(x), other.contains_int(x)))
    }

    fn joint_bounds(&self, other: &PeriodicSet) -> (i64, i64) {
        let bounds: Vec<(i64, i64)> =
            [self, other].iter().filter(|s| s.lo <= s.hi).map(|s| (s.lo, s.hi)).collect();
        match bounds.as_slice() {
            [] => (0, 0),
            [b] => *b,
            [a, b] => (a.0.min(b.0), a.1.max(b.1)),
            _ => unreachable!(),
        }
    }

    pub fn intersect(&self, other: &PeriodicSet) -> PeriodicSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &PeriodicSet) -> PeriodicSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn minus(&self, other: &PeriodicSet) -> PeriodicSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_finite(&self) -> bool {
        !self.below.iter().any(|&b| b) && !self.above.iter().any(|&b| b)
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && !self.window.iter().any(|&b| b)
    }

    /// The members, if the set is finite, in increasing numeric order.
    pub fn finite_elements(&self) -> Option<Vec<i64>> {
        self.is_finite().then(|| {
            (self.lo..=self.hi).filter(|&x| self.window[(x - self.lo) as usize]).collect()
        })
    }

    /// Range of integers outside of which both sets are purely periodic.
    fn check_range(&self, other: &PeriodicSet) -> (i64, i64) {
        let (lo, hi) = self.joint_bounds(other);
        let p = lcm(self.period, other.period) as i64;
        (lo - p, hi + p)
    }

    pub fn is_subset(&self, other: &PeriodicSet) -> bool {
        let (a, b) = self.check_range(other);
        (a..=b).all(|x| !self.contains_int(x) || other.contains_int(x))
    }

    pub fn same_as(&self, other: &PeriodicSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// The smallest `B` such that the set is periodic on `x < -B` and `x > B`.
    pub fn extent(&self) -> u64 {
        self.lo.unsigned_abs().max(self.hi.unsigned_abs()) + self.period
    }

    pub fn period(&self) -> u64 {
        self.period
    }
}

impl fmt::Display for PeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pattern = |v: &[bool]| -> String {
            v.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| r.to_string()).collect::<Vec<_>>().join(",")
        };
        let members: Vec<String> = (self.lo..=self.hi)
            .filter(|&x| self.window[(x - self.lo) as usize])
            .map(|x| x.to_string())
            .collect();
        write!(
            f,
            "{{{}}} in [{}, {}]; below: r mod {} in {{{}}}; above: r mod {} in {{{}}}",
            members.join(","),
            self.lo,
            self.hi,
            self.period,
            pattern(&self.below),
            self.period,
            pattern(&self.above)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_set() -> impl Strategy<Value = PeriodicSet> {
        (-6i64..6, 0i64..8, 1u64..5, any::<u64>()).prop_map(|(lo, len, p, bits)| {
            let hi = lo + len;
            PeriodicSet::from_fn(lo, hi, p, move |x| {
                let idx = if x < lo {
                    40 + x.rem_euclid(p as i64) as u64
                } else if x > hi {
                    50 + x.rem_euclid(p as i64) as u64
                } else {
                    (x - lo) as u64
                };
                bits >> idx & 1 == 1
            })
        })
    }

    #[test]
    fn basic_shapes() {
        let nonpos = PeriodicSet::at_most(0);
        assert!(nonpos.contains_int(-100) && nonpos.contains_int(0) && !nonpos.contains_int(1));
        assert!(!nonpos.is_finite());
        let even_neg = PeriodicSet::negative_residue(0, 2);
        assert!(even_neg.contains_int(-2) && !even_neg.contains_int(-1) && !even_neg.contains_int(0));
        let odd_neg = PeriodicSet::negative_residue(1, 2);
        assert!(even_neg.intersect(&odd_neg).is_empty());
        let a4 = PeriodicSet::finite(&[7, 8, 9, 10]);
        let he = a4.union(&even_neg);
        let ho = a4.union(&odd_neg);
        assert_eq!(he.intersect(&ho).finite_elements(), Some(vec![7, 8, 9, 10]));
        assert!(even_neg.is_subset(&nonpos));
        assert!(!nonpos.is_subset(&even_neg));
    }

    proptest! {
        #[test]
        fn ops_agree_pointwise(a in arb_set(), b in arb_set()) {
            let i = a.intersect(&b);
            let u = a.union(&b);
            let m = a.minus(&b);
            for x in -80i64..80 {
                prop_assert_eq!(i.contains_int(x), a.contains_int(x) && b.contains_int(x));
                prop_assert_eq!(u.contains_int(x), a.contains_int(x) || b.contains_int(x));
                prop_assert_eq!(m.contains_int(x), a.contains_int(x) && !b.contains_int(x));
            }
            let subset = (-80i64..80).all(|x| !a.contains_int(x) || b.contains_int(x));
            prop_assert_eq!(a.is_subset(&b), subset);
            let far = (-80i64..-40).chain(40..80).any(|x| a.contains_int(x));
            prop_assert_eq!(!a.is_finite(), far);
        }
    }
}
