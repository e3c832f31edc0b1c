//! Names for real numbers: precision-indexed Cauchy queries, one-sided
//! monotone approximations, semi-decisions, and limits with rates.
//!
//! A [`RealName`] answers a precision index `n` with a dyadic within `2^-n`
//! of the represented value. Queries are deterministic and pure, so names
//! are freely shareable across threads. One-sided information is carried by
//! [`LowerName`] / [`UpperName`] (monotone stage streams) and by
//! [`SemiDecision`] (monotone firing probes).

use alloc::sync::Arc;
use core::fmt;

use crate::dyadic::Dyadic;
use crate::precision;

/// Precision index: a query at `n` is accurate to `2^-n`.
pub type Prec = u32;

/// Stage index of one-sided streams and semi-decision probes.
pub type Stage = u64;

/// A Cauchy name: `query(n)` is a dyadic within `2^-n` of the value.
#[derive(Clone)]
pub struct RealName {
    query: Arc<dyn Fn(Prec) -> Dyadic + Send + Sync>,
}

impl RealName {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(Prec) -> Dyadic + Send + Sync + 'static,
    {
        RealName { query: Arc::new(f) }
    }

    /// The exact dyadic `d`, at every precision.
    pub fn constant(d: Dyadic) -> Self {
        RealName::from_fn(move |_| d.clone())
    }

    pub fn query(&self, n: Prec) -> Dyadic {
        (self.query)(n)
    }

    pub fn add(&self, other: &RealName) -> RealName {
        let (a, b) = (self.clone(), other.clone());
        RealName::from_fn(move |n| {
            let k = n + precision::ADD_ARG;
            &a.query(k) + &b.query(k)
        })
    }

    pub fn sub(&self, other: &RealName) -> RealName {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RealName {
        let a = self.clone();
        RealName::from_fn(move |n| -&a.query(n))
    }

    /// Exact scaling by a dyadic constant.
    pub fn scale(&self, c: &Dyadic) -> RealName {
        let a = self.clone();
        let c = c.clone();
        RealName::from_fn(move |n| {
            if c.is_zero() {
                return Dyadic::zero();
            }
            let k = n as i64 + c.ceil_log2().unwrap_or(0).max(0);
            &a.query(k.max(0) as u32) * &c
        })
    }

    /// Product of two names. Magnitude bounds come from querying both
    /// operands at precision 0 and inflating by 1.
    pub fn mul(&self, other: &RealName) -> RealName {
        let (a, b) = (self.clone(), other.clone());
        RealName::from_fn(move |n| {
            let bound_a = &a.query(0).abs() + &Dyadic::one();
            let bound_b = &b.query(0).abs() + &Dyadic::one();
            let mag = bound_a
                .ceil_log2()
                .unwrap_or(0)
                .max(bound_b.ceil_log2().unwrap_or(0))
                .max(0) as u32;
            let k = n + mag + precision::MUL_GUARD;
            (&a.query(k) * &b.query(k)).round_to(n + 1)
        })
    }

    /// Name of the square root of a promised-nonnegative value.
    ///
    /// Near zero the input precision `2n + 2` converts into output
    /// precision `n` through `|sqrt a - sqrt b| <= sqrt|a - b|`. A query
    /// that certifies the value negative panics: the promise is broken.
    pub fn sqrt(&self) -> RealName {
        let a = self.clone();
        RealName::from_fn(move |n| {
            let k = precision::sqrt_arg(n);
            let q = a.query(k);
            let tol = Dyadic::pow2(-(k as i64));
            assert!(
                &q + &tol >= Dyadic::zero(),
                "sqrt argument certified negative"
            );
            let clipped = Dyadic::max(&q, &Dyadic::zero());
            clipped.sqrt_lower_to(n + 1)
        })
    }

    /// Semi-decides `self < other`: the probe fires at some stage iff the
    /// strict inequality holds. Equal values stay unknown forever.
    pub fn lt(&self, other: &RealName) -> SemiDecision {
        let (x, y) = (self.clone(), other.clone());
        SemiDecision::from_events(move |s| {
            let p = precision::stage_prec(s);
            &y.query(p) - &x.query(p) > precision::lt_gap(s)
        })
    }
}

impl fmt::Debug for RealName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealName(~{:?})", self.query(8))
    }
}

/// Monotone nondecreasing stage stream whose supremum is the value.
#[derive(Clone)]
pub struct LowerName {
    at: Arc<dyn Fn(Stage) -> Dyadic + Send + Sync>,
}

/// Monotone nonincreasing stage stream whose infimum is the value.
#[derive(Clone)]
pub struct UpperName {
    at: Arc<dyn Fn(Stage) -> Dyadic + Send + Sync>,
}

impl LowerName {
    /// Wraps a stream that is monotone by construction.
    pub fn from_monotone<F>(f: F) -> Self
    where
        F: Fn(Stage) -> Dyadic + Send + Sync + 'static,
    {
        LowerName { at: Arc::new(f) }
    }

    pub fn constant(d: Dyadic) -> Self {
        LowerName::from_monotone(move |_| d.clone())
    }

    pub fn at(&self, s: Stage) -> Dyadic {
        (self.at)(s)
    }
}

impl UpperName {
    pub fn from_monotone<F>(f: F) -> Self
    where
        F: Fn(Stage) -> Dyadic + Send + Sync + 'static,
    {
        UpperName { at: Arc::new(f) }
    }

    pub fn constant(d: Dyadic) -> Self {
        UpperName::from_monotone(move |_| d.clone())
    }

    pub fn at(&self, s: Stage) -> Dyadic {
        (self.at)(s)
    }
}

/// A monotone firing probe: once fired, fired at all larger stages.
#[derive(Clone)]
pub struct SemiDecision {
    raw: Arc<dyn Fn(Stage) -> bool + Send + Sync>,
}

impl SemiDecision {
    /// Wraps raw one-shot events; `fired_by` takes their monotone closure.
    pub fn from_events<F>(f: F) -> Self
    where
        F: Fn(Stage) -> bool + Send + Sync + 'static,
    {
        SemiDecision { raw: Arc::new(f) }
    }

    /// True iff some event fired at a stage `<= s`.
    pub fn fired_by(&self, s: Stage) -> bool {
        (0..=s).any(|t| (self.raw)(t))
    }

    /// First firing stage within the budget, scanning from stage 0.
    pub fn first_firing(&self, budget: Stage) -> Option<Stage> {
        (0..=budget).find(|&t| (self.raw)(t))
    }
}

/// Outcome of a dovetailed two-sided comparison.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    /// Certified `x > a`.
    AboveA,
    /// Certified `x < b`.
    BelowB,
}

/// Total comparison against a dyadic gap `a < b`: returns `AboveA` only if
/// `x > a` and `BelowB` only if `x < b`, by dovetailing the two
/// semi-decisions on a fixed schedule (left test at even ticks, right at
/// odd). On interior points the winner is schedule-dependent by design.
pub fn soft_compare(x: &RealName, a: &Dyadic, b: &Dyadic) -> Side {
    assert!(a < b, "soft_compare needs a < b");
    let mut tick: Stage = 0;
    loop {
        let s = tick / 2;
        let p = precision::stage_prec(s);
        let q = x.query(p);
        let gap = precision::lt_gap(s);
        if tick % 2 == 0 {
            if &q - a > gap {
                return Side::AboveA;
            }
        } else if &(b - &q) > &gap {
            return Side::BelowB;
        }
        tick += 1;
    }
}

/// A sequence of names together with a convergence rate: all terms at
/// index `>= rate(n)` lie within `2^-n` of the limit.
#[derive(Clone)]
pub struct RatedSequence {
    term: Arc<dyn Fn(u64) -> RealName + Send + Sync>,
    rate: Arc<dyn Fn(Prec) -> u64 + Send + Sync>,
}

impl RatedSequence {
    pub fn new<T, R>(term: T, rate: R) -> Self
    where
        T: Fn(u64) -> RealName + Send + Sync + 'static,
        R: Fn(Prec) -> u64 + Send + Sync + 'static,
    {
        RatedSequence {
            term: Arc::new(term),
            rate: Arc::new(rate),
        }
    }

    pub fn term(&self, i: u64) -> RealName {
        (self.term)(i)
    }

    pub fn rate(&self, n: Prec) -> u64 {
        (self.rate)(n)
    }
}

/// Realises the limit of a rated sequence:
/// `query(n) = term(rate(n+1)).query(n+1)`, within `2^-n` of the limit.
/// An invalid rate produces an incoherent name; coherence tests catch it.
pub fn limit_with_rate(s: &RatedSequence) -> RealName {
    let s = s.clone();
    RealName::from_fn(move |n| s.term(s.rate(n + 1)).query(n + 1))
}

/// Squeezes a two-sided pair of monotone names into a Cauchy name:
/// `query(n)` scans stages until the bounds close to `2^(-n+1)` and
/// returns the midpoint. Diverges if the bounds never close; callers that
/// cannot trust their inputs impose stage budgets upstream.
pub fn real_from_bounds(lo: &LowerName, hi: &UpperName) -> RealName {
    let (lo, hi) = (lo.clone(), hi.clone());
    RealName::from_fn(move |n| {
        let gap = precision::bounds_gap(n);
        let mut s: Stage = 0;
        loop {
            let l = lo.at(s);
            let h = hi.at(s);
            if &h - &l <= gap {
                return (&l + &h).scale_pow2(-1);
            }
            s += 1;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn dy(num: i64, k: i64) -> Dyadic {
        Dyadic::ratio_pow2(num, k)
    }

    /// Valid name of p/q built independently of the name layer.
    fn rational_name(p: i64, q: i64) -> RealName {
        RealName::from_fn(move |n| {
            Dyadic::div_to(&Dyadic::from_int(p), &Dyadic::from_int(q), n + 1)
        })
    }

    fn assert_close(a: &Dyadic, b: &Dyadic, bits: i64) {
        let diff = (a - b).abs();
        assert!(
            diff <= Dyadic::pow2(-bits),
            "expected |{:?} - {:?}| <= 2^-{bits}",
            a,
            b
        );
    }

    #[test]
    fn add_of_quarters_is_half() {
        let q = RealName::constant(dy(1, 2));
        let sum = q.add(&q);
        assert_close(&sum.query(5), &dy(1, 1), 5);
    }

    #[test]
    fn scale_third_by_three_is_one() {
        // rational oracle: 3 * (1/3) = 1 exactly
        let third = rational_name(1, 3);
        let one = third.scale(&Dyadic::from_int(3));
        assert_close(&one.query(20), &Dyadic::one(), 20);
    }

    #[test]
    fn neg_of_zero_is_zero() {
        let z = RealName::constant(Dyadic::zero());
        assert_eq!(z.neg().query(10), Dyadic::zero());
    }

    #[test]
    fn mul_matches_rational_oracle() {
        // (2/3) * (3/5) = 2/5; oracle value via exact integer cross-check
        let a = rational_name(2, 3);
        let b = rational_name(3, 5);
        let prod = a.mul(&b);
        let expected = rational_name(2, 5).query(24);
        assert_close(&prod.query(20), &expected, 19);
    }

    #[test]
    fn mul_handles_larger_magnitudes() {
        let a = RealName::constant(Dyadic::from_int(100));
        let b = rational_name(-7, 3);
        let prod = a.mul(&b);
        let expected = rational_name(-700, 3).query(24);
        assert_close(&prod.query(16), &expected, 15);
    }

    #[test]
    fn sqrt_of_four_is_two() {
        let four = RealName::constant(Dyadic::from_int(4));
        assert_close(&four.sqrt().query(10), &Dyadic::from_int(2), 10);
    }

    #[test]
    fn sqrt_of_two_matches_newton_oracle() {
        // Newton iteration on rationals, independent of Dyadic::sqrt_lower_to:
        // x_{k+1} = (x_k + 2/x_k)/2 starting at 3/2, in num-rational arithmetic.
        use num_rational::BigRational;
        let two = BigRational::from_integer(BigInt::from(2));
        let mut x = BigRational::new(BigInt::from(3), BigInt::from(2));
        for _ in 0..6 {
            x = (&x + &two / &x) / BigRational::from_integer(BigInt::from(2));
        }
        // freeze to a dyadic at 40 bits
        let scaled = (x.numer() << 40u32) / x.denom();
        let oracle = Dyadic::new(scaled, -40);
        let name = RealName::constant(Dyadic::from_int(2)).sqrt();
        assert_close(&name.query(20), &oracle, 20);
    }

    #[test]
    fn sqrt_of_zero_is_zero() {
        let z = RealName::constant(Dyadic::zero());
        assert_eq!(z.sqrt().query(12), Dyadic::zero());
    }

    #[test]
    #[should_panic(expected = "certified negative")]
    fn sqrt_panics_on_certified_negative() {
        let neg = RealName::constant(Dyadic::from_int(-1));
        let _ = neg.sqrt().query(4);
    }

    #[test]
    fn lt_fires_on_strict_gap() {
        let a = rational_name(1, 3);
        let b = RealName::constant(dy(1, 1));
        let probe = a.lt(&b);
        assert!(probe.first_firing(100).is_some());
    }

    #[test]
    fn lt_on_equal_values_never_fires() {
        let h = RealName::constant(dy(1, 1));
        let probe = h.lt(&h.clone());
        assert!(!probe.fired_by(1_000_000));
    }

    #[test]
    fn lt_fires_after_the_revealing_stage() {
        // name that looks like 1/2 until precision 7 reveals 1/2 - 2^-7
        let x = RealName::from_fn(|n| {
            if n < 7 {
                dy(1, 1)
            } else {
                &dy(1, 1) - &dy(1, 7)
            }
        });
        let probe = x.lt(&RealName::constant(dy(1, 1)));
        let stage = probe.first_firing(1000).expect("must fire");
        assert!(stage >= 7, "fired at {stage}");
    }

    #[test]
    fn soft_compare_endpoints() {
        let zero = RealName::constant(Dyadic::zero());
        let one = RealName::constant(Dyadic::one());
        assert_eq!(
            soft_compare(&zero, &Dyadic::zero(), &Dyadic::one()),
            Side::BelowB
        );
        assert_eq!(
            soft_compare(&one, &Dyadic::zero(), &Dyadic::one()),
            Side::AboveA
        );
    }

    #[test]
    fn soft_compare_interior_follows_schedule() {
        // both raw tests first succeed at stage 3; the left test probes at
        // tick 6, the right at tick 7, so the left wins
        let half = RealName::constant(dy(1, 1));
        assert_eq!(
            soft_compare(&half, &Dyadic::zero(), &Dyadic::one()),
            Side::AboveA
        );
    }

    #[test]
    fn limit_of_reciprocals_with_rate() {
        // x_l = 1/(l+1), phi(n) = 2^n - 1: 1/(l+1) <= 2^-n for l >= phi(n)
        let seq = RatedSequence::new(
            |l| rational_name(1, (l + 1) as i64),
            |n| (1u64 << n.min(62)) - 1,
        );
        let lim = limit_with_rate(&seq);
        assert_close(&lim.query(3), &Dyadic::zero(), 3);
        assert_close(&lim.query(8), &Dyadic::zero(), 8);
    }

    #[test]
    fn limit_of_constant_sequence() {
        let c = dy(3, 2);
        let cc = c.clone();
        let seq = RatedSequence::new(move |_| RealName::constant(cc.clone()), |_| 0);
        assert_close(&limit_with_rate(&seq).query(10), &c, 10);
    }

    #[test]
    fn limit_of_clamp_iterates() {
        // closed-form iterates x_l = 0.25 (1 - 2^-l) of the clamp map from 0,
        // rate phi(n) = n + 2
        let seq = RatedSequence::new(
            |l| {
                let v = &dy(1, 2) - &dy(1, 2 + l.min(500) as i64);
                RealName::constant(v)
            },
            |n| n as u64 + 2,
        );
        let lim = limit_with_rate(&seq);
        assert_close(&lim.query(10), &dy(1, 2), 10);
    }

    #[test]
    fn bounds_squeeze_symmetric() {
        let lo = LowerName::from_monotone(|s| &dy(1, 1) - &Dyadic::pow2(-(s as i64)));
        let hi = UpperName::from_monotone(|s| &dy(1, 1) + &Dyadic::pow2(-(s as i64)));
        let x = real_from_bounds(&lo, &hi);
        assert_close(&x.query(12), &dy(1, 1), 12);
    }

    #[test]
    fn bounds_squeeze_one_sided() {
        let lo = LowerName::constant(Dyadic::zero());
        let hi = UpperName::from_monotone(|s| Dyadic::pow2(-(s as i64)));
        let x = real_from_bounds(&lo, &hi);
        assert_close(&x.query(9), &Dyadic::zero(), 9);
    }

    #[test]
    fn bounds_squeeze_fire_table() {
        // lower name steps to 2^-5 once index 2 fires at stage 5 (weight 2^-(2+3));
        // the constant upper name pins the value
        let lo = LowerName::from_monotone(|s| if s >= 5 { dy(1, 5) } else { Dyadic::zero() });
        let hi = UpperName::constant(dy(1, 5));
        let x = real_from_bounds(&lo, &hi);
        assert_close(&x.query(10), &dy(1, 5), 10);
        // coarse queries may answer before the firing stage, still validly
        assert_close(&x.query(3), &dy(1, 5), 3);
    }

    // --- property tests -------------------------------------------------

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-64i64..64, -6i64..6).prop_map(|(m, e)| Dyadic::new(BigInt::from(m), e))
    }

    /// Names built from the public constructors, for coherence checks.
    fn arb_name() -> impl Strategy<Value = RealName> {
        let leaf = prop_oneof![
            arb_dyadic().prop_map(RealName::constant),
            (1i64..40, 1i64..40).prop_map(|(p, q)| rational_name(p.min(q), q.max(p))),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
                (inner.clone(), arb_dyadic()).prop_map(|(a, c)| a.scale(&c)),
                inner.clone().prop_map(|a| a.neg()),
                // sqrt of a certified-nonnegative combination
                inner.prop_map(|a| a.mul(&a.clone()).sqrt()),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Name coherence: |query(n) - query(m)| <= 2^-n + 2^-m for n,m <= 24.
        #[test]
        fn name_coherence(name in arb_name(), n in 0u32..24, m in 0u32..24) {
            let qn = name.query(n);
            let qm = name.query(m);
            let bound = &Dyadic::pow2(-(n as i64)) + &Dyadic::pow2(-(m as i64));
            prop_assert!((&qn - &qm).abs() <= bound);
        }

        /// Arithmetic exactness on dyadic inputs against the rational oracle.
        #[test]
        fn dyadic_arith_matches_oracle(a in arb_dyadic(), b in arb_dyadic(), n in 0u32..30) {
            let x = RealName::constant(a.clone());
            let y = RealName::constant(b.clone());
            let sum = x.add(&y).query(n);
            prop_assert!((&sum - &(&a + &b)).abs() <= Dyadic::pow2(-(n as i64)));
            let prod = x.mul(&y).query(n);
            prop_assert!((&prod - &(&a * &b)).abs() <= Dyadic::pow2(-(n as i64)));
        }
    }

    #[test]
    fn semidecision_monotonicity_random_probes() {
        // 1000 pseudo-random probes on a one-shot event stream
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let probe = SemiDecision::from_events(|s| s == 13);
        for _ in 0..1000 {
            let s: u64 = rng.gen_range(0..400);
            if probe.fired_by(s) {
                assert!(probe.fired_by(s + 1));
            } else {
                assert!(s < 13);
            }
        }
    }
}
