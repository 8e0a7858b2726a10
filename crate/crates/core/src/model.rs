//! Market instances: quality, valuation law, attention span and the
//! customers' quality estimator, plus pricing policies over review states.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::beta::beta_reg;

use crate::distributions::ValuationDistribution;
use crate::error::{Error, Result};
use crate::numerics::binomial_pmf;

/// Purchase probabilities at or below this are treated as zero.
pub const ABSORBING_EPS: f64 = 1e-15;

/// Largest number of review bits for which `{0,1}^c` is enumerated.
pub const MAX_STATE_BITS: usize = 20;

/// Largest attention span accepted by count-based analytics.
pub const MAX_ATTENTION: usize = 10_000;

/// Customers' point estimate of quality as a function of the number of
/// positive displayed reviews.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// Posterior mean of `Beta(a + n, b + c - n)`.
    BetaMean { a: f64, b: f64 },
    /// `phi`-quantile of the same posterior.
    BetaQuantile { a: f64, b: f64, phi: f64 },
    /// Explicit values `h(0), ..., h(c)`.
    Table { values: Vec<f64> },
}

impl Estimator {
    pub fn beta_mean(a: f64, b: f64) -> Self {
        Self::BetaMean { a, b }
    }

    pub fn table(values: impl Into<Vec<f64>>) -> Self {
        Self::Table { values: values.into() }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidEstimator(m));
        match *self {
            Self::BetaMean { a, b } | Self::BetaQuantile { a, b, .. } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return bad(format!("beta parameters must be positive, got ({a}, {b})"));
                }
                if let Self::BetaQuantile { phi, .. } = *self {
                    if !(phi > 0.0 && phi < 1.0) {
                        return bad(format!("quantile level must lie in (0, 1), got {phi}"));
                    }
                }
            }
            Self::Table { ref values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("table values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `h(n)` for a display of `c` reviews.
    pub fn estimate(&self, n: usize, c: usize) -> Result<f64> {
        if n > c {
            return Err(Error::IndexOutOfRange { n, c });
        }
        self.check_params()?;
        match *self {
            Self::BetaMean { a, b } => Ok((a + n as f64) / (a + b + c as f64)),
            Self::BetaQuantile { a, b, phi } => {
                Ok(beta_quantile(a + n as f64, b + (c - n) as f64, phi))
            }
            Self::Table { ref values } => {
                if values.len() != c + 1 {
                    return Err(Error::InvalidEstimator(format!(
                        "table has {} entries, expected c + 1 = {}",
                        values.len(),
                        c + 1
                    )));
                }
                Ok(values[n])
            }
        }
    }
}

/// Inverse of the regularized incomplete beta function by bisection.
pub fn beta_quantile(a: f64, b: f64, phi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < phi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Which ordering a closed form refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Newest,
    Random,
}

impl std::str::FromStr for Ordering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newest" => Ok(Self::Newest),
            "random" => Ok(Self::Random),
            o => Err(Error::InvalidParams(format!("unknown ordering `{o}`"))),
        }
    }
}

/// One market configuration. Construct through [`Instance::new`] so the
/// invariants hold; the estimator is tabulated once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceSpec", into = "InstanceSpec")]
pub struct Instance {
    mu: f64,
    dist: ValuationDistribution,
    c: usize,
    estimator: Estimator,
    allow_flat: bool,
    h: Vec<f64>,
    weights: Vec<f64>,
}

/// Serialized form of [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub mu: f64,
    pub c: usize,
    pub dist: ValuationDistribution,
    pub estimator: Estimator,
    /// Accept estimators that are only non-decreasing (constant tables).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_flat_estimator: bool,
}

impl TryFrom<InstanceSpec> for Instance {
    type Error = Error;
    fn try_from(s: InstanceSpec) -> Result<Self> {
        Self::build(s.mu, s.dist, s.c, s.estimator, s.allow_flat_estimator)
    }
}

impl From<Instance> for InstanceSpec {
    fn from(i: Instance) -> Self {
        Self { mu: i.mu, c: i.c, dist: i.dist, estimator: i.estimator, allow_flat_estimator: i.allow_flat }
    }
}

impl Instance {
    /// Validated instance with a strictly increasing estimator.
    pub fn new(mu: f64, dist: ValuationDistribution, c: usize, estimator: Estimator) -> Result<Self> {
        Self::build(mu, dist, c, estimator, false)
    }

    /// Like [`new`](Self::new) but lets `h` be flat in places. Used for the
    /// constant-estimator reductions where newest and random coincide.
    pub fn new_relaxed(mu: f64, dist: ValuationDistribution, c: usize, estimator: Estimator) -> Result<Self> {
        Self::build(mu, dist, c, estimator, true)
    }

    fn build(mu: f64, dist: ValuationDistribution, c: usize, estimator: Estimator, allow_flat: bool) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidInstance(format!("mu must lie in (0, 1), got {mu}")));
        }
        if c == 0 || c > MAX_ATTENTION {
            return Err(Error::InvalidInstance(format!("c must lie in 1..={MAX_ATTENTION}, got {c}")));
        }
        dist.validate()?;
        if dist.survival(0.0) <= 0.0 {
            return Err(Error::InvalidInstance("valuation law puts no mass on non-negative values".into()));
        }
        let h = (0..=c).map(|n| estimator.estimate(n, c)).collect::<Result<Vec<_>>>()?;
        for n in 1..=c {
            let ok = if allow_flat { h[n] >= h[n - 1] } else { h[n] > h[n - 1] };
            if !ok {
                return Err(Error::InvalidEstimator(format!(
                    "h must be {} in n: h({}) = {} vs h({n}) = {}",
                    if allow_flat { "non-decreasing" } else { "strictly increasing" },
                    n - 1,
                    h[n - 1],
                    h[n]
                )));
            }
        }
        let weights = binomial_pmf(c, mu);
        Ok(Self { mu, dist, c, estimator, allow_flat, h, weights })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dist(&self) -> &ValuationDistribution {
        &self.dist
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    /// Copy of this instance with a different quality.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::build(mu, self.dist, self.c, self.estimator.clone(), self.allow_flat)
    }

    pub fn with_dist(&self, dist: ValuationDistribution) -> Result<Self> {
        Self::build(self.mu, dist, self.c, self.estimator.clone(), self.allow_flat)
    }

    /// `h(n)`; panics when `n > c`.
    pub fn h(&self, n: usize) -> f64 {
        self.h[n]
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    /// `Binomial(c, mu)` weights over the number of positive reviews.
    pub fn count_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P[Θ + h(n) ≥ price]`.
    pub fn purchase_prob(&self, n: usize, price: f64) -> Result<f64> {
        if n > self.c {
            return Err(Error::IndexOutOfRange { n, c: self.c });
        }
        Ok(self.q(n, price))
    }

    pub(crate) fn q(&self, n: usize, price: f64) -> f64 {
        self.dist.survival(price - self.h[n])
    }

    /// Purchase probability for every count at a common price.
    pub fn purchase_probs(&self, price: f64) -> Vec<f64> {
        (0..=self.c).map(|n| self.q(n, price)).collect()
    }

    pub fn validate_price(&self, price: f64) -> PriceAssumptionReport {
        let q = self.purchase_probs(price);
        PriceAssumptionReport {
            non_absorbing: q.iter().all(|&x| x > ABSORBING_EPS),
            non_degenerate: q[0] < q[self.c],
        }
    }

    /// `E_{N~Bin(c,mu)}[h(N)]`.
    pub fn hbar(&self) -> f64 {
        self.weights.iter().zip(&self.h).map(|(w, h)| w * h).sum()
    }
}

/// Assumption checks on a static price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceAssumptionReport {
    /// Every review state buys with positive probability.
    pub non_absorbing: bool,
    /// All-negative and all-positive displays lead to different demand.
    pub non_degenerate: bool,
}

/// The `c` displayed ratings as a bit mask; bit `i` is `bits[i]` and
/// `bits[0]` is the most recent review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReviewState {
    mask: u64,
    len: usize,
}

impl ReviewState {
    pub fn new(mask: u64, len: usize) -> Self {
        debug_assert!(len <= 63 && mask >> len == 0);
        Self { mask, len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mask = bits.iter().enumerate().fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
        Self::new(mask, bits.len())
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.mask >> i) & 1 == 1
    }

    pub fn n_pos(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Shift in a new most-recent rating, dropping the oldest.
    pub fn push_newest(&self, positive: bool) -> Self {
        let keep = (1u64 << self.len) - 1;
        Self::new(((self.mask << 1) | positive as u64) & keep, self.len)
    }

    /// Bitstring with the newest rating first, e.g. `"10"`.
    pub fn label(&self) -> String {
        (0..self.len).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }

    pub fn parse(label: &str) -> Result<Self> {
        let bits = label
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidPolicy(format!("bad review-state label `{label}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() || bits.len() > MAX_STATE_BITS {
            return Err(Error::InvalidPolicy(format!("review-state label `{label}` has bad length")));
        }
        Ok(Self::from_bits(&bits))
    }

    /// Every state of length `len`, ordered by mask.
    pub fn all(len: usize) -> impl Iterator<Item = ReviewState> {
        (0..1u64 << len).map(move |m| ReviewState::new(m, len))
    }
}

/// Mapping from displayed reviews to a posted price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PricingPolicy {
    Static { price: f64 },
    /// `prices[n]` when `n` displayed reviews are positive.
    CountTable { prices: Vec<f64> },
    /// One price per review state, indexed by mask.
    StateTable {
        #[serde(serialize_with = "ser_state_table", deserialize_with = "de_state_table")]
        prices: Vec<f64>,
    },
}

fn bits_of(len: usize) -> usize {
    len.trailing_zeros() as usize
}

fn ser_state_table<S: Serializer>(prices: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let c = bits_of(prices.len());
    let map: BTreeMap<String, f64> =
        prices.iter().enumerate().map(|(m, &p)| (ReviewState::new(m as u64, c).label(), p)).collect();
    map.serialize(s)
}

fn de_state_table<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    use serde::de::Error as _;
    let map = BTreeMap::<String, f64>::deserialize(d)?;
    let c = map.keys().next().map(|k| k.len()).ok_or_else(|| D::Error::custom("empty state table"))?;
    if c == 0 || c > MAX_STATE_BITS {
        return Err(D::Error::custom(format!("state labels must have 1..={MAX_STATE_BITS} bits")));
    }
    let mut prices = vec![f64::NAN; 1 << c];
    for (k, &p) in &map {
        if k.len() != c {
            return Err(D::Error::custom(format!("state label `{k}` does not have {c} bits")));
        }
        let st = ReviewState::parse(k).map_err(D::Error::custom)?;
        prices[st.mask() as usize] = p;
    }
    if map.len() != prices.len() {
        return Err(D::Error::custom(format!("state table covers {} of {} states", map.len(), prices.len())));
    }
    Ok(prices)
}

impl PricingPolicy {
    pub fn static_price(price: f64) -> Self {
        Self::Static { price }
    }

    pub fn count_table(prices: impl Into<Vec<f64>>) -> Self {
        Self::CountTable { prices: prices.into() }
    }

    /// Build a state table from a function of the state.
    pub fn state_table_from(c: usize, f: impl Fn(ReviewState) -> f64) -> Self {
        Self::StateTable { prices: ReviewState::all(c).map(f).collect() }
    }

    /// Checks coverage of every state for attention span `c` and finiteness.
    pub fn validate_for(&self, c: usize) -> Result<()> {
        let prices: &[f64] = match self {
            Self::Static { price } => std::slice::from_ref(price),
            Self::CountTable { prices } => {
                if prices.len() != c + 1 {
                    return Err(Error::InvalidPolicy(format!(
                        "count table has {} prices, expected {}",
                        prices.len(),
                        c + 1
                    )));
                }
                prices
            }
            Self::StateTable { prices } => {
                if c > MAX_STATE_BITS || prices.len() != 1usize << c {
                    return Err(Error::InvalidPolicy(format!(
                        "state table has {} prices, expected 2^{c}",
                        prices.len()
                    )));
                }
                prices
            }
        };
        if let Some(p) = prices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolicy(format!("price {p} is not finite")));
        }
        Ok(())
    }

    /// Price posted in `state`.
    pub fn price(&self, state: ReviewState) -> f64 {
        match self {
            Self::Static { price } => *price,
            Self::CountTable { prices } => prices[state.n_pos()],
            Self::StateTable { prices } => prices[state.mask() as usize],
        }
    }

    /// Per-count prices when the policy depends on the state only through
    /// the number of positive reviews.
    pub fn count_prices(&self, c: usize) -> Option<Vec<f64>> {
        match self {
            Self::Static { price } => Some(vec![*price; c + 1]),
            Self::CountTable { prices } => Some(prices.clone()),
            Self::StateTable { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn e1() -> Instance {
        Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0).unwrap(), 1, Estimator::beta_mean(1.0, 1.0))
            .unwrap()
    }

    #[test]
    fn beta_mean_values() {
        let e = Estimator::beta_mean(1.0, 1.0);
        assert!((e.estimate(0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.estimate(1, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let e = Estimator::beta_mean(0.1, 0.9);
        assert!((e.estimate(1, 2).unwrap() - 1.1 / 3.0).abs() < 1e-15);
        assert_eq!(e.estimate(3, 2), Err(Error::IndexOutOfRange { n: 3, c: 2 }));
    }

    #[test]
    fn table_values() {
        let e = Estimator::table([0.01, 0.99]);
        assert_eq!(e.estimate(1, 1).unwrap(), 0.99);
        assert!(e.estimate(0, 2).is_err());
    }

    #[test]
    fn beta_quantile_median_of_symmetric_beta_is_half() {
        let e = Estimator::BetaQuantile { a: 2.0, b: 2.0, phi: 0.5 };
        assert!((e.estimate(1, 2).unwrap() - 0.5).abs() < 1e-11);
        // Beta(1,1) is uniform so the quantile is phi itself
        let e = Estimator::BetaQuantile { a: 1.0, b: 1.0, phi: 0.3 };
        assert!((e.estimate(0, 0).unwrap() - 0.3).abs() < 1e-11);
    }

    #[test]
    fn beta_quantile_lies_below_mean_for_pessimists() {
        let q = Estimator::BetaQuantile { a: 1.0, b: 1.0, phi: 0.2 };
        let m = Estimator::beta_mean(1.0, 1.0);
        for n in 0..=3 {
            assert!(q.estimate(n, 3).unwrap() < m.estimate(n, 3).unwrap());
        }
    }

    #[test]
    fn purchase_probabilities_on_e1() {
        let i = e1();
        assert!((i.purchase_prob(0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((i.purchase_prob(1, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(i.purchase_prob(0, f64::NEG_INFINITY).unwrap(), 1.0);
        assert!(i.purchase_prob(2, 1.0).is_err());
    }

    #[test]
    fn price_assumptions_on_e1() {
        let i = e1();
        assert_eq!(i.validate_price(1.0), PriceAssumptionReport { non_absorbing: true, non_degenerate: true });
        assert!(!i.validate_price(2.0).non_absorbing);
        assert_eq!(i.validate_price(0.0), PriceAssumptionReport { non_absorbing: true, non_degenerate: false });
    }

    #[test]
    fn hbar_values() {
        assert!((e1().hbar() - 0.5).abs() < 1e-15);
        let mu = 0.1;
        let i = Instance::new(
            mu,
            ValuationDistribution::uniform(0.0, 0.216).unwrap(),
            1,
            Estimator::table([mu * mu, 1.0 - mu * mu]),
        )
        .unwrap();
        assert!((i.hbar() - 0.108).abs() < 1e-15);
        let flat = Instance::new_relaxed(0.3, *i.dist(), 3, Estimator::table([0.4; 4])).unwrap();
        assert!((flat.hbar() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn construction_rejects_bad_instances() {
        let u = ValuationDistribution::uniform(0.0, 1.0).unwrap();
        assert!(Instance::new(0.0, u, 1, Estimator::beta_mean(1.0, 1.0)).is_err());
        assert!(Instance::new(0.5, u, 0, Estimator::beta_mean(1.0, 1.0)).is_err());
        assert!(Instance::new(0.5, u, 1, Estimator::table([0.5, 0.5])).is_err());
        assert!(Instance::new(0.5, u, 1, Estimator::table([0.5, 0.4, 0.3])).is_err());
        let neg = ValuationDistribution::uniform(-2.0, -1.0).unwrap();
        assert!(Instance::new(0.5, neg, 1, Estimator::beta_mean(1.0, 1.0)).is_err());
    }

    #[test]
    fn instance_roundtrips_through_json() {
        let i = e1();
        let s = serde_json::to_string(&i).unwrap();
        assert!(s.contains("\"mu\":0.5"));
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
        let flat = Instance::new_relaxed(0.5, *i.dist(), 1, Estimator::table([0.5, 0.5])).unwrap();
        let back: Instance = serde_json::from_str(&serde_json::to_string(&flat).unwrap()).unwrap();
        assert_eq!(back, flat);
    }

    #[test]
    fn review_state_push_and_label() {
        let s = ReviewState::from_bits(&[true, false, false]);
        assert_eq!(s.label(), "100");
        assert_eq!(s.n_pos(), 1);
        let t = s.push_newest(false);
        assert_eq!(t.label(), "010");
        assert_eq!(t.push_newest(true).label(), "101");
        assert_eq!(ReviewState::parse("101").unwrap(), t.push_newest(true));
        assert!(ReviewState::parse("10x").is_err());
        assert_eq!(ReviewState::all(3).count(), 8);
    }

    #[test]
    fn policies_price_by_state() {
        let s = ReviewState::parse("01").unwrap();
        assert_eq!(PricingPolicy::static_price(0.7).price(s), 0.7);
        assert_eq!(PricingPolicy::count_table([0.1, 0.2, 0.3]).price(s), 0.2);
        let st = PricingPolicy::state_table_from(2, |z| z.mask() as f64);
        assert_eq!(st.price(s), 2.0);
        assert!(st.validate_for(2).is_ok());
        assert!(st.validate_for(3).is_err());
        assert!(PricingPolicy::count_table([0.1]).validate_for(1).is_err());
        assert!(PricingPolicy::static_price(f64::NAN).validate_for(1).is_err());
    }

    #[test]
    fn state_table_serializes_as_bitstring_map() {
        let st = PricingPolicy::state_table_from(2, |z| z.mask() as f64 / 4.0);
        let js = serde_json::to_value(&st).unwrap();
        assert_eq!(js["prices"]["01"], 0.5);
        let back: PricingPolicy = serde_json::from_value(js).unwrap();
        assert_eq!(back, st);
        let partial = r#"{"kind":"state_table","prices":{"0":0.1}}"#;
        assert!(serde_json::from_str::<PricingPolicy>(partial).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (0.05f64..0.95, 1usize..6, 0.2f64..3.0, 0.2f64..3.0, -1.0f64..0.5, 0.2f64..2.0).prop_map(
            |(mu, c, a, b, lo, width)| {
                let d = ValuationDistribution::uniform(lo, lo + width).unwrap();
                let d = if d.survival(0.0) > 0.0 { d } else { ValuationDistribution::uniform(0.0, 1.0).unwrap() };
                Instance::new(mu, d, c, Estimator::beta_mean(a, b)).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn purchase_prob_nondecreasing_in_n(inst in arb_instance(), p in -1.0f64..3.0) {
            let q = inst.purchase_probs(p);
            for n in 1..q.len() {
                prop_assert!(q[n] >= q[n - 1]);
            }
        }

        #[test]
        fn hbar_between_extremes(inst in arb_instance()) {
            let hb = inst.hbar();
            prop_assert!(hb >= inst.h(0) - 1e-15 && hb <= inst.h(inst.c()) + 1e-15);
        }

        #[test]
        fn degenerate_outside_support_window(inst in arb_instance(), t in 0.0f64..1.0) {
            let (lo, hi) = inst.dist().support();
            let c = inst.c();
            let below = lo + inst.h(0) - t;
            let above = hi + inst.h(c) + t;
            prop_assert!(!inst.validate_price(below).non_degenerate);
            prop_assert!(!inst.validate_price(above).non_degenerate);
        }
    }
}
