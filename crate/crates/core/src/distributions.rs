//! Idiosyncratic valuation distributions and the single-customer posted-price
//! problem.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::numerics::maximize_on_interval;

/// Survival mass beyond which unbounded supports are truncated for numeric
/// searches.
pub const TAIL_TRUNCATION: f64 = 1e-9;

/// Law of the customer-specific valuation component `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Two-point law: `on_value` with probability `success_prob`, else
    /// `off_value`.
    Bernoulli {
        success_prob: f64,
        #[serde(default = "one")]
        on_value: f64,
        #[serde(default)]
        off_value: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Optimal posted price for a single customer with valuation `Θ + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MyersonResult {
    pub price: f64,
    pub revenue: f64,
    /// Purchase probability at `price`.
    pub quantile: f64,
}

impl ValuationDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let d = Self::Uniform { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = Self::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let d = Self::Normal { mean, sd };
        d.validate()?;
        Ok(d)
    }

    pub fn bernoulli(success_prob: f64) -> Result<Self> {
        let d = Self::Bernoulli { success_prob, on_value: 1.0, off_value: 0.0 };
        d.validate()?;
        Ok(d)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::Normal { .. } => "normal",
            Self::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match *self {
            Self::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("uniform requires finite lo < hi, got [{lo}, {hi}]"));
                }
            }
            Self::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            Self::Normal { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
                    return bad(format!("normal requires finite mean and sd > 0, got ({mean}, {sd})"));
                }
            }
            Self::Bernoulli { success_prob, on_value, off_value } => {
                if !(0.0..=1.0).contains(&success_prob) {
                    return bad(format!("bernoulli success_prob must lie in [0, 1], got {success_prob}"));
                }
                if !(on_value.is_finite() && off_value.is_finite()) {
                    return bad("bernoulli values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `P[Θ ≥ x]`.
    pub fn survival(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 1.0;
        }
        match *self {
            Self::Uniform { lo, hi } => {
                if x <= lo {
                    1.0
                } else if x >= hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Normal { mean, sd } => 0.5 * erfc((x - mean) / (sd * std::f64::consts::SQRT_2)),
            Self::Bernoulli { success_prob, on_value, off_value } => {
                let mut s = 0.0;
                if on_value >= x {
                    s += success_prob;
                }
                if off_value >= x {
                    s += 1.0 - success_prob;
                }
                s
            }
        }
    }

    /// Tight support interval. Unbounded sides are reported as infinities.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Bernoulli { success_prob, on_value, off_value } => {
                let atoms = [(on_value, success_prob), (off_value, 1.0 - success_prob)];
                let live = atoms.iter().filter(|(_, m)| *m > 0.0).map(|(v, _)| *v);
                let lo = live.clone().fold(f64::INFINITY, f64::min);
                let hi = live.fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        let (lo, hi) = self.support();
        lo.is_finite() && hi.is_finite()
    }

    /// Support clipped to the `1 - TAIL_TRUNCATION` quantile on unbounded
    /// sides.
    pub fn truncated_support(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        let lo = if lo.is_finite() { lo } else { self.lower_tail_point(TAIL_TRUNCATION) };
        let hi = if hi.is_finite() { hi } else { self.upper_tail_point(TAIL_TRUNCATION) };
        (lo, hi)
    }

    /// Smallest `x` (up to bisection accuracy) with `survival(x) <= tail`.
    pub fn upper_tail_point(&self, tail: f64) -> f64 {
        let (mut lo, mut hi) = match *self {
            Self::Normal { mean, sd } => (mean, mean + sd),
            Self::Exponential { rate } => (0.0, 1.0 / rate),
            _ => {
                let (_, h) = self.support();
                return h;
            }
        };
        while self.survival(hi) > tail {
            lo = hi;
            hi += 2.0 * (hi - lo).max(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.survival(mid) > tail {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn lower_tail_point(&self, tail: f64) -> f64 {
        match *self {
            Self::Normal { mean, .. } => 2.0 * mean - self.upper_tail_point(tail),
            _ => self.support().0,
        }
    }

    /// One i.i.d. draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Self::Normal { mean, sd } => Normal::new(mean, sd).expect("validated sd").sample(rng),
            Self::Bernoulli { success_prob, on_value, off_value } => {
                if rng.random::<f64>() < success_prob {
                    on_value
                } else {
                    off_value
                }
            }
        }
    }

    /// Revenue-maximizing posted price for a customer whose valuation is
    /// `Θ + shift`.
    ///
    /// Uniform, exponential and two-point laws use exact closed forms; the
    /// normal law goes through [`myerson_numeric`](Self::myerson_numeric).
    pub fn myerson(&self, shift: f64) -> Result<MyersonResult> {
        self.check_positive_revenue(shift)?;
        match *self {
            Self::Uniform { lo, hi } => {
                let price = (0.5 * (hi + shift)).max(lo + shift);
                Ok(self.evaluate(price, shift))
            }
            Self::Exponential { rate } => {
                let price = shift.max(1.0 / rate);
                Ok(self.evaluate(price, shift))
            }
            Self::Bernoulli { success_prob, on_value, off_value } => {
                let mut atoms = vec![];
                if success_prob > 0.0 {
                    atoms.push(on_value + shift);
                }
                if success_prob < 1.0 {
                    atoms.push(off_value + shift);
                }
                atoms.sort_by(f64::total_cmp);
                let mut best: Option<MyersonResult> = None;
                for p in atoms.into_iter().filter(|p| *p > 0.0) {
                    let cand = self.evaluate(p, shift);
                    if best.is_none_or(|b| cand.revenue > b.revenue) {
                        best = Some(cand);
                    }
                }
                best.ok_or(Error::NoPositiveRevenue { shift })
            }
            Self::Normal { .. } => self.myerson_numeric(shift),
        }
    }

    /// Grid search over `[max(0, lo + shift), hi + shift]` followed by
    /// golden-section refinement. Works for every kind; unbounded supports are
    /// truncated at the `1 - TAIL_TRUNCATION` quantile.
    pub fn myerson_numeric(&self, shift: f64) -> Result<MyersonResult> {
        self.check_positive_revenue(shift)?;
        let (lo, hi) = self.truncated_support();
        let left = (lo + shift).max(0.0);
        let right = hi + shift;
        let (price, _) = maximize_on_interval(|p| p * self.survival(p - shift), left, right);
        Ok(self.evaluate(price, shift))
    }

    fn evaluate(&self, price: f64, shift: f64) -> MyersonResult {
        let quantile = self.survival(price - shift);
        MyersonResult { price, revenue: price * quantile, quantile }
    }

    fn check_positive_revenue(&self, shift: f64) -> Result<()> {
        if !shift.is_finite() {
            return Err(Error::InvalidParams(format!("shift must be finite, got {shift}")));
        }
        let (_, hi) = self.support();
        if hi + shift <= 0.0 {
            return Err(Error::NoPositiveRevenue { shift });
        }
        Ok(())
    }
}
