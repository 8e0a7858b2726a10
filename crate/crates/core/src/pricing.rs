//! Optimal static and dynamic prices under each ordering, class-level CoNF
//! and the price/demand decomposition behind its upper bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{rev_newest_dynamic, rev_newest_static, rev_random_dynamic, rev_random_static};
use crate::distributions::ValuationDistribution;
use crate::error::{Error, Result};
use crate::model::{Instance, Ordering, PricingPolicy, ABSORBING_EPS};
use crate::numerics::maximize_on_interval;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_count_prices: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_price_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_demand_ratio: Option<f64>,
}

/// A policy that is optimal within its class, with its revenue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPricing {
    pub ordering: Ordering,
    pub policy: PricingPolicy,
    pub revenue: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyClass {
    Static,
    Dynamic,
}

impl std::str::FromStr for PolicyClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "dynamic" => Ok(Self::Dynamic),
            o => Err(Error::InvalidParams(format!("unknown policy class `{o}`"))),
        }
    }
}

/// Static revenue of `ordering` at `price`; absorbing prices earn nothing
/// in the long run.
pub fn static_revenue(inst: &Instance, ordering: Ordering, price: f64) -> f64 {
    match ordering {
        Ordering::Random => rev_random_static(inst, price),
        Ordering::Newest => rev_newest_static(inst, price).unwrap_or(0.0),
    }
}

/// Upper end of the price search: top of the (truncated) support plus the
/// most optimistic estimate.
pub fn price_search_upper(inst: &Instance) -> f64 {
    inst.dist().truncated_support().1 + inst.h(inst.c())
}

/// Best static price for `ordering`.
pub fn optimal_static(inst: &Instance, ordering: Ordering) -> OptimizedPricing {
    let hi = price_search_upper(inst);
    let (price, revenue) = if hi > 0.0 {
        maximize_on_interval(|p| static_revenue(inst, ordering, p), 0.0, hi)
    } else {
        (0.0, 0.0)
    };
    OptimizedPricing { ordering, policy: PricingPolicy::static_price(price), revenue, diagnostics: Diagnostics::default() }
}

/// Best dynamic policy under random ordering: the single-customer optimum
/// for each count.
pub fn optimal_dynamic_random(inst: &Instance) -> Result<OptimizedPricing> {
    let w = inst.count_weights();
    let mut prices = Vec::with_capacity(inst.c() + 1);
    let mut revenue = 0.0;
    for n in 0..=inst.c() {
        let m = inst.dist().myerson(inst.h(n))?;
        prices.push(m.price);
        revenue += w[n] * m.revenue;
    }
    let pd = price_demand_diagnostics(inst)?;
    Ok(OptimizedPricing {
        ordering: Ordering::Random,
        policy: PricingPolicy::count_table(prices.clone()),
        revenue,
        diagnostics: Diagnostics {
            per_count_prices: Some(prices),
            expected_price_ratio: Some(pd.expected_price_ratio),
            max_demand_ratio: Some(pd.max_demand_ratio),
            ..Diagnostics::default()
        },
    })
}

/// Best dynamic policy under newest first: charge `h(n) + a*` where `a*`
/// sells optimally to a customer valuing `Θ + h̄`.
pub fn optimal_dynamic_newest(inst: &Instance) -> Result<OptimizedPricing> {
    let hbar = inst.hbar();
    let m = inst.dist().myerson(hbar)?;
    let offset = m.price - hbar;
    let prices: Vec<f64> = inst.h_values().iter().map(|h| h + offset).collect();
    Ok(OptimizedPricing {
        ordering: Ordering::Newest,
        policy: PricingPolicy::count_table(prices.clone()),
        revenue: m.revenue,
        diagnostics: Diagnostics { offset: Some(offset), per_count_prices: Some(prices), ..Diagnostics::default() },
    })
}

/// `μ^c h(c) / (h(0) + θ̄)` for valuations supported on `[0, θ̄]`.
pub fn static_conf_lower_bound(inst: &Instance) -> Option<f64> {
    let (lo, hi) = inst.dist().support();
    if lo < 0.0 || !hi.is_finite() {
        return None;
    }
    let den = inst.h(0) + hi;
    (den > 0.0).then(|| inst.mu().powi(inst.c() as i32) * inst.h(inst.c()) / den)
}

/// CoNF of a pricing class with whatever bounds apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConf {
    pub class: PolicyClass,
    pub rev_random: f64,
    pub rev_newest: f64,
    pub chi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    /// `2 P[Θ ≥ -u] / P[Θ ≥ 0]` with `u = max(h(c), 0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_upper_bound: Option<f64>,
    pub within_bounds: bool,
}

pub fn conf_class(inst: &Instance, class: PolicyClass) -> Result<ClassConf> {
    let (rev_random, rev_newest, lower, upper, refined) = match class {
        PolicyClass::Static => {
            let r = optimal_static(inst, Ordering::Random).revenue;
            let n = optimal_static(inst, Ordering::Newest).revenue;
            (r, n, static_conf_lower_bound(inst), None, None)
        }
        PolicyClass::Dynamic => {
            let r = optimal_dynamic_random(inst)?.revenue;
            let n = optimal_dynamic_newest(inst)?.revenue;
            let s0 = inst.dist().survival(0.0);
            let u = inst.h(inst.c()).max(0.0);
            (r, n, Some(1.0), Some(2.0 / s0), Some(2.0 * inst.dist().survival(-u) / s0))
        }
    };
    let chi = rev_random / rev_newest;
    let tol = 1e-9 * chi.abs().max(1.0);
    let within_bounds = lower.is_none_or(|l| chi >= l - tol)
        && upper.is_none_or(|u| chi <= u + tol)
        && refined.is_none_or(|u| chi <= u + tol);
    Ok(ClassConf {
        class,
        rev_random,
        rev_newest,
        chi,
        lower_bound: lower,
        upper_bound: upper,
        refined_upper_bound: refined,
        within_bounds,
    })
}

/// Sign comparison of the two optimal dynamic policies at one count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceComparison {
    pub n: usize,
    pub h: f64,
    pub newest_price: f64,
    pub random_price: f64,
    /// `newest_price - random_price`.
    pub diff: f64,
    /// Sign predicted by comparing `h(n)` with `h̄`.
    pub expected_sign: i8,
    pub holds: bool,
}

/// Per-count comparison of newest- and random-optimal dynamic prices.
/// Only uniform valuations are accepted, where the optimal prices are
/// unique.
pub fn compare_dynamic_prices(inst: &Instance) -> Result<Vec<PriceComparison>> {
    if !matches!(inst.dist(), ValuationDistribution::Uniform { .. }) {
        return Err(Error::NotWellBehaved(inst.dist().kind_name().into()));
    }
    let newest = optimal_dynamic_newest(inst)?;
    let random = optimal_dynamic_random(inst)?;
    let (np, rp) = (newest.diagnostics.per_count_prices.unwrap(), random.diagnostics.per_count_prices.unwrap());
    let hbar = inst.hbar();
    Ok((0..=inst.c())
        .map(|n| {
            let h = inst.h(n);
            let diff = np[n] - rp[n];
            let expected_sign: i8 = if (h - hbar).abs() <= 1e-12 {
                0
            } else if h > hbar {
                1
            } else {
                -1
            };
            let holds = match expected_sign {
                1 => diff >= -1e-9,
                -1 => diff <= 1e-9,
                _ => diff.abs() <= 1e-9,
            };
            PriceComparison { n, h, newest_price: np[n], random_price: rp[n], diff, expected_sign, holds }
        })
        .collect())
}

/// Decomposition of the dynamic CoNF bound into price and demand ratios at
/// the surrogate prices `p̃_n = h̄ + max(p*(Θ+h(n)) - h(n), 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceDemand {
    pub surrogate_prices: Vec<f64>,
    pub price_ratios: Vec<f64>,
    pub demand_ratios: Vec<f64>,
    pub expected_price_ratio: f64,
    pub max_demand_ratio: f64,
}

pub fn price_demand_diagnostics(inst: &Instance) -> Result<PriceDemand> {
    let hbar = inst.hbar();
    let d = inst.dist();
    let mut pt = vec![];
    let mut pr = vec![];
    let mut dr = vec![];
    for n in 0..=inst.c() {
        let h = inst.h(n);
        let ps = d.myerson(h)?.price;
        let idio = ps - h;
        let p_tilde = hbar + idio.max(0.0);
        pt.push(p_tilde);
        pr.push(ps / p_tilde);
        dr.push(d.survival(idio) / d.survival(idio.max(0.0)));
    }
    let expected_price_ratio = inst.count_weights().iter().zip(&pr).map(|(w, r)| w * r).sum::<f64>();
    let max_demand_ratio = dr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let demand_cap = 1.0 / d.survival(0.0);
    if expected_price_ratio > 2.0 + 1e-12 || max_demand_ratio > demand_cap * (1.0 + 1e-12) {
        return Err(Error::SelfCheck(format!(
            "price ratio {expected_price_ratio} or demand ratio {max_demand_ratio} exceeds its bound"
        )));
    }
    Ok(PriceDemand { surrogate_prices: pt, price_ratios: pr, demand_ratios: dr, expected_price_ratio, max_demand_ratio })
}

/// Evaluate a dynamic policy on either ordering.
pub fn dynamic_revenue(inst: &Instance, ordering: Ordering, policy: &PricingPolicy) -> Result<f64> {
    match ordering {
        Ordering::Newest => rev_newest_dynamic(inst, policy),
        Ordering::Random => rev_random_dynamic(inst, policy),
    }
}

/// Exhaustive search over count tables on a uniform price grid with spacing
/// `step` covering `[0, price_search_upper]`. Returns the best table and its
/// revenue. Cost is `(grid size)^(c+1)`, so keep `c` small.
pub fn brute_force_count_table(inst: &Instance, ordering: Ordering, step: f64) -> (Vec<f64>, f64) {
    let c = inst.c();
    let hi = price_search_upper(inst);
    let g = (hi / step).floor() as usize + 1;
    let grid: Vec<f64> = (0..g).map(|i| i as f64 * step).collect();
    let w = inst.count_weights();
    // q[n][i] at grid price i
    let q: Vec<Vec<f64>> = (0..=c).map(|n| grid.iter().map(|&p| inst.q(n, p)).collect()).collect();
    let total = g.pow(c as u32 + 1);
    let eval = |mut code: usize| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for n in 0..=c {
            let i = code % g;
            code /= g;
            let qn = q[n][i];
            match ordering {
                Ordering::Random => num += w[n] * grid[i] * qn,
                Ordering::Newest => {
                    if qn <= ABSORBING_EPS {
                        return 0.0;
                    }
                    num += w[n] * grid[i];
                    den += w[n] / qn;
                }
            }
        }
        if ordering == Ordering::Newest { num / den } else { num }
    };
    let (code, rev) = (0..total)
        .into_par_iter()
        .map(|k| (k, eval(k)))
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let mut prices = vec![];
    let mut k = code;
    for _ in 0..=c {
        prices.push(grid[k % g]);
        k /= g;
    }
    (prices, rev)
}
