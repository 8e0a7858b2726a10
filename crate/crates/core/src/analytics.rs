//! Closed-form steady-state quantities: revenues, CoNF, stationary laws,
//! window-random rates, the two-state quality model and the known-quality
//! benchmark.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::check_ns_params;
use crate::model::{Instance, Ordering, PricingPolicy, ReviewState, ABSORBING_EPS, MAX_STATE_BITS};
use crate::numerics::{binomial_pmf, ln_choose};

/// Revenues under both orderings at one static price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfReport {
    pub rev_random: f64,
    pub rev_newest: f64,
    /// Cost of newest first, `rev_random / rev_newest`.
    pub chi: f64,
    /// `q(c) / q(0)`.
    pub beta: f64,
    pub non_degenerate: bool,
}

fn nonabsorbing_q(inst: &Instance, price: f64) -> Result<Vec<f64>> {
    let q = inst.purchase_probs(price);
    if let Some(n) = q.iter().position(|&x| x <= ABSORBING_EPS) {
        return Err(Error::AbsorbingPrice { price, count: n });
    }
    Ok(q)
}

/// `p · E_N[q(N)]` with `N ~ Bin(c, μ)`.
pub fn rev_random_static(inst: &Instance, price: f64) -> f64 {
    let q = inst.purchase_probs(price);
    price * inst.count_weights().iter().zip(&q).map(|(w, q)| w * q).sum::<f64>()
}

/// `p / E_N[1 / q(N)]`.
pub fn rev_newest_static(inst: &Instance, price: f64) -> Result<f64> {
    let q = nonabsorbing_q(inst, price)?;
    let inv: f64 = inst.count_weights().iter().zip(&q).map(|(w, q)| w / q).sum();
    Ok(price / inv)
}

/// CoNF at a static price from the double sum over pairs of counts,
/// checked against the ratio of the two revenues.
pub fn conf_static(inst: &Instance, price: f64) -> Result<ConfReport> {
    let q = nonabsorbing_q(inst, price)?;
    let w = inst.count_weights();
    let mut chi = 0.0;
    for (wi, qi) in w.iter().zip(&q) {
        if *wi == 0.0 {
            continue;
        }
        chi += wi * w.iter().zip(&q).map(|(wj, qj)| wj * qi / qj).sum::<f64>();
    }
    let rev_random = rev_random_static(inst, price);
    let rev_newest = rev_newest_static(inst, price)?;
    if rev_newest > 0.0 {
        let ratio = rev_random / rev_newest;
        if (ratio - chi).abs() > 1e-10 * chi {
            return Err(Error::SelfCheck(format!("double sum {chi} disagrees with revenue ratio {ratio}")));
        }
    }
    let c = inst.c();
    Ok(ConfReport { rev_random, rev_newest, chi, beta: q[c] / q[0], non_degenerate: q[0] < q[c] })
}

/// Long-run law of the number of positive displayed reviews under newest
/// first: `π_n ∝ C(c,n) μ^n (1-μ)^(c-n) / q(n)`.
pub fn stationary_newest_counts(inst: &Instance, price: f64) -> Result<Vec<f64>> {
    let q = nonabsorbing_q(inst, price)?;
    let raw: Vec<f64> = inst.count_weights().iter().zip(&q).map(|(w, q)| w / q).collect();
    let s: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / s).collect())
}

/// Stationary law over full review states `{0,1}^c` under newest first for
/// an arbitrary policy: `π_z ∝ μ^{N_z} (1-μ)^{c-N_z} / q(z)`.
pub fn stationary_newest_states(inst: &Instance, policy: &PricingPolicy) -> Result<Vec<f64>> {
    let (ws, qs) = state_weights_and_q(inst, policy)?;
    let raw: Vec<f64> = ws.iter().zip(&qs).map(|(w, q)| w / q).collect();
    let s: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / s).collect())
}

/// Expected number of positive displayed reviews.
pub fn expected_positive_reviews(inst: &Instance, price: f64, ordering: Ordering) -> Result<f64> {
    match ordering {
        Ordering::Random => Ok(inst.c() as f64 * inst.mu()),
        Ordering::Newest => {
            let pi = stationary_newest_counts(inst, price)?;
            Ok(pi.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
        }
    }
}

fn state_weights_and_q(inst: &Instance, policy: &PricingPolicy) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = inst.c();
    policy.validate_for(c)?;
    if c > MAX_STATE_BITS {
        return Err(Error::InvalidPolicy(format!("state enumeration needs c <= {MAX_STATE_BITS}")));
    }
    let (lm, l1m) = (inst.mu().ln(), (-inst.mu()).ln_1p());
    let mut ws = Vec::with_capacity(1 << c);
    let mut qs = Vec::with_capacity(1 << c);
    let mut absorbing = vec![];
    for z in ReviewState::all(c) {
        let n = z.n_pos();
        ws.push((n as f64 * lm + (c - n) as f64 * l1m).exp());
        let q = inst.q(n, policy.price(z));
        if q <= ABSORBING_EPS {
            absorbing.push(z.label());
        }
        qs.push(q);
    }
    if !absorbing.is_empty() {
        return Err(Error::AbsorbingState { states: absorbing });
    }
    Ok((ws, qs))
}

/// Newest-first revenue of a dynamic policy:
/// `E_Y[ρ(Y)] / E_Y[1 / q(Y)]` with `Y ~ Bern(μ)^c`.
pub fn rev_newest_dynamic(inst: &Instance, policy: &PricingPolicy) -> Result<f64> {
    let c = inst.c();
    policy.validate_for(c)?;
    if let Some(prices) = policy.count_prices(c) {
        let w = inst.count_weights();
        let mut num = 0.0;
        let mut den = 0.0;
        let mut absorbing = vec![];
        for n in 0..=c {
            let q = inst.q(n, prices[n]);
            if q <= ABSORBING_EPS {
                absorbing.push(format!("n={n}"));
                continue;
            }
            num += w[n] * prices[n];
            den += w[n] / q;
        }
        if !absorbing.is_empty() {
            return Err(Error::AbsorbingState { states: absorbing });
        }
        return Ok(num / den);
    }
    let (ws, qs) = state_weights_and_q(inst, policy)?;
    let num: f64 = ReviewState::all(c).zip(&ws).map(|(z, w)| w * policy.price(z)).sum();
    let den: f64 = ws.iter().zip(&qs).map(|(w, q)| w / q).sum();
    Ok(num / den)
}

/// Random-ordering revenue of a dynamic policy:
/// `E_Z[ρ(Z) · q(Z)]` with `Z ~ Bern(μ)^c`.
pub fn rev_random_dynamic(inst: &Instance, policy: &PricingPolicy) -> Result<f64> {
    let c = inst.c();
    policy.validate_for(c)?;
    if let Some(prices) = policy.count_prices(c) {
        let w = inst.count_weights();
        return Ok((0..=c).map(|n| w[n] * prices[n] * inst.q(n, prices[n])).sum());
    }
    if c > MAX_STATE_BITS {
        return Err(Error::InvalidPolicy(format!("state enumeration needs c <= {MAX_STATE_BITS}")));
    }
    let (lm, l1m) = (inst.mu().ln(), (-inst.mu()).ln_1p());
    Ok(ReviewState::all(c)
        .map(|z| {
            let n = z.n_pos();
            let w = (n as f64 * lm + (c - n) as f64 * l1m).exp();
            let p = policy.price(z);
            w * p * inst.q(n, p)
        })
        .sum())
}

/// Revenue when customers know the quality: `p · P[Θ + μ ≥ p]`.
pub fn rev_known_quality(inst: &Instance, price: f64) -> f64 {
    price * inst.dist().survival(price - inst.mu())
}

/// Purchase probability of each window state with `k` positive reviews
/// among the `w` newest, when `c` of them are shown uniformly at random.
pub fn window_purchase_rates(inst: &Instance, w: usize, price: f64) -> Result<Vec<f64>> {
    let c = inst.c();
    if w < c {
        return Err(Error::InvalidParams(format!("window {w} is smaller than c = {c}")));
    }
    let q = nonabsorbing_q(inst, price)?;
    Ok((0..=w)
        .map(|k| {
            let lw = ln_choose(w, k);
            let lo = k.saturating_sub(w - c);
            (lo..=c.min(k)).map(|n| q[n] * (ln_choose(c, n) + ln_choose(w - c, k - n) - lw).exp()).sum()
        })
        .collect())
}

/// Revenue `p κ` of window-random ordering with window `w`, where
/// `1/κ = Σ_k Bin(w, μ)(k) / q_k`.
pub fn window_revenue(inst: &Instance, w: usize, price: f64) -> Result<f64> {
    let qk = window_purchase_rates(inst, w, price)?;
    let bw = binomial_pmf(w, inst.mu());
    let inv: f64 = bw.iter().zip(&qk).map(|(b, q)| b / q).sum();
    Ok(price / inv)
}

/// Steady state of the two-state quality model with one displayed review.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsSteady {
    /// Over `(0,L), (1,L), (0,H), (1,H)`.
    pub pi: [f64; 4],
    pub rev_newest: f64,
    pub rev_random: f64,
    /// Present only when `h(0) = μ_L` and `h(1) = μ_H`.
    pub belief_error_newest: Option<f64>,
    pub belief_error_random: Option<f64>,
}

impl NsSteady {
    /// `(newest, random)` belief errors.
    pub fn belief_errors(&self) -> Result<(f64, f64)> {
        match (self.belief_error_newest, self.belief_error_random) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::NotCalibrated("h(0), h(1) must equal mu_L, mu_H".into())),
        }
    }
}

/// Closed forms of the two-state quality model.
pub fn ns_steady(mu_l: f64, mu_h: f64, xi: f64, price: f64, base: &Instance) -> Result<NsSteady> {
    check_ns_params(mu_l, mu_h, xi, base)?;
    let (q0, q1) = (base.q(0, price), base.q(1, price));
    if q0 <= ABSORBING_EPS {
        return Err(Error::InvalidParams(format!("price {price} is absorbing with a negative review")));
    }
    if !(q1 > q0) {
        return Err(Error::InvalidParams(format!("price {price} is degenerate (q1 = {q1}, q0 = {q0})")));
    }
    let a_h = 1.0 - ((1.0 - mu_h) * q1 + mu_h * q0);
    let a_l = 1.0 - ((1.0 - mu_l) * q1 + mu_l * q0);
    let d = (2.0 - (2.0 - xi) * a_h) * (2.0 - (2.0 - xi) * a_l) - xi * xi * a_h * a_l;
    let p0h = q1 * (2.0 * (1.0 - mu_h) * a_l * (xi - 1.0) + (1.0 - mu_l) * xi + (1.0 - mu_h) * (2.0 - xi)) / d;
    let p0l = q1 * (2.0 * (1.0 - mu_l) * a_h * (xi - 1.0) + (1.0 - mu_h) * xi + (1.0 - mu_l) * (2.0 - xi)) / d;
    let pi = [p0l, 0.5 - p0l, p0h, 0.5 - p0h];
    let rev_newest = price * (q0 * (p0l + p0h) + q1 * (pi[1] + pi[3]));
    let mbar = 0.5 * (mu_l + mu_h);
    let rev_random = price * (q0 * (1.0 - mbar) + q1 * mbar);
    let calibrated = (base.h(0) - mu_l).abs() <= 1e-12 && (base.h(1) - mu_h).abs() <= 1e-12;
    let (ben, ber) = if calibrated {
        let ber = 0.5 * (mu_h - mu_l).powi(2);
        let g = (xi - 1.0) / d;
        (Some(2.0 * q1 * q0 * (mu_h - mu_l).powi(3) * g + ber), Some(ber))
    } else {
        (None, None)
    };
    Ok(NsSteady { pi, rev_newest, rev_random, belief_error_newest: ben, belief_error_random: ber })
}

/// `E[(h(r) - μ)^2]` under a law over `(0,L), (1,L), (0,H), (1,H)`.
pub fn ns_belief_error(pi: &[f64], mu_l: f64, mu_h: f64, base: &Instance) -> f64 {
    let mus = [mu_l, mu_l, mu_h, mu_h];
    (0..4).map(|i| pi[i] * (base.h(i % 2) - mus[i]).powi(2)).sum()
}
