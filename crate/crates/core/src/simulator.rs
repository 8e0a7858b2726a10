//! Seeded round-by-round Monte Carlo of the review market, including the
//! variants that have no closed form.
//!
//! Replication `r` draws from a ChaCha8 stream selected by `(seed, r)`, so
//! results do not depend on how replications are scheduled across threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Estimator, Instance, PricingPolicy, ReviewState};

/// Which reviews are displayed each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimOrdering {
    /// The `c` most recent reviews.
    Newest,
    /// `c` fresh i.i.d. ratings from the current quality.
    RandomIid,
    /// `c` distinct reviews drawn uniformly from everything written so far.
    RandomFinitePool,
    /// `c` distinct reviews drawn uniformly from the `w` most recent.
    Window { w: usize },
}

/// Model variant layered on top of the baseline round protocol.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Baseline,
    /// Prior `Beta(a + γP_t, b + γN_t)` built from the pool's tallies. Needs a
    /// `beta_mean` estimator.
    TimeVaryingPrior { gamma: f64 },
    /// Quality rises linearly from `mu_lo` in round 1 to `mu_hi` in the last
    /// round.
    IncreasingQuality { mu_lo: f64, mu_hi: f64 },
    /// Quality switches between two levels with probability `xi / 2` per
    /// round; one displayed review.
    MarkovQuality { mu_lo: f64, mu_hi: f64, xi: f64 },
    /// Reviews report `Θ_s + X_s` and customers buy when `Θ_t + R_s > p`.
    CoarseRatings,
}

impl Variant {
    /// Variants whose transient is the object of study run without burn-in.
    pub fn is_trajectory(&self) -> bool {
        matches!(self, Self::TimeVaryingPrior { .. } | Self::IncreasingQuality { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub instance: Instance,
    pub ordering: SimOrdering,
    pub pricing: PricingPolicy,
    pub rounds: u64,
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub variant: Variant,
    /// Rounds discarded before averaging; defaults per [`default_burn_in`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default)]
    pub record_trajectory: bool,
    /// Split the counted rounds into this many blocks and report each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

/// Upper limit on the automatic burn-in.
pub const MAX_AUTO_BURN_IN: u64 = 200_000;

/// `max(10^4, 100 · 2^c)` rounds, capped at [`MAX_AUTO_BURN_IN`], for
/// steady-state runs; zero for trajectory variants.
pub fn default_burn_in(c: usize, variant: &Variant) -> u64 {
    if variant.is_trajectory() {
        return 0;
    }
    let pow = if c >= 20 { u64::MAX } else { 100u64 << c };
    pow.clamp(10_000, MAX_AUTO_BURN_IN)
}

impl SimConfig {
    pub fn new(instance: Instance, ordering: SimOrdering, pricing: PricingPolicy, rounds: u64, replications: u64, seed: u64) -> Self {
        Self {
            instance,
            ordering,
            pricing,
            rounds,
            replications,
            seed,
            variant: Variant::Baseline,
            burn_in: None,
            record_trajectory: false,
            blocks: None,
        }
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn with_burn_in(mut self, b: u64) -> Self {
        self.burn_in = Some(b);
        self
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn with_blocks(mut self, b: usize) -> Self {
        self.blocks = Some(b);
        self
    }

    pub fn effective_burn_in(&self) -> u64 {
        self.burn_in.unwrap_or_else(|| default_burn_in(self.instance.c(), &self.variant))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        let c = self.instance.c();
        if self.rounds == 0 || self.replications == 0 {
            return bad("rounds and replications must be at least 1".into());
        }
        if let Some(b) = self.blocks {
            if b == 0 || b as u64 > self.rounds {
                return bad(format!("blocks must lie in 1..=rounds, got {b}"));
            }
        }
        self.pricing.validate_for(c).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        if let SimOrdering::Window { w } = self.ordering {
            if w < c {
                return bad(format!("window {w} is smaller than c = {c}"));
            }
        }
        match self.variant {
            Variant::Baseline => {}
            Variant::TimeVaryingPrior { gamma } => {
                if !(gamma >= 0.0 && gamma.is_finite()) {
                    return bad(format!("gamma must be non-negative, got {gamma}"));
                }
                if !matches!(self.instance.estimator(), Estimator::BetaMean { .. }) {
                    return bad("time-varying prior needs a beta_mean estimator".into());
                }
            }
            Variant::IncreasingQuality { mu_lo, mu_hi } => {
                if !(0.0 < mu_lo && mu_lo <= mu_hi && mu_hi < 1.0) {
                    return bad(format!("need 0 < mu_lo <= mu_hi < 1, got ({mu_lo}, {mu_hi})"));
                }
            }
            Variant::MarkovQuality { mu_lo, mu_hi, xi } => {
                if !(0.0 < mu_lo && mu_lo < mu_hi && mu_hi < 1.0) {
                    return bad(format!("need 0 < mu_lo < mu_hi < 1, got ({mu_lo}, {mu_hi})"));
                }
                if !(xi > 0.0 && xi <= 1.0) {
                    return bad(format!("xi must lie in (0, 1], got {xi}"));
                }
                if c != 1 {
                    return bad("two-state quality needs c = 1".into());
                }
                if !matches!(self.ordering, SimOrdering::Newest | SimOrdering::RandomIid) {
                    return bad("two-state quality supports the newest and random_iid orderings".into());
                }
            }
            Variant::CoarseRatings => {
                if c != 1 {
                    return bad("coarse ratings need c = 1".into());
                }
                if !matches!(self.ordering, SimOrdering::Newest | SimOrdering::RandomFinitePool) {
                    return bad("coarse ratings support the newest and random_finite_pool orderings".into());
                }
                if !matches!(self.pricing, PricingPolicy::Static { .. }) {
                    return bad("coarse ratings need a static price".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockStat {
    /// First counted round in the block, 1-based.
    pub start_round: u64,
    pub end_round: u64,
    pub mean_revenue: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub avg_revenue_per_round: f64,
    /// Standard deviation of the per-replication means over `√reps`.
    pub stderr: f64,
    pub purchase_rate: f64,
    /// Mean fraction of positive displayed ratings (mean displayed value for
    /// coarse ratings).
    pub avg_displayed_rating: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_error_stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revenue_trajectory: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_displayed_rating_trajectory: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockStat>>,
    pub rounds: u64,
    pub replications: u64,
    pub burn_in: u64,
}

impl SimResult {
    /// Trajectory dump: `round,mean_revenue,mean_displayed_rating`.
    pub fn trajectory_csv(&self) -> Option<String> {
        let rev = self.revenue_trajectory.as_ref()?;
        let rat = self.avg_displayed_rating_trajectory.as_ref()?;
        let mut out = String::from("round,mean_revenue,mean_displayed_rating\n");
        for (t, (r, a)) in rev.iter().zip(rat).enumerate() {
            out.push_str(&format!("{},{},{}\n", t + 1, r, a));
        }
        Some(out)
    }
}

#[derive(Default)]
struct RepOut {
    revenue: f64,
    purchases: f64,
    rating: f64,
    belief_error: f64,
    traj_rev: Vec<f64>,
    traj_rating: Vec<f64>,
    block_rev: Vec<f64>,
}

fn bern<R: Rng>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

fn run_replication(cfg: &SimConfig, rep: u64) -> RepOut {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);
    let inst = &cfg.instance;
    let dist = *inst.dist();
    let c = inst.c();
    let mu = inst.mu();
    let burn = cfg.effective_burn_in();
    let total = burn + cfg.rounds;
    let policy = &cfg.pricing;
    let state_prices = matches!(policy, PricingPolicy::StateTable { .. });
    let count_prices = policy.count_prices(c);

    let mut out = RepOut::default();
    if cfg.record_trajectory {
        out.traj_rev = vec![0.0; cfg.rounds as usize];
        out.traj_rating = vec![0.0; cfg.rounds as usize];
    }
    let nblocks = cfg.blocks.unwrap_or(0);
    out.block_rev = vec![0.0; nblocks];
    let block_of = |t: u64| (t as u128 * nblocks as u128 / cfg.rounds as u128) as usize;

    // pool of written reviews, newest last
    let mut pool: Vec<bool> = vec![];
    let mut coarse: Vec<f64> = vec![];
    let mut quality = 0usize;
    let (mut q_lo, mut q_hi, mut xi) = (mu, mu, 0.0);

    match cfg.variant {
        Variant::CoarseRatings => {
            let theta = dist.sample(&mut rng);
            coarse.push(theta + bern(&mut rng, mu) as u8 as f64);
        }
        Variant::MarkovQuality { mu_lo, mu_hi, xi: x } => {
            (q_lo, q_hi, xi) = (mu_lo, mu_hi, x);
            quality = bern(&mut rng, 0.5) as usize;
            let m = if quality == 1 { q_hi } else { q_lo };
            pool.push(bern(&mut rng, m));
        }
        _ => {
            let (n0, m0) = match (cfg.variant, cfg.ordering) {
                (Variant::IncreasingQuality { mu_lo, .. }, _) => (c, mu_lo),
                (Variant::TimeVaryingPrior { .. }, _) => (c, mu),
                (_, SimOrdering::Window { w }) => (w, mu),
                _ => (c, mu),
            };
            for _ in 0..n0 {
                pool.push(bern(&mut rng, m0));
            }
        }
    }
    let mut pool_pos = pool.iter().filter(|&&b| b).count();

    let mut shown = vec![false; c];
    for t in 0..total {
        let counted = t >= burn;
        let tt = t.saturating_sub(burn);
        let mu_t = match cfg.variant {
            Variant::IncreasingQuality { mu_lo, mu_hi } => {
                if cfg.rounds > 1 {
                    mu_lo + tt as f64 / (cfg.rounds - 1) as f64 * (mu_hi - mu_lo)
                } else {
                    mu_lo
                }
            }
            Variant::MarkovQuality { .. } => {
                if quality == 1 {
                    q_hi
                } else {
                    q_lo
                }
            }
            _ => mu,
        };

        let (rev, rating, belief_err) = if let Variant::CoarseRatings = cfg.variant {
            let price = policy.price(ReviewState::new(0, c));
            let r = match cfg.ordering {
                SimOrdering::Newest => *coarse.last().unwrap(),
                _ => coarse[rng.random_range(0..coarse.len())],
            };
            let theta = dist.sample(&mut rng);
            let buy = theta + r > price;
            if buy {
                coarse.push(theta + bern(&mut rng, mu) as u8 as f64);
            }
            (if buy { price } else { 0.0 }, r, 0.0)
        } else {
            // display
            match cfg.ordering {
                SimOrdering::Newest => {
                    let len = pool.len();
                    for (i, s) in shown.iter_mut().enumerate() {
                        *s = pool[len - 1 - i];
                    }
                }
                SimOrdering::RandomIid => {
                    let m = if let Variant::MarkovQuality { .. } = cfg.variant { 0.5 * (q_lo + q_hi) } else { mu_t };
                    for s in shown.iter_mut() {
                        *s = bern(&mut rng, m);
                    }
                }
                SimOrdering::RandomFinitePool | SimOrdering::Window { .. } => {
                    let len = pool.len();
                    let l = match cfg.ordering {
                        SimOrdering::Window { w } => w.min(len),
                        _ => len,
                    };
                    if c == 1 {
                        shown[0] = pool[len - 1 - rng.random_range(0..l)];
                    } else {
                        for (s, i) in shown.iter_mut().zip(index::sample(&mut rng, l, c)) {
                            *s = pool[len - 1 - i];
                        }
                    }
                }
            }
            let n = shown.iter().filter(|&&b| b).count();
            let belief = match cfg.variant {
                Variant::TimeVaryingPrior { gamma } => {
                    let Estimator::BetaMean { a, b } = *inst.estimator() else { unreachable!() };
                    let p = pool_pos as f64;
                    let q = (pool.len() - pool_pos) as f64;
                    (a + gamma * p + n as f64) / (a + b + gamma * (p + q) + c as f64)
                }
                _ => inst.h(n),
            };
            let price = match (&count_prices, state_prices) {
                (Some(cp), _) => cp[n],
                _ => policy.price(ReviewState::from_bits(&shown)),
            };
            let theta = dist.sample(&mut rng);
            let buy = theta + belief >= price;
            if buy {
                let r = bern(&mut rng, mu_t);
                pool.push(r);
                pool_pos += r as usize;
            }
            let be = if let Variant::MarkovQuality { .. } = cfg.variant {
                let e = (belief - mu_t).powi(2);
                if bern(&mut rng, 0.5 * xi) {
                    quality ^= 1;
                }
                e
            } else {
                0.0
            };
            (if buy { price } else { 0.0 }, n as f64 / c as f64, be)
        };

        if counted {
            out.revenue += rev;
            out.purchases += (rev != 0.0) as u8 as f64;
            out.rating += rating;
            out.belief_error += belief_err;
            if cfg.record_trajectory {
                out.traj_rev[tt as usize] = rev;
                out.traj_rating[tt as usize] = rating;
            }
            if nblocks > 0 {
                out.block_rev[block_of(tt)] += rev;
            }
        }
    }
    let r = cfg.rounds as f64;
    out.revenue /= r;
    out.purchases /= r;
    out.rating /= r;
    out.belief_error /= r;
    for b in 0..nblocks {
        let (s, e) = block_bounds(b, nblocks, cfg.rounds);
        out.block_rev[b] /= (e - s) as f64;
    }
    out
}

/// `[start, end)` counted-round indices (0-based) of block `b`.
fn block_bounds(b: usize, nblocks: usize, rounds: u64) -> (u64, u64) {
    // inverse of t -> floor(t * B / T)
    let start = (b as u128 * rounds as u128).div_ceil(nblocks as u128) as u64;
    let end = ((b as u128 + 1) * rounds as u128).div_ceil(nblocks as u128) as u64;
    (start, end)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

const CHUNK: u64 = 16;

struct ChunkOut {
    revenue: Vec<f64>,
    purchases: Vec<f64>,
    rating: Vec<f64>,
    belief: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    traj_rev: Vec<f64>,
    traj_rating: Vec<f64>,
}

/// Runs `f` on a pool capped by `CONF_LAB_THREADS` when that is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match std::env::var("CONF_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Runs all replications and aggregates them in replication order.
pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let reps = cfg.replications;
    let nchunks = reps.div_ceil(CHUNK);
    let chunks: Vec<ChunkOut> = with_thread_cap(|| {
        (0..nchunks)
            .into_par_iter()
            .map(|k| {
                let mut co = ChunkOut {
                    revenue: vec![],
                    purchases: vec![],
                    rating: vec![],
                    belief: vec![],
                    blocks: vec![],
                    traj_rev: vec![],
                    traj_rating: vec![],
                };
                for rep in k * CHUNK..((k + 1) * CHUNK).min(reps) {
                    let o = run_replication(cfg, rep);
                    co.revenue.push(o.revenue);
                    co.purchases.push(o.purchases);
                    co.rating.push(o.rating);
                    co.belief.push(o.belief_error);
                    co.blocks.push(o.block_rev);
                    if cfg.record_trajectory {
                        if co.traj_rev.is_empty() {
                            co.traj_rev = o.traj_rev;
                            co.traj_rating = o.traj_rating;
                        } else {
                            co.traj_rev.iter_mut().zip(&o.traj_rev).for_each(|(a, b)| *a += b);
                            co.traj_rating.iter_mut().zip(&o.traj_rating).for_each(|(a, b)| *a += b);
                        }
                    }
                }
                co
            })
            .collect()
    });

    let mut revenue = vec![];
    let mut purchases = vec![];
    let mut rating = vec![];
    let mut belief = vec![];
    let mut blocks: Vec<Vec<f64>> = vec![];
    let mut traj_rev: Vec<f64> = vec![];
    let mut traj_rating: Vec<f64> = vec![];
    for ch in chunks {
        revenue.extend(ch.revenue);
        purchases.extend(ch.purchases);
        rating.extend(ch.rating);
        belief.extend(ch.belief);
        blocks.extend(ch.blocks);
        if cfg.record_trajectory {
            if traj_rev.is_empty() {
                traj_rev = ch.traj_rev;
                traj_rating = ch.traj_rating;
            } else {
                traj_rev.iter_mut().zip(&ch.traj_rev).for_each(|(a, b)| *a += b);
                traj_rating.iter_mut().zip(&ch.traj_rating).for_each(|(a, b)| *a += b);
            }
        }
    }

    let (avg, stderr) = mean_and_stderr(&revenue);
    let (purchase_rate, _) = mean_and_stderr(&purchases);
    let (avg_rating, _) = mean_and_stderr(&rating);
    let (belief_error, belief_error_stderr) = if let Variant::MarkovQuality { .. } = cfg.variant {
        let (m, s) = mean_and_stderr(&belief);
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    let block_stats = cfg.blocks.map(|nb| {
        (0..nb)
            .map(|b| {
                let col: Vec<f64> = blocks.iter().map(|r| r[b]).collect();
                let (m, s) = mean_and_stderr(&col);
                let (start, end) = block_bounds(b, nb, cfg.rounds);
                BlockStat { start_round: start + 1, end_round: end, mean_revenue: m, stderr: s }
            })
            .collect()
    });
    let (revenue_trajectory, avg_displayed_rating_trajectory) = if cfg.record_trajectory {
        let n = reps as f64;
        (
            Some(traj_rev.into_iter().map(|x| x / n).collect()),
            Some(traj_rating.into_iter().map(|x| x / n).collect()),
        )
    } else {
        (None, None)
    };
    Ok(SimResult {
        avg_revenue_per_round: avg,
        stderr,
        purchase_rate,
        avg_displayed_rating: avg_rating,
        belief_error,
        belief_error_stderr,
        revenue_trajectory,
        avg_displayed_rating_trajectory,
        blocks: block_stats,
        rounds: cfg.rounds,
        replications: reps,
        burn_in: cfg.effective_burn_in(),
    })
}

/// [`run`] with the time-varying prior variant.
pub fn run_variant_time_varying_prior(cfg: &SimConfig, gamma: f64) -> Result<SimResult> {
    run(&cfg.clone().with_variant(Variant::TimeVaryingPrior { gamma }))
}

/// [`run`] with linearly increasing quality.
pub fn run_variant_increasing_quality(cfg: &SimConfig, mu_lo: f64, mu_hi: f64) -> Result<SimResult> {
    run(&cfg.clone().with_variant(Variant::IncreasingQuality { mu_lo, mu_hi }))
}

/// [`run`] with coarse ratings.
pub fn run_variant_coarse_ratings(cfg: &SimConfig) -> Result<SimResult> {
    run(&cfg.clone().with_variant(Variant::CoarseRatings))
}

/// [`run`] with two-state Markov quality.
pub fn run_variant_markov_quality(cfg: &SimConfig, mu_lo: f64, mu_hi: f64, xi: f64) -> Result<SimResult> {
    run(&cfg.clone().with_variant(Variant::MarkovQuality { mu_lo, mu_hi, xi }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{ns_steady, rev_newest_static, rev_random_static, window_revenue};
    use crate::distributions::ValuationDistribution;

    fn u01() -> ValuationDistribution {
        ValuationDistribution::uniform(0.0, 1.0).unwrap()
    }

    fn e1() -> Instance {
        Instance::new(0.5, u01(), 1, Estimator::beta_mean(1.0, 1.0)).unwrap()
    }

    fn cfg(ord: SimOrdering, rounds: u64, reps: u64) -> SimConfig {
        SimConfig::new(e1(), ord, PricingPolicy::static_price(1.0), rounds, reps, 42)
    }

    fn close(r: &SimResult, target: f64, k: f64) -> bool {
        (r.avg_revenue_per_round - target).abs() <= k * r.stderr
    }

    #[test]
    fn oracles_at_ci_scale() {
        let r = run(&cfg(SimOrdering::Newest, 100_000, 16)).unwrap();
        assert!(close(&r, rev_newest_static(&e1(), 1.0).unwrap(), 5.0), "{r:?}");
        let r = run(&cfg(SimOrdering::RandomIid, 100_000, 16)).unwrap();
        assert!(close(&r, rev_random_static(&e1(), 1.0), 5.0), "{r:?}");
        let r = run(&cfg(SimOrdering::Window { w: 2 }, 100_000, 16)).unwrap();
        assert!(close(&r, window_revenue(&e1(), 2, 1.0).unwrap(), 5.0), "{r:?}");
    }

    #[test]
    fn deterministic_under_seed() {
        let c = cfg(SimOrdering::Window { w: 3 }, 5_000, 5).with_trajectory().with_blocks(4);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
        let mut other = c.clone();
        other.seed = 43;
        assert_ne!(run(&c).unwrap().avg_revenue_per_round, run(&other).unwrap().avg_revenue_per_round);
    }

    #[test]
    fn thread_cap_does_not_change_results() {
        let c = cfg(SimOrdering::Newest, 2_000, 40);
        let a = run(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_replication_has_zero_stderr() {
        let r = run(&cfg(SimOrdering::Newest, 1_000, 1)).unwrap();
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn zero_gamma_reproduces_baseline() {
        for ord in [SimOrdering::Newest, SimOrdering::RandomIid, SimOrdering::RandomFinitePool] {
            let base = cfg(ord, 3_000, 4).with_burn_in(0).with_trajectory();
            let a = run(&base).unwrap();
            let b = run_variant_time_varying_prior(&base, 0.0).unwrap();
            assert_eq!(a.revenue_trajectory, b.revenue_trajectory);
        }
    }

    #[test]
    fn flat_increasing_quality_reproduces_baseline() {
        let base = cfg(SimOrdering::Newest, 3_000, 4).with_burn_in(0).with_trajectory();
        let a = run(&base).unwrap();
        let b = run_variant_increasing_quality(&base, 0.5, 0.5).unwrap();
        assert_eq!(a.revenue_trajectory, b.revenue_trajectory);
    }

    #[test]
    fn markov_quality_belief_errors() {
        let base = Instance::new(0.5, u01(), 1, Estimator::table([0.25, 0.75])).unwrap();
        let s = ns_steady(0.25, 0.75, 0.5, 1.0, &base).unwrap();
        let (ben, ber) = s.belief_errors().unwrap();
        let mk = |ord| {
            SimConfig::new(base.clone(), ord, PricingPolicy::static_price(1.0), 100_000, 16, 9)
                .with_variant(Variant::MarkovQuality { mu_lo: 0.25, mu_hi: 0.75, xi: 0.5 })
        };
        let n = run(&mk(SimOrdering::Newest)).unwrap();
        let r = run(&mk(SimOrdering::RandomIid)).unwrap();
        assert!((n.belief_error.unwrap() - ben).abs() <= 5.0 * n.belief_error_stderr.unwrap());
        assert!((r.belief_error.unwrap() - ber).abs() <= 5.0 * r.belief_error_stderr.unwrap());
        assert!(close(&n, s.rev_newest, 5.0) && close(&r, s.rev_random, 5.0));
    }

    #[test]
    fn coarse_ratings_price_above_support_earns_nothing() {
        let inst = Instance::new(0.5, u01(), 1, Estimator::table([0.0, 1.0])).unwrap();
        let c = SimConfig::new(inst, SimOrdering::Newest, PricingPolicy::static_price(10.0), 1_000, 2, 1)
            .with_variant(Variant::CoarseRatings);
        assert_eq!(run(&c).unwrap().avg_revenue_per_round, 0.0);
    }

    #[test]
    fn state_table_policy_runs() {
        let inst = Instance::new(0.5, u01(), 2, Estimator::beta_mean(1.0, 1.0)).unwrap();
        let pol = PricingPolicy::state_table_from(2, |z| 0.6 + 0.1 * z.mask() as f64);
        let r = run(&SimConfig::new(inst.clone(), SimOrdering::Newest, pol.clone(), 100_000, 8, 3)).unwrap();
        let exact = crate::analytics::rev_newest_dynamic(&inst, &pol).unwrap();
        assert!(close(&r, exact, 5.0), "{r:?} vs {exact}");
    }

    #[test]
    fn blocks_partition_rounds() {
        assert_eq!(block_bounds(0, 3, 10), (0, 4));
        assert_eq!(block_bounds(1, 3, 10), (4, 7));
        assert_eq!(block_bounds(2, 3, 10), (7, 10));
        let r = run(&cfg(SimOrdering::Newest, 1_000, 3).with_blocks(10).with_burn_in(0)).unwrap();
        let b = r.blocks.unwrap();
        let mean: f64 = b.iter().map(|x| x.mean_revenue).sum::<f64>() / 10.0;
        assert!((mean - r.avg_revenue_per_round).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(run(&cfg(SimOrdering::Newest, 0, 1)).is_err());
        assert!(run(&cfg(SimOrdering::Window { w: 0 }, 10, 1)).is_err());
        let c = cfg(SimOrdering::Window { w: 2 }, 10, 1).with_variant(Variant::MarkovQuality { mu_lo: 0.2, mu_hi: 0.8, xi: 0.5 });
        assert!(matches!(run(&c), Err(Error::ConfigInvalid(_))));
        let c = cfg(SimOrdering::Newest, 10, 1).with_variant(Variant::IncreasingQuality { mu_lo: 0.8, mu_hi: 0.2 });
        assert!(run(&c).is_err());
        let t = SimConfig::new(
            Instance::new(0.5, u01(), 1, Estimator::table([0.1, 0.9])).unwrap(),
            SimOrdering::Newest,
            PricingPolicy::static_price(1.0),
            10,
            1,
            0,
        )
        .with_variant(Variant::TimeVaryingPrior { gamma: 0.1 });
        assert!(run(&t).is_err());
    }

    #[test]
    fn halving_replications_doubles_variance() {
        let mut ratios = vec![];
        for seed in 0..6 {
            let mut a = cfg(SimOrdering::Newest, 5_000, 64);
            a.seed = seed;
            let mut b = a.clone();
            b.replications = 32;
            b.seed = seed + 100;
            let (ra, rb) = (run(&a).unwrap(), run(&b).unwrap());
            ratios.push((rb.stderr / ra.stderr).powi(2));
        }
        let m = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((m - 2.0).abs() < 0.4, "{ratios:?}");
    }
}
