//! Quality drifting upward from 0.1 to 0.9 over 1000 rounds, two displayed
//! reviews. Compares a window of 2 (newest) with a window of 1000 (finite
//! random) at two prices.
use conf_lab::simulator::{run, SimConfig, SimOrdering, Variant};
use conf_lab::{Estimator, Instance, PricingPolicy, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 2, Estimator::beta_mean(0.1, 0.9))?;
    let variant = Variant::IncreasingQuality { mu_lo: 0.1, mu_hi: 0.9 };
    println!("price  window  revenue    stderr");
    for p in [0.75, 1.0] {
        for w in [2, 1000] {
            let cfg = SimConfig::new(inst.clone(), SimOrdering::Window { w }, PricingPolicy::static_price(p), 1000, reps, 7)
                .with_variant(variant);
            let r = run(&cfg)?;
            println!("{p:<6} {w:<7} {:.6}  {:.6}", r.avg_revenue_per_round, r.stderr);
        }
    }
    Ok(())
}
