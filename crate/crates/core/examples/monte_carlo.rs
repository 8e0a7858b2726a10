//! Seeded simulation against the closed forms, for each display rule.
use conf_lab::analytics;
use conf_lab::simulator::{run, SimConfig, SimOrdering};
use conf_lab::{Estimator, Instance, PricingPolicy, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 1, Estimator::beta_mean(1.0, 1.0))?;
    let exact = [
        (SimOrdering::Newest, analytics::rev_newest_static(&inst, 1.0)?),
        (SimOrdering::RandomIid, analytics::rev_random_static(&inst, 1.0)),
        (SimOrdering::Window { w: 2 }, analytics::window_revenue(&inst, 2, 1.0)?),
    ];
    for (ord, target) in exact {
        let r = run(&SimConfig::new(inst.clone(), ord, PricingPolicy::static_price(1.0), 200_000, 16, 1))?;
        println!(
            "{ord:?}: simulated {:.5} +- {:.5}, exact {target:.5}, z = {:.2}",
            r.avg_revenue_per_round,
            r.stderr,
            (r.avg_revenue_per_round - target) / r.stderr
        );
    }
    Ok(())
}
