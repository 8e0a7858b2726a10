//! Customers whose prior sharpens with the pool's tallies: prior
//! `Beta(a + γP, b + γN)`. Prints block means of per-round revenue for the
//! newest, finite-random and i.i.d. random orderings.
use conf_lab::simulator::{run, SimConfig, SimOrdering, Variant};
use conf_lab::{Estimator, Instance, PricingPolicy, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let rounds = 10_000;
    for (mu, gamma) in [(0.1, 0.01), (0.5, 0.1)] {
        let inst = Instance::new(mu, ValuationDistribution::uniform(0.0, 1.0)?, 1, Estimator::beta_mean(mu, 1.0 - mu))?;
        println!("mu = {mu}, gamma = {gamma}");
        println!("{:<20} {:>10} {:>10} {:>10}", "ordering", "t<=1000", "t>9000", "stderr");
        for (name, ord) in [
            ("newest", SimOrdering::Newest),
            ("random_finite_pool", SimOrdering::RandomFinitePool),
            ("random_iid", SimOrdering::RandomIid),
        ] {
            let cfg = SimConfig::new(inst.clone(), ord, PricingPolicy::static_price(1.0), rounds, reps, 11)
                .with_variant(Variant::TimeVaryingPrior { gamma })
                .with_blocks(10);
            let b = run(&cfg)?.blocks.unwrap();
            println!("{name:<20} {:>10.6} {:>10.6} {:>10.6}", b[0].mean_revenue, b[9].mean_revenue, b[9].stderr);
        }
    }
    Ok(())
}
