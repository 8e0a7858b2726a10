//! Revenue under newest-first and random display at one posted price, and
//! their ratio.
use conf_lab::analytics;
use conf_lab::{Estimator, Instance, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 1, Estimator::beta_mean(1.0, 1.0))?;
    let rep = analytics::conf_static(&inst, 1.0)?;
    println!("rev_random = {:.6}", rep.rev_random);
    println!("rev_newest = {:.6}", rep.rev_newest);
    println!("chi        = {:.6}", rep.chi);
    println!("beta       = {:.6}", rep.beta);

    println!("\nprice  chi (c = 3, Beta(2, 2) prior, mu = 0.6)");
    let inst = Instance::new(0.6, ValuationDistribution::uniform(0.0, 1.0)?, 3, Estimator::beta_mean(2.0, 2.0))?;
    for p in [0.5, 0.75, 1.0, 1.25] {
        match analytics::conf_static(&inst, p) {
            Ok(r) => println!("{p:<6} {:.6}", r.chi),
            Err(e) => println!("{p:<6} {e}"),
        }
    }
    Ok(())
}
