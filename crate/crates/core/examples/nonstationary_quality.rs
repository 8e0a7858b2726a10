//! Quality that switches between two levels. Newest first tracks the current
//! quality better yet still earns less than random display.
use conf_lab::analytics::ns_steady;
use conf_lab::{Estimator, Instance, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let base = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 1, Estimator::table([0.25, 0.75]))?;
    println!("xi    rev_newest rev_random belief_newest belief_random");
    for k in 1..=10 {
        let xi = k as f64 / 10.0;
        let s = ns_steady(0.25, 0.75, xi, 1.0, &base)?;
        let (bn, br) = s.belief_errors()?;
        println!("{xi:<5.1} {:.6}   {:.6}   {bn:.6}      {br:.6}", s.rev_newest, s.rev_random);
    }
    Ok(())
}
