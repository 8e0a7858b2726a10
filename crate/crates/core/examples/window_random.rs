//! Showing c reviews sampled from the w most recent: revenue climbs from the
//! newest-first value toward the random benchmark as the window grows.
use conf_lab::analytics;
use conf_lab::{Estimator, Instance, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 1, Estimator::beta_mean(1.0, 1.0))?;
    println!("newest  {:.9}", analytics::rev_newest_static(&inst, 1.0)?);
    for k in 0..=11 {
        let w = 1usize << k;
        println!("w={w:<5} {:.9}", analytics::window_revenue(&inst, w, 1.0)?);
    }
    println!("random  {:.9}", analytics::rev_random_static(&inst, 1.0));
    Ok(())
}
