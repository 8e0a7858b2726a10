//! Class-level cost of newest first for uniform tastes on [-eps, eps] and a
//! symmetric Beta prior of varying strength.
use conf_lab::pricing::{conf_class, PolicyClass};
use conf_lab::{Estimator, Instance, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    println!("a,eps,chi_static,chi_dynamic");
    for a in [0.05, 0.5, 5.0] {
        for k in 1..=30 {
            let eps = 0.1 * k as f64;
            let inst = Instance::new(0.5, ValuationDistribution::uniform(-eps, eps)?, 1, Estimator::beta_mean(a, a))?;
            let s = conf_class(&inst, PolicyClass::Static)?;
            let d = conf_class(&inst, PolicyClass::Dynamic)?;
            println!("{a},{eps:.1},{:.6},{:.6}", s.chi, d.chi);
        }
    }
    Ok(())
}
