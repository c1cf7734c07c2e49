//! Differentiate a polynomial with quantile-sampled roots and compare the
//! root distribution with the closed-form density.
//!
//! ```bash
//! cargo run --release --example root_flow -- 2000 1000
//! ```

use rootflow::metrics::{ks_distance, wasserstein1, FamilyMeasure};
use rootflow::poly_dynamics::{differentiate_k, empirical_cdf};
use rootflow::{ClosedFormFamily, DifferentiationSchedule};

fn main() -> rootflow::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(1000);
    let k = args.next().unwrap_or(n / 2);

    for family in [ClosedFormFamily::semicircle(1.0)?, ClosedFormFamily::marchenko_pastur(1.0)?] {
        let roots = family.sample_roots(0.0, n)?;
        let snapshots = differentiate_k(&roots, DifferentiationSchedule::new(k, k.div_ceil(5).max(1))?)?;
        println!("{} (n = {n})", family.name());
        for (step, config) in &snapshots {
            let t = *step as f64 / n as f64;
            let exact = FamilyMeasure::new(family, t)?;
            let cdf = empirical_cdf(config);
            println!(
                "  k={step:5}  t={t:.3}  roots={:5}  mean={:+.3e}  KS={:.2e}  W1={:.2e}",
                config.len(),
                config.mean(),
                ks_distance(&cdf, &exact)?,
                wasserstein1(&cdf, &exact)?,
            );
        }
    }
    Ok(())
}
