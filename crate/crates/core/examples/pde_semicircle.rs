//! Solve the transport equation from semicircle and Marchenko-Pastur data
//! and track mass and L1 error against the exact solution.

use rootflow::metrics::l1_density_error;
use rootflow::pde_solver::{run, total_mass, Termination};
use rootflow::{ClosedFormFamily, PdeState, SolverParams};

fn main() -> rootflow::Result<()> {
    let params = SolverParams::default();
    let times = [0.1, 0.2, 0.3, 0.4, 0.5];
    for family in [ClosedFormFamily::semicircle(1.0)?, ClosedFormFamily::marchenko_pastur(1.0)?] {
        let initial = PdeState::from_family(&family, 0.0, params.n)?;
        let tr = run(&initial, 0.5, &times, &params)?;
        println!("{}: {} steps", family.name(), tr.steps);
        for s in &tr.snapshots {
            let t = s.time();
            println!(
                "  t={t:.2}  mass={:.5} (exact {:.2})  L1={:.2e}  support=[{:.4}, {:.4}]",
                total_mass(s),
                family.mass(t)?,
                l1_density_error(s, &family, t)?,
                s.support().a(),
                s.support().b(),
            );
        }
    }

    let family = ClosedFormFamily::semicircle(0.25)?;
    let tr = run(&PdeState::from_family(&family, 0.0, params.n)?, 1.0, &[], &params)?;
    if let Termination::SupportCollapse { t, width } = tr.termination {
        println!("semicircle T=0.25 collapses at t = {t:.4} (width {width:.1e})");
    }
    Ok(())
}
