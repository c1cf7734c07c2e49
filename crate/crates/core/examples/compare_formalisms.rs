//! Roots, PDE and closed form side by side at t = 0.5.

use rootflow::metrics::{l1_density_error, FamilyMeasure, GridMeasure};
use rootflow::poly_dynamics::{differentiate_k, empirical_cdf};
use rootflow::{pde_solver, ClosedFormFamily, ComparisonReport, DifferentiationSchedule, PdeState, SolverParams};

fn main() -> rootflow::Result<()> {
    let family = ClosedFormFamily::semicircle(1.0)?;
    let n = 1000;
    let exact = FamilyMeasure::new(family, 0.5)?;

    let roots = differentiate_k(&family.sample_roots(0.0, n)?, DifferentiationSchedule::new(n / 2, n / 2)?)?;
    let poly = empirical_cdf(&roots.last().expect("final snapshot").1);

    let params = SolverParams::default();
    let tr = pde_solver::run(&PdeState::from_family(&family, 0.0, params.n)?, 0.5, &[], &params)?;
    let state = tr.final_state();
    let grid = GridMeasure::from_state(state)?;

    let pairs = [
        ("poly vs exact", ComparisonReport::new(&poly, &exact, n, None)?),
        ("pde vs exact", ComparisonReport::new(&grid, &exact, params.n, Some(l1_density_error(state, &family, 0.5)?))?),
        ("poly vs pde", ComparisonReport::new(&poly, &grid, n, None)?),
    ];
    for (name, r) in pairs {
        println!("{name:14} {}", serde_json::to_string(&r).expect("report serializes"));
    }
    Ok(())
}
