//! Modal growth of perturbations of the arcsine law.

use rootflow::linearized::{direct_check, evolve, generator_matrix, growth_exponent, project_initial};
use rootflow::LinearizedState;

fn main() -> rootflow::Result<()> {
    let a = generator_matrix(8)?;
    let diag: Vec<String> = (0..=8).map(|k| format!("{:.3}", a[k][k])).collect();
    println!("modal rates: [{}]", diag.join(", "));

    for d in [1usize, 2, 3, 5, 10] {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        let s = LinearizedState::new(0.0, c)?;
        println!(
            "mode {d:2}: fitted exponent {:.4}, RK4 deviation at t=1 {:.1e}",
            growth_exponent(&s, 3.0, 31)?,
            direct_check(&s, 1.0)?,
        );
    }

    // a perturbation with nonzero mean carries a frozen constant mode
    let s = project_initial(|x| (1.0 + x) / (1.0 - x * x).sqrt(), 8)?;
    println!("mean violation {:.3}", s.mean_violation());
    let later = evolve(&s, 1.0)?;
    println!("a(1) = {:?}", &later.coeffs()[..3]);
    Ok(())
}
