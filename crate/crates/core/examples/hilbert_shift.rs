//! The finite Hilbert transform as a shift on Chebyshev coefficients.

use rootflow::chebyshev::{finite_hilbert_sqrtweight, finite_hilbert_weighted, project_weighted, Kind};
use rootflow::{ChebSeries, SupportInterval};

fn main() -> rootflow::Result<()> {
    let unit = SupportInterval::unit();

    // f = T_3 / √(1-x²) maps to -U_2
    let g = ChebSeries::on_unit(Kind::First, vec![0.0, 0.0, 0.0, 1.0])?;
    println!("H[T_3 w] coefficients: {:?}", finite_hilbert_weighted(&g)?.coeffs());

    // H[√(1-x²)] = x
    let h = ChebSeries::on_unit(Kind::Second, vec![1.0])?;
    println!("H[sqrt(1-x^2)] at 0.3: {}", finite_hilbert_sqrtweight(&h)?.eval(0.3)?);

    // the arcsine density has vanishing transform on its support
    let arcsine = project_weighted(|_| 1.0 / std::f64::consts::PI, 16, unit)?;
    let ha = finite_hilbert_weighted(&arcsine)?;
    let worst = (1..20).map(|j| ha.eval(-0.95 + 0.1 * j as f64).unwrap().abs()).fold(0.0, f64::max);
    println!("max |H[arcsine]| on (-1,1): {worst:.1e}");

    // isometry for mean-zero data: ∫(Hf)²√(1-x²) = ∫f²√(1-x²)
    let g = project_weighted(|x| x.powi(5) - 0.3 * x * x + 0.15, 12, unit)?;
    let mut a = g.coeffs().to_vec();
    a[0] = 0.0;
    let energy: f64 = a.iter().skip(1).map(|c| c * c).sum::<f64>() * std::f64::consts::FRAC_PI_2;
    let hb = finite_hilbert_weighted(&ChebSeries::on_unit(Kind::First, a)?)?;
    let h_energy: f64 = hb.coeffs().iter().map(|c| c * c).sum::<f64>() * std::f64::consts::FRAC_PI_2;
    println!("energy {energy:.12} vs transformed {h_energy:.12}");

    // transforms on a shifted support
    let s = SupportInterval::new(2.0, 6.0)?;
    let p = project_weighted(|x| x - 4.0, 4, s)?;
    println!("H on [2, 6] at x = 5: {:.12}", finite_hilbert_weighted(&p)?.eval(5.0)?);
    Ok(())
}
