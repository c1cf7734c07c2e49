//! Where does a root of p' sit inside its gap? Compare the measured offset
//! from the gap midpoint with gap · arctan(Hu/u)/π.

use rootflow::poly_dynamics::microscopic_shift_diagnostic;
use rootflow::ClosedFormFamily;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> rootflow::Result<()> {
    for family in [
        ClosedFormFamily::arcsine_probability(),
        ClosedFormFamily::semicircle(1.0)?,
        ClosedFormFamily::marchenko_pastur(1.0)?,
    ] {
        for n in [200usize, 2000] {
            let samples = microscopic_shift_diagnostic(&family.sample_roots(0.0, n)?, &family, 0.0)?;
            let offset = median(samples.iter().map(|s| (s.predicted_offset - s.actual_offset).abs() / s.gap).collect());
            let shift = median(samples.iter().map(|s| (s.predicted_shift - s.actual_shift).abs() / s.gap).collect());
            println!(
                "{:18} n={n:5}  median offset error {offset:.2e} gaps, median shift error {shift:.2e} gaps",
                family.name()
            );
        }
    }
    Ok(())
}
